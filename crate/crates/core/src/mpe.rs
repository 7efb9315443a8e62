//! Stationary Markov-perfect equilibrium on a discretized `(K, R)` grid.
//!
//! The continuous model is first reduced to a [`DiscreteGame`]: a finite set
//! of states (grid node x crisis-shock value), a payoff pair per state and
//! regime, and a successor distribution per state and regime. Value
//! iteration then runs the bilateral decision rule on that game: at each
//! state both blocs compare continuation values under unification and
//! fragmentation, and unification is implemented only when neither loses.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{simulate, CrisisShock, ExogenousPath, Policy, Trajectory};
use crate::error::{Error, Result, Violation};
use crate::model::{regime_of, Action, ActionProfile, ExogenousEnv, Model, PolityState, Regime};
use crate::stage::{decision_regime, StageBimatrix};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Projection {
    NearestNode,
    #[default]
    Multilinear,
}

/// Tensor grid over capacity and recognition. Node `(i, j)` has flat index
/// `i * recognition.len() + j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateGrid {
    pub capacity: Vec<f64>,
    pub recognition: Vec<f64>,
    pub projection: Projection,
}

fn uniform_axis(name: &str, lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    if !(lo.is_finite() && hi.is_finite()) {
        return Err(Error::Grid(format!("{name} bounds must be finite")));
    }
    match n {
        0 => Err(Error::Grid(format!("{name} axis needs at least one node"))),
        1 => Ok(vec![lo]),
        _ if lo >= hi => Err(Error::Grid(format!("{name} bounds need lower < upper for {n} nodes"))),
        _ => Ok((0..n)
            .map(|i| if i == n - 1 { hi } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 })
            .collect()),
    }
}

/// Uniform grid; a single-node axis sits at its lower bound.
pub fn build_grid(
    capacity_bounds: (f64, f64),
    capacity_nodes: usize,
    recognition_bounds: (f64, f64),
    recognition_nodes: usize,
    projection: Projection,
) -> Result<StateGrid> {
    let grid = StateGrid {
        capacity: uniform_axis("capacity", capacity_bounds.0, capacity_bounds.1, capacity_nodes)?,
        recognition: uniform_axis("recognition", recognition_bounds.0, recognition_bounds.1, recognition_nodes)?,
        projection,
    };
    Ok(grid)
}

/// Per-axis weights: one node (nearest) or two neighbours (linear).
fn axis_weights(nodes: &[f64], x: f64, projection: Projection) -> [(usize, f64); 2] {
    let n = nodes.len();
    if n == 1 {
        return [(0, 1.0), (0, 0.0)];
    }
    let x = x.clamp(nodes[0], nodes[n - 1]);
    let hi = nodes.partition_point(|v| *v < x).clamp(1, n - 1);
    let lo = hi - 1;
    let w_hi = (x - nodes[lo]) / (nodes[hi] - nodes[lo]);
    match projection {
        Projection::Multilinear => [(lo, 1.0 - w_hi), (hi, w_hi)],
        // Ties go to the lower node.
        Projection::NearestNode => {
            if w_hi > 0.5 {
                [(hi, 1.0), (lo, 0.0)]
            } else {
                [(lo, 1.0), (hi, 0.0)]
            }
        }
    }
}

impl StateGrid {
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        for (name, axis) in [("capacity", &self.capacity), ("recognition", &self.recognition)] {
            if axis.is_empty() {
                out.push(Violation::plain(format!("grid {name} axis is empty")));
            }
            if axis.iter().any(|v| !v.is_finite()) {
                out.push(Violation::plain(format!("grid {name} nodes must be finite")));
            }
            if axis.windows(2).any(|w| w[0] >= w[1]) {
                out.push(Violation::plain(format!("grid {name} nodes must be strictly increasing")));
            }
        }
        out
    }

    pub fn len(&self) -> usize {
        self.capacity.len() * self.recognition.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn node(&self, index: usize) -> PolityState {
        let nr = self.recognition.len();
        PolityState {
            capacity: self.capacity[index / nr],
            recognition: self.recognition[index % nr],
        }
    }

    /// Clamps `state` into the grid and returns interpolation weights
    /// (zero-weight entries dropped).
    pub fn weights(&self, state: &PolityState) -> Vec<(usize, f64)> {
        let nr = self.recognition.len();
        let wk = axis_weights(&self.capacity, state.capacity, self.projection);
        let wr = axis_weights(&self.recognition, state.recognition, self.projection);
        let mut out = Vec::with_capacity(4);
        for (i, a) in wk {
            for (j, b) in wr {
                let w = a * b;
                if w > 0.0 {
                    out.push((i * nr + j, w));
                }
            }
        }
        out
    }

    pub fn nearest(&self, state: &PolityState) -> usize {
        let nr = self.recognition.len();
        let i = axis_weights(&self.capacity, state.capacity, Projection::NearestNode)[0].0;
        let j = axis_weights(&self.recognition, state.recognition, Projection::NearestNode)[0].0;
        i * nr + j
    }
}

/// Exogenous environment held fixed by the solver.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SolverEnv {
    Constant(ExogenousEnv),
    /// Crisis intensity redrawn i.i.d. each period and observed before acting.
    IidCrisis { base: ExogenousEnv, shock: CrisisShock },
}

impl SolverEnv {
    /// `(env, probability)` for each shock value.
    pub fn shocks(&self) -> Vec<(ExogenousEnv, f64)> {
        match self {
            SolverEnv::Constant(e) => vec![(*e, 1.0)],
            SolverEnv::IidCrisis { base, shock } => shock
                .support()
                .iter()
                .map(|&(h, p)| {
                    (
                        ExogenousEnv {
                            crisis_intensity: h,
                            ..*base
                        },
                        p,
                    )
                })
                .collect(),
        }
    }
}

/// A finite two-player game with regime-dependent payoffs and transitions.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteGame {
    pub discount: f64,
    /// `[state][regime][elite]`
    pub payoffs: Vec<[[f64; 2]; 2]>,
    /// `[state][regime]` successor distribution.
    pub transitions: Vec<[Vec<(usize, f64)>; 2]>,
}

impl DiscreteGame {
    /// State `s = shock * grid.len() + node`.
    pub fn from_model(model: &Model, grid: &StateGrid, env: &SolverEnv) -> Result<Self> {
        let shocks = env.shocks();
        let n = grid.len();
        let mut payoffs = Vec::with_capacity(n * shocks.len());
        let mut transitions = Vec::with_capacity(n * shocks.len());
        for (e, _) in &shocks {
            for node in 0..n {
                let x = grid.node(node);
                let mut pay = [[0.0; 2]; 2];
                let mut trans: [Vec<(usize, f64)>; 2] = [Vec::new(), Vec::new()];
                for regime in Regime::BOTH {
                    let o = model.period(&x, regime, e)?;
                    pay[regime.index()] = o.payoffs;
                    let w = grid.weights(&o.next);
                    for (k, (_, p)) in shocks.iter().enumerate() {
                        if *p > 0.0 {
                            trans[regime.index()].extend(w.iter().map(|&(j, wj)| (k * n + j, wj * p)));
                        }
                    }
                }
                payoffs.push(pay);
                transitions.push(trans);
            }
        }
        Ok(Self {
            discount: model.params.elite_discount,
            payoffs,
            transitions,
        })
    }

    /// The stage game repeated forever in a single absorbing state.
    pub fn repeated_stage(bimatrix: &StageBimatrix, discount: f64) -> Self {
        let uu = bimatrix.get(ActionProfile::new(Action::Unify, Action::Unify));
        let ff = bimatrix.get(ActionProfile::new(Action::Fragment, Action::Fragment));
        Self {
            discount,
            payoffs: vec![[uu, ff]],
            transitions: vec![[vec![(0, 1.0)], vec![(0, 1.0)]]],
        }
    }

    pub fn len(&self) -> usize {
        self.payoffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.payoffs.is_empty()
    }

    /// `Q[regime][elite]` at state `s` given continuation values.
    pub fn q_values(&self, values: &[Vec<f64>; 2], s: usize) -> [[f64; 2]; 2] {
        let mut q = self.payoffs[s];
        for regime in 0..2 {
            for (elite, v) in values.iter().enumerate() {
                let ev: f64 = self.transitions[s][regime].iter().map(|&(j, p)| p * v[j]).sum();
                q[regime][elite] += self.discount * ev;
            }
        }
        q
    }

    /// One synchronous sweep of the decision-rule operator.
    fn sweep(&self, values: &[Vec<f64>; 2]) -> Sweep {
        let per_state = |s: usize| {
            let q = self.q_values(values, s);
            let d = [q[0][0] - q[1][0], q[0][1] - q[1][1]];
            let regime = decision_regime(d[0], d[1]);
            (q[regime.index()], d, regime)
        };
        let rows: Vec<_> = if self.len() >= PARALLEL_STATES {
            (0..self.len()).into_par_iter().map(per_state).collect()
        } else {
            (0..self.len()).map(per_state).collect()
        };
        let mut out = Sweep {
            values: [Vec::with_capacity(rows.len()), Vec::with_capacity(rows.len())],
            deltas: [Vec::with_capacity(rows.len()), Vec::with_capacity(rows.len())],
            regime: Vec::with_capacity(rows.len()),
        };
        for (v, d, r) in rows {
            for i in 0..2 {
                out.values[i].push(v[i]);
                out.deltas[i].push(d[i]);
            }
            out.regime.push(r);
        }
        out
    }
}

const PARALLEL_STATES: usize = 512;

struct Sweep {
    values: [Vec<f64>; 2],
    deltas: [Vec<f64>; 2],
    regime: Vec<Regime>,
}

fn sup_distance(a: &[Vec<f64>; 2], b: &[Vec<f64>; 2]) -> f64 {
    a.iter()
        .zip(b)
        .flat_map(|(x, y)| x.iter().zip(y).map(|(p, q)| (p - q).abs()))
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            max_iter: 100_000,
        }
    }
}

/// Result of value iteration on a [`DiscreteGame`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameSolution {
    pub values: [Vec<f64>; 2],
    /// `Q_i(U) - Q_i(F)` at the final values.
    pub deltas: [Vec<f64>; 2],
    /// Each bloc plays `U` iff its own delta is non-negative.
    pub actions: [Vec<Action>; 2],
    pub regime: Vec<Regime>,
    pub residual_history: Vec<f64>,
    pub converged: bool,
    pub iterations: usize,
}

pub fn solve_game(game: &DiscreteGame, options: &SolverOptions) -> Result<GameSolution> {
    if !(options.tol > 0.0) {
        return Err(Error::Domain(format!("tolerance must be > 0 (got {})", options.tol)));
    }
    if !(game.discount > 0.0 && game.discount < 1.0) {
        return Err(Error::Domain(format!("discount {} outside (0,1)", game.discount)));
    }
    let n = game.len();
    let mut values = [vec![0.0; n], vec![0.0; n]];
    let mut history = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    while iterations < options.max_iter {
        let next = game.sweep(&values);
        let r = sup_distance(&next.values, &values);
        values = next.values;
        history.push(r);
        iterations += 1;
        if r <= options.tol {
            converged = true;
            break;
        }
    }
    let last = game.sweep(&values);
    let actions = [0, 1].map(|i| {
        last.deltas[i]
            .iter()
            .map(|d| if *d >= 0.0 { Action::Unify } else { Action::Fragment })
            .collect::<Vec<_>>()
    });
    Ok(GameSolution {
        values,
        deltas: last.deltas,
        actions,
        regime: last.regime,
        residual_history: history,
        converged,
        iterations,
    })
}

/// Stationary equilibrium selected by the bilateral decision rule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumSolution {
    pub grid: StateGrid,
    /// Crisis values with probabilities; a single entry when deterministic.
    pub shocks: Vec<(f64, f64)>,
    pub discount: f64,
    /// Per state (`shock * grid.len() + node`).
    pub v1: Vec<f64>,
    pub v2: Vec<f64>,
    pub delta1: Vec<f64>,
    pub delta2: Vec<f64>,
    pub actions1: Vec<Action>,
    pub actions2: Vec<Action>,
    pub regime_policy: Vec<Regime>,
    pub residual_history: Vec<f64>,
    pub converged: bool,
    pub iterations: usize,
}

pub fn solve_stationary(
    model: &Model,
    grid: &StateGrid,
    env: &SolverEnv,
    options: &SolverOptions,
) -> Result<EquilibriumSolution> {
    if let Some(v) = grid.validate().into_iter().next() {
        return Err(Error::Grid(v.message));
    }
    let game = DiscreteGame::from_model(model, grid, env)?;
    let sol = solve_game(&game, options)?;
    Ok(EquilibriumSolution::assemble(grid.clone(), env, game.discount, sol))
}

impl EquilibriumSolution {
    fn assemble(grid: StateGrid, env: &SolverEnv, discount: f64, sol: GameSolution) -> Self {
        let [v1, v2] = sol.values;
        let [delta1, delta2] = sol.deltas;
        let [actions1, actions2] = sol.actions;
        Self {
            grid,
            shocks: env.shocks().iter().map(|(e, p)| (e.crisis_intensity, *p)).collect(),
            discount,
            v1,
            v2,
            delta1,
            delta2,
            actions1,
            actions2,
            regime_policy: sol.regime,
            residual_history: sol.residual_history,
            converged: sol.converged,
            iterations: sol.iterations,
        }
    }

    pub fn values(&self) -> [Vec<f64>; 2] {
        [self.v1.clone(), self.v2.clone()]
    }

    pub fn state_index(&self, shock: usize, node: usize) -> usize {
        shock * self.grid.len() + node
    }

    /// Expected continuation values `E[V_i(x', h')]`.
    pub fn continuation(&self, next: &PolityState) -> [f64; 2] {
        let w = self.grid.weights(next);
        let mut out = [0.0; 2];
        for (k, (_, p)) in self.shocks.iter().enumerate() {
            for &(j, wj) in &w {
                let s = self.state_index(k, j);
                out[0] += p * wj * self.v1[s];
                out[1] += p * wj * self.v2[s];
            }
        }
        out
    }

    /// Continuation-value unification gains at an arbitrary state.
    pub fn delta_at(&self, model: &Model, state: &PolityState, env: &ExogenousEnv) -> Result<[f64; 2]> {
        let mut q = [[0.0; 2]; 2];
        for regime in Regime::BOTH {
            let o = model.period(state, regime, env)?;
            let c = self.continuation(&o.next);
            for i in 0..2 {
                q[regime.index()][i] = o.payoffs[i] + self.discount * c[i];
            }
        }
        Ok([q[0][0] - q[1][0], q[0][1] - q[1][1]])
    }

    /// Closed-loop regime. Nearest-node solutions read the stored policy;
    /// multilinear ones re-apply the decision rule at the actual state.
    pub fn regime_at(&self, model: &Model, state: &PolityState, env: &ExogenousEnv) -> Result<Regime> {
        match self.grid.projection {
            Projection::NearestNode => {
                let shock = self
                    .shocks
                    .iter()
                    .enumerate()
                    .min_by(|a, b| {
                        let da = (a.1 .0 - env.crisis_intensity).abs();
                        let db = (b.1 .0 - env.crisis_intensity).abs();
                        da.total_cmp(&db)
                    })
                    .map(|(k, _)| k)
                    .unwrap_or(0);
                Ok(self.regime_policy[self.state_index(shock, self.grid.nearest(state))])
            }
            Projection::Multilinear => {
                let d = self.delta_at(model, state, env)?;
                Ok(decision_regime(d[0], d[1]))
            }
        }
    }

    pub fn unified_states(&self) -> usize {
        self.regime_policy.iter().filter(|r| **r == Regime::Unified).count()
    }
}

/// Sup-norm change of one Bellman sweep applied to the stored values.
pub fn bellman_residual(solution: &EquilibriumSolution, model: &Model, env: &SolverEnv) -> Result<f64> {
    let game = DiscreteGame::from_model(model, &solution.grid, env)?;
    Ok(game_residual(&game, &solution.values()))
}

pub fn game_residual(game: &DiscreteGame, values: &[Vec<f64>; 2]) -> f64 {
    sup_distance(&game.sweep(values).values, values)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeviationReport {
    /// Largest gain from a unilateral one-shot deviation (0 if none gains).
    pub worst_violation: f64,
    /// `(state, elite)` where the worst violation occurs.
    pub worst_at: Option<(usize, usize)>,
    pub pass: bool,
}

/// One-shot deviation check of the stored action pair against the stored values.
pub fn verify_no_deviation(
    solution: &EquilibriumSolution,
    model: &Model,
    env: &SolverEnv,
    tol: f64,
) -> Result<DeviationReport> {
    let game = DiscreteGame::from_model(model, &solution.grid, env)?;
    Ok(verify_game_no_deviation(
        &game,
        &solution.values(),
        [&solution.actions1, &solution.actions2],
        tol,
    ))
}

pub fn verify_game_no_deviation(
    game: &DiscreteGame,
    values: &[Vec<f64>; 2],
    actions: [&[Action]; 2],
    tol: f64,
) -> DeviationReport {
    let mut worst = 0.0;
    let mut worst_at = None;
    for s in 0..game.len() {
        let q = game.q_values(values, s);
        let profile = ActionProfile::new(actions[0][s], actions[1][s]);
        for elite in 0..2 {
            let eq = profile.regime();
            let dev = profile.with(elite, profile.action(elite).other()).regime();
            let gain = q[dev.index()][elite] - q[eq.index()][elite];
            if gain > worst {
                worst = gain;
                worst_at = Some((s, elite));
            }
        }
    }
    DeviationReport {
        worst_violation: worst,
        worst_at,
        pass: worst <= tol,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EquilibriumClass {
    NominalStatehood,
    UnifiedConvergent,
    Other,
}

/// The four conditions of a nominal-statehood path, checked from the burn-in on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassificationEvidence {
    pub fragmented_from_burn_in: bool,
    pub recognition_above_threshold: bool,
    pub capacity_below_threshold: bool,
    pub gap_non_decreasing: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub class: EquilibriumClass,
    /// First period after which the regime never changes, if that happens
    /// within the first half of the horizon.
    pub burn_in: Option<usize>,
    pub evidence: ClassificationEvidence,
    #[serde(skip)]
    pub trajectory: Option<Trajectory>,
}

pub const GAP_SLACK: f64 = 1e-9;

/// Simulates the closed-loop path from `x0` and classifies it.
pub fn classify_equilibrium(
    solution: &EquilibriumSolution,
    model: &Model,
    path: &ExogenousPath,
    x0: PolityState,
) -> Result<Classification> {
    let tr = simulate(model, path, Policy::Equilibrium(solution), x0)?;
    let horizon = tr.horizon();
    let regimes: Vec<Regime> = tr.records.iter().map(|r| r.regime).collect();
    let burn_in = regimes
        .last()
        .map(|last| regimes.iter().rposition(|r| r != last).map_or(0, |i| i + 1))
        .filter(|t0| *t0 <= horizon / 2);
    let final_regime = regimes.last().copied();

    let t0 = burn_in.unwrap_or(0);
    let states = tr.states();
    let tail = &states[t0..];
    let gaps: Vec<f64> = tr.gaps(model)[t0..].to_vec();
    let p = &model.params;
    let evidence = ClassificationEvidence {
        fragmented_from_burn_in: burn_in.is_some() && final_regime == Some(Regime::Fragmented),
        recognition_above_threshold: tail.iter().all(|s| s.recognition >= p.recognition_threshold),
        capacity_below_threshold: tail.iter().all(|s| s.capacity < p.capacity_threshold),
        gap_non_decreasing: gaps.windows(2).all(|w| w[1] >= w[0] - GAP_SLACK),
    };
    let class = if evidence.fragmented_from_burn_in
        && evidence.recognition_above_threshold
        && evidence.capacity_below_threshold
        && evidence.gap_non_decreasing
    {
        EquilibriumClass::NominalStatehood
    } else if burn_in.is_some() && final_regime == Some(Regime::Unified) {
        EquilibriumClass::UnifiedConvergent
    } else {
        EquilibriumClass::Other
    };
    Ok(Classification {
        class,
        burn_in,
        evidence,
        trajectory: Some(tr),
    })
}

/// Helper for tests and callers that only hold actions.
pub fn induced_regimes(actions: [&[Action]; 2]) -> Vec<Regime> {
    actions[0].iter().zip(actions[1]).map(|(a, b)| regime_of(*a, *b)).collect()
}
