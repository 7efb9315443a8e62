//! Finite-horizon trajectories, unified-versus-fragmented path comparisons
//! and finite-difference comparative statics of the unification gain.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, Violation};
use crate::model::{ExogenousEnv, Model, PolityState, Regime};
use crate::mpe::{solve_stationary, EquilibriumSolution, SolverEnv, SolverOptions, StateGrid};
use crate::stage::{decision_regime, static_delta, StaticContext};

/// Two-point i.i.d. crisis intensity: `high` with probability `prob_high`, else `low`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CrisisShock {
    pub low: f64,
    pub high: f64,
    pub prob_high: f64,
}

impl CrisisShock {
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        if !(self.low.is_finite() && self.low >= 0.0 && self.high.is_finite() && self.high >= 0.0) {
            out.push(Violation::plain("crisis shock values must be finite and >= 0"));
        }
        if !(0.0..=1.0).contains(&self.prob_high) {
            out.push(Violation::plain("crisis shock prob_high must lie in [0,1]"));
        }
        out
    }

    /// Support points with their probabilities, low first. Zero-probability
    /// points are kept so the support size is always two.
    pub fn support(&self) -> [(f64, f64); 2] {
        [(self.low, 1.0 - self.prob_high), (self.high, self.prob_high)]
    }

    pub fn mean(&self) -> f64 {
        self.low * (1.0 - self.prob_high) + self.high * self.prob_high
    }

    pub fn draw<R: Rng>(&self, rng: &mut R) -> f64 {
        if rng.random::<f64>() < self.prob_high {
            self.high
        } else {
            self.low
        }
    }
}

/// Per-period exogenous drivers over a finite horizon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExogenousPath {
    pub periods: Vec<ExogenousEnv>,
}

impl ExogenousPath {
    pub fn constant(env: ExogenousEnv, horizon: usize) -> Self {
        Self {
            periods: vec![env; horizon],
        }
    }

    pub fn from_periods(periods: Vec<ExogenousEnv>) -> Result<Self> {
        let bad: Vec<Violation> = periods
            .iter()
            .enumerate()
            .flat_map(|(t, e)| {
                e.validate().into_iter().map(move |v| Violation::plain(format!("period {t}: {v}")))
            })
            .collect();
        if bad.is_empty() {
            Ok(Self { periods })
        } else {
            Err(Error::Validation(bad))
        }
    }

    /// Replaces every crisis intensity with an i.i.d. draw from `shock`.
    pub fn with_iid_crisis(mut self, shock: &CrisisShock, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for e in &mut self.periods {
            e.crisis_intensity = shock.draw(&mut rng);
        }
        self
    }

    pub fn horizon(&self) -> usize {
        self.periods.len()
    }
}

/// How the regime is chosen in each period of a simulation.
#[derive(Debug, Clone, Copy)]
pub enum Policy<'a> {
    Fixed(Regime),
    Sequence(&'a [Regime]),
    /// Decision rule applied to one-period gains at the current state.
    Myopic,
    /// Decision rule applied to continuation values of a solved equilibrium.
    Equilibrium(&'a EquilibriumSolution),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeriodRecord {
    pub t: usize,
    pub regime: Regime,
    pub state: PolityState,
    pub productivity: f64,
    pub output: f64,
    pub investment: f64,
    pub transfer: f64,
    pub payoffs: [f64; 2],
    pub welfare: f64,
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub initial: PolityState,
    pub records: Vec<PeriodRecord>,
    /// State after the last period (equal to `initial` for horizon 0).
    pub terminal: PolityState,
}

impl Trajectory {
    pub fn horizon(&self) -> usize {
        self.records.len()
    }

    /// `horizon + 1` states, starting with the initial one.
    pub fn states(&self) -> Vec<PolityState> {
        let mut out: Vec<PolityState> = self.records.iter().map(|r| r.state).collect();
        out.push(self.terminal);
        out
    }

    pub fn gaps(&self, model: &Model) -> Vec<f64> {
        self.states()
            .iter()
            .map(|s| crate::model::recognition_capacity_gap(&model.params, s))
            .collect()
    }
}

pub fn simulate(model: &Model, path: &ExogenousPath, policy: Policy<'_>, x0: PolityState) -> Result<Trajectory> {
    if let Some(v) = x0.validate().into_iter().next() {
        return Err(Error::Domain(v.message));
    }
    if let Policy::Sequence(seq) = policy {
        if seq.len() < path.horizon() {
            return Err(Error::Domain(format!(
                "regime sequence has {} entries for horizon {}",
                seq.len(),
                path.horizon()
            )));
        }
    }
    let mut state = x0;
    let mut records = Vec::with_capacity(path.horizon());
    for (t, env) in path.periods.iter().enumerate() {
        let regime = match policy {
            Policy::Fixed(r) => r,
            Policy::Sequence(seq) => seq[t],
            Policy::Myopic => {
                let ctx = StaticContext::at_state(model, &state, env)?;
                decision_regime(static_delta(&model.elites[0], &ctx), static_delta(&model.elites[1], &ctx))
            }
            Policy::Equilibrium(sol) => sol.regime_at(model, &state, env)?,
        };
        let o = model.period(&state, regime, env)?;
        records.push(PeriodRecord {
            t,
            regime,
            state,
            productivity: o.productivity,
            output: o.output,
            investment: o.investment,
            transfer: o.transfer,
            payoffs: o.payoffs,
            welfare: o.welfare,
            gap: o.gap,
        });
        state = o.next;
    }
    Ok(Trajectory {
        initial: x0,
        records,
        terminal: state,
    })
}

/// All-unified and all-fragmented trajectories from the same start.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathComparison {
    pub unified: Trajectory,
    pub fragmented: Trajectory,
    /// `K^U_t - K^F_t`, one entry per state.
    pub capacity_difference: Vec<f64>,
    /// `R^U_t - R^F_t`
    pub recognition_difference: Vec<f64>,
    /// `G^F_t - G^U_t`
    pub gap_divergence: Vec<f64>,
}

pub fn compare_paths(model: &Model, path: &ExogenousPath, x0: PolityState) -> Result<PathComparison> {
    let unified = simulate(model, path, Policy::Fixed(Regime::Unified), x0)?;
    let fragmented = simulate(model, path, Policy::Fixed(Regime::Fragmented), x0)?;
    let su = unified.states();
    let sf = fragmented.states();
    let gu = unified.gaps(model);
    let gf = fragmented.gaps(model);
    Ok(PathComparison {
        capacity_difference: su.iter().zip(&sf).map(|(u, f)| u.capacity - f.capacity).collect(),
        recognition_difference: su.iter().zip(&sf).map(|(u, f)| u.recognition - f.recognition).collect(),
        gap_divergence: gf.iter().zip(&gu).map(|(f, u)| f - u).collect(),
        unified,
        fragmented,
    })
}

/// Open interval `(lower, upper)` of gap scales; empty when `lower >= upper`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PsiInterval {
    pub lower: f64,
    pub upper: f64,
}

impl PsiInterval {
    pub const EMPTY: PsiInterval = PsiInterval { lower: 0.0, upper: 0.0 };

    pub fn is_empty(&self) -> bool {
        self.lower >= self.upper
    }

    pub fn contains(&self, psi: f64) -> bool {
        psi > self.lower && psi < self.upper
    }
}

/// Gap scales `psi > 0` for which `G^F_t > G^U_t` at period `t`.
pub fn gap_divergence_interval(pair: &PathComparison, t: usize) -> Result<PsiInterval> {
    let n = pair.capacity_difference.len();
    if t >= n {
        return Err(Error::Domain(format!("period {t} outside horizon {}", n - 1)));
    }
    // G^F - G^U = (R^F - R^U) + psi (K^U - K^F) > 0
    let dr = -pair.recognition_difference[t];
    let dk = pair.capacity_difference[t];
    Ok(if dk > 0.0 {
        PsiInterval {
            lower: (-dr / dk).max(0.0),
            upper: f64::INFINITY,
        }
    } else if dk < 0.0 {
        if dr > 0.0 {
            PsiInterval {
                lower: 0.0,
                upper: dr / -dk,
            }
        } else {
            PsiInterval::EMPTY
        }
    } else if dr > 0.0 {
        PsiInterval {
            lower: 0.0,
            upper: f64::INFINITY,
        }
    } else {
        PsiInterval::EMPTY
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SensitivityTarget {
    /// `tau_1`
    TransferPremium,
    Peace,
    DiplomaticSupport,
    SymbolicSupport,
}

/// Which unification gain is differentiated.
#[derive(Debug, Clone)]
pub enum DeltaBasis {
    /// Static calibration with `K_theta = K0 - lambda q`.
    StaticCalibration,
    /// One-period gain at a dynamic state.
    Myopic(PolityState),
    /// Continuation-value gain at a state, from a freshly solved equilibrium.
    Continuation {
        grid: StateGrid,
        state: PolityState,
        options: SolverOptions,
    },
}

pub const DEFAULT_FD_STEP: f64 = 1e-5;

/// Unification gain of both blocs under `basis`.
pub fn unification_gains(model: &Model, env: &ExogenousEnv, basis: &DeltaBasis) -> Result<[f64; 2]> {
    let from_ctx = |ctx: StaticContext| [static_delta(&model.elites[0], &ctx), static_delta(&model.elites[1], &ctx)];
    match basis {
        DeltaBasis::StaticCalibration => Ok(from_ctx(StaticContext::from_static_model(
            &model.params,
            &model.productivity,
            env,
            0.0,
        )?)),
        DeltaBasis::Myopic(state) => Ok(from_ctx(StaticContext::at_state(model, state, env)?)),
        DeltaBasis::Continuation { grid, state, options } => {
            let sol = solve_stationary(model, grid, &SolverEnv::Constant(*env), options)?;
            sol.delta_at(model, state, env)
        }
    }
}

/// Central finite difference of both gains in `target`, with step
/// `h * max(|x|, 1)`.
pub fn delta_sensitivity(
    model: &Model,
    env: &ExogenousEnv,
    basis: &DeltaBasis,
    target: SensitivityTarget,
    h: f64,
) -> Result<[f64; 2]> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::Domain(format!("finite-difference step must be > 0 (got {h})")));
    }
    let x = match target {
        SensitivityTarget::TransferPremium => model.params.transfer_frag_premium,
        SensitivityTarget::Peace => env.peace,
        SensitivityTarget::DiplomaticSupport => env.diplomatic_support,
        SensitivityTarget::SymbolicSupport => env.symbolic_support,
    };
    let step = h * x.abs().max(1.0);
    let at = |value: f64| -> Result<[f64; 2]> {
        let mut m = model.clone();
        let mut e = *env;
        match target {
            SensitivityTarget::TransferPremium => m.params.transfer_frag_premium = value,
            SensitivityTarget::Peace => e.peace = value,
            SensitivityTarget::DiplomaticSupport => e.diplomatic_support = value,
            SensitivityTarget::SymbolicSupport => e.symbolic_support = value,
        }
        let upper = if target == SensitivityTarget::Peace { 1.0 } else { f64::INFINITY };
        if !(0.0..=upper).contains(&value) {
            return Err(Error::Domain(format!(
                "perturbed {target:?} = {value} leaves the valid region"
            )));
        }
        unification_gains(&m, &e, basis)
    };
    let hi = at(x + step)?;
    let lo = at(x - step)?;
    Ok([(hi[0] - lo[0]) / (2.0 * step), (hi[1] - lo[1]) / (2.0 * step)])
}
