//! Brute-force ground truth for small instances.
//!
//! Nothing here calls into the solver's iteration code: stage-game Nash
//! profiles come from a literal deviation table, policy values from a dense
//! linear solve, and equilibria from exhaustive enumeration of stationary
//! policy pairs.

use std::collections::BTreeSet;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{regime_of, Action, ActionProfile, Model};
use crate::mpe::{DiscreteGame, Projection, SolverEnv, StateGrid};
use crate::stage::StageBimatrix;

/// Largest number of game states the exhaustive search accepts.
pub const MAX_BRUTE_FORCE_STATES: usize = 4;

pub const DEFAULT_DEVIATION_TOL: f64 = 1e-9;

/// Weak Nash profiles from the full table of unilateral deviations.
pub fn enumerate_stage_nash(bimatrix: &StageBimatrix) -> BTreeSet<ActionProfile> {
    let mut out = BTreeSet::new();
    for a1 in [Action::Unify, Action::Fragment] {
        for a2 in [Action::Unify, Action::Fragment] {
            let here = bimatrix.payoffs[a1.index()][a2.index()];
            let dev1 = bimatrix.payoffs[a1.other().index()][a2.index()][0];
            let dev2 = bimatrix.payoffs[a1.index()][a2.other().index()][1];
            if dev1 <= here[0] && dev2 <= here[1] {
                out.insert(ActionProfile::new(a1, a2));
            }
        }
    }
    out
}

/// One action per state for each bloc.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PolicyPair {
    pub actions: [Vec<Action>; 2],
}

impl PolicyPair {
    pub fn len(&self) -> usize {
        self.actions[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn regime_index(&self, s: usize) -> usize {
        regime_of(self.actions[0][s], self.actions[1][s]).index()
    }
}

/// Builds the finite game for an oracle run, enforcing nearest-node
/// projection so every transition lands exactly on grid nodes.
pub fn oracle_game(model: &Model, grid: &StateGrid, env: &SolverEnv) -> Result<DiscreteGame> {
    if grid.projection != Projection::NearestNode {
        return Err(Error::Domain("oracle requires nearest-node projection".into()));
    }
    DiscreteGame::from_model(model, grid, env)
}

fn dense_transition(game: &DiscreteGame, regime_of_state: impl Fn(usize) -> usize) -> DMatrix<f64> {
    let n = game.payoffs.len();
    let mut p = DMatrix::zeros(n, n);
    for s in 0..n {
        for &(j, w) in &game.transitions[s][regime_of_state(s)] {
            p[(s, j)] += w;
        }
    }
    p
}

/// Solves `(I - delta P) V = pi` for the regime path induced by `pair`.
pub fn policy_value_exact(pair: &PolicyPair, game: &DiscreteGame) -> Result<[Vec<f64>; 2]> {
    let n = game.payoffs.len();
    if pair.len() != n || pair.actions[1].len() != n {
        return Err(Error::Domain(format!(
            "policy covers {} states, game has {n}",
            pair.len()
        )));
    }
    let p = dense_transition(game, |s| pair.regime_index(s));
    let a = DMatrix::identity(n, n) - p * game.discount;
    let lu = a.lu();
    let mut out = [Vec::new(), Vec::new()];
    for (elite, slot) in out.iter_mut().enumerate() {
        let rhs = DVector::from_iterator(n, (0..n).map(|s| game.payoffs[s][pair.regime_index(s)][elite]));
        let v = lu
            .solve(&rhs)
            .ok_or_else(|| Error::Domain("singular policy-evaluation system".into()))?;
        *slot = v.iter().copied().collect();
    }
    Ok(out)
}

/// True when no bloc gains more than `tol` from a one-shot deviation at any state.
pub fn passes_one_shot_deviation(pair: &PolicyPair, game: &DiscreteGame, values: &[Vec<f64>; 2], tol: f64) -> bool {
    for s in 0..pair.len() {
        for elite in 0..2 {
            let mut deviated = [pair.actions[0][s], pair.actions[1][s]];
            deviated[elite] = deviated[elite].other();
            let r = regime_of(deviated[0], deviated[1]).index();
            let cont: f64 = game.transitions[s][r].iter().map(|&(j, w)| w * values[elite][j]).sum();
            let dev_value = game.payoffs[s][r][elite] + game.discount * cont;
            if dev_value > values[elite][s] + tol {
                return false;
            }
        }
    }
    true
}

fn policy_from_bits(bits: usize, n: usize) -> Vec<Action> {
    (0..n)
        .map(|s| if bits >> s & 1 == 1 { Action::Fragment } else { Action::Unify })
        .collect()
}

/// Every stationary policy pair with no profitable one-shot deviation.
pub fn brute_force_mpe(game: &DiscreteGame, tol: f64) -> Result<Vec<PolicyPair>> {
    let n = game.payoffs.len();
    if n > MAX_BRUTE_FORCE_STATES {
        return Err(Error::OracleTooLarge {
            nodes: n,
            limit: MAX_BRUTE_FORCE_STATES,
        });
    }
    let mut out = Vec::new();
    for b1 in 0..1usize << n {
        for b2 in 0..1usize << n {
            let pair = PolicyPair {
                actions: [policy_from_bits(b1, n), policy_from_bits(b2, n)],
            };
            let values = policy_value_exact(&pair, game)?;
            if passes_one_shot_deviation(&pair, game, &values, tol) {
                out.push(pair);
            }
        }
    }
    Ok(out)
}
