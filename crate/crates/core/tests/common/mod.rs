#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use statehood_core::model::{CapacityResponse, EliteParams, ExogenousEnv, Model, ModelParams, ProductivitySpec};
use statehood_core::mpe::{build_grid, Projection, StateGrid};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.random::<f64>()
}

/// Productivity satisfying A1 and A5.
pub fn random_spec(r: &mut ChaCha8Rng) -> ProductivitySpec {
    let base_fragmented = uniform(r, 0.3, 1.5);
    let slope_fragmented = uniform(r, 0.0, 1.0);
    ProductivitySpec {
        base_fragmented,
        base_unified: base_fragmented + uniform(r, 0.01, 1.0),
        slope_fragmented,
        slope_unified: slope_fragmented + uniform(r, 0.01, 1.0),
    }
}

/// Elite satisfying A3, with `share_unified >= share_fragmented`.
/// `gap_scale` bounds the rent and control premia of fragmentation.
pub fn random_elite(r: &mut ChaCha8Rng, gap_scale: f64) -> EliteParams {
    let share_fragmented = uniform(r, 0.05, 0.4);
    let rents_unified = uniform(r, 0.0, 3.0);
    let control_unified = uniform(r, 0.0, 3.0);
    EliteParams {
        share_fragmented,
        share_unified: share_fragmented + uniform(r, 0.0, 0.3),
        rents_unified,
        rents_fragmented: rents_unified + uniform(r, 0.01, gap_scale),
        control_unified,
        control_fragmented: control_unified + uniform(r, 0.01, gap_scale),
        recognition_value: uniform(r, 0.0, 0.3),
        transfer_capture: uniform(r, 0.0, 1.0),
    }
}

/// Model parameters satisfying A2 with `I0 > lambda * q_F`.
pub fn random_params(r: &mut ChaCha8Rng, discount: f64) -> ModelParams {
    let risk_unified = uniform(r, 0.0, 0.5);
    let risk_fragmented = risk_unified + uniform(r, 0.01, 0.5);
    let invest_base = uniform(r, 1.0, 10.0);
    ModelParams {
        output_elasticity: uniform(r, 0.2, 0.6),
        labor: uniform(r, 0.5, 2.0),
        invest_base,
        invest_prod_sensitivity: uniform(r, 0.0, 3.0),
        invest_risk_sensitivity: uniform(r, 0.0, 1.0) * invest_base / risk_fragmented,
        risk_unified,
        risk_fragmented,
        depreciation: uniform(r, 0.05, 0.5),
        recognition_decay: uniform(r, 0.02, 0.5),
        diplomatic_weight: uniform(r, 0.0, 2.0),
        symbolic_weight: uniform(r, 0.0, 2.0),
        capacity_feedback: uniform(r, 0.0, 0.1),
        capacity_response: if r.random::<bool>() {
            CapacityResponse::Linear
        } else {
            CapacityResponse::Saturating
        },
        transfer_base: uniform(r, 0.0, 5.0),
        transfer_frag_premium: uniform(r, 0.0, 10.0),
        transfer_crisis_sensitivity: uniform(r, 0.0, 1.0),
        elite_discount: discount,
        gap_scale: uniform(r, 0.0, 1.0),
        recognition_threshold: uniform(r, 0.0, 30.0),
        capacity_threshold: uniform(r, 10.0, 200.0),
        welfare_capacity_weight: uniform(r, 0.0, 0.1),
        welfare_recognition_weight: uniform(r, 0.0, 0.1),
        static_capital_base: uniform(r, 50.0, 150.0),
    }
}

pub fn random_env(r: &mut ChaCha8Rng) -> ExogenousEnv {
    ExogenousEnv::new(
        uniform(r, 0.0, 1.0),
        uniform(r, 0.0, 3.0),
        uniform(r, 0.0, 3.0),
        uniform(r, 0.0, 2.0),
    )
}

pub fn random_model(r: &mut ChaCha8Rng, discount: f64, gap_scale: f64) -> Model {
    Model {
        params: random_params(r, discount),
        elites: [random_elite(r, gap_scale), random_elite(r, gap_scale)],
        productivity: random_spec(r),
    }
}

/// Nearest-node grid with at most four nodes.
pub fn random_small_grid(r: &mut ChaCha8Rng) -> StateGrid {
    const SHAPES: [(usize, usize); 8] = [(1, 1), (2, 1), (1, 2), (2, 2), (3, 1), (1, 3), (4, 1), (1, 4)];
    let (nk, nr) = SHAPES[r.random_range(0..SHAPES.len())];
    let k0 = uniform(r, 0.0, 60.0);
    let r0 = uniform(r, 0.0, 30.0);
    build_grid(
        (k0, k0 + uniform(r, 5.0, 100.0)),
        nk,
        (r0, r0 + uniform(r, 5.0, 50.0)),
        nr,
        Projection::NearestNode,
    )
    .unwrap()
}
