//! Elite coordination, state capacity and recognition.
//!
//! Two elite blocs choose each period between unifying institutions and
//! preserving fragmentation. Unification needs both; fragmentation survives
//! a single defection. The crate evaluates the model's laws of motion,
//! analyses the one-period stage game, simulates trajectories, and solves
//! for stationary Markov-perfect equilibria on a discretized `(K, R)` grid,
//! with a brute-force oracle for tiny instances.

pub mod dynamics;
pub mod error;
pub mod model;
pub mod mpe;
pub mod oracle;
pub mod report;
pub mod scenario;
pub mod stage;

pub use error::{Assumption, Error, Result, Violation};
pub use model::{
    regime_of, Action, ActionProfile, CapacityResponse, EliteParams, ExogenousEnv, Model, ModelParams,
    PeriodOutcome, PolityState, ProductivitySpec, Regime,
};
pub use stage::{StageBimatrix, StaticContext};
