//! Primitive equations of the elite-coordination model.
//!
//! Every function here is a pure evaluation of one law of the model:
//! production, investment, the two laws of motion, transfers, elite
//! payoffs, welfare and the recognition-capacity gap. The stage game,
//! the simulator and the equilibrium solver are all built from these.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Assumption, Error, Result, Violation};

/// A bloc's choice in one period.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Action {
    #[serde(rename = "U")]
    Unify,
    #[serde(rename = "F")]
    Fragment,
}

impl Action {
    pub const BOTH: [Action; 2] = [Action::Unify, Action::Fragment];

    pub fn other(self) -> Action {
        match self {
            Action::Unify => Action::Fragment,
            Action::Fragment => Action::Unify,
        }
    }

    pub(crate) fn index(self) -> usize {
        match self {
            Action::Unify => 0,
            Action::Fragment => 1,
        }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Action::Unify => "U",
            Action::Fragment => "F",
        })
    }
}

/// Institutional regime in force during a period.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Regime {
    Unified,
    Fragmented,
}

impl Regime {
    pub const BOTH: [Regime; 2] = [Regime::Unified, Regime::Fragmented];

    pub(crate) fn index(self) -> usize {
        match self {
            Regime::Unified => 0,
            Regime::Fragmented => 1,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Regime::Unified => "U",
            Regime::Fragmented => "F",
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Unification needs both blocs; either bloc can keep fragmentation alone.
pub fn regime_of(a1: Action, a2: Action) -> Regime {
    match (a1, a2) {
        (Action::Unify, Action::Unify) => Regime::Unified,
        _ => Regime::Fragmented,
    }
}

/// Actions of (bloc 1, bloc 2).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ActionProfile {
    pub a1: Action,
    pub a2: Action,
}

impl ActionProfile {
    pub const fn new(a1: Action, a2: Action) -> Self {
        Self { a1, a2 }
    }

    pub const ALL: [ActionProfile; 4] = [
        ActionProfile::new(Action::Unify, Action::Unify),
        ActionProfile::new(Action::Unify, Action::Fragment),
        ActionProfile::new(Action::Fragment, Action::Unify),
        ActionProfile::new(Action::Fragment, Action::Fragment),
    ];

    pub fn regime(self) -> Regime {
        regime_of(self.a1, self.a2)
    }

    pub fn action(self, player: usize) -> Action {
        if player == 0 {
            self.a1
        } else {
            self.a2
        }
    }

    /// Replace one player's action.
    pub fn with(self, player: usize, action: Action) -> Self {
        if player == 0 {
            Self { a1: action, ..self }
        } else {
            Self { a2: action, ..self }
        }
    }
}

impl fmt::Display for ActionProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.a1, self.a2)
    }
}

/// Affine institutional productivity `base + slope * peace`, one pair per regime.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProductivitySpec {
    pub base_unified: f64,
    pub base_fragmented: f64,
    pub slope_unified: f64,
    pub slope_fragmented: f64,
}

impl ProductivitySpec {
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let fields = [
            ("base_unified", self.base_unified),
            ("base_fragmented", self.base_fragmented),
            ("slope_unified", self.slope_unified),
            ("slope_fragmented", self.slope_fragmented),
        ];
        for (name, v) in fields {
            if !v.is_finite() {
                out.push(Violation::plain(format!("productivity.{name} must be finite")));
            }
        }
        if self.base_fragmented <= 0.0 {
            out.push(Violation::plain("productivity.base_fragmented must be > 0"));
        }
        if self.slope_fragmented < 0.0 {
            out.push(Violation::plain("productivity.slope_fragmented must be >= 0"));
        }
        // Affine in p, so checking both endpoints covers [0,1].
        for p in [0.0, 1.0] {
            let u = self.base_unified + self.slope_unified * p;
            let f = self.base_fragmented + self.slope_fragmented * p;
            if u <= f {
                out.push(Violation::assumption(
                    Assumption::A1,
                    format!("A(U,{p}) = {u} <= A(F,{p}) = {f}"),
                ));
                break;
            }
        }
        if self.slope_unified <= self.slope_fragmented {
            out.push(Violation::assumption(
                Assumption::A5,
                format!(
                    "slope_unified = {} <= slope_fragmented = {}",
                    self.slope_unified, self.slope_fragmented
                ),
            ));
        }
        out
    }
}

/// Shape of the capacity term `m(K)` in the recognition law of motion.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CapacityResponse {
    /// `m(K) = K`
    #[default]
    Linear,
    /// `m(K) = K / (1 + K)`
    Saturating,
}

impl CapacityResponse {
    pub fn eval(self, capacity: f64) -> f64 {
        match self {
            CapacityResponse::Linear => capacity,
            CapacityResponse::Saturating => capacity / (1.0 + capacity),
        }
    }
}

/// Scalar constants of the model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParams {
    pub output_elasticity: f64,
    pub labor: f64,
    pub invest_base: f64,
    pub invest_prod_sensitivity: f64,
    pub invest_risk_sensitivity: f64,
    pub risk_unified: f64,
    pub risk_fragmented: f64,
    pub depreciation: f64,
    pub recognition_decay: f64,
    pub diplomatic_weight: f64,
    pub symbolic_weight: f64,
    pub capacity_feedback: f64,
    #[serde(default)]
    pub capacity_response: CapacityResponse,
    pub transfer_base: f64,
    pub transfer_frag_premium: f64,
    pub transfer_crisis_sensitivity: f64,
    pub elite_discount: f64,
    pub gap_scale: f64,
    pub recognition_threshold: f64,
    pub capacity_threshold: f64,
    pub welfare_capacity_weight: f64,
    pub welfare_recognition_weight: f64,
    pub static_capital_base: f64,
}

impl ModelParams {
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let all = [
            ("output_elasticity", self.output_elasticity),
            ("labor", self.labor),
            ("invest_base", self.invest_base),
            ("invest_prod_sensitivity", self.invest_prod_sensitivity),
            ("invest_risk_sensitivity", self.invest_risk_sensitivity),
            ("risk_unified", self.risk_unified),
            ("risk_fragmented", self.risk_fragmented),
            ("depreciation", self.depreciation),
            ("recognition_decay", self.recognition_decay),
            ("diplomatic_weight", self.diplomatic_weight),
            ("symbolic_weight", self.symbolic_weight),
            ("capacity_feedback", self.capacity_feedback),
            ("transfer_base", self.transfer_base),
            ("transfer_frag_premium", self.transfer_frag_premium),
            ("transfer_crisis_sensitivity", self.transfer_crisis_sensitivity),
            ("elite_discount", self.elite_discount),
            ("gap_scale", self.gap_scale),
            ("recognition_threshold", self.recognition_threshold),
            ("capacity_threshold", self.capacity_threshold),
            ("welfare_capacity_weight", self.welfare_capacity_weight),
            ("welfare_recognition_weight", self.welfare_recognition_weight),
            ("static_capital_base", self.static_capital_base),
        ];
        for (name, v) in all {
            if !v.is_finite() {
                out.push(Violation::plain(format!("model.{name} must be finite")));
            } else if v < 0.0 {
                out.push(Violation::plain(format!("model.{name} must be >= 0 (got {v})")));
            }
        }
        let open_unit = [
            ("output_elasticity", self.output_elasticity),
            ("depreciation", self.depreciation),
            ("recognition_decay", self.recognition_decay),
            ("elite_discount", self.elite_discount),
        ];
        for (name, v) in open_unit {
            if !(v > 0.0 && v < 1.0) {
                out.push(Violation::plain(format!("model.{name} must lie in (0,1) (got {v})")));
            }
        }
        let positive = [
            ("labor", self.labor),
            ("invest_base", self.invest_base),
            ("invest_prod_sensitivity", self.invest_prod_sensitivity),
            ("invest_risk_sensitivity", self.invest_risk_sensitivity),
            ("static_capital_base", self.static_capital_base),
        ];
        for (name, v) in positive {
            if v.is_finite() && v == 0.0 {
                out.push(Violation::plain(format!("model.{name} must be > 0")));
            }
        }
        for (name, v) in [
            ("risk_unified", self.risk_unified),
            ("risk_fragmented", self.risk_fragmented),
        ] {
            if v > 1.0 {
                out.push(Violation::plain(format!("model.{name} must lie in [0,1] (got {v})")));
            }
        }
        if self.risk_fragmented <= self.risk_unified {
            out.push(Violation::assumption(
                Assumption::A2,
                format!(
                    "q_F = {} <= q_U = {}",
                    self.risk_fragmented, self.risk_unified
                ),
            ));
        }
        out
    }

    pub fn risk(&self, regime: Regime) -> f64 {
        match regime {
            Regime::Unified => self.risk_unified,
            Regime::Fragmented => self.risk_fragmented,
        }
    }
}

/// Payoff primitives of one elite bloc.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EliteParams {
    pub share_unified: f64,
    pub share_fragmented: f64,
    pub rents_unified: f64,
    pub rents_fragmented: f64,
    pub control_unified: f64,
    pub control_fragmented: f64,
    pub recognition_value: f64,
    pub transfer_capture: f64,
}

impl EliteParams {
    pub fn validate(&self, bloc: usize) -> Vec<Violation> {
        let mut out = Vec::new();
        let tag = |name: &str| format!("elites[{bloc}].{name}");
        let all = [
            ("share_unified", self.share_unified),
            ("share_fragmented", self.share_fragmented),
            ("rents_unified", self.rents_unified),
            ("rents_fragmented", self.rents_fragmented),
            ("control_unified", self.control_unified),
            ("control_fragmented", self.control_fragmented),
            ("recognition_value", self.recognition_value),
            ("transfer_capture", self.transfer_capture),
        ];
        for (name, v) in all {
            if !v.is_finite() {
                out.push(Violation::plain(format!("{} must be finite", tag(name))));
            }
        }
        for (name, v) in [
            ("share_unified", self.share_unified),
            ("share_fragmented", self.share_fragmented),
        ] {
            if !(v > 0.0 && v < 1.0) {
                out.push(Violation::plain(format!("{} must lie in (0,1) (got {v})", tag(name))));
            }
        }
        if self.recognition_value < 0.0 {
            out.push(Violation::plain(format!("{} must be >= 0", tag("recognition_value"))));
        }
        if !(0.0..=1.0).contains(&self.transfer_capture) {
            out.push(Violation::plain(format!("{} must lie in [0,1]", tag("transfer_capture"))));
        }
        if self.rents_fragmented <= self.rents_unified {
            out.push(Violation::assumption(
                Assumption::A3,
                format!(
                    "bloc {bloc}: r(F) = {} <= r(U) = {}",
                    self.rents_fragmented, self.rents_unified
                ),
            ));
        }
        if self.control_fragmented <= self.control_unified {
            out.push(Violation::assumption(
                Assumption::A3,
                format!(
                    "bloc {bloc}: gamma(F) = {} <= gamma(U) = {}",
                    self.control_fragmented, self.control_unified
                ),
            ));
        }
        out
    }

    pub fn share(&self, regime: Regime) -> f64 {
        match regime {
            Regime::Unified => self.share_unified,
            Regime::Fragmented => self.share_fragmented,
        }
    }

    pub fn rents(&self, regime: Regime) -> f64 {
        match regime {
            Regime::Unified => self.rents_unified,
            Regime::Fragmented => self.rents_fragmented,
        }
    }

    pub fn control(&self, regime: Regime) -> f64 {
        match regime {
            Regime::Unified => self.control_unified,
            Regime::Fragmented => self.control_fragmented,
        }
    }

    /// `r(F) - r(U)`
    pub fn rent_gap(&self) -> f64 {
        self.rents_fragmented - self.rents_unified
    }

    /// `gamma(F) - gamma(U)`
    pub fn control_gap(&self) -> f64 {
        self.control_fragmented - self.control_unified
    }
}

/// The state pair `(K, R)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolityState {
    pub capacity: f64,
    pub recognition: f64,
}

impl PolityState {
    pub fn new(capacity: f64, recognition: f64) -> Result<Self> {
        let s = Self {
            capacity,
            recognition,
        };
        match s.validate().into_iter().next() {
            Some(v) => Err(Error::Domain(v.message)),
            None => Ok(s),
        }
    }

    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        for (name, v) in [("capacity", self.capacity), ("recognition", self.recognition)] {
            if !v.is_finite() || v < 0.0 {
                out.push(Violation::plain(format!(
                    "state.{name} must be finite and >= 0 (got {v})"
                )));
            }
        }
        out
    }
}

/// Exogenous drivers for one period.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExogenousEnv {
    pub peace: f64,
    #[serde(default)]
    pub diplomatic_support: f64,
    #[serde(default)]
    pub symbolic_support: f64,
    #[serde(default)]
    pub crisis_intensity: f64,
}

impl ExogenousEnv {
    /// Builds an environment with peace clamped into `[0,1]`.
    pub fn new(peace: f64, diplomatic: f64, symbolic: f64, crisis: f64) -> Self {
        Self {
            peace: peace.clamp(0.0, 1.0),
            diplomatic_support: diplomatic,
            symbolic_support: symbolic,
            crisis_intensity: crisis,
        }
    }

    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        if !(0.0..=1.0).contains(&self.peace) {
            out.push(Violation::plain(format!(
                "environment.peace must lie in [0,1] (got {})",
                self.peace
            )));
        }
        for (name, v) in [
            ("diplomatic_support", self.diplomatic_support),
            ("symbolic_support", self.symbolic_support),
            ("crisis_intensity", self.crisis_intensity),
        ] {
            if !v.is_finite() || v < 0.0 {
                out.push(Violation::plain(format!("environment.{name} must be >= 0 (got {v})")));
            }
        }
        out
    }
}

pub fn institutional_productivity(spec: &ProductivitySpec, regime: Regime, peace: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&peace) {
        return Err(Error::Domain(format!("peace {peace} outside [0,1]")));
    }
    Ok(match regime {
        Regime::Unified => spec.base_unified + spec.slope_unified * peace,
        Regime::Fragmented => spec.base_fragmented + spec.slope_fragmented * peace,
    })
}

/// `A * K^alpha * L^(1-alpha)`
pub fn output(params: &ModelParams, productivity: f64, capacity: f64) -> Result<f64> {
    if capacity < 0.0 || capacity.is_nan() {
        return Err(Error::Domain(format!("negative capacity {capacity}")));
    }
    let alpha = params.output_elasticity;
    Ok(productivity * capacity.powf(alpha) * params.labor.powf(1.0 - alpha))
}

/// `I_0 + phi * A - lambda * q(regime)`; may be negative.
pub fn investment(params: &ModelParams, productivity: f64, regime: Regime) -> f64 {
    params.invest_base + params.invest_prod_sensitivity * productivity
        - params.invest_risk_sensitivity * params.risk(regime)
}

/// Static effective capital `K0 - lambda * q`, floored at zero.
pub fn effective_capital_static(base: f64, risk_sensitivity: f64, risk: f64) -> f64 {
    (base - risk_sensitivity * risk).max(0.0)
}

pub fn step_capacity(params: &ModelParams, capacity: f64, investment: f64) -> f64 {
    ((1.0 - params.depreciation) * capacity + investment).max(0.0)
}

pub fn step_recognition(params: &ModelParams, recognition: f64, env: &ExogenousEnv, capacity: f64) -> f64 {
    let next = (1.0 - params.recognition_decay) * recognition
        + params.diplomatic_weight * env.diplomatic_support
        + params.symbolic_weight * env.symbolic_support
        + params.capacity_feedback * params.capacity_response.eval(capacity);
    next.max(0.0)
}

pub fn transfers(params: &ModelParams, regime: Regime, crisis: f64) -> f64 {
    let premium = match regime {
        Regime::Unified => 0.0,
        Regime::Fragmented => params.transfer_frag_premium,
    };
    params.transfer_base + premium + params.transfer_crisis_sensitivity * crisis
}

/// Formal output share, rents, control, recognition value and captured transfers.
pub fn elite_period_payoff(elite: &EliteParams, regime: Regime, output: f64, recognition: f64, transfer: f64) -> f64 {
    elite.share(regime) * output
        + elite.rents(regime)
        + elite.control(regime)
        + elite.recognition_value * recognition
        + elite.transfer_capture * transfer
}

pub fn welfare(
    params: &ModelParams,
    elites: &[EliteParams; 2],
    regime: Regime,
    output: f64,
    capacity: f64,
    recognition: f64,
) -> f64 {
    let rents: f64 = elites.iter().map(|e| e.rents(regime)).sum();
    output - rents + params.welfare_capacity_weight * capacity + params.welfare_recognition_weight * recognition
}

/// `G = R - psi * K`
pub fn recognition_capacity_gap(params: &ModelParams, state: &PolityState) -> f64 {
    state.recognition - params.gap_scale * state.capacity
}

pub fn is_nominal_statehood(params: &ModelParams, state: &PolityState) -> bool {
    state.recognition >= params.recognition_threshold && state.capacity < params.capacity_threshold
}

/// Everything the dynamic model needs, bundled.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Model {
    pub params: ModelParams,
    pub elites: [EliteParams; 2],
    pub productivity: ProductivitySpec,
}

/// All flow quantities of one period under a given regime.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeriodOutcome {
    pub productivity: f64,
    pub output: f64,
    pub investment: f64,
    pub transfer: f64,
    pub payoffs: [f64; 2],
    pub welfare: f64,
    pub gap: f64,
    pub next: PolityState,
}

impl Model {
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = self.params.validate();
        out.extend(self.productivity.validate());
        for (i, e) in self.elites.iter().enumerate() {
            out.extend(e.validate(i + 1));
        }
        out
    }

    /// Evaluates one period from `state` under `regime`.
    pub fn period(&self, state: &PolityState, regime: Regime, env: &ExogenousEnv) -> Result<PeriodOutcome> {
        let p = &self.params;
        let a = institutional_productivity(&self.productivity, regime, env.peace)?;
        let y = output(p, a, state.capacity)?;
        let inv = investment(p, a, regime);
        let t = transfers(p, regime, env.crisis_intensity);
        let payoffs = [
            elite_period_payoff(&self.elites[0], regime, y, state.recognition, t),
            elite_period_payoff(&self.elites[1], regime, y, state.recognition, t),
        ];
        let w = welfare(p, &self.elites, regime, y, state.capacity, state.recognition);
        let next = PolityState {
            capacity: step_capacity(p, state.capacity, inv),
            recognition: step_recognition(p, state.recognition, env, state.capacity),
        };
        Ok(PeriodOutcome {
            productivity: a,
            output: y,
            investment: inv,
            transfer: t,
            payoffs,
            welfare: w,
            gap: recognition_capacity_gap(p, state),
            next,
        })
    }
}


#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;

    const TOL: f64 = 5e-3;

    #[test]
    fn regime_mapping_over_all_profiles() {
        for prof in ActionProfile::ALL {
            let unified = prof.a1 == Action::Unify && prof.a2 == Action::Unify;
            assert_eq!(prof.regime() == Regime::Unified, unified, "{prof}");
        }
    }

    #[test]
    fn productivity_examples() {
        let flat = ProductivitySpec {
            slope_unified: 0.0,
            ..spec()
        };
        for p in [0.0, 0.3, 1.0] {
            assert_eq!(institutional_productivity(&flat, Regime::Unified, p).unwrap(), 1.00);
            assert_eq!(institutional_productivity(&flat, Regime::Fragmented, p).unwrap(), 0.72);
        }
        let s = ProductivitySpec {
            base_unified: 0.8,
            slope_unified: 0.5,
            ..spec()
        };
        let a = institutional_productivity(&s, Regime::Unified, 0.4).unwrap();
        assert!((a - 1.0).abs() < 1e-12);
        assert!(matches!(
            institutional_productivity(&s, Regime::Unified, 1.2),
            Err(Error::Domain(_))
        ));
        assert!(institutional_productivity(&s, Regime::Unified, -0.1).is_err());
    }

    #[test]
    fn output_examples() {
        let p = params();
        assert!((output(&p, 1.0, 96.0).unwrap() - 4.941).abs() < 1e-3);
        assert!((output(&p, 0.72, 86.0).unwrap() - 3.423).abs() < 1e-3);
        assert_eq!(output(&p, 3.0, 0.0).unwrap(), 0.0);
        assert!(output(&p, 1.0, -1.0).is_err());
    }

    #[test]
    fn labor_enters_with_complementary_exponent() {
        let p = ModelParams { labor: 2.0, ..params() };
        let y = output(&p, 1.0, 1.0).unwrap();
        assert!((y - 2f64.powf(0.65)).abs() < 1e-12);
    }

    #[test]
    fn investment_examples() {
        let zeroed = ModelParams {
            invest_prod_sensitivity: 0.0,
            invest_risk_sensitivity: 0.0,
            ..params()
        };
        assert_eq!(investment(&zeroed, 1.0, Regime::Unified), 10.0);
        assert_eq!(investment(&zeroed, 0.7, Regime::Fragmented), 10.0);

        let p = params();
        let iu = investment(&p, 1.0, Regime::Unified);
        let i_f = investment(&p, 0.72, Regime::Fragmented);
        assert!((iu - 11.6).abs() < 1e-12);
        assert!((i_f - 10.04).abs() < 1e-12);
        assert!((iu - i_f - 1.56).abs() < 1e-12);
    }

    #[test]
    fn negative_investment_is_allowed_and_capacity_floors() {
        let p = ModelParams {
            invest_risk_sensitivity: 100.0,
            ..params()
        };
        let i = investment(&p, 0.72, Regime::Fragmented);
        assert!(i < 0.0);
        assert_eq!(step_capacity(&p, 1.0, i), 0.0);
    }

    #[test]
    fn static_capital_examples() {
        assert_eq!(effective_capital_static(100.0, 40.0, 0.10), 96.0);
        assert_eq!(effective_capital_static(100.0, 40.0, 0.35), 86.0);
        assert_eq!(effective_capital_static(100.0, 0.0, 0.9), 100.0);
        assert_eq!(effective_capital_static(10.0, 40.0, 0.9), 0.0);
    }

    #[test]
    fn capacity_step_examples() {
        let full = ModelParams {
            depreciation: 1.0,
            ..params()
        };
        assert_eq!(step_capacity(&full, 123.0, 7.0), 7.0);
        let none = ModelParams {
            depreciation: 0.0,
            ..params()
        };
        assert_eq!(step_capacity(&none, 50.0, 0.0), 50.0);
        let p = params();
        assert!((step_capacity(&p, 90.0, 9.0) - 90.0).abs() < 1e-12);
    }

    #[test]
    fn recognition_step_examples() {
        let env = ExogenousEnv::new(0.0, 2.0, 4.0, 0.0);
        let memoryless = ModelParams {
            recognition_decay: 1.0,
            ..params()
        };
        assert!((step_recognition(&memoryless, 55.0, &env, 100.0) - 4.0).abs() < 1e-12);
        let p = params();
        assert!((step_recognition(&p, 10.0, &env, 100.0) - 13.0).abs() < 1e-12);
        let fb = ModelParams {
            capacity_feedback: 0.01,
            ..params()
        };
        assert!((step_recognition(&fb, 10.0, &env, 100.0) - 14.0).abs() < 1e-12);
        let sat = ModelParams {
            capacity_response: CapacityResponse::Saturating,
            ..fb
        };
        let r = step_recognition(&sat, 10.0, &env, 100.0);
        assert!((r - (13.0 + 0.01 * 100.0 / 101.0)).abs() < 1e-12);
    }

    #[test]
    fn transfer_examples() {
        let p = params();
        assert_eq!(transfers(&p, Regime::Unified, 0.0), 4.0);
        assert_eq!(transfers(&p, Regime::Fragmented, 0.0), 10.0);
        let crisis = ModelParams {
            transfer_crisis_sensitivity: 2.0,
            ..params()
        };
        assert_eq!(transfers(&crisis, Regime::Fragmented, 3.0), 16.0);
    }

    #[test]
    fn payoff_examples() {
        let e = elite();
        let pu = elite_period_payoff(&e, Regime::Unified, 4.941, 50.0, 4.0);
        assert!((pu - 4.691).abs() < TOL, "{pu}");
        let pf = elite_period_payoff(&e, Regime::Fragmented, 3.423, 50.0, 10.0);
        assert!((pf - 15.548).abs() < TOL, "{pf}");
        let zero = EliteParams {
            share_unified: 0.0,
            share_fragmented: 0.0,
            rents_unified: 0.0,
            rents_fragmented: 0.0,
            control_unified: 0.0,
            control_fragmented: 0.0,
            recognition_value: 0.0,
            transfer_capture: 0.0,
        };
        assert_eq!(elite_period_payoff(&zero, Regime::Unified, 9.0, 9.0, 9.0), 0.0);
    }

    #[test]
    fn welfare_examples() {
        let p = params();
        let es = [elite(), elite()];
        let wu = welfare(&p, &es, Regime::Unified, 4.941, 96.0, 10.0);
        let wf = welfare(&p, &es, Regime::Fragmented, 3.423, 86.0, 10.0);
        assert!((wu - 0.941).abs() < 1e-9);
        assert!((wf + 10.577).abs() < 1e-9);
        let mut no_rents = es.clone();
        for e in &mut no_rents {
            e.rents_unified = 0.0;
            e.rents_fragmented = 0.0;
        }
        assert_eq!(welfare(&p, &no_rents, Regime::Fragmented, 3.5, 86.0, 10.0), 3.5);
    }

    #[test]
    fn gap_examples() {
        let zero_psi = ModelParams {
            gap_scale: 0.0,
            ..params()
        };
        let g = recognition_capacity_gap(&zero_psi, &PolityState::new(71.0, 17.0).unwrap());
        assert_eq!(g, 17.0);
        let p = params();
        assert_eq!(recognition_capacity_gap(&p, &PolityState::new(60.0, 50.0).unwrap()), 20.0);
        let one = ModelParams {
            gap_scale: 1.0,
            ..params()
        };
        assert_eq!(recognition_capacity_gap(&one, &PolityState::new(33.0, 33.0).unwrap()), 0.0);
    }

    #[test]
    fn nominal_statehood_examples() {
        let p = params();
        assert!(is_nominal_statehood(&p, &PolityState::new(30.0, 20.0).unwrap()));
        assert!(!is_nominal_statehood(&p, &PolityState::new(30.0, 5.0).unwrap()));
        assert!(!is_nominal_statehood(&p, &PolityState::new(50.0, 20.0).unwrap()));
    }

    #[test]
    fn state_rejects_negative_or_non_finite() {
        assert!(PolityState::new(-1.0, 0.0).is_err());
        assert!(PolityState::new(0.0, f64::NAN).is_err());
        assert!(PolityState::new(0.0, f64::INFINITY).is_err());
    }

    #[test]
    fn env_clamps_peace() {
        assert_eq!(ExogenousEnv::new(1.7, 0.0, 0.0, 0.0).peace, 1.0);
        assert_eq!(ExogenousEnv::new(-0.2, 0.0, 0.0, 0.0).peace, 0.0);
    }

    #[test]
    fn validation_names_assumptions() {
        let p = ModelParams {
            risk_unified: 0.4,
            risk_fragmented: 0.3,
            ..params()
        };
        let v = p.validate();
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].assumption, Some(Assumption::A2));
        assert!(v[0].to_string().starts_with("A2 violated"));

        let e = EliteParams {
            rents_fragmented: 1.0,
            ..elite()
        };
        assert_eq!(e.validate(1)[0].assumption, Some(Assumption::A3));

        let s = ProductivitySpec {
            base_unified: 0.5,
            ..spec()
        };
        assert!(s.validate().iter().any(|v| v.assumption == Some(Assumption::A1)));
        let flat = ProductivitySpec {
            slope_unified: 0.0,
            ..spec()
        };
        assert!(flat.validate().iter().any(|v| v.assumption == Some(Assumption::A5)));
        assert!(spec().validate().is_empty());
        assert!(params().validate().is_empty());
    }

    #[test]
    fn period_matches_primitives() {
        let m = Model {
            params: ModelParams {
                capacity_feedback: 0.01,
                ..params()
            },
            elites: [elite(), elite()],
            productivity: spec(),
        };
        let env = ExogenousEnv::new(0.4, 2.0, 4.0, 1.0);
        let s = PolityState::new(80.0, 25.0).unwrap();
        let o = m.period(&s, Regime::Fragmented, &env).unwrap();
        let a = institutional_productivity(&m.productivity, Regime::Fragmented, 0.4).unwrap();
        assert_eq!(o.productivity, a);
        assert_eq!(o.output, output(&m.params, a, 80.0).unwrap());
        assert_eq!(o.next.capacity, step_capacity(&m.params, 80.0, o.investment));
        assert_eq!(o.next.recognition, step_recognition(&m.params, 25.0, &env, 80.0));
    }
}
