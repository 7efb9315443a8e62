//! One-period analysis: the 2x2 stage game, the static unification gain
//! and the closed-form thresholds that set it to zero.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    effective_capital_static, elite_period_payoff, institutional_productivity, output, transfers, Action,
    ActionProfile, EliteParams, ExogenousEnv, Model, ModelParams, PolityState, ProductivitySpec, Regime,
};

/// Regime-level quantities an elite compares in a single period.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StaticContext {
    pub output_unified: f64,
    pub output_fragmented: f64,
    pub transfer_unified: f64,
    pub transfer_fragmented: f64,
    /// Enters both regimes identically through `mu_i`.
    pub recognition: f64,
}

impl StaticContext {
    /// Static calibration: regime-specific effective capital `K0 - lambda q`.
    pub fn from_static_model(
        params: &ModelParams,
        spec: &ProductivitySpec,
        env: &ExogenousEnv,
        recognition: f64,
    ) -> Result<Self> {
        let y = |regime| -> Result<f64> {
            let k = effective_capital_static(
                params.static_capital_base,
                params.invest_risk_sensitivity,
                params.risk(regime),
            );
            let a = institutional_productivity(spec, regime, env.peace)?;
            output(params, a, k)
        };
        Ok(Self {
            output_unified: y(Regime::Unified)?,
            output_fragmented: y(Regime::Fragmented)?,
            transfer_unified: transfers(params, Regime::Unified, env.crisis_intensity),
            transfer_fragmented: transfers(params, Regime::Fragmented, env.crisis_intensity),
            recognition,
        })
    }

    /// Myopic comparison at a dynamic state: both regimes share the inherited capacity.
    pub fn at_state(model: &Model, state: &PolityState, env: &ExogenousEnv) -> Result<Self> {
        let u = model.period(state, Regime::Unified, env)?;
        let f = model.period(state, Regime::Fragmented, env)?;
        Ok(Self {
            output_unified: u.output,
            output_fragmented: f.output,
            transfer_unified: u.transfer,
            transfer_fragmented: f.transfer,
            recognition: state.recognition,
        })
    }

    pub fn output(&self, regime: Regime) -> f64 {
        match regime {
            Regime::Unified => self.output_unified,
            Regime::Fragmented => self.output_fragmented,
        }
    }

    pub fn transfer(&self, regime: Regime) -> f64 {
        match regime {
            Regime::Unified => self.transfer_unified,
            Regime::Fragmented => self.transfer_fragmented,
        }
    }

    /// `T_F - T_U`
    pub fn transfer_differential(&self) -> f64 {
        self.transfer_fragmented - self.transfer_unified
    }
}

pub fn regime_payoff(elite: &EliteParams, ctx: &StaticContext, regime: Regime) -> f64 {
    elite_period_payoff(elite, regime, ctx.output(regime), ctx.recognition, ctx.transfer(regime))
}

/// Payoff pairs indexed by `[a1][a2]`, with `U` at index 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StageBimatrix {
    pub payoffs: [[[f64; 2]; 2]; 2],
}

impl StageBimatrix {
    /// An arbitrary 2x2 game; need not respect the regime mapping.
    pub fn from_payoffs(payoffs: [[[f64; 2]; 2]; 2]) -> Self {
        Self { payoffs }
    }

    pub fn get(&self, profile: ActionProfile) -> [f64; 2] {
        self.payoffs[profile.a1.index()][profile.a2.index()]
    }

    /// True when every profile with an `F` pays exactly the `(F,F)` entry.
    pub fn respects_regime_mapping(&self) -> bool {
        let ff = self.get(ActionProfile::new(Action::Fragment, Action::Fragment));
        ActionProfile::ALL
            .iter()
            .filter(|p| p.regime() == Regime::Fragmented)
            .all(|p| self.get(*p) == ff)
    }
}

pub fn stage_bimatrix(elites: &[EliteParams; 2], ctx: &StaticContext) -> StageBimatrix {
    let mut payoffs = [[[0.0; 2]; 2]; 2];
    for prof in ActionProfile::ALL {
        let regime = prof.regime();
        payoffs[prof.a1.index()][prof.a2.index()] = [
            regime_payoff(&elites[0], ctx, regime),
            regime_payoff(&elites[1], ctx, regime),
        ];
    }
    StageBimatrix { payoffs }
}

/// Signed one-period gain from unification, `pi_i(U) - pi_i(F)`.
pub fn static_delta(elite: &EliteParams, ctx: &StaticContext) -> f64 {
    formal_gain(elite, ctx)
        - elite.rent_gap()
        - elite.control_gap()
        - elite.transfer_capture * ctx.transfer_differential()
}

fn formal_gain(elite: &EliteParams, ctx: &StaticContext) -> f64 {
    elite.share_unified * ctx.output_unified - elite.share_fragmented * ctx.output_fragmented
}

/// Unified iff both gains are non-negative; a zero gain counts as support.
pub fn decision_regime(delta1: f64, delta2: f64) -> Regime {
    if delta1 >= 0.0 && delta2 >= 0.0 {
        Regime::Unified
    } else {
        Regime::Fragmented
    }
}

/// A weak Nash profile of the stage game.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NashProfile {
    pub profile: ActionProfile,
    /// Some player's unilateral deviation pays exactly the same.
    pub indifference_sustained: bool,
}

/// Weak pure-strategy Nash profiles, in the order UU, UF, FU, FF.
pub fn pure_nash_profiles(bimatrix: &StageBimatrix) -> Vec<NashProfile> {
    let mut out = Vec::new();
    for prof in ActionProfile::ALL {
        let mut is_nash = true;
        let mut indifferent = false;
        for player in 0..2 {
            let own = bimatrix.get(prof)[player];
            let best = Action::BOTH
                .iter()
                .map(|&a| bimatrix.get(prof.with(player, a))[player])
                .fold(f64::NEG_INFINITY, f64::max);
            if own < best {
                is_nash = false;
                break;
            }
            let alt = bimatrix.get(prof.with(player, prof.action(player).other()))[player];
            if alt == own {
                indifferent = true;
            }
        }
        if is_nash {
            out.push(NashProfile {
                profile: prof,
                indifference_sustained: indifferent,
            });
        }
    }
    out
}

/// `(T_F - T_U)*` at which the static gain is zero.
pub fn critical_transfer_differential(elite: &EliteParams, ctx: &StaticContext) -> Result<f64> {
    if elite.transfer_capture == 0.0 {
        return Err(Error::UndefinedThreshold(
            "transfer capture is zero; the gain does not depend on transfers".into(),
        ));
    }
    Ok((formal_gain(elite, ctx) - elite.rent_gap() - elite.control_gap()) / elite.transfer_capture)
}

/// `(gamma(F) - gamma(U))*` at which the static gain is zero.
pub fn critical_control_premium(elite: &EliteParams, ctx: &StaticContext) -> f64 {
    formal_gain(elite, ctx) - elite.rent_gap() - elite.transfer_capture * ctx.transfer_differential()
}

/// `(r(F) - r(U))*` at which the static gain is zero.
pub fn critical_rent_gap(elite: &EliteParams, ctx: &StaticContext) -> f64 {
    formal_gain(elite, ctx) - elite.control_gap() - elite.transfer_capture * ctx.transfer_differential()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdRange {
    /// `p*` lies in `[0,1]`.
    Within,
    /// `p* > 1`: unification is never privately attractive for feasible peace.
    Unattainable,
    /// `p* < 0`: unification is attractive at every feasible peace level.
    AlwaysAttained,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeaceThreshold {
    pub value: f64,
    pub range: ThresholdRange,
}

/// Peace credibility at which the static gain of `elite` crosses zero,
/// returned unclamped.
///
/// Outputs are rebuilt from the static calibration (`K_theta = K0 - lambda q`)
/// so both regimes may respond to peace; with a flat fragmented productivity
/// this is the usual `[gaps + s_F Y_F - s_U A_U K_U^a] / [s_U kappa K_U^a]`.
/// Only the transfers of `ctx` are used.
pub fn peace_credibility_threshold(
    elite: &EliteParams,
    spec: &ProductivitySpec,
    params: &ModelParams,
    ctx: &StaticContext,
) -> Result<PeaceThreshold> {
    let scale = |regime| {
        let k = effective_capital_static(
            params.static_capital_base,
            params.invest_risk_sensitivity,
            params.risk(regime),
        );
        output(params, 1.0, k)
    };
    let su = elite.share_unified * scale(Regime::Unified)?;
    let sf = elite.share_fragmented * scale(Regime::Fragmented)?;
    let denom = su * spec.slope_unified - sf * spec.slope_fragmented;
    if denom == 0.0 || !denom.is_finite() {
        return Err(Error::UndefinedThreshold(
            "the static gain does not vary with peace credibility".into(),
        ));
    }
    let numer = elite.rent_gap()
        + elite.control_gap()
        + elite.transfer_capture * ctx.transfer_differential()
        + sf * spec.base_fragmented
        - su * spec.base_unified;
    let value = numer / denom;
    let range = if value > 1.0 {
        ThresholdRange::Unattainable
    } else if value < 0.0 {
        ThresholdRange::AlwaysAttained
    } else {
        ThresholdRange::Within
    };
    Ok(PeaceThreshold { value, range })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fixtures::{elite, params, spec};

    fn benchmark_ctx() -> StaticContext {
        let p = ModelParams {
            invest_risk_sensitivity: 40.0,
            ..params()
        };
        StaticContext::from_static_model(&p, &spec(), &ExogenousEnv::new(0.0, 0.0, 0.0, 0.0), 0.0).unwrap()
    }

    fn bench_params() -> ModelParams {
        ModelParams {
            invest_risk_sensitivity: 40.0,
            ..params()
        }
    }

    fn zero_elite() -> EliteParams {
        EliteParams {
            share_unified: 0.0,
            share_fragmented: 0.0,
            rents_unified: 0.0,
            rents_fragmented: 0.0,
            control_unified: 0.0,
            control_fragmented: 0.0,
            recognition_value: 0.0,
            transfer_capture: 0.0,
        }
    }

    #[test]
    fn benchmark_context() {
        let c = benchmark_ctx();
        assert!((c.output_unified - 4.941).abs() < 1e-3);
        assert!((c.output_fragmented - 3.423).abs() < 1e-3);
        assert_eq!(c.transfer_unified, 4.0);
        assert_eq!(c.transfer_fragmented, 10.0);
    }

    #[test]
    fn bimatrix_examples() {
        let b = stage_bimatrix(&[elite(), elite()], &benchmark_ctx());
        assert!(b.respects_regime_mapping());
        let uu = b.get(ActionProfile::new(Action::Unify, Action::Unify));
        assert!((uu[0] - 4.69).abs() < 0.01 && (uu[1] - 4.69).abs() < 0.01);
        for p in &ActionProfile::ALL[1..] {
            let v = b.get(*p);
            assert!((v[0] - 15.55).abs() < 0.01 && (v[1] - 15.55).abs() < 0.01);
        }

        let z = stage_bimatrix(&[zero_elite(), zero_elite()], &benchmark_ctx());
        assert!(z.payoffs.iter().flatten().all(|v| *v == [0.0, 0.0]));

        let sym = EliteParams {
            share_fragmented: 0.18,
            rents_fragmented: 2.0,
            control_fragmented: 1.0,
            ..elite()
        };
        let ctx = StaticContext {
            output_unified: 4.0,
            output_fragmented: 4.0,
            transfer_unified: 4.0,
            transfer_fragmented: 4.0,
            recognition: 3.0,
        };
        let s = stage_bimatrix(&[sym.clone(), sym], &ctx);
        let first = s.payoffs[0][0];
        assert!(s.payoffs.iter().flatten().all(|v| *v == first));
    }

    #[test]
    fn static_delta_examples() {
        let ctx = benchmark_ctx();
        let d = static_delta(&elite(), &ctx);
        assert!((d + 10.86).abs() < 0.02, "{d}");
        let direct = regime_payoff(&elite(), &ctx, Regime::Unified) - regime_payoff(&elite(), &ctx, Regime::Fragmented);
        assert!((d - direct).abs() < 1e-12);

        let sym = EliteParams {
            share_fragmented: 0.18,
            rents_fragmented: 2.0,
            control_fragmented: 1.0,
            ..elite()
        };
        let flat = StaticContext {
            output_unified: 4.0,
            output_fragmented: 4.0,
            transfer_unified: 4.0,
            transfer_fragmented: 4.0,
            recognition: 0.0,
        };
        assert_eq!(static_delta(&sym, &flat), 0.0);

        let raised = StaticContext {
            transfer_fragmented: ctx.transfer_fragmented + 5.0,
            ..ctx
        };
        assert!((static_delta(&elite(), &raised) - (d - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn recognition_cancels_in_delta() {
        let e = EliteParams {
            recognition_value: 0.7,
            ..elite()
        };
        let a = benchmark_ctx();
        let b = StaticContext { recognition: 40.0, ..a };
        assert_eq!(static_delta(&e, &a), static_delta(&e, &b));
    }

    #[test]
    fn decision_rule_examples() {
        assert_eq!(decision_regime(1.0, 1.0), Regime::Unified);
        assert_eq!(decision_regime(1.0, -1.0), Regime::Fragmented);
        assert_eq!(decision_regime(-1.0, 1.0), Regime::Fragmented);
        assert_eq!(decision_regime(0.0, 0.0), Regime::Unified);
    }

    fn profiles(v: &[NashProfile]) -> Vec<ActionProfile> {
        v.iter().map(|n| n.profile).collect()
    }

    #[test]
    fn nash_benchmark() {
        let b = stage_bimatrix(&[elite(), elite()], &benchmark_ctx());
        let ne = pure_nash_profiles(&b);
        let ps = profiles(&ne);
        use Action::*;
        assert_eq!(
            ps,
            vec![
                ActionProfile::new(Unify, Fragment),
                ActionProfile::new(Fragment, Unify),
                ActionProfile::new(Fragment, Fragment)
            ]
        );
    }

    #[test]
    fn nash_all_equal() {
        let b = StageBimatrix::from_payoffs([[[1.0, 1.0]; 2]; 2]);
        let ne = pure_nash_profiles(&b);
        assert_eq!(ne.len(), 4);
        assert!(ne.iter().all(|n| n.indifference_sustained));
    }

    #[test]
    fn nash_unified_dominant_flags_indifference() {
        let e = EliteParams {
            rents_fragmented: 0.0,
            control_fragmented: 0.0,
            rents_unified: 0.0,
            control_unified: 0.0,
            transfer_capture: 0.0,
            ..elite()
        };
        let b = stage_bimatrix(&[e.clone(), e], &benchmark_ctx());
        let ne = pure_nash_profiles(&b);
        // From (U,F) or (F,U) the bloc playing F gains by switching to U.
        use Action::*;
        assert_eq!(
            ne,
            vec![
                NashProfile {
                    profile: ActionProfile::new(Unify, Unify),
                    indifference_sustained: false
                },
                NashProfile {
                    profile: ActionProfile::new(Fragment, Fragment),
                    indifference_sustained: true
                },
            ]
        );
    }

    #[test]
    fn transfer_threshold_examples() {
        let ctx = benchmark_ctx();
        // (0.18*Y_U - 0.16*Y_F - 5 - 5)/0.2 computed term by term.
        let hand = (0.18 * 96f64.powf(0.35) - 0.16 * 0.72 * 86f64.powf(0.35) - 10.0) / 0.2;
        let v = critical_transfer_differential(&elite(), &ctx).unwrap();
        assert!((v - hand).abs() < 1e-12);
        assert!((v + 48.28).abs() < 0.05);

        let no_gaps = EliteParams {
            rents_fragmented: 2.0,
            control_fragmented: 1.0,
            ..elite()
        };
        let v = critical_transfer_differential(&no_gaps, &ctx).unwrap();
        let hand = (0.18 * 96f64.powf(0.35) - 0.16 * 0.72 * 86f64.powf(0.35)) / 0.2;
        assert!((v - hand).abs() < 1e-12);
        assert!((v - 1.7089).abs() < 1e-3, "{v}");

        let only_beta = EliteParams {
            transfer_capture: 0.3,
            ..zero_elite()
        };
        assert_eq!(critical_transfer_differential(&only_beta, &ctx).unwrap(), 0.0);

        let no_capture = EliteParams {
            transfer_capture: 0.0,
            ..elite()
        };
        assert!(matches!(
            critical_transfer_differential(&no_capture, &ctx),
            Err(Error::UndefinedThreshold(_))
        ));
    }

    #[test]
    fn control_and_rent_threshold_examples() {
        let ctx = benchmark_ctx();
        let c = critical_control_premium(&elite(), &ctx);
        let r = critical_rent_gap(&elite(), &ctx);
        assert!((c + 5.856).abs() < 0.01, "{c}");
        assert!((r + 5.856).abs() < 0.01, "{r}");

        let bare = EliteParams {
            rents_fragmented: 2.0,
            control_fragmented: 1.0,
            transfer_capture: 0.0,
            ..elite()
        };
        let formal = 0.18 * ctx.output_unified - 0.16 * ctx.output_fragmented;
        assert!((critical_control_premium(&bare, &ctx) - formal).abs() < 1e-12);
        assert!((critical_rent_gap(&bare, &ctx) - formal).abs() < 1e-12);

        let at_c = EliteParams {
            control_unified: 0.0,
            control_fragmented: c,
            ..elite()
        };
        assert!(static_delta(&at_c, &ctx).abs() < 1e-12);
        let at_r = EliteParams {
            rents_unified: 0.0,
            rents_fragmented: r,
            ..elite()
        };
        assert!(static_delta(&at_r, &ctx).abs() < 1e-12);
    }

    #[test]
    fn peace_threshold_benchmark() {
        let ctx = benchmark_ctx();
        let t = peace_credibility_threshold(&elite(), &spec(), &bench_params(), &ctx).unwrap();
        let ku = 96f64.powf(0.35);
        let numer = 5.0 + 5.0 + 0.2 * 6.0 + 0.16 * 0.72 * 86f64.powf(0.35) - 0.18 * ku;
        let denom = 0.18 * 0.5 * ku;
        assert!((numer - 10.858).abs() < 1e-3);
        assert!((denom - 0.4447).abs() < 1e-4);
        assert!((t.value - numer / denom).abs() < 1e-12);
        assert!((t.value - 24.42).abs() < 0.05);
        assert_eq!(t.range, ThresholdRange::Unattainable);
    }

    #[test]
    fn peace_threshold_balanced_at_zero() {
        let p = bench_params();
        let ku = 96f64.powf(0.35);
        let kf = 86f64.powf(0.35);
        // s_U * A_U * K_U^a == s_F * Y_F and no gaps.
        let e = EliteParams {
            rents_fragmented: 2.0,
            control_fragmented: 1.0,
            transfer_capture: 0.0,
            share_fragmented: 0.18 * ku / (0.72 * kf),
            ..elite()
        };
        let ctx = benchmark_ctx();
        let t = peace_credibility_threshold(&e, &spec(), &p, &ctx).unwrap();
        assert!(t.value.abs() < 1e-12);
        assert_eq!(t.range, ThresholdRange::Within);
    }

    #[test]
    fn peace_threshold_round_trip() {
        let p = bench_params();
        let e = EliteParams {
            rents_fragmented: 2.1,
            control_fragmented: 1.05,
            transfer_capture: 0.05,
            ..elite()
        };
        let s = ProductivitySpec {
            slope_fragmented: 0.1,
            ..spec()
        };
        let ctx = benchmark_ctx();
        let t = peace_credibility_threshold(&e, &s, &p, &ctx).unwrap();
        assert_eq!(t.range, ThresholdRange::Within, "{t:?}");
        let env = ExogenousEnv::new(t.value, 0.0, 0.0, 0.0);
        let rebuilt = StaticContext::from_static_model(&p, &s, &env, 0.0).unwrap();
        assert!(static_delta(&e, &rebuilt).abs() < 1e-9);
    }

    #[test]
    fn peace_threshold_undefined_without_slope() {
        let flat = ProductivitySpec {
            slope_unified: 0.0,
            ..spec()
        };
        let r = peace_credibility_threshold(&elite(), &flat, &bench_params(), &benchmark_ctx());
        assert!(matches!(r, Err(Error::UndefinedThreshold(_))));
    }
}
