//! Machine-readable outputs for each run kind.
//!
//! CSV numbers carry 12 significant digits. A scenario with waived
//! assumptions puts `# waivers: ...` on the first CSV line and a
//! `waivers` array in every JSON document.

use serde::Serialize;

use crate::dynamics::Trajectory;
use crate::error::{Assumption, Error, Result};
use crate::model::{effective_capital_static, welfare, Regime};
use crate::mpe::{bellman_residual, verify_no_deviation, Classification, DeviationReport, EquilibriumSolution};
use crate::oracle::DEFAULT_DEVIATION_TOL;
use crate::scenario::{sweep, Mode, Scenario, SweepRange, SweepTable};
use crate::stage::{
    critical_control_premium, critical_rent_gap, critical_transfer_differential, decision_regime,
    peace_credibility_threshold, pure_nash_profiles, stage_bimatrix, static_delta, NashProfile, StaticContext,
    ThresholdRange,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

/// One rendered output file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Artifact {
    pub stem: String,
    pub format: Format,
    pub contents: String,
}

impl Artifact {
    pub fn file_name(&self) -> String {
        format!("{}.{}", self.stem, self.format.extension())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Report {
    pub artifacts: Vec<Artifact>,
    /// Set when the run involved the equilibrium solver.
    pub converged: Option<bool>,
}

/// Fixed 12-significant-digit rendering.
pub fn fmt_num(x: f64) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let x = if x == 0.0 { 0.0 } else { x };
    let sci = format!("{x:.11e}");
    let exp: i32 = sci[sci.find('e').unwrap() + 1..].parse().unwrap();
    if (-5..15).contains(&exp) {
        format!("{:.*}", (11 - exp).max(0) as usize, x)
    } else {
        sci
    }
}

fn waiver_header(waivers: &[Assumption]) -> String {
    if waivers.is_empty() {
        String::new()
    } else {
        let names: Vec<String> = waivers.iter().map(|a| a.to_string()).collect();
        format!("# waivers: {}\n", names.join(","))
    }
}

fn csv(waivers: &[Assumption], header: &[&str], rows: &[Vec<String>]) -> String {
    let mut out = waiver_header(waivers);
    out.push_str(&header.join(","));
    out.push('\n');
    for r in rows {
        out.push_str(&r.join(","));
        out.push('\n');
    }
    out
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    waivers: &'a [Assumption],
    #[serde(flatten)]
    body: T,
}

fn json<T: Serialize>(waivers: &[Assumption], body: T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(&Envelope { waivers, body }).map_err(|e| Error::Parse(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

fn artifact(stem: &str, format: Format, contents: String) -> Artifact {
    Artifact {
        stem: stem.to_string(),
        format,
        contents,
    }
}

fn opt_num(x: Option<f64>) -> String {
    x.map(fmt_num).unwrap_or_default()
}

/// Regime-level context: the static calibration in static mode, otherwise
/// the myopic comparison at the initial state.
pub fn scenario_context(s: &Scenario) -> Result<StaticContext> {
    match s.mode {
        Mode::Static => StaticContext::from_static_model(&s.model, &s.productivity, &s.base_env(), 0.0),
        _ => StaticContext::at_state(&s.model(), &s.initial_state, &s.base_env()),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CalibrationRow {
    pub quantity: String,
    pub value: f64,
    pub reference: f64,
    pub tolerance: f64,
    pub abs_diff: f64,
    pub within_tol: bool,
}

/// Static-calibration quantities next to their published benchmark values.
pub fn calibration_table(s: &Scenario) -> Result<Vec<CalibrationRow>> {
    let p = &s.model;
    let ctx = StaticContext::from_static_model(p, &s.productivity, &s.base_env(), 0.0)?;
    let capital = |r: Regime| effective_capital_static(p.static_capital_base, p.invest_risk_sensitivity, p.risk(r));
    let w = |r: Regime| welfare(p, &s.elites, r, ctx.output(r), capital(r), ctx.recognition);
    let mut rows = vec![
        ("capital_unified", capital(Regime::Unified), 96.0, 1e-12),
        ("capital_fragmented", capital(Regime::Fragmented), 86.0, 1e-12),
        ("output_unified", ctx.output_unified, 4.95, 0.005),
        ("output_fragmented", ctx.output_fragmented, 3.42, 0.005),
        (
            "output_gain_pct",
            100.0 * (ctx.output_unified - ctx.output_fragmented) / ctx.output_fragmented,
            44.7,
            1.0,
        ),
    ];
    let names = [
        ["payoff_unified_1", "payoff_fragmented_1", "payoff_gap_1", "delta_1"],
        ["payoff_unified_2", "payoff_fragmented_2", "payoff_gap_2", "delta_2"],
    ];
    for (e, n) in s.elites.iter().zip(names) {
        let pu = crate::stage::regime_payoff(e, &ctx, Regime::Unified);
        let pf = crate::stage::regime_payoff(e, &ctx, Regime::Fragmented);
        rows.push((n[0], pu, 4.69, 0.01));
        rows.push((n[1], pf, 15.55, 0.01));
        rows.push((n[2], pf - pu, 10.86, 0.02));
        rows.push((n[3], static_delta(e, &ctx), -10.86, 0.02));
    }
    rows.push(("welfare_unified", w(Regime::Unified), 0.941, 0.01));
    rows.push(("welfare_fragmented", w(Regime::Fragmented), -10.577, 0.01));
    Ok(rows
        .into_iter()
        .map(|(q, value, reference, tolerance)| {
            let abs_diff = (value - reference).abs();
            CalibrationRow {
                quantity: q.to_string(),
                value,
                reference,
                tolerance,
                abs_diff,
                within_tol: abs_diff <= tolerance,
            }
        })
        .collect())
}

pub fn calibrate_report(s: &Scenario) -> Result<Report> {
    let rows = calibration_table(s)?;
    let w = s.waiver_list();
    let cells: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.quantity.clone(),
                fmt_num(r.value),
                fmt_num(r.reference),
                fmt_num(r.tolerance),
                fmt_num(r.abs_diff),
                r.within_tol.to_string(),
            ]
        })
        .collect();
    #[derive(Serialize)]
    struct Body<'a> {
        rows: &'a [CalibrationRow],
    }
    Ok(Report {
        artifacts: vec![
            artifact(
                "calibration",
                Format::Csv,
                csv(
                    &w,
                    &["quantity", "value", "reference", "tolerance", "abs_diff", "within_tol"],
                    &cells,
                ),
            ),
            artifact("calibration", Format::Json, json(&w, Body { rows: &rows })?),
        ],
        converged: None,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BimatrixCell {
    pub profile: String,
    pub regime: Regime,
    pub pi1: f64,
    pub pi2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StageSummary {
    pub basis: &'static str,
    pub context: StaticContext,
    pub bimatrix: Vec<BimatrixCell>,
    pub deltas: [f64; 2],
    pub nash: Vec<NashProfile>,
    pub decision_regime: Regime,
    pub welfare_unified: f64,
    pub welfare_fragmented: f64,
}

pub fn stage_summary(s: &Scenario) -> Result<StageSummary> {
    let ctx = scenario_context(s)?;
    let bm = stage_bimatrix(&s.elites, &ctx);
    let deltas = [static_delta(&s.elites[0], &ctx), static_delta(&s.elites[1], &ctx)];
    let p = &s.model;
    let capital = |r: Regime| match s.mode {
        Mode::Static => effective_capital_static(p.static_capital_base, p.invest_risk_sensitivity, p.risk(r)),
        _ => s.initial_state.capacity,
    };
    let w = |r: Regime| welfare(p, &s.elites, r, ctx.output(r), capital(r), ctx.recognition);
    Ok(StageSummary {
        basis: if s.mode == Mode::Static { "static" } else { "initial_state" },
        context: ctx,
        bimatrix: crate::model::ActionProfile::ALL
            .iter()
            .map(|&prof| {
                let [pi1, pi2] = bm.get(prof);
                BimatrixCell {
                    profile: prof.to_string(),
                    regime: prof.regime(),
                    pi1,
                    pi2,
                }
            })
            .collect(),
        deltas,
        nash: pure_nash_profiles(&bm),
        decision_regime: decision_regime(deltas[0], deltas[1]),
        welfare_unified: w(Regime::Unified),
        welfare_fragmented: w(Regime::Fragmented),
    })
}

pub fn stage_report(s: &Scenario) -> Result<Report> {
    Ok(Report {
        artifacts: vec![artifact("stage", Format::Json, json(&s.waiver_list(), stage_summary(s)?)?)],
        converged: None,
    })
}

pub const TRAJECTORY_COLUMNS: [&str; 12] = ["t", "regime", "K", "R", "A", "Y", "I", "T", "pi1", "pi2", "W", "G"];

/// One row per period plus a terminal row carrying only `t, K, R, G`.
pub fn trajectory_csv(waivers: &[Assumption], tr: &Trajectory, gap_scale: f64) -> String {
    let mut rows: Vec<Vec<String>> = tr
        .records
        .iter()
        .map(|r| {
            vec![
                r.t.to_string(),
                r.regime.as_str().to_string(),
                fmt_num(r.state.capacity),
                fmt_num(r.state.recognition),
                fmt_num(r.productivity),
                fmt_num(r.output),
                fmt_num(r.investment),
                fmt_num(r.transfer),
                fmt_num(r.payoffs[0]),
                fmt_num(r.payoffs[1]),
                fmt_num(r.welfare),
                fmt_num(r.gap),
            ]
        })
        .collect();
    let k = tr.terminal;
    let mut last = vec![String::new(); TRAJECTORY_COLUMNS.len()];
    last[0] = tr.horizon().to_string();
    last[2] = fmt_num(k.capacity);
    last[3] = fmt_num(k.recognition);
    last[11] = fmt_num(k.recognition - gap_scale * k.capacity);
    rows.push(last);
    csv(waivers, &TRAJECTORY_COLUMNS, &rows)
}

pub fn simulate_report(s: &Scenario) -> Result<Report> {
    let (solution, converged) = if s.mode == Mode::Solve {
        let sol = s.solve()?;
        let c = sol.converged;
        (Some(sol), Some(c))
    } else {
        (None, None)
    };
    let tr = s.simulate(solution.as_ref())?;
    let w = s.waiver_list();
    #[derive(Serialize)]
    struct Body<'a> {
        trajectory: &'a Trajectory,
    }
    Ok(Report {
        artifacts: vec![
            artifact("trajectory", Format::Csv, trajectory_csv(&w, &tr, s.model.gap_scale)),
            artifact("trajectory", Format::Json, json(&w, Body { trajectory: &tr })?),
        ],
        converged,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NodeRecord {
    pub state: usize,
    pub capacity: f64,
    pub recognition: f64,
    pub crisis: f64,
    pub v1: f64,
    pub v2: f64,
    pub delta1: f64,
    pub delta2: f64,
    pub regime: Regime,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveSummary {
    pub converged: bool,
    pub iterations: usize,
    pub discount: f64,
    pub bellman_residual: f64,
    pub deviation: DeviationReport,
    pub capacity_axis: Vec<f64>,
    pub recognition_axis: Vec<f64>,
    pub projection: crate::mpe::Projection,
    pub shocks: Vec<(f64, f64)>,
    pub nodes: Vec<NodeRecord>,
    pub residual_history: Vec<f64>,
    pub classification: Classification,
}

pub fn node_records(sol: &EquilibriumSolution) -> Vec<NodeRecord> {
    let n = sol.grid.len();
    (0..sol.v1.len())
        .map(|s| {
            let x = sol.grid.node(s % n);
            NodeRecord {
                state: s,
                capacity: x.capacity,
                recognition: x.recognition,
                crisis: sol.shocks[s / n].0,
                v1: sol.v1[s],
                v2: sol.v2[s],
                delta1: sol.delta1[s],
                delta2: sol.delta2[s],
                regime: sol.regime_policy[s],
            }
        })
        .collect()
}

pub fn solve_summary(s: &Scenario) -> Result<SolveSummary> {
    let model = s.model();
    let env = s.solver_env();
    let sol = s.solve()?;
    let classification = s.classify(&sol)?;
    Ok(SolveSummary {
        converged: sol.converged,
        iterations: sol.iterations,
        discount: sol.discount,
        bellman_residual: bellman_residual(&sol, &model, &env)?,
        deviation: verify_no_deviation(&sol, &model, &env, DEFAULT_DEVIATION_TOL)?,
        capacity_axis: sol.grid.capacity.clone(),
        recognition_axis: sol.grid.recognition.clone(),
        projection: sol.grid.projection,
        shocks: sol.shocks.clone(),
        nodes: node_records(&sol),
        residual_history: sol.residual_history.clone(),
        classification,
    })
}

pub fn solve_report(s: &Scenario) -> Result<Report> {
    let summary = solve_summary(s)?;
    let w = s.waiver_list();
    let rows: Vec<Vec<String>> = summary
        .nodes
        .iter()
        .map(|n| {
            vec![
                n.state.to_string(),
                fmt_num(n.capacity),
                fmt_num(n.recognition),
                fmt_num(n.crisis),
                fmt_num(n.v1),
                fmt_num(n.v2),
                fmt_num(n.delta1),
                fmt_num(n.delta2),
                n.regime.as_str().to_string(),
            ]
        })
        .collect();
    let table = csv(
        &w,
        &["state", "K", "R", "H", "V1", "V2", "delta1", "delta2", "regime"],
        &rows,
    );
    Ok(Report {
        converged: Some(summary.converged),
        artifacts: vec![
            artifact("solution", Format::Json, json(&w, &summary)?),
            artifact("solution", Format::Csv, table),
        ],
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdRow {
    pub bloc: usize,
    pub quantity: &'static str,
    pub value: Option<f64>,
    /// `ok`, `undefined`, or the position of the peace threshold relative to `[0,1]`.
    pub status: String,
}

pub fn threshold_table(s: &Scenario) -> Result<Vec<ThresholdRow>> {
    let ctx = scenario_context(s)?;
    let mut rows = Vec::new();
    for (i, e) in s.elites.iter().enumerate() {
        let bloc = i + 1;
        let ok = |quantity, value| ThresholdRow {
            bloc,
            quantity,
            value: Some(value),
            status: "ok".into(),
        };
        let undefined = |quantity| ThresholdRow {
            bloc,
            quantity,
            value: None,
            status: "undefined".into(),
        };
        rows.push(match critical_transfer_differential(e, &ctx) {
            Ok(v) => ok("transfer_differential", v),
            Err(Error::UndefinedThreshold(_)) => undefined("transfer_differential"),
            Err(err) => return Err(err),
        });
        rows.push(ok("control_premium", critical_control_premium(e, &ctx)));
        rows.push(ok("rent_gap", critical_rent_gap(e, &ctx)));
        rows.push(match peace_credibility_threshold(e, &s.productivity, &s.model, &ctx) {
            Ok(p) => ThresholdRow {
                bloc,
                quantity: "peace",
                value: Some(p.value),
                status: match p.range {
                    ThresholdRange::Within => "within",
                    ThresholdRange::Unattainable => "unattainable",
                    ThresholdRange::AlwaysAttained => "always_attained",
                }
                .into(),
            },
            Err(Error::UndefinedThreshold(_)) => undefined("peace"),
            Err(err) => return Err(err),
        });
    }
    Ok(rows)
}

pub fn thresholds_report(s: &Scenario) -> Result<Report> {
    let rows = threshold_table(s)?;
    let w = s.waiver_list();
    let cells: Vec<Vec<String>> = rows
        .iter()
        .map(|r| vec![r.bloc.to_string(), r.quantity.to_string(), opt_num(r.value), r.status.clone()])
        .collect();
    #[derive(Serialize)]
    struct Body<'a> {
        rows: &'a [ThresholdRow],
    }
    Ok(Report {
        artifacts: vec![
            artifact("thresholds", Format::Csv, csv(&w, &["bloc", "quantity", "value", "status"], &cells)),
            artifact("thresholds", Format::Json, json(&w, Body { rows: &rows })?),
        ],
        converged: None,
    })
}

pub const SWEEP_COLUMNS: [&str; 7] = ["parameter", "value", "delta1", "delta2", "regime", "classification", "converged"];

pub fn sweep_csv(waivers: &[Assumption], table: &SweepTable) -> String {
    let rows: Vec<Vec<String>> = table
        .rows
        .iter()
        .map(|r| {
            vec![
                table.parameter.clone(),
                fmt_num(r.value),
                fmt_num(r.delta1),
                fmt_num(r.delta2),
                r.regime.as_str().to_string(),
                r.classification
                    .map(|c| serde_json::to_value(c).unwrap().as_str().unwrap().to_string())
                    .unwrap_or_default(),
                r.converged.map(|c| c.to_string()).unwrap_or_default(),
            ]
        })
        .collect();
    csv(waivers, &SWEEP_COLUMNS, &rows)
}

pub fn sweep_report(s: &Scenario, parameter: &str, range: &SweepRange) -> Result<Report> {
    let table = sweep(s, parameter, range)?;
    let w = s.waiver_list();
    let converged = if s.mode == Mode::Solve {
        Some(table.rows.iter().all(|r| r.converged == Some(true)))
    } else {
        None
    };
    Ok(Report {
        artifacts: vec![
            artifact("sweep", Format::Csv, sweep_csv(&w, &table)),
            artifact("sweep", Format::Json, json(&w, &table)?),
        ],
        converged,
    })
}
