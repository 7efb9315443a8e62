//! Scenario files, built-in presets and parameter sweeps.
//!
//! A scenario is a TOML document bundling every primitive of one run.
//! Unknown keys are rejected. Only the solver tolerances, the grid
//! projection, the capacity-response form and the optional environment
//! extras have defaults.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{simulate, unification_gains, CrisisShock, DeltaBasis, ExogenousPath, Policy, Trajectory};
use crate::error::{Assumption, Error, Result, Violation};
use crate::model::{EliteParams, ExogenousEnv, Model, ModelParams, PolityState, ProductivitySpec, Regime};
use crate::mpe::{
    build_grid, classify_equilibrium, solve_stationary, Classification, EquilibriumClass, EquilibriumSolution,
    Projection, SolverEnv, SolverOptions, StateGrid,
};
use crate::stage::decision_regime;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Static calibration with `K_theta = K0 - lambda q`.
    Static,
    /// Dynamic model with myopic gains at the current state.
    Dynamic,
    /// Dynamic model with a solved stationary equilibrium.
    Solve,
}

/// Base environment plus optional crisis shock or explicit per-period path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvironmentSpec {
    pub peace: f64,
    #[serde(default)]
    pub diplomatic_support: f64,
    #[serde(default)]
    pub symbolic_support: f64,
    #[serde(default)]
    pub crisis_intensity: f64,
    /// Redraws the crisis intensity every period.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub crisis: Option<CrisisShock>,
    /// One entry per simulated period. The solver still uses the base values.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<Vec<ExogenousEnv>>,
}

impl EnvironmentSpec {
    pub fn base(&self) -> ExogenousEnv {
        ExogenousEnv {
            peace: self.peace,
            diplomatic_support: self.diplomatic_support,
            symbolic_support: self.symbolic_support,
            crisis_intensity: self.crisis_intensity,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub capacity_bounds: [f64; 2],
    pub capacity_nodes: usize,
    pub recognition_bounds: [f64; 2],
    pub recognition_nodes: usize,
    #[serde(default)]
    pub projection: Projection,
}

impl GridSpec {
    pub fn build(&self) -> Result<StateGrid> {
        build_grid(
            (self.capacity_bounds[0], self.capacity_bounds[1]),
            self.capacity_nodes,
            (self.recognition_bounds[0], self.recognition_bounds[1]),
            self.recognition_nodes,
            self.projection,
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub name: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub waivers: Vec<Assumption>,
    pub mode: Mode,
    pub horizon: usize,
    pub seed: u64,
    pub model: ModelParams,
    pub productivity: ProductivitySpec,
    pub elites: [EliteParams; 2],
    pub environment: EnvironmentSpec,
    pub initial_state: PolityState,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSpec>,
    #[serde(default)]
    pub solver: SolverOptions,
}

/// Parses and validates a scenario document.
pub fn parse_scenario(text: &str) -> Result<Scenario> {
    if text.trim().is_empty() {
        return Err(Error::Parse("scenario is empty".into()));
    }
    let s: Scenario = toml::from_str(text).map_err(|e| Error::Parse(e.to_string().trim_end().to_string()))?;
    s.validate()?;
    Ok(s)
}

impl Scenario {
    /// All violations, including waived ones.
    pub fn violations(&self) -> Vec<Violation> {
        let mut out = self.model().validate();
        out.extend(self.environment.base().validate());
        if let Some(shock) = &self.environment.crisis {
            out.extend(shock.validate());
        }
        if let Some(path) = &self.environment.path {
            if path.len() != self.horizon {
                out.push(Violation::plain(format!(
                    "environment.path has {} entries but horizon is {}",
                    path.len(),
                    self.horizon
                )));
            }
            for (t, env) in path.iter().enumerate() {
                out.extend(env.validate().into_iter().map(|v| Violation {
                    message: format!("period {t}: {}", v.message),
                    ..v
                }));
            }
        }
        out.extend(self.initial_state.validate());
        match (&self.grid, self.mode) {
            (Some(g), _) => {
                if let Err(e) = g.build() {
                    out.push(Violation::plain(e.to_string()));
                }
            }
            (None, Mode::Solve) => out.push(Violation::plain("mode \"solve\" requires a [grid] section")),
            (None, _) => {}
        }
        if !(self.solver.tol > 0.0 && self.solver.tol.is_finite()) || self.solver.max_iter == 0 {
            out.push(Violation::plain("solver.tol must be > 0 and solver.max_iter >= 1"));
        }
        out
    }

    /// Fails on every violation not covered by a waiver.
    pub fn validate(&self) -> Result<()> {
        let open: Vec<Violation> = self
            .violations()
            .into_iter()
            .filter(|v| v.assumption.is_none_or(|a| !self.waivers.contains(&a)))
            .collect();
        if open.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(open))
        }
    }

    /// Waivers in canonical order without duplicates.
    pub fn waiver_list(&self) -> Vec<Assumption> {
        let mut w = self.waivers.clone();
        w.sort();
        w.dedup();
        w
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn model(&self) -> Model {
        Model {
            params: self.model.clone(),
            elites: self.elites.clone(),
            productivity: self.productivity,
        }
    }

    pub fn base_env(&self) -> ExogenousEnv {
        self.environment.base()
    }

    pub fn solver_env(&self) -> SolverEnv {
        match self.environment.crisis {
            Some(shock) => SolverEnv::IidCrisis {
                base: self.base_env(),
                shock,
            },
            None => SolverEnv::Constant(self.base_env()),
        }
    }

    /// Simulation path; crisis draws use `seed`.
    pub fn path(&self) -> Result<ExogenousPath> {
        let path = match &self.environment.path {
            Some(p) => ExogenousPath::from_periods(p.clone())?,
            None => ExogenousPath::constant(self.base_env(), self.horizon),
        };
        Ok(match &self.environment.crisis {
            Some(shock) => path.with_iid_crisis(shock, self.seed),
            None => path,
        })
    }

    pub fn grid(&self) -> Result<StateGrid> {
        match &self.grid {
            Some(g) => g.build(),
            None => Err(Error::Grid("scenario has no [grid] section".into())),
        }
    }

    pub fn solve(&self) -> Result<EquilibriumSolution> {
        solve_stationary(&self.model(), &self.grid()?, &self.solver_env(), &self.solver)
    }

    pub fn classify(&self, solution: &EquilibriumSolution) -> Result<Classification> {
        classify_equilibrium(solution, &self.model(), &self.path()?, self.initial_state)
    }

    /// Trajectory under the mode's policy: myopic in static and dynamic
    /// modes, closed-loop equilibrium in solve mode.
    pub fn simulate(&self, solution: Option<&EquilibriumSolution>) -> Result<Trajectory> {
        let policy = match (self.mode, solution) {
            (Mode::Solve, Some(sol)) => Policy::Equilibrium(sol),
            (Mode::Solve, None) => return Err(Error::Domain("solve mode needs a solution to simulate".into())),
            _ => Policy::Myopic,
        };
        simulate(&self.model(), &self.path()?, policy, self.initial_state)
    }
}

const BENCHMARK: &str = include_str!("../presets/benchmark.toml");
const DYNAMIC: &str = include_str!("../presets/dynamic.toml");
const ALIGNED: &str = include_str!("../presets/aligned.toml");

pub const PRESET_NAMES: [&str; 3] = ["benchmark", "dynamic", "aligned"];

/// Source text of a built-in preset.
pub fn preset_source(name: &str) -> Option<&'static str> {
    match name {
        "benchmark" => Some(BENCHMARK),
        "dynamic" => Some(DYNAMIC),
        "aligned" => Some(ALIGNED),
        _ => None,
    }
}

pub fn preset(name: &str) -> Result<Scenario> {
    let text = preset_source(name).ok_or_else(|| {
        Error::Parse(format!("unknown preset {name:?}; available: {}", PRESET_NAMES.join(", ")))
    })?;
    parse_scenario(text)
}

/// Static benchmark calibration.
pub fn benchmark_preset() -> Scenario {
    preset("benchmark").expect("built-in preset is valid")
}

/// Benchmark extended with labeled dynamic parameters; classifies as nominal statehood.
pub fn dynamic_preset() -> Scenario {
    preset("dynamic").expect("built-in preset is valid")
}

/// Zero fragmentation premia, full peace credibility; classifies as unified-convergent.
pub fn aligned_preset() -> Scenario {
    preset("aligned").expect("built-in preset is valid")
}

fn numeric_leaves(prefix: &str, v: &serde_json::Value, out: &mut Vec<String>) {
    match v {
        serde_json::Value::Number(n) if n.is_f64() => out.push(prefix.to_string()),
        serde_json::Value::Object(map) => {
            for (k, child) in map {
                let p = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                numeric_leaves(&p, child, out);
            }
        }
        serde_json::Value::Array(items) => {
            for (i, child) in items.iter().enumerate() {
                numeric_leaves(&format!("{prefix}.{i}"), child, out);
            }
        }
        _ => {}
    }
}

fn to_json(s: &Scenario) -> Result<serde_json::Value> {
    serde_json::to_value(s).map_err(|e| Error::Parse(e.to_string()))
}

/// Dotted names of every real-valued parameter of `scenario`, sorted.
pub fn parameter_names(scenario: &Scenario) -> Result<Vec<String>> {
    let mut out = Vec::new();
    numeric_leaves("", &to_json(scenario)?, &mut out);
    out.sort();
    Ok(out)
}

/// Copy of `scenario` with one dotted parameter replaced, validated.
pub fn with_parameter(scenario: &Scenario, name: &str, value: f64) -> Result<Scenario> {
    let mut json = to_json(scenario)?;
    let pointer = format!("/{}", name.replace('.', "/"));
    match json.pointer_mut(&pointer) {
        Some(slot) if slot.is_f64() => {
            *slot = serde_json::Number::from_f64(value)
                .map(serde_json::Value::Number)
                .ok_or_else(|| Error::Domain(format!("{name} must be finite (got {value})")))?;
        }
        _ => {
            return Err(Error::UnknownParameter {
                name: name.to_string(),
                valid: parameter_names(scenario)?,
            })
        }
    }
    let out: Scenario = serde_json::from_value(json).map_err(|e| Error::Parse(e.to_string()))?;
    out.validate()?;
    Ok(out)
}

/// Evenly spaced values from `from` to `to` inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRange {
    pub from: f64,
    pub to: f64,
    pub points: usize,
}

impl SweepRange {
    pub fn values(&self) -> Result<Vec<f64>> {
        if !(self.from.is_finite() && self.to.is_finite()) {
            return Err(Error::Domain("sweep range must be finite".into()));
        }
        match self.points {
            0 => Err(Error::Domain("sweep needs at least one point".into())),
            1 => Ok(vec![self.from]),
            n => Ok((0..n)
                .map(|i| {
                    if i == n - 1 {
                        self.to
                    } else {
                        self.from + (self.to - self.from) * i as f64 / (n - 1) as f64
                    }
                })
                .collect()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub value: f64,
    pub delta1: f64,
    pub delta2: f64,
    pub regime: Regime,
    /// Solve mode only.
    pub classification: Option<EquilibriumClass>,
    /// Solve mode only.
    pub converged: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub parameter: String,
    pub rows: Vec<SweepRow>,
}

/// Unification gains, regime and (in solve mode) classification of a single run.
pub fn evaluate_point(scenario: &Scenario, value: f64) -> Result<SweepRow> {
    let model = scenario.model();
    let env = scenario.base_env();
    let (delta, classification, converged) = match scenario.mode {
        Mode::Static => (unification_gains(&model, &env, &DeltaBasis::StaticCalibration)?, None, None),
        Mode::Dynamic => (
            unification_gains(&model, &env, &DeltaBasis::Myopic(scenario.initial_state))?,
            None,
            None,
        ),
        Mode::Solve => {
            let sol = scenario.solve()?;
            let delta = sol.delta_at(&model, &scenario.initial_state, &env)?;
            let class = scenario.classify(&sol)?.class;
            (delta, Some(class), Some(sol.converged))
        }
    };
    Ok(SweepRow {
        value,
        delta1: delta[0],
        delta2: delta[1],
        regime: decision_regime(delta[0], delta[1]),
        classification,
        converged,
    })
}

/// Runs independent copies of `base` over `range`; rows follow the range order.
pub fn sweep(base: &Scenario, parameter: &str, range: &SweepRange) -> Result<SweepTable> {
    let values = range.values()?;
    // Resolve the name once so a typo fails before any work is done.
    with_parameter(base, parameter, values[0])?;
    let rows = values
        .par_iter()
        .map(|&v| evaluate_point(&with_parameter(base, parameter, v)?, v))
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepTable {
        parameter: parameter.to_string(),
        rows,
    })
}
