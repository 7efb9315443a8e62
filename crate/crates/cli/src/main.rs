//! `statehood`: run scenarios of the elite-coordination model from the command line.
//!
//! Exit codes: 0 success, 1 configuration or validation error, 2 solver
//! non-convergence under `--require-convergence`.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use statehood_core::report::{self, Artifact, Format, Report};
use statehood_core::scenario::{parse_scenario, preset, Scenario, SweepRange, PRESET_NAMES};

#[derive(Parser)]
#[command(name = "statehood", version, about = "Elite coordination, capacity and recognition scenarios")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Static calibration table against the benchmark reference values.
    Calibrate(Common),
    /// Stage-game bimatrix, unification gains, Nash set and regime.
    Stage(Common),
    /// Trajectory over the scenario horizon.
    Simulate(Common),
    /// Stationary equilibrium on the scenario grid, with classification.
    Solve(Common),
    /// Critical transfer, control, rent and peace thresholds.
    Thresholds(Common),
    /// One run per value of a named parameter.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Dotted parameter name, e.g. model.transfer_frag_premium.
        #[arg(long)]
        param: String,
        #[arg(long, allow_negative_numbers = true)]
        from: f64,
        #[arg(long, allow_negative_numbers = true)]
        to: f64,
        #[arg(long)]
        points: usize,
    },
}

#[derive(Args)]
struct Common {
    /// Scenario file (TOML).
    #[arg(long, required_unless_present = "preset", conflicts_with = "preset")]
    scenario: Option<PathBuf>,
    /// Built-in scenario: benchmark, dynamic or aligned.
    #[arg(long)]
    preset: Option<String>,
    /// Output directory; without it the primary output goes to stdout.
    #[arg(long, env = "STATEHOOD_OUT_DIR")]
    out: Option<PathBuf>,
    /// Overrides the scenario seed.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    format: Option<OutputFormat>,
    /// Exit with code 2 if the equilibrium solver did not converge.
    #[arg(long)]
    require_convergence: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutputFormat {
    Csv,
    Json,
}

impl From<OutputFormat> for Format {
    fn from(f: OutputFormat) -> Self {
        match f {
            OutputFormat::Csv => Format::Csv,
            OutputFormat::Json => Format::Json,
        }
    }
}

fn load(common: &Common) -> Result<Scenario> {
    let mut s = match (&common.scenario, &common.preset) {
        (Some(path), _) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            parse_scenario(&text).with_context(|| format!("invalid scenario {}", path.display()))?
        }
        (None, Some(name)) => preset(name)?,
        (None, None) => bail!("one of --scenario or --preset is required ({})", PRESET_NAMES.join(", ")),
    };
    if let Some(seed) = common.seed {
        s.seed = seed;
    }
    Ok(s)
}

fn select(report: &Report, format: Option<Format>, to_dir: bool) -> Result<Vec<&Artifact>> {
    let picked: Vec<&Artifact> = match format {
        Some(f) => report.artifacts.iter().filter(|a| a.format == f).collect(),
        None if to_dir => report.artifacts.iter().collect(),
        None => report.artifacts.iter().take(1).collect(),
    };
    if picked.is_empty() {
        bail!("this subcommand has no {} output", format.map_or("", |f| f.extension()));
    }
    Ok(picked)
}

fn emit(artifacts: &[&Artifact], out: Option<&Path>) -> Result<()> {
    match out {
        Some(dir) => {
            fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            for a in artifacts {
                let path = dir.join(a.file_name());
                fs::write(&path, &a.contents).with_context(|| format!("writing {}", path.display()))?;
            }
        }
        None => {
            for a in artifacts {
                print!("{}", a.contents);
            }
        }
    }
    Ok(())
}

/// Runs one command; `Ok(false)` means the solver failed to converge under
/// `--require-convergence`.
fn run(command: Command) -> Result<bool> {
    let (common, report) = match command {
        Command::Calibrate(c) => {
            let r = report::calibrate_report(&load(&c)?)?;
            (c, r)
        }
        Command::Stage(c) => {
            let r = report::stage_report(&load(&c)?)?;
            (c, r)
        }
        Command::Simulate(c) => {
            let r = report::simulate_report(&load(&c)?)?;
            (c, r)
        }
        Command::Solve(c) => {
            let r = report::solve_report(&load(&c)?)?;
            (c, r)
        }
        Command::Thresholds(c) => {
            let r = report::thresholds_report(&load(&c)?)?;
            (c, r)
        }
        Command::Sweep {
            common,
            param,
            from,
            to,
            points,
        } => {
            let range = SweepRange { from, to, points };
            let r = report::sweep_report(&load(&common)?, &param, &range)?;
            (common, r)
        }
    };
    let picked = select(&report, common.format.map(Format::from), common.out.is_some())?;
    emit(&picked, common.out.as_deref())?;
    Ok(!(common.require_convergence && report.converged == Some(false)))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("error: equilibrium solver did not converge");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
