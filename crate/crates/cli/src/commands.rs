use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use swarmcharge::{aggregate, run_sweep, Cell, Policy, ScenarioParams, Simulation, SweepPlan};
use thiserror::Error;

use crate::config::{parse_config, ConfigError};
use crate::records::{self, quantize, RunRecord};

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags or configuration.
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        match e {
            ConfigError::Io { .. } => CliError::Runtime(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

fn io_error(what: &Path) -> impl Fn(std::io::Error) -> CliError + '_ {
    move |e| CliError::Runtime(format!("{}: {e}", what.display()))
}

#[derive(Debug, Clone)]
pub struct RunArgs {
    pub policy: Policy,
    pub bc: f64,
    pub b: f64,
    pub seed: u64,
    /// Fixed parameters; reference defaults when absent.
    pub config: Option<PathBuf>,
    pub trace: Option<PathBuf>,
}

/// Executes one run and writes its record, with header, to `out`.
pub fn cmd_run<W: Write>(args: &RunArgs, mut out: W) -> Result<(), CliError> {
    let base = match &args.config {
        Some(path) => parse_config(path)?.base,
        None => ScenarioParams::default(),
    };
    let params = ScenarioParams {
        policy: args.policy,
        bc_mean: args.bc,
        b_pct: args.b,
        ..base
    };
    let mut sim = Simulation::new(params, args.seed).map_err(|e| CliError::Usage(e.to_string()))?;

    match &args.trace {
        Some(path) => {
            let file = File::create(path).map_err(io_error(path))?;
            let mut w = BufWriter::new(file);
            writeln!(w, "{}", records::TRACE_HEADER).map_err(io_error(path))?;
            let mut failure = None;
            sim.run_to_end(|r| {
                if failure.is_none() {
                    failure = writeln!(w, "{}", records::trace_row(r)).err();
                }
            });
            if let Some(e) = failure {
                return Err(io_error(path)(e));
            }
            w.flush().map_err(io_error(path))?;
        }
        None => sim.run_to_end(|_| {}),
    }

    let cell = Cell {
        scenario_id: 0,
        params,
    };
    let record = RunRecord::new(&cell, &sim.result(0, 0, args.seed));
    writeln!(out, "{}\n{}", records::RUNS_HEADER, record.to_csv_row())
        .map_err(|e| CliError::Runtime(format!("stdout: {e}")))
}

#[derive(Debug, Clone)]
pub struct SweepArgs {
    pub config: Option<PathBuf>,
    pub out: PathBuf,
    pub jobs: usize,
    /// Overrides the configured master seed.
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SweepOutcome {
    pub runs: usize,
    pub scenarios: usize,
}

fn ensure_writable(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(io_error(dir))?;
    let probe = dir.join(".swarmcharge-write-probe");
    File::create(&probe).map_err(io_error(dir))?;
    fs::remove_file(&probe).map_err(io_error(dir))
}

pub fn load_plan(config: Option<&Path>, seed: Option<u64>) -> Result<SweepPlan, CliError> {
    let mut plan = match config {
        Some(path) => parse_config(path)?,
        None => SweepPlan::reference(1),
    };
    if let Some(seed) = seed {
        plan.master_seed = seed;
    }
    Ok(plan)
}

/// Runs the sweep and writes `runs.csv`, `summary.csv` and `plotdata/` under `args.out`.
///
/// Utilities are rounded to their serialized precision before aggregation, so
/// the summary can be recomputed exactly from `runs.csv`.
pub fn cmd_sweep(args: &SweepArgs) -> Result<SweepOutcome, CliError> {
    let plan = load_plan(args.config.as_deref(), args.seed)?;
    plan.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    ensure_writable(&args.out)?;

    let mut results = run_sweep(&plan, args.jobs).map_err(|e| CliError::Runtime(e.to_string()))?;
    for r in &mut results {
        r.utility = quantize(r.utility);
    }
    let summaries = aggregate(&results, &plan).map_err(|e| CliError::Runtime(e.to_string()))?;

    let runs_path = args.out.join("runs.csv");
    let file = File::create(&runs_path).map_err(io_error(&runs_path))?;
    let mut w = BufWriter::new(file);
    records::write_runs(&mut w, &plan, &results).map_err(io_error(&runs_path))?;
    w.flush().map_err(io_error(&runs_path))?;

    let summary_path = args.out.join("summary.csv");
    let mut buf = Vec::new();
    records::write_summary(&mut buf, &plan, &summaries).map_err(io_error(&summary_path))?;
    fs::write(&summary_path, buf).map_err(io_error(&summary_path))?;

    let plot_dir = args.out.join("plotdata");
    records::write_plotdata(&plot_dir, &plan, &summaries).map_err(io_error(&plot_dir))?;

    Ok(SweepOutcome {
        runs: results.len(),
        scenarios: summaries.len(),
    })
}
