//! CSV serialization of runs, summaries, plot data and traces.
//!
//! Output is locale independent: `.` decimal point, no grouping, `\n` line
//! ends, no quoting. Reals carry 6 significant digits, counts and seeds are
//! exact integers.

use std::fs;
use std::io::{self, Write};
use std::path::Path;

use swarmcharge::{Cell, RunResult, ScenarioSummary, StepReport, SweepPlan};

pub const RUNS_HEADER: &str =
    "scenario_id,policy,bc,b,rep,seed,ticks_elapsed,finished,remaining_drones,utility";
pub const SUMMARY_HEADER: &str = "scenario_id,policy,bc,b,n_reps,avg_remaining,sd_remaining,\
pct_finished,sd_pct_finished,avg_utility,sd_utility";
pub const PLOT_HEADER: &str = "bc,avg_remaining,pct_finished,avg_utility";
pub const TRACE_HEADER: &str = "tick,alive,attendants,admitted,mean_soc";

/// `x` with 6 significant digits, trailing zeros trimmed, never in exponent form.
pub fn format_real(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (5 - magnitude).max(0) as usize;
    let mut s = format!("{x:.decimals$}");
    if s.contains('.') {
        let trimmed = s.trim_end_matches('0').trim_end_matches('.').len();
        s.truncate(trimmed);
    }
    if s == "-0" {
        s = "0".to_string();
    }
    s
}

/// Rounds `x` to what [`format_real`] writes.
pub fn quantize(x: f64) -> f64 {
    format_real(x).parse().expect("formatted real parses")
}

/// One serialized [`RunResult`].
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub scenario_id: usize,
    pub policy: swarmcharge::Policy,
    pub bc: f64,
    pub b: f64,
    pub rep: usize,
    pub seed: u64,
    pub ticks_elapsed: u32,
    pub finished: bool,
    pub remaining_drones: usize,
    pub utility: f64,
}

impl RunRecord {
    pub fn new(cell: &Cell<f64>, r: &RunResult) -> Self {
        Self {
            scenario_id: r.scenario_id,
            policy: cell.params.policy,
            bc: cell.params.bc_mean,
            b: cell.params.b_pct,
            rep: r.rep,
            seed: r.seed,
            ticks_elapsed: r.ticks_elapsed,
            finished: r.finished,
            remaining_drones: r.remaining_drones,
            utility: r.utility,
        }
    }

    pub fn to_csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{}",
            self.scenario_id,
            self.policy,
            format_real(self.bc),
            format_real(self.b),
            self.rep,
            self.seed,
            self.ticks_elapsed,
            self.finished,
            self.remaining_drones,
            format_real(self.utility),
        )
    }
}

pub fn write_runs<W: Write>(mut w: W, plan: &SweepPlan, results: &[RunResult]) -> io::Result<()> {
    let cells = plan.cells();
    writeln!(w, "{RUNS_HEADER}")?;
    for r in results {
        writeln!(w, "{}", RunRecord::new(&cells[r.scenario_id], r).to_csv_row())?;
    }
    Ok(())
}

pub fn write_summary<W: Write>(mut w: W, plan: &SweepPlan, summaries: &[ScenarioSummary]) -> io::Result<()> {
    let cells = plan.cells();
    writeln!(w, "{SUMMARY_HEADER}")?;
    for s in summaries {
        let p = &cells[s.scenario_id].params;
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{}",
            s.scenario_id,
            p.policy,
            format_real(p.bc_mean),
            format_real(p.b_pct),
            s.n_reps,
            format_real(s.avg_remaining),
            format_real(s.sd_remaining),
            format_real(s.pct_finished),
            format_real(s.sd_pct_finished),
            format_real(s.avg_utility),
            format_real(s.sd_utility),
        )?;
    }
    Ok(())
}

/// Writes one `<policy>_b<b>.csv` per (policy, capacity) pair into `dir`, rows in
/// consumption order. Returns the file names written.
pub fn write_plotdata(dir: &Path, plan: &SweepPlan, summaries: &[ScenarioSummary]) -> io::Result<Vec<String>> {
    fs::create_dir_all(dir)?;
    let cells = plan.cells();
    let mut names = Vec::new();
    for &policy in &plan.policies {
        for &b in &plan.b_levels {
            let name = format!("{policy}_b{}.csv", format_real(b));
            let mut out = String::from(PLOT_HEADER);
            out.push('\n');
            for s in summaries {
                let p = &cells[s.scenario_id].params;
                if p.policy == policy && p.b_pct == b {
                    out.push_str(&format!(
                        "{},{},{},{}\n",
                        format_real(p.bc_mean),
                        format_real(s.avg_remaining),
                        format_real(s.pct_finished),
                        format_real(s.avg_utility),
                    ));
                }
            }
            fs::write(dir.join(&name), out)?;
            names.push(name);
        }
    }
    Ok(names)
}

pub fn trace_row(r: &StepReport<f64>) -> String {
    format!(
        "{},{},{},{},{}",
        r.tick,
        r.alive,
        r.attendants,
        r.admitted,
        format_real(r.mean_soc)
    )
}
