//! Full-factorial sweep over policy x consumption x capacity with replications.

use rayon::prelude::*;
use thiserror::Error;

use crate::engine::Simulation;
use crate::model::{validate_params, ParamError, Policy, RunResult, ScenarioParams, ScenarioSummary};
use crate::scalar::Scalar;

#[derive(Debug, Error)]
pub enum SweepError {
    #[error("scenario {scenario_id}: {source}")]
    InvalidCell {
        scenario_id: usize,
        #[source]
        source: ParamError,
    },
    #[error("reps ≥ 1 violated")]
    NoReps,
    #[error("factor list `{0}` is empty")]
    EmptyFactor(&'static str),
    #[error("scenario {scenario_id} is incomplete: {found} of {expected} replications")]
    IncompleteCell {
        scenario_id: usize,
        found: usize,
        expected: usize,
    },
    #[error("result for scenario {scenario_id} rep {rep} is not part of the plan")]
    UnexpectedResult { scenario_id: usize, rep: usize },
    #[error("cannot start worker pool: {0}")]
    Pool(String),
}

/// Factor levels, replication count and master seed of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPlan<S> {
    /// Fixed parameters; policy, `bc_mean` and `b_pct` are overridden per cell.
    pub base: ScenarioParams<S>,
    pub policies: Vec<Policy>,
    pub bc_levels: Vec<S>,
    pub b_levels: Vec<S>,
    pub reps: usize,
    pub master_seed: u64,
}

/// One point of the factorial design.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell<S> {
    pub scenario_id: usize,
    pub params: ScenarioParams<S>,
}

impl<S: Scalar> SweepPlan<S> {
    /// Both policies, consumption 1..=15, capacity 30 and 40 percent, 100 replications.
    pub fn reference(master_seed: u64) -> Self {
        Self {
            base: ScenarioParams::default(),
            policies: Policy::ALL.to_vec(),
            bc_levels: (1..=15).map(|bc| S::lit(bc as f64)).collect(),
            b_levels: vec![S::lit(30.0), S::lit(40.0)],
            reps: 100,
            master_seed,
        }
    }

    pub fn cell_count(&self) -> usize {
        self.policies.len() * self.bc_levels.len() * self.b_levels.len()
    }

    /// Cells in scenario-id order: policy outermost, then consumption, then capacity.
    pub fn cells(&self) -> Vec<Cell<S>> {
        let mut cells = Vec::with_capacity(self.cell_count());
        for &policy in &self.policies {
            for &bc_mean in &self.bc_levels {
                for &b_pct in &self.b_levels {
                    let params = ScenarioParams {
                        policy,
                        bc_mean,
                        b_pct,
                        ..self.base
                    };
                    cells.push(Cell {
                        scenario_id: cells.len(),
                        params,
                    });
                }
            }
        }
        cells
    }

    /// Checks the plan shape and every cell's parameters.
    pub fn validate(&self) -> Result<(), SweepError> {
        if self.reps < 1 {
            return Err(SweepError::NoReps);
        }
        if self.policies.is_empty() {
            return Err(SweepError::EmptyFactor("policies"));
        }
        if self.bc_levels.is_empty() {
            return Err(SweepError::EmptyFactor("bc_levels"));
        }
        if self.b_levels.is_empty() {
            return Err(SweepError::EmptyFactor("b_levels"));
        }
        for cell in self.cells() {
            validate_params(cell.params).map_err(|source| SweepError::InvalidCell {
                scenario_id: cell.scenario_id,
                source,
            })?;
        }
        Ok(())
    }
}

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 output function: a bijection on `u64` with full avalanche.
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of replication `rep` of scenario `scenario_id`.
///
/// `mix64(mix64(master + γ) ^ (scenario_id << 32 | rep))`. For a fixed master the
/// map is injective while both indices fit in 32 bits.
pub fn derive_seed(master: u64, scenario_id: usize, rep: usize) -> u64 {
    let key = ((scenario_id as u64) << 32) | (rep as u64 & 0xFFFF_FFFF);
    mix64(mix64(master.wrapping_add(GOLDEN_GAMMA)) ^ key)
}

fn run_one<S: Scalar>(cell: &Cell<S>, rep: usize, master: u64) -> RunResult<S> {
    let seed = derive_seed(master, cell.scenario_id, rep);
    let mut sim = Simulation::new(cell.params, seed).expect("cell validated before the sweep");
    sim.run_to_end(|_| {});
    sim.result(cell.scenario_id, rep, seed)
}

/// Runs every (cell, rep) pair on `parallelism` worker threads.
///
/// Output is ordered by `(scenario_id, rep)` and does not depend on `parallelism`.
pub fn run_sweep<S: Scalar>(plan: &SweepPlan<S>, parallelism: usize) -> Result<Vec<RunResult<S>>, SweepError> {
    plan.validate()?;
    let cells = plan.cells();
    let work: Vec<(&Cell<S>, usize)> = cells
        .iter()
        .flat_map(|c| (0..plan.reps).map(move |rep| (c, rep)))
        .collect();
    if parallelism <= 1 {
        return Ok(work
            .iter()
            .map(|&(c, rep)| run_one(c, rep, plan.master_seed))
            .collect());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(parallelism)
        .build()
        .map_err(|e| SweepError::Pool(e.to_string()))?;
    Ok(pool.install(|| {
        work.par_iter()
            .map(|&(c, rep)| run_one(c, rep, plan.master_seed))
            .collect()
    }))
}

fn mean_and_sd<S: Scalar>(values: &[S]) -> (S, S) {
    let n = S::from_count(values.len());
    let mean = values.iter().fold(S::zero(), |a, &v| a + v) / n;
    if values.len() < 2 {
        return (mean, S::zero());
    }
    let ss = values.iter().fold(S::zero(), |a, &v| a + (v - mean) * (v - mean));
    (mean, (ss / (n - S::one())).sqrt())
}

/// Summarises each cell of `plan` from `results`, which may be in any order.
pub fn aggregate<S: Scalar>(results: &[RunResult<S>], plan: &SweepPlan<S>) -> Result<Vec<ScenarioSummary<S>>, SweepError> {
    let n_cells = plan.cell_count();
    let mut by_cell: Vec<Vec<Option<&RunResult<S>>>> = vec![vec![None; plan.reps]; n_cells];
    for r in results {
        let slot = by_cell
            .get_mut(r.scenario_id)
            .and_then(|reps| reps.get_mut(r.rep))
            .ok_or(SweepError::UnexpectedResult {
                scenario_id: r.scenario_id,
                rep: r.rep,
            })?;
        *slot = Some(r);
    }
    let hundred = S::lit(100.0);
    by_cell
        .into_iter()
        .enumerate()
        .map(|(scenario_id, reps)| {
            let found = reps.iter().flatten().count();
            if found != plan.reps {
                return Err(SweepError::IncompleteCell {
                    scenario_id,
                    found,
                    expected: plan.reps,
                });
            }
            let runs: Vec<&RunResult<S>> = reps.into_iter().flatten().collect();
            let remaining: Vec<S> = runs.iter().map(|r| S::from_count(r.remaining_drones)).collect();
            let finished: Vec<S> = runs
                .iter()
                .map(|r| if r.finished { hundred } else { S::zero() })
                .collect();
            let utility: Vec<S> = runs.iter().map(|r| r.utility).collect();
            let (avg_remaining, sd_remaining) = mean_and_sd(&remaining);
            let (pct_finished, sd_pct_finished) = mean_and_sd(&finished);
            let (avg_utility, sd_utility) = mean_and_sd(&utility);
            Ok(ScenarioSummary {
                scenario_id,
                n_reps: plan.reps,
                avg_remaining,
                sd_remaining,
                pct_finished,
                sd_pct_finished,
                avg_utility,
                sd_utility,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn result(scenario_id: usize, rep: usize, remaining: usize, utility: f64) -> RunResult<f64> {
        RunResult {
            scenario_id,
            rep,
            seed: 0,
            ticks_elapsed: if remaining > 0 { 1500 } else { 10 },
            finished: remaining > 0,
            remaining_drones: remaining,
            utility,
        }
    }

    fn one_cell_plan(reps: usize) -> SweepPlan<f64> {
        SweepPlan {
            policies: vec![Policy::Bl],
            bc_levels: vec![15.0],
            b_levels: vec![30.0],
            reps,
            ..SweepPlan::reference(5)
        }
    }

    #[test]
    fn seeds_depend_on_rep_and_are_pure() {
        assert_ne!(derive_seed(42, 0, 0), derive_seed(42, 0, 1));
        assert_eq!(derive_seed(42, 3, 7), derive_seed(42, 3, 7));
        assert_ne!(derive_seed(42, 1, 0), derive_seed(42, 0, 1));
    }

    #[test]
    fn reference_plan_shape() {
        let plan = SweepPlan::<f64>::reference(1);
        assert_eq!(plan.cell_count(), 60);
        let cells = plan.cells();
        assert_eq!(cells.len(), 60);
        assert_eq!(cells[0].params.policy, Policy::Bl);
        assert_eq!(cells[1].params.b_pct, 40.0);
        assert_eq!(cells[2].params.bc_mean, 2.0);
        assert_eq!(cells[30].params.policy, Policy::Ct);
        assert!(cells.iter().enumerate().all(|(i, c)| c.scenario_id == i));
        plan.validate().unwrap();
    }

    #[test]
    fn invalid_cell_stops_the_sweep() {
        let mut plan = one_cell_plan(1);
        plan.b_levels = vec![30.0, 140.0];
        match run_sweep(&plan, 1) {
            Err(SweepError::InvalidCell { scenario_id: 1, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
        plan.reps = 0;
        assert!(matches!(plan.validate(), Err(SweepError::NoReps)));
    }

    #[test]
    fn single_rep_single_cell() {
        let results = run_sweep(&one_cell_plan(1), 1).unwrap();
        assert_eq!(results.len(), 1);
        assert_eq!((results[0].scenario_id, results[0].rep), (0, 0));
    }

    #[test]
    fn two_point_mean() {
        let plan = one_cell_plan(2);
        let s = aggregate(&[result(0, 0, 0, 0.0), result(0, 1, 100, 0.9)], &plan).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].avg_remaining, 50.0);
        assert_eq!(s[0].pct_finished, 50.0);
        assert!((s[0].avg_utility - 0.45).abs() < 1e-12);
        assert!((s[0].sd_remaining - 5000f64.sqrt()).abs() < 1e-9);
    }

    #[test]
    fn missing_rep_names_the_cell() {
        let plan = one_cell_plan(2);
        let err = aggregate(&[result(0, 1, 100, 1.0)], &plan).unwrap_err();
        assert!(matches!(
            err,
            SweepError::IncompleteCell { scenario_id: 0, found: 1, expected: 2 }
        ));
        let err = aggregate(&[result(0, 0, 1, 1.0), result(0, 1, 1, 1.0), result(3, 0, 1, 1.0)], &plan)
            .unwrap_err();
        assert!(matches!(err, SweepError::UnexpectedResult { scenario_id: 3, rep: 0 }));
    }
}
