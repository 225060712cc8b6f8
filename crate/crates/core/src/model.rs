//! Domain types shared by the predictor, policy, engine and experiment layers.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::predictor::Forecaster;
use crate::scalar::Scalar;

/// Recharge decision policy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Policy {
    /// Baseline: recharge only below the lower reload limit.
    Bl,
    /// Charger Threshold: lower limit, upper ceiling, and an attendance forecast in between.
    Ct,
}

impl Policy {
    pub const ALL: [Policy; 2] = [Policy::Bl, Policy::Ct];

    pub fn as_str(self) -> &'static str {
        match self {
            Policy::Bl => "BL",
            Policy::Ct => "CT",
        }
    }
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown policy {0:?} (expected BL or CT)")]
pub struct UnknownPolicy(pub String);

impl FromStr for Policy {
    type Err = UnknownPolicy;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().as_str() {
            "BL" => Ok(Policy::Bl),
            "CT" => Ok(Policy::Ct),
            _ => Err(UnknownPolicy(s.to_string())),
        }
    }
}

/// Parameter set of one experimental cell.
///
/// All SOC-valued fields are in percentage points of state of charge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScenarioParams<S> {
    /// Drones alive at tick 0.
    pub qty: usize,
    /// Mean consumption per tick.
    pub bc_mean: S,
    /// Standard deviation of consumption per tick.
    pub bc_sd: S,
    /// Charging positions as a percentage of the drones currently alive.
    pub b_pct: S,
    /// SOC gained on an effective recharge.
    pub bg: S,
    /// Lower reload limit.
    pub lw: S,
    /// Upper threshold above which a CT drone never tries to recharge.
    pub up: S,
    /// Predictor input window, in ticks.
    pub memory_m: usize,
    /// Predictors per CT drone.
    pub predictors_k: usize,
    pub max_ticks: u32,
    pub policy: Policy,
}

impl<S: Scalar> ScenarioParams<S> {
    /// Fixed values of the reference experiment, with the given variable factors.
    pub fn reference(policy: Policy, bc_mean: S, b_pct: S) -> Self {
        Self {
            qty: 100,
            bc_mean,
            bc_sd: S::lit(0.1),
            b_pct,
            bg: S::lit(100.0),
            lw: S::lit(25.0),
            up: S::lit(80.0),
            memory_m: 10,
            predictors_k: 5,
            max_ticks: 1500,
            policy,
        }
    }

    pub fn validate(self) -> Result<Self, ParamError> {
        validate_params(self)
    }
}

impl<S: Scalar> Default for ScenarioParams<S> {
    fn default() -> Self {
        Self::reference(Policy::Ct, S::lit(5.0), S::lit(30.0))
    }
}

/// First violated parameter invariant.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParamError {
    #[error("qty ≥ 1 violated")]
    EmptySwarm,
    #[error("max_ticks ≥ 1 violated")]
    NoTicks,
    #[error("memory_m ≥ 1 violated")]
    NoMemory,
    #[error("predictors_k ≥ 1 violated")]
    NoPredictors,
    #[error("0 ≤ lw violated (lw = {0})")]
    NegativeLower(String),
    #[error("lw < up violated (lw = {lw}, up = {up})")]
    ThresholdOrder { lw: String, up: String },
    #[error("up ≤ 100 violated (up = {0})")]
    UpperAboveFull(String),
    #[error("0 ≤ b_pct ≤ 100 violated (b_pct = {0})")]
    CapacityRange(String),
    #[error("bc_mean ≥ 0 violated (bc_mean = {0})")]
    NegativeConsumption(String),
    #[error("bc_sd ≥ 0 violated (bc_sd = {0})")]
    NegativeSpread(String),
    #[error("0 < bg ≤ 100 violated (bg = {0})")]
    GainRange(String),
}

/// Returns `params` unchanged iff every parameter invariant holds.
///
/// Comparisons are written so that NaN fails every check.
pub fn validate_params<S: Scalar>(params: ScenarioParams<S>) -> Result<ScenarioParams<S>, ParamError> {
    let zero = S::zero();
    let hundred = S::lit(100.0);
    let p = &params;
    if p.qty < 1 {
        return Err(ParamError::EmptySwarm);
    }
    if p.max_ticks < 1 {
        return Err(ParamError::NoTicks);
    }
    if p.memory_m < 1 {
        return Err(ParamError::NoMemory);
    }
    if p.predictors_k < 1 {
        return Err(ParamError::NoPredictors);
    }
    if !(p.lw >= zero) {
        return Err(ParamError::NegativeLower(p.lw.to_string()));
    }
    if !(p.lw < p.up) {
        return Err(ParamError::ThresholdOrder { lw: p.lw.to_string(), up: p.up.to_string() });
    }
    if !(p.up <= hundred) {
        return Err(ParamError::UpperAboveFull(p.up.to_string()));
    }
    if !(p.b_pct >= zero && p.b_pct <= hundred) {
        return Err(ParamError::CapacityRange(p.b_pct.to_string()));
    }
    if !(p.bc_mean >= zero) || p.bc_mean.is_infinite() {
        return Err(ParamError::NegativeConsumption(p.bc_mean.to_string()));
    }
    if !(p.bc_sd >= zero) || p.bc_sd.is_infinite() {
        return Err(ParamError::NegativeSpread(p.bc_sd.to_string()));
    }
    if !(p.bg > zero && p.bg <= hundred) {
        return Err(ParamError::GainRange(p.bg.to_string()));
    }
    Ok(params)
}

/// One tick's choice for an alive drone.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Decision {
    Work,
    AttemptRecharge,
}

/// One agent.
#[derive(Debug, Clone)]
pub struct DroneState<S> {
    pub id: usize,
    pub soc: S,
    pub alive: bool,
    /// Present only for drones running a forecasting policy.
    pub forecaster: Option<Forecaster<S>>,
    pub work_decisions: u64,
    pub recharge_decisions: u64,
}

impl<S: Scalar> DroneState<S> {
    pub fn new(id: usize, soc: S) -> Self {
        Self {
            id,
            soc,
            alive: true,
            forecaster: None,
            work_decisions: 0,
            recharge_decisions: 0,
        }
    }

    pub fn record(&mut self, decision: Decision) {
        match decision {
            Decision::Work => self.work_decisions += 1,
            Decision::AttemptRecharge => self.recharge_decisions += 1,
        }
    }

    pub fn decisions(&self) -> u64 {
        self.work_decisions + self.recharge_decisions
    }
}

/// Recent recharge-attempt counts broadcast to every drone.
///
/// Holds exactly `2 * memory_m` entries. Stored newest-first so that the
/// forecast window for the next tick is a contiguous prefix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttendanceHistory {
    newest_first: Vec<u32>,
    memory_m: usize,
}

impl AttendanceHistory {
    /// Builds a history from entries listed oldest-first.
    ///
    /// Panics unless exactly `2 * memory_m` entries are given.
    pub fn from_oldest_first(memory_m: usize, entries: &[u32]) -> Self {
        assert!(memory_m >= 1, "memory_m must be at least 1");
        assert_eq!(
            entries.len(),
            2 * memory_m,
            "attendance history needs exactly 2*memory_m entries"
        );
        Self {
            newest_first: entries.iter().rev().copied().collect(),
            memory_m,
        }
    }

    pub fn filled(memory_m: usize, value: u32) -> Self {
        Self::from_oldest_first(memory_m, &vec![value; 2 * memory_m])
    }

    pub fn memory_m(&self) -> usize {
        self.memory_m
    }

    pub fn len(&self) -> usize {
        self.newest_first.len()
    }

    pub fn is_empty(&self) -> bool {
        self.newest_first.is_empty()
    }

    /// Appends the newest count and evicts the oldest.
    pub fn push(&mut self, count: u32) {
        self.newest_first.pop();
        self.newest_first.insert(0, count);
    }

    pub fn newest(&self) -> u32 {
        self.newest_first[0]
    }

    /// All entries, newest first.
    pub fn newest_first(&self) -> &[u32] {
        &self.newest_first
    }

    pub fn to_oldest_first(&self) -> Vec<u32> {
        self.newest_first.iter().rev().copied().collect()
    }

    /// The `memory_m` newest values, newest first: the input of the next forecast.
    pub fn forecast_window(&self) -> &[u32] {
        &self.newest_first[..self.memory_m]
    }

    /// Scoring point `age` (0 = newest, up to `memory_m - 1`): the observed value
    /// and the `memory_m` values that preceded it, newest first.
    pub fn scoring_point(&self, age: usize) -> (u32, &[u32]) {
        assert!(age < self.memory_m, "scoring point out of range");
        (
            self.newest_first[age],
            &self.newest_first[age + 1..age + 1 + self.memory_m],
        )
    }
}

/// Outcome of one replication.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunResult<S> {
    pub scenario_id: usize,
    pub rep: usize,
    pub seed: u64,
    pub ticks_elapsed: u32,
    /// Reached the tick horizon with at least one drone alive.
    pub finished: bool,
    pub remaining_drones: usize,
    /// Work share of the decisions made by the drones alive at termination.
    pub utility: S,
}

/// Cross-replication aggregate of one cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScenarioSummary<S> {
    pub scenario_id: usize,
    pub n_reps: usize,
    pub avg_remaining: S,
    pub sd_remaining: S,
    /// Percent of replications that finished.
    pub pct_finished: S,
    pub sd_pct_finished: S,
    pub avg_utility: S,
    pub sd_utility: S,
}
