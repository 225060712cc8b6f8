//! Agent-based simulator of battery-recharge coordination in a drone swarm.
//!
//! Drones share a capacitated charging station. Under the baseline policy a
//! drone recharges when its state of charge drops below a lower limit; under
//! the charger-threshold policy it additionally forecasts station attendance
//! with El Farol style predictors and only goes when it expects room.
//!
//! The numeric core is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix it to `f64`.

pub mod engine;
pub mod experiment;
pub mod model;
pub mod policy;
pub mod predictor;
pub mod scalar;

pub use engine::{admit, capacity, consume, recharge, run, Admission, StepReport};
pub use experiment::{aggregate, derive_seed, run_sweep, Cell, SweepError};
pub use model::{validate_params, AttendanceHistory, Decision, ParamError, Policy};
pub use policy::{bl_decide, ct_decide, Basis, Broadcast, RechargePolicy, Verdict};
pub use predictor::{best_predictor, init_ensemble, predict};
pub use scalar::Scalar;

pub type ScenarioParams = model::ScenarioParams<f64>;
pub type DroneState = model::DroneState<f64>;
pub type RunResult = model::RunResult<f64>;
pub type ScenarioSummary = model::ScenarioSummary<f64>;
pub type Predictor = predictor::Predictor<f64>;
pub type PredictorEnsemble = predictor::PredictorEnsemble<f64>;
pub type Forecaster = predictor::Forecaster<f64>;
pub type Simulation = engine::Simulation<f64>;
pub type SweepPlan = experiment::SweepPlan<f64>;

pub type ScenarioParams32 = model::ScenarioParams<f32>;
pub type Simulation32 = engine::Simulation<f32>;
pub type SweepPlan32 = experiment::SweepPlan<f32>;
