//! Per-drone, per-tick Work/AttemptRecharge decisions.
//!
//! A policy sees only the drone's own state and the base-station broadcast;
//! there is no channel to other drones.

use crate::model::{AttendanceHistory, Decision, DroneState, Policy, ScenarioParams};
use crate::predictor::{best_predictor, predict, PredictorEnsemble};
use crate::scalar::Scalar;

/// What the base station broadcasts at the start of a tick.
#[derive(Debug, Clone, Copy)]
pub struct Broadcast<'a> {
    pub history: &'a AttendanceHistory,
    /// Charging positions available this tick.
    pub capacity: usize,
}

/// Which rule produced a decision.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Basis<S> {
    /// SOC strictly below the lower reload limit.
    Reserve,
    /// SOC strictly above the upper threshold.
    Ceiling,
    /// Neither limit triggered and the policy does not forecast.
    Sufficient,
    /// Decided by comparing an attendance forecast against capacity.
    Forecast(S),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Verdict<S> {
    pub decision: Decision,
    pub basis: Basis<S>,
}

impl<S> Verdict<S> {
    fn new(decision: Decision, basis: Basis<S>) -> Self {
        Self { decision, basis }
    }
}

/// A recharge policy. The engine is written against this trait only.
pub trait RechargePolicy<S: Scalar>: Send + Sync {
    fn kind(&self) -> Policy;

    /// Whether drones need a [`crate::predictor::Forecaster`] under this policy.
    fn needs_forecaster(&self) -> bool;

    fn decide(&self, drone: &DroneState<S>, broadcast: &Broadcast<'_>) -> Verdict<S>;
}

/// Recharge iff `soc < lw`.
pub fn bl_decide<S: Scalar>(soc: S, lw: S) -> Decision {
    if soc < lw {
        Decision::AttemptRecharge
    } else {
        Decision::Work
    }
}

fn ct_rule<S: Scalar>(soc: S, lw: S, up: S, capacity: usize, forecast: impl FnOnce() -> S) -> Verdict<S> {
    if soc < lw {
        return Verdict::new(Decision::AttemptRecharge, Basis::Reserve);
    }
    if soc > up {
        return Verdict::new(Decision::Work, Basis::Ceiling);
    }
    let p = forecast();
    let decision = if p < S::from_count(capacity) {
        Decision::AttemptRecharge
    } else {
        Decision::Work
    };
    Verdict::new(decision, Basis::Forecast(p))
}

/// Charger Threshold decision, evaluated in order: below `lw` recharge, above
/// `up` work, otherwise attend iff the best predictor forecasts fewer than
/// `capacity` attendants.
#[allow(clippy::too_many_arguments)]
pub fn ct_decide<S: Scalar>(
    soc: S,
    lw: S,
    up: S,
    e: &PredictorEnsemble<S>,
    h: &AttendanceHistory,
    capacity: usize,
    qty: usize,
) -> Decision {
    ct_rule(soc, lw, up, capacity, || {
        predict(e.get(best_predictor(e, h, qty)), h.forecast_window(), qty)
    })
    .decision
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Baseline<S> {
    pub lw: S,
}

impl<S: Scalar> RechargePolicy<S> for Baseline<S> {
    fn kind(&self) -> Policy {
        Policy::Bl
    }

    fn needs_forecaster(&self) -> bool {
        false
    }

    fn decide(&self, drone: &DroneState<S>, _broadcast: &Broadcast<'_>) -> Verdict<S> {
        match bl_decide(drone.soc, self.lw) {
            Decision::AttemptRecharge => Verdict::new(Decision::AttemptRecharge, Basis::Reserve),
            Decision::Work => Verdict::new(Decision::Work, Basis::Sufficient),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChargerThreshold<S> {
    pub lw: S,
    pub up: S,
}

impl<S: Scalar> RechargePolicy<S> for ChargerThreshold<S> {
    fn kind(&self) -> Policy {
        Policy::Ct
    }

    fn needs_forecaster(&self) -> bool {
        true
    }

    /// Panics if the drone carries no forecaster.
    fn decide(&self, drone: &DroneState<S>, broadcast: &Broadcast<'_>) -> Verdict<S> {
        ct_rule(drone.soc, self.lw, self.up, broadcast.capacity, || {
            drone
                .forecaster
                .as_ref()
                .expect("CT drone without forecaster")
                .forecast(broadcast.history)
        })
    }
}

/// The policy object selected by `params.policy`.
pub fn policy_for<S: Scalar>(params: &ScenarioParams<S>) -> Box<dyn RechargePolicy<S>> {
    match params.policy {
        Policy::Bl => Box::new(Baseline { lw: params.lw }),
        Policy::Ct => Box::new(ChargerThreshold {
            lw: params.lw,
            up: params.up,
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::predictor::Predictor;

    fn constant_ensemble(value: f64, qty: usize, m: usize) -> PredictorEnsemble<f64> {
        let mut w = vec![0.0; m + 1];
        w[0] = value / qty as f64;
        PredictorEnsemble::new(vec![Predictor::new(w)])
    }

    #[test]
    fn baseline_threshold_is_strict() {
        assert_eq!(bl_decide(24.0, 25.0), Decision::AttemptRecharge);
        assert_eq!(bl_decide(25.0, 25.0), Decision::Work);
        assert_eq!(bl_decide(100.0, 25.0), Decision::Work);
    }

    #[test]
    fn ct_reserve_dominates() {
        let e = constant_ensemble(100.0, 100, 2);
        let h = AttendanceHistory::filled(2, 100);
        assert_eq!(ct_decide(20.0, 25.0, 80.0, &e, &h, 0, 100), Decision::AttemptRecharge);
    }

    #[test]
    fn ct_ceiling_dominates() {
        let e = constant_ensemble(0.0, 100, 2);
        let h = AttendanceHistory::filled(2, 0);
        assert_eq!(ct_decide(85.0, 25.0, 80.0, &e, &h, 100, 100), Decision::Work);
    }

    #[test]
    fn ct_boundaries_consult_forecast() {
        let e = constant_ensemble(0.0, 100, 2);
        let h = AttendanceHistory::filled(2, 0);
        // at soc == lw and soc == up the forecast (0 < 5) decides
        assert_eq!(ct_decide(25.0, 25.0, 80.0, &e, &h, 5, 100), Decision::AttemptRecharge);
        assert_eq!(ct_decide(80.0, 25.0, 80.0, &e, &h, 5, 100), Decision::AttemptRecharge);
        assert_eq!(ct_decide(80.0, 25.0, 80.0, &e, &h, 0, 100), Decision::Work);
    }

    #[test]
    fn forecast_comparison_is_strict() {
        let e = constant_ensemble(12.0, 100, 2);
        let h = AttendanceHistory::filled(2, 12);
        assert_eq!(ct_decide(50.0, 25.0, 80.0, &e, &h, 13, 100), Decision::AttemptRecharge);
        assert_eq!(ct_decide(50.0, 25.0, 80.0, &e, &h, 12, 100), Decision::Work);
    }

    #[test]
    fn trait_objects_match_free_functions() {
        let params = ScenarioParams::<f64>::reference(Policy::Bl, 5.0, 30.0);
        let h = AttendanceHistory::filled(10, 3);
        let b = Broadcast { history: &h, capacity: 30 };
        let policy = policy_for(&params);
        assert_eq!(policy.kind(), Policy::Bl);
        assert!(!policy.needs_forecaster());
        for soc in [0.0, 24.9, 25.0, 60.0, 100.0] {
            let d = DroneState::new(0, soc);
            assert_eq!(policy.decide(&d, &b).decision, bl_decide(soc, 25.0));
        }
    }
}
