//! One simulation run: decisions, capacitated admission, battery dynamics,
//! starvation, history broadcast and the stopping rule.
//!
//! Random draws come from a single ChaCha8 stream seeded by the run seed and
//! are consumed in a fixed order:
//!
//! * setup: `2m` history entries, then the predictor weights of each drone in
//!   id order (forecasting policies only); every drone starts at SOC 100;
//! * per tick: the admission subset (only when attendants exceed capacity),
//!   then one consumption draw per non-admitted alive drone in id order.

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::model::{
    validate_params, AttendanceHistory, Decision, DroneState, ParamError, RunResult, ScenarioParams,
};
use crate::policy::{policy_for, Basis, Broadcast, RechargePolicy};
use crate::predictor::{init_ensemble, Forecaster};
use crate::scalar::Scalar;

/// Charging positions for `alive` drones: `floor(b_pct / 100 * alive)`.
pub fn capacity<S: Scalar>(b_pct: S, alive: usize) -> usize {
    // multiply first so integral percentages stay exact
    let slots = (b_pct * S::from_count(alive) / S::lit(100.0)).floor();
    slots.to_usize().unwrap_or(0)
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Admission {
    pub admitted: Vec<usize>,
    pub rejected: Vec<usize>,
}

/// Splits `attendants` into admitted and rejected drones.
///
/// Everyone is admitted when there is room; otherwise a uniformly random subset
/// of size `capacity` is. Both outputs keep the input order. No randomness is
/// consumed in the uncongested case.
pub fn admit<R: Rng + ?Sized>(attendants: &[usize], capacity: usize, rng: &mut R) -> Admission {
    if attendants.len() <= capacity {
        return Admission {
            admitted: attendants.to_vec(),
            rejected: Vec::new(),
        };
    }
    let mut chosen = vec![false; attendants.len()];
    for i in index::sample(rng, attendants.len(), capacity) {
        chosen[i] = true;
    }
    let (admitted, rejected): (Vec<_>, Vec<_>) = attendants
        .iter()
        .zip(chosen)
        .partition(|(_, c)| *c);
    Admission {
        admitted: admitted.into_iter().map(|(id, _)| *id).collect(),
        rejected: rejected.into_iter().map(|(id, _)| *id).collect(),
    }
}

/// SOC after one tick of work: `soc - max(0, N(bc_mean, bc_sd))`. May go negative.
pub fn consume<S: Scalar, R: Rng + ?Sized>(soc: S, bc_mean: S, bc_sd: S, rng: &mut R) -> S {
    let draw = bc_mean + bc_sd * S::standard_normal(rng);
    soc - draw.max(S::zero())
}

/// SOC after an effective recharge, capped at 100.
pub fn recharge<S: Scalar>(soc: S, bg: S) -> S {
    (soc + bg).min(S::lit(100.0))
}

/// Per-tick observation, also the row format of the optional trace file.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepReport<S> {
    /// Tick number after the step (first step reports 1).
    pub tick: u32,
    pub alive: usize,
    pub attendants: usize,
    pub admitted: usize,
    /// Mean SOC of the drones alive after the step; 0 when none are.
    pub mean_soc: S,
}

/// Mutable state of one run.
pub struct Simulation<S: Scalar> {
    params: ScenarioParams<S>,
    policy: Box<dyn RechargePolicy<S>>,
    drones: Vec<DroneState<S>>,
    history: AttendanceHistory,
    tick: u32,
    rng: ChaCha8Rng,
    forecast_consultations: u64,
}

impl<S: Scalar> Simulation<S> {
    /// Validates `params` and performs the seeded setup.
    pub fn new(params: ScenarioParams<S>, seed: u64) -> Result<Self, ParamError> {
        let params = validate_params(params)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let entries: Vec<u32> = (0..2 * params.memory_m)
            .map(|_| rng.random_range(0..=params.qty as u32))
            .collect();
        let history = AttendanceHistory::from_oldest_first(params.memory_m, &entries);
        let socs = vec![S::lit(100.0); params.qty];
        Ok(Self::assemble(params, &socs, history, rng))
    }

    /// Starts from explicit SOCs and history instead of the seeded setup.
    /// Forecasters, if the policy needs them, are still drawn from `seed`.
    ///
    /// Panics if the shapes disagree with `params`.
    pub fn from_state(
        params: ScenarioParams<S>,
        socs: &[S],
        history: AttendanceHistory,
        seed: u64,
    ) -> Result<Self, ParamError> {
        let params = validate_params(params)?;
        assert_eq!(socs.len(), params.qty, "one SOC per drone");
        assert_eq!(history.memory_m(), params.memory_m, "history memory mismatch");
        Ok(Self::assemble(params, socs, history, ChaCha8Rng::seed_from_u64(seed)))
    }

    fn assemble(params: ScenarioParams<S>, socs: &[S], history: AttendanceHistory, mut rng: ChaCha8Rng) -> Self {
        let policy = policy_for(&params);
        let drones = socs
            .iter()
            .enumerate()
            .map(|(id, &soc)| {
                let mut d = DroneState::new(id, soc);
                if policy.needs_forecaster() {
                    let e = init_ensemble(&mut rng, params.predictors_k, params.memory_m);
                    d.forecaster = Some(Forecaster::new(e, &history, params.qty));
                }
                d
            })
            .collect();
        Self {
            params,
            policy,
            drones,
            history,
            tick: 0,
            rng,
            forecast_consultations: 0,
        }
    }

    pub fn params(&self) -> &ScenarioParams<S> {
        &self.params
    }

    pub fn tick(&self) -> u32 {
        self.tick
    }

    pub fn drones(&self) -> &[DroneState<S>] {
        &self.drones
    }

    pub fn history(&self) -> &AttendanceHistory {
        &self.history
    }

    pub fn alive_count(&self) -> usize {
        self.drones.iter().filter(|d| d.alive).count()
    }

    /// Number of decisions that went through an attendance forecast.
    pub fn forecast_consultations(&self) -> u64 {
        self.forecast_consultations
    }

    /// Horizon reached or swarm extinct.
    pub fn is_done(&self) -> bool {
        self.tick >= self.params.max_ticks || self.drones.iter().all(|d| !d.alive)
    }

    /// Advances one tick.
    ///
    /// Panics if called after [`Simulation::is_done`] turned true.
    pub fn step(&mut self) -> StepReport<S> {
        assert!(!self.is_done(), "step called after the run stopped");
        let p = self.params;
        let cap = capacity(p.b_pct, self.alive_count());

        let broadcast = Broadcast {
            history: &self.history,
            capacity: cap,
        };
        let mut attendants = Vec::new();
        for d in self.drones.iter_mut().filter(|d| d.alive) {
            let verdict = self.policy.decide(d, &broadcast);
            if let Basis::Forecast(_) = verdict.basis {
                self.forecast_consultations += 1;
            }
            d.record(verdict.decision);
            if verdict.decision == Decision::AttemptRecharge {
                attendants.push(d.id);
            }
        }

        let admission = admit(&attendants, cap, &mut self.rng);
        let mut admitted = vec![false; self.drones.len()];
        for &id in &admission.admitted {
            admitted[id] = true;
        }
        for d in self.drones.iter_mut().filter(|d| d.alive) {
            d.soc = if admitted[d.id] {
                recharge(d.soc, p.bg)
            } else {
                consume(d.soc, p.bc_mean, p.bc_sd, &mut self.rng)
            };
            if d.soc < S::zero() {
                d.alive = false;
                d.soc = S::zero();
            }
        }

        self.history.push(attendants.len() as u32);
        for d in self.drones.iter_mut().filter(|d| d.alive) {
            if let Some(f) = d.forecaster.as_mut() {
                f.observe(&self.history);
            }
        }
        self.tick += 1;

        let (alive, soc_sum) = self
            .drones
            .iter()
            .filter(|d| d.alive)
            .fold((0usize, S::zero()), |(n, s), d| (n + 1, s + d.soc));
        StepReport {
            tick: self.tick,
            alive,
            attendants: attendants.len(),
            admitted: admission.admitted.len(),
            mean_soc: if alive == 0 { S::zero() } else { soc_sum / S::from_count(alive) },
        }
    }

    /// Work share of the decisions made by the drones currently alive; 0 if none are
    /// alive or none has decided yet.
    pub fn utility(&self) -> S {
        let (work, total) = self
            .drones
            .iter()
            .filter(|d| d.alive)
            .fold((0u64, 0u64), |(w, t), d| (w + d.work_decisions, t + d.decisions()));
        if total == 0 {
            S::zero()
        } else {
            S::from_u64(work).expect("count as scalar") / S::from_u64(total).expect("count as scalar")
        }
    }

    pub fn result(&self, scenario_id: usize, rep: usize, seed: u64) -> RunResult<S> {
        let remaining = self.alive_count();
        RunResult {
            scenario_id,
            rep,
            seed,
            ticks_elapsed: self.tick,
            finished: self.tick >= self.params.max_ticks && remaining > 0,
            remaining_drones: remaining,
            utility: self.utility(),
        }
    }

    /// Steps until the run stops, passing every report to `sink`.
    pub fn run_to_end(&mut self, mut sink: impl FnMut(&StepReport<S>)) {
        while !self.is_done() {
            let report = self.step();
            sink(&report);
        }
    }
}

/// Executes a full run and reports it with `scenario_id = rep = 0`.
pub fn run<S: Scalar>(params: ScenarioParams<S>, seed: u64) -> Result<RunResult<S>, ParamError> {
    let mut sim = Simulation::new(params, seed)?;
    sim.run_to_end(|_| {});
    Ok(sim.result(0, 0, seed))
}
