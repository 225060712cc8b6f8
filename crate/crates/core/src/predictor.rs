//! Linear autoregressive attendance predictors, El Farol style.
//!
//! Each forecasting drone owns `k` predictors with fixed random weights. A
//! predictor maps the `m` most recent attendance counts to a forecast
//! `w0 * qty + sum(w_i * a_i)`, clamped to `[0, qty]`. Before deciding, a drone
//! picks the predictor with the lowest absolute error over the `m` most recent
//! observations.

use rand::Rng;

use crate::model::AttendanceHistory;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct Predictor<S> {
    /// `weights[0]` is the bias (scaled by qty); `weights[i]` multiplies the i-th newest count.
    weights: Vec<S>,
}

impl<S: Scalar> Predictor<S> {
    /// Panics on an empty weight vector; at least the bias is required.
    pub fn new(weights: Vec<S>) -> Self {
        assert!(!weights.is_empty(), "predictor needs a bias weight");
        Self { weights }
    }

    pub fn weights(&self) -> &[S] {
        &self.weights
    }

    /// Window length this predictor consumes.
    pub fn memory(&self) -> usize {
        self.weights.len() - 1
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PredictorEnsemble<S> {
    predictors: Vec<Predictor<S>>,
}

impl<S: Scalar> PredictorEnsemble<S> {
    /// Panics if the predictors are empty or disagree on window length.
    pub fn new(predictors: Vec<Predictor<S>>) -> Self {
        assert!(!predictors.is_empty(), "ensemble needs at least one predictor");
        let m = predictors[0].memory();
        assert!(
            predictors.iter().all(|p| p.memory() == m),
            "predictors must share one window length"
        );
        Self { predictors }
    }

    pub fn len(&self) -> usize {
        self.predictors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.predictors.is_empty()
    }

    pub fn memory(&self) -> usize {
        self.predictors[0].memory()
    }

    pub fn predictors(&self) -> &[Predictor<S>] {
        &self.predictors
    }

    pub fn get(&self, index: usize) -> &Predictor<S> {
        &self.predictors[index]
    }
}

/// Draws `k` predictors with `m + 1` weights each, uniform on `[-1, 1]`.
///
/// Weights are drawn predictor by predictor, bias first.
pub fn init_ensemble<S: Scalar, R: Rng + ?Sized>(rng: &mut R, k: usize, m: usize) -> PredictorEnsemble<S> {
    assert!(k >= 1 && m >= 1, "ensemble shape must be at least 1x1");
    let lo = -S::one();
    let hi = S::one();
    let predictors = (0..k)
        .map(|_| Predictor::new((0..=m).map(|_| rng.random_range(lo..=hi)).collect()))
        .collect();
    PredictorEnsemble::new(predictors)
}

/// Forecast of the next attendance from `window` (newest first), clamped to `[0, qty]`.
///
/// Panics if `window.len()` differs from the predictor's memory.
pub fn predict<S: Scalar>(p: &Predictor<S>, window: &[u32], qty: usize) -> S {
    assert_eq!(
        window.len(),
        p.memory(),
        "forecast window length must equal the predictor memory"
    );
    let qty = S::from_count(qty);
    let (bias, lags) = p.weights.split_first().expect("bias weight");
    let raw = lags
        .iter()
        .zip(window)
        .fold(*bias * qty, |acc, (&w, &a)| acc + w * S::from(a).expect("count as scalar"));
    clamp(raw, S::zero(), qty)
}

// NaN maps to 0.
fn clamp<S: Scalar>(x: S, lo: S, hi: S) -> S {
    if x > hi {
        hi
    } else if x > lo {
        x
    } else {
        lo
    }
}

/// Absolute forecast error of `p` at scoring point `age` of `h`.
fn point_error<S: Scalar>(p: &Predictor<S>, h: &AttendanceHistory, age: usize, qty: usize) -> S {
    let (actual, window) = h.scoring_point(age);
    (predict(p, window, qty) - S::from(actual).expect("count as scalar")).abs()
}

/// Sum of absolute errors over the `m` newest history points, summed oldest first.
pub fn score<S: Scalar>(p: &Predictor<S>, h: &AttendanceHistory, qty: usize) -> S {
    (0..h.memory_m())
        .rev()
        .fold(S::zero(), |acc, age| acc + point_error(p, h, age, qty))
}

fn argmin_lowest<S: Scalar>(scores: impl IntoIterator<Item = S>) -> usize {
    let mut best = 0;
    let mut best_score = S::infinity();
    for (i, s) in scores.into_iter().enumerate() {
        if s < best_score {
            best = i;
            best_score = s;
        }
    }
    best
}

/// Index of the lowest-scoring predictor; ties go to the lowest index.
pub fn best_predictor<S: Scalar>(e: &PredictorEnsemble<S>, h: &AttendanceHistory, qty: usize) -> usize {
    assert_eq!(e.memory(), h.memory_m(), "ensemble and history disagree on memory");
    argmin_lowest(e.predictors.iter().map(|p| score(p, h, qty)))
}

/// An ensemble plus its per-point error cache.
///
/// Past forecast errors never change once observed, so only the newest point
/// needs scoring after each broadcast. Scores are summed in the same order as
/// [`score`], making [`Forecaster::best`] bit-identical to [`best_predictor`].
#[derive(Debug, Clone, PartialEq)]
pub struct Forecaster<S> {
    ensemble: PredictorEnsemble<S>,
    qty: usize,
    /// Row-major `k x m` ring of errors; column `head` holds the newest point.
    errors: Vec<S>,
    head: usize,
}

impl<S: Scalar> Forecaster<S> {
    pub fn new(ensemble: PredictorEnsemble<S>, h: &AttendanceHistory, qty: usize) -> Self {
        let m = ensemble.memory();
        assert_eq!(m, h.memory_m(), "ensemble and history disagree on memory");
        let mut errors = Vec::with_capacity(ensemble.len() * m);
        for p in &ensemble.predictors {
            // column c holds age (head - c) mod m with head = 0
            for col in 0..m {
                let age = (m - col) % m;
                errors.push(point_error(p, h, age, qty));
            }
        }
        Self {
            ensemble,
            qty,
            errors,
            head: 0,
        }
    }

    pub fn ensemble(&self) -> &PredictorEnsemble<S> {
        &self.ensemble
    }

    /// Scores the newest entry of `h`; call once after every push.
    pub fn observe(&mut self, h: &AttendanceHistory) {
        let m = self.ensemble.memory();
        self.head = (self.head + 1) % m;
        for (i, p) in self.ensemble.predictors.iter().enumerate() {
            self.errors[i * m + self.head] = point_error(p, h, 0, self.qty);
        }
    }

    pub fn scores(&self) -> Vec<S> {
        let m = self.ensemble.memory();
        (0..self.ensemble.len())
            .map(|i| {
                let row = &self.errors[i * m..(i + 1) * m];
                (0..m)
                    .rev()
                    .fold(S::zero(), |acc, age| acc + row[(self.head + m - age) % m])
            })
            .collect()
    }

    pub fn best(&self) -> usize {
        argmin_lowest(self.scores())
    }

    /// Next-tick forecast from the currently best predictor.
    pub fn forecast(&self, h: &AttendanceHistory) -> S {
        predict(self.ensemble.get(self.best()), h.forecast_window(), self.qty)
    }
}
