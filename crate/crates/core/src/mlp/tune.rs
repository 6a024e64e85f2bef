//! Hyperparameter search over (learning rate, L2 factor).
//!
//! Sequential model-based search: a Gaussian process with an isotropic
//! squared-exponential kernel over log10 parameters scaled to the unit
//! square, proposals by maximum expected improvement over random
//! candidates. A pure random-search mode is available.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{Continuous, ContinuousCDF, Normal};

use super::train::{train, TrainConfig, TrainData};
use super::MlpModel;
use crate::error::{Error, Result};

/// Log-uniform box over the two tuned parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchSpace {
    pub lr: (f64, f64),
    pub l2: (f64, f64),
}

impl Default for SearchSpace {
    fn default() -> Self {
        Self {
            lr: (1e-5, 1e-1),
            l2: (1e-9, 1e-3),
        }
    }
}

impl SearchSpace {
    fn validate(&self) -> Result<()> {
        for (name, (lo, hi)) in [("learning rate", self.lr), ("l2", self.l2)] {
            if !(lo > 0.0 && hi.is_finite() && hi > lo) {
                return Err(Error::Config(format!(
                    "empty {name} search range [{lo}, {hi}]"
                )));
            }
        }
        Ok(())
    }

    fn to_params(&self, u: [f64; 2]) -> (f64, f64) {
        let map =
            |(lo, hi): (f64, f64), t: f64| 10f64.powf(lo.log10() + t * (hi.log10() - lo.log10()));
        (map(self.lr, u[0]), map(self.l2, u[1]))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TuneMode {
    Bayesian,
    Random,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TuneConfig {
    pub budget: usize,
    pub seed: u64,
    pub mode: TuneMode,
    /// Random samples drawn before the surrogate is used.
    pub initial: usize,
    /// Random candidates scored by expected improvement per proposal.
    pub candidates: usize,
}

impl Default for TuneConfig {
    fn default() -> Self {
        Self {
            budget: 100,
            seed: 7,
            mode: TuneMode::Bayesian,
            initial: 5,
            candidates: 2000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TuneSample {
    pub learning_rate: f64,
    pub l2_reg: f64,
    /// Objective value; `+inf` for a failed evaluation.
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TuneTrace {
    pub samples: Vec<TuneSample>,
    pub best_so_far: Vec<f64>,
}

impl TuneTrace {
    pub fn best(&self) -> Option<&TuneSample> {
        self.samples
            .iter()
            .filter(|s| s.value.is_finite())
            .min_by(|a, b| a.value.total_cmp(&b.value))
    }
}

const LENGTH_SCALES: [f64; 8] = [0.05, 0.08, 0.12, 0.18, 0.27, 0.4, 0.6, 0.9];
const NUGGET: f64 = 1e-6;

struct Gp {
    xs: Vec<[f64; 2]>,
    chol: nalgebra::Cholesky<f64, nalgebra::Dyn>,
    alpha: DVector<f64>,
    ell: f64,
    mean: f64,
    std: f64,
}

fn kernel(a: &[f64; 2], b: &[f64; 2], ell: f64) -> f64 {
    let d2 = (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2);
    (-0.5 * d2 / (ell * ell)).exp()
}

impl Gp {
    /// Fits on standardised targets, choosing the length-scale with the
    /// highest log marginal likelihood.
    fn fit(xs: &[[f64; 2]], ys: &[f64]) -> Option<Self> {
        let n = xs.len();
        let mean = ys.iter().sum::<f64>() / n as f64;
        let var = ys.iter().map(|y| (y - mean).powi(2)).sum::<f64>() / n as f64;
        let std = if var > 0.0 { var.sqrt() } else { 1.0 };
        let y = DVector::from_iterator(n, ys.iter().map(|v| (v - mean) / std));
        let mut best: Option<(f64, Self)> = None;
        for &ell in &LENGTH_SCALES {
            let k = DMatrix::from_fn(n, n, |i, j| {
                kernel(&xs[i], &xs[j], ell) + if i == j { NUGGET } else { 0.0 }
            });
            let Some(chol) = k.cholesky() else { continue };
            let alpha = chol.solve(&y);
            let logdet: f64 = chol.l_dirty().diagonal().iter().map(|d| d.ln()).sum();
            let lml = -0.5 * y.dot(&alpha) - logdet;
            if best.as_ref().is_none_or(|(b, _)| lml > *b) {
                best = Some((
                    lml,
                    Self {
                        xs: xs.to_vec(),
                        chol,
                        alpha,
                        ell,
                        mean,
                        std,
                    },
                ));
            }
        }
        best.map(|(_, gp)| gp)
    }

    /// Posterior mean and standard deviation in the original target units.
    fn predict(&self, x: &[f64; 2]) -> (f64, f64) {
        let ks = DVector::from_iterator(
            self.xs.len(),
            self.xs.iter().map(|xi| kernel(xi, x, self.ell)),
        );
        let mu = ks.dot(&self.alpha);
        let v = self.chol.solve(&ks);
        let var = (1.0 - ks.dot(&v)).max(0.0);
        (self.mean + self.std * mu, self.std * var.sqrt())
    }
}

fn expected_improvement(mu: f64, sigma: f64, best: f64, normal: &Normal) -> f64 {
    if sigma <= 0.0 {
        return (best - mu).max(0.0);
    }
    let z = (best - mu) / sigma;
    (best - mu) * normal.cdf(z) + sigma * normal.pdf(z)
}

/// Minimises `objective(lr, l2)` over the search space.
///
/// Failed evaluations are recorded as `+inf`; the surrogate sees them as
/// the worst finite value observed so far.
pub fn tune_objective<F>(
    space: &SearchSpace,
    config: &TuneConfig,
    mut objective: F,
) -> Result<TuneTrace>
where
    F: FnMut(f64, f64) -> Result<f64>,
{
    space.validate()?;
    if config.budget == 0 {
        return Err(Error::Config("tuning budget must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    let mut xs: Vec<[f64; 2]> = Vec::with_capacity(config.budget);
    let mut trace = TuneTrace::default();
    let mut best = f64::INFINITY;

    for i in 0..config.budget {
        let u = if config.mode == TuneMode::Random || i < config.initial.max(1) {
            [rng.random::<f64>(), rng.random::<f64>()]
        } else {
            propose(&xs, &trace.samples, config.candidates, &mut rng, &normal)
        };
        let (lr, l2) = space.to_params(u);
        let value = match objective(lr, l2) {
            Ok(v) if v.is_finite() => v,
            Ok(v) => {
                log::warn!("tuning sample lr={lr:.3e}, l2={l2:.3e} returned {v}");
                f64::INFINITY
            }
            Err(e) => {
                log::warn!("tuning sample lr={lr:.3e}, l2={l2:.3e} failed: {e}");
                f64::INFINITY
            }
        };
        best = best.min(value);
        xs.push(u);
        trace.samples.push(TuneSample {
            learning_rate: lr,
            l2_reg: l2,
            value,
        });
        trace.best_so_far.push(best);
    }
    Ok(trace)
}

fn propose(
    xs: &[[f64; 2]],
    samples: &[TuneSample],
    candidates: usize,
    rng: &mut ChaCha8Rng,
    normal: &Normal,
) -> [f64; 2] {
    let random = [rng.random::<f64>(), rng.random::<f64>()];
    let worst = samples
        .iter()
        .map(|s| s.value)
        .filter(|v| v.is_finite())
        .fold(f64::NEG_INFINITY, f64::max);
    if !worst.is_finite() {
        return random;
    }
    let ys: Vec<f64> = samples
        .iter()
        .map(|s| if s.value.is_finite() { s.value } else { worst })
        .collect();
    let Some(gp) = Gp::fit(xs, &ys) else {
        log::warn!("surrogate fit failed; falling back to a random proposal");
        return random;
    };
    let best = ys.iter().copied().fold(f64::INFINITY, f64::min);
    let mut choice = random;
    let mut best_ei = f64::NEG_INFINITY;
    for c in 0..candidates.max(1) {
        let u = if c == 0 {
            random
        } else {
            [rng.random::<f64>(), rng.random::<f64>()]
        };
        let (mu, sigma) = gp.predict(&u);
        let ei = expected_improvement(mu, sigma, best, normal);
        if ei > best_ei {
            best_ei = ei;
            choice = u;
        }
    }
    choice
}

/// Tunes learning rate and L2 factor of `base` by training on `data` and
/// scoring the best validation metric. Returns the winning configuration.
pub fn tune(
    template: &MlpModel,
    data: &TrainData,
    base: &TrainConfig,
    space: &SearchSpace,
    config: &TuneConfig,
) -> Result<(TrainConfig, TuneTrace)> {
    let trace = tune_objective(space, config, |lr, l2| {
        let cfg = TrainConfig {
            learning_rate: lr,
            l2_reg: l2,
            ..base.clone()
        };
        let (_, history) = train(template, data, &cfg)?;
        log::info!(
            "lr={lr:.4e} l2={l2:.4e} -> metric {:.4e}",
            history.best_metric
        );
        Ok(history.best_metric)
    })?;
    let best = trace
        .best()
        .ok_or_else(|| Error::NonFinite("every tuning sample failed".into()))?;
    Ok((
        TrainConfig {
            learning_rate: best.learning_rate,
            l2_reg: best.l2_reg,
            ..base.clone()
        },
        trace,
    ))
}
