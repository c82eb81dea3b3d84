//! Seeded Monte Carlo estimation of outage probability and mean EE.
//!
//! Trial `k` draws from ChaCha8 stream `k` keyed by the master seed, so each
//! trial's realization is fixed by `(seed, k)` alone. Outcomes are collected
//! in trial order and reduced serially, so estimates are bit-identical for
//! any thread count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};
use crate::geometry::deploy;
use crate::metrics::{evaluate, TrialOutcome};
use crate::params::SimParams;
use crate::power::assign_powers;

/// Two-sided 95% standard normal quantile.
pub const Z_95: f64 = 1.959_963_984_540_054;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricId {
    Outage,
    Ee,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricEstimate {
    pub metric_id: MetricId,
    pub mean: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    /// Half the interval width. The Wilson interval is not centred on `mean`.
    pub ci_halfwidth: f64,
    pub n_trials: u64,
}

impl MetricEstimate {
    pub fn contains(&self, value: f64) -> bool {
        self.ci_lo <= value && value <= self.ci_hi
    }
}

/// Outage and EE estimates for one parameter point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimates {
    pub outage: MetricEstimate,
    pub ee: MetricEstimate,
    /// Trials dropped because two points coincided (singular distance).
    pub n_failed: u64,
}

/// Random stream for trial `trial` under master seed `seed`.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// One fresh realization: deploy, assign powers, associate, and score.
pub fn run_trial(params: &SimParams, rng: &mut ChaCha8Rng) -> Result<TrialOutcome> {
    let deployment = deploy(params, rng)?;
    let powers = assign_powers(&deployment, params)?;
    evaluate(&deployment, &powers, params)
}

/// Wilson score interval for `successes` out of `n`.
pub fn wilson_interval(successes: u64, n: u64, z: f64) -> (f64, f64) {
    assert!(n > 0, "wilson interval needs at least one trial");
    let n = n as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

pub fn outage_estimate(outages: u64, n: u64) -> MetricEstimate {
    let (ci_lo, ci_hi) = wilson_interval(outages, n, Z_95);
    MetricEstimate {
        metric_id: MetricId::Outage,
        mean: outages as f64 / n as f64,
        ci_lo,
        ci_hi,
        ci_halfwidth: 0.5 * (ci_hi - ci_lo),
        n_trials: n,
    }
}

/// Sample mean with a normal-approximation 95% interval. Sums are
/// compensated (Neumaier) and taken in slice order.
pub fn mean_estimate(values: &[f64]) -> MetricEstimate {
    assert!(!values.is_empty(), "mean of no samples");
    let n = values.len() as f64;
    let mean = neumaier_sum(values.iter().copied()) / n;
    let var = if values.len() > 1 {
        neumaier_sum(values.iter().map(|v| (v - mean) * (v - mean))) / (n - 1.0)
    } else {
        0.0
    };
    let half = Z_95 * (var / n).sqrt();
    MetricEstimate {
        metric_id: MetricId::Ee,
        mean,
        ci_lo: mean - half,
        ci_hi: mean + half,
        ci_halfwidth: half,
        n_trials: values.len() as u64,
    }
}

fn neumaier_sum(values: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Runs `params.n_trials` trials on the current rayon pool and aggregates.
///
/// Trials that hit a singular distance are excluded and counted in
/// `n_failed`. Fails only on invalid parameters or when every trial failed.
pub fn estimate(params: &SimParams) -> Result<Estimates> {
    params.validate()?;
    let outcomes: Vec<Result<TrialOutcome>> = (0..params.n_trials)
        .into_par_iter()
        .map(|k| run_trial(params, &mut trial_rng(params.seed, k)))
        .collect();

    let mut n_failed = 0u64;
    let mut outages = 0u64;
    let mut ee = Vec::with_capacity(outcomes.len());
    for outcome in outcomes {
        match outcome {
            Ok(o) => {
                outages += u64::from(o.outage);
                ee.push(o.ee);
            }
            Err(SimError::SingularDistance) => n_failed += 1,
            Err(e) => return Err(e),
        }
    }
    if ee.is_empty() {
        return Err(SimError::param("n_trials", "every trial failed with a singular distance"));
    }
    Ok(Estimates {
        outage: outage_estimate(outages, ee.len() as u64),
        ee: mean_estimate(&ee),
        n_failed,
    })
}

/// Runs `f` on a dedicated pool with `threads` workers.
pub fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .expect("thread pool")
        .install(f)
}
