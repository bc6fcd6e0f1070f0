//! Seeded Monte Carlo estimates with Wilson score intervals.
//!
//! Trials are cut into fixed blocks of [`TRIAL_BLOCK`]; block `b` draws from
//! ChaCha8 seeded with `seed` on stream `b`. Blocks are independent of the
//! worker count, so every estimate is reproducible bit for bit.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::events::{EventKind, EventSpec};
use crate::signspace::random_sign_matrix;

/// Trials per generator stream.
pub const TRIAL_BLOCK: u64 = 4096;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Estimate {
    pub event: EventSpec,
    pub trials: u64,
    pub hits: u64,
    pub p_hat: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub confidence: f64,
    pub seed: u64,
    pub workers: usize,
    /// No hits: the point estimate 0 only says the probability is small.
    pub below_resolution: bool,
    /// Exact one-sided upper bound `1 - (1 - confidence)^{1/trials}`, given
    /// when there are no hits.
    pub one_sided_upper: Option<f64>,
}

pub const CSV_HEADER: &str = "event,p,n,m,trials,hits,p_hat,ci_low,ci_high,confidence,seed,workers";

impl Estimate {
    pub fn csv_row(&self) -> String {
        let m = self.event.kind.m().map(|m| m.to_string()).unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            self.event.kind.name(),
            self.event.p,
            self.event.n,
            m,
            self.trials,
            self.hits,
            self.p_hat,
            self.ci_low,
            self.ci_high,
            self.confidence,
            self.seed,
            self.workers
        )
    }
}

fn check_confidence(confidence: f64) -> Result<()> {
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(Error::InvalidArgument(format!("confidence {confidence} outside (0, 1)")));
    }
    Ok(())
}

/// Wilson score interval for `hits` out of `trials`. The lower end is
/// exactly 0 with no hits and the upper end exactly 1 with all hits.
pub fn wilson_interval(hits: u64, trials: u64, confidence: f64) -> Result<(f64, f64)> {
    check_confidence(confidence)?;
    if trials == 0 || hits > trials {
        return Err(Error::InvalidArgument(format!("{hits} hits out of {trials} trials")));
    }
    let z = Normal::standard().inverse_cdf(1.0 - (1.0 - confidence) / 2.0);
    let n = trials as f64;
    let p = hits as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    let low = if hits == 0 { 0.0 } else { (center - half).clamp(0.0, p) };
    let high = if hits == trials { 1.0 } else { (center + half).clamp(p, 1.0) };
    Ok((low, high))
}

fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    if workers == 0 {
        return Err(Error::InvalidArgument("workers must be at least 1".into()));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))
}

fn count_block(spec: &EventSpec, seed: u64, block: u64, len: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(block);
    let mut hits = 0;
    for _ in 0..len {
        // 0/1 matrices reuse the fair bits
        let m = random_sign_matrix(spec.p, spec.n, &mut rng).expect("validated shape");
        hits += spec.occurs(&m) as u64;
    }
    hits
}

/// Estimates the probability of `spec` from `trials` random matrices.
pub fn mc_estimate(spec: &EventSpec, trials: u64, seed: u64, confidence: f64, workers: usize) -> Result<Estimate> {
    spec.validate()?;
    check_confidence(confidence)?;
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be at least 1".into()));
    }
    let blocks = trials.div_ceil(TRIAL_BLOCK);
    let hits: u64 = pool(workers)?.install(|| {
        (0..blocks)
            .into_par_iter()
            .map(|b| {
                let len = TRIAL_BLOCK.min(trials - b * TRIAL_BLOCK);
                count_block(spec, seed, b, len)
            })
            .sum()
    });
    let (ci_low, ci_high) = wilson_interval(hits, trials, confidence)?;
    let one_sided_upper = (hits == 0).then(|| 1.0 - (1.0 - confidence).powf(1.0 / trials as f64));
    Ok(Estimate {
        event: *spec,
        trials,
        hits,
        p_hat: hits as f64 / trials as f64,
        ci_low,
        ci_high,
        confidence,
        seed,
        workers,
        below_resolution: hits == 0,
        one_sided_upper,
    })
}

/// One row of the singularity sweep.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub n: usize,
    pub estimate: Estimate,
    /// Leading term `(n-1)^2 2^{1-n}`.
    pub asymptote: f64,
    /// `p_hat / asymptote`.
    pub ratio: f64,
}

/// Leading term `(n-1)^2 2^{1-n}` of the ±1 singularity probability.
pub fn singularity_asymptote(n: usize) -> f64 {
    let k = (n as f64 - 1.0).powi(2);
    k * 2f64.powi(1 - n as i32)
}

/// Singularity estimates for `n = 2..=n_max`, paired with the leading term.
/// Report only; no comparison is asserted.
pub fn singularity_sweep(
    n_max: usize,
    trials: u64,
    seed: u64,
    confidence: f64,
    workers: usize,
) -> Result<Vec<SweepRow>> {
    if !(2..=64).contains(&n_max) {
        return Err(Error::OutOfRange {
            what: "n_max",
            value: n_max,
            allowed: "2..=64",
        });
    }
    (2..=n_max)
        .map(|n| {
            let spec = EventSpec::square(EventKind::SingularPm1, n)?;
            let estimate = mc_estimate(&spec, trials, seed, confidence, workers)?;
            let asymptote = singularity_asymptote(n);
            Ok(SweepRow {
                n,
                ratio: estimate.p_hat / asymptote,
                estimate,
                asymptote,
            })
        })
        .collect()
}

/// Consecutive pairs `(i, i+1)` whose intervals show a strict decrease:
/// the later interval lies entirely below the earlier one.
pub fn monotone_violations(estimates: &[Estimate]) -> Vec<(usize, usize)> {
    estimates
        .windows(2)
        .enumerate()
        .filter(|(_, w)| w[1].ci_high < w[0].ci_low)
        .map(|(i, _)| (i, i + 1))
        .collect()
}
