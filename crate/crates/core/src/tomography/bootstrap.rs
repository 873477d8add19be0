//! Poissonian bootstrap over count records.
//!
//! Each resample replaces every count `n` by a draw from `Poisson(n)` and
//! re-runs the estimator. Resample `k` uses seed `seed + k`, so results do not
//! depend on how resamples are scheduled across threads.

use std::collections::HashMap;

use log::warn;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::counts::poisson_draw;
use super::CountRecord;
use crate::error::{Error, Result};
use crate::quantum::{c, CMatrix};

/// Values a bootstrap can average: anything viewable as a flat list of reals.
pub trait Statistic: Sized {
    fn components(&self) -> Vec<f64>;
    /// Rebuilds a value shaped like `template` from `components`.
    fn from_components(template: &Self, components: &[f64]) -> Self;
}

impl Statistic for f64 {
    fn components(&self) -> Vec<f64> {
        vec![*self]
    }

    fn from_components(_: &Self, components: &[f64]) -> Self {
        components[0]
    }
}

impl Statistic for Vec<f64> {
    fn components(&self) -> Vec<f64> {
        self.clone()
    }

    fn from_components(_: &Self, components: &[f64]) -> Self {
        components.to_vec()
    }
}

/// Real and imaginary parts are treated as separate components, so the
/// standard error of a matrix holds `σ(Re) + i σ(Im)` entry-wise.
impl Statistic for CMatrix {
    fn components(&self) -> Vec<f64> {
        self.iter().flat_map(|z| [z.re, z.im]).collect()
    }

    fn from_components(template: &Self, components: &[f64]) -> Self {
        CMatrix::from_iterator(
            template.nrows(),
            template.ncols(),
            components.chunks(2).map(|p| c(p[0], p[1])),
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BootstrapOptions {
    /// Upper bound on the number of resamples (at least 2).
    pub n_resamples: usize,
    pub seed: u64,
    /// Stop early once the spread has settled: the standard deviation moved by
    /// less than 1% over the last 10% of accepted resamples.
    pub stop_on_convergence: bool,
    /// No early stop before this many accepted resamples.
    pub min_resamples: usize,
}

impl BootstrapOptions {
    pub fn new(n_resamples: usize, seed: u64) -> Self {
        Self { n_resamples, seed, stop_on_convergence: true, min_resamples: 20 }
    }

    /// Runs exactly `n_resamples` resamples.
    pub fn fixed(n_resamples: usize, seed: u64) -> Self {
        Self { stop_on_convergence: false, ..Self::new(n_resamples, seed) }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BootstrapEstimate<T> {
    /// Mean of the resampled estimates.
    pub mean: T,
    /// Sample standard deviation of the resampled estimates: the bootstrap
    /// standard error of the estimator.
    pub standard_error: T,
    /// `standard_error / √resamples`: how well the bootstrap mean itself is
    /// pinned down. Shrinks with more resamples, unlike `standard_error`.
    pub standard_error_of_mean: T,
    /// Accepted resamples.
    pub resamples: usize,
    /// Resamples the estimator rejected.
    pub failures: usize,
    pub converged: bool,
}

/// One Poisson resample of `records`. Shots are raised to cover the new
/// per-setting totals.
pub fn resample_records(records: &[CountRecord], seed: u64) -> Vec<CountRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out: Vec<CountRecord> = records
        .iter()
        .map(|r| CountRecord { counts: poisson_draw(r.counts as f64, &mut rng), ..r.clone() })
        .collect();
    let mut totals: HashMap<&str, u64> = HashMap::new();
    for r in &out {
        *totals.entry(r.setting_id.as_str()).or_default() += r.counts;
    }
    let totals: HashMap<String, u64> = totals.into_iter().map(|(k, v)| (k.to_string(), v)).collect();
    for r in &mut out {
        r.shots = r.shots.max(totals[&r.setting_id]);
    }
    out
}

#[derive(Default)]
struct Running {
    n: usize,
    mean: Vec<f64>,
    m2: Vec<f64>,
}

impl Running {
    fn push(&mut self, x: &[f64]) {
        if self.mean.is_empty() {
            self.mean = vec![0.0; x.len()];
            self.m2 = vec![0.0; x.len()];
        }
        self.n += 1;
        for (i, &v) in x.iter().enumerate() {
            let delta = v - self.mean[i];
            self.mean[i] += delta / self.n as f64;
            self.m2[i] += delta * (v - self.mean[i]);
        }
    }

    fn std_dev(&self) -> Vec<f64> {
        let denom = (self.n.max(2) - 1) as f64;
        self.m2.iter().map(|m| (m / denom).sqrt()).collect()
    }

    /// Scalar summary of the spread used for the convergence rule.
    fn spread(&self) -> f64 {
        self.std_dev().iter().map(|s| s * s).sum::<f64>().sqrt()
    }
}

/// Bootstrap mean and standard error of `estimator` over Poisson resamples of
/// `records`.
///
/// Estimator failures are skipped and logged; if more than half of the
/// attempted resamples fail the whole bootstrap fails.
pub fn bootstrap_estimate<T, F>(
    records: &[CountRecord],
    estimator: F,
    opts: &BootstrapOptions,
) -> Result<BootstrapEstimate<T>>
where
    T: Statistic + Send,
    F: Fn(&[CountRecord]) -> Result<T> + Sync,
{
    if opts.n_resamples < 2 {
        return Err(Error::input("bootstrap needs at least two resamples"));
    }
    let batch = rayon::current_num_threads().max(1) * 4;
    let mut running = Running::default();
    let mut spreads: Vec<f64> = Vec::new();
    let mut template: Option<T> = None;
    let mut attempted = 0;
    let mut failures = 0;
    let mut converged = false;

    'outer: while attempted < opts.n_resamples {
        let end = (attempted + batch).min(opts.n_resamples);
        let results: Vec<Result<T>> = (attempted..end)
            .into_par_iter()
            .map(|k| estimator(&resample_records(records, opts.seed.wrapping_add(k as u64))))
            .collect();
        for (k, result) in (attempted..end).zip(results) {
            attempted = k + 1;
            match result {
                Ok(value) => {
                    running.push(&value.components());
                    spreads.push(running.spread());
                    if template.is_none() {
                        template = Some(value);
                    }
                    let n = running.n;
                    if opts.stop_on_convergence && n >= opts.min_resamples.max(2) {
                        let lag = (n as f64 * 0.1).ceil() as usize;
                        let now = spreads[n - 1];
                        let before = spreads[n - 1 - lag];
                        if (now - before).abs() <= 0.01 * now || (now == 0.0 && before == 0.0) {
                            converged = true;
                            break 'outer;
                        }
                    }
                }
                Err(e) => {
                    failures += 1;
                    warn!("bootstrap resample {k} skipped: {e}");
                }
            }
        }
    }

    if failures * 2 > attempted || running.n < 2 {
        return Err(Error::BootstrapFailure { failed: failures, attempted });
    }
    let template = template.expect("at least two accepted resamples");
    let root_n = (running.n as f64).sqrt();
    let sem: Vec<f64> = running.std_dev().iter().map(|s| s / root_n).collect();
    Ok(BootstrapEstimate {
        mean: T::from_components(&template, &running.mean),
        standard_error: T::from_components(&template, &running.std_dev()),
        standard_error_of_mean: T::from_components(&template, &sem),
        resamples: running.n,
        failures,
        converged,
    })
}
