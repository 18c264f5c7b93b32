//! Percentile bootstrap intervals for the fitted `β` and `ξ`.

use alloc::vec::Vec;

use rand::Rng;

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::model::{fit, FitConfig};
use crate::rng::{self, Stream};
use crate::stats;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoefficientInterval {
    /// Full-data estimate.
    pub estimate: f64,
    pub low: f64,
    pub high: f64,
}

impl CoefficientInterval {
    pub fn contains(&self, value: f64) -> bool {
        self.low <= value && value <= self.high
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BootstrapSummary {
    pub beta: Vec<CoefficientInterval>,
    pub xi: Vec<CoefficientInterval>,
    /// Replicates whose refit failed and were skipped.
    pub failures: usize,
    pub replicates: usize,
}

/// `k` row resamples of size `n`, drawn with replacement from the resample
/// stream of `seed`.
pub fn resample_indices(n: usize, k: usize, seed: u64) -> Vec<Vec<usize>> {
    let mut rng = rng::stream(seed, Stream::Resample);
    (0..k)
        .map(|_| (0..n).map(|_| rng.random_range(0..n)).collect())
        .collect()
}

/// Refits on `k` resamples and reports percentile intervals at `level`.
///
/// Resample indices come from `config.seed`; every refit uses `config`
/// unchanged.
pub fn bootstrap_ci(dataset: &Dataset, config: &FitConfig, k: usize, level: f64) -> Result<BootstrapSummary> {
    if k < 2 {
        return Err(Error::invalid("bootstrap needs at least 2 resamples"));
    }
    let sets = resample_indices(dataset.n(), k, config.seed);
    bootstrap_ci_with_indices(dataset, config, &sets, level)
}

/// [`bootstrap_ci`] with explicit resample index sets.
///
/// Aborts with [`Error::TooManyFailures`] when more than half of the refits
/// fail.
pub fn bootstrap_ci_with_indices(
    dataset: &Dataset,
    config: &FitConfig,
    resamples: &[Vec<usize>],
    level: f64,
) -> Result<BootstrapSummary> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::invalid("confidence level must lie in (0, 1)"));
    }
    let k = resamples.len();
    if k < 2 {
        return Err(Error::invalid("bootstrap needs at least 2 resamples"));
    }
    let full = fit(dataset, config).map_err(|e| e.context("full-data fit"))?;
    let p = dataset.p();
    let mut betas: Vec<Vec<f64>> = Vec::with_capacity(k);
    let mut xis: Vec<Vec<f64>> = Vec::with_capacity(k);
    let mut failures = 0;
    for idx in resamples {
        let refit = dataset.select_rows(idx).and_then(|d| fit(&d, config));
        match refit {
            Ok(m) => {
                betas.push(m.beta().to_vec());
                xis.push(m.xi().as_slice().to_vec());
            }
            Err(_) => {
                failures += 1;
                if 2 * failures > k {
                    return Err(Error::TooManyFailures { failed: failures, total: k });
                }
            }
        }
    }
    let alpha = 0.5 * (1.0 - level);
    let interval = |samples: &[Vec<f64>], j: usize, estimate: f64| {
        let mut col: Vec<f64> = samples.iter().map(|s| s[j]).collect();
        col.sort_by(f64::total_cmp);
        CoefficientInterval {
            estimate,
            low: stats::quantile_sorted(&col, alpha),
            high: stats::quantile_sorted(&col, 1.0 - alpha),
        }
    };
    Ok(BootstrapSummary {
        beta: (0..p).map(|j| interval(&betas, j, full.beta()[j])).collect(),
        xi: (0..p).map(|j| interval(&xis, j, full.xi().as_slice()[j])).collect(),
        failures,
        replicates: k,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn resamples_are_reproducible_and_in_range() {
        let a = resample_indices(17, 4, 9);
        assert_eq!(a, resample_indices(17, 4, 9));
        assert_ne!(a, resample_indices(17, 4, 10));
        assert!(a.iter().all(|s| s.len() == 17 && s.iter().all(|&i| i < 17)));
    }
}
