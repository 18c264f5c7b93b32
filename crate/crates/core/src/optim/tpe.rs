//! Tree-structured Parzen estimator over the box `[−1, 1]^p`.
//!
//! After the startup trials the history of `N` trials is split into the
//! `⌈γ√N⌉` best points (the good set) and the rest. Each coordinate of each
//! set gets a Gaussian kernel density with one component per observation
//! (Silverman bandwidth with a floor) plus one uniform component over
//! `[−1, 1]`. Candidates are drawn from the good density and the one
//! maximizing `l(x) / g(x)` is evaluated next.

use alloc::vec::Vec;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{uniform_box, IndexVector, SearchConfig, SearchResult, Tracker};
use crate::error::Result;
use crate::rng::{self, Stream};

pub fn tpe_minimize<F>(objective: F, config: &SearchConfig) -> Result<SearchResult>
where
    F: FnMut(&IndexVector) -> f64,
{
    config.validate()?;
    let p = config.dimension;
    let params = config.tpe;
    let mut rng = rng::stream(config.seed, Stream::Search);
    let mut tracker = Tracker::new(objective, config.budget);
    let mut points: Vec<Vec<f64>> = Vec::with_capacity(config.budget);
    let mut values: Vec<f64> = Vec::with_capacity(config.budget);

    while !tracker.exhausted() {
        let raw = if points.len() < params.startup_trials {
            uniform_box(&mut rng, p)
        } else {
            propose(&mut rng, &points, &values, config)
        };
        let (proj, value) = tracker.evaluate(&raw);
        points.push(proj.map_or(raw, IndexVector::into_vec));
        values.push(value);
    }
    tracker.finish()
}

fn propose<R: Rng>(rng: &mut R, points: &[Vec<f64>], values: &[f64], config: &SearchConfig) -> Vec<f64> {
    let p = config.dimension;
    let params = config.tpe;
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    let n_good = (libm::ceil(params.gamma * libm::sqrt(values.len() as f64)) as usize).clamp(1, values.len());
    let (good_idx, bad_idx) = order.split_at(n_good);

    let good: Vec<Parzen> = (0..p)
        .map(|c| Parzen::fit(good_idx.iter().map(|&i| points[i][c]), params.min_bandwidth))
        .collect();
    let bad: Vec<Option<Parzen>> = (0..p)
        .map(|c| {
            if bad_idx.is_empty() {
                None
            } else {
                Some(Parzen::fit(bad_idx.iter().map(|&i| points[i][c]), params.min_bandwidth))
            }
        })
        .collect();

    let mut best: Option<(f64, Vec<f64>)> = None;
    for _ in 0..params.candidates {
        let cand: Vec<f64> = good.iter().map(|d| d.sample(rng)).collect();
        let score: f64 = cand
            .iter()
            .enumerate()
            .map(|(c, &x)| {
                // a missing bad set means a uniform density 1/2 on [−1, 1]
                let lg = bad[c].as_ref().map_or(-core::f64::consts::LN_2, |d| d.log_density(x));
                good[c].log_density(x) - lg
            })
            .sum();
        if best.as_ref().is_none_or(|(s, _)| score > *s) {
            best = Some((score, cand));
        }
    }
    best.map(|(_, c)| c).unwrap_or_else(|| uniform_box(rng, p))
}

/// Univariate mixture of one Gaussian per observation and a uniform prior,
/// all equally weighted.
struct Parzen {
    centers: Vec<f64>,
    bandwidth: f64,
}

impl Parzen {
    fn fit(values: impl Iterator<Item = f64>, floor: f64) -> Self {
        let centers: Vec<f64> = values.collect();
        let m = centers.len() as f64;
        let sd = crate::stats::sample_sd(&centers);
        let silverman = 1.06 * sd * libm::pow(m, -0.2);
        Parzen {
            centers,
            bandwidth: silverman.max(floor),
        }
    }

    fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        let k = rng.random_range(0..=self.centers.len());
        if k == self.centers.len() {
            return rng.random_range(-1.0..=1.0);
        }
        let c = self.centers[k];
        let z: f64 = StandardNormal.sample(rng);
        (c + self.bandwidth * z).clamp(-1.0, 1.0)
    }

    fn log_density(&self, x: f64) -> f64 {
        let h = self.bandwidth;
        let logs = self.centers.iter().map(|&c| {
            let t = (x - c) / h;
            -0.5 * t * t
        });
        let max = logs.clone().fold(f64::NEG_INFINITY, f64::max);
        let sum: f64 = logs.map(|l| libm::exp(l - max)).sum();
        let kernels = max + libm::log(sum) - libm::log(h) - 0.5 * libm::log(2.0 * core::f64::consts::PI);
        // uniform prior component with density 1/2 on [−1, 1]
        let prior = -core::f64::consts::LN_2;
        let (hi, lo) = if kernels > prior { (kernels, prior) } else { (prior, kernels) };
        hi + libm::log1p(libm::exp(lo - hi)) - libm::log(self.centers.len() as f64 + 1.0)
    }
}
