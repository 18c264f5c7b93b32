//! Synthetic scenarios with known `β`, `ξ` and link `g`, plus the error
//! metric comparing a fitted link against the truth.
//!
//! | id | features | link `g(u)` | treatment |
//! |----|----------|-------------|-----------|
//! | 1 | 8 Gaussian | `3` | `N(0, 1)` |
//! | 2 | 8 Gaussian | `u` | `N(0, 1)` |
//! | 3 | 4 chained uniforms | `−0.5 log|u|` | `sin(X₂X₃) + U(−0.6, 0.6)` |
//! | 4 | 12 Gaussian + 8 binary chain | `−1.2 cos(πu) e^{−u²}` | `U(−1, 1)` |
//!
//! Gaussian blocks are `μ + Aε` with `μ ~ U(−1, 1)^p`, `A ~ U(0, 1)^{p×p}`, so
//! the covariance is `AAᵀ`. Each scenario draws its parameters once per
//! sample; `soft_probs = σ(Ȳ)` and hard labels are Bernoulli draws from them.

use alloc::vec::Vec;
use core::fmt;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::model::ModelFit;
use crate::optim::{project_to_constraint, IndexVector};
use crate::rng::{self, Stream, StreamRng};
use crate::stats;

/// Half-width of the neighbourhood of 0 excluded from the scenario-3 metric.
pub const SINGULAR_EXCLUSION: f64 = 0.05;

const CHAIN_SLOPE: f64 = 0.5;
const CHAIN_INTERCEPT: f64 = -0.25;
const SCENARIO4_CONTINUOUS: usize = 12;
const SCENARIO4_BINARY: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scenario {
    Constant,
    Linear,
    Unimodal,
    Multimodal,
}

impl Scenario {
    pub fn from_id(id: u32) -> Result<Self> {
        match id {
            1 => Ok(Scenario::Constant),
            2 => Ok(Scenario::Linear),
            3 => Ok(Scenario::Unimodal),
            4 => Ok(Scenario::Multimodal),
            other => Err(Error::InvalidInput(alloc::format!(
                "scenario must be 1, 2, 3 or 4, got {other}"
            ))),
        }
    }

    pub fn id(self) -> u32 {
        match self {
            Scenario::Constant => 1,
            Scenario::Linear => 2,
            Scenario::Unimodal => 3,
            Scenario::Multimodal => 4,
        }
    }

    pub fn dimension(self) -> usize {
        match self {
            Scenario::Constant | Scenario::Linear => 8,
            Scenario::Unimodal => 4,
            Scenario::Multimodal => SCENARIO4_CONTINUOUS + SCENARIO4_BINARY,
        }
    }

    /// Closed-form link. Scenario 3 is singular at `u = 0`.
    pub fn link(self, u: f64) -> Result<f64> {
        match self {
            Scenario::Constant => Ok(3.0),
            Scenario::Linear => Ok(u),
            Scenario::Unimodal => {
                if u == 0.0 {
                    Err(Error::Singularity(0.0))
                } else {
                    Ok(-0.5 * libm::log(u.abs()))
                }
            }
            Scenario::Multimodal => {
                Ok(-1.2 * libm::cos(core::f64::consts::PI * u) * libm::exp(-u * u))
            }
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.id())
    }
}

/// True parameters of a simulated sample.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioTruth {
    pub scenario: Scenario,
    pub beta: Vec<f64>,
    pub xi: IndexVector,
}

impl ScenarioTruth {
    pub fn new(scenario: Scenario, beta: Vec<f64>, xi: IndexVector) -> Result<Self> {
        let p = scenario.dimension();
        if beta.len() != p || xi.len() != p {
            return Err(Error::DimensionMismatch {
                expected: p,
                found: if beta.len() != p { beta.len() } else { xi.len() },
            });
        }
        Ok(ScenarioTruth { scenario, beta, xi })
    }

    pub fn p(&self) -> usize {
        self.beta.len()
    }

    /// True log-odds for one subject.
    pub fn log_odds(&self, x: &[f64], tau: f64) -> Result<f64> {
        let u = stats::dot(x, self.xi.as_slice()) - tau;
        Ok(stats::dot(x, &self.beta) + self.scenario.link(u)?)
    }
}

/// Closed-form link of the scenario.
pub fn true_g(truth: &ScenarioTruth, u: f64) -> Result<f64> {
    truth.scenario.link(u)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulatedSample {
    pub dataset: Dataset,
    pub truth: ScenarioTruth,
    pub seed: u64,
}

/// Seeds of the independent random streams used by the generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScenarioSeeds {
    pub parameters: u64,
    pub covariates: u64,
    pub treatment: u64,
    pub labels: u64,
}

impl ScenarioSeeds {
    /// All streams keyed by the same seed.
    pub fn from_seed(seed: u64) -> Self {
        ScenarioSeeds {
            parameters: seed,
            covariates: seed,
            treatment: seed,
            labels: seed,
        }
    }
}

/// Generates `n` rows of scenario `scenario_id`.
pub fn generate_scenario(scenario_id: u32, n: usize, seed: u64) -> Result<SimulatedSample> {
    let mut s = generate_with_seeds(Scenario::from_id(scenario_id)?, n, ScenarioSeeds::from_seed(seed))?;
    s.seed = seed;
    Ok(s)
}

/// Like [`generate_scenario`] with an individual seed per stream.
pub fn generate_with_seeds(scenario: Scenario, n: usize, seeds: ScenarioSeeds) -> Result<SimulatedSample> {
    if n < 2 {
        return Err(Error::invalid("need at least 2 samples"));
    }
    let p = scenario.dimension();
    let mut params = rng::stream(seeds.parameters, Stream::Parameters);
    let mut cov = rng::stream(seeds.covariates, Stream::Covariates);
    let mut treat = rng::stream(seeds.treatment, Stream::Treatment);
    let mut labels = rng::stream(seeds.labels, Stream::Labels);

    let beta: Vec<f64> = (0..p).map(|_| params.random_range(-1.0..1.0)).collect();
    let xi = first_quadrant_direction(&mut params, p);
    let truth = ScenarioTruth::new(scenario, beta, xi)?;

    let mut rows: Vec<f64> = Vec::with_capacity(n * p);
    let mut tau: Vec<f64> = Vec::with_capacity(n);
    match scenario {
        Scenario::Constant | Scenario::Linear => {
            let gauss = GaussianBlock::draw(&mut params, p);
            for _ in 0..n {
                gauss.sample_into(&mut cov, &mut rows);
                tau.push(StandardNormal.sample(&mut treat));
            }
        }
        Scenario::Unimodal => {
            for _ in 0..n {
                let x4: f64 = cov.random_range(-1.0..1.0);
                let x1 = libm::sqrt(x4.abs()) + cov.random_range(-1.0..1.0);
                let x2 = 0.5 * x1 + cov.random_range(-0.5..0.5);
                let x3 = 0.3 * x1 + 0.3 * x2 + cov.random_range(-0.4..0.4);
                rows.extend_from_slice(&[x1, x2, x3, x4]);
                tau.push(libm::sin(x2 * x3) + treat.random_range(-0.6..0.6));
            }
        }
        Scenario::Multimodal => {
            let gauss = GaussianBlock::draw(&mut params, SCENARIO4_CONTINUOUS);
            let p1: f64 = params.random_range(0.0..1.0);
            for _ in 0..n {
                gauss.sample_into(&mut cov, &mut rows);
                let mut prev = u8::from(cov.random::<f64>() < p1);
                rows.push(f64::from(prev));
                for _ in 1..SCENARIO4_BINARY {
                    let pi = stats::sigmoid(CHAIN_SLOPE * f64::from(prev) + CHAIN_INTERCEPT);
                    prev = u8::from(cov.random::<f64>() < pi);
                    rows.push(f64::from(prev));
                }
                tau.push(treat.random_range(-1.0..1.0));
            }
        }
    }

    let features = Matrix::from_row_major(n, p, rows)?;
    let mut soft = Vec::with_capacity(n);
    let mut hard = Vec::with_capacity(n);
    for (i, &t) in tau.iter().enumerate() {
        let y = truth.log_odds(features.row(i), t)?;
        let prob = stats::sigmoid(y);
        soft.push(prob);
        hard.push(u8::from(labels.random::<f64>() < prob));
    }
    let dataset = Dataset::new(features, tau, Some(soft), Some(hard), Dataset::default_names(p))?;
    Ok(SimulatedSample {
        dataset,
        truth,
        seed: seeds.parameters,
    })
}

/// Uniform direction on the positive orthant of the unit sphere.
fn first_quadrant_direction(rng: &mut StreamRng, p: usize) -> IndexVector {
    loop {
        let v: Vec<f64> = (0..p)
            .map(|_| {
                let z: f64 = StandardNormal.sample(rng);
                z.abs()
            })
            .collect();
        if let Ok(xi) = project_to_constraint(&v) {
            return xi;
        }
    }
}

struct GaussianBlock {
    mean: Vec<f64>,
    // row-major p×p
    mixing: Vec<f64>,
    dim: usize,
}

impl GaussianBlock {
    fn draw(rng: &mut StreamRng, dim: usize) -> Self {
        let mean = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
        let mixing = (0..dim * dim).map(|_| rng.random_range(0.0..1.0)).collect();
        GaussianBlock { mean, mixing, dim }
    }

    fn sample_into(&self, rng: &mut StreamRng, out: &mut Vec<f64>) {
        let eps: Vec<f64> = (0..self.dim).map(|_| StandardNormal.sample(rng)).collect();
        for r in 0..self.dim {
            let a = &self.mixing[r * self.dim..(r + 1) * self.dim];
            out.push(self.mean[r] + stats::dot(a, &eps));
        }
    }
}

/// Mean squared deviation between the fitted and true link over the central
/// 95% of the training index.
///
/// Uses the trapezoid rule on `grid_size` evenly spaced points between the
/// 2.5% and 97.5% quantiles of `fit.train_index()`, divided by the covered
/// width. For scenario 3 points within [`SINGULAR_EXCLUSION`] of 0 are
/// dropped, together with the intervals touching them.
pub fn g_mse(fit: &ModelFit, truth: &ScenarioTruth, grid_size: usize) -> Result<f64> {
    if grid_size < 2 {
        return Err(Error::invalid("metric grid needs at least 2 points"));
    }
    let mut sorted = fit.train_index().to_vec();
    sorted.sort_by(f64::total_cmp);
    let lo = stats::quantile_sorted(&sorted, 0.025);
    let hi = stats::quantile_sorted(&sorted, 0.975);
    if !(hi > lo) {
        return Err(Error::EmptyGrid);
    }
    let step = (hi - lo) / (grid_size - 1) as f64;
    let mut sq: Vec<Option<f64>> = Vec::with_capacity(grid_size);
    for k in 0..grid_size {
        let u = if k == grid_size - 1 { hi } else { lo + k as f64 * step };
        if truth.scenario == Scenario::Unimodal && u.abs() < SINGULAR_EXCLUSION {
            sq.push(None);
            continue;
        }
        let diff = fit.estimate_g(u)? - truth.scenario.link(u)?;
        sq.push(Some(diff * diff));
    }
    let mut area = 0.0;
    let mut width = 0.0;
    for pair in sq.windows(2) {
        if let (Some(a), Some(b)) = (pair[0], pair[1]) {
            area += 0.5 * (a + b) * step;
            width += step;
        }
    }
    if width == 0.0 {
        return Err(Error::EmptyGrid);
    }
    Ok(area / width)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn link_examples() {
        assert_eq!(Scenario::Linear.link(1.7).unwrap(), 1.7);
        assert_eq!(Scenario::Multimodal.link(0.0).unwrap(), -1.2);
        assert_eq!(Scenario::Unimodal.link(1.0).unwrap(), 0.0);
        assert_eq!(Scenario::Constant.link(-42.0).unwrap(), 3.0);
        assert_eq!(Scenario::Unimodal.link(0.0), Err(Error::Singularity(0.0)));
    }

    #[test]
    fn scenario_ids() {
        for id in 1..=4 {
            assert_eq!(Scenario::from_id(id).unwrap().id(), id);
        }
        assert!(Scenario::from_id(0).is_err());
        assert!(Scenario::from_id(5).is_err());
        assert!(generate_scenario(7, 10, 0).is_err());
        assert!(generate_scenario(1, 1, 0).is_err());
    }

    #[test]
    fn dimensions_match_design() {
        let dims: Vec<usize> = (1..=4)
            .map(|id| generate_scenario(id, 5, 3).unwrap().dataset.p())
            .collect();
        assert_eq!(dims, [8, 8, 4, 20]);
    }
}
