//! Derivative-free search over the identifiability set
//! `{ξ : ‖ξ‖₂ = 1, first nonzero coordinate > 0}`.
//!
//! All searches propose points in the box `[−1, 1]^p` and project every
//! candidate with [`project_to_constraint`] before it is evaluated. The
//! objective therefore only ever sees valid [`IndexVector`]s. Objectives are
//! total: return `f64::INFINITY` for candidates that cannot be scored.

mod de;
mod random;
mod tpe;

use alloc::format;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::error::{Error, Result};

pub use de::de_minimize;
pub use random::random_minimize;
pub use tpe::tpe_minimize;

/// Unit-norm direction with canonical sign.
#[derive(Debug, Clone, PartialEq)]
pub struct IndexVector(Vec<f64>);

impl IndexVector {
    /// Wraps a vector that already satisfies the constraint (checked to 1e-10).
    pub fn from_unit(v: Vec<f64>) -> Result<Self> {
        let norm = crate::stats::norm2(&v);
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::invalid(format!("index vector has norm {norm}, expected 1")));
        }
        match v.iter().find(|&&x| x != 0.0) {
            Some(&first) if first > 0.0 => Ok(IndexVector(v)),
            _ => Err(Error::invalid("index vector must have a positive first nonzero coordinate")),
        }
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn l1_norm(&self) -> f64 {
        self.0.iter().map(|x| x.abs()).sum()
    }

    /// `|cos ∠(self, other)|`.
    pub fn abs_cosine(&self, other: &IndexVector) -> f64 {
        crate::stats::dot(&self.0, &other.0).abs()
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }
}

/// Projects a nonzero vector onto the unit sphere with canonical sign.
pub fn project_to_constraint(v: &[f64]) -> Result<IndexVector> {
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::invalid("candidate has non-finite coordinates"));
    }
    let first = v.iter().copied().find(|&x| x != 0.0).ok_or(Error::ZeroVector)?;
    // scale first to avoid overflow/underflow in the norm
    let amax = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let norm = amax * libm::sqrt(v.iter().map(|x| (x / amax) * (x / amax)).sum::<f64>());
    if (norm - 1.0).abs() <= 4.0 * f64::EPSILON {
        // already on the sphere; rescaling would only perturb the last bits
        let sign = if first > 0.0 { 1.0 } else { -1.0 };
        return Ok(IndexVector(v.iter().map(|x| sign * x).collect()));
    }
    let s = if first > 0.0 { 1.0 / norm } else { -1.0 / norm };
    Ok(IndexVector(v.iter().map(|x| x * s).collect()))
}

/// Search method.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Method {
    /// Differential evolution, DE/rand/1/bin.
    #[default]
    De,
    /// Tree-structured Parzen estimator.
    Tpe,
    /// Uniform random search.
    Random,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::De => "de",
            Method::Tpe => "tpe",
            Method::Random => "random",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "de" => Ok(Method::De),
            "tpe" => Ok(Method::Tpe),
            "random" => Ok(Method::Random),
            other => Err(Error::invalid(format!("unknown optimizer '{other}'"))),
        }
    }
}

/// Differential-evolution settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeParams {
    /// Population size; `None` uses `max(15, 4p)`.
    pub population: Option<usize>,
    pub differential_weight: f64,
    pub crossover: f64,
}

impl Default for DeParams {
    fn default() -> Self {
        DeParams {
            population: None,
            differential_weight: 0.8,
            crossover: 0.9,
        }
    }
}

/// TPE settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TpeParams {
    /// Fraction of the history treated as "good".
    pub gamma: f64,
    pub startup_trials: usize,
    pub candidates: usize,
    pub min_bandwidth: f64,
}

impl Default for TpeParams {
    fn default() -> Self {
        TpeParams {
            gamma: 0.25,
            startup_trials: 24,
            candidates: 24,
            min_bandwidth: 1e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchConfig {
    pub dimension: usize,
    /// Total number of objective evaluations.
    pub budget: usize,
    pub seed: u64,
    pub method: Method,
    pub de: DeParams,
    pub tpe: TpeParams,
}

impl SearchConfig {
    pub fn new(dimension: usize, budget: usize, seed: u64, method: Method) -> Self {
        SearchConfig {
            dimension,
            budget,
            seed,
            method,
            de: DeParams::default(),
            tpe: TpeParams::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.dimension == 0 {
            return Err(Error::invalid("search dimension must be positive"));
        }
        if self.budget == 0 {
            return Err(Error::invalid("search budget must be positive"));
        }
        let de = &self.de;
        if !(de.differential_weight > 0.0 && de.differential_weight <= 2.0) {
            return Err(Error::invalid("DE differential weight must lie in (0, 2]"));
        }
        if !(0.0..=1.0).contains(&de.crossover) {
            return Err(Error::invalid("DE crossover rate must lie in [0, 1]"));
        }
        if matches!(de.population, Some(n) if n < 4) {
            return Err(Error::invalid("DE population must be at least 4"));
        }
        let tpe = &self.tpe;
        if !(tpe.gamma > 0.0 && tpe.gamma < 1.0) {
            return Err(Error::invalid("TPE gamma must lie in (0, 1)"));
        }
        if tpe.candidates == 0 || tpe.startup_trials == 0 {
            return Err(Error::invalid("TPE needs at least one startup trial and candidate"));
        }
        if !(tpe.min_bandwidth > 0.0) {
            return Err(Error::invalid("TPE bandwidth floor must be positive"));
        }
        Ok(())
    }
}

/// Best point found and the best-so-far trace.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchResult {
    pub best_xi: IndexVector,
    pub best_value: f64,
    pub evaluations: usize,
    /// `(evaluation index, best value so far)` after every evaluation.
    pub trace: Vec<(usize, f64)>,
}

/// Runs the configured method.
pub fn minimize<F>(objective: F, config: &SearchConfig) -> Result<SearchResult>
where
    F: FnMut(&IndexVector) -> f64,
{
    match config.method {
        Method::De => de_minimize(objective, config),
        Method::Tpe => tpe_minimize(objective, config),
        Method::Random => random_minimize(objective, config),
    }
}

/// Shared bookkeeping: evaluates projected candidates and keeps the trace.
pub(crate) struct Tracker<F> {
    objective: F,
    budget: usize,
    best: Option<(IndexVector, f64)>,
    trace: Vec<(usize, f64)>,
}

impl<F: FnMut(&IndexVector) -> f64> Tracker<F> {
    pub(crate) fn new(objective: F, budget: usize) -> Self {
        Tracker {
            objective,
            budget,
            best: None,
            trace: Vec::with_capacity(budget),
        }
    }

    pub(crate) fn exhausted(&self) -> bool {
        self.trace.len() >= self.budget
    }

    /// Evaluates a raw box point; returns the projected point and its value.
    pub(crate) fn evaluate(&mut self, raw: &[f64]) -> (Option<IndexVector>, f64) {
        let projected = project_to_constraint(raw).ok();
        let value = match &projected {
            Some(xi) => {
                let v = (self.objective)(xi);
                if v.is_nan() {
                    f64::INFINITY
                } else {
                    v
                }
            }
            None => f64::INFINITY,
        };
        if let Some(xi) = &projected {
            let better = match &self.best {
                None => true,
                Some((_, b)) => value < *b,
            };
            if better {
                self.best = Some((xi.clone(), value));
            }
        }
        let best_so_far = self.best.as_ref().map_or(f64::INFINITY, |(_, b)| *b);
        self.trace.push((self.trace.len(), best_so_far));
        (projected, value)
    }

    pub(crate) fn finish(self) -> Result<SearchResult> {
        let (best_xi, best_value) = self
            .best
            .ok_or_else(|| Error::invalid("search evaluated no valid candidate"))?;
        Ok(SearchResult {
            best_xi,
            best_value,
            evaluations: self.trace.len(),
            trace: self.trace,
        })
    }
}

/// Uniform draw in `[−1, 1]^p`.
pub(crate) fn uniform_box<R: rand::Rng>(rng: &mut R, p: usize) -> Vec<f64> {
    (0..p).map(|_| rng.random_range(-1.0..=1.0)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn projection_examples() {
        assert_eq!(project_to_constraint(&[0.0, -2.0]).unwrap().as_slice(), &[0.0, 1.0]);
        let v = project_to_constraint(&[3.0, 4.0]).unwrap();
        assert!((v.as_slice()[0] - 0.6).abs() < 1e-15 && (v.as_slice()[1] - 0.8).abs() < 1e-15);
        let s = 1.0 / libm::sqrt(3.0);
        for scale in [1.0, 1e-200, 7.5, 1e200] {
            let v = project_to_constraint(&[-scale, -scale, -scale]).unwrap();
            for x in v.as_slice() {
                assert!((x - s).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn projection_is_idempotent() {
        let v = project_to_constraint(&[0.3, -1.7, 2.2, 0.01]).unwrap();
        assert_eq!(project_to_constraint(v.as_slice()).unwrap(), v);
        let neg: Vec<f64> = v.as_slice().iter().map(|x| -x).collect();
        assert_eq!(project_to_constraint(&neg).unwrap(), v);
    }

    #[test]
    fn projection_rejects_zero_vector() {
        assert_eq!(project_to_constraint(&[0.0, 0.0]), Err(Error::ZeroVector));
        assert!(project_to_constraint(&[f64::NAN, 1.0]).is_err());
    }

    #[test]
    fn from_unit_checks_invariants() {
        assert!(IndexVector::from_unit(vec![0.6, 0.8]).is_ok());
        assert!(IndexVector::from_unit(vec![-0.6, 0.8]).is_err());
        assert!(IndexVector::from_unit(vec![0.0, -1.0]).is_err());
        assert!(IndexVector::from_unit(vec![0.5, 0.5]).is_err());
    }

    #[test]
    fn method_names_parse() {
        for m in [Method::De, Method::Tpe, Method::Random] {
            assert_eq!(m.name().parse::<Method>().unwrap(), m);
        }
        assert!("cmaes".parse::<Method>().is_err());
    }

    #[test]
    fn config_validation() {
        let mut c = SearchConfig::new(3, 10, 0, Method::De);
        assert!(c.validate().is_ok());
        c.budget = 0;
        assert!(c.validate().is_err());
        c.budget = 10;
        c.tpe.gamma = 1.0;
        assert!(c.validate().is_err());
    }
}
