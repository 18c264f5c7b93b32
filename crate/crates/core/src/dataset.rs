//! In-memory training data: covariates, treatment and outcome labels.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// Covariates `X` (n×p), treatment `τ` and the outcome as soft probabilities
/// and/or hard 0/1 labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: Matrix,
    treatment: Vec<f64>,
    soft_probs: Option<Vec<f64>>,
    hard_labels: Option<Vec<u8>>,
    feature_names: Vec<String>,
}

impl Dataset {
    /// Validates shapes and finiteness. At least one outcome vector must be present.
    pub fn new(
        features: Matrix,
        treatment: Vec<f64>,
        soft_probs: Option<Vec<f64>>,
        hard_labels: Option<Vec<u8>>,
        feature_names: Vec<String>,
    ) -> Result<Self> {
        let n = features.rows();
        let p = features.cols();
        if n < 2 {
            return Err(Error::invalid(format!("need at least 2 rows, got {n}")));
        }
        if p < 1 {
            return Err(Error::invalid("need at least one feature column"));
        }
        if !features.is_finite() || !crate::stats::all_finite(&treatment) {
            return Err(Error::invalid("features and treatment must be finite"));
        }
        check_len(n, treatment.len())?;
        check_len(p, feature_names.len())?;
        if soft_probs.is_none() && hard_labels.is_none() {
            return Err(Error::invalid("dataset needs soft probabilities or hard labels"));
        }
        if let Some(s) = &soft_probs {
            check_len(n, s.len())?;
            if s.iter().any(|v| !(0.0..=1.0).contains(v)) {
                return Err(Error::invalid("soft probabilities must lie in [0, 1]"));
            }
        }
        if let Some(h) = &hard_labels {
            check_len(n, h.len())?;
            if h.iter().any(|&v| v > 1) {
                return Err(Error::invalid("hard labels must be 0 or 1"));
            }
        }
        Ok(Dataset {
            features,
            treatment,
            soft_probs,
            hard_labels,
            feature_names,
        })
    }

    /// Default names `x1..xp`.
    pub fn default_names(p: usize) -> Vec<String> {
        (1..=p).map(|j| format!("x{j}")).collect()
    }

    pub fn n(&self) -> usize {
        self.features.rows()
    }

    pub fn p(&self) -> usize {
        self.features.cols()
    }

    pub fn features(&self) -> &Matrix {
        &self.features
    }

    pub fn treatment(&self) -> &[f64] {
        &self.treatment
    }

    pub fn soft_probs(&self) -> Option<&[f64]> {
        self.soft_probs.as_deref()
    }

    pub fn hard_labels(&self) -> Option<&[u8]> {
        self.hard_labels.as_deref()
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn with_soft_probs(mut self, probs: Vec<f64>) -> Result<Self> {
        check_len(self.n(), probs.len())?;
        if probs.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::invalid("soft probabilities must lie in [0, 1]"));
        }
        self.soft_probs = Some(probs);
        Ok(self)
    }

    /// Rows picked by index; duplicates are kept (used by resampling).
    pub fn select_rows(&self, idx: &[usize]) -> Result<Self> {
        if idx.iter().any(|&i| i >= self.n()) {
            return Err(Error::invalid("row index out of range"));
        }
        Dataset::new(
            self.features.select_rows(idx),
            idx.iter().map(|&i| self.treatment[i]).collect(),
            self.soft_probs
                .as_ref()
                .map(|s| idx.iter().map(|&i| s[i]).collect()),
            self.hard_labels
                .as_ref()
                .map(|h| idx.iter().map(|&i| h[i]).collect()),
            self.feature_names.clone(),
        )
    }
}

fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        Err(Error::DimensionMismatch { expected, found })
    } else {
        Ok(())
    }
}
