//! Turning hard 0/1 outcomes into soft labels.
//!
//! A gradient-boosted-trees expert is trained on the covariates with the
//! treatment appended as the last column, optionally after SMOTE
//! oversampling of the minority class. Its predicted probabilities on the
//! original rows become the soft labels the dual-score model is fitted to.

mod gbdt;
mod metrics;
mod smote;

use alloc::vec::Vec;

pub use gbdt::{expert_probabilities, train_expert, BoostParams, ExpertModel, Node, Tree};
pub use metrics::{auc, classification_metrics, MetricsReport};
pub use smote::smote;

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// `[X | τ]`, the expert's input layout.
pub fn expert_inputs(dataset: &Dataset) -> Matrix {
    let n = dataset.n();
    let p = dataset.p();
    let mut data = Vec::with_capacity(n * (p + 1));
    for i in 0..n {
        data.extend_from_slice(dataset.features().row(i));
        data.push(dataset.treatment()[i]);
    }
    Matrix::from_row_major(n, p + 1, data).expect("shape is consistent")
}

/// Fills `soft_probs` with the expert's clipped probabilities on the rows of
/// `dataset`. Hard labels are kept.
pub fn soft_label_dataset(dataset: &Dataset, expert: &ExpertModel, prob_clip: f64) -> Result<Dataset> {
    if !(prob_clip > 0.0 && prob_clip < 0.5) {
        return Err(Error::invalid("probability clip must lie in (0, 0.5)"));
    }
    if expert.feature_count() != dataset.p() + 1 {
        return Err(Error::DimensionMismatch {
            expected: dataset.p() + 1,
            found: expert.feature_count(),
        });
    }
    let probs = expert_probabilities(expert, &expert_inputs(dataset))?
        .into_iter()
        .map(|p| p.clamp(prob_clip, 1.0 - prob_clip))
        .collect();
    dataset.clone().with_soft_probs(probs)
}

/// Settings of the full soft-labelling pipeline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistillConfig {
    pub boost: BoostParams,
    pub smote_neighbors: usize,
    /// Minority/majority ratio after oversampling; `None` skips SMOTE.
    pub smote_ratio: Option<f64>,
    pub seed: u64,
    pub prob_clip: f64,
}

impl Default for DistillConfig {
    fn default() -> Self {
        DistillConfig {
            boost: BoostParams::default(),
            smote_neighbors: 5,
            smote_ratio: Some(1.0),
            seed: 0,
            prob_clip: crate::model::DEFAULT_PROB_CLIP,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Distilled {
    /// The input rows with expert soft labels attached.
    pub dataset: Dataset,
    pub expert: ExpertModel,
    /// Synthetic rows added for expert training.
    pub synthetic_rows: usize,
}

/// SMOTE on `[X | τ]`, expert training, then soft labels for the original
/// rows only.
pub fn distill(dataset: &Dataset, config: &DistillConfig) -> Result<Distilled> {
    let labels = dataset
        .hard_labels()
        .ok_or_else(|| Error::invalid("distillation needs hard labels"))?;
    let inputs = expert_inputs(dataset);
    let (train_x, train_y) = match config.smote_ratio {
        Some(ratio) => smote(&inputs, labels, config.smote_neighbors, ratio, config.seed)?,
        None => (inputs, labels.to_vec()),
    };
    let synthetic_rows = train_x.rows() - dataset.n();
    let expert = train_expert(&train_x, &train_y, &config.boost)?;
    let dataset = soft_label_dataset(dataset, &expert, config.prob_clip)?;
    Ok(Distilled {
        dataset,
        expert,
        synthetic_rows,
    })
}
