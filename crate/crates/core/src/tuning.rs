//! k-fold cross-validation over bandwidth × penalty grids.
//!
//! Each cell is scored by the held-out mean squared error between predicted
//! and target log-odds, averaged over folds. Cells are visited in ascending
//! `(bandwidth, penalty)` order and the first strict minimum wins.

use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::model::{fit, log_odds_targets, FitConfig};
use crate::rng::{self, Stream};

#[derive(Debug, Clone, PartialEq)]
pub struct CvGrid {
    pub bandwidths: Vec<f64>,
    pub penalties: Vec<f64>,
    pub folds: usize,
    pub seed: u64,
}

impl CvGrid {
    /// Bandwidths `{0.15, …, 0.4}` and penalties `{1e-5, …, 1e-1}` with 5 folds.
    pub fn standard(seed: u64) -> Self {
        CvGrid {
            bandwidths: vec![0.15, 0.2, 0.25, 0.3, 0.35, 0.4],
            penalties: vec![1e-5, 1e-4, 1e-3, 1e-2, 1e-1],
            folds: 5,
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvCell {
    pub bandwidth: f64,
    pub lasso_penalty: f64,
    pub mean_error: f64,
    pub fold_errors: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvOutcome {
    pub best_bandwidth: f64,
    pub best_penalty: f64,
    pub table: Vec<CvCell>,
    /// Set when some training fold has fewer than `2p` rows.
    pub small_folds: bool,
}

/// Fold label per row. Stratified by `labels` when given: each class is
/// shuffled separately and dealt round-robin, continuing the rotation across
/// classes.
pub fn fold_assignments(n: usize, folds: usize, labels: Option<&[u8]>, seed: u64) -> Vec<usize> {
    let mut rng = rng::stream(seed, Stream::Folds);
    let mut assign = vec![0; n];
    let groups: Vec<Vec<usize>> = match labels {
        Some(l) => {
            let mut g = vec![Vec::new(), Vec::new()];
            for (i, &y) in l.iter().enumerate() {
                g[usize::from(y.min(1))].push(i);
            }
            g
        }
        None => vec![(0..n).collect()],
    };
    let mut slot = 0;
    for mut g in groups {
        g.shuffle(&mut rng);
        for i in g {
            assign[i] = slot % folds;
            slot += 1;
        }
    }
    assign
}

pub fn cross_validate(dataset: &Dataset, base: &FitConfig, grid: &CvGrid) -> Result<CvOutcome> {
    if grid.bandwidths.is_empty() || grid.penalties.is_empty() {
        return Err(Error::invalid("cross-validation grids must be non-empty"));
    }
    if grid.folds < 2 || grid.folds > dataset.n() {
        return Err(Error::invalid("fold count must lie in [2, n]"));
    }
    let targets = log_odds_targets(dataset, base.prob_clip)?;
    let assign = fold_assignments(dataset.n(), grid.folds, dataset.hard_labels(), grid.seed);
    let splits: Vec<(Vec<usize>, Vec<usize>)> = (0..grid.folds)
        .map(|f| {
            let (test, train): (Vec<usize>, Vec<usize>) = (0..dataset.n()).partition(|&i| assign[i] == f);
            (train, test)
        })
        .collect();
    let small_folds = splits.iter().any(|(train, _)| train.len() < 2 * dataset.p());
    let train_sets: Vec<Dataset> = splits
        .iter()
        .map(|(train, _)| dataset.select_rows(train))
        .collect::<Result<_>>()?;

    let mut cells: Vec<(f64, f64)> = Vec::new();
    for &h in &grid.bandwidths {
        for &l in &grid.penalties {
            cells.push((h, l));
        }
    }
    cells.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));

    let mut table = Vec::with_capacity(cells.len());
    for (h, l) in cells {
        let cfg = FitConfig {
            bandwidth: h,
            lasso_penalty: l,
            ..base.clone()
        };
        let mut fold_errors = Vec::with_capacity(grid.folds);
        for ((_, test), train_set) in splits.iter().zip(&train_sets) {
            let err = match fit(train_set, &cfg) {
                Ok(model) => {
                    let mut sse = 0.0;
                    for &i in test {
                        let pred = model.predict(dataset.features().row(i), dataset.treatment()[i])?;
                        let d = pred.log_odds - targets[i];
                        sse += d * d;
                    }
                    if test.is_empty() {
                        0.0
                    } else {
                        sse / test.len() as f64
                    }
                }
                Err(_) => f64::INFINITY,
            };
            fold_errors.push(err);
        }
        let mean_error = fold_errors.iter().sum::<f64>() / fold_errors.len() as f64;
        table.push(CvCell {
            bandwidth: h,
            lasso_penalty: l,
            mean_error,
            fold_errors,
        });
    }
    let best = table
        .iter()
        .fold(None::<&CvCell>, |acc, c| match acc {
            Some(b) if !(c.mean_error < b.mean_error) => Some(b),
            _ => Some(c),
        })
        .ok_or_else(|| Error::invalid("empty grid"))?;
    if !best.mean_error.is_finite() {
        return Err(Error::invalid("every cross-validation cell failed to fit"));
    }
    let (best_bandwidth, best_penalty) = (best.bandwidth, best.lasso_penalty);
    Ok(CvOutcome {
        best_bandwidth,
        best_penalty,
        table,
        small_folds,
    })
}
