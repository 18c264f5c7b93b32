//! Semiparametric dual-score regression for binary outcomes under a
//! continuous treatment.
//!
//! The model writes the log-odds of a positive outcome as
//! `xᵀβ + g(xᵀξ − τ)`: a linear *prognostic score* plus an unknown link `g`
//! applied to the deviation of the treatment `τ` from a covariate-derived
//! *treatment-interaction score* `xᵀξ`. This crate estimates `β`, the unit
//! index direction `ξ` and a Nadaraya–Watson estimate of `g`, and derives
//! per-subject optimal treatment levels from the fit.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, CSV
//! ingestion, timing and the command-line front end live in the `dualscore`
//! companion crate.
//!
//! Module map:
//!
//! - [`kernel`]: kernels and Nadaraya–Watson estimators (plain and leave-one-out).
//! - [`model`]: log-odds targets, profiled least squares, the penalized
//!   index objective, fitting, prediction and optimal treatment.
//! - [`optim`]: projection onto the identifiability sphere and the
//!   derivative-free searches (differential evolution, TPE, random).
//! - [`simulation`]: the four synthetic scenarios, their ground truth and the
//!   link-function error metric.
//! - [`bootstrap`]: percentile confidence intervals for `β` and `ξ`.
//! - [`distill`]: SMOTE, a gradient-boosted-trees expert and classification
//!   metrics used to turn hard labels into soft labels.
//! - [`tuning`]: k-fold cross-validation over bandwidth and penalty grids.
#![no_std]
#![warn(missing_debug_implementations)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod bootstrap;
pub mod dataset;
pub mod distill;
mod error;
pub mod kernel;
pub mod linalg;
pub mod model;
pub mod optim;
pub mod rng;
pub mod simulation;
pub mod stats;
pub mod tuning;

pub use dataset::Dataset;
pub use error::{Error, Result};
pub use kernel::Kernel;
pub use linalg::Matrix;
pub use model::{FitConfig, ModelFit};
pub use optim::{IndexVector, Method, SearchConfig, SearchResult};
