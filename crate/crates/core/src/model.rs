//! The dual-score model: log-odds targets, profiled least squares for `β`,
//! the penalized objective over `ξ`, fitting, and every query on a fitted
//! model.
//!
//! For a candidate index `ξ` the index values are `Zᵢ = Xᵢᵀξ − τᵢ`. They are
//! divided by their sample standard deviation before any kernel smoothing, so
//! the bandwidth is expressed in standard-deviation units of the index.
//! Covariates and log-odds are residualized against `Z` with leave-one-out
//! Nadaraya–Watson means, `β` is the least-squares fit of the residualized
//! log-odds on the residualized covariates, and the search minimizes
//! `mean(rᵢ²) + λ‖ξ‖₁` over unit vectors.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::kernel::{self, Kernel, Smoother};
use crate::linalg::{self, Matrix};
use crate::optim::{self, IndexVector, Method, SearchConfig};
use crate::stats;

/// Default clipping of soft probabilities before taking log-odds.
pub const DEFAULT_PROB_CLIP: f64 = 1e-6;
/// Default number of treatment levels scanned by [`ModelFit::optimal_treatment`].
pub const DEFAULT_TREATMENT_GRID: usize = 512;

/// Hyperparameters of a single fit.
#[derive(Debug, Clone, PartialEq)]
pub struct FitConfig {
    /// Kernel bandwidth, in standard deviations of the index.
    pub bandwidth: f64,
    /// ℓ₁ penalty weight on `ξ`.
    pub lasso_penalty: f64,
    pub kernel: Kernel,
    pub optimizer: Method,
    /// Objective evaluations allowed to the search.
    pub optimizer_budget: usize,
    pub seed: u64,
    pub prob_clip: f64,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            bandwidth: 0.25,
            lasso_penalty: 1e-4,
            kernel: Kernel::Epanechnikov,
            optimizer: Method::Tpe,
            optimizer_budget: 200,
            seed: 0,
            prob_clip: DEFAULT_PROB_CLIP,
        }
    }
}

impl FitConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.bandwidth > 0.0 && self.bandwidth.is_finite()) {
            return Err(Error::invalid("bandwidth must be positive"));
        }
        if !(self.lasso_penalty >= 0.0 && self.lasso_penalty.is_finite()) {
            return Err(Error::invalid("lasso penalty must be nonnegative"));
        }
        if self.optimizer_budget == 0 {
            return Err(Error::invalid("optimizer budget must be positive"));
        }
        check_clip(self.prob_clip)
    }

    pub fn search_config(&self, dimension: usize) -> SearchConfig {
        SearchConfig::new(dimension, self.optimizer_budget, self.seed, self.optimizer)
    }
}

fn check_clip(clip: f64) -> Result<()> {
    if !(clip > 0.0 && clip < 0.5) {
        return Err(Error::invalid("probability clip must lie in (0, 0.5)"));
    }
    Ok(())
}

/// `Ȳᵢ = log(pᵢ / (1 − pᵢ))` with `pᵢ` clipped to `[clip, 1 − clip]`.
pub fn log_odds_targets(dataset: &Dataset, prob_clip: f64) -> Result<Vec<f64>> {
    check_clip(prob_clip)?;
    let probs = dataset.soft_probs().ok_or(Error::MissingSoftLabels)?;
    Ok(probs
        .iter()
        .map(|&p| stats::logit(p.clamp(prob_clip, 1.0 - prob_clip)))
        .collect())
}

/// `Zᵢ = Xᵢᵀξ − τᵢ`, unstandardized.
pub fn index_values(dataset: &Dataset, xi: &IndexVector) -> Result<Vec<f64>> {
    let mut z = dataset.features().mul_vec(xi.as_slice())?;
    for (zi, t) in z.iter_mut().zip(dataset.treatment()) {
        *zi -= t;
    }
    Ok(z)
}

/// Outcome of the profiled least-squares step for one `ξ`.
#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    pub beta: Vec<f64>,
    /// `rᵢ = ê_yᵢ − ê_xᵢᵀβ`.
    pub residuals: Vec<f64>,
    /// Set when the residualized design was rank deficient and the
    /// minimum-norm solution was used.
    pub rank_deficient: bool,
    /// Rows whose leave-one-out neighbourhood was empty.
    pub fallback_rows: usize,
    /// Standard deviation used to standardize the index.
    pub index_scale: f64,
}

impl Profile {
    pub fn mean_squared_residual(&self) -> f64 {
        self.residuals.iter().map(|r| r * r).sum::<f64>() / self.residuals.len() as f64
    }
}

/// Least-squares coefficients of `ey` on `ex` and the residuals.
///
/// Returns `(β, residuals, rank_deficient)`.
pub fn profiled_coefficients(ex: &Matrix, ey: &[f64]) -> Result<(Vec<f64>, Vec<f64>, bool)> {
    let ls = linalg::least_squares(ex, ey)?;
    let fitted = ex.mul_vec(&ls.solution)?;
    let residuals = ey.iter().zip(&fitted).map(|(y, f)| y - f).collect();
    let deficient = ls.rank_deficient();
    Ok((ls.solution, residuals, deficient))
}

/// Reusable state for evaluating the profiled objective at many `ξ`.
///
/// Holds the covariates and log-odds side by side so one leave-one-out pass
/// residualizes both.
#[derive(Debug, Clone)]
pub struct ProfileProblem<'a> {
    dataset: &'a Dataset,
    stacked: Matrix,
    bandwidth: f64,
    kernel: Kernel,
}

impl<'a> ProfileProblem<'a> {
    pub fn new(dataset: &'a Dataset, targets: &[f64], bandwidth: f64, kernel: Kernel) -> Result<Self> {
        let n = dataset.n();
        let p = dataset.p();
        if targets.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: targets.len(),
            });
        }
        if !stats::all_finite(targets) {
            return Err(Error::invalid("targets must be finite"));
        }
        if !(bandwidth > 0.0 && bandwidth.is_finite()) {
            return Err(Error::invalid("bandwidth must be positive"));
        }
        let mut data = Vec::with_capacity(n * (p + 1));
        for (i, &t) in targets.iter().enumerate() {
            data.extend_from_slice(dataset.features().row(i));
            data.push(t);
        }
        Ok(ProfileProblem {
            dataset,
            stacked: Matrix::from_row_major(n, p + 1, data)?,
            bandwidth,
            kernel,
        })
    }

    pub fn profile(&self, xi: &IndexVector) -> Result<Profile> {
        let n = self.dataset.n();
        let p = self.dataset.p();
        if xi.len() != p {
            return Err(Error::DimensionMismatch {
                expected: p,
                found: xi.len(),
            });
        }
        let z = index_values(self.dataset, xi)?;
        let scale = stats::sample_sd(&z);
        // spread at the level of the cancellation error in xᵀξ − τ is noise
        let magnitude = (0..n)
            .map(|i| {
                let row = self.dataset.features().row(i);
                let x_part: f64 = row.iter().zip(xi.as_slice()).map(|(a, b)| (a * b).abs()).sum();
                x_part + self.dataset.treatment()[i].abs()
            })
            .fold(0.0, f64::max);
        if !(scale > 1e-12 * magnitude && scale.is_finite()) {
            return Err(Error::DegenerateIndex);
        }
        let u: Vec<f64> = z.iter().map(|v| v / scale).collect();
        let loo = kernel::loo_residuals_unchecked(&u, &self.stacked, self.bandwidth, self.kernel);
        let mut ex = Matrix::zeros(n, p);
        let mut ey = vec![0.0; n];
        for i in 0..n {
            let row = loo.residuals.row(i);
            ex.row_mut(i).copy_from_slice(&row[..p]);
            ey[i] = row[p];
        }
        let (beta, residuals, rank_deficient) = profiled_coefficients(&ex, &ey)?;
        Ok(Profile {
            beta,
            residuals,
            rank_deficient,
            fallback_rows: loo.fallbacks,
            index_scale: scale,
        })
    }

    /// `mean(rᵢ(ξ)²) + λ‖ξ‖₁`.
    pub fn objective(&self, xi: &IndexVector, lasso_penalty: f64) -> Result<f64> {
        let prof = self.profile(xi)?;
        Ok(prof.mean_squared_residual() + lasso_penalty * xi.l1_norm())
    }
}

/// Profiled `β̄(ξ)` and residuals `r(ξ)`.
pub fn profile_beta(
    dataset: &Dataset,
    targets: &[f64],
    xi: &IndexVector,
    bandwidth: f64,
    kernel: Kernel,
) -> Result<Profile> {
    ProfileProblem::new(dataset, targets, bandwidth, kernel)?.profile(xi)
}

/// Penalized objective at the projection of `xi_raw`.
pub fn penalized_objective(
    dataset: &Dataset,
    targets: &[f64],
    xi_raw: &[f64],
    config: &FitConfig,
) -> Result<f64> {
    let xi = optim::project_to_constraint(xi_raw)?;
    ProfileProblem::new(dataset, targets, config.bandwidth, config.kernel)?
        .objective(&xi, config.lasso_penalty)
}

/// Diagnostics gathered while fitting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct FitDiagnostics {
    pub rank_deficient: bool,
    pub fallback_rows: usize,
    pub evaluations: usize,
}

/// Everything needed to evaluate the fitted model.
#[derive(Debug, Clone, PartialEq)]
pub struct FitParts {
    pub beta: Vec<f64>,
    pub xi: IndexVector,
    pub train_index: Vec<f64>,
    pub link_residuals: Vec<f64>,
    pub bandwidth: f64,
    pub kernel: Kernel,
    pub lasso_penalty: f64,
    pub index_scale: f64,
    pub objective_value: f64,
    pub feature_names: Vec<String>,
}

/// A fitted model. Immutable; all queries take `&self`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelFit {
    parts: FitParts,
    diagnostics: FitDiagnostics,
    link: Smoother,
}

/// Log-odds, probability and 0/1 label for one subject.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    pub log_odds: f64,
    pub prob: f64,
    pub label: u8,
}

/// `(xᵀβ̂, xᵀξ̂)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DualScores {
    pub prognostic: f64,
    pub interaction: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimalTreatment {
    pub tau_star: f64,
    pub g_at_star: f64,
}

/// Log-odds surface over (prognostic score, index − treatment).
#[derive(Debug, Clone, PartialEq)]
pub struct Heatmap {
    pub prognostic_axis: Vec<f64>,
    pub index_axis: Vec<f64>,
    /// `values[i][j] = prognostic_axis[i] + ĝ(index_axis[j])`.
    pub values: Matrix,
}

/// Estimates `β`, `ξ` and the link function.
///
/// The search runs over the projected sphere with the configured optimizer;
/// `β̂` is the profiled solution at the best `ξ`, and `ĝ` smooths
/// `Ȳᵢ − Xᵢᵀβ̂` against the training index.
pub fn fit(dataset: &Dataset, config: &FitConfig) -> Result<ModelFit> {
    config.validate()?;
    let targets = log_odds_targets(dataset, config.prob_clip)?;
    let problem = ProfileProblem::new(dataset, &targets, config.bandwidth, config.kernel)?;
    let search = config.search_config(dataset.p());
    let result = optim::minimize(
        |xi| {
            problem
                .objective(xi, config.lasso_penalty)
                .unwrap_or(f64::INFINITY)
        },
        &search,
    )
    .map_err(|e| e.context("index search"))?;
    if !result.best_value.is_finite() {
        return Err(Error::DegenerateIndex.context("index search found no finite objective"));
    }
    let xi = result.best_xi;
    let prof = problem.profile(&xi).map_err(|e| e.context("final profile"))?;
    let train_index = index_values(dataset, &xi)?;
    let fitted = dataset.features().mul_vec(&prof.beta)?;
    let link_residuals: Vec<f64> = targets.iter().zip(&fitted).map(|(y, f)| y - f).collect();
    let parts = FitParts {
        beta: prof.beta,
        xi,
        train_index,
        link_residuals,
        bandwidth: config.bandwidth,
        kernel: config.kernel,
        lasso_penalty: config.lasso_penalty,
        index_scale: prof.index_scale,
        objective_value: result.best_value,
        feature_names: dataset.feature_names().to_vec(),
    };
    let mut model = ModelFit::from_parts(parts)?;
    model.diagnostics = FitDiagnostics {
        rank_deficient: prof.rank_deficient,
        fallback_rows: prof.fallback_rows,
        evaluations: result.evaluations,
    };
    Ok(model)
}

impl ModelFit {
    /// Assembles a fit from stored parts, checking consistency.
    pub fn from_parts(parts: FitParts) -> Result<Self> {
        let p = parts.beta.len();
        if parts.xi.len() != p {
            return Err(Error::DimensionMismatch {
                expected: p,
                found: parts.xi.len(),
            });
        }
        if parts.feature_names.len() != p {
            return Err(Error::DimensionMismatch {
                expected: p,
                found: parts.feature_names.len(),
            });
        }
        let n = parts.train_index.len();
        if parts.link_residuals.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: parts.link_residuals.len(),
            });
        }
        if !(parts.index_scale > 0.0 && parts.index_scale.is_finite()) {
            return Err(Error::invalid("index scale must be positive"));
        }
        if !stats::all_finite(&parts.beta) || !stats::all_finite(&parts.link_residuals) {
            return Err(Error::invalid("fitted coefficients and residuals must be finite"));
        }
        let u: Vec<f64> = parts.train_index.iter().map(|z| z / parts.index_scale).collect();
        let link = Smoother::new(
            &u,
            &Matrix::column(&parts.link_residuals),
            parts.bandwidth,
            parts.kernel,
        )?;
        Ok(ModelFit {
            parts,
            diagnostics: FitDiagnostics::default(),
            link,
        })
    }

    pub fn parts(&self) -> &FitParts {
        &self.parts
    }

    pub fn beta(&self) -> &[f64] {
        &self.parts.beta
    }

    pub fn xi(&self) -> &IndexVector {
        &self.parts.xi
    }

    pub fn train_index(&self) -> &[f64] {
        &self.parts.train_index
    }

    pub fn link_residuals(&self) -> &[f64] {
        &self.parts.link_residuals
    }

    pub fn bandwidth(&self) -> f64 {
        self.parts.bandwidth
    }

    pub fn kernel(&self) -> Kernel {
        self.parts.kernel
    }

    pub fn index_scale(&self) -> f64 {
        self.parts.index_scale
    }

    pub fn objective_value(&self) -> f64 {
        self.parts.objective_value
    }

    pub fn diagnostics(&self) -> FitDiagnostics {
        self.diagnostics
    }

    pub fn p(&self) -> usize {
        self.parts.beta.len()
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.p() {
            return Err(Error::DimensionMismatch {
                expected: self.p(),
                found: x.len(),
            });
        }
        Ok(())
    }

    /// `ĝ(z)`; `z` is on the raw index scale.
    pub fn estimate_g(&self, z: f64) -> Result<f64> {
        if !z.is_finite() {
            return Err(Error::invalid("link argument must be finite"));
        }
        let mut out = [0.0];
        self.link.estimate_into(z / self.parts.index_scale, &mut out);
        Ok(out[0])
    }

    pub fn dual_scores(&self, x: &[f64]) -> Result<DualScores> {
        self.check_dim(x)?;
        Ok(DualScores {
            prognostic: stats::dot(x, &self.parts.beta),
            interaction: stats::dot(x, self.parts.xi.as_slice()),
        })
    }

    /// `xᵀβ̂ + ĝ(xᵀξ̂ − τ)`; the label is 1 when the log-odds are ≥ 0.
    pub fn predict(&self, x: &[f64], tau: f64) -> Result<Prediction> {
        let s = self.dual_scores(x)?;
        let log_odds = s.prognostic + self.estimate_g(s.interaction - tau)?;
        Ok(Prediction {
            log_odds,
            prob: stats::sigmoid(log_odds),
            label: u8::from(log_odds >= 0.0),
        })
    }

    /// Grid search of `ĝ(xᵀξ̂ − τ)` over `grid_size` evenly spaced treatment
    /// levels including both ends; ties go to the smallest `τ`.
    pub fn optimal_treatment(
        &self,
        x: &[f64],
        tau_min: f64,
        tau_max: f64,
        grid_size: usize,
    ) -> Result<OptimalTreatment> {
        if !(tau_min < tau_max) || !tau_min.is_finite() || !tau_max.is_finite() {
            return Err(Error::invalid("treatment range must satisfy min < max"));
        }
        if grid_size < 2 {
            return Err(Error::invalid("treatment grid needs at least 2 points"));
        }
        let interaction = self.dual_scores(x)?.interaction;
        let step = (tau_max - tau_min) / (grid_size - 1) as f64;
        let mut best = OptimalTreatment {
            tau_star: f64::NAN,
            g_at_star: f64::NEG_INFINITY,
        };
        for k in 0..grid_size {
            let tau = if k == grid_size - 1 {
                tau_max
            } else {
                tau_min + k as f64 * step
            };
            let g = self.estimate_g(interaction - tau)?;
            if g > best.g_at_star {
                best = OptimalTreatment { tau_star: tau, g_at_star: g };
            }
        }
        Ok(best)
    }

    /// Evaluates the additive log-odds surface on a regular grid.
    ///
    /// A resolution of 1 along an axis uses the lower end of its range.
    pub fn heatmap_grid(
        &self,
        prognostic_range: (f64, f64),
        index_arg_range: (f64, f64),
        resolution: (usize, usize),
    ) -> Result<Heatmap> {
        let prognostic_axis = axis(prognostic_range, resolution.0)?;
        let index_axis = axis(index_arg_range, resolution.1)?;
        let g: Vec<f64> = index_axis
            .iter()
            .map(|&u| self.estimate_g(u))
            .collect::<Result<_>>()?;
        let mut values = Matrix::zeros(prognostic_axis.len(), index_axis.len());
        for (i, &a) in prognostic_axis.iter().enumerate() {
            for (cell, gj) in values.row_mut(i).iter_mut().zip(&g) {
                *cell = a + gj;
            }
        }
        Ok(Heatmap {
            prognostic_axis,
            index_axis,
            values,
        })
    }
}

fn axis(range: (f64, f64), count: usize) -> Result<Vec<f64>> {
    let (lo, hi) = range;
    if count == 0 || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::invalid("grid axes need a finite range and positive resolution"));
    }
    if count == 1 {
        return Ok(vec![lo]);
    }
    if !(lo < hi) {
        return Err(Error::invalid("grid range must satisfy low < high"));
    }
    let step = (hi - lo) / (count - 1) as f64;
    Ok((0..count)
        .map(|k| if k == count - 1 { hi } else { lo + k as f64 * step })
        .collect())
}
