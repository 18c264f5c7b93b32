//! `key = value` configuration files.
//!
//! Blank lines and text after `#` are ignored. Keys are case-sensitive and
//! may appear once. List values are comma-separated.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use dualscore_core::distill::{BoostParams, DistillConfig};
use dualscore_core::tuning::CvGrid;
use dualscore_core::{FitConfig, Kernel, Method};

use crate::error::{CliError, CliResult};
use crate::fsio::read_text;

/// Parsed entries with the line each came from.
#[derive(Debug, Clone, Default)]
pub struct KeyValues {
    entries: BTreeMap<String, (String, usize)>,
}

impl KeyValues {
    pub fn parse(text: &str) -> CliResult<Self> {
        let mut entries = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::usage(format!("line {line_no}: expected key = value")))?;
            let key = key.trim();
            if key.is_empty() {
                return Err(CliError::usage(format!("line {line_no}: empty key")));
            }
            if entries.insert(key.to_string(), (value.trim().to_string(), line_no)).is_some() {
                return Err(CliError::usage(format!("line {line_no}: duplicate key '{key}'")));
            }
        }
        Ok(KeyValues { entries })
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        Self::parse(&read_text(path)?).map_err(|e| e.context(path.display()))
    }

    /// Entries in key order.
    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.entries.iter().map(|(k, (v, _))| (k.as_str(), v.as_str()))
    }

    pub fn contains(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|(v, _)| v.as_str())
    }

    pub fn get<T: FromStr>(&self, key: &str) -> CliResult<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        match self.entries.get(key) {
            None => Ok(None),
            Some((v, line)) => v
                .parse::<T>()
                .map(Some)
                .map_err(|e| CliError::usage(format!("line {line}: bad value for '{key}': {e}"))),
        }
    }

    pub fn get_list<T: FromStr>(&self, key: &str) -> CliResult<Option<Vec<T>>>
    where
        T::Err: std::fmt::Display,
    {
        match self.entries.get(key) {
            None => Ok(None),
            Some((v, line)) => parse_list(v)
                .map(Some)
                .map_err(|e| CliError::usage(format!("line {line}: bad list for '{key}': {e}"))),
        }
    }

    /// Fails on the first key outside `known`.
    pub fn reject_unknown(&self, known: &[&str]) -> CliResult<()> {
        for (key, (_, line)) in &self.entries {
            if !known.contains(&key.as_str()) {
                return Err(CliError::usage(format!("line {line}: unknown key '{key}'")));
            }
        }
        Ok(())
    }
}

/// Comma-separated list; surrounding whitespace and empty items are ignored.
pub fn parse_list<T: FromStr>(text: &str) -> Result<Vec<T>, String>
where
    T::Err: std::fmt::Display,
{
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<T>().map_err(|e| format!("'{s}': {e}")))
        .collect()
}

pub const RUN_CONFIG_KEYS: &[&str] = &[
    "bandwidth",
    "lasso_penalty",
    "kernel",
    "optimizer",
    "optimizer_budget",
    "seed",
    "prob_clip",
    "h_grid",
    "lambda_grid",
    "cv_folds",
    "train_fraction",
    "output_dir",
    "threshold",
    "expert_rounds",
    "expert_max_depth",
    "expert_learning_rate",
    "expert_l2",
    "expert_min_leaf",
    "smote_neighbors",
    "smote_ratio",
    "scenario",
    "sizes",
    "reps",
    "methods",
    "de_budget",
    "tpe_budget",
    "random_budget",
];

/// Everything one config file can set for `fit`, `bootstrap`, `benchmark`
/// and `convergence`.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub fit: FitConfig,
    /// Bandwidth grid; cross-validation runs when either grid is given.
    pub h_grid: Option<Vec<f64>>,
    pub lambda_grid: Option<Vec<f64>>,
    pub cv_folds: usize,
    pub train_fraction: f64,
    pub output_dir: Option<PathBuf>,
    /// Probability cut-off for hard predictions.
    pub threshold: f64,
    pub distill: DistillConfig,
    pub scenario: Option<u32>,
    pub sizes: Vec<usize>,
    pub reps: usize,
    pub methods: Vec<Method>,
    /// Per-method optimizer budgets for benchmarks; `None` uses `fit.optimizer_budget`.
    pub de_budget: Option<usize>,
    pub tpe_budget: Option<usize>,
    pub random_budget: Option<usize>,
}

pub const DEFAULT_H_GRID: [f64; 6] = [0.15, 0.2, 0.25, 0.3, 0.35, 0.4];
pub const DEFAULT_LAMBDA_GRID: [f64; 5] = [1e-5, 1e-4, 1e-3, 1e-2, 1e-1];

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            fit: FitConfig::default(),
            h_grid: None,
            lambda_grid: None,
            cv_folds: 5,
            train_fraction: 0.9,
            output_dir: None,
            threshold: 0.5,
            distill: DistillConfig::default(),
            scenario: None,
            sizes: vec![100, 500, 1000],
            reps: 5,
            methods: vec![Method::De, Method::Tpe, Method::Random],
            de_budget: None,
            tpe_budget: None,
            random_budget: None,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        Self::from_key_values(&KeyValues::load(path)?).map_err(|e| e.context(path.display()))
    }

    pub fn parse(text: &str) -> CliResult<Self> {
        Self::from_key_values(&KeyValues::parse(text)?)
    }

    pub fn from_key_values(kv: &KeyValues) -> CliResult<Self> {
        kv.reject_unknown(RUN_CONFIG_KEYS)?;
        let mut c = RunConfig::default();
        let f = &mut c.fit;
        set(&mut f.bandwidth, kv.get("bandwidth")?);
        set(&mut f.lasso_penalty, kv.get("lasso_penalty")?);
        set(&mut f.kernel, kv.get::<Kernel>("kernel")?);
        set(&mut f.optimizer, kv.get::<Method>("optimizer")?);
        set(&mut f.optimizer_budget, kv.get("optimizer_budget")?);
        set(&mut f.seed, kv.get("seed")?);
        set(&mut f.prob_clip, kv.get("prob_clip")?);
        c.h_grid = kv.get_list("h_grid")?;
        c.lambda_grid = kv.get_list("lambda_grid")?;
        set(&mut c.cv_folds, kv.get("cv_folds")?);
        set(&mut c.train_fraction, kv.get("train_fraction")?);
        c.output_dir = kv.raw("output_dir").map(PathBuf::from);
        set(&mut c.threshold, kv.get("threshold")?);

        let d = &mut c.distill;
        d.seed = c.fit.seed;
        d.prob_clip = c.fit.prob_clip;
        let b: &mut BoostParams = &mut d.boost;
        set(&mut b.rounds, kv.get("expert_rounds")?);
        set(&mut b.max_depth, kv.get("expert_max_depth")?);
        set(&mut b.learning_rate, kv.get("expert_learning_rate")?);
        set(&mut b.l2, kv.get("expert_l2")?);
        set(&mut b.min_leaf, kv.get("expert_min_leaf")?);
        set(&mut d.smote_neighbors, kv.get("smote_neighbors")?);
        if let Some(r) = kv.raw("smote_ratio") {
            d.smote_ratio = if r.eq_ignore_ascii_case("none") {
                None
            } else {
                kv.get("smote_ratio")?
            };
        }

        c.scenario = kv.get("scenario")?;
        set(&mut c.sizes, kv.get_list("sizes")?);
        set(&mut c.reps, kv.get("reps")?);
        set(&mut c.methods, kv.get_list("methods")?);
        c.de_budget = kv.get("de_budget")?;
        c.tpe_budget = kv.get("tpe_budget")?;
        c.random_budget = kv.get("random_budget")?;
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> CliResult<()> {
        self.fit.validate().map_err(|e| CliError::usage(e.to_string()))?;
        self.distill.boost.validate().map_err(|e| CliError::usage(e.to_string()))?;
        for (name, grid) in [("h_grid", &self.h_grid), ("lambda_grid", &self.lambda_grid)] {
            if matches!(grid, Some(g) if g.is_empty()) {
                return Err(CliError::usage(format!("{name} must not be empty")));
            }
        }
        if self.cv_folds < 2 {
            return Err(CliError::usage("cv_folds must be at least 2"));
        }
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(CliError::usage("train_fraction must lie in (0, 1)"));
        }
        if !(0.0..=1.0).contains(&self.threshold) {
            return Err(CliError::usage("threshold must lie in [0, 1]"));
        }
        if self.distill.smote_neighbors == 0 {
            return Err(CliError::usage("smote_neighbors must be positive"));
        }
        if self.reps == 0 {
            return Err(CliError::usage("reps must be positive"));
        }
        if [self.de_budget, self.tpe_budget, self.random_budget].contains(&Some(0)) {
            return Err(CliError::usage("optimizer budgets must be positive"));
        }
        Ok(())
    }

    /// The cross-validation grid, present when either grid was configured.
    /// A missing grid takes its default values.
    pub fn cv_grid(&self) -> Option<CvGrid> {
        if self.h_grid.is_none() && self.lambda_grid.is_none() {
            return None;
        }
        Some(CvGrid {
            bandwidths: self.h_grid.clone().unwrap_or_else(|| DEFAULT_H_GRID.to_vec()),
            penalties: self.lambda_grid.clone().unwrap_or_else(|| DEFAULT_LAMBDA_GRID.to_vec()),
            folds: self.cv_folds,
            seed: self.fit.seed,
        })
    }

    /// Fit settings for one benchmark method.
    pub fn method_config(&self, method: Method) -> FitConfig {
        let budget = match method {
            Method::De => self.de_budget,
            Method::Tpe => self.tpe_budget,
            Method::Random => self.random_budget,
        };
        FitConfig {
            optimizer: method,
            optimizer_budget: budget.unwrap_or(self.fit.optimizer_budget),
            ..self.fit.clone()
        }
    }
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}
