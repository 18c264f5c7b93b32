//! Simulation sweeps: link-estimation convergence and optimizer benchmarks.
//!
//! Every `(n, rep)` cell draws fresh data from its own seed, derived from the
//! base seed, so cells can be rerun individually. Failing cells are recorded
//! and the sweep goes on.

use std::fmt::Write as _;
use std::time::Instant;

use dualscore_core::model::{fit, Heatmap};
use dualscore_core::rng::child_seed;
use dualscore_core::simulation::{g_mse, generate_scenario, SimulatedSample};
use dualscore_core::{stats, FitConfig, Method, ModelFit};

use crate::format::fmt_f64;

/// Grid size used for the link error metric.
pub const METRIC_GRID: usize = 512;

/// Seed of replicate `rep` at sample size `n`.
pub fn replicate_seed(base: u64, n: usize, rep: usize) -> u64 {
    child_seed(child_seed(base, n as u64), rep as u64)
}

#[derive(Debug, Clone)]
pub struct Replicate {
    pub sample: SimulatedSample,
    pub fit: ModelFit,
    pub g_mse: f64,
    /// Wall-clock seconds spent in `fit` alone.
    pub runtime_s: f64,
}

/// Generates one scenario sample and fits it with `config`, seeded by `seed`.
pub fn run_replicate(scenario: u32, n: usize, seed: u64, config: &FitConfig) -> dualscore_core::Result<Replicate> {
    let sample = generate_scenario(scenario, n, seed)?;
    let config = FitConfig {
        seed,
        ..config.clone()
    };
    let start = Instant::now();
    let model = fit(&sample.dataset, &config)?;
    let runtime_s = start.elapsed().as_secs_f64();
    let mse = g_mse(&model, &sample.truth, METRIC_GRID)?;
    Ok(Replicate {
        sample,
        fit: model,
        g_mse: mse,
        runtime_s,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRecord {
    pub n: usize,
    pub rep: usize,
    pub seed: u64,
    pub g_mse: f64,
    pub runtime_s: f64,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceSummary {
    pub n: usize,
    pub mean_mse: f64,
    pub std_mse: f64,
    pub succeeded: usize,
    pub failed: usize,
}

#[derive(Debug, Clone)]
pub struct ConvergenceRun {
    pub records: Vec<ConvergenceRecord>,
    /// Heatmap of the first successful replicate per size.
    pub heatmaps: Vec<(usize, Heatmap)>,
}

/// Fits `reps` fresh samples per size and records the link error of each.
pub fn convergence_experiment(
    scenario: u32,
    sizes: &[usize],
    reps: usize,
    config: &FitConfig,
    seed: u64,
    heatmap_resolution: (usize, usize),
) -> ConvergenceRun {
    let mut records = Vec::new();
    let mut heatmaps = Vec::new();
    for &n in sizes {
        let mut have_map = false;
        for rep in 0..reps {
            let s = replicate_seed(seed, n, rep);
            match run_replicate(scenario, n, s, config) {
                Ok(r) => {
                    if !have_map {
                        if let Ok(h) = replicate_heatmap(&r, heatmap_resolution) {
                            heatmaps.push((n, h));
                            have_map = true;
                        }
                    }
                    records.push(ConvergenceRecord {
                        n,
                        rep,
                        seed: s,
                        g_mse: r.g_mse,
                        runtime_s: r.runtime_s,
                        error: None,
                    });
                }
                Err(e) => records.push(ConvergenceRecord {
                    n,
                    rep,
                    seed: s,
                    g_mse: f64::NAN,
                    runtime_s: f64::NAN,
                    error: Some(e.to_string()),
                }),
            }
        }
    }
    ConvergenceRun { records, heatmaps }
}

/// Heatmap over the central 95% of the replicate's prognostic scores and
/// training index.
pub fn replicate_heatmap(r: &Replicate, resolution: (usize, usize)) -> dualscore_core::Result<Heatmap> {
    let ds = &r.sample.dataset;
    let mut prog = ds.features().mul_vec(r.fit.beta())?;
    prog.sort_by(f64::total_cmp);
    let mut idx = r.fit.train_index().to_vec();
    idx.sort_by(f64::total_cmp);
    let range = |v: &[f64]| {
        let lo = stats::quantile_sorted(v, 0.025);
        let hi = stats::quantile_sorted(v, 0.975);
        if hi > lo {
            (lo, hi)
        } else {
            (lo - 1.0, lo + 1.0)
        }
    };
    r.fit.heatmap_grid(range(&prog), range(&idx), resolution)
}

fn mean_sd(values: &[f64]) -> (f64, f64) {
    match values.len() {
        0 => (f64::NAN, f64::NAN),
        1 => (values[0], f64::NAN),
        _ => (stats::mean(values), stats::sample_sd(values)),
    }
}

pub fn summarize_convergence(records: &[ConvergenceRecord]) -> Vec<ConvergenceSummary> {
    let mut sizes: Vec<usize> = records.iter().map(|r| r.n).collect();
    sizes.dedup();
    sizes
        .into_iter()
        .map(|n| {
            let cell: Vec<&ConvergenceRecord> = records.iter().filter(|r| r.n == n).collect();
            let ok: Vec<f64> = cell.iter().filter(|r| r.error.is_none()).map(|r| r.g_mse).collect();
            let (mean_mse, std_mse) = mean_sd(&ok);
            ConvergenceSummary {
                n,
                mean_mse,
                std_mse,
                succeeded: ok.len(),
                failed: cell.len() - ok.len(),
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkRecord {
    pub method: Method,
    pub n: usize,
    pub rep: usize,
    pub runtime_s: f64,
    pub objective: f64,
    pub heatmap_mse: f64,
    pub error: Option<String>,
}

/// Mean and sample standard deviation of each metric over successful reps.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkSummary {
    pub method: Method,
    pub n: usize,
    pub runtime: (f64, f64),
    pub objective: (f64, f64),
    pub heatmap_mse: (f64, f64),
    pub succeeded: usize,
    pub failed: usize,
}

/// Runs every method on the same `(n, rep)` samples.
pub fn benchmark_optimizers(
    scenario: u32,
    sizes: &[usize],
    reps: usize,
    configs: &[(Method, FitConfig)],
    seed: u64,
) -> Vec<BenchmarkRecord> {
    let mut out = Vec::new();
    for &n in sizes {
        for &(method, ref config) in configs {
            for rep in 0..reps {
                let s = replicate_seed(seed, n, rep);
                out.push(match run_replicate(scenario, n, s, config) {
                    Ok(r) => BenchmarkRecord {
                        method,
                        n,
                        rep,
                        runtime_s: r.runtime_s,
                        objective: r.fit.objective_value(),
                        heatmap_mse: r.g_mse,
                        error: None,
                    },
                    Err(e) => BenchmarkRecord {
                        method,
                        n,
                        rep,
                        runtime_s: f64::NAN,
                        objective: f64::NAN,
                        heatmap_mse: f64::NAN,
                        error: Some(e.to_string()),
                    },
                });
            }
        }
    }
    out
}

pub fn summarize_benchmark(records: &[BenchmarkRecord]) -> Vec<BenchmarkSummary> {
    let mut cells: Vec<(Method, usize)> = Vec::new();
    for r in records {
        if !cells.contains(&(r.method, r.n)) {
            cells.push((r.method, r.n));
        }
    }
    cells
        .into_iter()
        .map(|(method, n)| {
            let cell: Vec<&BenchmarkRecord> = records.iter().filter(|r| r.method == method && r.n == n).collect();
            let ok: Vec<&&BenchmarkRecord> = cell.iter().filter(|r| r.error.is_none()).collect();
            let col = |f: fn(&BenchmarkRecord) -> f64| mean_sd(&ok.iter().map(|r| f(r)).collect::<Vec<_>>());
            BenchmarkSummary {
                method,
                n,
                runtime: col(|r| r.runtime_s),
                objective: col(|r| r.objective),
                heatmap_mse: col(|r| r.heatmap_mse),
                succeeded: ok.len(),
                failed: cell.len() - ok.len(),
            }
        })
        .collect()
}

fn error_field(e: &Option<String>) -> String {
    e.as_deref().unwrap_or("").replace([',', '\n', '"'], " ")
}

pub fn convergence_runs_csv(records: &[ConvergenceRecord]) -> String {
    let mut s = String::from("n,rep,seed,mse,runtime_s,error\n");
    for r in records {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{}",
            r.n,
            r.rep,
            r.seed,
            fmt_f64(r.g_mse),
            fmt_f64(r.runtime_s),
            error_field(&r.error)
        );
    }
    s
}

pub fn convergence_summary_csv(rows: &[ConvergenceSummary]) -> String {
    let mut s = String::from("n,mean_mse,std_mse,succeeded,failed\n");
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{}",
            r.n,
            fmt_f64(r.mean_mse),
            fmt_f64(r.std_mse),
            r.succeeded,
            r.failed
        );
    }
    s
}

pub fn benchmark_runs_csv(records: &[BenchmarkRecord]) -> String {
    let mut s = String::from("method,n,rep,runtime_s,objective,heatmap_mse,error\n");
    for r in records {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{}",
            r.method,
            r.n,
            r.rep,
            fmt_f64(r.runtime_s),
            fmt_f64(r.objective),
            fmt_f64(r.heatmap_mse),
            error_field(&r.error)
        );
    }
    s
}

/// One row per `(method, n)` with `mean ± sd` cells for runtime, objective
/// and heatmap error.
pub fn benchmark_summary_csv(rows: &[BenchmarkSummary]) -> String {
    let pm = |(m, sd): (f64, f64)| format!("{m:.4} ± {sd:.4}");
    let mut s = String::from("method,n,runtime_s,objective,heatmap_mse,succeeded,failed\n");
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{}",
            r.method,
            r.n,
            pm(r.runtime),
            pm(r.objective),
            pm(r.heatmap_mse),
            r.succeeded,
            r.failed
        );
    }
    s
}
