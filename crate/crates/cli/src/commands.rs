//! Subcommand implementations.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::seq::SliceRandom;

use dualscore_core::bootstrap::bootstrap_ci;
use dualscore_core::distill::{auc, classification_metrics, distill, expert_inputs, expert_probabilities, ExpertModel};
use dualscore_core::model::{fit, DEFAULT_TREATMENT_GRID};
use dualscore_core::rng::{self, Stream};
use dualscore_core::simulation::{g_mse, generate_scenario, Scenario};
use dualscore_core::tuning::{cross_validate, CvOutcome};
use dualscore_core::{Dataset, FitConfig, Method, ModelFit};

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::experiment::{self, METRIC_GRID};
use crate::format::{self, fmt_f64};
use crate::fsio::{read_text, write_atomic};
use crate::table::{self, ColumnSpec, MissingPolicy, RawTable, Role, SchemaSpec, Transform};

pub fn info(msg: impl AsRef<str>) {
    eprintln!("info\t{}", msg.as_ref());
}

pub fn warn(msg: impl AsRef<str>) {
    eprintln!("warning\t{}", msg.as_ref());
}

fn write_text(path: &Path, text: &str) -> CliResult<()> {
    write_atomic(path, text.as_bytes())?;
    info(format!("wrote {}", path.display()));
    Ok(())
}

/// `key<TAB>value` lines.
fn kv_lines(pairs: &[(&str, String)]) -> String {
    let mut s = String::new();
    for (k, v) in pairs {
        let _ = writeln!(s, "{k}\t{v}");
    }
    s
}

pub fn simulate(scenario: u32, n: usize, seed: u64, out: &Path) -> CliResult<()> {
    let sample = generate_scenario(scenario, n, seed)?;
    let scenario = sample.truth.scenario;
    let p = scenario.dimension();
    let mut columns: Vec<ColumnSpec> = sample
        .dataset
        .feature_names()
        .iter()
        .enumerate()
        .map(|(j, name)| {
            let binary = scenario == Scenario::Multimodal && j >= 12;
            ColumnSpec {
                name: name.clone(),
                role: if binary { Role::Binary } else { Role::Continuous },
                missing: MissingPolicy::DropRow,
                no_scale: !binary,
            }
        })
        .collect();
    for (name, role) in [("treatment", Role::Treatment), ("soft_prob", Role::SoftLabel), ("label", Role::Outcome)] {
        columns.push(ColumnSpec {
            name: name.into(),
            role,
            missing: MissingPolicy::DropRow,
            no_scale: false,
        });
    }
    debug_assert_eq!(columns.len(), p + 3);
    let schema = SchemaSpec::new(columns)?;
    write_text(&out.join("data.csv"), &format::render_dataset_csv(&sample.dataset)?)?;
    write_text(&out.join("truth.txt"), &format::render_truth(&sample.truth))?;
    write_text(&out.join("schema.txt"), &schema.render())?;
    Ok(())
}

/// Soft-labelled training data ready for fitting, plus what produced it.
#[derive(Debug)]
pub struct Prepared {
    pub train: Dataset,
    pub test: Option<Dataset>,
    pub transform: Transform,
    pub expert: Option<ExpertModel>,
    pub synthetic_rows: usize,
    pub cv: Option<CvOutcome>,
    /// `config.fit` with the cross-validated bandwidth and penalty.
    pub fit_config: FitConfig,
}

/// Seeded shuffle split. A test part of fewer than 2 rows is folded into
/// the training part.
pub fn split_rows(n: usize, train_fraction: f64, seed: u64) -> (Vec<usize>, Vec<usize>) {
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut rng::stream(seed, Stream::Split));
    let mut n_train = ((train_fraction * n as f64).round() as usize).clamp(n.min(2), n);
    if n - n_train < 2 {
        n_train = n;
    }
    let test = idx.split_off(n_train);
    (idx, test)
}

/// Preprocessing, distillation when soft labels are absent, and
/// cross-validation when grids are configured. Without `split` every row
/// trains.
pub fn prepare(table: &RawTable, config: &RunConfig, split: bool) -> CliResult<Prepared> {
    let (train_rows, test_rows) = if split {
        split_rows(table.rows, config.train_fraction, config.fit.seed)
    } else {
        ((0..table.rows).collect(), Vec::new())
    };
    let (transform, warnings) = Transform::fit(table, &train_rows)?;
    warnings.iter().for_each(warn);
    let (mut train, w) = transform.apply(table, &train_rows)?;
    w.iter().for_each(warn);
    let mut test = if test_rows.is_empty() {
        None
    } else {
        let (d, w) = transform.apply(table, &test_rows)?;
        w.iter().for_each(warn);
        Some(d)
    };
    info(format!("{} training rows, {} test rows, {} features", train.n(), test.as_ref().map_or(0, Dataset::n), train.p()));

    let mut expert = None;
    let mut synthetic_rows = 0;
    if train.soft_probs().is_some() {
        info("soft labels present; skipping distillation");
    } else {
        let d = distill(&train, &config.distill)?;
        info(format!(
            "distillation: expert trained on {} rows ({} synthetic); soft labels attached to {} original rows",
            train.n() + d.synthetic_rows,
            d.synthetic_rows,
            train.n()
        ));
        synthetic_rows = d.synthetic_rows;
        train = d.dataset;
        if let Some(t) = test.take() {
            test = Some(dualscore_core::distill::soft_label_dataset(&t, &d.expert, config.fit.prob_clip)?);
        }
        expert = Some(d.expert);
    }

    let mut fit_config = config.fit.clone();
    let cv = match config.cv_grid() {
        Some(grid) => {
            let outcome = cross_validate(&train, &config.fit, &grid)?;
            if outcome.small_folds {
                warn("some cross-validation training folds have fewer than 2p rows");
            }
            info(format!(
                "cross-validation selected bandwidth {} and penalty {}",
                outcome.best_bandwidth, outcome.best_penalty
            ));
            fit_config.bandwidth = outcome.best_bandwidth;
            fit_config.lasso_penalty = outcome.best_penalty;
            Some(outcome)
        }
        None => None,
    };
    Ok(Prepared {
        train,
        test,
        transform,
        expert,
        synthetic_rows,
        cv,
        fit_config,
    })
}

fn cv_table_csv(cv: &CvOutcome) -> String {
    let mut s = String::from("bandwidth,lasso_penalty,mean_error,fold_errors\n");
    for c in &cv.table {
        let folds: Vec<String> = c.fold_errors.iter().map(|&e| fmt_f64(e)).collect();
        let _ = writeln!(
            s,
            "{},{},{},{}",
            fmt_f64(c.bandwidth),
            fmt_f64(c.lasso_penalty),
            fmt_f64(c.mean_error),
            folds.join(";")
        );
    }
    s
}

fn load_table(data: &Path, schema: &Path) -> CliResult<RawTable> {
    let schema = SchemaSpec::load(schema)?;
    let table = table::load_csv(data, &schema)?;
    info(format!("loaded {}: {}", data.display(), table.summary()));
    if !table.unused_columns.is_empty() {
        info(format!("ignored columns not in the schema: {}", table.unused_columns.join(", ")));
    }
    Ok(table)
}

fn load_config(path: Option<&Path>) -> CliResult<RunConfig> {
    path.map_or_else(|| Ok(RunConfig::default()), RunConfig::load)
}

/// Student probabilities for every row of `ds`.
pub fn student_probabilities(model: &ModelFit, ds: &Dataset) -> CliResult<Vec<f64>> {
    (0..ds.n())
        .map(|i| Ok(model.predict(ds.features().row(i), ds.treatment()[i])?.prob))
        .collect()
}

fn metric_pairs(prefix: &str, labels: &[u8], probs: &[f64], threshold: f64) -> CliResult<Vec<(String, String)>> {
    let m = classification_metrics(labels, probs, threshold)?;
    Ok(vec![
        (format!("{prefix}precision"), fmt_f64(m.precision)),
        (format!("{prefix}recall"), fmt_f64(m.recall)),
        (format!("{prefix}f1"), fmt_f64(m.f1)),
        (format!("{prefix}auc"), m.auc.map_or_else(|| "NA".into(), fmt_f64)),
    ])
}

pub fn fit_command(data: &Path, schema: &Path, config: Option<&Path>, out: Option<&Path>) -> CliResult<()> {
    let config = load_config(config)?;
    let out: PathBuf = out
        .map(Path::to_path_buf)
        .or_else(|| config.output_dir.clone())
        .ok_or_else(|| CliError::usage("no output directory: pass --out or set output_dir"))?;
    let table = load_table(data, schema)?;
    let prep = prepare(&table, &config, true)?;

    let start = Instant::now();
    let model = fit(&prep.train, &prep.fit_config)?;
    let runtime = start.elapsed().as_secs_f64();
    let diag = model.diagnostics();
    info(format!(
        "fit: objective {} after {} evaluations in {runtime:.3} s",
        fmt_f64(model.objective_value()),
        diag.evaluations
    ));
    if diag.rank_deficient {
        warn("the profiled design was rank deficient; the minimum-norm coefficients were used");
    }

    let mut pairs: Vec<(String, String)> = vec![
        ("train_rows".into(), prep.train.n().to_string()),
        ("test_rows".into(), prep.test.as_ref().map_or(0, Dataset::n).to_string()),
        ("features".into(), prep.train.p().to_string()),
        ("distilled".into(), prep.expert.is_some().to_string()),
        ("synthetic_rows".into(), prep.synthetic_rows.to_string()),
        ("cross_validated".into(), prep.cv.is_some().to_string()),
        ("bandwidth".into(), fmt_f64(model.bandwidth())),
        ("lasso_penalty".into(), fmt_f64(prep.fit_config.lasso_penalty)),
        ("optimizer".into(), prep.fit_config.optimizer.to_string()),
        ("evaluations".into(), diag.evaluations.to_string()),
        ("objective_value".into(), fmt_f64(model.objective_value())),
        ("rank_deficient".into(), diag.rank_deficient.to_string()),
        ("fallback_rows".into(), diag.fallback_rows.to_string()),
        ("runtime_s".into(), fmt_f64(runtime)),
    ];
    if let Some(test) = &prep.test {
        if let Some(labels) = test.hard_labels() {
            if labels.contains(&0) && labels.contains(&1) {
                let probs = student_probabilities(&model, test)?;
                pairs.extend(metric_pairs("test_student_", labels, &probs, config.threshold)?);
                if let Some(expert) = &prep.expert {
                    let ep = expert_probabilities(expert, &expert_inputs(test))?;
                    pairs.push(("test_expert_auc".into(), fmt_f64(auc(labels, &ep)?)));
                }
            } else {
                warn("test labels contain a single class; classification metrics skipped");
            }
        }
    }

    write_text(&out.join("model.txt"), &format::render_model(&model)?)?;
    write_text(&out.join("transform.txt"), &prep.transform.render()?)?;
    if let Some(expert) = &prep.expert {
        write_text(&out.join("expert.txt"), &format::render_expert(expert))?;
    }
    if let Some(cv) = &prep.cv {
        write_text(&out.join("cv.csv"), &cv_table_csv(cv))?;
    }
    let refs: Vec<(&str, String)> = pairs.iter().map(|(k, v)| (k.as_str(), v.clone())).collect();
    write_text(&out.join("diagnostics.txt"), &kv_lines(&refs))?;
    Ok(())
}

pub fn load_model(path: &Path) -> CliResult<ModelFit> {
    format::parse_model(&read_text(path)?).map_err(|e| e.context(path.display()))
}

fn load_transform(path: &Path) -> CliResult<Transform> {
    Transform::parse(&read_text(path)?).map_err(|e| e.context(path.display()))
}

pub fn evaluate_truth(model: &Path, truth: &Path) -> CliResult<String> {
    let model = load_model(model)?;
    let truth = format::parse_truth(&read_text(truth)?).map_err(|e| e.context(truth.display()))?;
    if truth.p() != model.p() {
        return Err(CliError::data(format!("model has {} features, truth has {}", model.p(), truth.p())));
    }
    let mse = g_mse(&model, &truth, METRIC_GRID)?;
    let beta_err = model
        .beta()
        .iter()
        .zip(&truth.beta)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    Ok(kv_lines(&[
        ("g_mse", fmt_f64(mse)),
        ("xi_abs_cosine", fmt_f64(model.xi().abs_cosine(&truth.xi))),
        ("beta_l2_error", fmt_f64(beta_err)),
    ]))
}

pub fn evaluate_data(
    model: &Path,
    data: &Path,
    schema: &Path,
    transform: Option<&Path>,
    threshold: f64,
) -> CliResult<String> {
    let model = load_model(model)?;
    let table = load_table(data, schema)?;
    let all: Vec<usize> = (0..table.rows).collect();
    let transform = match transform {
        Some(p) => load_transform(p)?,
        None => {
            warn("no transform record given; preprocessing is fitted on the evaluation data");
            let (t, w) = Transform::fit(&table, &all)?;
            w.iter().for_each(warn);
            t
        }
    };
    let (ds, w) = transform.apply(&table, &all)?;
    w.iter().for_each(warn);
    if ds.feature_names() != model.parts().feature_names.as_slice() {
        return Err(CliError::data("data features do not match the model's features"));
    }
    let labels = ds
        .hard_labels()
        .ok_or_else(|| CliError::data("evaluation data has no outcome column"))?;
    let probs = student_probabilities(&model, &ds)?;
    let mut pairs = vec![("rows".to_string(), ds.n().to_string())];
    pairs.extend(metric_pairs("", labels, &probs, threshold)?);
    let refs: Vec<(&str, String)> = pairs.iter().map(|(k, v)| (k.as_str(), v.clone())).collect();
    Ok(kv_lines(&refs))
}

pub fn heatmap_command(
    model: &Path,
    out: &Path,
    rows: usize,
    cols: usize,
    prognostic_range: (f64, f64),
    index_range: Option<(f64, f64)>,
) -> CliResult<()> {
    let model = load_model(model)?;
    let index_range = match index_range {
        Some(r) => r,
        None => {
            let mut z = model.train_index().to_vec();
            z.sort_by(f64::total_cmp);
            (
                dualscore_core::stats::quantile_sorted(&z, 0.025),
                dualscore_core::stats::quantile_sorted(&z, 0.975),
            )
        }
    };
    let h = model.heatmap_grid(prognostic_range, index_range, (rows, cols))?;
    write_text(out, &format::render_heatmap(&h))
}

pub fn bootstrap_command(
    data: &Path,
    schema: &Path,
    config: Option<&Path>,
    k: usize,
    level: f64,
    out: Option<&Path>,
) -> CliResult<String> {
    let config = load_config(config)?;
    if k < 2 {
        return Err(CliError::usage("--k must be at least 2"));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(CliError::usage("--level must lie in (0, 1)"));
    }
    let table = load_table(data, schema)?;
    let prep = prepare(&table, &config, false)?;
    let summary = bootstrap_ci(&prep.train, &prep.fit_config, k, level)?;
    if summary.failures > 0 {
        warn(format!("{} of {} bootstrap refits failed and were skipped", summary.failures, k));
    }
    let names = prep.train.feature_names();
    let mut s = String::from("parameter,index,feature,estimate,low,high\n");
    for (label, rows) in [("beta", &summary.beta), ("xi", &summary.xi)] {
        for (j, ci) in rows.iter().enumerate() {
            let _ = writeln!(
                s,
                "{label},{j},{},{},{},{}",
                csv_field(&names[j]),
                fmt_f64(ci.estimate),
                fmt_f64(ci.low),
                fmt_f64(ci.high)
            );
        }
    }
    if let Some(path) = out {
        write_text(path, &s)?;
    }
    Ok(s)
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub struct SweepArgs<'a> {
    pub scenario: Option<u32>,
    pub sizes: Option<Vec<usize>>,
    pub reps: Option<usize>,
    pub seed: Option<u64>,
    pub config: Option<&'a Path>,
    pub out: Option<&'a Path>,
}

struct Sweep {
    scenario: u32,
    sizes: Vec<usize>,
    reps: usize,
    seed: u64,
    config: RunConfig,
    out: Option<PathBuf>,
}

fn resolve_sweep(args: SweepArgs<'_>) -> CliResult<Sweep> {
    let config = load_config(args.config)?;
    let scenario = args
        .scenario
        .or(config.scenario)
        .ok_or_else(|| CliError::usage("no scenario: pass --scenario or set scenario"))?;
    Scenario::from_id(scenario).map_err(|e| CliError::usage(e.to_string()))?;
    let sizes = args.sizes.unwrap_or_else(|| config.sizes.clone());
    if sizes.is_empty() {
        return Err(CliError::usage("no sample sizes given"));
    }
    let reps = args.reps.unwrap_or(config.reps);
    if reps == 0 {
        return Err(CliError::usage("--reps must be positive"));
    }
    Ok(Sweep {
        scenario,
        sizes,
        reps,
        seed: args.seed.unwrap_or(config.fit.seed),
        out: args.out.map(Path::to_path_buf).or_else(|| config.output_dir.clone()),
        config,
    })
}

pub fn benchmark_command(args: SweepArgs<'_>, methods: Option<Vec<Method>>) -> CliResult<String> {
    let sweep = resolve_sweep(args)?;
    let methods = methods.unwrap_or_else(|| sweep.config.methods.clone());
    if methods.is_empty() {
        return Err(CliError::usage("no methods given"));
    }
    let configs: Vec<(Method, FitConfig)> = methods.iter().map(|&m| (m, sweep.config.method_config(m))).collect();
    let records = experiment::benchmark_optimizers(sweep.scenario, &sweep.sizes, sweep.reps, &configs, sweep.seed);
    for r in records.iter().filter(|r| r.error.is_some()) {
        warn(format!("{} n={} rep={}: {}", r.method, r.n, r.rep, r.error.as_deref().unwrap_or("")));
    }
    let summary = experiment::benchmark_summary_csv(&experiment::summarize_benchmark(&records));
    if let Some(dir) = &sweep.out {
        write_text(&dir.join("benchmark_runs.csv"), &experiment::benchmark_runs_csv(&records))?;
        write_text(&dir.join("benchmark_summary.csv"), &summary)?;
    }
    Ok(summary)
}

pub fn convergence_command(args: SweepArgs<'_>, resolution: (usize, usize)) -> CliResult<String> {
    let sweep = resolve_sweep(args)?;
    let run = experiment::convergence_experiment(
        sweep.scenario,
        &sweep.sizes,
        sweep.reps,
        &sweep.config.fit,
        sweep.seed,
        resolution,
    );
    for r in run.records.iter().filter(|r| r.error.is_some()) {
        warn(format!("n={} rep={}: {}", r.n, r.rep, r.error.as_deref().unwrap_or("")));
    }
    let summary = experiment::convergence_summary_csv(&experiment::summarize_convergence(&run.records));
    if let Some(dir) = &sweep.out {
        write_text(&dir.join("convergence_runs.csv"), &experiment::convergence_runs_csv(&run.records))?;
        write_text(&dir.join("convergence_summary.csv"), &summary)?;
        for (n, h) in &run.heatmaps {
            write_text(
                &dir.join(format!("heatmap_s{}_n{n}.csv", sweep.scenario)),
                &format::render_heatmap(h),
            )?;
        }
    }
    Ok(summary)
}

/// Parses one CSV record of subject values.
fn parse_subject(row: &str) -> CliResult<Vec<String>> {
    let mut reader = csv::ReaderBuilder::new().has_headers(false).from_reader(row.as_bytes());
    let record = reader
        .records()
        .next()
        .ok_or_else(|| CliError::usage("--subject is empty"))?
        .map_err(|e| CliError::usage(format!("--subject: {e}")))?;
    Ok(record.iter().map(|s| s.trim().to_string()).collect())
}

pub fn recommend_command(
    model: &Path,
    subject: &str,
    tau_range: (f64, f64),
    grid: usize,
    transform: Option<&Path>,
) -> CliResult<String> {
    let model = load_model(model)?;
    let values = parse_subject(subject)?;
    let x: Vec<f64> = match transform {
        None => values
            .iter()
            .map(|v| format::parse_f64(v).map_err(CliError::usage))
            .collect::<CliResult<_>>()?,
        Some(p) => {
            let t = load_transform(p)?;
            let sources = t.source_columns();
            if values.len() != sources.len() {
                return Err(CliError::usage(format!(
                    "--subject has {} values; the transform expects {} ({})",
                    values.len(),
                    sources.len(),
                    sources.join(",")
                )));
            }
            let lookup = |name: &str| -> CliResult<String> {
                let k = sources.iter().position(|s| *s == name).expect("source column");
                Ok(values[k].clone())
            };
            let mut warnings = Vec::new();
            let x = t.apply_values(&lookup, &mut warnings)?;
            warnings.iter().for_each(warn);
            x
        }
    };
    if x.len() != model.p() {
        return Err(CliError::usage(format!("--subject has {} features; the model expects {}", x.len(), model.p())));
    }
    let scores = model.dual_scores(&x)?;
    let best = model.optimal_treatment(&x, tau_range.0, tau_range.1, grid)?;
    let log_odds = scores.prognostic + best.g_at_star;
    Ok(kv_lines(&[
        ("prognostic_score", fmt_f64(scores.prognostic)),
        ("interaction_score", fmt_f64(scores.interaction)),
        ("tau_star", fmt_f64(best.tau_star)),
        ("g_at_tau_star", fmt_f64(best.g_at_star)),
        ("log_odds_at_tau_star", fmt_f64(log_odds)),
        ("prob_at_tau_star", fmt_f64(dualscore_core::stats::sigmoid(log_odds))),
    ]))
}

pub const DEFAULT_RECOMMEND_GRID: usize = DEFAULT_TREATMENT_GRID;
