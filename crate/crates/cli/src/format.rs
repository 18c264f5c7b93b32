//! Versioned text formats.
//!
//! Model, expert and truth files start with a `# dualscore-<kind> v1` line
//! followed by tab-separated records whose first field is a label. Reals are
//! written as the shortest decimal that parses back to the same `f64`.

use std::fmt::Write as _;

use dualscore_core::distill::{ExpertModel, Node, Tree};
use dualscore_core::model::{FitParts, Heatmap};
use dualscore_core::simulation::{Scenario, ScenarioTruth};
use dualscore_core::{Dataset, IndexVector, Kernel, ModelFit};

use crate::error::{CliError, CliResult};

pub const MODEL_HEADER: &str = "# dualscore-model v1";
pub const EXPERT_HEADER: &str = "# dualscore-expert v1";
pub const TRUTH_HEADER: &str = "# dualscore-truth v1";

/// Shortest round-trip decimal, with an exponent for very large or small
/// magnitudes.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}

pub fn parse_f64(s: &str) -> Result<f64, String> {
    s.trim().parse::<f64>().map_err(|_| format!("cannot parse '{s}' as a number"))
}

fn join(values: &[f64]) -> String {
    values.iter().map(|&v| fmt_f64(v)).collect::<Vec<_>>().join("\t")
}

/// Labeled records of a versioned file, in file order.
struct Records<'a> {
    kind: &'static str,
    lines: Vec<(usize, Vec<&'a str>)>,
    next: usize,
}

impl<'a> Records<'a> {
    fn new(text: &'a str, header: &str, kind: &'static str) -> CliResult<Self> {
        let mut it = text.lines();
        match it.next() {
            Some(h) if h.trim_end() == header => {}
            Some(h) if h.starts_with(&header[..header.len() - 1]) => {
                return Err(CliError::data(format!("unsupported {kind} format version '{}'", h.trim())))
            }
            _ => return Err(CliError::data(format!("not a {kind} file: expected header '{header}'"))),
        }
        let lines = it
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty())
            .map(|(k, l)| (k + 2, l.split('\t').collect()))
            .collect();
        Ok(Records { kind, lines, next: 0 })
    }

    fn err(&self, line: usize, msg: impl std::fmt::Display) -> CliError {
        CliError::data(format!("{} file line {line}: {msg}", self.kind))
    }

    /// The next record, which must carry `label`; returns its fields.
    fn expect(&mut self, label: &str) -> CliResult<(usize, Vec<&'a str>)> {
        let Some((line, fields)) = self.lines.get(self.next).cloned() else {
            return Err(CliError::data(format!("{} file: missing '{label}' record", self.kind)));
        };
        if fields[0] != label {
            return Err(self.err(line, format!("expected '{label}', found '{}'", fields[0])));
        }
        self.next += 1;
        Ok((line, fields[1..].to_vec()))
    }

    fn reals(&mut self, label: &str) -> CliResult<Vec<f64>> {
        let (line, fields) = self.expect(label)?;
        fields
            .iter()
            .map(|f| parse_f64(f).map_err(|e| self.err(line, e)))
            .collect()
    }

    fn real(&mut self, label: &str) -> CliResult<f64> {
        let (line, fields) = self.expect(label)?;
        if fields.len() != 1 {
            return Err(self.err(line, format!("'{label}' takes one value")));
        }
        parse_f64(fields[0]).map_err(|e| self.err(line, e))
    }

    fn integer(&mut self, label: &str) -> CliResult<usize> {
        let (line, fields) = self.expect(label)?;
        match fields.as_slice() {
            [v] => v.parse().map_err(|_| self.err(line, format!("bad integer '{v}'"))),
            _ => Err(self.err(line, format!("'{label}' takes one value"))),
        }
    }

    fn word(&mut self, label: &str) -> CliResult<&'a str> {
        let (line, fields) = self.expect(label)?;
        match fields.as_slice() {
            [v] => Ok(v),
            _ => Err(self.err(line, format!("'{label}' takes one value"))),
        }
    }

    fn finish(&self) -> CliResult<()> {
        match self.lines.get(self.next) {
            Some((line, _)) => Err(self.err(*line, "unexpected trailing record")),
            None => Ok(()),
        }
    }
}

pub fn render_model(fit: &ModelFit) -> CliResult<String> {
    let p = fit.parts();
    if p.feature_names.iter().any(|n| n.contains(['\t', '\n', '\r'])) {
        return Err(CliError::data("feature names cannot contain tabs or newlines"));
    }
    let mut out = String::new();
    let _ = writeln!(out, "{MODEL_HEADER}");
    let _ = writeln!(out, "kernel\t{}", p.kernel.name());
    let _ = writeln!(out, "bandwidth\t{}", fmt_f64(p.bandwidth));
    let _ = writeln!(out, "lasso_penalty\t{}", fmt_f64(p.lasso_penalty));
    let _ = writeln!(out, "index_scale\t{}", fmt_f64(p.index_scale));
    let _ = writeln!(out, "objective_value\t{}", fmt_f64(p.objective_value));
    let _ = writeln!(out, "feature_names\t{}", p.feature_names.join("\t"));
    let _ = writeln!(out, "beta\t{}", join(&p.beta));
    let _ = writeln!(out, "xi\t{}", join(p.xi.as_slice()));
    let _ = writeln!(out, "train_index\t{}", join(&p.train_index));
    let _ = writeln!(out, "link_residuals\t{}", join(&p.link_residuals));
    Ok(out)
}

pub fn parse_model(text: &str) -> CliResult<ModelFit> {
    let mut r = Records::new(text, MODEL_HEADER, "model")?;
    let kernel: Kernel = r.word("kernel")?.parse()?;
    let bandwidth = r.real("bandwidth")?;
    let lasso_penalty = r.real("lasso_penalty")?;
    let index_scale = r.real("index_scale")?;
    let objective_value = r.real("objective_value")?;
    let feature_names = r.expect("feature_names")?.1.iter().map(|s| s.to_string()).collect();
    let beta = r.reals("beta")?;
    let xi = IndexVector::from_unit(r.reals("xi")?)?;
    let train_index = r.reals("train_index")?;
    let link_residuals = r.reals("link_residuals")?;
    r.finish()?;
    Ok(ModelFit::from_parts(FitParts {
        beta,
        xi,
        train_index,
        link_residuals,
        bandwidth,
        kernel,
        lasso_penalty,
        index_scale,
        objective_value,
        feature_names,
    })?)
}

pub fn render_expert(model: &ExpertModel) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{EXPERT_HEADER}");
    let _ = writeln!(out, "base_score\t{}", fmt_f64(model.base_score()));
    let _ = writeln!(out, "learning_rate\t{}", fmt_f64(model.learning_rate()));
    let _ = writeln!(out, "feature_count\t{}", model.feature_count());
    let _ = writeln!(out, "trees\t{}", model.trees().len());
    for (t, tree) in model.trees().iter().enumerate() {
        let _ = writeln!(out, "tree\t{t}\t{}", tree.nodes().len());
        for node in tree.nodes() {
            match node {
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    let _ = writeln!(out, "split\t{feature}\t{}\t{left}\t{right}", fmt_f64(*threshold));
                }
                Node::Leaf { value } => {
                    let _ = writeln!(out, "leaf\t{}", fmt_f64(*value));
                }
            }
        }
    }
    out
}

pub fn parse_expert(text: &str) -> CliResult<ExpertModel> {
    let mut r = Records::new(text, EXPERT_HEADER, "expert")?;
    let base_score = r.real("base_score")?;
    let learning_rate = r.real("learning_rate")?;
    let feature_count = r.integer("feature_count")?;
    let count = r.integer("trees")?;
    let mut trees = Vec::with_capacity(count);
    for t in 0..count {
        let (line, fields) = r.expect("tree")?;
        let size: usize = match fields.as_slice() {
            [idx, size] if idx.parse() == Ok(t) => size.parse().map_err(|_| r.err(line, "bad node count"))?,
            _ => return Err(r.err(line, format!("expected record 'tree {t} <nodes>'"))),
        };
        let mut nodes = Vec::with_capacity(size);
        for _ in 0..size {
            let Some((line, f)) = r.lines.get(r.next).cloned() else {
                return Err(CliError::data("expert file: truncated tree"));
            };
            r.next += 1;
            let int = |s: &str| s.parse::<usize>().map_err(|_| r.err(line, format!("bad integer '{s}'")));
            let real = |s: &str| parse_f64(s).map_err(|e| r.err(line, e));
            nodes.push(match f.as_slice() {
                ["split", feature, threshold, left, right] => Node::Split {
                    feature: int(feature)?,
                    threshold: real(threshold)?,
                    left: int(left)?,
                    right: int(right)?,
                },
                ["leaf", value] => Node::Leaf { value: real(value)? },
                _ => return Err(r.err(line, "expected a split or leaf record")),
            });
        }
        trees.push(Tree::from_nodes(nodes, feature_count).map_err(|e| r.err(line, e))?);
    }
    r.finish()?;
    Ok(ExpertModel::new(base_score, learning_rate, feature_count, trees)?)
}

pub fn render_truth(truth: &ScenarioTruth) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{TRUTH_HEADER}");
    let _ = writeln!(out, "scenario\t{}", truth.scenario.id());
    let _ = writeln!(out, "beta\t{}", join(&truth.beta));
    let _ = writeln!(out, "xi\t{}", join(truth.xi.as_slice()));
    out
}

pub fn parse_truth(text: &str) -> CliResult<ScenarioTruth> {
    let mut r = Records::new(text, TRUTH_HEADER, "truth")?;
    let scenario = Scenario::from_id(r.integer("scenario")? as u32)?;
    let beta = r.reals("beta")?;
    let xi = IndexVector::from_unit(r.reals("xi")?)?;
    r.finish()?;
    Ok(ScenarioTruth::new(scenario, beta, xi)?)
}

/// Comma-separated grid: a `prognostic_axis` line with the row coordinates,
/// an `index_axis` line with the column coordinates, then one line of
/// log-odds per row.
pub fn render_heatmap(h: &Heatmap) -> String {
    let line = |label: &str, v: &[f64]| {
        let mut s = String::from(label);
        for &x in v {
            s.push(',');
            s.push_str(&fmt_f64(x));
        }
        s.push('\n');
        s
    };
    let mut out = line("prognostic_axis", &h.prognostic_axis);
    out.push_str(&line("index_axis", &h.index_axis));
    for i in 0..h.values.rows() {
        let row: Vec<String> = h.values.row(i).iter().map(|&v| fmt_f64(v)).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// Dataset as CSV with columns `features…, treatment[, soft_prob][, label]`.
pub fn render_dataset_csv(ds: &Dataset) -> CliResult<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<String> = ds.feature_names().to_vec();
    header.push("treatment".into());
    if ds.soft_probs().is_some() {
        header.push("soft_prob".into());
    }
    if ds.hard_labels().is_some() {
        header.push("label".into());
    }
    let werr = |e: csv::Error| CliError::data(format!("cannot write CSV: {e}"));
    w.write_record(&header).map_err(werr)?;
    for i in 0..ds.n() {
        let mut rec: Vec<String> = ds.features().row(i).iter().map(|&v| fmt_f64(v)).collect();
        rec.push(fmt_f64(ds.treatment()[i]));
        if let Some(s) = ds.soft_probs() {
            rec.push(fmt_f64(s[i]));
        }
        if let Some(h) = ds.hard_labels() {
            rec.push(h[i].to_string());
        }
        w.write_record(&rec).map_err(werr)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::data(format!("cannot write CSV: {e}")))?;
    String::from_utf8(bytes).map_err(|e| CliError::data(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use dualscore_core::distill::{train_expert, BoostParams};
    use dualscore_core::simulation::generate_scenario;
    use dualscore_core::{FitConfig, Matrix};

    #[test]
    fn reals_round_trip_exactly() {
        for v in [0.1, -1.0 / 3.0, 1e-300, 6.02e23, f64::MIN_POSITIVE, 5e-324, -0.0, 1.0] {
            assert_eq!(parse_f64(&fmt_f64(v)).unwrap().to_bits(), v.to_bits());
        }
    }

    #[test]
    fn model_round_trip() {
        let sample = generate_scenario(2, 80, 3).unwrap();
        let config = FitConfig {
            optimizer_budget: 30,
            ..FitConfig::default()
        };
        let fit = dualscore_core::model::fit(&sample.dataset, &config).unwrap();
        let text = render_model(&fit).unwrap();
        let back = parse_model(&text).unwrap();
        assert_eq!(back.parts(), fit.parts());
        assert_eq!(render_model(&back).unwrap(), text);
    }

    #[test]
    fn model_header_and_records_are_checked() {
        assert!(parse_model("# dualscore-model v2\n").unwrap_err().message.contains("version"));
        assert!(parse_model("hello\n").is_err());
        let err = parse_model(&format!("{MODEL_HEADER}\nkernel\tepanechnikov\nbeta\t1\n")).unwrap_err();
        assert!(err.message.contains("line 3"), "{}", err.message);
    }

    #[test]
    fn expert_round_trip() {
        let x = Matrix::from_rows(&(0..40).map(|i| [i as f64, (i % 7) as f64]).collect::<Vec<_>>()).unwrap();
        let y: Vec<u8> = (0..40).map(|i| u8::from(i % 3 == 0 || i > 30)).collect();
        let params = BoostParams {
            rounds: 5,
            ..BoostParams::default()
        };
        let model = train_expert(&x, &y, &params).unwrap();
        let text = render_expert(&model);
        assert_eq!(parse_expert(&text).unwrap(), model);
        let broken = text.replacen("leaf", "lief", 1);
        assert!(parse_expert(&broken).is_err());
    }

    #[test]
    fn truth_round_trip() {
        let s = generate_scenario(4, 10, 1).unwrap();
        assert_eq!(parse_truth(&render_truth(&s.truth)).unwrap(), s.truth);
    }
}
