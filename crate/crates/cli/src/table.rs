//! Schema-driven CSV ingestion and preprocessing.
//!
//! A schema file is a `key = value` file mapping each used column to
//! `role[, missing-policy][, noscale]`. Columns of the header that the
//! schema does not mention are ignored. Cells that are empty or `NA` count
//! as missing.
//!
//! Preprocessing standardizes continuous columns with the mean and sample
//! standard deviation of the training rows, one-hot encodes categorical
//! columns over their sorted levels without the first level, and passes
//! binary columns through. The fitted [`Transform`] is reapplied unchanged
//! to test rows.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use dualscore_core::stats;
use dualscore_core::{Dataset, Matrix};

use crate::config::KeyValues;
use crate::error::{CliError, CliResult};
use crate::format::{fmt_f64, parse_f64};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Continuous,
    Categorical,
    Binary,
    Treatment,
    /// Hard 0/1 outcome.
    Outcome,
    /// Outcome probability in [0, 1], used directly as the soft label.
    SoftLabel,
    Ignore,
}

impl FromStr for Role {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s {
            "continuous" => Role::Continuous,
            "categorical" => Role::Categorical,
            "binary" => Role::Binary,
            "treatment" => Role::Treatment,
            "outcome" => Role::Outcome,
            "soft_label" => Role::SoftLabel,
            "ignore" => Role::Ignore,
            other => return Err(format!("unknown role '{other}'")),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MissingPolicy {
    #[default]
    DropRow,
    FillMean,
    FillMode,
}

impl FromStr for MissingPolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s {
            "drop_row" => MissingPolicy::DropRow,
            "fill_mean" => MissingPolicy::FillMean,
            "fill_mode" => MissingPolicy::FillMode,
            other => return Err(format!("unknown missing-value policy '{other}'")),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColumnSpec {
    pub name: String,
    pub role: Role,
    pub missing: MissingPolicy,
    /// Continuous column used on its original scale.
    pub no_scale: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SchemaSpec {
    pub columns: Vec<ColumnSpec>,
}

impl SchemaSpec {
    pub fn new(columns: Vec<ColumnSpec>) -> CliResult<Self> {
        let count = |r: Role| columns.iter().filter(|c| c.role == r).count();
        if count(Role::Treatment) != 1 {
            return Err(CliError::usage("schema needs exactly one treatment column"));
        }
        if count(Role::Outcome) > 1 || count(Role::SoftLabel) > 1 {
            return Err(CliError::usage("schema allows at most one outcome and one soft_label column"));
        }
        if count(Role::Outcome) + count(Role::SoftLabel) == 0 {
            return Err(CliError::usage("schema needs an outcome or soft_label column"));
        }
        if !columns.iter().any(|c| c.role.is_feature()) {
            return Err(CliError::usage("schema needs at least one feature column"));
        }
        for c in &columns {
            let numeric_mean = matches!(c.role, Role::Continuous | Role::Treatment | Role::SoftLabel);
            if c.missing == MissingPolicy::FillMean && !numeric_mean {
                return Err(CliError::usage(format!(
                    "column '{}': fill_mean needs a continuous, treatment or soft_label column",
                    c.name
                )));
            }
            if c.no_scale && c.role != Role::Continuous {
                return Err(CliError::usage(format!("column '{}': noscale applies to continuous columns", c.name)));
            }
        }
        Ok(SchemaSpec { columns })
    }

    pub fn parse(text: &str) -> CliResult<Self> {
        let kv = KeyValues::parse(text)?;
        let mut columns = Vec::new();
        for (name, value) in kv.iter() {
            let mut parts = value.split(',').map(str::trim);
            let role: Role = parts
                .next()
                .unwrap_or("")
                .parse()
                .map_err(|e| CliError::usage(format!("column '{name}': {e}")))?;
            let mut missing = MissingPolicy::default();
            let mut no_scale = false;
            for token in parts.filter(|t| !t.is_empty()) {
                if token == "noscale" {
                    no_scale = true;
                } else {
                    missing = token.parse().map_err(|e| CliError::usage(format!("column '{name}': {e}")))?;
                }
            }
            columns.push(ColumnSpec {
                name: name.to_string(),
                role,
                missing,
                no_scale,
            });
        }
        Self::new(columns)
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        Self::parse(&crate::fsio::read_text(path)?).map_err(|e| e.context(path.display()))
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for c in &self.columns {
            out.push_str(&format!("{} = {}, {}", c.name, c.role, c.missing));
            if c.no_scale {
                out.push_str(", noscale");
            }
            out.push('\n');
        }
        out
    }
}

impl Role {
    fn is_feature(self) -> bool {
        matches!(self, Role::Continuous | Role::Categorical | Role::Binary)
    }

    fn is_text(self) -> bool {
        self == Role::Categorical
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Role::Continuous => "continuous",
            Role::Categorical => "categorical",
            Role::Binary => "binary",
            Role::Treatment => "treatment",
            Role::Outcome => "outcome",
            Role::SoftLabel => "soft_label",
            Role::Ignore => "ignore",
        })
    }
}

impl fmt::Display for MissingPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MissingPolicy::DropRow => "drop_row",
            MissingPolicy::FillMean => "fill_mean",
            MissingPolicy::FillMode => "fill_mode",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ColumnData {
    Numeric(Vec<f64>),
    Text(Vec<String>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RawColumn {
    pub name: String,
    pub role: Role,
    pub no_scale: bool,
    pub data: ColumnData,
}

/// Typed columns after missing-value handling.
#[derive(Debug, Clone, PartialEq)]
pub struct RawTable {
    /// Used columns in header order.
    pub columns: Vec<RawColumn>,
    pub rows: usize,
    /// Rows removed by `drop_row` columns.
    pub dropped_rows: usize,
    /// Cells filled by `fill_mean` or `fill_mode`.
    pub filled_cells: usize,
    /// Header columns the schema does not mention.
    pub unused_columns: Vec<String>,
}

impl RawTable {
    pub fn column(&self, name: &str) -> Option<&RawColumn> {
        self.columns.iter().find(|c| c.name == name)
    }

    fn single(&self, role: Role) -> Option<&RawColumn> {
        self.columns.iter().find(|c| c.role == role)
    }

    pub fn has_soft_labels(&self) -> bool {
        self.single(Role::SoftLabel).is_some()
    }

    pub fn summary(&self) -> String {
        format!(
            "{} rows, {} columns used, {} rows dropped, {} cells filled",
            self.rows,
            self.columns.len(),
            self.dropped_rows,
            self.filled_cells
        )
    }
}

fn is_missing(cell: &str) -> bool {
    let t = cell.trim();
    t.is_empty() || t.eq_ignore_ascii_case("na")
}

/// Reads an RFC-4180 CSV file with a header row.
pub fn load_csv(path: &Path, schema: &SchemaSpec) -> CliResult<RawTable> {
    let file = std::fs::File::open(path).map_err(|e| CliError::io(path, e))?;
    read_csv(file, schema).map_err(|e| e.context(path.display()))
}

pub fn read_csv<R: std::io::Read>(input: R, schema: &SchemaSpec) -> CliResult<RawTable> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| CliError::data(format!("cannot read header: {e}")))?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    if header.is_empty() || header.iter().all(String::is_empty) {
        return Err(CliError::data("empty file: no header row"));
    }
    let mut position = BTreeMap::new();
    for (j, h) in header.iter().enumerate() {
        if position.insert(h.as_str(), j).is_some() {
            return Err(CliError::data(format!("duplicate header column '{h}'")));
        }
    }
    for c in &schema.columns {
        if !position.contains_key(c.name.as_str()) {
            return Err(CliError::data(format!("schema column '{}' not found in header", c.name)));
        }
    }
    let spec_of: BTreeMap<&str, &ColumnSpec> = schema.columns.iter().map(|c| (c.name.as_str(), c)).collect();
    let used: Vec<(usize, &ColumnSpec)> = header
        .iter()
        .enumerate()
        .filter_map(|(j, h)| spec_of.get(h.as_str()).map(|&s| (j, s)))
        .filter(|(_, s)| s.role != Role::Ignore)
        .collect();
    let unused_columns = header
        .iter()
        .filter(|h| !spec_of.contains_key(h.as_str()))
        .cloned()
        .collect();

    // cells[k][i] for used column k, record i; None marks a missing cell
    let mut cells: Vec<Vec<Option<String>>> = vec![Vec::new(); used.len()];
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| CliError::data(format!("record {}: {e}", i + 1)))?;
        for (k, &(j, _)) in used.iter().enumerate() {
            let cell = record.get(j).unwrap_or("");
            cells[k].push(if is_missing(cell) { None } else { Some(cell.trim().to_string()) });
        }
    }
    let total = cells.first().map_or(0, Vec::len);
    if total == 0 {
        return Err(CliError::data("empty file: no data rows"));
    }

    let keep: Vec<bool> = (0..total)
        .map(|i| {
            used.iter()
                .zip(&cells)
                .all(|((_, s), col)| s.missing != MissingPolicy::DropRow || col[i].is_some())
        })
        .collect();
    let kept: Vec<usize> = (0..total).filter(|&i| keep[i]).collect();
    if kept.is_empty() {
        return Err(CliError::data("every row has a missing cell in a drop_row column"));
    }

    let mut filled_cells = 0;
    let mut columns = Vec::with_capacity(used.len());
    for (&(_, spec), col) in used.iter().zip(&cells) {
        let values: Vec<Option<&str>> = kept.iter().map(|&i| col[i].as_deref()).collect();
        let data = if spec.role.is_text() {
            let fill = match spec.missing {
                MissingPolicy::FillMode => mode(values.iter().flatten().map(|s| s.to_string())),
                _ => None,
            };
            let mut out = Vec::with_capacity(values.len());
            for v in &values {
                match v {
                    Some(s) => out.push(s.to_string()),
                    None => {
                        let f = fill
                            .clone()
                            .ok_or_else(|| CliError::data(format!("column '{}': no values to fill from", spec.name)))?;
                        filled_cells += 1;
                        out.push(f);
                    }
                }
            }
            ColumnData::Text(out)
        } else {
            let mut parsed = Vec::with_capacity(values.len());
            for (v, &row) in values.iter().zip(&kept) {
                parsed.push(match v {
                    Some(s) => Some(parse_cell(s, spec, row)?),
                    None => None,
                });
            }
            let present: Vec<f64> = parsed.iter().flatten().copied().collect();
            let fill = match spec.missing {
                MissingPolicy::FillMean if !present.is_empty() => Some(stats::mean(&present)),
                MissingPolicy::FillMode => mode(present.iter().map(|v| OrdF64(*v))).map(|v| v.0),
                _ => None,
            };
            let mut out = Vec::with_capacity(parsed.len());
            for v in parsed {
                match v {
                    Some(x) => out.push(x),
                    None => {
                        let f = fill
                            .ok_or_else(|| CliError::data(format!("column '{}': no values to fill from", spec.name)))?;
                        filled_cells += 1;
                        out.push(f);
                    }
                }
            }
            ColumnData::Numeric(out)
        };
        columns.push(RawColumn {
            name: spec.name.clone(),
            role: spec.role,
            no_scale: spec.no_scale,
            data,
        });
    }
    Ok(RawTable {
        columns,
        rows: kept.len(),
        dropped_rows: total - kept.len(),
        filled_cells,
        unused_columns,
    })
}

fn parse_cell(cell: &str, spec: &ColumnSpec, row: usize) -> CliResult<f64> {
    let bad = |what: &str| {
        CliError::data(format!(
            "record {}, column '{}': cannot parse '{cell}' as {what}",
            row + 1,
            spec.name
        ))
    };
    let v: f64 = cell.parse().map_err(|_| bad("a number"))?;
    if !v.is_finite() {
        return Err(bad("a finite number"));
    }
    match spec.role {
        Role::Binary | Role::Outcome if v != 0.0 && v != 1.0 => Err(bad("0 or 1")),
        Role::SoftLabel if !(0.0..=1.0).contains(&v) => Err(bad("a probability")),
        _ => Ok(v),
    }
}

/// Most frequent value; ties go to the smallest.
fn mode<T: Ord + Clone>(values: impl Iterator<Item = T>) -> Option<T> {
    let mut counts: BTreeMap<T, usize> = BTreeMap::new();
    for v in values {
        *counts.entry(v).or_default() += 1;
    }
    let mut best: Option<(T, usize)> = None;
    for (v, c) in counts {
        if best.as_ref().is_none_or(|(_, bc)| c > *bc) {
            best = Some((v, c));
        }
    }
    best.map(|(v, _)| v)
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct OrdF64(f64);

impl Eq for OrdF64 {}

impl PartialOrd for OrdF64 {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for OrdF64 {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// How one source column maps to model features.
#[derive(Debug, Clone, PartialEq)]
pub enum FeatureBlock {
    Continuous { name: String, mean: f64, sd: f64 },
    Binary { name: String },
    /// Sorted levels; the first is the reference level and gets no column.
    Categorical { name: String, levels: Vec<String> },
    /// Zero-variance column left out of the model.
    Dropped { name: String },
}

impl FeatureBlock {
    pub fn source(&self) -> &str {
        match self {
            FeatureBlock::Continuous { name, .. }
            | FeatureBlock::Binary { name }
            | FeatureBlock::Categorical { name, .. }
            | FeatureBlock::Dropped { name } => name,
        }
    }

    fn output_names(&self) -> Vec<String> {
        match self {
            FeatureBlock::Continuous { name, .. } | FeatureBlock::Binary { name } => vec![name.clone()],
            FeatureBlock::Categorical { name, levels } => levels[1..].iter().map(|l| format!("{name}={l}")).collect(),
            FeatureBlock::Dropped { .. } => Vec::new(),
        }
    }
}

/// Preprocessing fitted on training rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Transform {
    pub blocks: Vec<FeatureBlock>,
    pub treatment: String,
    pub outcome: Option<String>,
    pub soft_label: Option<String>,
}

const TRANSFORM_HEADER: &str = "# dualscore-transform v1";

impl Transform {
    /// Learns standardization and level maps from `train_rows` of `table`.
    /// Warnings name zero-variance columns that were dropped.
    pub fn fit(table: &RawTable, train_rows: &[usize]) -> CliResult<(Self, Vec<String>)> {
        if train_rows.is_empty() {
            return Err(CliError::data("no training rows"));
        }
        let mut warnings = Vec::new();
        let mut blocks = Vec::new();
        for col in table.columns.iter().filter(|c| c.role.is_feature()) {
            let block = match (&col.data, col.role) {
                (ColumnData::Numeric(v), Role::Continuous) => {
                    let train: Vec<f64> = train_rows.iter().map(|&i| v[i]).collect();
                    let sd = if train.len() > 1 { stats::sample_sd(&train) } else { 0.0 };
                    if !(sd > 0.0) {
                        warnings.push(format!("column '{}' has zero variance in the training rows; dropped", col.name));
                        FeatureBlock::Dropped { name: col.name.clone() }
                    } else if col.no_scale {
                        FeatureBlock::Continuous {
                            name: col.name.clone(),
                            mean: 0.0,
                            sd: 1.0,
                        }
                    } else {
                        FeatureBlock::Continuous {
                            name: col.name.clone(),
                            mean: stats::mean(&train),
                            sd,
                        }
                    }
                }
                (ColumnData::Numeric(v), Role::Binary) => {
                    let first = v[train_rows[0]];
                    if train_rows.iter().all(|&i| v[i] == first) {
                        warnings.push(format!("column '{}' is constant in the training rows; dropped", col.name));
                        FeatureBlock::Dropped { name: col.name.clone() }
                    } else {
                        FeatureBlock::Binary { name: col.name.clone() }
                    }
                }
                (ColumnData::Text(v), Role::Categorical) => {
                    let levels: Vec<String> = train_rows
                        .iter()
                        .map(|&i| v[i].clone())
                        .collect::<BTreeSet<_>>()
                        .into_iter()
                        .collect();
                    if levels.len() < 2 {
                        warnings.push(format!("column '{}' has a single level in the training rows; dropped", col.name));
                        FeatureBlock::Dropped { name: col.name.clone() }
                    } else {
                        FeatureBlock::Categorical {
                            name: col.name.clone(),
                            levels,
                        }
                    }
                }
                _ => unreachable!("column data type follows its role"),
            };
            blocks.push(block);
        }
        let transform = Transform {
            blocks,
            treatment: table
                .single(Role::Treatment)
                .ok_or_else(|| CliError::data("no treatment column"))?
                .name
                .clone(),
            outcome: table.single(Role::Outcome).map(|c| c.name.clone()),
            soft_label: table.single(Role::SoftLabel).map(|c| c.name.clone()),
        };
        if transform.feature_names().is_empty() {
            return Err(CliError::data("no usable feature columns after preprocessing"));
        }
        Ok((transform, warnings))
    }

    pub fn feature_names(&self) -> Vec<String> {
        self.blocks.iter().flat_map(FeatureBlock::output_names).collect()
    }

    /// Source columns in block order, including dropped ones.
    pub fn source_columns(&self) -> Vec<&str> {
        self.blocks.iter().map(FeatureBlock::source).collect()
    }

    /// Maps one subject's raw feature values (keyed by source column) to
    /// model features. Unseen categorical levels encode as all zeros with a
    /// warning.
    pub fn apply_values(&self, value: &dyn Fn(&str) -> CliResult<String>, warnings: &mut Vec<String>) -> CliResult<Vec<f64>> {
        let mut out = Vec::new();
        for block in &self.blocks {
            match block {
                FeatureBlock::Continuous { name, mean, sd } => {
                    let v = parse_f64(&value(name)?).map_err(|e| CliError::data(format!("column '{name}': {e}")))?;
                    out.push((v - mean) / sd);
                }
                FeatureBlock::Binary { name } => {
                    let v = parse_f64(&value(name)?).map_err(|e| CliError::data(format!("column '{name}': {e}")))?;
                    out.push(v);
                }
                FeatureBlock::Categorical { name, levels } => {
                    let v = value(name)?;
                    let start = out.len();
                    out.extend(std::iter::repeat_n(0.0, levels.len() - 1));
                    match levels.iter().position(|l| *l == v) {
                        Some(0) => {}
                        Some(k) => out[start + k - 1] = 1.0,
                        None => warnings.push(format!("column '{name}': unseen level '{v}' encoded as all zeros")),
                    }
                }
                FeatureBlock::Dropped { .. } => {}
            }
        }
        Ok(out)
    }

    /// Builds the model dataset from `rows` of `table`.
    pub fn apply(&self, table: &RawTable, rows: &[usize]) -> CliResult<(Dataset, Vec<String>)> {
        let mut warnings = Vec::new();
        let p = self.feature_names().len();
        let mut data = Vec::with_capacity(rows.len() * p);
        for &i in rows {
            let cell = |name: &str| -> CliResult<String> {
                let col = table
                    .column(name)
                    .ok_or_else(|| CliError::data(format!("column '{name}' missing from the data")))?;
                Ok(match &col.data {
                    ColumnData::Numeric(v) => fmt_f64(v[i]),
                    ColumnData::Text(v) => v[i].clone(),
                })
            };
            data.extend(self.apply_values(&cell, &mut warnings)?);
        }
        let numeric = |name: &str, role: &str| -> CliResult<Vec<f64>> {
            match table.column(name).map(|c| &c.data) {
                Some(ColumnData::Numeric(v)) => Ok(rows.iter().map(|&i| v[i]).collect()),
                _ => Err(CliError::data(format!("{role} column '{name}' missing from the data"))),
            }
        };
        let treatment = numeric(&self.treatment, "treatment")?;
        let soft = match &self.soft_label {
            Some(name) if table.column(name).is_some() => Some(numeric(name, "soft_label")?),
            _ => None,
        };
        let hard = match &self.outcome {
            Some(name) if table.column(name).is_some() => {
                Some(numeric(name, "outcome")?.into_iter().map(|v| v as u8).collect())
            }
            _ => None,
        };
        let features = Matrix::from_row_major(rows.len(), p, data)?;
        let dataset = Dataset::new(features, treatment, soft, hard, self.feature_names())?;
        warnings.sort();
        warnings.dedup();
        Ok((dataset, warnings))
    }

    pub fn render(&self) -> CliResult<String> {
        let mut out = String::from(TRANSFORM_HEADER);
        out.push('\n');
        let mut line = |fields: Vec<String>| -> CliResult<()> {
            if fields.iter().any(|f| f.contains(['\t', '\n', '\r'])) {
                return Err(CliError::data("names in the transform record cannot contain tabs or newlines"));
            }
            out.push_str(&fields.join("\t"));
            out.push('\n');
            Ok(())
        };
        line(vec!["treatment".into(), self.treatment.clone()])?;
        if let Some(o) = &self.outcome {
            line(vec!["outcome".into(), o.clone()])?;
        }
        if let Some(s) = &self.soft_label {
            line(vec!["soft_label".into(), s.clone()])?;
        }
        for b in &self.blocks {
            line(match b {
                FeatureBlock::Continuous { name, mean, sd } => {
                    vec!["continuous".into(), name.clone(), fmt_f64(*mean), fmt_f64(*sd)]
                }
                FeatureBlock::Binary { name } => vec!["binary".into(), name.clone()],
                FeatureBlock::Categorical { name, levels } => {
                    let mut f = vec!["categorical".into(), name.clone()];
                    f.extend(levels.iter().cloned());
                    f
                }
                FeatureBlock::Dropped { name } => vec!["dropped".into(), name.clone()],
            })?;
        }
        Ok(out)
    }

    pub fn parse(text: &str) -> CliResult<Self> {
        let mut lines = text.lines();
        if lines.next() != Some(TRANSFORM_HEADER) {
            return Err(CliError::data(format!("expected header '{TRANSFORM_HEADER}'")));
        }
        let mut treatment = None;
        let mut outcome = None;
        let mut soft_label = None;
        let mut blocks = Vec::new();
        for (k, line) in lines.enumerate() {
            if line.is_empty() {
                continue;
            }
            let f: Vec<&str> = line.split('\t').collect();
            let bad = || CliError::data(format!("transform line {}: malformed record", k + 2));
            let name = f.get(1).ok_or_else(bad)?.to_string();
            match (f[0], f.len()) {
                ("treatment", 2) => treatment = Some(name),
                ("outcome", 2) => outcome = Some(name),
                ("soft_label", 2) => soft_label = Some(name),
                ("continuous", 4) => blocks.push(FeatureBlock::Continuous {
                    name,
                    mean: parse_f64(f[2]).map_err(|_| bad())?,
                    sd: parse_f64(f[3]).map_err(|_| bad())?,
                }),
                ("binary", 2) => blocks.push(FeatureBlock::Binary { name }),
                ("categorical", n) if n >= 4 => blocks.push(FeatureBlock::Categorical {
                    name,
                    levels: f[2..].iter().map(|s| s.to_string()).collect(),
                }),
                ("dropped", 2) => blocks.push(FeatureBlock::Dropped { name }),
                _ => return Err(bad()),
            }
        }
        Ok(Transform {
            blocks,
            treatment: treatment.ok_or_else(|| CliError::data("transform record names no treatment column"))?,
            outcome,
            soft_label,
        })
    }
}

/// Fits the transform on all rows and applies it.
pub fn preprocess(table: &RawTable) -> CliResult<(Dataset, Transform, Vec<String>)> {
    let all: Vec<usize> = (0..table.rows).collect();
    let (transform, mut warnings) = Transform::fit(table, &all)?;
    let (dataset, w) = transform.apply(table, &all)?;
    warnings.extend(w);
    Ok((dataset, transform, warnings))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn schema(text: &str) -> SchemaSpec {
        SchemaSpec::parse(text).unwrap()
    }

    fn read(csv: &str, s: &SchemaSpec) -> CliResult<RawTable> {
        read_csv(csv.as_bytes(), s)
    }

    #[test]
    fn fill_mean_uses_the_other_rows() {
        let s = schema("a = continuous, fill_mean\nt = treatment\ny = outcome\n");
        let t = read("a,t,y\n1,0,1\n,0,0\n4,1,1\n", &s).unwrap();
        assert_eq!(t.column("a").unwrap().data, ColumnData::Numeric(vec![1.0, 2.5, 4.0]));
        assert_eq!(t.filled_cells, 1);
    }

    #[test]
    fn drop_row_and_fill_mode() {
        let s = schema("a = continuous\nc = categorical, fill_mode\nt = treatment\ny = outcome\n");
        let t = read("a,c,t,y\n1,B,0,1\nNA,A,0,0\n3,,1,1\n4,B,1,0\n", &s).unwrap();
        assert_eq!(t.rows, 3);
        assert_eq!(t.dropped_rows, 1);
        assert_eq!(
            t.column("c").unwrap().data,
            ColumnData::Text(vec!["B".into(), "B".into(), "B".into()])
        );
    }

    #[test]
    fn missing_treatment_column_is_named() {
        let s = schema("a = continuous\ndose = treatment\ny = outcome\n");
        let err = read("a,y\n1,0\n2,1\n", &s).unwrap_err();
        assert!(err.message.contains("'dose'"), "{}", err.message);
    }

    #[test]
    fn bad_cells_report_coordinates() {
        let s = schema("a = continuous\nt = treatment\ny = outcome\n");
        let err = read("a,t,y\n1,0,1\n2,x,0\n", &s).unwrap_err();
        assert!(err.message.contains("record 2") && err.message.contains("'t'"), "{}", err.message);
        let err = read("a,t,y\n1,0,2\n", &s).unwrap_err();
        assert!(err.message.contains("0 or 1"));
        assert!(read("a,t,y\n", &s).unwrap_err().message.contains("empty"));
        assert!(read("", &s).is_err());
    }

    #[test]
    fn schema_invariants() {
        assert!(SchemaSpec::parse("a = continuous\ny = outcome\n").is_err());
        assert!(SchemaSpec::parse("a = continuous\nt = treatment\n").is_err());
        assert!(SchemaSpec::parse("t = treatment\ny = outcome\n").is_err());
        assert!(SchemaSpec::parse("a = categorical, fill_mean\nt = treatment\ny = outcome\n").is_err());
        assert!(SchemaSpec::parse("a = shape\nt = treatment\ny = outcome\n").is_err());
        let s = schema("a = continuous, fill_mean, noscale\nt = treatment\ny = outcome\n");
        assert_eq!(SchemaSpec::parse(&s.render()).unwrap(), s);
    }

    #[test]
    fn standardization_one_hot_and_pass_through() {
        let s = schema("a = continuous\nb = binary\nc = categorical\nt = treatment\ny = outcome\n");
        let t = read("a,b,c,t,y\n1,0,B,0.5,1\n2,1,A,0.1,0\n3,1,C,0.2,1\n3,0,B,0.3,0\n2,1,A,0.4,1\n", &s).unwrap();
        let (ds, tr, warnings) = preprocess(&t).unwrap();
        assert!(warnings.is_empty());
        assert_eq!(ds.feature_names(), ["a", "b", "c=B", "c=C"]);
        // mean 2.2, sample sd sqrt(0.7)
        let sd = 0.7f64.sqrt();
        assert!((ds.features().get(0, 0) - (1.0 - 2.2) / sd).abs() < 1e-12);
        assert_eq!(ds.features().col_to_vec(1), vec![0.0, 1.0, 1.0, 0.0, 1.0]);
        assert_eq!(ds.features().row(1)[2..], [0.0, 0.0]);
        assert_eq!(ds.features().row(2)[2..], [0.0, 1.0]);
        assert_eq!(ds.treatment(), [0.5, 0.1, 0.2, 0.3, 0.4]);
        assert_eq!(Transform::parse(&tr.render().unwrap()).unwrap(), tr);
    }

    #[test]
    fn three_values_standardize_to_unit_steps() {
        let s = schema("a = continuous\nt = treatment\ny = outcome\n");
        let t = read("a,t,y\n1,0,1\n2,0,0\n3,1,1\n", &s).unwrap();
        let (ds, _, _) = preprocess(&t).unwrap();
        assert_eq!(ds.features().col_to_vec(0), vec![-1.0, 0.0, 1.0]);
    }

    #[test]
    fn three_levels_give_three_indicator_columns_before_dropping() {
        let s = schema("c = categorical\nt = treatment\ny = outcome\n");
        let t = read("c,t,y\nx,0,1\ny,0,0\nz,1,1\nx,1,0\ny,0,1\n", &s).unwrap();
        let (ds, tr, _) = preprocess(&t).unwrap();
        match &tr.blocks[0] {
            FeatureBlock::Categorical { levels, .. } => assert_eq!(levels.len(), 3),
            other => panic!("unexpected block {other:?}"),
        }
        assert_eq!(ds.p(), 2);
    }

    #[test]
    fn zero_variance_and_unseen_levels_warn() {
        let s = schema("a = continuous\nk = continuous\nc = categorical\nt = treatment\ny = outcome\n");
        let t = read("a,k,c,t,y\n1,5,A,0,1\n2,5,B,0,0\n3,5,A,1,1\n4,5,Q,1,0\n", &s).unwrap();
        let (tr, warnings) = Transform::fit(&t, &[0, 1, 2]).unwrap();
        assert!(warnings.iter().any(|w| w.contains("'k'")));
        let (ds, warnings) = tr.apply(&t, &[3, 0]).unwrap();
        assert!(warnings.iter().any(|w| w.contains("unseen level 'Q'")));
        assert_eq!(ds.features().row(0)[1], 0.0);
        assert_eq!(ds.features().row(1)[1], 0.0);
    }

    #[test]
    fn quoted_fields_follow_rfc4180() {
        let s = schema("c = categorical\na = continuous\nt = treatment\ny = outcome\n");
        let t = read("c,a,t,y\n\"x, \"\"q\"\"\",1,0,1\nplain,2,0,0\n", &s).unwrap();
        assert_eq!(
            t.column("c").unwrap().data,
            ColumnData::Text(vec!["x, \"q\"".into(), "plain".into()])
        );
    }
}
