//! Dataset representation, KEEL/CSV ingestion, class partitioning, splitting.
//!
//! Labels are binary with `0` = majority and `1` = minority. The minority is
//! always the strictly rarer label; exact ties are broken by taking the
//! lexicographically larger label as minority so repeated loads are stable.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use ndarray::{Array2, Axis};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Missing-value marker used by KEEL files.
pub const KEEL_MISSING_TOKEN: &str = "?";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureKind {
    Numeric,
    Categorical,
}

/// Per-feature schema: name, kind, and (for categoricals) the category list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMeta {
    pub name: String,
    pub kind: FeatureKind,
    /// Ordered category labels; empty for numeric features.
    pub categories: Vec<String>,
    /// Token that marks a missing value in the source file.
    pub missing_token: String,
}

impl FeatureMeta {
    pub fn numeric(name: impl Into<String>) -> Self {
        FeatureMeta {
            name: name.into(),
            kind: FeatureKind::Numeric,
            categories: Vec::new(),
            missing_token: KEEL_MISSING_TOKEN.to_string(),
        }
    }

    pub fn categorical(name: impl Into<String>, categories: Vec<String>) -> Self {
        FeatureMeta {
            name: name.into(),
            kind: FeatureKind::Categorical,
            categories,
            missing_token: KEEL_MISSING_TOKEN.to_string(),
        }
    }
}

/// A binary classification dataset.
///
/// Categorical cells store the index of the category in their feature's
/// `categories` list; missing cells (either kind) store `NaN`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Dataset {
    pub name: String,
    pub x: Array2<f64>,
    /// 0 = majority, 1 = minority.
    pub y: Vec<u8>,
    pub meta: Vec<FeatureMeta>,
}

impl Dataset {
    /// Validates the invariants: row/label agreement, both classes nonempty,
    /// categorical cells in range, categorical metas nonempty.
    pub fn new(name: impl Into<String>, x: Array2<f64>, y: Vec<u8>, meta: Vec<FeatureMeta>) -> Result<Self> {
        let name = name.into();
        if x.nrows() != y.len() {
            return Err(Error::InvalidDataset(format!(
                "{} feature rows but {} labels",
                x.nrows(),
                y.len()
            )));
        }
        if x.ncols() != meta.len() {
            return Err(Error::InvalidDataset(format!(
                "{} feature columns but {} feature metas",
                x.ncols(),
                meta.len()
            )));
        }
        let n_min = y.iter().filter(|&&v| v == 1).count();
        if n_min == 0 || n_min == y.len() {
            return Err(Error::InvalidDataset(
                "both classes must be nonempty".to_string(),
            ));
        }
        for (j, m) in meta.iter().enumerate() {
            match m.kind {
                FeatureKind::Numeric => {
                    if !m.categories.is_empty() {
                        return Err(Error::InvalidDataset(format!(
                            "numeric feature `{}` carries categories",
                            m.name
                        )));
                    }
                }
                FeatureKind::Categorical => {
                    if m.categories.is_empty() {
                        return Err(Error::InvalidDataset(format!(
                            "categorical feature `{}` has no categories",
                            m.name
                        )));
                    }
                    for v in x.column(j).iter() {
                        if v.is_nan() {
                            continue; // missing
                        }
                        let idx = *v as usize;
                        if v.fract() != 0.0 || idx >= m.categories.len() {
                            return Err(Error::InvalidDataset(format!(
                                "cell value {v} out of range for categorical feature `{}`",
                                m.name
                            )));
                        }
                    }
                }
            }
        }
        Ok(Dataset { name, x, y, meta })
    }

    /// Wraps an already-numeric matrix (e.g. a preprocessed design matrix)
    /// as a dataset with synthetic numeric feature metas.
    pub fn from_matrix(name: impl Into<String>, x: Array2<f64>, y: Vec<u8>) -> Result<Self> {
        let meta = (0..x.ncols())
            .map(|j| FeatureMeta::numeric(format!("f{j}")))
            .collect();
        Dataset::new(name, x, y, meta)
    }

    pub fn n_rows(&self) -> usize {
        self.x.nrows()
    }

    pub fn n_features(&self) -> usize {
        self.x.ncols()
    }

    pub fn minority_count(&self) -> usize {
        self.y.iter().filter(|&&v| v == 1).count()
    }

    pub fn majority_count(&self) -> usize {
        self.y.len() - self.minority_count()
    }

    /// Row indices per class: (majority, minority).
    pub fn class_indices(&self) -> (Vec<usize>, Vec<usize>) {
        let mut maj = Vec::new();
        let mut min = Vec::new();
        for (i, &label) in self.y.iter().enumerate() {
            if label == 0 {
                maj.push(i);
            } else {
                min.push(i);
            }
        }
        (maj, min)
    }

    /// New dataset from a subset of rows (same schema).
    pub fn subset(&self, indices: &[usize], name: impl Into<String>) -> Result<Self> {
        let x = self.x.select(Axis(0), indices);
        let y = indices.iter().map(|&i| self.y[i]).collect();
        Dataset::new(name, x, y, self.meta.clone())
    }
}

/// Splits the rows into the majority matrix and the minority matrix.
pub fn partition(d: &Dataset) -> (Array2<f64>, Array2<f64>) {
    let (maj, min) = d.class_indices();
    (d.x.select(Axis(0), &maj), d.x.select(Axis(0), &min))
}

/// |majority| / |minority|; at least 1 by the minority-mapping convention.
pub fn imbalance_ratio(d: &Dataset) -> f64 {
    d.majority_count() as f64 / d.minority_count() as f64
}

/// Train/validation/test fractions plus stratification and a seed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train_fraction: f64,
    pub val_fraction: f64,
    pub test_fraction: f64,
    pub stratified: bool,
    pub seed: u64,
}

impl SplitSpec {
    pub fn new(train: f64, val: f64, test: f64, stratified: bool, seed: u64) -> Result<Self> {
        for (label, f) in [("train", train), ("val", val), ("test", test)] {
            if !(f > 0.0 && f < 1.0) {
                return Err(Error::InvalidConfig(format!(
                    "{label} fraction {f} must lie in (0,1)"
                )));
            }
        }
        if (train + val + test - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidConfig(format!(
                "fractions sum to {}, expected 1",
                train + val + test
            )));
        }
        Ok(SplitSpec {
            train_fraction: train,
            val_fraction: val,
            test_fraction: test,
            stratified,
            seed,
        })
    }

    /// The 60/20/20 stratified default used when a dataset ships without folds.
    pub fn default_with_seed(seed: u64) -> Self {
        SplitSpec {
            train_fraction: 0.6,
            val_fraction: 0.2,
            test_fraction: 0.2,
            stratified: true,
            seed,
        }
    }
}

/// Largest-remainder allocation of `n` items to the three fractions.
fn allocate(n: usize, spec: &SplitSpec) -> [usize; 3] {
    let fracs = [spec.train_fraction, spec.val_fraction, spec.test_fraction];
    let mut counts = [0usize; 3];
    let mut remainders: Vec<(usize, f64)> = Vec::with_capacity(3);
    let mut assigned = 0;
    for (i, f) in fracs.iter().enumerate() {
        let exact = f * n as f64;
        counts[i] = exact.floor() as usize;
        assigned += counts[i];
        remainders.push((i, exact - exact.floor()));
    }
    // Distribute leftovers by largest fractional remainder, ties by part order.
    remainders.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
    for k in 0..(n - assigned) {
        counts[remainders[k % 3].0] += 1;
    }
    counts
}

/// Deterministic three-way split. Stratified splits shuffle and allocate each
/// class independently so proportions hold within one sample per class and
/// every part keeps class presence.
pub fn split(d: &Dataset, spec: &SplitSpec) -> Result<(Dataset, Dataset, Dataset)> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut parts: [Vec<usize>; 3] = [Vec::new(), Vec::new(), Vec::new()];

    if spec.stratified {
        let (maj, min) = d.class_indices();
        for class_rows in [maj, min] {
            if class_rows.len() < 3 {
                return Err(Error::InfeasibleSplit(format!(
                    "a class has only {} rows, cannot populate 3 stratified parts",
                    class_rows.len()
                )));
            }
            let mut rows = class_rows;
            rows.shuffle(&mut rng);
            let mut counts = allocate(rows.len(), spec);
            // Guarantee class presence in every part.
            for i in 0..3 {
                while counts[i] == 0 {
                    let donor = (0..3).max_by_key(|&j| counts[j]).unwrap();
                    counts[donor] -= 1;
                    counts[i] += 1;
                }
            }
            let mut offset = 0;
            for (part, &c) in parts.iter_mut().zip(counts.iter()) {
                part.extend_from_slice(&rows[offset..offset + c]);
                offset += c;
            }
        }
    } else {
        let mut rows: Vec<usize> = (0..d.n_rows()).collect();
        rows.shuffle(&mut rng);
        let counts = allocate(rows.len(), spec);
        let mut offset = 0;
        for (part, &c) in parts.iter_mut().zip(counts.iter()) {
            part.extend_from_slice(&rows[offset..offset + c]);
            offset += c;
        }
    }

    for part in parts.iter_mut() {
        part.sort_unstable();
    }
    let [train, val, test] = parts;
    Ok((
        d.subset(&train, format!("{}-train", d.name))?,
        d.subset(&val, format!("{}-val", d.name))?,
        d.subset(&test, format!("{}-test", d.name))?,
    ))
}

// ---------------------------------------------------------------------------
// Label mapping
// ---------------------------------------------------------------------------

/// Picks the minority label: strictly rarer, ties broken by the
/// lexicographically larger label.
fn choose_minority_label(counts: &BTreeMap<String, usize>) -> Result<String> {
    if counts.len() != 2 {
        return Err(Error::InvalidDataset(format!(
            "expected exactly 2 class labels, found {}: {:?}",
            counts.len(),
            counts.keys().collect::<Vec<_>>()
        )));
    }
    let mut it = counts.iter();
    let (a, &ca) = it.next().unwrap();
    let (b, &cb) = it.next().unwrap();
    if ca == 0 || cb == 0 {
        return Err(Error::InvalidDataset("empty class".to_string()));
    }
    // BTreeMap iterates in lexicographic order, so b > a.
    let minority = if ca < cb {
        a
    } else if cb < ca {
        b
    } else {
        b
    };
    Ok(minority.clone())
}

// ---------------------------------------------------------------------------
// KEEL loader
// ---------------------------------------------------------------------------

#[derive(Debug)]
struct KeelAttribute {
    name: String,
    kind: FeatureKind,
    categories: Vec<String>,
}

fn parse_keel_attribute(line: &str, path: &str) -> Result<KeelAttribute> {
    let rest = line["@attribute".len()..].trim();
    // Name runs until whitespace or '{' / '['.
    let name_end = rest
        .find(|c: char| c.is_whitespace() || c == '{' || c == '[')
        .unwrap_or(rest.len());
    let name = rest[..name_end].trim().to_string();
    let tail = rest[name_end..].trim();
    if name.is_empty() {
        return Err(Error::Parse {
            path: path.to_string(),
            message: format!("attribute without a name: `{line}`"),
        });
    }
    if let Some(open) = tail.find('{') {
        let close = tail.find('}').ok_or_else(|| Error::Parse {
            path: path.to_string(),
            message: format!("unterminated category set: `{line}`"),
        })?;
        let categories: Vec<String> = tail[open + 1..close]
            .split(',')
            .map(|c| c.trim().to_string())
            .filter(|c| !c.is_empty())
            .collect();
        if categories.is_empty() {
            return Err(Error::Parse {
                path: path.to_string(),
                message: format!("empty category set: `{line}`"),
            });
        }
        Ok(KeelAttribute {
            name,
            kind: FeatureKind::Categorical,
            categories,
        })
    } else {
        let lowered = tail.to_ascii_lowercase();
        if lowered.starts_with("real") || lowered.starts_with("integer") || lowered.starts_with("numeric") {
            Ok(KeelAttribute {
                name,
                kind: FeatureKind::Numeric,
                categories: Vec::new(),
            })
        } else {
            Err(Error::Parse {
                path: path.to_string(),
                message: format!("unsupported attribute type: `{line}`"),
            })
        }
    }
}

/// Loads a KEEL `.dat` file (`@relation` / `@attribute` / `@inputs` /
/// `@outputs` / `@data`). The output attribute must have exactly two class
/// labels; the rarer one becomes the minority (y = 1).
pub fn load_keel(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let path_str = path.display().to_string();
    let content = fs::read_to_string(path)?;

    let mut relation = String::new();
    let mut attributes: Vec<KeelAttribute> = Vec::new();
    let mut outputs: Option<String> = None;
    let mut data_rows: Vec<Vec<String>> = Vec::new();
    let mut in_data = false;

    for raw in content.lines() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('%') {
            continue;
        }
        if in_data {
            data_rows.push(line.split(',').map(|c| c.trim().to_string()).collect());
            continue;
        }
        let lowered = line.to_ascii_lowercase();
        if lowered.starts_with("@relation") {
            relation = line["@relation".len()..].trim().to_string();
        } else if lowered.starts_with("@attribute") {
            attributes.push(parse_keel_attribute(line, &path_str)?);
        } else if lowered.starts_with("@inputs") {
            // Informative only; column order follows the attribute declarations.
        } else if lowered.starts_with("@outputs") || lowered.starts_with("@output") {
            let key = if lowered.starts_with("@outputs") {
                "@outputs"
            } else {
                "@output"
            };
            outputs = Some(line[key.len()..].trim().trim_end_matches(',').to_string());
        } else if lowered.starts_with("@data") {
            in_data = true;
        } else {
            return Err(Error::Parse {
                path: path_str,
                message: format!("unrecognized header directive: `{line}`"),
            });
        }
    }

    if !in_data {
        return Err(Error::Parse {
            path: path_str,
            message: "missing @data section".to_string(),
        });
    }
    if attributes.is_empty() {
        return Err(Error::Parse {
            path: path_str,
            message: "no @attribute declarations".to_string(),
        });
    }
    if data_rows.is_empty() {
        return Err(Error::InvalidDataset("empty dataset".to_string()));
    }

    // Identify the class column: the @outputs attribute, else the last one.
    let class_col = match &outputs {
        Some(name) => attributes
            .iter()
            .position(|a| a.name.eq_ignore_ascii_case(name))
            .ok_or_else(|| Error::Parse {
                path: path_str.clone(),
                message: format!("@outputs names unknown attribute `{name}`"),
            })?,
        None => attributes.len() - 1,
    };

    let feature_cols: Vec<usize> = (0..attributes.len()).filter(|&j| j != class_col).collect();
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    for row in &data_rows {
        if row.len() != attributes.len() {
            return Err(Error::Parse {
                path: path_str.clone(),
                message: format!(
                    "row has {} cells, expected {}",
                    row.len(),
                    attributes.len()
                ),
            });
        }
        *counts.entry(row[class_col].clone()).or_insert(0) += 1;
    }
    let minority_label = choose_minority_label(&counts)?;

    let meta: Vec<FeatureMeta> = feature_cols
        .iter()
        .map(|&j| {
            let a = &attributes[j];
            FeatureMeta {
                name: a.name.clone(),
                kind: a.kind,
                categories: a.categories.clone(),
                missing_token: KEEL_MISSING_TOKEN.to_string(),
            }
        })
        .collect();

    let n = data_rows.len();
    let d = feature_cols.len();
    let mut x = Array2::<f64>::zeros((n, d));
    let mut y = Vec::with_capacity(n);
    for (i, row) in data_rows.iter().enumerate() {
        for (out_j, &j) in feature_cols.iter().enumerate() {
            let cell = &row[j];
            x[[i, out_j]] = parse_cell(cell, &meta[out_j], &path_str)?;
        }
        y.push(u8::from(row[class_col] == minority_label));
    }

    let name = if relation.is_empty() {
        path.file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "dataset".to_string())
    } else {
        relation
    };
    Dataset::new(name, x, y, meta)
}

fn parse_cell(cell: &str, meta: &FeatureMeta, path: &str) -> Result<f64> {
    if cell == meta.missing_token {
        return Ok(f64::NAN);
    }
    match meta.kind {
        FeatureKind::Numeric => cell.parse::<f64>().map_err(|_| Error::Parse {
            path: path.to_string(),
            message: format!("cannot parse `{cell}` as a number for feature `{}`", meta.name),
        }),
        FeatureKind::Categorical => meta
            .categories
            .iter()
            .position(|c| c == cell)
            .map(|idx| idx as f64)
            .ok_or_else(|| Error::Parse {
                path: path.to_string(),
                message: format!(
                    "value `{cell}` not among declared categories of `{}`",
                    meta.name
                ),
            }),
    }
}

// ---------------------------------------------------------------------------
// CSV loader
// ---------------------------------------------------------------------------

/// Loads a CSV file with a header row. `minority_label` is mapped to y = 1 and
/// must not be strictly more frequent than the other label. Column kinds are
/// inferred: numeric when every non-missing cell parses as a real, else
/// categorical. Empty cells are treated as missing.
pub fn load_csv(
    path: impl AsRef<Path>,
    label_column: &str,
    minority_label: &str,
) -> Result<Dataset> {
    let path = path.as_ref();
    let path_str = path.display().to_string();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_path(path)
        .map_err(|e| Error::Parse {
            path: path_str.clone(),
            message: e.to_string(),
        })?;

    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| Error::Parse {
            path: path_str.clone(),
            message: e.to_string(),
        })?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    let label_idx = headers
        .iter()
        .position(|h| h == label_column)
        .ok_or_else(|| Error::Parse {
            path: path_str.clone(),
            message: format!("label column `{label_column}` not found"),
        })?;

    let mut rows: Vec<Vec<String>> = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::Parse {
            path: path_str.clone(),
            message: e.to_string(),
        })?;
        rows.push(record.iter().map(|c| c.trim().to_string()).collect());
    }
    if rows.is_empty() {
        return Err(Error::InvalidDataset("empty dataset".to_string()));
    }

    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    for row in &rows {
        *counts.entry(row[label_idx].clone()).or_insert(0) += 1;
    }
    if counts.len() != 2 {
        return Err(Error::InvalidDataset(format!(
            "expected exactly 2 class labels, found {}: {:?}",
            counts.len(),
            counts.keys().collect::<Vec<_>>()
        )));
    }
    let min_count = *counts.get(minority_label).ok_or_else(|| {
        Error::InvalidDataset(format!(
            "minority label `{minority_label}` absent; labels are {:?}",
            counts.keys().collect::<Vec<_>>()
        ))
    })?;
    let maj_count: usize = counts
        .iter()
        .filter(|(l, _)| l.as_str() != minority_label)
        .map(|(_, c)| c)
        .sum();
    if min_count > maj_count {
        return Err(Error::InvalidDataset(format!(
            "designated minority label `{minority_label}` is the more frequent class \
             ({min_count} vs {maj_count})"
        )));
    }

    let feature_cols: Vec<usize> = (0..headers.len()).filter(|&j| j != label_idx).collect();

    // Infer column kinds from the data.
    let mut meta: Vec<FeatureMeta> = Vec::with_capacity(feature_cols.len());
    for &j in &feature_cols {
        let mut numeric = true;
        for row in &rows {
            let cell = &row[j];
            if cell.is_empty() {
                continue;
            }
            if cell.parse::<f64>().is_err() {
                numeric = false;
                break;
            }
        }
        let mut fm = if numeric {
            FeatureMeta::numeric(headers[j].clone())
        } else {
            let mut categories: Vec<String> = rows
                .iter()
                .map(|r| r[j].clone())
                .filter(|c| !c.is_empty())
                .collect();
            categories.sort();
            categories.dedup();
            FeatureMeta::categorical(headers[j].clone(), categories)
        };
        fm.missing_token = String::new();
        meta.push(fm);
    }

    let n = rows.len();
    let mut x = Array2::<f64>::zeros((n, feature_cols.len()));
    let mut y = Vec::with_capacity(n);
    for (i, row) in rows.iter().enumerate() {
        for (out_j, &j) in feature_cols.iter().enumerate() {
            x[[i, out_j]] = parse_cell(&row[j], &meta[out_j], &path_str)?;
        }
        y.push(u8::from(row[label_idx] == minority_label));
    }

    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "dataset".to_string());
    Dataset::new(name, x, y, meta)
}
