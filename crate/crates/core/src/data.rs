//! Datasets: CSV ingestion, min-max scaling into the activation domain,
//! one-vs-all targets, stratified folds and the built-in XOR / Iris sets.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;

const IRIS_CSV: &str = include_str!("../data/iris.csv");

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ColumnRange {
    pub min: f64,
    pub max: f64,
}

/// Per-column ranges from a training set, reused to transform held-out data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scaling {
    pub epsilon: f64,
    pub columns: Vec<ColumnRange>,
}

impl Scaling {
    pub fn fit(x: &Matrix, epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon < 0.5) {
            return Err(Error::Config(format!("scaling epsilon must be in (0, 0.5), got {epsilon}")));
        }
        let columns = (0..x.cols())
            .map(|c| {
                let col = x.column(c);
                ColumnRange {
                    min: col.iter().copied().fold(f64::INFINITY, f64::min),
                    max: col.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                }
            })
            .collect();
        Ok(Self { epsilon, columns })
    }

    /// Maps each column affinely from `[min, max]` onto `[ε, 1 − ε]`, clamping
    /// values outside the fitted range. Constant columns map to 0.5.
    pub fn apply(&self, x: &Matrix) -> Result<Matrix> {
        if x.cols() != self.columns.len() {
            return Err(Error::dimension(
                "Scaling::apply",
                format!("{} columns", self.columns.len()),
                format!("{}", x.cols()),
            ));
        }
        let eps = self.epsilon;
        Matrix::from_fn(x.rows(), x.cols(), |r, c| {
            let ColumnRange { min, max } = self.columns[c];
            if max <= min {
                return 0.5;
            }
            let t = (x.get(r, c) - min) / (max - min);
            (eps + (1.0 - 2.0 * eps) * t).clamp(eps, 1.0 - eps)
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub x: Matrix,
    pub y: Matrix,
    pub labels: Option<Vec<usize>>,
    pub class_names: Vec<String>,
    pub scaling: Option<Scaling>,
}

impl Dataset {
    /// Builds a classification dataset with a 0/1 one-vs-all target.
    pub fn classification(x: Matrix, labels: Vec<usize>, class_names: Vec<String>) -> Result<Self> {
        let q = class_names.len();
        if q < 2 {
            return Err(Error::TooFewClasses { found: q });
        }
        if labels.len() != x.rows() {
            return Err(Error::dimension(
                "Dataset::classification",
                format!("{} labels", x.rows()),
                format!("{}", labels.len()),
            ));
        }
        let y = encode_one_vs_all(&labels, q, 0.0, 1.0)?;
        Ok(Self {
            x,
            y,
            labels: Some(labels),
            class_names,
            scaling: None,
        })
    }

    pub fn len(&self) -> usize {
        self.x.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn feature_count(&self) -> usize {
        self.x.cols()
    }

    pub fn target_count(&self) -> usize {
        self.y.cols()
    }

    /// Number of classes, or 0 for a regression target.
    pub fn class_count(&self) -> usize {
        if self.labels.is_some() {
            self.class_names.len()
        } else {
            0
        }
    }

    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        Ok(Self {
            x: self.x.select_rows(indices)?,
            y: self.y.select_rows(indices)?,
            labels: self
                .labels
                .as_ref()
                .map(|l| indices.iter().map(|&i| l[i]).collect()),
            class_names: self.class_names.clone(),
            scaling: self.scaling.clone(),
        })
    }

    pub fn with_scaling(&self, scaling: &Scaling) -> Result<Self> {
        Ok(Self {
            x: scaling.apply(&self.x)?,
            scaling: Some(scaling.clone()),
            ..self.clone()
        })
    }

    /// Writes the canonical CSV form: features, then the class name (if any).
    pub fn to_csv(&self, header: Option<&[String]>) -> String {
        let mut out = String::new();
        if let Some(h) = header {
            out.push_str(&h.join(","));
            out.push('\n');
        }
        for r in 0..self.len() {
            let mut fields: Vec<String> = self.x.row(r).iter().map(|v| v.to_string()).collect();
            if let Some(labels) = &self.labels {
                fields.push(self.class_names[labels[r]].clone());
            }
            out.push_str(&fields.join(","));
            out.push('\n');
        }
        out
    }
}

pub fn scale_minmax(ds: &Dataset, epsilon: f64) -> Result<Dataset> {
    let scaling = Scaling::fit(&ds.x, epsilon)?;
    ds.with_scaling(&scaling)
}

/// `m x q` matrix with `high` in each row's label column and `low` elsewhere.
pub fn encode_one_vs_all(labels: &[usize], q: usize, low: f64, high: f64) -> Result<Matrix> {
    if let Some(&bad) = labels.iter().find(|&&l| l >= q) {
        return Err(Error::Encoding { label: bad, classes: q });
    }
    Matrix::from_fn(labels.len(), q, |r, c| if labels[r] == c { high } else { low })
}

/// Loads a numeric CSV whose `label_column` holds categorical class names.
///
/// Class indices follow first appearance. Empty or `?` cells in a feature
/// column are rejected as missing values.
pub fn load_csv(path: &Path, label_column: usize, has_header: bool) -> Result<Dataset> {
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_owned(),
        source,
    })?;
    parse_csv(&text, path, label_column, has_header)
}

pub fn parse_csv(text: &str, path: &Path, label_column: usize, has_header: bool) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(has_header)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());

    let mut width = None;
    let mut features = Vec::new();
    let mut labels = Vec::new();
    let mut class_names: Vec<String> = Vec::new();
    let mut class_index: HashMap<String, usize> = HashMap::new();
    let first_row = if has_header { 2 } else { 1 };

    for (i, record) in reader.records().enumerate() {
        let row = first_row + i;
        let record = record.map_err(|e| Error::Csv {
            path: path.to_owned(),
            message: e.to_string(),
        })?;
        if record.iter().all(str::is_empty) {
            continue;
        }
        let expected = *width.get_or_insert(record.len());
        if record.len() != expected {
            return Err(Error::RaggedRow {
                path: path.to_owned(),
                row,
                expected,
                found: record.len(),
            });
        }
        if label_column >= expected {
            return Err(Error::Config(format!(
                "label column {label_column} is out of range for {expected} columns"
            )));
        }
        for (col, cell) in record.iter().enumerate() {
            if col == label_column {
                let next = class_names.len();
                let idx = *class_index.entry(cell.to_owned()).or_insert_with(|| {
                    class_names.push(cell.to_owned());
                    next
                });
                labels.push(idx);
                continue;
            }
            if cell.is_empty() || cell == "?" {
                return Err(Error::MissingValue {
                    path: path.to_owned(),
                    row,
                    col,
                });
            }
            match cell.parse::<f64>() {
                Ok(v) if v.is_finite() => features.push(v),
                _ => {
                    return Err(Error::NonNumeric {
                        path: path.to_owned(),
                        row,
                        col,
                        value: cell.to_owned(),
                    })
                }
            }
        }
    }

    let Some(width) = width else {
        return Err(Error::EmptyFile { path: path.to_owned() });
    };
    if width < 2 {
        return Err(Error::Config("CSV needs at least one feature column and a label column".into()));
    }
    let x = Matrix::new(labels.len(), width - 1, features)?;
    Dataset::classification(x, labels, class_names)
}

/// Fold assignment for stratified k-fold cross-validation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub k: usize,
    pub seed: u64,
    pub assignments: Vec<usize>,
}

impl FoldPlan {
    pub fn test_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.assignments.len())
            .filter(|&i| self.assignments[i] == fold)
            .collect()
    }

    pub fn train_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.assignments.len())
            .filter(|&i| self.assignments[i] != fold)
            .collect()
    }
}

/// Shuffles each class with a seeded generator, lays the classes out one
/// after another, and deals samples to folds round-robin with a counter that
/// carries over between classes.
pub fn stratified_folds(labels: &[usize], k: usize, seed: u64) -> Result<FoldPlan> {
    if k < 2 {
        return Err(Error::Config(format!("need at least 2 folds, got {k}")));
    }
    if k > labels.len() {
        return Err(Error::Config(format!(
            "{k} folds requested for only {} samples",
            labels.len()
        )));
    }
    let classes = labels.iter().copied().max().map_or(0, |m| m + 1);
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); classes];
    for (i, &l) in labels.iter().enumerate() {
        by_class[l].push(i);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assignments = vec![0; labels.len()];
    let mut position = 0;
    for members in &mut by_class {
        members.shuffle(&mut rng);
        for &i in members.iter() {
            assignments[i] = position % k;
            position += 1;
        }
    }
    Ok(FoldPlan { k, seed, assignments })
}

/// The four XOR points with targets `[0, 0, 1, 1]`.
///
/// The perturbed variant nudges the points off the exact unit-square corners
/// so the augmented input matrix is not perfectly symmetric.
pub fn make_xor(perturbed: bool) -> Dataset {
    let points: [[f64; 2]; 4] = if perturbed {
        [[0.0, 0.0], [0.9991, 0.9991], [0.9990, 0.0], [0.0, 0.9990]]
    } else {
        [[0.0, 0.0], [1.0, 1.0], [1.0, 0.0], [0.0, 1.0]]
    };
    let x = Matrix::from_rows(&points).expect("static data");
    let labels = vec![0, 0, 1, 1];
    Dataset {
        y: Matrix::column_vector(&[0.0, 0.0, 1.0, 1.0]).expect("static data"),
        x,
        labels: Some(labels),
        class_names: vec!["0".into(), "1".into()],
        scaling: None,
    }
}

/// The bundled Iris data (150 samples, 4 features, 3 classes, file order).
pub fn iris() -> Dataset {
    parse_csv(IRIS_CSV, Path::new("<bundled iris.csv>"), 4, true).expect("bundled iris data parses")
}

/// Splits into (train, test) indices, taking the first `per_class` samples of
/// every class in file order for training.
pub fn first_n_per_class(labels: &[usize], per_class: usize) -> (Vec<usize>, Vec<usize>) {
    let mut seen: HashMap<usize, usize> = HashMap::new();
    let mut train = Vec::new();
    let mut test = Vec::new();
    for (i, &l) in labels.iter().enumerate() {
        let count = seen.entry(l).or_default();
        if *count < per_class {
            train.push(i);
        } else {
            test.push(i);
        }
        *count += 1;
    }
    (train, test)
}

/// Resolves a builtin dataset name (`iris`, `xor`, `xor-perturbed`).
pub fn builtin(name: &str) -> Option<Dataset> {
    match name {
        "iris" => Some(iris()),
        "xor" => Some(make_xor(false)),
        "xor-perturbed" => Some(make_xor(true)),
        _ => None,
    }
}
