use std::collections::HashMap;
use std::path::Path;

use crate::error::{Error, Result};
use crate::numerics::{Matrix, SeededRng};
use crate::scalar::Scalar;

/// Labelled feature matrix.
///
/// Datasets from the generator and the loader are nonempty; subsets produced
/// by [`stratified_split`] may be empty when a split fraction is zero.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset<T> {
    features: Matrix<T>,
    labels: Vec<usize>,
    num_classes: usize,
    /// Original label strings by class index, when labels were not integers.
    label_names: Option<Vec<String>>,
}

impl<T: Scalar> Dataset<T> {
    pub fn new(features: Matrix<T>, labels: Vec<usize>, num_classes: usize) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::InvalidInput("dataset has no samples".into()));
        }
        Self::build(features, labels, num_classes, None)
    }

    fn build(
        features: Matrix<T>,
        labels: Vec<usize>,
        num_classes: usize,
        label_names: Option<Vec<String>>,
    ) -> Result<Self> {
        if features.rows() != labels.len() {
            return Err(Error::shape(
                features.rows(),
                labels.len(),
                "labels vs feature rows",
            ));
        }
        if let Some(&l) = labels.iter().find(|&&l| l >= num_classes) {
            return Err(Error::InvalidInput(format!(
                "label {l} out of range for {num_classes} classes"
            )));
        }
        if features.as_slice().iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("dataset features must be finite".into()));
        }
        Ok(Dataset {
            features,
            labels,
            num_classes,
            label_names,
        })
    }

    pub fn features(&self) -> &Matrix<T> {
        &self.features
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.features.cols()
    }

    pub fn label_names(&self) -> Option<&[String]> {
        self.label_names.as_deref()
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut c = vec![0; self.num_classes];
        for &l in &self.labels {
            c[l] += 1;
        }
        c
    }

    /// Rows `indices`, in order.
    pub fn subset(&self, indices: &[usize]) -> Self {
        Dataset {
            features: self.features.select_rows(indices),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            num_classes: self.num_classes,
            label_names: self.label_names.clone(),
        }
    }
}

/// `C` Gaussian clusters of `n_per_class` points each in `d` dimensions.
///
/// Class means sit on the unit circle in the first two coordinates, evenly
/// spaced from a seeded random phase, with seeded offsets in `[-0.25, 0.25]`
/// in any further coordinates (evenly spaced on a line when `d = 1`). Points
/// are `mean + spread · N(0, I)`. Samples are interleaved by class, so sample
/// `i` has label `i mod C`.
pub fn gaussian_blobs<T: Scalar>(
    n_per_class: usize,
    num_classes: usize,
    dim: usize,
    spread: f64,
    seed: u64,
) -> Result<Dataset<T>> {
    if n_per_class == 0 || num_classes == 0 || dim == 0 {
        return Err(Error::Config(format!(
            "blobs need positive counts: n_per_class={n_per_class}, classes={num_classes}, dim={dim}"
        )));
    }
    if !(spread.is_finite() && spread > 0.0) {
        return Err(Error::Config(format!(
            "blob spread must be positive, got {spread}"
        )));
    }
    let mut rng = SeededRng::new(seed);
    let phase: f64 = rng.uniform_in(0.0, std::f64::consts::TAU);
    let means: Vec<Vec<f64>> = (0..num_classes)
        .map(|c| {
            if dim == 1 {
                return vec![c as f64 - (num_classes as f64 - 1.0) / 2.0];
            }
            let angle = phase + std::f64::consts::TAU * c as f64 / num_classes as f64;
            let mut m = vec![angle.cos(), angle.sin()];
            m.extend((2..dim).map(|_| rng.uniform_in(-0.25, 0.25)));
            m
        })
        .collect();
    let n = n_per_class * num_classes;
    let mut data = Vec::with_capacity(n * dim);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let c = i % num_classes;
        data.extend(
            means[c]
                .iter()
                .map(|&mu| T::lit(mu + spread * rng.standard_normal::<f64>())),
        );
        labels.push(c);
    }
    Dataset::new(Matrix::from_row_major(n, dim, data)?, labels, num_classes)
}

/// Reads a headed CSV file. Every column other than `label_column` must be
/// numeric and becomes a feature, in file order.
///
/// Labels that all parse as nonnegative integers are used as class indices
/// directly (`C = max + 1`). Otherwise each distinct string gets the next
/// index in order of first appearance. Row numbers in errors are file line
/// numbers, the header being line 1.
pub fn load_csv<T: Scalar>(path: &Path, label_column: &str) -> Result<Dataset<T>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_csv(&text, label_column)
}

fn parse_csv<T: Scalar>(text: &str, label_column: &str) -> Result<Dataset<T>> {
    if text.trim().is_empty() {
        return Err(Error::Parse {
            row: 0,
            message: "empty file".into(),
        });
    }
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header = reader
        .headers()
        .map_err(|e| Error::Parse {
            row: 1,
            message: e.to_string(),
        })?
        .clone();
    let label_idx = header
        .iter()
        .position(|h| h == label_column)
        .ok_or_else(|| Error::Parse {
            row: 1,
            message: format!("label column '{label_column}' not in header"),
        })?;
    let width = header.len();
    let mut rows: Vec<T> = Vec::new();
    let mut raw_labels: Vec<String> = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let row = i + 2;
        let record = record.map_err(|e| Error::Parse {
            row,
            message: e.to_string(),
        })?;
        if record.len() != width {
            return Err(Error::Parse {
                row,
                message: format!("expected {width} fields, found {}", record.len()),
            });
        }
        for (j, field) in record.iter().enumerate() {
            if j == label_idx {
                raw_labels.push(field.to_string());
                continue;
            }
            let v: f64 = field.parse().map_err(|_| Error::Parse {
                row,
                message: format!("column '{}' is not numeric: '{field}'", &header[j]),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    row,
                    message: format!("column '{}' is not finite", &header[j]),
                });
            }
            rows.push(T::lit(v));
        }
    }
    if raw_labels.is_empty() {
        return Err(Error::Parse {
            row: 1,
            message: "no data rows".into(),
        });
    }

    let numeric: Option<Vec<usize>> = raw_labels.iter().map(|l| l.parse::<usize>().ok()).collect();
    let (labels, num_classes, names) = match numeric {
        Some(ls) => {
            let c = ls.iter().max().map_or(0, |m| m + 1);
            (ls, c, None)
        }
        None => {
            let mut index: HashMap<&str, usize> = HashMap::new();
            let mut names = Vec::new();
            let ls = raw_labels
                .iter()
                .map(|l| {
                    *index.entry(l.as_str()).or_insert_with(|| {
                        names.push(l.clone());
                        names.len() - 1
                    })
                })
                .collect();
            let c = names.len();
            (ls, c, Some(names))
        }
    };
    let n = labels.len();
    let features = Matrix::from_row_major(n, width - 1, rows)?;
    Dataset::build(features, labels, num_classes, names)
}

/// Writes `x0, …, x{d−1}, label` with a header row.
pub fn write_csv<T: Scalar>(ds: &Dataset<T>, path: &Path) -> Result<()> {
    let mut out = String::new();
    let header: Vec<String> = (0..ds.dim())
        .map(|j| format!("x{j}"))
        .chain(["label".to_string()])
        .collect();
    out.push_str(&header.join(","));
    out.push('\n');
    for i in 0..ds.len() {
        for v in ds.features.row(i) {
            out.push_str(&format!("{v},"));
        }
        match &ds.label_names {
            Some(names) => out.push_str(&names[ds.labels[i]]),
            None => out.push_str(&ds.labels[i].to_string()),
        }
        out.push('\n');
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

#[derive(Clone, Debug, PartialEq)]
pub struct Split<T> {
    pub train: Dataset<T>,
    pub val: Dataset<T>,
    pub test: Dataset<T>,
}

/// Per-class proportional split into (train, val, test).
///
/// Within each class the indices are shuffled; the validation and test parts
/// take `⌊f·n_c⌋` samples and the remainder goes to training. Subset rows keep
/// their original order.
pub fn stratified_split<T: Scalar>(
    ds: &Dataset<T>,
    fractions: [f64; 3],
    seed: u64,
) -> Result<Split<T>> {
    if fractions.iter().any(|f| !(f.is_finite() && *f >= 0.0)) || fractions[0] <= 0.0 {
        return Err(Error::Config(format!(
            "split fractions must be nonnegative with a positive train part, got {fractions:?}"
        )));
    }
    if (fractions.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
        return Err(Error::Config(format!(
            "split fractions {fractions:?} do not sum to 1"
        )));
    }
    let parts = fractions.iter().filter(|&&f| f > 0.0).count();
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); ds.num_classes];
    for (i, &l) in ds.labels.iter().enumerate() {
        by_class[l].push(i);
    }
    let mut rng = SeededRng::new(seed);
    let (mut train, mut val, mut test) = (Vec::new(), Vec::new(), Vec::new());
    for (c, mut idx) in by_class.into_iter().enumerate() {
        if idx.is_empty() {
            continue;
        }
        if idx.len() < parts {
            return Err(Error::Config(format!(
                "class {c} has {} samples, fewer than the {parts} split parts",
                idx.len()
            )));
        }
        rng.shuffle(&mut idx);
        let n = idx.len() as f64;
        let n_val = (fractions[1] * n + 1e-9).floor() as usize;
        let n_test = (fractions[2] * n + 1e-9).floor() as usize;
        val.extend_from_slice(&idx[..n_val]);
        test.extend_from_slice(&idx[n_val..n_val + n_test]);
        train.extend_from_slice(&idx[n_val + n_test..]);
    }
    for v in [&mut train, &mut val, &mut test] {
        v.sort_unstable();
    }
    Ok(Split {
        train: ds.subset(&train),
        val: ds.subset(&val),
        test: ds.subset(&test),
    })
}
