//! Sparse labeled datasets in the svmlight/libsvm text format.
//!
//! Each line is `<label> <idx>:<val> <idx>:<val> ...` with 1-based feature
//! indices in the file and 0-based indices in memory. Missing entries are
//! exact zeros.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

/// One sample: feature indices (strictly increasing) and their values.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseRow {
    pub indices: Vec<usize>,
    pub values: Vec<f64>,
}

impl SparseRow {
    /// Inner product with a dense vector.
    pub fn dot(&self, x: &[f64]) -> f64 {
        let mut s = 0.0;
        for (&i, &v) in self.indices.iter().zip(&self.values) {
            s += v * x[i];
        }
        s
    }

    pub fn norm_sq(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum()
    }

    /// `out[i] += scale * value_i` over the row's support.
    pub fn add_scaled_into(&self, scale: f64, out: &mut [f64]) {
        for (&i, &v) in self.indices.iter().zip(&self.values) {
            out[i] += scale * v;
        }
    }

    pub fn nnz(&self) -> usize {
        self.indices.len()
    }
}

/// Sparse feature matrix plus one label per row. Immutable after loading
/// and rescaling; safe to share read-only across concurrent solver runs.
#[derive(Clone, Debug, PartialEq)]
pub struct LabeledDataset {
    rows: Vec<SparseRow>,
    labels: Vec<f64>,
    n_features: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum DatasetError {
    Empty,
    LengthMismatch { rows: usize, labels: usize },
    NonFinite { row: usize },
    UnorderedIndices { row: usize },
}

impl fmt::Display for DatasetError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DatasetError::Empty => write!(f, "dataset has no rows"),
            DatasetError::LengthMismatch { rows, labels } => {
                write!(f, "{rows} rows but {labels} labels")
            }
            DatasetError::NonFinite { row } => write!(f, "non-finite value in row {row}"),
            DatasetError::UnorderedIndices { row } => {
                write!(f, "indices of row {row} are not strictly increasing")
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for DatasetError {}

/// Parse failure, reported with its 1-based line number.
#[derive(Debug, Clone, PartialEq)]
pub enum ParseError {
    EmptyInput,
    BadToken { line: usize, token: String },
    DuplicateIndex { line: usize, index: usize },
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseError::EmptyInput => write!(f, "input contains no data lines"),
            ParseError::BadToken { line, token } => {
                write!(f, "line {line}: malformed token `{token}`")
            }
            ParseError::DuplicateIndex { line, index } => {
                write!(f, "line {line}: duplicate feature index {index}")
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for ParseError {}

/// Label binarization rule: +1 if the raw label is positive, else -1.
/// Lets {0,1}- and {1,2}-labeled files load without preconversion.
pub fn binarize_label(raw: f64) -> f64 {
    if raw > 0.0 {
        1.0
    } else {
        -1.0
    }
}

impl LabeledDataset {
    /// Build a dataset from in-memory rows. Labels are kept as given
    /// (synthetic instances may use values outside {-1,+1}); parsed files
    /// are always binarized.
    pub fn from_rows(rows: Vec<SparseRow>, labels: Vec<f64>) -> Result<Self, DatasetError> {
        if rows.is_empty() {
            return Err(DatasetError::Empty);
        }
        if rows.len() != labels.len() {
            return Err(DatasetError::LengthMismatch {
                rows: rows.len(),
                labels: labels.len(),
            });
        }
        let mut n_features = 0;
        for (r, row) in rows.iter().enumerate() {
            if !labels[r].is_finite() || row.values.iter().any(|v| !v.is_finite()) {
                return Err(DatasetError::NonFinite { row: r });
            }
            if row.indices.len() != row.values.len() || row.indices.windows(2).any(|w| w[0] >= w[1])
            {
                return Err(DatasetError::UnorderedIndices { row: r });
            }
            if let Some(&last) = row.indices.last() {
                n_features = n_features.max(last + 1);
            }
        }
        Ok(LabeledDataset {
            rows,
            labels,
            n_features,
        })
    }

    /// Parse libsvm text. Labels are binarized; blank lines are skipped.
    pub fn parse_libsvm(text: &str) -> Result<Self, ParseError> {
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line_num = lineno + 1;
            let mut tokens = line.split_whitespace();
            let label_tok = match tokens.next() {
                Some(t) => t,
                None => continue, // blank line
            };
            let raw: f64 = label_tok.parse().map_err(|_| ParseError::BadToken {
                line: line_num,
                token: label_tok.to_string(),
            })?;
            let mut pairs: Vec<(usize, f64)> = Vec::new();
            for tok in tokens {
                let (idx_s, val_s) = tok.split_once(':').ok_or_else(|| ParseError::BadToken {
                    line: line_num,
                    token: tok.to_string(),
                })?;
                let bad = || ParseError::BadToken {
                    line: line_num,
                    token: tok.to_string(),
                };
                let idx: usize = idx_s.parse().map_err(|_| bad())?;
                let val: f64 = val_s.parse().map_err(|_| bad())?;
                if idx == 0 || !val.is_finite() {
                    return Err(bad());
                }
                pairs.push((idx - 1, val));
            }
            pairs.sort_by_key(|&(i, _)| i);
            for w in pairs.windows(2) {
                if w[0].0 == w[1].0 {
                    return Err(ParseError::DuplicateIndex {
                        line: line_num,
                        index: w[0].0 + 1,
                    });
                }
            }
            rows.push(SparseRow {
                indices: pairs.iter().map(|&(i, _)| i).collect(),
                values: pairs.iter().map(|&(_, v)| v).collect(),
            });
            labels.push(binarize_label(raw));
        }
        if rows.is_empty() {
            return Err(ParseError::EmptyInput);
        }
        let mut n_features = 0;
        for row in &rows {
            if let Some(&last) = row.indices.last() {
                n_features = n_features.max(last + 1);
            }
        }
        Ok(LabeledDataset {
            rows,
            labels,
            n_features,
        })
    }

    /// Render back to libsvm text (1-based indices). Float formatting uses
    /// the shortest round-trip representation, so parse -> serialize ->
    /// parse is lossless.
    pub fn to_libsvm_string(&self) -> String {
        let mut out = String::new();
        for (row, &label) in self.rows.iter().zip(&self.labels) {
            out.push_str(&format!("{label}"));
            for (&i, &v) in row.indices.iter().zip(&row.values) {
                out.push_str(&format!(" {}:{}", i + 1, v));
            }
            out.push('\n');
        }
        out
    }

    /// Apply the binarization rule to every label in place.
    pub fn binarize_labels(&mut self) {
        for l in &mut self.labels {
            *l = binarize_label(*l);
        }
    }

    /// Divide every feature column by its max absolute value so all stored
    /// values land in [-1, 1]. All-zero columns are left unchanged; zero
    /// stays zero, so sparsity is preserved. Idempotent.
    pub fn rescale_features(&mut self) {
        let mut col_max = alloc::vec![0.0_f64; self.n_features];
        for row in &self.rows {
            for (&i, &v) in row.indices.iter().zip(&row.values) {
                col_max[i] = col_max[i].max(v.abs());
            }
        }
        for row in &mut self.rows {
            for (&i, v) in row.indices.iter().zip(&mut row.values) {
                if col_max[i] > 0.0 {
                    *v /= col_max[i];
                }
            }
        }
    }

    pub fn n_samples(&self) -> usize {
        self.rows.len()
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn row(&self, i: usize) -> &SparseRow {
        &self.rows[i]
    }

    pub fn rows(&self) -> &[SparseRow] {
        &self.rows
    }

    pub fn label(&self, i: usize) -> f64 {
        self.labels[i]
    }

    pub fn labels(&self) -> &[f64] {
        &self.labels
    }
}
