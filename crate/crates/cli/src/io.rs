//! Dataset, CSV, and reference-file input/output.
//!
//! Output files are written atomically: contents go to a temporary
//! sibling first, which is then renamed over the final path, so readers
//! never observe a partially written file.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use provar_core::dataset::{LabeledDataset, ParseError};
use provar_core::solver::{Checkpoint, Reference};

/// Column header of every checkpoint CSV, byte for byte.
pub const CSV_HEADER: &str = "iter,oracle_calls,objective,gap,avg_gap,dist_sq,gen_grad_norm";

/// Errors from reading or writing experiment files.
#[derive(Debug)]
pub enum IoError {
    /// The file could not be read.
    Read { path: PathBuf, message: String },
    /// The file could not be written.
    Write { path: PathBuf, message: String },
    /// The dataset file is not valid LIBSVM-format text.
    Dataset { path: PathBuf, error: ParseError },
    /// The reference file does not have the expected three-line layout.
    MalformedReference { path: PathBuf, detail: String },
}

impl fmt::Display for IoError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IoError::Read { path, message } => {
                write!(f, "cannot read {}: {message}", path.display())
            }
            IoError::Write { path, message } => {
                write!(f, "cannot write {}: {message}", path.display())
            }
            IoError::Dataset { path, error } => {
                write!(f, "invalid dataset {}: {error}", path.display())
            }
            IoError::MalformedReference { path, detail } => {
                write!(f, "invalid reference file {}: {detail}", path.display())
            }
        }
    }
}

impl std::error::Error for IoError {}

/// Loads a LIBSVM-format dataset from disk.
pub fn load_dataset(path: &Path) -> Result<LabeledDataset, IoError> {
    let text = fs::read_to_string(path).map_err(|e| IoError::Read {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    LabeledDataset::parse_libsvm(&text).map_err(|error| IoError::Dataset {
        path: path.to_path_buf(),
        error,
    })
}

/// Writes `contents` to `path` through a temporary sibling plus rename.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), IoError> {
    let mut tmp_name = path.as_os_str().to_owned();
    tmp_name.push(".tmp");
    let tmp = PathBuf::from(tmp_name);
    fs::write(&tmp, contents).map_err(|e| IoError::Write {
        path: tmp.clone(),
        message: e.to_string(),
    })?;
    fs::rename(&tmp, path).map_err(|e| IoError::Write {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

/// Formats checkpoints as CSV: the fixed header, then one row per
/// checkpoint with 16 significant digits per floating-point field.
pub fn checkpoints_to_csv(checkpoints: &[Checkpoint]) -> String {
    let mut out = String::with_capacity(96 * (checkpoints.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for c in checkpoints {
        out.push_str(&format!(
            "{},{},{:.15e},{:.15e},{:.15e},{:.15e},{:.15e}\n",
            c.iter, c.oracle_calls, c.objective, c.gap, c.avg_gap, c.dist_sq, c.gen_grad_norm
        ));
    }
    out
}

/// Writes a checkpoint CSV atomically.
pub fn write_csv(path: &Path, checkpoints: &[Checkpoint]) -> Result<(), IoError> {
    write_atomic(path, &checkpoints_to_csv(checkpoints))
}

/// Serializes a reference solution as three lines: `f_star=…`,
/// `residual=…`, and `x=` followed by one full-precision decimal per
/// coordinate.
pub fn reference_to_string(reference: &Reference) -> String {
    let mut out = format!(
        "f_star={:.16e}\nresidual={:.16e}\nx=",
        reference.f_star, reference.residual
    );
    for v in &reference.x_star {
        out.push_str(&format!(" {v:.16e}"));
    }
    out.push('\n');
    out
}

/// Writes a reference solution file atomically.
pub fn write_reference(path: &Path, reference: &Reference) -> Result<(), IoError> {
    write_atomic(path, &reference_to_string(reference))
}

/// Reads a reference solution written by [`write_reference`]. Stored
/// references are taken as converged; the solve that produced the file
/// was responsible for warning otherwise.
pub fn read_reference(path: &Path) -> Result<Reference, IoError> {
    let text = fs::read_to_string(path).map_err(|e| IoError::Read {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    parse_reference(&text).map_err(|detail| IoError::MalformedReference {
        path: path.to_path_buf(),
        detail,
    })
}

fn scalar_line(line: Option<&str>, prefix: &str) -> Result<f64, String> {
    let line = line.ok_or_else(|| format!("missing {prefix} line"))?;
    let rest = line
        .strip_prefix(prefix)
        .ok_or_else(|| format!("expected a line starting with {prefix:?}, got {line:?}"))?;
    rest.trim()
        .parse::<f64>()
        .map_err(|e| format!("bad value in {prefix} line: {e}"))
}

fn parse_reference(text: &str) -> Result<Reference, String> {
    let mut lines = text.lines();
    let f_star = scalar_line(lines.next(), "f_star=")?;
    let residual = scalar_line(lines.next(), "residual=")?;
    let x_line = lines.next().ok_or("missing x= line")?;
    let rest = x_line
        .strip_prefix("x=")
        .ok_or_else(|| format!("expected a line starting with \"x=\", got {x_line:?}"))?;
    let mut x_star = Vec::new();
    for token in rest.split_whitespace() {
        let v = token
            .parse::<f64>()
            .map_err(|e| format!("bad coordinate {token:?}: {e}"))?;
        x_star.push(v);
    }
    if x_star.is_empty() {
        return Err("x= line lists no coordinates".to_string());
    }
    Ok(Reference {
        x_star,
        f_star,
        residual,
        converged: true,
    })
}
