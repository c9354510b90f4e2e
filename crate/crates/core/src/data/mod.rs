//! Datasets: the synthetic least-squares generator, the LIBSVM reader and
//! writer, and the `cdkit-dataset v1` text container.

mod container;
mod libsvm;
mod synthetic;

pub use container::{load_dataset, read_dataset, save_dataset, write_dataset, CONTAINER_MAGIC};
pub use libsvm::{parse_libsvm, read_libsvm, write_libsvm};
pub use synthetic::{generate_linear_regression, SyntheticSpec, INFINITE_KAPPA_SURROGATE};

use std::fmt;
use std::path::Path;

use thiserror::Error;

use crate::matrix::Design;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("line {line}: feature index {index} does not increase strictly")]
    NonIncreasingIndex { line: usize, index: usize },
    #[error("line {line}: non-numeric token {token:?}")]
    NonNumeric { line: usize, token: String },
    #[error("unsupported label set {0:?}; expected {{-1, +1}} or {{0, 1}}")]
    UnsupportedLabels(Vec<f64>),
    #[error("no samples")]
    NoSamples,
    #[error("unsupported container version {0:?}")]
    Version(String),
    #[error("corrupt header: {0}")]
    Header(String),
    #[error("invalid synthetic spec: {0}")]
    InvalidSpec(String),
    #[error("singular value decomposition failed")]
    Svd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TaskKind {
    Regression,
    Classification,
}

impl TaskKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            TaskKind::Regression => "regression",
            TaskKind::Classification => "classification",
        }
    }
}

impl fmt::Display for TaskKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Design matrix plus response (regression) or `{-1, +1}` labels
/// (classification). Rows are samples, columns are coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub matrix: Design,
    pub target: Vec<f64>,
    pub kind: TaskKind,
    pub ground_truth: Option<Vec<f64>>,
}

impl Dataset {
    pub fn n_samples(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn dim(&self) -> usize {
        self.matrix.ncols()
    }
}

/// Seventeen significant digits, enough for an exact `f64` round trip.
pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

/// Loads either container: files starting with the `cdkit-dataset` magic are
/// read as containers, anything else as LIBSVM text.
pub fn load_any(path: impl AsRef<Path>) -> Result<Dataset, DataError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    if text.starts_with(CONTAINER_MAGIC) {
        read_dataset(text.as_bytes())
    } else {
        parse_libsvm(text.as_bytes())
    }
}
