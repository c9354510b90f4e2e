//! Smooth convex objectives with the incremental caches coordinate methods
//! rely on.
//!
//! Both objectives are reached through an *affine image* of the iterate:
//! least squares caches the gradient `2 (X^T X beta - X^T y)` and logistic
//! regression caches the margins `label_r * x_r^T beta`. Because the image is
//! affine, the image of `(1 - t) x + t z` is the same combination of the
//! cached images, and a single-coordinate step is a rank-one update of it.

mod cache;
mod least_squares;
mod logistic;

pub use cache::{GradientCache, Iterate, Point, DEFAULT_REFRESH_PERIOD};
pub use least_squares::{LeastSquaresProblem, MuMode};
pub use logistic::LogisticProblem;

use thiserror::Error;

use crate::data::{Dataset, TaskKind};
use crate::numerics::{NumericsError, Smoothness};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ObjectiveError {
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("column {0} of the design matrix is identically zero")]
    DegenerateColumn(usize),
    #[error("label {value} at sample {index} is not -1 or +1")]
    InvalidLabel { index: usize, value: f64 },
    #[error("coordinate {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },
    #[error("gradient cache is stale ({steps} incremental steps, refresh period {period})")]
    StaleCache { steps: usize, period: usize },
    #[error("symmetric eigensolver did not converge")]
    EigenFailure,
    #[error("design matrix has no rows")]
    Empty,
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

/// A smooth convex objective in the form the solvers consume.
///
/// `image` is an affine function of `beta`. `image_weights` turns an image into
/// the vector whose pairing with column `i` gives the partial derivative
/// `grad_i f`, so a batch of coordinate reads at one point costs one
/// `image_weights` call plus one `coordinate_gradient_from_weights` per read.
pub trait Objective: Send + Sync {
    fn dim(&self) -> usize;

    fn image_len(&self) -> usize;

    fn smoothness(&self) -> &Smoothness;

    fn value(&self, beta: &[f64]) -> Result<f64, ObjectiveError>;

    fn full_gradient(&self, beta: &[f64]) -> Result<Vec<f64>, ObjectiveError>;

    /// The affine image of `beta`. Length must already be checked.
    fn image(&self, beta: &[f64]) -> Vec<f64>;

    /// `image(beta + h e_i)` from `image(beta)`, in place.
    fn image_add_coordinate(&self, i: usize, h: f64, image: &mut [f64]);

    fn image_weights(&self, image: &[f64], weights: &mut [f64]);

    fn coordinate_gradient_from_weights(&self, weights: &[f64], i: usize) -> f64;

    fn gradient_from_weights(&self, weights: &[f64], out: &mut [f64]) {
        for (i, g) in out.iter_mut().enumerate() {
            *g = self.coordinate_gradient_from_weights(weights, i);
        }
    }

    fn check_dim(&self, len: usize) -> Result<(), ObjectiveError> {
        if len != self.dim() {
            return Err(ObjectiveError::DimensionMismatch {
                expected: self.dim(),
                found: len,
            });
        }
        Ok(())
    }
}

/// A concrete objective, for code that needs more than the trait surface.
pub enum Problem {
    LeastSquares(LeastSquaresProblem),
    Logistic(LogisticProblem),
}

impl Problem {
    /// Least squares for regression data, logistic loss for classification data.
    pub fn from_dataset(dataset: &Dataset) -> Result<Self, ObjectiveError> {
        Ok(match dataset.kind {
            TaskKind::Regression => Problem::LeastSquares(LeastSquaresProblem::new(
                dataset.matrix.to_dense(),
                dataset.target.clone(),
            )?),
            TaskKind::Classification => Problem::Logistic(LogisticProblem::new(
                dataset.matrix.clone(),
                dataset.target.clone(),
            )?),
        })
    }

    pub fn as_objective(&self) -> &dyn Objective {
        match self {
            Problem::LeastSquares(p) => p,
            Problem::Logistic(p) => p,
        }
    }
}

/// Coordinate-wise smoothness of an objective.
pub fn coordinate_smoothness(problem: &dyn Objective) -> Smoothness {
    problem.smoothness().clone()
}
