use nalgebra::DMatrix;

use super::{Objective, ObjectiveError};
use crate::numerics::Smoothness;

/// How to extract `mu` from the scaled Hessian spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MuMode {
    /// Smallest eigenvalue (zero when the Gram matrix is singular).
    Exact,
    /// Smallest eigenvalue above the rank tolerance.
    SmallestPositive,
}

/// Eigenvalues below this fraction of the largest are treated as zero.
pub const RANK_TOLERANCE: f64 = 1e-10;

/// `f(beta) = ||y - X beta||_2^2` with `X^T X` and `X^T y` precomputed.
///
/// There is no 1/2 factor, so the Hessian is `2 X^T X` and `L_i = 2 (X^T X)_ii`.
#[derive(Debug, Clone)]
pub struct LeastSquaresProblem {
    x: DMatrix<f64>,
    y: Vec<f64>,
    gram: DMatrix<f64>,
    gram_y: Vec<f64>,
    y_sq: f64,
    smoothness: Smoothness,
}

impl LeastSquaresProblem {
    pub fn new(x: DMatrix<f64>, y: Vec<f64>) -> Result<Self, ObjectiveError> {
        if x.nrows() == 0 {
            return Err(ObjectiveError::Empty);
        }
        if y.len() != x.nrows() {
            return Err(ObjectiveError::DimensionMismatch {
                expected: x.nrows(),
                found: y.len(),
            });
        }
        let gram = x.tr_mul(&x);
        // exact symmetry, so column i and row i of the Gram matrix coincide
        let gram = DMatrix::from_fn(gram.nrows(), gram.ncols(), |i, j| {
            if i <= j {
                gram[(i, j)]
            } else {
                gram[(j, i)]
            }
        });
        let yv = nalgebra::DVector::from_column_slice(&y);
        let gram_y: Vec<f64> = x.tr_mul(&yv).iter().copied().collect();
        let y_sq = y.iter().map(|v| v * v).sum();
        let mut diag = Vec::with_capacity(gram.ncols());
        for i in 0..gram.ncols() {
            let d = gram[(i, i)];
            if d == 0.0 {
                return Err(ObjectiveError::DegenerateColumn(i));
            }
            diag.push(2.0 * d);
        }
        let smoothness = Smoothness::new(diag)?;
        Ok(Self {
            x,
            y,
            gram,
            gram_y,
            y_sq,
            smoothness,
        })
    }

    pub fn design(&self) -> &DMatrix<f64> {
        &self.x
    }

    pub fn response(&self) -> &[f64] {
        &self.y
    }

    pub fn gram(&self) -> &DMatrix<f64> {
        &self.gram
    }

    pub fn gram_y(&self) -> &[f64] {
        &self.gram_y
    }

    #[inline]
    fn gram_col(&self, i: usize) -> &[f64] {
        let p = self.gram.nrows();
        &self.gram.as_slice()[i * p..(i + 1) * p]
    }

    /// Eigenvalues of `L^{-1/2} (2 X^T X) L^{-1/2}`, ascending.
    pub fn scaled_hessian_spectrum(&self) -> Result<Vec<f64>, ObjectiveError> {
        let scale: Vec<f64> = self.smoothness.inv_sqrt().to_vec();
        let p = self.dim();
        let scaled = DMatrix::from_fn(p, p, |i, j| 2.0 * self.gram[(i, j)] * scale[i] * scale[j]);
        let eig = scaled
            .try_symmetric_eigen(f64::EPSILON, 10_000)
            .ok_or(ObjectiveError::EigenFailure)?;
        let mut values: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        values.sort_by(f64::total_cmp);
        Ok(values)
    }

    /// Largest `mu` with `Hessian >= mu L` (in the chosen mode).
    pub fn strong_convexity(&self, mode: MuMode) -> Result<f64, ObjectiveError> {
        let spectrum = self.scaled_hessian_spectrum()?;
        let top = spectrum.last().copied().unwrap_or(0.0).max(0.0);
        let tol = RANK_TOLERANCE * top;
        match mode {
            MuMode::Exact => {
                let low = spectrum[0];
                Ok(if low < tol { 0.0 } else { low })
            }
            MuMode::SmallestPositive => Ok(spectrum
                .iter()
                .copied()
                .find(|&v| v >= tol && v > 0.0)
                .unwrap_or(0.0)),
        }
    }

    /// Eigenvalues of `X^T X`, ascending.
    pub fn gram_spectrum(&self) -> Result<Vec<f64>, ObjectiveError> {
        let eig = self
            .gram
            .clone()
            .try_symmetric_eigen(f64::EPSILON, 10_000)
            .ok_or(ObjectiveError::EigenFailure)?;
        let mut values: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        values.sort_by(f64::total_cmp);
        Ok(values)
    }

    /// `f` evaluated from a cached gradient, in `O(p)`:
    /// `f = beta^T (g / 2) - beta^T X^T y + y^T y`.
    pub fn value_from_gradient(&self, beta: &[f64], gradient: &[f64]) -> f64 {
        let mut acc = self.y_sq;
        for ((b, g), c) in beta.iter().zip(gradient).zip(&self.gram_y) {
            acc += b * (0.5 * g - c);
        }
        acc
    }
}

impl Objective for LeastSquaresProblem {
    fn dim(&self) -> usize {
        self.x.ncols()
    }

    fn image_len(&self) -> usize {
        self.x.ncols()
    }

    fn smoothness(&self) -> &Smoothness {
        &self.smoothness
    }

    fn value(&self, beta: &[f64]) -> Result<f64, ObjectiveError> {
        self.check_dim(beta.len())?;
        let mut residual = self.y.clone();
        for (j, &b) in beta.iter().enumerate() {
            if b == 0.0 {
                continue;
            }
            let n = self.x.nrows();
            let col = &self.x.as_slice()[j * n..(j + 1) * n];
            for (r, a) in residual.iter_mut().zip(col) {
                *r -= a * b;
            }
        }
        Ok(residual.iter().map(|r| r * r).sum())
    }

    fn full_gradient(&self, beta: &[f64]) -> Result<Vec<f64>, ObjectiveError> {
        self.check_dim(beta.len())?;
        Ok(self.image(beta))
    }

    fn image(&self, beta: &[f64]) -> Vec<f64> {
        let mut g: Vec<f64> = self.gram_y.iter().map(|c| -2.0 * c).collect();
        for (j, &b) in beta.iter().enumerate() {
            if b != 0.0 {
                for (gi, a) in g.iter_mut().zip(self.gram_col(j)) {
                    *gi += 2.0 * b * a;
                }
            }
        }
        g
    }

    fn image_add_coordinate(&self, i: usize, h: f64, image: &mut [f64]) {
        if h == 0.0 {
            return;
        }
        let scale = 2.0 * h;
        for (g, a) in image.iter_mut().zip(self.gram_col(i)) {
            *g += scale * a;
        }
    }

    fn image_weights(&self, image: &[f64], weights: &mut [f64]) {
        weights.copy_from_slice(image);
    }

    fn coordinate_gradient_from_weights(&self, weights: &[f64], i: usize) -> f64 {
        weights[i]
    }

    fn gradient_from_weights(&self, weights: &[f64], out: &mut [f64]) {
        out.copy_from_slice(weights);
    }
}
