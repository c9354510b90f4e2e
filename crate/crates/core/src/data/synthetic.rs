use nalgebra::DMatrix;

use super::{DataError, Dataset, TaskKind};
use crate::matrix::Design;
use crate::rng::ShiftRng;

/// Condition number used to place the nonzero singular values when an
/// infinite condition number is requested.
pub const INFINITE_KAPPA_SURROGATE: f64 = 1e4;

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    pub n_samples: usize,
    pub dim: usize,
    /// Condition number of `X^T X`; `f64::INFINITY` gives a singular Gram matrix.
    pub kappa: f64,
    pub sigma: f64,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self {
            n_samples: 200,
            dim: 100,
            kappa: 100.0,
            sigma: 1.0,
            seed: 0,
        }
    }
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<(), DataError> {
        if self.n_samples == 0 || self.dim == 0 {
            return Err(DataError::InvalidSpec("sizes must be positive".into()));
        }
        if self.kappa.is_nan() || self.kappa < 1.0 {
            return Err(DataError::InvalidSpec(format!(
                "kappa must be >= 1 or infinite, got {}",
                self.kappa
            )));
        }
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return Err(DataError::InvalidSpec(format!(
                "sigma must be a nonnegative number, got {}",
                self.sigma
            )));
        }
        if self.kappa.is_infinite() && self.n_samples.min(self.dim) < 2 {
            return Err(DataError::InvalidSpec(
                "infinite kappa needs at least two singular values".into(),
            ));
        }
        Ok(())
    }

    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.n_samples < self.dim {
            out.push(format!(
                "n_samples ({}) < dim ({}): X^T X is rank deficient regardless of kappa",
                self.n_samples, self.dim
            ));
        }
        out
    }
}

/// Maps `values` affinely so that the smallest becomes `lo` and the largest 1.
fn rescale_affine(values: &mut [f64], lo: f64) {
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = max - min;
    for v in values.iter_mut() {
        *v = if span > 0.0 {
            lo + (*v - min) * (1.0 - lo) / span
        } else {
            1.0
        };
    }
}

/// Gaussian least-squares instance whose Gram matrix has condition number
/// exactly `kappa`.
///
/// Draw order from the seeded stream: the `n_samples x dim` Gaussian matrix
/// row by row, then `beta*` (`dim` normals), then the `n_samples` noise normals.
/// The singular values of the Gaussian matrix are mapped affinely onto
/// `[1/sqrt(kappa), 1]`. For infinite `kappa` the smallest one is set to
/// zero and the rest are mapped onto `[1/sqrt(1e4), 1]`.
pub fn generate_linear_regression(spec: &SyntheticSpec) -> Result<Dataset, DataError> {
    spec.validate()?;
    let (n, p) = (spec.n_samples, spec.dim);
    let mut rng = ShiftRng::new(spec.seed);

    let raw = rng.normal_vec(n * p);
    let gaussian = DMatrix::from_row_slice(n, p, &raw);
    let svd = gaussian.svd(true, true);
    let u = svd.u.ok_or(DataError::Svd)?;
    let v_t = svd.v_t.ok_or(DataError::Svd)?;
    let mut sv: Vec<f64> = svd.singular_values.iter().copied().collect();
    if sv.iter().any(|s| !s.is_finite()) {
        return Err(DataError::Svd);
    }

    if spec.kappa.is_infinite() {
        let smallest = sv
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, _)| i)
            .ok_or(DataError::Svd)?;
        let mut rest: Vec<f64> = sv
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != smallest)
            .map(|(_, &s)| s)
            .collect();
        rescale_affine(&mut rest, 1.0 / INFINITE_KAPPA_SURROGATE.sqrt());
        let mut rest = rest.into_iter();
        for (i, s) in sv.iter_mut().enumerate() {
            *s = if i == smallest {
                0.0
            } else {
                rest.next().expect("one value per remaining slot")
            };
        }
    } else {
        rescale_affine(&mut sv, 1.0 / spec.kappa.sqrt());
    }

    let mut scaled_u = u;
    for (j, s) in sv.iter().enumerate() {
        scaled_u.column_mut(j).scale_mut(*s);
    }
    let x = scaled_u * v_t;

    let beta_star = rng.normal_vec(p);
    let clean = &x * nalgebra::DVector::from_column_slice(&beta_star);
    let target: Vec<f64> = clean
        .iter()
        .map(|&mean| mean + spec.sigma * rng.normal())
        .collect();

    Ok(Dataset {
        matrix: Design::Dense(x),
        target,
        kind: TaskKind::Regression,
        ground_truth: Some(beta_star),
    })
}
