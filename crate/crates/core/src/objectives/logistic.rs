use super::{Objective, ObjectiveError};
use crate::matrix::Design;
use crate::numerics::Smoothness;

/// `f(beta) = (1/n) sum_r log(1 + exp(-label_r x_r^T beta))`.
///
/// The cached image is the margin vector `m_r = label_r x_r^T beta`.
/// `L_i = (1 / (4 n)) sum_r X_ri^2` from `sigma' <= 1/4`.
#[derive(Debug, Clone)]
pub struct LogisticProblem {
    x: Design,
    labels: Vec<f64>,
    smoothness: Smoothness,
}

/// `log(1 + exp(-m))` without overflow.
#[inline]
pub(crate) fn log1p_exp_neg(m: f64) -> f64 {
    if m > 0.0 {
        (-m).exp().ln_1p()
    } else {
        -m + m.exp().ln_1p()
    }
}

/// `1 / (1 + exp(m))` without overflow.
#[inline]
pub(crate) fn inv_one_plus_exp(m: f64) -> f64 {
    if m > 0.0 {
        let e = (-m).exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + m.exp())
    }
}

impl LogisticProblem {
    pub fn new(x: Design, labels: Vec<f64>) -> Result<Self, ObjectiveError> {
        let n = x.nrows();
        if n == 0 {
            return Err(ObjectiveError::Empty);
        }
        if labels.len() != n {
            return Err(ObjectiveError::DimensionMismatch {
                expected: n,
                found: labels.len(),
            });
        }
        if let Some((index, &value)) = labels
            .iter()
            .enumerate()
            .find(|(_, &l)| l != 1.0 && l != -1.0)
        {
            return Err(ObjectiveError::InvalidLabel { index, value });
        }
        let mut l = Vec::with_capacity(x.ncols());
        for j in 0..x.ncols() {
            let sq = x.col_sq_norm(j);
            if sq == 0.0 {
                return Err(ObjectiveError::DegenerateColumn(j));
            }
            l.push(sq / (4.0 * n as f64));
        }
        let smoothness = Smoothness::new(l)?;
        Ok(Self {
            x,
            labels,
            smoothness,
        })
    }

    pub fn n_samples(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[f64] {
        &self.labels
    }

    pub fn design(&self) -> &Design {
        &self.x
    }

    pub fn value_from_margins(&self, margins: &[f64]) -> f64 {
        margins.iter().map(|&m| log1p_exp_neg(m)).sum::<f64>() / self.n_samples() as f64
    }
}

impl Objective for LogisticProblem {
    fn dim(&self) -> usize {
        self.x.ncols()
    }

    fn image_len(&self) -> usize {
        self.labels.len()
    }

    fn smoothness(&self) -> &Smoothness {
        &self.smoothness
    }

    fn value(&self, beta: &[f64]) -> Result<f64, ObjectiveError> {
        self.check_dim(beta.len())?;
        Ok(self.value_from_margins(&self.image(beta)))
    }

    fn full_gradient(&self, beta: &[f64]) -> Result<Vec<f64>, ObjectiveError> {
        self.check_dim(beta.len())?;
        let margins = self.image(beta);
        let mut weights = vec![0.0; margins.len()];
        self.image_weights(&margins, &mut weights);
        let mut g = vec![0.0; self.dim()];
        self.gradient_from_weights(&weights, &mut g);
        Ok(g)
    }

    fn image(&self, beta: &[f64]) -> Vec<f64> {
        let mut m = self.x.mul_vec(beta);
        for (mi, l) in m.iter_mut().zip(&self.labels) {
            *mi *= l;
        }
        m
    }

    fn image_add_coordinate(&self, i: usize, h: f64, image: &mut [f64]) {
        if h == 0.0 {
            return;
        }
        self.x.col_axpy_scaled(i, h, &self.labels, image);
    }

    /// `d f / d beta_i = sum_r X_ri * weight_r` with
    /// `weight_r = -(1/n) label_r / (1 + exp(m_r))`.
    fn image_weights(&self, image: &[f64], weights: &mut [f64]) {
        let inv_n = 1.0 / self.n_samples() as f64;
        for ((w, &m), l) in weights.iter_mut().zip(image).zip(&self.labels) {
            *w = -inv_n * l * inv_one_plus_exp(m);
        }
    }

    fn coordinate_gradient_from_weights(&self, weights: &[f64], i: usize) -> f64 {
        self.x.col_dot(i, weights)
    }
}
