//! Momentum schedules, the `L`-weighted norms and the per-coordinate
//! smoothness vector shared by every solver.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NumericsError {
    #[error("theta must lie in (0, 1], got {0}")]
    ThetaOutOfRange(f64),
    #[error("strong convexity constant must be positive and finite, got {0}")]
    NonPositiveMu(f64),
    #[error("dimension must be at least 1")]
    ZeroDimension,
    #[error("smoothness constant L[{index}] = {value} is not strictly positive")]
    NonPositiveSmoothness { index: usize, value: f64 },
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
}

/// Per-coordinate Lipschitz constants of the partial derivatives.
///
/// Every entry is strictly positive. `1/sqrt(L_i)` is cached because the
/// greedy rule reads it on every iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct Smoothness {
    values: Vec<f64>,
    inv_sqrt: Vec<f64>,
}

impl Smoothness {
    pub fn new(values: Vec<f64>) -> Result<Self, NumericsError> {
        if values.is_empty() {
            return Err(NumericsError::ZeroDimension);
        }
        if let Some((index, &value)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.is_finite() && **v > 0.0))
        {
            return Err(NumericsError::NonPositiveSmoothness { index, value });
        }
        let inv_sqrt = values.iter().map(|l| 1.0 / l.sqrt()).collect();
        Ok(Self { values, inv_sqrt })
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn get(&self, i: usize) -> f64 {
        self.values[i]
    }

    /// `1 / sqrt(L_i)` for every coordinate.
    pub fn inv_sqrt(&self) -> &[f64] {
        &self.inv_sqrt
    }

    fn check_len(&self, len: usize) -> Result<(), NumericsError> {
        if len != self.values.len() {
            return Err(NumericsError::DimensionMismatch {
                expected: self.values.len(),
                found: len,
            });
        }
        Ok(())
    }
}

/// `||v||_L^2 = sum_i L_i v_i^2`.
pub fn weighted_norm_sq(v: &[f64], l: &Smoothness) -> Result<f64, NumericsError> {
    l.check_len(v.len())?;
    Ok(v.iter().zip(l.values()).map(|(x, li)| li * x * x).sum())
}

/// `||g||_{L^-1}^2 = sum_i g_i^2 / L_i`.
pub fn weighted_inv_norm_sq(g: &[f64], l: &Smoothness) -> Result<f64, NumericsError> {
    l.check_len(g.len())?;
    Ok(g.iter().zip(l.values()).map(|(x, li)| x * x / li).sum())
}

/// `||a - b||_L^2` without allocating the difference.
pub fn weighted_dist_sq(a: &[f64], b: &[f64], l: &Smoothness) -> Result<f64, NumericsError> {
    l.check_len(a.len())?;
    l.check_len(b.len())?;
    Ok(a.iter()
        .zip(b)
        .zip(l.values())
        .map(|((x, y), li)| li * (x - y) * (x - y))
        .sum())
}

/// Positive root `t` of `t^2 = prev^2 (1 - t)`.
///
/// Written as `2 prev / (prev + sqrt(prev^2 + 4))`, the rationalised form of
/// `(-prev^2 + prev sqrt(prev^2 + 4)) / 2`, so no cancellation occurs.
pub fn theta_next(prev: f64) -> Result<f64, NumericsError> {
    if !(prev > 0.0 && prev <= 1.0) {
        return Err(NumericsError::ThetaOutOfRange(prev));
    }
    Ok(2.0 * prev / (prev + (prev * prev + 4.0).sqrt()))
}

/// Incremental momentum schedule for the non-strongly-convex framework.
///
/// Starts at `theta_0 = 1` and advances one step at a time, so runs of any
/// length need O(1) memory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThetaSchedule {
    theta: f64,
    k: usize,
}

impl Default for ThetaSchedule {
    fn default() -> Self {
        Self::new()
    }
}

impl ThetaSchedule {
    pub fn new() -> Self {
        Self { theta: 1.0, k: 0 }
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn advance(&mut self) {
        // theta stays in (0, 1] by construction
        self.theta = theta_next(self.theta).expect("theta schedule left (0, 1]");
        self.k += 1;
    }
}

impl Iterator for ThetaSchedule {
    type Item = f64;

    fn next(&mut self) -> Option<f64> {
        let current = self.theta;
        self.advance();
        Some(current)
    }
}

/// Momentum (`a`) and coupling (`b`) parameters of the strongly convex
/// framework for a given `mu` (measured in `||.||_L`) and dimension.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StrongParams {
    pub mu: f64,
    pub a: f64,
    pub b: f64,
    pub dim: usize,
}

impl StrongParams {
    /// Weight of `z` in `u = w z + (1 - w) y`.
    pub fn u_weight_z(&self) -> f64 {
        self.a * self.a / (self.a * self.a + self.b)
    }

    /// Weight of `y` in `u`.
    pub fn u_weight_y(&self) -> f64 {
        self.b / (self.a * self.a + self.b)
    }

    /// Coefficient of `grad_j f(y) / L_j` in the `z` step.
    pub fn z_step_scale(&self) -> f64 {
        self.a / ((self.a * self.a + self.b) * self.dim as f64)
    }

    /// Per-iteration contraction factor `1 - a`.
    pub fn contraction(&self) -> f64 {
        1.0 - self.a
    }
}

pub fn strong_params(mu: f64, dim: usize) -> Result<StrongParams, NumericsError> {
    if !(mu > 0.0 && mu.is_finite()) {
        return Err(NumericsError::NonPositiveMu(mu));
    }
    if dim == 0 {
        return Err(NumericsError::ZeroDimension);
    }
    let n = dim as f64;
    let root = mu.sqrt();
    let a = root / (n + root);
    let b = mu * a / (n * n);
    Ok(StrongParams { mu, a, b, dim })
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}
