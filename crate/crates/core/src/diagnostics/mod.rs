//! Bound envelopes, Lyapunov energies, the greedy-ratio (`gamma`) estimator
//! and reference solves used to measure optimality gaps.

mod gamma;
mod reference;

pub use gamma::{estimate_gamma, gamma_terms, mean_gamma_terms, GammaEstimate, GammaTerm, DEFAULT_K_BAR};
pub use reference::{
    reference_solve, reference_solve_least_squares, reference_solve_logistic, Reference,
    LOGISTIC_MU_BAR, REFERENCE_TOLERANCE,
};

use thiserror::Error;

use crate::numerics::{weighted_dist_sq, NumericsError, Smoothness, StrongParams};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DiagnosticsError {
    #[error("gamma must lie in (0, 1], got {0}")]
    GammaOutOfRange(f64),
    #[error("trace ends at k = {last} which does not exceed k_bar = {k_bar}")]
    TraceTooShort { last: usize, k_bar: usize },
    #[error("no gamma summands in trace (was a reference point supplied?)")]
    MissingTerms,
    #[error("every cumulative denominator at k >= {k_bar} is nonpositive")]
    DegenerateDenominator { k_bar: usize },
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

/// `2 n^2 R^2 / (k + 1)^2`.
pub fn bound_plain(k: usize, dim: usize, r_sq: f64) -> f64 {
    let n = dim as f64;
    let k1 = k as f64 + 1.0;
    2.0 * n * n * r_sq / (k1 * k1)
}

/// `gamma * bound_plain`; rejects `gamma` outside `(0, 1]`.
pub fn bound_agcd(k: usize, dim: usize, gamma: f64, r_sq: f64) -> Result<f64, DiagnosticsError> {
    if gamma.is_nan() || gamma <= 0.0 || gamma > 1.0 {
        return Err(DiagnosticsError::GammaOutOfRange(gamma));
    }
    Ok(gamma * bound_plain(k, dim, r_sq))
}

/// `(1 - a)^k E_0`.
pub fn bound_strong(k: usize, a: f64, initial_energy: f64) -> f64 {
    (1.0 - a).powf(k as f64) * initial_energy
}

/// `A_k = (1 - theta_k) / (n^2 theta_k^2)`; zero at `theta = 1`.
pub fn energy_weight(theta: f64, dim: usize) -> f64 {
    let n = dim as f64;
    (1.0 - theta) / (n * n * theta * theta)
}

/// `A_k gap + ||x_ref - z||_L^2 / 2`.
pub fn lyapunov_energy(
    gap: f64,
    z: &[f64],
    x_ref: &[f64],
    l: &Smoothness,
    a_k: f64,
) -> Result<f64, NumericsError> {
    Ok(a_k * gap + 0.5 * weighted_dist_sq(z, x_ref, l)?)
}

/// Plain-framework energy at the iterate whose schedule value is `theta`.
pub fn energy_plain(
    gap: f64,
    z: &[f64],
    x_ref: &[f64],
    l: &Smoothness,
    theta: f64,
) -> Result<f64, NumericsError> {
    lyapunov_energy(gap, z, x_ref, l, energy_weight(theta, l.dim()))
}

/// `gap + (n^2 / 2)(a^2 + b) ||z - x_ref||_L^2`.
pub fn energy_strong(
    gap: f64,
    z: &[f64],
    x_ref: &[f64],
    l: &Smoothness,
    params: &StrongParams,
    dim: usize,
) -> Result<f64, NumericsError> {
    let n = dim as f64;
    let coupling = 0.5 * n * n * (params.a * params.a + params.b);
    Ok(gap + coupling * weighted_dist_sq(z, x_ref, l)?)
}
