use nalgebra::{DMatrix, DVector};

use crate::numerics::max_abs;
use crate::objectives::{LeastSquaresProblem, LogisticProblem, Objective, Problem};
use crate::solvers::{step_strong, Mode, Probe, Rule, SolveError, SolverState};

/// Target for the residual (least squares) or `||grad f||_inf` (logistic).
pub const REFERENCE_TOLERANCE: f64 = 1e-12;

/// Strong-convexity guess for the logistic reference run.
pub const LOGISTIC_MU_BAR: f64 = 1e-10;

const LOGISTIC_ITERATION_CAP: usize = 200_000;
const LOGISTIC_CHECK_PERIOD: usize = 500;
const NEWTON_MAX_DIM: usize = 2000;
const NEWTON_MAX_STEPS: usize = 100;
/// Hessian eigenvalues below this multiple of `max L_i` mean the optimum is
/// not attained (or not unique), so the reference is flagged.
const FLAT_CURVATURE: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct Reference {
    pub f_ref: f64,
    pub x_ref: Vec<f64>,
    pub low_confidence: bool,
    pub iterations: usize,
    /// Final residual `||gram x - gram_y||_inf` or `||grad f||_inf`.
    pub residual: f64,
}

pub fn reference_solve(problem: &Problem) -> Result<Reference, SolveError> {
    match problem {
        Problem::LeastSquares(p) => reference_solve_least_squares(p),
        Problem::Logistic(p) => reference_solve_logistic(p, LOGISTIC_ITERATION_CAP),
    }
}

/// Conjugate gradients on `gram beta = gram_y` from `beta = 0`, which
/// converges to the minimum-norm minimiser when `gram` is singular.
pub fn reference_solve_least_squares(problem: &LeastSquaresProblem) -> Result<Reference, SolveError> {
    let g = problem.gram();
    let b = DVector::from_column_slice(problem.gram_y());
    let p = b.len();
    let tol = REFERENCE_TOLERANCE * b.amax().max(1.0);
    let cap = (20 * p).max(200);

    let mut x = DVector::zeros(p);
    let mut r = b.clone();
    let mut d = r.clone();
    let mut rs = r.dot(&r);
    let mut iterations = 0;
    let mut best = (r.amax(), x.clone());
    while best.0 > tol && iterations < cap {
        let gd = g * &d;
        let curvature = d.dot(&gd);
        if curvature <= 0.0 {
            break;
        }
        let alpha = rs / curvature;
        x.axpy(alpha, &d, 1.0);
        iterations += 1;
        if iterations % 50 == 0 {
            r = &b - g * &x;
        } else {
            r.axpy(-alpha, &gd, 1.0);
        }
        let rs_next = r.dot(&r);
        let true_residual = (&b - g * &x).amax();
        if true_residual < best.0 {
            best = (true_residual, x.clone());
        }
        d = &r + (rs_next / rs) * &d;
        rs = rs_next;
    }

    let (residual, x) = best;
    let x_ref: Vec<f64> = x.iter().copied().collect();
    Ok(Reference {
        f_ref: problem.value(&x_ref)?,
        x_ref,
        low_confidence: residual > tol,
        iterations,
        residual,
    })
}

/// Accelerated greedy coordinate descent in strong mode with a tiny `mu`,
/// followed by a damped Newton polish when the dimension allows.
pub fn reference_solve_logistic(problem: &LogisticProblem, cap: usize) -> Result<Reference, SolveError> {
    let dim = problem.dim();
    let mut state = SolverState::new(problem, vec![0.0; dim], Mode::Strong { mu: LOGISTIC_MU_BAR }, 0)?;
    let mut residual = max_abs(&problem.full_gradient(state.x())?);
    while residual > REFERENCE_TOLERANCE && state.k < cap {
        for _ in 0..LOGISTIC_CHECK_PERIOD.min(cap - state.k) {
            step_strong(&mut state, problem, Rule::Greedy, Probe::default())?;
        }
        residual = max_abs(&problem.full_gradient(state.x())?);
        if !residual.is_finite() {
            return Err(SolveError::NonFinite { k: state.k });
        }
    }
    let mut iterations = state.k;
    let mut x = state.x().to_vec();

    let mut flat = false;
    if dim <= NEWTON_MAX_DIM {
        let (steps, r, smallest_curvature) = newton_polish(problem, &mut x)?;
        iterations += steps;
        residual = r;
        let scale = problem.smoothness().values().iter().copied().fold(0.0, f64::max);
        flat = smallest_curvature <= FLAT_CURVATURE * scale;
    }

    Ok(Reference {
        f_ref: problem.value(&x)?,
        x_ref: x,
        low_confidence: residual > REFERENCE_TOLERANCE || flat,
        iterations,
        residual,
    })
}

fn logistic_hessian(problem: &LogisticProblem, x: &[f64]) -> DMatrix<f64> {
    let dim = problem.dim();
    let margins = problem.image(x);
    let inv_n = 1.0 / problem.n_samples() as f64;
    let mut h = DMatrix::zeros(dim, dim);
    for (row, m) in problem.design().to_rows().iter().zip(&margins) {
        let q = 1.0 / (1.0 + m.exp());
        let c = inv_n * q * (1.0 - q);
        if c == 0.0 {
            continue;
        }
        for &(i, vi) in row {
            for &(j, vj) in row {
                h[(i, j)] += c * vi * vj;
            }
        }
    }
    h
}

/// Returns `(steps, ||grad||_inf, smallest Hessian eigenvalue)` at the end.
fn newton_polish(problem: &LogisticProblem, x: &mut Vec<f64>) -> Result<(usize, f64, f64), SolveError> {
    let mut f = problem.value(x)?;
    let mut grad = problem.full_gradient(x)?;
    let mut steps = 0;
    while max_abs(&grad) > REFERENCE_TOLERANCE && steps < NEWTON_MAX_STEPS {
        let h = logistic_hessian(problem, x);
        let g = DVector::from_column_slice(&grad);
        let direction = match h.clone().cholesky() {
            Some(c) => c.solve(&g),
            None => {
                let ridge = 1e-12 * h.diagonal().amax().max(f64::MIN_POSITIVE);
                match (h + DMatrix::identity(x.len(), x.len()) * ridge).cholesky() {
                    Some(c) => c.solve(&g),
                    None => break,
                }
            }
        };
        let slope = -g.dot(&direction);
        if slope.is_nan() || slope >= 0.0 {
            break;
        }
        let mut t = 1.0;
        let mut accepted = false;
        while t > 1e-20 {
            let trial: Vec<f64> = x.iter().zip(direction.iter()).map(|(a, d)| a - t * d).collect();
            let f_trial = problem.value(&trial)?;
            if f_trial <= f + 1e-4 * t * slope {
                *x = trial;
                f = f_trial;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        steps += 1;
        grad = problem.full_gradient(x)?;
        if !accepted {
            break;
        }
    }
    let eig = logistic_hessian(problem, x).symmetric_eigen();
    let smallest = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    Ok((steps, max_abs(&grad), smallest))
}
