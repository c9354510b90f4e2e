//! Accelerated coordinate descent in its non-strongly-convex (`Plain`) and
//! strongly convex (`Strong`) forms, with pluggable coordinate rules, plus
//! plain greedy coordinate descent as a baseline.
//!
//! In every iteration both coordinate reads happen at the same extrapolated
//! point `y`, before either the `x` or the `z` update is applied. `y` itself
//! only lives in the cache's scratch slot.

mod rules;
mod run;
mod state;

pub use rules::{select_greedy, select_random, Rule};
pub use run::{run, Method, RunOptions, Trace, TraceRecord, DESCENT_TOLERANCE, DIVERGENCE_FACTOR};
pub use state::{step_gcd_baseline, step_plain, step_strong, Mode, Probe, Schedule, SolverState, StepRecord};

use thiserror::Error;

use crate::numerics::NumericsError;
use crate::objectives::ObjectiveError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolveError {
    #[error(transparent)]
    Objective(#[from] ObjectiveError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error("non-finite value encountered at iteration {k}")]
    NonFinite { k: usize },
    #[error("objective diverged at iteration {k}: f = {f:e}, initial f = {f0:e}")]
    Diverged { k: usize, f: f64, f0: f64 },
    #[error("descent inequality violated at iteration {k} by {excess:e}")]
    DescentViolation { k: usize, excess: f64 },
    #[error("solver state is in {found} mode, step requires {expected} mode")]
    ModeMismatch {
        expected: &'static str,
        found: &'static str,
    },
    #[error("invalid options: {0}")]
    InvalidOptions(String),
}
