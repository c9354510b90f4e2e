//! Accelerated coordinate descent with randomized, greedy and semi-greedy
//! coordinate rules, together with the objectives, datasets and diagnostics
//! needed to study their convergence.
//!
//! * [`numerics`]: momentum schedules, `L`-weighted norms.
//! * [`objectives`]: least squares and logistic loss with incremental caches.
//! * [`data`]: synthetic instances with controlled conditioning, LIBSVM I/O.
//! * [`solvers`]: the two accelerated frameworks and plain greedy descent.
//! * [`diagnostics`]: bound envelopes, energy, the greedy-ratio estimator.
//! * [`cli`]: the `cdkit` command-line harness.

pub mod cli;
pub mod data;
pub mod diagnostics;
pub mod matrix;
pub mod numerics;
pub mod objectives;
pub mod rng;
pub mod solvers;
