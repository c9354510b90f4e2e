use std::time::{Duration, Instant};

use super::rules::Rule;
use super::state::{step_gcd_baseline, step_plain, step_strong, Mode, Probe, Schedule, SolverState};
use super::SolveError;
use crate::diagnostics::{energy_plain, energy_strong};
use crate::numerics::StrongParams;
use crate::objectives::{Objective, DEFAULT_REFRESH_PERIOD};

/// Slack allowed in the per-step descent inequality.
pub const DESCENT_TOLERANCE: f64 = 1e-10;

/// A run aborts once `f` exceeds `f0 + DIVERGENCE_FACTOR * max(1, |f0|)`.
pub const DIVERGENCE_FACTOR: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Method {
    Accelerated { rule: Rule, mode: Mode },
    /// Non-accelerated greedy coordinate descent.
    GreedyBaseline,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Accelerated { rule, .. } => rule.name(),
            Method::GreedyBaseline => "gcd",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOptions {
    pub iters: usize,
    pub seed: u64,
    pub record_period: usize,
    pub f_ref: Option<f64>,
    pub x_ref: Option<Vec<f64>>,
    /// Assert the one-step descent inequality on every iteration.
    pub check_descent: bool,
    /// Starting point; zero when absent.
    pub x0: Option<Vec<f64>>,
    pub refresh_period: usize,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            iters: 0,
            seed: 0,
            record_period: 1,
            f_ref: None,
            x_ref: None,
            check_descent: false,
            x0: None,
            refresh_period: DEFAULT_REFRESH_PERIOD,
        }
    }
}

/// One row of a trace. `j1`, `j2` are 0-based; absent on the initial row.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub k: usize,
    pub elapsed_seconds: f64,
    pub f_value: f64,
    pub gap: Option<f64>,
    pub j1: Option<usize>,
    pub j2: Option<usize>,
    pub theta_or_a: Option<f64>,
    /// Sum of the gamma numerator summands since the previous row.
    pub gamma_num_term: Option<f64>,
    pub gamma_den_term: Option<f64>,
    pub energy: Option<f64>,
}

impl TraceRecord {
    /// Same record with the timing field cleared, for determinism checks.
    pub fn without_timing(&self) -> Self {
        Self {
            elapsed_seconds: 0.0,
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub method: Method,
    pub dim: usize,
    pub records: Vec<TraceRecord>,
    pub final_x: Vec<f64>,
    pub final_z: Vec<f64>,
    pub strong: Option<StrongParams>,
    /// Iterations on which the descent inequality was evaluated.
    pub descent_checks: usize,
    /// Largest `f(x+) - (f(y) - g^2 / (2 L))` seen; negative means slack.
    pub max_descent_excess: f64,
}

impl Trace {
    pub fn last(&self) -> &TraceRecord {
        self.records.last().expect("a trace always has its initial row")
    }
}

struct Recorder<'a> {
    problem: &'a dyn Objective,
    options: &'a RunOptions,
    f0: f64,
}

impl Recorder<'_> {
    fn check_value(&self, k: usize, f: f64) -> Result<(), SolveError> {
        if !f.is_finite() {
            return Err(SolveError::NonFinite { k });
        }
        if f > self.f0 + DIVERGENCE_FACTOR * self.f0.abs().max(1.0) {
            return Err(SolveError::Diverged { k, f, f0: self.f0 });
        }
        Ok(())
    }

    fn energy(&self, state: &SolverState, f: f64) -> Result<Option<f64>, SolveError> {
        let (Some(f_ref), Some(x_ref)) = (self.options.f_ref, self.options.x_ref.as_deref()) else {
            return Ok(None);
        };
        let l = self.problem.smoothness();
        let dim = self.problem.dim();
        Ok(Some(match &state.schedule {
            Schedule::Plain(s) => energy_plain(f - f_ref, state.z(), x_ref, l, s.theta())?,
            Schedule::Strong(p) => energy_strong(f - f_ref, state.z(), x_ref, l, p, dim)?,
        }))
    }
}

/// Runs `iters` iterations of `method`, recording row 0 and then every
/// `record_period`-th iterate plus the last one.
///
/// Only the step calls are timed; recording and checks are excluded.
pub fn run(problem: &dyn Objective, method: Method, options: &RunOptions) -> Result<Trace, SolveError> {
    if options.record_period == 0 {
        return Err(SolveError::InvalidOptions("record_period must be positive".into()));
    }
    let dim = problem.dim();
    if let Some(x_ref) = &options.x_ref {
        problem.check_dim(x_ref.len())?;
    }
    let x0 = options.x0.clone().unwrap_or_else(|| vec![0.0; dim]);
    let mode = match method {
        Method::Accelerated { mode, .. } => mode,
        Method::GreedyBaseline => Mode::Plain,
    };
    let mut state = SolverState::new(problem, x0, mode, options.seed)?
        .with_refresh_period(options.refresh_period);

    let f0 = problem.value(state.x())?;
    let recorder = Recorder { problem, options, f0 };
    recorder.check_value(0, f0)?;
    let gap = |f: f64| options.f_ref.map(|r| f - r);

    let initial_momentum = match method {
        Method::Accelerated { .. } => Some(state.schedule.momentum()),
        Method::GreedyBaseline => None,
    };
    let mut records = vec![TraceRecord {
        k: 0,
        elapsed_seconds: 0.0,
        f_value: f0,
        gap: gap(f0),
        j1: None,
        j2: None,
        theta_or_a: initial_momentum,
        gamma_num_term: None,
        gamma_den_term: None,
        energy: match method {
            Method::Accelerated { .. } => recorder.energy(&state, f0)?,
            Method::GreedyBaseline => None,
        },
    }];

    let probe = Probe {
        x_ref: match method {
            Method::Accelerated { mode: Mode::Plain, .. } => options.x_ref.as_deref(),
            _ => None,
        },
        value_at_y: options.check_descent,
    };
    let mut elapsed = Duration::ZERO;
    let mut gamma_acc: Option<(f64, f64)> = None;
    let mut descent_checks = 0usize;
    let mut max_descent_excess = f64::NEG_INFINITY;

    for it in 0..options.iters {
        let start = Instant::now();
        let step = match method {
            Method::Accelerated { rule, mode: Mode::Plain } => step_plain(&mut state, problem, rule, probe),
            Method::Accelerated { rule, mode: Mode::Strong { .. } } => {
                step_strong(&mut state, problem, rule, probe)
            }
            Method::GreedyBaseline => step_gcd_baseline(&mut state, problem, probe),
        }?;
        elapsed += start.elapsed();
        let k = it + 1;

        if let (Some(num), Some(den)) = (step.gamma_num, step.gamma_den) {
            let acc = gamma_acc.get_or_insert((0.0, 0.0));
            acc.0 += num;
            acc.1 += den;
        }

        let mut f_new = None;
        if let Some(f_y) = step.value_at_y {
            let f = problem.value(state.x())?;
            recorder.check_value(k, f)?;
            let l = problem.smoothness().get(step.j1);
            let excess = f - (f_y - step.g1 * step.g1 / (2.0 * l));
            descent_checks += 1;
            max_descent_excess = max_descent_excess.max(excess);
            if excess > DESCENT_TOLERANCE {
                return Err(SolveError::DescentViolation { k, excess });
            }
            f_new = Some(f);
        }

        if k % options.record_period == 0 || k == options.iters {
            let f = match f_new {
                Some(f) => f,
                None => problem.value(state.x())?,
            };
            recorder.check_value(k, f)?;
            let (gamma_num_term, gamma_den_term) = match gamma_acc.take() {
                Some((n, d)) => (Some(n), Some(d)),
                None => (None, None),
            };
            records.push(TraceRecord {
                k,
                elapsed_seconds: elapsed.as_secs_f64(),
                f_value: f,
                gap: gap(f),
                j1: Some(step.j1),
                j2: Some(step.j2),
                theta_or_a: step.momentum,
                gamma_num_term,
                gamma_den_term,
                energy: match method {
                    Method::Accelerated { .. } => recorder.energy(&state, f)?,
                    Method::GreedyBaseline => None,
                },
            });
        }
    }

    let strong = match &state.schedule {
        Schedule::Strong(p) if matches!(method, Method::Accelerated { .. }) => Some(*p),
        _ => None,
    };
    Ok(Trace {
        method,
        dim,
        final_x: state.x().to_vec(),
        final_z: state.z().to_vec(),
        records,
        strong,
        descent_checks,
        max_descent_excess,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objectives::LeastSquaresProblem;
    use nalgebra::DMatrix;

    fn small_problem() -> LeastSquaresProblem {
        let x = DMatrix::from_row_slice(4, 3, &[
            1.0, 0.2, 0.0, //
            0.0, 1.0, 0.5, //
            0.3, 0.0, 1.0, //
            1.0, 1.0, 1.0,
        ]);
        LeastSquaresProblem::new(x, vec![1.0, -1.0, 0.5, 2.0]).unwrap()
    }

    fn all_methods() -> Vec<Method> {
        let mut out = vec![Method::GreedyBaseline];
        for rule in [Rule::Greedy, Rule::Random, Rule::SemiGreedy] {
            out.push(Method::Accelerated { rule, mode: Mode::Plain });
            out.push(Method::Accelerated {
                rule,
                mode: Mode::Strong { mu: 0.05 },
            });
        }
        out
    }

    #[test]
    fn zero_iterations_gives_initial_row_only() {
        let p = small_problem();
        let t = run(&p, all_methods()[1], &RunOptions::default()).unwrap();
        assert_eq!(t.records.len(), 1);
        assert_eq!(t.records[0].k, 0);
        assert_eq!(t.records[0].theta_or_a, Some(1.0));
    }

    #[test]
    fn record_period_and_final_row() {
        let p = small_problem();
        let opts = RunOptions {
            iters: 10,
            record_period: 4,
            ..Default::default()
        };
        let t = run(&p, all_methods()[2], &opts).unwrap();
        let ks: Vec<usize> = t.records.iter().map(|r| r.k).collect();
        assert_eq!(ks, vec![0, 4, 8, 10]);
        assert!(t.records.windows(2).all(|w| w[0].elapsed_seconds <= w[1].elapsed_seconds));
    }

    #[test]
    fn deterministic_given_seed() {
        let p = small_problem();
        let opts = RunOptions {
            iters: 50,
            seed: 9,
            check_descent: true,
            ..Default::default()
        };
        for m in all_methods() {
            let a = run(&p, m, &opts).unwrap();
            let b = run(&p, m, &opts).unwrap();
            let strip = |t: &Trace| t.records.iter().map(TraceRecord::without_timing).collect::<Vec<_>>();
            assert_eq!(strip(&a), strip(&b), "{}", m.name());
            assert_eq!(a.descent_checks, 50);
        }
    }

    #[test]
    fn gamma_sums_are_preserved_across_record_periods() {
        let p = small_problem();
        let x_ref = vec![0.0; 3];
        let base = RunOptions {
            iters: 30,
            x_ref: Some(x_ref),
            f_ref: Some(0.0),
            ..Default::default()
        };
        let method = Method::Accelerated {
            rule: Rule::SemiGreedy,
            mode: Mode::Plain,
        };
        let every = run(&p, method, &base).unwrap();
        let sparse = run(&p, method, &RunOptions { record_period: 7, ..base.clone() }).unwrap();
        let total = |t: &Trace| {
            t.records
                .iter()
                .filter_map(|r| r.gamma_num_term.zip(r.gamma_den_term))
                .fold((0.0, 0.0), |a, (n, d)| (a.0 + n, a.1 + d))
        };
        let (a, b) = (total(&every), total(&sparse));
        assert!((a.0 - b.0).abs() <= 1e-9 * a.0.abs().max(1.0));
        assert!((a.1 - b.1).abs() <= 1e-9 * a.1.abs().max(1.0));
    }

    #[test]
    fn guard_flags_divergence_and_nan() {
        assert!(matches!(
            Recorder {
                problem: &small_problem(),
                options: &RunOptions::default(),
                f0: 1.0,
            }
            .check_value(3, 2e12),
            Err(SolveError::Diverged { k: 3, .. })
        ));
        assert!(matches!(
            Recorder {
                problem: &small_problem(),
                options: &RunOptions::default(),
                f0: 1.0,
            }
            .check_value(4, f64::NAN),
            Err(SolveError::NonFinite { k: 4 })
        ));
    }

    #[test]
    fn zero_record_period_is_rejected() {
        let p = small_problem();
        let opts = RunOptions {
            record_period: 0,
            ..Default::default()
        };
        assert!(run(&p, Method::GreedyBaseline, &opts).is_err());
    }
}
