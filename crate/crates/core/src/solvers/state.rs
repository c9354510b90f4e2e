use super::rules::{select_greedy, select_random, Rule};
use super::SolveError;
use crate::numerics::{strong_params, StrongParams, ThetaSchedule};
use crate::objectives::{GradientCache, Iterate, Objective};
use crate::rng::ShiftRng;

/// Which framework a run uses.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Mode {
    Plain,
    /// Strongly convex framework with `mu` measured in `||.||_L`.
    Strong { mu: f64 },
}

impl Mode {
    pub fn name(&self) -> &'static str {
        match self {
            Mode::Plain => "plain",
            Mode::Strong { .. } => "strong",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Schedule {
    Plain(ThetaSchedule),
    Strong(StrongParams),
}

impl Schedule {
    fn name(&self) -> &'static str {
        match self {
            Schedule::Plain(_) => "plain",
            Schedule::Strong(_) => "strong",
        }
    }

    /// `theta_k` in plain mode, `a` in strong mode.
    pub fn momentum(&self) -> f64 {
        match self {
            Schedule::Plain(s) => s.theta(),
            Schedule::Strong(p) => p.a,
        }
    }
}

/// What a step should measure besides advancing the iterates.
#[derive(Debug, Clone, Copy, Default)]
pub struct Probe<'a> {
    /// Reference minimiser; enables the gamma summands.
    pub x_ref: Option<&'a [f64]>,
    /// Evaluate `f(y)` before the update (for the descent check).
    pub value_at_y: bool,
}

/// Outcome of one iteration. Coordinates are 0-based.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub j1: usize,
    pub j2: usize,
    /// `theta_k` or `a` used by this step; `None` for the baseline.
    pub momentum: Option<f64>,
    /// `grad_{j1} f(y)`.
    pub g1: f64,
    pub g2: f64,
    pub value_at_y: Option<f64>,
    pub gamma_num: Option<f64>,
    pub gamma_den: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct SolverState {
    pub cache: GradientCache,
    pub schedule: Schedule,
    pub rng: ShiftRng,
    pub k: usize,
    grad_y: Vec<f64>,
}

impl SolverState {
    pub fn new(
        problem: &dyn Objective,
        x0: Vec<f64>,
        mode: Mode,
        seed: u64,
    ) -> Result<Self, SolveError> {
        let dim = problem.dim();
        let schedule = match mode {
            Mode::Plain => Schedule::Plain(ThetaSchedule::new()),
            Mode::Strong { mu } => Schedule::Strong(strong_params(mu, dim)?),
        };
        Ok(Self {
            cache: GradientCache::new(problem, x0)?,
            schedule,
            rng: ShiftRng::new(seed),
            k: 0,
            grad_y: vec![0.0; dim],
        })
    }

    pub fn with_refresh_period(mut self, period: usize) -> Self {
        self.cache = self.cache.with_refresh_period(period);
        self
    }

    pub fn x(&self) -> &[f64] {
        self.cache.x()
    }

    pub fn z(&self) -> &[f64] {
        self.cache.z()
    }

    /// Reads both coordinates at the loaded `y` and fills the probe fields.
    /// `theta` scales the gamma summands.
    fn read_at_y(
        &mut self,
        problem: &dyn Objective,
        rule: Rule,
        probe: Probe<'_>,
        theta: f64,
    ) -> Result<StepRecord, SolveError> {
        let dim = problem.dim();
        let full = rule.needs_full_gradient() || probe.x_ref.is_some();
        if full {
            self.cache.y_gradient(problem, &mut self.grad_y);
        }
        let j1 = match rule {
            Rule::Greedy | Rule::SemiGreedy => select_greedy(&self.grad_y, problem.smoothness()),
            Rule::Random => select_random(&mut self.rng, dim),
        };
        let j2 = match rule {
            Rule::Greedy | Rule::Random => j1,
            Rule::SemiGreedy => select_random(&mut self.rng, dim),
        };
        let read = |i: usize| {
            if full {
                self.grad_y[i]
            } else {
                self.cache.y_coordinate_gradient(problem, i)
            }
        };
        let (g1, g2) = (read(j1), read(j2));
        if !g1.is_finite() || !g2.is_finite() {
            return Err(SolveError::NonFinite { k: self.k });
        }

        let value_at_y = if probe.value_at_y {
            Some(problem.value(self.cache.y())?)
        } else {
            None
        };

        // The denominator uses the coordinate that drives the z-update.
        let (gamma_num, gamma_den) = match probe.x_ref {
            Some(x_ref) => {
                problem.check_dim(x_ref.len())?;
                let z = self.cache.z();
                let num: f64 = self
                    .grad_y
                    .iter()
                    .zip(z)
                    .zip(x_ref)
                    .map(|((g, z), r)| g * (z - r))
                    .sum();
                let den = dim as f64 * g2 * (z[j2] - x_ref[j2]);
                (Some(num / theta), Some(den / theta))
            }
            None => (None, None),
        };

        Ok(StepRecord {
            j1,
            j2,
            momentum: Some(theta),
            g1,
            g2,
            value_at_y,
            gamma_num,
            gamma_den,
        })
    }
}

fn mode_mismatch(expected: &'static str, state: &SolverState) -> SolveError {
    SolveError::ModeMismatch {
        expected,
        found: state.schedule.name(),
    }
}

/// One iteration of the non-strongly-convex framework.
pub fn step_plain(
    state: &mut SolverState,
    problem: &dyn Objective,
    rule: Rule,
    probe: Probe<'_>,
) -> Result<StepRecord, SolveError> {
    let theta = match &state.schedule {
        Schedule::Plain(s) => s.theta(),
        Schedule::Strong(_) => return Err(mode_mismatch("plain", state)),
    };
    state.cache.load_combination(problem, theta);
    let record = state.read_at_y(problem, rule, probe, theta)?;

    let l = problem.smoothness();
    let n = problem.dim() as f64;
    state.cache.set_x_to_y(problem);
    state
        .cache
        .apply_coordinate_step(problem, Iterate::X, record.j1, -record.g1 / l.get(record.j1))?;
    state.cache.apply_coordinate_step(
        problem,
        Iterate::Z,
        record.j2,
        -record.g2 / (n * l.get(record.j2) * theta),
    )?;

    if let Schedule::Plain(s) = &mut state.schedule {
        s.advance();
    }
    state.k += 1;
    Ok(record)
}

/// One iteration of the strongly convex framework.
pub fn step_strong(
    state: &mut SolverState,
    problem: &dyn Objective,
    rule: Rule,
    probe: Probe<'_>,
) -> Result<StepRecord, SolveError> {
    let params = match &state.schedule {
        Schedule::Strong(p) => *p,
        Schedule::Plain(_) => return Err(mode_mismatch("strong", state)),
    };
    state.cache.load_combination(problem, params.a);
    let mut record = state.read_at_y(problem, rule, probe, params.a)?;
    // The gamma summands belong to the plain framework.
    record.gamma_num = None;
    record.gamma_den = None;

    let l = problem.smoothness();
    state.cache.set_x_to_y(problem);
    state
        .cache
        .apply_coordinate_step(problem, Iterate::X, record.j1, -record.g1 / l.get(record.j1))?;
    state.cache.mix_z_with_y(problem, params.u_weight_z());
    state.cache.apply_coordinate_step(
        problem,
        Iterate::Z,
        record.j2,
        -params.z_step_scale() * record.g2 / l.get(record.j2),
    )?;

    state.k += 1;
    Ok(record)
}

/// One greedy coordinate descent step on `x`; `z` is left alone.
pub fn step_gcd_baseline(
    state: &mut SolverState,
    problem: &dyn Objective,
    probe: Probe<'_>,
) -> Result<StepRecord, SolveError> {
    state.cache.load_combination(problem, 0.0);
    state.cache.y_gradient(problem, &mut state.grad_y);
    let l = problem.smoothness();
    let j = select_greedy(&state.grad_y, l);
    let g = state.grad_y[j];
    if !g.is_finite() {
        return Err(SolveError::NonFinite { k: state.k });
    }
    let value_at_y = if probe.value_at_y {
        Some(problem.value(state.cache.x())?)
    } else {
        None
    };
    state
        .cache
        .apply_coordinate_step(problem, Iterate::X, j, -g / l.get(j))?;
    state.k += 1;
    Ok(StepRecord {
        j1: j,
        j2: j,
        momentum: None,
        g1: g,
        g2: g,
        value_at_y,
        gamma_num: None,
        gamma_den: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objectives::LeastSquaresProblem;
    use nalgebra::DMatrix;

    /// `f(x) = x^2 / 2` written as `(x / sqrt 2 - 0)^2`.
    fn half_square() -> LeastSquaresProblem {
        LeastSquaresProblem::new(DMatrix::from_element(1, 1, 0.5_f64.sqrt()), vec![0.0]).unwrap()
    }

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-14
    }

    #[test]
    fn plain_single_iteration_by_hand() {
        let p = half_square();
        assert!(close(p.smoothness().get(0), 1.0));
        let mut s = SolverState::new(&p, vec![1.0], Mode::Plain, 0).unwrap();
        let r = step_plain(&mut s, &p, Rule::Random, Probe::default()).unwrap();
        assert!(close(r.g1, 1.0));
        assert!(close(s.x()[0], 0.0));
        assert!(close(s.z()[0], 0.0));
        assert_eq!(s.k, 1);
    }

    #[test]
    fn strong_single_iteration_by_hand() {
        let p = half_square();
        let mut s = SolverState::new(&p, vec![1.0], Mode::Strong { mu: 1.0 }, 0).unwrap();
        step_strong(&mut s, &p, Rule::Greedy, Probe::default()).unwrap();
        assert!(close(s.x()[0], 0.0));
        assert!(close(s.z()[0], 1.0 / 3.0));
    }

    #[test]
    fn zero_gradient_is_a_fixed_point() {
        let p = LeastSquaresProblem::new(DMatrix::identity(2, 2), vec![1.0, 2.0]).unwrap();
        for rule in [Rule::Greedy, Rule::Random, Rule::SemiGreedy] {
            let mut s = SolverState::new(&p, vec![1.0, 2.0], Mode::Plain, 3).unwrap();
            step_plain(&mut s, &p, rule, Probe::default()).unwrap();
            assert_eq!(s.x(), &[1.0, 2.0]);
            assert_eq!(s.z(), &[1.0, 2.0]);
        }
        // Strong mode with z == x: the mixing is a no-op too.
        let mut s = SolverState::new(&p, vec![1.0, 2.0], Mode::Strong { mu: 1.0 }, 3).unwrap();
        step_strong(&mut s, &p, Rule::SemiGreedy, Probe::default()).unwrap();
        assert_eq!(s.x(), &[1.0, 2.0]);
        assert_eq!(s.z(), &[1.0, 2.0]);
    }

    #[test]
    fn greedy_uses_the_larger_coordinate_for_both_updates() {
        // f = ||beta - y||^2 has gradient 2 (beta - y); start so that grad = (3, -4).
        let p = LeastSquaresProblem::new(DMatrix::identity(2, 2), vec![0.0, 0.0]).unwrap();
        let mut s = SolverState::new(&p, vec![1.5, -2.0], Mode::Plain, 0).unwrap();
        let r = step_plain(&mut s, &p, Rule::Greedy, Probe::default()).unwrap();
        assert_eq!((r.j1, r.j2), (1, 1));
        assert_eq!(s.x()[0], 1.5);
    }

    #[test]
    fn mode_mismatch_is_reported() {
        let p = half_square();
        let mut s = SolverState::new(&p, vec![1.0], Mode::Plain, 0).unwrap();
        assert!(matches!(
            step_strong(&mut s, &p, Rule::Greedy, Probe::default()),
            Err(SolveError::ModeMismatch { .. })
        ));
    }

    #[test]
    fn gcd_solves_scalar_quadratic_in_one_step() {
        let p = half_square();
        let mut s = SolverState::new(&p, vec![5.0], Mode::Plain, 0).unwrap();
        step_gcd_baseline(&mut s, &p, Probe::default()).unwrap();
        assert!(close(s.x()[0], 0.0));
    }

    #[test]
    fn scalar_runs_match_accelerated_gradient_descent() {
        // f(x) = 2 (x - 1)^2 on one coordinate, L = 4.
        let p = LeastSquaresProblem::new(DMatrix::from_element(1, 1, 2.0_f64.sqrt()), vec![
            2.0_f64.sqrt(),
        ])
        .unwrap();
        let l = p.smoothness().get(0);
        let grad = |v: f64| l * (v - 1.0);

        let mut states: Vec<SolverState> = (0..3)
            .map(|seed| SolverState::new(&p, vec![-3.0], Mode::Plain, seed).unwrap())
            .collect();
        let (mut x, mut z) = (-3.0_f64, -3.0_f64);
        let mut theta = 1.0_f64;
        for _ in 0..200 {
            let y = (1.0 - theta) * x + theta * z;
            let g = grad(y);
            x = y - g / l;
            z -= g / (l * theta);
            theta = crate::numerics::theta_next(theta).unwrap();
            for (s, rule) in states.iter_mut().zip([Rule::Greedy, Rule::Random, Rule::SemiGreedy]) {
                step_plain(s, &p, rule, Probe::default()).unwrap();
                assert!((s.x()[0] - x).abs() <= 1e-12 * (1.0 + x.abs()));
                assert!((s.z()[0] - z).abs() <= 1e-12 * (1.0 + z.abs()));
            }
        }
    }
}
