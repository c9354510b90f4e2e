use super::{Objective, ObjectiveError};

/// Incremental steps between full recomputations of the cached images.
pub const DEFAULT_REFRESH_PERIOD: usize = 1000;

/// Which stored iterate an update applies to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Iterate {
    X,
    Z,
}

/// A point at which a coordinate of the gradient can be read.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Point {
    X,
    Z,
    /// `(1 - t) x + t z`.
    Combination(f64),
}

/// The iterate pair `(x, z)` together with their affine images, plus a
/// scratch slot holding one materialised combination `y` of them.
///
/// The images drift under repeated rank-one updates; they are recomputed
/// from `x` and `z` every `refresh_period` updates.
#[derive(Debug, Clone)]
pub struct GradientCache {
    x: Vec<f64>,
    z: Vec<f64>,
    image_x: Vec<f64>,
    image_z: Vec<f64>,
    y: Vec<f64>,
    image_y: Vec<f64>,
    weights_y: Vec<f64>,
    y_weight: Option<f64>,
    since_refresh: usize,
    refresh_period: usize,
}

impl GradientCache {
    /// Starts with `z = x = x0`.
    pub fn new(problem: &dyn Objective, x0: Vec<f64>) -> Result<Self, ObjectiveError> {
        problem.check_dim(x0.len())?;
        let image_x = problem.image(&x0);
        let m = image_x.len();
        Ok(Self {
            z: x0.clone(),
            image_z: image_x.clone(),
            y: x0.clone(),
            image_y: vec![0.0; m],
            weights_y: vec![0.0; m],
            x: x0,
            image_x,
            y_weight: None,
            since_refresh: 0,
            refresh_period: DEFAULT_REFRESH_PERIOD,
        })
    }

    pub fn with_refresh_period(mut self, period: usize) -> Self {
        self.refresh_period = period.max(1);
        self
    }

    pub fn refresh_period(&self) -> usize {
        self.refresh_period
    }

    pub fn steps_since_refresh(&self) -> usize {
        self.since_refresh
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn z(&self) -> &[f64] {
        &self.z
    }

    pub fn image_x(&self) -> &[f64] {
        &self.image_x
    }

    pub fn image_z(&self) -> &[f64] {
        &self.image_z
    }

    /// The last combination loaded with [`GradientCache::load_combination`].
    pub fn y(&self) -> &[f64] {
        &self.y
    }

    fn check_fresh(&self, problem: &dyn Objective) -> Result<(), ObjectiveError> {
        if self.since_refresh > self.refresh_period
            || self.image_x.len() != problem.image_len()
            || self.x.len() != problem.dim()
        {
            return Err(ObjectiveError::StaleCache {
                steps: self.since_refresh,
                period: self.refresh_period,
            });
        }
        Ok(())
    }

    fn check_index(&self, i: usize) -> Result<(), ObjectiveError> {
        if i >= self.x.len() {
            return Err(ObjectiveError::IndexOutOfRange {
                index: i,
                dim: self.x.len(),
            });
        }
        Ok(())
    }

    /// `grad_i f` at `x`, `z` or a combination of them.
    pub fn coordinate_gradient(
        &mut self,
        problem: &dyn Objective,
        which: Point,
        i: usize,
    ) -> Result<f64, ObjectiveError> {
        self.check_fresh(problem)?;
        self.check_index(i)?;
        let t = match which {
            Point::X => 0.0,
            Point::Z => 1.0,
            Point::Combination(t) => t,
        };
        self.load_combination(problem, t);
        Ok(problem.coordinate_gradient_from_weights(&self.weights_y, i))
    }

    /// Materialises `y = (1 - t) x + t z`, its image, and the gradient weights
    /// at `y` into the scratch slot.
    pub fn load_combination(&mut self, problem: &dyn Objective, t: f64) {
        let s = 1.0 - t;
        for ((y, x), z) in self.y.iter_mut().zip(&self.x).zip(&self.z) {
            *y = s * x + t * z;
        }
        for ((y, x), z) in self.image_y.iter_mut().zip(&self.image_x).zip(&self.image_z) {
            *y = s * x + t * z;
        }
        problem.image_weights(&self.image_y, &mut self.weights_y);
        self.y_weight = Some(t);
    }

    /// `grad_i f(y)` for the loaded combination.
    #[inline]
    pub fn y_coordinate_gradient(&self, problem: &dyn Objective, i: usize) -> f64 {
        problem.coordinate_gradient_from_weights(&self.weights_y, i)
    }

    /// Full `grad f(y)` for the loaded combination.
    pub fn y_gradient(&self, problem: &dyn Objective, out: &mut [f64]) {
        problem.gradient_from_weights(&self.weights_y, out);
    }

    /// Image of the loaded combination.
    pub fn image_y(&self) -> &[f64] {
        &self.image_y
    }

    /// `iterate[i] += h` with a rank-one update of the matching image.
    pub fn apply_coordinate_step(
        &mut self,
        problem: &dyn Objective,
        which: Iterate,
        i: usize,
        h: f64,
    ) -> Result<(), ObjectiveError> {
        self.check_index(i)?;
        if h == 0.0 {
            return Ok(());
        }
        let (v, image) = match which {
            Iterate::X => (&mut self.x, &mut self.image_x),
            Iterate::Z => (&mut self.z, &mut self.image_z),
        };
        v[i] += h;
        problem.image_add_coordinate(i, h, image);
        self.tick(problem);
        Ok(())
    }

    /// `x <- y` for the loaded combination.
    pub fn set_x_to_y(&mut self, problem: &dyn Objective) {
        self.x.copy_from_slice(&self.y);
        self.image_x.copy_from_slice(&self.image_y);
        self.tick(problem);
    }

    /// `z <- w z + (1 - w) y` for the loaded combination.
    pub fn mix_z_with_y(&mut self, problem: &dyn Objective, w: f64) {
        let s = 1.0 - w;
        for (z, y) in self.z.iter_mut().zip(&self.y) {
            *z = w * *z + s * y;
        }
        for (z, y) in self.image_z.iter_mut().zip(&self.image_y) {
            *z = w * *z + s * y;
        }
        self.tick(problem);
    }

    fn tick(&mut self, problem: &dyn Objective) {
        self.since_refresh += 1;
        if self.since_refresh >= self.refresh_period {
            self.refresh(problem);
        }
    }

    /// Recomputes both images from scratch.
    pub fn refresh(&mut self, problem: &dyn Objective) {
        self.image_x = problem.image(&self.x);
        self.image_z = problem.image(&self.z);
        self.since_refresh = 0;
    }

    /// Largest absolute deviation between cached and freshly computed images.
    pub fn max_deviation(&self, problem: &dyn Objective) -> f64 {
        let fx = problem.image(&self.x);
        let fz = problem.image(&self.z);
        fx.iter()
            .zip(&self.image_x)
            .chain(fz.iter().zip(&self.image_z))
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objectives::LeastSquaresProblem;
    use nalgebra::DMatrix;

    fn identity() -> LeastSquaresProblem {
        LeastSquaresProblem::new(DMatrix::identity(2, 2), vec![1.0, 2.0]).unwrap()
    }

    #[test]
    fn zero_step_leaves_cache_bitwise_unchanged() {
        let p = identity();
        let mut c = GradientCache::new(&p, vec![0.3, -0.1]).unwrap();
        let before = (c.image_x().to_vec(), c.image_z().to_vec(), c.steps_since_refresh());
        c.apply_coordinate_step(&p, Iterate::X, 1, 0.0).unwrap();
        c.apply_coordinate_step(&p, Iterate::Z, 0, 0.0).unwrap();
        assert_eq!(before, (c.image_x().to_vec(), c.image_z().to_vec(), c.steps_since_refresh()));
    }

    #[test]
    fn diagonal_gram_step_touches_one_coordinate() {
        let p = identity();
        let mut c = GradientCache::new(&p, vec![0.0, 0.0]).unwrap();
        let h = 0.25;
        c.apply_coordinate_step(&p, Iterate::X, 0, h).unwrap();
        assert_eq!(c.image_x(), &[-2.0 + 2.0 * h, -4.0]);
        assert_eq!(c.x(), &[h, 0.0]);
        assert_eq!(c.z(), &[0.0, 0.0]);
    }

    #[test]
    fn combination_endpoints() {
        let p = identity();
        let mut c = GradientCache::new(&p, vec![0.0, 0.0]).unwrap();
        c.apply_coordinate_step(&p, Iterate::Z, 1, 1.0).unwrap();
        let gx = p.full_gradient(&[0.0, 0.0]).unwrap();
        let gz = p.full_gradient(&[0.0, 1.0]).unwrap();
        for i in 0..2 {
            assert_eq!(c.coordinate_gradient(&p, Point::Combination(0.0), i).unwrap(), gx[i]);
            assert_eq!(c.coordinate_gradient(&p, Point::Combination(1.0), i).unwrap(), gz[i]);
            assert_eq!(c.coordinate_gradient(&p, Point::X, i).unwrap(), gx[i]);
            assert_eq!(c.coordinate_gradient(&p, Point::Z, i).unwrap(), gz[i]);
        }
    }

    #[test]
    fn out_of_range_and_stale_errors() {
        let p = identity();
        let mut c = GradientCache::new(&p, vec![0.0, 0.0]).unwrap();
        assert!(matches!(
            c.apply_coordinate_step(&p, Iterate::X, 2, 1.0),
            Err(ObjectiveError::IndexOutOfRange { .. })
        ));
        let other = LeastSquaresProblem::new(DMatrix::identity(3, 3), vec![0.0; 3]).unwrap();
        assert!(matches!(
            c.coordinate_gradient(&other, Point::X, 0),
            Err(ObjectiveError::StaleCache { .. })
        ));
    }

    #[test]
    fn refresh_resets_counter() {
        let p = identity();
        let mut c = GradientCache::new(&p, vec![0.0, 0.0])
            .unwrap()
            .with_refresh_period(3);
        for _ in 0..2 {
            c.apply_coordinate_step(&p, Iterate::X, 0, 0.1).unwrap();
        }
        assert_eq!(c.steps_since_refresh(), 2);
        c.apply_coordinate_step(&p, Iterate::X, 0, 0.1).unwrap();
        assert_eq!(c.steps_since_refresh(), 0);
    }
}
