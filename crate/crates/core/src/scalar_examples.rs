//! Two scalar problems with known saddle points, solved by the generic
//! engine with closed-form block updates.
//!
//! * Example 1: `min x + z s.t. √x + √z = 1`, split as `f1 = √x`,
//!   `f2 = √z − 1`. Optimum `(1/4, 1/4)`, value `1/2`, multiplier `−1`.
//! * Example 2: `min x + z s.t. x² + z² = 1`, split as `f1 = x²`,
//!   `f2 = z² − 1`. Optimum `(−√2/2, −√2/2)`, value `−√2`, multiplier `√2/2`.

use std::f64::consts::SQRT_2;

use crate::engine::{
    solve_with_observer, IterateState, IterationRecord, NeAdmmProblem, RhoSchedule, SolveFailure, SolveOutcome,
    StopCriteria, SubproblemSolver,
};
use crate::error::{NeAdmmError, Result};
use crate::inner::cubic_real_roots;
use crate::terms::{ComponentwiseMap, DenseVector, LinearTerm, ScalarFn};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Example {
    One,
    Two,
}

/// Known solution of an example.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarOptimum {
    pub x: f64,
    pub z: f64,
    pub p: f64,
    /// Multiplier of the coupling constraint at the saddle point.
    pub y: f64,
}

impl Example {
    pub fn optimum(self) -> ScalarOptimum {
        match self {
            Example::One => ScalarOptimum {
                x: 0.25,
                z: 0.25,
                p: 0.5,
                y: -1.0,
            },
            Example::Two => ScalarOptimum {
                x: -SQRT_2 / 2.0,
                z: -SQRT_2 / 2.0,
                p: -SQRT_2,
                y: SQRT_2 / 2.0,
            },
        }
    }

    fn scalar_fn(self) -> ScalarFn {
        match self {
            Example::One => ScalarFn::Sqrt,
            Example::Two => ScalarFn::Square,
        }
    }

    /// Exact `argmin_u u + (ρ/2)(g(u) + c)²` with `g` the example's map.
    pub fn block_update(self, c: f64, rho: f64) -> Result<f64> {
        match self {
            Example::One => Ok(example1_block_update(c, rho)),
            Example::Two => example2_block_update(c, rho),
        }
    }

    /// Default infeasible start `x = z = 1`, `y = 0`.
    pub fn default_init(self, rho: f64) -> IterateState {
        let one = DenseVector::from_element(1, 1.0);
        IterateState::new(one.clone(), one, DenseVector::zeros(1), rho)
    }

    /// Start at the optimum with the saddle multiplier.
    pub fn optimal_init(self, rho: f64) -> IterateState {
        let o = self.optimum();
        IterateState::new(
            DenseVector::from_element(1, o.x),
            DenseVector::from_element(1, o.z),
            DenseVector::from_element(1, o.y),
            rho,
        )
    }
}

/// `argmin_{x ≥ 0} x + (ρ/2)(√x + c)²`: `√x = max(0, −ρc/(2 + ρ))`.
pub fn example1_block_update(c: f64, rho: f64) -> f64 {
    if c >= 0.0 {
        0.0
    } else {
        (rho * c / (2.0 + rho)).powi(2)
    }
}

/// `argmin_x x + (ρ/2)(x² + c)²` over the real roots of the stationarity
/// cubic `2ρx³ + 2ρcx + 1 = 0`; ties go to the smallest root.
pub fn example2_block_update(c: f64, rho: f64) -> Result<f64> {
    let objective = |x: f64| x + 0.5 * rho * (x * x + c).powi(2);
    let roots = cubic_real_roots(2.0 * rho, 0.0, 2.0 * rho * c, 1.0)?.roots;
    let mut best: Option<(f64, f64)> = None;
    for x in roots {
        let v = objective(x);
        if best.is_none_or(|(_, bv)| v < bv) {
            best = Some((x, v));
        }
    }
    best.map(|(x, _)| x)
        .ok_or_else(|| NeAdmmError::NoCandidate(format!("no real root for c = {c}, rho = {rho}")))
}

struct Block {
    example: Example,
    /// Constant part of the block's constraint map.
    shift: f64,
}

impl SubproblemSolver for Block {
    fn minimize(&self, offset: &DenseVector, rho: f64, _warm: &DenseVector) -> Result<DenseVector> {
        let u = self.example.block_update(offset[0] + self.shift, rho)?;
        Ok(DenseVector::from_element(1, u))
    }
}

/// Terms and block solvers of one example; borrow a [`NeAdmmProblem`] from
/// it with [`ScalarExampleProblem::problem`].
pub struct ScalarExampleProblem {
    pub which: Example,
    pub objective: LinearTerm,
    pub f1: ComponentwiseMap,
    pub f2: ComponentwiseMap,
    block1: Block,
    block2: Block,
}

impl ScalarExampleProblem {
    pub fn new(which: Example) -> Self {
        let g = which.scalar_fn();
        Self {
            which,
            objective: LinearTerm::new(DenseVector::from_element(1, 1.0)),
            f1: ComponentwiseMap::new(g, 0.0, 1),
            f2: ComponentwiseMap::new(g, -1.0, 1),
            block1: Block {
                example: which,
                shift: 0.0,
            },
            block2: Block {
                example: which,
                shift: -1.0,
            },
        }
    }

    pub fn problem(&self) -> NeAdmmProblem<'_> {
        NeAdmmProblem {
            obj1: &self.objective,
            obj2: &self.objective,
            f1: &self.f1,
            f2: &self.f2,
            solver1: &self.block1,
            solver2: &self.block2,
        }
    }
}

/// Runs an example from its default start with residual tolerances `1e−6`.
pub fn run_example(
    which: Example,
    schedule: RhoSchedule,
    max_iter: usize,
) -> std::result::Result<SolveOutcome, SolveFailure> {
    let setup = ScalarExampleProblem::new(which);
    let init = which.default_init(schedule.initial());
    solve_with_observer(
        &setup.problem(),
        init,
        schedule,
        StopCriteria::with_max_iter(max_iter),
        &mut |_: &IterationRecord<'_>| {},
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inner::golden_section_min;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn optima_are_feasible() {
        let o = Example::One.optimum();
        assert_eq!(o.x.sqrt() + o.z.sqrt(), 1.0);
        assert_eq!(o.x + o.z, o.p);
        let o = Example::Two.optimum();
        assert_abs_diff_eq!(o.x * o.x + o.z * o.z, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(o.x + o.z, o.p, epsilon = 1e-15);
        // Lagrangian stationarity 1 + 2 y x = 0
        assert_abs_diff_eq!(1.0 + 2.0 * o.y * o.x, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn example1_block_examples() {
        assert_eq!(example1_block_update(0.0, 1.0), 0.0);
        assert_eq!(example1_block_update(2.0, 5.0), 0.0);
        assert_abs_diff_eq!(example1_block_update(-1.0, 1.0), 1.0 / 9.0, epsilon = 1e-15);
        let oracle = golden_section_min(|x: f64| x + 0.5 * (x.sqrt() - 1.0).powi(2), 0.0, 2.0, 1e-12).unwrap();
        assert_abs_diff_eq!(oracle, 1.0 / 9.0, epsilon = 1e-8);
        assert_abs_diff_eq!(example1_block_update(-1.0, 1e9), 1.0, epsilon = 1e-8);
    }

    #[test]
    fn example2_block_examples() {
        let x = example2_block_update(-1.0, 1.0).unwrap();
        // bisection on 2x³ − 2x + 1 over [−2, −1]
        let (mut lo, mut hi) = (-2.0f64, -1.0f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if 2.0 * mid.powi(3) - 2.0 * mid + 1.0 < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        assert_abs_diff_eq!(x, lo, epsilon = 1e-12);
        assert_abs_diff_eq!(x, -1.1915, epsilon = 1e-4);

        let x = example2_block_update(-1.0, 1000.0).unwrap();
        assert!((x + 1.0).abs() <= 0.01);

        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..500 {
            let c = rng.random_range(-5.0..5.0);
            let rho = rng.random_range(0.1..100.0);
            let x = example2_block_update(c, rho).unwrap();
            let stat = 2.0 * rho * x.powi(3) + 2.0 * rho * c * x + 1.0;
            assert!(
                stat.abs() <= 1e-8 * (1.0 + 2.0 * rho * (x.abs().powi(3) + c.abs() * x.abs())),
                "{stat}"
            );
        }
    }

    #[test]
    fn starting_at_the_saddle_point_is_feasible_at_once() {
        let setup = ScalarExampleProblem::new(Example::One);
        let out = crate::engine::solve(
            &setup.problem(),
            Example::One.optimal_init(1.0),
            RhoSchedule::Constant(1.0),
            StopCriteria::default(),
        )
        .unwrap();
        assert_eq!(out.trace[0].r_norm, 0.0);
        assert!(out.converged);
    }

    #[test]
    fn example1_iterates_stay_nonnegative() {
        let out = run_example(Example::One, RhoSchedule::Constant(1.0), 30).unwrap();
        assert!(out.state.x1[0] >= 0.0 && out.state.x2[0] >= 0.0);
        let setup = ScalarExampleProblem::new(Example::One);
        let mut ok = true;
        crate::engine::solve_with_observer(
            &setup.problem(),
            Example::One.default_init(1.0),
            RhoSchedule::increment(1.0, 0.01).unwrap(),
            StopCriteria::with_max_iter(30),
            &mut |r| ok &= r.current.x1[0] >= 0.0 && r.current.x2[0] >= 0.0,
        )
        .unwrap();
        assert!(ok);
    }
}
