//! The generic two-block iteration for `min F1(x1) + F2(x2)` subject to
//! `f1(x1) + f2(x2) = 0`.
//!
//! Each iteration minimizes the augmented Lagrangian in `x1`, then in `x2`,
//! then takes a dual ascent step `y ← y + ρ (f1(x1) + f2(x2))`. Block
//! minimizations are delegated to [`SubproblemSolver`]s; the engine only
//! dispatches, checks finiteness and records residuals.

use nalgebra::DMatrix;

use crate::error::{check_dim, NeAdmmError, Result};
use crate::terms::{ConstraintTerm, DenseVector, Objective};

/// Penalty schedule, indexed by 0-based iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RhoSchedule {
    Constant(f64),
    /// `ρ0 + k δ` at iteration `k`.
    Increment {
        rho0: f64,
        delta: f64,
    },
}

impl RhoSchedule {
    pub fn constant(rho: f64) -> Result<Self> {
        let s = RhoSchedule::Constant(rho);
        s.validate()?;
        Ok(s)
    }

    pub fn increment(rho0: f64, delta: f64) -> Result<Self> {
        let s = RhoSchedule::Increment { rho0, delta };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            RhoSchedule::Constant(r) => r > 0.0 && r.is_finite(),
            RhoSchedule::Increment { rho0, delta } => {
                rho0 > 0.0 && rho0.is_finite() && delta >= 0.0 && delta.is_finite()
            }
        };
        if ok {
            Ok(())
        } else {
            Err(NeAdmmError::InvalidArgument(format!(
                "invalid penalty schedule {self:?}"
            )))
        }
    }

    pub fn initial(&self) -> f64 {
        self.at(0)
    }

    pub fn at(&self, k: usize) -> f64 {
        match *self {
            RhoSchedule::Constant(r) => r,
            RhoSchedule::Increment { rho0, delta } => rho0 + k as f64 * delta,
        }
    }

    pub fn is_constant(&self) -> bool {
        match *self {
            RhoSchedule::Constant(_) => true,
            RhoSchedule::Increment { delta, .. } => delta == 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StopCriteria {
    pub tol_primal: f64,
    pub tol_dual: f64,
    pub max_iter: usize,
}

impl Default for StopCriteria {
    fn default() -> Self {
        Self {
            tol_primal: 1e-6,
            tol_dual: 1e-6,
            max_iter: 1000,
        }
    }
}

impl StopCriteria {
    pub fn new(tol_primal: f64, tol_dual: f64, max_iter: usize) -> Result<Self> {
        let s = Self {
            tol_primal,
            tol_dual,
            max_iter,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn with_max_iter(max_iter: usize) -> Self {
        Self {
            max_iter,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.tol_primal > 0.0 && self.tol_dual > 0.0 && self.max_iter >= 1 {
            Ok(())
        } else {
            Err(NeAdmmError::InvalidArgument(format!("invalid stopping rule {self:?}")))
        }
    }

    pub fn satisfied(&self, r_norm: f64, s_norm: f64) -> bool {
        r_norm <= self.tol_primal && s_norm <= self.tol_dual
    }
}

/// Primal and dual variables of a two-block solve, with the residuals of the
/// last completed iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct IterateState {
    pub x1: DenseVector,
    pub x2: DenseVector,
    pub y: DenseVector,
    pub rho: f64,
    /// Completed iterations.
    pub k: usize,
    pub primal_residual: DenseVector,
    pub dual_residual: DenseVector,
}

impl IterateState {
    /// Residuals start at zero and `k` at 0.
    pub fn new(x1: DenseVector, x2: DenseVector, y: DenseVector, rho: f64) -> Self {
        let (d, m1) = (y.len(), x1.len());
        Self {
            x1,
            x2,
            y,
            rho,
            k: 0,
            primal_residual: DenseVector::zeros(d),
            dual_residual: DenseVector::zeros(m1),
        }
    }

    /// All-zero primal and dual variables sized for `problem`.
    pub fn zeros(problem: &NeAdmmProblem<'_>, rho: f64) -> Self {
        Self::new(
            DenseVector::zeros(problem.f1.dim_in()),
            DenseVector::zeros(problem.f2.dim_in()),
            DenseVector::zeros(problem.f1.dim_out()),
            rho,
        )
    }

    pub fn is_finite(&self) -> bool {
        [&self.x1, &self.x2, &self.y]
            .iter()
            .all(|v| v.iter().all(|e| e.is_finite()))
            && self.rho.is_finite()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub k: usize,
    pub objective: f64,
    pub r_norm: f64,
    pub s_norm: f64,
    pub rho: f64,
}

/// Everything the engine knows about one completed iteration, handed to
/// observers of [`solve_with_observer`].
#[derive(Debug, Clone, Copy)]
pub struct IterationRecord<'a> {
    pub previous: &'a IterateState,
    pub current: &'a IterateState,
    pub f1_old: &'a DenseVector,
    pub f2_old: &'a DenseVector,
    pub f1_new: &'a DenseVector,
    pub f2_new: &'a DenseVector,
    pub row: &'a TraceRow,
}

/// Block minimizer: returns `argmin_x F(x) + (ρ/2)‖f(x) + offset‖²`, where
/// `F` and `f` are the block's objective and constraint map. `warm` is the
/// block's current value.
pub trait SubproblemSolver: Send + Sync {
    fn minimize(&self, offset: &DenseVector, rho: f64, warm: &DenseVector) -> Result<DenseVector>;
}

impl<F> SubproblemSolver for F
where
    F: Fn(&DenseVector, f64, &DenseVector) -> Result<DenseVector> + Send + Sync,
{
    fn minimize(&self, offset: &DenseVector, rho: f64, warm: &DenseVector) -> Result<DenseVector> {
        self(offset, rho, warm)
    }
}

/// `F(x) = ½ xᵀPx + qᵀx` coupled through an affine `f(x) = Ax + b`; the block
/// subproblem is a linear system solved by LU.
#[derive(Debug, Clone)]
pub struct QuadraticAffineBlock {
    pub p: DMatrix<f64>,
    pub q: DenseVector,
    pub a: DMatrix<f64>,
    pub b: DenseVector,
}

impl SubproblemSolver for QuadraticAffineBlock {
    fn minimize(&self, offset: &DenseVector, rho: f64, _warm: &DenseVector) -> Result<DenseVector> {
        check_dim("affine block offset", self.a.nrows(), offset.len())?;
        let lhs = &self.p + self.a.tr_mul(&self.a) * rho;
        let rhs = -&self.q - self.a.tr_mul(&(&self.b + offset)) * rho;
        lhs.lu().solve(&rhs).ok_or_else(|| NeAdmmError::SubproblemFailure {
            iteration: 0,
            reason: "singular block system".into(),
        })
    }
}

/// The two objectives, two constraint maps and two block solvers.
pub struct NeAdmmProblem<'a> {
    pub obj1: &'a dyn Objective,
    pub obj2: &'a dyn Objective,
    pub f1: &'a dyn ConstraintTerm,
    pub f2: &'a dyn ConstraintTerm,
    pub solver1: &'a dyn SubproblemSolver,
    pub solver2: &'a dyn SubproblemSolver,
}

impl NeAdmmProblem<'_> {
    pub fn check_state(&self, s: &IterateState) -> Result<()> {
        check_dim("f2 output", self.f1.dim_out(), self.f2.dim_out())?;
        check_dim("x1", self.f1.dim_in(), s.x1.len())?;
        check_dim("x2", self.f2.dim_in(), s.x2.len())?;
        check_dim("y", self.f1.dim_out(), s.y.len())
    }

    pub fn objective(&self, s: &IterateState) -> f64 {
        self.obj1.value(&s.x1) + self.obj2.value(&s.x2)
    }
}

/// `F1(x1) + F2(x2) + yᵀc + (ρ/2)‖c‖²` with `c = f1(x1) + f2(x2)`.
#[allow(clippy::too_many_arguments)]
pub fn augmented_lagrangian(
    obj1: &dyn Objective,
    obj2: &dyn Objective,
    f1: &dyn ConstraintTerm,
    f2: &dyn ConstraintTerm,
    x1: &DenseVector,
    x2: &DenseVector,
    y: &DenseVector,
    rho: f64,
) -> Result<f64> {
    check_dim("x1", f1.dim_in(), x1.len())?;
    check_dim("x2", f2.dim_in(), x2.len())?;
    check_dim("f2 output", f1.dim_out(), f2.dim_out())?;
    check_dim("y", f1.dim_out(), y.len())?;
    let c = f1.eval(x1) + f2.eval(x2);
    Ok(obj1.value(x1) + obj2.value(x2) + y.dot(&c) + 0.5 * rho * c.norm_squared())
}

pub fn dual_update(y: &DenseVector, rho: f64, f1x1: &DenseVector, f2x2: &DenseVector) -> Result<DenseVector> {
    check_dim("f1(x1)", y.len(), f1x1.len())?;
    check_dim("f2(x2)", y.len(), f2x2.len())?;
    Ok(y + (f1x1 + f2x2) * rho)
}

/// Primal residual `f1(x1_new) + f2(x2_new)` and dual residual
/// `ρ J_f1(x1_new)ᵀ (f2(x2_new) − f2(x2_old))`.
pub fn residuals(
    f1: &dyn ConstraintTerm,
    f2: &dyn ConstraintTerm,
    x1_new: &DenseVector,
    x2_new: &DenseVector,
    x2_old: &DenseVector,
    rho: f64,
) -> Result<(DenseVector, DenseVector)> {
    check_dim("x1", f1.dim_in(), x1_new.len())?;
    check_dim("x2", f2.dim_in(), x2_new.len())?;
    check_dim("x2_old", f2.dim_in(), x2_old.len())?;
    check_dim("f2 output", f1.dim_out(), f2.dim_out())?;
    let f2_new = f2.eval(x2_new);
    let f2_old = f2.eval(x2_old);
    let primal = f1.eval(x1_new) + &f2_new;
    let dual = f1.jacobian(x1_new).tr_mul(&(f2_new - f2_old)) * rho;
    Ok((primal, dual))
}

/// Final state of a solve and its trace.
#[derive(Debug, Clone)]
pub struct SolveOutcome<S = IterateState> {
    pub state: S,
    pub trace: Vec<TraceRow>,
    /// `false` when `max_iter` was exhausted before the residual tolerances.
    pub converged: bool,
}

/// An aborted solve: the error, the last finite state and the partial trace.
#[derive(Debug, Clone)]
pub struct SolveFailure<S = IterateState> {
    pub error: NeAdmmError,
    pub state: S,
    pub trace: Vec<TraceRow>,
}

impl<S: std::fmt::Debug> std::fmt::Display for SolveFailure<S> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} (after {} completed iterations)", self.error, self.trace.len())
    }
}

impl<S: std::fmt::Debug> std::error::Error for SolveFailure<S> {}

impl<S> From<SolveFailure<S>> for NeAdmmError {
    fn from(f: SolveFailure<S>) -> Self {
        f.error
    }
}

pub fn all_finite(v: &DenseVector) -> bool {
    v.iter().all(|e| e.is_finite())
}

pub fn solve(
    problem: &NeAdmmProblem<'_>,
    init: IterateState,
    schedule: RhoSchedule,
    stop: StopCriteria,
) -> std::result::Result<SolveOutcome, SolveFailure> {
    solve_with_observer(problem, init, schedule, stop, &mut |_| {})
}

/// [`solve`], calling `observer` after every completed iteration.
pub fn solve_with_observer(
    problem: &NeAdmmProblem<'_>,
    init: IterateState,
    schedule: RhoSchedule,
    stop: StopCriteria,
    observer: &mut dyn FnMut(&IterationRecord<'_>),
) -> std::result::Result<SolveOutcome, SolveFailure> {
    let mut trace = Vec::new();
    let fail = |error, state, trace| Err(SolveFailure { error, state, trace });
    if let Err(e) = schedule
        .validate()
        .and_then(|_| stop.validate())
        .and_then(|_| problem.check_state(&init))
    {
        return fail(e, init, trace);
    }
    if !init.is_finite() {
        return fail(
            NeAdmmError::NonFiniteIterate {
                iteration: 0,
                what: "initial state",
            },
            init,
            trace,
        );
    }

    let mut state = init;
    let mut f1_old = problem.f1.eval(&state.x1);
    let mut f2_old = problem.f2.eval(&state.x2);
    for it in 0..stop.max_iter {
        let k = it + 1;
        let rho = schedule.at(it);
        let scaled_dual = &state.y / rho;

        let x1 = match problem.solver1.minimize(&(&f2_old + &scaled_dual), rho, &state.x1) {
            Ok(x) if all_finite(&x) && x.len() == state.x1.len() => x,
            Ok(_) => {
                let reason = "block 1 returned a non-finite or misshapen point".to_string();
                return fail(NeAdmmError::SubproblemFailure { iteration: k, reason }, state, trace);
            }
            Err(e) => {
                let reason = format!("block 1: {e}");
                return fail(NeAdmmError::SubproblemFailure { iteration: k, reason }, state, trace);
            }
        };
        let f1_new = problem.f1.eval(&x1);
        let x2 = match problem.solver2.minimize(&(&f1_new + &scaled_dual), rho, &state.x2) {
            Ok(x) if all_finite(&x) && x.len() == state.x2.len() => x,
            Ok(_) => {
                let reason = "block 2 returned a non-finite or misshapen point".to_string();
                return fail(NeAdmmError::SubproblemFailure { iteration: k, reason }, state, trace);
            }
            Err(e) => {
                let reason = format!("block 2: {e}");
                return fail(NeAdmmError::SubproblemFailure { iteration: k, reason }, state, trace);
            }
        };
        let f2_new = problem.f2.eval(&x2);
        let primal = &f1_new + &f2_new;
        let dual = problem.f1.jacobian(&x1).tr_mul(&(&f2_new - &f2_old)) * rho;
        let y = &state.y + &primal * rho;

        let next = IterateState {
            x1,
            x2,
            y,
            rho,
            k,
            primal_residual: primal,
            dual_residual: dual,
        };
        let objective = problem.objective(&next);
        let checks = [
            (all_finite(&f1_new) && all_finite(&f2_new), "constraint values"),
            (all_finite(&next.y), "dual variable"),
            (all_finite(&next.dual_residual), "dual residual"),
            (objective.is_finite(), "objective"),
        ];
        if let Some((_, what)) = checks.iter().find(|(ok, _)| !ok) {
            return fail(NeAdmmError::NonFiniteIterate { iteration: k, what }, state, trace);
        }
        let row = TraceRow {
            k,
            objective,
            r_norm: next.primal_residual.norm(),
            s_norm: next.dual_residual.norm(),
            rho,
        };
        trace.push(row);
        observer(&IterationRecord {
            previous: &state,
            current: &next,
            f1_old: &f1_old,
            f2_old: &f2_old,
            f1_new: &f1_new,
            f2_new: &f2_new,
            row: &row,
        });
        state = next;
        f1_old = f1_new;
        f2_old = f2_new;
        if stop.satisfied(row.r_norm, row.s_norm) {
            return Ok(SolveOutcome {
                state,
                trace,
                converged: true,
            });
        }
    }
    Ok(SolveOutcome {
        state,
        trace,
        converged: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::terms::{AffineMap, ComponentwiseMap, LinearTerm, QuadraticTerm, ScalarFn, ZeroTerm};

    fn dv(v: &[f64]) -> DenseVector {
        DenseVector::from_column_slice(v)
    }

    fn identity1() -> ComponentwiseMap {
        ComponentwiseMap::new(ScalarFn::Identity, 0.0, 1)
    }

    #[test]
    fn augmented_lagrangian_examples() {
        let id = identity1();
        let z = dv(&[0.0]);
        assert_eq!(
            augmented_lagrangian(&ZeroTerm, &ZeroTerm, &id, &id, &z, &z, &z, 1.0).unwrap(),
            0.0
        );

        let lin = LinearTerm::new(dv(&[1.0]));
        let sqrt = ComponentwiseMap::new(ScalarFn::Sqrt, 0.0, 1);
        let sqrt_shift = ComponentwiseMap::new(ScalarFn::Sqrt, -1.0, 1);
        let q = dv(&[0.25]);
        let v = augmented_lagrangian(&lin, &lin, &sqrt, &sqrt_shift, &q, &q, &z, 1.0).unwrap();
        assert!((v - 0.5).abs() < 1e-15);

        let one = dv(&[1.0]);
        assert_eq!(
            augmented_lagrangian(&ZeroTerm, &ZeroTerm, &id, &id, &one, &one, &one, 2.0).unwrap(),
            6.0
        );

        let bad = augmented_lagrangian(&ZeroTerm, &ZeroTerm, &id, &id, &dv(&[1.0, 2.0]), &one, &one, 1.0);
        assert!(matches!(bad, Err(NeAdmmError::DimensionMismatch { .. })));
    }

    #[test]
    fn dual_update_examples() {
        let zero = dv(&[0.0]);
        assert_eq!(dual_update(&zero, 1.0, &zero, &zero).unwrap(), zero);
        assert_eq!(
            dual_update(&dv(&[1.0]), 2.0, &dv(&[0.5]), &dv(&[0.5])).unwrap(),
            dv(&[3.0])
        );
        let y = dv(&[1.0, -1.0]);
        let z2 = dv(&[0.0, 0.0]);
        assert_eq!(dual_update(&y, 1.0, &z2, &z2).unwrap(), y);
        assert!(dual_update(&y, 1.0, &zero, &z2).is_err());
    }

    #[test]
    fn residual_examples() {
        let id = identity1();
        let sq = ComponentwiseMap::new(ScalarFn::Square, 0.0, 1);
        let (p, d) = residuals(&sq, &id, &dv(&[2.0]), &dv(&[1.0]), &dv(&[0.0]), 1.0).unwrap();
        assert_eq!(p, dv(&[5.0]));
        assert_eq!(d, dv(&[4.0]));

        let (p, d) = residuals(&id, &id, &dv(&[1.0]), &dv(&[-1.0]), &dv(&[-1.0]), 7.0).unwrap();
        assert_eq!(p, dv(&[0.0]));
        assert_eq!(d, dv(&[0.0]));
    }

    #[test]
    fn rho_schedules() {
        let c = RhoSchedule::constant(2.0).unwrap();
        assert_eq!(c.at(0), 2.0);
        assert_eq!(c.at(100), 2.0);
        let inc = RhoSchedule::increment(1.0, 0.01).unwrap();
        assert!((inc.at(10) - 1.1).abs() < 1e-15);
        assert!(RhoSchedule::constant(0.0).is_err());
        assert!(RhoSchedule::increment(1.0, -0.5).is_err());
        assert!(StopCriteria::new(1e-6, 0.0, 5).is_err());
        assert!(StopCriteria::new(1e-6, 1e-6, 0).is_err());
    }

    /// Quadratic objectives, identity coupling `x1 − x2 = 0`.
    struct LinearFixture {
        obj1: QuadraticTerm,
        obj2: QuadraticTerm,
        f1: AffineMap,
        f2: AffineMap,
        b1: QuadraticAffineBlock,
        b2: QuadraticAffineBlock,
    }

    fn linear_fixture() -> LinearFixture {
        let n = 2;
        let p1 = DMatrix::identity(n, n);
        let p2 = DMatrix::identity(n, n) * 3.0;
        let q1 = dv(&[-1.0, 2.0]);
        let q2 = dv(&[0.5, -1.0]);
        let a1 = DMatrix::identity(n, n);
        let a2 = -DMatrix::identity(n, n);
        let zero = DenseVector::zeros(n);
        LinearFixture {
            obj1: QuadraticTerm::new(p1.clone(), q1.clone()),
            obj2: QuadraticTerm::new(p2.clone(), q2.clone()),
            f1: AffineMap::linear(a1.clone()),
            f2: AffineMap::linear(a2.clone()),
            b1: QuadraticAffineBlock {
                p: p1,
                q: q1,
                a: a1,
                b: zero.clone(),
            },
            b2: QuadraticAffineBlock {
                p: p2,
                q: q2,
                a: a2,
                b: zero,
            },
        }
    }

    #[test]
    fn fixed_point_start_exits_after_one_iteration() {
        let fx = linear_fixture();
        let problem = NeAdmmProblem {
            obj1: &fx.obj1,
            obj2: &fx.obj2,
            f1: &fx.f1,
            f2: &fx.f2,
            solver1: &fx.b1,
            solver2: &fx.b2,
        };
        // x* solves (P1 + P2) x = −q1 − q2; y* = −(P1 x* + q1)
        let x = dv(&[0.125, -0.25]);
        let y = -(&fx.obj1.p * &x + &fx.obj1.q);
        let init = IterateState::new(x.clone(), x.clone(), y.clone(), 1.0);
        let out = solve(&problem, init, RhoSchedule::Constant(1.0), StopCriteria::default()).unwrap();
        assert!(out.converged);
        assert_eq!(out.trace.len(), 1);
        assert!(out.trace[0].r_norm < 1e-14);
        assert!(out.trace[0].s_norm < 1e-14);
        assert!((&out.state.y - y).norm() < 1e-14);
    }

    #[test]
    fn rho_column_follows_schedule() {
        let fx = linear_fixture();
        let problem = NeAdmmProblem {
            obj1: &fx.obj1,
            obj2: &fx.obj2,
            f1: &fx.f1,
            f2: &fx.f2,
            solver1: &fx.b1,
            solver2: &fx.b2,
        };
        let init = IterateState::zeros(&problem, 0.5);
        let sched = RhoSchedule::increment(0.5, 0.25).unwrap();
        let out = solve(&problem, init, sched, StopCriteria::with_max_iter(20)).unwrap();
        for w in out.trace.windows(2) {
            assert!(w[1].rho >= w[0].rho);
        }
        for (i, row) in out.trace.iter().enumerate() {
            assert_eq!(row.k, i + 1);
            assert_eq!(row.rho, sched.at(i));
        }
    }

    #[test]
    fn non_finite_block_aborts_with_partial_trace() {
        let fx = linear_fixture();
        let calls = std::sync::atomic::AtomicUsize::new(0);
        let flaky = |offset: &DenseVector, rho: f64, warm: &DenseVector| -> Result<DenseVector> {
            if calls.fetch_add(1, std::sync::atomic::Ordering::SeqCst) >= 3 {
                Ok(DenseVector::from_element(2, f64::NAN))
            } else {
                fx.b2.minimize(offset, rho, warm)
            }
        };
        let problem = NeAdmmProblem {
            obj1: &fx.obj1,
            obj2: &fx.obj2,
            f1: &fx.f1,
            f2: &fx.f2,
            solver1: &fx.b1,
            solver2: &flaky,
        };
        let init = IterateState::zeros(&problem, 1.0);
        let err = solve(
            &problem,
            init,
            RhoSchedule::Constant(1.0),
            StopCriteria::with_max_iter(50),
        )
        .unwrap_err();
        assert!(matches!(err.error, NeAdmmError::SubproblemFailure { iteration: 4, .. }));
        assert_eq!(err.trace.len(), 3);
        assert_eq!(err.state.k, 3);
    }

    #[test]
    fn mismatched_init_is_rejected() {
        let fx = linear_fixture();
        let problem = NeAdmmProblem {
            obj1: &fx.obj1,
            obj2: &fx.obj2,
            f1: &fx.f1,
            f2: &fx.f2,
            solver1: &fx.b1,
            solver2: &fx.b2,
        };
        let init = IterateState::new(dv(&[0.0]), dv(&[0.0, 0.0]), dv(&[0.0, 0.0]), 1.0);
        let err = solve(&problem, init, RhoSchedule::Constant(1.0), StopCriteria::default()).unwrap_err();
        assert!(matches!(err.error, NeAdmmError::DimensionMismatch { .. }));
        assert!(err.trace.is_empty());
    }

    #[test]
    fn feasible_fixed_point_keeps_dual() {
        // solvers that return their warm start
        let hold = |_: &DenseVector, _: f64, warm: &DenseVector| -> Result<DenseVector> { Ok(warm.clone()) };
        let id = ComponentwiseMap::new(ScalarFn::Identity, 0.0, 2);
        let neg = AffineMap::linear(-DMatrix::identity(2, 2));
        let problem = NeAdmmProblem {
            obj1: &ZeroTerm,
            obj2: &ZeroTerm,
            f1: &id,
            f2: &neg,
            solver1: &hold,
            solver2: &hold,
        };
        let x = dv(&[0.3, -4.0]);
        let y = dv(&[2.0, 1.0]);
        let init = IterateState::new(x.clone(), x, y.clone(), 1.0);
        let out = solve(&problem, init, RhoSchedule::Constant(3.0), StopCriteria::default()).unwrap();
        assert_eq!(out.state.y, y);
        assert_eq!(out.trace[0].r_norm, 0.0);
    }
}
