//! ADMM for problems with nonlinear equality constraints.
//!
//! The crate solves
//!
//! ```text
//! minimize  F1(x1) + F2(x2)
//! s.t.      f1(x1) + f2(x2) = 0
//! ```
//!
//! where `F1`, `F2` are convex and `f1`, `f2` may be nonlinear, by alternating
//! minimization of the augmented Lagrangian followed by a dual ascent step
//! ([`engine`]). Two applications ship with exact or convex inner solvers:
//!
//! * [`sphere`]: minimization over the unit sphere `‖x‖₂ = 1`, with a
//!   closed-form cubic update for the nonconvex block, and the three-block
//!   1-bit compressive sensing scheme built on it.
//! * [`maxop`]: multi-instance learning with the max rule
//!   `q_i = max_j t_ij`, where the nonconvex block is solved exactly by a
//!   sort-based search.
//!
//! [`diagnostics`] evaluates the objective error bound, the Lyapunov merit
//! function and the variational-inequality quantities on recorded runs, and
//! [`scalar_examples`] holds two scalar problems with known saddle points.
//!
//! With the default `parallel` feature the batch helpers in [`par`] run on
//! rayon; without it they run sequentially with identical results.

pub mod csv_io;
pub mod diagnostics;
pub mod engine;
pub mod error;
pub mod inner;
pub mod maxop;
pub mod par;
pub mod scalar_examples;
pub mod sphere;
pub mod synth;
pub mod terms;

pub use engine::{
    augmented_lagrangian, dual_update, residuals, solve, solve_with_observer, IterateState, IterationRecord,
    NeAdmmProblem, RhoSchedule, SolveFailure, SolveOutcome, StopCriteria, SubproblemSolver, TraceRow,
};
pub use error::{NeAdmmError, Result};
pub use terms::{ConstraintTerm, DenseVector, Objective, ProxTerm, SmoothTerm};
