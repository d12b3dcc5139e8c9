//! Convergence diagnostics evaluated along a two-block solve: the objective
//! error bound, the Lyapunov function, and the variational-inequality
//! quantities of the stacked sequence `w = (f1(x1), f2(x2), y)`.
//!
//! Everything here needs a known optimum ([`OptimumReference`]) except the
//! VI quantities, which only need a constant penalty.

use nalgebra::DMatrix;

use crate::engine::{IterateState, IterationRecord, NeAdmmProblem};
use crate::error::{check_dim, NeAdmmError, Result};
use crate::scalar_examples::Example;
use crate::terms::{ConstraintTerm, DenseVector};

/// A primal-dual optimum `(x1*, x2*, y*)` with value `p*`.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimumReference {
    pub x1_star: DenseVector,
    pub x2_star: DenseVector,
    pub y_star: DenseVector,
    pub p_star: f64,
}

impl OptimumReference {
    /// Checks feasibility `f1(x1*) + f2(x2*) = 0` to `1e−8`.
    pub fn new(
        f1: &dyn ConstraintTerm,
        f2: &dyn ConstraintTerm,
        x1_star: DenseVector,
        x2_star: DenseVector,
        y_star: DenseVector,
        p_star: f64,
    ) -> Result<Self> {
        check_dim("x1*", f1.dim_in(), x1_star.len())?;
        check_dim("x2*", f2.dim_in(), x2_star.len())?;
        check_dim("y*", f1.dim_out(), y_star.len())?;
        let viol = (f1.eval(&x1_star) + f2.eval(&x2_star)).norm();
        if viol > 1e-8 {
            return Err(NeAdmmError::InvalidArgument(format!(
                "reference point violates the constraint by {viol}"
            )));
        }
        Ok(Self {
            x1_star,
            x2_star,
            y_star,
            p_star,
        })
    }

    pub fn for_example(which: Example) -> Self {
        let o = which.optimum();
        let one = |v| DenseVector::from_element(1, v);
        Self {
            x1_star: one(o.x),
            x2_star: one(o.z),
            y_star: one(o.y),
            p_star: o.p,
        }
    }

    /// `‖f1(x1) − f1(x1*)‖_∞`, the tightest valid `ε` for the error bound.
    pub fn epsilon(&self, f1: &dyn ConstraintTerm, x1: &DenseVector) -> f64 {
        (f1.eval(x1) - f1.eval(&self.x1_star)).amax()
    }
}

/// `ρ ε ‖Δf2‖₁ − yᵀr`.
pub fn error_bound_value(rho: f64, epsilon: f64, delta_f2_l1: f64, y_dot_r: f64) -> f64 {
    rho * epsilon * delta_f2_l1 - y_dot_r
}

/// Bound `ρ ε ‖f2(x2) − prev_f2‖₁ − yᵀr` on the gap `p − p*` for the state
/// after an iteration, and the actual gap. `prev_f2` is `f2` at the previous
/// iterate; `ε` comes from [`OptimumReference::epsilon`].
pub fn error_bound(
    problem: &NeAdmmProblem<'_>,
    state: &IterateState,
    prev_f2: &DenseVector,
    reference: Option<&OptimumReference>,
) -> Result<(f64, f64)> {
    let reference = reference.ok_or(NeAdmmError::MissingReference("the error bound"))?;
    problem.check_state(state)?;
    check_dim("previous f2", state.y.len(), prev_f2.len())?;
    let f2 = problem.f2.eval(&state.x2);
    let r = problem.f1.eval(&state.x1) + &f2;
    let eps = reference.epsilon(problem.f1, &state.x1);
    let bound = error_bound_value(state.rho, eps, (f2 - prev_f2).lp_norm(1), state.y.dot(&r));
    let gap = problem.obj1.value(&state.x1) + problem.obj2.value(&state.x2) - reference.p_star;
    Ok((bound, gap))
}

/// `V = ρ‖f2(x2) − f2(x2*)‖² + ‖y − y*‖²/ρ` with `ρ = state.rho`.
pub fn lyapunov(state: &IterateState, reference: Option<&OptimumReference>, f2: &dyn ConstraintTerm) -> Result<f64> {
    let reference = reference.ok_or(NeAdmmError::MissingReference("the Lyapunov function"))?;
    check_dim("x2", f2.dim_in(), state.x2.len())?;
    check_dim("y", reference.y_star.len(), state.y.len())?;
    let df2 = f2.eval(&state.x2) - f2.eval(&reference.x2_star);
    Ok(state.rho * df2.norm_squared() + (&state.y - &reference.y_star).norm_squared() / state.rho)
}

/// Block matrices of the VI analysis for constraint dimension `d`, acting on
/// `w = (f1, f2, y) ∈ R^{3d}`. With `A = diag(0, I_d)` and `B = [0, I_d]`:
/// `C = [[ρA, 0], [B, I/ρ]]`, `D = diag(ρA, I/ρ)`, `E = [[I, 0], [ρB, I]]`
/// and `G = C + Cᵀ − EᵀDE`.
#[derive(Debug, Clone, PartialEq)]
pub struct ViMatrices {
    pub d: usize,
    pub rho: f64,
    pub c: DMatrix<f64>,
    pub d_mat: DMatrix<f64>,
    pub e: DMatrix<f64>,
    pub g: DMatrix<f64>,
}

pub fn vi_matrices(d: usize, rho: f64) -> Result<ViMatrices> {
    if d == 0 || !(rho > 0.0) || !rho.is_finite() {
        return Err(NeAdmmError::InvalidArgument(format!("d = {d}, rho = {rho}")));
    }
    let n = 3 * d;
    let mut c = DMatrix::zeros(n, n);
    let mut dm = DMatrix::zeros(n, n);
    let mut e = DMatrix::identity(n, n);
    for i in 0..d {
        // ρA on the f2 block
        c[(d + i, d + i)] = rho;
        dm[(d + i, d + i)] = rho;
        // B picks the f2 block into the y rows
        c[(2 * d + i, d + i)] = 1.0;
        c[(2 * d + i, 2 * d + i)] = 1.0 / rho;
        dm[(2 * d + i, 2 * d + i)] = 1.0 / rho;
        e[(2 * d + i, d + i)] = rho;
    }
    let g = &c + c.transpose() - e.transpose() * &dm * &e;
    Ok(ViMatrices {
        d,
        rho,
        c,
        d_mat: dm,
        e,
        g,
    })
}

impl ViMatrices {
    /// `max |C − DE|`.
    pub fn de_residual(&self) -> f64 {
        (&self.c - &self.d_mat * &self.e).amax()
    }

    /// Closed form of `G`: `I/ρ` on the `y` block, zero elsewhere.
    pub fn g_closed_form(&self) -> DMatrix<f64> {
        let n = 3 * self.d;
        DMatrix::from_fn(
            n,
            n,
            |i, j| if i == j && i >= 2 * self.d { 1.0 / self.rho } else { 0.0 },
        )
    }

    pub fn g_eigenvalues(&self) -> DenseVector {
        self.g.clone().symmetric_eigen().eigenvalues
    }

    pub fn g_is_symmetric(&self) -> bool {
        self.g == self.g.transpose()
    }

    /// `‖v‖²_D = vᵀDv`.
    pub fn d_norm_sq(&self, v: &DenseVector) -> f64 {
        v.dot(&(&self.d_mat * v))
    }

    /// `‖E(w − w̃)‖²_D`.
    pub fn contraction_norm_sq(&self, snap: &ViSnapshot) -> f64 {
        self.d_norm_sq(&(&self.e * (&snap.w - &snap.w_tilde)))
    }
}

/// The stacked vectors of one iteration: `w = (f1(x1ᵏ), f2(x2ᵏ), yᵏ)`,
/// `w̃ = (f1(x1ᵏ⁺¹), f2(x2ᵏ⁺¹), yᵏ + ρ(f1(x1ᵏ⁺¹) + f2(x2ᵏ)))` and the next
/// stacked iterate `w⁺`.
#[derive(Debug, Clone, PartialEq)]
pub struct ViSnapshot {
    pub rho: f64,
    pub w: DenseVector,
    pub w_tilde: DenseVector,
    pub w_next: DenseVector,
}

fn stack(parts: [&DenseVector; 3]) -> DenseVector {
    let n = parts.iter().map(|p| p.len()).sum();
    DenseVector::from_iterator(n, parts.iter().flat_map(|p| p.iter().copied()))
}

impl ViSnapshot {
    pub fn from_record(rec: &IterationRecord<'_>) -> Self {
        let rho = rec.current.rho;
        let y_tilde = &rec.previous.y + (rec.f1_new + rec.f2_old) * rho;
        Self {
            rho,
            w: stack([rec.f1_old, rec.f2_old, &rec.previous.y]),
            w_tilde: stack([rec.f1_new, rec.f2_new, &y_tilde]),
            w_next: stack([rec.f1_new, rec.f2_new, &rec.current.y]),
        }
    }
}

/// Outcome of [`vi_sequence_check`].
#[derive(Debug, Clone, PartialEq)]
pub struct ViReport {
    /// `‖E(wᵏ − w̃ᵏ)‖²_D` per iteration.
    pub norms: Vec<f64>,
    /// Iterations (0-based) whose norm exceeds the previous one by more than
    /// `1e−10`.
    pub increases: Vec<usize>,
    /// `‖wᵏ⁺¹ − wᵏ + E(wᵏ − w̃ᵏ)‖` per iteration.
    pub identity_residuals: Vec<f64>,
    /// `(t + 1) · normₜ / norm₀`; bounded when the norms decay like `1/(t + 1)`.
    /// Empty when the first norm is zero.
    pub decay_ratios: Vec<f64>,
}

impl ViReport {
    pub fn monotone(&self) -> bool {
        self.increases.is_empty()
    }

    pub fn max_identity_residual(&self) -> f64 {
        self.identity_residuals.iter().copied().fold(0.0, f64::max)
    }
}

pub const VI_INCREASE_TOL: f64 = 1e-10;

pub fn vi_sequence_check(snapshots: &[ViSnapshot], mats: &ViMatrices) -> Result<ViReport> {
    if snapshots.is_empty() {
        return Err(NeAdmmError::EmptyTrace);
    }
    for s in snapshots {
        if s.rho != mats.rho {
            return Err(NeAdmmError::NonConstantRho {
                first: mats.rho,
                other: s.rho,
            });
        }
        check_dim("stacked iterate", 3 * mats.d, s.w.len())?;
    }
    let norms: Vec<f64> = snapshots.iter().map(|s| mats.contraction_norm_sq(s)).collect();
    let increases = norms
        .windows(2)
        .enumerate()
        .filter(|(_, w)| w[1] > w[0] + VI_INCREASE_TOL)
        .map(|(i, _)| i + 1)
        .collect();
    let identity_residuals = snapshots
        .iter()
        .map(|s| (&s.w_next - &s.w + &mats.e * (&s.w - &s.w_tilde)).norm())
        .collect();
    let decay_ratios = if norms[0] > 0.0 {
        norms
            .iter()
            .enumerate()
            .map(|(t, n)| (t + 1) as f64 * n / norms[0])
            .collect()
    } else {
        Vec::new()
    };
    Ok(ViReport {
        norms,
        increases,
        identity_residuals,
        decay_ratios,
    })
}

/// One row of the diagnostics report.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticRow {
    pub k: usize,
    pub bound: f64,
    pub gap: f64,
    pub lyapunov: f64,
    pub vi_norm: f64,
    /// Space-separated markers: `bound_violated`, `lyapunov_increase`,
    /// `vi_increase`.
    pub flags: String,
}

/// Observer collecting bound, gap, Lyapunov value and VI norm per iteration.
pub struct DiagnosticsRecorder<'a> {
    problem: &'a NeAdmmProblem<'a>,
    reference: OptimumReference,
    prev_lyapunov: f64,
    prev_vi: Option<f64>,
    pub initial_lyapunov: f64,
    pub rows: Vec<DiagnosticRow>,
    pub snapshots: Vec<ViSnapshot>,
    /// First error met while recording, if any.
    pub error: Option<NeAdmmError>,
}

pub const BOUND_TOL: f64 = 1e-8;
pub const LYAPUNOV_TOL: f64 = 1e-8;

impl<'a> DiagnosticsRecorder<'a> {
    pub fn new(problem: &'a NeAdmmProblem<'a>, reference: OptimumReference, init: &IterateState) -> Result<Self> {
        let v0 = lyapunov(init, Some(&reference), problem.f2)?;
        Ok(Self {
            problem,
            reference,
            prev_lyapunov: v0,
            prev_vi: None,
            initial_lyapunov: v0,
            rows: Vec::new(),
            snapshots: Vec::new(),
            error: None,
        })
    }

    pub fn observe(&mut self, rec: &IterationRecord<'_>) {
        if self.error.is_some() {
            return;
        }
        match self.row(rec) {
            Ok(row) => self.rows.push(row),
            Err(e) => self.error = Some(e),
        }
    }

    fn row(&mut self, rec: &IterationRecord<'_>) -> Result<DiagnosticRow> {
        let (bound, gap) = error_bound(self.problem, rec.current, rec.f2_old, Some(&self.reference))?;
        let v = lyapunov(rec.current, Some(&self.reference), self.problem.f2)?;
        let snap = ViSnapshot::from_record(rec);
        let mats = vi_matrices(rec.f1_new.len(), snap.rho)?;
        let vi = mats.contraction_norm_sq(&snap);
        let mut flags = Vec::new();
        if gap > bound + BOUND_TOL {
            flags.push("bound_violated");
        }
        if v > self.prev_lyapunov + LYAPUNOV_TOL {
            flags.push("lyapunov_increase");
        }
        if self.prev_vi.is_some_and(|p| vi > p + VI_INCREASE_TOL) {
            flags.push("vi_increase");
        }
        self.prev_lyapunov = v;
        self.prev_vi = Some(vi);
        self.snapshots.push(snap);
        Ok(DiagnosticRow {
            k: rec.row.k,
            bound,
            gap,
            lyapunov: v,
            vi_norm: vi,
            flags: flags.join(" "),
        })
    }
}
