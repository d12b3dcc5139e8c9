//! Sphere-constrained minimization `min ℓ(x) s.t. ‖x‖² = 1`, split as
//! `w = x`, `‖w‖² = 1`, and the three-block 1-bit compressive sensing
//! scheme built on the same closed-form sphere step.

use nalgebra::DMatrix;

use crate::engine::{all_finite, RhoSchedule, SolveFailure, SolveOutcome, StopCriteria, TraceRow};
use crate::error::{check_dim, NeAdmmError, Result};
use crate::inner::{cubic_real_roots, fista_detailed, CompositeObjective, FistaConfig};
use crate::par::{self, Execution};
use crate::terms::{DenseVector, L1Norm, LeastSquares, SmoothSum, SquaredDistance};

/// Objective of the sphere penalty step: `‖w − v‖² + (‖w‖² − 1 + σ)²`.
pub fn sphere_penalty_objective(w: &DenseVector, v: &DenseVector, sigma: f64) -> f64 {
    (w - v).norm_squared() + (w.norm_squared() - 1.0 + sigma).powi(2)
}

/// Norm of the gradient of [`sphere_penalty_objective`] divided by two:
/// `‖2(w − v) + 4(‖w‖² − 1 + σ) w‖`.
pub fn sphere_penalty_stationarity(w: &DenseVector, v: &DenseVector, sigma: f64) -> f64 {
    ((w - v) * 2.0 + w * (4.0 * (w.norm_squared() - 1.0 + sigma))).norm()
}

/// Global minimizer of `‖w − v‖² + (‖w‖² − 1 + σ)²`.
///
/// Every stationary point is parallel to `v` with `w = v / (2u² − 1 + 2σ)`
/// and `u = ‖w‖` solving `2u³ + (2σ − 1)u = ±‖v‖`. Both sign branches are
/// solved, nonnegative roots kept, and the candidate with the smallest
/// objective returned. For `v = 0` the direction is free and `e₁` is used.
pub fn sphere_penalty_argmin(v: &DenseVector, sigma: f64) -> Result<DenseVector> {
    let n = v.len();
    if n == 0 {
        return Err(NeAdmmError::InvalidArgument("empty vector".into()));
    }
    if !all_finite(v) || !sigma.is_finite() {
        return Err(NeAdmmError::NoCandidate(format!("non-finite input, sigma {sigma}")));
    }
    let m = v.norm();
    let kappa = 2.0 * sigma - 1.0;
    let mut candidates = Vec::with_capacity(4);
    if m == 0.0 {
        candidates.push(DenseVector::zeros(n));
        if kappa < 0.0 {
            let mut w = DenseVector::zeros(n);
            w[0] = (-0.5 * kappa).sqrt();
            candidates.push(w);
        }
    } else {
        for sign in [1.0, -1.0] {
            for u in cubic_real_roots(2.0, 0.0, kappa, -sign * m)?.roots {
                if u < 0.0 {
                    continue;
                }
                let denom = 2.0 * u * u + kappa;
                if denom.abs() < 1e-12 {
                    continue;
                }
                // ‖v / denom‖ = u exactly when u |denom| = m
                if (u * denom.abs() - m).abs() > 1e-8 * m.max(1.0) {
                    continue;
                }
                // v / denom, written so that ‖w‖ = u holds to rounding
                candidates.push(v * (denom.signum() * u / m));
            }
        }
    }
    candidates
        .into_iter()
        .map(|w| (sphere_penalty_objective(&w, v, sigma), w))
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .map(|(_, w)| w)
        .ok_or_else(|| NeAdmmError::NoCandidate(format!("|v| = {m}, sigma = {sigma}")))
}

/// The `w` step: `argmin_w ‖w − x + y2/ρ‖² + (‖w‖² − 1 + y1/ρ)²`.
pub fn sphere_update_w(x_new: &DenseVector, y1: f64, y2: &DenseVector, rho: f64) -> Result<DenseVector> {
    check_dim("y2", x_new.len(), y2.len())?;
    positive_rho(rho)?;
    sphere_penalty_argmin(&(x_new - y2 / rho), y1 / rho)
}

/// Inputs of one independent `w` step, for batch evaluation.
#[derive(Debug, Clone)]
pub struct WUpdateInput {
    pub x: DenseVector,
    pub y1: f64,
    pub y2: DenseVector,
    pub rho: f64,
}

pub fn sphere_update_w_batch(mode: Execution, inputs: &[WUpdateInput]) -> Vec<Result<DenseVector>> {
    par::map(mode, inputs, |i| sphere_update_w(&i.x, i.y1, &i.y2, i.rho))
}

fn positive_rho(rho: f64) -> Result<()> {
    if rho > 0.0 && rho.is_finite() {
        Ok(())
    } else {
        Err(NeAdmmError::InvalidArgument(format!("penalty {rho}")))
    }
}

/// `min ℓ(x) s.t. ‖x‖² = 1` with `ℓ = smooth + nonsmooth`.
pub struct SphereProblem<'a> {
    pub loss: CompositeObjective<'a>,
    pub dim: usize,
    pub fista: FistaConfig,
}

impl<'a> SphereProblem<'a> {
    pub fn new(loss: CompositeObjective<'a>, dim: usize) -> Self {
        Self {
            loss,
            dim,
            fista: FistaConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SphereState {
    pub x: DenseVector,
    pub w: DenseVector,
    /// Multiplier of the single equation `‖w‖² − 1 = 0`.
    pub y1: f64,
    /// Multiplier of `w − x = 0`.
    pub y2: DenseVector,
    pub rho: f64,
}

impl SphereState {
    /// `x = w = e₁`, zero multipliers.
    pub fn unit(dim: usize, rho: f64) -> Self {
        let mut e1 = DenseVector::zeros(dim);
        e1[0] = 1.0;
        Self {
            x: e1.clone(),
            w: e1,
            y1: 0.0,
            y2: DenseVector::zeros(dim),
            rho,
        }
    }

    fn is_finite(&self) -> bool {
        all_finite(&self.x) && all_finite(&self.w) && all_finite(&self.y2) && self.y1.is_finite()
    }
}

/// The `x` step: `argmin_x ℓ(x) + (ρ/2)‖w − x + y2/ρ‖²` by FISTA from `warm`.
pub fn sphere_update_x(
    loss: &CompositeObjective<'_>,
    w: &DenseVector,
    y2: &DenseVector,
    rho: f64,
    warm: &DenseVector,
    cfg: &FistaConfig,
) -> Result<DenseVector> {
    check_dim("y2", w.len(), y2.len())?;
    check_dim("warm start", w.len(), warm.len())?;
    positive_rho(rho)?;
    let pull = SquaredDistance::new(rho, w + y2 / rho);
    let smooth = SmoothSum::new(vec![loss.smooth, &pull]);
    let obj = CompositeObjective::new(&smooth, loss.nonsmooth);
    let cfg = FistaConfig {
        initial_step: cfg.initial_step.min(1.0 / rho),
        ..*cfg
    };
    Ok(fista_detailed(&obj, warm, &cfg)?.x)
}

fn failure<S>(
    error: NeAdmmError,
    state: S,
    trace: Vec<TraceRow>,
) -> std::result::Result<SolveOutcome<S>, SolveFailure<S>> {
    Err(SolveFailure { error, state, trace })
}

fn sub_failure(iteration: usize, what: &str, e: NeAdmmError) -> NeAdmmError {
    NeAdmmError::SubproblemFailure {
        iteration,
        reason: format!("{what}: {e}"),
    }
}

/// Alternates the `x` and `w` steps with dual ascent on both constraints.
/// Residuals: `r = ‖(‖w‖² − 1, w − x)‖` and
/// `s = ρ ‖(‖w⁺‖² − ‖w‖², w⁺ − w)‖`.
pub fn sphere_solve(
    problem: &SphereProblem<'_>,
    init: SphereState,
    schedule: RhoSchedule,
    stop: StopCriteria,
) -> std::result::Result<SolveOutcome<SphereState>, SolveFailure<SphereState>> {
    let mut trace = Vec::new();
    let checks = schedule
        .validate()
        .and_then(|_| stop.validate())
        .and_then(|_| check_dim("x", problem.dim, init.x.len()))
        .and_then(|_| check_dim("w", problem.dim, init.w.len()))
        .and_then(|_| check_dim("y2", problem.dim, init.y2.len()));
    if let Err(e) = checks {
        return failure(e, init, trace);
    }
    let mut state = init;
    for it in 0..stop.max_iter {
        let k = it + 1;
        let rho = schedule.at(it);
        let x = match sphere_update_x(&problem.loss, &state.w, &state.y2, rho, &state.x, &problem.fista) {
            Ok(x) => x,
            Err(e) => return failure(sub_failure(k, "x step", e), state, trace),
        };
        let w = match sphere_update_w(&x, state.y1, &state.y2, rho) {
            Ok(w) => w,
            Err(e) => return failure(sub_failure(k, "w step", e), state, trace),
        };
        let r1 = w.norm_squared() - 1.0;
        let r2 = &w - &x;
        let s1 = rho * (w.norm_squared() - state.w.norm_squared());
        let s2 = (&w - &state.w) * rho;
        let next = SphereState {
            y1: state.y1 + rho * r1,
            y2: &state.y2 + &r2 * rho,
            x,
            w,
            rho,
        };
        let objective = problem.loss.value(&next.x);
        if !next.is_finite() || !objective.is_finite() {
            let e = NeAdmmError::NonFiniteIterate {
                iteration: k,
                what: "sphere iterate",
            };
            return failure(e, state, trace);
        }
        let row = TraceRow {
            k,
            objective,
            r_norm: (r1 * r1 + r2.norm_squared()).sqrt(),
            s_norm: (s1 * s1 + s2.norm_squared()).sqrt(),
            rho,
        };
        trace.push(row);
        state = next;
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

/// `min ‖x‖₁ + (λ/2) Σ min((YΦx)_i, 0)² s.t. ‖x‖² = 1`.
#[derive(Debug, Clone)]
pub struct OneBitCsProblem {
    pub phi: DMatrix<f64>,
    /// Diagonal of `Y`, entries ±1.
    pub signs: DenseVector,
    pub lambda: f64,
    pub fista: FistaConfig,
    /// `YΦ`.
    sphi: DMatrix<f64>,
    /// Squared spectral norm of `YΦ`.
    sphi_norm_sq: f64,
}

impl OneBitCsProblem {
    pub fn new(phi: DMatrix<f64>, signs: DenseVector, lambda: f64) -> Result<Self> {
        check_dim("sign vector", phi.nrows(), signs.len())?;
        if signs.iter().any(|&s| s != 1.0 && s != -1.0) {
            return Err(NeAdmmError::InvalidArgument("sign entries must be +1 or -1".into()));
        }
        if !(lambda > 0.0) {
            return Err(NeAdmmError::InvalidArgument(format!("lambda {lambda}")));
        }
        let mut sphi = phi.clone();
        for (mut row, &s) in sphi.row_iter_mut().zip(signs.iter()) {
            row *= s;
        }
        let sphi_norm_sq = sphi.singular_values().iter().copied().fold(0.0, f64::max).powi(2);
        Ok(Self {
            phi,
            signs,
            lambda,
            fista: FistaConfig::default(),
            sphi,
            sphi_norm_sq,
        })
    }

    pub fn n(&self) -> usize {
        self.phi.ncols()
    }

    pub fn m(&self) -> usize {
        self.phi.nrows()
    }

    /// `YΦ`.
    pub fn signed_phi(&self) -> &DMatrix<f64> {
        &self.sphi
    }

    /// `‖w‖₁ + (λ/2) Σ min(z, 0)²`.
    pub fn split_objective(&self, w: &DenseVector, z: &DenseVector) -> f64 {
        w.lp_norm(1) + 0.5 * self.lambda * z.iter().map(|&v| v.min(0.0).powi(2)).sum::<f64>()
    }

    /// The original objective at `x`, i.e. [`Self::split_objective`] with
    /// `w = x`, `z = YΦx`.
    pub fn objective(&self, x: &DenseVector) -> f64 {
        self.split_objective(x, &(&self.sphi * x))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OneBitCsState {
    pub x: DenseVector,
    pub w: DenseVector,
    pub z: DenseVector,
    /// Multiplier of `‖x‖² − 1 = 0`.
    pub y1: f64,
    /// Multiplier of `YΦw − z = 0`.
    pub y2: DenseVector,
    /// Multiplier of `w − x = 0`.
    pub y3: DenseVector,
    pub rho: f64,
}

impl OneBitCsState {
    /// Normalized back-projection `x = w = Φᵀ Y 1 / ‖Φᵀ Y 1‖`, `z = YΦw`,
    /// zero multipliers. Falls back to `e₁` if the back-projection vanishes.
    pub fn back_projection(problem: &OneBitCsProblem, rho: f64) -> Self {
        let mut x = problem.phi.tr_mul(&problem.signs);
        let norm = x.norm();
        if norm > 0.0 && norm.is_finite() {
            x /= norm;
        } else {
            x = DenseVector::zeros(problem.n());
            x[0] = 1.0;
        }
        let z = &problem.sphi * &x;
        Self {
            w: x.clone(),
            x,
            z,
            y1: 0.0,
            y2: DenseVector::zeros(problem.m()),
            y3: DenseVector::zeros(problem.n()),
            rho,
        }
    }

    fn is_finite(&self) -> bool {
        all_finite(&self.x)
            && all_finite(&self.w)
            && all_finite(&self.z)
            && all_finite(&self.y2)
            && all_finite(&self.y3)
            && self.y1.is_finite()
    }
}

/// Exact scalar minimizer of `(λ/2) min(z, 0)² + (ρ/2)(z − a)²`.
pub fn onebit_z_coordinate(a: f64, lambda: f64, rho: f64) -> f64 {
    if a >= 0.0 {
        a
    } else {
        rho * a / (lambda + rho)
    }
}

/// The `z` step, coordinatewise with `a = YΦw + y2/ρ`.
pub fn onebit_update_z(problem: &OneBitCsProblem, w: &DenseVector, y2: &DenseVector, rho: f64) -> Result<DenseVector> {
    check_dim("w", problem.n(), w.len())?;
    check_dim("y2", problem.m(), y2.len())?;
    positive_rho(rho)?;
    let a = &problem.sphi * w + y2 / rho;
    Ok(a.map(|ai| onebit_z_coordinate(ai, problem.lambda, rho)))
}

/// The `w` step: `argmin_w ‖w‖₁ + (ρ/2)‖YΦw − z + y2/ρ‖² + (ρ/2)‖w − x + y3/ρ‖²`
/// by FISTA from `warm`, starting from the step `1/L` of the smooth part.
#[allow(clippy::too_many_arguments)]
pub fn onebit_update_w(
    problem: &OneBitCsProblem,
    z: &DenseVector,
    x: &DenseVector,
    y2: &DenseVector,
    y3: &DenseVector,
    rho: f64,
    warm: &DenseVector,
) -> Result<DenseVector> {
    check_dim("z", problem.m(), z.len())?;
    check_dim("y2", problem.m(), y2.len())?;
    check_dim("x", problem.n(), x.len())?;
    check_dim("y3", problem.n(), y3.len())?;
    check_dim("warm start", problem.n(), warm.len())?;
    positive_rho(rho)?;
    let fit = LeastSquares::new(rho, problem.sphi.clone(), z - y2 / rho);
    let pull = SquaredDistance::new(rho, x - y3 / rho);
    let smooth = SmoothSum::new(vec![&fit, &pull]);
    let l1 = L1Norm::new(1.0);
    let obj = CompositeObjective::new(&smooth, &l1);
    let cfg = FistaConfig {
        initial_step: 1.0 / (rho * (problem.sphi_norm_sq + 1.0)),
        ..problem.fista
    };
    Ok(fista_detailed(&obj, warm, &cfg)?.x)
}

/// Cycles the `x` (closed-form sphere step), `z` and `w` updates followed by
/// the three dual updates. The trace objective is `‖w‖₁ + (λ/2) Σ min(z, 0)²`;
/// `r` stacks all three constraint violations and `s = ρ ‖(Δz, Δw)‖`.
pub fn onebit_solve(
    problem: &OneBitCsProblem,
    init: OneBitCsState,
    schedule: RhoSchedule,
    stop: StopCriteria,
) -> std::result::Result<SolveOutcome<OneBitCsState>, SolveFailure<OneBitCsState>> {
    let mut trace = Vec::new();
    let (n, m) = (problem.n(), problem.m());
    let checks = schedule
        .validate()
        .and_then(|_| stop.validate())
        .and_then(|_| check_dim("x", n, init.x.len()))
        .and_then(|_| check_dim("w", n, init.w.len()))
        .and_then(|_| check_dim("y3", n, init.y3.len()))
        .and_then(|_| check_dim("z", m, init.z.len()))
        .and_then(|_| check_dim("y2", m, init.y2.len()));
    if let Err(e) = checks {
        return failure(e, init, trace);
    }
    let mut state = init;
    for it in 0..stop.max_iter {
        let k = it + 1;
        let rho = schedule.at(it);
        let x = match sphere_penalty_argmin(&(&state.w + &state.y3 / rho), state.y1 / rho) {
            Ok(x) => x,
            Err(e) => return failure(sub_failure(k, "x step", e), state, trace),
        };
        let z = match onebit_update_z(problem, &state.w, &state.y2, rho) {
            Ok(z) => z,
            Err(e) => return failure(sub_failure(k, "z step", e), state, trace),
        };
        let w = match onebit_update_w(problem, &z, &x, &state.y2, &state.y3, rho, &state.w) {
            Ok(w) => w,
            Err(e) => return failure(sub_failure(k, "w step", e), state, trace),
        };
        let r1 = x.norm_squared() - 1.0;
        let r2 = &problem.sphi * &w - &z;
        let r3 = &w - &x;
        let s_norm = rho * ((&z - &state.z).norm_squared() + (&w - &state.w).norm_squared()).sqrt();
        let next = OneBitCsState {
            y1: state.y1 + rho * r1,
            y2: &state.y2 + &r2 * rho,
            y3: &state.y3 + &r3 * rho,
            x,
            w,
            z,
            rho,
        };
        let objective = problem.split_objective(&next.w, &next.z);
        if !next.is_finite() || !objective.is_finite() || !s_norm.is_finite() {
            let e = NeAdmmError::NonFiniteIterate {
                iteration: k,
                what: "1-bit iterate",
            };
            return failure(e, state, trace);
        }
        let row = TraceRow {
            k,
            objective,
            r_norm: (r1 * r1 + r2.norm_squared() + r3.norm_squared()).sqrt(),
            s_norm,
            rho,
        };
        trace.push(row);
        state = next;
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
