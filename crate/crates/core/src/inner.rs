//! Convex and scalar inner solvers: accelerated proximal gradient (FISTA),
//! real roots of cubics, and golden-section search.

use crate::error::{NeAdmmError, Result};
use crate::terms::{DenseVector, ProxTerm, SmoothTerm};

/// `smooth(x) + nonsmooth(x)` over a common dimension.
pub struct CompositeObjective<'a> {
    pub smooth: &'a dyn SmoothTerm,
    pub nonsmooth: &'a dyn ProxTerm,
}

impl<'a> CompositeObjective<'a> {
    pub fn new(smooth: &'a dyn SmoothTerm, nonsmooth: &'a dyn ProxTerm) -> Self {
        Self { smooth, nonsmooth }
    }

    pub fn value(&self, x: &DenseVector) -> f64 {
        self.smooth.value(x) + self.nonsmooth.value(x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FistaConfig {
    pub max_iter: usize,
    /// Stop once successive iterates are this close.
    pub tol: f64,
    pub initial_step: f64,
    /// Step shrink factor for backtracking, in (0, 1).
    pub backtracking_factor: f64,
}

impl Default for FistaConfig {
    fn default() -> Self {
        Self {
            max_iter: 500,
            tol: 1e-8,
            initial_step: 1.0,
            backtracking_factor: 0.5,
        }
    }
}

impl FistaConfig {
    fn validate(&self) -> Result<()> {
        if self.max_iter == 0
            || !(self.tol > 0.0)
            || !(self.initial_step > 0.0)
            || !(self.backtracking_factor > 0.0 && self.backtracking_factor < 1.0)
        {
            return Err(NeAdmmError::InvalidArgument(format!("{self:?}")));
        }
        Ok(())
    }
}

/// Result of a FISTA run; `step` is the final backtracked step size, handy
/// as the next warm start.
#[derive(Debug, Clone)]
pub struct FistaResult {
    pub x: DenseVector,
    pub iterations: usize,
    pub step: f64,
}

/// Minimizes `obj` from `x0` by FISTA with backtracking line search and
/// function-value restart. The returned point never has a larger composite
/// objective than `x0`.
pub fn fista(obj: &CompositeObjective<'_>, x0: &DenseVector, cfg: &FistaConfig) -> Result<DenseVector> {
    fista_detailed(obj, x0, cfg).map(|r| r.x)
}

pub fn fista_detailed(obj: &CompositeObjective<'_>, x0: &DenseVector, cfg: &FistaConfig) -> Result<FistaResult> {
    cfg.validate()?;
    let non_finite = |iteration| NeAdmmError::NonFiniteIterate {
        iteration,
        what: "fista iterate",
    };
    let mut x = x0.clone();
    let mut fx = obj.value(&x);
    if !fx.is_finite() {
        return Err(non_finite(0));
    }
    let mut y = x.clone();
    let mut t = 1.0_f64;
    let mut step = cfg.initial_step;
    let mut restarted = true;

    for it in 1..=cfg.max_iter {
        let fy = obj.smooth.value(&y);
        let gy = obj.smooth.gradient(&y);
        let z = loop {
            let z = obj.nonsmooth.prox(&(&y - &gy * step), step);
            let d = &z - &y;
            let model = fy + gy.dot(&d) + d.norm_squared() / (2.0 * step);
            let fz = obj.smooth.value(&z);
            if fz <= model + 1e-12 * fy.abs().max(1.0) {
                break z;
            }
            step *= cfg.backtracking_factor;
            if step < 1e-300 {
                return Err(non_finite(it));
            }
        };
        if !z.iter().all(|v| v.is_finite()) {
            return Err(non_finite(it));
        }
        let fz = obj.value(&z);
        if fz > fx {
            if restarted {
                // a plain proximal step from x failed to descend: x is stationary
                // up to rounding
                return Ok(FistaResult {
                    x,
                    iterations: it,
                    step,
                });
            }
            y = x.clone();
            t = 1.0;
            restarted = true;
            continue;
        }
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        let moved = (&z - &x).norm();
        y = &z + (&z - &x) * ((t - 1.0) / t_next);
        x = z;
        fx = fz;
        t = t_next;
        restarted = false;
        if moved <= cfg.tol {
            return Ok(FistaResult {
                x,
                iterations: it,
                step,
            });
        }
    }
    Ok(FistaResult {
        x,
        iterations: cfg.max_iter,
        step,
    })
}

/// Composite gradient mapping norm `‖x − prox_step(x − step ∇f(x))‖`.
pub fn prox_gradient_residual(obj: &CompositeObjective<'_>, x: &DenseVector, step: f64) -> f64 {
    let g = obj.smooth.gradient(x);
    (x - obj.nonsmooth.prox(&(x - g * step), step)).norm()
}

/// Real roots of a polynomial of degree at most three, ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct CubicRealRoots {
    pub roots: Vec<f64>,
}

const DEDUP_TOL: f64 = 1e-12;

fn horner(coeffs: [f64; 4], t: f64) -> (f64, f64) {
    let [a, b, c, d] = coeffs;
    let value = ((a * t + b) * t + c) * t + d;
    let slope = (3.0 * a * t + 2.0 * b) * t + c;
    (value, slope)
}

/// Scale used to judge the residual of a root: the sum of absolute monomials.
pub fn cubic_residual_scale(coeffs: [f64; 4], t: f64) -> f64 {
    let [a, b, c, d] = coeffs;
    let at = t.abs();
    (a.abs() * at * at * at + b.abs() * at * at + c.abs() * at + d.abs()).max(1.0)
}

fn polish(coeffs: [f64; 4], mut t: f64) -> f64 {
    let (mut f, _) = horner(coeffs, t);
    for _ in 0..8 {
        let (_, df) = horner(coeffs, t);
        if df == 0.0 || f == 0.0 {
            break;
        }
        let next = t - f / df;
        let (fnext, _) = horner(coeffs, next);
        if fnext.abs() < f.abs() {
            t = next;
            f = fnext;
        } else {
            break;
        }
    }
    t
}

fn quadratic_roots(a: f64, b: f64, c: f64) -> Vec<f64> {
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return vec![];
    }
    if disc == 0.0 {
        return vec![-b / (2.0 * a)];
    }
    // avoid cancellation
    let q = -0.5 * (b + b.signum_nonzero() * disc.sqrt());
    let mut r = vec![q / a, c / q];
    r.sort_by(f64::total_cmp);
    r
}

trait SignumNonzero {
    fn signum_nonzero(self) -> f64;
}

impl SignumNonzero for f64 {
    fn signum_nonzero(self) -> f64 {
        if self < 0.0 {
            -1.0
        } else {
            1.0
        }
    }
}

/// All real roots of `a t³ + b t² + c t + d = 0`, falling back to the
/// quadratic or linear case when leading coefficients vanish. Cardano's
/// closed form (trigonometric in the three-root case) followed by Newton
/// polishing of each root.
pub fn cubic_real_roots(a: f64, b: f64, c: f64, d: f64) -> Result<CubicRealRoots> {
    let coeffs = [a, b, c, d];
    if coeffs.iter().all(|&v| v == 0.0) {
        return Err(NeAdmmError::DegenerateAllZero);
    }
    if coeffs.iter().any(|v| !v.is_finite()) {
        return Err(NeAdmmError::InvalidArgument(format!(
            "non-finite cubic coefficients {coeffs:?}"
        )));
    }
    let mut roots = if a == 0.0 {
        if b == 0.0 {
            if c == 0.0 {
                vec![]
            } else {
                vec![-d / c]
            }
        } else {
            quadratic_roots(b, c, d)
        }
    } else {
        let (b, c, d) = (b / a, c / a, d / a);
        // t = s − b/3 gives s³ + p s + q = 0
        let shift = b / 3.0;
        let p = c - b * b / 3.0;
        let q = 2.0 * b * b * b / 27.0 - b * c / 3.0 + d;
        let half_q = 0.5 * q;
        let third_p = p / 3.0;
        let disc = half_q * half_q + third_p * third_p * third_p;
        let depressed: Vec<f64> = if p == 0.0 {
            vec![(-q).cbrt()]
        } else if disc > 0.0 {
            let sq = disc.sqrt();
            // pick the larger-magnitude branch to avoid cancellation
            let u = (-half_q - half_q.signum_nonzero() * sq).cbrt();
            let v = if u == 0.0 { 0.0 } else { -third_p / u };
            vec![u + v]
        } else {
            let r = (-third_p).sqrt();
            let cos_arg = (-half_q / (r * r * r)).clamp(-1.0, 1.0);
            let theta = cos_arg.acos();
            (0..3)
                .map(|k| 2.0 * r * ((theta - 2.0 * std::f64::consts::PI * k as f64) / 3.0).cos())
                .collect()
        };
        depressed.into_iter().map(|s| s - shift).collect()
    };
    for r in roots.iter_mut() {
        *r = polish(coeffs, *r);
    }
    roots.sort_by(f64::total_cmp);
    roots.dedup_by(|later, earlier| (*later - *earlier).abs() <= DEDUP_TOL * earlier.abs().max(1.0));
    Ok(CubicRealRoots { roots })
}

/// Golden-section search for a minimizer of `f` on `[lo, hi]`, stopping once
/// the bracket is narrower than `tol`. Exact for unimodal `f`.
pub fn golden_section_min<F>(f: F, lo: f64, hi: f64, tol: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(NeAdmmError::InvalidBracket { lo, hi });
    }
    if !(tol > 0.0) {
        return Err(NeAdmmError::InvalidArgument(format!("tolerance {tol}")));
    }
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while b - a > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
        // bracket stops shrinking at machine precision
        if c >= d {
            break;
        }
    }
    Ok(0.5 * (a + b))
}
