//! Objective and constraint term interfaces, plus the concrete terms the
//! solvers in this crate are built from.
//!
//! `F1`/`F2` are [`Objective`]s, optionally [`SmoothTerm`] (value and
//! gradient) or [`ProxTerm`] (value and exact proximal map). Constraint maps
//! `f1`/`f2` are [`ConstraintTerm`]s. Where a map is not differentiable its
//! `jacobian` returns one designated element of the Fréchet subdifferential;
//! each implementation documents its choice.

use nalgebra::{DMatrix, DVector};

/// Real vector carrying every primal and dual variable.
pub type DenseVector = DVector<f64>;

pub trait Objective: Send + Sync {
    fn value(&self, x: &DenseVector) -> f64;
}

pub trait SmoothTerm: Objective {
    fn gradient(&self, x: &DenseVector) -> DenseVector;
}

pub trait ProxTerm: Objective {
    /// `argmin_u value(u) + ‖u − v‖² / (2 step)`.
    fn prox(&self, v: &DenseVector, step: f64) -> DenseVector;
}

pub trait ConstraintTerm: Send + Sync {
    fn dim_in(&self) -> usize;
    fn dim_out(&self) -> usize;
    fn eval(&self, x: &DenseVector) -> DenseVector;
    /// `dim_out × dim_in` Jacobian, or a designated subgradient at kinks.
    fn jacobian(&self, x: &DenseVector) -> DMatrix<f64>;
}

/// The zero function. Its prox is the identity.
#[derive(Debug, Clone, Copy, Default)]
pub struct ZeroTerm;

impl Objective for ZeroTerm {
    fn value(&self, _x: &DenseVector) -> f64 {
        0.0
    }
}

impl SmoothTerm for ZeroTerm {
    fn gradient(&self, x: &DenseVector) -> DenseVector {
        DenseVector::zeros(x.len())
    }
}

impl ProxTerm for ZeroTerm {
    fn prox(&self, v: &DenseVector, _step: f64) -> DenseVector {
        v.clone()
    }
}

/// `cᵀx`.
#[derive(Debug, Clone)]
pub struct LinearTerm {
    pub coeffs: DenseVector,
}

impl LinearTerm {
    pub fn new(coeffs: DenseVector) -> Self {
        Self { coeffs }
    }
}

impl Objective for LinearTerm {
    fn value(&self, x: &DenseVector) -> f64 {
        self.coeffs.dot(x)
    }
}

impl SmoothTerm for LinearTerm {
    fn gradient(&self, _x: &DenseVector) -> DenseVector {
        self.coeffs.clone()
    }
}

impl ProxTerm for LinearTerm {
    fn prox(&self, v: &DenseVector, step: f64) -> DenseVector {
        v - &self.coeffs * step
    }
}

/// `½ xᵀPx + qᵀx` with `P` symmetric positive semidefinite.
#[derive(Debug, Clone)]
pub struct QuadraticTerm {
    pub p: DMatrix<f64>,
    pub q: DenseVector,
}

impl QuadraticTerm {
    pub fn new(p: DMatrix<f64>, q: DenseVector) -> Self {
        Self { p, q }
    }
}

impl Objective for QuadraticTerm {
    fn value(&self, x: &DenseVector) -> f64 {
        0.5 * x.dot(&(&self.p * x)) + self.q.dot(x)
    }
}

impl SmoothTerm for QuadraticTerm {
    fn gradient(&self, x: &DenseVector) -> DenseVector {
        &self.p * x + &self.q
    }
}

/// `(weight/2)‖x − center‖²`.
#[derive(Debug, Clone)]
pub struct SquaredDistance {
    pub weight: f64,
    pub center: DenseVector,
}

impl SquaredDistance {
    pub fn new(weight: f64, center: DenseVector) -> Self {
        Self { weight, center }
    }
}

impl Objective for SquaredDistance {
    fn value(&self, x: &DenseVector) -> f64 {
        0.5 * self.weight * (x - &self.center).norm_squared()
    }
}

impl SmoothTerm for SquaredDistance {
    fn gradient(&self, x: &DenseVector) -> DenseVector {
        (x - &self.center) * self.weight
    }
}

impl ProxTerm for SquaredDistance {
    fn prox(&self, v: &DenseVector, step: f64) -> DenseVector {
        let s = step * self.weight;
        (v + &self.center * s) / (1.0 + s)
    }
}

/// `(weight/2)‖A x − b‖²`.
#[derive(Debug, Clone)]
pub struct LeastSquares {
    pub weight: f64,
    pub a: DMatrix<f64>,
    pub b: DenseVector,
}

impl LeastSquares {
    pub fn new(weight: f64, a: DMatrix<f64>, b: DenseVector) -> Self {
        Self { weight, a, b }
    }
}

impl Objective for LeastSquares {
    fn value(&self, x: &DenseVector) -> f64 {
        0.5 * self.weight * (&self.a * x - &self.b).norm_squared()
    }
}

impl SmoothTerm for LeastSquares {
    fn gradient(&self, x: &DenseVector) -> DenseVector {
        self.a.tr_mul(&(&self.a * x - &self.b)) * self.weight
    }
}

/// `λ‖x‖₁`.
#[derive(Debug, Clone, Copy)]
pub struct L1Norm {
    pub lambda: f64,
}

impl L1Norm {
    pub fn new(lambda: f64) -> Self {
        Self { lambda }
    }
}

pub fn soft_threshold(v: f64, threshold: f64) -> f64 {
    v.signum() * (v.abs() - threshold).max(0.0)
}

impl Objective for L1Norm {
    fn value(&self, x: &DenseVector) -> f64 {
        self.lambda * x.lp_norm(1)
    }
}

impl ProxTerm for L1Norm {
    fn prox(&self, v: &DenseVector, step: f64) -> DenseVector {
        let t = self.lambda * step;
        v.map(|vi| soft_threshold(vi, t))
    }
}

/// Logistic log-loss `Σ log(1 + e^{q_i}) − Y_i q_i` with labels `Y_i ∈ {0, 1}`.
#[derive(Debug, Clone)]
pub struct LogisticLoss {
    pub labels: DenseVector,
}

impl LogisticLoss {
    pub fn new(labels: DenseVector) -> Self {
        Self { labels }
    }
}

/// Numerically stable `log(1 + e^q)`.
pub fn softplus(q: f64) -> f64 {
    if q > 0.0 {
        q + (-q).exp().ln_1p()
    } else {
        q.exp().ln_1p()
    }
}

pub fn sigmoid(q: f64) -> f64 {
    if q >= 0.0 {
        1.0 / (1.0 + (-q).exp())
    } else {
        let e = q.exp();
        e / (1.0 + e)
    }
}

impl Objective for LogisticLoss {
    fn value(&self, q: &DenseVector) -> f64 {
        q.iter()
            .zip(self.labels.iter())
            .map(|(&qi, &yi)| softplus(qi) - yi * qi)
            .sum()
    }
}

impl SmoothTerm for LogisticLoss {
    fn gradient(&self, q: &DenseVector) -> DenseVector {
        DenseVector::from_iterator(
            q.len(),
            q.iter().zip(self.labels.iter()).map(|(&qi, &yi)| sigmoid(qi) - yi),
        )
    }
}

/// Sum of smooth terms on a common dimension.
pub struct SmoothSum<'a> {
    pub terms: Vec<&'a dyn SmoothTerm>,
}

impl<'a> SmoothSum<'a> {
    pub fn new(terms: Vec<&'a dyn SmoothTerm>) -> Self {
        Self { terms }
    }
}

impl Objective for SmoothSum<'_> {
    fn value(&self, x: &DenseVector) -> f64 {
        self.terms.iter().map(|t| t.value(x)).sum()
    }
}

impl SmoothTerm for SmoothSum<'_> {
    fn gradient(&self, x: &DenseVector) -> DenseVector {
        let mut g = DenseVector::zeros(x.len());
        for t in &self.terms {
            g += t.gradient(x);
        }
        g
    }
}

/// `x ↦ A x + b`.
#[derive(Debug, Clone)]
pub struct AffineMap {
    pub a: DMatrix<f64>,
    pub b: DenseVector,
}

impl AffineMap {
    pub fn linear(a: DMatrix<f64>) -> Self {
        let b = DenseVector::zeros(a.nrows());
        Self { a, b }
    }

    pub fn new(a: DMatrix<f64>, b: DenseVector) -> Self {
        Self { a, b }
    }
}

impl ConstraintTerm for AffineMap {
    fn dim_in(&self) -> usize {
        self.a.ncols()
    }
    fn dim_out(&self) -> usize {
        self.a.nrows()
    }
    fn eval(&self, x: &DenseVector) -> DenseVector {
        &self.a * x + &self.b
    }
    fn jacobian(&self, _x: &DenseVector) -> DMatrix<f64> {
        self.a.clone()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScalarFn {
    Identity,
    Square,
    /// Defined on `x ≥ 0`. The derivative at `x ≤ 0` is reported as 0.
    Sqrt,
}

/// Componentwise map `x_i ↦ g(x_i) + shift`, dimension preserving.
#[derive(Debug, Clone, Copy)]
pub struct ComponentwiseMap {
    pub func: ScalarFn,
    pub shift: f64,
    pub dim: usize,
}

impl ComponentwiseMap {
    pub fn new(func: ScalarFn, shift: f64, dim: usize) -> Self {
        Self { func, shift, dim }
    }

    fn apply(&self, v: f64) -> f64 {
        match self.func {
            ScalarFn::Identity => v,
            ScalarFn::Square => v * v,
            ScalarFn::Sqrt => v.sqrt(),
        }
    }

    fn derivative(&self, v: f64) -> f64 {
        match self.func {
            ScalarFn::Identity => 1.0,
            ScalarFn::Square => 2.0 * v,
            ScalarFn::Sqrt => {
                if v > 0.0 {
                    0.5 / v.sqrt()
                } else {
                    0.0
                }
            }
        }
    }
}

impl ConstraintTerm for ComponentwiseMap {
    fn dim_in(&self) -> usize {
        self.dim
    }
    fn dim_out(&self) -> usize {
        self.dim
    }
    fn eval(&self, x: &DenseVector) -> DenseVector {
        x.map(|v| self.apply(v) + self.shift)
    }
    fn jacobian(&self, x: &DenseVector) -> DMatrix<f64> {
        DMatrix::from_diagonal(&x.map(|v| self.derivative(v)))
    }
}

/// `x ↦ ‖x‖₂² − 1`, a map into R¹.
#[derive(Debug, Clone, Copy)]
pub struct SphereMap {
    pub dim: usize,
}

impl ConstraintTerm for SphereMap {
    fn dim_in(&self) -> usize {
        self.dim
    }
    fn dim_out(&self) -> usize {
        1
    }
    fn eval(&self, x: &DenseVector) -> DenseVector {
        DenseVector::from_element(1, x.norm_squared() - 1.0)
    }
    fn jacobian(&self, x: &DenseVector) -> DMatrix<f64> {
        DMatrix::from_row_slice(1, x.len(), (x * 2.0).as_slice())
    }
}

/// Per-group maximum: with groups `[0, e_1), [e_1, e_2), …` given by `ends`,
/// maps `t` to `(max of group 0, max of group 1, …)`. The Jacobian row of a
/// group is the indicator of its first maximizing index.
#[derive(Debug, Clone)]
pub struct GroupMax {
    ends: Vec<usize>,
}

impl GroupMax {
    /// `sizes` are the group lengths; every group must be nonempty.
    pub fn new(sizes: &[usize]) -> Self {
        assert!(sizes.iter().all(|&s| s > 0), "empty group");
        let ends = sizes
            .iter()
            .scan(0, |acc, &s| {
                *acc += s;
                Some(*acc)
            })
            .collect();
        Self { ends }
    }

    fn ranges(&self) -> impl Iterator<Item = std::ops::Range<usize>> + '_ {
        std::iter::once(0)
            .chain(self.ends.iter().copied())
            .zip(self.ends.iter().copied())
            .map(|(s, e)| s..e)
    }
}

fn first_argmax(xs: &[f64]) -> usize {
    let mut best = 0;
    for (j, &v) in xs.iter().enumerate() {
        if v > xs[best] {
            best = j;
        }
    }
    best
}

impl ConstraintTerm for GroupMax {
    fn dim_in(&self) -> usize {
        *self.ends.last().unwrap_or(&0)
    }
    fn dim_out(&self) -> usize {
        self.ends.len()
    }
    fn eval(&self, t: &DenseVector) -> DenseVector {
        DenseVector::from_iterator(
            self.ends.len(),
            self.ranges()
                .map(|r| t.as_slice()[r].iter().copied().fold(f64::NEG_INFINITY, f64::max)),
        )
    }
    fn jacobian(&self, t: &DenseVector) -> DMatrix<f64> {
        let mut j = DMatrix::zeros(self.dim_out(), self.dim_in());
        for (i, r) in self.ranges().enumerate() {
            let start = r.start;
            j[(i, start + first_argmax(&t.as_slice()[r]))] = 1.0;
        }
        j
    }
}

/// Largest relative deviation between `term.jacobian(x)` and a central
/// finite-difference Jacobian with step `h`.
pub fn jacobian_fd_error(term: &dyn ConstraintTerm, x: &DenseVector, h: f64) -> f64 {
    let analytic = term.jacobian(x);
    let mut worst: f64 = 0.0;
    for j in 0..x.len() {
        let mut xp = x.clone();
        let mut xm = x.clone();
        xp[j] += h;
        xm[j] -= h;
        let col = (term.eval(&xp) - term.eval(&xm)) / (2.0 * h);
        for i in 0..col.len() {
            let a = analytic[(i, j)];
            let err = (a - col[i]).abs() / a.abs().max(1.0);
            worst = worst.max(err);
        }
    }
    worst
}

/// Largest relative deviation between `term.gradient(x)` and central finite
/// differences of `term.value` with step `h`.
pub fn gradient_fd_error(term: &dyn SmoothTerm, x: &DenseVector, h: f64) -> f64 {
    let g = term.gradient(x);
    let mut worst: f64 = 0.0;
    for j in 0..x.len() {
        let mut xp = x.clone();
        let mut xm = x.clone();
        xp[j] += h;
        xm[j] -= h;
        let fd = (term.value(&xp) - term.value(&xm)) / (2.0 * h);
        worst = worst.max((g[j] - fd).abs() / g[j].abs().max(1.0));
    }
    worst
}
