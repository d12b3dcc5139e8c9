//! Multi-instance learning with the max rule:
//! `min ℓ(q) + w(β) s.t. q_i = max_j t_ij, t_ij = X_ijᵀβ`.
//!
//! The `t` step is nonconvex but separable over bags and solved exactly per
//! bag by sorting ([`t_update_bag`]).

use nalgebra::DMatrix;

use crate::engine::{all_finite, RhoSchedule, SolveFailure, SolveOutcome, StopCriteria, TraceRow};
use crate::error::{check_dim, NeAdmmError, Result};
use crate::inner::{fista_detailed, CompositeObjective, FistaConfig};
use crate::par::{self, Execution};
use crate::terms::{DenseVector, Objective, ProxTerm, SmoothSum, SmoothTerm, SquaredDistance, ZeroTerm};

/// Bags of instances stored as one stacked design matrix; bag `i` owns rows
/// `offsets[i]..offsets[i + 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct BagDataset {
    pub labels: DenseVector,
    pub x: DMatrix<f64>,
    offsets: Vec<usize>,
}

impl BagDataset {
    /// `sizes[i]` consecutive rows of `x` form bag `i`.
    pub fn new(labels: DenseVector, sizes: &[usize], x: DMatrix<f64>) -> Result<Self> {
        check_dim("bag labels", sizes.len(), labels.len())?;
        if sizes.is_empty() || sizes.contains(&0) {
            return Err(NeAdmmError::InvalidArgument(
                "every bag needs at least one instance".into(),
            ));
        }
        if x.ncols() == 0 {
            return Err(NeAdmmError::InvalidArgument("no features".into()));
        }
        let mut offsets = vec![0];
        for &s in sizes {
            offsets.push(offsets.last().unwrap() + s);
        }
        check_dim("stacked instances", *offsets.last().unwrap(), x.nrows())?;
        Ok(Self { labels, x, offsets })
    }

    /// One `(label, instances)` pair per bag, each instance a feature row.
    pub fn from_bags(bags: &[(f64, Vec<Vec<f64>>)]) -> Result<Self> {
        let p = bags
            .first()
            .and_then(|(_, inst)| inst.first())
            .map(Vec::len)
            .ok_or_else(|| NeAdmmError::InvalidArgument("empty dataset".into()))?;
        let mut rows = Vec::new();
        for (_, inst) in bags {
            for row in inst {
                check_dim("feature count", p, row.len())?;
                rows.extend_from_slice(row);
            }
        }
        let sizes: Vec<usize> = bags.iter().map(|(_, inst)| inst.len()).collect();
        let total: usize = sizes.iter().sum();
        let labels = DenseVector::from_iterator(bags.len(), bags.iter().map(|(y, _)| *y));
        Self::new(labels, &sizes, DMatrix::from_row_slice(total, p, &rows))
    }

    pub fn n_bags(&self) -> usize {
        self.labels.len()
    }

    pub fn n_instances(&self) -> usize {
        self.x.nrows()
    }

    pub fn n_features(&self) -> usize {
        self.x.ncols()
    }

    pub fn bag_range(&self, i: usize) -> std::ops::Range<usize> {
        self.offsets[i]..self.offsets[i + 1]
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.offsets.windows(2).map(|w| w[1] - w[0]).collect()
    }

    /// Per-bag maximum of a stacked instance vector.
    pub fn bag_max(&self, t: &DenseVector) -> DenseVector {
        DenseVector::from_iterator(
            self.n_bags(),
            (0..self.n_bags()).map(|i| {
                t.as_slice()[self.bag_range(i)]
                    .iter()
                    .copied()
                    .fold(f64::NEG_INFINITY, f64::max)
            }),
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MaxOpState {
    pub q: DenseVector,
    pub beta: DenseVector,
    /// Stacked per-instance values, laid out like the dataset rows.
    pub t: DenseVector,
    pub y1: DenseVector,
    /// Stacked like `t`.
    pub y2: DenseVector,
    pub rho: f64,
}

impl MaxOpState {
    pub fn zeros(data: &BagDataset, rho: f64) -> Self {
        Self {
            q: DenseVector::zeros(data.n_bags()),
            beta: DenseVector::zeros(data.n_features()),
            t: DenseVector::zeros(data.n_instances()),
            y1: DenseVector::zeros(data.n_bags()),
            y2: DenseVector::zeros(data.n_instances()),
            rho,
        }
    }

    fn check(&self, data: &BagDataset) -> Result<()> {
        check_dim("q", data.n_bags(), self.q.len())?;
        check_dim("y1", data.n_bags(), self.y1.len())?;
        check_dim("beta", data.n_features(), self.beta.len())?;
        check_dim("t", data.n_instances(), self.t.len())?;
        check_dim("y2", data.n_instances(), self.y2.len())
    }

    fn is_finite(&self) -> bool {
        [&self.q, &self.beta, &self.t, &self.y1, &self.y2]
            .iter()
            .all(|v| all_finite(v))
    }
}

/// One bag's `t` subproblem: minimize `(ψ − max_j t_j)² + ‖t − φ‖²`.
#[derive(Debug, Clone, PartialEq)]
pub struct TUpdateInstance {
    pub psi: f64,
    pub phi: DenseVector,
}

impl TUpdateInstance {
    pub fn new(psi: f64, phi: DenseVector) -> Self {
        Self { psi, phi }
    }

    pub fn objective(&self, t: &DenseVector) -> f64 {
        let max = t.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        (self.psi - max).powi(2) + (t - &self.phi).norm_squared()
    }

    /// Indexes sorted by `φ` descending; ties keep index order.
    fn order(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.phi.len()).collect();
        idx.sort_by(|&a, &b| self.phi[b].total_cmp(&self.phi[a]));
        idx
    }

    /// `a_c = (φ'_1 + … + φ'_c + ψ)/(c + 1)` for `c = 1..n`, `φ'` sorted
    /// descending.
    pub fn prefix_means(&self) -> Vec<f64> {
        let mut sum = self.psi;
        self.order()
            .into_iter()
            .enumerate()
            .map(|(c, j)| {
                sum += self.phi[j];
                sum / (c + 2) as f64
            })
            .collect()
    }

    /// `Σ_{j≤c} (a_c − φ'_j)² + (a_c − ψ)²` for `c = 1..n`: the objective when
    /// the top `c` sorted entries share the value `a_c` and the rest keep `φ`.
    pub fn prefix_costs(&self) -> Vec<f64> {
        let order = self.order();
        self.prefix_means()
            .into_iter()
            .enumerate()
            .map(|(c, a)| order[..=c].iter().map(|&j| (a - self.phi[j]).powi(2)).sum::<f64>() + (a - self.psi).powi(2))
            .collect()
    }
}

/// Exact minimizer of `(ψ − max_j t_j)² + ‖t − φ‖²`.
///
/// With `φ'` sorted descending and `a_c` the prefix means, `c*` is the
/// smallest `c` with `a_c > φ'_{c+1}` (`φ'_{n+1} = −∞`); the top `c*` sorted
/// entries are set to `a_{c*}` and the rest keep their `φ`. Ties in `φ` are
/// broken by index. `O(n log n)`.
pub fn t_update_bag(inst: &TUpdateInstance) -> DenseVector {
    let n = inst.phi.len();
    let order = inst.order();
    let mut sum = inst.psi;
    let mut c_star = n;
    let mut level = f64::NAN;
    for (c, &j) in order.iter().enumerate() {
        sum += inst.phi[j];
        let a = sum / (c + 2) as f64;
        let next = order.get(c + 1).map_or(f64::NEG_INFINITY, |&k| inst.phi[k]);
        if a > next {
            c_star = c + 1;
            level = a;
            break;
        }
    }
    let mut t = inst.phi.clone();
    for &j in &order[..c_star] {
        t[j] = level;
    }
    t
}

/// Bag subproblems of the `t` step: `ψ_i = q_i + y1_i/ρ`,
/// `φ_ij = X_ijᵀβ − y2_ij/ρ`.
pub fn t_update_instances(
    data: &BagDataset,
    q: &DenseVector,
    beta: &DenseVector,
    y1: &DenseVector,
    y2: &DenseVector,
    rho: f64,
) -> Vec<TUpdateInstance> {
    let phi = &data.x * beta - y2 / rho;
    (0..data.n_bags())
        .map(|i| {
            let r = data.bag_range(i);
            TUpdateInstance::new(q[i] + y1[i] / rho, DenseVector::from_column_slice(&phi.as_slice()[r]))
        })
        .collect()
}

/// [`t_update_bag`] over every bag, concatenated in bag order.
pub fn t_update_all(mode: Execution, instances: &[TUpdateInstance]) -> DenseVector {
    let parts = par::map(mode, instances, t_update_bag);
    let total = parts.iter().map(|p| p.len()).sum();
    DenseVector::from_iterator(total, parts.iter().flat_map(|p| p.iter().copied()))
}

/// `(weight/2)‖X β − target‖²` borrowing the design matrix.
struct StackedFit<'a> {
    x: &'a DMatrix<f64>,
    target: DenseVector,
    weight: f64,
}

impl Objective for StackedFit<'_> {
    fn value(&self, beta: &DenseVector) -> f64 {
        0.5 * self.weight * (self.x * beta - &self.target).norm_squared()
    }
}

impl SmoothTerm for StackedFit<'_> {
    fn gradient(&self, beta: &DenseVector) -> DenseVector {
        self.x.tr_mul(&(self.x * beta - &self.target)) * self.weight
    }
}

fn positive_rho(rho: f64) -> Result<()> {
    if rho > 0.0 && rho.is_finite() {
        Ok(())
    } else {
        Err(NeAdmmError::InvalidArgument(format!("penalty {rho}")))
    }
}

/// The `q` step: `argmin_q ℓ(q) + (ρ/2)‖q − max t + y1/ρ‖²` by FISTA.
pub fn update_q(
    loss: &dyn SmoothTerm,
    max_t: &DenseVector,
    y1: &DenseVector,
    rho: f64,
    warm: &DenseVector,
    cfg: &FistaConfig,
) -> Result<DenseVector> {
    check_dim("y1", max_t.len(), y1.len())?;
    check_dim("warm start", max_t.len(), warm.len())?;
    positive_rho(rho)?;
    let pull = SquaredDistance::new(rho, max_t - y1 / rho);
    let smooth = SmoothSum::new(vec![loss, &pull]);
    let obj = CompositeObjective::new(&smooth, &ZeroTerm);
    Ok(fista_detailed(&obj, warm, cfg)?.x)
}

/// The `β` step: `argmin_β w(β) + (ρ/2)‖t − Xβ + y2/ρ‖²` by FISTA.
/// `x_norm_sq` is an upper bound on `‖X‖₂²`, used for the initial step.
#[allow(clippy::too_many_arguments)]
pub fn update_beta(
    reg: &dyn ProxTerm,
    x: &DMatrix<f64>,
    x_norm_sq: f64,
    t: &DenseVector,
    y2: &DenseVector,
    rho: f64,
    warm: &DenseVector,
    cfg: &FistaConfig,
) -> Result<DenseVector> {
    check_dim("t", x.nrows(), t.len())?;
    check_dim("y2", x.nrows(), y2.len())?;
    check_dim("warm start", x.ncols(), warm.len())?;
    positive_rho(rho)?;
    let fit = StackedFit {
        x,
        target: t + y2 / rho,
        weight: rho,
    };
    let obj = CompositeObjective::new(&fit, reg);
    let cfg = FistaConfig {
        initial_step: cfg.initial_step.min(1.0 / (rho * x_norm_sq.max(f64::MIN_POSITIVE))),
        ..*cfg
    };
    Ok(fista_detailed(&obj, warm, &cfg)?.x)
}

/// Squared spectral norm of `x`.
pub fn spectral_norm_sq(x: &DMatrix<f64>) -> f64 {
    // the Gram matrix is p × p, small next to the instance count
    let gram = x.tr_mul(x);
    gram.symmetric_eigenvalues().iter().copied().fold(0.0, f64::max)
}

pub struct MaxOpProblem<'a> {
    pub data: &'a BagDataset,
    pub loss: &'a dyn SmoothTerm,
    pub reg: &'a dyn ProxTerm,
    pub fista: FistaConfig,
    /// Execution mode of the per-bag `t` step.
    pub execution: Execution,
    x_norm_sq: f64,
}

impl<'a> MaxOpProblem<'a> {
    pub fn new(data: &'a BagDataset, loss: &'a dyn SmoothTerm, reg: &'a dyn ProxTerm) -> Self {
        Self {
            data,
            loss,
            reg,
            fista: FistaConfig::default(),
            execution: Execution::default(),
            x_norm_sq: spectral_norm_sq(&data.x),
        }
    }

    pub fn objective(&self, s: &MaxOpState) -> f64 {
        self.loss.value(&s.q) + self.reg.value(&s.beta)
    }
}

fn failure<S>(
    error: NeAdmmError,
    state: S,
    trace: Vec<TraceRow>,
) -> std::result::Result<SolveOutcome<S>, SolveFailure<S>> {
    Err(SolveFailure { error, state, trace })
}

/// Updates `q`, `β`, `t` in turn, then both multipliers. Residuals follow the
/// iteration's definitions: `r = ‖(q − max t, t − Xβ)‖` and
/// `s = ‖(ρ(max t_old − max t), t − t_old)‖`, the second block without `ρ`.
pub fn maxop_solve(
    problem: &MaxOpProblem<'_>,
    init: MaxOpState,
    schedule: RhoSchedule,
    stop: StopCriteria,
) -> std::result::Result<SolveOutcome<MaxOpState>, SolveFailure<MaxOpState>> {
    let data = problem.data;
    let mut trace = Vec::new();
    if let Err(e) = schedule
        .validate()
        .and_then(|_| stop.validate())
        .and_then(|_| init.check(data))
    {
        return failure(e, init, trace);
    }
    let sub = |iteration, what: &str, e: NeAdmmError| NeAdmmError::SubproblemFailure {
        iteration,
        reason: format!("{what}: {e}"),
    };
    let mut state = init;
    let mut max_old = data.bag_max(&state.t);
    for it in 0..stop.max_iter {
        let k = it + 1;
        let rho = schedule.at(it);
        let q = match update_q(problem.loss, &max_old, &state.y1, rho, &state.q, &problem.fista) {
            Ok(q) => q,
            Err(e) => return failure(sub(k, "q step", e), state, trace),
        };
        let beta = match update_beta(
            problem.reg,
            &data.x,
            problem.x_norm_sq,
            &state.t,
            &state.y2,
            rho,
            &state.beta,
            &problem.fista,
        ) {
            Ok(b) => b,
            Err(e) => return failure(sub(k, "beta step", e), state, trace),
        };
        let instances = t_update_instances(data, &q, &beta, &state.y1, &state.y2, rho);
        let t = t_update_all(problem.execution, &instances);
        let max_new = data.bag_max(&t);
        let r1 = &q - &max_new;
        let r2 = &t - &data.x * &beta;
        let s1 = (&max_old - &max_new) * rho;
        let s2 = &t - &state.t;
        let next = MaxOpState {
            y1: &state.y1 + &r1 * rho,
            y2: &state.y2 + &r2 * rho,
            q,
            beta,
            t,
            rho,
        };
        let objective = problem.objective(&next);
        if !next.is_finite() || !objective.is_finite() {
            let e = NeAdmmError::NonFiniteIterate {
                iteration: k,
                what: "max-rule iterate",
            };
            return failure(e, state, trace);
        }
        let row = TraceRow {
            k,
            objective,
            r_norm: (r1.norm_squared() + r2.norm_squared()).sqrt(),
            s_norm: (s1.norm_squared() + s2.norm_squared()).sqrt(),
            rho,
        };
        trace.push(row);
        state = next;
        max_old = max_new;
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
    use crate::terms::{L1Norm, LogisticLoss};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn dv(v: &[f64]) -> DenseVector {
        DenseVector::from_column_slice(v)
    }

    #[test]
    fn t_update_examples() {
        let inst = TUpdateInstance::new(0.0, dv(&[3.0, 1.0]));
        let t = t_update_bag(&inst);
        assert_eq!(t, dv(&[1.5, 1.0]));
        assert_abs_diff_eq!(inst.objective(&t), 4.5, epsilon = 1e-15);

        let inst = TUpdateInstance::new(10.0, dv(&[1.0, 1.0]));
        let t = t_update_bag(&inst);
        assert_eq!(t, dv(&[5.5, 1.0]));
        assert_abs_diff_eq!(inst.objective(&t), 40.5, epsilon = 1e-15);

        let inst = TUpdateInstance::new(-2.5, dv(&[-2.5]));
        assert_eq!(t_update_bag(&inst), dv(&[-2.5]));
        assert_eq!(inst.objective(&t_update_bag(&inst)), 0.0);
    }

    #[test]
    fn all_entries_clipped_when_psi_is_low() {
        let inst = TUpdateInstance::new(-9.0, dv(&[1.0, 2.0, 3.0]));
        let t = t_update_bag(&inst);
        // a_3 = (6 − 9)/4
        assert_eq!(t, DenseVector::from_element(3, -0.75));
    }

    #[test]
    fn prefix_costs_are_nondecreasing() {
        let inst = TUpdateInstance::new(0.7, dv(&[0.1, 3.0, -2.0, 3.0, 1.5]));
        let h = inst.prefix_costs();
        assert_eq!(h.len(), 5);
        for w in h.windows(2) {
            assert!(w[1] >= w[0] - 1e-12);
        }
    }

    proptest! {
        #[test]
        fn t_update_is_permutation_equivariant(
            phi in prop::collection::vec(-5.0..5.0f64, 1..8),
            psi in -6.0..6.0f64,
            seed in any::<u64>(),
        ) {
            let n = phi.len();
            let mut perm: Vec<usize> = (0..n).collect();
            // deterministic shuffle from the seed
            let mut s = seed;
            for i in (1..n).rev() {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                perm.swap(i, (s >> 33) as usize % (i + 1));
            }
            let base = t_update_bag(&TUpdateInstance::new(psi, dv(&phi)));
            let permuted_phi: Vec<f64> = perm.iter().map(|&j| phi[j]).collect();
            let permuted = t_update_bag(&TUpdateInstance::new(psi, dv(&permuted_phi)));
            for (i, &j) in perm.iter().enumerate() {
                prop_assert_eq!(permuted[i], base[j]);
            }
        }

        #[test]
        fn t_update_is_stationary_in_free_coordinates(
            phi in prop::collection::vec(-5.0..5.0f64, 1..8),
            psi in -6.0..6.0f64,
        ) {
            let inst = TUpdateInstance::new(psi, dv(&phi));
            let t = t_update_bag(&inst);
            let max = t.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            for j in 0..phi.len() {
                if t[j] < max {
                    prop_assert_eq!(t[j], phi[j]);
                }
            }
        }
    }

    #[test]
    fn update_q_examples() {
        let cfg = FistaConfig::default();
        let max_t = dv(&[1.0, -2.0]);
        let y1 = dv(&[0.5, 0.5]);
        let zero2 = DenseVector::zeros(2);
        let q = update_q(&ZeroTerm, &max_t, &y1, 2.0, &zero2, &cfg).unwrap();
        assert_abs_diff_eq!((q - dv(&[0.75, -2.25])).norm(), 0.0, epsilon = 1e-7);

        // root of σ(q) − 1 + q by bisection
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if crate::terms::sigmoid(mid) - 1.0 + mid < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let loss = LogisticLoss::new(dv(&[1.0]));
        let q = update_q(&loss, &dv(&[0.0]), &dv(&[0.0]), 1.0, &dv(&[0.0]), &cfg).unwrap();
        assert_abs_diff_eq!(q[0], lo, epsilon = 1e-6);

        let sq = SquaredDistance::new(1.0, dv(&[3.0]));
        let q = update_q(&sq, &dv(&[1.0]), &dv(&[0.0]), 1.0, &dv(&[0.0]), &cfg).unwrap();
        assert_abs_diff_eq!(q[0], 2.0, epsilon = 1e-7);
    }

    #[test]
    fn update_beta_examples() {
        let cfg = FistaConfig::default();
        let x = DMatrix::identity(3, 3);
        let t = dv(&[1.0, -2.0, 0.5]);
        let zero = DenseVector::zeros(3);
        let beta = update_beta(&ZeroTerm, &x, 1.0, &t, &zero, 1.0, &zero, &cfg).unwrap();
        assert_abs_diff_eq!((beta - &t).norm(), 0.0, epsilon = 1e-7);

        let heavy = L1Norm::new(1e6);
        let beta = update_beta(&heavy, &x, 1.0, &t, &zero, 1.0, &t, &cfg).unwrap();
        assert_eq!(beta, zero);
    }

    fn tiny_dataset() -> BagDataset {
        BagDataset::from_bags(&[
            (1.0, vec![vec![1.0, 0.0], vec![0.0, 1.0]]),
            (0.0, vec![vec![-1.0, 0.5]]),
            (1.0, vec![vec![0.3, 0.3], vec![2.0, -1.0], vec![0.0, 0.0]]),
        ])
        .unwrap()
    }

    #[test]
    fn dataset_layout() {
        let d = tiny_dataset();
        assert_eq!(d.n_bags(), 3);
        assert_eq!(d.n_instances(), 6);
        assert_eq!(d.sizes(), vec![2, 1, 3]);
        assert_eq!(d.bag_range(2), 3..6);
        let t = dv(&[1.0, 2.0, -1.0, 0.0, 5.0, 4.0]);
        assert_eq!(d.bag_max(&t), dv(&[2.0, -1.0, 5.0]));
        assert!(BagDataset::new(dv(&[1.0]), &[0], DMatrix::zeros(0, 2)).is_err());
    }

    #[test]
    fn fixed_point_has_zero_residual() {
        let d = tiny_dataset();
        let loss = ZeroTerm;
        let reg = ZeroTerm;
        let problem = MaxOpProblem::new(&d, &loss, &reg);
        let beta = dv(&[0.4, -0.2]);
        let t = &d.x * &beta;
        let state = MaxOpState {
            q: d.bag_max(&t),
            beta,
            t,
            y1: DenseVector::zeros(3),
            y2: DenseVector::zeros(6),
            rho: 1.0,
        };
        let out = maxop_solve(&problem, state, RhoSchedule::Constant(1.0), StopCriteria::default()).unwrap();
        assert!(out.converged);
        assert!(out.trace[0].r_norm < 1e-7, "{:?}", out.trace[0]);
    }

    #[test]
    fn parallel_and_sequential_t_steps_agree() {
        let instances: Vec<TUpdateInstance> = (0..200)
            .map(|i| {
                let phi = DenseVector::from_fn(1 + i % 7, |j, _| ((i * 31 + j * 17) as f64).sin() * 3.0);
                TUpdateInstance::new((i as f64).cos(), phi)
            })
            .collect();
        assert_eq!(
            t_update_all(Execution::Sequential, &instances),
            t_update_all(Execution::Parallel, &instances)
        );
    }
}
