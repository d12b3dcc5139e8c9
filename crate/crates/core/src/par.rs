//! Data-parallel helpers with a sequential fallback.
//!
//! Every helper preserves input order in its output, so results are identical
//! whichever [`Execution`] mode runs them.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// How a batch of independent work items is executed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    /// Runs on the rayon pool; identical to `Sequential` without the
    /// `parallel` feature.
    Parallel,
}

impl Default for Execution {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Execution::Parallel
        } else {
            Execution::Sequential
        }
    }
}

/// Maps `f` over `items`, keeping order.
pub fn map<T, U, F>(mode: Execution, items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    match mode {
        #[cfg(feature = "parallel")]
        Execution::Parallel => items.par_iter().map(f).collect(),
        _ => items.iter().map(f).collect(),
    }
}

/// Maps `f` over `0..n`, keeping order.
pub fn map_range<U, F>(mode: Execution, n: usize, f: F) -> Vec<U>
where
    U: Send,
    F: Fn(usize) -> U + Sync + Send,
{
    match mode {
        #[cfg(feature = "parallel")]
        Execution::Parallel => (0..n).into_par_iter().map(f).collect(),
        _ => (0..n).map(f).collect(),
    }
}

/// Index and value of the smallest `f(i)` over `0..n`; ties go to the lowest
/// index. Returns `None` when `n == 0`.
pub fn argmin_range<F>(mode: Execution, n: usize, f: F) -> Option<(usize, f64)>
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    let better = |a: (usize, f64), b: (usize, f64)| {
        if b.1 < a.1 || (b.1 == a.1 && b.0 < a.0) {
            b
        } else {
            a
        }
    };
    match mode {
        #[cfg(feature = "parallel")]
        Execution::Parallel => (0..n).into_par_iter().map(|i| (i, f(i))).reduce_with(better),
        _ => (0..n).map(|i| (i, f(i))).reduce(better),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modes_agree() {
        let items: Vec<u64> = (0..1000).collect();
        let a = map(Execution::Sequential, &items, |x| x * x);
        let b = map(Execution::Parallel, &items, |x| x * x);
        assert_eq!(a, b);
        let c = map_range(Execution::Parallel, 1000, |i| (i as u64) * (i as u64));
        assert_eq!(a, c);
    }

    #[test]
    fn argmin_prefers_lowest_index_on_ties() {
        let f = |i: usize| ((i as f64) - 10.0).abs().max(3.0);
        for mode in [Execution::Sequential, Execution::Parallel] {
            assert_eq!(argmin_range(mode, 100, f), Some((7, 3.0)));
            assert_eq!(argmin_range(mode, 100, |i| (i as f64 - 42.0).abs()), Some((42, 0.0)));
        }
        assert_eq!(argmin_range(Execution::Sequential, 0, |_| 0.0), None);
    }
}
