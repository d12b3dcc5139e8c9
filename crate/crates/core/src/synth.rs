//! Seeded synthetic data for the two applications. All draws come from
//! `ChaCha8Rng`, so outputs are bit-identical across platforms for a seed.

use nalgebra::DMatrix;
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{NeAdmmError, Result};
use crate::maxop::BagDataset;
use crate::sphere::OneBitCsProblem;
use crate::terms::DenseVector;

/// A 1-bit measurement instance and the signal that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct OneBitData {
    /// `m × n`, i.i.d. standard normal.
    pub phi: DMatrix<f64>,
    /// `sign(Φ x_true)` with zero mapped to `+1`.
    pub signs: DenseVector,
    /// `k`-sparse with standard-normal nonzeros, unit norm.
    pub x_true: DenseVector,
}

impl OneBitData {
    pub fn problem(&self, lambda: f64) -> Result<OneBitCsProblem> {
        OneBitCsProblem::new(self.phi.clone(), self.signs.clone(), lambda)
    }
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

pub fn generate_onebit(n: usize, m: usize, k: usize, seed: u64) -> Result<OneBitData> {
    if n == 0 || m == 0 || k == 0 || k > n {
        return Err(NeAdmmError::InvalidArgument(format!(
            "need 1 <= k <= n and m >= 1, got n={n} m={m} k={k}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut support = sample(&mut rng, n, k).into_vec();
    support.sort_unstable();
    let mut x_true = DenseVector::zeros(n);
    for &j in &support {
        // a zero draw has probability zero, but keep the support size exact
        let mut v = 0.0;
        while v == 0.0 {
            v = normal(&mut rng);
        }
        x_true[j] = v;
    }
    x_true /= x_true.norm();
    let mut phi = DMatrix::zeros(m, n);
    for i in 0..m {
        for j in 0..n {
            phi[(i, j)] = normal(&mut rng);
        }
    }
    let signs = (&phi * &x_true).map(|v| if v < 0.0 { -1.0 } else { 1.0 });
    Ok(OneBitData { phi, signs, x_true })
}

/// Bags of i.i.d. standard-normal instances labeled by the max rule on
/// `t* = Xβ*`: label 1 iff some instance has `t* > 0`. Returns the dataset
/// and `β*`.
pub fn generate_bags(bags: usize, instances: usize, features: usize, seed: u64) -> Result<(BagDataset, DenseVector)> {
    if bags == 0 || instances == 0 || features == 0 {
        return Err(NeAdmmError::InvalidArgument(format!(
            "sizes must be positive, got bags={bags} instances={instances} features={features}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let beta = DenseVector::from_iterator(features, (0..features).map(|_| normal(&mut rng)));
    let rows = bags * instances;
    let mut x = DMatrix::zeros(rows, features);
    for i in 0..rows {
        for j in 0..features {
            x[(i, j)] = normal(&mut rng);
        }
    }
    let t = &x * &beta;
    let labels = DenseVector::from_iterator(
        bags,
        (0..bags).map(|b| {
            let max = t.rows(b * instances, instances).max();
            if max > 0.0 {
                1.0
            } else {
                0.0
            }
        }),
    );
    let data = BagDataset::new(labels, &vec![instances; bags], x)?;
    Ok((data, beta))
}

/// Fraction of bags with label 1.
pub fn label_balance(data: &BagDataset) -> f64 {
    data.labels.iter().filter(|&&y| y == 1.0).count() as f64 / data.n_bags() as f64
}
