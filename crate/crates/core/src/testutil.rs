use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::model::{standardize, Dataset, StandardizedDesign};

/// Equicorrelated-ish gaussian design with a sparse linear signal.
pub fn random_dataset(n: usize, p: usize, rho: f64, beta: &[f64], sigma: f64, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = DMatrix::zeros(n, p);
    for i in 0..n {
        let common: f64 = StandardNormal.sample(&mut rng);
        for j in 0..p {
            let e: f64 = StandardNormal.sample(&mut rng);
            x[(i, j)] = rho.sqrt() * common + (1.0 - rho).sqrt() * e + 0.1 * j as f64;
        }
    }
    let mut y = DVector::zeros(n);
    for i in 0..n {
        let e: f64 = StandardNormal.sample(&mut rng);
        y[i] = 1.0 + (0..p).map(|j| x[(i, j)] * beta.get(j).copied().unwrap_or(0.0)).sum::<f64>() + sigma * e;
    }
    Dataset::new(x, y).unwrap()
}

pub fn random_design(n: usize, p: usize, rho: f64, beta: &[f64], sigma: f64, seed: u64) -> StandardizedDesign {
    standardize(&random_dataset(n, p, rho, beta, sigma, seed)).unwrap()
}

/// `n x p` design with orthogonal centered columns and `X'X = n I`
/// (columns of a Sylvester Hadamard matrix, skipping the constant one).
pub fn orthogonal_design(n: usize, p: usize, y: &[f64]) -> StandardizedDesign {
    assert!(n.is_power_of_two() && p < n);
    let h = |i: usize, j: usize| if (i & j).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
    let x = DMatrix::from_fn(n, p, |i, j| h(i, j + 1));
    let mean = y.iter().sum::<f64>() / n as f64;
    let y = DVector::from_iterator(n, y.iter().map(|v| v - mean));
    StandardizedDesign::from_standardized(x, y).unwrap()
}

pub fn random_vec(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| StandardNormal.sample(&mut rng)).collect()
}
