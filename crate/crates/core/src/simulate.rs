//! Synthetic data from the Gaussian linear model with AR(1)-correlated
//! predictors, and the built-in scenario families.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Dataset;

/// Identity of the random stream, recorded in benchmark metadata.
pub const GENERATOR: &str = "ChaCha20Rng (rand_chacha 0.9), seed_from_u64(base_seed), stream = replication index; normals via rand_distr 0.5 StandardNormal (ziggurat)";

/// Default replication count.
pub const DEFAULT_REPLICATIONS: usize = 1000;

/// Noise floor used when a scenario asks for `sigma = 0`.
pub const SIGMA_FLOOR: f64 = 1e-12;

/// One generative configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub n: usize,
    pub p: usize,
    pub beta0: f64,
    pub beta: Vec<f64>,
    pub rho: f64,
    pub sigma: f64,
    pub replications: usize,
    pub base_seed: u64,
}

impl ScenarioSpec {
    pub fn validate(&self) -> Result<()> {
        if self.beta.len() != self.p {
            return Err(Error::Shape(format!("beta has {} entries, p = {}", self.beta.len(), self.p)));
        }
        if self.n < 2 || self.p < 1 {
            return Err(Error::InvalidParameter(format!("need n >= 2 and p >= 1, got n = {}, p = {}", self.n, self.p)));
        }
        if !(self.rho.abs() < 1.0) {
            return Err(Error::InvalidParameter(format!("|rho| must be < 1, got {}", self.rho)));
        }
        if !(self.sigma >= 0.0) || !self.sigma.is_finite() {
            return Err(Error::InvalidParameter(format!("sigma must be >= 0, got {}", self.sigma)));
        }
        if self.replications < 1 {
            return Err(Error::InvalidParameter("replications must be >= 1".into()));
        }
        Ok(())
    }

    /// Indices of nonzero true coefficients.
    pub fn true_support(&self) -> Vec<usize> {
        self.beta.iter().enumerate().filter(|(_, b)| **b != 0.0).map(|(j, _)| j).collect()
    }
}

/// Key of an independent random stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReplicationSeed {
    pub base_seed: u64,
    pub replication_index: u64,
}

impl ReplicationSeed {
    pub fn new(base_seed: u64, replication_index: usize) -> Self {
        ReplicationSeed { base_seed, replication_index: replication_index as u64 }
    }

    pub fn rng(&self) -> ChaCha20Rng {
        let mut rng = ChaCha20Rng::seed_from_u64(self.base_seed);
        rng.set_stream(self.replication_index);
        rng
    }

    /// A seed for auxiliary randomness (fold assignment) of this replication.
    pub fn derived(&self, salt: u64) -> u64 {
        // splitmix64 finalizer over the packed key
        let mut z = self
            .base_seed
            .wrapping_add(self.replication_index.wrapping_mul(0x9E37_79B9_7F4A_7C15))
            .wrapping_add(salt.wrapping_mul(0xD1B5_4A32_D192_ED03));
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
}

fn ar1_rows<R: rand::Rng>(rng: &mut R, n: usize, p: usize, rho: f64) -> DMatrix<f64> {
    let innov = (1.0 - rho * rho).sqrt();
    let mut x = DMatrix::zeros(n, p);
    for i in 0..n {
        let mut prev: f64 = StandardNormal.sample(rng);
        x[(i, 0)] = prev;
        for j in 1..p {
            let z: f64 = StandardNormal.sample(rng);
            prev = rho * prev + innov * z;
            x[(i, j)] = prev;
        }
    }
    x
}

/// Rows i.i.d. `N(0, Sigma)` with `Sigma_ij = rho^|i-j|`, by the recursion
/// `x_1 = z_1`, `x_j = rho x_{j-1} + sqrt(1 - rho^2) z_j`.
pub fn gen_ar1_predictors(n: usize, p: usize, rho: f64, seed: ReplicationSeed) -> Result<DMatrix<f64>> {
    if !(rho.abs() < 1.0) {
        return Err(Error::InvalidParameter(format!("|rho| must be < 1, got {rho}")));
    }
    Ok(ar1_rows(&mut seed.rng(), n, p, rho))
}

/// `y = beta0 + X beta + eps`, `eps ~ N(0, sigma^2)`; a pure function of
/// `(spec, r)`. Predictors are drawn first, then the noise, from one stream.
pub fn gen_dataset(spec: &ScenarioSpec, r: usize) -> Result<Dataset> {
    spec.validate()?;
    let mut rng = ReplicationSeed::new(spec.base_seed, r).rng();
    let x = ar1_rows(&mut rng, spec.n, spec.p, spec.rho);
    let sigma = spec.sigma.max(SIGMA_FLOOR);
    let beta = DVector::from_column_slice(&spec.beta);
    let mut y = x.clone() * beta;
    for v in y.iter_mut() {
        let e: f64 = StandardNormal.sample(&mut rng);
        *v += spec.beta0 + sigma * e;
    }
    Dataset::new(x, y)
}

/// A sweep of scenarios along one parameter.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioFamily {
    pub name: String,
    pub description: String,
    /// `rho`, `z` or `p`.
    pub sweep_name: String,
    pub points: Vec<(f64, ScenarioSpec)>,
}

impl ScenarioFamily {
    pub fn with_replications(mut self, replications: usize) -> Self {
        for (_, s) in &mut self.points {
            s.replications = replications;
        }
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        for (_, s) in &mut self.points {
            s.base_seed = seed;
        }
        self
    }

    /// Keeps only sweep values accepted by `keep`.
    pub fn filter_sweep(mut self, keep: impl Fn(f64) -> bool) -> Self {
        self.points.retain(|(v, _)| keep(*v));
        self
    }
}

pub const RHO_GRID: [f64; 12] = [0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.95, 0.99];
pub const P_GRID: [usize; 5] = [100, 150, 200, 250, 300];

/// Coefficients of the correlation sweep.
pub const CASE_BETA: [f64; 8] = [3.0, 1.5, 0.0, 0.0, 2.0, 0.0, 0.0, 0.0];
pub const CASE_BETA0: f64 = 4.0;

pub fn z_grid() -> Vec<f64> {
    (0..=15).map(|k| k as f64 / 10.0).collect()
}

fn correlation_sweep(name: &str, n: usize, sigma: f64) -> ScenarioFamily {
    let points = RHO_GRID
        .iter()
        .map(|&rho| {
            let spec = ScenarioSpec {
                n,
                p: 8,
                beta0: CASE_BETA0,
                beta: CASE_BETA.to_vec(),
                rho,
                sigma,
                replications: DEFAULT_REPLICATIONS,
                base_seed: 0,
            };
            (rho, spec)
        })
        .collect();
    ScenarioFamily {
        name: name.into(),
        description: format!("correlation sweep, n = {n}, p = 8, sigma = {sigma}"),
        sweep_name: "rho".into(),
        points,
    }
}

/// `beta = (3, 1.5, z, z, 2, z, z, z)`, `beta0 = 4`.
pub fn nearly_sparse_beta(z: f64) -> Vec<f64> {
    vec![3.0, 1.5, z, z, 2.0, z, z, z]
}

pub fn nearly_sparse() -> ScenarioFamily {
    let points = z_grid()
        .into_iter()
        .map(|z| {
            let spec = ScenarioSpec {
                n: 40,
                p: 8,
                beta0: CASE_BETA0,
                beta: nearly_sparse_beta(z),
                rho: 0.5,
                sigma: 1.0,
                replications: DEFAULT_REPLICATIONS,
                base_seed: 0,
            };
            (z, spec)
        })
        .collect();
    ScenarioFamily {
        name: "nearsparse".into(),
        description: "nearly sparse sweep, n = 40, p = 8, sigma = 1, rho = 0.5".into(),
        sweep_name: "z".into(),
        points,
    }
}

/// Ten leading ones followed by zeros.
pub fn dimension_beta(p: usize) -> Vec<f64> {
    (0..p).map(|j| if j < 10 { 1.0 } else { 0.0 }).collect()
}

fn dimension_spec(p: usize) -> ScenarioSpec {
    ScenarioSpec {
        n: 1000,
        p,
        beta0: 0.0,
        beta: dimension_beta(p),
        rho: 0.5,
        sigma: 1.0,
        replications: DEFAULT_REPLICATIONS,
        base_seed: 0,
    }
}

pub fn dimension_sweep() -> ScenarioFamily {
    ScenarioFamily {
        name: "dimsweep".into(),
        description: "dimension sweep, n = 1000, sigma = 1, rho = 0.5, 10 nonzero coefficients".into(),
        sweep_name: "p".into(),
        points: P_GRID.iter().map(|&p| (p as f64, dimension_spec(p))).collect(),
    }
}

pub fn timing() -> ScenarioFamily {
    ScenarioFamily {
        name: "timing".into(),
        description: "timing study, n = 1000, p = 100, sigma = 1, rho = 0.5".into(),
        sweep_name: "p".into(),
        points: vec![(100.0, dimension_spec(100))],
    }
}

/// Built-in families: `case1`, `case2`, `case3`, `nearsparse`, `dimsweep`, `timing`.
pub fn builtin_scenarios() -> Vec<ScenarioFamily> {
    vec![
        correlation_sweep("case1", 40, 1.0),
        correlation_sweep("case2", 40, 3.0),
        correlation_sweep("case3", 100, 1.0),
        nearly_sparse(),
        dimension_sweep(),
        timing(),
    ]
}

pub fn builtin(name: &str) -> Option<ScenarioFamily> {
    builtin_scenarios().into_iter().find(|f| f.name == name)
}
