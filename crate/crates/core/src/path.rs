//! Pathwise cyclic coordinate descent for the lasso, elastic net, adaptive
//! lasso, SCAD and MCP.
//!
//! The solver runs in covariance form on [`GramStats`]: it keeps the
//! gradient `g = X'r/n` of the current residual, so a coordinate update costs
//! `O(1)` to evaluate and `O(p)` to apply. After each full sweep it iterates on
//! the nonzero coordinates until they settle, then verifies with another full
//! sweep. A lambda is converged once a full sweep moves no coefficient by more
//! than [`SolverConfig::tol`].

use nalgebra::DVector;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{FitResult, GramStats, Method, StandardizedDesign, Tuning};
use crate::penalty::{Family, PenaltySpec};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    /// Stop when a full sweep changes no coefficient by more than this.
    pub tol: f64,
    /// Sweep cap per lambda.
    pub max_sweeps: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig { tol: 1e-7, max_sweeps: 100_000 }
    }
}

/// Default number of lambdas on a path.
pub const DEFAULT_GRID_SIZE: usize = 100;

/// Replacement for a zero `lambda_max` (response orthogonal to every column).
pub const LAMBDA_MAX_FLOOR: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegularizationPath {
    pub family: Family,
    pub lambdas: Vec<f64>,
    pub coefs: Vec<DVector<f64>>,
    pub dfs: Vec<usize>,
    pub sweeps: Vec<usize>,
    pub converged: Vec<bool>,
}

impl RegularizationPath {
    pub fn len(&self) -> usize {
        self.lambdas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambdas.is_empty()
    }

    /// The solution at grid index `k` as a fit on `s`.
    pub fn fit_at(&self, k: usize, s: &StandardizedDesign, spec: &PenaltySpec) -> Result<FitResult> {
        let at = spec.at_lambda(self.lambdas[k]);
        let tuning = tuning_for(&at);
        Ok(FitResult::new(method_for(spec.family), &self.coefs[k], s, tuning)?
            .with_iterations(self.sweeps[k], self.converged[k]))
    }
}

pub(crate) fn method_for(family: Family) -> Method {
    match family {
        Family::Lasso => Method::Lasso,
        Family::Enet => Method::Enet,
        Family::AdaLasso => Method::AdaLasso,
        Family::Scad => Method::Scad,
        Family::Mcp => Method::Mcp,
    }
}

pub(crate) fn tuning_for(spec: &PenaltySpec) -> Tuning {
    Tuning {
        lambda: Some(spec.lambda1),
        lambda1: (spec.family == Family::Enet).then_some(spec.lambda1),
        lambda2: (spec.family == Family::Enet).then_some(spec.lambda2),
        gamma: spec.family.is_nonconvex().then_some(spec.gamma),
        lambda_ridge: None,
    }
}

/// Smallest lambda whose solution is identically zero:
/// `max_j |x_j'y| / (n w_j)` over coordinates with finite weight.
pub fn lambda_max(s: &StandardizedDesign, spec: &PenaltySpec) -> f64 {
    lambda_max_stats(s.gram(), spec)
}

pub(crate) fn lambda_max_stats(stats: &GramStats, spec: &PenaltySpec) -> f64 {
    stats
        .xty
        .iter()
        .enumerate()
        .map(|(j, c)| {
            let w = spec.weight(j);
            if w.is_finite() {
                c.abs() / w
            } else {
                0.0
            }
        })
        .fold(0.0, f64::max)
}

/// `grid_size` log-spaced values from `lmax` down to `ratio * lmax`.
pub fn log_grid(lmax: f64, ratio: f64, grid_size: usize) -> Vec<f64> {
    let lmax = if lmax > 0.0 { lmax } else { LAMBDA_MAX_FLOOR };
    if grid_size == 1 {
        return vec![lmax];
    }
    let step = ratio.ln() / (grid_size - 1) as f64;
    (0..grid_size).map(|k| lmax * (step * k as f64).exp()).collect()
}

/// Default path grid for `s` and `spec`; the ratio is `1e-3` when `n > p`
/// and `1e-2` otherwise.
pub fn default_grid(s: &StandardizedDesign, spec: &PenaltySpec, grid_size: usize) -> Vec<f64> {
    let ratio = if s.n() > s.p() { 1e-3 } else { 1e-2 };
    log_grid(lambda_max(s, spec), ratio, grid_size)
}

/// Fits the path on the default grid.
pub fn fit_path(s: &StandardizedDesign, spec: &PenaltySpec, grid_size: usize) -> Result<RegularizationPath> {
    if grid_size < 2 {
        return Err(Error::InvalidParameter("grid_size must be at least 2".into()));
    }
    let grid = default_grid(s, spec, grid_size);
    fit_path_on_grid(s, spec, &grid)
}

/// Fits the path on a caller-supplied descending grid.
pub fn fit_path_on_grid(s: &StandardizedDesign, spec: &PenaltySpec, lambdas: &[f64]) -> Result<RegularizationPath> {
    path_on_stats(s.gram(), spec, lambdas, &SolverConfig::default())
}

pub(crate) fn path_on_stats(
    stats: &GramStats,
    spec: &PenaltySpec,
    lambdas: &[f64],
    cfg: &SolverConfig,
) -> Result<RegularizationPath> {
    spec.validate()?;
    if let Some(w) = &spec.weights {
        if w.len() != stats.p() {
            return Err(Error::Shape(format!("{} weights for p = {}", w.len(), stats.p())));
        }
    }
    if lambdas.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::InvalidParameter("path grid must be strictly descending".into()));
    }
    let mut solver = CoordinateDescent::new(stats, spec);
    let mut path = RegularizationPath {
        family: spec.family,
        lambdas: lambdas.to_vec(),
        coefs: Vec::with_capacity(lambdas.len()),
        dfs: Vec::with_capacity(lambdas.len()),
        sweeps: Vec::with_capacity(lambdas.len()),
        converged: Vec::with_capacity(lambdas.len()),
    };
    for &lam in lambdas {
        let (sweeps, ok) = solver.solve(&spec.at_lambda(lam), cfg);
        path.dfs.push(solver.beta.iter().filter(|b| **b != 0.0).count());
        path.coefs.push(solver.beta.clone());
        path.sweeps.push(sweeps);
        path.converged.push(ok);
    }
    Ok(path)
}

/// Solves a single penalty level, warm-starting along a short path from
/// `lambda_max` so nonconvex families follow the same continuation as
/// [`fit_path`].
pub fn fit_single(s: &StandardizedDesign, spec: &PenaltySpec) -> Result<FitResult> {
    spec.validate()?;
    let lmax = lambda_max(s, spec);
    let target = spec.lambda1;
    let mut grid: Vec<f64> = if target < lmax {
        let mut g = log_grid(lmax, target / lmax, 20);
        g.pop();
        g
    } else {
        Vec::new()
    };
    grid.push(target);
    let path = fit_path_on_grid(s, spec, &grid)?;
    let last = path.len() - 1;
    let fit = path.fit_at(last, s, spec)?;
    if !fit.converged {
        return Err(Error::IterationLimit { cap: SolverConfig::default().max_sweeps, residual: f64::NAN });
    }
    Ok(fit)
}

/// Penalized objective on the per-observation scale.
pub fn objective(stats: &GramStats, spec: &PenaltySpec, beta: &DVector<f64>) -> f64 {
    stats.half_mse(beta) + spec.total(beta.as_slice())
}

struct CoordinateDescent<'a> {
    stats: &'a GramStats,
    beta: DVector<f64>,
    grad: DVector<f64>,
    free: Vec<usize>,
}

impl<'a> CoordinateDescent<'a> {
    fn new(stats: &'a GramStats, spec: &PenaltySpec) -> Self {
        let p = stats.p();
        let free = (0..p).filter(|&j| spec.weight(j).is_finite()).collect();
        CoordinateDescent { stats, beta: DVector::zeros(p), grad: stats.xty.clone(), free }
    }

    fn update(&mut self, j: usize, spec: &PenaltySpec) -> f64 {
        let q = &self.stats.xtx;
        let d = q[(j, j)];
        let old = self.beta[j];
        let z = self.grad[j] + d * old;
        let new = spec.coord(j).minimize(z, d);
        let delta = new - old;
        if delta != 0.0 {
            self.beta[j] = new;
            self.grad.axpy(-delta, &q.column(j), 1.0);
        }
        delta.abs()
    }

    fn sweep(&mut self, coords: &[usize], spec: &PenaltySpec) -> f64 {
        let mut max_change = 0.0f64;
        for &j in coords {
            max_change = max_change.max(self.update(j, spec));
        }
        max_change
    }

    fn solve(&mut self, spec: &PenaltySpec, cfg: &SolverConfig) -> (usize, bool) {
        let free = std::mem::take(&mut self.free);
        let mut sweeps = 0;
        let mut converged = false;
        #[cfg(debug_assertions)]
        let mut last_obj = self.objective(spec);
        'outer: while sweeps < cfg.max_sweeps {
            let change = self.sweep(&free, spec);
            sweeps += 1;
            #[cfg(debug_assertions)]
            self.check_descent(spec, &mut last_obj);
            if change < cfg.tol {
                converged = true;
                break;
            }
            let active: Vec<usize> = free.iter().copied().filter(|&j| self.beta[j] != 0.0).collect();
            loop {
                if sweeps >= cfg.max_sweeps {
                    break 'outer;
                }
                let change = self.sweep(&active, spec);
                sweeps += 1;
                #[cfg(debug_assertions)]
                self.check_descent(spec, &mut last_obj);
                if change < cfg.tol {
                    break;
                }
            }
        }
        self.free = free;
        (sweeps, converged)
    }

    /// Objective in O(p): with `g = X'y/n - Q beta`, `beta'Q beta = (X'y/n - g)'beta`.
    #[cfg(debug_assertions)]
    fn objective(&self, spec: &PenaltySpec) -> f64 {
        let c = &self.stats.xty;
        0.5 * (self.stats.yty - c.dot(&self.beta) - self.grad.dot(&self.beta)) + spec.total(self.beta.as_slice())
    }

    #[cfg(debug_assertions)]
    fn check_descent(&self, spec: &PenaltySpec, last: &mut f64) {
        let now = self.objective(spec);
        debug_assert!(
            now <= *last + 1e-10 * (1.0 + last.abs()),
            "objective rose from {last} to {now}"
        );
        *last = now;
    }
}
