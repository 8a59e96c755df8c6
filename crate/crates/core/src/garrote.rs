//! Nonnegative garrote: OLS-initialized and ridge-initialized variants.
//!
//! Both shrink an initial estimate `b0` coordinate-wise by factors `u >= 0`
//! solving `min_u ||y - Z u||^2 + 2 lambda sum_j w_j u_j` with
//! `Z = X diag(b0)`. The quadratic program is solved by cyclic coordinate
//! minimization with clamping at zero,
//! `u_j <- max(0, (z_j'r_{-j} - lambda w_j) / z_j'z_j)`, carried out on the
//! Gram form `Z'Z`, `Z'y`.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::classic::{default_ridge_grid, estimate_sigma2, ols_coefficients, ridge_coefficients, select_ridge_lambda};
use crate::error::{Error, Result};
use crate::linalg::{cholesky, cholesky_solve};
use crate::model::{FitResult, FitWarning, Method, StandardizedDesign, Tuning};

/// Floor applied to lambda when the residual variance is exactly zero.
pub const LAMBDA_FLOOR: f64 = 1e-12;

/// Default sweep cap for [`solve_nn_qp`].
pub const MAX_SWEEPS: usize = 10_000;

/// Criterion-based rule for the garrote lambda.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Criterion {
    /// `lambda = sigma2` (Mallows' Cp and AIC coincide).
    CpAic,
    /// `lambda = sigma2 log(n) / 2`.
    Bic,
}

impl Criterion {
    pub fn lambda(self, sigma2: f64, n: usize) -> f64 {
        match self {
            Criterion::CpAic => sigma2,
            Criterion::Bic => sigma2 * ((n as f64).ln() / 2.0),
        }
    }
}

/// `min_{u >= 0} ||y - Z u||^2 + 2 lambda sum_j w_j u_j`.
#[derive(Debug, Clone)]
pub struct GarroteProblem {
    pub z: DMatrix<f64>,
    pub y: DVector<f64>,
    pub weights: DVector<f64>,
    pub lambda: f64,
}

impl GarroteProblem {
    /// Builds `Z = X diag(init)`.
    pub fn new(x: &DMatrix<f64>, y: &DVector<f64>, init: &DVector<f64>, weights: DVector<f64>, lambda: f64) -> Result<Self> {
        if init.len() != x.ncols() || weights.len() != x.ncols() || y.len() != x.nrows() {
            return Err(Error::Shape("garrote inputs disagree in size".into()));
        }
        let mut z = x.clone();
        for (j, mut col) in z.column_iter_mut().enumerate() {
            col *= init[j];
        }
        let prob = GarroteProblem { z, y: y.clone(), weights, lambda };
        prob.validate()?;
        Ok(prob)
    }

    fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0) || !self.lambda.is_finite() {
            return Err(Error::InvalidParameter(format!("garrote lambda must be > 0, got {}", self.lambda)));
        }
        if self.weights.iter().any(|w| !(*w >= 0.0)) {
            return Err(Error::InvalidParameter("garrote weights must be >= 0".into()));
        }
        Ok(())
    }

    pub fn objective(&self, u: &DVector<f64>) -> f64 {
        (&self.y - &self.z * u).norm_squared() + 2.0 * self.lambda * self.weights.dot(u)
    }

    /// Gradient of the objective in `u`.
    pub fn gradient(&self, u: &DVector<f64>) -> DVector<f64> {
        let r = &self.y - &self.z * u;
        self.z.tr_mul(&r) * -2.0 + &self.weights * (2.0 * self.lambda)
    }

    /// Largest KKT violation: `max(0, -g_j)` where `u_j = 0`, `|g_j|` elsewhere.
    pub fn kkt_residual(&self, u: &DVector<f64>) -> f64 {
        let g = self.gradient(u);
        let mut worst = 0.0f64;
        for j in 0..u.len() {
            let zero_col = self.z.column(j).iter().all(|v| *v == 0.0);
            let v = if u[j] == 0.0 || zero_col { (-g[j]).max(0.0) } else { g[j].abs() };
            worst = worst.max(v);
        }
        worst
    }

    /// KKT tolerance `1e-6 n`.
    pub fn tolerance(&self) -> f64 {
        1e-6 * self.z.nrows() as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GarroteSolution {
    pub u: DVector<f64>,
    pub kkt_residual: f64,
    pub sweeps: usize,
}

impl GarroteSolution {
    /// `beta_j = u_j init_j`, with exact zeros where `u_j = 0`.
    pub fn beta(&self, init: &DVector<f64>) -> DVector<f64> {
        self.u.zip_map(init, |u, b| if u == 0.0 { 0.0 } else { u * b })
    }
}

pub fn solve_nn_qp(prob: &GarroteProblem) -> Result<GarroteSolution> {
    solve_nn_qp_capped(prob, MAX_SWEEPS)
}

pub fn solve_nn_qp_capped(prob: &GarroteProblem, max_sweeps: usize) -> Result<GarroteSolution> {
    prob.validate()?;
    let p = prob.z.ncols();
    let gram = prob.z.tr_mul(&prob.z);
    let zty = prob.z.tr_mul(&prob.y);
    let live: Vec<usize> = (0..p).filter(|&j| gram[(j, j)] > 0.0).collect();
    let mut u = DVector::<f64>::zeros(p);
    // h = Z'(y - Z u)
    let mut h = zty.clone();
    let tol = prob.tolerance();
    let mut sweeps = 0;
    while sweeps < max_sweeps {
        sweeps += 1;
        let mut max_change = 0.0f64;
        for &j in &live {
            let d = gram[(j, j)];
            let old = u[j];
            let partial = h[j] + d * old;
            let new = ((partial - prob.lambda * prob.weights[j]) / d).max(0.0);
            let delta = new - old;
            if delta != 0.0 {
                u[j] = new;
                h.axpy(-delta, &gram.column(j), 1.0);
                max_change = max_change.max(delta.abs());
            }
        }
        if max_change < 1e-10 {
            let kkt = prob.kkt_residual(&u);
            if kkt < tol {
                return Ok(GarroteSolution { u, kkt_residual: kkt, sweeps });
            }
        }
    }
    Err(Error::IterationLimit { cap: max_sweeps, residual: prob.kkt_residual(&u) })
}

fn garrote_fit(
    s: &StandardizedDesign,
    method: Method,
    init: &DVector<f64>,
    weights: DVector<f64>,
    criterion: Criterion,
    mut tuning: Tuning,
) -> Result<FitResult> {
    let sigma = estimate_sigma2(s)?;
    let mut lambda = criterion.lambda(sigma.sigma2_hat, s.n());
    let floored = !(lambda > LAMBDA_FLOOR);
    if floored {
        lambda = LAMBDA_FLOOR;
    }
    let prob = GarroteProblem::new(s.x(), s.y(), init, weights, lambda)?;
    let sol = solve_nn_qp(&prob)?;
    tuning.lambda = Some(lambda);
    let mut fit = FitResult::new(method, &sol.beta(init), s, tuning)?.with_iterations(sol.sweeps, true);
    if floored {
        fit.warnings.push(FitWarning::LambdaFloored);
    }
    Ok(fit)
}

/// Garrote on the OLS estimate with `lambda` from `criterion`.
pub fn fit_garrote(s: &StandardizedDesign, criterion: Criterion) -> Result<FitResult> {
    let init = ols_coefficients(s)?;
    let method = match criterion {
        Criterion::CpAic => Method::NgAic,
        Criterion::Bic => Method::NgBic,
    };
    garrote_fit(s, method, &init, DVector::from_element(s.p(), 1.0), criterion, Tuning::default())
}

/// Diagonal of `(X'X + lambda_r I)^{-1} X'X`.
pub fn ridge_garrote_weights(s: &StandardizedDesign, lambda_r: f64) -> Result<DVector<f64>> {
    let p = s.p();
    if lambda_r == 0.0 {
        return Ok(DVector::from_element(p, 1.0));
    }
    let g = s.gram().xtx.clone() * s.n() as f64;
    let mut a = g.clone();
    for j in 0..p {
        a[(j, j)] += lambda_r;
    }
    let l = cholesky(&a, 0.0)?;
    Ok(DVector::from_fn(p, |j, _| cholesky_solve(&l, &g.column(j).into_owned())[j]))
}

/// Ridge-initialized garrote at a given ridge level `lambda_r`.
pub fn fit_ridge_garrote_at(s: &StandardizedDesign, criterion: Criterion, lambda_r: f64) -> Result<FitResult> {
    let init = ridge_coefficients(s, lambda_r)?;
    let weights = ridge_garrote_weights(s, lambda_r)?;
    let tuning = Tuning { lambda_ridge: Some(lambda_r), ..Tuning::default() };
    let method = match criterion {
        Criterion::Bic => Method::NgRidgeBic,
        Criterion::CpAic => Method::NgAic,
    };
    garrote_fit(s, method, &init, weights, criterion, tuning)
}

/// Ridge-initialized garrote with `lambda_r` chosen by GCV.
pub fn fit_ridge_garrote(s: &StandardizedDesign, criterion: Criterion) -> Result<FitResult> {
    let sel = select_ridge_lambda(s, &default_ridge_grid(s.n(), s.p()))?;
    fit_ridge_garrote_at(s, criterion, sel.lambda_star)
}
