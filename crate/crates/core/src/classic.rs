//! Closed-form estimators: OLS, ridge with GCV selection, and the OLS
//! residual variance.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{cholesky, cholesky_solve};
use crate::model::{FitResult, Method, StandardizedDesign, Tuning};

/// Unscaled Gram matrix `X'X`.
fn gram_unscaled(s: &StandardizedDesign) -> DMatrix<f64> {
    s.gram().xtx.clone() * s.n() as f64
}

fn xty_unscaled(s: &StandardizedDesign) -> DVector<f64> {
    s.gram().xty.clone() * s.n() as f64
}

/// OLS coefficients on the standardized scale.
pub fn ols_coefficients(s: &StandardizedDesign) -> Result<DVector<f64>> {
    let l = cholesky(&gram_unscaled(s), 1e-10 * s.n() as f64)?;
    Ok(cholesky_solve(&l, &xty_unscaled(s)))
}

/// Solution of `(X'X + lambda I) b = X'y`.
pub fn ridge_coefficients(s: &StandardizedDesign, lambda: f64) -> Result<DVector<f64>> {
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(Error::InvalidParameter(format!("ridge lambda must be >= 0, got {lambda}")));
    }
    if lambda == 0.0 {
        return ols_coefficients(s);
    }
    let mut a = gram_unscaled(s);
    for j in 0..a.nrows() {
        a[(j, j)] += lambda;
    }
    let l = cholesky(&a, 0.0)?;
    Ok(cholesky_solve(&l, &xty_unscaled(s)))
}

pub fn fit_ols(s: &StandardizedDesign) -> Result<FitResult> {
    if s.n() <= s.p() {
        return Err(Error::InsufficientDof { n: s.n(), p: s.p() });
    }
    let beta = ols_coefficients(s)?;
    FitResult::new(Method::Ols, &beta, s, Tuning::default())
}

/// Ridge at a fixed `lambda`, the additive constant in `(X'X + lambda I)`.
pub fn fit_ridge(s: &StandardizedDesign, lambda: f64) -> Result<FitResult> {
    let beta = ridge_coefficients(s, lambda)?;
    let tuning = Tuning { lambda: Some(lambda), ..Tuning::default() };
    FitResult::new(Method::Ridge, &beta, s, tuning)
}

/// GCV evaluator built from one thin SVD of `X`.
///
/// With `X = U D V'` and `c = U'y`,
/// `||(I - A)y||^2 = (||y||^2 - ||c||^2) + sum_j (lambda/(d_j^2 + lambda))^2 c_j^2`
/// and `trace(I - A) = n - sum_j d_j^2/(d_j^2 + lambda)`.
#[derive(Debug, Clone)]
pub struct GcvEvaluator {
    n: usize,
    p: usize,
    d2: Vec<f64>,
    c2: Vec<f64>,
    outside: f64,
}

impl GcvEvaluator {
    pub fn new(s: &StandardizedDesign) -> Self {
        let svd = s.x().clone().svd(true, false);
        let u = svd.u.expect("left singular vectors requested");
        let c = u.tr_mul(s.y());
        let dmax = svd.singular_values.max();
        let d2: Vec<f64> = svd
            .singular_values
            .iter()
            .map(|d| if *d > 1e-12 * dmax { d * d } else { 0.0 })
            .collect();
        let c2: Vec<f64> = c.iter().map(|v| v * v).collect();
        let outside = (s.y().norm_squared() - c2.iter().sum::<f64>()).max(0.0);
        GcvEvaluator { n: s.n(), p: s.p(), d2, c2, outside }
    }

    pub fn score(&self, lambda: f64) -> Result<f64> {
        if !(lambda >= 0.0) {
            return Err(Error::InvalidParameter(format!("ridge lambda must be >= 0, got {lambda}")));
        }
        if lambda == 0.0 && self.n <= self.p {
            return Err(Error::DegenerateTrace);
        }
        let mut resid = self.outside;
        let mut fitted_df = 0.0;
        for (d2, c2) in self.d2.iter().zip(&self.c2) {
            if *d2 == 0.0 {
                resid += c2;
                continue;
            }
            let shrink = lambda / (d2 + lambda);
            resid += shrink * shrink * c2;
            fitted_df += d2 / (d2 + lambda);
        }
        let trace = self.n as f64 - fitted_df;
        if !(trace > 0.0) {
            return Err(Error::DegenerateTrace);
        }
        Ok(resid / (trace * trace))
    }
}

pub fn gcv_score(s: &StandardizedDesign, lambda: f64) -> Result<f64> {
    GcvEvaluator::new(s).score(lambda)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RidgeSelection {
    pub lambda_grid: Vec<f64>,
    pub gcv_values: Vec<f64>,
    pub lambda_star: f64,
}

/// 100 log-spaced values from `1e-4 n` to `1e3 n`, preceded by 0 when `n > p`.
pub fn default_ridge_grid(n: usize, p: usize) -> Vec<f64> {
    let nf = n as f64;
    let (lo, hi) = ((1e-4 * nf).ln(), (1e3 * nf).ln());
    let mut grid = Vec::with_capacity(101);
    if n > p {
        grid.push(0.0);
    }
    grid.extend((0..100).map(|k| (lo + (hi - lo) * k as f64 / 99.0).exp()));
    grid
}

/// Minimizes GCV over `grid`; ties go to the smaller lambda.
pub fn select_ridge_lambda(s: &StandardizedDesign, grid: &[f64]) -> Result<RidgeSelection> {
    if grid.is_empty() {
        return Err(Error::InvalidParameter("ridge lambda grid is empty".into()));
    }
    if grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidParameter("ridge lambda grid must be ascending".into()));
    }
    let eval = GcvEvaluator::new(s);
    let gcv_values = grid.iter().map(|&l| eval.score(l)).collect::<Result<Vec<_>>>()?;
    let mut best = 0;
    for (k, v) in gcv_values.iter().enumerate() {
        if *v < gcv_values[best] {
            best = k;
        }
    }
    Ok(RidgeSelection { lambda_grid: grid.to_vec(), gcv_values, lambda_star: grid[best] })
}

/// Ridge with lambda chosen by GCV over [`default_ridge_grid`].
pub fn fit_ridge_gcv(s: &StandardizedDesign) -> Result<(FitResult, RidgeSelection)> {
    let sel = select_ridge_lambda(s, &default_ridge_grid(s.n(), s.p()))?;
    let fit = fit_ridge(s, sel.lambda_star)?;
    Ok((fit, sel))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SigmaEstimate {
    pub sigma2_hat: f64,
    pub dof: usize,
}

/// Residual variance of the OLS fit, `RSS / dof`.
///
/// `dof = n - p`, less one more when standardization estimated an intercept.
pub fn estimate_sigma2(s: &StandardizedDesign) -> Result<SigmaEstimate> {
    let used = s.p() + usize::from(s.intercept_fitted());
    if s.n() <= used {
        return Err(Error::InsufficientDof { n: s.n(), p: s.p() });
    }
    let dof = s.n() - used;
    let beta = ols_coefficients(s)?;
    Ok(SigmaEstimate { sigma2_hat: s.rss(&beta) / dof as f64, dof })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::{orthogonal_design, random_design, random_vec};

    #[test]
    fn ols_on_orthogonal_design() {
        let y = random_vec(16, 1);
        let s = orthogonal_design(16, 4, &y);
        let b = ols_coefficients(&s).unwrap();
        let expect = s.x().tr_mul(s.y()) / 16.0;
        assert!((b - expect).amax() < 1e-12);
    }

    #[test]
    fn ols_recovers_noiseless_signal() {
        let s0 = random_design(30, 3, 0.3, &[0.0; 3], 1.0, 2);
        let truth = DVector::from_vec(vec![1.5, -2.0, 0.25]);
        let y = s0.x() * &truth;
        let s = StandardizedDesign::from_standardized(s0.x().clone(), y).unwrap();
        assert!((ols_coefficients(&s).unwrap() - truth).amax() < 1e-10);
    }

    #[test]
    fn ols_normal_equations_hold() {
        let s = random_design(20, 3, 0.4, &[1.0, 0.0, -1.0], 1.0, 3);
        let b = ols_coefficients(&s).unwrap();
        let grad = s.x().tr_mul(&(s.y() - s.x() * &b));
        assert!(grad.amax() <= 1e-8);
        let fit = fit_ols(&s).unwrap();
        assert_eq!(fit.method, Method::Ols);
    }

    #[test]
    fn ols_singular_on_duplicate_columns() {
        let s0 = random_design(20, 2, 0.0, &[1.0, 1.0], 1.0, 4);
        let mut x = DMatrix::zeros(20, 3);
        x.columns_mut(0, 2).copy_from(s0.x());
        x.column_mut(2).copy_from(&s0.x().column(0));
        let s = StandardizedDesign::from_standardized(x, s0.y().clone()).unwrap();
        assert!(matches!(fit_ols(&s), Err(Error::SingularGram { .. })));
        assert!(matches!(fit_ridge(&s, 0.0), Err(Error::SingularGram { .. })));
        assert!(fit_ridge(&s, 1.0).is_ok());
    }

    #[test]
    fn ridge_zero_equals_ols() {
        let s = random_design(25, 4, 0.6, &[1.0, 0.5, 0.0, 2.0], 1.0, 5);
        let a = ridge_coefficients(&s, 0.0).unwrap();
        let b = ols_coefficients(&s).unwrap();
        assert!((a - b).amax() < 1e-10);
    }

    #[test]
    fn ridge_diagonal_case() {
        let y = random_vec(8, 6);
        let s = orthogonal_design(8, 3, &y);
        let lambda = 3.0;
        let b = ridge_coefficients(&s, lambda).unwrap();
        let xty = s.x().tr_mul(s.y());
        for j in 0..3 {
            assert!((b[j] - xty[j] / (8.0 + lambda)).abs() < 1e-12);
        }
    }

    #[test]
    fn ridge_huge_lambda_vanishes() {
        let s = random_design(25, 4, 0.6, &[1.0, 0.5, 0.0, 2.0], 1.0, 7);
        assert!(ridge_coefficients(&s, 1e12).unwrap().norm() <= 1e-6);
    }

    #[test]
    fn ridge_norm_monotone_and_continuous() {
        let s = random_design(30, 5, 0.7, &[1.0, 0.5, 0.0, 2.0, 0.0], 1.0, 8);
        let grid = default_ridge_grid(30, 5);
        let norms: Vec<f64> = grid.iter().map(|l| ridge_coefficients(&s, *l).unwrap().norm()).collect();
        assert!(norms.windows(2).all(|w| w[1] <= w[0] + 1e-12));
        for &l in &[0.1, 1.0, 10.0] {
            let a = ridge_coefficients(&s, l).unwrap();
            let b = ridge_coefficients(&s, l + 1e-6).unwrap();
            assert!((a - b).amax() < 1e-4);
        }
        assert!(ridge_coefficients(&s, -1.0).is_err());
    }

    fn dense_gcv(s: &StandardizedDesign, lambda: f64) -> f64 {
        let n = s.n();
        let x = s.x();
        let mut a = x.transpose() * x;
        for j in 0..s.p() {
            a[(j, j)] += lambda;
        }
        let hat = x * a.try_inverse().unwrap() * x.transpose();
        let resid = (DMatrix::identity(n, n) - &hat) * s.y();
        let tr = n as f64 - hat.trace();
        resid.norm_squared() / (tr * tr)
    }

    #[test]
    fn gcv_matches_dense_formula() {
        for seed in 0..5 {
            let s = random_design(15, 4, 0.5, &[1.0, -1.0, 0.0, 0.5], 1.0, 10 + seed);
            for &l in &[0.0, 0.05, 2.0, 40.0] {
                let a = gcv_score(&s, l).unwrap();
                let b = dense_gcv(&s, l);
                assert!((a - b).abs() < 1e-9, "seed {seed} lambda {l}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn gcv_limits() {
        let s = random_design(20, 3, 0.2, &[1.0, 0.0, 2.0], 1.0, 11);
        let rss = s.rss(&ols_coefficients(&s).unwrap());
        assert!((gcv_score(&s, 0.0).unwrap() - rss / 17.0f64.powi(2)).abs() < 1e-12);
        let far = gcv_score(&s, 1e14).unwrap();
        assert!((far - s.y().norm_squared() / 400.0).abs() < 1e-8);
    }

    #[test]
    fn gcv_degenerate_when_wide() {
        let x = DMatrix::from_row_slice(2, 2, &[1.0, -1.0, -1.0, 1.0]);
        let s = StandardizedDesign::from_standardized(x, DVector::from_vec(vec![1.0, -1.0])).unwrap();
        assert_eq!(gcv_score(&s, 0.0), Err(Error::DegenerateTrace));
        assert!(gcv_score(&s, 1.0).is_ok());
    }

    #[test]
    fn ridge_selection_rules() {
        let s = random_design(20, 3, 0.2, &[1.0, 0.0, 2.0], 1.0, 12);
        let one = select_ridge_lambda(&s, &[0.7]).unwrap();
        assert_eq!(one.lambda_star, 0.7);
        // lambda = 0 twice yields identical scores; the first wins
        let tie = select_ridge_lambda(&s, &[0.0, 0.0]).unwrap();
        assert_eq!(tie.gcv_values[0], tie.gcv_values[1]);
        assert_eq!(tie.lambda_star, 0.0);
        assert!(select_ridge_lambda(&s, &[]).is_err());
        assert!(select_ridge_lambda(&s, &[2.0, 1.0]).is_err());
    }

    #[test]
    fn default_grid_shape() {
        let g = default_ridge_grid(40, 8);
        assert_eq!(g.len(), 101);
        assert_eq!(g[0], 0.0);
        assert!((g[1] - 40.0 * 1e-4).abs() < 1e-12);
        assert!((g[100] - 40.0 * 1e3).abs() < 1e-6);
        assert_eq!(default_ridge_grid(8, 8).len(), 100);
    }

    #[test]
    fn sigma2_cases() {
        let s0 = random_design(30, 3, 0.3, &[0.0; 3], 1.0, 13);
        let truth = DVector::from_vec(vec![1.0, 2.0, 3.0]);
        let noiseless = StandardizedDesign::from_standardized(s0.x().clone(), s0.x() * &truth).unwrap();
        let est = estimate_sigma2(&noiseless).unwrap();
        assert!(est.sigma2_hat < 1e-12);
        assert_eq!(est.dof, 27);

        // y orthogonal to the columns: project out the column space
        let b = ols_coefficients(&s0).unwrap();
        let resid = s0.y() - s0.x() * b;
        let resid = resid.add_scalar(-resid.mean());
        let s = StandardizedDesign::from_standardized(s0.x().clone(), resid.clone()).unwrap();
        let est = estimate_sigma2(&s).unwrap();
        assert!((est.sigma2_hat - resid.norm_squared() / 27.0).abs() < 1e-10);

        // centering from raw data spends one more degree of freedom
        assert_eq!(estimate_sigma2(&s0).unwrap().dof, 26);
    }
}
