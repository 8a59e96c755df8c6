//! Regression data model: raw datasets, centering/scaling, and the mapping of
//! standardized coefficients back to the original units.
//!
//! Every estimator in this crate works on a [`StandardizedDesign`], where each
//! column of `X` sums to zero with sum of squares `n` and `y` is centered. The
//! no-intercept model `y = X beta + eps` then applies, and
//! [`recover_original_scale`] produces raw-scale slopes plus the intercept.

use std::fmt;
use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};

/// Raw regression data in original units.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    x: DMatrix<f64>,
    y: DVector<f64>,
}

impl Dataset {
    pub fn new(x: DMatrix<f64>, y: DVector<f64>) -> Result<Self> {
        let (n, p) = x.shape();
        if n != y.len() {
            return Err(Error::Shape(format!("X has {n} rows but y has {} entries", y.len())));
        }
        if n < 2 || p < 1 {
            return Err(Error::Shape(format!("need n >= 2 and p >= 1, got n = {n}, p = {p}")));
        }
        if x.iter().chain(y.iter()).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Dataset { x, y })
    }

    pub fn x(&self) -> &DMatrix<f64> {
        &self.x
    }

    pub fn y(&self) -> &DVector<f64> {
        &self.y
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn p(&self) -> usize {
        self.x.ncols()
    }

    /// Rows `idx` of this dataset, in the given order.
    pub fn subset_rows(&self, idx: &[usize]) -> Result<Dataset> {
        let x = self.x.select_rows(idx.iter());
        let y = DVector::from_iterator(idx.len(), idx.iter().map(|&i| self.y[i]));
        Dataset::new(x, y)
    }
}

/// A centered and scaled design with the transformation needed to undo it.
#[derive(Debug)]
pub struct StandardizedDesign {
    x: DMatrix<f64>,
    y: DVector<f64>,
    col_means: DVector<f64>,
    col_scales: DVector<f64>,
    y_mean: f64,
    intercept_fitted: bool,
    gram: OnceLock<GramStats>,
}

impl Clone for StandardizedDesign {
    fn clone(&self) -> Self {
        StandardizedDesign {
            x: self.x.clone(),
            y: self.y.clone(),
            col_means: self.col_means.clone(),
            col_scales: self.col_scales.clone(),
            y_mean: self.y_mean,
            intercept_fitted: self.intercept_fitted,
            gram: OnceLock::new(),
        }
    }
}

impl StandardizedDesign {
    /// Wraps data that already satisfies the centering and scaling
    /// conditions. The means are taken as zero and the scales as one, and no
    /// intercept is considered estimated.
    pub fn from_standardized(x: DMatrix<f64>, y: DVector<f64>) -> Result<Self> {
        let (n, p) = x.shape();
        if n != y.len() || n < 2 || p < 1 {
            return Err(Error::Shape(format!("X is {n}x{p}, y has {} entries", y.len())));
        }
        if x.iter().chain(y.iter()).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        let nf = n as f64;
        for (j, col) in x.column_iter().enumerate() {
            let sum: f64 = col.iter().sum();
            let sq: f64 = col.iter().map(|v| v * v).sum();
            if sum.abs() > 1e-8 * nf || (sq - nf).abs() > 1e-6 * nf {
                return Err(Error::InvalidParameter(format!(
                    "column {j} is not standardized (sum {sum:.3e}, sum of squares {sq:.6})"
                )));
            }
        }
        if y.sum().abs() > 1e-8 * nf {
            return Err(Error::InvalidParameter("response is not centered".into()));
        }
        Ok(StandardizedDesign {
            x,
            y,
            col_means: DVector::zeros(p),
            col_scales: DVector::from_element(p, 1.0),
            y_mean: 0.0,
            intercept_fitted: false,
            gram: OnceLock::new(),
        })
    }

    pub fn x(&self) -> &DMatrix<f64> {
        &self.x
    }

    pub fn y(&self) -> &DVector<f64> {
        &self.y
    }

    pub fn col_means(&self) -> &DVector<f64> {
        &self.col_means
    }

    pub fn col_scales(&self) -> &DVector<f64> {
        &self.col_scales
    }

    pub fn y_mean(&self) -> f64 {
        self.y_mean
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn p(&self) -> usize {
        self.x.ncols()
    }

    /// Whether centering estimated an intercept (costs one residual degree
    /// of freedom).
    pub fn intercept_fitted(&self) -> bool {
        self.intercept_fitted
    }

    /// Per-observation Gram statistics, computed once and cached.
    pub fn gram(&self) -> &GramStats {
        self.gram.get_or_init(|| GramStats::from_xy(&self.x, &self.y))
    }

    /// Residual sum of squares of a standardized-scale coefficient vector.
    pub fn rss(&self, beta: &DVector<f64>) -> f64 {
        (&self.y - &self.x * beta).norm_squared()
    }
}

/// Centers every column to mean zero and scales it so that its sum of squares
/// equals `n` (population variance convention); centers the response.
pub fn standardize(d: &Dataset) -> Result<StandardizedDesign> {
    let (n, p) = d.x.shape();
    let nf = n as f64;
    let mut x = d.x.clone();
    let mut means = DVector::zeros(p);
    let mut scales = DVector::zeros(p);
    for j in 0..p {
        let mut col = x.column_mut(j);
        let mean = col.sum() / nf;
        col.add_scalar_mut(-mean);
        let scale = (col.norm_squared() / nf).sqrt();
        if !(scale > 1e-12 * (1.0 + mean.abs())) {
            return Err(Error::ZeroVarianceColumn(j));
        }
        col /= scale;
        means[j] = mean;
        scales[j] = scale;
    }
    let y_mean = d.y.sum() / nf;
    let y = d.y.add_scalar(-y_mean);
    Ok(StandardizedDesign {
        x,
        y,
        col_means: means,
        col_scales: scales,
        y_mean,
        intercept_fitted: true,
        gram: OnceLock::new(),
    })
}

/// Coefficients on both scales.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoefficientVector {
    /// Standardized-scale coefficients.
    pub beta: Vec<f64>,
    /// Original-scale slopes, `beta_j / s_j`.
    pub slopes: Vec<f64>,
    /// Original-scale intercept.
    pub intercept: f64,
}

impl CoefficientVector {
    /// Indices with a nonzero coefficient.
    pub fn support(&self) -> Vec<usize> {
        self.beta
            .iter()
            .enumerate()
            .filter(|(_, b)| **b != 0.0)
            .map(|(j, _)| j)
            .collect()
    }

    pub fn df(&self) -> usize {
        self.beta.iter().filter(|b| **b != 0.0).count()
    }

    pub fn beta_vector(&self) -> DVector<f64> {
        DVector::from_column_slice(&self.beta)
    }

    /// Fitted values on the raw scale for rows of `x_raw`.
    pub fn predict(&self, x_raw: &DMatrix<f64>) -> DVector<f64> {
        let slopes = DVector::from_column_slice(&self.slopes);
        (x_raw * slopes).add_scalar(self.intercept)
    }
}

/// Maps standardized-scale coefficients back to original units.
pub fn recover_original_scale(
    beta: &DVector<f64>,
    s: &StandardizedDesign,
) -> Result<CoefficientVector> {
    if beta.len() != s.p() {
        return Err(Error::Shape(format!("beta has {} entries, design has p = {}", beta.len(), s.p())));
    }
    let slopes: Vec<f64> = beta
        .iter()
        .zip(s.col_scales.iter())
        .map(|(b, sc)| if *b == 0.0 { 0.0 } else { b / sc })
        .collect();
    let shift: f64 = slopes.iter().zip(s.col_means.iter()).map(|(b, m)| b * m).sum();
    Ok(CoefficientVector {
        beta: beta.iter().copied().collect(),
        slopes,
        intercept: s.y_mean - shift,
    })
}

/// Sufficient statistics of a centered design, scaled per observation:
/// `xtx = X'X/n`, `xty = X'y/n`, `yty = y'y/n`.
#[derive(Debug, Clone)]
pub struct GramStats {
    pub n: usize,
    pub xtx: DMatrix<f64>,
    pub xty: DVector<f64>,
    pub yty: f64,
}

impl GramStats {
    pub fn from_xy(x: &DMatrix<f64>, y: &DVector<f64>) -> Self {
        let nf = x.nrows() as f64;
        GramStats {
            n: x.nrows(),
            xtx: x.tr_mul(x) / nf,
            xty: x.tr_mul(y) / nf,
            yty: y.norm_squared() / nf,
        }
    }

    pub fn p(&self) -> usize {
        self.xty.len()
    }

    /// `RSS/(2n)` of `beta` from the cached statistics.
    pub fn half_mse(&self, beta: &DVector<f64>) -> f64 {
        let qb = &self.xtx * beta;
        0.5 * (self.yty - 2.0 * self.xty.dot(beta) + beta.dot(&qb)).max(0.0)
    }
}

/// Estimator identifiers used across the library and the harness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Method {
    #[serde(rename = "ols")]
    Ols,
    #[serde(rename = "ridge")]
    Ridge,
    #[serde(rename = "ng-aic")]
    NgAic,
    #[serde(rename = "ng-bic")]
    NgBic,
    #[serde(rename = "ngridge-bic")]
    NgRidgeBic,
    #[serde(rename = "lasso")]
    Lasso,
    #[serde(rename = "enet")]
    Enet,
    #[serde(rename = "adalasso")]
    AdaLasso,
    #[serde(rename = "scad")]
    Scad,
    #[serde(rename = "mcp")]
    Mcp,
}

impl Method {
    pub const ALL: [Method; 10] = [
        Method::Ols,
        Method::Ridge,
        Method::NgAic,
        Method::NgBic,
        Method::NgRidgeBic,
        Method::Lasso,
        Method::Enet,
        Method::AdaLasso,
        Method::Scad,
        Method::Mcp,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            Method::Ols => "ols",
            Method::Ridge => "ridge",
            Method::NgAic => "ng-aic",
            Method::NgBic => "ng-bic",
            Method::NgRidgeBic => "ngridge-bic",
            Method::Lasso => "lasso",
            Method::Enet => "enet",
            Method::AdaLasso => "adalasso",
            Method::Scad => "scad",
            Method::Mcp => "mcp",
        }
    }

    /// Parses a method tag. `ng-cp` is accepted as an alias of `ng-aic`.
    pub fn from_tag(tag: &str) -> Option<Method> {
        if tag == "ng-cp" {
            return Some(Method::NgAic);
        }
        Method::ALL.iter().copied().find(|m| m.tag() == tag)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl std::str::FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Method::from_tag(s).ok_or_else(|| {
            let tags: Vec<_> = Method::ALL.iter().map(|m| m.tag()).collect();
            format!("unknown method `{s}` (expected one of: {}, ng-cp)", tags.join(", "))
        })
    }
}

/// Tuning values chosen for a fit. Penalty levels for the shrinkage
/// families are on the per-observation scale; `lambda` for ridge and the
/// garrote is the additive constant of their unscaled objectives.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Tuning {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda_ridge: Option<f64>,
}

/// Non-fatal conditions attached to a fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FitWarning {
    /// Adaptive lasso: the first-stage lasso selected nothing.
    AllZeroFirstStage,
    /// SCAD/MCP: no gamma on the ladder passed the convexity diagnostic.
    NoConvexCandidate,
    /// Garrote: the residual variance was zero and lambda was floored.
    LambdaFloored,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitResult {
    pub method: Method,
    pub coef: CoefficientVector,
    pub tuning: Tuning,
    pub iterations: usize,
    pub converged: bool,
    pub warnings: Vec<FitWarning>,
}

impl FitResult {
    pub(crate) fn new(
        method: Method,
        beta: &DVector<f64>,
        s: &StandardizedDesign,
        tuning: Tuning,
    ) -> Result<Self> {
        Ok(FitResult {
            method,
            coef: recover_original_scale(beta, s)?,
            tuning,
            iterations: 0,
            converged: true,
            warnings: Vec::new(),
        })
    }

    pub(crate) fn with_iterations(mut self, iterations: usize, converged: bool) -> Self {
        self.iterations = iterations;
        self.converged = converged;
        self
    }

    pub fn support(&self) -> Vec<usize> {
        self.coef.support()
    }
}
