//! Tuning-parameter selection: k-fold cross-validation over lambda paths,
//! BIC scoring, and the convexity diagnostic used to choose gamma for SCAD
//! and MCP.

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{min_eigenvalue, select};
use crate::model::{FitResult, FitWarning, GramStats, StandardizedDesign};
use crate::path::{default_grid, path_on_stats, RegularizationPath, SolverConfig, DEFAULT_GRID_SIZE};
use crate::penalty::{Family, PenaltySpec};

/// Default number of folds.
pub const DEFAULT_FOLDS: usize = 10;

/// Gamma ladder for SCAD.
pub const SCAD_LADDER: [f64; 6] = [2.1, 2.7, 3.7, 5.0, 10.0, 20.0];
/// Gamma ladder for MCP.
pub const MCP_LADDER: [f64; 6] = [1.5, 2.0, 3.0, 5.0, 10.0, 20.0];

/// Seeded assignment of observations to folds.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FoldAssignment {
    /// Held-out row indices per fold, ascending.
    pub folds: Vec<Vec<usize>>,
}

impl FoldAssignment {
    /// Random permutation of `0..n` dealt round-robin into `k` folds, so fold
    /// sizes differ by at most one.
    pub fn new(n: usize, k: usize, seed: u64) -> Result<Self> {
        if k < 2 || k > n {
            return Err(Error::FoldTooSmall(format!("need 2 <= folds <= n, got folds = {k}, n = {n}")));
        }
        if n - n.div_ceil(k) < 2 {
            return Err(Error::FoldTooSmall(format!(
                "training part of a fold would have fewer than 2 observations (n = {n}, folds = {k})"
            )));
        }
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let mut folds = vec![Vec::with_capacity(n / k + 1); k];
        for (pos, &i) in perm.iter().enumerate() {
            folds[pos % k].push(i);
        }
        for f in &mut folds {
            f.sort_unstable();
        }
        Ok(FoldAssignment { folds })
    }

    pub fn len(&self) -> usize {
        self.folds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.folds.is_empty()
    }
}

/// One fold: the held-out rows and the re-standardized training statistics.
#[derive(Debug, Clone)]
struct Fold {
    held_out: Vec<usize>,
    stats: GramStats,
    /// Training column means and scales, in units of the full design.
    means: DVector<f64>,
    scales: DVector<f64>,
    y_mean: f64,
}

/// Folds with their training statistics, built once per design and shared
/// by every method tuned on it.
#[derive(Debug, Clone)]
pub struct CvFolds {
    assignment: FoldAssignment,
    folds: Vec<Fold>,
    n: usize,
}

impl CvFolds {
    pub fn new(s: &StandardizedDesign, k: usize, seed: u64) -> Result<Self> {
        let assignment = FoldAssignment::new(s.n(), k, seed)?;
        let (x, y) = (s.x(), s.y());
        let p = s.p();
        let full = s.gram();
        let nf = s.n() as f64;
        let col_sums: DVector<f64> = DVector::from_fn(p, |j, _| x.column(j).sum());
        let y_sum = y.sum();
        let mut folds = Vec::with_capacity(k);
        for held in &assignment.folds {
            let xh = x.select_rows(held.iter());
            let yh = DVector::from_iterator(held.len(), held.iter().map(|&i| y[i]));
            let nt = (s.n() - held.len()) as f64;
            let means = (&col_sums - row_sums(&xh)) / nt;
            let y_mean = (y_sum - yh.sum()) / nt;
            // training cross products, centered at the training means
            let mut sxx = &full.xtx * nf - xh.tr_mul(&xh);
            sxx -= &means * means.transpose() * nt;
            let sxy = &full.xty * nf - xh.tr_mul(&yh) - &means * (nt * y_mean);
            let syy = full.yty * nf - yh.norm_squared() - nt * y_mean * y_mean;
            let scales = DVector::from_fn(p, |j, _| (sxx[(j, j)] / nt).max(0.0).sqrt());
            if let Some(j) = scales.iter().position(|s| !(*s > 1e-12)) {
                return Err(Error::ZeroVarianceColumn(j));
            }
            let xtx = DMatrix::from_fn(p, p, |a, b| sxx[(a, b)] / (nt * scales[a] * scales[b]));
            let xty = DVector::from_fn(p, |a, _| sxy[a] / (nt * scales[a]));
            let stats = GramStats { n: nt as usize, xtx, xty, yty: (syy / nt).max(0.0) };
            folds.push(Fold { held_out: held.clone(), stats, means, scales, y_mean });
        }
        Ok(CvFolds { assignment, folds, n: s.n() })
    }

    pub fn assignment(&self) -> &FoldAssignment {
        &self.assignment
    }

    pub fn len(&self) -> usize {
        self.folds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.folds.is_empty()
    }
}

fn row_sums(x: &DMatrix<f64>) -> DVector<f64> {
    DVector::from_fn(x.ncols(), |j, _| x.column(j).sum())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CvResult {
    pub lambdas: Vec<f64>,
    pub cv_mean: Vec<f64>,
    pub cv_se: Vec<f64>,
    pub lambda_min: f64,
    pub index_min: usize,
}

/// Per-fold paths from a cross-validation run, reused by two-stage methods.
#[derive(Debug, Clone)]
pub struct FoldPaths {
    pub paths: Vec<RegularizationPath>,
}

/// Cross-validates on a fixed descending grid. `spec_for_fold` supplies the
/// penalty used on each fold's training part (it may depend on the fold).
pub fn cross_validate<F>(folds: &CvFolds, s: &StandardizedDesign, lambdas: &[f64], spec_for_fold: F) -> Result<(CvResult, FoldPaths)>
where
    F: Fn(usize) -> PenaltySpec,
{
    let m = lambdas.len();
    let k = folds.len();
    let mut fold_mse = vec![vec![0.0; m]; k];
    let mut paths = Vec::with_capacity(k);
    let cfg = SolverConfig::default();
    for (f, fold) in folds.folds.iter().enumerate() {
        let spec = spec_for_fold(f);
        let path = path_on_stats(&fold.stats, &spec, lambdas, &cfg)?;
        let xh = s.x().select_rows(fold.held_out.iter());
        let centered = DMatrix::from_fn(xh.nrows(), xh.ncols(), |i, j| (xh[(i, j)] - fold.means[j]) / fold.scales[j]);
        for (l, beta) in path.coefs.iter().enumerate() {
            let pred = &centered * beta;
            let sse: f64 = fold
                .held_out
                .iter()
                .zip(pred.iter())
                .map(|(&i, yhat)| (s.y()[i] - fold.y_mean - yhat).powi(2))
                .sum();
            fold_mse[f][l] = sse / fold.held_out.len() as f64;
        }
        paths.push(path);
    }
    let sizes: Vec<f64> = folds.folds.iter().map(|f| f.held_out.len() as f64).collect();
    let total = folds.n as f64;
    let mut cv_mean = vec![0.0; m];
    let mut cv_se = vec![0.0; m];
    for l in 0..m {
        let mean = (0..k).map(|f| sizes[f] * fold_mse[f][l]).sum::<f64>() / total;
        let var = (0..k).map(|f| sizes[f] * (fold_mse[f][l] - mean).powi(2)).sum::<f64>() / total;
        cv_mean[l] = mean;
        cv_se[l] = (var / (k as f64 - 1.0)).sqrt();
    }
    // ties go to the larger lambda, i.e. the earlier grid point
    let mut index_min = 0;
    for l in 1..m {
        if cv_mean[l] < cv_mean[index_min] {
            index_min = l;
        }
    }
    let res = CvResult { lambdas: lambdas.to_vec(), cv_mean, cv_se, lambda_min: lambdas[index_min], index_min };
    Ok((res, FoldPaths { paths }))
}

/// k-fold cross-validation over the default path grid of `spec` on `s`.
pub fn kfold_cv(s: &StandardizedDesign, spec: &PenaltySpec, folds: usize, seed: u64) -> Result<CvResult> {
    let cv = CvFolds::new(s, folds, seed)?;
    let grid = default_grid(s, spec, DEFAULT_GRID_SIZE);
    Ok(cross_validate(&cv, s, &grid, |_| spec.clone())?.0)
}

/// `n log(RSS/n) + log(n) df` with `RSS` floored at `1e-12`.
pub fn bic_score(s: &StandardizedDesign, fit: &FitResult) -> f64 {
    bic_from_rss(s.n(), s.rss(&fit.coef.beta_vector()), fit.coef.df())
}

pub fn bic_from_rss(n: usize, rss: f64, df: usize) -> f64 {
    let nf = n as f64;
    nf * (rss.max(1e-12) / nf).ln() + nf.ln() * df as f64
}

/// Concavity modulus of the penalty: `1/(gamma - 1)` for SCAD, `1/gamma` for
/// MCP, zero for convex penalties.
pub fn concavity(spec: &PenaltySpec) -> f64 {
    match spec.family {
        Family::Scad => 1.0 / (spec.gamma - 1.0),
        Family::Mcp => 1.0 / spec.gamma,
        _ => 0.0,
    }
}

/// Whether the objective restricted to `active` is convex: the smallest
/// eigenvalue of `X_A'X_A/n` must exceed the penalty's concavity modulus.
pub fn restricted_convex(xtx: &DMatrix<f64>, active: &[usize], kappa: f64) -> bool {
    active.is_empty() || min_eigenvalue(&select(xtx, active, active)) > kappa
}

/// Per-lambda convexity flags along a path.
pub fn convexity_diagnostic(path: &RegularizationPath, s: &StandardizedDesign, spec: &PenaltySpec) -> Vec<bool> {
    if !spec.family.is_nonconvex() {
        return vec![true; path.len()];
    }
    let kappa = concavity(spec);
    let xtx = &s.gram().xtx;
    let mut out = Vec::with_capacity(path.len());
    let mut last: Option<(Vec<usize>, bool)> = None;
    for beta in &path.coefs {
        let active: Vec<usize> = (0..beta.len()).filter(|&j| beta[j] != 0.0).collect();
        let flag = match &last {
            Some((a, f)) if *a == active => *f,
            _ => restricted_convex(xtx, &active, kappa),
        };
        out.push(flag);
        last = Some((active, flag));
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GammaSelection {
    pub family: Family,
    pub gamma_ladder: Vec<f64>,
    /// Minimum BIC along each gamma's path.
    pub bic_values: Vec<f64>,
    /// Lambda attaining that minimum.
    pub bic_lambdas: Vec<f64>,
    /// Convexity flag at the BIC-optimal point of each path.
    pub convexity_flags: Vec<bool>,
    /// Convexity flags at every lambda of each path.
    pub path_flags: Vec<Vec<bool>>,
    pub gamma_star: f64,
    /// Cross-validation at `gamma_star`.
    pub cv: CvResult,
    pub warning: Option<FitWarning>,
}

pub fn ladder(family: Family) -> Result<&'static [f64]> {
    match family {
        Family::Scad => Ok(&SCAD_LADDER),
        Family::Mcp => Ok(&MCP_LADDER),
        other => Err(Error::InvalidParameter(format!("{} has no gamma ladder", other.name()))),
    }
}

fn base_spec(family: Family, gamma: f64) -> Result<PenaltySpec> {
    match family {
        Family::Scad => Ok(PenaltySpec::scad(1.0, gamma)),
        Family::Mcp => Ok(PenaltySpec::mcp(1.0, gamma)),
        other => Err(Error::InvalidParameter(format!("{} is not a nonconvex family", other.name()))),
    }
}

/// Chooses gamma on the family's ladder, then lambda by cross-validation.
pub fn select_gamma(s: &StandardizedDesign, family: Family, folds: usize, seed: u64) -> Result<GammaSelection> {
    let cv = CvFolds::new(s, folds, seed)?;
    select_gamma_with(s, family, ladder(family)?, &cv)
}

/// Gamma selection on an explicit ladder with prepared folds.
///
/// Each rung is scored by the minimum BIC along its path and passes when the
/// active set at that point satisfies the convexity diagnostic. The passing
/// rung with the lowest BIC wins (ties to the smaller gamma); if none passes,
/// the largest gamma is used and a warning is attached.
pub fn select_gamma_with(s: &StandardizedDesign, family: Family, gammas: &[f64], cv: &CvFolds) -> Result<GammaSelection> {
    if gammas.is_empty() {
        return Err(Error::InvalidParameter("gamma ladder is empty".into()));
    }
    let mut bic_values = Vec::with_capacity(gammas.len());
    let mut bic_lambdas = Vec::with_capacity(gammas.len());
    let mut convexity_flags = Vec::with_capacity(gammas.len());
    let mut path_flags = Vec::with_capacity(gammas.len());
    let mut grid = Vec::new();
    for &g in gammas {
        let spec = base_spec(family, g)?;
        if grid.is_empty() {
            grid = default_grid(s, &spec, DEFAULT_GRID_SIZE);
        }
        let path = path_on_stats(s.gram(), &spec, &grid, &SolverConfig::default())?;
        let flags = convexity_diagnostic(&path, s, &spec);
        let (best, bic) = path
            .coefs
            .iter()
            .enumerate()
            .map(|(k, b)| (k, bic_from_rss(s.n(), s.rss(b), path.dfs[k])))
            .fold((0, f64::INFINITY), |acc, (k, v)| if v < acc.1 { (k, v) } else { acc });
        bic_values.push(bic);
        bic_lambdas.push(path.lambdas[best]);
        convexity_flags.push(flags[best]);
        path_flags.push(flags);
    }
    let mut star: Option<usize> = None;
    for i in 0..gammas.len() {
        if convexity_flags[i] && star.is_none_or(|b| bic_values[i] < bic_values[b]) {
            star = Some(i);
        }
    }
    let (star, warning) = match star {
        Some(i) => (i, None),
        None => {
            let largest = (0..gammas.len())
                .max_by(|&a, &b| gammas[a].total_cmp(&gammas[b]))
                .expect("nonempty ladder");
            (largest, Some(FitWarning::NoConvexCandidate))
        }
    };
    let gamma_star = gammas[star];
    let spec = base_spec(family, gamma_star)?;
    let (cv_res, _) = cross_validate(cv, s, &grid, |_| spec.clone())?;
    Ok(GammaSelection {
        family,
        gamma_ladder: gammas.to_vec(),
        bic_values,
        bic_lambdas,
        convexity_flags,
        path_flags,
        gamma_star,
        cv: cv_res,
        warning,
    })
}

/// SCAD or MCP with gamma from [`select_gamma_with`] and lambda from CV.
pub fn fit_nonconvex_with(s: &StandardizedDesign, family: Family, cv: &CvFolds) -> Result<(FitResult, GammaSelection)> {
    let sel = select_gamma_with(s, family, ladder(family)?, cv)?;
    let spec = base_spec(family, sel.gamma_star)?;
    let path = path_on_stats(s.gram(), &spec, &sel.cv.lambdas[..=sel.cv.index_min], &SolverConfig::default())?;
    let mut fit = path.fit_at(sel.cv.index_min, s, &spec)?;
    fit.warnings.extend(sel.warning);
    Ok((fit, sel))
}

pub fn fit_nonconvex(s: &StandardizedDesign, family: Family, folds: usize, seed: u64) -> Result<(FitResult, GammaSelection)> {
    let cv = CvFolds::new(s, folds, seed)?;
    fit_nonconvex_with(s, family, &cv)
}

/// A convex family (lasso or tied elastic net) with lambda from CV.
pub fn fit_cv_with(s: &StandardizedDesign, spec: &PenaltySpec, cv: &CvFolds) -> Result<(FitResult, CvResult)> {
    let grid = default_grid(s, spec, DEFAULT_GRID_SIZE);
    let (res, _) = cross_validate(cv, s, &grid, |_| spec.clone())?;
    let path = path_on_stats(s.gram(), spec, &grid[..=res.index_min], &SolverConfig::default())?;
    let fit = path.fit_at(res.index_min, s, spec)?;
    Ok((fit, res))
}

pub fn fit_cv(s: &StandardizedDesign, spec: &PenaltySpec, folds: usize, seed: u64) -> Result<(FitResult, CvResult)> {
    let cv = CvFolds::new(s, folds, seed)?;
    fit_cv_with(s, spec, &cv)
}
