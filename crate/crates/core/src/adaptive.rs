//! Two-stage adaptive lasso.
//!
//! Stage one is a cross-validated lasso. Its coefficients set the weights
//! `w_j = 1/|b_j|`; coordinates the lasso drops get an infinite weight and stay
//! at zero. Stage two is a weighted lasso whose lambda is again chosen by
//! cross-validation, and inside each fold the weights are recomputed from that
//! fold's own stage-one lasso fit.

use nalgebra::DVector;

use crate::error::Result;
use crate::model::{FitResult, FitWarning, Method, StandardizedDesign, Tuning};
use crate::path::{default_grid, path_on_stats, SolverConfig, DEFAULT_GRID_SIZE};
use crate::penalty::PenaltySpec;
use crate::tuning::{cross_validate, CvFolds, CvResult};

/// Details of an adaptive-lasso fit.
#[derive(Debug, Clone)]
pub struct AdaptiveLassoFit {
    pub fit: FitResult,
    pub first_stage: CvResult,
    pub second_stage: Option<CvResult>,
    pub weights: Vec<f64>,
}

/// `1/|b_j|`, infinite where `b_j = 0`.
pub fn adaptive_weights(beta: &DVector<f64>) -> Vec<f64> {
    beta.iter().map(|b| if *b == 0.0 { f64::INFINITY } else { 1.0 / b.abs() }).collect()
}

pub fn fit_adaptive_lasso(s: &StandardizedDesign, folds: usize, seed: u64) -> Result<AdaptiveLassoFit> {
    let cv = CvFolds::new(s, folds, seed)?;
    fit_adaptive_lasso_with(s, &cv)
}

pub fn fit_adaptive_lasso_with(s: &StandardizedDesign, cv: &CvFolds) -> Result<AdaptiveLassoFit> {
    let cfg = SolverConfig::default();
    let lasso = PenaltySpec::lasso(1.0);
    let grid1 = default_grid(s, &lasso, DEFAULT_GRID_SIZE);
    let (first, fold_paths) = cross_validate(cv, s, &grid1, |_| lasso.clone())?;
    let stage1 = path_on_stats(s.gram(), &lasso, &grid1[..=first.index_min], &cfg)?;
    let beta1 = stage1.coefs[first.index_min].clone();
    let weights = adaptive_weights(&beta1);

    if beta1.iter().all(|b| *b == 0.0) {
        let tuning = Tuning { lambda: Some(first.lambda_min), ..Tuning::default() };
        let mut fit = FitResult::new(Method::AdaLasso, &beta1, s, tuning)?;
        fit.warnings.push(FitWarning::AllZeroFirstStage);
        return Ok(AdaptiveLassoFit { fit, first_stage: first, second_stage: None, weights });
    }

    let spec = PenaltySpec::adaptive(1.0, weights.clone());
    let grid2 = default_grid(s, &spec, DEFAULT_GRID_SIZE);
    let fold_weights: Vec<Vec<f64>> = fold_paths
        .paths
        .iter()
        .map(|p| adaptive_weights(&p.coefs[first.index_min]))
        .collect();
    let (second, _) = cross_validate(cv, s, &grid2, |f| PenaltySpec::adaptive(1.0, fold_weights[f].clone()))?;
    let path = path_on_stats(s.gram(), &spec, &grid2[..=second.index_min], &cfg)?;
    let fit = path.fit_at(second.index_min, s, &spec)?;
    Ok(AdaptiveLassoFit { fit, first_stage: first, second_stage: Some(second), weights })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::path::fit_single;
    use crate::testutil::{orthogonal_design, random_design};

    #[test]
    fn weights_from_first_stage() {
        let w = adaptive_weights(&DVector::from_vec(vec![2.0, 0.0, -0.5]));
        assert_eq!(w, vec![0.5, f64::INFINITY, 2.0]);
    }

    #[test]
    fn dropped_first_stage_coordinates_stay_zero() {
        let s = random_design(60, 8, 0.5, &[3.0, 1.5, 0.0, 0.0, 2.0, 0.0, 0.0, 0.0], 1.0, 70);
        let ada = fit_adaptive_lasso(&s, 10, 1).unwrap();
        for (j, w) in ada.weights.iter().enumerate() {
            if w.is_infinite() {
                assert_eq!(ada.fit.coef.beta[j], 0.0);
            }
        }
        assert_eq!(ada.fit.method, Method::AdaLasso);
    }

    #[test]
    fn all_zero_first_stage_is_flagged() {
        // pure noise response, small n: the CV lasso picks the null model
        let s = random_design(20, 3, 0.0, &[0.0, 0.0, 0.0], 1.0, 71);
        let mut seen = false;
        for seed in 0..20 {
            let ada = fit_adaptive_lasso(&s, 5, seed).unwrap();
            if ada.first_stage.index_min == 0 {
                assert!(ada.fit.warnings.contains(&FitWarning::AllZeroFirstStage));
                assert!(ada.fit.coef.beta.iter().all(|b| *b == 0.0));
                assert!(ada.second_stage.is_none());
                seen = true;
            }
        }
        assert!(seen);
    }

    #[test]
    fn less_bias_than_lasso_on_large_coefficient() {
        let mut y = vec![0.0; 16];
        // Hadamard column 1 alternates sign: a large true coefficient on it
        for (i, v) in y.iter_mut().enumerate() {
            *v = if i % 2 == 0 { 10.0 } else { -10.0 };
            *v += if (i & 6).count_ones() % 2 == 0 { 0.3 } else { -0.3 };
        }
        let s = orthogonal_design(16, 4, &y);
        let lam = 0.5;
        let lasso = fit_single(&s, &PenaltySpec::lasso(lam)).unwrap();
        let w = adaptive_weights(&lasso.coef.beta_vector());
        let ada = fit_single(&s, &PenaltySpec::adaptive(lam, w)).unwrap();
        let truth = 10.0;
        assert!((ada.coef.beta[0] - truth).abs() < (lasso.coef.beta[0] - truth).abs());
    }
}
