use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

use penreg::classic::ridge_coefficients;
use penreg::garrote::{solve_nn_qp, GarroteProblem};
use penreg::metrics::{aggregate, compute_metrics, MetricsRecord};
use penreg::model::{standardize, CoefficientVector, Dataset, FitResult, Method, StandardizedDesign, Tuning};
use penreg::path::{fit_path, fit_single, lambda_max};
use penreg::penalty::{soft_threshold, univariate_penalized_min, PenaltySpec};
use penreg::simulate::{gen_dataset, ScenarioSpec};
use penreg::tuning::{bic_from_rss, kfold_cv, restricted_convex, FoldAssignment};

fn dataset(n: usize, p: usize, rho: f64, seed: u64) -> Dataset {
    let beta: Vec<f64> = (0..p).map(|j| if j % 3 == 1 { 0.0 } else { 1.0 + j as f64 * 0.5 }).collect();
    let spec = ScenarioSpec { n, p, beta0: 2.0, beta, rho, sigma: 1.0, replications: 1, base_seed: seed };
    gen_dataset(&spec, 0).unwrap()
}

fn design(n: usize, p: usize, rho: f64, seed: u64) -> StandardizedDesign {
    standardize(&dataset(n, p, rho, seed)).unwrap()
}

fn penalty(family: u8, lambda: f64, gamma: f64) -> PenaltySpec {
    match family % 4 {
        0 => PenaltySpec::lasso(lambda),
        1 => PenaltySpec::enet_tied(lambda),
        2 => PenaltySpec::scad(lambda, 2.0 + gamma),
        _ => PenaltySpec::mcp(lambda, 1.0 + gamma),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn soft_threshold_shrinks(z in -10.0f64..10.0, t in 0.0f64..5.0) {
        let v = soft_threshold(z, t);
        prop_assert!(v.abs() <= z.abs());
        prop_assert!(v == 0.0 || v.signum() == z.signum());
        prop_assert_eq!(v == 0.0, z.abs() <= t);
    }

    #[test]
    fn univariate_min_beats_samples(
        z in -6.0f64..6.0, lambda in 0.01f64..3.0, gamma in 0.05f64..6.0, d in 0.3f64..3.0, fam in 0u8..4
    ) {
        let spec = penalty(fam, lambda, gamma);
        let t = univariate_penalized_min(z, d, &spec).unwrap();
        let f = |b: f64| 0.5 * d * b * b - z * b + spec.total(&[b]);
        for k in -400..=400 {
            let b = k as f64 * 0.02;
            prop_assert!(f(t) <= f(b) + 1e-12, "t = {} worse than {}", t, b);
        }
        prop_assert!(t == 0.0 || t.signum() == z.signum());
    }

    #[test]
    fn standardize_invariants(seed in 0u64..1000, p in 1usize..6, rho in 0.0f64..0.95) {
        let d = dataset(25, p, rho, seed);
        let s = standardize(&d).unwrap();
        for j in 0..p {
            let c = s.x().column(j);
            prop_assert!(c.sum().abs() < 1e-9);
            prop_assert!((c.norm_squared() - 25.0).abs() < 1e-9);
        }
        prop_assert!(s.y().sum().abs() < 1e-9);
        let again = standardize(&Dataset::new(s.x().clone(), s.y().clone()).unwrap()).unwrap();
        prop_assert!((again.x() - s.x()).amax() < 1e-10);
    }

    #[test]
    fn fitted_values_scale_invariant(seed in 0u64..1000, lambda in 0.0f64..20.0) {
        let d = dataset(30, 4, 0.4, seed);
        let s = standardize(&d).unwrap();
        let beta = ridge_coefficients(&s, lambda).unwrap();
        let coef = penreg::model::recover_original_scale(&beta, &s).unwrap();
        let raw = coef.predict(d.x());
        let std = (s.x() * &beta).add_scalar(s.y_mean());
        prop_assert!((raw - std).amax() < 1e-8);
    }

    #[test]
    fn ridge_norm_nonincreasing(seed in 0u64..1000, a in 0.0f64..50.0, b in 0.0f64..50.0) {
        let s = design(20, 5, 0.7, seed);
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let n_lo = ridge_coefficients(&s, lo).unwrap().norm();
        let n_hi = ridge_coefficients(&s, hi).unwrap().norm();
        prop_assert!(n_hi <= n_lo + 1e-12);
        let near = ridge_coefficients(&s, lo + 1e-6).unwrap();
        prop_assert!((near - ridge_coefficients(&s, lo).unwrap()).amax() < 1e-4);
    }

    #[test]
    fn lasso_kkt(seed in 0u64..1000, frac in 0.02f64..1.0, p in 1usize..8) {
        let s = design(40, p, 0.5, seed);
        let lam = frac * lambda_max(&s, &PenaltySpec::lasso(1.0));
        let fit = fit_single(&s, &PenaltySpec::lasso(lam)).unwrap();
        let b = fit.coef.beta_vector();
        let g = s.x().tr_mul(&(s.y() - s.x() * &b)) / 40.0;
        for j in 0..p {
            prop_assert!(g[j].abs() <= lam + 1e-6);
            if b[j] != 0.0 {
                prop_assert!((g[j] - lam * b[j].signum()).abs() <= 1e-6);
            }
        }
    }

    #[test]
    fn paths_start_empty_and_report_df(seed in 0u64..1000, fam in 0u8..4, gamma in 0.5f64..5.0) {
        let s = design(30, 6, 0.5, seed);
        let spec = penalty(fam, 1.0, gamma);
        let path = fit_path(&s, &spec, 15).unwrap();
        prop_assert!(path.coefs[0].iter().all(|b| *b == 0.0));
        for (c, df) in path.coefs.iter().zip(&path.dfs) {
            prop_assert_eq!(*df, c.iter().filter(|b| **b != 0.0).count());
        }
        prop_assert!(path.lambdas.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn garrote_feasible_and_certified(seed in 0u64..1000, p in 1usize..6, lambda in 0.01f64..20.0) {
        let s = design(30, p, 0.6, seed);
        let init = ridge_coefficients(&s, 0.0).unwrap();
        let prob = GarroteProblem::new(s.x(), s.y(), &init, DVector::from_element(p, 1.0), lambda).unwrap();
        let sol = solve_nn_qp(&prob).unwrap();
        prop_assert!(sol.u.iter().all(|u| *u >= 0.0));
        prop_assert!(prob.kkt_residual(&sol.u) <= prob.tolerance());
    }

    #[test]
    fn bic_grows_with_support(n in 5usize..500, rss in 0.01f64..100.0, df in 0usize..20) {
        prop_assert!(bic_from_rss(n, rss, df + 1) > bic_from_rss(n, rss, df));
    }

    #[test]
    fn convexity_flag_monotone_in_gamma(seed in 0u64..1000, g1 in 2.05f64..10.0, dg in 0.0f64..10.0, k in 1usize..5) {
        let s = design(30, 5, 0.9, seed);
        let active: Vec<usize> = (0..k).collect();
        let xtx = &s.gram().xtx;
        let kappa = |g: f64| 1.0 / (g - 1.0);
        if restricted_convex(xtx, &active, kappa(g1)) {
            prop_assert!(restricted_convex(xtx, &active, kappa(g1 + dg)));
        }
    }

    #[test]
    fn folds_partition_rows(n in 2usize..200, k in 2usize..12, seed in 0u64..100) {
        prop_assume!(k <= n && n - n.div_ceil(k) >= 2);
        let a = FoldAssignment::new(n, k, seed).unwrap();
        let mut seen = vec![0usize; n];
        let mut sizes = Vec::new();
        for rows in &a.folds {
            sizes.push(rows.len());
            for &i in rows {
                seen[i] += 1;
            }
        }
        prop_assert!(seen.iter().all(|c| *c == 1));
        prop_assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
    }

    #[test]
    fn cv_deterministic_with_nonnegative_se(seed in 0u64..200, fold_seed in 0u64..50) {
        let s = design(30, 4, 0.5, seed);
        let spec = PenaltySpec::lasso(1.0);
        let a = kfold_cv(&s, &spec, 5, fold_seed).unwrap();
        let b = kfold_cv(&s, &spec, 5, fold_seed).unwrap();
        prop_assert!(a.cv_se.iter().all(|v| *v >= 0.0));
        prop_assert_eq!(a, b);
    }

    #[test]
    fn metric_invariants(seed in 0u64..1000, mask in 0u32..256) {
        let d = dataset(20, 8, 0.5, seed);
        let truth = ScenarioSpec {
            n: 20, p: 8, beta0: 0.0, beta: vec![3.0, 1.5, 0.0, 0.0, 2.0, 0.0, 0.0, 0.0],
            rho: 0.5, sigma: 1.0, replications: 1, base_seed: 0,
        };
        let slopes: Vec<f64> = (0..8).map(|j| if mask >> j & 1 == 1 { 1.0 + j as f64 } else { 0.0 }).collect();
        let fit = FitResult {
            method: Method::Lasso,
            coef: CoefficientVector { beta: slopes.clone(), slopes: slopes.clone(), intercept: 0.0 },
            tuning: Tuning::default(),
            iterations: 0,
            converged: true,
            warnings: vec![],
        };
        let m = compute_metrics(&fit, &truth, &d, 0, 0.0).unwrap();
        let support = [0usize, 1, 4];
        let tp = support.iter().filter(|&&j| slopes[j] != 0.0).count();
        prop_assert_eq!(m.ic1 + tp, 3);
        prop_assert!(m.ic2 <= 5);
        prop_assert!(m.me >= 0.0 && m.mse >= 0.0);
    }

    #[test]
    fn aggregate_permutation_invariant(vals in proptest::collection::vec(0.0f64..10.0, 1..30), rot in 0usize..30) {
        let recs: Vec<MetricsRecord> = vals.iter().enumerate().map(|(r, v)| MetricsRecord {
            method: Method::Ridge, replication: r, mse: *v, me: v * v, ic1: r % 3, ic2: 1, elapsed: 0.0, mse_std: *v,
        }).collect();
        let mut shuffled = recs.clone();
        let len = shuffled.len();
        shuffled.rotate_left(rot % len);
        shuffled.reverse();
        prop_assert_eq!(aggregate(&recs, 0.5).unwrap(), aggregate(&shuffled, 0.5).unwrap());
    }

    #[test]
    fn generation_is_pure(seed in 0u64..1000, r in 0usize..1000) {
        let spec = ScenarioSpec { n: 10, p: 3, beta0: 1.0, beta: vec![1.0, 0.0, 2.0], rho: 0.5, sigma: 1.0, replications: 1, base_seed: seed };
        prop_assert_eq!(gen_dataset(&spec, r).unwrap(), gen_dataset(&spec, r).unwrap());
    }
}

#[test]
fn prestandardized_design_accepted() {
    let x = DMatrix::from_row_slice(4, 1, &[1.0, -1.0, 1.0, -1.0]);
    let y = DVector::from_vec(vec![1.0, -1.0, 0.5, -0.5]);
    assert!(StandardizedDesign::from_standardized(x, y).is_ok());
}
