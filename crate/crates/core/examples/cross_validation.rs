//! K-fold cross-validation curve for the lasso and the BIC along its path.

use penreg::model::standardize;
use penreg::path::fit_path;
use penreg::penalty::PenaltySpec;
use penreg::simulate::{builtin, gen_dataset};
use penreg::tuning::{bic_from_rss, kfold_cv};

fn main() -> penreg::Result<()> {
    let spec = builtin("case2").unwrap().points[5].1.clone();
    let s = standardize(&gen_dataset(&spec, 6)?)?;
    let lasso = PenaltySpec::lasso(1.0);
    let cv = kfold_cv(&s, &lasso, 10, 3)?;
    let path = fit_path(&s, &lasso, 100)?;
    for k in (0..cv.lambdas.len()).step_by(10) {
        let bic = bic_from_rss(s.n(), s.rss(&path.coefs[k]), path.dfs[k]);
        println!(
            "lambda {:8.4}  cv {:.4} ± {:.4}  df {}  bic {bic:8.3}",
            cv.lambdas[k], cv.cv_mean[k], cv.cv_se[k], path.dfs[k]
        );
    }
    println!("lambda_min = {:.4} (index {})", cv.lambda_min, cv.index_min);
    Ok(())
}
