//! Lasso and elastic-net regularization paths, and a cross-validated lasso.

use penreg::model::standardize;
use penreg::path::{fit_path, lambda_max};
use penreg::penalty::PenaltySpec;
use penreg::simulate::{builtin, gen_dataset};
use penreg::tuning::fit_cv;

fn main() -> penreg::Result<()> {
    let spec = builtin("case1").unwrap().points[5].1.clone();
    let s = standardize(&gen_dataset(&spec, 2)?)?;

    let lasso = PenaltySpec::lasso(1.0);
    println!("lambda_max = {:.4}", lambda_max(&s, &lasso));
    let path = fit_path(&s, &lasso, 20)?;
    for k in 0..path.len() {
        let b: Vec<String> = path.coefs[k].iter().map(|v| format!("{v:6.3}")).collect();
        println!("lambda {:8.4}  df {}  [{}]", path.lambdas[k], path.dfs[k], b.join(" "));
    }

    let (fit, cv) = fit_cv(&s, &lasso, 10, 7)?;
    println!("cv lasso: lambda_min = {:.4}, support {:?}", cv.lambda_min, fit.support());
    let (enet, cv) = fit_cv(&s, &PenaltySpec::enet_tied(1.0), 10, 7)?;
    println!("cv enet (lambda2 = lambda1): lambda = {:.4}, support {:?}", cv.lambda_min, enet.support());
    Ok(())
}
