//! OLS and ridge regression with the penalty chosen by GCV.

use penreg::classic::{default_ridge_grid, fit_ols, fit_ridge_gcv, select_ridge_lambda};
use penreg::model::standardize;
use penreg::simulate::{builtin, gen_dataset};

fn main() -> penreg::Result<()> {
    // highly correlated predictors, where ridge helps most
    let spec = builtin("case1").unwrap().points[10].1.clone();
    let d = gen_dataset(&spec, 0)?;
    let s = standardize(&d)?;

    let ols = fit_ols(&s)?;
    let (ridge, sel) = fit_ridge_gcv(&s)?;
    println!("rho = {}, true beta = {:?}", spec.rho, spec.beta);
    println!("ols   slopes {:.3?}", ols.coef.slopes);
    println!("ridge slopes {:.3?} (lambda = {:.4})", ridge.coef.slopes, sel.lambda_star);

    let grid = default_ridge_grid(s.n(), s.p());
    let sel = select_ridge_lambda(&s, &grid)?;
    for (l, g) in sel.lambda_grid.iter().zip(&sel.gcv_values).step_by(20) {
        println!("  GCV({l:10.4}) = {g:.6e}");
    }
    Ok(())
}
