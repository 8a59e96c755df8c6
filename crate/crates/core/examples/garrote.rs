//! Nonnegative garrote (Cp/AIC and BIC rules) and its ridge-initialized
//! variant, with the KKT certificate of the underlying quadratic program.

use nalgebra::DVector;
use penreg::classic::{estimate_sigma2, ols_coefficients};
use penreg::garrote::{fit_garrote, fit_ridge_garrote, solve_nn_qp, Criterion, GarroteProblem};
use penreg::model::standardize;
use penreg::simulate::{builtin, gen_dataset};

fn main() -> penreg::Result<()> {
    let spec = builtin("case1").unwrap().points[5].1.clone();
    let s = standardize(&gen_dataset(&spec, 1)?)?;

    for (name, fit) in [
        ("ng-aic", fit_garrote(&s, Criterion::CpAic)?),
        ("ng-bic", fit_garrote(&s, Criterion::Bic)?),
        ("ngridge-bic", fit_ridge_garrote(&s, Criterion::Bic)?),
    ] {
        println!("{name:12} support {:?} slopes {:.3?}", fit.support(), fit.coef.slopes);
    }

    let sigma2 = estimate_sigma2(&s)?;
    let init = ols_coefficients(&s)?;
    let lambda = Criterion::Bic.lambda(sigma2.sigma2_hat, s.n());
    let prob = GarroteProblem::new(s.x(), s.y(), &init, DVector::from_element(s.p(), 1.0), lambda)?;
    let sol = solve_nn_qp(&prob)?;
    println!(
        "sigma2_hat = {:.4} (dof {}), lambda = {lambda:.4}, u = {:.3?}",
        sigma2.sigma2_hat,
        sigma2.dof,
        sol.u.as_slice()
    );
    println!("KKT residual {:.2e} <= tolerance {:.2e} after {} sweeps", sol.kkt_residual, prob.tolerance(), sol.sweeps);
    Ok(())
}
