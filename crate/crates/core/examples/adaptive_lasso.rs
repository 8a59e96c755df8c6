//! Two-stage adaptive lasso with cross-validation at both stages.

use penreg::adaptive::fit_adaptive_lasso;
use penreg::model::standardize;
use penreg::simulate::{builtin, gen_dataset};

fn main() -> penreg::Result<()> {
    let spec = builtin("case3").unwrap().points[5].1.clone();
    let s = standardize(&gen_dataset(&spec, 4)?)?;
    let ada = fit_adaptive_lasso(&s, 10, 5)?;
    println!("stage 1 lambda = {:.4}", ada.first_stage.lambda_min);
    println!("weights {:.3?}", ada.weights);
    if let Some(cv) = &ada.second_stage {
        println!("stage 2 lambda = {:.4}", cv.lambda_min);
    }
    println!("support {:?}, slopes {:.3?}", ada.fit.support(), ada.fit.coef.slopes);
    println!("true beta {:?}", spec.beta);
    Ok(())
}
