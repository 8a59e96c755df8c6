//! SCAD and MCP with gamma chosen on a ladder by BIC subject to the
//! convexity diagnostic, and lambda chosen by cross-validation.

use penreg::model::standardize;
use penreg::penalty::{univariate_penalized_min, Family, PenaltySpec};
use penreg::simulate::{builtin, gen_dataset};
use penreg::tuning::fit_nonconvex;

fn main() -> penreg::Result<()> {
    for z in [0.5, 1.5, 3.0, 6.0] {
        let scad = univariate_penalized_min(z, 1.0, &PenaltySpec::scad(1.0, 3.7))?;
        let mcp = univariate_penalized_min(z, 1.0, &PenaltySpec::mcp(1.0, 3.0))?;
        println!("z = {z}: scad {scad:.4}, mcp {mcp:.4}");
    }

    let spec = builtin("case1").unwrap().points[8].1.clone();
    let s = standardize(&gen_dataset(&spec, 3)?)?;
    for family in [Family::Scad, Family::Mcp] {
        let (fit, sel) = fit_nonconvex(&s, family, 10, 11)?;
        println!("{}:", family.name());
        for k in 0..sel.gamma_ladder.len() {
            println!(
                "  gamma {:5.2}  min BIC {:9.3} at lambda {:.4}  convex {}",
                sel.gamma_ladder[k], sel.bic_values[k], sel.bic_lambdas[k], sel.convexity_flags[k]
            );
        }
        println!("  gamma* = {}, lambda = {:.4}, support {:?}", sel.gamma_star, sel.cv.lambda_min, fit.support());
        println!("  slopes {:.3?}, warnings {:?}", fit.coef.slopes, fit.warnings);
    }
    Ok(())
}
