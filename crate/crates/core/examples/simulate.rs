//! The built-in scenario families, AR(1) predictors and evaluation metrics
//! for one replication.

use penreg::harness::{fit_method, FitOptions};
use penreg::metrics::compute_metrics;
use penreg::model::{standardize, Method};
use penreg::simulate::{builtin_scenarios, gen_ar1_predictors, gen_dataset, ReplicationSeed};

fn main() -> penreg::Result<()> {
    for f in builtin_scenarios() {
        let values: Vec<f64> = f.points.iter().map(|(v, _)| *v).collect();
        println!("{:10} {} = {:?}", f.name, f.sweep_name, values);
    }

    let x = gen_ar1_predictors(50_000, 3, 0.8, ReplicationSeed::new(1, 0))?;
    let c = x.tr_mul(&x) / x.nrows() as f64;
    println!("empirical covariance at rho = 0.8:\n{c:.3}");

    let spec = builtin_scenarios().remove(0).points[5].1.clone();
    let d = gen_dataset(&spec, 0)?;
    let s = standardize(&d)?;
    for m in [Method::Ols, Method::Lasso, Method::NgBic] {
        let fit = fit_method(m, &s, &FitOptions::default())?;
        let r = compute_metrics(&fit, &spec, &d, 0, 0.0)?;
        println!("{m:8} mse {:.4} me {:.4} ic1 {} ic2 {}", r.mse, r.me, r.ic1, r.ic2);
    }
    Ok(())
}
