//! Per-replication evaluation metrics and their Monte Carlo aggregates.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{Dataset, FitResult, Method};
use crate::simulate::ScenarioSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Mse,
    Me,
    Ic1,
    Ic2,
    Elapsed,
    /// `||b - beta||^2` on the standardized scale.
    MseStd,
}

impl Metric {
    pub const ALL: [Metric; 6] = [Metric::Mse, Metric::Me, Metric::Ic1, Metric::Ic2, Metric::Elapsed, Metric::MseStd];

    pub fn name(self) -> &'static str {
        match self {
            Metric::Mse => "mse",
            Metric::Me => "me",
            Metric::Ic1 => "ic1",
            Metric::Ic2 => "ic2",
            Metric::Elapsed => "elapsed",
            Metric::MseStd => "mse_std",
        }
    }

    pub fn from_name(name: &str) -> Option<Metric> {
        Metric::ALL.iter().copied().find(|m| m.name() == name)
    }

    fn index(self) -> usize {
        Metric::ALL.iter().position(|m| *m == self).unwrap()
    }
}

/// Evaluation of one fit against the truth of its replication.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsRecord {
    pub method: Method,
    pub replication: usize,
    pub mse: f64,
    pub me: f64,
    pub ic1: usize,
    pub ic2: usize,
    pub elapsed: f64,
    pub mse_std: f64,
}

impl MetricsRecord {
    pub fn value(&self, m: Metric) -> f64 {
        match m {
            Metric::Mse => self.mse,
            Metric::Me => self.me,
            Metric::Ic1 => self.ic1 as f64,
            Metric::Ic2 => self.ic2 as f64,
            Metric::Elapsed => self.elapsed,
            Metric::MseStd => self.mse_std,
        }
    }
}

/// Support counts of an estimate against the truth: `(ic1, ic2)`.
pub fn incorrect_counts(estimate: &[f64], truth: &[f64]) -> (usize, usize) {
    let mut ic1 = 0;
    let mut ic2 = 0;
    for (b, t) in estimate.iter().zip(truth) {
        match (*t != 0.0, *b != 0.0) {
            (true, false) => ic1 += 1,
            (false, true) => ic2 += 1,
            _ => {}
        }
    }
    (ic1, ic2)
}

/// `d' X'X d` with the raw design of the replication.
pub fn model_error(x: &nalgebra::DMatrix<f64>, diff: &[f64]) -> f64 {
    let d = nalgebra::DVector::from_column_slice(diff);
    let xd = x * d;
    xd.dot(&xd)
}

pub fn compute_metrics(
    fit: &FitResult,
    truth: &ScenarioSpec,
    d: &Dataset,
    replication: usize,
    elapsed: f64,
) -> Result<MetricsRecord> {
    let p = truth.beta.len();
    if fit.coef.slopes.len() != p || d.p() != p {
        return Err(Error::Shape(format!(
            "fit has {} slopes, truth has {p}, data has {}",
            fit.coef.slopes.len(),
            d.p()
        )));
    }
    let diff: Vec<f64> = fit.coef.slopes.iter().zip(&truth.beta).map(|(b, t)| b - t).collect();
    let mse = diff.iter().map(|v| v * v).sum();
    let me = model_error(d.x(), &diff);
    debug_assert!(me >= 0.0);
    let (ic1, ic2) = incorrect_counts(&fit.coef.slopes, &truth.beta);

    let n = d.n() as f64;
    let mse_std = (0..p)
        .map(|j| {
            let col = d.x().column(j);
            let mean = col.mean();
            let sd = (col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt();
            (fit.coef.beta[j] - truth.beta[j] * sd).powi(2)
        })
        .sum();
    Ok(MetricsRecord { method: fit.method, replication, mse, me, ic1, ic2, elapsed, mse_std })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Summary {
    pub mean: f64,
    pub stderr: f64,
}

/// Mean and standard error of each metric over one (method, sweep value) cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AggregateRecord {
    pub method: Method,
    pub sweep_value: f64,
    pub replications: usize,
    /// Set when only one replication was available; `stderr` is then 0.
    pub stderr_undefined: bool,
    summaries: Vec<Summary>,
}

impl AggregateRecord {
    pub fn get(&self, m: Metric) -> Summary {
        self.summaries[m.index()]
    }

    pub fn mean(&self, m: Metric) -> f64 {
        self.get(m).mean
    }

    pub fn stderr(&self, m: Metric) -> f64 {
        self.get(m).stderr
    }
}

/// Mean and `sd / sqrt(k)` of `values`, summed in the given order.
pub fn mean_stderr(values: &[f64]) -> Summary {
    let k = values.len() as f64;
    let mean = values.iter().sum::<f64>() / k;
    if values.len() < 2 {
        return Summary { mean, stderr: 0.0 };
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1.0);
    Summary { mean, stderr: (var / k).sqrt() }
}

/// Aggregates the records of one method at one sweep value. The result does
/// not depend on the order of `records`.
pub fn aggregate(records: &[MetricsRecord], sweep_value: f64) -> Result<AggregateRecord> {
    let first = records.first().ok_or(Error::EmptyGroup)?;
    if let Some(r) = records.iter().find(|r| r.method != first.method) {
        return Err(Error::InvalidParameter(format!(
            "mixed methods in one group: {} and {}",
            first.method, r.method
        )));
    }
    let mut sorted: Vec<&MetricsRecord> = records.iter().collect();
    sorted.sort_by_key(|r| r.replication);
    let summaries = Metric::ALL
        .iter()
        .map(|m| {
            let v: Vec<f64> = sorted.iter().map(|r| r.value(*m)).collect();
            mean_stderr(&v)
        })
        .collect();
    Ok(AggregateRecord {
        method: first.method,
        sweep_value,
        replications: records.len(),
        stderr_undefined: records.len() < 2,
        summaries,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{standardize, CoefficientVector, Tuning};
    use nalgebra::{DMatrix, DVector};

    fn fit_with(slopes: Vec<f64>) -> FitResult {
        FitResult {
            method: Method::Lasso,
            coef: CoefficientVector { beta: slopes.clone(), slopes, intercept: 0.0 },
            tuning: Tuning::default(),
            iterations: 0,
            converged: true,
            warnings: vec![],
        }
    }

    fn truth(beta: Vec<f64>) -> ScenarioSpec {
        ScenarioSpec { n: 4, p: beta.len(), beta0: 0.0, beta, rho: 0.0, sigma: 1.0, replications: 1, base_seed: 0 }
    }

    fn data(p: usize) -> Dataset {
        let x = DMatrix::from_fn(5, p, |i, j| ((i * 3 + j * 7) % 5) as f64 + 0.5 * j as f64 + if i == j { 1.0 } else { 0.0 });
        Dataset::new(x, DVector::from_fn(5, |i, _| i as f64)).unwrap()
    }

    fn record(rep: usize, mse: f64) -> MetricsRecord {
        MetricsRecord { method: Method::Ols, replication: rep, mse, me: 2.0 * mse, ic1: rep % 2, ic2: 0, elapsed: 0.1, mse_std: mse }
    }

    #[test]
    fn exact_estimate_scores_zero() {
        let b = vec![3.0, 1.5, 0.0, 0.0, 2.0, 0.0, 0.0, 0.0];
        let m = compute_metrics(&fit_with(b.clone()), &truth(b), &data(8), 0, 0.0).unwrap();
        assert_eq!((m.mse, m.me, m.ic1, m.ic2), (0.0, 0.0, 0, 0));
    }

    #[test]
    fn incorrect_counts_example() {
        let b = vec![3.0, 1.5, 0.0, 0.0, 2.0, 0.0, 0.0, 0.0];
        let est = vec![2.9, 0.0, 0.0, 0.0, 1.8, 0.0, 0.0, 0.1];
        let m = compute_metrics(&fit_with(est), &truth(b), &data(8), 0, 0.0).unwrap();
        assert_eq!((m.ic1, m.ic2), (1, 1));
    }

    #[test]
    fn unit_error_on_first_coordinate() {
        let d = data(3);
        let m = compute_metrics(&fit_with(vec![2.0, 1.0, 0.0]), &truth(vec![1.0, 1.0, 0.0]), &d, 0, 0.0).unwrap();
        assert_eq!(m.mse, 1.0);
        let xtx = d.x().tr_mul(d.x());
        assert!((m.me - xtx[(0, 0)]).abs() < 1e-12);
    }

    #[test]
    fn standardized_mse_uses_column_scales() {
        let d = data(3);
        let s = standardize(&d).unwrap();
        let t = truth(vec![1.0, -2.0, 0.5]);
        let beta_std: Vec<f64> = t.beta.iter().zip(s.col_scales().iter()).map(|(b, sc)| b * sc).collect();
        let mut f = fit_with(t.beta.clone());
        f.coef.beta = beta_std;
        let m = compute_metrics(&f, &t, &d, 0, 0.0).unwrap();
        assert!(m.mse_std < 1e-20);
    }

    #[test]
    fn aggregate_arithmetic() {
        let a = aggregate(&[record(0, 1.0), record(1, 3.0)], 0.5).unwrap();
        assert_eq!(a.mean(Metric::Mse), 2.0);
        assert!((a.stderr(Metric::Mse) - 1.0).abs() < 1e-15);
        assert!(!a.stderr_undefined);

        let one = aggregate(&[record(4, 7.0)], 0.0).unwrap();
        assert_eq!(one.mean(Metric::Mse), 7.0);
        assert_eq!(one.stderr(Metric::Mse), 0.0);
        assert!(one.stderr_undefined);

        assert!(matches!(aggregate(&[], 0.0), Err(Error::EmptyGroup)));
    }

    #[test]
    fn aggregate_is_order_independent() {
        let recs: Vec<_> = (0..13).map(|r| record(r, 0.1 * r as f64 + 1.0 / (r as f64 + 3.0))).collect();
        let mut rev = recs.clone();
        rev.reverse();
        rev.swap(2, 9);
        assert_eq!(aggregate(&recs, 1.0).unwrap(), aggregate(&rev, 1.0).unwrap());
    }
}
