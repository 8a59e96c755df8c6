//! Benchmark plumbing: method dispatch, CSV input, scenario configs, the
//! replication runner and the output files written by the `penreg` binary.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::adaptive::fit_adaptive_lasso_with;
use crate::classic::{fit_ols, fit_ridge, fit_ridge_gcv};
use crate::error::{Error, Result};
use crate::garrote::{fit_garrote, fit_ridge_garrote, Criterion};
use crate::metrics::{aggregate, compute_metrics, mean_stderr, AggregateRecord, Metric, MetricsRecord};
use crate::model::{standardize, Dataset, FitResult, FitWarning, Method, StandardizedDesign, Tuning};
use crate::path::fit_single;
use crate::penalty::{Family, PenaltySpec};
use crate::simulate::{
    builtin, gen_dataset, ReplicationSeed, ScenarioFamily, ScenarioSpec, DEFAULT_REPLICATIONS, GENERATOR,
};
use crate::tuning::{fit_cv_with, fit_nonconvex_with, CvFolds, DEFAULT_FOLDS};

/// Header of every bench metric CSV.
pub const BENCH_HEADER: &str = "method,sweep_name,sweep_value,metric,mean,stderr,replications";

/// Metrics drawn on a log-scaled y axis in the plot script.
pub const LOG_SCALE_METRICS: [Metric; 4] = [Metric::Mse, Metric::Me, Metric::Elapsed, Metric::MseStd];

/// Salt for the fold-assignment seed of a replication.
const FOLD_SALT: u64 = 1;

/// Per-fit options shared by every method.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    pub folds: usize,
    pub fold_seed: u64,
    /// Fixed penalty level instead of the method's tuning rule.
    pub lambda: Option<f64>,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions { folds: DEFAULT_FOLDS, fold_seed: 0, lambda: None }
    }
}

/// Fits `method` with its tuning rule: GCV for ridge, Cp/AIC or BIC for the
/// garrotes, K-fold CV for the shrinkage families (tied `lambda2 = lambda1`
/// for enet), and the gamma ladder plus CV for SCAD and MCP.
pub fn fit_method(method: Method, s: &StandardizedDesign, opts: &FitOptions) -> Result<FitResult> {
    if let Some(lambda) = opts.lambda {
        return fit_method_at(method, s, opts, lambda);
    }
    let cv = || CvFolds::new(s, opts.folds.min(s.n()), opts.fold_seed);
    match method {
        Method::Ols => fit_ols(s),
        Method::Ridge => Ok(fit_ridge_gcv(s)?.0),
        Method::NgAic => fit_garrote(s, Criterion::CpAic),
        Method::NgBic => fit_garrote(s, Criterion::Bic),
        Method::NgRidgeBic => fit_ridge_garrote(s, Criterion::Bic),
        Method::Lasso => Ok(fit_cv_with(s, &PenaltySpec::lasso(1.0), &cv()?)?.0),
        Method::Enet => Ok(fit_cv_with(s, &PenaltySpec::enet_tied(1.0), &cv()?)?.0),
        Method::AdaLasso => Ok(fit_adaptive_lasso_with(s, &cv()?)?.fit),
        Method::Scad => Ok(fit_nonconvex_with(s, Family::Scad, &cv()?)?.0),
        Method::Mcp => Ok(fit_nonconvex_with(s, Family::Mcp, &cv()?)?.0),
    }
}

fn fit_method_at(method: Method, s: &StandardizedDesign, opts: &FitOptions, lambda: f64) -> Result<FitResult> {
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(Error::InvalidParameter(format!("lambda must be finite and >= 0, got {lambda}")));
    }
    let gamma = |f: Family| f.default_gamma().unwrap();
    match method {
        Method::Ridge => fit_ridge(s, lambda),
        Method::Lasso => fit_single(s, &PenaltySpec::lasso(lambda)),
        Method::Enet => fit_single(s, &PenaltySpec::enet_tied(lambda)),
        Method::Scad => fit_single(s, &PenaltySpec::scad(lambda, gamma(Family::Scad))),
        Method::Mcp => fit_single(s, &PenaltySpec::mcp(lambda, gamma(Family::Mcp))),
        Method::AdaLasso => {
            let stage1 = fit_adaptive_lasso_with(s, &CvFolds::new(s, opts.folds.min(s.n()), opts.fold_seed)?)?;
            if stage1.fit.warnings.contains(&FitWarning::AllZeroFirstStage) {
                return Ok(stage1.fit);
            }
            fit_single(s, &PenaltySpec::adaptive(lambda, stage1.weights))
        }
        Method::Ols | Method::NgAic | Method::NgBic | Method::NgRidgeBic => {
            Err(Error::InvalidParameter(format!("--lambda does not apply to method {method}")))
        }
    }
}

/// A CSV data set: numeric columns, one of which is the response.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvData {
    pub predictors: Vec<String>,
    pub response: String,
    pub data: Dataset,
}

pub fn read_csv(path: &Path, response: &str) -> Result<CsvData> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let headers: Vec<String> = rdr
        .headers()
        .map_err(|e| Error::Parse(e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect();
    let ycol = headers
        .iter()
        .position(|h| h == response)
        .ok_or_else(|| Error::InvalidParameter(format!("response column `{response}` not in header")))?;
    let p = headers.len() - 1;
    if p == 0 {
        return Err(Error::Shape("no predictor columns".into()));
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::Parse(e.to_string()))?;
        let mut row = Vec::with_capacity(p);
        for (j, field) in rec.iter().enumerate() {
            let v: f64 = field
                .parse()
                .map_err(|_| Error::Parse(format!("row {}: `{field}` in column `{}` is not a number", line + 2, headers[j])))?;
            if j == ycol {
                ys.push(v);
            } else {
                row.push(v);
            }
        }
        xs.push(row);
    }
    let x = DMatrix::from_fn(xs.len(), p, |i, j| xs[i][j]);
    let data = Dataset::new(x, DVector::from_vec(ys))?;
    let mut predictors = headers;
    let response = predictors.remove(ycol);
    Ok(CsvData { predictors, response, data })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NamedValue {
    pub name: String,
    pub value: f64,
}

/// Machine-readable output of `penreg fit`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitRecord {
    pub method: Method,
    pub n: usize,
    pub p: usize,
    pub response: String,
    pub intercept: f64,
    pub coefficients: Vec<NamedValue>,
    pub support: Vec<String>,
    pub zeros: Vec<String>,
    pub tuning: Tuning,
    pub iterations: usize,
    pub converged: bool,
    pub warnings: Vec<FitWarning>,
}

pub fn fit_record(input: &CsvData, fit: &FitResult) -> FitRecord {
    let coefficients = input
        .predictors
        .iter()
        .zip(&fit.coef.slopes)
        .map(|(name, v)| NamedValue { name: name.clone(), value: *v })
        .collect();
    let (support, zeros): (Vec<_>, Vec<_>) =
        input.predictors.iter().zip(&fit.coef.slopes).partition(|(_, v)| **v != 0.0);
    FitRecord {
        method: fit.method,
        n: input.data.n(),
        p: input.data.p(),
        response: input.response.clone(),
        intercept: fit.coef.intercept,
        coefficients,
        support: support.into_iter().map(|(n, _)| n.clone()).collect(),
        zeros: zeros.into_iter().map(|(n, _)| n.clone()).collect(),
        tuning: fit.tuning.clone(),
        iterations: fit.iterations,
        converged: fit.converged,
        warnings: fit.warnings.clone(),
    }
}

/// Reads `input`, standardizes it and fits `method`.
pub fn fit_csv(path: &Path, response: &str, method: Method, opts: &FitOptions) -> Result<FitRecord> {
    let input = read_csv(path, response)?;
    let s = standardize(&input.data)?;
    let fit = fit_method(method, &s, opts)?;
    Ok(fit_record(&input, &fit))
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
enum BetaEntry {
    Value(f64),
    Symbol(String),
}

/// JSON scenario file. `beta` entries may be the string `"z"`, replaced by
/// each value of `z_grid`. With `p_grid`, `beta` lists the leading
/// coefficients and is padded with zeros up to each `p`. At most one of
/// `rho_grid`, `z_grid`, `p_grid` may be given.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default)]
    pub name: Option<String>,
    pub n: usize,
    #[serde(default)]
    pub p: Option<usize>,
    #[serde(default)]
    pub beta0: f64,
    beta: Vec<BetaEntry>,
    #[serde(default)]
    pub rho: Option<f64>,
    #[serde(default)]
    pub rho_grid: Option<Vec<f64>>,
    pub sigma: f64,
    #[serde(default)]
    pub z_grid: Option<Vec<f64>>,
    #[serde(default)]
    pub p_grid: Option<Vec<usize>>,
    #[serde(default)]
    pub replications: Option<usize>,
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("scenario config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    fn beta_at(&self, z: Option<f64>) -> Result<Vec<f64>> {
        self.beta
            .iter()
            .map(|e| match (e, z) {
                (BetaEntry::Value(v), _) => Ok(*v),
                (BetaEntry::Symbol(s), Some(z)) if s == "z" => Ok(z),
                (BetaEntry::Symbol(s), _) => Err(Error::Parse(format!("beta entry `{s}` needs a z_grid"))),
            })
            .collect()
    }

    pub fn into_family(self) -> Result<ScenarioFamily> {
        let sweeps = [self.rho_grid.is_some(), self.z_grid.is_some(), self.p_grid.is_some()];
        if sweeps.iter().filter(|b| **b).count() > 1 {
            return Err(Error::InvalidParameter("give at most one of rho_grid, z_grid, p_grid".into()));
        }
        if self.rho.is_some() && self.rho_grid.is_some() {
            return Err(Error::InvalidParameter("give rho or rho_grid, not both".into()));
        }
        let reps = self.replications.unwrap_or(DEFAULT_REPLICATIONS);
        let rho = self.rho.unwrap_or(0.0);
        let base = |p: usize, beta: Vec<f64>, rho: f64| ScenarioSpec {
            n: self.n,
            p,
            beta0: self.beta0,
            beta,
            rho,
            sigma: self.sigma,
            replications: reps,
            base_seed: 0,
        };
        let fixed_beta = |z: Option<f64>| -> Result<Vec<f64>> {
            let b = self.beta_at(z)?;
            if let Some(p) = self.p {
                if p != b.len() {
                    return Err(Error::Shape(format!("beta has {} entries, p = {p}", b.len())));
                }
            }
            Ok(b)
        };
        let (sweep_name, points) = if let Some(grid) = &self.rho_grid {
            let b = fixed_beta(None)?;
            ("rho", grid.iter().map(|&r| (r, base(b.len(), b.clone(), r))).collect::<Vec<_>>())
        } else if let Some(grid) = &self.z_grid {
            let pts = grid
                .iter()
                .map(|&z| {
                    let b = fixed_beta(Some(z))?;
                    Ok((z, base(b.len(), b, rho)))
                })
                .collect::<Result<Vec<_>>>()?;
            ("z", pts)
        } else if let Some(grid) = &self.p_grid {
            let lead = self.beta_at(None)?;
            let pts = grid
                .iter()
                .map(|&p| {
                    if p < lead.len() {
                        return Err(Error::Shape(format!("p = {p} is shorter than beta ({})", lead.len())));
                    }
                    let mut b = lead.clone();
                    b.resize(p, 0.0);
                    Ok((p as f64, base(p, b, rho)))
                })
                .collect::<Result<Vec<_>>>()?;
            ("p", pts)
        } else {
            let b = fixed_beta(None)?;
            ("rho", vec![(rho, base(b.len(), b, rho))])
        };
        if points.is_empty() {
            return Err(Error::InvalidParameter("sweep grid is empty".into()));
        }
        for (_, s) in &points {
            s.validate()?;
        }
        Ok(ScenarioFamily {
            name: self.name.clone().unwrap_or_else(|| "custom".into()),
            description: format!("custom scenario, n = {}, sigma = {}", self.n, self.sigma),
            sweep_name: sweep_name.into(),
            points,
        })
    }
}

/// Where the scenario of a run comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum ScenarioSource {
    Builtin(String),
    Config(PathBuf),
}

impl ScenarioSource {
    pub fn resolve(&self) -> Result<ScenarioFamily> {
        match self {
            ScenarioSource::Builtin(name) => builtin(name)
                .ok_or_else(|| Error::InvalidParameter(format!("unknown scenario `{name}`"))),
            ScenarioSource::Config(path) => ScenarioConfig::load(path)?.into_family(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub scenario: ScenarioSource,
    pub methods: Vec<Method>,
    pub replications: Option<usize>,
    pub base_seed: u64,
    pub workers: usize,
    pub folds: usize,
    pub outdir: PathBuf,
}

impl RunConfig {
    pub fn new(scenario: ScenarioSource, outdir: impl Into<PathBuf>) -> Self {
        RunConfig {
            scenario,
            methods: Method::ALL.to_vec(),
            replications: None,
            base_seed: 0,
            workers: 1,
            folds: DEFAULT_FOLDS,
            outdir: outdir.into(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.methods.is_empty() {
            return Err(Error::InvalidParameter("method list is empty".into()));
        }
        if self.workers < 1 {
            return Err(Error::InvalidParameter("workers must be >= 1".into()));
        }
        if self.replications == Some(0) {
            return Err(Error::InvalidParameter("replications must be >= 1".into()));
        }
        Ok(())
    }

    /// The scenario family with the replication and seed overrides applied.
    pub fn family(&self) -> Result<ScenarioFamily> {
        let mut f = self.scenario.resolve()?.with_seed(self.base_seed);
        if let Some(r) = self.replications {
            f = f.with_replications(r);
        }
        Ok(f)
    }
}

/// A failed (method, replication) fit.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitFailure {
    pub sweep_value: f64,
    pub method: Method,
    pub replication: usize,
    pub message: String,
}

/// Everything one sweep point produced.
#[derive(Debug, Clone, PartialEq)]
pub struct PointOutcome {
    pub sweep_value: f64,
    pub records: Vec<MetricsRecord>,
    pub failures: Vec<FitFailure>,
}

/// Runs every method on replication `r` of `spec`. Each timed call covers
/// standardization, fold construction and the fit with its tuning rule.
pub fn run_replication(
    spec: &ScenarioSpec,
    sweep_value: f64,
    r: usize,
    methods: &[Method],
    folds: usize,
) -> (Vec<MetricsRecord>, Vec<FitFailure>) {
    let mut records = Vec::with_capacity(methods.len());
    let mut failures = Vec::new();
    let fail = |method, message: String| FitFailure { sweep_value, method, replication: r, message };
    let d = match gen_dataset(spec, r) {
        Ok(d) => d,
        Err(e) => {
            failures.extend(methods.iter().map(|m| fail(*m, e.to_string())));
            return (records, failures);
        }
    };
    let opts = FitOptions {
        folds,
        fold_seed: ReplicationSeed::new(spec.base_seed, r).derived(FOLD_SALT),
        lambda: None,
    };
    for &m in methods {
        let t0 = Instant::now();
        let fit = standardize(&d).and_then(|s| fit_method(m, &s, &opts));
        let elapsed = t0.elapsed().as_secs_f64();
        match fit.and_then(|f| compute_metrics(&f, spec, &d, r, elapsed)) {
            Ok(rec) => records.push(rec),
            Err(e) => failures.push(fail(m, e.to_string())),
        }
    }
    (records, failures)
}

fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidParameter(format!("worker pool: {e}")))
}

/// Runs all replications of every sweep point. Results are merged in
/// replication order, so the worker count does not affect them.
pub fn run_family(family: &ScenarioFamily, methods: &[Method], workers: usize, folds: usize) -> Result<Vec<PointOutcome>> {
    let pool = pool(workers)?;
    let mut out = Vec::with_capacity(family.points.len());
    for (v, spec) in &family.points {
        let reps: Vec<_> = pool.install(|| {
            (0..spec.replications)
                .into_par_iter()
                .map(|r| run_replication(spec, *v, r, methods, folds))
                .collect()
        });
        let mut records = Vec::new();
        let mut failures = Vec::new();
        for (rec, fail) in reps {
            records.extend(rec);
            failures.extend(fail);
        }
        out.push(PointOutcome { sweep_value: *v, records, failures });
    }
    Ok(out)
}

/// Aggregates per (method, sweep value); methods with no successful fit at a
/// point are left out.
pub fn aggregate_outcomes(outcomes: &[PointOutcome], methods: &[Method]) -> Result<Vec<AggregateRecord>> {
    let mut out = Vec::new();
    for m in methods {
        for o in outcomes {
            let recs: Vec<MetricsRecord> = o.records.iter().filter(|r| r.method == *m).cloned().collect();
            if !recs.is_empty() {
                out.push(aggregate(&recs, o.sweep_value)?);
            }
        }
    }
    Ok(out)
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Bench CSV for one metric, rows in method order then sweep order.
pub fn metric_csv(aggs: &[AggregateRecord], sweep_name: &str, metric: Metric) -> String {
    let mut s = String::from(BENCH_HEADER);
    s.push('\n');
    for a in aggs {
        let sm = a.get(metric);
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{}",
            a.method,
            sweep_name,
            a.sweep_value,
            metric.name(),
            sm.mean,
            sm.stderr,
            a.replications
        );
    }
    s
}

pub fn errors_csv(outcomes: &[PointOutcome]) -> String {
    let mut s = String::from("sweep_value,method,replication,error\n");
    for o in outcomes {
        for f in &o.failures {
            let _ = writeln!(s, "{},{},{},{}", f.sweep_value, f.method, f.replication, csv_field(&f.message));
        }
    }
    s
}

/// Gnuplot script with one plot per metric, one curve per method.
pub fn gnuplot_script(family: &ScenarioFamily, methods: &[Method]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# {}", family.description);
    let _ = writeln!(s, "set datafile separator ','");
    let _ = writeln!(s, "set key outside right");
    let _ = writeln!(s, "set terminal pngcairo size 900,600");
    for m in Metric::ALL {
        let file = format!("{}_{}.csv", family.name, m.name());
        let _ = writeln!(s, "\nset output '{}_{}.png'", family.name, m.name());
        let _ = writeln!(s, "set title '{} {}'", family.name, m.name());
        let _ = writeln!(s, "set xlabel '{}'", family.sweep_name);
        let _ = writeln!(s, "set ylabel '{}'", m.name());
        if LOG_SCALE_METRICS.contains(&m) {
            let _ = writeln!(s, "set logscale y");
        } else {
            let _ = writeln!(s, "unset logscale y");
        }
        let curves: Vec<String> = methods
            .iter()
            .map(|meth| {
                format!(
                    "'{file}' using 3:(strcol(1) eq '{meth}' ? $5 : 1/0) skip 1 with linespoints title '{meth}'"
                )
            })
            .collect();
        let _ = writeln!(s, "plot {}", curves.join(", \\\n     "));
    }
    s
}

/// Best-effort description of the machine for timing metadata.
pub fn hardware_description() -> String {
    let cpu = fs::read_to_string("/proc/cpuinfo")
        .ok()
        .and_then(|t| {
            t.lines()
                .find(|l| l.starts_with("model name"))
                .and_then(|l| l.split(':').nth(1))
                .map(|v| v.trim().to_string())
        })
        .unwrap_or_else(|| "unknown cpu".into());
    let threads = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1);
    format!("{cpu}; {threads} hardware threads; {}-{}", std::env::consts::ARCH, std::env::consts::OS)
}

#[derive(Debug, Clone, Serialize)]
struct BenchMeta<'a> {
    family: &'a str,
    description: &'a str,
    sweep_name: &'a str,
    sweep_values: Vec<f64>,
    methods: Vec<&'static str>,
    replications: Vec<usize>,
    base_seed: u64,
    folds: usize,
    generator: &'static str,
    log_scale_metrics: Vec<&'static str>,
    failures: usize,
    hardware: String,
}

/// Files written by [`cmd_bench`].
#[derive(Debug, Clone)]
pub struct BenchOutput {
    pub aggregates: Vec<AggregateRecord>,
    pub outcomes: Vec<PointOutcome>,
    pub metric_files: BTreeMap<Metric, PathBuf>,
    pub failures: usize,
}

fn write(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

/// Runs a scenario family and writes `<family>_<metric>.csv` for every
/// metric, `<family>_errors.csv`, `<family>_meta.json` and `<family>.gp`.
pub fn cmd_bench(cfg: &RunConfig) -> Result<BenchOutput> {
    cfg.validate()?;
    let family = cfg.family()?;
    fs::create_dir_all(&cfg.outdir).map_err(|e| Error::Io(format!("{}: {e}", cfg.outdir.display())))?;
    let outcomes = run_family(&family, &cfg.methods, cfg.workers, cfg.folds)?;
    let aggregates = aggregate_outcomes(&outcomes, &cfg.methods)?;
    let mut metric_files = BTreeMap::new();
    for m in Metric::ALL {
        let path = cfg.outdir.join(format!("{}_{}.csv", family.name, m.name()));
        write(&path, &metric_csv(&aggregates, &family.sweep_name, m))?;
        metric_files.insert(m, path);
    }
    write(&cfg.outdir.join(format!("{}_errors.csv", family.name)), &errors_csv(&outcomes))?;
    let failures = outcomes.iter().map(|o| o.failures.len()).sum();
    let meta = BenchMeta {
        family: &family.name,
        description: &family.description,
        sweep_name: &family.sweep_name,
        sweep_values: family.points.iter().map(|(v, _)| *v).collect(),
        methods: cfg.methods.iter().map(|m| m.tag()).collect(),
        replications: family.points.iter().map(|(_, s)| s.replications).collect(),
        base_seed: cfg.base_seed,
        folds: cfg.folds,
        generator: GENERATOR,
        log_scale_metrics: LOG_SCALE_METRICS.iter().map(|m| m.name()).collect(),
        failures,
        hardware: hardware_description(),
    };
    let json = serde_json::to_string_pretty(&meta).map_err(|e| Error::Parse(e.to_string()))?;
    write(&cfg.outdir.join(format!("{}_meta.json", family.name)), &json)?;
    write(&cfg.outdir.join(format!("{}.gp", family.name)), &gnuplot_script(&family, &cfg.methods))?;
    Ok(BenchOutput { aggregates, outcomes, metric_files, failures })
}

/// One row of the timing table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimingRow {
    pub method: Method,
    pub mean_seconds: f64,
    pub stderr_seconds: f64,
    pub replications: usize,
    pub stderr_undefined: bool,
}

#[derive(Debug, Clone)]
pub struct TimingOutput {
    pub rows: Vec<TimingRow>,
    pub hardware: String,
    pub failures: Vec<FitFailure>,
    pub path: PathBuf,
}

pub fn timing_csv(rows: &[TimingRow]) -> String {
    let mut s = String::from("method,mean_seconds,stderr_seconds,replications,stderr_undefined\n");
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{}",
            r.method, r.mean_seconds, r.stderr_seconds, r.replications, r.stderr_undefined
        );
    }
    s
}

/// Wall-clock study on the first point of the scenario (the built-in
/// `timing` family by default). Writes `timing.csv` and `timing_meta.json`.
pub fn cmd_time(cfg: &RunConfig) -> Result<TimingOutput> {
    cfg.validate()?;
    let family = cfg.family()?;
    fs::create_dir_all(&cfg.outdir).map_err(|e| Error::Io(format!("{}: {e}", cfg.outdir.display())))?;
    let first = ScenarioFamily { points: family.points[..1].to_vec(), ..family.clone() };
    let outcomes = run_family(&first, &cfg.methods, cfg.workers, cfg.folds)?;
    let o = &outcomes[0];
    let mut rows = Vec::new();
    for &m in &cfg.methods {
        let mut recs: Vec<&MetricsRecord> = o.records.iter().filter(|r| r.method == m).collect();
        if recs.is_empty() {
            continue;
        }
        recs.sort_by_key(|r| r.replication);
        let t: Vec<f64> = recs.iter().map(|r| r.elapsed).collect();
        let sm = mean_stderr(&t);
        rows.push(TimingRow {
            method: m,
            mean_seconds: sm.mean,
            stderr_seconds: sm.stderr,
            replications: t.len(),
            stderr_undefined: t.len() < 2,
        });
    }
    let hardware = hardware_description();
    let path = cfg.outdir.join("timing.csv");
    write(&path, &timing_csv(&rows))?;
    let meta = serde_json::json!({
        "scenario": first.name,
        "sweep_value": o.sweep_value,
        "hardware": hardware,
        "workers": cfg.workers,
        "base_seed": cfg.base_seed,
        "generator": GENERATOR,
        "failures": o.failures.len(),
    });
    write(&cfg.outdir.join("timing_meta.json"), &serde_json::to_string_pretty(&meta).unwrap())?;
    Ok(TimingOutput { rows, hardware, failures: o.failures.clone(), path })
}

/// Human-readable listing of scenario families.
pub fn describe_families(families: &[ScenarioFamily]) -> String {
    let mut s = String::new();
    for f in families {
        let (_, spec) = &f.points[0];
        let values: Vec<String> = f.points.iter().map(|(v, _)| v.to_string()).collect();
        let _ = writeln!(s, "{}: {}", f.name, f.description);
        let _ = writeln!(s, "  sweep {} = [{}]", f.sweep_name, values.join(", "));
        let _ = writeln!(
            s,
            "  n = {}, beta0 = {}, beta = {:?}{}, replications = {}",
            spec.n,
            spec.beta0,
            &spec.beta[..spec.beta.len().min(10)],
            if spec.beta.len() > 10 { " + zeros" } else { "" },
            spec.replications
        );
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulate::builtin_scenarios;
    use std::io::Write;

    #[test]
    fn config_with_z_grid() {
        let cfg = ScenarioConfig::from_json(
            r#"{"n": 40, "beta0": 4, "beta": [3, 1.5, "z", "z", 2, "z", "z", "z"],
                "rho": 0.5, "sigma": 1, "z_grid": [0, 0.5], "replications": 3}"#,
        )
        .unwrap();
        let f = cfg.into_family().unwrap();
        assert_eq!(f.sweep_name, "z");
        assert_eq!(f.points[1].1.beta, vec![3.0, 1.5, 0.5, 0.5, 2.0, 0.5, 0.5, 0.5]);
        assert_eq!(f.points[0].1.replications, 3);
        assert_eq!(f.points[0].1.rho, 0.5);
    }

    #[test]
    fn config_with_p_grid_pads_beta() {
        let f = ScenarioConfig::from_json(r#"{"n": 50, "beta": [1, 1], "rho": 0.5, "sigma": 1, "p_grid": [3, 5]}"#)
            .unwrap()
            .into_family()
            .unwrap();
        assert_eq!(f.points[1].1.beta, vec![1.0, 1.0, 0.0, 0.0, 0.0]);
        assert_eq!(f.points[1].0, 5.0);
    }

    #[test]
    fn config_rejects_bad_input() {
        let bad = [
            r#"{"n": 40, "beta": [1, "z"], "sigma": 1}"#,
            r#"{"n": 40, "beta": [1], "sigma": 1, "rho_grid": [0], "z_grid": [0]}"#,
            r#"{"n": 40, "beta": [1], "sigma": 1, "rho": 1.0}"#,
            r#"{"n": 40, "p": 3, "beta": [1], "sigma": 1}"#,
            r#"{"n": 40, "beta": [1], "sigma": 1, "colour": 2}"#,
        ];
        for text in bad {
            let r = ScenarioConfig::from_json(text).and_then(|c| c.into_family());
            assert!(r.is_err(), "{text}");
        }
    }

    #[test]
    fn csv_round_trip() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "a, y ,b").unwrap();
        for i in 0..12 {
            let a = i as f64;
            let b = ((i * 7) % 5) as f64;
            writeln!(f, "{a},{},{b}", 1.0 + 2.0 * a - b).unwrap();
        }
        let d = read_csv(f.path(), "y").unwrap();
        assert_eq!(d.predictors, vec!["a", "b"]);
        assert_eq!(d.data.y()[3], 1.0 + 6.0 - 1.0);
        let rec = fit_csv(f.path(), "y", Method::Ols, &FitOptions::default()).unwrap();
        assert!((rec.coefficients[0].value - 2.0).abs() < 1e-9);
        assert!((rec.coefficients[1].value + 1.0).abs() < 1e-9);
        assert!((rec.intercept - 1.0).abs() < 1e-9);
        assert!(matches!(read_csv(f.path(), "w"), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn csv_rejects_text_cells() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "a,y\n1,2\nx,3").unwrap();
        assert!(matches!(read_csv(f.path(), "y"), Err(Error::Parse(_))));
    }

    #[test]
    fn lambda_override_rules() {
        let x = DMatrix::from_fn(20, 3, |i, j| ((i * (j + 2)) % 7) as f64 + j as f64 * 0.1 * i as f64);
        let y = DVector::from_fn(20, |i, _| (i % 5) as f64);
        let s = standardize(&Dataset::new(x, y).unwrap()).unwrap();
        let opts = FitOptions { lambda: Some(0.05), ..FitOptions::default() };
        for m in [Method::Ridge, Method::Lasso, Method::Enet, Method::Scad, Method::Mcp] {
            let f = fit_method(m, &s, &opts).unwrap();
            assert_eq!(f.method, m);
        }
        assert!(fit_method(Method::Ols, &s, &opts).is_err());
        let neg = FitOptions { lambda: Some(-1.0), ..FitOptions::default() };
        assert!(fit_method(Method::Lasso, &s, &neg).is_err());
    }

    #[test]
    fn bench_shape_and_worker_independence() {
        let family = builtin("case1").unwrap().with_replications(3).filter_sweep(|r| r == 0.0 || r == 0.9);
        let methods = [Method::Ols, Method::Lasso, Method::NgBic];
        let a = run_family(&family, &methods, 1, 5).unwrap();
        let b = run_family(&family, &methods, 3, 5).unwrap();
        let strip = |o: &[PointOutcome]| -> Vec<Vec<(Method, usize, f64, f64)>> {
            o.iter().map(|p| p.records.iter().map(|r| (r.method, r.replication, r.mse, r.me)).collect()).collect()
        };
        assert_eq!(strip(&a), strip(&b));
        let aggs = aggregate_outcomes(&a, &methods).unwrap();
        assert_eq!(aggs.len(), methods.len() * 2);
        let csv = metric_csv(&aggs, "rho", Metric::Mse);
        assert_eq!(csv.lines().next().unwrap(), BENCH_HEADER);
        assert_eq!(csv.lines().count(), 1 + methods.len() * 2);
        let ols_ic2: Vec<f64> = aggs.iter().filter(|a| a.method == Method::Ols).map(|a| a.mean(Metric::Ic2)).collect();
        assert_eq!(ols_ic2, vec![5.0, 5.0]);
    }

    #[test]
    fn listing_mentions_every_family() {
        let text = describe_families(&builtin_scenarios());
        for f in builtin_scenarios() {
            assert!(text.contains(&f.name));
        }
    }
}
