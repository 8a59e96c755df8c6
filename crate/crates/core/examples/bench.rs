//! A reduced benchmark run: writes the per-metric CSVs, errors CSV, metadata
//! and gnuplot script for one scenario family.
//!
//! `cargo run --release --example bench -- [scenario replications outdir]`

use penreg::harness::{cmd_bench, RunConfig, ScenarioSource};
use penreg::metrics::Metric;

fn main() -> penreg::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let scenario = args.first().cloned().unwrap_or_else(|| "case1".into());
    let reps = args.get(1).and_then(|r| r.parse().ok()).unwrap_or(5);
    let outdir = args.get(2).map(Into::into).unwrap_or_else(|| std::env::temp_dir().join("penreg_bench"));

    let mut cfg = RunConfig::new(ScenarioSource::Builtin(scenario), outdir);
    cfg.replications = Some(reps);
    cfg.base_seed = 7;
    cfg.workers = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1);
    let out = cmd_bench(&cfg)?;
    for (m, path) in &out.metric_files {
        println!("{:8} {}", m.name(), path.display());
    }
    println!("{} failed fits", out.failures);
    for a in out.aggregates.iter().filter(|a| a.sweep_value == 0.5) {
        println!("{:12} mse {:.4} ± {:.4}", a.method.tag(), a.mean(Metric::Mse), a.stderr(Metric::Mse));
    }
    Ok(())
}
