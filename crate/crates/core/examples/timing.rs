//! Per-method wall-clock times on the n = 1000, p = 100 scenario, including
//! tuning.
//!
//! `cargo run --release --example timing -- [replications]`

use penreg::harness::{cmd_time, timing_csv, RunConfig, ScenarioSource};

fn main() -> penreg::Result<()> {
    let reps = std::env::args().nth(1).and_then(|r| r.parse().ok()).unwrap_or(3);
    let mut cfg = RunConfig::new(ScenarioSource::Builtin("timing".into()), std::env::temp_dir().join("penreg_timing"));
    cfg.replications = Some(reps);
    let out = cmd_time(&cfg)?;
    print!("{}", timing_csv(&out.rows));
    println!("hardware: {}", out.hardware);
    Ok(())
}
