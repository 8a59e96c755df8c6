//! Fit one method to a CSV file, as `penreg fit` does.
//!
//! `cargo run --example fit_csv -- [path.csv response method]`; without
//! arguments a small synthetic file is written to the temp directory.

use std::io::Write;
use std::path::PathBuf;

use penreg::harness::{fit_csv, FitOptions};
use penreg::model::Method;
use penreg::simulate::{builtin, gen_dataset};

fn demo_file() -> PathBuf {
    let spec = builtin("case1").unwrap().points[5].1.clone();
    let d = gen_dataset(&spec, 0).unwrap();
    let path = std::env::temp_dir().join("penreg_demo.csv");
    let mut f = std::fs::File::create(&path).unwrap();
    writeln!(f, "x1,x2,x3,x4,x5,x6,x7,x8,y").unwrap();
    for i in 0..d.n() {
        let row: Vec<String> = d.x().row(i).iter().map(|v| v.to_string()).collect();
        writeln!(f, "{},{}", row.join(","), d.y()[i]).unwrap();
    }
    path
}

fn main() -> penreg::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let (path, response, method) = match args.as_slice() {
        [p, r, m] => (PathBuf::from(p), r.clone(), m.parse::<Method>().map_err(penreg::Error::InvalidParameter)?),
        _ => (demo_file(), "y".to_string(), Method::Lasso),
    };
    let rec = fit_csv(&path, &response, method, &FitOptions::default())?;
    println!("{}", serde_json::to_string_pretty(&rec).unwrap());
    Ok(())
}
