//! Runs the default overlap-fraction sweep; pass a directory to keep the CSV and SVG output.

use std::path::PathBuf;
use std::time::Instant;

use alignlab::experiments::{run_mcs_sweep, write_report, McsSweepConfig, ReportFormat};

fn main() -> alignlab::Result<()> {
    let start = Instant::now();
    let report = run_mcs_sweep(&McsSweepConfig::default(), 0)?;
    for v in &report.verdicts {
        println!(
            "{} {}: {}",
            if v.passed { "PASS" } else { "FAIL" },
            v.name,
            v.detail
        );
    }
    println!("{:.1?}", start.elapsed());
    if let Some(dir) = std::env::args().nth(1).map(PathBuf::from) {
        for path in write_report(&report, &dir, ReportFormat::Csv)? {
            println!("wrote {}", path.display());
        }
        write_report(&report, &dir, ReportFormat::Svg)?;
    }
    Ok(())
}
