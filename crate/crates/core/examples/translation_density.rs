//! Translates the built-in positively aligned pairs and reports overlap collapse and W_2 drift.

use std::path::PathBuf;
use std::time::Instant;

use alignlab::experiments::{
    run_translation_density, write_report, ReportFormat, TranslationConfig,
};

fn main() -> alignlab::Result<()> {
    let start = Instant::now();
    let report = run_translation_density(&TranslationConfig::default(), 0)?;
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
