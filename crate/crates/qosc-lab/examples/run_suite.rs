//! Drives the full verification suite from a config file (default:
//! `configs/default.conf`) and prints the summary.

use qosc_lab::suite::{run_suite, SuiteConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = std::env::args().nth(1).unwrap_or_else(|| {
        concat!(env!("CARGO_MANIFEST_DIR"), "/configs/default.conf").to_string()
    });
    let cfg = SuiteConfig::from_file(path.as_ref())?;
    let report = run_suite(&cfg, None)?;
    print!("{}", report.text_summary());
    println!(
        "{} records, all passed: {}",
        report.records.len(),
        report.passed()
    );
    Ok(())
}
