// Small Monte-Carlo SNR sweep over the four schemes with paired scenarios,
// printed as a mean / standard-error table and written as CSV to stdout.

use std::error::Error;

use mra_opt::cli::to_csv;
use mra_opt::experiment::{aggregate, run_sweep, ExperimentConfig, SweepAxis};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let cfg = ExperimentConfig {
        snr_db_list: vec![-4.0, 4.0, 12.0],
        trials: 8,
        seed: 2024,
        ..ExperimentConfig::default()
    };
    let result = run_sweep(&cfg, SweepAxis::Snr)?;
    println!("{:<5}{:>8}{:>10}{:>10}", "scheme", "snr_db", "mean", "stderr");
    for row in aggregate(&result) {
        println!("{:<5}{:>8}{:>10.4}{:>10.4}", row.scheme.name(), row.axis_value, row.mean, row.std_error);
    }
    let csv = to_csv(&result);
    println!("\n{}", csv.lines().take(5).collect::<Vec<_>>().join("\n"));
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
