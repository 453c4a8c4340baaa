//! Acceptance battery: criteria 1-9 at one and at four threads, then the determinism check.
//!
//! Runs without the libtest harness so the table is printed on every run.

use std::process::ExitCode;

use dkt_cli::battery::{determinism, render_table, run_criteria, BatteryConfig};

fn main() -> ExitCode {
    let cfg = BatteryConfig::default();
    let t0 = std::time::Instant::now();
    let one = run_criteria(&cfg, None, 1).expect("battery runs");
    let four = run_criteria(&cfg, None, 4).expect("battery runs");
    let mut all = one.clone();
    all.push(determinism(&one, &four, 1, 4, t0.elapsed().as_secs_f64()));
    print!("{}", render_table(&all));
    let failed: Vec<usize> = all.iter().filter(|r| !r.passed()).map(|r| r.id).collect();
    if all.len() == 10 && failed.is_empty() {
        println!("acceptance: 10/10 criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {} criteria, failed {failed:?}", all.len());
        ExitCode::FAILURE
    }
}
