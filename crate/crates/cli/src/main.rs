use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use dkt_cli::battery::{render_table, run_battery, BatteryConfig};
use dkt_cli::run::{default_threads, run_file, Overrides};

#[derive(Parser)]
#[command(name = "dkt", version, about = "Differential K-theory numerics: manifest runner and self-test")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute a TOML manifest and write a JSON report.
    Run {
        manifest: PathBuf,
        /// Report path; the report goes to stdout otherwise.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Points per circle factor (sphere azimuthal points: half of it).
        #[arg(long)]
        grid: Option<usize>,
        /// Polar quadrature nodes per sphere cap.
        #[arg(long)]
        quad: Option<usize>,
        /// Tolerance applied to every checked residual.
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long, env = "DKT_THREADS")]
        threads: Option<usize>,
    },
    /// Run the built-in acceptance battery and print a pass/fail table.
    Selftest {
        /// Only criteria whose key contains this string.
        #[arg(long)]
        filter: Option<String>,
        #[arg(long, default_value_t = 128)]
        grid: usize,
        #[arg(long, default_value_t = 64)]
        quad: usize,
        #[arg(long, env = "DKT_THREADS")]
        threads: Option<usize>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { manifest, out, grid, quad, tol, threads } => {
            let ov = Overrides { grid, quad, tol, threads };
            let (code, text) = run_file(&manifest, out.as_deref(), &ov);
            if code == 2 || code == 3 || (out.is_some() && code == 4 && !text.starts_with('{')) {
                eprintln!("dkt: {text}");
            } else if out.is_none() {
                print!("{text}");
            } else if code != 0 {
                eprintln!("dkt: finished with exit code {code}");
            }
            ExitCode::from(code as u8)
        }
        Command::Selftest { filter, grid, quad, threads } => {
            let threads = threads.unwrap_or_else(default_threads);
            let other = if threads == 1 { 4 } else { 1 };
            let cfg = BatteryConfig { grid, quad };
            match run_battery(&cfg, filter.as_deref(), threads, other) {
                Ok(results) => {
                    print!("{}", render_table(&results));
                    if !results.is_empty() && results.iter().all(|r| r.passed()) {
                        println!("all {} criteria passed", results.len());
                        ExitCode::SUCCESS
                    } else {
                        println!("{} of {} criteria failed", results.iter().filter(|r| !r.passed()).count(), results.len());
                        ExitCode::from(1)
                    }
                }
                Err(e) => {
                    eprintln!("dkt: {e}");
                    ExitCode::from(1)
                }
            }
        }
    }
}
