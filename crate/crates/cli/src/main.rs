use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use sdr_cli::{bundled_faithful_path, ingest_series, run_dp_experiment, CliError, ConfigOverrides, RunConfig};
use sdr_core::selftest::{run_suite, Suite};

#[derive(Debug, Parser)]
#[command(name = "sdr", version, about = "Savage-Dickey Bayes-factor estimation for nested models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
#[allow(clippy::large_enum_variant)]
enum Command {
    /// Run the replicated Dirichlet-process experiment and emit a JSON report
    DpRun {
        /// Flat `key = value` configuration file
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        overrides: ConfigOverrides,
        /// Write the report here instead of standard output
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write per-replicate values as CSV
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Run oracle-backed correctness suites
    Selftest {
        /// discrete, gaussian, polya, conditionals or all
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Parse a data file and print summary statistics
    IngestCheck {
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(long)]
        column: Option<usize>,
    },
}

fn write_to(path: &PathBuf, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|source| CliError::Io { path: path.clone(), source })
}

fn run(cli: Cli) -> Result<bool, CliError> {
    match cli.command {
        Command::DpRun { config, overrides, out, csv } => {
            let config = RunConfig::resolve(config.as_deref(), &overrides)?;
            let report = run_dp_experiment(&config)?;
            let json = report.to_json()?;
            match out {
                Some(path) => write_to(&path, &json)?,
                None => println!("{json}"),
            }
            if let Some(path) = csv {
                write_to(&path, &report.to_csv())?;
            }
            let s = &report.summary;
            eprintln!(
                "{} replicates x {} draws: mean B01 = {:e}, sd = {:e}, mean log10 B01 = {:.3} ({:.1} s)",
                report.replicates.len(),
                config.n_draws,
                s.mean_b01,
                s.sd_b01,
                s.mean_log10_b01,
                report.wall_clock_seconds
            );
            Ok(true)
        }
        Command::Selftest { suite, seed } => {
            let suites = if suite == "all" {
                Suite::ALL.to_vec()
            } else {
                vec![suite.parse::<Suite>().map_err(CliError::Config)?]
            };
            let mut all_passed = true;
            for s in suites {
                let report = run_suite(s, seed)?;
                for c in &report.checks {
                    println!(
                        "[{}] {}: {}: {:.3e} (limit {:.1e})",
                        if c.passed { "PASS" } else { "FAIL" },
                        s.name(),
                        c.name,
                        c.value,
                        c.limit
                    );
                }
                all_passed &= report.passed();
            }
            Ok(all_passed)
        }
        Command::IngestCheck { data, column } => {
            let path = data.unwrap_or_else(bundled_faithful_path);
            let values = ingest_series(&path, column)?;
            let n = values.len() as f64;
            let mean = values.iter().sum::<f64>() / n;
            let min = values.iter().copied().fold(f64::INFINITY, f64::min);
            let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            println!("{}: {} values, min {min}, max {max}, mean {mean:.5}", path.display(), values.len());
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
