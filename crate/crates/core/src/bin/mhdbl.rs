use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use mhdbl_core::config::{parse_override, RunConfig};
use mhdbl_core::run;
use mhdbl_core::verify::run_suite;
use mhdbl_core::{Error, Result};

/// MHD boundary-layer simulator and verification harness.
#[derive(Parser)]
#[command(name = "mhdbl", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a simulation described by a config file.
    Simulate {
        config: PathBuf,
        /// Extra `key=value` settings applied after the file.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// Run a verification suite (or `all`) and print a JSON report.
    Verify {
        suite: String,
        #[arg(long, default_value_t = 20261016)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit a power law `<t>^p` to one column of a norms CSV.
    Fit {
        #[arg(long)]
        csv: PathBuf,
        #[arg(long)]
        quantity: String,
        /// Window as `start,end`; defaults to the whole series.
        #[arg(long)]
        window: Option<String>,
    },
    /// Continue a run from a checkpoint.
    Resume {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
}

fn parse_window(s: &str) -> Result<(f64, f64)> {
    let bad = || Error::Config {
        key: "window".into(),
        reason: format!("expected `start,end`, got `{s}`"),
    };
    let (a, b) = s.split_once(',').ok_or_else(bad)?;
    Ok((a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?))
}

fn overrides(list: &[String]) -> Result<Vec<(String, String)>> {
    list.iter().map(|s| parse_override(s)).collect()
}

fn simulate(path: &PathBuf, sets: &[String]) -> Result<()> {
    let text = std::fs::read_to_string(path)?;
    let cfg = RunConfig::parse_with_overrides(&text, &overrides(sets)?)?;
    print_summary(run::simulate(&cfg))
}

fn print_summary(result: Result<run::Summary>) -> Result<()> {
    let summary = result?;
    println!("{}", serde_json::to_string_pretty(&summary)?);
    Ok(())
}

fn execute(cli: Cli) -> Result<()> {
    run::init_threads()?;
    match cli.command {
        Command::Simulate { config, overrides } => simulate(&config, &overrides),
        Command::Verify { suite, seed, out } => {
            let reports = run_suite(&suite, seed)?;
            let json = serde_json::to_string_pretty(&reports)?;
            match out {
                Some(path) => std::fs::write(path, &json)?,
                None => println!("{json}"),
            }
            if reports.iter().all(|r| r.pass) {
                Ok(())
            } else {
                Err(Error::Integrity("verification suite failed".into()))
            }
        }
        Command::Fit { csv, quantity, window } => {
            let window = window.as_deref().map(parse_window).transpose()?.unwrap_or((f64::NEG_INFINITY, f64::INFINITY));
            let fit = run::fit_csv(&csv, &quantity, window)?;
            println!("exponent {:.6} stderr {:.6} samples {}", fit.exponent, fit.stderr, fit.samples);
            Ok(())
        }
        Command::Resume { checkpoint, overrides: sets } => print_summary(run::resume(&checkpoint, &overrides(&sets)?)),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
