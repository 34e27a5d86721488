//! Command-line front end: run scenarios, compare controller variants,
//! validate model invariants, inspect parameter sets.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use flexjoint::config::{load_config, resolve};
use flexjoint::harness::{compare, compute_metrics, run_scenario, JointMetrics};
use flexjoint::params::{format_set, set_names};
use flexjoint::validate::run_checks;
use flexjoint::Error;

#[derive(Parser)]
#[command(name = "flexjoint", version, about = "Flexible-joint simulation and feedforward control")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArgs {
    /// Scenario configuration file (TOML).
    #[arg(long, short)]
    config: PathBuf,
    /// Dotted-path config overrides, e.g. --override sim.dt_ctrl=4e-4.
    #[arg(long = "override", value_name = "KEY.PATH=VALUE")]
    overrides: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and report tracking metrics (and CSV, if configured).
    Simulate {
        #[command(flatten)]
        cfg: ConfigArgs,
        /// Write the full log as CSV to this path (overrides [output].csv).
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Run every [[variants]] entry of the config on the same scenario and
    /// print a comparison table.
    Compare {
        #[command(flatten)]
        cfg: ConfigArgs,
    },
    /// Run the model self-checks against a named parameter set.
    Validate {
        /// Parameter set to check.
        #[arg(long, default_value = "kr300-joint1")]
        set: String,
    },
    /// Print a parameter set, or list the available sets.
    Params {
        /// Parameter set to print; omit to list all sets.
        #[arg(long)]
        set: Option<String>,
    },
}

/// Exit codes: 0 success, 1 a check or comparison failed, 2 bad usage or
/// configuration, 3 numerical fault while running.
fn exit_code_for(e: &Error) -> ExitCode {
    match e {
        Error::Config(_) | Error::Domain(_) => ExitCode::from(2),
        Error::Integration { .. } | Error::Controller { .. } | Error::Io(_) => ExitCode::from(3),
    }
}

fn print_metrics(name: &str, metrics: &[JointMetrics]) {
    for (i, m) in metrics.iter().enumerate() {
        println!(
            "{name}  joint {}: max |err| {:.6e} deg, mean |err| {:.6e} deg, \
             reversal tau_E p2p {:.4e} Nm, max dtau/dt {:.4e} Nm/s",
            i + 1,
            m.max_err_deg,
            m.mean_err_deg,
            m.reversal_tau_e_p2p,
            m.max_tau_rate
        );
    }
}

fn cmd_simulate(cfg: &ConfigArgs, csv: Option<PathBuf>) -> Result<ExitCode, Error> {
    let file = load_config(&cfg.config, &cfg.overrides)?;
    let resolved = resolve(&file)?;
    let log = run_scenario(&resolved.scenario, resolved.source.as_ref())?;
    print_metrics("run", &compute_metrics(&log, resolved.scenario.dt_ctrl)?);
    if let Some(path) = csv.or(resolved.csv) {
        log.write_csv_file(&path)?;
        println!("log written to {}", path.display());
    }
    Ok(ExitCode::SUCCESS)
}

/// Inserts a variant name before the file extension: run.csv -> run-flat.csv.
fn variant_path(base: &std::path::Path, name: &str) -> PathBuf {
    let stem = base.file_stem().and_then(|s| s.to_str()).unwrap_or("log");
    let ext = base.extension().and_then(|s| s.to_str()).unwrap_or("csv");
    base.with_file_name(format!("{stem}-{name}.{ext}"))
}

fn cmd_compare(cfg: &ConfigArgs) -> Result<ExitCode, Error> {
    let file = load_config(&cfg.config, &cfg.overrides)?;
    let resolved = resolve(&file)?;
    let results = compare(&resolved.scenario, resolved.source.as_ref(), &resolved.variants)?;
    let width = results.iter().map(|r| r.name.len()).max().unwrap_or(0);
    for r in &results {
        print_metrics(&format!("{:<width$}", r.name), &r.metrics);
        if let Some(base) = &resolved.csv {
            let path = variant_path(base, &r.name);
            r.log.write_csv_file(&path)?;
            println!("log written to {}", path.display());
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_validate(set: &str) -> Result<ExitCode, Error> {
    let joints = flexjoint::params::named_set(set)
        .ok_or_else(|| Error::config(format!("unknown parameter set '{set}'")))?;
    let results = run_checks(&joints)?;
    let mut failed = 0;
    for r in &results {
        println!("{} {:<35} {}", if r.passed { "PASS" } else { "FAIL" }, r.id, r.detail);
        if !r.passed {
            failed += 1;
        }
    }
    if failed > 0 {
        println!("{failed} of {} checks failed", results.len());
        Ok(ExitCode::from(1))
    } else {
        println!("all {} checks passed", results.len());
        Ok(ExitCode::SUCCESS)
    }
}

fn cmd_params(set: Option<&str>) -> Result<ExitCode, Error> {
    match set {
        Some(name) => {
            let table = format_set(name)
                .ok_or_else(|| Error::config(format!("unknown parameter set '{name}'")))?;
            print!("{table}");
        }
        None => {
            for name in set_names() {
                println!("{name}");
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Simulate { cfg, csv } => cmd_simulate(cfg, csv.clone()),
        Command::Compare { cfg } => cmd_compare(cfg),
        Command::Validate { set } => cmd_validate(set),
        Command::Params { set } => cmd_params(set.as_deref()),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code_for(&e)
        }
    }
}
