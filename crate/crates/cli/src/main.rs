//! `cfx`: counterfactual search experiments from a config file.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod config;
mod error;
mod run;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use cfx_core::quadrature::{gauss_hermite, gauss_legendre, QuadratureRule};
use cfx_core::validation::run_suite;
use clap::{Parser, Subcommand, ValueEnum};

use crate::config::{prepare, RunConfig};
use crate::error::CliError;

/// Overrides the output directory of `cfx run`.
const OUTPUT_DIR_ENV: &str = "CFX_OUTPUT_DIR";
const DEFAULT_OUTPUT_DIR: &str = "cfx-output";
const MAX_NODES: usize = 256;

#[derive(Parser)]
#[command(
    name = "cfx",
    version,
    about = "Counterfactual search with potential-based Bayesian optimisation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a TOML or JSON config.
    Run { config: PathBuf },
    /// Write a Gauss quadrature rule as CSV.
    Quadrature {
        #[arg(long, value_enum)]
        family: Family,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check the closed forms against their oracles.
    Validate,
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    Hermite,
    Legendre,
}

/// `x` with 17 significant digits, positional unless the exponent is
/// below -5 or at least 17.
fn sig17(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{x:.16e}");
    let exp: i32 = sci[sci.find('e').expect("exponent") + 1..]
        .parse()
        .expect("integer exponent");
    if (-5..17).contains(&exp) {
        format!("{x:.*}", (16 - exp) as usize)
    } else {
        sci
    }
}

fn quadrature_csv(rule: &QuadratureRule) -> String {
    let mut s = format!("# mass={}\nnode,weight\n", sig17(rule.mass()));
    for (x, w) in rule.nodes().iter().zip(rule.weights()) {
        s.push_str(&format!("{},{}\n", sig17(*x), sig17(*w)));
    }
    s
}

fn cmd_quadrature(family: Family, n: usize, out: &Path) -> Result<(), CliError> {
    if !(1..=MAX_NODES).contains(&n) {
        return Err(CliError::Config(format!(
            "n must lie in 1..={MAX_NODES}, got {n}"
        )));
    }
    let rule = match family {
        Family::Hermite => gauss_hermite(n),
        Family::Legendre => gauss_legendre(n),
    }
    .map_err(CliError::from_core)?;
    std::fs::write(out, quadrature_csv(&rule))
        .map_err(|e| CliError::io(&format!("cannot write {}", out.display()), e))
}

fn cmd_validate() -> Result<(), CliError> {
    let checks = run_suite().map_err(CliError::from_core)?;
    println!(
        "{:<42} {:>6} {:>12} {:>12}  result",
        "check", "cases", "max error", "error/tol"
    );
    for c in &checks {
        println!(
            "{:<42} {:>6} {:>12.3e} {:>12.3e}  {}",
            c.name,
            c.cases,
            c.max_error,
            c.worst_ratio,
            if c.pass { "PASS" } else { "FAIL" }
        );
    }
    let failed: Vec<&str> = checks
        .iter()
        .filter(|c| !c.pass)
        .map(|c| c.name.as_str())
        .collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Validation(failed.join(", ")))
    }
}

fn cmd_run(path: &Path) -> Result<(), CliError> {
    let cfg = RunConfig::load(path)?;
    let prep = prepare(&cfg)?;
    let out = std::env::var_os(OUTPUT_DIR_ENV)
        .map(PathBuf::from)
        .or(cfg.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR));
    let summary = run::run(&prep, &out)?;
    for c in &summary.cases {
        let se = c
            .std_error
            .map_or("n/a".to_string(), |s| format!("{s:.3e}"));
        println!(
            "{} [{}] l0={}: mean terminal potential {:.6} (se {se}) over {} seeds",
            summary.strategy,
            c.target,
            c.l0_bound.map_or("inf".into(), |k| k.to_string()),
            c.mean_terminal_incumbent,
            c.runs.len()
        );
    }
    println!("wrote {}", out.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run { config } => cmd_run(config),
        Command::Quadrature { family, n, out } => cmd_quadrature(*family, *n, out),
        Command::Validate => cmd_validate(),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("cfx: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
