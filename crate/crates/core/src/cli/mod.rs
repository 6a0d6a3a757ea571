//! Command-line driver: one subcommand per experiment, each writing a JSON report.

pub mod config;
mod experiments;
pub mod report;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub use config::ExperimentConfig;
pub use experiments::run_experiment;
pub use report::{Report, Verdict};

use config::ExtArg;

#[derive(Parser, Debug)]
#[command(
    name = "sl2adic",
    about = "Involutions, orbits and Chabauty limits in SL(2) over p-adic fields"
)]
pub struct Cli {
    /// JSON experiment config; flags below override its fields
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// report (or DOT) destination; stdout when absent
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub p: Option<u32>,
    #[arg(long, global = true, value_enum)]
    pub ext: Option<ExtArg>,
    #[arg(long, global = true)]
    pub precision: Option<u32>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    /// Classify the involution given by a matrix and gamma, and certify it
    Classify,
    /// Sample fixed-point groups of the involution families and test membership
    FixedGroup,
    /// Orbit invariants on the boundary of the tree
    Orbits,
    /// Polar decompositions g = k a^n h for random g
    Polar,
    /// p-adic Chabauty convergence rates
    LimitsPadic,
    /// Real Chabauty convergence rates
    LimitsReal,
    /// DOT rendering of a ball in the tree
    TreeDot,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Classify => "classify",
            Command::FixedGroup => "fixed-group",
            Command::Orbits => "orbits",
            Command::Polar => "polar",
            Command::LimitsPadic => "limits-padic",
            Command::LimitsReal => "limits-real",
            Command::TreeDot => "tree-dot",
        }
    }
}

/// Config file first, then flag overrides, then validation.
pub fn resolve_config(cli: &Cli) -> Result<ExperimentConfig, String> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
            ExperimentConfig::from_json(&text)?
        }
        None => ExperimentConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(p) = cli.p {
        cfg.p = p;
    }
    if let Some(e) = cli.ext {
        cfg.ext = e;
    }
    if let Some(n) = cli.precision {
        cfg.precision = n;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<(), String> {
    match out {
        Some(path) => std::fs::write(path, format!("{text}\n"))
            .map_err(|e| format!("cannot write {}: {e}", path.display())),
        None => {
            use std::io::Write;
            // a closed pipe downstream is not an error worth a panic
            let _ = writeln!(std::io::stdout(), "{text}");
            Ok(())
        }
    }
}

/// Parses `args` (program name first) and runs; returns the exit code: 0 when every verdict
/// passes, 1 when one fails or the experiment errors, 2 for a bad config or unwritable output.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let cfg = match resolve_config(&cli) {
        Ok(c) => c,
        Err(msg) => {
            let fallback = ExperimentConfig::default();
            let mut rep = Report::new(
                cli.command.name(),
                experiments::claim(cli.command, &fallback),
                &fallback,
            );
            rep.error = Some(msg.clone());
            eprintln!("config error: {msg}");
            let _ = emit(&cli.out, &rep.finish().to_json());
            return 2;
        }
    };
    if cli.command == Command::TreeDot {
        return match experiments::tree_dot_text(&cfg) {
            Ok(dot) => match emit(&cli.out, dot.trim_end()) {
                Ok(()) => 0,
                Err(msg) => {
                    eprintln!("{msg}");
                    2
                }
            },
            Err(msg) => {
                eprintln!("tree-dot failed: {msg}");
                1
            }
        };
    }
    let rep = run_experiment(cli.command, &cfg);
    if let Err(msg) = emit(&cli.out, &rep.to_json()) {
        eprintln!("{msg}");
        return 2;
    }
    if rep.pass {
        0
    } else {
        1
    }
}
