//! `hypdimer verify | experiment | render`.
//!
//! Exit codes: 0 success, 1 invariant failure, 2 configuration or schema
//! error, 3 missing input.

mod config;
mod experiment;
mod render;
mod setup;
mod verify;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::RunConfig;

#[derive(Parser)]
#[command(name = "hypdimer", version, about = "Dimers and spanning forests on circle-packed planar graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (0 = all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Relative tolerance of the identity suites.
    #[arg(long, global = true)]
    tol: Option<f64>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Run the identity suites and write report.json with the graph and packing.
    Verify,
    /// Write variance, Green decay and correlation tables.
    Experiment,
    /// Draw the packing, superposition graph and double-dimer loops.
    Render,
}

#[derive(Debug)]
pub enum Failure {
    Invariant(String),
    Config(String),
    Missing(String),
}

impl Failure {
    pub fn invariant(e: hypdimer::Error) -> Self {
        Failure::Invariant(e.to_string())
    }

    /// Schema and parameter errors are configuration errors.
    pub fn from_core(e: hypdimer::Error) -> Self {
        match e {
            hypdimer::Error::Schema(_) | hypdimer::Error::InvalidParameter(_) | hypdimer::Error::Json(_) => {
                Failure::Config(e.to_string())
            }
            _ => Failure::Invariant(e.to_string()),
        }
    }

    fn code(&self) -> u8 {
        match self {
            Failure::Invariant(_) => 1,
            Failure::Config(_) => 2,
            Failure::Missing(_) => 3,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Invariant(m) => write!(f, "invariant failure: {m}"),
            Failure::Config(m) => write!(f, "configuration error: {m}"),
            Failure::Missing(m) => write!(f, "missing input: {m}"),
        }
    }
}

pub fn write_file(path: &Path, body: &str) -> Result<(), Failure> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| Failure::Invariant(format!("{}: {e}", dir.display())))?;
    }
    std::fs::write(path, body).map_err(|e| Failure::Invariant(format!("{}: {e}", path.display())))
}

fn resolve(cli: &Cli) -> Result<RunConfig, Failure> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(j) = cli.jobs {
        cfg.jobs = j;
    }
    if let Some(o) = &cli.out {
        cfg.out = o.clone();
    }
    if let Some(t) = cli.tol {
        cfg.tolerances.identity = t;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<(), Failure> {
    let cfg = resolve(cli)?;
    if cfg.jobs > 0 {
        // Fails only if a pool already exists, which leaves the default in place.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(cfg.jobs).build_global();
    }
    match cli.command {
        Command::Verify => {
            let report = verify::run(&cfg)?;
            for s in &report.suites {
                println!("{:<24} residual {:.3e} tol {:.1e} {}", s.name, s.residual, s.tol, if s.passed { "ok" } else { "FAILED" });
            }
            if let Some(bad) = verify::first_failure(&report) {
                let why = bad.error.as_deref().unwrap_or("residual above tolerance");
                return Err(Failure::Invariant(format!("suite {} failed: {why}", bad.name)));
            }
        }
        Command::Experiment => {
            for f in experiment::run(&cfg)? {
                println!("{}", cfg.out.join(f).display());
            }
        }
        Command::Render => {
            for f in render::run(&cfg)? {
                println!("{}", cfg.out.join(f).display());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("hypdimer: {f}");
            ExitCode::from(f.code())
        }
    }
}
