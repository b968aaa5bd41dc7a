//! Command-line front end: `solve | optimize | diagnose | sweep-p`.
//!
//! Exit codes: 0 success, 1 numerical failure or failed `--check`,
//! 2 usage or validation error.

mod commands;
pub mod config;
mod manifest;

pub use commands::{
    build_domain, build_objective, build_optimizer, cmd_diagnose, cmd_optimize, cmd_solve, cmd_sweep_p, read_spectrum,
    read_xi, roundness, RunOutcome,
};
pub use config::Config;
pub use manifest::{hash_artifacts, hash_mismatches, sha256_file, Manifest, MANIFEST_FILE, VERSION};

use clap::{Parser, Subcommand};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("config: {0}")]
    Config(String),
    #[error("file not found: {}", .0.display())]
    MissingFile(PathBuf),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("invalid input: {0}")]
    Validation(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("check failed, artifacts differ: {}", .0.join(", "))]
    CheckFailed(Vec<String>),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Numerical(_) | CliError::CheckFailed(_) => 1,
            _ => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Eigenpairs, torsion function and boundary of one domain
    Solve,
    /// Shape optimization, or a p-continuation when a schedule is set
    Optimize,
    /// Free-boundary diagnostics of dumped artifacts
    Diagnose,
    /// p-continuation with a per-stage summary
    SweepP,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Solve => "solve",
            Command::Optimize => "optimize",
            Command::Diagnose => "diagnose",
            Command::SweepP => "sweep-p",
        }
    }
}

#[derive(Debug, Clone, Parser)]
#[command(name = "shapeopt", version, about = "Spectral shape optimization with free-boundary diagnostics")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// config file; repeat to fan out independent runs
    #[arg(long = "config", value_name = "PATH", global = true)]
    pub configs: Vec<PathBuf>,
    /// output directory; one subdirectory per config when several are given
    #[arg(long, value_name = "DIR", global = true, default_value = "out")]
    pub out: PathBuf,
    /// overrides `run.seed`
    #[arg(long, value_name = "U64", global = true)]
    pub seed: Option<u64>,
    /// concurrent runs
    #[arg(long, value_name = "N", global = true, default_value_t = 1)]
    pub jobs: usize,
    /// rerun and compare artifact hashes against the existing manifest
    #[arg(long, global = true)]
    pub check: bool,
}

/// Parses `args` (program name first) and runs; returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
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
    match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// Runs every config, at most `jobs` at a time. Returns the first error
/// with the highest exit code.
pub fn run(cli: &Cli) -> Result<(), CliError> {
    if cli.configs.is_empty() {
        return Err(CliError::Usage("at least one --config PATH is required".into()));
    }
    if cli.jobs == 0 {
        return Err(CliError::Usage("--jobs must be at least 1".into()));
    }
    let mut jobs = Vec::new();
    for path in &cli.configs {
        if !path.exists() {
            return Err(CliError::MissingFile(path.clone()));
        }
        let cfg = Config::load(path)?;
        let name = cfg
            .raw("run.name")
            .map(str::to_string)
            .unwrap_or_else(|| path.file_stem().map_or("run".into(), |s| s.to_string_lossy().into_owned()));
        let out = if cli.configs.len() == 1 { cli.out.clone() } else { cli.out.join(&name) };
        jobs.push((cfg, name, out));
    }
    let next = AtomicUsize::new(0);
    let errors: Mutex<Vec<(usize, CliError)>> = Mutex::new(Vec::new());
    std::thread::scope(|s| {
        for _ in 0..cli.jobs.min(jobs.len()) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                let Some((cfg, name, out)) = jobs.get(i) else {
                    break;
                };
                let res = if cli.check {
                    check_run(cli.command, cfg, name, out, cli.seed)
                } else {
                    execute(cli.command, cfg, name, out, cli.seed).map(|_| ())
                };
                if let Err(e) = res {
                    if jobs.len() > 1 {
                        eprintln!("{name}: {e}");
                    }
                    errors.lock().expect("no panics while locked").push((i, e));
                }
            });
        }
    });
    let mut errors = errors.into_inner().expect("no panics while locked");
    errors.sort_by_key(|(i, e)| (std::cmp::Reverse(e.exit_code()), *i));
    match errors.into_iter().next() {
        Some((_, e)) => Err(e),
        None => Ok(()),
    }
}

fn resolve_seed(cfg: &Config, seed: Option<u64>) -> Result<u64, CliError> {
    match seed {
        Some(s) => Ok(s),
        None => cfg.get_or("run.seed", 0),
    }
}

/// One command into `out`, manifest included. Partial artifacts of a
/// numerical failure are kept and listed in the manifest.
pub fn execute(cmd: Command, cfg: &Config, name: &str, out: &Path, seed: Option<u64>) -> Result<Manifest, CliError> {
    let seed = resolve_seed(cfg, seed)?;
    std::fs::create_dir_all(out).map_err(|e| CliError::Io {
        path: out.to_path_buf(),
        source: e,
    })?;
    let start = Instant::now();
    let outcome = match cmd {
        Command::Solve => cmd_solve(cfg, out, seed),
        Command::Optimize => cmd_optimize(cfg, out, seed),
        Command::Diagnose => cmd_diagnose(cfg, out, seed),
        Command::SweepP => cmd_sweep_p(cfg, out, seed),
    }?;
    let mut echo = cfg.entries().clone();
    echo.insert("run.seed".into(), seed.to_string());
    let manifest = Manifest {
        version: VERSION.into(),
        command: cmd.name().into(),
        name: name.into(),
        seed,
        wall_time_s: start.elapsed().as_secs_f64(),
        converged: outcome.converged,
        stop: outcome.stop.clone(),
        failure: outcome.failure.clone(),
        config: echo,
        summary: outcome.summary.clone(),
        artifacts: hash_artifacts(out, &outcome.artifacts)?,
    };
    manifest.write(out)?;
    match &outcome.failure {
        Some(f) => Err(CliError::Numerical(f.clone())),
        None => Ok(manifest),
    }
}

/// Verifies the files in `out` against their manifest, then reruns into a
/// scratch directory and compares the fresh hashes too.
fn check_run(cmd: Command, cfg: &Config, name: &str, out: &Path, seed: Option<u64>) -> Result<(), CliError> {
    let old = Manifest::read(out)?;
    let names: Vec<String> = old.artifacts.keys().cloned().collect();
    let on_disk: std::collections::BTreeMap<String, String> = names
        .iter()
        .map(|n| (n.clone(), sha256_file(&out.join(n)).unwrap_or_default()))
        .collect();
    let bad = hash_mismatches(&old.artifacts, &on_disk);
    if !bad.is_empty() {
        return Err(CliError::CheckFailed(bad));
    }
    let seed = seed.or(Some(old.seed));
    let scratch = out.join(".check");
    let fresh = execute(cmd, cfg, name, &scratch, seed);
    let result = fresh.and_then(|m| {
        let bad = hash_mismatches(&old.artifacts, &m.artifacts);
        if bad.is_empty() {
            Ok(())
        } else {
            Err(CliError::CheckFailed(bad))
        }
    });
    let _ = std::fs::remove_dir_all(&scratch);
    if result.is_ok() {
        println!("{name}: {} artifacts verified", old.artifacts.len());
    }
    result
}
