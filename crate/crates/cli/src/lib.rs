//! Argument handling and dispatch for the `dyson` binary.
//!
//! Every subcommand accepts the same flags; keys a subcommand does not use
//! are accepted and ignored. Flags override values read from `--config`.
//!
//! ```
//! use clap::CommandFactory;
//! let mut cmd = dyson_cli::Cli::command();
//! for sub in dyson_cli::SUBCOMMANDS {
//!     let help = cmd.find_subcommand_mut(sub).unwrap().render_long_help().to_string();
//!     for key in dyson_cli::FIELDS.iter().chain(&["config"]) {
//!         assert!(help.contains(&format!("--{key}")), "{sub} --help lacks --{key}");
//!     }
//! }
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::ffi::OsString;
use std::fmt;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

mod commands;
mod config;

pub use config::{BcKind, EngineKind, RunConfig, FIELDS};

pub const SUBCOMMANDS: &[&str] =
    &["exact", "mc", "interface", "localization", "wetting", "discontinuity", "bounds", "fields"];

pub const EXIT_USAGE: i32 = 2;
pub const EXIT_PRECONDITION: i32 = 3;
pub const EXIT_RUNTIME: i32 = 4;

#[derive(Parser, Debug)]
#[command(name = "dyson", version, about = "Long-range one-dimensional Ising laboratory")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug)]
pub struct Invocation {
    /// Read key=value lines from FILE; flags take precedence
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub run: RunConfig,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Exact Gibbs magnetization on [-L, L]
    Exact(Invocation),
    /// Metropolis magnetization on [-L, L]
    Mc(Invocation),
    /// Interface histogram and conditional profiles on [-L, L]
    Interface(Invocation),
    /// Escape probability of the interface across a range of L
    Localization(Invocation),
    /// Profile next to a frozen minus interval [-N, -1]
    Wetting(Invocation),
    /// Gap between the plus- and minus-annulus pasts
    Discontinuity(Invocation),
    /// Closed-form bounds: B observable, decoupling, boundary tail, g coefficient
    Bounds(Invocation),
    /// Half-line field profiles for both annulus signs
    Fields(Invocation),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Exact(_) => "exact",
            Command::Mc(_) => "mc",
            Command::Interface(_) => "interface",
            Command::Localization(_) => "localization",
            Command::Wetting(_) => "wetting",
            Command::Discontinuity(_) => "discontinuity",
            Command::Bounds(_) => "bounds",
            Command::Fields(_) => "fields",
        }
    }

    fn invocation(&self) -> &Invocation {
        match self {
            Command::Exact(i)
            | Command::Mc(i)
            | Command::Interface(i)
            | Command::Localization(i)
            | Command::Wetting(i)
            | Command::Discontinuity(i)
            | Command::Bounds(i)
            | Command::Fields(i) => i,
        }
    }
}

/// A one-line message and the exit code it maps to.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Failure { code: EXIT_USAGE, message: message.into() }
    }

    pub fn precondition(message: impl Into<String>) -> Self {
        Failure { code: EXIT_PRECONDITION, message: message.into() }
    }

    pub fn runtime(message: impl Into<String>) -> Self {
        Failure { code: EXIT_RUNTIME, message: message.into() }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<dyson_core::Error> for Failure {
    fn from(e: dyson_core::Error) -> Self {
        let code = if e.is_precondition() { EXIT_PRECONDITION } else { EXIT_RUNTIME };
        Failure { code, message: e.to_string() }
    }
}

/// Resolves flags against the optional config file and checks every
/// supplied value before anything runs.
pub fn resolve(inv: &Invocation) -> Result<RunConfig, Failure> {
    let file = match &inv.config {
        Some(path) => RunConfig::read_file(path)?,
        None => RunConfig::default(),
    };
    let cfg = inv.run.clone().or(file);
    validate(&cfg)?;
    Ok(cfg)
}

pub fn validate(cfg: &RunConfig) -> Result<(), Failure> {
    let bad = |key: &str, why: &str, v: &dyn fmt::Display| Err(Failure::precondition(format!("{key}: {why}, got {v}")));
    if let Some(a) = cfg.alpha {
        if !(a > 1.0 && a.is_finite()) {
            return bad("alpha", "alpha must exceed 1", &a);
        }
    }
    if let Some(b) = cfg.beta {
        if !(b >= 0.0 && b.is_finite()) {
            return bad("beta", "beta must be finite and non-negative", &b);
        }
    }
    if let Some(j) = cfg.j1 {
        if !(j >= 1.0 && j.is_finite()) {
            return bad("j1", "j1 must be at least 1", &j);
        }
    }
    if let Some(e) = cfg.epsilon {
        if !(0.0..1.0).contains(&e) {
            return bad("epsilon", "epsilon must lie in [0, 1)", &e);
        }
    }
    for (key, v) in [("L", cfg.l), ("N", cfg.big_n), ("L1", cfg.l1), ("n", cfg.n), ("cutoff", cfg.cutoff)] {
        if v == Some(0) {
            return bad(key, &format!("{key} must be positive"), &0);
        }
    }
    if cfg.chains == Some(0) {
        return bad("chains", "chains must be at least 1", &0);
    }
    if cfg.thin == Some(0) {
        return bad("thin", "thin must be at least 1", &0);
    }
    if let (Some(s), Some(b)) = (cfg.sweeps, cfg.burnin) {
        if s <= b {
            return bad("sweeps", &format!("sweeps must exceed burnin ({b})"), &s);
        }
    }
    Ok(())
}

/// Caps the global worker pool from `DYSON_THREADS`.
fn configure_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var("DYSON_THREADS") else { return Ok(()) };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| Failure::usage(format!("DYSON_THREADS: expected a positive integer, got '{raw}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::runtime(format!("DYSON_THREADS: {e}")))
}

/// Runs the binary on `argv` and returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { 0 };
        }
    };
    let result = configure_threads()
        .and_then(|()| resolve(cli.command.invocation()))
        .and_then(|cfg| commands::dispatch(&cli.command, &cfg));
    match result {
        Ok(summary) => {
            println!("{}", serde_json::to_string_pretty(&summary).expect("summary serialises"));
            0
        }
        Err(f) => {
            eprintln!("error: {}", f.message.lines().next().unwrap_or_default());
            f.code
        }
    }
}
