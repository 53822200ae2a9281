use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, ValueEnum};

use crate::Failure;

/// Keys accepted on the command line and in `--config` files.
pub const FIELDS: &[&str] = &[
    "alpha", "beta", "j1", "L", "N", "L1", "n", "cutoff", "epsilon", "sweeps", "burnin", "chains", "thin", "seed",
    "engine", "out_dir", "bc",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum EngineKind {
    Exact,
    Mc,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum BcKind {
    Plus,
    Minus,
    Free,
    /// minus on the left, plus on the right
    DobrushinMp,
    /// plus on the left, minus on the right
    DobrushinPm,
}

/// Run parameters. Every field is optional so that file values, flags and
/// per-subcommand defaults can be layered.
#[derive(Args, Clone, Debug, Default, PartialEq)]
pub struct RunConfig {
    /// Decay exponent of the coupling, > 1
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Inverse temperature, >= 0
    #[arg(long)]
    pub beta: Option<f64>,
    /// Nearest-neighbour coupling, >= 1
    #[arg(long)]
    pub j1: Option<f64>,
    /// Half-width / block length
    #[arg(long = "L", value_name = "L")]
    pub l: Option<u64>,
    /// Frozen interval or annulus length
    #[arg(long = "N", value_name = "N")]
    pub big_n: Option<u64>,
    /// Alternating block length for the B observable
    #[arg(long = "L1", value_name = "L1")]
    pub l1: Option<u64>,
    /// Outer length (largest future volume / far block end)
    #[arg(long)]
    pub n: Option<u64>,
    /// Exterior truncation radius, >= 1
    #[arg(long)]
    pub cutoff: Option<u64>,
    /// Escape / wet-window parameter in [0, 1)
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub sweeps: Option<u64>,
    #[arg(long)]
    pub burnin: Option<u64>,
    #[arg(long)]
    pub chains: Option<u64>,
    /// Record every thin-th sweep after burn-in
    #[arg(long)]
    pub thin: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum)]
    pub engine: Option<EngineKind>,
    /// Parent directory of the run directory [default: runs]
    #[arg(long = "out_dir", value_name = "DIR")]
    pub out_dir: Option<PathBuf>,
    /// Boundary condition (exact, mc, interface)
    #[arg(long, value_enum)]
    pub bc: Option<BcKind>,
}

impl RunConfig {
    /// `self` wins wherever both are set.
    pub fn or(self, base: RunConfig) -> RunConfig {
        RunConfig {
            alpha: self.alpha.or(base.alpha),
            beta: self.beta.or(base.beta),
            j1: self.j1.or(base.j1),
            l: self.l.or(base.l),
            big_n: self.big_n.or(base.big_n),
            l1: self.l1.or(base.l1),
            n: self.n.or(base.n),
            cutoff: self.cutoff.or(base.cutoff),
            epsilon: self.epsilon.or(base.epsilon),
            sweeps: self.sweeps.or(base.sweeps),
            burnin: self.burnin.or(base.burnin),
            chains: self.chains.or(base.chains),
            thin: self.thin.or(base.thin),
            seed: self.seed.or(base.seed),
            engine: self.engine.or(base.engine),
            out_dir: self.out_dir.or(base.out_dir),
            bc: self.bc.or(base.bc),
        }
    }

    /// Parses `key=value` lines; blank lines and `#` comments are skipped.
    pub fn parse_file_text(text: &str) -> Result<RunConfig, Failure> {
        let mut argv = vec!["config".to_string()];
        let mut seen = Vec::new();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Failure::usage(format!("config line {}: expected key=value", no + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            if !FIELDS.contains(&key) {
                return Err(Failure::usage(format!("config line {}: unknown key '{key}'", no + 1)));
            }
            if seen.contains(&key) {
                return Err(Failure::usage(format!("config line {}: duplicate key '{key}'", no + 1)));
            }
            seen.push(key);
            argv.push(format!("--{key}={value}"));
        }
        let parsed = FileArgs::try_parse_from(&argv).map_err(|e| {
            let msg = e.to_string();
            let first = msg.lines().next().unwrap_or("invalid value").trim_start_matches("error: ");
            Failure::usage(format!("config: {first}"))
        })?;
        Ok(parsed.config)
    }

    pub fn read_file(path: &Path) -> Result<RunConfig, Failure> {
        let text = fs::read_to_string(path).map_err(|e| Failure::runtime(format!("{}: {e}", path.display())))?;
        Self::parse_file_text(&text)
    }
}

#[derive(Parser)]
struct FileArgs {
    #[command(flatten)]
    config: RunConfig,
}
