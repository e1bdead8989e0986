//! Experiment configuration from flags and an optional TOML file. Flags win
//! over the file; the file wins over built-in defaults.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Sample-size constant of the learner: `n = C·d·2^{d/2}`.
pub const LEARNER_CONSTANT: f64 = 1.0;

/// Party budget of the inner shuffle learner used by `reduction` and
/// `distinguish` when `--n` is not given.
pub const AMPLE_INNER_PARTIES: usize = 150;

#[derive(Debug, Parser)]
#[command(name = "shufpar", version, about = "Shuffle-model parity learning experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Distributed noise shares against the exact Discrete Laplace oracle.
    NoiseAudit(Params),
    /// Success rate of the shuffle parity learner.
    Learn(Params),
    /// Recovery rate of the pan-private uniform-distribution learner.
    Reduction(Params),
    /// Acceptance rates and advantage of the hard-distribution distinguisher.
    Distinguish(Params),
    /// Reference values of the pan-private lower bound.
    Bound(Params),
}

impl Command {
    pub fn kind(&self) -> CommandKind {
        match self {
            Command::NoiseAudit(_) => CommandKind::NoiseAudit,
            Command::Learn(_) => CommandKind::Learn,
            Command::Reduction(_) => CommandKind::Reduction,
            Command::Distinguish(_) => CommandKind::Distinguish,
            Command::Bound(_) => CommandKind::Bound,
        }
    }

    pub fn params(&self) -> &Params {
        match self {
            Command::NoiseAudit(p)
            | Command::Learn(p)
            | Command::Reduction(p)
            | Command::Distinguish(p)
            | Command::Bound(p) => p,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CommandKind {
    NoiseAudit,
    Learn,
    Reduction,
    Distinguish,
    Bound,
}

impl CommandKind {
    pub fn name(self) -> &'static str {
        match self {
            CommandKind::NoiseAudit => "noise-audit",
            CommandKind::Learn => "learn",
            CommandKind::Reduction => "reduction",
            CommandKind::Distinguish => "distinguish",
            CommandKind::Bound => "bound",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// Every flag is optional so that file values can fill the gaps.
#[derive(Clone, Debug, Default, Args, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct Params {
    /// Dimension of the cube (largest dimension for `bound`).
    #[arg(long)]
    pub d: Option<usize>,
    /// Largest parity weight; defaults to d.
    #[arg(long)]
    pub k: Option<usize>,
    /// Parties (noise-audit, learn) or inner party budget (reduction, distinguish).
    #[arg(long)]
    pub n: Option<usize>,
    /// Test samples of the distinguisher; defaults to the formula value.
    #[arg(long)]
    pub m: Option<usize>,
    /// Privacy parameter of each counter.
    #[arg(long)]
    pub eps: Option<f64>,
    /// Additive shares per counter message.
    #[arg(long)]
    pub splits: Option<usize>,
    /// Robustness multiplier (Discrete Laplace copies in the total noise).
    #[arg(long)]
    pub c: Option<u32>,
    /// Tilt of the hard distributions.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Approximate-privacy parameter for `bound`.
    #[arg(long)]
    pub delta: Option<f64>,
    /// Target advantage T for `bound`.
    #[arg(long)]
    pub advantage: Option<f64>,
    /// Label flip probability for agnostic `learn` runs.
    #[arg(long)]
    pub noise_rate: Option<f64>,
    /// Smallest dimension of the `bound` sweep.
    #[arg(long)]
    pub d_min: Option<usize>,
    #[arg(long)]
    pub trials: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Write the report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// TOML file with any of the keys above, in kebab-case.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

impl Params {
    fn or(self, fallback: Params) -> Params {
        Params {
            d: self.d.or(fallback.d),
            k: self.k.or(fallback.k),
            n: self.n.or(fallback.n),
            m: self.m.or(fallback.m),
            eps: self.eps.or(fallback.eps),
            splits: self.splits.or(fallback.splits),
            c: self.c.or(fallback.c),
            alpha: self.alpha.or(fallback.alpha),
            delta: self.delta.or(fallback.delta),
            advantage: self.advantage.or(fallback.advantage),
            noise_rate: self.noise_rate.or(fallback.noise_rate),
            d_min: self.d_min.or(fallback.d_min),
            trials: self.trials.or(fallback.trials),
            seed: self.seed.or(fallback.seed),
            out: self.out.or(fallback.out),
            format: self.format.or(fallback.format),
            config: self.config,
        }
    }
}

#[derive(Debug)]
pub enum ConfigError {
    Io(PathBuf, std::io::Error),
    Parse(PathBuf, toml::de::Error),
    Invalid(String),
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ConfigError::Io(path, e) => write!(f, "cannot read {}: {e}", path.display()),
            ConfigError::Parse(path, e) => write!(f, "invalid config {}: {e}", path.display()),
            ConfigError::Invalid(msg) => f.write_str(msg),
        }
    }
}

impl std::error::Error for ConfigError {}

fn invalid(msg: impl Into<String>) -> ConfigError {
    ConfigError::Invalid(msg.into())
}

pub fn load_file(path: &Path) -> Result<Params, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io(path.to_owned(), e))?;
    toml::from_str(&text).map_err(|e| ConfigError::Parse(path.to_owned(), e))
}

/// Fully resolved parameters. The serialized form (minus output settings)
/// is what the config hash covers.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct ExperimentConfig {
    pub command: CommandKind,
    pub d: usize,
    pub k: usize,
    pub n: usize,
    pub m: Option<usize>,
    pub eps: f64,
    pub splits: usize,
    pub c: u32,
    pub alpha: f64,
    pub delta: f64,
    pub advantage: f64,
    pub noise_rate: f64,
    pub d_min: usize,
    pub trials: u64,
    pub seed: u64,
    #[serde(skip)]
    pub out: Option<PathBuf>,
    #[serde(skip)]
    pub format: Format,
}

fn default_n(command: CommandKind, d: usize) -> usize {
    match command {
        CommandKind::NoiseAudit => 10,
        CommandKind::Learn => learner_sample_size(d, LEARNER_CONSTANT),
        CommandKind::Reduction | CommandKind::Distinguish => AMPLE_INNER_PARTIES,
        CommandKind::Bound => 0,
    }
}

fn default_trials(command: CommandKind) -> u64 {
    match command {
        CommandKind::NoiseAudit => 1_000_000,
        CommandKind::Learn => 100,
        CommandKind::Reduction => 400,
        CommandKind::Distinguish => 10_000,
        CommandKind::Bound => 0,
    }
}

/// `⌈C·d·2^{d/2}⌉`.
pub fn learner_sample_size(d: usize, constant: f64) -> usize {
    (constant * d as f64 * 2f64.powf(d as f64 / 2.0)).ceil() as usize
}

impl ExperimentConfig {
    pub fn from_command(command: &Command) -> Result<ExperimentConfig, ConfigError> {
        let flags = command.params().clone();
        let merged = match &flags.config {
            Some(path) => {
                let file = load_file(path)?;
                flags.or(file)
            }
            None => flags,
        };
        ExperimentConfig::resolve(command.kind(), merged)
    }

    pub fn resolve(command: CommandKind, p: Params) -> Result<ExperimentConfig, ConfigError> {
        let d = p.d.unwrap_or(match command {
            CommandKind::Reduction => 6,
            CommandKind::Bound => 16,
            _ => 8,
        });
        let cfg = ExperimentConfig {
            command,
            d,
            k: p.k.unwrap_or(d),
            n: p.n.unwrap_or_else(|| default_n(command, d)),
            m: p.m,
            eps: p.eps.unwrap_or(1.0),
            splits: p.splits.unwrap_or(1),
            c: p.c.unwrap_or(3),
            alpha: p.alpha.unwrap_or(0.5),
            delta: p.delta.unwrap_or(0.0),
            advantage: p.advantage.unwrap_or(1.0 / 64.0),
            noise_rate: p.noise_rate.unwrap_or(0.0),
            d_min: p.d_min.unwrap_or(if p.d.is_some() && command == CommandKind::Bound {
                d
            } else {
                4
            }),
            trials: p.trials.unwrap_or_else(|| default_trials(command)),
            seed: p.seed.unwrap_or(0),
            out: p.out,
            format: p.format.unwrap_or_default(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), ConfigError> {
        if !(self.eps > 0.0 && self.eps.is_finite()) {
            return Err(invalid(format!("--eps must be positive, got {}", self.eps)));
        }
        if self.splits == 0 {
            return Err(invalid("--splits must be at least 1"));
        }
        if self.c == 0 {
            return Err(invalid("--c must be at least 1"));
        }
        if self.k == 0 || self.k > self.d {
            return Err(invalid(format!("--k must be in 1..={}, got {}", self.d, self.k)));
        }
        if !(0.0..=0.5).contains(&self.noise_rate) {
            return Err(invalid("--noise-rate must be in [0, 1/2]"));
        }
        if self.command != CommandKind::Bound && self.trials == 0 {
            return Err(invalid("--trials must be positive"));
        }
        if self.command != CommandKind::Bound && self.n == 0 {
            return Err(invalid("--n must be positive"));
        }
        match self.command {
            CommandKind::Reduction | CommandKind::Distinguish if self.n % 3 != 0 => {
                Err(invalid(format!("--n must be a multiple of 3, got {}", self.n)))
            }
            CommandKind::Bound if self.d_min == 0 || self.d_min > self.d => {
                Err(invalid(format!("--d-min must be in 1..={}", self.d)))
            }
            CommandKind::Distinguish if self.d < 2 => Err(invalid("--d must be at least 2")),
            _ => Ok(()),
        }
    }

    /// First 16 hex digits of the SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_string(self).expect("config serializes");
        let digest = Sha256::digest(canonical.as_bytes());
        digest[..8].iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Result<ExperimentConfig, ConfigError> {
        let cli = Cli::try_parse_from(std::iter::once("shufpar").chain(args.iter().copied()))
            .map_err(|e| invalid(e.to_string()))?;
        ExperimentConfig::from_command(&cli.command)
    }

    #[test]
    fn defaults_per_command() {
        let learn = parse(&["learn"]).unwrap();
        assert_eq!((learn.d, learn.k, learn.n, learn.trials), (8, 8, 128, 100));
        let red = parse(&["reduction"]).unwrap();
        assert_eq!((red.d, red.n, red.trials), (6, 150, 400));
        let bound = parse(&["bound"]).unwrap();
        assert_eq!((bound.d_min, bound.d), (4, 16));
        let single = parse(&["bound", "--d", "9"]).unwrap();
        assert_eq!((single.d_min, single.d), (9, 9));
    }

    #[test]
    fn flags_override_file() {
        let dir = std::env::temp_dir().join(format!("shufpar-cfg-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("exp.toml");
        std::fs::write(&path, "d = 5\neps = 0.5\nnoise-rate = 0.1\nseed = 9\n").unwrap();
        let p = path.to_str().unwrap();
        let cfg = parse(&["learn", "--config", p, "--seed", "3"]).unwrap();
        assert_eq!((cfg.d, cfg.eps, cfg.noise_rate, cfg.seed), (5, 0.5, 0.1, 3));
        std::fs::write(&path, "dimension = 5\n").unwrap();
        assert!(matches!(parse(&["learn", "--config", p]), Err(ConfigError::Parse(..))));
        std::fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn validation() {
        assert!(parse(&["learn", "--k", "9"]).is_err());
        assert!(parse(&["reduction", "--n", "10"]).is_err());
        assert!(parse(&["noise-audit", "--eps", "0"]).is_err());
        assert!(parse(&["learn", "--bogus"]).is_err());
    }

    #[test]
    fn hash_ignores_output_settings() {
        let a = parse(&["learn", "--seed", "1"]).unwrap();
        let b = parse(&["learn", "--seed", "1", "--format", "json", "--out", "x.json"]).unwrap();
        let c = parse(&["learn", "--seed", "2"]).unwrap();
        assert_eq!(a.hash(), b.hash());
        assert_ne!(a.hash(), c.hash());
        assert_eq!(a.hash().len(), 16);
    }
}
