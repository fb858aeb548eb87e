//! Experiment harness: one subcommand per figure or table of the protocol
//! study, each producing a [`Report`] of named blocks.
//!
//! Every subcommand has an exact mode (`Shots::Exact`) that evaluates
//! closed-form values. Finite-shot modes emulate counting statistics with
//! seeded draws; task `k` of a subcommand uses seed `seed + k`.

mod commands;
mod report;

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::code5::ErasureSpec;
use crate::qss::Secret;
use crate::Error;

pub use report::{Block, BlockData, Provenance, Report};

pub const TOOL_NAME: &str = "qss";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Exit status for a rejected configuration.
pub const EXIT_VALIDATION: i32 = 2;
/// Exit status for a failure after the configuration was accepted.
pub const EXIT_RUNTIME: i32 = 3;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] Error),
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl HarnessError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        Self::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    /// [`EXIT_VALIDATION`] for bad input, [`EXIT_RUNTIME`] otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) => EXIT_VALIDATION,
            HarnessError::Core(Error::Argument(_) | Error::Capacity { .. }) => EXIT_VALIDATION,
            HarnessError::Core(_) | HarnessError::Io { .. } => EXIT_RUNTIME,
        }
    }
}

pub type HarnessResult<T> = std::result::Result<T, HarnessError>;

fn config_err<T>(msg: impl Into<String>) -> HarnessResult<T> {
    Err(HarnessError::Config(msg.into()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Reliability,
    Witness,
    Tomography,
    Discriminate,
    Erasure,
    KlCheck,
    CircuitCheck,
}

impl Command {
    pub const ALL: [Command; 7] = [
        Command::Reliability,
        Command::Witness,
        Command::Tomography,
        Command::Discriminate,
        Command::Erasure,
        Command::KlCheck,
        Command::CircuitCheck,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Reliability => "reliability",
            Command::Witness => "witness",
            Command::Tomography => "tomography",
            Command::Discriminate => "discriminate",
            Command::Erasure => "erasure",
            Command::KlCheck => "kl-check",
            Command::CircuitCheck => "circuit-check",
        }
    }
}

impl FromStr for Command {
    type Err = HarnessError;
    fn from_str(s: &str) -> HarnessResult<Self> {
        Command::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .map_or_else(|| config_err(format!("unknown subcommand '{s}'")), Ok)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shots {
    Exact,
    Finite(u64),
}

impl FromStr for Shots {
    type Err = HarnessError;
    fn from_str(s: &str) -> HarnessResult<Self> {
        if s == "exact" {
            return Ok(Shots::Exact);
        }
        match s.parse::<u64>() {
            Ok(0) => config_err("shots must be at least 1"),
            Ok(n) => Ok(Shots::Finite(n)),
            Err(_) => config_err(format!(
                "shots must be a positive integer or 'exact', got '{s}'"
            )),
        }
    }
}

impl fmt::Display for Shots {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Shots::Exact => f.write_str("exact"),
            Shots::Finite(n) => write!(f, "{n}"),
        }
    }
}

impl Serialize for Shots {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
}

impl FromStr for OutputFormat {
    type Err = HarnessError;
    fn from_str(s: &str) -> HarnessResult<Self> {
        match s {
            "json" => Ok(OutputFormat::Json),
            "csv" => Ok(OutputFormat::Csv),
            other => config_err(format!("unknown output format '{other}'")),
        }
    }
}

/// A named secret as given on the command line.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NamedSecret {
    pub name: String,
    pub secret: Secret,
}

impl FromStr for NamedSecret {
    type Err = HarnessError;
    fn from_str(s: &str) -> HarnessResult<Self> {
        let secret = Secret::parse(s)
            .map_err(|e| HarnessError::Config(format!("malformed secret '{s}': {e}")))?;
        Ok(Self {
            name: s.trim().to_string(),
            secret,
        })
    }
}

/// Comma-separated secret names, e.g. `H,V,+,-,L,R`.
pub fn parse_secret_list(s: &str) -> HarnessResult<Vec<NamedSecret>> {
    let list: Vec<NamedSecret> = s.split(',').map(str::parse).collect::<HarnessResult<_>>()?;
    if list.len() < 2 {
        return config_err("need at least two secrets");
    }
    Ok(list)
}

/// Reference witness probabilities (two decimals), one setting per row, in the order
/// `ZZ; XX; YY` and outcomes `++, +−, −+, −−`.
pub const REFERENCE_WITNESS_PROBS: [[f64; 4]; 3] = [
    [0.40, 0.10, 0.11, 0.40],
    [0.40, 0.11, 0.12, 0.39],
    [0.03, 0.41, 0.52, 0.05],
];

/// Parses `p,p,p,p;p,p,p,p;p,p,p,p` (settings `ZZ; XX; YY`).
pub fn parse_witness_probs(s: &str) -> HarnessResult<[[f64; 4]; 3]> {
    let rows: Vec<&str> = s.split(';').collect();
    if rows.len() != 3 {
        return config_err("expected three ';'-separated settings (ZZ;XX;YY)");
    }
    let mut out = [[0.0; 4]; 3];
    for (k, row) in rows.iter().enumerate() {
        let vals: Vec<f64> = row
            .split(',')
            .map(|v| v.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|_| HarnessError::Config(format!("bad number in setting {k}: '{row}'")))?;
        if vals.len() != 4 {
            return config_err(format!("setting {k} needs four probabilities"));
        }
        if vals.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return config_err(format!("setting {k} has a probability outside [0, 1]"));
        }
        out[k].copy_from_slice(&vals);
    }
    Ok(out)
}

/// Comma-separated erased positions, e.g. `3,4`.
pub fn parse_erasure(s: &str) -> HarnessResult<ErasureSpec> {
    let pos: Vec<usize> = s
        .split(',')
        .filter(|p| !p.trim().is_empty())
        .map(|p| p.trim().parse::<usize>())
        .collect::<Result<_, _>>()
        .map_err(|_| HarnessError::Config(format!("bad erasure pattern '{s}'")))?;
    Ok(ErasureSpec::new(&pos)?)
}

/// Validated configuration of one harness run.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub command: Command,
    /// Single secret; each subcommand documents its default.
    pub secret: Option<NamedSecret>,
    /// Secret list for `discriminate`.
    pub secrets: Option<Vec<NamedSecret>>,
    pub shots: Shots,
    /// Depolarizing strength applied to every share.
    pub noise: f64,
    pub seed: u64,
    /// Number of seeded random secrets when no secret is given.
    pub count: usize,
    /// Supplied probabilities for `witness` instead of simulation.
    pub from_probs: Option<[[f64; 4]; 3]>,
    /// Single erasure pattern for `erasure`; all patterns by default.
    pub erasure: Option<ErasureSpec>,
    pub format: OutputFormat,
    /// Excluded from the echo so that the body does not depend on it.
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn new(command: Command) -> Self {
        Self {
            command,
            secret: None,
            secrets: None,
            shots: Shots::Exact,
            noise: 0.0,
            seed: 0,
            count: 0,
            from_probs: None,
            erasure: None,
            format: OutputFormat::Json,
            out: None,
        }
    }

    pub fn validate(&self) -> HarnessResult<()> {
        if !(0.0..=1.0).contains(&self.noise) {
            return config_err(format!("noise must lie in [0, 1], got {}", self.noise));
        }
        if self.shots == Shots::Finite(0) {
            return config_err("shots must be at least 1");
        }
        if let Some(list) = &self.secrets {
            if list.len() < 2 {
                return config_err("need at least two secrets");
            }
        }
        if let Some(out) = &self.out {
            let parent = match out.parent() {
                Some(p) if !p.as_os_str().is_empty() => p,
                _ => Path::new("."),
            };
            if !parent.is_dir() {
                return config_err(format!(
                    "output directory {} does not exist",
                    parent.display()
                ));
            }
            if self.format == OutputFormat::Json && out.is_dir() {
                return config_err(format!("{} is a directory", out.display()));
            }
        }
        Ok(())
    }

    /// The `--secret` value, or `count` (or `default`) seeded random secrets.
    pub(crate) fn secret_or_random(&self, default: usize) -> Vec<NamedSecret> {
        if let Some(s) = &self.secret {
            return vec![s.clone()];
        }
        let n = if self.count == 0 { default } else { self.count };
        crate::qss::random_secrets(n, self.seed)
            .into_iter()
            .enumerate()
            .map(|(k, secret)| NamedSecret {
                name: format!("random#{k}"),
                secret,
            })
            .collect()
    }
}

/// Runs the configured subcommand. Does not write anything.
pub fn run(config: &RunConfig) -> HarnessResult<Report> {
    config.validate()?;
    let results = match config.command {
        Command::Reliability => commands::reliability(config)?,
        Command::Witness => commands::witness(config)?,
        Command::Tomography => commands::tomography(config)?,
        Command::Discriminate => commands::discriminate(config)?,
        Command::Erasure => commands::erasure(config)?,
        Command::KlCheck => commands::kl_check(config)?,
        Command::CircuitCheck => commands::circuit_check(config)?,
    };
    let timestamp = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    Ok(Report {
        config: serde_json::to_value(config).expect("config serialises"),
        results,
        provenance: Provenance {
            tool: TOOL_NAME.into(),
            version: TOOL_VERSION.into(),
            seed: config.seed,
            timestamp,
        },
    })
}

/// Writes `report` to `config.out` in the configured format, or to stdout.
pub fn emit(config: &RunConfig, report: &Report) -> HarnessResult<()> {
    match (&config.out, config.format) {
        (Some(path), OutputFormat::Json) => report.write_json(path),
        (Some(path), OutputFormat::Csv) => report.write_csv_dir(path),
        (None, OutputFormat::Json) => {
            println!("{}", report.to_json());
            Ok(())
        }
        (None, OutputFormat::Csv) => report
            .write_csv_stream(std::io::stdout().lock())
            .map_err(|e| HarnessError::io(Path::new("<stdout>"), e)),
    }
}

/// [`run`] followed by [`emit`].
pub fn run_and_emit(config: &RunConfig) -> HarnessResult<Report> {
    let report = run(config)?;
    emit(config, &report)?;
    Ok(report)
}
