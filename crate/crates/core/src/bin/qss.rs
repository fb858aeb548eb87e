use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qss::harness::{
    self, parse_erasure, parse_secret_list, parse_witness_probs, Command, HarnessResult, RunConfig,
};

#[derive(Parser)]
#[command(
    name = "qss",
    version,
    about = "Threshold quantum secret sharing: simulation and experiment harness"
)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// Secret: H, V, +, -, L, R, v, w or a_re,a_im,b_re,b_im.
    #[arg(long, global = true, allow_hyphen_values = true)]
    secret: Option<String>,
    /// Shot count per setting, or "exact".
    #[arg(long, global = true, default_value = "exact")]
    shots: String,
    /// Depolarizing strength on every share.
    #[arg(long, global = true, default_value_t = 0.0)]
    noise: f64,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Number of seeded random secrets or Paulis, where a subcommand uses them.
    #[arg(long, global = true, default_value_t = 0)]
    count: usize,
    /// json or csv.
    #[arg(long, global = true, default_value = "json")]
    format: String,
    /// JSON file, or directory for CSV. Stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

const REFERENCE: &str = "0.40,0.10,0.11,0.40;0.40,0.11,0.12,0.39;0.03,0.41,0.52,0.05";

#[derive(Subcommand)]
enum Sub {
    /// Recovery fidelity over the probe secrets, branches and outcomes.
    Reliability,
    /// Entanglement witness and fidelity from three correlated settings.
    Witness {
        /// ZZ;XX;YY probabilities (++,+-,-+,--). Without a value, the
        /// reference values.
        #[arg(long, num_args = 0..=1, default_missing_value = REFERENCE)]
        from_probs: Option<String>,
    },
    /// Process tomography of each single-player channel.
    Tomography,
    /// Two-player minimum-error discrimination grids.
    Discriminate {
        /// Comma-separated secrets.
        #[arg(long, allow_hyphen_values = true)]
        secrets: Option<String>,
    },
    /// Erasure recovery of the 5-qubit code and the share correspondence.
    Erasure {
        /// Erased positions, e.g. 3,4. All patterns when absent.
        #[arg(long)]
        erase: Option<String>,
    },
    /// Knill-Laflamme checks.
    KlCheck,
    /// Gate-level encoder against the direct share states.
    CircuitCheck,
}

fn build(cli: Cli) -> HarnessResult<RunConfig> {
    let command = match &cli.command {
        Sub::Reliability => Command::Reliability,
        Sub::Witness { .. } => Command::Witness,
        Sub::Tomography => Command::Tomography,
        Sub::Discriminate { .. } => Command::Discriminate,
        Sub::Erasure { .. } => Command::Erasure,
        Sub::KlCheck => Command::KlCheck,
        Sub::CircuitCheck => Command::CircuitCheck,
    };
    let c = cli.common;
    let mut cfg = RunConfig::new(command);
    cfg.secret = c.secret.as_deref().map(str::parse).transpose()?;
    cfg.shots = c.shots.parse()?;
    cfg.noise = c.noise;
    cfg.seed = c.seed;
    cfg.count = c.count;
    cfg.format = c.format.parse()?;
    cfg.out = c.out;
    match cli.command {
        Sub::Witness {
            from_probs: Some(p),
        } => cfg.from_probs = Some(parse_witness_probs(&p)?),
        Sub::Discriminate { secrets: Some(s) } => cfg.secrets = Some(parse_secret_list(&s)?),
        Sub::Erasure { erase: Some(e) } => cfg.erasure = Some(parse_erasure(&e)?),
        _ => {}
    }
    cfg.validate()?;
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = build(cli).and_then(|cfg| harness::run_and_emit(&cfg).map(|_| ()));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qss: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
