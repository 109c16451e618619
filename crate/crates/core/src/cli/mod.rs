//! The `sqzent` command line.
//!
//! ```text
//! sqzent steady|sweep|tc|labframe|oracle --config <path> [--out <path>] [--seed <u64>]
//! ```
//!
//! Exit codes: 0 success, 1 I/O or internal failure, 2 configuration error,
//! 3 unstable drift, 4 unphysical bath, 5 lab-frame convergence failure.

pub mod commands;
pub mod config;

use std::ffi::OsString;
use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

pub use config::{parse, ConfigError, Mode, RunConfig};

use crate::error::Error;

#[derive(Debug, Parser)]
#[command(name = "sqzent", version, about = "Steady-state entanglement under squeezed reservoirs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Rotating-frame steady state at one point (JSON).
    Steady(RunArgs),
    /// Grid sweep of the logarithmic negativity (CSV).
    Sweep(RunArgs),
    /// Critical temperature over r and J (CSV).
    Tc(RunArgs),
    /// Lab-frame periodic steady state at one point (JSON).
    Labframe(RunArgs),
    /// Monte Carlo check of the rotating-frame steady state (JSON).
    Oracle(RunArgs),
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Overrides `out` in the config; stdout when neither is given.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Overrides `seed` in the config.
    #[arg(long)]
    pub seed: Option<u64>,
}

impl Command {
    pub fn mode(&self) -> Mode {
        match self {
            Self::Steady(_) => Mode::Steady,
            Self::Sweep(_) => Mode::Sweep,
            Self::Tc(_) => Mode::Tc,
            Self::Labframe(_) => Mode::Labframe,
            Self::Oracle(_) => Mode::Oracle,
        }
    }

    pub fn args(&self) -> &RunArgs {
        match self {
            Self::Steady(a) | Self::Sweep(a) | Self::Tc(a) | Self::Labframe(a) | Self::Oracle(a) => a,
        }
    }
}

#[derive(Debug)]
pub enum CliError {
    Config(ConfigError),
    Run(Error),
    Io(PathBuf, std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) => 2,
            Self::Run(e) => match e {
                Error::InvalidParameter { .. } | Error::NonResonant { .. } | Error::StepTooLarge { .. } => 2,
                Error::NotStable { .. } => 3,
                Error::UnphysicalBath(_) => 4,
                Error::NoConvergence { .. } | Error::NonMonotone { .. } => 5,
                _ => 1,
            },
            Self::Io(..) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Config(e) => write!(f, "{e}"),
            Self::Run(e) => write!(f, "{e}"),
            Self::Io(path, e) => write!(f, "{}: {e}", path.display()),
        }
    }
}

impl std::error::Error for CliError {}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        Self::Run(e)
    }
}

/// Config for `mode`, with command-line overrides applied.
pub fn load_config(mode: Mode, args: &RunArgs) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(&args.config).map_err(|e| CliError::Io(args.config.clone(), e))?;
    let mut cfg = parse(&text).map_err(CliError::Config)?;
    match cfg.mode {
        Some(m) if m != mode => {
            return Err(CliError::Config(ConfigError {
                line: None,
                key: Some("mode".into()),
                message: format!("config is for `{}` but the command is `{}`", m.name(), mode.name()),
            }))
        }
        _ => cfg.mode = Some(mode),
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &args.out {
        cfg.out = Some(out.to_string_lossy().into_owned());
    }
    if !cfg.grid.is_empty() && !matches!(mode, Mode::Sweep | Mode::Tc) {
        return Err(CliError::Config(ConfigError {
            line: None,
            key: Some("grid".into()),
            message: format!("grid axes are only used by sweep and tc, not `{}`", mode.name()),
        }));
    }
    Ok(cfg)
}

/// Output document for a validated config.
pub fn execute(mode: Mode, cfg: &RunConfig) -> Result<String, CliError> {
    let doc = match mode {
        Mode::Steady => commands::cmd_steady(cfg),
        Mode::Sweep => commands::cmd_sweep(cfg),
        Mode::Tc => commands::cmd_tc(cfg),
        Mode::Labframe => commands::cmd_labframe(cfg),
        Mode::Oracle => commands::cmd_oracle(cfg),
    }?;
    Ok(doc)
}

/// Writes via a temporary file in the target directory, so a failed run never
/// leaves a partial file behind.
pub fn write_atomic(path: &Path, content: &str) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(content.as_bytes())?;
    tmp.flush()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

pub fn run(cli: &Cli) -> Result<(), CliError> {
    let mode = cli.command.mode();
    let cfg = load_config(mode, cli.command.args())?;
    let doc = execute(mode, &cfg)?;
    match &cfg.out {
        Some(path) => {
            let path = PathBuf::from(path);
            write_atomic(&path, &doc).map_err(|e| CliError::Io(path, e))
        }
        None => std::io::stdout()
            .write_all(doc.as_bytes())
            .map_err(|e| CliError::Io(PathBuf::from("<stdout>"), e)),
    }
}

/// Entry point for the binary; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
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
