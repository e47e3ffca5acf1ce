//! Batch front end for `hankel-hs`: flags or a JSON config in, CSV/JSON reports out.

pub mod config;
pub mod output;
pub mod tasks;

use std::fs;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use config::{Format, OutputSpec, RunConfig, Task, TolOverrides};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error(transparent)]
    Core(#[from] hankel_hs::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Invalid(_) => 1,
            CliError::Numerical(_) => 2,
            CliError::Core(e) if e.is_numerical_failure() => 2,
            CliError::Core(_) => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "hankel-hs", version, about = "Hilbert-Schmidt diagnostics for Hankel operators on Reinhardt domains")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Squared monomial norms c_γ² for all basis indices up to --n-max
    Moments(Flags),
    /// Partial sums S_α(N), shell bounds and growth class
    Salpha(Flags),
    /// Pseudoconvexity certificate and certified lower bounds
    Certify(Flags),
    /// Ω₀ series S_(1,1) up to M = --n-max, or the Ω_k structure with --k
    Wiegerinck(Flags),
    /// Hilbert-Schmidt test for the canonical solution operator of ∂̄
    Dbar(Flags),
    /// Run a JSON config; flags override its fields
    Report {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_enum)]
        task: Option<Task>,
        #[command(flatten)]
        flags: Flags,
    },
}

#[derive(Debug, Default, Args)]
pub struct Flags {
    /// family[:params], e.g. polydisc:1, ball, omega0, omegak:2, profile:inv_one_minus_pow:p=1
    #[arg(long)]
    pub domain: Option<String>,
    /// a1,a2
    #[arg(long)]
    pub alpha: Option<String>,
    #[arg(long)]
    pub n_max: Option<u32>,
    #[arg(long)]
    pub n_step: Option<u32>,
    /// Ω_k index (wiegerinck)
    #[arg(long)]
    pub k: Option<u32>,
    /// Relative quadrature tolerance
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

impl Flags {
    fn apply(self, config: &mut RunConfig) {
        if self.domain.is_some() {
            config.domain = self.domain;
        }
        if self.alpha.is_some() {
            config.alpha = self.alpha;
        }
        if self.n_max.is_some() {
            config.n_max = self.n_max;
        }
        if self.n_step.is_some() {
            config.n_step = self.n_step;
        }
        if self.k.is_some() {
            config.k = self.k;
        }
        if let Some(t) = self.tol {
            config.tol.get_or_insert_with(TolOverrides::default).rel_tol = Some(t);
        }
        if self.out.is_some() || self.format.is_some() {
            let o = config.output.get_or_insert_with(OutputSpec::default);
            if self.out.is_some() {
                o.path = self.out;
            }
            if self.format.is_some() {
                o.format = self.format;
            }
        }
    }
}

pub fn resolve(command: Command) -> Result<RunConfig, CliError> {
    let (mut config, flags) = match command {
        Command::Moments(f) => (RunConfig::new(Task::Moments), f),
        Command::Salpha(f) => (RunConfig::new(Task::Salpha), f),
        Command::Certify(f) => (RunConfig::new(Task::Certify), f),
        Command::Wiegerinck(f) => (RunConfig::new(Task::Wiegerinck), f),
        Command::Dbar(f) => (RunConfig::new(Task::Dbar), f),
        Command::Report { config, task, flags } => {
            let mut c = RunConfig::load(&config)?;
            if let Some(t) = task {
                c.task = t;
            }
            (c, flags)
        }
    };
    flags.apply(&mut config);
    Ok(config)
}

/// Runs the task, writes the report to `--out` (or stdout) and returns the summary line.
pub fn execute(config: &RunConfig) -> Result<String, CliError> {
    let out = tasks::run(config)?;
    match config.out_path() {
        Some(path) => {
            fs::write(path, &out.body)
                .map_err(|e| CliError::Invalid(format!("cannot write {}: {e}", path.display())))?;
        }
        None => print!("{}", out.body),
    }
    Ok(out.summary)
}
