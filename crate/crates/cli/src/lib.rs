//! Verification sweeps over the `sqrtsieve` library, their configuration and
//! their reports.

pub mod config;
pub mod coverage;
pub mod report;
pub mod sweeps;

use config::{ConfigError, ExperimentConfig, Grid, LoadError};
use report::Report;

/// Why a run stopped before producing a report.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RunError {
    #[error("config error: {0}")]
    Config(ConfigError),
    #[error("I/O error: {0}")]
    Io(String),
    #[error("instance too large: {0}")]
    Oversize(String),
    #[error("evaluation failed: {0}")]
    Eval(sqrtsieve::Error),
}

impl RunError {
    /// Process exit status: 1 for evaluation failures, 2 for configuration,
    /// 3 for I/O and 4 for the size guards.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Eval(_) => 1,
            RunError::Config(_) => 2,
            RunError::Io(_) => 3,
            RunError::Oversize(_) => 4,
        }
    }
}

impl From<sqrtsieve::Error> for RunError {
    fn from(e: sqrtsieve::Error) -> Self {
        match e {
            sqrtsieve::Error::Oversize { .. } | sqrtsieve::Error::TooLarge { .. } => {
                RunError::Oversize(e.to_string())
            }
            e => RunError::Eval(e),
        }
    }
}

impl From<LoadError> for RunError {
    fn from(e: LoadError) -> Self {
        match e {
            LoadError::Io(m) => RunError::Io(m),
            LoadError::Config(c) => RunError::Config(c),
        }
    }
}

/// Exit status when hard checks fail.
pub const EXIT_CHECK_FAILED: i32 = 1;

/// Runs the sweep selected by `config`.
pub fn run(config: &ExperimentConfig) -> Result<Report, RunError> {
    let seed = config.seed;
    match &config.grid {
        Grid::Gauss(g) => sweeps::gauss::run(g, seed),
        Grid::Sqrt(g) => sweeps::sqrt::run(g, seed),
        Grid::Expsum(g) => sweeps::expsum::run(g, seed),
        Grid::Bilinear(g) => sweeps::bilinear::run(g, seed),
        Grid::Farey(g) => sweeps::farey::run(g, seed),
        Grid::Sieve(g) => sweeps::sieve::run(g, seed),
        Grid::Thm3(g) => sweeps::thm3::run(g, seed),
    }
}
