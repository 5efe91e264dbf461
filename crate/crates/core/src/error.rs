use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the simulator.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("{what} index {index} out of range (len {len})")]
    IndexOutOfRange {
        what: &'static str,
        index: usize,
        len: usize,
    },

    #[error("measurement report has {got} entries, deployment has {expected} stations")]
    ReportLength { expected: usize, got: usize },

    #[error("untrained agent: the Q-table holds no contexts")]
    UntrainedAgent,

    #[error("stored context has no recorded actions")]
    EmptyContext,

    #[error("unsupported schema_version {found} (supported: {supported})")]
    SchemaVersion { found: u32, supported: u32 },

    #[error("Q-table was trained on scenario {found}, current scenario is {expected}")]
    ScenarioHashMismatch { expected: String, found: String },

    #[error("unknown scenario '{0}' (known: env1, env2, env3, fig4)")]
    UnknownScenario(String),

    #[error("I/O error on {}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed document")]
    Json(#[from] serde_json::Error),

    #[error("csv output failed")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by bad input rather than the environment.
    pub fn is_validation(&self) -> bool {
        !matches!(self, Error::Io { .. } | Error::Csv(_))
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
