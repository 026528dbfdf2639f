use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{file}: row {row}, column `{column}`: {message}")]
    Schema {
        file: String,
        row: usize,
        column: String,
        message: String,
    },

    #[error("invalid network: {0}")]
    InvalidNetwork(String),

    #[error("invalid synthetic spec: {0}")]
    InvalidSyntheticSpec(String),

    #[error("invalid disease parameters: {0}")]
    InvalidParams(String),

    #[error("unknown CBG index {0}")]
    UnknownCbg(usize),

    #[error("vaccination hour {vaccination_hour} is after the horizon {horizon}")]
    VaccinationAfterHorizon {
        vaccination_hour: usize,
        horizon: usize,
    },

    #[error("invalid strategy: {0}")]
    InvalidStrategy(String),

    #[error(
        "infeasible charge for CBG {cbg}: group {group} would reach {would_be:.3} of {budget:.3}"
    )]
    InfeasibleCharge {
        cbg: usize,
        group: usize,
        would_be: f64,
        budget: f64,
    },

    #[error("undefined metric: {0}")]
    UndefinedMetric(String),

    #[error("invalid experiment config: {0}")]
    InvalidConfig(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    TomlDe(#[from] toml::de::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn schema(
        file: &str,
        row: usize,
        column: impl Into<String>,
        message: impl Into<String>,
    ) -> Self {
        Error::Schema {
            file: file.to_string(),
            row,
            column: column.into(),
            message: message.into(),
        }
    }

    /// Whether the error stems from user configuration rather than a runtime failure.
    /// Missing input paths count as configuration errors.
    pub fn is_config_error(&self) -> bool {
        if let Error::Io { source, .. } = self {
            return source.kind() == std::io::ErrorKind::NotFound;
        }
        matches!(
            self,
            Error::Schema { .. }
                | Error::InvalidNetwork(_)
                | Error::InvalidSyntheticSpec(_)
                | Error::InvalidParams(_)
                | Error::InvalidStrategy(_)
                | Error::InvalidConfig(_)
                | Error::Json(_)
                | Error::TomlDe(_)
        )
    }
}
