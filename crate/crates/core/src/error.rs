use std::path::PathBuf;

/// Errors raised by the analytic kernels, the simulator and the experiment
/// harness.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An input lies outside the region where the quantity is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// A numerical routine (series, quadrature) did not converge.
    #[error("numeric error in {routine}: {detail}")]
    Numeric {
        routine: &'static str,
        detail: String,
    },

    /// Invalid network, SIC or sweep configuration.
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("I/O error at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed configuration file: {0}")]
    Parse(#[from] serde_json::Error),

    #[error("CSV error at {path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub(crate) fn ensure_finite(name: &str, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("{name} must be finite, got {value}")))
    }
}
