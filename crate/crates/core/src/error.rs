use thiserror::Error;

/// Errors produced anywhere in the thermal model, config ingestion or fitting.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A curve or model was evaluated outside of its declared domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// The configuration document does not match the schema.
    #[error("schema error at `{path}`: {message}")]
    Schema { path: String, message: String },

    /// A structurally valid document violates a model invariant.
    #[error("validation error at `{path}`: {message}")]
    Validation { path: String, message: String },

    /// A sink cannot absorb its load inside the cooling curve domain.
    #[error("infeasible operating point on stage {stage}: {message}")]
    Infeasible { stage: usize, message: String },

    /// An iterative procedure ran out of iterations or steps.
    #[error("no convergence: {0}")]
    NonConvergence(String),

    /// Measurement data or fit input is unusable.
    #[error("fit error: {0}")]
    Fit(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn validation(path: impl Into<String>, msg: impl Into<String>) -> Self {
        Error::Validation {
            path: path.into(),
            message: msg.into(),
        }
    }

    pub(crate) fn schema(path: impl Into<String>, msg: impl Into<String>) -> Self {
        Error::Schema {
            path: path.into(),
            message: msg.into(),
        }
    }

    /// Prefixes the stage index onto solver errors so callers can tell which
    /// cascade step failed.
    pub fn in_stage(self, stage: usize) -> Self {
        match self {
            Error::Infeasible { .. } => self,
            Error::NonConvergence(m) => Error::NonConvergence(format!("stage {stage}: {m}")),
            Error::Domain(m) => Error::Domain(format!("stage {stage}: {m}")),
            other => other,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
