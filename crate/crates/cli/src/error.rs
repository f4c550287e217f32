use std::path::{Path, PathBuf};

use thiserror::Error;

pub const EXIT_USAGE: u8 = 2;
pub const EXIT_IO: u8 = 3;
pub const EXIT_VALIDATION: u8 = 4;
pub const EXIT_INFEASIBLE: u8 = 5;
pub const EXIT_NONCONVERGENCE: u8 = 6;
pub const EXIT_FIT: u8 = 7;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    File {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Model(#[from] cryolink::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        use cryolink::Error as E;
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::File { .. } => EXIT_IO,
            CliError::Model(e) => match e {
                E::Io(_) => EXIT_IO,
                E::Schema { .. } | E::Validation { .. } | E::Domain(_) => EXIT_VALIDATION,
                E::Infeasible { .. } => EXIT_INFEASIBLE,
                E::NonConvergence(_) => EXIT_NONCONVERGENCE,
                E::Fit(_) => EXIT_FIT,
            },
        }
    }

    pub fn kind(&self) -> &'static str {
        match self.exit_code() {
            EXIT_USAGE => "usage",
            EXIT_IO => "io",
            EXIT_VALIDATION => "validation",
            EXIT_INFEASIBLE => "infeasible",
            EXIT_NONCONVERGENCE => "non_convergence",
            _ => "fit",
        }
    }
}

pub fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::File {
        path: path.to_path_buf(),
        source,
    })
}

pub fn write(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|source| CliError::File {
        path: path.to_path_buf(),
        source,
    })
}
