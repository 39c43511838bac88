//! Error classes and the exit codes they map to.

use std::fmt;

use fano_cqed::Error;

/// 1: numerical failure or a check that did not pass. 2: the input was
/// rejected. 3: a fit ended without converging.
#[derive(Debug)]
pub enum Failure {
    Input(String),
    Numerical(String),
    NotConverged(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Numerical(_) => 1,
            Failure::Input(_) => 2,
            Failure::NotConverged(_) => 3,
        }
    }

    pub fn input(msg: impl fmt::Display) -> Self {
        Failure::Input(msg.to_string())
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Input(m) => write!(f, "invalid input: {m}"),
            Failure::Numerical(m) => write!(f, "{m}"),
            Failure::NotConverged(m) => write!(f, "fit did not converge: {m}"),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParameter { .. } | Error::Validation(_) | Error::Csv(_) => Failure::Input(e.to_string()),
            Error::Numerical(_) | Error::Fit(_) | Error::Io(_) => Failure::Numerical(e.to_string()),
        }
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Input(e.to_string())
    }
}

pub type CliResult<T> = Result<T, Failure>;
