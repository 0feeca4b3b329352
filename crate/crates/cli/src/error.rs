use serde::Serialize;
use thiserror::Error;
use z2harm::complex::ComplexError;
use z2harm::cover::CoverError;
use z2harm::flatmodel::FlatError;
use z2harm::hodge::HodgeError;
use z2harm::intrinsic::IntrinsicError;
use z2harm::leafspace::LeafError;

/// Failures grouped by exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("obstructed: {0}")]
    Obstructed(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse(_) => 2,
            CliError::Precondition(_) | CliError::Io(_) => 3,
            CliError::Numerical(_) => 4,
            CliError::Obstructed(_) => 5,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Parse(_) => "PARSE",
            CliError::Precondition(_) => "PRECONDITION",
            CliError::Numerical(_) => "NUMERICAL",
            CliError::Obstructed(_) => "OBSTRUCTED",
            CliError::Io(_) => "IO",
        }
    }

    pub fn report(&self) -> ErrorReport {
        ErrorReport { kind: self.kind(), exit_code: self.exit_code(), message: self.to_string() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ErrorReport {
    pub kind: &'static str,
    pub exit_code: i32,
    pub message: String,
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Parse(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<ComplexError> for CliError {
    fn from(e: ComplexError) -> Self {
        match e {
            ComplexError::Arithmetic(_) => CliError::Numerical(e.to_string()),
            _ => CliError::Precondition(e.to_string()),
        }
    }
}

impl From<CoverError> for CliError {
    fn from(e: CoverError) -> Self {
        match e {
            CoverError::Complex(c) => c.into(),
            _ => CliError::Precondition(e.to_string()),
        }
    }
}

impl From<HodgeError> for CliError {
    fn from(e: HodgeError) -> Self {
        match e {
            HodgeError::Convergence { .. } => CliError::Numerical(e.to_string()),
            _ => CliError::Precondition(e.to_string()),
        }
    }
}

impl From<FlatError> for CliError {
    fn from(e: FlatError) -> Self {
        match e {
            FlatError::Complex(c) => c.into(),
            FlatError::Cover(c) => c.into(),
            _ => CliError::Precondition(e.to_string()),
        }
    }
}

impl From<LeafError> for CliError {
    fn from(e: LeafError) -> Self {
        match e {
            LeafError::Construction(_) => CliError::Numerical(e.to_string()),
            _ => CliError::Precondition(e.to_string()),
        }
    }
}

impl From<IntrinsicError> for CliError {
    fn from(e: IntrinsicError) -> Self {
        match e {
            IntrinsicError::MorseObstruction(_) | IntrinsicError::PruneFailed(_) => CliError::Obstructed(e.to_string()),
            IntrinsicError::Cover(c) => c.into(),
            IntrinsicError::Leaf(l) => l.into(),
            _ => CliError::Precondition(e.to_string()),
        }
    }
}
