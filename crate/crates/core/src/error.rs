use thiserror::Error;

use crate::grid::Axis;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Errors raised by the field, detection, and vectorization stages.
#[derive(Debug, Error)]
pub enum Error {
    #[error("position ({}, {}, {}) lies outside the clamped domain", .position[0], .position[1], .position[2])]
    OutOfDomain { position: [f64; 3] },

    #[error("field vanishes at node {index:?}; phase is undefined there")]
    SingularNode { index: [usize; 3] },

    #[error("ring path around {index:?} on the {axis} plane crosses singular node {at:?}")]
    SingularPath {
        index: [usize; 3],
        axis: Axis,
        at: [usize; 3],
    },

    #[error("ring path around {index:?} on the {axis} plane leaves the grid")]
    PathOutsideGrid { index: [usize; 3], axis: Axis },

    #[error("velocity undefined at node {index:?}")]
    UndefinedVelocity { index: [usize; 3] },

    #[error("pseudo-vorticity degenerate at ({}, {}, {})", .position[0], .position[1], .position[2])]
    DegenerateDirection { position: [f64; 3] },

    #[error("numerical blow-up (NaN or Inf) at step {step}")]
    NumericalBlowup { step: u64 },

    #[error("contract violation: {0}")]
    Contract(String),

    #[error(transparent)]
    Format(#[from] FormatError),
}

/// Coarse error families; the command-line tool maps them to exit codes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorClass {
    Format,
    Numerical,
    Contract,
}

impl Error {
    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }

    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Format(_) => ErrorClass::Format,
            Error::SingularNode { .. }
            | Error::SingularPath { .. }
            | Error::UndefinedVelocity { .. }
            | Error::DegenerateDirection { .. }
            | Error::NumericalBlowup { .. } => ErrorClass::Numerical,
            Error::OutOfDomain { .. } | Error::PathOutsideGrid { .. } | Error::Contract(_) => {
                ErrorClass::Contract
            }
        }
    }
}

/// Errors from reading or writing the binary and JSON file formats.
#[derive(Debug, Error)]
pub enum FormatError {
    #[error("bad magic: expected {expected:?}, found {found:?}")]
    BadMagic { expected: [u8; 4], found: [u8; 4] },

    #[error("unsupported format version {0}")]
    UnsupportedVersion(u32),

    #[error("file truncated")]
    Truncated,

    #[error("grid dimensions overflow: {0:?}")]
    DimensionOverflow([u32; 3]),

    #[error("invalid header: {0}")]
    InvalidHeader(String),

    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(std::io::Error),
}

impl From<std::io::Error> for FormatError {
    fn from(err: std::io::Error) -> Self {
        if err.kind() == std::io::ErrorKind::UnexpectedEof {
            FormatError::Truncated
        } else {
            FormatError::Io(err)
        }
    }
}
