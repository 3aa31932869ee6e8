//! Error taxonomy shared by the whole toolkit.
//!
//! Every variant is either a rejected input (precondition violation) or a
//! numerical failure of a solver. The split is what the CLI exit-code
//! contract keys on, so it lives here rather than in the binary.

use thiserror::Error;

/// Coarse classification of an [`Error`], used for process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    /// Unusable input: bad parameters, violated preconditions, malformed data.
    InvalidInput,
    /// A numerical process failed: ill conditioning or a blown-up evolution.
    NumericalFailure,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A field that must be negligible on the boundary ring is not.
    #[error("boundary leak: {0}")]
    BoundaryLeak(String),

    /// A momentum vector that should satisfy k.k = E does not.
    #[error("off shell: {0}")]
    OffShell(String),

    /// Arc too short for the independence certificate to mean anything.
    #[error("degenerate arc: {0}")]
    DegenerateArc(String),

    /// The far-field annulus overlaps the potential's numerical support.
    #[error("annulus too small: {0}")]
    AnnulusTooSmall(String),

    /// Too few usable radial shells for a decay-rate fit.
    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    /// Dense solve reported conditioning beyond the trusted range.
    #[error("singular system: {0}")]
    SingularSystem(String),

    /// Time stepping blew up.
    #[error("instability: {0}")]
    Instability(String),
}

impl Error {
    pub fn category(&self) -> ErrorCategory {
        match self {
            Error::SingularSystem(_) | Error::Instability(_) => ErrorCategory::NumericalFailure,
            _ => ErrorCategory::InvalidInput,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
