//! Crate-wide error type.

use std::fmt;

/// Errors produced by solvers, assembly, and configuration handling.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// An iterative procedure failed to reach its tolerance within the
    /// iteration cap. Carries the procedure name and the iteration count.
    NonConvergence { what: &'static str, iterations: usize },
    /// A quadrature rule has fewer points than the basis degree requires.
    RuleTooCoarse { points: usize, required: usize },
    /// The requested kernel threshold is never reached: the Gaussian peak
    /// already lies below it, so no truncation radius exists.
    NoTruncation,
    /// A pivot in the dense factorization fell below 1e-14. Cannot occur
    /// for negative semi-definite operators with positive step sizes; if it
    /// fires, an invariant was violated upstream.
    SingularSystem { pivot: f64 },
    /// A requested snapshot time is not an integer multiple of the step.
    MisalignedSnapshot { time: f64, dt: f64 },
    /// The explicit local wave solver was asked to run past its CFL limit.
    CflViolation { courant: f64 },
    /// Two snapshots being compared do not share the same sample grid.
    GridMismatch,
    /// A run configuration failed validation. The message names the field.
    InvalidConfig(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::NonConvergence { what, iterations } => {
                write!(f, "{what} did not converge within {iterations} iterations")
            }
            Error::RuleTooCoarse { points, required } => {
                write!(f, "quadrature rule has {points} points, needs at least {required}")
            }
            Error::NoTruncation => {
                write!(f, "kernel never exceeds the requested threshold; no truncation radius")
            }
            Error::SingularSystem { pivot } => {
                write!(f, "factorization pivot {pivot:e} below 1e-14; system is singular")
            }
            Error::MisalignedSnapshot { time, dt } => {
                write!(f, "snapshot time {time} is not a multiple of dt = {dt}")
            }
            Error::CflViolation { courant } => {
                write!(f, "CFL number {courant} exceeds 1 for the local wave reference")
            }
            Error::GridMismatch => write!(f, "snapshots use different sample grids"),
            Error::InvalidConfig(msg) => write!(f, "invalid config: {msg}"),
        }
    }
}

impl std::error::Error for Error {}

pub type Result<T> = std::result::Result<T, Error>;
