//! Error types shared across the toolkit.

use core::fmt;

/// Failure modes of toolkit operations.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Input outside the mathematical domain of the operation.
    Domain(&'static str),
    /// Parameters violate subextremality (spin >= mass) or positivity.
    Superextremal { mass: f64, spin: f64 },
    /// Operation requires a spherically symmetric background (spin = 0).
    SpinNotZero,
    /// Sector is invalid (e.g. vector parity with l = 0).
    InvalidSector(&'static str),
    /// Operation is not defined for this (operation, sector) combination.
    NotApplicable(&'static str),
    /// Operator and profile sectors or component counts disagree.
    SectorMismatch,
    /// Operator and profile are expressed relative to different time functions.
    GaugeMismatch,
    /// A catalog entry was requested that the background does not carry.
    NoSuchEntry,
    /// Linear system is singular to working precision.
    SingularMatrix,
    /// Iteration failed to converge within the allotted steps.
    NonConvergence { iterations: usize },
    /// Adaptive integrator step size collapsed below the minimum.
    StepSizeFailure { at: f64 },
    /// Root left the tracking domain.
    TrackingFailure,
    /// Pairing integrand decays too slowly for the tail correction.
    DivergentTail,
    /// Field is singular at the horizon in the regular gauge.
    SingularAtHorizon,
    /// CFL bound violated by the requested time step.
    CflViolation { dt: f64, limit: f64 },
    /// Non-finite value appeared during evolution.
    NanDetected { time: f64 },
    /// Config or argument validation failure.
    Invalid(&'static str),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Domain(what) => write!(f, "domain error: {what}"),
            Error::Superextremal { mass, spin } => {
                write!(f, "superextremal parameters: spin {spin} >= mass {mass}")
            }
            Error::SpinNotZero => write!(f, "operation requires spin = 0"),
            Error::InvalidSector(what) => write!(f, "invalid sector: {what}"),
            Error::NotApplicable(what) => write!(f, "not applicable: {what}"),
            Error::SectorMismatch => write!(f, "sector mismatch between operator and profile"),
            Error::GaugeMismatch => write!(f, "time-gauge mismatch (no silent conversion)"),
            Error::NoSuchEntry => write!(f, "no such catalog entry for this background"),
            Error::SingularMatrix => write!(f, "matrix is singular to working precision"),
            Error::NonConvergence { iterations } => {
                write!(f, "no convergence after {iterations} iterations")
            }
            Error::StepSizeFailure { at } => write!(f, "step size failure near r = {at}"),
            Error::TrackingFailure => write!(f, "root left the tracking domain"),
            Error::DivergentTail => write!(f, "pairing integrand decays slower than r^-1"),
            Error::SingularAtHorizon => write!(f, "field singular at the horizon"),
            Error::CflViolation { dt, limit } => {
                write!(f, "CFL violation: dt = {dt} exceeds limit {limit}")
            }
            Error::NanDetected { time } => write!(f, "non-finite value at t = {time}"),
            Error::Invalid(what) => write!(f, "invalid input: {what}"),
        }
    }
}

pub type Result<T> = core::result::Result<T, Error>;
