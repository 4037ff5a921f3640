//! Error types shared across the crate.

use thiserror::Error;

/// A density matrix or Bloch-form state failed a structural check.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum StateError {
    #[error("matrix is not Hermitian (max |rho - rho^dag| = {0:.3e})")]
    NotHermitian(f64),
    #[error("trace differs from one by {0:.3e}")]
    Trace(f64),
    #[error("matrix is not positive semidefinite (min eigenvalue {0:.3e})")]
    NotPositive(f64),
    #[error("not an X state: entries outside the diagonal and skew diagonal are nonzero at {0:?}")]
    NotXState(Vec<(usize, usize)>),
    #[error("measurement direction is not a unit vector (|v| = {0})")]
    NotUnit(f64),
}

/// An analytic routine was called outside the parameter region it covers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum DispatchError {
    #[error("local purities differ: |x3| = {x3}, |y3| = {y3}")]
    PurityMismatch { x3: f64, y3: f64 },
    #[error("case requires t1 = t2, got t1 = {t1}, t2 = {t2}")]
    ExpectedEqualT { t1: f64, t2: f64 },
    #[error("case requires t1 != t2, got t1 = {t1}, t2 = {t2}")]
    ExpectedUnequalT { t1: f64, t2: f64 },
    #[error("closed form needs every t_i nonzero, got t = ({0}, {1}, {2})")]
    ZeroCorrelation(f64, f64, f64),
    #[error(transparent)]
    State(#[from] StateError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ChannelError {
    #[error("{name} = {value} is outside its domain {domain}")]
    Domain {
        name: &'static str,
        value: f64,
        domain: &'static str,
    },
    #[error("Kraus operators are not trace preserving (max deviation {0:.3e})")]
    NotTracePreserving(f64),
    #[error("Kraus family is empty")]
    Empty,
    #[error("partial trace must keep exactly two distinct subsystems")]
    InvalidSubsystems,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GridError {
    #[error("grid {azimuthal}x{polar} is too coarse: at least {min} points per angle required")]
    TooCoarse {
        azimuthal: usize,
        polar: usize,
        min: usize,
    },
    #[error("cannot parse grid spec {0:?}, expected AxB")]
    Parse(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DynamicsError {
    #[error(transparent)]
    Dispatch(#[from] DispatchError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error("time grid needs at least two points, got {0}")]
    TooFewSteps(usize),
    #[error("{name} must be positive and finite, got {value}")]
    NonPositive { name: &'static str, value: f64 },
}

/// Problems reading a state description from JSON.
#[derive(Debug, Error)]
pub enum InputError {
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("state input must contain exactly one of \"rho\", \"r\", \"xstate\" (found {0})")]
    KeyCount(usize),
    #[error("bad shape: {0}")]
    Shape(String),
}
