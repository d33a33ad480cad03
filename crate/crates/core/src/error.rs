//! Error type shared by every module of the crate.

use thiserror::Error;

use crate::expr::ParseError;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Interval endpoints out of order, or not finite.
    #[error("invalid interval [{lo}, {hi}]")]
    InvalidInterval { lo: f64, hi: f64 },

    #[error("supremum of an empty family")]
    EmptyFamily,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    /// Arithmetic that is undefined on the `±∞` markers.
    #[error("arithmetic on an infinite interval marker: {0}")]
    InfiniteArithmetic(&'static str),

    #[error(transparent)]
    Parse(#[from] ParseError),

    #[error("division by zero")]
    DivisionByZero,

    #[error("point {point:?} lies outside the domain")]
    OutsideDomain { point: Vec<f64> },

    /// `lower(x) > upper(x)`: the endpoint pair does not define an interval.
    #[error("lower endpoint {lo} exceeds upper endpoint {hi} at {point:?}")]
    EndpointOrder { lo: f64, hi: f64, point: Vec<f64> },

    #[error("no feasible step from {point:?} along {direction:?}")]
    NoFeasibleStep { point: Vec<f64>, direction: Vec<f64> },

    /// The one-sided difference quotients did not settle.
    #[error("nonsmooth-uncertain: difference quotients disagree ({first} vs {second})")]
    NonsmoothUncertain { first: f64, second: f64 },

    #[error("not gH-differentiable here (component {component})")]
    NotDifferentiable { component: usize },

    /// Raised by the singleton subdifferential constructor at a kink.
    #[error("not gH-differentiable here (component {component}); use the support-oracle representation")]
    NoSingleton { component: usize },

    #[error("invalid box on axis {axis}: [{lo}, {hi}]")]
    InvalidBox { axis: usize, lo: f64, hi: f64 },

    #[error("point {point:?} is not in the set")]
    NotInSet { point: Vec<f64> },

    #[error("containment violated: {0}")]
    NotContained(String),

    #[error("point must be interior to the domain")]
    BoundaryPoint,

    #[error("point set must be nonempty")]
    EmptySet,

    #[error("point is outside the effective domain")]
    InfiniteValue,

    #[error("convexity check failed: {0}")]
    NotConvex(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}
