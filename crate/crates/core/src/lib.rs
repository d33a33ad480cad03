//! Generalized-Hukuhara interval calculus and weak-sharp-minima verifiers.
//!
//! Layers, bottom up:
//!
//! - [`interval`], [`ivector`]: closed intervals, gH-difference, dominance,
//!   interval vectors and the special product with real vectors.
//! - [`expr`]: the expression language used for endpoint functions.
//! - [`ivf`]: interval-valued functions, directional derivatives,
//!   gH-gradients, sampled convexity and Lipschitz estimates.
//! - [`geometry`]: boxes, projections, tangent and normal cones.
//! - [`support`]: support functions of subsets of `I(R)^n`.
//! - [`subdiff`]: gH-subdifferentials and membership oracles.
//! - [`wsm`]: weak-sharp-minima checkers sharing one sampled grid.
//! - [`cli`]: problem files and the `ghwsm` command line.

pub mod cli;
pub mod error;
pub mod expr;
pub mod geometry;
pub mod interval;
pub mod ivector;
pub mod ivf;
pub mod subdiff;
pub mod support;
pub mod wsm;

pub use error::{Error, Result};
pub use geometry::{BoxSet, ConeTag, OrthantCone};
pub use interval::{Dominance, ExtInterval, Interval};
pub use ivector::IVector;
pub use ivf::{IntervalFunction, Ivf, RestrictedIvf};
