//! Interval vectors: elements of `I(R)^n`.

use std::fmt;
use std::ops::Index;

use crate::error::{Error, Result};
use crate::interval::Interval;

/// Componentwise operation selector for [`vstar`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VecOp {
    Add,
    MinkowskiSub,
    GhDiff,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IVector {
    components: Vec<Interval>,
}

impl IVector {
    pub fn new(components: Vec<Interval>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::DimensionMismatch {
                expected: 1,
                found: 0,
            });
        }
        Ok(IVector { components })
    }

    /// Embeds a real vector as degenerate intervals.
    pub fn degenerate(x: &[f64]) -> Self {
        assert!(!x.is_empty(), "interval vectors have length >= 1");
        IVector {
            components: x.iter().map(|&v| Interval::point(v)).collect(),
        }
    }

    pub fn zeros(n: usize) -> Self {
        IVector::degenerate(&vec![0.0; n])
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn components(&self) -> &[Interval] {
        &self.components
    }

    pub fn lower(&self) -> Vec<f64> {
        self.components.iter().map(Interval::lo).collect()
    }

    pub fn upper(&self) -> Vec<f64> {
        self.components.iter().map(Interval::hi).collect()
    }

    pub fn norm(&self) -> f64 {
        vnorm(self)
    }

    /// `k ⊙ Â`, componentwise.
    pub fn scale(&self, k: f64) -> IVector {
        IVector {
            components: self.components.iter().map(|a| a.scale(k)).collect(),
        }
    }

    /// Componentwise `⪯` with slack `eps`.
    pub fn leq_with(&self, other: &IVector, eps: f64) -> bool {
        self.len() == other.len()
            && self
                .components
                .iter()
                .zip(&other.components)
                .all(|(a, b)| a.leq_with(b, eps))
    }
}

impl Index<usize> for IVector {
    type Output = Interval;

    fn index(&self, i: usize) -> &Interval {
        &self.components[i]
    }
}

impl fmt::Display for IVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, a) in self.components.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{a}")?;
        }
        f.write_str(")")
    }
}

fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

pub fn vstar(a: &IVector, b: &IVector, op: VecOp) -> Result<IVector> {
    check_len(a.len(), b.len())?;
    let components = a
        .components
        .iter()
        .zip(&b.components)
        .map(|(x, y)| match op {
            VecOp::Add => x.add(*y),
            VecOp::MinkowskiSub => x.minkowski_sub(*y),
            VecOp::GhDiff => x.gh_sub(*y),
        })
        .collect();
    Ok(IVector { components })
}

/// `xᵀ ⊙ Â`: hull of the lower-endpoint and upper-endpoint inner products.
pub fn special_product(x: &[f64], a: &IVector) -> Result<Interval> {
    check_len(a.len(), x.len())?;
    let (lo_sum, hi_sum) = x
        .iter()
        .zip(&a.components)
        .fold((0.0, 0.0), |(l, h), (xi, ai)| (l + xi * ai.lo(), h + xi * ai.hi()));
    Ok(Interval::hull(lo_sum, hi_sum))
}

/// Sum of the component norms.
pub fn vnorm(a: &IVector) -> f64 {
    a.components.iter().map(Interval::norm).sum()
}

pub fn euclidean_norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}
