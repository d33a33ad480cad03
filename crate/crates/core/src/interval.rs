//! Closed bounded intervals with generalized-Hukuhara arithmetic.
//!
//! Endpoints are plain `f64` with no outward rounding: the intervals model
//! uncertainty sets rather than rigorous enclosures. Dominance comparisons
//! take an absolute slack so round-off does not flip a classification.

use std::fmt;

use crate::error::{Error, Result};

/// Default absolute slack for dominance comparisons.
pub const DEFAULT_EPS: f64 = 1e-9;

/// A closed bounded interval `[lo, hi]` with `lo <= hi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    lo: f64,
    hi: f64,
}

impl Interval {
    pub const ZERO: Interval = Interval { lo: 0.0, hi: 0.0 };

    /// Rejects `lo > hi` and non-finite endpoints; never swaps.
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !lo.is_finite() || !hi.is_finite() || lo > hi {
            return Err(Error::InvalidInterval { lo, hi });
        }
        Ok(Interval { lo, hi })
    }

    /// The degenerate interval `[p, p]`.
    pub fn point(p: f64) -> Self {
        debug_assert!(p.is_finite());
        Interval { lo: p, hi: p }
    }

    /// Builds `[min(a, b), max(a, b)]`.
    pub fn hull(a: f64, b: f64) -> Self {
        Interval {
            lo: a.min(b),
            hi: a.max(b),
        }
    }

    pub(crate) fn ordered(lo: f64, hi: f64) -> Self {
        debug_assert!(lo <= hi, "unordered endpoints [{lo}, {hi}]");
        Interval { lo, hi }
    }

    #[inline]
    pub fn lo(&self) -> f64 {
        self.lo
    }

    #[inline]
    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn is_degenerate(&self) -> bool {
        self.lo == self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn add(self, other: Interval) -> Interval {
        Interval::ordered(self.lo + other.lo, self.hi + other.hi)
    }

    /// `k ⊙ A`; a negative factor swaps the endpoints.
    pub fn scale(self, k: f64) -> Interval {
        if k >= 0.0 {
            Interval::ordered(k * self.lo, k * self.hi)
        } else {
            Interval::ordered(k * self.hi, k * self.lo)
        }
    }

    /// `A ⊖_gH B`.
    pub fn gh_sub(self, other: Interval) -> Interval {
        Interval::hull(self.lo - other.lo, self.hi - other.hi)
    }

    /// Minkowski difference `[a.lo - b.hi, a.hi - b.lo]`.
    pub(crate) fn minkowski_sub(self, other: Interval) -> Interval {
        Interval::ordered(self.lo - other.hi, self.hi - other.lo)
    }

    /// `max(|lo|, |hi|)`.
    pub fn norm(&self) -> f64 {
        self.lo.abs().max(self.hi.abs())
    }

    pub fn dominance(&self, other: &Interval) -> Dominance {
        dominance_with(*self, *other, DEFAULT_EPS)
    }

    /// `self ⪯ other` with the default slack.
    pub fn leq(&self, other: &Interval) -> bool {
        self.leq_with(other, DEFAULT_EPS)
    }

    pub fn leq_with(&self, other: &Interval, eps: f64) -> bool {
        self.lo <= other.lo + eps && self.hi <= other.hi + eps
    }

    /// Smallest endpoint slack of `self ⪯ other`; negative when violated.
    pub fn margin_to(&self, other: &Interval) -> f64 {
        (other.lo - self.lo).min(other.hi - self.hi)
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

pub fn add(a: Interval, b: Interval) -> Interval {
    a.add(b)
}

pub fn scalar_mul(k: f64, a: Interval) -> Interval {
    a.scale(k)
}

pub fn gh_difference(a: Interval, b: Interval) -> Interval {
    a.gh_sub(b)
}

pub fn interval_norm(a: Interval) -> f64 {
    a.norm()
}

/// Outcome of comparing two intervals under the dominance order.
///
/// `Less` and `Equal` together make up `A ⪯ B`; see [`Dominance::is_leq`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dominance {
    Equal,
    /// `A ≺ B`.
    Less,
    /// `B ≺ A`.
    Greater,
    Incomparable,
}

impl Dominance {
    pub fn is_leq(self) -> bool {
        matches!(self, Dominance::Equal | Dominance::Less)
    }

    pub fn is_geq(self) -> bool {
        matches!(self, Dominance::Equal | Dominance::Greater)
    }
}

pub fn dominance(a: Interval, b: Interval) -> Dominance {
    dominance_with(a, b, DEFAULT_EPS)
}

/// Dominance with absolute slack `eps`; `eps = 0` gives the exact order.
pub fn dominance_with(a: Interval, b: Interval, eps: f64) -> Dominance {
    let le = a.lo <= b.lo + eps && a.hi <= b.hi + eps;
    let ge = b.lo <= a.lo + eps && b.hi <= a.hi + eps;
    match (le, ge) {
        (true, true) => Dominance::Equal,
        (true, false) => Dominance::Less,
        (false, true) => Dominance::Greater,
        (false, false) => Dominance::Incomparable,
    }
}

/// Least upper bound of a family under `⪯`: endpoint-wise maxima.
pub fn sup_family(family: &[Interval]) -> Result<Interval> {
    let (first, rest) = family.split_first().ok_or(Error::EmptyFamily)?;
    Ok(rest.iter().fold(*first, |acc, a| {
        Interval::ordered(acc.lo.max(a.lo), acc.hi.max(a.hi))
    }))
}

/// Greatest lower bound of a family under `⪯`: endpoint-wise minima.
pub fn inf_family(family: &[Interval]) -> Result<Interval> {
    let (first, rest) = family.split_first().ok_or(Error::EmptyFamily)?;
    Ok(rest.iter().fold(*first, |acc, a| {
        Interval::ordered(acc.lo.min(a.lo), acc.hi.min(a.hi))
    }))
}

/// An interval or one of the markers used by proper extended IVFs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtInterval {
    Finite(Interval),
    PlusInf,
    MinusInf,
}

impl ExtInterval {
    pub fn finite(&self) -> Option<Interval> {
        match self {
            ExtInterval::Finite(a) => Some(*a),
            _ => None,
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, ExtInterval::Finite(_))
    }

    /// Positive scaling is the only arithmetic defined on the markers.
    pub fn scale(self, k: f64) -> Result<ExtInterval> {
        match self {
            ExtInterval::Finite(a) => Ok(ExtInterval::Finite(a.scale(k))),
            marker if k > 0.0 => Ok(marker),
            _ => Err(Error::InfiniteArithmetic("non-positive scaling of a marker")),
        }
    }

    pub fn add(self, other: ExtInterval) -> Result<ExtInterval> {
        match (self, other) {
            (ExtInterval::Finite(a), ExtInterval::Finite(b)) => Ok(ExtInterval::Finite(a.add(b))),
            _ => Err(Error::InfiniteArithmetic("addition")),
        }
    }

    pub fn dominance(&self, other: &ExtInterval) -> Dominance {
        self.dominance_with(other, DEFAULT_EPS)
    }

    pub fn dominance_with(&self, other: &ExtInterval, eps: f64) -> Dominance {
        use ExtInterval::*;
        match (self, other) {
            (Finite(a), Finite(b)) => dominance_with(*a, *b, eps),
            (PlusInf, PlusInf) | (MinusInf, MinusInf) => Dominance::Equal,
            (_, PlusInf) | (MinusInf, _) => Dominance::Less,
            (PlusInf, _) | (_, MinusInf) => Dominance::Greater,
        }
    }

    pub fn leq(&self, other: &ExtInterval) -> bool {
        self.dominance(other).is_leq()
    }

    /// Endpoint slack of `self ⪯ other`; `+∞` when the right side is `PlusInf`.
    pub fn margin_to(&self, other: &ExtInterval) -> f64 {
        use ExtInterval::*;
        match (self, other) {
            (Finite(a), Finite(b)) => a.margin_to(b),
            (_, PlusInf) | (MinusInf, _) => f64::INFINITY,
            (PlusInf, _) | (_, MinusInf) => f64::NEG_INFINITY,
        }
    }
}

impl From<Interval> for ExtInterval {
    fn from(a: Interval) -> Self {
        ExtInterval::Finite(a)
    }
}

impl fmt::Display for ExtInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtInterval::Finite(a) => a.fmt(f),
            ExtInterval::PlusInf => f.write_str("+inf"),
            ExtInterval::MinusInf => f.write_str("-inf"),
        }
    }
}
