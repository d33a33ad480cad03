//! Support functions of subsets of `I(R)^n`:
//! `ψ*_S(x) = sup { xᵀ ⊙ Â : Â ∈ S }` with the supremum taken under `⪯`.

use std::fmt;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::interval::{sup_family, ExtInterval, Interval, DEFAULT_EPS};
use crate::ivector::{dot, euclidean_norm, special_product, vnorm, IVector};

/// Number of random unit directions added to `±eᵢ` by [`default_directions`].
pub const DEFAULT_RANDOM_DIRECTIONS: usize = 128;

pub type SupportFn = Arc<dyn Fn(&[f64]) -> Result<ExtInterval> + Send + Sync>;

#[derive(Clone)]
pub enum IVecSet {
    Finite(Vec<IVector>),
    /// `{ Ĝ : L ⪯ Ĝ ⪯ U }` componentwise.
    IntervalBox { lower: IVector, upper: IVector },
    Oracle { dim: usize, support: SupportFn },
}

impl fmt::Debug for IVecSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IVecSet::Finite(v) => f.debug_tuple("Finite").field(v).finish(),
            IVecSet::IntervalBox { lower, upper } => f
                .debug_struct("IntervalBox")
                .field("lower", lower)
                .field("upper", upper)
                .finish(),
            IVecSet::Oracle { dim, .. } => write!(f, "Oracle {{ dim: {dim} }}"),
        }
    }
}

impl IVecSet {
    pub fn finite(members: Vec<IVector>) -> Result<Self> {
        let first = members.first().ok_or(Error::EmptySet)?;
        let n = first.len();
        if let Some(bad) = members.iter().find(|m| m.len() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: bad.len(),
            });
        }
        Ok(IVecSet::Finite(members))
    }

    pub fn interval_box(lower: IVector, upper: IVector) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::DimensionMismatch {
                expected: lower.len(),
                found: upper.len(),
            });
        }
        if !lower.leq_with(&upper, 0.0) {
            return Err(Error::InvalidParameter(format!(
                "interval box needs lower ⪯ upper componentwise, got {lower} and {upper}"
            )));
        }
        Ok(IVecSet::IntervalBox { lower, upper })
    }

    pub fn oracle(dim: usize, f: impl Fn(&[f64]) -> Result<ExtInterval> + Send + Sync + 'static) -> Self {
        IVecSet::Oracle {
            dim,
            support: Arc::new(f),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            IVecSet::Finite(v) => v[0].len(),
            IVecSet::IntervalBox { lower, .. } => lower.len(),
            IVecSet::Oracle { dim, .. } => *dim,
        }
    }

    /// Membership of a real vector embedded as degenerate intervals, for
    /// the representations where it is decidable.
    pub fn contains_point(&self, p: &[f64]) -> Option<bool> {
        match self {
            IVecSet::Finite(v) => Some(v.iter().any(|m| *m == IVector::degenerate(p))),
            IVecSet::IntervalBox { lower, upper } => {
                let g = IVector::degenerate(p);
                Some(lower.leq_with(&g, 0.0) && g.leq_with(upper, 0.0))
            }
            IVecSet::Oracle { .. } => None,
        }
    }

    pub fn support_value(&self, x: &[f64]) -> Result<ExtInterval> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: x.len(),
            });
        }
        match self {
            IVecSet::Finite(members) => {
                let values = members
                    .iter()
                    .map(|m| special_product(x, m))
                    .collect::<Result<Vec<_>>>()?;
                sup_family(&values).map(ExtInterval::Finite)
            }
            IVecSet::IntervalBox { lower, upper } => {
                // Choosing Uᵢ where xᵢ ≥ 0 and Lᵢ elsewhere maximizes both
                // endpoint sums at once, hence the hull as well.
                let best = x
                    .iter()
                    .enumerate()
                    .map(|(i, &xi)| if xi >= 0.0 { upper[i] } else { lower[i] })
                    .collect();
                special_product(x, &IVector::new(best)?).map(ExtInterval::Finite)
            }
            IVecSet::Oracle { support, .. } => support(x),
        }
    }
}

pub fn support_value(s: &IVecSet, x: &[f64]) -> Result<ExtInterval> {
    s.support_value(x)
}

/// Outcome of a sampled direction-wise comparison.
#[derive(Debug, Clone, PartialEq)]
pub enum DirectionCheck {
    Pass,
    Counter(Vec<f64>),
}

impl DirectionCheck {
    pub fn passed(&self) -> bool {
        matches!(self, DirectionCheck::Pass)
    }
}

/// Checks `ψ*_{s1}(d) ⪯ ψ*_{s2}(d)` (slack 1e−9) and reports the first
/// failing direction.
pub fn support_dominates(s1: &IVecSet, s2: &IVecSet, directions: &[Vec<f64>]) -> Result<DirectionCheck> {
    if s1.dim() != s2.dim() {
        return Err(Error::DimensionMismatch {
            expected: s1.dim(),
            found: s2.dim(),
        });
    }
    for d in directions {
        let a = s1.support_value(d)?;
        let b = s2.support_value(d)?;
        if !a.dominance_with(&b, DEFAULT_EPS).is_leq() {
            return Ok(DirectionCheck::Counter(d.clone()));
        }
    }
    Ok(DirectionCheck::Pass)
}

#[derive(Debug, Clone, PartialEq)]
pub enum Inclusion {
    /// `exact` is set when the answer was decided by direct membership
    /// rather than by sampled directions.
    Included { exact: bool },
    Counter(Vec<f64>),
}

impl Inclusion {
    pub fn is_included(&self) -> bool {
        matches!(self, Inclusion::Included { .. })
    }
}

impl fmt::Display for Inclusion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Inclusion::Included { exact: true } => f.write_str("included"),
            Inclusion::Included { exact: false } => f.write_str("included (sampled)"),
            Inclusion::Counter(d) => write!(f, "counter-direction {d:?}"),
        }
    }
}

/// Support of a finite set of real vectors: `max ⟨d, p⟩` as a degenerate interval.
fn point_support(p: &[Vec<f64>], d: &[f64]) -> Interval {
    Interval::point(p.iter().map(|v| dot(d, v)).fold(f64::NEG_INFINITY, f64::max))
}

/// Tests `P ⊆ Q` through `ψ*_P ⪯ ψ*_Q`, with points of `P` read as
/// degenerate interval vectors.
pub fn inclusion_test(p: &[Vec<f64>], q: &IVecSet, directions: &[Vec<f64>]) -> Result<Inclusion> {
    if p.is_empty() {
        return Err(Error::EmptySet);
    }
    let n = q.dim();
    if let Some(bad) = p.iter().find(|v| v.len() != n) {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: bad.len(),
        });
    }
    if let IVecSet::IntervalBox { lower, upper } = q {
        // [pᵢ,pᵢ] lies in the box iff L̄ᵢ ≤ pᵢ ≤ U̲ᵢ; the violated side
        // names a separating axis direction.
        for v in p {
            for i in 0..n {
                let mut d = vec![0.0; n];
                if v[i] > upper[i].lo() {
                    d[i] = 1.0;
                } else if v[i] < lower[i].hi() {
                    d[i] = -1.0;
                } else {
                    continue;
                }
                return Ok(Inclusion::Counter(d));
            }
        }
        return Ok(Inclusion::Included { exact: true });
    }
    for d in directions {
        let lhs = ExtInterval::Finite(point_support(p, d));
        let rhs = q.support_value(d)?;
        if !lhs.dominance_with(&rhs, DEFAULT_EPS).is_leq() {
            return Ok(Inclusion::Counter(d.clone()));
        }
    }
    Ok(Inclusion::Included { exact: false })
}

#[derive(Debug, Clone, PartialEq)]
pub enum Boundedness {
    /// Every member satisfies `vnorm(Ĝ) ≤ bound`.
    Bounded { bound: f64 },
    Unbounded(Vec<f64>),
}

impl Boundedness {
    pub fn bound(&self) -> Option<f64> {
        match self {
            Boundedness::Bounded { bound } => Some(*bound),
            Boundedness::Unbounded(_) => None,
        }
    }
}

/// Evaluates the support at `±eᵢ` and at `directions`; finite everywhere
/// means bounded. For oracles the bound is `Σᵢ mᵢ`, where `mᵢ` is the
/// largest endpoint magnitude of `ψ*(eᵢ)` and `ψ*(−eᵢ)`: those two values
/// enclose every endpoint of the `i`-th component of every member.
pub fn boundedness_check(s: &IVecSet, directions: &[Vec<f64>]) -> Result<Boundedness> {
    let n = s.dim();
    let mut total = 0.0;
    for i in 0..n {
        let mut m: f64 = 0.0;
        for sign in [1.0, -1.0] {
            let mut e = vec![0.0; n];
            e[i] = sign;
            match s.support_value(&e)? {
                ExtInterval::Finite(a) => m = m.max(a.norm()),
                ExtInterval::PlusInf => return Ok(Boundedness::Unbounded(e)),
                ExtInterval::MinusInf => return Err(Error::EmptySet),
            }
        }
        total += m;
    }
    for d in directions {
        match s.support_value(d)? {
            ExtInterval::Finite(_) => {}
            ExtInterval::PlusInf => return Ok(Boundedness::Unbounded(d.clone())),
            ExtInterval::MinusInf => return Err(Error::EmptySet),
        }
    }
    let bound = match s {
        IVecSet::Finite(members) => members.iter().map(vnorm).fold(0.0, f64::max),
        IVecSet::IntervalBox { lower, upper } => (0..n).map(|i| lower[i].norm().max(upper[i].norm())).sum(),
        IVecSet::Oracle { .. } => total,
    };
    Ok(Boundedness::Bounded { bound })
}

/// `±eᵢ` followed by `count` seeded unit vectors.
pub fn default_directions(n: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut out = Vec::with_capacity(2 * n + count);
    for i in 0..n {
        for sign in [1.0, -1.0] {
            let mut e = vec![0.0; n];
            e[i] = sign;
            out.push(e);
        }
    }
    out.extend(random_unit_vectors(n, count, seed));
    out
}

pub fn random_unit_vectors(n: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let v: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
        let r = euclidean_norm(&v);
        if r > 1e-9 {
            out.push(v.into_iter().map(|x| x / r).collect());
        }
    }
    out
}
