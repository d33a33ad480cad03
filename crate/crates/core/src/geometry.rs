//! Axis-aligned boxes with closed-form projection, distance and cones.
//!
//! Every tangent and normal cone of a box is an orthant-like product of
//! `R`, `[0, ∞)`, `(-∞, 0]` and `{0}`, so projections onto them are
//! per-axis clamps.

use rand::Rng;

use crate::error::{Error, Result};
use crate::ivector::{dot, euclidean_norm};

/// Per-axis membership tolerance.
pub const MEMBERSHIP_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct BoxSet {
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl BoxSet {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() {
            return Err(Error::DimensionMismatch {
                expected: lo.len(),
                found: hi.len(),
            });
        }
        if lo.is_empty() {
            return Err(Error::InvalidParameter("box must have at least one axis".into()));
        }
        for (axis, (&l, &h)) in lo.iter().zip(&hi).enumerate() {
            if !l.is_finite() || !h.is_finite() || l > h {
                return Err(Error::InvalidBox { axis, lo: l, hi: h });
            }
        }
        Ok(BoxSet { lo, hi })
    }

    /// Builds a box from interleaved bounds `lo1 hi1 lo2 hi2 ...`.
    pub fn from_pairs(bounds: &[f64]) -> Result<Self> {
        if bounds.len() % 2 != 0 || bounds.is_empty() {
            return Err(Error::InvalidParameter(format!(
                "box needs an even, nonzero number of bounds, got {}",
                bounds.len()
            )));
        }
        let lo = bounds.iter().step_by(2).copied().collect();
        let hi = bounds.iter().skip(1).step_by(2).copied().collect();
        BoxSet::new(lo, hi)
    }

    /// The single-point box `{p}`.
    pub fn point(p: &[f64]) -> Result<Self> {
        BoxSet::new(p.to_vec(), p.to_vec())
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn lo(&self) -> &[f64] {
        &self.lo
    }

    pub fn hi(&self) -> &[f64] {
        &self.hi
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x.iter().zip(self.lo.iter().zip(&self.hi)).all(|(&v, (&l, &h))| {
                v >= l - MEMBERSHIP_TOL && v <= h + MEMBERSHIP_TOL
            })
    }

    /// Exact containment `self ⊆ other`.
    pub fn is_subset_of(&self, other: &BoxSet) -> bool {
        self.dim() == other.dim()
            && (0..self.dim()).all(|i| self.lo[i] >= other.lo[i] && self.hi[i] <= other.hi[i])
    }

    pub fn is_singleton(&self) -> bool {
        self.lo == self.hi
    }

    pub fn project(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .map(|(&v, (&l, &h))| v.clamp(l, h))
            .collect()
    }

    pub fn dist(&self, x: &[f64]) -> f64 {
        let p = self.project(x);
        euclidean_norm(&sub(x, &p))
    }

    pub fn tangent_cone(&self, x: &[f64]) -> Result<OrthantCone> {
        self.check_member(x)?;
        let tags = (0..self.dim())
            .map(|i| {
                let at_lo = (x[i] - self.lo[i]).abs() <= MEMBERSHIP_TOL;
                let at_hi = (x[i] - self.hi[i]).abs() <= MEMBERSHIP_TOL;
                match (at_lo, at_hi) {
                    (true, true) => ConeTag::Zero,
                    (true, false) => ConeTag::NonNeg,
                    (false, true) => ConeTag::NonPos,
                    (false, false) => ConeTag::Free,
                }
            })
            .collect();
        Ok(OrthantCone { tags })
    }

    pub fn normal_cone(&self, x: &[f64]) -> Result<OrthantCone> {
        Ok(self.tangent_cone(x)?.polar())
    }

    /// Largest `t >= 0` with `x + t d` in the box; `+∞` if unbounded.
    pub fn max_step(&self, x: &[f64], d: &[f64]) -> f64 {
        let mut t = f64::INFINITY;
        for i in 0..self.dim() {
            if d[i] > 0.0 {
                t = t.min(((self.hi[i] - x[i]) / d[i]).max(0.0));
            } else if d[i] < 0.0 {
                t = t.min(((self.lo[i] - x[i]) / d[i]).max(0.0));
            }
        }
        t
    }

    /// Regular grid with `per_axis` points on every nondegenerate axis,
    /// endpoints included exactly; degenerate axes contribute one value.
    pub fn grid(&self, per_axis: usize) -> Vec<Vec<f64>> {
        let axes: Vec<Vec<f64>> = (0..self.dim())
            .map(|i| axis_points(self.lo[i], self.hi[i], per_axis))
            .collect();
        cartesian(&axes)
    }

    /// Uniform sample from the box.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        (0..self.dim())
            .map(|i| {
                if self.lo[i] == self.hi[i] {
                    self.lo[i]
                } else {
                    rng.gen_range(self.lo[i]..=self.hi[i])
                }
            })
            .collect()
    }

    fn check_member(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: x.len(),
            });
        }
        if !self.contains(x) {
            return Err(Error::NotInSet { point: x.to_vec() });
        }
        Ok(())
    }
}

fn axis_points(lo: f64, hi: f64, per_axis: usize) -> Vec<f64> {
    if lo == hi || per_axis < 2 {
        return vec![if lo == hi { lo } else { 0.5 * (lo + hi) }];
    }
    let steps = (per_axis - 1) as f64;
    (0..per_axis)
        .map(|k| {
            if k == per_axis - 1 {
                hi
            } else {
                lo + (hi - lo) * (k as f64) / steps
            }
        })
        .collect()
}

fn cartesian(axes: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut out = vec![Vec::with_capacity(axes.len())];
    for values in axes {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                values.iter().map(move |&v| {
                    let mut p = prefix.clone();
                    p.push(v);
                    p
                })
            })
            .collect();
    }
    out
}

pub(crate) fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// Per-axis factor of an [`OrthantCone`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConeTag {
    /// `R`
    Free,
    /// `[0, ∞)`
    NonNeg,
    /// `(-∞, 0]`
    NonPos,
    /// `{0}`
    Zero,
}

impl ConeTag {
    pub fn polar(self) -> ConeTag {
        match self {
            ConeTag::Free => ConeTag::Zero,
            ConeTag::Zero => ConeTag::Free,
            ConeTag::NonNeg => ConeTag::NonPos,
            ConeTag::NonPos => ConeTag::NonNeg,
        }
    }

    fn clamp(self, v: f64) -> f64 {
        match self {
            ConeTag::Free => v,
            ConeTag::NonNeg => v.max(0.0),
            ConeTag::NonPos => v.min(0.0),
            ConeTag::Zero => 0.0,
        }
    }

    fn admits(self, v: f64) -> bool {
        match self {
            ConeTag::Free => true,
            ConeTag::NonNeg => v >= 0.0,
            ConeTag::NonPos => v <= 0.0,
            ConeTag::Zero => v == 0.0,
        }
    }

    fn intersect(self, other: ConeTag) -> ConeTag {
        use ConeTag::*;
        match (self, other) {
            (Free, t) | (t, Free) => t,
            (Zero, _) | (_, Zero) => Zero,
            (NonNeg, NonNeg) => NonNeg,
            (NonPos, NonPos) => NonPos,
            _ => Zero,
        }
    }
}

/// Product cone, one [`ConeTag`] per axis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrthantCone {
    tags: Vec<ConeTag>,
}

impl OrthantCone {
    pub fn new(tags: Vec<ConeTag>) -> Self {
        OrthantCone { tags }
    }

    pub fn tags(&self) -> &[ConeTag] {
        &self.tags
    }

    pub fn dim(&self) -> usize {
        self.tags.len()
    }

    pub fn polar(&self) -> OrthantCone {
        OrthantCone {
            tags: self.tags.iter().map(|t| t.polar()).collect(),
        }
    }

    pub fn intersect(&self, other: &OrthantCone) -> OrthantCone {
        OrthantCone {
            tags: self.tags.iter().zip(&other.tags).map(|(a, b)| a.intersect(*b)).collect(),
        }
    }

    pub fn project(&self, d: &[f64]) -> Vec<f64> {
        self.tags.iter().zip(d).map(|(t, &v)| t.clamp(v)).collect()
    }

    pub fn contains(&self, d: &[f64]) -> bool {
        self.tags.iter().zip(d).all(|(t, &v)| t.admits(v))
    }

    /// True when the cone is `{0}`.
    pub fn is_trivial(&self) -> bool {
        self.tags.iter().all(|t| *t == ConeTag::Zero)
    }
}

/// `‖d − Π_K(d)‖₂`.
pub fn dist_to_cone(d: &[f64], k: &OrthantCone) -> f64 {
    euclidean_norm(&sub(d, &k.project(d)))
}

/// Support value of `αB ∩ N` at `d`, via `α · dist(d, N°)`.
pub fn cone_ball_support(k_normal: &OrthantCone, alpha: f64, d: &[f64]) -> Result<f64> {
    if !(alpha > 0.0) {
        return Err(Error::InvalidParameter(format!("alpha must be positive, got {alpha}")));
    }
    Ok(alpha * dist_to_cone(d, &k_normal.polar()))
}

/// Same quantity as [`cone_ball_support`], found by direct maximization of
/// `⟨z, d⟩` over sampled `z ∈ N` with `‖z‖ = α`, refined by a shrinking
/// random local search. Never touches the polar cone or any projection.
pub fn cone_ball_support_sampled<R: Rng + ?Sized>(
    k_normal: &OrthantCone,
    alpha: f64,
    d: &[f64],
    samples: usize,
    rng: &mut R,
) -> f64 {
    let n = k_normal.dim();
    let draw_axis = |tag: ConeTag, rng: &mut R| -> f64 {
        let g: f64 = rng.gen_range(-1.0..=1.0);
        match tag {
            ConeTag::Free => g,
            ConeTag::NonNeg => g.abs(),
            ConeTag::NonPos => -g.abs(),
            ConeTag::Zero => 0.0,
        }
    };
    let score = |z: &[f64]| -> f64 {
        let norm = euclidean_norm(z);
        if norm == 0.0 {
            0.0
        } else {
            alpha * dot(z, d) / norm
        }
    };
    // z = 0 is always feasible
    let mut best = vec![0.0; n];
    let mut best_score = 0.0;
    for _ in 0..samples {
        let z: Vec<f64> = k_normal.tags.iter().map(|&t| draw_axis(t, rng)).collect();
        let s = score(&z);
        if s > best_score {
            best_score = s;
            best = z;
        }
    }
    if best_score <= 0.0 {
        return best_score;
    }
    let mut radius = 0.5 * euclidean_norm(&best);
    for _ in 0..60 {
        let mut improved = false;
        for _ in 0..16 {
            let cand: Vec<f64> = best
                .iter()
                .map(|&v| v + radius * rng.gen_range(-1.0..=1.0))
                .collect();
            // keep only candidates that already lie in the cone
            let cand: Vec<f64> = cand
                .iter()
                .zip(&k_normal.tags)
                .map(|(&v, &t)| if t == ConeTag::Zero { 0.0 } else { v })
                .collect();
            if !k_normal.contains(&cand) {
                continue;
            }
            let s = score(&cand);
            if s > best_score {
                best_score = s;
                best = cand;
                improved = true;
            }
        }
        if !improved {
            radius *= 0.6;
        }
    }
    best_score
}
