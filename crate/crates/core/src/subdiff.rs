//! gH-subdifferentials of convex IVFs.
//!
//! `Ĝ ∈ ∂F(x̄)` iff `(x − x̄)ᵀ ⊙ Ĝ ⪯ F(x) ⊖_gH F(x̄)` for every `x`, or
//! equivalently (for convex `F`) iff `hᵀ ⊙ Ĝ ⪯ F_D(x̄)(h)` for every `h`.
//! The support function of `∂F(x̄)` is `F_D(x̄)`, which is the canonical
//! representation here; explicit boxes exist only in one dimension.

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::sub;
use crate::interval::{ExtInterval, Interval};
use crate::ivector::{special_product, IVector};
use crate::ivf::{EndpointKind, IntervalFunction, Ivf};
use crate::support::IVecSet;

/// Slack on the defining inequality.
pub const MEMBERSHIP_SLACK: f64 = 1e-9;
/// Slack on the directional criterion, which sees numeric derivatives.
pub const DIRECTIONAL_SLACK: f64 = 1e-7;
/// Endpoint bounds closer than this collapse to a singleton in [`subdiff_1d`].
pub const SINGLETON_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub enum Membership {
    Member,
    /// Probe point (or direction, for the directional criterion) with the
    /// most negative slack.
    Violated { at: Vec<f64>, margin: f64 },
}

impl Membership {
    pub fn is_member(&self) -> bool {
        matches!(self, Membership::Member)
    }
}

impl fmt::Display for Membership {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Membership::Member => f.write_str("member"),
            Membership::Violated { at, margin } => write!(f, "violated at {at:?} (margin {margin:e})"),
        }
    }
}

/// Slack of the defining inequality at one probe `x` with known values.
pub(crate) fn definition_margin(xbar: &[f64], fxbar: Interval, g: &IVector, x: &[f64], fx: ExtInterval) -> Result<f64> {
    let fx = match fx {
        ExtInterval::Finite(v) => v,
        ExtInterval::PlusInf => return Ok(f64::INFINITY),
        ExtInterval::MinusInf => return Err(Error::InfiniteValue),
    };
    let lhs = special_product(&sub(x, xbar), g)?;
    Ok(lhs.margin_to(&fx.gh_sub(fxbar)))
}

fn finite_at<F: IntervalFunction + ?Sized>(f: &F, x: &[f64]) -> Result<Interval> {
    f.value(x)?.finite().ok_or(Error::InfiniteValue)
}

fn check_dims(n: usize, g: &IVector) -> Result<()> {
    if g.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: g.len(),
        });
    }
    Ok(())
}

/// Worst slack of the defining inequality over `probes`, with the probe
/// attaining it. Ties keep the earliest probe.
pub fn subgradient_margin<F: IntervalFunction + ?Sized>(
    f: &F,
    xbar: &[f64],
    g: &IVector,
    probes: &[Vec<f64>],
) -> Result<(f64, Option<Vec<f64>>)> {
    check_dims(f.dimension(), g)?;
    let fxbar = finite_at(f, xbar)?;
    let margins = probes
        .par_iter()
        .map(|x| definition_margin(xbar, fxbar, g, x, f.value(x)?))
        .collect::<Result<Vec<f64>>>()?;
    Ok(worst(&margins, probes))
}

fn worst(margins: &[f64], at: &[Vec<f64>]) -> (f64, Option<Vec<f64>>) {
    let mut best = f64::INFINITY;
    let mut arg = None;
    for (m, x) in margins.iter().zip(at) {
        if *m < best {
            best = *m;
            arg = Some(x.clone());
        }
    }
    (best, arg)
}

/// Checks the defining inequality at every probe point; `+∞` values of
/// `F(x)` pass automatically.
pub fn is_subgradient<F: IntervalFunction + ?Sized>(
    f: &F,
    xbar: &[f64],
    g: &IVector,
    probes: &[Vec<f64>],
) -> Result<Membership> {
    let (m, at) = subgradient_margin(f, xbar, g, probes)?;
    Ok(match at {
        Some(at) if m < -MEMBERSHIP_SLACK => Membership::Violated { at, margin: m },
        _ => Membership::Member,
    })
}

/// Checks `hᵀ ⊙ Ĝ ⪯ F_D(x̄)(h)` for every direction.
pub fn is_subgradient_directional<F: IntervalFunction + ?Sized>(
    f: &F,
    xbar: &[f64],
    g: &IVector,
    directions: &[Vec<f64>],
) -> Result<Membership> {
    check_dims(f.dimension(), g)?;
    let margins = directions
        .par_iter()
        .map(|h| {
            let lhs = ExtInterval::Finite(special_product(h, g)?);
            Ok(lhs.margin_to(&f.directional(xbar, h)?))
        })
        .collect::<Result<Vec<f64>>>()?;
    let (m, at) = worst(&margins, directions);
    Ok(match at {
        Some(at) if m < -DIRECTIONAL_SLACK => Membership::Violated { at, margin: m },
        _ => Membership::Member,
    })
}

/// A representation of `∂F(x̄)`.
#[derive(Debug, Clone)]
pub enum SubdiffRep {
    /// `{ Ĝ : L ⪯ Ĝ ⪯ U }`.
    ExplicitBox { lower: IVector, upper: IVector },
    Singleton(IVector),
    /// `d ↦ F_D(x̄)(d)`.
    SupportOracle(IVecSet),
}

impl SubdiffRep {
    pub fn to_set(&self) -> IVecSet {
        match self {
            SubdiffRep::ExplicitBox { lower, upper } => IVecSet::IntervalBox {
                lower: lower.clone(),
                upper: upper.clone(),
            },
            SubdiffRep::Singleton(g) => IVecSet::Finite(vec![g.clone()]),
            SubdiffRep::SupportOracle(s) => s.clone(),
        }
    }

    pub fn support_value(&self, d: &[f64]) -> Result<ExtInterval> {
        self.to_set().support_value(d)
    }

    pub fn dim(&self) -> usize {
        self.to_set().dim()
    }
}

impl fmt::Display for SubdiffRep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SubdiffRep::ExplicitBox { lower, upper } => write!(f, "{{ G : {lower} ⪯ G ⪯ {upper} }}"),
            SubdiffRep::Singleton(g) => write!(f, "{{ {g} }}"),
            SubdiffRep::SupportOracle(s) => write!(f, "support oracle in dimension {}", s.dim()),
        }
    }
}

/// Left and right derivatives `(l, r)` of one endpoint at an interior point.
fn one_sided_pair(f: &Ivf, kind: EndpointKind, xbar: f64) -> Result<(f64, f64)> {
    let r = f.one_sided(kind, &[xbar], &[1.0])?;
    let l = -f.one_sided(kind, &[xbar], &[-1.0])?;
    Ok((l, r))
}

/// Explicit `∂F(x̄)` for `n = 1`.
///
/// With `(l̲, r̲)` and `(l̄, r̄)` the one-sided derivatives of the endpoints,
/// the directional criterion at `h = ±1` reads `L ⪯ Ĝ ⪯ U` with
/// `L = [min(l̲, l̄), max(l̲, l̄)]` and `U = [min(r̲, r̄), max(r̲, r̄)]`.
pub fn subdiff_1d(f: &Ivf, xbar: f64) -> Result<SubdiffRep> {
    if f.dimension() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            found: f.dimension(),
        });
    }
    let dom = f.domain();
    if !(xbar > dom.lo()[0] && xbar < dom.hi()[0]) {
        return Err(Error::BoundaryPoint);
    }
    let (ll, rl) = one_sided_pair(f, EndpointKind::Lower, xbar)?;
    let (lu, ru) = one_sided_pair(f, EndpointKind::Upper, xbar)?;
    let lower = Interval::hull(ll, lu);
    let upper = Interval::hull(rl, ru);
    if (lower.lo() - upper.lo()).abs() <= SINGLETON_TOL && (lower.hi() - upper.hi()).abs() <= SINGLETON_TOL {
        let mid = Interval::hull(0.5 * (lower.lo() + upper.lo()), 0.5 * (lower.hi() + upper.hi()));
        return Ok(SubdiffRep::Singleton(IVector::new(vec![mid])?));
    }
    Ok(SubdiffRep::ExplicitBox {
        lower: IVector::new(vec![lower])?,
        upper: IVector::new(vec![upper])?,
    })
}

/// `{∇F(x̄)}` at a gH-differentiable point.
///
/// Both endpoint gradients must exist and be order-compatible
/// (`∇F̲ ≤ ∇F̄` or `∇F̲ ≥ ∇F̄` in every component). Otherwise
/// `hᵀ ⊙ ∇F(x̄)` differs from `F_D(x̄)(h)` for some `h`, and in fact no
/// interval vector satisfies the subgradient inequality there.
pub fn subdiff_singleton(f: &Ivf, xbar: &[f64]) -> Result<SubdiffRep> {
    let (lo, hi) = f.endpoint_gradients(xbar).map_err(|e| match e {
        Error::NotDifferentiable { component } => Error::NoSingleton { component },
        other => other,
    })?;
    if let Some(component) = mixed_component(&lo, &hi, SINGLETON_TOL) {
        return Err(Error::NoSingleton { component });
    }
    Ok(SubdiffRep::Singleton(pairing(&lo, &hi)?))
}

/// First component whose endpoint order contradicts an earlier one;
/// differences within `tol` (relative to magnitude) count as ties.
fn mixed_component(lo: &[f64], hi: &[f64], tol: f64) -> Option<usize> {
    let mut sign = 0.0;
    for (i, (a, b)) in lo.iter().zip(hi).enumerate() {
        let d = a - b;
        if d.abs() <= tol * a.abs().max(b.abs()).max(1.0) {
            continue;
        }
        if sign == 0.0 {
            sign = d.signum();
        } else if d.signum() != sign {
            return Some(i);
        }
    }
    None
}

/// Support-oracle representation `d ↦ F_D(x̄)(d)`, valid for `F` or `F_o`.
pub fn subdiff_support(f: Arc<dyn IntervalFunction>, xbar: &[f64]) -> Result<SubdiffRep> {
    finite_at(f.as_ref(), xbar)?;
    let n = f.dimension();
    let at = xbar.to_vec();
    Ok(SubdiffRep::SupportOracle(IVecSet::oracle(n, move |d| f.directional(&at, d))))
}

/// Componentwise pairing of an endpoint subgradient pair,
/// `Gᵢ = [min(g̲ᵢ, ḡᵢ), max(g̲ᵢ, ḡᵢ)]`.
pub fn pairing(g_lower: &[f64], g_upper: &[f64]) -> Result<IVector> {
    if g_lower.len() != g_upper.len() {
        return Err(Error::DimensionMismatch {
            expected: g_lower.len(),
            found: g_upper.len(),
        });
    }
    IVector::new(g_lower.iter().zip(g_upper).map(|(&a, &b)| Interval::hull(a, b)).collect())
}

/// Whether `g̲ ≤ ḡ` or `g̲ ≥ ḡ` holds in every component.
pub fn is_order_compatible(g_lower: &[f64], g_upper: &[f64]) -> bool {
    let le = g_lower.iter().zip(g_upper).all(|(a, b)| a <= b);
    let ge = g_lower.iter().zip(g_upper).all(|(a, b)| a >= b);
    le || ge
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairingCheck {
    pub g_lower: Vec<f64>,
    pub g_upper: Vec<f64>,
    pub paired: IVector,
    pub verdict: Membership,
}

/// Pairs every endpoint subgradient `g̲ ∈ lower_subgrads` with every
/// `ḡ ∈ upper_subgrads` and tests each pairing against the definition.
pub fn check_pairings<F: IntervalFunction + ?Sized>(
    f: &F,
    xbar: &[f64],
    lower_subgrads: &[Vec<f64>],
    upper_subgrads: &[Vec<f64>],
    probes: &[Vec<f64>],
) -> Result<Vec<PairingCheck>> {
    let mut out = Vec::with_capacity(lower_subgrads.len() * upper_subgrads.len());
    for gl in lower_subgrads {
        for gu in upper_subgrads {
            let paired = pairing(gl, gu)?;
            let verdict = is_subgradient(f, xbar, &paired, probes)?;
            out.push(PairingCheck {
                g_lower: gl.clone(),
                g_upper: gu.clone(),
                paired,
                verdict,
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::BoxSet;
    use crate::support::{boundedness_check, default_directions, Boundedness};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    fn iv(lo: f64, hi: f64) -> Interval {
        Interval::new(lo, hi).unwrap()
    }

    fn g1(lo: f64, hi: f64) -> IVector {
        IVector::new(vec![iv(lo, hi)]).unwrap()
    }

    fn line(lo: f64, hi: f64) -> BoxSet {
        BoxSet::new(vec![lo], vec![hi]).unwrap()
    }

    fn square() -> BoxSet {
        BoxSet::new(vec![-1.0, -1.0], vec![1.0, 1.0]).unwrap()
    }

    fn scaled_abs() -> Ivf {
        Ivf::from_exprs("abs(x1)/4", "abs(x1)", line(-1.0, 1.0)).unwrap()
    }

    fn probes_1d() -> Vec<Vec<f64>> {
        line(-1.0, 1.0).grid(41)
    }

    #[test]
    fn is_subgradient_examples() {
        let f = scaled_abs();
        let p = probes_1d();
        assert!(is_subgradient(&f, &[0.0], &g1(0.0, 0.0), &p).unwrap().is_member());
        assert!(is_subgradient(&f, &[0.0], &g1(0.2, 0.2), &p).unwrap().is_member());
        match is_subgradient(&f, &[0.0], &g1(0.5, 0.5), &p).unwrap() {
            Membership::Violated { at, margin } => {
                assert_eq!(at, vec![1.0]);
                assert!((margin + 0.25).abs() < 1e-12);
            }
            Membership::Member => panic!("[0.5,0.5] accepted"),
        }
    }

    #[test]
    fn directional_examples() {
        let f = scaled_abs();
        let dirs = vec![vec![1.0], vec![-1.0], vec![0.5]];
        assert!(is_subgradient_directional(&f, &[0.0], &g1(0.2, 0.2), &dirs).unwrap().is_member());
        match is_subgradient_directional(&f, &[0.0], &g1(0.5, 0.5), &dirs).unwrap() {
            Membership::Violated { at, .. } => assert_eq!(at, vec![1.0]),
            Membership::Member => panic!("[0.5,0.5] accepted"),
        }
        let smooth = Ivf::from_exprs("x1^2 + x2", "x1^2 + 2*x2 + 3", square()).unwrap();
        let x = [0.3, -0.4];
        let grad = smooth.gh_gradient(&x).unwrap();
        let dirs = default_directions(2, 32, 4);
        assert!(is_subgradient_directional(&smooth, &x, &grad, &dirs).unwrap().is_member());
    }

    #[test]
    fn subdiff_1d_examples() {
        match subdiff_1d(&scaled_abs(), 0.0).unwrap() {
            SubdiffRep::ExplicitBox { lower, upper } => {
                assert!((lower[0].lo() + 1.0).abs() < 1e-9 && (lower[0].hi() + 0.25).abs() < 1e-9);
                assert!((upper[0].lo() - 0.25).abs() < 1e-9 && (upper[0].hi() - 1.0).abs() < 1e-9);
            }
            other => panic!("expected a box, got {other}"),
        }
        let smooth = Ivf::from_exprs("x1^2", "x1^2 + 1", line(-2.0, 2.0)).unwrap();
        match subdiff_1d(&smooth, 1.0).unwrap() {
            SubdiffRep::Singleton(g) => assert!((g[0].lo() - 2.0).abs() < 1e-8 && (g[0].hi() - 2.0).abs() < 1e-8),
            other => panic!("expected a singleton, got {other}"),
        }
        let constant = Ivf::from_exprs("1", "2", line(-2.0, 2.0)).unwrap();
        match subdiff_1d(&constant, 0.5).unwrap() {
            SubdiffRep::Singleton(g) => assert_eq!(g, IVector::zeros(1)),
            other => panic!("expected a singleton, got {other}"),
        }
        assert_eq!(subdiff_1d(&scaled_abs(), 1.0).err(), Some(Error::BoundaryPoint));
    }

    #[test]
    fn subdiff_singleton_examples() {
        let f = Ivf::from_exprs("x1 + x2", "2*x1 + 3*x2", square()).unwrap();
        match subdiff_singleton(&f, &[0.2, 0.1]).unwrap() {
            SubdiffRep::Singleton(g) => {
                assert!((g[0].lo() - 1.0).abs() < 1e-8 && (g[0].hi() - 2.0).abs() < 1e-8);
                assert!((g[1].lo() - 1.0).abs() < 1e-8 && (g[1].hi() - 3.0).abs() < 1e-8);
            }
            other => panic!("expected a singleton, got {other}"),
        }
        assert_eq!(subdiff_singleton(&scaled_abs(), &[0.0]).err(), Some(Error::NoSingleton { component: 0 }));
        let c = Ivf::from_exprs("0", "1", square()).unwrap();
        match subdiff_singleton(&c, &[0.0, 0.0]).unwrap() {
            SubdiffRep::Singleton(g) => assert_eq!(g, IVector::zeros(2)),
            other => panic!("expected a singleton, got {other}"),
        }
    }

    #[test]
    fn subdiff_support_examples() {
        let rep = subdiff_support(Arc::new(scaled_abs()), &[0.0]).unwrap();
        let v = rep.support_value(&[1.0]).unwrap().finite().unwrap();
        assert!((v.lo() - 0.25).abs() < 1e-9 && (v.hi() - 1.0).abs() < 1e-9);
        let boxed = subdiff_1d(&scaled_abs(), 0.0).unwrap();
        for d in [1.0, -1.0, 0.3, -2.5] {
            let a = rep.support_value(&[d]).unwrap().finite().unwrap();
            let b = boxed.support_value(&[d]).unwrap().finite().unwrap();
            assert!((a.lo() - b.lo()).abs() < 1e-9 && (a.hi() - b.hi()).abs() < 1e-9);
        }
        let smooth = Ivf::from_exprs("x1^2", "x1^2 + 1", line(-2.0, 2.0)).unwrap();
        let s = subdiff_support(Arc::new(smooth), &[1.0]).unwrap();
        let v = s.support_value(&[1.0]).unwrap().finite().unwrap();
        assert!((v.lo() - 2.0).abs() < 1e-8 && v.width() < 1e-8);
        let fo = scaled_abs().restricted(&line(-1.0, 0.0)).unwrap();
        let s = subdiff_support(Arc::new(fo), &[0.0]).unwrap();
        assert_eq!(s.support_value(&[1.0]).unwrap(), ExtInterval::PlusInf);
        assert!(s.support_value(&[-1.0]).unwrap().is_finite());
    }

    #[test]
    fn normalized_pairings_are_members_in_one_dimension() {
        // endpoint subgradients of |x|/4 and |x| at 0
        let lows: Vec<Vec<f64>> = [-0.25, 0.0, 0.1, 0.25].iter().map(|&v| vec![v]).collect();
        let ups: Vec<Vec<f64>> = [-1.0, -0.3, 0.0, 0.6, 1.0].iter().map(|&v| vec![v]).collect();
        let checks = check_pairings(&scaled_abs(), &[0.0], &lows, &ups, &probes_1d()).unwrap();
        assert_eq!(checks.len(), 20);
        assert!(checks.iter().all(|c| c.verdict.is_member()));
        // the membership box is larger than the pairing set: [-1, 1] pairs
        // no endpoint subgradient of |x|/4 yet satisfies the definition
        assert!(is_subgradient(&scaled_abs(), &[0.0], &g1(-1.0, 1.0), &probes_1d()).unwrap().is_member());
    }

    #[test]
    fn mixed_order_pairing_can_fail_in_two_dimensions() {
        let f = Ivf::from_exprs("x1", "x2 + 10", square()).unwrap();
        let probes = square().grid(5);
        let checks = check_pairings(&f, &[0.0, 0.0], &[vec![1.0, 0.0]], &[vec![0.0, 1.0]], &probes).unwrap();
        assert!(!is_order_compatible(&[1.0, 0.0], &[0.0, 1.0]));
        match &checks[0].verdict {
            Membership::Violated { at, .. } => {
                let lhs = special_product(at, &checks[0].paired).unwrap();
                let rhs = f.eval(at).unwrap().gh_sub(f.eval(&[0.0, 0.0]).unwrap());
                assert!(!lhs.leq(&rhs));
            }
            Membership::Member => panic!("mixed pairing accepted"),
        }
        assert_eq!(checks[0].paired, IVector::new(vec![iv(0.0, 1.0), iv(0.0, 1.0)]).unwrap());
        let y = [1.0, -1.0];
        let lhs = special_product(&y, &checks[0].paired).unwrap();
        assert!(!lhs.leq(&f.eval(&y).unwrap().gh_sub(f.eval(&[0.0, 0.0]).unwrap())));
    }

    #[test]
    fn order_compatible_pairings_are_members() {
        let f = Ivf::from_exprs("abs(x1) + abs(x2)", "2*abs(x1) + 2*abs(x2) + 1", square()).unwrap();
        let probes = square().grid(21);
        let lows = vec![vec![-1.0, 0.5], vec![0.3, -0.2], vec![1.0, 1.0]];
        let ups = vec![vec![-2.0, 2.0], vec![1.5, 0.0], vec![2.0, 2.0], vec![0.0, -1.0]];
        for c in check_pairings(&f, &[0.0, 0.0], &lows, &ups, &probes).unwrap() {
            if is_order_compatible(&c.g_lower, &c.g_upper) {
                assert!(c.verdict.is_member(), "{:?} / {:?}", c.g_lower, c.g_upper);
            }
        }
    }

    /// Convex test battery with an interior point each.
    fn battery() -> Vec<(Ivf, Vec<f64>)> {
        vec![
            (scaled_abs(), vec![0.0]),
            (Ivf::from_exprs("x1^2", "x1^2 + abs(x1)", line(-2.0, 2.0)).unwrap(), vec![0.0]),
            (Ivf::from_exprs("max(x1, 0)", "2*max(x1, 0) + 1", line(-1.0, 1.0)).unwrap(), vec![0.0]),
            (Ivf::from_exprs("abs(x1) + abs(x2)", "2*abs(x1) + 2*abs(x2)", square()).unwrap(), vec![0.0, 0.0]),
            (Ivf::from_exprs("x1^2 + x2^2", "x1^2 + x2^2 + abs(x1)", square()).unwrap(), vec![0.0, 0.5]),
            (Ivf::from_exprs("max(abs(x1), abs(x2))", "2*max(abs(x1), abs(x2)) + 1", square()).unwrap(), vec![0.0, 0.0]),
        ]
    }

    /// Probe points along every direction at several radii, plus the grid.
    fn probes_for(f: &Ivf, x: &[f64], dirs: &[Vec<f64>]) -> Vec<Vec<f64>> {
        let mut out = f.domain().grid(21);
        for d in dirs {
            let t_max = f.domain().max_step(x, d).min(1.0);
            for s in [1e-3, 0.1, 0.5, 1.0] {
                out.push(x.iter().zip(d).map(|(a, b)| a + s * t_max * b).collect());
            }
        }
        out
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn criteria_agree(case in 0usize..6, raw in prop::collection::vec((-2.5f64..2.5, -2.5f64..2.5), 2)) {
            let (f, x) = &battery()[case];
            let n = x.len();
            let g = IVector::new(raw[..n].iter().map(|&(a, b)| Interval::hull(a, b)).collect()).unwrap();
            let dirs = default_directions(n, 64, 7);
            let probes = probes_for(f, x, &dirs);
            let by_def = subgradient_margin(f, x, &g, &probes).unwrap().0;
            let by_dir = is_subgradient_directional(f, x, &g, &dirs).unwrap();
            // compare only away from the membership boundary
            if by_def.abs() > 1e-3 {
                prop_assert_eq!(by_def >= 0.0, by_dir.is_member(), "g = {}", g);
            }
        }

        #[test]
        fn members_form_a_convex_set(
            a in (-1.0f64..-0.25, 0.25f64..1.0),
            b in (-1.0f64..-0.25, 0.25f64..1.0),
            lambda in 0.0f64..=1.0,
        ) {
            let (f, p) = (scaled_abs(), probes_1d());
            // [lo, hi] with lo ∈ [-1, 1/4] ∩ ... built from the explicit box
            let ga = g1(a.0.clamp(-0.25, 0.25), a.1.max(a.0.clamp(-0.25, 0.25)));
            let gb = g1(b.0.clamp(-0.25, 0.25), b.1.max(b.0.clamp(-0.25, 0.25)));
            prop_assert!(is_subgradient(&f, &[0.0], &ga, &p).unwrap().is_member());
            prop_assert!(is_subgradient(&f, &[0.0], &gb, &p).unwrap().is_member());
            let mix = IVector::new(vec![ga[0].scale(lambda).add(gb[0].scale(1.0 - lambda))]).unwrap();
            prop_assert!(is_subgradient(&f, &[0.0], &mix, &p).unwrap().is_member());
        }

        #[test]
        fn theorem_support_identity_for_boxes(
            case in 0usize..3,
            d in -3.0f64..3.0,
        ) {
            let (f, x) = &battery()[case];
            let rep = subdiff_1d(f, x[0]).unwrap();
            let a = rep.support_value(&[d]).unwrap().finite().unwrap();
            let b = f.dir_derivative(x, &[d]).unwrap();
            prop_assert!((a.lo() - b.lo()).abs() <= 1e-5 && (a.hi() - b.hi()).abs() <= 1e-5);
        }
    }

    #[test]
    fn membership_boundary_is_closed() {
        let (f, p) = (scaled_abs(), probes_1d());
        let inside = g1(0.0, 0.5);
        let outside = g1(0.6, 0.9);
        let at = |t: f64| {
            g1(
                inside[0].lo() + t * (outside[0].lo() - inside[0].lo()),
                inside[0].hi() + t * (outside[0].hi() - inside[0].hi()),
            )
        };
        let (mut lo, mut hi) = (0.0, 1.0);
        while hi - lo > 1e-12 {
            let mid = 0.5 * (lo + hi);
            if is_subgradient(&f, &[0.0], &at(mid), &p).unwrap().is_member() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        // members approach the limit from inside; the limit itself is a member
        let limit = at(0.5 * (lo + hi));
        assert!(subgradient_margin(&f, &[0.0], &limit, &p).unwrap().0 >= -1e-7);
        assert!((limit[0].lo() - 0.25).abs() < 1e-6);
    }

    #[test]
    fn support_oracle_is_bounded_at_interior_points() {
        for (f, x) in battery() {
            let rep = subdiff_support(Arc::new(f), &x).unwrap();
            let dirs = default_directions(x.len(), 32, 2);
            assert!(matches!(boundedness_check(&rep.to_set(), &dirs).unwrap(), Boundedness::Bounded { .. }));
        }
    }

    /// IVFs whose endpoint subgradients can always be paired in a
    /// consistent order, so the subdifferential is nonempty everywhere.
    fn order_compatible_battery() -> Vec<Ivf> {
        let pos = BoxSet::new(vec![0.1, 0.1], vec![1.0, 1.0]).unwrap();
        vec![
            scaled_abs(),
            Ivf::from_exprs("x1^2", "x1^2 + abs(x1)", line(-2.0, 2.0)).unwrap(),
            Ivf::from_exprs("max(x1, 0)", "2*max(x1, 0) + 1", line(-1.0, 1.0)).unwrap(),
            Ivf::from_exprs("x1 + x2", "2*x1 + 3*x2", square()).unwrap(),
            Ivf::from_exprs("x1^2 + x2^2", "x1^2 + x2^2 + 1", square()).unwrap(),
            Ivf::from_exprs("max(x1, x2)", "max(x1, x2) + 2", square()).unwrap(),
            Ivf::from_exprs("x1^2 + x2^2", "2*x1^2 + 2*x2^2", pos).unwrap(),
        ]
    }

    #[test]
    fn a_member_exists_at_interior_grid_points() {
        for f in order_compatible_battery() {
            let n = f.dimension();
            let probes = f.domain().grid(11);
            let dirs = default_directions(n, 32, 5);
            for x in probes.iter().filter(|x| (0..n).all(|i| x[i] > f.domain().lo()[i] && x[i] < f.domain().hi()[i])) {
                // midpoints of the endpoint one-sided partials, paired
                let mid = |kind| -> Vec<f64> {
                    (0..n)
                        .map(|i| {
                            let mut e = vec![0.0; n];
                            e[i] = 1.0;
                            let r = f.one_sided(kind, x, &e).unwrap();
                            e[i] = -1.0;
                            let l = -f.one_sided(kind, x, &e).unwrap();
                            0.5 * (l + r)
                        })
                        .collect()
                };
                let g = pairing(&mid(EndpointKind::Lower), &mid(EndpointKind::Upper)).unwrap();
                assert!(
                    is_subgradient_directional(&f, x, &g, &dirs).unwrap().is_member(),
                    "no member found at {x:?} for {f:?}"
                );
            }
        }
    }

    #[test]
    fn mixed_order_gradients_leave_the_subdifferential_empty() {
        // ∇F̲ = (-1, 1) and ∇F̄ = (-2, 2) at x̄; a member (u, v) would need
        // max(⟨u,h⟩, ⟨v,h⟩) = max(⟨a,h⟩, ⟨b,h⟩) for all h, forcing
        // {u, v} = {a, b}, and neither order gives u ≤ v.
        let f = Ivf::from_exprs("abs(x1) + abs(x2)", "2*abs(x1) + 2*abs(x2)", square()).unwrap();
        let x = [-0.8, 0.2];
        assert_eq!(subdiff_singleton(&f, &x).err(), Some(Error::NoSingleton { component: 1 }));
        let dirs = default_directions(2, 128, 11);
        let gradient = f.gh_gradient(&x).unwrap();
        assert!(!is_subgradient_directional(&f, &x, &gradient, &dirs).unwrap().is_member());
        let mut rng = rand::rngs::StdRng::seed_from_u64(17);
        for _ in 0..2000 {
            let comps = (0..2)
                .map(|_| Interval::hull(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)))
                .collect();
            let g = IVector::new(comps).unwrap();
            assert!(!is_subgradient_directional(&f, &x, &g, &dirs).unwrap().is_member(), "{g}");
        }
    }
}
