//! Interval-valued functions given by a lower and an upper endpoint.
//!
//! For a convex IVF `F = [F̲, F̄]` the gH-directional derivative is the hull
//! of the endpoint one-sided directional derivatives, so everything here
//! reduces to scalar one-sided limits of the two endpoints.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::expr::{self, Expression};
use crate::geometry::BoxSet;
use crate::interval::{ExtInterval, Interval};
use crate::ivector::{euclidean_norm, IVector};

/// Step sizes for one-sided difference quotients, largest first.
pub const DIFF_STEPS: [f64; 3] = [1e-3, 1e-4, 1e-5];
/// Relative agreement required between successive extrapolated estimates.
pub const DIFF_AGREEMENT: f64 = 1e-4;
/// Relative agreement between forward and backward partials for a gH-gradient.
pub const GRADIENT_AGREEMENT: f64 = 1e-5;
/// Slack in the sampled Jensen inequality.
pub const CONVEXITY_SLACK: f64 = 1e-9;

/// Tolerance on `lower(x) <= upper(x)` before reporting a model error.
const ORDER_TOL: f64 = 1e-12;

pub type ScalarFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
pub type AnalyticDirDeriv = Arc<dyn Fn(&[f64], &[f64]) -> Interval + Send + Sync>;

/// One endpoint function of an IVF.
#[derive(Clone)]
pub enum Endpoint {
    Expr(Expression),
    Native(ScalarFn),
}

impl Endpoint {
    pub fn native(f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        Endpoint::Native(Arc::new(f))
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        match self {
            Endpoint::Expr(e) => e.eval(x),
            Endpoint::Native(f) => Ok(f(x)),
        }
    }
}

impl fmt::Debug for Endpoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Endpoint::Expr(e) => write!(f, "Expr({e})"),
            Endpoint::Native(_) => f.write_str("Native(..)"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EndpointKind {
    Lower,
    Upper,
}

impl fmt::Display for EndpointKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EndpointKind::Lower => "lower",
            EndpointKind::Upper => "upper",
        })
    }
}

/// Common surface of [`Ivf`] and [`RestrictedIvf`].
pub trait IntervalFunction: Send + Sync {
    fn dimension(&self) -> usize;
    fn value(&self, x: &[f64]) -> Result<ExtInterval>;
    fn directional(&self, x: &[f64], d: &[f64]) -> Result<ExtInterval>;
}

#[derive(Clone)]
pub struct Ivf {
    lower: Endpoint,
    upper: Endpoint,
    domain: BoxSet,
    analytic: Option<AnalyticDirDeriv>,
}

impl fmt::Debug for Ivf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Ivf")
            .field("lower", &self.lower)
            .field("upper", &self.upper)
            .field("domain", &self.domain)
            .field("analytic", &self.analytic.is_some())
            .finish()
    }
}

impl Ivf {
    pub fn new(lower: Endpoint, upper: Endpoint, domain: BoxSet) -> Result<Self> {
        for e in [&lower, &upper] {
            if let Endpoint::Expr(ex) = e {
                if ex.dimension() != domain.dim() {
                    return Err(Error::DimensionMismatch {
                        expected: domain.dim(),
                        found: ex.dimension(),
                    });
                }
            }
        }
        Ok(Ivf {
            lower,
            upper,
            domain,
            analytic: None,
        })
    }

    /// Parses both endpoints at the domain's dimension.
    pub fn from_exprs(lower: &str, upper: &str, domain: BoxSet) -> Result<Self> {
        let n = domain.dim();
        Ivf::new(
            Endpoint::Expr(expr::parse(lower, n)?),
            Endpoint::Expr(expr::parse(upper, n)?),
            domain,
        )
    }

    pub fn with_analytic_dir_deriv(
        mut self,
        f: impl Fn(&[f64], &[f64]) -> Interval + Send + Sync + 'static,
    ) -> Self {
        self.analytic = Some(Arc::new(f));
        self
    }

    pub fn dimension(&self) -> usize {
        self.domain.dim()
    }

    pub fn domain(&self) -> &BoxSet {
        &self.domain
    }

    pub fn endpoint(&self, kind: EndpointKind) -> &Endpoint {
        match kind {
            EndpointKind::Lower => &self.lower,
            EndpointKind::Upper => &self.upper,
        }
    }

    pub fn has_analytic_dir_deriv(&self) -> bool {
        self.analytic.is_some()
    }

    fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dimension() {
            return Err(Error::DimensionMismatch {
                expected: self.dimension(),
                found: x.len(),
            });
        }
        if !self.domain.contains(x) {
            return Err(Error::OutsideDomain { point: x.to_vec() });
        }
        Ok(())
    }

    /// `F(x) = [F̲(x), F̄(x)]`.
    pub fn eval(&self, x: &[f64]) -> Result<Interval> {
        self.check_point(x)?;
        let lo = self.lower.eval(x)?;
        let hi = self.upper.eval(x)?;
        if !lo.is_finite() || !hi.is_finite() || lo > hi + ORDER_TOL * lo.abs().max(1.0) {
            return Err(Error::EndpointOrder {
                lo,
                hi,
                point: x.to_vec(),
            });
        }
        Ok(Interval::ordered(lo, hi.max(lo)))
    }

    pub fn eval_endpoint(&self, kind: EndpointKind, x: &[f64]) -> Result<f64> {
        self.check_point(x)?;
        self.endpoint(kind).eval(x)
    }

    /// gH-directional derivative; analytic when supplied, numeric otherwise.
    pub fn dir_derivative(&self, x: &[f64], d: &[f64]) -> Result<Interval> {
        match &self.analytic {
            Some(f) => {
                self.check_point(x)?;
                check_len(self.dimension(), d.len())?;
                Ok(f(x, d))
            }
            None => self.dir_derivative_numeric(x, d),
        }
    }

    /// Hull of the numeric one-sided derivatives of both endpoints.
    pub fn dir_derivative_numeric(&self, x: &[f64], d: &[f64]) -> Result<Interval> {
        let lo = self.one_sided(EndpointKind::Lower, x, d)?;
        let hi = self.one_sided(EndpointKind::Upper, x, d)?;
        Ok(Interval::hull(lo, hi))
    }

    /// One-sided directional derivative `lim_{t↓0} (g(x + t d) − g(x)) / t`
    /// of a single endpoint, by Richardson extrapolation over
    /// [`DIFF_STEPS`]. Steps shrink proportionally when the domain boundary
    /// is closer than the largest step.
    pub fn one_sided(&self, kind: EndpointKind, x: &[f64], d: &[f64]) -> Result<f64> {
        self.check_point(x)?;
        check_len(self.dimension(), d.len())?;
        if d.iter().all(|&v| v == 0.0) {
            return Ok(0.0);
        }
        let t_max = self.domain.max_step(x, d);
        if !(t_max > 1e-12) {
            return Err(Error::NoFeasibleStep {
                point: x.to_vec(),
                direction: d.to_vec(),
            });
        }
        let scale = (t_max / DIFF_STEPS[0]).min(1.0);
        let g = self.endpoint(kind);
        let g0 = g.eval(x)?;
        let mut q = [0.0; 3];
        for (k, &t) in DIFF_STEPS.iter().enumerate() {
            let t = t * scale;
            let xt: Vec<f64> = x.iter().zip(d).map(|(a, b)| a + t * b).collect();
            let xt = self.domain.project(&xt);
            q[k] = (g.eval(&xt)? - g0) / t;
        }
        let r1 = (10.0 * q[1] - q[0]) / 9.0;
        let r2 = (10.0 * q[2] - q[1]) / 9.0;
        if (r1 - r2).abs() > DIFF_AGREEMENT * r2.abs().max(1.0) {
            return Err(Error::NonsmoothUncertain {
                first: r1,
                second: r2,
            });
        }
        Ok(r2)
    }

    /// Per-endpoint one-sided derivatives `(F̲'(x; d), F̄'(x; d))`.
    pub fn endpoint_dir_derivatives(&self, x: &[f64], d: &[f64]) -> Result<(f64, f64)> {
        Ok((
            self.one_sided(EndpointKind::Lower, x, d)?,
            self.one_sided(EndpointKind::Upper, x, d)?,
        ))
    }

    /// Partial derivatives `(∂F̲, ∂F̄)` along axis `i`, requiring forward and
    /// backward quotients to agree where both sides are feasible.
    fn endpoint_partials(&self, x: &[f64], i: usize) -> Result<(f64, f64)> {
        let n = self.dimension();
        let mut e = vec![0.0; n];
        e[i] = 1.0;
        let fwd_ok = self.domain.max_step(x, &e) > 1e-12;
        let fwd = if fwd_ok { Some(self.endpoint_dir_derivatives(x, &e)?) } else { None };
        e[i] = -1.0;
        let bwd_ok = self.domain.max_step(x, &e) > 1e-12;
        let bwd = if bwd_ok {
            let (l, u) = self.endpoint_dir_derivatives(x, &e)?;
            Some((-l, -u))
        } else {
            None
        };
        let agree = |a: f64, b: f64| (a - b).abs() <= GRADIENT_AGREEMENT * a.abs().max(b.abs()).max(1.0);
        match (fwd, bwd) {
            (Some(f), Some(b)) => {
                if agree(f.0, b.0) && agree(f.1, b.1) {
                    Ok((0.5 * (f.0 + b.0), 0.5 * (f.1 + b.1)))
                } else {
                    Err(Error::NotDifferentiable { component: i })
                }
            }
            (Some(f), None) => Ok(f),
            (None, Some(b)) => Ok(b),
            (None, None) => Ok((0.0, 0.0)),
        }
    }

    /// Gradients `(∇F̲(x), ∇F̄(x))` of the two endpoints.
    pub fn endpoint_gradients(&self, x: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        self.check_point(x)?;
        let pairs = (0..self.dimension())
            .map(|i| {
                self.endpoint_partials(x, i).map_err(|e| match e {
                    Error::NonsmoothUncertain { .. } => Error::NotDifferentiable { component: i },
                    other => other,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(pairs.into_iter().unzip())
    }

    /// gH-gradient: component `i` is the hull of the endpoint partials.
    pub fn gh_gradient(&self, x: &[f64]) -> Result<IVector> {
        let (lo, hi) = self.endpoint_gradients(x)?;
        IVector::new(lo.iter().zip(&hi).map(|(&l, &u)| Interval::hull(l, u)).collect())
    }

    /// Samples `(x₁, x₂, λ)` and tests the Jensen inequality on both
    /// endpoints, which is equivalent to convexity of the IVF.
    pub fn convexity_check(&self, samples: usize, seed: u64) -> Result<ConvexityOutcome> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..samples {
            let x1 = self.domain.sample(&mut rng);
            let x2 = self.domain.sample(&mut rng);
            let lambda: f64 = rng.gen_range(0.0..=1.0);
            let xm: Vec<f64> = x1.iter().zip(&x2).map(|(a, b)| lambda * a + (1.0 - lambda) * b).collect();
            let xm = self.domain.project(&xm);
            for kind in [EndpointKind::Lower, EndpointKind::Upper] {
                let g = self.endpoint(kind);
                let lhs = g.eval(&xm)?;
                let rhs = lambda * g.eval(&x1)? + (1.0 - lambda) * g.eval(&x2)?;
                if lhs > rhs + CONVEXITY_SLACK {
                    return Ok(ConvexityOutcome::Counterexample(ConvexityCounterexample {
                        x1,
                        x2,
                        lambda,
                        endpoint: kind,
                        gap: lhs - rhs,
                    }));
                }
            }
        }
        Ok(ConvexityOutcome::Pass)
    }

    /// Largest sampled ratio `‖F(x) ⊖_gH F(y)‖ / ‖x − y‖₂`; a lower bound on
    /// any Lipschitz constant of `F` on its domain.
    pub fn lipschitz_estimate(&self, samples: usize, seed: u64) -> Result<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut best: f64 = 0.0;
        for _ in 0..samples {
            let x = self.domain.sample(&mut rng);
            let y = self.domain.sample(&mut rng);
            let dxy: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a - b).collect();
            let dist = euclidean_norm(&dxy);
            if dist < 1e-12 {
                continue;
            }
            let diff = self.eval(&x)?.gh_sub(self.eval(&y)?);
            best = best.max(diff.norm() / dist);
        }
        Ok(best)
    }

    /// Upper bound on a Lipschitz constant over the domain from one-sided
    /// partials on a grid: `max Σᵢ max_{s=±1} |g'(x; s·eᵢ)|` over grid points
    /// and both endpoints. For convex endpoints the inward partials at the
    /// faces dominate every interior partial along that axis.
    pub fn subgradient_norm_bound(&self, per_axis: usize) -> Result<f64> {
        let n = self.dimension();
        let mut best: f64 = 0.0;
        for x in self.domain.grid(per_axis) {
            for kind in [EndpointKind::Lower, EndpointKind::Upper] {
                let mut total = 0.0;
                for i in 0..n {
                    let mut axis: f64 = 0.0;
                    for s in [1.0, -1.0] {
                        let mut d = vec![0.0; n];
                        d[i] = s;
                        if self.domain.max_step(&x, &d) <= 1e-12 {
                            continue;
                        }
                        axis = axis.max(self.partial_robust(kind, &x, &d)?.abs());
                    }
                    total += axis;
                }
                best = best.max(total);
            }
        }
        Ok(best)
    }

    /// [`Ivf::one_sided`] retried on shorter steps via positive homogeneity.
    fn partial_robust(&self, kind: EndpointKind, x: &[f64], d: &[f64]) -> Result<f64> {
        let mut last = None;
        for s in [1.0, 1e-2, 1e-4] {
            let ds: Vec<f64> = d.iter().map(|v| v * s).collect();
            match self.one_sided(kind, x, &ds) {
                Ok(v) => return Ok(v / s),
                Err(e @ Error::NonsmoothUncertain { .. }) => last = Some(e),
                Err(e) => return Err(e),
            }
        }
        Err(last.expect("at least one attempt"))
    }

    /// `F_o`: `F` on `s`, `+∞` elsewhere.
    pub fn restricted(&self, s: &BoxSet) -> Result<RestrictedIvf> {
        if !s.is_subset_of(&self.domain) {
            return Err(Error::NotContained("feasible set must lie in the domain".into()));
        }
        Ok(RestrictedIvf {
            base: self.clone(),
            feasible: s.clone(),
        })
    }
}

fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

impl IntervalFunction for Ivf {
    fn dimension(&self) -> usize {
        Ivf::dimension(self)
    }

    fn value(&self, x: &[f64]) -> Result<ExtInterval> {
        self.eval(x).map(ExtInterval::Finite)
    }

    fn directional(&self, x: &[f64], d: &[f64]) -> Result<ExtInterval> {
        self.dir_derivative(x, d).map(ExtInterval::Finite)
    }
}

pub fn eval_ivf(f: &Ivf, x: &[f64]) -> Result<Interval> {
    f.eval(x)
}

pub fn dir_derivative(f: &Ivf, x: &[f64], d: &[f64]) -> Result<Interval> {
    f.dir_derivative(x, d)
}

pub fn gh_gradient(f: &Ivf, x: &[f64]) -> Result<IVector> {
    f.gh_gradient(x)
}

pub fn convexity_check(f: &Ivf, samples: usize, seed: u64) -> Result<ConvexityOutcome> {
    f.convexity_check(samples, seed)
}

pub fn restricted(f: &Ivf, s: &BoxSet) -> Result<RestrictedIvf> {
    f.restricted(s)
}

pub fn lipschitz_estimate(f: &Ivf, samples: usize, seed: u64) -> Result<f64> {
    f.lipschitz_estimate(samples, seed)
}

#[derive(Debug, Clone, PartialEq)]
pub enum ConvexityOutcome {
    Pass,
    Counterexample(ConvexityCounterexample),
}

impl ConvexityOutcome {
    pub fn passed(&self) -> bool {
        matches!(self, ConvexityOutcome::Pass)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvexityCounterexample {
    pub x1: Vec<f64>,
    pub x2: Vec<f64>,
    pub lambda: f64,
    pub endpoint: EndpointKind,
    /// `g(λx₁ + (1−λ)x₂) − (λg(x₁) + (1−λ)g(x₂))`, positive.
    pub gap: f64,
}

impl fmt::Display for ConvexityCounterexample {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} endpoint violates Jensen at x1={:?}, x2={:?}, lambda={} (gap {:e})",
            self.endpoint, self.x1, self.x2, self.lambda, self.gap
        )
    }
}

/// Feasible-set restriction `F_o` of an [`Ivf`].
#[derive(Debug, Clone)]
pub struct RestrictedIvf {
    base: Ivf,
    feasible: BoxSet,
}

/// Direction components this close to zero count as zero in cone tests.
const DIRECTION_TOL: f64 = 1e-12;

impl RestrictedIvf {
    pub fn base(&self) -> &Ivf {
        &self.base
    }

    pub fn feasible(&self) -> &BoxSet {
        &self.feasible
    }

    pub fn eval(&self, x: &[f64]) -> Result<ExtInterval> {
        if self.feasible.contains(x) {
            self.base.eval(x).map(ExtInterval::Finite)
        } else {
            check_len(self.base.dimension(), x.len())?;
            Ok(ExtInterval::PlusInf)
        }
    }

    /// `F_oD(x)(d)`: `+∞` when the ray `x + t d` leaves `S` for every small
    /// `t > 0`, the base derivative otherwise.
    pub fn dir_derivative(&self, x: &[f64], d: &[f64]) -> Result<ExtInterval> {
        if !self.feasible.contains(x) {
            return Err(Error::InfiniteValue);
        }
        check_len(self.base.dimension(), d.len())?;
        let cone = self.feasible.tangent_cone(x)?;
        let d_clean: Vec<f64> = d.iter().map(|&v| if v.abs() <= DIRECTION_TOL { 0.0 } else { v }).collect();
        if !cone.contains(&d_clean) {
            return Ok(ExtInterval::PlusInf);
        }
        self.base.dir_derivative(x, &d_clean).map(ExtInterval::Finite)
    }
}

impl IntervalFunction for RestrictedIvf {
    fn dimension(&self) -> usize {
        self.base.dimension()
    }

    fn value(&self, x: &[f64]) -> Result<ExtInterval> {
        self.eval(x)
    }

    fn directional(&self, x: &[f64], d: &[f64]) -> Result<ExtInterval> {
        self.dir_derivative(x, d)
    }
}
