//! Weak sharp minima of a convex IVF over a box.
//!
//! `S̄ ⊆ S` is a set of WSM of `F` over `S` with modulus `α` when
//! `F(x̄) ⊕ α·dis(x, S̄) ⪯ F(x)` for all `x̄ ∈ S̄`, `x ∈ S`. Five checkers
//! test this on one shared sample set: the definition itself, the primal
//! tangent-cone criterion, and three dual criteria. A verdict of "holds"
//! always means "holds on the sampled grid".

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{cone_ball_support, sub, BoxSet, OrthantCone};
use crate::interval::{ExtInterval, Interval};
use crate::ivector::{euclidean_norm, IVector};
use crate::ivf::{ConvexityOutcome, EndpointKind, IntervalFunction, Ivf, RestrictedIvf};
use crate::subdiff::{definition_margin, subdiff_support, SubdiffRep};
use crate::support::default_directions;

pub const DEFAULT_GRID: usize = 33;
pub const DEFAULT_SEED: u64 = 0;
pub const DEFAULT_DIRECTIONS: usize = 128;
pub const DEFAULT_TOL: f64 = 1e-7;
pub const DEFAULT_MAX_SAMPLES: usize = 40_000;
pub const DEFAULT_CONVEXITY_SAMPLES: usize = 2000;
/// Cap on the directions from a point of `S̄` toward other points of `S̄`.
pub const MAX_INNER_DIRECTIONS: usize = 128;
/// Bisection stops once the bracket is narrower than this.
pub const MODULUS_RESOLUTION: f64 = 2.5e-4;
/// Smallest modulus [`estimate_modulus`] distinguishes from zero.
pub const MODULUS_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct WsmProblem {
    f: Ivf,
    s: BoxSet,
    sbar: BoxSet,
    alpha: f64,
}

impl WsmProblem {
    pub fn new(f: Ivf, s: BoxSet, sbar: BoxSet, alpha: f64) -> Result<Self> {
        if !s.is_subset_of(f.domain()) {
            return Err(Error::NotContained("S must lie in the domain of F".into()));
        }
        if !sbar.is_subset_of(&s) {
            return Err(Error::NotContained("Sbar must lie in S".into()));
        }
        check_alpha(alpha)?;
        Ok(WsmProblem { f, s, sbar, alpha })
    }

    pub fn with_alpha(&self, alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        Ok(WsmProblem {
            alpha,
            ..self.clone()
        })
    }

    pub fn f(&self) -> &Ivf {
        &self.f
    }

    pub fn s(&self) -> &BoxSet {
        &self.s
    }

    pub fn sbar(&self) -> &BoxSet {
        &self.sbar
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidParameter(format!("alpha must be positive and finite, got {alpha}")));
    }
    Ok(())
}

/// What to do when the sampled Jensen test finds a nonconvex endpoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConvexityGuard {
    Strict,
    Warn,
    Off,
}

#[derive(Debug, Clone)]
pub struct WsmOptions {
    pub grid: usize,
    pub seed: u64,
    pub dirs: usize,
    pub tol: f64,
    pub max_samples: usize,
    pub convexity_samples: usize,
    pub guard: ConvexityGuard,
}

impl Default for WsmOptions {
    fn default() -> Self {
        WsmOptions {
            grid: DEFAULT_GRID,
            seed: DEFAULT_SEED,
            dirs: DEFAULT_DIRECTIONS,
            tol: DEFAULT_TOL,
            max_samples: DEFAULT_MAX_SAMPLES,
            convexity_samples: DEFAULT_CONVEXITY_SAMPLES,
            guard: ConvexityGuard::Strict,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Checker {
    Definition,
    Primal,
    DualB,
    DualE,
    DualF,
}

impl Checker {
    pub const ALL: [Checker; 5] = [
        Checker::Definition,
        Checker::Primal,
        Checker::DualB,
        Checker::DualE,
        Checker::DualF,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Checker::Definition => "definition",
            Checker::Primal => "primal",
            Checker::DualB => "dual-b",
            Checker::DualE => "dual-e",
            Checker::DualF => "dual-f",
        }
    }
}

impl fmt::Display for Checker {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Holds,
    Fails,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Holds => "holds",
            Verdict::Fails => "fails",
        })
    }
}

/// Where the worst margin was observed: a point and a second vector whose
/// meaning depends on the checker (`x` for the definition, a direction for
/// the cone criteria, `z` for the point path, the projection for dual-f).
#[derive(Debug, Clone, PartialEq)]
pub struct Witness {
    pub point: Vec<f64>,
    pub other: Vec<f64>,
    pub label: &'static str,
}

impl Witness {
    fn new(point: &[f64], other: &[f64], label: &'static str) -> Self {
        Witness {
            point: point.to_vec(),
            other: other.to_vec(),
            label,
        }
    }

    pub fn floats(&self) -> Vec<f64> {
        self.point.iter().chain(&self.other).copied().collect()
    }
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {:?} {:?}", self.label, self.point, self.other)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WsmReport {
    pub checker: Checker,
    pub alpha: f64,
    pub verdict: Verdict,
    /// Most negative slack seen; `+∞` when every sample passed vacuously.
    pub worst_margin: f64,
    pub witness: Option<Witness>,
    pub samples: usize,
    pub effective_grid: usize,
    pub notes: Vec<String>,
}

impl WsmReport {
    pub fn holds(&self) -> bool {
        self.verdict == Verdict::Holds
    }
}

/// Running minimum that keeps the first witness on ties.
#[derive(Debug, Clone)]
struct Worst {
    margin: f64,
    witness: Option<Witness>,
    samples: usize,
}

impl Worst {
    fn new() -> Self {
        Worst {
            margin: f64::INFINITY,
            witness: None,
            samples: 0,
        }
    }

    fn push(&mut self, margin: f64, witness: impl FnOnce() -> Witness) {
        self.samples += 1;
        if margin < self.margin || (self.witness.is_none() && margin == self.margin && margin.is_finite()) {
            self.margin = margin;
            self.witness = Some(witness());
        }
    }

    fn merge(&mut self, other: Worst) {
        self.samples += other.samples;
        if other.margin < self.margin {
            self.margin = other.margin;
            self.witness = other.witness;
        }
    }
}

/// Exact-bit key so that grid points and projections deduplicate.
fn key(x: &[f64]) -> Vec<u64> {
    x.iter().map(|v| (v + 0.0).to_bits()).collect()
}

fn normalized(d: &[f64]) -> Option<Vec<f64>> {
    let r = euclidean_norm(d);
    (r > 1e-12).then(|| d.iter().map(|v| v / r).collect())
}

fn dedup(dirs: impl IntoIterator<Item = Vec<f64>>) -> Vec<Vec<f64>> {
    let mut seen = HashSet::new();
    dirs.into_iter()
        .filter(|d| {
            let rounded: Vec<f64> = d.iter().map(|v| (v * 1e12).round() / 1e12).collect();
            seen.insert(key(&rounded))
        })
        .collect()
}

/// `F_D(x)(d)` with a retry on finer steps when the quotients straddle a
/// kink: `F_D` is positively homogeneous, so `F_D(x)(s·d)/s` evaluates the
/// same limit with steps shrunk by `s`.
fn robust_directional<F: IntervalFunction + ?Sized>(f: &F, x: &[f64], d: &[f64]) -> Result<ExtInterval> {
    let mut last = None;
    for s in [1.0, 1e-2, 1e-4] {
        let ds: Vec<f64> = d.iter().map(|v| v * s).collect();
        match f.directional(x, &ds) {
            Ok(v) => return v.scale(1.0 / s),
            Err(e @ Error::NonsmoothUncertain { .. }) => last = Some(e),
            Err(e) => return Err(e),
        }
    }
    Err(last.expect("at least one attempt"))
}

/// Samples shared by every checker for one problem.
pub struct Verifier {
    problem: WsmProblem,
    opts: WsmOptions,
    restricted: Arc<RestrictedIvf>,
    effective_grid: usize,
    /// Grid on `S`; the definition also visits the `S̄` samples.
    s_grid: Vec<Vec<f64>>,
    s_values: Vec<Interval>,
    s_dist: Vec<f64>,
    /// Index into `sbar_pts` of the projection of each grid point.
    s_proj: Vec<usize>,
    sbar_pts: Vec<Vec<f64>>,
    sbar_values: Vec<Interval>,
    base_dirs: Vec<Vec<f64>>,
    /// Unit vectors `(y − p)/‖y − p‖` for grid points `y` projecting to `p`.
    partners: Vec<Vec<Vec<f64>>>,
    notes: Vec<String>,
}

impl Verifier {
    pub fn new(problem: &WsmProblem, opts: &WsmOptions) -> Result<Self> {
        let f = problem.f();
        let mut notes = Vec::new();
        if opts.guard != ConvexityGuard::Off {
            if let ConvexityOutcome::Counterexample(c) = f.convexity_check(opts.convexity_samples, opts.seed)? {
                match opts.guard {
                    ConvexityGuard::Strict => return Err(Error::NotConvex(c.to_string())),
                    _ => notes.push(format!("F is not convex: {c}; checker equivalences need not hold")),
                }
            }
        }
        let s = problem.s();
        let sbar = problem.sbar();
        let free_axes = (0..s.dim()).filter(|&i| s.lo()[i] < s.hi()[i]).count() as u32;
        let mut k = opts.grid.max(2);
        while k > 2 && (k as f64).powi(free_axes as i32) > opts.max_samples as f64 {
            k -= 1;
        }
        if k != opts.grid.max(2) {
            notes.push(format!(
                "grid reduced from {} to {k} points per axis to stay within {} samples",
                opts.grid, opts.max_samples
            ));
        }
        let s_grid = s.grid(k);
        let mut sbar_pts = Vec::new();
        let mut index = HashMap::new();
        let mut add = |p: Vec<f64>, pts: &mut Vec<Vec<f64>>| -> usize {
            *index.entry(key(&p)).or_insert_with(|| {
                pts.push(p);
                pts.len() - 1
            })
        };
        for p in sbar.grid(k) {
            add(p, &mut sbar_pts);
        }
        let s_proj: Vec<usize> = s_grid.iter().map(|y| add(sbar.project(y), &mut sbar_pts)).collect();
        let s_dist: Vec<f64> = s_grid.iter().map(|y| sbar.dist(y)).collect();

        let s_values = s_grid.par_iter().map(|x| f.eval(x)).collect::<Result<Vec<_>>>()?;
        let sbar_values = sbar_pts.par_iter().map(|x| f.eval(x)).collect::<Result<Vec<_>>>()?;

        let mut partners = vec![Vec::new(); sbar_pts.len()];
        for (j, y) in s_grid.iter().enumerate() {
            if s_dist[j] > 0.0 {
                let p = &sbar_pts[s_proj[j]];
                if let Some(u) = normalized(&sub(y, p)) {
                    partners[s_proj[j]].push(u);
                }
            }
        }
        let partners = partners.into_iter().map(dedup).collect();

        Ok(Verifier {
            problem: problem.clone(),
            opts: opts.clone(),
            restricted: Arc::new(f.restricted(s)?),
            effective_grid: k,
            s_grid,
            s_values,
            s_dist,
            s_proj,
            sbar_pts,
            sbar_values,
            base_dirs: default_directions(s.dim(), opts.dirs, opts.seed),
            partners,
            notes,
        })
    }

    pub fn problem(&self) -> &WsmProblem {
        &self.problem
    }

    pub fn effective_grid(&self) -> usize {
        self.effective_grid
    }

    pub fn notes(&self) -> &[String] {
        &self.notes
    }

    pub fn s_grid(&self) -> &[Vec<f64>] {
        &self.s_grid
    }

    pub fn sbar_samples(&self) -> &[Vec<f64>] {
        &self.sbar_pts
    }

    fn report(&self, checker: Checker, alpha: f64, worst: Worst, extra: Vec<String>) -> WsmReport {
        WsmReport {
            checker,
            alpha,
            verdict: if worst.margin >= -self.opts.tol { Verdict::Holds } else { Verdict::Fails },
            worst_margin: worst.margin,
            witness: worst.witness,
            samples: worst.samples,
            effective_grid: self.effective_grid,
            notes: self.notes.iter().cloned().chain(extra).collect(),
        }
    }

    pub fn check(&self, checker: Checker, alpha: f64) -> Result<WsmReport> {
        check_alpha(alpha)?;
        match checker {
            Checker::Definition => Ok(self.definition(alpha)),
            Checker::Primal => self.primal(alpha),
            Checker::DualB => self.dual_b(alpha),
            Checker::DualE => self.dual_e(alpha),
            Checker::DualF => self.dual_f(alpha),
        }
    }

    pub fn check_all(&self, alpha: f64) -> Result<Vec<WsmReport>> {
        Checker::ALL.iter().map(|&c| self.check(c, alpha)).collect()
    }

    /// Every `(x, x̄)` pair: the worst `x̄` for each endpoint is the one
    /// with the largest endpoint value, so pairs reduce to one pass over `x`.
    fn definition(&self, alpha: f64) -> WsmReport {
        let argmax = |pick: fn(&Interval) -> f64| {
            let mut best = 0;
            for (i, v) in self.sbar_values.iter().enumerate() {
                if pick(v) > pick(&self.sbar_values[best]) {
                    best = i;
                }
            }
            best
        };
        let lo_arg = argmax(Interval::lo);
        let hi_arg = argmax(Interval::hi);
        let max_lo = self.sbar_values[lo_arg].lo();
        let max_hi = self.sbar_values[hi_arg].hi();
        let sbar = self.problem.sbar();
        let points = self
            .s_grid
            .iter()
            .zip(&self.s_values)
            .zip(&self.s_dist)
            .map(|((x, v), d)| (x, *v, *d))
            .chain(self.sbar_pts.iter().zip(&self.sbar_values).map(|(x, v)| (x, *v, sbar.dist(x))));
        let mut worst = Worst::new();
        for (x, v, dist) in points {
            let m_lo = v.lo() - max_lo - alpha * dist;
            let m_hi = v.hi() - max_hi - alpha * dist;
            let xbar = if m_lo <= m_hi { lo_arg } else { hi_arg };
            worst.push(m_lo.min(m_hi), || Witness::new(x, &self.sbar_pts[xbar], "x, xbar"));
        }
        worst.samples *= self.sbar_pts.len();
        self.report(Checker::Definition, alpha, worst, Vec::new())
    }

    /// Directions tried at the `S̄` sample `i`: base directions, partner
    /// directions, and up to [`MAX_INNER_DIRECTIONS`] directions toward
    /// other `S̄` samples.
    fn directions_at(&self, i: usize) -> Vec<Vec<f64>> {
        let x = &self.sbar_pts[i];
        let m = self.sbar_pts.len();
        let stride = (m / MAX_INNER_DIRECTIONS).max(1);
        let inner = (0..m)
            .step_by(stride)
            .filter(|&j| j != i)
            .filter_map(|j| normalized(&sub(&self.sbar_pts[j], x)));
        dedup(self.base_dirs.iter().cloned().chain(self.partners[i].iter().cloned()).chain(inner))
    }

    fn per_sbar<T: Send>(&self, f: impl Fn(usize) -> Result<T> + Sync + Send) -> Result<Vec<T>> {
        (0..self.sbar_pts.len()).into_par_iter().map(f).collect()
    }

    fn primal(&self, alpha: f64) -> Result<WsmReport> {
        let sbar = self.problem.sbar();
        let parts = self.per_sbar(|i| {
            let x = &self.sbar_pts[i];
            let tangent = sbar.tangent_cone(x)?;
            let mut w = Worst::new();
            for d in self.directions_at(i) {
                let lhs = ExtInterval::Finite(Interval::point(alpha * crate::geometry::dist_to_cone(&d, &tangent)));
                let rhs = robust_directional(self.restricted.as_ref(), x, &d)?;
                w.push(lhs.margin_to(&rhs), || Witness::new(x, &d, "xbar, d"));
            }
            Ok(w)
        })?;
        Ok(self.report(Checker::Primal, alpha, merge(parts), Vec::new()))
    }

    fn dual_b(&self, alpha: f64) -> Result<WsmReport> {
        let sbar = self.problem.sbar();
        let support = self.per_sbar(|i| {
            let x = &self.sbar_pts[i];
            let normal = sbar.normal_cone(x)?;
            let oracle = subdiff_support(self.restricted.clone(), x)?;
            let mut w = Worst::new();
            for d in self.directions_at(i) {
                let lhs = ExtInterval::Finite(Interval::point(cone_ball_support(&normal, alpha, &d)?));
                let rhs = match &oracle {
                    SubdiffRep::SupportOracle(_) => retry_support(&oracle, self.restricted.as_ref(), x, &d)?,
                    other => other.support_value(&d)?,
                };
                w.push(lhs.margin_to(&rhs), || Witness::new(x, &d, "xbar, d"));
            }
            Ok(w)
        })?;
        let points = self.per_sbar(|i| {
            let x = &self.sbar_pts[i];
            let fx = self.sbar_values[i];
            let mut w = Worst::new();
            for z in self.normal_ball_points(i, alpha)? {
                let g = IVector::degenerate(&z);
                let mut best = Worst::new();
                for (y, fy) in self.s_grid.iter().zip(&self.s_values) {
                    let m = definition_margin(x, fx, &g, y, ExtInterval::Finite(*fy))?;
                    best.push(m, || Witness::new(x, &z, "xbar, z"));
                }
                w.merge(best);
            }
            Ok(w)
        })?;
        let (support, points) = (merge(support), merge(points));
        let extra = vec![format!(
            "support path margin {}, point path margin {}",
            fmt_float(support.margin),
            fmt_float(points.margin)
        )];
        let mut both = support;
        both.merge(points);
        Ok(self.report(Checker::DualB, alpha, both, extra))
    }

    /// `0`, base directions projected into `N_S̄(x)` and partner directions,
    /// all scaled to length `α`.
    fn normal_ball_points(&self, i: usize, alpha: f64) -> Result<Vec<Vec<f64>>> {
        let x = &self.sbar_pts[i];
        let normal = self.problem.sbar().normal_cone(x)?;
        let rays = self
            .base_dirs
            .iter()
            .map(|d| normal.project(d))
            .chain(self.partners[i].iter().cloned())
            .filter_map(|d| normalized(&d))
            .map(|u| u.into_iter().map(|v| alpha * v).collect::<Vec<f64>>());
        Ok(dedup(std::iter::once(vec![0.0; x.len()]).chain(rays)))
    }

    fn dual_e(&self, alpha: f64) -> Result<WsmReport> {
        let s = self.problem.s();
        let sbar = self.problem.sbar();
        let f = self.problem.f();
        let mut vacuous = 0;
        let parts = self.per_sbar(|i| {
            let x = &self.sbar_pts[i];
            let cone: OrthantCone = s.tangent_cone(x)?.intersect(&sbar.normal_cone(x)?);
            let mut w = Worst::new();
            if cone.is_trivial() {
                return Ok((w, 1));
            }
            let dirs = dedup(
                self.base_dirs
                    .iter()
                    .chain(&self.partners[i])
                    .filter_map(|d| normalized(&cone.project(d))),
            );
            for d in dirs {
                let lhs = ExtInterval::Finite(Interval::point(alpha * euclidean_norm(&d)));
                let rhs = robust_directional(f, x, &d)?;
                w.push(lhs.margin_to(&rhs), || Witness::new(x, &d, "xbar, d"));
            }
            Ok((w, 0))
        })?;
        let mut worst = Worst::new();
        for (w, v) in parts {
            worst.merge(w);
            vacuous += v;
        }
        let extra = if vacuous > 0 {
            vec![format!("{vacuous} Sbar samples have a trivial cone T_S ∩ N_Sbar (vacuous)")]
        } else {
            Vec::new()
        };
        Ok(self.report(Checker::DualE, alpha, worst, extra))
    }

    fn dual_f(&self, alpha: f64) -> Result<WsmReport> {
        let f = self.problem.f();
        let parts = (0..self.s_grid.len())
            .into_par_iter()
            .map(|j| {
                let y = &self.s_grid[j];
                let p = &self.sbar_pts[self.s_proj[j]];
                let dist = self.s_dist[j];
                if dist == 0.0 {
                    return Ok((f64::INFINITY, j));
                }
                let lhs = ExtInterval::Finite(Interval::point(alpha * dist));
                let rhs = robust_directional(f, p, &sub(y, p))?;
                Ok((lhs.margin_to(&rhs), j))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut worst = Worst::new();
        for (m, j) in parts {
            worst.push(m, || Witness::new(&self.s_grid[j], &self.sbar_pts[self.s_proj[j]], "y, p"));
        }
        Ok(self.report(Checker::DualF, alpha, worst, Vec::new()))
    }

    /// Scalar WSM check on one endpoint function, evaluated directly.
    pub fn check_endpoint(&self, kind: EndpointKind, alpha: f64) -> Result<(Verdict, f64)> {
        let f = self.problem.f();
        let sbar = self.problem.sbar();
        let top = self
            .sbar_pts
            .iter()
            .map(|x| f.eval_endpoint(kind, x))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .fold(f64::NEG_INFINITY, f64::max);
        let mut worst = f64::INFINITY;
        for x in self.s_grid.iter().chain(&self.sbar_pts) {
            worst = worst.min(f.eval_endpoint(kind, x)? - top - alpha * sbar.dist(x));
        }
        let verdict = if worst >= -self.opts.tol { Verdict::Holds } else { Verdict::Fails };
        Ok((verdict, worst))
    }
}

fn retry_support<F: IntervalFunction + ?Sized>(rep: &SubdiffRep, f: &F, x: &[f64], d: &[f64]) -> Result<ExtInterval> {
    match rep.support_value(d) {
        Err(Error::NonsmoothUncertain { .. }) => robust_directional(f, x, d),
        other => other,
    }
}

fn merge(parts: Vec<Worst>) -> Worst {
    let mut w = Worst::new();
    for p in parts {
        w.merge(p);
    }
    w
}

pub fn fmt_float(v: f64) -> String {
    if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{v:.9e}")
    }
}

pub fn concordant(reports: &[WsmReport]) -> bool {
    reports.windows(2).all(|w| w[0].verdict == w[1].verdict)
}

pub fn check_definition(p: &WsmProblem) -> Result<WsmReport> {
    Verifier::new(p, &WsmOptions::default())?.check(Checker::Definition, p.alpha())
}

pub fn check_primal(p: &WsmProblem) -> Result<WsmReport> {
    Verifier::new(p, &WsmOptions::default())?.check(Checker::Primal, p.alpha())
}

pub fn check_dual_normal_cone(p: &WsmProblem) -> Result<WsmReport> {
    Verifier::new(p, &WsmOptions::default())?.check(Checker::DualB, p.alpha())
}

pub fn check_dual_e(p: &WsmProblem) -> Result<WsmReport> {
    Verifier::new(p, &WsmOptions::default())?.check(Checker::DualE, p.alpha())
}

pub fn check_dual_f(p: &WsmProblem) -> Result<WsmReport> {
    Verifier::new(p, &WsmOptions::default())?.check(Checker::DualF, p.alpha())
}

pub fn check_all(p: &WsmProblem, opts: &WsmOptions) -> Result<Vec<WsmReport>> {
    Verifier::new(p, opts)?.check_all(p.alpha())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModulusEstimate {
    /// Largest grid-feasible modulus found; `0` when none above
    /// [`MODULUS_FLOOR`] passes, `+∞` when no sample lies outside `S̄`.
    pub alpha: f64,
    /// Definition report just above `alpha`.
    pub above: Option<WsmReport>,
}

/// Bisection on `α` with the definition checker as predicate.
pub fn estimate_modulus(p: &WsmProblem, opts: &WsmOptions) -> Result<ModulusEstimate> {
    let v = Verifier::new(p, opts)?;
    estimate_modulus_with(&v)
}

pub fn estimate_modulus_with(v: &Verifier) -> Result<ModulusEstimate> {
    let floor = v.definition(MODULUS_FLOOR);
    if !floor.holds() {
        return Ok(ModulusEstimate {
            alpha: 0.0,
            above: Some(floor),
        });
    }
    // every ratio ‖F(y) ⊖ F(p)‖ / dis(y, S̄) bounds the modulus from above
    let mut hi = f64::NEG_INFINITY;
    for (j, y) in v.s_grid.iter().enumerate() {
        if v.s_dist[j] > 0.0 {
            let fp = v.sbar_values[v.s_proj[j]];
            let _ = y;
            hi = hi.max(v.s_values[j].gh_sub(fp).norm() / v.s_dist[j]);
        }
    }
    if hi == f64::NEG_INFINITY {
        return Ok(ModulusEstimate {
            alpha: f64::INFINITY,
            above: None,
        });
    }
    let mut hi = hi.max(2.0 * MODULUS_FLOOR);
    let mut above = v.definition(hi);
    let mut guard = 0;
    while above.holds() && guard < 64 {
        hi *= 2.0;
        above = v.definition(hi);
        guard += 1;
    }
    let mut lo = MODULUS_FLOOR;
    while hi - lo > MODULUS_RESOLUTION {
        let mid = 0.5 * (lo + hi);
        let r = v.definition(mid);
        if r.holds() {
            lo = mid;
        } else {
            hi = mid;
            above = r;
        }
    }
    Ok(ModulusEstimate {
        alpha: lo,
        above: Some(above),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(lo: f64, hi: f64) -> BoxSet {
        BoxSet::new(vec![lo], vec![hi]).unwrap()
    }

    fn square(a: f64) -> BoxSet {
        BoxSet::new(vec![-a, -a], vec![a, a]).unwrap()
    }

    fn origin(n: usize) -> BoxSet {
        BoxSet::point(&vec![0.0; n]).unwrap()
    }

    fn sharp_1d(alpha: f64) -> WsmProblem {
        let f = Ivf::from_exprs("abs(x1)/4", "abs(x1)", line(-1.0, 1.0)).unwrap();
        WsmProblem::new(f, line(-1.0, 1.0), origin(1), alpha).unwrap()
    }

    fn verdicts(p: &WsmProblem) -> Vec<Verdict> {
        check_all(p, &WsmOptions::default()).unwrap().iter().map(|r| r.verdict).collect()
    }

    #[test]
    fn problem_validation() {
        let f = Ivf::from_exprs("abs(x1)/4", "abs(x1)", line(-1.0, 1.0)).unwrap();
        assert!(WsmProblem::new(f.clone(), line(-2.0, 1.0), origin(1), 0.1).is_err());
        assert!(WsmProblem::new(f.clone(), line(-1.0, 0.0), line(0.0, 0.5), 0.1).is_err());
        assert!(WsmProblem::new(f.clone(), line(-1.0, 1.0), origin(1), 0.0).is_err());
        assert!(WsmProblem::new(f, line(-1.0, 1.0), origin(1), f64::NAN).is_err());
    }

    #[test]
    fn definition_examples() {
        let r = check_definition(&sharp_1d(0.2)).unwrap();
        assert!(r.holds());
        let r = check_definition(&sharp_1d(0.3)).unwrap();
        assert_eq!(r.verdict, Verdict::Fails);
        let w = r.witness.unwrap();
        assert_eq!(w.point.len(), 1);
        assert!(w.point[0].abs() == 1.0, "witness {w}");
        let r = check_definition(&sharp_1d(0.25)).unwrap();
        assert!(r.holds() && r.worst_margin.abs() < 1e-12);
    }

    #[test]
    fn primal_examples() {
        assert!(check_primal(&sharp_1d(0.2)).unwrap().holds());
        assert!(!check_primal(&sharp_1d(0.3)).unwrap().holds());
        // S̄ = S: no direction leaves S̄ while staying feasible
        let f = Ivf::from_exprs("1", "2", square(1.0)).unwrap();
        let p = WsmProblem::new(f, square(1.0), square(1.0), 50.0).unwrap();
        assert!(check_primal(&p).unwrap().holds());
        assert!(check_definition(&p).unwrap().holds());
    }

    #[test]
    fn dual_examples() {
        for (alpha, holds) in [(0.2, true), (0.3, false)] {
            let p = sharp_1d(alpha);
            assert_eq!(check_dual_normal_cone(&p).unwrap().holds(), holds);
            assert_eq!(check_dual_e(&p).unwrap().holds(), holds);
            assert_eq!(check_dual_f(&p).unwrap().holds(), holds);
        }
    }

    #[test]
    fn dual_f_margin_matches_hand_values() {
        // y = 0.5, p = 0: F_D(0)(0.5) = [0.125, 0.5] against α·0.5
        let v = Verifier::new(&sharp_1d(0.2), &WsmOptions::default()).unwrap();
        let r = v.check(Checker::DualF, 0.3).unwrap();
        assert!((r.worst_margin - (0.25 - 0.3)).abs() < 1e-8, "{}", r.worst_margin);
        let r = v.check(Checker::DualE, 0.2).unwrap();
        assert!((r.worst_margin - 0.05).abs() < 1e-8, "{}", r.worst_margin);
    }

    #[test]
    fn interior_points_of_sbar_are_vacuous_for_dual_e() {
        let f = Ivf::from_exprs("0.5*max(abs(x1) - 0.5, 0)", "3*max(abs(x1) - 0.5, 0) + 1", line(-2.0, 2.0)).unwrap();
        let p = WsmProblem::new(f, line(-2.0, 2.0), line(-0.5, 0.5), 0.4).unwrap();
        let r = check_dual_e(&p).unwrap();
        assert!(r.holds());
        assert!(r.notes.iter().any(|n| n.contains("vacuous")));
    }

    #[test]
    fn all_checkers_agree_on_the_sharp_example() {
        assert_eq!(verdicts(&sharp_1d(0.2)), vec![Verdict::Holds; 5]);
        assert_eq!(verdicts(&sharp_1d(0.3)), vec![Verdict::Fails; 5]);
    }

    #[test]
    fn modulus_examples() {
        let m = estimate_modulus(&sharp_1d(1.0), &WsmOptions::default()).unwrap();
        assert!((m.alpha - 0.25).abs() <= 1e-3, "{}", m.alpha);
        let f = Ivf::from_exprs("abs(x1) + abs(x2)", "2*abs(x1) + 2*abs(x2)", square(1.0)).unwrap();
        let p = WsmProblem::new(f, square(1.0), origin(2), 1.0).unwrap();
        let m = estimate_modulus(&p, &WsmOptions::default()).unwrap();
        assert!((m.alpha - 1.0).abs() <= 1e-2, "{}", m.alpha);
        // S̄ away from the minimizer
        let f = Ivf::from_exprs("abs(x1 - 0.5)", "2*abs(x1 - 0.5) + 1", line(-1.0, 1.0)).unwrap();
        let p = WsmProblem::new(f, line(-1.0, 1.0), origin(1), 1.0).unwrap();
        assert_eq!(estimate_modulus(&p, &WsmOptions::default()).unwrap().alpha, 0.0);
        // S̄ = S leaves nothing to bound the modulus
        let f = Ivf::from_exprs("1", "2", line(-1.0, 1.0)).unwrap();
        let p = WsmProblem::new(f, line(-1.0, 1.0), line(-1.0, 1.0), 1.0).unwrap();
        assert_eq!(estimate_modulus(&p, &WsmOptions::default()).unwrap().alpha, f64::INFINITY);
    }

    #[test]
    fn modulus_is_consistent_with_the_definition() {
        let p = sharp_1d(1.0);
        let v = Verifier::new(&p, &WsmOptions::default()).unwrap();
        let m = estimate_modulus_with(&v).unwrap();
        assert!(v.check(Checker::Definition, m.alpha).unwrap().holds());
        assert!(!v.check(Checker::Definition, m.alpha + 2e-3).unwrap().holds());
    }

    #[test]
    fn endpoint_reduction() {
        for alpha in [0.1, 0.25, 0.3, 0.9, 1.1] {
            let v = Verifier::new(&sharp_1d(alpha), &WsmOptions::default()).unwrap();
            let def = v.check(Checker::Definition, alpha).unwrap().verdict;
            let lo = v.check_endpoint(EndpointKind::Lower, alpha).unwrap().0;
            let hi = v.check_endpoint(EndpointKind::Upper, alpha).unwrap().0;
            let both = if lo == Verdict::Holds && hi == Verdict::Holds { Verdict::Holds } else { Verdict::Fails };
            assert_eq!(def, both, "alpha {alpha}");
        }
    }

    #[test]
    fn grid_cap_reduces_density() {
        let f = Ivf::from_exprs("abs(x1) + abs(x2)", "2*abs(x1) + 2*abs(x2)", square(1.0)).unwrap();
        let p = WsmProblem::new(f, square(1.0), origin(2), 0.5).unwrap();
        let opts = WsmOptions {
            max_samples: 100,
            ..WsmOptions::default()
        };
        let v = Verifier::new(&p, &opts).unwrap();
        assert_eq!(v.effective_grid(), 10);
        assert_eq!(v.s_grid().len(), 100);
        assert!(v.notes()[0].contains("reduced"));
    }

    #[test]
    fn convexity_guard_modes() {
        let f = Ivf::from_exprs("0 - x1^2", "1", line(-1.0, 1.0)).unwrap();
        let p = WsmProblem::new(f, line(-1.0, 1.0), origin(1), 0.1).unwrap();
        assert!(matches!(Verifier::new(&p, &WsmOptions::default()), Err(Error::NotConvex(_))));
        let warn = WsmOptions {
            guard: ConvexityGuard::Warn,
            ..WsmOptions::default()
        };
        let v = Verifier::new(&p, &warn).unwrap();
        assert!(v.notes()[0].contains("not convex"));
    }

    #[test]
    fn reports_are_deterministic() {
        let f = Ivf::from_exprs("max(abs(x1), abs(x2))", "2*max(abs(x1), abs(x2)) + 1", square(1.0)).unwrap();
        let p = WsmProblem::new(f, square(1.0), origin(2), 0.9).unwrap();
        let a = check_all(&p, &WsmOptions::default()).unwrap();
        let b = check_all(&p, &WsmOptions::default()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn monotone_in_alpha() {
        let f = Ivf::from_exprs("max(abs(x1), abs(x2))", "2*max(abs(x1), abs(x2)) + 1", square(1.0)).unwrap();
        let p = WsmProblem::new(f, square(1.0), origin(2), 1.0).unwrap();
        let v = Verifier::new(&p, &WsmOptions::default()).unwrap();
        for c in Checker::ALL {
            let mut failed = false;
            for alpha in [1.2, 0.9, 0.75, 0.7, 0.5, 0.1] {
                let holds = v.check(c, alpha).unwrap().holds();
                // once passing going downward, never failing again
                assert!(!(failed && !holds) || !v.check(c, alpha * 1.0001).unwrap().holds());
                failed |= holds;
                if holds {
                    for smaller in [alpha * 0.5, alpha * 0.1] {
                        assert!(v.check(c, smaller).unwrap().holds(), "{c} at {smaller}");
                    }
                }
            }
        }
    }

    #[test]
    fn dual_e_and_f_only_see_the_boundary_of_sbar() {
        // S̄ is not the argmin: the definition fails, yet (e) and (f) only
        // inspect directions leaving S̄ and hold.
        let f = Ivf::from_exprs("abs(x1) + abs(x2)", "2*abs(x1) + 2*abs(x2)", square(1.0)).unwrap();
        let p = WsmProblem::new(f, square(1.0), square(0.5), 0.5).unwrap();
        let reports = check_all(&p, &WsmOptions::default()).unwrap();
        let by = |c: Checker| reports.iter().find(|r| r.checker == c).unwrap().verdict;
        assert_eq!(by(Checker::Definition), Verdict::Fails);
        assert_eq!(by(Checker::Primal), Verdict::Fails);
        assert_eq!(by(Checker::DualB), Verdict::Fails);
        assert_eq!(by(Checker::DualE), Verdict::Holds);
        assert_eq!(by(Checker::DualF), Verdict::Holds);
    }
}
