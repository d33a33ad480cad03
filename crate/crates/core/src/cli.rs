//! Problem files and the `ghwsm` command line.
//!
//! A problem file holds `key: value` lines; `#` starts a comment. Boxes
//! are written `lo1 hi1 lo2 hi2 …`.
//!
//! ```text
//! dimension: 1
//! lower: abs(x1)/4
//! upper: abs(x1)
//! domain: -1 1
//! S: -1 1
//! Sbar: 0 0
//! alpha: 0.2
//! ```
//!
//! Optional keys: `domain` (defaults to `S`), `alpha`, `grid`, `seed`, and
//! `expect: holds|fails`, a claimed verdict that is compared against the
//! definition oracle and flagged when the two differ.

use std::fmt::{self, Write as _};
use std::path::Path;
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};

use crate::error::Error;
use crate::expr;
use crate::geometry::BoxSet;
use crate::ivector::IVector;
use crate::ivf::Ivf;
use crate::subdiff::{is_subgradient, is_subgradient_directional, subdiff_1d, subdiff_singleton, subdiff_support};
use crate::support::default_directions;
use crate::wsm::{
    concordant, estimate_modulus_with, fmt_float, Checker, ConvexityGuard, Verdict, Verifier, WsmOptions, WsmProblem,
    WsmReport, DEFAULT_DIRECTIONS, DEFAULT_GRID, DEFAULT_MAX_SAMPLES, DEFAULT_SEED, DEFAULT_TOL,
};

pub const EXIT_HOLDS: i32 = 0;
pub const EXIT_FAILS: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

/// Input error with file and line context.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemError {
    pub path: String,
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ProblemError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "{}:{}: {}", self.path, l, self.message),
            None => write!(f, "{}: {}", self.path, self.message),
        }
    }
}

impl std::error::Error for ProblemError {}

#[derive(Debug, Clone)]
pub struct ProblemFile {
    pub dimension: usize,
    pub lower: String,
    pub upper: String,
    pub domain: BoxSet,
    pub s: BoxSet,
    pub sbar: BoxSet,
    pub alpha: Option<f64>,
    pub grid: Option<usize>,
    pub seed: Option<u64>,
    pub expect: Option<Verdict>,
}

const KEYS: [&str; 10] = ["dimension", "lower", "upper", "domain", "S", "Sbar", "alpha", "grid", "seed", "expect"];

impl ProblemFile {
    pub fn read(path: &Path) -> Result<Self, ProblemError> {
        let name = path.display().to_string();
        let text = std::fs::read_to_string(path).map_err(|e| ProblemError {
            path: name.clone(),
            line: None,
            message: e.to_string(),
        })?;
        Self::parse(&text, &name)
    }

    pub fn parse(text: &str, path: &str) -> Result<Self, ProblemError> {
        let err = |line: Option<usize>, message: String| ProblemError {
            path: path.to_string(),
            line,
            message,
        };
        let mut entries: Vec<Option<(usize, String)>> = vec![None; KEYS.len()];
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content
                .split_once(':')
                .ok_or_else(|| err(Some(line), format!("expected `key: value`, found `{content}`")))?;
            let key = key.trim();
            let slot = KEYS
                .iter()
                .position(|k| *k == key)
                .ok_or_else(|| err(Some(line), format!("unknown key `{key}`")))?;
            if let Some((first, _)) = &entries[slot] {
                return Err(err(Some(line), format!("duplicate key `{key}` (first set on line {first})")));
            }
            entries[slot] = Some((line, value.trim().to_string()));
        }
        let get = |k: &str| entries[KEYS.iter().position(|x| *x == k).unwrap()].clone();
        let required = |k: &str| get(k).ok_or_else(|| err(None, format!("missing key `{k}`")));

        let (dline, dvalue) = required("dimension")?;
        let dimension: usize = dvalue
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| err(Some(dline), format!("dimension must be a positive integer, found `{dvalue}`")))?;

        let expression = |k: &str| -> Result<String, ProblemError> {
            let (line, v) = required(k)?;
            expr::parse(&v, dimension).map_err(|e| err(Some(line), format!("{k}: {e}")))?;
            Ok(v)
        };
        let lower = expression("lower")?;
        let upper = expression("upper")?;

        let boxed = |line: usize, k: &str, v: &str| -> Result<BoxSet, ProblemError> {
            let nums = v
                .split_whitespace()
                .map(|t| t.parse::<f64>().map_err(|_| err(Some(line), format!("{k}: `{t}` is not a number"))))
                .collect::<Result<Vec<f64>, _>>()?;
            if nums.len() != 2 * dimension {
                return Err(err(
                    Some(line),
                    format!("{k}: expected {} numbers, found {}", 2 * dimension, nums.len()),
                ));
            }
            BoxSet::from_pairs(&nums).map_err(|e| err(Some(line), format!("{k}: {e}")))
        };
        let (sline, sv) = required("S")?;
        let s = boxed(sline, "S", &sv)?;
        let (bline, bv) = required("Sbar")?;
        let sbar = boxed(bline, "Sbar", &bv)?;
        let domain = match get("domain") {
            Some((line, v)) => {
                let d = boxed(line, "domain", &v)?;
                if !s.is_subset_of(&d) {
                    return Err(err(Some(sline), "S must lie in the domain".into()));
                }
                d
            }
            None => s.clone(),
        };
        if !sbar.is_subset_of(&s) {
            return Err(err(Some(bline), "Sbar must lie in S".into()));
        }

        let alpha = match get("alpha") {
            Some((line, v)) => Some(
                v.parse::<f64>()
                    .ok()
                    .filter(|a| *a > 0.0 && a.is_finite())
                    .ok_or_else(|| err(Some(line), format!("alpha must be a positive number, found `{v}`")))?,
            ),
            None => None,
        };
        let grid = match get("grid") {
            Some((line, v)) => Some(
                v.parse::<usize>()
                    .ok()
                    .filter(|g| *g >= 2)
                    .ok_or_else(|| err(Some(line), format!("grid must be an integer ≥ 2, found `{v}`")))?,
            ),
            None => None,
        };
        let seed = match get("seed") {
            Some((line, v)) => Some(
                v.parse::<u64>()
                    .map_err(|_| err(Some(line), format!("seed must be a nonnegative integer, found `{v}`")))?,
            ),
            None => None,
        };
        let expect = match get("expect") {
            Some((line, v)) => Some(match v.as_str() {
                "holds" => Verdict::Holds,
                "fails" => Verdict::Fails,
                _ => return Err(err(Some(line), format!("expect must be `holds` or `fails`, found `{v}`"))),
            }),
            None => None,
        };
        Ok(ProblemFile {
            dimension,
            lower,
            upper,
            domain,
            s,
            sbar,
            alpha,
            grid,
            seed,
            expect,
        })
    }

    pub fn ivf(&self) -> crate::Result<Ivf> {
        Ivf::from_exprs(&self.lower, &self.upper, self.domain.clone())
    }

    pub fn problem(&self, alpha: f64) -> crate::Result<WsmProblem> {
        WsmProblem::new(self.ivf()?, self.s.clone(), self.sbar.clone(), alpha)
    }
}

#[derive(Debug, Parser)]
#[command(name = "ghwsm", version, about = "Weak-sharp-minima checks for interval-valued functions")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Definition,
    Primal,
    DualB,
    DualE,
    DualF,
    All,
}

#[derive(Debug, clap::Args)]
pub struct Sampling {
    /// Grid points per axis (overrides the file)
    #[arg(long)]
    pub grid: Option<usize>,
    /// Seed for sampled directions (overrides the file)
    #[arg(long)]
    pub seed: Option<u64>,
    /// Random unit directions on top of ±basis
    #[arg(long, default_value_t = DEFAULT_DIRECTIONS)]
    pub dirs: usize,
    /// Margin tolerance for a "holds" verdict
    #[arg(long, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
    /// Treat a failed sampled convexity check as an input error
    #[arg(long)]
    pub strict_convexity: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one or all WSM checkers
    Check {
        file: std::path::PathBuf,
        #[arg(long, value_enum, default_value_t = Mode::All)]
        mode: Mode,
        /// Modulus to test (overrides the file)
        #[arg(long)]
        alpha: Option<f64>,
        #[command(flatten)]
        sampling: Sampling,
    },
    /// Estimate the largest modulus passing the definition on the grid
    Modulus {
        file: std::path::PathBuf,
        #[command(flatten)]
        sampling: Sampling,
    },
    /// Print the gH-subdifferential at a point
    Subdiff {
        file: std::path::PathBuf,
        /// Comma-separated point
        #[arg(long, allow_hyphen_values = true)]
        at: String,
        /// Candidate subgradient as `lo1,hi1,lo2,hi2,…`
        #[arg(long, allow_hyphen_values = true)]
        probe: Option<String>,
        #[command(flatten)]
        sampling: Sampling,
    },
}

/// Captured result of one invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn input_error(e: impl fmt::Display) -> Self {
        Outcome {
            code: EXIT_INPUT,
            stdout: String::new(),
            stderr: format!("error: {e}\n"),
        }
    }
}

pub fn run_args<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(&cli),
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_HOLDS };
            let text = e.render().to_string();
            if e.use_stderr() {
                Outcome {
                    code,
                    stdout: String::new(),
                    stderr: text,
                }
            } else {
                Outcome {
                    code,
                    stdout: text,
                    stderr: String::new(),
                }
            }
        }
    }
}

pub fn run(cli: &Cli) -> Outcome {
    let result = match &cli.command {
        Command::Check {
            file,
            mode,
            alpha,
            sampling,
        } => cmd_check(file, *mode, *alpha, sampling),
        Command::Modulus { file, sampling } => cmd_modulus(file, sampling),
        Command::Subdiff {
            file,
            at,
            probe,
            sampling,
        } => cmd_subdiff(file, at, probe.as_deref(), sampling),
    };
    result.unwrap_or_else(Outcome::input_error)
}

#[derive(Debug)]
enum InputError {
    File(ProblemError),
    Lib(Error),
    Arg(String),
}

impl fmt::Display for InputError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InputError::File(e) => e.fmt(f),
            InputError::Lib(e) => e.fmt(f),
            InputError::Arg(e) => f.write_str(e),
        }
    }
}

impl From<ProblemError> for InputError {
    fn from(e: ProblemError) -> Self {
        InputError::File(e)
    }
}

impl From<Error> for InputError {
    fn from(e: Error) -> Self {
        InputError::Lib(e)
    }
}

fn options(file: &ProblemFile, s: &Sampling) -> Result<WsmOptions, InputError> {
    let grid = s.grid.or(file.grid).unwrap_or(DEFAULT_GRID);
    if grid < 2 {
        return Err(InputError::Arg("--grid must be at least 2".into()));
    }
    if !(s.tol >= 0.0 && s.tol.is_finite()) {
        return Err(InputError::Arg("--tol must be a nonnegative number".into()));
    }
    Ok(WsmOptions {
        grid,
        seed: s.seed.or(file.seed).unwrap_or(DEFAULT_SEED),
        dirs: s.dirs,
        tol: s.tol,
        max_samples: DEFAULT_MAX_SAMPLES,
        guard: if s.strict_convexity { ConvexityGuard::Strict } else { ConvexityGuard::Warn },
        ..WsmOptions::default()
    })
}

fn floats(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x}")).collect::<Vec<_>>().join(",")
}

/// The machine-readable summary of one report.
pub fn data_line(r: &WsmReport) -> String {
    let witness = r.witness.as_ref().map(|w| floats(&w.floats())).unwrap_or_else(|| "-".into());
    format!(
        "#DATA checker={} verdict={} margin={} witness={} samples={}",
        r.checker,
        r.verdict,
        fmt_float(r.worst_margin),
        witness,
        r.samples
    )
}

/// Human-readable block for one report; notes listed in `shared` were
/// already printed once for the whole run.
pub fn format_report(r: &WsmReport, shared: &[String], out: &mut String) {
    let _ = writeln!(out, "checker: {}", r.checker);
    let _ = writeln!(out, "  alpha: {}", r.alpha);
    let _ = writeln!(out, "  verdict: {} (on the sampled grid)", r.verdict);
    let _ = writeln!(out, "  worst margin: {}", fmt_float(r.worst_margin));
    match &r.witness {
        Some(w) => {
            let _ = writeln!(out, "  witness: {w}");
        }
        None => {
            let _ = writeln!(out, "  witness: none");
        }
    }
    let _ = writeln!(out, "  samples: {} (grid {} per axis)", r.samples, r.effective_grid);
    for n in r.notes.iter().filter(|n| !shared.contains(n)) {
        let _ = writeln!(out, "  note: {n}");
    }
    let _ = writeln!(out, "{}", data_line(r));
}

fn cmd_check(path: &Path, mode: Mode, alpha: Option<f64>, sampling: &Sampling) -> Result<Outcome, InputError> {
    let file = ProblemFile::read(path)?;
    let alpha = alpha
        .or(file.alpha)
        .ok_or_else(|| InputError::Arg("no alpha: set `alpha:` in the file or pass --alpha".into()))?;
    let problem = file.problem(alpha)?;
    let opts = options(&file, sampling)?;
    let verifier = Verifier::new(&problem, &opts)?;
    let checkers: Vec<Checker> = match mode {
        Mode::Definition => vec![Checker::Definition],
        Mode::Primal => vec![Checker::Primal],
        Mode::DualB => vec![Checker::DualB],
        Mode::DualE => vec![Checker::DualE],
        Mode::DualF => vec![Checker::DualF],
        Mode::All => Checker::ALL.to_vec(),
    };
    let reports = checkers
        .iter()
        .map(|&c| verifier.check(c, alpha))
        .collect::<crate::Result<Vec<_>>>()?;

    let mut out = String::new();
    for note in verifier.notes() {
        let _ = writeln!(out, "NOTE: {note}");
    }
    for r in &reports {
        format_report(r, verifier.notes(), &mut out);
    }
    if mode == Mode::All {
        let verdict = if concordant(&reports) { "agree" } else { "disagree" };
        let _ = writeln!(out, "CONCORDANCE: {verdict}");
        let _ = writeln!(out, "#DATA concordance={verdict}");
    }
    if let Some(expected) = file.expect {
        let oracle = match reports.iter().find(|r| r.checker == Checker::Definition) {
            Some(r) => r.verdict,
            None => verifier.check(Checker::Definition, alpha)?.verdict,
        };
        if oracle != expected {
            let _ = writeln!(
                out,
                "NOTE: the file claims the WSM property {expected} at alpha={alpha}, but the definition oracle \
                 finds that it {oracle} on the sampled grid; the report follows the oracle"
            );
        }
    }
    let code = if reports.iter().all(WsmReport::holds) { EXIT_HOLDS } else { EXIT_FAILS };
    Ok(Outcome {
        code,
        stdout: out,
        stderr: String::new(),
    })
}

fn cmd_modulus(path: &Path, sampling: &Sampling) -> Result<Outcome, InputError> {
    let file = ProblemFile::read(path)?;
    let problem = file.problem(file.alpha.unwrap_or(1.0))?;
    let opts = options(&file, sampling)?;
    let verifier = Verifier::new(&problem, &opts)?;
    let m = estimate_modulus_with(&verifier)?;
    let mut out = String::new();
    for note in verifier.notes() {
        let _ = writeln!(out, "NOTE: {note}");
    }
    let _ = writeln!(out, "modulus: {} (largest alpha passing the definition on the grid)", fmt_float(m.alpha));
    match &m.above {
        Some(r) => {
            let _ = writeln!(out, "fails at alpha={}:", r.alpha);
            if let Some(w) = &r.witness {
                let _ = writeln!(out, "  witness: {w}");
            }
            let _ = writeln!(out, "  margin: {}", fmt_float(r.worst_margin));
        }
        None => {
            let _ = writeln!(out, "no grid point lies outside Sbar; every alpha passes");
        }
    }
    let _ = writeln!(out, "#DATA modulus={}", fmt_float(m.alpha));
    Ok(Outcome {
        code: EXIT_HOLDS,
        stdout: out,
        stderr: String::new(),
    })
}

fn parse_list(s: &str, what: &str) -> Result<Vec<f64>, InputError> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| InputError::Arg(format!("{what}: `{}` is not a number", t.trim())))
        })
        .collect()
}

fn cmd_subdiff(path: &Path, at: &str, probe: Option<&str>, sampling: &Sampling) -> Result<Outcome, InputError> {
    let file = ProblemFile::read(path)?;
    let f = file.ivf()?;
    let n = f.dimension();
    let x = parse_list(at, "--at")?;
    if x.len() != n {
        return Err(InputError::Arg(format!("--at: expected {n} coordinates, found {}", x.len())));
    }
    if !f.domain().contains(&x) {
        return Err(InputError::Arg(format!("--at: {x:?} lies outside the domain")));
    }
    let opts = options(&file, sampling)?;
    let mut out = String::new();
    if n == 1 {
        let rep = subdiff_1d(&f, x[0])?;
        let _ = writeln!(out, "subdifferential at {x:?}: {rep}");
    } else {
        match subdiff_singleton(&f, &x) {
            Ok(rep) => {
                let _ = writeln!(out, "subdifferential at {x:?}: {rep}");
            }
            Err(Error::NoSingleton { component }) => {
                let _ = writeln!(
                    out,
                    "no singleton subdifferential at {x:?} (component {component}); support values follow"
                );
            }
            Err(e) => return Err(e.into()),
        }
        let rep = subdiff_support(Arc::new(f.clone()), &x)?;
        for i in 0..n {
            for s in [1.0, -1.0] {
                let mut d = vec![0.0; n];
                d[i] = s;
                let _ = writeln!(out, "  support at {d:?}: {}", rep.support_value(&d)?);
            }
        }
    }
    let mut code = EXIT_HOLDS;
    if let Some(p) = probe {
        let v = parse_list(p, "--probe")?;
        if v.len() != 2 * n {
            return Err(InputError::Arg(format!("--probe: expected {} numbers, found {}", 2 * n, v.len())));
        }
        let comps = v
            .chunks(2)
            .map(|c| crate::Interval::new(c[0], c[1]))
            .collect::<crate::Result<Vec<_>>>()?;
        let g = IVector::new(comps)?;
        let probes = f.domain().grid(probe_grid(opts.grid, n));
        let def = is_subgradient(&f, &x, &g, &probes)?;
        let dirs = default_directions(n, opts.dirs, opts.seed);
        let dir = is_subgradient_directional(&f, &x, &g, &dirs)?;
        let _ = writeln!(out, "probe {g}:");
        let _ = writeln!(out, "  definition: {def}");
        let _ = writeln!(out, "  directional: {dir}");
        let agree = def.is_member() == dir.is_member();
        let _ = writeln!(out, "  criteria {}", if agree { "agree" } else { "disagree" });
        let _ = writeln!(
            out,
            "#DATA probe member_definition={} member_directional={} agree={}",
            def.is_member(),
            dir.is_member(),
            agree
        );
        if !def.is_member() || !dir.is_member() {
            code = EXIT_FAILS;
        }
    }
    Ok(Outcome {
        code,
        stdout: out,
        stderr: String::new(),
    })
}

fn probe_grid(grid: usize, n: usize) -> usize {
    let mut k = grid;
    while k > 2 && (k as f64).powi(n as i32) > DEFAULT_MAX_SAMPLES as f64 {
        k -= 1;
    }
    k
}
