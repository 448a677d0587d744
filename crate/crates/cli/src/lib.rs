//! Argument parsing and dispatch for the `emknot` binary.

// `!(x < y)` also catches NaN metrics and parameters.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use emknot::calculus::{maxwell_residual, DiffMethod};
use emknot::helicity::{compute_helicities, conservation_sweep, HelicityOptions};
use emknot::lines::{gauss_linking, trace_leaf, trace_line, FieldKind, FieldLine, LeafKind, TraceParams};
use emknot::maps::{s3_simp_residuals, s3_xk_inner, HopfIndex, HopfScalar, S3Point};
use emknot::observer::classify;
use emknot::solutions::{by_name, duality_residual, FieldSolution};
use emknot::{invariants, Error, Event, VERSION};

/// Exit status for passing runs.
pub const EXIT_PASS: i32 = 0;
/// Exit status when a requested check fails.
pub const EXIT_FAIL: i32 = 1;
/// Exit status for malformed invocations.
pub const EXIT_USAGE: i32 = 2;

pub const MAXWELL_TOL: f64 = 1e-6;
pub const DUALITY_TOL: f64 = 1e-8;
pub const SIMPLICITY_TOL: f64 = 1e-10;
pub const CLASSIFY_TOL: f64 = 1e-9;
pub const DRIFT_TOL: f64 = 0.02;
pub const LEAF_DEVIATION_TOL: f64 = 1e-5;
pub const S3_INNER_TOL: f64 = 1e-8;
pub const S3_SIMP_TOL: f64 = 1e-9;
/// `|u4|` lower bound for random S^3 samples.
pub const S3_U4_MIN: f64 = 0.1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum SolutionName {
    Coulomb,
    PlaneWave,
    Hopf,
}

impl SolutionName {
    fn as_str(self) -> &'static str {
        match self {
            SolutionName::Coulomb => "coulomb",
            SolutionName::PlaneWave => "plane-wave",
            SolutionName::Hopf => "hopf",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Which {
    E,
    B,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Tracked {
    Phi,
    Theta,
    Psi,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Leaf {
    Magnetic,
    Electric,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Subcommand)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    /// Maxwell, duality and simplicity residuals over a random sample box.
    Validate,
    /// Invariant signs and class labels at sampled events.
    Classify,
    /// Field lines through the seed points, written as CSV.
    Trace,
    /// Leaf mesh through the first seed point, written as JSON.
    Leaf,
    /// Gauss linking number of two CSV polylines.
    Linking,
    /// Slice helicities, optionally across several times.
    Helicity,
    /// Orthonormality and wedge identities of the S^3 forms.
    S3check,
}

/// Resolved configuration, recorded verbatim in every report.
#[derive(Clone, Debug, Parser, Serialize)]
#[command(
    name = "emknot",
    version,
    about = "Validation and analysis of knotted vacuum Maxwell fields"
)]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,
    #[arg(long, global = true, value_enum, default_value = "hopf")]
    pub solution: SolutionName,
    /// Coulomb charge.
    #[arg(long, global = true, default_value_t = 1.0)]
    pub e: f64,
    /// Plane-wave amplitude.
    #[arg(long, global = true, default_value_t = 1.0)]
    pub e0: f64,
    /// Plane-wave wavenumber.
    #[arg(long, global = true, default_value_t = 1.0)]
    pub k: f64,
    /// Time slice.
    #[arg(long, global = true, default_value_t = 0.0, allow_negative_numbers = true)]
    pub t: f64,
    /// Comma-separated slice times for the conservation sweep.
    #[arg(long, global = true, value_delimiter = ',', allow_negative_numbers = true)]
    pub times: Vec<f64>,
    #[arg(long, global = true, default_value_t = 1000)]
    pub samples: usize,
    /// Half-width of the sampling box `[-box, box]^4`.
    #[arg(long = "box", global = true, default_value_t = 3.0)]
    #[serde(rename = "box")]
    pub box_half: f64,
    /// Spatial seed `x,y,z`; repeatable.
    #[arg(long = "seed-point", global = true, value_parser = parse_point, allow_hyphen_values = true)]
    pub seed_point: Vec<[f64; 3]>,
    /// Gauss-Legendre nodes per axis.
    #[arg(long, global = true, default_value_t = 64)]
    pub nodes: usize,
    /// Domain scale of the tangent substitution.
    #[arg(long = "L", global = true, default_value_t = 1.0)]
    #[serde(rename = "l")]
    pub l: f64,
    #[arg(long = "rng-seed", global = true, default_value_t = 0)]
    pub rng_seed: u64,
    /// Output file (JSON report, or CSV for `trace`); stdout when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// First polyline for `linking`.
    #[arg(long, global = true)]
    pub a: Option<PathBuf>,
    /// Second polyline for `linking`.
    #[arg(long, global = true)]
    pub b: Option<PathBuf>,
    /// Field traced by `trace`.
    #[arg(long, global = true, value_enum, default_value = "b")]
    pub which: Which,
    /// Kernel distribution integrated by `leaf`.
    #[arg(long = "leaf-kind", global = true, value_enum, default_value = "magnetic")]
    pub leaf_kind: Leaf,
    /// Mesh size per direction for `leaf`.
    #[arg(long, global = true, default_value_t = 100)]
    pub steps: usize,
    /// Mesh step for `leaf`.
    #[arg(long, global = true, default_value_t = 1e-3)]
    pub h: f64,
    /// Scalar whose constancy `leaf` reports.
    #[arg(long, global = true, value_enum)]
    pub track: Option<Tracked>,
    /// Integrator step bound for `trace`.
    #[arg(long = "arc-step", global = true, default_value_t = 0.01)]
    pub arc_step: f64,
    /// `trace` fails unless every line closes.
    #[arg(long = "require-closed", global = true)]
    pub require_closed: bool,
    /// `helicity` also recomputes at twice the nodes.
    #[arg(long = "check-convergence", global = true)]
    pub check_convergence: bool,
}

fn parse_point(s: &str) -> Result<[f64; 3], String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(format!("expected x,y,z but got `{s}`"));
    }
    let mut out = [0.0; 3];
    for (o, p) in out.iter_mut().zip(&parts) {
        *o = p.parse().map_err(|e| format!("`{p}`: {e}"))?;
    }
    Ok(out)
}

/// Result of one subcommand before serialization.
struct Outcome {
    result: Value,
    failures: Vec<String>,
    /// Text artifact written in place of the JSON report (`trace`).
    artifacts: Vec<(PathBuf, String)>,
}

/// Failure categories mapped to exit codes.
enum RunError {
    Usage(String),
    Check(String),
}

impl From<Error> for RunError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParameter(_) | Error::Io(_) => RunError::Usage(e.to_string()),
            other => RunError::Check(other.to_string()),
        }
    }
}

#[derive(Serialize)]
struct Report<'a> {
    version: &'a str,
    config: &'a RunConfig,
    pass: bool,
    failures: &'a [String],
    result: &'a Value,
}

/// Parses `argv` (including the program name), runs the command and writes
/// its report. Returns the process exit code.
pub fn run<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cfg = match RunConfig::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_PASS };
            let text = e.render().to_string();
            let _ = if code == EXIT_PASS {
                write!(stdout, "{text}")
            } else {
                write!(stderr, "{text}")
            };
            return code;
        }
    };
    match execute(&cfg) {
        Ok(outcome) => match emit(&cfg, &outcome, stdout) {
            Ok(()) => {
                for f in &outcome.failures {
                    let _ = writeln!(stderr, "check failed: {f}");
                }
                if outcome.failures.is_empty() {
                    EXIT_PASS
                } else {
                    EXIT_FAIL
                }
            }
            Err(e) => {
                let _ = writeln!(stderr, "error: {e}");
                EXIT_USAGE
            }
        },
        Err(RunError::Usage(m)) => {
            let _ = writeln!(stderr, "error: {m}");
            EXIT_USAGE
        }
        Err(RunError::Check(m)) => {
            let _ = writeln!(stderr, "check failed: {m}");
            EXIT_FAIL
        }
    }
}

fn emit(cfg: &RunConfig, outcome: &Outcome, stdout: &mut dyn Write) -> std::io::Result<()> {
    for (path, text) in &outcome.artifacts {
        std::fs::write(path, text)?;
    }
    let report = Report {
        version: VERSION,
        config: cfg,
        pass: outcome.failures.is_empty(),
        failures: &outcome.failures,
        result: &outcome.result,
    };
    let mut text = serde_json::to_string_pretty(&report).map_err(std::io::Error::other)?;
    text.push('\n');
    match (&cfg.out, cfg.command) {
        (Some(path), c) if c != Command::Trace => std::fs::write(path, text),
        _ => stdout.write_all(text.as_bytes()),
    }
}

fn solution(cfg: &RunConfig) -> Result<FieldSolution, RunError> {
    Ok(by_name(cfg.solution.as_str(), cfg.e, cfg.e0, cfg.k)?)
}

fn check(failures: &mut Vec<String>, metric: &str, value: f64, limit: f64) {
    if !(value < limit) {
        failures.push(format!("{metric} = {value:e} (limit {limit:e})"));
    }
}

/// Random events in the box, skipping the solution's singular set.
fn sample_events(cfg: &RunConfig, s: &FieldSolution) -> Vec<Event> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    let b = cfg.box_half;
    let mut out = Vec::with_capacity(cfg.samples);
    while out.len() < cfg.samples {
        let p = Event::from_array([0; 4].map(|_| rng.random_range(-b..=b)));
        if !s.singular_set.contains(&p) {
            out.push(p);
        }
    }
    out
}

fn execute(cfg: &RunConfig) -> Result<Outcome, RunError> {
    if !(cfg.box_half > 0.0) {
        return Err(RunError::Usage("--box must be positive".into()));
    }
    match cfg.command {
        Command::Validate => validate(cfg),
        Command::Classify => classify_cmd(cfg),
        Command::Trace => trace(cfg),
        Command::Leaf => leaf(cfg),
        Command::Linking => linking(cfg),
        Command::Helicity => helicity(cfg),
        Command::S3check => s3check(cfg),
    }
}

fn validate(cfg: &RunConfig) -> Result<Outcome, RunError> {
    let s = solution(cfg)?;
    let samples = sample_events(cfg, &s);
    let residual = maxwell_residual(&s, &samples, DiffMethod::Ad)?;
    let (mut max_duality, mut max_phi) = (0.0f64, 0.0f64);
    for p in &samples {
        let f = match s.f(p) {
            Ok(f) => f,
            Err(Error::Singularity(_)) => continue,
            Err(e) => return Err(e.into()),
        };
        max_duality = max_duality.max(duality_residual(&s, p)?);
        let n2 = f.norm_sq();
        if n2 > 0.0 {
            max_phi = max_phi.max(invariants(&f).phi.abs() / n2);
        }
    }
    let mut failures = Vec::new();
    check(&mut failures, "max_df", residual.max_df, MAXWELL_TOL);
    check(&mut failures, "max_dfdual", residual.max_dfdual, MAXWELL_TOL);
    check(&mut failures, "max_duality_residual", max_duality, DUALITY_TOL);
    check(&mut failures, "max_relative_phi", max_phi, SIMPLICITY_TOL);
    let result = json!({
        "solution": s.name,
        "max_df": residual.max_df,
        "max_dfdual": residual.max_dfdual,
        "sample_count": residual.sample_count,
        "skipped": residual.skipped,
        "method": "ad",
        "max_duality_residual": max_duality,
        "max_relative_phi": max_phi,
    });
    Ok(Outcome {
        result,
        failures,
        artifacts: vec![],
    })
}

fn classify_cmd(cfg: &RunConfig) -> Result<Outcome, RunError> {
    let s = solution(cfg)?;
    let mut events: Vec<Event> = cfg
        .seed_point
        .iter()
        .map(|p| Event::new(cfg.t, p[0], p[1], p[2]))
        .collect();
    if events.is_empty() {
        events = sample_events(cfg, &s);
    }
    let mut counts = std::collections::BTreeMap::<&'static str, usize>::new();
    let mut points = Vec::new();
    let mut failures = Vec::new();
    let mut mismatches = 0usize;
    for p in &events {
        let f = s.f(p)?;
        let inv = invariants(&f);
        let class = match classify(&f, CLASSIFY_TOL) {
            Ok(c) => c.label(),
            Err(Error::ZeroForm) => "zero",
            Err(e) => return Err(e.into()),
        };
        *counts.entry(class).or_default() += 1;
        if let Some(exp) = s.expected_class {
            if class != exp.label() && class != "zero" {
                mismatches += 1;
            }
        }
        if !cfg.seed_point.is_empty() {
            points.push(json!({"event": p, "psi": inv.psi, "phi": inv.phi, "class": class}));
        }
    }
    if mismatches > 0 {
        failures.push(format!("class_mismatches = {mismatches}"));
    }
    let result = json!({
        "solution": s.name,
        "expected_class": s.expected_class.map(|c| c.label()),
        "counts": counts,
        "class_mismatches": mismatches,
        "points": points,
    });
    Ok(Outcome {
        result,
        failures,
        artifacts: vec![],
    })
}

fn trace_params(cfg: &RunConfig) -> TraceParams {
    TraceParams {
        arc_step: cfg.arc_step,
        ..TraceParams::default()
    }
}

/// `out.csv` for one line, `out-<i>.csv` for several.
fn csv_paths(out: Option<&Path>, n: usize) -> Vec<PathBuf> {
    let base = out.map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from("line.csv"));
    if n == 1 {
        return vec![base];
    }
    let stem = base.with_extension("");
    (0..n)
        .map(|i| PathBuf::from(format!("{}-{i}.csv", stem.display())))
        .collect()
}

fn trace(cfg: &RunConfig) -> Result<Outcome, RunError> {
    let s = solution(cfg)?;
    if cfg.seed_point.is_empty() {
        return Err(RunError::Usage("trace needs at least one --seed-point".into()));
    }
    let which = match cfg.which {
        Which::E => FieldKind::Electric,
        Which::B => FieldKind::Magnetic,
    };
    let params = trace_params(cfg);
    let paths = csv_paths(cfg.out.as_deref(), cfg.seed_point.len());
    let mut artifacts = Vec::new();
    let mut lines = Vec::new();
    let mut failures = Vec::new();
    for (seed, path) in cfg.seed_point.iter().zip(paths) {
        let line = trace_line(&s, which, cfg.t, *seed, &params)?;
        if cfg.require_closed && !line.closed {
            failures.push(format!("closed = false for seed {seed:?} ({:?})", line.termination));
        }
        lines.push(json!({
            "seed": seed,
            "csv": path,
            "points": line.points.len(),
            "length": line.length(),
            "closed": line.closed,
            "termination": line.termination,
        }));
        artifacts.push((path, line.to_csv_string()?));
    }
    Ok(Outcome {
        result: json!({"solution": s.name, "lines": lines}),
        failures,
        artifacts,
    })
}

fn leaf(cfg: &RunConfig) -> Result<Outcome, RunError> {
    let s = solution(cfg)?;
    let seed = cfg.seed_point.first().copied().unwrap_or([0.0; 3]);
    let seed = Event::new(cfg.t, seed[0], seed[1], seed[2]);
    let kind = match cfg.leaf_kind {
        Leaf::Magnetic => LeafKind::Magnetic,
        Leaf::Electric => LeafKind::Electric,
    };
    let tracked = cfg.track.map(|t| match t {
        Tracked::Phi => HopfScalar::Phi,
        Tracked::Theta => HopfScalar::Theta,
        Tracked::Psi => HopfScalar::Psi,
    });
    let mesh = trace_leaf(&s, kind, &seed, (cfg.steps, cfg.steps), cfg.h, tracked)?;
    let mut failures = Vec::new();
    if let Some(d) = mesh.scalar_deviation {
        check(&mut failures, "scalar_deviation", d, LEAF_DEVIATION_TOL);
    }
    let mesh_json = serde_json::to_value(&mesh).map_err(Error::from)?;
    Ok(Outcome {
        result: json!({"solution": s.name, "mesh": mesh_json}),
        failures,
        artifacts: vec![],
    })
}

fn linking(cfg: &RunConfig) -> Result<Outcome, RunError> {
    let (Some(a), Some(b)) = (&cfg.a, &cfg.b) else {
        return Err(RunError::Usage("linking needs --a and --b".into()));
    };
    let la = FieldLine::read_csv(a)?;
    let lb = FieldLine::read_csv(b)?;
    let l = gauss_linking(&la, &lb)?;
    let mut failures = Vec::new();
    if l.flagged {
        failures.push(format!("linking_raw = {} is not near an integer", l.raw));
    }
    Ok(Outcome {
        result: json!({"linking": l.nearest, "raw": l.raw, "flagged": l.flagged}),
        failures,
        artifacts: vec![],
    })
}

fn helicity(cfg: &RunConfig) -> Result<Outcome, RunError> {
    let s = solution(cfg)?;
    let opts = HelicityOptions {
        check_convergence: cfg.check_convergence,
        ..Default::default()
    };
    let mut failures = Vec::new();
    let result = if cfg.times.is_empty() {
        let r = compute_helicities(&s, cfg.t, cfg.nodes, cfg.l, &opts)?;
        serde_json::to_value(r).map_err(Error::from)?
    } else {
        let (reports, drift) = conservation_sweep(&s, &cfg.times, cfg.nodes, cfg.l, &opts)?;
        check(&mut failures, "drift", drift, DRIFT_TOL);
        json!({"reports": reports, "drift": drift})
    };
    Ok(Outcome {
        result,
        failures,
        artifacts: vec![],
    })
}

fn random_s3(rng: &mut ChaCha8Rng) -> S3Point {
    loop {
        let v = [0; 4].map(|_| rng.random_range(-1.0..=1.0f64));
        let n = v.iter().map(|c| c * c).sum::<f64>().sqrt();
        if (0.1..=1.0).contains(&n) {
            let u = v.map(|c| c / n);
            if u[3].abs() > S3_U4_MIN {
                return S3Point(u);
            }
        }
    }
}

fn s3check(cfg: &RunConfig) -> Result<Outcome, RunError> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    let (mut max_inner, mut max_simp) = (0.0f64, 0.0f64);
    let target = 1.0 / (std::f64::consts::PI * std::f64::consts::PI);
    for _ in 0..cfg.samples {
        let u = random_s3(&mut rng);
        for i in HopfIndex::ALL {
            for j in HopfIndex::ALL {
                let expect = if i == j { target } else { 0.0 };
                max_inner = max_inner.max((s3_xk_inner(i, j, &u)? - expect).abs());
            }
        }
        let (r1, r2) = s3_simp_residuals(&u)?;
        max_simp = max_simp.max(r1).max(r2);
    }
    let mut failures = Vec::new();
    check(&mut failures, "max_inner_residual", max_inner, S3_INNER_TOL);
    check(&mut failures, "max_simp_residual", max_simp, S3_SIMP_TOL);
    let result = json!({"samples": cfg.samples, "max_inner_residual": max_inner, "max_simp_residual": max_simp});
    Ok(Outcome {
        result,
        failures,
        artifacts: vec![],
    })
}
