//! Batch driver exposing the library as subcommands with machine-readable
//! outputs.
//!
//! JSON is the canonical format; CSV is a flat projection of it (nested
//! fields are dropped, documented per subcommand). Identical arguments and
//! seed produce byte-identical output: there are no timestamps and no
//! ambient randomness. Exit codes: 0 success, 2 configuration error,
//! 3 numerical failure in a required computation. Sweeps report per-row
//! failures in a `status` column and keep going; a sweep in which every row
//! failed exits nonzero.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::Rng;
use serde::Serialize;

use crate::interp::{
    constant_f, constant_g, growth_exponent_fit, log_log_slope, monotonicity_ratio, p_prime,
    FitPoint,
};
use crate::maximal::{
    dyadic_threshold_grid, estimate_weak_orlicz_constant, maximal_lp_ratio,
    separable_strong_ratio, verify_proposition, Filtration,
};
use crate::sampling;
use crate::specmat::{
    binary_decomposition, binary_sandwich_check, corner_identity_check,
    diagonal_domination_check, singular_numbers, Element, Projection, TracialAlgebra,
};
use crate::young::{make_young, matuszewska_indices, YoungFunction, YoungSpec};
use crate::{Error, Result};

/// A Young function together with the descriptor string it was parsed
/// from, kept for labeling output rows.
#[derive(Clone, Debug)]
struct PhiArg {
    label: String,
    phi: YoungFunction,
}

fn parse_phi(s: &str) -> std::result::Result<PhiArg, String> {
    let s = s.trim();
    let (kind, param) = match s.split_once(':') {
        Some((k, v)) => (k, Some(v)),
        None => (s, None),
    };
    let spec = match (kind, param) {
        ("power", Some(v)) => YoungSpec::Power {
            p: v.parse::<f64>().map_err(|e| format!("power exponent: {e}"))?,
        },
        ("llog", Some(v)) => YoungSpec::Llog {
            alpha: v.parse::<f64>().map_err(|e| format!("llog exponent: {e}"))?,
        },
        ("chi" | "chi_infinity", None) => YoungSpec::ChiInfinity,
        ("power" | "llog", None) => return Err(format!("'{kind}' needs a parameter, e.g. {kind}:2")),
        ("chi" | "chi_infinity", Some(_)) => return Err("'chi' takes no parameter".into()),
        _ => {
            return Err(format!(
                "unknown Young descriptor '{s}' (expected power:P, llog:A, or chi)"
            ))
        }
    };
    let phi = make_young(spec).map_err(|e| e.to_string())?;
    Ok(PhiArg {
        label: s.to_string(),
        phi,
    })
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    /// Canonical nested output
    Json,
    /// Flat row projection with a fixed header
    Csv,
}

#[derive(Args, Clone, Debug)]
struct OutputArgs {
    /// Write to this file instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Parser, Debug)]
#[command(
    name = "orlicz-interp",
    version,
    about = "Interpolation constants and weak-type maximal-operator checks on tracial matrix algebras",
    propagate_version = true
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Growth-index table for a list of Young functions
    #[command(after_help = "CSV columns: phi,lower,upper,error_estimate,status")]
    Indices(IndicesArgs),
    /// Interpolation constant F over an exponent grid
    #[command(
        after_help = "CSV columns: p,p_prime,F,G,fit_exponent,status\n\
                      Single exponent + JSON: {value, argmin_k0, k_window, tail_estimate}.\n\
                      fit_exponent is the log-log slope of the constant against p' over\n\
                      the grid (blank when fewer than two rows succeed)."
    )]
    ConstantF(ConstantArgs),
    /// Interpolation constant G over an exponent grid
    #[command(
        after_help = "CSV columns: p,p_prime,F,G,fit_exponent,status\n\
                      Single exponent + JSON: {value, argmin_k0, k_window, tail_estimate}."
    )]
    ConstantG(ConstantArgs),
    /// Blow-up exponent fits of the strong-endpoint constant near p = 1
    #[command(
        after_help = "CSV columns: alpha,fit_exponent,intercept,n_points,status\n\
                      (per-point data appears only in JSON)"
    )]
    GrowthFit(GrowthFitArgs),
    /// Strong-endpoint constant ratios of two generators over an exponent grid
    #[command(
        after_help = "CSV columns: p,ratio\n\
                      (the gap-set size profile appears only in JSON)"
    )]
    Monotonicity(MonotonicityArgs),
    /// Randomized spectral lemma suite: digit decompositions, rearrangement
    /// sandwiches, pinching domination, corner reductions, norm identities
    #[command(
        after_help = "Emits a nested JSON report (JSON only). Identical seed and\n\
                      trial count give a byte-identical report."
    )]
    VerifyLemmas(VerifyLemmasArgs),
    /// Full projection-chain pipeline on a dyadic model: chain bounds,
    /// majorizer domination, rearrangement majorization, L_p bound
    #[command(
        after_help = "CSV columns: n,m,r_level,r_trace,p,eta,k0,f_constant,\n\
                      chain_compression_margin,chain_trace_factor,chain_ok,\n\
                      domination_min_eig,domination_ok,majorization_ok,z_lp_norm,\n\
                      r_lp_norm,lp_ratio,lp_bound,lp_bound_ok,head_defect,tail_trace,\n\
                      exact_witness,all_ok\n\
                      The reference projection is the half-depth dyadic cell (2D:\n\
                      rectangle) at position 0."
    )]
    VerifyProposition(VerifyPropositionArgs),
    /// Weak-type constant estimates for Dirac families over depth sweeps
    #[command(
        after_help = "CSV columns: n,m,phi,constant,exact_witness,max_lambda,status\n\
                      Each row estimates the constant on the point-mass test family of\n\
                      the depth-n (by depth-m, when --m is given) dyadic model, over a\n\
                      geometric threshold grid offset slightly below the dyadic jump\n\
                      values."
    )]
    WeakType(WeakTypeArgs),
    /// Measured L_p maximal-ratio lower bounds over an exponent grid
    #[command(
        after_help = "CSV columns: p,p_prime,ratio,slope,status\n\
                      1D uses the depth-n dyadic model; with --m the two-axis ratio is\n\
                      computed separably on the factor models. slope is the log-log\n\
                      slope of ratio against p' (blank when fewer than two rows\n\
                      succeed)."
    )]
    StrongMaximal(StrongMaximalArgs),
}

#[derive(Args, Debug)]
struct IndicesArgs {
    /// Comma-separated Young descriptors, e.g. power:2,llog:1,chi
    #[arg(long, value_delimiter = ',', required = true, value_parser = parse_phi)]
    phi: Vec<PhiArg>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct ConstantArgs {
    /// Left generator (finite everywhere)
    #[arg(long, value_parser = parse_phi)]
    phi1: PhiArg,
    /// Right generator
    #[arg(long, value_parser = parse_phi)]
    phi2: PhiArg,
    /// Comma-separated exponents, all > 1
    #[arg(long, value_delimiter = ',', required = true)]
    p: Vec<f64>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct GrowthFitArgs {
    /// Comma-separated llog exponents alpha >= 0
    #[arg(long, value_delimiter = ',', required = true)]
    alpha: Vec<f64>,
    /// Comma-separated exponents > 1 (at least two)
    #[arg(long, value_delimiter = ',', required = true)]
    p: Vec<f64>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct MonotonicityArgs {
    /// Numerator generator
    #[arg(long, value_parser = parse_phi)]
    phi1: PhiArg,
    /// Denominator generator
    #[arg(long, value_parser = parse_phi)]
    phi2: PhiArg,
    /// Comma-separated exponents, all > 1
    #[arg(long, value_delimiter = ',', required = true)]
    p: Vec<f64>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct VerifyLemmasArgs {
    /// RNG seed for instance generation
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Random instances per lemma family
    #[arg(long, default_value_t = 25)]
    trials: usize,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct VerifyPropositionArgs {
    /// First-axis dyadic depth
    #[arg(long)]
    n: u32,
    /// Second-axis dyadic depth; the model is the two-axis tensor when given
    #[arg(long)]
    m: Option<u32>,
    /// Interpolation exponent
    #[arg(long, default_value_t = 1.5)]
    p: f64,
    /// Left generator
    #[arg(long, value_parser = parse_phi, default_value = "llog:2")]
    phi1: PhiArg,
    /// Right generator
    #[arg(long, value_parser = parse_phi, default_value = "chi")]
    phi2: PhiArg,
    /// Threshold anchor, thresholds are eta * 2^{-k}
    #[arg(long, default_value_t = 1.0)]
    eta: f64,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct WeakTypeArgs {
    /// Comma-separated first-axis depths
    #[arg(long, value_delimiter = ',', required = true)]
    n: Vec<u32>,
    /// Second-axis depths: single value broadcasts over --n; omit for 1D
    #[arg(long, value_delimiter = ',')]
    m: Option<Vec<u32>>,
    /// Comma-separated Young descriptors to estimate against
    #[arg(long, value_delimiter = ',', required = true, value_parser = parse_phi)]
    phi: Vec<PhiArg>,
    /// Extra threshold levels below the bottom dyadic scale
    #[arg(long, default_value_t = 2)]
    extra_levels: u32,
    /// Relative offset keeping thresholds off exact dyadic jump values
    #[arg(long, default_value_t = 0.999)]
    offset: f64,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct StrongMaximalArgs {
    /// First-axis dyadic depth
    #[arg(long)]
    n: u32,
    /// Second-axis depth; ratios are computed separably when given
    #[arg(long)]
    m: Option<u32>,
    /// Comma-separated exponents, all > 1
    #[arg(long, value_delimiter = ',', required = true)]
    p: Vec<f64>,
    #[command(flatten)]
    output: OutputArgs,
}

/// Entry point called by the binary; returns the process exit code.
pub fn main() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.cmd) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_for(&e)
        }
    }
}

fn exit_for(e: &Error) -> i32 {
    match e {
        Error::Divergent(_) | Error::Precondition(_) => 3,
        _ => 2,
    }
}

fn status_token(e: &Error) -> &'static str {
    match e {
        Error::InvalidArgument(_) => "invalid-argument",
        Error::Unsupported(_) => "unsupported",
        Error::Divergent(_) => "divergent",
        Error::Structure(_) => "structure",
        Error::Precondition(_) => "precondition",
        Error::Config(_) => "config",
        Error::Io(_) => "io",
        Error::Serde(_) => "serde",
    }
}

fn emit(out: &Option<PathBuf>, content: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, content)?,
        None => print!("{content}"),
    }
    Ok(())
}

fn to_json<T: Serialize>(value: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

fn cell(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn check_p_grid(p: &[f64]) -> Result<()> {
    if p.is_empty() {
        return Err(Error::Config("empty exponent grid".into()));
    }
    for &v in p {
        if !v.is_finite() || v <= 1.0 {
            return Err(Error::Config(format!(
                "exponents must be finite and > 1, got {v}"
            )));
        }
    }
    Ok(())
}

/// Exit code for a finished sweep: 0 when at least one row succeeded,
/// otherwise the code of the first row error.
fn sweep_exit(ok_rows: usize, first_err: Option<&Error>) -> i32 {
    if ok_rows > 0 {
        0
    } else {
        first_err.map_or(0, exit_for)
    }
}

fn dispatch(cmd: Cmd) -> Result<i32> {
    match cmd {
        Cmd::Indices(a) => run_indices(a),
        Cmd::ConstantF(a) => run_constant(a, ConstantKind::F),
        Cmd::ConstantG(a) => run_constant(a, ConstantKind::G),
        Cmd::GrowthFit(a) => run_growth_fit(a),
        Cmd::Monotonicity(a) => run_monotonicity(a),
        Cmd::VerifyLemmas(a) => run_verify_lemmas(a),
        Cmd::VerifyProposition(a) => run_verify_proposition(a),
        Cmd::WeakType(a) => run_weak_type(a),
        Cmd::StrongMaximal(a) => run_strong_maximal(a),
    }
}

#[derive(Serialize)]
struct IndexRow {
    phi: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    lower: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    upper: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error_estimate: Option<f64>,
    status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

fn run_indices(a: IndicesArgs) -> Result<i32> {
    let mut rows = Vec::with_capacity(a.phi.len());
    let mut ok_rows = 0;
    let mut first_err: Option<Error> = None;
    for arg in &a.phi {
        match matuszewska_indices(&arg.phi) {
            Ok(ix) => {
                ok_rows += 1;
                rows.push(IndexRow {
                    phi: arg.label.clone(),
                    lower: Some(ix.lower),
                    upper: Some(ix.upper),
                    error_estimate: Some(ix.error_estimate),
                    status: "ok".into(),
                    error: None,
                });
            }
            Err(e) => {
                rows.push(IndexRow {
                    phi: arg.label.clone(),
                    lower: None,
                    upper: None,
                    error_estimate: None,
                    status: status_token(&e).into(),
                    error: Some(e.to_string()),
                });
                first_err.get_or_insert(e);
            }
        }
    }
    let content = match a.output.format {
        Format::Json => to_json(&rows)?,
        Format::Csv => {
            let mut s = String::from("phi,lower,upper,error_estimate,status\n");
            for r in &rows {
                let _ = writeln!(
                    s,
                    "{},{},{},{},{}",
                    r.phi,
                    cell(r.lower),
                    cell(r.upper),
                    cell(r.error_estimate),
                    r.status
                );
            }
            s
        }
    };
    emit(&a.output.out, &content)?;
    Ok(sweep_exit(ok_rows, first_err.as_ref()))
}

enum ConstantKind {
    F,
    G,
}

#[derive(Serialize)]
struct ConstantSweepRow {
    p: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    p_prime: Option<f64>,
    #[serde(rename = "F", skip_serializing_if = "Option::is_none")]
    f: Option<f64>,
    #[serde(rename = "G", skip_serializing_if = "Option::is_none")]
    g: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    argmin_k0: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    fit_exponent: Option<f64>,
    status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

fn run_constant(a: ConstantArgs, kind: ConstantKind) -> Result<i32> {
    check_p_grid(&a.p)?;
    let compute = |p: f64| match kind {
        ConstantKind::F => constant_f(p, &a.phi1.phi, &a.phi2.phi),
        ConstantKind::G => constant_g(p, &a.phi1.phi, &a.phi2.phi),
    };

    // single exponent: the full result object is the canonical output
    if a.p.len() == 1 && a.output.format == Format::Json {
        let r = compute(a.p[0])?;
        emit(&a.output.out, &to_json(&r)?)?;
        return Ok(0);
    }

    let mut rows = Vec::with_capacity(a.p.len());
    let mut ok_rows = 0;
    let mut first_err: Option<Error> = None;
    for &p in &a.p {
        let pp = p_prime(p).ok();
        match compute(p) {
            Ok(r) => {
                ok_rows += 1;
                let (f, g) = match kind {
                    ConstantKind::F => (Some(r.value), None),
                    ConstantKind::G => (None, Some(r.value)),
                };
                rows.push(ConstantSweepRow {
                    p,
                    p_prime: pp,
                    f,
                    g,
                    argmin_k0: Some(r.argmin_k0),
                    fit_exponent: None,
                    status: "ok".into(),
                    error: None,
                });
            }
            Err(e) => {
                rows.push(ConstantSweepRow {
                    p,
                    p_prime: pp,
                    f: None,
                    g: None,
                    argmin_k0: None,
                    fit_exponent: None,
                    status: status_token(&e).into(),
                    error: Some(e.to_string()),
                });
                first_err.get_or_insert(e);
            }
        }
    }

    // grid-wide blow-up exponent, repeated on each successful row
    let xs: Vec<f64> = rows
        .iter()
        .filter(|r| r.status == "ok")
        .filter_map(|r| r.p_prime)
        .collect();
    let ys: Vec<f64> = rows
        .iter()
        .filter(|r| r.status == "ok")
        .map(|r| r.f.or(r.g).unwrap())
        .collect();
    if xs.len() >= 2 {
        if let Ok((slope, _)) = log_log_slope(&xs, &ys) {
            for r in rows.iter_mut().filter(|r| r.status == "ok") {
                r.fit_exponent = Some(slope);
            }
        }
    }

    let content = match a.output.format {
        Format::Json => to_json(&rows)?,
        Format::Csv => {
            let mut s = String::from("p,p_prime,F,G,fit_exponent,status\n");
            for r in &rows {
                let _ = writeln!(
                    s,
                    "{},{},{},{},{},{}",
                    r.p,
                    cell(r.p_prime),
                    cell(r.f),
                    cell(r.g),
                    cell(r.fit_exponent),
                    r.status
                );
            }
            s
        }
    };
    emit(&a.output.out, &content)?;
    Ok(sweep_exit(ok_rows, first_err.as_ref()))
}

#[derive(Serialize)]
struct GrowthRow {
    alpha: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    fit_exponent: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    intercept: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    points: Option<Vec<FitPoint>>,
    status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

fn run_growth_fit(a: GrowthFitArgs) -> Result<i32> {
    check_p_grid(&a.p)?;
    if a.alpha.is_empty() {
        return Err(Error::Config("empty alpha list".into()));
    }
    let mut rows = Vec::with_capacity(a.alpha.len());
    let mut ok_rows = 0;
    let mut first_err: Option<Error> = None;
    for &alpha in &a.alpha {
        match growth_exponent_fit(alpha, &a.p) {
            Ok(fit) => {
                ok_rows += 1;
                rows.push(GrowthRow {
                    alpha,
                    fit_exponent: Some(fit.slope),
                    intercept: Some(fit.intercept),
                    points: Some(fit.points),
                    status: "ok".into(),
                    error: None,
                });
            }
            Err(e) => {
                rows.push(GrowthRow {
                    alpha,
                    fit_exponent: None,
                    intercept: None,
                    points: None,
                    status: status_token(&e).into(),
                    error: Some(e.to_string()),
                });
                first_err.get_or_insert(e);
            }
        }
    }
    let content = match a.output.format {
        Format::Json => to_json(&rows)?,
        Format::Csv => {
            let mut s = String::from("alpha,fit_exponent,intercept,n_points,status\n");
            for r in &rows {
                let _ = writeln!(
                    s,
                    "{},{},{},{},{}",
                    r.alpha,
                    cell(r.fit_exponent),
                    cell(r.intercept),
                    r.points.as_ref().map_or(String::new(), |p| p.len().to_string()),
                    r.status
                );
            }
            s
        }
    };
    emit(&a.output.out, &content)?;
    Ok(sweep_exit(ok_rows, first_err.as_ref()))
}

fn run_monotonicity(a: MonotonicityArgs) -> Result<i32> {
    check_p_grid(&a.p)?;
    let report = monotonicity_ratio(&a.p, &a.phi1.phi, &a.phi2.phi)?;
    let content = match a.output.format {
        Format::Json => to_json(&report)?,
        Format::Csv => {
            let mut s = String::from("p,ratio\n");
            for r in &report.rows {
                let _ = writeln!(s, "{},{}", r.p, r.ratio);
            }
            s
        }
    };
    emit(&a.output.out, &content)?;
    Ok(0)
}

#[derive(Serialize)]
struct DecompositionSection {
    instances: usize,
    max_residual_norm: f64,
    sandwich_alphas: Vec<f64>,
    upper_failures: usize,
    lower_failures: usize,
    all_pass: bool,
}

#[derive(Serialize)]
struct DominationSection {
    instances: usize,
    min_eigenvalue: f64,
    failures: usize,
    all_pass: bool,
}

#[derive(Serialize)]
struct CornerSection {
    instances: usize,
    failures: usize,
    all_pass: bool,
}

#[derive(Serialize)]
struct RearrangementSection {
    instances: usize,
    max_relative_gap: f64,
    all_pass: bool,
}

#[derive(Serialize)]
struct LemmaSuiteReport {
    seed: u64,
    trials: usize,
    binary_decomposition: DecompositionSection,
    diagonal_domination: DominationSection,
    corner_identity: CornerSection,
    rearrangement_norms: RearrangementSection,
    all_pass: bool,
}

fn run_verify_lemmas(a: VerifyLemmasArgs) -> Result<i32> {
    if a.output.format == Format::Csv {
        return Err(Error::Config(
            "verify-lemmas emits a nested JSON report; use --format json".into(),
        ));
    }
    if a.trials == 0 {
        return Err(Error::Config("need at least one trial".into()));
    }
    let report = lemma_suite(a.seed, a.trials)?;
    emit(&a.output.out, &to_json(&report)?)?;
    Ok(0)
}

/// Runs every lemma family on `trials` seeded random instances, alternating
/// commutative and full matrix algebras over a fixed dimension cycle.
fn lemma_suite(seed: u64, trials: usize) -> Result<LemmaSuiteReport> {
    const DIMS: [usize; 7] = [2, 3, 4, 6, 8, 12, 16];
    const SANDWICH_ALPHAS: [f64; 3] = [0.5, 1.0, 2.0];
    const SANDWICH_TOL: f64 = 1e-9;
    let mut r = sampling::rng(seed);

    let mut max_residual: f64 = 0.0;
    let mut upper_failures = 0;
    let mut lower_failures = 0;
    let mut dom_min = f64::INFINITY;
    let mut dom_failures = 0;
    let mut corner_failures = 0;
    let mut norm_gap: f64 = 0.0;

    for t in 0..trials {
        let dim = DIMS[t % DIMS.len()];
        let alg: Arc<TracialAlgebra> = if t % 2 == 0 {
            TracialAlgebra::full_matrix(dim)?
        } else {
            TracialAlgebra::commutative_uniform(dim)?
        };

        // digit decomposition and rearrangement sandwich
        let x = sampling::random_psd_with_spectrum(&alg, 0.0, 1.0, &mut r)?;
        let dec = binary_decomposition(&x, (0, 45))?;
        max_residual = max_residual.max(dec.residual_norm());
        for &alpha in &SANDWICH_ALPHAS {
            let sc = binary_sandwich_check(&x, &dec, alpha, SANDWICH_TOL)?;
            if !sc.upper_pointwise {
                upper_failures += 1;
            }
            if sc.lower_submajorized == Some(false) {
                lower_failures += 1;
            }
        }

        // weighted pinching domination (needs a positive element)
        let count = 1 + t % 3.min(dim - 1).max(1);
        let qs = sampling::random_disjoint_projections(&alg, count.min(dim), &mut r)?;
        let ds: Vec<f64> = (0..qs.len()).map(|_| r.gen_range(0.5..4.0)).collect();
        let y = sampling::random_psd_with_spectrum(&alg, 0.0, 2.0, &mut r)?;
        let rep = diagonal_domination_check(&qs, &ds, &y)?;
        dom_min = dom_min.min(rep.min_eigenvalue);
        if !rep.passes {
            dom_failures += 1;
        }

        // corner reduction on an element supported in the corner
        let e = &qs[0];
        let s = x.compress_by(e.element())?;
        if !corner_identity_check(&s, e)? {
            corner_failures += 1;
        }

        // trace-norm identities against the rearrangement
        let z = sampling::random_hermitian(&alg, &mut r)?;
        let mu = singular_numbers(&z)?;
        for &p in &[1.0, 2.0, 3.5] {
            let a_norm = z.lp_norm(p)?;
            let b_norm = mu.lp_norm(p)?;
            norm_gap = norm_gap.max((a_norm - b_norm).abs() / a_norm.max(1.0));
        }
        let a_inf = z.linf_norm();
        let b_inf = mu.lp_norm(f64::INFINITY)?;
        norm_gap = norm_gap.max((a_inf - b_inf).abs() / a_inf.max(1.0));
    }

    let decomposition = DecompositionSection {
        instances: trials,
        max_residual_norm: max_residual,
        sandwich_alphas: SANDWICH_ALPHAS.to_vec(),
        upper_failures,
        lower_failures,
        all_pass: upper_failures == 0
            && lower_failures == 0
            && max_residual <= (2.0_f64).powi(-40),
    };
    let domination = DominationSection {
        instances: trials,
        min_eigenvalue: dom_min,
        failures: dom_failures,
        all_pass: dom_failures == 0,
    };
    let corner = CornerSection {
        instances: trials,
        failures: corner_failures,
        all_pass: corner_failures == 0,
    };
    let rearrangement = RearrangementSection {
        instances: trials,
        max_relative_gap: norm_gap,
        all_pass: norm_gap <= 1e-10,
    };
    let all_pass = decomposition.all_pass
        && domination.all_pass
        && corner.all_pass
        && rearrangement.all_pass;
    Ok(LemmaSuiteReport {
        seed,
        trials,
        binary_decomposition: decomposition,
        diagonal_domination: domination,
        corner_identity: corner,
        rearrangement_norms: rearrangement,
        all_pass,
    })
}

#[derive(Serialize)]
struct PropositionOutput {
    n: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    m: Option<u32>,
    r_level: u32,
    r_trace: f64,
    all_ok: bool,
    report: crate::maximal::PropositionReport,
}

fn run_verify_proposition(a: VerifyPropositionArgs) -> Result<i32> {
    if !a.p.is_finite() || a.p <= 1.0 {
        return Err(Error::Config(format!(
            "exponent must be finite and > 1, got {}",
            a.p
        )));
    }
    if !a.eta.is_finite() || a.eta <= 0.0 {
        return Err(Error::Config(format!(
            "eta must be finite and > 0, got {}",
            a.eta
        )));
    }
    let level = |depth: u32| depth.div_ceil(2);
    let (f, r) = match a.m {
        None => {
            let f = Filtration::dyadic_commutative(a.n)?;
            let r = sampling::dyadic_interval_indicator(f.algebra(), a.n, level(a.n), 0)?;
            (f, r)
        }
        Some(m) => {
            let f1 = Filtration::dyadic_commutative(a.n)?;
            let f2 = Filtration::dyadic_commutative(m)?;
            let f = Filtration::tensor(&f1, &f2)?;
            let u = sampling::dyadic_interval_indicator(f1.algebra(), a.n, level(a.n), 0)?;
            let v = sampling::dyadic_interval_indicator(f2.algebra(), m, level(m), 0)?;
            let rect = f.tensor_element(u.element(), v.element())?;
            (f, Projection::try_new(rect)?)
        }
    };
    let r_trace = r.trace();
    let report = verify_proposition(&f, &r, a.p, &a.phi1.phi, &a.phi2.phi, a.eta)?;
    let out = PropositionOutput {
        n: a.n,
        m: a.m,
        r_level: level(a.n),
        r_trace,
        all_ok: report.all_ok(),
        report,
    };
    let content = match a.output.format {
        Format::Json => to_json(&out)?,
        Format::Csv => {
            let rep = &out.report;
            let mut s = String::from(
                "n,m,r_level,r_trace,p,eta,k0,f_constant,chain_compression_margin,\
                 chain_trace_factor,chain_ok,domination_min_eig,domination_ok,\
                 majorization_ok,z_lp_norm,r_lp_norm,lp_ratio,lp_bound,lp_bound_ok,\
                 head_defect,tail_trace,exact_witness,all_ok\n",
            );
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                out.n,
                out.m.map_or(String::new(), |m| m.to_string()),
                out.r_level,
                out.r_trace,
                rep.p,
                rep.eta,
                rep.k0,
                rep.f_constant,
                rep.chain_compression_margin,
                rep.chain_trace_factor,
                rep.chain_ok,
                rep.domination_min_eig,
                rep.domination_ok,
                rep.majorization_ok,
                rep.z_lp_norm,
                rep.r_lp_norm,
                rep.lp_ratio,
                rep.lp_bound,
                rep.lp_bound_ok,
                rep.head_defect,
                rep.tail_trace,
                rep.exact_witness,
                out.all_ok
            );
            s
        }
    };
    emit(&a.output.out, &content)?;
    Ok(0)
}

#[derive(Serialize)]
struct WeakTypeRow {
    n: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    m: Option<u32>,
    phi: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    constant: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    exact_witness: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    max_lambda: Option<f64>,
    status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

fn run_weak_type(a: WeakTypeArgs) -> Result<i32> {
    if a.n.is_empty() || a.phi.is_empty() {
        return Err(Error::Config("empty depth or descriptor list".into()));
    }
    let ms: Vec<Option<u32>> = match &a.m {
        None => vec![None; a.n.len()],
        Some(list) if list.len() == 1 => vec![Some(list[0]); a.n.len()],
        Some(list) if list.len() == a.n.len() => list.iter().copied().map(Some).collect(),
        Some(list) => {
            return Err(Error::Config(format!(
                "--m needs 1 or {} values, got {}",
                a.n.len(),
                list.len()
            )))
        }
    };
    if !(a.offset > 0.0) || !a.offset.is_finite() {
        return Err(Error::Config("offset must be positive and finite".into()));
    }

    let mut rows = Vec::new();
    let mut ok_rows = 0;
    let mut first_err: Option<Error> = None;
    for (&n, &m) in a.n.iter().zip(&ms) {
        let built: Result<(Filtration, Vec<f64>)> = (|| {
            let f = match m {
                None => Filtration::dyadic_commutative(n)?,
                Some(m) => {
                    let f1 = Filtration::dyadic_commutative(n)?;
                    let f2 = Filtration::dyadic_commutative(m)?;
                    Filtration::tensor(&f1, &f2)?
                }
            };
            let scale = f.algebra().dim() as f64;
            let count = (n + m.unwrap_or(0) + a.extra_levels + 1) as usize;
            let grid = dyadic_threshold_grid(scale, count, a.offset)?;
            Ok((f, grid))
        })();
        match built {
            Ok((f, grid)) => {
                let alg = f.algebra().clone();
                let x = sampling::dirac_element(&alg, 0, alg.dim() as f64)?;
                for phi in &a.phi {
                    match estimate_weak_orlicz_constant(&f, &phi.phi, &[x.clone()], &grid) {
                        Ok(est) => {
                            ok_rows += 1;
                            rows.push(WeakTypeRow {
                                n,
                                m,
                                phi: phi.label.clone(),
                                constant: Some(est.constant),
                                exact_witness: Some(est.exact_witness),
                                max_lambda: Some(est.max_lambda),
                                status: "ok".into(),
                                error: None,
                            });
                        }
                        Err(e) => {
                            rows.push(WeakTypeRow {
                                n,
                                m,
                                phi: phi.label.clone(),
                                constant: None,
                                exact_witness: None,
                                max_lambda: None,
                                status: status_token(&e).into(),
                                error: Some(e.to_string()),
                            });
                            first_err.get_or_insert(e);
                        }
                    }
                }
            }
            Err(e) => {
                for phi in &a.phi {
                    rows.push(WeakTypeRow {
                        n,
                        m,
                        phi: phi.label.clone(),
                        constant: None,
                        exact_witness: None,
                        max_lambda: None,
                        status: status_token(&e).into(),
                        error: Some(e.to_string()),
                    });
                }
                first_err.get_or_insert(e);
            }
        }
    }

    let content = match a.output.format {
        Format::Json => to_json(&rows)?,
        Format::Csv => {
            let mut s = String::from("n,m,phi,constant,exact_witness,max_lambda,status\n");
            for r in &rows {
                let _ = writeln!(
                    s,
                    "{},{},{},{},{},{},{}",
                    r.n,
                    r.m.map_or(String::new(), |m| m.to_string()),
                    r.phi,
                    cell(r.constant),
                    r.exact_witness.map_or(String::new(), |b| b.to_string()),
                    cell(r.max_lambda),
                    r.status
                );
            }
            s
        }
    };
    emit(&a.output.out, &content)?;
    Ok(sweep_exit(ok_rows, first_err.as_ref()))
}

#[derive(Serialize)]
struct StrongMaximalRow {
    p: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    p_prime: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    ratio: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    slope: Option<f64>,
    status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

fn run_strong_maximal(a: StrongMaximalArgs) -> Result<i32> {
    check_p_grid(&a.p)?;
    enum Model {
        OneAxis(Filtration, Vec<Element>),
        Separable(Filtration, Filtration, Element, Element),
    }
    let model = match a.m {
        None => {
            let f = Filtration::dyadic_commutative(a.n)?;
            let alg = f.algebra().clone();
            let x = sampling::dirac_element(&alg, 0, alg.dim() as f64)?;
            Model::OneAxis(f, vec![x])
        }
        Some(m) => {
            let f1 = Filtration::dyadic_commutative(a.n)?;
            let f2 = Filtration::dyadic_commutative(m)?;
            let u = sampling::dirac_element(f1.algebra(), 0, f1.algebra().dim() as f64)?;
            let v = sampling::dirac_element(f2.algebra(), 0, f2.algebra().dim() as f64)?;
            Model::Separable(f1, f2, u, v)
        }
    };

    let mut rows = Vec::with_capacity(a.p.len());
    let mut ok_rows = 0;
    let mut first_err: Option<Error> = None;
    for &p in &a.p {
        let pp = p_prime(p).ok();
        let ratio = match &model {
            Model::OneAxis(f, tests) => maximal_lp_ratio(f, p, tests).map(|r| r.best_ratio),
            Model::Separable(f1, f2, u, v) => separable_strong_ratio(f1, f2, p, u, v),
        };
        match ratio {
            Ok(v) => {
                ok_rows += 1;
                rows.push(StrongMaximalRow {
                    p,
                    p_prime: pp,
                    ratio: Some(v),
                    slope: None,
                    status: "ok".into(),
                    error: None,
                });
            }
            Err(e) => {
                rows.push(StrongMaximalRow {
                    p,
                    p_prime: pp,
                    ratio: None,
                    slope: None,
                    status: status_token(&e).into(),
                    error: Some(e.to_string()),
                });
                first_err.get_or_insert(e);
            }
        }
    }

    let xs: Vec<f64> = rows
        .iter()
        .filter(|r| r.status == "ok")
        .filter_map(|r| r.p_prime)
        .collect();
    let ys: Vec<f64> = rows
        .iter()
        .filter(|r| r.status == "ok")
        .filter_map(|r| r.ratio)
        .collect();
    if xs.len() >= 2 {
        if let Ok((slope, _)) = log_log_slope(&xs, &ys) {
            for r in rows.iter_mut().filter(|r| r.status == "ok") {
                r.slope = Some(slope);
            }
        }
    }

    let content = match a.output.format {
        Format::Json => to_json(&rows)?,
        Format::Csv => {
            let mut s = String::from("p,p_prime,ratio,slope,status\n");
            for r in &rows {
                let _ = writeln!(
                    s,
                    "{},{},{},{},{}",
                    r.p,
                    cell(r.p_prime),
                    cell(r.ratio),
                    cell(r.slope),
                    r.status
                );
            }
            s
        }
    };
    emit(&a.output.out, &content)?;
    Ok(sweep_exit(ok_rows, first_err.as_ref()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phi_parsing() {
        assert!(parse_phi("power:2").is_ok());
        assert!(parse_phi("llog:1.5").is_ok());
        assert!(parse_phi("chi").is_ok());
        assert!(parse_phi("chi_infinity").is_ok());
        assert!(parse_phi("power").is_err());
        assert!(parse_phi("chi:1").is_err());
        assert!(parse_phi("exp:1").is_err());
        assert!(parse_phi("power:-3").is_err());
    }

    #[test]
    fn lemma_suite_is_deterministic_and_passes() {
        let a = lemma_suite(7, 6).unwrap();
        let b = lemma_suite(7, 6).unwrap();
        assert!(a.all_pass, "suite failed: {}", to_json(&a).unwrap());
        assert_eq!(to_json(&a).unwrap(), to_json(&b).unwrap());
        // a different seed changes the witnessed extrema
        let c = lemma_suite(8, 6).unwrap();
        assert!(c.all_pass);
        assert_ne!(
            to_json(&a).unwrap(),
            to_json(&c).unwrap(),
            "distinct seeds should sample distinct instances"
        );
    }

    #[test]
    fn sweep_exit_codes() {
        assert_eq!(sweep_exit(3, None), 0);
        assert_eq!(
            sweep_exit(1, Some(&Error::Divergent("x".into()))),
            0
        );
        assert_eq!(
            sweep_exit(0, Some(&Error::Divergent("x".into()))),
            3
        );
        assert_eq!(
            sweep_exit(0, Some(&Error::InvalidArgument("x".into()))),
            2
        );
    }
}
