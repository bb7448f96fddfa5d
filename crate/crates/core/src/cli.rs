//! The `hardy` command line: constant tables, quadrature verification,
//! certificate optimization and sharpness sweeps, as CSV or JSON Lines.
//!
//! JSON output starts with a manifest line followed by one object per row.
//! CSV output carries a header row; its manifest goes to `<out>.manifest.json`
//! or to stderr. Floats are written with 17 significant digits.
//!
//! Exit codes: 0 success, 1 a check failed, 2 usage error or refused input.

use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::constants::{rellich_mitidieri, weighted_classical_hardy, FunctionClass, Params};
use crate::error::{Error, Result};
use crate::minimax::{numeric_minimax, CertificateProblem, SearchConfig};
use crate::polynomials::AngularFactor;
use crate::quadrature::{rayleigh_quotient, sharpness_row, Functional, Method, QuadratureConfig};
use crate::trials::{gaussian_trial, hardy_near_extremal_family, sharpness_family, TrialFunction};

pub const SCHEMA_VERSION: u32 = 1;

/// Largest tolerated gap between the numeric and closed-form optimum.
pub const MINIMAX_GAP_TOL: f64 = 1e-5;

#[derive(Debug, Parser)]
#[command(
    name = "hardy",
    version,
    about = "Hardy and Rellich constants for antisymmetric and odd functions"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tabulate closed-form constants over a grid
    Constants(ConstantsArgs),
    /// Estimate Rayleigh quotients of trial functions by quadrature
    Verify(VerifyArgs),
    /// Recover the constants by the certificate max-min
    Minimax(MinimaxArgs),
    /// Sweep the near-extremal families over ε and δ
    Sharpness(SharpnessArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassArg {
    Antisym,
    Odd,
    General,
    All,
}

impl ClassArg {
    fn classes(self) -> Vec<FunctionClass> {
        match self {
            Self::Antisym => vec![FunctionClass::Antisymmetric],
            Self::Odd => vec![FunctionClass::Odd],
            Self::General => vec![FunctionClass::General],
            Self::All => vec![FunctionClass::General, FunctionClass::Antisymmetric, FunctionClass::Odd],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FunctionalArg {
    Hardy,
    Rellich,
    All,
}

impl FunctionalArg {
    fn functionals(self) -> Vec<Functional> {
        match self {
            Self::Hardy => vec![Functional::Hardy],
            Self::Rellich => vec![Functional::Rellich],
            Self::All => vec![Functional::Hardy, Functional::Rellich],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TrialArg {
    Gaussian,
    Sharpness,
    NearExtremal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodArg {
    Mc,
    Product,
    Factorized,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    /// Output file (stdout when absent)
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Record wall-clock time in the manifest (breaks byte-identical reruns)
    #[arg(long)]
    pub record_timing: bool,
}

#[derive(Debug, Args)]
pub struct ConstantsArgs {
    /// Dimensions: `3`, `2,3,5` or `2..5`
    #[arg(long, default_value = "2..5")]
    pub d: String,
    #[arg(long, default_value = "2")]
    pub p: String,
    #[arg(long, default_value = "0")]
    pub gamma: String,
    #[arg(long, value_enum, default_value = "all")]
    pub class: ClassArg,
    #[arg(long, value_enum, default_value = "all")]
    pub functional: FunctionalArg,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, default_value = "2")]
    pub d: String,
    #[arg(long, default_value = "2")]
    pub p: String,
    #[arg(long, default_value = "0")]
    pub gamma: String,
    #[arg(long, value_enum, default_value = "antisym")]
    pub class: ClassArg,
    #[arg(long, value_enum, default_value = "hardy")]
    pub functional: FunctionalArg,
    #[arg(long, value_enum, default_value = "gaussian")]
    pub trial: TrialArg,
    /// Width of the Gaussian profile
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    /// Exponent gap of the power families
    #[arg(long, default_value_t = 0.1)]
    pub epsilon: f64,
    /// Collar half-width of the power families
    #[arg(long, default_value_t = 0.02)]
    pub delta: f64,
    #[arg(long, value_enum, default_value = "mc")]
    pub method: MethodArg,
    /// Monte Carlo samples; accepts `1e6`
    #[arg(long, default_value = "1e6")]
    pub samples: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct MinimaxArgs {
    #[arg(long, default_value = "2")]
    pub d: String,
    #[arg(long, default_value = "4")]
    pub p: String,
    #[arg(long, default_value = "0")]
    pub gamma: String,
    #[arg(long, value_enum, default_value = "antisym")]
    pub class: ClassArg,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SharpnessArgs {
    #[arg(long, default_value = "3")]
    pub d: String,
    #[arg(long, value_enum, default_value = "rellich")]
    pub functional: FunctionalArg,
    #[arg(long, value_enum, default_value = "antisym")]
    pub class: ClassArg,
    #[arg(long, default_value = "0.2,0.1,0.05")]
    pub epsilon: String,
    #[arg(long, default_value = "0.05,0.02,0.01")]
    pub delta: String,
    #[command(flatten)]
    pub output: OutputArgs,
}

// ---------------------------------------------------------------------------
// Argument parsing
// ---------------------------------------------------------------------------

/// `3`, `2,3,5`, `2..5` (inclusive) or combinations such as `1,3..4`.
pub fn parse_dims(s: &str) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        if let Some((a, b)) = part.split_once("..") {
            let a: usize = a
                .trim()
                .parse()
                .map_err(|_| Error::Usage(format!("bad range `{part}`")))?;
            let b: usize = b
                .trim()
                .parse()
                .map_err(|_| Error::Usage(format!("bad range `{part}`")))?;
            out.extend(a..=b);
        } else {
            out.push(
                part.parse()
                    .map_err(|_| Error::Usage(format!("bad dimension `{part}`")))?,
            );
        }
    }
    if out.is_empty() {
        return Err(Error::Usage(format!("empty dimension grid `{s}`")));
    }
    Ok(out)
}

pub fn parse_reals(s: &str) -> Result<Vec<f64>> {
    let out: Vec<f64> = s
        .split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|p| p.parse::<f64>().map_err(|_| Error::Usage(format!("bad number `{p}`"))))
        .collect::<Result<_>>()?;
    if out.is_empty() {
        return Err(Error::Usage(format!("empty grid `{s}`")));
    }
    Ok(out)
}

/// Integer sample count, accepting scientific notation.
pub fn parse_samples(s: &str) -> Result<u64> {
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|_| Error::Usage(format!("bad sample count `{s}`")))?;
    if !(v >= 1.0) || v.fract() != 0.0 || v > u64::MAX as f64 {
        return Err(Error::Usage(format!(
            "sample count must be a positive integer (got `{s}`)"
        )));
    }
    Ok(v as u64)
}

// ---------------------------------------------------------------------------
// Tables
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Str(String),
    Bool(bool),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Self::Int(i) => i.to_string(),
            Self::Float(f) if f.is_finite() => format!("{f:.16e}"),
            Self::Float(_) => String::new(),
            Self::Str(s) => s.clone(),
            Self::Bool(b) => b.to_string(),
        }
    }

    fn json(&self) -> String {
        match self {
            Self::Int(i) => i.to_string(),
            Self::Float(f) if f.is_finite() => format!("{f:.16e}"),
            Self::Float(_) => "null".into(),
            Self::Str(s) => serde_json::to_string(s).expect("string serializes"),
            Self::Bool(b) => b.to_string(),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Self::Float(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Self::Int(v as i64)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Self::Bool(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Self::Str(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Self::Str(v)
    }
}

pub type Row = Vec<(&'static str, Cell)>;

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub schema_version: u32,
    pub command: String,
    pub params: serde_json::Value,
    pub quadrature: Option<QuadratureConfig>,
    pub seed: Option<u64>,
    pub library_version: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_clock_seconds: Option<f64>,
    pub rows: usize,
    pub checks_passed: usize,
    pub checks_failed: usize,
}

#[derive(Debug, Serialize)]
struct ManifestLine<'a> {
    manifest: &'a RunManifest,
}

fn write_table(rows: &[Row], manifest: &RunManifest, out: &OutputArgs) -> Result<()> {
    let io_err = |e: io::Error| Error::Usage(format!("cannot write output: {e}"));
    let mut sink: Box<dyn Write> = match &out.out {
        Some(path) => Box::new(io::BufWriter::new(File::create(path).map_err(io_err)?)),
        None => Box::new(io::stdout().lock()),
    };
    let manifest_json = serde_json::to_string(&ManifestLine { manifest }).expect("manifest serializes");
    match out.format {
        Format::Json => {
            writeln!(sink, "{manifest_json}").map_err(io_err)?;
            for row in rows {
                let body: Vec<String> = row
                    .iter()
                    .map(|(k, v)| format!("{}:{}", serde_json::to_string(k).expect("key"), v.json()))
                    .collect();
                writeln!(sink, "{{{}}}", body.join(",")).map_err(io_err)?;
            }
        }
        Format::Csv => {
            {
                let mut w = csv::Writer::from_writer(&mut sink);
                let header: Vec<&str> = rows
                    .first()
                    .map(|r| r.iter().map(|(k, _)| *k).collect())
                    .unwrap_or_default();
                w.write_record(&header).map_err(|e| Error::Usage(e.to_string()))?;
                for row in rows {
                    w.write_record(row.iter().map(|(_, v)| v.csv()))
                        .map_err(|e| Error::Usage(e.to_string()))?;
                }
                w.flush().map_err(io_err)?;
            }
            match &out.out {
                Some(path) => std::fs::write(manifest_path(path), format!("{manifest_json}\n")).map_err(io_err)?,
                None => eprintln!("{manifest_json}"),
            }
        }
    }
    sink.flush().map_err(io_err)
}

/// Sidecar manifest path for CSV output.
pub fn manifest_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

fn factor_for(class: FunctionClass, d: usize) -> Result<AngularFactor> {
    match class {
        FunctionClass::Antisymmetric => AngularFactor::vandermonde(d),
        FunctionClass::Odd => AngularFactor::odd_linear(d),
        FunctionClass::General => AngularFactor::unit(d),
    }
}

struct Outcome {
    rows: Vec<Row>,
    params: serde_json::Value,
    quadrature: Option<QuadratureConfig>,
    seed: Option<u64>,
    passed: usize,
    failed: usize,
}

fn cmd_constants(a: &ConstantsArgs) -> Result<Outcome> {
    let dims = parse_dims(&a.d)?;
    let ps = parse_reals(&a.p)?;
    let gammas = parse_reals(&a.gamma)?;
    let mut rows = Vec::new();
    for &d in &dims {
        for &p in &ps {
            for &gamma in &gammas {
                for class in a.class.classes() {
                    let Ok(params) = Params::new(d, p, gamma, class) else {
                        continue;
                    };
                    for functional in a.functional.functionals() {
                        let (value, baseline) = match functional {
                            Functional::Hardy => (params.hardy_constant(), weighted_classical_hardy(d, p, gamma)),
                            Functional::Rellich => (params.rellich_constant(), rellich_mitidieri(d, p, gamma)),
                        };
                        let Ok(value) = value else { continue };
                        let ratio = if baseline.value > 0.0 {
                            value.value / baseline.value
                        } else {
                            f64::NAN
                        };
                        rows.push(vec![
                            ("d", d.into()),
                            ("p", p.into()),
                            ("gamma", gamma.into()),
                            ("class", class.as_str().into()),
                            ("functional", functional.as_str().into()),
                            (
                                "formula_id",
                                serde_json::to_value(value.formula)
                                    .expect("id")
                                    .as_str()
                                    .unwrap_or("")
                                    .into(),
                            ),
                            ("value", value.value.into()),
                            ("admissible", value.admissible.into()),
                            ("condition_residual", value.condition_residual.into()),
                            ("classical_baseline", baseline.value.into()),
                            ("improvement_ratio", ratio.into()),
                        ]);
                    }
                }
            }
        }
    }
    if rows.is_empty() {
        return Err(Error::Usage(
            "the grid contains no valid (d, p, γ, class) combination".into(),
        ));
    }
    Ok(Outcome {
        rows,
        params: serde_json::json!({"d": dims, "p": ps, "gamma": gammas, "class": a.class, "functional": a.functional}),
        quadrature: None,
        seed: None,
        passed: 0,
        failed: 0,
    })
}

fn build_trial(a: &VerifyArgs, factor: &AngularFactor) -> Result<TrialFunction> {
    match a.trial {
        TrialArg::Gaussian => gaussian_trial(factor, a.sigma),
        TrialArg::Sharpness => sharpness_family(factor, a.epsilon, a.delta),
        TrialArg::NearExtremal => hardy_near_extremal_family(factor, a.epsilon, a.delta),
    }
}

fn cmd_verify(a: &VerifyArgs) -> Result<Outcome> {
    let dims = parse_dims(&a.d)?;
    let ps = parse_reals(&a.p)?;
    let gammas = parse_reals(&a.gamma)?;
    let method = match a.method {
        MethodArg::Mc => Method::MonteCarloImportance,
        MethodArg::Product => Method::RadialAngularProduct,
        MethodArg::Factorized => Method::RadialFactorized,
    };
    let cfg = QuadratureConfig {
        method,
        samples: parse_samples(&a.samples)?,
        seed: a.seed,
        ..QuadratureConfig::default()
    };
    let mut rows = Vec::new();
    let (mut passed, mut failed) = (0, 0);
    for &d in &dims {
        for &p in &ps {
            for &gamma in &gammas {
                for class in a.class.classes() {
                    let params = Params::new(d, p, gamma, class)?;
                    let u = build_trial(a, &factor_for(class, d)?)?;
                    for functional in a.functional.functionals() {
                        let r = rayleigh_quotient(&u, functional, &params, &cfg)?;
                        if r.consistent() {
                            passed += 1;
                        } else {
                            failed += 1;
                        }
                        rows.push(vec![
                            ("d", d.into()),
                            ("p", p.into()),
                            ("gamma", gamma.into()),
                            ("class", class.as_str().into()),
                            ("functional", functional.as_str().into()),
                            ("trial", u.label.clone().into()),
                            ("method", format!("{method:?}").into()),
                            ("numerator", r.numerator.value.into()),
                            ("numerator_error", r.numerator.error.into()),
                            ("denominator", r.denominator.value.into()),
                            ("denominator_error", r.denominator.error.into()),
                            ("quotient", r.quotient.into()),
                            ("quotient_error", r.quotient_error.into()),
                            ("constant", r.reference_constant.into()),
                            ("margin", r.margin.into()),
                            (
                                "verdict",
                                serde_json::to_value(r.verdict)
                                    .expect("verdict")
                                    .as_str()
                                    .unwrap_or("")
                                    .into(),
                            ),
                            ("heuristic", r.heuristic.into()),
                            ("degenerate_samples", (r.degenerate_samples as usize).into()),
                        ]);
                    }
                }
            }
        }
    }
    Ok(Outcome {
        rows,
        params: serde_json::json!({
            "d": dims, "p": ps, "gamma": gammas, "class": a.class, "functional": a.functional,
            "trial": a.trial, "sigma": a.sigma, "epsilon": a.epsilon, "delta": a.delta,
        }),
        quadrature: Some(cfg),
        seed: Some(a.seed),
        passed,
        failed,
    })
}

fn cmd_minimax(a: &MinimaxArgs) -> Result<Outcome> {
    let dims = parse_dims(&a.d)?;
    let ps = parse_reals(&a.p)?;
    let gammas = parse_reals(&a.gamma)?;
    let mut rows = Vec::new();
    let (mut passed, mut failed) = (0, 0);
    for &d in &dims {
        for &p in &ps {
            for &gamma in &gammas {
                for class in a.class.classes() {
                    let params = Params::new(d, p, gamma, class)?;
                    let prob = CertificateProblem::from_params(&params)?;
                    let r = numeric_minimax(&prob, &SearchConfig::default())?;
                    let ok = r.gap <= MINIMAX_GAP_TOL;
                    if ok {
                        passed += 1;
                    } else {
                        failed += 1;
                    }
                    let negdef = match r.hessian_negative_definite {
                        Some(b) => Cell::Bool(b),
                        None => Cell::Str(String::new()),
                    };
                    rows.push(vec![
                        ("d", d.into()),
                        ("p", p.into()),
                        ("gamma", gamma.into()),
                        ("class", class.as_str().into()),
                        ("lambda", prob.lambda.into()),
                        ("alpha_star", r.alpha_star.into()),
                        ("beta_star", r.beta_star.into()),
                        ("t_star", r.t_star.into()),
                        ("value_numeric", r.value_numeric.into()),
                        ("value_closed_form", r.value_closed_form.into()),
                        ("gap", r.gap.into()),
                        ("converged", r.converged.into()),
                        ("hessian_negative_definite", negdef),
                        ("within_tolerance", ok.into()),
                    ]);
                }
            }
        }
    }
    Ok(Outcome {
        rows,
        params: serde_json::json!({"d": dims, "p": ps, "gamma": gammas, "class": a.class}),
        quadrature: None,
        seed: None,
        passed,
        failed,
    })
}

fn cmd_sharpness(a: &SharpnessArgs) -> Result<Outcome> {
    let dims = parse_dims(&a.d)?;
    let eps = parse_reals(&a.epsilon)?;
    let deltas = parse_reals(&a.delta)?;
    let mut rows = Vec::new();
    let (mut passed, mut failed) = (0, 0);
    for &d in &dims {
        for class in a.class.classes() {
            if class == FunctionClass::General {
                return Err(Error::Usage("sharpness sweeps need --class antisym or odd".into()));
            }
            let factor = factor_for(class, d)?;
            for functional in a.functional.functionals() {
                for &e in &eps {
                    for &delta in &deltas {
                        let r = sharpness_row(&factor, functional, e, delta)?;
                        if r.in_bracket {
                            passed += 1;
                        } else {
                            failed += 1;
                        }
                        rows.push(vec![
                            ("d", d.into()),
                            ("class", class.as_str().into()),
                            ("functional", functional.as_str().into()),
                            ("epsilon", e.into()),
                            ("delta", delta.into()),
                            ("quotient", r.quotient.into()),
                            ("quotient_error", r.quotient_error.into()),
                            ("lower", r.lower.into()),
                            ("upper", r.upper.into()),
                            ("unsmoothed", r.unsmoothed.into()),
                            ("collar_correction", r.collar_correction.into()),
                            ("tolerance", r.tolerance.into()),
                            ("in_bracket", r.in_bracket.into()),
                            ("constant", r.constant.into()),
                            ("heuristic", r.heuristic.into()),
                        ]);
                    }
                }
            }
        }
    }
    Ok(Outcome {
        rows,
        params: serde_json::json!({"d": dims, "class": a.class, "functional": a.functional, "epsilon": eps, "delta": deltas}),
        quadrature: Some(QuadratureConfig::factorized()),
        seed: None,
        passed,
        failed,
    })
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Constants(_) => "constants",
        Command::Verify(_) => "verify",
        Command::Minimax(_) => "minimax",
        Command::Sharpness(_) => "sharpness",
    }
}

/// Runs a parsed command; returns the process exit code.
pub fn execute(cli: &Cli) -> i32 {
    let start = Instant::now();
    let (outcome, output) = match &cli.command {
        Command::Constants(a) => (cmd_constants(a), &a.output),
        Command::Verify(a) => (cmd_verify(a), &a.output),
        Command::Minimax(a) => (cmd_minimax(a), &a.output),
        Command::Sharpness(a) => (cmd_sharpness(a), &a.output),
    };
    let outcome = match outcome {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    let manifest = RunManifest {
        schema_version: SCHEMA_VERSION,
        command: command_name(&cli.command).into(),
        params: outcome.params,
        quadrature: outcome.quadrature,
        seed: outcome.seed,
        library_version: env!("CARGO_PKG_VERSION"),
        wall_clock_seconds: output.record_timing.then(|| start.elapsed().as_secs_f64()),
        rows: outcome.rows.len(),
        checks_passed: outcome.passed,
        checks_failed: outcome.failed,
    };
    if let Err(e) = write_table(&outcome.rows, &manifest, output) {
        eprintln!("error: {e}");
        return 2;
    }
    if outcome.failed > 0 {
        1
    } else {
        0
    }
}

/// Parses `args` (including the program name) and runs.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => execute(&cli),
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            code
        }
    }
}
