//! Command-line front end. [`run`] takes the argument list and returns the
//! exit code together with whatever would be written to stdout and stderr,
//! so it can be driven from tests as well as from the binary.
//!
//! Exit codes: 0 success, 1 verification failed, 2 bad input, 3 numeric
//! failure (including any non-finite value in the output), 4 an internal
//! consistency gate failed.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::Value;

use crate::bends::{self, BendError, HomPoly};
use crate::contact::{ContactChart, ContactError, DarbouxPoint};
use crate::expr::{Expr, ExprError, DARBOUX_VARS};
use crate::monge_ampere::{self, CandidateSolution, GridSpec, MAEquation, MaError};
use crate::output;
use crate::rmanifold::{self, LklVariant, RManifoldError, RManifoldSpec};
use crate::symplectic::{self, ClassifyOptions, EigenData, Operator, SymplecticError, SymplecticSpace};
use crate::zeta::ZetaKind;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;
pub const EXIT_GATE: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "contact-ma", version, about = "Monge-Ampère equations, contact fields, bends and R-manifolds")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Tolerance; the default depends on the subcommand.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    #[arg(long, global = true, default_value_t = 42)]
    pub seed: u64,
    /// Write the result here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// Coefficients of `N(f₁₁f₂₂ - f₁₂²) + Af₁₁ + Bf₁₂ + Cf₂₂ + D = 0` over
/// `x1, x2, u, p1, p2`. Defaults give the Laplace equation.
#[derive(Debug, Args)]
pub struct EquationArgs {
    #[arg(long = "N", default_value = "0", allow_hyphen_values = true)]
    pub n: String,
    #[arg(long = "A", default_value = "1", allow_hyphen_values = true)]
    pub a: String,
    #[arg(long = "B", default_value = "0", allow_hyphen_values = true)]
    pub b: String,
    #[arg(long = "C", default_value = "1", allow_hyphen_values = true)]
    pub c: String,
    #[arg(long = "D", default_value = "0", allow_hyphen_values = true)]
    pub d: String,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Pointwise type of the equation over a grid.
    Classify {
        #[command(flatten)]
        eq: EquationArgs,
        /// `var=lo:hi:count,…` over x1,x2,u,p1,p2, or `default`.
        #[arg(long, default_value = "default", allow_hyphen_values = true)]
        grid: String,
        /// Largest fraction of cells allowed to fail evaluation.
        #[arg(long, default_value_t = 0.0)]
        max_error_fraction: f64,
    },
    /// Residual and invariance defect of a candidate solution f(x1, x2).
    Verify {
        #[command(flatten)]
        eq: EquationArgs,
        #[arg(long, allow_hyphen_values = true)]
        f: String,
        #[arg(long, default_value_t = 20)]
        samples: usize,
        /// Base points are drawn from [-range, range]².
        #[arg(long, default_value_t = 1.0)]
        range: f64,
    },
    /// Bend test and kind for span{q1, q2} ⊂ P_{k,2}.
    Bend {
        #[arg(long)]
        k: usize,
        #[arg(long, allow_hyphen_values = true)]
        q1: String,
        #[arg(long, allow_hyphen_values = true)]
        q2: String,
        /// Also report the prolonged bend in degree k+1.
        #[arg(long)]
        prolong: bool,
    },
    /// The contact field of a generating function at a point.
    Contact {
        #[arg(long, allow_hyphen_values = true)]
        nu: String,
        /// `x1,x2,u,p1,p2`.
        #[arg(long, default_value = "0,0,0,0,0", allow_hyphen_values = true)]
        point: String,
        /// Second generating function for the Lagrange bracket.
        #[arg(long, allow_hyphen_values = true)]
        mu: Option<String>,
    },
    /// Points, tangency and singular-point data of L_{k,l}.
    Rmanifold {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        l: u32,
        #[arg(long, default_value = "minus")]
        kind: ZetaKind,
        #[arg(long, value_enum, default_value_t = VariantArg::JetOfRoot)]
        variant: VariantArg,
        #[arg(long)]
        allow_parabolic: bool,
        #[arg(long, value_enum, default_value_t = Report::Singular)]
        report: Report,
        #[arg(long, default_value_t = 0.1)]
        radius: f64,
        /// Probe count per circle for the singular report; grid size for points.
        #[arg(long, default_value_t = 16)]
        samples: usize,
        /// Half-width of the parameter square for `points` and `random` sampling.
        #[arg(long, default_value_t = 1.0)]
        extent: f64,
        /// Draw `samples` random parameters instead of a grid.
        #[arg(long)]
        random: bool,
        /// `a,b` for the tangency report.
        #[arg(long, default_value = "0.5,0.3", allow_hyphen_values = true)]
        params: String,
        #[arg(long, default_value_t = rmanifold::DEFAULT_STEP)]
        step: f64,
    },
    /// Classify a self-adjoint operator on a 4-dimensional symplectic space.
    Selfadjoint {
        /// 16 numbers, row-major.
        #[arg(long, allow_hyphen_values = true, required_unless_present = "random")]
        matrix: Option<String>,
        /// 16 numbers, row-major; the standard form when omitted.
        #[arg(long, allow_hyphen_values = true)]
        gram: Option<String>,
        /// Use a seeded random self-adjoint operator.
        #[arg(long, conflicts_with = "matrix")]
        random: bool,
        /// With --random, make the operator singular.
        #[arg(long, requires = "random")]
        singular: bool,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VariantArg {
    JetOfRoot,
    AsPrinted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Report {
    Singular,
    Points,
    Tangency,
    Nu,
    Residuals,
}

/// Result of one invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn new(code: i32, message: impl Into<String>) -> Self {
        CliError { code, message: message.into() }
    }

    fn input(message: impl Into<String>) -> Self {
        CliError::new(EXIT_INPUT, message)
    }
}

fn expr_code(e: &ExprError) -> i32 {
    match e {
        ExprError::Domain(_) => EXIT_NUMERIC,
        _ => EXIT_INPUT,
    }
}

impl From<ExprError> for CliError {
    fn from(e: ExprError) -> Self {
        CliError::new(expr_code(&e), e.to_string())
    }
}

impl From<ContactError> for CliError {
    fn from(e: ContactError) -> Self {
        let code = match &e {
            ContactError::Expr(x) => expr_code(x),
            ContactError::Variables(_) => EXIT_INPUT,
            ContactError::NonFinite => EXIT_NUMERIC,
        };
        CliError::new(code, e.to_string())
    }
}

impl From<SymplecticError> for CliError {
    fn from(e: SymplecticError) -> Self {
        let code = match &e {
            SymplecticError::DimensionMismatch { .. }
            | SymplecticError::BadShape(..)
            | SymplecticError::NotAntisymmetric
            | SymplecticError::Degenerate
            | SymplecticError::NotSelfAdjoint(_) => EXIT_INPUT,
            _ => EXIT_GATE,
        };
        CliError::new(code, e.to_string())
    }
}

impl From<MaError> for CliError {
    fn from(e: MaError) -> Self {
        let code = match &e {
            MaError::Expr(x) | MaError::Coefficient { source: x, .. } => expr_code(x),
            MaError::Contact(c) => CliError::from(c.clone()).code,
            MaError::Symplectic(_) => EXIT_GATE,
            MaError::ScalarOperator => EXIT_NUMERIC,
            MaError::Grid(_) => EXIT_INPUT,
        };
        CliError::new(code, e.to_string())
    }
}

impl From<BendError> for CliError {
    fn from(e: BendError) -> Self {
        let code = match &e {
            BendError::Expr(x) => expr_code(x),
            BendError::InvalidWitness(_) | BendError::Compatibility(_) | BendError::ProlongationDimension(_) => {
                EXIT_GATE
            }
            BendError::ScalarMatrix => EXIT_NUMERIC,
            _ => EXIT_INPUT,
        };
        CliError::new(code, e.to_string())
    }
}

impl From<RManifoldError> for CliError {
    fn from(e: RManifoldError) -> Self {
        let code = match &e {
            RManifoldError::Inconsistent { .. } => EXIT_GATE,
            RManifoldError::Bend(b) => return CliError::from(b.clone()),
            RManifoldError::Csv(_) => EXIT_NUMERIC,
            _ => EXIT_INPUT,
        };
        CliError::new(code, e.to_string())
    }
}

/// Parses `args` (including the program name) and runs the subcommand.
/// With `--out`, the result goes to the file and `stdout` stays empty.
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                Outcome { code: EXIT_INPUT, stdout: String::new(), stderr: text }
            } else {
                Outcome { code: EXIT_OK, stdout: text, stderr: String::new() }
            };
        }
    };
    match execute(&cli) {
        Ok((code, text)) => match &cli.global.out {
            Some(path) => match std::fs::write(path, &text) {
                Ok(()) => Outcome { code, stdout: String::new(), stderr: String::new() },
                Err(e) => Outcome {
                    code: EXIT_INPUT,
                    stdout: String::new(),
                    stderr: format!("error: cannot write {}: {e}\n", path.display()),
                },
            },
            None => Outcome { code, stdout: text, stderr: String::new() },
        },
        Err(e) => Outcome { code: e.code, stdout: String::new(), stderr: format!("error: {}\n", e.message) },
    }
}

/// Renders a result as JSON or as CSV. Tabular results supply their own
/// table; anything else is flattened to `key,value` rows.
struct Rendered {
    json: Value,
    table: Option<(Vec<String>, Vec<Vec<String>>)>,
}

fn render<T: Serialize>(value: &T, table: Option<(Vec<String>, Vec<Vec<String>>)>) -> Result<Rendered, CliError> {
    if let Some(path) = output::non_finite_path(value) {
        return Err(CliError::new(EXIT_NUMERIC, format!("non-finite value at {path}")));
    }
    let json = serde_json::to_value(value).map_err(|e| CliError::new(EXIT_NUMERIC, e.to_string()))?;
    Ok(Rendered { json, table })
}

fn finish(r: Rendered, format: Format) -> Result<String, CliError> {
    match format {
        Format::Json => Ok(output::to_json(&r.json)),
        Format::Csv => {
            let (header, rows) = r.table.unwrap_or_else(|| flatten_table(&r.json));
            write_csv(&header, &rows)
        }
    }
}

fn scalar_text(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::Bool(b) => b.to_string(),
        Value::Number(n) if n.is_i64() || n.is_u64() => n.to_string(),
        Value::Number(n) => output::format_float(n.as_f64().expect("float")),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn flatten(v: &Value, path: String, out: &mut Vec<Vec<String>>) {
    match v {
        Value::Array(items) => {
            for (i, x) in items.iter().enumerate() {
                flatten(x, format!("{path}[{i}]"), out);
            }
        }
        Value::Object(map) => {
            for (k, x) in map {
                let p = if path.is_empty() { k.clone() } else { format!("{path}.{k}") };
                flatten(x, p, out);
            }
        }
        _ => out.push(vec![path, scalar_text(v)]),
    }
}

fn flatten_table(v: &Value) -> (Vec<String>, Vec<Vec<String>>) {
    let mut rows = Vec::new();
    flatten(v, String::new(), &mut rows);
    (vec!["key".into(), "value".into()], rows)
}

fn write_csv(header: &[String], rows: &[Vec<String>]) -> Result<String, CliError> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    let err = |e: csv::Error| CliError::new(EXIT_NUMERIC, e.to_string());
    w.write_record(header).map_err(err)?;
    for row in rows {
        w.write_record(row).map_err(err)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::new(EXIT_NUMERIC, e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("utf-8"))
}

fn floats(v: &[f64]) -> Vec<String> {
    v.iter().map(|x| output::format_float(*x)).collect()
}

fn tolerance(global: &GlobalArgs, default: f64) -> Result<f64, CliError> {
    let tol = global.tol.unwrap_or(default);
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(CliError::input(format!("--tol must be positive, got {tol}")));
    }
    Ok(tol)
}

fn parse_numbers(text: &str, expected: usize, what: &str) -> Result<Vec<f64>, CliError> {
    let v: Vec<f64> = text
        .split(|c: char| c == ',' || c == ';' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| CliError::input(format!("{what}: bad number `{s}`")))
        })
        .collect::<Result<_, _>>()?;
    if v.len() != expected {
        return Err(CliError::input(format!("{what}: expected {expected} numbers, got {}", v.len())));
    }
    Ok(v)
}

fn equation(args: &EquationArgs) -> Result<MAEquation, CliError> {
    Ok(MAEquation::parse([&args.n, &args.a, &args.b, &args.c, &args.d])?)
}

fn execute(cli: &Cli) -> Result<(i32, String), CliError> {
    let g = &cli.global;
    match &cli.command {
        Command::Classify { eq, grid, max_error_fraction } => cmd_classify(g, eq, grid, *max_error_fraction),
        Command::Verify { eq, f, samples, range } => cmd_verify(g, eq, f, *samples, *range),
        Command::Bend { k, q1, q2, prolong } => cmd_bend(g, *k, q1, q2, *prolong),
        Command::Contact { nu, point, mu } => cmd_contact(g, nu, point, mu.as_deref()),
        Command::Rmanifold {
            k,
            l,
            kind,
            variant,
            allow_parabolic,
            report,
            radius,
            samples,
            extent,
            random,
            params,
            step,
        } => {
            let variant = match variant {
                VariantArg::JetOfRoot => LklVariant::JetOfRoot,
                VariantArg::AsPrinted => LklVariant::AsPrinted,
            };
            let spec = RManifoldSpec::new(*k, *l, *kind)?.with_variant(variant).with_parabolic(*allow_parabolic);
            let opts = RmOptions {
                report: *report,
                radius: *radius,
                samples: *samples,
                extent: *extent,
                random: *random,
                params: params.clone(),
                step: *step,
            };
            cmd_rmanifold(g, &spec, &opts)
        }
        Command::Selfadjoint { matrix, gram, random, singular } => {
            cmd_selfadjoint(g, matrix.as_deref(), gram.as_deref(), *random, *singular)
        }
    }
}

#[derive(Serialize)]
struct ClassifyOutput<'a> {
    equation: [String; 5],
    summary: Summary,
    #[serde(flatten)]
    report: &'a monge_ampere::RegionReport,
}

#[derive(Serialize)]
struct Summary {
    cells: usize,
    elliptic: usize,
    hyperbolic: usize,
    parabolic: usize,
    band: usize,
    error: usize,
}

fn equation_strings(eq: &MAEquation) -> [String; 5] {
    eq.coefficient_exprs().clone().map(|e| e.to_string())
}

pub fn cmd_classify(g: &GlobalArgs, args: &EquationArgs, grid: &str, max_error_fraction: f64) -> Result<(i32, String), CliError> {
    let tol = tolerance(g, 1e-9)?;
    if !(0.0..=1.0).contains(&max_error_fraction) {
        return Err(CliError::input("--max-error-fraction must lie in [0, 1]"));
    }
    let eq = equation(args)?;
    let grid = if grid.trim() == "default" { GridSpec::default_plane() } else { GridSpec::parse(grid)? };
    if grid.is_empty() {
        return Err(CliError::input("grid has no cells"));
    }
    let report = monge_ampere::classify_region(&eq, &grid, tol);
    let summary = Summary {
        cells: report.cells.len(),
        elliptic: report.count("elliptic"),
        hyperbolic: report.count("hyperbolic"),
        parabolic: report.count("parabolic"),
        band: report.count("band"),
        error: report.error_count(),
    };
    let errors = summary.error;
    let out = ClassifyOutput { equation: equation_strings(&eq), summary, report: &report };
    let mut header: Vec<String> = grid.axes.iter().map(|a| format!("i_{}", a.var)).collect();
    header.extend(DARBOUX_VARS.iter().map(|s| s.to_string()));
    header.extend(["delta".to_string(), "type".to_string(), "error".to_string()]);
    let rows = report
        .cells
        .iter()
        .map(|c| {
            let mut row: Vec<String> = c.index.iter().map(|i| i.to_string()).collect();
            row.extend(floats(&c.point));
            row.push(c.delta.map(output::format_float).unwrap_or_default());
            row.push(c.kind.clone());
            row.push(c.error.clone().unwrap_or_default());
            row
        })
        .collect();
    let text = finish(render(&out, Some((header, rows)))?, g.format)?;
    if errors as f64 > max_error_fraction * report.cells.len() as f64 {
        let first = report.cells.iter().find(|c| c.error.is_some()).expect("counted");
        return Err(CliError::new(
            EXIT_NUMERIC,
            format!(
                "{errors} of {} cells failed to evaluate; first at index {:?}: {}",
                report.cells.len(),
                first.index,
                first.error.as_deref().unwrap_or("")
            ),
        ));
    }
    Ok((EXIT_OK, text))
}

#[derive(Serialize)]
struct VerifySample {
    base: [f64; 2],
    point: [f64; 5],
    residual: f64,
    defect: f64,
    /// `defect / |2E|`, when `E` is not negligible.
    defect_ratio: Option<f64>,
    identity_deviation: f64,
}

#[derive(Serialize)]
struct VerifyOutput {
    equation: [String; 5],
    f: String,
    tol: f64,
    seed: u64,
    samples: Vec<VerifySample>,
    max_residual: f64,
    max_defect: f64,
    max_identity_deviation: f64,
    pass: bool,
}

/// Bound on the decomposition-identity deviation before the result is distrusted.
const IDENTITY_GATE: f64 = 1e-8;

pub fn cmd_verify(g: &GlobalArgs, args: &EquationArgs, f: &str, samples: usize, range: f64) -> Result<(i32, String), CliError> {
    let tol = tolerance(g, 1e-8)?;
    if samples == 0 {
        return Err(CliError::input("--samples must be positive"));
    }
    if !(range > 0.0 && range.is_finite()) {
        return Err(CliError::input("--range must be positive"));
    }
    let eq = equation(args)?;
    let sol = CandidateSolution::parse(f)?;
    let mut rng = ChaCha8Rng::seed_from_u64(g.seed);
    let mut out = Vec::with_capacity(samples);
    for _ in 0..samples {
        let base = [rng.gen_range(-range..=range), rng.gen_range(-range..=range)];
        let r = monge_ampere::invariance_defect(&eq, &sol, base)?;
        let twice = 2.0 * r.residual.abs();
        out.push(VerifySample {
            base,
            point: r.point.to_array(),
            residual: r.residual,
            defect: r.defect,
            defect_ratio: (twice > 1e-12).then(|| r.defect / twice),
            identity_deviation: r.identity_deviation(),
        });
    }
    let max = |f: fn(&VerifySample) -> f64| out.iter().map(f).fold(0.0, f64::max);
    let max_residual = max(|s| s.residual.abs());
    let max_defect = max(|s| s.defect);
    let max_identity_deviation = max(|s| s.identity_deviation);
    let pass = max_residual <= tol && max_defect <= tol;
    let header = ["x1", "x2", "u", "p1", "p2", "residual", "defect", "defect_ratio", "identity_deviation"]
        .map(String::from)
        .to_vec();
    let rows = out
        .iter()
        .map(|s| {
            let mut row = floats(&s.point);
            row.extend(floats(&[s.residual, s.defect]));
            row.push(s.defect_ratio.map(output::format_float).unwrap_or_default());
            row.push(output::format_float(s.identity_deviation));
            row
        })
        .collect();
    let result = VerifyOutput {
        equation: equation_strings(&eq),
        f: sol.expr().to_string(),
        tol,
        seed: g.seed,
        samples: out,
        max_residual,
        max_defect,
        max_identity_deviation,
        pass,
    };
    let text = finish(render(&result, Some((header, rows)))?, g.format)?;
    if max_identity_deviation.is_nan() || max_identity_deviation > IDENTITY_GATE * (1.0 + max_defect) {
        return Err(CliError::new(
            EXIT_GATE,
            format!("decomposition identity deviates by {max_identity_deviation:e}"),
        ));
    }
    Ok((if pass { EXIT_OK } else { EXIT_VERIFY_FAILED }, text))
}

#[derive(Serialize)]
struct PolyOut {
    text: String,
    /// `coeffs[r]` multiplies `x^r y^(k-r)`.
    coeffs: Vec<f64>,
}

fn poly_out(p: &HomPoly) -> PolyOut {
    PolyOut { text: p.to_string(), coeffs: p.coeffs().to_vec() }
}

#[derive(Serialize)]
struct BendOutput {
    k: usize,
    span: [PolyOut; 2],
    is_bend: bool,
    prolongation_dim: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    kind: Option<ZetaKind>,
    #[serde(skip_serializing_if = "Option::is_none")]
    matrix: Option<[f64; 4]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    invariant: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    witness: Option<[PolyOut; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    compatibility_residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    normal_form_distance: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    prolonged: Option<Box<BendOutput>>,
}

fn bend_output(b: &bends::BendSubspace, prolongation_dim: usize, tol: f64) -> Result<BendOutput, CliError> {
    let (kind, invariant) = match &b.matrix {
        Some(m) => {
            let bk = bends::classify_bend(m.to_array(), tol)?;
            (Some(bk.kind), Some(bk.invariant))
        }
        None => (None, None),
    };
    let normal_form_distance = match kind {
        Some(kd) if b.k >= 2 => Some(b.distance(&bends::normal_form(b.k, kd)?)),
        _ => None,
    };
    Ok(BendOutput {
        k: b.k,
        span: [poly_out(&b.span[0]), poly_out(&b.span[1])],
        is_bend: b.witness.is_some(),
        prolongation_dim,
        kind,
        matrix: b.matrix.map(|m| m.to_array()),
        invariant,
        witness: b.witness.as_ref().map(|[f, g]| [poly_out(f), poly_out(g)]),
        compatibility_residual: b.matrix.map(|m| m.compatibility_residual),
        normal_form_distance,
        prolonged: None,
    })
}

pub fn cmd_bend(g: &GlobalArgs, k: usize, q1: &str, q2: &str, prolong: bool) -> Result<(i32, String), CliError> {
    let tol = tolerance(g, 1e-9)?;
    let vars = ["x", "y"];
    let p1 = HomPoly::from_expr(&Expr::parse(q1, &vars)?, k)?;
    let p2 = HomPoly::from_expr(&Expr::parse(q2, &vars)?, k)?;
    let check = bends::is_bend(k, &p1, &p2)?;
    let b = bends::analyze(k, &p1, &p2, tol)?;
    let mut out = bend_output(&b, check.prolongation_dim, tol)?;
    if prolong && out.is_bend {
        let next = bends::prolong_bend(&b, tol)?;
        let dim = bends::is_bend(next.k, &next.span[0], &next.span[1])?.prolongation_dim;
        out.prolonged = Some(Box::new(bend_output(&next, dim, tol)?));
    }
    finish(render(&out, None)?, g.format).map(|t| (EXIT_OK, t))
}

#[derive(Serialize)]
struct ContactOutput {
    nu: String,
    point: [f64; 5],
    components: [f64; 5],
    contact_form: f64,
    /// `max_i |ω([e_i, X_ν])|`.
    defect: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    mu: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    bracket: Option<f64>,
}

pub fn cmd_contact(g: &GlobalArgs, nu: &str, point: &str, mu: Option<&str>) -> Result<(i32, String), CliError> {
    let tol = tolerance(g, 1e-9)?;
    let coords = parse_numbers(point, 5, "--point")?;
    let pt = DarbouxPoint::from_array(coords.try_into().expect("five numbers"));
    let nu_e = Expr::parse(nu, &DARBOUX_VARS)?;
    let chart = ContactChart;
    let field = chart.contact_field(&nu_e, &pt)?;
    let contact_form = crate::contact::contact_form_value(&pt, &field);
    let defect = chart.contact_field_defect(&nu_e, &pt)?;
    let value = nu_e.eval(&pt.to_array())?;
    let (mu_text, bracket) = match mu {
        Some(m) => {
            let me = Expr::parse(m, &DARBOUX_VARS)?;
            (Some(me.to_string()), Some(chart.lagrange_bracket(&me, &nu_e, &pt)?))
        }
        None => (None, None),
    };
    let out = ContactOutput {
        nu: nu_e.to_string(),
        point: pt.to_array(),
        components: field.components,
        contact_form,
        defect,
        mu: mu_text,
        bracket,
    };
    let text = finish(render(&out, None)?, g.format)?;
    if !((contact_form - value).abs() <= tol * (1.0 + value.abs()) && defect <= tol * (1.0 + value.abs())) {
        return Err(CliError::new(
            EXIT_GATE,
            format!("contact field check failed: ω(X_ν) - ν = {:e}, defect {defect:e}", contact_form - value),
        ));
    }
    Ok((EXIT_OK, text))
}

struct RmOptions {
    report: Report,
    radius: f64,
    samples: usize,
    extent: f64,
    random: bool,
    params: String,
    step: f64,
}

#[derive(Serialize)]
struct TangencyOutput {
    spec: RManifoldSpec,
    params: [f64; 2],
    point: rmanifold::JetChartPoint,
    tangents: [Vec<f64>; 2],
    convergence: rmanifold::Convergence,
}

#[derive(Serialize)]
struct ResidualsOutput {
    spec: RManifoldSpec,
    seed: u64,
    rows: Vec<ResidualRow>,
    max_residual: f64,
}

#[derive(Serialize)]
struct ResidualRow {
    params: [f64; 2],
    consistency: rmanifold::Consistency,
}

#[derive(Serialize)]
struct PointsOutput {
    spec: RManifoldSpec,
    header: Vec<String>,
    rows: Vec<Vec<f64>>,
}

fn rm_params(opts: &RmOptions, seed: u64) -> Result<Vec<(f64, f64)>, CliError> {
    if !(opts.extent > 0.0 && opts.extent.is_finite()) {
        return Err(CliError::input("--extent must be positive"));
    }
    if opts.random {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let e = opts.extent;
        Ok((0..opts.samples).map(|_| (rng.gen_range(-e..=e), rng.gen_range(-e..=e))).collect())
    } else {
        Ok(rmanifold::parameter_grid(opts.extent, opts.samples))
    }
}

fn cmd_rmanifold(g: &GlobalArgs, spec: &RManifoldSpec, opts: &RmOptions) -> Result<(i32, String), CliError> {
    let tol = tolerance(g, 1e-8)?;
    match opts.report {
        Report::Singular => {
            let r = rmanifold::singular_point_report(spec, opts.radius, opts.samples)?;
            finish(render(&r, None)?, g.format).map(|t| (EXIT_OK, t))
        }
        Report::Nu => {
            let nu = rmanifold::nu_vectors(spec.k, spec.kind)?;
            let text = finish(render(&nu, None)?, g.format)?;
            let d = if spec.kind == ZetaKind::Zero { nu.swapped_normal_form_distance } else { nu.normal_form_distance };
            if d > tol {
                return Err(CliError::new(EXIT_GATE, format!("ν images miss the normal form by {d:e}")));
            }
            Ok((EXIT_OK, text))
        }
        Report::Tangency => {
            let p = parse_numbers(&opts.params, 2, "--params")?;
            let params = (p[0], p[1]);
            let point = rmanifold::lkl_point(spec, params)?;
            let tangents = rmanifold::tangent_vectors(spec, params, opts.step)?;
            let convergence = rmanifold::tangency_convergence(spec, params, opts.step)?;
            let out = TangencyOutput { spec: *spec, params: [p[0], p[1]], point, tangents, convergence };
            finish(render(&out, None)?, g.format).map(|t| (EXIT_OK, t))
        }
        Report::Residuals => {
            let params = rm_params(opts, g.seed)?;
            let mut rows = Vec::with_capacity(params.len());
            for &(a, b) in &params {
                let pt = rmanifold::lkl_point(spec, (a, b))?;
                rows.push(ResidualRow { params: [a, b], consistency: rmanifold::consistency(&pt, spec.kind) });
            }
            let max_residual = rows.iter().map(|r| r.consistency.max_residual).fold(0.0, f64::max);
            let out = ResidualsOutput { spec: *spec, seed: g.seed, rows, max_residual };
            finish(render(&out, None)?, g.format).map(|t| (EXIT_OK, t))
        }
        Report::Points => {
            let params = rm_params(opts, g.seed)?;
            let (header, rows) = rmanifold::point_cloud(spec, &params)?;
            let table = rows.iter().map(|r| floats(r)).collect();
            let out = PointsOutput { spec: *spec, header: header.clone(), rows };
            finish(render(&out, Some((header, table)))?, g.format).map(|t| (EXIT_OK, t))
        }
    }
}

#[derive(Serialize)]
#[serde(tag = "type", rename_all = "lowercase")]
enum EigenOut {
    Scalar { lambda: f64 },
    Elliptic { re: f64, im: f64, complex_structure: Vec<Vec<f64>> },
    Hyperbolic { lambdas: [f64; 2], planes: [Vec<Vec<f64>>; 2] },
    Parabolic { lambda: f64, kernel: Vec<Vec<f64>>, image: Vec<Vec<f64>> },
}

fn rows_of(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

/// Basis vectors as a list of columns.
fn cols_of(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.ncols()).map(|j| m.column(j).iter().copied().collect()).collect()
}

#[derive(Serialize)]
struct SelfAdjointOutput {
    matrix: Vec<Vec<f64>>,
    gram: Vec<Vec<f64>>,
    self_adjoint_defect: f64,
    kind: symplectic::OperatorType,
    min_poly: Vec<f64>,
    discriminant: f64,
    fit_residual: f64,
    eigen: EigenOut,
}

pub fn cmd_selfadjoint(
    g: &GlobalArgs,
    matrix: Option<&str>,
    gram: Option<&str>,
    random: bool,
    singular: bool,
) -> Result<(i32, String), CliError> {
    let tol = tolerance(g, 1e-9)?;
    let sp = match gram {
        Some(text) => SymplecticSpace::new(DMatrix::from_row_slice(4, 4, &parse_numbers(text, 16, "--gram")?))?,
        None => symplectic::standard_space(2),
    };
    let op = if random {
        if gram.is_some() {
            return Err(CliError::input("--random uses the standard form; drop --gram"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(g.seed);
        symplectic::random_self_adjoint(&mut rng, 2, singular)
    } else {
        let text = matrix.ok_or_else(|| CliError::input("--matrix or --random is required"))?;
        Operator::from_row_slice(4, &parse_numbers(text, 16, "--matrix")?)
    };
    let defect = symplectic::self_adjoint_defect(&sp, &op)?;
    let c = symplectic::classify_dim4(&sp, &op, ClassifyOptions::with_tol(tol))?;
    let eigen = match &c.eigen {
        EigenData::Scalar { lambda } => EigenOut::Scalar { lambda: *lambda },
        EigenData::Elliptic { re, im, complex_structure } => EigenOut::Elliptic {
            re: *re,
            im: *im,
            complex_structure: rows_of(complex_structure),
        },
        EigenData::Hyperbolic { lambdas, planes } => EigenOut::Hyperbolic {
            lambdas: *lambdas,
            planes: [cols_of(&planes[0]), cols_of(&planes[1])],
        },
        EigenData::Parabolic { lambda, kernel, image } => EigenOut::Parabolic {
            lambda: *lambda,
            kernel: cols_of(kernel),
            image: cols_of(image),
        },
    };
    let out = SelfAdjointOutput {
        matrix: rows_of(op.matrix()),
        gram: rows_of(sp.gram()),
        self_adjoint_defect: defect,
        kind: c.kind,
        min_poly: c.min_poly.clone(),
        discriminant: c.discriminant,
        fit_residual: c.fit_residual,
        eigen,
    };
    finish(render(&out, None)?, g.format).map(|t| (EXIT_OK, t))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> Outcome {
        run(std::iter::once("contact-ma").chain(args.iter().copied()))
    }

    fn json(o: &Outcome) -> Value {
        serde_json::from_str(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", o.stdout))
    }

    #[test]
    fn classify_laplace() {
        let o = run_args(&["classify", "--N", "0", "--A", "1", "--B", "0", "--C", "1", "--D", "0", "--grid", "default"]);
        assert_eq!(o.code, 0, "{}", o.stderr);
        let v = json(&o);
        assert_eq!(v["summary"]["cells"], 25);
        assert_eq!(v["summary"]["elliptic"], 25);
        assert!(v["cells"].as_array().unwrap().iter().all(|c| c["type"] == "elliptic"));
    }

    #[test]
    fn classify_parse_error() {
        let o = run_args(&["classify", "--A", "1+"]);
        assert_eq!(o.code, 2);
        assert!(o.stderr.contains("byte 2"), "{}", o.stderr);
    }

    #[test]
    fn classify_band_stripe() {
        let o = run_args(&["classify", "--C", "u", "--grid", "u=-1:1:20", "--tol", "0.5"]);
        assert_eq!(o.code, 0, "{}", o.stderr);
        let v = json(&o);
        assert_eq!(v["summary"]["band"], 2);
        assert_eq!(v["summary"]["elliptic"], 9);
        assert_eq!(v["summary"]["hyperbolic"], 9);
    }

    #[test]
    fn classify_evaluation_errors() {
        let o = run_args(&["classify", "--A", "ln(x1)"]);
        assert_eq!(o.code, 3, "{}", o.stderr);
        let o = run_args(&["classify", "--A", "ln(x1)", "--max-error-fraction", "1"]);
        assert_eq!(o.code, 0);
        assert!(json(&o)["summary"]["error"].as_u64().unwrap() > 0);
    }

    #[test]
    fn verify_fixtures() {
        let o = run_args(&["verify", "--f", "x1^2-x2^2"]);
        assert_eq!(o.code, 0, "{}", o.stderr);
        let o = run_args(&["verify", "--f", "x1^2"]);
        assert_eq!(o.code, 1);
        let v = json(&o);
        assert_eq!(v["max_residual"].as_f64(), Some(2.0));
        assert_eq!(v["max_defect"].as_f64(), Some(4.0));
        let o = run_args(&["verify", "--N", "1", "--A", "0", "--C", "0", "--D", "1", "--f", "x1*x2"]);
        assert_eq!(o.code, 0, "{}", o.stdout);
    }

    #[test]
    fn bend_example() {
        let o = run_args(&["bend", "--k", "2", "--q1", "x^2", "--q2", "x*y"]);
        assert_eq!(o.code, 0, "{}", o.stderr);
        let v = json(&o);
        assert_eq!(v["is_bend"], true);
        assert_eq!(v["kind"], "zero");
        let m: Vec<f64> = v["matrix"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
        for (got, want) in m.iter().zip([0.0, 3.0, 0.0, 0.0]) {
            assert!((got - want).abs() < 1e-12, "{m:?}");
        }
    }

    #[test]
    fn contact_example() {
        let o = run_args(&["contact", "--nu", "u", "--point", "0,0,1,0,0"]);
        assert_eq!(o.code, 0, "{}", o.stderr);
        let v = json(&o);
        let c: Vec<f64> = v["components"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
        assert_eq!(c, vec![0.0, 0.0, 1.0, 0.0, 0.0]);
    }

    #[test]
    fn rmanifold_singular() {
        let o = run_args(&["rmanifold", "--k", "2", "--l", "2", "--kind", "minus", "--report", "singular"]);
        assert_eq!(o.code, 0, "{}", o.stderr);
        let v = json(&o);
        assert_eq!(v["unique_singular_point"], true);
        assert_eq!(v["bend_matches_normal_form"], true);
    }

    #[test]
    fn rmanifold_points_csv() {
        let o = run_args(&["rmanifold", "--k", "2", "--l", "2", "--report", "points", "--samples", "3", "--format", "csv"]);
        assert_eq!(o.code, 0, "{}", o.stderr);
        assert!(o.stdout.starts_with("a,b,x,y,\"u_{0,0}\""));
        assert_eq!(o.stdout.lines().count(), 10);
        let o = run_args(&["rmanifold", "--k", "2", "--l", "2", "--kind", "zero", "--report", "points"]);
        assert_eq!(o.code, 2);
    }

    #[test]
    fn selfadjoint_models() {
        let o = run_args(&["selfadjoint", "--random"]);
        assert_eq!(o.code, 0, "{}", o.stderr);
        let o = run_args(&["selfadjoint", "--matrix", "1,0,0,0, 0,-1,0,0, 0,0,1,0, 0,0,0,-1"]);
        assert_eq!(o.code, 0, "{}", o.stderr);
        assert_eq!(json(&o)["kind"], "hyperbolic");
        let o = run_args(&["selfadjoint", "--matrix", "1,2,0,0, 0,1,0,0, 0,0,1,0, 0,0,0,1"]);
        assert_eq!(o.code, 2, "{}", o.stdout);
        let o = run_args(&["selfadjoint", "--matrix", "1,2,3"]);
        assert_eq!(o.code, 2);
    }

    #[test]
    fn nan_is_reported() {
        let o = run_args(&["contact", "--nu", "sqrt(x1)", "--point", "-1,0,0,0,0"]);
        assert_eq!(o.code, 3, "{} {}", o.stdout, o.stderr);
    }

    #[test]
    fn deterministic_output() {
        let args = ["verify", "--f", "x1^3-3*x1*x2^2", "--seed", "7"];
        assert_eq!(run_args(&args), run_args(&args));
        let other = run_args(&["verify", "--f", "x1^3-3*x1*x2^2", "--seed", "8"]);
        assert_ne!(run_args(&args).stdout, other.stdout);
    }
}
