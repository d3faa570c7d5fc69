//! Command-line surface. `run` returns the exit status and both output
//! streams so that it can be driven in-process.

use std::fmt::Write as _;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::bounds::{
    bounded_bound, exp_bound, lemma_bound, nu_estimate_with, poly_bound, BoundReport, GrowthSpec, Mode, NuOptions,
    NuTrace, Root,
};
use crate::catalog::{family_bound, family_routes, family_stream, registry, FamilyInfo, FamilySpec};
use crate::cfcore::{CoefficientStream, Convergent, Enclosure, DEFAULT_BITLEN_CAP};
use crate::constructions::{approximation_audit_with, prescribed_stream_with, AuditRecord, Exponent, PrescribedPlan};
use crate::error::{CfError, Result};
use crate::interval::Precision;
use crate::numeric::{decimal_places_for, parse_biguint, parse_positive_rational, parse_rational, to_decimal};
use crate::transforms::{integerize, transport_linear, transport_reciprocal, IrrationalityMeasure, RationalStream};
use crate::verify::{run_suite, Suite, SuiteReport};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_CONDITION: i32 = 2;
pub const EXIT_NON_CONVERGENCE: i32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Json,
    Text,
}

#[derive(Debug, Parser)]
#[command(
    name = "gcfx",
    version,
    about = "Generalized continued fractions: enclosures, exponent bounds, constructions"
)]
pub struct Cli {
    #[arg(long, value_enum, default_value = "json", global = true)]
    pub output: OutputFormat,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Enclose the value of a stream to a target width.
    Eval {
        #[command(flatten)]
        stream: StreamArgs,
        #[command(flatten)]
        limits: Limits,
    },
    /// Upper bound for the irrationality exponent.
    Bound(BoundArgs),
    /// Empirical growth ratio `log Π_n / log B_n` and the lemma bound.
    Nu {
        #[command(flatten)]
        stream: StreamArgs,
        #[arg(long, default_value_t = 10_000)]
        n_max: usize,
        #[arg(long, default_value_t = 500)]
        exact_until: usize,
        #[arg(long, default_value_t = 0.2)]
        window: f64,
        /// Number of samples kept in the report.
        #[arg(long, default_value_t = 0)]
        samples: usize,
    },
    /// Number with prescribed irrationality exponent.
    Construct {
        /// `s >= 2` as a rational, or `inf`.
        #[arg(long)]
        exponent: String,
        #[arg(long, default_value_t = 6)]
        blocks: usize,
        #[arg(long)]
        audit: bool,
    },
    /// Integer forms and measure transport.
    Transform {
        #[command(subcommand)]
        op: TransformOp,
    },
    /// Run an invariant suite.
    Verify {
        /// identities, enclosures, densities, families, constructions or all.
        #[arg(default_value = "all")]
        suite: String,
    },
    /// List the family registry.
    List,
}

#[derive(Debug, Subcommand)]
pub enum TransformOp {
    /// Scale a rational stream to positive integers.
    Integerize {
        #[arg(long)]
        family: Option<String>,
        #[arg(long = "param")]
        params: Vec<String>,
        /// Periodic rational numerators, comma separated.
        #[arg(long)]
        a: Option<String>,
        /// Periodic rational denominators, comma separated.
        #[arg(long)]
        b: Option<String>,
        #[arg(long, default_value_t = 10)]
        terms: usize,
    },
    /// Measure of `(q/t) τ + r/t`.
    Linear {
        #[command(flatten)]
        measure: MeasureArgs,
        #[arg(long)]
        q: i64,
        #[arg(long)]
        t: i64,
        #[arg(long, default_value_t = 0)]
        r: i64,
    },
    /// Measure of `1/τ`.
    Reciprocal {
        #[command(flatten)]
        measure: MeasureArgs,
        #[arg(long)]
        tau: f64,
    },
}

#[derive(Debug, Args)]
pub struct MeasureArgs {
    #[arg(long)]
    pub omega: f64,
    #[arg(long)]
    pub c: f64,
    #[arg(long)]
    pub h: f64,
}

#[derive(Debug, Args)]
pub struct StreamArgs {
    #[arg(long)]
    pub family: Option<String>,
    /// `name=value`, repeatable.
    #[arg(long = "param")]
    pub params: Vec<String>,
    /// Periodic partial numerators, comma separated.
    #[arg(long)]
    pub a: Option<String>,
    /// Periodic partial denominators, comma separated.
    #[arg(long)]
    pub b: Option<String>,
    #[arg(long, default_value = "0")]
    pub b0: String,
    #[arg(long, default_value_t = DEFAULT_BITLEN_CAP)]
    pub bitlen_cap: u64,
}

#[derive(Debug, Args)]
pub struct Limits {
    /// Target enclosure width.
    #[arg(long, default_value = "1e-30")]
    pub precision: String,
    #[arg(long, default_value_t = 100_000)]
    pub max_terms: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GrowthClass {
    Bounded,
    Poly,
    Exp,
}

#[derive(Debug, Args)]
pub struct BoundArgs {
    #[arg(long, value_enum)]
    pub class: Option<GrowthClass>,
    #[arg(long)]
    pub family: Option<String>,
    #[arg(long = "param")]
    pub params: Vec<String>,
    /// Report every applicable route instead of the primary one.
    #[arg(long)]
    pub all_routes: bool,
    /// Lemma bound from a given ν.
    #[arg(long)]
    pub nu: Option<f64>,

    #[arg(long)]
    pub a1: Option<u64>,
    #[arg(long)]
    pub a2: Option<u64>,
    #[arg(long)]
    pub b1: Option<u64>,
    #[arg(long)]
    pub b2: Option<u64>,

    #[arg(long)]
    pub alpha: Option<String>,
    #[arg(long)]
    pub l: Option<String>,
    #[arg(long)]
    pub beta1: Option<String>,
    #[arg(long)]
    pub k1: Option<String>,
    #[arg(long)]
    pub beta2: Option<String>,
    #[arg(long)]
    pub k2: Option<String>,
    #[arg(long)]
    pub r: Option<String>,
    #[arg(long)]
    pub s1: Option<String>,
    #[arg(long)]
    pub s2: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub source: String,
    pub value: String,
    pub enclosure: Enclosure,
    pub n_used: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundOutput {
    pub source: String,
    pub reports: Vec<BoundReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NuReport {
    pub source: String,
    pub n_max: usize,
    pub empirical_nu: f64,
    pub growth_max: f64,
    pub window_start: usize,
    pub exact_until: usize,
    pub overlap_max_rel_err: Option<f64>,
    pub mode: Mode,
    pub lemma: BoundReport,
    pub samples: Vec<crate::bounds::NuSample>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstructReport {
    pub plan: PrescribedPlan,
    pub value: Option<Enclosure>,
    pub audit: Vec<AuditRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntegerTerm {
    pub n: usize,
    #[serde(with = "crate::numeric::serde_big::rational")]
    pub scale: BigRational,
    #[serde(with = "crate::numeric::serde_big::biguint")]
    pub a: BigUint,
    #[serde(with = "crate::numeric::serde_big::biguint")]
    pub b: BigUint,
    pub convergent: Convergent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntegerizeReport {
    pub source: String,
    pub terms: Vec<IntegerTerm>,
    /// Every integer convergent equals the rational one.
    pub values_preserved: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransportReport {
    pub input: IrrationalityMeasure,
    pub output: IrrationalityMeasure,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub error: String,
    pub kind: String,
}

/// Result of one invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

pub fn exit_code(err: &CfError) -> i32 {
    match err {
        CfError::ConditionViolated(_) => EXIT_CONDITION,
        CfError::NonConvergence { .. }
        | CfError::ResourceExhausted { .. }
        | CfError::TieUnresolved { .. }
        | CfError::NeedsMorePrecision { .. } => EXIT_NON_CONVERGENCE,
        _ => EXIT_USAGE,
    }
}

fn error_kind(err: &CfError) -> &'static str {
    match err {
        CfError::InvalidCoefficient { .. } => "invalid_coefficient",
        CfError::StreamExhausted { .. } => "stream_exhausted",
        CfError::NonConvergence { .. } => "non_convergence",
        CfError::ResourceExhausted { .. } => "resource_exhausted",
        CfError::InvalidScaling { .. } => "invalid_scaling",
        CfError::InvalidMap(_) => "invalid_map",
        CfError::InvalidValue(_) => "invalid_value",
        CfError::ConditionViolated(_) => "condition_violated",
        CfError::Domain(_) => "domain",
        CfError::TieUnresolved { .. } => "tie_unresolved",
        CfError::NeedsMorePrecision { .. } => "needs_more_precision",
        CfError::FamilyParam(_) => "family_param",
        CfError::Parse(_) => "parse",
    }
}

pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            return if code == EXIT_OK {
                Outcome {
                    code,
                    stdout: text,
                    stderr: String::new(),
                }
            } else {
                Outcome {
                    code,
                    stdout: String::new(),
                    stderr: text,
                }
            };
        }
    };
    let format = cli.output;
    match dispatch(cli) {
        Ok((code, body)) => Outcome {
            code,
            stdout: render(format, &body),
            stderr: String::new(),
        },
        Err(err) => {
            let code = exit_code(&err);
            let report = ErrorReport {
                error: err.to_string(),
                kind: error_kind(&err).to_string(),
            };
            let stdout = match format {
                OutputFormat::Json => to_json(&report),
                OutputFormat::Text => String::new(),
            };
            Outcome {
                code,
                stdout,
                stderr: format!("error: {err}\n"),
            }
        }
    }
}

enum Body {
    Eval(EvalReport),
    Bound(BoundOutput),
    Nu(NuReport),
    Construct(ConstructReport),
    Integerize(IntegerizeReport),
    Transport(TransportReport),
    Verify(SuiteReport),
    List(Vec<FamilyInfo>),
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

fn render(format: OutputFormat, body: &Body) -> String {
    if format == OutputFormat::Json {
        return match body {
            Body::Eval(r) => to_json(r),
            Body::Bound(r) => to_json(r),
            Body::Nu(r) => to_json(r),
            Body::Construct(r) => to_json(r),
            Body::Integerize(r) => to_json(r),
            Body::Transport(r) => to_json(r),
            Body::Verify(r) => to_json(r),
            Body::List(r) => to_json(r),
        };
    }
    let mut out = String::new();
    match body {
        Body::Eval(r) => {
            let _ = writeln!(out, "{}: {}", r.source, r.value);
            let _ = writeln!(out, "n_used {}, width {}", r.n_used, r.enclosure.width);
        }
        Body::Bound(r) => {
            for rep in &r.reports {
                text_bound(&mut out, rep);
            }
        }
        Body::Nu(r) => {
            let _ = writeln!(
                out,
                "{}: nu {:.6} over n >= {} ({:?}), growth {:.6}",
                r.source, r.empirical_nu, r.window_start, r.mode, r.growth_max
            );
            text_bound(&mut out, &r.lemma);
        }
        Body::Construct(r) => {
            let _ = writeln!(
                out,
                "s = {}: {} blocks, word length {}",
                r.plan.s,
                r.plan.blocks.len(),
                r.plan.word_len
            );
            for b in &r.plan.blocks {
                let _ = writeln!(out, "  n = {:>3}  f = {:>6}  c has {} bits", b.n, b.f, b.c.bits());
            }
            if let Some(v) = &r.value {
                let _ = writeln!(out, "value {}", to_decimal(&v.midpoint(), decimal_places_for(&v.width)));
            }
            for a in &r.audit {
                let _ = writeln!(
                    out,
                    "  audit n = {}: upper {} lower {:?} log10|tau - A/B| = {:.3} vs {:.3}",
                    a.n, a.upper_holds, a.lower_holds, a.log10_distance, a.log10_bound
                );
            }
        }
        Body::Integerize(r) => {
            for t in &r.terms {
                let _ = writeln!(out, "  n = {:>3}  e = {}  a = {}  b = {}", t.n, t.scale, t.a, t.b);
            }
            let _ = writeln!(out, "values preserved: {}", r.values_preserved);
        }
        Body::Transport(r) => {
            let _ = writeln!(out, "omega {}  c {:e}  H {:e}", r.output.omega, r.output.c, r.output.h);
        }
        Body::Verify(r) => {
            for c in &r.checks {
                let mark = if c.passed { "ok  " } else { "FAIL" };
                let _ = writeln!(
                    out,
                    "{mark} {:<13} {:<22} {:>9.1} ms  {}",
                    c.suite, c.name, c.millis, c.detail
                );
            }
            let _ = writeln!(
                out,
                "{} in {:.1} ms",
                if r.passed { "passed" } else { "failed" },
                r.millis
            );
        }
        Body::List(r) => {
            for f in r {
                let params: Vec<String> = f.params.iter().map(|p| format!("{}={}", p.name, p.default)).collect();
                let _ = writeln!(out, "{:<17} {}", f.name, f.summary);
                if !params.is_empty() {
                    let _ = writeln!(out, "{:<17} params: {}", "", params.join(" "));
                }
                let _ = writeln!(out, "{:<17} route: {}", "", f.route);
            }
        }
    }
    out
}

fn text_bound(out: &mut String, r: &BoundReport) {
    let mu = r.mu_upper.map_or_else(|| "n/a".to_string(), |m| format!("{m:.6}"));
    let _ = writeln!(out, "{} ({:?}): mu_upper {mu}", r.theorem, r.mode);
    for c in &r.conditions {
        let _ = writeln!(out, "  [{}] {}: {}", if c.ok { "x" } else { " " }, c.name, c.detail);
    }
}

fn dispatch(cli: Cli) -> Result<(i32, Body)> {
    match cli.command {
        Command::Eval { stream, limits } => eval(stream, limits),
        Command::Bound(args) => bound(args),
        Command::Nu {
            stream,
            n_max,
            exact_until,
            window,
            samples,
        } => nu(stream, n_max, exact_until, window, samples),
        Command::Construct {
            exponent,
            blocks,
            audit,
        } => construct(&exponent, blocks, audit),
        Command::Transform { op } => transform(op),
        Command::Verify { suite } => {
            let suite: Suite = suite.parse()?;
            let report = run_suite(suite);
            let code = if report.passed { EXIT_OK } else { EXIT_USAGE };
            Ok((code, Body::Verify(report)))
        }
        Command::List => Ok((EXIT_OK, Body::List(registry().to_vec()))),
    }
}

fn parse_list<T>(text: &str, parse: impl Fn(&str) -> Result<T>) -> Result<Vec<T>> {
    text.split([',', ':']).map(|t| parse(t.trim())).collect()
}

fn family_spec(name: &str, params: &[String], bitlen_cap: u64) -> Result<FamilySpec> {
    Ok(FamilySpec::parse(name, params.iter().map(String::as_str))?.with_bitlen_cap(bitlen_cap))
}

/// Stream selected by the arguments, with its label and an optional
/// framed evaluator for families.
fn resolve_stream(args: &StreamArgs) -> Result<(String, CoefficientStream, Option<crate::catalog::FamilyStream>)> {
    match (&args.family, &args.a, &args.b) {
        (Some(name), None, None) => {
            let fs = family_stream(&family_spec(name, &args.params, args.bitlen_cap)?)?;
            Ok((fs.spec.family.name().to_string(), fs.stream.clone(), Some(fs)))
        }
        (None, Some(a), Some(b)) => {
            if !args.params.is_empty() {
                return Err(CfError::Parse("--param needs --family".into()));
            }
            let a = parse_list(a, parse_biguint)?;
            let b = parse_list(b, parse_biguint)?;
            let stream = CoefficientStream::periodic(parse_biguint(&args.b0)?, a, b)?.with_bitlen_cap(args.bitlen_cap);
            Ok(("inline".to_string(), stream, None))
        }
        _ => Err(CfError::Parse("give either --family or both --a and --b".into())),
    }
}

fn eval(args: StreamArgs, limits: Limits) -> Result<(i32, Body)> {
    let width = parse_positive_rational(&limits.precision)?;
    if limits.max_terms == 0 {
        return Err(CfError::Parse("--max-terms must be at least 1".into()));
    }
    let (source, stream, fs) = resolve_stream(&args)?;
    let enclosure = match &fs {
        Some(fs) => fs.evaluate(&width, limits.max_terms)?,
        None => crate::cfcore::evaluate(&stream, &width, limits.max_terms)?,
    };
    let value = to_decimal(&enclosure.midpoint(), decimal_places_for(&width));
    Ok((
        EXIT_OK,
        Body::Eval(EvalReport {
            source,
            value,
            n_used: enclosure.n_used,
            enclosure,
        }),
    ))
}

fn need<T: Clone>(v: &Option<T>, flag: &str) -> Result<T> {
    v.clone().ok_or_else(|| CfError::Parse(format!("missing --{flag}")))
}

fn rat(v: &Option<String>, flag: &str) -> Result<BigRational> {
    parse_rational(&need(v, flag)?)
}

fn rat_or(v: &Option<String>, default: i64) -> Result<BigRational> {
    v.as_deref()
        .map_or_else(|| Ok(BigRational::from_integer(default.into())), parse_rational)
}

fn root(v: &Option<String>, flag: &str) -> Result<Root> {
    Root::parse(&need(v, flag)?)
}

fn growth_from_args(class: GrowthClass, a: &BoundArgs) -> Result<GrowthSpec> {
    Ok(match class {
        GrowthClass::Bounded => GrowthSpec::bounded(
            need(&a.a1, "a1")?,
            need(&a.a2, "a2")?,
            need(&a.b1, "b1")?,
            need(&a.b2, "b2")?,
        ),
        GrowthClass::Poly => {
            let beta1 = rat(&a.beta1, "beta1")?;
            let k1 = rat(&a.k1, "k1")?;
            GrowthSpec::Polynomial {
                alpha: rat(&a.alpha, "alpha")?,
                l: rat(&a.l, "l")?,
                beta2: a.beta2.as_deref().map_or_else(|| Ok(beta1.clone()), parse_rational)?,
                k2: a.k2.as_deref().map_or_else(|| Ok(k1.clone()), parse_rational)?,
                beta1,
                k1,
            }
        }
        GrowthClass::Exp => {
            let beta1 = root(&a.beta1, "beta1")?;
            let k1 = rat(&a.k1, "k1")?;
            GrowthSpec::Exponential {
                r: rat_or(&a.r, 1)?,
                alpha: root(&a.alpha, "alpha")?,
                l: rat(&a.l, "l")?,
                s1: rat_or(&a.s1, 1)?,
                beta2: a.beta2.as_deref().map_or_else(|| Ok(beta1.clone()), Root::parse)?,
                k2: a.k2.as_deref().map_or_else(|| Ok(k1.clone()), parse_rational)?,
                s2: rat_or(&a.s2, 1)?,
                beta1,
                k1,
            }
        }
    })
}

fn bound(args: BoundArgs) -> Result<(i32, Body)> {
    let (source, reports) = match (&args.family, args.class, args.nu) {
        (Some(name), None, None) => {
            let spec = family_spec(name, &args.params, DEFAULT_BITLEN_CAP)?;
            let reports = if args.all_routes {
                family_routes(&spec)?
            } else {
                vec![family_bound(&spec)?]
            };
            (spec.family.name().to_string(), reports)
        }
        (None, Some(class), None) => {
            let growth = growth_from_args(class, &args)?;
            let report = match class {
                GrowthClass::Bounded => bounded_bound(&growth)?,
                GrowthClass::Poly => poly_bound(&growth)?,
                GrowthClass::Exp => exp_bound(&growth)?,
            };
            (growth.class().to_string(), vec![report])
        }
        (None, None, Some(nu)) => {
            lemma_bound(nu)?;
            ("lemma".to_string(), vec![BoundReport::from_nu(nu, None)])
        }
        _ => return Err(CfError::Parse("give exactly one of --family, --class or --nu".into())),
    };
    // the primary report decides the status
    let code = if reports.first().is_some_and(BoundReport::condition_ok) {
        EXIT_OK
    } else {
        EXIT_CONDITION
    };
    Ok((code, Body::Bound(BoundOutput { source, reports })))
}

fn nu(args: StreamArgs, n_max: usize, exact_until: usize, window: f64, keep: usize) -> Result<(i32, Body)> {
    let (source, stream, _) = resolve_stream(&args)?;
    let opts = NuOptions {
        n_max,
        exact_until,
        window,
        ..NuOptions::default()
    };
    let trace: NuTrace = nu_estimate_with(&stream, opts)?;
    let lemma = trace.lemma_report();
    let step = if keep == 0 {
        usize::MAX
    } else {
        trace.samples.len().div_ceil(keep).max(1)
    };
    let samples = if keep == 0 {
        Vec::new()
    } else {
        trace.samples.iter().step_by(step).copied().collect()
    };
    Ok((
        EXIT_OK,
        Body::Nu(NuReport {
            source,
            n_max,
            empirical_nu: trace.empirical_nu,
            growth_max: trace.growth_max,
            window_start: trace.window_start,
            exact_until: trace.exact_until,
            overlap_max_rel_err: trace.overlap_max_rel_err,
            mode: trace.mode,
            lemma,
            samples,
        }),
    ))
}

fn construct(exponent: &str, blocks: usize, audit: bool) -> Result<(i32, Body)> {
    let s: Exponent = exponent.parse()?;
    if blocks == 0 {
        return Err(CfError::Parse("--blocks must be at least 1".into()));
    }
    let precision = Precision::from_env();
    let plan = prescribed_stream_with(&s, blocks, precision)?;
    let value = plan.value_enclosure().ok();
    let mut records = Vec::new();
    if audit {
        let depth = plan.quotients.len();
        let mut n = 1;
        while n + 2 <= depth {
            match approximation_audit_with(&plan, n, precision) {
                Ok(r) => records.push(r),
                Err(CfError::NeedsMorePrecision { .. }) => {}
                Err(e) => return Err(e),
            }
            n += 4;
        }
    }
    let code = if records.iter().all(|r| r.upper_holds && r.lower_holds != Some(false)) {
        EXIT_OK
    } else {
        EXIT_CONDITION
    };
    Ok((
        code,
        Body::Construct(ConstructReport {
            plan,
            value,
            audit: records,
        }),
    ))
}

fn transform(op: TransformOp) -> Result<(i32, Body)> {
    match op {
        TransformOp::Integerize {
            family,
            params,
            a,
            b,
            terms,
        } => integerize_cmd(family, &params, a, b, terms),
        TransformOp::Linear { measure, q, t, r } => {
            let input = IrrationalityMeasure::new(measure.omega, measure.c, measure.h)?;
            let output = transport_linear(&input, q, t, r)?;
            Ok((EXIT_OK, Body::Transport(TransportReport { input, output })))
        }
        TransformOp::Reciprocal { measure, tau } => {
            let input = IrrationalityMeasure::new(measure.omega, measure.c, measure.h)?;
            let output = transport_reciprocal(&input, tau.abs())?;
            Ok((EXIT_OK, Body::Transport(TransportReport { input, output })))
        }
    }
}

fn integerize_cmd(
    family: Option<String>,
    params: &[String],
    a: Option<String>,
    b: Option<String>,
    terms: usize,
) -> Result<(i32, Body)> {
    let (source, rational, integer, scaling) = match (family, a, b) {
        (Some(name), None, None) => {
            let fs = family_stream(&family_spec(&name, params, DEFAULT_BITLEN_CAP)?)?;
            let (Some(rational), Some(scaling)) = (fs.rational.clone(), fs.scaling.clone()) else {
                return Err(CfError::FamilyParam(format!("{name} has integer coefficients already")));
            };
            (fs.spec.family.name().to_string(), rational, fs.stream, scaling)
        }
        (None, Some(a), Some(b)) => {
            let a = parse_list(&a, parse_rational)?;
            let b = parse_list(&b, parse_rational)?;
            if a.iter().chain(&b).any(|x| !x.is_positive()) {
                return Err(CfError::InvalidValue("coefficients must be positive".into()));
            }
            let rational = RationalStream::new(BigRational::zero(), move |n| {
                Ok((a[(n - 1) % a.len()].clone(), b[(n - 1) % b.len()].clone()))
            });
            let (integer, scaling) = integerize(&rational)?;
            ("inline".to_string(), rational, integer, scaling)
        }
        _ => return Err(CfError::Parse("give either --family or both --a and --b".into())),
    };
    let exact = rational.convergents(terms)?;
    let mut state = crate::cfcore::ConvergentState::initial(integer.b0().clone());
    let mut out = Vec::with_capacity(terms);
    let mut preserved = true;
    for (n, expected) in exact.iter().enumerate().skip(1) {
        let (an, bn) = integer.term(n)?;
        state = state.advance(&an, &bn)?;
        let c = state.convergent();
        preserved &= c.to_rational() == *expected;
        out.push(IntegerTerm {
            n,
            scale: scaling.factor(n)?,
            a: an,
            b: bn,
            convergent: c,
        });
    }
    let code = if preserved { EXIT_OK } else { EXIT_CONDITION };
    Ok((
        code,
        Body::Integerize(IntegerizeReport {
            source,
            terms: out,
            values_preserved: preserved,
        }),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn go(args: &[&str]) -> Outcome {
        run(std::iter::once("gcfx").chain(args.iter().copied()))
    }

    #[test]
    fn usage_errors_exit_one() {
        assert_eq!(go(&[]).code, EXIT_USAGE);
        assert_eq!(go(&["eval"]).code, EXIT_USAGE);
        assert_eq!(go(&["eval", "--family", "nope"]).code, EXIT_USAGE);
        assert_eq!(go(&["verify", "bogus"]).code, EXIT_USAGE);
        assert_eq!(
            go(&["eval", "--a", "1", "--b", "1", "--precision", "0"]).code,
            EXIT_USAGE
        );
    }

    #[test]
    fn bounded_example() {
        let o = go(&[
            "bound", "--class", "bounded", "--a1", "1", "--a2", "2", "--b1", "2", "--b2", "2",
        ]);
        assert_eq!(o.code, EXIT_OK, "{}", o.stderr);
        let r: BoundOutput = serde_json::from_str(&o.stdout).unwrap();
        assert!((r.reports[0].mu_upper.unwrap() - 5.682).abs() < 1e-3);
    }

    #[test]
    fn violated_condition_still_reports() {
        let o = go(&[
            "bound", "--class", "bounded", "--a1", "1", "--a2", "2", "--b1", "1", "--b2", "1",
        ]);
        assert_eq!(o.code, EXIT_CONDITION);
        let r: BoundOutput = serde_json::from_str(&o.stdout).unwrap();
        assert!(r.reports[0].mu_upper.is_none());
    }

    #[test]
    fn non_convergence_exits_three() {
        let o = go(&[
            "eval",
            "--a",
            "1",
            "--b",
            "1",
            "--precision",
            "1e-30",
            "--max-terms",
            "5",
        ]);
        assert_eq!(o.code, EXIT_NON_CONVERGENCE);
        let e: ErrorReport = serde_json::from_str(&o.stdout).unwrap();
        assert_eq!(e.kind, "non_convergence");
    }

    #[test]
    fn golden_ratio_inline() {
        let o = go(&["eval", "--a", "1", "--b", "1", "--b0", "1", "--precision", "1e-10"]);
        assert_eq!(o.code, EXIT_OK);
        let r: EvalReport = serde_json::from_str(&o.stdout).unwrap();
        assert!(r.value.starts_with("1.6180339887"), "{}", r.value);
    }

    #[test]
    fn text_output() {
        let o = go(&["--output", "text", "list"]);
        assert_eq!(o.code, EXIT_OK);
        assert!(o.stdout.contains("rogers_ramanujan"));
    }

    #[test]
    fn transport_round_trip() {
        let o = go(&[
            "transform",
            "linear",
            "--omega",
            "2",
            "--c",
            "1",
            "--h",
            "1",
            "--q",
            "2",
            "--t",
            "3",
        ]);
        assert_eq!(o.code, EXIT_OK);
        let r: TransportReport = serde_json::from_str(&o.stdout).unwrap();
        assert!((r.output.c - 1.0 / 12.0).abs() < 1e-15);
        assert_eq!(r.output.h, 0.5);
    }

    #[test]
    fn inline_integerize() {
        let o = go(&["transform", "integerize", "--a", "1/2,3", "--b", "2/3", "--terms", "12"]);
        assert_eq!(o.code, EXIT_OK, "{}", o.stderr);
        let r: IntegerizeReport = serde_json::from_str(&o.stdout).unwrap();
        assert!(r.values_preserved);
        assert_eq!(r.terms.len(), 12);
    }
}
