//! Command-line front end: job parsing, dispatch and rendering.
//!
//! Exit codes are 0 on success, 1 on usage or input errors and 2 when the
//! engine reports an obstruction.

use std::path::PathBuf;

use clap::{Parser, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::field::{Automorphism, Derivation, FieldContext, FieldElement, FieldKind};
use crate::hensel::{commute_factors, hensel_lift, lift_root, primary_decomposition, ObstructionReport, Outcome};
use crate::localring::{is_almost_commutative_probe, LocalElement, LocalRing, LocalRingContext, RingKind};
use crate::ncpoly::{coeff_valuation_floor, reduce_poly, right_divmod, right_evaluate, LocalPoly};
use crate::oracle::{exhaustive_factor_search, series_power_check, volterra_mul_recursive_oracle, SearchSpace};
use crate::parse::{parse_field_element, parse_field_spec, split_call};
use crate::respoly::{factor_primepowers, ResiduePoly};

pub const EXIT_SUCCESS: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_OBSTRUCTED: i32 = 2;

pub const DEFAULT_PRECISION: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Subcommand {
    /// Lift a residue factorization f = f1*f2
    Lift,
    /// Lift a simple residue root to a right root
    Root,
    /// Find p1, q1 with p1*p = q1*q
    Commute,
    /// Split f along pairwise coprime prime-power blocks
    Decompose,
    /// Test whether gr(A) is commutative on sample coefficients
    Probe,
    /// Right-evaluate a polynomial at a ring element
    Eval,
}

impl Subcommand {
    pub fn as_str(self) -> &'static str {
        match self {
            Subcommand::Lift => "lift",
            Subcommand::Root => "root",
            Subcommand::Commute => "commute",
            Subcommand::Decompose => "decompose",
            Subcommand::Probe => "probe",
            Subcommand::Eval => "eval",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputMode {
    #[default]
    Text,
    Structured,
}

/// A validated job.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct JobSpec {
    pub subcommand: Subcommand,
    pub ring: String,
    pub poly: Option<String>,
    pub f1: Option<String>,
    pub f2: Option<String>,
    pub blocks: Vec<String>,
    pub at: Option<String>,
    pub samples: Vec<String>,
    pub p: Option<String>,
    pub q: Option<String>,
    pub precision: Option<usize>,
    pub output: OutputMode,
    pub verify: bool,
}

/// Job document as read from `--input`; same field names as [`JobSpec`].
#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct RawJob {
    subcommand: Option<Subcommand>,
    ring: Option<String>,
    poly: Option<String>,
    f1: Option<String>,
    f2: Option<String>,
    blocks: Vec<String>,
    at: Option<String>,
    samples: Vec<String>,
    p: Option<String>,
    q: Option<String>,
    precision: Option<usize>,
    output: Option<OutputMode>,
    verify: bool,
}

#[derive(Parser, Debug)]
#[command(name = "nchensel", version, about = "Hensel lifting over non-commutative local rings")]
struct Args {
    #[arg(value_enum)]
    subcommand: Option<Subcommand>,
    /// series(F, t, N=8), volterra(F, d/dt, N=8) or twisted(F, conj, N=8)
    #[arg(long)]
    ring: Option<String>,
    /// Polynomial over the ring, generator written `g`
    #[arg(long, allow_hyphen_values = true)]
    poly: Option<String>,
    /// Left residue factor
    #[arg(long, allow_hyphen_values = true)]
    f1: Option<String>,
    /// Right residue factor
    #[arg(long, allow_hyphen_values = true)]
    f2: Option<String>,
    /// Residue blocks, repeatable or separated by `;`
    #[arg(long, allow_hyphen_values = true)]
    blocks: Vec<String>,
    /// Residue root (root) or ring element (eval)
    #[arg(long, allow_hyphen_values = true)]
    at: Option<String>,
    /// Comma-separated residue field samples for probe
    #[arg(long, allow_hyphen_values = true)]
    samples: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    p: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    q: Option<String>,
    /// Overrides N in the ring spec
    #[arg(long)]
    precision: Option<usize>,
    #[arg(long, value_enum)]
    output: Option<OutputMode>,
    /// Cross-check the result with the brute-force oracles
    #[arg(long)]
    verify: bool,
    /// Read the job from a structured document
    #[arg(long)]
    input: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

/// What a run prints and how it exits.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JobReport {
    pub exit_code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// Splits at top-level occurrences of `sep`, ignoring empty pieces.
fn split_top_level(src: &str, sep: char) -> Vec<String> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut current = String::new();
    for c in src.chars() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            _ => {}
        }
        if c == sep && depth == 0 {
            out.push(std::mem::take(&mut current));
        } else {
            current.push(c);
        }
    }
    out.push(current);
    out.into_iter().map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect()
}

/// Parses arguments (without the program name) into a validated job.
pub fn parse_job<I, T>(argv: I) -> std::result::Result<JobSpec, UsageError>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let args = Args::try_parse_from(std::iter::once("nchensel".into()).chain(argv.into_iter().map(Into::into)))
        .map_err(|e| UsageError(e.to_string().trim_end().to_string()))?;
    let mut raw = match &args.input {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| UsageError(format!("--input: cannot read {}: {e}", path.display())))?;
            serde_json::from_str::<RawJob>(&text)
                .map_err(|e| UsageError(format!("--input: invalid job document: {e}")))?
        }
        None => RawJob::default(),
    };
    raw.subcommand = args.subcommand.or(raw.subcommand);
    raw.ring = args.ring.or(raw.ring);
    raw.poly = args.poly.or(raw.poly);
    raw.f1 = args.f1.or(raw.f1);
    raw.f2 = args.f2.or(raw.f2);
    raw.at = args.at.or(raw.at);
    raw.p = args.p.or(raw.p);
    raw.q = args.q.or(raw.q);
    raw.precision = args.precision.or(raw.precision);
    raw.output = args.output.or(raw.output);
    raw.verify |= args.verify;
    if !args.blocks.is_empty() {
        raw.blocks = args.blocks;
    }
    if let Some(s) = args.samples {
        raw.samples = vec![s];
    }
    validate(raw)
}

fn validate(raw: RawJob) -> std::result::Result<JobSpec, UsageError> {
    let subcommand = raw
        .subcommand
        .ok_or_else(|| UsageError("missing subcommand (lift, root, commute, decompose, probe, eval)".into()))?;
    let name = subcommand.as_str();
    let ring = raw
        .ring
        .ok_or_else(|| UsageError(format!("missing required --ring for `{name}`")))?;
    if raw.precision == Some(0) {
        return Err(UsageError("--precision must be at least 1".into()));
    }
    let required: &[(&str, bool)] = match subcommand {
        Subcommand::Lift => &[("--poly", raw.poly.is_some()), ("--f1", raw.f1.is_some()), ("--f2", raw.f2.is_some())],
        Subcommand::Root | Subcommand::Eval => &[("--poly", raw.poly.is_some()), ("--at", raw.at.is_some())],
        Subcommand::Commute => &[("--p", raw.p.is_some()), ("--q", raw.q.is_some())],
        Subcommand::Decompose => &[("--poly", raw.poly.is_some())],
        Subcommand::Probe => &[],
    };
    if let Some((flag, _)) = required.iter().find(|(_, present)| !present) {
        return Err(UsageError(format!("missing required {flag} for `{name}`")));
    }
    Ok(JobSpec {
        subcommand,
        ring,
        poly: raw.poly,
        f1: raw.f1,
        f2: raw.f2,
        blocks: raw.blocks.iter().flat_map(|b| split_top_level(b, ';')).collect(),
        at: raw.at,
        samples: raw.samples.iter().flat_map(|s| split_top_level(s, ',')).collect(),
        p: raw.p,
        q: raw.q,
        precision: raw.precision,
        output: raw.output.unwrap_or_default(),
        verify: raw.verify,
    })
}

fn parse_precision(arg: &str) -> Result<Option<usize>> {
    let Some(value) = arg.strip_prefix("N=").or_else(|| arg.strip_prefix("N =")) else {
        return Ok(None);
    };
    value
        .trim()
        .parse()
        .map(Some)
        .map_err(|_| Error::parse(0, format!("`{arg}` is not a valid precision")))
}

/// Ring specs: `series(F, t, N=8)`, `volterra(F, d/dt|zero, N=8)`,
/// `twisted(F, conj|id, N=8)`. Options after the field may be omitted.
pub fn parse_ring_spec(src: &str) -> Result<LocalRing> {
    let (name, mut args) = split_call(src)?;
    let mut precision = DEFAULT_PRECISION;
    if let Some(last) = args.last() {
        if let Some(n) = parse_precision(last)? {
            precision = n;
            args.pop();
        }
    }
    let Some(field_spec) = args.first() else {
        return Err(Error::parse(0, format!("ring spec `{}` needs a coefficient field", src.trim())));
    };
    let field = parse_field_spec(field_spec)?;
    let option = args.get(1).map(String::as_str);
    if args.len() > 2 {
        return Err(Error::parse(0, format!("too many arguments in ring spec `{}`", src.trim())));
    }
    match name.as_str() {
        "series" => LocalRingContext::commutative_series(field, option.unwrap_or("t"), precision),
        "volterra" => {
            let derivation = match option {
                Some("zero") => Derivation::Zero,
                Some(d) => {
                    let var = d.strip_prefix("d/d").map(str::trim);
                    if var.is_none() || var != field.variable_name() {
                        return Err(Error::InvalidContext(format!("`{d}` is not a derivation of {field}")));
                    }
                    Derivation::Variable
                }
                None if matches!(field.kind(), FieldKind::RationalFunctions { .. }) => Derivation::Variable,
                None => Derivation::Zero,
            };
            LocalRingContext::volterra(field.with_derivation(derivation)?, precision)
        }
        "twisted" => {
            let automorphism = match option {
                Some("conj") => Automorphism::Conjugation,
                Some("id") => Automorphism::Identity,
                Some(a) => return Err(Error::InvalidContext(format!("unknown automorphism `{a}`"))),
                None if matches!(field.kind(), FieldKind::GaussianRationals) => Automorphism::Conjugation,
                None => Automorphism::Identity,
            };
            LocalRingContext::twisted(field.with_automorphism(automorphism)?, precision)
        }
        other => Err(Error::parse(0, format!("unknown ring kind `{other}`"))),
    }
}

struct Check {
    name: &'static str,
    passed: bool,
    detail: String,
}

impl Check {
    fn new(name: &'static str, passed: bool, detail: impl Into<String>) -> Self {
        Check {
            name,
            passed,
            detail: detail.into(),
        }
    }
}

struct Execution {
    ring: LocalRing,
    result: Value,
    lines: Vec<String>,
    obstruction: Option<ObstructionReport>,
    checks: Vec<Check>,
}

fn series_json(a: &LocalElement) -> Value {
    let field = a.ring().field();
    Value::from(a.coeffs().iter().map(|c| field.format(c)).collect::<Vec<_>>())
}

fn poly_json(f: &LocalPoly) -> Value {
    Value::from(f.coeffs().iter().map(series_json).collect::<Vec<_>>())
}

fn residue_json(f: &ResiduePoly) -> Value {
    Value::from(f.coeffs().iter().map(|c| f.field().format(c)).collect::<Vec<_>>())
}

fn obstruction_json(r: &ObstructionReport) -> Value {
    json!({
        "stage": r.stage,
        "classification": r.classification.as_str(),
        "residual_leading_form": r.residual_leading_form.format(),
        "residual_leading_form_coefficients": residue_json(&r.residual_leading_form),
        "witness": poly_json(&r.witness),
        "witness_text": r.witness.pretty(),
    })
}

fn obstruction_lines(r: &ObstructionReport) -> Vec<String> {
    vec![
        format!("obstruction at stage {}", r.stage),
        format!("classification: {}", r.classification.as_str()),
        format!("residual leading form: {}", r.residual_leading_form.format()),
        format!("witness: {}", r.witness.pretty()),
    ]
}

fn flag<T>(name: &str, r: Result<T>) -> std::result::Result<T, String> {
    r.map_err(|e| format!("{name}: {e}"))
}

fn required<'a>(name: &str, v: &'a Option<String>) -> std::result::Result<&'a str, String> {
    v.as_deref().ok_or_else(|| format!("missing required {name}"))
}

/// `a b` with coefficient products from the recursive Volterra oracle.
fn oracle_product(a: &LocalPoly, b: &LocalPoly) -> Result<LocalPoly> {
    let ring = a.ring();
    if a.is_zero() || b.is_zero() {
        return Ok(LocalPoly::zero(ring));
    }
    let mut out = vec![LocalElement::zero(ring); a.coeffs().len() + b.coeffs().len() - 1];
    for (i, x) in a.coeffs().iter().enumerate() {
        for (j, y) in b.coeffs().iter().enumerate() {
            out[i + j] = &out[i + j] + &volterra_mul_recursive_oracle(x, y)?;
        }
    }
    LocalPoly::new(ring, out)
}

fn oracle_evaluate(f: &LocalPoly, a: &LocalElement) -> Result<LocalElement> {
    let ring = f.ring();
    let mut acc = LocalElement::zero(ring);
    let mut power = LocalElement::one(ring);
    for c in f.coeffs() {
        acc = &acc + &volterra_mul_recursive_oracle(c, &power)?;
        power = volterra_mul_recursive_oracle(&power, a)?;
    }
    Ok(acc)
}

fn product_checks(ring: &LocalRing, name: &'static str, lhs: (&LocalPoly, &LocalPoly), rhs: &LocalPoly, checks: &mut Vec<Check>) {
    checks.push(Check::new(name, &(lhs.0 * lhs.1) == rhs, "multiply back in A/m^N"));
    if ring.kind() == RingKind::Volterra {
        let ok = oracle_product(lhs.0, lhs.1).map(|p| &p == rhs).unwrap_or(false);
        checks.push(Check::new("volterra_recursive_product", ok, "product recomputed with the recursive oracle"));
    }
}

fn run_lift(spec: &JobSpec, ring: &LocalRing) -> std::result::Result<Execution, String> {
    let f = flag("--poly", LocalPoly::parse(ring, required("--poly", &spec.poly)?))?;
    let f1 = flag("--f1", ResiduePoly::parse(ring.field(), required("--f1", &spec.f1)?))?;
    let f2 = flag("--f2", ResiduePoly::parse(ring.field(), required("--f2", &spec.f2)?))?;
    let outcome = hensel_lift(&f, &f1, &f2).map_err(|e| e.to_string())?;
    let mut checks = Vec::new();
    let Some((big1, big2)) = outcome.factors else {
        let report = outcome.obstruction.expect("obstructed lift carries a report");
        if spec.verify {
            checks.push(witness_check(&report));
        }
        return Ok(Execution {
            ring: ring.clone(),
            result: json!({ "stages_completed": outcome.stages_completed }),
            lines: vec![format!("stages completed: {}", outcome.stages_completed)],
            obstruction: Some(report),
            checks,
        });
    };
    if spec.verify {
        product_checks(ring, "multiply_back", (&big1, &big2), &f, &mut checks);
        checks.push(Check::new(
            "reductions",
            reduce_poly(&big1) == f1 && reduce_poly(&big2) == f2,
            "factor reductions equal f1, f2",
        ));
        let degrees = (f1.degree().unwrap_or(0), f2.degree().unwrap_or(0));
        if ring.kind() == RingKind::CommutativeSeries && SearchSpace::new(ring, degrees.0, degrees.1).is_ok() {
            let check = match exhaustive_factor_search(&f, degrees.0, degrees.1) {
                Ok(found) => {
                    let matching: Vec<_> = found
                        .into_iter()
                        .filter(|(a, b)| reduce_poly(a) == f1 && reduce_poly(b) == f2)
                        .collect();
                    let ok = matching.len() == 1 && matching[0] == (big1.clone(), big2.clone());
                    Check::new("exhaustive_search", ok, format!("{} pair(s) with the given reductions", matching.len()))
                }
                Err(e) => Check::new("exhaustive_search", false, e.to_string()),
            };
            checks.push(check);
        }
    }
    Ok(Execution {
        ring: ring.clone(),
        result: json!({
            "factors": [poly_json(&big1), poly_json(&big2)],
            "factors_text": [big1.pretty(), big2.pretty()],
            "stages_completed": outcome.stages_completed,
        }),
        lines: vec![
            format!("lifted after {} stages", outcome.stages_completed),
            format!("F1 = {}", big1.pretty()),
            format!("F2 = {}", big2.pretty()),
        ],
        obstruction: None,
        checks,
    })
}

fn witness_check(r: &ObstructionReport) -> Check {
    let floor = coeff_valuation_floor(&r.witness);
    Check::new("witness_floor", floor == r.stage, format!("witness lies in m^{floor}[x]"))
}

/// `(e, c)` when `f = x^e - c` with constant `c`.
fn pure_power(f: &LocalPoly) -> Option<(usize, LocalElement)> {
    let e = f.degree()?;
    let middle_zero = f.coeffs()[1..e].iter().all(LocalElement::is_zero);
    (e >= 1 && middle_zero).then(|| (e, -&f.coeff(0)))
}

fn run_root(spec: &JobSpec, ring: &LocalRing) -> std::result::Result<Execution, String> {
    let f = flag("--poly", LocalPoly::parse(ring, required("--poly", &spec.poly)?))?;
    let r0 = flag("--at", parse_field_element(ring.field(), required("--at", &spec.at)?))?;
    let mut checks = Vec::new();
    match lift_root(&f, &r0).map_err(|e| e.to_string())? {
        Outcome::Lifted(a) => {
            if spec.verify {
                let value = right_evaluate(&f, &a).map_err(|e| e.to_string())?;
                checks.push(Check::new("right_evaluation", value.is_zero(), "f(a) = 0 in A/m^N"));
                checks.push(Check::new("residue", a.reduce() == r0, "a reduces to the given root"));
                if let Some((e, c)) = pure_power(&f) {
                    checks.push(Check::new("series_power", series_power_check(&a, &c, e), format!("a^{e} = {}", c.pretty())));
                }
                if ring.kind() == RingKind::Volterra {
                    let ok = oracle_evaluate(&f, &a).map(|v| v.is_zero()).unwrap_or(false);
                    checks.push(Check::new("volterra_recursive_evaluation", ok, "f(a) recomputed with the recursive oracle"));
                }
            }
            Ok(Execution {
                ring: ring.clone(),
                result: json!({ "root": series_json(&a), "root_text": a.pretty() }),
                lines: vec![format!("root = {}", a.pretty())],
                obstruction: None,
                checks,
            })
        }
        Outcome::Obstructed(report) => {
            if spec.verify {
                checks.push(witness_check(&report));
            }
            Ok(Execution {
                ring: ring.clone(),
                result: Value::Null,
                lines: vec!["no root lifts".into()],
                obstruction: Some(report),
                checks,
            })
        }
    }
}

fn run_commute(spec: &JobSpec, ring: &LocalRing) -> std::result::Result<Execution, String> {
    let p = flag("--p", LocalPoly::parse(ring, required("--p", &spec.p)?))?;
    let q = flag("--q", LocalPoly::parse(ring, required("--q", &spec.q)?))?;
    let mut checks = Vec::new();
    match commute_factors(&p, &q).map_err(|e| e.to_string())? {
        Outcome::Lifted((p1, q1)) => {
            if spec.verify {
                let (left, right) = (&p1 * &p, &q1 * &q);
                checks.push(Check::new("multiply_back", left == right, "p1*p = q1*q in A/m^N"));
                if ring.kind() == RingKind::Volterra {
                    let ok = match (oracle_product(&p1, &p), oracle_product(&q1, &q)) {
                        (Ok(a), Ok(b)) => a == b,
                        _ => false,
                    };
                    checks.push(Check::new("volterra_recursive_product", ok, "products recomputed with the recursive oracle"));
                }
                checks.push(Check::new(
                    "degrees",
                    p1.degree() == q.degree() && q1.degree() == p.degree() && q1.is_monic(),
                    "deg p1 = deg q, deg q1 = deg p, q1 monic",
                ));
            }
            Ok(Execution {
                ring: ring.clone(),
                result: json!({
                    "p1": poly_json(&p1),
                    "q1": poly_json(&q1),
                    "p1_text": p1.pretty(),
                    "q1_text": q1.pretty(),
                }),
                lines: vec![format!("p1 = {}", p1.pretty()), format!("q1 = {}", q1.pretty())],
                obstruction: None,
                checks,
            })
        }
        Outcome::Obstructed(report) => Ok(Execution {
            ring: ring.clone(),
            result: Value::Null,
            lines: Vec::new(),
            obstruction: Some(report),
            checks,
        }),
    }
}

fn run_decompose(spec: &JobSpec, ring: &LocalRing) -> std::result::Result<Execution, String> {
    let f = flag("--poly", LocalPoly::parse(ring, required("--poly", &spec.poly)?))?;
    let blocks = if spec.blocks.is_empty() {
        if !ring.field().is_finite() {
            return Err("--blocks is required unless the residue field is finite".into());
        }
        if !f.is_monic() {
            return Err(Error::NotMonic.to_string());
        }
        let factors = flag("--poly", factor_primepowers(&reduce_poly(&f)))?;
        factors.into_iter().map(|b| b.block).collect()
    } else {
        spec.blocks
            .iter()
            .map(|b| flag("--blocks", ResiduePoly::parse(ring.field(), b)))
            .collect::<std::result::Result<Vec<_>, _>>()?
    };
    let block_text: Vec<String> = blocks.iter().map(ResiduePoly::format).collect();
    let mut checks = Vec::new();
    match primary_decomposition(&f, &blocks).map_err(|e| e.to_string())? {
        Outcome::Lifted(parts) => {
            if spec.verify {
                let product = parts.iter().skip(1).fold(parts[0].clone(), |acc, p| &acc * p);
                checks.push(Check::new("multiply_back", product == f, "product of factors equals f in A/m^N"));
                if ring.kind() == RingKind::Volterra {
                    let ok = parts
                        .iter()
                        .skip(1)
                        .try_fold(parts[0].clone(), |acc, p| oracle_product(&acc, p))
                        .map(|p| p == f)
                        .unwrap_or(false);
                    checks.push(Check::new("volterra_recursive_product", ok, "product recomputed with the recursive oracle"));
                }
                let reductions = parts.iter().zip(&blocks).all(|(p, b)| &reduce_poly(p) == b);
                checks.push(Check::new("reductions", reductions, "factor reductions equal the blocks"));
            }
            let mut lines = vec![format!("blocks: {}", block_text.join("; "))];
            lines.extend(parts.iter().enumerate().map(|(i, p)| format!("p{} = {}", i + 1, p.pretty())));
            Ok(Execution {
                ring: ring.clone(),
                result: json!({
                    "blocks": block_text,
                    "factors": parts.iter().map(poly_json).collect::<Vec<_>>(),
                    "factors_text": parts.iter().map(LocalPoly::pretty).collect::<Vec<_>>(),
                }),
                lines,
                obstruction: None,
                checks,
            })
        }
        Outcome::Obstructed(report) => {
            if spec.verify {
                checks.push(witness_check(&report));
            }
            Ok(Execution {
                ring: ring.clone(),
                result: json!({ "blocks": block_text }),
                lines: vec![format!("blocks: {}", block_text.join("; "))],
                obstruction: Some(report),
                checks,
            })
        }
    }
}

fn default_samples(field: &FieldContext) -> Vec<FieldElement> {
    let mut out: Vec<FieldElement> = field.variable().into_iter().chain(field.imaginary_unit()).collect();
    out.push(field.from_int(2));
    out
}

fn run_probe(spec: &JobSpec, ring: &LocalRing) -> std::result::Result<Execution, String> {
    let field = ring.field();
    let samples = if spec.samples.is_empty() {
        default_samples(field)
    } else {
        spec.samples
            .iter()
            .map(|s| flag("--samples", parse_field_element(field, s)))
            .collect::<std::result::Result<Vec<_>, _>>()?
    };
    let probe = is_almost_commutative_probe(ring, &samples).map_err(|e| e.to_string())?;
    let sample_text: Vec<String> = samples.iter().map(|s| field.format(s)).collect();
    let mut checks = Vec::new();
    let (witness, mut lines) = match &probe.witness {
        Some(w) => (
            json!({
                "sample": field.format(&w.sample),
                "commutator": series_json(&w.commutator),
                "commutator_text": w.commutator.pretty(),
                "valuation": w.commutator.valuation(),
            }),
            vec![
                "not almost commutative".to_string(),
                format!("witness: g*a - a*g = {} for a = {}", w.commutator.pretty(), field.format(&w.sample)),
            ],
        ),
        None => (Value::Null, vec!["almost commutative".to_string()]),
    };
    if spec.verify {
        if let Some(w) = &probe.witness {
            checks.push(Check::new("witness_valuation", w.commutator.valuation() == 1, "commutator has valuation 1"));
        }
        if ring.kind() == RingKind::Volterra {
            let probe_ring = probe_precision(ring);
            let g = LocalElement::generator(&probe_ring);
            let ok = samples.iter().all(|s| {
                let a = LocalElement::constant(&probe_ring, s.clone());
                volterra_mul_recursive_oracle(&g, &a).is_ok_and(|v| v == &g * &a)
            });
            checks.push(Check::new("volterra_recursive_product", ok, "g*a recomputed with the recursive oracle"));
        }
    }
    lines.insert(0, format!("samples: {}", sample_text.join(", ")));
    Ok(Execution {
        ring: ring.clone(),
        result: json!({
            "almost_commutative": probe.almost_commutative,
            "samples": sample_text,
            "witness": witness,
        }),
        lines,
        obstruction: None,
        checks,
    })
}

/// The ring at the probe's working precision.
fn probe_precision(ring: &LocalRing) -> LocalRing {
    if ring.precision() < 2 {
        ring.with_precision(2).expect("valid ring")
    } else {
        ring.clone()
    }
}

fn run_eval(spec: &JobSpec, ring: &LocalRing) -> std::result::Result<Execution, String> {
    let f = flag("--poly", LocalPoly::parse(ring, required("--poly", &spec.poly)?))?;
    let a = flag("--at", LocalElement::parse(ring, required("--at", &spec.at)?))?;
    let value = right_evaluate(&f, &a).map_err(|e| e.to_string())?;
    let (quotient, remainder) = right_divmod(&f, &a).map_err(|e| e.to_string())?;
    let mut checks = Vec::new();
    if spec.verify {
        checks.push(Check::new("remainder_theorem", remainder == value, "remainder of division by x - a equals f(a)"));
        if ring.kind() == RingKind::Volterra {
            let ok = oracle_evaluate(&f, &a).is_ok_and(|v| v == value);
            checks.push(Check::new("volterra_recursive_evaluation", ok, "f(a) recomputed with the recursive oracle"));
        }
    }
    Ok(Execution {
        ring: ring.clone(),
        result: json!({
            "value": series_json(&value),
            "value_text": value.pretty(),
            "quotient": poly_json(&quotient),
            "quotient_text": quotient.pretty(),
        }),
        lines: vec![format!("f(a) = {}", value.pretty()), format!("quotient = {}", quotient.pretty())],
        obstruction: None,
        checks,
    })
}

fn execute(spec: &JobSpec) -> std::result::Result<Execution, String> {
    let mut ring = flag("--ring", parse_ring_spec(&spec.ring))?;
    if let Some(n) = spec.precision {
        ring = flag("--precision", ring.with_precision(n))?;
    }
    match spec.subcommand {
        Subcommand::Lift => run_lift(spec, &ring),
        Subcommand::Root => run_root(spec, &ring),
        Subcommand::Commute => run_commute(spec, &ring),
        Subcommand::Decompose => run_decompose(spec, &ring),
        Subcommand::Probe => run_probe(spec, &ring),
        Subcommand::Eval => run_eval(spec, &ring),
    }
}

fn document(
    command: Option<Subcommand>,
    status: &str,
    ring: Option<String>,
    input: Value,
    result: Value,
    obstruction: Value,
    verification: Value,
    error: Option<String>,
) -> String {
    let doc = json!({
        "command": command.map(Subcommand::as_str),
        "status": status,
        "ring": ring,
        "input": input,
        "result": result,
        "obstruction": obstruction,
        "verification": verification,
        "error": error,
    });
    serde_json::to_string_pretty(&doc).expect("json values serialize") + "\n"
}

fn error_report(spec: Option<&JobSpec>, structured: bool, message: String) -> JobReport {
    let stdout = if structured {
        let input = spec.map_or(Value::Null, |s| serde_json::to_value(s).expect("job serializes"));
        document(
            spec.map(|s| s.subcommand),
            "error",
            None,
            input,
            Value::Null,
            Value::Null,
            Value::Null,
            Some(message.clone()),
        )
    } else {
        String::new()
    };
    JobReport {
        exit_code: EXIT_INPUT,
        stdout,
        stderr: format!("error: {message}\n"),
    }
}

/// Runs a validated job.
pub fn run_job(spec: &JobSpec) -> JobReport {
    let structured = spec.output == OutputMode::Structured;
    let exec = match execute(spec) {
        Ok(exec) => exec,
        Err(message) => return error_report(Some(spec), structured, message),
    };
    let (status, exit_code) = match exec.obstruction {
        Some(_) => ("obstructed", EXIT_OBSTRUCTED),
        None => ("success", EXIT_SUCCESS),
    };
    let all_passed = exec.checks.iter().all(|c| c.passed);
    let mut stderr = String::new();
    for c in exec.checks.iter().filter(|c| !c.passed) {
        stderr.push_str(&format!("warning: verification `{}` failed: {}\n", c.name, c.detail));
    }
    let stdout = if structured {
        let verification = if spec.verify {
            json!({
                "passed": all_passed,
                "checks": exec.checks.iter().map(|c| json!({
                    "name": c.name,
                    "passed": c.passed,
                    "detail": c.detail,
                })).collect::<Vec<_>>(),
            })
        } else {
            Value::Null
        };
        document(
            Some(spec.subcommand),
            status,
            Some(exec.ring.to_string()),
            serde_json::to_value(spec).expect("job serializes"),
            exec.result,
            exec.obstruction.as_ref().map_or(Value::Null, obstruction_json),
            verification,
            None,
        )
    } else {
        let mut lines = vec![format!("ring: {}", exec.ring), format!("status: {status}")];
        lines.extend(exec.lines);
        if let Some(r) = &exec.obstruction {
            lines.extend(obstruction_lines(r));
        }
        if spec.verify {
            for c in &exec.checks {
                let mark = if c.passed { "ok" } else { "FAILED" };
                lines.push(format!("verify {}: {mark} ({})", c.name, c.detail));
            }
        }
        lines.join("\n") + "\n"
    };
    JobReport {
        exit_code,
        stdout,
        stderr,
    }
}

/// Parses and runs; usage errors exit with code 1.
pub fn run<I, T>(argv: I) -> JobReport
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let argv: Vec<std::ffi::OsString> = argv.into_iter().map(Into::into).collect();
    match parse_job(argv.clone()) {
        Ok(spec) => run_job(&spec),
        Err(UsageError(message)) => {
            if is_help_request(&argv) && !message.starts_with("error:") {
                return JobReport {
                    exit_code: EXIT_SUCCESS,
                    stdout: message + "\n",
                    stderr: String::new(),
                };
            }
            let structured = argv.windows(2).any(|w| w[0] == "--output" && w[1] == "structured")
                || argv.iter().any(|a| a == "--output=structured");
            error_report(None, structured, message)
        }
    }
}

fn is_help_request(argv: &[std::ffi::OsString]) -> bool {
    argv.iter().any(|a| a == "--help" || a == "-h" || a == "--version" || a == "-V")
}
