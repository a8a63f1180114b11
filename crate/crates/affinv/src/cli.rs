//! Command-line front end: classification, invariants, moduli catalog,
//! model matching, symmetry frames, orbit sweeps, the compatibility
//! obstruction table, recurrence elimination, and the verification suite.
//! All reports are JSON on standard output (`--format text` renders the
//! same content as indented lines).

use crate::error::{Error, Result};
use crate::expr::Mode;
use crate::homogeneity::{self, enumerate_families};
use crate::jets::{self, jet_deg};
use crate::normalform::{self, BranchLabel};
use crate::poly::{MultiPoly, Var};
use crate::recurrence::{self, ivar_deg};
use crate::relinv;
use crate::scalar::{parse_scalar, Scalar};
use crate::series::{series_from_file, series_to_file, SeriesFile, SurfaceGraph};
use crate::symmetry::{
    bracket_closure_residual, frame_fields, lie_bracket, tangency_defect, AffineVectorField,
};
use crate::verify;
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};
use std::collections::BTreeMap;

pub const REPORT_SCHEMA: &str = "affinv-report/1";

#[derive(Parser)]
#[command(name = "affinv", version, about = "Affine classification of graphed surfaces in 3-space")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct InputArgs {
    /// Coefficient file (JSON, as produced by `orbit`)
    #[arg(long = "in")]
    input: Option<String>,
    /// Closed-form expression in x and y
    #[arg(long)]
    expr: Option<String>,
    /// Truncation order
    #[arg(long, default_value_t = 8)]
    order: usize,
    /// Arithmetic for expression expansion: exact | approx
    #[arg(long, default_value = "exact")]
    mode: String,
    /// Output format: json | text
    #[arg(long, default_value = "json")]
    format: String,
}

#[derive(Args)]
struct ModelArgs {
    /// Model id N1..N10
    #[arg(long)]
    model: String,
    /// Parameter a (N1, N4)
    #[arg(long)]
    a: Option<String>,
    /// Parameter b (N1, N2, N3)
    #[arg(long)]
    b: Option<String>,
    /// Parameter t (N5)
    #[arg(long)]
    t: Option<String>,
    /// Parameter s (N6)
    #[arg(long)]
    s: Option<String>,
    #[arg(long, default_value_t = 8)]
    order: usize,
    #[arg(long, default_value = "json")]
    format: String,
}

#[derive(Subcommand)]
enum Cmd {
    /// Classify a surface into the branch tree and report its invariants
    Classify(InputArgs),
    /// Order-3 relative invariants and the factorization check
    Invariants(InputArgs),
    /// List the moduli equations and model families of a branch
    Moduli {
        #[arg(long, default_value = "B1")]
        branch: String,
        #[arg(long)]
        list: bool,
        #[arg(long, default_value = "json")]
        format: String,
    },
    /// Classify and match against the model catalog
    Match(InputArgs),
    /// Print a model's symmetry frame, brackets, and tangency check
    Symmetries(ModelArgs),
    /// Sweep a model's orbit surface and print the coefficient series
    Orbit(ModelArgs),
    /// Compatibility obstruction table of the doubly-degenerate branch
    Compat {
        #[arg(long, default_value_t = 4)]
        trunc: usize,
        #[arg(long = "max-order", default_value_t = 6)]
        max_order: usize,
        #[arg(long, default_value = "json")]
        format: String,
    },
    /// Print a branch recurrence table, optionally eliminated
    Recur {
        #[arg(long, default_value = "B1")]
        branch: String,
        #[arg(long)]
        eliminate: bool,
        #[arg(long, default_value = "json")]
        format: String,
    },
    /// Run the verification suite
    Verify {
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long, default_value = "json")]
        format: String,
    },
}

pub fn run_cli() -> i32 {
    let cli = Cli::parse();
    let (format, out) = match &cli.cmd {
        Cmd::Classify(a) => (a.format.clone(), cmd_classify(a)),
        Cmd::Invariants(a) => (a.format.clone(), cmd_invariants(a)),
        Cmd::Moduli { branch, list, format } => (format.clone(), cmd_moduli(branch, *list)),
        Cmd::Match(a) => (a.format.clone(), cmd_match(a)),
        Cmd::Symmetries(a) => (a.format.clone(), cmd_symmetries(a)),
        Cmd::Orbit(a) => (a.format.clone(), cmd_orbit(a)),
        Cmd::Compat { trunc, max_order, format } => (format.clone(), cmd_compat(*trunc, *max_order)),
        Cmd::Recur { branch, eliminate, format } => (format.clone(), cmd_recur(branch, *eliminate)),
        Cmd::Verify { suite, format } => (format.clone(), cmd_verify(suite)),
    };
    match out {
        Ok((report, code)) => {
            emit(&report, &format);
            code
        }
        Err(e) => {
            let code = exit_code(&e);
            emit(
                &json!({ "schema": REPORT_SCHEMA, "error": e.to_string(), "exit": code }),
                &format,
            );
            code
        }
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::UndecidableAtOrder(_) => 3,
        _ => 2,
    }
}

fn emit(v: &Value, format: &str) {
    use std::io::Write;
    let text = if format == "text" {
        let mut buf = String::new();
        render_text(v, 0, &mut buf);
        buf
    } else {
        format!("{}\n", serde_json::to_string_pretty(v).unwrap())
    };
    // tolerate a closed pipe on the consumer side
    let _ = std::io::stdout().write_all(text.as_bytes());
}

fn render_text(v: &Value, indent: usize, buf: &mut String) {
    use std::fmt::Write;
    let pad = "  ".repeat(indent);
    match v {
        Value::Object(m) => {
            for (k, val) in m {
                match val {
                    Value::Object(_) | Value::Array(_) => {
                        let _ = writeln!(buf, "{pad}{k}:");
                        render_text(val, indent + 1, buf);
                    }
                    _ => {
                        let _ = writeln!(buf, "{pad}{k}: {}", scalar_text(val));
                    }
                }
            }
        }
        Value::Array(items) => {
            for it in items {
                match it {
                    Value::Object(_) | Value::Array(_) => render_text(it, indent, buf),
                    _ => {
                        let _ = writeln!(buf, "{pad}- {}", scalar_text(it));
                    }
                }
            }
        }
        _ => {
            let _ = writeln!(buf, "{pad}{}", scalar_text(v));
        }
    }
}

fn scalar_text(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

// ---------------------------------------------------------------------------
// input loading and rendering helpers

fn load_surface(a: &InputArgs) -> Result<SurfaceGraph> {
    if let Some(text) = &a.expr {
        if a.mode == "approx" {
            let ast = crate::expr::parse(text)?;
            let s = crate::expr::expand_in(&ast, a.order, Mode::Approx)?;
            return Ok(SurfaceGraph::at_origin(s));
        }
        return SurfaceGraph::from_expr(text, a.order);
    }
    if let Some(path) = &a.input {
        let data = std::fs::read_to_string(path)
            .map_err(|e| Error::UnsupportedBranch(format!("cannot read {path}: {e}")))?;
        let file: SeriesFile = serde_json::from_str(&data)
            .map_err(|e| Error::UnsupportedBranch(format!("bad surface file {path}: {e}")))?;
        return Ok(SurfaceGraph::at_origin(series_from_file(&file)?));
    }
    Err(Error::UnsupportedBranch(
        "provide a surface via --in or --expr".into(),
    ))
}

fn inv_json(m: &BTreeMap<(usize, usize), Scalar>) -> Value {
    let mut o = serde_json::Map::new();
    for ((j, k), v) in m {
        o.insert(format!("I{j},{k}"), Value::String(v.encode()));
    }
    Value::Object(o)
}

fn var_name(v: Var, letter: char) -> String {
    match v {
        crate::homogeneity::PARAM_A => "a".into(),
        crate::homogeneity::PARAM_B => "b".into(),
        jets::RAD_R => "r".into(),
        _ => {
            let (j, k) = ivar_deg(v);
            format!("{letter}{j},{k}")
        }
    }
}

/// Render a polynomial with `letter`-named indexed variables.
fn poly_text(p: &MultiPoly, letter: char) -> String {
    if p.terms.is_empty() {
        return "0".into();
    }
    let mut parts = Vec::new();
    for (m, c) in &p.terms {
        let mut t = c.to_string();
        for &(v, e) in m {
            t.push_str(&format!(" {}", var_name(v, letter)));
            if e > 1 {
                t.push_str(&format!("^{e}"));
            }
        }
        parts.push(t);
    }
    parts.join(" + ")
}

fn eps_text(p: &jets::EpsElem) -> String {
    if p.terms.is_empty() {
        return "0".into();
    }
    let mut parts = Vec::new();
    for (m, c) in &p.terms {
        let mut t = c.encode();
        for &(v, e) in m {
            let (j, k) = jet_deg(v);
            t.push_str(&format!(" u{j},{k}"));
            if e > 1 {
                t.push_str(&format!("^{e}"));
            }
        }
        parts.push(t);
    }
    parts.join(" + ")
}

fn field_json(f: &AffineVectorField) -> Value {
    json!({
        "linear": f.lin.iter()
            .map(|row| row.iter().map(|v| v.encode()).collect::<Vec<_>>())
            .collect::<Vec<_>>(),
        "constant": f.cst.iter().map(|v| v.encode()).collect::<Vec<_>>(),
    })
}

fn parse_branch(text: &str) -> Result<BranchLabel> {
    match text {
        "B1" | "B1." => Ok(BranchLabel::B1),
        "B2.1" | "B21" => Ok(BranchLabel::B21),
        "B2.2.1" | "B221" => Ok(BranchLabel::B221),
        "B2.2.2" | "B222" => Ok(BranchLabel::B222),
        "B3.1" | "B31" => Ok(BranchLabel::B31),
        "B3.2" | "B32" => Ok(BranchLabel::B32),
        other => Err(Error::UnsupportedBranch(other.into())),
    }
}

fn model_params(a: &ModelArgs) -> Result<BTreeMap<char, Scalar>> {
    let mut m = BTreeMap::new();
    for (c, v) in [('a', &a.a), ('b', &a.b), ('t', &a.t), ('s', &a.s)] {
        if let Some(text) = v {
            m.insert(c, parse_scalar(text)?);
        }
    }
    Ok(m)
}

fn step_text(s: &crate::regraph::Step) -> String {
    use crate::regraph::Step;
    match s {
        Step::Translate { x0, y0 } => format!("translate({}, {})", x0.encode(), y0.encode()),
        Step::Linear { a, b, c, d } => format!(
            "linear([{}, {}; {}, {}])",
            a.encode(),
            b.encode(),
            c.encode(),
            d.encode()
        ),
        Step::Shear { c } => format!("shear({})", c.encode()),
        Step::Swap => "swap".into(),
        Step::Scale { mu, lambda } => format!("scale({}, {})", mu.encode(), lambda.encode()),
        Step::G1 { mu, lambda, k, l } => format!(
            "graphScale({}, {}, {}, {})",
            mu.encode(),
            lambda.encode(),
            k.encode(),
            l.encode()
        ),
    }
}

type Report = Result<(Value, i32)>;

// ---------------------------------------------------------------------------
// commands

fn cmd_classify(a: &InputArgs) -> Report {
    let s = load_surface(a)?;
    let nf = normalform::classify(&s, a.order)?;
    Ok((
        json!({
            "schema": REPORT_SCHEMA,
            "command": "classify",
            "order": a.order,
            "branch": nf.branch.as_str(),
            "invariants": inv_json(&nf.invariants),
            "decidedToOrder": nf.decided_to_order,
            "transformChain": nf.transform.steps.iter()
                .map(step_text).collect::<Vec<_>>(),
            "stabilizer": nf.residual_stabilizer,
        }),
        0,
    ))
}

fn cmd_invariants(a: &InputArgs) -> Report {
    let s = load_surface(a)?;
    let p = relinv::pick_numerator(&s.series);
    let i30 = relinv::rel_i30(&s.series)?;
    let printed = relinv::rel_i30_printed(&s.series)?;
    let block = relinv::order4_g_block(&s.series)?;
    let (lhs, rhs, sign) = relinv::pick_factorization_check(&s.series)?;
    Ok((
        json!({
            "schema": REPORT_SCHEMA,
            "command": "invariants",
            "pickNumerator": p.encode(),
            "relI30": i30.encode(),
            "relI30Printed": printed.encode(),
            "order4Block": block.iter().map(|v| v.encode()).collect::<Vec<_>>(),
            "factorization": { "lhs": lhs.encode(), "rhs": rhs.encode(), "sign": sign },
        }),
        0,
    ))
}

fn cmd_moduli(branch: &str, list: bool) -> Report {
    let b = parse_branch(branch)?;
    let eqs = homogeneity::moduli_equations(b)?;
    let mut report = json!({
        "schema": REPORT_SCHEMA,
        "command": "moduli",
        "branch": b.as_str(),
        "equations": eqs.iter().map(|e| format!("0 = {}", poly_text(e, 'I'))).collect::<Vec<_>>(),
    });
    if list {
        let fams: Vec<Value> = enumerate_families(b)
            .iter()
            .map(|f| {
                json!({
                    "id": f.id,
                    "params": f.params.iter().collect::<String>(),
                    "invariants": f.assignments.iter().map(|((j,k), r)| {
                        let num = poly_text(&r.num, 'I');
                        let den = poly_text(&r.den, 'I');
                        let val = if den == "1" { num } else { format!("({num})/({den})") };
                        format!("I{j},{k} = {val}")
                    }).collect::<Vec<_>>(),
                    "closedForm": f.closed_form,
                })
            })
            .collect();
        report["families"] = Value::Array(fams);
    }
    Ok((report, 0))
}

fn cmd_match(a: &InputArgs) -> Report {
    let s = load_surface(a)?;
    let nf = normalform::classify(&s, a.order)?;
    let matches = homogeneity::match_model(&nf)?;
    Ok((
        json!({
            "schema": REPORT_SCHEMA,
            "command": "match",
            "branch": nf.branch.as_str(),
            "invariants": inv_json(&nf.invariants),
            "matches": matches.iter().map(|m| json!({
                "model": m.family,
                "params": m.params.iter()
                    .map(|(k, v)| (k.to_string(), Value::String(v.encode())))
                    .collect::<serde_json::Map<_,_>>(),
            })).collect::<Vec<_>>(),
        }),
        0,
    ))
}

fn model_frame(a: &ModelArgs) -> Result<(BranchLabel, Vec<AffineVectorField>, BTreeMap<(usize, usize), Scalar>)> {
    let fam = verify::find_family(&a.model)
        .ok_or_else(|| Error::UnsupportedBranch(format!("unknown model {}", a.model)))?;
    let mut params = model_params(a)?;
    if params.is_empty() {
        params = verify::sample_params(&a.model);
    }
    let inv = if fam.closed_form.is_some() {
        BTreeMap::new()
    } else {
        crate::homogeneity::family_invariants(&fam, &params)?
    };
    let fields = frame_fields(fam.branch, &inv)?;
    Ok((fam.branch, fields, inv))
}

fn cmd_symmetries(a: &ModelArgs) -> Report {
    let (branch, fields, inv) = model_frame(a)?;
    let fam = verify::find_family(&a.model).unwrap();
    let surface = if let Some(cf) = fam.closed_form {
        SurfaceGraph::from_expr(cf, a.order + 1)?.series
    } else {
        verify::sweep_any_pair(&fields, a.order + 1)?
    };
    let defects: Vec<bool> = fields
        .iter()
        .map(|f| Ok(tangency_defect(f, &surface, a.order)?.is_zero()))
        .collect::<Result<_>>()?;
    let mut brackets = Vec::new();
    for i in 0..fields.len() {
        for j in (i + 1)..fields.len() {
            brackets.push(json!({
                "pair": format!("[e{},e{}]", i + 1, j + 1),
                "field": field_json(&lie_bracket(&fields[i], &fields[j])),
            }));
        }
    }
    let closure = if matches!(branch, BranchLabel::B1 | BranchLabel::B21) {
        Some(bracket_closure_residual(branch, &inv)?.is_zero())
    } else {
        None
    };
    Ok((
        json!({
            "schema": REPORT_SCHEMA,
            "command": "symmetries",
            "model": a.model,
            "branch": branch.as_str(),
            "fields": fields.iter().map(field_json).collect::<Vec<_>>(),
            "brackets": brackets,
            "tangentThroughOrder": a.order,
            "tangencyDefectZero": defects,
            "bracketCloses": closure,
        }),
        0,
    ))
}

fn cmd_orbit(a: &ModelArgs) -> Report {
    let (_, fields, _) = model_frame(a)?;
    let fam = verify::find_family(&a.model).unwrap();
    let s = if let Some(cf) = fam.closed_form {
        SurfaceGraph::from_expr(cf, a.order)?.series
    } else {
        verify::sweep_any_pair(&fields, a.order)?
    };
    let file = series_to_file(&s, "factorial");
    Ok((
        json!({
            "schema": REPORT_SCHEMA,
            "command": "orbit",
            "model": a.model,
            "surface": serde_json::to_value(&file).unwrap(),
        }),
        0,
    ))
}

fn cmd_compat(trunc: usize, max_order: usize) -> Report {
    let obs = jets::compatibility_obstructions(trunc, max_order)?;
    Ok((
        json!({
            "schema": REPORT_SCHEMA,
            "command": "compat",
            "obstructions": obs.iter().map(|o| json!({
                "coordinate": format!("u{},{}", o.coord.0, o.coord.1),
                "viaCubicChain": eps_text(&o.via03),
                "viaQuarticChain": eps_text(&o.via40),
                "difference": eps_text(&o.difference),
            })).collect::<Vec<_>>(),
        }),
        0,
    ))
}

fn cmd_recur(branch: &str, eliminate: bool) -> Report {
    let b = parse_branch(branch)?;
    let t = recurrence::table(b)?;
    let mut report = json!({
        "schema": REPORT_SCHEMA,
        "command": "recur",
        "branch": b.as_str(),
        "table": t.eqs.iter().map(|e| {
            let d = match e.dir { jets::Dir::X => "Dx", jets::Dir::Y => "Dy" };
            format!("{d} I{},{} = {}", e.target.0, e.target.1, poly_text(&e.rhs, 'I'))
        }).collect::<Vec<_>>(),
    });
    if eliminate {
        let conds = if b == BranchLabel::B1 {
            recurrence::eliminate_homogeneous(&t, &recurrence::default_b1_unknowns())
        } else {
            recurrence::eliminate_homogeneous(&t, &[])
        };
        report["conditions"] = Value::Array(
            conds
                .iter()
                .map(|c| Value::String(format!("0 = {}", poly_text(c, 'I'))))
                .collect(),
        );
    }
    Ok((report, 0))
}

fn cmd_verify(suite: &str) -> Report {
    let results = match suite {
        "all" => verify::run_all(),
        id => {
            let n: usize = id
                .parse()
                .map_err(|_| Error::UnsupportedBranch(format!("unknown suite {id}")))?;
            vec![verify::run_one(n)]
        }
    };
    let all_pass = results.iter().all(|r| r.pass);
    Ok((
        json!({
            "schema": REPORT_SCHEMA,
            "command": "verify",
            "criteria": results.iter().map(|r| json!({
                "id": r.id,
                "name": r.name,
                "pass": r.pass,
                "detail": r.detail,
            })).collect::<Vec<_>>(),
            "allPass": all_pass,
        }),
        if all_pass { 0 } else { 1 },
    ))
}
