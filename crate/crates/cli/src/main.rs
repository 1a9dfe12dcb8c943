#[cfg_attr(not(feature = "lmfdb"), allow(dead_code))]
mod lmfdb;
mod output;

use std::collections::BTreeSet;
use std::io::{self, Write};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use output::{emit, row, Format, Row};
use wildtate::catalog::{catalog, lookup, run_entry, CatalogEntry};
use wildtate::expr::parse_rational;
use wildtate::isogeny::{phi2_eval, phi2_parametrization};
use wildtate::supersingular::sweep_grid;
use wildtate::{
    classify_2isogeny_valuations, parse_field, predicted_type, run_points, run_with_retries, tate, twist, velu_2isogeny, verify, Elem,
    Error, ExtensionSpec, FieldCtx, RetryPolicy, Valuation, Verification, WeierstrassEq,
};

#[derive(Debug)]
pub enum CliError {
    Lib(Error),
    Network(String),
    Io(io::Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Lib(e)
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e)
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Lib(
                Error::PrecisionLoss
                | Error::ResidueFieldTooSmall { .. }
                | Error::RetriesExhausted { .. }
                | Error::Internal(_)
                | Error::DivisionByZero
                | Error::NoSquareRoot
                | Error::NegativeValuation,
            )
            | CliError::Network(_)
            | CliError::Io(_) => 3,
            CliError::Lib(_) => 2,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Lib(e) => write!(f, "{e}"),
            CliError::Network(e) => write!(f, "network error: {e}"),
            CliError::Io(e) => write!(f, "{e}"),
        }
    }
}

#[derive(Parser)]
#[command(name = "wildtate", version, about = "Reduction types of elliptic curves over 2-adic and Laurent series fields")]
struct Cli {
    /// Field descriptor, e.g. `mixed(k=1,eis="z^2-2")` or `equichar(k=2)`.
    #[arg(long, global = true, default_value = "mixed(k=1,eis=\"z-2\")")]
    field: String,
    /// Working precision in uniformizer digits.
    #[arg(long, global = true)]
    prec: Option<u32>,
    #[arg(long, global = true, value_enum, default_value = "table")]
    format: Format,
    /// Print the steps of Tate's algorithm.
    #[arg(long, global = true)]
    trace: bool,
    /// Cap on precision and residue-degree doublings (at most 4 and 3).
    #[arg(long, global = true, default_value_t = 4)]
    max_retries: u32,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Kodaira type and minimal model.
    Tate { curve: String },
    /// Ramification break of a quadratic extension, checked against its different.
    Slk { ext: String },
    /// Quadratic twist of a curve.
    Twist { curve: String, ext: String },
    /// Type predicted from v(j) and the break s (`vj=12 s=7`; `vj=inf` for j = 0).
    Predict { vj: String, s: String },
    /// Predicted against computed type for an additive curve.
    Verify { curve: String, ext: String },
    /// Quotient by the 2-torsion point with abscissa x0.
    Isogeny2 { curve: String, x0: String },
    /// Evaluate Phi_2 at rationals X Y, or the parametrization at --t.
    Phi2 {
        #[arg(long, conflicts_with_all = ["x", "y"])]
        t: Option<String>,
        #[arg(required_unless_present = "t")]
        x: Option<String>,
        #[arg(required_unless_present = "t")]
        y: Option<String>,
    },
    /// Verification sweep: `scan equichar s=1..11:odd u=1..6,inf k=1,2,4`,
    /// `scan mixed eis=z^2-2,z^3-2`.
    Scan {
        #[arg(value_parser = ["equichar", "mixed"])]
        regime: String,
        ranges: Vec<String>,
    },
    /// Run catalog entries (all when no label is given).
    Catalog { label: Option<String> },
    /// Look up a curve by LMFDB label, vendored first, then online.
    Lmfdb { label: String },
}

struct Ctx {
    field: FieldCtx,
    policy: RetryPolicy,
    format: Format,
    trace: bool,
}

impl Ctx {
    fn retry<T>(&self, job: impl FnMut(&FieldCtx) -> wildtate::Result<T>) -> Result<T, CliError> {
        Ok(run_with_retries(&self.field, self.policy, job)?)
    }
}

/// Outcome of a command: rows to print and whether everything matched.
struct Done {
    rows: Vec<Row>,
    matched: bool,
    extra: Vec<String>,
}

impl Done {
    fn ok(rows: Vec<Row>) -> Self {
        Done { rows, matched: true, extra: Vec::new() }
    }
}

fn strip_key<'a>(text: &'a str, key: &str) -> &'a str {
    text.strip_prefix(key).and_then(|r| r.strip_prefix('=')).unwrap_or(text)
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Lib(Error::InconsistentInput(msg.into()))
}

fn vj_text(v: Valuation) -> Value {
    match v {
        Valuation::Finite(n) => json!(n),
        Valuation::Infinite => json!("inf"),
    }
}

fn cmd_tate(c: &Ctx, curve: &str) -> Result<Done, CliError> {
    let (e, r) = c.retry(|f| {
        let e = WeierstrassEq::parse(f, curve)?;
        let r = tate(&e)?;
        Ok((e, r))
    })?;
    let mut out = Row::new();
    out.insert("field".into(), json!(e.ctx().to_string()));
    out.insert("curve".into(), json!(e.to_string()));
    out.insert("type".into(), json!(r.kodaira.to_string()));
    out.insert("v_delta_min".into(), json!(r.v_delta_min));
    out.insert("restarts".into(), json!(r.restarts));
    out.insert("minimal_model".into(), json!(r.minimal_model.to_string()));
    let trace: Vec<String> = r.trace.iter().map(ToString::to_string).collect();
    if c.trace && c.format == Format::Jsonl {
        out.insert("trace".into(), json!(trace));
    }
    let extra = if c.trace && c.format != Format::Jsonl { trace } else { Vec::new() };
    Ok(Done { rows: vec![out], matched: true, extra })
}

fn cmd_slk(c: &Ctx, ext: &str) -> Result<Done, CliError> {
    let (x, s, d) = c.retry(|f| {
        let x = ExtensionSpec::parse(f, ext)?;
        Ok((x.to_string(), x.break_s()?, x.different_valuation()?))
    })?;
    let ok = s + 1 == d;
    let out = row(&json!({"ext": x, "s": s, "different": d, "oracle": if ok { "ok" } else { "mismatch" }}));
    Ok(Done { rows: vec![out], matched: ok, extra: Vec::new() })
}

fn cmd_twist(c: &Ctx, curve: &str, ext: &str) -> Result<Done, CliError> {
    let t = c.retry(|f| twist(&WeierstrassEq::parse(f, curve)?, &ExtensionSpec::parse(f, ext)?))?;
    Ok(Done::ok(vec![row(&json!({"twist": t.to_string(), "equation": t.equation()}))]))
}

fn cmd_predict(vj: &str, s: &str) -> Result<Done, CliError> {
    let vj_s = strip_key(vj, "vj");
    let vj: Valuation = vj_s.parse().map_err(|_| usage(format!("bad valuation {vj_s:?}")))?;
    let s_s = strip_key(s, "s");
    let s: u32 = s_s.parse().map_err(|_| usage(format!("bad break {s_s:?}")))?;
    let p = predicted_type(vj, s)?;
    let out = row(&json!({"vj": vj_text(vj), "s": s, "case": format!("{:?}", p.case), "f": p.f, "type": p.kodaira.to_string()}));
    Ok(Done::ok(vec![out]))
}

fn cmd_verify(c: &Ctx, curve: &str, ext: &str) -> Result<Done, CliError> {
    match c.retry(|f| verify(&WeierstrassEq::parse(f, curve)?, &ExtensionSpec::parse(f, ext)?))? {
        Verification::Checked(r) => Ok(Done { matched: r.matched, rows: vec![row(&r)], extra: Vec::new() }),
        Verification::NotApplicable(why) => {
            Ok(Done { rows: vec![row(&json!({"status": "not applicable", "reason": why}))], matched: false, extra: Vec::new() })
        }
    }
}

fn cmd_isogeny2(c: &Ctx, curve: &str, x0: &str) -> Result<Done, CliError> {
    let out = c.retry(|f| {
        let e = WeierstrassEq::parse(f, curve)?;
        let pair = velu_2isogeny(&e, &Elem::parse(f, x0)?)?;
        let (j1, j2) = (pair.source.j()?, pair.target.j()?);
        let (v1, v2) = (j1.valuation()?, j2.valuation()?);
        let phi = phi2_eval(&j1, &j2)?;
        let case = if v1 > Valuation::Finite(0) && v2 > Valuation::Finite(0) {
            classify_2isogeny_valuations(v1, v2, f.v2().expect("mixed"), false)?.to_string()
        } else {
            "j-valuations not positive".to_string()
        };
        Ok(json!({
            "source": pair.source.to_string(),
            "target": pair.target.to_string(),
            "kernel_x": pair.kernel_x.to_string(),
            "j_source": j1.to_string(),
            "j_target": j2.to_string(),
            "vj_source": vj_text(v1),
            "vj_target": vj_text(v2),
            "phi2_vanishes": phi.is_zero_to_precision(),
            "type_source": tate(&pair.source)?.kodaira.to_string(),
            "type_target": tate(&pair.target)?.kodaira.to_string(),
            "valuation_case": case,
        }))
    })?;
    let matched = out["phi2_vanishes"] == json!(true);
    Ok(Done { rows: vec![row(&out)], matched, extra: Vec::new() })
}

fn cmd_phi2(t: Option<&str>, x: Option<&str>, y: Option<&str>) -> Result<Done, CliError> {
    let out = match (t, x, y) {
        (Some(t), _, _) => {
            let (x, y) = phi2_parametrization(&parse_rational(t)?)?;
            json!({"t": t, "x": x.to_string(), "y": y.to_string()})
        }
        (None, Some(x), Some(y)) => {
            let v = phi2_eval(&parse_rational(x)?, &parse_rational(y)?)?;
            json!({"x": x, "y": y, "phi2": v.to_string()})
        }
        _ => return Err(usage("phi2 needs X Y or --t")),
    };
    Ok(Done::ok(vec![row(&out)]))
}

/// `a..b`, `a..b:odd`, and comma lists of those; `inf` allowed where noted.
fn parse_set(text: &str, allow_inf: bool) -> Result<BTreeSet<Option<u32>>, CliError> {
    let mut out = BTreeSet::new();
    for part in text.split(',') {
        if part == "inf" && allow_inf {
            out.insert(None);
            continue;
        }
        let (range, odd) = match part.strip_suffix(":odd") {
            Some(r) => (r, true),
            None => (part, false),
        };
        let bad = || usage(format!("bad range {part:?}"));
        let (lo, hi) = match range.split_once("..") {
            Some((a, b)) => (a.parse::<u32>().map_err(|_| bad())?, b.parse::<u32>().map_err(|_| bad())?),
            None => {
                let v = range.parse::<u32>().map_err(|_| bad())?;
                (v, v)
            }
        };
        out.extend((lo..=hi).filter(|v| !odd || v % 2 == 1).map(Some));
    }
    Ok(out)
}

fn cmd_scan(c: &Ctx, regime: &str, ranges: &[String]) -> Result<Done, CliError> {
    let mut s_set = None;
    let mut u_set = parse_set("1..6,inf", true)?;
    let mut ks = vec![1];
    let mut eis = vec!["z-2".to_string(), "z^2-2".into(), "z^3-2".into()];
    if regime == "equichar" {
        ks = vec![1, 2, 4];
    }
    for r in ranges {
        let (key, val) = r.split_once('=').ok_or_else(|| usage(format!("expected key=value, got {r:?}")))?;
        match key {
            "s" => s_set = Some(parse_set(val, false)?),
            "u" => u_set = parse_set(val, true)?,
            "k" => ks = val.split(',').map(|k| k.parse().map_err(|_| usage(format!("bad degree {k:?}")))).collect::<Result<_, _>>()?,
            "eis" if regime == "mixed" => eis = val.split(',').map(str::to_string).collect(),
            _ => return Err(usage(format!("unknown range {key:?}"))),
        }
    }
    let prec = c.field.prec();
    let mut fields = Vec::new();
    for &k in &ks {
        if regime == "equichar" {
            fields.push(FieldCtx::equichar(k, prec)?);
        } else {
            for e in &eis {
                fields.push(parse_field(&format!("mixed(k={k},eis=\"{e}\",prec={prec})"))?);
            }
        }
    }
    let max_s = s_set.as_ref().and_then(|s| s.iter().flatten().max().copied()).unwrap_or(11);
    let max_u = u_set.iter().flatten().max().copied().unwrap_or(0);
    let points: Vec<_> = fields
        .iter()
        .flat_map(|f| sweep_grid(f, max_s, max_u).into_iter().map(move |(s, u)| (f.clone(), s, u)))
        .filter(|(_, s, u)| s_set.as_ref().is_none_or(|set| set.contains(&Some(*s))) && u_set.contains(u))
        .collect();
    let mut rows = Vec::new();
    let mut matched = true;
    for (rec, (f, s, u)) in run_points(&points).into_iter().zip(&points) {
        match rec {
            Ok(r) => {
                matched &= r.passed();
                rows.push(row(&r));
            }
            Err(e) => {
                eprintln!("failed at {f} s={s} u={u:?}");
                return Err(e.into());
            }
        }
    }
    Ok(Done { rows, matched, extra: Vec::new() })
}

fn run_entries(c: &Ctx, entries: &[CatalogEntry]) -> Result<Done, CliError> {
    let mut rows = Vec::new();
    let mut extra = Vec::new();
    let mut matched = true;
    for entry in entries {
        let base = entry.number_field.local_field();
        let base = match c.field.prec() {
            p if p != base.prec() => base.with_prec(p)?,
            _ => base,
        };
        let run = run_with_retries(&base, c.policy, |f| run_entry(entry, f))?;
        matched &= run.ok;
        if c.format == Format::Jsonl {
            rows.push(row(&run));
            continue;
        }
        for cr in &run.curves {
            rows.push(row(&json!({
                "label": run.label,
                "curve": cr.name,
                "model": cr.model,
                "j": cr.j,
                "vj": vj_text(cr.vj),
                "expected": cr.expected.map(|t| t.to_string()),
                "computed": cr.computed.to_string(),
                "v_delta_min": cr.v_delta_min,
            })));
        }
        if let Some(p) = &run.pair {
            let js: Vec<String> = run.curves.iter().map(|c| c.j.clone().unwrap_or_else(|| "-".into())).collect();
            extra.push(format!(
                "{}: j-pair ({}), Velu quotient matches: {}, Phi_2 vanishes: {}, s = {}, same type predicted: {}, computed: {}",
                run.label,
                js.join(", "),
                p.velu_matches,
                p.phi2_vanishes,
                p.s,
                p.same_type_predicted,
                p.same_type_computed
            ));
        }
    }
    Ok(Done { rows, matched, extra })
}

fn cmd_catalog(c: &Ctx, label: Option<&str>) -> Result<Done, CliError> {
    let entries = match label {
        Some(l) => vec![lookup(l)?],
        None => catalog(),
    };
    run_entries(c, &entries)
}

fn cmd_lmfdb(c: &Ctx, label: &str) -> Result<Done, CliError> {
    let entry = match lookup(label) {
        Ok(e) => e,
        Err(Error::UnknownLabel(_)) => lmfdb::fetch(label)?,
        Err(e) => return Err(e.into()),
    };
    let mut done = run_entries(c, std::slice::from_ref(&entry))?;
    done.extra.push(format!("entry: {}", serde_json::to_string(&entry).expect("serializable")));
    Ok(done)
}

fn run(cli: &Cli) -> Result<Done, CliError> {
    let mut field = parse_field(&cli.field)?;
    if let Some(p) = cli.prec {
        field = field.with_prec(p)?;
    }
    let c = Ctx { field, policy: RetryPolicy::new(cli.max_retries, cli.max_retries), format: cli.format, trace: cli.trace };
    match &cli.cmd {
        Cmd::Tate { curve } => cmd_tate(&c, curve),
        Cmd::Slk { ext } => cmd_slk(&c, ext),
        Cmd::Twist { curve, ext } => cmd_twist(&c, curve, ext),
        Cmd::Predict { vj, s } => cmd_predict(vj, s),
        Cmd::Verify { curve, ext } => cmd_verify(&c, curve, ext),
        Cmd::Isogeny2 { curve, x0 } => cmd_isogeny2(&c, curve, x0),
        Cmd::Phi2 { t, x, y } => cmd_phi2(t.as_deref(), x.as_deref(), y.as_deref()),
        Cmd::Scan { regime, ranges } => cmd_scan(&c, regime, ranges),
        Cmd::Catalog { label } => cmd_catalog(&c, label.as_deref()),
        Cmd::Lmfdb { label } => cmd_lmfdb(&c, label),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(done) => {
            let mut out = io::stdout().lock();
            let written = emit(&mut out, cli.format, &done.rows).and_then(|_| {
                for line in &done.extra {
                    writeln!(out, "{line}")?;
                }
                Ok(())
            });
            if let Err(e) = written {
                eprintln!("error: {e}");
                return ExitCode::from(3);
            }
            ExitCode::from(if done.matched { 0 } else { 1 })
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
