use std::io::Read;
use std::path::Path;

use serde_json::{json, Value};

use symfun_core::averaging::{a_nodes, build_b, expectation_fn, KappaSeq, Tail};
use symfun_core::io::{signed_from_csv, signed_from_json, step_to_csv, step_to_json};
use symfun_core::linalg::{op_direct_sum, singular_values, Matrix};
use symfun_core::majorization::{submajorize, uniform_submajorize_fn};
use symfun_core::norms::{norm, NormSpec, Psi};
use symfun_core::rational::{fmt_q, parse_q};
use symfun_core::traces::{
    criterion, dixmier_bracket, fk_diagnostic, p_estimate, parse_schedule, pi_estimate, Element, Generator,
    LimitBracket, PInput,
};
use symfun_core::verify::{run_suite, SuiteConfig, SuiteReport, LEMMAS};
use symfun_core::{Error, Result, SignedStep, StepFn};

use crate::output::{fnum, Output, Table};

fn read_text(path: &Path) -> Result<String> {
    if path == Path::new("-") {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s).map_err(|e| Error::Invalid(format!("stdin: {e}")))?;
        return Ok(s);
    }
    std::fs::read_to_string(path).map_err(|e| Error::Invalid(format!("cannot read {}: {e}", path.display())))
}

/// A step function from JSON (object, or a bare array of sequence values) or `t,value` CSV.
pub fn read_signed(path: &Path) -> Result<SignedStep> {
    let text = read_text(path)?;
    let trimmed = text.trim_start();
    if trimmed.starts_with('{') || trimmed.starts_with('[') {
        let v: Value = serde_json::from_str(trimmed)
            .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        let v = if v.is_array() { json!({ "values": v }) } else { v };
        signed_from_json(&v)
    } else {
        signed_from_csv(&text)
    }
}

/// `|x|` of the input, the function whose rearrangement every symmetric quantity sees.
fn read_abs(path: &Path) -> Result<StepFn> {
    Ok(read_signed(path)?.abs())
}

fn read_matrix(path: &Path) -> Result<Matrix> {
    Matrix::from_rows(symfun_core::io::matrix_rows_from_text(&read_text(path)?)?)
}

fn parse<T: std::str::FromStr<Err = Error>>(s: &str) -> Result<T> {
    s.parse()
}

/// Integer dilation factors from a schedule string.
fn int_schedule(s: &str) -> Result<Vec<u64>> {
    parse_schedule(s)?
        .into_iter()
        .map(|v| {
            if v >= 1.0 && v.fract() == 0.0 && v < 2f64.powi(63) {
                Ok(v as u64)
            } else {
                Err(Error::Parse(format!("schedule entry {v} is not a positive integer")))
            }
        })
        .collect()
}

fn horizon(s: &str) -> Result<f64> {
    match s.trim().parse::<f64>() {
        Ok(h) if h >= 1.0 && h.is_finite() => Ok(h),
        _ => Err(Error::Parse(format!("bad horizon `{s}`"))),
    }
}

fn step_output(x: &StepFn) -> Output {
    let csv = step_to_csv(x.as_signed());
    let mut table = Table::new(&["t", "value"]);
    for line in csv.lines().skip(1) {
        table.push(line.split(',').map(str::to_string).collect());
    }
    Output::new(step_to_json(x), table)
}

fn bracket_json(b: &LimitBracket, index: &str, extra: Value) -> Value {
    let mut v = json!({
        "series": b.series.iter().map(|(i, y)| json!({ index: i, "value": y })).collect::<Vec<_>>(),
        "liminf_est": b.liminf_est,
        "limsup_est": b.limsup_est,
        "cesaro": b.cesaro,
        "converged": b.converged,
    });
    if let (Value::Object(m), Value::Object(e)) = (&mut v, extra) {
        m.extend(e);
    }
    v
}

pub fn rearrange(input: &Path) -> Result<Output> {
    Ok(step_output(&read_abs(input)?.rearrange()))
}

pub fn norm_cmd(input: &Path, spec: &str) -> Result<Output> {
    let spec: NormSpec = parse(spec)?;
    let v = norm(&read_abs(input)?, &spec)?;
    let mut j = serde_json::to_value(&v).expect("norm value serializes");
    j["norm"] = json!(spec.to_string());
    let table = Table::fields(&j);
    Ok(Output::new(j, table))
}

pub fn check(relation: &str, y: &Path, x: &Path, m_max: u64) -> Result<Output> {
    let (y, x) = (read_abs(y)?, read_abs(x)?);
    let j = match relation {
        "submajor" => submajorize(&y, &x).to_json(),
        "uniform" => {
            if m_max == 0 {
                return Err(Error::Invalid("--mmax must be positive".into()));
            }
            uniform_submajorize_fn(&y, &x, m_max).to_json()
        }
        other => return Err(Error::Parse(format!("unknown relation `{other}` (submajor or uniform)"))),
    };
    let mut j = j;
    j["relation"] = json!(relation);
    let table = Table::fields(&j);
    Ok(Output::new(j, table))
}

pub fn partitions(input: &Path, theta: &str, kappa: &str, n_min: i64) -> Result<Output> {
    let x = read_abs(input)?.rearrange();
    let theta = parse_q(theta)?;
    let mut kappa: KappaSeq = parse(kappa)?;
    kappa.n_min = n_min;
    let c = build_b(&x, &kappa, &theta)?;
    let range = kappa.indices();
    let a = a_nodes(&x, &theta, 3 * range.start)?;
    let averages = expectation_fn(&x, &c.partition, Tail::Keep);
    let nodes: Vec<String> = c.partition.nodes().iter().map(fmt_q).collect();
    let a_json: serde_json::Map<String, Value> = a
        .nodes
        .iter()
        .filter(|(n, _)| **n <= 3 * (range.end - 1) + 1)
        .map(|(n, t)| (n.to_string(), json!(fmt_q(t))))
        .collect();
    let j = json!({
        "theta": fmt_q(&theta),
        "kappa": kappa.entries.iter().map(|k| k.to_string()).collect::<Vec<_>>(),
        "n_min": n_min,
        "a_nodes": a_json,
        "nodes": nodes,
        "truncated": c.truncated,
        "averages": step_to_json(&averages),
    });
    let mut table = Table::new(&["node"]);
    for n in &nodes {
        table.push(vec![n.clone()]);
    }
    Ok(Output::new(j, table))
}

/// Either an explicit file or a generated sequence cut off at `horizon`.
pub enum Source<'a> {
    File(&'a Path),
    Generated { gen: &'a str, horizon: &'a str },
}

pub fn pi(src: Source, spec: &str, schedule: &str) -> Result<Output> {
    let spec: NormSpec = parse(spec)?;
    let schedule = int_schedule(schedule)?;
    let el = match src {
        Source::File(p) => Element::Step(read_abs(p)?),
        Source::Generated { gen, horizon: h } => Element::Generated { gen: parse(gen)?, horizon: horizon(h)? },
    };
    let b = pi_estimate(&el, &spec, &schedule)?;
    let j = bracket_json(&b, "m", json!({ "norm": spec.to_string() }));
    Ok(Output::new(j, Table::series(["m", "value"], &b.series)))
}

pub fn p(src: Source, b: Option<&Path>, spec: &str, schedule: &str) -> Result<Output> {
    let spec: NormSpec = parse(spec)?;
    let schedule = int_schedule(schedule)?;
    let input = match src {
        Source::File(a) => {
            let b = match b {
                Some(b) => read_abs(b)?,
                None => StepFn::zero(),
            };
            PInput::difference(&read_abs(a)?, &b)
        }
        Source::Generated { gen, horizon: h } => PInput::Generated { gen: parse(gen)?, horizon: horizon(h)? },
    };
    let br = p_estimate(&input, &spec, &schedule)?;
    let j = bracket_json(&br, "m", json!({ "norm": spec.to_string() }));
    Ok(Output::new(j, Table::series(["m", "value"], &br.series)))
}

pub fn dixmier(s: &str, psi: &str, n: &str) -> Result<Output> {
    let gen: Generator = parse(s)?;
    let psi: Psi = parse(psi)?;
    let b = dixmier_bracket(&gen, &psi, &parse_schedule(n)?)?;
    let j = bracket_json(&b, "n", json!({ "s": gen.to_string(), "psi": psi.to_string() }));
    Ok(Output::new(j, Table::series(["n", "xi"], &b.series)))
}

pub fn criterion_cmd(psi: &str, t_hi: f64, tol: f64) -> Result<Output> {
    let psi: Psi = parse(psi)?;
    let r = criterion(&psi, t_hi, tol)?;
    let table = Table::series(["t", "ratio"], &r.profile);
    Ok(Output::new(serde_json::to_value(&r).expect("report serializes"), table))
}

pub fn fk(a: &Path, b: &Path, spec: &str, schedule: &str, interval: bool) -> Result<Output> {
    let spec: NormSpec = parse(spec)?;
    let r = fk_diagnostic(&read_abs(a)?, &read_abs(b)?, &spec, &parse_schedule(schedule)?, interval)?;
    let mut j = serde_json::to_value(&r).expect("report serializes");
    j["norm"] = json!(spec.to_string());
    Ok(Output::new(j, Table::series(["n", "value"], &r.series)))
}

pub fn svd(input: &Path, m: usize) -> Result<Output> {
    let a = read_matrix(input)?;
    let a = if m > 1 { op_direct_sum(&a, m)? } else { a };
    let sv = singular_values(&a);
    let mut table = Table::new(&["k", "value"]);
    for (k, v) in sv.iter().enumerate() {
        table.push(vec![(k + 1).to_string(), fnum(*v)]);
    }
    Ok(Output::new(json!({ "values": sv }), table))
}

pub struct VerifyArgs<'a> {
    pub seed: u64,
    pub trials: u32,
    pub only: Option<&'a str>,
    pub min_hits: u32,
    pub tolerances: &'a [String],
}

pub fn verify(args: &VerifyArgs) -> Result<(Output, SuiteReport)> {
    let mut cfg = SuiteConfig::new(args.seed, args.trials);
    cfg.min_hits = args.min_hits;
    cfg.only = args.only.map(|s| s.split(',').map(|p| p.trim().to_string()).filter(|p| !p.is_empty()).collect());
    for t in args.tolerances {
        let (id, v) = t.split_once('=').ok_or_else(|| Error::Parse(format!("bad tolerance `{t}`, want id=value")))?;
        let v: f64 = v.trim().parse().map_err(|_| Error::Parse(format!("bad tolerance value in `{t}`")))?;
        cfg.tolerances.insert(id.trim().to_string(), v);
    }
    let report = run_suite(&cfg)?;
    let mut table =
        Table::new(&["lemma", "module", "kind", "trials", "hypothesis_hits", "under_sampled", "violations", "worst_margin"]);
    for l in &report.lemmas {
        table.push(vec![
            l.lemma.clone(),
            l.module.clone(),
            serde_json::to_value(l.kind).expect("kind serializes").as_str().unwrap_or_default().to_string(),
            l.trials.to_string(),
            l.hypothesis_hits.to_string(),
            l.under_sampled.to_string(),
            l.violations.len().to_string(),
            l.worst_margin.map_or_else(String::new, fnum),
        ]);
    }
    Ok((Output::new(report.to_json(), table), report))
}

pub fn lemma_list() -> Output {
    let mut table = Table::new(&["lemma", "module", "conditional", "statement"]);
    let list: Vec<Value> = LEMMAS
        .iter()
        .map(|l| {
            table.push(vec![l.id.into(), l.module.into(), l.conditional.to_string(), l.statement.into()]);
            json!({ "id": l.id, "module": l.module, "conditional": l.conditional, "tolerance": l.tol, "statement": l.statement })
        })
        .collect();
    Output::new(Value::Array(list), table)
}
