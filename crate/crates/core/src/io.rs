//! JSON and CSV forms of step functions and sequences.
//!
//! JSON: `{"breakpoints": ["1", "5/2"], "values": ["3", "1/2"]}` with rationals as
//! `"p/q"` strings (plain JSON numbers and decimal strings are accepted on input).
//! A missing `breakpoints` field means unit cells, i.e. a sequence.
//! CSV: one `t,value` row per cell, `t` being the right end of the cell.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{fmt_q, int, parse_q, value_to_q, Q};
use crate::seq::{RSeq, Seq};
use crate::step::{SignedStep, StepFn};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StepJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub breakpoints: Option<Vec<serde_json::Value>>,
    pub values: Vec<serde_json::Value>,
}

fn qs_to_json(xs: &[Q]) -> Vec<serde_json::Value> {
    xs.iter().map(|x| serde_json::Value::String(fmt_q(x))).collect()
}

fn json_to_qs(xs: &[serde_json::Value]) -> Result<Vec<Q>> {
    xs.iter().map(value_to_q).collect()
}

impl StepJson {
    pub fn from_signed(x: &SignedStep) -> Self {
        StepJson { breakpoints: Some(qs_to_json(x.breakpoints())), values: qs_to_json(x.values()) }
    }

    pub fn to_signed(&self) -> Result<SignedStep> {
        let values = json_to_qs(&self.values)?;
        let bps = match &self.breakpoints {
            Some(b) => json_to_qs(b)?,
            None => (1..=values.len()).map(|k| int(k as i64)).collect(),
        };
        SignedStep::new(bps, values)
    }
}

pub fn step_to_json(x: &StepFn) -> serde_json::Value {
    serde_json::to_value(StepJson::from_signed(x.as_signed())).expect("serializable")
}

pub fn signed_to_json(x: &SignedStep) -> serde_json::Value {
    serde_json::to_value(StepJson::from_signed(x)).expect("serializable")
}

pub fn rseq_to_json(x: &RSeq) -> serde_json::Value {
    step_to_json(&StepFn::from(x))
}

fn parse_json(v: &serde_json::Value) -> Result<StepJson> {
    serde_json::from_value(v.clone()).map_err(|e| Error::Parse(e.to_string()))
}

pub fn step_from_json(v: &serde_json::Value) -> Result<StepFn> {
    let j = parse_json(v)?;
    let s = j.to_signed()?;
    StepFn::new(s.breakpoints().to_vec(), s.values().to_vec())
}

pub fn signed_from_json(v: &serde_json::Value) -> Result<SignedStep> {
    parse_json(v)?.to_signed()
}

/// Reads a sequence; step functions with integer breakpoints are expanded into unit cells.
pub fn seq_from_json(v: &serde_json::Value) -> Result<Seq> {
    step_from_json(v)?
        .to_seq()
        .ok_or_else(|| Error::Invalid("sequence input needs integer breakpoints".into()))
}

pub fn step_to_csv(x: &SignedStep) -> String {
    let mut out = String::from("t,value\n");
    for (b, v) in x.breakpoints().iter().zip(x.values()) {
        out.push_str(&format!("{},{}\n", fmt_q(b), fmt_q(v)));
    }
    out
}

pub fn signed_from_csv(text: &str) -> Result<SignedStep> {
    let mut bps = Vec::new();
    let mut vals = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (t, v) = line
            .split_once(',')
            .ok_or_else(|| Error::Parse(format!("line {}: expected `t,value`", lineno + 1)))?;
        match (parse_q(t), parse_q(v)) {
            (Ok(t), Ok(v)) => {
                bps.push(t);
                vals.push(v);
            }
            // header row
            _ if lineno == 0 => continue,
            (Err(e), _) | (_, Err(e)) => return Err(Error::Parse(format!("line {}: {e}", lineno + 1))),
        }
    }
    SignedStep::new(bps, vals)
}

pub fn step_from_csv(text: &str) -> Result<StepFn> {
    let s = signed_from_csv(text)?;
    StepFn::new(s.breakpoints().to_vec(), s.values().to_vec())
}

/// Dense matrix from JSON nested arrays or CSV rows.
pub fn matrix_rows_from_text(text: &str) -> Result<Vec<Vec<f64>>> {
    let trimmed = text.trim_start();
    if trimmed.starts_with('[') {
        return serde_json::from_str::<Vec<Vec<f64>>>(trimmed).map_err(|e| Error::Parse(e.to_string()));
    }
    let mut rows = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let row: std::result::Result<Vec<f64>, _> = line.split(',').map(|c| c.trim().parse::<f64>()).collect();
        rows.push(row.map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))?);
    }
    Ok(rows)
}
