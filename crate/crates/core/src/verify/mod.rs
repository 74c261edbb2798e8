//! The lemma suite: every inequality of the library checked on seeded random instances.
//!
//! Each lemma draws its instance from a ChaCha8 stream seeded by `(seed, lemma, trial)`, so a
//! violation is reproduced by its blob alone. Exact lemmas compare rationals; float lemmas
//! compare a normalized slack against a pinned tolerance.

mod gen;
mod lemmas;

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};

use num_traits::Signed;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::rational::{fmt_q, to_f64, Q};

pub use gen::{gen_stepfn, level_structure, random_step, shuffle_cells, LevelStructure, Profile};
pub use lemmas::LEMMAS;

/// Size caps for generated instances.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Caps {
    pub max_len: usize,
    pub matrix_n: usize,
    pub kappa_window: usize,
}

impl Default for Caps {
    fn default() -> Self {
        Caps { max_len: 64, matrix_n: 16, kappa_window: 8 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub seed: u64,
    pub trials: u32,
    pub caps: Caps,
    /// Conditional lemmas with fewer hypothesis hits are flagged under-sampled.
    pub min_hits: u32,
    /// Per-lemma tolerance overrides for float lemmas.
    pub tolerances: BTreeMap<String, f64>,
    /// Restrict the run to these lemma ids.
    pub only: Option<Vec<String>>,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig { seed: 1, trials: 100, caps: Caps::default(), min_hits: 30, tolerances: BTreeMap::new(), only: None }
    }
}

impl SuiteConfig {
    pub fn new(seed: u64, trials: u32) -> Self {
        SuiteConfig { seed, trials, ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        let c = &self.caps;
        if !(2..=64).contains(&c.max_len) || !(2..=16).contains(&c.matrix_n) || !(1..=8).contains(&c.kappa_window) {
            return Err(Error::Invalid(
                "caps must satisfy 2 <= max_len <= 64, 2 <= matrix_n <= 16, 1 <= kappa_window <= 8".into(),
            ));
        }
        for (id, tol) in &self.tolerances {
            if lemma(id).is_none() {
                return Err(Error::Invalid(format!("tolerance override for unknown lemma `{id}`")));
            }
            if !(tol.is_finite() && *tol >= 0.0) {
                return Err(Error::Invalid(format!("tolerance for `{id}` must be finite and nonnegative")));
            }
        }
        if let Some(only) = &self.only {
            if let Some(bad) = only.iter().find(|id| lemma(id).is_none()) {
                return Err(Error::Invalid(format!("unknown lemma `{bad}`")));
            }
        }
        Ok(())
    }

    fn tolerance(&self, l: &Lemma) -> f64 {
        self.tolerances.get(l.id).copied().unwrap_or(l.tol)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Exact,
    Float,
}

/// Slack of one trial; negative (beyond tolerance) means the inequality failed.
#[derive(Clone, Debug, PartialEq)]
pub enum Margin {
    Exact(Q),
    Float(f64),
}

impl Margin {
    pub fn to_f64(&self) -> f64 {
        match self {
            Margin::Exact(q) => to_f64(q),
            Margin::Float(v) => *v,
        }
    }

    fn violates(&self, tol: f64) -> bool {
        match self {
            Margin::Exact(q) => q.is_negative(),
            Margin::Float(v) => v.is_nan() || *v < -tol,
        }
    }

    pub fn render(&self) -> String {
        match self {
            Margin::Exact(q) => fmt_q(q),
            Margin::Float(v) => format!("{v:e}"),
        }
    }

    /// Bitwise equality for floats, value equality for rationals.
    pub fn identical(&self, other: &Margin) -> bool {
        match (self, other) {
            (Margin::Exact(a), Margin::Exact(b)) => a == b,
            (Margin::Float(a), Margin::Float(b)) => a.to_bits() == b.to_bits(),
            _ => false,
        }
    }
}

/// Outcome of one trial.
#[derive(Clone, Debug)]
pub struct Trial {
    /// False when a conditional lemma found no instance satisfying its hypothesis.
    pub hypothesis: bool,
    pub margin: Margin,
    pub input: Value,
}

impl Trial {
    pub(crate) fn exact(margin: Q, input: Value) -> Self {
        Trial { hypothesis: true, margin: Margin::Exact(margin), input }
    }

    pub(crate) fn float(margin: f64, input: Value) -> Self {
        Trial { hypothesis: true, margin: Margin::Float(margin), input }
    }
}

pub(crate) type TrialRng = ChaCha8Rng;

pub struct Lemma {
    pub id: &'static str,
    pub module: &'static str,
    pub kind: Kind,
    pub conditional: bool,
    /// Default tolerance on the normalized slack (ignored for exact lemmas).
    pub tol: f64,
    pub statement: &'static str,
    pub(crate) run: fn(&mut TrialRng, &Caps) -> Trial,
}

pub fn lemma(id: &str) -> Option<&'static Lemma> {
    LEMMAS.iter().find(|l| l.id == id)
}

/// Everything needed to rerun a failing trial.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ViolationBlob {
    pub lemma: String,
    pub seed: u64,
    pub trial: u32,
    pub caps: Caps,
    pub margin: String,
    pub input: Value,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LemmaReport {
    pub lemma: String,
    pub module: String,
    pub kind: Kind,
    pub conditional: bool,
    pub tolerance: f64,
    pub trials: u32,
    pub hypothesis_hits: u32,
    pub under_sampled: bool,
    pub violations: Vec<ViolationBlob>,
    /// Smallest slack over trials whose hypothesis held.
    pub worst_margin: Option<f64>,
    /// The same, as an exact rational for exact lemmas.
    pub worst_margin_exact: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub seed: u64,
    pub trials: u32,
    pub lemmas: Vec<LemmaReport>,
    pub total_violations: usize,
}

impl SuiteReport {
    pub fn lemma(&self, id: &str) -> Option<&LemmaReport> {
        self.lemmas.iter().find(|r| r.lemma == id)
    }

    pub fn is_clean(&self) -> bool {
        self.total_violations == 0
    }

    pub fn to_json(&self) -> Value {
        serde_json::to_value(self).expect("report serializes")
    }
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn fnv1a(s: &str) -> u64 {
    s.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3))
}

fn trial_rng(seed: u64, id: &str, trial: u32) -> TrialRng {
    let s = splitmix(splitmix(splitmix(seed) ^ fnv1a(id)) ^ trial as u64);
    ChaCha8Rng::seed_from_u64(s)
}

fn run_one(l: &Lemma, seed: u64, trial: u32, caps: &Caps) -> Trial {
    let mut rng = trial_rng(seed, l.id, trial);
    match catch_unwind(AssertUnwindSafe(|| (l.run)(&mut rng, caps))) {
        Ok(t) => t,
        Err(p) => {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            Trial { hypothesis: true, margin: Margin::Float(f64::NAN), input: serde_json::json!({ "panic": msg }) }
        }
    }
}

fn run_lemma(l: &Lemma, cfg: &SuiteConfig) -> LemmaReport {
    let tol = cfg.tolerance(l);
    let results: Vec<Trial> = (0..cfg.trials).into_par_iter().map(|i| run_one(l, cfg.seed, i, &cfg.caps)).collect();
    let mut hits = 0u32;
    let mut violations = Vec::new();
    let mut worst: Option<&Margin> = None;
    for (i, t) in results.iter().enumerate() {
        if !t.hypothesis {
            continue;
        }
        hits += 1;
        let replace = match (worst, &t.margin) {
            (None, _) => true,
            (Some(Margin::Exact(w)), Margin::Exact(m)) => m < w,
            (Some(w), m) => m.to_f64().is_nan() || m.to_f64() < w.to_f64(),
        };
        if replace {
            worst = Some(&t.margin);
        }
        if t.margin.violates(tol) {
            violations.push(ViolationBlob {
                lemma: l.id.to_string(),
                seed: cfg.seed,
                trial: i as u32,
                caps: cfg.caps,
                margin: t.margin.render(),
                input: t.input.clone(),
            });
        }
    }
    LemmaReport {
        lemma: l.id.to_string(),
        module: l.module.to_string(),
        kind: l.kind,
        conditional: l.conditional,
        tolerance: if l.kind == Kind::Exact { 0.0 } else { tol },
        trials: cfg.trials,
        hypothesis_hits: hits,
        under_sampled: l.conditional && hits < cfg.min_hits,
        violations,
        worst_margin: worst.map(Margin::to_f64),
        worst_margin_exact: worst.and_then(|w| match w {
            Margin::Exact(q) => Some(fmt_q(q)),
            Margin::Float(_) => None,
        }),
    }
}

/// Runs every selected lemma for `cfg.trials` trials. Zero trials give an empty report.
pub fn run_suite(cfg: &SuiteConfig) -> Result<SuiteReport> {
    cfg.validate()?;
    let lemmas: Vec<&Lemma> = if cfg.trials == 0 {
        Vec::new()
    } else {
        LEMMAS.iter().filter(|l| cfg.only.as_ref().map_or(true, |o| o.iter().any(|id| id == l.id))).collect()
    };
    let reports: Vec<LemmaReport> = lemmas.par_iter().map(|l| run_lemma(l, cfg)).collect();
    let total_violations = reports.iter().map(|r| r.violations.len()).sum();
    Ok(SuiteReport { seed: cfg.seed, trials: cfg.trials, lemmas: reports, total_violations })
}

/// Reruns the trial behind a violation blob.
pub fn replay(blob: &ViolationBlob) -> Result<Trial> {
    let l = lemma(&blob.lemma).ok_or_else(|| Error::Invalid(format!("unknown lemma `{}`", blob.lemma)))?;
    Ok(run_one(l, blob.seed, blob.trial, &blob.caps))
}

/// Reruns an arbitrary trial.
pub fn run_trial(id: &str, seed: u64, trial: u32, caps: &Caps) -> Result<Trial> {
    let l = lemma(id).ok_or_else(|| Error::Invalid(format!("unknown lemma `{id}`")))?;
    Ok(run_one(l, seed, trial, caps))
}
