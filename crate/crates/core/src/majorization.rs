//! Hardy-Littlewood submajorization `≺≺` and uniform submajorization `⊲`, with exact certificates.

use num_traits::{Signed, Zero};
use serde_json::{json, Value};

use crate::rational::{fmt_q, int, Q};
use crate::seq::RSeq;
use crate::step::{merge_sorted, SignedStep, StepFn};

#[derive(Clone, Debug, PartialEq)]
pub enum Violation {
    /// Partial sums cross at `t`.
    At(Q),
    /// The window `(a, b)` of the uniform relation fails.
    Pair(Q, Q),
}

#[derive(Clone, Debug, PartialEq)]
pub struct MajorizationReport {
    pub verdict: bool,
    pub first_violation: Option<Violation>,
    /// Smallest slack over all tested points; negative iff the relation fails.
    pub margin: Q,
}

impl MajorizationReport {
    pub fn to_json(&self) -> Value {
        let fv = match &self.first_violation {
            None => Value::Null,
            Some(Violation::At(t)) => json!({ "t": fmt_q(t) }),
            Some(Violation::Pair(a, b)) => json!({ "a": fmt_q(a), "b": fmt_q(b) }),
        };
        json!({ "verdict": self.verdict, "first_violation": fv, "margin": fmt_q(&self.margin) })
    }
}

/// `y ≺≺ x`: `∫_0^t μ(y) ≤ ∫_0^t μ(x)` for all `t`.
///
/// Both primitives are piecewise linear, so checking the union of breakpoints is enough.
pub fn submajorize(y: &StepFn, x: &StepFn) -> MajorizationReport {
    let (my, mx) = (y.rearrange(), x.rearrange());
    let grid = merge_sorted(my.breakpoints(), mx.breakpoints());
    let mut margin: Option<Q> = None;
    let mut first = None;
    for t in grid {
        let slack = mx.partial_sum(&t) - my.partial_sum(&t);
        if first.is_none() && slack.is_negative() {
            first = Some(Violation::At(t.clone()));
        }
        if margin.as_ref().map_or(true, |m| &slack < m) {
            margin = Some(slack);
        }
    }
    MajorizationReport { verdict: first.is_none(), first_violation: first, margin: margin.unwrap_or_else(Q::zero) }
}

pub fn submajorize_seq(y: &RSeq, x: &RSeq) -> MajorizationReport {
    submajorize(&StepFn::from(y), &StepFn::from(x))
}

#[derive(Clone, Debug, PartialEq)]
pub struct UniformReport {
    pub witness: Option<u64>,
    /// Certificate for the witness, or for the largest `m` tried when there is none.
    pub report: MajorizationReport,
}

impl UniformReport {
    pub fn to_json(&self) -> Value {
        let mut v = self.report.to_json();
        v["witness"] = self.witness.map_or(Value::Null, Value::from);
        v
    }
}

/// Checks `Σ_{k=ma+1}^b μ(k,y) ≤ Σ_{k=a+1}^b μ(k,x)` for all integers `a ≥ 0`, `b > ma`.
///
/// With `L` the longer length, both sides freeze once `b ≥ L`, and the left side
/// vanishes once `ma ≥ L`, so the scan covers `ma < L`, `b ≤ L`.
pub fn uniform_check_seq(y: &RSeq, x: &RSeq, m: u64) -> MajorizationReport {
    let len = y.len().max(x.len());
    let py = padded_prefix(y, len);
    let px = padded_prefix(x, len);
    let m = m as usize;
    let mut margin: Option<Q> = None;
    let mut first = None;
    let mut a = 0usize;
    while m * a < len {
        for b in (m * a + 1)..=len {
            let slack = (&px[b] - &px[a]) - (&py[b] - &py[m * a]);
            if first.is_none() && slack.is_negative() {
                first = Some(Violation::Pair(int(a as i64), int(b as i64)));
            }
            if margin.as_ref().map_or(true, |mm| &slack < mm) {
                margin = Some(slack);
            }
        }
        a += 1;
    }
    MajorizationReport { verdict: first.is_none(), first_violation: first, margin: margin.unwrap_or_else(Q::zero) }
}

fn padded_prefix(x: &RSeq, len: usize) -> Vec<Q> {
    let mut p = x.prefix_sums();
    let last = p.last().cloned().unwrap_or_else(Q::zero);
    p.resize(len + 1, last);
    p
}

/// Smallest `m ≤ m_max` with `y ⊲ x` (witness `m`) for sequences.
pub fn uniform_submajorize(y: &RSeq, x: &RSeq, m_max: u64) -> UniformReport {
    let mut last = None;
    for m in 1..=m_max.max(1) {
        let r = uniform_check_seq(y, x, m);
        if r.verdict {
            return UniformReport { witness: Some(m), report: r };
        }
        last = Some(r);
    }
    UniformReport { witness: None, report: last.expect("at least one m tried") }
}

/// Minimum of `[G(r·b) − G(a)] − [F(b) − F(m·a)]` over real `0 ≤ m·a ≤ b`, with its minimizer.
///
/// `F`, `G` are the primitives of `f`, `g`. The objective splits as `φ(b) + χ(a)`; both parts are
/// piecewise linear, so the minimum over the cone sits at a vertex of the product cell complex
/// cut by the line `b = m·a`. Candidates are `a ∈ {0} ∪ kinks(χ) ∪ kinks(φ)/m` and
/// `b ∈ kinks(φ) ∪ m·A`; a suffix minimum of `φ` over sorted `b` gives each `a` its best `b`.
pub fn uniform_gap(f: &SignedStep, g: &SignedStep, m: &Q, r: &Q) -> (Q, Q, Q) {
    let div = |xs: &[Q], d: &Q| xs.iter().map(|t| t / d).collect::<Vec<Q>>();
    let mul = |xs: &[Q], d: &Q| xs.iter().map(|t| t * d).collect::<Vec<Q>>();
    let phi_kinks = merge_sorted(f.breakpoints(), &div(g.breakpoints(), r));
    let chi_kinks = merge_sorted(&div(f.breakpoints(), m), g.breakpoints());
    let a_cand = merge_sorted(&merge_sorted(&[Q::zero()], &chi_kinks), &div(&phi_kinks, m));
    let b_cand = merge_sorted(&phi_kinks, &mul(&a_cand, m));

    let phi = |b: &Q| g.partial_sum(&(b * r)) - f.partial_sum(b);
    let chi = |a: &Q| f.partial_sum(&(a * m)) - g.partial_sum(a);

    let phis: Vec<Q> = b_cand.iter().map(phi).collect();
    let mut suffix: Vec<usize> = vec![0; b_cand.len()];
    for i in (0..b_cand.len()).rev() {
        suffix[i] = if i + 1 < b_cand.len() && phis[suffix[i + 1]] < phis[i] { suffix[i + 1] } else { i };
    }

    let mut best: Option<(Q, Q, Q)> = None;
    for a in &a_cand {
        let lo = a * m;
        let idx = b_cand.partition_point(|b| b < &lo);
        if idx == b_cand.len() {
            continue;
        }
        let j = suffix[idx];
        let val = &phis[j] + chi(a);
        if best.as_ref().map_or(true, |(v, _, _)| &val < v) {
            best = Some((val, a.clone(), b_cand[j].clone()));
        }
    }
    best.unwrap_or_else(|| (Q::zero(), Q::zero(), Q::zero()))
}

/// `y ⊲ x` with witness `m` for functions: `∫_{ma}^b μ(y) ≤ ∫_a^b μ(x)` for all real `0 ≤ ma ≤ b`.
pub fn uniform_check_fn(y: &StepFn, x: &StepFn, m: &Q) -> MajorizationReport {
    let (my, mx) = (y.rearrange(), x.rearrange());
    let (margin, a, b) = uniform_gap(my.as_signed(), mx.as_signed(), m, &int(1));
    let bad = margin.is_negative();
    MajorizationReport { verdict: !bad, first_violation: bad.then_some(Violation::Pair(a, b)), margin }
}

pub fn uniform_submajorize_fn(y: &StepFn, x: &StepFn, m_max: u64) -> UniformReport {
    let mut last = None;
    for m in 1..=m_max.max(1) {
        let r = uniform_check_fn(y, x, &int(m as i64));
        if r.verdict {
            return UniformReport { witness: Some(m), report: r };
        }
        last = Some(r);
    }
    UniformReport { witness: None, report: last.expect("at least one m tried") }
}

/// Floating-point `≺≺` on nonincreasing vectors: returns the worst slack `min_k (X_k − Y_k)`,
/// padding the shorter vector with zeros.
pub fn submajorization_slack_f64(y: &[f64], x: &[f64]) -> f64 {
    let n = y.len().max(x.len());
    let (mut sx, mut sy, mut worst) = (0.0, 0.0, f64::INFINITY);
    for k in 0..n {
        sx += x.get(k).copied().unwrap_or(0.0);
        sy += y.get(k).copied().unwrap_or(0.0);
        worst = worst.min(sx - sy);
    }
    if n == 0 {
        0.0
    } else {
        worst
    }
}
