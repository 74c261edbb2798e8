use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::{int, powi, q, Q};
use crate::step::StepFn;

use super::Partition;

/// `(3/2)^n · θ`.
pub fn a_level(n: i64, theta: &Q) -> Q {
    powi(&q(3, 2), n) * theta
}

/// Smallest `t` with `X(t) = level`, or `None` when `level > X(T)`.
fn invert(x: &StepFn, level: &Q) -> Option<Q> {
    let cum = x.cumulative();
    let i = cum.partition_point(|c| c < level);
    if i == cum.len() {
        return None;
    }
    let (l, prev) = if i == 0 { (Q::zero(), Q::zero()) } else { (x.breakpoints()[i - 1].clone(), cum[i - 1].clone()) };
    Some(l + (level - prev) / &x.values()[i])
}

/// The nodes `a_n(θ)` on an index window.
#[derive(Clone, Debug, PartialEq)]
pub struct ANodes {
    pub theta: Q,
    pub nodes: BTreeMap<i64, Q>,
    /// Set when the window cuts off indices the unbounded model would contain.
    pub truncated: bool,
}

impl ANodes {
    pub fn get(&self, n: i64) -> Option<&Q> {
        self.nodes.get(&n)
    }
}

/// `a_n(θ)` for `n ≥ n_min` while `(3/2)^n θ ≤ X(T)`.
pub fn a_nodes(x: &StepFn, theta: &Q, n_min: i64) -> Result<ANodes> {
    if !theta.is_positive() {
        return Err(Error::Invalid("theta must be positive".into()));
    }
    let mut nodes = BTreeMap::new();
    let mut n = n_min;
    while let Some(t) = invert(x, &a_level(n, theta)) {
        nodes.insert(n, t);
        n += 1;
    }
    // The unbounded model has indices below any finite window whenever X is not identically zero.
    Ok(ANodes { theta: theta.clone(), nodes, truncated: !x.total().is_zero() })
}

/// Default lower index for the constructions: a few levels below `X(b_1)`, so that the first
/// cell of `x` holds the smallest computed nodes.
pub fn auto_window(x: &StepFn, theta: &Q) -> i64 {
    let Some(first) = x.cumulative().first() else { return 0 };
    let mut n = 0i64;
    while a_level(n, theta) > *first {
        n -= 1;
    }
    while a_level(n + 1, theta) <= *first {
        n += 1;
    }
    n - 3
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Kappa {
    Finite(u64),
    Infinite,
}

impl fmt::Display for Kappa {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Kappa::Finite(k) => write!(f, "{k}"),
            Kappa::Infinite => write!(f, "inf"),
        }
    }
}

/// `κ_n` on `n_min ..= n_min + len − 1`; every index outside the window reads as `∞`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KappaSeq {
    pub n_min: i64,
    pub entries: Vec<Kappa>,
}

impl KappaSeq {
    pub fn new(n_min: i64, entries: Vec<Kappa>) -> Result<Self> {
        if entries.iter().any(|k| *k == Kappa::Finite(0)) {
            return Err(Error::Invalid("kappa entries must be >= 1".into()));
        }
        Ok(KappaSeq { n_min, entries })
    }

    pub fn constant(n_min: i64, len: usize, k: u64) -> Self {
        KappaSeq::new(n_min, vec![Kappa::Finite(k); len]).expect("positive constant")
    }

    pub fn get(&self, n: i64) -> Kappa {
        usize::try_from(n - self.n_min).ok().and_then(|i| self.entries.get(i).copied()).unwrap_or(Kappa::Infinite)
    }

    pub fn indices(&self) -> std::ops::Range<i64> {
        self.n_min..self.n_min + self.entries.len() as i64
    }

    /// `κ ≥ κ'` entrywise on the union of both windows.
    pub fn dominates(&self, other: &KappaSeq) -> bool {
        let lo = self.n_min.min(other.n_min);
        let hi = self.indices().end.max(other.indices().end);
        (lo..hi).all(|n| self.get(n) >= other.get(n))
    }
}

impl FromStr for KappaSeq {
    type Err = Error;

    /// Comma-separated entries starting at index 0; `∞`, `inf` or `infinity` for an infinite entry.
    fn from_str(s: &str) -> Result<Self> {
        let entries = s
            .split(',')
            .map(str::trim)
            .filter(|p| !p.is_empty())
            .map(|p| match p {
                "∞" | "inf" | "infinity" => Ok(Kappa::Infinite),
                _ => p.parse::<u64>().map(Kappa::Finite).map_err(|_| Error::Parse(format!("bad kappa entry `{p}`"))),
            })
            .collect::<Result<Vec<_>>>()?;
        KappaSeq::new(0, entries)
    }
}

/// `κ^λ_n = κ_n` if `κ_n ≥ λ`, else `∞`.
pub fn kappa_truncate(kappa: &KappaSeq, lambda: &Q) -> Result<KappaSeq> {
    if !lambda.is_positive() {
        return Err(Error::Invalid("lambda must be positive".into()));
    }
    let entries = kappa
        .entries
        .iter()
        .map(|k| match k {
            Kappa::Finite(v) if int(*v as i64) >= *lambda => *k,
            _ => Kappa::Infinite,
        })
        .collect();
    KappaSeq::new(kappa.n_min, entries)
}

/// A node set built from `a_n(θ)`, with the index window actually inspected.
#[derive(Clone, Debug, PartialEq)]
pub struct Construction {
    pub partition: Partition,
    pub window: (i64, i64),
    pub truncated: bool,
}

/// `B_{κ,θ} = { κ_n a_{3n}(θ) : κ_n² a_{3n}(θ) < a_{3n+1}(θ) }` over the window of `κ`.
pub fn build_b(x: &StepFn, kappa: &KappaSeq, theta: &Q) -> Result<Construction> {
    let range = kappa.indices();
    let a = a_nodes(x, theta, 3 * range.start)?;
    let mut nodes = Vec::new();
    let mut truncated = false;
    for n in range.clone() {
        let Kappa::Finite(k) = kappa.get(n) else { continue };
        let (Some(lo), Some(hi)) = (a.get(3 * n), a.get(3 * n + 1)) else {
            truncated = true;
            continue;
        };
        let k = int(k as i64);
        if &k * &k * lo < *hi {
            nodes.push(k * lo);
        }
    }
    Ok(Construction { partition: Partition::new(nodes)?, window: (range.start, range.end - 1), truncated })
}

/// `A_m = { m a_n(1) : m² a_n(1) < a_{n+1}(1) }` for `n ≥ n_min`.
pub fn build_a_m(x: &StepFn, m: u64, n_min: i64) -> Result<Construction> {
    if m == 0 {
        return Err(Error::Invalid("m must be positive".into()));
    }
    let a = a_nodes(x, &int(1), n_min)?;
    let mq = int(m as i64);
    let mut nodes = Vec::new();
    let last = a.nodes.keys().next_back().copied().unwrap_or(n_min - 1);
    for (n, an) in &a.nodes {
        if let Some(next) = a.get(n + 1) {
            if &mq * &mq * an < *next {
                nodes.push(&mq * an);
            }
        }
    }
    Ok(Construction { partition: Partition::new(nodes)?, window: (n_min, last), truncated: true })
}
