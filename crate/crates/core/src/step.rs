//! Right-open step functions on `(0, T]` with exact rational breakpoints.
//!
//! A step function is stored as breakpoints `b_1 < ... < b_r = T` and values
//! `v_1, ..., v_r`, where `v_i` is taken on `(b_{i-1}, b_i]` and `b_0 = 0`.
//! Beyond the horizon `T` the function is zero. Adjacent cells with equal
//! values are always merged, so derived structural equality is function
//! equality up to trailing zero cells (see the `PartialEq` impls).

use std::cmp::Ordering;

use num_traits::{Signed, Zero};

use crate::error::{invalid, Result};
use crate::rational::{int, Q};
use crate::seq::{RSeq, Seq};

/// A step function with arbitrary (possibly negative) rational values.
#[derive(Clone, Debug, Default)]
pub struct SignedStep {
    bps: Vec<Q>,
    vals: Vec<Q>,
    cum: Vec<Q>,
}

/// Value of a partial integral together with a flag set when `t` passed the horizon.
#[derive(Clone, Debug, PartialEq)]
pub struct PartialSum {
    pub value: Q,
    pub truncated: bool,
}

impl SignedStep {
    pub fn new(breakpoints: Vec<Q>, values: Vec<Q>) -> Result<Self> {
        if breakpoints.len() != values.len() {
            return invalid(format!(
                "{} breakpoints but {} values",
                breakpoints.len(),
                values.len()
            ));
        }
        if let Some(first) = breakpoints.first() {
            if !first.is_positive() {
                return invalid("breakpoints must be positive");
            }
        }
        if breakpoints.windows(2).any(|w| w[0] >= w[1]) {
            return invalid("breakpoints must be strictly increasing");
        }
        Ok(Self::from_sorted(breakpoints, values))
    }

    /// The zero function with an empty horizon.
    pub fn zero() -> Self {
        Self::default()
    }

    /// Builds without validation; callers guarantee strictly increasing positive breakpoints.
    pub(crate) fn from_sorted(breakpoints: Vec<Q>, values: Vec<Q>) -> Self {
        let mut bps: Vec<Q> = Vec::with_capacity(breakpoints.len());
        let mut vals: Vec<Q> = Vec::with_capacity(values.len());
        for (b, v) in breakpoints.into_iter().zip(values) {
            if let Some(last) = vals.last() {
                if *last == v {
                    *bps.last_mut().unwrap() = b;
                    continue;
                }
            }
            bps.push(b);
            vals.push(v);
        }
        let mut cum = Vec::with_capacity(bps.len());
        let mut acc = Q::zero();
        let mut prev = Q::zero();
        for (b, v) in bps.iter().zip(&vals) {
            acc += v * (b - &prev);
            cum.push(acc.clone());
            prev = b.clone();
        }
        Self { bps, vals, cum }
    }

    /// Builds from `(length, value)` pairs laid out left to right; zero-length cells are skipped.
    pub fn from_lengths(cells: impl IntoIterator<Item = (Q, Q)>) -> Self {
        let mut bps = Vec::new();
        let mut vals = Vec::new();
        let mut t = Q::zero();
        for (len, v) in cells {
            if len.is_zero() {
                continue;
            }
            t += len;
            bps.push(t.clone());
            vals.push(v);
        }
        Self::from_sorted(bps, vals)
    }

    pub fn breakpoints(&self) -> &[Q] {
        &self.bps
    }

    pub fn values(&self) -> &[Q] {
        &self.vals
    }

    pub fn len(&self) -> usize {
        self.bps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bps.is_empty()
    }

    pub fn horizon(&self) -> Q {
        self.bps.last().cloned().unwrap_or_else(Q::zero)
    }

    /// Cells as `(left, right, value)`.
    pub fn cells(&self) -> impl Iterator<Item = (Q, &Q, &Q)> + '_ {
        let zero = Q::zero();
        self.bps.iter().zip(&self.vals).enumerate().map(move |(i, (b, v))| {
            let lo = if i == 0 { zero.clone() } else { self.bps[i - 1].clone() };
            (lo, b, v)
        })
    }

    /// Index of the cell `(b_{i-1}, b_i]` containing `t`, if `0 < t <= T`.
    fn cell_index(&self, t: &Q) -> Option<usize> {
        if !t.is_positive() {
            return None;
        }
        let i = self.bps.partition_point(|b| b < t);
        (i < self.bps.len()).then_some(i)
    }

    pub fn value_at(&self, t: &Q) -> Q {
        self.cell_index(t).map(|i| self.vals[i].clone()).unwrap_or_else(Q::zero)
    }

    /// `X(t) = ∫_0^t x`, clamped to `X(T)` beyond the horizon.
    pub fn partial_sum(&self, t: &Q) -> Q {
        if !t.is_positive() {
            return Q::zero();
        }
        match self.cell_index(t) {
            Some(i) => {
                let (lo, base) = if i == 0 {
                    (Q::zero(), Q::zero())
                } else {
                    (self.bps[i - 1].clone(), self.cum[i - 1].clone())
                };
                base + &self.vals[i] * (t - lo)
            }
            None => self.total(),
        }
    }

    pub fn partial_sum_flagged(&self, t: &Q) -> PartialSum {
        PartialSum { value: self.partial_sum(t), truncated: *t > self.horizon() }
    }

    /// `X(T)`.
    pub fn total(&self) -> Q {
        self.cum.last().cloned().unwrap_or_else(Q::zero)
    }

    /// Partial sums at the breakpoints.
    pub fn cumulative(&self) -> &[Q] {
        &self.cum
    }

    /// `∫_a^b x`, negative when `b < a`.
    pub fn integral(&self, a: &Q, b: &Q) -> Q {
        self.partial_sum(b) - self.partial_sum(a)
    }

    fn combine(&self, other: &Self, f: impl Fn(&Q, &Q) -> Q) -> Self {
        let grid = merge_sorted(&self.bps, &other.bps);
        let vals = grid.iter().map(|b| f(&self.value_at(b), &other.value_at(b))).collect();
        Self::from_sorted(grid, vals)
    }

    pub fn add(&self, other: &Self) -> Self {
        self.combine(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.combine(other, |a, b| a - b)
    }

    pub fn scale(&self, c: &Q) -> Self {
        Self::from_sorted(self.bps.clone(), self.vals.iter().map(|v| v * c).collect())
    }

    pub fn map_values(&self, f: impl Fn(&Q) -> Q) -> Self {
        Self::from_sorted(self.bps.clone(), self.vals.iter().map(f).collect())
    }

    pub fn positive_part(&self) -> StepFn {
        StepFn(self.map_values(|v| if v.is_positive() { v.clone() } else { Q::zero() }))
    }

    pub fn negative_part(&self) -> StepFn {
        StepFn(self.map_values(|v| if v.is_negative() { -v } else { Q::zero() }))
    }

    pub fn abs(&self) -> StepFn {
        StepFn(self.map_values(|v| v.abs()))
    }

    /// `(σ_s x)(t) = x(t/s)` for rational `s > 0`.
    pub fn dilate_by(&self, s: &Q) -> Self {
        assert!(s.is_positive(), "dilation factor must be positive");
        Self::from_sorted(self.bps.iter().map(|b| b * s).collect(), self.vals.clone())
    }

    /// Keeps `x` on `(0, c]` and zeroes it on `(c, T]`; the horizon is unchanged.
    pub fn head_truncate(&self, c: &Q) -> Self {
        let t = self.horizon();
        if *c >= t {
            return self.clone();
        }
        let mut bps = vec![c.clone()];
        bps.extend(self.bps.iter().filter(|b| *b > c).cloned());
        let grid = merge_sorted(&self.bps, &bps);
        let vals = grid
            .iter()
            .map(|b| if b <= c { self.value_at(b) } else { Q::zero() })
            .collect();
        Self::from_sorted(grid, vals)
    }

    /// Same function with extra cell boundaries at `points` (those beyond `T` extend the
    /// horizon with zero cells).
    pub fn refine(&self, points: &[Q]) -> Self {
        let mut pts: Vec<Q> = points.iter().filter(|p| p.is_positive()).cloned().collect();
        pts.sort();
        pts.dedup();
        let grid = merge_sorted(&self.bps, &pts);
        let vals = grid.iter().map(|b| self.value_at(b)).collect();
        // from_sorted would merge the new boundaries away again; keep them explicitly
        let mut out = Self { bps: grid, vals, cum: Vec::new() };
        out.recompute_cum();
        out
    }

    fn recompute_cum(&mut self) {
        let mut acc = Q::zero();
        let mut prev = Q::zero();
        self.cum.clear();
        for (b, v) in self.bps.iter().zip(&self.vals) {
            acc += v * (b - &prev);
            self.cum.push(acc.clone());
            prev = b.clone();
        }
    }

    /// Extends the horizon to `t` with a zero cell when `t > T`.
    pub fn extend_to(&self, t: &Q) -> Self {
        if *t <= self.horizon() {
            return self.clone();
        }
        let mut bps = self.bps.clone();
        let mut vals = self.vals.clone();
        bps.push(t.clone());
        vals.push(Q::zero());
        Self::from_sorted(bps, vals)
    }

    pub fn is_nonnegative(&self) -> bool {
        self.vals.iter().all(|v| !v.is_negative())
    }

    pub fn is_nonincreasing(&self) -> bool {
        self.vals.windows(2).all(|w| w[0] >= w[1])
    }

    pub fn sup_abs(&self) -> Q {
        self.vals.iter().map(|v| v.abs()).max().unwrap_or_else(Q::zero)
    }

    /// Merged cells with trailing zero cells dropped.
    fn canonical(&self) -> (Vec<&Q>, Vec<&Q>) {
        let mut bps: Vec<&Q> = Vec::new();
        let mut vals: Vec<&Q> = Vec::new();
        for (b, v) in self.bps.iter().zip(&self.vals) {
            if vals.last() == Some(&v) {
                *bps.last_mut().unwrap() = b;
            } else {
                bps.push(b);
                vals.push(v);
            }
        }
        while vals.last().is_some_and(|v| v.is_zero()) {
            vals.pop();
            bps.pop();
        }
        (bps, vals)
    }
}

impl PartialEq for SignedStep {
    fn eq(&self, other: &Self) -> bool {
        self.canonical() == other.canonical()
    }
}

impl Eq for SignedStep {}

/// A nonnegative step function, the desk model of `μ(x)` and of positive elements
/// of `(L_1 + L_∞)(0, ∞)` truncated to a horizon.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct StepFn(SignedStep);

impl StepFn {
    pub fn new(breakpoints: Vec<Q>, values: Vec<Q>) -> Result<Self> {
        if values.iter().any(|v| v.is_negative()) {
            return invalid("step function values must be nonnegative");
        }
        SignedStep::new(breakpoints, values).map(StepFn)
    }

    pub fn zero() -> Self {
        Self::default()
    }

    /// `c·χ_(0,t]`.
    pub fn indicator(t: Q, c: Q) -> Self {
        StepFn(SignedStep::from_sorted(vec![t], vec![c]))
    }

    pub fn from_lengths(cells: impl IntoIterator<Item = (Q, Q)>) -> Result<Self> {
        let s = SignedStep::from_lengths(cells);
        if !s.is_nonnegative() {
            return invalid("step function values must be nonnegative");
        }
        Ok(StepFn(s))
    }

    pub(crate) fn from_signed_unchecked(s: SignedStep) -> Self {
        debug_assert!(s.is_nonnegative());
        StepFn(s)
    }

    pub fn as_signed(&self) -> &SignedStep {
        &self.0
    }

    pub fn into_signed(self) -> SignedStep {
        self.0
    }

    pub fn breakpoints(&self) -> &[Q] {
        self.0.breakpoints()
    }

    pub fn values(&self) -> &[Q] {
        self.0.values()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn horizon(&self) -> Q {
        self.0.horizon()
    }

    pub fn cells(&self) -> impl Iterator<Item = (Q, &Q, &Q)> + '_ {
        self.0.cells()
    }

    pub fn value_at(&self, t: &Q) -> Q {
        self.0.value_at(t)
    }

    pub fn partial_sum(&self, t: &Q) -> Q {
        self.0.partial_sum(t)
    }

    pub fn partial_sum_flagged(&self, t: &Q) -> PartialSum {
        self.0.partial_sum_flagged(t)
    }

    pub fn total(&self) -> Q {
        self.0.total()
    }

    pub fn cumulative(&self) -> &[Q] {
        self.0.cumulative()
    }

    pub fn integral(&self, a: &Q, b: &Q) -> Q {
        self.0.integral(a, b)
    }

    pub fn add(&self, other: &Self) -> Self {
        StepFn(self.0.add(&other.0))
    }

    pub fn scale(&self, c: &Q) -> Self {
        assert!(!c.is_negative(), "scaling a nonnegative function by a negative factor");
        StepFn(self.0.scale(c))
    }

    pub fn is_nonincreasing(&self) -> bool {
        self.0.is_nonincreasing()
    }

    /// Largest value; `v_1` once rearranged.
    pub fn sup(&self) -> Q {
        self.0.sup_abs()
    }

    /// The nonincreasing rearrangement. Equal values keep their input order (stable sort),
    /// which is unobservable after merging.
    pub fn rearrange(&self) -> StepFn {
        if self.is_nonincreasing() {
            return self.clone();
        }
        let mut cells: Vec<(Q, Q)> =
            self.cells().map(|(lo, hi, v)| (hi - lo, v.clone())).collect();
        cells.sort_by(|a, b| b.1.cmp(&a.1));
        StepFn(SignedStep::from_lengths(cells))
    }

    /// `σ_m` for a positive integer `m`: `(σ_m x)(t) = x(t/m)` on `(0, mT]`.
    pub fn dilate(&self, m: u64) -> StepFn {
        assert!(m >= 1, "dilation factor must be at least 1");
        StepFn(self.0.dilate_by(&int(m as i64)))
    }

    pub fn dilate_by(&self, s: &Q) -> StepFn {
        StepFn(self.0.dilate_by(s))
    }

    pub fn head_truncate(&self, c: &Q) -> StepFn {
        StepFn(self.0.head_truncate(c))
    }

    pub fn refine(&self, points: &[Q]) -> StepFn {
        StepFn(self.0.refine(points))
    }

    pub fn extend_to(&self, t: &Q) -> StepFn {
        StepFn(self.0.extend_to(t))
    }

    /// `d_x(s) = m{x > s}`.
    pub fn distribution(&self, s: &Q) -> Q {
        self.cells().filter(|(_, _, v)| *v > s).map(|(lo, hi, _)| hi - lo).sum()
    }

    /// Expands into unit cells when every breakpoint is an integer.
    pub fn to_seq(&self) -> Option<Seq> {
        let mut out = Vec::new();
        for (lo, hi, v) in self.cells() {
            if !hi.is_integer() {
                return None;
            }
            let n = (hi - lo).to_integer();
            let n: usize = n.try_into().ok()?;
            out.extend(std::iter::repeat(v.clone()).take(n));
        }
        Some(Seq::new(out).expect("values are nonnegative"))
    }

    pub fn to_rseq(&self) -> Option<RSeq> {
        self.rearrange().to_seq().map(|s| RSeq::from_sorted_unchecked(s.into_values()))
    }
}

impl From<&RSeq> for StepFn {
    fn from(x: &RSeq) -> Self {
        StepFn(SignedStep::from_lengths(x.values().iter().map(|v| (int(1), v.clone()))))
    }
}

impl From<&Seq> for StepFn {
    fn from(x: &Seq) -> Self {
        StepFn(SignedStep::from_lengths(x.values().iter().map(|v| (int(1), v.clone()))))
    }
}

impl From<StepFn> for SignedStep {
    fn from(x: StepFn) -> Self {
        x.0
    }
}

/// Sorted union without duplicates.
pub(crate) fn merge_sorted(a: &[Q], b: &[Q]) -> Vec<Q> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let next = match (a.get(i), b.get(j)) {
            (Some(x), Some(y)) => match x.cmp(y) {
                Ordering::Less => {
                    i += 1;
                    x
                }
                Ordering::Greater => {
                    j += 1;
                    y
                }
                Ordering::Equal => {
                    i += 1;
                    j += 1;
                    x
                }
            },
            (Some(x), None) => {
                i += 1;
                x
            }
            (None, Some(y)) => {
                j += 1;
                y
            }
            (None, None) => unreachable!(),
        };
        out.push(next.clone());
    }
    out
}
