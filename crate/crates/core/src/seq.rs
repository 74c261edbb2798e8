//! Finite sequences: arbitrary nonnegative `Seq` and nonincreasing `RSeq`.

use num_traits::{Signed, Zero};

use crate::error::{invalid, Result};
use crate::rational::{floor_int, int, Q};
use crate::step::PartialSum;

/// A finite list of nonnegative rationals (an element of `l_∞` with finite support).
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Seq(Vec<Q>);

/// A finite nonincreasing nonnegative list; the desk model of a singular-value sequence.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RSeq(Vec<Q>);

impl Seq {
    pub fn new(values: Vec<Q>) -> Result<Self> {
        if values.iter().any(|v| v.is_negative()) {
            return invalid("sequence entries must be nonnegative");
        }
        Ok(Seq(values))
    }

    pub fn values(&self) -> &[Q] {
        &self.0
    }

    pub fn into_values(self) -> Vec<Q> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Stable descending sort: equal values keep their input order.
    pub fn rearrange(&self) -> RSeq {
        let mut v = self.0.clone();
        v.sort_by(|a, b| b.cmp(a));
        RSeq(v)
    }

    /// Indices of the input in rearranged order; ties keep input order.
    pub fn rearrangement_order(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.0.len()).collect();
        idx.sort_by(|&i, &j| self.0[j].cmp(&self.0[i]));
        idx
    }

    /// `σ_{1/2}`: averages consecutive pairs, padding a trailing zero for odd length.
    pub fn sigma_half(&self) -> Seq {
        let two = int(2);
        Seq(self
            .0
            .chunks(2)
            .map(|c| {
                let second = c.get(1).cloned().unwrap_or_else(Q::zero);
                (&c[0] + second) / &two
            })
            .collect())
    }

    pub fn distribution(&self, s: &Q) -> usize {
        self.0.iter().filter(|v| *v > s).count()
    }
}

impl RSeq {
    pub fn new(values: Vec<Q>) -> Result<Self> {
        if values.iter().any(|v| v.is_negative()) {
            return invalid("sequence entries must be nonnegative");
        }
        if values.windows(2).any(|w| w[0] < w[1]) {
            return invalid("sequence must be nonincreasing");
        }
        Ok(RSeq(values))
    }

    pub(crate) fn from_sorted_unchecked(values: Vec<Q>) -> Self {
        debug_assert!(values.windows(2).all(|w| w[0] >= w[1]));
        RSeq(values)
    }

    pub fn values(&self) -> &[Q] {
        &self.0
    }

    pub fn into_values(self) -> Vec<Q> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_seq(&self) -> Seq {
        Seq(self.0.clone())
    }

    /// Entry `k` (1-based), zero past the end.
    pub fn get(&self, k: usize) -> Q {
        if k == 0 {
            return Q::zero();
        }
        self.0.get(k - 1).cloned().unwrap_or_else(Q::zero)
    }

    /// Prefix sums `S_0 = 0, S_1, ..., S_n`.
    pub fn prefix_sums(&self) -> Vec<Q> {
        let mut out = Vec::with_capacity(self.0.len() + 1);
        let mut acc = Q::zero();
        out.push(acc.clone());
        for v in &self.0 {
            acc += v;
            out.push(acc.clone());
        }
        out
    }

    /// `Σ_{k≤⌊t⌋} x_k + frac(t)·x_{⌈t⌉}`; clamps past the length and flags it.
    pub fn partial_sum(&self, t: &Q) -> PartialSum {
        let n = self.0.len();
        if !t.is_positive() {
            return PartialSum { value: Q::zero(), truncated: false };
        }
        let whole = floor_int(t);
        let whole: usize = whole.try_into().unwrap_or(usize::MAX);
        if whole >= n {
            let value = self.0.iter().sum();
            return PartialSum { value, truncated: *t > int(n as i64) };
        }
        let head: Q = self.0[..whole].iter().sum();
        let frac = t - int(whole as i64);
        PartialSum { value: head + frac * &self.0[whole], truncated: false }
    }

    /// `σ_m`: each entry repeated `m` times.
    pub fn dilate(&self, m: usize) -> RSeq {
        assert!(m >= 1, "dilation factor must be at least 1");
        RSeq(self.0.iter().flat_map(|v| std::iter::repeat(v.clone()).take(m)).collect())
    }

    /// Keeps entries with index `k ≤ c` and zeroes the rest (length unchanged).
    pub fn head_truncate(&self, c: &Q) -> RSeq {
        let keep: usize = if c.is_positive() {
            floor_int(c).try_into().unwrap_or(usize::MAX)
        } else {
            0
        };
        RSeq(self
            .0
            .iter()
            .enumerate()
            .map(|(i, v)| if i < keep { v.clone() } else { Q::zero() })
            .collect())
    }

    /// Rearrangement of the concatenation.
    pub fn direct_sum(&self, other: &RSeq) -> RSeq {
        let mut out = Vec::with_capacity(self.len() + other.len());
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() || j < other.0.len() {
            let take_left = match (self.0.get(i), other.0.get(j)) {
                (Some(a), Some(b)) => a >= b,
                (Some(_), None) => true,
                _ => false,
            };
            if take_left {
                out.push(self.0[i].clone());
                i += 1;
            } else {
                out.push(other.0[j].clone());
                j += 1;
            }
        }
        RSeq(out)
    }

    pub fn sigma_half(&self) -> RSeq {
        RSeq(self.as_seq().sigma_half().0)
    }

    pub fn scale(&self, c: &Q) -> RSeq {
        assert!(!c.is_negative());
        RSeq(self.0.iter().map(|v| v * c).collect())
    }

    /// Pointwise sum of two rearranged sequences (still nonincreasing).
    pub fn add(&self, other: &RSeq) -> RSeq {
        let n = self.len().max(other.len());
        RSeq((1..=n).map(|k| self.get(k) + other.get(k)).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    fn s(v: &[i64]) -> Seq {
        Seq::new(v.iter().map(|&x| int(x)).collect()).unwrap()
    }

    fn r(v: &[i64]) -> RSeq {
        RSeq::new(v.iter().map(|&x| int(x)).collect()).unwrap()
    }

    #[test]
    fn rearrange_examples() {
        assert_eq!(s(&[1, 3, 2]).rearrange(), r(&[3, 2, 1]));
        assert_eq!(s(&[0, 0]).rearrange(), r(&[0, 0]));
        assert_eq!(s(&[2, 5, 2, 7]).rearrangement_order(), vec![3, 1, 0, 2]);
    }

    #[test]
    fn partial_sum_examples() {
        let x = RSeq::new(vec![int(1), q(1, 2), q(1, 3)]).unwrap();
        assert_eq!(x.partial_sum(&int(2)).value, q(3, 2));
        let y = RSeq::new(vec![int(1), q(1, 2)]).unwrap();
        assert_eq!(y.partial_sum(&q(3, 2)).value, q(5, 4));
        let p = y.partial_sum(&int(3));
        assert_eq!(p.value, q(3, 2));
        assert!(p.truncated);
    }

    #[test]
    fn dilate_examples() {
        let x = RSeq::new(vec![int(1), q(1, 2)]).unwrap();
        assert_eq!(x.dilate(2).values(), &[int(1), int(1), q(1, 2), q(1, 2)]);
        assert_eq!(x.dilate(1), x);
    }

    #[test]
    fn sigma_half_examples() {
        assert_eq!(s(&[4, 2, 2, 0]).sigma_half(), s(&[3, 1]));
        assert_eq!(s(&[5, 5]).sigma_half(), s(&[5]));
        assert_eq!(
            s(&[1, 0, 0, 0]).sigma_half().values(),
            &[q(1, 2), int(0)]
        );
        assert_eq!(s(&[3]).sigma_half().values(), &[q(3, 2)]);
    }

    #[test]
    fn head_truncate_examples() {
        assert_eq!(r(&[1, 1, 1]).head_truncate(&int(2)), r(&[1, 1, 0]));
        assert_eq!(r(&[1, 1, 1]).head_truncate(&int(3)), r(&[1, 1, 1]));
    }

    #[test]
    fn direct_sum_examples() {
        assert_eq!(r(&[1]).direct_sum(&r(&[2])), r(&[2, 1]));
        assert_eq!(r(&[3, 1]).direct_sum(&r(&[])), r(&[3, 1]));
        assert_eq!(r(&[1, 1]).direct_sum(&r(&[1, 1])), r(&[1, 1]).dilate(2));
    }

    #[test]
    fn rejects_increasing() {
        assert!(RSeq::new(vec![int(1), int(2)]).is_err());
        assert!(Seq::new(vec![int(-1)]).is_err());
    }
}
