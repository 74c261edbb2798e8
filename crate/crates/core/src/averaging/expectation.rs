use num_traits::Zero;

use crate::error::{invalid, Result};
use crate::rational::{fmt_q, int, Q};
use crate::step::{merge_sorted, SignedStep, StepFn};

/// Strictly increasing positive nodes `n_1 < n_2 < …`; the cells are `(n_{i-1}, n_i]` with `n_0 = 0`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Partition {
    nodes: Vec<Q>,
}

impl Partition {
    pub fn new(nodes: Vec<Q>) -> Result<Self> {
        if let Some(bad) = nodes.iter().find(|t| !(**t > Q::zero())) {
            return invalid(format!("partition node {} is not positive", fmt_q(bad)));
        }
        if nodes.windows(2).any(|w| w[0] >= w[1]) {
            return invalid("partition nodes must be strictly increasing");
        }
        Ok(Partition { nodes })
    }

    pub fn empty() -> Self {
        Partition::default()
    }

    /// `{1, 2, …, n}`.
    pub fn unit(n: usize) -> Self {
        Partition { nodes: (1..=n as i64).map(int).collect() }
    }

    pub fn nodes(&self) -> &[Q] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn last(&self) -> Option<&Q> {
        self.nodes.last()
    }

    pub fn union(parts: &[Partition]) -> Partition {
        let nodes = parts.iter().fold(Vec::new(), |acc, p| merge_sorted(&acc, &p.nodes));
        Partition { nodes }
    }
}

/// What happens beyond the last node.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Tail {
    /// `x` is left as it is on `(last node, T]`.
    #[default]
    Keep,
    /// The unbounded last cell carries no averaging and is dropped: `E(x|A) = 0` there.
    Zero,
}

/// Cellwise averages `(1/|A_k|) ∫_{A_k} x` on the partition cells.
pub fn expectation(x: &SignedStep, part: &Partition, tail: Tail) -> SignedStep {
    let Some(last) = part.last() else {
        return match tail {
            Tail::Keep => x.clone(),
            Tail::Zero => SignedStep::zero(),
        };
    };
    let mut bps = Vec::with_capacity(part.len() + x.len());
    let mut vals = Vec::with_capacity(part.len() + x.len());
    let mut prev_t = Q::zero();
    let mut prev_x = Q::zero();
    for n in part.nodes() {
        let cur = x.partial_sum(n);
        vals.push((&cur - &prev_x) / (n - &prev_t));
        bps.push(n.clone());
        prev_t = n.clone();
        prev_x = cur;
    }
    if tail == Tail::Keep {
        for (_, r, v) in x.cells().filter(|(_, r, _)| *r > last) {
            bps.push(r.clone());
            vals.push(v.clone());
        }
    }
    SignedStep::new(bps, vals).expect("partition cells are ordered")
}

pub fn expectation_fn(x: &StepFn, part: &Partition, tail: Tail) -> StepFn {
    StepFn::from_signed_unchecked(expectation(x.as_signed(), part, tail))
}
