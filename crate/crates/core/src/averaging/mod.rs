//! Averaging operators: conditional expectations on partitions, the Hardy operator `C`,
//! the logarithmic means `M_m`, and the node constructions `a_n(θ)`, `B_{κ,θ}`, `A_m`.

mod expectation;
mod nodes;
mod smooth;

pub use expectation::{expectation, expectation_fn, Partition, Tail};
pub use nodes::{a_level, a_nodes, auto_window, build_a_m, build_b, kappa_truncate, ANodes, Construction, Kappa, KappaSeq};
pub use smooth::{hardy, m_avg, Sampling, Scale, SmoothCell, SmoothEval};
