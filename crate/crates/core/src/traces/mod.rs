//! Trace-side quantities: the dilation functional `π`, the functional `p` built from `M_m`,
//! Dixmier-type brackets, the `ψ(2t)/ψ(t)` criterion and the Figiel-Kalton diagnostic.
//!
//! Generalized limits are never represented; every limit-type quantity comes back as a
//! [`LimitBracket`] over the tail half of its schedule.

mod bracket;
mod estimates;
mod generator;

pub use bracket::{parse_schedule, LimitBracket, DEFAULT_REL_TOL};
pub use estimates::{
    criterion, dixmier_bracket, fk_diagnostic, hardy_norm, p_estimate, pi_estimate, smooth_norm, CriterionReport, FkReport,
    FkVerdict, PInput,
};
pub use generator::{Element, Generator};
