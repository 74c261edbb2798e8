mod averaging;
mod basic;
mod operators;

use num_traits::Zero;
use serde_json::{json, Value};

use crate::io::{signed_to_json, step_to_json};
use crate::rational::{fmt_q, Q};
use crate::step::{SignedStep, StepFn};

use super::{Kind, Lemma};

/// Attempts per trial for conditional lemmas before the trial counts as a miss.
pub(crate) const ATTEMPTS: usize = 16;

pub(crate) fn js(x: &StepFn) -> Value {
    step_to_json(x)
}

pub(crate) fn jss(x: &SignedStep) -> Value {
    signed_to_json(x)
}

pub(crate) fn jq(x: &Q) -> Value {
    json!(fmt_q(x))
}

/// `(rhs − lhs) / max(|lhs|, |rhs|)`, or the raw difference when both vanish.
pub(crate) fn rel_slack(lhs: f64, rhs: f64) -> f64 {
    let scale = lhs.abs().max(rhs.abs());
    if scale == 0.0 {
        0.0
    } else {
        (rhs - lhs) / scale
    }
}

pub(crate) fn min_q(acc: Option<Q>, v: Q) -> Option<Q> {
    Some(match acc {
        Some(a) if a <= v => a,
        _ => v,
    })
}

pub(crate) fn or_zero(v: Option<Q>) -> Q {
    v.unwrap_or_else(Q::zero)
}

macro_rules! lemma {
    ($id:literal, $module:literal, $kind:ident, $cond:literal, $tol:expr, $stmt:literal, $run:path) => {
        Lemma { id: $id, module: $module, kind: Kind::$kind, conditional: $cond, tol: $tol, statement: $stmt, run: $run }
    };
}

pub static LEMMAS: &[Lemma] = &[
    lemma!("rearrange-invariants", "core", Exact, false, 0.0,
        "μ(μ(x)) = μ(x) and d_μ(x) = d_x", basic::rearrange_invariants),
    lemma!("greedy-partial-sum", "core", Exact, false, 0.0,
        "∫_S x ≤ ∫_0^{|S|} μ(x) for unions S of cells", basic::greedy_partial_sum),
    lemma!("dilation-partial-sum", "core", Exact, false, 0.0,
        "∫_0^{mt} σ_m x = m ∫_0^t x", basic::dilation_partial_sum),
    lemma!("direct-sum-algebra", "core", Exact, false, 0.0,
        "x ⊕ y = y ⊕ x and (x ⊕ y) ⊕ z = x ⊕ (y ⊕ z)", basic::direct_sum_algebra),
    lemma!("norm-symmetry", "norms", Float, false, 1e-12,
        "‖x‖ = ‖μ(x)‖", basic::norm_symmetry),
    lemma!("norm-monotone", "norms", Float, false, 1e-10,
        "0 ≤ y ≤ x ⇒ ‖y‖ ≤ ‖x‖", basic::norm_monotone),
    lemma!("norm-triangle", "norms", Float, false, 1e-10,
        "‖x + y‖ ≤ ‖x‖ + ‖y‖", basic::norm_triangle),
    lemma!("marc-dilation", "norms", Float, false, 1e-10,
        "‖σ_m x‖ ≤ m‖x‖ in Marcinkiewicz spaces", basic::marc_dilation),
    lemma!("fnorm-pave", "norms", Float, false, 1e-10,
        "‖E(μ(x+y)|A)‖ ≤ ‖E(μ(x)|A)‖ + ‖E(μ(y)|A)‖, unit cells A", basic::fnorm_pave),
    lemma!("uniform-implies-submajor", "majorization", Exact, true, 0.0,
        "y ⊲ x (witness m ≤ 8) ⇒ y ≺≺ x", basic::uniform_implies_submajor),
    lemma!("submajor-preorder", "majorization", Exact, true, 0.0,
        "≺≺ is reflexive and transitive", basic::submajor_preorder),
    lemma!("submajor-pointwise", "majorization", Exact, false, 0.0,
        "μ(y) ≤ μ(x) ⇒ y ≺≺ x", basic::submajor_pointwise),
    lemma!("submajor-scaling", "majorization", Exact, false, 0.0,
        "cy ≺≺ cx ⇔ y ≺≺ x, margins scale by c", basic::submajor_scaling),
    lemma!("expectation-contraction", "averaging", Exact, false, 0.0,
        "E(x|A) ≺≺ x", averaging::expectation_contraction),
    lemma!("union-lemma", "averaging", Exact, false, 0.0,
        "E(x|∪C_i) ≺≺ Σ E(x|C_i)", averaging::union_lemma),
    lemma!("majorant-lemma", "averaging", Exact, false, 0.0,
        "κ ≥ κ' ⇒ E(x|B_κ) ≺≺ (3/2) E(x|B_κ')", averaging::majorant_lemma),
    lemma!("majorant-remark", "averaging", Exact, false, 0.0,
        "κ_n ≥ κ'_n only where κ_n² a_{3n} < a_{3n+1} still gives E(x|B_κ) ≺≺ (3/2) E(x|B_κ')",
        averaging::majorant_remark),
    lemma!("pam-union", "averaging", Exact, false, 0.0,
        "B_{m,1} ∪ B_{m,3/2} ∪ B_{m,9/4} = A_m and E(x|A_m) ≺≺ Σ E(x|B_{m,θ})", averaging::pam_union),
    lemma!("main-technical-estimate", "averaging", Exact, true, 0.0,
        "∫_{ma}^b E(x|B_κ) ≤ ∫_a^{mb}(x+u) ∀ ma ≤ b ⇒ m⁻¹σ_m E(x|B_{κ^{100m}}) ≺≺ 30μ(u)",
        averaging::main_technical_estimate),
    lemma!("kn-chain", "averaging", Exact, true, 0.0,
        "λ ≥ 100m ⇒ λ⁻¹σ_λ E(x|B_{κ^λ}) ≺≺ m⁻¹σ_m E(x|B_{κ^λ}) ≺≺ (3/2m)σ_m E(x|B_{κ^{100m}}) ≺≺ 45μ(u)",
        averaging::kn_chain),
    lemma!("prec-estimate", "averaging", Exact, false, 0.0,
        "X(t) ≤ (2/3)X(m⁴t) + (3/2)∫_0^{m⁴t} E(x|A_m)", averaging::prec_estimate),
    lemma!("prec-estimate-integrable", "averaging", Exact, false, 0.0,
        "X(t) ≤ (2/3)X(m⁴t) + (3/2)∫_0^{m⁴t} E(x|A_m) + C min(m⁴t, 1), C = X(∞)/min(a_{n0}, 1)",
        averaging::prec_estimate_integrable),
    lemma!("stupid-estimate", "averaging", Exact, false, 0.0,
        "b ≥ λa ⇒ ∫_{2^{-k}λa}^b y ≤ λ/(λ−1) ∫_a^b σ_{2^k} y", averaging::stupid_estimate),
    lemma!("pave-maj", "averaging", Exact, false, 0.0,
        "E(μ(x+y)|A) ⊲ E(μ(x)|A) + E(μ(y)|A) ⊲ 2σ_{1/2} E(μ(x+y)|A), witness 2", averaging::pave_maj),
    lemma!("fk-bound", "averaging", Exact, false, 0.0,
        "|C(μ(x₊) − μ(x₋))| ≤ n μ(z) for x = Σ_{k≤n}(x_k − y_k), μ(x_k) = μ(y_k)", averaging::fk_bound),
    lemma!("fk-dyadic", "averaging", Exact, false, 0.0,
        "x₁ = E(x|{2^n}) equals 2z − σ₂z with z = (Cx₁)(2^{n+1}) on (2^n, 2^{n+1}]", averaging::fk_dyadic),
    lemma!("mn-estimate", "averaging", Float, false, 1e-9,
        "ma ≤ b ⇒ ∫_a^{b/m} x ≤ ∫_a^b M_m x ≤ ∫_{a/m}^b x, so m⁻¹σ_m x ⊲ M_m x ⊲ x", averaging::mn_estimate),
    lemma!("hmn-monotone", "averaging", Float, true, 1e-9,
        "Cx ≤ Cz ⇒ C M_m x ≤ C M_m z", averaging::hmn_monotone),
    lemma!("pi-convexity", "traces", Float, false, 1e-10,
        "π(x + y) ≤ π(x) + π(y)", operators::pi_convexity),
    lemma!("pi-dilation", "traces", Float, false, 1e-12,
        "‖σ_m σ_k μ(x)‖/m = k ‖σ_{mk} μ(x)‖/(mk)", operators::pi_dilation),
    lemma!("p-le-norm", "traces", Float, false, 1e-9,
        "‖(M_m x)₊‖ ≤ ‖x‖ for x = μ(a) − μ(b)", operators::p_le_norm),
    lemma!("dixmier-l1", "traces", Float, false, 1e-12,
        "S(n)/ψ(n) ≤ S(∞)/ψ(n) → 0 for summable s", operators::dixmier_l1),
    lemma!("linalg-traces-coherence", "traces", Float, false, 1e-9,
        "μ(A^{⊕m}) = σ_m μ(A), so the π series of A^{⊕m} is m times that of A at m·k", operators::coherence),
    lemma!("svd-oracle", "linalg", Float, false, 1e-10,
        "Jacobi singular values match √eig(AᵀA)", operators::svd_oracle),
    lemma!("unitary-invariance", "linalg", Float, false, 1e-9,
        "μ(UAV) = μ(A) for orthogonal U, V", operators::unitary_invariance),
    lemma!("rear-sum", "linalg", Float, false, 1e-8,
        "μ(A+B) ≺≺ μ(A) + μ(B) ≺≺ 2σ_{1/2}μ(A+B) for A, B ≥ 0", operators::rear_sum),
    lemma!("mu-sum", "linalg", Float, false, 1e-8,
        "∫_{2a}^b μ(A+B) ≤ ∫_a^b (μ(A)+μ(B)) ≤ … and ∫_{2a}^b (μ(A)+μ(B)) ≤ ∫_{2a}^{2b} μ(A+B)", operators::mu_sum),
];
