//! Symmetric norms on nonincreasing step functions.
//!
//! Every norm is evaluated on the decreasing rearrangement of its argument.
//! Log-free norms (`sup`, `l1`) are exact; the rest are `f64` with a rough ulp budget.

use std::fmt;
use std::str::FromStr;

use num_traits::Zero;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rational::{int, to_f64, Q};
use crate::seq::RSeq;
use crate::step::StepFn;

/// A concave increasing weight with `ψ(0) = 0`.
#[derive(Clone, Debug, PartialEq)]
pub enum Psi {
    Log1p,
    Power(f64),
    Identity,
    Table(PsiTable),
}

/// Knots `(t_j, ψ(t_j))` joined linearly from `(0, 0)`, extended by the last slope.
#[derive(Clone, Debug, PartialEq)]
pub struct PsiTable {
    knots: Vec<(f64, f64)>,
}

impl PsiTable {
    pub fn new(knots: Vec<(f64, f64)>) -> Result<Self> {
        if knots.is_empty() {
            return Err(Error::Invalid("psi table needs at least one knot".into()));
        }
        let mut prev = (0.0, 0.0);
        let mut prev_slope = f64::INFINITY;
        for &(t, v) in &knots {
            if !(t.is_finite() && v.is_finite()) || t <= prev.0 || v < prev.1 {
                return Err(Error::Invalid("psi table knots must be increasing in t and nondecreasing in value".into()));
            }
            let slope = (v - prev.1) / (t - prev.0);
            if slope > prev_slope * (1.0 + 1e-12) {
                return Err(Error::Invalid(format!("psi table is not concave at t = {t}")));
            }
            prev_slope = slope;
            prev = (t, v);
        }
        Ok(PsiTable { knots })
    }

    pub fn knots(&self) -> &[(f64, f64)] {
        &self.knots
    }

    fn eval(&self, t: f64) -> f64 {
        let mut prev = (0.0, 0.0);
        for &(kt, kv) in &self.knots {
            if t <= kt {
                return prev.1 + (kv - prev.1) * (t - prev.0) / (kt - prev.0);
            }
            prev = (kt, kv);
        }
        let n = self.knots.len();
        let before = if n >= 2 { self.knots[n - 2] } else { (0.0, 0.0) };
        let slope = (prev.1 - before.1) / (prev.0 - before.0);
        prev.1 + slope * (t - prev.0)
    }
}

impl Psi {
    pub fn power(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::Invalid(format!("power exponent must lie in (0, 1], got {alpha}")));
        }
        Ok(Psi::Power(alpha))
    }

    pub fn eval(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        match self {
            Psi::Log1p => t.ln_1p(),
            Psi::Power(a) => t.powf(*a),
            Psi::Identity => t,
            Psi::Table(tab) => tab.eval(t),
        }
    }

    pub fn eval_q(&self, t: &Q) -> f64 {
        self.eval(to_f64(t))
    }

    /// Midpoint concavity and monotonicity on a geometric grid over `[lo, hi]`.
    pub fn check_shape(&self, lo: f64, hi: f64, steps: usize) -> bool {
        let grid = geometric_grid(lo, hi, steps.max(2));
        grid.windows(2).all(|w| {
            let (a, b) = (w[0], w[1]);
            let (pa, pb, pm) = (self.eval(a), self.eval(b), self.eval((a + b) / 2.0));
            let tol = 1e-12 * pb.abs().max(1.0);
            pb >= pa - tol && pm >= (pa + pb) / 2.0 - tol
        })
    }
}

impl fmt::Display for Psi {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Psi::Log1p => write!(f, "log1p"),
            Psi::Power(a) => write!(f, "pow:{a}"),
            Psi::Identity => write!(f, "identity"),
            Psi::Table(t) => {
                let parts: Vec<String> = t.knots.iter().map(|(a, b)| format!("{a}={b}")).collect();
                write!(f, "table:{}", parts.join(","))
            }
        }
    }
}

impl FromStr for Psi {
    type Err = Error;

    /// `log1p`, `pow:0.5`, `identity`, or `table:1=0.7,2=1.1`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (head, rest) = s.split_once(':').unwrap_or((s, ""));
        match head {
            "log1p" | "log" if rest.is_empty() => Ok(Psi::Log1p),
            "identity" | "id" if rest.is_empty() => Ok(Psi::Identity),
            "pow" | "power" => {
                let a: f64 = rest.parse().map_err(|_| Error::Parse(format!("bad power exponent `{rest}`")))?;
                Psi::power(a)
            }
            "table" => {
                let knots = rest
                    .split(',')
                    .map(|kv| {
                        let (t, v) = kv.split_once('=').ok_or_else(|| Error::Parse(format!("bad knot `{kv}`")))?;
                        let t: f64 = t.trim().parse().map_err(|_| Error::Parse(format!("bad knot `{kv}`")))?;
                        let v: f64 = v.trim().parse().map_err(|_| Error::Parse(format!("bad knot `{kv}`")))?;
                        Ok((t, v))
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(Psi::Table(PsiTable::new(knots)?))
            }
            _ => Err(Error::Parse(format!("unknown psi `{s}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum NormSpec {
    Sup,
    Lp(f64),
    L1,
    Marcinkiewicz(Psi),
    Lorentz(Psi),
    FNorm(Box<NormSpec>),
}

impl NormSpec {
    pub fn lp(p: f64) -> Result<Self> {
        if !(p >= 1.0 && p.is_finite()) {
            return Err(Error::Invalid(format!("lp needs finite p >= 1, got {p}")));
        }
        Ok(NormSpec::Lp(p))
    }
}

impl fmt::Display for NormSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NormSpec::Sup => write!(f, "sup"),
            NormSpec::Lp(p) => write!(f, "lp:{p}"),
            NormSpec::L1 => write!(f, "l1"),
            NormSpec::Marcinkiewicz(psi) => write!(f, "marc:{psi}"),
            NormSpec::Lorentz(psi) => write!(f, "lorentz:{psi}"),
            NormSpec::FNorm(inner) => write!(f, "f:{inner}"),
        }
    }
}

impl FromStr for NormSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (head, rest) = s.split_once(':').unwrap_or((s, ""));
        match head {
            "sup" | "linf" if rest.is_empty() => Ok(NormSpec::Sup),
            "l1" if rest.is_empty() => Ok(NormSpec::L1),
            "lp" => NormSpec::lp(rest.parse().map_err(|_| Error::Parse(format!("bad p in `{s}`")))?),
            "marc" => Ok(NormSpec::Marcinkiewicz(rest.parse()?)),
            "lorentz" => Ok(NormSpec::Lorentz(rest.parse()?)),
            "f" => Ok(NormSpec::FNorm(Box::new(rest.parse()?))),
            _ => Err(Error::Parse(format!("unknown norm `{s}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ErrorBudget {
    Exact,
    Float { ulps: u64 },
}

impl ErrorBudget {
    fn join(self, other: ErrorBudget) -> ErrorBudget {
        match (self, other) {
            (ErrorBudget::Exact, b) | (b, ErrorBudget::Exact) => b,
            (ErrorBudget::Float { ulps: a }, ErrorBudget::Float { ulps: b }) => ErrorBudget::Float { ulps: a + b },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NormValue {
    pub value: f64,
    #[serde(with = "opt_q", skip_serializing_if = "Option::is_none")]
    pub exact: Option<Q>,
    pub budget: ErrorBudget,
}

mod opt_q {
    use super::*;
    use serde::Serializer;

    pub fn serialize<S: Serializer>(x: &Option<Q>, s: S) -> std::result::Result<S::Ok, S::Error> {
        match x {
            Some(x) => s.serialize_str(&crate::rational::fmt_q(x)),
            None => s.serialize_none(),
        }
    }
}

impl NormValue {
    fn exact(x: Q) -> Self {
        NormValue { value: to_f64(&x), exact: Some(x), budget: ErrorBudget::Exact }
    }

    fn float(value: f64, ulps: u64) -> Self {
        NormValue { value, exact: None, budget: ErrorBudget::Float { ulps } }
    }
}

/// Norm of `x`, evaluated on its decreasing rearrangement.
pub fn norm(x: &StepFn, spec: &NormSpec) -> Result<NormValue> {
    let mu = if x.is_nonincreasing() { x.clone() } else { x.rearrange() };
    norm_nonincreasing(&mu, spec)
}

pub fn norm_seq(x: &RSeq, spec: &NormSpec) -> Result<NormValue> {
    norm_nonincreasing(&StepFn::from(x), spec)
}

fn norm_nonincreasing(mu: &StepFn, spec: &NormSpec) -> Result<NormValue> {
    let r = mu.len() as u64;
    Ok(match spec {
        NormSpec::Sup => NormValue::exact(mu.sup()),
        NormSpec::L1 => NormValue::exact(mu.total()),
        NormSpec::Lp(p) if *p == 1.0 => NormValue::exact(mu.total()),
        NormSpec::Lp(p) => {
            let s: f64 = mu.cells().map(|(l, r, v)| to_f64(v).powf(*p) * to_f64(&(r - &l))).sum();
            NormValue::float(s.powf(1.0 / p), 2 * r + 4)
        }
        NormSpec::Marcinkiewicz(psi) => {
            let mut best = 0.0f64;
            for (b, cum) in mu.breakpoints().iter().zip(mu.cumulative()) {
                let w = psi.eval_q(b);
                if w <= 0.0 {
                    return Err(Error::PsiZero(format!("psi vanishes at breakpoint {}", to_f64(b))));
                }
                best = best.max(to_f64(cum) / w);
            }
            NormValue::float(best, 4)
        }
        NormSpec::Lorentz(psi) => {
            let mut acc = 0.0;
            for (l, r, v) in mu.cells() {
                acc += to_f64(v) * (psi.eval_q(r) - psi.eval_q(&l));
            }
            NormValue::float(acc, 4 * r + 4)
        }
        NormSpec::FNorm(inner) => {
            let avg = unit_cell_averages(mu);
            let inner_val = norm_nonincreasing(&avg, inner)?;
            let sup = mu.sup();
            let value = to_f64(&sup) + inner_val.value;
            let exact = inner_val.exact.map(|e| e + &sup);
            NormValue { value, exact, budget: ErrorBudget::Exact.join(inner_val.budget) }
        }
    })
}

/// `E(μ|A)` for the unit-cell partition `A = {(k-1, k]}`, over `(0, ⌈T⌉]`.
pub fn unit_cell_averages(mu: &StepFn) -> StepFn {
    let n = crate::rational::ceil_int(&mu.horizon());
    let n: i64 = n.try_into().expect("horizon fits in i64");
    let mut vals = Vec::with_capacity(n as usize);
    let mut prev = Q::zero();
    for k in 1..=n {
        let cur = mu.partial_sum(&int(k));
        vals.push(&cur - &prev);
        prev = cur;
    }
    let bps = (1..=n).map(int).collect();
    StepFn::new(bps, vals).expect("averages of a nonnegative function")
}

/// `‖σ_m μ(x)‖` via dilation identities, without materializing `σ_m x`.
pub fn norm_of_dilation(x: &StepFn, m: u64, spec: &NormSpec) -> Result<f64> {
    let mu = if x.is_nonincreasing() { x.clone() } else { x.rearrange() };
    let mf = m as f64;
    Ok(match spec {
        NormSpec::Sup => to_f64(&mu.sup()),
        NormSpec::L1 => mf * to_f64(&mu.total()),
        NormSpec::Lp(p) => mf.powf(1.0 / p) * norm_nonincreasing(&mu, spec)?.value,
        NormSpec::Marcinkiewicz(psi) => {
            let mut best = 0.0f64;
            for (b, cum) in mu.breakpoints().iter().zip(mu.cumulative()) {
                let w = psi.eval(mf * to_f64(b));
                if w <= 0.0 {
                    return Err(Error::PsiZero(format!("psi vanishes at breakpoint {}", mf * to_f64(b))));
                }
                best = best.max(mf * to_f64(cum) / w);
            }
            best
        }
        NormSpec::Lorentz(psi) => mu
            .cells()
            .map(|(l, r, v)| to_f64(v) * (psi.eval(mf * to_f64(r)) - psi.eval(mf * to_f64(&l))))
            .sum(),
        NormSpec::FNorm(_) => norm_nonincreasing(&mu.dilate(m), spec)?.value,
    })
}

/// A nonincreasing nonnegative step function in floating point: `vals[i]` on `(ends[i-1], ends[i]]`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct F64Step {
    pub ends: Vec<f64>,
    pub vals: Vec<f64>,
}

impl F64Step {
    pub fn from_step(x: &StepFn) -> Self {
        F64Step { ends: x.breakpoints().iter().map(to_f64).collect(), vals: x.values().iter().map(to_f64).collect() }
    }

    pub fn horizon(&self) -> f64 {
        self.ends.last().copied().unwrap_or(0.0)
    }

    fn cells(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        let starts = std::iter::once(0.0).chain(self.ends.iter().copied());
        starts.zip(self.ends.iter().copied()).zip(self.vals.iter().copied()).map(|((l, r), v)| (l, r, v))
    }

    /// `∫_0^t`, zero beyond the horizon.
    pub fn partial_sum(&self, t: f64) -> f64 {
        let mut acc = 0.0;
        for (l, r, v) in self.cells() {
            if t <= l {
                break;
            }
            acc += v * (t.min(r) - l);
        }
        acc
    }

    /// Sorts cells by value, descending.
    pub fn rearrange(&self) -> F64Step {
        let mut cells: Vec<(f64, f64)> = self.cells().map(|(l, r, v)| (r - l, v)).filter(|c| c.0 > 0.0).collect();
        cells.sort_by(|a, b| b.1.total_cmp(&a.1));
        let mut out = F64Step::default();
        let mut t = 0.0;
        for (len, v) in cells {
            t += len;
            out.ends.push(t);
            out.vals.push(v);
        }
        out
    }
}

/// Norm of a nonincreasing floating-point step function.
pub fn norm_f64(mu: &F64Step, spec: &NormSpec) -> Result<f64> {
    let cells: Vec<(f64, f64, f64)> = mu.cells().collect();
    Ok(match spec {
        NormSpec::Sup => mu.vals.first().copied().unwrap_or(0.0),
        NormSpec::L1 => cells.iter().map(|(l, r, v)| v * (r - l)).sum(),
        NormSpec::Lp(p) => cells.iter().map(|(l, r, v)| v.powf(*p) * (r - l)).sum::<f64>().powf(1.0 / p),
        NormSpec::Marcinkiewicz(psi) => {
            let mut best = 0.0f64;
            let mut cum = 0.0;
            for (l, r, v) in cells {
                cum += v * (r - l);
                let w = psi.eval(r);
                if w <= 0.0 {
                    return Err(Error::PsiZero(format!("psi vanishes at breakpoint {r}")));
                }
                best = best.max(cum / w);
            }
            best
        }
        NormSpec::Lorentz(psi) => cells.iter().map(|(l, r, v)| v * (psi.eval(*r) - psi.eval(*l))).sum(),
        NormSpec::FNorm(inner) => {
            let n = mu.horizon().ceil() as usize;
            let mut avg = F64Step::default();
            let mut prev = 0.0;
            for k in 1..=n {
                let cur = mu.partial_sum(k as f64);
                avg.ends.push(k as f64);
                avg.vals.push(cur - prev);
                prev = cur;
            }
            mu.vals.first().copied().unwrap_or(0.0) + norm_f64(&avg, inner)?
        }
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RatioProfile {
    pub points: Vec<(f64, f64)>,
    pub min: f64,
}

pub(crate) fn geometric_grid(lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    let steps = steps.max(2);
    let (a, b) = (lo.ln(), hi.ln());
    (0..steps)
        .map(|i| if i + 1 == steps { hi } else { (a + (b - a) * i as f64 / (steps - 1) as f64).exp() })
        .collect()
}

/// `ψ(2t)/ψ(t)` on a geometric grid of `steps` points over `[t_lo, t_hi]`.
pub fn psi_ratio_profile(psi: &Psi, t_lo: f64, t_hi: f64, steps: usize) -> Result<RatioProfile> {
    if !(t_lo > 0.0 && t_lo < t_hi) || steps < 2 {
        return Err(Error::Invalid("need 0 < t_lo < t_hi and steps >= 2".into()));
    }
    let points: Vec<(f64, f64)> =
        geometric_grid(t_lo, t_hi, steps).into_iter().map(|t| (t, psi.eval(2.0 * t) / psi.eval(t))).collect();
    let min = points.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    Ok(RatioProfile { points, min })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    fn harmonic(n: i64) -> RSeq {
        RSeq::new((1..=n).map(|k| q(1, k)).collect()).unwrap()
    }

    #[test]
    fn oracle_harmonic_marcinkiewicz() {
        // max_k H_k / ln(1+k) over k <= 4 is attained at k = 1.
        let oracle = (1..=4)
            .map(|k| (1..=k).map(|j| 1.0 / j as f64).sum::<f64>() / (1.0 + k as f64).ln())
            .fold(0.0f64, f64::max);
        assert!((oracle - 1.0 / 2f64.ln()).abs() < 1e-15);
        let v = norm_seq(&harmonic(4), &"marc:log1p".parse().unwrap()).unwrap();
        assert!((v.value - 1.442695).abs() < 1e-6);
        assert!((v.value - oracle).abs() < 1e-14);
    }

    #[test]
    fn indicator_norms() {
        let chi = StepFn::indicator(int(1), int(1));
        assert_eq!(norm(&chi, &NormSpec::Sup).unwrap().exact, Some(int(1)));
        let f = norm(&chi, &"f:sup".parse().unwrap()).unwrap();
        assert_eq!(f.exact, Some(int(2)));
        assert_eq!(f.budget, ErrorBudget::Exact);
    }

    #[test]
    fn lp_and_lorentz_closed_forms() {
        let x = StepFn::from_lengths([(int(1), int(3)), (int(3), int(1))]).unwrap();
        let l2 = norm(&x, &NormSpec::lp(2.0).unwrap()).unwrap().value;
        assert!((l2 - 12f64.sqrt()).abs() < 1e-14);
        let lor = norm(&x, &NormSpec::Lorentz(Psi::Identity)).unwrap().value;
        assert!((lor - 6.0).abs() < 1e-14);
        let lor = norm(&x, &NormSpec::Lorentz(Psi::Power(0.5))).unwrap().value;
        assert!((lor - (3.0 + (2.0 - 1.0))).abs() < 1e-14);
    }

    #[test]
    fn marcinkiewicz_sup_sits_on_breakpoints() {
        // Dense 10x refinement never beats the breakpoint maximum.
        let x = StepFn::from_lengths([(q(1, 3), int(5)), (int(2), q(3, 2)), (q(7, 2), q(1, 5)), (int(40), q(1, 100))])
            .unwrap();
        for psi in [Psi::Log1p, Psi::Power(0.3), Psi::Identity, "table:1=1,4=2.5,10=3".parse().unwrap()] {
            let spec = NormSpec::Marcinkiewicz(psi.clone());
            let v = norm(&x, &spec).unwrap().value;
            let mut dense = 0.0f64;
            for (l, r, _) in x.cells() {
                for j in 1..=10 {
                    let t = &l + (r - &l) * q(j, 10);
                    dense = dense.max(to_f64(&x.partial_sum(&t)) / psi.eval_q(&t));
                }
            }
            assert!(dense <= v * (1.0 + 1e-12), "{psi}: {dense} > {v}");
        }
    }

    #[test]
    fn psi_zero_is_reported() {
        assert!("table:1=0,2=1".parse::<Psi>().is_err(), "convex table is rejected");
        // A breakpoint so small that psi underflows to zero.
        let tiny = Q::new(1.into(), num_bigint::BigInt::from(10).pow(400));
        let x = StepFn::indicator(tiny, int(1));
        let err = norm(&x, &NormSpec::Marcinkiewicz(Psi::Identity)).unwrap_err();
        assert!(matches!(err, Error::PsiZero(_)));
    }

    #[test]
    fn ratio_profiles() {
        let p = psi_ratio_profile(&Psi::Power(0.5), 1.0, 1e6, 20).unwrap();
        assert!(p.points.iter().all(|&(_, r)| (r - 2f64.sqrt()).abs() < 1e-12));
        let p = psi_ratio_profile(&Psi::Identity, 1.0, 1e6, 20).unwrap();
        assert!(p.points.iter().all(|&(_, r)| r == 2.0));
        let p = psi_ratio_profile(&Psi::Log1p, 1e6, 2e6, 2).unwrap();
        assert!((p.points[0].1 - 1.05018).abs() < 1e-5);
        assert!(psi_ratio_profile(&Psi::Log1p, 2.0, 1.0, 5).is_err());
    }

    #[test]
    fn spec_strings_round_trip() {
        for s in ["sup", "lp:2", "l1", "marc:log1p", "marc:pow:0.5", "lorentz:log1p", "f:marc:log1p", "marc:identity"] {
            let spec: NormSpec = s.parse().unwrap();
            assert_eq!(spec.to_string(), s);
        }
        assert!("lp:0.5".parse::<NormSpec>().is_err());
        assert!("marc:pow:2".parse::<NormSpec>().is_err());
        assert!("nope".parse::<NormSpec>().is_err());
    }

    #[test]
    fn shape_check_accepts_builtin_families() {
        for psi in [Psi::Log1p, Psi::Power(0.5), Psi::Identity] {
            assert!(psi.check_shape(1e-3, 1e9, 200));
        }
    }

    #[test]
    fn dilation_identities_match_materialized() {
        let x = StepFn::from_lengths([(int(1), int(2)), (q(5, 2), q(1, 3))]).unwrap();
        for spec in ["sup", "l1", "lp:3", "marc:log1p", "lorentz:pow:0.5", "f:l1"] {
            let spec: NormSpec = spec.parse().unwrap();
            let fast = norm_of_dilation(&x, 7, &spec).unwrap();
            let slow = norm(&x.dilate(7), &spec).unwrap().value;
            assert!((fast - slow).abs() <= 1e-12 * slow.max(1.0), "{spec}: {fast} vs {slow}");
        }
    }

    #[test]
    fn float_norms_agree_with_exact() {
        let x = StepFn::from_lengths([(q(1, 2), int(4)), (int(3), int(1)), (q(3, 2), q(1, 7))]).unwrap();
        let xf = F64Step::from_step(&x);
        for spec in ["sup", "l1", "lp:2", "marc:log1p", "lorentz:log1p", "f:marc:pow:0.5"] {
            let spec: NormSpec = spec.parse().unwrap();
            let a = norm(&x, &spec).unwrap().value;
            let b = norm_f64(&xf, &spec).unwrap();
            assert!((a - b).abs() <= 1e-12 * a.max(1.0), "{spec}");
        }
    }
}
