use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::norms::F64Step;
use crate::rational::{int, to_f64, Q};
use crate::step::{merge_sorted, SignedStep};

/// Overall factor in front of a [`SmoothEval`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scale {
    One,
    /// `1 / ln m`.
    InvLog(u64),
}

impl Scale {
    pub fn factor(self) -> f64 {
        match self {
            Scale::One => 1.0,
            Scale::InvLog(m) => 1.0 / (m as f64).ln(),
        }
    }
}

/// On `(lo, hi]` the function is `scale · (alpha/t + beta)`; `hi = None` means `+∞`.
#[derive(Clone, Debug, PartialEq)]
pub struct SmoothCell {
    pub lo: Q,
    pub hi: Option<Q>,
    pub alpha: Q,
    pub beta: Q,
}

impl SmoothCell {
    fn eval(&self, t: &Q) -> Q {
        &self.alpha / t + &self.beta
    }

    /// Interior sign change of `alpha/t + beta`, if any.
    fn root(&self) -> Option<Q> {
        if self.beta.is_zero() || self.alpha.is_zero() {
            return None;
        }
        let t = -&self.alpha / &self.beta;
        let inside = t > self.lo && self.hi.as_ref().map_or(true, |h| &t < h);
        inside.then_some(t)
    }

    /// `∫_l^r (alpha/t + beta)` for `lo ≤ l < r ≤ hi`.
    fn integral(&self, l: &Q, r: &Q) -> f64 {
        let lin = to_f64(&self.beta) * to_f64(&(r - l));
        if self.alpha.is_zero() {
            return lin;
        }
        to_f64(&self.alpha) * to_f64(&((r - l) / l)).ln_1p() + lin
    }
}

/// A function of the form `X(t)/t` or `(X(t) − X(t/m))/(t ln m)` with `X` piecewise linear,
/// stored cellwise in closed form so that point values and integrals need no quadrature.
#[derive(Clone, Debug, PartialEq)]
pub struct SmoothEval {
    cells: Vec<SmoothCell>,
    scale: Scale,
}

/// How [`SmoothEval::sample`] turns a cell piece into one value.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sampling {
    /// Mean of the positive part on each piece; preserves `∫ f₊`.
    PositiveAverage,
    /// Largest `|f|` on each piece; dominates `|f|` pointwise.
    AbsEnvelope,
}

/// Geometric pieces per unit of `ln(r/l)`.
const PIECES_PER_LOG: usize = 64;

impl SmoothEval {
    pub fn cells(&self) -> &[SmoothCell] {
        &self.cells
    }

    pub fn scale(&self) -> Scale {
        self.scale
    }

    fn cell_at(&self, t: &Q) -> &SmoothCell {
        let i = self.cells.partition_point(|c| c.hi.as_ref().is_some_and(|h| h < t));
        &self.cells[i]
    }

    /// Exact value when no logarithm is involved.
    pub fn value_exact(&self, t: &Q) -> Result<Option<Q>> {
        if !t.is_positive() {
            return Err(Error::Domain("evaluation point must be positive".into()));
        }
        Ok((self.scale == Scale::One).then(|| self.cell_at(t).eval(t)))
    }

    pub fn value(&self, t: &Q) -> Result<f64> {
        if !t.is_positive() {
            return Err(Error::Domain("evaluation point must be positive".into()));
        }
        Ok(to_f64(&self.cell_at(t).eval(t)) * self.scale.factor())
    }

    /// Finite pieces `(l, r]` covering `(a, b]`, split at sign changes.
    fn pieces(&self, a: &Q, b: &Q) -> Vec<(Q, Q, &SmoothCell)> {
        let mut out = Vec::new();
        let first = self.cells.partition_point(|c| c.hi.as_ref().is_some_and(|h| h <= a));
        for c in &self.cells[first..] {
            if &c.lo >= b {
                break;
            }
            let l = if &c.lo > a { c.lo.clone() } else { a.clone() };
            let r = match &c.hi {
                Some(h) if h < b => h.clone(),
                _ => b.clone(),
            };
            if l >= r {
                continue;
            }
            match c.root().filter(|t| *t > l && *t < r) {
                Some(t) => {
                    out.push((l, t.clone(), c));
                    out.push((t, r, c));
                }
                None => out.push((l, r, c)),
            }
        }
        out
    }

    /// `∫_a^b f` for `0 ≤ a < b`.
    pub fn integral(&self, a: &Q, b: &Q) -> f64 {
        self.pieces(a, b).iter().map(|(l, r, c)| c.integral(l, r)).sum::<f64>() * self.scale.factor()
    }

    /// `∫_a^b |f|`.
    pub fn abs_integral(&self, a: &Q, b: &Q) -> f64 {
        self.pieces(a, b).iter().map(|(l, r, c)| c.integral(l, r).abs()).sum::<f64>() * self.scale.factor()
    }

    /// `∫_a^b f₊`.
    pub fn positive_integral(&self, a: &Q, b: &Q) -> f64 {
        self.pieces(a, b).iter().map(|(l, r, c)| c.integral(l, r).max(0.0)).sum::<f64>() * self.scale.factor()
    }

    /// `sup |f|` on `(0, ∞)`; each cell is monotone, so endpoint values suffice.
    pub fn sup_abs(&self) -> f64 {
        let mut best = Q::zero();
        for c in &self.cells {
            let mut cand = Vec::with_capacity(2);
            if c.lo.is_zero() {
                cand.push(c.beta.abs());
            } else {
                cand.push(c.eval(&c.lo).abs());
            }
            match &c.hi {
                Some(h) => cand.push(c.eval(h).abs()),
                None => cand.push(c.beta.abs()),
            }
            for v in cand {
                if v > best {
                    best = v;
                }
            }
        }
        to_f64(&best) * self.scale.factor()
    }

    /// Decreasing rearrangement of `f₊` or `|f|` on `(0, t_max]`, sampled on geometric pieces.
    pub fn sample(&self, t_max: &Q, mode: Sampling) -> F64Step {
        let factor = self.scale.factor();
        let mut raw = F64Step::default();
        let mut t = 0.0;
        let mut push = |len: f64, v: f64| {
            t += len;
            raw.ends.push(t);
            raw.vals.push(v * factor);
        };
        for (l, r, c) in self.pieces(&Q::zero(), t_max) {
            let (lf, rf) = (to_f64(&l), to_f64(&r));
            if l.is_zero() {
                let v = to_f64(&c.beta);
                push(rf, if mode == Sampling::PositiveAverage { v.max(0.0) } else { v.abs() });
                continue;
            }
            let k = PIECES_PER_LOG * ((rf / lf).ln().ceil().max(1.0) as usize);
            let (alpha, beta) = (to_f64(&c.alpha), to_f64(&c.beta));
            let f = |s: f64| alpha / s + beta;
            let ratio = (rf / lf).ln() / k as f64;
            let mut p0 = lf;
            for j in 1..=k {
                let p1 = if j == k { rf } else { lf * (ratio * j as f64).exp() };
                let v = match mode {
                    Sampling::PositiveAverage => {
                        let integral = alpha * ((p1 - p0) / p0).ln_1p() + beta * (p1 - p0);
                        (integral / (p1 - p0)).max(0.0)
                    }
                    Sampling::AbsEnvelope => f(p0).abs().max(f(p1).abs()),
                };
                push(p1 - p0, v);
                p0 = p1;
            }
        }
        raw.rearrange()
    }
}

/// `(Cx)(t) = X(t)/t`.
pub fn hardy(x: &SignedStep) -> SmoothEval {
    let mut cells = Vec::with_capacity(x.len() + 1);
    let mut prev = Q::zero();
    for ((l, r, v), cum) in x.cells().zip(x.cumulative()) {
        let start = cum - v * (r - &l);
        cells.push(SmoothCell { alpha: start - v * &l, beta: v.clone(), lo: l, hi: Some(r.clone()) });
        prev = cum.clone();
    }
    cells.push(SmoothCell { lo: x.horizon(), hi: None, alpha: prev, beta: Q::zero() });
    SmoothEval { cells, scale: Scale::One }
}

/// `(M_m x)(t) = (X(t) − X(t/m)) / (t ln m)`.
pub fn m_avg(x: &SignedStep, m: u64) -> Result<SmoothEval> {
    if m < 2 {
        return Err(Error::Invalid(format!("M_m needs m >= 2, got {m}")));
    }
    let mq = int(m as i64);
    let scaled: Vec<Q> = x.breakpoints().iter().map(|b| b * &mq).collect();
    let grid = merge_sorted(x.breakpoints(), &scaled);
    let g = |t: &Q| x.partial_sum(t) - x.partial_sum(&(t / &mq));
    let mut cells = Vec::with_capacity(grid.len() + 1);
    let mut lo = Q::zero();
    for hi in grid {
        let beta = x.value_at(&hi) - x.value_at(&(&hi / &mq)) / &mq;
        let alpha = g(&lo) - &beta * &lo;
        cells.push(SmoothCell { lo, hi: Some(hi.clone()), alpha, beta });
        lo = hi;
    }
    cells.push(SmoothCell { lo, hi: None, alpha: Q::zero(), beta: Q::zero() });
    Ok(SmoothEval { cells, scale: Scale::InvLog(m) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;
    use crate::step::StepFn;

    fn chi(t: i64) -> SignedStep {
        StepFn::indicator(int(t), int(1)).into_signed()
    }

    #[test]
    fn hardy_of_indicator() {
        let c = hardy(&chi(1));
        assert_eq!(c.value_exact(&q(1, 2)).unwrap(), Some(int(1)));
        assert_eq!(c.value_exact(&int(1)).unwrap(), Some(int(1)));
        assert_eq!(c.value_exact(&int(4)).unwrap(), Some(q(1, 4)));
        assert!(c.value(&int(0)).is_err());
        let z = hardy(&SignedStep::zero());
        assert_eq!(z.value_exact(&int(3)).unwrap(), Some(int(0)));
    }

    #[test]
    fn hardy_of_signed_difference() {
        let x = SignedStep::new(vec![int(1), int(2)], vec![int(1), int(-1)]).unwrap();
        let c = hardy(&x);
        assert_eq!(c.value_exact(&q(1, 3)).unwrap(), Some(int(1)));
        for t in [q(5, 4), q(3, 2), int(2)] {
            assert_eq!(c.value_exact(&t).unwrap(), Some((int(2) - &t) / &t));
        }
        assert_eq!(c.value_exact(&int(7)).unwrap(), Some(int(0)));
        // ∫_0^2 |Cx| = 1 + ∫_1^2 (2/t − 1) = 2 ln 2
        assert!((c.abs_integral(&int(0), &int(3)) - 2.0 * 2f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn m_avg_point_value() {
        let m = m_avg(&chi(1), 2).unwrap();
        let expect = 0.5 / 2f64.ln();
        assert!((m.value(&int(1)).unwrap() - expect).abs() < 1e-15);
        assert!((expect - 0.721348).abs() < 1e-6);
        assert_eq!(m_avg(&SignedStep::zero(), 3).unwrap().value(&int(2)).unwrap(), 0.0);
        assert!(m_avg(&chi(1), 1).is_err());
    }

    #[test]
    fn m_avg_integral_matches_log_kernel() {
        // Log kernel: ∫_a^b M_m x = (1/ln m) ∫ x(s) ln(min(ms, b) / max(a, s)) ds over s ∈ (a/m, b).
        // For x = χ_(0,1], m = 2, (a, b) = (1, 2) this is (1/ln 2) ∫_{1/2}^1 ln(2s) ds = (ln 2 − 1/2)/ln 2.
        let oracle = (2f64.ln() - 0.5) / 2f64.ln();
        let n = 200_000;
        let quad: f64 = (0..n)
            .map(|i| {
                let s = 0.5 + (i as f64 + 0.5) * 0.5 / n as f64;
                (2.0 * s).min(2.0).ln() - s.max(1.0).ln()
            })
            .sum::<f64>()
            * (0.5 / n as f64)
            / 2f64.ln();
        assert!((quad - oracle).abs() < 1e-9);
        let m = m_avg(&chi(1), 2).unwrap();
        assert!((m.integral(&int(1), &int(2)) - oracle).abs() < 1e-12);
        assert!((oracle - 0.278652).abs() < 1e-6);
    }

    #[test]
    fn m_avg_vanishes_beyond_m_horizon() {
        let x = StepFn::from_lengths([(int(1), int(3)), (int(2), int(1))]).unwrap();
        let m = m_avg(x.as_signed(), 4).unwrap();
        assert_eq!(m.value(&int(13)).unwrap(), 0.0);
        assert!(m.value(&int(11)).unwrap() > 0.0);
    }

    #[test]
    fn sampling_preserves_positive_mass() {
        let x = SignedStep::new(vec![int(1), int(3), int(4)], vec![int(2), int(-1), q(1, 2)]).unwrap();
        let m = m_avg(&x, 3).unwrap();
        let t_max = int(20);
        let s = m.sample(&t_max, Sampling::PositiveAverage);
        let mass: f64 = s.partial_sum(s.horizon());
        assert!((mass - m.positive_integral(&int(0), &t_max)).abs() < 1e-12);
        assert!(s.vals.windows(2).all(|w| w[0] >= w[1]));
        let env = m.sample(&t_max, Sampling::AbsEnvelope);
        assert!(env.partial_sum(env.horizon()) >= m.abs_integral(&int(0), &t_max) - 1e-12);
        assert!((env.vals[0] - m.sup_abs()).abs() < 1e-12);
    }

    #[test]
    fn nonincreasing_input_gives_nonincreasing_hardy() {
        let x = StepFn::from_lengths([(q(1, 2), int(5)), (int(2), int(2)), (int(3), q(1, 3))]).unwrap();
        let c = hardy(x.as_signed());
        let vals: Vec<Q> = (1..60).map(|k| c.value_exact(&q(k, 8)).unwrap().unwrap()).collect();
        assert!(vals.windows(2).all(|w| w[0] >= w[1]));
    }
}
