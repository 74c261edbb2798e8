use num_traits::{Signed, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::averaging::{hardy, m_avg, Sampling, SmoothEval};
use crate::error::{Error, Result};
use crate::norms::{norm_f64, norm_of_dilation, NormSpec, Psi, RatioProfile};
use crate::rational::{from_f64, int, Q};
use crate::step::{SignedStep, StepFn};

use super::bracket::{LimitBracket, DEFAULT_REL_TOL};
use super::generator::{Element, Generator};

/// Integers up to 1000, then a geometric grid of ratio 1.02, ending at `hi`.
fn sum_grid(hi: f64) -> Vec<f64> {
    let mut out: Vec<f64> = (1..=1000u32).map(f64::from).take_while(|&s| s <= hi).collect();
    let mut s = 1000.0f64;
    loop {
        s = (s * 1.02).ceil();
        if s >= hi {
            break;
        }
        out.push(s);
    }
    if out.last().map_or(true, |&l| l < hi) {
        out.push(hi);
    }
    out
}

/// Largest `m · horizon` a generated input may reach before `f64` arithmetic saturates.
const MAX_DILATED_HORIZON: f64 = 1e306;

/// Integer horizon of a generated input, checked so that every dilate stays finite.
fn generated_horizon(horizon: f64, schedule: &[u64]) -> Result<f64> {
    let h = horizon.floor();
    if !(h >= 1.0 && h.is_finite()) {
        return Err(Error::Invalid(format!("horizon must be a finite number >= 1, got {horizon}")));
    }
    let m_max = schedule.iter().copied().max().unwrap_or(1) as f64;
    if m_max * h > MAX_DILATED_HORIZON {
        return Err(Error::Invalid(format!("m · horizon = {:e} overflows; lower the horizon", m_max * h)));
    }
    Ok(h)
}

/// `(1/m) ‖σ_m μ(x)‖` along the schedule.
pub fn pi_estimate(x: &Element, spec: &NormSpec, schedule: &[u64]) -> Result<LimitBracket> {
    let series: Vec<(f64, f64)> = match x {
        Element::Step(f) => schedule
            .par_iter()
            .map(|&m| Ok((m as f64, norm_of_dilation(f, m, spec)? / m as f64)))
            .collect::<Result<_>>()?,
        Element::Generated { gen, horizon } => {
            let h = generated_horizon(*horizon, schedule)?;
            match spec {
                NormSpec::Sup => schedule.iter().map(|&m| (m as f64, gen.term(1.0) / m as f64)).collect(),
                NormSpec::L1 => schedule.iter().map(|&m| (m as f64, gen.sum(h))).collect(),
                NormSpec::Marcinkiewicz(psi) => {
                    let grid = sum_grid(h);
                    let sums: Vec<f64> = grid.iter().map(|&s| gen.sum(s)).collect();
                    schedule
                        .par_iter()
                        .map(|&m| {
                            let mf = m as f64;
                            let v = grid.iter().zip(&sums).map(|(&s, &sum)| sum / psi.eval(mf * s)).fold(0.0, f64::max);
                            (mf, v)
                        })
                        .collect()
                }
                _ => return Err(Error::Unsupported(format!("pi_estimate of a generated sequence under {spec}"))),
            }
        }
    };
    Ok(LimitBracket::from_series(series, DEFAULT_REL_TOL))
}

/// Input to [`p_estimate`]: a finite difference `μ(a) − μ(b)` or a generated positive sequence.
#[derive(Clone, Debug, PartialEq)]
pub enum PInput {
    Finite(SignedStep),
    Generated { gen: Generator, horizon: f64 },
}

impl PInput {
    /// `μ(a) − μ(b)`.
    pub fn difference(a: &StepFn, b: &StepFn) -> Self {
        PInput::Finite(a.rearrange().as_signed().sub(b.rearrange().as_signed()))
    }
}

/// Norm of `f₊` (or of `|f|`) restricted to `(0, t_max]`.
pub fn smooth_norm(f: &SmoothEval, spec: &NormSpec, t_max: &Q, mode: Sampling) -> Result<f64> {
    match (spec, mode) {
        (NormSpec::L1, Sampling::PositiveAverage) => Ok(f.positive_integral(&Q::zero(), t_max)),
        (NormSpec::L1, Sampling::AbsEnvelope) => Ok(f.abs_integral(&Q::zero(), t_max)),
        _ => norm_f64(&f.sample(t_max, mode), spec),
    }
}

/// `∫_0^u S(w)/w dw` for the step model of a generator, tabulated once and evaluated anywhere.
struct LogPrimitive<'a> {
    gen: &'a Generator,
    horizon: f64,
    /// `P(k)` for integers `k ≤ EXACT_UPTO`.
    exact: Vec<f64>,
    /// `P(e^v)` on `v = ln EXACT_UPTO + j·H`.
    log_grid: Vec<f64>,
}

const EXACT_UPTO: usize = 4096;
const H: f64 = 0.01;

impl<'a> LogPrimitive<'a> {
    fn new(gen: &'a Generator, horizon: f64, u_max: f64) -> Self {
        let mut exact = vec![0.0; EXACT_UPTO + 1];
        let mut lp = LogPrimitive { gen, horizon, exact: Vec::new(), log_grid: Vec::new() };
        for k in 1..=EXACT_UPTO {
            exact[k] = exact[k - 1] + lp.cell_part(k as f64 - 1.0, k as f64);
        }
        lp.exact = exact;
        let v0 = (EXACT_UPTO as f64).ln();
        let steps = ((u_max.ln() - v0) / H).ceil().max(0.0) as usize + 1;
        let mut grid = Vec::with_capacity(steps + 1);
        let mut acc = lp.exact[EXACT_UPTO];
        grid.push(acc);
        for j in 1..=steps {
            acc += lp.chord(v0 + (j - 1) as f64 * H, v0 + j as f64 * H);
            grid.push(acc);
        }
        lp.log_grid = grid;
        lp
    }

    fn s_at(&self, u: f64) -> f64 {
        self.gen.integral(u.min(self.horizon))
    }

    /// `∫ S(w)/w dw` over `[e^{v_l}, e^{v_r}]`, with `S` replaced by its chord in `w`
    /// (split at the horizon, past which `S` is constant).
    fn chord(&self, vl: f64, vr: f64) -> f64 {
        let hv = self.horizon.ln();
        if vl < hv && hv < vr {
            return self.chord(vl, hv) + self.chord(hv, vr);
        }
        let (l, r) = (vl.exp(), vr.exp());
        let (sl, sr) = (self.s_at(l), self.s_at(r));
        let lg = vr - vl;
        sl * lg + (sr - sl) * (1.0 - l * lg / (r - l))
    }

    /// `∫_l^r S(w)/w dw` inside one unit cell `[n, n+1]`.
    fn cell_part(&self, l: f64, r: f64) -> f64 {
        let n = l.floor();
        if n + 1.0 > self.horizon {
            let c = self.gen.sum(self.horizon);
            return if l == 0.0 { 0.0 } else { c * (r / l).ln() };
        }
        let slope = self.gen.term(n + 1.0);
        let intercept = self.gen.sum(n) - slope * n;
        let log_part = if l == 0.0 { 0.0 } else { intercept * ((r - l) / l).ln_1p() };
        log_part + slope * (r - l)
    }

    fn eval(&self, u: f64) -> f64 {
        if u <= EXACT_UPTO as f64 {
            let n = u.floor();
            return self.exact[n as usize] + if u > n { self.cell_part(n, u) } else { 0.0 };
        }
        let v = u.ln();
        let v0 = (EXACT_UPTO as f64).ln();
        let j = (((v - v0) / H).floor() as usize).min(self.log_grid.len() - 1);
        let vj = v0 + j as f64 * H;
        if v <= vj {
            return self.log_grid[j];
        }
        self.log_grid[j] + self.chord(vj, v)
    }
}

/// `‖(M_m x)₊‖` along the schedule.
pub fn p_estimate(x: &PInput, spec: &NormSpec, schedule: &[u64]) -> Result<LimitBracket> {
    if schedule.iter().any(|&m| m < 2) {
        return Err(Error::Invalid("p_estimate needs m >= 2 throughout the schedule".into()));
    }
    let series: Vec<(f64, f64)> = match x {
        PInput::Finite(d) => schedule
            .par_iter()
            .map(|&m| {
                let avg = m_avg(d, m)?;
                let t_max = d.horizon() * int(m as i64);
                Ok((m as f64, smooth_norm(&avg, spec, &t_max, Sampling::PositiveAverage)?))
            })
            .collect::<Result<_>>()?,
        PInput::Generated { gen, horizon } => {
            let NormSpec::Marcinkiewicz(psi) = spec else {
                return Err(Error::Unsupported(format!("p_estimate of a generated sequence under {spec}")));
            };
            if (1..=4).any(|k| gen.term(k as f64) < gen.term(k as f64 + 1.0)) {
                return Err(Error::Invalid("generated input must be nonincreasing".into()));
            }
            let h = generated_horizon(*horizon, schedule)?;
            let m_max = schedule.iter().copied().max().unwrap_or(2) as f64;
            let prim = LogPrimitive::new(gen, h, m_max * h);
            schedule
                .par_iter()
                .map(|&m| {
                    let mf = m as f64;
                    let lnm = mf.ln();
                    // M_m x is nonincreasing, so its norm is the sup of its primitive over ψ.
                    let v = sum_grid(mf * h)
                        .into_iter()
                        .map(|t| (prim.eval(t) - prim.eval(t / mf)) / (lnm * psi.eval(t)))
                        .fold(0.0, f64::max);
                    (mf, v)
                })
                .collect()
        }
    };
    Ok(LimitBracket::from_series(series, DEFAULT_REL_TOL))
}

/// `ξ_n = S(n)/ψ(n)` along the schedule.
pub fn dixmier_bracket(s: &Generator, psi: &Psi, schedule: &[f64]) -> Result<LimitBracket> {
    let series = schedule
        .iter()
        .map(|&n| {
            let w = psi.eval(n);
            if w <= 0.0 {
                return Err(Error::PsiZero(format!("psi vanishes at n = {n}")));
            }
            Ok((n, s.sum(n.floor()) / w))
        })
        .collect::<Result<_>>()?;
    Ok(LimitBracket::from_series(series, DEFAULT_REL_TOL))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CriterionReport {
    pub psi: String,
    pub min_ratio: f64,
    pub tol: f64,
    /// `p` in `ψ(2t)/ψ(t) − 1 ≈ c (ln t)^{-p}`, fitted on the upper half of the grid.
    pub decay_exponent: Option<f64>,
    pub admits_traces: bool,
    pub reason: String,
    pub caveat: String,
    pub profile: Vec<(f64, f64)>,
}

/// Exponent above which a sampled excess is read as tending to zero.
const DECAY_EXPONENT: f64 = 0.5;

/// Samples `ψ(2t)/ψ(t)` on the dyadic grid of `[1, t_hi]` plus `t_hi` itself and reads off whether its lower limit is 1.
pub fn criterion(psi: &Psi, t_hi: f64, tol: f64) -> Result<CriterionReport> {
    if !(t_hi >= 2.0) {
        return Err(Error::Invalid("criterion needs t_hi >= 2".into()));
    }
    let mut points: Vec<(f64, f64)> = (0..)
        .map(|j| 2f64.powi(j))
        .take_while(|&t| t < t_hi)
        .chain(std::iter::once(t_hi))
        .map(|t| (t, psi.eval(2.0 * t) / psi.eval(t)))
        .collect();
    points.dedup_by(|a, b| a.0 == b.0);
    let min = points.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    let prof = RatioProfile { points, min };
    let tail = &prof.points[prof.points.len() / 2..];
    let fit: Vec<(f64, f64)> =
        tail.iter().filter(|(t, r)| *t > 1.0 && *r > 1.0).map(|(t, r)| (t.ln().ln(), (r - 1.0).ln())).collect();
    let decay = (fit.len() >= 3).then(|| -slope(&fit));
    let (admits, reason) = if prof.min <= 1.0 + tol {
        (true, format!("sampled minimum {:.6} is within {tol} of 1", prof.min))
    } else if decay.is_some_and(|p| p >= DECAY_EXPONENT) {
        (true, format!("excess over 1 decays like (ln t)^-{:.3}", decay.unwrap_or(0.0)))
    } else {
        (false, format!("sampled minimum {:.6} stays away from 1", prof.min))
    };
    Ok(CriterionReport {
        psi: psi.to_string(),
        min_ratio: prof.min,
        tol,
        decay_exponent: decay,
        admits_traces: admits,
        reason,
        caveat: "the lower limit is only sampled on a dyadic grid; oscillating weights can be misread".into(),
        profile: prof.points,
    })
}

fn slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FkVerdict {
    LikelyInZ,
    Diverges,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FkReport {
    pub series: Vec<(f64, f64)>,
    pub verdict: FkVerdict,
    /// `∫_0^1 x = 0`, reported when the interval case was requested.
    pub interval_mean_zero: Option<bool>,
}

/// Relative spread under which the tail of the series counts as stable.
const FK_STABLE: f64 = 0.05;

/// `‖(Cx) χ_(0,n]‖` for growing `n`, where `x = μ(a) − μ(b)`.
pub fn fk_diagnostic(a: &StepFn, b: &StepFn, spec: &NormSpec, schedule: &[f64], interval: bool) -> Result<FkReport> {
    let x = a.rearrange().as_signed().sub(b.rearrange().as_signed());
    let c = hardy(&x);
    let series: Vec<(f64, f64)> = schedule
        .par_iter()
        .map(|&n| {
            let t = from_f64(n).filter(|t| t.is_positive()).ok_or_else(|| Error::Invalid(format!("bad window {n}")))?;
            Ok((n, smooth_norm(&c, spec, &t, Sampling::AbsEnvelope)?))
        })
        .collect::<Result<_>>()?;
    let interval_mean_zero = interval.then(|| x.partial_sum(&int(1)).is_zero());
    Ok(FkReport { verdict: fk_verdict(&series), series, interval_mean_zero })
}

fn fk_verdict(series: &[(f64, f64)]) -> FkVerdict {
    let vals: Vec<f64> = series.iter().map(|p| p.1).collect();
    let Some((&last, prior)) = vals.split_last() else { return FkVerdict::Inconclusive };
    if let Some(&first) = prior.first() {
        if last >= 2.0 * first && last > 0.0 && prior.iter().all(|&v| last > v) {
            return FkVerdict::Diverges;
        }
    }
    let tail = &vals[vals.len() / 2..];
    let hi = tail.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = tail.iter().copied().fold(f64::INFINITY, f64::min);
    if hi - lo <= FK_STABLE * hi.abs() {
        FkVerdict::LikelyInZ
    } else {
        FkVerdict::Inconclusive
    }
}

/// `‖Cx‖` over `(0, t_max]`, sampled from above.
pub fn hardy_norm(x: &SignedStep, spec: &NormSpec, t_max: &Q) -> Result<f64> {
    smooth_norm(&hardy(x), spec, t_max, Sampling::AbsEnvelope)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    fn marc_log() -> NormSpec {
        NormSpec::Marcinkiewicz(Psi::Log1p)
    }

    #[test]
    fn dixmier_harmonic() {
        // H_n ≈ ln n + γ, so ξ_{10^5} ≈ (ln 10^5 + γ)/ln(10^5 + 1).
        let oracle = (1e5f64.ln() + 0.577_215_664_901_532_9) / 1e5f64.ln_1p();
        let b = dixmier_bracket(&Generator::Harmonic, &Psi::Log1p, &[1e5]).unwrap();
        assert!((b.series[0].1 - oracle).abs() < 1e-5);
        assert!((b.series[0].1 - 1.0501).abs() < 5e-4);
    }

    #[test]
    fn dixmier_trace_class_and_indicator() {
        let sched: Vec<f64> = (1..=12).map(|j| 10f64.powi(j)).collect();
        let b = dixmier_bracket(&Generator::Geometric(0.5), &Psi::Log1p, &sched).unwrap();
        assert!(b.last().unwrap() < 0.1);
        assert!(b.series.windows(2).all(|w| w[1].1 < w[0].1));
        let chi = Generator::table(vec![1.0; 50]).unwrap();
        let b = dixmier_bracket(&chi, &Psi::Identity, &[10.0, 50.0, 500.0, 5000.0]).unwrap();
        assert_eq!(b.series.iter().map(|p| p.1).collect::<Vec<_>>(), vec![1.0, 1.0, 0.1, 0.01]);
    }

    #[test]
    fn pi_of_harmonic_generator() {
        let x = Element::Generated { gen: Generator::Harmonic, horizon: 1e300 };
        let b = pi_estimate(&x, &marc_log(), &[1 << 10, 1 << 12]).unwrap();
        assert!(b.series.iter().all(|p| p.1 > 0.95 && p.1 <= 1.0), "{:?}", b.series);
    }

    #[test]
    fn dilated_horizon_must_stay_finite() {
        let x = Element::Generated { gen: Generator::Harmonic, horizon: 1e300 };
        assert!(pi_estimate(&x, &marc_log(), &[1 << 40]).is_err());
        let p = PInput::Generated { gen: Generator::Harmonic, horizon: 1e300 };
        assert!(p_estimate(&p, &marc_log(), &[1 << 40]).is_err());
        assert!(p_estimate(&p, &marc_log(), &[1 << 12]).is_ok());
    }

    #[test]
    fn pi_of_psi_increments_is_inverse_sqrt() {
        let x = Element::Generated { gen: Generator::PsiIncrements(Psi::Power(0.5)), horizon: 1e300 };
        let b = pi_estimate(&x, &NormSpec::Marcinkiewicz(Psi::Power(0.5)), &[1 << 12]).unwrap();
        assert!((b.series[0].1 - 1.0 / 64.0).abs() < 1e-9);
    }

    #[test]
    fn pi_of_finite_support_decays() {
        // x = (1): (1/m)‖σ_m x‖ = sup_{s ≤ 1} s/ln(1 + ms) = 1/ln(1+m).
        let x = Element::Step(StepFn::indicator(int(1), int(1)));
        let b = pi_estimate(&x, &marc_log(), &[1 << 10]).unwrap();
        assert!((b.series[0].1 - 1.0 / 1025f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn pi_of_truncated_harmonic() {
        let h = Generator::Harmonic.materialize(10_000).unwrap();
        let fin = pi_estimate(&Element::Step(h), &marc_log(), &[1 << 10]).unwrap().series[0].1;
        let gen = pi_estimate(&Element::Generated { gen: Generator::Harmonic, horizon: 1e4 }, &marc_log(), &[1 << 10])
            .unwrap()
            .series[0]
            .1;
        assert!((fin - gen).abs() < 1e-9, "{fin} vs {gen}");
    }

    #[test]
    fn p_of_zero_and_positive_inputs() {
        let zero = PInput::Finite(SignedStep::zero());
        let b = p_estimate(&zero, &marc_log(), &[2, 4]).unwrap();
        assert!(b.series.iter().all(|p| p.1 == 0.0));
        let x = Generator::Harmonic.materialize(300).unwrap();
        let fin = p_estimate(&PInput::Finite(x.into_signed()), &marc_log(), &[8]).unwrap().series[0].1;
        let gen = p_estimate(&PInput::Generated { gen: Generator::Harmonic, horizon: 300.0 }, &marc_log(), &[8])
            .unwrap()
            .series[0]
            .1;
        assert!((fin - gen).abs() < 2e-3 * gen, "{fin} vs {gen}");
    }

    #[test]
    fn log_primitive_matches_closed_form() {
        // For s_k = 1 on (0, H], S(w) = min(w, H), P(u) = u for u ≤ H and H(1 + ln(u/H)) beyond.
        let g = Generator::table(vec![1.0; 10_000]).unwrap();
        let p = LogPrimitive::new(&g, 10_000.0, 1e7);
        for u in [0.5, 3.0, 4096.0, 5000.5, 10_000.0] {
            assert!((p.eval(u) - u).abs() < 1e-9 * u, "{u}");
        }
        let u = 1e6;
        assert!((p.eval(u) - 1e4 * (1.0 + 100f64.ln())).abs() < 1e-3);
    }

    #[test]
    fn criterion_verdicts() {
        let log = criterion(&Psi::Log1p, 1e6, 0.02).unwrap();
        assert!(log.admits_traces, "{}", log.reason);
        assert!((log.min_ratio - 1.05018).abs() < 1e-5);
        let pow = criterion(&Psi::Power(0.5), 1e6, 0.02).unwrap();
        assert!(!pow.admits_traces);
        assert!((pow.min_ratio - 2f64.sqrt()).abs() < 1e-12);
        let id = criterion(&Psi::Identity, 1e6, 0.02).unwrap();
        assert!(!id.admits_traces);
        assert_eq!(id.min_ratio, 2.0);
    }

    #[test]
    fn fk_examples() {
        let chi = StepFn::indicator(int(1), int(1));
        let sched: Vec<f64> = (1..=8).map(|j| 10f64.powi(j)).collect();
        let same = fk_diagnostic(&chi, &chi, &NormSpec::L1, &sched, false).unwrap();
        assert!(same.series.iter().all(|p| p.1 == 0.0));
        assert_eq!(same.verdict, FkVerdict::LikelyInZ);

        let half = StepFn::indicator(int(2), q(1, 2));
        let r = fk_diagnostic(&chi, &half, &NormSpec::L1, &sched, true).unwrap();
        assert_eq!(r.verdict, FkVerdict::LikelyInZ);
        assert_eq!(r.interval_mean_zero, Some(false));
        // x = (1/2)χ_(0,1] − (1/2)χ_(1,2]: ∫|Cx| = 1/2 + ∫_1^2 (1/t − 1/2) = ln 2.
        assert!((r.series.last().unwrap().1 - 2f64.ln()).abs() < 1e-12);

        let r = fk_diagnostic(&chi, &StepFn::zero(), &NormSpec::L1, &sched, false).unwrap();
        assert_eq!(r.verdict, FkVerdict::Diverges);
        for (n, v) in &r.series {
            assert!((v - (1.0 + n.ln())).abs() <= 1e-12 * v);
        }
    }
}
