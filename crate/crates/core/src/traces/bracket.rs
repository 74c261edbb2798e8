use serde::Serialize;

use crate::error::{Error, Result};

pub const DEFAULT_REL_TOL: f64 = 0.05;

/// Lower and upper limit estimates of a series, read off the tail half of the schedule.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LimitBracket {
    pub series: Vec<(f64, f64)>,
    pub liminf_est: f64,
    pub limsup_est: f64,
    pub cesaro: f64,
    pub converged: bool,
}

impl LimitBracket {
    pub fn from_series(series: Vec<(f64, f64)>, rel_tol: f64) -> Self {
        let tail = &series[series.len() / 2..];
        if tail.is_empty() {
            return LimitBracket { series, liminf_est: 0.0, limsup_est: 0.0, cesaro: 0.0, converged: true };
        }
        let lo = tail.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
        let hi = tail.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
        let cesaro = pairwise_sum(&tail.iter().map(|p| p.1).collect::<Vec<_>>()) / tail.len() as f64;
        let cesaro = cesaro.clamp(lo, hi);
        let converged = hi - lo <= rel_tol * lo.abs().max(hi.abs());
        LimitBracket { series, liminf_est: lo, limsup_est: hi, cesaro, converged }
    }

    pub fn width(&self) -> f64 {
        self.limsup_est - self.liminf_est
    }

    pub fn last(&self) -> Option<f64> {
        self.series.last().map(|p| p.1)
    }

    pub fn at(&self, index: f64) -> Option<f64> {
        self.series.iter().find(|p| p.0 == index).map(|p| p.1)
    }
}

pub(crate) fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 8 {
        return xs.iter().sum();
    }
    let (a, b) = xs.split_at(xs.len() / 2);
    pairwise_sum(a) + pairwise_sum(b)
}

/// `"2:14"` means `2^1, …, 2^14`; a range with decimal or exponent syntax such as
/// `"1e2:1e6"` is a geometric grid with ten points per decade, rounded to integers.
/// A comma-separated list is taken literally.
pub fn parse_schedule(s: &str) -> Result<Vec<f64>> {
    let bad = || Error::Parse(format!("bad schedule `{s}`"));
    if let Some((lo, hi)) = s.split_once(':') {
        let geometric = s.contains(['e', 'E', '.']);
        let lo: f64 = lo.trim().parse().map_err(|_| bad())?;
        let hi: f64 = hi.trim().parse().map_err(|_| bad())?;
        if !(lo > 0.0 && hi >= lo && hi.is_finite()) {
            return Err(bad());
        }
        if !geometric {
            if lo.fract() != 0.0 || hi.fract() != 0.0 || hi > 62.0 {
                return Err(bad());
            }
            return Ok((lo as u32..=hi as u32).map(|j| 2f64.powi(j as i32)).collect());
        }
        let decades = (hi / lo).log10();
        let steps = (decades * 10.0).round().max(0.0) as usize;
        let mut out: Vec<f64> = (0..=steps).map(|i| (lo * 10f64.powf(i as f64 / 10.0)).round()).collect();
        if let Some(last) = out.last_mut() {
            *last = hi.round();
        }
        out.dedup();
        return Ok(out);
    }
    let out: Vec<f64> = s.split(',').map(|p| p.trim().parse::<f64>().map_err(|_| bad())).collect::<Result<_>>()?;
    if out.is_empty() || out.windows(2).any(|w| w[0] >= w[1]) || out[0] <= 0.0 {
        return Err(bad());
    }
    Ok(out)
}
