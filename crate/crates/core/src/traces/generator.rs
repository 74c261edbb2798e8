use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::norms::Psi;
use crate::step::StepFn;

/// Below this index partial sums are summed directly.
const DIRECT: f64 = 1000.0;
const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Closed-form nonincreasing sequences `s_1 ≥ s_2 ≥ … ≥ 0` with cheap partial sums `S(n)`.
#[derive(Clone, Debug, PartialEq)]
pub enum Generator {
    /// `1/k`.
    Harmonic,
    /// `k^{-α}`.
    Power(f64),
    /// `r^k` with `0 < r < 1`.
    Geometric(f64),
    /// `ψ(k) − ψ(k−1)`, so `S(n) = ψ(n)`.
    PsiIncrements(Psi),
    /// Finitely many terms, then zeros.
    Table(Table),
    /// `head` followed by `scale · tail_k` for `k > head.len()`.
    HeadTail { head: Table, tail: Box<Generator>, scale: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    values: Vec<f64>,
    prefix: Vec<f64>,
}

impl Table {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::Invalid("table entries must be finite and nonnegative".into()));
        }
        if values.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::Invalid("table entries must be nonincreasing".into()));
        }
        // Kahan-compensated prefix sums.
        let mut prefix = Vec::with_capacity(values.len() + 1);
        let (mut sum, mut comp) = (0.0f64, 0.0f64);
        prefix.push(0.0);
        for v in &values {
            let y = v - comp;
            let t = sum + y;
            comp = (t - sum) - y;
            sum = t;
            prefix.push(sum);
        }
        Ok(Table { values, prefix })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    fn len(&self) -> f64 {
        self.values.len() as f64
    }

    fn sum_to(&self, n: f64) -> f64 {
        self.prefix[(n.max(0.0) as usize).min(self.values.len())]
    }
}

fn power_direct(alpha: f64, n: f64) -> f64 {
    let mut terms: Vec<f64> = (1..=n as u64).map(|k| (k as f64).powf(-alpha)).collect();
    terms.reverse();
    terms.iter().sum()
}

/// `Σ_{k=a}^{n} k^{-α}` by Euler-Maclaurin with three correction terms.
fn power_em(alpha: f64, a: f64, n: f64) -> f64 {
    let f = |k: f64| k.powf(-alpha);
    let d1 = |k: f64| -alpha * k.powf(-alpha - 1.0);
    let d3 = |k: f64| -alpha * (alpha + 1.0) * (alpha + 2.0) * k.powf(-alpha - 3.0);
    let integral = if (alpha - 1.0).abs() < 1e-15 {
        (n / a).ln()
    } else {
        (n.powf(1.0 - alpha) - a.powf(1.0 - alpha)) / (1.0 - alpha)
    };
    integral + (f(a) + f(n)) / 2.0 + (d1(n) - d1(a)) / 12.0 - (d3(n) - d3(a)) / 720.0
}

fn harmonic_sum(n: f64) -> f64 {
    if n <= DIRECT {
        return power_direct(1.0, n);
    }
    let n2 = n * n;
    n.ln() + EULER_GAMMA + 1.0 / (2.0 * n) - 1.0 / (12.0 * n2) + 1.0 / (120.0 * n2 * n2) - 1.0 / (252.0 * n2 * n2 * n2)
}

impl Generator {
    pub fn power(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::Invalid(format!("power decay needs alpha > 0, got {alpha}")));
        }
        Ok(Generator::Power(alpha))
    }

    pub fn geometric(r: f64) -> Result<Self> {
        if !(r > 0.0 && r < 1.0) {
            return Err(Error::Invalid(format!("geometric ratio must lie in (0, 1), got {r}")));
        }
        Ok(Generator::Geometric(r))
    }

    pub fn table(values: Vec<f64>) -> Result<Self> {
        Ok(Generator::Table(Table::new(values)?))
    }

    pub fn head_tail(head: Vec<f64>, tail: Generator, scale: f64) -> Result<Self> {
        let head = Table::new(head)?;
        let g = Generator::HeadTail { head, tail: Box::new(tail), scale };
        if let Generator::HeadTail { head, tail, scale } = &g {
            if let Some(last) = head.values.last() {
                if scale * tail.term(head.len() + 1.0) > *last {
                    return Err(Error::Invalid("tail must not exceed the last head entry".into()));
                }
            }
            if !(*scale >= 0.0) {
                return Err(Error::Invalid("tail scale must be nonnegative".into()));
            }
        }
        Ok(g)
    }

    /// `s_k` for an integer-valued `k ≥ 1`.
    pub fn term(&self, k: f64) -> f64 {
        match self {
            Generator::Harmonic => 1.0 / k,
            Generator::Power(a) => k.powf(-a),
            Generator::Geometric(r) => r.powf(k),
            Generator::PsiIncrements(psi) => psi.eval(k) - psi.eval(k - 1.0),
            Generator::Table(t) => t.values.get(k as usize - 1).copied().unwrap_or(0.0),
            Generator::HeadTail { head, tail, scale } => {
                if k <= head.len() {
                    head.values[k as usize - 1]
                } else {
                    scale * tail.term(k)
                }
            }
        }
    }

    /// `S(n) = Σ_{k ≤ n} s_k` for an integer-valued `n ≥ 0`.
    pub fn sum(&self, n: f64) -> f64 {
        if n < 1.0 {
            return 0.0;
        }
        match self {
            Generator::Harmonic => harmonic_sum(n),
            Generator::Power(a) if (*a - 1.0).abs() < 1e-15 => harmonic_sum(n),
            Generator::Power(a) => {
                if n <= DIRECT {
                    power_direct(*a, n)
                } else {
                    power_direct(*a, DIRECT - 1.0) + power_em(*a, DIRECT, n)
                }
            }
            Generator::Geometric(r) => r * (1.0 - r.powf(n)) / (1.0 - r),
            Generator::PsiIncrements(psi) => psi.eval(n),
            Generator::Table(t) => t.sum_to(n),
            Generator::HeadTail { head, tail, scale } => {
                let h = head.len();
                if n <= h {
                    head.sum_to(n)
                } else {
                    head.sum_to(h) + scale * (tail.sum(n) - tail.sum(h))
                }
            }
        }
    }

    /// `∫_0^t` of the step model `Σ s_k χ_(k−1,k]`.
    pub fn integral(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        let n = t.floor();
        if n == t {
            return self.sum(n);
        }
        self.sum(n) + (t - n) * self.term(n + 1.0)
    }

    /// The first `n` terms as a step function with unit cells.
    pub fn materialize(&self, n: usize) -> Result<StepFn> {
        let vals: Vec<crate::rational::Q> = (1..=n)
            .map(|k| crate::rational::from_f64(self.term(k as f64)).ok_or_else(|| Error::Invalid("non-finite term".into())))
            .collect::<Result<_>>()?;
        StepFn::new((1..=n as i64).map(crate::rational::int).collect(), vals)
    }
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Generator::Harmonic => write!(f, "harmonic"),
            Generator::Power(a) => write!(f, "pow:{a}"),
            Generator::Geometric(r) => write!(f, "geom:{r}"),
            Generator::PsiIncrements(psi) => write!(f, "psi:{psi}"),
            Generator::Table(t) => {
                let parts: Vec<String> = t.values.iter().map(f64::to_string).collect();
                write!(f, "table:{}", parts.join(","))
            }
            Generator::HeadTail { head, tail, scale } => write!(f, "head[{}]+{scale}*{tail}", head.values.len()),
        }
    }
}

impl FromStr for Generator {
    type Err = Error;

    /// `harmonic`, `pow:0.7`, `geom:0.5`, `psi:pow:0.5`, or `table:1,0.5,0.25`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (head, rest) = s.split_once(':').unwrap_or((s, ""));
        let num = |r: &str| r.trim().parse::<f64>().map_err(|_| Error::Parse(format!("bad number in `{s}`")));
        match head {
            "harmonic" if rest.is_empty() => Ok(Generator::Harmonic),
            "pow" => Generator::power(num(rest)?),
            "geom" => Generator::geometric(num(rest)?),
            "psi" => Ok(Generator::PsiIncrements(rest.parse()?)),
            "table" => Generator::table(rest.split(',').map(num).collect::<Result<_>>()?),
            _ => Err(Error::Parse(format!("unknown sequence `{s}`"))),
        }
    }
}

/// An input to the trace functionals: an explicit step function or a generated sequence
/// cut off at `horizon` (which may be astronomically large).
#[derive(Clone, Debug, PartialEq)]
pub enum Element {
    Step(StepFn),
    Generated { gen: Generator, horizon: f64 },
}

#[cfg(test)]
mod tests {
    use super::*;

    fn direct(g: &Generator, n: u64) -> f64 {
        let mut sum = 0.0f64;
        let mut comp = 0.0f64;
        for k in 1..=n {
            let y = g.term(k as f64) - comp;
            let t = sum + y;
            comp = (t - sum) - y;
            sum = t;
        }
        sum
    }

    #[test]
    fn closed_forms_match_direct_sums() {
        for g in [Generator::Harmonic, Generator::Power(0.5), Generator::Power(1.7), Generator::Geometric(0.5)] {
            for n in [1u64, 10, 999, 1000, 1001, 54_321, 1_000_000] {
                let (a, b) = (g.sum(n as f64), direct(&g, n));
                assert!((a - b).abs() <= 1e-12 * b.max(1.0), "{g} at {n}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn harmonic_number_oracle() {
        // H_100000 to 15 digits.
        assert!((Generator::Harmonic.sum(1e5) - 12.090_146_129_863_428).abs() < 1e-12);
    }

    #[test]
    fn psi_increments_telescope() {
        let g = Generator::PsiIncrements(Psi::Power(0.5));
        assert!((g.sum(1e6) - 1000.0).abs() < 1e-9);
        assert!((direct(&g, 10_000) - 100.0).abs() < 1e-9);
    }

    #[test]
    fn tables_and_head_tail() {
        let t = Generator::table(vec![3.0, 2.0, 2.0]).unwrap();
        assert_eq!(t.sum(2.0), 5.0);
        assert_eq!(t.sum(10.0), 7.0);
        assert_eq!(t.integral(2.5), 6.0);
        assert!(Generator::table(vec![1.0, 2.0]).is_err());
        let ht = Generator::head_tail(vec![5.0, 1.0], Generator::Harmonic, 2.0).unwrap();
        assert_eq!(ht.term(3.0), 2.0 / 3.0);
        assert!((ht.sum(2000.0) - (6.0 + 2.0 * (Generator::Harmonic.sum(2000.0) - 1.5))).abs() < 1e-12);
        assert!(Generator::head_tail(vec![1.0], Generator::Harmonic, 5.0).is_err());
    }

    #[test]
    fn parse_generators() {
        for s in ["harmonic", "pow:0.5", "geom:0.5", "psi:pow:0.5", "table:1,0.5"] {
            let g: Generator = s.parse().unwrap();
            assert_eq!(g.to_string(), s);
        }
        assert!("geom:2".parse::<Generator>().is_err());
    }
}
