use rand::Rng;
use serde_json::json;

use crate::linalg::{
    gram_singular_values, op_direct_sum, pair_sums, random_matrix, random_orthogonal, random_psd, singular_values,
    spectral_distance, Matrix, MAX_DIM,
};
use crate::majorization::submajorization_slack_f64;
use crate::norms::{norm, NormSpec, Psi};
use crate::rational::{from_f64, int, Q};
use crate::step::StepFn;
use crate::traces::{dixmier_bracket, p_estimate, pi_estimate, Element, Generator, PInput};

use super::super::gen::{random_difference, random_mu_bounded, random_spec};
use super::super::{Caps, Trial, TrialRng};
use super::{js, jss, rel_slack};

const PI_SCHEDULE: [u64; 10] = [2, 4, 8, 16, 32, 64, 128, 256, 512, 1024];

/// A norm cheap enough to evaluate on long dilations.
fn dilation_spec(rng: &mut TrialRng) -> NormSpec {
    loop {
        match random_spec(rng) {
            NormSpec::FNorm(_) => continue,
            s => return s,
        }
    }
}

fn series(x: &StepFn, spec: &NormSpec, schedule: &[u64]) -> Vec<f64> {
    pi_estimate(&Element::Step(x.clone()), spec, schedule).expect("pi of a generated instance").series.iter().map(|p| p.1).collect()
}

fn rel_diff(a: f64, b: f64) -> f64 {
    -rel_slack(a, b).abs()
}

pub(crate) fn pi_convexity(rng: &mut TrialRng, caps: &Caps) -> Trial {
    let (x, y) = (random_mu_bounded(rng, caps.max_len), random_mu_bounded(rng, caps.max_len));
    let spec = dilation_spec(rng);
    let sum = x.add(&y);
    let bx = pi_estimate(&Element::Step(x.clone()), &spec, &PI_SCHEDULE).expect("pi of x");
    let by = pi_estimate(&Element::Step(y.clone()), &spec, &PI_SCHEDULE).expect("pi of y");
    let bs = pi_estimate(&Element::Step(sum), &spec, &PI_SCHEDULE).expect("pi of x + y");
    let mut margin = f64::INFINITY;
    for ((s, a), b) in bs.series.iter().zip(&bx.series).zip(&by.series) {
        margin = margin.min(rel_slack(s.1, a.1 + b.1));
    }
    let last = |b: &crate::traces::LimitBracket| b.last().unwrap_or(0.0);
    let widths = 2.0 * (bx.width() + by.width());
    margin = margin.min(rel_slack(last(&bs), last(&bx) + last(&by) + widths));
    Trial::float(margin, json!({ "x": js(&x), "y": js(&y), "norm": spec.to_string() }))
}

pub(crate) fn pi_dilation(rng: &mut TrialRng, caps: &Caps) -> Trial {
    let x = random_mu_bounded(rng, caps.max_len);
    let k = rng.gen_range(2..=8u64);
    let spec = if rng.gen_bool(0.5) { NormSpec::Marcinkiewicz(Psi::Log1p) } else { dilation_spec(rng) };
    let schedule = [2u64, 4, 8, 16, 32];
    let scaled: Vec<u64> = schedule.iter().map(|m| m * k).collect();
    let lhs = series(&x.dilate(k), &spec, &schedule);
    let rhs = series(&x, &spec, &scaled);
    let margin = lhs.iter().zip(&rhs).map(|(a, b)| rel_diff(*a, k as f64 * b)).fold(0.0, f64::min);
    Trial::float(margin, json!({ "x": js(&x), "k": k, "norm": spec.to_string() }))
}

pub(crate) fn p_le_norm(rng: &mut TrialRng, caps: &Caps) -> Trial {
    let (a, b, d) = random_difference(rng, (caps.max_len / 2).max(2));
    let spec = match rng.gen_range(0..4) {
        0 => NormSpec::L1,
        1 => NormSpec::Sup,
        2 => NormSpec::Marcinkiewicz(Psi::Log1p),
        _ => NormSpec::Marcinkiewicz(Psi::Power(0.5)),
    };
    let bound = norm(&d.abs(), &spec).expect("norm of |d|").value;
    let br = p_estimate(&PInput::Finite(d.clone()), &spec, &[2, 4, 8, 16]).expect("p of a difference");
    let margin = br.series.iter().map(|p| rel_slack(p.1, bound)).fold(f64::INFINITY, f64::min);
    Trial::float(margin, json!({ "a": js(&a), "b": js(&b), "d": jss(&d), "norm": spec.to_string() }))
}

pub(crate) fn dixmier_l1(rng: &mut TrialRng, _caps: &Caps) -> Trial {
    let gen = match rng.gen_range(0..3) {
        0 => Generator::geometric(rng.gen_range(0.05..0.95)).expect("ratio in (0, 1)"),
        1 => Generator::power(rng.gen_range(1.1..3.0)).expect("positive exponent"),
        _ => {
            let mut v: Vec<f64> = (0..rng.gen_range(1..=32)).map(|_| rng.gen_range(0.0..10.0)).collect();
            v.sort_by(|a, b| b.total_cmp(a));
            Generator::table(v).expect("nonincreasing table")
        }
    };
    let schedule: Vec<f64> = (8..=24).map(|k| 10f64.powf(k as f64 / 4.0).round()).collect();
    let total = gen.sum(1e300);
    let br = dixmier_bracket(&gen, &Psi::Log1p, &schedule).expect("log1p is positive");
    let scale = total.max(f64::MIN_POSITIVE);
    let margin =
        br.series.iter().map(|&(n, xi)| (total / (1.0 + n).ln() - xi) / scale).fold(f64::INFINITY, f64::min);
    Trial::float(margin, json!({ "generator": gen.to_string() }))
}

fn spectrum_step(sv: &[f64]) -> StepFn {
    let vals: Vec<Q> = sv.iter().map(|v| from_f64(v.max(0.0)).expect("finite singular value")).collect();
    StepFn::new((1..=sv.len() as i64).map(int).collect(), vals).expect("nonnegative spectrum")
}

fn matrix_json(a: &Matrix) -> serde_json::Value {
    json!(a.rows())
}

pub(crate) fn coherence(rng: &mut TrialRng, caps: &Caps) -> Trial {
    let n = rng.gen_range(2..=caps.matrix_n);
    let a = random_matrix(n, rng);
    let m = rng.gen_range(2..=(MAX_DIM / n).min(8));
    let big = op_direct_sum(&a, m).expect("within the size cap");
    let (sa, sb) = (singular_values(&a), singular_values(&big));
    let dilated: Vec<f64> = sa.iter().flat_map(|v| std::iter::repeat(*v).take(m)).collect();
    let mut margin = -spectral_distance(&sb, &dilated);
    let spec = dilation_spec(rng);
    let ks = [1u64, 2, 4, 8, 16];
    let mks: Vec<u64> = ks.iter().map(|k| k * m as u64).collect();
    let lhs = series(&spectrum_step(&sb), &spec, &ks);
    let rhs = series(&spectrum_step(&sa), &spec, &mks);
    for (l, r) in lhs.iter().zip(&rhs) {
        margin = margin.min(rel_diff(l / m as f64, *r));
    }
    Trial::float(margin, json!({ "a": matrix_json(&a), "m": m, "norm": spec.to_string() }))
}

pub(crate) fn svd_oracle(rng: &mut TrialRng, caps: &Caps) -> Trial {
    let n = rng.gen_range(2..=caps.matrix_n);
    let a = random_matrix(n, rng);
    let margin = -spectral_distance(&singular_values(&a), &gram_singular_values(&a));
    Trial::float(margin, json!({ "a": matrix_json(&a) }))
}

pub(crate) fn unitary_invariance(rng: &mut TrialRng, caps: &Caps) -> Trial {
    let n = rng.gen_range(2..=caps.matrix_n);
    let a = random_matrix(n, rng);
    let (u, v) = (random_orthogonal(n, rng), random_orthogonal(n, rng));
    let margin = -spectral_distance(&singular_values(&u.mul(&a).mul(&v)), &singular_values(&a));
    Trial::float(margin, json!({ "a": matrix_json(&a), "u": matrix_json(&u), "v": matrix_json(&v) }))
}

struct PsdPair {
    a: Matrix,
    b: Matrix,
    sum: Vec<f64>,
    parts: Vec<f64>,
    trace: f64,
}

impl PsdPair {
    fn draw(rng: &mut TrialRng, caps: &Caps) -> Self {
        let n = rng.gen_range(2..=caps.matrix_n);
        let (a, b) = (random_psd(n, rng), random_psd(n, rng));
        let sum = singular_values(&a.add(&b));
        let parts: Vec<f64> = singular_values(&a).iter().zip(singular_values(&b)).map(|(x, y)| x + y).collect();
        let trace = sum.iter().sum::<f64>().max(f64::MIN_POSITIVE);
        PsdPair { a, b, sum, parts, trace }
    }

    fn to_json(&self) -> serde_json::Value {
        json!({ "a": matrix_json(&self.a), "b": matrix_json(&self.b) })
    }
}

pub(crate) fn rear_sum(rng: &mut TrialRng, caps: &Caps) -> Trial {
    let p = PsdPair::draw(rng, caps);
    let first = submajorization_slack_f64(&p.sum, &p.parts);
    let second = submajorization_slack_f64(&p.parts, &pair_sums(&p.sum));
    Trial::float(first.min(second) / p.trace, p.to_json())
}

pub(crate) fn mu_sum(rng: &mut TrialRng, caps: &Caps) -> Trial {
    let p = PsdPair::draw(rng, caps);
    let n = p.sum.len();
    let prefix = |v: &[f64]| {
        let mut out = vec![0.0];
        for k in 0..4 * n {
            out.push(out[k] + v.get(k).copied().unwrap_or(0.0));
        }
        out
    };
    let (s, t) = (prefix(&p.sum), prefix(&p.parts));
    let mut margin = f64::INFINITY;
    for a in 0..=n {
        for b in 2 * a..=2 * n {
            margin = margin.min((t[b] - t[a]) - (s[b] - s[2 * a]));
            margin = margin.min((s[2 * b] - s[2 * a]) - (t[b] - t[2 * a]));
        }
    }
    Trial::float(margin / p.trace, p.to_json())
}
