use num_traits::{One, Signed, Zero};
use rand::seq::SliceRandom;
use rand::Rng;
use serde_json::{json, Value};

use crate::averaging::{
    a_level, a_nodes, auto_window, build_a_m, build_b, expectation, expectation_fn, kappa_truncate, m_avg, Kappa, KappaSeq,
    Partition, Tail,
};
use crate::majorization::{submajorize, uniform_check_fn, uniform_gap};
use crate::norms::unit_cell_averages;
use crate::rational::{int, powi, q, to_f64, Q};
use crate::step::{merge_sorted, SignedStep, StepFn};

use super::super::gen::{
    fast_ratio, level_structure, log_uniform, rand_q, random_kappa, random_mu, random_mu_bounded, random_nodes, random_step,
    random_theta, ratios_for_kappa, shuffle_cells, slow_ratio, Profile,
};
use super::super::{Caps, Trial, TrialRng};
use super::{jq, js, jss, min_q, or_zero, ATTEMPTS};

fn random_any(rng: &mut TrialRng, max_len: usize) -> StepFn {
    let p = *Profile::ALL.choose(rng).expect("nonempty");
    random_step(rng, p, max_len)
}

fn kappa_json(k: &KappaSeq) -> Value {
    json!({ "n_min": k.n_min, "entries": k.entries.iter().map(|e| e.to_string()).collect::<Vec<_>>() })
}

fn e_zero(x: &StepFn, p: &Partition) -> StepFn {
    expectation_fn(x, p, Tail::Zero)
}

/// Minimum of `f` over the points of `grid` inside `[lo, hi]`, endpoints included.
fn min_over(grid: impl IntoIterator<Item = Q>, lo: &Q, hi: &Q, f: impl Fn(&Q) -> Q) -> Option<Q> {
    let mut pts: Vec<Q> = grid.into_iter().filter(|t| t >= lo && t <= hi).collect();
    pts.push(lo.clone());
    pts.push(hi.clone());
    pts.sort();
    pts.dedup();
    pts.iter().map(f).fold(None, min_q)
}

pub(crate) fn expectation_contraction(rng: &mut TrialRng, caps: &Caps) -> Trial {
    let x = random_any(rng, caps.max_len);
    let x = shuffle_cells(&x, rng);
    let reach = x.horizon() * q(3, 2);
    let p = Partition::new(random_nodes(rng, &reach, 12)).expect("sorted nodes");
    let tail = if rng.gen_bool(0.5) { Tail::Keep } else { Tail::Zero };
    let e = expectation_fn(&x, &p, tail);
    let nodes: Vec<Value> = p.nodes().iter().map(jq).collect();
    Trial::exact(submajorize(&e, &x).margin, json!({ "x": js(&x), "nodes": nodes, "tail": format!("{tail:?}") }))
}

pub(crate) fn union_lemma(rng: &mut TrialRng, caps: &Caps) -> Trial {
    let x = random_mu(rng, caps.max_len);
    let reach = x.horizon() * q(3, 2);
    let k = rng.gen_range(1..=4);
    let parts: Vec<Partition> =
        (0..k).map(|_| Partition::new(random_nodes(rng, &reach, 10)).expect("sorted nodes")).collect();
    let lhs = e_zero(&x, &Partition::union(&parts));
    let rhs = parts.iter().fold(StepFn::zero(), |acc, p| acc.add(&e_zero(&x, p)));
    let show: Vec<Vec<Value>> = parts.iter().map(|p| p.nodes().iter().map(jq).collect()).collect();
    Trial::exact(submajorize(&lhs, &rhs).margin, json!({ "x": js(&x), "partitions": show }))
}

/// `κ' ≤ κ` entrywise, sometimes equal.
fn smaller_kappa(rng: &mut TrialRng, kappa: &KappaSeq) -> KappaSeq {
    let entries = kappa
        .entries
        .iter()
        .map(|k| match (k, rng.gen_range(0..4)) {
            (_, 0) => *k,
            (Kappa::Finite(v), _) => Kappa::Finite(rng.gen_range(1..=*v)),
            (Kappa::Infinite, 1) => Kappa::Infinite,
            (Kappa::Infinite, _) => Kappa::Finite(log_uniform(rng, 1, 400)),
        })
        .collect();
    KappaSeq::new(kappa.n_min, entries).expect("positive entries")
}

/// A nonincreasing `x` and a `θ`, either with a level structure matched to `kappa` or random.
fn instance_for_kappa(rng: &mut TrialRng, caps: &Caps, kappa: &KappaSeq) -> (StepFn, Q, bool) {
    let theta = random_theta(rng);
    if rng.gen_bool(0.75) {
        let extra = rng.gen_range(0..3);
        let (j0, ratios) = ratios_for_kappa(rng, kappa, extra);
        let a0 = rand_q(rng, 1, 16, 8);
        (level_structure(&theta, j0, a0, &ratios).x, theta, true)
    } else {
        (random_mu(rng, caps.max_len), theta, false)
    }
}

fn kappa_window(rng: &mut TrialRng, caps: &Caps) -> (i64, usize) {
    (rng.gen_range(-3..=3), rng.gen_range(1..=caps.kappa_window))
}

/// For random instances the window is moved onto the levels `x` actually reaches.
fn align_window(x: &StepFn, theta: &Q, kappa: KappaSeq, structured: bool) -> KappaSeq {
    if structured {
        return kappa;
    }
    let n_lo = auto_window(x, theta).div_euclid(3);
    KappaSeq { n_min: n_lo, ..kappa }
}

pub(crate) fn majorant_lemma(rng: &mut TrialRng, caps: &Caps) -> Trial {
    let (n_lo, len) = kappa_window(rng, caps);
    let big = log_uniform(rng, 2, 300);
    let kappa = random_kappa(rng, n_lo, len, big);
    let small = smaller_kappa(rng, &kappa);
    let target = if rng.gen_bool(0.5) { kappa.clone() } else { small.clone() };
    let (x, theta, structured) = instance_for_kappa(rng, caps, &target);
    let kappa = align_window(&x, &theta, kappa, structured);
    let small = align_window(&x, &theta, small, structured);
    let b = build_b(&x, &kappa, &theta).expect("valid construction").partition;
    let b2 = build_b(&x, &small, &theta).expect("valid construction").partition;
    let lhs = e_zero(&x, &b);
    let rhs = e_zero(&x, &b2).scale(&q(3, 2));
    Trial::exact(
        submajorize(&lhs, &rhs).margin,
        json!({ "x": js(&x), "theta": jq(&theta), "kappa": kappa_json(&kappa), "kappa_prime": kappa_json(&small) }),
    )
}

pub(crate) fn majorant_remark(rng: &mut TrialRng, caps: &Caps) -> Trial {
    let (n_lo, len) = kappa_window(rng, caps);
    let big = log_uniform(rng, 2, 300);
    let kappa = random_kappa(rng, n_lo, len, big);
    let (x, theta, structured) = instance_for_kappa(rng, caps, &kappa);
    let kappa = align_window(&x, &theta, kappa, structured);
    let a = a_nodes(&x, &theta, 3 * kappa.n_min).expect("positive theta");
    // κ' ≤ κ is enforced only where the node κ_n a_{3n} exists; elsewhere κ' is free.
    let free_big = log_uniform(rng, 2, 300);
    let free = random_kappa(rng, kappa.n_min, kappa.entries.len(), free_big);
    let constrained = smaller_kappa(rng, &kappa);
    let entries = kappa
        .indices()
        .map(|n| {
            let in_s = match (kappa.get(n), a.get(3 * n), a.get(3 * n + 1)) {
                (Kappa::Finite(k), Some(lo), Some(hi)) => int(k as i64) * int(k as i64) * lo < *hi,
                _ => false,
            };
            if in_s {
                constrained.get(n)
            } else {
                free.get(n)
            }
        })
        .collect();
    let small = KappaSeq::new(kappa.n_min, entries).expect("positive entries");
    let lhs = e_zero(&x, &build_b(&x, &kappa, &theta).expect("valid construction").partition);
    let rhs = e_zero(&x, &build_b(&x, &small, &theta).expect("valid construction").partition).scale(&q(3, 2));
    Trial::exact(
        submajorize(&lhs, &rhs).margin,
        json!({ "x": js(&x), "theta": jq(&theta), "kappa": kappa_json(&kappa), "kappa_prime": kappa_json(&small) }),
    )
}

/// A nonincreasing `x` with level structure at `θ = 1` whose ratios are fast, close to `m²`, or slow.
fn level_instance(rng: &mut TrialRng, m: u64) -> (StepFn, i64) {
    let j0 = rng.gen_range(-3..=3);
    let k = rng.gen_range(3..=10);
    let m2 = int((m * m) as i64);
    let ratios: Vec<Q> = (0..k)
        .map(|_| match rng.gen_range(0..3) {
            0 => fast_ratio(rng),
            1 => &m2 * (Q::one() + q(rng.gen_range(-4..=4), 64)),
            _ => slow_ratio(rng, m),
        })
        .collect();
    let a0 = rand_q(rng, 1, 16, 8);
    (level_structure(&int(1), j0, a0, &ratios).x, j0)
}

pub(crate) fn pam_union(rng: &mut TrialRng, caps: &Caps) -> Trial {
    let m = rng.gen_range(2..=6u64);
    let (x, n_min) = if rng.gen_bool(0.6) {
        let (x, j0) = level_instance(rng, m);
        (x, j0 - rng.gen_range(0..=2))
    } else {
        let x = random_mu(rng, caps.max_len);
        let n = auto_window(&x, &int(1));
        (x, n)
    };
    let n_lo = n_min.div_euclid(3);
    let top = a_nodes(&x, &int(1), 3 * n_lo).expect("positive theta").nodes.keys().next_back().copied().unwrap_or(3 * n_lo);
    let n_hi = top.div_euclid(3) + 1;
    let kappa = KappaSeq::constant(n_lo, (n_hi - n_lo + 1) as usize, m);
    let bs: Vec<Partition> = [int(1), q(3, 2), q(9, 4)]
        .iter()
        .map(|th| build_b(&x, &kappa, th).expect("valid construction").partition)
        .collect();
    let am = build_a_m(&x, m, 3 * n_lo).expect("valid construction").partition;
    let same = Partition::union(&bs) == am;
    let lhs = e_zero(&x, &am);
    let rhs = bs.iter().fold(StepFn::zero(), |acc, p| acc.add(&e_zero(&x, p)));
    let margin = submajorize(&lhs, &rhs).margin;
    let margin = if same { margin } else { -Q::one() };
    Trial::exact(margin, json!({ "x": js(&x), "m": m, "n_min": 3 * n_lo }))
}

/// The shared instance of the main estimate and the chain built on it.
struct MainInstance {
    x: StepFn,
    theta: Q,
    kappa: KappaSeq,
    m: u64,
    u: StepFn,
}

impl MainInstance {
    fn draw(rng: &mut TrialRng, caps: &Caps) -> Self {
        let m = rng.gen_range(1..=3u64);
        let (n_lo, len) = kappa_window(rng, caps);
        let kappa = random_kappa(rng, n_lo, len, 100 * m);
        let (x, theta, kappa) = if rng.gen_bool(0.8) {
            let theta = random_theta(rng);
            let extra = rng.gen_range(0..3);
            let (j0, ratios) = ratios_for_kappa(rng, &kappa, extra);
            let a0 = rand_q(rng, 1, 16, 8);
            (level_structure(&theta, j0, a0, &ratios).x, theta, kappa)
        } else {
            let x = random_mu(rng, caps.max_len);
            let theta = random_theta(rng);
            let kappa = align_window(&x, &theta, kappa, false);
            (x, theta, kappa)
        };
        let s = powi(&q(1, 2), rng.gen_range(-1..=6));
        let u = match rng.gen_range(0..4) {
            0 => e_zero(&x, &build_b(&x, &kappa, &theta).expect("valid construction").partition).scale(&s),
            1 => x.scale(&s),
            2 => {
                let noise = random_step(rng, Profile::Generic, caps.max_len);
                let noise = noise.dilate_by(&(x.horizon() / noise.horizon()));
                noise.scale(&(&s * x.total() / noise.total()))
            }
            _ => x.scale(&s).add(&e_zero(&x, &build_b(&x, &kappa, &theta).expect("valid construction").partition).scale(&s)),
        };
        MainInstance { x, theta, kappa, m, u }
    }

    fn e(&self, kappa: &KappaSeq) -> StepFn {
        e_zero(&self.x, &build_b(&self.x, kappa, &self.theta).expect("valid construction").partition)
    }

    /// `∫_{ma}^b E(x|B_κ) ≤ ∫_a^{mb} (x+u)` for all real `0 ≤ ma ≤ b`.
    fn hypothesis(&self) -> bool {
        let m = int(self.m as i64);
        let g = self.x.add(&self.u);
        !uniform_gap(self.e(&self.kappa).as_signed(), g.as_signed(), &m, &m).0.is_negative()
    }

    fn truncated(&self, lambda: &Q) -> KappaSeq {
        kappa_truncate(&self.kappa, lambda).expect("positive lambda")
    }

    fn to_json(&self) -> Value {
        json!({
            "x": js(&self.x), "theta": jq(&self.theta), "kappa": kappa_json(&self.kappa), "m": self.m, "u": js(&self.u),
        })
    }
}

fn scaled_dilation(f: &StepFn, s: &Q, c: &Q) -> StepFn {
    f.dilate_by(s).scale(c)
}

pub(crate) fn main_technical_estimate(rng: &mut TrialRng, caps: &Caps) -> Trial {
    let mut last = Value::Null;
    for _ in 0..ATTEMPTS {
        let inst = MainInstance::draw(rng, caps);
        last = inst.to_json();
        if !inst.hypothesis() {
            continue;
        }
        let m = int(inst.m as i64);
        let e = inst.e(&inst.truncated(&(int(100) * &m)));
        let lhs = scaled_dilation(&e, &m, &m.recip());
        let margin = submajorize(&lhs, &inst.u.scale(&int(30))).margin;
        return Trial::exact(margin, last);
    }
    Trial { hypothesis: false, ..Trial::exact(Q::zero(), last) }
}

pub(crate) fn kn_chain(rng: &mut TrialRng, caps: &Caps) -> Trial {
    let mut last = Value::Null;
    for _ in 0..ATTEMPTS {
        let inst = MainInstance::draw(rng, caps);
        last = inst.to_json();
        if !inst.hypothesis() {
            continue;
        }
        let m = int(inst.m as i64);
        let floor = int(100) * &m;
        let big: Vec<u64> = inst
            .kappa
            .entries
            .iter()
            .filter_map(|k| match k {
                Kappa::Finite(v) if int(*v as i64) >= floor => Some(*v),
                _ => None,
            })
            .collect();
        let lambda = match big.choose(rng) {
            Some(v) if rng.gen_bool(0.5) => int(*v as i64),
            _ => &floor * int(rng.gen_range(1..=3)),
        };
        let e_lambda = inst.e(&inst.truncated(&lambda));
        let e_floor = inst.e(&inst.truncated(&floor));
        let first = scaled_dilation(&e_lambda, &lambda, &lambda.recip());
        let second = scaled_dilation(&e_lambda, &m, &m.recip());
        let third = scaled_dilation(&e_floor, &m, &(q(3, 2) / &m));
        let bound = inst.u.scale(&int(45));
        let margin = [
            submajorize(&first, &second).margin,
            submajorize(&second, &third).margin,
            submajorize(&third, &bound).margin,
            submajorize(&first, &bound).margin,
        ]
        .into_iter()
        .fold(None, min_q);
        let mut input = last;
        input["lambda"] = jq(&lambda);
        return Trial::exact(or_zero(margin), input);
    }
    Trial { hypothesis: false, ..Trial::exact(Q::zero(), last) }
}

fn prec_instance(rng: &mut TrialRng, caps: &Caps, m: u64) -> (StepFn, i64) {
    if rng.gen_bool(0.7) {
        let (x, j0) = level_instance(rng, m);
        (x, j0 - rng.gen_range(0..=2))
    } else {
        let x = random_mu(rng, caps.max_len);
        let n = auto_window(&x, &int(1));
        (x, n)
    }
}

/// `(2/3)X(m⁴t) + (3/2)∫_0^{m⁴t} E(x|A_m) − X(t)` at the kinks of all three terms in `[lo, hi]`,
/// plus `extra` and its kinks.
fn prec_margin(x: &StepFn, am: &Partition, m4: &Q, lo: &Q, hi: &Q, extra: impl Fn(&Q) -> Q, kinks: &[Q]) -> Option<Q> {
    let ea = e_zero(x, am);
    let div = |xs: &[Q]| xs.iter().map(|t| t / m4).collect::<Vec<Q>>();
    let grid = merge_sorted(&merge_sorted(x.breakpoints(), &div(x.breakpoints())), &merge_sorted(&div(am.nodes()), kinks));
    min_over(grid, lo, hi, |t| {
        let s = m4 * t;
        q(2, 3) * x.partial_sum(&s) + q(3, 2) * ea.partial_sum(&s) + extra(t) - x.partial_sum(t)
    })
}

pub(crate) fn prec_estimate(rng: &mut TrialRng, caps: &Caps) -> Trial {
    let m = rng.gen_range(2..=4u64);
    let (x, n_min) = prec_instance(rng, caps, m);
    let a = a_nodes(&x, &int(1), n_min).expect("positive theta");
    let input = json!({ "x": js(&x), "m": m, "n_min": n_min });
    let top = a.nodes.keys().next_back().copied().unwrap_or(n_min - 1);
    // a_n, a_{n+1}, a_{n+2} must all exist for t ∈ [a_n, a_{n+1}].
    if top - 1 <= n_min {
        return Trial::exact(Q::zero(), input);
    }
    let (lo, hi) = (a.get(n_min).expect("in window").clone(), a.get(top - 1).expect("in window").clone());
    let am = build_a_m(&x, m, n_min).expect("valid construction").partition;
    let m4 = int(m.pow(4) as i64);
    let margin = prec_margin(&x, &am, &m4, &lo, &hi, |_| Q::zero(), &[]);
    Trial::exact(or_zero(margin), input)
}

pub(crate) fn prec_estimate_integrable(rng: &mut TrialRng, caps: &Caps) -> Trial {
    let m = rng.gen_range(2..=4u64);
    let (x, n_start) = prec_instance(rng, caps, m);
    let total = x.total();
    let cap = q(4, 9) * &total;
    // n0: the largest n with (3/2)^n ≤ (4/9)X(∞).
    let mut n0 = 0i64;
    while a_level(n0, &int(1)) > cap {
        n0 -= 1;
    }
    while a_level(n0 + 1, &int(1)) <= cap {
        n0 += 1;
    }
    let n_min = n_start.min(n0 - 2);
    let a = a_nodes(&x, &int(1), n_min).expect("positive theta");
    let a_n0 = a.get(n0).expect("level below X(∞)").clone();
    let c = &total / crate::rational::min_q(&a_n0, &Q::one());
    let am = build_a_m(&x, m, n_min).expect("valid construction").partition;
    let m4 = int(m.pow(4) as i64);
    let lo = a.get(n_min).expect("in window").clone();
    let hi = crate::rational::max_q(&x.horizon(), &Q::one()) * int(2);
    let extra = |t: &Q| &c * crate::rational::min_q(&(&m4 * t), &Q::one());
    let margin = prec_margin(&x, &am, &m4, &lo, &hi, extra, &[m4.recip(), a_n0.clone()]);
    Trial::exact(or_zero(margin), json!({ "x": js(&x), "m": m, "n_min": n_min, "n0": n0, "C": jq(&c) }))
}

pub(crate) fn stupid_estimate(rng: &mut TrialRng, caps: &Caps) -> Trial {
    let y = random_mu(rng, caps.max_len);
    let k = rng.gen_range(0..=5u32);
    let lambda = Q::one() + rand_q(rng, 1, 16, 4);
    let two_k = int(1i64 << k);
    let dy = y.dilate(1u64 << k);
    let factor = &lambda / (&lambda - Q::one());
    let t = y.horizon();
    let mut pairs: Vec<(Q, Q)> = (0..8)
        .map(|_| {
            let a = &t * rand_q(rng, 1, 32, 16);
            let b = &lambda * &a + &t * rand_q(rng, 0, 32, 16);
            (a, b)
        })
        .collect();
    for bp in y.breakpoints().iter().take(16) {
        pairs.push((bp / &lambda, bp.clone()));
        pairs.push((bp * &two_k / &lambda, bp * &two_k));
        pairs.push((bp.clone(), &lambda * bp));
    }
    let margin = pairs
        .iter()
        .map(|(a, b)| &factor * dy.integral(a, b) - y.integral(&(&lambda * a / &two_k), b))
        .fold(None, min_q);
    Trial::exact(or_zero(margin), json!({ "y": js(&y), "k": k, "lambda": jq(&lambda) }))
}

pub(crate) fn pave_maj(rng: &mut TrialRng, caps: &Caps) -> Trial {
    let x = random_step(rng, Profile::Generic, caps.max_len);
    let y = random_step(rng, Profile::Generic, caps.max_len);
    let uca = |f: &StepFn| unit_cell_averages(&f.rearrange());
    let f = uca(&x.add(&y));
    let g = uca(&x).add(&uca(&y));
    let h = f.dilate_by(&q(1, 2)).scale(&int(2));
    let two = int(2);
    let margin = min_q(Some(uniform_check_fn(&f, &g, &two).margin), uniform_check_fn(&g, &h, &two).margin);
    Trial::exact(or_zero(margin), json!({ "x": js(&x), "y": js(&y) }))
}

/// `(F(t)/t)` with `F` the primitive of `d`, as a function of `t > 0`.
fn cesaro(d: &SignedStep, t: &Q) -> Q {
    d.partial_sum(t) / t
}

pub(crate) fn fk_bound(rng: &mut TrialRng, caps: &Caps) -> Trial {
    let n = rng.gen_range(1..=4usize);
    let len = (caps.max_len / 4).max(2);
    let xs: Vec<StepFn> = (0..n).map(|_| random_any(rng, len)).collect();
    let ys: Vec<StepFn> = xs.iter().map(|x| shuffle_cells(x, rng)).collect();
    let x = xs.iter().zip(&ys).fold(SignedStep::zero(), |acc, (a, b)| acc.add(&a.as_signed().sub(b.as_signed())));
    let (xp, xm) = (x.positive_part(), x.negative_part());
    let z = ys.iter().fold(xp.clone(), |acc, y| acc.add(y));
    let z_alt = xs.iter().fold(xm.clone(), |acc, y| acc.add(y));
    let mz = z.rearrange();
    let d = xp.rearrange().as_signed().sub(xm.rearrange().as_signed());
    let nq = int(n as i64);
    let grid = merge_sorted(d.breakpoints(), mz.breakpoints());
    let mut margin = None;
    let mut lo = Q::zero();
    for r in &grid {
        let bound = &nq * mz.value_at(r);
        // F(t)/t is monotone on each cell, so its extremes sit at the two ends.
        let left = if lo.is_zero() { d.value_at(r) } else { cesaro(&d, &lo) };
        margin = min_q(margin, &bound - left.abs());
        margin = min_q(margin, &bound - cesaro(&d, r).abs());
        lo = r.clone();
    }
    // Beyond every horizon μ(z) vanishes, so F must have returned to zero.
    margin = min_q(margin, -d.total().abs());
    if z != z_alt {
        margin = Some(-Q::one());
    }
    let show: Vec<Value> = xs.iter().zip(&ys).map(|(a, b)| json!({ "x": js(a), "y": js(b) })).collect();
    Trial::exact(or_zero(margin), json!({ "terms": show }))
}

pub(crate) fn fk_dyadic(rng: &mut TrialRng, caps: &Caps) -> Trial {
    let (a, b) = (random_mu(rng, caps.max_len), random_mu(rng, caps.max_len));
    let x = a.as_signed().sub(b.as_signed());
    let b1 = x.breakpoints().first().cloned().unwrap_or_else(Q::one);
    let t_end = x.horizon();
    let mut n_lo = 0i64;
    while powi(&int(2), n_lo) > b1 {
        n_lo -= 1;
    }
    let mut n_hi = n_lo;
    while powi(&int(2), n_hi) < t_end {
        n_hi += 1;
    }
    let n_top = n_hi + 2;
    let nodes: Vec<Q> = (n_lo..=n_top).map(|n| powi(&int(2), n)).collect();
    let x1 = expectation(&x, &Partition::new(nodes.clone()).expect("dyadic nodes"), Tail::Keep);
    // z = (Cx₁)(2^{n+1}) on (2^n, 2^{n+1}], and (Cx₁)(2^{n_lo}) on the first cell.
    let z_vals: Vec<Q> = nodes.iter().map(|t| cesaro(&x1, t)).collect();
    let z = SignedStep::new(nodes.clone(), z_vals).expect("dyadic nodes");
    let rhs = z.scale(&int(2)).sub(&z.dilate_by(&int(2)));
    let end = nodes.last().expect("nonempty").clone();
    let ok = x1.extend_to(&end).sub(&rhs).head_truncate(&end).values().iter().all(Zero::is_zero);
    let margin = if ok { Q::zero() } else { -Q::one() };
    Trial::exact(margin, json!({ "a": js(&a), "b": js(&b), "x1": jss(&x1) }))
}

pub(crate) fn mn_estimate(rng: &mut TrialRng, caps: &Caps) -> Trial {
    let raw = random_any(rng, caps.max_len);
    let raw = shuffle_cells(&raw, rng);
    let x = raw.scale(&raw.total().recip());
    let m = rng.gen_range(2..=16u64);
    let mq = int(m as i64);
    let avg = m_avg(x.as_signed(), m).expect("m >= 2");
    let t = x.horizon();
    let mut pairs: Vec<(Q, Q)> = (0..8)
        .map(|_| {
            let a = &t * rand_q(rng, 0, 32, 16);
            let b = &mq * &a + &t * rand_q(rng, 1, 32, 8);
            (a, b)
        })
        .collect();
    for bp in x.breakpoints().iter().take(8) {
        pairs.push((bp.clone(), &mq * bp));
        pairs.push((bp / &mq, bp.clone()));
    }
    let mut margin = f64::INFINITY;
    for (a, b) in &pairs {
        let mid = avg.integral(a, b);
        let low = to_f64(&x.integral(a, &(b / &mq)));
        let high = to_f64(&x.integral(&(a / &mq), b));
        margin = margin.min(mid - low).min(high - mid);
    }
    Trial::float(margin, json!({ "x": js(&x), "m": m }))
}

pub(crate) fn hmn_monotone(rng: &mut TrialRng, caps: &Caps) -> Trial {
    let mut last = Value::Null;
    for _ in 0..ATTEMPTS {
        let len = (caps.max_len / 2).max(2);
        let (a, b) = (random_mu_bounded(rng, len), random_mu_bounded(rng, len));
        let (c, d) = if rng.gen_bool(0.8) {
            let e = random_mu_bounded(rng, len);
            let p = Partition::new(random_nodes(rng, &e.horizon(), 8)).expect("sorted nodes");
            let f = expectation_fn(&e, &p, Tail::Keep);
            (a.add(&e).rearrange(), b.add(&f).rearrange())
        } else {
            (random_mu_bounded(rng, len), random_mu_bounded(rng, len))
        };
        let x = a.as_signed().sub(b.as_signed());
        let z = c.as_signed().sub(d.as_signed());
        last = json!({ "a": js(&a), "b": js(&b), "c": js(&c), "d": js(&d) });
        let w = z.sub(&x);
        if w.cumulative().iter().any(Signed::is_negative) {
            continue;
        }
        let m = rng.gen_range(2..=16u64);
        let mq = int(m as i64);
        let (mx, mz) = (m_avg(&x, m).expect("m >= 2"), m_avg(&z, m).expect("m >= 2"));
        let scale = [&a, &b, &c, &d].iter().map(|f| to_f64(&f.total())).fold(1e-300, f64::max);
        let bps = merge_sorted(x.breakpoints(), z.breakpoints());
        let mut pts: Vec<Q> = bps.iter().flat_map(|t| [t.clone(), t * &mq]).collect();
        let top = pts.iter().max().cloned().unwrap_or_else(Q::one);
        pts.extend((0..24).map(|k| &top * powi(&q(2, 3), k)));
        pts.retain(|t| t.is_positive());
        pts.sort();
        pts.dedup();
        let (mut prev, mut gap, mut margin) = (Q::zero(), 0.0, f64::INFINITY);
        for t in pts {
            gap += mz.integral(&prev, &t) - mx.integral(&prev, &t);
            margin = margin.min(gap / scale);
            prev = t;
        }
        last["m"] = json!(m);
        return Trial::float(margin, last);
    }
    Trial { hypothesis: false, ..Trial::float(0.0, last) }
}
