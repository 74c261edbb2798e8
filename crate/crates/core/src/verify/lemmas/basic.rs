use num_traits::{One, Signed, Zero};
use rand::seq::SliceRandom;
use rand::Rng;
use serde_json::json;

use crate::averaging::{expectation_fn, Partition, Tail};
use crate::majorization::{submajorize, uniform_submajorize_fn};
use crate::norms::{norm, unit_cell_averages, NormSpec, Psi};
use crate::rational::{int, q, Q};
use crate::seq::{RSeq, Seq};
use crate::step::StepFn;

use super::super::gen::{rand_q, random_mu_bounded, random_nodes, random_spec, random_step, shuffle_cells, unit_factor, Profile};
use super::super::{Caps, Trial, TrialRng};
use super::{jq, js, min_q, or_zero, rel_slack, ATTEMPTS};

fn random_any(rng: &mut TrialRng, max_len: usize) -> StepFn {
    let p = *Profile::ALL.choose(rng).expect("nonempty");
    random_step(rng, p, max_len)
}

fn flag(ok: bool) -> Q {
    if ok {
        Q::zero()
    } else {
        -Q::one()
    }
}

/// A norm without the unit-cell layer, for the lemmas that build it by hand.
fn base_spec(rng: &mut TrialRng) -> NormSpec {
    loop {
        match random_spec(rng) {
            NormSpec::FNorm(_) => continue,
            s => return s,
        }
    }
}

fn norm_f(x: &StepFn, spec: &NormSpec) -> f64 {
    norm(x, spec).expect("norm of a generated instance").value
}

pub(crate) fn rearrange_invariants(rng: &mut TrialRng, caps: &Caps) -> Trial {
    let x = random_any(rng, caps.max_len);
    let x = shuffle_cells(&x, rng);
    let mu = x.rearrange();
    let mut ok = mu.rearrange() == mu && mu.is_nonincreasing() && mu.total() == x.total();
    let mut levels: Vec<Q> = x.values().to_vec();
    levels.push(Q::zero());
    levels.sort();
    levels.dedup();
    let mids: Vec<Q> = levels.windows(2).map(|w| (&w[0] + &w[1]) / int(2)).collect();
    for s in levels.iter().chain(&mids) {
        ok &= x.distribution(s) == mu.distribution(s);
    }
    Trial::exact(flag(ok), json!({ "x": js(&x) }))
}

pub(crate) fn greedy_partial_sum(rng: &mut TrialRng, caps: &Caps) -> Trial {
    let x = random_any(rng, caps.max_len);
    let x = shuffle_cells(&x, rng);
    let mu = x.rearrange();
    let mut margin = None;
    for _ in 0..4 {
        let (mut len, mut mass) = (Q::zero(), Q::zero());
        for (l, r, v) in x.cells() {
            if rng.gen_bool(0.5) {
                len += r - &l;
                mass += (r - &l) * v;
            }
        }
        margin = min_q(margin, mu.partial_sum(&len) - mass);
    }
    Trial::exact(or_zero(margin), json!({ "x": js(&x) }))
}

pub(crate) fn dilation_partial_sum(rng: &mut TrialRng, caps: &Caps) -> Trial {
    let x = random_any(rng, caps.max_len);
    let x = shuffle_cells(&x, rng);
    let m = rng.gen_range(1..=16u64);
    let dx = x.dilate(m);
    let mq = int(m as i64);
    let mut ok = true;
    for _ in 0..8 {
        let t = x.horizon() * rand_q(rng, 0, 32, 16);
        ok &= dx.partial_sum(&(&mq * &t)) == &mq * x.partial_sum(&t);
    }
    Trial::exact(flag(ok), json!({ "x": js(&x), "m": m }))
}

fn random_rseq(rng: &mut TrialRng, max_len: usize) -> RSeq {
    let n = rng.gen_range(0..=max_len.min(16));
    let v: Vec<Q> = (0..n).map(|_| rand_q(rng, 0, 12, 3)).collect();
    Seq::new(v).expect("nonnegative").rearrange()
}

pub(crate) fn direct_sum_algebra(rng: &mut TrialRng, caps: &Caps) -> Trial {
    let (a, b, c) = (random_rseq(rng, caps.max_len), random_rseq(rng, caps.max_len), random_rseq(rng, caps.max_len));
    let ok = a.direct_sum(&b) == b.direct_sum(&a) && a.direct_sum(&b).direct_sum(&c) == a.direct_sum(&b.direct_sum(&c));
    let show = |s: &RSeq| s.values().iter().map(jq).collect::<Vec<_>>();
    Trial::exact(flag(ok), json!({ "a": show(&a), "b": show(&b), "c": show(&c) }))
}

pub(crate) fn norm_symmetry(rng: &mut TrialRng, caps: &Caps) -> Trial {
    let x = random_mu_bounded(rng, caps.max_len);
    let y = shuffle_cells(&x, rng);
    let spec = random_spec(rng);
    let (a, b) = (norm_f(&x, &spec), norm_f(&y, &spec));
    Trial::float(-rel_slack(a, b).abs(), json!({ "x": js(&x), "y": js(&y), "norm": spec.to_string() }))
}

pub(crate) fn norm_monotone(rng: &mut TrialRng, caps: &Caps) -> Trial {
    let x = random_step(rng, Profile::Generic, caps.max_len);
    let cells: Vec<(Q, Q)> = x.cells().map(|(l, r, v)| (r - l, v * unit_factor(rng))).collect();
    let y = StepFn::from_lengths(cells).expect("nonnegative values");
    let spec = random_spec(rng);
    let (ny, nx) = (norm_f(&y, &spec), norm_f(&x, &spec));
    Trial::float(rel_slack(ny, nx), json!({ "x": js(&x), "y": js(&y), "norm": spec.to_string() }))
}

pub(crate) fn norm_triangle(rng: &mut TrialRng, caps: &Caps) -> Trial {
    let x = random_step(rng, Profile::Generic, caps.max_len);
    let y = random_step(rng, Profile::Generic, caps.max_len);
    let spec = random_spec(rng);
    let lhs = norm_f(&x.add(&y), &spec);
    let rhs = norm_f(&x, &spec) + norm_f(&y, &spec);
    Trial::float(rel_slack(lhs, rhs), json!({ "x": js(&x), "y": js(&y), "norm": spec.to_string() }))
}

pub(crate) fn marc_dilation(rng: &mut TrialRng, caps: &Caps) -> Trial {
    let x = random_mu_bounded(rng, caps.max_len);
    let psi = match rng.gen_range(0..5) {
        0 => Psi::Log1p,
        1 => Psi::Power(0.25),
        2 => Psi::Power(0.5),
        3 => Psi::Power(0.75),
        _ => Psi::Identity,
    };
    let spec = NormSpec::Marcinkiewicz(psi);
    let m = rng.gen_range(2..=16u64);
    let direct = norm_f(&x.dilate(m), &spec);
    let via = crate::norms::norm_of_dilation(&x, m, &spec).expect("positive psi");
    let bound = m as f64 * norm_f(&x, &spec);
    let margin = rel_slack(direct, bound).min(-rel_slack(direct, via).abs());
    Trial::float(margin, json!({ "x": js(&x), "m": m, "norm": spec.to_string() }))
}

pub(crate) fn fnorm_pave(rng: &mut TrialRng, caps: &Caps) -> Trial {
    let x = random_step(rng, Profile::Generic, caps.max_len);
    let y = random_step(rng, Profile::Generic, caps.max_len);
    let spec = base_spec(rng);
    let uca = |f: &StepFn| unit_cell_averages(&f.rearrange());
    let lhs = norm_f(&uca(&x.add(&y)), &spec);
    let rhs = norm_f(&uca(&x), &spec) + norm_f(&uca(&y), &spec);
    Trial::float(rel_slack(lhs, rhs), json!({ "x": js(&x), "y": js(&y), "norm": spec.to_string() }))
}

pub(crate) fn uniform_implies_submajor(rng: &mut TrialRng, caps: &Caps) -> Trial {
    let mut last = json!(null);
    for _ in 0..ATTEMPTS {
        let x = random_any(rng, caps.max_len);
        let y = match rng.gen_range(0..3) {
            0 => {
                let p = Partition::new(random_nodes(rng, &x.horizon(), 8)).expect("sorted nodes");
                expectation_fn(&x, &p, Tail::Keep).scale(&rand_q(rng, 1, 20, 16))
            }
            1 => {
                let k = rng.gen_range(1..=8u64);
                x.dilate(k).scale(&(rand_q(rng, 1, 20, 16) / int(k as i64)))
            }
            _ => random_step(rng, Profile::Generic, caps.max_len),
        };
        let u = uniform_submajorize_fn(&y, &x, 8);
        last = json!({ "x": js(&x), "y": js(&y) });
        if let Some(w) = u.witness {
            let r = submajorize(&y, &x);
            return Trial::exact(r.margin, json!({ "x": js(&x), "y": js(&y), "witness": w }));
        }
    }
    Trial { hypothesis: false, ..Trial::exact(Q::zero(), last) }
}

pub(crate) fn submajor_preorder(rng: &mut TrialRng, caps: &Caps) -> Trial {
    let mut last = json!(null);
    for _ in 0..ATTEMPTS {
        let z = random_any(rng, caps.max_len);
        let reflexive = submajorize(&z, &z).margin;
        let (x, y) = if rng.gen_bool(0.8) {
            let p1 = Partition::new(random_nodes(rng, &z.horizon(), 8)).expect("sorted nodes");
            let x = expectation_fn(&z, &p1, Tail::Keep).scale(&q(rng.gen_range(8..=17), 16));
            let p2 = Partition::new(random_nodes(rng, &x.horizon(), 8)).expect("sorted nodes");
            let y = expectation_fn(&x, &p2, Tail::Keep).scale(&q(rng.gen_range(8..=17), 16));
            (x, y)
        } else {
            (random_step(rng, Profile::Generic, caps.max_len), random_step(rng, Profile::Generic, caps.max_len))
        };
        last = json!({ "x": js(&x), "y": js(&y), "z": js(&z) });
        if submajorize(&y, &x).verdict && submajorize(&x, &z).verdict {
            let margin = min_q(Some(reflexive), submajorize(&y, &z).margin);
            return Trial::exact(or_zero(margin), last);
        }
        if reflexive.is_negative() {
            return Trial::exact(reflexive, last);
        }
    }
    Trial { hypothesis: false, ..Trial::exact(Q::zero(), last) }
}

pub(crate) fn submajor_pointwise(rng: &mut TrialRng, caps: &Caps) -> Trial {
    let x = random_any(rng, caps.max_len);
    let cells: Vec<(Q, Q)> = x.cells().map(|(l, r, v)| (r - l, v * unit_factor(rng))).collect();
    let y = shuffle_cells(&StepFn::from_lengths(cells).expect("nonnegative values"), rng);
    Trial::exact(submajorize(&y, &x).margin, json!({ "x": js(&x), "y": js(&y) }))
}

pub(crate) fn submajor_scaling(rng: &mut TrialRng, caps: &Caps) -> Trial {
    let x = random_any(rng, caps.max_len);
    let y = random_step(rng, Profile::Generic, caps.max_len);
    let c = rand_q(rng, 1, 64, 8);
    let (r1, r2) = (submajorize(&y, &x), submajorize(&y.scale(&c), &x.scale(&c)));
    let ok = r1.verdict == r2.verdict && r2.margin == &c * &r1.margin;
    Trial::exact(flag(ok), json!({ "x": js(&x), "y": js(&y), "c": jq(&c) }))
}
