//! The worked examples for each operation, run through the public API.

use std::collections::BTreeMap;

use symfun_core::averaging::{
    a_nodes, build_a_m, build_b, expectation_fn, hardy, kappa_truncate, m_avg, Kappa, KappaSeq, Partition, Tail,
};
use symfun_core::linalg::{gram_singular_values, op_direct_sum, random_matrix, singular_values, Matrix};
use symfun_core::majorization::{submajorize_seq, uniform_submajorize, Violation};
use symfun_core::norms::{norm, norm_seq, psi_ratio_profile, NormSpec, Psi};
use symfun_core::rational::{int, q};
use symfun_core::traces::{
    criterion, dixmier_bracket, fk_diagnostic, p_estimate, pi_estimate, Element, FkVerdict, Generator, PInput,
};
use symfun_core::{RSeq, Seq, SignedStep, StepFn, Q};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn rseq(v: &[Q]) -> RSeq {
    RSeq::new(v.to_vec()).unwrap()
}

fn ints(v: &[i64]) -> Vec<Q> {
    v.iter().map(|&k| int(k)).collect()
}

fn step(bps: &[Q], vals: &[Q]) -> StepFn {
    StepFn::new(bps.to_vec(), vals.to_vec()).unwrap()
}

fn chi(t: i64) -> StepFn {
    StepFn::indicator(int(t), int(1))
}

#[test]
fn rearrange() {
    assert_eq!(Seq::new(ints(&[1, 3, 2])).unwrap().rearrange(), rseq(&ints(&[3, 2, 1])));
    assert_eq!(Seq::new(ints(&[0, 0])).unwrap().rearrange(), rseq(&ints(&[0, 0])));
    let x = step(&ints(&[1, 2]), &ints(&[1, 3]));
    assert_eq!(x.rearrange(), step(&ints(&[1, 2]), &ints(&[3, 1])));
}

#[test]
fn partial_sum() {
    assert_eq!(chi(1).partial_sum(&int(3)), int(1));
    assert!(chi(1).partial_sum_flagged(&int(3)).truncated);
    let x = rseq(&[int(1), q(1, 2), q(1, 3)]);
    assert_eq!(x.partial_sum(&int(2)).value, q(3, 2));
    let x = rseq(&[int(1), q(1, 2)]);
    assert_eq!(x.partial_sum(&q(3, 2)).value, q(5, 4));
}

#[test]
fn dilate() {
    let x = rseq(&[int(1), q(1, 2)]);
    assert_eq!(x.dilate(2), rseq(&[int(1), int(1), q(1, 2), q(1, 2)]));
    assert_eq!(x.dilate(1), x);
    assert_eq!(chi(1).dilate(3), chi(3));
}

#[test]
fn sigma_half() {
    assert_eq!(Seq::new(ints(&[4, 2, 2, 0])).unwrap().sigma_half(), Seq::new(ints(&[3, 1])).unwrap());
    assert_eq!(Seq::new(vec![q(7, 3); 2]).unwrap().sigma_half(), Seq::new(vec![q(7, 3)]).unwrap());
    assert_eq!(Seq::new(ints(&[1, 0, 0, 0])).unwrap().sigma_half(), Seq::new(vec![q(1, 2), int(0)]).unwrap());
}

#[test]
fn head_truncate() {
    assert_eq!(chi(2).head_truncate(&int(1)), chi(1));
    let x = step(&ints(&[1, 3]), &[int(2), q(1, 2)]);
    assert_eq!(x.head_truncate(&x.horizon()), x);
    assert_eq!(rseq(&ints(&[1, 1, 1])).head_truncate(&int(2)), rseq(&ints(&[1, 1, 0])));
}

#[test]
fn direct_sum() {
    assert_eq!(rseq(&ints(&[1])).direct_sum(&rseq(&ints(&[2]))), rseq(&ints(&[2, 1])));
    let x = rseq(&ints(&[5, 2, 2]));
    assert_eq!(x.direct_sum(&rseq(&[])), x);
    let ones = rseq(&ints(&[1, 1]));
    assert_eq!(ones.direct_sum(&ones), ones.dilate(2));
}

#[test]
fn norms() {
    let x = rseq(&[int(1), q(1, 2), q(1, 3), q(1, 4)]);
    let v = norm_seq(&x, &NormSpec::Marcinkiewicz(Psi::Log1p)).unwrap().value;
    assert!((v - 1.0 / 2f64.ln()).abs() < 1e-12);
    assert!((v - 1.442695).abs() < 1e-6);
    assert_eq!(norm(&chi(1), &NormSpec::Sup).unwrap().exact, Some(int(1)));
    let f = norm(&chi(1), &"f:sup".parse().unwrap()).unwrap();
    assert_eq!(f.exact, Some(int(2)));
}

#[test]
fn psi_ratio_profiles() {
    let p = psi_ratio_profile(&Psi::Power(0.5), 1.0, 1e6, 20).unwrap();
    assert!(p.points.iter().all(|(_, r)| (r - 2f64.sqrt()).abs() < 1e-12));
    let p = psi_ratio_profile(&Psi::Identity, 1.0, 1e6, 20).unwrap();
    assert!(p.points.iter().all(|(_, r)| *r == 2.0));
    let p = psi_ratio_profile(&Psi::Log1p, 1e6, 1e7, 2).unwrap();
    assert!((p.points[0].0 - 1e6).abs() < 1e-6);
    assert!((p.points[0].1 - 1.05018).abs() < 1e-5);
}

#[test]
fn submajorization() {
    let r = submajorize_seq(&rseq(&ints(&[2, 1])), &rseq(&ints(&[3, 0])));
    assert!(r.verdict);
    assert_eq!(r.margin, int(0));
    let r = submajorize_seq(&rseq(&ints(&[3, 0])), &rseq(&ints(&[2, 2])));
    assert!(!r.verdict);
    assert_eq!(r.first_violation, Some(Violation::At(int(1))));
}

#[test]
fn pair_average_is_submajorized() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..200 {
        let len = rand::Rng::gen_range(&mut rng, 1..=12);
        let v: Vec<Q> = (0..len).map(|_| q(rand::Rng::gen_range(&mut rng, 0..=40), 7)).collect();
        let x = Seq::new(v).unwrap();
        let y = x.sigma_half().rearrange().dilate(2);
        assert!(submajorize_seq(&y, &x.rearrange()).verdict);
    }
}

#[test]
fn uniform_submajorization() {
    let r = uniform_submajorize(&rseq(&ints(&[1, 1])), &rseq(&ints(&[2, 0])), 8);
    assert_eq!(r.witness, Some(2));
    let x = rseq(&ints(&[4, 2, 1]));
    assert_eq!(uniform_submajorize(&x, &x, 8).witness, Some(1));
    let r = uniform_submajorize(&rseq(&ints(&[1, 1, 1])), &rseq(&ints(&[1, 1, 0])), 64);
    assert_eq!(r.witness, None);
}

#[test]
fn conditional_expectation() {
    let x = StepFn::indicator(int(1), int(2));
    assert_eq!(expectation_fn(&x, &Partition::new(vec![int(2)]).unwrap(), Tail::Keep), chi(2));
    let c = StepFn::indicator(int(6), q(5, 3));
    let part = Partition::new(vec![q(1, 2), int(3), q(11, 2)]).unwrap();
    assert_eq!(expectation_fn(&c, &part, Tail::Keep), c);
    let x = step(&ints(&[1, 2, 3, 4]), &ints(&[4, 2, 0, 0]));
    let part = Partition::new(ints(&[2, 4])).unwrap();
    assert_eq!(expectation_fn(&x, &part, Tail::Keep), step(&ints(&[2, 4]), &ints(&[3, 0])));
}

#[test]
fn hardy_operator() {
    let c = hardy(chi(1).as_signed());
    assert_eq!(c.value_exact(&q(1, 2)).unwrap(), Some(int(1)));
    assert_eq!(c.value_exact(&int(4)).unwrap(), Some(q(1, 4)));
    let c = hardy(&SignedStep::zero());
    assert_eq!(c.value_exact(&int(3)).unwrap(), Some(int(0)));

    let x = SignedStep::new(ints(&[1, 2]), ints(&[1, -1])).unwrap();
    let c = hardy(&x);
    assert_eq!(c.value_exact(&q(1, 3)).unwrap(), Some(int(1)));
    for t in [q(5, 4), q(3, 2), int(2)] {
        let want = (int(2) - &t) / &t;
        assert_eq!(c.value_exact(&t).unwrap(), Some(want));
    }
    assert_eq!(c.value_exact(&int(5)).unwrap(), Some(int(0)));
}

#[test]
fn log_mean() {
    let ln2 = 2f64.ln();
    let m = m_avg(chi(1).as_signed(), 2).unwrap();
    assert!((m.value(&int(1)).unwrap() - 0.5 / ln2).abs() < 1e-12);
    assert!((m.value(&int(1)).unwrap() - 0.721348).abs() < 1e-6);
    let z = m_avg(&SignedStep::zero(), 2).unwrap();
    assert_eq!(z.value(&int(3)).unwrap(), 0.0);
    // ∫_1^2 (1 − t/2)/(t ln 2) dt, which the log-kernel formula also gives: (ln 2 − 1/2)/ln 2.
    let area = m.integral(&int(1), &int(2));
    assert!((area - (ln2 - 0.5) / ln2).abs() < 1e-12, "{area}");
    assert!((area - 0.278652).abs() < 1e-6);
}

fn node_map(pairs: &[(i64, Q)]) -> BTreeMap<i64, Q> {
    pairs.iter().cloned().collect()
}

#[test]
fn level_nodes() {
    let a = a_nodes(&chi(4), &int(1), 0).unwrap();
    assert_eq!(a.nodes, node_map(&[(0, int(1)), (1, q(3, 2)), (2, q(9, 4)), (3, q(27, 8))]));
    assert!(a_nodes(&chi(4), &int(5), 0).unwrap().nodes.is_empty());
    let x = step(&ints(&[1, 3]), &[int(1), q(1, 2)]);
    assert_eq!(a_nodes(&x, &int(1), 0).unwrap().nodes, node_map(&[(0, int(1)), (1, int(2))]));
}

#[test]
fn b_partition() {
    let x = chi(1000);
    let two = KappaSeq::constant(0, 4, 2);
    assert!(build_b(&x, &two, &int(1)).unwrap().partition.is_empty());
    let inf = KappaSeq::new(0, vec![Kappa::Infinite; 4]).unwrap();
    assert!(build_b(&x, &inf, &int(1)).unwrap().partition.is_empty());

    // X reaches θ = 1 at t = 1, then creeps up with slope 1/100, so a_1 = 51 ≥ 9 a_0.
    let x = step(&ints(&[1, 100]), &[int(1), q(1, 100)]);
    let a = a_nodes(&x, &int(1), 0).unwrap();
    assert_eq!((a.get(0), a.get(1)), (Some(&int(1)), Some(&int(51))));
    let c = build_b(&x, &KappaSeq::constant(0, 1, 2), &int(1)).unwrap();
    assert_eq!(c.partition.nodes(), &[int(2)]);
}

#[test]
fn a_m_partition() {
    let x = chi(1000);
    assert!(build_a_m(&x, 2, 0).unwrap().partition.is_empty());
    let a = a_nodes(&x, &int(1), 0).unwrap();
    let all_but_last: Vec<Q> = a.nodes.values().take(a.nodes.len() - 1).cloned().collect();
    assert_eq!(build_a_m(&x, 1, 0).unwrap().partition.nodes(), all_but_last.as_slice());

    // X ≈ log-like growth: one unit of mass, then a long thin tail.
    let slow = step(&ints(&[1, 1000]), &[int(1), q(1, 1000)]);
    let a = a_nodes(&slow, &int(1), 0).unwrap();
    assert!(a.get(1).unwrap() > &(int(4) * a.get(0).unwrap()));
    let c = build_a_m(&slow, 2, 0).unwrap();
    assert_eq!(c.partition.nodes().first(), Some(&int(2)));
}

#[test]
fn kappa_truncation() {
    let k = KappaSeq::new(0, vec![Kappa::Finite(2), Kappa::Finite(5), Kappa::Finite(9)]).unwrap();
    let t = kappa_truncate(&k, &int(4)).unwrap();
    assert_eq!(t.entries, vec![Kappa::Infinite, Kappa::Finite(5), Kappa::Finite(9)]);
    assert_eq!(kappa_truncate(&k, &int(2)).unwrap(), k);
    assert_eq!(kappa_truncate(&k, &q(19, 2)).unwrap().entries, vec![Kappa::Infinite; 3]);
}

fn marc_log() -> NormSpec {
    NormSpec::Marcinkiewicz(Psi::Log1p)
}

#[test]
fn pi_examples() {
    // Cut at n = 10^4 the harmonic element is still far from its limit at m = 2^10:
    // the supremum sits at the horizon, H_n / ln(1 + m n).
    let n = 10_000u32;
    let h: f64 = (1..=n).map(|k| 1.0 / f64::from(k)).sum();
    let m = 1024.0f64;
    let cut = Element::Generated { gen: Generator::Harmonic, horizon: f64::from(n) };
    let v = pi_estimate(&cut, &marc_log(), &[1 << 10]).unwrap().series[0].1;
    assert!((v - h / (m * f64::from(n)).ln_1p()).abs() < 1e-9, "{v}");
    let far = Element::Generated { gen: Generator::Harmonic, horizon: 1e300 };
    let v = pi_estimate(&far, &marc_log(), &[1 << 10]).unwrap().series[0].1;
    assert!((0.95..=1.0).contains(&v), "{v}");

    let one = Element::Step(chi(1));
    let b = pi_estimate(&one, &marc_log(), &[1 << 4, 1 << 7, 1 << 10]).unwrap();
    assert!(b.series.windows(2).all(|w| w[1].1 < w[0].1));
    assert!((b.last().unwrap() - 1.0 / m.ln_1p()).abs() < 1e-12);

    let d = Element::Generated { gen: Generator::PsiIncrements(Psi::Power(0.5)), horizon: 1e300 };
    let b = pi_estimate(&d, &NormSpec::Marcinkiewicz(Psi::Power(0.5)), &[1 << 4, 1 << 8]).unwrap();
    assert!((b.series[0].1 - 0.25).abs() < 1e-9 && (b.series[1].1 - 1.0 / 16.0).abs() < 1e-9);
}

#[test]
fn p_examples() {
    let m = [1u64 << 10];
    let h = Generator::Harmonic;
    let p = p_estimate(&PInput::Generated { gen: h.clone(), horizon: 1e300 }, &marc_log(), &m).unwrap().series[0].1;
    let pi = pi_estimate(&Element::Generated { gen: h, horizon: 1e300 }, &marc_log(), &m).unwrap().series[0].1;
    assert!((p - pi).abs() <= 0.05 * pi, "p = {p}, pi = {pi}");

    // A finite head only satisfies p ≥ π at this m; the two meet in the limit.
    let x = Generator::Harmonic.materialize(4096).unwrap();
    let p = p_estimate(&PInput::difference(&x, &StepFn::zero()), &marc_log(), &m).unwrap().series[0].1;
    let pi = pi_estimate(&Element::Step(x), &marc_log(), &m).unwrap().series[0].1;
    assert!(p >= pi, "p = {p}, pi = {pi}");

    let zero = p_estimate(&PInput::Finite(SignedStep::zero()), &marc_log(), &[2, 16, 128]).unwrap();
    assert!(zero.series.iter().all(|s| s.1 == 0.0));
}

#[test]
fn dixmier_examples() {
    let b = dixmier_bracket(&Generator::Harmonic, &Psi::Log1p, &[1e5]).unwrap();
    assert!((b.series[0].1 - 1.0501).abs() <= 5e-4);
    let sched: Vec<f64> = (2..=9).map(|j| 10f64.powi(j)).collect();
    let b = dixmier_bracket(&Generator::Geometric(0.5), &Psi::Log1p, &sched).unwrap();
    assert!(b.last().unwrap() < 0.05);
    let ones = Generator::table(vec![1.0; 100]).unwrap();
    let b = dixmier_bracket(&ones, &Psi::Identity, &[10.0, 100.0, 1000.0]).unwrap();
    assert_eq!(b.series.iter().map(|p| p.1).collect::<Vec<_>>(), vec![1.0, 1.0, 0.1]);
}

#[test]
fn criterion_examples() {
    let r = criterion(&Psi::Log1p, 1e6, 0.02).unwrap();
    assert!(r.admits_traces);
    assert!((r.min_ratio - 1.05018).abs() < 1e-5);
    let r = criterion(&Psi::Power(0.5), 1e6, 0.02).unwrap();
    assert!(!r.admits_traces && (r.min_ratio - 2f64.sqrt()).abs() < 1e-12);
    let r = criterion(&Psi::Identity, 1e6, 0.02).unwrap();
    assert!(!r.admits_traces && r.min_ratio == 2.0);
}

#[test]
fn fk_examples() {
    let sched: Vec<f64> = (0..=4).map(|j| 10f64.powi(j)).collect();
    let a = step(&ints(&[1, 3]), &[int(2), q(1, 2)]);
    let r = fk_diagnostic(&a, &a, &marc_log(), &sched, false).unwrap();
    assert!(r.series.iter().all(|s| s.1 == 0.0));
    assert_eq!(r.verdict, FkVerdict::LikelyInZ);

    let half = StepFn::indicator(int(2), q(1, 2));
    let r = fk_diagnostic(&chi(1), &half, &NormSpec::L1, &sched, false).unwrap();
    assert_eq!(r.verdict, FkVerdict::LikelyInZ);
    // Cx = 1/2 on (0,1], (2 − t)/(2t) on (1,2], 0 after: ‖Cx‖_1 = 1/2 + ln 2 − 1/2.
    assert!((r.series.last().unwrap().1 - 2f64.ln()).abs() < 1e-9);

    let r = fk_diagnostic(&chi(1), &StepFn::zero(), &NormSpec::L1, &sched, false).unwrap();
    assert_eq!(r.verdict, FkVerdict::Diverges);
    for (n, v) in &r.series {
        let want = 1.0 + n.ln();
        assert!((v - want).abs() <= 0.01 * want, "n = {n}: {v} vs {want}");
    }
}

#[test]
fn singular_value_examples() {
    assert_eq!(singular_values(&Matrix::diag(&[3.0, -4.0])), vec![4.0, 3.0]);
    let shift = Matrix::from_rows(vec![vec![0.0, 1.0], vec![0.0, 0.0]]).unwrap();
    assert_eq!(singular_values(&shift), vec![1.0, 0.0]);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..20 {
        let a = random_matrix(8, &mut rng);
        let (sv, gram) = (singular_values(&a), gram_singular_values(&a));
        for (s, g) in sv.iter().zip(&gram) {
            assert!((s - g).abs() <= 1e-10 * sv[0], "{s} vs {g}");
        }
    }
}

#[test]
fn operator_direct_sum() {
    let one = op_direct_sum(&Matrix::diag(&[1.0]), 3).unwrap();
    assert_eq!(singular_values(&one), vec![1.0; 3]);
    let a = Matrix::from_rows(vec![vec![1.0, 2.0], vec![-3.0, 0.5]]).unwrap();
    assert_eq!(op_direct_sum(&a, 1).unwrap(), a);
    let b = op_direct_sum(&Matrix::diag(&[2.0, 1.0]), 2).unwrap();
    assert_eq!(singular_values(&b), vec![2.0, 2.0, 1.0, 1.0]);
}
