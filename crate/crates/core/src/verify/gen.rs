//! Seeded random instances for the lemma suite.

use std::fmt;
use std::str::FromStr;

use num_traits::{One, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::averaging::{Kappa, KappaSeq};
use crate::error::{Error, Result};
use crate::norms::{NormSpec, Psi};
use crate::rational::{int, powi, q, Q};
use crate::step::{SignedStep, StepFn};

/// Shapes of random step functions, each aimed at a different family of hypotheses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Profile {
    /// Unsorted cells with small rational lengths and values.
    Generic,
    /// Nonincreasing, with `X(2t) ≤ 1.2·X(t)` at every breakpoint `t ≥ b_1`.
    SlowGrowth,
    /// Nonincreasing and summable, with at least 90% of the mass in the first cell.
    HeavyHead,
    /// A short nonincreasing head followed by one long low plateau.
    FlatTail,
}

impl Profile {
    pub const ALL: [Profile; 4] = [Profile::Generic, Profile::SlowGrowth, Profile::HeavyHead, Profile::FlatTail];
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Profile::Generic => "generic",
            Profile::SlowGrowth => "slow-growth",
            Profile::HeavyHead => "heavy-head",
            Profile::FlatTail => "flat-tail",
        })
    }
}

impl FromStr for Profile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Profile::ALL
            .into_iter()
            .find(|p| p.to_string() == s)
            .ok_or_else(|| Error::Parse(format!("unknown profile `{s}`")))
    }
}

/// Default cap on the number of cells.
pub const DEFAULT_MAX_LEN: usize = 64;

/// A reproducible step function for `seed` and `profile`.
pub fn gen_stepfn(seed: u64, profile: Profile) -> StepFn {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_step(&mut rng, profile, DEFAULT_MAX_LEN)
}

/// `n/d` with `n ∈ [lo_n, hi_n]`, `d ∈ [1, den]`.
pub(crate) fn rand_q<R: Rng>(rng: &mut R, lo_n: i64, hi_n: i64, den: i64) -> Q {
    q(rng.gen_range(lo_n..=hi_n), rng.gen_range(1..=den))
}

/// Strictly positive length in `(0, 2]`.
fn rand_len<R: Rng>(rng: &mut R) -> Q {
    rand_q(rng, 1, 8, 4)
}

pub fn random_step<R: Rng>(rng: &mut R, profile: Profile, max_len: usize) -> StepFn {
    let max_len = max_len.max(2);
    match profile {
        Profile::Generic => {
            let n = rng.gen_range(1..=max_len);
            let cells: Vec<(Q, Q)> = (0..n).map(|_| (rand_len(rng), rand_q(rng, 0, 32, 4))).collect();
            nonzero(StepFn::from_lengths(cells).expect("nonnegative values"), rng)
        }
        Profile::SlowGrowth => slow_growth(rng, max_len),
        Profile::HeavyHead => heavy_head(rng, max_len),
        Profile::FlatTail => flat_tail(rng, max_len),
    }
}

/// A nonincreasing instance from a randomly chosen profile.
pub fn random_mu<R: Rng>(rng: &mut R, max_len: usize) -> StepFn {
    let p = *Profile::ALL.choose(rng).expect("nonempty");
    random_step(rng, p, max_len).rearrange()
}

/// A nonincreasing instance whose horizon stays small enough for unit-cell operations.
pub fn random_mu_bounded<R: Rng>(rng: &mut R, max_len: usize) -> StepFn {
    let p = *[Profile::Generic, Profile::HeavyHead].choose(rng).expect("nonempty");
    random_step(rng, p, max_len).rearrange()
}

fn nonzero<R: Rng>(x: StepFn, rng: &mut R) -> StepFn {
    if x.total().is_zero() {
        StepFn::indicator(rand_len(rng), rand_q(rng, 1, 8, 2))
    } else {
        x
    }
}

fn slow_growth<R: Rng>(rng: &mut R, max_len: usize) -> StepFn {
    let n = rng.gen_range(2..=max_len);
    let b1 = q(rng.gen_range(1..=8), 4);
    let v1 = rand_q(rng, 4, 32, 4);
    let grain = q(1, 1024);
    let mut cells = vec![(b1.clone(), v1.clone())];
    let mut x_total = &b1 * &v1;
    let mut prev_mass = x_total.clone();
    let mut t = b1.clone();
    for _ in 1..n {
        // the next cell has the length of everything before it, so it ends at 2t
        let r = q(rng.gen_range(2..=20), 100);
        let raw = (&r * &x_total / &grain).floor() * &grain;
        let mass = crate::rational::min_q(&raw, &(&prev_mass * int(2))).clone();
        let len = t.clone();
        cells.push((len.clone(), &mass / &len));
        x_total += &mass;
        prev_mass = mass;
        t *= int(2);
    }
    StepFn::from_lengths(cells).expect("nonnegative values")
}

fn heavy_head<R: Rng>(rng: &mut R, max_len: usize) -> StepFn {
    let head_len = rand_len(rng);
    let head_val = rand_q(rng, 8, 64, 2);
    let head_mass = &head_len * &head_val;
    let k = rng.gen_range(0..max_len);
    let mut tail: Vec<(Q, Q)> = (0..k).map(|_| (rand_len(rng), rand_q(rng, 1, 16, 1))).collect();
    tail.sort_by(|a, b| b.1.cmp(&a.1));
    let mut cells = vec![(head_len, head_val.clone())];
    if let Some((_, top)) = tail.first() {
        let raw_mass: Q = tail.iter().map(|(l, v)| l * v).sum();
        let frac = q(rng.gen_range(1..=8), 8);
        let by_mass = &head_mass * frac / int(9) / raw_mass;
        let by_value = &head_val / top;
        let s = crate::rational::min_q(&by_mass, &by_value).clone();
        cells.extend(tail.into_iter().map(|(l, v)| (l, v * &s)));
    }
    StepFn::from_lengths(cells).expect("nonnegative values")
}

fn flat_tail<R: Rng>(rng: &mut R, max_len: usize) -> StepFn {
    let k = rng.gen_range(1..=4.min(max_len - 1));
    let mut head: Vec<(Q, Q)> = (0..k).map(|_| (rand_len(rng), rand_q(rng, 4, 32, 4))).collect();
    head.sort_by(|a, b| b.1.cmp(&a.1));
    let floor = head.last().expect("k >= 1").1.clone();
    let level = floor * q(rng.gen_range(1..=9), 100);
    let len = int(10).pow(rng.gen_range(2..=6)) * rand_q(rng, 1, 9, 1);
    head.push((len, level));
    StepFn::from_lengths(head).expect("nonnegative values")
}

/// The cells of `x` in a random order.
pub fn shuffle_cells<R: Rng>(x: &StepFn, rng: &mut R) -> StepFn {
    let mut cells: Vec<(Q, Q)> = x.cells().map(|(l, r, v)| (r - l, v.clone())).collect();
    cells.shuffle(rng);
    StepFn::from_lengths(cells).expect("nonnegative values")
}

/// Random partition nodes: some inside `(0, T]`, some possibly beyond.
pub fn random_nodes<R: Rng>(rng: &mut R, horizon: &Q, max: usize) -> Vec<Q> {
    let k = rng.gen_range(0..=max);
    let mut nodes: Vec<Q> = (0..k)
        .map(|_| {
            let frac = rand_q(rng, 1, 24, 16);
            horizon * frac
        })
        .filter(|t| *t > Q::zero())
        .collect();
    nodes.sort();
    nodes.dedup();
    nodes
}

/// An explicit `μ(x)` with prescribed level structure: `X(a_j) = (3/2)^j θ` at
/// `a_{j+1} = ρ_j a_j` for `j0 ≤ j < j1`, `X` linear in between and on `(0, a_{j0}]`.
/// Every `ρ_j ≥ 5/2`, which keeps the values nonincreasing.
pub struct LevelStructure {
    pub x: StepFn,
    pub theta: Q,
    pub j0: i64,
    /// `a_{j0}, a_{j0+1}, …, a_{j1}`.
    pub a: Vec<Q>,
}

pub fn level_structure(theta: &Q, j0: i64, a0: Q, ratios: &[Q]) -> LevelStructure {
    let three_halves = q(3, 2);
    let mut a = vec![a0];
    for r in ratios {
        assert!(*r >= q(5, 2), "ratios below 5/2 break monotonicity");
        let next = a.last().expect("nonempty") * r;
        a.push(next);
    }
    let mut bps = Vec::with_capacity(a.len());
    let mut vals = Vec::with_capacity(a.len());
    let first_level = powi(&three_halves, j0) * theta;
    bps.push(a[0].clone());
    vals.push(&first_level / &a[0]);
    for (j, w) in a.windows(2).enumerate() {
        let level = powi(&three_halves, j0 + j as i64) * theta;
        bps.push(w[1].clone());
        vals.push(level / int(2) / (&w[1] - &w[0]));
    }
    let x = StepFn::new(bps, vals).expect("valid level structure");
    debug_assert!(x.is_nonincreasing());
    LevelStructure { x, theta: theta.clone(), j0, a }
}

/// A fast ratio in `[5/2, 4]`.
pub fn fast_ratio<R: Rng>(rng: &mut R) -> Q {
    q(rng.gen_range(5..=8), 2)
}

/// A ratio strictly above `k²`, up to about `4k²`, and never below `5/2`.
pub fn slow_ratio<R: Rng>(rng: &mut R, k: u64) -> Q {
    let r = int((k * k) as i64) * (Q::one() + q(rng.gen_range(1..=24), 8));
    if r < q(5, 2) {
        q(5, 2) + rand_q(rng, 0, 8, 8)
    } else {
        r
    }
}

pub fn random_theta<R: Rng>(rng: &mut R) -> Q {
    [int(1), q(3, 2), q(9, 4), int(2), q(5, 3), q(2, 3)].choose(rng).expect("nonempty").clone()
}

/// Log-uniform integer in `[lo, hi]`.
pub fn log_uniform<R: Rng>(rng: &mut R, lo: u64, hi: u64) -> u64 {
    let (l, h) = ((lo.max(1) as f64).ln(), (hi.max(lo).max(1) as f64).ln());
    let v = (rng.gen_range(l..=h)).exp().round() as u64;
    v.clamp(lo.max(1), hi.max(lo))
}

/// Kappa entries on a window, mixing small, large and infinite values.
pub fn random_kappa<R: Rng>(rng: &mut R, n_lo: i64, len: usize, big: u64) -> KappaSeq {
    let entries = (0..len)
        .map(|_| match rng.gen_range(0..8) {
            0 => Kappa::Infinite,
            1..=4 => Kappa::Finite(log_uniform(rng, big, 3 * big)),
            _ => Kappa::Finite(log_uniform(rng, 1, big.saturating_sub(1).max(1))),
        })
        .collect();
    KappaSeq::new(n_lo, entries).expect("entries are positive")
}

/// Level ratios matched to `kappa`: at `j = 3n` the ratio is usually slow enough for the
/// node `κ_n a_{3n}` to exist; everywhere else it is fast.
pub fn ratios_for_kappa<R: Rng>(rng: &mut R, kappa: &KappaSeq, extra_top: usize) -> (i64, Vec<Q>) {
    let range = kappa.indices();
    let j0 = 3 * range.start;
    let j1 = 3 * (range.end - 1) + 1 + extra_top as i64;
    let ratios = (j0..j1)
        .map(|j| {
            let n = j.div_euclid(3);
            match (j.rem_euclid(3), kappa.get(n)) {
                (0, Kappa::Finite(k)) if rng.gen_bool(0.75) => slow_ratio(rng, k),
                (0, _) if rng.gen_bool(0.3) => {
                    let k = log_uniform(rng, 2, 60);
                    slow_ratio(rng, k)
                }
                _ => fast_ratio(rng),
            }
        })
        .collect();
    (j0, ratios)
}

/// A norm chosen from the families the library supports.
pub fn random_spec<R: Rng>(rng: &mut R) -> NormSpec {
    let base = |rng: &mut R| -> NormSpec {
        let psi = |rng: &mut R| -> Psi {
            match rng.gen_range(0..3) {
                0 => Psi::Log1p,
                1 => Psi::Power(*[0.25, 0.5, 0.75].choose(rng).expect("nonempty")),
                _ => Psi::Identity,
            }
        };
        match rng.gen_range(0..6) {
            0 => NormSpec::Sup,
            1 => NormSpec::L1,
            2 => NormSpec::Lp(*[1.5, 2.0, 3.0].choose(rng).expect("nonempty")),
            3 => NormSpec::Marcinkiewicz(psi(rng)),
            _ => NormSpec::Lorentz(psi(rng)),
        }
    };
    if rng.gen_bool(0.15) {
        NormSpec::FNorm(Box::new(base(rng)))
    } else {
        base(rng)
    }
}

/// Nonnegative rational in `[0, 1]`.
pub fn unit_factor<R: Rng>(rng: &mut R) -> Q {
    q(rng.gen_range(0..=16), 16)
}

/// A signed difference of two nonincreasing instances.
pub fn random_difference<R: Rng>(rng: &mut R, max_len: usize) -> (StepFn, StepFn, SignedStep) {
    let a = random_mu_bounded(rng, max_len);
    let b = random_mu_bounded(rng, max_len);
    let d = a.as_signed().sub(b.as_signed());
    (a, b, d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::averaging::a_nodes;

    #[test]
    fn deterministic() {
        for p in Profile::ALL {
            assert_eq!(gen_stepfn(1, p), gen_stepfn(1, p));
        }
        assert_ne!(gen_stepfn(1, Profile::Generic), gen_stepfn(2, Profile::Generic));
    }

    #[test]
    fn slow_growth_doubling_ratio() {
        for seed in 0..40 {
            let x = gen_stepfn(seed, Profile::SlowGrowth);
            assert!(x.is_nonincreasing());
            let b1 = x.breakpoints()[0].clone();
            for t in x.breakpoints().iter().filter(|t| **t >= b1) {
                let ratio = x.partial_sum(&(t * int(2))) / x.partial_sum(t);
                assert!(ratio <= q(6, 5), "seed {seed}");
            }
        }
    }

    #[test]
    fn heavy_head_mass() {
        for seed in 0..40 {
            let x = gen_stepfn(seed, Profile::HeavyHead);
            assert!(x.is_nonincreasing());
            let head = &x.cumulative()[0];
            assert!(head * int(10) >= x.total() * int(9), "seed {seed}");
        }
    }

    #[test]
    fn flat_tail_shape() {
        for seed in 0..40 {
            let x = gen_stepfn(seed, Profile::FlatTail);
            assert!(x.is_nonincreasing());
            assert!(x.horizon() >= int(100));
        }
    }

    #[test]
    fn level_structure_nodes() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let theta = random_theta(&mut rng);
            let (lo, len) = (rng.gen_range(-2..=2), rng.gen_range(1..=4));
            let kappa = random_kappa(&mut rng, lo, len, 200);
            let (j0, ratios) = ratios_for_kappa(&mut rng, &kappa, 1);
            let ls = level_structure(&theta, j0, rand_len(&mut rng), &ratios);
            assert!(ls.x.is_nonincreasing());
            let nodes = a_nodes(&ls.x, &theta, j0).unwrap();
            for (i, a) in ls.a.iter().enumerate() {
                assert_eq!(nodes.get(j0 + i as i64), Some(a));
            }
        }
    }
}
