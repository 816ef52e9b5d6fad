#![allow(dead_code)]

use focusfocus::moduli::InvariantTupleMinimal;
use focusfocus::powerseries::multi_indices;
use focusfocus::{ActionSeries, PiRational, TransitionSeries, TruncatedSeries};
use num_rational::BigRational;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
pub use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

pub fn small_rational<R: Rng>(rng: &mut R) -> BigRational {
    let n = rng.gen_range(-3..=3);
    let d = [1, 2, 3, 4][rng.gen_range(0..4)];
    q(n, d)
}

/// Sparse random element of the transition group with a simple linear part.
pub fn random_transition<R: Rng>(rng: &mut R, order: u32) -> TransitionSeries {
    let mut s = TruncatedSeries::zero(order);
    let gy = [q(1, 1), q(2, 1), q(1, 2), q(3, 2)][rng.gen_range(0..4)].clone();
    s.set_coeff(0, 1, PiRational::rational(gy)).unwrap();
    for (i, j) in multi_indices(order) {
        if (i, j) != (0, 1) && rng.gen_bool(0.4) {
            s.set_coeff(i, j, PiRational::rational(small_rational(rng))).unwrap();
        }
    }
    TransitionSeries::new(s).unwrap()
}

/// Random action series, with π-parts on the X-coefficient and occasionally elsewhere.
pub fn random_action<R: Rng>(rng: &mut R, order: u32) -> ActionSeries {
    let mut s = TruncatedSeries::zero(order);
    for (i, j) in multi_indices(order) {
        if (i, j) == (1, 0) || rng.gen_bool(0.5) {
            let b = if (i, j) == (1, 0) || rng.gen_bool(0.15) {
                q(rng.gen_range(-3..=3), 2)
            } else {
                q(0, 1)
            };
            s.set_coeff(i, j, PiRational::new(small_rational(rng), b)).unwrap();
        }
    }
    ActionSeries::new(s)
}

pub fn random_minimal<R: Rng>(rng: &mut R, k: usize, order: u32) -> InvariantTupleMinimal {
    let s0 = random_action(rng, order);
    let g = (0..k - 1).map(|_| random_transition(rng, order)).collect();
    InvariantTupleMinimal::new(k, s0, g).unwrap()
}

pub fn series(order: u32, terms: &[((u32, u32), (i64, i64))]) -> TruncatedSeries {
    TruncatedSeries::from_rationals(order, terms).unwrap()
}

pub fn transition(order: u32, terms: &[((u32, u32), (i64, i64))]) -> TransitionSeries {
    TransitionSeries::new(series(order, terms)).unwrap()
}
