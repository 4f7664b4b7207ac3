//! Seeded random sparse series for property suites.

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::combinatorics::{MultiIndex, Word};
use crate::deformation::DefoSeries;
use crate::free_series::FreeSeries;
use crate::quantum_series::QSeries;
use crate::scalars::{ExactComplex, FloatComplex, Scalar};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A small Gaussian rational with numerators in `[-4, 4]` and denominators in `[1, 3]`.
pub fn exact_coeff<R: Rng>(rng: &mut R) -> ExactComplex {
    let mut part =
        || BigRational::new(BigInt::from(rng.random_range(-4i64..=4)), BigInt::from(rng.random_range(1i64..=3)));
    ExactComplex::new(part(), part())
}

pub fn float_coeff<R: Rng>(rng: &mut R) -> FloatComplex {
    FloatComplex::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

pub fn word<R: Rng>(rng: &mut R, n: usize, len: usize) -> Word {
    Word::new((0..len).map(|_| rng.random_range(1..=n as u8)).collect())
}

pub fn multi_index<R: Rng>(rng: &mut R, n: usize, degree: usize) -> MultiIndex {
    let mut e = vec![0u32; n];
    for _ in 0..degree {
        e[rng.random_range(0..n)] += 1;
    }
    MultiIndex::new(e)
}

/// Up to `terms` random words of length at most `max_deg`.
pub fn free_series<R: Rng, S: Scalar>(
    rng: &mut R,
    n: usize,
    max_deg: usize,
    terms: usize,
    cap: usize,
    mut coeff: impl FnMut(&mut R) -> S,
) -> FreeSeries<S> {
    let mut f = FreeSeries::zero(n, cap.max(max_deg));
    for _ in 0..terms {
        let d = rng.random_range(0..=max_deg);
        let w = word(rng, n, d);
        let c = coeff(rng);
        f.add_term(w, c).expect("word within cap");
    }
    f
}

pub fn q_series<R: Rng, S: Scalar>(
    rng: &mut R,
    n: usize,
    max_deg: usize,
    terms: usize,
    cap: usize,
    mut coeff: impl FnMut(&mut R) -> S,
) -> QSeries<S> {
    let mut f = QSeries::zero(n, cap.max(max_deg));
    for _ in 0..terms {
        let d = rng.random_range(0..=max_deg);
        let k = multi_index(rng, n, d);
        let c = coeff(rng);
        f.add_term(k, c).expect("multi-index within cap");
    }
    f
}

/// Random `sum c x^k z^p` with `|p| <= p_max`.
#[allow(clippy::too_many_arguments)]
pub fn defo_series<R: Rng, S: Scalar>(
    rng: &mut R,
    n: usize,
    max_deg: usize,
    p_max: i64,
    terms: usize,
    cap: usize,
    z_window: i64,
    mut coeff: impl FnMut(&mut R) -> S,
) -> DefoSeries<S> {
    let mut a = DefoSeries::zero(n, cap.max(max_deg), z_window.max(p_max));
    for _ in 0..terms {
        let d = rng.random_range(0..=max_deg);
        let k = multi_index(rng, n, d);
        let p = rng.random_range(-p_max..=p_max);
        let c = coeff(rng);
        a.add_term(k, p, c).expect("term within bounds");
    }
    a
}
