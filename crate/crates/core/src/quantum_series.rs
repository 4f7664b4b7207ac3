//! The commutative-monomial model of the quantum polydisk and ball algebras.
//!
//! An element is a finite sum `sum c_k x^k` of normally ordered monomials.
//! Multiplication follows `x_i x_j = q x_j x_i` for `i < j`, which on
//! monomials reads `x^k x^l = q^{-sigma(l,k)} x^{k+l}`.

use std::collections::{BTreeMap, HashMap};

use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::combinatorics::{delta, enumerate_preimage, MultiIndex, Preimages};
use crate::error::{Error, Result};
use crate::free_series::FreeSeries;
use crate::scalars::{FloatComplex, Scalar};

/// The deformation parameter together with the alphabet size.
#[derive(Clone, Debug, PartialEq)]
pub struct QContext<S> {
    n: usize,
    q: S,
    abs_q_sq: f64,
    abs_q_sq_exact: Option<BigRational>,
}

impl<S: Scalar> QContext<S> {
    pub fn new(n: usize, q: S) -> Result<Self> {
        if q.is_zero() {
            return Err(Error::DegenerateQ("q must be nonzero".into()));
        }
        if !q.is_finite() {
            return Err(Error::param("q must be finite"));
        }
        Ok(QContext { n, abs_q_sq: q.abs_sq_f64(), abs_q_sq_exact: q.abs_sq_exact(), q })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn q(&self) -> &S {
        &self.q
    }

    /// `|q|^2` as a float.
    pub fn abs_q_sq(&self) -> f64 {
        self.abs_q_sq
    }

    /// `|q|^2` exactly, for exact `q`.
    pub fn abs_q_sq_exact(&self) -> Option<&BigRational> {
        self.abs_q_sq_exact.as_ref()
    }

    pub fn abs_q(&self) -> f64 {
        self.q.abs()
    }

    /// `q^e` for any integer `e`.
    pub fn q_pow(&self, e: i64) -> S {
        self.q.powi(e).expect("q is nonzero")
    }

    pub fn to_float(&self) -> QContext<FloatComplex> {
        QContext { n: self.n, q: FloatComplex(self.q.to_c64()), abs_q_sq: self.abs_q_sq, abs_q_sq_exact: None }
    }
}

/// Memoized integer powers of `q`.
pub(crate) struct QPowers<'a, S> {
    ctx: &'a QContext<S>,
    cache: HashMap<i64, S>,
}

impl<'a, S: Scalar> QPowers<'a, S> {
    pub(crate) fn new(ctx: &'a QContext<S>) -> Self {
        QPowers { ctx, cache: HashMap::new() }
    }

    pub(crate) fn get(&mut self, e: i64) -> S {
        if e == 0 {
            return S::one();
        }
        self.cache.entry(e).or_insert_with(|| self.ctx.q_pow(e)).clone()
    }
}

#[derive(Clone, Debug)]
pub struct QSeries<S> {
    n: usize,
    degree_cap: usize,
    terms: BTreeMap<MultiIndex, S>,
    truncated: bool,
}

impl<S: Scalar> PartialEq for QSeries<S> {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.terms == other.terms
    }
}

impl<S: Scalar> QSeries<S> {
    pub fn zero(n: usize, degree_cap: usize) -> Self {
        QSeries { n, degree_cap, terms: BTreeMap::new(), truncated: false }
    }

    pub fn one(n: usize, degree_cap: usize) -> Self {
        let mut f = Self::zero(n, degree_cap);
        f.terms.insert(MultiIndex::zeros(n), S::one());
        f
    }

    /// The generator `x_i` (1-based).
    pub fn generator(n: usize, degree_cap: usize, i: usize) -> Result<Self> {
        if i == 0 || i > n {
            return Err(Error::OutOfRange(format!("generator {i} not in 1..={n}")));
        }
        Self::monomial(n, degree_cap, MultiIndex::unit(n, i), S::one())
    }

    pub fn monomial(n: usize, degree_cap: usize, k: MultiIndex, coeff: S) -> Result<Self> {
        let mut f = Self::zero(n, degree_cap);
        f.add_term(k, coeff)?;
        Ok(f)
    }

    pub fn from_terms(n: usize, degree_cap: usize, terms: impl IntoIterator<Item = (MultiIndex, S)>) -> Result<Self> {
        let mut f = Self::zero(n, degree_cap);
        for (k, c) in terms {
            f.add_term(k, c)?;
        }
        Ok(f)
    }

    pub fn add_term(&mut self, k: MultiIndex, coeff: S) -> Result<()> {
        if k.n() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, found: k.n() });
        }
        if k.degree() > self.degree_cap {
            return Err(Error::OutOfRange(format!("x^{k} above degree cap {}", self.degree_cap)));
        }
        if !coeff.is_finite() {
            return Err(Error::param(format!("non-finite coefficient {coeff}")));
        }
        self.accumulate(k, coeff);
        Ok(())
    }

    pub(crate) fn accumulate(&mut self, k: MultiIndex, coeff: S) {
        if coeff.is_zero() {
            return;
        }
        match self.terms.get_mut(&k) {
            Some(slot) => {
                let sum = slot.clone() + coeff;
                if sum.is_zero() {
                    self.terms.remove(&k);
                } else {
                    *slot = sum;
                }
            }
            None => {
                self.terms.insert(k, coeff);
            }
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn degree_cap(&self) -> usize {
        self.degree_cap
    }

    pub fn is_truncated(&self) -> bool {
        self.truncated
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &S)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn max_degree(&self) -> Option<usize> {
        self.terms.keys().next_back().map(MultiIndex::degree)
    }

    pub fn coeff(&self, k: &MultiIndex) -> S {
        self.terms.get(k).cloned().unwrap_or_else(S::zero)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::Mismatch(format!("series in {} and {} variables", self.n, other.n)));
        }
        let mut out = self.clone();
        out.degree_cap = self.degree_cap.max(other.degree_cap);
        out.truncated |= other.truncated;
        for (k, c) in &other.terms {
            out.accumulate(k.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(&-S::one()))
    }

    pub fn scale(&self, s: &S) -> Self {
        let mut out = Self::zero(self.n, self.degree_cap);
        out.truncated = self.truncated;
        for (k, c) in &self.terms {
            out.accumulate(k.clone(), c.clone() * s.clone());
        }
        out
    }

    pub fn map<T: Scalar>(&self, f: impl Fn(&S) -> T) -> QSeries<T> {
        let mut out = QSeries::zero(self.n, self.degree_cap);
        out.truncated = self.truncated;
        for (k, c) in &self.terms {
            out.accumulate(k.clone(), f(c));
        }
        out
    }

    pub fn to_float(&self) -> QSeries<FloatComplex> {
        self.map(|c| FloatComplex(c.to_c64()))
    }

    /// The same series under a different degree cap.
    pub fn with_cap(&self, degree_cap: usize) -> Result<Self> {
        if let Some((w, _)) = self.terms.iter().find(|(w, _)| w.degree() > degree_cap) {
            return Err(Error::OutOfRange(format!("{w} above degree cap {degree_cap}")));
        }
        let mut out = self.clone();
        out.degree_cap = degree_cap;
        Ok(out)
    }

    /// Commutative product (the `q = 1` multiplication), truncated at the cap.
    pub fn commutative_mul(&self, other: &Self) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::Mismatch(format!("series in {} and {} variables", self.n, other.n)));
        }
        let cap = self.degree_cap.min(other.degree_cap);
        let mut out = Self::zero(self.n, cap);
        out.truncated = self.truncated || other.truncated;
        for (k, a) in &self.terms {
            for (l, b) in &other.terms {
                let m = k.add(l);
                if m.degree() > cap {
                    out.truncated = true;
                    continue;
                }
                out.accumulate(m, a.clone() * b.clone());
            }
        }
        Ok(out)
    }

    /// The free series `sum c_k zeta_{delta(k)}`, a preimage under normal ordering.
    pub fn lift(&self) -> FreeSeries<S> {
        let mut out = FreeSeries::zero(self.n, self.degree_cap);
        for (k, c) in &self.terms {
            out.add_term(delta(k), c.clone()).expect("delta(k) respects the cap");
        }
        out
    }
}

/// Which weight function to evaluate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Weight {
    /// `u_q(k) = |q|^{sigma(k,k)}`
    U,
    /// `w_q(k) = min(u_q(k), 1)`
    W,
    /// `min_{alpha in p^{-1}(k)} |q|^{m(alpha)}`, by enumeration.
    WBruteForce,
}

pub fn weight<S: Scalar>(k: &MultiIndex, ctx: &QContext<S>, which: Weight) -> Result<f64> {
    let abs_q = ctx.abs_q();
    Ok(match which {
        Weight::U => abs_q.powi(k.self_sigma() as i32),
        Weight::W => abs_q.powi(k.self_sigma() as i32).min(1.0),
        Weight::WBruteForce => {
            enumerate_preimage(k)?.iter().map(|w| abs_q.powi(w.inversions() as i32)).fold(f64::INFINITY, f64::min)
        }
    })
}

/// Squared weights computed exactly from `|q|^2`.
pub fn weight_sq_exact(k: &MultiIndex, abs_q_sq: &BigRational, which: Weight) -> Result<BigRational> {
    let pow = |e: i64| num_traits::pow(abs_q_sq.clone(), e as usize);
    Ok(match which {
        Weight::U => pow(k.self_sigma()),
        Weight::W => {
            let u = pow(k.self_sigma());
            if u < BigRational::one() {
                u
            } else {
                BigRational::one()
            }
        }
        Weight::WBruteForce => {
            let count = crate::combinatorics::multinomial(k);
            let cap = crate::combinatorics::enumeration_cap();
            if count > cap {
                return Err(Error::EnumerationTooLarge { count, cap });
            }
            Preimages::new(k).map(|w| pow(w.inversions() as i64)).min().unwrap_or_else(BigRational::zero)
        }
    })
}

/// `x_alpha = q^{-m(alpha)} x^{p(alpha)}`, extended linearly.
pub fn normal_order<S: Scalar>(f: &FreeSeries<S>, ctx: &QContext<S>) -> Result<QSeries<S>> {
    if f.n() != ctx.n {
        return Err(Error::DimensionMismatch { expected: ctx.n, found: f.n() });
    }
    let mut powers = QPowers::new(ctx);
    let mut out = QSeries::zero(f.n(), f.degree_cap());
    out.truncated = f.is_truncated();
    for (w, c) in f.terms() {
        let factor = powers.get(-(w.inversions() as i64));
        out.accumulate(w.projection(f.n()), c.clone() * factor);
    }
    Ok(out)
}

/// Product in the quantum algebra; monomials above the cap are dropped and flagged.
pub fn qmul<S: Scalar>(f: &QSeries<S>, g: &QSeries<S>, ctx: &QContext<S>) -> Result<QSeries<S>> {
    if f.n != g.n || f.n != ctx.n {
        return Err(Error::Mismatch(format!("series in {} and {} variables with context n = {}", f.n, g.n, ctx.n)));
    }
    let cap = f.degree_cap.min(g.degree_cap);
    let mut powers = QPowers::new(ctx);
    let mut out = QSeries::zero(f.n, cap);
    out.truncated = f.truncated || g.truncated;
    for (k, a) in &f.terms {
        for (l, b) in &g.terms {
            let m = k.add(l);
            if m.degree() > cap {
                out.truncated = true;
                continue;
            }
            let factor = powers.get(-l.sigma(k));
            out.accumulate(m, a.clone() * b.clone() * factor);
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum QNorm {
    /// `sum |c_k| w_q(k) rho^{|k|}`
    Polydisk { rho: f64 },
    /// `sum |c_k| ([k]_{|q|^2}! / [|k|]_{|q|^2}!)^{1/2} u_q(k) rho^{|k|}`
    Ball { rho: f64 },
    /// `sum |c_k| ([k]_{|q|^-2}! / [|k|]_{|q|^-2}!)^{1/2} rho^{|k|}`
    BallAlt { rho: f64 },
}

impl QNorm {
    pub fn rho(&self) -> f64 {
        match *self {
            QNorm::Polydisk { rho } | QNorm::Ball { rho } | QNorm::BallAlt { rho } => rho,
        }
    }
}

/// `[k]_s! / [|k|]_s!` for real `s > 0`, as a product of factors in `(0, 1]`.
pub fn q_multinomial_inverse(k: &MultiIndex, s: f64) -> f64 {
    let numer = k.entries().iter().flat_map(|&e| 1..=e);
    numer.zip(1..=k.degree() as u32).map(|(a, t)| q_integer_f64(a, s) / q_integer_f64(t, s)).product()
}

fn q_integer_f64(j: u32, s: f64) -> f64 {
    crate::combinatorics::q_integer(j, &s)
}

/// The ball weight of `x^k` at radius 1.
pub fn ball_weight(k: &MultiIndex, abs_q_sq: f64) -> f64 {
    q_multinomial_inverse(k, abs_q_sq).sqrt() * abs_q_sq.powf(k.self_sigma() as f64 / 2.0)
}

/// The alternative expression of the ball weight, through `|q|^{-2}`.
pub fn ball_weight_alt(k: &MultiIndex, abs_q_sq: f64) -> f64 {
    q_multinomial_inverse(k, 1.0 / abs_q_sq).sqrt()
}

pub fn qnorm<S: Scalar>(f: &QSeries<S>, ctx: &QContext<S>, family: QNorm) -> Result<f64> {
    let rho = family.rho();
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(Error::param(format!("rho must be positive, got {rho}")));
    }
    if f.n != ctx.n {
        return Err(Error::DimensionMismatch { expected: ctx.n, found: f.n });
    }
    let s = ctx.abs_q_sq;
    let mut acc = 0.0;
    for (k, c) in &f.terms {
        let wt = match family {
            QNorm::Polydisk { .. } => weight(k, ctx, Weight::W)?,
            QNorm::Ball { .. } => ball_weight(k, s),
            QNorm::BallAlt { .. } => ball_weight_alt(k, s),
        };
        acc += c.abs() * wt * rho.powi(k.degree() as i32);
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combinatorics::Word;
    use crate::scalars::{ExactComplex, Ring};

    type E = ExactComplex;

    fn ex(s: &str) -> E {
        s.parse().unwrap()
    }

    fn mi(s: &str) -> MultiIndex {
        s.parse().unwrap()
    }

    fn ctx(n: usize, q: &str) -> QContext<E> {
        QContext::new(n, ex(q)).unwrap()
    }

    #[test]
    fn zero_q_rejected() {
        assert!(QContext::new(2, E::zero()).is_err());
    }

    #[test]
    fn weight_examples() {
        let c = ctx(2, "1/2");
        assert_eq!(weight(&mi("(1,1)"), &c, Weight::U).unwrap(), 0.5);
        assert_eq!(weight(&mi("(1,1)"), &c, Weight::W).unwrap(), 0.5);
        let c2 = ctx(2, "2");
        assert_eq!(weight(&mi("(1,1)"), &c2, Weight::U).unwrap(), 2.0);
        assert_eq!(weight(&mi("(1,1)"), &c2, Weight::W).unwrap(), 1.0);
        assert_eq!(weight(&mi("(2,1)"), &c, Weight::WBruteForce).unwrap(), 0.25);
        assert_eq!(weight(&mi("(2,1)"), &c, Weight::U).unwrap(), 0.25);
    }

    #[test]
    fn exact_squared_weights() {
        let r = BigRational::new(1.into(), 4.into());
        assert_eq!(weight_sq_exact(&mi("(2,1)"), &r, Weight::W).unwrap(), BigRational::new(1.into(), 16.into()));
        assert_eq!(
            weight_sq_exact(&mi("(2,1)"), &r, Weight::WBruteForce).unwrap(),
            weight_sq_exact(&mi("(2,1)"), &r, Weight::W).unwrap()
        );
    }

    #[test]
    fn normal_order_examples() {
        let c = ctx(2, "3/5+4/5*i");
        let q = c.q().clone();
        let f = FreeSeries::monomial(2, 4, "[2,1]".parse().unwrap(), E::one()).unwrap();
        let expected = QSeries::monomial(2, 4, mi("(1,1)"), q.inv().unwrap()).unwrap();
        assert_eq!(normal_order(&f, &c).unwrap(), expected);

        let rel = FreeSeries::from_terms(
            2,
            4,
            [("[1,2]".parse::<Word>().unwrap(), E::one()), ("[2,1]".parse().unwrap(), -q.clone())],
        )
        .unwrap();
        assert!(normal_order(&rel, &c).unwrap().is_zero());

        let g = FreeSeries::monomial(2, 4, "[2,1,1]".parse().unwrap(), E::one()).unwrap();
        let expected = QSeries::monomial(2, 4, mi("(2,1)"), q.powi(-2).unwrap()).unwrap();
        assert_eq!(normal_order(&g, &c).unwrap(), expected);
    }

    #[test]
    fn qmul_examples() {
        let c = ctx(2, "1/3");
        let x1 = QSeries::<E>::generator(2, 4, 1).unwrap();
        let x2 = QSeries::<E>::generator(2, 4, 2).unwrap();
        assert_eq!(qmul(&x1, &x2, &c).unwrap(), QSeries::monomial(2, 4, mi("(1,1)"), E::one()).unwrap());
        assert_eq!(qmul(&x2, &x1, &c).unwrap(), QSeries::monomial(2, 4, mi("(1,1)"), ex("3")).unwrap());
        // the defining relation x1 x2 = q x2 x1
        let lhs = qmul(&x1, &x2, &c).unwrap();
        let rhs = qmul(&x2, &x1, &c).unwrap().scale(c.q());
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn qmul_flags_truncation_and_mismatch() {
        let c = ctx(2, "2");
        let a = QSeries::<E>::monomial(2, 2, mi("(1,1)"), E::one()).unwrap();
        let p = qmul(&a, &a, &c).unwrap();
        assert!(p.is_zero() && p.is_truncated());
        let b = QSeries::<E>::generator(3, 2, 1).unwrap();
        assert!(qmul(&a, &b, &c).is_err());
    }

    #[test]
    fn ball_norm_examples() {
        for s_num in [1i64, 2, 5] {
            let q = ex(&format!("{s_num}/3"));
            let c = QContext::new(2, q).unwrap();
            let s = c.abs_q_sq();
            let f = QSeries::monomial(2, 4, mi("(1,1)"), E::one()).unwrap();
            let ball = qnorm(&f, &c, QNorm::Ball { rho: 1.0 }).unwrap();
            let alt = qnorm(&f, &c, QNorm::BallAlt { rho: 1.0 }).unwrap();
            assert!((ball - (s / (1.0 + s)).sqrt()).abs() < 1e-15);
            assert!((alt - (1.0 / (1.0 + 1.0 / s)).sqrt()).abs() < 1e-15);
        }
        let c = ctx(2, "1");
        let f = QSeries::monomial(2, 4, mi("(1,1)"), E::one()).unwrap();
        assert!((qnorm(&f, &c, QNorm::Ball { rho: 1.0 }).unwrap() - 0.5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn polydisk_norm_of_monomial() {
        let c = ctx(3, "1/2");
        let k = mi("(1,2,1)");
        let rho: f64 = 0.7;
        let f = QSeries::monomial(3, 4, k.clone(), ex("-2")).unwrap();
        let expected = 2.0 * weight(&k, &c, Weight::W).unwrap() * rho.powi(4);
        assert!((qnorm(&f, &c, QNorm::Polydisk { rho }).unwrap() - expected).abs() < 1e-15);
        assert!(qnorm(&f, &c, QNorm::Polydisk { rho: -1.0 }).is_err());
    }

    #[test]
    fn lift_is_a_preimage() {
        let c = ctx(3, "2-i");
        let f = QSeries::from_terms(3, 5, [(mi("(1,0,2)"), ex("1/2")), (mi("(0,3,1)"), ex("i"))]).unwrap();
        assert_eq!(normal_order(&f.lift(), &c).unwrap(), f);
    }
}
