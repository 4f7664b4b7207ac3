//! The formal deformation in `h`: a star product on commutative series with
//! `x^k * x^l = e^{-i h sigma(l,k)} x^{k+l}`, the Poisson bracket it
//! integrates, and its comparison with the quantum product at `q = e^{ih}`.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::One;

use crate::combinatorics::{enumerate_preimage, multinomial, MultiIndex};
use crate::error::{Error, Result};
use crate::free_series::FreeSeries;
use crate::quantum_series::{qmul, qnorm, QContext, QNorm, QSeries};
use crate::scalars::{hpoly_exp_factor, to_scalar, ExactComplex, FloatComplex, HPoly, Ring, Scalar};

/// A power series in `h`, truncated after `h^order`, with series coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct HSeries<T> {
    coeffs: Vec<T>,
}

impl<T> HSeries<T> {
    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn coeff(&self, m: usize) -> Option<&T> {
        self.coeffs.get(m)
    }
}

impl<S: Scalar> HSeries<QSeries<S>> {
    /// An `h`-free series.
    pub fn constant(f: QSeries<S>, order: usize) -> Self {
        let zero = QSeries::zero(f.n(), f.degree_cap());
        let mut coeffs = vec![zero; order + 1];
        coeffs[0] = f;
        HSeries { coeffs }
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        if self.order() != other.order() {
            return Err(Error::Mismatch(format!("h-orders {} and {}", self.order(), other.order())));
        }
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a.sub(b)).collect::<Result<_>>()?;
        Ok(HSeries { coeffs })
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(QSeries::is_zero)
    }
}

/// Memoized expansions of `e^{-i h s}` in the target scalar domain.
struct ExpFactors<S> {
    order: usize,
    cache: HashMap<i64, Vec<S>>,
}

impl<S: Scalar> ExpFactors<S> {
    fn new(order: usize) -> Self {
        ExpFactors { order, cache: HashMap::new() }
    }

    fn get(&mut self, s: i64) -> &[S] {
        let order = self.order;
        self.cache.entry(s).or_insert_with(|| hpoly_exp_factor(s, order).coeffs().iter().map(to_scalar).collect())
    }
}

fn check_pair<S: Scalar>(f: &QSeries<S>, g: &QSeries<S>) -> Result<()> {
    if f.n() != g.n() {
        return Err(Error::Mismatch(format!("series in {} and {} variables", f.n(), g.n())));
    }
    Ok(())
}

/// `f * g` through `h^order`.
pub fn star<S: Scalar>(f: &QSeries<S>, g: &QSeries<S>, order: usize) -> Result<HSeries<QSeries<S>>> {
    star_h(&HSeries::constant(f.clone(), order), &HSeries::constant(g.clone(), order))
}

/// The `C[[h]]`-bilinear extension of [`star`].
pub fn star_h<S: Scalar>(f: &HSeries<QSeries<S>>, g: &HSeries<QSeries<S>>) -> Result<HSeries<QSeries<S>>> {
    let order = f.order().min(g.order());
    let (n, cap) = match (f.coeffs.first(), g.coeffs.first()) {
        (Some(a), Some(b)) => {
            check_pair(a, b)?;
            (a.n(), a.degree_cap().min(b.degree_cap()))
        }
        _ => return Err(Error::param("empty h-series")),
    };
    let mut exps = ExpFactors::<S>::new(order);
    let mut out = vec![QSeries::zero(n, cap); order + 1];
    for (a, fa) in f.coeffs.iter().enumerate().take(order + 1) {
        for (b, gb) in g.coeffs.iter().enumerate().take(order + 1 - a) {
            for (k, ck) in fa.terms() {
                for (l, cl) in gb.terms() {
                    let m = k.add(l);
                    if m.degree() > cap {
                        continue;
                    }
                    let base = ck.clone() * cl.clone();
                    let e = exps.get(l.sigma(k));
                    for (j, ej) in e.iter().enumerate().take(order + 1 - a - b) {
                        out[a + b + j].add_term(m.clone(), base.clone() * ej.clone())?;
                    }
                }
            }
        }
    }
    Ok(HSeries { coeffs: out })
}

/// `{f, g} = sum a_k b_l (sigma(k,l) - sigma(l,k)) x^{k+l}`
pub fn poisson<S: Scalar>(f: &QSeries<S>, g: &QSeries<S>) -> Result<QSeries<S>> {
    check_pair(f, g)?;
    let cap = f.degree_cap().min(g.degree_cap());
    let mut out = QSeries::zero(f.n(), cap);
    for (k, a) in f.terms() {
        for (l, b) in g.terms() {
            let m = k.add(l);
            let w = k.sigma(l) - l.sigma(k);
            if m.degree() > cap || w == 0 {
                continue;
            }
            out.add_term(m, a.clone() * b.clone() * S::from_i64(w))?;
        }
    }
    Ok(out)
}

/// `e^{-ix} - 1`, accurate for small `x`.
fn expm1_neg_i(x: f64) -> Complex64 {
    let s = (x / 2.0).sin();
    Complex64::new(-2.0 * s * s, -x.sin())
}

/// `phi_{kl}(h) = (e^{-ih sigma(l,k)} - e^{-ih sigma(k,l)}) / h - i (sigma(k,l) - sigma(l,k))`
pub fn rieffel_phi(k: &MultiIndex, l: &MultiIndex, h: f64) -> Complex64 {
    let (a, b) = (l.sigma(k) as f64, k.sigma(l) as f64);
    (expm1_neg_i(a * h) - expm1_neg_i(b * h)) / h - Complex64::new(0.0, b - a)
}

/// The fiber norm at `q = e^{ih}` of `(f g - g f)/h - i{f,g}`.
pub fn rieffel_defect<S: Scalar>(f: &QSeries<S>, g: &QSeries<S>, h: f64, rho: f64) -> Result<f64> {
    check_pair(f, g)?;
    if h == 0.0 || !h.is_finite() {
        return Err(Error::param(format!("h must be finite and nonzero, got {h}")));
    }
    let cap = f.degree_cap().min(g.degree_cap());
    let mut defect = QSeries::<FloatComplex>::zero(f.n(), cap);
    for (k, a) in f.terms() {
        for (l, b) in g.terms() {
            let m = k.add(l);
            if m.degree() > cap {
                continue;
            }
            let c = a.to_c64() * b.to_c64() * rieffel_phi(k, l, h);
            defect.add_term(m, FloatComplex(c))?;
        }
    }
    let ctx = QContext::new(f.n(), FloatComplex::from_polar(1.0, h))?;
    qnorm(&defect, &ctx, QNorm::Polydisk { rho })
}

/// The `h`-coefficients of `u_k = (k!/|k|!) sum_alpha e^{i m(alpha) h} zeta_alpha`.
pub fn u_section(k: &MultiIndex, order: usize) -> Result<HSeries<FreeSeries<ExactComplex>>> {
    let words = enumerate_preimage(k)?;
    let weight = ExactComplex::real(BigRational::new(BigInt::one(), BigInt::from(multinomial(k))));
    let n = k.n();
    let mut coeffs = vec![FreeSeries::zero(n, k.degree()); order + 1];
    for w in words {
        let e = hpoly_exp_factor(-(w.inversions() as i64), order);
        for (j, c) in e.coeffs().iter().enumerate() {
            coeffs[j].add_term(w.clone(), &weight * c)?;
        }
    }
    Ok(HSeries { coeffs })
}

/// Normal-orders `u_k` with `q = e^{ih}` expanded through `h^order` and
/// checks the result is exactly `x^k`.
pub fn u_section_check(k: &MultiIndex, order: usize) -> Result<bool> {
    let u = u_section(k, order)?;
    let mut total = HPoly::<ExactComplex>::zero(order);
    let mut by_word: std::collections::BTreeMap<_, Vec<ExactComplex>> = std::collections::BTreeMap::new();
    for (j, fj) in u.coeffs.iter().enumerate() {
        for (w, c) in fj.terms() {
            if w.projection(k.n()) != *k {
                return Ok(false);
            }
            by_word.entry(w.clone()).or_insert_with(|| vec![ExactComplex::zero(); order + 1])[j] = c.clone();
        }
    }
    for (w, cs) in by_word {
        let series = HPoly::from_coeffs(cs, order);
        let normal = hpoly_exp_factor(w.inversions() as i64, order);
        total = total.add(&series.mul(&normal));
    }
    Ok(total.is_one())
}

/// `sum a_k b_l e^{-ih sigma(l,k)} x^{k+l}` evaluated numerically.
pub fn star_eval<S: Scalar>(f: &QSeries<S>, g: &QSeries<S>, h: f64) -> Result<QSeries<FloatComplex>> {
    check_pair(f, g)?;
    let cap = f.degree_cap().min(g.degree_cap());
    let mut out = QSeries::zero(f.n(), cap);
    for (k, a) in f.terms() {
        for (l, b) in g.terms() {
            let m = k.add(l);
            if m.degree() > cap {
                continue;
            }
            let phase = Complex64::from_polar(1.0, -h * l.sigma(k) as f64);
            out.add_term(m, FloatComplex(a.to_c64() * b.to_c64() * phase))?;
        }
    }
    Ok(out)
}

/// Largest coefficient deviation between the star product at `h` and the
/// quantum product at `q = e^{ih}`, relative to the largest coefficient.
pub fn star_fiber_compare<S: Scalar>(f: &QSeries<S>, g: &QSeries<S>, h: f64) -> Result<f64> {
    if !h.is_finite() {
        return Err(Error::param("h must be finite"));
    }
    let lhs = star_eval(f, g, h)?;
    let ctx = QContext::new(f.n(), FloatComplex::from_polar(1.0, h))?;
    let rhs = qmul(&f.to_float(), &g.to_float(), &ctx)?;
    let diff = lhs.sub(&rhs)?;
    let dev = diff.terms().map(|(_, c)| c.abs()).fold(0.0, f64::max);
    let scale = lhs.terms().chain(rhs.terms()).map(|(_, c)| c.abs()).fold(0.0, f64::max);
    Ok(if dev == 0.0 { 0.0 } else { dev / scale })
}
