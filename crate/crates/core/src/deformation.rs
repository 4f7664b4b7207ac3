//! The holomorphic deformation over `C^x`: series `sum c_{kp} x^k z^p` with
//! central `z` and `x_i x_j = z x_j x_i` for `i < j`.

use std::collections::BTreeMap;

use crate::combinatorics::{delta, MultiIndex, Word};
use crate::error::{Error, Result};
use crate::quantum_series::{qnorm, QContext, QPowers, QSeries};
use crate::quotient_oracle::Geometry;
use crate::scalars::{FloatComplex, Scalar};

/// `p` clamped into `[p, p + sigma(k,k)]` towards zero.
pub fn omega(k: &MultiIndex, p: i64) -> i64 {
    let top = p + k.self_sigma();
    if p >= 0 {
        p
    } else if top >= 0 {
        0
    } else {
        top
    }
}

/// `(x^k z^p)(x^l z^s) = x^{k+l} z^{p+s-sigma(l,k)}`
pub fn dmul_monomial(k: &MultiIndex, p: i64, l: &MultiIndex, s: i64) -> (MultiIndex, i64) {
    (k.add(l), p + s - l.sigma(k))
}

#[derive(Clone, Debug)]
pub struct DefoSeries<S> {
    n: usize,
    degree_cap: usize,
    z_window: i64,
    terms: BTreeMap<(MultiIndex, i64), S>,
    truncated: bool,
}

impl<S: Scalar> PartialEq for DefoSeries<S> {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.terms == other.terms
    }
}

impl<S: Scalar> DefoSeries<S> {
    pub fn zero(n: usize, degree_cap: usize, z_window: i64) -> Self {
        DefoSeries { n, degree_cap, z_window: z_window.abs(), terms: BTreeMap::new(), truncated: false }
    }

    pub fn one(n: usize, degree_cap: usize, z_window: i64) -> Self {
        let mut a = Self::zero(n, degree_cap, z_window);
        a.terms.insert((MultiIndex::zeros(n), 0), S::one());
        a
    }

    pub fn monomial(n: usize, degree_cap: usize, z_window: i64, k: MultiIndex, p: i64, coeff: S) -> Result<Self> {
        let mut a = Self::zero(n, degree_cap, z_window);
        a.add_term(k, p, coeff)?;
        Ok(a)
    }

    /// The generator `x_i` (1-based).
    pub fn generator(n: usize, degree_cap: usize, z_window: i64, i: usize) -> Result<Self> {
        if i == 0 || i > n {
            return Err(Error::OutOfRange(format!("generator {i} not in 1..={n}")));
        }
        Self::monomial(n, degree_cap, z_window, MultiIndex::unit(n, i), 0, S::one())
    }

    pub fn z_power(n: usize, degree_cap: usize, z_window: i64, p: i64) -> Result<Self> {
        Self::monomial(n, degree_cap, z_window, MultiIndex::zeros(n), p, S::one())
    }

    pub fn from_terms(
        n: usize,
        degree_cap: usize,
        z_window: i64,
        terms: impl IntoIterator<Item = (MultiIndex, i64, S)>,
    ) -> Result<Self> {
        let mut a = Self::zero(n, degree_cap, z_window);
        for (k, p, c) in terms {
            a.add_term(k, p, c)?;
        }
        Ok(a)
    }

    pub fn add_term(&mut self, k: MultiIndex, p: i64, coeff: S) -> Result<()> {
        if k.n() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, found: k.n() });
        }
        if k.degree() > self.degree_cap {
            return Err(Error::OutOfRange(format!("x^{k} above degree cap {}", self.degree_cap)));
        }
        if p.abs() > self.z_window {
            return Err(Error::OutOfRange(format!("z^{p} outside window [-{0}, {0}]", self.z_window)));
        }
        if !coeff.is_finite() {
            return Err(Error::param(format!("non-finite coefficient {coeff}")));
        }
        self.accumulate(k, p, coeff);
        Ok(())
    }

    fn accumulate(&mut self, k: MultiIndex, p: i64, coeff: S) {
        if coeff.is_zero() {
            return;
        }
        let key = (k, p);
        match self.terms.get_mut(&key) {
            Some(slot) => {
                let sum = slot.clone() + coeff;
                if sum.is_zero() {
                    self.terms.remove(&key);
                } else {
                    *slot = sum;
                }
            }
            None => {
                self.terms.insert(key, coeff);
            }
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn degree_cap(&self) -> usize {
        self.degree_cap
    }

    pub fn z_window(&self) -> i64 {
        self.z_window
    }

    pub fn is_truncated(&self) -> bool {
        self.truncated
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, i64, &S)> {
        self.terms.iter().map(|((k, p), c)| (k, *p, c))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, k: &MultiIndex, p: i64) -> S {
        self.terms.get(&(k.clone(), p)).cloned().unwrap_or_else(S::zero)
    }

    /// The same series with a different degree cap and z-window.
    pub fn with_bounds(&self, degree_cap: usize, z_window: i64) -> Result<Self> {
        let mut out = Self::zero(self.n, degree_cap, z_window);
        out.truncated = self.truncated;
        for ((k, p), c) in &self.terms {
            out.add_term(k.clone(), *p, c.clone())?;
        }
        Ok(out)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::Mismatch(format!("series in {} and {} variables", self.n, other.n)));
        }
        let mut out = self.clone();
        out.degree_cap = self.degree_cap.max(other.degree_cap);
        out.z_window = self.z_window.max(other.z_window);
        out.truncated |= other.truncated;
        for ((k, p), c) in &other.terms {
            out.accumulate(k.clone(), *p, c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(&-S::one()))
    }

    pub fn scale(&self, s: &S) -> Self {
        let mut out = Self::zero(self.n, self.degree_cap, self.z_window);
        out.truncated = self.truncated;
        for ((k, p), c) in &self.terms {
            out.accumulate(k.clone(), *p, c.clone() * s.clone());
        }
        out
    }

    pub fn map<T: Scalar>(&self, f: impl Fn(&S) -> T) -> DefoSeries<T> {
        let mut out = DefoSeries::zero(self.n, self.degree_cap, self.z_window);
        out.truncated = self.truncated;
        for ((k, p), c) in &self.terms {
            out.accumulate(k.clone(), *p, f(c));
        }
        out
    }

    pub fn to_float(&self) -> DefoSeries<FloatComplex> {
        self.map(|c| FloatComplex(c.to_c64()))
    }
}

/// Product in the deformation algebra. Terms leaving the degree cap or the
/// z-window are dropped and flagged.
pub fn dmul<S: Scalar>(a: &DefoSeries<S>, b: &DefoSeries<S>) -> Result<DefoSeries<S>> {
    if a.n != b.n {
        return Err(Error::Mismatch(format!("series in {} and {} variables", a.n, b.n)));
    }
    let cap = a.degree_cap.min(b.degree_cap);
    let window = a.z_window.max(b.z_window);
    let mut out = DefoSeries::zero(a.n, cap, window);
    out.truncated = a.truncated || b.truncated;
    for ((k, p), ca) in &a.terms {
        for ((l, s), cb) in &b.terms {
            let (m, e) = dmul_monomial(k, *p, l, *s);
            if m.degree() > cap || e.abs() > window {
                out.truncated = true;
                continue;
            }
            out.accumulate(m, e, ca.clone() * cb.clone());
        }
    }
    Ok(out)
}

/// `sum |c_{kp}| rho^{|k|} tau^{|omega(k,p)|}`
pub fn dnorm<S: Scalar>(a: &DefoSeries<S>, rho: f64, tau: f64) -> Result<f64> {
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(Error::param(format!("rho must be positive, got {rho}")));
    }
    if !(tau >= 1.0 && tau.is_finite()) {
        return Err(Error::param(format!("tau must be >= 1, got {tau}")));
    }
    Ok(a.terms
        .iter()
        .map(|((k, p), c)| c.abs() * rho.powi(k.degree() as i32) * tau.powi(omega(k, *p).abs() as i32))
        .sum())
}

/// A word with letter counts `k` and exactly `m` inversions, obtained from
/// `delta(k)` by repeatedly moving the first letter to the end of the
/// unsettled prefix one adjacent swap at a time.
pub fn alpha_with_inversions(k: &MultiIndex, m: i64) -> Result<Word> {
    let top = k.self_sigma();
    if m < 0 || m > top {
        return Err(Error::OutOfRange(format!("inversion count {m} not in [0, {top}] for {k}")));
    }
    let mut letters = delta(k).letters().to_vec();
    let d = letters.len();
    let mut count = 0;
    'stages: for stage in 0..d.saturating_sub(1) {
        for pos in 0..d - 1 - stage {
            if count == m {
                break 'stages;
            }
            if letters[pos] != letters[pos + 1] {
                count += 1;
            }
            letters.swap(pos, pos + 1);
        }
    }
    Ok(Word::new(letters))
}

#[derive(Clone, Debug, PartialEq)]
pub struct SplitTerm<S> {
    pub z_exponent: i64,
    pub word: Word,
    pub coeff: S,
}

/// Rewrites each `c x^k z^p` as `c z^{omega(k,p)} zeta_alpha` with
/// `m(alpha) = omega(k,p) - p`.
pub fn canonical_split<S: Scalar>(a: &DefoSeries<S>) -> Result<Vec<SplitTerm<S>>> {
    a.terms
        .iter()
        .map(|((k, p), c)| {
            let w = omega(k, *p);
            Ok(SplitTerm { z_exponent: w, word: alpha_with_inversions(k, w - p)?, coeff: c.clone() })
        })
        .collect()
}

/// Inverse of [`canonical_split`]: `z^e zeta_alpha = x^{p(alpha)} z^{e - m(alpha)}`.
pub fn rebuild<S: Scalar>(n: usize, degree_cap: usize, z_window: i64, terms: &[SplitTerm<S>]) -> Result<DefoSeries<S>> {
    let mut out = DefoSeries::zero(n, degree_cap, z_window);
    for t in terms {
        t.word.validate(n)?;
        out.add_term(t.word.projection(n), t.z_exponent - t.word.inversions() as i64, t.coeff.clone())?;
    }
    Ok(out)
}

/// Substitutes `z = q`.
pub fn fiber_eval<S: Scalar>(a: &DefoSeries<S>, ctx: &QContext<S>) -> Result<QSeries<S>> {
    if a.n != ctx.n() {
        return Err(Error::DimensionMismatch { expected: ctx.n(), found: a.n });
    }
    let mut powers = QPowers::new(ctx);
    let mut out = QSeries::zero(a.n, a.degree_cap);
    for ((k, p), c) in &a.terms {
        out.add_term(k.clone(), c.clone() * powers.get(*p))?;
    }
    Ok(out)
}

/// Fiber norms `||a_q||` at each grid point, in grid order.
pub fn fiber_norm_profile<S: Scalar>(
    a: &DefoSeries<S>,
    rho: f64,
    geometry: Geometry,
    grid: &[FloatComplex],
) -> Result<Vec<f64>> {
    let af = a.to_float();
    grid.iter()
        .map(|q| {
            let ctx = QContext::new(a.n, *q)?;
            qnorm(&fiber_eval(&af, &ctx)?, &ctx, geometry.qnorm(rho))
        })
        .collect()
}

/// `count` points `r e^{i arg}` with `r` evenly spaced over `[rmin, rmax]`.
pub fn radial_grid(rmin: f64, rmax: f64, count: usize, arg: f64) -> Result<Vec<FloatComplex>> {
    if !(rmin > 0.0 && rmin <= rmax && rmax.is_finite()) {
        return Err(Error::param(format!("grid radii must satisfy 0 < rmin <= rmax, got {rmin}:{rmax}")));
    }
    if count < 2 {
        return Err(Error::param("grid needs at least two points"));
    }
    if !arg.is_finite() {
        return Err(Error::param("grid argument must be finite"));
    }
    let step = (rmax - rmin) / (count - 1) as f64;
    Ok((0..count).map(|i| FloatComplex::from_polar(rmin + step * i as f64, arg)).collect())
}

pub fn max_adjacent_jump(values: &[f64]) -> f64 {
    values.windows(2).map(|w| (w[1] - w[0]).abs()).fold(0.0, f64::max)
}

/// Largest adjacent jump of the profile on successively halved grids; level
/// `l` has `(base - 1) 2^l + 1` points.
pub fn refinement_jumps<S: Scalar>(
    a: &DefoSeries<S>,
    rho: f64,
    geometry: Geometry,
    (rmin, rmax, arg): (f64, f64, f64),
    base: usize,
    levels: usize,
) -> Result<Vec<f64>> {
    (0..levels)
        .map(|l| {
            let grid = radial_grid(rmin, rmax, (base - 1) * (1 << l) + 1, arg)?;
            Ok(max_adjacent_jump(&fiber_norm_profile(a, rho, geometry, &grid)?))
        })
        .collect()
}
