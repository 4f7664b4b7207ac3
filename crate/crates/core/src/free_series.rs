//! Degree-truncated noncommutative power series `sum c_alpha zeta_alpha`.
//!
//! Terms are kept in a `BTreeMap<Word, _>`, so iteration runs by ascending
//! degree and lexicographically within a degree. Every float reduction in this
//! module follows that order.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::combinatorics::{words_of_length, MultiIndex, Word};
use crate::error::{Error, Result};
use crate::scalars::{FloatComplex, Scalar};

/// Default bound on the dimension of a truncated Fock space.
pub const FOCK_DIM_CAP: usize = 2048;

#[derive(Clone, Debug)]
pub struct FreeSeries<S> {
    n: usize,
    degree_cap: usize,
    terms: BTreeMap<Word, S>,
    truncated: bool,
}

impl<S: Scalar> PartialEq for FreeSeries<S> {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.terms == other.terms
    }
}

impl<S: Scalar> FreeSeries<S> {
    pub fn zero(n: usize, degree_cap: usize) -> Self {
        FreeSeries { n, degree_cap, terms: BTreeMap::new(), truncated: false }
    }

    pub fn one(n: usize, degree_cap: usize) -> Self {
        let mut f = Self::zero(n, degree_cap);
        f.terms.insert(Word::empty(), S::one());
        f
    }

    /// The generator `zeta_i` (1-based).
    pub fn generator(n: usize, degree_cap: usize, i: usize) -> Result<Self> {
        Self::monomial(n, degree_cap, Word::new(vec![i as u8]), S::one())
    }

    pub fn monomial(n: usize, degree_cap: usize, word: Word, coeff: S) -> Result<Self> {
        let mut f = Self::zero(n, degree_cap);
        f.add_term(word, coeff)?;
        Ok(f)
    }

    pub fn from_terms(n: usize, degree_cap: usize, terms: impl IntoIterator<Item = (Word, S)>) -> Result<Self> {
        let mut f = Self::zero(n, degree_cap);
        for (w, c) in terms {
            f.add_term(w, c)?;
        }
        Ok(f)
    }

    /// Adds `coeff * zeta_word`, validating the word against the alphabet and cap.
    pub fn add_term(&mut self, word: Word, coeff: S) -> Result<()> {
        word.validate(self.n)?;
        if word.len() > self.degree_cap {
            return Err(Error::OutOfRange(format!("word {word} longer than degree cap {}", self.degree_cap)));
        }
        if !coeff.is_finite() {
            return Err(Error::param(format!("non-finite coefficient {coeff}")));
        }
        self.accumulate(word, coeff);
        Ok(())
    }

    fn accumulate(&mut self, word: Word, coeff: S) {
        if coeff.is_zero() {
            return;
        }
        match self.terms.get_mut(&word) {
            Some(slot) => {
                let sum = slot.clone() + coeff;
                if sum.is_zero() {
                    self.terms.remove(&word);
                } else {
                    *slot = sum;
                }
            }
            None => {
                self.terms.insert(word, coeff);
            }
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn degree_cap(&self) -> usize {
        self.degree_cap
    }

    /// Whether some product dropped terms above the degree cap.
    pub fn is_truncated(&self) -> bool {
        self.truncated
    }

    pub fn is_exact(&self) -> bool {
        S::EXACT
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Word, &S)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, w: &Word) -> S {
        self.terms.get(w).cloned().unwrap_or_else(S::zero)
    }

    pub fn max_degree(&self) -> Option<usize> {
        self.terms.keys().next_back().map(Word::len)
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.n != other.n {
            return Err(Error::Mismatch(format!("alphabet sizes {} and {}", self.n, other.n)));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        out.degree_cap = self.degree_cap.max(other.degree_cap);
        out.truncated |= other.truncated;
        for (w, c) in &other.terms {
            out.accumulate(w.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(&-S::one()))
    }

    pub fn scale(&self, s: &S) -> Self {
        let mut out = Self::zero(self.n, self.degree_cap);
        out.truncated = self.truncated;
        for (w, c) in &self.terms {
            out.accumulate(w.clone(), c.clone() * s.clone());
        }
        out
    }

    /// Concatenation product, see [`fmul`].
    pub fn mul(&self, other: &Self) -> Result<Self> {
        fmul(self, other)
    }

    pub fn map<T: Scalar>(&self, f: impl Fn(&S) -> T) -> FreeSeries<T> {
        let mut out = FreeSeries::zero(self.n, self.degree_cap);
        out.truncated = self.truncated;
        for (w, c) in &self.terms {
            out.accumulate(w.clone(), f(c));
        }
        out
    }

    pub fn to_float(&self) -> FreeSeries<FloatComplex> {
        self.map(|c| FloatComplex(c.to_c64()))
    }

    /// The same series under a different degree cap.
    pub fn with_cap(&self, degree_cap: usize) -> Result<Self> {
        if let Some((w, _)) = self.terms.iter().find(|(w, _)| w.len() > degree_cap) {
            return Err(Error::OutOfRange(format!("{w} above degree cap {degree_cap}")));
        }
        let mut out = self.clone();
        out.degree_cap = degree_cap;
        Ok(out)
    }

    /// The component supported on `p^{-1}(k)`.
    pub fn multi_graded_component(&self, k: &MultiIndex) -> Self {
        let mut out = Self::zero(self.n, self.degree_cap);
        for (w, c) in self.terms.iter().filter(|(w, _)| w.len() == k.degree()) {
            if w.projection(self.n) == *k {
                out.accumulate(w.clone(), c.clone());
            }
        }
        out
    }
}

/// Concatenation product; words longer than the cap are dropped and flagged.
pub fn fmul<S: Scalar>(f: &FreeSeries<S>, g: &FreeSeries<S>) -> Result<FreeSeries<S>> {
    f.check_compatible(g)?;
    let cap = f.degree_cap.min(g.degree_cap);
    let mut out = FreeSeries::zero(f.n, cap);
    out.truncated = f.truncated || g.truncated;
    for (a, ca) in &f.terms {
        for (b, cb) in &g.terms {
            if a.len() + b.len() > cap {
                out.truncated = true;
                continue;
            }
            out.accumulate(a.concat(b), ca.clone() * cb.clone());
        }
    }
    Ok(out)
}

/// The free norm families.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum FreeNorm {
    /// `sum |c_alpha| rho^{|alpha|}`
    Taylor { rho: f64 },
    /// `sum |c_alpha| rho^{|alpha|} tau^{s(alpha)+1}`
    Universal { rho: f64, tau: f64 },
    /// `sum_d (sum_{|alpha|=d} |c_alpha|^2)^{1/2} rho^d`
    BallBullet { rho: f64 },
    /// `sum_k (sum_{p(alpha)=k} |c_alpha|^2)^{1/2} rho^{|k|}`
    BallCirc { rho: f64 },
    /// `sup_d (sum_{|alpha|=d} |c_alpha|^2)^{1/2} rho^d`. Not submultiplicative.
    BallSup { rho: f64 },
}

impl FreeNorm {
    pub fn rho(&self) -> f64 {
        match *self {
            FreeNorm::Taylor { rho }
            | FreeNorm::Universal { rho, .. }
            | FreeNorm::BallBullet { rho }
            | FreeNorm::BallCirc { rho }
            | FreeNorm::BallSup { rho } => rho,
        }
    }

    fn validate(&self) -> Result<()> {
        let rho = self.rho();
        if !(rho > 0.0 && rho.is_finite()) {
            return Err(Error::param(format!("rho must be positive, got {rho}")));
        }
        if let FreeNorm::Universal { tau, .. } = *self {
            if !(tau >= 1.0 && tau.is_finite()) {
                return Err(Error::param(format!("tau must be >= 1, got {tau}")));
            }
        }
        Ok(())
    }
}

pub fn fnorm<S: Scalar>(f: &FreeSeries<S>, family: FreeNorm) -> Result<f64> {
    family.validate()?;
    let pw = |rho: f64, d: usize| rho.powi(d as i32);
    let value = match family {
        FreeNorm::Taylor { rho } => f.terms.iter().map(|(w, c)| c.abs() * pw(rho, w.len())).sum(),
        FreeNorm::Universal { rho, tau } => {
            f.terms.iter().map(|(w, c)| c.abs() * pw(rho, w.len()) * tau.powi((w.switches() + 1) as i32)).sum()
        }
        FreeNorm::BallBullet { rho } => degree_blocks(f).iter().map(|(d, ss)| ss.sqrt() * pw(rho, *d)).sum(),
        FreeNorm::BallSup { rho } => degree_blocks(f).iter().map(|(d, ss)| ss.sqrt() * pw(rho, *d)).fold(0.0, f64::max),
        FreeNorm::BallCirc { rho } => {
            let mut blocks: BTreeMap<MultiIndex, f64> = BTreeMap::new();
            for (w, c) in &f.terms {
                *blocks.entry(w.projection(f.n)).or_insert(0.0) += c.abs_sq_f64();
            }
            blocks.iter().map(|(k, ss)| ss.sqrt() * pw(rho, k.degree())).sum()
        }
    };
    Ok(value)
}

/// Sum of `|c_alpha|^2` per degree, ascending.
fn degree_blocks<S: Scalar>(f: &FreeSeries<S>) -> Vec<(usize, f64)> {
    let mut out: Vec<(usize, f64)> = Vec::new();
    for (w, c) in &f.terms {
        match out.last_mut() {
            Some((d, ss)) if *d == w.len() => *ss += c.abs_sq_f64(),
            _ => out.push((w.len(), c.abs_sq_f64())),
        }
    }
    out
}

/// An `n`-tuple of equal-size square complex matrices.
#[derive(Clone, Debug)]
pub struct MatrixTuple {
    mats: Vec<DMatrix<Complex64>>,
}

impl MatrixTuple {
    pub fn new(mats: Vec<DMatrix<Complex64>>) -> Result<Self> {
        let dim = mats.first().map(|m| m.nrows()).unwrap_or(0);
        for m in &mats {
            if m.nrows() != dim || m.ncols() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: m.nrows().max(m.ncols()) });
            }
            if m.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
                return Err(Error::param("matrix entries must be finite"));
            }
        }
        Ok(MatrixTuple { mats })
    }

    pub fn n(&self) -> usize {
        self.mats.len()
    }

    pub fn dim(&self) -> usize {
        self.mats.first().map(|m| m.nrows()).unwrap_or(0)
    }

    pub fn matrices(&self) -> &[DMatrix<Complex64>] {
        &self.mats
    }

    /// `T_alpha = T_{alpha_1} ... T_{alpha_d}`, identity for the empty word.
    pub fn word_product(&self, w: &Word) -> Result<DMatrix<Complex64>> {
        w.validate(self.n())?;
        let mut acc = DMatrix::identity(self.dim(), self.dim());
        for &l in w.letters().iter().rev() {
            acc = &self.mats[l as usize - 1] * acc;
        }
        Ok(acc)
    }
}

struct SparseRows {
    entries: Vec<(usize, usize, Complex64)>,
}

impl SparseRows {
    fn of(m: &DMatrix<Complex64>) -> Self {
        let mut entries = Vec::new();
        for c in 0..m.ncols() {
            for r in 0..m.nrows() {
                let v = m[(r, c)];
                if v.re != 0.0 || v.im != 0.0 {
                    entries.push((r, c, v));
                }
            }
        }
        SparseRows { entries }
    }

    /// `self * rhs`, touching only the stored nonzeros of `self`.
    fn mul_dense(&self, rhs: &DMatrix<Complex64>) -> DMatrix<Complex64> {
        let mut out = DMatrix::zeros(rhs.nrows(), rhs.ncols());
        for j in 0..rhs.ncols() {
            let src = rhs.column(j);
            let mut dst = out.column_mut(j);
            for &(r, c, v) in &self.entries {
                dst[r] += v * src[c];
            }
        }
        out
    }
}

/// `sum c_alpha T_alpha`, evaluated by nesting on the first letter:
/// `f(T) = c_* I + sum_i T_i f_i(T)`.
pub fn evaluate_free<S: Scalar>(f: &FreeSeries<S>, t: &MatrixTuple) -> Result<DMatrix<Complex64>> {
    if f.n != t.n() {
        return Err(Error::DimensionMismatch { expected: f.n, found: t.n() });
    }
    let sparse: Vec<SparseRows> = t.mats.iter().map(SparseRows::of).collect();
    let terms: Vec<(&[u8], Complex64)> = f.terms.iter().map(|(w, c)| (w.letters(), c.to_c64())).collect();
    Ok(eval_nested(&terms, &sparse, t.dim()))
}

fn eval_nested(terms: &[(&[u8], Complex64)], mats: &[SparseRows], dim: usize) -> DMatrix<Complex64> {
    let mut out = DMatrix::zeros(dim, dim);
    let mut by_first: BTreeMap<u8, Vec<(&[u8], Complex64)>> = BTreeMap::new();
    for &(w, c) in terms {
        match w.split_first() {
            None => {
                for i in 0..dim {
                    out[(i, i)] += c;
                }
            }
            Some((&l, rest)) => by_first.entry(l).or_default().push((rest, c)),
        }
    }
    for (l, sub) in by_first {
        let inner = eval_nested(&sub, mats, dim);
        out += mats[l as usize - 1].mul_dense(&inner);
    }
    out
}

/// Index of `e_alpha` in the truncated Fock basis ordered by (length, lex).
pub fn fock_index(w: &Word, n: usize) -> usize {
    let offset: usize = (0..w.len()).map(|d| n.pow(d as u32)).sum();
    let rank = w.letters().iter().fold(0usize, |acc, &l| acc * n + (l as usize - 1));
    offset + rank
}

pub fn fock_dimension(n: usize, depth: usize) -> usize {
    (0..=depth).map(|d| n.saturating_pow(d as u32)).fold(0usize, usize::saturating_add)
}

/// `(rho S_1, ..., rho S_n)` on the Fock space truncated at tensor degree
/// `depth`; `S_i e_alpha = e_{i alpha}`, and top-degree vectors go to zero.
pub fn fock_tuple(n: usize, rho: f64, depth: usize) -> Result<MatrixTuple> {
    fock_tuple_capped(n, rho, depth, FOCK_DIM_CAP)
}

pub fn fock_tuple_capped(n: usize, rho: f64, depth: usize, dim_cap: usize) -> Result<MatrixTuple> {
    if depth < 1 || n < 1 {
        return Err(Error::param("Fock truncation needs n >= 1 and depth >= 1"));
    }
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(Error::param(format!("rho must be positive, got {rho}")));
    }
    let dim = fock_dimension(n, depth);
    if dim > dim_cap {
        return Err(Error::SizeCap { size: dim, cap: dim_cap });
    }
    let mut mats = vec![DMatrix::<Complex64>::zeros(dim, dim); n];
    for d in 0..depth {
        for w in words_of_length(n, d) {
            let col = fock_index(&w, n);
            for (i, m) in mats.iter_mut().enumerate() {
                let row = fock_index(&Word::letter(i as u8 + 1).concat(&w), n);
                m[(row, col)] = Complex64::new(rho, 0.0);
            }
        }
    }
    MatrixTuple::new(mats)
}

/// Largest singular value estimated by power iteration on `M* M`.
///
/// 200 iterations at most, relative tolerance `1e-10`, all-ones start. The
/// Rayleigh quotient never exceeds the true value, so the estimate is a
/// lower bound.
pub fn operator_norm(m: &DMatrix<Complex64>) -> f64 {
    operator_norm_with(m, 200, 1e-10)
}

pub fn operator_norm_with(m: &DMatrix<Complex64>, iterations: usize, rel_tol: f64) -> f64 {
    let adj = m.adjoint();
    power_norm(m.ncols(), |v| m * v, |v| &adj * v, iterations, rel_tol)
}

fn power_norm(
    dim: usize,
    apply: impl Fn(&DVector<Complex64>) -> DVector<Complex64>,
    apply_adj: impl Fn(&DVector<Complex64>) -> DVector<Complex64>,
    iterations: usize,
    rel_tol: f64,
) -> f64 {
    if dim == 0 {
        return 0.0;
    }
    let mut v = DVector::from_element(dim, Complex64::new(1.0 / (dim as f64).sqrt(), 0.0));
    let mut lambda = 0.0f64;
    for _ in 0..iterations {
        let mv = apply(&v);
        let rq = mv.norm_squared();
        let w = apply_adj(&mv);
        let wn = w.norm();
        if wn == 0.0 {
            return rq.max(lambda).sqrt();
        }
        let converged = (rq - lambda).abs() <= rel_tol * rq;
        lambda = lambda.max(rq);
        if converged {
            break;
        }
        v = w / Complex64::new(wn, 0.0);
    }
    lambda.sqrt()
}

/// `f(rho S)` on the truncated Fock space, stored by columns:
/// `f(rho S) e_beta = sum c_alpha rho^{|alpha|} e_{alpha beta}`.
#[derive(Clone, Debug)]
pub struct FockOperator {
    dim: usize,
    cols: Vec<Vec<(usize, Complex64)>>,
}

impl FockOperator {
    pub fn new<S: Scalar>(f: &FreeSeries<S>, rho: f64, depth: usize) -> Result<Self> {
        if depth < 1 || f.n < 1 {
            return Err(Error::param("Fock truncation needs n >= 1 and depth >= 1"));
        }
        if !(rho > 0.0 && rho.is_finite()) {
            return Err(Error::param(format!("rho must be positive, got {rho}")));
        }
        let dim = fock_dimension(f.n, depth);
        if dim > FOCK_DIM_CAP {
            return Err(Error::SizeCap { size: dim, cap: FOCK_DIM_CAP });
        }
        let terms: Vec<(&Word, Complex64)> =
            f.terms.iter().map(|(w, c)| (w, c.to_c64() * rho.powi(w.len() as i32))).collect();
        let mut cols = vec![Vec::new(); dim];
        for d in 0..=depth {
            for beta in words_of_length(f.n, d) {
                let col = &mut cols[fock_index(&beta, f.n)];
                for (alpha, c) in terms.iter().filter(|(a, _)| a.len() + d <= depth) {
                    col.push((fock_index(&alpha.concat(&beta), f.n), *c));
                }
            }
        }
        Ok(FockOperator { dim, cols })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn apply(&self, v: &DVector<Complex64>) -> DVector<Complex64> {
        let mut out = DVector::zeros(self.dim);
        for (j, col) in self.cols.iter().enumerate() {
            for &(r, c) in col {
                out[r] += c * v[j];
            }
        }
        out
    }

    pub fn apply_adjoint(&self, v: &DVector<Complex64>) -> DVector<Complex64> {
        DVector::from_iterator(
            self.dim,
            self.cols.iter().map(|col| col.iter().map(|&(r, c)| c.conj() * v[r]).sum::<Complex64>()),
        )
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for (j, col) in self.cols.iter().enumerate() {
            for &(r, c) in col {
                m[(r, j)] += c;
            }
        }
        m
    }

    /// `||f(rho S) e_0||`
    pub fn vacuum_norm(&self) -> f64 {
        self.cols.first().map_or(0.0, |col| col.iter().map(|(_, c)| c.norm_sqr()).sum::<f64>().sqrt())
    }

    /// Power-iteration estimate with the same settings as [`operator_norm`].
    pub fn norm(&self) -> f64 {
        power_norm(self.dim, |v| self.apply(v), |v| self.apply_adjoint(v), 200, 1e-10)
    }
}

/// The three terms of the Fock sandwich for one series.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FockSandwich {
    /// `||f||^{(inf)}_rho`
    pub sup: f64,
    /// `||f(rho S) e_0||`, a lower bound for the operator norm.
    pub vacuum: f64,
    /// Power-iteration estimate of `||f(rho S)||`.
    pub power: f64,
    /// `||f||^bullet_rho`
    pub bullet: f64,
}

impl FockSandwich {
    /// The better of the two lower estimates of the operator norm.
    pub fn opnorm(&self) -> f64 {
        self.vacuum.max(self.power)
    }
}

pub fn fock_sandwich<S: Scalar>(f: &FreeSeries<S>, rho: f64, depth: usize) -> Result<FockSandwich> {
    if let Some(d) = f.max_degree() {
        if d > depth {
            return Err(Error::param(format!("series degree {d} exceeds Fock depth {depth}")));
        }
    }
    let op = FockOperator::new(f, rho, depth)?;
    Ok(FockSandwich {
        sup: fnorm(f, FreeNorm::BallSup { rho })?,
        vacuum: op.vacuum_norm(),
        power: op.norm(),
        bullet: fnorm(f, FreeNorm::BallBullet { rho })?,
    })
}

/// `r_d = (sup_{|alpha| = d} eval(alpha))^{1/d}` for `d = 1..=d_max`.
pub fn sprad_profile(n: usize, d_max: usize, eval: impl Fn(&Word) -> f64) -> Vec<f64> {
    (1..=d_max)
        .map(|d| {
            let sup = words_of_length(n, d).map(|w| eval(&w)).fold(0.0, f64::max);
            sup.powf(1.0 / d as f64)
        })
        .collect()
}
