//! Quotient norms of the quantum algebras computed as optimization problems
//! over free preimages, next to their closed forms.
//!
//! The ideal generated by `zeta_i zeta_j - q zeta_j zeta_i` is graded by
//! multi-index, so each monomial `g x^k` of a target gives an independent
//! problem over the words in `p^{-1}(k)` with the single constraint
//! `sum_alpha c_alpha q^{-m(alpha)} = g`.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use num_traits::One;

use crate::combinatorics::{delta, enumerate_preimage, MultiIndex, Word};
use crate::error::{Error, Result};
use crate::free_series::{fmul, FreeSeries};
use crate::quantum_series::{normal_order, qnorm, QContext, QNorm, QPowers, QSeries};
use crate::scalars::Scalar;

/// Above this many words the polydisk pair check runs over inversion classes.
pub const PAIR_CHECK_WORDS: usize = 2048;

const PAIR_STEPS: u32 = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Geometry {
    Polydisk,
    Ball,
}

impl Geometry {
    pub fn qnorm(self, rho: f64) -> QNorm {
        match self {
            Geometry::Polydisk => QNorm::Polydisk { rho },
            Geometry::Ball => QNorm::Ball { rho },
        }
    }
}

impl fmt::Display for Geometry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Geometry::Polydisk => "polydisk",
            Geometry::Ball => "ball",
        })
    }
}

impl FromStr for Geometry {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "polydisk" => Ok(Geometry::Polydisk),
            "ball" => Ok(Geometry::Ball),
            _ => Err(Error::param(format!("unknown geometry `{s}` (expected polydisk or ball)"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    ClosedForm,
    Oracle,
}

#[derive(Clone, Debug)]
pub struct QuotientProblem<S> {
    pub target: QSeries<S>,
    pub ctx: QContext<S>,
    pub rho: f64,
    pub geometry: Geometry,
}

/// Vertex enumeration for the polydisk l1 problem at radius 1.
#[derive(Clone, Debug)]
pub struct PolydiskOracle {
    pub value: f64,
    pub argmin: Word,
    pub vertices: usize,
    pub pairs_checked: usize,
    /// Smallest relative excess of a two-word combination over `value`; never negative at an optimum.
    pub min_pair_gap: f64,
    pub max_infeasibility: f64,
}

/// Minimum-norm least squares for the ball problem at radius 1.
#[derive(Clone, Debug)]
pub struct BallOracle {
    pub value: f64,
    pub coeffs: Vec<(Word, Complex64)>,
    pub constraint_residual: f64,
    /// Distance of the solution from the row space of the constraint.
    pub normal_residual: f64,
}

fn check_rho(rho: f64) -> Result<()> {
    if rho > 0.0 && rho.is_finite() {
        Ok(())
    } else {
        Err(Error::param(format!("rho must be positive, got {rho}")))
    }
}

/// `(word, q^{-m(word)})` for each word of `p^{-1}(k)`.
fn constraint_row<S: Scalar>(k: &MultiIndex, ctx: &QContext<S>) -> Result<Vec<(Word, Complex64)>> {
    let mut powers = QPowers::new(ctx);
    Ok(enumerate_preimage(k)?
        .into_iter()
        .map(|w| {
            let a = powers.get(-(w.inversions() as i64)).to_c64();
            (w, a)
        })
        .collect())
}

pub fn polydisk_oracle<S: Scalar>(k: &MultiIndex, g: Complex64, ctx: &QContext<S>) -> Result<PolydiskOracle> {
    let row = constraint_row(k, ctx)?;
    // the vertex supported on alpha is c_alpha = g / a_alpha
    let vertices: Vec<(Complex64, f64)> = row
        .iter()
        .map(|(_, a)| {
            let c = g / a;
            (c, c.norm())
        })
        .collect();
    let mut best = 0;
    let mut max_infeasibility: f64 = 0.0;
    for (i, ((_, a), (c, v))) in row.iter().zip(&vertices).enumerate() {
        max_infeasibility = max_infeasibility.max((a * c - g).norm());
        if *v < vertices[best].1 {
            best = i;
        }
    }
    let value = vertices[best].1;

    let reps: Vec<usize> = if row.len() <= PAIR_CHECK_WORDS {
        (0..row.len()).collect()
    } else {
        let mut seen = std::collections::BTreeMap::new();
        for (i, (w, _)) in row.iter().enumerate() {
            seen.entry(w.inversions()).or_insert(i);
        }
        seen.into_values().collect()
    };
    let mut pairs_checked = 0;
    let mut min_pair_gap = f64::INFINITY;
    for (x, &i) in reps.iter().enumerate() {
        for &j in &reps[x + 1..] {
            pairs_checked += 1;
            for step in 1..PAIR_STEPS {
                let t = step as f64 / PAIR_STEPS as f64;
                let ci = vertices[i].0 * t;
                let cj = vertices[j].0 * (1.0 - t);
                let feas = (row[i].1 * ci + row[j].1 * cj - g).norm();
                max_infeasibility = max_infeasibility.max(feas);
                let gap = (ci.norm() + cj.norm() - value) / value.max(f64::MIN_POSITIVE);
                min_pair_gap = min_pair_gap.min(gap);
            }
        }
    }
    if pairs_checked == 0 {
        min_pair_gap = 0.0;
    }
    Ok(PolydiskOracle {
        value,
        argmin: row[best].0.clone(),
        vertices: row.len(),
        pairs_checked,
        min_pair_gap,
        max_infeasibility,
    })
}

pub fn ball_oracle<S: Scalar>(k: &MultiIndex, g: Complex64, ctx: &QContext<S>) -> Result<BallOracle> {
    let row = constraint_row(k, ctx)?;
    let a = DMatrix::from_iterator(1, row.len(), row.iter().map(|(_, a)| *a));
    let b = DVector::from_element(1, g);
    let c =
        a.clone().svd(true, true).solve(&b, 1e-14).map_err(|e| Error::param(format!("least squares failed: {e}")))?;
    let constraint_residual = ((&a * &c)[0] - g).norm();
    // the minimum-norm solution is conj(a) * lambda
    let a_sq: f64 = row.iter().map(|(_, a)| a.norm_sqr()).sum();
    let lambda = (&a * &c)[0] / a_sq;
    let normal_residual =
        row.iter().zip(c.iter()).map(|((_, a), ci)| (ci - a.conj() * lambda).norm_sqr()).sum::<f64>().sqrt();
    Ok(BallOracle {
        value: c.norm(),
        coeffs: row.into_iter().map(|(w, _)| w).zip(c.iter().copied()).collect(),
        constraint_residual,
        normal_residual,
    })
}

/// Per-monomial comparison of the oracle with the closed form.
#[derive(Clone, Debug)]
pub struct MonomialReport {
    pub k: MultiIndex,
    pub closed_form: f64,
    pub oracle: f64,
    pub residual: f64,
}

#[derive(Clone, Debug)]
pub struct QuotientComparison {
    pub closed_form: f64,
    pub oracle: f64,
    pub rel_gap: f64,
    pub max_residual: f64,
    pub monomials: Vec<MonomialReport>,
}

impl<S: Scalar> QuotientProblem<S> {
    pub fn new(target: QSeries<S>, ctx: QContext<S>, rho: f64, geometry: Geometry) -> Result<Self> {
        check_rho(rho)?;
        if target.n() != ctx.n() {
            return Err(Error::DimensionMismatch { expected: ctx.n(), found: target.n() });
        }
        Ok(QuotientProblem { target, ctx, rho, geometry })
    }

    pub fn compare(&self) -> Result<QuotientComparison> {
        check_rho(self.rho)?;
        let mut monomials = Vec::with_capacity(self.target.len());
        for (k, c) in self.target.terms() {
            let single = QSeries::monomial(self.target.n(), self.target.degree_cap(), k.clone(), c.clone())?;
            let closed_form = qnorm(&single, &self.ctx, self.geometry.qnorm(self.rho))?;
            let scale = self.rho.powi(k.degree() as i32);
            let g = c.to_c64();
            let (value, residual) = match self.geometry {
                Geometry::Polydisk => {
                    let o = polydisk_oracle(k, g, &self.ctx)?;
                    (o.value, o.max_infeasibility.max(-o.min_pair_gap))
                }
                Geometry::Ball => {
                    let o = ball_oracle(k, g, &self.ctx)?;
                    (o.value, o.constraint_residual.max(o.normal_residual))
                }
            };
            monomials.push(MonomialReport { k: k.clone(), closed_form, oracle: value * scale, residual });
        }
        let closed_form: f64 = monomials.iter().map(|m| m.closed_form).sum();
        let oracle: f64 = monomials.iter().map(|m| m.oracle).sum();
        let rel_gap = if closed_form == 0.0 { oracle.abs() } else { (oracle - closed_form).abs() / closed_form };
        let max_residual = monomials.iter().map(|m| m.residual).fold(0.0, f64::max);
        Ok(QuotientComparison { closed_form, oracle, rel_gap, max_residual, monomials })
    }
}

pub fn quotient_norm<S: Scalar>(prob: &QuotientProblem<S>, mode: Mode) -> Result<f64> {
    match mode {
        Mode::ClosedForm => qnorm(&prob.target, &prob.ctx, prob.geometry.qnorm(prob.rho)),
        Mode::Oracle => Ok(prob.compare()?.oracle),
    }
}

fn abs_q_at_least_one<S: Scalar>(ctx: &QContext<S>) -> bool {
    match ctx.abs_q_sq_exact() {
        Some(r) => *r >= num_rational::BigRational::one(),
        None => ctx.abs_q_sq() >= 1.0,
    }
}

/// A free preimage of `x^k` attaining the quotient norm.
pub fn section_kappa<S: Scalar>(k: &MultiIndex, ctx: &QContext<S>, geometry: Geometry) -> Result<FreeSeries<S>> {
    if k.n() != ctx.n() {
        return Err(Error::DimensionMismatch { expected: ctx.n(), found: k.n() });
    }
    let cap = k.degree();
    match geometry {
        Geometry::Polydisk => {
            let d = delta(k);
            let word = if abs_q_at_least_one(ctx) { d } else { d.reversed() };
            let coeff = ctx.q_pow(word.inversions() as i64);
            FreeSeries::monomial(ctx.n(), cap, word, coeff)
        }
        Geometry::Ball => {
            let words = enumerate_preimage(k)?;
            let r = ctx.q().abs_sq();
            let mut r_pows = std::collections::HashMap::new();
            let mut r_inv =
                |m: u64| -> S { r_pows.entry(m).or_insert_with(|| r.powi(-(m as i64)).expect("q is nonzero")).clone() };
            let total = words.iter().fold(S::zero(), |acc, w| acc + r_inv(w.inversions()));
            let total_inv = total.inv().expect("a sum of positive reals");
            let mut powers = QPowers::new(ctx);
            let mut out = FreeSeries::zero(ctx.n(), cap);
            for w in words {
                let m = w.inversions();
                let c0 = r_inv(m) * total_inv.clone();
                out.add_term(w, c0 * powers.get(m as i64))?;
            }
            Ok(out)
        }
    }
}

/// `zeta_i zeta_j - q zeta_j zeta_i` for `i < j`.
pub fn relation<S: Scalar>(ctx: &QContext<S>, i: usize, j: usize) -> Result<FreeSeries<S>> {
    if !(1 <= i && i < j && j <= ctx.n()) {
        return Err(Error::param(format!("relation needs 1 <= i < j <= {}, got ({i},{j})", ctx.n())));
    }
    let (a, b) = (Word::new(vec![i as u8, j as u8]), Word::new(vec![j as u8, i as u8]));
    FreeSeries::from_terms(ctx.n(), 2, [(a, S::one()), (b, -ctx.q().clone())])
}

/// Largest coefficient of `normal_order(left * relation * right)`.
pub fn ideal_residual<S: Scalar>(
    ctx: &QContext<S>,
    (i, j): (usize, usize),
    left: &FreeSeries<S>,
    right: &FreeSeries<S>,
) -> Result<f64> {
    let rel = relation(ctx, i, j)?;
    let cap = left.max_degree().unwrap_or(0) + 2 + right.max_degree().unwrap_or(0);
    let prod = fmul(&fmul(&left.with_cap(cap)?, &rel.with_cap(cap)?)?, &right.with_cap(cap)?)?;
    let image = normal_order(&prod, ctx)?;
    Ok(image.terms().map(|(_, c)| c.abs()).fold(0.0, f64::max))
}

/// Whether normal ordering kills `left * relation * right`: exactly for exact
/// scalars, up to `1e-12` relative to the inputs otherwise.
pub fn verify_ideal<S: Scalar>(
    ctx: &QContext<S>,
    relation_index: (usize, usize),
    left: &FreeSeries<S>,
    right: &FreeSeries<S>,
) -> Result<bool> {
    let r = ideal_residual(ctx, relation_index, left, right)?;
    if S::EXACT {
        return Ok(r == 0.0);
    }
    let size = |f: &FreeSeries<S>| f.terms().map(|(_, c)| c.abs()).sum::<f64>();
    let scale = size(left) * size(right) * (1.0 + ctx.abs_q());
    Ok(r <= 1e-12 * scale.max(1.0))
}
