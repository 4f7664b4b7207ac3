//! Coefficient domains.
//!
//! Two scalar types implement [`Scalar`]: [`ExactComplex`], the Gaussian
//! rationals Q(i) over arbitrary precision integers, and [`FloatComplex`], a
//! finite double precision complex number. Everything generic in the crate
//! (series, products, normal ordering) is written once against the trait.
//!
//! Transcendental values such as `e^{ih}` never appear as exact scalars. They
//! are carried either as truncated h-expansions ([`HPoly`]) or as floats.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// A commutative ring with unit, as far as the series code needs one.
pub trait Ring:
    Clone + PartialEq + fmt::Debug + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Neg<Output = Self>
{
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn from_i64(v: i64) -> Self;
}

/// A complex coefficient field.
pub trait Scalar: Ring + fmt::Display + Send + Sync + 'static {
    /// Whether arithmetic in this domain is exact.
    const EXACT: bool;

    fn from_ratio(num: i64, den: i64) -> Self;
    fn from_rational(r: &BigRational) -> Self;
    fn imag_unit() -> Self;
    fn inv(&self) -> Option<Self>;
    fn conj(&self) -> Self;
    /// `|a|^2` as an element of the same domain (a real number).
    fn abs_sq(&self) -> Self;
    fn abs_sq_f64(&self) -> f64;
    fn abs(&self) -> f64;
    /// `|a|^2` exactly, when the domain is exact.
    fn abs_sq_exact(&self) -> Option<BigRational>;
    fn to_c64(&self) -> Complex64;
    fn is_finite(&self) -> bool;

    /// Integer power; negative exponents need an invertible base.
    fn powi(&self, e: i64) -> Option<Self> {
        let base = if e < 0 { self.inv()? } else { self.clone() };
        let mut exp = e.unsigned_abs();
        let mut acc = Self::one();
        let mut sq = base;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = acc * sq.clone();
            }
            exp >>= 1;
            if exp > 0 {
                sq = sq.clone() * sq;
            }
        }
        Some(acc)
    }

    fn scale_f64(&self, _s: f64) -> Option<Self> {
        None
    }
}

// ---------------------------------------------------------------------------
// Exact Gaussian rationals
// ---------------------------------------------------------------------------

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct ExactComplex {
    pub re: BigRational,
    pub im: BigRational,
}

impl ExactComplex {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        ExactComplex { re, im }
    }

    pub fn real(re: BigRational) -> Self {
        ExactComplex { re, im: BigRational::zero() }
    }

    pub fn from_parts(re_num: i64, re_den: i64, im_num: i64, im_den: i64) -> Self {
        ExactComplex { re: ratio(re_num, re_den), im: ratio(im_num, im_den) }
    }

    /// Exact `re^2 + im^2`.
    pub fn norm_sq(&self) -> BigRational {
        &self.re * &self.re + &self.im * &self.im
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }
}

fn ratio(num: i64, den: i64) -> BigRational {
    assert!(den != 0, "zero denominator");
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

impl Add for ExactComplex {
    type Output = ExactComplex;
    fn add(self, rhs: Self) -> Self {
        ExactComplex { re: self.re + rhs.re, im: self.im + rhs.im }
    }
}

impl Sub for ExactComplex {
    type Output = ExactComplex;
    fn sub(self, rhs: Self) -> Self {
        ExactComplex { re: self.re - rhs.re, im: self.im - rhs.im }
    }
}

impl Mul for ExactComplex {
    type Output = ExactComplex;
    fn mul(self, rhs: Self) -> Self {
        &self * &rhs
    }
}

impl<'a> Mul<&'a ExactComplex> for &'a ExactComplex {
    type Output = ExactComplex;
    fn mul(self, rhs: &ExactComplex) -> ExactComplex {
        ExactComplex { re: &self.re * &rhs.re - &self.im * &rhs.im, im: &self.re * &rhs.im + &self.im * &rhs.re }
    }
}

impl Neg for ExactComplex {
    type Output = ExactComplex;
    fn neg(self) -> Self {
        ExactComplex { re: -self.re, im: -self.im }
    }
}

impl Ring for ExactComplex {
    fn zero() -> Self {
        ExactComplex { re: BigRational::zero(), im: BigRational::zero() }
    }
    fn one() -> Self {
        ExactComplex { re: BigRational::one(), im: BigRational::zero() }
    }
    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }
    fn from_i64(v: i64) -> Self {
        ExactComplex::real(BigRational::from_integer(BigInt::from(v)))
    }
}

impl Scalar for ExactComplex {
    const EXACT: bool = true;

    fn from_ratio(num: i64, den: i64) -> Self {
        ExactComplex::real(ratio(num, den))
    }
    fn from_rational(r: &BigRational) -> Self {
        ExactComplex::real(r.clone())
    }
    fn imag_unit() -> Self {
        ExactComplex { re: BigRational::zero(), im: BigRational::one() }
    }
    fn inv(&self) -> Option<Self> {
        let d = self.norm_sq();
        if d.is_zero() {
            return None;
        }
        Some(ExactComplex { re: &self.re / &d, im: -(&self.im / &d) })
    }
    fn conj(&self) -> Self {
        ExactComplex { re: self.re.clone(), im: -self.im.clone() }
    }
    fn abs_sq(&self) -> Self {
        ExactComplex::real(self.norm_sq())
    }
    fn abs_sq_f64(&self) -> f64 {
        rational_to_f64(&self.norm_sq())
    }
    fn abs(&self) -> f64 {
        let c = self.to_c64();
        c.re.hypot(c.im)
    }
    fn abs_sq_exact(&self) -> Option<BigRational> {
        Some(self.norm_sq())
    }
    fn to_c64(&self) -> Complex64 {
        Complex64::new(rational_to_f64(&self.re), rational_to_f64(&self.im))
    }
    fn is_finite(&self) -> bool {
        true
    }
}

pub fn rational_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
}

/// Field arithmetic in Q(i).
pub fn gaussian_arith(a: &ExactComplex, b: &ExactComplex, op: ArithOp) -> ExactComplex {
    match op {
        ArithOp::Add => a.clone() + b.clone(),
        ArithOp::Sub => a.clone() - b.clone(),
        ArithOp::Mul => a * b,
    }
}

fn fmt_rational(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Serialized as `a/b+c/d*i`; zero parts are omitted, `0` for zero.
impl fmt::Display for ExactComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.re.is_zero(), self.im.is_zero()) {
            (true, true) => write!(f, "0"),
            (false, true) => write!(f, "{}", fmt_rational(&self.re)),
            (true, false) => write!(f, "{}*i", fmt_rational(&self.im)),
            (false, false) => {
                let sign = if self.im.is_negative() { "-" } else { "+" };
                write!(f, "{}{}{}*i", fmt_rational(&self.re), sign, fmt_rational(&self.im.abs()))
            }
        }
    }
}

/// Parses `3/4`, `-2`, `0.125`, `1/2-3*i`, `i`, `-i`, `2/3*i`.
pub fn parse_rational(s: &str) -> std::result::Result<BigRational, String> {
    let s = s.trim();
    if s.is_empty() {
        return Err("empty number".into());
    }
    if let Some((n, d)) = s.split_once('/') {
        let n = BigInt::from_str(n.trim()).map_err(|e| format!("bad numerator `{n}`: {e}"))?;
        let d = BigInt::from_str(d.trim()).map_err(|e| format!("bad denominator `{d}`: {e}"))?;
        if d.is_zero() {
            return Err("zero denominator".into());
        }
        return Ok(BigRational::new(n, d));
    }
    if let Some((int_part, frac_part)) = s.split_once('.') {
        let negative = int_part.starts_with('-');
        let int_digits = int_part.trim_start_matches(['-', '+']);
        if !frac_part.chars().all(|c| c.is_ascii_digit())
            || !int_digits.chars().all(|c| c.is_ascii_digit())
            || (int_digits.is_empty() && frac_part.is_empty())
        {
            return Err(format!("bad decimal `{s}`"));
        }
        let digits = format!("{int_digits}{frac_part}");
        let num = BigInt::from_str(if digits.is_empty() { "0" } else { &digits })
            .map_err(|e| format!("bad decimal `{s}`: {e}"))?;
        let den = num_traits::pow(BigInt::from(10), frac_part.len());
        let r = BigRational::new(num, den);
        return Ok(if negative { -r } else { r });
    }
    BigInt::from_str(s).map(BigRational::from_integer).map_err(|e| format!("bad integer `{s}`: {e}"))
}

impl FromStr for ExactComplex {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if s.is_empty() {
            return Err("empty scalar".into());
        }
        let Some(body) = s.strip_suffix('i') else {
            return Ok(ExactComplex::real(parse_rational(&s)?));
        };
        let body = body.strip_suffix('*').unwrap_or(body);
        // split point: last sign that is not the leading character
        let split = body.char_indices().filter(|&(i, c)| i > 0 && (c == '+' || c == '-')).map(|(i, _)| i).last();
        let (re_str, im_str) = match split {
            Some(i) => (&body[..i], &body[i..]),
            None => ("", body),
        };
        let re = if re_str.is_empty() { BigRational::zero() } else { parse_rational(re_str)? };
        let im = match im_str {
            "" | "+" => BigRational::one(),
            "-" => -BigRational::one(),
            other => parse_rational(other.strip_prefix('+').unwrap_or(other))?,
        };
        Ok(ExactComplex { re, im })
    }
}

// ---------------------------------------------------------------------------
// Floating complex numbers
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, PartialEq, Debug, Default)]
pub struct FloatComplex(pub Complex64);

impl FloatComplex {
    pub fn new(re: f64, im: f64) -> Self {
        FloatComplex(Complex64::new(re, im))
    }

    pub fn try_new(re: f64, im: f64) -> Result<Self> {
        if re.is_finite() && im.is_finite() {
            Ok(FloatComplex::new(re, im))
        } else {
            Err(Error::param(format!("non-finite scalar ({re},{im})")))
        }
    }

    pub fn from_polar(r: f64, theta: f64) -> Self {
        FloatComplex(Complex64::from_polar(r, theta))
    }
}

impl From<Complex64> for FloatComplex {
    fn from(c: Complex64) -> Self {
        FloatComplex(c)
    }
}

impl Add for FloatComplex {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        FloatComplex(self.0 + rhs.0)
    }
}

impl Sub for FloatComplex {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        FloatComplex(self.0 - rhs.0)
    }
}

impl Mul for FloatComplex {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        FloatComplex(self.0 * rhs.0)
    }
}

impl Neg for FloatComplex {
    type Output = Self;
    fn neg(self) -> Self {
        FloatComplex(-self.0)
    }
}

impl Ring for FloatComplex {
    fn zero() -> Self {
        FloatComplex::new(0.0, 0.0)
    }
    fn one() -> Self {
        FloatComplex::new(1.0, 0.0)
    }
    fn is_zero(&self) -> bool {
        self.0.re == 0.0 && self.0.im == 0.0
    }
    fn from_i64(v: i64) -> Self {
        FloatComplex::new(v as f64, 0.0)
    }
}

impl Scalar for FloatComplex {
    const EXACT: bool = false;

    fn from_ratio(num: i64, den: i64) -> Self {
        FloatComplex::new(num as f64 / den as f64, 0.0)
    }
    fn from_rational(r: &BigRational) -> Self {
        FloatComplex::new(rational_to_f64(r), 0.0)
    }
    fn imag_unit() -> Self {
        FloatComplex::new(0.0, 1.0)
    }
    fn inv(&self) -> Option<Self> {
        if self.is_zero() {
            None
        } else {
            Some(FloatComplex(self.0.inv()))
        }
    }
    fn conj(&self) -> Self {
        FloatComplex(self.0.conj())
    }
    fn abs_sq(&self) -> Self {
        FloatComplex::new(self.0.norm_sqr(), 0.0)
    }
    fn abs_sq_f64(&self) -> f64 {
        self.0.norm_sqr()
    }
    fn abs(&self) -> f64 {
        self.0.norm()
    }
    fn abs_sq_exact(&self) -> Option<BigRational> {
        None
    }
    fn to_c64(&self) -> Complex64 {
        self.0
    }
    fn is_finite(&self) -> bool {
        self.0.re.is_finite() && self.0.im.is_finite()
    }
    fn powi(&self, e: i64) -> Option<Self> {
        if e < 0 && self.is_zero() {
            return None;
        }
        Some(FloatComplex(self.0.powi(e as i32)))
    }
    fn scale_f64(&self, s: f64) -> Option<Self> {
        Some(FloatComplex(self.0 * s))
    }
}

/// Serialized as the decimal pair `(re,im)`.
impl fmt::Display for FloatComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.0.re, self.0.im)
    }
}

impl FromStr for FloatComplex {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let s = s.trim();
        let inner = s
            .strip_prefix('(')
            .and_then(|t| t.strip_suffix(')'))
            .ok_or_else(|| format!("expected `(re,im)`, got `{s}`"))?;
        let (re, im) = inner.split_once(',').ok_or_else(|| format!("expected `(re,im)`, got `{s}`"))?;
        let re: f64 = re.trim().parse().map_err(|e| format!("bad real part `{re}`: {e}"))?;
        let im: f64 = im.trim().parse().map_err(|e| format!("bad imaginary part `{im}`: {e}"))?;
        FloatComplex::try_new(re, im).map_err(|e| e.to_string())
    }
}

// ---------------------------------------------------------------------------
// Laurent polynomials in one variable
// ---------------------------------------------------------------------------

/// A Laurent polynomial `sum c_n z^n` with exponents in `[-window, window]`.
#[derive(Clone, Debug)]
pub struct LaurentPoly {
    coeffs: BTreeMap<i64, ExactComplex>,
    window: i64,
}

impl PartialEq for LaurentPoly {
    fn eq(&self, other: &Self) -> bool {
        self.coeffs == other.coeffs
    }
}

impl LaurentPoly {
    pub const DEFAULT_WINDOW: i64 = 1 << 20;

    pub fn new(window: i64) -> Self {
        LaurentPoly { coeffs: BTreeMap::new(), window }
    }

    pub fn from_terms(window: i64, terms: impl IntoIterator<Item = (i64, ExactComplex)>) -> Result<Self> {
        let mut p = LaurentPoly::new(window);
        for (e, c) in terms {
            p.add_term(e, c)?;
        }
        Ok(p)
    }

    pub fn constant(c: ExactComplex) -> Self {
        let mut p = LaurentPoly::new(Self::DEFAULT_WINDOW);
        if !c.is_zero() {
            p.coeffs.insert(0, c);
        }
        p
    }

    /// The monomial `z^e`.
    pub fn monomial(e: i64) -> Self {
        let mut p = LaurentPoly::new(Self::DEFAULT_WINDOW.max(e.abs()));
        p.coeffs.insert(e, ExactComplex::one());
        p
    }

    pub fn window(&self) -> i64 {
        self.window
    }

    pub fn add_term(&mut self, e: i64, c: ExactComplex) -> Result<()> {
        if e.abs() > self.window {
            return Err(Error::OutOfRange(format!("exponent {e} outside window ±{}", self.window)));
        }
        let slot = self.coeffs.entry(e).or_insert_with(ExactComplex::zero);
        *slot = slot.clone() + c;
        if slot.is_zero() {
            self.coeffs.remove(&e);
        }
        Ok(())
    }

    pub fn coeff(&self, e: i64) -> ExactComplex {
        self.coeffs.get(&e).cloned().unwrap_or_else(ExactComplex::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (i64, &ExactComplex)> {
        self.coeffs.iter().map(|(e, c)| (*e, c))
    }

    pub fn min_exponent(&self) -> Option<i64> {
        self.coeffs.keys().next().copied()
    }

    pub fn max_exponent(&self) -> Option<i64> {
        self.coeffs.keys().next_back().copied()
    }

    /// `||f||_t = sum |c_n| t^{|n|}`, defined for `t >= 1`.
    pub fn norm(&self, t: f64) -> Result<f64> {
        laurent_norm(self, t)
    }

    /// Evaluate at a nonzero scalar.
    pub fn eval<S: Scalar>(&self, z: &S) -> Option<S> {
        let mut acc = S::zero();
        for (e, c) in &self.coeffs {
            acc = acc + to_scalar::<S>(c) * z.powi(*e)?;
        }
        Some(acc)
    }

    /// Exact division by a polynomial that divides `self`, `None` otherwise.
    pub fn div_exact(&self, divisor: &LaurentPoly) -> Option<LaurentPoly> {
        let (dmin, dmax) = (divisor.min_exponent()?, divisor.max_exponent()?);
        let lead_inv = divisor.coeff(dmax).inv()?;
        let mut rem = self.clone();
        rem.window = LaurentPoly::DEFAULT_WINDOW.max(self.window);
        let mut quot = LaurentPoly::new(self.window.max(divisor.window));
        while let Some(rmax) = rem.max_exponent() {
            let rmin = rem.min_exponent().unwrap();
            if rmax - dmax < rmin - dmin {
                return None;
            }
            let shift = rmax - dmax;
            let factor = rem.coeff(rmax) * lead_inv.clone();
            for (e, c) in divisor.terms() {
                rem.add_term(e + shift, -(c.clone() * factor.clone())).ok()?;
            }
            quot.add_term(shift, factor).ok()?;
        }
        Some(quot)
    }
}

pub fn laurent_norm(f: &LaurentPoly, t: f64) -> Result<f64> {
    if !(t >= 1.0) {
        return Err(Error::param(format!("Laurent norm needs t >= 1, got {t}")));
    }
    Ok(f.coeffs.iter().map(|(e, c)| c.abs() * t.powi(e.unsigned_abs() as i32)).sum())
}

/// Converts an exact coefficient into any scalar domain.
pub fn to_scalar<S: Scalar>(c: &ExactComplex) -> S {
    S::from_rational(&c.re) + S::from_rational(&c.im) * S::imag_unit()
}

impl Add for LaurentPoly {
    type Output = LaurentPoly;
    fn add(self, rhs: Self) -> Self {
        let mut out = self;
        out.window = out.window.max(rhs.window);
        for (e, c) in rhs.coeffs {
            out.add_term(e, c).expect("window covers both operands");
        }
        out
    }
}

impl Sub for LaurentPoly {
    type Output = LaurentPoly;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl Neg for LaurentPoly {
    type Output = LaurentPoly;
    fn neg(self) -> Self {
        LaurentPoly { coeffs: self.coeffs.into_iter().map(|(e, c)| (e, -c)).collect(), window: self.window }
    }
}

impl Mul for LaurentPoly {
    type Output = LaurentPoly;
    fn mul(self, rhs: Self) -> Self {
        let mut out = LaurentPoly::new(self.window.saturating_add(rhs.window));
        for (e1, c1) in &self.coeffs {
            for (e2, c2) in &rhs.coeffs {
                out.add_term(e1 + e2, c1 * c2).expect("window is the sum of windows");
            }
        }
        out
    }
}

impl Ring for LaurentPoly {
    fn zero() -> Self {
        LaurentPoly::new(Self::DEFAULT_WINDOW)
    }
    fn one() -> Self {
        LaurentPoly::constant(ExactComplex::one())
    }
    fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }
    fn from_i64(v: i64) -> Self {
        LaurentPoly::constant(ExactComplex::from_i64(v))
    }
}

impl fmt::Display for LaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .coeffs
            .iter()
            .map(|(e, c)| match e {
                0 => format!("({c})"),
                _ => format!("({c})*z^{e}"),
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

// ---------------------------------------------------------------------------
// Truncated h-polynomials
// ---------------------------------------------------------------------------

/// Coefficients of `h^0 .. h^order`; everything above `order` is discarded.
#[derive(Clone, PartialEq, Debug)]
pub struct HPoly<T> {
    coeffs: Vec<T>,
    order: usize,
}

impl<T: Clone> HPoly<T> {
    pub fn from_coeffs(mut coeffs: Vec<T>, order: usize) -> Self {
        coeffs.truncate(order + 1);
        HPoly { coeffs, order }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn get(&self, m: usize) -> Option<&T> {
        self.coeffs.get(m)
    }

    pub fn into_coeffs(self) -> Vec<T> {
        self.coeffs
    }
}

impl<T: Ring> HPoly<T> {
    pub fn zero(order: usize) -> Self {
        HPoly { coeffs: vec![T::zero(); order + 1], order }
    }

    pub fn one(order: usize) -> Self {
        let mut p = Self::zero(order);
        p.coeffs[0] = T::one();
        p
    }

    pub fn coeff(&self, m: usize) -> T {
        self.coeffs.get(m).cloned().unwrap_or_else(T::zero)
    }

    /// Truncated Cauchy product.
    pub fn mul(&self, rhs: &Self) -> Self {
        let order = self.order.min(rhs.order);
        let mut out = Self::zero(order);
        for (i, a) in self.coeffs.iter().enumerate().take(order + 1) {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate().take(order + 1 - i) {
                out.coeffs[i + j] = out.coeffs[i + j].clone() + a.clone() * b.clone();
            }
        }
        out
    }

    pub fn add(&self, rhs: &Self) -> Self {
        let order = self.order.min(rhs.order);
        let coeffs = (0..=order).map(|m| self.coeff(m) + rhs.coeff(m)).collect();
        HPoly { coeffs, order }
    }

    pub fn is_one(&self) -> bool {
        self.coeffs.iter().enumerate().all(|(m, c)| if m == 0 { *c == T::one() } else { c.is_zero() })
    }
}

/// Truncation of `e^{-ihs} = sum_m (-is)^m h^m / m!` at `h^order`.
pub fn hpoly_exp_factor(s: i64, order: usize) -> HPoly<ExactComplex> {
    let step = ExactComplex::new(BigRational::zero(), BigRational::from_integer(BigInt::from(-s)));
    let mut coeffs = Vec::with_capacity(order + 1);
    let mut c = ExactComplex::one();
    coeffs.push(c.clone());
    for m in 1..=order {
        c = &c * &step;
        c = ExactComplex { re: &c.re / BigInt::from(m), im: &c.im / BigInt::from(m) };
        coeffs.push(c.clone());
    }
    HPoly { coeffs, order }
}
