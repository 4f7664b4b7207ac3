//! Words, multi-indices and the statistics that govern every weight:
//! letter counts `p`, inversions `m`, letter switches `s`, the bilinear form
//! `sigma`, preimage enumeration and q-numbers.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::scalars::{ExactComplex, LaurentPoly, Ring, Scalar};

/// Default bound on the number of words produced by [`enumerate_preimage`].
pub const DEFAULT_ENUM_CAP: u128 = 1_000_000;

/// The enumeration cap, overridable through `QDISK_MAX_ENUM`.
pub fn enumeration_cap() -> u128 {
    std::env::var("QDISK_MAX_ENUM").ok().and_then(|v| v.trim().parse().ok()).unwrap_or(DEFAULT_ENUM_CAP)
}

/// A word over the alphabet `{1..n}`; letters are stored 1-based.
///
/// Words are ordered by length first and lexicographically within a length.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Word(Vec<u8>);

impl Word {
    pub fn new(letters: Vec<u8>) -> Self {
        Word(letters)
    }

    /// Builds a word and checks every letter lies in `1..=n`.
    pub fn checked(letters: Vec<u8>, n: usize) -> Result<Self> {
        let w = Word(letters);
        w.validate(n)?;
        Ok(w)
    }

    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn letter(i: u8) -> Self {
        Word(vec![i])
    }

    pub fn letters(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        match self.0.iter().find(|&&l| l == 0 || l as usize > n) {
            Some(l) => Err(Error::OutOfRange(format!("letter {l} not in 1..={n}"))),
            None => Ok(()),
        }
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = Vec::with_capacity(self.len() + other.len());
        v.extend_from_slice(&self.0);
        v.extend_from_slice(&other.0);
        Word(v)
    }

    pub fn reversed(&self) -> Word {
        Word(self.0.iter().rev().copied().collect())
    }

    pub fn inversions(&self) -> u64 {
        inversions(&self.0)
    }

    pub fn switches(&self) -> i64 {
        switches(&self.0)
    }

    pub fn projection(&self, n: usize) -> MultiIndex {
        let mut k = vec![0u32; n];
        for &l in &self.0 {
            k[l as usize - 1] += 1;
        }
        MultiIndex(k)
    }
}

impl Ord for Word {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.len().cmp(&other.0.len()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, l) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{l}")?;
        }
        write!(f, "]")
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

fn bracketed<'a>(s: &'a str, open: char, close: char) -> std::result::Result<&'a str, String> {
    s.trim()
        .strip_prefix(open)
        .and_then(|t| t.strip_suffix(close))
        .ok_or_else(|| format!("expected `{open}...{close}`, got `{}`", s.trim()))
}

impl FromStr for Word {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let inner = bracketed(s, '[', ']')?;
        if inner.trim().is_empty() {
            return Ok(Word::empty());
        }
        inner
            .split(',')
            .map(|t| t.trim().parse::<u8>().map_err(|e| format!("bad letter `{}`: {e}", t.trim())))
            .collect::<std::result::Result<Vec<_>, _>>()
            .map(Word)
    }
}

/// An element of `Z_+^n`, ordered graded-lexicographically.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(entries: Vec<u32>) -> Self {
        MultiIndex(entries)
    }

    pub fn zeros(n: usize) -> Self {
        MultiIndex(vec![0; n])
    }

    /// The multi-index of the generator `x_i` (1-based).
    pub fn unit(n: usize, i: usize) -> Self {
        let mut k = vec![0; n];
        k[i - 1] = 1;
        MultiIndex(k)
    }

    pub fn entries(&self) -> &[u32] {
        &self.0
    }

    pub fn n(&self) -> usize {
        self.0.len()
    }

    /// `|k|`
    pub fn degree(&self) -> usize {
        self.0.iter().map(|&e| e as usize).sum()
    }

    pub fn add(&self, other: &MultiIndex) -> MultiIndex {
        debug_assert_eq!(self.n(), other.n());
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// `sigma(self, other) = sum_{i<j} self_i other_j`.
    pub fn sigma(&self, other: &MultiIndex) -> i64 {
        debug_assert_eq!(self.n(), other.n());
        let mut acc = 0i64;
        let mut prefix = 0i64;
        for (a, b) in self.0.iter().zip(&other.0) {
            acc += prefix * *b as i64;
            prefix += *a as i64;
        }
        acc
    }

    /// `sigma(k, k)`, the largest inversion number in `p^{-1}(k)`.
    pub fn self_sigma(&self) -> i64 {
        self.sigma(self)
    }

    /// Every multi-index of total degree `d` in `n` variables, in graded-lex order.
    pub fn all_of_degree(n: usize, d: usize) -> Vec<MultiIndex> {
        let mut out = Vec::new();
        let mut cur = vec![0u32; n];
        fn rec(i: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<MultiIndex>) {
            let n = cur.len();
            if i + 1 == n {
                cur[i] = left;
                out.push(MultiIndex(cur.clone()));
                return;
            }
            for e in 0..=left {
                cur[i] = e;
                rec(i + 1, left - e, cur, out);
            }
        }
        if n == 0 {
            if d == 0 {
                out.push(MultiIndex(Vec::new()));
            }
            return out;
        }
        rec(0, d as u32, &mut cur, &mut out);
        out.sort();
        out
    }

    /// Every multi-index with `|k| <= d_max`, in graded-lex order.
    pub fn all_up_to(n: usize, d_max: usize) -> Vec<MultiIndex> {
        (0..=d_max).flat_map(|d| MultiIndex::all_of_degree(n, d)).collect()
    }
}

impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree().cmp(&other.degree()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, ")")
    }
}

impl fmt::Debug for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for MultiIndex {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let inner = bracketed(s, '(', ')')?;
        if inner.trim().is_empty() {
            return Ok(MultiIndex(Vec::new()));
        }
        inner
            .split(',')
            .map(|t| t.trim().parse::<u32>().map_err(|e| format!("bad exponent `{}`: {e}", t.trim())))
            .collect::<std::result::Result<Vec<_>, _>>()
            .map(MultiIndex)
    }
}

pub fn inversions(letters: &[u8]) -> u64 {
    // counts of each letter seen so far, letters are small
    let mut seen = [0u64; 256];
    let mut inv = 0u64;
    for &l in letters {
        inv += seen[(l as usize + 1)..].iter().sum::<u64>();
        seen[l as usize] += 1;
    }
    inv
}

/// Number of adjacent unequal letters; `|w| - 1` for words of length <= 1.
pub fn switches(letters: &[u8]) -> i64 {
    if letters.len() <= 1 {
        return letters.len() as i64 - 1;
    }
    letters.windows(2).filter(|w| w[0] != w[1]).count() as i64
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WordStats {
    pub p: MultiIndex,
    pub m: u64,
    pub s: i64,
}

pub fn word_stats(w: &Word, n: usize) -> Result<WordStats> {
    w.validate(n)?;
    Ok(WordStats { p: w.projection(n), m: w.inversions(), s: w.switches() })
}

/// `sigma(k, l) = sum_{i<j} k_i l_j`.
pub fn sigma(k: &MultiIndex, l: &MultiIndex) -> Result<i64> {
    if k.n() != l.n() {
        return Err(Error::DimensionMismatch { expected: k.n(), found: l.n() });
    }
    Ok(k.sigma(l))
}

/// The ascending word `delta(k) = 1^{k_1} 2^{k_2} ... n^{k_n}`.
pub fn delta(k: &MultiIndex) -> Word {
    let mut v = Vec::with_capacity(k.degree());
    for (i, &e) in k.entries().iter().enumerate() {
        v.extend(std::iter::repeat_n(i as u8 + 1, e as usize));
    }
    Word(v)
}

/// All `n^d` words of length `d`, lexicographically.
pub fn words_of_length(n: usize, d: usize) -> impl Iterator<Item = Word> {
    let mut cur: Option<Vec<u8>> = if n == 0 && d > 0 { None } else { Some(vec![1u8; d]) };
    std::iter::from_fn(move || {
        let out = cur.take()?;
        let mut succ = out.clone();
        let mut i = d;
        while i > 0 {
            i -= 1;
            if (succ[i] as usize) < n {
                succ[i] += 1;
                cur = Some(succ);
                break;
            }
            succ[i] = 1;
        }
        Some(Word(out))
    })
}

/// `|k|! / k!`, the size of `p^{-1}(k)`.
pub fn multinomial(k: &MultiIndex) -> u128 {
    let mut acc: u128 = 1;
    let mut total: u128 = 0;
    for &e in k.entries() {
        for j in 1..=e as u128 {
            total += 1;
            // acc * total / j stays integral: acc holds a product of binomials
            acc = acc * total / j;
        }
    }
    acc
}

pub fn factorial(n: u64) -> u128 {
    (1..=n as u128).product()
}

/// Streaming lexicographic enumeration of `p^{-1}(k)`, starting at `delta(k)`.
pub struct Preimages {
    next: Option<Vec<u8>>,
}

impl Preimages {
    pub fn new(k: &MultiIndex) -> Self {
        Preimages { next: Some(delta(k).0) }
    }
}

impl Iterator for Preimages {
    type Item = Word;

    fn next(&mut self) -> Option<Word> {
        let cur = self.next.take()?;
        let mut succ = cur.clone();
        if next_permutation(&mut succ) {
            self.next = Some(succ);
        }
        Some(Word(cur))
    }
}

fn next_permutation(v: &mut [u8]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let mut i = v.len() - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = v.len() - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

/// All words with `p(alpha) = k`, lexicographically, `delta(k)` first.
pub fn enumerate_preimage(k: &MultiIndex) -> Result<Vec<Word>> {
    enumerate_preimage_capped(k, enumeration_cap())
}

pub fn enumerate_preimage_capped(k: &MultiIndex, cap: u128) -> Result<Vec<Word>> {
    let count = multinomial(k);
    if count > cap {
        return Err(Error::EnumerationTooLarge { count, cap });
    }
    Ok(Preimages::new(k).collect())
}

/// `[j]_q = 1 + q + ... + q^{j-1}`.
pub fn q_integer<R: Ring>(j: u32, q: &R) -> R {
    let mut acc = R::zero();
    let mut pow = R::one();
    for _ in 0..j {
        acc = acc + pow.clone();
        pow = pow * q.clone();
    }
    acc
}

/// `[j]_q! = [1]_q [2]_q ... [j]_q`.
pub fn q_factorial<R: Ring>(j: u32, q: &R) -> R {
    (1..=j).fold(R::one(), |acc, i| acc * q_integer(i, q))
}

/// `[k]_q! = prod_i [k_i]_q!`.
pub fn q_multifactorial<R: Ring>(k: &MultiIndex, q: &R) -> R {
    k.entries().iter().fold(R::one(), |acc, &e| acc * q_factorial(e, q))
}

/// `sum_{alpha in p^{-1}(k)} q^{m(alpha)}` as a polynomial in `q`, by enumeration.
pub fn inversion_polynomial(k: &MultiIndex) -> Result<LaurentPoly> {
    let count = multinomial(k);
    let cap = enumeration_cap();
    if count > cap {
        return Err(Error::EnumerationTooLarge { count, cap });
    }
    let top = k.self_sigma() as usize;
    let mut counts = vec![0i64; top + 1];
    for w in Preimages::new(k) {
        counts[w.inversions() as usize] += 1;
    }
    LaurentPoly::from_terms(
        LaurentPoly::DEFAULT_WINDOW,
        counts.into_iter().enumerate().filter(|(_, c)| *c != 0).map(|(s, c)| (s as i64, ExactComplex::from_i64(c))),
    )
}

#[derive(Clone, Debug, PartialEq)]
pub struct QRatio<R> {
    /// `[k]_q!`
    pub qfact_k: R,
    /// `[|k|]_q! / [k]_q!`
    pub ratio: R,
    /// `sum_{alpha in p^{-1}(k)} q^{m(alpha)}`
    pub inv_poly: LaurentPoly,
}

/// The q-multinomial ratio at a numeric `q`.
pub fn q_ratio<S: Scalar>(k: &MultiIndex, q: &S) -> Result<QRatio<S>> {
    let qfact_k = q_multifactorial(k, q);
    let inv = qfact_k.inv().ok_or_else(|| Error::DegenerateQ(format!("[k]_q! vanishes for k = {k}")))?;
    let ratio = q_factorial(k.degree() as u32, q) * inv;
    Ok(QRatio { qfact_k, ratio, inv_poly: inversion_polynomial(k)? })
}

/// The q-multinomial ratio as an exact polynomial in a formal `q`.
pub fn q_ratio_symbolic(k: &MultiIndex) -> Result<QRatio<LaurentPoly>> {
    let q = LaurentPoly::monomial(1);
    let qfact_k = q_multifactorial(k, &q);
    let ratio = q_factorial(k.degree() as u32, &q)
        .div_exact(&qfact_k)
        .ok_or_else(|| Error::DegenerateQ(format!("[k]_q! does not divide [|k|]_q! for k = {k}")))?;
    Ok(QRatio { qfact_k, ratio, inv_poly: inversion_polynomial(k)? })
}

impl Ring for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn from_i64(v: i64) -> Self {
        v as f64
    }
}
