//! Plain-text series files.
//!
//! ```text
//! freeseries n=2 cap=4
//! 1/2 [1,2]
//! (0.5,-1) [2]
//! ```
//!
//! Each body line is a coefficient followed by a word `[..]`, a multi-index
//! `(..)`, or a multi-index and `p=<int>`. Coefficients written `(re,im)` are
//! floating point; anything else is read as an exact Gaussian rational. One
//! floating coefficient makes the whole series floating. Blank lines and
//! lines starting with `#` are skipped.

use std::collections::BTreeMap;
use std::fmt::{self, Write};
use std::str::FromStr;

use crate::combinatorics::{MultiIndex, Word};
use crate::deformation::DefoSeries;
use crate::error::{Error, Result};
use crate::free_series::FreeSeries;
use crate::quantum_series::{QContext, QSeries};
use crate::scalars::{ExactComplex, FloatComplex, Scalar};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SeriesKind {
    Free,
    Q,
    Defo,
}

impl SeriesKind {
    pub fn header(self) -> &'static str {
        match self {
            SeriesKind::Free => "freeseries",
            SeriesKind::Q => "qseries",
            SeriesKind::Defo => "defoseries",
        }
    }

    fn keys(self) -> &'static [&'static str] {
        match self {
            SeriesKind::Free => &["n", "cap"],
            SeriesKind::Q => &["n", "cap", "q"],
            SeriesKind::Defo => &["n", "cap", "zwin"],
        }
    }
}

impl fmt::Display for SeriesKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.header())
    }
}

/// A value whose scalars are either all exact or all floating point.
#[derive(Clone, Debug, PartialEq)]
pub enum Parsed<E, F> {
    Exact(E),
    Float(F),
}

pub type AnyFree = Parsed<FreeSeries<ExactComplex>, FreeSeries<FloatComplex>>;
pub type AnyQ =
    Parsed<(QSeries<ExactComplex>, QContext<ExactComplex>), (QSeries<FloatComplex>, QContext<FloatComplex>)>;
pub type AnyDefo = Parsed<DefoSeries<ExactComplex>, DefoSeries<FloatComplex>>;

#[derive(Clone, Debug, PartialEq)]
pub enum AnySeries {
    Free(AnyFree),
    Q(AnyQ),
    Defo(AnyDefo),
}

/// A coefficient as written.
#[derive(Clone, Debug, PartialEq)]
pub enum Coeff {
    Exact(ExactComplex),
    Float(FloatComplex),
}

impl Coeff {
    pub fn is_float(&self) -> bool {
        matches!(self, Coeff::Float(_))
    }

    pub fn exact(&self) -> Option<&ExactComplex> {
        match self {
            Coeff::Exact(c) => Some(c),
            Coeff::Float(_) => None,
        }
    }

    pub fn to_float(&self) -> FloatComplex {
        match self {
            Coeff::Exact(c) => FloatComplex(c.to_c64()),
            Coeff::Float(c) => *c,
        }
    }
}

impl FromStr for Coeff {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if s.trim_start().starts_with('(') {
            s.parse().map(Coeff::Float)
        } else {
            s.parse().map(Coeff::Exact)
        }
    }
}

struct Header {
    kind: SeriesKind,
    n: usize,
    cap: usize,
    q: Option<Coeff>,
    zwin: i64,
}

fn parse_header(line: &str, lineno: usize, expected: Option<SeriesKind>) -> Result<Header> {
    let mut tokens = line.split_whitespace();
    let name = tokens.next().ok_or_else(|| Error::parse(lineno, "missing header"))?;
    let kind = [SeriesKind::Free, SeriesKind::Q, SeriesKind::Defo]
        .into_iter()
        .find(|k| k.header() == name)
        .ok_or_else(|| Error::parse(lineno, format!("unknown series header `{name}`")))?;
    if let Some(e) = expected {
        if e != kind {
            return Err(Error::parse(lineno, format!("expected a `{e}` file, found `{kind}`")));
        }
    }
    let mut fields = BTreeMap::new();
    for t in tokens {
        let (key, value) =
            t.split_once('=').ok_or_else(|| Error::parse(lineno, format!("expected key=value, got `{t}`")))?;
        if !kind.keys().contains(&key) {
            return Err(Error::parse(lineno, format!("unknown header field `{key}` for {kind}")));
        }
        if fields.insert(key, value).is_some() {
            return Err(Error::parse(lineno, format!("duplicate header field `{key}`")));
        }
    }
    for key in kind.keys() {
        if !fields.contains_key(key) {
            return Err(Error::parse(lineno, format!("missing header field `{key}`")));
        }
    }
    let int = |key: &str| -> Result<i64> {
        fields[key].parse::<i64>().map_err(|e| Error::parse(lineno, format!("bad `{key}`: {e}")))
    };
    let n = int("n")?;
    if !(1..=255).contains(&n) {
        return Err(Error::parse(lineno, format!("n must be in 1..=255, got {n}")));
    }
    let cap = int("cap")?;
    if cap < 0 {
        return Err(Error::parse(lineno, "cap must be nonnegative"));
    }
    let q = match fields.get("q") {
        Some(v) => Some(v.parse::<Coeff>().map_err(|e| Error::parse(lineno, format!("bad q: {e}")))?),
        None => None,
    };
    let zwin = if kind == SeriesKind::Defo { int("zwin")? } else { 0 };
    if zwin < 0 {
        return Err(Error::parse(lineno, "zwin must be nonnegative"));
    }
    Ok(Header { kind, n: n as usize, cap: cap as usize, q, zwin })
}

enum Index {
    Word(Word),
    Multi(MultiIndex, i64),
}

struct Body {
    header: Header,
    lines: Vec<(usize, Coeff, Index)>,
}

fn parse_body(text: &str, expected: Option<SeriesKind>) -> Result<Body> {
    let mut lines =
        text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())).filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let (hline, htext) = lines.next().ok_or_else(|| Error::parse(1, "empty input"))?;
    let header = parse_header(htext, hline, expected)?;
    let mut out = Vec::new();
    for (lineno, l) in lines {
        let (ctok, rest) =
            l.split_once(char::is_whitespace).ok_or_else(|| Error::parse(lineno, "expected `coeff index`"))?;
        let coeff: Coeff = ctok.parse().map_err(|e| Error::parse(lineno, e))?;
        let rest = rest.trim();
        let index = match header.kind {
            SeriesKind::Free => {
                let w: Word = rest.parse().map_err(|e| Error::parse(lineno, format!("{e}")))?;
                w.validate(header.n).map_err(|e| Error::parse(lineno, e.to_string()))?;
                Index::Word(w)
            }
            SeriesKind::Q => Index::Multi(parse_multi(rest, header.n, lineno)?, 0),
            SeriesKind::Defo => {
                let (k, p) = rest
                    .rsplit_once(char::is_whitespace)
                    .ok_or_else(|| Error::parse(lineno, "expected `(k) p=<int>`"))?;
                let p = p
                    .trim()
                    .strip_prefix("p=")
                    .ok_or_else(|| Error::parse(lineno, "expected `p=<int>`"))?
                    .parse::<i64>()
                    .map_err(|e| Error::parse(lineno, format!("bad z exponent: {e}")))?;
                Index::Multi(parse_multi(k.trim(), header.n, lineno)?, p)
            }
        };
        out.push((lineno, coeff, index));
    }
    Ok(Body { header, lines: out })
}

fn parse_multi(s: &str, n: usize, lineno: usize) -> Result<MultiIndex> {
    let k: MultiIndex = s.parse().map_err(|e| Error::parse(lineno, format!("{e}")))?;
    if k.n() != n {
        return Err(Error::parse(lineno, format!("multi-index {k} has {} entries, expected {n}", k.n())));
    }
    Ok(k)
}

fn exact_coeff(c: &Coeff) -> ExactComplex {
    c.exact().cloned().expect("all coefficients exact")
}

fn float_coeff(c: &Coeff) -> FloatComplex {
    c.to_float()
}

fn any_float(body: &Body) -> bool {
    body.lines.iter().any(|(_, c, _)| c.is_float())
}

fn fill_free<S: Scalar>(body: &Body, conv: impl Fn(&Coeff) -> S) -> Result<FreeSeries<S>> {
    let mut f = FreeSeries::zero(body.header.n, body.header.cap);
    for (lineno, c, idx) in &body.lines {
        if let Index::Word(w) = idx {
            f.add_term(w.clone(), conv(c)).map_err(|e| Error::parse(*lineno, e.to_string()))?;
        }
    }
    Ok(f)
}

fn fill_q<S: Scalar>(body: &Body, conv: impl Fn(&Coeff) -> S) -> Result<QSeries<S>> {
    let mut f = QSeries::zero(body.header.n, body.header.cap);
    for (lineno, c, idx) in &body.lines {
        if let Index::Multi(k, _) = idx {
            f.add_term(k.clone(), conv(c)).map_err(|e| Error::parse(*lineno, e.to_string()))?;
        }
    }
    Ok(f)
}

fn fill_defo<S: Scalar>(body: &Body, conv: impl Fn(&Coeff) -> S) -> Result<DefoSeries<S>> {
    let h = &body.header;
    let mut a = DefoSeries::zero(h.n, h.cap, h.zwin);
    for (lineno, c, idx) in &body.lines {
        if let Index::Multi(k, p) = idx {
            a.add_term(k.clone(), *p, conv(c)).map_err(|e| Error::parse(*lineno, e.to_string()))?;
        }
    }
    Ok(a)
}

fn free_from(body: &Body) -> Result<AnyFree> {
    if any_float(body) {
        Ok(Parsed::Float(fill_free(body, float_coeff)?))
    } else {
        Ok(Parsed::Exact(fill_free(body, exact_coeff)?))
    }
}

fn q_from(body: &Body, line: usize) -> Result<AnyQ> {
    let h = &body.header;
    let q = h.q.as_ref().expect("q header present");
    let err = |e: Error| Error::parse(line, e.to_string());
    if q.is_float() || any_float(body) {
        let ctx = QContext::new(h.n, q.to_float()).map_err(err)?;
        Ok(Parsed::Float((fill_q(body, float_coeff)?, ctx)))
    } else {
        let ctx = QContext::new(h.n, exact_coeff(q)).map_err(err)?;
        Ok(Parsed::Exact((fill_q(body, exact_coeff)?, ctx)))
    }
}

fn defo_from(body: &Body) -> Result<AnyDefo> {
    if any_float(body) {
        Ok(Parsed::Float(fill_defo(body, float_coeff)?))
    } else {
        Ok(Parsed::Exact(fill_defo(body, exact_coeff)?))
    }
}

fn header_line(text: &str) -> usize {
    text.lines().position(|l| !l.trim().is_empty() && !l.trim().starts_with('#')).map_or(1, |i| i + 1)
}

/// Parses a series file of the given kind, or of any kind when `kind` is `None`.
pub fn parse_series(text: &str, kind: Option<SeriesKind>) -> Result<AnySeries> {
    let body = parse_body(text, kind)?;
    match body.header.kind {
        SeriesKind::Free => free_from(&body).map(AnySeries::Free),
        SeriesKind::Q => q_from(&body, header_line(text)).map(AnySeries::Q),
        SeriesKind::Defo => defo_from(&body).map(AnySeries::Defo),
    }
}

pub fn parse_free(text: &str) -> Result<AnyFree> {
    free_from(&parse_body(text, Some(SeriesKind::Free))?)
}

pub fn parse_q(text: &str) -> Result<AnyQ> {
    q_from(&parse_body(text, Some(SeriesKind::Q))?, header_line(text))
}

pub fn parse_defo(text: &str) -> Result<AnyDefo> {
    defo_from(&parse_body(text, Some(SeriesKind::Defo))?)
}

pub fn write_free<S: Scalar>(f: &FreeSeries<S>) -> String {
    let mut out = format!("freeseries n={} cap={}\n", f.n(), f.degree_cap());
    for (w, c) in f.terms() {
        writeln!(out, "{c} {w}").unwrap();
    }
    out
}

pub fn write_q<S: Scalar>(f: &QSeries<S>, ctx: &QContext<S>) -> String {
    let mut out = format!("qseries n={} cap={} q={}\n", f.n(), f.degree_cap(), ctx.q());
    for (k, c) in f.terms() {
        writeln!(out, "{c} {k}").unwrap();
    }
    out
}

pub fn write_defo<S: Scalar>(a: &DefoSeries<S>) -> String {
    let mut out = format!("defoseries n={} cap={} zwin={}\n", a.n(), a.degree_cap(), a.z_window());
    for (k, p, c) in a.terms() {
        writeln!(out, "{c} {k} p={p}").unwrap();
    }
    out
}

pub fn write_series(s: &AnySeries) -> String {
    match s {
        AnySeries::Free(Parsed::Exact(f)) => write_free(f),
        AnySeries::Free(Parsed::Float(f)) => write_free(f),
        AnySeries::Q(Parsed::Exact((f, c))) => write_q(f, c),
        AnySeries::Q(Parsed::Float((f, c))) => write_q(f, c),
        AnySeries::Defo(Parsed::Exact(a)) => write_defo(a),
        AnySeries::Defo(Parsed::Float(a)) => write_defo(a),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalars::Ring;

    #[test]
    fn free_example() {
        let s = parse_free("freeseries n=2 cap=4\n(1,0) [1,2]").unwrap();
        let Parsed::Float(f) = s else { panic!("expected float series") };
        assert_eq!(f.len(), 1);
        assert_eq!(f.coeff(&"[1,2]".parse().unwrap()), FloatComplex::new(1.0, 0.0));
    }

    #[test]
    fn q_example() {
        let Parsed::Float((f, ctx)) = parse_q("qseries n=2 cap=4 q=1/2\n(1,0) (1,1)").unwrap() else {
            panic!("expected float series")
        };
        assert_eq!(ctx.q(), &FloatComplex::new(0.5, 0.0));
        assert_eq!(f.coeff(&"(1,1)".parse().unwrap()), FloatComplex::one());
        let Parsed::Exact((f, ctx)) = parse_q("qseries n=2 cap=4 q=1/2\n1 (1,1)").unwrap() else {
            panic!("expected exact series")
        };
        assert_eq!(ctx.q().to_string(), "1/2");
        assert_eq!(f.len(), 1);
    }

    #[test]
    fn bad_letter_reports_line() {
        let err = parse_free("freeseries n=2 cap=4\n# comment\n1 [1,2]\n1 [3]").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 4, .. }), "{err:?}");
    }

    #[test]
    fn header_errors() {
        assert!(matches!(parse_q("freeseries n=2 cap=4\n"), Err(Error::Parse { line: 1, .. })));
        assert!(parse_free("freeseries n=2\n").is_err());
        assert!(parse_free("freeseries n=2 cap=4 q=1\n").is_err());
        assert!(matches!(parse_q("qseries n=2 cap=4 q=0\n"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse_free("freeseries n=2 cap=1\n1 [1,2]"), Err(Error::Parse { line: 2, .. })));
        assert!(parse_series("", None).is_err());
    }

    #[test]
    fn round_trips() {
        let texts = [
            "freeseries n=2 cap=4\n-1*i [2]\n1/2 [1,2]\n",
            "qseries n=3 cap=5 q=3/5+4/5*i\n2 (1,0,0)\n1/3-1/2*i (1,2,1)\n",
            "defoseries n=2 cap=4 zwin=6\n(1,0) (1,1) p=-1\n(0.5,-0.25) (2,0) p=3\n",
        ];
        for t in texts {
            let s = parse_series(t, None).unwrap();
            assert_eq!(write_series(&s), t);
        }
    }

    #[test]
    fn output_is_canonical() {
        let shuffled = "defoseries n=2 cap=4 zwin=6\n1 (2,0) p=0\n1 (0,1) p=2\n1 (0,1) p=-2\n";
        let s = parse_series(shuffled, Some(SeriesKind::Defo)).unwrap();
        assert_eq!(write_series(&s), "defoseries n=2 cap=4 zwin=6\n1 (0,1) p=-2\n1 (0,1) p=2\n1 (2,0) p=0\n");
    }
}
