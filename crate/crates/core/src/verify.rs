//! Named invariant suites with machine-readable reports.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::Serialize;

use crate::combinatorics::{
    delta, enumerate_preimage, inversion_polynomial, multinomial, q_ratio_symbolic, word_stats, MultiIndex, Word,
};
use crate::deformation::{
    alpha_with_inversions, canonical_split, dmul, dmul_monomial, dnorm, fiber_eval, omega, rebuild, refinement_jumps,
};
use crate::error::{Error, Result};
use crate::free_series::{fmul, fnorm, fock_sandwich, sprad_profile, FreeNorm, FreeSeries};
use crate::quantum_series::{normal_order, qmul, qnorm, weight_sq_exact, QContext, QNorm, QSeries, Weight};
use crate::quotient_oracle::{section_kappa, verify_ideal, Geometry, QuotientProblem};
use crate::random;
use crate::scalars::{ExactComplex, FloatComplex, Ring, Scalar};
use crate::starprod::{poisson, star, star_fiber_compare, star_h, u_section_check, HSeries};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    Combinatorics,
    Norms,
    Quotient,
    Deformation,
    Star,
    Fock,
}

impl Suite {
    pub const ALL: [Suite; 6] =
        [Suite::Combinatorics, Suite::Norms, Suite::Quotient, Suite::Deformation, Suite::Star, Suite::Fock];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Combinatorics => "combinatorics",
            Suite::Norms => "norms",
            Suite::Quotient => "quotient",
            Suite::Deformation => "deformation",
            Suite::Star => "star",
            Suite::Fock => "fock",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL.into_iter().find(|x| x.name() == s).ok_or_else(|| Error::UnknownSuite(s.to_string()))
    }
}

/// `all` or a single suite name.
pub fn parse_suites(s: &str) -> Result<Vec<Suite>> {
    if s == "all" {
        Ok(Suite::ALL.to_vec())
    } else {
        Ok(vec![s.parse()?])
    }
}

#[derive(Clone, Debug)]
pub struct VerifyConfig {
    pub seed: u64,
    /// Largest alphabet for exhaustive loops.
    pub n_max: usize,
    /// Largest total degree for exhaustive loops.
    pub degree_max: usize,
    /// Random cases per property.
    pub cases: usize,
    pub q_values: Vec<ExactComplex>,
    pub rho: f64,
    pub tau: f64,
    pub star_order: usize,
    /// Relative tolerance for floating-point comparisons.
    pub tolerance: f64,
    pub timing: bool,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            seed: 20240607,
            n_max: 3,
            degree_max: 6,
            cases: 200,
            q_values: ["1/2", "2", "3/5+4/5*i", "3/4+1*i"].iter().map(|s| s.parse().unwrap()).collect(),
            rho: 0.7,
            tau: 1.5,
            star_order: 6,
            tolerance: 1e-9,
            timing: false,
        }
    }
}

impl VerifyConfig {
    pub const MAX_N: usize = 4;
    pub const MAX_DEGREE: usize = 8;
    pub const MAX_CASES: usize = 100_000;
    pub const MAX_STAR_ORDER: usize = 12;

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::param(what.to_string()));
        if !(2..=Self::MAX_N).contains(&self.n_max) {
            return bad(&format!("n_max must be in 2..={}", Self::MAX_N));
        }
        if !(1..=Self::MAX_DEGREE).contains(&self.degree_max) {
            return bad(&format!("degree_max must be in 1..={}", Self::MAX_DEGREE));
        }
        if self.cases == 0 || self.cases > Self::MAX_CASES {
            return bad(&format!("cases must be in 1..={}", Self::MAX_CASES));
        }
        if self.star_order > Self::MAX_STAR_ORDER {
            return bad(&format!("star order must be at most {}", Self::MAX_STAR_ORDER));
        }
        if self.q_values.is_empty() || self.q_values.iter().any(Ring::is_zero) {
            return bad("q values must be nonempty and nonzero");
        }
        if !(self.rho > 0.0 && self.rho.is_finite() && self.tau >= 1.0 && self.tau.is_finite()) {
            return bad("need rho > 0 and tau >= 1");
        }
        if !(self.tolerance > 0.0) {
            return bad("tolerance must be positive");
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct SuiteReport {
    pub suite: String,
    pub seed: u64,
    pub cases: u64,
    pub passed: u64,
    pub max_deviation: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_ms: Option<f64>,
    pub failures: Vec<String>,
}

impl SuiteReport {
    pub fn ok(&self) -> bool {
        self.passed == self.cases
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }
}

const MAX_LISTED_FAILURES: usize = 10;

struct Tally {
    cases: u64,
    passed: u64,
    max_dev: f64,
    failures: Vec<String>,
}

impl Tally {
    fn new() -> Self {
        Tally { cases: 0, passed: 0, max_dev: 0.0, failures: Vec::new() }
    }

    fn exact(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.record(ok, 0.0, what);
    }

    /// Records a floating comparison; `dev` enters the reported maximum.
    fn within(&mut self, dev: f64, tol: f64, what: impl FnOnce() -> String) {
        self.record(dev <= tol, dev, what);
    }

    fn record(&mut self, ok: bool, dev: f64, what: impl FnOnce() -> String) {
        self.cases += 1;
        if dev.is_finite() {
            self.max_dev = self.max_dev.max(dev);
        }
        if ok {
            self.passed += 1;
        } else if self.failures.len() < MAX_LISTED_FAILURES {
            self.failures.push(what());
        }
    }

    fn result<T>(&mut self, r: Result<T>, what: impl FnOnce() -> String) -> Option<T> {
        match r {
            Ok(v) => Some(v),
            Err(e) => {
                let msg = what();
                self.record(false, 0.0, || format!("{msg}: {e}"));
                None
            }
        }
    }
}

/// `max(0, lhs - rhs) / max(|rhs|, tiny)`: zero when `lhs <= rhs`.
fn excess(lhs: f64, rhs: f64) -> f64 {
    ((lhs - rhs) / rhs.abs().max(1e-300)).max(0.0)
}

fn rel_diff(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

pub fn run_verify(suite: Suite, cfg: &VerifyConfig) -> Result<SuiteReport> {
    cfg.validate()?;
    let start = Instant::now();
    let mut t = Tally::new();
    match suite {
        Suite::Combinatorics => combinatorics_suite(cfg, &mut t),
        Suite::Norms => norms_suite(cfg, &mut t),
        Suite::Quotient => quotient_suite(cfg, &mut t),
        Suite::Deformation => deformation_suite(cfg, &mut t),
        Suite::Star => star_suite(cfg, &mut t),
        Suite::Fock => fock_suite(cfg, &mut t),
    }
    Ok(SuiteReport {
        suite: suite.name().to_string(),
        seed: cfg.seed,
        cases: t.cases,
        passed: t.passed,
        max_deviation: t.max_dev,
        wall_time_ms: cfg.timing.then(|| start.elapsed().as_secs_f64() * 1e3),
        failures: t.failures,
    })
}

fn multi_indices(cfg: &VerifyConfig, degree_max: usize) -> impl Iterator<Item = MultiIndex> {
    (1..=cfg.n_max).flat_map(move |n| MultiIndex::all_up_to(n, degree_max))
}

fn combinatorics_suite(cfg: &VerifyConfig, t: &mut Tally) {
    for k in multi_indices(cfg, cfg.degree_max) {
        let Some(words) = t.result(enumerate_preimage(&k), || format!("enumerate {k}")) else { continue };
        t.exact(words.len() as u128 == multinomial(&k), || format!("card p^-1({k})"));
        t.exact(words.iter().all(|w| w.projection(k.n()) == k), || format!("projection of p^-1({k})"));
        if let (Some(poly), Some(ratio)) = (
            t.result(inversion_polynomial(&k), || format!("inversion polynomial {k}")),
            t.result(q_ratio_symbolic(&k), || format!("symbolic ratio {k}")),
        ) {
            t.exact(ratio.ratio == poly && ratio.inv_poly == poly, || format!("inversion identity at {k}"));
        }
        let d = delta(&k);
        t.exact(d.inversions() == 0 && d.projection(k.n()) == k, || format!("delta({k})"));
        t.exact(d.reversed().inversions() as i64 == k.self_sigma(), || format!("max inversions of {k}"));
        if k.degree() <= 7 {
            for q in &cfg.q_values {
                let Some(r) = q.abs_sq_exact() else { continue };
                let w = weight_sq_exact(&k, &r, Weight::W);
                let brute = weight_sq_exact(&k, &r, Weight::WBruteForce);
                t.exact(matches!((w, brute), (Ok(a), Ok(b)) if a == b), || format!("w_q({k}) at q = {q}"));
            }
        }
        for m in 0..=k.self_sigma() {
            let ok = alpha_with_inversions(&k, m)
                .and_then(|a| word_stats(&a, k.n()))
                .is_ok_and(|s| s.p == k && s.m as i64 == m && s.s <= k.n() as i64 + 2);
            t.exact(ok, || format!("alpha({k}, {m})"));
        }
    }
}

fn float_free(
    rng: &mut rand_chacha::ChaCha8Rng,
    n: usize,
    max_deg: usize,
    terms: usize,
    cap: usize,
) -> FreeSeries<FloatComplex> {
    random::free_series(rng, n, max_deg, terms, cap, random::float_coeff)
}

fn float_q(
    rng: &mut rand_chacha::ChaCha8Rng,
    n: usize,
    max_deg: usize,
    terms: usize,
    cap: usize,
) -> QSeries<FloatComplex> {
    random::q_series(rng, n, max_deg, terms, cap, random::float_coeff)
}

fn norms_suite(cfg: &VerifyConfig, t: &mut Tally) {
    use rand::Rng;
    let mut rng = random::rng(cfg.seed);
    let (rho, tau, tol) = (cfg.rho, cfg.tau, cfg.tolerance);
    let deg = cfg.degree_max.min(5);
    for _ in 0..cfg.cases {
        let n = rng.random_range(1..=cfg.n_max);
        let f = float_free(&mut rng, n, deg, 6, 2 * deg);
        let g = float_free(&mut rng, n, deg, 6, 2 * deg);
        let norm = |x: &FreeSeries<FloatComplex>, fam| fnorm(x, fam).expect("valid parameters");
        let taylor = norm(&f, FreeNorm::Taylor { rho });
        let univ = norm(&f, FreeNorm::Universal { rho, tau });
        let bullet = norm(&f, FreeNorm::BallBullet { rho });
        let circ = norm(&f, FreeNorm::BallCirc { rho });
        let sup = norm(&f, FreeNorm::BallSup { rho });
        t.within(excess(taylor, univ), 1e-12, || format!("taylor <= universal for {f:?}"));
        t.within(excess(univ, norm(&f, FreeNorm::Taylor { rho: rho * tau })), 1e-12, || {
            format!("universal <= taylor(rho tau) for {f:?}")
        });
        t.within(excess(bullet, circ), 1e-12, || format!("bullet <= circ for {f:?}"));
        t.within(excess(sup, bullet), 1e-12, || format!("sup <= bullet for {f:?}"));
        let wide = norm(&f, FreeNorm::BallBullet { rho: rho * (n as f64).sqrt() });
        t.within(excess(taylor, wide), 1e-12, || format!("taylor <= bullet(rho sqrt n) for {f:?}"));
        let fg = fmul(&f, &g).expect("same alphabet");
        for fam in [
            FreeNorm::Taylor { rho },
            FreeNorm::Universal { rho, tau },
            FreeNorm::BallBullet { rho },
            FreeNorm::BallCirc { rho },
        ] {
            t.within(excess(norm(&fg, fam), norm(&f, fam) * norm(&g, fam)), tol, || {
                format!("{fam:?} submultiplicative")
            });
        }
    }
    for q in &cfg.q_values {
        for _ in 0..cfg.cases / cfg.q_values.len() + 1 {
            let n = rng.random_range(1..=cfg.n_max);
            let ctx = QContext::new(n, FloatComplex(q.to_c64())).expect("nonzero q");
            let f = float_q(&mut rng, n, deg, 5, 2 * deg);
            let g = float_q(&mut rng, n, deg, 5, 2 * deg);
            let fg = qmul(&f, &g, &ctx).expect("same alphabet");
            for fam in [QNorm::Polydisk { rho }, QNorm::Ball { rho }] {
                let v = |x| qnorm(x, &ctx, fam).expect("valid parameters");
                t.within(excess(v(&fg), v(&f) * v(&g)), tol, || format!("{fam:?} submultiplicative at q = {q}"));
            }
            let ball = qnorm(&f, &ctx, QNorm::Ball { rho }).expect("valid");
            let alt = qnorm(&f, &ctx, QNorm::BallAlt { rho }).expect("valid");
            t.within(rel_diff(ball, alt), 1e-12, || format!("ball forms agree at q = {q}"));
        }
    }
    let d_max = cfg.degree_max.min(8);
    for n in 2..=cfg.n_max {
        let taylor = sprad_profile(n, d_max, |w| rho.powi(w.len() as i32));
        t.within(taylor.iter().map(|r| (r - rho).abs() / rho).fold(0.0, f64::max), 1e-12, || {
            format!("taylor profile n = {n}")
        });
        let univ = sprad_profile(n, d_max, |w| rho.powi(w.len() as i32) * tau.powi((w.switches() + 1) as i32));
        t.within(univ.iter().map(|r| (r - rho * tau).abs() / (rho * tau)).fold(0.0, f64::max), 1e-12, || {
            format!("universal profile n = {n}")
        });
        for q in &cfg.q_values {
            let ctx = QContext::new(n, q.clone()).expect("nonzero q");
            for fam in [QNorm::Polydisk { rho }, QNorm::Ball { rho }] {
                let prof = sprad_profile(n, d_max.min(6), |w| quantum_word_norm(w, &ctx, fam));
                t.within(prof.iter().map(|r| excess(*r, rho)).fold(0.0, f64::max), 1e-12, || {
                    format!("{fam:?} profile at q = {q}")
                });
            }
        }
    }
}

/// `||x_alpha||` in the quantum algebra.
pub fn quantum_word_norm<S: Scalar>(w: &Word, ctx: &QContext<S>, fam: QNorm) -> f64 {
    let f = FreeSeries::monomial(ctx.n(), w.len(), w.clone(), S::one()).expect("valid word");
    qnorm(&normal_order(&f, ctx).expect("same alphabet"), ctx, fam).expect("valid parameters")
}

fn quotient_suite(cfg: &VerifyConfig, t: &mut Tally) {
    use rand::Rng;
    let rho = cfg.rho;
    let deg = cfg.degree_max.min(6);
    for q in &cfg.q_values {
        for k in multi_indices(cfg, deg) {
            let n = k.n();
            let ctx = QContext::new(n, q.clone()).expect("nonzero q");
            let x = QSeries::monomial(n, k.degree(), k.clone(), ExactComplex::one()).expect("within cap");
            for geometry in [Geometry::Polydisk, Geometry::Ball] {
                let prob = QuotientProblem::new(x.clone(), ctx.clone(), rho, geometry).expect("valid problem");
                if let Some(c) = t.result(prob.compare(), || format!("{geometry} oracle at {k}, q = {q}")) {
                    t.within(c.rel_gap, cfg.tolerance, || format!("{geometry} oracle vs closed form at {k}, q = {q}"));
                    t.within(c.max_residual, 1e-12, || format!("{geometry} residual at {k}, q = {q}"));
                }
                let Some(s) = t.result(section_kappa(&k, &ctx, geometry), || format!("kappa {k}")) else { continue };
                t.exact(normal_order(&s, &ctx).is_ok_and(|p| p == x), || {
                    format!("{geometry} pi(kappa(x^{k})) at q = {q}")
                });
                let fam = match geometry {
                    Geometry::Polydisk => FreeNorm::Taylor { rho },
                    Geometry::Ball => FreeNorm::BallCirc { rho },
                };
                let lhs = fnorm(&s, fam).expect("valid");
                let rhs = qnorm(&x, &ctx, geometry.qnorm(rho)).expect("valid");
                t.within(rel_diff(lhs, rhs), 1e-12, || format!("{geometry} kappa attains the norm at {k}, q = {q}"));
            }
        }
    }
    let mut rng = random::rng(cfg.seed);
    for _ in 0..cfg.cases.min(100) {
        let n = rng.random_range(2..=cfg.n_max);
        let q = &cfg.q_values[rng.random_range(0..cfg.q_values.len())];
        let ctx = QContext::new(n, q.clone()).expect("nonzero q");
        let i = rng.random_range(1..n);
        let j = rng.random_range(i + 1..=n);
        let l = random::free_series(&mut rng, n, 3, 3, 3, random::exact_coeff);
        let r = random::free_series(&mut rng, n, 3, 3, 3, random::exact_coeff);
        t.exact(verify_ideal(&ctx, (i, j), &l, &r).unwrap_or(false), || format!("ideal ({i},{j}) at q = {q}"));
    }
}

fn deformation_suite(cfg: &VerifyConfig, t: &mut Tally) {
    use rand::Rng;
    // omega inequality, exhaustive on a small box
    let small = cfg.degree_max.min(4);
    for n in 1..=cfg.n_max.min(3) {
        let ks = MultiIndex::all_up_to(n, small);
        let mut bad = 0u64;
        let mut count = 0u64;
        for k in &ks {
            for l in &ks {
                for p in -20i64..=20 {
                    for s in -20i64..=20 {
                        let (m, e) = dmul_monomial(k, p, l, s);
                        count += 1;
                        if omega(&m, e).abs() > omega(k, p).abs() + omega(l, s).abs() {
                            bad += 1;
                        }
                    }
                }
            }
        }
        t.exact(bad == 0, || format!("omega inequality fails {bad} of {count} times for n = {n}"));
    }
    let mut rng = random::rng(cfg.seed);
    let (rho, tau) = (cfg.rho, cfg.tau);
    for _ in 0..cfg.cases {
        let n = rng.random_range(1..=cfg.n_max);
        let deg = cfg.degree_max.min(4);
        let a = random::defo_series(&mut rng, n, deg, 6, 4, 2 * deg, 40, random::exact_coeff);
        let b = random::defo_series(&mut rng, n, deg, 6, 4, 2 * deg, 40, random::exact_coeff);
        let split = canonical_split(&a);
        let rebuilt = split.as_ref().ok().and_then(|s| rebuild(n, a.degree_cap(), a.z_window(), s).ok());
        t.exact(rebuilt.as_ref() == Some(&a), || format!("split round trip {a:?}"));
        if let Ok(s) = &split {
            t.exact(s.iter().all(|x| x.word.switches() <= n as i64 + 2), || "split word switches".into());
        }
        let ab = dmul(&a, &b).expect("same alphabet");
        t.exact(!ab.is_truncated(), || "product left the window".into());
        let lhs = dnorm(&ab, rho, tau).expect("valid");
        let rhs = dnorm(&a, rho, tau).expect("valid") * dnorm(&b, rho, tau).expect("valid");
        t.within(excess(lhs, rhs), cfg.tolerance, || "dnorm submultiplicative".into());
        let q = &cfg.q_values[rng.random_range(0..cfg.q_values.len())];
        let ctx = QContext::new(n, q.clone()).expect("nonzero q");
        let hom = (|| -> Result<bool> {
            Ok(fiber_eval(&ab, &ctx)? == qmul(&fiber_eval(&a, &ctx)?, &fiber_eval(&b, &ctx)?, &ctx)?)
        })();
        t.exact(hom.unwrap_or(false), || format!("fiber homomorphism at q = {q}"));
    }
    for i in 0..cfg.cases.min(20) {
        let n = rng.random_range(1..=cfg.n_max);
        let a = random::defo_series(&mut rng, n, 3, 3, 4, 3, 3, random::exact_coeff);
        let geometry = if i % 2 == 0 { Geometry::Polydisk } else { Geometry::Ball };
        if let Some(j) = t.result(refinement_jumps(&a, 0.5, geometry, (0.5, 2.0, 0.3), 9, 4), || "profile".into()) {
            t.exact(j[2] <= j[0] / 2.0 && j[3] <= j[1] / 2.0, || format!("refinement jumps {j:?}"));
        }
    }
}

fn star_suite(cfg: &VerifyConfig, t: &mut Tally) {
    use rand::Rng;
    let order = cfg.star_order;
    for n in 2..=cfg.n_max {
        for j in 1..=n {
            for k in 1..=n {
                let xj = QSeries::<ExactComplex>::generator(n, 2, j).expect("valid generator");
                let xk = QSeries::<ExactComplex>::generator(n, 2, k).expect("valid generator");
                let s = star(&xj, &xk, order).expect("same alphabet");
                let e = crate::scalars::hpoly_exp_factor(if j > k { 1 } else { 0 }, order);
                let m = MultiIndex::unit(n, j).add(&MultiIndex::unit(n, k));
                let ok = (0..=order)
                    .all(|i| s.coeff(i) == Some(&QSeries::monomial(n, 2, m.clone(), e.coeff(i)).expect("within cap")));
                t.exact(ok, || format!("x_{j} * x_{k} relation"));
            }
        }
    }
    let mut rng = random::rng(cfg.seed);
    for _ in 0..cfg.cases.min(100) {
        let n = rng.random_range(2..=cfg.n_max);
        let mut draw = || random::q_series(&mut rng, n, 4, 3, 12, random::exact_coeff);
        let (f, g, w) = (draw(), draw(), draw());
        let h = |x: &QSeries<ExactComplex>| HSeries::constant(x.clone(), order);
        let assoc = (|| -> Result<bool> {
            let left = star_h(&star(&f, &g, order)?, &h(&w))?;
            let right = star_h(&h(&f), &star(&g, &w, order)?)?;
            Ok(left == right)
        })();
        t.exact(assoc.unwrap_or(false), || "star associativity".into());
        let comm = star(&f, &g, 1.min(order)).and_then(|a| a.sub(&star(&g, &f, 1.min(order))?));
        let classical = f.commutative_mul(&g).ok();
        let fg = star(&f, &g, 0).ok().and_then(|s| s.coeff(0).cloned());
        t.exact(fg.is_some() && fg == classical, || "h^0 coefficient is the commutative product".into());
        if order >= 1 {
            let ip = poisson(&f, &g).map(|p| p.scale(&ExactComplex::imag_unit()));
            t.exact(matches!((&comm, &ip), (Ok(c), Ok(p)) if c.coeff(1) == Some(p)), || {
                "h^1 commutator is i {f,g}".into()
            });
        }
        let jacobi = (|| -> Result<bool> {
            let a = poisson(&f, &poisson(&g, &w)?)?;
            let b = poisson(&g, &poisson(&w, &f)?)?;
            let c = poisson(&w, &poisson(&f, &g)?)?;
            Ok(a.add(&b)?.add(&c)?.is_zero())
        })();
        t.exact(jacobi.unwrap_or(false), || "Jacobi identity".into());
        let leibniz = (|| -> Result<bool> {
            let lhs = poisson(&f, &g.commutative_mul(&w)?)?;
            let rhs = poisson(&f, &g)?.commutative_mul(&w)?.add(&g.commutative_mul(&poisson(&f, &w)?)?)?;
            Ok(lhs == rhs)
        })();
        t.exact(leibniz.unwrap_or(false), || "Leibniz rule".into());
        for hv in [0.1, 1.0] {
            if let Some(d) = t.result(star_fiber_compare(&f, &g, hv), || "star vs fiber".into()) {
                t.within(d, 1e-10, || format!("star vs fiber at h = {hv}"));
            }
        }
    }
    for k in multi_indices(cfg, cfg.degree_max.min(6)) {
        t.exact(u_section_check(&k, order.min(4)).unwrap_or(false), || format!("u_{k} section"));
    }
}

fn fock_suite(cfg: &VerifyConfig, t: &mut Tally) {
    use rand::Rng;
    let mut rng = random::rng(cfg.seed);
    for _ in 0..cfg.cases.min(200) {
        let n = rng.random_range(1..=cfg.n_max.min(3));
        let depth = rng.random_range(1..=cfg.degree_max.min(6));
        let rho = rng.random_range(0.2..1.2);
        let f = float_free(&mut rng, n, depth - 1, 8, depth);
        let Some(s) = t.result(fock_sandwich(&f, rho, depth), || format!("fock sandwich n = {n}, depth = {depth}"))
        else {
            continue;
        };
        t.within(excess(s.sup, s.vacuum), 1e-12, || format!("sup <= vacuum for {f:?}"));
        t.within(excess(s.opnorm(), s.bullet), 1e-8, || format!("opnorm <= bullet for {f:?}"));
    }
    // single-generator sanity: ||rho S_i|| = rho
    for n in 1..=cfg.n_max.min(3) {
        let f = FreeSeries::<FloatComplex>::generator(n, 1, 1).expect("valid generator");
        if let Some(s) = t.result(fock_sandwich(&f, cfg.rho, 3), || "generator sandwich".into()) {
            t.within(rel_diff(s.opnorm(), cfg.rho), 1e-8, || format!("||rho S_1|| for n = {n}"));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> VerifyConfig {
        VerifyConfig { degree_max: 4, cases: 20, star_order: 3, ..VerifyConfig::default() }
    }

    #[test]
    fn suites_pass_on_small_config() {
        for s in Suite::ALL {
            let r = run_verify(s, &small()).unwrap();
            assert!(r.ok(), "{}", r.to_json());
            assert!(r.cases > 0);
        }
    }

    #[test]
    fn reports_are_deterministic() {
        let a = run_verify(Suite::Norms, &small()).unwrap().to_json();
        let b = run_verify(Suite::Norms, &small()).unwrap().to_json();
        assert_eq!(a, b);
        assert!(!a.contains("wall_time"));
    }

    #[test]
    fn bad_configs_rejected() {
        assert!(matches!("bogus".parse::<Suite>(), Err(Error::UnknownSuite(_))));
        assert_eq!(parse_suites("all").unwrap().len(), 6);
        let cfg = VerifyConfig { degree_max: 40, ..VerifyConfig::default() };
        assert!(run_verify(Suite::Combinatorics, &cfg).is_err());
    }
}
