//! End-to-end acceptance checks. Every reference value here is recomputed
//! from first principles in this file (own word enumeration, own inversion
//! counts, own q-factorials, own Fock matrices) and compared with the
//! library. Prints one PASS/FAIL line per check and exits nonzero on failure.

use std::collections::HashMap;
use std::process::ExitCode;
use std::time::Instant;

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::Rng;

use qdisk_core::combinatorics::{enumerate_preimage, inversion_polynomial, multinomial, q_ratio_symbolic, MultiIndex};
use qdisk_core::deformation::{
    alpha_with_inversions, canonical_split, dmul, dmul_monomial, dnorm, fiber_norm_profile, omega, radial_grid,
    rebuild, refinement_jumps, DefoSeries,
};
use qdisk_core::free_series::{fmul, fnorm, fock_sandwich, sprad_profile, FreeNorm, FreeSeries};
use qdisk_core::quantum_series::{qmul, qnorm, weight_sq_exact, QContext, QNorm, QSeries, Weight};
use qdisk_core::quotient_oracle::{polydisk_oracle, quotient_norm, section_kappa, Geometry, Mode, QuotientProblem};
use qdisk_core::random;
use qdisk_core::scalars::{ExactComplex, FloatComplex, Ring, Scalar};
use qdisk_core::starprod::{poisson, rieffel_defect, star, star_fiber_compare, star_h, HSeries};
use qdisk_core::verify::quantum_word_norm;

type E = ExactComplex;
type Outcome = Result<String, String>;

const SEED: u64 = 0x5eed_ac1d;

// ---------------------------------------------------------------------------
// independent reference computations
// ---------------------------------------------------------------------------

/// All words with letter counts `k`, by recursion on the first letter.
fn words(k: &[u32]) -> Vec<Vec<u8>> {
    fn go(rem: &mut Vec<u32>, cur: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
        if rem.iter().all(|&c| c == 0) {
            out.push(cur.clone());
            return;
        }
        for i in 0..rem.len() {
            if rem[i] > 0 {
                rem[i] -= 1;
                cur.push(i as u8 + 1);
                go(rem, cur, out);
                cur.pop();
                rem[i] += 1;
            }
        }
    }
    let mut out = Vec::new();
    go(&mut k.to_vec(), &mut Vec::new(), &mut out);
    out
}

fn inv(w: &[u8]) -> u64 {
    let mut c = 0;
    for i in 0..w.len() {
        for j in i + 1..w.len() {
            if w[i] > w[j] {
                c += 1;
            }
        }
    }
    c
}

/// Adjacent unequal letters, with `s = |w| - 1` for `|w| <= 1`.
fn switches(w: &[u8]) -> i64 {
    if w.len() <= 1 {
        return w.len() as i64 - 1;
    }
    w.windows(2).filter(|p| p[0] != p[1]).count() as i64
}

fn counts(w: &[u8], n: usize) -> Vec<u32> {
    let mut c = vec![0; n];
    for &l in w {
        c[l as usize - 1] += 1;
    }
    c
}

/// `sum_{i<j} k_i l_j`
fn sigma(k: &[u32], l: &[u32]) -> i64 {
    let mut s = 0;
    for i in 0..k.len() {
        for j in i + 1..k.len() {
            s += k[i] as i64 * l[j] as i64;
        }
    }
    s
}

fn omega_ref(k: &[u32], p: i64) -> i64 {
    let (lo, hi) = (p, p + sigma(k, k));
    if lo > 0 {
        lo
    } else if hi < 0 {
        hi
    } else {
        0
    }
}

fn fact(n: u32) -> u128 {
    (1..=n as u128).product()
}

fn poly_mul(a: &[i128], b: &[i128]) -> Vec<i128> {
    let mut out = vec![0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// `[j]_q! = prod_{t <= j} (1 + q + ... + q^{t-1})`
fn q_fact(j: u32) -> Vec<i128> {
    (1..=j).fold(vec![1], |acc, t| poly_mul(&acc, &vec![1; t as usize]))
}

fn e_int(v: i64) -> E {
    E::from_i64(v)
}

fn rat(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

fn excess(lhs: f64, rhs: f64) -> f64 {
    ((lhs - rhs) / rhs.abs().max(1e-300)).max(0.0)
}

fn mi(k: &[u32]) -> MultiIndex {
    MultiIndex::new(k.to_vec())
}

fn q_values() -> Vec<E> {
    vec![E::real(rat(1, 2)), E::from_i64(2), E::new(rat(3, 5), rat(4, 5)), E::new(rat(3, 4), rat(1, 1))]
}

fn indices(n_max: usize, d_max: usize) -> Vec<Vec<u32>> {
    (1..=n_max).flat_map(|n| MultiIndex::all_up_to(n, d_max)).map(|k| k.entries().to_vec()).collect()
}

/// Tracks the first failures and the worst deviation of one check.
struct Check {
    cases: u64,
    worst: f64,
    failures: Vec<String>,
}

impl Check {
    fn new() -> Self {
        Check { cases: 0, worst: 0.0, failures: Vec::new() }
    }

    fn ok(&mut self, cond: bool, what: impl FnOnce() -> String) {
        self.cases += 1;
        if !cond && self.failures.len() < 5 {
            self.failures.push(what());
        }
    }

    fn within(&mut self, dev: f64, tol: f64, what: impl FnOnce() -> String) {
        if dev.is_finite() {
            self.worst = self.worst.max(dev);
        }
        self.ok(dev <= tol, || format!("{} (deviation {dev:.3e})", what()));
    }

    fn finish(self) -> Outcome {
        if self.failures.is_empty() {
            Ok(format!("{} cases, worst deviation {:.2e}", self.cases, self.worst))
        } else {
            Err(format!("{} cases: {}", self.cases, self.failures.join("; ")))
        }
    }
}

// ---------------------------------------------------------------------------
// checks
// ---------------------------------------------------------------------------

fn inversion_identity() -> Outcome {
    let mut c = Check::new();
    for k in indices(4, 8) {
        let d = k.iter().sum::<u32>();
        let mut gen = vec![0i128; (sigma(&k, &k) + 1) as usize];
        for w in words(&k) {
            gen[inv(&w) as usize] += 1;
        }
        // gen * prod [k_i]! == [|k|]!
        let lhs = k.iter().fold(gen.clone(), |acc, &e| poly_mul(&acc, &q_fact(e)));
        c.ok(lhs == q_fact(d), || format!("generating identity at {k:?}"));
        let m = mi(&k);
        let lib = inversion_polynomial(&m).map_err(|e| e.to_string())?;
        let same = (0..gen.len()).all(|e| lib.coeff(e as i64) == e_int(gen[e] as i64))
            && lib.min_exponent().unwrap_or(0) >= 0
            && lib.max_exponent() == Some(gen.len() as i64 - 1);
        c.ok(same, || format!("library inversion polynomial at {k:?}"));
        let ratio = q_ratio_symbolic(&m).map_err(|e| e.to_string())?;
        c.ok(ratio.ratio == lib && ratio.inv_poly == lib, || format!("library q-factorial ratio at {k:?}"));
    }
    c.finish()
}

fn preimage_count() -> Outcome {
    let mut c = Check::new();
    for k in indices(4, 8) {
        let expected = fact(k.iter().sum()) / k.iter().map(|&e| fact(e)).product::<u128>();
        let mine = words(&k);
        let lib = enumerate_preimage(&mi(&k)).map_err(|e| e.to_string())?;
        let mut lib_sorted: Vec<Vec<u8>> = lib.iter().map(|w| w.letters().to_vec()).collect();
        lib_sorted.sort();
        let mut mine_sorted = mine.clone();
        mine_sorted.sort();
        c.ok(mine.len() as u128 == expected, || format!("own count at {k:?}"));
        c.ok(multinomial(&mi(&k)) == expected, || format!("multinomial at {k:?}"));
        c.ok(lib_sorted == mine_sorted, || format!("library preimage at {k:?}"));
    }
    c.finish()
}

fn weight_minimum() -> Outcome {
    let mut c = Check::new();
    for q in q_values() {
        let r = q.norm_sq();
        for k in indices(4, 7) {
            let brute = words(&k)
                .iter()
                .map(|w| num_traits::pow(r.clone(), inv(w) as usize))
                .min()
                .unwrap_or_else(BigRational::one);
            let lib = weight_sq_exact(&mi(&k), &r, Weight::W).map_err(|e| e.to_string())?;
            c.ok(lib == brute, || format!("w_q({k:?})^2 at |q|^2 = {r}: {lib} vs {brute}"));
        }
    }
    c.finish()
}

fn quotient_oracles() -> Outcome {
    let mut c = Check::new();
    let rho: f64 = 0.7;
    for q in q_values() {
        let aq = q.abs();
        for k in indices(4, 6) {
            let n = k.len();
            let d = k.iter().sum::<u32>() as i32;
            let ws = words(&k);
            let lp = ws.iter().map(|w| aq.powi(inv(w) as i32)).fold(f64::INFINITY, f64::min) * rho.powi(d);
            let ls = ws.iter().map(|w| aq.powi(-2 * inv(w) as i32)).sum::<f64>().powf(-0.5) * rho.powi(d);
            let ctx = QContext::new(n, q.clone()).map_err(|e| e.to_string())?;
            let x = QSeries::monomial(n, d as usize, mi(&k), E::one()).map_err(|e| e.to_string())?;
            for (geometry, closed, fam) in
                [(Geometry::Polydisk, lp, FreeNorm::Taylor { rho }), (Geometry::Ball, ls, FreeNorm::BallCirc { rho })]
            {
                let prob = QuotientProblem::new(x.clone(), ctx.clone(), rho, geometry).map_err(|e| e.to_string())?;
                let oracle = quotient_norm(&prob, Mode::Oracle).map_err(|e| e.to_string())?;
                let formula = quotient_norm(&prob, Mode::ClosedForm).map_err(|e| e.to_string())?;
                c.within(rel(oracle, closed), 1e-9, || format!("{geometry} oracle at {k:?}, q = {q}"));
                c.within(rel(formula, closed), 1e-9, || format!("{geometry} closed form at {k:?}, q = {q}"));

                let kappa = section_kappa(&mi(&k), &ctx, geometry).map_err(|e| e.to_string())?;
                // pi(kappa) = sum c_alpha q^{-m(alpha)} x^{p(alpha)}
                let mut image = E::zero();
                let mut right_fiber = true;
                for (w, coeff) in kappa.terms() {
                    right_fiber &= counts(w.letters(), n) == k;
                    image = image + coeff.clone() * q.powi(-(inv(w.letters()) as i64)).expect("q is invertible");
                }
                c.ok(right_fiber && image == E::one(), || format!("{geometry} pi(kappa) at {k:?}, q = {q}"));
                let attained = fnorm(&kappa, fam).map_err(|e| e.to_string())?;
                c.within(rel(attained, closed), 1e-12, || format!("{geometry} kappa norm at {k:?}, q = {q}"));
            }
            let pd = polydisk_oracle(&mi(&k), Complex64::new(1.0, 0.0), &ctx).map_err(|e| e.to_string())?;
            c.ok(pd.min_pair_gap >= -1e-12, || format!("pair check at {k:?}, q = {q}"));
        }
    }
    c.finish()
}

fn norm_chains() -> Outcome {
    let mut c = Check::new();
    let mut rng = random::rng(SEED);
    let (rho, tau): (f64, f64) = (0.8, 1.4);
    for _ in 0..1000 {
        let n = rng.random_range(1..=3usize);
        let f = random::free_series(&mut rng, n, 5, 7, 5, random::float_coeff);
        let v = |fam| fnorm(&f, fam).expect("valid parameters");
        let taylor = v(FreeNorm::Taylor { rho });
        let univ = v(FreeNorm::Universal { rho, tau });
        let bullet = v(FreeNorm::BallBullet { rho });
        let circ = v(FreeNorm::BallCirc { rho });
        let sup = v(FreeNorm::BallSup { rho });
        let own_taylor: f64 = f.terms().map(|(w, a)| a.abs() * rho.powi(w.len() as i32)).sum();
        let own_univ: f64 = f
            .terms()
            .map(|(w, a)| a.abs() * rho.powi(w.len() as i32) * tau.powi(switches(w.letters()) as i32 + 1))
            .sum();
        let mut by_degree = [0.0f64; 6];
        for (w, a) in f.terms() {
            by_degree[w.len()] += a.abs_sq_f64();
        }
        let own_bullet: f64 = by_degree.iter().enumerate().map(|(d, s)| s.sqrt() * rho.powi(d as i32)).sum();
        c.within(rel(taylor, own_taylor), 1e-13, || "taylor value".into());
        c.within(rel(univ, own_univ), 1e-13, || "universal value".into());
        c.within(rel(bullet, own_bullet), 1e-13, || "bullet value".into());
        c.within(excess(taylor, univ), 1e-12, || format!("taylor <= universal for {f:?}"));
        c.within(excess(univ, v(FreeNorm::Taylor { rho: rho * tau })), 1e-12, || {
            format!("universal <= taylor(rho tau) for {f:?}")
        });
        c.within(excess(bullet, circ), 1e-12, || format!("bullet <= circ for {f:?}"));
        c.within(excess(sup, bullet), 1e-12, || format!("sup <= bullet for {f:?}"));
        let wide = v(FreeNorm::BallBullet { rho: rho * (n as f64).sqrt() });
        c.within(excess(taylor, wide), 1e-12, || format!("taylor <= bullet(rho sqrt n) for {f:?}"));
    }
    c.finish()
}

/// The matrix of `f(rho S)` on words of length `<= depth`, built from scratch.
fn fock_matrix(f: &FreeSeries<FloatComplex>, rho: f64, depth: usize) -> DMatrix<Complex64> {
    let n = f.n();
    let mut basis: Vec<Vec<u8>> = vec![vec![]];
    let mut frontier = basis.clone();
    for _ in 0..depth {
        let next: Vec<Vec<u8>> =
            frontier.iter().flat_map(|w| (1..=n as u8).map(move |i| [w.as_slice(), &[i]].concat())).collect();
        basis.extend(next.iter().cloned());
        frontier = next;
    }
    let index: HashMap<&Vec<u8>, usize> = basis.iter().enumerate().map(|(i, w)| (w, i)).collect();
    let mut m = DMatrix::zeros(basis.len(), basis.len());
    for (j, beta) in basis.iter().enumerate() {
        for (alpha, a) in f.terms() {
            let target = [alpha.letters(), beta.as_slice()].concat();
            if let Some(&i) = index.get(&target) {
                m[(i, j)] += a.0 * rho.powi(alpha.len() as i32);
            }
        }
    }
    m
}

fn fock_sandwich_check() -> Outcome {
    let mut c = Check::new();
    let mut rng = random::rng(SEED + 6);
    for _ in 0..200 {
        let n = rng.random_range(1..=3usize);
        let depth = rng.random_range(1..=6usize);
        let rho = rng.random_range(0.3..1.3);
        let f = random::free_series(&mut rng, n, depth - 1, 8, depth, random::float_coeff);
        let s = fock_sandwich(&f, rho, depth).map_err(|e| e.to_string())?;
        let vac: f64 = f.terms().map(|(w, a)| a.abs_sq_f64() * rho.powi(2 * w.len() as i32)).sum::<f64>().sqrt();
        c.within(rel(s.vacuum, vac), 1e-12, || "vacuum norm".into());
        c.within(excess(s.sup, s.vacuum), 1e-12, || format!("sup <= vacuum for {f:?}"));
        c.within(excess(s.opnorm(), s.bullet), 1e-8, || format!("opnorm <= bullet for {f:?}"));
        let dim = (0..=depth).map(|d| n.pow(d as u32)).sum::<usize>();
        if dim <= 400 {
            let m = fock_matrix(&f, rho, depth);
            let top = m.singular_values().max();
            c.within(excess(s.power, top), 1e-9, || "power iteration exceeds the top singular value".into());
            c.within(excess(top, s.bullet), 1e-12, || format!("||f(rho S)|| <= bullet for {f:?}"));
            c.within(excess(s.sup, top), 1e-12, || format!("sup <= ||f(rho S)|| for {f:?}"));
        }
    }
    c.finish()
}

fn submultiplicativity() -> Outcome {
    let mut c = Check::new();
    let mut rng = random::rng(SEED + 7);
    let (rho, tau) = (0.9, 1.3);
    for _ in 0..1000 {
        let n = rng.random_range(1..=3usize);
        let f = random::free_series(&mut rng, n, 4, 5, 8, random::float_coeff);
        let g = random::free_series(&mut rng, n, 4, 5, 8, random::float_coeff);
        let fg = fmul(&f, &g).map_err(|e| e.to_string())?;
        for fam in [
            FreeNorm::Taylor { rho },
            FreeNorm::Universal { rho, tau },
            FreeNorm::BallBullet { rho },
            FreeNorm::BallCirc { rho },
        ] {
            let v = |x| fnorm(x, fam).expect("valid");
            c.within(excess(v(&fg), v(&f) * v(&g)), 1e-9, || format!("{fam:?}"));
        }
    }
    let qs = q_values();
    for i in 0..1000 {
        let n = rng.random_range(1..=3usize);
        let ctx = QContext::new(n, FloatComplex(qs[i % qs.len()].to_c64())).map_err(|e| e.to_string())?;
        let f = random::q_series(&mut rng, n, 4, 5, 8, random::float_coeff);
        let g = random::q_series(&mut rng, n, 4, 5, 8, random::float_coeff);
        let fg = qmul(&f, &g, &ctx).map_err(|e| e.to_string())?;
        for fam in [QNorm::Polydisk { rho }, QNorm::Ball { rho }] {
            let v = |x| qnorm(x, &ctx, fam).expect("valid");
            c.within(excess(v(&fg), v(&f) * v(&g)), 1e-9, || format!("{fam:?} at q = {}", ctx.q()));
        }
    }
    for _ in 0..1000 {
        let n = rng.random_range(1..=3usize);
        let a = random::defo_series(&mut rng, n, 4, 8, 5, 8, 60, random::float_coeff);
        let b = random::defo_series(&mut rng, n, 4, 8, 5, 8, 60, random::float_coeff);
        let ab = dmul(&a, &b).map_err(|e| e.to_string())?;
        c.ok(!ab.is_truncated(), || "dnorm product truncated".into());
        let v = |x| dnorm(x, rho, tau).expect("valid");
        c.within(excess(v(&ab), v(&a) * v(&b)), 1e-9, || "dnorm".into());
    }
    // monomials: the norm is rho^{|k|} tau^{|omega|}, so the inequality is one of exponents
    for n in 1..=3 {
        let ks = MultiIndex::all_up_to(n, 5);
        for k in &ks {
            for l in &ks {
                for p in -10i64..=10 {
                    for s in -10i64..=10 {
                        let a = DefoSeries::monomial(n, 10, 60, k.clone(), p, E::one()).expect("in bounds");
                        let b = DefoSeries::monomial(n, 10, 60, l.clone(), s, E::one()).expect("in bounds");
                        let ab = dmul(&a, &b).expect("same alphabet");
                        let e = p + s - sigma(l.entries(), k.entries());
                        let (ke, le) = (k.entries(), l.entries());
                        let prod = ab.terms().next().map(|(m, z, _)| (m.clone(), z));
                        c.ok(prod == Some((k.add(l), e)), || format!("product of x^{k} z^{p} and x^{l} z^{s}"));
                        let lhs = omega_ref(k.add(l).entries(), e).abs();
                        c.ok(lhs <= omega_ref(ke, p).abs() + omega_ref(le, s).abs(), || {
                            format!("monomial dnorm at {k} {p}, {l} {s}")
                        });
                    }
                }
            }
        }
    }
    c.finish()
}

fn alpha_procedure() -> Outcome {
    let mut c = Check::new();
    for k in indices(4, 8) {
        let n = k.len();
        for m in 0..=sigma(&k, &k) {
            let a = alpha_with_inversions(&mi(&k), m).map_err(|e| e.to_string())?;
            let w = a.letters();
            c.ok(counts(w, n) == k && inv(w) as i64 == m && switches(w) <= n as i64 + 2, || {
                format!("alpha({k:?}, {m}) = {a}")
            });
        }
        c.ok(alpha_with_inversions(&mi(&k), sigma(&k, &k) + 1).is_err(), || format!("alpha({k:?}) out of range"));
    }
    let mut rng = random::rng(SEED + 8);
    for _ in 0..500 {
        let n = rng.random_range(1..=4usize);
        let a = random::defo_series(&mut rng, n, 6, 12, 6, 8, 40, random::exact_coeff);
        let split = canonical_split(&a).map_err(|e| e.to_string())?;
        for t in &split {
            let w = t.word.letters();
            let k = counts(w, n);
            c.ok(t.z_exponent == omega_ref(&k, t.z_exponent - inv(w) as i64), || "split exponent is omega".into());
        }
        let back = rebuild(n, a.degree_cap(), a.z_window(), &split).map_err(|e| e.to_string())?;
        c.ok(back == a, || format!("split round trip of {a:?}"));
    }
    c.finish()
}

fn omega_inequality() -> Outcome {
    let mut c = Check::new();
    for n in 1..=3 {
        let ks = MultiIndex::all_up_to(n, 4);
        let mut bad = 0u64;
        let mut total = 0u64;
        for k in &ks {
            for l in &ks {
                let (ke, le) = (k.entries(), l.entries());
                for p in -20i64..=20 {
                    let wk = omega_ref(ke, p);
                    if omega(k, p) != wk {
                        bad += 1;
                    }
                    for s in -20i64..=20 {
                        total += 1;
                        let (m, e) = dmul_monomial(k, p, l, s);
                        if e != p + s - sigma(le, ke)
                            || omega_ref(m.entries(), e).abs() > wk.abs() + omega_ref(le, s).abs()
                        {
                            bad += 1;
                        }
                    }
                }
            }
        }
        c.ok(bad == 0, || format!("{bad} of {total} failures for n = {n}"));
        c.cases += total - 1;
    }
    c.finish()
}

/// `(-i s)^m / m!`
fn exp_coeff(s: i64, m: usize) -> E {
    let mut v = E::one();
    for t in 1..=m {
        v = v * E::new(BigRational::zero(), rat(-s, t as i64));
    }
    v
}

fn own_poisson(f: &QSeries<E>, g: &QSeries<E>) -> QSeries<E> {
    let mut out = QSeries::zero(f.n(), f.degree_cap().min(g.degree_cap()));
    for (k, a) in f.terms() {
        for (l, b) in g.terms() {
            let s = sigma(k.entries(), l.entries()) - sigma(l.entries(), k.entries());
            if s != 0 && k.degree() + l.degree() <= out.degree_cap() {
                out.add_term(k.add(l), a.clone() * b.clone() * e_int(s)).expect("within cap");
            }
        }
    }
    out
}

fn star_product() -> Outcome {
    let mut c = Check::new();
    let order = 6;
    for n in 2..=4 {
        for j in 1..=n {
            for k in 1..=n {
                let xj = QSeries::<E>::generator(n, 2, j).map_err(|e| e.to_string())?;
                let xk = QSeries::<E>::generator(n, 2, k).map_err(|e| e.to_string())?;
                let s = star(&xj, &xk, order).map_err(|e| e.to_string())?;
                let m = MultiIndex::unit(n, j).add(&MultiIndex::unit(n, k));
                let sg = i64::from(j > k);
                for i in 0..=order {
                    let want = QSeries::monomial(n, 2, m.clone(), exp_coeff(sg, i)).expect("within cap");
                    c.ok(s.coeff(i) == Some(&want), || format!("x_{j} * x_{k} at h^{i}"));
                }
            }
        }
    }
    let mut rng = random::rng(SEED + 10);
    for _ in 0..100 {
        let n = rng.random_range(2..=3usize);
        let mut draw = || random::q_series(&mut rng, n, 4, 3, 12, random::exact_coeff);
        let (f, g, w) = (draw(), draw(), draw());
        let lift = |x: &QSeries<E>| HSeries::constant(x.clone(), order);
        let left = star_h(&star(&f, &g, order).map_err(|e| e.to_string())?, &lift(&w)).map_err(|e| e.to_string())?;
        let right = star_h(&lift(&f), &star(&g, &w, order).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
        c.ok(left == right, || "associativity".into());

        let fg = star(&f, &g, 1).map_err(|e| e.to_string())?;
        let gf = star(&g, &f, 1).map_err(|e| e.to_string())?;
        let comm = fg.coeff(1).unwrap().sub(gf.coeff(1).unwrap()).map_err(|e| e.to_string())?;
        let mine = own_poisson(&f, &g).scale(&E::imag_unit());
        c.ok(comm == mine, || "h^1 commutator".into());
        c.ok(poisson(&f, &g).map_err(|e| e.to_string())? == own_poisson(&f, &g), || "poisson bracket".into());

        for h in [0.1, 1.0] {
            c.within(star_fiber_compare(&f, &g, h).map_err(|e| e.to_string())?, 1e-10, || {
                format!("star vs fiber at h = {h}")
            });
            // own: sum a_k b_l e^{-ih sigma(l,k)} x^{k+l} against the quantum product at e^{ih}
            let ctx = QContext::new(n, FloatComplex::from_polar(1.0, h)).map_err(|e| e.to_string())?;
            let prod = qmul(&f.to_float(), &g.to_float(), &ctx).map_err(|e| e.to_string())?;
            let mut own: HashMap<MultiIndex, Complex64> = HashMap::new();
            for (k, a) in f.terms() {
                for (l, b) in g.terms() {
                    let phase = Complex64::from_polar(1.0, -h * sigma(l.entries(), k.entries()) as f64);
                    *own.entry(k.add(l)).or_default() += a.to_c64() * b.to_c64() * phase;
                }
            }
            let scale = own.values().map(|z| z.norm()).fold(1e-300, f64::max);
            let dev = own.iter().map(|(k, z)| (prod.coeff(k).0 - z).norm()).fold(0.0, f64::max) / scale;
            c.within(dev, 1e-10, || format!("own star vs quantum product at h = {h}"));
        }
    }
    c.finish()
}

fn slope(hs: &[f64], ds: &[f64]) -> f64 {
    let x: Vec<f64> = hs.iter().map(|h| h.ln()).collect();
    let y: Vec<f64> = ds.iter().map(|d| d.ln()).collect();
    let (mx, my) = (x.iter().sum::<f64>() / x.len() as f64, y.iter().sum::<f64>() / y.len() as f64);
    let cov: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let var: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    cov / var
}

/// `||(f g - g f)/h - i{f,g}||` at `q = e^{ih}` through the quantum product.
fn own_defect(f: &QSeries<E>, g: &QSeries<E>, h: f64, rho: f64) -> f64 {
    let ctx = QContext::new(f.n(), FloatComplex::from_polar(1.0, h)).expect("nonzero q");
    let (ff, gf) = (f.to_float(), g.to_float());
    let comm = qmul(&ff, &gf, &ctx).unwrap().sub(&qmul(&gf, &ff, &ctx).unwrap()).unwrap();
    let p = own_poisson(f, g).to_float();
    let mut coeffs: HashMap<MultiIndex, Complex64> = HashMap::new();
    for (k, a) in comm.terms() {
        *coeffs.entry(k.clone()).or_default() += a.0 / h;
    }
    for (k, a) in p.terms() {
        *coeffs.entry(k.clone()).or_default() -= Complex64::i() * a.0;
    }
    // |e^{ih}| = 1 so every polydisk weight is one
    coeffs.iter().map(|(k, z)| z.norm() * rho.powi(k.degree() as i32)).sum()
}

fn rieffel_limit() -> Outcome {
    let mut c = Check::new();
    let mut rng = random::rng(SEED + 11);
    let hs = [1e-1, 1e-2, 1e-3, 1e-4];
    let rho = 0.5;
    let mut pairs = 0;
    let mut regenerated = 0;
    let mut min_slope = f64::INFINITY;
    while pairs < 20 {
        let n = rng.random_range(2..=3usize);
        let f = random::q_series(&mut rng, n, 3, 3, 6, random::exact_coeff);
        let g = random::q_series(&mut rng, n, 3, 3, 6, random::exact_coeff);
        let ds: Vec<f64> =
            hs.iter().map(|&h| rieffel_defect(&f, &g, h, rho)).collect::<Result<_, _>>().map_err(|e| e.to_string())?;
        if ds[0] < 1e-12 {
            regenerated += 1;
            continue;
        }
        pairs += 1;
        for (h, d) in hs.iter().zip(&ds) {
            c.within(rel(*d, own_defect(&f, &g, *h, rho)), 1e-6, || format!("defect value at h = {h}"));
        }
        c.ok(ds.windows(2).all(|w| w[1] < w[0]), || format!("defect not decreasing: {ds:?}"));
        let sl = slope(&hs, &ds);
        min_slope = min_slope.min(sl);
        c.ok(sl >= 0.9, || format!("slope {sl:.4} for {ds:?}"));
    }
    c.finish().map(|s| format!("{s}, min slope {min_slope:.4}, {regenerated} degenerate pairs redrawn"))
}

fn fiber_continuity() -> Outcome {
    let mut c = Check::new();
    let rho: f64 = 0.7;
    let x11 = DefoSeries::monomial(2, 2, 0, mi(&[1, 1]), 0, E::one()).map_err(|e| e.to_string())?;
    for arg in [0.0, 0.3, 2.0] {
        let grid = radial_grid(0.5, 2.0, 61, arg).map_err(|e| e.to_string())?;
        let prof = fiber_norm_profile(&x11, rho, Geometry::Polydisk, &grid).map_err(|e| e.to_string())?;
        for (q, v) in grid.iter().zip(&prof) {
            let want = q.abs().min(1.0) * rho * rho;
            c.within((v - want).abs(), 1e-12, || format!("x^(1,1) profile at |q| = {}", q.abs()));
        }
    }
    let mut rng = random::rng(SEED + 12);
    for i in 0..20 {
        let n = rng.random_range(1..=3usize);
        let a = random::defo_series(&mut rng, n, 3, 3, 4, 3, 3, random::exact_coeff);
        let geometry = if i % 2 == 0 { Geometry::Polydisk } else { Geometry::Ball };
        let j = refinement_jumps(&a, 0.5, geometry, (0.5, 2.0, 0.3), 9, 4).map_err(|e| e.to_string())?;
        c.ok(j[2] <= j[0] / 2.0 && j[3] <= j[1] / 2.0, || format!("refinement jumps {j:?}"));
        if geometry == Geometry::Polydisk {
            let grid = radial_grid(0.5, 2.0, 17, 0.3).map_err(|e| e.to_string())?;
            let prof = fiber_norm_profile(&a, 0.5, geometry, &grid).map_err(|e| e.to_string())?;
            for (q, v) in grid.iter().zip(&prof) {
                let mut fiber: HashMap<MultiIndex, Complex64> = HashMap::new();
                for (k, p, coeff) in a.terms() {
                    *fiber.entry(k.clone()).or_default() += coeff.to_c64() * q.0.powi(p as i32);
                }
                let aq = q.abs();
                let own: f64 = fiber
                    .iter()
                    .map(|(k, z)| {
                        z.norm()
                            * aq.powi(sigma(k.entries(), k.entries()) as i32).min(1.0)
                            * 0.5f64.powi(k.degree() as i32)
                    })
                    .sum();
                c.within(rel(*v, own), 1e-12, || "fiber norm value".into());
            }
        }
    }
    c.finish()
}

fn spectral_profiles() -> Outcome {
    let mut c = Check::new();
    let (rho, tau): (f64, f64) = (0.7, 1.5);
    for n in 2..=3 {
        let d_max = if n == 2 { 10 } else { 8 };
        for (d, r) in sprad_profile(n, d_max, |w| rho.powi(w.len() as i32)).iter().enumerate() {
            c.within(rel(*r, rho), 1e-14, || format!("taylor r_{} for n = {n}", d + 1));
        }
        let univ = sprad_profile(n, d_max, |w| rho.powi(w.len() as i32) * tau.powi(switches(w.letters()) as i32 + 1));
        for (d, r) in univ.iter().enumerate() {
            if (d + 1) % 2 == 0 {
                c.within(rel(*r, rho * tau), 1e-14, || format!("universal r_{} for n = {n}", d + 1));
            }
        }
    }
    for q in q_values() {
        let ctx = QContext::new(2, q.clone()).map_err(|e| e.to_string())?;
        let aq = q.abs();
        for fam in [QNorm::Polydisk { rho }, QNorm::Ball { rho }] {
            let prof = sprad_profile(2, 10, |w| quantum_word_norm(w, &ctx, fam));
            for (d, r) in prof.iter().enumerate() {
                c.within(excess(*r, rho), 1e-12, || format!("{fam:?} r_{} at q = {q}", d + 1));
            }
        }
        // word norms themselves, polydisk: |q|^{-m} w_q(k) rho^d
        for d in 1..=6 {
            for w in qdisk_core::combinatorics::words_of_length(2, d) {
                let k = counts(w.letters(), 2);
                let own =
                    aq.powi(-(inv(w.letters()) as i32)) * aq.powi(sigma(&k, &k) as i32).min(1.0) * rho.powi(d as i32);
                let lib = quantum_word_norm(&w, &ctx, QNorm::Polydisk { rho });
                c.within(rel(lib, own), 1e-12, || format!("||x_{w}|| at q = {q}"));
            }
        }
    }
    c.finish()
}

fn main() -> ExitCode {
    let checks: [(&str, fn() -> Outcome); 13] = [
        ("inversion generating identity, n <= 4, |k| <= 8", inversion_identity),
        ("preimage counts, n <= 4, |k| <= 8", preimage_count),
        ("weight minimum over preimages, |k| <= 7", weight_minimum),
        ("quotient oracles and sections, |k| <= 6", quotient_oracles),
        ("norm chains on random series", norm_chains),
        ("Fock sandwich, depth <= 6, n <= 3", fock_sandwich_check),
        ("submultiplicativity of every family", submultiplicativity),
        ("alpha(k, m) procedure and split round trip", alpha_procedure),
        ("omega inequality, n <= 3, |p|, |s| <= 20", omega_inequality),
        ("star product relations, associativity, fibers", star_product),
        ("Rieffel defect slope", rieffel_limit),
        ("fiber norm profile and grid refinement", fiber_continuity),
        ("spectral radius profiles", spectral_profiles),
    ];
    let mut failed = 0;
    for (name, check) in checks {
        let start = Instant::now();
        let outcome = check();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS  {name}: {detail} [{secs:.1}s]"),
            Err(detail) => {
                failed += 1;
                println!("FAIL  {name}: {detail} [{secs:.1}s]");
            }
        }
    }
    println!("{} of {} acceptance checks passed", checks.len() - failed, checks.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
