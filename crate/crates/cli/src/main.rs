use std::fs;
use std::io::Read;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use qdisk_core::combinatorics::{MultiIndex, Word};
use qdisk_core::deformation::{dmul, dnorm, fiber_eval, fiber_norm_profile, radial_grid, DefoSeries};
use qdisk_core::free_series::{fmul, fnorm, sprad_profile, FreeNorm, FreeSeries};
use qdisk_core::io::{parse_series, write_defo, write_free, write_q, AnyQ, AnySeries, Coeff, Parsed, SeriesKind};
use qdisk_core::quantum_series::{normal_order, qmul, qnorm, QContext, QNorm, QSeries};
use qdisk_core::quotient_oracle::{section_kappa, Geometry, QuotientProblem};
use qdisk_core::scalars::{ExactComplex, FloatComplex, Scalar};
use qdisk_core::starprod::{rieffel_defect, star};
use qdisk_core::verify::{parse_suites, quantum_word_norm, run_verify, VerifyConfig};
use qdisk_core::Error;

/// Quantum polydisk and ball algebras on truncated power series.
#[derive(Parser, Debug)]
#[command(name = "qdisk", version)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Global {
    /// Number of variables, where a command builds series itself.
    #[arg(long, global = true, default_value_t = 2)]
    n: usize,
    /// Degree cap for products; defaults to the sum of the operand caps.
    #[arg(long, global = true)]
    cap: Option<usize>,
    /// Deformation parameter; overrides the q in a qseries header.
    #[arg(long, global = true, allow_hyphen_values = true)]
    q: Option<String>,
    #[arg(long, global = true, default_value_t = 1.0)]
    rho: f64,
    #[arg(long, global = true, default_value_t = 1.0)]
    tau: f64,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Emit JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Multiply two series of the same kind.
    Mul { a: String, b: String },
    /// Normal-order a free series at q.
    NormalOrder { file: String },
    /// Norm of a series: taylor, universal, bullet, circ, sup (free);
    /// polydisk, ball, ball-alt (qseries); dnorm for defoseries.
    Norm {
        file: String,
        #[arg(long)]
        family: Option<String>,
    },
    /// Quotient norm of a qseries target: closed form against the oracle.
    Quotient {
        #[arg(long)]
        target: String,
        #[arg(long, default_value = "polydisk")]
        geometry: String,
    },
    /// Norm-attaining free preimage of x^k.
    Kappa {
        #[arg(long)]
        k: String,
        #[arg(long, default_value = "ball")]
        geometry: String,
    },
    /// Evaluate a defoseries at z = q.
    Fiber { file: String },
    /// Fiber norms of a defoseries over a radial grid `rmin:rmax:count[@arg]`, as CSV.
    Profile {
        file: String,
        #[arg(long)]
        grid: String,
        #[arg(long, default_value = "polydisk")]
        geometry: String,
    },
    /// Star product of two qseries through h^order.
    Star {
        f: String,
        g: String,
        #[arg(long, default_value_t = 4)]
        order: usize,
    },
    /// Rieffel defect of two qseries at h.
    Defect {
        f: String,
        g: String,
        #[arg(long, allow_hyphen_values = true)]
        h: f64,
    },
    /// d-th root profile of the largest word norm: taylor, universal, polydisk, ball.
    Sprad {
        #[arg(long, default_value = "taylor")]
        family: String,
        #[arg(long, default_value_t = 10)]
        d_max: usize,
    },
    /// Run invariant suites: combinatorics, norms, quotient, deformation, star, fock, all.
    Verify {
        #[arg(default_value = "all")]
        suite: String,
        #[arg(long)]
        cases: Option<usize>,
        #[arg(long)]
        degree: Option<usize>,
        #[arg(long)]
        n_max: Option<usize>,
        #[arg(long)]
        order: Option<usize>,
        /// Include wall time in the reports.
        #[arg(long)]
        timing: bool,
    },
}

type Result<T> = std::result::Result<T, Error>;

struct Output {
    text: String,
    json: Value,
    failed: bool,
}

impl Output {
    fn ok(text: String, json: Value) -> Self {
        Output { text, json, failed: false }
    }
}

fn read_input(path: &str) -> Result<String> {
    let mut s = String::new();
    if path == "-" {
        std::io::stdin().read_to_string(&mut s).map_err(|e| Error::InvalidParameter(format!("reading stdin: {e}")))?;
    } else {
        s = fs::read_to_string(path).map_err(|e| Error::InvalidParameter(format!("reading {path}: {e}")))?;
    }
    Ok(s)
}

fn load(path: &str, kind: Option<SeriesKind>) -> Result<AnySeries> {
    parse_series(&read_input(path)?, kind).map_err(|e| match e {
        Error::Parse { line, msg } => Error::Parse { line, msg: format!("{path}: {msg}") },
        other => other,
    })
}

fn parse_coeff(s: &str) -> Result<Coeff> {
    s.parse().map_err(|e| Error::InvalidParameter(format!("bad scalar `{s}`: {e}")))
}

/// A qseries with its context, after applying `--q`.
enum QData {
    Exact(QSeries<ExactComplex>, QContext<ExactComplex>),
    Float(QSeries<FloatComplex>, QContext<FloatComplex>),
}

impl QData {
    fn to_float(&self) -> (QSeries<FloatComplex>, QContext<FloatComplex>) {
        match self {
            QData::Exact(f, c) => (f.to_float(), c.to_float()),
            QData::Float(f, c) => (f.clone(), c.clone()),
        }
    }

    fn q_text(&self) -> String {
        match self {
            QData::Exact(_, c) => c.q().to_string(),
            QData::Float(_, c) => c.q().to_string(),
        }
    }
}

fn load_q(path: &str, g: &Global) -> Result<QData> {
    let AnySeries::Q(parsed) = load(path, Some(SeriesKind::Q))? else { unreachable!() };
    with_q_override(parsed, g)
}

fn with_q_override(parsed: AnyQ, g: &Global) -> Result<QData> {
    let override_q = g.q.as_deref().map(parse_coeff).transpose()?;
    Ok(match (parsed, override_q) {
        (Parsed::Exact((f, c)), None) => QData::Exact(f, c),
        (Parsed::Float((f, c)), None) => QData::Float(f, c),
        (Parsed::Exact((f, _)), Some(Coeff::Exact(q))) => QData::Exact(f.clone(), QContext::new(f.n(), q)?),
        (Parsed::Exact((f, _)), Some(q)) => QData::Float(f.to_float(), QContext::new(f.n(), q.to_float())?),
        (Parsed::Float((f, _)), Some(q)) => QData::Float(f.clone(), QContext::new(f.n(), q.to_float())?),
    })
}

/// Both operands in one scalar domain, with the q of the first.
fn q_pair(a: QData, b: QData) -> Result<QData2> {
    if a.q_text() != b.q_text() {
        return Err(Error::Mismatch(format!("operands have q = {} and q = {}; pass --q", a.q_text(), b.q_text())));
    }
    Ok(match (a, b) {
        (QData::Exact(f, c), QData::Exact(g, _)) => QData2::Exact(f, g, c),
        (a, b) => {
            let (f, c) = a.to_float();
            QData2::Float(f, b.to_float().0, c)
        }
    })
}

enum QData2 {
    Exact(QSeries<ExactComplex>, QSeries<ExactComplex>, QContext<ExactComplex>),
    Float(QSeries<FloatComplex>, QSeries<FloatComplex>, QContext<FloatComplex>),
}

fn q_from_global(g: &Global, n: usize) -> Result<Parsed<QContext<ExactComplex>, QContext<FloatComplex>>> {
    match parse_coeff(g.q.as_deref().unwrap_or("1/2"))? {
        Coeff::Exact(q) => Ok(Parsed::Exact(QContext::new(n, q)?)),
        Coeff::Float(q) => Ok(Parsed::Float(QContext::new(n, q)?)),
    }
}

fn product_cap(g: &Global, a: usize, b: usize) -> usize {
    g.cap.unwrap_or(a + b)
}

fn series_output(text: String, truncated: bool) -> Output {
    let json = json!({ "series": text, "truncated": truncated });
    Output::ok(text, json)
}

fn recap_free<S: Scalar>(f: &FreeSeries<S>, cap: usize) -> Result<FreeSeries<S>> {
    let mut out = FreeSeries::zero(f.n(), cap);
    for (w, c) in f.terms().filter(|(w, _)| w.len() <= cap) {
        out.add_term(w.clone(), c.clone())?;
    }
    Ok(out)
}

fn recap_q<S: Scalar>(f: &QSeries<S>, cap: usize) -> Result<QSeries<S>> {
    let mut out = QSeries::zero(f.n(), cap);
    for (k, c) in f.terms().filter(|(k, _)| k.degree() <= cap) {
        out.add_term(k.clone(), c.clone())?;
    }
    Ok(out)
}

fn mul_free<S: Scalar>(a: &FreeSeries<S>, b: &FreeSeries<S>, cap: usize) -> Result<Output> {
    let p = fmul(&recap_free(a, cap)?, &recap_free(b, cap)?)?;
    Ok(series_output(write_free(&p), p.is_truncated()))
}

fn mul_q<S: Scalar>(a: &QSeries<S>, b: &QSeries<S>, ctx: &QContext<S>, cap: usize) -> Result<Output> {
    let p = qmul(&recap_q(a, cap)?, &recap_q(b, cap)?, ctx)?;
    Ok(series_output(write_q(&p, ctx), p.is_truncated()))
}

fn mul_defo<S: Scalar>(a: &DefoSeries<S>, b: &DefoSeries<S>, g: &Global) -> Result<Output> {
    let cap = product_cap(g, a.degree_cap(), b.degree_cap());
    let zwin = a.z_window() + b.z_window() + (a.degree_cap() * b.degree_cap()) as i64;
    let p = dmul(&a.with_bounds(cap.max(a.degree_cap()), zwin)?, &b.with_bounds(cap.max(b.degree_cap()), zwin)?)?;
    let p = if p.degree_cap() > cap {
        let mut out = DefoSeries::zero(p.n(), cap, zwin);
        for (k, e, c) in p.terms().filter(|(k, _, _)| k.degree() <= cap) {
            out.add_term(k.clone(), e, c.clone())?;
        }
        out
    } else {
        p
    };
    Ok(series_output(write_defo(&p), p.is_truncated()))
}

fn cmd_mul(g: &Global, a: &str, b: &str) -> Result<Output> {
    let sa = load(a, None)?;
    match sa {
        AnySeries::Free(x) => {
            let AnySeries::Free(y) = load(b, Some(SeriesKind::Free))? else { unreachable!() };
            match (x, y) {
                (Parsed::Exact(x), Parsed::Exact(y)) => {
                    mul_free(&x, &y, product_cap(g, x.degree_cap(), y.degree_cap()))
                }
                (x, y) => {
                    let (x, y) = (free_float(x), free_float(y));
                    mul_free(&x, &y, product_cap(g, x.degree_cap(), y.degree_cap()))
                }
            }
        }
        AnySeries::Q(x) => match q_pair(with_q_override(x, g)?, load_q(b, g)?)? {
            QData2::Exact(x, y, c) => mul_q(&x, &y, &c, product_cap(g, x.degree_cap(), y.degree_cap())),
            QData2::Float(x, y, c) => mul_q(&x, &y, &c, product_cap(g, x.degree_cap(), y.degree_cap())),
        },
        AnySeries::Defo(x) => {
            let AnySeries::Defo(y) = load(b, Some(SeriesKind::Defo))? else { unreachable!() };
            match (x, y) {
                (Parsed::Exact(x), Parsed::Exact(y)) => mul_defo(&x, &y, g),
                (x, y) => mul_defo(&defo_float(x), &defo_float(y), g),
            }
        }
    }
}

fn free_float(x: Parsed<FreeSeries<ExactComplex>, FreeSeries<FloatComplex>>) -> FreeSeries<FloatComplex> {
    match x {
        Parsed::Exact(f) => f.to_float(),
        Parsed::Float(f) => f,
    }
}

fn defo_float(x: Parsed<DefoSeries<ExactComplex>, DefoSeries<FloatComplex>>) -> DefoSeries<FloatComplex> {
    match x {
        Parsed::Exact(f) => f.to_float(),
        Parsed::Float(f) => f,
    }
}

fn cmd_normal_order(g: &Global, file: &str) -> Result<Output> {
    let AnySeries::Free(f) = load(file, Some(SeriesKind::Free))? else { unreachable!() };
    let n = match &f {
        Parsed::Exact(x) => x.n(),
        Parsed::Float(x) => x.n(),
    };
    let out = match (f, q_from_global(g, n)?) {
        (Parsed::Exact(f), Parsed::Exact(c)) => write_q(&normal_order(&f, &c)?, &c),
        (f, c) => {
            let c = match c {
                Parsed::Exact(c) => c.to_float(),
                Parsed::Float(c) => c,
            };
            write_q(&normal_order(&free_float(f), &c)?, &c)
        }
    };
    Ok(series_output(out, false))
}

fn free_family(name: &str, g: &Global) -> Result<FreeNorm> {
    let (rho, tau) = (g.rho, g.tau);
    Ok(match name {
        "taylor" => FreeNorm::Taylor { rho },
        "universal" => FreeNorm::Universal { rho, tau },
        "bullet" => FreeNorm::BallBullet { rho },
        "circ" => FreeNorm::BallCirc { rho },
        "sup" => FreeNorm::BallSup { rho },
        _ => return Err(Error::InvalidParameter(format!("unknown free norm `{name}`"))),
    })
}

fn q_family(name: &str, rho: f64) -> Result<QNorm> {
    Ok(match name {
        "polydisk" => QNorm::Polydisk { rho },
        "ball" => QNorm::Ball { rho },
        "ball-alt" => QNorm::BallAlt { rho },
        _ => return Err(Error::InvalidParameter(format!("unknown quantum norm `{name}`"))),
    })
}

fn value_output(name: &str, v: f64) -> Output {
    Output::ok(format!("{v:e}"), json!({ name: v }))
}

fn cmd_norm(g: &Global, file: &str, family: Option<&str>) -> Result<Output> {
    match load(file, None)? {
        AnySeries::Free(f) => {
            let fam = free_family(family.unwrap_or("taylor"), g)?;
            let v = match f {
                Parsed::Exact(f) => fnorm(&f, fam)?,
                Parsed::Float(f) => fnorm(&f, fam)?,
            };
            Ok(value_output("norm", v))
        }
        AnySeries::Q(parsed) => {
            let fam = q_family(family.unwrap_or("polydisk"), g.rho)?;
            let v = match with_q_override(parsed, g)? {
                QData::Exact(f, c) => qnorm(&f, &c, fam)?,
                QData::Float(f, c) => qnorm(&f, &c, fam)?,
            };
            Ok(value_output("norm", v))
        }
        AnySeries::Defo(a) => {
            if let Some(f) = family.filter(|f| *f != "dnorm") {
                return Err(Error::InvalidParameter(format!("defoseries support only dnorm, got `{f}`")));
            }
            let v = match a {
                Parsed::Exact(a) => dnorm(&a, g.rho, g.tau)?,
                Parsed::Float(a) => dnorm(&a, g.rho, g.tau)?,
            };
            Ok(value_output("norm", v))
        }
    }
}

fn cmd_quotient(g: &Global, target: &str, geometry: &str) -> Result<Output> {
    let geometry: Geometry = geometry.parse()?;
    let cmp = match load_q(target, g)? {
        QData::Exact(f, c) => QuotientProblem::new(f, c, g.rho, geometry)?.compare()?,
        QData::Float(f, c) => QuotientProblem::new(f, c, g.rho, geometry)?.compare()?,
    };
    let tol = 1e-9;
    let text = format!(
        "closed_form {:e}\noracle {:e}\nrel_gap {:e}\nresidual {:e}",
        cmp.closed_form, cmp.oracle, cmp.rel_gap, cmp.max_residual
    );
    let json = json!({
        "geometry": geometry.to_string(),
        "closed_form": cmp.closed_form,
        "oracle": cmp.oracle,
        "rel_gap": cmp.rel_gap,
        "residual": cmp.max_residual,
    });
    Ok(Output { text, json, failed: cmp.rel_gap > tol })
}

fn cmd_kappa(g: &Global, k: &str, geometry: &str) -> Result<Output> {
    let geometry: Geometry = geometry.parse()?;
    let k: MultiIndex = k.parse().map_err(|e| Error::InvalidParameter(format!("bad multi-index: {e}")))?;
    let text = match q_from_global(g, k.n())? {
        Parsed::Exact(c) => write_free(&section_kappa(&k, &c, geometry)?),
        Parsed::Float(c) => write_free(&section_kappa(&k, &c, geometry)?),
    };
    Ok(series_output(text, false))
}

fn fiber_ctx_exact(g: &Global, n: usize) -> Result<Parsed<QContext<ExactComplex>, QContext<FloatComplex>>> {
    if g.q.is_none() {
        return Err(Error::InvalidParameter("fiber needs --q".into()));
    }
    q_from_global(g, n)
}

fn cmd_fiber(g: &Global, file: &str) -> Result<Output> {
    let AnySeries::Defo(a) = load(file, Some(SeriesKind::Defo))? else { unreachable!() };
    let n = match &a {
        Parsed::Exact(x) => x.n(),
        Parsed::Float(x) => x.n(),
    };
    let text = match (a, fiber_ctx_exact(g, n)?) {
        (Parsed::Exact(a), Parsed::Exact(c)) => write_q(&fiber_eval(&a, &c)?, &c),
        (a, c) => {
            let c = match c {
                Parsed::Exact(c) => c.to_float(),
                Parsed::Float(c) => c,
            };
            write_q(&fiber_eval(&defo_float(a), &c)?, &c)
        }
    };
    Ok(series_output(text, false))
}

/// `rmin:rmax:count[@arg]`
fn parse_grid(spec: &str) -> Result<(f64, f64, usize, f64)> {
    let bad = || Error::InvalidParameter(format!("grid must look like rmin:rmax:count[@arg], got `{spec}`"));
    let (body, arg) = match spec.split_once('@') {
        Some((b, a)) => (b, a.parse::<f64>().map_err(|_| bad())?),
        None => (spec, 0.0),
    };
    let parts: Vec<&str> = body.split(':').collect();
    let [rmin, rmax, count] = parts.as_slice() else { return Err(bad()) };
    Ok((rmin.parse().map_err(|_| bad())?, rmax.parse().map_err(|_| bad())?, count.parse().map_err(|_| bad())?, arg))
}

fn cmd_profile(g: &Global, file: &str, grid: &str, geometry: &str) -> Result<Output> {
    let geometry: Geometry = geometry.parse()?;
    let (rmin, rmax, count, arg) = parse_grid(grid)?;
    let points = radial_grid(rmin, rmax, count, arg)?;
    let AnySeries::Defo(a) = load(file, Some(SeriesKind::Defo))? else { unreachable!() };
    let values = match a {
        Parsed::Exact(a) => fiber_norm_profile(&a, g.rho, geometry, &points)?,
        Parsed::Float(a) => fiber_norm_profile(&a, g.rho, geometry, &points)?,
    };
    let mut text = String::from("abs_q,arg,norm");
    let mut rows = Vec::new();
    for (q, v) in points.iter().zip(&values) {
        let (r, t) = q.0.to_polar();
        text.push_str(&format!("\n{r},{t},{v:e}"));
        rows.push(json!({ "abs_q": r, "arg": t, "norm": v }));
    }
    Ok(Output::ok(text, json!({ "geometry": geometry.to_string(), "profile": rows })))
}

fn cmd_star(g: &Global, f: &str, h: &str, order: usize) -> Result<Output> {
    let mut text = String::new();
    let mut blocks = Vec::new();
    let mut push = |m: usize, body: String| {
        text.push_str(&format!("# h^{m}\n{body}"));
        blocks.push(json!({ "order": m, "series": body }));
    };
    match q_pair(load_q(f, g)?, load_q(h, g)?)? {
        QData2::Exact(a, b, c) => {
            for (m, s) in star(&a, &b, order)?.coeffs().iter().enumerate() {
                push(m, write_q(s, &c));
            }
        }
        QData2::Float(a, b, c) => {
            for (m, s) in star(&a, &b, order)?.coeffs().iter().enumerate() {
                push(m, write_q(s, &c));
            }
        }
    }
    let text = text.trim_end().to_string();
    Ok(Output::ok(text, json!({ "coefficients": blocks })))
}

fn cmd_defect(g: &Global, f: &str, h_file: &str, h: f64) -> Result<Output> {
    let v = match q_pair(load_q(f, g)?, load_q(h_file, g)?)? {
        QData2::Exact(a, b, _) => rieffel_defect(&a, &b, h, g.rho)?,
        QData2::Float(a, b, _) => rieffel_defect(&a, &b, h, g.rho)?,
    };
    Ok(value_output("defect", v))
}

fn cmd_sprad(g: &Global, family: &str, d_max: usize) -> Result<Output> {
    if g.n == 0 || g.n > 255 {
        return Err(Error::InvalidParameter("n must be in 1..=255".into()));
    }
    let words = (g.n as f64).powi(d_max as i32);
    if words > qdisk_core::combinatorics::enumeration_cap() as f64 {
        return Err(Error::EnumerationTooLarge {
            count: words as u128,
            cap: qdisk_core::combinatorics::enumeration_cap(),
        });
    }
    let rho = g.rho;
    if !(rho > 0.0 && rho.is_finite() && g.tau >= 1.0 && g.tau.is_finite()) {
        return Err(Error::InvalidParameter(format!("need rho > 0 and tau >= 1, got {rho} and {}", g.tau)));
    }
    let free = |w: &Word, fam: FreeNorm| {
        let f = FreeSeries::<ExactComplex>::monomial(g.n, w.len(), w.clone(), Scalar::from_ratio(1, 1))
            .expect("valid word");
        fnorm(&f, fam).expect("valid parameters")
    };
    let profile = match family {
        "taylor" | "universal" => {
            let fam = free_family(family, g)?;
            sprad_profile(g.n, d_max, |w| free(w, fam))
        }
        "polydisk" | "ball" => {
            let fam = q_family(family, rho)?;
            match q_from_global(g, g.n)? {
                Parsed::Exact(c) => sprad_profile(g.n, d_max, |w| quantum_word_norm(w, &c, fam)),
                Parsed::Float(c) => sprad_profile(g.n, d_max, |w| quantum_word_norm(w, &c, fam)),
            }
        }
        _ => return Err(Error::InvalidParameter(format!("unknown family `{family}`"))),
    };
    let text = profile.iter().enumerate().map(|(i, r)| format!("{} {r:e}", i + 1)).collect::<Vec<_>>().join("\n");
    Ok(Output::ok(text, json!({ "family": family, "profile": profile })))
}

struct VerifyOpts<'a> {
    suite: &'a str,
    cases: Option<usize>,
    degree: Option<usize>,
    n_max: Option<usize>,
    order: Option<usize>,
    timing: bool,
}

fn cmd_verify(g: &Global, o: VerifyOpts) -> Result<Output> {
    let suites = parse_suites(o.suite)?;
    let mut cfg = VerifyConfig { timing: o.timing, ..VerifyConfig::default() };
    if let Some(s) = g.seed {
        cfg.seed = s;
    }
    if let Some(c) = o.cases {
        cfg.cases = c;
    }
    if let Some(d) = o.degree {
        cfg.degree_max = d;
    }
    if let Some(n) = o.n_max {
        cfg.n_max = n;
    }
    if let Some(k) = o.order {
        cfg.star_order = k;
    }
    if let Some(q) = &g.q {
        match parse_coeff(q)? {
            Coeff::Exact(q) => cfg.q_values = vec![q],
            Coeff::Float(_) => return Err(Error::InvalidParameter("verify needs an exact --q".into())),
        }
    }
    cfg.validate()?;
    let mut lines = Vec::new();
    let mut reports = Vec::new();
    let mut failed = false;
    for s in suites {
        let r = run_verify(s, &cfg)?;
        failed |= !r.ok();
        lines.push(r.to_json());
        reports.push(serde_json::to_value(&r).expect("report serializes"));
    }
    Ok(Output { text: lines.join("\n"), json: Value::Array(reports), failed })
}

fn run(cli: &Cli) -> Result<Output> {
    let g = &cli.global;
    match &cli.command {
        Command::Mul { a, b } => cmd_mul(g, a, b),
        Command::NormalOrder { file } => cmd_normal_order(g, file),
        Command::Norm { file, family } => cmd_norm(g, file, family.as_deref()),
        Command::Quotient { target, geometry } => cmd_quotient(g, target, geometry),
        Command::Kappa { k, geometry } => cmd_kappa(g, k, geometry),
        Command::Fiber { file } => cmd_fiber(g, file),
        Command::Profile { file, grid, geometry } => cmd_profile(g, file, grid, geometry),
        Command::Star { f, g: h, order } => cmd_star(g, f, h, *order),
        Command::Defect { f, g: h_file, h } => cmd_defect(g, f, h_file, *h),
        Command::Sprad { family, d_max } => cmd_sprad(g, family, *d_max),
        Command::Verify { suite, cases, degree, n_max, order, timing } => cmd_verify(
            g,
            VerifyOpts { suite, cases: *cases, degree: *degree, n_max: *n_max, order: *order, timing: *timing },
        ),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(out) => {
            if cli.global.json {
                println!("{}", out.json);
            } else {
                println!("{}", out.text.trim_end_matches('\n'));
            }
            if out.failed {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
