//! The acceptance criteria as report rows `check,expected,actual,tol,pass`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use utm::config::parse_config;
use utm::expansions::{cancel_compatible, expansion_zero_bc, qloc, DataValues, Example};
use utm::oracles::{images_ls, rate_fit, weak_residual, Bump, Rect};
use utm::solver::{disc_data_airy2, solve_airy1, solve_airy2, solve_general_monomial, solve_ls, DiscData, SolutionEvaluator};
use utm::special::{asymptotic_eval, quadrature_eval, special_eval_real};
use utm::{Dispersion, IbvpSpec, Piece, PiecewiseData, QuadSettings, Result, Selector, SpecialKey, C64};

use crate::commands::eval_csv;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub check: String,
    pub expected: String,
    pub actual: String,
    pub tol: f64,
    pub pass: bool,
}

impl Check {
    fn new(check: impl Into<String>, expected: impl Into<String>, actual: impl Into<String>, tol: f64, pass: bool) -> Self {
        Check { check: check.into(), expected: expected.into(), actual: actual.into(), tol, pass }
    }

    fn failed(check: impl Into<String>, err: &utm::UtmError) -> Self {
        Check::new(check, "value", format!("error: {err}"), f64::NAN, false)
    }

    pub fn csv_row(&self) -> String {
        format!("{},{},{},{:e},{}", self.check, quote(&self.expected), quote(&self.actual), self.tol, self.pass)
    }
}

fn quote(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn fmt_c(z: C64) -> String {
    if z.im >= 0.0 {
        format!("{}+{}i", z.re, z.im)
    } else {
        format!("{}{}i", z.re, z.im)
    }
}

fn settings() -> QuadSettings {
    QuadSettings::default()
}

fn examples() -> [(&'static str, Dispersion); 3] {
    [("k^2", Dispersion::schrodinger()), ("-k^3", Dispersion::airy1()), ("k^3", Dispersion::airy2())]
}

fn first(d: &Dispersion, m: i32) -> Result<SpecialKey> {
    SpecialKey::component(d, m, 0)
}

fn within(check: String, expected: C64, got: Result<C64>, tol: f64) -> Check {
    match got {
        Ok(v) => Check::new(check, fmt_c(expected), fmt_c(v), tol, (v - expected).norm() <= tol),
        Err(e) => Check::failed(check, &e),
    }
}

fn bounded(check: String, got: Result<C64>, tol: f64) -> Check {
    match got {
        Ok(v) => Check::new(check, format!("|v| <= {tol:e}"), format!("{:e}", v.norm()), tol, v.norm() <= tol),
        Err(e) => Check::failed(check, &e),
    }
}

fn re(v: f64) -> C64 {
    C64::new(v, 0.0)
}

pub fn c01_anchors() -> Vec<Check> {
    let s = settings();
    let mut out = Vec::new();
    let k2 = Dispersion::schrodinger();
    for tau in [0.1, 1.0, 10.0] {
        let v = first(&k2, 0).and_then(|k| special_eval_real(&k, 0.0, tau, &s)).map(|v| v.value);
        out.push(within(format!("anchor I[k^2,0,1](0,{tau})"), re(-0.5), v, 1e-8));
    }
    let k3 = Dispersion::airy2();
    for t in [0.1, 1.0] {
        let v = first(&k3, 0).and_then(|k| special_eval_real(&k, 0.0, t, &s)).map(|v| v.value);
        out.push(within(format!("anchor I[k^3,0,1](0,{t})"), re(-1.0 / 3.0), v, 1e-8));
    }
    out
}

pub fn c02_causality() -> Vec<Check> {
    let s = settings();
    let mut out = Vec::new();
    for (name, d) in examples() {
        let comps = utm::contours::asymptotic_sectors(&d).sectors.len();
        for j in 0..comps {
            for x in [0.0, 0.5, 2.0] {
                for t in [-1e-3, -0.5] {
                    let v = SpecialKey::component(&d, 0, j).and_then(|k| special_eval_real(&k, x, t, &s)).map(|v| v.value);
                    out.push(bounded(format!("causality I[{name},0,{}]({x},{t})", j + 1), v, 1e-10));
                }
            }
        }
    }
    out
}

pub fn c03_small_time() -> Vec<Check> {
    let s = settings();
    examples()
        .iter()
        .map(|(name, d)| {
            let v = first(d, 0).and_then(|k| special_eval_real(&k, 1.0, 1e-8, &s)).map(|v| v.value);
            bounded(format!("small-time I[{name},0,1](1,1e-8)"), v, 1e-6)
        })
        .collect()
}

pub fn c04_regimes() -> Vec<Check> {
    let s = settings();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut out = Vec::new();
    for (name, d) in examples() {
        let n = d.degree() as i32;
        let comps = utm::contours::asymptotic_sectors(&d).sectors.len();
        for _ in 0..20 {
            let m = rng.gen_range(0..2);
            let j = rng.gen_range(0..comps);
            let ax: f64 = rng.gen_range(0.5..3.0);
            let x = if rng.gen_bool(0.5) { ax } else { -ax };
            let t = ax.powi(n) / 50f64.powi(n - 1);
            let check = format!("regimes I[{name},{m},{}]({x:.4},{t:.4e}) X=50", j + 1);
            let r = SpecialKey::component(&d, m, j).and_then(|k| {
                let q = quadrature_eval(&k, C64::new(x, 0.0), t, &s)?;
                let a = asymptotic_eval(&k, x, t)?;
                Ok((q, a))
            });
            out.push(match r {
                Ok((q, a)) => {
                    let tol = q.err + a.err;
                    Check::new(check, fmt_c(q.value), fmt_c(a.value), tol, (q.value - a.value).norm() <= tol)
                }
                Err(e) => Check::failed(check, &e),
            });
        }
    }
    out
}

fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| (lo.ln() + (hi.ln() - lo.ln()) * i as f64 / (n - 1) as f64).exp()).collect()
}

fn slope_check(check: String, pairs: Result<Vec<(f64, f64)>>, expected: f64, lo: f64, hi: f64) -> Check {
    let fit = pairs.and_then(|p| rate_fit(&p));
    match fit {
        Ok(f) if f.saturated => Check::new(check, format!("{expected}"), "saturated", hi - expected, true),
        Ok(f) => Check::new(check, format!("{expected}"), format!("{:.4}", f.slope), (hi - lo) / 2.0, f.slope >= lo && f.slope <= hi),
        Err(e) => Check::failed(check, &e),
    }
}

pub fn c05_small_time_exponent() -> Vec<Check> {
    let s = settings();
    let d = Dispersion::airy2();
    let ts: Vec<f64> = log_grid(1e-2, 1e-4, 9);
    let pairs = first(&d, 0).and_then(|k| ts.iter().map(|&t| Ok((t, special_eval_real(&k, 1.0, t, &s)?.value.norm()))).collect());
    vec![slope_check("small-time slope I[k^3,0,1](1,t)".into(), pairs, 0.25, 0.2, 0.3)]
}

pub fn c06_decay() -> Vec<Check> {
    let s = settings();
    let v = first(&Dispersion::airy1(), 0).and_then(|k| special_eval_real(&k, 10.0, 0.1, &s)).map(|v| v.value);
    vec![bounded("decay I[-k^3,0,1](10,0.1)".into(), v, 1e-8)]
}

fn gaussian_datum() -> Result<PiecewiseData> {
    PiecewiseData::new(vec![Piece::gaussian(0.0, f64::INFINITY, vec![0.0, 1.0], 0.0, 1.0)], f64::INFINITY)
}

pub fn c07_images() -> Vec<Check> {
    let s = settings();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let setup = gaussian_datum().and_then(|q| Ok((q.clone(), IbvpSpec::new(Dispersion::schrodinger(), q, vec![PiecewiseData::zero(1.0)], 1.0)?)));
    let (q, spec) = match setup {
        Ok(v) => v,
        Err(e) => return vec![Check::failed("images setup", &e)],
    };
    (0..20)
        .map(|_| {
            let x: f64 = rng.gen_range(0.05..3.0);
            let t: f64 = rng.gen_range(0.02..1.0);
            let check = format!("images q({x:.4},{t:.4})");
            match images_ls(&q, x, t) {
                Ok(o) => within(check, o, solve_ls(&spec, x, t, &s), 1e-6),
                Err(e) => Check::failed(check, &e),
            }
        })
        .collect()
}

/// A problem with jumps in q_o and g_0 for each example dispersion.
pub fn mixed_spec(d: &Dispersion) -> Result<IbvpSpec> {
    let q = PiecewiseData::new(
        vec![Piece::poly_exp(0.0, 1.0, vec![0.5, 1.0], 1.0), Piece::poly_exp(1.0, f64::INFINITY, vec![-0.3, 0.2], 2.0)],
        f64::INFINITY,
    )?;
    let mut g = vec![PiecewiseData::new(vec![Piece::poly(0.0, 0.4, vec![1.0, -0.5]), Piece::poly_exp(0.4, 1.0, vec![0.2], 1.0)], 1.0)?];
    if d.num_boundary_conditions() == 2 {
        g.push(PiecewiseData::new(vec![Piece::poly(0.0, 1.0, vec![0.3, 0.1])], 1.0)?);
    }
    IbvpSpec::new(d.clone(), q, g, 1.0)
}

pub fn c08_general_vs_closed() -> Vec<Check> {
    let s = settings();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut out = Vec::new();
    type Solver = fn(&IbvpSpec, f64, f64, &QuadSettings) -> Result<C64>;
    let cases: [(&str, Dispersion, Solver); 3] =
        [("k^2", Dispersion::schrodinger(), solve_ls), ("-k^3", Dispersion::airy1(), solve_airy1), ("k^3", Dispersion::airy2(), solve_airy2)];
    for (name, d, closed) in cases {
        let spec = match mixed_spec(&d) {
            Ok(s) => s,
            Err(e) => {
                out.push(Check::failed(format!("general {name} setup"), &e));
                continue;
            }
        };
        for _ in 0..20 {
            let x: f64 = rng.gen_range(0.05..4.0);
            let t: f64 = rng.gen_range(0.02..1.0);
            let check = format!("general vs closed {name} q({x:.4},{t:.4})");
            match closed(&spec, x, t, &s) {
                Ok(c) => out.push(within(check, c, solve_general_monomial(&spec, x, t, &s), 1e-8)),
                Err(e) => out.push(Check::failed(check, &e)),
            }
        }
    }
    out
}

pub fn c09_boundary_recovery() -> Vec<Check> {
    let s = settings();
    let mut out = Vec::new();
    for (name, d) in examples() {
        let ev = (|| {
            let mut g = vec![PiecewiseData::new(vec![Piece::poly_exp(0.0, 1.0, vec![1.0], 1.0)], 1.0)?];
            if d.num_boundary_conditions() == 2 {
                g.push(PiecewiseData::zero(1.0));
            }
            let spec = IbvpSpec::new(d.clone(), PiecewiseData::zero(f64::INFINITY), g, 1.0)?;
            SolutionEvaluator::auto(spec, s)
        })();
        let ev = match ev {
            Ok(e) => e,
            Err(e) => {
                out.push(Check::failed(format!("boundary {name} setup"), &e));
                continue;
            }
        };
        for t in [0.25f64, 0.5] {
            let g = re((-t).exp());
            let xs = [1e-3, 5e-4, 2.5e-4, 1e-4];
            let errs: Result<Vec<f64>> = xs.iter().map(|&x| Ok((ev.value(x, t)? - g).norm())).collect();
            match errs {
                Ok(e) => {
                    out.push(Check::new(format!("boundary {name} |q(1e-3,{t})-g0|"), "<= 1e-2", format!("{:e}", e[0]), 1e-2, e[0] <= 1e-2));
                    let mono = e.windows(2).all(|w| w[1] < w[0]);
                    let trail: Vec<String> = e.iter().map(|v| format!("{v:.3e}")).collect();
                    out.push(Check::new(format!("boundary {name} monotone t={t}"), "decreasing", trail.join(" "), 0.0, mono));
                }
                Err(e) => out.push(Check::failed(format!("boundary {name} t={t}"), &e)),
            }
        }
    }
    out
}

pub fn c10_qloc_walls() -> Vec<Check> {
    let s = settings();
    let mut out = Vec::new();
    let ls = qloc(Example::Ls, &DataValues { q0: Some(1.0), g0: Some(-1.0), ..Default::default() });
    let a2 = qloc(Example::Airy2Second, &DataValues { q0: Some(1.0), q1: Some(0.0), g0: Some(1.0), g1: Some(-1.0) });
    for t in [0.01, 0.1, 1.0, 2.0] {
        let v = ls.as_ref().map_err(|e| e.clone()).and_then(|e| e.eval(1e-6, t, &s));
        out.push(within(format!("qloc LS q(1e-6,{t})"), re(-1.0), v, 1e-4));
    }
    // centered difference about x = 1e-3 over the time range of the profile plot
    let h = 1e-3;
    for t in [0.5, 1.0, 2.0] {
        let d = a2.as_ref().map_err(|e| e.clone()).and_then(|e| Ok((e.eval(2.0 * h, t, &s)? - e.eval(0.0, t, &s)?) / (2.0 * h)));
        out.push(within(format!("qloc Airy2-second centered dq/dx(1e-3,{t})"), re(-1.0), d, 1e-3));
    }
    for t in [0.01, 0.1, 0.5, 1.0, 2.0] {
        let d = a2.as_ref().map_err(|e| e.clone()).and_then(|e| e.dx(0.0, t, &s));
        out.push(within(format!("qloc Airy2-second dq/dx(0,{t})"), re(-1.0), d, 1e-3));
    }
    out
}

pub fn c11_cancellation() -> Vec<Check> {
    let mut out = Vec::new();
    let cases = (|| -> Result<Vec<(&str, IbvpSpec, usize)>> {
        let one = |h: f64| PiecewiseData::constant(1.0, h);
        let q = PiecewiseData::new(vec![Piece::poly_exp(0.0, f64::INFINITY, vec![1.0, 0.5], 1.0)], f64::INFINITY)?;
        Ok(vec![
            ("LS", IbvpSpec::new(Dispersion::schrodinger(), q.clone(), vec![one(1.0)], 1.0)?, 0),
            ("Airy1", IbvpSpec::new(Dispersion::airy1(), q.clone(), vec![one(1.0)], 1.0)?, 0),
            // q_o′(0) = 0.5 − 1 = −0.5 = g_1(0)
            ("Airy2", IbvpSpec::new(Dispersion::airy2(), q, vec![one(1.0), PiecewiseData::constant(-0.5, 1.0)], 1.0)?, 1),
        ])
    })();
    let cases = match cases {
        Ok(c) => c,
        Err(e) => return vec![Check::failed("cancellation setup", &e)],
    };
    for (name, spec, m) in cases {
        match cancel_compatible(&spec, m) {
            Ok(c) => {
                for t in c.combined.iter().filter(|t| t.m <= m as i32) {
                    let Selector::Component(j) = t.selector else { continue };
                    let reduced = c.reduced.iter().find(|r| r.m == t.m && r.selector == t.selector);
                    let actual = reduced.map(|r| r.form.to_string()).unwrap_or_else(|| "0".into());
                    let numeric = c.surviving.terms.iter().any(|s| s.m == t.m && s.selector == t.selector);
                    out.push(Check::new(
                        format!("cancellation {name} I[{},{}]", t.m, j + 1),
                        "0",
                        actual,
                        0.0,
                        reduced.is_none() && !numeric,
                    ));
                }
            }
            Err(e) => out.push(Check::failed(format!("cancellation {name}"), &e)),
        }
    }
    out
}

pub fn c12_residual_order() -> Vec<Check> {
    let s = settings();
    let mut out = Vec::new();
    for (name, d, lo) in [("LS", Dispersion::schrodinger(), 0.25 - 0.1), ("Airy1", Dispersion::airy1(), 1.0 / 6.0 - 0.05)] {
        let pairs = (|| -> Result<Vec<(f64, f64)>> {
            let q = PiecewiseData::new(
                vec![Piece::poly(0.0, 1.0, vec![0.0, 0.3]), Piece::poly_exp(1.0, f64::INFINITY, vec![1.0, -0.5], 1.0)],
                f64::INFINITY,
            )?;
            let spec = IbvpSpec::new(d.clone(), q, vec![PiecewiseData::zero(1.0)], 1.0)?;
            let sc = 1.0;
            let e = expansion_zero_bc(&spec, sc)?;
            let ev = SolutionEvaluator::auto(spec, s)?;
            log_grid(1e-2, 1e-5, 7).into_iter().map(|t| Ok((t, (ev.value(sc, t)? - e.eval(sc, t, &s)?).norm()))).collect()
        })();
        out.push(slope_check(format!("residual slope {name} along x=s"), pairs, lo, lo, f64::INFINITY));
    }
    out
}

pub fn c13_disc_data() -> Vec<Check> {
    let s = settings();
    let dd = DiscData::default();
    let mut out = Vec::new();
    for (x, want) in [(0.5, 0.0), (1.5, 1.0), (4.0, 0.0)] {
        out.push(within(format!("disc-data q({x},1e-6)"), re(want), disc_data_airy2(x, 1e-6, &dd, &s), 0.05));
    }
    let jump = (|| Ok((disc_data_airy2(1.0, dd.t1 + 1e-6, &dd, &s)? - disc_data_airy2(1.0, dd.t1 - 1e-6, &dd, &s)?).norm()))();
    out.push(match jump {
        Ok(j) => Check::new("disc-data jump at x=1 across t1", "< 1e-3", format!("{j:e}"), 1e-3, j < 1e-3),
        Err(e) => Check::failed("disc-data jump at x=1 across t1", &e),
    });
    out
}

pub fn c14_weak_form() -> Vec<Check> {
    let dd = DiscData::default();
    let bumps = [
        Bump { x0: 1.0, rx: 0.45, t0: 0.5, rt: 0.35 },
        Bump { x0: 2.0, rx: 0.9, t0: 0.4, rt: 0.25 },
        Bump { x0: 1.75, rx: 1.2, t0: 0.55, rt: 0.3 },
    ];
    let r = dd.spec(1.0).and_then(|spec| SolutionEvaluator::auto(spec, settings())).and_then(|ev| {
        weak_residual(&ev, &bumps, Rect { x0: 0.5, x1: 3.0, t0: 0.1, t1: 0.9 })
    });
    match r {
        Ok(v) => v
            .iter()
            .enumerate()
            .map(|(i, z)| Check::new(format!("weak form bump {}", i + 1), "<= 1e-4", format!("{:e}", z.norm()), 1e-4, z.norm() <= 1e-4))
            .collect(),
        Err(e) => vec![Check::failed("weak form", &e)],
    }
}

pub const DETERMINISM_CONFIG: &str = r#"{
  "dispersion": [0, 0, 1],
  "initial": [
    {"from": 0, "to": 1, "kind": "poly", "coeffs": [0]},
    {"from": 1, "to": 2, "kind": "poly", "coeffs": [1]},
    {"from": 2, "kind": "poly", "coeffs": [0]}
  ],
  "boundary": [
    [{"from": 0, "to": 0.25, "kind": "poly", "coeffs": [1]}, {"from": 0.25, "kind": "poly", "coeffs": [0]}],
    [{"from": 0, "kind": "poly", "coeffs": [-1]}]
  ],
  "horizon": 1,
  "grid": {"x": {"min": 0.25, "max": 3, "count": 12}, "t": {"min": 0.001, "max": 0.5, "count": 4, "spacing": "log"}}
}"#;

pub fn c15_determinism() -> Vec<Check> {
    let runs: Result<Vec<String>> = (0..2).map(|_| parse_config(DETERMINISM_CONFIG).and_then(|c| eval_csv(&c).map(|(csv, _)| csv))).collect();
    match runs {
        Ok(r) => vec![Check::new("determinism eval csv", "identical", format!("{} bytes, equal={}", r[0].len(), r[0] == r[1]), 0.0, r[0] == r[1])],
        Err(e) => vec![Check::failed("determinism eval csv", &e)],
    }
}

/// Criteria by number with a short name.
pub const CRITERIA: [(u8, &str, fn() -> Vec<Check>); 15] = [
    (1, "exact anchors", c01_anchors),
    (2, "causality", c02_causality),
    (3, "small-time vanishing", c03_small_time),
    (4, "regime agreement", c04_regimes),
    (5, "small-time exponent", c05_small_time_exponent),
    (6, "super-polynomial decay", c06_decay),
    (7, "oracle equivalence", c07_images),
    (8, "closed-form cross-check", c08_general_vs_closed),
    (9, "boundary recovery", c09_boundary_recovery),
    (10, "q_loc wall values", c10_qloc_walls),
    (11, "cancellation exactness", c11_cancellation),
    (12, "expansion residual order", c12_residual_order),
    (13, "disc-data reconstruction", c13_disc_data),
    (14, "weak-form residual", c14_weak_form),
    (15, "determinism", c15_determinism),
];

/// Criteria run by each verify suite.
pub fn suite(name: &str) -> Option<Vec<u8>> {
    Some(match name {
        "anchors" => vec![1, 2, 3, 6, 10, 11],
        "oracles" => vec![4, 7, 8, 9, 15],
        "rates" => vec![5, 12],
        "weakform" => vec![13, 14],
        "all" => (1..=15).collect(),
        _ => match name.parse::<u8>() {
            Ok(n) if (1..=15).contains(&n) => vec![n],
            _ => return None,
        },
    })
}

pub fn run_criterion(n: u8) -> Vec<Check> {
    CRITERIA.iter().find(|c| c.0 == n).map(|c| (c.2)()).unwrap_or_default()
}
