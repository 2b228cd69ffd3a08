//! Command bodies. Each returns its output text so runs are testable and
//! output writing stays single-threaded.

use std::fmt::Write as _;

use utm::config::ResolvedConfig;
use utm::expansions::{qloc, DataValues, Example};
use utm::points::parse_points;
use utm::solver::{disc_data_airy2, evaluate_grid, DiscData, FieldSample, SolutionEvaluator};
use utm::special::special_eval_real;
use utm::{dispersion::parse_omega, QuadSettings, Result, Selector, SpecialKey, UtmError, C64};

use crate::output::svg_profiles;

pub const FIELD_HEADER: &str = "x,t,re_q,im_q,err_est,regime";

fn row(out: &mut String, x: f64, t: f64, v: C64, err: f64, regime: &str) {
    let _ = writeln!(out, "{x},{t},{},{},{err},{regime}", v.re, v.im);
}

/// CSV text and the number of failed points. Failed points are written as
/// NaN rows with regime `failed` and summarized in a trailing comment.
pub fn samples_csv(samples: &[FieldSample]) -> (String, usize) {
    let mut out = String::from(FIELD_HEADER);
    out.push('\n');
    let mut failed = 0;
    let mut first_error = None;
    for s in samples {
        row(&mut out, s.x, s.t, s.value, s.err, &s.regime);
        if let Some(e) = &s.error {
            failed += 1;
            first_error.get_or_insert_with(|| format!("({}, {}): {e}", s.x, s.t));
        }
    }
    if let Some(e) = first_error {
        let _ = writeln!(out, "# partial: {failed} of {} points failed; first at {e}", samples.len());
    }
    (out, failed)
}

pub fn evaluator(cfg: &ResolvedConfig) -> Result<SolutionEvaluator> {
    SolutionEvaluator::new(cfg.spec.clone(), cfg.method, cfg.config.quadrature, cfg.config.depth)
}

pub fn eval_csv(cfg: &ResolvedConfig) -> Result<(String, usize)> {
    let ev = evaluator(cfg)?;
    Ok(samples_csv(&evaluate_grid(&ev, &cfg.xs, &cfg.ts)))
}

/// Re q profiles against x, one per time, from t-major samples.
pub fn field_svg(xs: &[f64], ts: &[f64], values: &[C64], title: &str) -> String {
    let series: Vec<(String, Vec<f64>)> =
        ts.iter().enumerate().map(|(i, t)| (format!("t = {t:.3e}"), values[i * xs.len()..(i + 1) * xs.len()].iter().map(|v| v.re).collect())).collect();
    svg_profiles(title, xs, &series)
}

/// Grid re-evaluated at tolerances tol, tol/10, tol/100; rows report the
/// largest deviation from the tightest run.
pub fn converge_csv(cfg: &ResolvedConfig) -> Result<String> {
    let base = cfg.config.quadrature;
    let tols = [base.tol, base.tol / 10.0, base.tol / 100.0];
    let mut runs = Vec::new();
    for &tol in &tols {
        let ev = SolutionEvaluator::new(cfg.spec.clone(), cfg.method, QuadSettings { tol, ..base }, cfg.config.depth)?;
        let samples = evaluate_grid(&ev, &cfg.xs, &cfg.ts);
        if let Some(s) = samples.iter().find(|s| s.error.is_some()) {
            return Err(UtmError::Numerical(format!("at ({}, {}): {}", s.x, s.t, s.error.as_deref().unwrap_or(""))));
        }
        runs.push(samples);
    }
    let finest = runs.last().unwrap().clone();
    let mut out = String::from("tol,max_abs_diff,max_err_est\n");
    for (tol, run) in tols.iter().zip(&runs) {
        let diff = run.iter().zip(&finest).map(|(a, b)| (a.value - b.value).norm()).fold(0.0, f64::max);
        let est = run.iter().map(|s| s.err).fold(0.0, f64::max);
        let _ = writeln!(out, "{tol:e},{diff:e},{est:e}");
    }
    Ok(out)
}

pub fn parse_selector(s: &str) -> Result<Selector> {
    match s {
        "sum" => Ok(Selector::Sum),
        "C" | "c" => Ok(Selector::Ivp),
        _ => match s.parse::<usize>() {
            Ok(j) if j >= 1 => Ok(Selector::Component(j - 1)),
            _ => Err(UtmError::Parse(format!("component '{s}' is not a positive index, 'sum' or 'C'"))),
        },
    }
}

/// I_{ω,m,σ} at the points of a point file.
pub fn special_csv(omega: &str, m: i32, component: &str, points_src: &str, settings: &QuadSettings) -> Result<(String, usize)> {
    let disp = parse_omega(omega)?;
    let key = SpecialKey::new(disp, m, parse_selector(component)?)?;
    let mut pts = parse_points(points_src)?;
    pts.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.total_cmp(&b.0)));
    let mut out = String::from("x,t,re_I,im_I,err_est,regime\n");
    let mut failed = 0;
    let mut first_error = None;
    for (x, t) in pts {
        match special_eval_real(&key, x, t, settings) {
            Ok(v) => {
                let regime = if v.flagged { format!("{}+flagged", v.regime.as_str()) } else { v.regime.as_str().to_string() };
                row(&mut out, x, t, v.value, v.err, &regime)
            }
            Err(e) => {
                failed += 1;
                first_error.get_or_insert_with(|| format!("({x}, {t}): {e}"));
                row(&mut out, x, t, C64::new(f64::NAN, f64::NAN), f64::NAN, "failed");
            }
        }
    }
    if let Some(e) = first_error {
        let _ = writeln!(out, "# partial: {failed} points failed; first at {e}");
    }
    Ok((out, failed))
}

/// A named figure scenario.
#[derive(Debug, Clone, serde::Serialize)]
pub struct Scenario {
    pub name: &'static str,
    pub description: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub example: Option<Example>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub data: Option<DataValues>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub disc: Option<DiscData>,
    pub xs: Vec<f64>,
    pub ts: Vec<f64>,
}

pub const SCENARIOS: [&str; 5] = ["ls-corner", "airy1-corner", "airy2-corner1", "airy2-corner2", "airy2-discdata"];

fn lin(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

fn snapshots(scale: f64, ratio: f64, js: &[i32]) -> Vec<f64> {
    let mut t: Vec<f64> = js.iter().map(|&j| scale * ratio.powi(j)).collect();
    t.sort_by(f64::total_cmp);
    t
}

pub fn scenario(name: &str, t1: f64) -> Result<Scenario> {
    let dv = |q0: f64, q1: Option<f64>, g0: f64, g1: Option<f64>| Some(DataValues { q0: Some(q0), q1, g0: Some(g0), g1 });
    Ok(match name {
        "ls-corner" => Scenario {
            name: "ls-corner",
            description: "q_loc for iq_t + q_xx = 0 with q_o(0) = 1, g_0(0) = -1",
            example: Some(Example::Ls),
            data: dv(1.0, None, -1.0, None),
            disc: None,
            xs: lin(0.0, 2.0, 201),
            ts: snapshots(1.0 / 20.0, 1.0 / 6.0, &[0, 1, 2, 3]),
        },
        "airy1-corner" => Scenario {
            name: "airy1-corner",
            description: "q_loc for q_t = q_xxx with q_o(0) = 1, g_0(0) = -1",
            example: Some(Example::Airy1),
            data: dv(1.0, None, -1.0, None),
            disc: None,
            xs: lin(0.0, 15.0, 301),
            ts: snapshots(1.0 / 20.0, 1.0 / 6.0, &[0, 1, 2, 5]),
        },
        "airy2-corner1" => Scenario {
            name: "airy2-corner1",
            description: "q_loc for q_t + q_xxx = 0 with q_o(0) = 1, q_o'(0) = -1, g_0(0) = -1, g_1(0) = -1",
            example: Some(Example::Airy2First),
            data: dv(1.0, Some(-1.0), -1.0, Some(-1.0)),
            disc: None,
            xs: lin(0.0, 0.5, 201),
            ts: snapshots(1.0 / 300.0, 1.0 / 8.0, &[0, 1, 2, 3, 4, 5]),
        },
        "airy2-corner2" => Scenario {
            name: "airy2-corner2",
            description: "q_loc for q_t + q_xxx = 0 with q_o(0) = 1, q_o'(0) = 0, g_0(0) = 1, g_1(0) = -1",
            example: Some(Example::Airy2Second),
            data: dv(1.0, Some(0.0), 1.0, Some(-1.0)),
            disc: None,
            xs: lin(0.0, 15.0, 301),
            ts: snapshots(1.0 / 10.0, 1.0 / 8.0, &[0, 1, 2, 3, 4]),
        },
        "airy2-discdata" => Scenario {
            name: "airy2-discdata",
            description: "q_t + q_xxx = 0 with q_o = indicator of (1, 2), g_0 = 1 on [0, t1), 0 after, g_1 = -1",
            example: None,
            data: None,
            disc: Some(DiscData { t1, ..DiscData::default() }),
            xs: lin(0.05, 15.0, 300),
            ts: snapshots(1.0 / 10.0, 1.0 / 19.0, &[1, 2, 3, 5]),
        },
        _ => return Err(UtmError::Parse(format!("unknown scenario '{name}'; valid: {}", SCENARIOS.join(", ")))),
    })
}

/// Values of a scenario, t-major, with the CSV text and failure count.
pub fn run_scenario(sc: &Scenario, settings: &QuadSettings) -> Result<(String, Vec<C64>, usize)> {
    use rayon::prelude::*;
    let pts: Vec<(f64, f64)> = sc.ts.iter().flat_map(|&t| sc.xs.iter().map(move |&x| (x, t))).collect();
    let results: Vec<Result<C64>> = match (&sc.example, &sc.data, &sc.disc) {
        (Some(ex), Some(dv), _) => {
            let e = qloc(*ex, dv)?;
            pts.par_iter().map(|&(x, t)| e.eval(x, t, settings)).collect()
        }
        (_, _, Some(d)) => pts.par_iter().map(|&(x, t)| disc_data_airy2(x, t, d, settings)).collect(),
        _ => return Err(UtmError::Contract("scenario has no data".into())),
    };
    let regime = if sc.disc.is_some() { "explicit" } else { "expansion" };
    let mut out = String::from(FIELD_HEADER);
    out.push('\n');
    let mut values = Vec::with_capacity(pts.len());
    let mut failed = 0;
    let mut first_error = None;
    for ((x, t), r) in pts.iter().zip(results) {
        match r {
            Ok(v) => {
                row(&mut out, *x, *t, v, 0.0, regime);
                values.push(v);
            }
            Err(e) => {
                failed += 1;
                first_error.get_or_insert_with(|| format!("({x}, {t}): {e}"));
                let nan = C64::new(f64::NAN, f64::NAN);
                row(&mut out, *x, *t, nan, f64::NAN, "failed");
                values.push(nan);
            }
        }
    }
    if let Some(e) = first_error {
        let _ = writeln!(out, "# partial: {failed} of {} points failed; first at {e}", pts.len());
    }
    Ok((out, values, failed))
}
