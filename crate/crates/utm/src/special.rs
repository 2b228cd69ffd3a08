//! The special functions I_{ω,m,j}(ξ,t) = (1/2π)∫ e^{ikξ−iω(k)t} dk/(ik)^{m+1}
//! over component contours, their sum and the IVP contour C.

use std::collections::VecDeque;
use std::f64::consts::PI;

use serde::Serialize;

use crate::contours::{arc_points, asymptotic_sectors, boundary_ray_angles, choose_truncation_radius};
use crate::dispersion::Dispersion;
use crate::error::{Result, UtmError};
use crate::poly;
use crate::quadrature::{integrate_path, trace_descent, ComplexPath, QuadSettings, Segment};
use crate::C64;

const I: C64 = C64 { re: 0.0, im: 1.0 };
const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// Quadrature/descent switch on X = |ξ|(|ξ|/t)^{1/(n−1)}.
pub const X_SWITCH: f64 = 50.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Selector {
    Component(usize),
    Sum,
    Ivp,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpecialKey {
    pub disp: Dispersion,
    pub m: i32,
    pub selector: Selector,
}

impl SpecialKey {
    pub fn new(disp: Dispersion, m: i32, selector: Selector) -> Result<Self> {
        if m < -1 {
            return Err(UtmError::Domain(format!("pole order m = {m} below −1")));
        }
        if let Selector::Component(j) = selector {
            let count = asymptotic_sectors(&disp).sectors.len();
            if j >= count {
                return Err(UtmError::Domain(format!("component {j} out of range 0..{count}")));
            }
        }
        Ok(SpecialKey { disp, m, selector })
    }

    pub fn component(disp: &Dispersion, m: i32, j: usize) -> Result<Self> {
        SpecialKey::new(disp.clone(), m, Selector::Component(j))
    }

    pub fn sum(disp: &Dispersion, m: i32) -> Result<Self> {
        SpecialKey::new(disp.clone(), m, Selector::Sum)
    }

    pub fn ivp(disp: &Dispersion, m: i32) -> Result<Self> {
        SpecialKey::new(disp.clone(), m, Selector::Ivp)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Exact,
    Quadrature,
    Asymptotic,
}

impl Regime {
    pub fn as_str(&self) -> &'static str {
        match self {
            Regime::Exact => "exact",
            Regime::Quadrature => "quadrature",
            Regime::Asymptotic => "asymptotic",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpecialValue {
    pub value: C64,
    pub regime: Regime,
    pub err: f64,
    /// A fallback was taken or quadrature did not converge.
    pub flagged: bool,
}

impl SpecialValue {
    fn exact(value: C64) -> Self {
        SpecialValue { value, regime: Regime::Exact, err: 0.0, flagged: false }
    }
}

/// X = |ξ|(|ξ|/t)^{1/(n−1)}.
pub fn large_parameter(n: usize, xi: C64, t: f64) -> f64 {
    let a = xi.norm();
    a * (a / t).powf(1.0 / (n as f64 - 1.0))
}

/// Coefficients of ψ(k) = ikξ − iω(k)t.
pub fn phase_coeffs(disp: &Dispersion, xi: C64, t: f64) -> Vec<C64> {
    let mut p = vec![ZERO; disp.degree() + 1];
    for (j, &w) in disp.coeffs().iter().enumerate() {
        p[j + 1] = -I * w * t;
    }
    p[1] += I * xi;
    p
}

/// Taylor coefficients a_0.. of e^{ikx−iω(k)t} at k = 0 and ρ = |x| + |t|^{1/n}.
pub fn taylor_coeffs(disp: &Dispersion, x: C64, t: f64, count: usize) -> (Vec<C64>, f64) {
    let p = phase_coeffs(disp, x, t);
    let mut a = vec![ZERO; count.max(1)];
    a[0] = C64::new(1.0, 0.0);
    for j in 1..count {
        let mut s = ZERO;
        for i in 1..=j.min(p.len() - 1) {
            s += p[i] * a[j - i] * i as f64;
        }
        a[j] = s / j as f64;
    }
    let rho = x.norm() + t.abs().powf(1.0 / disp.degree() as f64);
    (a, rho)
}

/// Res_{k=0} e^{ψ(k)}/(ik)^{m+1}.
fn residue(disp: &Dispersion, m: i32, xi: C64, t: f64) -> C64 {
    if m < 0 {
        return ZERO;
    }
    let (a, _) = taylor_coeffs(disp, xi, t, m as usize + 1);
    a[m as usize] / I.powi(m + 1)
}

fn is_real(xi: C64) -> bool {
    xi.im == 0.0
}

/// Nominal (in, out) valley-bisector angles of the contour for t > 0.
fn nominal_angles(disp: &Dispersion, sel: Selector) -> Result<(f64, f64)> {
    match sel {
        Selector::Component(j) => boundary_ray_angles(disp, j, 0.5),
        _ => {
            let last = asymptotic_sectors(disp).sectors.len() - 1;
            Ok((boundary_ray_angles(disp, last, 0.5)?.0, boundary_ray_angles(disp, 0, 0.5)?.1))
        }
    }
}

pub fn special_eval(key: &SpecialKey, xi: C64, t: f64, s: &QuadSettings) -> Result<SpecialValue> {
    if !xi.is_finite() || !t.is_finite() {
        return Err(UtmError::Domain("non-finite argument".into()));
    }
    let m = key.m;
    match key.selector {
        Selector::Component(_) => {
            if t <= 0.0 {
                if !is_real(xi) || xi.re < 0.0 {
                    return Err(UtmError::Domain(format!("component contour at t = {t} needs real ξ ≥ 0")));
                }
                if t == 0.0 && m == -1 {
                    return Err(UtmError::Domain("m = −1 diverges at t = 0".into()));
                }
                return Ok(SpecialValue::exact(ZERO));
            }
            general(key, xi, t, s)
        }
        Selector::Sum => {
            if t > 0.0 {
                return general(key, xi, t, s);
            }
            let count = asymptotic_sectors(&key.disp).sectors.len();
            let mut out = SpecialValue::exact(ZERO);
            for j in 0..count {
                let v = special_eval(&SpecialKey { selector: Selector::Component(j), ..key.clone() }, xi, t, s)?;
                out.value += v.value;
            }
            Ok(out)
        }
        Selector::Ivp => {
            if t < 0.0 {
                return Err(UtmError::Domain("the IVP contour needs t ≥ 0".into()));
            }
            if t == 0.0 {
                if m < 0 {
                    return Err(UtmError::Domain("m = −1 diverges at t = 0".into()));
                }
                if !is_real(xi) {
                    return Err(UtmError::Domain("t = 0 needs real ξ".into()));
                }
                let x = xi.re;
                let v = if x > 0.0 {
                    0.0
                } else if x < 0.0 {
                    let fact: f64 = (1..=m).map(|i| i as f64).product();
                    -x.powi(m) / fact
                } else if m == 0 {
                    -0.5
                } else {
                    0.0
                };
                return Ok(SpecialValue::exact(C64::new(v, 0.0)));
            }
            general(key, xi, t, s)
        }
    }
}

/// Real-argument convenience wrapper.
pub fn special_eval_real(key: &SpecialKey, x: f64, t: f64, s: &QuadSettings) -> Result<SpecialValue> {
    special_eval(key, C64::new(x, 0.0), t, s)
}

fn general(key: &SpecialKey, xi: C64, t: f64, s: &QuadSettings) -> Result<SpecialValue> {
    let v = general_unchecked(key, xi, t, s)?;
    if !v.value.is_finite() {
        return Err(UtmError::Numerical(format!("non-finite value at ξ = {xi}, t = {t}")));
    }
    Ok(v)
}

fn general_unchecked(key: &SpecialKey, xi: C64, t: f64, s: &QuadSettings) -> Result<SpecialValue> {
    let n = key.disp.degree();
    if xi.norm() > 0.0 && large_parameter(n, xi, t) > X_SWITCH {
        match descent_eval(key, xi, t, s) {
            Ok(v) => return Ok(v),
            Err(e) if e.is_numerical() => {
                let mut v = quadrature_eval(key, xi, t, s)?;
                v.flagged = true;
                return Ok(v);
            }
            Err(e) => return Err(e),
        }
    }
    quadrature_eval(key, xi, t, s)
}

/// Real cubic-ish polynomial p(s) = Re ψ(s e^{iθ}) in ascending order.
fn ray_profile(psi: &[C64], th: f64) -> Vec<f64> {
    let e = C64::from_polar(1.0, th);
    let mut ej = C64::new(1.0, 0.0);
    psi.iter()
        .map(|&c| {
            let v = (c * ej).re;
            ej *= e;
            v
        })
        .collect()
}

fn eval_real(p: &[f64], s: f64) -> f64 {
    p.iter().rev().fold(0.0, |acc, &c| acc * s + c)
}

/// Largest real critical point of q(s) = p(s) − (m+1) ln s beyond `from`,
/// and the maximum of q on [from, ∞).
fn ray_extent(p: &[f64], m: i32, from: f64) -> (f64, f64) {
    let mp = (m + 1) as f64;
    let q = |s: f64| eval_real(p, s) - mp * s.ln();
    // s p'(s) − (m+1)
    let mut c: Vec<C64> = p.iter().enumerate().map(|(j, &a)| C64::new(a * j as f64, 0.0)).collect();
    c[0] -= mp;
    let mut last = from;
    let mut best = q(from);
    if let Ok(r) = poly::roots(&c) {
        for z in r {
            if z.re > from && z.im.abs() <= 1e-7 * (1.0 + z.re) {
                last = last.max(z.re);
                best = best.max(q(z.re));
            }
        }
    }
    (last, best)
}

/// Chooses the ray angle in the valley around `center` minimizing the
/// largest log-modulus on the ray.
fn optimize_ray(disp: &Dispersion, psi: &[C64], m: i32, center: f64, r_a: f64) -> f64 {
    let n = disp.degree() as f64;
    let reach = (0.1f64).acos() / n;
    let mut best = (f64::INFINITY, 0.0, center);
    for i in 0..=24 {
        let off = -reach + 2.0 * reach * i as f64 / 24.0;
        let th = center + off;
        let (_, peak) = ray_extent(&ray_profile(psi, th), m, r_a);
        let cand = (peak, off.abs(), th);
        if cand.0 < best.0 - 1e-9 || (cand.0 <= best.0 + 1e-9 && cand.1 < best.1) {
            best = cand;
        }
    }
    best.2
}

/// Length along the ray beyond which the integrand stays below `target`.
fn ray_cut(p: &[f64], m: i32, r_a: f64, target: f64) -> f64 {
    let mp = (m + 1) as f64;
    let q = |s: f64| eval_real(p, s) - mp * s.ln();
    let (start, _) = ray_extent(p, m, r_a);
    let mut lo = start;
    let mut hi = start.max(r_a) * 1.5 + 1.0;
    let mut guard = 0;
    while q(hi) > target && guard < 200 {
        lo = hi;
        hi *= 1.5;
        guard += 1;
    }
    if q(lo) <= target {
        return lo;
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if q(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

/// Radius solving Σ|ω_j| r^j t = 1.
fn time_radius(disp: &Dispersion, t: f64) -> f64 {
    let f = |r: f64| disp.coeffs().iter().enumerate().map(|(j, w)| w.abs() * r.powi(j as i32 + 1)).sum::<f64>() * t - 1.0;
    let mut lo = 0.0;
    let mut hi = 1.0;
    while f(hi) < 0.0 {
        hi *= 2.0;
    }
    for _ in 0..80 {
        let m = 0.5 * (lo + hi);
        if f(m) < 0.0 {
            lo = m;
        } else {
            hi = m;
        }
    }
    hi
}

struct QuadContour {
    path: ComplexPath,
    r_a: f64,
}

fn build_quadrature_contour(key: &SpecialKey, xi: C64, t: f64, s: &QuadSettings) -> Result<QuadContour> {
    let disp = &key.disp;
    let psi = phase_coeffs(disp, xi, t);
    let mut r_a = choose_truncation_radius(disp).min(time_radius(disp, t));
    if xi.norm() > 0.0 {
        r_a = r_a.min(1.0 / xi.norm());
    }
    let (c_in, c_out) = nominal_angles(disp, key.selector)?;
    let th_in = optimize_ray(disp, &psi, key.m, c_in, r_a);
    let th_out = optimize_ray(disp, &psi, key.m, c_out, r_a);
    let target = (s.tol / s.safety).ln();
    let l_in = ray_cut(&ray_profile(&psi, th_in), key.m, r_a, target);
    let l_out = ray_cut(&ray_profile(&psi, th_out), key.m, r_a, target);
    let pts = arc_points(r_a, th_in, th_out);
    let din = C64::from_polar(1.0, th_in);
    let dout = C64::from_polar(1.0, th_out);
    let mut segs = vec![Segment::RayIn { end: pts[0], dir: din, len: Some((l_in - r_a).max(0.0)) }];
    segs.extend(pts.windows(2).map(|w| Segment::Line { a: w[0], b: w[1] }));
    segs.push(Segment::RayOut { start: *pts.last().unwrap(), dir: dout, len: Some((l_out - r_a).max(0.0)) });
    Ok(QuadContour { path: ComplexPath::new(segs), r_a })
}

fn integrand(psi: Vec<C64>, m: i32) -> impl Fn(C64) -> C64 {
    move |k: C64| {
        let e = poly::eval(&psi, k).exp();
        if m < 0 {
            e / (2.0 * PI)
        } else {
            e / (I * k).powi(m + 1) / (2.0 * PI)
        }
    }
}

/// Direct quadrature over the valley-rotated contour.
pub fn quadrature_eval(key: &SpecialKey, xi: C64, t: f64, s: &QuadSettings) -> Result<SpecialValue> {
    if !(t > 0.0) {
        return Err(UtmError::Domain("quadrature regime needs t > 0".into()));
    }
    let c = build_quadrature_contour(key, xi, t, s)?;
    let _ = c.r_a;
    let f = integrand(phase_coeffs(&key.disp, xi, t), key.m);
    let r = integrate_path(&f, &c.path, s, None)?;
    Ok(SpecialValue {
        value: r.value,
        regime: Regime::Quadrature,
        err: r.err + s.tol,
        flagged: !r.converged,
    })
}

fn valley_index(disp: &Dispersion, th: f64) -> usize {
    let n = disp.degree() as f64;
    let arg = if disp.leading() > 0.0 { 0.0 } else { PI };
    let v = ((th * n + PI / 2.0 + arg) / (2.0 * PI)).round();
    (v.rem_euclid(n)) as usize
}

struct SaddleTrace {
    k: C64,
    /// Branch leaving along −d0 and along +d0.
    branches: [Vec<C64>; 2],
    /// None when the branch ran into another saddle.
    valleys: [Option<usize>; 2],
    /// Saddle a branch ran into.
    hits: [Option<usize>; 2],
    weight: f64,
}

fn winding_number(poly_loop: &[C64]) -> i64 {
    let mut total = 0.0;
    for w in poly_loop.windows(2) {
        let mut d = w[1].arg() - w[0].arg();
        while d > PI {
            d -= 2.0 * PI;
        }
        while d < -PI {
            d += 2.0 * PI;
        }
        total += d;
    }
    (total / (2.0 * PI)).round() as i64
}

/// Saddles, their descent branches and the chain of saddles connecting the
/// in-valley to the out-valley.
struct DescentPlan {
    traces: Vec<SaddleTrace>,
    /// (saddle index, traversed from branch 0 to branch 1)
    chain: Vec<(usize, bool)>,
    winding: i64,
    /// Saddles the chain passes through along a saddle connection; their
    /// share of the integral and the residue depend on the side taken.
    stokes: Vec<usize>,
}

/// Valley to valley through a chain of saddles, with the saddle reached
/// along a connection if any.
type Edge = (usize, usize, Vec<(usize, bool)>, Option<usize>);

fn plan_descent(key: &SpecialKey, psi: &[C64], drop: f64) -> Result<DescentPlan> {
    let disp = &key.disp;
    let n = disp.degree();
    let mp = (key.m + 1) as f64;
    let dpsi = poly::derivative(psi);
    let saddles = poly::roots(&dpsi)?;
    let lead = psi[n];
    let mut r_dom: f64 = saddles.iter().map(|z| z.norm()).fold(0.0, f64::max) * 2.0;
    for j in 1..n {
        r_dom = r_dom.max(4.0 * (psi[j].norm() / lead.norm()).powf(1.0 / (n - j) as f64));
    }
    let min_saddle = saddles.iter().map(|z| z.norm()).fold(f64::INFINITY, f64::min);
    let mut traces = Vec::new();
    for &k in &saddles {
        let d2 = poly::eval2(psi, k).2;
        let d2_scale: f64 = (2..=n).map(|j| (j * (j - 1)) as f64 * psi[j].norm() * k.norm().powi(j as i32 - 2)).sum();
        if d2.norm() < 1e-8 * d2_scale {
            return Err(UtmError::Numerical(format!("degenerate saddle at {k}")));
        }
        let h = 0.1 / d2.norm().sqrt();
        let d0 = C64::from_polar(1.0, (PI - d2.arg()) / 2.0);
        let top = poly::eval(psi, k).re;
        let far = |z: C64| {
            z.norm() >= r_dom && (lead * z.powu(n as u32)).re <= -0.5 * lead.norm() * z.norm().powi(n as i32)
                && poly::eval(psi, z).re <= top - drop
        };
        let mut branches: [Vec<C64>; 2] = [Vec::new(), Vec::new()];
        let mut valleys = [None; 2];
        let mut hits = [None; 2];
        for (b, dir) in [-d0, d0].into_iter().enumerate() {
            match trace_descent(psi, k, dir, f64::INFINITY, h, &far) {
                Ok(tr) => {
                    let end = *tr.points.last().unwrap();
                    if !tr.near_saddle {
                        valleys[b] = Some(valley_index(disp, end.arg()));
                    } else {
                        hits[b] = saddles
                            .iter()
                            .enumerate()
                            .filter(|(_, z)| (**z - k).norm() > 0.0)
                            .min_by(|a, b| (*a.1 - end).norm().total_cmp(&(*b.1 - end).norm()))
                            .map(|(i, _)| i);
                    }
                    branches[b] = tr.points;
                }
                Err(e) if e.is_numerical() => branches[b] = vec![k],
                Err(e) => return Err(e),
            }
        }
        let weight = top - mp * k.norm().ln();
        traces.push(SaddleTrace { k, branches, valleys, hits, weight });
    }
    let _ = min_saddle;
    let (c_in, c_out) = nominal_angles(disp, key.selector)?;
    let (v_in, v_out) = (valley_index(disp, c_in), valley_index(disp, c_out));
    // Edges between valleys: a saddle whose branches reach two valleys, or
    // a saddle whose branch runs into a second saddle and on to its valleys.
    let mut edges: Vec<Edge> = Vec::new();
    for (i, tr) in traces.iter().enumerate() {
        for (a, b) in [(0, 1), (1, 0)] {
            let Some(va) = tr.valleys[a] else { continue };
            if let Some(vb) = tr.valleys[b] {
                edges.push((va, vb, vec![(i, a == 0)], None));
            } else if let Some(s2) = tr.hits[b] {
                for vb in traces[s2].valleys.iter().flatten() {
                    edges.push((va, *vb, vec![(i, a == 0)], Some(s2)));
                    edges.push((*vb, va, vec![(i, a != 0)], Some(s2)));
                }
            }
        }
    }
    let mut prev: Vec<Option<(usize, usize)>> = vec![None; n];
    let mut seen = vec![false; n];
    seen[v_in] = true;
    let mut queue = VecDeque::from([v_in]);
    while let Some(v) = queue.pop_front() {
        if v == v_out {
            break;
        }
        for (e, (from, to, _, _)) in edges.iter().enumerate() {
            if *from == v && from != to && !seen[*to] {
                seen[*to] = true;
                prev[*to] = Some((v, e));
                queue.push_back(*to);
            }
        }
    }
    if !seen[v_out] {
        return Err(UtmError::Numerical("saddle graph does not connect the contour ends".into()));
    }
    let mut chain = Vec::new();
    let mut stokes = Vec::new();
    let mut v = v_out;
    while v != v_in {
        let (p, e) = prev[v].unwrap();
        chain.extend(edges[e].2.iter().rev().copied());
        stokes.extend(edges[e].3);
        v = p;
    }
    chain.reverse();
    if !stokes.is_empty() {
        return Ok(DescentPlan { traces, chain, winding: 0, stokes });
    }
    let far_r = r_dom.max(1.0) * 3.0;
    let path = chain_polyline(&traces, &chain);
    let r_a = min_saddle.min(1.0) * 0.5;
    let mut lp = vec![C64::from_polar(far_r, c_in)];
    lp.extend(arc_points(r_a, c_in, c_out));
    lp.push(C64::from_polar(far_r, c_out));
    lp.extend(path.iter().rev().copied());
    lp.push(lp[0]);
    if lp.iter().any(|z| z.norm() == 0.0) {
        return Err(UtmError::Numerical("descent path through the origin".into()));
    }
    let winding = winding_number(&lp);
    Ok(DescentPlan { traces, chain, winding, stokes })
}

fn oriented(tr: &SaddleTrace, fwd: bool) -> Vec<C64> {
    let (a, b) = if fwd { (0, 1) } else { (1, 0) };
    let mut pts: Vec<C64> = tr.branches[a].iter().rev().copied().collect();
    pts.extend(tr.branches[b].iter().skip(1).copied());
    pts
}

fn chain_polyline(traces: &[SaddleTrace], chain: &[(usize, bool)]) -> Vec<C64> {
    let mut out = Vec::new();
    for &(i, fwd) in chain {
        out.extend(oriented(&traces[i], fwd));
    }
    out
}

/// Largest term of ψ at `k`; rounding in e^ψ is about this times ε.
fn phase_size(psi: &[C64], k: C64) -> f64 {
    psi.iter().enumerate().map(|(j, c)| c.norm() * k.norm().powi(j as i32)).fold(0.0, f64::max)
}

/// Numerical steepest descent with the residue correction.
pub fn descent_eval(key: &SpecialKey, xi: C64, t: f64, s: &QuadSettings) -> Result<SpecialValue> {
    let psi = phase_coeffs(&key.disp, xi, t);
    let drop = (1.0 / s.tol).ln() + 5.0;
    let plan = plan_descent(key, &psi, drop)?;
    if !plan.stokes.is_empty() {
        return Err(UtmError::Numerical("descent path runs along a saddle connection".into()));
    }
    let m = key.m;
    let mp = (m + 1) as f64;
    let res = if plan.winding != 0 { residue(&key.disp, m, xi, t) } else { ZERO };
    let mut level = plan.chain.iter().map(|&(i, _)| plan.traces[i].weight).fold(f64::NEG_INFINITY, f64::max);
    if res.norm() > 0.0 {
        level = level.max(res.norm().ln());
    }
    let cut = level - drop;
    let f = integrand(psi.clone(), m);
    let logmod = |z: C64| poly::eval(&psi, z).re - mp * z.norm().ln();
    let min_saddle = plan.traces.iter().map(|tr| tr.k.norm()).fold(f64::INFINITY, f64::min);
    let mut total = ZERO;
    let mut err = 0.0;
    let mut phase_err: f64 = 0.0;
    for &(i, fwd) in &plan.chain {
        let tr = &plan.traces[i];
        if tr.weight < cut - 5.0 {
            continue;
        }
        let pts = oriented(tr, fwd);
        let keep: Vec<usize> = (0..pts.len()).filter(|&j| logmod(pts[j]) >= cut).collect();
        let (Some(&a), Some(&b)) = (keep.first(), keep.last()) else { continue };
        let a = a.saturating_sub(1);
        let b = (b + 1).min(pts.len() - 1);
        if m >= 0 && pts[a..=b].iter().any(|z| z.norm() < 0.2 * min_saddle.min(1.0)) {
            return Err(UtmError::Numerical("descent path passes near the pole".into()));
        }
        let scale = level.exp() / poly::eval2(&psi, tr.k).2.norm().sqrt();
        let cond = phase_size(&psi, tr.k) * f64::EPSILON;
        phase_err = phase_err.max(cond);
        for w in pts[a..=b].windows(2) {
            let (za, zb) = (w[0], w[1]);
            let g = |u: f64| f(za + (zb - za) * u) * (zb - za);
            let (v, e) = crate::quadrature::gauss_kronrod(&g, 0.0, 1.0, 1e-13, (s.tol * 1e-3).max(cond) * scale);
            total += v;
            err += e;
        }
    }
    let value = total + I * plan.winding as f64 * res;
    let floor = (cut).exp() + 1e-15 * level.exp() + phase_err * total.norm();
    Ok(SpecialValue { value, regime: Regime::Asymptotic, err: err + floor, flagged: false })
}

/// Leading saddle term of ∫ e^ψ (ik)^{-(m+1)} dk / 2π through `k` along
/// `dir`, with the relative size of the first correction.
fn saddle_term(psi: &[C64], m: i32, k: C64, dir: C64) -> (C64, f64) {
    let d1 = poly::derivative(psi);
    let d2 = poly::derivative(&d1);
    let d3 = poly::derivative(&d2);
    let d4 = poly::derivative(&d3);
    let a = -poly::eval(&d2, k);
    let (p3, p4) = (poly::eval(&d3, k), poly::eval(&d4, k));
    let mp = (m + 1) as f64;
    let (g1, g2) = if m < 0 { (ZERO, ZERO) } else { (-mp / k, mp * (mp + 1.0) / (k * k)) };
    let c1 = g2 / (2.0 * a) + g1 * p3 / (2.0 * a * a) + p4 / (8.0 * a * a) + 5.0 * p3 * p3 / (24.0 * a * a * a);
    let amp = if m < 0 { C64::new(1.0, 0.0) } else { (I * k).powi(m + 1) };
    let v = poly::eval(psi, k).exp() / amp * (2.0 * PI / a.norm()).sqrt() * dir / (2.0 * PI);
    (v, c1.norm())
}

/// Leading saddle-point term over the saddles the deformed contour crosses,
/// plus the residue term. The error estimate is twice the first correction
/// term. Across a saddle connection the residue and the connected saddle
/// depend on the side of the Stokes line and go into the estimate.
pub fn asymptotic_eval(key: &SpecialKey, x: f64, t: f64) -> Result<SpecialValue> {
    if !(t > 0.0) || x == 0.0 {
        return Err(UtmError::Domain("asymptotics need x ≠ 0 and t > 0".into()));
    }
    let xi = C64::new(x, 0.0);
    let psi = phase_coeffs(&key.disp, xi, t);
    let plan = plan_descent(key, &psi, 40.0)?;
    let m = key.m;
    let mut total = ZERO;
    let mut err = 0.0;
    for &(i, fwd) in &plan.chain {
        let k = plan.traces[i].k;
        let d0 = C64::from_polar(1.0, (PI - poly::eval2(&psi, k).2.arg()) / 2.0);
        let (v, c1) = saddle_term(&psi, m, k, if fwd { d0 } else { -d0 });
        total += v;
        err += 2.0 * c1 * v.norm();
    }
    if plan.winding != 0 {
        total += I * plan.winding as f64 * residue(&key.disp, m, xi, t);
    }
    for &i in &plan.stokes {
        err += saddle_term(&psi, m, plan.traces[i].k, C64::new(1.0, 0.0)).0.norm();
        err += residue(&key.disp, m, xi, t).norm();
    }
    let big_x = large_parameter(key.disp.degree(), xi, t);
    err += total.norm() / (big_x * big_x);
    Ok(SpecialValue { value: total, regime: Regime::Asymptotic, err, flagged: false })
}

/// K_t(x) = Σ_j I_{ω,−1,j}(x,t).
pub fn kernel_kt(disp: &Dispersion, x: f64, t: f64, s: &QuadSettings) -> Result<SpecialValue> {
    if !(t > 0.0) {
        return Err(UtmError::Domain("K_t needs t > 0".into()));
    }
    special_eval(&SpecialKey::sum(disp, -1)?, C64::new(x, 0.0), t, s)
}
