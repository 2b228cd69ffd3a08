//! Independent reference computations: brute-force contour quadrature of the
//! special functions, the method-of-images solution for ω = k², the weak-form
//! residual and log-log rate fitting.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::contours::asymptotic_sectors;
use crate::error::{Result, UtmError};
use crate::piecewise::PiecewiseData;
use crate::quadrature::gauss_kronrod;
use crate::solver::SolutionEvaluator;
use crate::special::{Selector, SpecialKey};
use crate::C64;

const I: C64 = C64 { re: 0.0, im: 1.0 };

/// One oracle comparison.
#[derive(Debug, Clone, Serialize)]
pub struct OracleReport {
    pub quantity: String,
    pub oracle: C64,
    pub library: C64,
    pub abs_dev: f64,
    pub rel_dev: f64,
    pub tol: f64,
    pub pass: bool,
}

impl OracleReport {
    pub fn new(quantity: &str, oracle: C64, library: C64, tol: f64) -> Self {
        let abs_dev = (oracle - library).norm();
        let rel_dev = abs_dev / oracle.norm().max(f64::MIN_POSITIVE);
        OracleReport { quantity: quantity.into(), oracle, library, abs_dev, rel_dev, tol, pass: abs_dev <= tol }
    }
}

/// I by adaptive Gauss–Kronrod along a long truncated contour through the
/// valley bisectors, with no saddle machinery and no exact shortcuts.
pub fn brute_force_special(key: &SpecialKey, xi: C64, t: f64) -> Result<C64> {
    if !(t > 0.0) || !t.is_finite() || !xi.is_finite() {
        return Err(UtmError::Domain("brute-force evaluation needs t > 0 and finite ξ".into()));
    }
    let disp = &key.disp;
    let n = disp.degree();
    let sectors = asymptotic_sectors(disp).sectors;
    let w = PI / n as f64;
    let (th_in, th_out) = match key.selector {
        Selector::Component(j) => {
            let &(lo, hi) = sectors.get(j).ok_or_else(|| UtmError::Domain(format!("no component {j}")))?;
            (hi + 0.5 * w, lo - 0.5 * w)
        }
        Selector::Sum | Selector::Ivp => (sectors[sectors.len() - 1].1 + 0.5 * w, sectors[0].0 - 0.5 * w),
    };
    let m1 = key.m + 1;
    let f = |k: C64| (I * k * xi - I * disp.eval(k) * t).exp() / (I * k).powi(m1) / (2.0 * PI);
    let r = (1.0 / xi.norm().max(1e-300)).min(1.0);
    let len = |th: f64| -> f64 {
        // first s with Re ψ(s e^{iθ}) < −80 beyond which it keeps falling, then 4× that
        let mut s = r;
        let e = C64::from_polar(1.0, th);
        let mut last = f64::INFINITY;
        for _ in 0..4000 {
            let v = (I * s * e * xi - I * disp.eval(s * e) * t).re;
            if v < -80.0 && v < last {
                break;
            }
            last = v;
            s *= 1.02;
        }
        4.0 * s
    };
    let rel = 1e-12;
    let mut total = C64::new(0.0, 0.0);
    let integrate_line = |a: C64, b: C64| -> C64 {
        let d = b - a;
        let g = |u: f64| f(a + d * u) * d;
        // split long rays so the adaptive rule sees the decaying region
        let pieces = 64;
        let mut acc = C64::new(0.0, 0.0);
        for p in 0..pieces {
            let u0 = p as f64 / pieces as f64;
            let u1 = (p + 1) as f64 / pieces as f64;
            acc += gauss_kronrod(&g, u0, u1, rel, 1e-300).0;
        }
        acc
    };
    let e_in = C64::from_polar(1.0, th_in);
    let e_out = C64::from_polar(1.0, th_out);
    total += integrate_line(e_in * len(th_in), e_in * r);
    // clockwise arc from θ_in down to θ_out
    let arc = |u: f64| {
        let th = th_in + (th_out - th_in) * u;
        let k = C64::from_polar(r, th);
        f(k) * I * k * (th_out - th_in)
    };
    let steps = 32;
    for p in 0..steps {
        total += gauss_kronrod(&arc, p as f64 / steps as f64, (p + 1) as f64 / steps as f64, rel, 1e-300).0;
    }
    total += integrate_line(e_out * r, e_out * len(th_out));
    if !total.is_finite() {
        return Err(UtmError::Numerical("brute-force quadrature diverged".into()));
    }
    Ok(total)
}

/// Free Schrödinger kernel e^{iξ²/(4t)}/√(4πit).
pub fn schrodinger_kernel(xi: f64, t: f64) -> C64 {
    (I * xi * xi / (4.0 * t)).exp() / (4.0 * PI * I * t).sqrt()
}

/// Zero-Dirichlet solution of iq_t + q_xx = 0 by odd reflection:
/// ∫_0^∞ (K(x−y,t) − K(x+y,t)) q_o(y) dy.
pub fn images_ls(q_o: &PiecewiseData, x: f64, t: f64) -> Result<C64> {
    if !(t > 0.0) {
        return Err(UtmError::Domain("the propagator needs t > 0".into()));
    }
    let mut acc = C64::new(0.0, 0.0);
    for p in q_o.pieces() {
        if p.is_zero() {
            continue;
        }
        // the data are negligible beyond the piece's effective end
        let hi = p.b.min(p.effective_end());
        if hi <= p.a {
            continue;
        }
        let mut err = None;
        let f = |y: f64| match p.value(y, 0) {
            Ok(v) => (schrodinger_kernel(x - y, t) - schrodinger_kernel(x + y, t)) * v,
            Err(e) => {
                err.get_or_insert(e);
                C64::new(0.0, 0.0)
            }
        };
        let f = std::cell::RefCell::new(f);
        // panels no wider than the local oscillation scale
        let panels = (((hi - p.a) * (x.abs() + hi) / (2.0 * t) / 3.0).ceil() as usize).clamp(8, 20000);
        for i in 0..panels {
            let a = p.a + (hi - p.a) * i as f64 / panels as f64;
            let b = p.a + (hi - p.a) * (i + 1) as f64 / panels as f64;
            acc += gauss_kronrod(&|y: f64| (f.borrow_mut())(y), a, b, 1e-13, 1e-15).0;
        }
        if let Some(e) = err {
            return Err(e);
        }
    }
    Ok(acc)
}

/// φ(x,t) = b((x−x₀)/r_x)·b((t−t₀)/r_t) with b(u) = (1 − u²)^8 on |u| < 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Bump {
    pub x0: f64,
    pub rx: f64,
    pub t0: f64,
    pub rt: f64,
}

const BUMP_POWER: usize = 8;

/// Derivatives b^{(0..=order)}(u), zero outside (−1, 1).
pub fn bump_derivatives(u: f64, order: usize) -> Vec<f64> {
    if u.abs() >= 1.0 {
        return vec![0.0; order + 1];
    }
    // (1 − u²)^p = Σ_i C(p,i)(−1)^i u^{2i}
    let mut coeffs = vec![0.0; 2 * BUMP_POWER + 1];
    let mut binom = 1.0;
    for i in 0..=BUMP_POWER {
        coeffs[2 * i] = if i % 2 == 0 { binom } else { -binom };
        binom = binom * (BUMP_POWER - i) as f64 / (i + 1) as f64;
    }
    let mut out = Vec::with_capacity(order + 1);
    for _ in 0..=order {
        out.push(coeffs.iter().rev().fold(0.0, |acc, &c| acc * u + c));
        coeffs = coeffs.iter().enumerate().skip(1).map(|(j, &c)| c * j as f64).collect();
        if coeffs.is_empty() {
            coeffs.push(0.0);
        }
    }
    out
}

impl Bump {
    /// ∂_x^a ∂_t^b φ.
    pub fn derivative(&self, x: f64, t: f64, a: usize, b: usize) -> f64 {
        let bx = bump_derivatives((x - self.x0) / self.rx, a);
        let bt = bump_derivatives((t - self.t0) / self.rt, b);
        bx[a] / self.rx.powi(a as i32) * bt[b] / self.rt.powi(b as i32)
    }

    pub fn support(&self) -> ((f64, f64), (f64, f64)) {
        ((self.x0 - self.rx, self.x0 + self.rx), (self.t0 - self.rt, self.t0 + self.rt))
    }
}

/// Rectangle [x0, x1] × [t0, t1].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Rect {
    pub x0: f64,
    pub x1: f64,
    pub t0: f64,
    pub t1: f64,
}

/// Clenshaw–Curtis nodes and weights on [a, b] with n + 1 points.
pub fn clenshaw_curtis(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let mut x = Vec::with_capacity(n + 1);
    let mut w = Vec::with_capacity(n + 1);
    for j in 0..=n {
        let th = PI * j as f64 / n as f64;
        let mut s = 0.0;
        for k in 1..=n / 2 {
            let bk = if 2 * k == n { 1.0 } else { 2.0 };
            s += bk * (2.0 * k as f64 * th).cos() / (4.0 * (k * k) as f64 - 1.0);
        }
        let c = if j == 0 || j == n { 1.0 } else { 2.0 };
        w.push(c / n as f64 * (1.0 - s) * (b - a) / 2.0);
        x.push(a + (b - a) * (1.0 - th.cos()) / 2.0);
    }
    (x, w)
}

/// L_ω[q, φ] = ∫ q(−i∂_tφ − ω(i∂_x)φ) dx dt for each bump, by a tensor
/// Clenshaw–Curtis rule with `nodes` points per axis on the bump's support,
/// which must lie inside Ω. The time axis is split at `t_breaks`, where q
/// loses smoothness in t.
pub fn weak_residual_with(
    q: &(dyn Fn(f64, f64) -> Result<C64> + Sync),
    omega_coeffs: &[f64],
    bumps: &[Bump],
    rect: Rect,
    nodes: usize,
    t_breaks: &[f64],
) -> Result<Vec<C64>> {
    if !(rect.x0 > 0.0 && rect.x1 > rect.x0 && rect.t0 > 0.0 && rect.t1 > rect.t0) {
        return Err(UtmError::Contract("Ω must lie strictly inside (0,∞) × (0,T)".into()));
    }
    let n = nodes.max(3) - 1;
    let mut out = Vec::with_capacity(bumps.len());
    for b in bumps {
        let ((xa, xb), (ta, tb)) = b.support();
        if xa < rect.x0 || xb > rect.x1 || ta < rect.t0 || tb > rect.t1 {
            return Err(UtmError::Contract(format!("bump {b:?} not supported in Ω")));
        }
        let (xs, wx) = clenshaw_curtis(n, xa, xb);
        let mut cuts = vec![ta];
        cuts.extend(t_breaks.iter().copied().filter(|&c| c > ta && c < tb));
        cuts.push(tb);
        let mut ts = Vec::new();
        let mut wt = Vec::new();
        for w in cuts.windows(2) {
            if w[0] > ta {
                // q ~ (t − t_b)^{1/4} after a boundary break; t = t_b + (b − t_b)v⁴ smooths it
                let (v, wv) = clenshaw_curtis(n, 0.0, 1.0);
                let len = w[1] - w[0];
                ts.extend(v.iter().map(|v| w[0] + len * v.powi(4)));
                wt.extend(v.iter().zip(&wv).map(|(v, wv)| wv * 4.0 * v.powi(3) * len));
            } else {
                let (a, b) = clenshaw_curtis(n, w[0], w[1]);
                ts.extend(a);
                wt.extend(b);
            }
        }
        // φ vanishes at the support edges; q is only needed where the weight is live
        let pts: Vec<(usize, usize)> = (0..ts.len())
            .filter(|&i| ts[i] > ta && ts[i] < tb)
            .flat_map(|i| (1..n).map(move |j| (i, j)))
            .collect();
        let terms: Vec<Result<C64>> = pts
            .par_iter()
            .map(|&(i, j)| {
                let (x, t) = (xs[j], ts[i]);
                let mut op = -I * b.derivative(x, t, 0, 1);
                let mut ipow = I;
                for (m, &c) in omega_coeffs.iter().enumerate() {
                    op -= c * ipow * b.derivative(x, t, m + 1, 0);
                    ipow *= I;
                }
                Ok(q(x, t)? * op * wx[j] * wt[i])
            })
            .collect();
        let mut acc = C64::new(0.0, 0.0);
        for v in terms {
            acc += v?;
        }
        out.push(acc);
    }
    Ok(out)
}

/// Weak-form residuals of an evaluator's solution, 64 × 64 nodes.
pub fn weak_residual(ev: &SolutionEvaluator, bumps: &[Bump], rect: Rect) -> Result<Vec<C64>> {
    if rect.t1 > ev.spec().horizon {
        return Err(UtmError::Contract("Ω exceeds the horizon".into()));
    }
    let coeffs = ev.spec().dispersion.coeffs().to_vec();
    let mut breaks: Vec<f64> = ev.spec().boundary.iter().flat_map(|g| g.breakpoints()).collect();
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    weak_residual_with(&|x, t| ev.value(x, t), &coeffs, bumps, rect, 64, &breaks)
}

/// Least-squares slope of log err against log h.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateFit {
    pub slope: f64,
    pub width: f64,
    pub saturated: bool,
}

pub fn rate_fit(pairs: &[(f64, f64)]) -> Result<RateFit> {
    if pairs.len() < 4 {
        return Err(UtmError::Contract("rate fitting needs at least 4 points".into()));
    }
    if pairs.windows(2).any(|w| !(w[1].0 < w[0].0)) || pairs.iter().any(|p| !(p.0 > 0.0)) {
        return Err(UtmError::Contract("h must be positive and strictly decreasing".into()));
    }
    if pairs.iter().any(|p| p.1 == 0.0) {
        return Ok(RateFit { slope: f64::NAN, width: f64::NAN, saturated: true });
    }
    if pairs.iter().any(|p| !(p.1 > 0.0)) {
        return Err(UtmError::Contract("errors must be positive".into()));
    }
    let lx: Vec<f64> = pairs.iter().map(|p| p.0.ln()).collect();
    let ly: Vec<f64> = pairs.iter().map(|p| p.1.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let width = lx
        .iter()
        .zip(&ly)
        .map(|(x, y)| (y - my - slope * (x - mx)).abs())
        .fold(0.0, f64::max);
    Ok(RateFit { slope, width, saturated: false })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dispersion::Dispersion;
    use crate::piecewise::Piece;

    #[test]
    fn brute_force_anchors() {
        let ls = SpecialKey::component(&Dispersion::schrodinger(), 0, 0).unwrap();
        let v = brute_force_special(&ls, C64::new(0.0, 0.0), 1.0).unwrap();
        assert!((v + 0.5).norm() < 1e-10, "{v}");
        let a2 = SpecialKey::component(&Dispersion::airy2(), 0, 0).unwrap();
        let v = brute_force_special(&a2, C64::new(0.0, 0.0), 1.0).unwrap();
        assert!((v + 1.0 / 3.0).norm() < 1e-10, "{v}");
    }

    #[test]
    fn rate_fit_planted() {
        for p in [2.0, 0.25, 1.0 / 6.0, 0.5, 1.5] {
            let pairs: Vec<(f64, f64)> = (0..8).map(|i| {
                let h = 10f64.powf(-0.4 * i as f64);
                (h, 3.0 * h.powf(p))
            }).collect();
            let f = rate_fit(&pairs).unwrap();
            assert!((f.slope - p).abs() < 1e-10 && f.width < 1e-9);
        }
        assert!(rate_fit(&[(1.0, 1.0), (0.5, 0.5), (0.25, 0.25)]).is_err());
        assert!(rate_fit(&[(1.0, 1.0), (0.5, 0.0), (0.25, 0.25), (0.1, 0.1)]).unwrap().saturated);
    }

    #[test]
    fn bump_derivatives_match_differences() {
        let h = 1e-5;
        for u in [-0.7, 0.0, 0.3, 0.8] {
            let d = bump_derivatives(u, 4);
            for k in 0..4 {
                let fd = (bump_derivatives(u + h, k)[k] - bump_derivatives(u - h, k)[k]) / (2.0 * h);
                assert!((fd - d[k + 1]).abs() < 1e-5 * (1.0 + d[k + 1].abs()), "{u} {k}");
            }
        }
    }

    #[test]
    fn plane_wave_annihilates_weak_form() {
        let k0 = 1.3;
        let coeffs = [0.0, 0.0, 1.0];
        let w = k0 * k0 * k0;
        let q = |x: f64, t: f64| Ok((I * (k0 * x - w * t)).exp());
        let bumps = [Bump { x0: 1.5, rx: 0.8, t0: 0.5, rt: 0.3 }];
        let rect = Rect { x0: 0.5, x1: 3.0, t0: 0.1, t1: 0.9 };
        let r = weak_residual_with(&q, &coeffs, &bumps, rect, 64, &[0.4]).unwrap();
        assert!(r[0].norm() < 1e-8, "{}", r[0]);
        let r = weak_residual_with(&|_, _| Ok(C64::new(0.0, 0.0)), &coeffs, &bumps, rect, 64, &[]).unwrap();
        assert_eq!(r[0], C64::new(0.0, 0.0));
        let bad = Rect { x0: 0.0, ..rect };
        assert!(weak_residual_with(&q, &coeffs, &bumps, bad, 64, &[]).is_err());
    }

    fn gaussian_data() -> PiecewiseData {
        PiecewiseData::new(vec![Piece::gaussian(0.0, f64::INFINITY, vec![0.0, 1.0], 0.0, 1.0)], f64::INFINITY).unwrap()
    }

    #[test]
    fn images_match_gaussian_closed_form() {
        // y e^{−y²} is odd, so the free evolution x(1+4it)^{−3/2}e^{−x²/(1+4it)} is exact
        let q = gaussian_data();
        for (x, t) in [(0.5, 0.1), (1.0, 0.5), (2.0, 1.0)] {
            let z = C64::new(1.0, 4.0 * t);
            let exact = x * z.powf(-1.5) * (-x * x / z).exp();
            let v = images_ls(&q, x, t).unwrap();
            assert!((v - exact).norm() < 1e-9, "({x},{t}) {v} {exact}");
        }
        assert_eq!(images_ls(&PiecewiseData::zero(f64::INFINITY), 1.0, 1.0).unwrap(), C64::new(0.0, 0.0));
    }

    #[test]
    fn images_conserve_mass() {
        let q = gaussian_data();
        let mass = |t: f64| {
            let f = |x: f64| C64::new(images_ls(&q, x, t).unwrap().norm_sqr(), 0.0);
            (0..24).map(|i| gauss_kronrod(&f, i as f64 * 0.5, (i + 1) as f64 * 0.5, 1e-12, 1e-16).0.re).sum::<f64>()
        };
        let m0 = (PI / 2.0).sqrt() / 8.0;
        for t in [0.1, 0.3] {
            assert!((mass(t) - m0).abs() < 1e-6, "{t}: {}", mass(t));
        }
    }
}
