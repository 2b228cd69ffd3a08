//! Sectors of D = {Im ω ≥ 0}, deformed component boundaries ∂D_j^+ and the
//! IVP contour C.

use std::f64::consts::PI;

use crate::dispersion::Dispersion;
use crate::error::{Result, UtmError};
use crate::poly;
use crate::quadrature::{ComplexPath, Segment};
use crate::C64;

/// Angular sectors (θ_lo, θ_hi) of D^+ at infinity, ordered by angle.
#[derive(Debug, Clone, PartialEq)]
pub struct SectorDecomposition {
    pub sectors: Vec<(f64, f64)>,
    pub width: f64,
}

pub fn asymptotic_sectors(disp: &Dispersion) -> SectorDecomposition {
    let n = disp.degree();
    let w = PI / n as f64;
    let shift = if disp.leading() > 0.0 { 0 } else { 1 };
    let sectors = (0..n)
        .filter(|v| (v + shift) % 2 == 0)
        .map(|v| (v as f64 * w, (v + 1) as f64 * w))
        .collect();
    SectorDecomposition { sectors, width: w }
}

/// Bisector angles of the n valleys where e^{−iω_n kⁿ t} decays, for t of
/// the given sign.
pub fn valley_angles(disp: &Dispersion, t_sign: f64) -> Vec<f64> {
    let n = disp.degree() as f64;
    let arg = if disp.leading() * t_sign > 0.0 { 0.0 } else { PI };
    (0..disp.degree()).map(|v| (-PI / 2.0 - arg + 2.0 * PI * v as f64) / n).collect()
}

/// R = 2·max(1, |critical points of ω|, |branch points of ν|).
pub fn choose_truncation_radius(disp: &Dispersion) -> f64 {
    let p = disp.poly();
    let dp = poly::derivative(&p);
    let mut m: f64 = 1.0;
    if dp.len() > 1 && !disp.is_monomial() {
        if let Ok(crit) = poly::roots(&dp) {
            for c in crit {
                m = m.max(c.norm());
                let mut q = p.clone();
                q[0] -= disp.eval(c);
                if let Ok(b) = poly::roots(&q) {
                    for z in b {
                        m = m.max(z.norm());
                    }
                }
            }
        }
    }
    2.0 * m
}

/// Vertices of the clockwise or counter-clockwise arc of radius `r` from
/// angle `from` to `to`, at most 0.2 apart.
pub fn arc_points(r: f64, from: f64, to: f64) -> Vec<C64> {
    let n = ((r * (to - from).abs() / 0.2).ceil() as usize).max(1);
    (0..=n)
        .map(|i| C64::from_polar(r, from + (to - from) * i as f64 / n as f64))
        .collect()
}

fn bridge(r: f64, th_in: f64, th_out: f64) -> ComplexPath {
    let pts = arc_points(r, th_in, th_out);
    let in_dir = C64::from_polar(1.0, th_in);
    let out_dir = C64::from_polar(1.0, th_out);
    let mut segs = vec![Segment::RayIn { end: pts[0], dir: in_dir, len: None }];
    segs.extend(pts.windows(2).map(|w| Segment::Line { a: w[0], b: w[1] }));
    segs.push(Segment::RayOut { start: *pts.last().unwrap(), dir: out_dir, len: None });
    ComplexPath::new(segs)
}

/// Ray angles (in, out) of the deformed ∂D_j^+, placed a fraction γ of the
/// sector width outside the sector so that e^{−iωt} decays for t > 0.
pub fn boundary_ray_angles(disp: &Dispersion, j: usize, gamma: f64) -> Result<(f64, f64)> {
    let sd = asymptotic_sectors(disp);
    let &(lo, hi) = sd.sectors.get(j).ok_or_else(|| UtmError::Contract(format!("no sector {j}")))?;
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(UtmError::Contract("rotation γ must lie in (0, 1)".into()));
    }
    Ok((hi + gamma * sd.width, lo - gamma * sd.width))
}

/// ∂D_j^+ deformed: incoming ray, clockwise arc of radius `r`, outgoing
/// ray, with D_j^+ on the left.
pub fn boundary_contour(disp: &Dispersion, j: usize, r: f64, gamma: f64) -> Result<ComplexPath> {
    let (th_in, th_out) = boundary_ray_angles(disp, j, gamma)?;
    Ok(bridge(r, th_in, th_out))
}

/// C rotated into the valleys for t > 0: the in-ray of the last component,
/// an arc above the origin and the out-ray of the first.
pub fn rotated_ivp_contour(disp: &Dispersion, r: f64, gamma: f64) -> Result<ComplexPath> {
    let last = asymptotic_sectors(disp).sectors.len() - 1;
    let (th_in, _) = boundary_ray_angles(disp, last, gamma)?;
    let (_, th_out) = boundary_ray_angles(disp, 0, gamma)?;
    Ok(bridge(r, th_in, th_out))
}

/// The real line with a semicircular indentation of radius r0 above 0.
pub fn ivp_contour(r_big: f64, r0: f64) -> Result<ComplexPath> {
    if !(r0 > 0.0 && r0 < r_big) {
        return Err(UtmError::Contract("need 0 < r0 < R".into()));
    }
    let pts = arc_points(r0, PI, 0.0);
    let mut segs = vec![Segment::RayIn { end: pts[0], dir: C64::new(-1.0, 0.0), len: None }];
    segs.extend(pts.windows(2).map(|w| Segment::Line { a: w[0], b: w[1] }));
    segs.push(Segment::RayOut { start: *pts.last().unwrap(), dir: C64::new(1.0, 0.0), len: None });
    Ok(ComplexPath::new(segs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{integrate_path, QuadSettings};

    #[test]
    fn sector_examples() {
        assert_eq!(asymptotic_sectors(&Dispersion::schrodinger()).sectors, vec![(0.0, PI / 2.0)]);
        let s = asymptotic_sectors(&Dispersion::airy1()).sectors;
        assert_eq!(s.len(), 1);
        assert!((s[0].0 - PI / 3.0).abs() < 1e-15 && (s[0].1 - 2.0 * PI / 3.0).abs() < 1e-15);
        let s = asymptotic_sectors(&Dispersion::airy2()).sectors;
        assert_eq!(s.len(), 2);
        assert!((s[1].0 - 2.0 * PI / 3.0).abs() < 1e-15 && (s[1].1 - PI).abs() < 1e-15);
    }

    #[test]
    fn sector_count_matches_bc_count() {
        for n in 2..=6 {
            for s in [1.0, -1.0] {
                let d = Dispersion::monomial(s, n).unwrap();
                assert_eq!(asymptotic_sectors(&d).sectors.len(), d.num_boundary_conditions());
            }
        }
    }

    #[test]
    fn radius_examples() {
        assert_eq!(choose_truncation_radius(&Dispersion::airy2()), 2.0);
        let r = choose_truncation_radius(&Dispersion::new(vec![-3.0, 0.0, 1.0]).unwrap());
        assert!(r >= 2.0);
        let r = choose_truncation_radius(&Dispersion::new(vec![-12.0, 0.0, 1.0]).unwrap());
        assert!(r >= 4.0);
    }

    #[test]
    fn contour_geometry() {
        let p = boundary_contour(&Dispersion::schrodinger(), 0, 2.0, 0.5).unwrap();
        assert!(p.is_connected());
        match p.segments[0] {
            Segment::RayIn { dir, .. } => assert!((dir.arg() - 3.0 * PI / 4.0).abs() < 1e-14),
            _ => panic!(),
        }
        match *p.segments.last().unwrap() {
            Segment::RayOut { dir, .. } => assert!((dir.arg() + PI / 4.0).abs() < 1e-14),
            _ => panic!(),
        }
        let (a, b) = boundary_ray_angles(&Dispersion::airy2(), 1, 0.5).unwrap();
        assert!((a - 7.0 * PI / 6.0).abs() < 1e-14 && (b - PI / 2.0).abs() < 1e-14);
        assert!(ivp_contour(1.0, 2.0).is_err());
    }

    #[test]
    fn valley_rays_decay() {
        for d in [Dispersion::schrodinger(), Dispersion::airy1(), Dispersion::airy2()] {
            for th in valley_angles(&d, 1.0) {
                let k = C64::from_polar(3.0, th);
                let e = (-C64::i() * d.eval(k)).re;
                assert!(e < -0.9 * 3f64.powi(d.degree() as i32));
            }
        }
    }

    #[test]
    fn residue_of_ivp_contour() {
        let path = ivp_contour(2.0, 0.5).unwrap();
        let s = QuadSettings::with_tol(1e-9);
        for x in [1.0f64, -1.0] {
            // damp the tails so the rays converge absolutely
            let eps = 1e-3;
            let f = move |k: C64| (C64::i() * k * x - eps * k * k).exp() / (C64::i() * k) / (2.0 * PI);
            let lb = move |k: C64| (C64::i() * k * x - eps * k * k).re - k.norm().ln();
            let v = integrate_path(&f, &path, &s, Some(&lb)).unwrap().value;
            let expect = if x < 0.0 { -1.0 } else { 0.0 };
            assert!((v - expect).norm() < 1e-6, "{x}: {v}");
        }
    }

    #[test]
    fn deformation_invariance() {
        let s = QuadSettings::default();
        for d in [Dispersion::schrodinger(), Dispersion::airy1(), Dispersion::airy2()] {
            for j in 0..asymptotic_sectors(&d).sectors.len() {
                let f = |k: C64| (C64::i() * k - C64::i() * d.eval(k)).exp() / (C64::i() * k);
                let lb = |k: C64| (C64::i() * k - C64::i() * d.eval(k)).re - k.norm().ln();
                let a = integrate_path(&f, &boundary_contour(&d, j, 1.0, 0.25).unwrap(), &s, Some(&lb)).unwrap();
                let b = integrate_path(&f, &boundary_contour(&d, j, 1.0, 0.5).unwrap(), &s, Some(&lb)).unwrap();
                assert!((a.value - b.value).norm() < 1e-9, "{:?}", d);
            }
        }
    }
}
