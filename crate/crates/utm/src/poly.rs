//! Dense complex polynomials in ascending coefficient order and an
//! Aberth-Ehrlich root finder.

use crate::error::{Result, UtmError};
use crate::C64;

/// Horner evaluation of `sum c[j] z^j`.
pub fn eval(c: &[C64], z: C64) -> C64 {
    c.iter().rev().fold(C64::new(0.0, 0.0), |acc, &a| acc * z + a)
}

/// Value, first and second derivative in one pass.
pub fn eval2(c: &[C64], z: C64) -> (C64, C64, C64) {
    let zero = C64::new(0.0, 0.0);
    let (mut p, mut d1, mut d2) = (zero, zero, zero);
    for &a in c.iter().rev() {
        d2 = d2 * z + d1 * 2.0;
        d1 = d1 * z + p;
        p = p * z + a;
    }
    (p, d1, d2)
}

pub fn derivative(c: &[C64]) -> Vec<C64> {
    c.iter()
        .enumerate()
        .skip(1)
        .map(|(j, &a)| a * j as f64)
        .collect()
}

pub fn multiply(a: &[C64], b: &[C64]) -> Vec<C64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![C64::new(0.0, 0.0); a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Drops trailing zero coefficients.
pub fn trim(mut c: Vec<C64>) -> Vec<C64> {
    while c.len() > 1 && c.last().is_some_and(|a| *a == C64::new(0.0, 0.0)) {
        c.pop();
    }
    c
}

/// Upper bound on the moduli of all roots.
pub fn cauchy_bound(c: &[C64]) -> f64 {
    let n = c.len() - 1;
    let lead = c[n].norm();
    1.0 + c[..n].iter().map(|a| a.norm() / lead).fold(0.0, f64::max)
}

/// All roots of a polynomial of degree at least one, with multiplicity.
pub fn roots(c: &[C64]) -> Result<Vec<C64>> {
    let c = trim(c.to_vec());
    let n = c.len() - 1;
    if n == 0 || c[n].norm() == 0.0 {
        return Err(UtmError::Roots("constant polynomial".into()));
    }
    if n == 1 {
        return Ok(vec![-c[0] / c[1]]);
    }
    let scale = c.iter().map(|a| a.norm()).fold(0.0, f64::max);
    let lead = c[n];
    let monic: Vec<C64> = c.iter().map(|&a| a / lead).collect();
    let r0 = {
        let b = cauchy_bound(&monic);
        let nz = monic.iter().position(|a| a.norm() > 0.0).unwrap_or(0);
        if nz > 0 {
            // zero roots of multiplicity nz are seeded near the origin
            b.min(1.0)
        } else {
            let g = (monic[0].norm()).powf(1.0 / n as f64);
            g.clamp(1e-3 * b, b)
        }
    };
    let mut z: Vec<C64> = (0..n)
        .map(|j| C64::from_polar(r0, 2.0 * std::f64::consts::PI * (j as f64 + 0.25) / n as f64 + 0.4))
        .collect();
    let dc = derivative(&monic);
    let mut converged = false;
    for _ in 0..800 {
        let mut max_step: f64 = 0.0;
        for i in 0..n {
            let p = eval(&monic, z[i]);
            if p.norm() == 0.0 {
                continue;
            }
            let d = eval(&dc, z[i]);
            let ratio = p / d;
            let mut s = C64::new(0.0, 0.0);
            for j in 0..n {
                if j != i {
                    let diff = z[i] - z[j];
                    if diff.norm() > 0.0 {
                        s += 1.0 / diff;
                    }
                }
            }
            let denom = C64::new(1.0, 0.0) - ratio * s;
            let step = if denom.norm() > 0.0 { ratio / denom } else { ratio };
            if step.is_finite() {
                z[i] -= step;
                max_step = max_step.max(step.norm() / (1.0 + z[i].norm()));
            }
        }
        if max_step < 1e-15 {
            converged = true;
            break;
        }
    }
    for zi in z.iter_mut() {
        for _ in 0..3 {
            let p = eval(&monic, *zi);
            let d = eval(&dc, *zi);
            if d.norm() == 0.0 || p.norm() == 0.0 {
                break;
            }
            let step = p / d;
            if step.norm() < 1e-3 * (1.0 + zi.norm()) {
                *zi -= step;
            }
        }
    }
    if !converged {
        let worst = z
            .iter()
            .map(|&zi| eval(&monic, zi).norm())
            .fold(0.0, f64::max);
        if worst > 1e-8 * scale / lead.norm() * (1.0 + r0).powi(n as i32) {
            return Err(UtmError::Roots(format!("{:?}", c)));
        }
    }
    Ok(z)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn horner_and_derivatives() {
        let p = [c(1.0, 0.0), c(0.0, 2.0), c(3.0, 0.0)];
        let z = c(0.5, -0.25);
        let (v, d1, d2) = eval2(&p, z);
        assert!((v - (p[0] + p[1] * z + p[2] * z * z)).norm() < 1e-15);
        assert!((d1 - (p[1] + p[2] * z * 2.0)).norm() < 1e-15);
        assert!((d2 - p[2] * 2.0).norm() < 1e-15);
    }

    #[test]
    fn cubic_roots_of_unity() {
        let p = [c(-1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)];
        let r = roots(&p).unwrap();
        assert_eq!(r.len(), 3);
        for z in r {
            assert!((z.powu(3) - 1.0).norm() < 1e-13);
        }
    }

    #[test]
    fn repeated_zero_root() {
        let p = [c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)];
        let r = roots(&p).unwrap();
        for z in r {
            assert!(z.norm() < 1e-7);
        }
    }

    #[test]
    fn quartic_residuals() {
        let p = [c(2.0, 1.0), c(-1.0, 0.5), c(0.0, 3.0), c(1.5, 0.0), c(0.7, -0.2)];
        for z in roots(&p).unwrap() {
            assert!(eval(&p, z).norm() < 1e-12);
        }
    }
}
