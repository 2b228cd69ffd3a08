//! Polynomial dispersion relations: boundary-condition counts, symmetries,
//! global-relation coefficients and compatibility conditions.

use serde::Serialize;

use crate::error::{Result, UtmError};
use crate::piecewise::IbvpSpec;
use crate::poly;
use crate::C64;

const I: C64 = C64 { re: 0.0, im: 1.0 };

/// ω(k) = Σ_{j=1}^n ω_j k^j with real coefficients and no constant term.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Dispersion {
    coeffs: Vec<f64>,
}

impl Dispersion {
    /// `coeffs[j-1]` is the coefficient of `k^j`.
    pub fn new(coeffs: Vec<f64>) -> Result<Self> {
        let mut coeffs = coeffs;
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(UtmError::Dispersion("non-finite coefficient".into()));
        }
        while coeffs.last() == Some(&0.0) {
            coeffs.pop();
        }
        if coeffs.len() < 2 {
            return Err(UtmError::Dispersion("degree must be at least 2".into()));
        }
        Ok(Dispersion { coeffs })
    }

    pub fn monomial(lead: f64, n: usize) -> Result<Self> {
        let mut c = vec![0.0; n];
        if n > 0 {
            c[n - 1] = lead;
        }
        Dispersion::new(c)
    }

    /// ω = k²
    pub fn schrodinger() -> Self {
        Dispersion { coeffs: vec![0.0, 1.0] }
    }

    /// ω = −k³
    pub fn airy1() -> Self {
        Dispersion { coeffs: vec![0.0, 0.0, -1.0] }
    }

    /// ω = k³
    pub fn airy2() -> Self {
        Dispersion { coeffs: vec![0.0, 0.0, 1.0] }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len()
    }

    pub fn leading(&self) -> f64 {
        self.coeffs[self.coeffs.len() - 1]
    }

    pub fn is_monomial(&self) -> bool {
        self.coeffs[..self.coeffs.len() - 1].iter().all(|&c| c == 0.0)
    }

    /// Ascending complex coefficients including the zero constant term.
    pub fn poly(&self) -> Vec<C64> {
        std::iter::once(C64::new(0.0, 0.0))
            .chain(self.coeffs.iter().map(|&c| C64::new(c, 0.0)))
            .collect()
    }

    pub fn eval(&self, k: C64) -> C64 {
        poly::eval(&self.poly(), k)
    }

    pub fn derivative(&self, k: C64) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for (j, &c) in self.coeffs.iter().enumerate().rev() {
            acc = acc * k + c * (j + 1) as f64;
        }
        acc
    }

    /// N(n), the number of boundary conditions at x = 0.
    pub fn num_boundary_conditions(&self) -> usize {
        let n = self.degree();
        if n.is_multiple_of(2) {
            n / 2
        } else if self.leading() > 0.0 {
            n.div_ceil(2)
        } else {
            (n - 1) / 2
        }
    }

    /// Solutions ν of ω(ν) = ω(k), identity first.
    pub fn symmetries(&self, k: C64) -> Result<Vec<C64>> {
        let n = self.degree();
        if self.is_monomial() {
            return Ok((0..n)
                .map(|j| k * C64::from_polar(1.0, 2.0 * std::f64::consts::PI * j as f64 / n as f64))
                .collect());
        }
        let kref = C64::new(crate::contours::choose_truncation_radius(self), 0.0);
        let mut current = self.raw_symmetries(kref)?;
        current.sort_by(|a, b| {
            let aa = (a - kref).arg().rem_euclid(std::f64::consts::TAU);
            let bb = (b - kref).arg().rem_euclid(std::f64::consts::TAU);
            (a - kref).norm().total_cmp(&(b - kref).norm()).then(aa.total_cmp(&bb))
        });
        let steps = 64;
        for s in 1..=steps {
            let kk = kref + (k - kref) * (s as f64 / steps as f64);
            let next = self.raw_symmetries(kk)?;
            let mut used = vec![false; n];
            let mut matched = vec![C64::new(0.0, 0.0); n];
            for (i, &z) in current.iter().enumerate() {
                let mut best = usize::MAX;
                let mut bd = f64::INFINITY;
                for (j, &w) in next.iter().enumerate() {
                    if !used[j] && (w - z).norm() < bd {
                        bd = (w - z).norm();
                        best = j;
                    }
                }
                used[best] = true;
                matched[i] = next[best];
            }
            current = matched;
        }
        let id = current
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - k).norm().total_cmp(&(b.1 - k).norm()))
            .map(|(i, _)| i)
            .unwrap_or(0);
        current.swap(0, id);
        current[0] = k;
        Ok(current)
    }

    fn raw_symmetries(&self, k: C64) -> Result<Vec<C64>> {
        let mut p = self.poly();
        p[0] -= self.eval(k);
        poly::roots(&p).map_err(|_| UtmError::Roots(format!("{k}")))
    }

    /// b_j(k) with i(ω(k) − ω(l))/(k − l) = Σ_j b_j(k) l^j.
    pub fn bj_coefficients(&self, k: C64) -> Vec<C64> {
        let n = self.degree();
        (0..n)
            .map(|j| {
                let mut acc = C64::new(0.0, 0.0);
                for m in (j + 1..=n).rev() {
                    acc = acc * k + self.coeffs[m - 1];
                }
                I * acc
            })
            .collect()
    }

    /// c_j(k) = (−i)^j b_j(k), the coefficients of ∂_x^j.
    pub fn cj_coefficients(&self, k: C64) -> Vec<C64> {
        let mut f = C64::new(1.0, 0.0);
        self.bj_coefficients(k)
            .into_iter()
            .map(|b| {
                let v = f * b;
                f *= -I;
                v
            })
            .collect()
    }

    /// Coefficients of the spatial operator P(D) with q_t = P(∂_x) q.
    pub fn evolution_operator(&self) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0)];
        let mut f = -I;
        for &c in &self.coeffs {
            out.push(-I * c * f);
            f *= -I;
        }
        out
    }

    /// Operator ω(−i∂_x) as a polynomial in ∂_x.
    fn omega_operator(&self) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0)];
        let mut f = -I;
        for &c in &self.coeffs {
            out.push(c * f);
            f *= -I;
        }
        out
    }
}

/// One compatibility condition g_j^{(ℓ)}(0) against the initial datum.
#[derive(Debug, Clone, Serialize)]
pub struct CompatEntry {
    pub j: usize,
    pub l: usize,
    pub order: usize,
    pub lhs: C64,
    pub rhs: C64,
    pub display_rhs: C64,
    pub satisfied: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct CompatibilityReport {
    pub entries: Vec<CompatEntry>,
}

impl CompatibilityReport {
    pub fn first_violated(&self) -> Option<&CompatEntry> {
        self.entries.iter().find(|e| !e.satisfied)
    }

    pub fn satisfied_through(&self, order: usize) -> bool {
        self.entries
            .iter()
            .filter(|e| e.order <= order)
            .all(|e| e.satisfied)
    }
}

fn apply_at_zero(op: &[C64], spec: &IbvpSpec, j: usize, l: usize) -> Result<C64> {
    let mut acc = C64::new(0.0, 0.0);
    for (r, &c) in op.iter().enumerate() {
        if c == C64::new(0.0, 0.0) {
            continue;
        }
        let d = spec
            .initial
            .right_derivative(0.0, r + j)
            .map_err(|_| UtmError::Smoothness(format!("initial datum at (j={j}, l={l})")))?;
        acc += c * d;
    }
    Ok(acc)
}

/// Reports every condition of order j + nℓ ≤ `max_order`, sorted by order.
pub fn check_compatibility(spec: &IbvpSpec, max_order: usize, tol: f64) -> Result<CompatibilityReport> {
    let disp = &spec.dispersion;
    let n = disp.degree();
    let big_n = disp.num_boundary_conditions();
    let evo = disp.evolution_operator();
    let omega_op = disp.omega_operator();
    let mut entries = Vec::new();
    for j in 0..big_n.min(spec.boundary.len()) {
        let mut l = 0;
        while j + n * l <= max_order {
            let lhs = C64::new(
                spec.boundary[j]
                    .right_derivative(0.0, l)
                    .map_err(|_| UtmError::Smoothness(format!("boundary datum at (j={j}, l={l})")))?,
                0.0,
            );
            let mut op = vec![C64::new(1.0, 0.0)];
            let mut disp_op = vec![C64::new(1.0, 0.0)];
            for _ in 0..l {
                op = poly::multiply(&op, &evo);
                disp_op = poly::multiply(&disp_op, &omega_op);
            }
            let rhs = apply_at_zero(&op, spec, j, l)?;
            let display_rhs = I * apply_at_zero(&disp_op, spec, j, l)?;
            let scale = 1.0 + lhs.norm().max(rhs.norm());
            entries.push(CompatEntry {
                j,
                l,
                order: j + n * l,
                lhs,
                rhs,
                display_rhs,
                satisfied: (lhs - rhs).norm() <= tol * scale,
            });
            l += 1;
        }
    }
    entries.sort_by_key(|e| (e.order, e.j));
    Ok(CompatibilityReport { entries })
}

/// Parses a polynomial in `k` such as `k^3 - 3k` or `-2*k**2 + 0.5 k`.
pub fn parse_omega(src: &str) -> Result<Dispersion> {
    let s: String = src.chars().filter(|c| !c.is_whitespace()).collect();
    if s.is_empty() {
        return Err(UtmError::Parse("empty polynomial".into()));
    }
    if s.len() > 4096 {
        return Err(UtmError::Parse("polynomial string too long".into()));
    }
    let bytes = s.as_bytes();
    let mut coeffs: Vec<f64> = Vec::new();
    let mut constant = 0.0;
    let mut pos = 0;
    let mut first = true;
    while pos < bytes.len() {
        let mut sign = 1.0;
        if bytes[pos] == b'+' || bytes[pos] == b'-' {
            if bytes[pos] == b'-' {
                sign = -1.0;
            }
            pos += 1;
        } else if !first {
            return Err(UtmError::Parse(format!("expected '+' or '-' at offset {pos}")));
        }
        first = false;
        let start = pos;
        while pos < bytes.len() && (bytes[pos].is_ascii_digit() || bytes[pos] == b'.' || bytes[pos] == b'e' || bytes[pos] == b'E') {
            if (bytes[pos] == b'e' || bytes[pos] == b'E')
                && !(pos + 1 < bytes.len() && (bytes[pos + 1].is_ascii_digit() || bytes[pos + 1] == b'-' || bytes[pos + 1] == b'+'))
            {
                break;
            }
            if (bytes[pos] == b'e' || bytes[pos] == b'E') && pos + 1 < bytes.len() && (bytes[pos + 1] == b'-' || bytes[pos + 1] == b'+') {
                pos += 1;
            }
            pos += 1;
        }
        let coef = if pos > start {
            s[start..pos]
                .parse::<f64>()
                .map_err(|_| UtmError::Parse(format!("bad number '{}'", &s[start..pos])))?
        } else {
            1.0
        };
        if pos < bytes.len() && bytes[pos] == b'*' {
            if pos == start {
                return Err(UtmError::Parse(format!("dangling '*' at offset {pos}")));
            }
            pos += 1;
            if pos >= bytes.len() || bytes[pos] != b'k' {
                return Err(UtmError::Parse(format!("expected 'k' at offset {pos}")));
            }
        }
        let mut power = 0usize;
        if pos < bytes.len() && bytes[pos] == b'k' {
            pos += 1;
            power = 1;
            let caret = if pos < bytes.len() && bytes[pos] == b'^' {
                1
            } else if pos + 1 < bytes.len() && bytes[pos] == b'*' && bytes[pos + 1] == b'*' {
                2
            } else {
                0
            };
            if caret > 0 {
                pos += caret;
                let ps = pos;
                while pos < bytes.len() && bytes[pos].is_ascii_digit() {
                    pos += 1;
                }
                if ps == pos {
                    return Err(UtmError::Parse(format!("missing exponent at offset {ps}")));
                }
                power = s[ps..pos]
                    .parse::<usize>()
                    .map_err(|_| UtmError::Parse("bad exponent".into()))?;
                if power > 64 {
                    return Err(UtmError::Parse("exponent too large".into()));
                }
            }
        } else if pos == start {
            return Err(UtmError::Parse(format!("expected a term at offset {pos}")));
        }
        if !coef.is_finite() {
            return Err(UtmError::Parse("non-finite coefficient".into()));
        }
        if power == 0 {
            constant += sign * coef;
        } else {
            if coeffs.len() < power {
                coeffs.resize(power, 0.0);
            }
            coeffs[power - 1] += sign * coef;
        }
    }
    if constant != 0.0 {
        return Err(UtmError::Parse("dispersion relation must have zero constant term".into()));
    }
    Dispersion::new(coeffs).map_err(|e| UtmError::Parse(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::piecewise::{Piece, PiecewiseData};
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn boundary_condition_counts() {
        assert_eq!(Dispersion::schrodinger().num_boundary_conditions(), 1);
        assert_eq!(Dispersion::airy1().num_boundary_conditions(), 1);
        assert_eq!(Dispersion::airy2().num_boundary_conditions(), 2);
        for n in 2..=8usize {
            for s in [1.0, -1.0] {
                let d = Dispersion::monomial(s, n).unwrap();
                let expect = if n % 2 == 0 {
                    n / 2
                } else if s > 0.0 {
                    n.div_ceil(2)
                } else {
                    (n - 1) / 2
                };
                assert_eq!(d.num_boundary_conditions(), expect);
            }
        }
    }

    #[test]
    fn rejects_degenerate() {
        assert!(Dispersion::new(vec![1.0]).is_err());
        assert!(Dispersion::new(vec![1.0, 0.0]).is_err());
        assert!(Dispersion::new(vec![0.0, f64::NAN]).is_err());
    }

    #[test]
    fn schrodinger_symmetries() {
        let s = Dispersion::schrodinger().symmetries(c(1.0, 0.0)).unwrap();
        assert!((s[0] - 1.0).norm() < 1e-15);
        assert!((s[1] + 1.0).norm() < 1e-15);
    }

    #[test]
    fn cubic_symmetries_are_rotations() {
        let s = Dispersion::airy2().symmetries(c(1.0, 0.0)).unwrap();
        let a = C64::from_polar(1.0, 2.0 * std::f64::consts::PI / 3.0);
        assert!((s[1] - a).norm() < 1e-15);
        assert!((s[2] - a * a).norm() < 1e-15);
    }

    #[test]
    fn cj_examples() {
        let k = c(0.3, -1.1);
        let q = Dispersion::schrodinger().cj_coefficients(k);
        assert!((q[0] - I * k).norm() < 1e-15);
        assert!((q[1] - 1.0).norm() < 1e-15);
        let cu = Dispersion::airy2().cj_coefficients(k);
        assert!((cu[0] - I * k * k).norm() < 1e-14);
        assert!((cu[1] - k).norm() < 1e-14);
        assert!((cu[2] + I).norm() < 1e-15);
        let m = Dispersion::airy1().cj_coefficients(k);
        assert!((m[0] + I * k * k).norm() < 1e-14);
        assert!((m[1] + k).norm() < 1e-14);
        assert!((m[2] - I).norm() < 1e-15);
    }

    #[test]
    fn evolution_operators() {
        let e = Dispersion::schrodinger().evolution_operator();
        assert!((e[2] - I).norm() < 1e-15);
        let e = Dispersion::airy2().evolution_operator();
        assert!((e[3] - 1.0).norm() < 1e-15);
        let e = Dispersion::airy1().evolution_operator();
        assert!((e[3] + 1.0).norm() < 1e-15);
    }

    #[test]
    fn parse_examples() {
        assert_eq!(parse_omega("k^3").unwrap(), Dispersion::airy2());
        assert_eq!(parse_omega("-k^3").unwrap(), Dispersion::airy1());
        assert_eq!(parse_omega(" k ^ 2 ").unwrap(), Dispersion::schrodinger());
        assert_eq!(parse_omega("k**3 - 3k").unwrap().coeffs(), &[-3.0, 0.0, 1.0]);
        assert_eq!(parse_omega("2*k^2+0.5k").unwrap().coeffs(), &[0.5, 2.0]);
        assert_eq!(parse_omega("1e-1k^2").unwrap().coeffs(), &[0.0, 0.1]);
        assert!(parse_omega("k^3 + 1").is_err());
        assert!(parse_omega("k").is_err());
        assert!(parse_omega("").is_err());
        assert!(parse_omega("k^").is_err());
        assert!(parse_omega("*k").is_err());
        assert!(parse_omega("k k").is_err());
    }

    fn constant(v: f64, end: f64) -> PiecewiseData {
        PiecewiseData::new(vec![Piece::poly(0.0, end, vec![v])], end).unwrap()
    }

    #[test]
    fn compatibility_schrodinger_violated() {
        let spec = IbvpSpec::new(
            Dispersion::schrodinger(),
            PiecewiseData::new(vec![Piece::poly_exp(0.0, f64::INFINITY, vec![1.0], 1.0)], f64::INFINITY).unwrap(),
            vec![constant(-1.0, 1.0)],
            1.0,
        )
        .unwrap();
        let r = check_compatibility(&spec, 0, 1e-12).unwrap();
        assert_eq!(r.entries.len(), 1);
        assert!(!r.entries[0].satisfied);
    }

    #[test]
    fn compatibility_airy2_second_order() {
        let init = PiecewiseData::new(
            vec![Piece::poly(0.0, 1.0, vec![1.0]), Piece::poly(1.0, f64::INFINITY, vec![0.0])],
            f64::INFINITY,
        )
        .unwrap();
        let spec = IbvpSpec::new(Dispersion::airy2(), init, vec![constant(1.0, 1.0), constant(-1.0, 1.0)], 1.0).unwrap();
        let r = check_compatibility(&spec, 1, 1e-12).unwrap();
        assert!(r.entries[0].satisfied);
        assert_eq!(r.entries[1].order, 1);
        assert!(!r.entries[1].satisfied);
    }

    #[test]
    fn compatibility_zero_data() {
        let zero = PiecewiseData::zero(f64::INFINITY);
        let spec = IbvpSpec::new(
            Dispersion::airy2(),
            zero,
            vec![PiecewiseData::zero(1.0), PiecewiseData::zero(1.0)],
            1.0,
        )
        .unwrap();
        let r = check_compatibility(&spec, 7, 1e-12).unwrap();
        assert!(r.entries.iter().all(|e| e.satisfied));
        assert!(r.entries.windows(2).all(|w| w[0].order <= w[1].order));
        assert!(r.entries.iter().all(|e| e.order == e.j + 3 * e.l));
    }

    #[test]
    fn higher_order_uses_equation() {
        // q_o = e^{-x}: q_t = q_xxx gives g_0'(0) = -1, g_1'(0) = 1
        let init = PiecewiseData::new(vec![Piece::poly_exp(0.0, f64::INFINITY, vec![1.0], 1.0)], f64::INFINITY).unwrap();
        let g0 = PiecewiseData::new(vec![Piece::poly(0.0, 1.0, vec![1.0, -1.0])], 1.0).unwrap();
        let g1 = PiecewiseData::new(vec![Piece::poly(0.0, 1.0, vec![-1.0, 1.0])], 1.0).unwrap();
        let spec = IbvpSpec::new(Dispersion::airy2(), init, vec![g0, g1], 1.0).unwrap();
        let r = check_compatibility(&spec, 4, 1e-12).unwrap();
        assert!(r.entries.iter().all(|e| e.satisfied), "{:?}", r.entries);
    }

    fn cubic(a: f64, b: f64, cc: f64) -> Dispersion {
        Dispersion::new(vec![a, b, cc]).unwrap()
    }

    proptest! {
        #[test]
        fn symmetries_solve_dispersion(re in -3.0..3.0f64, im in -3.0..3.0f64, a in -2.0..2.0f64, b in -2.0..2.0f64) {
            let k = c(re, im);
            for d in [Dispersion::schrodinger(), Dispersion::airy2(), cubic(1.0, 0.0, 1.0), cubic(a, b, 1.0)] {
                let s = d.symmetries(k).unwrap();
                prop_assert_eq!(s.len(), d.degree());
                prop_assert!((s[0] - k).norm() < 1e-12);
                let w = d.eval(k);
                for nu in s {
                    prop_assert!((d.eval(nu) - w).norm() <= 1e-12 * (1.0 + w.norm()) * 10.0);
                }
            }
        }

        #[test]
        fn cj_reconstruction(kr in -3.0..3.0f64, ki in -3.0..3.0f64, lr in -3.0..3.0f64, li in -3.0..3.0f64,
                             a in -2.0..2.0f64, b in -2.0..2.0f64, cc in 0.5..2.0f64) {
            let d = cubic(a, b, cc);
            let (k, l) = (c(kr, ki), c(lr, li));
            let bj = d.bj_coefficients(k);
            let rhs = (k - l) * poly::eval(&bj, l);
            let lhs = I * (d.eval(k) - d.eval(l));
            let scale = 1.0 + d.eval(k).norm() + d.eval(l).norm();
            prop_assert!((lhs - rhs).norm() <= 1e-12 * scale);
        }
    }
}
