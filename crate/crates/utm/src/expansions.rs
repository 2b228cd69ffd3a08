//! Local structure of solutions near the corner and near discontinuities of
//! the initial datum: explicit local solutions, structured expansions with
//! zero boundary or zero initial data, and the exact cancellation of corner
//! terms under compatibility.
//!
//! Corner coefficients are built symbolically over ℤ[ζ₁₂] from the exact
//! channel tables. An initial channel (σ, ν, B) gives B ν^{−(i+1)} q_o^{(i)}(0)
//! in front of I_{i,σ}; a boundary channel (σ, j, a, d) gives
//! (−1)^{ℓ+1} a (iω_n)^{−(ℓ+1)} i^M g_j^{(ℓ)}(0) in front of I_{M−1,σ} with
//! M = n(ℓ+1) − d.

use serde::Serialize;

use crate::contours::asymptotic_sectors;
use crate::dispersion::Dispersion;
use crate::error::{Result, UtmError};
use crate::oracles::{rate_fit, RateFit};
use crate::piecewise::IbvpSpec;
use crate::quadrature::{gauss_kronrod, QuadSettings};
use crate::ring::{Cyc12, LinearForm, Symbol};
use crate::solver::{closed_form_channels, eliminate_channels, Channel, ChannelKind, Method, SolutionEvaluator};
use crate::special::{special_eval, Selector, SpecialKey};
use crate::C64;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Example {
    Ls,
    Airy1,
    Airy2First,
    Airy2Second,
}

impl Example {
    pub fn dispersion(&self) -> Dispersion {
        match self {
            Example::Ls => Dispersion::schrodinger(),
            Example::Airy1 => Dispersion::airy1(),
            _ => Dispersion::airy2(),
        }
    }

    /// Error class (p_x, p_t) of the local solution.
    pub fn error_class(&self) -> (f64, f64) {
        match self {
            Example::Ls => (0.5, 0.25),
            Example::Airy1 => (0.5, 1.0 / 6.0),
            Example::Airy2First => (0.5, 1.0 / 6.0),
            Example::Airy2Second => (1.5, 0.5),
        }
    }
}

/// Data values at the corner: q_o(0), q_o′(0), g_0(0), g_1(0).
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct DataValues {
    pub q0: Option<f64>,
    pub q1: Option<f64>,
    pub g0: Option<f64>,
    pub g1: Option<f64>,
}

impl DataValues {
    fn symbol(&self, s: Symbol) -> Result<f64> {
        let v = match s {
            Symbol::Q(0) => self.q0,
            Symbol::Q(1) => self.q1,
            Symbol::G(0, 0) => self.g0,
            Symbol::G(1, 0) => self.g1,
            _ => None,
        };
        v.ok_or_else(|| UtmError::Contract(format!("missing data value {s}")))
    }
}

/// coefficient · I_{m,σ}(x − shift_x, t − shift_t).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExpansionTerm {
    pub coefficient: C64,
    /// Symbolic form of the coefficient when it is a corner coefficient.
    #[serde(skip)]
    pub form: Option<LinearForm>,
    pub m: i32,
    #[serde(serialize_with = "ser_selector")]
    pub selector: Selector,
    pub shift_x: C64,
    pub shift_t: f64,
}

fn ser_selector<S: serde::Serializer>(s: &Selector, ser: S) -> std::result::Result<S::Ok, S::Error> {
    ser.serialize_str(&match s {
        Selector::Component(j) => j.to_string(),
        Selector::Sum => "sum".into(),
        Selector::Ivp => "C".into(),
    })
}

/// Σ terms + constant + linear·(x − s), valid near the center (s, τ) with
/// error O(|x − s|^{p_x} + |t − τ|^{p_t}).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Expansion {
    #[serde(skip)]
    pub dispersion: Dispersion,
    pub center: (f64, f64),
    pub terms: Vec<ExpansionTerm>,
    pub constant: C64,
    pub linear: C64,
    pub exponents: (f64, f64),
}

impl Expansion {
    fn sum_terms(&self, x: f64, t: f64, dm: i32, s: &QuadSettings) -> Result<C64> {
        let mut acc = ZERO;
        for term in &self.terms {
            if term.coefficient == ZERO {
                continue;
            }
            let tt = t - term.shift_t;
            if tt < 0.0 {
                continue;
            }
            let key = SpecialKey::new(self.dispersion.clone(), term.m + dm, term.selector)?;
            let v = special_eval(&key, C64::new(x, 0.0) - term.shift_x, tt, s)?;
            acc += term.coefficient * v.value;
        }
        Ok(acc)
    }

    pub fn eval(&self, x: f64, t: f64, s: &QuadSettings) -> Result<C64> {
        if x < 0.0 || t < 0.0 {
            return Err(UtmError::Domain(format!("({x}, {t}) outside the closed quarter plane")));
        }
        Ok(self.sum_terms(x, t, 0, s)? + self.constant + self.linear * (x - self.center.0))
    }

    /// ∂_x of the expansion, using ∂_ξ I_m = I_{m−1}.
    pub fn dx(&self, x: f64, t: f64, s: &QuadSettings) -> Result<C64> {
        if x < 0.0 || t <= 0.0 {
            return Err(UtmError::Domain(format!("∂_x needs x ≥ 0 and t > 0, got ({x}, {t})")));
        }
        Ok(self.sum_terms(x, t, -1, s)? + self.linear)
    }
}

/// Exact coefficient of I_{m,σ} at the corner.
#[derive(Debug, Clone, PartialEq)]
pub struct CornerTerm {
    pub m: i32,
    pub selector: Selector,
    pub form: LinearForm,
}

fn unit_inverse(c: Cyc12) -> Option<Cyc12> {
    (0..12).find_map(|e| {
        let z = Cyc12::zeta_pow(e);
        if c * z == Cyc12::ONE {
            Some(z)
        } else if c * z == -Cyc12::ONE {
            Some(-z)
        } else {
            None
        }
    })
}

fn unit_leading(disp: &Dispersion) -> Result<Cyc12> {
    let w = disp.leading();
    if !disp.is_monomial() || w.abs() != 1.0 || 12 % disp.degree() != 0 {
        return Err(UtmError::Contract("exact corner algebra needs ω = ±kⁿ with n dividing 12".into()));
    }
    Ok(Cyc12::int(w as i64))
}

/// The exact channel table: the closed forms, or the eliminated table with
/// each weight recognized in ℤ[ζ₁₂].
pub fn exact_channels(disp: &Dispersion) -> Result<Vec<Channel<Cyc12>>> {
    let method = Method::auto(disp);
    if method != Method::GeneralMonomial {
        return closed_form_channels(method);
    }
    unit_leading(disp)?;
    let recog = |v: C64| {
        Cyc12::from_complex(v, 1e-9).ok_or_else(|| UtmError::Numerical(format!("weight {v} is not in ℤ[ζ₁₂]")))
    };
    eliminate_channels(disp)?
        .into_iter()
        .map(|ch| {
            let kind = match ch.kind {
                ChannelKind::Initial { nu } => ChannelKind::Initial { nu: recog(nu)? },
                ChannelKind::Boundary { j, power } => ChannelKind::Boundary { j, power },
            };
            Ok(Channel { selector: ch.selector, kind, weight: recog(ch.weight)? })
        })
        .collect()
}

/// Corner coefficients from q_o^{(i)}(0), i < q_depth, and g_j^{(ℓ)}(0),
/// ℓ < g_depth[j]. With `split`, I_{m,C} is written as Σ_j I_{m,j}.
pub fn corner_terms(disp: &Dispersion, q_depth: usize, g_depth: &[usize], split: bool) -> Result<Vec<CornerTerm>> {
    let table = exact_channels(disp)?;
    let n = disp.degree();
    let lead = unit_leading(disp)?;
    let inv_iw = unit_inverse(Cyc12::i() * lead).expect("unit");
    let sectors = asymptotic_sectors(disp).sectors.len();
    let mut out: Vec<CornerTerm> = Vec::new();
    let mut push = |m: i32, sel: Selector, c: Cyc12, s: Symbol| {
        let sels: Vec<Selector> = if split && sel == Selector::Ivp { (0..sectors).map(Selector::Component).collect() } else { vec![sel] };
        for sel in sels {
            match out.iter_mut().find(|t| t.m == m && t.selector == sel) {
                Some(t) => t.form.add_term(c, s),
                None => out.push(CornerTerm { m, selector: sel, form: LinearForm::term(c, s) }),
            }
        }
    };
    for ch in &table {
        match ch.kind {
            ChannelKind::Initial { nu } => {
                let inv = unit_inverse(nu).ok_or_else(|| UtmError::Numerical(format!("ν = {nu} is not a unit")))?;
                for i in 0..q_depth {
                    push(i as i32, ch.selector, ch.weight * inv.pow(i as u32 + 1), Symbol::Q(i));
                }
            }
            ChannelKind::Boundary { j, power } => {
                for l in 0..g_depth.get(j).copied().unwrap_or(0) {
                    let big_m = n * (l + 1) - power;
                    let sign = if l % 2 == 0 { -Cyc12::ONE } else { Cyc12::ONE };
                    let c = sign * ch.weight * inv_iw.pow(l as u32 + 1) * Cyc12::i().pow(big_m as u32);
                    push(big_m as i32 - 1, ch.selector, c, Symbol::G(j, l));
                }
            }
        }
    }
    out.sort_by_key(|t| {
        (
            t.m,
            match t.selector {
                Selector::Ivp => usize::MAX,
                Selector::Sum => usize::MAX - 1,
                Selector::Component(j) => j,
            },
        )
    });
    Ok(out)
}

fn numeric_terms(corner: &[CornerTerm], value: &dyn Fn(Symbol) -> Result<f64>) -> Result<Vec<ExpansionTerm>> {
    let mut out = Vec::new();
    for t in corner {
        let mut coefficient = ZERO;
        for (&s, &c) in &t.form.0 {
            coefficient += c.to_complex() * value(s)?;
        }
        out.push(ExpansionTerm { coefficient, form: Some(t.form.clone()), m: t.m, selector: t.selector, shift_x: ZERO, shift_t: 0.0 });
    }
    Ok(out)
}

/// Local solution near the corner built from q_o(0), g_0(0) (and q_o′(0),
/// g_1(0) for ω = k³).
pub fn qloc(example: Example, values: &DataValues) -> Result<Expansion> {
    let disp = example.dispersion();
    let airy2 = matches!(example, Example::Airy2First | Example::Airy2Second);
    let corner = if airy2 { corner_terms(&disp, 2, &[1, 1], true)? } else { corner_terms(&disp, 1, &[1], true)? };
    let terms = numeric_terms(&corner, &|s| values.symbol(s))?;
    let constant = C64::new(values.symbol(Symbol::Q(0))?, 0.0);
    let linear = if airy2 { C64::new(values.symbol(Symbol::Q(1))?, 0.0) } else { ZERO };
    Ok(Expansion { dispersion: disp, center: (0.0, 0.0), terms, constant, linear, exponents: example.error_class() })
}

fn error_class(n: usize, depth: usize) -> (f64, f64) {
    let p = depth as f64 - 0.5;
    (p, p / n as f64)
}

/// Expansion about (s, 0) for zero boundary data at depth 1.
pub fn expansion_zero_bc(spec: &IbvpSpec, s: f64) -> Result<Expansion> {
    expansion_zero_bc_depth(spec, s, 1)
}

/// Expansion about (s, 0) for zero boundary data. Depth 2 adds the
/// first-derivative jump and corner terms and a linear part.
pub fn expansion_zero_bc_depth(spec: &IbvpSpec, s: f64, depth: usize) -> Result<Expansion> {
    if spec.boundary.iter().any(|g| !g.is_zero()) {
        return Err(UtmError::Contract("the zero-BC expansion needs zero boundary data".into()));
    }
    if !(s >= 0.0) || !s.is_finite() {
        return Err(UtmError::Domain(format!("center s = {s} must be ≥ 0")));
    }
    if !(1..=2).contains(&depth) {
        return Err(UtmError::Contract("expansions are available at depth 1 and 2".into()));
    }
    let q = &spec.initial;
    let disp = &spec.dispersion;
    // every piece must carry the derivatives the expansion uses
    q.ibp_decompose(depth)?;
    let mut terms = Vec::new();
    for xm in q.breakpoints() {
        for i in 0..depth {
            let w = q.jump(i, xm)?;
            if w != 0.0 {
                terms.push(ExpansionTerm {
                    coefficient: C64::new(w, 0.0),
                    form: None,
                    m: i as i32,
                    selector: Selector::Ivp,
                    shift_x: C64::new(xm, 0.0),
                    shift_t: 0.0,
                });
            }
        }
    }
    let corner = corner_terms(disp, depth, &[], false)?;
    let value = |sym: Symbol| match sym {
        Symbol::Q(i) => q.right_derivative(0.0, i),
        Symbol::G(..) => Ok(0.0),
    };
    terms.extend(numeric_terms(&corner, &value)?.into_iter().filter(|t| t.coefficient != ZERO));
    let tail = |d: usize| -> Result<f64> {
        let mut r = q.right_derivative(s, d)?;
        for xm in q.breakpoints() {
            if xm > s {
                r += q.jump(d, xm)?;
            }
        }
        Ok(r)
    };
    let (constant, linear) = if depth == 1 {
        (tail(0)?, 0.0)
    } else {
        let second = q.derivative(2)?;
        let mut r2 = 0.0;
        for p in second.pieces() {
            let lo = p.a.max(s);
            let hi = p.b.min(p.effective_end());
            if hi > lo && !p.is_zero() {
                let f = |y: f64| C64::new((y - s) * p.value(y, 0).unwrap_or(f64::NAN), 0.0);
                r2 += gauss_kronrod(&f, lo, hi, 1e-13, 1e-15).0.re;
            }
        }
        (r2, tail(1)?)
    };
    if !constant.is_finite() {
        return Err(UtmError::Numerical("non-finite expansion constant".into()));
    }
    Ok(Expansion {
        dispersion: disp.clone(),
        center: (s, 0.0),
        terms,
        constant: C64::new(constant, 0.0),
        linear: C64::new(linear, 0.0),
        exponents: error_class(disp.degree(), depth),
    })
}

/// Expansion about (s, τ) for zero initial data: the g_j(0) corner terms
/// plus the remaining boundary contributions frozen at (s, τ). With two
/// boundary conditions the x-derivative of the remainder is kept as a
/// linear part.
pub fn expansion_zero_ic(spec: &IbvpSpec, s: f64, tau: f64, settings: &QuadSettings) -> Result<Expansion> {
    if !spec.initial.is_zero() {
        return Err(UtmError::Contract("the zero-IC expansion needs zero initial data".into()));
    }
    if !(s >= 0.0) || !s.is_finite() || !(tau >= 0.0 && tau <= spec.horizon) {
        return Err(UtmError::Domain(format!("center ({s}, {tau}) outside the domain")));
    }
    let disp = &spec.dispersion;
    let big_n = spec.boundary.len();
    let corner = corner_terms(disp, 0, &vec![1; big_n], false)?;
    let value = |sym: Symbol| match sym {
        Symbol::G(j, 0) => spec.boundary[j].right_derivative(0.0, 0),
        _ => Ok(0.0),
    };
    let terms: Vec<ExpansionTerm> = numeric_terms(&corner, &value)?.into_iter().filter(|t| t.coefficient != ZERO).collect();
    let ev = SolutionEvaluator::new(spec.clone(), Method::auto(disp), *settings, 1)?;
    let constant = if tau > 0.0 { ev.boundary_rest(s, tau, 0)? } else { ZERO };
    let linear = if big_n >= 2 && tau > 0.0 { ev.boundary_rest(s, tau, -1)? } else { ZERO };
    let n = disp.degree();
    Ok(Expansion {
        dispersion: disp.clone(),
        center: (s, tau),
        terms,
        constant,
        linear,
        exponents: error_class(n, big_n.min(2)),
    })
}

/// Outcome of the compatibility cancellation at the corner.
#[derive(Debug, Clone)]
pub struct Cancellation {
    /// Combined corner coefficients before compatibility is imposed.
    pub combined: Vec<CornerTerm>,
    /// The same after g_j^{(ℓ)}(0) → c^ℓ q_o^{(j+nℓ)}(0) for j + nℓ ≤ m,
    /// nonzero entries only.
    pub reduced: Vec<CornerTerm>,
    /// True when every coefficient with pole order ≤ m reduces to zero.
    pub exact_through_m: bool,
    /// Corner terms that survive with the data of the problem.
    pub surviving: Expansion,
    /// Number of leading pole orders whose coefficients vanish for the
    /// given data; the reduced spectral data decays with this power.
    pub decay_exponent: usize,
}

/// Evolution coefficient c in q_t = c ∂ₓⁿ q for ω = ω_n kⁿ.
fn evolution_coefficient(disp: &Dispersion) -> Result<Cyc12> {
    let lead = unit_leading(disp)?;
    let minus_i = -Cyc12::i();
    Ok(minus_i * lead * minus_i.pow(disp.degree() as u32))
}

/// Symbolic sum of the zero-BC and zero-IC corner expansions through pole
/// order m, with compatibility substituted exactly.
pub fn cancel_compatible(spec: &IbvpSpec, m: usize) -> Result<Cancellation> {
    let disp = &spec.dispersion;
    let n = disp.degree();
    let big_n = spec.boundary.len();
    let g_depth: Vec<usize> = (0..big_n).map(|j| if j > m { 0 } else { (m - j) / n + 1 }).collect();
    let combined = corner_terms(disp, m + 1, &g_depth, true)?;
    let c = evolution_coefficient(disp)?;
    let sub = |s: Symbol| match s {
        Symbol::G(j, l) if j + n * l <= m => Some(LinearForm::term(c.pow(l as u32), Symbol::Q(j + n * l))),
        _ => None,
    };
    let mut reduced = Vec::new();
    let mut exact = true;
    for t in &combined {
        let f = t.form.substitute(&sub);
        if !f.is_zero() {
            if t.m <= m as i32 {
                exact = false;
            }
            reduced.push(CornerTerm { m: t.m, selector: t.selector, form: f });
        }
    }
    let value = |s: Symbol| match s {
        Symbol::Q(i) => spec.initial.right_derivative(0.0, i),
        Symbol::G(j, l) => spec.boundary[j].right_derivative(0.0, l),
    };
    let terms = numeric_terms(&combined, &value)?;
    let scale = 1.0 + terms.iter().map(|t| t.coefficient.norm()).fold(0.0, f64::max);
    let tol = 1e-12 * scale;
    let mut decay = 0;
    while decay <= m && terms.iter().filter(|t| t.m == decay as i32).all(|t| t.coefficient.norm() <= tol) {
        decay += 1;
    }
    let surviving = Expansion {
        dispersion: disp.clone(),
        center: (0.0, 0.0),
        terms: terms.into_iter().filter(|t| t.coefficient.norm() > tol).collect(),
        constant: C64::new(spec.initial.right_derivative(0.0, 0)?, 0.0),
        linear: ZERO,
        exponents: error_class(n, decay + 1),
    };
    Ok(Cancellation { combined, reduced, exact_through_m: exact, surviving, decay_exponent: decay })
}

/// Predicted residual class ρ^{m+1/2}, ρ = |x| + |t|^{1/n}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResidualOrder {
    pub rho_exponent: f64,
    /// Exponent in t along x = s.
    pub t_exponent: f64,
}

pub fn residual_order(m: usize, n: usize) -> Result<ResidualOrder> {
    if n < 2 {
        return Err(UtmError::Contract("degree must be at least 2".into()));
    }
    let p = m as f64 + 0.5;
    Ok(ResidualOrder { rho_exponent: p, t_exponent: p / n as f64 })
}

/// Log-log slope of measured residuals against ρ (or t) along a ray toward
/// the center.
pub fn fit_residual(pairs: &[(f64, f64)]) -> Result<RateFit> {
    rate_fit(pairs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::piecewise::{Piece, PiecewiseData};

    fn st() -> QuadSettings {
        QuadSettings::default()
    }

    #[test]
    fn ls_qloc_wall_value() {
        let v = DataValues { q0: Some(1.0), g0: Some(-1.0), ..Default::default() };
        let e = qloc(Example::Ls, &v).unwrap();
        for t in [0.01, 0.1, 1.0] {
            assert!((e.eval(1e-6, t, &st()).unwrap() - C64::new(-1.0, 0.0)).norm() < 1e-4);
        }
        assert!((e.eval(0.5, 1e-8, &st()).unwrap() - C64::new(1.0, 0.0)).norm() < 1e-3);
    }

    #[test]
    fn qloc_needs_values() {
        let v = DataValues { q0: Some(1.0), g0: Some(-1.0), ..Default::default() };
        assert!(qloc(Example::Airy2Second, &v).is_err());
    }

    #[test]
    fn qloc_patterns() {
        let v = DataValues { q0: Some(1.0), g0: Some(-1.0), ..Default::default() };
        let e = qloc(Example::Ls, &v).unwrap();
        assert_eq!(e.terms.len(), 1);
        assert!((e.terms[0].coefficient - C64::new(4.0, 0.0)).norm() < 1e-14);
        let e = qloc(Example::Airy1, &v).unwrap();
        assert!((e.terms[0].coefficient - C64::new(6.0, 0.0)).norm() < 1e-14);
        for t in [0.1, 1.0] {
            assert!((e.eval(0.0, t, &st()).unwrap() - C64::new(-1.0, 0.0)).norm() < 1e-8);
        }
    }

    #[test]
    fn airy2_second_wall_values() {
        let v = DataValues { q0: Some(1.0), q1: Some(0.0), g0: Some(1.0), g1: Some(-1.0) };
        let e = qloc(Example::Airy2Second, &v).unwrap();
        for t in [0.1, 0.5] {
            assert!((e.eval(0.0, t, &st()).unwrap() - C64::new(1.0, 0.0)).norm() < 1e-8);
            assert!((e.dx(1e-6, t, &st()).unwrap() - C64::new(-1.0, 0.0)).norm() < 1e-3);
        }
    }

    #[test]
    fn airy2_cancellation_is_exact() {
        let disp = Dispersion::airy2();
        let g = PiecewiseData::constant(1.0, 1.0);
        let g1 = PiecewiseData::constant(0.5, 1.0);
        let q = PiecewiseData::new(vec![Piece::poly_exp(0.0, f64::INFINITY, vec![1.0, 1.5], 1.0)], f64::INFINITY).unwrap();
        let spec = IbvpSpec::new(disp, q, vec![g, g1], 1.0).unwrap();
        let c = cancel_compatible(&spec, 1).unwrap();
        assert!(c.exact_through_m);
        assert!(c.reduced.iter().all(|t| t.m > 1));
        // pole order 2 cancels with no condition
        let c2 = cancel_compatible(&spec, 2).unwrap();
        assert!(c2.reduced.iter().all(|t| t.m != 2));
        assert_eq!(c.decay_exponent, 2);
    }

    #[test]
    fn incompatible_surviving_coefficient() {
        let disp = Dispersion::schrodinger();
        let q = PiecewiseData::new(vec![Piece::poly_exp(0.0, f64::INFINITY, vec![1.0], 1.0)], f64::INFINITY).unwrap();
        let spec = IbvpSpec::new(disp, q, vec![PiecewiseData::constant(-1.0, 1.0)], 1.0).unwrap();
        let c = cancel_compatible(&spec, 0).unwrap();
        assert_eq!(c.decay_exponent, 0);
        let t0 = c.surviving.terms.iter().find(|t| t.m == 0).unwrap();
        // 2(q_o(0) − g_0(0))
        assert!((t0.coefficient - C64::new(4.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn general_table_matches_cancellation_pattern() {
        for disp in [Dispersion::monomial(1.0, 4).unwrap(), Dispersion::monomial(-1.0, 6).unwrap()] {
            let big_n = disp.num_boundary_conditions();
            let q = PiecewiseData::zero(f64::INFINITY);
            let g = (0..big_n).map(|_| PiecewiseData::zero(1.0)).collect();
            let spec = IbvpSpec::new(disp, q, g, 1.0).unwrap();
            let c = cancel_compatible(&spec, 0).unwrap();
            assert!(c.exact_through_m);
        }
    }

    #[test]
    fn zero_ic_reproduces_boundary_value() {
        let g = PiecewiseData::new(vec![Piece::poly_exp(0.0, 1.0, vec![1.0], 1.0)], 1.0).unwrap();
        let spec = IbvpSpec::new(Dispersion::schrodinger(), PiecewiseData::zero(f64::INFINITY), vec![g], 1.0).unwrap();
        let e = expansion_zero_ic(&spec, 0.0, 0.5, &st()).unwrap();
        let want = (-0.5f64).exp();
        assert!((e.eval(0.0, 0.5, &st()).unwrap() - C64::new(want, 0.0)).norm() < 1e-6);
        let e0 = expansion_zero_ic(&spec, 0.7, 0.0, &st()).unwrap();
        assert!(e0.eval(0.7, 0.0, &st()).unwrap().norm() < 1e-12);
    }

    #[test]
    fn zero_ic_airy2_recovers_both_data() {
        let g0 = PiecewiseData::new(vec![Piece::poly_exp(0.0, 1.0, vec![1.0], 1.0)], 1.0).unwrap();
        let g1 = PiecewiseData::new(vec![Piece::poly(0.0, 1.0, vec![0.5, 1.0])], 1.0).unwrap();
        let spec = IbvpSpec::new(Dispersion::airy2(), PiecewiseData::zero(f64::INFINITY), vec![g0, g1], 1.0).unwrap();
        let e = expansion_zero_ic(&spec, 0.0, 0.5, &st()).unwrap();
        assert!((e.eval(0.0, 0.5, &st()).unwrap() - C64::new((-0.5f64).exp(), 0.0)).norm() < 1e-6);
        assert!((e.dx(0.0, 0.5, &st()).unwrap() - C64::new(1.0, 0.0)).norm() < 1e-6);
    }

    #[test]
    fn zero_bc_terms() {
        let q = PiecewiseData::new(
            vec![Piece::poly(0.0, 1.0, vec![0.0]), Piece::poly_exp(1.0, f64::INFINITY, vec![1.0], 1.0)],
            f64::INFINITY,
        )
        .unwrap();
        let spec = IbvpSpec::new(Dispersion::schrodinger(), q, vec![PiecewiseData::zero(1.0)], 1.0).unwrap();
        let e = expansion_zero_bc(&spec, 1.0).unwrap();
        assert_eq!(e.terms.len(), 1);
        assert_eq!(e.terms[0].selector, Selector::Ivp);
        assert_eq!(e.terms[0].shift_x, C64::new(1.0, 0.0));
        // average of the one-sided limits at the jump
        assert!((e.eval(1.0, 0.0, &st()).unwrap() - C64::new(0.5, 0.0)).norm() < 1e-12);
        let smooth = PiecewiseData::new(vec![Piece::gaussian(0.0, f64::INFINITY, vec![0.0, 1.0], 0.0, 1.0)], f64::INFINITY).unwrap();
        let spec = IbvpSpec::new(Dispersion::airy1(), smooth, vec![PiecewiseData::zero(1.0)], 1.0).unwrap();
        let e = expansion_zero_bc(&spec, 0.5).unwrap();
        assert!(e.terms.is_empty());
        assert!((e.constant.re - 0.5 * (-0.25f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn residual_prediction() {
        assert_eq!(residual_order(0, 2).unwrap().t_exponent, 0.25);
        assert_eq!(residual_order(1, 3).unwrap().t_exponent, 0.5);
        assert!(fit_residual(&[(1.0, 1.0)]).is_err());
    }
}
