//! Exact arithmetic in ℤ[ζ] with ζ = e^{2πi/12}, which contains i = ζ³ and
//! α = e^{2πi/3} = ζ⁴, and linear forms over it.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::C64;

/// a_0 + a_1ζ + a_2ζ² + a_3ζ³ reduced modulo ζ⁴ − ζ² + 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Cyc12(pub [i64; 4]);

impl Cyc12 {
    pub const ZERO: Cyc12 = Cyc12([0; 4]);
    pub const ONE: Cyc12 = Cyc12([1, 0, 0, 0]);

    pub fn int(v: i64) -> Self {
        Cyc12([v, 0, 0, 0])
    }

    /// ζ^e for any integer e.
    pub fn zeta_pow(e: i64) -> Self {
        let e = e.rem_euclid(12) as usize;
        let mut c = [0i64; 12];
        c[e] = 1;
        Self::reduce(&c)
    }

    pub fn i() -> Self {
        Self::zeta_pow(3)
    }

    pub fn alpha() -> Self {
        Self::zeta_pow(4)
    }

    fn reduce(c: &[i64]) -> Self {
        let mut v = c.to_vec();
        // ζ⁴ = ζ² − 1
        for d in (4..v.len()).rev() {
            let a = v[d];
            if a != 0 {
                v[d] = 0;
                v[d - 2] += a;
                v[d - 4] -= a;
            }
        }
        let mut out = [0i64; 4];
        for (i, x) in v.iter().take(4).enumerate() {
            out[i] = *x;
        }
        Cyc12(out)
    }

    pub fn pow(self, e: u32) -> Self {
        let mut r = Cyc12::ONE;
        for _ in 0..e {
            r = r * self;
        }
        r
    }

    pub fn is_zero(&self) -> bool {
        self.0 == [0; 4]
    }

    pub fn to_complex(self) -> C64 {
        let z = C64::from_polar(1.0, std::f64::consts::PI / 6.0);
        let mut acc = C64::new(0.0, 0.0);
        let mut p = C64::new(1.0, 0.0);
        for a in self.0 {
            acc += p * a as f64;
            p *= z;
        }
        acc
    }

    /// Recognizes an element with small coefficients from its complex value.
    pub fn from_complex(v: C64, tol: f64) -> Option<Self> {
        if v.norm() < tol {
            return Some(Cyc12::ZERO);
        }
        for e in 0..12 {
            let u = v * C64::from_polar(1.0, -std::f64::consts::PI * e as f64 / 6.0);
            let r = u.re.round();
            if (u - r).norm() < tol && r != 0.0 {
                return Some(Cyc12::int(r as i64) * Cyc12::zeta_pow(e));
            }
        }
        // smallest coefficients in the integral basis 1, ζ, ζ², ζ³
        let mut best: Option<(i64, Cyc12)> = None;
        const B: i64 = 4;
        for a0 in -B..=B {
            for a1 in -B..=B {
                for a2 in -B..=B {
                    for a3 in -B..=B {
                        let c = Cyc12([a0, a1, a2, a3]);
                        if (c.to_complex() - v).norm() < tol {
                            let size = a0.abs() + a1.abs() + a2.abs() + a3.abs();
                            if best.is_none_or(|(b, _)| size < b) {
                                best = Some((size, c));
                            }
                        }
                    }
                }
            }
        }
        best.map(|(_, c)| c)
    }
}

impl Add for Cyc12 {
    type Output = Cyc12;
    fn add(self, o: Cyc12) -> Cyc12 {
        let mut r = self.0;
        for i in 0..4 {
            r[i] += o.0[i];
        }
        Cyc12(r)
    }
}

impl Sub for Cyc12 {
    type Output = Cyc12;
    fn sub(self, o: Cyc12) -> Cyc12 {
        self + (-o)
    }
}

impl Neg for Cyc12 {
    type Output = Cyc12;
    fn neg(self) -> Cyc12 {
        Cyc12(self.0.map(|a| -a))
    }
}

impl Mul for Cyc12 {
    type Output = Cyc12;
    fn mul(self, o: Cyc12) -> Cyc12 {
        let mut c = [0i64; 7];
        for i in 0..4 {
            for j in 0..4 {
                c[i + j] += self.0[i] * o.0[j];
            }
        }
        Cyc12::reduce(&c)
    }
}

impl fmt::Display for Cyc12 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        for (i, &a) in self.0.iter().enumerate() {
            if a != 0 {
                parts.push(match i {
                    0 => format!("{a}"),
                    1 => format!("{a}ζ"),
                    _ => format!("{a}ζ^{i}"),
                });
            }
        }
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join(" + "))
        }
    }
}

/// Data symbols: Q(i) = q_o^{(i)}(0), G(j, ℓ) = g_j^{(ℓ)}(0).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Symbol {
    Q(usize),
    G(usize, usize),
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Symbol::Q(i) => write!(f, "q^({i})(0)"),
            Symbol::G(j, l) => write!(f, "g_{j}^({l})(0)"),
        }
    }
}

/// Σ c_s · s over symbols with exact coefficients.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LinearForm(pub BTreeMap<Symbol, Cyc12>);

impl LinearForm {
    pub fn term(c: Cyc12, s: Symbol) -> Self {
        let mut m = BTreeMap::new();
        if !c.is_zero() {
            m.insert(s, c);
        }
        LinearForm(m)
    }

    pub fn add_term(&mut self, c: Cyc12, s: Symbol) {
        let e = self.0.entry(s).or_insert(Cyc12::ZERO);
        *e = *e + c;
        if e.is_zero() {
            self.0.remove(&s);
        }
    }

    pub fn add_form(&mut self, o: &LinearForm) {
        for (&s, &c) in &o.0 {
            self.add_term(c, s);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    /// Replaces symbols by linear forms.
    pub fn substitute(&self, f: &dyn Fn(Symbol) -> Option<LinearForm>) -> LinearForm {
        let mut out = LinearForm::default();
        for (&s, &c) in &self.0 {
            match f(s) {
                Some(rep) => {
                    for (&s2, &c2) in &rep.0 {
                        out.add_term(c * c2, s2);
                    }
                }
                None => out.add_term(c, s),
            }
        }
        out
    }

    pub fn evaluate(&self, value: &dyn Fn(Symbol) -> f64) -> C64 {
        self.0.iter().map(|(&s, &c)| c.to_complex() * value(s)).sum()
    }
}

impl fmt::Display for LinearForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self.0.iter().map(|(s, c)| format!("({c})·{s}")).collect();
        write!(f, "{}", parts.join(" + "))
    }
}
