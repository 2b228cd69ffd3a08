//! Piecewise-smooth initial and boundary data, their transforms and
//! integration-by-parts decompositions.

use std::fmt;
use std::sync::Arc;

use crate::dispersion::Dispersion;
use crate::error::{Result, UtmError};
use crate::quadrature::gauss_kronrod;
use crate::C64;

const I: C64 = C64 { re: 0.0, im: 1.0 };

/// A derivative oracle `f(y, d) = f^{(d)}(y)` in absolute coordinates.
pub type DerivFn = Arc<dyn Fn(f64, usize) -> f64 + Send + Sync>;

#[derive(Clone)]
pub struct NumericTerm {
    pub label: String,
    pub f: DerivFn,
    pub max_order: usize,
    /// Beyond this absolute coordinate the term is negligible.
    pub cutoff: f64,
    /// Values are `f(y + shift, d)`.
    pub shift: f64,
    pub order: usize,
}

impl fmt::Debug for NumericTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("NumericTerm")
            .field("label", &self.label)
            .field("order", &self.order)
            .field("shift", &self.shift)
            .finish()
    }
}

/// One additive term of a piece, in the local variable u = y − a.
#[derive(Debug, Clone)]
pub enum Term {
    /// p(u) e^{−λu}; λ = 0 is a plain polynomial.
    Exp { coeffs: Vec<f64>, rate: f64 },
    Numeric(NumericTerm),
}

impl Term {
    fn value(&self, u: f64, y: f64, d: usize) -> Result<f64> {
        match self {
            Term::Exp { coeffs, rate } => {
                let c = exp_term_derivative(coeffs, *rate, d);
                let p = c.iter().rev().fold(0.0, |acc, &a| acc * u + a);
                Ok(if *rate == 0.0 { p } else { p * (-rate * u).exp() })
            }
            Term::Numeric(n) => {
                if n.order + d > n.max_order {
                    return Err(UtmError::Smoothness(format!("{} beyond order {}", n.label, n.max_order)));
                }
                Ok((n.f)(y + n.shift, n.order + d))
            }
        }
    }

    fn derivative(&self, d: usize) -> Result<Term> {
        match self {
            Term::Exp { coeffs, rate } => Ok(Term::Exp { coeffs: exp_term_derivative(coeffs, *rate, d), rate: *rate }),
            Term::Numeric(n) => {
                if n.order + d > n.max_order {
                    return Err(UtmError::Smoothness(format!("{} beyond order {}", n.label, n.max_order)));
                }
                let mut m = n.clone();
                m.order += d;
                Ok(Term::Numeric(m))
            }
        }
    }

    fn is_zero(&self) -> bool {
        match self {
            Term::Exp { coeffs, .. } => coeffs.iter().all(|&c| c == 0.0),
            Term::Numeric(_) => false,
        }
    }
}

/// Coefficients of d^d/du^d [p(u) e^{−λu}] / e^{−λu}.
fn exp_term_derivative(coeffs: &[f64], rate: f64, d: usize) -> Vec<f64> {
    let mut c = coeffs.to_vec();
    for _ in 0..d {
        let mut next = vec![0.0; c.len().max(1)];
        for (j, &a) in c.iter().enumerate() {
            if j > 0 {
                next[j - 1] += a * j as f64;
            }
            next[j] -= rate * a;
        }
        while next.len() > 1 && *next.last().unwrap() == 0.0 {
            next.pop();
        }
        c = next;
    }
    if c.is_empty() {
        c.push(0.0);
    }
    c
}

/// Moments J_m = ∫_0^L u^m e^{−su} du for m = 0..=mmax.
pub fn moments(s: C64, len: f64, mmax: usize) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); mmax + 1];
    if len.is_infinite() {
        let mut v = 1.0 / s;
        for (m, o) in out.iter_mut().enumerate() {
            if m > 0 {
                v = v * m as f64 / s;
            }
            *o = v;
        }
        return out;
    }
    let z = s * len;
    if z.norm() < (mmax as f64).max(4.0) {
        for (m, o) in out.iter_mut().enumerate() {
            let mut sum = C64::new(0.0, 0.0);
            let mut term = C64::new(1.0, 0.0);
            for r in 0..200 {
                let add = term / (m + r + 1) as f64;
                sum += add;
                if add.norm() < 1e-18 * sum.norm() && r > 2 {
                    break;
                }
                term = term * (-z) / (r + 1) as f64;
            }
            *o = sum * len.powi(m as i32 + 1);
        }
    } else {
        let e = (-z).exp();
        out[0] = (1.0 - e) / s;
        let mut lp = 1.0;
        for m in 1..=mmax {
            lp *= len;
            out[m] = (out[m - 1] * m as f64 - e * lp) / s;
        }
    }
    out
}

/// A smooth piece on [a, b) with b possibly infinite.
#[derive(Debug, Clone)]
pub struct Piece {
    pub a: f64,
    pub b: f64,
    pub terms: Vec<Term>,
}

impl Piece {
    /// Σ c_j (y − a)^j on [a, b).
    pub fn poly(a: f64, b: f64, coeffs: Vec<f64>) -> Piece {
        Piece { a, b, terms: vec![Term::Exp { coeffs, rate: 0.0 }] }
    }

    /// p(y − a) e^{−λ(y − a)} on [a, b).
    pub fn poly_exp(a: f64, b: f64, coeffs: Vec<f64>, rate: f64) -> Piece {
        Piece { a, b, terms: vec![Term::Exp { coeffs, rate }] }
    }

    /// p(y − c) e^{−β(y − c)²} on [a, b) with closed-form derivatives.
    pub fn gaussian(a: f64, b: f64, coeffs: Vec<f64>, center: f64, rate: f64) -> Piece {
        let max_order = 12;
        let mut polys = vec![coeffs.clone()];
        for _ in 0..max_order {
            let p = polys.last().unwrap();
            let mut next = vec![0.0; p.len() + 1];
            for (j, &c) in p.iter().enumerate() {
                if j > 0 {
                    next[j - 1] += c * j as f64;
                }
                next[j + 1] -= 2.0 * rate * c;
            }
            polys.push(next);
        }
        let scale = coeffs.iter().fold(0.0f64, |m, c| m.max(c.abs())).max(1e-300);
        let deg = coeffs.len() as f64;
        let reach = ((45.0 + scale.ln().max(0.0) + 6.0 * deg) / rate.max(1e-300)).sqrt() + 2.0;
        let f: DerivFn = Arc::new(move |y: f64, d: usize| {
            let u = y - center;
            let p = &polys[d];
            p.iter().rev().fold(0.0, |acc, &c| acc * u + c) * (-rate * u * u).exp()
        });
        Piece {
            a,
            b,
            terms: vec![Term::Numeric(NumericTerm {
                label: "gaussian".into(),
                f,
                max_order,
                cutoff: center + reach,
                shift: 0.0,
                order: 0,
            })],
        }
    }

    pub fn numeric(a: f64, b: f64, label: &str, f: DerivFn, max_order: usize, cutoff: f64) -> Piece {
        Piece {
            a,
            b,
            terms: vec![Term::Numeric(NumericTerm { label: label.into(), f, max_order, cutoff, shift: 0.0, order: 0 })],
        }
    }

    pub fn value(&self, y: f64, d: usize) -> Result<f64> {
        let u = y - self.a;
        let mut acc = 0.0;
        for t in &self.terms {
            acc += t.value(u, y, d)?;
        }
        Ok(acc)
    }

    pub fn derivative(&self, d: usize) -> Result<Piece> {
        let terms = self.terms.iter().map(|t| t.derivative(d)).collect::<Result<Vec<_>>>()?;
        Ok(Piece { a: self.a, b: self.b, terms })
    }

    pub fn is_zero(&self) -> bool {
        self.terms.iter().all(Term::is_zero)
    }

    /// Whether every derivative of order ≥ `d` vanishes identically.
    pub fn is_polynomial_below(&self, d: usize) -> bool {
        self.terms.iter().all(|t| match t {
            Term::Exp { coeffs, rate } => *rate == 0.0 && coeffs.len() <= d,
            Term::Numeric(_) => false,
        })
    }

    /// Right end of the region that carries non-negligible mass.
    pub fn effective_end(&self) -> f64 {
        if self.b.is_finite() {
            return self.b;
        }
        let mut end = self.a;
        for t in &self.terms {
            match t {
                Term::Exp { coeffs, rate } => {
                    if coeffs.iter().any(|&c| c != 0.0) {
                        let scale = coeffs.iter().fold(0.0f64, |m, c| m.max(c.abs()));
                        let deg = coeffs.len() as f64;
                        let mut l = (40.0 + scale.ln().max(0.0)) / rate;
                        for _ in 0..50 {
                            let next = (40.0 + scale.ln().max(0.0) + deg * (1.0 + l).ln()) / rate;
                            if (next - l).abs() < 1e-3 {
                                break;
                            }
                            l = next;
                        }
                        end = end.max(self.a + l);
                    }
                }
                Term::Numeric(n) => end = end.max(n.cutoff - n.shift),
            }
        }
        end
    }

    /// ∫_a^{min(b, end)} e^{−iky} piece(y) dy.
    pub fn transform(&self, k: C64, end: f64) -> Result<C64> {
        let hi = self.b.min(end);
        if hi <= self.a {
            return Ok(C64::new(0.0, 0.0));
        }
        let len = hi - self.a;
        let mut acc = C64::new(0.0, 0.0);
        for t in &self.terms {
            match t {
                Term::Exp { coeffs, rate } => {
                    if coeffs.iter().all(|&c| c == 0.0) {
                        continue;
                    }
                    let s = I * k + *rate;
                    if len.is_infinite() && s.re <= 0.0 {
                        return Err(UtmError::Domain(format!("transform of unbounded piece diverges at k = {k}")));
                    }
                    let mo = moments(s, len, coeffs.len() - 1);
                    let sum: C64 = coeffs.iter().zip(mo.iter()).map(|(&c, &m)| m * c).sum();
                    acc += (-I * k * self.a).exp() * sum;
                }
                Term::Numeric(n) => {
                    let hi_eff = hi.min(n.cutoff - n.shift);
                    if hi_eff <= self.a {
                        continue;
                    }
                    if k.im > 0.0 && hi.is_infinite() {
                        let grow = k.im * hi_eff;
                        if grow > 30.0 {
                            return Err(UtmError::Domain(format!("numeric tail grows at k = {k}")));
                        }
                    }
                    let tt = t.clone();
                    let a = self.a;
                    let f = move |y: f64| {
                        let v = tt.value(y - a, y, 0).unwrap_or(0.0);
                        (-I * k * y).exp() * v
                    };
                    let (v, _) = gauss_kronrod(&f, self.a, hi_eff, 1e-14, 1e-300);
                    acc += v;
                }
            }
        }
        Ok(acc)
    }

    fn shifted(&self, tau: f64) -> Piece {
        let terms = self
            .terms
            .iter()
            .map(|t| match t {
                Term::Numeric(n) => {
                    let mut m = n.clone();
                    m.shift += tau;
                    Term::Numeric(m)
                }
                other => other.clone(),
            })
            .collect();
        Piece { a: self.a - tau, b: self.b - tau, terms }
    }

    fn plus_constant(&self, v: f64) -> Piece {
        let mut p = self.clone();
        if v != 0.0 {
            p.terms.push(Term::Exp { coeffs: vec![v], rate: 0.0 });
        }
        p
    }
}

/// Pieces covering [0, horizon) exactly once.
#[derive(Debug, Clone)]
pub struct PiecewiseData {
    pieces: Vec<Piece>,
    horizon: f64,
}

/// Corner, jump and remainder data of a depth-d integration by parts.
#[derive(Debug, Clone)]
pub struct Decomposition {
    pub depth: usize,
    /// q^{(i)}(0⁺) for i < depth.
    pub corner: Vec<f64>,
    /// Interior breakpoints with [q^{(i)}(x_m)] for i < depth.
    pub jumps: Vec<(f64, Vec<f64>)>,
    /// Piecewise depth-th derivative.
    pub remainder: PiecewiseData,
}

impl Decomposition {
    /// Corner and interior jumps as a single list of (location, values).
    pub fn all_jumps(&self) -> Vec<(f64, Vec<f64>)> {
        let mut v = vec![(0.0, self.corner.clone())];
        v.extend(self.jumps.iter().cloned());
        v
    }

    pub fn reconstruct(&self, k: C64) -> Result<C64> {
        let ik = I * k;
        let mut acc = C64::new(0.0, 0.0);
        for (x0, w) in self.all_jumps() {
            let e = (-I * k * x0).exp();
            let mut p = ik;
            for &wi in &w {
                acc += e * wi / p;
                p *= ik;
            }
        }
        acc += self.remainder.half_line_ft(k)? / ik.powu(self.depth as u32);
        Ok(acc)
    }
}

/// Boundary and remainder data of the time integration by parts.
#[derive(Debug, Clone)]
pub struct GRemainder {
    pub order: usize,
    pub at_start: Vec<f64>,
    pub at_end: Vec<f64>,
    pub interior: Vec<(f64, Vec<f64>)>,
    /// G(μ) = ∫_0^t e^{iμs} g^{(p+1)}(s) ds.
    pub remainder: C64,
}

impl GRemainder {
    /// ∫_0^t e^{iμs} g(s) ds reassembled from the parts.
    pub fn assemble(&self, mu: C64, t: f64) -> C64 {
        let imu = I * mu;
        let et = (I * mu * t).exp();
        let mut acc = C64::new(0.0, 0.0);
        let mut p = imu;
        let mut sign = 1.0;
        for i in 0..=self.order {
            let mut b = et * self.at_end[i] - self.at_start[i];
            for (s, w) in &self.interior {
                b -= (I * mu * *s).exp() * w[i];
            }
            acc += b * sign / p;
            p *= imu;
            sign = -sign;
        }
        acc + self.remainder * sign / (p / imu)
    }
}

impl PiecewiseData {
    pub fn new(pieces: Vec<Piece>, horizon: f64) -> Result<Self> {
        if pieces.is_empty() {
            return Err(UtmError::Contract("no pieces".into()));
        }
        if !(horizon > 0.0) {
            return Err(UtmError::Contract("horizon must be positive".into()));
        }
        if pieces[0].a != 0.0 {
            return Err(UtmError::Contract("first piece must start at 0".into()));
        }
        for w in pieces.windows(2) {
            if w[0].b != w[1].a {
                return Err(UtmError::Contract(format!("pieces not contiguous at {}", w[0].b)));
            }
        }
        for p in &pieces {
            if !(p.b > p.a) || p.a.is_nan() {
                return Err(UtmError::Contract(format!("empty piece [{}, {})", p.a, p.b)));
            }
            for t in &p.terms {
                if let Term::Exp { coeffs, rate } = t {
                    if coeffs.iter().any(|c| !c.is_finite()) || !rate.is_finite() {
                        return Err(UtmError::Contract("non-finite coefficient".into()));
                    }
                    if p.b.is_infinite() && *rate <= 0.0 && coeffs.iter().any(|&c| c != 0.0) {
                        return Err(UtmError::Contract(format!(
                            "unbounded piece starting at {} needs a positive decay rate",
                            p.a
                        )));
                    }
                }
            }
        }
        let last = pieces.last().unwrap().b;
        if last != horizon {
            return Err(UtmError::Contract(format!("pieces end at {last}, horizon is {horizon}")));
        }
        Ok(PiecewiseData { pieces, horizon })
    }

    pub fn zero(horizon: f64) -> Self {
        PiecewiseData { pieces: vec![Piece::poly(0.0, horizon, vec![0.0])], horizon }
    }

    pub fn constant(v: f64, horizon: f64) -> Self {
        PiecewiseData { pieces: vec![Piece::poly(0.0, horizon, vec![v])], horizon }
    }

    /// χ_{[x1, x2)} on the half line.
    pub fn indicator(x1: f64, x2: f64) -> Result<Self> {
        let mut pieces = Vec::new();
        if x1 > 0.0 {
            pieces.push(Piece::poly(0.0, x1, vec![0.0]));
        }
        pieces.push(Piece::poly(x1, x2, vec![1.0]));
        pieces.push(Piece::poly(x2, f64::INFINITY, vec![0.0]));
        PiecewiseData::new(pieces, f64::INFINITY)
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn is_zero(&self) -> bool {
        self.pieces.iter().all(Piece::is_zero)
    }

    /// Interior breakpoints x_1 < … < x_M.
    pub fn breakpoints(&self) -> Vec<f64> {
        self.pieces[1..].iter().map(|p| p.a).collect()
    }

    fn index_right(&self, y: f64) -> usize {
        self.pieces.iter().rposition(|p| p.a <= y).unwrap_or(0)
    }

    fn index_left(&self, y: f64) -> usize {
        self.pieces.iter().position(|p| p.b >= y).unwrap_or(self.pieces.len() - 1)
    }

    /// Right-continuous value of the d-th derivative.
    pub fn value(&self, y: f64, d: usize) -> Result<f64> {
        self.right_derivative(y, d)
    }

    pub fn right_derivative(&self, y: f64, d: usize) -> Result<f64> {
        if y < 0.0 || y >= self.horizon {
            return if y >= self.horizon && self.horizon.is_infinite() { Ok(0.0) } else if y >= self.horizon {
                self.left_derivative(y, d)
            } else {
                Err(UtmError::Domain(format!("{y} outside the data domain")))
            };
        }
        self.pieces[self.index_right(y)].value(y, d)
    }

    pub fn left_derivative(&self, y: f64, d: usize) -> Result<f64> {
        if y <= 0.0 {
            return Ok(0.0);
        }
        self.pieces[self.index_left(y)].value(y, d)
    }

    /// [f^{(d)}(c)] = f^{(d)}(c⁺) − f^{(d)}(c⁻).
    pub fn jump(&self, d: usize, c: f64) -> Result<f64> {
        Ok(self.right_derivative(c, d)? - self.left_derivative(c, d)?)
    }

    pub fn derivative(&self, d: usize) -> Result<PiecewiseData> {
        let pieces = self.pieces.iter().map(|p| p.derivative(d)).collect::<Result<Vec<_>>>()?;
        Ok(PiecewiseData { pieces, horizon: self.horizon })
    }

    /// ∫_0^∞ e^{−iky} q(y) dy.
    pub fn half_line_ft(&self, k: C64) -> Result<C64> {
        let mut acc = C64::new(0.0, 0.0);
        for p in &self.pieces {
            acc += p.transform(k, f64::INFINITY)?;
        }
        Ok(acc)
    }

    /// ∫_0^t e^{−iks} g(s) ds.
    pub fn time_transform(&self, k: C64, t: f64) -> Result<C64> {
        if !(0.0..=self.horizon).contains(&t) {
            return Err(UtmError::Domain(format!("t = {t} outside [0, {}]", self.horizon)));
        }
        let mut acc = C64::new(0.0, 0.0);
        for p in &self.pieces {
            if p.a >= t {
                break;
            }
            acc += p.transform(k, t)?;
        }
        Ok(acc)
    }

    fn check_order(&self, d: usize) -> Result<()> {
        for p in &self.pieces {
            for t in &p.terms {
                if let Term::Numeric(n) = t {
                    if n.order + d > n.max_order {
                        return Err(UtmError::Smoothness(format!(
                            "piece [{}, {}) is differentiable only {} times, order {} requested",
                            p.a,
                            p.b,
                            n.max_order - n.order,
                            d
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn ibp_decompose(&self, depth: usize) -> Result<Decomposition> {
        self.check_order(depth)?;
        let corner = (0..depth).map(|i| self.right_derivative(0.0, i)).collect::<Result<Vec<_>>>()?;
        let mut jumps = Vec::new();
        for c in self.breakpoints() {
            let w = (0..depth).map(|i| self.jump(i, c)).collect::<Result<Vec<_>>>()?;
            jumps.push((c, w));
        }
        Ok(Decomposition { depth, corner, jumps, remainder: self.derivative(depth)? })
    }

    /// Integration by parts of ∫_0^t e^{iμs} g(s) ds to order p.
    pub fn g_remainders(&self, p: usize, mu: C64, t: f64) -> Result<GRemainder> {
        if !(0.0..=self.horizon).contains(&t) {
            return Err(UtmError::Domain(format!("t = {t} outside [0, {}]", self.horizon)));
        }
        self.check_order(p + 1)?;
        let at_start = (0..=p).map(|i| self.right_derivative(0.0, i)).collect::<Result<Vec<_>>>()?;
        let at_end = (0..=p).map(|i| self.left_derivative(t, i)).collect::<Result<Vec<_>>>()?;
        let mut interior = Vec::new();
        for c in self.breakpoints() {
            if c < t {
                let w = (0..=p).map(|i| self.jump(i, c)).collect::<Result<Vec<_>>>()?;
                interior.push((c, w));
            }
        }
        let remainder = self.derivative(p + 1)?.time_transform(-mu, t)?;
        Ok(GRemainder { order: p, at_start, at_end, interior, remainder })
    }

    /// Telescoping split at value jumps: (τ_i, h_i) with G_i(s) = h_i(s − τ_i) for s ≥ τ_i.
    pub fn split_shifted(&self) -> Result<Vec<(f64, PiecewiseData)>> {
        let mut cuts = Vec::new();
        for c in self.breakpoints() {
            if self.jump(0, c)? != 0.0 {
                cuts.push(c);
            }
        }
        let mut bounds = vec![0.0];
        bounds.extend(cuts.iter().copied());
        let mut out = Vec::new();
        let mut prev_left = 0.0;
        for (i, &start) in bounds.iter().enumerate() {
            let end = bounds.get(i + 1).copied().unwrap_or(self.horizon);
            let mut pieces: Vec<Piece> = self
                .pieces
                .iter()
                .filter(|p| p.a >= start && p.b <= end)
                .map(|p| p.plus_constant(-prev_left).shifted(start))
                .collect();
            let left_end = if end < self.horizon { self.left_derivative(end, 0)? } else { 0.0 };
            if end < self.horizon {
                pieces.push(Piece::poly(end - start, self.horizon - start, vec![left_end - prev_left]));
            }
            out.push((start, PiecewiseData::new(pieces, self.horizon - start)?));
            prev_left = left_end;
        }
        Ok(out)
    }
}

/// G_{j,1}, G_{j,2}, … on [0, T], summing pointwise to g.
pub fn split_boundary_at_jumps(g: &PiecewiseData) -> Result<Vec<PiecewiseData>> {
    let t_end = g.horizon();
    g.split_shifted()?
        .into_iter()
        .map(|(tau, h)| {
            let mut pieces = Vec::new();
            if tau > 0.0 {
                pieces.push(Piece::poly(0.0, tau, vec![0.0]));
            }
            pieces.extend(h.pieces.iter().map(|p| p.shifted(-tau)));
            PiecewiseData::new(pieces, t_end)
        })
        .collect()
}

/// Dispersion, initial datum, N(n) boundary data and horizon T.
#[derive(Debug, Clone)]
pub struct IbvpSpec {
    pub dispersion: Dispersion,
    pub initial: PiecewiseData,
    pub boundary: Vec<PiecewiseData>,
    pub horizon: f64,
}

impl IbvpSpec {
    pub fn new(dispersion: Dispersion, initial: PiecewiseData, boundary: Vec<PiecewiseData>, horizon: f64) -> Result<Self> {
        if !(horizon > 0.0) || !horizon.is_finite() {
            return Err(UtmError::Contract("horizon T must be positive and finite".into()));
        }
        let n = dispersion.num_boundary_conditions();
        if boundary.len() != n {
            return Err(UtmError::Contract(format!("expected {n} boundary data, got {}", boundary.len())));
        }
        if initial.horizon().is_finite() {
            return Err(UtmError::Contract("initial datum must cover [0, ∞)".into()));
        }
        for g in &boundary {
            if g.horizon() != horizon {
                return Err(UtmError::Contract(format!("boundary datum covers [0, {}], horizon is {horizon}", g.horizon())));
            }
        }
        Ok(IbvpSpec { dispersion, initial, boundary, horizon })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn numeric_ft(data: &PiecewiseData, k: C64, end: f64) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for p in data.pieces() {
            let hi = p.b.min(end).min(p.effective_end());
            if hi > p.a {
                let f = |y: f64| (-I * k * y).exp() * p.value(y, 0).unwrap();
                acc += gauss_kronrod(&f, p.a, hi, 1e-14, 1e-300).0;
            }
        }
        acc
    }

    #[test]
    fn indicator_transform() {
        let q = PiecewiseData::indicator(1.0, 2.0).unwrap();
        for k in [c(0.7, 0.0), c(-2.0, -0.5), c(3.0, 1.0)] {
            let expect = ((-I * k).exp() - (-I * k * 2.0).exp()) / (I * k);
            assert!((q.half_line_ft(k).unwrap() - expect).norm() < 1e-14);
        }
        let k = c(0.7, -0.3);
        assert!((q.half_line_ft(k).unwrap() - numeric_ft(&q, k, 3.0)).norm() < 1e-12);
    }

    #[test]
    fn exponential_transform() {
        let q = PiecewiseData::new(vec![Piece::poly_exp(0.0, f64::INFINITY, vec![1.0], 1.0)], f64::INFINITY).unwrap();
        for k in [c(0.0, 0.0), c(2.0, -1.0), c(1e-9, 0.0)] {
            assert!((q.half_line_ft(k).unwrap() - 1.0 / (1.0 + I * k)).norm() < 1e-14);
        }
        assert!(q.half_line_ft(c(0.0, 2.0)).is_err());
    }

    #[test]
    fn small_k_series_accuracy() {
        let q = PiecewiseData::new(
            vec![Piece::poly(0.0, 1.5, vec![1.0, -2.0, 0.5]), Piece::poly(1.5, f64::INFINITY, vec![0.0])],
            f64::INFINITY,
        )
        .unwrap();
        for k in [c(1e-6, 0.0), c(1e-3, -1e-3), c(0.5, 0.0), c(2.0, -0.1)] {
            let v = q.half_line_ft(k).unwrap();
            let o = numeric_ft(&q, k, 1.5);
            assert!((v - o).norm() < 1e-13, "{k}: {v} vs {o}");
        }
    }

    #[test]
    fn time_transform_examples() {
        let g = PiecewiseData::constant(1.0, 2.0);
        let k = c(0.8, 0.3);
        let expect = (1.0 - (-I * k).exp()) / (I * k);
        assert!((g.time_transform(k, 1.0).unwrap() - expect).norm() < 1e-14);
        assert_eq!(PiecewiseData::zero(1.0).time_transform(k, 0.5).unwrap(), C64::new(0.0, 0.0));
        assert!(g.time_transform(k, 3.0).is_err());
        let step = PiecewiseData::new(vec![Piece::poly(0.0, 0.25, vec![1.0]), Piece::poly(0.25, 1.0, vec![0.0, 2.0])], 1.0).unwrap();
        let k = c(-1.3, 0.4);
        let f = |s: f64| (-I * k * s).exp() * step.value(s, 0).unwrap();
        let o = gauss_kronrod(&f, 0.0, 0.25, 1e-15, 1e-300).0 + gauss_kronrod(&f, 0.25, 0.8, 1e-15, 1e-300).0;
        assert!((step.time_transform(k, 0.8).unwrap() - o).norm() < 1e-12);
    }

    #[test]
    fn ibp_examples() {
        let q = PiecewiseData::new(vec![Piece::poly_exp(0.0, f64::INFINITY, vec![1.0], 1.0)], f64::INFINITY).unwrap();
        let d = q.ibp_decompose(1).unwrap();
        assert_eq!(d.corner, vec![1.0]);
        let k = c(0.4, -0.2);
        assert!((d.remainder.half_line_ft(k).unwrap() + 1.0 / (1.0 + I * k)).norm() < 1e-14);
        let q = PiecewiseData::indicator(1.0, 2.0).unwrap();
        let d = q.ibp_decompose(1).unwrap();
        assert_eq!(d.jumps, vec![(1.0, vec![1.0]), (2.0, vec![-1.0])]);
        assert!(d.remainder.is_zero());
    }

    #[test]
    fn g_remainder_examples() {
        let g = PiecewiseData::constant(2.0, 1.0);
        let r = g.g_remainders(0, c(1.5, 0.0), 0.7).unwrap();
        assert_eq!(r.remainder, C64::new(0.0, 0.0));
        let g = PiecewiseData::new(vec![Piece::poly(0.0, 1.0, vec![0.0, 1.0])], 1.0).unwrap();
        let r = g.g_remainders(1, c(1.5, 0.0), 0.7).unwrap();
        assert_eq!(r.remainder, C64::new(0.0, 0.0));
    }

    #[test]
    fn split_examples() {
        let g = PiecewiseData::new(vec![Piece::poly(0.0, 0.25, vec![1.0]), Piece::poly(0.25, 1.0, vec![0.0])], 1.0).unwrap();
        let parts = split_boundary_at_jumps(&g).unwrap();
        assert_eq!(parts.len(), 2);
        for s in [0.1, 0.3, 0.9] {
            assert_eq!(parts[0].value(s, 0).unwrap(), 1.0);
            assert_eq!(parts[1].value(s, 0).unwrap(), if s < 0.25 { 0.0 } else { -1.0 });
        }
        let smooth = PiecewiseData::new(vec![Piece::poly(0.0, 0.5, vec![1.0, 1.0]), Piece::poly(0.5, 1.0, vec![1.5, -1.0])], 1.0).unwrap();
        assert_eq!(split_boundary_at_jumps(&smooth).unwrap().len(), 1);
    }

    #[test]
    fn unbounded_poly_rejected() {
        assert!(PiecewiseData::new(vec![Piece::poly(0.0, f64::INFINITY, vec![1.0])], f64::INFINITY).is_err());
        assert!(PiecewiseData::new(vec![Piece::poly_exp(0.0, f64::INFINITY, vec![1.0], -1.0)], f64::INFINITY).is_err());
    }

    fn sample_data() -> Vec<PiecewiseData> {
        vec![
            PiecewiseData::indicator(1.0, 2.0).unwrap(),
            PiecewiseData::new(
                vec![
                    Piece::poly(0.0, 0.7, vec![1.0, -0.5, 0.25]),
                    Piece::poly_exp(0.7, f64::INFINITY, vec![0.3, 1.0], 1.5),
                ],
                f64::INFINITY,
            )
            .unwrap(),
            PiecewiseData::new(vec![Piece::gaussian(0.0, f64::INFINITY, vec![0.0, 1.0], 0.0, 1.0)], f64::INFINITY).unwrap(),
        ]
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(50))]
        #[test]
        fn decomposition_reconstructs(kr in -4.0..4.0f64, ki in -3.0..0.0f64, depth in 1usize..4) {
            let k = c(kr, ki);
            prop_assume!(k.norm() > 1e-3);
            for q in sample_data() {
                let d = q.ibp_decompose(depth).unwrap();
                let a = d.reconstruct(k).unwrap();
                let b = q.half_line_ft(k).unwrap();
                prop_assert!((a - b).norm() <= 1e-10 * (1.0 + b.norm()), "{} vs {}", a, b);
            }
        }

        #[test]
        fn g_remainder_identity(mu_r in -5.0..5.0f64, t in 0.05..1.0f64, p in 0usize..3) {
            let mu = c(mu_r, 0.0);
            prop_assume!(mu.norm() > 1e-2);
            let g = PiecewiseData::new(
                vec![Piece::poly_exp(0.0, 0.4, vec![1.0, 0.5], 1.0), Piece::poly(0.4, 1.0, vec![-0.2, 0.3, 1.0])],
                1.0,
            ).unwrap();
            let r = g.g_remainders(p, mu, t).unwrap();
            let direct = g.time_transform(-mu, t).unwrap();
            prop_assert!((r.assemble(mu, t) - direct).norm() <= 1e-10 * (1.0 + direct.norm()));
        }

        #[test]
        fn split_sums_to_original(s in 0.0..1.0f64) {
            let g = PiecewiseData::new(
                vec![Piece::poly(0.0, 0.3, vec![1.0, 2.0]), Piece::poly_exp(0.3, 0.6, vec![-1.0], 2.0), Piece::poly(0.6, 1.0, vec![0.5])],
                1.0,
            ).unwrap();
            prop_assume!((s - 0.3).abs() > 1e-9 && (s - 0.6).abs() > 1e-9);
            let parts = split_boundary_at_jumps(&g).unwrap();
            prop_assert_eq!(parts.len(), 3);
            let sum: f64 = parts.iter().map(|p| p.value(s, 0).unwrap()).sum();
            prop_assert!((sum - g.value(s, 0).unwrap()).abs() < 1e-12);
        }
    }
}
