//! Solution assembly. Every formula is reduced to channels: an initial
//! channel (σ, ν, B) contributes (1/2π)∫_σ e^{ikx−iωt} B q̂_o(νk) dk and a
//! boundary channel (σ, j, a, d) contributes (1/2π)∫_σ e^{ikx−iωt} a k^d
//! g̃_j(−ω,t) dk. Integration by parts turns each channel into special
//! functions plus a smooth remainder integrated against them.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::contours::asymptotic_sectors;
use crate::dispersion::Dispersion;
use crate::error::{Result, UtmError};
use crate::piecewise::{IbvpSpec, PiecewiseData};
use crate::quadrature::{gauss_kronrod, QuadSettings};
use crate::ring::Cyc12;
use crate::special::{special_eval, Regime, Selector, SpecialKey};
use crate::C64;

const I: C64 = C64 { re: 0.0, im: 1.0 };
const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const MAX_DEPTH: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    ClosedFormLs,
    ClosedFormAiry1,
    ClosedFormAiry2,
    GeneralMonomial,
    DirectOracle,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::ClosedFormLs => "closed-form-ls",
            Method::ClosedFormAiry1 => "closed-form-airy1",
            Method::ClosedFormAiry2 => "closed-form-airy2",
            Method::GeneralMonomial => "general-monomial",
            Method::DirectOracle => "direct-oracle",
        }
    }

    /// The closed form for the dispersion if there is one, else the general solver.
    pub fn auto(disp: &Dispersion) -> Method {
        if *disp == Dispersion::schrodinger() {
            Method::ClosedFormLs
        } else if *disp == Dispersion::airy1() {
            Method::ClosedFormAiry1
        } else if *disp == Dispersion::airy2() {
            Method::ClosedFormAiry2
        } else {
            Method::GeneralMonomial
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ChannelKind<T> {
    Initial { nu: T },
    Boundary { j: usize, power: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Channel<T> {
    pub selector: Selector,
    pub kind: ChannelKind<T>,
    pub weight: T,
}

impl Channel<Cyc12> {
    pub fn to_complex(&self) -> Channel<C64> {
        Channel {
            selector: self.selector,
            kind: match self.kind {
                ChannelKind::Initial { nu } => ChannelKind::Initial { nu: nu.to_complex() },
                ChannelKind::Boundary { j, power } => ChannelKind::Boundary { j, power },
            },
            weight: self.weight.to_complex(),
        }
    }
}

fn init(sel: Selector, nu: Cyc12, weight: Cyc12) -> Channel<Cyc12> {
    Channel { selector: sel, kind: ChannelKind::Initial { nu }, weight }
}

fn bdry(j_comp: usize, j: usize, power: usize, weight: Cyc12) -> Channel<Cyc12> {
    Channel { selector: Selector::Component(j_comp), kind: ChannelKind::Boundary { j, power }, weight }
}

/// Channel tables of the three closed-form solutions.
pub fn closed_form_channels(method: Method) -> Result<Vec<Channel<Cyc12>>> {
    let one = Cyc12::ONE;
    let a = Cyc12::alpha();
    let a2 = a * a;
    let i = Cyc12::i();
    let c0 = Selector::Component(0);
    let c1 = Selector::Component(1);
    Ok(match method {
        Method::ClosedFormLs => vec![
            init(Selector::Ivp, one, one),
            init(c0, -one, -one),
            bdry(0, 0, 1, Cyc12::int(2)),
        ],
        Method::ClosedFormAiry1 => vec![
            init(Selector::Ivp, one, one),
            init(c0, a, a),
            init(c0, a2, a2),
            bdry(0, 0, 2, Cyc12::int(-3)),
        ],
        Method::ClosedFormAiry2 => vec![
            init(Selector::Ivp, one, one),
            init(c0, a2, -one),
            init(c1, a, -one),
            bdry(0, 0, 2, one - a),
            bdry(0, 1, 1, i * (a2 - one)),
            bdry(1, 0, 2, one - a2),
            bdry(1, 1, 1, i * (a - one)),
        ],
        _ => return Err(UtmError::Contract(format!("{} has no closed-form table", method.as_str()))),
    })
}

/// Channel table of a canonical monomial problem by elimination of the
/// unknown boundary transforms through the global relation.
///
/// At nodes k inside each sector the symmetries ν with Im ν < 0 give the
/// square system Σ_{j≥N} c_j(ν) u_j = −i q̂_o(ν) − Σ_{j<N} c_j(ν) g̃_j. The
/// resulting coefficients of q̂_o(ν) and g̃_j are homogeneous in k; this is
/// checked across nodes before the table is accepted.
pub fn eliminate_channels(disp: &Dispersion) -> Result<Vec<Channel<C64>>> {
    if !disp.is_monomial() {
        return Err(UtmError::Contract("the general solver covers monomial dispersions only".into()));
    }
    let n = disp.degree();
    let big_n = disp.num_boundary_conditions();
    let sectors = asymptotic_sectors(disp).sectors;
    let mut out = vec![Channel { selector: Selector::Ivp, kind: ChannelKind::Initial { nu: C64::new(1.0, 0.0) }, weight: C64::new(1.0, 0.0) }];
    for (jc, &(lo, hi)) in sectors.iter().enumerate() {
        let mut reference: Option<Vec<Channel<C64>>> = None;
        for &(f, r) in &[(0.5, 1.0), (0.3, 0.7), (0.7, 1.6), (0.45, 2.3)] {
            let mut k = C64::from_polar(r, lo + f * (hi - lo));
            let table = match node_table(disp, k, jc, n, big_n) {
                Ok(t) => t,
                Err(UtmError::Numerical(_)) => {
                    k *= C64::from_polar(1.0, 1e-6);
                    node_table(disp, k, jc, n, big_n)
                        .map_err(|e| UtmError::Numerical(format!("elimination failed at k = {k}: {e}")))?
                }
                Err(e) => return Err(e),
            };
            match &reference {
                None => reference = Some(table),
                Some(prev) => {
                    if prev.len() != table.len() || prev.iter().zip(&table).any(|(a, b)| !channels_close(a, b)) {
                        return Err(UtmError::Numerical(format!("elimination coefficients are not homogeneous in sector {jc}")));
                    }
                }
            }
        }
        out.extend(reference.unwrap_or_default());
    }
    Ok(out)
}

fn channels_close(a: &Channel<C64>, b: &Channel<C64>) -> bool {
    let kind = match (a.kind, b.kind) {
        (ChannelKind::Initial { nu: x }, ChannelKind::Initial { nu: y }) => (x - y).norm() < 1e-10,
        (ChannelKind::Boundary { j: x, power: p }, ChannelKind::Boundary { j: y, power: q }) => x == y && p == q,
        _ => false,
    };
    kind && a.selector == b.selector && (a.weight - b.weight).norm() < 1e-10 * (1.0 + a.weight.norm())
}

fn node_table(disp: &Dispersion, k: C64, jc: usize, n: usize, big_n: usize) -> Result<Vec<Channel<C64>>> {
    let nus: Vec<C64> = disp.symmetries(k)?.into_iter().skip(1).filter(|nu| nu.im < 0.0).collect();
    let unknown = n - big_n;
    if nus.len() != unknown {
        return Err(UtmError::Numerical(format!("{} symmetries in the lower half plane, expected {unknown}", nus.len())));
    }
    let ck = disp.cj_coefficients(k);
    let cnu: Vec<Vec<C64>> = nus.iter().map(|&nu| disp.cj_coefficients(nu)).collect();
    let sel = Selector::Component(jc);
    let mut table = Vec::new();
    // v = A^{-T} c_{≥N}(k), so that Σ_q c_{N+q}(k)(A^{-1})_{qp} = v_p
    let inv = if unknown > 0 {
        let a = DMatrix::from_fn(unknown, unknown, |p, q| cnu[p][big_n + q]);
        let tr = a.transpose();
        let rhs = DVector::from_fn(unknown, |q, _| ck[big_n + q]);
        let lu = tr.lu();
        let scale = a.iter().fold(0.0f64, |m, z| m.max(z.norm()));
        let det = lu.determinant().norm();
        if !(det > 1e-12 * scale.powi(unknown as i32)) {
            return Err(UtmError::Numerical(format!("singular elimination system at k = {k}")));
        }
        lu.solve(&rhs).ok_or_else(|| UtmError::Numerical(format!("singular elimination system at k = {k}")))?
    } else {
        DVector::zeros(0)
    };
    for (p, &nu) in nus.iter().enumerate() {
        table.push(Channel { selector: sel, kind: ChannelKind::Initial { nu: nu / k }, weight: -inv[p] });
    }
    for i in 0..big_n {
        let mut coef = ck[i];
        for p in 0..unknown {
            coef -= inv[p] * cnu[p][i];
        }
        coef *= -I;
        let power = n - 1 - i;
        table.push(Channel { selector: sel, kind: ChannelKind::Boundary { j: i, power }, weight: coef / k.powu(power as u32) });
    }
    Ok(table)
}

/// Solution value with its error estimate and the regimes used.
#[derive(Debug, Clone, Serialize)]
pub struct FieldSample {
    pub x: f64,
    pub t: f64,
    pub value: C64,
    pub err: f64,
    pub regime: String,
    pub error: Option<String>,
}

#[derive(Debug, Default, Clone, Copy)]
struct Tally {
    exact: bool,
    quadrature: bool,
    asymptotic: bool,
    flagged: bool,
}

impl Tally {
    fn note(&mut self, r: Regime, flagged: bool) {
        match r {
            Regime::Exact => self.exact = true,
            Regime::Quadrature => self.quadrature = true,
            Regime::Asymptotic => self.asymptotic = true,
        }
        self.flagged |= flagged;
    }

    fn merge(&mut self, o: Tally) {
        self.exact |= o.exact;
        self.quadrature |= o.quadrature;
        self.asymptotic |= o.asymptotic;
        self.flagged |= o.flagged;
    }

    fn label(&self) -> String {
        let base = match (self.quadrature, self.asymptotic) {
            (true, true) => "mixed",
            (true, false) => "quadrature",
            (false, true) => "asymptotic",
            (false, false) => "exact",
        };
        if self.flagged {
            format!("{base}+flagged")
        } else {
            base.to_string()
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Acc {
    value: C64,
    err: f64,
    tally: Tally,
}

impl Acc {
    fn new() -> Self {
        Acc { value: ZERO, err: 0.0, tally: Tally::default() }
    }
}

/// Immutable solution evaluator for one problem.
#[derive(Debug, Clone)]
pub struct SolutionEvaluator {
    spec: IbvpSpec,
    method: Method,
    settings: QuadSettings,
    depth: usize,
    channels: Vec<Channel<C64>>,
    init_decomp: crate::piecewise::Decomposition,
    /// Per boundary datum: (shift τ, shifted datum h, time IBP order p).
    boundary_parts: Vec<Vec<(f64, PiecewiseData, usize)>>,
}

fn polynomial_depth(data: &PiecewiseData, min: usize) -> Option<usize> {
    (min..=MAX_DEPTH).find(|&d| data.pieces().iter().all(|p| p.is_polynomial_below(d)))
}

/// Depth floor for non-polynomial data. Remainder kernels oscillate without
/// bound as t → 0 (initial data) or s → t (boundary data), and each
/// integration by parts shrinks them by a power of the time.
const SMOOTH_DEPTH: usize = 4;

impl SolutionEvaluator {
    pub fn new(spec: IbvpSpec, method: Method, settings: QuadSettings, depth: usize) -> Result<Self> {
        settings.validate()?;
        let disp = &spec.dispersion;
        if depth == 0 || depth > MAX_DEPTH {
            return Err(UtmError::Contract(format!("IBP depth must lie in 1..={MAX_DEPTH}")));
        }
        let channels = match method {
            Method::ClosedFormLs | Method::ClosedFormAiry1 | Method::ClosedFormAiry2 => {
                let want = match method {
                    Method::ClosedFormLs => Dispersion::schrodinger(),
                    Method::ClosedFormAiry1 => Dispersion::airy1(),
                    _ => Dispersion::airy2(),
                };
                if *disp != want {
                    return Err(UtmError::Contract(format!("{} needs ω = {:?}", method.as_str(), want.coeffs())));
                }
                closed_form_channels(method)?.iter().map(Channel::to_complex).collect()
            }
            Method::GeneralMonomial => eliminate_channels(disp)?,
            Method::DirectOracle => {
                if *disp != Dispersion::schrodinger() || spec.boundary.iter().any(|g| !g.is_zero()) {
                    return Err(UtmError::Contract("the direct oracle covers ω = k² with zero Dirichlet data".into()));
                }
                Vec::new()
            }
        };
        let (d, init_decomp) = match polynomial_depth(&spec.initial, depth) {
            Some(d) => (d, spec.initial.ibp_decompose(d)?),
            None => match spec.initial.ibp_decompose(depth.max(SMOOTH_DEPTH)) {
                Ok(dec) => (depth.max(SMOOTH_DEPTH), dec),
                Err(_) => (depth, spec.initial.ibp_decompose(depth)?),
            },
        };
        let mut boundary_parts = Vec::new();
        for g in &spec.boundary {
            let mut parts = Vec::new();
            for (tau, h) in g.split_shifted()? {
                let p = match polynomial_depth(&h, 1) {
                    Some(d) => d - 1,
                    None if h.derivative(SMOOTH_DEPTH).is_ok() => SMOOTH_DEPTH - 1,
                    None => 0,
                };
                parts.push((tau, h, p));
            }
            boundary_parts.push(parts);
        }
        Ok(SolutionEvaluator { spec, method, settings, depth: d, channels, init_decomp, boundary_parts })
    }

    /// Closed form when available, else the general solver.
    pub fn auto(spec: IbvpSpec, settings: QuadSettings) -> Result<Self> {
        let m = Method::auto(&spec.dispersion);
        SolutionEvaluator::new(spec, m, settings, 1)
    }

    pub fn spec(&self) -> &IbvpSpec {
        &self.spec
    }

    pub fn method(&self) -> Method {
        self.method
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn channels(&self) -> &[Channel<C64>] {
        &self.channels
    }

    pub fn settings(&self) -> &QuadSettings {
        &self.settings
    }

    pub fn value(&self, x: f64, t: f64) -> Result<C64> {
        self.sample(x, t).map(|s| s.value)
    }

    pub fn sample(&self, x: f64, t: f64) -> Result<FieldSample> {
        if !(x > 0.0) || !x.is_finite() {
            return Err(UtmError::Domain(format!("x = {x}: the representation holds for x > 0 only")));
        }
        if !(t > 0.0 && t <= self.spec.horizon) {
            return Err(UtmError::Domain(format!("t = {t} outside (0, {}]", self.spec.horizon)));
        }
        if self.method == Method::DirectOracle {
            let v = crate::oracles::images_ls(&self.spec.initial, x, t)?;
            return Ok(FieldSample { x, t, value: v, err: 0.0, regime: "oracle".into(), error: None });
        }
        let mut acc = Acc::new();
        for ch in &self.channels {
            match ch.kind {
                ChannelKind::Initial { nu } => self.initial_channel(ch.selector, nu, ch.weight, x, t, &mut acc)?,
                ChannelKind::Boundary { j, power } => self.boundary_channel(ch.selector, j, power, ch.weight, x, t, false, 0, &mut acc)?,
            }
        }
        Ok(FieldSample { x, t, value: acc.value, err: acc.err, regime: acc.tally.label(), error: None })
    }

    fn special(&self, sel: Selector, m: i32, xi: C64, t: f64, acc: &mut Acc) -> Result<C64> {
        let key = SpecialKey::new(self.spec.dispersion.clone(), m, sel)?;
        let v = special_eval(&key, xi, t, &self.settings)?;
        acc.tally.note(v.regime, v.flagged);
        acc.err += v.err;
        Ok(v.value)
    }

    fn initial_channel(&self, sel: Selector, nu: C64, weight: C64, x: f64, t: f64, acc: &mut Acc) -> Result<()> {
        let dec = &self.init_decomp;
        for (y0, w) in dec.all_jumps() {
            let mut nu_pow = nu;
            for (i, &wi) in w.iter().enumerate() {
                if wi != 0.0 {
                    let c = weight * wi / nu_pow;
                    let v = self.special(sel, i as i32, C64::new(x, 0.0) - nu * y0, t, acc)?;
                    acc.value += c * v;
                }
                nu_pow *= nu;
            }
        }
        let d = dec.depth;
        let c = weight / nu.powu(d as u32);
        let rem = &dec.remainder;
        for p in rem.pieces() {
            if p.is_zero() {
                continue;
            }
            let hi = p.b.min(p.effective_end());
            if hi <= p.a {
                continue;
            }
            let mut cuts = vec![p.a];
            if nu == C64::new(1.0, 0.0) && x > p.a && x < hi {
                cuts.push(x);
            }
            cuts.push(hi);
            for win in cuts.windows(2) {
                let mut local = Acc::new();
                let mut failure = None;
                let f = |y: f64| {
                    let fy = match p.value(y, 0) {
                        Ok(v) => v,
                        Err(e) => {
                            failure.get_or_insert(e);
                            return ZERO;
                        }
                    };
                    if fy == 0.0 {
                        return ZERO;
                    }
                    let mut a = Acc::new();
                    match self.special(sel, d as i32 - 1, C64::new(x, 0.0) - nu * y, t, &mut a) {
                        Ok(v) => v * fy,
                        Err(e) => {
                            failure.get_or_insert(e);
                            ZERO
                        }
                    }
                };
                let f = std::cell::RefCell::new(f);
                let (v, e) = gauss_kronrod(&|y: f64| (f.borrow_mut())(y), win[0], win[1], self.settings.tol * 0.1, self.settings.tol * 1e-2);
                if let Some(e) = failure {
                    return Err(e);
                }
                local.tally.quadrature = true;
                acc.value += c * v;
                acc.err += c.norm() * e;
                acc.tally.merge(local.tally);
            }
        }
        Ok(())
    }

    /// Boundary contributions at (x, t), x ≥ 0, without the g_j(0) terms and
    /// with every pole order shifted by `dm` (dm = −1 gives ∂_x).
    pub(crate) fn boundary_rest(&self, x: f64, t: f64, dm: i32) -> Result<C64> {
        let mut acc = Acc::new();
        for ch in &self.channels {
            if let ChannelKind::Boundary { j, power } = ch.kind {
                self.boundary_channel(ch.selector, j, power, ch.weight, x, t, true, dm, &mut acc)?;
            }
        }
        Ok(acc.value)
    }

    #[allow(clippy::too_many_arguments)]
    fn boundary_channel(
        &self,
        sel: Selector,
        j: usize,
        power: usize,
        weight: C64,
        x: f64,
        t: f64,
        skip_start: bool,
        dm: i32,
        acc: &mut Acc,
    ) -> Result<()> {
        let disp = &self.spec.dispersion;
        let n = disp.degree();
        let iw = I * disp.leading();
        for (tau, h, p) in &self.boundary_parts[j] {
            let tp = t - tau;
            if tp <= 0.0 {
                continue;
            }
            let p = *p;
            let mut times = vec![(0.0, (0..=p).map(|l| h.right_derivative(0.0, l)).collect::<Result<Vec<_>>>()?)];
            for s in h.breakpoints() {
                if s < tp {
                    times.push((s, (0..=p).map(|l| h.jump(l, s)).collect::<Result<Vec<_>>>()?));
                }
            }
            for l in 0..=p {
                let m_big = n * (l + 1) - power;
                let sign = if l % 2 == 0 { -1.0 } else { 1.0 };
                let c = weight * sign / iw.powu(l as u32 + 1) * I.powu(m_big as u32);
                for (idx, (s, vals)) in times.iter().enumerate() {
                    if skip_start && l == 0 && idx == 0 && *tau == 0.0 {
                        continue;
                    }
                    if vals[l] != 0.0 {
                        let v = self.special(sel, m_big as i32 - 1 + dm, C64::new(x, 0.0), tp - s, acc)?;
                        acc.value += c * vals[l] * v;
                    }
                }
            }
            let m_big = n * (p + 1) - power;
            let sign = if p % 2 == 0 { -1.0 } else { 1.0 };
            let c = weight * sign / iw.powu(p as u32 + 1) * I.powu(m_big as u32);
            let rem = h.derivative(p + 1)?;
            for piece in rem.pieces() {
                if piece.is_zero() || piece.a >= tp {
                    continue;
                }
                let hi = piece.b.min(tp);
                let mut failure = None;
                let f = |s: f64| {
                    let fs = match piece.value(s, 0) {
                        Ok(v) => v,
                        Err(e) => {
                            failure.get_or_insert(e);
                            return ZERO;
                        }
                    };
                    let mut a = Acc::new();
                    match self.special(sel, m_big as i32 - 1 + dm, C64::new(x, 0.0), tp - s, &mut a) {
                        Ok(v) => v * fs,
                        Err(e) => {
                            failure.get_or_insert(e);
                            ZERO
                        }
                    }
                };
                let f = std::cell::RefCell::new(f);
                let (v, e) = gauss_kronrod(&|s: f64| (f.borrow_mut())(s), piece.a, hi, self.settings.tol * 0.1, self.settings.tol * 1e-2);
                if let Some(e) = failure {
                    return Err(e);
                }
                acc.tally.quadrature = true;
                acc.value += c * v;
                acc.err += c.norm() * e;
            }
        }
        Ok(())
    }
}

/// Solution of iq_t = q_xx on the half line through the closed form.
pub fn solve_ls(spec: &IbvpSpec, x: f64, t: f64, s: &QuadSettings) -> Result<C64> {
    SolutionEvaluator::new(spec.clone(), Method::ClosedFormLs, *s, 1)?.value(x, t)
}

pub fn solve_airy1(spec: &IbvpSpec, x: f64, t: f64, s: &QuadSettings) -> Result<C64> {
    SolutionEvaluator::new(spec.clone(), Method::ClosedFormAiry1, *s, 1)?.value(x, t)
}

pub fn solve_airy2(spec: &IbvpSpec, x: f64, t: f64, s: &QuadSettings) -> Result<C64> {
    SolutionEvaluator::new(spec.clone(), Method::ClosedFormAiry2, *s, 1)?.value(x, t)
}

pub fn solve_general_monomial(spec: &IbvpSpec, x: f64, t: f64, s: &QuadSettings) -> Result<C64> {
    SolutionEvaluator::new(spec.clone(), Method::GeneralMonomial, *s, 1)?.value(x, t)
}

/// Parameters of the discontinuous-data problem for ω = k³: q_o = χ_{(x₁,x₂)},
/// g_0 = C₁ on [0, t₁) and 0 after, g_1 ≡ C₂.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiscData {
    pub x1: f64,
    pub x2: f64,
    pub t1: f64,
    pub c1: f64,
    pub c2: f64,
}

impl Default for DiscData {
    fn default() -> Self {
        DiscData { x1: 1.0, x2: 2.0, t1: 0.25, c1: 1.0, c2: -1.0 }
    }
}

impl DiscData {
    pub fn spec(&self, horizon: f64) -> Result<IbvpSpec> {
        use crate::piecewise::Piece;
        if !(0.0 < self.x1 && self.x1 <= self.x2) || !(0.0 < self.t1 && self.t1 < horizon) {
            return Err(UtmError::Contract("need 0 < x₁ ≤ x₂ and 0 < t₁ < T".into()));
        }
        let mut pieces = vec![Piece::poly(0.0, self.x1, vec![0.0])];
        if self.x2 > self.x1 {
            pieces.push(Piece::poly(self.x1, self.x2, vec![1.0]));
        }
        pieces.push(Piece::poly(self.x2, f64::INFINITY, vec![0.0]));
        let q0 = PiecewiseData::new(pieces, f64::INFINITY)?;
        let g0 = PiecewiseData::new(
            vec![Piece::poly(0.0, self.t1, vec![self.c1]), Piece::poly(self.t1, horizon, vec![0.0])],
            horizon,
        )?;
        let g1 = PiecewiseData::constant(self.c2, horizon);
        IbvpSpec::new(Dispersion::airy2(), q0, vec![g0, g1], horizon)
    }
}

/// The explicit sixteen-term special-function formula for [`DiscData`].
pub fn disc_data_airy2(x: f64, t: f64, d: &DiscData, s: &QuadSettings) -> Result<C64> {
    if !(0.0 < d.x1 && d.x1 <= d.x2) || !(d.t1 > 0.0) {
        return Err(UtmError::Contract("need 0 < x₁ ≤ x₂ and t₁ > 0".into()));
    }
    let disp = Dispersion::airy2();
    let a = C64::from_polar(1.0, 2.0 * std::f64::consts::PI / 3.0);
    let a2 = a * a;
    let one = C64::new(1.0, 0.0);
    let ev = |m: i32, j: usize, xi: C64, tt: f64| -> Result<C64> {
        if tt <= 0.0 {
            return Ok(ZERO);
        }
        Ok(special_eval(&SpecialKey::component(&disp, m, j)?, xi, tt, s)?.value)
    };
    let xr = C64::new(x, 0.0);
    let mut q = ZERO;
    for (xm, w) in [(d.x1, 1.0), (d.x2, -1.0)] {
        let xm = C64::new(xm, 0.0);
        // I_{ω,0,1} + I_{ω,0,2} at a common argument is the sum contour
        let pair = special_eval(&SpecialKey::sum(&disp, 0)?, xr - xm, t, s)?.value;
        q += w * (pair - a2 * ev(0, 1, xr - xm * a, t)? - a * ev(0, 0, xr - xm * a2, t)?);
    }
    q += d.c1 * ((a2 - one) * ev(0, 1, xr, t)? + (a - one) * ev(0, 0, xr, t)?);
    q -= d.c1 * ((a2 - one) * ev(0, 1, xr, t - d.t1)? + (a - one) * ev(0, 0, xr, t - d.t1)?);
    q += d.c2 * ((a2 - one) * ev(1, 0, xr, t)? + (a - one) * ev(1, 1, xr, t)?);
    Ok(q)
}

/// Evaluates all (x, t) pairs; per-sample failures are recorded, not fatal.
pub fn evaluate_grid(ev: &SolutionEvaluator, xs: &[f64], ts: &[f64]) -> Vec<FieldSample> {
    let pairs: Vec<(f64, f64)> = ts.iter().flat_map(|&t| xs.iter().map(move |&x| (x, t))).collect();
    pairs
        .par_iter()
        .map(|&(x, t)| match ev.sample(x, t) {
            Ok(s) => s,
            Err(e) => FieldSample { x, t, value: C64::new(f64::NAN, f64::NAN), err: f64::NAN, regime: "failed".into(), error: Some(e.to_string()) },
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::piecewise::Piece;

    fn settings() -> QuadSettings {
        QuadSettings::default()
    }

    fn zero_ic_spec(disp: Dispersion, boundary: Vec<PiecewiseData>, horizon: f64) -> IbvpSpec {
        IbvpSpec::new(disp, PiecewiseData::zero(f64::INFINITY), boundary, horizon).unwrap()
    }

    #[test]
    fn elimination_reproduces_closed_forms() {
        for (m, d) in [
            (Method::ClosedFormLs, Dispersion::schrodinger()),
            (Method::ClosedFormAiry1, Dispersion::airy1()),
            (Method::ClosedFormAiry2, Dispersion::airy2()),
        ] {
            let closed: Vec<Channel<C64>> = closed_form_channels(m).unwrap().iter().map(Channel::to_complex).collect();
            let general = eliminate_channels(&d).unwrap();
            assert_eq!(closed.len(), general.len(), "{m:?}");
            for c in &closed {
                assert!(general.iter().any(|g| channels_close(c, g)), "{m:?}: {c:?} missing from {general:?}");
            }
        }
    }

    #[test]
    fn elimination_symmetry_count() {
        for n in 2..=6 {
            for s in [1.0, -1.0] {
                let d = Dispersion::monomial(s, n).unwrap();
                let t = eliminate_channels(&d).unwrap();
                let inits = t.iter().filter(|c| matches!(c.kind, ChannelKind::Initial { .. })).count();
                let comps = asymptotic_sectors(&d).sectors.len();
                assert_eq!(inits, 1 + comps * (n - d.num_boundary_conditions()));
            }
        }
    }

    #[test]
    fn zero_data_gives_zero() {
        for d in [Dispersion::schrodinger(), Dispersion::airy1(), Dispersion::airy2()] {
            let nb = d.num_boundary_conditions();
            let spec = zero_ic_spec(d, vec![PiecewiseData::zero(1.0); nb], 1.0);
            let ev = SolutionEvaluator::auto(spec, settings()).unwrap();
            assert_eq!(ev.value(0.7, 0.3).unwrap(), ZERO);
        }
    }

    #[test]
    fn rejects_wall_and_mismatch() {
        let spec = zero_ic_spec(Dispersion::schrodinger(), vec![PiecewiseData::constant(1.0, 1.0)], 1.0);
        let ev = SolutionEvaluator::auto(spec.clone(), settings()).unwrap();
        assert!(ev.value(0.0, 0.5).is_err());
        assert!(ev.value(0.5, 0.0).is_err());
        assert!(ev.value(0.5, 1.5).is_err());
        assert!(SolutionEvaluator::new(spec, Method::ClosedFormAiry2, settings(), 1).is_err());
    }

    #[test]
    fn ls_boundary_limit_constant_data() {
        let spec = zero_ic_spec(Dispersion::schrodinger(), vec![PiecewiseData::constant(1.0, 1.0)], 1.0);
        let ev = SolutionEvaluator::auto(spec, settings()).unwrap();
        for t in [0.5, 1.0] {
            let v = ev.value(1e-9, t).unwrap();
            assert!((v - 1.0).norm() < 1e-6, "{t}: {v}");
        }
    }

    #[test]
    fn airy_boundary_limits_constant_data() {
        let spec = zero_ic_spec(Dispersion::airy1(), vec![PiecewiseData::constant(1.0, 1.0)], 1.0);
        let ev = SolutionEvaluator::auto(spec, settings()).unwrap();
        let v = ev.value(1e-9, 0.5).unwrap();
        assert!((v - 1.0).norm() < 1e-6, "{v}");
        let spec = zero_ic_spec(Dispersion::airy2(), vec![PiecewiseData::constant(1.0, 1.0), PiecewiseData::zero(1.0)], 1.0);
        let ev = SolutionEvaluator::auto(spec, settings()).unwrap();
        let v = ev.value(1e-9, 0.5).unwrap();
        assert!((v - 1.0).norm() < 1e-5, "{v}");
        let h = 1e-4;
        let dv = (ev.value(2.0 * h, 0.5).unwrap() - ev.value(h, 0.5).unwrap()) / h;
        assert!(dv.norm() < 1e-2, "{dv}");
    }

    #[test]
    fn airy1_initial_recovery() {
        let spec = IbvpSpec::new(
            Dispersion::airy1(),
            PiecewiseData::indicator(1.0, 2.0).unwrap(),
            vec![PiecewiseData::zero(1.0)],
            1.0,
        )
        .unwrap();
        let ev = SolutionEvaluator::auto(spec, settings()).unwrap();
        for (s, want) in [(0.5, 0.0), (1.5, 1.0), (3.0, 0.0)] {
            let v = ev.value(s, 1e-4).unwrap();
            assert!((v - want).norm() < 0.05, "{s}: {v}");
        }
    }

    #[test]
    fn disc_data_formula_matches_solver() {
        let d = DiscData::default();
        let spec = d.spec(1.0).unwrap();
        let ev = SolutionEvaluator::auto(spec, settings()).unwrap();
        for (x, t) in [(0.5, 0.1), (1.5, 0.3), (3.0, 0.6), (0.2, 0.9)] {
            let a = ev.value(x, t).unwrap();
            let b = disc_data_airy2(x, t, &d, &settings()).unwrap();
            assert!((a - b).norm() < 1e-8, "({x},{t}): {a} vs {b}");
        }
    }

    #[test]
    fn disc_data_trivial_cancellation() {
        let d = DiscData { x1: 1.0, x2: 1.0, t1: 0.5, c1: 0.0, c2: 0.0 };
        let v = disc_data_airy2(0.8, 0.3, &d, &settings()).unwrap();
        assert!(v.norm() < 1e-14);
    }

    #[test]
    fn grid_matches_single_calls() {
        let spec = DiscData::default().spec(1.0).unwrap();
        let ev = SolutionEvaluator::auto(spec, settings()).unwrap();
        let g = evaluate_grid(&ev, &[0.5], &[0.2]);
        assert_eq!(g[0].value, ev.value(0.5, 0.2).unwrap());
        let a = evaluate_grid(&ev, &[0.3, 1.1, 2.5], &[0.1, 0.4]);
        let b = evaluate_grid(&ev, &[2.5, 0.3, 1.1], &[0.4, 0.1]);
        for s in &a {
            let m = b.iter().find(|r| r.x == s.x && r.t == s.t).unwrap();
            assert_eq!(m.value, s.value);
        }
    }

    #[test]
    fn superposition_over_boundary_pieces() {
        let g = PiecewiseData::new(vec![Piece::poly(0.0, 0.3, vec![1.0, 2.0]), Piece::poly(0.3, 1.0, vec![-0.5])], 1.0).unwrap();
        let spec = zero_ic_spec(Dispersion::schrodinger(), vec![g.clone()], 1.0);
        let whole = SolutionEvaluator::auto(spec, settings()).unwrap();
        let parts = crate::piecewise::split_boundary_at_jumps(&g).unwrap();
        for (x, t) in [(0.4, 0.5), (1.2, 0.8)] {
            let mut sum = ZERO;
            for p in &parts {
                let spec = zero_ic_spec(Dispersion::schrodinger(), vec![p.clone()], 1.0);
                sum += SolutionEvaluator::auto(spec, settings()).unwrap().value(x, t).unwrap();
            }
            assert!((sum - whole.value(x, t).unwrap()).norm() < 1e-8);
        }
    }
}
