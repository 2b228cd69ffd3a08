//! JSON scenario configuration. Unknown keys are errors and every error
//! carries the line and column where parsing stopped.

use serde::{Deserialize, Serialize};

use crate::dispersion::Dispersion;
use crate::error::{Result, UtmError};
use crate::piecewise::{IbvpSpec, Piece, PiecewiseData};
use crate::quadrature::QuadSettings;
use crate::solver::Method;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PieceKind {
    /// Σ c_j (y − a)^j
    Poly,
    /// Σ c_j (y − a)^j e^{−rate (y − a)}
    PolyExp,
    /// Σ c_j (y − center)^j e^{−rate (y − center)²}
    Gaussian,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawPiece {
    pub from: f64,
    /// Absent or null: the end of the data domain.
    #[serde(default)]
    pub to: Option<f64>,
    pub kind: PieceKind,
    pub coeffs: Vec<f64>,
    #[serde(default)]
    pub rate: f64,
    #[serde(default)]
    pub center: f64,
}

/// A piece whose fields passed the local checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPiece", into = "RawPiece")]
pub struct PieceSpec(pub RawPiece);

impl TryFrom<RawPiece> for PieceSpec {
    type Error = String;
    fn try_from(p: RawPiece) -> std::result::Result<Self, String> {
        if !p.from.is_finite() || p.from < 0.0 {
            return Err(format!("piece start {} must be finite and ≥ 0", p.from));
        }
        if let Some(to) = p.to {
            if !(to > p.from) {
                return Err(format!("piece [{}, {to}) is empty", p.from));
            }
        }
        if p.coeffs.is_empty() || p.coeffs.iter().any(|c| !c.is_finite()) {
            return Err("coeffs must be a non-empty list of finite numbers".into());
        }
        if p.coeffs.len() > 32 {
            return Err("at most 32 coefficients per piece".into());
        }
        if !p.rate.is_finite() || !p.center.is_finite() {
            return Err("rate and center must be finite".into());
        }
        match p.kind {
            PieceKind::Poly if p.rate != 0.0 => return Err("a poly piece takes no rate".into()),
            PieceKind::Gaussian if !(p.rate > 0.0) => return Err("a gaussian piece needs rate > 0".into()),
            _ => {}
        }
        Ok(PieceSpec(p))
    }
}

impl From<PieceSpec> for RawPiece {
    fn from(p: PieceSpec) -> RawPiece {
        p.0
    }
}

impl PieceSpec {
    fn build(&self, end: f64) -> Piece {
        let p = &self.0;
        let b = p.to.unwrap_or(end);
        match p.kind {
            PieceKind::Poly => Piece::poly(p.from, b, p.coeffs.clone()),
            PieceKind::PolyExp => Piece::poly_exp(p.from, b, p.coeffs.clone(), p.rate),
            PieceKind::Gaussian => Piece::gaussian(p.from, b, p.coeffs.clone(), p.center, p.rate),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Spacing {
    #[default]
    Linear,
    Log,
}

/// Explicit values, or `count` points from `min` to `max`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub count: Option<usize>,
    #[serde(default)]
    pub spacing: Spacing,
}

const MAX_AXIS: usize = 100_000;

impl Axis {
    pub fn points(&self) -> std::result::Result<Vec<f64>, String> {
        if let Some(v) = &self.values {
            if self.min.is_some() || self.max.is_some() || self.count.is_some() {
                return Err("give either values or min/max/count".into());
            }
            if v.is_empty() || v.len() > MAX_AXIS || v.iter().any(|x| !x.is_finite()) {
                return Err("values must be 1 to 100000 finite numbers".into());
            }
            let mut v = v.clone();
            v.sort_by(f64::total_cmp);
            v.dedup();
            return Ok(v);
        }
        let (Some(lo), Some(hi), Some(n)) = (self.min, self.max, self.count) else {
            return Err("axis needs values or all of min, max, count".into());
        };
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) || n == 0 || n > MAX_AXIS {
            return Err(format!("bad axis range [{lo}, {hi}] with {n} points"));
        }
        if n == 1 {
            return Ok(vec![lo]);
        }
        let mut out: Vec<f64> = match self.spacing {
            Spacing::Linear => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
            Spacing::Log => {
                if !(lo > 0.0) {
                    return Err("log spacing needs min > 0".into());
                }
                let (a, b) = (lo.ln(), hi.ln());
                (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect()
            }
        };
        out[0] = lo;
        out[n - 1] = hi;
        out.dedup();
        Ok(out)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub x: Axis,
    pub t: Axis,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MethodChoice {
    #[default]
    Auto,
    ClosedFormLs,
    ClosedFormAiry1,
    ClosedFormAiry2,
    GeneralMonomial,
    DirectOracle,
}

impl MethodChoice {
    pub fn resolve(&self, disp: &Dispersion) -> Method {
        match self {
            MethodChoice::Auto => Method::auto(disp),
            MethodChoice::ClosedFormLs => Method::ClosedFormLs,
            MethodChoice::ClosedFormAiry1 => Method::ClosedFormAiry1,
            MethodChoice::ClosedFormAiry2 => Method::ClosedFormAiry2,
            MethodChoice::GeneralMonomial => Method::GeneralMonomial,
            MethodChoice::DirectOracle => Method::DirectOracle,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Outputs {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub svg: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<String>,
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    /// ω_1, …, ω_n: the coefficient of k^j is entry j − 1.
    pub dispersion: Vec<f64>,
    pub initial: Vec<PieceSpec>,
    pub boundary: Vec<Vec<PieceSpec>>,
    pub horizon: f64,
    pub grid: Grid,
    #[serde(default)]
    pub method: MethodChoice,
    #[serde(default = "one")]
    pub depth: usize,
    #[serde(default)]
    pub quadrature: QuadSettings,
    #[serde(default)]
    pub outputs: Outputs,
}

/// A configuration checked against the problem invariants.
#[derive(Debug, Clone)]
pub struct ResolvedConfig {
    pub config: ScenarioConfig,
    pub spec: IbvpSpec,
    pub method: Method,
    pub xs: Vec<f64>,
    pub ts: Vec<f64>,
}

#[derive(Deserialize)]
#[serde(try_from = "ScenarioConfig")]
struct Checked(Box<ResolvedConfig>);

fn pieces(list: &[PieceSpec], end: f64, what: &str) -> Result<PiecewiseData> {
    if list.is_empty() {
        return Err(UtmError::Contract(format!("{what} has no pieces")));
    }
    let built: Vec<Piece> = list.iter().map(|p| p.build(end)).collect();
    PiecewiseData::new(built, end).map_err(|e| UtmError::Contract(format!("{what}: {e}")))
}

impl ScenarioConfig {
    pub fn resolve(&self) -> Result<ResolvedConfig> {
        let disp = Dispersion::new(self.dispersion.clone())?;
        if !(self.horizon > 0.0) || !self.horizon.is_finite() {
            return Err(UtmError::Contract(format!("horizon T = {} must be positive and finite", self.horizon)));
        }
        let n_bc = disp.num_boundary_conditions();
        if self.boundary.len() != n_bc {
            return Err(UtmError::Contract(format!("ω needs {n_bc} boundary data, config gives {}", self.boundary.len())));
        }
        let initial = pieces(&self.initial, f64::INFINITY, "initial")?;
        let boundary = self
            .boundary
            .iter()
            .enumerate()
            .map(|(j, g)| pieces(g, self.horizon, &format!("boundary[{j}]")))
            .collect::<Result<Vec<_>>>()?;
        let spec = IbvpSpec::new(disp, initial, boundary, self.horizon)?;
        self.quadrature.validate()?;
        if self.depth == 0 || self.depth > 12 {
            return Err(UtmError::Contract("depth must lie in 1..=12".into()));
        }
        let xs = self.grid.x.points().map_err(|e| UtmError::Contract(format!("grid.x: {e}")))?;
        let ts = self.grid.t.points().map_err(|e| UtmError::Contract(format!("grid.t: {e}")))?;
        if xs.len().saturating_mul(ts.len()) > 1_000_000 {
            return Err(UtmError::Contract("grid has more than 10⁶ points".into()));
        }
        if xs.iter().any(|&x| !(x > 0.0)) {
            return Err(UtmError::Contract("grid.x values must be > 0".into()));
        }
        if ts.iter().any(|&t| !(t > 0.0 && t <= self.horizon)) {
            return Err(UtmError::Contract(format!("grid.t values must lie in (0, {}]", self.horizon)));
        }
        let method = self.method.resolve(&spec.dispersion);
        Ok(ResolvedConfig { config: self.clone(), spec, method, xs, ts })
    }
}

impl TryFrom<ScenarioConfig> for Checked {
    type Error = String;
    fn try_from(c: ScenarioConfig) -> std::result::Result<Self, String> {
        c.resolve().map(|r| Checked(Box::new(r))).map_err(|e| e.to_string())
    }
}

/// Parses and validates a configuration.
pub fn parse_config(src: &str) -> Result<ResolvedConfig> {
    serde_json::from_str::<Checked>(src)
        .map(|c| *c.0)
        .map_err(|e| UtmError::Config { line: e.line(), column: e.column(), msg: strip_position(&e.to_string()) })
}

fn strip_position(msg: &str) -> String {
    match msg.rfind(" at line ") {
        Some(i) => msg[..i].to_string(),
        None => msg.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const GOOD: &str = r#"{
  "dispersion": [0, 1],
  "initial": [{"from": 0, "kind": "poly-exp", "coeffs": [0, 1], "rate": 1}],
  "boundary": [[{"from": 0, "kind": "poly", "coeffs": [0]}]],
  "horizon": 1,
  "grid": {"x": {"min": 0.5, "max": 2, "count": 4}, "t": {"values": [0.5, 0.1]}}
}"#;

    #[test]
    fn parses_and_resolves() {
        let r = parse_config(GOOD).unwrap();
        assert_eq!(r.method, Method::ClosedFormLs);
        assert_eq!(r.xs, vec![0.5, 1.0, 1.5, 2.0]);
        assert_eq!(r.ts, vec![0.1, 0.5]);
        let back = serde_json::to_string(&r.config).unwrap();
        assert_eq!(parse_config(&back).unwrap().config, r.config);
    }

    #[test]
    fn unknown_key_has_position() {
        let bad = GOOD.replace("\"horizon\": 1", "\"horizon\": 1, \"colour\": 3");
        match parse_config(&bad) {
            Err(UtmError::Config { line, .. }) => assert_eq!(line, 5),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn rejects_invariant_violations() {
        for (from, to) in [
            ("\"horizon\": 1", "\"horizon\": 0"),
            ("\"dispersion\": [0, 1]", "\"dispersion\": [0, 0, 1]"),
            ("\"rate\": 1}", "\"rate\": 0}"),
            ("\"count\": 4", "\"count\": 0"),
        ] {
            let bad = GOOD.replace(from, to);
            assert!(matches!(parse_config(&bad), Err(UtmError::Config { .. })), "{to}");
        }
    }
}
