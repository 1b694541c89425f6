//! Scenario files: a JSON description of a line, an integrand, an
//! integrator, and engine settings.
//!
//! The format is documented in the repository README. Parsing is strict
//! (unknown fields are rejected) so that `parse(serialize(s)) == s` holds
//! for every scenario this module can represent.

use ksline::{
    builtins, EngineConfig, HakeConfig, Integrand, Integrator, IntervalSpec, KsError, Line,
    PointKey, Side,
};
use serde::{Deserialize, Serialize};

use crate::expr;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase", deny_unknown_fields)]
pub enum LineSpec {
    Finite { n: u32 },
    Real { lo: f64, hi: f64 },
    Ordinal { limits: u32, tail: u32 },
    Split { lo: f64, hi: f64, splits: Vec<f64> },
}

/// A point, written relative to the scenario's line family: a bare number
/// is a coordinate (real/split whole points, or a finite index), split
/// halves and ordinals use the object forms.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PointSpec {
    Coord(f64),
    SplitHalf { x: f64, side: String },
    Ordinal { q: u32, r: u32 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PieceSpec {
    /// Coordinate interval [from, to); the last piece also covers `to`.
    pub from: f64,
    pub to: f64,
    pub expr: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum IntegrandSpec {
    /// A builtin name or an expression in `x`.
    Text(String),
    Piecewise { piecewise: Vec<PieceSpec> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JumpSpec {
    pub at: PointSpec,
    pub jump: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepSpec {
    /// G(0_K), which is also the measure of the atom at the minimum.
    pub initial: f64,
    pub jumps: Vec<JumpSpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum IntegratorSpec {
    /// A builtin name, or `"variation_of <builtin>"` for its variation
    /// function.
    Text(String),
    /// A continuously differentiable integrator given by its formula and
    /// declared derivative (used for gauge hinting and variation).
    Smooth { expression: String, derivative: String },
    Step { step: StepSpec },
    /// Difference of two monotone integrators.
    Difference { difference: [Box<IntegratorSpec>; 2] },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct EngineSpec {
    pub tol: Option<f64>,
    pub max_level: Option<u32>,
    pub singular_points: Option<Vec<PointSpec>>,
    pub divergence_bound: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntervalSpecJson {
    pub left: PointSpec,
    #[serde(default)]
    pub left_closed: bool,
    pub right: PointSpec,
    #[serde(default = "default_true")]
    pub right_closed: bool,
}

fn default_true() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub line: LineSpec,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub integrand: Option<IntegrandSpec>,
    pub integrator: IntegratorSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub engine: Option<EngineSpec>,
    /// Intervals for the `measure` command.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub intervals: Option<Vec<IntervalSpecJson>>,
    /// Target uniform error for the `approx` command.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    /// Approach-ladder depth for the `hake` command.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_approach: Option<u32>,
    /// Agreement tolerance across Hake approach points.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stabilization_tol: Option<f64>,
}

/// Parse and semantically validate a scenario file.
pub fn parse_scenario(text: &str) -> Result<Scenario, String> {
    let s: Scenario = serde_json::from_str(text)
        .map_err(|e| format!("scenario syntax error at line {}, column {}: {e}", e.line(), e.column()))?;
    // Force full semantic validation now so callers get field-level errors
    // before running anything.
    s.build()?;
    Ok(s)
}

/// Everything a command needs, resolved against the concrete line.
pub struct Built {
    pub line: Line,
    pub integrand: Integrand,
    pub integrator: Integrator,
    pub engine: EngineConfig,
    pub intervals: Vec<IntervalSpec>,
    pub epsilon: Option<f64>,
    pub hake: HakeConfig,
}

impl Scenario {
    pub fn build(&self) -> Result<Built, String> {
        let line = self.build_line()?;
        let engine = self.build_engine(&line)?;
        let integrator = build_integrator(&line, &self.integrator, &engine)
            .map_err(|e| format!("integrator: {e}"))?;
        let integrand = match &self.integrand {
            None => Integrand::constant(1.0),
            Some(spec) => build_integrand(&line, spec).map_err(|e| format!("integrand: {e}"))?,
        };
        let mut intervals = Vec::new();
        for (k, i) in self.intervals.iter().flatten().enumerate() {
            let left = point(&line, &i.left).map_err(|e| format!("intervals[{k}].left: {e}"))?;
            let right = point(&line, &i.right).map_err(|e| format!("intervals[{k}].right: {e}"))?;
            intervals.push(
                line.interval(left, i.left_closed, right, i.right_closed)
                    .map_err(|e| format!("intervals[{k}]: {e}"))?,
            );
        }
        let mut hake = HakeConfig { engine: engine.clone(), ..HakeConfig::default() };
        if let Some(m) = self.max_approach {
            hake.max_approach = m;
        }
        hake.stabilization_tol = self.stabilization_tol;
        Ok(Built {
            line,
            integrand,
            integrator,
            engine,
            intervals,
            epsilon: self.epsilon,
            hake,
        })
    }

    fn build_line(&self) -> Result<Line, String> {
        let r = match &self.line {
            LineSpec::Finite { n } => Line::finite(*n),
            LineSpec::Real { lo, hi } => Line::real(*lo, *hi),
            LineSpec::Ordinal { limits, tail } => Line::ordinal(*limits, *tail),
            LineSpec::Split { lo, hi, splits } => Line::split(*lo, *hi, splits.clone()),
        };
        r.map_err(|e| format!("line: {e}"))
    }

    fn build_engine(&self, line: &Line) -> Result<EngineConfig, String> {
        let mut cfg = EngineConfig::default();
        if let Some(e) = &self.engine {
            if let Some(t) = e.tol {
                if !(t > 0.0) {
                    return Err("engine.tol: must be positive".into());
                }
                cfg.tol = t;
            }
            if let Some(m) = e.max_level {
                cfg.max_level = m;
            }
            if let Some(b) = e.divergence_bound {
                cfg.divergence_bound = b;
            }
            for (k, p) in e.singular_points.iter().flatten().enumerate() {
                cfg.singular_points
                    .push(point(line, p).map_err(|e| format!("engine.singular_points[{k}]: {e}"))?);
            }
        }
        Ok(cfg)
    }
}

/// Resolve a point spec against a line, checking membership.
pub fn point(line: &Line, p: &PointSpec) -> Result<PointKey, String> {
    let key = match (line, p) {
        (Line::Finite { .. }, PointSpec::Coord(c)) => {
            if c.fract() != 0.0 || *c < 0.0 {
                return Err(format!("finite-line point must be a nonnegative integer index, got {c}"));
            }
            PointKey::Finite(*c as u32)
        }
        (Line::Real { .. }, PointSpec::Coord(c)) => PointKey::Real(*c),
        (Line::Split { .. }, PointSpec::Coord(c)) => PointKey::Split { x: *c, side: Side::Whole },
        (Line::Split { .. }, PointSpec::SplitHalf { x, side }) => {
            let side = match side.as_str() {
                "minus" => Side::Minus,
                "plus" => Side::Plus,
                "whole" => Side::Whole,
                other => return Err(format!("side must be minus/plus/whole, got '{other}'")),
            };
            PointKey::Split { x: *x, side }
        }
        (Line::Ordinal { .. }, PointSpec::Ordinal { q, r }) => PointKey::Ordinal { q: *q, r: *r },
        _ => return Err("point form does not match the line family".into()),
    };
    line.check_member(&key).map_err(|e| e.to_string())?;
    Ok(key)
}

fn build_integrand(line: &Line, spec: &IntegrandSpec) -> Result<Integrand, KsError> {
    match spec {
        IntegrandSpec::Text(name) if builtins::BUILTIN_NAMES.contains(&name.as_str()) => {
            builtins::integrand(line, name)
        }
        IntegrandSpec::Text(text) => {
            let e = expr::parse(text).map_err(|e| KsError::Usage(e.to_string()))?;
            // A conservative bound from a coordinate scan, for engine
            // bookkeeping only (Riemann sums evaluate the expression itself).
            let bound = coord_scan_bound(line, |c| e.eval(c));
            Ok(Integrand::from_coord(text.clone(), move |c| e.eval(c)).with_bound(bound))
        }
        IntegrandSpec::Piecewise { piecewise } => {
            let lo = line.coord(&line.min_point());
            let hi = line.coord(&line.max_point());
            if piecewise.is_empty() {
                return Err(KsError::Usage("piecewise table is empty".into()));
            }
            let mut pieces = Vec::new();
            let mut cursor = lo;
            for p in piecewise {
                if p.from != cursor || !(p.to > p.from) {
                    return Err(KsError::Usage(format!(
                        "piecewise pieces must abut and cover [{lo}, {hi}]; got piece [{}, {})",
                        p.from, p.to
                    )));
                }
                cursor = p.to;
                let e = expr::parse(&p.expr).map_err(|e| KsError::Usage(e.to_string()))?;
                pieces.push((p.from, p.to, e));
            }
            if cursor != hi {
                return Err(KsError::Usage(format!(
                    "piecewise pieces stop at {cursor}, must reach {hi}"
                )));
            }
            let bound = pieces
                .iter()
                .map(|(a, b, e)| coord_scan_bound_on(*a, *b, |c| e.eval(c)))
                .fold(0.0f64, f64::max);
            Ok(Integrand::from_coord("piecewise", move |c| {
                for (_, b, e) in &pieces[..pieces.len() - 1] {
                    if c < *b {
                        return e.eval(c);
                    }
                }
                pieces.last().unwrap().2.eval(c)
            })
            .with_bound(bound))
        }
    }
}

fn build_integrator(
    line: &Line,
    spec: &IntegratorSpec,
    engine: &EngineConfig,
) -> Result<Integrator, KsError> {
    match spec {
        IntegratorSpec::Text(name) => {
            if let Some(inner) = name.strip_prefix("variation_of ") {
                let g = build_integrator(line, &IntegratorSpec::Text(inner.trim().into()), engine)?;
                return g.variation_function(line, engine.tol.min(1e-8));
            }
            builtins::integrator(line, name)
        }
        IntegratorSpec::Smooth { expression, derivative } => {
            let f = expr::parse(expression).map_err(|e| KsError::Usage(e.to_string()))?;
            let df = expr::parse(derivative).map_err(|e| KsError::Usage(e.to_string()))?;
            Ok(Integrator::smooth(expression.clone(), move |c| f.eval(c), move |c| df.eval(c)))
        }
        IntegratorSpec::Step { step } => {
            let mut jumps = Vec::new();
            for j in &step.jumps {
                let at = point(line, &j.at).map_err(KsError::Usage)?;
                jumps.push((at, j.jump));
            }
            Integrator::step(line, step.initial, jumps)
        }
        IntegratorSpec::Difference { difference } => {
            let plus = build_integrator(line, &difference[0], engine)?;
            let minus = build_integrator(line, &difference[1], engine)?;
            Integrator::difference(plus, minus)
        }
    }
}

fn coord_scan_bound(line: &Line, f: impl Fn(f64) -> f64) -> f64 {
    let lo = line.coord(&line.min_point());
    let hi = line.coord(&line.max_point());
    coord_scan_bound_on(lo, hi, f)
}

fn coord_scan_bound_on(lo: f64, hi: f64, f: impl Fn(f64) -> f64) -> f64 {
    let mut m = 0.0f64;
    for i in 0..=256 {
        let c = lo + (hi - lo) * i as f64 / 256.0;
        let v = f(c).abs();
        if v.is_finite() {
            m = m.max(v);
        }
    }
    m * 2.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_scenario_round_trips() {
        let text = r#"{"line":{"family":"real","lo":0,"hi":1},"integrand":"1","integrator":"identity"}"#;
        let s = parse_scenario(text).unwrap();
        let json = serde_json::to_string(&s).unwrap();
        let s2 = parse_scenario(&json).unwrap();
        assert_eq!(s, s2);
    }

    #[test]
    fn unsorted_splits_rejected() {
        let text = r#"{"line":{"family":"split","lo":0,"hi":1,"splits":[0.7,0.3]},"integrator":"identity"}"#;
        let err = parse_scenario(text).unwrap_err();
        assert!(err.contains("sorted"), "{err}");
    }

    #[test]
    fn expression_integrand_builds() {
        let text = r#"{"line":{"family":"real","lo":0,"hi":1},"integrand":"x^2","integrator":"identity"}"#;
        let b = parse_scenario(text).unwrap().build().unwrap();
        assert_eq!(b.integrand.eval(&b.line, &PointKey::Real(0.5)), 0.25);
    }

    #[test]
    fn step_integrator_on_split_line() {
        let text = r#"{
            "line":{"family":"split","lo":0,"hi":1,"splits":[0.5]},
            "integrator":{"step":{"initial":0.0,"jumps":[{"at":{"x":0.5,"side":"minus"},"jump":1.0}]}}
        }"#;
        let b = parse_scenario(text).unwrap().build().unwrap();
        assert_eq!(b.integrator.eval(&b.line, &PointKey::split(0.25, Side::Whole)), 0.0);
        assert_eq!(b.integrator.eval(&b.line, &PointKey::split(0.5, Side::Plus)), 1.0);
    }
}
