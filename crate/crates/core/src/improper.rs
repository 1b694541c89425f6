//! Hake-style improper integration: one-sided limits of restricted
//! integrals with the endpoint-jump corrections, plus the converse
//! identities as residual checks.

use crate::engine::{integrate, integrate_indicator, EngineConfig, IntegralResult, Verdict};
use crate::error::{KsError, Result};
use crate::integrator::{Integrand, Integrator};
use crate::line::{IntervalSpec, Line, PointKey};

#[derive(Clone, Debug)]
pub struct HakeConfig {
    pub engine: EngineConfig,
    /// How many approach-ladder points to walk (left_approach /
    /// right_approach levels 1..=max_approach).
    pub max_approach: u32,
    /// Agreement tolerance across approach points; defaults to the inner
    /// engine tolerance. Keeping it separate matters because each partial
    /// integral carries its own engine error, so demanding the inner
    /// tolerance across partials can never fire.
    pub stabilization_tol: Option<f64>,
}

impl Default for HakeConfig {
    fn default() -> Self {
        HakeConfig { engine: EngineConfig::default(), max_approach: 24, stabilization_tol: None }
    }
}

impl HakeConfig {
    fn stab_tol(&self) -> f64 {
        self.stabilization_tol.unwrap_or(self.engine.tol)
    }
}

#[derive(Clone, Debug)]
pub struct HakeResult {
    /// The stabilized one-sided limit (A forward, B backward), when reached.
    pub limit_value: Option<f64>,
    /// The endpoint correction term.
    pub correction: f64,
    /// limit + correction when converged; absent otherwise.
    pub total: Option<f64>,
    pub approach_points: Vec<(PointKey, f64)>,
    pub verdict: Verdict,
    pub notes: Vec<String>,
}

fn stabilized(partials: &[f64], tol: f64) -> bool {
    let n = partials.len();
    if n < 3 {
        return false;
    }
    let (a, b, c) = (partials[n - 3], partials[n - 2], partials[n - 1]);
    (a - b).abs() < tol && (b - c).abs() < tol && (a - c).abs() < tol
}

fn diverging(partials: &[f64], bound: f64) -> bool {
    let n = partials.len();
    if n < 3 {
        return false;
    }
    let tail = &partials[n - 3..];
    tail.windows(2).all(|w| w[1].abs() > w[0].abs()) && tail.iter().all(|v| v.abs() > bound)
}

/// Forward Hake: A = lim over y climbing to 1_K of int over [0_K, y],
/// total = A + f(1_K)(G(1_K) - L_G(1_K)). Requires 1_K left-dense
/// (otherwise the direct engine already sees the endpoint).
pub fn hake_forward(
    line: &Line,
    f: &Integrand,
    g: &Integrator,
    cfg: &HakeConfig,
) -> Result<HakeResult> {
    let max = line.max_point();
    if !line.is_left_dense(&max)? {
        return Err(KsError::Precondition(
            "1_K is left-isolated; use the direct engine instead of forward Hake".into(),
        ));
    }
    let correction = f.eval(line, &max) * (g.eval(line, &max) - g.left_limit(line, &max)?);
    let mut approach = Vec::new();
    let mut partials = Vec::new();
    let mut note = Vec::new();
    for k in 1..=cfg.max_approach {
        let y = line.left_approach(&max, k)?;
        let i = IntervalSpec::closed(line.min_point(), y);
        let r = integrate_indicator(line, f, g, &i, &cfg.engine)?;
        if r.verdict != Verdict::Converged {
            note.push(format!("partial integral at {y} did not converge"));
        }
        approach.push((y, r.value));
        partials.push(r.value);
        if stabilized(&partials, cfg.stab_tol()) {
            let a = *partials.last().unwrap();
            return Ok(HakeResult {
                limit_value: Some(a),
                correction,
                total: Some(a + correction),
                approach_points: approach,
                verdict: Verdict::Converged,
                notes: note,
            });
        }
    }
    let verdict = if diverging(&partials, cfg.engine.divergence_bound) {
        Verdict::Diverging
    } else {
        Verdict::Nonconverged
    };
    Ok(HakeResult {
        limit_value: None,
        correction,
        total: None,
        approach_points: approach,
        verdict,
        notes: note,
    })
}

/// Backward Hake: B = lim over y descending to 0_K of int over (y, 1_K],
/// total = B + f(0_K)G(0_K). Requires 0_K right-dense.
///
/// The sign of the correction is "+": the trivial case f = 1 gives
/// B = G(1_K) - G(0_K) by right continuity, and only B + f(0_K)G(0_K)
/// recovers int 1 dG = G(1_K). This choice is recorded in the notes of
/// every backward result.
pub fn hake_backward(
    line: &Line,
    f: &Integrand,
    g: &Integrator,
    cfg: &HakeConfig,
) -> Result<HakeResult> {
    let min = line.min_point();
    if !line.is_right_dense(&min)? {
        return Err(KsError::Precondition(
            "0_K is right-isolated; use the direct engine instead of backward Hake".into(),
        ));
    }
    let correction = f.eval(line, &min) * g.eval(line, &min);
    let mut notes =
        vec!["backward correction sign convention: total = B + f(0_K)G(0_K)".to_string()];
    let mut approach = Vec::new();
    let mut partials = Vec::new();
    for k in 1..=cfg.max_approach {
        let y = line.right_approach(&min, k)?;
        let i = IntervalSpec::half_open(y, line.max_point());
        let r = integrate_indicator(line, f, g, &i, &cfg.engine)?;
        if r.verdict != Verdict::Converged {
            notes.push(format!("partial integral at {y} did not converge"));
        }
        approach.push((y, r.value));
        partials.push(r.value);
        if stabilized(&partials, cfg.stab_tol()) {
            let b = *partials.last().unwrap();
            return Ok(HakeResult {
                limit_value: Some(b),
                correction,
                total: Some(b + correction),
                approach_points: approach,
                verdict: Verdict::Converged,
                notes,
            });
        }
    }
    let verdict = if diverging(&partials, cfg.engine.divergence_bound) {
        Verdict::Diverging
    } else {
        Verdict::Nonconverged
    };
    Ok(HakeResult {
        limit_value: None,
        correction,
        total: None,
        approach_points: approach,
        verdict,
        notes,
    })
}

#[derive(Clone, Debug)]
pub struct ConverseReport {
    pub direct: IntegralResult,
    /// |A - (direct - f(1_K)(G(1_K) - L_G(1_K)))| when 1_K is left-dense.
    pub forward_residual: Option<f64>,
    /// |B - (direct - f(0_K)G(0_K))| when 0_K is right-dense.
    pub backward_residual: Option<f64>,
}

/// Converse-Hake round trip: the directly computed integral must agree
/// with both one-sided limits after removing the endpoint terms.
pub fn hake_converse_check(
    line: &Line,
    f: &Integrand,
    g: &Integrator,
    cfg: &HakeConfig,
) -> Result<ConverseReport> {
    let direct = integrate(line, f, g, &cfg.engine)?;
    let forward_residual = if line.is_left_dense(&line.max_point())? {
        let h = hake_forward(line, f, g, cfg)?;
        h.limit_value
            .map(|a| (a - (direct.value - h.correction)).abs())
    } else {
        None
    };
    let backward_residual = if line.is_right_dense(&line.min_point())? {
        let h = hake_backward(line, f, g, cfg)?;
        h.limit_value
            .map(|b| (b - (direct.value - h.correction)).abs())
    } else {
        None
    };
    Ok(ConverseReport { direct, forward_residual, backward_residual })
}
