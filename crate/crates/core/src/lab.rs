//! Executable form of the measurability machinery: the dyadic sup/inf
//! points u_n, v_n, their limits U, V, the A/B/C classification, the
//! approximating difference quotients f_n, and pointwise-convergence
//! reports.

use std::cmp::Ordering;

use crate::engine::EngineConfig;
use crate::error::{KsError, Result};
use crate::integrator::{accumulator, Integrand, Integrator};
use crate::line::{Line, PointKey};

/// Level n and its threshold 2^-n.
#[derive(Clone, Copy, Debug)]
pub struct DyadicProbe {
    pub level: u32,
}

impl DyadicProbe {
    pub fn threshold(&self) -> f64 {
        0.5f64.powi(self.level.min(1000) as i32)
    }
}

/// A supremum or infimum over the line. Suprema of open conditions on
/// dense lines are approached rather than attained; the bit records
/// whether the reported point itself satisfies the defining condition.
#[derive(Clone, Copy, Debug)]
pub struct SupResult {
    pub point: PointKey,
    pub attained: bool,
    pub set_empty: bool,
}

fn require_monotone(g: &Integrator) -> Result<()> {
    if g.monotone() != Some(true) {
        return Err(KsError::Precondition(
            "u_n/v_n need a nondecreasing integrator; decompose first".into(),
        ));
    }
    Ok(())
}

fn points_close(line: &Line, a: &PointKey, b: &PointKey, scale: f64) -> bool {
    a.order(b) == Ordering::Equal || (line.coord(a) - line.coord(b)).abs() <= scale
}

/// u_n(x) = sup { y < x : G(x) - G(y) >= 2^-n }, or 0_K if the set is
/// empty. The set is downward closed (G nondecreasing), so the sup is a
/// boundary point found by exact jump lookup (pure steps) or order
/// bisection to resolution span * 2^-40.
pub fn u_n(line: &Line, g: &Integrator, x: &PointKey, n: u32) -> Result<SupResult> {
    require_monotone(g)?;
    line.check_member(x)?;
    let tau = g.eval(line, x) - DyadicProbe { level: n }.threshold();
    let min = line.min_point();
    if line.is_min(x) || g.eval(line, &min) > tau {
        return Ok(SupResult { point: min, attained: false, set_empty: true });
    }
    // boundary of the downward-closed set {y : G(y) <= tau}, capped at x
    let inside = |p: &PointKey| g.eval(line, p) <= tau;
    let (mut lo, mut hi) = (min, *x);
    // invariant: inside(lo); hi is x or a point with !inside(hi)
    let resolution = line.span() * 0.5f64.powi(40);
    let mut exact = false;
    for _ in 0..300 {
        match line.between(&lo, &hi)? {
            None => {
                exact = true;
                break;
            }
            Some(m) => {
                if inside(&m) {
                    lo = m;
                } else {
                    hi = m;
                }
            }
        }
        if line.coord(&hi) - line.coord(&lo) <= resolution {
            break;
        }
    }
    if exact || hi.order(x) == Ordering::Less {
        // sup of [0_K, lo] (next excluded point known): attained at lo
        Ok(SupResult { point: lo, attained: true, set_empty: false })
    } else if points_close(line, &lo, x, resolution) {
        // every tested point below x qualifies: sup = x, approached
        Ok(SupResult { point: *x, attained: false, set_empty: false })
    } else {
        Ok(SupResult { point: lo, attained: true, set_empty: false })
    }
}

/// v_n(x) = inf { y > x : G(y) - G(x) >= 2^-n }, or 1_K if empty.
pub fn v_n(line: &Line, g: &Integrator, x: &PointKey, n: u32) -> Result<SupResult> {
    require_monotone(g)?;
    line.check_member(x)?;
    let tau = g.eval(line, x) + DyadicProbe { level: n }.threshold();
    let max = line.max_point();
    if line.is_max(x) || g.eval(line, &max) < tau {
        return Ok(SupResult { point: max, attained: false, set_empty: true });
    }
    let inside = |p: &PointKey| g.eval(line, p) >= tau;
    let (mut lo, mut hi) = (*x, max);
    // invariant: inside(hi); lo is x or a point with !inside(lo)
    let resolution = line.span() * 0.5f64.powi(40);
    let mut exact = false;
    for _ in 0..300 {
        match line.between(&lo, &hi)? {
            None => {
                exact = true;
                break;
            }
            Some(m) => {
                if inside(&m) {
                    hi = m;
                } else {
                    lo = m;
                }
            }
        }
        if line.coord(&hi) - line.coord(&lo) <= resolution {
            break;
        }
    }
    if exact || lo.order(x) == Ordering::Greater {
        Ok(SupResult { point: hi, attained: true, set_empty: false })
    } else if points_close(line, &hi, x, resolution) {
        Ok(SupResult { point: *x, attained: false, set_empty: false })
    } else {
        Ok(SupResult { point: hi, attained: true, set_empty: false })
    }
}

/// U(x) = sup_n u_n(x), approximated at a finite depth; the flag reports
/// whether the last two levels agree (exact stabilization for step G).
pub fn big_u(line: &Line, g: &Integrator, x: &PointKey, depth: u32) -> Result<(SupResult, bool)> {
    let deep = u_n(line, g, x, depth)?;
    let prev = u_n(line, g, x, depth.saturating_sub(1))?;
    let stable = points_close(line, &deep.point, &prev.point, line.span() * 0.5f64.powi(38));
    Ok((deep, stable))
}

pub fn big_v(line: &Line, g: &Integrator, x: &PointKey, depth: u32) -> Result<(SupResult, bool)> {
    let deep = v_n(line, g, x, depth)?;
    let prev = v_n(line, g, x, depth.saturating_sub(1))?;
    let stable = points_close(line, &deep.point, &prev.point, line.span() * 0.5f64.powi(38));
    Ok((deep, stable))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PointClass {
    A,
    B,
    C,
    Other,
}

#[derive(Clone, Copy, Debug)]
pub struct Classification {
    pub point: PointKey,
    pub class: PointClass,
    pub u_value: PointKey,
    pub v_value: PointKey,
}

/// A: U(x) = x < V(x); B: U(x) < x = V(x); C: U(x) = x = V(x).
/// Limit equality U(x) = x is decided at coordinate resolution
/// span * 2^-(depth/2): plateaus narrower than that read as convergence.
pub fn classify(line: &Line, g: &Integrator, x: &PointKey, depth: u32) -> Result<Classification> {
    let (u, _) = big_u(line, g, x, depth)?;
    let (v, _) = big_v(line, g, x, depth)?;
    let theta = line.span() * 0.5f64.powi((depth / 2).max(2) as i32);
    let u_eq = points_close(line, &u.point, x, theta);
    let v_eq = points_close(line, &v.point, x, theta);
    let class = match (u_eq, v_eq) {
        (true, false) => PointClass::A,
        (false, true) => PointClass::B,
        (true, true) => PointClass::C,
        (false, false) => PointClass::Other,
    };
    Ok(Classification { point: *x, class, u_value: u.point, v_value: v.point })
}

/// The three difference quotients at level n and the assembled f_n value.
#[derive(Clone, Copy, Debug)]
pub struct DerivativeProbe {
    pub ell: f64,
    pub r: f64,
    pub q: f64,
    pub f_n: f64,
    pub class: PointClass,
}

/// f_n = ell_n on A, r_n on B, q_n on C, 0 elsewhere, with 0 fallbacks
/// when the G-denominators vanish.
pub fn f_n_probe(
    line: &Line,
    f_acc: &Integrator,
    g: &Integrator,
    x: &PointKey,
    n: u32,
) -> Result<DerivativeProbe> {
    let u = u_n(line, g, x, n)?;
    let v = v_n(line, g, x, n)?;
    let gx = g.eval(line, x);
    let gu = g.eval(line, &u.point);
    let gv = g.eval(line, &v.point);
    let fx = f_acc.eval(line, x);
    let fu = f_acc.eval(line, &u.point);
    let fv = f_acc.eval(line, &v.point);
    let ell = if gx > gu { (fx - fu) / (gx - gu) } else { 0.0 };
    let r = if gv > gx { (fv - fx) / (gv - gx) } else { 0.0 };
    let q = if gv > gu { (fv - fu) / (gv - gu) } else { 0.0 };
    let class = classify(line, g, x, n)?.class;
    let f_n = match class {
        PointClass::A => ell,
        PointClass::B => r,
        PointClass::C => q,
        PointClass::Other => 0.0,
    };
    Ok(DerivativeProbe { ell, r, q, f_n, class })
}

#[derive(Clone, Debug)]
pub struct ReportRow {
    pub point: PointKey,
    pub class: PointClass,
    pub f_n: f64,
    pub f_value: f64,
    pub abs_err: f64,
    pub converged: bool,
    /// Exceptional-set bookkeeping: detected atoms and plateaus are
    /// excluded from scoring, mirroring the countable sets of the proof.
    pub exception: Option<String>,
}

#[derive(Clone, Debug)]
pub struct ConvergenceReport {
    pub rows: Vec<ReportRow>,
    pub scored: usize,
    pub converged: usize,
    pub exceptional: usize,
    /// converged / scored over the non-exceptional sample.
    pub fraction: f64,
}

/// Builds F as the accumulator of f and scores |f_n(x) - f(x)| < tol at
/// the given depth over the sample, excluding atoms and plateaus.
pub fn convergence_report(
    line: &Line,
    f: &Integrand,
    g: &Integrator,
    sample: &[PointKey],
    depth: u32,
    tol: f64,
    engine_cfg: &EngineConfig,
) -> Result<ConvergenceReport> {
    let f_acc = accumulator(f, g, engine_cfg);
    let mut rows = Vec::with_capacity(sample.len());
    let mut scored = 0usize;
    let mut converged = 0usize;
    let mut exceptional = 0usize;
    for x in sample {
        let atom = (g.eval(line, x) - g.left_limit(line, x)?).abs() > 1e-13;
        let probe = f_n_probe(line, &f_acc, g, x, depth)?;
        let fv = f.eval(line, x);
        let exception = if atom {
            Some("atom".to_string())
        } else if probe.class == PointClass::Other {
            Some("plateau".to_string())
        } else {
            None
        };
        let err = (probe.f_n - fv).abs();
        let ok = err < tol;
        if exception.is_none() {
            scored += 1;
            if ok {
                converged += 1;
            }
        } else {
            exceptional += 1;
        }
        rows.push(ReportRow {
            point: *x,
            class: probe.class,
            f_n: probe.f_n,
            f_value: fv,
            abs_err: err,
            converged: ok,
            exception,
        });
    }
    let fraction = if scored > 0 { converged as f64 / scored as f64 } else { 1.0 };
    Ok(ConvergenceReport { rows, scored, converged, exceptional, fraction })
}

#[derive(Clone, Copy, Debug)]
pub enum DerivativeCheck {
    /// |difference quotient - f(x)| at the finest available probe.
    Residual(f64),
    /// G is constant near x: condition (Db) fails; not an error.
    NotDifferentiableHere,
}

/// G-differentiability residual of F at x against candidate value f(x):
/// the atom quotient (F(x) - L_F(x)) / (G(x) - L_G(x)) at jumps of G,
/// otherwise the worst normalized discrepancy over a two-sided shrinking
/// neighborhood ladder, reported at the deepest level.
pub fn g_derivative_check(
    line: &Line,
    f_acc: &Integrator,
    g: &Integrator,
    f: &Integrand,
    x: &PointKey,
    depth: u32,
) -> Result<DerivativeCheck> {
    line.check_member(x)?;
    let gx = g.eval(line, x);
    let lgx = g.left_limit(line, x)?;
    let fx = f.eval(line, x);
    if (gx - lgx).abs() > 0.0 {
        let quot = (f_acc.eval(line, x) - f_acc.left_limit(line, x)?) / (gx - lgx);
        return Ok(DerivativeCheck::Residual((quot - fx).abs()));
    }
    let f_at_x = f_acc.eval(line, x);
    let mut last: Option<f64> = None;
    for k in 1..=depth {
        let mut ys: Vec<PointKey> = Vec::new();
        if line.is_left_dense(x)? {
            ys.push(line.left_approach(x, k)?);
        } else if !line.is_min(x) {
            ys.push(line.predecessor(x)?);
        }
        if line.is_right_dense(x)? {
            ys.push(line.right_approach(x, k)?);
        } else if !line.is_max(x) {
            ys.push(line.successor(x)?);
        }
        let mut level_worst: Option<f64> = None;
        for y in ys {
            let gy = g.eval(line, &y);
            if gy == gx {
                continue;
            }
            let res = ((f_acc.eval(line, &y) - f_at_x) - fx * (gy - gx)).abs() / (gy - gx).abs();
            level_worst = Some(level_worst.map_or(res, |w: f64| w.max(res)));
        }
        if let Some(w) = level_worst {
            last = Some(w);
        }
    }
    match last {
        Some(res) => Ok(DerivativeCheck::Residual(res)),
        None => Ok(DerivativeCheck::NotDifferentiableHere),
    }
}
