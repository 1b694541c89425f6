//! Small adaptive-quadrature helper shared by variation estimates, the
//! primitive integrator representation, and the special-function code.

use crate::error::{KsError, Result};

/// Adaptive Simpson with Richardson-style acceptance. `tol` is an absolute
/// target for the whole interval; the budget caps total refinement.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = simpson(a, b, fa, fm, fb);
    let mut budget: u64 = 2_000_000;
    rec(f, a, b, fa, fm, fb, whole, tol, 50, &mut budget)
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn rec<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
    budget: &mut u64,
) -> Result<f64> {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if delta.abs() <= 15.0 * tol || (b - a) < f64::EPSILON * (a.abs() + b.abs() + 1.0) {
        return Ok(left + right + delta / 15.0);
    }
    if depth == 0 || *budget < 2 {
        return Err(KsError::Nonconvergence(format!(
            "quadrature stalled on [{a}, {b}] with estimate {}",
            left + right
        )));
    }
    *budget -= 2;
    let l = rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1, budget)?;
    let r = rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1, budget)?;
    Ok(l + r)
}
