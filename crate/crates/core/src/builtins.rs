//! Named integrands and integrators available by name from scenarios:
//! "identity", "tent", "step", "sin_inv_sq_primitive", "recip_sq",
//! "indicator_max".

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use crate::error::{KsError, Result};
use crate::integrator::{Integrand, Integrator};
use crate::line::{Line, PointKey};
use crate::special;

pub const BUILTIN_NAMES: &[&str] =
    &["identity", "tent", "step", "sin_inv_sq_primitive", "recip_sq", "indicator_max"];

/// Wrap an expensive pure scalar function with a hash-map cache keyed by
/// the argument's bit pattern. Gauge-ladder division points repeat
/// heavily across levels, so this turns quadratic eval counts into
/// near-linear ones for quadrature-backed functions.
fn memoized(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> impl Fn(f64) -> f64 + Send + Sync {
    let cache: Arc<Mutex<HashMap<u64, f64>>> = Arc::new(Mutex::new(HashMap::new()));
    move |x: f64| {
        let key = x.to_bits();
        if let Some(v) = cache.lock().unwrap().get(&key) {
            return *v;
        }
        let v = f(x);
        cache.lock().unwrap().insert(key, v);
        v
    }
}

fn tent_value(lo: f64, span: f64, c: f64) -> f64 {
    let t = c - lo;
    t.min(span - t)
}

fn midpoint(line: &Line) -> Result<PointKey> {
    line.between(&line.min_point(), &line.max_point())?.ok_or_else(|| {
        KsError::Usage("this builtin needs a line with at least one interior point".into())
    })
}

/// Resolve a builtin name as an integrand f.
pub fn integrand(line: &Line, name: &str) -> Result<Integrand> {
    let lo = line.coord(&line.min_point());
    let hi = line.coord(&line.max_point());
    let span = line.span();
    match name {
        "identity" => {
            Ok(Integrand::from_coord("identity", |c| c).with_bound(lo.abs().max(hi.abs())))
        }
        "tent" => Ok(Integrand::from_coord("tent", move |c| tent_value(lo, span, c))
            .with_bound(span / 2.0)),
        "step" => {
            let mid = line.coord(&midpoint(line)?);
            Ok(Integrand::from_coord("step", move |c| if c >= mid { 1.0 } else { 0.0 })
                .with_bound(1.0))
        }
        "sin_inv_sq_primitive" => {
            let g = memoized(special::sin_inv_sq_primitive);
            Ok(Integrand::from_coord("sin_inv_sq_primitive", g).with_bound(1.0))
        }
        "recip_sq" => Ok(Integrand::from_coord("recip_sq", |c| {
            if c > 0.0 {
                1.0 / (c * c)
            } else {
                0.0
            }
        })),
        "indicator_max" => Ok(Integrand::new("indicator_max", |line: &Line, p: &PointKey| {
            if line.is_max(p) {
                1.0
            } else {
                0.0
            }
        })
        .with_bound(1.0)),
        other => Err(KsError::Usage(format!(
            "unknown integrand builtin '{other}'; known: {BUILTIN_NAMES:?}"
        ))),
    }
}

/// Resolve a builtin name as an integrator G.
pub fn integrator(line: &Line, name: &str) -> Result<Integrator> {
    let lo = line.coord(&line.min_point());
    let span = line.span();
    match name {
        "identity" => Ok(Integrator::smooth("identity", |c| c, |_| 1.0)
            .with_variation(|c| c)
            .with_monotone(true)),
        "tent" => {
            let mid = midpoint(line)?;
            Ok(Integrator::smooth(
                "tent",
                move |c| tent_value(lo, span, c),
                move |c| if c - lo < span / 2.0 { 1.0 } else { -1.0 },
            )
            // |slope| = 1 throughout, so Var on [0_K, x] grows like x
            .with_variation(|c| c)
            .with_monotone(false)
            .with_hints(line, vec![mid])?)
        }
        "step" => {
            let mid = midpoint(line)?;
            Integrator::step(line, 0.0, vec![(mid, 1.0)])
        }
        "sin_inv_sq_primitive" => {
            let g = memoized(special::sin_inv_sq_primitive);
            let var = memoized(special::sin_inv_sq_variation);
            Ok(Integrator::smooth("sin_inv_sq_primitive", g, |c| {
                if c > 0.0 {
                    c * (1.0 / (c * c)).sin()
                } else {
                    0.0
                }
            })
            .with_variation(var)
            .with_monotone(false))
        }
        "indicator_max" => {
            let max = line.max_point();
            if line.is_min(&max) {
                return Err(KsError::Usage("indicator_max needs a line with > 1 point".into()));
            }
            Integrator::step(line, 0.0, vec![(max, 1.0)])
                .map(|g| g.with_description("indicator_max"))
        }
        "recip_sq" => Err(KsError::Usage(
            "recip_sq is unbounded and not of bounded variation; use it as an integrand".into(),
        )),
        other => Err(KsError::Usage(format!(
            "unknown integrator builtin '{other}'; known: {BUILTIN_NAMES:?}"
        ))),
    }
}
