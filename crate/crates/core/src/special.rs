//! Closed-form evaluation for the oscillatory primitive
//! `G(x) = integral of t*sin(1/t^2) from 0 to x` and its variation.
//!
//! Substituting u = 1/t^2 turns the primitive into a sine-product tail,
//! which reduces to the cosine integral:
//!
//! ```text
//! G(x) = (sin(a)/a - Ci(a)) / 2,          a = 1/x^2,
//! ```
//!
//! and the variation of G over [0, x] into
//!
//! ```text
//! T(x) = V(a) / 2,   V(a) = integral of |sin w| / w^2 over [a, inf).
//! ```
//!
//! Direct quadrature of t*sin(1/t^2) is hopeless near 0 (the wavelength
//! shrinks like t^3), so these evaluations are what makes the worked
//! example runnable. The cancellation between sin(a)/a and Ci(a) at large
//! `a` is avoided by evaluating their *difference* through the auxiliary
//! Laplace-type integrals
//!
//! ```text
//! fc(a) = int_0^inf e^{-au} u^2/(1+u^2) du = 1/a - f(a),
//! g(a)  = int_0^inf e^{-au} u  /(1+u^2) du,
//! G(x)  = (fc(a) sin a + g(a) cos a) / 2,
//! ```
//!
//! which are smooth, positive, and cheaply integrable after scaling v = a*u.

use std::sync::OnceLock;

use crate::quad::adaptive_simpson;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Ci(a) by its power series; good for the moderate arguments (a <= 2)
/// where the direct formula for G has no cancellation problem.
fn cosine_integral_series(a: f64) -> f64 {
    let mut sum = 0.0;
    let mut term = 1.0f64; // a^{2k} / (2k)! at k=0 is 1; start loop at k=1
    let a2 = a * a;
    for k in 1..=60 {
        let k2 = (2 * k) as f64;
        term *= -a2 / ((k2 - 1.0) * k2);
        let contrib = term / k2;
        sum += contrib;
        if contrib.abs() < 1e-18 {
            break;
        }
    }
    EULER_GAMMA + a.ln() + sum
}

/// fc(a) = int e^{-au} u^2/(1+u^2) du over [0, inf), for a >= 2.
fn aux_fc(a: f64) -> f64 {
    let inv_a2 = 1.0 / (a * a);
    let v = adaptive_simpson(
        &|v: f64| (-v).exp() * v * v / (1.0 + v * v * inv_a2),
        0.0,
        60.0,
        1e-13,
    )
    .expect("aux_fc quadrature is smooth");
    v / (a * a * a)
}

/// g(a) = int e^{-au} u/(1+u^2) du over [0, inf), for a >= 2.
fn aux_g(a: f64) -> f64 {
    let inv_a2 = 1.0 / (a * a);
    let v = adaptive_simpson(
        &|v: f64| (-v).exp() * v / (1.0 + v * v * inv_a2),
        0.0,
        60.0,
        1e-13,
    )
    .expect("aux_g quadrature is smooth");
    v / (a * a)
}

/// Asymptotic series sum (-1)^k (2k+2)! / a^(2k+3) for fc(a), truncated
/// at the smallest term; relative error < 1e-13 for a >= 40.
fn aux_fc_asymptotic(a: f64) -> f64 {
    let a2 = a * a;
    let mut term = 2.0 / (a2 * a);
    let mut sum = term;
    for k in 0..40 {
        let next = -term * ((2 * k + 3) * (2 * k + 4)) as f64 / a2;
        if next.abs() >= term.abs() || next.abs() < 1e-20 * sum.abs() {
            break;
        }
        sum += next;
        term = next;
    }
    sum
}

/// Asymptotic series sum (-1)^k (2k+1)! / a^(2k+2) for g(a).
fn aux_g_asymptotic(a: f64) -> f64 {
    let a2 = a * a;
    let mut term = 1.0 / a2;
    let mut sum = term;
    for k in 0..40 {
        let next = -term * ((2 * k + 2) * (2 * k + 3)) as f64 / a2;
        if next.abs() >= term.abs() || next.abs() < 1e-20 * sum.abs() {
            break;
        }
        sum += next;
        term = next;
    }
    sum
}

/// G(x) = int_0^x t sin(1/t^2) dt, defined as 0 at x = 0. Accurate to
/// roughly 1e-13 absolute over [0, ~30].
pub fn sin_inv_sq_primitive(x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let a = 1.0 / (x * x);
    if a <= 2.0 {
        0.5 * ((a.sin() / a) - cosine_integral_series(a))
    } else if a < 40.0 {
        0.5 * (aux_fc(a) * a.sin() + aux_g(a) * a.cos())
    } else {
        // deep-singularity points dominate the engine's evaluation count,
        // so this branch must be quadrature-free
        0.5 * (aux_fc_asymptotic(a) * a.sin() + aux_g_asymptotic(a) * a.cos())
    }
}

/// Anchor for the |sin| tail: the asymptotic series is used at and beyond
/// 64*pi, piecewise quadrature below it.
fn tail_anchor() -> f64 {
    64.0 * std::f64::consts::PI
}

/// V(a) = int_a^inf |sin w| / w^2 dw by the Fourier expansion of |sin|,
/// valid (to ~1e-9 absolute) for a >= the anchor.
fn abs_sin_tail_asymptotic(a: f64) -> f64 {
    use std::f64::consts::FRAC_2_PI;
    let a2 = a * a;
    let a3 = a2 * a;
    let mut sum = 0.0;
    for m in 1..=60u32 {
        let m = m as f64;
        let phase = 2.0 * m * a;
        let i_m = -phase.sin() / (2.0 * m * a2) + phase.cos() / (2.0 * m * m * a3);
        sum += i_m / (4.0 * m * m - 1.0);
    }
    FRAC_2_PI / a - 2.0 * FRAC_2_PI * sum
}

/// Per-period pieces int_{k pi}^{(k+1) pi} |sin w| / w^2 dw for k < 64,
/// computed once and cached.
fn period_pieces() -> &'static Vec<f64> {
    static PIECES: OnceLock<Vec<f64>> = OnceLock::new();
    PIECES.get_or_init(|| {
        let pi = std::f64::consts::PI;
        (0..64)
            .map(|k| {
                if k == 0 {
                    // the (0, pi) piece diverges and is never used: any
                    // a > 0 integrates its own head piece directly
                    return 0.0;
                }
                let lo = k as f64 * pi;
                let hi = (k + 1) as f64 * pi;
                adaptive_simpson(&|w: f64| w.sin().abs() / (w * w), lo, hi, 1e-14)
                    .expect("per-period tail piece")
            })
            .collect()
    })
}

/// V(a) = int_a^inf |sin w| / w^2 dw for a > 0.
pub fn abs_sin_tail(a: f64) -> f64 {
    assert!(a > 0.0, "abs_sin_tail needs a positive argument");
    let anchor = tail_anchor();
    if a >= anchor {
        return abs_sin_tail_asymptotic(a);
    }
    let pi = std::f64::consts::PI;
    let k0 = (a / pi).ceil() as usize; // first full period boundary >= a
    let head = if (k0 as f64) * pi > a {
        adaptive_simpson(&|w: f64| w.sin().abs() / (w * w), a, k0 as f64 * pi, 1e-13)
            .expect("tail head piece")
    } else {
        0.0
    };
    let pieces = period_pieces();
    let mid: f64 = pieces[k0.min(64)..64].iter().sum();
    head + mid + abs_sin_tail_asymptotic(anchor)
}

/// T(x) = int_0^x |t sin(1/t^2)| dt = Var of the primitive over [0, x].
pub fn sin_inv_sq_variation(x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    0.5 * abs_sin_tail(1.0 / (x * x))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn primitive_matches_direct_quadrature_away_from_zero() {
        // On [0.5, 1] the integrand is tame; compare increments.
        let direct = adaptive_simpson(
            &|t: f64| t * (1.0 / (t * t)).sin(),
            0.5,
            1.0,
            1e-12,
        )
        .unwrap();
        let closed = sin_inv_sq_primitive(1.0) - sin_inv_sq_primitive(0.5);
        assert!((direct - closed).abs() < 1e-10, "direct {direct} closed {closed}");
    }

    #[test]
    fn primitive_series_and_aux_branches_agree() {
        // a = 2 is the branch cutoff, i.e. x = 1/sqrt(2); the two
        // evaluations straddle it, so subtract the genuine increment
        // 2h G'(x) before asserting the branches line up
        let x = 1.0 / 2.0f64.sqrt();
        let h = 1e-9;
        let lo = sin_inv_sq_primitive(x - h);
        let hi = sin_inv_sq_primitive(x + h);
        let increment = 2.0 * h * x * (1.0 / (x * x)).sin();
        assert!((hi - lo - increment).abs() < 1e-12, "gap {}", hi - lo - increment);
    }

    #[test]
    fn primitive_central_difference_matches_derivative() {
        for &x in &[0.3, 0.45, 0.8, 1.5] {
            let h = 1e-6;
            let d = (sin_inv_sq_primitive(x + h) - sin_inv_sq_primitive(x - h)) / (2.0 * h);
            let exact = x * (1.0 / (x * x)).sin();
            assert!((d - exact).abs() < 1e-6, "x={x}: {d} vs {exact}");
        }
    }

    #[test]
    fn variation_matches_direct_quadrature_away_from_zero() {
        // |sin(1/t^2)| kinks at t = 1/sqrt(k pi); [0.6, 1] contains 1/sqrt(pi)
        let knot = 1.0 / std::f64::consts::PI.sqrt();
        let direct = adaptive_simpson(&|t: f64| (t * (1.0 / (t * t)).sin()).abs(), 0.6, knot, 1e-12)
            .unwrap()
            + adaptive_simpson(&|t: f64| (t * (1.0 / (t * t)).sin()).abs(), knot, 1.0, 1e-12)
                .unwrap();
        let closed = sin_inv_sq_variation(1.0) - sin_inv_sq_variation(0.6);
        assert!((direct - closed).abs() < 1e-9, "direct {direct} closed {closed}");
    }

    #[test]
    fn variation_is_monotone_and_small_near_zero() {
        let mut prev = 0.0;
        for i in 1..=100 {
            let x = i as f64 / 100.0;
            let t = sin_inv_sq_variation(x);
            assert!(t >= prev);
            prev = t;
        }
        // V(a) ~ (2/pi)/a, so T(x) ~ x^2/pi near 0
        let t = sin_inv_sq_variation(1e-3);
        assert!((t - 1e-6 / std::f64::consts::PI).abs() < 1e-8);
    }

    #[test]
    fn aux_asymptotics_agree_with_quadrature_at_cutoff() {
        // truncation error of the divergent series is ~e^(-a); compare
        // relative to the leading magnitudes 2/a^3 and 1/a^2
        for &a in &[40.0, 45.0, 60.0] {
            let fc = aux_fc(a);
            let g = aux_g(a);
            assert!((fc - aux_fc_asymptotic(a)).abs() < 1e-12 * fc, "fc at {a}");
            assert!((g - aux_g_asymptotic(a)).abs() < 1e-12 * g, "g at {a}");
        }
    }

    #[test]
    fn asymptotic_and_quadrature_tails_agree_at_anchor() {
        let a = tail_anchor();
        let below = abs_sin_tail(a - 1e-9);
        let above = abs_sin_tail(a + 1e-9);
        assert!((below - above).abs() < 1e-8);
    }
}
