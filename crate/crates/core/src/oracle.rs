//! Independent brute-force references used by the test suites: the
//! finite-line closed form, exhaustive variation over all divisions, and
//! the sine integral Si. None of these call the gauge engine; the
//! duplication is deliberate so engine results can be checked against
//! something the engine did not produce.

use crate::error::{KsError, Result};
use crate::quad::adaptive_simpson;

/// A finite line with n points carrying integrator values G and
/// integrand values f, indexed left to right.
#[derive(Clone, Debug, PartialEq)]
pub struct FiniteScenario {
    pub g_values: Vec<f64>,
    pub f_values: Vec<f64>,
}

impl FiniteScenario {
    pub fn new(g_values: Vec<f64>, f_values: Vec<f64>) -> Result<Self> {
        if g_values.len() != f_values.len() || g_values.is_empty() {
            return Err(KsError::Usage(
                "finite scenario needs equal-length nonempty value lists".into(),
            ));
        }
        Ok(FiniteScenario { g_values, f_values })
    }
}

/// On a finite line the singleton gauge forces the finest partition, so
/// the integral collapses to the closed form
/// f(p_0) G(p_0) + sum_{i>=1} f(p_i) (G(p_i) - G(p_{i-1})),
/// accumulated left to right (the engine's order, for bit-exact
/// comparison).
pub fn finite_line_integral(s: &FiniteScenario) -> f64 {
    let mut acc = s.f_values[0] * s.g_values[0];
    for i in 1..s.g_values.len() {
        acc += s.f_values[i] * (s.g_values[i] - s.g_values[i - 1]);
    }
    acc
}

/// Var over the point range by maximizing sum |G(x_i) - G(x_{i-1})| over
/// all 2^(n-2) divisions through the endpoints. Exact; capped at 12
/// points.
pub fn exhaustive_variation(values: &[f64]) -> Result<f64> {
    let n = values.len();
    if n > 12 {
        return Err(KsError::Capacity(format!(
            "exhaustive variation capped at 12 points, got {n}"
        )));
    }
    if n < 2 {
        return Ok(0.0);
    }
    let interior = n - 2;
    let mut best = 0.0f64;
    for mask in 0u32..(1u32 << interior) {
        let mut sum = 0.0;
        let mut prev = values[0];
        for (bit, &v) in values[1..n - 1].iter().enumerate() {
            if mask & (1 << bit) != 0 {
                sum += (v - prev).abs();
                prev = v;
            }
        }
        sum += (values[n - 1] - prev).abs();
        best = best.max(sum);
    }
    Ok(best)
}

/// Si(t) = int_0^t sin(u)/u du to ~1e-12: alternating power series for
/// t <= 4, and Si(t) = pi/2 - cos(t) F(t) - sin(t) G(t) for t > 4 with
/// the Laplace-transform auxiliaries
/// F(t) = int_0^inf e^{-tu}/(1+u^2) du, G(t) = int_0^inf u e^{-tu}/(1+u^2) du
/// evaluated by quadrature after the substitution v = t u (the divergent
/// asymptotic series cannot reach 1e-12 at moderate t).
pub fn sine_integral(t: f64) -> f64 {
    assert!(t >= 0.0, "sine_integral needs t >= 0");
    if t == 0.0 {
        return 0.0;
    }
    if t <= 4.0 {
        // sum (-1)^k t^(2k+1) / ((2k+1)(2k+1)!)
        let mut term = t; // t^(2k+1)/(2k+1)!
        let mut sum = t;
        let mut k = 1u32;
        loop {
            let m = 2 * k as i32;
            term *= -t * t / ((m * (m + 1)) as f64);
            let contrib = term / (m as f64 + 1.0);
            sum += contrib;
            if contrib.abs() < 1e-16 {
                return sum;
            }
            k += 1;
        }
    }
    let aux = |weight_u: bool| -> f64 {
        // (1/t) int_0^50 e^{-v} w(v/t) / (1 + (v/t)^2) dv, w = u or 1
        adaptive_simpson(
            &|v: f64| {
                let u = v / t;
                let w = if weight_u { u } else { 1.0 };
                (-v).exp() * w / (1.0 + u * u)
            },
            0.0,
            50.0,
            1e-14,
        )
        .map(|i| i / t)
        .unwrap_or(f64::NAN)
    };
    std::f64::consts::FRAC_PI_2 - t.cos() * aux(false) - t.sin() * aux(true)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_example() {
        let s = FiniteScenario::new(vec![0.0, 1.0, 3.0], vec![2.0, 5.0, 7.0]).unwrap();
        assert_eq!(finite_line_integral(&s), 19.0);
    }

    #[test]
    fn closed_form_constant_g() {
        let s = FiniteScenario::new(vec![4.0; 5], vec![2.0, 1.0, 0.0, -1.0, 3.0]).unwrap();
        assert_eq!(finite_line_integral(&s), 8.0);
    }

    #[test]
    fn variation_monotone_and_zigzag() {
        assert_eq!(exhaustive_variation(&[0.0, 0.5, 2.0]).unwrap(), 2.0);
        assert_eq!(exhaustive_variation(&[0.0, 1.0, 0.0, 1.0]).unwrap(), 3.0);
        assert_eq!(exhaustive_variation(&[7.0; 6]).unwrap(), 0.0);
        assert!(exhaustive_variation(&[0.0; 13]).is_err());
    }

    #[test]
    fn si_values() {
        assert_eq!(sine_integral(0.0), 0.0);
        assert!((sine_integral(1.0) - 0.946083070367183).abs() < 1e-12);
        // known reference Si(10) = 1.658347594218874
        assert!((sine_integral(10.0) - 1.658347594218874).abs() < 1e-11);
        assert!((sine_integral(100.0) - std::f64::consts::FRAC_PI_2).abs() < 0.01);
        // branch boundary continuity
        assert!((sine_integral(4.0 - 1e-9) - sine_integral(4.0 + 1e-9)).abs() < 1e-8);
    }

    #[test]
    fn si_monotone_on_first_arch_and_tail_bound() {
        let mut prev = 0.0;
        for k in 1..=32 {
            let v = sine_integral(std::f64::consts::PI * k as f64 / 32.0);
            assert!(v > prev);
            prev = v;
        }
        for &t in &[10.0, 25.0, 80.0, 300.0] {
            assert!((sine_integral(t) - std::f64::consts::FRAC_PI_2).abs() <= 2.0 / t);
        }
    }
}
