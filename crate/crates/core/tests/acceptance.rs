//! Acceptance gate: ten end-to-end criteria, each printing one PASS/FAIL
//! line (run with `--nocapture` to see them on success). All criteria run
//! sequentially inside one test so the pinned runtime budgets are not
//! distorted by parallel test scheduling.

use ksline::*;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use std::time::{Duration, Instant};

struct Gate {
    failures: Vec<String>,
}

impl Gate {
    fn report(&mut self, idx: u32, name: &str, ok: bool, elapsed: Duration, budget: Duration, detail: String) {
        let within = elapsed <= budget;
        let status = if ok && within { "PASS" } else { "FAIL" };
        println!(
            "acceptance {idx:2} {name}: {status} ({elapsed:.2?} of {budget:.2?} budget) {detail}",
        );
        if !(ok && within) {
            self.failures.push(format!("{idx} {name}: ok={ok} within_budget={within} {detail}"));
        }
    }
}

/// Dyadic value in [-2, 2) with 8 fractional bits: closed under the sums
/// and differences taken here, so float arithmetic on them is exact.
fn dyadic(rng: &mut ChaCha8Rng) -> f64 {
    (rng.gen_range(-512i32..512) as f64) / 256.0
}

fn finite_integrand(values: Vec<f64>) -> Integrand {
    Integrand::new("table", move |_l: &Line, p: &PointKey| match p {
        PointKey::Finite(i) => values[*i as usize],
        _ => unreachable!(),
    })
}

fn step_from_values(line: &Line, values: &[f64]) -> Integrator {
    let jumps: Vec<(PointKey, f64)> = (1..values.len())
        .map(|i| (PointKey::Finite(i as u32), values[i] - values[i - 1]))
        .collect();
    Integrator::step(line, values[0], jumps).unwrap()
}

#[test]
fn acceptance_gate() {
    let mut gate = Gate { failures: Vec::new() };

    criterion_1(&mut gate);
    criterion_2(&mut gate);
    criterion_3(&mut gate);
    criterion_4(&mut gate);
    criterion_5(&mut gate);
    criterion_6(&mut gate);
    criterion_7(&mut gate);
    criterion_8(&mut gate);
    criterion_9(&mut gate);
    criterion_10(&mut gate);

    assert!(gate.failures.is_empty(), "failed criteria:\n{}", gate.failures.join("\n"));
}

/// 1,000 random finite-line scenarios: the engine agrees with the
/// closed-form left-to-right sum bit-for-bit.
fn criterion_1(gate: &mut Gate) {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut ok = true;
    let mut detail = String::new();
    for case in 0..1000 {
        let n = rng.gen_range(2usize..=10);
        let g: Vec<f64> = (0..n).map(|_| dyadic(&mut rng)).collect();
        let f: Vec<f64> = (0..n).map(|_| dyadic(&mut rng)).collect();
        let s = oracle::FiniteScenario::new(g.clone(), f.clone()).unwrap();
        let want = oracle::finite_line_integral(&s);
        let line = Line::finite(n as u32).unwrap();
        let fi = finite_integrand(f);
        let gi = step_from_values(&line, &g);
        let r = integrate(&line, &fi, &gi, &EngineConfig::default()).unwrap();
        if r.value != want || r.verdict != Verdict::Converged {
            ok = false;
            detail = format!("case {case}: engine {} vs oracle {want}", r.value);
            break;
        }
    }
    gate.report(1, "finite-line oracle equivalence", ok, t0.elapsed(), Duration::from_secs(5), detail);
}

/// Classical sanity: int x d(x^2) = 2/3; int 1 dG = G(1_K) exactly for
/// random step integrators.
fn criterion_2(gate: &mut Gate) {
    let t0 = Instant::now();
    let line = Line::unit();
    let mut ok = true;
    let mut detail = String::new();

    let f = Integrand::from_coord("x", |c| c).with_bound(1.0);
    let g = Integrator::smooth("x^2", |c| c * c, |c| 2.0 * c).with_monotone(true);
    let r = integrate(&line, &f, &g, &EngineConfig::default().with_tol(1e-9)).unwrap();
    let err = (r.value - 2.0 / 3.0).abs();
    if err >= 1e-8 {
        ok = false;
        detail = format!("int x d(x^2) error {err}");
    }

    let one = Integrand::constant(1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(102);
    for case in 0..100 {
        let k = rng.gen_range(1usize..=4);
        let mut jumps: Vec<(PointKey, f64)> = (0..k)
            .map(|_| {
                let c = rng.gen_range(1u32..1024) as f64 / 1024.0;
                (PointKey::Real(c), dyadic(&mut rng))
            })
            .collect();
        jumps.sort_by(|a, b| line.compare(&a.0, &b.0).unwrap());
        jumps.dedup_by(|a, b| line.compare(&a.0, &b.0).unwrap() == std::cmp::Ordering::Equal);
        let g = Integrator::step(&line, dyadic(&mut rng), jumps).unwrap();
        let want = g.eval(&line, &line.max_point());
        let r = integrate(&line, &one, &g, &EngineConfig::default()).unwrap();
        if r.value != want {
            ok = false;
            detail = format!("step case {case}: {} != G(1) = {want}", r.value);
            break;
        }
    }
    gate.report(2, "classical sanity", ok, t0.elapsed(), Duration::from_secs(5), detail);
}

/// f = G = indicator of the maximum: the direct integral is exactly 1
/// while the forward one-sided limit is 0, so the endpoint correction is
/// indispensable.
fn criterion_3(gate: &mut Gate) {
    let t0 = Instant::now();
    let line = Line::unit();
    let f = builtins::integrand(&line, "indicator_max").unwrap();
    let g = builtins::integrator(&line, "indicator_max").unwrap();
    let direct = integrate(&line, &f, &g, &EngineConfig::default()).unwrap();
    let h = hake_forward(&line, &f, &g, &HakeConfig::default()).unwrap();
    let ok = direct.value == 1.0
        && h.limit_value == Some(0.0)
        && h.total == Some(1.0)
        && h.verdict == Verdict::Converged;
    let detail = format!(
        "direct {} limit {:?} total {:?}",
        direct.value, h.limit_value, h.total
    );
    gate.report(3, "indicator endpoint correction", ok, t0.elapsed(), Duration::from_secs(1), detail);
}

/// The oscillatory worked example: backward improper value equals
/// (pi/2 - Si(1))/2 within 1e-5, and the same integrand against the
/// variation function diverges past 5 before y = 1e-6.
fn criterion_4(gate: &mut Gate) {
    let t0 = Instant::now();
    let line = Line::unit();
    let f = builtins::integrand(&line, "recip_sq").unwrap();
    let g = builtins::integrator(&line, "sin_inv_sq_primitive").unwrap();
    let target = (std::f64::consts::FRAC_PI_2 - oracle::sine_integral(1.0)) / 2.0;

    let cfg = HakeConfig {
        engine: EngineConfig::default()
            .with_tol(1e-5)
            .with_singular(vec![PointKey::Real(0.0)]),
        max_approach: 24,
        stabilization_tol: Some(1e-5),
    };
    let h = hake_backward(&line, &f, &g, &cfg).unwrap();
    let err = h.total.map(|t| (t - target).abs()).unwrap_or(f64::INFINITY);
    let conv_ok = h.verdict == Verdict::Converged && err < 1e-5;

    let t = g.variation_function(&line, 1e-10).unwrap();
    let cfg_div = HakeConfig {
        engine: EngineConfig::default()
            .with_tol(1e-6)
            .with_singular(vec![PointKey::Real(0.0)])
            .with_divergence_bound(5.0),
        max_approach: 20,
        stabilization_tol: None,
    };
    let hd = hake_backward(&line, &f, &t, &cfg_div).unwrap();
    let last = hd.approach_points.last();
    let div_ok = hd.verdict == Verdict::Diverging
        && last.map(|(p, v)| line.coord(p) <= 1e-6 && *v > 5.0).unwrap_or(false);

    let detail = format!(
        "value err {err:.2e}; diverging partial {:?} at {:?}",
        last.map(|(_, v)| *v),
        last.map(|(p, _)| line.coord(p)),
    );
    gate.report(4, "oscillatory worked example", conv_ok && div_ok, t0.elapsed(), Duration::from_secs(30), detail);
}

/// Variation-measure identity |mu_G| = mu_{T_G} on canonical intervals,
/// via exhaustive canonical subdivision, in exact arithmetic.
fn criterion_5(gate: &mut Gate) {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(105);
    let mut ok = true;
    let mut detail = String::new();
    'outer: for case in 0..100 {
        // alternate finite and split lines
        let line = if case % 2 == 0 {
            Line::finite(rng.gen_range(4u32..=9)).unwrap()
        } else {
            let s1 = rng.gen_range(2u32..8) as f64 / 16.0;
            let s2 = rng.gen_range(9u32..15) as f64 / 16.0;
            Line::split(0.0, 1.0, vec![s1, s2]).unwrap()
        };
        let points: Vec<PointKey> = match &line {
            Line::Finite { n } => (0..*n).map(PointKey::Finite).collect(),
            Line::Split { .. } => {
                let mut v = Vec::new();
                for k in 0..=16u32 {
                    let p = PointKey::Split { x: k as f64 / 16.0, side: Side::Whole };
                    if line.contains(&p) {
                        v.push(p);
                    }
                }
                for s in line.splits() {
                    v.push(PointKey::Split { x: *s, side: Side::Minus });
                    v.push(PointKey::Split { x: *s, side: Side::Plus });
                }
                v.sort_by(|a, b| line.compare(a, b).unwrap());
                v
            }
            _ => unreachable!(),
        };
        let k = rng.gen_range(1usize..=3);
        let mut jumps: Vec<(PointKey, f64)> = (0..k)
            .map(|_| (points[rng.gen_range(1..points.len())], dyadic(&mut rng)))
            .collect();
        jumps.sort_by(|a, b| line.compare(&a.0, &b.0).unwrap());
        jumps.dedup_by(|a, b| line.compare(&a.0, &b.0).unwrap() == std::cmp::Ordering::Equal);
        let g = Integrator::step(&line, dyadic(&mut rng), jumps).unwrap();

        let mut intervals = Vec::new();
        for _ in 0..20 {
            let i = rng.gen_range(0..points.len() - 1);
            let j = rng.gen_range(i + 1..points.len());
            // half-open (a, b] is canonical on every line
            intervals.push(IntervalSpec::half_open(points[i], points[j]));
        }
        let rows = total_variation_measure_check(&line, &g, &intervals, 1e-12).unwrap();
        for r in rows {
            if !r.equal || r.mu_tg != r.abs_mu_exhaustive {
                ok = false;
                detail = format!(
                    "case {case} {}: |mu| {} vs mu_T {}",
                    r.interval, r.abs_mu_exhaustive, r.mu_tg
                );
                break 'outer;
            }
        }
    }
    gate.report(5, "variation measure identity", ok, t0.elapsed(), Duration::from_secs(10), detail);
}

/// Jordan decomposition: reconstruction and monotonicity of both parts at
/// 1000 sample points per specimen.
fn criterion_6(gate: &mut Gate) {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(106);
    let line = Line::unit();
    let mut ok = true;
    let mut detail = String::new();
    'outer: for case in 0..100 {
        let k = rng.gen_range(0usize..=3);
        let mut jumps: Vec<(PointKey, f64)> = (0..k)
            .map(|_| {
                let c = rng.gen_range(1u32..1024) as f64 / 1024.0;
                (PointKey::Real(c), dyadic(&mut rng))
            })
            .collect();
        jumps.sort_by(|a, b| line.compare(&a.0, &b.0).unwrap());
        jumps.dedup_by(|a, b| line.compare(&a.0, &b.0).unwrap() == std::cmp::Ordering::Equal);
        let smooth_case = case % 2 == 1;
        let tolerance = if smooth_case { 1e-12 } else { 0.0 };
        let g = if smooth_case {
            let a = rng.gen_range(1.0..3.0);
            let s = rng.gen_range(0.1..0.5);
            Integrator::step_with_base(
                &line,
                dyadic(&mut rng),
                jumps,
                Some(Integrator::smooth("sin", move |c| s * (a * c).sin(), move |c| s * a * (a * c).cos())),
            )
            .unwrap()
        } else {
            Integrator::step(&line, dyadic(&mut rng), jumps).unwrap()
        };
        let (g1, g2) = jordan_decompose(&line, &g, 1e-10).unwrap();
        let mut prev = (f64::NEG_INFINITY, f64::NEG_INFINITY);
        for i in 0..=1000 {
            let p = PointKey::Real(i as f64 / 1000.0);
            let a = g1.eval(&line, &p);
            let b = g2.eval(&line, &p);
            let resid = (a - b - g.eval(&line, &p)).abs();
            if resid > tolerance || a < prev.0 - 1e-12 || b < prev.1 - 1e-12 {
                ok = false;
                detail = format!("case {case} at {p}: residual {resid}, monotone {}", a >= prev.0 && b >= prev.1);
                break 'outer;
            }
            prev = (a, b);
        }
    }
    gate.report(6, "jordan decomposition", ok, t0.elapsed(), Duration::from_secs(10), detail);
}

/// Substitution: H accumulated from a step density h against T_tent
/// satisfies int f dH = int f h dT within 3*tol.
fn criterion_7(gate: &mut Gate) {
    let t0 = Instant::now();
    let tol = 1e-4;
    let mut rng = ChaCha8Rng::seed_from_u64(107);
    let line = Line::unit();
    let tent = builtins::integrator(&line, "tent").unwrap();
    let t = tent.variation_function(&line, 1e-10).unwrap();
    let mut ok = true;
    let mut detail = String::new();
    let mut worst = 0.0f64;
    for case in 0..20 {
        let cut = rng.gen_range(1u32..16) as f64 / 16.0;
        let (v1, v2) = (rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
        let h = Integrand::from_coord("h", move |c| if c < cut { v1 } else { v2 }).with_bound(2.0);
        let (a, b) = (rng.gen_range(0.5..4.0), rng.gen_range(0.0..3.0));
        let f = Integrand::from_coord("f", move |c| (a * c + b).cos()).with_bound(1.0);
        let cfg = EngineConfig::default().with_tol(tol);
        let hacc = accumulator(&h, &t, &cfg);
        let lhs = integrate(&line, &f, &hacc, &cfg).unwrap();
        let rhs = integrate(&line, &f.product(&h), &t, &cfg).unwrap();
        let diff = (lhs.value - rhs.value).abs();
        worst = worst.max(diff);
        if diff >= 3.0 * tol {
            ok = false;
            detail = format!("case {case}: diff {diff} >= {}", 3.0 * tol);
            break;
        }
    }
    if ok {
        detail = format!("worst diff {worst:.2e} (3*tol = {:.2e})", 3.0 * tol);
    }
    gate.report(7, "substitution", ok, t0.elapsed(), Duration::from_secs(20), detail);
}

/// Uniform step approximation within epsilon on a 10^4-point grid.
fn criterion_8(gate: &mut Gate) {
    let t0 = Instant::now();
    let line = Line::unit();
    let mut ok = true;
    let mut detail = String::new();
    'outer: for name in ["identity", "tent", "sin_inv_sq_primitive"] {
        let g = builtins::integrator(&line, name).unwrap();
        for eps in [0.1, 0.01, 0.001] {
            let s = step_approximation(&line, &g, eps).unwrap();
            let mut sup = 0.0f64;
            for i in 0..10_000 {
                let p = PointKey::Real(i as f64 / 10_000.0);
                sup = sup.max((g.eval(&line, &p) - s.eval(&line, &p)).abs());
            }
            if sup >= eps {
                ok = false;
                detail = format!("{name} eps {eps}: sup {sup}");
                break 'outer;
            }
        }
    }
    gate.report(8, "step approximation", ok, t0.elapsed(), Duration::from_secs(10), detail);
}

/// Dyadic sup/inf probes: monotone in x and n, sandwiching, converging;
/// the derivation quotients recover f on at least 99% of a 512-point
/// interior sample at depth 12.
fn criterion_9(gate: &mut Gate) {
    let t0 = Instant::now();
    let line = Line::unit();
    let mut ok = true;
    let mut detail = String::new();

    let gid = builtins::integrator(&line, "identity").unwrap();
    let gsq = Integrator::smooth("x^2", |c| c * c, |c| 2.0 * c).with_monotone(true);
    'outer: for (label, g) in [("identity", &gid), ("x^2", &gsq)] {
        let mut prev_u = f64::NEG_INFINITY;
        for i in 1..=100 {
            let x = PointKey::Real(i as f64 / 101.0);
            let xc = line.coord(&x);
            let mut last = (f64::NEG_INFINITY, f64::INFINITY);
            for n in [4u32, 8, 12, 16, 20] {
                let u = u_n(&line, g, &x, n).unwrap();
                let v = v_n(&line, g, &x, n).unwrap();
                let (uc, vc) = (line.coord(&u.point), line.coord(&v.point));
                let sandwich = uc <= xc + 1e-9 && vc >= xc - 1e-9;
                let tighten = uc >= last.0 - 1e-9 && vc <= last.1 + 1e-9;
                if !sandwich || !tighten {
                    ok = false;
                    detail = format!("{label} at {xc}, n={n}: u {uc} v {vc}");
                    break 'outer;
                }
                last = (uc, vc);
            }
            // strict convergence at depth 20
            if xc - last.0 > 1e-3 || last.1 - xc > 1e-3 {
                ok = false;
                detail = format!("{label} at {xc}: depth-20 gap u {} v {}", xc - last.0, last.1 - xc);
                break 'outer;
            }
            // u_n(x) monotone in x at fixed n = 20
            if last.0 < prev_u - 1e-9 {
                ok = false;
                detail = format!("u_20 not monotone in x at {xc}");
                break 'outer;
            }
            prev_u = last.0;
        }
    }

    let mut frac = 0.0;
    if ok {
        let f = Integrand::from_coord("x", |c| c).with_bound(1.0);
        let sample: Vec<PointKey> = (1..=512).map(|i| PointKey::Real(i as f64 / 513.0)).collect();
        let rep = convergence_report(
            &line,
            &f,
            &gid,
            &sample,
            12,
            1e-3,
            &EngineConfig::default().with_tol(1e-7),
        )
        .unwrap();
        frac = rep.fraction;
        if frac < 0.99 {
            ok = false;
            detail = format!("convergence fraction {frac}");
        }
    }
    if ok {
        detail = format!("probe laws hold; convergence fraction {frac}");
    }
    gate.report(9, "measurability probes", ok, t0.elapsed(), Duration::from_secs(30), detail);
}

/// Converse round trip: the forward improper total agrees with the direct
/// integral for converged scenarios with a left-dense maximum.
fn criterion_10(gate: &mut Gate) {
    let t0 = Instant::now();
    let tol = 1e-6;
    let line = Line::unit();
    let mut rng = ChaCha8Rng::seed_from_u64(110);
    let mut ok = true;
    let mut detail = String::new();
    let mut worst = 0.0f64;
    for case in 0..20 {
        let (a, b) = (rng.gen_range(0.5..4.0), rng.gen_range(0.0..2.0));
        let f = Integrand::from_coord("f", move |c| (a * c + b).cos()).with_bound(1.0);
        let g: Integrator = match case % 4 {
            0 => builtins::integrator(&line, "identity").unwrap(),
            1 => builtins::integrator(&line, "tent").unwrap(),
            2 => {
                let s = rng.gen_range(0.2..1.0);
                Integrator::smooth("x^2", move |c| s * c * c, move |c| 2.0 * s * c).with_monotone(true)
            }
            _ => {
                let c = rng.gen_range(1u32..1024) as f64 / 1024.0;
                Integrator::step(&line, dyadic(&mut rng), vec![(PointKey::Real(c), dyadic(&mut rng))])
                    .unwrap()
            }
        };
        let cfg = EngineConfig::default().with_tol(tol);
        let direct = integrate(&line, &f, &g, &cfg).unwrap();
        let h = hake_forward(&line, &f, &g, &HakeConfig { engine: cfg, max_approach: 30, stabilization_tol: Some(tol) }).unwrap();
        let (Verdict::Converged, Some(total)) = (h.verdict, h.total) else {
            ok = false;
            detail = format!("case {case}: hake verdict {:?}", h.verdict);
            break;
        };
        let diff = (total - direct.value).abs();
        worst = worst.max(diff);
        if diff >= 3.0 * tol {
            ok = false;
            detail = format!("case {case}: |hake - direct| = {diff}");
            break;
        }
    }
    if ok {
        detail = format!("worst |hake - direct| {worst:.2e}");
    }
    gate.report(10, "converse round trip", ok, t0.elapsed(), Duration::from_secs(60), detail);
}
