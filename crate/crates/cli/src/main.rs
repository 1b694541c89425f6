//! `ksline` — gauge (Kurzweil–Stieltjes) integration on compact lines.
//!
//! Commands read a JSON scenario file (see README) and emit a JSON result
//! on stdout (schema field "1") plus an optional CSV convergence table.
//! Exit codes: 0 converged/ok, 2 nonconverged, 3 diverging, 1 usage error.

mod expr;
mod scenario;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ksline::{
    hake_backward, hake_forward, integrate, jordan_decompose, measure_interval, oracle,
    step_approximation, Integrand, IntegralResult, Line, PointKey, Side, Verdict,
};
use scenario::Built;
use serde_json::{json, Value};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "ksline", version, about = "Gauge-integration toolkit for compact lines")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Scenario file (JSON).
    #[arg(long, value_name = "FILE")]
    scenario: std::path::PathBuf,
    /// Override the engine tolerance.
    #[arg(long)]
    tol: Option<f64>,
    /// Override the deepest gauge-ladder level.
    #[arg(long)]
    max_level: Option<u32>,
    /// Write a CSV convergence table here.
    #[arg(long, value_name = "PATH")]
    csv: Option<std::path::PathBuf>,
    /// Pretty-print JSON with this indent width (default: compact).
    #[arg(long)]
    json_indent: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Direction {
    Forward,
    Backward,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the integral of the scenario's integrand against its
    /// integrator over the whole line.
    Integrate(Common),
    /// Improper (Hake) evaluation toward the maximum or from the minimum.
    Hake {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value = "forward")]
        direction: Direction,
        /// Partial integrals past this magnitude (while growing) are
        /// declared diverging.
        #[arg(long)]
        divergence_bound: Option<f64>,
    },
    /// Jordan decomposition of the integrator into monotone parts.
    Decompose(Common),
    /// Interval measures induced by the integrator, for the scenario's
    /// "intervals" list.
    Measure(Common),
    /// Uniform step-function approximation of the integrator (scenario
    /// field "epsilon" sets the target error).
    Approx(Common),
    /// Derivation-convergence report for the measurability machinery.
    Lab {
        #[command(flatten)]
        common: Common,
        /// Dyadic probe depth n for the f_n quotients.
        #[arg(long, default_value_t = 12)]
        depth: u32,
        /// Number of interior sample points.
        #[arg(long, default_value_t = 64)]
        sample: usize,
    },
    /// Run the built-in oracle cross-checks.
    Selftest {
        #[arg(long)]
        json_indent: Option<usize>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, String> {
    match cli.command {
        Command::Integrate(common) => {
            let b = load(&common)?;
            let r = integrate(&b.line, &b.integrand, &b.integrator, &b.engine)
                .map_err(|e| e.to_string())?;
            if let Some(path) = &common.csv {
                write_levels_csv(path, &r)?;
            }
            let out = json!({
                "schema": "1",
                "command": "integrate",
                "value": r.value,
                "error_estimate": r.error_estimate,
                "levels_used": r.levels_used,
                "verdict": verdict_str(r.verdict),
                "diagnostics": levels_json(&r),
            });
            emit(&out, common.json_indent)?;
            Ok(verdict_code(r.verdict))
        }
        Command::Hake { common, direction, divergence_bound } => {
            let b = load(&common)?;
            let mut cfg = b.hake.clone();
            cfg.engine = b.engine.clone();
            if let Some(d) = divergence_bound {
                cfg.engine.divergence_bound = d;
            }
            let (r, dir) = match direction {
                Direction::Forward => (
                    hake_forward(&b.line, &b.integrand, &b.integrator, &cfg),
                    "forward",
                ),
                Direction::Backward => (
                    hake_backward(&b.line, &b.integrand, &b.integrator, &cfg),
                    "backward",
                ),
            };
            let r = r.map_err(|e| e.to_string())?;
            if let Some(path) = &common.csv {
                let mut w = csv_writer(path)?;
                wln(&mut w, "index,coord,partial")?;
                for (k, (p, v)) in r.approach_points.iter().enumerate() {
                    wln(&mut w, &format!("{k},{},{v}", b.line.coord(p)))?;
                }
            }
            let out = json!({
                "schema": "1",
                "command": "hake",
                "direction": dir,
                "limit_value": r.limit_value,
                "correction": r.correction,
                "value": r.total,
                "verdict": verdict_str(r.verdict),
                "notes": r.notes,
                "approach_points": r.approach_points.iter()
                    .map(|(p, v)| json!({"point": point_json(&b.line, p), "partial": v}))
                    .collect::<Vec<_>>(),
            });
            emit(&out, common.json_indent)?;
            Ok(verdict_code(r.verdict))
        }
        Command::Decompose(common) => {
            let b = load(&common)?;
            let tol = b.engine.tol.min(1e-8);
            let (g1, g2) = jordan_decompose(&b.line, &b.integrator, tol)
                .map_err(|e| e.to_string())?;
            let pts = sample_points(&b.line, 256);
            let mut worst = 0.0f64;
            let mut rows = Vec::new();
            for p in &pts {
                let a = g1.eval(&b.line, p);
                let c = g2.eval(&b.line, p);
                let g = b.integrator.eval(&b.line, p);
                worst = worst.max((a - c - g).abs());
                rows.push((b.line.coord(p), a, c, g));
            }
            if let Some(path) = &common.csv {
                let mut w = csv_writer(path)?;
                wln(&mut w, "coord,g1,g2,g")?;
                for (x, a, c, g) in &rows {
                    wln(&mut w, &format!("{x},{a},{c},{g}"))?;
                }
            }
            let max = b.line.max_point();
            let out = json!({
                "schema": "1",
                "command": "decompose",
                "total_variation": b.integrator.total_variation(&b.line, tol)
                    .map_err(|e| e.to_string())?,
                "g1_at_max": g1.eval(&b.line, &max),
                "g2_at_max": g2.eval(&b.line, &max),
                "max_reconstruction_error": worst,
                "sample_size": pts.len(),
            });
            emit(&out, common.json_indent)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Measure(common) => {
            let b = load(&common)?;
            if b.intervals.is_empty() {
                return Err("measure needs a nonempty \"intervals\" list in the scenario".into());
            }
            let tol = b.engine.tol.min(1e-8);
            let t = b
                .integrator
                .variation_function(&b.line, tol)
                .map_err(|e| e.to_string())?;
            let mut rows = Vec::new();
            for i in &b.intervals {
                let mu = measure_interval(&b.line, &b.integrator, i).map_err(|e| e.to_string())?;
                let mu_t = measure_interval(&b.line, &t, i).map_err(|e| e.to_string())?;
                rows.push(json!({
                    "interval": i.to_string(),
                    "mu": mu,
                    "variation_measure": mu_t,
                }));
            }
            let out = json!({"schema": "1", "command": "measure", "intervals": rows});
            emit(&out, common.json_indent)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Approx(common) => {
            let b = load(&common)?;
            let eps = b
                .epsilon
                .ok_or_else(|| "approx needs an \"epsilon\" field in the scenario".to_string())?;
            let s = step_approximation(&b.line, &b.integrator, eps).map_err(|e| e.to_string())?;
            let pts = sample_points(&b.line, 4096);
            let mut worst = 0.0f64;
            for p in &pts {
                worst = worst.max((b.integrator.eval(&b.line, p) - s.eval(&b.line, p)).abs());
            }
            if let Some(path) = &common.csv {
                let mut w = csv_writer(path)?;
                wln(&mut w, "coord,node_value")?;
                for (p, v) in s.division.iter().zip(&s.node_values) {
                    wln(&mut w, &format!("{},{v}", b.line.coord(p)))?;
                }
            }
            let out = json!({
                "schema": "1",
                "command": "approx",
                "epsilon": eps,
                "division_points": s.division.len(),
                "sup_error_on_sample": worst,
                "within_epsilon": worst < eps,
            });
            emit(&out, common.json_indent)?;
            Ok(if worst < eps { ExitCode::SUCCESS } else { ExitCode::from(2) })
        }
        Command::Lab { common, depth, sample } => {
            let b = load(&common)?;
            // interior points only: the dyadic probes degenerate at the ends
            let mut pts = sample_points(&b.line, sample + 2);
            pts.retain(|p| !b.line.is_min(p) && !b.line.is_max(p));
            let tol = common.tol.unwrap_or(1e-3);
            let rep = ksline::convergence_report(
                &b.line,
                &b.integrand,
                &b.integrator,
                &pts,
                depth,
                tol,
                &b.engine,
            )
            .map_err(|e| e.to_string())?;
            if let Some(path) = &common.csv {
                let mut w = csv_writer(path)?;
                wln(&mut w, "coord,class,f_n,f,abs_err,converged,exception")?;
                for r in &rep.rows {
                    wln(
                        &mut w,
                        &format!(
                            "{},{:?},{},{},{},{},{}",
                            b.line.coord(&r.point),
                            r.class,
                            r.f_n,
                            r.f_value,
                            r.abs_err,
                            r.converged,
                            r.exception.as_deref().unwrap_or("")
                        ),
                    )?;
                }
            }
            let out = json!({
                "schema": "1",
                "command": "lab",
                "depth": depth,
                "tol": tol,
                "scored": rep.scored,
                "converged": rep.converged,
                "exceptional": rep.exceptional,
                "fraction": rep.fraction,
            });
            emit(&out, common.json_indent)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Selftest { json_indent } => {
            let (out, ok) = selftest();
            emit(&out, json_indent)?;
            Ok(if ok { ExitCode::SUCCESS } else { ExitCode::from(2) })
        }
    }
}

fn load(common: &Common) -> Result<Built, String> {
    let text = std::fs::read_to_string(&common.scenario)
        .map_err(|e| format!("{}: {e}", common.scenario.display()))?;
    let s = scenario::parse_scenario(&text)?;
    let mut b = s.build()?;
    if let Some(t) = common.tol {
        if !(t > 0.0) {
            return Err("--tol must be positive".into());
        }
        b.engine.tol = t;
        b.hake.engine.tol = t;
    }
    if let Some(m) = common.max_level {
        b.engine.max_level = m;
        b.hake.engine.max_level = m;
    }
    Ok(b)
}

fn verdict_str(v: Verdict) -> &'static str {
    match v {
        Verdict::Converged => "converged",
        Verdict::Nonconverged => "nonconverged",
        Verdict::Diverging => "diverging",
    }
}

fn verdict_code(v: Verdict) -> ExitCode {
    match v {
        Verdict::Converged => ExitCode::SUCCESS,
        Verdict::Nonconverged => ExitCode::from(2),
        Verdict::Diverging => ExitCode::from(3),
    }
}

fn levels_json(r: &IntegralResult) -> Vec<Value> {
    r.diagnostics
        .iter()
        .map(|d| {
            json!({
                "level": d.level,
                "value": d.value,
                "delta": if d.delta.is_nan() { Value::Null } else { json!(d.delta) },
            })
        })
        .collect()
}

fn point_json(_line: &Line, p: &PointKey) -> Value {
    match p {
        PointKey::Finite(i) => json!(i),
        PointKey::Real(c) => json!(c),
        PointKey::Ordinal { q, r } => json!({"q": q, "r": r}),
        PointKey::Split { x, side } => match side {
            Side::Whole => json!(x),
            Side::Minus => json!({"x": x, "side": "minus"}),
            Side::Plus => json!({"x": x, "side": "plus"}),
        },
    }
}

/// A deterministic spread of points across the line, including both
/// endpoints and all structural points (split copies, ordinal limits).
fn sample_points(line: &Line, n: usize) -> Vec<PointKey> {
    let mut pts: Vec<PointKey> = Vec::new();
    match line {
        Line::Finite { n: count } => {
            for i in 0..*count {
                pts.push(PointKey::Finite(i));
            }
        }
        Line::Ordinal { limits, tail } => {
            for q in 0..=*limits {
                let rmax = if q == *limits { *tail } else { 16.min(n as u32) };
                for r in 0..=rmax {
                    if q + r > 0 || (q == 0 && r == 0) {
                        pts.push(PointKey::Ordinal { q, r });
                    }
                }
            }
            pts.retain(|p| line.contains(p));
        }
        Line::Real { lo, hi } => {
            for i in 0..=n {
                pts.push(PointKey::Real(lo + (hi - lo) * i as f64 / n as f64));
            }
        }
        Line::Split { lo, hi, splits } => {
            for i in 0..=n {
                let c = lo + (hi - lo) * i as f64 / n as f64;
                pts.push(PointKey::Split { x: c, side: Side::Whole });
            }
            for s in splits {
                pts.push(PointKey::Split { x: *s, side: Side::Minus });
                pts.push(PointKey::Split { x: *s, side: Side::Plus });
            }
            pts.retain(|p| line.contains(p));
            pts.sort_by(|a, b| line.compare(a, b).unwrap());
            pts.dedup_by(|a, b| line.compare(a, b).unwrap() == std::cmp::Ordering::Equal);
        }
    }
    pts
}

/// Oracle cross-checks: closed-form finite-line integrals against the
/// engine, exhaustive variation against the division scan, and the sine
/// integral against its known values.
fn selftest() -> (Value, bool) {
    let mut checks = Vec::new();
    let mut all_ok = true;
    let mut push = |name: &str, ok: bool, detail: String| {
        checks.push(json!({"name": name, "ok": ok, "detail": detail}));
    };

    // Deterministic pseudo-random dyadic values (splitmix64).
    let mut state = 0x243f_6a88_85a3_08d3u64;
    let mut next = move || {
        state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^= z >> 31;
        // dyadic with 8 fractional bits in [-2, 2)
        ((z % 1024) as f64 - 512.0) / 256.0
    };

    let mut ok = true;
    let mut detail = String::new();
    for case in 0..200 {
        let n = 2 + (case % 9);
        let g: Vec<f64> = (0..n).map(|_| next()).collect();
        let f: Vec<f64> = (0..n).map(|_| next()).collect();
        let s = oracle::FiniteScenario::new(g.clone(), f.clone()).unwrap();
        let want = oracle::finite_line_integral(&s);
        let line = Line::finite(n as u32).unwrap();
        let fi = Integrand::new("f", move |_l: &Line, p: &PointKey| match p {
            PointKey::Finite(i) => f[*i as usize],
            _ => unreachable!(),
        });
        // realize the value table as a step integrator: initial value plus
        // the jump at each node (dyadic inputs keep the sums exact)
        let jumps: Vec<(PointKey, f64)> = (1..n)
            .map(|i| (PointKey::Finite(i as u32), g[i] - g[i - 1]))
            .collect();
        let gi = ksline::Integrator::step(&line, g[0], jumps);
        let got = match gi.and_then(|gi| {
            integrate(&line, &fi, &gi, &ksline::EngineConfig::default())
        }) {
            Ok(r) => r.value,
            Err(e) => {
                ok = false;
                detail = e.to_string();
                break;
            }
        };
        if got != want {
            ok = false;
            detail = format!("case {case}: engine {got} != closed form {want}");
            break;
        }
    }
    if ok {
        detail = "200 finite scenarios, bit-exact".into();
    }
    all_ok &= ok;
    push("finite_line_integral vs engine", ok, detail);

    let si1 = oracle::sine_integral(1.0);
    let ok = (si1 - 0.946083070367183).abs() < 1e-12;
    all_ok &= ok;
    push("sine_integral(1)", ok, format!("Si(1) = {si1}"));

    let var = oracle::exhaustive_variation(&[0.0, 1.0, -0.5, 0.25]).unwrap();
    let ok = var == 3.25;
    all_ok &= ok;
    push("exhaustive_variation zigzag", ok, format!("got {var}, want 3.25"));

    (
        json!({"schema": "1", "command": "selftest", "ok": all_ok, "checks": checks}),
        all_ok,
    )
}

fn csv_writer(path: &std::path::Path) -> Result<std::io::BufWriter<std::fs::File>, String> {
    let f = std::fs::File::create(path).map_err(|e| format!("{}: {e}", path.display()))?;
    Ok(std::io::BufWriter::new(f))
}

fn wln(w: &mut impl std::io::Write, line: &str) -> Result<(), String> {
    writeln!(w, "{line}").map_err(|e| e.to_string())
}

fn write_levels_csv(path: &std::path::Path, r: &IntegralResult) -> Result<(), String> {
    let mut w = csv_writer(path)?;
    wln(&mut w, "level,value,delta")?;
    for d in &r.diagnostics {
        let delta = if d.delta.is_nan() { String::new() } else { d.delta.to_string() };
        wln(&mut w, &format!("{},{},{delta}", d.level, d.value))?;
    }
    Ok(())
}

fn emit(v: &Value, indent: Option<usize>) -> Result<(), String> {
    let text = match indent {
        None | Some(0) => serde_json::to_string(v),
        Some(n) => {
            let spaces = vec![b' '; n];
            let fmt = serde_json::ser::PrettyFormatter::with_indent(&spaces);
            let mut buf = Vec::new();
            let mut ser = serde_json::Serializer::with_formatter(&mut buf, fmt);
            serde::Serialize::serialize(v, &mut ser)
                .map(|_| String::from_utf8(buf).unwrap())
        }
    }
    .map_err(|e| e.to_string())?;
    println!("{text}");
    Ok(())
}
