//! Integrands `f` and integrators `G` in NBV(K), together with the
//! companion constructions: left limits L_G, variation, the variation
//! function T_G, Jordan decomposition, induced interval measures,
//! step approximation, and the accumulator F(x) = int_{0_K}^x f dG.

use std::cmp::Ordering;
use std::sync::atomic::{AtomicBool, Ordering as AtomicOrdering};
use std::sync::{Arc, Mutex};

use crate::engine::{integrate_indicator, EngineConfig, Verdict};
use crate::error::{KsError, Result};
use crate::line::{IntervalSpec, Line, PointKey};
use crate::quad::adaptive_simpson;

type CoordFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
type PointFn = Arc<dyn Fn(&Line, &PointKey) -> f64 + Send + Sync>;

/// A total real-valued function on a line, the `f` of `int f dG`.
#[derive(Clone)]
pub struct Integrand {
    eval: PointFn,
    /// Declared uniform bound |f| <= M, when known.
    pub bound: Option<f64>,
    pub description: String,
}

impl Integrand {
    pub fn new(description: impl Into<String>, eval: impl Fn(&Line, &PointKey) -> f64 + Send + Sync + 'static) -> Self {
        Integrand { eval: Arc::new(eval), bound: None, description: description.into() }
    }

    /// Build from a scalar function of the order-embedding coordinate.
    pub fn from_coord(description: impl Into<String>, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Integrand::new(description, move |line: &Line, p: &PointKey| f(line.coord(p)))
    }

    pub fn constant(c: f64) -> Self {
        Integrand::from_coord(format!("{c}"), move |_| c).with_bound(c.abs())
    }

    pub fn with_bound(mut self, m: f64) -> Self {
        self.bound = Some(m);
        self
    }

    pub fn eval(&self, line: &Line, p: &PointKey) -> f64 {
        (self.eval)(line, p)
    }

    /// f * chi_I: the restriction used by indicator integrals.
    pub fn restricted(&self, i: IntervalSpec) -> Integrand {
        let inner = self.eval.clone();
        Integrand {
            eval: Arc::new(move |line: &Line, p: &PointKey| {
                if i.contains(p) {
                    inner(line, p)
                } else {
                    0.0
                }
            }),
            bound: self.bound,
            description: format!("{}*chi{}", self.description, i),
        }
    }

    /// Pointwise product, used by the substitution checks.
    pub fn product(&self, other: &Integrand) -> Integrand {
        let a = self.eval.clone();
        let b = other.eval.clone();
        Integrand {
            eval: Arc::new(move |line: &Line, p: &PointKey| a(line, p) * b(line, p)),
            bound: self.bound.zip(other.bound).map(|(x, y)| x * y),
            description: format!("({})*({})", self.description, other.description),
        }
    }
}

pub(crate) struct StepData {
    /// G(0_K); also the atom mass at the minimum.
    pub initial: f64,
    /// Strictly increasing jump locations, all above the minimum.
    pub jumps: Vec<(PointKey, f64)>,
    /// Optional continuous part; only its increments from the minimum count.
    pub base: Option<Box<Integrator>>,
}

pub(crate) struct SmoothData {
    pub f: CoordFn,
    pub df: CoordFn,
    /// Optional closed-form x |-> Var(G restricted to [0_K, x]).
    pub var: Option<CoordFn>,
}

/// Wrapper giving f64 the total order (no NaNs enter).
#[derive(Clone, Copy, PartialEq)]
struct F64Key(f64);
impl Eq for F64Key {}
impl PartialOrd for F64Key {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for F64Key {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

pub(crate) struct PrimitiveData {
    /// Value at the minimum.
    pub c0: f64,
    pub density: CoordFn,
    /// coordinate -> integral of density from the line minimum
    vals: Mutex<std::collections::BTreeMap<F64Key, f64>>,
    /// coordinate -> integral of |density| from the line minimum
    vars: Mutex<std::collections::BTreeMap<F64Key, f64>>,
}

impl PrimitiveData {
    fn cumulative(&self, line: &Line, c: f64, absolute: bool) -> f64 {
        let lo = line.coord(&line.min_point());
        let cache = if absolute { &self.vars } else { &self.vals };
        let start = {
            let guard = cache.lock().unwrap();
            guard
                .range(..=F64Key(c))
                .next_back()
                .map(|(k, v)| (k.0, *v))
                .unwrap_or((lo, 0.0))
        };
        if start.0 == c {
            return start.1;
        }
        let d = self.density.clone();
        let integrand = move |x: f64| if absolute { d(x).abs() } else { d(x) };
        let inc = adaptive_simpson(&integrand, start.0, c, 1e-12)
            .expect("primitive density quadrature failed; declare a smoother density");
        let v = start.1 + inc;
        cache.lock().unwrap().insert(F64Key(c), v);
        v
    }
}

/// Memo key wrapping a point; all keys of one map share a family.
struct MemoKey(PointKey);
impl PartialEq for MemoKey {
    fn eq(&self, other: &Self) -> bool {
        self.0.order(&other.0) == Ordering::Equal
    }
}
impl Eq for MemoKey {}
impl PartialOrd for MemoKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.0.order(&other.0))
    }
}
impl Ord for MemoKey {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.order(&other.0)
    }
}

pub(crate) struct AccumulatedData {
    pub f: Integrand,
    pub g: Box<Integrator>,
    pub cfg: EngineConfig,
    memo: Mutex<std::collections::BTreeMap<MemoKey, f64>>,
    nonconverged: AtomicBool,
}

type LeftFn = Arc<dyn Fn(&Line, &PointKey) -> Result<f64> + Send + Sync>;
type VarFn = Arc<dyn Fn(&Line, &PointKey, &PointKey, f64) -> Result<f64> + Send + Sync>;

/// Closure-backed integrator for derived objects (Jordan components,
/// variation functions of composites, user differences of monotones).
pub(crate) struct OpaqueData {
    pub eval: PointFn,
    /// Left limit at left-dense points only; the generic wrapper handles
    /// the minimum and isolated points.
    pub left: LeftFn,
    /// Var(G on [a, b]) with tolerance; `None` falls back to the
    /// monotone fast path or errors.
    pub var_on: Option<VarFn>,
}

pub(crate) enum Kind {
    Step(Arc<StepData>),
    Smooth(Arc<SmoothData>),
    Primitive(Arc<PrimitiveData>),
    Accumulated(Arc<AccumulatedData>),
    Opaque(Arc<OpaqueData>),
}

impl Clone for Kind {
    fn clone(&self) -> Self {
        match self {
            Kind::Step(d) => Kind::Step(d.clone()),
            Kind::Smooth(d) => Kind::Smooth(d.clone()),
            Kind::Primitive(d) => Kind::Primitive(d.clone()),
            Kind::Accumulated(d) => Kind::Accumulated(d.clone()),
            Kind::Opaque(d) => Kind::Opaque(d.clone()),
        }
    }
}

/// A right-continuous regulated function of bounded variation on a line.
#[derive(Clone)]
pub struct Integrator {
    pub description: String,
    pub(crate) kind: Kind,
    monotone: Option<bool>,
    /// Points where the engine should refine: jumps, kinks, doubled points.
    hints: Vec<PointKey>,
}

impl Integrator {
    /// Pure (or based) step function: `initial` is the value at the minimum,
    /// jumps are (location, size) with strictly increasing locations above
    /// the minimum. Right continuity holds by construction: G includes the
    /// jump at its own location.
    pub fn step(line: &Line, initial: f64, jumps: Vec<(PointKey, f64)>) -> Result<Integrator> {
        Integrator::step_with_base(line, initial, jumps, None)
    }

    pub fn step_with_base(
        line: &Line,
        initial: f64,
        jumps: Vec<(PointKey, f64)>,
        base: Option<Integrator>,
    ) -> Result<Integrator> {
        let min = line.min_point();
        for (p, _) in &jumps {
            line.check_member(p)?;
            if *p == min {
                return Err(KsError::Usage(
                    "a jump at the minimum is expressed by the initial value (atom at 0_K)".into(),
                ));
            }
        }
        for w in jumps.windows(2) {
            if w[0].0.order(&w[1].0) != Ordering::Less {
                return Err(KsError::Usage("jump locations must be strictly increasing".into()));
            }
        }
        if let Some(b) = &base {
            match b.kind {
                Kind::Smooth(_) | Kind::Primitive(_) => {}
                _ => {
                    return Err(KsError::Usage(
                        "a step base must be a continuous (smooth or primitive) integrator".into(),
                    ))
                }
            }
        }
        let base_monotone = base.as_ref().map(|b| b.monotone).unwrap_or(Some(true));
        let monotone = match base_monotone {
            Some(true) if jumps.iter().all(|(_, j)| *j >= 0.0) => Some(true),
            _ if jumps.iter().any(|(_, j)| *j < 0.0) => Some(false),
            other => other,
        };
        let mut hints: Vec<PointKey> = jumps.iter().map(|(p, _)| *p).collect();
        if let Some(b) = &base {
            hints.extend(b.hints.iter().copied());
        }
        Ok(Integrator {
            description: "step".into(),
            kind: Kind::Step(Arc::new(StepData { initial, jumps, base: base.map(Box::new) })),
            monotone,
            hints,
        })
    }

    /// Continuous integrator given by a scalar function of the coordinate
    /// and its derivative (used for variation quadrature when no closed
    /// form is supplied).
    pub fn smooth(
        description: impl Into<String>,
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
        df: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Integrator {
        Integrator {
            description: description.into(),
            kind: Kind::Smooth(Arc::new(SmoothData {
                f: Arc::new(f),
                df: Arc::new(df),
                var: None,
            })),
            monotone: None,
            hints: Vec::new(),
        }
    }

    /// Attach a closed-form variation x |-> Var(G on [0_K, x]).
    pub fn with_variation(mut self, var: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Integrator {
        if let Kind::Smooth(data) = &self.kind {
            self.kind = Kind::Smooth(Arc::new(SmoothData {
                f: data.f.clone(),
                df: data.df.clone(),
                var: Some(Arc::new(var)),
            }));
        }
        self
    }

    pub fn with_monotone(mut self, flag: bool) -> Integrator {
        self.monotone = Some(flag);
        self
    }

    pub fn with_hints(mut self, line: &Line, hints: Vec<PointKey>) -> Result<Integrator> {
        for p in &hints {
            line.check_member(p)?;
        }
        self.hints = hints;
        Ok(self)
    }

    pub fn with_description(mut self, d: impl Into<String>) -> Integrator {
        self.description = d.into();
        self
    }

    /// G(x) = c0 + int of `density` from the minimum, by cached quadrature.
    pub fn primitive(
        description: impl Into<String>,
        c0: f64,
        density: impl Fn(f64) -> f64 + Send + Sync + 'static,
        nonneg: bool,
    ) -> Integrator {
        Integrator {
            description: description.into(),
            kind: Kind::Primitive(Arc::new(PrimitiveData {
                c0,
                density: Arc::new(density),
                vals: Mutex::new(Default::default()),
                vars: Mutex::new(Default::default()),
            })),
            monotone: if nonneg { Some(true) } else { None },
            hints: Vec::new(),
        }
    }

    pub(crate) fn opaque(
        description: impl Into<String>,
        eval: PointFn,
        left: LeftFn,
        var_on: Option<VarFn>,
    ) -> Integrator {
        Integrator {
            description: description.into(),
            kind: Kind::Opaque(Arc::new(OpaqueData { eval, left, var_on })),
            monotone: None,
            hints: Vec::new(),
        }
    }

    /// Difference of two nondecreasing integrators, the NBV normal form.
    /// Evaluation is exact subtraction; variation uses the component-range
    /// upper bound, which is the defining convention for this representation.
    pub fn difference(plus: Integrator, minus: Integrator) -> Result<Integrator> {
        if plus.monotone != Some(true) || minus.monotone != Some(true) {
            return Err(KsError::Precondition(
                "difference components must be declared nondecreasing".into(),
            ));
        }
        let (p1, m1) = (plus.clone(), minus.clone());
        let (p2, m2) = (plus.clone(), minus.clone());
        let (p3, m3) = (plus.clone(), minus.clone());
        let mut hints = plus.hints.clone();
        hints.extend(minus.hints.iter().copied());
        let desc = format!("({}) - ({})", plus.description, minus.description);
        let mut out = Integrator::opaque(
            desc,
            Arc::new(move |line: &Line, p: &PointKey| p1.eval(line, p) - m1.eval(line, p)),
            Arc::new(move |line: &Line, p: &PointKey| {
                Ok(p2.left_limit(line, p)? - m2.left_limit(line, p)?)
            }),
            Some(Arc::new(move |line: &Line, a: &PointKey, b: &PointKey, _tol: f64| {
                Ok((p3.eval(line, b) - p3.eval(line, a)) + (m3.eval(line, b) - m3.eval(line, a)))
            })),
        );
        out.hints = hints;
        Ok(out)
    }

    pub fn monotone(&self) -> Option<bool> {
        self.monotone
    }

    /// Structural refinement hints for the gauge ladder.
    pub fn hints(&self) -> &[PointKey] {
        &self.hints
    }

    /// Locations of (declared) atoms of mu_G above the minimum.
    pub fn jump_points(&self) -> Vec<PointKey> {
        match &self.kind {
            Kind::Step(d) => d.jumps.iter().filter(|(_, j)| *j != 0.0).map(|(p, _)| *p).collect(),
            Kind::Accumulated(d) => d.g.jump_points(),
            _ => Vec::new(),
        }
    }

    pub fn eval(&self, line: &Line, p: &PointKey) -> f64 {
        match &self.kind {
            Kind::Step(d) => {
                let mut v = d.initial;
                for (c, j) in &d.jumps {
                    if c.order(p) != Ordering::Greater {
                        v += j;
                    } else {
                        break;
                    }
                }
                if let Some(b) = &d.base {
                    v += b.eval(line, p) - b.eval(line, &line.min_point());
                }
                v
            }
            Kind::Smooth(d) => (d.f)(line.coord(p)),
            Kind::Primitive(d) => d.c0 + d.cumulative(line, line.coord(p), false),
            Kind::Accumulated(d) => {
                // Incremental evaluation: F(p) = F(p0) + int over (p0, p]
                // from the nearest cached checkpoint p0 <= p (additivity of
                // the integral over abutting intervals). The increment is a
                // short window, which the indicator gauge keeps cheap.
                let key = MemoKey(*p);
                let checkpoint = {
                    let memo = d.memo.lock().unwrap();
                    memo.range(..=&key).next_back().map(|(k, v)| (k.0, *v))
                };
                let (i, base) = match checkpoint {
                    Some((p0, v0)) if p0.order(p) == Ordering::Equal => return v0,
                    Some((p0, v0)) => (
                        IntervalSpec { left: p0, left_closed: false, right: *p, right_closed: true },
                        v0,
                    ),
                    None => (IntervalSpec::closed(line.min_point(), *p), 0.0),
                };
                // Scale the inner tolerance by the increment's relative
                // width: per-increment errors chain additively along the
                // checkpoint ladder, and width-proportional budgets keep
                // the total drift within the configured tolerance.
                let wfrac = ((line.coord(&i.right) - line.coord(&i.left)) / line.span())
                    .clamp(7.0e-9, 1.0); // lower clamp ~2^-27 keeps budgets sane
                let mut cfg = d.cfg.clone();
                cfg.tol *= wfrac;
                let r = integrate_indicator(line, &d.f, &d.g, &i, &cfg)
                    .expect("accumulator inner integration failed");
                if r.verdict != Verdict::Converged {
                    d.nonconverged.store(true, AtomicOrdering::Relaxed);
                }
                let v = base + r.value;
                d.memo.lock().unwrap().insert(MemoKey(*p), v);
                v
            }
            Kind::Opaque(d) => (d.eval)(line, p),
        }
    }

    /// Did any memoized accumulator evaluation fail to converge?
    pub fn accumulator_nonconverged(&self) -> bool {
        match &self.kind {
            Kind::Accumulated(d) => d.nonconverged.load(AtomicOrdering::Relaxed),
            _ => false,
        }
    }

    /// The left-limit function L_G: 0 at the minimum, G(x-) at left-isolated
    /// points, the structural/analytic left limit at left-dense points.
    pub fn left_limit(&self, line: &Line, p: &PointKey) -> Result<f64> {
        line.check_member(p)?;
        if line.is_min(p) {
            return Ok(0.0);
        }
        if line.is_left_isolated(p)? {
            return Ok(self.eval(line, &line.predecessor(p)?));
        }
        match &self.kind {
            Kind::Step(d) => {
                let mut v = d.initial;
                for (c, j) in &d.jumps {
                    if c.order(p) == Ordering::Less {
                        v += j;
                    } else {
                        break;
                    }
                }
                if let Some(b) = &d.base {
                    // continuous base: its left limit is its value
                    v += b.eval(line, p) - b.eval(line, &line.min_point());
                }
                Ok(v)
            }
            // coordinate-continuous representations have L_G = G at
            // left-dense points (including ordinal limits, where the
            // embedding is continuous from the left)
            Kind::Smooth(_) | Kind::Primitive(_) => Ok(self.eval(line, p)),
            Kind::Accumulated(d) => {
                let fv = d.f.eval(line, p);
                let gv = d.g.eval(line, p);
                let lg = d.g.left_limit(line, p)?;
                Ok(self.eval(line, p) - fv * (gv - lg))
            }
            Kind::Opaque(d) => (d.left)(line, p),
        }
    }

    /// Var(G restricted to [a, b]).
    pub fn variation_on(&self, line: &Line, a: &PointKey, b: &PointKey, tol: f64) -> Result<f64> {
        if line.compare(a, b)? == Ordering::Greater {
            return Err(KsError::Usage("variation interval endpoints out of order".into()));
        }
        if self.monotone == Some(true) {
            return Ok(self.eval(line, b) - self.eval(line, a));
        }
        match &self.kind {
            Kind::Step(d) => {
                let mut v = 0.0;
                for (c, j) in &d.jumps {
                    if c.order(a) == Ordering::Greater && c.order(b) != Ordering::Greater {
                        v += j.abs();
                    }
                }
                if let Some(bs) = &d.base {
                    v += bs.variation_on(line, a, b, tol)?;
                }
                Ok(v)
            }
            Kind::Smooth(d) => {
                if let Some(var) = &d.var {
                    Ok(var(line.coord(b)) - var(line.coord(a)))
                } else {
                    let df = d.df.clone();
                    adaptive_simpson(&|x| df(x).abs(), line.coord(a), line.coord(b), tol)
                }
            }
            Kind::Primitive(d) => {
                Ok(d.cumulative(line, line.coord(b), true) - d.cumulative(line, line.coord(a), true))
            }
            Kind::Accumulated(_) => Err(KsError::Precondition(
                "variation of an accumulated integrator is not supported; declare monotonicity"
                    .into(),
            )),
            Kind::Opaque(d) => match &d.var_on {
                Some(v) => v(line, a, b, tol),
                None => Err(KsError::Precondition(format!(
                    "no variation rule for integrator '{}'",
                    self.description
                ))),
            },
        }
    }

    pub fn total_variation(&self, line: &Line, tol: f64) -> Result<f64> {
        self.variation_on(line, &line.min_point(), &line.max_point(), tol)
    }

    /// T_G(x) = |G(0_K)| + Var(G on [0_K, x]) as an integrator in its own
    /// right: nondecreasing, right-continuous, with the same exactness
    /// class as the source.
    pub fn variation_function(&self, line: &Line, tol: f64) -> Result<Integrator> {
        let g0 = self.eval(line, &line.min_point()).abs();
        let desc = format!("T[{}]", self.description);
        let mut out = match &self.kind {
            _ if self.monotone == Some(true) => {
                let g = self.clone();
                let gl = self.clone();
                let base0 = self.eval(line, &line.min_point());
                Integrator::opaque(
                    desc,
                    Arc::new(move |line: &Line, p: &PointKey| {
                        g0 + g.eval(line, p) - base0
                    }),
                    Arc::new(move |line: &Line, p: &PointKey| {
                        Ok(g0 + gl.left_limit(line, p)? - base0)
                    }),
                    None,
                )
            }
            Kind::Step(d) => {
                let jumps = d.jumps.iter().map(|(p, j)| (*p, j.abs())).collect();
                let base = match &d.base {
                    Some(b) => Some(b.variation_function(line, tol)?),
                    None => None,
                };
                Integrator::step_with_base(line, g0, jumps, base)?.with_description(desc)
            }
            Kind::Smooth(d) => match &d.var {
                Some(var) => {
                    let var1 = var.clone();
                    let var2 = var.clone();
                    let var3 = var.clone();
                    let lo = line.coord(&line.min_point());
                    Integrator::smooth(
                        desc,
                        move |x| g0 + var1(x) - var2(lo),
                        {
                            let df = d.df.clone();
                            move |x| df(x).abs()
                        },
                    )
                    .with_variation(move |x| var3(x) - var3(lo))
                }
                None => {
                    let df = d.df.clone();
                    Integrator::primitive(desc, g0, move |x| df(x).abs(), true)
                }
            },
            Kind::Primitive(d) => {
                let density = d.density.clone();
                Integrator::primitive(desc, g0, move |x| density(x).abs(), true)
            }
            Kind::Accumulated(_) | Kind::Opaque(_) => {
                let g = self.clone();
                let gl = self.clone();
                let min = line.min_point();
                let var_tol = tol;
                // left limit of T at left-dense p: |G(0)| + Var over [0, p)
                // = T(p) - (G(p) - L_G(p)) atom mass in absolute value
                Integrator::opaque(
                    desc,
                    Arc::new(move |line: &Line, p: &PointKey| {
                        g0 + g
                            .variation_on(line, &line.min_point(), p, var_tol)
                            .expect("variation function evaluation")
                    }),
                    Arc::new(move |line: &Line, p: &PointKey| {
                        let t = g0 + gl.variation_on(line, &min, p, var_tol)?;
                        let atom = gl.eval(line, p) - gl.left_limit(line, p)?;
                        Ok(t - atom.abs())
                    }),
                    None,
                )
            }
        };
        out.monotone = Some(true);
        out.hints = self.hints.clone();
        Ok(out)
    }
}

/// The stated Var(G, D) sum over a division.
pub fn variation_on_division(line: &Line, g: &Integrator, division: &[PointKey]) -> Result<f64> {
    for w in division.windows(2) {
        if line.compare(&w[0], &w[1])? == Ordering::Greater {
            return Err(KsError::Usage("division points must be nondecreasing".into()));
        }
    }
    let mut v = 0.0;
    for w in division.windows(2) {
        v += (g.eval(line, &w[1]) - g.eval(line, &w[0])).abs();
    }
    Ok(v)
}

/// Jordan decomposition G = G1 - G2 with G1 = T_G and G2 = T_G - G,
/// both nondecreasing and right-continuous.
pub fn jordan_decompose(line: &Line, g: &Integrator, tol: f64) -> Result<(Integrator, Integrator)> {
    let g1 = g.variation_function(line, tol)?;
    let t = g1.clone();
    let tl = g1.clone();
    let gg = g.clone();
    let ggl = g.clone();
    let mut g2 = Integrator::opaque(
        format!("T[{d}] - ({d})", d = g.description),
        Arc::new(move |line: &Line, p: &PointKey| t.eval(line, p) - gg.eval(line, p)),
        Arc::new(move |line: &Line, p: &PointKey| {
            Ok(tl.left_limit(line, p)? - ggl.left_limit(line, p)?)
        }),
        None,
    );
    g2.monotone = Some(true);
    g2.hints = g.hints().to_vec();
    Ok((g1, g2))
}

/// mu_G of a canonical interval:
/// `[0_K, b] -> G(b)`, `[0_K, b) -> L_G(b)`, `(a, b] -> G(b) - G(a)`,
/// `(a, b) -> L_G(b) - G(a)`. Note the atom at the minimum:
/// mu_G({0_K}) = G(0_K), the measure-side mirror of the f(0_K)G(0_K)
/// Riemann-sum term.
pub fn measure_interval(line: &Line, g: &Integrator, i: &IntervalSpec) -> Result<f64> {
    if !line.is_canonical(i)? {
        return Err(KsError::Usage(format!(
            "{i} is not canonical; apply canonicalize first"
        )));
    }
    let left_val = if i.left_closed {
        // canonical closed-left means the interval starts at the minimum
        0.0
    } else {
        g.eval(line, &i.left)
    };
    let right_val = if i.right_closed {
        g.eval(line, &i.right)
    } else {
        g.left_limit(line, &i.right)?
    };
    Ok(right_val - left_val)
}

/// |mu_G(I)| against the variation bound Var(G on [a, b]) (plus the atom
/// at the minimum when I contains it). Returns (|mu|, bound, bound holds).
pub fn variation_bound_check(
    line: &Line,
    g: &Integrator,
    i: &IntervalSpec,
    tol: f64,
) -> Result<(f64, f64, bool)> {
    let mu = measure_interval(line, g, i)?.abs();
    let mut bound = g.variation_on(line, &i.left, &i.right, tol)?;
    if i.left_closed {
        bound += g.eval(line, &line.min_point()).abs();
    }
    Ok((mu, bound, mu <= bound + tol))
}

/// One row of the |mu_G| = mu_{T_G} comparison.
#[derive(Debug, Clone)]
pub struct MeasureCheckRow {
    pub interval: IntervalSpec,
    pub mu_tg: f64,
    pub abs_mu_exhaustive: f64,
    pub equal: bool,
}

/// For each canonical interval, compares mu_{T_G}(I) with the exact total
/// variation of mu_G over I obtained by brute force over all canonical
/// subdivisions through a candidate cut set (jumps plus separators).
/// Exact-arithmetic families only; the candidate set is capped at 12.
pub fn total_variation_measure_check(
    line: &Line,
    g: &Integrator,
    intervals: &[IntervalSpec],
    tol: f64,
) -> Result<Vec<MeasureCheckRow>> {
    let tg = g.variation_function(line, tol)?;
    let mut rows = Vec::new();
    for i in intervals {
        if !line.is_canonical(i)? {
            return Err(KsError::Usage(format!("{i} is not canonical")));
        }
        let mu_tg = measure_interval(line, &tg, i)?;
        let abs_mu = exhaustive_abs_measure(line, g, i)?;
        let equal = (mu_tg - abs_mu).abs() == 0.0;
        rows.push(MeasureCheckRow { interval: *i, mu_tg, abs_mu_exhaustive: abs_mu, equal });
    }
    Ok(rows)
}

/// sup over canonical subdivisions of sum |mu_G(I_j)|.
fn exhaustive_abs_measure(line: &Line, g: &Integrator, i: &IntervalSpec) -> Result<f64> {
    // Candidate cuts: jump points inside I, plus a separator between each
    // adjacent pair of relevant points so jumps can be isolated.
    let inside = |p: &PointKey| -> bool {
        i.contains(p) && p.order(&i.right) == Ordering::Less
    };
    let mut anchors: Vec<PointKey> = vec![i.left];
    let mut jumps: Vec<PointKey> = g
        .jump_points()
        .into_iter()
        .filter(inside)
        .collect();
    jumps.sort_by(|a, b| a.order(b));
    anchors.append(&mut jumps);
    anchors.push(i.right);
    let mut candidates: Vec<PointKey> = Vec::new();
    for w in anchors.windows(2) {
        if w[0].order(&w[1]) == Ordering::Less {
            if let Some(m) = line.between(&w[0], &w[1])? {
                candidates.push(m);
            }
        }
        if w[1].order(&i.right) == Ordering::Less {
            candidates.push(w[1]);
        }
    }
    candidates.sort_by(|a, b| a.order(b));
    candidates.dedup_by(|a, b| a.order(b) == Ordering::Equal);
    if candidates.len() > 12 {
        return Err(KsError::Capacity(format!(
            "{} candidate cuts exceed the exhaustive-subdivision cap of 12",
            candidates.len()
        )));
    }
    let n = candidates.len();
    let mut best = 0.0f64;
    for mask in 0u32..(1 << n) {
        let mut cuts: Vec<PointKey> = Vec::new();
        for (j, c) in candidates.iter().enumerate() {
            if mask & (1 << j) != 0 {
                cuts.push(*c);
            }
        }
        let mut total = 0.0;
        let mut prev = i.left;
        let mut prev_closed = i.left_closed;
        for c in &cuts {
            let piece = IntervalSpec {
                left: prev,
                left_closed: prev_closed,
                right: *c,
                right_closed: true,
            };
            total += measure_interval(line, g, &piece)?.abs();
            prev = *c;
            prev_closed = false;
        }
        let last = IntervalSpec {
            left: prev,
            left_closed: prev_closed,
            right: i.right,
            right_closed: i.right_closed,
        };
        total += measure_interval(line, g, &last)?.abs();
        if total > best {
            best = total;
        }
    }
    Ok(best)
}

/// A step function on a line: values at division points and constant
/// values on the open gaps between them.
#[derive(Debug, Clone)]
pub struct StepFunction {
    pub division: Vec<PointKey>,
    pub node_values: Vec<f64>,
    /// Constant value on each open gap (division[k-1], division[k]).
    pub gap_values: Vec<f64>,
}

impl StepFunction {
    pub fn eval(&self, _line: &Line, p: &PointKey) -> f64 {
        // binary search for p among division points
        let mut lo = 0usize;
        let mut hi = self.division.len();
        while lo < hi {
            let m = (lo + hi) / 2;
            match self.division[m].order(p) {
                Ordering::Equal => return self.node_values[m],
                Ordering::Less => lo = m + 1,
                Ordering::Greater => hi = m,
            }
        }
        // p lies in the open gap (division[lo-1], division[lo])
        self.gap_values[lo - 1]
    }
}

/// Uniform step approximation of a regulated G: finds a division whose
/// open gaps each have oscillation < eps/2 (greedy doubling scan), then
/// takes G's value at division points and at one witness per gap.
pub fn step_approximation(line: &Line, g: &Integrator, eps: f64) -> Result<StepFunction> {
    if eps <= 0.0 {
        return Err(KsError::Usage("step approximation needs eps > 0".into()));
    }
    let max_points: usize = 1 << 20;
    let mut level: u32 = 4;
    loop {
        let division = structural_grid(line, g, level)?;
        if division.len() > max_points {
            return Err(KsError::Nonconvergence(format!(
                "oscillation scan exceeded {max_points} division points"
            )));
        }
        let mut ok = true;
        let mut gap_values = Vec::with_capacity(division.len().saturating_sub(1));
        for w in division.windows(2) {
            match gap_oscillation(line, g, &w[0], &w[1])? {
                Some((osc, witness)) if osc < eps / 2.0 => gap_values.push(witness),
                Some(_) => {
                    ok = false;
                    break;
                }
                // empty gap (adjacent points): value is irrelevant
                None => gap_values.push(0.0),
            }
        }
        if ok {
            let node_values = division.iter().map(|p| g.eval(line, p)).collect();
            return Ok(StepFunction { division, node_values, gap_values });
        }
        level += 1;
        if level > 21 {
            return Err(KsError::Nonconvergence(
                "oscillation bound not reached; G is effectively not regulated at this tolerance"
                    .into(),
            ));
        }
    }
}

/// Division points at a resolution level: endpoints, structural hints,
/// split copies, ordinal landmarks, and a uniform coordinate grid.
fn structural_grid(line: &Line, g: &Integrator, level: u32) -> Result<Vec<PointKey>> {
    let mut pts: Vec<PointKey> = vec![line.min_point(), line.max_point()];
    pts.extend(g.hints().iter().copied());
    pts.extend(g.jump_points());
    match line {
        Line::Finite { n } => {
            // resolution doubling on index space; at worst every point
            let stride = ((*n as usize) >> level.min(20)).max(1);
            let mut i = 0usize;
            while i < *n as usize {
                pts.push(PointKey::Finite(i as u32));
                i += stride;
            }
        }
        Line::Real { lo, hi } => {
            let m = 1usize << level.min(20);
            for j in 1..m {
                pts.push(PointKey::Real(lo + (hi - lo) * j as f64 / m as f64));
            }
        }
        Line::Split { lo, hi, splits } => {
            let m = 1usize << level.min(20);
            for j in 1..m {
                let c = lo + (hi - lo) * j as f64 / m as f64;
                if let Ok(p) = line.point_at(c) {
                    pts.push(p);
                }
            }
            for s in splits {
                pts.push(PointKey::split(*s, crate::line::Side::Minus));
                pts.push(PointKey::split(*s, crate::line::Side::Plus));
            }
        }
        Line::Ordinal { limits, tail } => {
            let depth = 1u32 << level.min(12);
            for q in 0..=*limits {
                let rmax = if q == *limits { *tail } else { depth };
                for r in 0..=rmax {
                    pts.push(PointKey::ordinal(q, r));
                }
            }
        }
    }
    pts.sort_by(|a, b| a.order(b));
    pts.dedup_by(|a, b| a.order(b) == Ordering::Equal);
    Ok(pts)
}

/// Sampled oscillation of G on the open gap (a, b) and a witness value.
/// Returns None when the gap is empty.
fn gap_oscillation(
    line: &Line,
    g: &Integrator,
    a: &PointKey,
    b: &PointKey,
) -> Result<Option<(f64, f64)>> {
    let mid = match line.between(a, b)? {
        Some(m) => m,
        None => return Ok(None),
    };
    let mut values = vec![g.eval(line, &mid)];
    // coordinate samples inside the gap where addressable
    let (ca, cb) = (line.coord(a), line.coord(b));
    if cb > ca {
        for j in 1..32 {
            let c = ca + (cb - ca) * j as f64 / 32.0;
            if let Ok(p) = line.point_at(c) {
                if a.order(&p) == Ordering::Less && p.order(b) == Ordering::Less {
                    values.push(g.eval(line, &p));
                }
            }
        }
    }
    // the one-sided limits bound the tails of the gap
    values.push(g.left_limit(line, b)?);
    if line.is_right_isolated(a)? {
        let s = line.successor(a)?;
        if s.order(b) == Ordering::Less {
            values.push(g.eval(line, &s));
        }
    }
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(Some((max - min, values[0])))
}

/// F(x) = int over [0_K, x] of f dG, memoized, with the analytic left
/// limit L_F(x) = F(x) - f(x)(G(x) - L_G(x)).
pub fn accumulator(f: &Integrand, g: &Integrator, cfg: &EngineConfig) -> Integrator {
    let hints = {
        let mut h = g.hints().to_vec();
        h.extend(g.jump_points());
        h
    };
    Integrator {
        description: format!("int({}) d({})", f.description, g.description),
        kind: Kind::Accumulated(Arc::new(AccumulatedData {
            f: f.clone(),
            g: Box::new(g.clone()),
            cfg: cfg.clone(),
            memo: Mutex::new(Default::default()),
            nonconverged: AtomicBool::new(false),
        })),
        monotone: None,
        hints,
    }
}
