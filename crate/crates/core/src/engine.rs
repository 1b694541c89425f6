//! Gauges, constructive Cousin partitions, Riemann sums, and the adaptive
//! integration ladder with three-level convergence detection.

use std::cmp::Ordering;
use std::sync::Arc;

use crate::error::{KsError, Result};
use crate::integrator::{Integrand, Integrator};
use crate::line::{IntervalSpec, Line, PointKey, Side};

/// Engine parameters. `singular_points` mark locations where the gauge
/// ladder shrinks quadratically faster (width span*4^-k instead of
/// span*2^-k), which is how non-uniform behavior (1/x^2-style integrands,
/// accumulation points of oscillation) is tamed in HK practice.
#[derive(Clone, Debug)]
pub struct EngineConfig {
    pub tol: f64,
    pub min_level: u32,
    pub max_level: u32,
    pub singular_points: Vec<PointKey>,
    pub divergence_bound: f64,
    pub max_cells: usize,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            tol: 1e-8,
            min_level: 3,
            max_level: 24,
            singular_points: Vec::new(),
            divergence_bound: 1e12,
            max_cells: 2_000_000,
        }
    }
}

impl EngineConfig {
    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_singular(mut self, pts: Vec<PointKey>) -> Self {
        self.singular_points = pts;
        self
    }

    pub fn with_max_level(mut self, l: u32) -> Self {
        self.max_level = l;
        self
    }

    pub fn with_divergence_bound(mut self, b: f64) -> Self {
        self.divergence_bound = b;
        self
    }
}

/// Assigns to each point an open interval containing it. `priority`
/// points must tag their own cells and are split at preferentially.
pub struct Gauge {
    pub description: String,
    at: Arc<dyn Fn(&PointKey) -> IntervalSpec + Send + Sync>,
    /// Sorted; cells around these points are tagged at them first.
    pub priority: Vec<PointKey>,
}

impl Gauge {
    pub fn new(
        description: impl Into<String>,
        at: impl Fn(&PointKey) -> IntervalSpec + Send + Sync + 'static,
    ) -> Gauge {
        Gauge { description: description.into(), at: Arc::new(at), priority: Vec::new() }
    }

    pub fn with_priority(mut self, line: &Line, mut pts: Vec<PointKey>) -> Gauge {
        let _ = line;
        pts.sort_by(|a, b| a.order(b));
        pts.dedup_by(|a, b| a.order(b) == Ordering::Equal);
        self.priority = pts;
        self
    }

    pub fn at(&self, p: &PointKey) -> IntervalSpec {
        (self.at)(p)
    }
}

/// One cell of a tagged partition: the closed interval [left, right]
/// with its tag.
#[derive(Clone, Copy, Debug)]
pub struct Cell {
    pub left: PointKey,
    pub right: PointKey,
    pub tag: PointKey,
}

#[derive(Clone, Debug, Default)]
pub struct TaggedPartition {
    pub cells: Vec<Cell>,
}

impl TaggedPartition {
    /// The underlying division 0_K = x_0 <= ... <= x_n = 1_K.
    pub fn division(&self) -> Vec<PointKey> {
        let mut d = Vec::with_capacity(self.cells.len() + 1);
        if let Some(first) = self.cells.first() {
            d.push(first.left);
        }
        for c in &self.cells {
            d.push(c.right);
        }
        d
    }

    pub fn validate(&self, line: &Line) -> Result<()> {
        if self.cells.is_empty() {
            return Err(KsError::Usage("empty partition".into()));
        }
        if self.cells[0].left != line.min_point() || self.cells.last().unwrap().right != line.max_point() {
            return Err(KsError::Usage("partition must cover the whole line".into()));
        }
        for c in &self.cells {
            if line.compare(&c.left, &c.right)? == Ordering::Greater {
                return Err(KsError::Usage("cell endpoints out of order".into()));
            }
            if c.tag.order(&c.left) == Ordering::Less || c.tag.order(&c.right) == Ordering::Greater {
                return Err(KsError::Usage("tag outside its cell".into()));
            }
        }
        for w in self.cells.windows(2) {
            if w[0].right != w[1].left {
                return Err(KsError::Usage("cells must be adjacent".into()));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Converged,
    Nonconverged,
    Diverging,
}

#[derive(Clone, Copy, Debug)]
pub struct LevelDiagnostic {
    pub level: u32,
    pub value: f64,
    /// |value - previous level value|; NaN at the first level.
    pub delta: f64,
}

#[derive(Clone, Debug)]
pub struct IntegralResult {
    pub value: f64,
    pub error_estimate: f64,
    pub levels_used: u32,
    pub verdict: Verdict,
    pub diagnostics: Vec<LevelDiagnostic>,
}

/// S(f, G, P) = f(0_K)G(0_K) + sum of f(t_i)(G(x_i) - G(x_{i-1})),
/// accumulated left to right (deterministic).
pub fn riemann_sum(line: &Line, f: &Integrand, g: &Integrator, p: &TaggedPartition) -> f64 {
    let min = line.min_point();
    let mut s = f.eval(line, &min) * g.eval(line, &min);
    let Some(first) = p.cells.first() else { return s };
    // adjacent cells share an endpoint; evaluate G once per division point
    let mut left_val = g.eval(line, &first.left);
    for c in &p.cells {
        let right_val = g.eval(line, &c.right);
        s += f.eval(line, &c.tag) * (right_val - left_val);
        left_val = right_val;
    }
    s
}

/// Delta-fineness: each cell, viewed as the half-open set (left, right],
/// must sit inside the gauge interval of its tag (the left endpoint of a
/// cell belongs to the preceding cell; the minimum is carried by the
/// standalone Riemann-sum term). Tags must also lie in their cells.
pub fn is_delta_fine(line: &Line, p: &TaggedPartition, gauge: &Gauge) -> Result<bool> {
    for c in &p.cells {
        if c.tag.order(&c.left) == Ordering::Less || c.tag.order(&c.right) == Ordering::Greater {
            return Ok(false);
        }
        if !line.half_open_subset(&c.left, &c.right, &gauge.at(&c.tag))? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Constructive Cousin lemma: builds a delta-fine tagged partition by
/// worklist bisection. For each segment, tags are tried in the order
/// priority point, interior midpoint, right endpoint, left endpoint;
/// failing all, the segment splits at a priority point when one is
/// interior, else at the midpoint. Interior-first tagging keeps the
/// generic cells second-order accurate, while priority points (declared
/// singularities, jumps, split copies, ordinal limits) always end up
/// tagging their own neighborhoods.
pub fn cousin_partition(line: &Line, gauge: &Gauge, max_cells: usize) -> Result<TaggedPartition> {
    let mut cells: Vec<Cell> = Vec::new();
    let mut stack: Vec<(PointKey, PointKey, u32)> = vec![(line.min_point(), line.max_point(), 0)];
    while let Some((a, b, depth)) = stack.pop() {
        let mut tag: Option<PointKey> = None;
        // priority points inside [a, b]
        let lo_idx = gauge.priority.partition_point(|p| p.order(&a) == Ordering::Less);
        for p in &gauge.priority[lo_idx..] {
            if p.order(&b) == Ordering::Greater {
                break;
            }
            if line.half_open_subset(&a, &b, &gauge.at(p))? {
                tag = Some(*p);
                break;
            }
        }
        if tag.is_none() {
            if let Some(m) = line.between(&a, &b)? {
                if line.half_open_subset(&a, &b, &gauge.at(&m))? {
                    tag = Some(m);
                }
            }
        }
        if tag.is_none() && line.half_open_subset(&a, &b, &gauge.at(&b))? {
            tag = Some(b);
        }
        if tag.is_none() && line.half_open_subset(&a, &b, &gauge.at(&a))? {
            tag = Some(a);
        }
        if let Some(t) = tag {
            cells.push(Cell { left: a, right: b, tag: t });
            continue;
        }
        if depth >= 80 || cells.len() + stack.len() > max_cells {
            return Err(KsError::Nonconvergence(format!(
                "cousin construction stuck on [{a}, {b}] (gauge {})",
                gauge.description
            )));
        }
        // split point: interior priority point if any, else midpoint
        let cut = {
            let mut interior = None;
            let lo_idx = gauge.priority.partition_point(|p| p.order(&a) != Ordering::Greater);
            let hi_idx = gauge.priority.partition_point(|p| p.order(&b) == Ordering::Less);
            if lo_idx < hi_idx {
                interior = Some(gauge.priority[(lo_idx + hi_idx) / 2]);
            }
            match interior {
                Some(c) => c,
                None => line.between(&a, &b)?.ok_or_else(|| {
                    KsError::Nonconvergence(format!(
                        "adjacent pair [{a}, {b}] fits no gauge interval; gauge {} is not legal",
                        gauge.description
                    ))
                })?,
            }
        };
        stack.push((cut, b, depth + 1));
        stack.push((a, cut, depth + 1));
    }
    Ok(TaggedPartition { cells })
}

/// Coordinate-addressed point, preferring the given side at split
/// coordinates (used for gauge interval endpoints).
fn pt_prefer(line: &Line, c: f64, side: Side) -> PointKey {
    match line {
        Line::Real { .. } => PointKey::Real(c),
        Line::Split { splits, .. } => {
            if splits.binary_search_by(|s| s.partial_cmp(&c).unwrap()).is_ok() {
                PointKey::Split { x: c, side }
            } else {
                PointKey::Split { x: c, side: Side::Whole }
            }
        }
        _ => unreachable!("pt_prefer only on coordinate lines"),
    }
}

/// The level-k gauge of the ladder. `anchors` are coordinates the widths
/// shrink toward (declared singular points, jumps, split coordinates).
/// `window` is the coordinate support of the integrand when known (set by
/// indicator integrals): outside it the gauge widens in proportion to the
/// distance, which is exact — off-window tags contribute 0 to every
/// Riemann sum — and keeps the cell count outside the window logarithmic.
pub fn gauge_for_level(
    line: &Line,
    level: u32,
    priority: &[PointKey],
    anchors: &[f64],
    window: Option<(f64, f64)>,
) -> Gauge {
    let line_cl = line.clone();
    let anchors = anchors.to_vec();
    let span = line.span();
    let at = move |p: &PointKey| -> IntervalSpec {
        match (&line_cl, p) {
            (Line::Finite { .. }, _) | (Line::Ordinal { .. }, PointKey::Ordinal { r: 1.., .. }) => {
                // isolated points (and the ordinal minimum below): singleton
                IntervalSpec::closed(*p, *p)
            }
            (Line::Ordinal { .. }, PointKey::Ordinal { q: 0, r: 0 }) => IntervalSpec::closed(*p, *p),
            (Line::Ordinal { limits, tail }, PointKey::Ordinal { q, r: 0 }) => {
                // limit point w*q: interval ((q-1, threshold), next)
                let threshold = 1u32 << level.min(16);
                let left = PointKey::Ordinal { q: q - 1, r: threshold };
                if *q == *limits && *tail == 0 {
                    IntervalSpec::half_open(left, *p)
                } else {
                    IntervalSpec::open(left, PointKey::Ordinal { q: *q, r: 1 })
                }
            }
            (Line::Real { lo, hi } | Line::Split { lo, hi, .. }, _) => {
                let c = line_cl.coord(p);
                let w = if anchors.is_empty() {
                    span * 0.5f64.powi(level.min(400) as i32)
                } else {
                    // Geometric shrink toward the nearest anchor with ratio
                    // theta = 2^(-level/2): cells per distance-octave stay
                    // ~1/theta, so refinement cost grows like 2^(level/2)
                    // per anchor instead of 2^level, while the floor
                    // span*2^-level keeps the gauge legal at the anchor
                    // itself. Far from all anchors the width is uniform,
                    // but never finer than 2^-14 of the window (the whole
                    // line when no window is set), so the far-field mesh and
                    // its sum contribution stabilize across deep levels.
                    let (wspan, wfrac) = match window {
                        Some((a, b)) => {
                            let ws = (b - a).max(span * 1e-12);
                            (ws, (ws / span).min(1.0))
                        }
                        None => (span, 1.0),
                    };
                    let floor = span * 0.5f64.powi(level.min(400) as i32);
                    let far = floor.max(wspan * 0.5f64.powi(14));
                    let theta = 0.5f64.powf(level.min(400) as f64 / 2.0);
                    let d = anchors.iter().map(|a| (c - a).abs()).fold(f64::INFINITY, f64::min);
                    if d == 0.0 {
                        // Anchor width scales with the window fraction so an
                        // interval endpoint's own cell can never swallow a
                        // narrow window: at level l it eats at most
                        // window*2^-l of it, which is also what makes the
                        // ladder deltas of indicator increments shrink.
                        // It is also capped at half the gap to the nearest
                        // other anchor, so no anchor's cell can swallow a
                        // neighboring anchor (e.g. a jump point right next
                        // to a window endpoint).
                        let d2 = anchors
                            .iter()
                            .map(|a| (c - a).abs())
                            .filter(|g| *g > 0.0)
                            .fold(f64::INFINITY, f64::min);
                        (floor * wfrac).min(0.5 * d2)
                    } else {
                        // w <= d/2: the open gauge interval of an off-anchor
                        // point must exclude every anchor (so cells that
                        // contain an anchor can only be tagged by it), and
                        // stopping halfway keeps any one cell from covering
                        // the whole gap next to an anchor — coverage there
                        // is forced through geometrically shrinking cells
                        // whose tags sit in the region they represent.
                        let mut w = far.min(floor.max(d * theta));
                        if let Some((wlo, whi)) = window {
                            let dist = (wlo - c).max(c - whi);
                            if dist > 0.0 {
                                // window endpoints are anchors, so the
                                // final cap keeps the widened gauge from
                                // crossing into the window
                                w = w.max(0.25 * dist);
                            }
                        }
                        w.min(0.5 * d)
                    }
                };
                // one-sided at split copies so the gauge separates the pair
                let (left, left_closed) = match p {
                    PointKey::Split { x, side: Side::Plus } => {
                        (PointKey::Split { x: *x, side: Side::Minus }, false)
                    }
                    _ => {
                        let a = c - w;
                        // strict overshoot clamps closed; landing exactly on
                        // the endpoint stays open so an anchor there is
                        // excluded from other points' gauges
                        if a < *lo {
                            (line_cl.min_point(), true)
                        } else {
                            (pt_prefer(&line_cl, a.max(*lo), Side::Plus), false)
                        }
                    }
                };
                let (right, right_closed) = match p {
                    PointKey::Split { x, side: Side::Minus } => {
                        (PointKey::Split { x: *x, side: Side::Plus }, false)
                    }
                    _ => {
                        let b = c + w;
                        if b > *hi {
                            (line_cl.max_point(), true)
                        } else {
                            (pt_prefer(&line_cl, b.min(*hi), Side::Minus), false)
                        }
                    }
                };
                IntervalSpec { left, left_closed, right, right_closed }
            }
            _ => unreachable!("point/line family mismatch in gauge"),
        }
    };
    Gauge::new(format!("ladder level {level}"), at).with_priority(line, priority.to_vec())
}

/// Structural priority points of a line: split copies and ordinal limits.
fn structural_priority(line: &Line) -> Vec<PointKey> {
    match line {
        Line::Split { splits, .. } => splits
            .iter()
            .flat_map(|s| {
                [PointKey::Split { x: *s, side: Side::Minus }, PointKey::Split { x: *s, side: Side::Plus }]
            })
            .collect(),
        Line::Ordinal { limits, tail } => {
            let mut v: Vec<PointKey> = (1..=*limits).map(|q| PointKey::Ordinal { q, r: 0 }).collect();
            let _ = tail;
            v.sort_by(|a, b| a.order(b));
            v
        }
        _ => Vec::new(),
    }
}

fn ladder_setup(
    line: &Line,
    g: &Integrator,
    cfg: &EngineConfig,
    extra: &[PointKey],
) -> (Vec<PointKey>, Vec<f64>) {
    let mut priority = structural_priority(line);
    priority.extend(cfg.singular_points.iter().copied());
    priority.extend(g.hints().iter().copied());
    priority.extend(g.jump_points());
    priority.extend(extra.iter().copied());
    priority.sort_by(|a, b| a.order(b));
    priority.dedup_by(|a, b| a.order(b) == Ordering::Equal);
    let anchors: Vec<f64> = match line {
        Line::Real { .. } | Line::Split { .. } => {
            let mut a: Vec<f64> = priority.iter().map(|p| line.coord(p)).collect();
            a.sort_by(f64::total_cmp);
            a.dedup();
            a
        }
        _ => Vec::new(),
    };
    (priority, anchors)
}

fn run_ladder(
    line: &Line,
    f: &Integrand,
    g: &Integrator,
    cfg: &EngineConfig,
    extra_priority: &[PointKey],
    window: Option<(f64, f64)>,
) -> Result<IntegralResult> {
    let (priority, anchors) = ladder_setup(line, g, cfg, extra_priority);
    let mut diagnostics: Vec<LevelDiagnostic> = Vec::new();
    let mut verdict = Verdict::Nonconverged;
    for level in cfg.min_level..=cfg.max_level {
        let gauge = gauge_for_level(line, level, &priority, &anchors, window);
        let part = cousin_partition(line, &gauge, cfg.max_cells)?;
        let value = riemann_sum(line, f, g, &part);
        let delta = diagnostics.last().map(|d| (value - d.value).abs()).unwrap_or(f64::NAN);
        diagnostics.push(LevelDiagnostic { level, value, delta });
        let n = diagnostics.len();
        if n >= 3 {
            let a = diagnostics[n - 3].value;
            let b = diagnostics[n - 2].value;
            let c = diagnostics[n - 1].value;
            if (a - b).abs() < cfg.tol && (b - c).abs() < cfg.tol && (a - c).abs() < cfg.tol {
                verdict = Verdict::Converged;
                break;
            }
        }
        if n >= 5 {
            let tail = &diagnostics[n - 5..];
            let growing = tail.windows(2).all(|w| w[1].value.abs() > w[0].value.abs());
            if growing && diagnostics[n - 1].value.abs() > cfg.divergence_bound {
                verdict = Verdict::Diverging;
                break;
            }
        }
    }
    let last = diagnostics.last().expect("at least one level");
    Ok(IntegralResult {
        value: last.value,
        error_estimate: if last.delta.is_nan() { f64::INFINITY } else { last.delta },
        levels_used: diagnostics.len() as u32,
        verdict,
        diagnostics,
    })
}

/// Adaptive evaluation of int_K f dG over the gauge ladder.
pub fn integrate(line: &Line, f: &Integrand, g: &Integrator, cfg: &EngineConfig) -> Result<IntegralResult> {
    run_ladder(line, f, g, cfg, &[], None)
}

/// int over I: integrates f*chi_I with the ladder additionally refined at
/// I's endpoints (singular points outside I are clamped to its nearest
/// endpoint, so refinement effort stays inside the window).
/// Conventions: int from 0_K to y = this on [0_K, y]; the two-endpoint
/// integral int_a^b for a > 0_K equals this on (a, b] plus f(a)G(a).
pub fn integrate_indicator(
    line: &Line,
    f: &Integrand,
    g: &Integrator,
    i: &IntervalSpec,
    cfg: &EngineConfig,
) -> Result<IntegralResult> {
    line.check_member(&i.left)?;
    line.check_member(&i.right)?;
    let restricted = f.restricted(*i);
    let mut cfg2 = cfg.clone();
    let lo = i.left;
    let hi = i.right;
    cfg2.singular_points = cfg
        .singular_points
        .iter()
        .map(|p| {
            if p.order(&lo) == Ordering::Less {
                lo
            } else if p.order(&hi) == Ordering::Greater {
                hi
            } else {
                *p
            }
        })
        .collect();
    cfg2.singular_points.push(lo);
    cfg2.singular_points.push(hi);
    let window = match line {
        Line::Real { .. } | Line::Split { .. } => Some((line.coord(&lo), line.coord(&hi))),
        _ => None,
    };
    run_ladder(line, &restricted, g, &cfg2, &[lo, hi], window)
}

/// Per-cell deviation sum from the Saks-Henstock analysis:
/// sum over cells of |f(t)(G(z) - G(y)) + f(y)G(y) - int_y^z f dG|,
/// where the subintegral follows the int_a^b convention above. The
/// `suboracle` supplies int_y^z f dG (see [`engine_suboracle`]).
pub fn saks_henstock_deviation(
    line: &Line,
    f: &Integrand,
    g: &Integrator,
    suboracle: impl Fn(&PointKey, &PointKey) -> Result<f64>,
    cells: &[Cell],
) -> Result<f64> {
    let mut dev = 0.0;
    for c in cells {
        if c.left.order(&c.right) == Ordering::Equal {
            continue;
        }
        let term = f.eval(line, &c.tag) * (g.eval(line, &c.right) - g.eval(line, &c.left))
            + f.eval(line, &c.left) * g.eval(line, &c.left)
            - suboracle(&c.left, &c.right)?;
        dev += term.abs();
    }
    Ok(dev)
}

/// Default subintegral oracle backed by the engine:
/// int_y^z f dG = int of f*chi_{(y,z]} + f(y)G(y).
pub fn engine_suboracle<'a>(
    line: &'a Line,
    f: &'a Integrand,
    g: &'a Integrator,
    cfg: &'a EngineConfig,
) -> impl Fn(&PointKey, &PointKey) -> Result<f64> + 'a {
    move |y: &PointKey, z: &PointKey| {
        let i = line.interval(*y, false, *z, true)?;
        let r = integrate_indicator(line, f, g, &i, cfg)?;
        Ok(r.value + f.eval(line, y) * g.eval(line, y))
    }
}
