//! Compact linearly ordered spaces ("compact lines") and their points.
//!
//! Four concrete families are supported:
//! * `Finite { n }` — the chain 0 < 1 < ... < n-1;
//! * `Real { lo, hi }` — a closed real interval;
//! * `Ordinal { limits: Q, tail: R }` — the ordinals up to and including
//!   w*Q + R, encoded as lexicographic pairs (q, r);
//! * `Split { lo, hi, splits }` — a real interval with each point s of a
//!   finite interior set doubled into adjacent copies s- < s+.
//!
//! Every line has a minimum `0_K` and a maximum `1_K` with `0_K < 1_K`.

use std::cmp::Ordering;
use std::fmt;

use crate::error::{KsError, Result};

/// Side tag for points of a split line. `Whole` is the only legal tag for
/// coordinates that are not split; split coordinates carry `Minus` or `Plus`.
/// The derived order `Minus < Whole < Plus` is what point comparison relies
/// on (a legal line never mixes `Whole` with `Minus`/`Plus` at one coordinate).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Side {
    Minus,
    Whole,
    Plus,
}

/// A point of some line, tagged by family.
#[derive(Clone, Copy, Debug)]
pub enum PointKey {
    Finite(u32),
    Real(f64),
    /// The ordinal w*q + r.
    Ordinal { q: u32, r: u32 },
    Split { x: f64, side: Side },
}

impl PointKey {
    pub fn ordinal(q: u32, r: u32) -> Self {
        PointKey::Ordinal { q, r }
    }

    pub fn split(x: f64, side: Side) -> Self {
        PointKey::Split { x, side }
    }

    fn family_name(&self) -> &'static str {
        match self {
            PointKey::Finite(_) => "finite",
            PointKey::Real(_) => "real",
            PointKey::Ordinal { .. } => "ordinal",
            PointKey::Split { .. } => "split",
        }
    }

    /// Total order within one family. Callers must have validated that both
    /// points live on the same line; mixed families are a programming error
    /// here (the public checked entry point is [`Line::compare`]).
    pub(crate) fn order(&self, other: &PointKey) -> Ordering {
        match (self, other) {
            (PointKey::Finite(a), PointKey::Finite(b)) => a.cmp(b),
            (PointKey::Real(a), PointKey::Real(b)) => {
                a.partial_cmp(b).expect("NaN coordinate")
            }
            (PointKey::Ordinal { q: q1, r: r1 }, PointKey::Ordinal { q: q2, r: r2 }) => {
                (q1, r1).cmp(&(q2, r2))
            }
            (PointKey::Split { x: x1, side: s1 }, PointKey::Split { x: x2, side: s2 }) => {
                match x1.partial_cmp(x2).expect("NaN coordinate") {
                    Ordering::Equal => s1.cmp(s2),
                    ord => ord,
                }
            }
            _ => panic!(
                "cannot order {} point against {} point",
                self.family_name(),
                other.family_name()
            ),
        }
    }
}

impl PartialEq for PointKey {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (PointKey::Finite(a), PointKey::Finite(b)) => a == b,
            (PointKey::Real(a), PointKey::Real(b)) => a == b,
            (PointKey::Ordinal { q: q1, r: r1 }, PointKey::Ordinal { q: q2, r: r2 }) => {
                q1 == q2 && r1 == r2
            }
            (PointKey::Split { x: x1, side: s1 }, PointKey::Split { x: x2, side: s2 }) => {
                x1 == x2 && s1 == s2
            }
            _ => false,
        }
    }
}

impl fmt::Display for PointKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PointKey::Finite(i) => write!(f, "{i}"),
            PointKey::Real(x) => write!(f, "{x}"),
            PointKey::Ordinal { q, r } => write!(f, "(w*{q}+{r})"),
            PointKey::Split { x, side } => match side {
                Side::Minus => write!(f, "{x}-"),
                Side::Plus => write!(f, "{x}+"),
                Side::Whole => write!(f, "{x}"),
            },
        }
    }
}

/// An interval of a line, given by two endpoints and closed/open flags.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntervalSpec {
    pub left: PointKey,
    pub left_closed: bool,
    pub right: PointKey,
    pub right_closed: bool,
}

impl IntervalSpec {
    pub fn closed(left: PointKey, right: PointKey) -> Self {
        IntervalSpec { left, left_closed: true, right, right_closed: true }
    }

    pub fn half_open(left: PointKey, right: PointKey) -> Self {
        IntervalSpec { left, left_closed: false, right, right_closed: true }
    }

    pub fn open(left: PointKey, right: PointKey) -> Self {
        IntervalSpec { left, left_closed: false, right, right_closed: false }
    }

    /// Set membership; both the interval and `p` must be from one line.
    pub fn contains(&self, p: &PointKey) -> bool {
        let lo = match self.left.order(p) {
            Ordering::Less => true,
            Ordering::Equal => self.left_closed,
            Ordering::Greater => false,
        };
        let hi = match p.order(&self.right) {
            Ordering::Less => true,
            Ordering::Equal => self.right_closed,
            Ordering::Greater => false,
        };
        lo && hi
    }
}

impl fmt::Display for IntervalSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}{}, {}{}",
            if self.left_closed { '[' } else { '(' },
            self.left,
            self.right,
            if self.right_closed { ']' } else { ')' },
        )
    }
}

/// A computable compact line. Construct through the checked constructors.
#[derive(Clone, Debug, PartialEq)]
pub enum Line {
    Finite { n: u32 },
    Real { lo: f64, hi: f64 },
    /// Ordinals up to and including w*limits + tail.
    Ordinal { limits: u32, tail: u32 },
    Split { lo: f64, hi: f64, splits: Vec<f64> },
}

impl Line {
    pub fn finite(n: u32) -> Result<Line> {
        if n < 2 {
            return Err(KsError::Usage(format!("finite line needs n >= 2, got {n}")));
        }
        Ok(Line::Finite { n })
    }

    pub fn real(lo: f64, hi: f64) -> Result<Line> {
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(KsError::Usage(format!("real line needs lo < hi, got [{lo}, {hi}]")));
        }
        Ok(Line::Real { lo, hi })
    }

    pub fn ordinal(limits: u32, tail: u32) -> Result<Line> {
        if limits + tail < 1 {
            return Err(KsError::Usage("ordinal line needs Q + R >= 1".into()));
        }
        Ok(Line::Ordinal { limits, tail })
    }

    pub fn split(lo: f64, hi: f64, splits: Vec<f64>) -> Result<Line> {
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(KsError::Usage(format!("split line needs lo < hi, got [{lo}, {hi}]")));
        }
        for w in splits.windows(2) {
            if !(w[0] < w[1]) {
                return Err(KsError::Usage("splits must be sorted and pairwise distinct".into()));
            }
        }
        if let (Some(first), Some(last)) = (splits.first(), splits.last()) {
            if !(lo < *first) || !(*last < hi) {
                return Err(KsError::Usage("splits must be strictly interior".into()));
            }
        }
        Ok(Line::Split { lo, hi, splits })
    }

    /// Convenience: the standard unit interval.
    pub fn unit() -> Line {
        Line::Real { lo: 0.0, hi: 1.0 }
    }

    pub fn min_point(&self) -> PointKey {
        match self {
            Line::Finite { .. } => PointKey::Finite(0),
            Line::Real { lo, .. } => PointKey::Real(*lo),
            Line::Ordinal { .. } => PointKey::Ordinal { q: 0, r: 0 },
            Line::Split { lo, .. } => PointKey::Split { x: *lo, side: Side::Whole },
        }
    }

    pub fn max_point(&self) -> PointKey {
        match self {
            Line::Finite { n } => PointKey::Finite(n - 1),
            Line::Real { hi, .. } => PointKey::Real(*hi),
            Line::Ordinal { limits, tail } => PointKey::Ordinal { q: *limits, r: *tail },
            Line::Split { hi, .. } => PointKey::Split { x: *hi, side: Side::Whole },
        }
    }

    pub fn is_min(&self, p: &PointKey) -> bool {
        *p == self.min_point()
    }

    pub fn is_max(&self, p: &PointKey) -> bool {
        *p == self.max_point()
    }

    pub fn splits(&self) -> &[f64] {
        match self {
            Line::Split { splits, .. } => splits,
            _ => &[],
        }
    }

    pub fn contains(&self, p: &PointKey) -> bool {
        match (self, p) {
            (Line::Finite { n }, PointKey::Finite(i)) => *i < *n,
            (Line::Real { lo, hi }, PointKey::Real(x)) => x.is_finite() && *lo <= *x && *x <= *hi,
            (Line::Ordinal { limits, tail }, PointKey::Ordinal { q, r }) => {
                *q < *limits || (*q == *limits && *r <= *tail)
            }
            (Line::Split { lo, hi, splits }, PointKey::Split { x, side }) => {
                if !x.is_finite() || *x < *lo || *x > *hi {
                    return false;
                }
                let is_split = splits.binary_search_by(|s| s.partial_cmp(x).unwrap()).is_ok();
                if is_split { *side != Side::Whole } else { *side == Side::Whole }
            }
            _ => false,
        }
    }

    pub fn check_member(&self, p: &PointKey) -> Result<()> {
        if self.contains(p) {
            Ok(())
        } else {
            Err(KsError::Usage(format!("point {p} does not belong to the line")))
        }
    }

    /// Checked total-order comparison of two points of this line.
    pub fn compare(&self, p: &PointKey, q: &PointKey) -> Result<Ordering> {
        self.check_member(p)?;
        self.check_member(q)?;
        Ok(p.order(q))
    }

    /// Order-monotone real coordinate, used to feed scalar functions.
    /// Both copies of a split coordinate map to the same real; ordinal
    /// points (q, r) embed as q + (1 - 2^-r).
    pub fn coord(&self, p: &PointKey) -> f64 {
        match p {
            PointKey::Finite(i) => *i as f64,
            PointKey::Real(x) => *x,
            PointKey::Ordinal { q, r } => *q as f64 + (1.0 - 0.5f64.powi((*r).min(60) as i32)),
            PointKey::Split { x, .. } => *x,
        }
    }

    /// Width of the coordinate range, for gauge scaling.
    pub fn span(&self) -> f64 {
        self.coord(&self.max_point()) - self.coord(&self.min_point())
    }

    /// Map a real coordinate back to a point. Split coordinates are rejected
    /// (the caller must pick a side); ordinal lines are not coordinate-addressable.
    pub fn point_at(&self, c: f64) -> Result<PointKey> {
        match self {
            Line::Finite { n } => {
                let i = c.round();
                if (i - c).abs() > 1e-9 || i < 0.0 || i >= *n as f64 {
                    return Err(KsError::Usage(format!("{c} is not a point index of the finite line")));
                }
                Ok(PointKey::Finite(i as u32))
            }
            Line::Real { lo, hi } => {
                if c < *lo || c > *hi || !c.is_finite() {
                    return Err(KsError::Usage(format!("{c} outside [{lo}, {hi}]")));
                }
                Ok(PointKey::Real(c))
            }
            Line::Ordinal { .. } => Err(KsError::Usage(
                "ordinal points must be addressed as (q, r) pairs".into(),
            )),
            Line::Split { lo, hi, splits } => {
                if c < *lo || c > *hi || !c.is_finite() {
                    return Err(KsError::Usage(format!("{c} outside [{lo}, {hi}]")));
                }
                if splits.binary_search_by(|s| s.partial_cmp(&c).unwrap()).is_ok() {
                    return Err(KsError::Usage(format!(
                        "{c} is a split coordinate; specify side minus or plus"
                    )));
                }
                Ok(PointKey::Split { x: c, side: Side::Whole })
            }
        }
    }

    /// Does `p` have an immediate predecessor? The minimum reports `false`
    /// by convention (there is nothing to its left); query `is_min` separately.
    pub fn is_left_isolated(&self, p: &PointKey) -> Result<bool> {
        self.check_member(p)?;
        if self.is_min(p) {
            return Ok(false);
        }
        Ok(match p {
            PointKey::Finite(_) => true,
            PointKey::Real(_) => false,
            PointKey::Ordinal { r, .. } => *r > 0,
            PointKey::Split { side, .. } => *side == Side::Plus,
        })
    }

    /// Does `p` have an immediate successor? The maximum reports `false`.
    pub fn is_right_isolated(&self, p: &PointKey) -> Result<bool> {
        self.check_member(p)?;
        if self.is_max(p) {
            return Ok(false);
        }
        Ok(match p {
            PointKey::Finite(_) => true,
            PointKey::Real(_) => false,
            // every non-maximal ordinal has a successor
            PointKey::Ordinal { .. } => true,
            PointKey::Split { side, .. } => *side == Side::Minus,
        })
    }

    pub fn is_left_dense(&self, p: &PointKey) -> Result<bool> {
        Ok(!self.is_min(p) && !self.is_left_isolated(p)?)
    }

    pub fn is_right_dense(&self, p: &PointKey) -> Result<bool> {
        Ok(!self.is_max(p) && !self.is_right_isolated(p)?)
    }

    pub fn predecessor(&self, p: &PointKey) -> Result<PointKey> {
        if !self.is_left_isolated(p)? {
            return Err(KsError::Precondition(format!("{p} has no immediate predecessor")));
        }
        Ok(match p {
            PointKey::Finite(i) => PointKey::Finite(i - 1),
            PointKey::Ordinal { q, r } => PointKey::Ordinal { q: *q, r: r - 1 },
            PointKey::Split { x, .. } => PointKey::Split { x: *x, side: Side::Minus },
            PointKey::Real(_) => unreachable!(),
        })
    }

    pub fn successor(&self, p: &PointKey) -> Result<PointKey> {
        if !self.is_right_isolated(p)? {
            return Err(KsError::Precondition(format!("{p} has no immediate successor")));
        }
        Ok(match p {
            PointKey::Finite(i) => PointKey::Finite(i + 1),
            PointKey::Ordinal { q, r } => PointKey::Ordinal { q: *q, r: r + 1 },
            PointKey::Split { x, .. } => PointKey::Split { x: *x, side: Side::Plus },
            PointKey::Real(_) => unreachable!(),
        })
    }

    /// A deterministic point strictly between `a` and `b`, or `None` when
    /// `b` is the immediate successor of `a`. Real and split lines take the
    /// coordinate midpoint; ordinal lines prefer the limit landmark (q', 0).
    pub fn between(&self, a: &PointKey, b: &PointKey) -> Result<Option<PointKey>> {
        if self.compare(a, b)? != Ordering::Less {
            return Err(KsError::Usage(format!("between requires {a} < {b}")));
        }
        Ok(match (a, b) {
            (PointKey::Finite(i), PointKey::Finite(j)) => {
                if j - i == 1 { None } else { Some(PointKey::Finite((i + j) / 2)) }
            }
            (PointKey::Real(x), PointKey::Real(y)) => {
                let m = 0.5 * (x + y);
                if m > *x && m < *y { Some(PointKey::Real(m)) } else { None }
            }
            (PointKey::Ordinal { q: q1, r: r1 }, PointKey::Ordinal { q: q2, r: r2 }) => {
                if q2 > q1 && *r2 >= 1 {
                    // the limit landmark lies strictly between
                    Some(PointKey::Ordinal { q: *q2, r: 0 })
                } else if *q2 > q1 + 1 {
                    // b = (q2, 0): an earlier limit landmark intervenes
                    Some(PointKey::Ordinal { q: q2 - 1, r: 0 })
                } else if q2 > q1 {
                    // b is the very next limit, reached by no finite step;
                    // double toward it so repeated halving terminates
                    Some(PointKey::Ordinal { q: *q1, r: r1.saturating_mul(2).saturating_add(1) })
                } else if r2 - r1 > 1 {
                    Some(PointKey::Ordinal { q: *q1, r: r1 + (r2 - r1) / 2 })
                } else {
                    None
                }
            }
            (PointKey::Split { x, side: sa }, PointKey::Split { x: y, side: sb }) => {
                if x == y {
                    // (s, minus) and (s, plus) are adjacent
                    None
                } else {
                    let m = 0.5 * (x + y);
                    if m > *x && m < *y {
                        let side = if self.splits().binary_search_by(|s| s.partial_cmp(&m).unwrap()).is_ok() {
                            Side::Minus
                        } else {
                            Side::Whole
                        };
                        Some(PointKey::Split { x: m, side })
                    } else if *sa == Side::Minus {
                        // float midpoint collapsed; the plus copy may still fit
                        let c = PointKey::Split { x: *x, side: Side::Plus };
                        if c.order(b) == Ordering::Less { Some(c) } else { None }
                    } else if *sb == Side::Plus {
                        let c = PointKey::Split { x: *y, side: Side::Minus };
                        if a.order(&c) == Ordering::Less { Some(c) } else { None }
                    } else {
                        None
                    }
                }
            }
            _ => unreachable!("compare validated families"),
        })
    }

    /// Nearest lower "landmark" coordinate: the closest split strictly below
    /// `x`, or the left endpoint. Approach ladders shrink toward it.
    fn floor_landmark(&self, x: f64) -> f64 {
        let lo = self.coord(&self.min_point());
        let mut best = lo;
        for s in self.splits() {
            if *s < x && *s > best {
                best = *s;
            }
        }
        best
    }

    fn ceil_landmark(&self, x: f64) -> f64 {
        let hi = self.coord(&self.max_point());
        let mut best = hi;
        for s in self.splits() {
            if *s > x && *s < best {
                best = *s;
            }
        }
        best
    }

    /// Level-k member of a strictly increasing ladder with supremum `p`;
    /// defined exactly for left-dense `p`. Real and split lines step to
    /// `p - gap * 2^-k` where `gap` reaches to the nearest lower split or
    /// endpoint; the limit ordinal (q, 0) descends to (q-1, k).
    pub fn left_approach(&self, p: &PointKey, k: u32) -> Result<PointKey> {
        if !self.is_left_dense(p)? {
            return Err(KsError::Precondition(format!("{p} is not left-dense")));
        }
        if k < 1 {
            return Err(KsError::Usage("approach level must be >= 1".into()));
        }
        Ok(match p {
            PointKey::Real(x) => {
                let gap = x - self.floor_landmark(*x);
                PointKey::Real(x - gap * 0.5f64.powi(k.min(1000) as i32))
            }
            PointKey::Split { x, .. } => {
                let gap = x - self.floor_landmark(*x);
                PointKey::Split { x: x - gap * 0.5f64.powi(k.min(1000) as i32), side: Side::Whole }
            }
            PointKey::Ordinal { q, .. } => PointKey::Ordinal { q: q - 1, r: k },
            PointKey::Finite(_) => unreachable!("finite points are never left-dense"),
        })
    }

    /// Dual of `left_approach`: strictly decreasing ladder with infimum `p`.
    pub fn right_approach(&self, p: &PointKey, k: u32) -> Result<PointKey> {
        if !self.is_right_dense(p)? {
            return Err(KsError::Precondition(format!("{p} is not right-dense")));
        }
        if k < 1 {
            return Err(KsError::Usage("approach level must be >= 1".into()));
        }
        Ok(match p {
            PointKey::Real(x) => {
                let gap = self.ceil_landmark(*x) - x;
                PointKey::Real(x + gap * 0.5f64.powi(k.min(1000) as i32))
            }
            PointKey::Split { x, .. } => {
                let gap = self.ceil_landmark(*x) - x;
                PointKey::Split { x: x + gap * 0.5f64.powi(k.min(1000) as i32), side: Side::Whole }
            }
            _ => unreachable!("ordinal/finite points are never right-dense"),
        })
    }

    pub fn interval(
        &self,
        left: PointKey,
        left_closed: bool,
        right: PointKey,
        right_closed: bool,
    ) -> Result<IntervalSpec> {
        match self.compare(&left, &right)? {
            Ordering::Greater => {
                return Err(KsError::Usage(format!("interval endpoints out of order: {left} > {right}")))
            }
            Ordering::Equal if !(left_closed && right_closed) => {
                return Err(KsError::Usage("degenerate interval must be closed on both sides".into()))
            }
            _ => {}
        }
        Ok(IntervalSpec { left, left_closed, right, right_closed })
    }

    pub fn whole_interval(&self) -> IntervalSpec {
        IntervalSpec::closed(self.min_point(), self.max_point())
    }

    /// Is the point set of `I` topologically open in the line?
    pub fn is_open_interval(&self, i: &IntervalSpec) -> Result<bool> {
        self.check_member(&i.left)?;
        self.check_member(&i.right)?;
        let left_ok = !i.left_closed || self.is_min(&i.left) || self.is_left_isolated(&i.left)?;
        let right_ok = !i.right_closed || self.is_max(&i.right) || self.is_right_isolated(&i.right)?;
        Ok(left_ok && right_ok)
    }

    /// Rewrite an open interval into its canonical representation:
    /// left side `[0_K, .` / `(a, .` / `(a-, .`; right side `., b]` /
    /// `., b-]` / `., b)` with the last form only for left-dense `b`.
    /// Canonical forms of disjoint intervals never share an endpoint.
    pub fn canonicalize(&self, i: &IntervalSpec) -> Result<IntervalSpec> {
        if !self.is_open_interval(i)? {
            return Err(KsError::Representation(format!(
                "{i} is not an open subset of the line and cannot be canonicalized"
            )));
        }
        // Left side: if the endpoint itself belongs, slide to its predecessor
        // (or anchor at the minimum); otherwise keep it as an open bound.
        let (left, left_closed) = if i.left_closed {
            if self.is_min(&i.left) {
                (i.left, true)
            } else {
                (self.predecessor(&i.left)?, false)
            }
        } else {
            (i.left, false)
        };
        // Right side: member endpoints close; excluded left-isolated endpoints
        // retreat to the predecessor; excluded left-dense endpoints stay open.
        let (right, right_closed) = if i.right_closed {
            (i.right, true)
        } else if self.is_left_isolated(&i.right)? {
            (self.predecessor(&i.right)?, true)
        } else {
            (i.right, false)
        };
        let ok = match left.order(&right) {
            Ordering::Less => true,
            Ordering::Equal => left_closed && right_closed,
            Ordering::Greater => false,
        };
        if !ok {
            return Err(KsError::Usage(format!("{i} denotes the empty set")));
        }
        Ok(IntervalSpec { left, left_closed, right, right_closed })
    }

    /// Form check for the canonical interval algebra used by the induced
    /// measures: nonempty; closed on the left only at the minimum; open on
    /// the right only at left-dense points (an excluded left-isolated
    /// endpoint must be written as closed at its predecessor). This is
    /// wider than the image of [`Line::canonicalize`]: `(a, b]` with `b`
    /// left-dense is canonical here even though no open set rewrites to
    /// it, because `mu_G` is defined on all such intervals.
    pub fn is_canonical(&self, i: &IntervalSpec) -> Result<bool> {
        self.check_member(&i.left)?;
        self.check_member(&i.right)?;
        let nonempty = match i.left.order(&i.right) {
            Ordering::Less => true,
            Ordering::Equal => i.left_closed && i.right_closed,
            Ordering::Greater => false,
        };
        let left_ok = !i.left_closed || self.is_min(&i.left);
        let right_ok = i.right_closed || self.is_left_dense(&i.right)?;
        Ok(nonempty && left_ok && right_ok)
    }

    /// Is the half-open interval (a, b] contained in `j`? This is the
    /// containment test behind delta-fineness: the left endpoint of a cell
    /// is accounted for by the previous cell (or by the standalone
    /// f(0_K)G(0_K) term), so only the set (a, b] must sit inside the gauge
    /// interval. Degenerate cells (a = b) are vacuously contained.
    pub fn half_open_subset(&self, a: &PointKey, b: &PointKey, j: &IntervalSpec) -> Result<bool> {
        match self.compare(a, b)? {
            Ordering::Greater => Err(KsError::Usage(format!("half-open interval needs {a} <= {b}"))),
            Ordering::Equal => Ok(true),
            Ordering::Less => {
                if !j.contains(b) {
                    return Ok(false);
                }
                if j.left.order(a) != Ordering::Greater {
                    return Ok(true);
                }
                // j starts above a: (a, b] still fits when nothing lies
                // between a and j's start, i.e. a has a successor inside j.
                Ok(self.is_right_isolated(a)? && j.contains(&self.successor(a)?))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit() -> Line {
        Line::unit()
    }

    fn split_half() -> Line {
        Line::split(0.0, 1.0, vec![0.5]).unwrap()
    }

    #[test]
    fn compare_families() {
        let l = Line::ordinal(1, 3).unwrap();
        assert_eq!(
            l.compare(&PointKey::ordinal(0, 3), &PointKey::ordinal(1, 0)).unwrap(),
            Ordering::Less
        );
        let s = split_half();
        assert_eq!(
            s.compare(
                &PointKey::split(0.5, Side::Minus),
                &PointKey::split(0.5, Side::Plus)
            )
            .unwrap(),
            Ordering::Less
        );
        assert_eq!(
            unit().compare(&PointKey::Real(0.25), &PointKey::Real(0.25)).unwrap(),
            Ordering::Equal
        );
    }

    #[test]
    fn mixed_family_compare_is_usage_error() {
        let l = unit();
        assert!(l.compare(&PointKey::Real(0.5), &PointKey::Finite(1)).is_err());
    }

    #[test]
    fn isolation_queries() {
        let f = Line::finite(5).unwrap();
        assert!(f.is_left_isolated(&PointKey::Finite(3)).unwrap());
        assert_eq!(f.predecessor(&PointKey::Finite(3)).unwrap(), PointKey::Finite(2));

        let o = Line::ordinal(1, 3).unwrap();
        assert!(!o.is_left_isolated(&PointKey::ordinal(1, 0)).unwrap());
        assert!(o.is_left_dense(&PointKey::ordinal(1, 0)).unwrap());

        let s = split_half();
        let plus = PointKey::split(0.5, Side::Plus);
        assert!(s.is_left_isolated(&plus).unwrap());
        assert_eq!(s.predecessor(&plus).unwrap(), PointKey::split(0.5, Side::Minus));
    }

    #[test]
    fn successor_predecessor() {
        let f = Line::finite(5).unwrap();
        assert_eq!(f.successor(&PointKey::Finite(2)).unwrap(), PointKey::Finite(3));
        let o = Line::ordinal(1, 3).unwrap();
        assert_eq!(o.predecessor(&PointKey::ordinal(1, 3)).unwrap(), PointKey::ordinal(1, 2));
        let s = split_half();
        assert_eq!(
            s.successor(&PointKey::split(0.5, Side::Minus)).unwrap(),
            PointKey::split(0.5, Side::Plus)
        );
        assert!(unit().predecessor(&PointKey::Real(0.5)).is_err());
    }

    #[test]
    fn between_cases() {
        let r = unit();
        assert_eq!(
            r.between(&PointKey::Real(0.0), &PointKey::Real(1.0)).unwrap(),
            Some(PointKey::Real(0.5))
        );
        let f = Line::finite(5).unwrap();
        assert_eq!(f.between(&PointKey::Finite(2), &PointKey::Finite(3)).unwrap(), None);
        let o = Line::ordinal(1, 2).unwrap();
        assert_eq!(
            o.between(&PointKey::ordinal(0, 5), &PointKey::ordinal(1, 1)).unwrap(),
            Some(PointKey::ordinal(1, 0))
        );
        let s = split_half();
        assert_eq!(
            s.between(&PointKey::split(0.5, Side::Minus), &PointKey::split(0.5, Side::Plus))
                .unwrap(),
            None
        );
    }

    #[test]
    fn approach_ladders() {
        let r = unit();
        assert_eq!(
            r.left_approach(&PointKey::Real(1.0), 3).unwrap(),
            PointKey::Real(0.875)
        );
        let o = Line::ordinal(1, 0).unwrap();
        assert_eq!(
            o.left_approach(&PointKey::ordinal(1, 0), 4).unwrap(),
            PointKey::ordinal(0, 4)
        );
        let s = split_half();
        assert_eq!(
            s.left_approach(&PointKey::split(0.5, Side::Minus), 2).unwrap(),
            PointKey::split(0.375, Side::Whole)
        );
        // ladder above a split shrinks toward the plus copy
        assert_eq!(
            s.right_approach(&PointKey::split(0.5, Side::Plus), 1).unwrap(),
            PointKey::split(0.75, Side::Whole)
        );
        assert!(r.left_approach(&PointKey::Real(0.0), 1).is_err());
    }

    #[test]
    fn canonicalize_cases() {
        let r = unit();
        let i = IntervalSpec::open(PointKey::Real(0.2), PointKey::Real(0.7));
        assert_eq!(r.canonicalize(&i).unwrap(), i);

        let s = split_half();
        let i = IntervalSpec::open(
            PointKey::split(0.2, Side::Whole),
            PointKey::split(0.5, Side::Plus),
        );
        let c = s.canonicalize(&i).unwrap();
        assert_eq!(
            c,
            IntervalSpec::half_open(
                PointKey::split(0.2, Side::Whole),
                PointKey::split(0.5, Side::Minus)
            )
        );
        assert!(s.is_canonical(&c).unwrap());

        let f = Line::finite(6).unwrap();
        let i = IntervalSpec {
            left: PointKey::Finite(0),
            left_closed: true,
            right: PointKey::Finite(3),
            right_closed: false,
        };
        let c = f.canonicalize(&i).unwrap();
        assert_eq!(c, IntervalSpec::closed(PointKey::Finite(0), PointKey::Finite(2)));
    }

    #[test]
    fn canonicalize_rejects_non_open() {
        let r = unit();
        let i = IntervalSpec::closed(PointKey::Real(0.2), PointKey::Real(0.7));
        assert!(matches!(r.canonicalize(&i), Err(KsError::Representation(_))));
    }

    #[test]
    fn canonicalize_idempotent_singleton() {
        let f = Line::finite(4).unwrap();
        let i = IntervalSpec::closed(PointKey::Finite(2), PointKey::Finite(2));
        let c = f.canonicalize(&i).unwrap();
        assert_eq!(c, IntervalSpec::half_open(PointKey::Finite(1), PointKey::Finite(2)));
        assert_eq!(f.canonicalize(&c).unwrap(), c);
    }

    #[test]
    fn half_open_containment() {
        let f = Line::finite(3).unwrap();
        let singleton = |i: u32| IntervalSpec::closed(PointKey::Finite(i), PointKey::Finite(i));
        // ({0}, {1}] = {1} fits in the singleton gauge at 1 but not at 0
        assert!(f
            .half_open_subset(&PointKey::Finite(0), &PointKey::Finite(1), &singleton(1))
            .unwrap());
        assert!(!f
            .half_open_subset(&PointKey::Finite(0), &PointKey::Finite(1), &singleton(0))
            .unwrap());
        // degenerate
        assert!(f
            .half_open_subset(&PointKey::Finite(0), &PointKey::Finite(0), &singleton(2))
            .unwrap());
    }
}
