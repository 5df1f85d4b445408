//! Calculus on time scales.
//!
//! A [`TimeScale`] is a finite, sorted union of disjoint closed intervals,
//! optionally repeated with a fixed period. Degenerate intervals `[a, a]` are
//! isolated points, so `ℤ` is `{[0,0]}` with period 1 and `[0,1] ∪ {2}` is
//! `{[0,1], [2,2]}` with no period.
//!
//! Membership and point classification compare stored endpoint values
//! exactly. Periodic copies are always produced by the same expression
//! `x + k·L`, so points obtained from the scale test as members of it.
//! The forward gap `σ(t) - t` at a scattered point (the graininess) is
//! computed from the base piece list, never by subtracting absolute
//! coordinates, so on `aℤ` it is exactly `a`.
//!
//! A bounded scale has a largest and a smallest point. There `σ` (resp. `ρ`)
//! returns the point itself and the side is reported as
//! [`Side::Boundary`]; delta (resp. nabla) derivatives are undefined.

mod grid;

pub use grid::{Axis, AxisPoint, DenseStencil, Direction, FieldValue, GridDomain, GridDomainSpec, GridFunction, Step};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TimeScaleError {
    #[error("{0} is not a point of the time scale")]
    NotInScale(f64),
    #[error("{0} is a boundary point of the realized scale; the one-sided derivative is undefined")]
    BoundaryPoint(f64),
    #[error("Richardson extrapolation did not reach tolerance {tol:e} (last change {last:e})")]
    NoConvergence { tol: f64, last: f64 },
    #[error("grid index ({0}, {1}) has no forward neighbour in the requested direction")]
    BoundaryIndex(usize, usize),
    #[error("invalid time scale: {0}")]
    Invalid(String),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
}

/// Closed interval `[lo, hi]`; `lo == hi` is an isolated point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl From<[f64; 2]> for Interval {
    fn from(a: [f64; 2]) -> Self {
        Interval { lo: a[0], hi: a[1] }
    }
}

impl From<Interval> for [f64; 2] {
    fn from(i: Interval) -> Self {
        [i.lo, i.hi]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Period {
    pub length: f64,
}

/// How a point relates to its neighbours on one side.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Dense,
    Scattered,
    /// End of a bounded scale; the jump operator is the identity there.
    Boundary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PointClass {
    pub left: Side,
    pub right: Side,
}

impl PointClass {
    pub fn is_right_scattered(self) -> bool {
        self.right == Side::Scattered
    }

    pub fn is_right_dense(self) -> bool {
        self.right == Side::Dense
    }

    pub fn is_left_scattered(self) -> bool {
        self.left == Side::Scattered
    }

    pub fn is_left_dense(self) -> bool {
        self.left == Side::Dense
    }

    /// Neither side is dense.
    pub fn is_isolated(self) -> bool {
        self.left != Side::Dense && self.right != Side::Dense
    }

    pub fn is_dense_both(self) -> bool {
        self.left == Side::Dense && self.right == Side::Dense
    }

    pub fn label(self) -> &'static str {
        use Side::*;
        match (self.left, self.right) {
            (Dense, Dense) => "dense",
            (Dense, Scattered) => "right-scattered",
            (Scattered, Dense) => "left-scattered",
            (Dense, Boundary) => "right-boundary",
            (Boundary, Dense) => "left-boundary",
            _ => "isolated",
        }
    }
}

/// Result of a jump operator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Jump {
    /// `σ(t) = t` (resp. `ρ(t) = t`) because the point is dense on that side.
    Dense,
    /// Jump to `point`; `gap = |point - t|` computed structurally.
    Scattered { point: f64, gap: f64 },
    Boundary,
}

/// Position of a point: piece index and period shift.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Locus {
    piece: usize,
    shift: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TimeScaleRepr", into = "TimeScaleRepr")]
pub struct TimeScale {
    pieces: Vec<Interval>,
    period: Option<f64>,
}

#[derive(Serialize, Deserialize)]
struct TimeScaleRepr {
    pieces: Vec<Interval>,
    #[serde(default)]
    period: Option<Period>,
}

impl TryFrom<TimeScaleRepr> for TimeScale {
    type Error = TimeScaleError;

    fn try_from(r: TimeScaleRepr) -> Result<Self, Self::Error> {
        TimeScale::new(r.pieces, r.period.map(|p| p.length))
    }
}

impl From<TimeScale> for TimeScaleRepr {
    fn from(ts: TimeScale) -> Self {
        TimeScaleRepr { pieces: ts.pieces, period: ts.period.map(|length| Period { length }) }
    }
}

/// Richardson table depth for one-sided limits.
const MAX_RICHARDSON_LEVELS: usize = 14;

impl TimeScale {
    pub fn new(pieces: Vec<Interval>, period: Option<f64>) -> Result<Self, TimeScaleError> {
        let invalid = |m: &str| Err(TimeScaleError::Invalid(m.to_string()));
        if pieces.is_empty() {
            return invalid("no pieces");
        }
        for p in &pieces {
            if !(p.lo.is_finite() && p.hi.is_finite()) {
                return invalid("non-finite endpoint");
            }
            if p.lo > p.hi {
                return invalid("interval with lo > hi");
            }
        }
        for w in pieces.windows(2) {
            if !(w[0].hi < w[1].lo) {
                return invalid("pieces must be sorted and pairwise disjoint");
            }
        }
        if let Some(l) = period {
            if !(l.is_finite() && l > 0.0) {
                return invalid("period length must be positive");
            }
            let first = pieces[0].lo;
            let last = pieces[pieces.len() - 1].hi;
            if !(last < first + l) {
                return invalid("pieces must fit strictly inside one period");
            }
        }
        Ok(TimeScale { pieces, period })
    }

    /// The lattice `aℤ`.
    pub fn lattice(a: f64) -> Result<Self, TimeScaleError> {
        TimeScale::new(vec![Interval { lo: 0.0, hi: 0.0 }], Some(a))
    }

    pub fn integers() -> Self {
        TimeScale::lattice(1.0).expect("valid")
    }

    /// A single closed interval `[lo, hi]`.
    pub fn interval(lo: f64, hi: f64) -> Result<Self, TimeScaleError> {
        TimeScale::new(vec![Interval { lo, hi }], None)
    }

    /// Finite set of isolated points (sorted, distinct).
    pub fn points(points: &[f64]) -> Result<Self, TimeScaleError> {
        TimeScale::new(points.iter().map(|&p| Interval { lo: p, hi: p }).collect(), None)
    }

    pub fn pieces(&self) -> &[Interval] {
        &self.pieces
    }

    pub fn period(&self) -> Option<f64> {
        self.period
    }

    /// Translate a base-piece coordinate by `k` periods.
    #[inline]
    fn shifted(&self, x: f64, k: i64) -> f64 {
        match self.period {
            Some(l) if k != 0 => x + k as f64 * l,
            _ => x,
        }
    }

    fn bounds(&self, loc: Locus) -> (f64, f64) {
        let p = self.pieces[loc.piece];
        (self.shifted(p.lo, loc.shift), self.shifted(p.hi, loc.shift))
    }

    fn locate(&self, t: f64) -> Option<Locus> {
        if !t.is_finite() {
            return None;
        }
        let find = |shift: i64| {
            self.pieces.iter().enumerate().find_map(|(piece, _)| {
                let loc = Locus { piece, shift };
                let (lo, hi) = self.bounds(loc);
                (lo <= t && t <= hi).then_some(loc)
            })
        };
        match self.period {
            None => find(0),
            Some(l) => {
                let k0 = ((t - self.pieces[0].lo) / l).floor();
                if !k0.is_finite() || k0.abs() > 1e15 {
                    return None;
                }
                let k0 = k0 as i64;
                (k0 - 1..=k0 + 1).find_map(find)
            }
        }
    }

    pub fn contains(&self, t: f64) -> bool {
        self.locate(t).is_some()
    }

    fn next_locus(&self, loc: Locus) -> Option<Locus> {
        if loc.piece + 1 < self.pieces.len() {
            Some(Locus { piece: loc.piece + 1, shift: loc.shift })
        } else if self.period.is_some() {
            Some(Locus { piece: 0, shift: loc.shift + 1 })
        } else {
            None
        }
    }

    fn prev_locus(&self, loc: Locus) -> Option<Locus> {
        if loc.piece > 0 {
            Some(Locus { piece: loc.piece - 1, shift: loc.shift })
        } else if self.period.is_some() {
            Some(Locus { piece: self.pieces.len() - 1, shift: loc.shift - 1 })
        } else {
            None
        }
    }

    /// Gap between the end of `loc` and the start of the following piece,
    /// from base coordinates.
    fn forward_gap(&self, loc: Locus) -> f64 {
        let cur = self.pieces[loc.piece];
        if loc.piece + 1 < self.pieces.len() {
            self.pieces[loc.piece + 1].lo - cur.hi
        } else {
            let l = self.period.expect("wrap requires a period");
            (self.pieces[0].lo + l) - cur.hi
        }
    }

    fn backward_gap(&self, loc: Locus) -> f64 {
        let cur = self.pieces[loc.piece];
        if loc.piece > 0 {
            cur.lo - self.pieces[loc.piece - 1].hi
        } else {
            let l = self.period.expect("wrap requires a period");
            (cur.lo + l) - self.pieces[self.pieces.len() - 1].hi
        }
    }

    /// Forward jump with its structural gap.
    pub fn forward_jump(&self, t: f64) -> Result<Jump, TimeScaleError> {
        let loc = self.locate(t).ok_or(TimeScaleError::NotInScale(t))?;
        let (_, hi) = self.bounds(loc);
        if t < hi {
            return Ok(Jump::Dense);
        }
        Ok(match self.next_locus(loc) {
            None => Jump::Boundary,
            Some(next) => {
                Jump::Scattered { point: self.bounds(next).0, gap: self.forward_gap(loc) }
            }
        })
    }

    /// Backward jump with its structural gap.
    pub fn backward_jump(&self, t: f64) -> Result<Jump, TimeScaleError> {
        let loc = self.locate(t).ok_or(TimeScaleError::NotInScale(t))?;
        let (lo, _) = self.bounds(loc);
        if t > lo {
            return Ok(Jump::Dense);
        }
        Ok(match self.prev_locus(loc) {
            None => Jump::Boundary,
            Some(prev) => {
                Jump::Scattered { point: self.bounds(prev).1, gap: self.backward_gap(loc) }
            }
        })
    }

    /// Forward jump operator `σ(t) = inf{v > t}`; `t` itself at dense and
    /// boundary points.
    pub fn sigma(&self, t: f64) -> Result<f64, TimeScaleError> {
        Ok(match self.forward_jump(t)? {
            Jump::Scattered { point, .. } => point,
            Jump::Dense | Jump::Boundary => t,
        })
    }

    /// Backward jump operator `ρ(t) = sup{v < t}`.
    pub fn rho(&self, t: f64) -> Result<f64, TimeScaleError> {
        Ok(match self.backward_jump(t)? {
            Jump::Scattered { point, .. } => point,
            Jump::Dense | Jump::Boundary => t,
        })
    }

    /// Graininess `σ(t) - t`.
    pub fn mu(&self, t: f64) -> Result<f64, TimeScaleError> {
        Ok(match self.forward_jump(t)? {
            Jump::Scattered { gap, .. } => gap,
            Jump::Dense | Jump::Boundary => 0.0,
        })
    }

    pub fn classify(&self, t: f64) -> Result<PointClass, TimeScaleError> {
        let side = |j: Jump| match j {
            Jump::Dense => Side::Dense,
            Jump::Scattered { .. } => Side::Scattered,
            Jump::Boundary => Side::Boundary,
        };
        Ok(PointClass { left: side(self.backward_jump(t)?), right: side(self.forward_jump(t)?) })
    }

    /// Room to the right of a right-dense `t` inside its piece.
    fn dense_room_right(&self, t: f64) -> f64 {
        let loc = self.locate(t).expect("checked by caller");
        self.bounds(loc).1 - t
    }

    fn dense_room_left(&self, t: f64) -> f64 {
        let loc = self.locate(t).expect("checked by caller");
        t - self.bounds(loc).0
    }

    /// Delta derivative of `f` at `t`: the exact quotient towards `σ(t)` at a
    /// right-scattered point, otherwise the right-sided limit of forward
    /// differences (Richardson-extrapolated until successive estimates agree
    /// within `tol`).
    pub fn delta_derivative<F: Fn(f64) -> f64>(
        &self,
        f: F,
        t: f64,
        tol: f64,
    ) -> Result<f64, TimeScaleError> {
        match self.forward_jump(t)? {
            Jump::Scattered { point, gap } => Ok((f(point) - f(t)) / gap),
            Jump::Boundary => Err(TimeScaleError::BoundaryPoint(t)),
            Jump::Dense => {
                let room = self.dense_room_right(t);
                let f0 = f(t);
                richardson(|h| (f(t + h) - f0) / h, room, tol)
            }
        }
    }

    /// Nabla derivative: mirror of [`delta_derivative`](Self::delta_derivative)
    /// with `ρ` and left-sided limits.
    pub fn nabla_derivative<F: Fn(f64) -> f64>(
        &self,
        f: F,
        t: f64,
        tol: f64,
    ) -> Result<f64, TimeScaleError> {
        match self.backward_jump(t)? {
            Jump::Scattered { point, gap } => Ok((f(t) - f(point)) / gap),
            Jump::Boundary => Err(TimeScaleError::BoundaryPoint(t)),
            Jump::Dense => {
                let room = self.dense_room_left(t);
                let f0 = f(t);
                richardson(|h| (f0 - f(t - h)) / h, room, tol)
            }
        }
    }

    /// Points of the scale in `[lo, hi]`, with continuum pieces sampled at
    /// `step`. See [`Axis`].
    pub fn realize(&self, lo: f64, hi: f64, step: f64) -> Result<Axis, TimeScaleError> {
        Axis::realize(self, lo, hi, step)
    }

    /// All piece bounds meeting `[lo, hi]`, in increasing order, each with
    /// the bounds clipped to the window. Used for realization.
    fn pieces_in_window(&self, lo: f64, hi: f64) -> Vec<(f64, f64)> {
        let mut out = Vec::new();
        let mut push = |(a, b): (f64, f64)| {
            if b >= lo && a <= hi {
                out.push((a.max(lo), b.min(hi)));
            }
        };
        match self.period {
            None => self.pieces.iter().for_each(|p| push((p.lo, p.hi))),
            Some(l) => {
                let base = self.pieces[0].lo;
                let kmin = ((lo - base) / l).floor() as i64 - 1;
                let kmax = ((hi - base) / l).ceil() as i64 + 1;
                for shift in kmin..=kmax {
                    for piece in 0..self.pieces.len() {
                        push(self.bounds(Locus { piece, shift }));
                    }
                }
            }
        }
        out
    }
}

/// One-sided limit of `quotient(h)` as `h → 0⁺` by Richardson extrapolation
/// on the halving sequence `h₀, h₀/2, …`, assuming an expansion in integer
/// powers of `h`.
fn richardson<Q: Fn(f64) -> f64>(quotient: Q, room: f64, tol: f64) -> Result<f64, TimeScaleError> {
    let h0 = room.min(0.125);
    let mut prev_row: Vec<f64> = vec![quotient(h0)];
    let mut last_change = f64::INFINITY;
    let mut h = h0;
    for level in 1..MAX_RICHARDSON_LEVELS {
        h *= 0.5;
        let mut row = Vec::with_capacity(level + 1);
        row.push(quotient(h));
        let mut factor = 1.0;
        for j in 1..=level {
            factor *= 2.0;
            let v = row[j - 1] + (row[j - 1] - prev_row[j - 1]) / (factor - 1.0);
            row.push(v);
        }
        last_change = (row[level] - prev_row[level - 1]).abs();
        if last_change <= tol {
            return Ok(row[level]);
        }
        prev_row = row;
    }
    Err(TimeScaleError::NoConvergence { tol, last: last_change })
}
