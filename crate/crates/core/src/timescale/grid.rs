//! Bounded realizations of product time scales and functions sampled on them.
//!
//! An [`Axis`] lists the points of one scale inside a window. Isolated points
//! appear as themselves; continuum pieces are sampled at `sampling_step`
//! starting from the piece's left end, with the right end always included.
//! Each realized point remembers how it reaches its forward and backward
//! neighbours, which is all the partial delta derivatives need.

use std::ops::{Add, Div, Mul, Sub};

use serde::{Deserialize, Serialize};

use super::{Jump, PointClass, Side, TimeScale, TimeScaleError};
use crate::geom::{Plane, Vec3};

/// Relative slack when deciding whether a piece length is a whole number of
/// sampling steps.
const STEP_SNAP: f64 = 1e-9;

/// How a realized point reaches a neighbouring realized point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Step {
    /// The neighbour is `σ(t)` (or `ρ(t)`); `gap` is the structural graininess.
    Jump(f64),
    /// Dense side: the neighbour is the next sample of the same piece.
    Sample(f64),
    /// No neighbour inside the window.
    None,
}

impl Step {
    pub fn gap(self) -> Option<f64> {
        match self {
            Step::Jump(g) | Step::Sample(g) => Some(g),
            Step::None => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisPoint {
    pub t: f64,
    pub class: PointClass,
    pub forward: Step,
    pub backward: Step,
    /// Index of the (window-clipped) piece this sample belongs to.
    pub piece: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    points: Vec<AxisPoint>,
}

impl Axis {
    pub(super) fn realize(ts: &TimeScale, lo: f64, hi: f64, step: f64) -> Result<Axis, TimeScaleError> {
        let bad = |m: &str| Err(TimeScaleError::InvalidGrid(m.to_string()));
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return bad("window must be finite with lo <= hi");
        }
        if !(step.is_finite() && step > 0.0) {
            return bad("sampling_step must be positive");
        }
        let mut samples: Vec<(f64, usize)> = Vec::new();
        for (piece, (a, b)) in ts.pieces_in_window(lo, hi).into_iter().enumerate() {
            if a == b {
                samples.push((a, piece));
                continue;
            }
            let ratio = (b - a) / step;
            if ratio > 1e7 {
                return bad("sampling_step too small for the window");
            }
            let n = if (ratio - ratio.round()).abs() <= STEP_SNAP * ratio.max(1.0) {
                ratio.round().max(1.0) as usize
            } else {
                ratio.ceil() as usize
            };
            samples.extend((0..n).map(|k| (a + k as f64 * step, piece)));
            samples.push((b, piece));
        }
        if samples.is_empty() {
            return bad("window contains no point of the scale");
        }

        let mut points = Vec::with_capacity(samples.len());
        for (i, &(t, piece)) in samples.iter().enumerate() {
            let class = ts.classify(t)?;
            let next = samples.get(i + 1).copied();
            let prev = i.checked_sub(1).map(|j| samples[j]);
            let forward = match ts.forward_jump(t)? {
                Jump::Scattered { point, gap } => match next {
                    Some((s, _)) if s == point => Step::Jump(gap),
                    _ => Step::None,
                },
                Jump::Dense => match next {
                    Some((s, p)) if p == piece => Step::Sample(s - t),
                    _ => Step::None,
                },
                Jump::Boundary => Step::None,
            };
            let backward = match ts.backward_jump(t)? {
                Jump::Scattered { point, gap } => match prev {
                    Some((s, _)) if s == point => Step::Jump(gap),
                    _ => Step::None,
                },
                Jump::Dense => match prev {
                    Some((s, p)) if p == piece => Step::Sample(t - s),
                    _ => Step::None,
                },
                Jump::Boundary => Step::None,
            };
            points.push(AxisPoint { t, class, forward, backward, piece });
        }
        Ok(Axis { points })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[AxisPoint] {
        &self.points
    }

    pub fn get(&self, i: usize) -> &AxisPoint {
        &self.points[i]
    }

    pub fn coords(&self) -> impl Iterator<Item = f64> + '_ {
        self.points.iter().map(|p| p.t)
    }
}

/// Serializable description of a [`GridDomain`]; the axes are re-derived on
/// load.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridDomainSpec {
    pub scale1: TimeScale,
    pub scale2: TimeScale,
    pub window1: [f64; 2],
    pub window2: [f64; 2],
    pub sampling_step: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GridDomainSpec", into = "GridDomainSpec")]
pub struct GridDomain {
    spec: GridDomainSpec,
    axis1: Axis,
    axis2: Axis,
}

impl TryFrom<GridDomainSpec> for GridDomain {
    type Error = TimeScaleError;

    fn try_from(spec: GridDomainSpec) -> Result<Self, Self::Error> {
        GridDomain::from_spec(spec)
    }
}

impl From<GridDomain> for GridDomainSpec {
    fn from(d: GridDomain) -> Self {
        d.spec
    }
}

/// Stencil used for partial derivatives at dense coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DenseStencil {
    /// `(g(t + h) - g(t)) / h`.
    #[default]
    Forward1,
    /// Three-point one-sided second-order formula; falls back to
    /// [`DenseStencil::Forward1`] when the piece ends after one sample.
    Forward2,
}

/// Grid direction: `1` is the first scale, `2` the second.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    One,
    Two,
}

impl GridDomain {
    pub fn from_spec(spec: GridDomainSpec) -> Result<Self, TimeScaleError> {
        let axis1 = spec.scale1.realize(spec.window1[0], spec.window1[1], spec.sampling_step)?;
        let axis2 = spec.scale2.realize(spec.window2[0], spec.window2[1], spec.sampling_step)?;
        Ok(GridDomain { spec, axis1, axis2 })
    }

    pub fn new(
        scale1: TimeScale,
        window1: (f64, f64),
        scale2: TimeScale,
        window2: (f64, f64),
        sampling_step: f64,
    ) -> Result<Self, TimeScaleError> {
        GridDomain::from_spec(GridDomainSpec {
            scale1,
            scale2,
            window1: [window1.0, window1.1],
            window2: [window2.0, window2.1],
            sampling_step,
        })
    }

    /// `aℤ × aℤ` restricted to `n1 × n2` points starting at the origin.
    pub fn lattice(a: f64, n1: usize, n2: usize) -> Result<Self, TimeScaleError> {
        if n1 == 0 || n2 == 0 {
            return Err(TimeScaleError::InvalidGrid("empty lattice".into()));
        }
        let s = TimeScale::lattice(a)?;
        let hi1 = (n1 - 1) as f64 * a;
        let hi2 = (n2 - 1) as f64 * a;
        GridDomain::new(s.clone(), (0.0, hi1), s, (0.0, hi2), a)
    }

    /// `[lo1, hi1] × [lo2, hi2]` sampled at step `h`.
    pub fn continuum(lo1: f64, hi1: f64, lo2: f64, hi2: f64, h: f64) -> Result<Self, TimeScaleError> {
        GridDomain::new(TimeScale::interval(lo1, hi1)?, (lo1, hi1), TimeScale::interval(lo2, hi2)?, (lo2, hi2), h)
    }

    pub fn spec(&self) -> &GridDomainSpec {
        &self.spec
    }

    pub fn axis(&self, dir: Direction) -> &Axis {
        match dir {
            Direction::One => &self.axis1,
            Direction::Two => &self.axis2,
        }
    }

    pub fn axis1(&self) -> &Axis {
        &self.axis1
    }

    pub fn axis2(&self) -> &Axis {
        &self.axis2
    }

    pub fn scale1(&self) -> &TimeScale {
        &self.spec.scale1
    }

    pub fn scale2(&self) -> &TimeScale {
        &self.spec.scale2
    }

    pub fn sampling_step(&self) -> f64 {
        self.spec.sampling_step
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.axis1.len(), self.axis2.len())
    }

    pub fn len(&self) -> usize {
        self.axis1.len() * self.axis2.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Row-major flat index.
    pub fn flat(&self, i: usize, j: usize) -> usize {
        i * self.axis2.len() + j
    }

    pub fn coords(&self, i: usize, j: usize) -> (f64, f64) {
        (self.axis1.points[i].t, self.axis2.points[j].t)
    }

    pub fn indices(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let n2 = self.axis2.len();
        (0..self.axis1.len()).flat_map(move |i| (0..n2).map(move |j| (i, j)))
    }

    fn check(&self, i: usize, j: usize) -> Result<(), TimeScaleError> {
        if i < self.axis1.len() && j < self.axis2.len() {
            Ok(())
        } else {
            Err(TimeScaleError::BoundaryIndex(i, j))
        }
    }

    /// Forward neighbour of `(i, j)` in `dir` with the divisor to use.
    pub fn forward(&self, dir: Direction, i: usize, j: usize) -> Result<((usize, usize), f64), TimeScaleError> {
        self.check(i, j)?;
        let (k, next) = match dir {
            Direction::One => (i, (i + 1, j)),
            Direction::Two => (j, (i, j + 1)),
        };
        match self.axis(dir).points[k].forward.gap() {
            Some(g) => Ok((next, g)),
            None => Err(TimeScaleError::BoundaryIndex(i, j)),
        }
    }
}

/// Values a grid function may take: scalars or vectors, combined linearly.
pub trait FieldValue:
    Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> + Div<f64, Output = Self>
{
    fn max_abs(self) -> f64;
}

impl FieldValue for f64 {
    fn max_abs(self) -> f64 {
        self.abs()
    }
}

impl FieldValue for Vec3 {
    fn max_abs(self) -> f64 {
        Vec3::max_abs(self)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
#[serde(try_from = "GridFunctionRepr<T>", into = "GridFunctionRepr<T>")]
pub struct GridFunction<T: Clone> {
    domain: GridDomain,
    values: Vec<T>,
}

#[derive(Serialize, Deserialize)]
struct GridFunctionRepr<T> {
    domain: GridDomain,
    values: Vec<T>,
}

impl<T: Clone> TryFrom<GridFunctionRepr<T>> for GridFunction<T> {
    type Error = TimeScaleError;

    fn try_from(r: GridFunctionRepr<T>) -> Result<Self, Self::Error> {
        GridFunction::from_values(r.domain, r.values)
    }
}

impl<T: Clone> From<GridFunction<T>> for GridFunctionRepr<T> {
    fn from(g: GridFunction<T>) -> Self {
        GridFunctionRepr { domain: g.domain, values: g.values }
    }
}

impl<T: Clone> GridFunction<T> {
    pub fn from_values(domain: GridDomain, values: Vec<T>) -> Result<Self, TimeScaleError> {
        if values.len() != domain.len() {
            return Err(TimeScaleError::InvalidGrid(format!(
                "expected {} values, got {}",
                domain.len(),
                values.len()
            )));
        }
        Ok(GridFunction { domain, values })
    }

    /// Samples `f(t1, t2)` at every realized point.
    pub fn sample<F: FnMut(f64, f64) -> T>(domain: GridDomain, mut f: F) -> Self {
        let values = domain.indices().map(|(i, j)| {
            let (u, v) = domain.coords(i, j);
            f(u, v)
        });
        let values = values.collect();
        GridFunction { domain, values }
    }

    pub fn domain(&self) -> &GridDomain {
        &self.domain
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.values[self.domain.flat(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, value: T) {
        let k = self.domain.flat(i, j);
        self.values[k] = value;
    }

    pub fn map<U: Clone, F: FnMut(&T) -> U>(&self, f: F) -> GridFunction<U> {
        GridFunction { domain: self.domain.clone(), values: self.values.iter().map(f).collect() }
    }
}

impl<T: Clone + FieldValue> GridFunction<T> {
    /// Partial delta derivative in `dir`: the exact jump quotient at a
    /// scattered coordinate, a first-order forward difference at a dense one.
    pub fn partial_delta(&self, dir: Direction, i: usize, j: usize) -> Result<T, TimeScaleError> {
        self.partial_delta_with(dir, i, j, DenseStencil::Forward1)
    }

    pub fn partial_delta_with(
        &self,
        dir: Direction,
        i: usize,
        j: usize,
        stencil: DenseStencil,
    ) -> Result<T, TimeScaleError> {
        let ((i1, j1), h1) = self.domain.forward(dir, i, j)?;
        let g0 = *self.get(i, j);
        let g1 = *self.get(i1, j1);
        let k = match dir {
            Direction::One => i,
            Direction::Two => j,
        };
        let axis = self.domain.axis(dir);
        let is_sample = matches!(axis.points[k].forward, Step::Sample(_));
        if stencil == DenseStencil::Forward2 && is_sample {
            if let Ok(((i2, j2), h2)) = self.domain.forward(dir, i1, j1) {
                if matches!(axis.points[k + 1].forward, Step::Sample(_)) {
                    let g2 = *self.get(i2, j2);
                    let c0 = -(2.0 * h1 + h2) / (h1 * (h1 + h2));
                    let c1 = (h1 + h2) / (h1 * h2);
                    let c2 = -h1 / (h2 * (h1 + h2));
                    return Ok(g0 * c0 + g1 * c1 + g2 * c2);
                }
            }
        }
        Ok((g1 - g0) / h1)
    }

    /// `max |Δ₁Δ₂g − Δ₂Δ₁g|` at `(i, j)`, both orders evaluated from the
    /// forward 2×2 stencil.
    pub fn mixed_partial_residual(&self, i: usize, j: usize) -> Result<f64, TimeScaleError> {
        let ((ip, _), h1) = self.domain.forward(Direction::One, i, j)?;
        let ((_, jp), h2) = self.domain.forward(Direction::Two, i, j)?;
        // Both forward neighbours exist, so the far corner does too.
        let d2_here = self.partial_delta(Direction::Two, i, j)?;
        let d2_next = self.partial_delta(Direction::Two, ip, j)?;
        let d1_here = self.partial_delta(Direction::One, i, j)?;
        let d1_next = self.partial_delta(Direction::One, i, jp)?;
        let d12 = (d2_next - d2_here) / h1;
        let d21 = (d1_next - d1_here) / h2;
        Ok((d12 - d21).max_abs())
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.max_abs()))
    }
}

impl GridFunction<f64> {
    /// Delta tangent plane of the graph `z = f(t, s)` at `(i, j)`: through
    /// `(t, s, f)` with slopes given by the two partial delta derivatives.
    pub fn delta_tangent_plane(&self, i: usize, j: usize) -> Result<Plane, TimeScaleError> {
        let d1 = self.partial_delta(Direction::One, i, j)?;
        let d2 = self.partial_delta(Direction::Two, i, j)?;
        let (t, s) = self.domain.coords(i, j);
        let point = Vec3::new(t, s, *self.get(i, j));
        Plane::new(point, Vec3::new(-d1, -d2, 1.0))
            .map_err(|e| TimeScaleError::InvalidGrid(e.to_string()))
    }
}

impl Side {
    pub fn as_str(self) -> &'static str {
        match self {
            Side::Dense => "dense",
            Side::Scattered => "scattered",
            Side::Boundary => "boundary",
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::timescale::Interval;
    use proptest::prelude::*;

    #[test]
    fn continuum_axis_includes_both_ends() {
        let d = GridDomain::continuum(0.0, 1.0, 0.0, 1.0, 0.01).unwrap();
        assert_eq!(d.shape(), (101, 101));
        let a = d.axis1();
        assert_eq!(a.get(0).t, 0.0);
        assert_eq!(a.get(100).t, 1.0);
        for w in a.points().windows(2) {
            assert!(((w[1].t - w[0].t) - 0.01).abs() < 1e-12);
        }
        assert_eq!(a.get(100).forward, Step::None);
        assert_eq!(a.get(0).backward, Step::None);
    }

    #[test]
    fn ragged_last_gap() {
        let s = TimeScale::interval(0.0, 1.0).unwrap();
        let a = s.realize(0.0, 1.0, 0.3).unwrap();
        let ts: Vec<f64> = a.coords().collect();
        assert_eq!(ts.len(), 5);
        assert_eq!(ts[4], 1.0);
        assert!((ts[4] - ts[3] - 0.1).abs() < 1e-12);
    }

    #[test]
    fn mixed_scale_axis() {
        // [0,1] ∪ {2} ∪ [3,4] sampled at 0.5.
        let s = TimeScale::new(
            vec![Interval { lo: 0.0, hi: 1.0 }, Interval { lo: 2.0, hi: 2.0 }, Interval { lo: 3.0, hi: 4.0 }],
            None,
        )
        .unwrap();
        let a = s.realize(0.0, 4.0, 0.5).unwrap();
        let ts: Vec<f64> = a.coords().collect();
        assert_eq!(ts, vec![0.0, 0.5, 1.0, 2.0, 3.0, 3.5, 4.0]);
        assert_eq!(a.get(2).forward, Step::Jump(1.0));
        assert_eq!(a.get(3).forward, Step::Jump(1.0));
        assert_eq!(a.get(3).backward, Step::Jump(1.0));
        assert!(a.get(3).class.is_isolated());
        assert_eq!(a.get(1).forward, Step::Sample(0.5));
    }

    #[test]
    fn lattice_window_edges() {
        let d = GridDomain::lattice(0.1, 11, 3).unwrap();
        assert_eq!(d.shape(), (11, 3));
        let a = d.axis1();
        assert_eq!(a.get(10).t, 10.0 * 0.1);
        assert_eq!(a.get(10).forward, Step::None);
        assert_eq!(a.get(10).class.right, Side::Scattered);
        for p in &a.points()[..10] {
            assert_eq!(p.forward, Step::Jump(0.1));
        }
    }

    #[test]
    fn partial_delta_integer_grid() {
        let d = GridDomain::lattice(1.0, 4, 4).unwrap();
        let g = GridFunction::sample(d, |m, n| Vec3::new(m, n, 0.0));
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(g.partial_delta(Direction::One, i, j).unwrap(), Vec3::X);
                assert_eq!(g.partial_delta(Direction::Two, i, j).unwrap(), Vec3::Y);
            }
        }
        assert_eq!(g.partial_delta(Direction::One, 3, 0), Err(TimeScaleError::BoundaryIndex(3, 0)));
    }

    #[test]
    fn partial_delta_unit_speed_lattice() {
        // Planar net with unit edges scaled by a = 0.5: r(m a, n a) = a(m, 0) + a n (cos 1, sin 1).
        let a = 0.5;
        let (c, s) = (1.0f64.cos(), 1.0f64.sin());
        let d = GridDomain::lattice(a, 5, 5).unwrap();
        let g = GridFunction::sample(d, |u, v| Vec3::new(u + v * c, v * s, 0.0));
        for i in 0..4 {
            for j in 0..4 {
                let d1 = g.partial_delta(Direction::One, i, j).unwrap();
                let d2 = g.partial_delta(Direction::Two, i, j).unwrap();
                assert!((d1.norm() - 1.0).abs() < 1e-14);
                assert!((d2.norm() - 1.0).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn partial_delta_dense_first_and_second_order() {
        let h = 0.01;
        let d = GridDomain::continuum(0.0, 1.0, 0.0, 1.0, h).unwrap();
        let g = GridFunction::sample(d, |u, v| Vec3::new(u * u, v, 0.0));
        let d1 = g.partial_delta(Direction::One, 25, 3).unwrap();
        assert!((g.domain().coords(25, 3).0 - 0.25).abs() < 1e-15);
        // Forward difference of u² at 0.25: 2u + h.
        assert!((d1.x - (0.5 + h)).abs() < 1e-12);
        let d1b = g.partial_delta_with(Direction::One, 25, 3, DenseStencil::Forward2).unwrap();
        assert!((d1b.x - 0.5).abs() < 1e-12);
    }

    #[test]
    fn mixed_partial_on_smooth_samples() {
        let d = GridDomain::continuum(0.0, 1.0, 0.0, 1.0, 0.01).unwrap();
        let g = GridFunction::sample(d, |u, v| u.sin() * v.cos());
        let scale = g.max_abs();
        for i in 0..100 {
            for j in 0..100 {
                assert!(g.mixed_partial_residual(i, j).unwrap() < 1e-12 * scale);
            }
        }
    }

    #[test]
    fn mixed_partial_ignores_single_corner_mutation() {
        let d = GridDomain::lattice(1.0, 3, 3).unwrap();
        let mut g = GridFunction::sample(d, |u, v| u * v);
        g.set(1, 1, 1e3);
        assert_eq!(g.mixed_partial_residual(0, 0).unwrap(), 0.0);
    }

    #[test]
    fn tangent_planes() {
        let d = GridDomain::lattice(1.0, 3, 3).unwrap();
        let c = GridFunction::sample(d.clone(), |_, _| 2.5);
        let p = c.delta_tangent_plane(1, 1).unwrap();
        assert_eq!(p.unit_normal, Vec3::Z);
        assert_eq!(p.point.z, 2.5);

        let affine = GridFunction::sample(d.clone(), |m, n| m + 2.0 * n);
        let p = affine.delta_tangent_plane(0, 0).unwrap();
        let expect = Vec3::new(-1.0, -2.0, 1.0) / 6f64.sqrt();
        assert!((p.unit_normal - expect).norm() < 1e-15);

        let prod = GridFunction::sample(d, |m, n| m * n);
        let p = prod.delta_tangent_plane(0, 0).unwrap();
        assert_eq!(p.unit_normal, Vec3::Z);
        assert_eq!(p.signed_distance(Vec3::new(1.0, 0.0, 0.0)), 0.0);
        assert_eq!(p.signed_distance(Vec3::new(0.0, 1.0, 0.0)), 0.0);
    }

    #[test]
    fn domain_json_round_trip() {
        let d = GridDomain::lattice(0.1, 4, 3).unwrap();
        let g = GridFunction::sample(d, |u, v| Vec3::new(u, v, u * v));
        let text = serde_json::to_string(&g).unwrap();
        let back: GridFunction<Vec3> = serde_json::from_str(&text).unwrap();
        assert_eq!(back, g);
        let bad = text.replace("[0.0,0.0,0.0],", "");
        assert!(serde_json::from_str::<GridFunction<Vec3>>(&bad).is_err());
    }

    proptest! {
        #[test]
        fn realized_points_belong_to_scale(
            a in 0.05f64..2.0,
            gap in 0.01f64..1.0,
            len in 0.0f64..2.0,
            period_extra in 0.01f64..1.0,
            lo in -5.0f64..5.0,
            width in 0.0f64..6.0,
            step in 0.05f64..0.7,
        ) {
            let pieces = vec![Interval { lo: 0.0, hi: len }, Interval { lo: len + gap, hi: len + gap + a }];
            let period = len + gap + a + period_extra;
            let s = TimeScale::new(pieces, Some(period)).unwrap();
            if let Ok(axis) = s.realize(lo, lo + width, step) {
                for w in axis.points().windows(2) {
                    prop_assert!(w[0].t < w[1].t);
                }
                for p in axis.points() {
                    prop_assert!(s.contains(p.t));
                    prop_assert!(p.t >= lo && p.t <= lo + width);
                    if let Step::Sample(g) = p.forward {
                        prop_assert!(g <= step * (1.0 + 1e-9));
                    }
                }
            }
        }

        #[test]
        fn mixed_partials_commute_on_random_lattice_data(
            vals in proptest::collection::vec(-1e3f64..1e3, 16),
            a in 0.01f64..3.0,
        ) {
            let d = GridDomain::lattice(a, 4, 4).unwrap();
            let g = GridFunction::from_values(d, vals).unwrap();
            let scale = g.max_abs().max(f64::MIN_POSITIVE);
            for i in 0..3 {
                for j in 0..3 {
                    let r = g.mixed_partial_residual(i, j).unwrap();
                    // Rounding grows like eps·|g|/a² on raw lattice data.
                    prop_assert!(r <= 1e-12 * scale / (a * a).min(1.0));
                }
            }
        }
    }
}
