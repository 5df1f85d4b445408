//! Euclidean primitives in ℝ³: vectors, planes, lines and the handful of
//! intersection routines the surface constructions are built from.
//!
//! Everything is plain `f64`. Degeneracy checks take an explicit tolerance;
//! [`DEFAULT_TOL`] is tuned for unit-scale data.

use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default absolute degeneracy tolerance on unit-scale data.
pub const DEFAULT_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeomError {
    #[error("degenerate input: {0}")]
    DegenerateInput(&'static str),
    #[error("planes are parallel")]
    ParallelPlanes,
    #[error("line is tangent to the sphere; both roots coincide")]
    TangentDegenerate,
    #[error("known root is off the sphere or the line (deviation {0:.3e})")]
    OffSphere(f64),
    #[error("non-finite component")]
    NonFinite,
}

/// A point or direction in ℝ³. Serialized as `[x, y, z]`.
#[derive(Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 3]", into = "[f64; 3]")]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl fmt::Debug for Vec3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.x, self.y, self.z)
    }
}

impl From<[f64; 3]> for Vec3 {
    fn from(a: [f64; 3]) -> Self {
        Vec3::new(a[0], a[1], a[2])
    }
}

impl From<Vec3> for [f64; 3] {
    fn from(v: Vec3) -> Self {
        [v.x, v.y, v.z]
    }
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3 { x: 0.0, y: 0.0, z: 0.0 };
    pub const X: Vec3 = Vec3 { x: 1.0, y: 0.0, z: 0.0 };
    pub const Y: Vec3 = Vec3 { x: 0.0, y: 1.0, z: 0.0 };
    pub const Z: Vec3 = Vec3 { x: 0.0, y: 0.0, z: 1.0 };

    #[inline]
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3 { x, y, z }
    }

    #[inline]
    pub fn dot(self, o: Vec3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    #[inline]
    pub fn cross(self, o: Vec3) -> Vec3 {
        Vec3::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    #[inline]
    pub fn norm_squared(self) -> f64 {
        self.dot(self)
    }

    #[inline]
    pub fn norm(self) -> f64 {
        self.norm_squared().sqrt()
    }

    pub fn distance(self, o: Vec3) -> f64 {
        (self - o).norm()
    }

    /// Unit vector in the same direction, or `None` when the norm is not
    /// above `tol`.
    pub fn try_normalize(self, tol: f64) -> Option<Vec3> {
        let n = self.norm();
        if n > tol && n.is_finite() {
            Some(self / n)
        } else {
            None
        }
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn max_abs(self) -> f64 {
        self.x.abs().max(self.y.abs()).max(self.z.abs())
    }

    /// Unsigned angle in `[0, π]` between two nonzero vectors.
    pub fn angle(self, o: Vec3) -> f64 {
        // atan2 form stays accurate near 0 and π where acos loses digits.
        self.cross(o).norm().atan2(self.dot(o))
    }

    /// Rotation of `self` about the unit `axis` by `angle` (right-hand rule).
    pub fn rotated(self, axis: Vec3, angle: f64) -> Vec3 {
        let (s, c) = angle.sin_cos();
        self * c + axis.cross(self) * s + axis * (axis.dot(self) * (1.0 - c))
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    #[inline]
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl AddAssign for Vec3 {
    #[inline]
    fn add_assign(&mut self, o: Vec3) {
        *self = *self + o;
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    #[inline]
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    #[inline]
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    #[inline]
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Div<f64> for Vec3 {
    type Output = Vec3;
    #[inline]
    fn div(self, s: f64) -> Vec3 {
        Vec3::new(self.x / s, self.y / s, self.z / s)
    }
}

/// Scalar triple product `a · (b × c)`.
pub fn det3(a: Vec3, b: Vec3, c: Vec3) -> f64 {
    a.dot(b.cross(c))
}

/// Unit normal `(d1 × d2) / |d1 × d2|` of the plane spanned by two tangent
/// vectors; `None` if they are (nearly) parallel.
pub fn unit_normal(d1: Vec3, d2: Vec3, tol: f64) -> Option<Vec3> {
    d1.cross(d2).try_normalize(tol)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Plane {
    pub point: Vec3,
    pub unit_normal: Vec3,
}

impl Plane {
    /// Plane through `point` with the given normal (normalized here).
    pub fn new(point: Vec3, normal: Vec3) -> Result<Plane, GeomError> {
        if !point.is_finite() || !normal.is_finite() {
            return Err(GeomError::NonFinite);
        }
        let unit_normal = normal
            .try_normalize(DEFAULT_TOL)
            .ok_or(GeomError::DegenerateInput("zero plane normal"))?;
        Ok(Plane { point, unit_normal })
    }

    pub fn signed_distance(&self, p: Vec3) -> f64 {
        (p - self.point).dot(self.unit_normal)
    }

    pub fn contains(&self, p: Vec3, tol: f64) -> bool {
        self.signed_distance(p).abs() <= tol
    }

    /// Same plane with the normal flipped.
    pub fn flipped(&self) -> Plane {
        Plane { point: self.point, unit_normal: -self.unit_normal }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Line {
    pub point: Vec3,
    pub unit_direction: Vec3,
}

impl Line {
    pub fn at(&self, t: f64) -> Vec3 {
        self.point + self.unit_direction * t
    }

    pub fn distance_to(&self, p: Vec3) -> f64 {
        (p - self.point).cross(self.unit_direction).norm()
    }

    /// Orthogonal projection of `p` onto the line.
    pub fn project(&self, p: Vec3) -> Vec3 {
        self.at((p - self.point).dot(self.unit_direction))
    }
}

/// Plane through three points. The triangle area must exceed `tol`.
pub fn plane_through_points(p0: Vec3, p1: Vec3, p2: Vec3, tol: f64) -> Result<Plane, GeomError> {
    if !(p0.is_finite() && p1.is_finite() && p2.is_finite()) {
        return Err(GeomError::NonFinite);
    }
    let n = (p1 - p0).cross(p2 - p0);
    if 0.5 * n.norm() <= tol {
        return Err(GeomError::DegenerateInput("collinear points"));
    }
    Ok(Plane { point: p0, unit_normal: n / n.norm() })
}

/// Intersection line of two planes.
pub fn plane_intersection(p1: &Plane, p2: &Plane, tol: f64) -> Result<Line, GeomError> {
    let (n1, n2) = (p1.unit_normal, p2.unit_normal);
    let dir = n1.cross(n2);
    let s2 = dir.norm_squared();
    if s2.sqrt() <= tol {
        return Err(GeomError::ParallelPlanes);
    }
    let d1 = n1.dot(p1.point);
    let d2 = n2.dot(p2.point);
    // Point of the line closest to the origin: ((d1 n2 - d2 n1) × (n1 × n2)) / |n1 × n2|².
    let point = (n2 * d1 - n1 * d2).cross(dir) / s2;
    Ok(Line { point, unit_direction: dir / s2.sqrt() })
}

/// Given a line meeting a sphere at `known_root`, returns the other meeting
/// point. Fails with [`GeomError::TangentDegenerate`] when the roots coincide
/// within `tol`.
pub fn line_sphere_second_intersection(
    line: &Line,
    center: Vec3,
    radius: f64,
    known_root: Vec3,
    tol: f64,
) -> Result<Vec3, GeomError> {
    let off_line = line.distance_to(known_root);
    let off_sphere = (known_root.distance(center) - radius).abs();
    let scale = radius.max(1.0);
    if off_line > tol * scale || off_sphere > tol * scale {
        return Err(GeomError::OffSphere(off_line.max(off_sphere)));
    }
    // Re-anchor the line at the known root: |r + t d - c|² = R² has roots
    // t = 0 and t = -2 d·(r - c).
    let d = line.unit_direction;
    let t = -2.0 * d.dot(known_root - center);
    if t.abs() <= tol * scale {
        return Err(GeomError::TangentDegenerate);
    }
    Ok(known_root + d * t)
}

/// Acute angle in `[0, π/2]` between two planes.
pub fn dihedral_angle(p1: &Plane, p2: &Plane) -> f64 {
    let c = p1.unit_normal.dot(p2.unit_normal).abs();
    let s = p1.unit_normal.cross(p2.unit_normal).norm();
    s.atan2(c)
}
