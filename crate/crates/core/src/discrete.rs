//! Discrete Chebyshev nets (discrete K-surfaces).
//!
//! A net is a map `(m, n) ↦ r(m, n)` with edges of length `a₁` along the
//! first lattice direction and `a₂` along the second (`a₁ = a₂ = a` in the
//! classical setting), whose every vertex star of five points is planar.
//! [`build_from_cauchy`] propagates such a net from two boundary strips and
//! the tangent planes along them; the analysis functions measure edge
//! lengths, star planarity, the tetrahedron geometry of each elementary quad
//! and the curvature.
//!
//! Vertex `(m, n)` lives at row-major index `m · cols + n`; `m` runs along
//! strip 1 and `n` along strip 2.
//!
//! Residuals are dimensionless: edge residuals are `||edge| / a − 1|`, and
//! planarity residuals are measured on the net rescaled to unit edges.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::{
    det3, line_sphere_second_intersection, plane_intersection, plane_through_points, unit_normal,
    GeomError, Line, Plane, Vec3,
};

/// Default construction and verification tolerance.
pub const DEFAULT_MESH_TOL: f64 = 1e-9;

/// Tangents closer to parallel than this (sine of their angle) are degenerate.
const TANGENT_TOL: f64 = 1e-10;

/// Slack on `cos φ + cos ψ` below zero before a quad counts as unrealizable.
const TETRA_SLACK: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DiscreteError {
    #[error("index ({0}, {1}) lacks the neighbours this quantity needs")]
    BoundaryIndex(usize, usize),
    #[error("tangent vectors at ({0}, {1}) are parallel")]
    DegenerateTangents(usize, usize),
    #[error("tangent planes are parallel")]
    ParallelPlanes,
    #[error("new vertex coincides with the base vertex; the net collapses")]
    TangentDegenerate,
    #[error("consistency violation: edge residual {0:.3e} exceeds tolerance")]
    ConsistencyViolation(f64),
    #[error("invalid Cauchy data: {0}")]
    InvalidCauchyData(String),
    #[error("quad ({m}, {n}) is not a realizable tetrahedron (cos φ + cos ψ = {sum:.3e})")]
    DegenerateTetrahedron { m: usize, n: usize, sum: f64 },
    #[error("mesh is {0}×{1}; at least 3×3 is required")]
    TooSmall(usize, usize),
    #[error("quad geometry needs equal edge lengths in both directions")]
    Anisotropic,
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),
    #[error("construction failed at quad ({m}, {n}): {source}")]
    Construction {
        m: usize,
        n: usize,
        #[source]
        source: Box<DiscreteError>,
    },
}

impl From<GeomError> for DiscreteError {
    fn from(e: GeomError) -> Self {
        match e {
            GeomError::ParallelPlanes => DiscreteError::ParallelPlanes,
            GeomError::TangentDegenerate => DiscreteError::TangentDegenerate,
            other => DiscreteError::InvalidMesh(other.to_string()),
        }
    }
}

/// Two polylines through a common vertex, with optional tangent-plane
/// normals at each strip vertex.
///
/// Without normals the planes are derived from the strips themselves: the
/// shared vertex takes the plane of the two first edges, inner vertices the
/// plane of their two incident edges, and the last vertex continues the
/// rotation of the plane about the strip. Straight strips therefore need
/// explicit normals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CauchyData {
    /// Edge length along strip 1 (and strip 2 unless `a2` is set).
    pub a: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a2: Option<f64>,
    pub strip1: Vec<Vec3>,
    pub strip2: Vec<Vec3>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub normals1: Option<Vec<Vec3>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub normals2: Option<Vec<Vec3>>,
}

impl CauchyData {
    pub fn edge_lengths(&self) -> (f64, f64) {
        (self.a, self.a2.unwrap_or(self.a))
    }

    /// The same data with the roles of the two strips exchanged.
    pub fn swapped(&self) -> CauchyData {
        let (a1, a2) = self.edge_lengths();
        CauchyData {
            a: a2,
            a2: self.a2.map(|_| a1),
            strip1: self.strip2.clone(),
            strip2: self.strip1.clone(),
            normals1: self.normals2.clone(),
            normals2: self.normals1.clone(),
        }
    }

    /// Checks the strip invariants and returns the seed normals of both strips.
    pub fn validate(&self) -> Result<(Vec<Vec3>, Vec<Vec3>), DiscreteError> {
        let bad = |m: String| Err(DiscreteError::InvalidCauchyData(m));
        let (a1, a2) = self.edge_lengths();
        if !(a1.is_finite() && a1 > 0.0 && a2.is_finite() && a2 > 0.0) {
            return bad("edge lengths must be positive".into());
        }
        if self.strip1.len() < 2 || self.strip2.len() < 2 {
            return bad("each strip needs at least two vertices".into());
        }
        let all = self.strip1.iter().chain(&self.strip2);
        if !all.clone().all(|p| p.is_finite()) {
            return bad("non-finite vertex".into());
        }
        if self.strip1[0].distance(self.strip2[0]) > 1e-12 * a1 {
            return bad("strips must share their first vertex".into());
        }
        for (name, strip, a) in [("strip1", &self.strip1, a1), ("strip2", &self.strip2, a2)] {
            for (k, w) in strip.windows(2).enumerate() {
                let r = (w[0].distance(w[1]) / a - 1.0).abs();
                if !(r <= 1e-12) {
                    return bad(format!("{name} edge {k} has length {} (expected {a})", w[0].distance(w[1])));
                }
            }
        }
        let e1 = (self.strip1[1] - self.strip1[0]) / a1;
        let e2 = (self.strip2[1] - self.strip2[0]) / a2;
        if unit_normal(e1, e2, TANGENT_TOL).is_none() {
            return bad("initial quad is degenerate (first edges are parallel)".into());
        }
        let normals1 = self.strip_normals(&self.strip1, a1, self.normals1.as_deref(), e1, e2, "strip1")?;
        let normals2 = self.strip_normals(&self.strip2, a2, self.normals2.as_deref(), e1, e2, "strip2")?;
        if normals1[0].cross(normals2[0]).norm() > 1e-12 {
            return bad("the strips disagree on the tangent plane at the shared vertex".into());
        }
        Ok((normals1, normals2))
    }

    fn strip_normals(
        &self,
        strip: &[Vec3],
        a: f64,
        given: Option<&[Vec3]>,
        e1: Vec3,
        e2: Vec3,
        name: &str,
    ) -> Result<Vec<Vec3>, DiscreteError> {
        let bad = |m: String| Err(DiscreteError::InvalidCauchyData(m));
        let edges: Vec<Vec3> = strip.windows(2).map(|w| (w[1] - w[0]) / a).collect();
        let normals = match given {
            Some(ns) => {
                if ns.len() != strip.len() {
                    return bad(format!("{name}: {} normals for {} vertices", ns.len(), strip.len()));
                }
                for (k, n) in ns.iter().enumerate() {
                    if !n.is_finite() || (n.norm() - 1.0).abs() > 1e-12 {
                        return bad(format!("{name}: normal {k} is not a unit vector"));
                    }
                }
                ns.to_vec()
            }
            None => derive_strip_normals(&edges, e1.cross(e2)).ok_or_else(|| {
                DiscreteError::InvalidCauchyData(format!(
                    "{name}: cannot seed tangent planes (collinear triple or too few vertices)"
                ))
            })?,
        };
        // Boundary stars: each plane must contain the incident strip edges and,
        // at the shared vertex, both first edges.
        for (k, n) in normals.iter().enumerate() {
            let mut incident = vec![];
            if k > 0 {
                incident.push(edges[k - 1]);
            }
            if k < edges.len() {
                incident.push(edges[k]);
            }
            if k == 0 {
                incident.extend([e1, e2]);
            }
            if let Some(e) = incident.iter().find(|e| n.dot(**e).abs() > 1e-9) {
                return bad(format!("{name}: plane at vertex {k} does not contain edge {e:?}"));
            }
        }
        Ok(normals)
    }
}

/// Signed angle rotating `from` into `to` about `axis` (both orthogonal to it).
fn signed_angle(from: Vec3, to: Vec3, axis: Vec3) -> f64 {
    from.cross(to).dot(axis).atan2(from.dot(to))
}

fn derive_strip_normals(edges: &[Vec3], first: Vec3) -> Option<Vec<Vec3>> {
    let n0 = first.try_normalize(TANGENT_TOL)?;
    if edges.len() < 2 {
        return None;
    }
    let mut normals = vec![n0];
    for k in 1..edges.len() {
        let mut n = edges[k - 1].cross(edges[k]).try_normalize(TANGENT_TOL)?;
        if n.dot(normals[k - 1]) < 0.0 {
            n = -n;
        }
        normals.push(n);
    }
    let k = edges.len();
    let turn = signed_angle(normals[k - 2], normals[k - 1], edges[k - 2]);
    normals.push(normals[k - 1].rotated(edges[k - 1], turn));
    Some(normals)
}

/// A (partially analysed) discrete net with its tangent planes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MeshRepr", into = "MeshRepr")]
pub struct SurfaceMesh {
    a: f64,
    a2: f64,
    rows: usize,
    cols: usize,
    vertices: Vec<Vec3>,
    planes: Vec<Plane>,
}

#[derive(Serialize, Deserialize)]
struct MeshRepr {
    a: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    a2: Option<f64>,
    rows: usize,
    cols: usize,
    vertices: Vec<Vec3>,
    planes: Vec<[f64; 6]>,
}

impl TryFrom<MeshRepr> for SurfaceMesh {
    type Error = DiscreteError;

    fn try_from(r: MeshRepr) -> Result<Self, Self::Error> {
        let mut planes = Vec::with_capacity(r.planes.len());
        for p in &r.planes {
            let (point, unit_normal) = (Vec3::new(p[0], p[1], p[2]), Vec3::new(p[3], p[4], p[5]));
            if !(point.is_finite() && (unit_normal.norm() - 1.0).abs() <= 1e-12) {
                return Err(DiscreteError::InvalidMesh("plane normals must be unit vectors".into()));
            }
            planes.push(Plane { point, unit_normal });
        }
        SurfaceMesh::new(r.a, r.a2.unwrap_or(r.a), r.rows, r.cols, r.vertices, planes)
    }
}

impl From<SurfaceMesh> for MeshRepr {
    fn from(m: SurfaceMesh) -> Self {
        MeshRepr {
            a: m.a,
            a2: (m.a2 != m.a).then_some(m.a2),
            rows: m.rows,
            cols: m.cols,
            vertices: m.vertices,
            planes: m
                .planes
                .iter()
                .map(|p| {
                    let (q, n) = (p.point, p.unit_normal);
                    [q.x, q.y, q.z, n.x, n.y, n.z]
                })
                .collect(),
        }
    }
}

/// Per-quad tetrahedron data, from coordinates, for quad `(m, n)` with
/// `A = r(m,n)`, `B = r(m+1,n)`, `C = r(m+1,n+1)`, `D = r(m,n+1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadGeometry {
    pub a: f64,
    /// Angle between `AB` and `AD`.
    pub phi: f64,
    /// Angle between `DA` and `DC`.
    pub psi: f64,
    pub diag_ac: f64,
    pub diag_bd: f64,
    pub area_abc: f64,
    /// Distance from `D` to the plane `ABC`.
    pub height: f64,
    pub det: f64,
    pub volume: f64,
    /// Interior dihedral angle of the tetrahedron at edge `AB`.
    pub theta: f64,
    /// `−sin²θ / a²`.
    pub k: f64,
    pub closed: ClosedForms,
}

/// The same quantities from `a, φ, ψ` alone.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClosedForms {
    pub diag_ac: f64,
    pub diag_bd: f64,
    pub area_abc: f64,
    pub height: f64,
    pub det: f64,
    pub cos_theta: f64,
    pub k: f64,
}

impl ClosedForms {
    pub fn new(a: f64, phi: f64, psi: f64) -> ClosedForms {
        let radicand = ((phi.cos() + psi.cos()) / 2.0).max(0.0);
        let det = 4.0 * a.powi(3) * (phi / 2.0).sin() * (psi / 2.0).sin() * radicand.sqrt();
        let tt = (phi / 2.0).tan() * (psi / 2.0).tan();
        ClosedForms {
            diag_ac: 2.0 * a * (psi / 2.0).sin(),
            diag_bd: 2.0 * a * (phi / 2.0).sin(),
            area_abc: 0.5 * a * a * psi.sin(),
            height: det / (a * a * psi.sin()),
            det,
            cos_theta: tt,
            k: (tt * tt - 1.0) / (a * a),
        }
    }
}

impl QuadGeometry {
    /// Largest deviation between coordinate and closed-form values, each
    /// relative to `max(|closed value|, a^dim)`.
    pub fn cross_check_deviation(&self) -> f64 {
        let a = self.a;
        let c = &self.closed;
        let rel = |x: f64, y: f64, dim: i32| (x - y).abs() / y.abs().max(a.powi(dim));
        [
            rel(self.diag_ac, c.diag_ac, 1),
            rel(self.diag_bd, c.diag_bd, 1),
            rel(self.area_abc, c.area_abc, 2),
            rel(self.height, c.height, 1),
            rel(self.det.abs(), c.det, 3),
            (self.theta.cos() - c.cos_theta).abs(),
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }

    /// `|cos θ − tan(φ/2) tan(ψ/2)|`.
    pub fn cos_theta_residual(&self) -> f64 {
        (self.theta.cos() - self.closed.cos_theta).abs()
    }
}

impl SurfaceMesh {
    pub fn new(
        a: f64,
        a2: f64,
        rows: usize,
        cols: usize,
        vertices: Vec<Vec3>,
        planes: Vec<Plane>,
    ) -> Result<Self, DiscreteError> {
        let bad = |m: String| Err(DiscreteError::InvalidMesh(m));
        if !(a.is_finite() && a > 0.0 && a2.is_finite() && a2 > 0.0) {
            return bad("edge lengths must be positive".into());
        }
        let count = rows.checked_mul(cols).filter(|&c| c > 0);
        if count != Some(vertices.len()) || vertices.len() != planes.len() {
            return bad(format!(
                "{rows}×{cols} mesh with {} vertices and {} planes",
                vertices.len(),
                planes.len()
            ));
        }
        if !vertices.iter().all(|v| v.is_finite()) {
            return bad("non-finite vertex".into());
        }
        Ok(SurfaceMesh { a, a2, rows, cols, vertices, planes })
    }

    /// Planar net with tangent planes taken from the vertex stars (`z = 0`
    /// for a planar net). Handy for tests and for importing bare vertex grids.
    pub fn from_vertices(a: f64, a2: f64, rows: usize, cols: usize, vertices: Vec<Vec3>) -> Result<Self, DiscreteError> {
        let placeholder = Plane { point: Vec3::ZERO, unit_normal: Vec3::Z };
        let mut mesh = SurfaceMesh::new(a, a2, rows, cols, vertices, vec![placeholder; rows * cols])?;
        for m in 0..rows {
            for n in 0..cols {
                let mm = if m + 1 < rows { m } else { m - 1 };
                let nn = if n + 1 < cols { n } else { n - 1 };
                let normal = if rows > 1 && cols > 1 {
                    mesh.discrete_normal(mm, nn)?
                } else {
                    Vec3::Z
                };
                let k = mesh.flat(m, n);
                mesh.planes[k] = Plane { point: mesh.vertices[k], unit_normal: normal };
            }
        }
        Ok(mesh)
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn edge_lengths(&self) -> (f64, f64) {
        (self.a, self.a2)
    }

    pub fn is_isotropic(&self) -> bool {
        self.a == self.a2
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn vertices(&self) -> &[Vec3] {
        &self.vertices
    }

    pub fn planes(&self) -> &[Plane] {
        &self.planes
    }

    fn flat(&self, m: usize, n: usize) -> usize {
        m * self.cols + n
    }

    pub fn vertex(&self, m: usize, n: usize) -> Vec3 {
        self.vertices[self.flat(m, n)]
    }

    pub fn set_vertex(&mut self, m: usize, n: usize, v: Vec3) {
        let k = self.flat(m, n);
        self.vertices[k] = v;
    }

    pub fn tangent_plane(&self, m: usize, n: usize) -> &Plane {
        &self.planes[self.flat(m, n)]
    }

    /// `(vertex(n, m))`: the mesh with lattice directions exchanged.
    pub fn transposed(&self) -> SurfaceMesh {
        let mut vertices = Vec::with_capacity(self.vertices.len());
        let mut planes = Vec::with_capacity(self.planes.len());
        for n in 0..self.cols {
            for m in 0..self.rows {
                vertices.push(self.vertex(m, n));
                planes.push(*self.tangent_plane(m, n));
            }
        }
        SurfaceMesh { a: self.a2, a2: self.a, rows: self.cols, cols: self.rows, vertices, planes }
    }

    fn need(&self, m: usize, n: usize, dm: usize, dn: usize) -> Result<(), DiscreteError> {
        if m + dm < self.rows && n + dn < self.cols {
            Ok(())
        } else {
            Err(DiscreteError::BoundaryIndex(m, n))
        }
    }

    /// `Δ₁r = (r(m+1,n) − r(m,n)) / a₁`.
    pub fn delta1(&self, m: usize, n: usize) -> Result<Vec3, DiscreteError> {
        self.need(m, n, 1, 0)?;
        Ok((self.vertex(m + 1, n) - self.vertex(m, n)) / self.a)
    }

    /// `Δ₂r = (r(m,n+1) − r(m,n)) / a₂`.
    pub fn delta2(&self, m: usize, n: usize) -> Result<Vec3, DiscreteError> {
        self.need(m, n, 0, 1)?;
        Ok((self.vertex(m, n + 1) - self.vertex(m, n)) / self.a2)
    }

    /// Unit normal along `Δ₁r × Δ₂r`.
    pub fn discrete_normal(&self, m: usize, n: usize) -> Result<Vec3, DiscreteError> {
        let (d1, d2) = (self.delta1(m, n)?, self.delta2(m, n)?);
        unit_normal(d1, d2, TANGENT_TOL).ok_or(DiscreteError::DegenerateTangents(m, n))
    }

    /// `(Δ₁n, Δ₂n)` at `(m, n)`.
    pub fn normal_deltas(&self, m: usize, n: usize) -> Result<(Vec3, Vec3), DiscreteError> {
        self.need(m, n, 1, 1)?;
        let n0 = self.discrete_normal(m, n)?;
        let n1 = self.discrete_normal(m + 1, n)?;
        let n2 = self.discrete_normal(m, n + 1)?;
        Ok(((n1 - n0) / self.a, (n2 - n0) / self.a2))
    }

    /// `(|Δ₁n · Δ₁r|, |Δ₂n · Δ₂r|)` at `(m, n)`, unscaled.
    pub fn tangency_residuals(&self, m: usize, n: usize) -> Result<(f64, f64), DiscreteError> {
        let (dn1, dn2) = self.normal_deltas(m, n)?;
        Ok((dn1.dot(self.delta1(m, n)?).abs(), dn2.dot(self.delta2(m, n)?).abs()))
    }

    /// Planarity of the star at an interior vertex: `a₁|Δ₁n·Δ₁r|` taken at
    /// `(m−1, n)` and `a₂|Δ₂n·Δ₂r|` at `(m, n−1)`. Each reads only the five
    /// star points, and vanishes exactly when the west (resp. south) neighbour
    /// lies in the plane of `r`, its east and its north neighbour.
    pub fn coplanarity_residual(&self, m: usize, n: usize) -> Result<(f64, f64), DiscreteError> {
        if m == 0 || n == 0 {
            return Err(DiscreteError::BoundaryIndex(m, n));
        }
        self.need(m, n, 1, 1)?;
        let here = self.discrete_normal(m, n)?;
        let west = self.discrete_normal(m - 1, n)?;
        let south = self.discrete_normal(m, n - 1)?;
        let d1 = self.delta1(m - 1, n)?;
        let d2 = self.delta2(m, n - 1)?;
        Ok(((here - west).dot(d1).abs(), (here - south).dot(d2).abs()))
    }

    /// Largest `||edge| / a − 1|` over the edges incident to `(m, n)`.
    pub fn edge_residual_at(&self, m: usize, n: usize) -> f64 {
        let v = self.vertex(m, n);
        let mut worst: f64 = 0.0;
        let mut edge = |w: Vec3, a: f64| worst = worst.max((v.distance(w) / a - 1.0).abs());
        if m > 0 {
            edge(self.vertex(m - 1, n), self.a);
        }
        if m + 1 < self.rows {
            edge(self.vertex(m + 1, n), self.a);
        }
        if n > 0 {
            edge(self.vertex(m, n - 1), self.a2);
        }
        if n + 1 < self.cols {
            edge(self.vertex(m, n + 1), self.a2);
        }
        worst
    }

    /// Curvature at `(m, n)` from the forward star:
    /// `−(Δ₁n·Δ₂r)(Δ₂n·Δ₁r) / (1 − (Δ₁r·Δ₂r)²)`.
    pub fn discrete_gaussian_curvature(&self, m: usize, n: usize) -> Result<f64, DiscreteError> {
        let (dn1, dn2) = self.normal_deltas(m, n)?;
        let (d1, d2) = (self.delta1(m, n)?, self.delta2(m, n)?);
        let c = d1.dot(d2);
        let denom = 1.0 - c * c;
        if !(denom > 1e-12) {
            return Err(DiscreteError::DegenerateTangents(m, n));
        }
        Ok(-(dn1.dot(d2)) * (dn2.dot(d1)) / denom)
    }

    /// Tetrahedron data of quad `(m, n)`.
    pub fn quad_geometry(&self, m: usize, n: usize) -> Result<QuadGeometry, DiscreteError> {
        if !self.is_isotropic() {
            return Err(DiscreteError::Anisotropic);
        }
        self.need(m, n, 1, 1)?;
        let a = self.a;
        let (pa, pb, pc, pd) =
            (self.vertex(m, n), self.vertex(m + 1, n), self.vertex(m + 1, n + 1), self.vertex(m, n + 1));
        let (ab, ac, ad) = (pb - pa, pc - pa, pd - pa);
        let phi = ab.angle(ad);
        let psi = (pa - pd).angle(pc - pd);
        let sum = phi.cos() + psi.cos();
        if sum < -TETRA_SLACK {
            return Err(DiscreteError::DegenerateTetrahedron { m, n, sum });
        }
        let abc = ab.cross(ac);
        let area_abc = 0.5 * abc.norm();
        let height = match abc.try_normalize(f64::MIN_POSITIVE) {
            Some(u) => ad.dot(u).abs(),
            None => return Err(DiscreteError::DegenerateTetrahedron { m, n, sum }),
        };
        let det = det3(ab, ac, ad);
        let u = ab / ab.norm();
        let towards_d = ad - u * ad.dot(u);
        let towards_c = ac - u * ac.dot(u);
        let theta = towards_d.angle(towards_c);
        Ok(QuadGeometry {
            a,
            phi,
            psi,
            diag_ac: ac.norm(),
            diag_bd: (pd - pb).norm(),
            area_abc,
            height,
            det,
            volume: det.abs() / 6.0,
            theta,
            k: -theta.sin().powi(2) / (a * a),
            closed: ClosedForms::new(a, phi, psi),
        })
    }

    /// Acute angles between `π(r)` and `T₁π(r)`, and between `π(r)` and
    /// `T₂π(r)`, from the stored tangent planes.
    pub fn plane_angles(&self, m: usize, n: usize) -> (Option<f64>, Option<f64>) {
        let here = self.tangent_plane(m, n);
        let t1 = (m + 1 < self.rows).then(|| crate::geom::dihedral_angle(here, self.tangent_plane(m + 1, n)));
        let t2 = (n + 1 < self.cols).then(|| crate::geom::dihedral_angle(here, self.tangent_plane(m, n + 1)));
        (t1, t2)
    }
}

/// Completes the quad `r, r₁ = T₁r, r₂ = T₂r` given the tangent planes at
/// `r₁` and `r₂`, for equal edge lengths `a`. See [`extend_quad_aniso`].
pub fn extend_quad(
    r: Vec3,
    r1: Vec3,
    r2: Vec3,
    plane1: &Plane,
    plane2: &Plane,
    a: f64,
    tol: f64,
) -> Result<(Vec3, f64), DiscreteError> {
    extend_quad_aniso(r, r1, r2, plane1, plane2, a, a, tol)
}

/// Completes a quad: the new vertex lies on the line `π(r₁) ∩ π(r₂)` (which
/// passes through `r`), at its second meeting point with the sphere on the
/// diameter from `r` to `r₁ + r₂ − r`. When the data are consistent this is
/// the point at distance `a₂` from `r₁` and `a₁` from `r₂`; the relative
/// mismatch is returned as the residual and must stay below `tol`.
///
/// Coincident planes (a flat star) complete the parallelogram.
#[allow(clippy::too_many_arguments)]
pub fn extend_quad_aniso(
    r: Vec3,
    r1: Vec3,
    r2: Vec3,
    plane1: &Plane,
    plane2: &Plane,
    a1: f64,
    a2: f64,
    tol: f64,
) -> Result<(Vec3, f64), DiscreteError> {
    let scale = a1.max(a2);
    let residual = |c: Vec3| ((c.distance(r1) / a2 - 1.0).abs()).max((c.distance(r2) / a1 - 1.0).abs());
    let line = match plane_intersection(plane1, plane2, tol) {
        Ok(line) => Some(line),
        Err(GeomError::ParallelPlanes) => {
            if plane1.signed_distance(plane2.point).abs() > tol * scale {
                return Err(DiscreteError::ParallelPlanes);
            }
            None
        }
        Err(e) => return Err(e.into()),
    };
    for p in [plane1, plane2] {
        let off = p.signed_distance(r).abs() / scale;
        if !(off <= tol) {
            return Err(DiscreteError::ConsistencyViolation(off));
        }
    }
    let c = match line {
        Some(line) => {
            let through_r = Line { point: r, unit_direction: line.unit_direction };
            let center = (r1 + r2) * 0.5;
            let radius = center.distance(r);
            // The primitive's tolerance is absolute; scale it to the quad.
            line_sphere_second_intersection(&through_r, center, radius, r, tol * scale.min(1.0))?
        }
        None => r1 + r2 - r,
    };
    let res = residual(c);
    if !(res < tol) {
        return Err(DiscreteError::ConsistencyViolation(res));
    }
    Ok((c, res))
}

/// Propagates a net from Cauchy data, quad by quad in lexicographic order.
/// Each new vertex gets the tangent plane through itself and its two
/// predecessors.
pub fn build_from_cauchy(data: &CauchyData, tol: f64) -> Result<SurfaceMesh, DiscreteError> {
    let (normals1, normals2) = data.validate()?;
    let (a1, a2) = data.edge_lengths();
    let (rows, cols) = (data.strip1.len(), data.strip2.len());
    let unset = Plane { point: Vec3::ZERO, unit_normal: Vec3::Z };
    let mut mesh = SurfaceMesh {
        a: a1,
        a2,
        rows,
        cols,
        vertices: vec![Vec3::ZERO; rows * cols],
        planes: vec![unset; rows * cols],
    };
    for (m, (&p, &nrm)) in data.strip1.iter().zip(&normals1).enumerate() {
        let k = mesh.flat(m, 0);
        mesh.vertices[k] = p;
        mesh.planes[k] = Plane { point: p, unit_normal: nrm };
    }
    for (n, (&p, &nrm)) in data.strip2.iter().zip(&normals2).enumerate().skip(1) {
        let k = mesh.flat(0, n);
        mesh.vertices[k] = p;
        mesh.planes[k] = Plane { point: p, unit_normal: nrm };
    }
    for m in 0..rows - 1 {
        for n in 0..cols - 1 {
            let wrap = |e: DiscreteError| DiscreteError::Construction { m, n, source: Box::new(e) };
            let (r, r1, r2) = (mesh.vertex(m, n), mesh.vertex(m + 1, n), mesh.vertex(m, n + 1));
            let (p1, p2) = (*mesh.tangent_plane(m + 1, n), *mesh.tangent_plane(m, n + 1));
            let (c, _) = extend_quad_aniso(r, r1, r2, &p1, &p2, a1, a2, tol).map_err(wrap)?;
            let plane = plane_through_points(c, r1, r2, 0.0).map_err(|e| wrap(e.into()))?;
            let k = mesh.flat(m + 1, n + 1);
            mesh.vertices[k] = c;
            mesh.planes[k] = plane;
        }
    }
    Ok(mesh)
}

/// Mean, extremes and largest deviation from the mean.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Stats {
    pub count: usize,
    pub mean: f64,
    pub min: f64,
    pub max: f64,
    pub max_dev: f64,
}

impl Stats {
    pub fn of(values: &[f64]) -> Option<Stats> {
        if values.is_empty() {
            return None;
        }
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let max_dev = values.iter().fold(0.0f64, |m, v| m.max((v - mean).abs()));
        Some(Stats { count: values.len(), mean, min, max, max_dev })
    }
}

/// Aggregate invariants of a net.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InvariantReport {
    pub rows: usize,
    pub cols: usize,
    pub a: f64,
    pub a2: f64,
    /// Worst `||edge| / a − 1|` over all edges.
    pub edge_residual: f64,
    pub edge_worst: (usize, usize),
    /// Worst star-planarity residual over interior vertices.
    pub coplanarity_residual: f64,
    pub coplanarity_worst: (usize, usize),
    /// Tetrahedron dihedral angle per quad (equal edge lengths only).
    pub theta_quad: Option<Stats>,
    /// Angle between neighbouring tangent planes, per lattice direction.
    pub theta_planes_1: Option<Stats>,
    pub theta_planes_2: Option<Stats>,
    /// Largest gap between the per-quad angle and the two plane angles
    /// at the same base vertex.
    pub theta_agreement: Option<f64>,
    /// Forward-star curvature per vertex.
    pub k_vertex: Option<Stats>,
    /// `|mean K + sin²θ / a²|`, with `θ` the mean per-quad angle (or the
    /// direction-1 plane angle when the edges differ).
    pub k_relation_residual: Option<f64>,
    /// Largest `|K(m,n) − (tan²(φ/2)tan²(ψ/2) − 1)/a²|` per quad.
    pub k_closed_form_residual: Option<f64>,
    /// Largest `|cos θ − tan(φ/2)tan(ψ/2)|` per quad.
    pub cos_theta_residual: Option<f64>,
    /// Largest coordinate vs closed-form relative deviation per quad.
    pub cross_check_residual: Option<f64>,
    /// `|a − sin θ|`: zero exactly when the net has curvature −1.
    pub sine_condition_residual: Option<f64>,
    /// False for (numerically) flat nets, where `θ = K = 0`.
    pub pseudospherical: bool,
    pub tol: f64,
    /// Edge and planarity residuals are all below `tol`.
    pub pass: bool,
}

/// Full invariant report; `pass` reflects edges and star planarity at `tol`.
pub fn verify_chebyshev_net(mesh: &SurfaceMesh, tol: f64) -> Result<InvariantReport, DiscreteError> {
    let (rows, cols) = (mesh.rows, mesh.cols);
    if rows < 3 || cols < 3 {
        return Err(DiscreteError::TooSmall(rows, cols));
    }
    let mut edge = (0.0f64, (0, 0));
    for m in 0..rows {
        for n in 0..cols {
            let e = mesh.edge_residual_at(m, n);
            if e > edge.0 || e.is_nan() {
                edge = (e, (m, n));
            }
        }
    }
    let mut cop = (0.0f64, (1, 1));
    for m in 1..rows - 1 {
        for n in 1..cols - 1 {
            let c = match mesh.coplanarity_residual(m, n) {
                Ok((x, y)) => x.max(y),
                Err(_) => f64::INFINITY,
            };
            if c > cop.0 || c.is_nan() {
                cop = (c, (m, n));
            }
        }
    }

    let mut k_vertex = vec![];
    for m in 0..rows - 2 {
        for n in 0..cols - 2 {
            if let Ok(k) = mesh.discrete_gaussian_curvature(m, n) {
                k_vertex.push(((m, n), k));
            }
        }
    }
    let k_stats = Stats::of(&k_vertex.iter().map(|v| v.1).collect::<Vec<_>>());

    let (mut p1, mut p2) = (vec![], vec![]);
    for m in 0..rows {
        for n in 0..cols {
            let (t1, t2) = mesh.plane_angles(m, n);
            p1.extend(t1);
            p2.extend(t2);
        }
    }
    let theta_planes_1 = Stats::of(&p1);
    let theta_planes_2 = Stats::of(&p2);

    let mut quads = vec![];
    if mesh.is_isotropic() {
        for m in 0..rows - 1 {
            for n in 0..cols - 1 {
                if let Ok(q) = mesh.quad_geometry(m, n) {
                    quads.push(((m, n), q));
                }
            }
        }
    }
    let theta_quad = Stats::of(&quads.iter().map(|q| q.1.theta).collect::<Vec<_>>());
    let fold = |it: &mut dyn Iterator<Item = f64>| it.fold(None, |acc: Option<f64>, x| Some(acc.map_or(x, |a| a.max(x))));
    let theta_agreement = fold(&mut quads.iter().flat_map(|&((m, n), q)| {
        let (t1, t2) = mesh.plane_angles(m, n);
        [t1, t2].into_iter().flatten().map(move |t| (t - q.theta).abs())
    }));
    let cos_theta_residual = fold(&mut quads.iter().map(|q| q.1.cos_theta_residual()));
    let cross_check_residual = fold(&mut quads.iter().map(|q| q.1.cross_check_deviation()));
    let k_closed_form_residual = fold(&mut k_vertex.iter().filter_map(|&((m, n), k)| {
        quads.iter().find(|q| q.0 == (m, n)).map(|q| (k - q.1.closed.k).abs())
    }));

    let (theta_ref, a_ref) = match (theta_quad, theta_planes_1) {
        (Some(t), _) => (Some(t.mean), mesh.a),
        (None, Some(t)) => (Some(t.mean), mesh.a),
        _ => (None, mesh.a),
    };
    let k_relation_residual = match (k_stats, theta_ref) {
        (Some(k), Some(t)) => Some((k.mean + t.sin().powi(2) / (a_ref * a_ref)).abs()),
        _ => None,
    };
    let sine_condition_residual = theta_ref.map(|t| (a_ref - t.sin()).abs());
    let pseudospherical = theta_ref.is_some_and(|t| t > tol);
    let pass = edge.0 < tol && cop.0 < tol;
    Ok(InvariantReport {
        rows,
        cols,
        a: mesh.a,
        a2: mesh.a2,
        edge_residual: edge.0,
        edge_worst: edge.1,
        coplanarity_residual: cop.0,
        coplanarity_worst: cop.1,
        theta_quad,
        theta_planes_1,
        theta_planes_2,
        theta_agreement,
        k_vertex: k_stats,
        k_relation_residual,
        k_closed_form_residual,
        cos_theta_residual,
        cross_check_residual,
        sine_condition_residual,
        pseudospherical,
        tol,
        pass,
    })
}

/// [`verify_chebyshev_net`] at [`DEFAULT_MESH_TOL`].
pub fn invariant_report(mesh: &SurfaceMesh) -> Result<InvariantReport, DiscreteError> {
    verify_chebyshev_net(mesh, DEFAULT_MESH_TOL)
}

/// One interior vertex of the per-vertex report.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeshReportRow {
    pub m: usize,
    pub n: usize,
    pub phi: Option<f64>,
    pub psi: Option<f64>,
    pub theta: Option<f64>,
    pub k: Option<f64>,
    pub edge_residual: f64,
    pub coplanarity_residual: Option<f64>,
}

/// Per-vertex rows for the `(rows − 2)(cols − 2)` interior vertices.
pub fn report_rows(mesh: &SurfaceMesh) -> Vec<MeshReportRow> {
    let mut out = Vec::new();
    for m in 1..mesh.rows.saturating_sub(1) {
        for n in 1..mesh.cols.saturating_sub(1) {
            let q = mesh.quad_geometry(m, n).ok();
            out.push(MeshReportRow {
                m,
                n,
                phi: q.map(|q| q.phi),
                psi: q.map(|q| q.psi),
                theta: q.map(|q| q.theta),
                k: mesh.discrete_gaussian_curvature(m, n).ok(),
                edge_residual: mesh.edge_residual_at(m, n),
                coplanarity_residual: mesh.coplanarity_residual(m, n).ok().map(|(x, y)| x.max(y)),
            });
        }
    }
    out
}
