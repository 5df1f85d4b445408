//! Chebyshev nets parametrized over a product of time scales.
//!
//! Partial delta derivatives `D₁, D₂` are the exact jump quotients along
//! scattered coordinates and forward differences along dense ones, so a
//! net on `aℤ × aℤ` reproduces the discrete theory operator for operator and
//! a net on `ℝ × ℝ` approaches the smooth one as the sampling step shrinks.
//!
//! The curvature `−(D₁n·D₂r)(D₂n·D₁r) / (1 − (D₁r·D₂r)²)` is only
//! conjectured to be constant on such nets in general; it is audited by
//! [`conjecture_constancy_report`], never asserted.

use serde::Serialize;
use thiserror::Error;

use crate::discrete::{Stats, SurfaceMesh};
use crate::geom::{unit_normal, Vec3};
use crate::timescale::{Direction, GridDomain, GridFunction, Step, TimeScale, TimeScaleError};

/// Tangents closer to parallel than this (sine of their angle) are degenerate.
const TANGENT_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SurfaceError {
    #[error("index ({0}, {1}) lacks the forward neighbours this quantity needs")]
    BoundaryIndex(usize, usize),
    #[error("tangent vectors at ({0}, {1}) are parallel")]
    DegenerateTangents(usize, usize),
    #[error("window is {0}×{1}; at least 3×3 is required")]
    TooSmall(usize, usize),
    #[error("not a Chebyshev net at tolerance {tol:e}: worst residual {worst:e} at ({i}, {j})")]
    NotChebyshevNet { tol: f64, worst: f64, i: usize, j: usize },
    #[error(transparent)]
    Grid(#[from] TimeScaleError),
}

fn lift(e: TimeScaleError) -> SurfaceError {
    match e {
        TimeScaleError::BoundaryIndex(i, j) => SurfaceError::BoundaryIndex(i, j),
        other => SurfaceError::Grid(other),
    }
}

type Cached = Result<Vec3, SurfaceError>;

/// A net `r` on a grid domain with its derivative fields materialized.
#[derive(Debug, Clone)]
pub struct TimeScaleSurface {
    r: GridFunction<Vec3>,
    d1r: Vec<Cached>,
    d2r: Vec<Cached>,
    normal: Vec<Cached>,
    d1n: Vec<Cached>,
    d2n: Vec<Cached>,
}

impl TimeScaleSurface {
    pub fn new(r: GridFunction<Vec3>) -> Self {
        let d = r.domain().clone();
        let each = |f: &dyn Fn(usize, usize) -> Cached| d.indices().map(|(i, j)| f(i, j)).collect::<Vec<_>>();
        let d1r = each(&|i, j| r.partial_delta(Direction::One, i, j).map_err(lift));
        let d2r = each(&|i, j| r.partial_delta(Direction::Two, i, j).map_err(lift));
        let normal = each(&|i, j| {
            let k = d.flat(i, j);
            let (a, b) = (d1r[k].clone()?, d2r[k].clone()?);
            unit_normal(a, b, TANGENT_TOL).ok_or(SurfaceError::DegenerateTangents(i, j))
        });
        let n_delta = |dir: Direction, i: usize, j: usize| -> Cached {
            let ((i1, j1), gap) = d.forward(dir, i, j).map_err(lift)?;
            let here = normal[d.flat(i, j)].clone()?;
            let next = normal[d.flat(i1, j1)].clone()?;
            Ok((next - here) / gap)
        };
        let d1n = each(&|i, j| n_delta(Direction::One, i, j));
        let d2n = each(&|i, j| n_delta(Direction::Two, i, j));
        TimeScaleSurface { r, d1r, d2r, normal, d1n, d2n }
    }

    /// A discrete net viewed on `a₁ℤ × a₂ℤ`.
    pub fn from_mesh(mesh: &SurfaceMesh) -> Result<Self, SurfaceError> {
        let (a1, a2) = mesh.edge_lengths();
        let domain = GridDomain::new(
            TimeScale::lattice(a1)?,
            (0.0, (mesh.rows() - 1) as f64 * a1),
            TimeScale::lattice(a2)?,
            (0.0, (mesh.cols() - 1) as f64 * a2),
            a1.min(a2),
        )?;
        if domain.shape() != (mesh.rows(), mesh.cols()) {
            return Err(SurfaceError::Grid(TimeScaleError::InvalidGrid("lattice realization size mismatch".into())));
        }
        Ok(TimeScaleSurface::new(GridFunction::from_values(domain, mesh.vertices().to_vec())?))
    }

    pub fn r(&self) -> &GridFunction<Vec3> {
        &self.r
    }

    pub fn domain(&self) -> &GridDomain {
        self.r.domain()
    }

    fn at(&self, field: &[Cached], i: usize, j: usize) -> Cached {
        let (n1, n2) = self.domain().shape();
        if i >= n1 || j >= n2 {
            return Err(SurfaceError::BoundaryIndex(i, j));
        }
        field[self.domain().flat(i, j)].clone()
    }

    pub fn d1r(&self, i: usize, j: usize) -> Cached {
        self.at(&self.d1r, i, j)
    }

    pub fn d2r(&self, i: usize, j: usize) -> Cached {
        self.at(&self.d2r, i, j)
    }

    pub fn d1n(&self, i: usize, j: usize) -> Cached {
        self.at(&self.d1n, i, j)
    }

    pub fn d2n(&self, i: usize, j: usize) -> Cached {
        self.at(&self.d2n, i, j)
    }

    /// Unit normal along `D₁r × D₂r`.
    pub fn ts_normal(&self, i: usize, j: usize) -> Cached {
        self.at(&self.normal, i, j)
    }

    /// `(||D₁r| − 1|, ||D₂r| − 1|)`.
    pub fn unit_residuals(&self, i: usize, j: usize) -> Result<(f64, f64), SurfaceError> {
        Ok(((self.d1r(i, j)?.norm() - 1.0).abs(), (self.d2r(i, j)?.norm() - 1.0).abs()))
    }

    /// `(|D₁n · D₁r|, |D₂n · D₂r|)`.
    pub fn tangency_residuals(&self, i: usize, j: usize) -> Result<(f64, f64), SurfaceError> {
        Ok((self.d1n(i, j)?.dot(self.d1r(i, j)?).abs(), self.d2n(i, j)?.dot(self.d2r(i, j)?).abs()))
    }

    /// `(D₁n·D₂r, D₂n·D₁r, D₁r·D₂r)`, the ingredients of the curvature.
    pub fn curvature_factors(&self, i: usize, j: usize) -> Result<(f64, f64, f64), SurfaceError> {
        let (d1, d2) = (self.d1r(i, j)?, self.d2r(i, j)?);
        let (dn1, dn2) = (self.d1n(i, j)?, self.d2n(i, j)?);
        Ok((dn1.dot(d2), dn2.dot(d1), d1.dot(d2)))
    }

    /// `−(D₁n·D₂r)(D₂n·D₁r) / (1 − (D₁r·D₂r)²)`.
    pub fn ts_gaussian_curvature(&self, i: usize, j: usize) -> Result<f64, SurfaceError> {
        let (d1, d2) = (self.d1r(i, j)?, self.d2r(i, j)?);
        let (dn1, dn2) = (self.d1n(i, j)?, self.d2n(i, j)?);
        let c = d1.dot(d2);
        let denom = 1.0 - c * c;
        if !(denom > 1e-12) {
            return Err(SurfaceError::DegenerateTangents(i, j));
        }
        Ok(-(dn1.dot(d2)) * (dn2.dot(d1)) / denom)
    }
}

/// One grid point of the verification report. Entries that need a missing
/// forward neighbour are `None`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TsRow {
    pub i: usize,
    pub j: usize,
    pub u: f64,
    pub v: f64,
    pub class1: &'static str,
    pub class2: &'static str,
    pub k_time: Option<f64>,
    pub unit_res_1: Option<f64>,
    pub unit_res_2: Option<f64>,
    pub tangency_res_1: Option<f64>,
    pub tangency_res_2: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TsReport {
    pub rows: Vec<TsRow>,
    pub max_unit_residual: f64,
    pub max_tangency_residual: f64,
    pub worst: (usize, usize),
    /// Largest `|D₁D₂r − D₂D₁r|` relative to `max |r|`; a sampled surrogate
    /// for complete differentiability, reported but not judged.
    pub mixed_partial_residual: f64,
    /// Ratio of the largest to the smallest gap between realized samples of
    /// dense pieces, per axis (1 for uniform sampling or no dense pieces).
    pub sampling_regularity: (f64, f64),
    pub tol: f64,
    pub pass: bool,
}

fn regularity(domain: &GridDomain, dir: Direction) -> f64 {
    let gaps: Vec<f64> = domain
        .axis(dir)
        .points()
        .iter()
        .filter_map(|p| match p.forward {
            Step::Sample(g) => Some(g),
            _ => None,
        })
        .collect();
    if gaps.is_empty() {
        return 1.0;
    }
    let max = gaps.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = gaps.iter().copied().fold(f64::INFINITY, f64::min);
    max / min
}

/// Residuals of the four defining conditions (unit tangents, tangency of the
/// normal derivatives) at every point where they are computable. Passes when
/// all are below `tol`.
pub fn verify_ts_chebyshev(s: &TimeScaleSurface, tol: f64) -> Result<TsReport, SurfaceError> {
    let d = s.domain();
    let (n1, n2) = d.shape();
    if n1 < 3 || n2 < 3 {
        return Err(SurfaceError::TooSmall(n1, n2));
    }
    let mut rows = Vec::with_capacity(d.len());
    let (mut max_unit, mut max_tan, mut worst, mut worst_val) = (0.0f64, 0.0f64, (0, 0), 0.0f64);
    let mut mixed = 0.0f64;
    for (i, j) in d.indices() {
        let (u, v) = d.coords(i, j);
        let d1 = s.d1r(i, j).ok().map(|x| (x.norm() - 1.0).abs());
        let d2 = s.d2r(i, j).ok().map(|x| (x.norm() - 1.0).abs());
        let t1 = s.d1n(i, j).and_then(|dn| Ok(dn.dot(s.d1r(i, j)?).abs())).ok();
        let t2 = s.d2n(i, j).and_then(|dn| Ok(dn.dot(s.d2r(i, j)?).abs())).ok();
        for x in [d1, d2].into_iter().flatten() {
            max_unit = max_unit.max(x);
        }
        for x in [t1, t2].into_iter().flatten() {
            max_tan = max_tan.max(x);
        }
        let here = [d1, d2, t1, t2].into_iter().flatten().fold(0.0f64, f64::max);
        if here > worst_val {
            worst_val = here;
            worst = (i, j);
        }
        if let Ok(m) = s.r().mixed_partial_residual(i, j) {
            mixed = mixed.max(m);
        }
        rows.push(TsRow {
            i,
            j,
            u,
            v,
            class1: d.axis1().get(i).class.label(),
            class2: d.axis2().get(j).class.label(),
            k_time: s.ts_gaussian_curvature(i, j).ok(),
            unit_res_1: d1,
            unit_res_2: d2,
            tangency_res_1: t1,
            tangency_res_2: t2,
        });
    }
    let scale = s.r().max_abs().max(f64::MIN_POSITIVE);
    Ok(TsReport {
        rows,
        max_unit_residual: max_unit,
        max_tangency_residual: max_tan,
        worst,
        mixed_partial_residual: mixed / scale,
        sampling_regularity: (regularity(d, Direction::One), regularity(d, Direction::Two)),
        tol,
        pass: max_unit < tol && max_tan < tol,
    })
}

/// Statistics of the time-scale curvature over a window. Purely descriptive:
/// `within_threshold` compares the spread with a user threshold but carries
/// no verdict.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConjectureReport {
    pub label: &'static str,
    pub stats: Stats,
    pub std_dev: f64,
    /// `(i, j, u, v, K)` at every point where the curvature is defined.
    pub profile: Vec<(usize, usize, f64, f64, f64)>,
    pub threshold: f64,
    pub within_threshold: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConjectureConfig {
    /// Tolerance the net must meet in [`verify_ts_chebyshev`].
    pub net_tol: f64,
    /// Spread considered "constant" for the informational flag.
    pub threshold: f64,
}

impl Default for ConjectureConfig {
    fn default() -> Self {
        ConjectureConfig { net_tol: 1e-8, threshold: 1e-8 }
    }
}

pub const CONJECTURE_LABEL: &str = "conjecture audit";

pub fn conjecture_constancy_report(
    s: &TimeScaleSurface,
    config: ConjectureConfig,
) -> Result<ConjectureReport, SurfaceError> {
    let check = verify_ts_chebyshev(s, config.net_tol)?;
    if !check.pass {
        return Err(SurfaceError::NotChebyshevNet {
            tol: config.net_tol,
            worst: check.max_unit_residual.max(check.max_tangency_residual),
            i: check.worst.0,
            j: check.worst.1,
        });
    }
    let profile: Vec<_> = check.rows.iter().filter_map(|r| r.k_time.map(|k| (r.i, r.j, r.u, r.v, k))).collect();
    let values: Vec<f64> = profile.iter().map(|p| p.4).collect();
    let stats = Stats::of(&values).ok_or(SurfaceError::TooSmall(s.domain().shape().0, s.domain().shape().1))?;
    let var = values.iter().map(|k| (k - stats.mean).powi(2)).sum::<f64>() / values.len() as f64;
    Ok(ConjectureReport {
        label: CONJECTURE_LABEL,
        stats,
        std_dev: var.sqrt(),
        profile,
        threshold: config.threshold,
        within_threshold: stats.max_dev <= config.threshold,
    })
}
