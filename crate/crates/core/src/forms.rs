//! First and second fundamental forms on sampled parameter domains.
//!
//! Forms are stored pointwise on a [`GridDomain`]. Derivatives along either
//! axis use three-point stencils on the actual sample coordinates: central in
//! the interior, one-sided second order at the two ends. Nested derivatives
//! (Gauss, Codazzi, and the normal derivatives inside the second form) are
//! differences of pointwise quantities, so they stay second order only where
//! every inner stencil is central; convergence studies should look at least
//! two samples away from the window edge.
//!
//! The unit normal of an immersion is `r_u × r_v / |r_u × r_v|`, which fixes
//! the sign of `L, M, N` and of the mean curvature.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::{det3, Vec3};
use crate::timescale::{FieldValue, GridDomain, GridFunction, TimeScaleError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FormsError {
    #[error("degenerate first fundamental form at ({0}, {1}): W = {2:e}")]
    DegenerateFirstForm(usize, usize, f64),
    #[error("index ({0}, {1}) is too close to the window edge for this stencil")]
    BoundaryIndex(usize, usize),
    #[error("Chebyshev angle degenerate: |F| = {0} is not below 1")]
    DegenerateChebyshevAngle(f64),
    #[error("not a Chebyshev field at ({0}, {1}): residual {2:e}")]
    NotChebyshev(usize, usize, f64),
    #[error("the window has no interior points")]
    EmptyDomain,
    #[error("field has {got} entries, domain needs {expected}")]
    SizeMismatch { expected: usize, got: usize },
    #[error(transparent)]
    Grid(#[from] TimeScaleError),
}

/// `(E, F, G, L, M, N)` with `W = EG − F²`. Serialized as the six-element
/// array; `W` is recomputed on load.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 6]", into = "[f64; 6]")]
pub struct FundamentalForms {
    pub e: f64,
    pub f: f64,
    pub g: f64,
    pub l: f64,
    pub m: f64,
    pub n: f64,
    pub w: f64,
}

impl From<[f64; 6]> for FundamentalForms {
    fn from(a: [f64; 6]) -> Self {
        FundamentalForms::new(a[0], a[1], a[2], a[3], a[4], a[5])
    }
}

impl From<FundamentalForms> for [f64; 6] {
    fn from(f: FundamentalForms) -> Self {
        [f.e, f.f, f.g, f.l, f.m, f.n]
    }
}

impl FundamentalForms {
    pub fn new(e: f64, f: f64, g: f64, l: f64, m: f64, n: f64) -> Self {
        // Fused so that `1 − F²` keeps full relative accuracy when `E = G = 1`.
        FundamentalForms { e, f, g, l, m, n, w: (-f).mul_add(f, e * g) }
    }

    /// Chebyshev-net forms: `E = G = 1`, `F = cos ω`, `L = N = 0`, `M = sin ω`.
    ///
    /// `M` is computed as `±√(1 − F²)` from the stored `F` rather than by a
    /// separate `sin`, so the pair satisfies `F² + M² = 1` to rounding even
    /// where `cos` is ill-conditioned (`ω` near 0 or π).
    pub fn chebyshev(omega: f64) -> Self {
        let f = omega.cos();
        let m = (-f).mul_add(f, 1.0).max(0.0).sqrt().copysign(omega.sin());
        FundamentalForms::new(1.0, f, 1.0, 0.0, m, 0.0)
    }

    fn w_is_degenerate(&self) -> bool {
        !(self.w.abs() >= 1e-12 * (self.e * self.g).max(1.0)) || !self.w.is_finite()
    }

    /// Gaussian and mean curvature `(K, H)`.
    pub fn curvatures(&self) -> Result<(f64, f64), FormsError> {
        if self.w_is_degenerate() {
            return Err(FormsError::DegenerateFirstForm(0, 0, self.w));
        }
        let k = (self.l * self.n - self.m * self.m) / self.w;
        let h = (self.e * self.n - 2.0 * self.f * self.m + self.g * self.l) / (2.0 * self.w);
        Ok((k, h))
    }

    /// `(|E − 1|, |G − 1|, |L|, |N|)`: distance from Chebyshev asymptotic form.
    pub fn chebyshev_residuals(&self) -> (f64, f64, f64, f64) {
        ((self.e - 1.0).abs(), (self.g - 1.0).abs(), self.l.abs(), self.n.abs())
    }
}

/// Free-function form of [`FundamentalForms::curvatures`].
pub fn curvatures(f: &FundamentalForms) -> Result<(f64, f64), FormsError> {
    f.curvatures()
}

pub fn chebyshev_residuals(f: &FundamentalForms) -> (f64, f64, f64, f64) {
    f.chebyshev_residuals()
}

/// Gaussian curvature `−M² / (1 − F²)` of Chebyshev forms.
pub fn k_chebyshev(f: f64, m: f64) -> Result<f64, FormsError> {
    if !(f.abs() < 1.0 - 1e-12) {
        return Err(FormsError::DegenerateChebyshevAngle(f.abs()));
    }
    Ok(-m * m / (-f).mul_add(f, 1.0))
}

/// Derivative at sample `k` of a function known at the points `t`.
pub(crate) fn axis_derivative<T: FieldValue>(t: &[f64], k: usize, f: impl Fn(usize) -> T) -> T {
    let n = t.len();
    debug_assert!(n >= 3);
    if k == 0 {
        let (h1, h2) = (t[1] - t[0], t[2] - t[1]);
        f(0) * (-(2.0 * h1 + h2) / (h1 * (h1 + h2)))
            + f(1) * ((h1 + h2) / (h1 * h2))
            + f(2) * (-h1 / (h2 * (h1 + h2)))
    } else if k == n - 1 {
        let (h1, h2) = (t[n - 1] - t[n - 2], t[n - 2] - t[n - 3]);
        f(n - 1) * ((2.0 * h1 + h2) / (h1 * (h1 + h2)))
            + f(n - 2) * (-(h1 + h2) / (h1 * h2))
            + f(n - 3) * (h1 / (h2 * (h1 + h2)))
    } else {
        let (hm, hp) = (t[k] - t[k - 1], t[k + 1] - t[k]);
        f(k - 1) * (-hp / (hm * (hm + hp)))
            + f(k) * ((hp - hm) / (hm * hp))
            + f(k + 1) * (hm / (hp * (hm + hp)))
    }
}

/// Distance in samples from `(i, j)` to the nearest window edge.
fn depth(shape: (usize, usize), i: usize, j: usize) -> usize {
    i.min(shape.0 - 1 - i).min(j).min(shape.1 - 1 - j)
}

fn axis_coords(domain: &GridDomain) -> (Vec<f64>, Vec<f64>) {
    (domain.axis1().coords().collect(), domain.axis2().coords().collect())
}

/// Finite-difference weights for the `order`-th derivative at `x0` from
/// values at `nodes` (Fornberg's recursion).
fn fd_weights(x0: f64, nodes: &[f64], order: usize) -> Vec<f64> {
    let n = nodes.len();
    let mut c = vec![vec![0.0; order + 1]; n];
    c[0][0] = 1.0;
    let (mut c1, mut c4) = (1.0, nodes[0] - x0);
    for i in 1..n {
        let mn = i.min(order);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = nodes[i] - x0;
        for j in 0..i {
            let c3 = nodes[i] - nodes[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.into_iter().map(|w| w[order]).collect()
}

/// Second derivative at sample `k`, second-order accurate at every sample:
/// the symmetric three-point stencil where neighbouring gaps agree, otherwise
/// four points (one-sided at the ends). Needs at least four samples.
fn axis_second_derivative(t: &[f64], k: usize, f: impl Fn(usize) -> Vec3) -> Vec3 {
    let n = t.len();
    let uniform = k > 0 && k + 1 < n && {
        let (hm, hp) = (t[k] - t[k - 1], t[k + 1] - t[k]);
        (hm - hp).abs() <= 1e-12 * hm.max(hp)
    };
    let lo = if uniform {
        k - 1
    } else {
        k.saturating_sub(1).min(n - 4)
    };
    let width = if uniform { 3 } else { 4 };
    let w = fd_weights(t[k], &t[lo..lo + width], 2);
    w.iter().enumerate().fold(Vec3::ZERO, |acc, (q, &wq)| acc + f(lo + q) * wq)
}

/// Derivatives of a sampled immersion needed to assemble its forms.
struct ImmersionFrame<'a> {
    r: &'a GridFunction<Vec3>,
    t1: Vec<f64>,
    t2: Vec<f64>,
}

impl<'a> ImmersionFrame<'a> {
    fn new(r: &'a GridFunction<Vec3>) -> Result<Self, FormsError> {
        let (t1, t2) = axis_coords(r.domain());
        if t1.len() < 4 || t2.len() < 4 {
            return Err(FormsError::BoundaryIndex(t1.len(), t2.len()));
        }
        Ok(ImmersionFrame { r, t1, t2 })
    }

    fn r_u(&self, i: usize, j: usize) -> Vec3 {
        axis_derivative(&self.t1, i, |k| *self.r.get(k, j))
    }

    fn r_v(&self, i: usize, j: usize) -> Vec3 {
        axis_derivative(&self.t2, j, |k| *self.r.get(i, k))
    }

    /// Forms at `(i, j)`. The normal derivatives are those of
    /// `n = c/|c|`, `c = r_u × r_v`, namely `n_u = (c_u − (n·c_u) n)/|c|`,
    /// assembled from sampled second derivatives of `r` so that their
    /// accuracy does not drop at the window edges.
    fn forms(&self, i: usize, j: usize) -> Result<FundamentalForms, FormsError> {
        let (ru, rv) = (self.r_u(i, j), self.r_v(i, j));
        let ruu = axis_second_derivative(&self.t1, i, |k| *self.r.get(k, j));
        let rvv = axis_second_derivative(&self.t2, j, |k| *self.r.get(i, k));
        let ruv = axis_derivative(&self.t2, j, |k| self.r_u(i, k));
        let c = ru.cross(rv);
        let len = c.norm();
        if !(len > 0.0) || !len.is_finite() {
            return Err(FormsError::DegenerateFirstForm(i, j, 0.0));
        }
        let n = c / len;
        let dn = |dc: Vec3| (dc - n * n.dot(dc)) / len;
        let nu = dn(ruu.cross(rv) + ru.cross(ruv));
        let nv = dn(ruv.cross(rv) + ru.cross(rvv));
        let forms = FundamentalForms::new(
            ru.dot(ru),
            ru.dot(rv),
            rv.dot(rv),
            -nu.dot(ru),
            -nu.dot(rv),
            -nv.dot(rv),
        );
        if forms.w_is_degenerate() {
            return Err(FormsError::DegenerateFirstForm(i, j, forms.w));
        }
        Ok(forms)
    }
}

/// Fundamental forms of a sampled immersion at one grid index.
pub fn forms_from_immersion(r: &GridFunction<Vec3>, i: usize, j: usize) -> Result<FundamentalForms, FormsError> {
    let frame = ImmersionFrame::new(r)?;
    let (n1, n2) = r.domain().shape();
    if i >= n1 || j >= n2 {
        return Err(FormsError::BoundaryIndex(i, j));
    }
    frame.forms(i, j)
}

/// Fundamental forms at every index of a domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FormsFieldRepr", into = "FormsFieldRepr")]
pub struct FormsField {
    domain: GridDomain,
    forms: Vec<FundamentalForms>,
    #[serde(skip)]
    t1: Vec<f64>,
    #[serde(skip)]
    t2: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct FormsFieldRepr {
    domain: GridDomain,
    forms: Vec<FundamentalForms>,
}

impl TryFrom<FormsFieldRepr> for FormsField {
    type Error = FormsError;

    fn try_from(r: FormsFieldRepr) -> Result<Self, Self::Error> {
        FormsField::new(r.domain, r.forms)
    }
}

impl From<FormsField> for FormsFieldRepr {
    fn from(f: FormsField) -> Self {
        FormsFieldRepr { domain: f.domain, forms: f.forms }
    }
}

/// One row of the per-point forms report.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FormsReportRow {
    pub i: usize,
    pub j: usize,
    pub k_extrinsic: f64,
    pub k_intrinsic: f64,
    pub codazzi: (f64, f64),
}

impl FormsField {
    pub fn new(domain: GridDomain, forms: Vec<FundamentalForms>) -> Result<Self, FormsError> {
        if forms.len() != domain.len() {
            return Err(FormsError::SizeMismatch { expected: domain.len(), got: forms.len() });
        }
        let (t1, t2) = axis_coords(&domain);
        Ok(FormsField { domain, forms, t1, t2 })
    }

    /// Forms at every sample of `f(u, v)`.
    pub fn sample(domain: GridDomain, mut f: impl FnMut(f64, f64) -> FundamentalForms) -> Self {
        let forms = domain
            .indices()
            .map(|(i, j)| {
                let (u, v) = domain.coords(i, j);
                f(u, v)
            })
            .collect();
        FormsField::new(domain, forms).expect("sized from domain")
    }

    pub fn from_immersion(r: &GridFunction<Vec3>) -> Result<Self, FormsError> {
        let frame = ImmersionFrame::new(r)?;
        let domain = r.domain().clone();
        let forms = domain.indices().map(|(i, j)| frame.forms(i, j)).collect::<Result<Vec<_>, _>>()?;
        FormsField::new(domain, forms)
    }

    pub fn domain(&self) -> &GridDomain {
        &self.domain
    }

    pub fn forms(&self) -> &[FundamentalForms] {
        &self.forms
    }

    pub fn get(&self, i: usize, j: usize) -> &FundamentalForms {
        &self.forms[self.domain.flat(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, f: FundamentalForms) {
        let k = self.domain.flat(i, j);
        self.forms[k] = f;
    }

    pub fn shape(&self) -> (usize, usize) {
        self.domain.shape()
    }

    /// Indices at least `margin` samples from every edge.
    pub fn interior(&self, margin: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
        let shape = self.shape();
        self.domain.indices().filter(move |&(i, j)| depth(shape, i, j) >= margin)
    }

    fn du<T: FieldValue>(&self, i: usize, j: usize, f: impl Fn(usize, usize) -> T) -> T {
        axis_derivative(&self.t1, i, |k| f(k, j))
    }

    fn dv<T: FieldValue>(&self, i: usize, j: usize, f: impl Fn(usize, usize) -> T) -> T {
        axis_derivative(&self.t2, j, |k| f(i, k))
    }

    fn checked(&self, i: usize, j: usize, min_depth: usize) -> Result<FundamentalForms, FormsError> {
        let shape = self.shape();
        if i >= shape.0 || j >= shape.1 || depth(shape, i, j) < min_depth {
            return Err(FormsError::BoundaryIndex(i, j));
        }
        let f = *self.get(i, j);
        if f.w_is_degenerate() {
            return Err(FormsError::DegenerateFirstForm(i, j, f.w));
        }
        Ok(f)
    }

    pub fn curvatures_at(&self, i: usize, j: usize) -> Result<(f64, f64), FormsError> {
        self.get(i, j).curvatures().map_err(|_| FormsError::DegenerateFirstForm(i, j, self.get(i, j).w))
    }

    /// Gaussian curvature from the first form alone (determinant term plus
    /// divergence term). Needs two samples of room on every side.
    pub fn gauss_curvature_intrinsic(&self, i: usize, j: usize) -> Result<f64, FormsError> {
        let f0 = self.checked(i, j, 2)?;
        for (a, b) in [(i - 1, j), (i + 1, j), (i, j - 1), (i, j + 1)] {
            self.checked(a, b, 1)?;
        }
        let e = |a, b| self.get(a, b).e;
        let f = |a, b| self.get(a, b).f;
        let g = |a, b| self.get(a, b).g;
        let first = Vec3::new(f0.e, f0.f, f0.g);
        let d_u = Vec3::new(self.du(i, j, e), self.du(i, j, f), self.du(i, j, g));
        let d_v = Vec3::new(self.dv(i, j, e), self.dv(i, j, f), self.dv(i, j, g));
        let q1 = |a, b| (self.dv(a, b, f) - self.du(a, b, g)) / self.get(a, b).w.sqrt();
        let q2 = |a, b| (self.du(a, b, f) - self.dv(a, b, e)) / self.get(a, b).w.sqrt();
        let sw = f0.w.sqrt();
        let det_term = -det3(first, d_u, d_v) / (4.0 * f0.w * f0.w);
        let div_term = (self.du(i, j, q1) + self.dv(i, j, q2)) / (2.0 * sw);
        Ok(det_term + div_term)
    }

    /// The two Codazzi compatibility residuals; zero for forms of an actual
    /// surface.
    pub fn codazzi_residuals(&self, i: usize, j: usize) -> Result<(f64, f64), FormsError> {
        let f0 = self.checked(i, j, 1)?;
        let (_, h) = f0.curvatures().map_err(|_| FormsError::DegenerateFirstForm(i, j, f0.w))?;
        let c = |sel: fn(&FundamentalForms) -> f64| {
            (self.du(i, j, |a, b| sel(self.get(a, b))), self.dv(i, j, |a, b| sel(self.get(a, b))))
        };
        let (e_u, e_v) = c(|x| x.e);
        let (f_u, f_v) = c(|x| x.f);
        let (g_u, g_v) = c(|x| x.g);
        let (_, l_v) = c(|x| x.l);
        let (m_u, m_v) = c(|x| x.m);
        let (n_u, _) = c(|x| x.n);
        let first = Vec3::new(f0.e, f0.f, f0.g);
        let second = Vec3::new(f0.l, f0.m, f0.n);
        let c1 = l_v - m_u - h * (e_v - f_u) + det3(first, Vec3::new(e_u, f_u, g_u), second) / (2.0 * f0.w);
        let c2 = m_v - n_u - h * (f_v - g_u) + det3(first, Vec3::new(e_v, f_v, g_v), second) / (2.0 * f0.w);
        Ok((c1, c2))
    }

    /// Per-point extrinsic/intrinsic curvature and Codazzi residuals over the
    /// indices where the intrinsic stencil fits.
    pub fn report_rows(&self) -> Result<Vec<FormsReportRow>, FormsError> {
        self.interior(2)
            .map(|(i, j)| {
                let (k_extrinsic, _) = self.curvatures_at(i, j)?;
                Ok(FormsReportRow {
                    i,
                    j,
                    k_extrinsic,
                    k_intrinsic: self.gauss_curvature_intrinsic(i, j)?,
                    codazzi: self.codazzi_residuals(i, j)?,
                })
            })
            .collect()
    }
}

/// Summary statistics of `−M²/(1 − F²)` over a Chebyshev field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChebyshevReport {
    pub count: usize,
    pub mean: f64,
    pub min: f64,
    pub max: f64,
    pub std_dev: f64,
    /// Largest `|K − mean|` and where it occurs.
    pub max_dev_from_mean: f64,
    pub worst_index: (usize, usize),
    /// Largest `|K − target|`, when a target is configured.
    pub max_dev_from_target: Option<f64>,
    pub tol: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChebyshevReportConfig {
    /// Bound on `chebyshev_residuals` for the field to count as Chebyshev.
    pub form_tol: f64,
    /// Constancy tolerance on `K`.
    pub tol: f64,
    /// Expected constant value, if known.
    pub target: Option<f64>,
}

impl Default for ChebyshevReportConfig {
    fn default() -> Self {
        ChebyshevReportConfig { form_tol: 1e-12, tol: 1e-10, target: Some(-1.0) }
    }
}

/// Constancy audit of the Chebyshev curvature over the interior of a field.
/// Passes when every value is within `tol` of the mean (and of the target,
/// if one is set).
pub fn chebyshev_constancy_report(
    field: &FormsField,
    config: ChebyshevReportConfig,
) -> Result<ChebyshevReport, FormsError> {
    let mut values = Vec::new();
    for (i, j) in field.interior(1) {
        let f = field.get(i, j);
        let (a, b, c, d) = f.chebyshev_residuals();
        let worst = a.max(b).max(c).max(d);
        if !(worst <= config.form_tol) {
            return Err(FormsError::NotChebyshev(i, j, worst));
        }
        values.push(((i, j), k_chebyshev(f.f, f.m)?));
    }
    if values.is_empty() {
        return Err(FormsError::EmptyDomain);
    }
    let count = values.len();
    let mean = values.iter().map(|v| v.1).sum::<f64>() / count as f64;
    let var = values.iter().map(|v| (v.1 - mean).powi(2)).sum::<f64>() / count as f64;
    let (mut min, mut max) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut max_dev, mut worst_index) = (0.0, values[0].0);
    let mut max_target = config.target.map(|_| 0.0f64);
    for &(idx, k) in &values {
        min = min.min(k);
        max = max.max(k);
        let dev = (k - mean).abs();
        if dev > max_dev {
            max_dev = dev;
            worst_index = idx;
        }
        if let (Some(t), Some(m)) = (config.target, max_target.as_mut()) {
            *m = m.max((k - t).abs());
        }
    }
    let pass = max_dev <= config.tol && max_target.is_none_or(|m| m <= config.tol);
    Ok(ChebyshevReport {
        count,
        mean,
        min,
        max,
        std_dev: var.sqrt(),
        max_dev_from_mean: max_dev,
        worst_index,
        max_dev_from_target: max_target,
        tol: config.tol,
        pass,
    })
}
