//! Generators of analytic and discrete test data.
//!
//! Smooth data: sine-Gordon soliton angle fields and the Chebyshev forms they
//! induce, plus sampled sphere, cylinder, tractroid and a pseudosphere in
//! Chebyshev coordinates. Discrete data: straight-strip Cauchy data with a
//! prescribed twist of the tangent planes, and seeded random strips.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::discrete::CauchyData;
use crate::forms::{FormsField, FundamentalForms};
use crate::geom::Vec3;
use crate::timescale::{GridDomain, GridFunction};

/// Default distance kept from `ω ∈ {0, π}` when turning angles into forms.
pub const DEFAULT_VALIDITY_BAND: f64 = 0.05;

/// Default per-step rotation of the tangent planes along Amsler strips.
pub const DEFAULT_TWIST: f64 = 0.02;

/// Name of the generator behind [`perturbed_cauchy_data`], recorded in metadata.
pub const RNG_ALGORITHM: &str = "ChaCha8";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SamplesError {
    #[error("ω = {omega} at ({i}, {j}) is outside [{eps}, π − {eps}]")]
    OutOfValidityBand { i: usize, j: usize, omega: f64, eps: f64 },
    #[error("parametrization is singular on the grid: {0}")]
    SingularParametrization(String),
    #[error("angle {0} is outside (0, π)")]
    BadAngle(f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

/// `4 arctan(exp(u + v))`, a solution of `ω_uv = sin ω`.
pub fn sine_gordon_one_soliton(u: f64, v: f64) -> f64 {
    sine_gordon_soliton(u, v, 1.0, 0.0)
}

/// `4 arctan(exp(λu + v/λ + c))`; every nonzero `λ` and phase `c` solve the
/// same equation.
pub fn sine_gordon_soliton(u: f64, v: f64, lambda: f64, c: f64) -> f64 {
    4.0 * (lambda * u + v / lambda + c).exp().atan()
}

/// Angle between the asymptotic directions, sampled on a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct OmegaField {
    pub omega: GridFunction<f64>,
}

impl OmegaField {
    pub fn sample(domain: GridDomain, f: impl FnMut(f64, f64) -> f64) -> Self {
        OmegaField { omega: GridFunction::sample(domain, f) }
    }

    /// The soliton `4 arctan(exp(λu + v/λ + c))` on `domain`.
    pub fn soliton(domain: GridDomain, lambda: f64, c: f64) -> Self {
        Self::sample(domain, |u, v| sine_gordon_soliton(u, v, lambda, c))
    }

    pub fn domain(&self) -> &GridDomain {
        self.omega.domain()
    }

    pub fn range(&self) -> (f64, f64) {
        self.omega.values().iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &w| (lo.min(w), hi.max(w)))
    }
}

/// `E = G = 1, L = N = 0, F = cos ω, M = sin ω` at every grid point.
pub fn chebyshev_forms_from_omega(field: &OmegaField, eps: f64) -> Result<FormsField, SamplesError> {
    let d = field.domain();
    let mut forms = Vec::with_capacity(d.len());
    for (i, j) in d.indices() {
        let w = *field.omega.get(i, j);
        if !(w >= eps && w <= std::f64::consts::PI - eps) {
            return Err(SamplesError::OutOfValidityBand { i, j, omega: w, eps });
        }
        forms.push(FundamentalForms::chebyshev(w));
    }
    FormsField::new(d.clone(), forms).map_err(|e| SamplesError::InvalidParameter(e.to_string()))
}

fn check_radius(r: f64) -> Result<(), SamplesError> {
    if r.is_finite() && r > 0.0 {
        Ok(())
    } else {
        Err(SamplesError::InvalidParameter(format!("radius {r} must be positive")))
    }
}

fn min_over(domain: &GridDomain, f: impl Fn(f64, f64) -> f64) -> f64 {
    domain.indices().map(|(i, j)| {
        let (u, v) = domain.coords(i, j);
        f(u, v)
    }).fold(f64::INFINITY, f64::min)
}

const SINGULAR_TOL: f64 = 1e-6;

/// `R (sin v cos u, sin v sin u, cos v)`: `u` longitude, `v` colatitude.
/// The normal `r_u × r_v` points inward, so `H = 1/R` and `K = 1/R²`.
pub fn sphere_immersion(radius: f64, domain: GridDomain) -> Result<GridFunction<Vec3>, SamplesError> {
    check_radius(radius)?;
    if min_over(&domain, |_, v| v.sin().abs()) < SINGULAR_TOL {
        return Err(SamplesError::SingularParametrization("grid touches a pole".into()));
    }
    Ok(GridFunction::sample(domain, |u, v| {
        Vec3::new(v.sin() * u.cos(), v.sin() * u.sin(), v.cos()) * radius
    }))
}

/// `(R cos u, R sin u, v)`, `K = 0`.
pub fn cylinder_immersion(radius: f64, domain: GridDomain) -> Result<GridFunction<Vec3>, SamplesError> {
    check_radius(radius)?;
    Ok(GridFunction::sample(domain, |u, v| Vec3::new(radius * u.cos(), radius * u.sin(), v)))
}

/// `(sech v cos u, sech v sin u, v − tanh v)`, `K = −1` away from the cusp `v = 0`.
pub fn tractroid_immersion(domain: GridDomain) -> Result<GridFunction<Vec3>, SamplesError> {
    if min_over(&domain, |_, v| v.abs()) < SINGULAR_TOL {
        return Err(SamplesError::SingularParametrization("grid touches the cusp v = 0".into()));
    }
    Ok(GridFunction::sample(domain, |u, v| {
        let s = 1.0 / v.cosh();
        Vec3::new(s * u.cos(), s * u.sin(), v - v.tanh())
    }))
}

/// The pseudosphere in Chebyshev (asymptotic, unit-speed) coordinates:
/// with `s = u + v`, `t = u − v`,
/// `r = (sech s cos t, sech s sin t, s − tanh s)`.
/// Here `|r_u| = |r_v| = 1`, `F = tanh² s − sech² s`, `K = −1`. This is the
/// surface of the one-soliton angle field, up to a reparametrization of `ω`.
pub fn pseudosphere_chebyshev_immersion(domain: GridDomain) -> Result<GridFunction<Vec3>, SamplesError> {
    if min_over(&domain, |u, v| (u + v).abs()) < SINGULAR_TOL {
        return Err(SamplesError::SingularParametrization("grid touches the cusp u + v = 0".into()));
    }
    Ok(GridFunction::sample(domain, |u, v| {
        let (s, t) = (u + v, u - v);
        let sech = 1.0 / s.cosh();
        Vec3::new(sech * t.cos(), sech * t.sin(), s - s.tanh())
    }))
}

/// Analytic `cos ω` of [`pseudosphere_chebyshev_immersion`].
pub fn pseudosphere_chebyshev_f(u: f64, v: f64) -> f64 {
    let s = u + v;
    s.tanh().powi(2) - (1.0 / s.cosh()).powi(2)
}

fn check_angle(gamma: f64) -> Result<(), SamplesError> {
    if gamma.is_finite() && gamma > 0.0 && gamma < std::f64::consts::PI {
        Ok(())
    } else {
        Err(SamplesError::BadAngle(gamma))
    }
}

fn check_strip_params(a: f64, n1: usize, n2: usize) -> Result<(), SamplesError> {
    if !(a.is_finite() && a > 0.0) {
        return Err(SamplesError::InvalidParameter(format!("edge length {a} must be positive")));
    }
    if n1 < 3 || n2 < 3 {
        return Err(SamplesError::InvalidParameter(format!("strip lengths {n1}, {n2} must be at least 3")));
    }
    Ok(())
}

/// Straight strips `k a e₁`, `k a e₂` with `e₁ = (1,0,0)`,
/// `e₂ = (cos γ, sin γ, 0)` and tangent planes twisted by [`DEFAULT_TWIST`]
/// per step. See [`amsler_cauchy_data_twisted`].
pub fn amsler_cauchy_data(gamma: f64, a: f64, n1: usize, n2: usize) -> Result<CauchyData, SamplesError> {
    amsler_cauchy_data_twisted(gamma, a, n1, n2, DEFAULT_TWIST)
}

/// Straight strips through the origin with explicit normals: along strip 1
/// the normal at vertex `k` is `z` rotated by `kθ` about `e₁`, along strip 2
/// by `−kθ` about `e₂`. The resulting net has dihedral angle `θ` and
/// curvature `−sin²θ / a²` when `γ = π/2`; `θ = 0` gives the flat net.
pub fn amsler_cauchy_data_twisted(
    gamma: f64,
    a: f64,
    n1: usize,
    n2: usize,
    twist: f64,
) -> Result<CauchyData, SamplesError> {
    check_angle(gamma)?;
    check_strip_params(a, n1, n2)?;
    if !twist.is_finite() {
        return Err(SamplesError::InvalidParameter("twist must be finite".into()));
    }
    Ok(twisted_strips(gamma, a, a, n1, n2, twist, twist, None))
}

/// Straight strips with edge lengths `a₁`, `a₂`. Quads close consistently
/// when `sin θ_j / a_j` agrees between directions, so the twists are
/// `θ_j = arcsin(κ a_j)` for a target `κ`; the isotropic limit has
/// curvature `−κ²`.
pub fn amsler_cauchy_data_aniso(
    gamma: f64,
    a1: f64,
    a2: f64,
    n1: usize,
    n2: usize,
    kappa: f64,
) -> Result<CauchyData, SamplesError> {
    check_angle(gamma)?;
    check_strip_params(a1, n1, n2)?;
    check_strip_params(a2, n1, n2)?;
    let (s1, s2) = (kappa * a1, kappa * a2);
    if !(s1.abs() < 1.0 && s2.abs() < 1.0) {
        return Err(SamplesError::InvalidParameter(format!("κ·a must lie in (−1, 1), got {s1}, {s2}")));
    }
    Ok(twisted_strips(gamma, a1, a2, n1, n2, s1.asin(), s2.asin(), Some(a2)))
}

#[allow(clippy::too_many_arguments)]
fn twisted_strips(
    gamma: f64,
    a1: f64,
    a2: f64,
    n1: usize,
    n2: usize,
    t1: f64,
    t2: f64,
    explicit_a2: Option<f64>,
) -> CauchyData {
    let e1 = Vec3::X;
    let e2 = Vec3::new(gamma.cos(), gamma.sin(), 0.0);
    CauchyData {
        a: a1,
        a2: explicit_a2,
        strip1: (0..n1).map(|k| e1 * (k as f64 * a1)).collect(),
        strip2: (0..n2).map(|k| e2 * (k as f64 * a2)).collect(),
        normals1: Some((0..n1).map(|k| Vec3::Z.rotated(e1, k as f64 * t1)).collect()),
        normals2: Some((0..n2).map(|k| Vec3::Z.rotated(e2, -(k as f64) * t2)).collect()),
    }
}

/// Random unit-edge strips of `n` vertices each, reproducible from `seed`.
///
/// Each strip walks from the origin (strip 1 along `x`, strip 2 along `y`,
/// both with normal `z`). At every vertex the normal turns by `±twist` about
/// the incoming edge, then the next edge turns by a uniform angle in
/// `[−amplitude, amplitude]` about that normal. Edges stay exactly `a` long
/// up to rounding and normals stay orthogonal to both incident edges; the
/// interior angle between consecutive edges is at least `π − amplitude`.
pub fn perturbed_cauchy_data(
    seed: u64,
    a: f64,
    n: usize,
    amplitude: f64,
    twist: f64,
) -> Result<CauchyData, SamplesError> {
    check_strip_params(a, n, n)?;
    if !(amplitude.is_finite() && (0.0..std::f64::consts::FRAC_PI_2).contains(&amplitude)) {
        return Err(SamplesError::InvalidParameter(format!("amplitude {amplitude} must lie in [0, π/2)")));
    }
    if !twist.is_finite() {
        return Err(SamplesError::InvalidParameter("twist must be finite".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut walk = |dir: Vec3, sign: f64| {
        let (mut pts, mut normals) = (vec![Vec3::ZERO], vec![Vec3::Z]);
        let (mut e, mut nrm) = (dir, Vec3::Z);
        for _ in 1..n {
            pts.push(*pts.last().unwrap() + e * a);
            nrm = nrm.rotated(e, sign * twist);
            normals.push(nrm);
            let turn = if amplitude > 0.0 { rng.random_range(-amplitude..=amplitude) } else { 0.0 };
            e = e.rotated(nrm, turn);
        }
        (pts, normals)
    };
    let (strip1, normals1) = walk(Vec3::X, 1.0);
    let (strip2, normals2) = walk(Vec3::Y, -1.0);
    Ok(CauchyData { a, a2: None, strip1, strip2, normals1: Some(normals1), normals2: Some(normals2) })
}
