//! Nets on continuum and mixed scales.

use tsps_core::forms::k_chebyshev;
use tsps_core::geom::Vec3;
use tsps_core::samples::{amsler_cauchy_data_aniso, pseudosphere_chebyshev_immersion};
use tsps_core::discrete::build_from_cauchy;
use tsps_core::surface::{verify_ts_chebyshev, TimeScaleSurface};
use tsps_core::timescale::{GridDomain, GridFunction, TimeScale};

fn pseudosphere(h: f64) -> TimeScaleSurface {
    let d = GridDomain::continuum(0.25, 1.25, 0.25, 1.25, h).unwrap();
    TimeScaleSurface::new(pseudosphere_chebyshev_immersion(d).unwrap())
}

/// Exact unit normal along `r_u × r_v = −2 r_s × r_t`.
fn analytic_normal(u: f64, v: f64) -> Vec3 {
    let (s, t) = (u + v, u - v);
    let (sech, tanh) = (1.0 / s.cosh(), s.tanh());
    let rs = Vec3::new(-sech * tanh * t.cos(), -sech * tanh * t.sin(), tanh * tanh);
    let rt = Vec3::new(-sech * t.sin(), sech * t.cos(), 0.0);
    let c = rs.cross(rt) * -2.0;
    c / c.norm()
}

#[test]
fn residuals_shrink_at_least_linearly() {
    let worst = |h: f64| {
        let rep = verify_ts_chebyshev(&pseudosphere(h), 1.0).unwrap();
        rep.max_unit_residual.max(rep.max_tangency_residual)
    };
    let (a, b) = (worst(0.02), worst(0.01));
    // At least first order; unit-speed chords and L ≡ 0 make it second order here.
    assert!(a < 0.05 && a / b > 1.7, "{a} {b}");
}

#[test]
fn normal_within_step() {
    for h in [0.02, 0.01] {
        let s = pseudosphere(h);
        let d = s.domain().clone();
        let mut worst = 0.0f64;
        for (i, j) in d.indices() {
            if let Ok(n) = s.ts_normal(i, j) {
                let (u, v) = d.coords(i, j);
                worst = worst.max((n - analytic_normal(u, v)).norm());
            }
        }
        assert!(worst < 2.0 * h, "{h}: {worst}");
    }
}

#[test]
fn time_scale_curvature_is_chebyshev_curvature_of_its_factors() {
    let s = pseudosphere(0.01);
    let mut checked = 0;
    for (i, j) in s.domain().indices() {
        let Ok(k) = s.ts_gaussian_curvature(i, j) else { continue };
        let (a, b, f) = s.curvature_factors(i, j).unwrap();
        let m_hat = (a * b).sqrt();
        assert!((k - k_chebyshev(f, m_hat).unwrap()).abs() < 1e-12);
        checked += 1;
    }
    assert_eq!(checked, 99 * 99);
}

#[test]
fn semi_discrete_net_passes_definition() {
    let data = amsler_cauchy_data_aniso(std::f64::consts::FRAC_PI_2, 0.01, 0.1, 101, 11, 0.5).unwrap();
    let mesh = build_from_cauchy(&data, 1e-9).unwrap();
    let d = GridDomain::new(
        TimeScale::interval(0.0, 1.0).unwrap(),
        (0.0, 1.0),
        TimeScale::lattice(0.1).unwrap(),
        (0.0, 1.0),
        0.01,
    )
    .unwrap();
    assert_eq!(d.shape(), (101, 11));
    let s = TimeScaleSurface::new(GridFunction::from_values(d, mesh.vertices().to_vec()).unwrap());
    let rep = verify_ts_chebyshev(&s, 1e-10).unwrap();
    assert!(rep.pass, "{} {}", rep.max_unit_residual, rep.max_tangency_residual);
    let mid = &rep.rows[5 * 11 + 3];
    assert_eq!((mid.class1, mid.class2), ("dense", "isolated"));
    assert_eq!(rep.rows[0].class1, "left-boundary");
    assert!(rep.rows.iter().filter_map(|r| r.k_time).all(|k| (k + 0.25).abs() < 1e-3));
}

#[test]
fn mixed_scale_uses_jump_quotients_at_gaps() {
    // [0, 1] ∪ {2} along u: at u = 1 the derivative is the jump quotient.
    let s1 = TimeScale::new(vec![[0.0, 1.0].into(), [2.0, 2.0].into()], None).unwrap();
    let d = GridDomain::new(s1, (0.0, 2.0), TimeScale::integers(), (0.0, 3.0), 0.25).unwrap();
    let r = GridFunction::sample(d.clone(), |u, v| Vec3::new(u * u, v, 0.0));
    let s = TimeScaleSurface::new(r);
    let i = d.axis1().coords().position(|t| t == 1.0).unwrap();
    assert_eq!(s.d1r(i, 0).unwrap(), Vec3::new(3.0, 0.0, 0.0));
    assert_eq!(s.d2r(i, 0).unwrap(), Vec3::new(0.0, 1.0, 0.0));
}
