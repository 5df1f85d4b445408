//! Sampled classical surfaces and soliton form fields against their analytic
//! curvature.

use std::f64::consts::FRAC_PI_2;

use tsps_core::forms::{
    chebyshev_constancy_report, forms_from_immersion, ChebyshevReportConfig, FormsError, FormsField,
};
use tsps_core::geom::Vec3;
use tsps_core::samples::{
    chebyshev_forms_from_omega, cylinder_immersion, sphere_immersion, tractroid_immersion, OmegaField,
    DEFAULT_VALIDITY_BAND,
};
use tsps_core::timescale::{GridDomain, GridFunction};

fn max_error(field: &FormsField, f: impl Fn(&FormsField, usize, usize) -> f64) -> f64 {
    field.interior(0).map(|(i, j)| f(field, i, j)).fold(0.0, f64::max)
}

fn halving(make: impl Fn(f64) -> f64) -> (f64, f64) {
    let (e1, e2) = (make(0.02), make(0.01));
    (e2, e1 / e2)
}

#[test]
fn sphere_interior_point() {
    let d = GridDomain::continuum(0.0, 1.0, 0.5, 1.5, 0.01).unwrap();
    let r = sphere_immersion(2.0, d).unwrap();
    let (k, h) = forms_from_immersion(&r, 50, 50).unwrap().curvatures().unwrap();
    assert!((k - 0.25).abs() < 0.01 * 0.01, "{k}");
    assert!((h - 0.5).abs() < 0.01 * 0.01, "{h}");
}

#[test]
fn tractroid_converges_at_second_order() {
    let (err, ratio) = halving(|h| {
        let d = GridDomain::continuum(0.0, 1.0, 0.4, 1.4, h).unwrap();
        let field = FormsField::from_immersion(&tractroid_immersion(d).unwrap()).unwrap();
        max_error(&field, |f, i, j| (f.curvatures_at(i, j).unwrap().0 + 1.0).abs())
    });
    assert!(err < 1e-3 && (3.0..5.0).contains(&ratio), "{err} {ratio}");
}

#[test]
fn intrinsic_gauss_matches_extrinsic_on_tractroid() {
    let d = GridDomain::continuum(0.0, 1.0, 0.4, 1.4, 0.01).unwrap();
    let field = FormsField::from_immersion(&tractroid_immersion(d).unwrap()).unwrap();
    for row in field.report_rows().unwrap() {
        assert!((row.k_intrinsic - row.k_extrinsic).abs() < 1e-3, "{row:?}");
    }
}

#[test]
fn codazzi_vanishes_at_second_order_on_sphere() {
    let (err, ratio) = halving(|h| {
        let d = GridDomain::continuum(0.0, 1.0, 0.5, 1.5, h).unwrap();
        let field = FormsField::from_immersion(&sphere_immersion(2.0, d).unwrap()).unwrap();
        field
            .interior(1)
            .map(|(i, j)| {
                let (a, b) = field.codazzi_residuals(i, j).unwrap();
                a.abs().max(b.abs())
            })
            .fold(0.0, f64::max)
    });
    assert!(err < 1e-3 && ratio >= 3.0, "{err} {ratio}");
}

#[test]
fn cylinder_is_flat() {
    let d = GridDomain::continuum(0.0, 2.0, -1.0, 1.0, 0.05).unwrap();
    let field = FormsField::from_immersion(&cylinder_immersion(1.0, d).unwrap()).unwrap();
    assert!(max_error(&field, |f, i, j| f.curvatures_at(i, j).unwrap().0.abs()) < 1e-10);
}

#[test]
fn plane_forms_are_exact() {
    let d = GridDomain::continuum(0.0, 1.0, 0.0, 1.0, 0.1).unwrap();
    let r = GridFunction::sample(d, |u, v| Vec3::new(u, v, 0.0));
    let f = forms_from_immersion(&r, 0, 10).unwrap();
    assert!((f.e - 1.0).abs() < 1e-14 && (f.g - 1.0).abs() < 1e-14 && f.f.abs() < 1e-14);
    assert!(f.l.abs() < 1e-12 && f.m.abs() < 1e-12 && f.n.abs() < 1e-12);
}

#[test]
fn degenerate_parametrization_is_rejected() {
    let d = GridDomain::continuum(0.0, 1.0, 0.0, 1.0, 0.1).unwrap();
    let r = GridFunction::sample(d, |u, v| Vec3::new(u + v, 0.0, 0.0));
    assert!(matches!(forms_from_immersion(&r, 3, 3), Err(FormsError::DegenerateFirstForm(..))));
}

#[test]
fn soliton_forms_pass_constancy_audit() {
    let d = GridDomain::continuum(-1.5, -0.25, -1.5, -0.25, 0.025).unwrap();
    let omega = OmegaField::soliton(d, 1.0, 0.0);
    let (lo, hi) = omega.range();
    assert!(lo > DEFAULT_VALIDITY_BAND && hi < FRAC_PI_2 * 2.0 - DEFAULT_VALIDITY_BAND);
    let field = chebyshev_forms_from_omega(&omega, DEFAULT_VALIDITY_BAND).unwrap();
    for f in field.forms() {
        assert_eq!(f.chebyshev_residuals(), (0.0, 0.0, 0.0, 0.0));
    }
    let rep = chebyshev_constancy_report(&field, ChebyshevReportConfig::default()).unwrap();
    assert!(rep.pass, "{rep:?}");
    assert!(rep.max_dev_from_target.unwrap() < 1e-12);
}

#[test]
fn forms_json_is_row_major_six_tuples() {
    let d = GridDomain::continuum(0.0, 1.0, 0.0, 1.0, 0.5).unwrap();
    let field = chebyshev_forms_from_omega(&OmegaField::sample(d, |_, _| FRAC_PI_2), 0.05).unwrap();
    let v: serde_json::Value = serde_json::to_value(&field).unwrap();
    let rows = v["forms"].as_array().unwrap();
    assert_eq!(rows.len(), 9);
    assert_eq!(rows[0].as_array().unwrap().len(), 6);
    let back: FormsField = serde_json::from_value(v).unwrap();
    assert_eq!(back, field);
}
