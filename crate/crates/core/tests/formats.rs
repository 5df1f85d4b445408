//! Versioned JSON envelopes round-trip every payload bit for bit.

use proptest::prelude::*;

use tsps_core::discrete::CauchyData;
use tsps_core::geom::Vec3;
use tsps_core::io::{from_json, peek_kind, to_json, IoError, Metadata};
use tsps_core::samples::perturbed_cauchy_data;
use tsps_core::timescale::{GridDomain, GridFunction, TimeScale};

fn scale() -> impl Strategy<Value = TimeScale> {
    prop_oneof![
        (0.01f64..5.0).prop_map(|a| TimeScale::lattice(a).unwrap()),
        (-5.0f64..5.0, 0.1f64..3.0).prop_map(|(lo, w)| TimeScale::interval(lo, lo + w).unwrap()),
        prop::collection::btree_set(-1000i32..1000, 1..8)
            .prop_map(|s| TimeScale::points(&s.into_iter().map(|k| k as f64 * 0.37).collect::<Vec<_>>()).unwrap()),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn time_scales(s in scale()) {
        let (back, _): (TimeScale, _) = from_json(&to_json(&s, &Metadata::default())).unwrap();
        prop_assert_eq!(back, s);
    }

    #[test]
    fn immersions(x in -1e3f64..1e3, y in -1e3f64..1e3, h in 0.05f64..0.5) {
        let d = GridDomain::new(
            TimeScale::interval(0.0, 1.0).unwrap(),
            (0.0, 1.0),
            TimeScale::lattice(0.3).unwrap(),
            (0.0, 1.5),
            h,
        )
        .unwrap();
        let r = GridFunction::sample(d, |u, v| Vec3::new(x * u, y * v.sin(), (x * y * u).cos() / 3.0));
        let (back, _): (GridFunction<Vec3>, _) = from_json(&to_json(&r, &Metadata::default())).unwrap();
        prop_assert_eq!(back, r);
    }

    #[test]
    fn cauchy_data(seed in any::<u64>(), n in 3usize..10) {
        let c = perturbed_cauchy_data(seed, 0.1, n, 0.1, 0.02).unwrap();
        let meta = Metadata { seed: Some(seed), ..Metadata::generator("perturbed") };
        let text = to_json(&c, &meta);
        let (back, m): (CauchyData, _) = from_json(&text).unwrap();
        prop_assert_eq!(back, c);
        prop_assert_eq!(m.seed, Some(seed));
    }
}

#[test]
fn bare_cauchy_payload_derives_normals() {
    let text = r#"{"format_version": 1, "kind": "cauchy", "metadata": {},
        "data": {"a": 1.0, "strip1": [[0,0,0],[1,0,0],[1.8,0.6,0]], "strip2": [[0,0,0],[0,1,0],[0.6,1.8,0]]}}"#;
    let (c, _): (CauchyData, _) = from_json(text).unwrap();
    let (n1, n2) = c.validate().unwrap();
    assert_eq!(n1.len(), 3);
    assert_eq!(n2.len(), 3);
}

#[test]
fn envelope_errors() {
    assert!(matches!(peek_kind(r#"{"format_version": 7, "kind": "mesh"}"#), Err(IoError::UnsupportedVersion(7))));
    assert!(matches!(peek_kind(r#"{"kind": "mesh"}"#), Err(IoError::Json(_))));
    let ts = to_json(&TimeScale::integers(), &Metadata::default());
    assert!(matches!(from_json::<CauchyData>(&ts), Err(IoError::WrongKind { expected: "cauchy", .. })));
}
