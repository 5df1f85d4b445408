//! End-to-end acceptance suite. Each criterion prints one PASS/FAIL line
//! (run with `--nocapture` to see them); the test fails if any is red.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, PI};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tsps_core::discrete::{build_from_cauchy, verify_chebyshev_net, ClosedForms, SurfaceMesh};
use tsps_core::forms::{k_chebyshev, FormsField};
use tsps_core::geom::Vec3;
use tsps_core::samples::{
    amsler_cauchy_data, amsler_cauchy_data_aniso, amsler_cauchy_data_twisted, chebyshev_forms_from_omega,
    cylinder_immersion, pseudosphere_chebyshev_immersion, sphere_immersion, OmegaField, DEFAULT_TWIST,
};
use tsps_core::surface::{conjecture_constancy_report, ConjectureConfig, TimeScaleSurface};
use tsps_core::timescale::{GridDomain, GridFunction, TimeScale};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn ratios(errors: &[f64]) -> Vec<f64> {
    errors.windows(2).map(|w| w[0] / w[1]).collect()
}

fn sci(xs: &[f64]) -> String {
    let parts: Vec<String> = xs.iter().map(|x| format!("{x:.2e}")).collect();
    format!("[{}]", parts.join(", "))
}

fn in_band(r: &[f64], lo: f64, hi: f64) -> bool {
    r.iter().all(|x| (lo..=hi).contains(x))
}

fn amsler_mesh(a: f64, twist: f64) -> SurfaceMesh {
    build_from_cauchy(&amsler_cauchy_data_twisted(FRAC_PI_2, a, 50, 50, twist).unwrap(), 1e-9).unwrap()
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let data = amsler_cauchy_data(FRAC_PI_2, 0.1, 50, 50).unwrap();
    let mesh = build_from_cauchy(&data, 1e-9).unwrap();
    let rep = verify_chebyshev_net(&mesh, 1e-9).unwrap();
    let elapsed = start.elapsed().as_secs_f64();
    let theta = rep.theta_quad.unwrap();
    let k = rep.k_vertex.unwrap();
    let (kr, ct) = (rep.k_relation_residual.unwrap(), rep.cos_theta_residual.unwrap());
    let pass = rep.edge_residual < 1e-9
        && rep.coplanarity_residual < 1e-9
        && theta.max_dev < 1e-8
        && k.max_dev < 1e-8
        && kr < 1e-8
        && ct < 1e-10;
    outcome(
        pass,
        format!(
            "edge {:.1e}, coplanarity {:.1e}, θ dev {:.1e}, K dev {:.1e}, |K + sin²θ/a²| {:.1e}, cosθ residual {:.1e}, {:.3}s",
            rep.edge_residual, rep.coplanarity_residual, theta.max_dev, k.max_dev, kr, ct, elapsed
        ),
    )
}

/// Tetrahedron with `|AB| = |AD| = |DC| = |CB| = a`, `∠BAD = φ`, `∠ADC = ψ`,
/// found by intersecting the circle of points at distance `a` from `D`
/// making angle `ψ` with `DA` against the sphere of radius `a` about `B`.
fn tetra_oracle(a: f64, phi: f64, psi: f64) -> [Vec3; 4] {
    let pa = Vec3::ZERO;
    let pb = Vec3::new(a, 0.0, 0.0);
    let pd = Vec3::new(a * phi.cos(), a * phi.sin(), 0.0);
    let axis = (pa - pd) / a;
    let e1 = Vec3::Z.cross(axis);
    let centre = pd + axis * (a * psi.cos());
    let rad = a * psi.sin();
    // Points centre + rad (cos χ e1 + sin χ z); solve |P − B|² = a² for cos χ.
    let w = centre - pb;
    let cos_chi = (a * a - w.norm_squared() - rad * rad) / (2.0 * rad * w.dot(e1));
    let sin_chi = (1.0 - cos_chi * cos_chi).max(0.0).sqrt();
    let pc = centre + (e1 * cos_chi + Vec3::Z * sin_chi) * rad;
    [pa, pb, pc, pd]
}

fn criterion_2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut worst, mut worst_lib, mut n) = (0.0f64, 0.0f64, 0);
    while n < 10_000 {
        let a = 10f64.powf(rng.random_range(-2.0..1.0));
        let phi = rng.random_range(0.05..PI - 0.05);
        let psi = rng.random_range(0.05..PI - 0.05);
        if phi.cos() + psi.cos() <= 0.01 {
            continue;
        }
        n += 1;
        let [pa, pb, pc, pd] = tetra_oracle(a, phi, psi);
        let (ab, ac, ad) = (pb - pa, pc - pa, pd - pa);
        let coords = [
            pa.distance(pc),
            pb.distance(pd),
            0.5 * ab.cross(ac).norm(),
            ad.dot(ab.cross(ac)).abs() / ab.cross(ac).norm(),
            ab.cross(ac).dot(ad).abs(),
        ];
        let cf = ClosedForms::new(a, phi, psi);
        let closed = [cf.diag_ac, cf.diag_bd, cf.area_abc, cf.height, cf.det];
        for (x, y) in coords.iter().zip(closed) {
            worst = worst.max((x - y).abs() / y.abs());
        }
        let mesh = SurfaceMesh::from_vertices(a, a, 2, 2, vec![pa, pd, pb, pc]).unwrap();
        let q = mesh.quad_geometry(0, 0).unwrap();
        worst_lib = worst_lib.max(q.cross_check_deviation());
    }
    let [pa, pb, pc, pd] = tetra_oracle(1.0, FRAC_PI_3, FRAC_PI_3);
    let q = SurfaceMesh::from_vertices(1.0, 1.0, 2, 2, vec![pa, pd, pb, pc]).unwrap().quad_geometry(0, 0).unwrap();
    let spot = (pa.distance(pc) - 1.0).abs()
        .max((q.height - 6f64.sqrt() / 3.0).abs())
        .max((q.theta.cos() - 1.0 / 3.0).abs())
        .max((q.k + 8.0 / 9.0).abs());
    outcome(
        worst < 1e-10 && worst_lib < 1e-10 && spot < 1e-12,
        format!("{n} triples: oracle vs closed forms {worst:.1e}, library quads {worst_lib:.1e}; regular spot values {spot:.1e}"),
    )
}

/// Soliton window for the forms tests: `ω ∈ [8.1e-4, 2.19]` on `[−2, 2]²`.
const SOLITON_PHASE: f64 = -4.5;
const SOLITON_BAND: f64 = 5e-4;

fn criterion_3() -> Outcome {
    let (mut k_pt, mut gauss, mut cod) = (0.0f64, Vec::new(), Vec::new());
    for h in [0.02, 0.01, 0.005] {
        let d = GridDomain::continuum(-2.0, 2.0, -2.0, 2.0, h).unwrap();
        let field = chebyshev_forms_from_omega(&OmegaField::soliton(d, 1.0, SOLITON_PHASE), SOLITON_BAND).unwrap();
        let (mut g, mut c) = (0.0f64, 0.0f64);
        for (i, j) in field.interior(0) {
            let f = field.get(i, j);
            k_pt = k_pt.max((k_chebyshev(f.f, f.m).unwrap() + 1.0).abs());
        }
        for (i, j) in field.interior(2) {
            g = g.max((field.gauss_curvature_intrinsic(i, j).unwrap() + 1.0).abs());
            let (c1, c2) = field.codazzi_residuals(i, j).unwrap();
            c = c.max(c1.abs()).max(c2.abs());
        }
        gauss.push(g);
        cod.push(c);
    }
    let (rg, rc) = (ratios(&gauss), ratios(&cod));
    outcome(
        k_pt < 1e-12 && in_band(&rg, 3.0, 5.0) && in_band(&rc, 3.0, 5.0),
        format!("pointwise |k+1| {k_pt:.1e}; Gauss errors {} ratios {rg:.2?}; Codazzi {} ratios {rc:.2?}", sci(&gauss), sci(&cod)),
    )
}

fn curvature_errors(
    make: impl Fn(GridDomain) -> GridFunction<Vec3>,
    window: (f64, f64, f64, f64),
    k: f64,
    h_ref: Option<f64>,
) -> (Vec<f64>, Vec<f64>) {
    let (mut ek, mut eh) = (Vec::new(), Vec::new());
    for h in [0.02, 0.01, 0.005] {
        let d = GridDomain::continuum(window.0, window.1, window.2, window.3, h).unwrap();
        let field = FormsField::from_immersion(&make(d)).unwrap();
        let (mut a, mut b) = (0.0f64, 0.0f64);
        for (i, j) in field.interior(0) {
            let (kk, hh) = field.curvatures_at(i, j).unwrap();
            a = a.max((kk - k).abs());
            if let Some(h0) = h_ref {
                b = b.max((hh - h0).abs());
            }
        }
        ek.push(a);
        eh.push(b);
    }
    (ek, eh)
}

/// The cylinder of radius 1 as `(cos θ, sin θ, z)` with `θ = u + v²/5`,
/// `z = v + u²/5`: still `K = 0`, but with nonzero discretization error.
/// Tangents are independent while `uv < 6.25`.
fn sheared_cylinder(d: GridDomain) -> GridFunction<Vec3> {
    GridFunction::sample(d, |u, v| {
        let (t, z) = (u + 0.2 * v * v, v + 0.2 * u * u);
        Vec3::new(t.cos(), t.sin(), z)
    })
}

fn criterion_4() -> Outcome {
    let win = (0.5, 1.5, 0.6, 1.6);
    let (sk, sh) = curvature_errors(|d| sphere_immersion(2.0, d).unwrap(), win, 0.25, Some(0.5));
    let (ck, _) = curvature_errors(|d| cylinder_immersion(1.0, d).unwrap(), win, 0.0, None);
    let (qk, _) = curvature_errors(sheared_cylinder, win, 0.0, None);
    let (rk, rh, rq) = (ratios(&sk), ratios(&sh), ratios(&qk));
    // In the standard cylinder parametrization the truncation error of every
    // difference cancels and only round-off remains, so no halving ratio
    // exists there; it must instead sit far below the O(h²) level. The
    // sheared parametrization of the same surface carries the ratio test.
    let floor_ok = ck.iter().zip(&sk).all(|(c, s)| *c < 1e-3 * s);
    outcome(
        in_band(&rk, 3.0, 5.0) && in_band(&rh, 3.0, 5.0) && in_band(&rq, 3.0, 5.0) && floor_ok,
        format!(
            "sphere K errors {} ratios {rk:.2?}, H errors {} ratios {rh:.2?}; cylinder |K| {} (round-off only), sheared {} ratios {rq:.2?}",
            sci(&sk),
            sci(&sh),
            sci(&ck),
            sci(&qk)
        ),
    )
}

fn criterion_5() -> Outcome {
    let z = TimeScale::integers();
    let fs: [fn(f64) -> f64; 3] = [|t| t * t, |t| t.powi(3) - 2.0 * t, |t| (0.3 * t).sin()];
    let mut dev_z = 0.0f64;
    for f in fs {
        for k in -10..10 {
            let t = k as f64;
            dev_z = dev_z.max((z.delta_derivative(f, t, 1e-12).unwrap() - (f(t + 1.0) - f(t))).abs());
        }
    }
    let q: Vec<f64> = (-30..=30).map(|k| 2f64.powi(k)).collect();
    let qz = TimeScale::points(&q).unwrap();
    let dq = qz.delta_derivative(|t| t * t, 1.0, 1e-12).unwrap();
    let unit = TimeScale::interval(0.0, 1.0).unwrap();
    let dc = unit.delta_derivative(|t| t * t, 0.5, 1e-10).unwrap();

    let mixed_scale = TimeScale::new(vec![[0.0, 1.0].into(), [2.0, 2.0].into(), [3.0, 4.0].into()], None).unwrap();
    let domains = [
        GridDomain::lattice(1.0, 8, 8).unwrap(),
        GridDomain::lattice(0.1, 12, 9).unwrap(),
        GridDomain::continuum(0.0, 1.0, 0.0, 1.0, 0.05).unwrap(),
        GridDomain::new(mixed_scale.clone(), (0.0, 4.0), TimeScale::integers(), (-3.0, 3.0), 0.1).unwrap(),
        GridDomain::new(qz.clone(), (0.1, 40.0), mixed_scale, (0.0, 4.0), 0.25).unwrap(),
    ];
    let gs: [fn(f64, f64) -> f64; 3] = [|u, v| (u).sin() * v.cos(), |u, v| u * u * v - v.powi(3), |u, v| (u - 2.0 * v).exp()];
    let mut mixed = 0.0f64;
    for d in &domains {
        for g in gs {
            let f = GridFunction::sample(d.clone(), g);
            let scale = f.max_abs();
            for (i, j) in d.indices() {
                if let Ok(r) = f.mixed_partial_residual(i, j) {
                    mixed = mixed.max(r / scale);
                }
            }
        }
    }
    outcome(
        dev_z == 0.0 && dq == 3.0 && (dc - 1.0).abs() < 1e-8 && mixed < 1e-12,
        format!("ℤ deviation {dev_z:e}; 2^ℤ D(t²)(1) = {dq}; [0,1] D(t²)(0.5) = {dc:.12}; mixed partial residual {mixed:.1e}"),
    )
}

fn criterion_6() -> Outcome {
    let mesh = build_from_cauchy(&amsler_cauchy_data(FRAC_PI_2, 0.1, 50, 50).unwrap(), 1e-9).unwrap();
    let s = TimeScaleSurface::from_mesh(&mesh).unwrap();
    let mut diff = 0.0f64;
    for m in 0..mesh.rows() - 2 {
        for n in 0..mesh.cols() - 2 {
            let kt = s.ts_gaussian_curvature(m, n).unwrap();
            let kd = mesh.discrete_gaussian_curvature(m, n).unwrap();
            diff = diff.max((kt - kd).abs());
        }
    }
    let mut errs = Vec::new();
    for h in [0.02, 0.01, 0.005] {
        let d = GridDomain::continuum(0.25, 1.25, 0.25, 1.25, h).unwrap();
        let s = TimeScaleSurface::new(pseudosphere_chebyshev_immersion(d).unwrap());
        let mut e = 0.0f64;
        for (i, j) in s.domain().indices() {
            if let Ok(k) = s.ts_gaussian_curvature(i, j) {
                e = e.max((k + 1.0).abs());
            }
        }
        errs.push(e);
    }
    let orders: Vec<f64> = ratios(&errs).iter().map(|r| r.log2()).collect();
    outcome(
        diff < 1e-14 && orders.iter().all(|&p| p >= 1.0),
        format!("lattice |K_time − K_disc| {diff:e}; pseudosphere |K_time + 1| {}, observed orders {orders:.3?}", sci(&errs)),
    )
}

fn criterion_7() -> Outcome {
    let theta = verify_chebyshev_net(&amsler_mesh(0.1, DEFAULT_TWIST), 1e-9).unwrap().theta_quad.unwrap().mean;
    let a = theta.sin();
    let rep = verify_chebyshev_net(&amsler_mesh(a, DEFAULT_TWIST), 1e-9).unwrap();
    let theta2 = rep.theta_quad.unwrap().mean;
    let k = rep.k_vertex.unwrap();
    let k_err = (k.min + 1.0).abs().max((k.max + 1.0).abs());
    outcome(
        rep.pass && (a - theta2.sin()).abs() < 1e-6 && k_err < 1e-6,
        format!("θ = {theta:.12}, a = sin θ = {a:.12}; rebuilt |a − sin θ| {:.1e}, max |K + 1| {k_err:.1e}", (a - theta2.sin()).abs()),
    )
}

/// Curvature scale of the semi-discrete net; quads stay well conditioned
/// over the whole window at this value.
const SEMI_DISCRETE_KAPPA: f64 = 0.5;

fn semi_discrete_report() -> tsps_core::surface::ConjectureReport {
    let data = amsler_cauchy_data_aniso(FRAC_PI_2, 0.01, 0.1, 101, 11, SEMI_DISCRETE_KAPPA).unwrap();
    let mesh = build_from_cauchy(&data, 1e-9).unwrap();
    let domain = GridDomain::new(
        TimeScale::interval(0.0, 1.0).unwrap(),
        (0.0, 1.0),
        TimeScale::lattice(0.1).unwrap(),
        (0.0, 1.0),
        0.01,
    )
    .unwrap();
    let r = GridFunction::from_values(domain, mesh.vertices().to_vec()).unwrap();
    conjecture_constancy_report(&TimeScaleSurface::new(r), ConjectureConfig::default()).unwrap()
}

fn criterion_8() -> Outcome {
    let (a, b) = (semi_discrete_report(), semi_discrete_report());
    let s = a.stats;
    let finite = [s.mean, s.min, s.max, s.max_dev, a.std_dev].iter().all(|x| x.is_finite()) && s.count > 0;
    outcome(
        finite && a == b && a.label == "conjecture audit",
        format!(
            "{}: {} points, mean K {:.10}, range [{:.10}, {:.10}], max dev {:.1e}, deterministic {}",
            a.label,
            s.count,
            s.mean,
            s.min,
            s.max,
            s.max_dev,
            a == b
        ),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

#[test]
fn acceptance() {
    let criteria: [Criterion; 8] = [
        ("discrete K-surface construction", criterion_1),
        ("tetrahedron closed forms", criterion_2),
        ("smooth Chebyshev identity", criterion_3),
        ("extrinsic/intrinsic agreement", criterion_4),
        ("time-scale calculus", criterion_5),
        ("unification of curvatures", criterion_6),
        ("K = −1 normalization", criterion_7),
        ("conjecture audit", criterion_8),
    ];
    let mut failed = Vec::new();
    for (k, (name, run)) in criteria.iter().enumerate() {
        let o = run();
        println!("{} criterion {} ({}): {}", if o.pass { "PASS" } else { "FAIL" }, k + 1, name, o.detail);
        if !o.pass {
            failed.push(k + 1);
        }
    }
    assert!(failed.is_empty(), "failing criteria: {failed:?}");
}
