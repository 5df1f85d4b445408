//! Subcommand bodies. Every numeric flag is checked before any file is read
//! or any geometry computed.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use serde::Serialize;
use thiserror::Error;
use tsps_core::discrete::{build_from_cauchy, verify_chebyshev_net, CauchyData, DiscreteError, SurfaceMesh};
use tsps_core::forms::FormsField;
use tsps_core::geom::Vec3;
use tsps_core::io::{
    from_json, peek_kind, to_json, write_derivative_csv, write_forms_csv, write_mesh_csv, write_obj,
    write_surface_csv, DerivativeRow, IoError, Metadata,
};
use tsps_core::samples::{
    amsler_cauchy_data_twisted, chebyshev_forms_from_omega, cylinder_immersion, perturbed_cauchy_data,
    sphere_immersion, tractroid_immersion, OmegaField, SamplesError, RNG_ALGORITHM,
};
use tsps_core::surface::{conjecture_constancy_report, verify_ts_chebyshev, ConjectureConfig, SurfaceError, TimeScaleSurface};
use tsps_core::timescale::{GridDomain, GridFunction, TimeScale, TimeScaleError};

use crate::{
    AmslerArgs, BuildArgs, Cli, Command, ExportArgs, ExportFormat, Function, Generator, ImmersionArgs,
    PerturbedArgs, SolitonArgs, TsArgs, VerifyArgs, Window,
};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Construction(String),
    #[error("{0}")]
    Invariant(String),
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Construction(_) => 3,
            CliError::Invariant(_) => 4,
        }
    }
}

macro_rules! input_error {
    ($($t:ty),*) => {$(
        impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                CliError::Input(e.to_string())
            }
        }
    )*};
}

input_error!(IoError, SamplesError, TimeScaleError, io::Error);

impl From<SurfaceError> for CliError {
    fn from(e: SurfaceError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<DiscreteError> for CliError {
    fn from(e: DiscreteError) -> Self {
        match e {
            DiscreteError::Construction { .. } => CliError::Construction(e.to_string()),
            other => CliError::Input(other.to_string()),
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

fn bad(msg: String) -> CliError {
    CliError::Input(msg)
}

fn finite(name: &str, x: f64) -> Result<f64> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(bad(format!("--{name} must be finite, got {x}")))
    }
}

fn positive(name: &str, x: f64) -> Result<f64> {
    if finite(name, x)? > 0.0 {
        Ok(x)
    } else {
        Err(bad(format!("--{name} must be positive, got {x}")))
    }
}

fn at_least(name: &str, n: usize, min: usize) -> Result<usize> {
    if n >= min {
        Ok(n)
    } else {
        Err(bad(format!("--{name} must be at least {min}, got {n}")))
    }
}

/// Resolved `[umin, umax] × [vmin, vmax]` and step.
fn window(w: &Window, defaults: (f64, f64, f64, f64)) -> Result<(f64, f64, f64, f64, f64)> {
    let umin = finite("umin", w.umin.unwrap_or(defaults.0))?;
    let umax = finite("umax", w.umax.unwrap_or(defaults.1))?;
    let vmin = finite("vmin", w.vmin.unwrap_or(defaults.2))?;
    let vmax = finite("vmax", w.vmax.unwrap_or(defaults.3))?;
    let h = positive("h", w.h)?;
    if umin >= umax || vmin >= vmax {
        return Err(bad(format!("empty window [{umin}, {umax}] × [{vmin}, {vmax}]")));
    }
    Ok((umin, umax, vmin, vmax, h))
}

/// Metadata echoing the resolved window rather than the raw optional flags.
fn window_metadata(generator: &str, args: &impl Serialize, win: (f64, f64, f64, f64, f64), nt: bool) -> Metadata {
    let (umin, umax, vmin, vmax, h) = win;
    metadata(generator, args, nt).with_param(
        "window",
        serde_json::json!({"umin": umin, "umax": umax, "vmin": vmin, "vmax": vmax, "h": h}),
    )
}

fn metadata(generator: &str, params: &impl Serialize, no_timestamp: bool) -> Metadata {
    let mut meta = Metadata::generator(generator);
    if let Ok(serde_json::Value::Object(map)) = serde_json::to_value(params) {
        meta.params = map.into_iter().collect();
    }
    if !no_timestamp {
        meta.timestamp = Some(chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true));
    }
    meta
}

fn sink(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| bad(format!("cannot write {}: {e}", p.display())))?,
        )),
        None => Box::new(io::stdout().lock()),
    })
}

fn write_text(path: Option<&Path>, text: &str) -> Result<()> {
    let mut out = sink(path)?;
    out.write_all(text.as_bytes())?;
    out.flush()?;
    Ok(())
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| bad(format!("cannot read {}: {e}", path.display())))
}

pub fn run(cli: Cli) -> Result<()> {
    let nt = cli.no_timestamp;
    match cli.command {
        Command::Sample { generator } => match generator {
            Generator::Amsler(a) => sample_amsler(&a, nt),
            Generator::Perturbed(a) => sample_perturbed(&a, nt),
            Generator::SolitonForms(a) => sample_soliton(&a, nt),
            Generator::Sphere(a) => sample_immersion("sphere", &a, nt),
            Generator::Cylinder(a) => sample_immersion("cylinder", &a, nt),
            Generator::Tractroid(a) => sample_immersion("tractroid", &a, nt),
        },
        Command::Build(a) => build(&a, nt),
        Command::Verify(a) => verify(&a),
        Command::Export(a) => export(&a),
        Command::Ts(a) => ts(&a),
    }
}

fn sample_amsler(args: &AmslerArgs, nt: bool) -> Result<()> {
    let gamma = finite("gamma", args.gamma)?;
    if !(gamma > 0.0 && gamma < std::f64::consts::PI) {
        return Err(SamplesError::BadAngle(gamma).into());
    }
    let a = positive("a", args.a)?;
    let n1 = at_least("n1", args.n1, 3)?;
    let n2 = at_least("n2", args.n2, 3)?;
    let theta = finite("theta", args.theta)?;
    let data = amsler_cauchy_data_twisted(gamma, a, n1, n2, theta)?;
    write_text(args.output.as_deref(), &to_json(&data, &metadata("amsler", args, nt)))
}

fn sample_perturbed(args: &PerturbedArgs, nt: bool) -> Result<()> {
    let a = positive("a", args.a)?;
    let n = at_least("n", args.n, 3)?;
    let amplitude = finite("amplitude", args.amplitude)?;
    if !(0.0..std::f64::consts::FRAC_PI_2).contains(&amplitude) {
        return Err(bad(format!("--amplitude must lie in [0, π/2), got {amplitude}")));
    }
    let theta = finite("theta", args.theta)?;
    let data = perturbed_cauchy_data(args.seed, a, n, amplitude, theta)?;
    let meta = Metadata {
        seed: Some(args.seed),
        rng: Some(RNG_ALGORITHM.to_string()),
        ..metadata("perturbed", args, nt)
    };
    write_text(args.output.as_deref(), &to_json(&data, &meta))
}

fn sample_soliton(args: &SolitonArgs, nt: bool) -> Result<()> {
    let w = &args.window;
    let umin = w.umin.unwrap_or(-2.0);
    let umax = w.umax.unwrap_or(2.0);
    let win = window(w, (umin, umax, w.vmin.unwrap_or(umin), w.vmax.unwrap_or(umax)))?;
    let (u0, u1, v0, v1, h) = win;
    let lambda = finite("lambda", args.lambda)?;
    if lambda == 0.0 {
        return Err(bad("--lambda must be nonzero".into()));
    }
    let phase = finite("phase", args.phase)?;
    let eps = positive("eps", args.eps)?;
    if eps >= std::f64::consts::FRAC_PI_2 {
        return Err(bad(format!("--eps must be below π/2, got {eps}")));
    }
    let domain = GridDomain::continuum(u0, u1, v0, v1, h)?;
    let field = chebyshev_forms_from_omega(&OmegaField::soliton(domain, lambda, phase), eps)?;
    write_text(args.output.as_deref(), &to_json(&field, &window_metadata("soliton-forms", args, win, nt)))
}

fn sample_immersion(kind: &str, args: &ImmersionArgs, nt: bool) -> Result<()> {
    let defaults = match kind {
        "sphere" => (0.0, 1.0, 0.5, 1.5),
        "cylinder" => (0.0, 2.0, -1.0, 1.0),
        _ => (0.0, 1.0, 0.4, 1.4),
    };
    let win = window(&args.window, defaults)?;
    let (u0, u1, v0, v1, h) = win;
    let radius = positive("radius", args.radius)?;
    let domain = GridDomain::continuum(u0, u1, v0, v1, h)?;
    let r = match kind {
        "sphere" => sphere_immersion(radius, domain)?,
        "cylinder" => cylinder_immersion(radius, domain)?,
        _ => tractroid_immersion(domain)?,
    };
    write_text(args.output.as_deref(), &to_json(&r, &window_metadata(kind, args, win, nt)))
}

fn build(args: &BuildArgs, nt: bool) -> Result<()> {
    let tol = positive("tol", args.tol)?;
    let (data, source): (CauchyData, Metadata) = from_json(&read_text(&args.input)?)?;
    let mesh = build_from_cauchy(&data, tol)?;
    let meta = Metadata { seed: source.seed, rng: source.rng, ..metadata("build", args, nt) };
    write_text(args.output.as_deref(), &to_json(&mesh, &meta))?;
    let rep = verify_chebyshev_net(&mesh, tol)?;
    eprintln!(
        "built {}×{} net: edge residual {:.3e} at {:?}, coplanarity residual {:.3e} at {:?}",
        rep.rows, rep.cols, rep.edge_residual, rep.edge_worst, rep.coplanarity_residual, rep.coplanarity_worst
    );
    if rep.pass {
        Ok(())
    } else {
        Err(CliError::Invariant(format!("net fails verification at tolerance {tol:e}")))
    }
}

fn verify(args: &VerifyArgs) -> Result<()> {
    let tol = positive("tol", args.tol)?;
    let threshold = positive("threshold", args.threshold)?;
    let text = read_text(&args.input)?;
    match peek_kind(&text)?.as_str() {
        "mesh" => {
            let (mesh, _): (SurfaceMesh, _) = from_json(&text)?;
            verify_mesh(&mesh, tol, args.output.as_deref())
        }
        "surface" => {
            let (s, _): (TimeScaleSurface, _) = from_json(&text)?;
            verify_surface(&s, tol, threshold, args.output.as_deref())
        }
        "immersion" => {
            let (r, _): (GridFunction<Vec3>, _) = from_json(&text)?;
            verify_surface(&TimeScaleSurface::new(r), tol, threshold, args.output.as_deref())
        }
        other => Err(bad(format!("verify expects a mesh or surface file, found `{other}`"))),
    }
}

fn verify_mesh(mesh: &SurfaceMesh, tol: f64, out: Option<&Path>) -> Result<()> {
    let rep = verify_chebyshev_net(mesh, tol)?;
    write_mesh_csv(mesh, sink(out)?)?;
    eprintln!("edge residual {:.3e} at {:?}", rep.edge_residual, rep.edge_worst);
    eprintln!("coplanarity residual {:.3e} at {:?}", rep.coplanarity_residual, rep.coplanarity_worst);
    if let Some(t) = rep.theta_quad {
        eprintln!("theta mean {:.12} max deviation {:.3e}", t.mean, t.max_dev);
    }
    if let Some(k) = rep.k_vertex {
        eprintln!("K mean {:.12} max deviation {:.3e}", k.mean, k.max_dev);
    }
    if rep.pass {
        return Ok(());
    }
    let (what, value, at) = if rep.edge_residual > rep.coplanarity_residual {
        ("edge", rep.edge_residual, rep.edge_worst)
    } else {
        ("coplanarity", rep.coplanarity_residual, rep.coplanarity_worst)
    };
    Err(CliError::Invariant(format!(
        "invariant failure at tolerance {tol:e}: worst {what} residual {value:.3e} at vertex ({}, {})",
        at.0, at.1
    )))
}

fn verify_surface(s: &TimeScaleSurface, tol: f64, threshold: f64, out: Option<&Path>) -> Result<()> {
    let rep = verify_ts_chebyshev(s, tol)?;
    write_surface_csv(&rep, sink(out)?)?;
    eprintln!(
        "unit residual {:.3e}, tangency residual {:.3e}, worst at {:?}",
        rep.max_unit_residual, rep.max_tangency_residual, rep.worst
    );
    // Informational only; its outcome never changes the exit code.
    match conjecture_constancy_report(s, ConjectureConfig { net_tol: tol, threshold }) {
        Ok(c) => eprintln!(
            "{}: K mean {:.12}, std {:.3e}, within {:e}: {}",
            c.label, c.stats.mean, c.std_dev, c.threshold, c.within_threshold
        ),
        Err(e) => eprintln!("{} skipped: {e}", tsps_core::surface::CONJECTURE_LABEL),
    }
    if rep.pass {
        Ok(())
    } else {
        Err(CliError::Invariant(format!(
            "invariant failure at tolerance {tol:e}: worst residual {:.3e} at ({}, {})",
            rep.max_unit_residual.max(rep.max_tangency_residual),
            rep.worst.0,
            rep.worst.1
        )))
    }
}

fn export(args: &ExportArgs) -> Result<()> {
    let inferred = args
        .output
        .as_deref()
        .and_then(|p| p.extension())
        .and_then(|e| e.to_str())
        .map(|e| if e.eq_ignore_ascii_case("csv") { ExportFormat::Csv } else { ExportFormat::Obj });
    let format = args.format.or(inferred).unwrap_or(ExportFormat::Obj);
    let text = read_text(&args.input)?;
    match (peek_kind(&text)?.as_str(), format) {
        ("mesh", f) => {
            let (mesh, _): (SurfaceMesh, _) = from_json(&text)?;
            let out = sink(args.output.as_deref())?;
            match f {
                ExportFormat::Obj => write_obj(&mesh, out)?,
                ExportFormat::Csv => write_mesh_csv(&mesh, out)?,
            }
            Ok(())
        }
        ("forms", ExportFormat::Csv) => {
            let (field, _): (FormsField, _) = from_json(&text)?;
            Ok(write_forms_csv(&field, sink(args.output.as_deref())?)?)
        }
        (kind, f) => Err(bad(format!("cannot export a `{kind}` file as {f:?}"))),
    }
}

fn eval(f: Function, t: f64) -> f64 {
    match f {
        Function::Poly2 => t * t,
        Function::Poly3 => t * t * t,
        Function::Sin => t.sin(),
        Function::Exp => t.exp(),
    }
}

fn ts(args: &TsArgs) -> Result<()> {
    let lo = finite("lo", args.lo)?;
    let hi = finite("hi", args.hi)?;
    let step = positive("step", args.step)?;
    if lo > hi {
        return Err(bad(format!("empty window [{lo}, {hi}]")));
    }
    let (scale, _): (TimeScale, _) = from_json(&read_text(&args.input)?)?;
    let axis = scale.realize(lo, hi, step)?;
    let f = |t: f64| eval(args.function, t);
    let rows: Vec<DerivativeRow> = axis
        .points()
        .iter()
        .map(|p| {
            let tol = 1e-10 * (1.0 + f(p.t).abs());
            Ok(DerivativeRow {
                t: p.t,
                class: scale.classify(p.t)?.label(),
                delta: scale.delta_derivative(f, p.t, tol).ok(),
                nabla: scale.nabla_derivative(f, p.t, tol).ok(),
            })
        })
        .collect::<Result<_>>()?;
    write_derivative_csv(&rows, sink(args.output.as_deref())?)?;
    Ok(())
}
