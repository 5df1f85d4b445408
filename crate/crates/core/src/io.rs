//! File formats.
//!
//! Every JSON file is an envelope `{"format_version": 1, "kind": ..., "metadata": {...}, "data": ...}`;
//! unknown versions and mismatched kinds are rejected before the payload is
//! decoded. Floats are written with the shortest representation that
//! round-trips exactly. CSV reports write floats as `{:.16e}` (17 significant
//! digits) and leave uncomputable entries empty. OBJ export writes one `v`
//! line per vertex in row-major order and one quad `f` line per face.

use std::collections::BTreeMap;
use std::io::Write;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::discrete::{report_rows, CauchyData, SurfaceMesh};
use crate::forms::{FormsError, FormsField};
use crate::geom::Vec3;
use crate::samples::OmegaField;
use crate::surface::{TimeScaleSurface, TsReport};
use crate::timescale::{GridFunction, TimeScale};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported format_version {0} (expected {FORMAT_VERSION})")]
    UnsupportedVersion(u64),
    #[error("file holds a `{found}` payload, expected `{expected}`")]
    WrongKind { expected: &'static str, found: String },
    #[error("inconsistent payload: {0}")]
    Inconsistent(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Forms(#[from] FormsError),
}

/// Provenance attached to every file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rng: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<String>,
    /// Echo of the parameters that produced the file.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub params: BTreeMap<String, serde_json::Value>,
}

impl Metadata {
    pub fn generator(name: impl Into<String>) -> Self {
        Metadata { generator: Some(name.into()), ..Default::default() }
    }

    pub fn with_param(mut self, key: &str, value: impl Serialize) -> Self {
        let v = serde_json::to_value(value).unwrap_or(serde_json::Value::Null);
        self.params.insert(key.to_string(), v);
        self
    }
}

/// Payloads that can be stored in an envelope.
pub trait Payload: Sized {
    const KIND: &'static str;
    type Repr: Serialize + DeserializeOwned;
    fn to_repr(&self) -> Self::Repr;
    fn from_repr(repr: Self::Repr) -> Result<Self, IoError>;
}

macro_rules! plain_payload {
    ($t:ty, $kind:literal) => {
        impl Payload for $t {
            const KIND: &'static str = $kind;
            type Repr = $t;
            fn to_repr(&self) -> $t {
                self.clone()
            }
            fn from_repr(repr: $t) -> Result<Self, IoError> {
                Ok(repr)
            }
        }
    };
}

plain_payload!(TimeScale, "timescale");
plain_payload!(CauchyData, "cauchy");
plain_payload!(SurfaceMesh, "mesh");
plain_payload!(FormsField, "forms");
plain_payload!(OmegaField, "omega");
plain_payload!(GridFunction<Vec3>, "immersion");

#[derive(Serialize, Deserialize)]
pub struct SurfaceRepr {
    pub scale1: TimeScale,
    pub scale2: TimeScale,
    pub r: GridFunction<Vec3>,
}

impl Payload for TimeScaleSurface {
    const KIND: &'static str = "surface";
    type Repr = SurfaceRepr;
    fn to_repr(&self) -> SurfaceRepr {
        let d = self.domain();
        SurfaceRepr { scale1: d.scale1().clone(), scale2: d.scale2().clone(), r: self.r().clone() }
    }
    fn from_repr(repr: SurfaceRepr) -> Result<Self, IoError> {
        let d = repr.r.domain();
        if d.scale1() != &repr.scale1 || d.scale2() != &repr.scale2 {
            return Err(IoError::Inconsistent("scales differ from the grid domain of r".into()));
        }
        Ok(TimeScaleSurface::new(repr.r))
    }
}

#[derive(Serialize)]
struct EnvelopeOut<'a, R> {
    format_version: u32,
    kind: &'static str,
    metadata: &'a Metadata,
    data: R,
}

#[derive(Deserialize)]
struct Header {
    format_version: u64,
    kind: String,
}

#[derive(Deserialize)]
struct EnvelopeIn<R> {
    #[serde(default)]
    metadata: Metadata,
    data: R,
}

pub fn to_json<P: Payload>(value: &P, metadata: &Metadata) -> String {
    let env = EnvelopeOut { format_version: FORMAT_VERSION, kind: P::KIND, metadata, data: value.to_repr() };
    let mut s = serde_json::to_string_pretty(&env).expect("payloads serialize infallibly");
    s.push('\n');
    s
}

/// Kind recorded in an envelope, after checking the version.
pub fn peek_kind(text: &str) -> Result<String, IoError> {
    let h: Header = serde_json::from_str(text)?;
    if h.format_version != FORMAT_VERSION as u64 {
        return Err(IoError::UnsupportedVersion(h.format_version));
    }
    Ok(h.kind)
}

pub fn from_json<P: Payload>(text: &str) -> Result<(P, Metadata), IoError> {
    let kind = peek_kind(text)?;
    if kind != P::KIND {
        return Err(IoError::WrongKind { expected: P::KIND, found: kind });
    }
    let env: EnvelopeIn<P::Repr> = serde_json::from_str(text)?;
    Ok((P::from_repr(env.data)?, env.metadata))
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

/// Columns `index_u, index_v, K_extrinsic, K_intrinsic, codazzi_1, codazzi_2`.
pub fn write_forms_csv(field: &FormsField, out: impl Write) -> Result<(), IoError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["index_u", "index_v", "K_extrinsic", "K_intrinsic", "codazzi_1", "codazzi_2"])?;
    for r in field.report_rows()? {
        w.write_record([
            r.i.to_string(),
            r.j.to_string(),
            num(r.k_extrinsic),
            num(r.k_intrinsic),
            num(r.codazzi.0),
            num(r.codazzi.1),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Columns `m, n, phi, psi, theta, K, edge_residual, coplanarity_residual`.
pub fn write_mesh_csv(mesh: &SurfaceMesh, out: impl Write) -> Result<(), IoError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["m", "n", "phi", "psi", "theta", "K", "edge_residual", "coplanarity_residual"])?;
    for r in report_rows(mesh) {
        w.write_record([
            r.m.to_string(),
            r.n.to_string(),
            opt(r.phi),
            opt(r.psi),
            opt(r.theta),
            opt(r.k),
            num(r.edge_residual),
            opt(r.coplanarity_residual),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Columns `u, v, point_class_1, point_class_2, K_time, unit_res_1,
/// unit_res_2, tangency_res_1, tangency_res_2`.
pub fn write_surface_csv(report: &TsReport, out: impl Write) -> Result<(), IoError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "u",
        "v",
        "point_class_1",
        "point_class_2",
        "K_time",
        "unit_res_1",
        "unit_res_2",
        "tangency_res_1",
        "tangency_res_2",
    ])?;
    for r in &report.rows {
        w.write_record([
            num(r.u),
            num(r.v),
            r.class1.to_string(),
            r.class2.to_string(),
            opt(r.k_time),
            opt(r.unit_res_1),
            opt(r.unit_res_2),
            opt(r.tangency_res_1),
            opt(r.tangency_res_2),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// One row of a derivative table on a time scale.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivativeRow {
    pub t: f64,
    pub class: &'static str,
    pub delta: Option<f64>,
    pub nabla: Option<f64>,
}

/// Columns `t, class, delta, nabla`.
pub fn write_derivative_csv(rows: &[DerivativeRow], out: impl Write) -> Result<(), IoError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t", "class", "delta", "nabla"])?;
    for r in rows {
        w.write_record([num(r.t), r.class.to_string(), opt(r.delta), opt(r.nabla)])?;
    }
    w.flush()?;
    Ok(())
}

/// Wavefront OBJ: `rows·cols` vertices, `(rows−1)(cols−1)` quads, 1-based.
pub fn write_obj(mesh: &SurfaceMesh, mut out: impl Write) -> Result<(), IoError> {
    let (rows, cols) = (mesh.rows(), mesh.cols());
    writeln!(out, "# {rows}x{cols} net")?;
    for v in mesh.vertices() {
        writeln!(out, "v {} {} {}", num(v.x), num(v.y), num(v.z))?;
    }
    let id = |m: usize, n: usize| m * cols + n + 1;
    for m in 0..rows.saturating_sub(1) {
        for n in 0..cols.saturating_sub(1) {
            writeln!(out, "f {} {} {} {}", id(m, n), id(m + 1, n), id(m + 1, n + 1), id(m, n + 1))?;
        }
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discrete::build_from_cauchy;
    use crate::samples::amsler_cauchy_data;
    use crate::surface::verify_ts_chebyshev;
    use crate::timescale::GridDomain;

    fn mesh(n: usize) -> SurfaceMesh {
        build_from_cauchy(&amsler_cauchy_data(1.5, 0.1, n, n).unwrap(), 1e-9).unwrap()
    }

    #[test]
    fn envelope_round_trip() {
        let m = mesh(6);
        let meta = Metadata::generator("test").with_param("a", 0.1);
        let text = to_json(&m, &meta);
        let (back, meta2): (SurfaceMesh, _) = from_json(&text).unwrap();
        assert_eq!(back, m);
        assert_eq!(meta2, meta);
        assert_eq!(peek_kind(&text).unwrap(), "mesh");
    }

    #[test]
    fn version_and_kind_checked() {
        let text = to_json(&TimeScale::integers(), &Metadata::default());
        assert!(matches!(from_json::<SurfaceMesh>(&text), Err(IoError::WrongKind { .. })));
        let bumped = text.replace("\"format_version\": 1", "\"format_version\": 2");
        assert!(matches!(from_json::<TimeScale>(&bumped), Err(IoError::UnsupportedVersion(2))));
        assert!(matches!(from_json::<TimeScale>("{"), Err(IoError::Json(_))));
    }

    #[test]
    fn surface_round_trip() {
        let d = GridDomain::new(
            TimeScale::interval(0.0, 1.0).unwrap(),
            (0.0, 1.0),
            TimeScale::lattice(0.5).unwrap(),
            (0.0, 2.0),
            0.25,
        )
        .unwrap();
        let s = TimeScaleSurface::new(GridFunction::sample(d, |u, v| Vec3::new(u, v, u * v)));
        let text = to_json(&s, &Metadata::default());
        let (back, _): (TimeScaleSurface, _) = from_json(&text).unwrap();
        assert_eq!(back.r(), s.r());
        let tampered = text.replacen("0.5", "0.25", 1);
        assert!(from_json::<TimeScaleSurface>(&tampered).is_err());
    }

    #[test]
    fn obj_counts() {
        let mut buf = Vec::new();
        write_obj(&mesh(3), &mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert_eq!(s.lines().filter(|l| l.starts_with("v ")).count(), 9);
        assert_eq!(s.lines().filter(|l| l.starts_with("f ")).count(), 4);
        assert!(s.contains("f 1 4 5 2"));
    }

    #[test]
    fn csv_row_counts() {
        let m = mesh(7);
        let mut buf = Vec::new();
        write_mesh_csv(&m, &mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert_eq!(s.lines().count(), 1 + 25);
        assert!(s.starts_with("m,n,phi,psi,theta,K,edge_residual,coplanarity_residual"));

        let rep = verify_ts_chebyshev(&TimeScaleSurface::from_mesh(&m).unwrap(), 1e-8).unwrap();
        let mut buf = Vec::new();
        write_surface_csv(&rep, &mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert_eq!(s.lines().count(), 1 + 49);
        assert!(s.lines().nth(1).unwrap().contains(",isolated,isolated,"));
    }

    #[test]
    fn csv_floats_round_trip() {
        let x = 0.1f64 + 0.2;
        assert_eq!(num(x).parse::<f64>().unwrap(), x);
        assert_eq!(opt(None), "");
    }
}
