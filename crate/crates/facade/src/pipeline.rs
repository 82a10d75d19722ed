//! The request pipelines shared by the CLI and the HTTP service, so both
//! produce identical bytes for identical documents.

use serde::{Deserialize, Serialize};
use surfmotif::curve::{apply_affine, sample_curve, svg_document, Affine2, CurveSpec};
use surfmotif::render::ImageFormat;
use surfmotif::scene::{run, ErrorClass, ResolvedScene, SceneDoc, SceneError};
use surfmotif::spherical::{mesh_lift, obj_string, DEFAULT_PHI_MIN};
use surfmotif::Rgb;
use thiserror::Error;

use crate::diagnostics::Diagnostics;

/// Size caps applied before any work is done.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Limits {
    pub max_width: u32,
    pub max_height: u32,
    pub max_steps: u32,
    pub max_curve_samples: usize,
    pub max_mesh_vertices: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_width: 2048,
            max_height: 2048,
            max_steps: 8192,
            max_curve_samples: 1_000_000,
            max_mesh_vertices: 4_000_000,
        }
    }
}

impl Limits {
    pub const UNBOUNDED: Limits = Limits {
        max_width: u32::MAX,
        max_height: u32::MAX,
        max_steps: u32::MAX,
        max_curve_samples: usize::MAX,
        max_mesh_vertices: usize::MAX,
    };

    /// Default limits with a different image cap.
    pub fn with_max_size(width: u32, height: u32) -> Limits {
        Limits { max_width: width, max_height: height, ..Limits::default() }
    }
}

/// Parses `WxH` (or `N` for a square) into positive dimensions.
pub fn parse_size(text: &str) -> Result<(u32, u32), String> {
    let dim = |s: &str| match s.trim().parse::<u32>() {
        Ok(n) if n > 0 => Ok(n),
        _ => Err(format!("invalid size '{text}', expected WxH")),
    };
    match text.split_once(['x', 'X', '×']) {
        Some((w, h)) => Ok((dim(w)?, dim(h)?)),
        None => dim(text).map(|n| (n, n)),
    }
}

#[derive(Debug, Error)]
pub enum FacadeError {
    /// Malformed document: wrong shape, types or ranges.
    #[error("{0}")]
    Schema(String),
    /// Well-formed document whose equation or preset cannot be used.
    #[error("{0}")]
    Equation(String),
    #[error("{0}")]
    TooLarge(String),
    #[error("{0}")]
    Io(String),
}

impl FacadeError {
    pub fn kind(&self) -> &'static str {
        match self {
            FacadeError::Schema(_) => "schema",
            FacadeError::Equation(_) => "equation",
            FacadeError::TooLarge(_) => "too_large",
            FacadeError::Io(_) => "io",
        }
    }
}

impl From<SceneError> for FacadeError {
    fn from(e: SceneError) -> Self {
        match e.class() {
            ErrorClass::Schema => FacadeError::Schema(e.to_string()),
            ErrorClass::Semantic => FacadeError::Equation(e.to_string()),
        }
    }
}

/// Encoded output plus its media type.
#[derive(Clone, Debug, PartialEq)]
pub struct Payload {
    pub body: Vec<u8>,
    pub content_type: &'static str,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Rendered {
    pub payload: Payload,
    pub diagnostics: Diagnostics,
}

/// Resolves a scene document and checks it against `limits`.
pub fn prepare(doc: &SceneDoc, limits: &Limits) -> Result<ResolvedScene, FacadeError> {
    let resolved = doc.resolve()?;
    let (w, h) = resolved.output_size();
    let (tw, th) = (resolved.scene.width, resolved.scene.height);
    if w.max(tw) > limits.max_width || h.max(th) > limits.max_height {
        return Err(FacadeError::TooLarge(format!(
            "image {w}×{h} exceeds the {}×{} cap",
            limits.max_width, limits.max_height
        )));
    }
    if resolved.scene.steps > limits.max_steps {
        return Err(FacadeError::TooLarge(format!(
            "{} march steps exceed the cap of {}",
            resolved.scene.steps, limits.max_steps
        )));
    }
    Ok(resolved)
}

/// Renders, lays out and encodes a prepared scene. `format` overrides the
/// document's own.
pub fn render(resolved: &ResolvedScene, format: Option<ImageFormat>) -> Result<Rendered, FacadeError> {
    let (image, stats) = run(resolved)?;
    let format = format.unwrap_or(resolved.format);
    let body = image.encode(format).map_err(|e| FacadeError::Io(e.to_string()))?;
    let mut diagnostics = Diagnostics::for_expr(&resolved.scene.equation);
    diagnostics.stats = Some(stats);
    Ok(Rendered { payload: Payload { body, content_type: format.content_type() }, diagnostics })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CurveFormat {
    #[default]
    Svg,
    Json,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveRequest {
    pub a: f64,
    pub b: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transform: Option<Affine2>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stroke: Option<Rgb>,
    #[serde(default)]
    pub format: CurveFormat,
}

fn curve_spec(a: f64, b: f64, theta_max: Option<f64>) -> Result<CurveSpec, FacadeError> {
    let bad = |e: surfmotif::curve::CurveError| FacadeError::Schema(e.to_string());
    let spec = CurveSpec::new(a, b).map_err(bad)?;
    match theta_max {
        Some(t) => spec.with_theta_max(t).map_err(bad),
        None => Ok(spec),
    }
}

/// Samples a curve and encodes it as SVG or a JSON polyline.
pub fn curve(req: &CurveRequest, limits: &Limits) -> Result<Payload, FacadeError> {
    let mut spec = curve_spec(req.a, req.b, req.theta_max)?;
    if let Some(n) = req.samples {
        spec = spec.with_samples(n).map_err(|e| FacadeError::Schema(e.to_string()))?;
    }
    if spec.samples() > limits.max_curve_samples {
        return Err(FacadeError::TooLarge(format!(
            "{} samples exceed the cap of {}",
            spec.samples(),
            limits.max_curve_samples
        )));
    }
    let mut poly = sample_curve(&spec);
    if let Some(t) = &req.transform {
        if !t.is_finite() {
            return Err(FacadeError::Schema("transform entries must be finite".into()));
        }
        poly = apply_affine(&poly, t);
    }
    match req.format {
        CurveFormat::Svg => {
            let colors: Vec<Rgb> = req.stroke.into_iter().collect();
            let svg = svg_document(&[poly], &colors).map_err(|e| FacadeError::Schema(e.to_string()))?;
            Ok(Payload { body: svg.into_bytes(), content_type: "image/svg+xml" })
        }
        CurveFormat::Json => Ok(Payload { body: poly.to_json().into_bytes(), content_type: "application/json" }),
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MeshFormat {
    #[default]
    Obj,
    Json,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LiftRequest {
    pub a: f64,
    pub b: f64,
    pub n_theta: usize,
    pub n_phi: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi_min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta_max: Option<f64>,
    #[serde(default)]
    pub format: MeshFormat,
}

/// Builds the lifted surface mesh and encodes it as OBJ or JSON.
pub fn lift(req: &LiftRequest, limits: &Limits) -> Result<Payload, FacadeError> {
    let spec = curve_spec(req.a, req.b, req.theta_max)?;
    let vertices = req.n_theta.checked_mul(req.n_phi).unwrap_or(usize::MAX);
    if vertices > limits.max_mesh_vertices {
        return Err(FacadeError::TooLarge(format!(
            "{}×{} grid exceeds the cap of {} vertices",
            req.n_theta, req.n_phi, limits.max_mesh_vertices
        )));
    }
    let mesh = mesh_lift(&spec, req.n_theta, req.n_phi, req.phi_min.unwrap_or(DEFAULT_PHI_MIN))
        .map_err(|e| FacadeError::Schema(e.to_string()))?;
    match req.format {
        MeshFormat::Obj => {
            let text = obj_string(&mesh).map_err(|e| FacadeError::Schema(e.to_string()))?;
            Ok(Payload { body: text.into_bytes(), content_type: "model/obj" })
        }
        MeshFormat::Json => Ok(Payload { body: mesh.to_json().into_bytes(), content_type: "application/json" }),
    }
}
