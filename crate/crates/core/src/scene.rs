//! Scene documents: the JSON form of a render request, shared by every
//! front end.
//!
//! ```json
//! {
//!   "equation": "x^2+y^2+z^2-1",
//!   "params": {},
//!   "zoom": 1.0,
//!   "width": 256,
//!   "height": 256,
//!   "colors": {"front": "#f2b134", "back": "#9c2b1e", "background": "#ffffff"}
//! }
//! ```
//!
//! Optional keys: `preset` (fills in anything not given), `steps`,
//! `shading` (`"flat"` or `"lit"`), `supersample`, `view` (`{yaw, pitch}`
//! in degrees), `format` (`"png"` or `"ppm"`) and `motif` (a
//! [`MotifLayout`]). Unknown keys are rejected.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::{EvalError, Expr, ParamBinding, ParseError};
use crate::motif::{self, MotifError, MotifLayout};
use crate::render::{Image, ImageFormat, Palette, RenderError, RenderStats, Renderer, Scene, Shading, View};

pub const DEFAULT_SIZE: u32 = 512;
pub const DEFAULT_ZOOM: f64 = 1.0;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub equation: Option<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub params: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zoom: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub width: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub height: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub colors: Option<Palette>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shading: Option<Shading>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub supersample: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub view: Option<View>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<ImageFormat>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub motif: Option<MotifLayout>,
}

/// Whether a failure is the document's shape or its meaning.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorClass {
    /// Malformed JSON, wrong types, out-of-range numbers.
    Schema,
    /// Well-formed, but the equation, preset or parameters don't work.
    Semantic,
}

#[derive(Debug, Error)]
pub enum SceneError {
    #[error("invalid scene document: {0}")]
    Json(#[from] serde_json::Error),
    #[error("scene needs an equation or a preset")]
    MissingEquation,
    #[error("invalid {field}: {reason}")]
    Field { field: &'static str, reason: String },
    #[error("equation: {0}")]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Motif(#[from] MotifError),
    #[error(transparent)]
    Render(#[from] RenderError),
}

impl SceneError {
    pub fn class(&self) -> ErrorClass {
        match self {
            SceneError::Json(_) | SceneError::Field { .. } | SceneError::MissingEquation => ErrorClass::Schema,
            SceneError::Motif(MotifError::UnknownPreset { .. }) => ErrorClass::Semantic,
            SceneError::Motif(_) => ErrorClass::Schema,
            SceneError::Render(RenderError::Eval(_)) | SceneError::Parse(_) => ErrorClass::Semantic,
            SceneError::Render(_) => ErrorClass::Schema,
        }
    }
}

/// A document with defaults filled in and its equation parsed.
#[derive(Clone, Debug, PartialEq)]
pub struct ResolvedScene {
    pub scene: Scene,
    pub format: ImageFormat,
    pub motif: Option<MotifLayout>,
}

impl ResolvedScene {
    /// Final output dimensions (the motif canvas when there is one).
    pub fn output_size(&self) -> (u32, u32) {
        match &self.motif {
            Some(m) => (m.canvas_width, m.canvas_height),
            None => (self.scene.width, self.scene.height),
        }
    }
}

fn field(field: &'static str, reason: impl Into<String>) -> SceneError {
    SceneError::Field { field, reason: reason.into() }
}

impl SceneDoc {
    pub fn from_json(text: &str) -> Result<SceneDoc, SceneError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn from_slice(bytes: &[u8]) -> Result<SceneDoc, SceneError> {
        Ok(serde_json::from_slice(bytes)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scene serializes")
    }

    /// Validates and fills in defaults. Preset values apply wherever the
    /// document is silent; document parameters override preset ones.
    pub fn resolve(&self) -> Result<ResolvedScene, SceneError> {
        let preset = self.preset.as_deref().map(motif::preset).transpose()?;
        let equation = match (&self.equation, preset) {
            (Some(text), _) => Expr::parse(text)?,
            (None, Some(p)) => p.expr(),
            (None, None) => return Err(SceneError::MissingEquation),
        };
        let mut params: ParamBinding = preset.map(|p| p.param_binding()).unwrap_or_default();
        for (name, &value) in &self.params {
            if !crate::expr::is_parameter_name(name) {
                return Err(field("params", format!("'{name}' is not a parameter name")));
            }
            if !value.is_finite() {
                return Err(field("params", format!("'{name}' must be finite")));
            }
            params.insert(name.clone(), value);
        }
        let zoom = self.zoom.or(preset.map(|p| p.zoom)).unwrap_or(DEFAULT_ZOOM);
        if !(zoom > 0.0 && zoom.is_finite()) {
            return Err(field("zoom", format!("must be positive, got {zoom}")));
        }
        let width = self.width.unwrap_or(DEFAULT_SIZE);
        let height = self.height.unwrap_or(DEFAULT_SIZE);
        if width == 0 || height == 0 {
            return Err(field("size", format!("must be at least 1×1, got {width}×{height}")));
        }
        let mut scene = Scene::new(equation, params, zoom, width, height);
        if let Some(p) = preset {
            scene.palette = p.palette;
        }
        if let Some(colors) = self.colors {
            scene.palette = colors;
        }
        if let Some(steps) = self.steps {
            if steps == 0 {
                return Err(field("steps", "must be at least 1"));
            }
            scene.steps = steps;
        }
        scene.shading = self.shading.unwrap_or_default();
        scene.supersample = self.supersample;
        if let Some(view) = self.view {
            if !(view.yaw.is_finite() && view.pitch.is_finite()) {
                return Err(field("view", "angles must be finite"));
            }
            scene.view = view;
        }
        if let Some(m) = &self.motif {
            let (w, h) = m.tile_size()?;
            scene.width = w;
            scene.height = h;
        }
        if let Some(name) = scene.params.missing_for(&scene.equation).into_iter().next() {
            return Err(RenderError::Eval(EvalError::UnboundParameter(name)).into());
        }
        scene.validate()?;
        Ok(ResolvedScene { scene, format: self.format.unwrap_or_default(), motif: self.motif })
    }
}

/// Renders a resolved scene and applies its motif layout, if any.
pub fn run(resolved: &ResolvedScene) -> Result<(Image, RenderStats), SceneError> {
    let (tile, stats) = Renderer::new(&resolved.scene)?.render();
    let image = match &resolved.motif {
        Some(layout) => layout.apply(&tile)?,
        None => tile,
    };
    Ok((image, stats))
}
