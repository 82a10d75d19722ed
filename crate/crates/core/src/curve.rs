//! Modified hypocycloid plane curves.
//!
//! For parameters `a, b > 0` and `k = (a+b)/b` the curve is
//!
//! ```text
//! x(θ) = -(a+b)·sin θ - (a+b)·sin(kθ)
//! y(θ) =  (a+b)·cos θ + (a+b)·cos(kθ)
//! ```
//!
//! Both amplitude terms use `a+b`, unlike the textbook hypocycloid. The curve
//! closes after `2π·q` when `k = p/q` in lowest terms.

use std::f64::consts::TAU;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::color::Rgb;

/// Largest denominator tried when looking for a closing period.
pub const DEFAULT_DENOM_LIMIT: u64 = 100;
/// Sweep used for curves that never close.
pub const OPEN_CURVE_THETA_MAX: f64 = TAU * 100.0;
/// Default sampling density.
pub const SAMPLES_PER_TURN: usize = 360;

#[derive(Debug, Error)]
pub enum CurveError {
    #[error("{name} must be a positive finite number, got {value}")]
    InvalidParameter { name: &'static str, value: f64 },
    #[error("samples must be at least 2, got {0}")]
    TooFewSamples(usize),
    #[error("nothing to export")]
    Empty,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Parameters and sampling controls of one curve.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CurveSpec {
    a: f64,
    b: f64,
    samples: usize,
    theta_max: f64,
}

fn positive(name: &'static str, value: f64) -> Result<f64, CurveError> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(CurveError::InvalidParameter { name, value })
    }
}

impl CurveSpec {
    /// Curve with default sweep and sampling: one closing period when the
    /// curve closes with denominator ≤ 100, otherwise 100 full turns.
    pub fn new(a: f64, b: f64) -> Result<Self, CurveError> {
        let a = positive("a", a)?;
        let b = positive("b", b)?;
        let theta_max = closure_period(a, b, DEFAULT_DENOM_LIMIT).unwrap_or(OPEN_CURVE_THETA_MAX);
        Ok(Self { a, b, samples: default_samples(theta_max), theta_max })
    }

    /// Sets the sweep; the sample count keeps its density unless set later.
    pub fn with_theta_max(mut self, theta_max: f64) -> Result<Self, CurveError> {
        self.theta_max = positive("theta_max", theta_max)?;
        self.samples = default_samples(self.theta_max);
        Ok(self)
    }

    pub fn with_samples(mut self, samples: usize) -> Result<Self, CurveError> {
        if samples < 2 {
            return Err(CurveError::TooFewSamples(samples));
        }
        self.samples = samples;
        Ok(self)
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn samples(&self) -> usize {
        self.samples
    }

    pub fn theta_max(&self) -> f64 {
        self.theta_max
    }

    /// Frequency ratio `(a+b)/b`.
    pub fn k(&self) -> f64 {
        (self.a + self.b) / self.b
    }

    /// Point of the curve at `theta`.
    pub fn point(&self, theta: f64) -> [f64; 2] {
        let s = self.a + self.b;
        let kt = self.k() * theta;
        [-s * theta.sin() - s * kt.sin(), s * theta.cos() + s * kt.cos()]
    }

    /// True when the sweep ends where it started, to within `1e-9`.
    pub fn is_closed(&self) -> bool {
        let [x0, y0] = self.point(0.0);
        let [x1, y1] = self.point(self.theta_max);
        (x1 - x0).hypot(y1 - y0) < 1e-9
    }
}

fn default_samples(theta_max: f64) -> usize {
    ((theta_max / TAU * SAMPLES_PER_TURN as f64).ceil() as usize + 1).max(2)
}

/// `(x(θ), y(θ))` for `spec`.
pub fn eval_curve(spec: &CurveSpec, theta: f64) -> (f64, f64) {
    let [x, y] = spec.point(theta);
    (x, y)
}

/// Smallest `Θ > 0` after which the curve repeats, found by matching
/// `k = (a+b)/b` to a fraction `p/q` with `q ≤ denom_limit`, within `1e-9`.
pub fn closure_period(a: f64, b: f64, denom_limit: u64) -> Option<f64> {
    if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
        return None;
    }
    let k = (a + b) / b;
    best_denominator(k, denom_limit).map(|q| TAU * q as f64)
}

/// Continued-fraction convergents of `value`; returns the first denominator
/// whose convergent is within `1e-9`.
fn best_denominator(value: f64, limit: u64) -> Option<u64> {
    const TOL: f64 = 1e-9;
    let (mut h_prev, mut h) = (1.0f64, value.floor());
    let (mut k_prev, mut k) = (0u64, 1u64);
    let mut rest = value - value.floor();
    loop {
        if k > limit {
            return None;
        }
        if (value - h / k as f64).abs() < TOL {
            return Some(k);
        }
        if rest < 1e-15 {
            return None;
        }
        let inv = 1.0 / rest;
        let term = inv.floor();
        rest = inv - term;
        let next_k = (term as u64).checked_mul(k)?.checked_add(k_prev)?;
        (h_prev, h) = (h, term * h + h_prev);
        (k_prev, k) = (k, next_k);
    }
}

/// Samples at `θᵢ = i·θmax/(n−1)` for `i = 0 … n−1`.
pub fn sample_curve(spec: &CurveSpec) -> Polyline2 {
    let n = spec.samples;
    let step = spec.theta_max / (n - 1) as f64;
    let mut points: Vec<[f64; 2]> = (0..n).map(|i| spec.point(i as f64 * step)).collect();
    // pin the last sample to the exact end of the sweep
    points[n - 1] = spec.point(spec.theta_max);
    Polyline2 { points }
}

/// Ordered plane points; serializes as an array of `[x, y]` pairs.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Polyline2 {
    pub points: Vec<[f64; 2]>,
}

impl Polyline2 {
    pub fn new(points: Vec<[f64; 2]>) -> Self {
        Self { points }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn transformed(&self, t: &Affine2) -> Polyline2 {
        apply_affine(self, t)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("finite points serialize")
    }
}

/// `p ↦ M·p + v`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Affine2 {
    /// Row-major 2×2 matrix.
    pub matrix: [[f64; 2]; 2],
    #[serde(default)]
    pub translation: [f64; 2],
}

impl Default for Affine2 {
    fn default() -> Self {
        Self::IDENTITY
    }
}

impl Affine2 {
    pub const IDENTITY: Affine2 = Affine2 { matrix: [[1.0, 0.0], [0.0, 1.0]], translation: [0.0, 0.0] };

    pub fn linear(matrix: [[f64; 2]; 2]) -> Self {
        Self { matrix, translation: [0.0, 0.0] }
    }

    /// Counter-clockwise rotation by `angle` radians.
    pub fn rotation(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Self::linear([[c, -s], [s, c]])
    }

    pub fn scaling(sx: f64, sy: f64) -> Self {
        Self::linear([[sx, 0.0], [0.0, sy]])
    }

    /// `x' = x + kx·y`, `y' = y + ky·x`.
    pub fn shear(kx: f64, ky: f64) -> Self {
        Self::linear([[1.0, kx], [ky, 1.0]])
    }

    pub fn translation(dx: f64, dy: f64) -> Self {
        Self { translation: [dx, dy], ..Self::IDENTITY }
    }

    pub fn apply(&self, [x, y]: [f64; 2]) -> [f64; 2] {
        let m = &self.matrix;
        [m[0][0] * x + m[0][1] * y + self.translation[0], m[1][0] * x + m[1][1] * y + self.translation[1]]
    }

    /// The transform that applies `self` first and then `next`.
    pub fn then(&self, next: &Affine2) -> Affine2 {
        let (a, b) = (&next.matrix, &self.matrix);
        let mut matrix = [[0.0; 2]; 2];
        for (i, row) in matrix.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        let t = next.apply(self.translation);
        Affine2 { matrix, translation: t }
    }

    pub fn is_finite(&self) -> bool {
        self.matrix.iter().flatten().chain(&self.translation).all(|v| v.is_finite())
    }
}

pub fn apply_affine(poly: &Polyline2, t: &Affine2) -> Polyline2 {
    Polyline2 { points: poly.points.iter().map(|&p| t.apply(p)).collect() }
}

/// SVG 1.1 document with one `<path>` per polyline. The y axis is flipped so
/// the drawing appears with y up; the viewBox is the bounding box plus 5% on
/// each side. Colours cycle when there are fewer colours than polylines;
/// with none, strokes are black.
pub fn svg_document(polys: &[Polyline2], stroke_colors: &[Rgb]) -> Result<String, CurveError> {
    if polys.is_empty() || polys.iter().any(|p| p.is_empty()) {
        return Err(CurveError::Empty);
    }
    let (mut x0, mut y0, mut x1, mut y1) = (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
    for &[x, y] in polys.iter().flat_map(|p| &p.points) {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(-y);
        y1 = y1.max(-y);
    }
    let extent = (x1 - x0).max(y1 - y0).max(f64::MIN_POSITIVE);
    let pad = |span: f64| if span > 0.0 { span * 0.05 } else { extent * 0.05 };
    let (px, py) = (pad(x1 - x0), pad(y1 - y0));
    let (vx, vy, vw, vh) = (x0 - px, y0 - py, (x1 - x0) + 2.0 * px, (y1 - y0) + 2.0 * py);
    let stroke_width = extent * 0.004;
    let (width_px, height_px) = if vw >= vh { (1024.0, 1024.0 * vh / vw) } else { (1024.0 * vw / vh, 1024.0) };

    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\" standalone=\"no\"?>\n");
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{width_px:.0}\" height=\"{height_px:.0}\" viewBox=\"{vx} {vy} {vw} {vh}\">"
    );
    for (i, poly) in polys.iter().enumerate() {
        let color = if stroke_colors.is_empty() { Rgb::BLACK } else { stroke_colors[i % stroke_colors.len()] };
        let mut d = String::with_capacity(poly.len() * 24);
        for (j, &[x, y]) in poly.points.iter().enumerate() {
            let _ = write!(d, "{}{},{}", if j == 0 { "M" } else { " L" }, x, -y);
        }
        let _ = writeln!(
            out,
            "  <path d=\"{d}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"{stroke_width}\" stroke-linejoin=\"round\" stroke-linecap=\"round\"/>"
        );
    }
    out.push_str("</svg>\n");
    Ok(out)
}

/// Writes [`svg_document`] to `path`.
pub fn export_svg(polys: &[Polyline2], stroke_colors: &[Rgb], path: impl AsRef<Path>) -> Result<(), CurveError> {
    let doc = svg_document(polys, stroke_colors)?;
    std::fs::write(path, doc)?;
    Ok(())
}
