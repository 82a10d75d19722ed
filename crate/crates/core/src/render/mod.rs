//! Orthographic ray casting of an implicit surface inside a clipping ball.
//!
//! Conventions:
//!
//! - The camera looks along `-z` (optionally rotated by a [`View`]). The
//!   image plane's half-extent over the shorter image side is `1/zoom`
//!   world units, pixels are square and `y` points up.
//! - Rays are clipped to a ball about the origin of radius `√2/zoom`, which
//!   circumscribes the visible square. Past zoom 1 the ball stops shrinking
//!   and keeps radius `√2`, so zooming into a unit-scale surface enlarges it
//!   instead of clipping it away.
//! - Along the clipped chord, `f` is sampled at `steps + 1` evenly spaced
//!   points. The first sign change is refined by bisection to `|Δt| < 1e-9`
//!   (at most 80 halvings). Roots of even multiplicity show no sign change
//!   and are not found; features thinner than one step can be missed.
//! - A hit is *front-facing* when `∇f · d < 0`. Flat shading paints front
//!   hits, back hits and misses with the scene's three colours; lit shading
//!   scales the front/back colour by `max(0.15, n·l)` with a headlight.

mod image;

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use self::image::{Image, ImageError, ImageFormat};
use crate::color::Rgb;
use crate::expr::{Dual3, EvalError, Expr, ParamBinding, RayEvaluator, Tape, LANES};
use crate::geom::Point3;

pub const DEFAULT_STEPS: u32 = 512;
pub const MAX_BISECTIONS: u32 = 80;
pub const BISECTION_TOLERANCE: f64 = 1e-9;
pub const LIGHT_FLOOR: f64 = 0.15;
const DEGENERATE_GRADIENT: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum RenderError {
    #[error("zoom must be a positive finite number, got {0}")]
    InvalidZoom(f64),
    #[error("image dimensions must be at least 1×1, got {0}×{1}")]
    InvalidSize(u32, u32),
    #[error("front, back and background colours must be distinct")]
    IndistinctColors,
    #[error("march steps must be at least 1")]
    InvalidSteps,
    #[error("pixel ({0}, {1}) is outside the image")]
    PixelOutOfRange(u32, u32),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// The three colours of a render.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Palette {
    pub front: Rgb,
    pub back: Rgb,
    pub background: Rgb,
}

impl Default for Palette {
    fn default() -> Self {
        Palette { front: Rgb::new(0xf2, 0xb1, 0x34), back: Rgb::new(0x9c, 0x2b, 0x1e), background: Rgb::WHITE }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Shading {
    /// Exactly the three palette colours.
    #[default]
    Flat,
    /// Front/back colours scaled by a Lambert factor.
    Lit,
}

/// Camera orientation: yaw about the world `y` axis, then pitch about the
/// world `x` axis, in degrees. Zero is the `-z` view.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct View {
    #[serde(default)]
    pub yaw: f64,
    #[serde(default)]
    pub pitch: f64,
}

impl View {
    fn is_identity(&self) -> bool {
        self.yaw == 0.0 && self.pitch == 0.0
    }

    fn rotate(&self, p: Point3) -> Point3 {
        if self.is_identity() {
            return p;
        }
        let (sy, cy) = self.yaw.to_radians().sin_cos();
        let (sp, cp) = self.pitch.to_radians().sin_cos();
        let q = Point3::new(cy * p.x + sy * p.z, p.y, -sy * p.x + cy * p.z);
        Point3::new(q.x, cp * q.y - sp * q.z, sp * q.y + cp * q.z)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Scene {
    pub equation: Expr,
    pub params: ParamBinding,
    pub zoom: f64,
    pub width: u32,
    pub height: u32,
    pub palette: Palette,
    pub steps: u32,
    pub shading: Shading,
    /// 2×2 supersampling; blends colours, so more than three may appear.
    pub supersample: bool,
    pub view: View,
}

impl Scene {
    pub fn new(equation: Expr, params: ParamBinding, zoom: f64, width: u32, height: u32) -> Self {
        Scene {
            equation,
            params,
            zoom,
            width,
            height,
            palette: Palette::default(),
            steps: DEFAULT_STEPS,
            shading: Shading::Flat,
            supersample: false,
            view: View::default(),
        }
    }

    /// Half-extent of the view over the shorter image side, in world units.
    pub fn half_extent(&self) -> f64 {
        1.0 / self.zoom
    }

    pub fn clip_radius(&self) -> f64 {
        std::f64::consts::SQRT_2 / self.zoom.min(1.0)
    }

    pub fn validate(&self) -> Result<(), RenderError> {
        if !(self.zoom > 0.0 && self.zoom.is_finite()) {
            return Err(RenderError::InvalidZoom(self.zoom));
        }
        if self.width == 0 || self.height == 0 {
            return Err(RenderError::InvalidSize(self.width, self.height));
        }
        let Palette { front, back, background } = self.palette;
        if front == back || front == background || back == background {
            return Err(RenderError::IndistinctColors);
        }
        if self.steps == 0 {
            return Err(RenderError::InvalidSteps);
        }
        if let Some(name) = self.params.missing_for(&self.equation).into_iter().next() {
            return Err(EvalError::UnboundParameter(name).into());
        }
        Ok(())
    }

    fn pixel_size(&self) -> f64 {
        2.0 * self.half_extent() / self.width.min(self.height) as f64
    }

    /// Ray through image position `(fx, fy)` in pixel units (pixel centres
    /// sit at `+0.5`).
    fn ray_at(&self, fx: f64, fy: f64) -> Ray {
        let s = self.pixel_size();
        let u = (fx - self.width as f64 / 2.0) * s;
        let v = (self.height as f64 / 2.0 - fy) * s;
        let origin = self.view.rotate(Point3::new(u, v, self.clip_radius()));
        let direction = self.view.rotate(Point3::new(0.0, 0.0, -1.0));
        Ray { origin, direction }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Ray {
    pub origin: Point3,
    /// Unit length.
    pub direction: Point3,
}

impl Ray {
    pub fn at(&self, t: f64) -> Point3 {
        self.origin + self.direction * t
    }

    /// Parameter interval where the ray is inside the ball of `radius`
    /// about the origin, restricted to `t ≥ 0`.
    pub fn clip_to_ball(&self, radius: f64) -> Option<(f64, f64)> {
        let b = self.origin.dot(self.direction);
        let c = self.origin.dot(self.origin) - radius * radius;
        let disc = b * b - c;
        if disc < 0.0 {
            return None;
        }
        let root = disc.sqrt();
        let (t0, t1) = ((-b - root).max(0.0), -b + root);
        (t1 > t0).then_some((t0, t1))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Hit {
    pub t: f64,
    pub point: Point3,
    /// Unit normal `±∇f/|∇f|`, turned to face the viewer.
    pub normal: Point3,
    /// `∇f · d < 0`.
    pub front_facing: bool,
    /// `n · (−d)`, in `[0, 1]`.
    pub facing: f64,
    /// `|∇f|` was below `1e-12`; the normal is just `−d`.
    pub degenerate: bool,
}

/// Orthographic ray for pixel `(px, py)`.
pub fn camera_ray(scene: &Scene, px: u32, py: u32) -> Result<Ray, RenderError> {
    if px >= scene.width || py >= scene.height {
        return Err(RenderError::PixelOutOfRange(px, py));
    }
    Ok(scene.ray_at(px as f64 + 0.5, py as f64 + 0.5))
}

/// Smallest-`t` root of the scene's equation along `ray`, inside the
/// clipping ball.
pub fn first_hit(scene: &Scene, ray: &Ray) -> Result<Option<Hit>, RenderError> {
    let renderer = Renderer::new(scene)?;
    let mut ev = RayEvaluator::new(&renderer.tape, ray.direction);
    Ok(renderer.trace(&mut ev, ray)?)
}

/// Colour of a pixel given its hit (or miss).
pub fn shade(hit: Option<&Hit>, scene: &Scene) -> Rgb {
    let pal = &scene.palette;
    let Some(hit) = hit else { return pal.background };
    if hit.degenerate {
        return pal.front;
    }
    let base = if hit.front_facing { pal.front } else { pal.back };
    match scene.shading {
        Shading::Flat => base,
        Shading::Lit => base.scaled(hit.facing.max(LIGHT_FLOOR)),
    }
}

/// Per-render counters.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RenderStats {
    /// Primary rays that found the surface.
    pub hits: u64,
    /// Rays abandoned because evaluation failed; their pixels are background.
    pub eval_errors: u64,
    pub wall_ms: f64,
}

/// A validated scene with its equation compiled.
pub struct Renderer<'s> {
    scene: &'s Scene,
    tape: Tape,
}

impl<'s> Renderer<'s> {
    pub fn new(scene: &'s Scene) -> Result<Self, RenderError> {
        scene.validate()?;
        let tape = Tape::compile(&scene.equation, &scene.params)?;
        Ok(Renderer { scene, tape })
    }

    fn trace(&self, ev: &mut RayEvaluator<'_>, ray: &Ray) -> Result<Option<Hit>, EvalError> {
        let Some((t0, t1)) = ray.clip_to_ball(self.scene.clip_radius()) else { return Ok(None) };
        let n = self.scene.steps as usize;
        let dt = (t1 - t0) / n as f64;
        let t_of = |i: usize| if i >= n { t1 } else { t0 + i as f64 * dt };

        ev.set_ray(ray.origin);
        let mut pts = [[0.0; LANES]; 3];
        let mut vals = [0.0; LANES];
        let mut prev: Option<(f64, f64)> = None;
        let mut start = 0;
        while start <= n {
            for l in 0..LANES {
                let p = ray.at(t_of(start + l));
                pts[0][l] = p.x;
                pts[1][l] = p.y;
                pts[2][l] = p.z;
            }
            let errors = ev.eval_lanes(&pts, &mut vals);
            for (l, &f) in vals.iter().enumerate().take((n + 1 - start).min(LANES)) {
                if errors & (1 << l) != 0 {
                    return Err(EvalError::DivisionByZero);
                }
                let t = t_of(start + l);
                if f == 0.0 {
                    return self.hit_at(ray, t).map(Some);
                }
                if let Some((tp, fp)) = prev {
                    if (fp < 0.0 && f > 0.0) || (fp > 0.0 && f < 0.0) {
                        let t = self.bisect(ev, ray, (tp, fp), (t, f))?;
                        return self.hit_at(ray, t).map(Some);
                    }
                }
                if !f.is_nan() {
                    prev = Some((t, f));
                }
            }
            start += LANES;
        }
        Ok(None)
    }

    fn bisect(
        &self,
        ev: &mut RayEvaluator<'_>,
        ray: &Ray,
        (mut lo, mut f_lo): (f64, f64),
        (mut hi, mut f_hi): (f64, f64),
    ) -> Result<f64, EvalError> {
        for _ in 0..MAX_BISECTIONS {
            if hi - lo < BISECTION_TOLERANCE {
                break;
            }
            let mid = 0.5 * (lo + hi);
            let f = ev.eval_point(ray.at(mid))?;
            if f == 0.0 {
                return Ok(mid);
            }
            if (f < 0.0) == (f_lo < 0.0) {
                (lo, f_lo) = (mid, f);
            } else {
                (hi, f_hi) = (mid, f);
            }
        }
        Ok(if f_lo.abs() <= f_hi.abs() { lo } else { hi })
    }

    fn hit_at(&self, ray: &Ray, t: f64) -> Result<Hit, EvalError> {
        let point = ray.at(t);
        let vars = [Dual3::seed(point.x, 0), Dual3::seed(point.y, 1), Dual3::seed(point.z, 2)];
        let grad = Point3::from(self.tape.eval_with(vars, &mut Vec::with_capacity(self.tape.len()))?.d);
        let len = grad.norm();
        if !(len >= DEGENERATE_GRADIENT) || !len.is_finite() {
            return Ok(Hit { t, point, normal: -ray.direction, front_facing: true, facing: 1.0, degenerate: true });
        }
        let n = grad * (1.0 / len);
        let cos = n.dot(ray.direction);
        let front_facing = cos < 0.0;
        let normal = if front_facing { n } else { -n };
        Ok(Hit { t, point, normal, front_facing, facing: cos.abs().min(1.0), degenerate: false })
    }

    fn pixel(&self, ev: &mut RayEvaluator<'_>, px: u32, py: u32, stats: &mut RenderStats) -> Rgb {
        let scene = self.scene;
        let offsets: &[(f64, f64)] =
            if scene.supersample { &[(0.25, 0.25), (0.75, 0.25), (0.25, 0.75), (0.75, 0.75)] } else { &[(0.5, 0.5)] };
        let mut acc = [0u32; 3];
        let mut hit_any = false;
        for &(ox, oy) in offsets {
            let ray = scene.ray_at(px as f64 + ox, py as f64 + oy);
            let c = match self.trace(ev, &ray) {
                Ok(hit) => {
                    hit_any |= hit.is_some();
                    shade(hit.as_ref(), scene)
                }
                Err(_) => {
                    stats.eval_errors += 1;
                    scene.palette.background
                }
            };
            for (a, v) in acc.iter_mut().zip(c.0) {
                *a += v as u32;
            }
        }
        if hit_any {
            stats.hits += 1;
        }
        let k = offsets.len() as u32;
        Rgb(acc.map(|a| ((a + k / 2) / k) as u8))
    }

    fn render_row(&self, ev: &mut RayEvaluator<'_>, py: u32) -> (Vec<Rgb>, RenderStats) {
        let mut stats = RenderStats::default();
        let row = (0..self.scene.width).map(|px| self.pixel(ev, px, py, &mut stats)).collect();
        (row, stats)
    }

    fn direction(&self) -> Point3 {
        self.scene.ray_at(0.5, 0.5).direction
    }

    /// Renders rows in parallel. The result does not depend on the number
    /// of threads.
    pub fn render(&self) -> (Image, RenderStats) {
        let started = Instant::now();
        let dir = self.direction();
        let rows: Vec<_> = (0..self.scene.height)
            .into_par_iter()
            .map_init(|| RayEvaluator::new(&self.tape, dir), |ev, py| self.render_row(ev, py))
            .collect();
        self.assemble(rows, started)
    }

    /// Single-threaded reference path.
    pub fn render_sequential(&self) -> (Image, RenderStats) {
        let started = Instant::now();
        let mut ev = RayEvaluator::new(&self.tape, self.direction());
        let rows: Vec<_> = (0..self.scene.height).map(|py| self.render_row(&mut ev, py)).collect();
        self.assemble(rows, started)
    }

    fn assemble(&self, rows: Vec<(Vec<Rgb>, RenderStats)>, started: Instant) -> (Image, RenderStats) {
        let mut pixels = Vec::with_capacity(self.scene.width as usize * self.scene.height as usize);
        let mut stats = RenderStats::default();
        for (row, s) in rows {
            pixels.extend(row);
            stats.hits += s.hits;
            stats.eval_errors += s.eval_errors;
        }
        stats.wall_ms = started.elapsed().as_secs_f64() * 1e3;
        (Image::from_pixels(self.scene.width, self.scene.height, pixels), stats)
    }
}

/// Renders `scene` (in parallel).
pub fn render_scene(scene: &Scene) -> Result<(Image, RenderStats), RenderError> {
    Ok(Renderer::new(scene)?.render())
}
