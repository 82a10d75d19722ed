//! Spherical-coordinate lift of a plane curve to a surface.
//!
//! A curve point `(x(θ), y(θ))` with `r = √(x² + y²)` and `ρ = r / sin φ`
//! goes to `(x·ρ sin φ, y·ρ sin φ, ρ cos φ)`. The `sin φ` cancels, leaving
//! `(x·r, y·r, r·cot φ)`, which is what [`lift`] computes. Every such point
//! lies on its own sphere
//!
//! ```text
//! X² + Y² + Z² = r²·(x² + y² + cot² φ)
//! ```
//!
//! and [`verify_sphere_identity`] measures how far a sample is from it.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;
use thiserror::Error;

use crate::curve::CurveSpec;
use crate::geom::Point3;

/// Polar cap excluded from the lift; `cot φ` diverges at the poles.
pub const DEFAULT_PHI_MIN: f64 = 1e-2;

#[derive(Debug, Error)]
pub enum LiftError {
    #[error("phi = {phi} is outside [{min}, π - {min}]")]
    PhiOutOfRange { phi: f64, min: f64 },
    #[error("phi_min must lie in (0, π/2), got {0}")]
    InvalidPhiMin(f64),
    #[error("mesh needs at least 2×2 samples, got {0}×{1}")]
    InvalidDims(usize, usize),
    #[error("mesh is empty")]
    Empty,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LiftSample {
    pub theta: f64,
    pub phi: f64,
    pub point: Point3,
}

fn check_phi_min(phi_min: f64) -> Result<(), LiftError> {
    if phi_min > 0.0 && phi_min < PI / 2.0 {
        Ok(())
    } else {
        Err(LiftError::InvalidPhiMin(phi_min))
    }
}

/// Lifts the curve point at `theta` to polar angle `phi`.
pub fn lift(spec: &CurveSpec, theta: f64, phi: f64, phi_min: f64) -> Result<LiftSample, LiftError> {
    check_phi_min(phi_min)?;
    if !(phi >= phi_min && phi <= PI - phi_min) {
        return Err(LiftError::PhiOutOfRange { phi, min: phi_min });
    }
    Ok(lift_unchecked(spec, theta, phi))
}

fn lift_unchecked(spec: &CurveSpec, theta: f64, phi: f64) -> LiftSample {
    let [x, y] = spec.point(theta);
    let r = x.hypot(y);
    let cot = phi.cos() / phi.sin();
    LiftSample { theta, phi, point: Point3::new(x * r, y * r, r * cot) }
}

/// `|LHS − RHS| / max(1, |RHS|)` for the sphere identity at `s`.
pub fn verify_sphere_identity(s: &LiftSample, spec: &CurveSpec) -> f64 {
    let [x, y] = spec.point(s.theta);
    let r2 = x * x + y * y;
    let cot = s.phi.cos() / s.phi.sin();
    let lhs = s.point.dot(s.point);
    let rhs = r2 * (x * x + y * y + cot * cot);
    (lhs - rhs).abs() / rhs.abs().max(1.0)
}

/// Quad mesh over a `(θ, φ)` grid, θ-major: vertex `(i, j)` sits at index
/// `i·n_phi + j`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SurfaceMesh {
    #[serde(serialize_with = "points_as_arrays")]
    pub vertices: Vec<Point3>,
    pub quads: Vec<[u32; 4]>,
    pub n_theta: usize,
    pub n_phi: usize,
    /// The last θ-row was merged into the first.
    pub seam_welded: bool,
}

fn points_as_arrays<S: serde::Serializer>(pts: &[Point3], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(pts.iter().map(|p| p.to_array()))
}

impl SurfaceMesh {
    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty() || self.quads.is_empty()
    }

    /// Studio preview format: `{vertices: [[x,y,z]…], quads: [[i,j,k,l]…], …}`.
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("mesh serializes")
    }
}

/// Full `n_theta × n_phi` grid over `θ ∈ [0, θmax]`,
/// `φ ∈ [phi_min, π − phi_min]`, without seam welding.
pub fn mesh_grid(spec: &CurveSpec, n_theta: usize, n_phi: usize, phi_min: f64) -> Result<SurfaceMesh, LiftError> {
    if n_theta < 2 || n_phi < 2 {
        return Err(LiftError::InvalidDims(n_theta, n_phi));
    }
    check_phi_min(phi_min)?;
    let d_theta = spec.theta_max() / (n_theta - 1) as f64;
    let d_phi = (PI - 2.0 * phi_min) / (n_phi - 1) as f64;
    let mut vertices = Vec::with_capacity(n_theta * n_phi);
    for i in 0..n_theta {
        let theta = if i == n_theta - 1 { spec.theta_max() } else { i as f64 * d_theta };
        for j in 0..n_phi {
            let phi = if j == n_phi - 1 { PI - phi_min } else { phi_min + j as f64 * d_phi };
            vertices.push(lift_unchecked(spec, theta, phi).point);
        }
    }
    let idx = |i: usize, j: usize| (i * n_phi + j) as u32;
    let mut quads = Vec::with_capacity((n_theta - 1) * (n_phi - 1));
    for i in 0..n_theta - 1 {
        for j in 0..n_phi - 1 {
            quads.push([idx(i, j), idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1)]);
        }
    }
    Ok(SurfaceMesh { vertices, quads, n_theta, n_phi, seam_welded: false })
}

/// Grid mesh of the lifted surface. When the curve closes over its sweep,
/// the duplicate last θ-row is dropped and its quads reuse the first row.
pub fn mesh_lift(spec: &CurveSpec, n_theta: usize, n_phi: usize, phi_min: f64) -> Result<SurfaceMesh, LiftError> {
    let mesh = mesh_grid(spec, n_theta, n_phi, phi_min)?;
    if spec.is_closed() && n_theta > 2 {
        Ok(weld_seam(mesh))
    } else {
        Ok(mesh)
    }
}

fn weld_seam(mut mesh: SurfaceMesh) -> SurfaceMesh {
    let n_phi = mesh.n_phi;
    let last_row = ((mesh.n_theta - 1) * n_phi) as u32;
    mesh.vertices.truncate(last_row as usize);
    for q in &mut mesh.quads {
        for v in q.iter_mut() {
            if *v >= last_row {
                *v -= last_row;
            }
        }
    }
    mesh.seam_welded = true;
    mesh
}

/// Wavefront OBJ text: `v` records then 1-based `f` records.
pub fn obj_string(mesh: &SurfaceMesh) -> Result<String, LiftError> {
    if mesh.is_empty() {
        return Err(LiftError::Empty);
    }
    let mut out = String::with_capacity(mesh.vertices.len() * 40 + mesh.quads.len() * 24);
    let _ = writeln!(out, "# {} x {} lifted surface grid", mesh.n_theta, mesh.n_phi);
    for v in &mesh.vertices {
        let _ = writeln!(out, "v {:.9} {:.9} {:.9}", v.x, v.y, v.z);
    }
    for [a, b, c, d] in &mesh.quads {
        let _ = writeln!(out, "f {} {} {} {}", a + 1, b + 1, c + 1, d + 1);
    }
    Ok(out)
}

pub fn export_obj(mesh: &SurfaceMesh, path: impl AsRef<Path>) -> Result<(), LiftError> {
    let text = obj_string(mesh)?;
    std::fs::write(path, text)?;
    Ok(())
}
