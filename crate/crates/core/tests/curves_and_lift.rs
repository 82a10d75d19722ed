use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, FRAC_PI_4, PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use surfmotif::curve::{
    apply_affine, closure_period, eval_curve, export_svg, sample_curve, svg_document, Affine2, CurveSpec, Polyline2,
    DEFAULT_DENOM_LIMIT,
};
use surfmotif::spherical::{
    export_obj, lift, mesh_grid, mesh_lift, verify_sphere_identity, SurfaceMesh, DEFAULT_PHI_MIN,
};
use surfmotif::{Point3, Rgb};

/// The curve formula written out directly.
fn reference_point(a: f64, b: f64, theta: f64) -> (f64, f64) {
    let s = a + b;
    let k = s / b;
    (-s * theta.sin() - s * (k * theta).sin(), s * theta.cos() + s * (k * theta).cos())
}

fn dist(p: [f64; 2], q: [f64; 2]) -> f64 {
    (p[0] - q[0]).hypot(p[1] - q[1])
}

#[test]
fn fixed_curve_values() {
    let spec = CurveSpec::new(0.75, 0.25).unwrap();
    assert_eq!(eval_curve(&spec, 0.0), (0.0, 2.0));

    let spec = CurveSpec::new(2.0, 1.0).unwrap();
    let (x, y) = eval_curve(&spec, PI);
    assert!(x.abs() < 1e-12 && (y + 6.0).abs() < 1e-12);

    let spec = CurveSpec::new(0.5, 0.3).unwrap();
    let (x, y) = eval_curve(&spec, 1.0);
    let (rx, ry) = reference_point(0.5, 0.3, 1.0);
    assert!((x - rx).abs() < 1e-15 && (y - ry).abs() < 1e-15);
    assert!((x - -1.038_994_889).abs() < 1e-6, "{x}");
    assert!((y - -0.279_219_410).abs() < 1e-6, "{y}");
}

#[test]
fn odd_even_symmetry() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for (a, b) in [(2.0, 1.0), (0.5, 0.3), (1.0, 2.0), (3.7, 0.9)] {
        let spec = CurveSpec::new(a, b).unwrap();
        for _ in 0..100 {
            let t = rng.gen_range(-50.0..50.0);
            let (x, y) = eval_curve(&spec, t);
            let (xm, ym) = eval_curve(&spec, -t);
            assert!((x + xm).abs() < 1e-12 && (y - ym).abs() < 1e-12);
        }
    }
}

#[test]
fn amplitude_bound() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for (a, b) in [(2.0, 1.0), (0.5, 0.3), (1.0, 2.0)] {
        let spec = CurveSpec::new(a, b).unwrap().with_samples(100_000).unwrap();
        let bound = 2.0 * (a + b);
        for &[x, y] in &sample_curve(&spec).points {
            assert!(x.abs() <= bound + 1e-12 && y.abs() <= bound + 1e-12);
        }
        for _ in 0..1000 {
            let (x, y) = eval_curve(&spec, rng.gen_range(-1e3..1e3));
            assert!(x.abs() <= bound + 1e-12 && y.abs() <= bound + 1e-12);
        }
    }
}

#[test]
fn closure_periods() {
    assert_eq!(closure_period(2.0, 1.0, DEFAULT_DENOM_LIMIT), Some(TAU));
    assert_eq!(closure_period(1.0, 2.0, DEFAULT_DENOM_LIMIT), Some(2.0 * TAU));
    assert_eq!(closure_period(PI, 1.0, 50), None);
    for (a, b) in [(1.0, 2.0), (0.5, 0.3), (0.7, 0.2), (2.0, 1.0), (0.26, 0.56)] {
        if let Some(period) = closure_period(a, b, DEFAULT_DENOM_LIMIT) {
            let spec = CurveSpec::new(a, b).unwrap();
            assert!(dist(spec.point(0.0), spec.point(period)) < 1e-9, "({a}, {b})");
        }
    }
}

#[test]
fn default_sweep_closes() {
    let spec = CurveSpec::new(1.0, 2.0).unwrap();
    assert_eq!(spec.theta_max(), 2.0 * TAU);
    assert!(spec.is_closed());
    let open = CurveSpec::new(PI, 1.0).unwrap();
    assert_eq!(open.theta_max(), TAU * 100.0);

    let spec = CurveSpec::new(2.0, 1.0).unwrap().with_theta_max(TAU).unwrap().with_samples(1000).unwrap();
    let poly = sample_curve(&spec);
    assert_eq!(poly.len(), 1000);
    assert!(dist(poly.points[0], poly.points[999]) < 1e-9);

    let two = CurveSpec::new(2.0, 1.0).unwrap().with_theta_max(1.5).unwrap().with_samples(2).unwrap();
    assert_eq!(sample_curve(&two).points, vec![two.point(0.0), two.point(1.5)]);
}

#[test]
fn sampling_is_periodic_for_closed_curves() {
    let spec = CurveSpec::new(1.0, 2.0).unwrap().with_samples(500).unwrap();
    let period = spec.theta_max();
    let step = period / 499.0;
    for i in 0..500 {
        let theta = i as f64 * step;
        assert!(dist(spec.point(theta), spec.point(theta + period)) < 1e-9);
    }
}

#[test]
fn invalid_specs() {
    assert!(CurveSpec::new(1.0, 0.0).is_err());
    assert!(CurveSpec::new(-1.0, 1.0).is_err());
    assert!(CurveSpec::new(1.0, f64::NAN).is_err());
    assert!(CurveSpec::new(1.0, 1.0).unwrap().with_samples(1).is_err());
    assert!(CurveSpec::new(1.0, 1.0).unwrap().with_theta_max(0.0).is_err());
}

#[test]
fn affine_maps() {
    let poly = Polyline2::new(vec![[1.0, 0.0], [0.0, 1.0], [-2.0, 3.5]]);
    assert_eq!(apply_affine(&poly, &Affine2::IDENTITY), poly);
    let [x, y] = Affine2::rotation(FRAC_PI_2).apply([1.0, 0.0]);
    assert!(x.abs() < 1e-15 && (y - 1.0).abs() < 1e-15);
    assert_eq!(Affine2::linear([[1.0, 1.0], [0.0, 1.0]]).apply([0.0, 1.0]), [1.0, 1.0]);

    let s = Affine2::scaling(2.0, -0.5).then(&Affine2::translation(1.0, 1.0));
    let r = Affine2::rotation(0.3).then(&Affine2::shear(0.2, 0.0));
    let composed = s.then(&r);
    let stepwise = apply_affine(&apply_affine(&poly, &s), &r);
    for (p, q) in apply_affine(&poly, &composed).points.iter().zip(&stepwise.points) {
        assert!(dist(*p, *q) < 1e-12);
    }
}

#[test]
fn svg_is_well_formed() {
    let square = Polyline2::new(vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0], [0.0, 0.0]]);
    let text = svg_document(std::slice::from_ref(&square), &[]).unwrap();
    let doc = roxmltree::Document::parse(&text).unwrap();
    let root = doc.root_element();
    assert_eq!(root.tag_name().name(), "svg");
    assert_eq!(root.attribute("version"), Some("1.1"));
    let view: Vec<f64> = root.attribute("viewBox").unwrap().split(' ').map(|v| v.parse().unwrap()).collect();
    for (got, want) in view.iter().zip([-0.05, -1.05, 1.1, 1.1]) {
        assert!((got - want).abs() < 1e-12, "{view:?}");
    }
    let paths: Vec<_> = root.children().filter(|n| n.has_tag_name("path")).collect();
    assert_eq!(paths.len(), 1);
    let d = paths[0].attribute("d").unwrap();
    assert_eq!(d.split(['M', 'L']).filter(|s| !s.trim().is_empty()).count(), 5);

    let spec = CurveSpec::new(2.0, 1.0).unwrap();
    let polys = [sample_curve(&spec), apply_affine(&sample_curve(&spec), &Affine2::scaling(0.5, 0.5))];
    let colors = [Rgb::new(0x8b, 0x45, 0x13)];
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.svg");
    export_svg(&polys, &colors, &path).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    let doc = roxmltree::Document::parse(&text).unwrap();
    let strokes: Vec<_> = doc.descendants().filter_map(|n| n.attribute("stroke")).collect();
    assert_eq!(strokes, ["#8b4513", "#8b4513"]);

    assert!(svg_document(&[], &[]).is_err());
    assert!(export_svg(&polys, &colors, dir.path().join("missing/c.svg")).is_err());
}

#[test]
fn polyline_json_is_pairs() {
    let poly = Polyline2::new(vec![[1.0, 2.5], [-3.0, 0.0]]);
    let v: serde_json::Value = serde_json::from_str(&poly.to_json()).unwrap();
    assert_eq!(v, serde_json::json!([[1.0, 2.5], [-3.0, 0.0]]));
}

#[test]
fn lift_fixed_values() {
    let spec = CurveSpec::new(2.0, 1.0).unwrap();
    let s = lift(&spec, 0.0, FRAC_PI_2, DEFAULT_PHI_MIN).unwrap();
    assert!((s.point - Point3::new(0.0, 36.0, 0.0)).norm() < 1e-12);

    let (x, y) = reference_point(2.0, 1.0, FRAC_PI_4);
    let r = (x * x + y * y).sqrt();
    let rho = r / FRAC_PI_3.sin();
    let expected = Point3::new(x * rho * FRAC_PI_3.sin(), y * rho * FRAC_PI_3.sin(), rho * FRAC_PI_3.cos());
    let got = lift(&spec, FRAC_PI_4, FRAC_PI_3, DEFAULT_PHI_MIN).unwrap().point;
    assert!((got - expected).norm() < 1e-12, "{got:?} vs {expected:?}");
}

#[test]
fn sphere_identity_sweep() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let mut n = 0;
    for (a, b) in [(2.0, 1.0), (0.5, 0.3), (1.0, 2.0)] {
        let spec = CurveSpec::new(a, b).unwrap();
        for _ in 0..3334 {
            let theta = rng.gen_range(0.0..spec.theta_max());
            let phi = rng.gen_range(DEFAULT_PHI_MIN..PI - DEFAULT_PHI_MIN);
            let s = lift(&spec, theta, phi, DEFAULT_PHI_MIN).unwrap();
            let residual = verify_sphere_identity(&s, &spec);
            assert!(residual < 1e-9, "({a},{b}) θ={theta} φ={phi}: {residual}");
            n += 1;
        }
    }
    assert!(n >= 10_000);
}

#[test]
fn mesh_vertices_sit_on_their_spheres() {
    let spec = CurveSpec::new(0.5, 0.3).unwrap();
    let mesh = mesh_grid(&spec, 40, 17, DEFAULT_PHI_MIN).unwrap();
    assert_eq!(mesh.vertices.len(), 40 * 17);
    assert_eq!(mesh.quads.len(), 39 * 16);
    let d_theta = spec.theta_max() / 39.0;
    let d_phi = (PI - 2.0 * DEFAULT_PHI_MIN) / 16.0;
    for i in 0..40 {
        for j in 0..17 {
            let theta = i as f64 * d_theta;
            let phi = DEFAULT_PHI_MIN + j as f64 * d_phi;
            let s = lift(&spec, theta, phi, DEFAULT_PHI_MIN).unwrap();
            assert!((s.point - mesh.vertices[i * 17 + j]).norm() < 1e-9 * s.point.norm().max(1.0));
            assert!(verify_sphere_identity(&s, &spec) < 1e-9);
        }
    }
    let welded = mesh_lift(&spec, 40, 17, DEFAULT_PHI_MIN).unwrap();
    assert!(welded.seam_welded);
    for j in 0..17 {
        assert!((mesh.vertices[j] - mesh.vertices[39 * 17 + j]).norm() < 1e-9);
    }
}

/// Minimal OBJ reader: `v` and `f` records only.
fn read_obj(text: &str) -> (Vec<[f64; 3]>, Vec<Vec<usize>>) {
    let mut vs = Vec::new();
    let mut fs = Vec::new();
    for line in text.lines() {
        let mut it = line.split_whitespace();
        match it.next() {
            Some("v") => {
                let c: Vec<f64> = it.map(|t| t.parse().unwrap()).collect();
                vs.push([c[0], c[1], c[2]]);
            }
            Some("f") => fs.push(it.map(|t| t.parse::<usize>().unwrap()).collect()),
            _ => {}
        }
    }
    (vs, fs)
}

#[test]
fn obj_round_trip() {
    let spec = CurveSpec::new(2.0, 1.0).unwrap();
    let mesh = mesh_lift(&spec, 24, 9, DEFAULT_PHI_MIN).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.obj");
    export_obj(&mesh, &path).unwrap();
    let (vs, fs) = read_obj(&std::fs::read_to_string(&path).unwrap());
    assert_eq!(vs.len(), mesh.vertices.len());
    for (v, p) in vs.iter().zip(&mesh.vertices) {
        assert!((Point3::from(*v) - *p).norm() < 1e-6);
    }
    assert_eq!(fs.len(), mesh.quads.len());
    for (f, q) in fs.iter().zip(&mesh.quads) {
        assert_eq!(f.len(), 4);
        assert!(f.iter().all(|&i| i >= 1 && i <= vs.len()));
        assert_eq!(f.iter().map(|&i| i as u32 - 1).collect::<Vec<_>>(), q.to_vec());
    }

    let empty = SurfaceMesh { vertices: vec![], quads: vec![], n_theta: 0, n_phi: 0, seam_welded: false };
    assert!(export_obj(&empty, dir.path().join("e.obj")).is_err());
    assert!(export_obj(&mesh, dir.path().join("nope/m.obj")).is_err());
}

#[test]
fn mesh_json_shape() {
    let spec = CurveSpec::new(2.0, 1.0).unwrap().with_theta_max(1.0).unwrap();
    let mesh = mesh_lift(&spec, 2, 2, DEFAULT_PHI_MIN).unwrap();
    let v: serde_json::Value = serde_json::from_str(&mesh.to_json()).unwrap();
    assert_eq!(v["vertices"].as_array().unwrap().len(), 4);
    assert_eq!(v["vertices"][0].as_array().unwrap().len(), 3);
    assert_eq!(v["quads"], serde_json::json!([[0, 2, 3, 1]]));
    assert_eq!(v["n_theta"], 2);
}
