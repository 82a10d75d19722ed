use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use surfmotif::expr::{intersect_sos, product, scale_sub, EvalError, Expr, ParamBinding, Var};
use surfmotif::motif::PRESETS;
use surfmotif::Point3;

fn leaf() -> impl Strategy<Value = Expr> {
    prop_oneof![
        (0u32..1000).prop_map(|n| Expr::Const(n as f64)),
        (0.0f64..1e6).prop_map(Expr::Const),
        prop_oneof![Just(Var::X), Just(Var::Y), Just(Var::Z)].prop_map(Expr::Var),
        prop_oneof![Just("a"), Just("b"), Just("t")].prop_map(Expr::param),
    ]
}

fn tree() -> impl Strategy<Value = Expr> {
    leaf().prop_recursive(8, 256, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a + b),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a - b),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a * b),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a / b),
            inner.clone().prop_map(|a| -a),
            (inner, 0u32..=64).prop_map(|(a, n)| a.pow(n)),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn print_then_parse_is_identity(e in tree()) {
        let text = e.to_string();
        let back = Expr::parse(&text).map_err(|err| TestCaseError::fail(format!("{text}: {err}")))?;
        prop_assert_eq!(back, e);
    }

    #[test]
    fn dilation_identity(
        k in prop_oneof![-4.0f64..-0.25, 0.25f64..4.0],
        p in prop::array::uniform3(-2.0f64..2.0),
        which in 0usize..4,
    ) {
        let f = Expr::parse(["x^2+y^2+z^2-1", "x*y*z+2*x*y*z-1", "(x-1)^3+y/3", "x^2+y^2+z^3-z^2"][which]).unwrap();
        let g = scale_sub(&f, k).unwrap();
        let params = ParamBinding::new();
        let p = Point3::from(p);
        let lhs = g.evaluate(p * k, &params).unwrap();
        let rhs = f.evaluate(p, &params).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.abs().max(1.0), "{lhs} vs {rhs}");
        prop_assert_eq!(g.degree(), f.degree());
    }

    #[test]
    fn product_is_a_homomorphism(p in prop::array::uniform3(-3.0f64..3.0)) {
        let f = Expr::parse("x^2+y^2+z^2+2*x*y*z-1").unwrap();
        let g = Expr::parse("(x-1)^2+(y-1)^2+(z-1)^2+2*(x-1)*(y-1)*(z-1)-2").unwrap();
        let fg = product([f.clone(), g.clone()]).unwrap();
        let params = ParamBinding::new();
        let p = Point3::from(p);
        let (a, b) = (f.evaluate(p, &params).unwrap(), g.evaluate(p, &params).unwrap());
        let v = fg.evaluate(p, &params).unwrap();
        prop_assert!((v - a * b).abs() <= 1e-12 * (a * b).abs().max(1e-300));
    }
}

#[test]
fn catalogue_equations_parse() {
    for p in PRESETS {
        let e = Expr::parse(p.equation).unwrap_or_else(|err| panic!("{}: {err}", p.name));
        assert_eq!(Expr::parse(&e.to_string()).unwrap(), e, "{}", p.name);
    }
    let atom = Expr::parse("(x^2+y^2+z^3-z^2)*((x-y)(x+y)-a)((x+y)(x-y)+a)").unwrap();
    assert_eq!(atom.parameters().into_iter().collect::<Vec<_>>(), ["a"]);
}

#[test]
fn parse_error_offsets() {
    let err = Expr::parse("x^2+*y").unwrap_err();
    assert_eq!(err.offset, 4);
    for bad in ["", "(x", "x)", "x^-1", "x^1.5", "x^65", "ab", "2x", "x y", "x^2^3", "()"] {
        let err = Expr::parse(bad).expect_err(bad);
        assert!(err.offset <= bad.len(), "{bad}: {err}");
    }
}

#[test]
fn ding_dong_vanishes_at_its_tip() {
    let e = Expr::parse("x^2+y^2+z^3-z^2").unwrap();
    assert_eq!(e.evaluate(Point3::new(0.0, 0.0, 1.0), &ParamBinding::new()).unwrap(), 0.0);
}

#[test]
fn cylinder_cross_against_straight_line_evaluation() {
    let e = Expr::parse("(x^2+y^2-1)^2+(z^2+(y+3-6*b)^2-1)^2-0.01*a=0").unwrap();
    let params = ParamBinding::new().with("a", 0.26).with("b", 0.56);
    let (x, y, z, a, b) = (1.0f64, 0.0f64, 0.0f64, 0.26f64, 0.56f64);
    let c1 = x * x + y * y - 1.0;
    let s = y + 3.0 - 6.0 * b;
    let c2 = z * z + s * s - 1.0;
    let expected = c1 * c1 + c2 * c2 - 0.01 * a;
    let got = e.evaluate(Point3::new(x, y, z), &params).unwrap();
    assert!((got - expected).abs() < 1e-15, "{got} vs {expected}");
    assert!((got - 0.754_996_16).abs() < 1e-9);
}

#[test]
fn evaluation_errors() {
    let e = Expr::parse("x/(y-1)-a").unwrap();
    let p = Point3::new(1.0, 1.0, 0.0);
    assert_eq!(e.evaluate(p, &ParamBinding::new()), Err(EvalError::UnboundParameter("a".into())));
    assert_eq!(e.evaluate(p, &ParamBinding::new().with("a", 0.0)), Err(EvalError::DivisionByZero));
}

fn central_difference(e: &Expr, p: Point3, params: &ParamBinding) -> Point3 {
    let mut g = [0.0; 3];
    for (i, gi) in g.iter_mut().enumerate() {
        let mut d = [0.0; 3];
        let h = 1e-5 * p.to_array()[i].abs().max(1.0);
        d[i] = h;
        let step = Point3::from(d);
        let fp = e.evaluate(p + step, params).unwrap();
        let fm = e.evaluate(p - step, params).unwrap();
        *gi = (fp - fm) / (2.0 * h);
    }
    Point3::from(g)
}

#[test]
fn gradients_match_central_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for preset in PRESETS {
        let e = preset.expr();
        let params = preset.param_binding();
        let r = 1.0 / preset.zoom;
        let mut checked = 0;
        while checked < 1000 {
            let p = Point3::new(rng.gen_range(-r..r), rng.gen_range(-r..r), rng.gen_range(-r..r));
            let g = e.gradient(p, &params).unwrap();
            if g.norm() < 1e-8 {
                continue;
            }
            let fd = central_difference(&e, p, &params);
            let rel = (g - fd).norm() / g.norm();
            assert!(rel < 1e-5, "{} at {p:?}: rel {rel}", preset.name);
            checked += 1;
        }
    }
}

#[test]
fn atom_fish_gradient_at_fixed_point() {
    let e = Expr::parse("(x^2+y^2+z^3-z^2)*((x-y)(x+y)-a)((x+y)(x-y)+a)").unwrap();
    let params = ParamBinding::new().with("a", 0.02);
    let p = Point3::new(0.3, 0.2, 0.1);
    let g = e.gradient(p, &params).unwrap();
    let fd = central_difference(&e, p, &params);
    assert!((g - fd).norm() / g.norm() < 1e-5);
}

/// `log₂ |f(2s·d)| − log₂ |f(s·d)|` for large `s` tends to the total degree.
fn growth_degree(e: &Expr) -> f64 {
    let params = ParamBinding::new().with("a", 0.3).with("b", 0.7);
    let d = Point3::new(0.5377, 0.8622, 0.3188);
    let s = 1e5;
    let f1 = e.evaluate(d * s, &params).unwrap().abs();
    let f2 = e.evaluate(d * (2.0 * s), &params).unwrap().abs();
    (f2 / f1).log2()
}

#[test]
fn degree_oracles() {
    let quadric = Expr::parse("a*x^2+b*y^2+c*z^2+2*d*y*z+2*e*z*x+2*f*x*y+2*g*x+2*h*y+2*i*z+j").unwrap();
    assert_eq!(quadric.degree(), Some(2));
    let cubic = Expr::parse(
        "a*x^3+b*y^3+c*z^3+d*x^2*y+e*x^2*z+f*x*y^2+g*x*z^2+h*y^2*z+i*z^2*y+j*x*y*z+k*x*y+l*y*z+m*x+n*y+o*z+p",
    )
    .unwrap();
    assert_eq!(cubic.degree(), Some(3));

    let poke = surfmotif::motif::preset("poke-planet").unwrap().expr();
    let factor_degrees = [2, 4, 3, 4, 3, 4, 3];
    assert_eq!(factor_degrees.iter().sum::<u32>(), 23);
    assert_eq!(poke.degree(), Some(23));
    assert!((growth_degree(&poke) - 23.0).abs() < 1e-3);

    assert_eq!(Expr::parse("x/y").unwrap().degree(), None);
    assert_eq!(Expr::parse("x/2+y/(a+1)").unwrap().degree(), Some(1));
    assert_eq!(Expr::parse("(x+1)^2-x^2").unwrap().degree(), Some(1));
}

fn random_polynomial(rng: &mut ChaCha8Rng) -> Expr {
    let factors = rng.gen_range(1..=3);
    let mut terms = Vec::new();
    for _ in 0..factors {
        let mut f = Expr::num(rng.gen_range(-3.0..3.0));
        for v in [Var::X, Var::Y, Var::Z] {
            f = f + Expr::num(rng.gen_range(0.5..2.0)) * Expr::var(v).pow(rng.gen_range(0..=3));
        }
        terms.push(f.pow(rng.gen_range(1..=2)));
    }
    product(terms).unwrap()
}

#[test]
fn degree_is_additive_under_product() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..20 {
        let f = random_polynomial(&mut rng);
        let g = random_polynomial(&mut rng);
        let (df, dg) = (f.degree().unwrap(), g.degree().unwrap());
        let fg = product([f.clone(), g.clone()]).unwrap();
        assert_eq!(fg.degree(), Some(df + dg), "{f} · {g}");
        assert!((growth_degree(&fg) - (df + dg) as f64).abs() < 1e-2);
    }
}

#[test]
fn scale_sub_reproduces_scaled_factors() {
    let g = Expr::parse("x^2+y^2+z^2-2*x*y*z-1").unwrap();
    for k in [2.0, 3.0, 5.0] {
        let text = format!("(x/{k})^2+(y/{k})^2+(z/{k})^2-2*x/{k}*y/{k}*z/{k}-1");
        let printed = Expr::parse(&text).unwrap();
        let scaled = scale_sub(&g, k).unwrap();
        let params = ParamBinding::new();
        for p in [Point3::new(0.3, -1.2, 2.0), Point3::new(4.0, 1.0, -2.5)] {
            let (a, b) = (scaled.evaluate(p, &params).unwrap(), printed.evaluate(p, &params).unwrap());
            assert!((a - b).abs() < 1e-12 * b.abs().max(1.0));
        }
    }
    let sphere = scale_sub(&Expr::parse("x^2+y^2+z^2-1").unwrap(), 2.0).unwrap();
    assert_eq!(sphere.evaluate(Point3::new(2.0, 0.0, 0.0), &ParamBinding::new()).unwrap(), 0.0);
    assert!(scale_sub(&sphere, 0.0).is_err());
}

#[test]
fn product_of_figure_factors_matches_caption() {
    let f = Expr::parse("x^2+y^2+z^2+2*x*y*z-1").unwrap();
    let g = Expr::parse("(x-1)^2+(y-1)^2+(z-1)^2+2*(x-1)*(y-1)*(z-1)-2").unwrap();
    let printed = surfmotif::motif::preset("fig8-pair").unwrap().expr();
    assert_eq!(product([f.clone(), g]).unwrap(), printed);
    assert_eq!(product([f.clone()]).unwrap(), f);
    assert!(product([]).is_err());
}

#[test]
fn sos_builds_the_cylinder_cross() {
    let f = Expr::parse("x^2+y^2-1").unwrap();
    let g = Expr::parse("z^2+(y+3-6*b)^2-1").unwrap();
    let sos = intersect_sos(&f, &g, "a", 0.01).unwrap();
    let printed = surfmotif::motif::preset("cylinder-cross").unwrap().expr();
    assert_eq!(sos, printed);
    assert!(intersect_sos(&f, &g, "a", -1.0).is_err());

    let axis = intersect_sos(&Expr::parse("x").unwrap(), &Expr::parse("y").unwrap(), "a", 0.0).unwrap();
    let params = ParamBinding::new().with("a", 1.0);
    assert_eq!(axis.evaluate(Point3::new(0.0, 0.0, 7.0), &params).unwrap(), 0.0);
    assert!(axis.evaluate(Point3::new(0.1, 0.0, 7.0), &params).unwrap() > 0.0);
}
