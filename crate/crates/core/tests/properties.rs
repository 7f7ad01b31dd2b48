use contact_ma::bends::{self, HomPoly};
use contact_ma::contact::{contact_form_value, ContactChart, DarbouxPoint};
use contact_ma::expr::{Expr, DARBOUX_VARS, PLANE_VARS};
use contact_ma::monge_ampere::{partial_legendre_coefficients, Coefficients};
use contact_ma::output::format_float;
use contact_ma::rmanifold::{self, RManifoldSpec};
use contact_ma::symplectic::{self, ClassifyOptions, OperatorType};
use contact_ma::zeta::{ZetaKind, ZetaNum};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn coeffs() -> impl Strategy<Value = [f64; 5]> {
    prop::array::uniform5(-10.0..10.0f64)
}

fn point5() -> impl Strategy<Value = [f64; 5]> {
    prop::array::uniform5(-1.0..1.0f64)
}

fn kind() -> impl Strategy<Value = ZetaKind> {
    prop::sample::select(ZetaKind::ALL.to_vec())
}

fn nondegenerate_kind() -> impl Strategy<Value = ZetaKind> {
    prop::sample::select(vec![ZetaKind::Minus, ZetaKind::Plus])
}

/// Polynomial in the five Darboux coordinates, degree at most 3.
fn polynomial() -> impl Strategy<Value = String> {
    let term = (-2.0..2.0f64, prop::collection::vec(0..5usize, 0..=3)).prop_map(|(c, vars)| {
        let mut t = format!("({c})");
        for v in vars {
            t.push('*');
            t.push_str(DARBOUX_VARS[v]);
        }
        t
    });
    prop::collection::vec(term, 1..6).prop_map(|ts| ts.join(" + "))
}

/// Expressions in x1, x2 drawn from the whole grammar.
fn expression() -> impl Strategy<Value = String> {
    let leaf = prop_oneof![
        Just("x1".to_string()),
        Just("x2".to_string()),
        (0.0..5.0f64).prop_map(|c| format!("{c:.3}")),
    ];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone(), prop::sample::select(vec!["+", "-", "*"]))
                .prop_map(|(a, b, op)| format!("({a}){op}({b})")),
            (inner.clone(), 0..4u32).prop_map(|(a, n)| format!("({a})^{n}")),
            (inner.clone(), prop::sample::select(vec!["sin", "cos", "exp"]))
                .prop_map(|(a, f)| format!("{f}({a})")),
            inner.prop_map(|a| format!("-({a})")),
        ]
    })
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn frak_a_squares_to_discriminant(c in coeffs()) {
        let co = Coefficients::from_array(c);
        let m = co.frak_a();
        let dev = (&m * &m - DMatrix::identity(4, 4) * co.discriminant()).amax();
        prop_assert!(dev <= 1e-12 * (1.0 + m.norm_squared()));
    }

    #[test]
    fn frak_a_round_trips_through_coefficients(c in coeffs()) {
        let co = Coefficients::from_array(c);
        let (back, shape) = Coefficients::from_frak_a(&co.frak_a());
        prop_assert!(shape <= 1e-12);
        for (x, y) in back.to_array().iter().zip(c) {
            prop_assert!(close(*x, y, 1e-12));
        }
    }

    #[test]
    fn partial_legendre_keeps_shape_and_discriminant(c in coeffs()) {
        let co = Coefficients::from_array(c);
        let (image, shape) = partial_legendre_coefficients(&co);
        prop_assert!(shape <= 1e-12);
        prop_assert!(close(image.discriminant(), co.discriminant(), 1e-12));
    }

    #[test]
    fn jordan_product_is_self_adjoint(seed in any::<u64>()) {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let sp = symplectic::standard_space(2);
        let a = symplectic::random_self_adjoint(&mut r, 2, false);
        let b = symplectic::random_self_adjoint(&mut r, 2, false);
        let j = symplectic::jordan_product(&a, &b).unwrap();
        let scale = 1.0 + a.matrix().norm() * b.matrix().norm();
        prop_assert!(symplectic::self_adjoint_defect(&sp, &j).unwrap() <= 1e-9 * scale);
    }

    #[test]
    fn cyclic_subspaces_are_isotropic(seed in any::<u64>(), v in prop::array::uniform4(-1.0..1.0f64)) {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let sp = symplectic::standard_space(2);
        let a = symplectic::random_self_adjoint(&mut r, 2, seed % 3 == 0);
        let v = DVector::from_column_slice(&v);
        prop_assume!(v.norm() > 1e-3);
        let cyc = symplectic::cyclic_subspace(&sp, &a, &v).unwrap();
        prop_assert!(cyc.ncols() <= 2);
        prop_assert!(sp.pairing(&cyc, &cyc).amax() <= 1e-9);
    }

    #[test]
    fn class_is_affine_invariant(seed in any::<u64>(), s in 0.2..5.0f64, neg in any::<bool>(), t in -3.0..3.0f64) {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let sp = symplectic::standard_space(2);
        let a = symplectic::random_self_adjoint(&mut r, 2, false);
        let opts = ClassifyOptions::default();
        let before = symplectic::classify_dim4(&sp, &a, opts);
        prop_assume!(before.is_ok());
        let before = before.unwrap();
        prop_assume!(before.kind != OperatorType::Parabolic);
        let s = if neg { -s } else { s };
        let moved = symplectic::Operator::new(a.matrix() * s + DMatrix::identity(4, 4) * t);
        let after = symplectic::classify_dim4(&sp, &moved, opts).unwrap();
        prop_assert_eq!(before.kind, after.kind);
    }

    #[test]
    fn expressions_print_and_reparse(text in expression(), x in -1.0..1.0f64, y in -1.0..1.0f64) {
        let e = Expr::parse(&text, &PLANE_VARS).unwrap();
        let printed = e.to_string();
        let again = Expr::parse(&printed, &PLANE_VARS).unwrap();
        prop_assert_eq!(&printed, &again.to_string());
        if let (Ok(a), Ok(b)) = (e.eval(&[x, y]), again.eval(&[x, y])) {
            if a.is_finite() {
                prop_assert!(close(a, b, 1e-12), "{} vs {}", a, b);
            }
        }
    }

    #[test]
    fn jets_obey_the_product_rule(f in polynomial(), g in polynomial(), p in point5()) {
        let fe = Expr::parse(&f, &DARBOUX_VARS).unwrap();
        let ge = Expr::parse(&g, &DARBOUX_VARS).unwrap();
        let fg = Expr::parse(&format!("({f})*({g})"), &DARBOUX_VARS).unwrap();
        let (jf, jg, jfg) = (fe.eval_jet(&p, 2).unwrap(), ge.eval_jet(&p, 2).unwrap(), fg.eval_jet(&p, 2).unwrap());
        for i in 0..5 {
            let want = jf.d(i) * jg.value() + jf.value() * jg.d(i);
            prop_assert!(close(jfg.d(i), want, 1e-10));
            for j in 0..5 {
                let want = jf.d2(i, j) * jg.value() + jf.d(i) * jg.d(j) + jf.d(j) * jg.d(i) + jf.value() * jg.d2(i, j);
                prop_assert!(close(jfg.d2(i, j), want, 1e-10));
            }
        }
    }

    #[test]
    fn zeta_numbers_form_a_commutative_algebra(k in kind(), a in prop::array::uniform6(-2.0..2.0f64), n in 0..5u32, m in 0..5u32) {
        let x = ZetaNum::new(a[0], a[1], k);
        let y = ZetaNum::new(a[2], a[3], k);
        let z = ZetaNum::new(a[4], a[5], k);
        let (xy, yx) = (x.mul(&y).unwrap(), y.mul(&x).unwrap());
        prop_assert!(close(xy.re, yx.re, 1e-14) && close(xy.im, yx.im, 1e-14));
        let (l, r) = (xy.mul(&z).unwrap(), x.mul(&y.mul(&z).unwrap()).unwrap());
        prop_assert!(close(l.re, r.re, 1e-12) && close(l.im, r.im, 1e-12));
        let (p, q) = (x.pow(n + m), x.pow(n).mul(&x.pow(m)).unwrap());
        prop_assert!(close(p.re, q.re, 1e-10) && close(p.im, q.im, 1e-10));
    }

    #[test]
    fn quadratic_pairs_are_bends(a in prop::array::uniform3(-1.0..1.0f64), b in prop::array::uniform3(-1.0..1.0f64)) {
        let (q1, q2) = (HomPoly::new(a.to_vec()), HomPoly::new(b.to_vec()));
        let cross = [a[0] * b[1] - a[1] * b[0], a[0] * b[2] - a[2] * b[0], a[1] * b[2] - a[2] * b[1]];
        prop_assume!(cross.iter().any(|c| c.abs() > 1e-3));
        let check = bends::is_bend(2, &q1, &q2).unwrap();
        prop_assert!(check.is_bend);
        let b = bends::analyze(2, &q1, &q2, 1e-9).unwrap();
        if let (Some([f, _]), Some(m)) = (&b.witness, &b.matrix) {
            prop_assert!(bends::compatibility_residual(f, m.to_array()) <= 1e-9);
        }
    }

    #[test]
    fn bend_kind_ignores_the_choice_of_basis(k in kind(), deg in 2..6usize, m in prop::array::uniform4(-2.0..2.0f64)) {
        prop_assume!((m[0] * m[3] - m[1] * m[2]).abs() > 0.1);
        let nf = bends::normal_form(deg, k).unwrap();
        let [f, g] = &nf.span;
        let q1 = f.scale(m[0]).add(&g.scale(m[1]));
        let q2 = f.scale(m[2]).add(&g.scale(m[3]));
        let b = bends::analyze(deg, &q1, &q2, 1e-8).unwrap();
        prop_assert_eq!(b.kind, Some(k));
        prop_assert!(b.distance(&nf) <= 1e-9);
    }

    #[test]
    fn prolonged_normal_forms_are_normal_forms(k in kind(), deg in 2..6usize) {
        let p = bends::prolong_bend(&bends::normal_form(deg, k).unwrap(), 1e-9).unwrap();
        prop_assert!(p.distance(&bends::normal_form(deg + 1, k).unwrap()) <= 1e-9);
    }

    #[test]
    fn contact_fields_recover_their_generating_function(nu in polynomial(), p in point5()) {
        let nu = Expr::parse(&nu, &DARBOUX_VARS).unwrap();
        let pt = DarbouxPoint::from_array(p);
        let x = ContactChart.contact_field(&nu, &pt).unwrap();
        prop_assert!(close(contact_form_value(&pt, &x), nu.eval(&p).unwrap(), 1e-12));
        prop_assert!(ContactChart.contact_field_defect(&nu, &pt).unwrap() <= 1e-9);
    }

    #[test]
    fn bracket_is_antisymmetric(mu in polynomial(), nu in polynomial(), p in point5()) {
        let mu = Expr::parse(&mu, &DARBOUX_VARS).unwrap();
        let nu = Expr::parse(&nu, &DARBOUX_VARS).unwrap();
        let pt = DarbouxPoint::from_array(p);
        let ab = ContactChart.lagrange_bracket(&mu, &nu, &pt).unwrap();
        let ba = ContactChart.lagrange_bracket(&nu, &mu, &pt).unwrap();
        prop_assert!((ab + ba).abs() <= 1e-10 * (1.0 + ab.abs()));
    }

    #[test]
    fn lkl_points_satisfy_the_prolonged_system(
        k in kind_order(), l in 2..5u32, z in nondegenerate_kind(), a in -1.0..1.0f64, b in -1.0..1.0f64,
    ) {
        let spec = RManifoldSpec::new(k, l, z).unwrap();
        let pt = rmanifold::lkl_point(&spec, (a, b)).unwrap();
        let worst = rmanifold::prolonged_residuals(&pt, z).iter().fold(0.0f64, |m, r| m.max(r.abs()));
        prop_assert!(worst <= 1e-9);
    }

    #[test]
    fn floats_print_losslessly(v in any::<f64>().prop_filter("finite", |v| v.is_finite())) {
        let s = format_float(v);
        let back: f64 = s.parse().unwrap();
        prop_assert_eq!(back.to_bits(), v.to_bits());
    }
}

fn kind_order() -> impl Strategy<Value = usize> {
    2..6usize
}
