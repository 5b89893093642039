use jetmech::diff::{fd_gradient_oracle, grad, relative_gap};
use jetmech::expr::{parse_expression, BinOp, Expr, Func};
use jetmech::geometry::{canonical_lift, PhasePoint, TimeComponent, VectorFieldQ};
use jetmech::hamiltonian::{jacobi_residual, poisson_bracket_v};
use jetmech::{par, Frame, ScalarField};
use proptest::prelude::*;

fn arb_expr() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        (0u32..2000).prop_map(|k| Expr::Const(k as f64 / 8.0)),
        (1e-6f64..1e6).prop_map(Expr::Const),
        prop::sample::select(vec!["t", "q1", "q2", "p1", "x_2", "alpha"]).prop_map(Expr::var),
    ];
    leaf.prop_recursive(5, 48, 3, |inner| {
        prop_oneof![
            inner.clone().prop_map(|e| Expr::Neg(Box::new(e))),
            (
                prop::sample::select(vec![BinOp::Add, BinOp::Sub, BinOp::Mul, BinOp::Div, BinOp::Pow]),
                inner.clone(),
                inner.clone()
            )
                .prop_map(|(op, l, r)| Expr::binary(op, l, r)),
            (prop::sample::select(Func::ALL.to_vec()), inner.clone(), inner)
                .prop_map(|(f, a, b)| {
                    if f.arity() == 2 {
                        Expr::Call(f, vec![a, b])
                    } else {
                        Expr::Call(f, vec![a])
                    }
                }),
        ]
    })
}

/// Smooth fields on the planar phase space with random coefficients.
fn smooth_field(c: &[f64]) -> String {
    format!(
        "{} * q1^2 * p2 + {} * sin(q2 * p1) + {} * exp(0.3 * t * q1) + {} * cos(p1 - q2) / (2 + q1^2) + {} * q2 * p2^3",
        c[0], c[1], c[2], c[3], c[4]
    )
}

fn field(text: &str) -> ScalarField {
    ScalarField::expr(text, &Frame::phase(2)).unwrap()
}

fn arb_coeffs() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-2.0f64..2.0, 5)
}

fn arb_point() -> impl Strategy<Value = PhasePoint> {
    (0.0f64..1.0, prop::collection::vec(-1.5f64..1.5, 2), prop::collection::vec(-1.5f64..1.5, 2))
        .prop_map(|(t, q, p)| PhasePoint { t, q, p })
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn printed_expressions_parse_back(e in arb_expr()) {
        let text = e.to_string();
        let back = parse_expression(&text).unwrap();
        prop_assert_eq!(back, e, "printed as {}", text);
    }

    #[test]
    fn ad_gradient_matches_central_differences(c in arb_coeffs(), at in arb_point()) {
        let f = field(&smooth_field(&c));
        let x = at.coords();
        let ad = grad(&f, &x).unwrap();
        let fd = fd_gradient_oracle(&f, &x, 1e-6).unwrap();
        prop_assert!(relative_gap(&ad, &fd) <= 1e-6, "ad {:?} fd {:?}", ad, fd);
    }

    #[test]
    fn bracket_is_antisymmetric_and_bilinear(
        a in arb_coeffs(), b in arb_coeffs(), c in arb_coeffs(),
        s in -3.0f64..3.0, u in -3.0f64..3.0, at in arb_point(),
    ) {
        let (fa, fb, fc) = (smooth_field(&a), smooth_field(&b), smooth_field(&c));
        let (f, g, h) = (field(&fa), field(&fb), field(&fc));
        let fg = poisson_bracket_v(&f, &g, &at).unwrap();
        let gf = poisson_bracket_v(&g, &f, &at).unwrap();
        prop_assert!((fg + gf).abs() <= 1e-10 * (1.0 + fg.abs()));

        let combo = field(&format!("{s} * ({fb}) + {u} * ({fc})"));
        let lhs = poisson_bracket_v(&f, &combo, &at).unwrap();
        let rhs = s * fg + u * poisson_bracket_v(&f, &h, &at).unwrap();
        prop_assert!(close(lhs, rhs, 1e-10), "{} vs {}", lhs, rhs);
    }

    #[test]
    fn bracket_obeys_leibniz(a in arb_coeffs(), b in arb_coeffs(), c in arb_coeffs(), at in arb_point()) {
        let (fa, fb, fc) = (smooth_field(&a), smooth_field(&b), smooth_field(&c));
        let (f, g, h) = (field(&fa), field(&fb), field(&fc));
        let gh = field(&format!("({fb}) * ({fc})"));
        let x = at.coords();
        let lhs = poisson_bracket_v(&f, &gh, &at).unwrap();
        let rhs = poisson_bracket_v(&f, &g, &at).unwrap() * h.eval_f64(&x).unwrap()
            + g.eval_f64(&x).unwrap() * poisson_bracket_v(&f, &h, &at).unwrap();
        prop_assert!(close(lhs, rhs, 1e-10), "{} vs {}", lhs, rhs);
    }

    #[test]
    fn bracket_obeys_jacobi(a in arb_coeffs(), b in arb_coeffs(), c in arb_coeffs(), at in arb_point()) {
        let (f, g, h) = (field(&smooth_field(&a)), field(&smooth_field(&b)), field(&smooth_field(&c)));
        let r = jacobi_residual(&f, &g, &h, &at).unwrap();
        prop_assert!(r.abs() <= 1e-8, "jacobi residual {}", r);
    }

    #[test]
    fn canonical_lift_is_linear_in_momenta(
        c in prop::collection::vec(-2.0f64..2.0, 3), at in arb_point(), s in -3.0f64..3.0,
    ) {
        let u1 = format!("{} * q2 + sin(t * q1) * {}", c[0], c[1]);
        let u2 = format!("{} * q1^2 - q2", c[2]);
        let v = VectorFieldQ::parse(TimeComponent::One, &[&u1, &u2]).unwrap();
        let base = canonical_lift(&v, &at).unwrap();
        let scaled_at = PhasePoint { p: at.p.iter().map(|p| s * p).collect(), ..at.clone() };
        let scaled = canonical_lift(&v, &scaled_at).unwrap();
        prop_assert_eq!(base.ut, scaled.ut);
        prop_assert_eq!(&base.up, &scaled.up);
        for (d0, d1) in base.down.iter().zip(&scaled.down) {
            prop_assert!((s * d0 - d1).abs() <= 1e-12 * (1.0 + d1.abs()));
        }
    }

    #[test]
    fn parallel_map_matches_sequential(xs in prop::collection::vec(-10.0f64..10.0, 0..300)) {
        let f = |x: &f64| (x * 1.7).sin() * x.exp();
        prop_assert_eq!(par::map(&xs, f), par::map_sequential(&xs, f));
    }
}
