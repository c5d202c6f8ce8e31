use std::collections::BTreeMap;

use proptest::prelude::*;

use lastmult::lagrangian::{build_lagrangian, hessian, verify_el};
use lastmult::multiplier::{constant_ratio, verify_multiplier};
use lastmult::noether::{conservation_check, energy};
use lastmult::numlab::{drift, rk4};
use lastmult::odemodel::SecondOrderOde;
use lastmult::shell::problem::{problem_from_str, ProblemFile};
use lastmult::symcore::parse::parse_plain;
use lastmult::symcore::{diff, is_zero, is_zero_seeded, simplify, Expr, Symbol};

fn atom() -> impl Strategy<Value = String> {
    prop_oneof![
        Just("t".to_string()),
        Just("x".to_string()),
        Just("xdot".to_string()),
        (-4i64..=4).prop_map(|n| format!("({n})")),
        (1i64..=5, 1i64..=4).prop_map(|(n, d)| format!("({n}/{d})")),
    ]
}

/// Rational expressions in `t, x, xdot` with a few elementary functions.
fn expr_text() -> impl Strategy<Value = String> {
    atom().prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a} + {b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a} - {b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a}*{b})")),
            (inner.clone(), 0u32..=3).prop_map(|(a, k)| format!("({a})^{k}")),
            inner.clone().prop_map(|a| format!("exp({a})")),
            inner.clone().prop_map(|a| format!("sin({a})")),
        ]
    })
}

fn poly_text() -> impl Strategy<Value = String> {
    let term = (-3i64..=3, 0u32..=2, 0u32..=2, 0u32..=2)
        .prop_map(|(c, i, j, k)| format!("({c})*t^{i}*x^{j}*xdot^{k}"));
    prop::collection::vec(term, 1..4).prop_map(|ts| ts.join(" + "))
}

fn ex(s: &str) -> Expr {
    parse_plain(s).unwrap_or_else(|e| panic!("{s}: {e}"))
}

fn zero(e: &Expr) -> bool {
    is_zero(e).is_zero()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, ..ProptestConfig::default() })]

    #[test]
    fn printing_round_trips(s in expr_text()) {
        let e = ex(&s);
        let again = ex(&e.to_string());
        prop_assert!(zero(&(e.clone() - again)), "{s} printed as {e}");
    }

    #[test]
    fn product_rule(a in expr_text(), b in expr_text()) {
        let (a, b) = (ex(&a), ex(&b));
        let x = Symbol::x();
        let lhs = diff(&(a.clone() * b.clone()), &x);
        let rhs = diff(&a, &x) * b.clone() + a * diff(&b, &x);
        prop_assert!(zero(&(lhs - rhs)));
    }

    #[test]
    fn common_factors_cancel(p in poly_text(), q in poly_text(), r in poly_text()) {
        let (p, q, r) = (ex(&p), ex(&q), ex(&r));
        prop_assume!(!zero(&q) && !zero(&r));
        let lhs = p.clone() * r.clone() / (q.clone() * r);
        prop_assert!(zero(&(simplify(&lhs) - p / q)));
    }

    #[test]
    fn identities_hold_for_every_seed(seed in any::<u64>(), a in poly_text(), b in poly_text()) {
        let (a, b) = (ex(&a), ex(&b));
        let sq = Expr::powi(a.clone() + b.clone(), 2) - Expr::powi(a.clone(), 2)
            - Expr::int(2) * a.clone() * b.clone() - Expr::powi(b, 2);
        prop_assert!(is_zero_seeded(&sq, seed).is_zero());
    }

    /// Damped oscillators: `exp(2 g t)` is a multiplier, any constant
    /// multiple of it is too, and the Lagrangian built from it reproduces it.
    #[test]
    fn damped_oscillator_pipeline(g in 1i64..=4, w in 1i64..=4, c in 1i64..=7) {
        let f = format!("-2*({g})*xdot - ({w})*x");
        let ode = SecondOrderOde::parse("damped", &[], &f).unwrap();
        let m = ex(&format!("exp(2*({g})*t)"));
        prop_assert!(verify_multiplier(&m, &ode).is_zero());
        let scaled = Expr::int(c) * m.clone();
        prop_assert!(verify_multiplier(&scaled, &ode).is_zero());
        prop_assert!(constant_ratio(&scaled, &m));
        let l = build_lagrangian(&m, &ode, None).unwrap();
        prop_assert!(zero(&(hessian(&l.l) - m)));
        let el = verify_el(&l.l, &ode);
        prop_assert!(el.verdict.is_zero() && el.factorization.is_zero());
    }

    /// For `L = xdot^2/2 - V(x)` the energy is conserved.
    #[test]
    fn autonomous_energy_is_conserved(v in poly_text()) {
        let pot = ex(&v).subst1(&Symbol::t(), &Expr::one()).subst1(&Symbol::v(), &Expr::zero());
        let l = Expr::powi(Expr::v(), 2) / Expr::int(2) - pot.clone();
        let ode = SecondOrderOde::new("potential", &[], simplify(&-diff(&pot, &Symbol::x())));
        prop_assert!(verify_el(&l, &ode).verdict.is_zero());
        prop_assert!(conservation_check(&energy(&l), &ode).is_zero());
    }

    #[test]
    fn free_motion_is_exact(x0 in -5.0f64..5.0, v0 in -5.0f64..5.0, n in 1usize..50) {
        let ode = SecondOrderOde::parse("free", &[], "0").unwrap();
        let tr = rk4(&ode, &BTreeMap::new(), [0.0, x0, v0], 1.0, 1.0 / n as f64).unwrap();
        let [t, x, v] = tr.last();
        prop_assert!((t - 1.0).abs() < 1e-12);
        prop_assert!((x - (x0 + v0)).abs() < 1e-12 * (1.0 + x0.abs() + v0.abs()));
        prop_assert_eq!(v, v0);
        prop_assert_eq!(drift(&Expr::v(), &tr).unwrap(), 0.0);
    }

    #[test]
    fn problem_files_round_trip(g in 1i64..=9, name in "[a-z]{1,8}", h in 1u32..100) {
        let text = format!(
            r#"{{"schema":1,"name":"{name}","parameters":[{{"name":"k","value":{g}}}],
                "ode":{{"F":"-k*x"}},"expected":{{"integrals":["xdot^2 + k*x^2"]}},
                "numeric":{{"params":{{}},"ic":[0,1,0],"t_end":1,"h":{}}}}}"#,
            f64::from(h) / 1000.0
        );
        let p = problem_from_str(&text).unwrap();
        let json = serde_json::to_string(&p.file).unwrap();
        let back: ProblemFile = serde_json::from_str(&json).unwrap();
        prop_assert_eq!(&back, &p.file);
        prop_assert_eq!(problem_from_str(&json).unwrap(), p);
    }
}
