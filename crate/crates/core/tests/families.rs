use std::collections::BTreeMap;

use proptest::prelude::*;

use eidforge_core::eid::{commutation_residual, first_integral};
use eidforge_core::expr::{differentiate, eval_numeric, normalize, normalized_eq, parse_prefix, Expr, Symbol};
use eidforge_core::families::{FamilyKind, FamilySpec};
use eidforge_core::generate::{
    generate, loop_solution, problem_from_record, to_record, verify_options, verify_problem, Format, GenerateRequest,
    OutputForm,
};
use eidforge_core::verify::residual;

fn value(e: &Expr, x: f64, binds: &[(&str, f64)]) -> f64 {
    let mut point: BTreeMap<Symbol, f64> = binds.iter().map(|(k, v)| (Symbol::new(k), *v)).collect();
    point.insert(Symbol::new("x"), x);
    eval_numeric(e, &point, 106).unwrap().value
}

fn kind() -> impl Strategy<Value = FamilyKind> {
    prop::sample::select(FamilyKind::ALL.to_vec())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn generated_solutions_satisfy_their_equation(
        kind in kind(),
        n in 0u32..=3,
        a in 1i64..=15,
        b in -10i64..=10,
        l in 5i64..=80,
    ) {
        prop_assume!(l % 10 != 0);
        let spec = FamilySpec::new(kind, n)
            .with_ab(Expr::frac(a, 10), Expr::frac(b, 10))
            .with_l(Expr::frac(l, 10));
        let problem = generate(&GenerateRequest::new(spec.clone())).unwrap();
        let report = verify_problem(&problem, &verify_options(&spec)).unwrap();
        prop_assert!(report.passed, "{}", report.max_residual);
    }

    #[test]
    fn commutation_holds_for_general_beta(c in 1i64..=5, k in 1i64..=4, x in 0.3f64..1.3) {
        let alpha = parse_prefix("(* -1 (tanh x))").unwrap();
        let beta = parse_prefix(&format!("(+ (* {c}/3 x) 1)")).unwrap();
        let x_ = Symbol::new("x");
        let kk = Expr::int(3);
        let a0 = normalize(
            &((kk.clone() - alpha.clone() * alpha.clone()
                + alpha.clone() * differentiate(&beta, &x_).unwrap()
                - beta.clone() * differentiate(&alpha, &x_).unwrap())
                * beta.clone().powi(-2)),
        );
        prop_assert!(normalized_eq(&first_integral(&alpha, &beta, &a0).unwrap(), &kk));
        let f = parse_prefix(&format!("(sin (* {k} x))")).unwrap();
        let (r1, r2) = commutation_residual(&alpha, &beta, &a0, &kk, &f).unwrap();
        prop_assert!(value(&r1, x, &[]).abs() < 1e-9);
        prop_assert!(value(&r2, x, &[]).abs() < 1e-9);
    }
}

#[test]
fn chain_and_expanded_forms_agree() {
    for kind in FamilyKind::ALL {
        let spec = FamilySpec::new(kind, 2).with_ab(Expr::frac(3, 5), Expr::frac(1, 2));
        let expanded = generate(&GenerateRequest::new(spec.clone())).unwrap();
        let mut req = GenerateRequest::new(spec.clone());
        req.output_form = OutputForm::Chain;
        let chained = generate(&req).unwrap();
        let looped = loop_solution(&spec).unwrap();
        let b = [("l", 2.3), ("c1", 0.9), ("c2", -0.6)];
        for x in [0.4, 0.9, 1.2] {
            let u = value(&expanded.solution, x, &b);
            for other in [&chained.solution, &looped] {
                let v = value(other, x, &b);
                assert!((u - v).abs() < 1e-9 * u.abs().max(1.0), "{kind}: {u} vs {v}");
            }
        }
    }
}

#[test]
fn records_reload_to_the_same_problem() {
    let spec = FamilySpec::new(FamilyKind::Trigonometric, 1).with_ab(Expr::zero(), Expr::one());
    let problem = generate(&GenerateRequest::new(spec.clone())).unwrap();
    let (ode, y) = problem_from_record(&to_record(&spec, &problem)).unwrap();
    let report = residual(&ode, &y, &verify_options(&spec)).unwrap();
    assert!(report.passed);
}

#[test]
fn formats_parse_from_their_names() {
    for (name, f) in [("text", Format::Text), ("latex", Format::Latex), ("json", Format::Json)] {
        assert_eq!(name.parse::<Format>().unwrap(), f);
    }
    assert!("yaml".parse::<Format>().is_err());
    for kind in FamilyKind::ALL {
        assert_eq!(kind.name().parse::<FamilyKind>().unwrap(), kind);
        assert_eq!(kind.token().parse::<FamilyKind>().unwrap(), kind);
    }
}
