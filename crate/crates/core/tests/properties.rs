use std::sync::Arc;

use mechfluid::constraints::{relativistic_correction, time_constrain};
use mechfluid::dynamics::{
    alpha_dot, force_at, kinetic_energy, lorentz_force, newton_field, reconstruct_force,
    ExactForce, ForceForm, State,
};
use mechfluid::expr::{parse_expr, BinOp, Bindings, Chart, Expr, Func, Var};
use mechfluid::geometry::{
    builtin, christoffel_with, flat, sharp, DiffMode, ExprMetric, ExprScalar, MetricField,
};
use mechfluid::sampling::sample_box;
use mechfluid::scenario::{run_scenario, RunOptions, Scenario};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

fn var() -> impl Strategy<Value = Var> {
    prop_oneof![Just(Var::T), (1u32..5).prop_map(Var::X)]
}

fn func() -> impl Strategy<Value = Func> {
    prop::sample::select(Func::ALL.to_vec())
}

fn op() -> impl Strategy<Value = BinOp> {
    prop::sample::select(vec![BinOp::Add, BinOp::Sub, BinOp::Mul, BinOp::Div, BinOp::Pow])
}

fn literal() -> impl Strategy<Value = f64> {
    prop_oneof![
        (-20i32..20).prop_map(f64::from),
        -1e6f64..1e6,
        (-300i32..300).prop_map(|e| 1.5 * 10f64.powi(e)),
    ]
}

fn any_expr() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![literal().prop_map(Expr::Num), var().prop_map(Expr::Var)];
    leaf.prop_recursive(6, 48, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(|e| Expr::Neg(Box::new(e))),
            (op(), inner.clone(), inner.clone())
                .prop_map(|(o, a, b)| Expr::Bin(o, Box::new(a), Box::new(b))),
            (func(), inner).prop_map(|(f, a)| Expr::Call(f, Box::new(a))),
        ]
    })
}

/// Expressions that stay finite and moderate on `[-1, 1]^n`.
fn smooth_expr(dim: u32) -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        (-3i32..4).prop_map(|c| Expr::Num(f64::from(c) / 2.0)),
        (1..=dim).prop_map(|i| Expr::Var(Var::X(i))),
    ];
    leaf.prop_recursive(4, 24, 2, |inner| {
        let one_plus_sq = |u: Expr| Expr::Bin(BinOp::Add, Box::new(Expr::Num(1.0)), Box::new(Expr::Bin(BinOp::Pow, Box::new(u), Box::new(Expr::Num(2.0)))));
        prop_oneof![
            (prop::sample::select(vec![BinOp::Add, BinOp::Sub, BinOp::Mul]), inner.clone(), inner.clone())
                .prop_map(|(o, a, b)| Expr::Bin(o, Box::new(a), Box::new(b))),
            (prop::sample::select(vec![Func::Sin, Func::Cos, Func::Tanh]), inner.clone())
                .prop_map(|(f, a)| Expr::Call(f, Box::new(a))),
            inner.clone().prop_map(|u| Expr::Call(Func::Exp, Box::new(Expr::Call(Func::Tanh, Box::new(u))))),
            inner.clone().prop_map(move |u| Expr::Call(Func::Ln, Box::new(one_plus_sq(u)))),
            inner.clone().prop_map(move |u| Expr::Call(Func::Sqrt, Box::new(one_plus_sq(u)))),
            inner.prop_map(move |u| Expr::Bin(BinOp::Div, Box::new(u.clone()), Box::new(one_plus_sq(u)))),
        ]
    })
}

fn unit_point(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..1.0, n)
}

fn curved2() -> Arc<dyn MetricField> {
    Arc::new(builtin("curved", 2).unwrap().metric)
}

fn minkowski2() -> Arc<dyn MetricField> {
    Arc::new(builtin("minkowski", 2).unwrap().metric)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn print_then_parse_is_identity(e in any_expr()) {
        let printed = e.to_string();
        let back = parse_expr(&printed).map_err(|err| TestCaseError::fail(format!("{printed}: {err}")))?;
        prop_assert_eq!(back, e, "printed as {}", printed);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2_000))]

    #[test]
    fn symbolic_derivative_matches_finite_differences(e in smooth_expr(3), x in unit_point(3), k in 0usize..3) {
        let d = e.differentiate(Var::X(k as u32 + 1));
        let eval = |e: &Expr, x: &[f64]| e.eval(&Bindings::spatial(x)).unwrap();
        let symbolic = eval(&d, &x);
        // fourth-order central difference
        let h = 1e-3;
        let at = |s: f64| {
            let mut y = x.clone();
            y[k] += s;
            eval(&e, &y)
        };
        let fd = (8.0 * (at(h) - at(-h)) - (at(2.0 * h) - at(-2.0 * h))) / (12.0 * h);
        prop_assert!(
            (symbolic - fd).abs() <= 1e-6 * symbolic.abs().max(1.0),
            "d/dx{} {} = {} vs {}", k + 1, e, symbolic, fd
        );
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn christoffel_symbols_are_symmetric_and_match_fd(a in -0.5f64..0.5, b in -0.5f64..0.5, x in unit_point(2)) {
        let src = [
            vec![format!("2 + {a}*sin(x1*x2)"), format!("{b}*x1")],
            vec![format!("{b}*x1"), "1 + x1^2 + x2^2".to_string()],
        ];
        let rows: Vec<Vec<&str>> = src.iter().map(|r| r.iter().map(String::as_str).collect()).collect();
        let m = ExprMetric::parse(Chart::spatial(2), &rows).unwrap();
        let auto = christoffel_with(&m, &x, DiffMode::Auto).unwrap();
        let fd = christoffel_with(&m, &x, DiffMode::FiniteDifference).unwrap();
        prop_assert!(auto.symmetry_defect() == 0.0);
        prop_assert!(auto.max_abs_diff(&fd) < 1e-6);
    }

    #[test]
    fn flat_and_sharp_are_inverse(x in unit_point(2), w in unit_point(2)) {
        for metric in [curved2(), minkowski2()] {
            let w = DVector::from_vec(w.clone());
            let back = flat(metric.as_ref(), &x, &sharp(metric.as_ref(), &x, &w).unwrap()).unwrap();
            prop_assert!((back - &w).amax() < 1e-13);
        }
    }

    #[test]
    fn lorentz_force_does_no_work(f in -3.0f64..3.0, x in unit_point(2), v in unit_point(2)) {
        let force = lorentz_force(2, move |p| Ok(DMatrix::from_row_slice(2, 2, &[0.0, f + p[0], -f - p[0], 0.0])));
        let s = State::new(x, v).unwrap();
        prop_assert!(alpha_dot(&force, &s).unwrap().abs() < 1e-14);
    }

    #[test]
    fn newton_correspondence_round_trips(c in -2.0f64..2.0, x in unit_point(2), v in unit_point(2)) {
        let phi = Arc::new(ExprScalar::parse(Chart::spatial(2), &format!("{c}*x1*x2 + sin(x1)")).unwrap());
        let forces: Vec<Arc<dyn ForceForm>> = vec![
            Arc::new(ExactForce::new(phi)),
            Arc::new(lorentz_force(2, move |p| Ok(DMatrix::from_row_slice(2, 2, &[0.0, c * p[1], -c * p[1], 0.0])))),
        ];
        let s = State::new(x, v).unwrap();
        for force in forces {
            let field = newton_field(curved2(), force.clone()).unwrap();
            let back = reconstruct_force(curved2().as_ref(), &field, &s).unwrap();
            prop_assert!((back - force_at(force.as_ref(), &s).unwrap()).amax() < 1e-12);
        }
    }

    #[test]
    fn relativistic_correction_conserves_kinetic_energy(c in -2.0f64..2.0, x in unit_point(2), v in prop::collection::vec(-2.0f64..2.0, 2)) {
        let s = State::new(x, v).unwrap();
        let metric = minkowski2();
        prop_assume!((2.0 * kinetic_energy(metric.as_ref(), &s).unwrap()).abs() > 0.05);
        let phi = Arc::new(ExprScalar::parse(Chart::spacetime(1), &format!("{c}*t*x1 + x1^2")).unwrap());
        let sys = relativistic_correction(metric, Arc::new(ExactForce::new(phi))).unwrap();
        prop_assert!(alpha_dot(sys.modified_force().as_ref(), &s).unwrap().abs() < 1e-12);
    }

    #[test]
    fn time_constraint_freezes_time_rate(c in -2.0f64..2.0, x in unit_point(3), v in unit_point(3)) {
        let metric: Arc<dyn MetricField> = Arc::new(builtin("static", 3).unwrap().metric);
        let phi = Arc::new(ExprScalar::parse(Chart::spacetime(2), &format!("{c}*t^2 + x1*x2*t")).unwrap());
        let sys = time_constrain(metric, Arc::new(ExactForce::new(phi)), 0).unwrap();
        let accel = mechfluid::dynamics::SecondOrderField::accel(&sys.newton_field(), &State::new(x, v).unwrap()).unwrap();
        prop_assert!(accel[0].abs() < 1e-13);
    }

    #[test]
    fn samples_stay_in_box(seed in any::<u64>(), lo in -5.0f64..0.0, width in 0.0f64..3.0) {
        let pts = sample_box(&[lo, lo], &[lo + width, lo + 2.0 * width], 64, seed).unwrap();
        prop_assert_eq!(pts.len(), 64);
        for p in &pts {
            prop_assert!(p[0] >= lo && p[0] <= lo + width);
            prop_assert!(p[1] >= lo && p[1] <= lo + 2.0 * width);
        }
        prop_assert_eq!(pts, sample_box(&[lo, lo], &[lo + width, lo + 2.0 * width], 64, seed).unwrap());
    }
}

const SMALL: &str = r#"
name = "small"
[metric]
builtin = "sphere"
dim = 2
[sample]
count = 16
[[check]]
name = "compat-fd"
kind = "metric-compatibility"
mode = "fd"
tolerance = 1
[[check]]
name = "christoffel"
kind = "christoffel-symmetry"
tolerance = 1
"#;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn pass_iff_max_within_tolerance(exp in -14i32..-4, seed in any::<u64>()) {
        let scenario = Scenario::from_toml(SMALL).unwrap();
        let tol = 10f64.powi(exp);
        let report = run_scenario(&scenario, &RunOptions { seed: Some(seed), tolerance: Some(tol), threads: None }).unwrap();
        for c in &report.checks {
            prop_assert_eq!(c.passed, c.max_norm.unwrap() <= tol);
        }
        prop_assert_eq!(report.passed, report.checks.iter().all(|c| c.passed));
    }
}
