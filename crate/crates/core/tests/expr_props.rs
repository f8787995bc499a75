use basin_cert::expr::{parse, BinOp, Constant, Expr, Func, Var};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const N: usize = 3;

fn leaf() -> impl Strategy<Value = Expr> {
    prop_oneof![
        (0.0..100.0f64).prop_map(Expr::Num),
        (0u32..20).prop_map(|k| Expr::Num(k as f64 * 0.25)),
        Just(Expr::Const(Constant::Pi)),
        Just(Expr::Const(Constant::E)),
        Just(Expr::Var(Var::Time)),
        Just(Expr::Var(Var::Eps)),
        (0..N).prop_map(Expr::state),
    ]
}

fn tree() -> impl Strategy<Value = Expr> {
    leaf().prop_recursive(6, 48, 2, |inner| {
        let op = prop_oneof![Just(BinOp::Add), Just(BinOp::Sub), Just(BinOp::Mul), Just(BinOp::Div), Just(BinOp::Pow)];
        prop_oneof![
            inner.clone().prop_map(|e| Expr::Neg(Box::new(e))),
            (op, inner.clone(), inner.clone()).prop_map(|(o, a, b)| Expr::binary(o, a, b)),
            (prop::sample::select(Func::ALL.to_vec()), inner.clone(), inner).prop_map(|(f, a, b)| {
                let args = if f.arity() == 2 { vec![a, b] } else { vec![a] };
                Expr::call(f, args)
            }),
        ]
    })
}

fn count_nonsmooth(e: &Expr) -> usize {
    match e {
        Expr::Num(_) | Expr::Const(_) | Expr::Var(_) => 0,
        Expr::Neg(a) => count_nonsmooth(a),
        Expr::Binary(_, a, b) => count_nonsmooth(a) + count_nonsmooth(b),
        Expr::Call(f, args) => usize::from(f.is_nonsmooth()) + args.iter().map(count_nonsmooth).sum::<usize>(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn print_parse_round_trip(e in tree(), seed in any::<u64>()) {
        let back = parse(&e.to_string(), N).unwrap();
        prop_assert_eq!(&back, &e);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..100 {
            let t = rng.random_range(-10.0..10.0);
            let eps = rng.random_range(0.0..1.0);
            let x: Vec<f64> = (0..N).map(|_| rng.random_range(-5.0..5.0)).collect();
            match (e.eval(t, &x, eps), back.eval(t, &x, eps)) {
                (Ok(a), Ok(b)) => prop_assert_eq!(a.to_bits(), b.to_bits()),
                (a, b) => prop_assert_eq!(a, b),
            }
        }
    }

    #[test]
    fn switching_count_matches_nonsmooth_nodes(e in tree()) {
        prop_assert_eq!(e.switching_functions().len(), count_nonsmooth(&e));
        prop_assert_eq!(e.nonsmooth_count(), count_nonsmooth(&e));
    }

    #[test]
    fn evaluation_never_yields_nan(e in tree(), t in -10.0..10.0f64, x1 in -5.0..5.0f64) {
        if let Ok(v) = e.eval(t, &[x1, 0.5, -0.5], 0.1) {
            prop_assert!(v.is_finite());
        }
    }
}

#[test]
fn spec_style_examples() {
    let e = parse("abs(x1)-1", 1).unwrap();
    assert_eq!(e.switching_functions(), vec![Expr::state(0)]);
    assert!(parse("x1^2 + sin(t)", 1).unwrap().switching_functions().is_empty());
    assert_eq!(parse("abs(cos(t))*x1", 1).unwrap().switching_functions(), vec![parse("cos(t)", 1).unwrap()]);
    let sw = parse("max(x1, x2)", 2).unwrap().switching_functions();
    assert_eq!(sw.len(), 1);
    assert_eq!(sw[0].eval(0.0, &[3.0, 1.25], 0.0).unwrap(), 1.75);
    assert_eq!(parse("eps*x1", 1).unwrap().eval(0.0, &[2.0], 0.5).unwrap(), 1.0);
}

#[test]
fn domain_errors_are_not_nan() {
    for src in ["log(x1)", "sqrt(x1 - 1)", "1/x1", "x1^0.5 * (x1 - 1)"] {
        let r = parse(src, 1).unwrap().eval(0.0, &[if src.starts_with("x1^") { -1.0 } else { 0.0 }], 0.0);
        assert!(r.is_err(), "{src} gave {r:?}");
    }
}
