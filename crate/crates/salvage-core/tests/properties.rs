//! Property tests for the numerical substrate: parser round-trips, interval
//! algebra, quadrature against exact antiderivatives, symbolic derivatives
//! against central finite differences, and inversion round-trips.

use proptest::prelude::*;

use salvage_core::expr::{BinOp, Builtin, Expr};
use salvage_core::{
    integrate, invert_on_segment, monotone_segments, parse, parse_expr, Direction, Interval,
    IntervalSet, Params, RealFn, TruncationPolicy,
};

// ---------------------------------------------------------------------------
// expression round trip

fn leaf() -> impl Strategy<Value = Expr> {
    prop_oneof![
        (0u32..1000, 1u32..100).prop_map(|(a, b)| Expr::Num(a as f64 / b as f64)),
        Just(Expr::Var),
        Just(Expr::Param("z".to_string())),
    ]
}

fn expr_tree(depth: u32) -> BoxedStrategy<Expr> {
    let leaf = leaf();
    leaf.prop_recursive(depth, 64, 3, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone(), prop_oneof![
                Just(BinOp::Add),
                Just(BinOp::Sub),
                Just(BinOp::Mul),
                Just(BinOp::Div),
                Just(BinOp::Pow),
            ])
                .prop_map(|(a, b, op)| Expr::bin(op, a, b)),
            inner.clone().prop_map(Expr::negate),
            (inner, prop_oneof![
                Just(Builtin::Exp),
                Just(Builtin::Log),
                Just(Builtin::Sqrt),
                Just(Builtin::Abs),
                Just(Builtin::Phi),
            ])
                .prop_map(|(a, b)| Expr::call(b, a)),
        ]
    })
    .boxed()
}

proptest! {
    #[test]
    fn unparse_then_reparse_is_identity(e in expr_tree(6)) {
        let mut params = Params::new();
        params.insert("z".to_string(), 2.0);
        let printed = e.to_string();
        let back = parse_expr(&printed, &params).unwrap();
        prop_assert_eq!(e, back, "printed: {}", printed);
    }
}

// ---------------------------------------------------------------------------
// interval-set measure algebra

fn interval_in(lo: f64, hi: f64) -> impl Strategy<Value = Interval> {
    (lo..hi, lo..hi, any::<bool>(), any::<bool>()).prop_map(|(a, b, lc, hc)| {
        Interval::new(a.min(b), a.max(b), lc, hc)
    })
}

fn set_in(lo: f64, hi: f64) -> impl Strategy<Value = IntervalSet> {
    proptest::collection::vec(interval_in(lo, hi), 0..6).prop_map(IntervalSet::new)
}

proptest! {
    #[test]
    fn inclusion_exclusion_for_measure(a in set_in(-10.0, 10.0), b in set_in(-10.0, 10.0)) {
        let lhs = a.union(&b).measure() + a.intersect(&b).measure();
        let rhs = a.measure() + b.measure();
        prop_assert!((lhs - rhs).abs() <= 1e-12, "{lhs} vs {rhs}");
    }

    #[test]
    fn subtraction_partitions_measure(a in set_in(-10.0, 10.0), b in set_in(-10.0, 10.0)) {
        let inside = a.intersect(&b).measure();
        let outside = a.subtract(&b).measure();
        prop_assert!((inside + outside - a.measure()).abs() <= 1e-12);
    }

    #[test]
    fn containment_respects_union(a in set_in(-10.0, 10.0), b in set_in(-10.0, 10.0), x in -10.0..10.0f64) {
        let u = a.union(&b);
        prop_assert_eq!(u.contains(x), a.contains(x) || b.contains(x));
    }
}

// ---------------------------------------------------------------------------
// quadrature against exact antiderivatives

fn poly_text(coeffs: &[f64]) -> String {
    let mut terms = Vec::new();
    for (k, c) in coeffs.iter().enumerate() {
        if k == 0 {
            terms.push(format!("{c}"));
        } else if k == 1 {
            terms.push(format!("{c}*x"));
        } else {
            terms.push(format!("{c}*x^{k}"));
        }
    }
    terms.join(" + ")
}

/// Antiderivative evaluated by Horner, independent of the quadrature path.
fn poly_antiderivative(coeffs: &[f64], x: f64) -> f64 {
    let mut acc = 0.0;
    for (k, c) in coeffs.iter().enumerate().rev() {
        acc = acc * x + c / (k as f64 + 1.0);
    }
    acc * x
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn quadrature_matches_antiderivative_on_polynomials(
        coeffs in proptest::collection::vec(-5.0..5.0f64, 1..=9),
        a in -5.0..5.0f64,
        w in 0.01..6.0f64,
    ) {
        let b = (a + w).min(5.0);
        prop_assume!(b > a);
        let f = parse(&poly_text(&coeffs), Interval::closed(a, b), &Params::new()).unwrap();
        let got = integrate(&f, f.domain(), 1e-10, TruncationPolicy::default()).unwrap();
        let exact = poly_antiderivative(&coeffs, b) - poly_antiderivative(&coeffs, a);
        prop_assert!(
            (got.value - exact).abs() <= 1e-10 * exact.abs().max(1.0),
            "got {} exact {}", got.value, exact
        );
    }

    #[test]
    fn quadrature_is_additive_over_disjoint_sets(
        coeffs in proptest::collection::vec(-3.0..3.0f64, 1..=6),
        split in -4.0..4.0f64,
    ) {
        let f = parse(&poly_text(&coeffs), Interval::closed(-5.0, 5.0), &Params::new()).unwrap();
        let left = IntervalSet::from_interval(Interval::closed_open(-5.0, split));
        let right = IntervalSet::from_interval(Interval::closed(split, 5.0));
        let tol = 1e-10;
        let whole = integrate(&f, &left.union(&right), tol, TruncationPolicy::default()).unwrap();
        let parts = integrate(&f, &left, tol, TruncationPolicy::default()).unwrap().value
            + integrate(&f, &right, tol, TruncationPolicy::default()).unwrap().value;
        prop_assert!((whole.value - parts).abs() <= 2.0 * tol.max(1e-12 * whole.value.abs()));
    }
}

// ---------------------------------------------------------------------------
// derivatives against central finite differences

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn derivative_matches_central_difference_on_polynomials(
        coeffs in proptest::collection::vec(-5.0..5.0f64, 2..=9),
    ) {
        let f = parse(&poly_text(&coeffs), Interval::closed(-2.0, 2.0), &Params::new()).unwrap();
        let df = f.differentiate();
        let h = 1e-5;
        for k in 0..100 {
            let x = -1.9 + 3.8 * k as f64 / 99.0;
            let fd = (f.eval(x + h).unwrap() - f.eval(x - h).unwrap()) / (2.0 * h);
            let ad = df.eval(x).unwrap();
            prop_assert!(
                (ad - fd).abs() <= 1e-7 * ad.abs().max(1.0),
                "x={x}: ad {ad} fd {fd}"
            );
        }
    }
}

#[test]
fn derivative_matches_central_difference_on_transcendentals() {
    let fixtures = [
        "phi(x)",
        "exp(-x^2/2)",
        "(1 + 2*x)*phi(x)",
        "sqrt(x + 3) * exp(x/4)",
        "log(x + 3) - x*phi(x)",
    ];
    let h = 1e-5;
    for text in fixtures {
        let f = parse(text, Interval::closed(-2.0, 2.0), &Params::new()).unwrap();
        let df = f.differentiate();
        for k in 0..100 {
            let x = -1.9 + 3.8 * k as f64 / 99.0;
            let fd = (f.eval(x + h).unwrap() - f.eval(x - h).unwrap()) / (2.0 * h);
            let ad = df.eval(x).unwrap();
            assert!(
                (ad - fd).abs() <= 1e-7 * ad.abs().max(1.0),
                "{text} at {x}: ad {ad} fd {fd}"
            );
        }
    }
}

// ---------------------------------------------------------------------------
// inversion round trips

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]
    #[test]
    fn inversion_round_trips_on_monotone_segments(
        shift in -2.0..2.0f64,
        scale in 0.2..3.0f64,
    ) {
        // strictly increasing cubic-plus-line, then its monotone pieces
        let text = format!("{scale}*x^3 + x + {shift}");
        let f = parse(&text, Interval::closed(-2.0, 2.0), &Params::new()).unwrap();
        let segs = monotone_segments(&f, f.domain(), 1e-3).unwrap();
        for seg in segs {
            if seg.direction == Direction::Constant || seg.interval.measure() < 1e-3 {
                continue;
            }
            for k in 0..100 {
                let t = 0.005 + 0.99 * k as f64 / 99.0;
                let x = seg.interval.lo + t * (seg.interval.hi - seg.interval.lo);
                let y = f.eval(x).unwrap();
                let back = invert_on_segment(&f, &seg, y).unwrap();
                prop_assert!((back - x).abs() <= 1e-8, "x {x} back {back}");
            }
        }
    }
}

// ---------------------------------------------------------------------------
// truncation of gaussian tails

#[test]
fn gaussian_tail_truncation_is_reflected_in_error_estimate() {
    let mut params = Params::new();
    params.insert("z".to_string(), 2.0);
    let f = parse(
        "(1 + z*x) * x^2 * phi(x)",
        Interval::new(f64::NEG_INFINITY, f64::INFINITY, false, false),
        &params,
    )
    .unwrap();
    let r = integrate(&f, f.domain(), 1e-9, TruncationPolicy::default()).unwrap();
    // E[X^2] + 2 E[X^3] = 1; the tail beyond |x| = 10 is below 1e-18
    assert!((r.value - 1.0).abs() <= 1e-9);
    assert!(r.abs_error_estimate < 1e-9);
    assert!(r.abs_error_estimate > 0.0);

    let probe = RealFn::from_expr(
        parse_expr("x^2 * phi(x)", &params).unwrap(),
        Interval::closed(10.0, 12.0),
        params.clone(),
    )
    .unwrap();
    let tail = integrate(&probe, probe.domain(), 1e-12, TruncationPolicy::default()).unwrap();
    assert!(tail.value.abs() < 1e-18);
}
