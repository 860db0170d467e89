use pia_core::fraccalc::{caputo_via_convolution, power_kernel_convolve};
use pia_core::{caputo, rl_derivative, rl_integral, FracOrder, FracSeries, RationalExp, Term};
use proptest::prelude::*;

const REL: f64 = 1e-12;

fn exponent(allow_small_fractional: bool) -> impl Strategy<Value = RationalExp> {
    (1i64..=4, 0i64..=32).prop_filter_map("exponent window", move |(den, k)| {
        let num = k * den / 4;
        let e = RationalExp::new(num, den).ok()?;
        let v = e.to_f64();
        let ok = v <= 8.0 && (allow_small_fractional || v == 0.0 || v >= 1.0);
        ok.then_some(e)
    })
}

fn coeff() -> impl Strategy<Value = f64> {
    (0.01f64..10.0, any::<bool>()).prop_map(|(m, neg)| if neg { -m } else { m })
}

fn series_with(allow_small_fractional: bool) -> impl Strategy<Value = FracSeries> {
    prop::collection::vec((coeff(), exponent(allow_small_fractional)), 0..=10)
        .prop_map(|ts| FracSeries::normalize(ts.into_iter().map(|(c, e)| Term::new(c, e))))
}

fn series() -> impl Strategy<Value = FracSeries> {
    series_with(true)
}

fn order() -> impl Strategy<Value = FracOrder> {
    prop_oneof![Just((1, 4)), Just((1, 2)), Just((3, 4)), Just((1, 1))]
        .prop_map(|(n, d)| FracOrder::new(RationalExp::new(n, d).unwrap()).unwrap())
}

fn close(a: &FracSeries, b: &FracSeries) -> bool {
    a.sub(b).terms().iter().all(|t| {
        let scale = a.coeff(t.exp).abs().max(b.coeff(t.exp).abs()).max(1.0);
        t.coeff.abs() <= REL * scale
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn normalize_is_idempotent(a in series()) {
        let again = FracSeries::normalize(a.terms().iter().copied());
        prop_assert_eq!(&again, &a);
        prop_assert!(a.terms().windows(2).all(|w| w[0].exp < w[1].exp));
    }

    #[test]
    fn addition_commutes_and_associates(a in series(), b in series(), c in series()) {
        prop_assert!(close(&(&a + &b), &(&b + &a)));
        prop_assert!(close(&(&(&a + &b) + &c), &(&a + &(&b + &c))));
        prop_assert!((&a - &a).is_zero());
    }

    #[test]
    fn multiplication_commutes(a in series(), b in series()) {
        prop_assert!(close(&(&a * &b), &(&b * &a)));
    }

    #[test]
    fn eval_is_a_ring_homomorphism(a in series(), b in series(), t in 0.0f64..=1.0) {
        let prod = (&a * &b).eval(t).unwrap();
        let expect = a.eval(t).unwrap() * b.eval(t).unwrap();
        prop_assert!((prod - expect).abs() <= 1e-9 * (1.0 + expect.abs()), "{prod} vs {expect}");
        let sum = (&a + &b).eval(t).unwrap();
        prop_assert!((sum - a.eval(t).unwrap() - b.eval(t).unwrap()).abs() <= 1e-11);
    }

    #[test]
    fn derivative_undoes_antiderivative(a in series()) {
        let back = a.antiderivative().unwrap().derivative().unwrap();
        prop_assert!(close(&back, &a));
    }

    // D^α J^α u = u
    #[test]
    fn caputo_inverts_rl_integral(a in series(), alpha in order()) {
        let back = caputo(&rl_integral(&a, alpha).unwrap(), alpha).unwrap();
        prop_assert!(close(&back, &a), "{back} vs {a}");
    }

    // J^α D^α u = u - u(0)
    #[test]
    fn rl_integral_inverts_caputo_up_to_initial_value(a in series(), alpha in order()) {
        prop_assume!(!alpha.is_integer() || a.derivative().is_ok());
        let back = rl_integral(&caputo(&a, alpha).unwrap(), alpha).unwrap();
        let expect = a.sub(&FracSeries::constant(a.constant_term()));
        prop_assert!(close(&back, &expect), "{back} vs {expect}");
    }

    #[test]
    fn caputo_routes_agree(a in series_with(false), alpha in order()) {
        let direct = caputo(&a, alpha).unwrap();
        let conv = caputo_via_convolution(&a, alpha).unwrap();
        prop_assert!(close(&direct, &conv));
    }

    #[test]
    fn rl_derivative_differs_from_caputo_by_initial_value(a in series(), alpha in order()) {
        prop_assume!(!alpha.is_integer());
        let rl = rl_derivative(&a, alpha).unwrap();
        let c = caputo(&a, alpha).unwrap();
        let g = pia_core::gamma(1.0 - alpha.to_f64()).unwrap();
        let jump = FracSeries::monomial(a.constant_term() / g, -alpha.alpha());
        prop_assert!(close(&rl, &(&c + &jump)));
    }

    #[test]
    fn convolution_with_flat_kernel_is_antiderivative(a in series()) {
        let conv = power_kernel_convolve(&a, RationalExp::ZERO).unwrap();
        prop_assert!(close(&conv, &a.antiderivative().unwrap()));
    }

    #[test]
    fn exponent_text_round_trips(e in exponent(true)) {
        let back: RationalExp = e.to_string().parse().unwrap();
        prop_assert_eq!(back, e);
    }
}

#[test]
fn rl_integral_semigroup() {
    let a = FracSeries::normalize([
        Term::new(1.5, RationalExp::ZERO),
        Term::new(-2.0, RationalExp::new(3, 2).unwrap()),
    ]);
    let quarter = FracOrder::new(RationalExp::new(1, 4).unwrap()).unwrap();
    let half = FracOrder::new(RationalExp::new(1, 2).unwrap()).unwrap();
    let twice = rl_integral(&rl_integral(&a, quarter).unwrap(), quarter).unwrap();
    assert!(close(&twice, &rl_integral(&a, half).unwrap()));
}
