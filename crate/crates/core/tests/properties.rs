use proptest::prelude::*;
use takagi_lab::decomposition::build_radix;
use takagi_lab::derivatives::BinaryExpansion;
use takagi_lab::evaluation::GeneralizedTakagi;
use takagi_lab::harness::{check_parity_chords, Status};
use takagi_lab::sequences::exact_secant;
use takagi_lab::Rational;

fn unit_rational() -> impl Strategy<Value = Rational> {
    (1i64..5000).prop_flat_map(|den| (0..=den).prop_map(move |num| Rational::ratio(num, den)))
}

fn interior_rational() -> impl Strategy<Value = Rational> {
    (2i64..5000).prop_flat_map(|den| (1..den).prop_map(move |num| Rational::ratio(num, den)))
}

fn radix_oracle(r: i64, x: &Rational, to: usize, alternating: bool) -> Rational {
    (0..=to)
        .map(|k| {
            let scale = Rational::from(r).pow(k as i32);
            let f = (x * &scale).fract();
            let d = std::cmp::min(f.clone(), Rational::one() - f) / scale;
            if alternating && k % 2 == 1 {
                -d
            } else {
                d
            }
        })
        .sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn enclosure_contains_truncated_series(r in 2u64..=5, x in unit_rational(), alternating in any::<bool>()) {
        let w = if alternating { "alt 1" } else { "const 1" };
        let t = GeneralizedTakagi::new(build_radix(r, 40).unwrap(), w.parse().unwrap()).unwrap();
        let eps = Rational::ratio(1, 100_000);
        let e = t.evaluate(&x, &eps).unwrap();
        let deep = radix_oracle(r as i64, &x, 40, alternating);
        let slack = t.tail_bound(40);
        prop_assert!(e.interval.distance_to(&deep) <= slack, "{} vs {}", e.interval, deep);
    }

    #[test]
    fn secant_is_symmetric(u in unit_rational(), v in unit_rational()) {
        prop_assume!(u != v);
        let t = GeneralizedTakagi::new(build_radix(2, 30).unwrap(), "const 1".parse().unwrap()).unwrap();
        let a = exact_secant(&t, &u, &v).unwrap();
        let b = exact_secant(&t, &v, &u).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn binary_expansion_round_trips(x in unit_rational()) {
        prop_assume!(x < Rational::one());
        let e = BinaryExpansion::of(&x).unwrap();
        prop_assert_eq!(e.value(), x.clone());
        let reparsed: BinaryExpansion = e.to_string().parse().unwrap();
        prop_assert_eq!(reparsed.value(), x);
    }

    #[test]
    fn parity_identities_hold_off_the_grid(x in interior_rational()) {
        let t = GeneralizedTakagi::new(build_radix(3, 14).unwrap(), "const 1".parse().unwrap()).unwrap();
        let r = check_parity_chords(&t, &x, 12);
        prop_assert!(r.status != Status::Fail, "{}", r);
    }

    #[test]
    fn rational_text_round_trips(num in -10_000i64..10_000, den in 1i64..10_000) {
        let x = Rational::ratio(num, den);
        let back: Rational = x.to_string().parse().unwrap();
        prop_assert_eq!(back, x);
    }
}
