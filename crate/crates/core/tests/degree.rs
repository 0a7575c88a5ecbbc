use confmodel::{DegreeLaw, Rational};
use proptest::prelude::*;

fn law() -> impl Strategy<Value = DegreeLaw> {
    prop_oneof![
        (1u32..6).prop_map(DegreeLaw::regular),
        prop::collection::vec(1u32..10, 1..5).prop_map(|w| {
            let total: u32 = w.iter().sum();
            DegreeLaw::iid(w.iter().enumerate().map(|(d, &x)| (d as u32, f64::from(x) / f64::from(total))).collect())
        }),
        (2.1f64..5.0).prop_map(|g| DegreeLaw::power_law(g, None)),
    ]
}

fn law_and_n() -> impl Strategy<Value = (DegreeLaw, usize)> {
    prop_oneof![
        (law(), 1usize..500),
        // Explicit lists tile, so n is a multiple of the list length.
        (prop::collection::vec(0u32..5, 1..6), 1usize..50).prop_map(|(d, k)| {
            let n = d.len() * k;
            (DegreeLaw::explicit(d), n)
        }),
    ]
}

proptest! {
    #[test]
    fn generated_sums_are_even_and_reproducible((law, n) in law_and_n(), seed in any::<u64>()) {
        let ds = law.generate(n, seed).unwrap();
        prop_assert_eq!(ds.n(), n);
        prop_assert_eq!(ds.two_m() % 2, 0);
        prop_assert_eq!(ds.two_m(), ds.degrees().iter().map(|&d| u64::from(d)).sum::<u64>());
        prop_assert_eq!(ds, law.generate(n, seed).unwrap());
    }

    #[test]
    fn regular_ratio_is_d_minus_one(d in 1u32..8, half in 1usize..50) {
        let ds = DegreeLaw::regular(d).generate(2 * half, 0).unwrap();
        prop_assert_eq!(ds.subcriticality_ratio::<Rational>().unwrap(), Rational::from_integer(i64::from(d) - 1));
    }
}
