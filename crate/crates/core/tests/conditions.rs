use confmodel::conditions::{check_f1, tail_probabilities, tail_probability, variance_ladder, Thresholds};
use confmodel::harness::DegreeMode;
use confmodel::{DegreeLaw, StatisticSpec};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn tail_is_monotone_in_alpha(n in 10usize..400, seed in any::<u64>(), mut alphas in prop::collection::vec(0.0f64..50.0, 1..8)) {
        alphas.sort_by(f64::total_cmp);
        let law: DegreeLaw = "iid:1=0.4,2=0.4,3=0.2".parse().unwrap();
        let t = tail_probabilities(&law, n, &alphas, 40, seed).unwrap();
        prop_assert!(t.windows(2).all(|w| w[1].prob <= w[0].prob));
        prop_assert!(t.iter().all(|e| e.ci95.0 <= e.prob && e.prob <= e.ci95.1));
    }

    // Odd n would trigger the parity repair and a degree-2 vertex.
    #[test]
    fn perfect_matchings_never_exceed_two(half in 1usize..300, alpha in 2.0f64..100.0, seed in any::<u64>()) {
        let t = tail_probability(&DegreeLaw::regular(1), 2 * half, alpha, 10, seed).unwrap();
        prop_assert_eq!(t.prob, 0.0);
    }
}

#[test]
fn beta0_variance_is_linear() {
    let law: DegreeLaw = "iid:1=0.5,2=0.5".parse().unwrap();
    let ladder = [250, 500, 1000, 2000, 4000];
    let v = variance_ladder(&StatisticSpec::component_count(), &law, &ladder, 600, DegreeMode::Annealed, 3).unwrap();
    let r = check_f1(&ladder, &v, 0.5, Thresholds::default()).unwrap();
    assert!((0.85..=1.15).contains(&r.slope), "slope {}", r.slope);
    assert!(r.passed);
}
