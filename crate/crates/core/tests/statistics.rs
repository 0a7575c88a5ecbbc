use confmodel::switchings::{path_join_increment, test_edge_addition_lipschitz};
use confmodel::{DegreeLaw, MultiGraph, Rational, StatisticKind, StatisticSpec};
use proptest::prelude::*;

const REGISTRY: &[&str] = &[
    "beta0",
    "zero",
    "Spk:p=2,K=5",
    "Spk:p=1,K=inf",
    "Spk:p=3,K=inf",
    "susceptibility:p=2",
    "treecount:edge",
    "treecount:path3",
    "treecount:star4",
    "treecount:tree:1-2,2-3,2-4,4-5",
    "maxcut",
    "ising:beta=0.5",
    "ising:beta=0.3,field=0.2",
    "potts:q=3,beta=0.5",
];

fn specs() -> Vec<StatisticSpec> {
    REGISTRY.iter().map(|s| s.parse().unwrap()).collect()
}

fn is_spin(spec: &StatisticSpec) -> bool {
    matches!(spec.kind(), StatisticKind::LogPartition(_))
}

fn graph() -> impl Strategy<Value = MultiGraph> {
    (1usize..9).prop_flat_map(|n| {
        prop::collection::vec((0..n as u32, 0..n as u32), 0..12)
            .prop_map(move |e| MultiGraph::from_edges(n, e).unwrap())
    })
}

fn relabelled() -> impl Strategy<Value = (MultiGraph, Vec<u32>)> {
    graph().prop_flat_map(|g| {
        let perm: Vec<u32> = (0..g.n() as u32).collect();
        (Just(g), Just(perm).prop_shuffle())
    })
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-10 * (1.0 + a.abs().max(b.abs()))
}

proptest! {
    // Spin-model values are floating point; every other statistic is
    // compared exactly in rationals.
    #[test]
    fn additive_over_disjoint_unions(g1 in graph(), g2 in graph()) {
        let g = g1.disjoint_union(&g2);
        for spec in specs() {
            if is_spin(&spec) {
                let (a, b, c) = (
                    spec.evaluate::<f64>(&g).unwrap(),
                    spec.evaluate::<f64>(&g1).unwrap(),
                    spec.evaluate::<f64>(&g2).unwrap(),
                );
                prop_assert!(close(a, b + c), "{}: {} vs {}", spec, a, b + c);
            } else {
                let a: Rational = spec.evaluate(&g).unwrap();
                let b: Rational = spec.evaluate(&g1).unwrap();
                let c: Rational = spec.evaluate(&g2).unwrap();
                prop_assert_eq!(a, b + c, "{}", spec);
            }
        }
    }

    #[test]
    fn invariant_under_relabelling((g, perm) in relabelled()) {
        let h = g.relabel(&perm).unwrap();
        for spec in specs() {
            if is_spin(&spec) {
                prop_assert!(close(spec.evaluate::<f64>(&g).unwrap(), spec.evaluate::<f64>(&h).unwrap()));
            } else {
                prop_assert_eq!(spec.evaluate::<Rational>(&g).unwrap(), spec.evaluate::<Rational>(&h).unwrap(), "{}", spec);
            }
        }
    }
}

#[test]
fn declared_edge_constants_hold() {
    let general: DegreeLaw = "iid:1=0.5,2=0.4,3=0.1".parse().unwrap();
    // Spin evaluators cap component size, so they get smaller components.
    let thin: DegreeLaw = "iid:1=0.75,2=0.25".parse().unwrap();
    for spec in specs() {
        let Some(bound) = spec.lipschitz_edge_addition() else {
            continue;
        };
        let ds = if is_spin(&spec) {
            thin.generate(24, 11).unwrap()
        } else {
            general.generate(40, 11).unwrap()
        };
        let r = test_edge_addition_lipschitz(&spec, &ds, bound, 10_000, 5).unwrap();
        assert_eq!(r.violation_count, 0, "{spec}: max increment {}", r.max_increment);
        assert!(r.cap_exceeded * 10 < r.trials, "{spec}: {} caps", r.cap_exceeded);
    }
}

#[test]
fn declared_constants_match_the_formulas() {
    let c = |s: &str| s.parse::<StatisticSpec>().unwrap().lipschitz_edge_addition();
    assert_eq!(c("beta0"), Some(1.0));
    assert_eq!(c("maxcut"), Some(1.0));
    assert_eq!(c("Spk:p=2,K=5"), Some(100.0));
    assert_eq!(c("Spk:p=3,K=2"), Some(64.0));
    assert_eq!(c("Spk:p=2,K=inf"), None);
    assert_eq!(c("susceptibility:p=2"), None);
    assert!((c("ising:beta=0.5").unwrap() - 0.5f64.exp()).abs() < 1e-15);
    assert_eq!(c("potts:q=3,beta=0.5"), Some(1.0));
}

#[test]
fn unbounded_size_moments_are_not_lipschitz() {
    let s2: StatisticSpec = "Spk:p=2,K=inf".parse().unwrap();
    let mut last = 0.0;
    for l in [2usize, 4, 8, 16, 32] {
        let inc = path_join_increment(&s2, l).unwrap();
        assert_eq!(inc, 2.0 * (l * l) as f64);
        assert!(inc > last);
        last = inc;
    }
    assert!(last > 1000.0);
}
