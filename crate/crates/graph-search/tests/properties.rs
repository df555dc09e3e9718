use gcd_graph::sample::{corpus, random_graph, SampleOptions};
use gcd_graph::{theta_weight, GcdGraph};
use graph_search::{
    certify_maximal, lemma_suite, maximal_subgraph, replay, weight_monotonicity, Certificate, Method,
    DEFAULT_EXHAUSTIVE_CAP,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rational_core::{rat, ratio_of, BigRational};
use std::cmp::Ordering;
use std::collections::BTreeSet;

fn sample(seed: u64, max_side: usize) -> GcdGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let o = SampleOptions { max_side, random_weights: true, ..SampleOptions::default() };
    random_graph(&mut rng, &o)
}

fn thetas() -> impl Strategy<Value = BigRational> {
    prop_oneof![Just(ratio_of(21, 10)), Just(ratio_of(5, 2)), Just(rat(3)), Just(ratio_of(2001, 1000))]
}

fn subsets<T: Clone + Ord>(xs: &BTreeSet<T>) -> Vec<BTreeSet<T>> {
    let v: Vec<&T> = xs.iter().collect();
    (0u32..1 << v.len())
        .map(|m| v.iter().enumerate().filter(|(i, _)| m >> i & 1 == 1).map(|(_, x)| (*x).clone()).collect())
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn exhaustive_beats_every_induced_subgraph(seed in any::<u64>(), theta in thetas()) {
        let g = sample(seed, 5);
        let res = maximal_subgraph(&g, &theta, Method::Exhaustive).unwrap();
        prop_assert!(gcd_graph::subgraph_relation(&res.subgraph, &g).subgraph);
        for v in subsets(&g.v) {
            for w in subsets(&g.w) {
                let q = theta_weight(&g.induced(&v, &w), &theta).unwrap();
                prop_assert_ne!(q.cmp_value(&res.weight), Ordering::Greater);
            }
        }
    }

    #[test]
    fn induced_edges_dominate_edge_subsets(seed in any::<u64>(), theta in thetas()) {
        let g = sample(seed, 3);
        prop_assume!(g.e.len() <= 12);
        let full = theta_weight(&g, &theta).unwrap();
        for e in subsets(&g.e) {
            let q = theta_weight(&g.with_edges(e), &theta).unwrap();
            prop_assert_ne!(q.cmp_value(&full), Ordering::Greater);
        }
    }

    #[test]
    fn greedy_is_stable_and_dominated(seed in any::<u64>(), theta in thetas()) {
        let g = sample(seed, 5);
        let ex = maximal_subgraph(&g, &theta, Method::Exhaustive).unwrap();
        let gr = maximal_subgraph(&g, &theta, Method::Greedy).unwrap();
        prop_assert_ne!(gr.weight.cmp_value(&ex.weight), Ordering::Greater);
        prop_assert!(replay(&g, &gr, DEFAULT_EXHAUSTIVE_CAP).unwrap().ok);
        let is_greedy = matches!(gr.certificate, Certificate::Greedy { .. });
        prop_assert!(is_greedy);
        for x in gr.subgraph.v.iter() {
            let mut v = gr.subgraph.v.clone();
            v.remove(x);
            let q = theta_weight(&gr.subgraph.induced(&v, &gr.subgraph.w), &theta).unwrap();
            prop_assert_ne!(q.cmp_value(&gr.weight), Ordering::Greater);
        }
    }

    #[test]
    fn maximal_certificate_replays(seed in any::<u64>(), theta in thetas()) {
        let g = sample(seed, 4);
        let ex = maximal_subgraph(&g, &theta, Method::Exhaustive).unwrap();
        prop_assert!(certify_maximal(&ex.subgraph, &theta, DEFAULT_EXHAUSTIVE_CAP).unwrap());
        prop_assert!(replay(&g, &ex, DEFAULT_EXHAUSTIVE_CAP).unwrap().ok);
    }

    #[test]
    fn weight_increase_carries_to_larger_theta(seed in any::<u64>(), theta in thetas(), extra in 0i64..4) {
        let g = sample(seed, 4);
        let ex = maximal_subgraph(&g, &theta, Method::Exhaustive).unwrap();
        let ord = ex.weight.cmp_value(&theta_weight(&g, &theta).unwrap());
        prop_assume!(ord == Ordering::Greater);
        let t2 = &theta + ratio_of(extra, 2);
        let rep = weight_monotonicity(&g, &ex.subgraph, &theta, &t2).unwrap();
        prop_assert!(rep.density_increase);
        prop_assert!(rep.ratio_inequality);
        prop_assert_eq!(rep.ratio_equal, extra == 0);
    }
}

#[test]
fn lemma_suite_on_small_corpus() {
    let o = SampleOptions { max_side: 3, random_weights: true, ..SampleOptions::default() };
    for (i, g) in corpus(11, 60, &o).iter().enumerate() {
        for theta in [ratio_of(21, 10), rat(3)] {
            let rep = lemma_suite(g, &theta, DEFAULT_EXHAUSTIVE_CAP).unwrap();
            assert!(rep.violations.is_empty(), "graph {i}: {:?}", rep.violations);
        }
    }
}
