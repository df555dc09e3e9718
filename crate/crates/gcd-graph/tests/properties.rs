use gcd_graph::sample::{random_gcd_graph, random_variation_case, SampleOptions, SAMPLE_PRIMES};
use gcd_graph::{
    is_structured, quality_variation, r_of, r_plus_minus, special, subgraph_relation, theta_weight, validate,
    GcdGraph,
};
use num_traits::Zero;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rational_core::{rat, ratio_of, BigRational};
use std::cmp::Ordering;
use std::collections::BTreeSet;

fn graph(seed: u64, extra: usize) -> GcdGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let o = SampleOptions { random_weights: seed % 2 == 0, ..SampleOptions::default() };
    random_gcd_graph(&mut rng, &o, extra)
}

fn thetas() -> impl Strategy<Value = BigRational> {
    (1i64..=12, 1i64..=4).prop_map(|(a, b)| rat(1) + ratio_of(a, b) / rat(4))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn weight_decreases_in_theta(seed in any::<u64>(), t1 in thetas(), t2 in thetas()) {
        let g = graph(seed, 0);
        let (lo, hi) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
        let w_lo = theta_weight(&g, &lo).unwrap();
        let w_hi = theta_weight(&g, &hi).unwrap();
        prop_assert_ne!(w_hi.cmp_scaled(&w_lo, &rat(1)), Ordering::Greater);
        let me = g.mu_e();
        prop_assert_ne!(w_lo.cmp_value(&theta_weight(&g, &rat(1)).unwrap()), Ordering::Greater);
        prop_assert_eq!(theta_weight(&g, &rat(1)).unwrap().exact_power(), Some(me));
    }

    #[test]
    fn special_graphs_partition_edges(seed in any::<u64>(), pi in 0usize..4) {
        let g = graph(seed, 1);
        let p = SAMPLE_PRIMES[pi];
        prop_assume!(!g.p.contains(&p));
        let (kv, kw) = g.valuations(p);
        let mut total = BigRational::zero();
        for k in &kv {
            for l in &kw {
                total += special(&g, p, *k, *l).unwrap().mu_e();
            }
        }
        prop_assert_eq!(total, g.mu_e());
    }

    #[test]
    fn variation_identity(seed in any::<u64>(), t in thetas()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (g, p, k, l) = random_variation_case(&mut rng, &SampleOptions::default());
        let rep = quality_variation(&g, p, k, l, &t).unwrap();
        prop_assert!(rep.equal, "{:?}", rep);
    }

    #[test]
    fn structured_split(seed in any::<u64>()) {
        let g = graph(seed, 2);
        let s = is_structured(&g).unwrap();
        prop_assert!(s.k.values().all(|&k| k != 0));
        if s.structured {
            let (plus, minus) = r_plus_minus(&g).unwrap();
            prop_assert!(plus.is_disjoint(&minus));
            let both: BTreeSet<u64> = plus.union(&minus).copied().collect();
            prop_assert_eq!(both, r_of(&g).unwrap());
        }
    }

    #[test]
    fn validate_closed_under_constructions(seed in any::<u64>(), extra in 0usize..3, mask in any::<u32>()) {
        let g = graph(seed, extra);
        prop_assert!(validate(&g).valid);
        let v: BTreeSet<_> = g.v.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, x)| x.clone()).collect();
        let w: BTreeSet<_> = g.w.iter().enumerate().filter(|(i, _)| mask >> (16 + i) & 1 == 1).map(|(_, x)| x.clone()).collect();
        let h = g.induced(&v, &w);
        prop_assert!(validate(&h).valid);
        prop_assert!(subgraph_relation(&h, &g).subgraph);
        for p in SAMPLE_PRIMES.iter().filter(|p| !g.p.contains(p)) {
            for (k, l) in g.edge_valuations(*p) {
                let s = special(&g, *p, k, l).unwrap();
                prop_assert!(validate(&s).valid);
                prop_assert!(subgraph_relation(&s, &g).exact_sub);
            }
        }
    }

    #[test]
    fn json_roundtrip(seed in any::<u64>(), extra in 0usize..3) {
        let g = graph(seed, extra);
        let back: GcdGraph = serde_json::from_str(&serde_json::to_string(&g).unwrap()).unwrap();
        prop_assert_eq!(back, g);
    }
}
