use gcd_graph::sample::{random_gcd_graph, SampleOptions};
use gcd_graph::{default_toy_constants, quality, r_of, split_r, subgraph_relation, GcdGraph};
use iteration_pipeline::{
    check_step, main_dichotomy, maximal_step, prop_iter1, prop_small_primes, small_prime_step, Branch, StepRecord, Witness,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn graph(seed: u64, extra: usize) -> GcdGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let o = SampleOptions { max_side: 3, ..SampleOptions::default() };
    random_gcd_graph(&mut rng, &o, extra)
}

fn assert_clean(input: &GcdGraph, s: &StepRecord) {
    let c = default_toy_constants();
    let bad: Vec<_> = s.assertions.iter().filter(|a| a.is_failure()).collect();
    assert!(bad.is_empty(), "{:?}: {bad:?}", s.op);
    assert_eq!(check_step(input, &s.op, &s.output, &c).unwrap(), s.assertions);
    assert_eq!(quality(&s.output, &c.theta).unwrap(), s.quality_after);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn small_prime_steps_are_exact(seed in any::<u64>(), extra in 0usize..2) {
        let g = graph(seed, extra);
        let c = default_toy_constants();
        for p in r_of(&g).unwrap() {
            let s = small_prime_step(&g, p, &c).unwrap();
            assert_clean(&g, &s);
            prop_assert!(s.output.p.contains(&p));
            prop_assert!(!r_of(&s.output).unwrap().contains(&p));
        }
    }

    #[test]
    fn dichotomy_witnesses_are_exact(seed in any::<u64>()) {
        let g = graph(seed, 0);
        let c = default_toy_constants();
        for p in r_of(&g).unwrap() {
            let out = main_dichotomy(&g, p, &c).unwrap();
            if out.branch == Branch::A {
                let Some(Witness::Subgraph { graph: h, .. }) = out.witness else { panic!("branch A without a subgraph") };
                let rel = subgraph_relation(&h, &g);
                prop_assert!(rel.exact_sub);
                let r = r_of(&h).unwrap();
                prop_assert!(!r.contains(&p) && r.is_subset(&r_of(&g).unwrap()));
            }
        }
    }

    #[test]
    fn small_primes_then_iteration(seed in any::<u64>()) {
        let g = graph(seed, 0);
        let c = default_toy_constants();
        let pr = prop_small_primes(&g, &c).unwrap();
        prop_assert!(pr.assertions.iter().all(|a| !a.is_failure()));
        let mut prev = g.clone();
        for s in &pr.steps {
            assert_clean(&prev, s);
            prev = s.output.clone();
        }
        prop_assert!(r_of(&pr.graph).unwrap().iter().all(|&p| p > 2));
        let m = maximal_step(&pr.graph, &c).unwrap();
        assert_clean(&pr.graph, &m);
        let mut cur = m.output;
        let mut guard = 0;
        while !cur.is_trivial() && !split_r(&cur, &c).unwrap().flat.is_empty() {
            let s = prop_iter1(&cur, &c).unwrap();
            assert_clean(&cur, &s);
            prop_assert!(r_of(&s.output).unwrap().len() < r_of(&cur).unwrap().len());
            cur = s.output;
            guard += 1;
            prop_assert!(guard <= 4);
        }
    }
}
