use gcd_graph::{
    compute_constants, exactness, quality, quality_variation, r_of, split_r, toy_constants, validate, GcdGraph,
};
use rational_core::{rat, ratio_of, ReducedRational};

fn r(n: u64, d: u64) -> ReducedRational {
    ReducedRational::new(n, d)
}

#[test]
fn variation_with_equal_parts_is_one() {
    let g = GcdGraph::bipartite([r(3, 1), r(6, 1)], [r(3, 1)], [(r(3, 1), r(3, 1)), (r(6, 1), r(3, 1))]).unwrap();
    let rep = quality_variation(&g, 3, 1, 1, &rat(3)).unwrap();
    assert!(rep.equal);
    assert_eq!(rep.lhs, rat(1));
}

#[test]
fn variation_on_split_two_by_two() {
    let g = GcdGraph::bipartite(
        [r(2, 1), r(4, 1)],
        [r(2, 1), r(4, 1)],
        [(r(2, 1), r(2, 1)), (r(2, 1), r(4, 1)), (r(4, 1), r(2, 1))],
    )
    .unwrap();
    for (k, l) in [(1, 1), (1, 2), (2, 1)] {
        for t in [rat(3), ratio_of(21, 10), ratio_of(5, 2)] {
            assert!(quality_variation(&g, 2, k, l, &t).unwrap().equal);
        }
    }
    assert!(quality_variation(&g, 2, 2, 2, &rat(3)).unwrap().lhs == rat(0));
}

#[test]
fn valuation_gap_two_gives_p_squared() {
    let g = GcdGraph::bipartite([r(3, 1)], [r(27, 1)], [(r(3, 1), r(27, 1))]).unwrap();
    let rep = quality_variation(&g, 3, 1, 3, &rat(3)).unwrap();
    assert!(rep.equal);
    // everything survives, so the ratio is 3^2, raised to b = 1
    assert_eq!(rep.rhs, rat(9));
}

#[test]
fn zero_measure_part_is_domain_error() {
    let g = GcdGraph::bipartite([r(3, 1)], [r(3, 1)], [(r(3, 1), r(3, 1))]).unwrap();
    assert!(quality_variation(&g, 3, 2, 1, &rat(3)).is_err());
    let empty = GcdGraph::bipartite([r(3, 1)], [r(3, 1)], []).unwrap();
    assert!(quality_variation(&empty, 3, 1, 1, &rat(3)).is_err());
}

#[test]
fn r_sets_and_classification() {
    let g = GcdGraph::bipartite([r(6, 1)], [r(6, 1)], [(r(6, 1), r(6, 1))]).unwrap().with_prime(2, 1, 1);
    assert!(validate(&g).valid);
    assert_eq!(r_of(&g).unwrap().into_iter().collect::<Vec<_>>(), vec![3]);
    let c = toy_constants(&rat(3), &rat(2), [rat(1), rat(10_000), rat(1), rat(1), rat(1), rat(1), rat(1), rat(1)])
        .unwrap();
    let s = split_r(&g, &c).unwrap();
    assert!(s.sharp.contains(&3));
}

#[test]
fn quality_counts_unbalanced_primes() {
    let g = GcdGraph::bipartite([r(4, 1)], [r(2, 1)], [(r(4, 1), r(2, 1))]).unwrap();
    let h = g.with_prime(2, 2, 1);
    assert!(validate(&h).valid);
    assert!(exactness(&h).exact);
    let ratio = quality(&h, &rat(3)).unwrap().exact_power().unwrap() / quality(&g, &rat(3)).unwrap().exact_power().unwrap();
    assert_eq!(ratio, rat(2));
}

#[test]
fn constants_domain() {
    assert!(compute_constants(&rat(2), &rat(2)).is_err());
    assert!(compute_constants(&ratio_of(5, 2), &rat(1)).is_err());
    let c = compute_constants(&ratio_of(5, 2), &rat(2)).unwrap();
    assert_eq!(c.c(1).value, Some(rat(20_000)));
}
