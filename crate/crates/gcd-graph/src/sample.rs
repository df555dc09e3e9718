//! Seeded random GCD graphs for tests and corpora.

use crate::graph::{Edge, GcdGraph, Vertex};
use crate::structure::special;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rational_core::{ratio_of, BigRational, ReducedRational};
use std::collections::{BTreeMap, BTreeSet};

pub const SAMPLE_PRIMES: [u64; 4] = [2, 3, 5, 7];

#[derive(Clone, Debug)]
pub struct SampleOptions {
    pub max_side: usize,
    /// Largest exponent of each prime in numerators and denominators.
    pub max_exp: u32,
    pub allow_denominators: bool,
    /// Random weights a/b with 1 <= a, b <= 9 instead of 1/alpha.
    pub random_weights: bool,
    pub edge_probability: f64,
}

impl Default for SampleOptions {
    fn default() -> Self {
        Self { max_side: 4, max_exp: 2, allow_denominators: true, random_weights: false, edge_probability: 0.5 }
    }
}

fn random_part<R: Rng>(rng: &mut R, max_exp: u32) -> u64 {
    SAMPLE_PRIMES.iter().map(|&p| p.pow(rng.gen_range(0..=max_exp))).product()
}

pub fn random_vertex<R: Rng>(rng: &mut R, o: &SampleOptions) -> Vertex {
    let n = random_part(rng, o.max_exp);
    let d = if o.allow_denominators && rng.gen_bool(0.4) { random_part(rng, o.max_exp.min(1)) } else { 1 };
    ReducedRational::new(n, d)
}

fn random_side<R: Rng>(rng: &mut R, o: &SampleOptions) -> BTreeSet<Vertex> {
    let n = rng.gen_range(1..=o.max_side);
    (0..n).map(|_| random_vertex(rng, o)).collect()
}

/// A random bipartite graph with P empty. Never has an empty edge set.
pub fn random_graph<R: Rng>(rng: &mut R, o: &SampleOptions) -> GcdGraph {
    let v = random_side(rng, o);
    let w = random_side(rng, o);
    let mut e: BTreeSet<Edge> = BTreeSet::new();
    for a in &v {
        for b in &w {
            if rng.gen_bool(o.edge_probability) {
                e.insert((a.clone(), b.clone()));
            }
        }
    }
    if e.is_empty() {
        let a = v.iter().collect::<Vec<_>>().choose(rng).map(|x| (*x).clone()).unwrap();
        let b = w.iter().collect::<Vec<_>>().choose(rng).map(|x| (*x).clone()).unwrap();
        e.insert((a, b));
    }
    let g = GcdGraph::bipartite(v, w, e).expect("sampled graph is well formed");
    if o.random_weights {
        let weights: BTreeMap<Vertex, BigRational> = g
            .weights
            .keys()
            .map(|x| (x.clone(), ratio_of(rng.gen_range(1..=9), rng.gen_range(1..=9))))
            .collect();
        g.reweighted(|x| weights[x].clone()).expect("positive weights")
    } else {
        g
    }
}

/// A random graph with up to `extra` primes moved into P through special subgraphs,
/// keeping only steps that leave some edge.
pub fn random_gcd_graph<R: Rng>(rng: &mut R, o: &SampleOptions, extra: usize) -> GcdGraph {
    let mut g = random_graph(rng, o);
    for _ in 0..extra {
        let free: Vec<u64> = SAMPLE_PRIMES.iter().copied().filter(|p| !g.p.contains(p)).collect();
        let Some(&p) = free.choose(rng) else { break };
        let pairs: Vec<(i64, i64)> = g.edge_valuations(p).into_iter().collect();
        let &(k, l) = pairs.choose(rng).expect("non-trivial graph");
        g = special(&g, p, k, l).expect("p is not in P");
    }
    g
}

/// A case (G, p, k, l) for the quality variation identity: G non-trivial, p not in P,
/// and both V_{p^k} and W_{p^l} non-empty.
pub fn random_variation_case<R: Rng>(rng: &mut R, o: &SampleOptions) -> (GcdGraph, u64, i64, i64) {
    let extra = rng.gen_range(0..=1);
    let g = random_gcd_graph(rng, o, extra);
    let free: Vec<u64> = SAMPLE_PRIMES.iter().copied().filter(|p| !g.p.contains(p)).collect();
    let p = *free.choose(rng).unwrap();
    let (kv, kw) = g.valuations(p);
    let k = *kv.iter().collect::<Vec<_>>().choose(rng).unwrap();
    let l = *kw.iter().collect::<Vec<_>>().choose(rng).unwrap();
    (g, p, *k, *l)
}

/// Deterministic corpus of `n` graphs drawn from one seed.
pub fn corpus(seed: u64, n: usize, o: &SampleOptions) -> Vec<GcdGraph> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| random_graph(&mut rng, o)).collect()
}
