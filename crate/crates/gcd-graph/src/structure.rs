use crate::constants::ConstantsSet;
use crate::graph::{GcdGraph, Vertex};
use crate::quality::quality;
use crate::util::{e_p, fmt_vertex, val_big};
use crate::{Error, Result};
use num_integer::Integer;
use rational_core::{is_prime_u64, primes::factor_big, BigRational};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

/// One failed condition of the GCD graph definition.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    /// "a", "b", "c-numerator" or "c-denominator".
    pub clause: String,
    pub prime: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub vertex: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub edge: Option<[String; 2]>,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub valid: bool,
    pub violations: Vec<Violation>,
}

fn pos(x: i64) -> i64 {
    x.max(0)
}

fn neg(x: i64) -> i64 {
    (-x).max(0)
}

/// Checks the divisibility conditions (a)-(c) for every p in P.
pub fn validate(g: &GcdGraph) -> ValidationReport {
    let mut out = Vec::new();
    for &p in &g.p {
        let (fp, gp) = (g.f[&p], g.g[&p]);
        let sides = [(&g.v, fp, "f"), (&g.w, gp, "g")];
        for (set, t, name) in sides {
            for x in set {
                let (a, q) = (val_big(x.num(), p), val_big(x.den(), p));
                if a < pos(t) {
                    out.push(Violation {
                        clause: "a".into(),
                        prime: p,
                        vertex: Some(fmt_vertex(x)),
                        edge: None,
                        detail: format!("{p}^{} does not divide the numerator ({name}({p}) = {t})", pos(t)),
                    });
                }
                if q < neg(t) {
                    out.push(Violation {
                        clause: "b".into(),
                        prime: p,
                        vertex: Some(fmt_vertex(x)),
                        edge: None,
                        detail: format!("{p}^{} does not divide the denominator ({name}({p}) = {t})", neg(t)),
                    });
                }
            }
        }
        for (v, w) in &g.e {
            let num = val_big(v.num(), p).min(val_big(w.num(), p));
            let den = val_big(v.den(), p).min(val_big(w.den(), p));
            let edge = Some([fmt_vertex(v), fmt_vertex(w)]);
            if num != pos(fp).min(pos(gp)) {
                out.push(Violation {
                    clause: "c-numerator".into(),
                    prime: p,
                    vertex: None,
                    edge: edge.clone(),
                    detail: format!("{p}^{num} || gcd(a, b), expected exponent {}", pos(fp).min(pos(gp))),
                });
            }
            if den != neg(fp).min(neg(gp)) {
                out.push(Violation {
                    clause: "c-denominator".into(),
                    prime: p,
                    vertex: None,
                    edge,
                    detail: format!("{p}^{den} || gcd(q, r), expected exponent {}", neg(fp).min(neg(gp))),
                });
            }
        }
    }
    ValidationReport { valid: out.is_empty(), violations: out }
}

/// G_{p^k,p^l}: vertices with e_p = k on the left and l on the right, p added to P.
pub fn special(g: &GcdGraph, p: u64, k: i64, l: i64) -> Result<GcdGraph> {
    if !is_prime_u64(p) {
        return Err(Error::Domain(format!("{p} is not prime")));
    }
    if g.p.contains(&p) {
        return Err(Error::Domain(format!("{p} is already in P")));
    }
    Ok(g.induced(&g.v_at(p, k), &g.w_at(p, l)).with_prime(p, k, l))
}

/// Primes of gcd(a, b) gcd(q, r) over all edges (a/q, b/r), outside P.
pub fn r_of(g: &GcdGraph) -> Result<BTreeSet<u64>> {
    let per_edge: Vec<Result<Vec<u64>>> = g
        .e
        .par_iter()
        .map(|(v, w)| {
            let n = v.num().gcd(w.num()) * v.den().gcd(w.den());
            Ok(factor_big(&n)?.into_iter().map(|(p, _)| p).collect())
        })
        .collect();
    let mut out = BTreeSet::new();
    for ps in per_edge {
        out.extend(ps?.into_iter().filter(|p| !g.p.contains(p)));
    }
    Ok(out)
}

/// Classification of one prime of R(G).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrimeClass {
    pub p: u64,
    /// A k with mu(V_{p^k})/mu(V) and mu(W_{p^k})/mu(W) both >= 1 - C2/p.
    pub concentration_k: Option<i64>,
    /// First asymmetric pair (i, j) with q(G_{p^i,p^j}) >= M q(G).
    pub quality_jump: Option<(i64, i64)>,
    pub sharp: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitR {
    pub sharp: BTreeSet<u64>,
    pub flat: BTreeSet<u64>,
    pub classes: Vec<PrimeClass>,
}

/// The k (among realized valuations) with both concentration ratios >= 1 - C2/p.
pub fn concentration_k(g: &GcdGraph, p: u64, c: &ConstantsSet) -> Option<i64> {
    let (mv, mw) = (g.mu_v(), g.mu_w());
    let (kv, kw) = g.valuations(p);
    let mut best: Option<(BigRational, i64)> = None;
    for k in kv.union(&kw) {
        let rv = g.mu_of(&g.v_at(p, *k)) / &mv;
        let rw = g.mu_of(&g.w_at(p, *k)) / &mw;
        if c.c(2).concentrated(p, &rv) && c.c(2).concentrated(p, &rw) {
            let m = rv.min(rw);
            if best.as_ref().map_or(true, |(b, _)| &m > b) {
                best = Some((m, *k));
            }
        }
    }
    best.map(|(_, k)| k)
}

/// First (i, j), i != j, realized on an edge, with q(G_{p^i,p^j}) >= M q(G).
pub fn quality_jump(g: &GcdGraph, p: u64, c: &ConstantsSet) -> Result<Option<(i64, i64)>> {
    let q = quality(g, &c.theta)?;
    for (i, j) in g.edge_valuations(p) {
        if i == j {
            continue;
        }
        let qs = quality(&special(g, p, i, j)?, &c.theta)?;
        if qs.cmp_constant(&q, &c.m, false) != Ordering::Less {
            return Ok(Some((i, j)));
        }
    }
    Ok(None)
}

/// Splits R(G) into the primes meeting both sharp clauses and the rest.
pub fn split_r(g: &GcdGraph, c: &ConstantsSet) -> Result<SplitR> {
    let r: Vec<u64> = r_of(g)?.into_iter().collect();
    let classes: Vec<PrimeClass> = r
        .par_iter()
        .map(|&p| {
            let concentration_k = concentration_k(g, p, c);
            let quality_jump = quality_jump(g, p, c)?;
            let sharp = concentration_k.is_some() && quality_jump.is_none();
            Ok(PrimeClass { p, concentration_k, quality_jump, sharp })
        })
        .collect::<Result<_>>()?;
    let sharp = classes.iter().filter(|x| x.sharp).map(|x| x.p).collect();
    let flat = classes.iter().filter(|x| !x.sharp).map(|x| x.p).collect();
    Ok(SplitR { sharp, flat, classes })
}

const PATTERN: [(i64, i64); 5] = [(-1, 0), (0, -1), (0, 0), (0, 1), (1, 0)];

/// Whether every edge valuation pair lies in the five-point band around (k, k).
pub fn fits_pattern(pairs: &BTreeSet<(i64, i64)>, k: i64) -> bool {
    pairs.iter().all(|&(x, y)| PATTERN.contains(&(x - k, y - k)))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StructureReport {
    pub structured: bool,
    /// Witness k_p for each prime of R(G) that admits one.
    pub k: BTreeMap<u64, i64>,
    /// Primes of R(G) with no admissible k_p.
    pub failing: Vec<u64>,
}

/// Searches k_p in [min valuation - 1, max valuation + 1] for each p in R(G).
pub fn is_structured(g: &GcdGraph) -> Result<StructureReport> {
    let mut k = BTreeMap::new();
    let mut failing = Vec::new();
    for p in r_of(g)? {
        let pairs = g.edge_valuations(p);
        let lo = pairs.iter().map(|&(x, y)| x.min(y)).min().unwrap_or(0) - 1;
        let hi = pairs.iter().map(|&(x, y)| x.max(y)).max().unwrap_or(0) + 1;
        match (lo..=hi).find(|&kp| fits_pattern(&pairs, kp)) {
            Some(kp) => {
                if kp == 0 {
                    return Err(Error::Internal(format!("k_p = 0 fits at p = {p}, contradicting p in R(G)")));
                }
                k.insert(p, kp);
            }
            None => failing.push(p),
        }
    }
    Ok(StructureReport { structured: failing.is_empty(), k, failing })
}

/// (R+, R-): primes of R(G) with all edge valuations >= 0, resp. <= 0.
pub fn r_plus_minus(g: &GcdGraph) -> Result<(BTreeSet<u64>, BTreeSet<u64>)> {
    let mut plus = BTreeSet::new();
    let mut minus = BTreeSet::new();
    for p in r_of(g)? {
        let pairs = g.edge_valuations(p);
        if pairs.iter().all(|&(x, y)| x >= 0 && y >= 0) {
            plus.insert(p);
        }
        if pairs.iter().all(|&(x, y)| x <= 0 && y <= 0) {
            minus.insert(p);
        }
    }
    Ok((plus, minus))
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExactnessFlags {
    pub exact: bool,
    pub numerator_exact: bool,
    pub denominator_exact: bool,
}

fn exact_over<'a>(
    primes: impl Iterator<Item = &'a u64>,
    v: &BTreeSet<Vertex>,
    w: &BTreeSet<Vertex>,
    f: &BTreeMap<u64, i64>,
    g: &BTreeMap<u64, i64>,
) -> ExactnessFlags {
    let mut out = ExactnessFlags { exact: true, numerator_exact: true, denominator_exact: true };
    for &p in primes {
        for (set, t) in [(v, f[&p]), (w, g[&p])] {
            for x in set {
                out.exact &= e_p(x, p) == t;
                out.numerator_exact &= val_big(x.num(), p) == pos(t);
                out.denominator_exact &= val_big(x.den(), p) == neg(t);
            }
        }
    }
    out
}

/// Exactness of G over all of P.
pub fn exactness(g: &GcdGraph) -> ExactnessFlags {
    exact_over(g.p.iter(), &g.v, &g.w, &g.f, &g.g)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubgraphFlags {
    pub subgraph: bool,
    pub exact_sub: bool,
    pub numerator_exact_sub: bool,
    pub denominator_exact_sub: bool,
}

/// How `sub` sits inside `g`. The exactness flags look only at the new primes
/// P' \ P, on the vertices of `sub`.
pub fn subgraph_relation(sub: &GcdGraph, g: &GcdGraph) -> SubgraphFlags {
    let same_mu = sub.weights.iter().all(|(x, m)| g.weights.get(x) == Some(m));
    let contained = sub.v.is_subset(&g.v) && sub.w.is_subset(&g.w) && sub.e.is_subset(&g.e);
    let data = g.p.is_subset(&sub.p) && g.p.iter().all(|p| sub.f.get(p) == g.f.get(p) && sub.g.get(p) == g.g.get(p));
    if !(same_mu && contained && data) {
        return SubgraphFlags::default();
    }
    let fresh: Vec<u64> = sub.p.difference(&g.p).copied().collect();
    let ex = exact_over(fresh.iter(), &sub.v, &sub.w, &sub.f, &sub.g);
    SubgraphFlags {
        subgraph: true,
        exact_sub: ex.exact,
        numerator_exact_sub: ex.numerator_exact,
        denominator_exact_sub: ex.denominator_exact,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::toy_constants;
    use rational_core::{rat, ReducedRational};

    fn r(n: u64, d: u64) -> Vertex {
        ReducedRational::new(n, d)
    }

    fn single(fv: i64) -> GcdGraph {
        GcdGraph::bipartite([r(2, 1)], [r(2, 1)], [(r(2, 1), r(2, 1))]).unwrap().with_prime(2, fv, 1)
    }

    #[test]
    fn validate_examples() {
        let g = GcdGraph::bipartite([r(3, 1)], [r(5, 2)], [(r(3, 1), r(5, 2))]).unwrap();
        assert!(validate(&g).valid);
        assert!(validate(&single(1)).valid);
        let bad = validate(&single(2));
        assert!(!bad.valid);
        assert!(bad.violations.iter().any(|v| v.clause == "a" && v.prime == 2));
    }

    #[test]
    fn special_examples() {
        let g = GcdGraph::bipartite([r(2, 1), r(4, 1)], [r(2, 1)], [(r(2, 1), r(2, 1)), (r(4, 1), r(2, 1))])
            .unwrap();
        let s = special(&g, 2, 1, 1).unwrap();
        assert_eq!(s.v, [r(2, 1)].into());
        assert_eq!(s.e, [(r(2, 1), r(2, 1))].into());
        assert!(validate(&s).valid);
        assert!(subgraph_relation(&s, &g).exact_sub);
        assert!(special(&g, 2, 5, 5).unwrap().is_trivial());
        assert!(special(&s, 2, 1, 1).is_err());
        let h = GcdGraph::bipartite([r(3, 2)], [r(1, 1)], [(r(3, 2), r(1, 1))]).unwrap();
        assert_eq!(special(&h, 2, -1, 0).unwrap().v, [r(3, 2)].into());
    }

    #[test]
    fn r_examples() {
        let g = GcdGraph::bipartite([r(6, 1)], [r(6, 1)], [(r(6, 1), r(6, 1))]).unwrap().with_prime(2, 1, 1);
        assert_eq!(r_of(&g).unwrap(), [3].into());
        let g = g.with_prime(3, 1, 1);
        assert!(r_of(&g).unwrap().is_empty());
        let d = GcdGraph::bipartite([r(1, 5)], [r(2, 5)], [(r(1, 5), r(2, 5))]).unwrap();
        assert_eq!(r_of(&d).unwrap(), [5].into());
    }

    #[test]
    fn structured_examples() {
        // valuations (1,2) and (2,1) at p = 3
        let g = GcdGraph::bipartite(
            [r(3, 1), r(9, 1)],
            [r(9, 1), r(3, 1)],
            [(r(3, 1), r(9, 1)), (r(9, 1), r(3, 1))],
        )
        .unwrap();
        let s = is_structured(&g).unwrap();
        assert!(s.structured);
        assert!([1, 2].contains(&s.k[&3]));
        assert_eq!(r_plus_minus(&g).unwrap(), ([3].into(), BTreeSet::new()));
        // a (0, 2) edge cannot be banded, but 3 must be in R(G) for it to matter
        let h = GcdGraph::bipartite([r(15, 1)], [r(45, 1)], [(r(15, 1), r(45, 1))]).unwrap().with_prime(5, 1, 1);
        assert!(is_structured(&h).unwrap().structured);
        let bad = GcdGraph::bipartite(
            [r(2, 1), r(18, 1)],
            [r(18, 1), r(2, 1)],
            [(r(2, 1), r(18, 1)), (r(18, 1), r(2, 1)), (r(18, 1), r(18, 1))],
        )
        .unwrap();
        // at 3 the pairs are (0,2), (2,0), (2,2)
        let rep = is_structured(&bad).unwrap();
        assert_eq!(rep.failing, vec![3]);
    }

    #[test]
    fn denominators_go_to_r_minus() {
        let g = GcdGraph::bipartite([r(1, 7)], [r(3, 7)], [(r(1, 7), r(3, 7))]).unwrap();
        let s = is_structured(&g).unwrap();
        assert_eq!(s.k[&7], -1);
        assert_eq!(r_plus_minus(&g).unwrap(), (BTreeSet::new(), [7].into()));
    }

    #[test]
    fn exactness_examples() {
        let g = GcdGraph::bipartite([r(4, 1)], [r(2, 1)], [(r(4, 1), r(2, 1))]).unwrap().with_prime(2, 1, 1);
        assert!(validate(&g).valid);
        let e = exactness(&g);
        assert!(!e.exact && !e.numerator_exact && e.denominator_exact);
        let any = GcdGraph::bipartite([r(4, 1), r(5, 1)], [r(2, 1)], [(r(4, 1), r(2, 1))]).unwrap();
        let sub = any.induced(&[r(4, 1)].into(), &any.w);
        assert!(subgraph_relation(&sub, &any).subgraph);
        assert!(!subgraph_relation(&any, &sub).subgraph);
    }

    #[test]
    fn split_with_huge_c2() {
        // C2 = 10^6 makes the concentration clause automatic
        let c = toy_constants(&rat(3), &rat(2), [rat(1), rat(1_000_000), rat(1), rat(1), rat(1), rat(1), rat(1), rat(1)])
            .unwrap();
        let g = GcdGraph::bipartite([r(3, 1), r(9, 1)], [r(3, 1)], [(r(3, 1), r(3, 1)), (r(9, 1), r(3, 1))]).unwrap();
        let s = split_r(&g, &c).unwrap();
        assert_eq!(s.classes.len(), 1);
        assert!(s.classes[0].concentration_k.is_some());
        // q(G_{9,3}) / q(G) = (1/243 / (1/9+1/243))^3 ... * 3 is far below 2
        assert!(s.sharp.contains(&3));
    }
}
