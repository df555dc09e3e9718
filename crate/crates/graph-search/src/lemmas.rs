use crate::maximal::{cmp_weight, maximal_subgraph_with, Method, Side};
use crate::{Error, Result};
use gcd_graph::quality::theta_parts;
use gcd_graph::util::{cmp_log_form, fmt_vertex};
use gcd_graph::{edge_density, theta_weight, GcdGraph, QualityValue, Vertex};
use num_traits::{One, Zero};
use rational_core::{serde_rational, BigRational};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::collections::BTreeSet;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConnectivityFailure {
    pub side: Side,
    pub vertex: String,
    #[serde(with = "serde_rational")]
    pub neighbourhood: BigRational,
    #[serde(with = "serde_rational")]
    pub required: BigRational,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConnectivityReport {
    /// eta = (theta - 1)/theta * delta.
    #[serde(with = "serde_rational")]
    pub eta: BigRational,
    pub connected: bool,
    pub failures: Vec<ConnectivityFailure>,
}

/// Checks mu(Gamma(v)) >= eta mu(W) and mu(Gamma(w)) >= eta mu(V) with
/// eta = (theta - 1)/theta * delta, exactly.
pub fn check_connectivity(g: &GcdGraph, theta: &BigRational) -> Result<ConnectivityReport> {
    theta_parts(theta)?;
    if g.is_trivial() {
        return Err(Error::Domain("connectivity needs a non-trivial graph".into()));
    }
    let eta = (theta - BigRational::one()) / theta * edge_density(g);
    let mut failures = Vec::new();
    let (mv, mw) = (g.mu_v(), g.mu_w());
    for (side, set, total) in [(Side::V, &g.v, &mw), (Side::W, &g.w, &mv)] {
        let required = &eta * total;
        for x in set {
            let nb = match side {
                Side::V => g.neighbours_of_v(x),
                Side::W => g.neighbours_of_w(x),
            };
            let m = g.mu_of(&nb);
            if m < required {
                failures.push(ConnectivityFailure {
                    side,
                    vertex: fmt_vertex(x),
                    neighbourhood: m,
                    required: required.clone(),
                });
            }
        }
    }
    Ok(ConnectivityReport { eta, connected: failures.is_empty(), failures })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CommonNeighborReport {
    pub subgraph: GcdGraph,
    pub anchor: String,
    pub side: Side,
    /// (a): every vertex of the opposite side is joined to the anchor.
    pub adjacent_to_anchor: bool,
    /// (b): no isolated vertex on the anchor's side.
    pub no_isolated: bool,
    /// (c): mu^(theta)(G) <= (1 - 1/theta)^(-theta) mu^(theta-1)(G').
    pub weight_inequality: bool,
    pub weight_before: QualityValue,
    pub weight_after: QualityValue,
    pub holds: bool,
}

/// Restricts the opposite side to the anchor's neighbourhood and takes a
/// (theta - 1)-maximal subgraph, then checks (a), (b) and (c).
pub fn common_neighbor(
    g: &GcdGraph,
    anchor: &Vertex,
    side: Side,
    theta: &BigRational,
    method: Method,
    cap: usize,
) -> Result<CommonNeighborReport> {
    let two = BigRational::from_integer(2.into());
    if theta <= &two {
        return Err(Error::Domain(format!("theta must exceed 2, got {theta}")));
    }
    if g.is_trivial() {
        return Err(Error::Domain("common_neighbor needs a non-trivial graph".into()));
    }
    let g1 = match side {
        Side::W if g.w.contains(anchor) => g.induced(&g.neighbours_of_w(anchor), &g.w),
        Side::V if g.v.contains(anchor) => g.induced(&g.v, &g.neighbours_of_v(anchor)),
        _ => return Err(Error::Domain(format!("anchor {anchor} is not on side {side:?}"))),
    };
    let t1 = theta - BigRational::one();
    let h = maximal_subgraph_with(&g1, &t1, method, cap)?.subgraph;
    let (adjacent_to_anchor, no_isolated) = match side {
        Side::W => (
            h.v.iter().all(|v| h.e.contains(&(v.clone(), anchor.clone()))),
            h.w.iter().all(|w| !h.neighbours_of_w(w).is_empty()),
        ),
        Side::V => (
            h.w.iter().all(|w| h.e.contains(&(anchor.clone(), w.clone()))),
            h.v.iter().all(|v| !h.neighbours_of_v(v).is_empty()),
        ),
    };
    let before = theta_weight(g, theta)?;
    let after = theta_weight(&h, &t1)?;
    // after >= before * ((theta - 1)/theta)^theta
    let factor = &t1 / theta;
    let weight_inequality = after.cmp_scaled_form(&before, &[(theta.clone(), factor)], &BigRational::zero())
        != Ordering::Less;
    Ok(CommonNeighborReport {
        subgraph: h,
        anchor: fmt_vertex(anchor),
        side,
        adjacent_to_anchor,
        no_isolated,
        weight_inequality,
        holds: adjacent_to_anchor && no_isolated && weight_inequality,
        weight_before: before,
        weight_after: after,
    })
}

/// mu(E(A, B)) <= eta^(2 - 2/theta) mu(E), given mu(A) <= eta mu(V) and mu(B) <= eta mu(W).
pub fn small_set_edges(
    g: &GcdGraph,
    a: &BTreeSet<Vertex>,
    b: &BTreeSet<Vertex>,
    eta: &BigRational,
    theta: &BigRational,
) -> Result<bool> {
    theta_parts(theta)?;
    if !(eta > &BigRational::zero() && eta <= &BigRational::one()) {
        return Err(Error::Domain(format!("eta must lie in (0, 1], got {eta}")));
    }
    if !a.is_subset(&g.v) || !b.is_subset(&g.w) {
        return Err(Error::Domain("A and B must be subsets of V and W".into()));
    }
    if g.mu_of(a) > eta * g.mu_v() || g.mu_of(b) > eta * g.mu_w() {
        return Err(Error::Domain("mu(A) <= eta mu(V) and mu(B) <= eta mu(W) are required".into()));
    }
    Ok(small_set_holds(g, a, b, eta, theta))
}

fn small_set_holds(g: &GcdGraph, a: &BTreeSet<Vertex>, b: &BTreeSet<Vertex>, eta: &BigRational, theta: &BigRational) -> bool {
    let eab = g.mu_edges(g.e.iter().filter(|(x, y)| a.contains(x) && b.contains(y)));
    if eab.is_zero() {
        return true;
    }
    let one = BigRational::one();
    // theta ln(eab / e) - (2 theta - 2) ln eta <= 0
    let terms = [(theta.clone(), eab / g.mu_e()), (-(theta + theta - &one - &one), eta.clone())];
    cmp_log_form(&terms, &BigRational::zero()) != Ordering::Greater
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SmallSetReport {
    #[serde(with = "serde_rational")]
    pub eta: BigRational,
    pub pairs_checked: u64,
    pub violations: Vec<(Vec<String>, Vec<String>)>,
}

/// Runs small_set_edges over every admissible (A, B).
pub fn small_set_sweep(g: &GcdGraph, eta: &BigRational, theta: &BigRational, cap: usize) -> Result<SmallSetReport> {
    theta_parts(theta)?;
    if g.vertex_count() > cap.min(40) {
        return Err(Error::Limit(format!("small_set_sweep is limited to |V|+|W| <= {}", cap.min(40))));
    }
    let v: Vec<&Vertex> = g.v.iter().collect();
    let w: Vec<&Vertex> = g.w.iter().collect();
    let pick = |xs: &[&Vertex], m: u64| -> BTreeSet<Vertex> {
        xs.iter().enumerate().filter(|(i, _)| m >> i & 1 == 1).map(|(_, x)| (*x).clone()).collect()
    };
    let (lim_v, lim_w) = (eta * g.mu_v(), eta * g.mu_w());
    let bs: Vec<BTreeSet<Vertex>> =
        (0u64..1 << w.len()).map(|m| pick(&w, m)).filter(|b| g.mu_of(b) <= lim_w).collect();
    let rows: Vec<(u64, Vec<(Vec<String>, Vec<String>)>)> = (0u64..1 << v.len())
        .into_par_iter()
        .map(|m| {
            let a = pick(&v, m);
            if g.mu_of(&a) > lim_v {
                return (0, Vec::new());
            }
            let bad = bs
                .iter()
                .filter(|b| !small_set_holds(g, &a, b, eta, theta))
                .map(|b| (a.iter().map(fmt_vertex).collect(), b.iter().map(fmt_vertex).collect()))
                .collect();
            (bs.len() as u64, bad)
        })
        .collect();
    let pairs_checked = rows.iter().map(|r| r.0).sum();
    let violations = rows.into_iter().flat_map(|r| r.1).collect();
    Ok(SmallSetReport { eta: eta.clone(), pairs_checked, violations })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonotonicityReport {
    pub density_increase: bool,
    /// mu^(theta')(G')/mu^(theta')(G) >= mu^(theta)(G')/mu^(theta)(G).
    pub ratio_inequality: bool,
    pub ratio_equal: bool,
}

/// For a subgraph G' of non-trivial G with larger theta-weight, checks that the
/// density increases and the weight ratio does not shrink at theta' >= theta.
pub fn weight_monotonicity(
    g: &GcdGraph,
    sub: &GcdGraph,
    theta: &BigRational,
    theta2: &BigRational,
) -> Result<MonotonicityReport> {
    theta_parts(theta)?;
    if theta2 < theta {
        return Err(Error::Domain("theta' must be at least theta".into()));
    }
    if g.is_trivial() || !gcd_graph::subgraph_relation(sub, g).subgraph {
        return Err(Error::Domain("G must be non-trivial and G' a subgraph of G".into()));
    }
    let m = |h: &GcdGraph| (h.mu_e(), h.mu_v(), h.mu_w());
    if cmp_weight(&m(sub), &m(g), theta) != Ordering::Greater {
        return Err(Error::Domain("G' must have strictly larger theta-weight than G".into()));
    }
    let density_increase = edge_density(sub) > edge_density(g);
    let (a2, a) = (theta_weight(sub, theta2)?, theta_weight(g, theta2)?);
    let (b2, b) = (theta_weight(sub, theta)?, theta_weight(g, theta)?);
    let ord = ratio_cmp([&a2, &a, &b2, &b]);
    Ok(MonotonicityReport {
        density_increase,
        ratio_inequality: ord != Ordering::Less,
        ratio_equal: ord == Ordering::Equal,
    })
}

/// Sign of ln(x0/x1) - ln(x2/x3) for four non-zero weights.
fn ratio_cmp(x: [&QualityValue; 4]) -> Ordering {
    QualityValue::cmp_products(&[x[0], x[3]], &[x[1], x[2]], &[], &BigRational::zero())
}

/// Every lemma check on the exhaustive maximal subgraph of one graph.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LemmaSuiteReport {
    #[serde(with = "serde_rational")]
    pub theta: BigRational,
    pub vertices: usize,
    pub trivial: bool,
    pub connectivity: bool,
    pub common_neighbor_anchors: usize,
    pub common_neighbor: bool,
    pub small_sets: bool,
    pub small_set_pairs: u64,
    pub violations: Vec<String>,
}

pub const SUITE_ETAS: [(i64, i64); 3] = [(1, 4), (1, 2), (1, 1)];

pub fn lemma_suite(g: &GcdGraph, theta: &BigRational, cap: usize) -> Result<LemmaSuiteReport> {
    let h = maximal_subgraph_with(g, theta, Method::Exhaustive, cap)?.subgraph;
    let mut rep = LemmaSuiteReport {
        theta: theta.clone(),
        vertices: g.vertex_count(),
        trivial: h.is_trivial(),
        connectivity: true,
        common_neighbor_anchors: 0,
        common_neighbor: true,
        small_sets: true,
        small_set_pairs: 0,
        violations: Vec::new(),
    };
    if h.is_trivial() {
        return Ok(rep);
    }
    let c = check_connectivity(&h, theta)?;
    if !c.connected {
        rep.connectivity = false;
        rep.violations.push(format!("connectivity: {:?}", c.failures));
    }
    let anchors = h.w.iter().map(|x| (Side::W, x)).chain(h.v.iter().map(|x| (Side::V, x)));
    for (side, x) in anchors {
        rep.common_neighbor_anchors += 1;
        let cn = common_neighbor(&h, x, side, theta, Method::Exhaustive, cap)?;
        if !cn.holds {
            rep.common_neighbor = false;
            rep.violations.push(format!(
                "common_neighbor at {side:?} {}: a={} b={} c={}",
                cn.anchor, cn.adjacent_to_anchor, cn.no_isolated, cn.weight_inequality
            ));
        }
    }
    for (n, d) in SUITE_ETAS {
        let eta = BigRational::new(n.into(), d.into());
        let s = small_set_sweep(&h, &eta, theta, cap)?;
        rep.small_set_pairs += s.pairs_checked;
        if !s.violations.is_empty() {
            rep.small_sets = false;
            rep.violations.push(format!("small_set_edges at eta = {eta}: {:?}", s.violations));
        }
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maximal::{maximal_subgraph, DEFAULT_EXHAUSTIVE_CAP};
    use rational_core::{rat, ratio_of, ReducedRational};

    fn r(n: u64) -> Vertex {
        ReducedRational::integer(n)
    }

    fn complete(nv: u64, nw: u64) -> GcdGraph {
        let v: Vec<_> = (1..=nv).map(r).collect();
        let w: Vec<_> = (101..101 + nw).map(r).collect();
        let e: Vec<_> = v.iter().flat_map(|a| w.iter().map(move |b| (a.clone(), b.clone()))).collect();
        GcdGraph::bipartite(v, w, e).unwrap()
    }

    #[test]
    fn complete_graph_connectivity() {
        let g = complete(3, 2);
        let rep = check_connectivity(&g, &rat(3)).unwrap();
        assert!(rep.connected);
        assert_eq!(rep.eta, ratio_of(2, 3));
        let rep2 = check_connectivity(&g, &ratio_of(201, 100)).unwrap();
        assert!(rep2.connected);
    }

    #[test]
    fn star_common_neighbor() {
        let w0 = r(7);
        let g = GcdGraph::bipartite([r(1), r(2), r(3)], [w0.clone()], (1..=3).map(|i| (r(i), w0.clone()))).unwrap();
        let rep = common_neighbor(&g, &w0, Side::W, &rat(3), Method::Exhaustive, 16).unwrap();
        assert!(rep.holds, "{rep:?}");
        assert_eq!(rep.subgraph, g);
        let c = complete(3, 3);
        let rep = common_neighbor(&c, &r(101), Side::W, &rat(3), Method::Exhaustive, 16).unwrap();
        assert_eq!(rep.subgraph.v, c.v);
        let rep = common_neighbor(&c, &r(1), Side::V, &ratio_of(21, 10), Method::Exhaustive, 16).unwrap();
        assert!(rep.holds);
        assert!(common_neighbor(&c, &r(1), Side::W, &rat(3), Method::Exhaustive, 16).is_err());
        assert!(common_neighbor(&c, &r(101), Side::W, &rat(2), Method::Exhaustive, 16).is_err());
    }

    #[test]
    fn small_sets() {
        let g = complete(4, 4).reweighted(|_| rat(1)).unwrap();
        assert!(small_set_edges(&g, &g.v, &g.w, &rat(1), &rat(3)).unwrap());
        assert!(small_set_edges(&g, &BTreeSet::new(), &g.w, &rat(1), &rat(3)).unwrap());
        let half_v: BTreeSet<_> = g.v.iter().take(2).cloned().collect();
        let half_w: BTreeSet<_> = g.w.iter().take(2).cloned().collect();
        assert!(small_set_edges(&g, &half_v, &half_w, &ratio_of(1, 2), &rat(3)).unwrap());
        assert!(small_set_edges(&g, &g.v, &half_w, &ratio_of(1, 2), &rat(3)).is_err());
        let rep = small_set_sweep(&g, &ratio_of(1, 2), &rat(3), DEFAULT_EXHAUSTIVE_CAP).unwrap();
        assert!(rep.violations.is_empty());
        // 11 subsets of measure <= 2 on each side
        assert_eq!(rep.pairs_checked, 121);
    }

    #[test]
    fn monotonicity_examples() {
        let g = GcdGraph::bipartite([r(1), r(2)], [r(3), r(4)], [(r(1), r(3)), (r(2), r(3))])
            .unwrap()
            .reweighted(|_| rat(1))
            .unwrap();
        let sub = maximal_subgraph(&g, &rat(3), Method::Exhaustive).unwrap().subgraph;
        let rep = weight_monotonicity(&g, &sub, &rat(3), &rat(4)).unwrap();
        assert!(rep.density_increase && rep.ratio_inequality && !rep.ratio_equal);
        assert!(weight_monotonicity(&g, &sub, &rat(3), &rat(3)).unwrap().ratio_equal);
        assert!(weight_monotonicity(&g, &g, &rat(3), &rat(3)).is_err());
    }
}
