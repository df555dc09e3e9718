use crate::{Error, Result};
use gcd_graph::quality::theta_parts;
use gcd_graph::util::{cmp_log_form, fmt_vertex, to_f64};
use gcd_graph::{theta_weight, GcdGraph, QualityValue, Vertex};
use num_traits::{One, Zero};
use rational_core::{serde_rational, BigRational};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::collections::BTreeSet;

/// Largest |V| + |W| accepted by exhaustive search unless overridden.
pub const DEFAULT_EXHAUSTIVE_CAP: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Exhaustive,
    Greedy,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Side {
    V,
    W,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Certificate {
    Exhaustive { candidates: u64 },
    /// Vertices in deletion order, written as "n" or "n/d".
    Greedy { deletions: Vec<(Side, String)> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaximalSearchResult {
    pub subgraph: GcdGraph,
    #[serde(with = "serde_rational")]
    pub theta: BigRational,
    pub method: Method,
    pub certificate: Certificate,
    pub weight: QualityValue,
}

/// (mu(E), mu(V), mu(W)) of a candidate.
type Measures = (BigRational, BigRational, BigRational);

/// Exact comparison of theta-weights given by their measures.
pub(crate) fn cmp_weight(a: &Measures, b: &Measures, theta: &BigRational) -> Ordering {
    match (a.0.is_zero(), b.0.is_zero()) {
        (true, true) => return Ordering::Equal,
        (true, false) => return Ordering::Less,
        (false, true) => return Ordering::Greater,
        _ => {}
    }
    let one = BigRational::one();
    let terms = [
        (theta.clone(), &a.0 / &b.0),
        (&one - theta, (&a.1 * &a.2) / (&b.1 * &b.2)),
    ];
    cmp_log_form(&terms, &BigRational::zero())
}

struct Indexed<'a> {
    g: &'a GcdGraph,
    v: Vec<&'a Vertex>,
    w: Vec<&'a Vertex>,
    fv: Vec<f64>,
    fw: Vec<f64>,
    adj: Vec<u64>,
}

impl<'a> Indexed<'a> {
    fn new(g: &'a GcdGraph) -> Self {
        let v: Vec<&Vertex> = g.v.iter().collect();
        let w: Vec<&Vertex> = g.w.iter().collect();
        let adj = v
            .iter()
            .map(|a| w.iter().enumerate().filter(|(_, b)| g.e.contains(&((*a).clone(), (**b).clone()))).fold(0u64, |m, (j, _)| m | 1 << j))
            .collect();
        let fv = v.iter().map(|x| to_f64(&g.mu(x))).collect();
        let fw = w.iter().map(|x| to_f64(&g.mu(x))).collect();
        Self { g, v, w, fv, fw, adj }
    }

    fn log_weight(&self, vm: u64, wm: u64, theta: f64) -> f64 {
        let (mut me, mut mv, mut mw) = (0.0, 0.0, 0.0);
        for (i, x) in self.fv.iter().enumerate() {
            if vm >> i & 1 == 1 {
                mv += x;
                let row = self.adj[i] & wm;
                if row != 0 {
                    me += x * self.fw.iter().enumerate().filter(|(j, _)| row >> j & 1 == 1).map(|(_, y)| y).sum::<f64>();
                }
            }
        }
        if me == 0.0 {
            return f64::NEG_INFINITY;
        }
        for (j, y) in self.fw.iter().enumerate() {
            if wm >> j & 1 == 1 {
                mw += y;
            }
        }
        theta * me.ln() - (theta - 1.0) * (mv.ln() + mw.ln())
    }

    fn sets(&self, vm: u64, wm: u64) -> (BTreeSet<Vertex>, BTreeSet<Vertex>) {
        let pick = |xs: &[&Vertex], m: u64| xs.iter().enumerate().filter(|(i, _)| m >> i & 1 == 1).map(|(_, x)| (*x).clone()).collect();
        (pick(&self.v, vm), pick(&self.w, wm))
    }

    fn measures(&self, vm: u64, wm: u64) -> Measures {
        let (v, w) = self.sets(vm, wm);
        let h = self.g.induced(&v, &w);
        (h.mu_e(), h.mu_v(), h.mu_w())
    }
}

/// Tie-break among equal weights: larger mu(E), more vertices, then the
/// lexicographically smaller (V', W').
fn better(
    a: &(Measures, BTreeSet<Vertex>, BTreeSet<Vertex>),
    b: &(Measures, BTreeSet<Vertex>, BTreeSet<Vertex>),
    theta: &BigRational,
) -> bool {
    cmp_weight(&a.0, &b.0, theta)
        .then_with(|| a.0 .0.cmp(&b.0 .0))
        .then_with(|| (a.1.len() + a.2.len()).cmp(&(b.1.len() + b.2.len())))
        .then_with(|| (&b.1, &b.2).cmp(&(&a.1, &a.2)))
        == Ordering::Greater
}

fn exhaustive(g: &GcdGraph, theta: &BigRational, cap: usize) -> Result<(GcdGraph, u64)> {
    let n = g.vertex_count();
    if n > cap {
        return Err(Error::Limit(format!(
            "exhaustive search is limited to |V|+|W| <= {cap}, got {n}; use greedy mode"
        )));
    }
    if g.e.is_empty() {
        return Ok((g.clone(), 1u64 << n));
    }
    let ix = Indexed::new(g);
    let t = to_f64(theta);
    let (nv, nw) = (ix.v.len() as u32, ix.w.len() as u32);
    let best = (1u64..1 << nv)
        .into_par_iter()
        .map(|vm| (1u64..1 << nw).map(|wm| ix.log_weight(vm, wm, t)).fold(f64::NEG_INFINITY, f64::max))
        .reduce(|| f64::NEG_INFINITY, f64::max);
    let tol = 1e-9 * (1.0 + best.abs());
    let near: Vec<(u64, u64)> = (1u64..1 << nv)
        .into_par_iter()
        .flat_map_iter(|vm| {
            let ix = &ix;
            (1u64..1 << nw).filter(move |&wm| ix.log_weight(vm, wm, t) >= best - tol).map(move |wm| (vm, wm))
        })
        .collect();
    let mut chosen: Option<(Measures, BTreeSet<Vertex>, BTreeSet<Vertex>)> = None;
    for (vm, wm) in near {
        let (v, w) = ix.sets(vm, wm);
        let cand = (ix.measures(vm, wm), v, w);
        if chosen.as_ref().map_or(true, |c| better(&cand, c, theta)) {
            chosen = Some(cand);
        }
    }
    let (_, v, w) = chosen.expect("a non-empty edge set has a positive candidate");
    Ok((g.induced(&v, &w), 1u64 << n))
}

fn measures_of(g: &GcdGraph) -> Measures {
    (g.mu_e(), g.mu_v(), g.mu_w())
}

fn without(g: &GcdGraph, side: Side, x: &Vertex) -> GcdGraph {
    let (mut v, mut w) = (g.v.clone(), g.w.clone());
    match side {
        Side::V => v.remove(x),
        Side::W => w.remove(x),
    };
    g.induced(&v, &w)
}

/// The single-vertex deletion with the largest resulting weight, ties broken by
/// (side, vertex) order.
fn best_deletion(g: &GcdGraph, theta: &BigRational) -> Option<(Side, Vertex, Measures)> {
    let order: Vec<(Side, &Vertex)> =
        g.v.iter().map(|x| (Side::V, x)).chain(g.w.iter().map(|x| (Side::W, x))).collect();
    let cands: Vec<(Side, Vertex, Measures)> = order
        .par_iter()
        .map(|(s, x)| (*s, (*x).clone(), measures_of(&without(g, *s, x))))
        .collect();
    let mut best: Option<(Side, Vertex, Measures)> = None;
    for c in cands {
        if best.as_ref().map_or(true, |b| cmp_weight(&c.2, &b.2, theta) == Ordering::Greater) {
            best = Some(c);
        }
    }
    best
}

fn greedy(g: &GcdGraph, theta: &BigRational) -> (GcdGraph, Vec<(Side, String)>) {
    let mut cur = g.clone();
    let mut log = Vec::new();
    while let Some((side, x, m)) = best_deletion(&cur, theta) {
        if cmp_weight(&m, &measures_of(&cur), theta) != Ordering::Greater {
            break;
        }
        cur = without(&cur, side, &x);
        log.push((side, fmt_vertex(&x)));
    }
    (cur, log)
}

pub fn maximal_subgraph(g: &GcdGraph, theta: &BigRational, method: Method) -> Result<MaximalSearchResult> {
    maximal_subgraph_with(g, theta, method, DEFAULT_EXHAUSTIVE_CAP)
}

/// Maximal subgraph with an explicit cap on |V| + |W| for exhaustive mode.
pub fn maximal_subgraph_with(
    g: &GcdGraph,
    theta: &BigRational,
    method: Method,
    cap: usize,
) -> Result<MaximalSearchResult> {
    theta_parts(theta)?;
    if cap > 62 {
        return Err(Error::Limit(format!("exhaustive cap {cap} is above 62")));
    }
    let (subgraph, certificate) = match method {
        Method::Exhaustive => {
            let (h, n) = exhaustive(g, theta, cap)?;
            (h, Certificate::Exhaustive { candidates: n })
        }
        Method::Greedy => {
            let (h, log) = greedy(g, theta);
            (h, Certificate::Greedy { deletions: log })
        }
    };
    let weight = theta_weight(&subgraph, theta)?;
    Ok(MaximalSearchResult { subgraph, theta: theta.clone(), method, certificate, weight })
}

/// True iff no vertex-induced subgraph of `g` has larger theta-weight.
/// Edge subsets never help, since the weight grows with mu(E) for fixed vertex sets.
pub fn certify_maximal(g: &GcdGraph, theta: &BigRational, cap: usize) -> Result<bool> {
    let (h, _) = exhaustive(g, theta, cap)?;
    Ok(cmp_weight(&measures_of(&h), &measures_of(g), theta) != Ordering::Greater)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReplayReport {
    pub ok: bool,
    pub problems: Vec<String>,
}

/// Re-verifies a stored search result against its input graph.
pub fn replay(g: &GcdGraph, r: &MaximalSearchResult, cap: usize) -> Result<ReplayReport> {
    let mut problems = Vec::new();
    let rel = gcd_graph::subgraph_relation(&r.subgraph, g);
    if !rel.subgraph {
        problems.push("result is not a subgraph of the input".to_string());
    }
    let w = theta_weight(&r.subgraph, &r.theta)?;
    if w != r.weight {
        problems.push("stored weight does not match the subgraph".to_string());
    }
    match &r.certificate {
        Certificate::Exhaustive { candidates } => {
            let (h, n) = exhaustive(g, &r.theta, cap)?;
            if n != *candidates {
                problems.push(format!("candidate count {candidates} differs from {n}"));
            }
            if h != r.subgraph {
                problems.push("exhaustive search selects a different subgraph".to_string());
            }
        }
        Certificate::Greedy { deletions } => {
            let mut cur = g.clone();
            for (i, (side, x)) in deletions.iter().enumerate() {
                let want = best_deletion(&cur, &r.theta);
                let ok = want.as_ref().is_some_and(|(s, y, m)| {
                    s == side && &fmt_vertex(y) == x && cmp_weight(m, &measures_of(&cur), &r.theta) == Ordering::Greater
                });
                if !ok {
                    problems.push(format!("deletion {i} ({side:?} {x}) is not the greedy choice"));
                    break;
                }
                let (_, y, _) = want.unwrap();
                cur = without(&cur, *side, &y);
            }
            if problems.is_empty() {
                if cur != r.subgraph {
                    problems.push("replayed deletions end at a different subgraph".to_string());
                }
                if let Some((_, _, m)) = best_deletion(&cur, &r.theta) {
                    if cmp_weight(&m, &measures_of(&cur), &r.theta) == Ordering::Greater {
                        problems.push("greedy result is not a fixed point".to_string());
                    }
                }
            }
        }
    }
    Ok(ReplayReport { ok: problems.is_empty(), problems })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rational_core::{rat, ReducedRational};

    fn r(n: u64) -> Vertex {
        ReducedRational::integer(n)
    }

    #[test]
    fn complete_graph_is_maximal() {
        let v = [r(1), r(2)];
        let w = [r(3), r(4)];
        let e: Vec<_> = v.iter().flat_map(|a| w.iter().map(move |b| (a.clone(), b.clone()))).collect();
        let g = GcdGraph::bipartite(v, w, e).unwrap().reweighted(|_| rat(1)).unwrap();
        for m in [Method::Exhaustive, Method::Greedy] {
            let res = maximal_subgraph(&g, &rat(3), m).unwrap();
            assert_eq!(res.subgraph, g);
        }
    }

    #[test]
    fn drops_isolated_vertex() {
        let g = GcdGraph::bipartite([r(1), r(2)], [r(3), r(4)], [(r(1), r(3)), (r(2), r(3))])
            .unwrap()
            .reweighted(|_| rat(1))
            .unwrap();
        let res = maximal_subgraph(&g, &rat(3), Method::Exhaustive).unwrap();
        assert_eq!(res.subgraph.w, [r(3)].into());
        assert_eq!(res.subgraph.v.len(), 2);
        assert_eq!(res.certificate, Certificate::Exhaustive { candidates: 16 });
        let gr = maximal_subgraph(&g, &rat(3), Method::Greedy).unwrap();
        assert_eq!(gr.subgraph, res.subgraph);
        assert!(replay(&g, &gr, 16).unwrap().ok);
        assert!(replay(&g, &res, 16).unwrap().ok);
    }

    #[test]
    fn cap_is_enforced() {
        let v: Vec<_> = (1..=9).map(r).collect();
        let w: Vec<_> = (11..=19).map(r).collect();
        let g = GcdGraph::bipartite(v.clone(), w.clone(), [(v[0].clone(), w[0].clone())]).unwrap();
        assert!(matches!(maximal_subgraph(&g, &rat(3), Method::Exhaustive), Err(Error::Limit(_))));
        assert!(maximal_subgraph_with(&g, &rat(3), Method::Exhaustive, 18).is_ok());
    }

    #[test]
    fn tampered_result_fails_replay() {
        let g = GcdGraph::bipartite([r(1), r(2)], [r(3)], [(r(1), r(3))]).unwrap();
        let mut res = maximal_subgraph(&g, &rat(3), Method::Exhaustive).unwrap();
        res.subgraph = g.clone();
        assert!(!replay(&g, &res, 16).unwrap().ok);
        let back: MaximalSearchResult = serde_json::from_str(&serde_json::to_string(&res).unwrap()).unwrap();
        assert_eq!(back, res);
    }
}
