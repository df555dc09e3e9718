//! The two dichotomies: unbalanced edge mass against a quality jump, and a
//! quality increment against concentration at one prime power.

use crate::{Error, Result};
use gcd_graph::structure::concentration_k;
use gcd_graph::util::cmp_log_form;
use gcd_graph::{quality, r_of, special, ConstantsMode, ConstantsSet, GcdGraph, QualityValue};
use graph_search::{maximal_subgraph_with, Method, DEFAULT_EXHAUSTIVE_CAP};
use num_traits::{One, Zero};
use rational_core::{rat, serde_rational, BigRational};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    A,
    B,
    /// Neither branch holds. Only possible with toy constants.
    Violated,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    Subgraph {
        k: i64,
        l: i64,
        graph: GcdGraph,
    },
    Concentration {
        k: i64,
        #[serde(with = "serde_rational")]
        ratio_v: BigRational,
        #[serde(with = "serde_rational")]
        ratio_w: BigRational,
    },
    TailSum {
        k: i64,
        levels: Vec<i64>,
        #[serde(with = "serde_rational")]
        sum: BigRational,
        #[serde(with = "serde_rational")]
        edge_measure: BigRational,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DichotomyOutcome {
    pub lemma: String,
    pub p: u64,
    pub branch: Branch,
    /// For a violated dichotomy, the best candidate found, if any.
    pub witness: Option<Witness>,
    pub quality_before: QualityValue,
    pub quality_after: Option<QualityValue>,
}

/// Which side carries the concentrated valuation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Orientation {
    /// mu(W_{p^k}) is large; the far levels are on W.
    W,
    /// mu(V_{p^k}) is large; the far levels are on V.
    V,
}

pub(crate) fn strict(c: &ConstantsSet) -> bool {
    c.mode != ConstantsMode::Toy
}

/// A maximal subgraph: exhaustive when small enough, greedy otherwise.
/// The flag tells whether maximality is certified.
pub fn maximal_of(g: &GcdGraph, theta: &BigRational) -> Result<(GcdGraph, bool)> {
    if g.vertex_count() <= DEFAULT_EXHAUSTIVE_CAP {
        Ok((maximal_subgraph_with(g, theta, Method::Exhaustive, DEFAULT_EXHAUSTIVE_CAP)?.subgraph, true))
    } else {
        Ok((maximal_subgraph_with(g, theta, Method::Greedy, DEFAULT_EXHAUSTIVE_CAP)?.subgraph, false))
    }
}

pub(crate) fn require_in_r(g: &GcdGraph, p: u64) -> Result<()> {
    if g.is_trivial() {
        return Err(Error::Domain("the graph has no edges".into()));
    }
    if !r_of(g)?.contains(&p) {
        return Err(Error::Domain(format!("{p} is not in R(G)")));
    }
    Ok(())
}

/// Index of the largest quality, first one on ties.
pub(crate) fn best_index(qs: &[&QualityValue]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, q) in qs.iter().enumerate() {
        if best.map_or(true, |b| q.cmp_value(qs[b]) == Ordering::Greater) {
            best = Some(i);
        }
    }
    best
}

pub(crate) struct Candidate {
    pub k: i64,
    pub l: i64,
    pub graph: GcdGraph,
    pub quality: QualityValue,
}

/// Maximal subgraphs of G_{p^k,p^l} over the valuation pairs realized on edges.
pub(crate) fn maximal_specials(g: &GcdGraph, p: u64, theta: &BigRational) -> Result<Vec<Candidate>> {
    let pairs: Vec<(i64, i64)> = g.edge_valuations(p).into_iter().collect();
    pairs
        .par_iter()
        .map(|&(k, l)| {
            let (h, _) = maximal_of(&special(g, p, k, l)?, theta)?;
            let q = quality(&h, theta)?;
            Ok(Candidate { k, l, graph: h, quality: q })
        })
        .collect()
}

/// Few edges between a concentrated level and far levels, or a quality jump.
///
/// With `Orientation::W`, mu(W_{p^k}) / mu(W) >= 1 - C2/p is required and the
/// far levels l satisfy |l - k| >= r + 1; branch A looks for
/// q(G_{p^k,p^l}) > M q(G) and branch B checks
/// sum_l mu(E_{p^k,p^l}) <= mu(E) / (4 p^{1 + tau/4}).
pub fn unbalanced_dichotomy(
    g: &GcdGraph,
    p: u64,
    r: u32,
    k: i64,
    side: Orientation,
    c: &ConstantsSet,
) -> Result<DichotomyOutcome> {
    require_in_r(g, p)?;
    if r == 0 {
        return Err(Error::Domain("r must be at least 1".into()));
    }
    let pr = BigRational::from_integer(num_traits::pow(num_bigint::BigInt::from(p), r as usize));
    if c.c(4).cmp_rational(&pr) != Ordering::Less {
        return Err(Error::Domain(format!("{p}^{r} does not exceed C4")));
    }
    let (near, total) = match side {
        Orientation::W => (g.mu_of(&g.w_at(p, k)), g.mu_w()),
        Orientation::V => (g.mu_of(&g.v_at(p, k)), g.mu_v()),
    };
    if !c.c(2).concentrated(p, &(near / total)) {
        return Err(Error::Domain(format!("level {k} of {p} is not concentrated")));
    }
    let theta = &c.theta;
    let q = quality(g, theta)?;
    let far: Vec<i64> = {
        let (kv, kw) = g.valuations(p);
        let levels = if side == Orientation::W { kw } else { kv };
        levels.into_iter().filter(|l| (l - k).unsigned_abs() > r as u64).collect()
    };
    let build = |l: i64| match side {
        Orientation::W => special(g, p, k, l),
        Orientation::V => special(g, p, l, k),
    };
    let mut sum = BigRational::zero();
    for &l in &far {
        let h = build(l)?;
        let qh = quality(&h, theta)?;
        if qh.cmp_constant(&q, &c.m, false) == Ordering::Greater {
            let (kk, ll) = if side == Orientation::W { (k, l) } else { (l, k) };
            return Ok(DichotomyOutcome {
                lemma: "unbalanced".into(),
                p,
                branch: Branch::A,
                witness: Some(Witness::Subgraph { k: kk, l: ll, graph: h }),
                quality_before: q,
                quality_after: Some(qh),
            });
        }
        sum += h.mu_e();
    }
    let me = g.mu_e();
    let s = BigRational::one() + &c.tau / rat(4);
    // 4 p^s sum <= mu(E)  <=>  s ln p - ln(mu(E) / (4 sum)) <= 0
    let tail_ok = sum.is_zero() || {
        let terms = [(s, rat(p as i64)), (-BigRational::one(), &me / (rat(4) * &sum))];
        cmp_log_form(&terms, &BigRational::zero()) != Ordering::Greater
    };
    let witness = Some(Witness::TailSum { k, levels: far, sum, edge_measure: me });
    if tail_ok {
        return Ok(DichotomyOutcome { lemma: "unbalanced".into(), p, branch: Branch::B, witness, quality_before: q, quality_after: None });
    }
    if strict(c) {
        return Err(Error::Dichotomy(format!("unbalanced dichotomy at p = {p}, k = {k}")));
    }
    Ok(DichotomyOutcome { lemma: "unbalanced".into(), p, branch: Branch::Violated, witness, quality_before: q, quality_after: None })
}

/// A maximal exact subgraph with q(G') >= M^{[f'(p) != g'(p)]} q(G), or a level k
/// holding at least 1 - C2/p of both sides.
fn pick<'a>(xs: &[&'a Candidate]) -> Option<&'a Candidate> {
    best_index(&xs.iter().map(|x| &x.quality).collect::<Vec<_>>()).map(|i| xs[i])
}

pub fn main_dichotomy(g: &GcdGraph, p: u64, c: &ConstantsSet) -> Result<DichotomyOutcome> {
    require_in_r(g, p)?;
    if c.c(2).cmp_rational(&rat(p as i64)) != Ordering::Less {
        return Err(Error::Domain(format!("{p} does not exceed C2")));
    }
    let theta = &c.theta;
    let q = quality(g, theta)?;
    let cands = maximal_specials(g, p, theta)?;
    let passing: Vec<&Candidate> = cands
        .iter()
        .filter(|x| {
            let ord = if x.k != x.l { x.quality.cmp_constant(&q, &c.m, false) } else { x.quality.cmp_value(&q) };
            ord != Ordering::Less
        })
        .collect();
    if let Some(best) = pick(&passing) {
        return Ok(DichotomyOutcome {
            lemma: "main".into(),
            p,
            branch: Branch::A,
            witness: Some(Witness::Subgraph { k: best.k, l: best.l, graph: best.graph.clone() }),
            quality_before: q,
            quality_after: Some(best.quality.clone()),
        });
    }
    if let Some(k) = concentration_k(g, p, c) {
        let ratio_v = g.mu_of(&g.v_at(p, k)) / g.mu_v();
        let ratio_w = g.mu_of(&g.w_at(p, k)) / g.mu_w();
        return Ok(DichotomyOutcome {
            lemma: "main".into(),
            p,
            branch: Branch::B,
            witness: Some(Witness::Concentration { k, ratio_v, ratio_w }),
            quality_before: q,
            quality_after: None,
        });
    }
    if strict(c) {
        return Err(Error::Dichotomy(format!("main dichotomy at p = {p}")));
    }
    let all: Vec<&Candidate> = cands.iter().collect();
    let best = pick(&all);
    Ok(DichotomyOutcome {
        lemma: "main".into(),
        p,
        branch: Branch::Violated,
        witness: best.map(|b| Witness::Subgraph { k: b.k, l: b.l, graph: b.graph.clone() }),
        quality_before: q,
        quality_after: best.map(|b| b.quality.clone()),
    })
}

/// mu(V_{p^k}) / mu(V) and mu(W_{p^k}) / mu(W).
pub fn level_ratios(g: &GcdGraph, p: u64, k: i64) -> (BigRational, BigRational) {
    (g.mu_of(&g.v_at(p, k)) / g.mu_v(), g.mu_of(&g.w_at(p, k)) / g.mu_w())
}
