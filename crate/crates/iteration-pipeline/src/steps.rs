//! Single iteration steps on GCD graphs, each returning the chosen subgraph and
//! the checks made on it.

use crate::assertion::{const_pow, constant_bound, loss_bound, Assertion, Kind, LossFactor};
use crate::dichotomy::{best_index, main_dichotomy, maximal_of, maximal_specials, require_in_r, strict, Branch, Witness};
use crate::{Error, Result};
use gcd_graph::structure::{concentration_k, quality_jump};
use gcd_graph::util::{e_p, fmt_vertex};
use gcd_graph::{
    is_structured, quality, r_of, r_plus_minus, special, split_r, subgraph_relation, theta_weight, validate, Constant,
    ConstantsSet, Edge, GcdGraph, QualityValue, Vertex,
};
use graph_search::{certify_maximal, DEFAULT_EXHAUSTIVE_CAP};
use num_traits::{One, Zero};
use rational_core::{fmt_rational, rat, ratio, serde_rational, BigRational};
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Minus,
    Plus,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrimeWeight {
    pub p: u64,
    #[serde(with = "serde_rational")]
    pub a: BigRational,
}

/// One row a_{p,m} of non-negative prime weights.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WeightRow {
    /// Listed primes; every other prime has weight 0.
    Table { entries: Vec<PrimeWeight> },
    /// a_p = 1/p for p > z and 0 otherwise.
    AboveZ {
        #[serde(with = "serde_rational")]
        z: BigRational,
    },
}

impl WeightRow {
    pub fn a(&self, p: u64) -> BigRational {
        match self {
            WeightRow::Table { entries } => {
                entries.iter().find(|e| e.p == p).map(|e| e.a.clone()).unwrap_or_else(BigRational::zero)
            }
            WeightRow::AboveZ { z } => {
                if &rat(p as i64) > z {
                    BigRational::new(1.into(), p.into())
                } else {
                    BigRational::zero()
                }
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum Op {
    /// Adds one prime of R(G) below C6 to P.
    SmallPrime { p: u64 },
    /// Replaces G by a maximal subgraph with the same data.
    Maximal,
    /// One application of the quality-increment dichotomy at a prime of the flat part.
    Iter1 { p: u64, branch: Branch, u: usize },
    /// Band restriction and averaging filter, then a maximal subgraph.
    Structure {
        rows: Vec<WeightRow>,
        #[serde(with = "prime_keys")]
        k: BTreeMap<u64, i64>,
    },
    /// One structured step at p.
    Structured {
        p: u64,
        k_p: i64,
        case: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        sign: Option<Sign>,
    },
    /// Restriction to the neighbourhood of a W anchor and a (theta - 1)-maximal subgraph.
    CommonNeighbor { anchor: String },
}

/// Prime-keyed maps as string-keyed objects; integer keys do not survive a flattened enum.
mod prime_keys {
    use serde::{de::Error, Deserialize, Deserializer, Serialize, Serializer};
    use std::collections::BTreeMap;

    pub fn serialize<S: Serializer>(m: &BTreeMap<u64, i64>, s: S) -> Result<S::Ok, S::Error> {
        m.iter().map(|(p, k)| (p.to_string(), *k)).collect::<BTreeMap<_, _>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BTreeMap<u64, i64>, D::Error> {
        BTreeMap::<String, i64>::deserialize(d)?
            .into_iter()
            .map(|(p, k)| p.parse().map(|p| (p, k)).map_err(D::Error::custom))
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    #[serde(flatten)]
    pub op: Op,
    pub quality_before: QualityValue,
    pub quality_after: QualityValue,
    pub assertions: Vec<Assertion>,
    pub output: GcdGraph,
}

/// The result of a proposition that chains several steps.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Progress {
    pub steps: Vec<StepRecord>,
    pub graph: GcdGraph,
    pub assertions: Vec<Assertion>,
}

pub type Step = StepRecord;

fn record(input: &GcdGraph, op: Op, output: GcdGraph, c: &ConstantsSet) -> Result<StepRecord> {
    let assertions = check_step(input, &op, &output, c)?;
    Ok(StepRecord {
        quality_before: quality(input, &c.theta)?,
        quality_after: quality(&output, &c.theta)?,
        op,
        assertions,
        output,
    })
}

fn above_c6(c: &ConstantsSet, p: u64) -> bool {
    c.c(6).cmp_rational(&rat(p as i64)) == Ordering::Less
}

fn fmt_set(s: &BTreeSet<u64>) -> String {
    format!("{{{}}}", s.iter().map(|p| p.to_string()).collect::<Vec<_>>().join(","))
}

fn certify(g: &GcdGraph, theta: &BigRational) -> Result<Option<bool>> {
    if g.vertex_count() > DEFAULT_EXHAUSTIVE_CAP {
        return Ok(None);
    }
    Ok(Some(certify_maximal(g, theta, DEFAULT_EXHAUSTIVE_CAP)?))
}

fn maximal_check(name: &str, g: &GcdGraph, theta: &BigRational) -> Result<Assertion> {
    Ok(match certify(g, theta)? {
        Some(ok) => Assertion::structural(name, ok, "exhaustive", "no heavier induced subgraph"),
        None => Assertion::skipped(name, Kind::Structural, "graph exceeds the exhaustive cap"),
    })
}

fn common_checks(input: &GcdGraph, output: &GcdGraph) -> Vec<Assertion> {
    let v = validate(output);
    let rel = subgraph_relation(output, input);
    vec![
        Assertion::structural("validates", v.valid, v.violations.len(), 0),
        Assertion::structural("subgraph", rel.subgraph, rel.subgraph, true),
        Assertion::new("non-trivial", Kind::Bound, !output.is_trivial(), output.e.len(), ">= 1"),
    ]
}

fn same_data(input: &GcdGraph, output: &GcdGraph) -> Assertion {
    let ok = input.p == output.p && input.f == output.f && input.g == output.g;
    Assertion::structural("same multiplicative data", ok, fmt_set(&output.p), fmt_set(&input.p))
}

fn new_primes(input: &GcdGraph, output: &GcdGraph) -> BTreeSet<u64> {
    output.p.difference(&input.p).copied().collect()
}

fn r_below_c6(g: &GcdGraph, c: &ConstantsSet) -> Result<BTreeSet<u64>> {
    Ok(r_of(g)?.into_iter().filter(|&p| !above_c6(c, p)).collect())
}

/// q(G') >= M^U q(G) for U counting asymmetric new primes.
fn asymmetric_count(input: &GcdGraph, output: &GcdGraph) -> usize {
    new_primes(input, output).iter().filter(|p| output.f[p] != output.g[p]).count()
}

/// sum over primes p of R dividing the ratio v/w of a_p.
fn a_of_ratio(row: &WeightRow, r: &BTreeSet<u64>, v: &Vertex, w: &Vertex) -> BigRational {
    let x = ratio(v, w);
    r.iter()
        .filter(|&&p| {
            let pb = num_bigint::BigUint::from(p);
            (x.num() % &pb).is_zero() || (x.den() % &pb).is_zero()
        })
        .fold(BigRational::zero(), |s, &p| s + row.a(p))
}

/// C8 n sum_{p in R} a_p / p.
fn clause_b_bound(row: &WeightRow, r: &BTreeSet<u64>, n: usize) -> BigRational {
    let s = r.iter().fold(BigRational::zero(), |s, &p| s + row.a(p) / rat(p as i64));
    s * rat(n as i64)
}

pub(crate) fn below_c8(c8: &Constant, lhs: &BigRational, base: &BigRational) -> bool {
    if base.is_zero() {
        return lhs.is_zero();
    }
    // lhs <= C8 base  <=>  C8 >= lhs / base
    c8.cmp_rational(&(lhs / base)) != Ordering::Less
}

fn in_band(x: i64, y: i64, k: i64) -> bool {
    matches!((x - k, y - k), (-1, 0) | (0, -1) | (0, 0) | (0, 1) | (1, 0))
}

/// Recomputes every check for a step from its input, its recorded op and its output.
pub fn check_step(input: &GcdGraph, op: &Op, output: &GcdGraph, c: &ConstantsSet) -> Result<Vec<Assertion>> {
    let theta = &c.theta;
    let q_in = quality(input, theta)?;
    let q_out = quality(output, theta)?;
    let mut out = common_checks(input, output);
    let rel = subgraph_relation(output, input);
    match op {
        Op::SmallPrime { p } => {
            let r_in = r_of(input)?;
            out.push(Assertion::structural("p in R(G)", r_in.contains(p), p, fmt_set(&r_in)));
            out.push(Assertion::structural("exact subgraph", rel.exact_sub, rel.exact_sub, true));
            let mut want = input.p.clone();
            want.insert(*p);
            out.push(Assertion::structural("P' = P + {p}", output.p == want, fmt_set(&output.p), fmt_set(&want)));
            let r_out = r_of(output)?;
            let ok = r_out.iter().all(|x| x != p && r_in.contains(x));
            out.push(Assertion::structural("R(G') in R(G) - {p}", ok, fmt_set(&r_out), fmt_set(&r_in)));
            out.push(constant_bound("q(G') >= q(G)/C5", &q_out, &q_in, c.c(5), true));
        }
        Op::Maximal => {
            out.push(same_data(input, output));
            out.push(maximal_check("maximal", output, theta)?);
            let ok = theta_weight(output, theta)?.cmp_value(&theta_weight(input, theta)?) != Ordering::Less;
            out.push(Assertion::structural("weight does not decrease", ok, fmt_quality_of(output, theta)?, fmt_quality_of(input, theta)?));
        }
        Op::Iter1 { p, branch, u } => {
            let r_in = r_of(input)?;
            let small = r_below_c6(input, c)?;
            out.push(Assertion::structural("R(G) above C6", small.is_empty(), fmt_set(&small), "{}"));
            let split = split_r(input, c)?;
            out.push(Assertion::structural("p in flat part", split.flat.contains(p), p, fmt_set(&split.flat)));
            out.push(Assertion::structural("exact subgraph", rel.exact_sub, rel.exact_sub, true));
            out.push(maximal_check("maximal", output, theta)?);
            let fresh = new_primes(input, output);
            let ok = !fresh.is_empty() && fresh.is_subset(&r_in) && input.p.is_subset(&output.p);
            out.push(Assertion::structural("P < P' <= P + R(G)", ok, fmt_set(&output.p), fmt_set(&r_in)));
            let r_out = r_of(output)?;
            let ok = r_out.is_subset(&r_in) && r_out.len() < r_in.len();
            out.push(Assertion::structural("R(G') < R(G)", ok, fmt_set(&r_out), fmt_set(&r_in)));
            let uu = asymmetric_count(input, output);
            out.push(Assertion::structural("U counts asymmetric new primes", uu == *u, u, uu));
            let bound = constant_bound("q(G') >= M^U q(G)", &q_out, &q_in, &const_pow(&c.m, *u as i64), false);
            let agree = (*branch == Branch::A) == bound.held();
            out.push(Assertion::structural("branch agrees with the bound", agree, format!("{branch:?}"), bound.held()));
            out.push(bound);
        }
        Op::Structure { rows, k } => {
            let small = r_below_c6(input, c)?;
            out.push(Assertion::structural("R(G) above C6", small.is_empty(), fmt_set(&small), "{}"));
            let split = split_r(input, c)?;
            out.push(Assertion::structural("flat part empty", split.flat.is_empty(), fmt_set(&split.flat), "{}"));
            let want: BTreeMap<u64, i64> =
                split.classes.iter().filter_map(|x| x.concentration_k.map(|kk| (x.p, kk))).collect();
            out.push(Assertion::structural("k_p from concentration", &want == k, format!("{k:?}"), format!("{want:?}")));
            out.push(same_data(input, output));
            out.push(maximal_check("maximal", output, theta)?);
            let st = is_structured(output)?;
            out.push(Assertion::structural("structured", st.structured, format!("{:?}", st.failing), "[]"));
            let r_in = r_of(input)?;
            for (m, row) in rows.iter().enumerate() {
                let base = clause_b_bound(row, &r_in, rows.len());
                let worst = output
                    .e
                    .iter()
                    .map(|(v, w)| a_of_ratio(row, &r_in, v, w))
                    .max()
                    .unwrap_or_else(BigRational::zero);
                let ok = below_c8(c.c(8), &worst, &base);
                out.push(
                    Assertion::structural("edge sums within C8 n sum a_p/p", ok, fmt_rational(&worst), format!("C8 * {}", fmt_rational(&base)))
                        .on(format!("row {}", m + 1)),
                );
            }
            out.push(constant_bound("q(G') >= q(G)/2", &q_out, &q_in, &Constant::rational(rat(2)), true));
        }
        Op::Structured { p, k_p, sign, .. } => {
            let r_in = r_of(input)?;
            out.push(Assertion::structural("p in R(G)", r_in.contains(p), p, fmt_set(&r_in)));
            let pairs = input.edge_valuations(*p);
            let band = pairs.iter().all(|&(x, y)| in_band(x, y, *k_p));
            out.push(Assertion::structural("edge valuations in the band of k_p", band, format!("{pairs:?}"), k_p));
            out.push(Assertion::structural("p above C6", above_c6(c, *p), p, "C6"));
            let mut want = input.p.clone();
            want.insert(*p);
            out.push(Assertion::structural("(a) P' = P + {p}", output.p == want, fmt_set(&output.p), fmt_set(&want)));
            let r_out = r_of(output)?;
            let ok = r_out.iter().all(|x| x != p && r_in.contains(x));
            out.push(Assertion::structural("(b) R(G') in R(G) - {p}", ok, fmt_set(&r_out), fmt_set(&r_in)));
            let (fp, gp) = (output.f.get(p).copied().unwrap_or(0), output.g.get(p).copied().unwrap_or(0));
            let ok = (k_p - 1..=k_p + 1).contains(&fp) && (k_p - 1..=k_p + 1).contains(&gp);
            out.push(Assertion::structural("(c) f'(p), g'(p) within 1 of k_p", ok, format!("({fp}, {gp})"), k_p));
            let (ok, what) = if *k_p > 0 {
                (rel.denominator_exact_sub, "denominator-exact")
            } else {
                (rel.numerator_exact_sub, "numerator-exact")
            };
            out.push(Assertion::structural("(d) exactness", ok, what, k_p));
            out.push(maximal_check("maximal", output, theta)?);
            if let Some(s) = sign {
                let (pi, mi) = r_plus_minus(input)?;
                let (po, mo) = r_plus_minus(output)?;
                let (same_in, same_out, other_in, other_out) = match s {
                    Sign::Minus => (&mi, &mo, &pi, &po),
                    Sign::Plus => (&pi, &po, &mi, &mo),
                };
                let signs = match s {
                    Sign::Minus => fp <= 0 && gp <= 0,
                    Sign::Plus => fp >= 0 && gp >= 0,
                };
                out.push(Assertion::structural("signs of f'(p), g'(p)", signs, format!("({fp}, {gp})"), format!("{s:?}")));
                let ok = same_out.is_subset(same_in) && same_out.len() < same_in.len();
                out.push(Assertion::structural("R_sign shrinks", ok, fmt_set(same_out), fmt_set(same_in)));
                let ok = other_out.is_subset(other_in);
                out.push(Assertion::structural("R_other does not grow", ok, fmt_set(other_out), fmt_set(other_in)));
            }
            let balanced = fp == gp && fp == *k_p;
            let s = BigRational::one() + &c.tau / rat(4);
            out.push(loss_bound(
                "(e) q(G') >= q(G) (1 - [f'=g'=k_p]/p)^2 (1 - p^(-1-tau/4))",
                &q_out,
                &q_in,
                &[LossFactor { p: *p, balanced }],
                &s,
            ));
        }
        Op::CommonNeighbor { anchor } => {
            out.push(same_data(input, output));
            let a = input.w.iter().find(|x| &fmt_vertex(x) == anchor).cloned();
            out.push(Assertion::structural("anchor in W", a.is_some(), anchor, "W"));
            if let Some(a) = a {
                let adjacent = output.v.iter().all(|v| output.e.contains(&(v.clone(), a.clone())));
                out.push(Assertion::structural("(a) every v joined to the anchor", adjacent, adjacent, true));
                let covered = output.w.iter().all(|w| !output.neighbours_of_w(w).is_empty());
                out.push(Assertion::structural("(b) no isolated w", covered, covered, true));
            }
            let t1 = theta - BigRational::one();
            out.push(maximal_check("(theta-1)-maximal", output, &t1)?);
            let before = theta_weight(input, theta)?;
            let after = theta_weight(output, &t1)?;
            let ok = after.cmp_scaled_form(&before, &[(theta.clone(), &t1 / theta)], &BigRational::zero()) != Ordering::Less;
            out.push(Assertion::structural(
                "(c) weight(G) <= (1-1/theta)^(-theta) weight_(theta-1)(G')",
                ok,
                crate::assertion::fmt_quality(&before),
                crate::assertion::fmt_quality(&after),
            ));
        }
    }
    Ok(out)
}

fn fmt_quality_of(g: &GcdGraph, theta: &BigRational) -> Result<String> {
    Ok(crate::assertion::fmt_quality(&theta_weight(g, theta)?))
}

/// Adds one prime p of R(G) to P, keeping the best G_{p^k,p^l} or G1_{p^k,p^l}
/// where G1 is a maximal subgraph of G.
pub fn small_prime_step(g: &GcdGraph, p: u64, c: &ConstantsSet) -> Result<StepRecord> {
    require_in_r(g, p)?;
    let theta = &c.theta;
    let (g1, _) = maximal_of(g, theta)?;
    let mut cands = Vec::new();
    for base in [g, &g1] {
        for (k, l) in base.edge_valuations(p) {
            let h = special(base, p, k, l)?;
            let q = quality(&h, theta)?;
            cands.push((h, q));
        }
    }
    let i = best_index(&cands.iter().map(|x| &x.1).collect::<Vec<_>>())
        .ok_or_else(|| Error::Domain(format!("no edge realizes {p}")))?;
    record(g, Op::SmallPrime { p }, cands.swap_remove(i).0, c)
}

pub fn maximal_step(g: &GcdGraph, c: &ConstantsSet) -> Result<StepRecord> {
    let (h, _) = maximal_of(g, &c.theta)?;
    record(g, Op::Maximal, h, c)
}

/// Clears R(G) of primes up to C6, one small-prime step at a time.
pub fn prop_small_primes(g: &GcdGraph, c: &ConstantsSet) -> Result<Progress> {
    if g.is_trivial() {
        return Err(Error::Domain("the graph has no edges".into()));
    }
    let mut steps = Vec::new();
    let mut cur = g.clone();
    while let Some(&p) = r_below_c6(&cur, c)?.iter().next() {
        let s = small_prime_step(&cur, p, c)?;
        cur = s.output.clone();
        steps.push(s);
    }
    let assertions = small_primes_summary(g, &cur, steps.len(), c)?;
    Ok(Progress { steps, graph: cur, assertions })
}

pub(crate) fn small_primes_summary(g: &GcdGraph, h: &GcdGraph, n: usize, c: &ConstantsSet) -> Result<Vec<Assertion>> {
    let (qg, qh) = (quality(g, &c.theta)?, quality(h, &c.theta)?);
    let left = r_below_c6(h, c)?;
    let rel = subgraph_relation(h, g);
    Ok(vec![
        Assertion::structural("R(G') above C6", left.is_empty(), fmt_set(&left), "{}"),
        Assertion::structural("exact subgraph", rel.exact_sub, rel.exact_sub, true),
        constant_bound("q(G') >= q(G)/C5^steps", &qh, &qg, &const_pow(c.c(5), n as i64), true),
        constant_bound("q(G') >= q(G)/C7", &qh, &qg, c.c(7), true),
    ])
}

/// One quality-increment step at the least prime of the flat part of R(G).
pub fn prop_iter1(g: &GcdGraph, c: &ConstantsSet) -> Result<StepRecord> {
    if g.is_trivial() {
        return Err(Error::Domain("the graph has no edges".into()));
    }
    let small = r_below_c6(g, c)?;
    if !small.is_empty() {
        return Err(Error::Domain(format!("R(G) has primes up to C6: {}", fmt_set(&small))));
    }
    let split = split_r(g, c)?;
    let &p = split.flat.iter().next().ok_or_else(|| Error::Domain("the flat part of R(G) is empty".into()))?;
    let out = main_dichotomy(g, p, c)?;
    let branch = out.branch;
    let graph = match (out.branch, out.witness) {
        (Branch::A, Some(Witness::Subgraph { graph, .. })) => graph,
        (Branch::B, _) if strict(c) => {
            return Err(Error::Dichotomy(format!("concentration at a flat prime {p}")));
        }
        _ => {
            let cands = maximal_specials(g, p, &c.theta)?;
            let i = best_index(&cands.iter().map(|x| &x.quality).collect::<Vec<_>>())
                .ok_or_else(|| Error::Domain(format!("no edge realizes {p}")))?;
            cands[i].graph.clone()
        }
    };
    let u = asymmetric_count(g, &graph);
    let branch = if branch == Branch::A { Branch::A } else { Branch::Violated };
    record(g, Op::Iter1 { p, branch, u }, graph, c)
}

/// Keeps the edges inside the band of every k_p and with small weighted prime
/// sums, then passes to a maximal subgraph.
pub fn prop_structure(g: &GcdGraph, rows: &[WeightRow], c: &ConstantsSet) -> Result<StepRecord> {
    if g.is_trivial() {
        return Err(Error::Domain("the graph has no edges".into()));
    }
    let small = r_below_c6(g, c)?;
    if !small.is_empty() {
        return Err(Error::Domain(format!("R(G) has primes up to C6: {}", fmt_set(&small))));
    }
    if certify(g, &c.theta)? == Some(false) {
        return Err(Error::Domain("the graph is not maximal".into()));
    }
    let split = split_r(g, c)?;
    if !split.flat.is_empty() {
        return Err(Error::Domain(format!("the flat part of R(G) is not empty: {}", fmt_set(&split.flat))));
    }
    let k: BTreeMap<u64, i64> = split.classes.iter().filter_map(|x| x.concentration_k.map(|kk| (x.p, kk))).collect();
    let r = r_of(g)?;
    let op = Op::Structure { rows: rows.to_vec(), k: k.clone() };
    if r.is_empty() {
        return record(g, op, g.clone(), c);
    }
    let bounds: Vec<BigRational> = rows.iter().map(|row| clause_b_bound(row, &r, rows.len())).collect();
    let kept: BTreeSet<Edge> = g
        .e
        .iter()
        .filter(|(v, w)| k.iter().all(|(&p, &kp)| in_band(e_p(v, p), e_p(w, p), kp)))
        .filter(|(v, w)| rows.iter().zip(&bounds).all(|(row, b)| below_c8(c.c(8), &a_of_ratio(row, &r, v, w), b)))
        .cloned()
        .collect();
    let (h, _) = maximal_of(&g.with_edges(kept), &c.theta)?;
    record(g, op, h, c)
}

struct Choice {
    graph: GcdGraph,
    quality: QualityValue,
}

fn band_candidates(g: &GcdGraph, p: u64, k: i64, k_p: i64) -> Result<(String, Vec<GcdGraph>)> {
    let sp = |a: i64, b: i64| special(g, p, a, b);
    Ok(if k == k_p - 1 {
        ("2a".into(), vec![sp(k, k + 1)?, sp(k + 1, k)?])
    } else if k == k_p + 1 {
        ("2b".into(), vec![sp(k, k - 1)?, sp(k - 1, k)?])
    } else if k == k_p && k > 0 {
        let v: BTreeSet<Vertex> = g.v_at(p, k).union(&g.v_at(p, k + 1)).cloned().collect();
        let w: BTreeSet<Vertex> = g.w_at(p, k).union(&g.w_at(p, k + 1)).cloned().collect();
        let plus = g.induced(&v, &w).with_prime(p, k, k);
        ("2c".into(), vec![plus, sp(k, k - 1)?, sp(k - 1, k)?])
    } else if k == k_p && k < 0 {
        let v: BTreeSet<Vertex> = g.v_at(p, k - 1).union(&g.v_at(p, k)).cloned().collect();
        let w: BTreeSet<Vertex> = g.w_at(p, k - 1).union(&g.w_at(p, k)).cloned().collect();
        let minus = g.induced(&v, &w).with_prime(p, k, k);
        ("2d".into(), vec![minus, sp(k, k + 1)?, sp(k + 1, k)?])
    } else {
        let pairs = g.edge_valuations(p);
        ("2-off-band".into(), pairs.into_iter().map(|(a, b)| sp(a, b)).collect::<gcd_graph::Result<_>>()?)
    })
}

fn structured_inner(g: &GcdGraph, p: u64, c: &ConstantsSet, sign: Option<Sign>) -> Result<StepRecord> {
    require_in_r(g, p)?;
    let theta = &c.theta;
    let st = is_structured(g)?;
    if !st.structured {
        return Err(Error::Domain(format!("the graph is not structured at {:?}", st.failing)));
    }
    let k_p = st.k[&p];
    if !above_c6(c, p) {
        return Err(Error::Domain(format!("{p} does not exceed C6")));
    }
    if certify(g, theta)? == Some(false) {
        return Err(Error::Domain("the graph is not maximal".into()));
    }
    let q = quality(g, theta)?;
    let s = BigRational::one() + &c.tau / rat(4);
    let (case, graph) = if let Some((i, j)) = quality_jump(g, p, c)? {
        ("1a".to_string(), maximal_of(&special(g, p, i, j)?, theta)?.0)
    } else if let Some(k) = concentration_k(g, p, c) {
        let (case, raw) = band_candidates(g, p, k, k_p)?;
        let mut choices = Vec::new();
        for h in raw.iter().filter(|h| !h.is_trivial()) {
            let (m, _) = maximal_of(h, theta)?;
            let qm = quality(&m, theta)?;
            choices.push(Choice { graph: m, quality: qm });
        }
        let passes = |ch: &Choice| {
            let balanced = ch.graph.f[&p] == k_p && ch.graph.g[&p] == k_p;
            loss_bound("e", &ch.quality, &q, &[LossFactor { p, balanced }], &s).held()
        };
        let good: Vec<&Choice> = choices.iter().filter(|ch| passes(ch)).collect();
        let pool: Vec<&Choice> = if good.is_empty() { choices.iter().collect() } else { good };
        let i = best_index(&pool.iter().map(|ch| &ch.quality).collect::<Vec<_>>())
            .ok_or_else(|| Error::Domain(format!("no non-trivial candidate at {p}")))?;
        (case, pool[i].graph.clone())
    } else {
        let out = main_dichotomy(g, p, c)?;
        let graph = match out.witness {
            Some(Witness::Subgraph { graph, .. }) => graph,
            _ => return Err(Error::Domain(format!("no candidate subgraph at {p}"))),
        };
        ("1b".to_string(), graph)
    };
    record(g, Op::Structured { p, k_p, case, sign }, graph, c)
}

/// One structured step at p: the quality jump, dichotomy or band cases.
pub fn structured_step(g: &GcdGraph, p: u64, c: &ConstantsSet) -> Result<StepRecord> {
    structured_inner(g, p, c, None)
}

/// One structured step at the least prime of R_-(G) or R_+(G).
pub fn prop_iter2(g: &GcdGraph, sign: Sign, c: &ConstantsSet) -> Result<StepRecord> {
    if g.is_trivial() {
        return Err(Error::Domain("the graph has no edges".into()));
    }
    let small = r_below_c6(g, c)?;
    if !small.is_empty() {
        return Err(Error::Domain(format!("R(G) has primes up to C6: {}", fmt_set(&small))));
    }
    let (plus, minus) = r_plus_minus(g)?;
    let set = if sign == Sign::Minus { minus } else { plus };
    let &p = set.iter().next().ok_or_else(|| Error::Domain(format!("R_{sign:?}(G) is empty")))?;
    structured_inner(g, p, c, Some(sign))
}
