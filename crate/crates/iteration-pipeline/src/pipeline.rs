//! The staged reduction G -> G1 -> G2 -> G3 -> G4 and its replayable trace.

use crate::assertion::{const_mul, const_pow, constant_bound, loss_bound, Assertion, Kind, LossFactor, Status};
use crate::extraction::{extract, Extraction, ExtractionInput};
use crate::instances::PipelineInput;
use crate::steps::{
    check_step, maximal_step, prop_iter1, prop_iter2, prop_small_primes, prop_structure, small_primes_summary, Op,
    Sign, StepRecord, WeightRow,
};
use crate::{Error, Result};
use gcd_graph::util::{fmt_vertex, to_f64};
use gcd_graph::{
    exactness, is_structured, quality, r_of, r_plus_minus, split_r, subgraph_relation, theta_weight, ConstantsMode,
    ConstantsSet, GcdGraph, QualityValue,
};
use graph_search::{certify_maximal, common_neighbor, Method, Side, DEFAULT_EXHAUSTIVE_CAP};
use num_traits::{One, Zero};
use rational_core::{bracket, fmt_rational, rat, BigRational, ReducedRational};
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::collections::BTreeSet;

pub const TRACE_SCHEMA: &str = "pipeline-trace/1";

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageFlags {
    /// None when the graph is too large to certify.
    pub maximal: Option<bool>,
    pub exact: bool,
    pub structured: bool,
    pub numerator_exact: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Stage {
    pub name: String,
    /// Number of steps applied to the input graph to reach this stage.
    pub after_step: usize,
    pub graph: GcdGraph,
    pub quality: QualityValue,
    pub flags: StageFlags,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FinalBound {
    pub quality: QualityValue,
    /// ln((y ln x)^2 e^(-4z)).
    pub shape_ln: f64,
    /// q(G) / ((y ln x)^2 e^(-4z)), diagnostic only.
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PipelineTrace {
    pub schema: String,
    pub instance: PipelineInput,
    pub constants: ConstantsSet,
    pub input: GcdGraph,
    pub steps: Vec<StepRecord>,
    pub stages: Vec<Stage>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub extraction: Option<Extraction>,
    pub assertions: Vec<Assertion>,
    pub completed: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub halted: Option<String>,
    pub final_bound: FinalBound,
}

impl PipelineTrace {
    /// Assertions that count as failures: identities and structural facts always,
    /// bounds only under non-toy constants.
    pub fn failures(&self) -> Vec<&Assertion> {
        let strict = self.constants.mode != ConstantsMode::Toy;
        self.steps
            .iter()
            .flat_map(|s| s.assertions.iter())
            .chain(&self.assertions)
            .filter(|a| a.is_failure() || (strict && a.kind == Kind::Bound && a.status == Status::Violated))
            .collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("trace serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Input(e.to_string()))
    }
}

fn certify(g: &GcdGraph, theta: &BigRational) -> Result<Option<bool>> {
    if g.is_trivial() {
        return Ok(Some(true));
    }
    if g.vertex_count() > DEFAULT_EXHAUSTIVE_CAP {
        return Ok(None);
    }
    Ok(Some(certify_maximal(g, theta, DEFAULT_EXHAUSTIVE_CAP)?))
}

fn stage(name: &str, after_step: usize, g: &GcdGraph, c: &ConstantsSet) -> Result<Stage> {
    let ex = exactness(g);
    Ok(Stage {
        name: name.to_string(),
        after_step,
        graph: g.clone(),
        quality: quality(g, &c.theta)?,
        flags: StageFlags {
            maximal: certify(g, &c.theta)?,
            exact: ex.exact,
            structured: !g.is_trivial() && is_structured(g)?.structured,
            numerator_exact: ex.numerator_exact,
        },
    })
}

fn final_bound(inp: &PipelineInput, g: &GcdGraph, c: &ConstantsSet) -> Result<FinalBound> {
    let q = quality(g, &c.theta)?;
    let (x, y, z) = (to_f64(&inp.x), to_f64(&inp.y), to_f64(&inp.z));
    let shape_ln = 2.0 * (y * x.ln()).ln() - 4.0 * z;
    let ratio = if q.is_zero() { 0.0 } else { (q.log_value - shape_ln).exp() };
    Ok(FinalBound { quality: q, shape_ln, ratio })
}

fn flag(name: &str, ok: Option<bool>) -> Assertion {
    match ok {
        Some(b) => Assertion::structural(name, b, b, true),
        None => Assertion::skipped(name, Kind::Structural, "graph exceeds the exhaustive cap"),
    }
}

fn on_stage(xs: Vec<Assertion>, name: &str) -> impl Iterator<Item = Assertion> + '_ {
    xs.into_iter().map(move |a| if a.subject.is_some() { a } else { a.on(name) })
}

/// U = #{p in P1 : p > C6, f1(p) != g1(p)}.
pub fn asymmetric_above_c6(g1: &GcdGraph, c: &ConstantsSet) -> usize {
    g1.p
        .iter()
        .filter(|&&p| c.c(6).cmp_rational(&rat(p as i64)) == Ordering::Less && g1.f[&p] != g1.g[&p])
        .count()
}

fn input_assertions(g: &GcdGraph, c: &ConstantsSet) -> Result<Vec<Assertion>> {
    let mut out = Vec::new();
    let gamma = g.v.iter().chain(&g.w).min().cloned().unwrap_or_else(ReducedRational::one);
    let gr = gamma.to_big_rational();
    let mut bad = 0usize;
    for (a, b) in &g.e {
        let lhs = bracket(&gamma.mul(a), &gamma.mul(b)).to_big_rational() * &gr;
        if lhs != bracket(a, b).to_big_rational() {
            bad += 1;
        }
    }
    out.push(Assertion::identity("gamma [gamma rho, gamma sigma] = [rho, sigma]", bad == 0, bad, 0).on(format!("gamma = {gamma}")));
    let direct = g.e.iter().fold(BigRational::zero(), |s, (a, b)| {
        s + (a.mul(b)).recip().to_big_rational()
    });
    let mu_e = g.mu_e();
    out.push(Assertion::identity("lambda(E) = mu(E) of G", direct == mu_e, fmt_rational(&direct), fmt_rational(&mu_e)));
    let l3 = theta_weight(g, &rat(3))?;
    let q = quality(g, &c.theta)?;
    let ok = l3.cmp_value(&q) != Ordering::Greater;
    out.push(Assertion::structural(
        "lambda^(3)(G) <= q(G)",
        ok,
        crate::assertion::fmt_quality(&l3),
        crate::assertion::fmt_quality(&q),
    ));
    Ok(out)
}

/// Everything in a trace that is a function of the stage graphs: stage flags,
/// stage-level bounds, the extraction and its identities.
fn derive(
    inp: &PipelineInput,
    g: &GcdGraph,
    steps: &[StepRecord],
    stages: &[Stage],
    c: &ConstantsSet,
) -> Result<(Vec<Assertion>, Option<Extraction>)> {
    let theta = &c.theta;
    let mut out = input_assertions(g, c)?;
    let find = |n: &str| stages.iter().find(|s| s.name == n).map(|s| &s.graph);
    let q = |h: &GcdGraph| quality(h, theta);
    let above_c6 = |p: u64| c.c(6).cmp_rational(&rat(p as i64)) == Ordering::Less;

    let n_small = steps.iter().take_while(|s| matches!(s.op, Op::SmallPrime { .. })).count();
    if n_small > 0 || stages.len() > 1 {
        let after = if n_small == 0 { g } else { &steps[n_small - 1].output };
        out.extend(on_stage(small_primes_summary(g, after, n_small, c)?, "small primes"));
    }
    let mut prev = g;
    for s in stages.iter().skip(1) {
        let rel = subgraph_relation(&s.graph, prev);
        out.push(Assertion::structural("GCD subgraph of the previous stage", rel.subgraph, rel.subgraph, true).on(&s.name));
        prev = &s.graph;
    }
    let mut u = 0;
    if let Some(g1) = find("G1") {
        let mut a = vec![flag("maximal", certify(g1, theta)?)];
        a.push(Assertion::structural("exact", exactness(g1).exact, exactness(g1).exact, true));
        let split = split_r(g1, c)?;
        a.push(Assertion::structural("flat part of R empty", split.flat.is_empty(), format!("{:?}", split.flat), "{}"));
        let small: Vec<u64> = r_of(g1)?.into_iter().filter(|&p| !above_c6(p)).collect();
        a.push(Assertion::structural("R above C6", small.is_empty(), format!("{small:?}"), "[]"));
        u = asymmetric_above_c6(g1, c);
        let k = const_mul(c.c(7), &const_pow(&c.m, -(u as i64)));
        a.push(constant_bound("q(G1) >= M^U q(G)/C7", &q(g1)?, &q(g)?, &k, true).on(format!("U = {u}")));
        out.extend(on_stage(a, "G1"));
    }
    if let (Some(g1), Some(g2)) = (find("G1"), find("G2")) {
        let same = g1.p == g2.p && g1.f == g2.f && g1.g == g2.g;
        let mut a = vec![Assertion::structural("same multiplicative data as G1", same, same, true)];
        a.push(flag("maximal", certify(g2, theta)?));
        a.push(Assertion::structural("exact", exactness(g2).exact, exactness(g2).exact, true));
        let st = is_structured(g2)?;
        a.push(Assertion::structural("structured", st.structured, format!("{:?}", st.failing), "[]"));
        let k = gcd_graph::Constant::rational(rat(2));
        a.push(constant_bound("q(G2) >= q(G1)/2", &q(g2)?, &q(g1)?, &k, true));
        out.extend(on_stage(a, "G2"));
    }
    if let (Some(g2), Some(g3)) = (find("G2"), find("G3")) {
        let mut a = vec![flag("maximal", certify(g3, theta)?)];
        let st = is_structured(g3)?;
        a.push(Assertion::structural("structured", st.structured, format!("{:?}", st.failing), "[]"));
        let ne = exactness(g3).numerator_exact;
        a.push(Assertion::structural("numerator-exact", ne, ne, true));
        let (_, minus) = r_plus_minus(g3)?;
        a.push(Assertion::structural("R_-(G3) empty", minus.is_empty(), format!("{minus:?}"), "{}"));
        let fresh: BTreeSet<u64> = g3.p.difference(&g2.p).copied().collect();
        let factors: Vec<LossFactor> = fresh
            .iter()
            .map(|&p| LossFactor { p, balanced: g3.f[&p] == g3.g[&p] && g3.f[&p] < 0 })
            .collect();
        let s = BigRational::one() + &c.tau / rat(4);
        a.push(loss_bound(
            "q(G3) >= q(G2) prod (1 - [f3=g3<0]/p)^2 (1 - p^(-1-tau/4))",
            &q(g3)?,
            &q(g2)?,
            &factors,
            &s,
        ));
        out.extend(on_stage(a, "G3"));
    }
    let mut extraction = None;
    if let (Some(g1), Some(g2), Some(g3), Some(g4)) = (find("G1"), find("G2"), find("G3"), find("G4")) {
        let inp2 = ExtractionInput { g1, g2, g3, g4, x: &inp.x, y: &inp.y, z: &inp.z, u, constants: c };
        let (ex, a) = extract(&inp2)?;
        out.extend(on_stage(a, "extraction"));
        extraction = Some(ex);
    }
    Ok((out, extraction))
}

struct Runner<'a> {
    c: &'a ConstantsSet,
    steps: Vec<StepRecord>,
    cur: GcdGraph,
}

impl Runner<'_> {
    fn push(&mut self, s: StepRecord) -> bool {
        self.cur = s.output.clone();
        self.steps.push(s);
        !self.cur.is_trivial()
    }

    fn stage(&self, name: &str) -> Result<Stage> {
        stage(name, self.steps.len(), &self.cur, self.c)
    }
}

/// Runs the four stages on the instance and records every step and check.
pub fn run_pipeline(inp: &PipelineInput, c: &ConstantsSet) -> Result<PipelineTrace> {
    let g = inp.graph()?;
    let mut run = Runner { c, steps: Vec::new(), cur: g.clone() };
    let mut stages = vec![run.stage("G")?];
    let halted = execute(inp, &mut run, &mut stages)?;
    let (assertions, extraction) = derive(inp, &g, &run.steps, &stages, c)?;
    Ok(PipelineTrace {
        schema: TRACE_SCHEMA.to_string(),
        instance: inp.clone(),
        constants: c.clone(),
        final_bound: final_bound(inp, &g, c)?,
        input: g,
        steps: run.steps,
        completed: halted.is_none() && extraction.is_some(),
        stages,
        extraction,
        assertions,
        halted,
    })
}

fn execute(inp: &PipelineInput, run: &mut Runner, stages: &mut Vec<Stage>) -> Result<Option<String>> {
    let c = run.c;
    if run.cur.is_trivial() {
        return Ok(Some("the input graph has no edges".into()));
    }
    let small = prop_small_primes(&run.cur, c)?;
    for s in small.steps {
        if !run.push(s) {
            return Ok(Some("a small-prime step left no edges".into()));
        }
    }
    if !run.push(maximal_step(&run.cur, c)?) {
        return Ok(Some("the maximal subgraph has no edges".into()));
    }
    while !split_r(&run.cur, c)?.flat.is_empty() {
        let s = prop_iter1(&run.cur, c)?;
        if !run.push(s) {
            return Ok(Some("an iteration step left no edges".into()));
        }
    }
    stages.push(run.stage("G1")?);
    let rows = [WeightRow::AboveZ { z: inp.z.clone() }];
    if !run.push(prop_structure(&run.cur, &rows, c)?) {
        return Ok(Some("the structure step left no edges".into()));
    }
    stages.push(run.stage("G2")?);
    while !r_plus_minus(&run.cur)?.1.is_empty() {
        let s = prop_iter2(&run.cur, Sign::Minus, c)?;
        if !run.push(s) {
            return Ok(Some("a structured step left no edges".into()));
        }
    }
    stages.push(run.stage("G3")?);
    let (_, w0) = run.cur.e.iter().next().cloned().expect("non-trivial");
    let rep = common_neighbor(&run.cur, &w0, Side::W, &c.theta, Method::Exhaustive, DEFAULT_EXHAUSTIVE_CAP)
        .or_else(|_| common_neighbor(&run.cur, &w0, Side::W, &c.theta, Method::Greedy, DEFAULT_EXHAUSTIVE_CAP))?;
    let op = Op::CommonNeighbor { anchor: fmt_vertex(&w0) };
    let assertions = check_step(&run.cur, &op, &rep.subgraph, c)?;
    let s = StepRecord {
        quality_before: quality(&run.cur, &c.theta)?,
        quality_after: quality(&rep.subgraph, &c.theta)?,
        op,
        assertions,
        output: rep.subgraph,
    };
    if !run.push(s) {
        return Ok(Some("the common-neighbour step left no edges".into()));
    }
    stages.push(run.stage("G4")?);
    Ok(None)
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub ok: bool,
    pub steps_checked: usize,
    pub assertions_checked: usize,
    pub failures: Vec<String>,
}

/// Replays a serialized trace: recomputes every step check, stage flag,
/// quality and derived assertion from the recorded graphs and compares them
/// with what the trace claims. No search is repeated.
pub fn verify_trace(t: &PipelineTrace) -> Result<VerifyReport> {
    let mut fail = Vec::new();
    if t.schema != TRACE_SCHEMA {
        fail.push(format!("unknown schema {:?}", t.schema));
    }
    let c = &t.constants;
    let g = t.instance.graph()?;
    if g != t.input {
        fail.push("input graph does not match the instance".into());
    }
    let mut n_assert = 0;
    let mut prev = &t.input;
    for (i, s) in t.steps.iter().enumerate() {
        let want = check_step(prev, &s.op, &s.output, c)?;
        n_assert += want.len();
        if want != s.assertions {
            fail.push(format!("step {i}: recorded checks differ from recomputed ones"));
        }
        if quality(prev, &c.theta)? != s.quality_before || quality(&s.output, &c.theta)? != s.quality_after {
            fail.push(format!("step {i}: recorded quality differs from recomputed quality"));
        }
        prev = &s.output;
    }
    for st in &t.stages {
        let g_at = match st.after_step {
            0 => &t.input,
            n => t.steps.get(n - 1).map(|s| &s.output).unwrap_or(&t.input),
        };
        if st.after_step > t.steps.len() || *g_at != st.graph {
            fail.push(format!("stage {}: graph does not match the step chain", st.name));
        }
        let fresh = stage(&st.name, st.after_step, &st.graph, c)?;
        if fresh.quality != st.quality {
            fail.push(format!("stage {}: recorded quality differs from recomputed quality", st.name));
        }
        if fresh.flags != st.flags {
            fail.push(format!("stage {}: recorded flags differ", st.name));
        }
    }
    let (assertions, extraction) = derive(&t.instance, &t.input, &t.steps, &t.stages, c)?;
    n_assert += assertions.len();
    if assertions != t.assertions {
        fail.push("derived assertions differ from the recorded ones".into());
    }
    if extraction != t.extraction {
        fail.push("extraction differs from the recorded one".into());
    }
    if final_bound(&t.instance, &t.input, c)? != t.final_bound {
        fail.push("final bound differs from the recorded one".into());
    }
    if t.completed != (t.halted.is_none() && t.extraction.is_some()) {
        fail.push("completion flag is inconsistent".into());
    }
    for a in t.failures() {
        fail.push(format!(
            "{} failed{}: {} vs {}",
            a.name,
            a.subject.as_ref().map(|s| format!(" on {s}")).unwrap_or_default(),
            a.lhs,
            a.rhs
        ));
    }
    Ok(VerifyReport { ok: fail.is_empty(), steps_checked: t.steps.len(), assertions_checked: n_assert, failures: fail })
}
