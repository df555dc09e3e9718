use super::{check_schema, rational_arg, read_json};
use crate::{ConstantsChoice, Ctx, Outcome};
use anyhow::Context;
use clap::{Args, Subcommand, ValueEnum};
use gcd_graph::sample::{random_gcd_graph, SampleOptions};
use gcd_graph::{
    default_toy_constants, edge_density, exactness, is_structured, paper_constants, quality, r_of, r_plus_minus,
    split_r, theta_weight, validate, ConstantsSet, ExactnessFlags, GcdGraph, QualityValue, SplitR, StructureReport,
};
use graph_search::{certify_maximal, maximal_subgraph_with, replay, MaximalSearchResult, Method, DEFAULT_EXHAUSTIVE_CAP};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rational_core::{serde_rational, BigRational};
use serde::Serialize;
use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

pub const GRAPH_SCHEMA: &str = "gcd-graph/1";
pub const CORPUS_SCHEMA: &str = "gcd-graph-corpus/1";

#[derive(Subcommand)]
pub enum GraphCommand {
    /// Checks the divisibility conditions for every prime of P.
    Validate(GraphFile),
    /// Edge density, theta-weight and quality.
    Quality(GraphFile),
    /// A theta-maximal subgraph with its certificate.
    Maximal(MaximalArgs),
    /// R(G), its sharp/flat split, exactness and structure.
    Structure(GraphFile),
    /// A seeded corpus of random GCD graphs.
    Sample(SampleArgs),
}

#[derive(Args)]
pub struct GraphFile {
    pub file: PathBuf,
    /// Defaults to the theta of the selected constants.
    #[arg(long)]
    pub theta: Option<String>,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum MethodArg {
    Exhaustive,
    Greedy,
}

#[derive(Args)]
pub struct MaximalArgs {
    #[command(flatten)]
    pub graph: GraphFile,
    #[arg(long, value_enum, default_value = "exhaustive")]
    pub method: MethodArg,
    /// Largest |V| + |W| searched exhaustively.
    #[arg(long, default_value_t = DEFAULT_EXHAUSTIVE_CAP)]
    pub cap: usize,
}

#[derive(Args)]
pub struct SampleArgs {
    #[arg(long, default_value_t = 10)]
    pub count: usize,
    #[arg(long, default_value_t = 4)]
    pub max_side: usize,
    /// Primes moved into P per graph.
    #[arg(long, default_value_t = 1)]
    pub extra: usize,
    #[arg(long)]
    pub random_weights: bool,
}

fn constants(c: ConstantsChoice) -> ConstantsSet {
    match c {
        ConstantsChoice::Toy => default_toy_constants(),
        ConstantsChoice::Paper => paper_constants(),
    }
}

pub fn load_graph(path: &Path) -> anyhow::Result<GcdGraph> {
    let v = read_json(path)?;
    check_schema(&v, GRAPH_SCHEMA)?;
    let body = v.get("graph").cloned().unwrap_or(v);
    serde_json::from_value(body).with_context(|| format!("graph in {}", path.display()))
}

fn theta(f: &GraphFile, ctx: &Ctx) -> anyhow::Result<BigRational> {
    match &f.theta {
        Some(s) => rational_arg("theta", s),
        None => Ok(constants(ctx.constants).theta),
    }
}

fn stem(f: &GraphFile, what: &str) -> String {
    let name = f.file.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    format!("{name}.{what}")
}

#[derive(Serialize)]
struct QualityReport {
    #[serde(with = "serde_rational")]
    theta: BigRational,
    #[serde(with = "serde_rational")]
    density: BigRational,
    theta_weight: Option<QualityValue>,
    quality: Option<QualityValue>,
}

#[derive(Serialize)]
struct MaximalReport {
    result: MaximalSearchResult,
    replay_ok: bool,
    /// Exhaustive certificate of maximality, when the graph is within the cap.
    certified: Option<bool>,
}

#[derive(Serialize)]
struct StructureOut {
    r: BTreeSet<u64>,
    r_plus: BTreeSet<u64>,
    r_minus: BTreeSet<u64>,
    split: SplitR,
    exactness: ExactnessFlags,
    structure: StructureReport,
}

#[derive(Serialize)]
struct Corpus {
    seed: u64,
    graphs: Vec<GcdGraph>,
}

pub fn run(cmd: GraphCommand, ctx: &Ctx) -> anyhow::Result<Outcome> {
    match cmd {
        GraphCommand::Validate(f) => {
            let g = load_graph(&f.file)?;
            let rep = validate(&g);
            ctx.emit.json(&stem(&f, "validate"), "graph-validation/1", &rep)?;
            Ok(Outcome::from_ok(rep.valid))
        }
        GraphCommand::Quality(f) => {
            let g = load_graph(&f.file)?;
            let th = theta(&f, ctx)?;
            let nontrivial = !g.is_trivial();
            let rep = QualityReport {
                density: edge_density(&g),
                theta_weight: nontrivial.then(|| theta_weight(&g, &th)).transpose()?,
                quality: nontrivial.then(|| quality(&g, &th)).transpose()?,
                theta: th,
            };
            ctx.emit.json(&stem(&f, "quality"), "graph-quality/1", &rep)?;
            Ok(Outcome::Ok)
        }
        GraphCommand::Maximal(m) => {
            let g = load_graph(&m.graph.file)?;
            let th = theta(&m.graph, ctx)?;
            let method = match m.method {
                MethodArg::Exhaustive => Method::Exhaustive,
                MethodArg::Greedy => Method::Greedy,
            };
            let result = maximal_subgraph_with(&g, &th, method, m.cap)?;
            let replay_ok = replay(&g, &result, m.cap)?.ok;
            let certified = if g.vertex_count() <= m.cap && !result.subgraph.is_trivial() {
                Some(certify_maximal(&result.subgraph, &th, m.cap)?)
            } else {
                None
            };
            let ok = replay_ok && certified != Some(false);
            ctx.emit.json(&stem(&m.graph, "maximal"), "graph-maximal/1", &MaximalReport { result, replay_ok, certified })?;
            Ok(Outcome::from_ok(ok))
        }
        GraphCommand::Structure(f) => {
            let g = load_graph(&f.file)?;
            let c = constants(ctx.constants);
            let (r_plus, r_minus) = r_plus_minus(&g)?;
            let out = StructureOut {
                r: r_of(&g)?,
                r_plus,
                r_minus,
                split: split_r(&g, &c)?,
                exactness: exactness(&g),
                structure: is_structured(&g)?,
            };
            ctx.emit.json(&stem(&f, "structure"), "graph-structure/1", &out)?;
            Ok(Outcome::Ok)
        }
        GraphCommand::Sample(s) => {
            let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
            let o = SampleOptions { max_side: s.max_side, random_weights: s.random_weights, ..SampleOptions::default() };
            let graphs = (0..s.count).map(|_| random_gcd_graph(&mut rng, &o, s.extra)).collect();
            ctx.emit.json("sample", CORPUS_SCHEMA, &Corpus { seed: ctx.seed, graphs })?;
            Ok(Outcome::Ok)
        }
    }
}
