//! `gcdkit`: batch front end for overlap studies, Behrend sums, the rational
//! level construction, GCD graphs and pipeline traces.
//!
//! Exit codes: 0 success, 1 verification failure, 2 input error.

mod commands;
mod config;
mod output;

use clap::{Args, Parser, Subcommand, ValueEnum};
use commands::{aprime, behrend, graph, overlap, pipeline};
use config::{ExperimentConfig, Fill};
use output::Emitter;
use serde::Deserialize;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "gcdkit", version, about = "Exact experiments on rational dilates and GCD graphs")]
struct Cli {
    #[command(flatten)]
    global: GlobalOpts,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Args, Clone, Debug, Default)]
struct GlobalOpts {
    /// Experiment config (TOML or JSON); command-line flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory for JSON and CSV reports; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, env = "GCDKIT_WORKERS")]
    workers: Option<usize>,
    #[arg(long, global = true, value_enum)]
    constants: Option<ConstantsChoice>,
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConstantsChoice {
    Paper,
    #[default]
    Toy,
}

#[derive(Subcommand)]
enum Command {
    /// Overlap of N_alpha and N_beta by three algorithms across a T sweep.
    Overlap(overlap::OverlapArgs),
    /// Weighted sums over a primitive set, or a check of the bundled corpus.
    Behrend(behrend::BehrendArgs),
    /// Level-by-level construction of the retained subfamily.
    Aprime(aprime::AprimeArgs),
    /// GCD graph utilities.
    #[command(subcommand)]
    Graph(graph::GraphCommand),
    /// Runs the iteration pipeline on an instance and writes its trace.
    Pipeline(pipeline::PipelineArgs),
    /// Replays every assertion of a stored trace.
    VerifyTrace(pipeline::VerifyArgs),
}

/// Settings shared by every command after merging flags and config.
pub struct Ctx {
    pub emit: Emitter,
    pub constants: ConstantsChoice,
    pub seed: u64,
}

/// How a command finished when it did not hit an input error.
#[derive(Debug, PartialEq, Eq)]
pub enum Outcome {
    Ok,
    Failed,
}

impl Outcome {
    pub fn from_ok(ok: bool) -> Self {
        if ok {
            Outcome::Ok
        } else {
            Outcome::Failed
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<Outcome> {
    let cfg = match &cli.global.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    let g = cli.global;
    let workers = g.workers.fill(cfg.workers);
    if let Some(n) = workers {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    let ctx = Ctx {
        emit: Emitter::new(g.out.fill(cfg.out)),
        constants: g.constants.fill(cfg.constants).unwrap_or_default(),
        seed: g.seed.fill(cfg.seed).unwrap_or(0),
    };
    match cli.cmd {
        Command::Overlap(a) => overlap::run(a.fill(cfg.overlap.unwrap_or_default()), &ctx),
        Command::Behrend(a) => behrend::run(a.fill(cfg.behrend.unwrap_or_default()), &ctx),
        Command::Aprime(a) => aprime::run(a.fill(cfg.aprime.unwrap_or_default()), &ctx),
        Command::Graph(c) => graph::run(c, &ctx),
        Command::Pipeline(a) => pipeline::run(a.fill(cfg.pipeline.unwrap_or_default()), &ctx),
        Command::VerifyTrace(a) => pipeline::verify(a, &ctx),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::Failed) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
