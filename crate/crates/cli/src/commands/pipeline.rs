use crate::config::fill_fields;
use crate::{ConstantsChoice, Ctx, Outcome};
use anyhow::Context;
use clap::Args;
use gcd_graph::{paper_constants, ConstantsSet};
use iteration_pipeline::{bundled_instance, bundled_instances, run_pipeline, verify_trace, Error, PipelineInput, PipelineTrace, VerifyReport};
use serde::{Deserialize, Serialize};
use std::path::PathBuf;

pub const VERIFY_SCHEMA: &str = "trace-verification/1";

#[derive(Args, Clone, Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineArgs {
    /// Name of a bundled instance.
    #[arg(long)]
    pub instance: Option<String>,
    /// Instance file (JSON).
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Run every bundled instance.
    #[arg(long)]
    pub all: bool,
    /// List the bundled instances and exit.
    #[arg(long)]
    pub list: bool,
}

fill_fields!(PipelineArgs { instance, input, all, list });

#[derive(Args)]
pub struct VerifyArgs {
    pub trace: PathBuf,
}

fn constants_for(inp: &PipelineInput, c: ConstantsChoice) -> anyhow::Result<ConstantsSet> {
    Ok(match c {
        ConstantsChoice::Toy => inp.toy_constants()?,
        ConstantsChoice::Paper => paper_constants(),
    })
}

#[derive(Serialize)]
struct Listed {
    name: String,
    description: String,
}

#[derive(Serialize)]
struct Listing {
    instances: Vec<Listed>,
}

/// Runs one instance; strict-constant dichotomy failures count as verification failures.
fn run_one(inp: &PipelineInput, ctx: &Ctx, single: bool) -> anyhow::Result<bool> {
    let c = constants_for(inp, ctx.constants)?;
    let t = match run_pipeline(inp, &c) {
        Ok(t) => t,
        Err(Error::Dichotomy(m)) => {
            eprintln!("{}: dichotomy failed: {m}", inp.name);
            return Ok(false);
        }
        Err(e) => return Err(e).with_context(|| format!("instance {}", inp.name)),
    };
    let failures = t.failures();
    eprintln!(
        "{}: {} steps, completed={}, failures={}, final ratio {:.4e}{}",
        inp.name,
        t.steps.len(),
        t.completed,
        failures.len(),
        t.final_bound.ratio,
        t.halted.as_deref().map(|h| format!(", halted: {h}")).unwrap_or_default()
    );
    for f in &failures {
        eprintln!("  failed: {}: {} vs {}", f.name, f.lhs, f.rhs);
    }
    let ok = t.completed && failures.is_empty();
    let stem = if single { "trace".to_string() } else { format!("trace-{}", inp.name) };
    ctx.emit.raw_json(&stem, &t.to_json())?;
    Ok(ok)
}

pub fn run(a: PipelineArgs, ctx: &Ctx) -> anyhow::Result<Outcome> {
    if a.list {
        let instances = bundled_instances().into_iter().map(|i| Listed { name: i.name, description: i.description }).collect();
        ctx.emit.json("instances", "pipeline-instances/1", &Listing { instances })?;
        return Ok(Outcome::Ok);
    }
    let inputs: Vec<PipelineInput> = if a.all {
        bundled_instances()
    } else if let Some(p) = &a.input {
        let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
        vec![PipelineInput::from_json(&text).with_context(|| format!("parsing {}", p.display()))?]
    } else {
        let name = a.instance.context("give --instance, --input, --all or --list")?;
        vec![bundled_instance(&name).with_context(|| format!("no bundled instance named {name:?}"))?]
    };
    let single = inputs.len() == 1;
    let mut ok = true;
    for inp in &inputs {
        ok &= run_one(inp, ctx, single)?;
    }
    Ok(Outcome::from_ok(ok))
}

pub fn verify(a: VerifyArgs, ctx: &Ctx) -> anyhow::Result<Outcome> {
    let text = std::fs::read_to_string(&a.trace).with_context(|| format!("reading {}", a.trace.display()))?;
    let t = PipelineTrace::from_json(&text).with_context(|| format!("parsing {}", a.trace.display()))?;
    let rep = match verify_trace(&t) {
        Ok(r) => r,
        Err(e) => VerifyReport { ok: false, steps_checked: 0, assertions_checked: 0, failures: vec![e.to_string()] },
    };
    for f in &rep.failures {
        eprintln!("mismatch: {f}");
    }
    eprintln!(
        "{}: {} steps, {} assertions replayed, {}",
        t.instance.name,
        rep.steps_checked,
        rep.assertions_checked,
        if rep.ok { "ok" } else { "FAILED" }
    );
    ctx.emit.json("verify", VERIFY_SCHEMA, &rep)?;
    Ok(Outcome::from_ok(rep.ok))
}
