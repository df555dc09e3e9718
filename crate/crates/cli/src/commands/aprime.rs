use super::{check_schema, rational_arg, read_json, reduced_arg};
use crate::config::fill_fields;
use crate::{Ctx, Outcome};
use anyhow::Context;
use clap::Args;
use primitive_sets::{check_aprime_lemma, construct_aprime_with, AprimeOptions, AprimeTrace, LemmaReport, RationalFamily};
use rational_core::BigUint;
use serde::{Deserialize, Serialize};
use std::path::PathBuf;

pub const SCHEMA: &str = "aprime-trace/1";
pub const FAMILY_SCHEMA: &str = "rational-family/1";

#[derive(Args, Clone, Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AprimeArgs {
    /// Family file (JSON).
    #[arg(long)]
    pub family: Option<PathBuf>,
    /// Comma-separated family values, used when no file is given.
    #[arg(long, value_delimiter = ',')]
    pub values: Vec<String>,
    /// The constant c in (0, 1).
    #[arg(long)]
    pub c: Option<String>,
    #[arg(long)]
    pub levels: Option<usize>,
    #[arg(long)]
    pub x1_start: Option<u64>,
}

fill_fields!(AprimeArgs { family, values, c, levels, x1_start });

#[derive(Serialize)]
struct Report {
    trace: AprimeTrace,
    lemma: LemmaReport,
}

fn family(a: &AprimeArgs) -> anyhow::Result<RationalFamily> {
    if let Some(p) = &a.family {
        let v = read_json(p)?;
        check_schema(&v, FAMILY_SCHEMA)?;
        return serde_json::from_value(v).with_context(|| format!("family in {}", p.display()));
    }
    anyhow::ensure!(!a.values.is_empty(), "give --family or --values");
    let vals = a.values.iter().map(|s| reduced_arg("values", s)).collect::<anyhow::Result<Vec<_>>>()?;
    Ok(RationalFamily::from_values(vals))
}

pub fn run(a: AprimeArgs, ctx: &Ctx) -> anyhow::Result<Outcome> {
    let fam = family(&a)?;
    let opts = AprimeOptions {
        c: rational_arg("c", a.c.as_deref().unwrap_or("1/2"))?,
        levels: a.levels.unwrap_or(3),
        x1_start: a.x1_start.map(BigUint::from),
    };
    let trace = construct_aprime_with(&fam, &opts)?;
    let lemma = check_aprime_lemma(&trace);
    let ok = trace.invariant_violations().is_empty();
    let rows: Vec<Vec<String>> = trace
        .levels
        .iter()
        .map(|l| {
            vec![
                l.j.to_string(),
                l.x.to_string(),
                l.a.len().to_string(),
                l.a_prime.len().to_string(),
                l.lambda_prime.to_string(),
                l.lower_bound_ok.to_string(),
            ]
        })
        .collect();
    ctx.emit.csv("aprime", &["j", "x", "level_size", "retained", "lambda_retained", "lower_bound_ok"], &rows)?;
    ctx.emit.json("aprime", SCHEMA, &Report { trace, lemma })?;
    Ok(Outcome::from_ok(ok))
}
