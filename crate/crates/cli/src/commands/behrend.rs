use crate::config::fill_fields;
use crate::{Ctx, Outcome};
use anyhow::{bail, Context};
use clap::Args;
use primitive_sets::corpus::{check_recorded, evaluate, recorded, EntryCheck, SetSpec, Weight};
use primitive_sets::BehrendReport;
use serde::{Deserialize, Serialize};

pub const SCHEMA: &str = "behrend-report/1";
pub const CORPUS_SCHEMA: &str = "behrend-corpus-check/1";

#[derive(Args, Clone, Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BehrendArgs {
    /// half:X (integers in (X/2, X]), primes:X, or omega:M:X (Omega(n) = M, n <= X).
    #[arg(long)]
    pub set: Option<String>,
    /// one or tau2.
    #[arg(long)]
    pub weight: Option<String>,
    #[arg(long)]
    pub y: Option<u64>,
    #[arg(long)]
    pub z: Option<u64>,
    /// Recompute the bundled corpus and compare with the recorded values.
    #[arg(long)]
    #[serde(rename = "corpus")]
    pub corpus: bool,
}

fill_fields!(BehrendArgs { set, weight, y, z, corpus });

pub fn parse_set(s: &str) -> anyhow::Result<SetSpec> {
    let parts: Vec<&str> = s.split(':').collect();
    let num = |x: &str| x.parse::<u64>().with_context(|| format!("bad number {x:?} in --set"));
    Ok(match parts.as_slice() {
        ["half", x] => SetSpec::HalfInterval { x: num(x)? },
        ["primes", x] => SetSpec::Primes { x: num(x)? },
        ["omega", m, x] => SetSpec::BigOmega { m: num(m)? as u32, x: num(x)? },
        _ => bail!("--set must be half:X, primes:X or omega:M:X, got {s:?}"),
    })
}

fn parse_weight(s: &str) -> anyhow::Result<Weight> {
    match s {
        "one" => Ok(Weight::One),
        "tau2" => Ok(Weight::Tau2),
        _ => bail!("--weight must be one or tau2, got {s:?}"),
    }
}

#[derive(Serialize)]
struct Single {
    set: SetSpec,
    weight: Weight,
    y: u64,
    z: u64,
    report: BehrendReport,
}

#[derive(Serialize)]
struct CorpusCheck {
    band: [f64; 2],
    median: f64,
    all_ok: bool,
    entries: Vec<EntryCheck>,
}

pub fn run(a: BehrendArgs, ctx: &Ctx) -> anyhow::Result<Outcome> {
    if a.corpus {
        let meta = recorded();
        let entries = check_recorded(&meta)?;
        let all_ok = entries.iter().all(EntryCheck::ok);
        let rows: Vec<Vec<String>> = entries
            .iter()
            .map(|e| {
                vec![e.name.clone(), e.lhs_exact.to_string(), e.ratio.to_string(), e.in_band.to_string(), e.ok().to_string()]
            })
            .collect();
        ctx.emit.csv("behrend-corpus", &["name", "lhs_exact", "ratio", "in_band", "ok"], &rows)?;
        ctx.emit.json("behrend-corpus", CORPUS_SCHEMA, &CorpusCheck { band: meta.band, median: meta.median, all_ok, entries })?;
        return Ok(Outcome::from_ok(all_ok));
    }
    let set = parse_set(a.set.as_deref().context("--set is required unless --corpus is given")?)?;
    let weight = parse_weight(a.weight.as_deref().unwrap_or("one"))?;
    let (y, z) = (a.y.context("--y is required")?, a.z.context("--z is required")?);
    let report = evaluate(&set, weight, y, z)?;
    let row = vec![
        rational_core::fmt_rational(&report.lhs),
        report.terms.to_string(),
        report.rhs_shape.to_string(),
        report.ratio.to_string(),
    ];
    ctx.emit.csv("behrend", &["lhs", "terms", "rhs_shape", "ratio"], &[row])?;
    ctx.emit.json("behrend", SCHEMA, &Single { set, weight, y, z, report })?;
    Ok(Outcome::Ok)
}
