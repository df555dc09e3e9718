use super::{rational_arg, reduced_arg};
use crate::config::fill_fields;
use crate::{Ctx, Outcome};
use anyhow::Context;
use clap::Args;
use interval_measure::{overlap_sj, OverlapReport};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rational_core::{BigRational, ReducedRational};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub const SCHEMA: &str = "overlap-report/1";

#[derive(Args, Clone, Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OverlapArgs {
    #[arg(long)]
    pub alpha: Option<String>,
    #[arg(long)]
    pub beta: Option<String>,
    /// Comma-separated horizons, e.g. 1e3,1e4.
    #[arg(long = "T", alias = "t", value_delimiter = ',')]
    #[serde(rename = "T")]
    pub t: Vec<String>,
    /// Draw this many random pairs (seeded) instead of --alpha/--beta.
    #[arg(long)]
    pub random: Option<usize>,
    /// Height bound for random pairs.
    #[arg(long)]
    pub max_height: Option<u64>,
}

fill_fields!(OverlapArgs { alpha, beta, t, random, max_height });

#[derive(Serialize)]
struct Summary {
    rows: usize,
    agreement_exact: bool,
    boundary_ok: bool,
    s0_gating_ok: bool,
}

#[derive(Serialize)]
struct Report {
    summary: Summary,
    rows: Vec<OverlapReport>,
}

/// Random pairs alpha > beta >= 2 with heights <= h and a non-integer ratio.
pub fn random_pairs(seed: u64, n: usize, h: u64) -> Vec<(ReducedRational, ReducedRational)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let mut draw = || {
            let q = rng.gen_range(1..=h / 2);
            ReducedRational::new(rng.gen_range(2 * q..=h), q)
        };
        let (x, y) = (draw(), draw());
        if x.num() > &h.into() || y.num() > &h.into() || x == y {
            continue;
        }
        let (a, b) = if x > y { (x, y) } else { (y, x) };
        if !a.div(&b).is_integer() {
            out.push((a, b));
        }
    }
    out
}

pub fn run(a: OverlapArgs, ctx: &Ctx) -> anyhow::Result<Outcome> {
    let ts: Vec<BigRational> = a.t.iter().map(|s| rational_arg("T", s)).collect::<anyhow::Result<_>>()?;
    anyhow::ensure!(!ts.is_empty(), "--T needs at least one horizon");
    let pairs = match a.random {
        Some(n) => random_pairs(ctx.seed, n, a.max_height.unwrap_or(1000)),
        None => {
            let alpha = reduced_arg("alpha", a.alpha.as_deref().context("--alpha is required")?)?;
            let beta = reduced_arg("beta", a.beta.as_deref().context("--beta is required")?)?;
            vec![(alpha, beta)]
        }
    };
    let jobs: Vec<_> = pairs.iter().flat_map(|p| ts.iter().map(move |t| (p, t))).collect();
    let rows = jobs
        .par_iter()
        .map(|((al, be), t)| overlap_sj(al, be, t).with_context(|| format!("pair ({al}, {be})")))
        .collect::<anyhow::Result<Vec<_>>>()?;
    let summary = Summary {
        rows: rows.len(),
        agreement_exact: rows.iter().all(|r| r.agreement_exact()),
        boundary_ok: rows.iter().all(|r| r.boundary_ok()),
        s0_gating_ok: rows.iter().all(|r| r.s0_gating_ok()),
    };
    let ok = summary.agreement_exact && summary.boundary_ok && summary.s0_gating_ok;
    let header: Vec<&str> = OverlapReport::csv_header().split(',').collect();
    let csv: Vec<Vec<String>> = rows.iter().map(|r| r.csv_row().split(',').map(String::from).collect()).collect();
    ctx.emit.csv("overlap", &header, &csv)?;
    ctx.emit.json("overlap", SCHEMA, &Report { summary, rows })?;
    Ok(Outcome::from_ok(ok))
}
