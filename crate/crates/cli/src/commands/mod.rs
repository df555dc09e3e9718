pub mod aprime;
pub mod behrend;
pub mod graph;
pub mod overlap;
pub mod pipeline;

use anyhow::Context;
use rational_core::{parse_rational, BigRational, ReducedRational};

pub fn rational_arg(name: &str, s: &str) -> anyhow::Result<BigRational> {
    parse_rational(s).with_context(|| format!("--{name}"))
}

pub fn reduced_arg(name: &str, s: &str) -> anyhow::Result<ReducedRational> {
    s.parse::<ReducedRational>().with_context(|| format!("--{name}"))
}

pub fn read_json(path: &std::path::Path) -> anyhow::Result<serde_json::Value> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

/// Rejects a document whose schema field is present and different from `want`.
pub fn check_schema(v: &serde_json::Value, want: &str) -> anyhow::Result<()> {
    match v.get("schema").and_then(|s| s.as_str()) {
        Some(s) if s != want => anyhow::bail!("expected schema {want:?}, found {s:?}"),
        _ => Ok(()),
    }
}
