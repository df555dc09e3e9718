//! The bundled primitive-set corpus for [`behrend_weighted_sum`] and its
//! recorded results.
//!
//! `data/behrend_corpus.json` holds, for each entry, the generator, the
//! exact left-hand side and the ratio observed when the file was written,
//! plus the band the ratios must stay in.

use crate::{behrend_weighted_sum, BehrendReport, PrimitiveSet, Result};
use rational_core::{fmt_rational, rat, MultSpec};
use serde::{Deserialize, Serialize};

const RECORDED: &str = include_str!("../data/behrend_corpus.json");

/// Generator of a primitive set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SetSpec {
    /// Integers in (x/2, x].
    HalfInterval { x: u64 },
    Primes { x: u64 },
    /// n <= x with Omega(n) = m.
    BigOmega { m: u32, x: u64 },
}

impl SetSpec {
    pub fn build(&self) -> PrimitiveSet {
        match *self {
            SetSpec::HalfInterval { x } => {
                PrimitiveSet::interval(x / 2, x).expect("half intervals are primitive")
            }
            SetSpec::Primes { x } => PrimitiveSet::primes(x),
            SetSpec::BigOmega { m, x } => PrimitiveSet::big_omega_slice(m, x),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Weight {
    One,
    Tau2,
}

impl Weight {
    pub fn spec(self) -> MultSpec {
        match self {
            Weight::One => MultSpec::one(),
            Weight::Tau2 => MultSpec::tau(2),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusEntry {
    pub name: String,
    pub set: SetSpec,
    pub weight: Weight,
    pub y: u64,
    pub z: u64,
    /// Exact left-hand side as "num/den".
    pub lhs: String,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusMetadata {
    pub band: [f64; 2],
    pub median: f64,
    pub entries: Vec<CorpusEntry>,
}

/// The generators making up the corpus, without recorded values.
pub fn generators() -> Vec<(String, SetSpec, Weight, u64, u64)> {
    let mut out = Vec::new();
    let mut push = |name: String, set: SetSpec, y: u64, z: u64| {
        for w in [Weight::One, Weight::Tau2] {
            let tag = match w {
                Weight::One => "one",
                Weight::Tau2 => "tau2",
            };
            out.push((format!("{name}/y{y}/z{z}/{tag}"), set.clone(), w, y, z));
        }
    };
    for x in [1000, 2000] {
        for y in [10, 100, x] {
            push(format!("half{x}"), SetSpec::HalfInterval { x }, y, x);
        }
    }
    for y in [10, 100, 2000] {
        push("primes2000".into(), SetSpec::Primes { x: 2000 }, y, 2000);
    }
    for m in [2, 3, 4] {
        for y in [10, 100] {
            push(format!("omega{m}_2000"), SetSpec::BigOmega { m, x: 2000 }, y, 2000);
        }
    }
    out
}

pub fn evaluate(set: &SetSpec, w: Weight, y: u64, z: u64) -> Result<BehrendReport> {
    behrend_weighted_sum(&set.build(), &w.spec(), &rat(y as i64), &rat(z as i64))
}

fn median(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    if v.is_empty() {
        return f64::NAN;
    }
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

/// Evaluates every generator and records the band [min, max] of the ratios.
pub fn record() -> Result<CorpusMetadata> {
    let mut entries = Vec::new();
    for (name, set, weight, y, z) in generators() {
        let r = evaluate(&set, weight, y, z)?;
        entries.push(CorpusEntry { name, set, weight, y, z, lhs: fmt_rational(&r.lhs), ratio: r.ratio });
    }
    let ratios: Vec<f64> = entries.iter().map(|e| e.ratio).collect();
    let lo = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(CorpusMetadata { band: [lo, hi], median: median(&ratios), entries })
}

pub fn recorded() -> CorpusMetadata {
    serde_json::from_str(RECORDED).expect("bundled corpus metadata is valid JSON")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntryCheck {
    pub name: String,
    pub lhs_exact: bool,
    pub ratio: f64,
    pub in_band: bool,
    pub below_ten_medians: bool,
}

impl EntryCheck {
    pub fn ok(&self) -> bool {
        self.lhs_exact && self.in_band && self.below_ten_medians
    }
}

/// Recomputes every recorded entry: the exact left-hand side must match
/// bit for bit and the ratio must stay in the band and below 10x the median.
pub fn check_recorded(meta: &CorpusMetadata) -> Result<Vec<EntryCheck>> {
    let tol = 1e-9;
    let [lo, hi] = meta.band;
    meta.entries
        .iter()
        .map(|e| {
            let r = evaluate(&e.set, e.weight, e.y, e.z)?;
            Ok(EntryCheck {
                name: e.name.clone(),
                lhs_exact: fmt_rational(&r.lhs) == e.lhs,
                ratio: r.ratio,
                in_band: r.ratio >= lo * (1.0 - tol) && r.ratio <= hi * (1.0 + tol),
                below_ten_medians: r.ratio <= 10.0 * meta.median,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generators_are_primitive_and_named_uniquely() {
        let g = generators();
        let names: std::collections::BTreeSet<_> = g.iter().map(|e| e.0.clone()).collect();
        assert_eq!(names.len(), g.len());
        for (_, set, ..) in &g {
            assert!(crate::is_primitive(set.build().elements()));
        }
    }

    #[test]
    fn recorded_matches_generators() {
        let meta = recorded();
        let names: Vec<_> = meta.entries.iter().map(|e| e.name.clone()).collect();
        let gen: Vec<_> = generators().into_iter().map(|e| e.0).collect();
        assert_eq!(names, gen);
    }

    /// Rewrites the bundled file; run with REGENERATE_CORPUS=1.
    #[test]
    #[ignore]
    fn regenerate() {
        if std::env::var("REGENERATE_CORPUS").is_ok() {
            let meta = record().unwrap();
            let path = concat!(env!("CARGO_MANIFEST_DIR"), "/data/behrend_corpus.json");
            std::fs::write(path, serde_json::to_string_pretty(&meta).unwrap() + "\n").unwrap();
        }
    }
}
