//! Experiment configs: one file holds the global settings and a section per command.

use crate::commands::{aprime::AprimeArgs, behrend::BehrendArgs, overlap::OverlapArgs, pipeline::PipelineArgs};
use crate::ConstantsChoice;
use anyhow::{bail, Context};
use serde::Deserialize;
use std::path::{Path, PathBuf};

pub const CONFIG_SCHEMA: &str = "experiment-config/1";

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema: Option<String>,
    pub out: Option<PathBuf>,
    pub workers: Option<usize>,
    pub constants: Option<ConstantsChoice>,
    pub seed: Option<u64>,
    pub overlap: Option<OverlapArgs>,
    pub behrend: Option<BehrendArgs>,
    pub aprime: Option<AprimeArgs>,
    pub pipeline: Option<PipelineArgs>,
}

impl ExperimentConfig {
    /// Reads TOML or JSON, chosen by extension (JSON unless the file ends in `.toml`).
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let cfg: Self = if path.extension().is_some_and(|e| e == "toml") {
            toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))?
        } else {
            serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?
        };
        match cfg.schema.as_deref() {
            Some(CONFIG_SCHEMA) => Ok(cfg),
            Some(s) => bail!("unknown config schema {s:?}"),
            None => bail!("config has no schema field (expected {CONFIG_SCHEMA:?})"),
        }
    }
}

/// Fills unset values from a lower-priority source.
pub trait Fill {
    fn fill(self, from: Self) -> Self;
}

impl<T> Fill for Option<T> {
    fn fill(self, from: Self) -> Self {
        self.or(from)
    }
}

impl<T> Fill for Vec<T> {
    fn fill(self, from: Self) -> Self {
        if self.is_empty() {
            from
        } else {
            self
        }
    }
}

impl Fill for bool {
    fn fill(self, from: Self) -> Self {
        self || from
    }
}

macro_rules! fill_fields {
    ($t:ty { $($f:ident),* $(,)? }) => {
        impl $crate::config::Fill for $t {
            fn fill(self, from: Self) -> Self {
                Self { $($f: $crate::config::Fill::fill(self.$f, from.$f)),* }
            }
        }
    };
}
pub(crate) use fill_fields;
