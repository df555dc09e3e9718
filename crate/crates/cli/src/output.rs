//! Report emission: schema-tagged JSON and CSV, to files or stdout.

use anyhow::Context;
use serde::Serialize;
use std::path::PathBuf;

#[derive(Serialize)]
struct Doc<'a, T: Serialize> {
    schema: &'a str,
    #[serde(flatten)]
    body: &'a T,
}

pub struct Emitter {
    out: Option<PathBuf>,
}

impl Emitter {
    pub fn new(out: Option<PathBuf>) -> Self {
        Self { out }
    }

    fn write(&self, name: &str, text: &str) -> anyhow::Result<()> {
        match &self.out {
            Some(dir) => {
                std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
                let p = dir.join(name);
                std::fs::write(&p, text).with_context(|| format!("writing {}", p.display()))?;
                eprintln!("wrote {}", p.display());
            }
            None => print!("{text}"),
        }
        Ok(())
    }

    /// Writes `body` with a leading schema field. `body` must serialize as a map.
    pub fn json<T: Serialize>(&self, stem: &str, schema: &str, body: &T) -> anyhow::Result<()> {
        let mut s = serde_json::to_string_pretty(&Doc { schema, body })?;
        s.push('\n');
        self.write(&format!("{stem}.json"), &s)
    }

    /// Writes an already serialized JSON document.
    pub fn raw_json(&self, stem: &str, text: &str) -> anyhow::Result<()> {
        self.write(&format!("{stem}.json"), &format!("{}\n", text.trim_end()))
    }

    /// CSV goes to a file only; on stdout the JSON report already carries every column.
    pub fn csv(&self, stem: &str, header: &[&str], rows: &[Vec<String>]) -> anyhow::Result<()> {
        if self.out.is_none() {
            return Ok(());
        }
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(header)?;
        for r in rows {
            w.write_record(r)?;
        }
        let bytes = w.into_inner().map_err(|e| anyhow::anyhow!("{e}"))?;
        self.write(&format!("{stem}.csv"), &String::from_utf8(bytes)?)
    }
}
