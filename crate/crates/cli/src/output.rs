use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use monopole_core::Error;
use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = Error;
    fn from_str(s: &str) -> monopole_core::Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(Error::Domain(format!("unknown format {other:?} (expected csv or json)"))),
        }
    }
}

pub struct Sink {
    pub dir: PathBuf,
    pub format: Format,
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values serialise");
    s.push('\n');
    s
}

impl Sink {
    fn write(&self, name: &str, contents: &str) -> Result<PathBuf> {
        fs::create_dir_all(&self.dir).with_context(|| format!("creating {}", self.dir.display()))?;
        let path = self.dir.join(name);
        fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
        println!("{}", path.display());
        Ok(path)
    }

    /// `stem.csv` plus the sidecar `stem.json` in csv mode; `full` as `stem.json`
    /// in json mode.
    pub fn emit(&self, stem: &str, csv: impl FnOnce() -> Result<String>, sidecar: Value, full: impl FnOnce() -> Value) -> Result<()> {
        match self.format {
            Format::Csv => {
                self.write(&format!("{stem}.csv"), &csv()?)?;
                self.write(&format!("{stem}.json"), &pretty(&sidecar))?;
            }
            Format::Json => {
                self.write(&format!("{stem}.json"), &pretty(&full()))?;
            }
        }
        Ok(())
    }

    pub fn emit_json(&self, stem: &str, v: &Value) -> Result<()> {
        self.write(&format!("{stem}.json"), &pretty(v)).map(|_| ())
    }
}

pub fn out_dir(dir: Option<PathBuf>) -> PathBuf {
    dir.unwrap_or_else(|| Path::new(".").to_path_buf())
}
