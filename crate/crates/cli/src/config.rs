//! Flag resolution: command line first, then the `--config` file, then defaults.
//! Every resolved value is echoed into the report sidecars.

use std::path::Path;
use std::str::FromStr;

use anyhow::{Context, Result};
use monopole_core::Error;
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};

pub struct Settings {
    file: Map<String, Value>,
    echo: Map<String, Value>,
}

impl Settings {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let file = match path {
            None => Map::new(),
            Some(p) => {
                let text = std::fs::read_to_string(p).with_context(|| format!("reading config {}", p.display()))?;
                match serde_json::from_str::<Value>(&text) {
                    Ok(Value::Object(m)) => m,
                    Ok(_) => return Err(Error::Domain(format!("config {} is not a JSON object", p.display())).into()),
                    Err(e) => return Err(Error::Domain(format!("config {}: {e}", p.display())).into()),
                }
            }
        };
        Ok(Settings {
            file,
            echo: Map::new(),
        })
    }

    /// Rejects config keys that are not flags of the running command.
    pub fn restrict(&self, allowed: &[&str]) -> Result<()> {
        for key in self.file.keys() {
            if !allowed.contains(&key.as_str()) && !["out", "format"].contains(&key.as_str()) {
                return Err(Error::Domain(format!("config key {key:?} is not a flag of this command")).into());
            }
        }
        Ok(())
    }

    fn file_value<T: DeserializeOwned>(&self, key: &str) -> Result<Option<T>> {
        match self.file.get(key) {
            None | Some(Value::Null) => Ok(None),
            Some(v) => serde_json::from_value(v.clone())
                .map(Some)
                .map_err(|e| Error::Domain(format!("config key {key:?}: {e}")).into()),
        }
    }

    fn record<T: Serialize>(&mut self, key: &str, value: &T) {
        self.echo
            .insert(key.to_string(), serde_json::to_value(value).expect("flag values serialise"));
    }

    /// Resolved value of `key`, with `default` used when neither source sets it.
    pub fn get<T>(&mut self, key: &str, cli: Option<T>, default: Option<T>) -> Result<T>
    where
        T: DeserializeOwned + Serialize,
    {
        let value = match cli {
            Some(v) => Some(v),
            None => self.file_value(key)?,
        }
        .or(default)
        .ok_or_else(|| Error::Domain(format!("missing required flag --{key}")))?;
        self.record(key, &value);
        Ok(value)
    }

    /// Config-file value of `key`, not echoed (for the output directory).
    pub fn unrecorded<T: DeserializeOwned>(&self, key: &str) -> Result<Option<T>> {
        self.file_value(key)
    }

    /// As [`Settings::get`] for string-valued flags parsed with `FromStr`.
    pub fn parsed<T>(&mut self, key: &str, cli: Option<String>, default: &str) -> Result<T>
    where
        T: FromStr<Err = Error>,
    {
        let raw: String = self.get(key, cli, Some(default.to_string()))?;
        Ok(raw.parse::<T>()?)
    }

    pub fn echo(&self) -> Value {
        Value::Object(self.echo.clone())
    }
}
