//! Config plumbing: JSON config files, flag-over-file resolution, and the
//! replayable config echo every artifact carries.
//!
//! Precedence is fixed: a flag given on the command line wins over the same
//! key in `--config`, which wins over the built-in default.  After
//! resolution the effective values are frozen into a [`RunConfig`] that is
//! embedded in the artifact, so a run can be replayed from its own output
//! without the original invocation.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use laplacian_pinning::{Error, Result};
use serde::Serialize;
use serde_json::{Map, Value};

/// Output encoding of an artifact.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// Values loaded from a `--config` JSON file: one flat object whose keys
/// mirror the long flag names in snake_case.
#[derive(Debug, Default)]
pub struct FileCfg {
    map: Map<String, Value>,
}

impl FileCfg {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = fs::read_to_string(path).map_err(|e| {
            Error::InvalidConfig(format!("cannot read config {}: {e}", path.display()))
        })?;
        let value: Value = serde_json::from_str(&text).map_err(|e| {
            Error::InvalidConfig(format!("config {} is not valid JSON: {e}", path.display()))
        })?;
        match value {
            Value::Object(map) => Ok(Self { map }),
            other => Err(Error::InvalidConfig(format!(
                "config must be a JSON object, got {other}"
            ))),
        }
    }

    /// Reject keys the chosen command does not understand.  `threads`,
    /// `format` and `out` are accepted everywhere.
    pub fn check_keys(&self, allowed: &[&str]) -> Result<()> {
        for key in self.map.keys() {
            let common = matches!(key.as_str(), "threads" | "format" | "out");
            if !common && !allowed.contains(&key.as_str()) {
                return Err(Error::InvalidConfig(format!(
                    "unknown config key `{key}`; this command takes {}",
                    allowed.join(", ")
                )));
            }
        }
        Ok(())
    }

    pub fn f64(&self, key: &str) -> Result<Option<f64>> {
        match self.map.get(key) {
            None => Ok(None),
            Some(v) => v.as_f64().map(Some).ok_or_else(|| bad(key, v, "a number")),
        }
    }

    pub fn usize(&self, key: &str) -> Result<Option<usize>> {
        match self.map.get(key) {
            None => Ok(None),
            Some(v) => v
                .as_u64()
                .map(|u| Some(u as usize))
                .ok_or_else(|| bad(key, v, "a non-negative integer")),
        }
    }

    pub fn u64(&self, key: &str) -> Result<Option<u64>> {
        match self.map.get(key) {
            None => Ok(None),
            Some(v) => v.as_u64().map(Some).ok_or_else(|| bad(key, v, "a non-negative integer")),
        }
    }

    pub fn string(&self, key: &str) -> Result<Option<String>> {
        match self.map.get(key) {
            None => Ok(None),
            Some(v) => v
                .as_str()
                .map(|s| Some(s.to_string()))
                .ok_or_else(|| bad(key, v, "a string")),
        }
    }

    pub fn threads(&self) -> Result<Option<usize>> {
        self.usize("threads")
    }

    pub fn format(&self) -> Result<Option<Format>> {
        match self.string("format")? {
            None => Ok(None),
            Some(s) => match s.as_str() {
                "csv" => Ok(Some(Format::Csv)),
                "json" => Ok(Some(Format::Json)),
                other => Err(Error::InvalidConfig(format!(
                    "format must be csv or json, got {other}"
                ))),
            },
        }
    }

    pub fn out(&self) -> Result<Option<PathBuf>> {
        Ok(self.string("out")?.map(PathBuf::from))
    }
}

fn bad(key: &str, v: &Value, want: &str) -> Error {
    Error::InvalidConfig(format!("config key `{key}` must be {want}, got {v}"))
}

/// The resolved, effective configuration of one run: what actually executed
/// after flag-over-file precedence.  Keys are sorted, so the serialized
/// echo is byte-stable.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub command: String,
    pub params: BTreeMap<String, Value>,
}

impl RunConfig {
    pub fn new(command: &str) -> Self {
        Self {
            command: command.to_string(),
            params: BTreeMap::new(),
        }
    }

    pub fn set(&mut self, key: &str, value: impl Into<Value>) {
        self.params.insert(key.to_string(), value.into());
    }

    /// Compact one-line JSON for CSV comment headers.
    pub fn compact(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }
}

/// Parse `start:end:count` into an inclusive linear grid.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(Error::InvalidConfig(format!(
            "grid must be start:end:count, got `{spec}`"
        )));
    }
    let start: f64 = parts[0]
        .parse()
        .map_err(|_| Error::InvalidConfig(format!("bad grid start `{}`", parts[0])))?;
    let end: f64 = parts[1]
        .parse()
        .map_err(|_| Error::InvalidConfig(format!("bad grid end `{}`", parts[1])))?;
    let count: usize = parts[2]
        .parse()
        .map_err(|_| Error::InvalidConfig(format!("bad grid count `{}`", parts[2])))?;
    if count == 0 || !start.is_finite() || !end.is_finite() || end < start {
        return Err(Error::InvalidConfig(format!(
            "grid needs finite start <= end and count >= 1, got `{spec}`"
        )));
    }
    if count == 1 {
        return Ok(vec![start]);
    }
    let step = (end - start) / (count - 1) as f64;
    Ok((0..count).map(|i| start + step * i as f64).collect())
}

/// Parse a comma-separated list of numbers.
pub fn parse_list(spec: &str) -> Result<Vec<f64>> {
    spec.split(',')
        .map(|s| {
            s.trim()
                .parse()
                .map_err(|_| Error::InvalidConfig(format!("bad list entry `{s}` in `{spec}`")))
        })
        .collect()
}

/// Write the artifact to `--out` or stdout; bytes are identical either way.
pub fn emit(out: Option<&Path>, artifact: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, artifact).map_err(|e| {
            Error::InvalidConfig(format!("cannot write {}: {e}", path.display()))
        }),
        None => {
            print!("{artifact}");
            Ok(())
        }
    }
}

/// Pretty JSON artifact with the config echo first and a trailing newline.
pub fn json_artifact<T: Serialize>(config: &RunConfig, key: &str, results: &T) -> String {
    let mut root = Map::new();
    root.insert("config".into(), serde_json::to_value(config).expect("config"));
    root.insert(key.into(), serde_json::to_value(results).expect("results"));
    let mut s = serde_json::to_string_pretty(&Value::Object(root)).expect("artifact");
    s.push('\n');
    s
}

/// CSV comment header carrying the config echo.
pub fn csv_header(config: &RunConfig) -> String {
    format!("# lappin {}\n", config.compact())
}
