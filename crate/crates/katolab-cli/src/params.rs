//! Flat key-value parameter handling shared by every subcommand: a TOML
//! config file merged with command-line overrides, validated against a
//! per-subcommand schema, with comma-ranged values expanded into sweeps.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{bail, Context, Result};

/// How a key may be written and whether a comma turns it into a sweep axis.
#[derive(Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    /// Single value; a comma marks this key as the sweep axis.
    Sweep,
    /// Single value; commas are never range markers (names, paths, N:M pairs).
    Plain,
    /// Comma-separated list consumed whole by one run.
    List,
}

pub struct Schema {
    pub subcommand: &'static str,
    keys: &'static [(&'static str, Kind)],
}

const COMMON_KEYS: &[(&str, Kind)] = &[
    ("seed", Kind::Plain),
    ("out", Kind::Plain),
    ("format", Kind::Plain),
];

pub fn schema_for(subcommand: &'static str) -> Schema {
    let keys: &'static [(&'static str, Kind)] = match subcommand {
        "perturb" => &[
            ("dim", Kind::Sweep),
            ("index", Kind::Sweep),
            ("order", Kind::Sweep),
            ("beta", Kind::Sweep),
        ],
        "temple" => &[
            ("dim", Kind::Sweep),
            ("index", Kind::Sweep),
            ("noise", Kind::Sweep),
        ],
        "projections" => &[
            ("dim", Kind::Sweep),
            ("rank-p", Kind::Sweep),
            ("rank-q", Kind::Sweep),
            ("near", Kind::Sweep),
            ("pair", Kind::Plain),
        ],
        "adiabatic" => &[
            ("path", Kind::Plain),
            ("theta", Kind::Sweep),
            ("gap", Kind::Sweep),
            ("band", Kind::Plain),
            ("T", Kind::List),
            ("steps", Kind::Sweep),
        ],
        "resum" => &[
            ("series", Kind::Plain),
            ("order", Kind::Plain),
            ("at", Kind::Sweep),
            ("truth", Kind::Plain),
            ("pade", Kind::Plain),
            ("pade-table", Kind::Plain),
            ("partial-table", Kind::Plain),
            ("borel-z", Kind::Sweep),
            ("borel-order", Kind::Plain),
            ("hankel-k", Kind::Plain),
            ("trotter-n", Kind::Sweep),
            ("trotter-t", Kind::Sweep),
            ("trotter-dim", Kind::Plain),
            ("alt-n", Kind::Sweep),
            ("alt-theta", Kind::Sweep),
        ],
        "models" => &[
            ("name", Kind::Plain),
            ("mass-ratio", Kind::Sweep),
            ("grid", Kind::Plain),
            ("Z", Kind::Sweep),
            ("psi-kind", Kind::Plain),
            ("beta", Kind::Sweep),
            ("nu", Kind::Sweep),
            ("kmin", Kind::Plain),
            ("kmax", Kind::Plain),
            ("klog", Kind::Plain),
        ],
        other => panic!("no schema for subcommand {other}"),
    };
    Schema { subcommand, keys }
}

impl Schema {
    fn kind_of(&self, key: &str) -> Option<Kind> {
        self.keys
            .iter()
            .chain(COMMON_KEYS)
            .find(|(k, _)| *k == key)
            .map(|(_, kind)| *kind)
    }
}

/// Resolved parameters for one run. Getters record every value they hand
/// out, defaults included, so the output can echo the effective inputs.
#[derive(Clone)]
pub struct Params {
    subcommand: &'static str,
    values: BTreeMap<String, String>,
    echo: BTreeMap<String, String>,
}

pub fn load(schema: &Schema, config: Option<&Path>, flags: Vec<(&'static str, Option<String>)>) -> Result<Params> {
    let mut values = BTreeMap::new();
    if let Some(path) = config {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        let table: toml::Table = text
            .parse()
            .with_context(|| format!("config {} is not valid TOML", path.display()))?;
        for (key, value) in table {
            if schema.kind_of(&key).is_none() {
                bail!(
                    "config key `{key}` is not recognized for `{}`",
                    schema.subcommand
                );
            }
            let rendered = match value {
                toml::Value::String(s) => s,
                toml::Value::Integer(i) => i.to_string(),
                toml::Value::Float(f) => f.to_string(),
                toml::Value::Boolean(b) => b.to_string(),
                other => bail!("config key `{key}` must be a scalar, got {}", other.type_str()),
            };
            values.insert(key, rendered);
        }
    }
    for (key, value) in flags {
        if let Some(value) = value {
            values.insert(key.to_string(), value);
        }
    }
    if !values.contains_key("seed") {
        if let Ok(env_seed) = std::env::var("KATOLAB_SEED") {
            values.insert("seed".to_string(), env_seed);
        }
    }
    Ok(Params {
        subcommand: schema.subcommand,
        values,
        echo: BTreeMap::new(),
    })
}

/// Splits the parameters into sweep points: one per value of the single
/// comma-ranged key, or just the original set when nothing is ranged.
pub fn expand(schema: &Schema, params: &Params) -> Result<Vec<Params>> {
    let mut axes: Vec<(&str, Vec<&str>)> = Vec::new();
    for (key, value) in &params.values {
        if schema.kind_of(key) == Some(Kind::Sweep) && value.contains(',') {
            axes.push((key, value.split(',').collect()));
        }
    }
    match axes.len() {
        0 => Ok(vec![params.clone()]),
        1 => {
            let (key, points) = &axes[0];
            if points.iter().any(|p| p.trim().is_empty()) {
                bail!("empty entry in ranged value for `{key}`");
            }
            Ok(points
                .iter()
                .map(|point| {
                    let mut p = params.clone();
                    p.values.insert(key.to_string(), point.trim().to_string());
                    p
                })
                .collect())
        }
        _ => bail!("one sweep axis only"),
    }
}

impl Params {
    pub fn subcommand(&self) -> &'static str {
        self.subcommand
    }

    pub fn echo(&self) -> &BTreeMap<String, String> {
        &self.echo
    }

    fn record(&mut self, key: &str, value: String) {
        self.echo.insert(key.to_string(), value);
    }

    pub fn seed(&mut self) -> Result<u64> {
        let raw = self.values.get("seed").cloned().unwrap_or_else(|| "0".to_string());
        let seed: u64 = raw
            .trim()
            .parse()
            .with_context(|| format!("invalid value for `seed`: {raw}"))?;
        self.record("seed", seed.to_string());
        Ok(seed)
    }

    pub fn text(&mut self, key: &str, default: &str) -> String {
        let value = self.values.get(key).cloned().unwrap_or_else(|| default.to_string());
        self.record(key, value.clone());
        value
    }

    pub fn text_opt(&mut self, key: &str) -> Option<String> {
        let value = self.values.get(key).cloned();
        if let Some(v) = &value {
            self.record(key, v.clone());
        }
        value
    }

    pub fn f64(&mut self, key: &str, default: f64) -> Result<f64> {
        match self.values.get(key) {
            None => {
                self.record(key, format!("{default}"));
                Ok(default)
            }
            Some(raw) => {
                let parsed: f64 = raw
                    .trim()
                    .parse()
                    .with_context(|| format!("invalid value for `{key}`: {raw}"))?;
                if !parsed.is_finite() {
                    bail!("invalid value for `{key}`: must be finite");
                }
                self.record(key, raw.clone());
                Ok(parsed)
            }
        }
    }

    pub fn f64_opt(&mut self, key: &str) -> Result<Option<f64>> {
        if self.values.contains_key(key) {
            Ok(Some(self.f64(key, f64::NAN)?))
        } else {
            Ok(None)
        }
    }

    pub fn usize(&mut self, key: &str, default: usize) -> Result<usize> {
        match self.values.get(key) {
            None => {
                self.record(key, default.to_string());
                Ok(default)
            }
            Some(raw) => {
                let parsed: usize = raw
                    .trim()
                    .parse()
                    .with_context(|| format!("invalid value for `{key}`: {raw}"))?;
                self.record(key, raw.clone());
                Ok(parsed)
            }
        }
    }

    pub fn usize_opt(&mut self, key: &str) -> Result<Option<usize>> {
        if self.values.contains_key(key) {
            Ok(Some(self.usize(key, 0)?))
        } else {
            Ok(None)
        }
    }

    /// Comma-separated f64 list, e.g. `--T 25,50,100`.
    pub fn f64_list(&mut self, key: &str, default: &str) -> Result<Vec<f64>> {
        let raw = self.values.get(key).cloned().unwrap_or_else(|| default.to_string());
        let list: Result<Vec<f64>> = raw
            .split(',')
            .map(|piece| {
                piece
                    .trim()
                    .parse::<f64>()
                    .with_context(|| format!("invalid entry in `{key}`: {piece}"))
            })
            .collect();
        let list = list?;
        if list.is_empty() {
            bail!("`{key}` needs at least one value");
        }
        self.record(key, raw);
        Ok(list)
    }

    /// Colon-separated pair, e.g. `--pade 3:3` or `--grid 40:7999`.
    pub fn colon_pair(&mut self, key: &str) -> Result<Option<(f64, f64)>> {
        let Some(raw) = self.values.get(key).cloned() else {
            return Ok(None);
        };
        let (a, b) = raw
            .split_once(':')
            .with_context(|| format!("invalid value for `{key}`: expected A:B, got {raw}"))?;
        let a: f64 = a
            .trim()
            .parse()
            .with_context(|| format!("invalid value for `{key}`: {raw}"))?;
        let b: f64 = b
            .trim()
            .parse()
            .with_context(|| format!("invalid value for `{key}`: {raw}"))?;
        self.record(key, raw);
        Ok(Some((a, b)))
    }
}
