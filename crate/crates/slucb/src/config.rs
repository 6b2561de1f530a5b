//! Flat `key=value` configuration files.
//!
//! Format: UTF-8 lines, `#` starts a comment, blank lines ignored, keys may
//! be dot-namespaced (`slucb.delta=0.01`). Duplicate keys are rejected with
//! line numbers. `parse(serialize(c)) == c` for every valid config
//! (serialization emits sorted keys, one per line).

use crate::error::{Error, Result};
use std::collections::BTreeMap;

/// A parsed config: key -> (value, defining line).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ConfigFile {
    entries: BTreeMap<String, (String, usize)>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::config(line_no, format!("expected key=value, got {line:?}")));
            };
            let key = key.trim().to_string();
            let value = value.trim().to_string();
            if key.is_empty() {
                return Err(Error::config(line_no, "empty key"));
            }
            if let Some((_, first)) = entries.get(&key) {
                return Err(Error::config(
                    line_no,
                    format!("duplicate key {key:?} (first defined on line {first})"),
                ));
            }
            entries.insert(key, (value, line_no));
        }
        Ok(Self { entries })
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    /// Sorted `key=value` lines; comments are not preserved.
    pub fn serialize(&self) -> String {
        let mut out = String::new();
        for (key, (value, _)) in &self.entries {
            out.push_str(key);
            out.push('=');
            out.push_str(value);
            out.push('\n');
        }
        out
    }

    /// Applies a `--set key=value` override (takes precedence over the file).
    pub fn set_override(&mut self, assignment: &str) -> Result<()> {
        let Some((key, value)) = assignment.split_once('=') else {
            return Err(Error::invalid(format!(
                "override {assignment:?} must have the form key=value"
            )));
        };
        let key = key.trim();
        if key.is_empty() {
            return Err(Error::invalid("override key is empty"));
        }
        self.entries.insert(key.trim().to_string(), (value.trim().to_string(), 0));
        Ok(())
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(|k| k.as_str())
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|(v, _)| v.as_str())
    }

    fn line_of(&self, key: &str) -> usize {
        self.entries.get(key).map(|(_, l)| *l).unwrap_or(0)
    }

    /// Rejects keys outside the schema, with the offending line number.
    pub fn reject_unknown_keys(&self, schema: &[SchemaKey]) -> Result<()> {
        for key in self.entries.keys() {
            if !schema.iter().any(|s| s.name == key) {
                return Err(Error::config(
                    self.line_of(key),
                    format!("unknown key {key:?}"),
                ));
            }
        }
        Ok(())
    }

    pub fn require(&self, key: &str) -> Result<&str> {
        self.get(key)
            .ok_or_else(|| Error::config(0, format!("missing required key {key:?}")))
    }

    pub fn get_f64(&self, key: &str) -> Result<Option<f64>> {
        self.get(key)
            .map(|v| {
                v.parse::<f64>().map_err(|_| {
                    Error::config(self.line_of(key), format!("key {key:?}: expected a number, got {v:?}"))
                })
            })
            .transpose()
    }

    pub fn get_u64(&self, key: &str) -> Result<Option<u64>> {
        self.get(key)
            .map(|v| {
                v.parse::<u64>().map_err(|_| {
                    Error::config(
                        self.line_of(key),
                        format!("key {key:?}: expected a nonnegative integer, got {v:?}"),
                    )
                })
            })
            .transpose()
    }

    /// Comma-separated list of positive integers.
    pub fn get_usize_list(&self, key: &str) -> Result<Option<Vec<usize>>> {
        match self.get(key) {
            None => Ok(None),
            Some(v) => {
                let mut out = Vec::new();
                for part in v.split(',') {
                    let parsed = part.trim().parse::<usize>().map_err(|_| {
                        Error::config(
                            self.line_of(key),
                            format!("key {key:?}: expected integers, got {part:?}"),
                        )
                    })?;
                    out.push(parsed);
                }
                Ok(Some(out))
            }
        }
    }

    pub fn get_f64_list(&self, key: &str) -> Result<Option<Vec<f64>>> {
        match self.get(key) {
            None => Ok(None),
            Some(v) => {
                let mut out = Vec::new();
                for part in v.split(',') {
                    let parsed = part.trim().parse::<f64>().map_err(|_| {
                        Error::config(
                            self.line_of(key),
                            format!("key {key:?}: expected numbers, got {part:?}"),
                        )
                    })?;
                    out.push(parsed);
                }
                Ok(Some(out))
            }
        }
    }
}

/// One schema entry: name, default shown in help, description.
pub struct SchemaKey {
    pub name: &'static str,
    pub default: &'static str,
    pub help: &'static str,
    pub required: bool,
}

pub const fn required(name: &'static str, help: &'static str) -> SchemaKey {
    SchemaKey { name, default: "(required)", help, required: true }
}

pub const fn optional(
    name: &'static str,
    default: &'static str,
    help: &'static str,
) -> SchemaKey {
    SchemaKey { name, default, help, required: false }
}

/// Renders a schema as help text: every recognized key with its default.
pub fn schema_help(title: &str, schema: &[SchemaKey]) -> String {
    let mut out = format!("{title}\n");
    for key in schema {
        out.push_str(&format!("  {:<22} default: {:<12} {}\n", key.name, key.default, key.help));
    }
    out
}
