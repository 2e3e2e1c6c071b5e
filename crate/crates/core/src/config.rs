//! Line-oriented `key = value` configuration with dotted sections.
//!
//! ```text
//! # comment
//! seed = 7
//! [train]
//! lr = 1e-4        # becomes train.lr
//! model.d_model = 64
//! ```

use std::collections::BTreeMap;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ConfigMap {
    values: BTreeMap<String, String>,
}

fn valid_key(key: &str) -> bool {
    !key.is_empty()
        && !key.starts_with('.')
        && !key.ends_with('.')
        && !key.contains("..")
        && key.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '.' || c == '-')
}

fn strip_comment(line: &str) -> &str {
    let mut quoted = false;
    for (i, c) in line.char_indices() {
        match c {
            '"' => quoted = !quoted,
            '#' if !quoted => return &line[..i],
            _ => {}
        }
    }
    line
}

fn unquote(v: &str) -> Result<String, String> {
    if let Some(inner) = v.strip_prefix('"') {
        let inner = inner.strip_suffix('"').ok_or("unterminated string")?;
        if inner.contains('"') {
            return Err("stray quote in string".into());
        }
        return Ok(inner.to_string());
    }
    if v.contains('"') {
        return Err("stray quote in value".into());
    }
    Ok(v.to_string())
}

impl ConfigMap {
    pub fn parse(text: &str) -> Result<Self> {
        let mut map = Self::default();
        let mut section = String::new();
        for (n, raw) in text.lines().enumerate() {
            let err = |message: String| Error::Syntax { line: n + 1, message };
            let line = strip_comment(raw).trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('[') {
                let name = rest.strip_suffix(']').ok_or_else(|| err("unclosed section header".into()))?.trim();
                if !name.is_empty() && !valid_key(name) {
                    return Err(err(format!("invalid section name {name:?}")));
                }
                section = name.to_string();
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| err("expected `key = value`".into()))?;
            let k = k.trim();
            if !valid_key(k) {
                return Err(err(format!("invalid key {k:?}")));
            }
            let key = if section.is_empty() { k.to_string() } else { format!("{section}.{k}") };
            let value = unquote(v.trim()).map_err(err)?;
            if map.values.insert(key.clone(), value).is_some() {
                return Err(err(format!("duplicate key {key:?}")));
            }
        }
        Ok(map)
    }

    /// Applies a command-line `key=value` override.
    pub fn set_override(&mut self, assignment: &str) -> Result<()> {
        let (k, v) = assignment
            .split_once('=')
            .ok_or_else(|| Error::invalid(format!("override {assignment:?} is not key=value")))?;
        let k = k.trim();
        if !valid_key(k) {
            return Err(Error::invalid(format!("invalid override key {k:?}")));
        }
        let v = unquote(v.trim()).map_err(|m| Error::invalid(format!("override {k}: {m}")))?;
        self.values.insert(k.to_string(), v);
        Ok(())
    }

    pub fn insert(&mut self, key: &str, value: impl ToString) {
        self.values.insert(key.to_string(), value.to_string());
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn pairs(&self) -> Vec<(String, String)> {
        self.values.iter().map(|(k, v)| (k.clone(), v.clone())).collect()
    }

    pub fn to_text(&self) -> String {
        self.values
            .iter()
            .map(|(k, v)| {
                if v.is_empty() || v.contains('#') || v.trim() != v {
                    format!("{k} = \"{v}\"\n")
                } else {
                    format!("{k} = {v}\n")
                }
            })
            .collect()
    }
}

/// Consumes keys from a [`ConfigMap`] and reports whatever is left over.
pub struct ConfigReader {
    remaining: BTreeMap<String, String>,
}

impl ConfigReader {
    pub fn new(map: &ConfigMap) -> Self {
        Self { remaining: map.values.clone() }
    }

    /// Parses `key` if present, naming the key on failure.
    pub fn take<T: FromStr>(&mut self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        match self.remaining.remove(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|e| Error::invalid(format!("config key {key}: {e} (value {v:?})"))),
        }
    }

    /// Overwrites `slot` when `key` is present.
    pub fn read<T: FromStr>(&mut self, key: &str, slot: &mut T) -> Result<()>
    where
        T::Err: std::fmt::Display,
    {
        if let Some(v) = self.take(key)? {
            *slot = v;
        }
        Ok(())
    }

    pub fn take_str(&mut self, key: &str) -> Option<String> {
        self.remaining.remove(key)
    }

    /// Fails if any key was never consumed.
    pub fn finish(self) -> Result<()> {
        if self.remaining.is_empty() {
            return Ok(());
        }
        let keys: Vec<&str> = self.remaining.keys().map(String::as_str).collect();
        Err(Error::invalid(format!("unknown config keys: {}", keys.join(", "))))
    }
}
