//! Run manifests and per-epoch history as line-oriented key-value records.

use std::fmt::Write as _;
use std::time::{SystemTime, UNIX_EPOCH};

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

use super::train::EpochRecord;

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Order-independent digest of named blobs: the hash of the sorted
/// `id <TAB> sha256(blob)` lines.
pub fn data_fingerprint<'a>(items: impl IntoIterator<Item = (&'a str, &'a [u8])>) -> String {
    let mut lines: Vec<String> = items
        .into_iter()
        .map(|(id, blob)| format!("{id}\t{}\n", sha256_hex(blob)))
        .collect();
    lines.sort();
    sha256_hex(lines.concat().as_bytes())
}

/// Written before a run starts computing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunManifest {
    pub command: String,
    pub started_unix: u64,
    pub config_hash: String,
    pub seed: u64,
    pub data_fingerprint: String,
    /// The resolved configuration, one `key = value` per entry.
    pub config: Vec<(String, String)>,
}

impl RunManifest {
    pub fn new(command: &str, config: Vec<(String, String)>, seed: u64, data_fingerprint: String) -> Self {
        let started_unix = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        let config_hash = sha256_hex(render_pairs(&config).as_bytes());
        Self { command: command.to_string(), started_unix, config_hash, seed, data_fingerprint, config }
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "run.command = {}", self.command).unwrap();
        writeln!(out, "run.started_unix = {}", self.started_unix).unwrap();
        writeln!(out, "run.config_hash = {}", self.config_hash).unwrap();
        writeln!(out, "run.seed = {}", self.seed).unwrap();
        writeln!(out, "run.data_fingerprint = {}", self.data_fingerprint).unwrap();
        out.push_str(&render_pairs(&self.config));
        out
    }
}

fn render_pairs(pairs: &[(String, String)]) -> String {
    pairs.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
}

const HISTORY_KEYS: [&str; 7] = ["epoch", "lr", "train_loss", "train_kd", "train_ce", "val_loss", "val_acc"];

/// One `key=value` line per epoch; floats use shortest round-trip form.
pub fn format_history(history: &[EpochRecord]) -> String {
    let mut out = String::new();
    for r in history {
        writeln!(
            out,
            "epoch={} lr={:?} train_loss={:?} train_kd={:?} train_ce={:?} val_loss={:?} val_acc={:?}",
            r.epoch, r.lr, r.train_loss, r.train_kd, r.train_ce, r.val_loss, r.val_acc
        )
        .unwrap();
    }
    out
}

pub fn parse_history(text: &str) -> Result<Vec<EpochRecord>> {
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let syntax = |message: String| Error::Syntax { line: n + 1, message };
        let mut vals = [0.0f64; 7];
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != HISTORY_KEYS.len() {
            return Err(syntax(format!("expected {} fields", HISTORY_KEYS.len())));
        }
        for (slot, (field, key)) in vals.iter_mut().zip(fields.iter().zip(HISTORY_KEYS)) {
            let v = field
                .strip_prefix(key)
                .and_then(|r| r.strip_prefix('='))
                .ok_or_else(|| syntax(format!("expected {key}=")))?;
            *slot = v.parse().map_err(|_| syntax(format!("bad value for {key}")))?;
        }
        let epoch = fields[0][6..].parse().map_err(|_| syntax("bad epoch".into()))?;
        out.push(EpochRecord {
            epoch,
            lr: vals[1],
            train_loss: vals[2],
            train_kd: vals[3],
            train_ce: vals[4],
            val_loss: vals[5],
            val_acc: vals[6],
        });
    }
    Ok(out)
}
