//! Listing of stored pseudo-labels: `id<TAB>labels<TAB>logits-or-dash`.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};

#[derive(Debug)]
pub struct PseudoEntry {
    pub id: String,
    pub labels: PathBuf,
    pub logits: Option<PathBuf>,
}

pub fn format(entries: &[PseudoEntry]) -> String {
    entries
        .iter()
        .map(|e| {
            let logits = e.logits.as_ref().map(|p| p.display().to_string()).unwrap_or_else(|| "-".into());
            format!("{}\t{}\t{}\n", e.id, e.labels.display(), logits)
        })
        .collect()
}

pub fn read(path: &Path) -> Result<Vec<PseudoEntry>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let base = path.parent().unwrap_or(Path::new("."));
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split('\t').collect();
        if f.len() != 3 {
            bail!("{}:{}: expected three tab-separated fields", path.display(), n + 1);
        }
        out.push(PseudoEntry {
            id: f[0].to_string(),
            labels: base.join(f[1]),
            logits: (f[2] != "-").then(|| base.join(f[2])),
        });
    }
    Ok(out)
}
