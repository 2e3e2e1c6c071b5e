use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

/// One corpus entry: track id, feature file and annotation file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestEntry {
    pub id: String,
    pub features: PathBuf,
    pub labels: PathBuf,
}

/// Line-oriented `id<TAB>features<TAB>labels` listing. Relative paths are
/// resolved against the manifest's directory when loaded from disk.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CorpusManifest {
    pub entries: Vec<ManifestEntry>,
}

impl CorpusManifest {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries: Vec<ManifestEntry> = Vec::new();
        for (n, line) in text.lines().enumerate() {
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() != 3 || fields.iter().any(|f| f.is_empty()) {
                return Err(Error::Syntax {
                    line: n + 1,
                    message: "expected `id<TAB>features<TAB>labels`".into(),
                });
            }
            if entries.iter().any(|e| e.id == fields[0]) {
                return Err(Error::Syntax {
                    line: n + 1,
                    message: format!("duplicate track id {:?}", fields[0]),
                });
            }
            entries.push(ManifestEntry {
                id: fields[0].to_string(),
                features: PathBuf::from(fields[1]),
                labels: PathBuf::from(fields[2]),
            });
        }
        Ok(Self { entries })
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for e in &self.entries {
            writeln!(out, "{}\t{}\t{}", e.id, e.features.display(), e.labels.display()).unwrap();
        }
        out
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::file(path, e))?;
        let mut m = Self::parse(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        for e in &mut m.entries {
            if e.features.is_relative() {
                e.features = base.join(&e.features);
            }
            if e.labels.is_relative() {
                e.labels = base.join(&e.labels);
            }
        }
        Ok(m)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text()).map_err(|e| Error::file(path, e))
    }

    pub fn ids(&self) -> Vec<String> {
        self.entries.iter().map(|e| e.id.clone()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_formats() {
        let text = "a\tfeat/a.cqt\tlab/a.lab\n# note\n\nb\tfeat/b.cqt\tlab/b.lab\n";
        let m = CorpusManifest::parse(text).unwrap();
        assert_eq!(m.entries.len(), 2);
        assert_eq!(m.entries[1].labels, PathBuf::from("lab/b.lab"));
        assert_eq!(CorpusManifest::parse(&m.to_text()).unwrap(), m);
    }

    #[test]
    fn rejects_malformed_lines() {
        assert!(CorpusManifest::parse("a\tb\n").is_err());
        assert!(CorpusManifest::parse("a\tb\tc\nA\tb\tc\na\tx\ty\n").is_err());
        assert!(CorpusManifest::parse("a\t\tc\n").is_err());
    }
}
