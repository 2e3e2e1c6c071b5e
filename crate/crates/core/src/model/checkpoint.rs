//! Checkpoint files: a text header followed by little-endian `f32` tensors.
//!
//! ```text
//! CHORDKD-CHECKPOINT 1
//! seed 42
//! d_model 192
//! ...
//! norm global <mean> <std>
//! tensor freq.embed.weight 12 192
//! ...
//! end
//! <f32 data of every tensor, in header order>
//! ```

use std::path::Path;

use crate::error::{Error, Result};
use crate::features::norm::{BinNormStats, NormStats, Normalizer};

use super::config::ModelConfig;
use super::student::{parameter_count, Student2e1d};

pub const FORMAT_VERSION: u32 = 1;
const MAGIC: &str = "CHORDKD-CHECKPOINT";
const MAX_HEADER: usize = 1 << 20;

/// A trained student with the input normalization it expects.
#[derive(Debug, Clone)]
pub struct Checkpoint {
    pub seed: u64,
    pub normalizer: Option<Normalizer>,
    pub student: Student2e1d,
}

fn join(values: &[f64]) -> String {
    values.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" ")
}

impl Checkpoint {
    pub fn to_bytes(&self) -> Vec<u8> {
        let c = self.student.config();
        let mut h = format!("{MAGIC} {FORMAT_VERSION}\nseed {}\n", self.seed);
        for (k, v) in [
            ("d_model", c.d_model),
            ("n_heads", c.n_heads),
            ("n_layers_freq", c.n_layers_freq),
            ("n_layers_time", c.n_layers_time),
            ("n_freq_groups", c.n_freq_groups),
            ("ffn_dim", c.ffn_dim),
            ("n_classes", c.n_classes),
            ("seq_len", c.seq_len),
            ("n_bins", c.n_bins),
        ] {
            h.push_str(&format!("{k} {v}\n"));
        }
        h.push_str(&format!("dropout {}\n", c.dropout));
        match &self.normalizer {
            None => h.push_str("norm none\n"),
            Some(Normalizer::Global(s)) => h.push_str(&format!("norm global {} {}\n", s.mean, s.std)),
            Some(Normalizer::PerBin(s)) => {
                h.push_str(&format!("norm per_bin {}\n", s.mean.len()));
                h.push_str(&format!("norm_mean {}\n", join(&s.mean)));
                h.push_str(&format!("norm_std {}\n", join(&s.std)));
            }
        }
        for (info, _) in self.student.params.named() {
            let dims: Vec<String> = info.shape.iter().map(|d| d.to_string()).collect();
            h.push_str(&format!("tensor {} {}\n", info.name, dims.join(" ")));
        }
        h.push_str("end\n");
        let mut out = h.into_bytes();
        for v in &self.student.params.values {
            out.extend_from_slice(&(*v as f32).to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let bad = |m: String| Error::format("checkpoint", m);
        let end = find_header_end(bytes).ok_or_else(|| bad("missing header terminator".into()))?;
        let header = std::str::from_utf8(&bytes[..end]).map_err(|_| bad("header is not UTF-8".into()))?;
        let data = &bytes[end..];
        let mut lines = header.lines();

        let first = lines.next().unwrap_or_default();
        let version = first
            .strip_prefix(MAGIC)
            .and_then(|r| r.trim().parse::<u32>().ok())
            .ok_or_else(|| bad(format!("bad magic line {first:?}")))?;
        if version != FORMAT_VERSION {
            return Err(bad(format!("unsupported format version {version}")));
        }

        let mut seed = None;
        let mut cfg = ModelConfig::default();
        let mut seen = 0usize;
        let mut normalizer = None;
        let mut norm_kind: Option<(String, usize)> = None;
        let mut norm_mean: Option<Vec<f64>> = None;
        let mut norm_std: Option<Vec<f64>> = None;
        let mut tensors: Vec<(String, Vec<usize>)> = Vec::new();
        for line in lines {
            let mut parts = line.split(' ');
            let key = parts.next().unwrap_or_default();
            let rest: Vec<&str> = parts.collect();
            let one = || -> Result<&str> {
                match rest.as_slice() {
                    [v] => Ok(v),
                    _ => Err(bad(format!("expected one value in {line:?}"))),
                }
            };
            let num = || -> Result<usize> {
                let v: usize = one()?.parse().map_err(|_| bad(format!("bad number in {line:?}")))?;
                if v > 1 << 16 {
                    return Err(bad(format!("value too large in {line:?}")));
                }
                Ok(v)
            };
            match key {
                "seed" => seed = Some(one()?.parse().map_err(|_| bad("bad seed".into()))?),
                "d_model" => { cfg.d_model = num()?; seen += 1 }
                "n_heads" => { cfg.n_heads = num()?; seen += 1 }
                "n_layers_freq" => { cfg.n_layers_freq = num()?.min(1 << 8); seen += 1 }
                "n_layers_time" => { cfg.n_layers_time = num()?.min(1 << 8); seen += 1 }
                "n_freq_groups" => { cfg.n_freq_groups = num()?; seen += 1 }
                "ffn_dim" => { cfg.ffn_dim = num()?; seen += 1 }
                "n_classes" => { cfg.n_classes = num()?; seen += 1 }
                "seq_len" => { cfg.seq_len = num()?; seen += 1 }
                "n_bins" => { cfg.n_bins = num()?; seen += 1 }
                "dropout" => {
                    cfg.dropout = one()?.parse().map_err(|_| bad("bad dropout".into()))?;
                    seen += 1
                }
                "norm" => match rest.as_slice() {
                    ["none"] => norm_kind = Some(("none".into(), 0)),
                    ["global", m, s] => {
                        let m = m.parse().map_err(|_| bad("bad norm mean".into()))?;
                        let s = s.parse().map_err(|_| bad("bad norm std".into()))?;
                        normalizer = Some(Normalizer::Global(NormStats::new(m, s)?));
                        norm_kind = Some(("global".into(), 0));
                    }
                    ["per_bin", n] => {
                        let n = n.parse().map_err(|_| bad("bad norm size".into()))?;
                        norm_kind = Some(("per_bin".into(), n));
                    }
                    _ => return Err(bad(format!("bad norm line {line:?}"))),
                },
                "norm_mean" | "norm_std" => {
                    let v = rest
                        .iter()
                        .map(|s| s.parse::<f64>())
                        .collect::<std::result::Result<Vec<_>, _>>()
                        .map_err(|_| bad(format!("bad {key} values")))?;
                    if key == "norm_mean" { norm_mean = Some(v) } else { norm_std = Some(v) }
                }
                "tensor" => {
                    let (name, dims) = rest.split_first().ok_or_else(|| bad("tensor without name".into()))?;
                    let dims = dims
                        .iter()
                        .map(|d| d.parse::<usize>())
                        .collect::<std::result::Result<Vec<_>, _>>()
                        .map_err(|_| bad(format!("bad dims for {name}")))?;
                    tensors.push((name.to_string(), dims));
                }
                "end" if rest.is_empty() => break,
                _ => return Err(bad(format!("unknown header key {key:?}"))),
            }
        }
        let seed = seed.ok_or_else(|| bad("missing seed".into()))?;
        if seen != 10 {
            return Err(bad("model configuration incomplete or repeated".into()));
        }
        match norm_kind {
            None => return Err(bad("missing norm line".into())),
            Some((kind, n)) if kind == "per_bin" => {
                let (mean, std) = (norm_mean.unwrap_or_default(), norm_std.unwrap_or_default());
                if mean.len() != n || std.len() != n || n == 0 {
                    return Err(bad("per-bin normalization has wrong length".into()));
                }
                for (&m, &s) in mean.iter().zip(&std) {
                    NormStats::new(m, s)?;
                }
                normalizer = Some(Normalizer::PerBin(BinNormStats { mean, std }));
            }
            _ => {}
        }
        cfg.validate()?;
        let expected = parameter_count(&cfg);
        if data.len() != expected * 4 {
            return Err(bad(format!(
                "expected {} bytes of tensor data, found {}",
                expected * 4,
                data.len()
            )));
        }
        let mut values = data
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64);
        let mut named = Vec::with_capacity(tensors.len());
        for (name, shape) in tensors {
            let len = shape.iter().try_fold(1usize, |a, &d| a.checked_mul(d));
            let len = len.filter(|&l| l <= expected).ok_or_else(|| bad(format!("tensor {name} too large")))?;
            let v: Vec<f64> = values.by_ref().take(len).collect();
            if v.len() != len {
                return Err(bad(format!("tensor {name} is truncated")));
            }
            named.push((name, shape, v));
        }
        let student = Student2e1d::from_tensors(cfg, &named)?;
        Ok(Self { seed, normalizer, student })
    }

    pub fn read(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| Error::file(path, e))?;
        Self::from_bytes(&bytes)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_bytes()).map_err(|e| Error::file(path, e))
    }
}

fn find_header_end(bytes: &[u8]) -> Option<usize> {
    let limit = bytes.len().min(MAX_HEADER);
    let hay = &bytes[..limit];
    if hay.starts_with(b"end\n") {
        return Some(4);
    }
    hay.windows(5).position(|w| w == b"\nend\n").map(|p| p + 5)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Checkpoint {
        Checkpoint {
            seed: 5,
            normalizer: Some(Normalizer::PerBin(BinNormStats {
                mean: (0..12).map(|i| i as f64 * 0.1).collect(),
                std: vec![0.3; 12],
            })),
            student: Student2e1d::new(ModelConfig::tiny(), 5).unwrap(),
        }
    }

    #[test]
    fn round_trip_is_exact() {
        let c = sample();
        let back = Checkpoint::from_bytes(&c.to_bytes()).unwrap();
        assert_eq!(back.seed, 5);
        assert_eq!(back.normalizer, c.normalizer);
        assert_eq!(back.student.config(), c.student.config());
        assert_eq!(back.student.params.values, c.student.params.values);
        assert_eq!(back.to_bytes(), c.to_bytes());
    }

    #[test]
    fn corrupt_inputs_are_rejected() {
        let bytes = sample().to_bytes();
        assert!(Checkpoint::from_bytes(&bytes[..bytes.len() - 1]).is_err());
        let text = String::from_utf8_lossy(&bytes).replace("tensor out.head.bias", "tensor out.head.bogus");
        assert!(Checkpoint::from_bytes(text.as_bytes()).is_err());
        assert!(Checkpoint::from_bytes(b"garbage").is_err());
        let swapped = String::from_utf8_lossy(&bytes).replace("seq_len 4", "seq_len 5");
        assert!(Checkpoint::from_bytes(swapped.as_bytes()).is_err());
    }
}
