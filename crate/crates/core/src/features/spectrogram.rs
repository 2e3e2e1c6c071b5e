use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

pub const DEFAULT_BINS: usize = 144;
pub const DEFAULT_BINS_PER_OCTAVE: usize = 24;
pub const DEFAULT_HOP: usize = 2048;
pub const DEFAULT_SAMPLE_RATE: u32 = 22050;

/// Size of the text header that precedes the float data in feature files.
pub const HEADER_LEN: usize = 64;
const MAGIC: &str = "CQTF1";

/// A `frames x bins` magnitude matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrogram {
    data: Vec<f64>,
    n_frames: usize,
    n_bins: usize,
    pub bins_per_octave: usize,
    pub hop_samples: usize,
    pub sample_rate_hz: u32,
}

impl Spectrogram {
    pub fn new(data: Vec<f64>, n_frames: usize, n_bins: usize) -> Result<Self> {
        Self::with_timing(data, n_frames, n_bins, DEFAULT_HOP, DEFAULT_SAMPLE_RATE)
    }

    pub fn with_timing(
        data: Vec<f64>,
        n_frames: usize,
        n_bins: usize,
        hop_samples: usize,
        sample_rate_hz: u32,
    ) -> Result<Self> {
        if n_frames == 0 || n_bins == 0 {
            return Err(Error::invalid("spectrogram needs at least one frame and one bin"));
        }
        if data.len() != n_frames * n_bins {
            return Err(Error::Shape {
                expected: format!("{n_frames}x{n_bins}"),
                got: format!("{} values", data.len()),
            });
        }
        if hop_samples == 0 || sample_rate_hz == 0 {
            return Err(Error::invalid("hop and sample rate must be positive"));
        }
        Ok(Self {
            data,
            n_frames,
            n_bins,
            bins_per_octave: DEFAULT_BINS_PER_OCTAVE,
            hop_samples,
            sample_rate_hz,
        })
    }

    pub fn n_frames(&self) -> usize {
        self.n_frames
    }

    pub fn n_bins(&self) -> usize {
        self.n_bins
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn frame(&self, t: usize) -> &[f64] {
        &self.data[t * self.n_bins..(t + 1) * self.n_bins]
    }

    /// Frame period in seconds.
    pub fn hop_seconds(&self) -> f64 {
        self.hop_samples as f64 / self.sample_rate_hz as f64
    }

    pub fn duration_seconds(&self) -> f64 {
        self.n_frames as f64 * self.hop_seconds()
    }

    /// Copy of frames `[start, start + len)`, replicating the last frame past the end.
    pub fn window(&self, start: usize, len: usize) -> Vec<f64> {
        let mut out = Vec::with_capacity(len * self.n_bins);
        for t in start..start + len {
            out.extend_from_slice(self.frame(t.min(self.n_frames - 1)));
        }
        out
    }

    /// Same matrix with new values, keeping timing metadata.
    pub fn with_data(&self, data: Vec<f64>) -> Result<Self> {
        let mut s = Self::with_timing(data, self.n_frames, self.n_bins, self.hop_samples, self.sample_rate_hz)?;
        s.bins_per_octave = self.bins_per_octave;
        Ok(s)
    }

    /// Encodes to the feature file layout: a 64-byte ASCII header
    /// `CQTF1 <frames> <bins> <hop> <rate>` padded with spaces and ending in
    /// a newline, then little-endian `f32` values row by row.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut header = format!(
            "{MAGIC} {} {} {} {}",
            self.n_frames, self.n_bins, self.hop_samples, self.sample_rate_hz
        );
        debug_assert!(header.len() < HEADER_LEN);
        while header.len() < HEADER_LEN - 1 {
            header.push(' ');
        }
        header.push('\n');
        let mut out = Vec::with_capacity(HEADER_LEN + 4 * self.data.len());
        out.extend_from_slice(header.as_bytes());
        for &v in &self.data {
            out.extend_from_slice(&(v as f32).to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let bad = |m: String| Error::format("feature file", m);
        if bytes.len() < HEADER_LEN {
            return Err(bad(format!("{} bytes is shorter than the header", bytes.len())));
        }
        let header = std::str::from_utf8(&bytes[..HEADER_LEN])
            .map_err(|_| bad("header is not ASCII".into()))?;
        if !header.ends_with('\n') {
            return Err(bad("header must end with a newline".into()));
        }
        let mut fields = header.split_ascii_whitespace();
        if fields.next() != Some(MAGIC) {
            return Err(bad("missing CQTF1 magic".into()));
        }
        let mut next = |name: &str| -> Result<u64> {
            fields
                .next()
                .ok_or_else(|| bad(format!("missing {name}")))?
                .parse::<u64>()
                .map_err(|_| bad(format!("invalid {name}")))
        };
        let n_frames = next("frame count")? as usize;
        let n_bins = next("bin count")? as usize;
        let hop = next("hop")? as usize;
        let rate = u32::try_from(next("sample rate")?).map_err(|_| bad("sample rate too large".into()))?;
        if fields.next().is_some() {
            return Err(bad("unexpected header field".into()));
        }
        let body = &bytes[HEADER_LEN..];
        let expected = n_frames
            .checked_mul(n_bins)
            .and_then(|n| n.checked_mul(4))
            .ok_or_else(|| bad("dimensions overflow".into()))?;
        if body.len() != expected {
            return Err(bad(format!("expected {expected} data bytes, found {}", body.len())));
        }
        let data = body
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64)
            .collect();
        Self::with_timing(data, n_frames, n_bins, hop, rate)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| Error::file(path, e))?;
        Self::from_bytes(&bytes).map_err(|e| e.for_track(&path.display().to_string()))
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut f = std::fs::File::create(path).map_err(|e| Error::file(path, e))?;
        f.write_all(&self.to_bytes()).map_err(|e| Error::file(path, e))
    }
}
