//! Teacher pseudo-labels and their on-disk formats.
//!
//! Frame labels are stored as text: a `PLAB1 <frames> <hop>` header line
//! followed by one vocabulary index per line. Teacher logits are stored as a
//! `LOGITS1 <frames> <classes>` header line followed by little-endian `f32`.

use std::path::Path;

use crate::annotation::FrameLabels;
use crate::chord::VOCAB_SIZE;
use crate::error::{Error, Result};
use crate::features::manifest::CorpusManifest;
use crate::features::spectrogram::Spectrogram;
use crate::model::{teacher_infer, LogitsSequence, Teacher};

#[derive(Debug, Clone, PartialEq)]
pub struct PseudoLabelTrack {
    pub id: String,
    pub labels: FrameLabels,
    pub logits: Option<LogitsSequence>,
}

/// Labels for every frame of every track that the teacher processed.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PseudoLabelSet {
    pub tracks: Vec<PseudoLabelTrack>,
    /// `(track id, error message)` for tracks that could not be labeled.
    pub failures: Vec<(String, String)>,
}

impl PseudoLabelSet {
    pub fn get(&self, id: &str) -> Option<&PseudoLabelTrack> {
        self.tracks.iter().find(|t| t.id == id)
    }

    pub fn total_frames(&self) -> usize {
        self.tracks.iter().map(|t| t.labels.len()).sum()
    }
}

fn label_track(
    teacher: &dyn Teacher,
    id: &str,
    spec: &Spectrogram,
    store_logits: bool,
) -> Result<PseudoLabelTrack> {
    let logits = teacher_infer(teacher, id, spec)?;
    let labels = FrameLabels::new(logits.argmax(), spec.hop_seconds()).map_err(|e| e.for_track(id))?;
    Ok(PseudoLabelTrack {
        id: id.to_string(),
        labels,
        logits: store_logits.then_some(logits),
    })
}

/// Frame-wise teacher argmax over in-memory tracks. Every frame is labeled;
/// nothing is filtered by confidence.
pub fn pseudo_label_tracks<'a>(
    teacher: &dyn Teacher,
    tracks: impl IntoIterator<Item = (&'a str, Result<&'a Spectrogram>)>,
    store_logits: bool,
) -> PseudoLabelSet {
    let mut set = PseudoLabelSet::default();
    for (id, spec) in tracks {
        match spec.and_then(|s| label_track(teacher, id, s, store_logits)) {
            Ok(t) => set.tracks.push(t),
            Err(e) => set.failures.push((id.to_string(), e.to_string())),
        }
    }
    set
}

/// Labels every manifest track, reading features from disk. Tracks whose
/// features cannot be read are recorded as failures.
pub fn generate_pseudo_labels(
    teacher: &dyn Teacher,
    manifest: &CorpusManifest,
    store_logits: bool,
) -> PseudoLabelSet {
    let mut set = PseudoLabelSet::default();
    for e in &manifest.entries {
        let result = Spectrogram::read(&e.features)
            .map_err(|err| err.for_track(&e.id))
            .and_then(|s| label_track(teacher, &e.id, &s, store_logits));
        match result {
            Ok(t) => set.tracks.push(t),
            Err(err) => set.failures.push((e.id.clone(), err.to_string())),
        }
    }
    set
}

pub fn encode_frame_labels(labels: &FrameLabels) -> String {
    let mut out = format!("PLAB1 {} {}\n", labels.len(), labels.hop_seconds());
    for l in labels.labels() {
        out.push_str(&l.to_string());
        out.push('\n');
    }
    out
}

pub fn decode_frame_labels(text: &str) -> Result<FrameLabels> {
    let bad = |m: String| Error::format("pseudo-labels", m);
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| bad("empty input".into()))?;
    let parts: Vec<&str> = header.split(' ').collect();
    let (n, hop) = match parts.as_slice() {
        ["PLAB1", n, hop] => (
            n.parse::<usize>().map_err(|_| bad("bad frame count".into()))?,
            hop.parse::<f64>().map_err(|_| bad("bad hop".into()))?,
        ),
        _ => return Err(bad(format!("bad header {header:?}"))),
    };
    let mut labels = Vec::with_capacity(n.min(1 << 20));
    for (i, line) in lines.enumerate() {
        let v: usize = line.trim().parse().map_err(|_| bad(format!("bad label on line {}", i + 2)))?;
        if v >= VOCAB_SIZE {
            return Err(bad(format!("label {v} outside the vocabulary")));
        }
        labels.push(v);
    }
    if labels.len() != n {
        return Err(bad(format!("header promises {n} frames, found {}", labels.len())));
    }
    FrameLabels::new(labels, hop)
}

pub fn encode_logits(logits: &LogitsSequence) -> Vec<u8> {
    let mut out = format!("LOGITS1 {} {}\n", logits.n_frames(), logits.n_classes()).into_bytes();
    for v in logits.data() {
        out.extend_from_slice(&(*v as f32).to_le_bytes());
    }
    out
}

pub fn decode_logits(bytes: &[u8]) -> Result<LogitsSequence> {
    let bad = |m: String| Error::format("logits", m);
    let nl = bytes
        .iter()
        .take(64)
        .position(|&b| b == b'\n')
        .ok_or_else(|| bad("missing header".into()))?;
    let header = std::str::from_utf8(&bytes[..nl]).map_err(|_| bad("header is not UTF-8".into()))?;
    let parts: Vec<&str> = header.split(' ').collect();
    let (t, c) = match parts.as_slice() {
        ["LOGITS1", t, c] => (
            t.parse::<usize>().map_err(|_| bad("bad frame count".into()))?,
            c.parse::<usize>().map_err(|_| bad("bad class count".into()))?,
        ),
        _ => return Err(bad(format!("bad header {header:?}"))),
    };
    let body = &bytes[nl + 1..];
    let expected = t.checked_mul(c).and_then(|n| n.checked_mul(4));
    if expected != Some(body.len()) {
        return Err(bad(format!("{t}x{c} logits need {expected:?} bytes, found {}", body.len())));
    }
    let data = body
        .chunks_exact(4)
        .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64)
        .collect();
    LogitsSequence::new(data, t, c)
}

pub fn write_frame_labels(path: &Path, labels: &FrameLabels) -> Result<()> {
    std::fs::write(path, encode_frame_labels(labels)).map_err(|e| Error::file(path, e))
}

pub fn read_frame_labels(path: &Path) -> Result<FrameLabels> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::file(path, e))?;
    decode_frame_labels(&text)
}

pub fn write_logits(path: &Path, logits: &LogitsSequence) -> Result<()> {
    std::fs::write(path, encode_logits(logits)).map_err(|e| Error::file(path, e))
}

pub fn read_logits(path: &Path) -> Result<LogitsSequence> {
    let bytes = std::fs::read(path).map_err(|e| Error::file(path, e))?;
    decode_logits(&bytes)
}
