//! Interval annotations, frame-label sequences and the `.lab` text format.

use std::fmt::Write as _;
use std::path::Path;

use crate::chord::{parse_chord, ChordLabel, NO_CHORD_INDEX, VOCAB_SIZE};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub start: f64,
    pub end: f64,
    pub label: ChordLabel,
}

impl Segment {
    pub fn new(start: f64, end: f64, label: ChordLabel) -> Self {
        Self { start, end, label }
    }

    pub fn duration(&self) -> f64 {
        self.end - self.start
    }
}

/// Time-ordered, non-overlapping chord segments in seconds. Gaps are allowed.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct IntervalSequence {
    segments: Vec<Segment>,
}

impl IntervalSequence {
    pub fn new(segments: Vec<Segment>) -> Result<Self> {
        let mut prev_end = 0.0f64;
        for (i, s) in segments.iter().enumerate() {
            if !(s.start.is_finite() && s.end.is_finite()) {
                return Err(Error::invalid(format!("segment {i} has non-finite bounds")));
            }
            if s.start < 0.0 || s.start >= s.end {
                return Err(Error::invalid(format!(
                    "segment {i} has invalid bounds [{}, {})",
                    s.start, s.end
                )));
            }
            if i > 0 && s.start < prev_end {
                return Err(Error::invalid(format!(
                    "segment {i} starts at {} before previous end {}",
                    s.start, prev_end
                )));
            }
            prev_end = s.end;
        }
        Ok(Self { segments })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn into_segments(self) -> Vec<Segment> {
        self.segments
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    pub fn len(&self) -> usize {
        self.segments.len()
    }

    pub fn start(&self) -> Option<f64> {
        self.segments.first().map(|s| s.start)
    }

    pub fn end(&self) -> Option<f64> {
        self.segments.last().map(|s| s.end)
    }

    /// Span from the first start to the last end.
    pub fn span(&self) -> f64 {
        match (self.start(), self.end()) {
            (Some(a), Some(b)) => b - a,
            _ => 0.0,
        }
    }

    /// Sum of segment durations (equals the span when gap-free).
    pub fn total_duration(&self) -> f64 {
        self.segments.iter().map(Segment::duration).sum()
    }

    /// Fills gaps with `N` and clips or pads (with `N`) to `[start, end)`.
    pub fn aligned_to(&self, start: f64, end: f64) -> IntervalSequence {
        let mut out = Vec::with_capacity(self.segments.len() + 2);
        let mut cursor = start;
        for s in &self.segments {
            let a = s.start.max(start);
            let b = s.end.min(end);
            if b <= a {
                continue;
            }
            if a > cursor {
                out.push(Segment::new(cursor, a, ChordLabel::NoChord));
            }
            out.push(Segment::new(a, b, s.label));
            cursor = b;
        }
        if cursor < end {
            out.push(Segment::new(cursor, end, ChordLabel::NoChord));
        }
        IntervalSequence { segments: out }
    }

    /// Label at time `t`, if any segment contains it.
    pub fn label_at(&self, t: f64) -> Option<ChordLabel> {
        let i = self.segments.partition_point(|s| s.end <= t);
        self.segments
            .get(i)
            .filter(|s| s.start <= t && t < s.end)
            .map(|s| s.label)
    }
}

/// Frame-wise vocabulary indices at a fixed hop.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameLabels {
    labels: Vec<usize>,
    hop_seconds: f64,
}

impl FrameLabels {
    pub fn new(labels: Vec<usize>, hop_seconds: f64) -> Result<Self> {
        if !(hop_seconds > 0.0 && hop_seconds.is_finite()) {
            return Err(Error::invalid(format!("hop must be positive, got {hop_seconds}")));
        }
        if let Some((t, &l)) = labels.iter().enumerate().find(|(_, &l)| l >= VOCAB_SIZE) {
            return Err(Error::invalid(format!("frame {t} has label index {l} >= {VOCAB_SIZE}")));
        }
        Ok(Self {
            labels,
            hop_seconds,
        })
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn hop_seconds(&self) -> f64 {
        self.hop_seconds
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

/// Samples the segment covering each frame center `(t + 0.5) * hop`.
/// Frames outside every segment become `N`.
pub fn intervals_to_frames(
    seq: &IntervalSequence,
    hop_seconds: f64,
    total_frames: usize,
) -> Result<FrameLabels> {
    if !(hop_seconds > 0.0) {
        return Err(Error::invalid("hop must be positive"));
    }
    if total_frames == 0 {
        return Err(Error::invalid("total_frames must be at least 1"));
    }
    let segs = seq.segments();
    let mut cursor = 0;
    let labels = (0..total_frames)
        .map(|t| {
            let center = (t as f64 + 0.5) * hop_seconds;
            while cursor < segs.len() && segs[cursor].end <= center {
                cursor += 1;
            }
            match segs.get(cursor) {
                Some(s) if s.start <= center => s.label.vocab_index(),
                _ => NO_CHORD_INDEX,
            }
        })
        .collect();
    FrameLabels::new(labels, hop_seconds)
}

/// Collapses maximal runs of equal labels into segments.
pub fn frames_to_intervals(frames: &FrameLabels) -> Result<IntervalSequence> {
    let labels = frames.labels();
    if labels.is_empty() {
        return Err(Error::invalid("cannot convert an empty frame sequence"));
    }
    let hop = frames.hop_seconds();
    let mut segments = Vec::new();
    let mut run_start = 0;
    for t in 1..=labels.len() {
        if t == labels.len() || labels[t] != labels[run_start] {
            let label = ChordLabel::from_vocab_index(labels[run_start]).unwrap();
            segments.push(Segment::new(run_start as f64 * hop, t as f64 * hop, label));
            run_start = t;
        }
    }
    IntervalSequence::new(segments)
}

/// Parses `.lab` text: `start end label` per line, whitespace separated.
/// Blank lines and `#` comments are skipped.
pub fn parse_lab(text: &str) -> Result<IntervalSequence> {
    let mut segments = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line_no = n + 1;
        let line = match raw.find('#') {
            Some(i) => &raw[..i],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let syntax = |message: String| Error::Syntax {
            line: line_no,
            message,
        };
        let mut fields = line.split_whitespace();
        let (Some(a), Some(b), Some(l)) = (fields.next(), fields.next(), fields.next()) else {
            return Err(syntax("expected `start end label`".into()));
        };
        if let Some(extra) = fields.next() {
            return Err(syntax(format!("unexpected trailing field {extra:?}")));
        }
        let start: f64 = a
            .parse()
            .map_err(|_| syntax(format!("invalid start time {a:?}")))?;
        let end: f64 = b
            .parse()
            .map_err(|_| syntax(format!("invalid end time {b:?}")))?;
        let label = parse_chord(l).map_err(|e| syntax(e.to_string()))?;
        segments.push(Segment::new(start, end, label));
    }
    IntervalSequence::new(segments)
}

pub fn format_lab(seq: &IntervalSequence) -> String {
    let mut out = String::new();
    for s in seq.segments() {
        let _ = writeln!(out, "{:.6}\t{:.6}\t{}", s.start, s.end, s.label);
    }
    out
}

pub fn read_lab(path: &Path) -> Result<IntervalSequence> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::file(path, e))?;
    parse_lab(&text)
}

pub fn write_lab(path: &Path, seq: &IntervalSequence) -> Result<()> {
    std::fs::write(path, format_lab(seq)).map_err(|e| Error::file(path, e))
}
