//! Chord symbols in Harte-style syntax and the fixed 170-class vocabulary.
//!
//! The vocabulary is 12 roots x 14 qualities, followed by the unknown chord
//! `X` (index 168) and the no-chord symbol `N` (index 169).

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// Number of classes in the chord vocabulary.
pub const VOCAB_SIZE: usize = 170;
/// Number of chord qualities in the vocabulary.
pub const NUM_QUALITIES: usize = 14;
/// Vocabulary index of the unknown chord `X`.
pub const UNKNOWN_INDEX: usize = 168;
/// Vocabulary index of the no-chord symbol `N`.
pub const NO_CHORD_INDEX: usize = 169;

const SHARP_NAMES: [&str; 12] = [
    "C", "C#", "D", "D#", "E", "F", "F#", "G", "G#", "A", "A#", "B",
];

/// A pitch class, 0 = C through 11 = B.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PitchClass(u8);

impl PitchClass {
    pub fn new(value: u8) -> Option<Self> {
        (value < 12).then_some(Self(value))
    }

    /// Wraps any integer onto the 12 pitch classes.
    pub fn wrapping(value: i32) -> Self {
        Self(value.rem_euclid(12) as u8)
    }

    pub fn value(self) -> u8 {
        self.0
    }

    pub fn transpose(self, semitones: i32) -> Self {
        Self::wrapping(self.0 as i32 + semitones)
    }

    pub fn name(self) -> &'static str {
        SHARP_NAMES[self.0 as usize]
    }

    pub fn all() -> impl Iterator<Item = PitchClass> {
        (0..12).map(PitchClass)
    }
}

/// The 14 chord qualities of the vocabulary, in vocabulary order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Quality {
    Min,
    Maj,
    Dim,
    Aug,
    Min6,
    Maj6,
    Min7,
    MinMaj7,
    Maj7,
    Dom7,
    Dim7,
    HalfDim7,
    Sus2,
    Sus4,
}

impl Quality {
    pub const ALL: [Quality; NUM_QUALITIES] = [
        Quality::Min,
        Quality::Maj,
        Quality::Dim,
        Quality::Aug,
        Quality::Min6,
        Quality::Maj6,
        Quality::Min7,
        Quality::MinMaj7,
        Quality::Maj7,
        Quality::Dom7,
        Quality::Dim7,
        Quality::HalfDim7,
        Quality::Sus2,
        Quality::Sus4,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(index: usize) -> Option<Self> {
        Self::ALL.get(index).copied()
    }

    /// Canonical Harte shorthand.
    pub fn shorthand(self) -> &'static str {
        match self {
            Quality::Min => "min",
            Quality::Maj => "maj",
            Quality::Dim => "dim",
            Quality::Aug => "aug",
            Quality::Min6 => "min6",
            Quality::Maj6 => "maj6",
            Quality::Min7 => "min7",
            Quality::MinMaj7 => "minmaj7",
            Quality::Maj7 => "maj7",
            Quality::Dom7 => "7",
            Quality::Dim7 => "dim7",
            Quality::HalfDim7 => "hdim7",
            Quality::Sus2 => "sus2",
            Quality::Sus4 => "sus4",
        }
    }

    /// Semitone offsets above the root, root included.
    pub fn intervals(self) -> &'static [u8] {
        match self {
            Quality::Min => &[0, 3, 7],
            Quality::Maj => &[0, 4, 7],
            Quality::Dim => &[0, 3, 6],
            Quality::Aug => &[0, 4, 8],
            Quality::Min6 => &[0, 3, 7, 9],
            Quality::Maj6 => &[0, 4, 7, 9],
            Quality::Min7 => &[0, 3, 7, 10],
            Quality::MinMaj7 => &[0, 3, 7, 11],
            Quality::Maj7 => &[0, 4, 7, 11],
            Quality::Dom7 => &[0, 4, 7, 10],
            Quality::Dim7 => &[0, 3, 6, 9],
            Quality::HalfDim7 => &[0, 3, 6, 10],
            Quality::Sus2 => &[0, 2, 7],
            Quality::Sus4 => &[0, 5, 7],
        }
    }

    /// 12-bit semitone bitmap relative to the root.
    pub fn bitmap(self) -> [bool; 12] {
        let mut bits = [false; 12];
        for &i in self.intervals() {
            bits[i as usize] = true;
        }
        bits
    }

    /// Resolves a quality string through the alias table. Returns `None`
    /// for syntactically valid qualities that are outside the vocabulary.
    pub fn from_alias(text: &str) -> Option<Self> {
        let q = match text {
            "" | "maj" | "M" => Quality::Maj,
            "min" | "m" => Quality::Min,
            "dim" => Quality::Dim,
            "aug" => Quality::Aug,
            "min6" | "m6" => Quality::Min6,
            "maj6" | "6" => Quality::Maj6,
            "min7" | "m7" => Quality::Min7,
            "minmaj7" | "mmaj7" => Quality::MinMaj7,
            "maj7" | "M7" => Quality::Maj7,
            "7" => Quality::Dom7,
            "dim7" => Quality::Dim7,
            "hdim7" | "m7b5" => Quality::HalfDim7,
            "sus2" => Quality::Sus2,
            "sus4" | "sus" => Quality::Sus4,
            _ => return None,
        };
        Some(q)
    }
}

impl fmt::Display for Quality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.shorthand())
    }
}

/// A chord label restricted to the vocabulary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ChordLabel {
    Chord { root: PitchClass, quality: Quality },
    NoChord,
    Unknown,
}

impl ChordLabel {
    pub fn chord(root: u8, quality: Quality) -> Self {
        let root = PitchClass::new(root).expect("root must be in 0..12");
        ChordLabel::Chord { root, quality }
    }

    pub fn root(&self) -> Option<PitchClass> {
        match self {
            ChordLabel::Chord { root, .. } => Some(*root),
            _ => None,
        }
    }

    pub fn quality(&self) -> Option<Quality> {
        match self {
            ChordLabel::Chord { quality, .. } => Some(*quality),
            _ => None,
        }
    }

    pub fn is_chord(&self) -> bool {
        matches!(self, ChordLabel::Chord { .. })
    }

    pub fn vocab_index(&self) -> usize {
        match self {
            ChordLabel::Chord { root, quality } => {
                root.value() as usize * NUM_QUALITIES + quality.index()
            }
            ChordLabel::Unknown => UNKNOWN_INDEX,
            ChordLabel::NoChord => NO_CHORD_INDEX,
        }
    }

    pub fn from_vocab_index(index: usize) -> Option<Self> {
        match index {
            UNKNOWN_INDEX => Some(ChordLabel::Unknown),
            NO_CHORD_INDEX => Some(ChordLabel::NoChord),
            i if i < UNKNOWN_INDEX => Some(ChordLabel::Chord {
                root: PitchClass((i / NUM_QUALITIES) as u8),
                quality: Quality::ALL[i % NUM_QUALITIES],
            }),
            _ => None,
        }
    }

    /// Every label of the vocabulary in index order.
    pub fn vocabulary() -> impl Iterator<Item = ChordLabel> {
        (0..VOCAB_SIZE).map(|i| ChordLabel::from_vocab_index(i).unwrap())
    }

    /// Absolute pitch classes sounded by the chord.
    pub fn pitch_classes(&self) -> Vec<PitchClass> {
        match self {
            ChordLabel::Chord { root, quality } => quality
                .intervals()
                .iter()
                .map(|&i| root.transpose(i as i32))
                .collect(),
            _ => Vec::new(),
        }
    }
}

impl fmt::Display for ChordLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ChordLabel::Chord { root, quality } => write!(f, "{}:{}", root.name(), quality),
            ChordLabel::NoChord => f.write_str("N"),
            ChordLabel::Unknown => f.write_str("X"),
        }
    }
}

impl FromStr for ChordLabel {
    type Err = ParseChordError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_chord(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseChordError {
    #[error("empty chord symbol")]
    Empty,
    #[error("unexpected character {ch:?} at position {pos} in {input:?}")]
    UnexpectedChar { input: String, pos: usize, ch: char },
    #[error("unexpected end of chord symbol {input:?}")]
    UnexpectedEnd { input: String },
}

/// Parses a Harte-style chord symbol such as `C:maj7`, `Db:min/b3` or `N`.
///
/// Bass notes are validated and dropped. Qualities, extensions or omissions
/// that fall outside the vocabulary produce [`ChordLabel::Unknown`].
pub fn parse_chord(text: &str) -> Result<ChordLabel, ParseChordError> {
    if text.is_empty() {
        return Err(ParseChordError::Empty);
    }
    let unexpected = |pos: usize| {
        let ch = text[pos..].chars().next().unwrap();
        ParseChordError::UnexpectedChar {
            input: text.to_string(),
            pos,
            ch,
        }
    };
    if let Some(pos) = text.find(|c: char| !c.is_ascii() || c.is_ascii_whitespace()) {
        return Err(unexpected(pos));
    }
    match text {
        "N" => return Ok(ChordLabel::NoChord),
        "X" => return Ok(ChordLabel::Unknown),
        _ => {}
    }

    let bytes = text.as_bytes();
    let root_pc = match bytes[0] {
        b'C' => 0,
        b'D' => 2,
        b'E' => 4,
        b'F' => 5,
        b'G' => 7,
        b'A' => 9,
        b'B' => 11,
        _ => return Err(unexpected(0)),
    };
    let mut pos = 1;
    let mut shift = 0i32;
    while pos < bytes.len() {
        match bytes[pos] {
            b'#' => shift += 1,
            b'b' => shift -= 1,
            b':' | b'/' => break,
            _ => return Err(unexpected(pos)),
        }
        pos += 1;
    }
    let root = PitchClass::wrapping(root_pc + shift);

    let rest = &text[pos..];
    let (quality_part, bass_part, bass_offset) = match rest.find('/') {
        Some(i) => (&rest[..i], Some(&rest[i + 1..]), pos + i + 1),
        None => (rest, None, text.len()),
    };
    let quality_text = match quality_part.strip_prefix(':') {
        Some(q) => {
            if q.is_empty() {
                return Err(ParseChordError::UnexpectedEnd {
                    input: text.to_string(),
                });
            }
            q
        }
        None if quality_part.is_empty() => "",
        None => return Err(unexpected(pos)),
    };
    if let Some(bass) = bass_part {
        validate_bass(bass).map_err(|off| match off {
            Some(off) => unexpected(bass_offset + off),
            None => ParseChordError::UnexpectedEnd {
                input: text.to_string(),
            },
        })?;
    }

    // Split shorthand from a parenthesised degree list, e.g. "maj(9)".
    let (shorthand, degrees) = match quality_text.find('(') {
        Some(open) => {
            let close_rel = quality_text[open..].find(')').ok_or_else(|| {
                ParseChordError::UnexpectedEnd {
                    input: text.to_string(),
                }
            })?;
            let close = open + close_rel;
            if close + 1 != quality_text.len() {
                return Err(unexpected(pos + 1 + close + 1));
            }
            (&quality_text[..open], &quality_text[open + 1..close])
        }
        None => (quality_text, ""),
    };
    if let Some(off) = shorthand.find(|c: char| c == ')' || c == ',') {
        return Err(unexpected(pos + 1 + off));
    }
    for (i, c) in degrees.char_indices() {
        if !(c.is_ascii_digit() || matches!(c, '#' | 'b' | '*' | ',')) {
            let open = quality_text.find('(').unwrap();
            return Err(unexpected(pos + 1 + open + 1 + i));
        }
    }

    if !degrees.is_empty() {
        return Ok(ChordLabel::Unknown);
    }
    Ok(match Quality::from_alias(shorthand) {
        Some(quality) => ChordLabel::Chord { root, quality },
        None => ChordLabel::Unknown,
    })
}

/// Bass degrees look like `3`, `b7` or `#5`. Returns the offending offset.
fn validate_bass(bass: &str) -> Result<(), Option<usize>> {
    if bass.is_empty() {
        return Err(None);
    }
    let digits_at = bass.find(|c: char| c != '#' && c != 'b').ok_or(None)?;
    match bass[digits_at..].find(|c: char| !c.is_ascii_digit()) {
        Some(off) => Err(Some(digits_at + off)),
        None => Ok(()),
    }
}

/// Canonical symbol for a label. Inverse of [`parse_chord`] on the vocabulary.
pub fn format_chord(label: &ChordLabel) -> String {
    label.to_string()
}
