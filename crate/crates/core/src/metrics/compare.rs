//! Label comparators following the `mir_eval.chord` conventions.
//!
//! Chords are encoded as a root (or -1) plus a 12-bit semitone bitmap
//! relative to the root. `X` encodes as root -1 with every bit set to -1,
//! which marks the reference as excluded.

use std::fmt;
use std::str::FromStr;

use crate::chord::{ChordLabel, Quality};
use crate::error::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ComparisonKind {
    Root,
    Thirds,
    Triads,
    Sevenths,
    Tetrads,
    Majmin,
    Mirex,
}

impl ComparisonKind {
    pub const ALL: [ComparisonKind; 7] = [
        ComparisonKind::Root,
        ComparisonKind::Thirds,
        ComparisonKind::Triads,
        ComparisonKind::Sevenths,
        ComparisonKind::Tetrads,
        ComparisonKind::Majmin,
        ComparisonKind::Mirex,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ComparisonKind::Root => "Root",
            ComparisonKind::Thirds => "Thirds",
            ComparisonKind::Triads => "Triads",
            ComparisonKind::Sevenths => "Sevenths",
            ComparisonKind::Tetrads => "Tetrads",
            ComparisonKind::Majmin => "Majmin",
            ComparisonKind::Mirex => "MIREX",
        }
    }
}

impl fmt::Display for ComparisonKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ComparisonKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ComparisonKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::invalid(format!("unknown comparison {s:?}")))
    }
}

/// A comparator used by duration-weighted scoring.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Comparator {
    Kind(ComparisonKind),
    /// Identical vocabulary labels (chord symbol recall).
    Exact,
}

impl Comparator {
    pub fn compare(self, reference: &ChordLabel, estimate: &ChordLabel) -> Option<bool> {
        match self {
            Comparator::Kind(kind) => compare(kind, reference, estimate),
            Comparator::Exact => {
                (*reference != ChordLabel::Unknown).then_some(reference == estimate)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Encoded {
    root: i8,
    bits: [i8; 12],
}

impl Encoded {
    fn of(label: &ChordLabel) -> Self {
        match label {
            ChordLabel::Chord { root, quality } => {
                let mut bits = [0i8; 12];
                for (b, on) in bits.iter_mut().zip(quality.bitmap()) {
                    *b = on as i8;
                }
                Encoded {
                    root: root.value() as i8,
                    bits,
                }
            }
            ChordLabel::NoChord => Encoded {
                root: -1,
                bits: [0; 12],
            },
            ChordLabel::Unknown => Encoded {
                root: -1,
                bits: [-1; 12],
            },
        }
    }

    fn is_unknown(&self) -> bool {
        self.bits.iter().any(|&b| b < 0)
    }

    fn is_silent(&self) -> bool {
        self.bits.iter().all(|&b| b == 0)
    }

    /// Absolute pitch-class chroma (`np.roll(bits, root)`).
    fn chroma(&self) -> [i8; 12] {
        let mut out = [0i8; 12];
        for (i, &b) in self.bits.iter().enumerate() {
            out[(i as i32 + self.root as i32).rem_euclid(12) as usize] = b;
        }
        out
    }
}

fn quality_bits(q: Quality) -> [i8; 12] {
    Encoded::of(&ChordLabel::chord(0, q)).bits
}

/// Compares a reference and an estimated label. `None` means the reference
/// lies outside the comparator's domain and is dropped from weighted scores.
pub fn compare(kind: ComparisonKind, reference: &ChordLabel, estimate: &ChordLabel) -> Option<bool> {
    let r = Encoded::of(reference);
    let e = Encoded::of(estimate);
    if r.is_unknown() {
        return None;
    }
    let eq_root = r.root == e.root;
    match kind {
        ComparisonKind::Root => Some(eq_root),
        ComparisonKind::Thirds => Some(eq_root && r.bits[3] == e.bits[3]),
        ComparisonKind::Triads => Some(eq_root && r.bits[..8] == e.bits[..8]),
        ComparisonKind::Tetrads => Some(eq_root && r.bits == e.bits),
        ComparisonKind::Sevenths => {
            let in_domain = r.is_silent()
                || [Quality::Maj, Quality::Min, Quality::Maj7, Quality::Dom7, Quality::Min7]
                    .into_iter()
                    .any(|q| quality_bits(q) == r.bits);
            in_domain.then_some(eq_root && r.bits == e.bits)
        }
        ComparisonKind::Majmin => {
            let head = &r.bits[..8];
            let in_domain = r.is_silent()
                || head == &quality_bits(Quality::Maj)[..8]
                || head == &quality_bits(Quality::Min)[..8];
            in_domain.then_some(eq_root && r.bits[..8] == e.bits[..8])
        }
        ComparisonKind::Mirex => {
            if r.root == -1 && e.root == -1 {
                return Some(true);
            }
            let (rc, ec) = (r.chroma(), e.chroma());
            let shared: i32 = rc.iter().zip(&ec).map(|(&a, &b)| a as i32 * b as i32).sum();
            Some(shared >= 3)
        }
    }
}
