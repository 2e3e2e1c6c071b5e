//! Chord symbol recall aggregated over tracks and per chord quality.

use crate::annotation::IntervalSequence;
use crate::chord::{ChordLabel, Quality};
use crate::error::{Error, Result};
use crate::metrics::compare::Comparator;
use crate::metrics::weighted::{merge_timelines, WeightedTally};

/// A reference/estimate pair with its track duration `T_j`.
#[derive(Debug, Clone)]
pub struct TrackPair {
    pub reference: IntervalSequence,
    pub estimate: IntervalSequence,
    pub duration: f64,
}

impl TrackPair {
    /// Uses the reference span as the track duration.
    pub fn new(reference: IntervalSequence, estimate: IntervalSequence) -> Self {
        let duration = reference.span();
        Self {
            reference,
            estimate,
            duration,
        }
    }

    pub fn with_duration(reference: IntervalSequence, estimate: IntervalSequence, duration: f64) -> Self {
        Self {
            reference,
            estimate,
            duration,
        }
    }
}

/// Duration-weighted mean of per-track CSR. Tracks whose CSR is undefined
/// (no scorable reference time) carry no weight.
pub fn wcsr(tracks: &[TrackPair]) -> Result<f64> {
    let mut num = 0.0;
    let mut den = 0.0;
    for t in tracks {
        if t.duration < 0.0 || !t.duration.is_finite() {
            return Err(Error::invalid(format!("track duration {} is invalid", t.duration)));
        }
        let merged = merge_timelines(&t.reference, &t.estimate);
        if let Some(csr) = WeightedTally::of(Comparator::Exact, &merged).score() {
            num += t.duration * csr;
            den += t.duration;
        }
    }
    if den <= 0.0 {
        return Err(Error::invalid("WCSR needs at least one track with positive duration"));
    }
    Ok(num / den)
}

/// A named set of qualities scored together (e.g. `Sus` = sus2 + sus4).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QualityGroup {
    pub name: String,
    pub qualities: Vec<Quality>,
}

impl QualityGroup {
    pub fn single(q: Quality) -> Self {
        Self {
            name: q.shorthand().to_string(),
            qualities: vec![q],
        }
    }

    pub fn new(name: &str, qualities: &[Quality]) -> Self {
        Self {
            name: name.to_string(),
            qualities: qualities.to_vec(),
        }
    }

    pub fn contains(&self, label: &ChordLabel) -> bool {
        label.quality().is_some_and(|q| self.qualities.contains(&q))
    }

    /// The per-quality columns of the usual rare-chord report.
    pub fn report_groups() -> Vec<QualityGroup> {
        use Quality::*;
        vec![
            Self::new("Maj", &[Maj]),
            Self::new("Min", &[Min]),
            Self::new("Dom7", &[Dom7]),
            Self::new("Maj7", &[Maj7]),
            Self::new("Min7", &[Min7]),
            Self::new("Dim", &[Dim]),
            Self::new("Dim7", &[Dim7]),
            Self::new("Aug", &[Aug]),
            Self::new("Sus", &[Sus2, Sus4]),
        ]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QualityScore {
    pub name: String,
    /// `None` when the quality never occurs in the reference corpus.
    pub wcsr: Option<f64>,
    pub reference_duration: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QualityReport {
    pub per_quality: Vec<QualityScore>,
    pub wcsr: f64,
    /// Mean of the per-quality WCSR over qualities present in the corpus.
    pub acqa: Option<f64>,
}

/// Per-quality WCSR (reference restricted to each group) and their
/// unweighted mean.
pub fn acqa(tracks: &[TrackPair], groups: &[QualityGroup]) -> Result<QualityReport> {
    if groups.is_empty() {
        return Err(Error::invalid("quality set must not be empty"));
    }
    let merged: Vec<_> = tracks
        .iter()
        .map(|t| merge_timelines(&t.reference, &t.estimate))
        .collect();
    let per_quality: Vec<QualityScore> = groups
        .iter()
        .map(|g| {
            let mut tally = WeightedTally::default();
            for atoms in &merged {
                for a in atoms.iter().filter(|a| g.contains(&a.reference)) {
                    tally.included += a.duration();
                    if a.reference == a.estimate {
                        tally.matched += a.duration();
                    }
                }
            }
            QualityScore {
                name: g.name.clone(),
                wcsr: tally.score(),
                reference_duration: tally.included,
            }
        })
        .collect();
    let present: Vec<f64> = per_quality.iter().filter_map(|q| q.wcsr).collect();
    let acqa = (!present.is_empty()).then(|| present.iter().sum::<f64>() / present.len() as f64);
    Ok(QualityReport {
        per_quality,
        wcsr: wcsr(tracks)?,
        acqa,
    })
}
