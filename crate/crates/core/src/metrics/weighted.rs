use crate::annotation::IntervalSequence;
use crate::chord::ChordLabel;
use crate::metrics::compare::{Comparator, ComparisonKind};

/// Atomic sub-interval of the merged reference/estimate timeline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AtomicInterval {
    pub start: f64,
    pub end: f64,
    pub reference: ChordLabel,
    pub estimate: ChordLabel,
}

impl AtomicInterval {
    pub fn duration(&self) -> f64 {
        self.end - self.start
    }
}

/// Splits the reference span at every boundary of either sequence.
/// The estimate is padded with `N` or clipped to the reference span, and
/// gaps in either sequence read as `N`.
pub fn merge_timelines(reference: &IntervalSequence, estimate: &IntervalSequence) -> Vec<AtomicInterval> {
    let (Some(t0), Some(t1)) = (reference.start(), reference.end()) else {
        return Vec::new();
    };
    let r = reference.aligned_to(t0, t1);
    let e = estimate.aligned_to(t0, t1);
    let (rs, es) = (r.segments(), e.segments());
    let mut out = Vec::with_capacity(rs.len() + es.len());
    let (mut i, mut j) = (0, 0);
    let mut cursor = t0;
    while i < rs.len() && j < es.len() {
        let end = rs[i].end.min(es[j].end);
        if end > cursor {
            out.push(AtomicInterval {
                start: cursor,
                end,
                reference: rs[i].label,
                estimate: es[j].label,
            });
            cursor = end;
        }
        if rs[i].end <= end {
            i += 1;
        }
        if es[j].end <= end {
            j += 1;
        }
    }
    out
}

/// Matched and included durations for one comparator on one track.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct WeightedTally {
    pub matched: f64,
    pub included: f64,
}

impl WeightedTally {
    pub fn of(comparator: Comparator, merged: &[AtomicInterval]) -> Self {
        merged.iter().fold(Self::default(), |mut acc, a| {
            if let Some(hit) = comparator.compare(&a.reference, &a.estimate) {
                acc.included += a.duration();
                if hit {
                    acc.matched += a.duration();
                }
            }
            acc
        })
    }

    pub fn add(&mut self, other: WeightedTally) {
        self.matched += other.matched;
        self.included += other.included;
    }

    /// `None` when nothing was included.
    pub fn score(&self) -> Option<f64> {
        (self.included > 0.0).then(|| (self.matched / self.included).clamp(0.0, 1.0))
    }
}

/// Duration-weighted comparison score; `None` if no reference time is scored.
pub fn weighted_score(
    kind: ComparisonKind,
    reference: &IntervalSequence,
    estimate: &IntervalSequence,
) -> Option<f64> {
    WeightedTally::of(Comparator::Kind(kind), &merge_timelines(reference, estimate)).score()
}

/// Chord symbol recall for one track: exact-label duration over reference duration.
pub fn csr(reference: &IntervalSequence, estimate: &IntervalSequence) -> Option<f64> {
    WeightedTally::of(Comparator::Exact, &merge_timelines(reference, estimate)).score()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::annotation::Segment;
    use crate::chord::{parse_chord, ChordLabel};

    fn seq(items: &[(f64, f64, &str)]) -> IntervalSequence {
        IntervalSequence::new(
            items
                .iter()
                .map(|&(a, b, l)| Segment::new(a, b, parse_chord(l).unwrap()))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn identity_scores_one() {
        let r = seq(&[(0.0, 2.0, "C:maj"), (2.0, 3.5, "A:min7"), (3.5, 5.0, "N")]);
        for kind in ComparisonKind::ALL {
            assert_eq!(weighted_score(kind, &r, &r), Some(1.0), "{kind}");
        }
        assert_eq!(csr(&r, &r), Some(1.0));
    }

    #[test]
    fn half_root_match() {
        let r = seq(&[(0.0, 10.0, "C:maj")]);
        let e = seq(&[(0.0, 5.0, "C:maj"), (5.0, 10.0, "A:min")]);
        assert_eq!(weighted_score(ComparisonKind::Root, &r, &e), Some(0.5));
        assert_eq!(csr(&r, &e), Some(0.5));
    }

    #[test]
    fn estimate_is_padded_and_clipped() {
        let r = seq(&[(0.0, 4.0, "N")]);
        let e = seq(&[(1.0, 2.0, "C:maj"), (3.0, 9.0, "N")]);
        assert_eq!(weighted_score(ComparisonKind::Root, &r, &e), Some(0.75));
        let merged = merge_timelines(&r, &e);
        assert_eq!(merged.last().unwrap().end, 4.0);
    }

    #[test]
    fn undefined_when_nothing_included() {
        let r = seq(&[(0.0, 4.0, "X")]);
        assert_eq!(weighted_score(ComparisonKind::Root, &r, &r), None);
        let dim = seq(&[(0.0, 4.0, "C:dim")]);
        assert_eq!(weighted_score(ComparisonKind::Majmin, &dim, &dim), None);
        assert_eq!(csr(&r, &r), None);
        assert_eq!(weighted_score(ComparisonKind::Root, &IntervalSequence::empty(), &dim), None);
        let _ = ChordLabel::NoChord;
    }
}
