use crate::annotation::{IntervalSequence, Segment};
use crate::error::{Error, Result};

/// Over-, under- and combined segmentation scores, 1 = perfect.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SegmentationScores {
    pub overseg: f64,
    pub underseg: f64,
    pub seg: f64,
}

/// Directional Hamming distance from `a` to `b`: the fraction of `a`'s
/// duration not covered by the single best-overlapping segment of `b`.
pub fn directional_hamming(a: &[Segment], b: &[Segment]) -> f64 {
    let total: f64 = a.iter().map(Segment::duration).sum();
    if total <= 0.0 {
        return 0.0;
    }
    let mut missed = 0.0;
    let mut first = 0;
    for i in a {
        while first < b.len() && b[first].end <= i.start {
            first += 1;
        }
        let mut best = 0.0f64;
        for j in &b[first..] {
            if j.start >= i.end {
                break;
            }
            best = best.max(i.end.min(j.end) - i.start.max(j.start));
        }
        missed += i.duration() - best;
    }
    (missed / total).clamp(0.0, 1.0)
}

pub fn segmentation_scores(
    reference: &IntervalSequence,
    estimate: &IntervalSequence,
) -> Result<SegmentationScores> {
    if reference.is_empty() || estimate.is_empty() {
        return Err(Error::invalid("segmentation needs non-empty sequences"));
    }
    let overseg = 1.0 - directional_hamming(reference.segments(), estimate.segments());
    let underseg = 1.0 - directional_hamming(estimate.segments(), reference.segments());
    Ok(SegmentationScores {
        overseg,
        underseg,
        seg: overseg.min(underseg),
    })
}

/// Macro-average over songs; `seg` is the mean of per-song minima.
pub fn macro_average(per_song: &[SegmentationScores]) -> Option<SegmentationScores> {
    if per_song.is_empty() {
        return None;
    }
    let n = per_song.len() as f64;
    let mean = |f: fn(&SegmentationScores) -> f64| per_song.iter().map(f).sum::<f64>() / n;
    Some(SegmentationScores {
        overseg: mean(|s| s.overseg),
        underseg: mean(|s| s.underseg),
        seg: mean(|s| s.seg),
    })
}
