use chordkd::annotation::{IntervalSequence, Segment};
use chordkd::chord::{ChordLabel, Quality};
use chordkd::metrics::{acqa, QualityGroup, TrackPair};

/// A corpus where minor chords are rare; estimates are perfect except that
/// every minor segment can be replaced by its parallel major.
fn corpus(break_minor: bool) -> Vec<TrackPair> {
    let qualities = [Quality::Maj, Quality::Maj, Quality::Dom7, Quality::Maj, Quality::Maj7, Quality::Dom7];
    (0..12u8)
        .map(|root| {
            let mut reference = Vec::new();
            let mut estimate = Vec::new();
            let mut t = 0.0;
            for (i, q) in qualities.iter().enumerate() {
                let label = ChordLabel::chord((root + i as u8) % 12, *q);
                reference.push(Segment::new(t, t + 4.0, label));
                estimate.push(Segment::new(t, t + 4.0, label));
                t += 4.0;
            }
            let minor = ChordLabel::chord(root, Quality::Min);
            reference.push(Segment::new(t, t + 1.0, minor));
            let est = if break_minor { ChordLabel::chord(root, Quality::Maj) } else { minor };
            estimate.push(Segment::new(t, t + 1.0, est));
            TrackPair::new(IntervalSequence::new(reference).unwrap(), IntervalSequence::new(estimate).unwrap())
        })
        .collect()
}

#[test]
fn acqa_is_more_sensitive_than_wcsr_to_rare_quality_failures() {
    let groups: Vec<QualityGroup> =
        [Quality::Maj, Quality::Min, Quality::Dom7, Quality::Maj7].into_iter().map(QualityGroup::single).collect();
    let good = acqa(&corpus(false), &groups).unwrap();
    let bad = acqa(&corpus(true), &groups).unwrap();
    let (a0, a1) = (good.acqa.unwrap(), bad.acqa.unwrap());
    assert_eq!((a0, good.wcsr), (1.0, 1.0));
    let acqa_drop = a0 - a1;
    let wcsr_drop = good.wcsr - bad.wcsr;
    assert!((acqa_drop - a0 / groups.len() as f64).abs() < 1e-12, "ACQA drop {acqa_drop}");
    assert!(wcsr_drop < acqa_drop, "WCSR drop {wcsr_drop} vs ACQA drop {acqa_drop}");
    assert!((wcsr_drop - 1.0 / 25.0).abs() < 1e-12);
}
