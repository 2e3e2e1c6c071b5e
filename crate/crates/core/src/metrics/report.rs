use std::fmt::Write as _;

use crate::error::Result;
use crate::metrics::compare::{Comparator, ComparisonKind};
use crate::metrics::framewise::{framewise_agreement_slices, FrameScores};
use crate::metrics::quality::{acqa, QualityGroup, TrackPair};
use crate::metrics::segmentation::{macro_average, segmentation_scores};
use crate::metrics::weighted::{merge_timelines, WeightedTally};

/// Corpus-level evaluation: one named value per metric, in report order.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub rows: Vec<(String, Option<f64>)>,
}

impl EvalReport {
    /// Evaluates a corpus. Weighted comparison scores pool the scored
    /// duration of every track. `frames` holds (prediction, target) frame
    /// sequences for the frame-wise block; they are concatenated.
    pub fn evaluate(
        tracks: &[TrackPair],
        groups: &[QualityGroup],
        frames: &[(Vec<usize>, Vec<usize>)],
    ) -> Result<Self> {
        let merged: Vec<_> = tracks
            .iter()
            .map(|t| merge_timelines(&t.reference, &t.estimate))
            .collect();
        let mut rows = Vec::new();
        for kind in ComparisonKind::ALL {
            let mut tally = WeightedTally::default();
            for atoms in &merged {
                tally.add(WeightedTally::of(Comparator::Kind(kind), atoms));
            }
            rows.push((kind.name().to_string(), tally.score()));
        }

        let per_song = tracks
            .iter()
            .map(|t| segmentation_scores(&t.reference, &t.estimate))
            .collect::<Result<Vec<_>>>()?;
        let seg = macro_average(&per_song);
        rows.push(("Over".into(), seg.map(|s| s.overseg)));
        rows.push(("Under".into(), seg.map(|s| s.underseg)));
        rows.push(("Seg".into(), seg.map(|s| s.seg)));

        let (pred, target): (Vec<usize>, Vec<usize>) = frames
            .iter()
            .flat_map(|(p, t)| p.iter().copied().zip(t.iter().copied()))
            .unzip();
        let fw: Option<FrameScores> = if pred.is_empty() {
            None
        } else {
            Some(framewise_agreement_slices(&pred, &target)?)
        };
        rows.push(("Acc".into(), fw.map(|f| f.accuracy)));
        rows.push(("Prec".into(), fw.map(|f| f.precision)));
        rows.push(("Rec".into(), fw.map(|f| f.recall)));
        rows.push(("F1".into(), fw.map(|f| f.f1)));

        let quality = acqa(tracks, groups)?;
        rows.push(("WCSR".into(), Some(quality.wcsr)));
        rows.push(("ACQA".into(), quality.acqa));
        for q in quality.per_quality {
            rows.push((format!("quality.{}", q.name), q.wcsr));
        }
        Ok(Self { rows })
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.rows.iter().find(|(n, _)| n == name).and_then(|(_, v)| *v)
    }

    /// `name<TAB>value` per line, four decimals, `nan` when undefined.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for (name, value) in &self.rows {
            match value {
                Some(v) => writeln!(out, "{name}\t{v:.4}"),
                None => writeln!(out, "{name}\tnan"),
            }
            .unwrap();
        }
        out
    }

    /// Human-readable table with values in percent.
    pub fn to_table(&self) -> String {
        let width = self.rows.iter().map(|(n, _)| n.len()).max().unwrap_or(6).max(6);
        let mut out = String::new();
        writeln!(out, "{:<width$}  {:>8}", "metric", "percent").unwrap();
        writeln!(out, "{}", "-".repeat(width + 10)).unwrap();
        for (name, value) in &self.rows {
            match value {
                Some(v) => writeln!(out, "{name:<width$}  {:>8.2}", v * 100.0),
                None => writeln!(out, "{name:<width$}  {:>8}", "--"),
            }
            .unwrap();
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::annotation::{IntervalSequence, Segment};
    use crate::chord::parse_chord;

    #[test]
    fn perfect_predictions_report_ones() {
        let r = IntervalSequence::new(vec![
            Segment::new(0.0, 1.0, parse_chord("C:maj").unwrap()),
            Segment::new(1.0, 2.0, parse_chord("A:min").unwrap()),
        ])
        .unwrap();
        let tracks = vec![TrackPair::new(r.clone(), r)];
        let report = EvalReport::evaluate(
            &tracks,
            &QualityGroup::report_groups(),
            &[(vec![1, 2, 2], vec![1, 2, 2])],
        )
        .unwrap();
        let tsv = report.to_tsv();
        for name in ["Root", "Thirds", "Triads", "Sevenths", "Tetrads", "Majmin", "MIREX"] {
            assert!(tsv.contains(&format!("{name}\t1.0000\n")), "{tsv}");
        }
        for name in ["Over", "Under", "Seg", "Acc", "Prec", "Rec", "F1", "WCSR", "ACQA", "quality.Maj"] {
            assert_eq!(report.get(name), Some(1.0), "{name}");
        }
        assert!(tsv.contains("quality.Dim\tnan"));
        assert!(report.to_table().contains("Root"));
    }
}
