//! Seeded boundary perturbation that imitates unaligned web annotations.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::annotation::{IntervalSequence, Segment};
use crate::chord::ChordLabel;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseConfig {
    /// Every internal boundary moves by a uniform offset in `[-delta, delta]`.
    pub delta: f64,
    /// Boundaries of leading and trailing `N` segments move by a further
    /// uniform offset in `[-delta_n, delta_n]`.
    pub delta_n: f64,
    /// Segments shorter than this after perturbation are dropped.
    pub min_segment: f64,
    pub seed: u64,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self { delta: 0.5, delta_n: 1.0, min_segment: 0.05, seed: 0 }
    }
}

impl NoiseConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("delta", self.delta), ("delta_n", self.delta_n), ("min_segment", self.min_segment)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::invalid(format!("noise {name} must be non-negative")));
            }
        }
        Ok(())
    }
}

/// What a perturbation did to one sequence.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct NoiseReport {
    /// Uniform `delta` offset drawn for each internal boundary.
    pub shifts: Vec<f64>,
    /// Extra offsets applied at no-chord edges.
    pub edge_shifts: Vec<f64>,
    /// Segments removed for falling below the minimum length.
    pub dropped: Vec<Segment>,
}

/// Shifts every internal boundary, then extends or truncates leading and
/// trailing no-chord segments. The overall span is unchanged.
pub fn inject_label_noise(
    seq: &IntervalSequence,
    cfg: &NoiseConfig,
) -> Result<(IntervalSequence, NoiseReport)> {
    cfg.validate()?;
    let segs = seq.segments();
    let mut report = NoiseReport::default();
    if segs.len() < 2 {
        return Ok((seq.clone(), report));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let (start, end) = (segs[0].start, segs[segs.len() - 1].end);
    let last = segs.len() - 1;

    // Boundary i sits between segment i and i + 1.
    let mut bounds = Vec::with_capacity(last);
    for i in 0..last {
        let shift = if cfg.delta > 0.0 { rng.gen_range(-cfg.delta..=cfg.delta) } else { 0.0 };
        report.shifts.push(shift);
        let mut b = segs[i].end + shift;
        let leading = i == 0 && segs[0].label == ChordLabel::NoChord;
        let trailing = i + 1 == last && segs[last].label == ChordLabel::NoChord;
        if (leading || trailing) && cfg.delta_n > 0.0 {
            let edge = rng.gen_range(-cfg.delta_n..=cfg.delta_n);
            report.edge_shifts.push(edge);
            b += edge;
        }
        bounds.push(b.clamp(start, end));
    }
    bounds.push(end);

    let mut out: Vec<Segment> = Vec::with_capacity(segs.len());
    let mut cursor = start;
    for (seg, &b) in segs.iter().zip(&bounds) {
        if b - cursor >= cfg.min_segment && b > cursor {
            out.push(Segment::new(cursor, b, seg.label));
            cursor = b;
        } else {
            report.dropped.push(Segment::new(cursor, b.max(cursor), seg.label));
        }
    }
    match out.last_mut() {
        Some(s) => s.end = end,
        None => out.push(Segment::new(start, end, segs[0].label)),
    }
    let merged = merge_repeats(out);
    let seq = IntervalSequence::new(merged).map_err(|e| Error::invalid(format!("noise produced {e}")))?;
    Ok((seq, report))
}

fn merge_repeats(segs: Vec<Segment>) -> Vec<Segment> {
    let mut out: Vec<Segment> = Vec::with_capacity(segs.len());
    for s in segs {
        match out.last_mut() {
            Some(prev) if prev.label == s.label && prev.end == s.start => prev.end = s.end,
            _ => out.push(s),
        }
    }
    out
}
