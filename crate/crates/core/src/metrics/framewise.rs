use std::collections::BTreeMap;

use crate::annotation::FrameLabels;
use crate::error::{Error, Result};

/// Frame agreement with macro-averaged per-class precision, recall and F1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameScores {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, Copy, Default)]
struct Counts {
    tp: usize,
    fp: usize,
    fn_: usize,
}

/// Compares predictions against targets frame by frame. Per-class scores are
/// averaged over every class present in either sequence; a class that is
/// never predicted has precision 0 and one never targeted has recall 0.
pub fn framewise_agreement(pred: &FrameLabels, target: &FrameLabels) -> Result<FrameScores> {
    framewise_agreement_slices(pred.labels(), target.labels())
}

pub fn framewise_agreement_slices(pred: &[usize], target: &[usize]) -> Result<FrameScores> {
    if pred.len() != target.len() {
        return Err(Error::Shape {
            expected: format!("{} frames", target.len()),
            got: format!("{} frames", pred.len()),
        });
    }
    if pred.is_empty() {
        return Err(Error::invalid("frame-wise agreement needs at least one frame"));
    }
    let mut classes: BTreeMap<usize, Counts> = BTreeMap::new();
    let mut correct = 0usize;
    for (&p, &t) in pred.iter().zip(target) {
        if p == t {
            correct += 1;
            classes.entry(p).or_default().tp += 1;
        } else {
            classes.entry(p).or_default().fp += 1;
            classes.entry(t).or_default().fn_ += 1;
        }
    }
    let ratio = |num: usize, den: usize| if den == 0 { 0.0 } else { num as f64 / den as f64 };
    let (mut p_sum, mut r_sum, mut f_sum) = (0.0, 0.0, 0.0);
    for c in classes.values() {
        let p = ratio(c.tp, c.tp + c.fp);
        let r = ratio(c.tp, c.tp + c.fn_);
        p_sum += p;
        r_sum += r;
        f_sum += if p + r > 0.0 { 2.0 * p * r / (p + r) } else { 0.0 };
    }
    let n = classes.len() as f64;
    Ok(FrameScores {
        accuracy: correct as f64 / pred.len() as f64,
        precision: p_sum / n,
        recall: r_sum / n,
        f1: f_sum / n,
    })
}
