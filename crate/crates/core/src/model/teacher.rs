use crate::chord::{ChordLabel, Quality, NO_CHORD_INDEX, UNKNOWN_INDEX, VOCAB_SIZE};
use crate::error::{Error, Result};
use crate::features::spectrogram::Spectrogram;
use crate::features::synth::{chroma_template, fold_chroma};

use super::logits::LogitsSequence;

/// Anything that maps a spectrogram to per-frame vocabulary logits.
pub trait Teacher: Send + Sync {
    fn name(&self) -> &str;
    fn logits(&self, spec: &Spectrogram) -> Result<LogitsSequence>;
}

/// Runs a teacher on one track, attaching the track id to any failure.
pub fn teacher_infer(teacher: &dyn Teacher, track: &str, spec: &Spectrogram) -> Result<LogitsSequence> {
    let out = teacher.logits(spec).map_err(|e| e.for_track(track))?;
    if out.n_frames() != spec.n_frames() || out.n_classes() != VOCAB_SIZE {
        return Err(Error::Shape {
            expected: format!("{}x{VOCAB_SIZE} teacher logits", spec.n_frames()),
            got: format!("{}x{}", out.n_frames(), out.n_classes()),
        }
        .for_track(track));
    }
    Ok(out)
}

/// Deterministic chroma-template matcher.
///
/// Each chord logit is `sharpness` times the cosine between the frame's
/// folded chroma and the chord's root-weighted template. `N` scores
/// `sharpness * clamp(1 - peak / silence_threshold, -1, 1)` where `peak` is
/// the loudest bin; `X` and chords outside `qualities` score `-sharpness`.
#[derive(Debug, Clone, PartialEq)]
pub struct TemplateTeacher {
    pub sharpness: f64,
    pub silence_threshold: f64,
    pub qualities: Vec<Quality>,
    templates: Vec<[f64; 12]>,
}

impl Default for TemplateTeacher {
    fn default() -> Self {
        Self::new(20.0, 1.5, Quality::ALL.to_vec()).expect("valid defaults")
    }
}

impl TemplateTeacher {
    pub fn new(sharpness: f64, silence_threshold: f64, qualities: Vec<Quality>) -> Result<Self> {
        if !(sharpness > 0.0 && sharpness.is_finite()) {
            return Err(Error::invalid("teacher sharpness must be positive"));
        }
        if !(silence_threshold > 0.0 && silence_threshold.is_finite()) {
            return Err(Error::invalid("teacher silence threshold must be positive"));
        }
        if qualities.is_empty() {
            return Err(Error::invalid("teacher needs at least one quality"));
        }
        let templates = (0..UNKNOWN_INDEX)
            .map(|i| {
                let mut t = chroma_template(&ChordLabel::from_vocab_index(i).unwrap());
                let n = t.iter().map(|v| v * v).sum::<f64>().sqrt();
                t.iter_mut().for_each(|v| *v /= n);
                t
            })
            .collect();
        Ok(Self { sharpness, silence_threshold, qualities, templates })
    }

    fn frame_logits(&self, frame: &[f64], bins_per_octave: usize, out: &mut [f64]) {
        let s = self.sharpness;
        let chroma = fold_chroma(frame, bins_per_octave);
        let norm = chroma.iter().map(|v| v * v).sum::<f64>().sqrt();
        for (i, slot) in out.iter_mut().take(UNKNOWN_INDEX).enumerate() {
            let quality = Quality::from_index(i % crate::chord::NUM_QUALITIES).unwrap();
            *slot = if !self.qualities.contains(&quality) {
                -s
            } else if norm > 0.0 {
                let t = &self.templates[i];
                s * chroma.iter().zip(t).map(|(a, b)| a * b).sum::<f64>() / norm
            } else {
                0.0
            };
        }
        let peak = frame.iter().cloned().fold(0.0, f64::max);
        out[UNKNOWN_INDEX] = -s;
        out[NO_CHORD_INDEX] = s * (1.0 - peak / self.silence_threshold).clamp(-1.0, 1.0);
    }
}

impl Teacher for TemplateTeacher {
    fn name(&self) -> &str {
        "template"
    }

    fn logits(&self, spec: &Spectrogram) -> Result<LogitsSequence> {
        let mut data = vec![0.0; spec.n_frames() * VOCAB_SIZE];
        for (t, out) in data.chunks_mut(VOCAB_SIZE).enumerate() {
            self.frame_logits(spec.frame(t), spec.bins_per_octave, out);
        }
        LogitsSequence::new(data, spec.n_frames(), VOCAB_SIZE)
    }
}
