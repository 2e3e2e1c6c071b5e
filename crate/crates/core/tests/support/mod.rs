//! Toy-scale experiment helpers shared by the integration and acceptance
//! tests.

#![allow(dead_code)]

use chordkd::annotation::intervals_to_frames;
use chordkd::chord::Quality;
use chordkd::features::{synth_corpus, Normalizer, Spectrogram, SynthConfig, SynthTrack};
use chordkd::model::{windowed_infer, LogitsSequence, ModelConfig, SmoothingConfig, Student2e1d, Teacher, TemplateTeacher};
use chordkd::pipeline::{
    inject_label_noise, split_with_fractions, NoiseConfig, SplitSpec, TrainConfig, TrainingTrack,
};

pub const SEQ_LEN: usize = 32;

pub struct Toy {
    pub corpus: Vec<SynthTrack>,
    pub teacher: Vec<LogitsSequence>,
    pub split: SplitSpec,
    pub norm: Normalizer,
}

#[derive(Debug, Clone, Copy)]
pub enum Targets {
    Teacher,
    Truth,
    Noisy(NoiseConfig),
}

pub fn toy_teacher() -> TemplateTeacher {
    TemplateTeacher::new(40.0, 1.5, Quality::ALL.to_vec()).unwrap()
}

pub fn toy_synth(seed: u64, n_tracks: usize, noise: f64) -> SynthConfig {
    SynthConfig { seed, n_tracks, noise, ..SynthConfig::default() }
}

impl Toy {
    pub fn new(synth: &SynthConfig, teacher: &dyn Teacher, val: f64, test: f64, split_seed: u64) -> Self {
        let corpus = synth_corpus(synth).unwrap();
        let logits = corpus.iter().map(|t| teacher.logits(&t.spectrogram).unwrap()).collect();
        let ids: Vec<String> = corpus.iter().map(|t| t.id.clone()).collect();
        let split = split_with_fractions(&ids, split_seed, val, test).unwrap();
        let train: Vec<&Spectrogram> = corpus
            .iter()
            .filter(|t| split.train.contains(&t.id))
            .map(|t| &t.spectrogram)
            .collect();
        let norm = Normalizer::fit(&train, false).unwrap();
        Self { corpus, teacher: logits, split, norm }
    }

    pub fn tracks(&self, ids: &[String], targets: Targets) -> Vec<TrainingTrack> {
        self.corpus
            .iter()
            .zip(&self.teacher)
            .enumerate()
            .filter(|(_, (t, _))| ids.contains(&t.id))
            .map(|(i, (t, logits))| {
                let spec = &t.spectrogram;
                let y = match targets {
                    Targets::Teacher => logits.argmax(),
                    Targets::Truth => truth_frames(t),
                    Targets::Noisy(cfg) => {
                        let cfg = NoiseConfig { seed: cfg.seed ^ (i as u64 * 7919), ..cfg };
                        let (noisy, _) = inject_label_noise(&t.annotation, &cfg).unwrap();
                        intervals_to_frames(&noisy, spec.hop_seconds(), spec.n_frames()).unwrap().labels().to_vec()
                    }
                };
                TrainingTrack::new(t.id.clone(), self.norm.apply(spec).unwrap(), y, Some(logits.clone())).unwrap()
            })
            .collect()
    }
}

pub fn truth_frames(t: &SynthTrack) -> Vec<usize> {
    let s = &t.spectrogram;
    intervals_to_frames(&t.annotation, s.hop_seconds(), s.n_frames()).unwrap().labels().to_vec()
}

pub fn toy_model() -> ModelConfig {
    ModelConfig {
        d_model: 32,
        n_heads: 2,
        n_layers_freq: 1,
        n_layers_time: 1,
        n_freq_groups: 12,
        ffn_dim: 64,
        dropout: 0.0,
        n_classes: chordkd::chord::VOCAB_SIZE,
        seq_len: SEQ_LEN,
        n_bins: 144,
    }
}

/// Stage-1 schedule scaled to the toy corpus; rates keep the 1:3 base to
/// peak ratio.
pub fn toy_stage1(seed: u64) -> TrainConfig {
    TrainConfig {
        base_lr: 1e-3,
        peak_lr: 3e-3,
        warmup_epochs: 3,
        batch_size: 16,
        seq_len: SEQ_LEN,
        patience: 4,
        max_epochs: 12,
        seed,
        ..TrainConfig::stage1()
    }
}

pub fn toy_stage2(alpha: f64, seed: u64) -> TrainConfig {
    let mut cfg = TrainConfig {
        base_lr: 1e-4,
        peak_lr: 1e-4,
        batch_size: 16,
        seq_len: SEQ_LEN,
        patience: 100,
        max_epochs: 15,
        seed,
        ..TrainConfig::stage2()
    };
    cfg.kd.alpha = alpha;
    cfg
}

pub fn smoothing() -> SmoothingConfig {
    SmoothingConfig { kernel_width: 9, window_length: SEQ_LEN, overlap: 0.5 }
}

/// Fraction of frames where windowed inference matches the track targets.
pub fn agreement(student: &Student2e1d, tracks: &[TrainingTrack]) -> f64 {
    let (mut hit, mut n) = (0usize, 0usize);
    for t in tracks {
        let pred = windowed_infer(student, &t.features, &smoothing()).unwrap();
        for (a, b) in pred.labels().iter().zip(&t.targets) {
            hit += (a == b) as usize;
            n += 1;
        }
    }
    hit as f64 / n as f64
}
