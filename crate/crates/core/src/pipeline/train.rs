use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::distill::{ce_loss, total_loss, KdConfig, LossBatch, Stage};
use crate::error::{Error, Result};
use crate::features::spectrogram::Spectrogram;
use crate::model::{argmax, LogitsSequence, Student2e1d};

use super::schedule::{early_stop, AdamW, AdamWConfig, LrSchedule, Schedule};

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub stage: Stage,
    pub kd: KdConfig,
    pub base_lr: f64,
    pub peak_lr: f64,
    pub warmup_epochs: usize,
    pub schedule: Schedule,
    pub plateau_decay_factor: f64,
    pub plateau_patience: usize,
    /// Windows per optimizer step.
    pub batch_size: usize,
    pub seq_len: usize,
    /// Epochs without a validation-accuracy improvement before stopping.
    pub patience: usize,
    pub max_epochs: usize,
    pub seed: u64,
    pub optimizer: AdamWConfig,
}

impl TrainConfig {
    /// Pseudo-label training: warmup to the peak rate, cosine decay, no KD.
    pub fn stage1() -> Self {
        Self {
            stage: Stage::PseudoLabel,
            kd: KdConfig { alpha: 0.0, ..KdConfig::default() },
            base_lr: 1e-4,
            peak_lr: 3e-4,
            warmup_epochs: 10,
            schedule: Schedule::WarmupCosine,
            plateau_decay_factor: 0.95,
            plateau_patience: 1,
            batch_size: 256,
            seq_len: 108,
            patience: 10,
            max_epochs: 100,
            seed: 0,
            optimizer: AdamWConfig::default(),
        }
    }

    /// Continual learning on ground truth with selective KD.
    pub fn stage2() -> Self {
        Self {
            stage: Stage::Continual,
            kd: KdConfig::default(),
            base_lr: 1e-5,
            peak_lr: 1e-5,
            warmup_epochs: 0,
            schedule: Schedule::PlateauDecay,
            ..Self::stage1()
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.kd.validate()?;
        for (name, v) in [("base_lr", self.base_lr), ("peak_lr", self.peak_lr)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::invalid(format!("{name} must be a non-negative number")));
            }
        }
        if !(self.plateau_decay_factor > 0.0 && self.plateau_decay_factor <= 1.0) {
            return Err(Error::invalid("plateau_decay_factor must lie in (0, 1]"));
        }
        if self.batch_size == 0 || self.seq_len == 0 || self.max_epochs == 0 {
            return Err(Error::invalid("batch_size, seq_len and max_epochs must be positive"));
        }
        Ok(())
    }

    pub fn lr_schedule(&self) -> LrSchedule {
        LrSchedule {
            schedule: self.schedule,
            base_lr: self.base_lr,
            peak_lr: self.peak_lr,
            warmup_epochs: self.warmup_epochs,
            max_epochs: self.max_epochs,
            decay_factor: self.plateau_decay_factor,
            plateau_patience: self.plateau_patience,
        }
    }
}

/// One training or validation track: normalized features, per-frame
/// targets and optional teacher logits.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingTrack {
    pub id: String,
    pub features: Spectrogram,
    pub targets: Vec<usize>,
    pub teacher: Option<LogitsSequence>,
}

impl TrainingTrack {
    pub fn new(
        id: impl Into<String>,
        features: Spectrogram,
        targets: Vec<usize>,
        teacher: Option<LogitsSequence>,
    ) -> Result<Self> {
        let id = id.into();
        if targets.len() != features.n_frames() {
            return Err(Error::Shape {
                expected: format!("{} targets", features.n_frames()),
                got: format!("{}", targets.len()),
            }
            .for_track(&id));
        }
        if let Some(t) = &teacher {
            if t.n_frames() != features.n_frames() {
                return Err(Error::Shape {
                    expected: format!("{} teacher frames", features.n_frames()),
                    got: format!("{}", t.n_frames()),
                }
                .for_track(&id));
            }
        }
        Ok(Self { id, features, targets, teacher })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    pub lr: f64,
    pub train_loss: f64,
    pub train_kd: f64,
    pub train_ce: f64,
    /// Frame-mean cross-entropy against the validation targets.
    pub val_loss: f64,
    pub val_acc: f64,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    /// Parameters from the epoch with the best validation accuracy.
    pub best: Student2e1d,
    pub best_epoch: usize,
    pub history: Vec<EpochRecord>,
    pub stopped_early: bool,
}

/// Cross-entropy and accuracy of raw window predictions over real frames.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FrameEval {
    pub loss: f64,
    pub accuracy: f64,
    pub frames: usize,
}

/// Scores non-overlapping windows; the last one is padded by repeating the
/// final frame and only real frames count.
pub fn evaluate_tracks(student: &Student2e1d, tracks: &[TrainingTrack]) -> Result<FrameEval> {
    let t = student.config().seq_len;
    let c = student.config().n_classes;
    let (mut loss, mut correct, mut n) = (0.0, 0usize, 0usize);
    for track in tracks {
        let len = track.features.n_frames();
        for start in (0..len).step_by(t) {
            let logits = student.forward(&track.features.window(start, t)).map_err(|e| e.for_track(&track.id))?;
            for i in 0..t.min(len - start) {
                let z = &logits[i * c..(i + 1) * c];
                let y = track.targets[start + i];
                loss += ce_loss(z, y)?.0;
                correct += (argmax(z) == y) as usize;
                n += 1;
            }
        }
    }
    if n == 0 {
        return Ok(FrameEval::default());
    }
    Ok(FrameEval { loss: loss / n as f64, accuracy: correct as f64 / n as f64, frames: n })
}

fn epoch_seed(seed: u64, epoch: usize, stream: u64) -> u64 {
    seed ^ (epoch as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ stream.wrapping_mul(0xD1B5_4A32_D192_ED03)
}

/// Stage 1: fit the student to teacher pseudo-labels.
pub fn train_stage1(
    student: Student2e1d,
    train: &[TrainingTrack],
    val: &[TrainingTrack],
    cfg: &TrainConfig,
) -> Result<TrainOutcome> {
    if cfg.stage != Stage::PseudoLabel {
        return Err(Error::invalid("train_stage1 needs a stage 1 configuration"));
    }
    train_loop(student, train, val, cfg)
}

/// Stage 2: continue from a stage-1 student on ground truth with selective
/// distillation from the teacher logits carried by each training track.
pub fn train_stage2(
    init: Student2e1d,
    train: &[TrainingTrack],
    val: &[TrainingTrack],
    cfg: &TrainConfig,
) -> Result<TrainOutcome> {
    if cfg.stage != Stage::Continual {
        return Err(Error::invalid("train_stage2 needs a stage 2 configuration"));
    }
    if cfg.kd.alpha > 0.0 {
        if let Some(t) = train.iter().find(|t| t.teacher.is_none()) {
            return Err(Error::invalid("selective KD needs teacher logits").for_track(&t.id));
        }
    }
    train_loop(init, train, val, cfg)
}

fn train_loop(
    mut student: Student2e1d,
    train: &[TrainingTrack],
    val: &[TrainingTrack],
    cfg: &TrainConfig,
) -> Result<TrainOutcome> {
    cfg.validate()?;
    let t = cfg.seq_len;
    if student.config().seq_len != t {
        return Err(Error::Shape {
            expected: format!("student window of {t} frames"),
            got: format!("{}", student.config().seq_len),
        });
    }
    let c = student.config().n_classes;
    let mut windows: Vec<(usize, usize)> = Vec::new();
    for (i, track) in train.iter().enumerate() {
        for k in 0..track.features.n_frames() / t {
            windows.push((i, k * t));
        }
    }
    if windows.is_empty() {
        return Err(Error::invalid(format!("no training track has {t} frames")));
    }

    let schedule = cfg.lr_schedule();
    let mut opt = AdamW::new(cfg.optimizer, student.params.len());
    let mut history: Vec<EpochRecord> = Vec::new();
    let mut accs: Vec<f64> = Vec::new();
    let mut best = student.clone();
    let mut best_epoch = 0;
    let mut stopped_early = false;

    for epoch in 0..cfg.max_epochs {
        let lr = schedule.lr(epoch, &accs);
        windows.shuffle(&mut ChaCha8Rng::seed_from_u64(epoch_seed(cfg.seed, epoch, 1)));
        let mut drop_rng = ChaCha8Rng::seed_from_u64(epoch_seed(cfg.seed, epoch, 2));
        let (mut sum_total, mut sum_kd, mut sum_ce) = (0.0, 0.0, 0.0);

        for (b, batch) in windows.chunks(cfg.batch_size).enumerate() {
            student.params.zero_grads();
            let scale = 1.0 / batch.len() as f64;
            for &(i, start) in batch {
                let track = &train[i];
                let x = &track.features.data()[start * track.features.n_bins()..(start + t) * track.features.n_bins()];
                let (logits, trace) = student.forward_train(x, Some(&mut drop_rng))?;
                if logits.iter().any(|v| !v.is_finite()) {
                    return Err(Error::NonFinite { epoch, batch: b, lr });
                }
                let teacher = track.teacher.as_ref().map(|l| &l.data()[start * c..(start + t) * c]);
                let out = total_loss(
                    cfg.stage,
                    LossBatch { student: &logits, teacher, targets: &track.targets[start..start + t], classes: c },
                    &cfg.kd,
                )
                .map_err(|e| e.for_track(&track.id))?;
                if !out.total.is_finite() {
                    return Err(Error::NonFinite { epoch, batch: b, lr });
                }
                sum_total += out.total;
                sum_kd += out.kd;
                sum_ce += out.classification;
                let grad: Vec<f64> = out.grad.iter().map(|g| g * scale).collect();
                student.backward(&trace, &grad)?;
            }
            if student.params.grads.iter().any(|g| !g.is_finite()) {
                return Err(Error::NonFinite { epoch, batch: b, lr });
            }
            let p = &mut student.params;
            opt.step(&mut p.values, &p.grads, lr);
            p.round_to_f32();
        }

        let n = windows.len() as f64;
        let v = evaluate_tracks(&student, val)?;
        history.push(EpochRecord {
            epoch,
            lr,
            train_loss: sum_total / n,
            train_kd: sum_kd / n,
            train_ce: sum_ce / n,
            val_loss: v.loss,
            val_acc: v.accuracy,
        });
        accs.push(v.accuracy);
        let verdict = early_stop(&accs, cfg.patience.max(1))?;
        if verdict.best_epoch == epoch {
            best = student.clone();
            best_epoch = epoch;
        }
        if verdict.stop && epoch + 1 < cfg.max_epochs {
            stopped_early = true;
            break;
        }
    }
    Ok(TrainOutcome { best, best_epoch, history, stopped_early })
}
