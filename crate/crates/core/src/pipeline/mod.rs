//! Two-stage training: pseudo-labels, stage-1 fitting, stage-2 continual
//! learning with selective distillation, and the supporting data plumbing.

pub mod noise;
pub mod pseudo;
pub mod record;
pub mod schedule;
pub mod split;
pub mod train;

pub use noise::{inject_label_noise, NoiseConfig, NoiseReport};
pub use pseudo::{generate_pseudo_labels, pseudo_label_tracks, PseudoLabelSet, PseudoLabelTrack};
pub use record::{data_fingerprint, format_history, parse_history, sha256_hex, RunManifest};
pub use schedule::{early_stop, AdamW, AdamWConfig, EarlyStop, LrSchedule, Schedule};
pub use split::{split_dataset, split_with_fractions, SplitSpec};
pub use train::{
    evaluate_tracks, train_stage1, train_stage2, EpochRecord, FrameEval, TrainConfig, TrainOutcome,
    TrainingTrack,
};
