//! CQT features, normalization, the synthetic corpus and corpus statistics.

pub mod cqt;
pub mod manifest;
pub mod norm;
pub mod spectrogram;
pub mod stats;
pub mod synth;

pub use cqt::{cqt, decode_wav_mono, read_wav_mono, CqtParams};
pub use manifest::{CorpusManifest, ManifestEntry};
pub use norm::{denormalize, normalize, BinNormStats, NormStats, Normalizer};
pub use spectrogram::Spectrogram;
pub use stats::{root_distribution, RootDistribution};
pub use synth::{chord_profile, chroma_template, fold_chroma, synth_corpus, synth_track, SynthConfig, SynthTrack};
