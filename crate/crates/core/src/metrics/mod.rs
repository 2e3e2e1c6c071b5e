//! Chord recognition evaluation: weighted comparison scores, segmentation,
//! chord symbol recall and frame-wise agreement.

pub mod compare;
pub mod framewise;
pub mod quality;
pub mod report;
pub mod segmentation;
pub mod weighted;

pub use compare::{compare, Comparator, ComparisonKind};
pub use framewise::{framewise_agreement, FrameScores};
pub use quality::{acqa, wcsr, QualityGroup, QualityReport, QualityScore, TrackPair};
pub use report::EvalReport;
pub use segmentation::{directional_hamming, macro_average, segmentation_scores, SegmentationScores};
pub use weighted::{csr, merge_timelines, weighted_score, AtomicInterval, WeightedTally};
