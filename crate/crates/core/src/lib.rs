//! Teacher-student chord recognition.
//!
//! A teacher model pseudo-labels unlabeled spectrograms, a dual-encoder
//! student is trained on those labels, and the student is then fine-tuned on
//! ground-truth annotations with confidence-weighted distillation from the
//! teacher. The crate also carries the chord evaluation suite used to score
//! each stage.

pub mod annotation;
pub mod chord;
pub mod config;
pub mod distill;
pub mod error;
pub mod features;
pub mod metrics;
pub mod model;
pub mod pipeline;

pub use error::{Error, Result};
