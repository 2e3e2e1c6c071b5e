//! The dual-encoder student, teachers and windowed inference.

pub mod checkpoint;
pub mod config;
pub mod inference;
pub mod layers;
pub mod logits;
pub mod params;
pub mod student;
pub mod teacher;

pub use checkpoint::Checkpoint;
pub use config::ModelConfig;
pub use inference::{gaussian_kernel, smooth_logits, window_starts, windowed_infer, windowed_votes, SmoothingConfig};
pub use logits::{argmax, LogitsSequence};
pub use params::{Parameters, Tensor, TensorInfo};
pub use student::{parameter_count, Student2e1d, Trace};
pub use teacher::{teacher_infer, Teacher, TemplateTeacher};
