use crate::chord::VOCAB_SIZE;
use crate::error::{Error, Result};

/// Shape of the dual-encoder student.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelConfig {
    pub d_model: usize,
    pub n_heads: usize,
    pub n_layers_freq: usize,
    pub n_layers_time: usize,
    /// Number of contiguous bin groups tokenized by the frequency encoder.
    pub n_freq_groups: usize,
    pub ffn_dim: usize,
    pub dropout: f64,
    pub n_classes: usize,
    /// Frames per input window.
    pub seq_len: usize,
    pub n_bins: usize,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            d_model: 192,
            n_heads: 4,
            n_layers_freq: 2,
            n_layers_time: 2,
            n_freq_groups: 12,
            ffn_dim: 768,
            dropout: 0.1,
            n_classes: VOCAB_SIZE,
            seq_len: 108,
            n_bins: 144,
        }
    }
}

impl ModelConfig {
    /// Small configuration used for gradient checks.
    pub fn tiny() -> Self {
        Self {
            d_model: 8,
            n_heads: 2,
            n_layers_freq: 1,
            n_layers_time: 1,
            n_freq_groups: 3,
            ffn_dim: 16,
            dropout: 0.0,
            n_classes: 5,
            seq_len: 4,
            n_bins: 12,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("d_model", self.d_model),
            ("n_heads", self.n_heads),
            ("n_freq_groups", self.n_freq_groups),
            ("ffn_dim", self.ffn_dim),
            ("n_classes", self.n_classes),
            ("seq_len", self.seq_len),
            ("n_bins", self.n_bins),
        ];
        for (name, v) in positive {
            if v == 0 {
                return Err(Error::invalid(format!("model {name} must be positive")));
            }
        }
        if self.n_bins % self.n_freq_groups != 0 {
            return Err(Error::invalid(format!(
                "{} bins cannot be split into {} equal groups",
                self.n_bins, self.n_freq_groups
            )));
        }
        if self.d_model % self.n_heads != 0 {
            return Err(Error::invalid(format!(
                "d_model {} is not divisible by {} heads",
                self.d_model, self.n_heads
            )));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(Error::invalid("dropout must lie in [0, 1)"));
        }
        Ok(())
    }

    pub fn group_size(&self) -> usize {
        self.n_bins / self.n_freq_groups
    }

    pub fn head_dim(&self) -> usize {
        self.d_model / self.n_heads
    }
}
