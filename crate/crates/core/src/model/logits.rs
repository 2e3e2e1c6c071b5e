use crate::error::{Error, Result};

/// Per-frame class scores, `n_frames x n_classes`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct LogitsSequence {
    data: Vec<f64>,
    n_frames: usize,
    n_classes: usize,
}

impl LogitsSequence {
    pub fn new(data: Vec<f64>, n_frames: usize, n_classes: usize) -> Result<Self> {
        if n_classes == 0 {
            return Err(Error::invalid("logits need at least one class"));
        }
        if data.len() != n_frames * n_classes {
            return Err(Error::Shape {
                expected: format!("{n_frames}x{n_classes}"),
                got: format!("{} values", data.len()),
            });
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("logits must be finite"));
        }
        Ok(Self { data, n_frames, n_classes })
    }

    pub fn n_frames(&self) -> usize {
        self.n_frames
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn frame(&self, t: usize) -> &[f64] {
        &self.data[t * self.n_classes..(t + 1) * self.n_classes]
    }

    pub fn frames(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks(self.n_classes)
    }

    /// Frame-wise argmax; ties resolve to the lowest class index.
    pub fn argmax(&self) -> Vec<usize> {
        self.frames().map(argmax).collect()
    }
}

pub fn argmax(row: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in row.iter().enumerate() {
        if v > row[best] {
            best = i;
        }
    }
    best
}
