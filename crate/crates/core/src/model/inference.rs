use crate::annotation::FrameLabels;
use crate::error::{Error, Result};
use crate::features::spectrogram::Spectrogram;

use super::logits::{argmax, LogitsSequence};
use super::student::Student2e1d;

/// Gaussian smoothing and sliding-window voting parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothingConfig {
    /// Odd kernel width `k`; `sigma = k / 6`.
    pub kernel_width: usize,
    pub window_length: usize,
    /// Overlap ratio `r` in `[0, 1)`.
    pub overlap: f64,
}

impl Default for SmoothingConfig {
    fn default() -> Self {
        Self { kernel_width: 9, window_length: 108, overlap: 0.5 }
    }
}

impl SmoothingConfig {
    pub fn validate(&self) -> Result<()> {
        if self.kernel_width == 0 || self.kernel_width % 2 == 0 {
            return Err(Error::invalid(format!(
                "kernel width must be odd and positive, got {}",
                self.kernel_width
            )));
        }
        if self.window_length == 0 {
            return Err(Error::invalid("window length must be positive"));
        }
        if !(0.0..1.0).contains(&self.overlap) {
            return Err(Error::invalid("overlap ratio must lie in [0, 1)"));
        }
        if self.stride() == 0 {
            return Err(Error::invalid("overlap leaves a zero stride"));
        }
        Ok(())
    }

    pub fn sigma(&self) -> f64 {
        self.kernel_width as f64 / 6.0
    }

    /// `floor(T (1 - r))`.
    pub fn stride(&self) -> usize {
        (self.window_length as f64 * (1.0 - self.overlap)).floor() as usize
    }
}

/// Normalized Gaussian taps for offsets `-(k-1)/2 ..= (k-1)/2`.
pub fn gaussian_kernel(kernel_width: usize) -> Result<Vec<f64>> {
    if kernel_width == 0 || kernel_width % 2 == 0 {
        return Err(Error::invalid(format!("kernel width must be odd, got {kernel_width}")));
    }
    let sigma = kernel_width as f64 / 6.0;
    let half = (kernel_width / 2) as i64;
    let raw: Vec<f64> = (-half..=half)
        .map(|n| (-((n * n) as f64) / (2.0 * sigma * sigma)).exp())
        .collect();
    let z: f64 = raw.iter().sum();
    Ok(raw.into_iter().map(|v| v / z).collect())
}

fn smooth_rows(data: &[f64], n_frames: usize, n_classes: usize, kernel: &[f64]) -> Vec<f64> {
    let half = (kernel.len() / 2) as i64;
    let last = n_frames as i64 - 1;
    let mut out = vec![0.0; data.len()];
    for t in 0..n_frames as i64 {
        let row = &mut out[t as usize * n_classes..(t as usize + 1) * n_classes];
        for (j, &w) in kernel.iter().enumerate() {
            let src = (t + j as i64 - half).clamp(0, last) as usize;
            for (o, v) in row.iter_mut().zip(&data[src * n_classes..(src + 1) * n_classes]) {
                *o += w * v;
            }
        }
    }
    out
}

/// Convolves every class channel along time, replicating edge frames.
pub fn smooth_logits(logits: &LogitsSequence, cfg: &SmoothingConfig) -> Result<LogitsSequence> {
    let kernel = gaussian_kernel(cfg.kernel_width)?;
    if logits.n_frames() == 0 {
        return Ok(logits.clone());
    }
    let data = smooth_rows(logits.data(), logits.n_frames(), logits.n_classes(), &kernel);
    LogitsSequence::new(data, logits.n_frames(), logits.n_classes())
}

/// Start frames `0, s, 2s, ...` below `len`; at least one window.
pub fn window_starts(len: usize, stride: usize) -> Vec<usize> {
    let stride = stride.max(1);
    let mut starts: Vec<usize> = (0..len).step_by(stride).collect();
    if starts.is_empty() {
        starts.push(0);
    }
    starts
}

/// Summed smoothed window logits per frame, plus how many windows covered
/// each frame.
pub fn windowed_votes(
    student: &Student2e1d,
    spec: &Spectrogram,
    cfg: &SmoothingConfig,
) -> Result<(LogitsSequence, Vec<u32>)> {
    cfg.validate()?;
    let mc = student.config();
    if cfg.window_length != mc.seq_len {
        return Err(Error::Shape {
            expected: format!("window of {} frames", mc.seq_len),
            got: format!("{} frames", cfg.window_length),
        });
    }
    if spec.n_bins() != mc.n_bins {
        return Err(Error::Shape {
            expected: format!("{} bins", mc.n_bins),
            got: format!("{} bins", spec.n_bins()),
        });
    }
    let kernel = gaussian_kernel(cfg.kernel_width)?;
    let (n, t, c) = (spec.n_frames(), cfg.window_length, mc.n_classes);
    let mut votes = vec![0.0; n * c];
    let mut counts = vec![0u32; n];
    for start in window_starts(n, cfg.stride()) {
        let logits = student.forward(&spec.window(start, t))?;
        let smoothed = smooth_rows(&logits, t, c, &kernel);
        for i in 0..t.min(n - start) {
            let f = start + i;
            counts[f] += 1;
            for (v, s) in votes[f * c..(f + 1) * c].iter_mut().zip(&smoothed[i * c..(i + 1) * c]) {
                *v += s;
            }
        }
    }
    Ok((LogitsSequence::new(votes, n, c)?, counts))
}

/// Full-track prediction by overlapping windows and summed smoothed logits.
pub fn windowed_infer(
    student: &Student2e1d,
    spec: &Spectrogram,
    cfg: &SmoothingConfig,
) -> Result<FrameLabels> {
    let (votes, _) = windowed_votes(student, spec, cfg)?;
    FrameLabels::new(votes.frames().map(argmax).collect(), spec.hop_seconds())
}
