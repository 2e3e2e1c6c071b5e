//! Direct constant-Q transform with Hann-windowed complex kernels.

use std::f64::consts::PI;
use std::path::Path;

use crate::error::{Error, Result};
use crate::features::spectrogram::{
    Spectrogram, DEFAULT_BINS, DEFAULT_BINS_PER_OCTAVE, DEFAULT_HOP, DEFAULT_SAMPLE_RATE,
};

/// C1 in Hz.
pub const C1_HZ: f64 = 32.703_195_662_574_83;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CqtParams {
    pub sample_rate_hz: u32,
    pub hop_samples: usize,
    pub fmin_hz: f64,
    pub bins_per_octave: usize,
    pub n_bins: usize,
}

impl Default for CqtParams {
    fn default() -> Self {
        Self {
            sample_rate_hz: DEFAULT_SAMPLE_RATE,
            hop_samples: DEFAULT_HOP,
            fmin_hz: C1_HZ,
            bins_per_octave: DEFAULT_BINS_PER_OCTAVE,
            n_bins: DEFAULT_BINS,
        }
    }
}

impl CqtParams {
    pub fn bin_frequency(&self, k: usize) -> f64 {
        self.fmin_hz * 2f64.powf(k as f64 / self.bins_per_octave as f64)
    }

    pub fn quality_factor(&self) -> f64 {
        1.0 / (2f64.powf(1.0 / self.bins_per_octave as f64) - 1.0)
    }

    fn validate(&self) -> Result<()> {
        if self.hop_samples == 0 || self.n_bins == 0 || self.bins_per_octave == 0 {
            return Err(Error::invalid("CQT hop, bins and bins-per-octave must be positive"));
        }
        let nyquist = self.sample_rate_hz as f64 / 2.0;
        if !(self.fmin_hz > 0.0) || self.bin_frequency(self.n_bins - 1) >= nyquist {
            return Err(Error::invalid("CQT bins must lie between 0 Hz and Nyquist"));
        }
        Ok(())
    }
}

struct Kernel {
    /// Offset of the first tap relative to the frame center.
    offset: isize,
    re: Vec<f64>,
    im: Vec<f64>,
}

fn kernels(params: &CqtParams) -> Vec<Kernel> {
    let q = params.quality_factor();
    let sr = params.sample_rate_hz as f64;
    (0..params.n_bins)
        .map(|k| {
            let f = params.bin_frequency(k);
            let len = (q * sr / f).round().max(1.0) as usize;
            let window: Vec<f64> = (0..len)
                .map(|n| 0.5 - 0.5 * (2.0 * PI * (n as f64 + 0.5) / len as f64).cos())
                .collect();
            let norm: f64 = window.iter().sum();
            let offset = -((len / 2) as isize);
            let (mut re, mut im) = (Vec::with_capacity(len), Vec::with_capacity(len));
            for (n, w) in window.iter().enumerate() {
                let phase = 2.0 * PI * f * (n as isize + offset) as f64 / sr;
                re.push(w * phase.cos() / norm);
                im.push(-w * phase.sin() / norm);
            }
            Kernel { offset, re, im }
        })
        .collect()
}

/// Magnitude CQT with frames centered at `t * hop`; the signal is zero
/// outside its support. Yields `ceil(samples / hop)` frames.
pub fn cqt(audio: &[f64], params: &CqtParams) -> Result<Spectrogram> {
    params.validate()?;
    if audio.is_empty() {
        return Err(Error::invalid("cannot transform empty audio"));
    }
    let n_frames = audio.len().div_ceil(params.hop_samples);
    let kernels = kernels(params);
    let mut data = Vec::with_capacity(n_frames * params.n_bins);
    for t in 0..n_frames {
        let center = (t * params.hop_samples) as isize;
        for k in &kernels {
            let first = center + k.offset;
            let lo = (-first).max(0) as usize;
            let hi = ((audio.len() as isize - first).max(0) as usize).min(k.re.len());
            let (mut re, mut im) = (0.0, 0.0);
            if lo < hi {
                let x = &audio[(first + lo as isize) as usize..(first + hi as isize) as usize];
                for ((s, kr), ki) in x.iter().zip(&k.re[lo..hi]).zip(&k.im[lo..hi]) {
                    re += s * kr;
                    im += s * ki;
                }
            }
            data.push((re * re + im * im).sqrt());
        }
    }
    let mut spec = Spectrogram::with_timing(
        data,
        n_frames,
        params.n_bins,
        params.hop_samples,
        params.sample_rate_hz,
    )?;
    spec.bins_per_octave = params.bins_per_octave;
    Ok(spec)
}

/// Reads a PCM WAV file and mixes it down to mono in [-1, 1].
/// Returns the samples and the file's sample rate.
pub fn read_wav_mono(path: &Path) -> Result<(Vec<f64>, u32)> {
    let file = std::fs::File::open(path).map_err(|e| Error::file(path, e))?;
    decode_wav_mono(std::io::BufReader::new(file))
}

/// [`read_wav_mono`] on any byte source.
pub fn decode_wav_mono(source: impl std::io::Read) -> Result<(Vec<f64>, u32)> {
    let mut reader = hound::WavReader::new(source)?;
    let spec = reader.spec();
    let channels = spec.channels.max(1) as usize;
    let samples: Vec<f64> = match spec.sample_format {
        hound::SampleFormat::Float => reader
            .samples::<f32>()
            .map(|s| s.map(f64::from))
            .collect::<std::result::Result<_, _>>()?,
        hound::SampleFormat::Int => {
            let scale = (1i64 << (spec.bits_per_sample.max(1) - 1)) as f64;
            reader
                .samples::<i32>()
                .map(|s| s.map(|v| v as f64 / scale))
                .collect::<std::result::Result<_, _>>()?
        }
    };
    let mono = samples
        .chunks(channels)
        .map(|c| c.iter().sum::<f64>() / c.len() as f64)
        .collect();
    Ok((mono, spec.sample_rate))
}
