use crate::error::{Error, Result};
use crate::features::spectrogram::Spectrogram;

/// Global z-score statistics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormStats {
    pub mean: f64,
    pub std: f64,
}

impl NormStats {
    pub fn new(mean: f64, std: f64) -> Result<Self> {
        let s = Self { mean, std };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.std > 0.0 && self.std.is_finite() && self.mean.is_finite()) {
            return Err(Error::invalid(format!(
                "normalization needs finite mean and positive std, got ({}, {})",
                self.mean, self.std
            )));
        }
        Ok(())
    }

    /// Mean and population standard deviation over every cell.
    pub fn fit<'a>(specs: impl IntoIterator<Item = &'a Spectrogram>) -> Result<Self> {
        let (mut n, mut sum, mut sq) = (0usize, 0.0, 0.0);
        for s in specs {
            for &v in s.data() {
                n += 1;
                sum += v;
                sq += v * v;
            }
        }
        if n == 0 {
            return Err(Error::invalid("cannot fit statistics on no data"));
        }
        let mean = sum / n as f64;
        let var = (sq / n as f64 - mean * mean).max(0.0);
        Self::new(mean, var.sqrt().max(1e-12))
    }
}

/// `(x - mean) / std` on every cell.
pub fn normalize(spec: &Spectrogram, stats: &NormStats) -> Result<Spectrogram> {
    stats.validate()?;
    spec.with_data(spec.data().iter().map(|v| (v - stats.mean) / stats.std).collect())
}

pub fn denormalize(spec: &Spectrogram, stats: &NormStats) -> Result<Spectrogram> {
    stats.validate()?;
    spec.with_data(spec.data().iter().map(|v| v * stats.std + stats.mean).collect())
}

/// Per-bin z-score statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct BinNormStats {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl BinNormStats {
    pub fn fit<'a>(specs: impl IntoIterator<Item = &'a Spectrogram>) -> Result<Self> {
        let mut n = 0usize;
        let mut sum: Vec<f64> = Vec::new();
        let mut sq: Vec<f64> = Vec::new();
        for s in specs {
            if sum.is_empty() {
                sum = vec![0.0; s.n_bins()];
                sq = vec![0.0; s.n_bins()];
            } else if sum.len() != s.n_bins() {
                return Err(Error::Shape {
                    expected: format!("{} bins", sum.len()),
                    got: format!("{} bins", s.n_bins()),
                });
            }
            for t in 0..s.n_frames() {
                for (b, &v) in s.frame(t).iter().enumerate() {
                    sum[b] += v;
                    sq[b] += v * v;
                }
            }
            n += s.n_frames();
        }
        if n == 0 {
            return Err(Error::invalid("cannot fit statistics on no data"));
        }
        let mean: Vec<f64> = sum.iter().map(|s| s / n as f64).collect();
        let std = sq
            .iter()
            .zip(&mean)
            .map(|(q, m)| (q / n as f64 - m * m).max(0.0).sqrt().max(1e-12))
            .collect();
        Ok(Self { mean, std })
    }

    pub fn normalize(&self, spec: &Spectrogram) -> Result<Spectrogram> {
        if self.mean.len() != spec.n_bins() {
            return Err(Error::Shape {
                expected: format!("{} bins", self.mean.len()),
                got: format!("{} bins", spec.n_bins()),
            });
        }
        let f = spec.n_bins();
        let data = spec
            .data()
            .iter()
            .enumerate()
            .map(|(i, v)| (v - self.mean[i % f]) / self.std[i % f])
            .collect();
        spec.with_data(data)
    }
}

/// Normalization applied to student inputs.
#[derive(Debug, Clone, PartialEq)]
pub enum Normalizer {
    Global(NormStats),
    PerBin(BinNormStats),
}

impl Normalizer {
    pub fn fit<'a>(specs: &[&'a Spectrogram], per_bin: bool) -> Result<Self> {
        if per_bin {
            Ok(Normalizer::PerBin(BinNormStats::fit(specs.iter().copied())?))
        } else {
            Ok(Normalizer::Global(NormStats::fit(specs.iter().copied())?))
        }
    }

    pub fn apply(&self, spec: &Spectrogram) -> Result<Spectrogram> {
        match self {
            Normalizer::Global(s) => normalize(spec, s),
            Normalizer::PerBin(s) => s.normalize(spec),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_stats_are_identity() {
        let s = Spectrogram::new(vec![0.5, 1.5, -2.0, 3.0], 2, 2).unwrap();
        assert_eq!(normalize(&s, &NormStats::new(0.0, 1.0).unwrap()).unwrap(), s);
    }

    #[test]
    fn constant_input_maps_to_zero() {
        let s = Spectrogram::new(vec![4.2; 6], 3, 2).unwrap();
        let z = normalize(&s, &NormStats::new(4.2, 0.7).unwrap()).unwrap();
        assert!(z.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn round_trip() {
        let s = Spectrogram::new((0..12).map(|i| (i as f64).sin() * 3.0).collect(), 4, 3).unwrap();
        let stats = NormStats::fit([&s]).unwrap();
        let back = denormalize(&normalize(&s, &stats).unwrap(), &stats).unwrap();
        for (a, b) in back.data().iter().zip(s.data()) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn rejects_bad_std() {
        assert!(NormStats::new(0.0, 0.0).is_err());
        assert!(NormStats::new(0.0, -1.0).is_err());
        let s = Spectrogram::new(vec![1.0; 2], 1, 2).unwrap();
        assert!(normalize(&s, &NormStats { mean: 0.0, std: 0.0 }).is_err());
    }

    #[test]
    fn per_bin_statistics() {
        let s = Spectrogram::new(vec![1.0, 10.0, 3.0, 20.0], 2, 2).unwrap();
        let stats = BinNormStats::fit([&s]).unwrap();
        assert_eq!(stats.mean, vec![2.0, 15.0]);
        assert_eq!(stats.std, vec![1.0, 5.0]);
        let z = stats.normalize(&s).unwrap();
        assert_eq!(z.data(), &[-1.0, -1.0, 1.0, 1.0]);
    }
}
