use crate::annotation::IntervalSequence;
use crate::error::{Error, Result};

/// Duration-weighted distribution of chord roots over 12 pitch classes.
#[derive(Debug, Clone, PartialEq)]
pub struct RootDistribution {
    pub mass: [f64; 12],
    pub entropy_bits: f64,
    /// Population standard deviation over mean of the 12 masses.
    pub cv: f64,
    /// Entropy as a percentage of `log2(12)`.
    pub uniformity_pct: f64,
}

impl RootDistribution {
    /// Builds the statistics from non-negative weights (normalized here).
    pub fn from_weights(weights: &[f64; 12]) -> Result<Self> {
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::invalid("root weights must be finite and non-negative"));
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(Error::invalid("corpus has zero chord duration"));
        }
        let mut mass = [0.0; 12];
        for (m, w) in mass.iter_mut().zip(weights) {
            *m = w / total;
        }
        let entropy_bits = -mass
            .iter()
            .filter(|&&p| p > 0.0)
            .map(|&p| p * p.log2())
            .sum::<f64>();
        let mean = 1.0 / 12.0;
        let var = mass.iter().map(|m| (m - mean).powi(2)).sum::<f64>() / 12.0;
        Ok(Self {
            mass,
            entropy_bits: entropy_bits.max(0.0),
            cv: var.sqrt() / mean,
            uniformity_pct: entropy_bits.max(0.0) / 12f64.log2() * 100.0,
        })
    }
}

/// Root distribution of a corpus, ignoring `N` and `X` time.
pub fn root_distribution<'a>(corpus: impl IntoIterator<Item = &'a IntervalSequence>) -> Result<RootDistribution> {
    let mut weights = [0.0; 12];
    for seq in corpus {
        for s in seq.segments() {
            if let Some(root) = s.label.root() {
                weights[root.value() as usize] += s.duration();
            }
        }
    }
    RootDistribution::from_weights(&weights)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::annotation::Segment;
    use crate::chord::{ChordLabel, Quality};

    #[test]
    fn uniform_is_maximal() {
        let d = RootDistribution::from_weights(&[1.0; 12]).unwrap();
        assert!((d.entropy_bits - 12f64.log2()).abs() < 1e-12);
        assert!((d.entropy_bits - 3.585).abs() < 1e-3);
        assert!(d.cv.abs() < 1e-12);
        assert!((d.uniformity_pct - 100.0).abs() < 1e-9);
    }

    #[test]
    fn single_root_has_zero_entropy() {
        let seq = IntervalSequence::new(vec![
            Segment::new(0.0, 2.0, ChordLabel::chord(4, Quality::Maj)),
            Segment::new(2.0, 3.0, ChordLabel::NoChord),
            Segment::new(3.0, 5.0, ChordLabel::chord(4, Quality::Min7)),
        ])
        .unwrap();
        let d = root_distribution([&seq]).unwrap();
        assert_eq!(d.mass[4], 1.0);
        assert_eq!(d.entropy_bits, 0.0);
        assert_eq!(d.uniformity_pct, 0.0);
    }

    #[test]
    fn no_chords_is_an_error() {
        let seq = IntervalSequence::new(vec![Segment::new(0.0, 2.0, ChordLabel::NoChord)]).unwrap();
        assert!(root_distribution([&seq]).is_err());
    }
}
