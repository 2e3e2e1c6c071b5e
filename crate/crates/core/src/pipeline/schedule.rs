use std::f64::consts::PI;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Schedule {
    /// Linear warmup from the base to the peak rate, then cosine to zero.
    WarmupCosine,
    /// Constant base rate, multiplied by the decay factor on each plateau.
    PlateauDecay,
}

impl Schedule {
    pub fn name(self) -> &'static str {
        match self {
            Schedule::WarmupCosine => "warmup-cosine",
            Schedule::PlateauDecay => "plateau-decay",
        }
    }
}

impl std::str::FromStr for Schedule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "warmup-cosine" => Ok(Schedule::WarmupCosine),
            "plateau-decay" => Ok(Schedule::PlateauDecay),
            _ => Err(Error::invalid(format!("unknown schedule {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LrSchedule {
    pub schedule: Schedule,
    pub base_lr: f64,
    pub peak_lr: f64,
    pub warmup_epochs: usize,
    pub max_epochs: usize,
    pub decay_factor: f64,
    /// Epochs without improvement that count as one plateau.
    pub plateau_patience: usize,
}

impl LrSchedule {
    /// Rate for `epoch`, given the validation metric (higher is better) of
    /// every finished epoch before it.
    pub fn lr(&self, epoch: usize, val_history: &[f64]) -> f64 {
        match self.schedule {
            Schedule::WarmupCosine => {
                let w = self.warmup_epochs;
                if epoch < w {
                    return self.base_lr + (self.peak_lr - self.base_lr) * epoch as f64 / w as f64;
                }
                let span = self.max_epochs.saturating_sub(1).saturating_sub(w);
                if span == 0 {
                    return if epoch == w { self.peak_lr } else { 0.0 };
                }
                let progress = ((epoch - w) as f64 / span as f64).min(1.0);
                0.5 * self.peak_lr * (1.0 + (PI * progress).cos())
            }
            Schedule::PlateauDecay => {
                let mut lr = self.base_lr;
                let mut best = f64::NEG_INFINITY;
                let mut stale = 0;
                for &v in val_history.iter().take(epoch) {
                    if v > best {
                        best = v;
                        stale = 0;
                    } else {
                        stale += 1;
                        if stale >= self.plateau_patience.max(1) {
                            lr *= self.decay_factor;
                            stale = 0;
                        }
                    }
                }
                lr
            }
        }
    }
}

/// Early-stopping verdict over a validation-accuracy history.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EarlyStop {
    pub stop: bool,
    /// First epoch attaining the best accuracy.
    pub best_epoch: usize,
}

/// Stops once `patience` epochs have passed without beating the best.
pub fn early_stop(val_acc: &[f64], patience: usize) -> Result<EarlyStop> {
    if val_acc.is_empty() {
        return Err(Error::invalid("early stopping needs at least one epoch"));
    }
    let mut best_epoch = 0;
    for (i, &v) in val_acc.iter().enumerate() {
        if v > val_acc[best_epoch] {
            best_epoch = i;
        }
    }
    let since = val_acc.len() - 1 - best_epoch;
    Ok(EarlyStop { stop: since >= patience, best_epoch })
}

/// Adaptive moments with decoupled weight decay.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamWConfig {
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub weight_decay: f64,
}

impl Default for AdamWConfig {
    fn default() -> Self {
        Self { beta1: 0.9, beta2: 0.999, eps: 1e-8, weight_decay: 0.01 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdamW {
    pub cfg: AdamWConfig,
    m: Vec<f64>,
    v: Vec<f64>,
    step: u64,
}

impl AdamW {
    pub fn new(cfg: AdamWConfig, n: usize) -> Self {
        Self { cfg, m: vec![0.0; n], v: vec![0.0; n], step: 0 }
    }

    pub fn step(&mut self, params: &mut [f64], grads: &[f64], lr: f64) {
        let c = self.cfg;
        self.step += 1;
        let bc1 = 1.0 - c.beta1.powi(self.step as i32);
        let bc2 = 1.0 - c.beta2.powi(self.step as i32);
        for i in 0..params.len() {
            let g = grads[i];
            self.m[i] = c.beta1 * self.m[i] + (1.0 - c.beta1) * g;
            self.v[i] = c.beta2 * self.v[i] + (1.0 - c.beta2) * g * g;
            let mhat = self.m[i] / bc1;
            let vhat = self.v[i] / bc2;
            params[i] -= lr * (mhat / (vhat.sqrt() + c.eps) + c.weight_decay * params[i]);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cosine() -> LrSchedule {
        LrSchedule {
            schedule: Schedule::WarmupCosine,
            base_lr: 1e-4,
            peak_lr: 3e-4,
            warmup_epochs: 10,
            max_epochs: 50,
            decay_factor: 0.95,
            plateau_patience: 1,
        }
    }

    #[test]
    fn warmup_cosine_endpoints() {
        let s = cosine();
        assert_eq!(s.lr(0, &[]), 1e-4);
        assert!((s.lr(10, &[]) - 3e-4).abs() < 1e-18);
        assert!((s.lr(5, &[]) - 2e-4).abs() < 1e-18);
        assert!(s.lr(49, &[]).abs() < 1e-12);
        assert!(s.lr(30, &[]) < s.lr(20, &[]));
    }

    #[test]
    fn plateau_decays_only_on_stalls() {
        let s = LrSchedule { schedule: Schedule::PlateauDecay, base_lr: 1e-5, ..cosine() };
        let improving: Vec<f64> = (0..20).map(|i| i as f64).collect();
        assert_eq!(s.lr(20, &improving), 1e-5);
        let stalled = [0.5, 0.5, 0.4];
        assert!((s.lr(3, &stalled) - 1e-5 * 0.95 * 0.95).abs() < 1e-20);
    }

    #[test]
    fn early_stopping_rules() {
        let up: Vec<f64> = (0..30).map(|i| i as f64).collect();
        for n in 1..=up.len() {
            assert!(!early_stop(&up[..n], 10).unwrap().stop);
        }
        let flat = vec![0.5; 11];
        assert!(!early_stop(&flat[..10], 10).unwrap().stop);
        assert_eq!(early_stop(&flat, 10).unwrap(), EarlyStop { stop: true, best_epoch: 0 });
        assert_eq!(early_stop(&[0.1, 0.9, 0.3, 0.9], 5).unwrap().best_epoch, 1);
        assert!(early_stop(&[], 3).is_err());
    }

    #[test]
    fn adamw_first_step_moves_by_lr() {
        let mut opt = AdamW::new(AdamWConfig { weight_decay: 0.0, ..Default::default() }, 2);
        let mut p = vec![1.0, -1.0];
        opt.step(&mut p, &[0.5, -2.0], 0.1);
        assert!((p[0] - 0.9).abs() < 1e-6 && (p[1] + 0.9).abs() < 1e-6);
    }
}
