//! Classification and distillation losses with analytic gradients.
//!
//! Batched functions take row-major `N x C` logit matrices; each row is one
//! frame. Batch losses are means over frames.

use crate::error::{Error, Result};

/// Training stage of the two-stage pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Stage {
    /// Pseudo-label training; distillation (if any) is unweighted.
    PseudoLabel,
    /// Continual training on ground truth with selective distillation.
    Continual,
}

impl Stage {
    pub fn number(self) -> u8 {
        match self {
            Stage::PseudoLabel => 1,
            Stage::Continual => 2,
        }
    }
}

impl TryFrom<u8> for Stage {
    type Error = Error;

    fn try_from(value: u8) -> Result<Self> {
        match value {
            1 => Ok(Stage::PseudoLabel),
            2 => Ok(Stage::Continual),
            other => Err(Error::invalid(format!("stage must be 1 or 2, got {other}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KdConfig {
    /// Weight of the distillation term.
    pub alpha: f64,
    /// Softmax temperature.
    pub tau: f64,
    pub theta_min: f64,
    pub theta_max: f64,
    /// Down-weighting slope above `theta_max`.
    pub k: f64,
}

impl Default for KdConfig {
    fn default() -> Self {
        Self {
            alpha: 0.3,
            tau: 3.0,
            theta_min: 0.1,
            theta_max: 0.9,
            k: 0.8,
        }
    }
}

impl KdConfig {
    pub fn validate(&self) -> Result<()> {
        let unit = |v: f64| (0.0..=1.0).contains(&v);
        if !unit(self.alpha) {
            return Err(Error::invalid(format!("alpha {} outside [0, 1]", self.alpha)));
        }
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return Err(Error::invalid(format!("tau must be positive, got {}", self.tau)));
        }
        if !(unit(self.theta_min) && unit(self.theta_max) && self.theta_min < self.theta_max) {
            return Err(Error::invalid(format!(
                "need 0 <= theta_min < theta_max <= 1, got {} and {}",
                self.theta_min, self.theta_max
            )));
        }
        if self.theta_max >= 1.0 {
            return Err(Error::invalid("theta_max must be below 1"));
        }
        if !(self.k > 0.0 && self.k <= 1.0) {
            return Err(Error::invalid(format!("K must lie in (0, 1], got {}", self.k)));
        }
        Ok(())
    }
}

fn check_finite(z: &[f64]) -> Result<()> {
    if z.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::invalid("logits must be finite"))
    }
}

fn check_tau(tau: f64) -> Result<()> {
    if tau > 0.0 && tau.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("temperature must be positive, got {tau}")))
    }
}

/// Writes `log softmax(z / tau)` into `out`.
fn log_softmax_into(z: &[f64], tau: f64, out: &mut [f64]) {
    let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for (o, &v) in out.iter_mut().zip(z) {
        *o = (v - max) / tau;
        sum += o.exp();
    }
    let log_sum = sum.ln();
    for o in out.iter_mut() {
        *o -= log_sum;
    }
}

fn softmax_into(z: &[f64], tau: f64, out: &mut [f64]) {
    let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for (o, &v) in out.iter_mut().zip(z) {
        *o = ((v - max) / tau).exp();
        sum += *o;
    }
    for o in out.iter_mut() {
        *o /= sum;
    }
}

/// Temperature softmax with max subtraction.
pub fn softmax_t(z: &[f64], tau: f64) -> Result<Vec<f64>> {
    check_tau(tau)?;
    check_finite(z)?;
    if z.is_empty() {
        return Err(Error::invalid("softmax of an empty vector"));
    }
    let mut p = vec![0.0; z.len()];
    softmax_into(z, tau, &mut p);
    Ok(p)
}

/// `tau^2 * KL(softmax(z_t/tau) || softmax(z_s/tau))`.
pub fn kd_loss(z_s: &[f64], z_t: &[f64], tau: f64) -> Result<f64> {
    check_pair(z_s, z_t, tau)?;
    let mut ls = vec![0.0; z_s.len()];
    let mut lt = vec![0.0; z_t.len()];
    Ok(kd_loss_unchecked(z_s, z_t, tau, &mut ls, &mut lt))
}

fn check_pair(z_s: &[f64], z_t: &[f64], tau: f64) -> Result<()> {
    check_tau(tau)?;
    check_finite(z_s)?;
    check_finite(z_t)?;
    if z_s.len() != z_t.len() || z_s.is_empty() {
        return Err(Error::Shape {
            expected: format!("{} classes", z_t.len()),
            got: format!("{} classes", z_s.len()),
        });
    }
    Ok(())
}

fn kd_loss_unchecked(z_s: &[f64], z_t: &[f64], tau: f64, ls: &mut [f64], lt: &mut [f64]) -> f64 {
    log_softmax_into(z_s, tau, ls);
    log_softmax_into(z_t, tau, lt);
    let kl: f64 = lt
        .iter()
        .zip(ls.iter())
        .map(|(&t, &s)| t.exp() * (t - s))
        .sum();
    tau * tau * kl.max(0.0)
}

/// Gradient of [`kd_loss`] with respect to the student logits:
/// `tau * (p_s - p_t)` with both distributions at temperature `tau`.
pub fn kd_grad(z_s: &[f64], z_t: &[f64], tau: f64) -> Result<Vec<f64>> {
    check_pair(z_s, z_t, tau)?;
    let mut ps = vec![0.0; z_s.len()];
    let mut pt = vec![0.0; z_t.len()];
    softmax_into(z_s, tau, &mut ps);
    softmax_into(z_t, tau, &mut pt);
    Ok(ps.iter().zip(&pt).map(|(s, t)| tau * (s - t)).collect())
}

/// Cross-entropy `-log softmax(z)_y` and its gradient `softmax(z) - onehot(y)`.
pub fn ce_loss(z: &[f64], y: usize) -> Result<(f64, Vec<f64>)> {
    check_finite(z)?;
    if y >= z.len() {
        return Err(Error::invalid(format!("class index {y} out of range for {} classes", z.len())));
    }
    let mut logp = vec![0.0; z.len()];
    log_softmax_into(z, 1.0, &mut logp);
    let grad = logp
        .iter()
        .enumerate()
        .map(|(k, &l)| l.exp() - if k == y { 1.0 } else { 0.0 })
        .collect();
    Ok((-logp[y], grad))
}

/// Confidence weight: 0 below `theta_min`, 1 up to `theta_max`, then a
/// linear fall to `1 - K` at full confidence.
pub fn selective_weight(c: f64, cfg: &KdConfig) -> f64 {
    if c < cfg.theta_min {
        0.0
    } else if c <= cfg.theta_max {
        1.0
    } else {
        (1.0 - cfg.k * (c - cfg.theta_max) / (1.0 - cfg.theta_max)).clamp(0.0, 1.0)
    }
}

/// Teacher confidence: maximum softmax probability at temperature 1.
pub fn teacher_confidence(z_t: &[f64]) -> f64 {
    let max = z_t.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = z_t.iter().map(|&v| (v - max).exp()).sum();
    1.0 / sum
}

/// Mean of `w(c_i) * kd_loss_i` over a batch of (student, teacher) pairs.
pub fn selective_kd_loss(batch: &[(&[f64], &[f64])], cfg: &KdConfig) -> Result<f64> {
    if batch.is_empty() {
        return Err(Error::invalid("selective KD over an empty batch"));
    }
    let mut total = 0.0;
    for (z_s, z_t) in batch {
        let w = selective_weight(teacher_confidence(z_t), cfg);
        total += w * kd_loss(z_s, z_t, cfg.tau)?;
    }
    Ok(total / batch.len() as f64)
}

/// A batch of frames, row-major `frames x classes`.
#[derive(Debug, Clone, Copy)]
pub struct LossBatch<'a> {
    pub student: &'a [f64],
    pub teacher: Option<&'a [f64]>,
    pub targets: &'a [usize],
    pub classes: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LossOutput {
    /// `alpha * kd + (1 - alpha) * classification`.
    pub total: f64,
    /// Frame-mean (selectively weighted in stage 2) distillation loss.
    pub kd: f64,
    /// Frame-mean cross-entropy against the targets.
    pub classification: f64,
    /// Gradient of `total` with respect to `student`, same layout.
    pub grad: Vec<f64>,
}

/// Stage-dependent objective and its gradient.
///
/// Stage 1 uses unweighted distillation, stage 2 weights each frame by the
/// teacher's confidence. With `alpha == 0` no teacher logits are read.
pub fn total_loss(stage: Stage, batch: LossBatch<'_>, cfg: &KdConfig) -> Result<LossOutput> {
    cfg.validate()?;
    let c = batch.classes;
    let n = batch.targets.len();
    if c == 0 || n == 0 {
        return Err(Error::invalid("loss over an empty batch"));
    }
    if batch.student.len() != n * c {
        return Err(Error::Shape {
            expected: format!("{n}x{c} student logits"),
            got: format!("{} values", batch.student.len()),
        });
    }
    let use_kd = cfg.alpha > 0.0;
    let teacher = match (use_kd, batch.teacher) {
        (false, _) => None,
        (true, Some(t)) if t.len() == n * c => Some(t),
        (true, Some(t)) => {
            return Err(Error::Shape {
                expected: format!("{n}x{c} teacher logits"),
                got: format!("{} values", t.len()),
            })
        }
        (true, None) => return Err(Error::invalid("alpha > 0 requires teacher logits")),
    };
    check_finite(batch.student)?;
    if let Some(t) = teacher {
        check_finite(t)?;
    }

    let alpha = cfg.alpha;
    let tau = cfg.tau;
    let scale = 1.0 / n as f64;
    let mut grad = vec![0.0; n * c];
    let mut kd_sum = 0.0;
    let mut ce_sum = 0.0;
    let mut ls = vec![0.0; c];
    let mut lt = vec![0.0; c];
    for i in 0..n {
        let zs = &batch.student[i * c..(i + 1) * c];
        let y = batch.targets[i];
        if y >= c {
            return Err(Error::invalid(format!("target {y} out of range for {c} classes")));
        }
        let g = &mut grad[i * c..(i + 1) * c];

        log_softmax_into(zs, 1.0, &mut ls);
        ce_sum += -ls[y];
        for (k, gk) in g.iter_mut().enumerate() {
            let onehot = if k == y { 1.0 } else { 0.0 };
            *gk = (1.0 - alpha) * scale * (ls[k].exp() - onehot);
        }

        if let Some(t) = teacher {
            let zt = &t[i * c..(i + 1) * c];
            let w = match stage {
                Stage::PseudoLabel => 1.0,
                Stage::Continual => selective_weight(teacher_confidence(zt), cfg),
            };
            if w > 0.0 {
                kd_sum += w * kd_loss_unchecked(zs, zt, tau, &mut ls, &mut lt);
                // ls, lt now hold the log-softmax at temperature tau.
                for (k, gk) in g.iter_mut().enumerate() {
                    *gk += alpha * scale * w * tau * (ls[k].exp() - lt[k].exp());
                }
            }
        }
    }
    let kd = kd_sum * scale;
    let classification = ce_sum * scale;
    Ok(LossOutput {
        total: alpha * kd + (1.0 - alpha) * classification,
        kd,
        classification,
        grad,
    })
}
