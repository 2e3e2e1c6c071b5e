//! Typed views of the `key = value` configuration.

use std::path::PathBuf;

use anyhow::{anyhow, Context, Result};
use chordkd::chord::Quality;
use chordkd::config::{ConfigMap, ConfigReader};
use chordkd::features::SynthConfig;
use chordkd::model::{ModelConfig, SmoothingConfig, TemplateTeacher};
use chordkd::pipeline::{NoiseConfig, TrainConfig};

use crate::GlobalArgs;

/// Merges the config file, `--set` overrides and `--seed`.
pub fn load(global: &GlobalArgs) -> Result<ConfigMap> {
    let mut map = match &global.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            ConfigMap::parse(&text).with_context(|| format!("parsing {}", path.display()))?
        }
        None => ConfigMap::default(),
    };
    for o in &global.overrides {
        map.set_override(o)?;
    }
    if let Some(seed) = global.seed {
        map.insert("seed", seed);
    }
    Ok(map)
}

pub fn seed(r: &mut ConfigReader) -> Result<u64> {
    Ok(r.take("seed")?.unwrap_or(0))
}

pub fn path(r: &mut ConfigReader, key: &str) -> Option<PathBuf> {
    r.take_str(key).map(PathBuf::from)
}

pub fn required_path(r: &mut ConfigReader, key: &str) -> Result<PathBuf> {
    path(r, key).ok_or_else(|| anyhow!("missing required config key {key}"))
}

fn qualities(r: &mut ConfigReader, key: &str, default: Vec<Quality>) -> Result<Vec<Quality>> {
    let Some(text) = r.take_str(key) else { return Ok(default) };
    let parsed = text
        .split(',')
        .map(|q| {
            let q = q.trim();
            Quality::from_alias(q).ok_or_else(|| anyhow!("config key {key}: unknown quality {q:?}"))
        })
        .collect::<Result<Vec<_>>>()?;
    if parsed.is_empty() {
        return Err(anyhow!("config key {key}: no qualities given"));
    }
    Ok(parsed)
}

pub fn synth(r: &mut ConfigReader, seed: u64) -> Result<SynthConfig> {
    let mut c = SynthConfig { seed, ..SynthConfig::default() };
    r.read("synth.n_tracks", &mut c.n_tracks)?;
    r.read("synth.noise", &mut c.noise)?;
    r.read("synth.min_chords", &mut c.chords_per_track.0)?;
    r.read("synth.max_chords", &mut c.chords_per_track.1)?;
    r.read("synth.min_chord_seconds", &mut c.chord_seconds.0)?;
    r.read("synth.max_chord_seconds", &mut c.chord_seconds.1)?;
    r.read("synth.min_edge_seconds", &mut c.edge_no_chord_seconds.0)?;
    r.read("synth.max_edge_seconds", &mut c.edge_no_chord_seconds.1)?;
    c.qualities = qualities(r, "synth.qualities", c.qualities)?;
    c.validate()?;
    Ok(c)
}

pub fn teacher(r: &mut ConfigReader) -> Result<TemplateTeacher> {
    let d = TemplateTeacher::default();
    let sharpness = r.take("teacher.sharpness")?.unwrap_or(d.sharpness);
    let threshold = r.take("teacher.silence_threshold")?.unwrap_or(d.silence_threshold);
    let qs = qualities(r, "teacher.qualities", d.qualities)?;
    Ok(TemplateTeacher::new(sharpness, threshold, qs)?)
}

/// Architecture keys applied on top of `base`.
pub fn model(r: &mut ConfigReader, base: ModelConfig) -> Result<ModelConfig> {
    let mut c = base;
    r.read("model.d_model", &mut c.d_model)?;
    r.read("model.n_heads", &mut c.n_heads)?;
    r.read("model.n_layers_freq", &mut c.n_layers_freq)?;
    r.read("model.n_layers_time", &mut c.n_layers_time)?;
    r.read("model.n_freq_groups", &mut c.n_freq_groups)?;
    r.read("model.ffn_dim", &mut c.ffn_dim)?;
    r.read("model.dropout", &mut c.dropout)?;
    r.read("model.seq_len", &mut c.seq_len)?;
    c.validate()?;
    Ok(c)
}

pub fn train(r: &mut ConfigReader, stage: u8, seed: u64, seq_len: usize) -> Result<TrainConfig> {
    let mut c = if stage == 1 { TrainConfig::stage1() } else { TrainConfig::stage2() };
    c.seed = seed;
    c.seq_len = seq_len;
    r.read("train.base_lr", &mut c.base_lr)?;
    r.read("train.peak_lr", &mut c.peak_lr)?;
    r.read("train.warmup_epochs", &mut c.warmup_epochs)?;
    r.read("train.schedule", &mut c.schedule)?;
    r.read("train.plateau_decay_factor", &mut c.plateau_decay_factor)?;
    r.read("train.plateau_patience", &mut c.plateau_patience)?;
    r.read("train.batch_size", &mut c.batch_size)?;
    r.read("train.patience", &mut c.patience)?;
    r.read("train.max_epochs", &mut c.max_epochs)?;
    r.read("optimizer.beta1", &mut c.optimizer.beta1)?;
    r.read("optimizer.beta2", &mut c.optimizer.beta2)?;
    r.read("optimizer.eps", &mut c.optimizer.eps)?;
    r.read("optimizer.weight_decay", &mut c.optimizer.weight_decay)?;
    r.read("kd.alpha", &mut c.kd.alpha)?;
    r.read("kd.tau", &mut c.kd.tau)?;
    r.read("kd.theta_min", &mut c.kd.theta_min)?;
    r.read("kd.theta_max", &mut c.kd.theta_max)?;
    r.read("kd.k", &mut c.kd.k)?;
    c.validate()?;
    Ok(c)
}

/// Label noise for the stage-2 ablation; `None` unless `noise.enabled`.
pub fn noise(r: &mut ConfigReader, seed: u64) -> Result<Option<NoiseConfig>> {
    let enabled: bool = r.take("noise.enabled")?.unwrap_or(false);
    let mut c = NoiseConfig { seed, ..NoiseConfig::default() };
    r.read("noise.delta", &mut c.delta)?;
    r.read("noise.delta_n", &mut c.delta_n)?;
    r.read("noise.min_segment", &mut c.min_segment)?;
    c.validate()?;
    Ok(enabled.then_some(c))
}

pub fn smoothing(r: &mut ConfigReader, window_length: usize) -> Result<SmoothingConfig> {
    let mut c = SmoothingConfig { window_length, ..SmoothingConfig::default() };
    r.read("smoothing.kernel_width", &mut c.kernel_width)?;
    r.read("smoothing.overlap", &mut c.overlap)?;
    c.validate()?;
    Ok(c)
}
