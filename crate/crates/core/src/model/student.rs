use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::config::ModelConfig;
use super::layers::{
    add_into, apply_mask, dropout, Attention, AttnCache, Block, FeedForward, FfnCache, LayerNorm,
    Linear, LnCache,
};
use super::params::{Init, ParamBuilder, Parameters, Tensor};
use crate::error::{Error, Result};

/// Pre-norm transformer encoder layer.
#[derive(Debug, Clone, Copy)]
struct EncoderLayer {
    ln1: LayerNorm,
    attn: Attention,
    ln2: LayerNorm,
    ffn: FeedForward,
}

struct EncoderCache {
    ln1: LnCache,
    attn: AttnCache,
    mask1: Option<Vec<f64>>,
    ln2: LnCache,
    ffn: FfnCache,
    mask2: Option<Vec<f64>>,
}

impl EncoderLayer {
    fn declare(pb: &mut ParamBuilder, name: &str, cfg: &ModelConfig) -> Self {
        let d = cfg.d_model;
        Self {
            ln1: LayerNorm::declare(pb, &format!("{name}.ln1"), d),
            attn: Attention::declare(pb, &format!("{name}.attn"), d, cfg.n_heads),
            ln2: LayerNorm::declare(pb, &format!("{name}.ln2"), d),
            ffn: FeedForward::declare(pb, &format!("{name}.ffn"), d, cfg.ffn_dim),
        }
    }

    fn forward(
        &self,
        p: &[f64],
        mut x: Vec<f64>,
        blocks: &[Block],
        rate: f64,
        rng: &mut Option<&mut ChaCha8Rng>,
    ) -> (Vec<f64>, EncoderCache) {
        let (h, ln1) = self.ln1.forward(p, &x);
        let (mut a, attn) = self.attn.forward(p, h, None, blocks);
        let mask1 = dropout(&mut a, rate, rng.as_deref_mut());
        add_into(&mut x, &a);
        let (h, ln2) = self.ln2.forward(p, &x);
        let (mut f, ffn) = self.ffn.forward(p, h);
        let mask2 = dropout(&mut f, rate, rng.as_deref_mut());
        add_into(&mut x, &f);
        (x, EncoderCache { ln1, attn, mask1, ln2, ffn, mask2 })
    }

    fn backward(
        &self,
        p: &[f64],
        g: &mut [f64],
        c: &EncoderCache,
        mut dy: Vec<f64>,
        blocks: &[Block],
    ) -> Vec<f64> {
        let df = apply_mask(&dy, &c.mask2);
        let dh = self.ffn.backward(p, g, &c.ffn, &df);
        add_into(&mut dy, &self.ln2.backward(p, g, &c.ln2, &dh));
        let da = apply_mask(&dy, &c.mask1);
        let (dh, _) = self.attn.backward(p, g, &c.attn, &da, blocks);
        add_into(&mut dy, &self.ln1.backward(p, g, &c.ln1, &dh));
        dy
    }
}

#[derive(Debug, Clone)]
struct Layout {
    freq_embed: Linear,
    group_pos: Tensor,
    freq_layers: Vec<EncoderLayer>,
    freq_ln: LayerNorm,
    time_embed: Linear,
    time_layers: Vec<EncoderLayer>,
    time_ln: LayerNorm,
    cross: Attention,
    fuse_ln: LayerNorm,
    fuse_ffn: FeedForward,
    out_ln: LayerNorm,
    head: Linear,
}

fn declare(cfg: &ModelConfig) -> (Layout, ParamBuilder) {
    let mut pb = ParamBuilder::new();
    let d = cfg.d_model;
    let freq_embed = Linear::declare(&mut pb, "freq.embed", cfg.group_size(), d);
    let group_pos = pb.add("freq.group_pos", &[cfg.n_freq_groups, d], Init::Normal(0.02));
    let freq_layers = (0..cfg.n_layers_freq)
        .map(|i| EncoderLayer::declare(&mut pb, &format!("freq.layer{i}"), cfg))
        .collect();
    let freq_ln = LayerNorm::declare(&mut pb, "freq.ln", d);
    let time_embed = Linear::declare(&mut pb, "time.embed", cfg.n_bins, d);
    let time_layers = (0..cfg.n_layers_time)
        .map(|i| EncoderLayer::declare(&mut pb, &format!("time.layer{i}"), cfg))
        .collect();
    let time_ln = LayerNorm::declare(&mut pb, "time.ln", d);
    let cross = Attention::declare(&mut pb, "fusion.cross", d, cfg.n_heads);
    let fuse_ln = LayerNorm::declare(&mut pb, "fusion.ln", d);
    let fuse_ffn = FeedForward::declare(&mut pb, "fusion.ffn", d, cfg.ffn_dim);
    let out_ln = LayerNorm::declare(&mut pb, "out.ln", d);
    let head = Linear::declare(&mut pb, "out.head", d, cfg.n_classes);
    let layout = Layout {
        freq_embed,
        group_pos,
        freq_layers,
        freq_ln,
        time_embed,
        time_layers,
        time_ln,
        cross,
        fuse_ln,
        fuse_ffn,
        out_ln,
        head,
    };
    (layout, pb)
}

/// Number of trainable values for a configuration.
pub fn parameter_count(cfg: &ModelConfig) -> usize {
    declare(cfg).1.len()
}

/// Sinusoidal position table, `len x d`.
pub fn sinusoidal_positions(len: usize, d: usize) -> Vec<f64> {
    let mut pe = vec![0.0; len * d];
    for t in 0..len {
        for i in 0..d {
            let rate = 10000f64.powf((2 * (i / 2)) as f64 / d as f64);
            let angle = t as f64 / rate;
            pe[t * d + i] = if i % 2 == 0 { angle.sin() } else { angle.cos() };
        }
    }
    pe
}

/// Values kept from a training forward pass for the backward pass.
pub struct Trace {
    input: Vec<f64>,
    freq: Vec<EncoderCache>,
    freq_ln: LnCache,
    time: Vec<EncoderCache>,
    time_ln: LnCache,
    cross: AttnCache,
    cross_mask: Option<Vec<f64>>,
    fuse_ln: LnCache,
    fuse_ffn: FfnCache,
    ffn_mask: Option<Vec<f64>>,
    out_ln: LnCache,
    head_in: Vec<f64>,
}

/// The dual-encoder, single-decoder student.
///
/// A frequency encoder attends across the bin groups of each frame, a
/// temporal encoder attends across frames, and each temporal token then
/// cross-attends to its own frame's group tokens before a linear head.
#[derive(Debug, Clone)]
pub struct Student2e1d {
    config: ModelConfig,
    pub params: Parameters,
    layout: Layout,
    positions: Vec<f64>,
    freq_blocks: Vec<Block>,
    time_blocks: Vec<Block>,
    cross_blocks: Vec<Block>,
}

impl Student2e1d {
    pub fn new(config: ModelConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        let (layout, pb) = declare(&config);
        let params = pb.build(&mut ChaCha8Rng::seed_from_u64(seed));
        Ok(Self::assemble(config, layout, params))
    }

    /// Rebuilds a student from named tensors, checking names and shapes.
    pub fn from_tensors(config: ModelConfig, tensors: &[(String, Vec<usize>, Vec<f64>)]) -> Result<Self> {
        config.validate()?;
        let (layout, pb) = declare(&config);
        let mut params = pb.build(&mut ChaCha8Rng::seed_from_u64(0));
        if tensors.len() != params.infos().len() {
            return Err(Error::format(
                "checkpoint",
                format!("expected {} tensors, found {}", params.infos().len(), tensors.len()),
            ));
        }
        let infos = params.infos().to_vec();
        for (info, (name, shape, data)) in infos.iter().zip(tensors) {
            if &info.name != name || &info.shape != shape || data.len() != info.tensor.len {
                return Err(Error::format(
                    "checkpoint",
                    format!("tensor {name} {shape:?} does not match expected {} {:?}", info.name, info.shape),
                ));
            }
            params.values[info.tensor.range()].copy_from_slice(data);
        }
        params.check_finite()?;
        Ok(Self::assemble(config, layout, params))
    }

    fn assemble(config: ModelConfig, layout: Layout, params: Parameters) -> Self {
        let (t, g) = (config.seq_len, config.n_freq_groups);
        let freq_blocks = (0..t)
            .map(|i| Block { q_start: i * g, q_len: g, k_start: i * g, k_len: g })
            .collect();
        let time_blocks = vec![Block { q_start: 0, q_len: t, k_start: 0, k_len: t }];
        let cross_blocks = (0..t)
            .map(|i| Block { q_start: i, q_len: 1, k_start: i * g, k_len: g })
            .collect();
        Self {
            positions: sinusoidal_positions(t, config.d_model),
            config,
            params,
            layout,
            freq_blocks,
            time_blocks,
            cross_blocks,
        }
    }

    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    pub fn parameter_count(&self) -> usize {
        self.params.len()
    }

    /// Inference forward pass on one `seq_len x n_bins` window.
    pub fn forward(&self, window: &[f64]) -> Result<Vec<f64>> {
        Ok(self.forward_train(window, None)?.0)
    }

    /// Forward pass keeping activations; dropout is active when `rng` is given.
    pub fn forward_train(
        &self,
        window: &[f64],
        mut rng: Option<&mut ChaCha8Rng>,
    ) -> Result<(Vec<f64>, Trace)> {
        let cfg = &self.config;
        let (t, f, g, d) = (cfg.seq_len, cfg.n_bins, cfg.n_freq_groups, cfg.d_model);
        if window.len() != t * f {
            return Err(Error::Shape {
                expected: format!("{t}x{f} window"),
                got: format!("{} values", window.len()),
            });
        }
        let p = &self.params.values;
        let lay = &self.layout;
        let rate = cfg.dropout;

        // Row-major frames are already contiguous groups of `F / G` bins.
        let mut hf = lay.freq_embed.forward(p, window, t * g);
        let pos = &p[lay.group_pos.range()];
        for (r, row) in hf.chunks_mut(d).enumerate() {
            add_into(row, &pos[(r % g) * d..(r % g + 1) * d]);
        }
        let mut freq = Vec::with_capacity(lay.freq_layers.len());
        for layer in &lay.freq_layers {
            let (h, c) = layer.forward(p, hf, &self.freq_blocks, rate, &mut rng);
            hf = h;
            freq.push(c);
        }
        let (hf, freq_ln) = lay.freq_ln.forward(p, &hf);

        let mut ht = lay.time_embed.forward(p, window, t);
        add_into(&mut ht, &self.positions);
        let mut time = Vec::with_capacity(lay.time_layers.len());
        for layer in &lay.time_layers {
            let (h, c) = layer.forward(p, ht, &self.time_blocks, rate, &mut rng);
            ht = h;
            time.push(c);
        }
        let (ht, time_ln) = lay.time_ln.forward(p, &ht);

        let (mut z, cross) = lay.cross.forward(p, ht.clone(), Some(hf), &self.cross_blocks);
        let cross_mask = dropout(&mut z, rate, rng.as_deref_mut());
        add_into(&mut z, &ht);
        let (h, fuse_ln) = lay.fuse_ln.forward(p, &z);
        let (mut ff, fuse_ffn) = lay.fuse_ffn.forward(p, h);
        let ffn_mask = dropout(&mut ff, rate, rng.as_deref_mut());
        add_into(&mut z, &ff);
        let (head_in, out_ln) = lay.out_ln.forward(p, &z);
        let logits = lay.head.forward(p, &head_in, t);
        let trace = Trace {
            input: window.to_vec(),
            freq,
            freq_ln,
            time,
            time_ln,
            cross,
            cross_mask,
            fuse_ln,
            fuse_ffn,
            ffn_mask,
            out_ln,
            head_in,
        };
        Ok((logits, trace))
    }

    /// Accumulates parameter gradients of a loss with gradient `dlogits`.
    pub fn backward(&mut self, trace: &Trace, dlogits: &[f64]) -> Result<()> {
        let cfg = &self.config;
        let (t, g, d) = (cfg.seq_len, cfg.n_freq_groups, cfg.d_model);
        if dlogits.len() != t * cfg.n_classes {
            return Err(Error::Shape {
                expected: format!("{t}x{} logit gradient", cfg.n_classes),
                got: format!("{} values", dlogits.len()),
            });
        }
        let lay = &self.layout;
        let p = &self.params.values;
        let gr = &mut self.params.grads;

        let dy = lay.head.backward(p, gr, &trace.head_in, dlogits, t, true);
        let mut dz = lay.out_ln.backward(p, gr, &trace.out_ln, &dy);
        let dff = apply_mask(&dz, &trace.ffn_mask);
        let dh = lay.fuse_ffn.backward(p, gr, &trace.fuse_ffn, &dff);
        add_into(&mut dz, &lay.fuse_ln.backward(p, gr, &trace.fuse_ln, &dh));
        let dcross = apply_mask(&dz, &trace.cross_mask);
        let (dq, dhf) = lay.cross.backward(p, gr, &trace.cross, &dcross, &self.cross_blocks);
        let mut dht = dz;
        add_into(&mut dht, &dq);

        let mut dht = lay.time_ln.backward(p, gr, &trace.time_ln, &dht);
        for (layer, c) in lay.time_layers.iter().zip(&trace.time).rev() {
            dht = layer.backward(p, gr, c, dht, &self.time_blocks);
        }
        lay.time_embed.backward(p, gr, &trace.input, &dht, t, false);

        let mut dhf = lay.freq_ln.backward(p, gr, &trace.freq_ln, &dhf);
        for (layer, c) in lay.freq_layers.iter().zip(&trace.freq).rev() {
            dhf = layer.backward(p, gr, c, dhf, &self.freq_blocks);
        }
        {
            let gpos = &mut gr[lay.group_pos.range()];
            for (r, row) in dhf.chunks(d).enumerate() {
                add_into(&mut gpos[(r % g) * d..(r % g + 1) * d], row);
            }
        }
        lay.freq_embed.backward(p, gr, &trace.input, &dhf, t * g, false);
        Ok(())
    }
}
