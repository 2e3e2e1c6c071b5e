//! Layer primitives with explicit reverse-mode gradients.
//!
//! Activations are row-major `rows x dim` buffers. Every forward returns the
//! values its backward needs; backward accumulates parameter gradients into
//! the flat gradient buffer and returns the input gradient.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::params::{Init, ParamBuilder, Tensor};

pub const LN_EPS: f64 = 1e-5;

/// `y = x w + b` with `w` stored `n_in x n_out`.
#[derive(Debug, Clone, Copy)]
pub struct Linear {
    pub w: Tensor,
    pub b: Tensor,
    pub n_in: usize,
    pub n_out: usize,
}

impl Linear {
    pub(crate) fn declare(pb: &mut ParamBuilder, name: &str, n_in: usize, n_out: usize) -> Self {
        let w = pb.add(
            format!("{name}.weight"),
            &[n_in, n_out],
            Init::Xavier { fan_in: n_in, fan_out: n_out },
        );
        let b = pb.add(format!("{name}.bias"), &[n_out], Init::Constant(0.0));
        Self { w, b, n_in, n_out }
    }

    pub fn forward(&self, p: &[f64], x: &[f64], rows: usize) -> Vec<f64> {
        debug_assert_eq!(x.len(), rows * self.n_in);
        let (w, b) = (&p[self.w.range()], &p[self.b.range()]);
        let mut y = Vec::with_capacity(rows * self.n_out);
        for _ in 0..rows {
            y.extend_from_slice(b);
        }
        for i in 0..rows {
            let yr = &mut y[i * self.n_out..(i + 1) * self.n_out];
            for (k, &xk) in x[i * self.n_in..(i + 1) * self.n_in].iter().enumerate() {
                if xk == 0.0 {
                    continue;
                }
                let wr = &w[k * self.n_out..(k + 1) * self.n_out];
                for (yj, wj) in yr.iter_mut().zip(wr) {
                    *yj += xk * wj;
                }
            }
        }
        y
    }

    /// Accumulates weight and bias gradients; returns `dx` when asked.
    pub fn backward(
        &self,
        p: &[f64],
        g: &mut [f64],
        x: &[f64],
        dy: &[f64],
        rows: usize,
        want_dx: bool,
    ) -> Vec<f64> {
        let (n_in, n_out) = (self.n_in, self.n_out);
        {
            let gb = &mut g[self.b.range()];
            for i in 0..rows {
                for (gj, d) in gb.iter_mut().zip(&dy[i * n_out..(i + 1) * n_out]) {
                    *gj += d;
                }
            }
        }
        {
            let gw = &mut g[self.w.range()];
            for i in 0..rows {
                let dyr = &dy[i * n_out..(i + 1) * n_out];
                for (k, &xk) in x[i * n_in..(i + 1) * n_in].iter().enumerate() {
                    if xk == 0.0 {
                        continue;
                    }
                    for (gj, d) in gw[k * n_out..(k + 1) * n_out].iter_mut().zip(dyr) {
                        *gj += xk * d;
                    }
                }
            }
        }
        if !want_dx {
            return Vec::new();
        }
        let w = &p[self.w.range()];
        let mut dx = vec![0.0; rows * n_in];
        for i in 0..rows {
            let dyr = &dy[i * n_out..(i + 1) * n_out];
            for k in 0..n_in {
                dx[i * n_in + k] = dot(dyr, &w[k * n_out..(k + 1) * n_out]);
            }
        }
        dx
    }
}

#[derive(Debug, Clone, Copy)]
pub struct LayerNorm {
    pub gain: Tensor,
    pub bias: Tensor,
    pub dim: usize,
}

pub struct LnCache {
    xhat: Vec<f64>,
    rstd: Vec<f64>,
}

impl LayerNorm {
    pub(crate) fn declare(pb: &mut ParamBuilder, name: &str, dim: usize) -> Self {
        let gain = pb.add(format!("{name}.gain"), &[dim], Init::Constant(1.0));
        let bias = pb.add(format!("{name}.bias"), &[dim], Init::Constant(0.0));
        Self { gain, bias, dim }
    }

    pub fn forward(&self, p: &[f64], x: &[f64]) -> (Vec<f64>, LnCache) {
        let d = self.dim;
        let rows = x.len() / d;
        let (gain, bias) = (&p[self.gain.range()], &p[self.bias.range()]);
        let mut y = vec![0.0; x.len()];
        let mut xhat = vec![0.0; x.len()];
        let mut rstd = vec![0.0; rows];
        for i in 0..rows {
            let xr = &x[i * d..(i + 1) * d];
            let mean = xr.iter().sum::<f64>() / d as f64;
            let var = xr.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / d as f64;
            let r = 1.0 / (var + LN_EPS).sqrt();
            rstd[i] = r;
            for j in 0..d {
                let h = (xr[j] - mean) * r;
                xhat[i * d + j] = h;
                y[i * d + j] = h * gain[j] + bias[j];
            }
        }
        (y, LnCache { xhat, rstd })
    }

    pub fn backward(&self, p: &[f64], g: &mut [f64], cache: &LnCache, dy: &[f64]) -> Vec<f64> {
        let d = self.dim;
        let rows = dy.len() / d;
        let gain = &p[self.gain.range()];
        let mut dx = vec![0.0; dy.len()];
        let mut dgain = vec![0.0; d];
        let mut dbias = vec![0.0; d];
        let mut dxhat = vec![0.0; d];
        for i in 0..rows {
            let xh = &cache.xhat[i * d..(i + 1) * d];
            let dyr = &dy[i * d..(i + 1) * d];
            for j in 0..d {
                dgain[j] += dyr[j] * xh[j];
                dbias[j] += dyr[j];
                dxhat[j] = dyr[j] * gain[j];
            }
            let m1 = dxhat.iter().sum::<f64>() / d as f64;
            let m2 = dot(&dxhat, xh) / d as f64;
            for j in 0..d {
                dx[i * d + j] = cache.rstd[i] * (dxhat[j] - m1 - xh[j] * m2);
            }
        }
        add_into(&mut g[self.gain.range()], &dgain);
        add_into(&mut g[self.bias.range()], &dbias);
        dx
    }
}

const GELU_C: f64 = 0.797_884_560_802_865_4; // sqrt(2 / pi)
const GELU_A: f64 = 0.044_715;

pub fn gelu(x: f64) -> f64 {
    0.5 * x * (1.0 + (GELU_C * (x + GELU_A * x * x * x)).tanh())
}

pub fn gelu_grad(x: f64) -> f64 {
    let t = (GELU_C * (x + GELU_A * x * x * x)).tanh();
    0.5 * (1.0 + t) + 0.5 * x * (1.0 - t * t) * GELU_C * (1.0 + 3.0 * GELU_A * x * x)
}

/// Position-wise `Linear -> GELU -> Linear`.
#[derive(Debug, Clone, Copy)]
pub struct FeedForward {
    pub up: Linear,
    pub down: Linear,
}

pub struct FfnCache {
    x: Vec<f64>,
    h: Vec<f64>,
    a: Vec<f64>,
}

impl FeedForward {
    pub(crate) fn declare(pb: &mut ParamBuilder, name: &str, d: usize, hidden: usize) -> Self {
        Self {
            up: Linear::declare(pb, &format!("{name}.up"), d, hidden),
            down: Linear::declare(pb, &format!("{name}.down"), hidden, d),
        }
    }

    pub fn forward(&self, p: &[f64], x: Vec<f64>) -> (Vec<f64>, FfnCache) {
        let rows = x.len() / self.up.n_in;
        let h = self.up.forward(p, &x, rows);
        let a: Vec<f64> = h.iter().map(|&v| gelu(v)).collect();
        let y = self.down.forward(p, &a, rows);
        (y, FfnCache { x, h, a })
    }

    pub fn backward(&self, p: &[f64], g: &mut [f64], c: &FfnCache, dy: &[f64]) -> Vec<f64> {
        let rows = dy.len() / self.down.n_out;
        let mut da = self.down.backward(p, g, &c.a, dy, rows, true);
        for (d, &h) in da.iter_mut().zip(&c.h) {
            *d *= gelu_grad(h);
        }
        self.up.backward(p, g, &c.x, &da, rows, true)
    }
}

/// Queries `q_start..q_start+q_len` attend to keys `k_start..k_start+k_len`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Block {
    pub q_start: usize,
    pub q_len: usize,
    pub k_start: usize,
    pub k_len: usize,
}

/// Multi-head scaled dot-product attention over independent blocks.
#[derive(Debug, Clone, Copy)]
pub struct Attention {
    pub q: Linear,
    pub k: Linear,
    pub v: Linear,
    pub o: Linear,
    pub n_heads: usize,
}

pub struct AttnCache {
    xq: Vec<f64>,
    xkv: Option<Vec<f64>>,
    q: Vec<f64>,
    k: Vec<f64>,
    v: Vec<f64>,
    probs: Vec<f64>,
    ctx: Vec<f64>,
}

impl Attention {
    pub(crate) fn declare(pb: &mut ParamBuilder, name: &str, d: usize, n_heads: usize) -> Self {
        Self {
            q: Linear::declare(pb, &format!("{name}.query"), d, d),
            k: Linear::declare(pb, &format!("{name}.key"), d, d),
            v: Linear::declare(pb, &format!("{name}.value"), d, d),
            o: Linear::declare(pb, &format!("{name}.out"), d, d),
            n_heads,
        }
    }

    /// Self-attention when `xkv` is `None`.
    pub fn forward(
        &self,
        p: &[f64],
        xq: Vec<f64>,
        xkv: Option<Vec<f64>>,
        blocks: &[Block],
    ) -> (Vec<f64>, AttnCache) {
        let d = self.q.n_in;
        let nh = self.n_heads;
        let dh = d / nh;
        let scale = 1.0 / (dh as f64).sqrt();
        let nq = xq.len() / d;
        let kv_src = xkv.as_deref().unwrap_or(&xq);
        let nk = kv_src.len() / d;
        let q = self.q.forward(p, &xq, nq);
        let k = self.k.forward(p, kv_src, nk);
        let v = self.v.forward(p, kv_src, nk);

        let total: usize = blocks.iter().map(|b| b.q_len * b.k_len).sum::<usize>() * nh;
        let mut probs = vec![0.0; total];
        let mut ctx = vec![0.0; nq * d];
        let mut off = 0;
        for b in blocks {
            for h in 0..nh {
                let c0 = h * dh;
                for i in 0..b.q_len {
                    let qi = (b.q_start + i) * d + c0;
                    let row = &mut probs[off + i * b.k_len..off + (i + 1) * b.k_len];
                    for (j, r) in row.iter_mut().enumerate() {
                        let kj = (b.k_start + j) * d + c0;
                        *r = dot(&q[qi..qi + dh], &k[kj..kj + dh]) * scale;
                    }
                    softmax_in_place(row);
                    let out = &mut ctx[qi..qi + dh];
                    for (j, &pij) in row.iter().enumerate() {
                        let vj = (b.k_start + j) * d + c0;
                        for (o, vv) in out.iter_mut().zip(&v[vj..vj + dh]) {
                            *o += pij * vv;
                        }
                    }
                }
                off += b.q_len * b.k_len;
            }
        }
        let y = self.o.forward(p, &ctx, nq);
        (y, AttnCache { xq, xkv, q, k, v, probs, ctx })
    }

    /// Returns `(dxq, dxkv)`; for self-attention both paths are summed into
    /// `dxq` and `dxkv` is empty.
    pub fn backward(
        &self,
        p: &[f64],
        g: &mut [f64],
        c: &AttnCache,
        dy: &[f64],
        blocks: &[Block],
    ) -> (Vec<f64>, Vec<f64>) {
        let d = self.q.n_in;
        let nh = self.n_heads;
        let dh = d / nh;
        let scale = 1.0 / (dh as f64).sqrt();
        let nq = c.xq.len() / d;
        let kv_src = c.xkv.as_deref().unwrap_or(&c.xq);
        let nk = kv_src.len() / d;

        let dctx = self.o.backward(p, g, &c.ctx, dy, nq, true);
        let mut dq = vec![0.0; nq * d];
        let mut dk = vec![0.0; nk * d];
        let mut dv = vec![0.0; nk * d];
        let mut off = 0;
        let mut ds = Vec::new();
        for b in blocks {
            for h in 0..nh {
                let c0 = h * dh;
                for i in 0..b.q_len {
                    let qi = (b.q_start + i) * d + c0;
                    let row = &c.probs[off + i * b.k_len..off + (i + 1) * b.k_len];
                    let dctx_i = &dctx[qi..qi + dh];
                    ds.clear();
                    for (j, &pij) in row.iter().enumerate() {
                        let vj = (b.k_start + j) * d + c0;
                        ds.push(dot(dctx_i, &c.v[vj..vj + dh]));
                        for (gv, dc) in dv[vj..vj + dh].iter_mut().zip(dctx_i) {
                            *gv += pij * dc;
                        }
                    }
                    let inner = dot(&ds, row);
                    for (s, &pij) in ds.iter_mut().zip(row) {
                        *s = pij * (*s - inner) * scale;
                    }
                    for (j, &s) in ds.iter().enumerate() {
                        let kj = (b.k_start + j) * d + c0;
                        for t in 0..dh {
                            dq[qi + t] += s * c.k[kj + t];
                            dk[kj + t] += s * c.q[qi + t];
                        }
                    }
                }
                off += b.q_len * b.k_len;
            }
        }
        let mut dxq = self.q.backward(p, g, &c.xq, &dq, nq, true);
        let mut dxkv = self.k.backward(p, g, kv_src, &dk, nk, true);
        add_into(&mut dxkv, &self.v.backward(p, g, kv_src, &dv, nk, true));
        if c.xkv.is_none() {
            add_into(&mut dxq, &dxkv);
            dxkv = Vec::new();
        }
        (dxq, dxkv)
    }
}

/// Inverted dropout. Returns the scaled keep-mask, or `None` when inactive.
pub fn dropout(x: &mut [f64], rate: f64, rng: Option<&mut ChaCha8Rng>) -> Option<Vec<f64>> {
    let rng = rng?;
    if rate <= 0.0 {
        return None;
    }
    let keep = 1.0 / (1.0 - rate);
    let mask: Vec<f64> = x
        .iter()
        .map(|_| if rng.gen::<f64>() < rate { 0.0 } else { keep })
        .collect();
    for (v, m) in x.iter_mut().zip(&mask) {
        *v *= m;
    }
    Some(mask)
}

pub fn apply_mask(dy: &[f64], mask: &Option<Vec<f64>>) -> Vec<f64> {
    match mask {
        Some(m) => dy.iter().zip(m).map(|(a, b)| a * b).collect(),
        None => dy.to_vec(),
    }
}

pub fn softmax_in_place(row: &mut [f64]) {
    let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for v in row.iter_mut() {
        *v = (*v - max).exp();
        sum += *v;
    }
    for v in row.iter_mut() {
        *v /= sum;
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn add_into(acc: &mut [f64], x: &[f64]) {
    for (a, b) in acc.iter_mut().zip(x) {
        *a += b;
    }
}
