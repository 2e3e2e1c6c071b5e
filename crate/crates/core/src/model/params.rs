use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};

/// Location of one tensor inside the flat parameter buffer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Tensor {
    pub offset: usize,
    pub len: usize,
}

impl Tensor {
    pub fn range(self) -> std::ops::Range<usize> {
        self.offset..self.offset + self.len
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TensorInfo {
    pub name: String,
    pub shape: Vec<usize>,
    pub tensor: Tensor,
}

/// How a tensor is initialized.
#[derive(Debug, Clone, Copy)]
pub(crate) enum Init {
    Xavier { fan_in: usize, fan_out: usize },
    Normal(f64),
    Constant(f64),
}

/// Flat trainable parameters with one gradient slot per value.
#[derive(Debug, Clone, PartialEq)]
pub struct Parameters {
    pub values: Vec<f64>,
    pub grads: Vec<f64>,
    infos: Vec<TensorInfo>,
}

impl Parameters {
    pub fn infos(&self) -> &[TensorInfo] {
        &self.infos
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, t: Tensor) -> &[f64] {
        &self.values[t.range()]
    }

    pub fn zero_grads(&mut self) {
        self.grads.iter_mut().for_each(|g| *g = 0.0);
    }

    /// Rounds every value to the nearest `f32`, so checkpoints are lossless.
    pub fn round_to_f32(&mut self) {
        for v in &mut self.values {
            *v = *v as f32 as f64;
        }
    }

    pub fn check_finite(&self) -> Result<()> {
        for info in &self.infos {
            if self.values[info.tensor.range()].iter().any(|v| !v.is_finite()) {
                return Err(Error::invalid(format!("parameter {} is not finite", info.name)));
            }
        }
        Ok(())
    }

    pub fn named(&self) -> impl Iterator<Item = (&TensorInfo, &[f64])> {
        self.infos.iter().map(|i| (i, &self.values[i.tensor.range()]))
    }
}

/// Collects tensor declarations and then allocates and initializes them.
pub(crate) struct ParamBuilder {
    infos: Vec<TensorInfo>,
    inits: Vec<Init>,
    len: usize,
}

impl ParamBuilder {
    pub fn new() -> Self {
        Self { infos: Vec::new(), inits: Vec::new(), len: 0 }
    }

    pub fn add(&mut self, name: impl Into<String>, shape: &[usize], init: Init) -> Tensor {
        let len = shape.iter().product();
        let tensor = Tensor { offset: self.len, len };
        self.len += len;
        self.infos.push(TensorInfo { name: name.into(), shape: shape.to_vec(), tensor });
        self.inits.push(init);
        tensor
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn build(self, rng: &mut ChaCha8Rng) -> Parameters {
        let mut values = vec![0.0; self.len];
        for (info, init) in self.infos.iter().zip(&self.inits) {
            let slot = &mut values[info.tensor.range()];
            match *init {
                Init::Xavier { fan_in, fan_out } => {
                    let a = (6.0 / (fan_in + fan_out) as f64).sqrt();
                    slot.iter_mut().for_each(|v| *v = rng.gen_range(-a..a));
                }
                Init::Normal(std) => {
                    let n = Normal::new(0.0, std).expect("valid std");
                    slot.iter_mut().for_each(|v| *v = n.sample(rng));
                }
                Init::Constant(c) => slot.iter_mut().for_each(|v| *v = c),
            }
        }
        let mut p = Parameters { grads: vec![0.0; values.len()], values, infos: self.infos };
        p.round_to_f32();
        p
    }
}
