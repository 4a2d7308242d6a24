use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::numeric::{xavier_uniform, Tensor};
use crate::rng::Rng;

pub const BN_EPS: f64 = 1e-5;
pub const BN_MOMENTUM: f64 = 0.1;

/// Widths of the two depth representations. The embedding is their
/// concatenation, `depth1 + depth2` wide.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EncoderDims {
    pub input: usize,
    pub depth1: usize,
    pub depth2: usize,
}

impl EncoderDims {
    pub fn new(input: usize, depth1: usize, depth2: usize) -> Result<Self> {
        if input == 0 || depth1 == 0 || depth2 == 0 {
            return Err(Error::InvalidConfig(
                "encoder dimensions must be positive".into(),
            ));
        }
        Ok(Self {
            input,
            depth1,
            depth2,
        })
    }

    pub fn embedding(&self) -> usize {
        self.depth1 + self.depth2
    }
}

/// Learned scale/shift plus running statistics for inference.
#[derive(Debug, Clone, PartialEq)]
pub struct BatchNorm {
    pub gamma: Tensor,
    pub beta: Tensor,
    pub running_mean: Vec<f64>,
    pub running_var: Vec<f64>,
}

impl BatchNorm {
    pub fn new(width: usize) -> Self {
        Self {
            gamma: Tensor::filled(1, width, 1.0),
            beta: Tensor::zeros(1, width),
            running_mean: alloc::vec![0.0; width],
            running_var: alloc::vec![1.0; width],
        }
    }

    pub fn width(&self) -> usize {
        self.gamma.cols()
    }

    /// Folds one batch's statistics (biased variance over `n` rows) into
    /// the running estimates; the variance is stored unbiased.
    pub fn update_running(&mut self, mean: &[f64], var: &[f64], n: usize) {
        let unbias = if n > 1 {
            n as f64 / (n - 1) as f64
        } else {
            1.0
        };
        for (r, m) in self.running_mean.iter_mut().zip(mean) {
            *r = (1.0 - BN_MOMENTUM) * *r + BN_MOMENTUM * m;
        }
        for (r, v) in self.running_var.iter_mut().zip(var) {
            *r = (1.0 - BN_MOMENTUM) * *r + BN_MOMENTUM * v * unbias;
        }
    }
}

/// One `dropout(tanh(batchnorm(W x)))` block. `weight` is `out × in`.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub weight: Tensor,
    pub norm: BatchNorm,
}

impl Layer {
    pub fn xavier(fan_in: usize, fan_out: usize, rng: &mut Rng) -> Self {
        Self {
            weight: xavier_uniform(fan_in, fan_out, rng),
            norm: BatchNorm::new(fan_out),
        }
    }

    pub fn in_dim(&self) -> usize {
        self.weight.cols()
    }

    pub fn out_dim(&self) -> usize {
        self.weight.rows()
    }
}

/// Index of each block inside [`EncoderParams::layers`].
pub const AGG1: usize = 0;
pub const OUT1: usize = 1;
pub const AGG2: usize = 2;
pub const OUT2: usize = 3;
pub const LAYER_NAMES: [&str; 4] = ["agg1", "out1", "agg2", "out2"];

/// Weights and normalizer state of one encoder: an aggregator block and an
/// outer block at each of the two depths.
#[derive(Debug, Clone, PartialEq)]
pub struct EncoderParams {
    pub dims: EncoderDims,
    pub dropout: f64,
    pub layers: [Layer; 4],
}

impl EncoderParams {
    pub fn xavier(dims: EncoderDims, dropout: f64, rng: &mut Rng) -> Result<Self> {
        check_dropout(dropout)?;
        Ok(Self {
            dims,
            dropout,
            layers: [
                Layer::xavier(dims.input, dims.depth1, rng),
                Layer::xavier(dims.depth1, dims.depth1, rng),
                Layer::xavier(dims.depth1, dims.depth2, rng),
                Layer::xavier(dims.depth2, dims.depth2, rng),
            ],
        })
    }

    pub fn validate(&self) -> Result<()> {
        check_dropout(self.dropout)?;
        let d = self.dims;
        let expected = [
            (d.depth1, d.input),
            (d.depth1, d.depth1),
            (d.depth2, d.depth1),
            (d.depth2, d.depth2),
        ];
        for (i, (layer, shape)) in self.layers.iter().zip(expected).enumerate() {
            let n = layer.norm.width();
            if layer.weight.shape() != shape
                || n != shape.0
                || layer.norm.beta.cols() != n
                || layer.norm.running_mean.len() != n
                || layer.norm.running_var.len() != n
            {
                return Err(Error::ShapeMismatch(alloc::format!(
                    "layer {} does not match dims {d:?}",
                    LAYER_NAMES[i]
                )));
            }
            if !layer.weight.is_finite() {
                return Err(Error::NumericFault(alloc::format!(
                    "non-finite weight in layer {}",
                    LAYER_NAMES[i]
                )));
            }
        }
        Ok(())
    }

    /// Every tensor keyed by `<layer>.<field>`, for checkpointing.
    pub fn named_tensors(&self) -> Vec<(String, Tensor)> {
        let mut out = Vec::new();
        for (name, layer) in LAYER_NAMES.iter().zip(&self.layers) {
            let n = &layer.norm;
            let width = n.width();
            out.push((alloc::format!("{name}.weight"), layer.weight.clone()));
            out.push((alloc::format!("{name}.gamma"), n.gamma.clone()));
            out.push((alloc::format!("{name}.beta"), n.beta.clone()));
            out.push((
                alloc::format!("{name}.running_mean"),
                Tensor::from_vec(1, width, n.running_mean.clone()).expect("width matches"),
            ));
            out.push((
                alloc::format!("{name}.running_var"),
                Tensor::from_vec(1, width, n.running_var.clone()).expect("width matches"),
            ));
        }
        out
    }

    /// Inverse of [`Self::named_tensors`].
    pub fn from_named(
        dims: EncoderDims,
        dropout: f64,
        tensors: &[(String, Tensor)],
    ) -> Result<Self> {
        let find = |key: &str| -> Result<Tensor> {
            tensors
                .iter()
                .find(|(k, _)| k == key)
                .map(|(_, t)| t.clone())
                .ok_or_else(|| Error::InvalidArgument(alloc::format!("missing tensor {key}")))
        };
        let layer = |name: &str| -> Result<Layer> {
            Ok(Layer {
                weight: find(&alloc::format!("{name}.weight"))?,
                norm: BatchNorm {
                    gamma: find(&alloc::format!("{name}.gamma"))?,
                    beta: find(&alloc::format!("{name}.beta"))?,
                    running_mean: find(&alloc::format!("{name}.running_mean"))?.into_vec(),
                    running_var: find(&alloc::format!("{name}.running_var"))?.into_vec(),
                },
            })
        };
        let params = Self {
            dims,
            dropout,
            layers: [
                layer("agg1")?,
                layer("out1")?,
                layer("agg2")?,
                layer("out2")?,
            ],
        };
        params.validate()?;
        Ok(params)
    }
}

fn check_dropout(p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::InvalidConfig(alloc::format!(
            "dropout rate {p} outside [0, 1]"
        )))
    }
}

/// Target and context encoders; embeddings from the two are dotted in the
/// losses. Downstream evaluation uses the target encoder.
#[derive(Debug, Clone, PartialEq)]
pub struct DualEncoder {
    pub target: EncoderParams,
    pub context: EncoderParams,
}

impl DualEncoder {
    pub fn xavier(dims: EncoderDims, dropout: f64, rng: &mut Rng) -> Result<Self> {
        Ok(Self {
            target: EncoderParams::xavier(dims, dropout, rng)?,
            context: EncoderParams::xavier(dims, dropout, rng)?,
        })
    }
}
