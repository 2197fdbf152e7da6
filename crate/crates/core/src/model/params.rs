//! Model parameters: the token-label projection, the label-transfer
//! embedding, and the biaffine table filler with its head/tail
//! feed-forward maps.

use serde::{Deserialize, Serialize};

use crate::error::NumericError;

use super::linalg::Mat;
use super::types::NUM_LABELS;

/// Width configuration. Defaults follow the shipped configuration:
/// 1024-wide token features, 256-wide biaffine and label embeddings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelDims {
    /// Token feature width (encoder hidden size).
    pub h_rb: usize,
    /// Biaffine feature width.
    pub h_bi: usize,
    /// Label embedding width.
    pub h_le: usize,
    /// Hidden width of the head/tail feed-forward maps.
    pub h_hidden: usize,
    /// When false, the table filler reads the token features directly
    /// and the label-transfer path is disabled.
    pub causal: bool,
}

impl Default for ModelDims {
    fn default() -> Self {
        ModelDims {
            h_rb: 1024,
            h_bi: 256,
            h_le: 256,
            h_hidden: 256,
            causal: true,
        }
    }
}

impl ModelDims {
    /// Width of the table-filler input: features plus the transferred
    /// label embedding when causal modelling is on.
    pub fn h_gc(&self) -> usize {
        if self.causal {
            self.h_rb + self.h_le
        } else {
            self.h_rb
        }
    }
}

/// Single-hidden-layer feed-forward map with tanh nonlinearity:
/// `out = w2 · tanh(w1 · x + b1) + b2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpParams {
    pub w1: Mat,
    pub b1: Vec<f64>,
    pub w2: Mat,
    pub b2: Vec<f64>,
}

/// Biaffine table-filler parameters:
/// `Biaff(x, y) = xᵀ U1 y + U2 (x ⊕ y) + b`, per output class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiaffineParams {
    pub head: MlpParams,
    pub tail: MlpParams,
    /// One h_bi x h_bi bilinear form per class.
    pub u1: [Mat; 2],
    /// One 2*h_bi linear term per class.
    pub u2: [Vec<f64>; 2],
    pub b: [f64; 2],
}

/// Label-transfer parameters: the label embedding and the
/// gumbel-softmax temperature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelTransferParams {
    /// NUM_LABELS x h_le embedding.
    pub w_le: Mat,
    pub tau: f64,
}

impl LabelTransferParams {
    pub fn new(w_le: Mat, tau: f64) -> Result<Self, NumericError> {
        if tau <= 0.0 {
            return Err(NumericError::NonPositiveTemperature(tau));
        }
        Ok(LabelTransferParams { w_le, tau })
    }
}

/// Linear projection from token features to label logits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NeProjection {
    /// NUM_LABELS x h_rb.
    pub w: Mat,
    pub b: Vec<f64>,
}

/// The full structure-scoring model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructureModel {
    pub dims: ModelDims,
    pub ne: NeProjection,
    pub transfer: LabelTransferParams,
    pub biaffine: BiaffineParams,
}

/// Deterministic xorshift-based stream for reproducible initialization.
pub(crate) struct InitRng(u64);

impl InitRng {
    pub(crate) fn new(seed: u64) -> Self {
        // splitmix64 scramble so nearby seeds diverge
        let mut z = seed.wrapping_add(0x9E3779B97F4A7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
        InitRng(z ^ (z >> 31) | 1)
    }

    pub(crate) fn next_u64(&mut self) -> u64 {
        let mut x = self.0;
        x ^= x << 13;
        x ^= x >> 7;
        x ^= x << 17;
        self.0 = x;
        x
    }

    /// Uniform in [0, 1).
    pub(crate) fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    /// Uniform in (-scale, scale).
    fn uniform(&mut self, scale: f64) -> f64 {
        (self.next_f64() * 2.0 - 1.0) * scale
    }

    fn mat(&mut self, rows: usize, cols: usize) -> Mat {
        let scale = 1.0 / (cols.max(1) as f64).sqrt();
        let data = (0..rows * cols).map(|_| self.uniform(scale)).collect();
        Mat::from_vec(rows, cols, data)
    }
}

impl StructureModel {
    /// Seeded uniform initialization scaled by fan-in; biases start at
    /// zero.
    pub fn init(dims: ModelDims, tau: f64, seed: u64) -> Result<Self, NumericError> {
        if tau <= 0.0 {
            return Err(NumericError::NonPositiveTemperature(tau));
        }
        let mut rng = InitRng::new(seed);
        let h_gc = dims.h_gc();
        let mlp = |rng: &mut InitRng| MlpParams {
            w1: rng.mat(dims.h_hidden, h_gc),
            b1: vec![0.0; dims.h_hidden],
            w2: rng.mat(dims.h_bi, dims.h_hidden),
            b2: vec![0.0; dims.h_bi],
        };
        Ok(StructureModel {
            dims,
            ne: NeProjection {
                w: rng.mat(NUM_LABELS, dims.h_rb),
                b: vec![0.0; NUM_LABELS],
            },
            transfer: LabelTransferParams {
                w_le: rng.mat(NUM_LABELS, dims.h_le),
                tau,
            },
            biaffine: BiaffineParams {
                head: mlp(&mut rng),
                tail: mlp(&mut rng),
                u1: [rng.mat(dims.h_bi, dims.h_bi), rng.mat(dims.h_bi, dims.h_bi)],
                u2: [
                    (0..2 * dims.h_bi).map(|_| rng.uniform(0.1)).collect(),
                    (0..2 * dims.h_bi).map(|_| rng.uniform(0.1)).collect(),
                ],
                b: [0.0, 0.0],
            },
        })
    }

    /// Named views of each parameter tensor, in flattening order.
    pub fn param_blocks(&self) -> Vec<(&'static str, &[f64])> {
        vec![
            ("ne.w", &self.ne.w.data),
            ("ne.b", &self.ne.b),
            ("transfer.w_le", &self.transfer.w_le.data),
            ("biaffine.head.w1", &self.biaffine.head.w1.data),
            ("biaffine.head.b1", &self.biaffine.head.b1),
            ("biaffine.head.w2", &self.biaffine.head.w2.data),
            ("biaffine.head.b2", &self.biaffine.head.b2),
            ("biaffine.tail.w1", &self.biaffine.tail.w1.data),
            ("biaffine.tail.b1", &self.biaffine.tail.b1),
            ("biaffine.tail.w2", &self.biaffine.tail.w2.data),
            ("biaffine.tail.b2", &self.biaffine.tail.b2),
            ("biaffine.u1.0", &self.biaffine.u1[0].data),
            ("biaffine.u1.1", &self.biaffine.u1[1].data),
            ("biaffine.u2.0", &self.biaffine.u2[0]),
            ("biaffine.u2.1", &self.biaffine.u2[1]),
            ("biaffine.b", &self.biaffine.b),
        ]
    }

    fn param_blocks_mut(&mut self) -> Vec<&mut [f64]> {
        let [u1a, u1b] = &mut self.biaffine.u1;
        let [u2a, u2b] = &mut self.biaffine.u2;
        vec![
            &mut self.ne.w.data,
            &mut self.ne.b,
            &mut self.transfer.w_le.data,
            &mut self.biaffine.head.w1.data,
            &mut self.biaffine.head.b1,
            &mut self.biaffine.head.w2.data,
            &mut self.biaffine.head.b2,
            &mut self.biaffine.tail.w1.data,
            &mut self.biaffine.tail.b1,
            &mut self.biaffine.tail.w2.data,
            &mut self.biaffine.tail.b2,
            &mut u1a.data,
            &mut u1b.data,
            u2a,
            u2b,
            &mut self.biaffine.b,
        ]
    }

    /// All parameters as one flat vector, block order fixed.
    pub fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for (_, block) in self.param_blocks() {
            out.extend_from_slice(block);
        }
        out
    }

    /// Writes a flat vector (as produced by [`flatten`]) back into the
    /// parameters.
    pub fn assign(&mut self, flat: &[f64]) {
        let mut offset = 0;
        for block in self.param_blocks_mut() {
            block.copy_from_slice(&flat[offset..offset + block.len()]);
            offset += block.len();
        }
        assert_eq!(offset, flat.len(), "flat parameter length mismatch");
    }

    pub fn num_params(&self) -> usize {
        self.param_blocks().iter().map(|(_, b)| b.len()).sum()
    }

    /// Gradient accumulator with the same shapes as the model.
    pub fn zero_grads(&self) -> Gradients {
        Gradients {
            ne_w: Mat::zeros(self.ne.w.rows, self.ne.w.cols),
            ne_b: vec![0.0; self.ne.b.len()],
            w_le: Mat::zeros(self.transfer.w_le.rows, self.transfer.w_le.cols),
            head: MlpGrads::zeros(&self.biaffine.head),
            tail: MlpGrads::zeros(&self.biaffine.tail),
            u1: [
                Mat::zeros(self.biaffine.u1[0].rows, self.biaffine.u1[0].cols),
                Mat::zeros(self.biaffine.u1[1].rows, self.biaffine.u1[1].cols),
            ],
            u2: [
                vec![0.0; self.biaffine.u2[0].len()],
                vec![0.0; self.biaffine.u2[1].len()],
            ],
            b: [0.0, 0.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MlpGrads {
    pub w1: Mat,
    pub b1: Vec<f64>,
    pub w2: Mat,
    pub b2: Vec<f64>,
}

impl MlpGrads {
    fn zeros(p: &MlpParams) -> Self {
        MlpGrads {
            w1: Mat::zeros(p.w1.rows, p.w1.cols),
            b1: vec![0.0; p.b1.len()],
            w2: Mat::zeros(p.w2.rows, p.w2.cols),
            b2: vec![0.0; p.b2.len()],
        }
    }
}

/// Gradients for every trainable tensor, in the model's block order.
/// The temperature is a hyperparameter, not a trained value.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub ne_w: Mat,
    pub ne_b: Vec<f64>,
    pub w_le: Mat,
    pub head: MlpGrads,
    pub tail: MlpGrads,
    pub u1: [Mat; 2],
    pub u2: [Vec<f64>; 2],
    pub b: [f64; 2],
}

impl Gradients {
    pub fn blocks(&self) -> Vec<(&'static str, &[f64])> {
        vec![
            ("ne.w", self.ne_w.data.as_slice()),
            ("ne.b", &self.ne_b),
            ("transfer.w_le", &self.w_le.data),
            ("biaffine.head.w1", &self.head.w1.data),
            ("biaffine.head.b1", &self.head.b1),
            ("biaffine.head.w2", &self.head.w2.data),
            ("biaffine.head.b2", &self.head.b2),
            ("biaffine.tail.w1", &self.tail.w1.data),
            ("biaffine.tail.b1", &self.tail.b1),
            ("biaffine.tail.w2", &self.tail.w2.data),
            ("biaffine.tail.b2", &self.tail.b2),
            ("biaffine.u1.0", &self.u1[0].data),
            ("biaffine.u1.1", &self.u1[1].data),
            ("biaffine.u2.0", &self.u2[0]),
            ("biaffine.u2.1", &self.u2[1]),
            ("biaffine.b", &self.b),
        ]
    }

    pub fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for (_, block) in self.blocks() {
            out.extend_from_slice(block);
        }
        out
    }

    /// Adds `other` scaled by `factor` into self.
    pub fn add_scaled(&mut self, other: &Gradients, factor: f64) {
        let mut mine = self.blocks_mut();
        let theirs = other.blocks();
        for (a, (_, b)) in mine.iter_mut().zip(theirs) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += factor * y;
            }
        }
    }

    fn blocks_mut(&mut self) -> Vec<&mut [f64]> {
        let [u1a, u1b] = &mut self.u1;
        let [u2a, u2b] = &mut self.u2;
        vec![
            &mut self.ne_w.data,
            &mut self.ne_b,
            &mut self.w_le.data,
            &mut self.head.w1.data,
            &mut self.head.b1,
            &mut self.head.w2.data,
            &mut self.head.b2,
            &mut self.tail.w1.data,
            &mut self.tail.b1,
            &mut self.tail.w2.data,
            &mut self.tail.b2,
            &mut u1a.data,
            &mut u1b.data,
            u2a,
            u2b,
            &mut self.b,
        ]
    }
}
