//! Full-batch training loop for the structure-scoring model.
//!
//! Two optimizers are available: AdamW with the shipped defaults, and
//! plain gradient descent with a backtracking step size. The descent
//! variant only ever accepts non-increasing steps, which is what the
//! deterministic sanity checks rely on.

use crate::error::NumericError;

use super::backward::{GoldData, Objective};
use super::gradcheck::joint_value;
use super::linalg::Mat;
use super::ops::{GumbelNoise, NoiseSource, ZeroNoise};
use super::params::StructureModel;
use super::types::NUM_LABELS;

/// One training example: token features plus gold labels and table.
#[derive(Debug, Clone)]
pub struct TrainExample {
    pub features: Mat,
    pub gold_ne: Vec<usize>,
    pub gold_gc: Vec<bool>,
}

impl TrainExample {
    fn gold(&self) -> GoldData {
        GoldData {
            ne: Some(self.gold_ne.clone()),
            gc: Some(self.gold_gc.clone()),
        }
    }
}

/// Gumbel noise handling during training.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseMode {
    /// Zero noise: fully deterministic tempered softmax.
    Zero,
    /// Fresh seeded Gumbel draws each step.
    Seeded(u64),
}

/// Optimizer choice. AdamW defaults mirror the shipped configuration
/// (betas 0.9/0.9, weight decay 1e-5, learning rate 5e-5).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Optimizer {
    AdamW {
        lr: f64,
        beta1: f64,
        beta2: f64,
        eps: f64,
        weight_decay: f64,
    },
    /// Gradient descent; with `backtracking` the step halves until the
    /// batch loss does not increase, so the loss history is
    /// non-increasing by construction.
    Descent { lr: f64, backtracking: bool },
}

impl Optimizer {
    pub fn default_adamw() -> Self {
        Optimizer::AdamW {
            lr: 5e-5,
            beta1: 0.9,
            beta2: 0.9,
            eps: 1e-8,
            weight_decay: 1e-5,
        }
    }

    pub fn monotone_descent(lr: f64) -> Self {
        Optimizer::Descent {
            lr,
            backtracking: true,
        }
    }
}

/// Mean joint loss over the batch at fixed noise.
fn batch_loss(
    model: &StructureModel,
    batch: &[TrainExample],
    noises: &[Mat],
) -> Result<f64, NumericError> {
    let mut total = 0.0;
    for (ex, noise) in batch.iter().zip(noises) {
        total += joint_value(model, &ex.features, noise, &ex.gold())?;
    }
    Ok(total / batch.len() as f64)
}

fn batch_gradient(
    model: &StructureModel,
    batch: &[TrainExample],
    noises: &[Mat],
) -> Result<Vec<f64>, NumericError> {
    let mut acc = model.zero_grads();
    let scale = 1.0 / batch.len() as f64;
    for (ex, noise) in batch.iter().zip(noises) {
        let trace = model.forward(&ex.features, noise)?;
        let grads = model.backward(&ex.features, &trace, &ex.gold(), &Objective::joint())?;
        acc.add_scaled(&grads, scale);
    }
    Ok(acc.flatten())
}

/// Runs `steps` full-batch updates and returns the loss history:
/// entry 0 is the initial loss, entry t the loss after step t.
pub fn train(
    model: &mut StructureModel,
    batch: &[TrainExample],
    steps: usize,
    optimizer: Optimizer,
    noise_mode: NoiseMode,
) -> Result<Vec<f64>, NumericError> {
    if batch.is_empty() {
        return Err(NumericError::DimensionMismatch(
            "empty training batch".into(),
        ));
    }
    let zero_noises: Vec<Mat> = batch
        .iter()
        .map(|ex| Mat::zeros(ex.features.rows, NUM_LABELS))
        .collect();
    let mut gumbel = match noise_mode {
        NoiseMode::Zero => None,
        NoiseMode::Seeded(seed) => Some(GumbelNoise::new(seed)),
    };
    let draw_noises = |gumbel: &mut Option<GumbelNoise>| -> Vec<Mat> {
        match gumbel {
            None => zero_noises.clone(),
            Some(src) => batch
                .iter()
                .map(|ex| {
                    let mut m = Mat::zeros(ex.features.rows, NUM_LABELS);
                    for v in m.data.iter_mut() {
                        *v = src.sample();
                    }
                    m
                })
                .collect(),
        }
    };

    let mut history = Vec::with_capacity(steps + 1);
    history.push(batch_loss(model, batch, &zero_noises)?);

    let mut adam_m = vec![0.0; model.num_params()];
    let mut adam_v = vec![0.0; model.num_params()];
    let mut descent_lr = match optimizer {
        Optimizer::Descent { lr, .. } => lr,
        _ => 0.0,
    };

    for step in 1..=steps {
        let noises = draw_noises(&mut gumbel);
        let grad = batch_gradient(model, batch, &noises)?;
        let params = model.flatten();

        match optimizer {
            Optimizer::AdamW {
                lr,
                beta1,
                beta2,
                eps,
                weight_decay,
            } => {
                let mut next = params.clone();
                let bc1 = 1.0 - beta1.powi(step as i32);
                let bc2 = 1.0 - beta2.powi(step as i32);
                for i in 0..next.len() {
                    adam_m[i] = beta1 * adam_m[i] + (1.0 - beta1) * grad[i];
                    adam_v[i] = beta2 * adam_v[i] + (1.0 - beta2) * grad[i] * grad[i];
                    let m_hat = adam_m[i] / bc1;
                    let v_hat = adam_v[i] / bc2;
                    next[i] -= lr * (m_hat / (v_hat.sqrt() + eps) + weight_decay * next[i]);
                }
                model.assign(&next);
            }
            Optimizer::Descent { backtracking, .. } => {
                let current = history[step - 1];
                let mut lr = descent_lr;
                let mut accepted = false;
                for _ in 0..40 {
                    let mut next = params.clone();
                    for (p, g) in next.iter_mut().zip(&grad) {
                        *p -= lr * g;
                    }
                    model.assign(&next);
                    let candidate = batch_loss(model, batch, &zero_noises)?;
                    if !backtracking || candidate <= current {
                        accepted = true;
                        // regrow after successful steps so halvings do not
                        // pin the rate permanently
                        descent_lr = lr * 1.2;
                        break;
                    }
                    lr *= 0.5;
                }
                if !accepted {
                    // plateau: keep the previous parameters
                    model.assign(&params);
                    descent_lr = lr;
                }
            }
        }

        // history is always evaluated at zero noise so the sequence is
        // comparable across steps
        history.push(batch_loss(model, batch, &zero_noises)?);
    }
    Ok(history)
}

/// Convenience: deterministic noise source for `mode`.
pub fn noise_source(mode: NoiseMode) -> Box<dyn NoiseSource> {
    match mode {
        NoiseMode::Zero => Box::new(ZeroNoise),
        NoiseMode::Seeded(seed) => Box::new(GumbelNoise::new(seed)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decode::{encode_labels, encode_table};
    use crate::model::params::ModelDims;
    use crate::pipeline::deterministic_features;
    use crate::query_graph::{Node, NodeId, NodeTag, QueryGraphStructure, QueryType, Span};

    fn toks(text: &str) -> Vec<String> {
        text.split_whitespace().map(String::from).collect()
    }

    /// Tiny annotated questions with gold structures.
    pub(crate) fn toy_examples(h_rb: usize, seed: u64) -> Vec<TrainExample> {
        let specs: Vec<(Vec<String>, QueryGraphStructure)> = vec![
            {
                // select: ?x typed city
                let tokens = toks("[CLS] which city is near here");
                let mut s = QueryGraphStructure::new(QueryType::Select);
                s.nodes = vec![
                    Node::new(NodeId(0), Span::new(1, 2), NodeTag::Variable),
                    Node::new(NodeId(1), Span::new(2, 3), NodeTag::Type),
                ];
                s.add_edge(NodeId(0), NodeId(1));
                s.target = Some(NodeId(0));
                (tokens, s)
            },
            {
                // judge with entity + type and a [SEP]
                let tokens = toks("[CLS] is new york a city [SEP]");
                let mut s = QueryGraphStructure::new(QueryType::Judge);
                s.nodes = vec![
                    Node::new(NodeId(0), Span::new(2, 4), NodeTag::Entity),
                    Node::new(NodeId(1), Span::new(5, 6), NodeTag::Type),
                ];
                s.add_edge(NodeId(0), NodeId(1));
                (tokens, s)
            },
            {
                // count over a 2-edge chain
                let tokens = toks("[CLS] how many rivers cross ohio");
                let mut s = QueryGraphStructure::new(QueryType::Count);
                s.nodes = vec![
                    Node::new(NodeId(0), Span::new(3, 4), NodeTag::Variable),
                    Node::new(NodeId(1), Span::new(5, 6), NodeTag::Entity),
                ];
                s.add_edge(NodeId(0), NodeId(1));
                s.target = Some(NodeId(0));
                (tokens, s)
            },
            {
                // twin pair (variable + type sharing a span)
                let tokens = toks("[CLS] which person wrote this book");
                let mut s = QueryGraphStructure::new(QueryType::Select);
                s.nodes = vec![
                    Node::new(NodeId(0), Span::new(2, 3), NodeTag::Variable),
                    Node::new(NodeId(1), Span::new(2, 3), NodeTag::Type),
                    Node::new(NodeId(2), Span::new(5, 6), NodeTag::Entity),
                ];
                s.add_edge(NodeId(0), NodeId(1));
                s.add_edge(NodeId(0), NodeId(2));
                s.target = Some(NodeId(0));
                (tokens, s)
            },
            {
                // 3-node select chain
                let tokens = toks("[CLS] who leads the city of berlin");
                let mut s = QueryGraphStructure::new(QueryType::Select);
                s.nodes = vec![
                    Node::new(NodeId(0), Span::new(1, 2), NodeTag::Variable),
                    Node::new(NodeId(1), Span::new(4, 5), NodeTag::Variable),
                    Node::new(NodeId(2), Span::new(6, 7), NodeTag::Entity),
                ];
                s.add_edge(NodeId(0), NodeId(1));
                s.add_edge(NodeId(1), NodeId(2));
                s.target = Some(NodeId(0));
                (tokens, s)
            },
        ];
        specs
            .into_iter()
            .map(|(tokens, structure)| {
                let n = tokens.len();
                TrainExample {
                    features: deterministic_features(&tokens, h_rb, seed),
                    gold_ne: encode_labels(&structure, n),
                    gold_gc: encode_table(&structure, n),
                }
            })
            .collect()
    }

    #[test]
    fn monotone_descent_reduces_joint_loss() {
        let dims = ModelDims {
            h_rb: 16,
            h_bi: 8,
            h_le: 4,
            h_hidden: 8,
            causal: true,
        };
        let mut model = StructureModel::init(dims, 1.0, 42).unwrap();
        let batch = toy_examples(dims.h_rb, 7);
        let history = train(
            &mut model,
            &batch,
            60,
            Optimizer::monotone_descent(0.5),
            NoiseMode::Zero,
        )
        .unwrap();
        for w in history.windows(2) {
            assert!(w[1] <= w[0] + 1e-12, "loss increased: {} -> {}", w[0], w[1]);
        }
        assert!(
            history.last().unwrap() < &(history[0] * 0.7),
            "loss barely moved: {} -> {}",
            history[0],
            history.last().unwrap()
        );
    }

    #[test]
    fn adamw_runs_and_improves() {
        let dims = ModelDims {
            h_rb: 8,
            h_bi: 4,
            h_le: 4,
            h_hidden: 4,
            causal: true,
        };
        let mut model = StructureModel::init(dims, 1.0, 3).unwrap();
        let batch = toy_examples(dims.h_rb, 5);
        let history = train(
            &mut model,
            &batch,
            40,
            Optimizer::AdamW {
                lr: 5e-3,
                beta1: 0.9,
                beta2: 0.9,
                eps: 1e-8,
                weight_decay: 1e-5,
            },
            NoiseMode::Seeded(11),
        )
        .unwrap();
        assert!(history.last().unwrap() < &history[0]);
    }

    #[test]
    fn empty_batch_is_an_error() {
        let dims = ModelDims {
            h_rb: 4,
            h_bi: 2,
            h_le: 2,
            h_hidden: 2,
            causal: true,
        };
        let mut model = StructureModel::init(dims, 1.0, 1).unwrap();
        assert!(train(
            &mut model,
            &[],
            1,
            Optimizer::default_adamw(),
            NoiseMode::Zero
        )
        .is_err());
    }
}
