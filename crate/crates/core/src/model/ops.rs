//! Numeric operations of the structure-scoring model: label loss,
//! biaffine table scoring, table and symmetry losses, gumbel-softmax
//! sampling, and label transfer.
//!
//! Every operation is pure given its inputs and noise; parameter
//! records are never mutated during evaluation.

#![allow(clippy::needless_range_loop)] // index loops mirror the tensor formulas

use crate::error::NumericError;
use crate::par;

use super::linalg::{dot, log_softmax, matvec, softmax, Mat};
use super::params::{BiaffineParams, LabelTransferParams, MlpParams, StructureModel};
use super::types::{GcScoreTable, NeLabelTable, QuestionEncoding, NUM_LABELS};

/// Probabilities are floored at this value inside logarithms.
pub const PROB_FLOOR: f64 = 1e-12;

/// Source of Gumbel(0,1) noise. Implementations must be reproducible
/// under a fixed seed so sampling can be replayed.
pub trait NoiseSource {
    fn sample(&mut self) -> f64;
}

/// Always returns zero noise; turns sampling into a deterministic
/// tempered softmax.
pub struct ZeroNoise;

impl NoiseSource for ZeroNoise {
    fn sample(&mut self) -> f64 {
        0.0
    }
}

/// Seeded Gumbel(0,1) stream generated as `-ln(-ln u)` from uniform
/// `u` in (0,1).
pub struct GumbelNoise {
    rng: super::params::InitRng,
}

impl GumbelNoise {
    pub fn new(seed: u64) -> Self {
        GumbelNoise {
            rng: super::params::InitRng::new(seed),
        }
    }
}

impl NoiseSource for GumbelNoise {
    fn sample(&mut self) -> f64 {
        let u = self.rng.next_f64().clamp(1e-300, 1.0 - 1e-16);
        -(-u.ln()).ln()
    }
}

/// Mean negative log-likelihood of the gold labels:
/// `-(1/n) Σ log softmax(logits)[i, gold[i]]`.
pub fn ne_loss(table: &NeLabelTable) -> Result<f64, NumericError> {
    let gold = table
        .gold
        .as_ref()
        .ok_or_else(|| NumericError::DimensionMismatch("label table has no gold labels".into()))?;
    let n = table.n();
    let mut total = 0.0;
    for (i, &g) in gold.iter().enumerate() {
        if g >= NUM_LABELS {
            return Err(NumericError::LabelOutOfRange {
                index: g,
                labels: NUM_LABELS,
            });
        }
        total -= log_softmax(table.logits.row(i))[g];
    }
    Ok(total / n as f64)
}

fn mlp_forward(p: &MlpParams, x: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let mut hidden = matvec(&p.w1, x);
    for (h, b) in hidden.iter_mut().zip(&p.b1) {
        *h = (*h + b).tanh();
    }
    let mut out = matvec(&p.w2, &hidden);
    for (o, b) in out.iter_mut().zip(&p.b2) {
        *o += b;
    }
    (hidden, out)
}

/// Two-class biaffine score for one (head, tail) feature pair:
/// `xᵀ U1 y + U2 (x ⊕ y) + b`.
fn biaffine_logits(p: &BiaffineParams, x: &[f64], y: &[f64]) -> [f64; 2] {
    let h_bi = x.len();
    let mut out = [0.0; 2];
    for k in 0..2 {
        let u1y = matvec(&p.u1[k], y);
        out[k] = dot(x, &u1y) + dot(&p.u2[k][..h_bi], x) + dot(&p.u2[k][h_bi..], y) + p.b[k];
    }
    out
}

/// Intermediate activations kept for the backward pass.
#[derive(Debug, Clone)]
pub struct MlpTrace {
    /// n x h_hidden tanh activations.
    pub hidden: Mat,
    /// n x h_bi outputs.
    pub out: Mat,
}

fn mlp_forward_all(p: &MlpParams, h_gc: &Mat) -> MlpTrace {
    let n = h_gc.rows;
    let rows: Vec<(Vec<f64>, Vec<f64>)> = par::map_indexed(n, |i| mlp_forward(p, h_gc.row(i)));
    let mut hidden = Mat::zeros(n, p.b1.len());
    let mut out = Mat::zeros(n, p.b2.len());
    for (i, (h, o)) in rows.into_iter().enumerate() {
        hidden.row_mut(i).copy_from_slice(&h);
        out.row_mut(i).copy_from_slice(&o);
    }
    MlpTrace { hidden, out }
}

fn table_from_features(
    p: &BiaffineParams,
    head_out: &Mat,
    tail_out: &Mat,
    sequential: bool,
) -> (Vec<f64>, Vec<f64>) {
    let n = head_out.rows;
    let row_of = |i: usize| -> Vec<f64> {
        let mut row = Vec::with_capacity(n * 4);
        for j in 0..n {
            let z = biaffine_logits(p, head_out.row(i), tail_out.row(j));
            let s = softmax(&z);
            row.extend_from_slice(&z);
            row.extend_from_slice(&s);
        }
        row
    };
    let rows: Vec<Vec<f64>> = if sequential {
        par::map_indexed_seq(n, row_of)
    } else {
        par::map_indexed(n, row_of)
    };
    let mut logits = Vec::with_capacity(n * n * 2);
    let mut probs = Vec::with_capacity(n * n * 2);
    for row in rows {
        for j in 0..n {
            logits.extend_from_slice(&row[j * 4..j * 4 + 2]);
            probs.extend_from_slice(&row[j * 4 + 2..j * 4 + 4]);
        }
    }
    (logits, probs)
}

fn check_biaffine_dims(h_gc: &Mat, p: &BiaffineParams) -> Result<(), NumericError> {
    if p.head.w1.cols != h_gc.cols || p.tail.w1.cols != h_gc.cols {
        return Err(NumericError::DimensionMismatch(format!(
            "feed-forward input width {} does not match features width {}",
            p.head.w1.cols, h_gc.cols
        )));
    }
    let h_bi = p.head.w2.rows;
    if p.u1[0].rows != h_bi || p.u1[0].cols != h_bi || p.u2[0].len() != 2 * h_bi {
        return Err(NumericError::DimensionMismatch(
            "biaffine tensor widths do not match the feed-forward output".into(),
        ));
    }
    if !h_gc.all_finite() {
        return Err(NumericError::NonFinite("table-filler input".into()));
    }
    Ok(())
}

/// Scores every token pair: projects `h_gc` through the head and tail
/// feed-forward maps, applies the biaffine form, and softmaxes each
/// cell into an edge/no-edge probability pair.
pub fn biaffine_table(h_gc: &Mat, p: &BiaffineParams) -> Result<GcScoreTable, NumericError> {
    check_biaffine_dims(h_gc, p)?;
    let head = mlp_forward_all(&p.head, h_gc);
    let tail = mlp_forward_all(&p.tail, h_gc);
    let (_, probs) = table_from_features(p, &head.out, &tail.out, false);
    GcScoreTable::new(h_gc.rows, probs)
}

/// Sequential twin of [`biaffine_table`]; the default entry point uses
/// the parallel path when the `parallel` feature is on.
pub fn biaffine_table_seq(h_gc: &Mat, p: &BiaffineParams) -> Result<GcScoreTable, NumericError> {
    check_biaffine_dims(h_gc, p)?;
    let n = h_gc.rows;
    let mut head_out = Mat::zeros(n, p.head.b2.len());
    let mut tail_out = Mat::zeros(n, p.tail.b2.len());
    for i in 0..n {
        head_out
            .row_mut(i)
            .copy_from_slice(&mlp_forward(&p.head, h_gc.row(i)).1);
        tail_out
            .row_mut(i)
            .copy_from_slice(&mlp_forward(&p.tail, h_gc.row(i)).1);
    }
    let (_, probs) = table_from_features(p, &head_out, &tail_out, true);
    GcScoreTable::new(n, probs)
}

/// Mean negative log-probability of the gold table:
/// `-(1/n²) Σᵢ Σⱼ log probs[i, j, gold[i, j]]`.
pub fn table_loss(table: &GcScoreTable) -> Result<f64, NumericError> {
    let gold = table
        .gold
        .as_ref()
        .ok_or_else(|| NumericError::DimensionMismatch("score table has no gold table".into()))?;
    let n = table.n;
    for i in 0..n {
        for j in (i + 1)..n {
            if gold[i * n + j] != gold[j * n + i] {
                return Err(NumericError::AsymmetricGold { i, j });
            }
        }
    }
    let mut total = 0.0;
    for i in 0..n {
        for j in 0..n {
            let class = usize::from(gold[i * n + j]);
            total -= table.prob(i, j, class).max(PROB_FLOOR).ln();
        }
    }
    Ok(total / (n * n) as f64)
}

/// Mean absolute asymmetry of the table:
/// `(1/n²) Σᵢ Σⱼ Σₖ |probs[i,j,k] - probs[j,i,k]|`. Zero exactly when
/// the table is symmetric in its first two indexes.
pub fn symmetry_loss(table: &GcScoreTable) -> f64 {
    let n = table.n;
    let mut total = 0.0;
    for i in 0..n {
        for j in 0..n {
            for k in 0..2 {
                total += (table.prob(i, j, k) - table.prob(j, i, k)).abs();
            }
        }
    }
    total / (n * n) as f64
}

/// Combined table objective: `table_loss + symmetry_loss`.
pub fn gc_loss(table: &GcScoreTable) -> Result<f64, NumericError> {
    Ok(table_loss(table)? + symmetry_loss(table))
}

/// Joint objective over both tables: `ne_loss + gc_loss`.
pub fn joint_loss(ne: &NeLabelTable, gc: &GcScoreTable) -> Result<f64, NumericError> {
    Ok(ne_loss(ne)? + gc_loss(gc)?)
}

/// Tempered softmax over noised logits:
/// `softmax((logits + g) / tau)` with `g` drawn from `noise`. With the
/// noise fixed at zero this reduces to `softmax(logits / tau)`.
pub fn gumbel_sample(
    table: &NeLabelTable,
    params: &LabelTransferParams,
    noise: &mut dyn NoiseSource,
) -> Result<Mat, NumericError> {
    if params.tau <= 0.0 {
        return Err(NumericError::NonPositiveTemperature(params.tau));
    }
    let n = table.n();
    let mut out = Mat::zeros(n, NUM_LABELS);
    for i in 0..n {
        let row: Vec<f64> = table
            .logits
            .row(i)
            .iter()
            .map(|v| (v + noise.sample()) / params.tau)
            .collect();
        out.row_mut(i).copy_from_slice(&softmax(&row));
    }
    Ok(out)
}

/// Concatenates token features with the embedded label sample:
/// `h_gc[i] = features[i] ⊕ (y_tilde[i] · w_le)`.
///
/// Engines running without causal modelling skip this and feed the
/// token features to the table filler directly.
pub fn label_transfer(
    enc: &QuestionEncoding,
    y_tilde: &Mat,
    params: &LabelTransferParams,
) -> Result<Mat, NumericError> {
    if y_tilde.rows != enc.n || y_tilde.cols != NUM_LABELS {
        return Err(NumericError::DimensionMismatch(format!(
            "sampled labels are {}x{}, expected {}x{NUM_LABELS}",
            y_tilde.rows, y_tilde.cols, enc.n
        )));
    }
    if params.w_le.rows != NUM_LABELS {
        return Err(NumericError::DimensionMismatch(format!(
            "label embedding has {} rows, expected {NUM_LABELS}",
            params.w_le.rows
        )));
    }
    let embedded = y_tilde.matmul(&params.w_le);
    let h_le = params.w_le.cols;
    let mut out = Mat::zeros(enc.n, enc.width() + h_le);
    for i in 0..enc.n {
        out.row_mut(i)[..enc.width()].copy_from_slice(enc.features.row(i));
        out.row_mut(i)[enc.width()..].copy_from_slice(embedded.row(i));
    }
    Ok(out)
}

/// Everything the backward pass needs from one forward evaluation.
#[derive(Debug, Clone)]
pub struct ForwardTrace {
    /// n x NUM_LABELS label logits.
    pub y_ne: Mat,
    /// The noise matrix actually used (zeros under [`ZeroNoise`]).
    pub noise: Mat,
    /// n x NUM_LABELS sampled label distributions.
    pub y_tilde: Mat,
    /// n x h_gc table-filler input.
    pub h_gc: Mat,
    pub head: MlpTrace,
    pub tail: MlpTrace,
    /// n*n*2 biaffine logits.
    pub logits: Vec<f64>,
    /// n*n*2 cell probabilities.
    pub probs: Vec<f64>,
}

impl ForwardTrace {
    pub fn n(&self) -> usize {
        self.y_ne.rows
    }

    pub fn label_table(&self, gold: Option<Vec<usize>>) -> Result<NeLabelTable, NumericError> {
        let t = NeLabelTable::new(self.y_ne.clone())?;
        match gold {
            Some(g) => t.with_gold(g),
            None => Ok(t),
        }
    }

    pub fn score_table(&self, gold: Option<Vec<bool>>) -> Result<GcScoreTable, NumericError> {
        let t = GcScoreTable::new(self.n(), self.probs.clone())?;
        match gold {
            Some(g) => t.with_gold(g),
            None => Ok(t),
        }
    }
}

impl StructureModel {
    /// Draws one noise matrix for a question of `n` tokens.
    pub fn draw_noise(&self, n: usize, noise: &mut dyn NoiseSource) -> Mat {
        let mut m = Mat::zeros(n, NUM_LABELS);
        for v in m.data.iter_mut() {
            *v = noise.sample();
        }
        m
    }

    /// Full forward pass from token features to the pair table, keeping
    /// intermediates for the backward pass. `noise` must have been
    /// drawn by [`draw_noise`] (all zeros for deterministic runs).
    pub fn forward(&self, features: &Mat, noise: &Mat) -> Result<ForwardTrace, NumericError> {
        if features.cols != self.dims.h_rb {
            return Err(NumericError::DimensionMismatch(format!(
                "features width {} != configured {}",
                features.cols, self.dims.h_rb
            )));
        }
        let n = features.rows;
        if noise.rows != n || noise.cols != NUM_LABELS {
            return Err(NumericError::DimensionMismatch("noise shape".into()));
        }

        // label logits
        let mut y_ne = Mat::zeros(n, NUM_LABELS);
        for i in 0..n {
            let row = matvec(&self.ne.w, features.row(i));
            for (k, v) in row.iter().enumerate() {
                *y_ne.at_mut(i, k) = v + self.ne.b[k];
            }
        }

        // sampled labels and table input
        let (y_tilde, h_gc) = if self.dims.causal {
            let mut y_tilde = Mat::zeros(n, NUM_LABELS);
            for i in 0..n {
                let row: Vec<f64> = y_ne
                    .row(i)
                    .iter()
                    .zip(noise.row(i))
                    .map(|(v, g)| (v + g) / self.transfer.tau)
                    .collect();
                y_tilde.row_mut(i).copy_from_slice(&softmax(&row));
            }
            let enc = QuestionEncoding::new(features.clone())?;
            let h_gc = label_transfer(&enc, &y_tilde, &self.transfer)?;
            (y_tilde, h_gc)
        } else {
            (Mat::zeros(n, NUM_LABELS), features.clone())
        };

        let head = mlp_forward_all(&self.biaffine.head, &h_gc);
        let tail = mlp_forward_all(&self.biaffine.tail, &h_gc);
        let (logits, probs) = table_from_features(&self.biaffine, &head.out, &tail.out, false);

        Ok(ForwardTrace {
            y_ne,
            noise: noise.clone(),
            y_tilde,
            h_gc,
            head,
            tail,
            logits,
            probs,
        })
    }
}
