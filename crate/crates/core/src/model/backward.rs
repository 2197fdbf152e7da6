//! Analytic backward pass for the structure-scoring model.
//!
//! Gradients are derived by hand and guarded by the finite-difference
//! checks in [`super::gradcheck`]. The label-transfer path routes table
//! gradients back into the label logits, which is what lets the table
//! objective give feedback to node extraction.

#![allow(clippy::needless_range_loop)] // index loops mirror the tensor formulas

use crate::error::NumericError;

use super::linalg::{matvec, matvec_t, softmax, softmax_backward, Mat};
use super::ops::{ForwardTrace, PROB_FLOOR};
use super::params::{Gradients, MlpGrads, MlpParams, StructureModel};
use super::types::NUM_LABELS;

/// Which scalar functional to differentiate. Loss terms add up, so the
/// joint objective is expressed with all weights at one.
#[derive(Debug, Clone)]
pub struct Objective<'a> {
    /// Weight on the label loss (needs gold labels).
    pub ne: f64,
    /// Weight on the table loss (needs the gold table).
    pub table: f64,
    /// Weight on the symmetry loss.
    pub symmetry: f64,
    /// Optional linear functional `Σ r[i,j,k] * probs[i,j,k]` used to
    /// gradient-check the table outputs themselves.
    pub projection: Option<&'a [f64]>,
}

impl Objective<'_> {
    pub fn joint() -> Self {
        Objective {
            ne: 1.0,
            table: 1.0,
            symmetry: 1.0,
            projection: None,
        }
    }
}

/// Gold data the objective may need.
#[derive(Debug, Clone, Default)]
pub struct GoldData {
    pub ne: Option<Vec<usize>>,
    pub gc: Option<Vec<bool>>,
}

fn mlp_backward(
    p: &MlpParams,
    grads: &mut MlpGrads,
    input: &[f64],
    hidden: &[f64],
    d_out: &[f64],
    d_input: &mut [f64],
) {
    for (k, d) in d_out.iter().enumerate() {
        if *d == 0.0 {
            continue;
        }
        grads.b2[k] += d;
        for (h, w) in hidden.iter().zip(grads.w2.row_mut(k)) {
            *w += d * h;
        }
    }
    let d_act = matvec_t(&p.w2, d_out);
    // d tanh(u) = 1 - tanh(u)^2
    let d_pre: Vec<f64> = d_act
        .iter()
        .zip(hidden)
        .map(|(d, a)| d * (1.0 - a * a))
        .collect();
    for (k, d) in d_pre.iter().enumerate() {
        if *d == 0.0 {
            continue;
        }
        grads.b1[k] += d;
        for (x, w) in input.iter().zip(grads.w1.row_mut(k)) {
            *w += d * x;
        }
    }
    let back = matvec_t(&p.w1, &d_pre);
    for (di, b) in d_input.iter_mut().zip(back) {
        *di += b;
    }
}

impl StructureModel {
    /// Gradients of the objective with respect to every trainable
    /// tensor, evaluated at the state captured in `trace`.
    pub fn backward(
        &self,
        features: &Mat,
        trace: &ForwardTrace,
        gold: &GoldData,
        objective: &Objective,
    ) -> Result<Gradients, NumericError> {
        let n = trace.n();
        let nn = n * n;
        let mut grads = self.zero_grads();

        // ---- seed gradients on the pair-table probabilities ----
        let mut d_probs = vec![0.0; nn * 2];
        if objective.table != 0.0 {
            let g = gold.gc.as_ref().ok_or_else(|| {
                NumericError::DimensionMismatch("table objective needs a gold table".into())
            })?;
            let scale = objective.table / nn as f64;
            for i in 0..n {
                for j in 0..n {
                    let class = usize::from(g[i * n + j]);
                    let p = trace.probs[(i * n + j) * 2 + class];
                    if p > PROB_FLOOR {
                        d_probs[(i * n + j) * 2 + class] -= scale / p;
                    }
                }
            }
        }
        if objective.symmetry != 0.0 {
            let scale = 2.0 * objective.symmetry / nn as f64;
            for i in 0..n {
                for j in 0..n {
                    if i == j {
                        continue;
                    }
                    for k in 0..2 {
                        let diff =
                            trace.probs[(i * n + j) * 2 + k] - trace.probs[(j * n + i) * 2 + k];
                        d_probs[(i * n + j) * 2 + k] += scale * sign(diff);
                    }
                }
            }
        }
        if let Some(r) = objective.projection {
            if r.len() != nn * 2 {
                return Err(NumericError::DimensionMismatch(
                    "projection length must be n*n*2".into(),
                ));
            }
            for (d, v) in d_probs.iter_mut().zip(r) {
                *d += v;
            }
        }

        // ---- per-cell softmax, then the biaffine form ----
        let h_bi = self.dims.h_bi;
        let mut d_head_out = Mat::zeros(n, h_bi);
        let mut d_tail_out = Mat::zeros(n, h_bi);
        // Σ_i dz[i,j,k] x_i, accumulated per class for the dU1 update
        let mut xz = [Mat::zeros(n, h_bi), Mat::zeros(n, h_bi)];

        for i in 0..n {
            let x = trace.head.out.row(i);
            for j in 0..n {
                let cell = (i * n + j) * 2;
                let dp = &d_probs[cell..cell + 2];
                if dp[0] == 0.0 && dp[1] == 0.0 {
                    continue;
                }
                let s = &trace.probs[cell..cell + 2];
                let dz = softmax_backward(s, dp);
                let y = trace.tail.out.row(j);
                for k in 0..2 {
                    if dz[k] == 0.0 {
                        continue;
                    }
                    grads.b[k] += dz[k];
                    let (u2x, u2y) = self.biaffine.u2[k].split_at(h_bi);
                    for c in 0..h_bi {
                        grads.u2[k][c] += dz[k] * x[c];
                        grads.u2[k][h_bi + c] += dz[k] * y[c];
                        xz[k].row_mut(j)[c] += dz[k] * x[c];
                    }
                    let u1y = matvec(&self.biaffine.u1[k], y);
                    let u1tx = matvec_t(&self.biaffine.u1[k], x);
                    for c in 0..h_bi {
                        d_head_out.row_mut(i)[c] += dz[k] * (u1y[c] + u2x[c]);
                        d_tail_out.row_mut(j)[c] += dz[k] * (u1tx[c] + u2y[c]);
                    }
                }
            }
        }
        for k in 0..2 {
            // dU1[k] = Σ_j (Σ_i dz[i,j,k] x_i) y_jᵀ
            let acc = xz[k].transposed_matmul(&trace.tail.out);
            for (g, a) in grads.u1[k].data.iter_mut().zip(&acc.data) {
                *g += a;
            }
        }

        // ---- feed-forward maps back to the table input ----
        let h_gc_width = trace.h_gc.cols;
        let mut d_h_gc = Mat::zeros(n, h_gc_width);
        for i in 0..n {
            mlp_backward(
                &self.biaffine.head,
                &mut grads.head,
                trace.h_gc.row(i),
                trace.head.hidden.row(i),
                d_head_out.row(i),
                d_h_gc.row_mut(i),
            );
            mlp_backward(
                &self.biaffine.tail,
                &mut grads.tail,
                trace.h_gc.row(i),
                trace.tail.hidden.row(i),
                d_tail_out.row(i),
                d_h_gc.row_mut(i),
            );
        }

        // ---- label transfer back into the label logits ----
        let mut d_y_ne = Mat::zeros(n, NUM_LABELS);
        if self.dims.causal {
            let h_rb = self.dims.h_rb;
            let h_le = self.dims.h_le;
            let mut d_embedded = Mat::zeros(n, h_le);
            for i in 0..n {
                d_embedded
                    .row_mut(i)
                    .copy_from_slice(&d_h_gc.row(i)[h_rb..h_rb + h_le]);
            }
            // w_le grad: y_tildeᵀ · d_embedded
            let wle_grad = trace.y_tilde.transposed_matmul(&d_embedded);
            for (g, a) in grads.w_le.data.iter_mut().zip(&wle_grad.data) {
                *g += a;
            }
            // d y_tilde = d_embedded · w_leᵀ, then through the tempered softmax
            for i in 0..n {
                let d_row = matvec(&self.transfer.w_le, d_embedded.row(i));
                debug_assert_eq!(d_row.len(), NUM_LABELS);
                let back = softmax_backward(trace.y_tilde.row(i), &d_row);
                for (k, b) in back.iter().enumerate() {
                    *d_y_ne.at_mut(i, k) += b / self.transfer.tau;
                }
            }
        }

        // ---- label loss ----
        if objective.ne != 0.0 {
            let g = gold.ne.as_ref().ok_or_else(|| {
                NumericError::DimensionMismatch("label objective needs gold labels".into())
            })?;
            let scale = objective.ne / n as f64;
            for (i, &cls) in g.iter().enumerate() {
                if cls >= NUM_LABELS {
                    return Err(NumericError::LabelOutOfRange {
                        index: cls,
                        labels: NUM_LABELS,
                    });
                }
                let p = softmax(trace.y_ne.row(i));
                for k in 0..NUM_LABELS {
                    let indicator = if k == cls { 1.0 } else { 0.0 };
                    *d_y_ne.at_mut(i, k) += scale * (p[k] - indicator);
                }
            }
        }

        // ---- label projection ----
        let wne_grad = d_y_ne.transposed_matmul(features);
        for (g, a) in grads.ne_w.data.iter_mut().zip(&wne_grad.data) {
            *g += a;
        }
        for i in 0..n {
            for k in 0..NUM_LABELS {
                grads.ne_b[k] += d_y_ne.at(i, k);
            }
        }

        Ok(grads)
    }
}

fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::gradcheck::{compare_blocks, finite_difference_gradient, max_relative_error};
    use crate::model::params::{InitRng, ModelDims, StructureModel};
    use crate::model::GumbelNoise;
    use crate::model::NoiseSource;

    fn instance(seed: u64, causal: bool) -> (StructureModel, Mat, Mat, GoldData) {
        let dims = ModelDims {
            h_rb: 4,
            h_bi: 3,
            h_le: 2,
            h_hidden: 3,
            causal,
        };
        let model = StructureModel::init(dims, 1.0, seed).unwrap();
        let mut rng = InitRng::new(seed ^ 0xABCD);
        let n = 3;
        let features = Mat::from_vec(
            n,
            dims.h_rb,
            (0..n * dims.h_rb)
                .map(|_| rng.next_f64() * 2.0 - 1.0)
                .collect(),
        );
        let mut noise_src = GumbelNoise::new(seed ^ 0x77);
        let mut noise = Mat::zeros(n, NUM_LABELS);
        for v in noise.data.iter_mut() {
            *v = noise_src.sample();
        }
        let gold = GoldData {
            ne: Some(vec![0, 3, 1]),
            gc: Some(vec![
                false, true, false, //
                true, false, true, //
                false, true, true,
            ]),
        };
        (model, features, noise, gold)
    }

    fn check(objective: Objective, seed: u64, causal: bool) -> f64 {
        let (model, features, noise, gold) = instance(seed, causal);
        max_relative_error(&model, &features, &noise, &gold, &objective, 1e-5).unwrap()
    }

    #[test]
    fn label_loss_gradient_matches_finite_differences() {
        let objective = Objective {
            ne: 1.0,
            table: 0.0,
            symmetry: 0.0,
            projection: None,
        };
        assert!(check(objective, 11, true) < 1e-4);
    }

    #[test]
    fn table_loss_gradient_matches_finite_differences() {
        let objective = Objective {
            ne: 0.0,
            table: 1.0,
            symmetry: 0.0,
            projection: None,
        };
        assert!(check(objective, 12, true) < 1e-4);
    }

    #[test]
    fn symmetry_loss_gradient_matches_finite_differences() {
        let objective = Objective {
            ne: 0.0,
            table: 0.0,
            symmetry: 1.0,
            projection: None,
        };
        assert!(check(objective, 13, true) < 1e-4);
    }

    #[test]
    fn table_output_projection_gradient_matches_finite_differences() {
        let (model, features, noise, gold) = instance(14, true);
        let n = 3;
        let mut rng = InitRng::new(99);
        let r: Vec<f64> = (0..n * n * 2).map(|_| rng.next_f64() * 2.0 - 1.0).collect();
        let objective = Objective {
            ne: 0.0,
            table: 0.0,
            symmetry: 0.0,
            projection: Some(&r),
        };
        let err = max_relative_error(&model, &features, &noise, &gold, &objective, 1e-5).unwrap();
        assert!(err < 1e-4, "projection gradient error {err}");
    }

    #[test]
    fn joint_gradient_matches_finite_differences() {
        assert!(check(Objective::joint(), 15, true) < 1e-4);
    }

    #[test]
    fn joint_gradient_without_causal_path() {
        assert!(check(Objective::joint(), 16, false) < 1e-4);
    }

    #[test]
    fn per_block_reports_cover_every_tensor() {
        let (model, features, noise, gold) = instance(17, true);
        let objective = Objective::joint();
        let trace = model.forward(&features, &noise).unwrap();
        let analytic = model
            .backward(&features, &trace, &gold, &objective)
            .unwrap();
        let numeric =
            finite_difference_gradient(&model, &features, &noise, &gold, &objective, 1e-5).unwrap();
        let reports = compare_blocks(&model, &analytic, &numeric);
        assert_eq!(reports.len(), 16);
        for r in &reports {
            assert!(
                r.relative_error < 1e-4,
                "block {} error {}",
                r.name,
                r.relative_error
            );
        }
    }
}
