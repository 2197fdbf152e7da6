//! Finite-difference verification of the analytic backward pass.
//!
//! The numeric side is intentionally independent: it only ever calls
//! the forward pass, evaluating the objective at nudged parameter
//! vectors with central differences.

use crate::error::NumericError;
use crate::par;

use super::backward::{GoldData, Objective};
use super::linalg::Mat;
use super::ops::{joint_loss, ne_loss, symmetry_loss, table_loss};
use super::params::StructureModel;

/// Scalar objective value at the model's current parameters.
pub fn objective_value(
    model: &StructureModel,
    features: &Mat,
    noise: &Mat,
    gold: &GoldData,
    objective: &Objective,
) -> Result<f64, NumericError> {
    let trace = model.forward(features, noise)?;
    let mut value = 0.0;
    if objective.ne != 0.0 {
        let t = trace.label_table(gold.ne.clone())?;
        value += objective.ne * ne_loss(&t)?;
    }
    if objective.table != 0.0 || objective.symmetry != 0.0 {
        let t = trace.score_table(gold.gc.clone())?;
        if objective.table != 0.0 {
            value += objective.table * table_loss(&t)?;
        }
        if objective.symmetry != 0.0 {
            value += objective.symmetry * symmetry_loss(&t);
        }
    }
    if let Some(r) = objective.projection {
        value += r.iter().zip(&trace.probs).map(|(a, b)| a * b).sum::<f64>();
    }
    Ok(value)
}

/// Joint loss (label + table + symmetry) at the current parameters.
pub fn joint_value(
    model: &StructureModel,
    features: &Mat,
    noise: &Mat,
    gold: &GoldData,
) -> Result<f64, NumericError> {
    let trace = model.forward(features, noise)?;
    let ne = trace.label_table(gold.ne.clone())?;
    let gc = trace.score_table(gold.gc.clone())?;
    joint_loss(&ne, &gc)
}

/// Central-difference gradient over the flattened parameter vector.
pub fn finite_difference_gradient(
    model: &StructureModel,
    features: &Mat,
    noise: &Mat,
    gold: &GoldData,
    objective: &Objective,
    step: f64,
) -> Result<Vec<f64>, NumericError> {
    let base = model.flatten();
    let results = par::map_indexed(base.len(), |idx| {
        let mut probe = model.clone();
        let mut params = base.clone();
        params[idx] = base[idx] + step;
        probe.assign(&params);
        let plus = objective_value(&probe, features, noise, gold, objective)?;
        params[idx] = base[idx] - step;
        probe.assign(&params);
        let minus = objective_value(&probe, features, noise, gold, objective)?;
        Ok::<f64, NumericError>((plus - minus) / (2.0 * step))
    });
    results.into_iter().collect()
}

/// Per-tensor comparison between analytic and numeric gradients.
#[derive(Debug, Clone)]
pub struct BlockReport {
    pub name: &'static str,
    /// `‖a - n‖ / max(‖a‖, ‖n‖, 1e-10)`.
    pub relative_error: f64,
}

pub fn compare_blocks(
    model: &StructureModel,
    analytic: &super::params::Gradients,
    numeric: &[f64],
) -> Vec<BlockReport> {
    let mut reports = Vec::new();
    let mut offset = 0;
    for ((name, _), (grad_name, grad)) in model.param_blocks().iter().zip(analytic.blocks()) {
        debug_assert_eq!(*name, grad_name);
        let num = &numeric[offset..offset + grad.len()];
        offset += grad.len();
        let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
        let diff: Vec<f64> = grad.iter().zip(num).map(|(a, b)| a - b).collect();
        let denom = norm(grad).max(norm(num)).max(1e-10);
        reports.push(BlockReport {
            name,
            relative_error: norm(&diff) / denom,
        });
    }
    reports
}

/// Worst per-tensor relative error between the analytic gradient of
/// `objective` and central finite differences at `step`.
pub fn max_relative_error(
    model: &StructureModel,
    features: &Mat,
    noise: &Mat,
    gold: &GoldData,
    objective: &Objective,
    step: f64,
) -> Result<f64, NumericError> {
    let trace = model.forward(features, noise)?;
    let analytic = model.backward(features, &trace, gold, objective)?;
    let numeric = finite_difference_gradient(model, features, noise, gold, objective, step)?;
    Ok(compare_blocks(model, &analytic, &numeric)
        .into_iter()
        .map(|r| r.relative_error)
        .fold(0.0, f64::max))
}
