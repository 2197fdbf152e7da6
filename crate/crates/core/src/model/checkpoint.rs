//! Parameter checkpoint format: one JSON document holding named real
//! tensors with declared shapes.
//!
//! ```json
//! {
//!   "format": "tensor-checkpoint-v1",
//!   "dims": { "h_rb": 1024, "h_bi": 256, "h_le": 256, "h_hidden": 256, "causal": true },
//!   "tau": 0.05,
//!   "tensors": { "ne.w": { "shape": [9, 1024], "data": [ ... ] }, ... }
//! }
//! ```

use std::collections::BTreeMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::NumericError;

use super::params::{ModelDims, StructureModel};

pub const CHECKPOINT_FORMAT: &str = "tensor-checkpoint-v1";

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Tensor {
    pub shape: Vec<usize>,
    pub data: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format: String,
    pub dims: ModelDims,
    pub tau: f64,
    pub tensors: BTreeMap<String, Tensor>,
}

fn block_shape(model: &StructureModel, name: &str) -> Vec<usize> {
    let d = &model.dims;
    let h_gc = d.h_gc();
    match name {
        "ne.w" => vec![9, d.h_rb],
        "ne.b" => vec![9],
        "transfer.w_le" => vec![9, d.h_le],
        "biaffine.head.w1" | "biaffine.tail.w1" => vec![d.h_hidden, h_gc],
        "biaffine.head.b1" | "biaffine.tail.b1" => vec![d.h_hidden],
        "biaffine.head.w2" | "biaffine.tail.w2" => vec![d.h_bi, d.h_hidden],
        "biaffine.head.b2" | "biaffine.tail.b2" => vec![d.h_bi],
        "biaffine.u1.0" | "biaffine.u1.1" => vec![d.h_bi, d.h_bi],
        "biaffine.u2.0" | "biaffine.u2.1" => vec![2 * d.h_bi],
        "biaffine.b" => vec![2],
        other => panic!("unknown tensor block {other}"),
    }
}

/// Serializes the model into the checkpoint document.
pub fn save(model: &StructureModel, mut writer: impl Write) -> std::io::Result<()> {
    let mut tensors = BTreeMap::new();
    for (name, data) in model.param_blocks() {
        tensors.insert(
            name.to_string(),
            Tensor {
                shape: block_shape(model, name),
                data: data.to_vec(),
            },
        );
    }
    let doc = Checkpoint {
        format: CHECKPOINT_FORMAT.to_string(),
        dims: model.dims,
        tau: model.transfer.tau,
        tensors,
    };
    let json = serde_json::to_string_pretty(&doc)?;
    writer.write_all(json.as_bytes())
}

/// Loads a checkpoint document back into a model, validating every
/// declared shape.
pub fn load(reader: impl Read) -> Result<StructureModel, NumericError> {
    let doc: Checkpoint = serde_json::from_reader(reader)
        .map_err(|e| NumericError::DimensionMismatch(format!("checkpoint parse: {e}")))?;
    if doc.format != CHECKPOINT_FORMAT {
        return Err(NumericError::DimensionMismatch(format!(
            "unsupported checkpoint format {:?}",
            doc.format
        )));
    }
    let mut model = StructureModel::init(doc.dims, doc.tau, 0)?;
    let mut flat = Vec::with_capacity(model.num_params());
    for (name, current) in model.param_blocks() {
        let tensor = doc.tensors.get(name).ok_or_else(|| {
            NumericError::DimensionMismatch(format!("checkpoint missing tensor {name}"))
        })?;
        let expected = block_shape(&model, name);
        if tensor.shape != expected {
            return Err(NumericError::DimensionMismatch(format!(
                "tensor {name} has shape {:?}, expected {:?}",
                tensor.shape, expected
            )));
        }
        if tensor.data.len() != current.len() {
            return Err(NumericError::DimensionMismatch(format!(
                "tensor {name} has {} values, expected {}",
                tensor.data.len(),
                current.len()
            )));
        }
        if tensor.data.iter().any(|v| !v.is_finite()) {
            return Err(NumericError::NonFinite(format!("tensor {name}")));
        }
        flat.extend_from_slice(&tensor.data);
    }
    model.assign(&flat);
    Ok(model)
}
