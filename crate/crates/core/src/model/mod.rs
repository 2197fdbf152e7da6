//! Numeric core of graph structure generation: node-label loss,
//! biaffine table scoring with table and symmetry losses, gumbel
//! softmax label transfer, and a hand-written backward pass guarded by
//! finite-difference checks.

pub mod backward;
pub mod checkpoint;
pub mod gradcheck;
pub mod linalg;
mod ops;
mod params;
pub mod train;
mod types;

pub use backward::{GoldData, Objective};
pub use linalg::Mat;
pub use ops::{
    biaffine_table, biaffine_table_seq, gc_loss, gumbel_sample, joint_loss, label_transfer,
    ne_loss, symmetry_loss, table_loss, ForwardTrace, GumbelNoise, MlpTrace, NoiseSource,
    ZeroNoise, PROB_FLOOR,
};
pub use params::{
    BiaffineParams, Gradients, LabelTransferParams, MlpParams, ModelDims, NeProjection,
    StructureModel,
};
pub use types::{
    label_class, label_index, GcScoreTable, NeLabelTable, QuestionEncoding, SpanClass, LABEL_O,
    NUM_LABELS,
};
