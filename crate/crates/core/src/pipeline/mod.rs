//! End-to-end orchestration: dataset and fixture ingestion,
//! configuration, the per-question pipeline, batch runners, and
//! answer-level metrics.

mod config;
mod dataset;
mod features;
mod fixtures;
mod metrics;
mod run;

pub use config::EngineConfig;
pub use dataset::{read_dataset, tokenize, DatasetRecord, NodeAnnotation};
pub use features::deterministic_features;
pub use fixtures::{QuestionScores, ScoreFixtureFile};
pub use metrics::{evaluate, Metrics, QuestionMetrics};
pub use run::{
    answers_by_id, run_batch, run_batch_seq, run_pipeline, FeatureMode, ParseResult,
    PipelineOutcome, Providers, RankerSource, ScoreSource,
};
