//! Semantic-parsing engine that turns natural-language questions into
//! executable knowledge-base query graphs.
//!
//! The engine works in two stages. First, token-level scores (a label
//! sequence plus a token-pair table) are decoded into an unlabeled
//! *query graph structure*: the nodes, their connectivity, and the
//! target node. Second, a beam search binds a directed KB predicate to
//! every structure edge by alternating candidate retrieval against the
//! triple store with candidate ranking. The bound graph is serialized
//! to SPARQL and executed against an in-memory store.
//!
//! Module map:
//!
//! - [`query_graph`]: graph data model and validation
//! - [`kb`]: immutable triple store, pattern matching, query execution
//! - [`model`]: numeric scoring model (losses, biaffine table, gradients)
//! - [`decode`]: label/table decoding into graph structures
//! - [`linker`]: entity and type linking against the store
//! - [`relation`]: beam-search predicate binding plus baselines and oracles
//! - [`sparql`]: query-type classification and SPARQL serialization
//! - [`pipeline`]: end-to-end orchestration, datasets, fixtures, metrics
//!
//! Batch entry points are data-parallel when the `parallel` feature
//! (default) is enabled; each has a `_seq` twin used as the fallback and
//! for benchmarking.

pub mod decode;
pub mod error;
pub mod kb;
pub mod linker;
pub mod model;
mod par;
pub mod pipeline;
pub mod query_graph;
pub mod relation;
pub mod sparql;

pub use error::{EngineError, Stage};
