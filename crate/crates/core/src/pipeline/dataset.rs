//! Dataset records: one JSON document per line.
//!
//! A record carries the question text, optionally a pre-tokenized token
//! list (with `[CLS]` at position 0 and, for JUDGE questions, `[SEP]`
//! last — token counts must match the score fixtures), and optional
//! gold data: node annotations, the gold SPARQL, and the gold answer
//! set.

use std::io::BufRead;

use serde::{Deserialize, Serialize};

use crate::error::EngineError;
use crate::query_graph::{Node, NodeId, NodeTag, QueryGraphStructure, QueryType, Span};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeAnnotation {
    pub start: usize,
    pub end: usize,
    /// "V", "E" or "T".
    pub tag: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub uri: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetRecord {
    pub id: String,
    pub question: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tokens: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gold_sparql: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nodes: Option<Vec<NodeAnnotation>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gold_answers: Option<Vec<String>>,
}

impl DatasetRecord {
    /// Gold structure reconstructed from the node annotations, when
    /// present. Edges are not annotated at the node level; this exists
    /// for linker and fixture tooling, which attach edges separately.
    pub fn annotated_nodes(&self) -> Option<Vec<Node>> {
        let annotations = self.nodes.as_ref()?;
        let mut nodes: Vec<(Span, NodeTag, Option<String>)> = annotations
            .iter()
            .map(|a| {
                let tag = match a.tag.as_str() {
                    "E" => NodeTag::Entity,
                    "T" => NodeTag::Type,
                    _ => NodeTag::Variable,
                };
                (Span::new(a.start, a.end), tag, a.uri.clone())
            })
            .collect();
        nodes.sort_by_key(|(span, tag, _)| (span.start, span.end, *tag));
        Some(
            nodes
                .into_iter()
                .enumerate()
                .map(|(i, (span, tag, uri))| Node {
                    id: NodeId(i as u32),
                    span,
                    tag,
                    uri,
                })
                .collect(),
        )
    }

    /// Minimal structure holding just the annotated nodes (no edges);
    /// mainly for validation tooling.
    pub fn annotated_structure(&self, query_type: QueryType) -> Option<QueryGraphStructure> {
        let mut s = QueryGraphStructure::new(query_type);
        s.nodes = self.annotated_nodes()?;
        Some(s)
    }
}

/// Reads one record per non-empty line.
pub fn read_dataset(reader: impl BufRead) -> Result<Vec<DatasetRecord>, EngineError> {
    let mut records = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let record: DatasetRecord = serde_json::from_str(trimmed)
            .map_err(|e| EngineError::Input(format!("dataset line {}: {e}", idx + 1)))?;
        records.push(record);
    }
    Ok(records)
}

/// Whitespace-plus-punctuation tokenizer. Original casing is kept (the
/// linker needs it); matching lower-cases on demand. Interior
/// apostrophes survive so possessives stay one token.
pub fn tokenize(question: &str) -> Vec<String> {
    question
        .split_whitespace()
        .map(|w| {
            w.trim_matches(|c: char| !c.is_alphanumeric() && c != '\'')
                .to_string()
        })
        .filter(|w| !w.is_empty() && w.chars().any(|c| c.is_alphanumeric()))
        .collect()
}
