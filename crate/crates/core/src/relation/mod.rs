//! Relation extraction: bind a directed KB predicate to every structure
//! edge. The main algorithm is a beam search that alternates candidate
//! retrieval (neighbors of grounded nodes) with candidate ranking; a
//! k-hop enumeration baseline and an exhaustive oracle exist for
//! comparison and testing.

mod samples;
mod search;
pub mod synthetic;

pub use samples::{gen_ranking_samples, RankingSample};
pub use search::{
    baseline_re, beam_search_re, brute_force_re, retrieve, sample_edge, BaselineResult,
    BeamSearchResult, BruteForceResult, EXHAUSTIVE_GUARD,
};

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::kb::DirectedPredicate;
use crate::query_graph::{
    BoundEdge, Direction, EdgeKey, QueryGraph, QueryGraphStructure, SCORE_FLOOR,
};

/// Joins the tokens of a mention span into the text the rankers see.
pub fn mention_text(tokens: &[String], span: crate::query_graph::Span) -> String {
    tokens
        .get(span.start..span.end)
        .map(|t| t.join(" "))
        .unwrap_or_default()
}

/// Scores directed predicate candidates for one edge.
///
/// Every candidate receives exactly one score in `[0, 1]`; the output
/// is sorted by descending score with ties broken by predicate URI,
/// then direction. For a forward candidate the underlying model reads
/// `(q, m1, m2, p)`; for a reverse candidate `(q, m2, m1, p)`.
/// Implementations must be safe for concurrent read-only use.
pub trait Ranker: Send + Sync {
    fn rank(
        &self,
        candidates: &BTreeSet<DirectedPredicate>,
        question: &str,
        m1: &str,
        m2: &str,
    ) -> Vec<(DirectedPredicate, f64)>;
}

fn sort_ranked(ranked: &mut [(DirectedPredicate, f64)]) {
    ranked.sort_by(|a, b| {
        b.1.partial_cmp(&a.1)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| a.0.predicate.cmp(&b.0.predicate))
            .then_with(|| a.0.direction.cmp(&b.0.direction))
    });
}

/// Deterministic lexical ranker standing in for a trained scoring
/// model: token overlap between the predicate local name and the
/// question plus both mentions, with a small penalty on reverse
/// candidates to reflect mention order.
#[derive(Debug, Clone, Copy, Default)]
pub struct ReferenceRanker;

fn local_name(uri: &str) -> &str {
    let cut = uri.rfind(['/', '#', ':']).map(|i| i + 1).unwrap_or(0);
    &uri[cut..]
}

fn name_tokens(uri: &str) -> Vec<String> {
    local_name(uri)
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .collect()
}

impl Ranker for ReferenceRanker {
    fn rank(
        &self,
        candidates: &BTreeSet<DirectedPredicate>,
        question: &str,
        m1: &str,
        m2: &str,
    ) -> Vec<(DirectedPredicate, f64)> {
        let mut context: BTreeSet<String> = BTreeSet::new();
        for text in [question, m1, m2] {
            for word in text.split_whitespace() {
                let cleaned: String = word
                    .chars()
                    .filter(|c| c.is_alphanumeric())
                    .collect::<String>()
                    .to_lowercase();
                if !cleaned.is_empty() {
                    context.insert(cleaned);
                }
            }
        }
        let mut ranked: Vec<(DirectedPredicate, f64)> = candidates
            .iter()
            .map(|cand| {
                let toks = name_tokens(&cand.predicate);
                let overlap = toks.iter().filter(|t| context.contains(*t)).count();
                let mut score = (1.0 + overlap as f64 / toks.len().max(1) as f64) / 2.0;
                if cand.direction == Direction::Reverse {
                    score -= 0.01;
                }
                (cand.clone(), score.clamp(0.0, 1.0))
            })
            .collect();
        sort_ranked(&mut ranked);
        ranked
    }
}

/// One line of the ranker fixture file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RankerFixtureEntry {
    pub question_id: String,
    pub m1: String,
    pub m2: String,
    pub predicate: String,
    pub direction: Direction,
    pub score: f64,
}

/// Score table loaded from a fixture file, keyed by question id.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RankerFixture {
    pub entries: Vec<RankerFixtureEntry>,
}

impl RankerFixture {
    pub fn from_json(reader: impl std::io::Read) -> serde_json::Result<Self> {
        serde_json::from_reader(reader)
    }

    /// View of this fixture for a single question. Candidates with no
    /// entry score 0.
    pub fn for_question(&self, question_id: &str) -> FixtureRanker {
        let scores = self
            .entries
            .iter()
            .filter(|e| e.question_id == question_id)
            .map(|e| {
                (
                    (e.m1.clone(), e.m2.clone(), e.predicate.clone(), e.direction),
                    e.score,
                )
            })
            .collect();
        FixtureRanker { scores }
    }
}

/// Ranker driven by a fixture table for one question: each candidate
/// scores its `(m1, m2, predicate, direction)` entry, 0 when absent.
#[derive(Debug, Clone, Default)]
pub struct FixtureRanker {
    scores: BTreeMap<(String, String, String, Direction), f64>,
}

impl Ranker for FixtureRanker {
    fn rank(
        &self,
        candidates: &BTreeSet<DirectedPredicate>,
        _question: &str,
        m1: &str,
        m2: &str,
    ) -> Vec<(DirectedPredicate, f64)> {
        let mut ranked: Vec<(DirectedPredicate, f64)> = candidates
            .iter()
            .map(|cand| {
                let key = (
                    m1.to_string(),
                    m2.to_string(),
                    cand.predicate.clone(),
                    cand.direction,
                );
                (cand.clone(), self.scores.get(&key).copied().unwrap_or(0.0))
            })
            .collect();
        sort_ranked(&mut ranked);
        ranked
    }
}

/// A partially bound graph tracked during search: the bound edges in
/// binding order, the cached product score, and how many candidate
/// predicates were considered to reach it (the equal-score tie-break).
#[derive(Debug, Clone, PartialEq)]
pub struct ScoredSubgraph {
    pub edges: Vec<BoundEdge>,
    score: f64,
    pub candidates_considered: usize,
}

impl ScoredSubgraph {
    pub fn empty() -> Self {
        ScoredSubgraph {
            edges: Vec::new(),
            score: 1.0,
            candidates_considered: 0,
        }
    }

    pub fn score(&self) -> f64 {
        self.score
    }

    pub fn extended(
        &self,
        edge: EdgeKey,
        predicate: &str,
        direction: Direction,
        score: f64,
        candidates_seen: usize,
    ) -> Self {
        let mut edges = self.edges.clone();
        edges.push(BoundEdge {
            edge,
            predicate: predicate.to_string(),
            direction,
            score,
        });
        ScoredSubgraph {
            edges,
            score: self.score * score.max(SCORE_FLOOR),
            candidates_considered: self.candidates_considered + candidates_seen,
        }
    }

    /// Canonical text form used as the final ordering tie-break.
    pub fn serialization(&self) -> String {
        self.edges
            .iter()
            .map(|b| {
                let dir = match b.direction {
                    Direction::Forward => ">",
                    Direction::Reverse => "<",
                };
                format!("{}-{}{}{}", b.edge.a.0, b.edge.b.0, dir, b.predicate)
            })
            .collect::<Vec<_>>()
            .join(";")
    }

    pub fn into_query_graph(self, structure: &QueryGraphStructure) -> QueryGraph {
        QueryGraph {
            structure: structure.clone(),
            bindings: self.edges,
        }
    }
}

/// Total order used for beam truncation and the oracle argmax: score
/// descending, then fewer candidates considered, then serialization.
pub(crate) fn subgraph_order(a: &ScoredSubgraph, b: &ScoredSubgraph) -> std::cmp::Ordering {
    b.score()
        .partial_cmp(&a.score())
        .unwrap_or(std::cmp::Ordering::Equal)
        .then_with(|| a.candidates_considered.cmp(&b.candidates_considered))
        .then_with(|| a.serialization().cmp(&b.serialization()))
}

/// A beam: up to `width` subgraphs, kept sorted best-first.
#[derive(Debug, Clone)]
pub struct Beam {
    elements: Vec<ScoredSubgraph>,
    width: usize,
}

impl Beam {
    /// Starts from the single empty subgraph of score 1.
    pub fn new(width: usize) -> Self {
        Beam {
            elements: vec![ScoredSubgraph::empty()],
            width: width.max(1),
        }
    }

    pub fn elements(&self) -> &[ScoredSubgraph] {
        &self.elements
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn width(&self) -> usize {
        self.width
    }

    /// Replaces the beam with the best `width` of `candidates`.
    pub fn replace_with_topk(&mut self, mut candidates: Vec<ScoredSubgraph>) {
        candidates.sort_by(subgraph_order);
        candidates.truncate(self.width);
        self.elements = candidates;
    }
}
