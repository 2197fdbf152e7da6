//! Ranking-model training samples generated from gold query graphs.
//!
//! For every gold edge, the gold graph with that edge's predicate freed
//! is executed in both directions; the gold predicate in gold order is
//! the single positive, and every other candidate (in both mention
//! orders) becomes a negative. The swapped-order copies teach the
//! ranker that mention order carries direction.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::SearchError;
use crate::kb::{match_free_predicate, TripleStore};
use crate::query_graph::{Direction, QueryGraph};

use super::mention_text;

/// One ranking-model training sample.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RankingSample {
    pub question: String,
    pub mention_a: String,
    pub mention_b: String,
    pub predicate: String,
    pub label: u8,
}

/// Generates ranking samples from a fully bound gold graph that the
/// store satisfies. Per edge: exactly one positive, deduplicated
/// negatives, no cross-edge mixing.
pub fn gen_ranking_samples(
    question: &str,
    tokens: &[String],
    gold: &QueryGraph,
    store: &TripleStore,
) -> Result<Vec<RankingSample>, SearchError> {
    let mut samples = Vec::new();
    for binding in &gold.bindings {
        let edge = binding.edge;
        // orient mentions by the gold direction
        let (a_id, b_id) = binding.oriented();
        let mention_a = mention_text(tokens, gold.structure.node(a_id).unwrap().span);
        let mention_b = mention_text(tokens, gold.structure.node(b_id).unwrap().span);
        let same_dir = binding.direction;
        let p_pos = match_free_predicate(store, gold, edge, same_dir)
            .map_err(|_| SearchError::UnsatisfiableGold(edge.a.0, edge.b.0))?;
        let p_rev = match_free_predicate(store, gold, edge, flip(same_dir))
            .map_err(|_| SearchError::UnsatisfiableGold(edge.a.0, edge.b.0))?;
        if !p_pos.contains(&binding.predicate) {
            return Err(SearchError::UnsatisfiableGold(edge.a.0, edge.b.0));
        }

        samples.push(RankingSample {
            question: question.to_string(),
            mention_a: mention_a.clone(),
            mention_b: mention_b.clone(),
            predicate: binding.predicate.clone(),
            label: 1,
        });

        let mut negatives: BTreeSet<RankingSample> = BTreeSet::new();
        let negative = |ma: &str, mb: &str, p: &str| RankingSample {
            question: question.to_string(),
            mention_a: ma.to_string(),
            mention_b: mb.to_string(),
            predicate: p.to_string(),
            label: 0,
        };
        for p in p_pos.iter().filter(|p| **p != binding.predicate) {
            negatives.insert(negative(&mention_a, &mention_b, p));
        }
        for p in &p_rev {
            negatives.insert(negative(&mention_b, &mention_a, p));
        }
        // augmentation: swapped-order copies of both candidate sets
        for p in p_rev.iter().filter(|p| **p != binding.predicate) {
            negatives.insert(negative(&mention_a, &mention_b, p));
        }
        for p in &p_pos {
            negatives.insert(negative(&mention_b, &mention_a, p));
        }
        samples.extend(negatives);
    }
    Ok(samples)
}

fn flip(d: Direction) -> Direction {
    match d {
        Direction::Forward => Direction::Reverse,
        Direction::Reverse => Direction::Forward,
    }
}
