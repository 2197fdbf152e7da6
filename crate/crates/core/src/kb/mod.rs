//! Immutable in-memory triple store with adjacency indexes, a
//! backtracking conjunctive pattern matcher, and a query executor.
//!
//! The store stands in for a remote SPARQL endpoint: it is loaded once
//! from a text file, indexed, and then shared read-only across threads.

mod load;
mod matcher;

pub use load::{load_triples, KbFormat};
pub use matcher::{match_free_predicate, match_pattern, match_pattern_fixed_order, Bindings};

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::StoreError;
use crate::query_graph::{Direction, QueryGraph, QueryType};

/// A graph term: URI or literal string. Literals compare by exact
/// string equality; there is no datatype coercion.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Term {
    Uri(String),
    Literal(String),
}

impl Term {
    pub fn uri(s: impl Into<String>) -> Self {
        Term::Uri(s.into())
    }

    pub fn literal(s: impl Into<String>) -> Self {
        Term::Literal(s.into())
    }

    pub fn as_str(&self) -> &str {
        match self {
            Term::Uri(s) | Term::Literal(s) => s,
        }
    }

    pub fn is_uri(&self) -> bool {
        matches!(self, Term::Uri(_))
    }
}

impl std::fmt::Display for Term {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One (subject, predicate, object) statement. Subject and predicate
/// are URIs; the object may be a URI or a literal.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Triple {
    pub subject: String,
    pub predicate: String,
    pub object: Term,
}

impl Triple {
    pub fn new(subject: impl Into<String>, predicate: impl Into<String>, object: Term) -> Self {
        Triple {
            subject: subject.into(),
            predicate: predicate.into(),
            object,
        }
    }
}

/// A predicate with an explicit orientation relative to an `(a, b)`
/// node pair. There is no undirected predicate.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct DirectedPredicate {
    pub predicate: String,
    pub direction: Direction,
}

impl DirectedPredicate {
    pub fn forward(p: impl Into<String>) -> Self {
        DirectedPredicate {
            predicate: p.into(),
            direction: Direction::Forward,
        }
    }

    pub fn reverse(p: impl Into<String>) -> Self {
        DirectedPredicate {
            predicate: p.into(),
            direction: Direction::Reverse,
        }
    }
}

/// Result of executing a query graph.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Answer {
    /// Distinct terms bound to the target node.
    Select(BTreeSet<String>),
    /// Cardinality of the distinct target binding set.
    Count(usize),
    /// Whether any match exists.
    Boolean(bool),
}

impl Answer {
    /// Renders the answer as a string set for metric comparison;
    /// booleans and counts become singletons.
    pub fn as_string_set(&self) -> BTreeSet<String> {
        match self {
            Answer::Select(s) => s.clone(),
            Answer::Count(n) => BTreeSet::from([n.to_string()]),
            Answer::Boolean(b) => BTreeSet::from([b.to_string()]),
        }
    }
}

/// Immutable triple store. All indexes are built at load time and are
/// exactly consistent with the triple set; queries are read-only and
/// safe to run concurrently.
#[derive(Debug, Clone, Default)]
pub struct TripleStore {
    triples: Vec<Triple>,
    /// subject -> [(predicate, object)]
    out_index: BTreeMap<Term, Vec<(String, Term)>>,
    /// object -> [(predicate, subject)]
    in_index: BTreeMap<Term, Vec<(String, Term)>>,
    /// (node, direction) -> distinct predicates
    pred_index: BTreeMap<(Term, Direction), BTreeSet<String>>,
    /// predicate -> [(subject, object)]
    by_pred: BTreeMap<String, Vec<(Term, Term)>>,
    /// prefix declarations collected from the source file
    prefixes: BTreeMap<String, String>,
}

impl TripleStore {
    /// Builds a store from triples, collapsing duplicates.
    pub fn from_triples(triples: impl IntoIterator<Item = Triple>) -> Self {
        let set: BTreeSet<Triple> = triples.into_iter().collect();
        let mut store = TripleStore {
            triples: set.into_iter().collect(),
            ..TripleStore::default()
        };
        store.build_indexes();
        store
    }

    fn build_indexes(&mut self) {
        for t in &self.triples {
            let subj = Term::uri(t.subject.clone());
            self.out_index
                .entry(subj.clone())
                .or_default()
                .push((t.predicate.clone(), t.object.clone()));
            self.in_index
                .entry(t.object.clone())
                .or_default()
                .push((t.predicate.clone(), subj.clone()));
            self.pred_index
                .entry((subj.clone(), Direction::Forward))
                .or_default()
                .insert(t.predicate.clone());
            self.pred_index
                .entry((t.object.clone(), Direction::Reverse))
                .or_default()
                .insert(t.predicate.clone());
            self.by_pred
                .entry(t.predicate.clone())
                .or_default()
                .push((subj, t.object.clone()));
        }
    }

    pub(crate) fn set_prefixes(&mut self, prefixes: BTreeMap<String, String>) {
        self.prefixes = prefixes;
    }

    pub fn prefixes(&self) -> &BTreeMap<String, String> {
        &self.prefixes
    }

    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    pub fn triples(&self) -> &[Triple] {
        &self.triples
    }

    /// Every term occurring as a subject or object, in sorted order.
    pub fn universe(&self) -> BTreeSet<Term> {
        let mut set = BTreeSet::new();
        for t in &self.triples {
            set.insert(Term::uri(t.subject.clone()));
            set.insert(t.object.clone());
        }
        set
    }

    /// True if `uri` occurs as a subject or object of any triple.
    pub fn contains_node(&self, uri: &str) -> bool {
        let key = Term::uri(uri);
        self.out_index.contains_key(&key) || self.in_index.contains_key(&key)
    }

    pub fn outgoing(&self, node: &Term) -> &[(String, Term)] {
        self.out_index.get(node).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn incoming(&self, node: &Term) -> &[(String, Term)] {
        self.in_index.get(node).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn triples_with_predicate(&self, predicate: &str) -> &[(Term, Term)] {
        self.by_pred
            .get(predicate)
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    /// Distinct directed predicates incident to `node`, oriented so that
    /// `Forward` means the node is the subject.
    pub fn neighbor_predicates_term(&self, node: &Term) -> BTreeSet<DirectedPredicate> {
        let mut out = BTreeSet::new();
        if let Some(preds) = self.pred_index.get(&(node.clone(), Direction::Forward)) {
            for p in preds {
                out.insert(DirectedPredicate::forward(p.clone()));
            }
        }
        if let Some(preds) = self.pred_index.get(&(node.clone(), Direction::Reverse)) {
            for p in preds {
                out.insert(DirectedPredicate::reverse(p.clone()));
            }
        }
        out
    }

    /// Largest directed-predicate neighborhood over all nodes. Used by
    /// the per-step candidate bound check.
    pub fn max_degree(&self) -> usize {
        self.universe()
            .iter()
            .map(|t| self.neighbor_predicates_term(t).len())
            .max()
            .unwrap_or(0)
    }

    pub fn holds(&self, subject: &Term, predicate: &str, object: &Term) -> bool {
        self.outgoing(subject)
            .iter()
            .any(|(p, o)| p == predicate && o == object)
    }
}

/// Directed predicates adjacent to `node`: `(p, forward)` for triples
/// out of it, `(p, reverse)` for triples into it. Unknown nodes yield
/// the empty set.
pub fn neighbor_predicates(store: &TripleStore, node: &str) -> BTreeSet<DirectedPredicate> {
    store.neighbor_predicates_term(&Term::uri(node))
}

/// Executes a fully bound query graph.
///
/// SELECT yields the distinct terms bound to the target, COUNT their
/// cardinality, and JUDGE whether any match exists.
pub fn execute(store: &TripleStore, graph: &QueryGraph) -> Result<Answer, StoreError> {
    let qt = graph.structure.query_type;
    if qt != QueryType::Judge && graph.structure.target.is_none() {
        return Err(StoreError::MissingTarget);
    }
    let matches = match_pattern(store, graph, &Bindings::new())?;
    match qt {
        QueryType::Judge => Ok(Answer::Boolean(!matches.is_empty())),
        QueryType::Select | QueryType::Count => {
            let target = graph.structure.target.expect("checked above");
            let mut values = BTreeSet::new();
            for m in &matches {
                if let Some(term) = m.get(&target) {
                    values.insert(term.as_str().to_string());
                } else if let Some(node) = graph.structure.node(target) {
                    // Non-variable targets bind to their own uri.
                    if let Some(uri) = &node.uri {
                        values.insert(uri.clone());
                    }
                }
            }
            if qt == QueryType::Select {
                Ok(Answer::Select(values))
            } else {
                Ok(Answer::Count(values.len()))
            }
        }
    }
}
