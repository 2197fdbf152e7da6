//! Backtracking conjunctive pattern matcher over the adjacency indexes.
//!
//! Edges are joined most-constrained-first: at every step the edge with
//! the fewest candidate triples under the current bindings is resolved
//! next. Any join order yields the same binding set; a fixed-order
//! variant exists so tests can check exactly that.

use std::collections::BTreeSet;

use crate::error::StoreError;
use crate::query_graph::{Direction, EdgeKey, NodeId, NodeTag, QueryGraph};

use super::{Term, TripleStore};

/// Variable assignment produced by the matcher.
pub type Bindings = std::collections::BTreeMap<NodeId, Term>;

#[derive(Debug, Clone, PartialEq, Eq)]
enum Elem {
    Const(Term),
    Var(NodeId),
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Pred {
    Const(String),
    Free,
}

#[derive(Debug, Clone)]
struct PatEdge {
    subject: Elem,
    predicate: Pred,
    object: Elem,
}

fn node_elem(graph: &QueryGraph, id: NodeId) -> Result<Elem, StoreError> {
    let node = graph
        .structure
        .node(id)
        .ok_or_else(|| StoreError::UnboundEdge(format!("unknown node {id}")))?;
    match (&node.tag, &node.uri) {
        (NodeTag::Variable, _) => Ok(Elem::Var(id)),
        (_, Some(uri)) => Ok(Elem::Const(Term::uri(uri.clone()))),
        (_, None) => Err(StoreError::UnboundEdge(format!(
            "non-variable node {id} has no uri"
        ))),
    }
}

fn pattern_edges(graph: &QueryGraph, skip: Option<EdgeKey>) -> Result<Vec<PatEdge>, StoreError> {
    let mut edges = Vec::new();
    for key in &graph.structure.edges {
        if Some(*key) == skip {
            continue;
        }
        let binding = graph
            .binding_for(*key)
            .ok_or_else(|| StoreError::UnboundEdge(key.to_string()))?;
        let (s_id, o_id) = binding.oriented();
        edges.push(PatEdge {
            subject: node_elem(graph, s_id)?,
            predicate: Pred::Const(binding.predicate.clone()),
            object: node_elem(graph, o_id)?,
        });
    }
    Ok(edges)
}

fn resolve(elem: &Elem, bound: &Bindings) -> Option<Term> {
    match elem {
        Elem::Const(t) => Some(t.clone()),
        Elem::Var(v) => bound.get(v).cloned(),
    }
}

/// Candidate (subject, predicate, object) rows for one edge under the
/// current bindings.
fn candidates(store: &TripleStore, edge: &PatEdge, bound: &Bindings) -> Vec<(Term, String, Term)> {
    let subj = resolve(&edge.subject, bound);
    let obj = resolve(&edge.object, bound);
    let pred_matches = |p: &str| match &edge.predicate {
        Pred::Const(c) => c == p,
        Pred::Free => true,
    };

    match (subj, obj) {
        (Some(s), Some(o)) => store
            .outgoing(&s)
            .iter()
            .filter(|(p, object)| pred_matches(p) && *object == o)
            .map(|(p, _)| (s.clone(), p.clone(), o.clone()))
            .collect(),
        (Some(s), None) => store
            .outgoing(&s)
            .iter()
            .filter(|(p, _)| pred_matches(p))
            .map(|(p, o)| (s.clone(), p.clone(), o.clone()))
            .collect(),
        (None, Some(o)) => store
            .incoming(&o)
            .iter()
            .filter(|(p, _)| pred_matches(p))
            .map(|(p, s)| (s.clone(), p.clone(), o.clone()))
            .collect(),
        (None, None) => match &edge.predicate {
            Pred::Const(p) => store
                .triples_with_predicate(p)
                .iter()
                .map(|(s, o)| (s.clone(), p.clone(), o.clone()))
                .collect(),
            Pred::Free => store
                .triples()
                .iter()
                .map(|t| {
                    (
                        Term::uri(t.subject.clone()),
                        t.predicate.clone(),
                        t.object.clone(),
                    )
                })
                .collect(),
        },
    }
}

fn bind_elem(elem: &Elem, value: &Term, bound: &mut Bindings) -> Option<NodeId> {
    match elem {
        Elem::Const(_) => None,
        Elem::Var(v) => {
            if bound.contains_key(v) {
                None
            } else {
                bound.insert(*v, value.clone());
                Some(*v)
            }
        }
    }
}

struct Search<'a> {
    store: &'a TripleStore,
    edges: Vec<PatEdge>,
    most_constrained: bool,
    /// Accumulates (bindings, free predicate if any).
    results: BTreeSet<(Bindings, Option<String>)>,
}

impl Search<'_> {
    fn run(&mut self, seed: &Bindings) {
        let mut bound = seed.clone();
        let remaining: Vec<usize> = (0..self.edges.len()).collect();
        self.step(&mut bound, &remaining, None);
    }

    fn step(&mut self, bound: &mut Bindings, remaining: &[usize], free: Option<String>) {
        if remaining.is_empty() {
            self.results.insert((bound.clone(), free));
            return;
        }
        let pick_pos = if self.most_constrained {
            remaining
                .iter()
                .enumerate()
                .min_by_key(|(_, &idx)| candidates(self.store, &self.edges[idx], bound).len())
                .map(|(pos, _)| pos)
                .unwrap_or(0)
        } else {
            0
        };
        let edge_idx = remaining[pick_pos];
        let rest: Vec<usize> = remaining
            .iter()
            .copied()
            .filter(|&i| i != edge_idx)
            .collect();
        let edge = self.edges[edge_idx].clone();
        for (s, p, o) in candidates(self.store, &edge, bound) {
            let added_s = bind_elem(&edge.subject, &s, bound);
            // A self-join variable (same var on both ends) must match
            // the value already bound for the subject.
            if resolve(&edge.object, bound)
                .map(|t| t != o)
                .unwrap_or(false)
            {
                if let Some(v) = added_s {
                    bound.remove(&v);
                }
                continue;
            }
            let added_o = bind_elem(&edge.object, &o, bound);
            let next_free = match (&edge.predicate, &free) {
                (Pred::Free, None) => Some(p.clone()),
                _ => free.clone(),
            };
            self.step(bound, &rest, next_free);
            if let Some(v) = added_o {
                bound.remove(&v);
            }
            if let Some(v) = added_s {
                bound.remove(&v);
            }
        }
    }
}

fn run_match(
    store: &TripleStore,
    graph: &QueryGraph,
    seed: &Bindings,
    most_constrained: bool,
) -> Result<BTreeSet<Bindings>, StoreError> {
    let mut search = Search {
        store,
        edges: pattern_edges(graph, None)?,
        most_constrained,
        results: BTreeSet::new(),
    };
    search.run(seed);
    Ok(search.results.into_iter().map(|(b, _)| b).collect())
}

/// Finds every assignment of terms to the graph's variables, consistent
/// with `seed`, such that each bound edge (oriented by its direction)
/// is a triple in the store. No match means an empty set, not an error.
pub fn match_pattern(
    store: &TripleStore,
    graph: &QueryGraph,
    seed: &Bindings,
) -> Result<BTreeSet<Bindings>, StoreError> {
    run_match(store, graph, seed, true)
}

/// Same as [`match_pattern`] but joining edges in declaration order;
/// exists to check join-order invariance.
pub fn match_pattern_fixed_order(
    store: &TripleStore,
    graph: &QueryGraph,
    seed: &Bindings,
) -> Result<BTreeSet<Bindings>, StoreError> {
    run_match(store, graph, seed, false)
}

/// Replaces the predicate of `edge` with a free slot oriented
/// `direction` across `(edge.a, edge.b)`, keeps every other binding,
/// and returns the distinct predicates that satisfy the pattern.
pub fn match_free_predicate(
    store: &TripleStore,
    graph: &QueryGraph,
    edge: EdgeKey,
    direction: Direction,
) -> Result<BTreeSet<String>, StoreError> {
    let mut edges = pattern_edges(graph, Some(edge))?;
    let (s_id, o_id) = match direction {
        Direction::Forward => (edge.a, edge.b),
        Direction::Reverse => (edge.b, edge.a),
    };
    edges.push(PatEdge {
        subject: node_elem(graph, s_id)?,
        predicate: Pred::Free,
        object: node_elem(graph, o_id)?,
    });
    let mut search = Search {
        store,
        edges,
        most_constrained: true,
        results: BTreeSet::new(),
    };
    search.run(&Bindings::new());
    Ok(search
        .results
        .into_iter()
        .filter_map(|(_, free)| free)
        .collect())
}
