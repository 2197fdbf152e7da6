//! Edge selection, candidate retrieval, the beam search itself, the
//! k-hop enumeration baseline, and the exhaustive oracle.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::error::SearchError;
use crate::kb::{match_pattern, Bindings, DirectedPredicate, Term, TripleStore};
use crate::par;
use crate::query_graph::{EdgeKey, NodeId, NodeTag, QueryGraph, QueryGraphStructure};

use super::{mention_text, subgraph_order, Beam, Ranker, ScoredSubgraph};

/// Candidate count plus ranked candidates for one beam element.
type Expansion = (usize, Vec<(DirectedPredicate, f64)>);

/// Default cap on exhaustive-search assignment space.
pub const EXHAUSTIVE_GUARD: u64 = 1_000_000;

fn grounded_nodes(structure: &QueryGraphStructure, determined: &[EdgeKey]) -> BTreeSet<NodeId> {
    let mut grounded: BTreeSet<NodeId> = structure
        .nodes
        .iter()
        .filter(|n| n.tag != NodeTag::Variable)
        .map(|n| n.id)
        .collect();
    for edge in determined {
        grounded.insert(edge.a);
        grounded.insert(edge.b);
    }
    grounded
}

/// Picks the next pending edge: among pending edges with at least one
/// grounded endpoint (non-variable, or touched by an already-determined
/// edge), the one with the lexicographically smallest id pair.
pub fn sample_edge(
    pending: &[EdgeKey],
    determined: &[EdgeKey],
    structure: &QueryGraphStructure,
) -> Result<EdgeKey, SearchError> {
    let grounded = grounded_nodes(structure, determined);
    pending
        .iter()
        .filter(|e| grounded.contains(&e.a) || grounded.contains(&e.b))
        .min_by_key(|e| (e.a, e.b))
        .copied()
        .ok_or(SearchError::DisconnectedStructure)
}

/// Builds the partially bound graph holding exactly the subgraph's
/// edges, for grounding variables via pattern matching.
fn partial_graph(structure: &QueryGraphStructure, subgraph: &ScoredSubgraph) -> QueryGraph {
    let mut s = structure.clone();
    s.edges = subgraph.edges.iter().map(|b| b.edge).collect();
    s.edges.sort();
    QueryGraph {
        structure: s,
        bindings: subgraph.edges.clone(),
    }
}

/// Terms a node can take under the partial graph: its own uri for
/// non-variables, otherwise the match bindings of the bound subgraph,
/// in term order, truncated to `cap`. `None` means the node is not
/// grounded at all.
fn node_bindings(
    store: &TripleStore,
    structure: &QueryGraphStructure,
    subgraph: &ScoredSubgraph,
    node: NodeId,
    cap: usize,
) -> Result<Option<Vec<Term>>, SearchError> {
    let n = structure
        .node(node)
        .ok_or(SearchError::UnknownEndpoint(node.0, node.0))?;
    if n.tag != NodeTag::Variable {
        let uri = n
            .uri
            .clone()
            .ok_or(SearchError::UnknownEndpoint(node.0, node.0))?;
        return Ok(Some(vec![Term::uri(uri)]));
    }
    let touched = subgraph.edges.iter().any(|b| b.edge.touches(node));
    if !touched {
        return Ok(None);
    }
    let graph = partial_graph(structure, subgraph);
    let matches = match_pattern(store, &graph, &Bindings::new())
        .map_err(|_| SearchError::UnknownEndpoint(node.0, node.0))?;
    let mut terms: BTreeSet<Term> = BTreeSet::new();
    for m in matches {
        if let Some(t) = m.get(&node) {
            terms.insert(t.clone());
        }
    }
    Ok(Some(terms.into_iter().take(cap).collect()))
}

/// Retrieves the directed candidate predicates for the edge `(n1, n2)`
/// given the bindings the subgraph already entails.
///
/// For every binding of a grounded endpoint, its adjacent predicates
/// join the candidate set oriented relative to `(n1, n2)`: a triple out
/// of a binding of `n1` (or into a binding of `n2`) is `n1 -> n2`, and
/// symmetrically. A grounded endpoint with zero bindings contributes
/// nothing, so a dead subgraph retrieves an empty set and drops out.
pub fn retrieve(
    store: &TripleStore,
    subgraph: &ScoredSubgraph,
    n1: NodeId,
    n2: NodeId,
    structure: &QueryGraphStructure,
    binding_cap: usize,
) -> Result<BTreeSet<DirectedPredicate>, SearchError> {
    let mut candidates = BTreeSet::new();
    let b1 = node_bindings(store, structure, subgraph, n1, binding_cap)?;
    let b2 = node_bindings(store, structure, subgraph, n2, binding_cap)?;
    if b1.is_none() && b2.is_none() {
        return Err(SearchError::DisconnectedStructure);
    }
    if let Some(terms) = b1 {
        for term in terms {
            for pred in store.neighbor_predicates_term(&term) {
                // forward from n1 keeps its direction
                candidates.insert(pred);
            }
        }
    }
    if let Some(terms) = b2 {
        for term in terms {
            for pred in store.neighbor_predicates_term(&term) {
                candidates.insert(DirectedPredicate {
                    predicate: pred.predicate,
                    direction: pred.direction.flip(),
                });
            }
        }
    }
    Ok(candidates)
}

/// Result of a beam-search run: up to `b` complete graphs best-first,
/// plus the retrieval sizes observed (one entry per retrieve call).
#[derive(Debug, Clone)]
pub struct BeamSearchResult {
    pub beam: Vec<QueryGraph>,
    pub retrieval_sizes: Vec<usize>,
}

impl BeamSearchResult {
    /// Total candidates retrieved across all steps and beam elements.
    pub fn total_candidates(&self) -> usize {
        self.retrieval_sizes.iter().sum()
    }

    pub fn best(&self) -> Option<&QueryGraph> {
        self.beam.first()
    }
}

/// Beam-search relation extraction.
///
/// Starting from the single empty subgraph, each step picks one
/// pending edge, retrieves candidates per beam element under that
/// element's bindings, ranks them, extends, and keeps the best
/// `beam_width` subgraphs by product score. Ranking across beam
/// elements runs in parallel when the `parallel` feature is on. An
/// exhausted beam (every element retrieving nothing) returns empty:
/// the question is unanswerable.
pub fn beam_search_re(
    question: &str,
    tokens: &[String],
    structure: &QueryGraphStructure,
    store: &TripleStore,
    ranker: &dyn Ranker,
    beam_width: usize,
    binding_cap: usize,
) -> Result<BeamSearchResult, SearchError> {
    let mut pending: Vec<EdgeKey> = structure.edges.clone();
    pending.sort();
    let mut determined: Vec<EdgeKey> = Vec::new();
    let mut beam = Beam::new(beam_width);
    let mut retrieval_sizes = Vec::new();

    while !pending.is_empty() {
        let edge = sample_edge(&pending, &determined, structure)?;
        let m1 = mention_text(tokens, structure.node(edge.a).unwrap().span);
        let m2 = mention_text(tokens, structure.node(edge.b).unwrap().span);

        let expansions: Vec<Result<Expansion, SearchError>> =
            par::map_indexed(beam.elements().len(), |idx| {
                let element = &beam.elements()[idx];
                let candidates = retrieve(store, element, edge.a, edge.b, structure, binding_cap)?;
                let ranked = ranker.rank(&candidates, question, &m1, &m2);
                Ok((candidates.len(), ranked))
            });

        let mut next = Vec::new();
        for (element, expansion) in beam.elements().iter().zip(expansions) {
            let (seen, ranked) = expansion?;
            retrieval_sizes.push(seen);
            for (cand, score) in ranked {
                next.push(element.extended(edge, &cand.predicate, cand.direction, score, seen));
            }
        }
        if next.is_empty() {
            return Ok(BeamSearchResult {
                beam: Vec::new(),
                retrieval_sizes,
            });
        }
        beam.replace_with_topk(next);
        pending.retain(|e| *e != edge);
        determined.push(edge);
    }

    Ok(BeamSearchResult {
        beam: beam
            .elements()
            .iter()
            .cloned()
            .map(|s| s.into_query_graph(structure))
            .collect(),
        retrieval_sizes,
    })
}

/// Structure-graph distance from every node to the nearest
/// non-variable node.
fn anchor_distances(structure: &QueryGraphStructure) -> BTreeMap<NodeId, (usize, NodeId)> {
    let mut dist: BTreeMap<NodeId, (usize, NodeId)> = BTreeMap::new();
    let mut queue = VecDeque::new();
    for node in &structure.nodes {
        if node.tag != NodeTag::Variable {
            dist.insert(node.id, (0, node.id));
            queue.push_back(node.id);
        }
    }
    while let Some(u) = queue.pop_front() {
        let (d, anchor) = dist[&u];
        for edge in structure.edges_touching(u) {
            let v = edge.other(u).unwrap();
            let better = match dist.get(&v) {
                None => true,
                Some((dv, av)) => d + 1 < *dv || (d + 1 == *dv && anchor < *av),
            };
            if better {
                dist.insert(v, (d + 1, anchor));
                queue.push_back(v);
            }
        }
    }
    dist
}

/// Result of the k-hop baseline: the per-edge argmax composition (none
/// when some edge had no candidates), the per-edge enumerated candidate
/// counts, and their total.
#[derive(Debug, Clone)]
pub struct BaselineResult {
    pub graph: Option<QueryGraph>,
    pub per_edge_candidates: Vec<usize>,
}

impl BaselineResult {
    pub fn total_enumerated(&self) -> usize {
        self.per_edge_candidates.iter().sum()
    }
}

/// k-hop retrieval baseline: each edge independently takes all
/// predicates `k` hops from its nearest non-variable anchor in the KB
/// (`k` the edge's structure distance to that anchor), ranks them once,
/// and keeps the top candidate. One-hop edges reduce to exactly the
/// first beam-search step. The enumerated count per edge is the number
/// of predicate instances discovered at hop `k`, the quantity that
/// grows as `n^k` on degree-n stores.
pub fn baseline_re(
    question: &str,
    tokens: &[String],
    structure: &QueryGraphStructure,
    store: &TripleStore,
    ranker: &dyn Ranker,
    max_hops: usize,
) -> Result<BaselineResult, SearchError> {
    let distances = anchor_distances(structure);
    let mut bindings = Vec::new();
    let mut per_edge = Vec::new();

    for edge in &structure.edges {
        let (da, db) = match (distances.get(&edge.a), distances.get(&edge.b)) {
            (Some(a), Some(b)) => (*a, *b),
            _ => return Err(SearchError::DisconnectedStructure),
        };
        let (hops, anchor) = if da.0 <= db.0 {
            (da.0 + 1, da.1)
        } else {
            (db.0 + 1, db.1)
        };
        if hops > max_hops {
            return Err(SearchError::HopDepthExceeded {
                depth: hops,
                cap: max_hops,
            });
        }

        let (count, candidates) = if hops == 1 {
            // identical to the first beam step for this edge
            let c = retrieve(
                store,
                &ScoredSubgraph::empty(),
                edge.a,
                edge.b,
                structure,
                usize::MAX,
            )?;
            (c.len(), c)
        } else {
            let anchor_uri = structure
                .node(anchor)
                .and_then(|n| n.uri.clone())
                .ok_or(SearchError::UnknownEndpoint(anchor.0, anchor.0))?;
            enumerate_k_hop(store, &anchor_uri, hops)
        };
        per_edge.push(count);

        let m1 = mention_text(tokens, structure.node(edge.a).unwrap().span);
        let m2 = mention_text(tokens, structure.node(edge.b).unwrap().span);
        let ranked = ranker.rank(&candidates, question, &m1, &m2);
        match ranked.into_iter().next() {
            Some((cand, score)) => bindings.push(crate::query_graph::BoundEdge {
                edge: *edge,
                predicate: cand.predicate,
                direction: cand.direction,
                score,
            }),
            None => {
                return Ok(BaselineResult {
                    graph: None,
                    per_edge_candidates: per_edge,
                })
            }
        }
    }

    Ok(BaselineResult {
        graph: Some(QueryGraph {
            structure: structure.clone(),
            bindings,
        }),
        per_edge_candidates: per_edge,
    })
}

/// Breadth-first enumeration of predicates exactly `k` hops from the
/// anchor, following both triple directions but never re-entering
/// visited nodes. Returns the instance count at hop `k` plus the
/// distinct predicates offered in both directions.
fn enumerate_k_hop(
    store: &TripleStore,
    anchor: &str,
    k: usize,
) -> (usize, BTreeSet<DirectedPredicate>) {
    let mut visited: BTreeSet<Term> = BTreeSet::new();
    let start = Term::uri(anchor);
    visited.insert(start.clone());
    let mut frontier: Vec<Term> = vec![start];
    let mut count = 0usize;
    let mut preds: BTreeSet<String> = BTreeSet::new();

    for hop in 1..=k {
        let mut next: Vec<Term> = Vec::new();
        let mut discovered = 0usize;
        let mut hop_preds: BTreeSet<String> = BTreeSet::new();
        for node in &frontier {
            let mut reach = |p: &str, other: &Term| {
                if !visited.contains(other) {
                    discovered += 1;
                    hop_preds.insert(p.to_string());
                    next.push(other.clone());
                }
            };
            for (p, o) in store.outgoing(node) {
                reach(p, o);
            }
            for (p, s) in store.incoming(node) {
                reach(p, s);
            }
        }
        for t in &next {
            visited.insert(t.clone());
        }
        next.sort();
        next.dedup();
        frontier = next;
        if hop == k {
            count = discovered;
            preds = hop_preds;
        }
    }

    let mut out = BTreeSet::new();
    for p in preds {
        out.insert(DirectedPredicate::forward(p.clone()));
        out.insert(DirectedPredicate::reverse(p));
    }
    (count, out)
}

/// Result of the exhaustive oracle.
#[derive(Debug, Clone)]
pub struct BruteForceResult {
    pub graph: Option<QueryGraph>,
    /// Complete assignments enumerated.
    pub leaves: u64,
}

/// Exhaustively enumerates every joint predicate assignment reachable
/// under the partial-binding retrieval semantics and returns the global
/// argmax by product score, ordered exactly like the beam. Refuses once
/// the explored assignment space passes `guard`.
pub fn brute_force_re(
    question: &str,
    tokens: &[String],
    structure: &QueryGraphStructure,
    store: &TripleStore,
    ranker: &dyn Ranker,
    guard: u64,
) -> Result<BruteForceResult, SearchError> {
    struct Dfs<'a> {
        question: &'a str,
        tokens: &'a [String],
        structure: &'a QueryGraphStructure,
        store: &'a TripleStore,
        ranker: &'a dyn Ranker,
        guard: u64,
        leaves: u64,
        best: Option<ScoredSubgraph>,
    }

    impl Dfs<'_> {
        fn run(
            &mut self,
            pending: &[EdgeKey],
            determined: &[EdgeKey],
            current: &ScoredSubgraph,
        ) -> Result<(), SearchError> {
            if pending.is_empty() {
                self.leaves += 1;
                if self.leaves > self.guard {
                    return Err(SearchError::SpaceExceeded {
                        size: self.leaves,
                        guard: self.guard,
                    });
                }
                let better = match &self.best {
                    None => true,
                    Some(b) => subgraph_order(current, b) == std::cmp::Ordering::Less,
                };
                if better {
                    self.best = Some(current.clone());
                }
                return Ok(());
            }
            let edge = sample_edge(pending, determined, self.structure)?;
            let rest: Vec<EdgeKey> = pending.iter().copied().filter(|e| *e != edge).collect();
            let mut next_determined = determined.to_vec();
            next_determined.push(edge);
            let candidates = retrieve(
                self.store,
                current,
                edge.a,
                edge.b,
                self.structure,
                usize::MAX,
            )?;
            let m1 = mention_text(self.tokens, self.structure.node(edge.a).unwrap().span);
            let m2 = mention_text(self.tokens, self.structure.node(edge.b).unwrap().span);
            let seen = candidates.len();
            for (cand, score) in self.ranker.rank(&candidates, self.question, &m1, &m2) {
                let extended = current.extended(edge, &cand.predicate, cand.direction, score, seen);
                self.run(&rest, &next_determined, &extended)?;
            }
            Ok(())
        }
    }

    let mut pending: Vec<EdgeKey> = structure.edges.clone();
    pending.sort();
    let mut dfs = Dfs {
        question,
        tokens,
        structure,
        store,
        ranker,
        guard,
        leaves: 0,
        best: None,
    };
    dfs.run(&pending, &[], &ScoredSubgraph::empty())?;
    // the empty structure has one complete (empty) assignment
    if structure.edges.is_empty() {
        dfs.best = Some(ScoredSubgraph::empty());
    }
    Ok(BruteForceResult {
        graph: dfs.best.map(|s| s.into_query_graph(structure)),
        leaves: dfs.leaves.max(1),
    })
}
