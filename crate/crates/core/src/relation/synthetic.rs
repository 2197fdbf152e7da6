//! Synthetic stores and structures for scaling reports and tests: a
//! degree-n tree whose k-hop chains make the baseline's candidate
//! blowup directly countable.

use crate::kb::{Term, Triple, TripleStore};
use crate::query_graph::{Node, NodeId, NodeTag, QueryGraphStructure, QueryType, Span};

/// Degree-n tree of the given depth rooted at `dbr:hub`, with a
/// distinct predicate on every edge so hop-k discoveries count exactly
/// n^k.
pub fn star_store(n: usize, depth: usize) -> TripleStore {
    let mut triples = Vec::new();
    let mut frontier = vec!["dbr:hub".to_string()];
    let mut next_id = 0usize;
    for level in 1..=depth {
        let mut next = Vec::new();
        for parent in &frontier {
            for _ in 0..n {
                let child = format!("dbr:v{level}_{next_id}");
                let pred = format!("dbp:q{level}_{next_id}");
                next_id += 1;
                triples.push(Triple::new(parent.clone(), pred, Term::uri(child.clone())));
                next.push(child);
            }
        }
        frontier = next;
    }
    TripleStore::from_triples(triples)
}

/// Chain structure `hub - ?x1 - ... - ?xk`; the j-th edge sits j hops
/// from the anchor.
pub fn hub_chain_structure(k: usize) -> QueryGraphStructure {
    let mut s = QueryGraphStructure::new(QueryType::Select);
    s.nodes = vec![Node::new(NodeId(0), Span::new(1, 2), NodeTag::Entity).with_uri("dbr:hub")];
    for i in 1..=k {
        s.nodes.push(Node::new(
            NodeId(i as u32),
            Span::new(i + 1, i + 2),
            NodeTag::Variable,
        ));
        s.add_edge(NodeId((i - 1) as u32), NodeId(i as u32));
    }
    s.target = Some(NodeId(k as u32));
    s
}

/// Token list matching [`hub_chain_structure`] spans up to k = 3.
pub fn star_tokens() -> Vec<String> {
    ["[CLS]", "hub", "x1", "x2", "x3"]
        .iter()
        .map(|s| s.to_string())
        .collect()
}
