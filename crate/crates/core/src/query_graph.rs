//! Query-graph data model: nodes with mention spans and tags, unlabeled
//! structure edges, and predicate-bound graphs ready for execution.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

/// Node identifier. Ids are assigned in mention-span order (ties broken
/// by tag order Variable < Entity < Type) so downstream iteration is
/// reproducible.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct NodeId(pub u32);

impl std::fmt::Display for NodeId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "n{}", self.0)
    }
}

/// Role of a node in the query graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum NodeTag {
    Variable,
    Entity,
    Type,
}

/// Half-open token interval `[start, end)` into the question.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Self {
        Span { start, end }
    }

    pub fn len(&self) -> usize {
        self.end.saturating_sub(self.start)
    }

    pub fn is_empty(&self) -> bool {
        self.end <= self.start
    }

    pub fn tokens(&self) -> impl Iterator<Item = usize> {
        self.start..self.end
    }
}

/// A query-graph node: where it was mentioned, what role it plays, and
/// (after linking) which KB entry it denotes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Node {
    pub id: NodeId,
    pub span: Span,
    pub tag: NodeTag,
    /// KB identifier. Never set for variables; required for entity and
    /// type nodes once linking has run.
    pub uri: Option<String>,
}

impl Node {
    pub fn new(id: NodeId, span: Span, tag: NodeTag) -> Self {
        Node {
            id,
            span,
            tag,
            uri: None,
        }
    }

    pub fn with_uri(mut self, uri: impl Into<String>) -> Self {
        self.uri = Some(uri.into());
        self
    }

    pub fn is_variable(&self) -> bool {
        self.tag == NodeTag::Variable
    }
}

/// Unordered node pair. Stored with the lower id first; direction lives
/// only in predicate bindings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct EdgeKey {
    pub a: NodeId,
    pub b: NodeId,
}

impl EdgeKey {
    /// Normalizes so `a <= b`. A self-loop keeps both ends equal and is
    /// reported by validation.
    pub fn new(x: NodeId, y: NodeId) -> Self {
        if x <= y {
            EdgeKey { a: x, b: y }
        } else {
            EdgeKey { a: y, b: x }
        }
    }

    pub fn touches(&self, id: NodeId) -> bool {
        self.a == id || self.b == id
    }

    pub fn other(&self, id: NodeId) -> Option<NodeId> {
        if self.a == id {
            Some(self.b)
        } else if self.b == id {
            Some(self.a)
        } else {
            None
        }
    }
}

impl std::fmt::Display for EdgeKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}, {})", self.a, self.b)
    }
}

/// Query type determining the SPARQL header.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum QueryType {
    Select,
    Count,
    Judge,
}

/// Orientation of a predicate relative to an `(a, b)` edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    /// Triple runs a -> b.
    Forward,
    /// Triple runs b -> a.
    Reverse,
}

impl Direction {
    pub fn flip(self) -> Self {
        match self {
            Direction::Forward => Direction::Reverse,
            Direction::Reverse => Direction::Forward,
        }
    }
}

/// Connectivity of all nodes: which mentions exist, which are related,
/// and which node carries the answer. Edges are unlabeled and
/// undirected at this stage.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryGraphStructure {
    pub nodes: Vec<Node>,
    pub edges: Vec<EdgeKey>,
    pub target: Option<NodeId>,
    pub query_type: QueryType,
}

impl QueryGraphStructure {
    pub fn new(query_type: QueryType) -> Self {
        QueryGraphStructure {
            nodes: Vec::new(),
            edges: Vec::new(),
            target: None,
            query_type,
        }
    }

    pub fn node(&self, id: NodeId) -> Option<&Node> {
        self.nodes.iter().find(|n| n.id == id)
    }

    /// Adds an edge, normalizing order and skipping exact duplicates.
    pub fn add_edge(&mut self, x: NodeId, y: NodeId) {
        let key = EdgeKey::new(x, y);
        if !self.edges.contains(&key) {
            self.edges.push(key);
        }
        self.edges.sort();
    }

    /// Removes a node and every incident edge.
    pub fn remove_node(&mut self, id: NodeId) {
        self.nodes.retain(|n| n.id != id);
        self.edges.retain(|e| !e.touches(id));
        if self.target == Some(id) {
            self.target = None;
        }
    }

    pub fn edges_touching(&self, id: NodeId) -> impl Iterator<Item = &EdgeKey> {
        self.edges.iter().filter(move |e| e.touches(id))
    }
}

/// A structure invariant that failed validation, naming the offending
/// element. Violations are data, not faults.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Violation {
    SelfLoop(EdgeKey),
    DuplicateEdge(EdgeKey),
    UnknownEndpoint { edge: EdgeKey, node: NodeId },
    DuplicateNodeId(NodeId),
    TargetOnJudge(NodeId),
    MissingTarget,
    UnknownTarget(NodeId),
    VariableWithUri(NodeId),
    EmptySpan(NodeId),
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::SelfLoop(e) => write!(f, "self-loop edge {e}"),
            Violation::DuplicateEdge(e) => write!(f, "duplicate edge {e}"),
            Violation::UnknownEndpoint { edge, node } => {
                write!(f, "edge {edge} references unknown node {node}")
            }
            Violation::DuplicateNodeId(n) => write!(f, "duplicate node id {n}"),
            Violation::TargetOnJudge(n) => {
                write!(f, "JUDGE structure must not set a target (found {n})")
            }
            Violation::MissingTarget => write!(f, "non-JUDGE structure has no target"),
            Violation::UnknownTarget(n) => write!(f, "target {n} is not a node"),
            Violation::VariableWithUri(n) => write!(f, "variable node {n} carries a uri"),
            Violation::EmptySpan(n) => write!(f, "node {n} has an empty mention span"),
        }
    }
}

/// Checks every structure invariant and returns the violations found.
/// Pure: identical inputs yield identical violation lists.
pub fn validate_structure(s: &QueryGraphStructure) -> Vec<Violation> {
    let mut out = Vec::new();

    let mut seen_ids = BTreeSet::new();
    for node in &s.nodes {
        if !seen_ids.insert(node.id) {
            out.push(Violation::DuplicateNodeId(node.id));
        }
        if node.is_variable() && node.uri.is_some() {
            out.push(Violation::VariableWithUri(node.id));
        }
        if node.span.is_empty() {
            out.push(Violation::EmptySpan(node.id));
        }
    }

    let mut seen_edges = BTreeSet::new();
    for edge in &s.edges {
        if edge.a == edge.b {
            out.push(Violation::SelfLoop(*edge));
        }
        if !seen_edges.insert(EdgeKey::new(edge.a, edge.b)) {
            out.push(Violation::DuplicateEdge(*edge));
        }
        for end in [edge.a, edge.b] {
            if !seen_ids.contains(&end) {
                out.push(Violation::UnknownEndpoint {
                    edge: *edge,
                    node: end,
                });
            }
        }
    }

    match (s.query_type, s.target) {
        (QueryType::Judge, Some(t)) => out.push(Violation::TargetOnJudge(t)),
        (QueryType::Judge, None) => {}
        (_, None) => out.push(Violation::MissingTarget),
        (_, Some(t)) => {
            if !seen_ids.contains(&t) {
                out.push(Violation::UnknownTarget(t));
            }
        }
    }

    out
}

/// One predicate-bound edge. `(a, b)` follow the edge-key order;
/// `direction` orients the triple.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundEdge {
    pub edge: EdgeKey,
    pub predicate: String,
    pub direction: Direction,
    pub score: f64,
}

impl BoundEdge {
    /// Subject and object node ids under this binding's orientation.
    pub fn oriented(&self) -> (NodeId, NodeId) {
        match self.direction {
            Direction::Forward => (self.edge.a, self.edge.b),
            Direction::Reverse => (self.edge.b, self.edge.a),
        }
    }
}

/// Floor applied to edge scores before taking products so a single zero
/// does not erase ordering among otherwise-identical graphs.
pub const SCORE_FLOOR: f64 = 1e-9;

/// A fully (or partially, during search) bound query graph. Bindings
/// keep insertion order; SPARQL emission relies on it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryGraph {
    pub structure: QueryGraphStructure,
    pub bindings: Vec<BoundEdge>,
}

impl QueryGraph {
    pub fn new(structure: QueryGraphStructure) -> Self {
        QueryGraph {
            structure,
            bindings: Vec::new(),
        }
    }

    /// Product of floored edge scores; 1.0 for the empty graph.
    pub fn score(&self) -> f64 {
        self.bindings
            .iter()
            .map(|b| b.score.max(SCORE_FLOOR))
            .product()
    }

    pub fn binding_for(&self, edge: EdgeKey) -> Option<&BoundEdge> {
        self.bindings.iter().find(|b| b.edge == edge)
    }

    /// True when every structure edge has exactly one binding.
    pub fn fully_bound(&self) -> bool {
        self.structure.edges.len() == self.bindings.len()
            && self
                .structure
                .edges
                .iter()
                .all(|e| self.binding_for(*e).is_some())
    }
}
