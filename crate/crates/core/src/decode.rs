//! Decoding: turning label sequences and pair-probability tables into
//! query graph structures, plus the inverse encoding used to build
//! gold tables from annotated structures.
//!
//! Position 0 of every table is the synthetic `[CLS]` token; its pair
//! probabilities carry the target choice. JUDGE questions additionally
//! carry a `[SEP]` token at the last position, connected to `[CLS]` in
//! gold tables and ignored when decoding edges.

use crate::error::DecodeError;
use crate::model::{label_class, label_index, GcScoreTable, SpanClass, LABEL_O};
use crate::query_graph::{Node, NodeId, NodeTag, QueryGraphStructure, QueryType, Span};

/// Token position of the `[CLS]` marker.
pub const CLS_POSITION: usize = 0;

/// A decoded mention: token span plus span class.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MentionSpan {
    pub span: Span,
    pub class: SpanClass,
}

impl MentionSpan {
    pub fn new(start: usize, end: usize, class: SpanClass) -> Self {
        MentionSpan {
            span: Span::new(start, end),
            class,
        }
    }
}

/// Decodes maximal B-I runs into mention spans, ordered by start.
///
/// A stray I with no preceding B or I of the same class is repaired to
/// a B and opens a new span.
pub fn decode_ne(labels: &[usize]) -> Vec<MentionSpan> {
    let mut spans = Vec::new();
    let mut current: Option<MentionSpan> = None;
    for (pos, &label) in labels.iter().enumerate() {
        match label_class(label) {
            None => {
                if let Some(span) = current.take() {
                    spans.push(span);
                }
            }
            Some((begin, class)) => {
                let continues = !begin
                    && current
                        .map(|c| c.class == class && c.span.end == pos)
                        .unwrap_or(false);
                if continues {
                    if let Some(c) = current.as_mut() {
                        c.span.end = pos + 1;
                    }
                } else {
                    if let Some(span) = current.take() {
                        spans.push(span);
                    }
                    current = Some(MentionSpan::new(pos, pos + 1, class));
                }
            }
        }
    }
    if let Some(span) = current {
        spans.push(span);
    }
    spans
}

/// Expands mention spans into nodes. V, E and T spans become a single
/// node; a VT span becomes a variable node and a type node sharing the
/// span (the twin pair). Ids are assigned in span order with the tag
/// order Variable < Entity < Type breaking ties.
pub fn spans_to_nodes(spans: &[MentionSpan]) -> Vec<Node> {
    let mut keyed: Vec<(Span, NodeTag)> = Vec::new();
    for m in spans {
        match m.class {
            SpanClass::V => keyed.push((m.span, NodeTag::Variable)),
            SpanClass::E => keyed.push((m.span, NodeTag::Entity)),
            SpanClass::T => keyed.push((m.span, NodeTag::Type)),
            SpanClass::VT => {
                keyed.push((m.span, NodeTag::Variable));
                keyed.push((m.span, NodeTag::Type));
            }
        }
    }
    keyed.sort_by_key(|(span, tag)| (span.start, span.end, *tag));
    keyed.dedup();
    keyed
        .into_iter()
        .enumerate()
        .map(|(i, (span, tag))| Node::new(NodeId(i as u32), span, tag))
        .collect()
}

/// Mean symmetrized edge-class probability over the rectangle spanned
/// by the two mentions:
/// `mean over i in a, j in b of (probs[i,j,1] + probs[j,i,1]) / 2`.
pub fn edge_probability(table: &GcScoreTable, a: Span, b: Span) -> f64 {
    let mut total = 0.0;
    let mut cells = 0usize;
    for i in a.tokens() {
        for j in b.tokens() {
            total += (table.edge_prob(i, j) + table.edge_prob(j, i)) / 2.0;
            cells += 1;
        }
    }
    if cells == 0 {
        0.0
    } else {
        total / cells as f64
    }
}

/// True when `node` is the type member of a twin pair (a type node
/// sharing its span with a variable node).
fn is_type_twin(node: &Node, nodes: &[Node]) -> bool {
    node.tag == NodeTag::Type
        && nodes
            .iter()
            .any(|o| o.tag == NodeTag::Variable && o.span == node.span)
}

/// Decodes a structure from a pair-probability table.
///
/// Node pairs with symmetrized rectangle probability above `threshold`
/// are connected. Twin pairs (a variable and a type node sharing one
/// span) are always connected and the type member takes part in no
/// other edge; rectangle averaging cannot tell it apart from its
/// variable twin. For SELECT and COUNT the node with the highest
/// `[CLS]`-pair probability becomes the target even when no pair
/// clears the threshold, lowest id winning exact ties.
pub fn decode_structure(
    table: &GcScoreTable,
    nodes: &[Node],
    query_type: QueryType,
    threshold: f64,
) -> Result<QueryGraphStructure, DecodeError> {
    let n = table.n;
    let mut nodes: Vec<Node> = nodes.to_vec();
    nodes.sort_by_key(|node| node.id);
    for node in &nodes {
        if node.span.end > n || node.span.start >= node.span.end {
            return Err(DecodeError::SpanOutOfRange {
                start: node.span.start,
                end: node.span.end,
                n,
            });
        }
    }

    let mut structure = QueryGraphStructure::new(query_type);
    structure.nodes = nodes.clone();

    for (i, a) in nodes.iter().enumerate() {
        for b in nodes.iter().skip(i + 1) {
            if a.span == b.span {
                let twin = (a.tag == NodeTag::Variable && b.tag == NodeTag::Type)
                    || (a.tag == NodeTag::Type && b.tag == NodeTag::Variable);
                if twin {
                    structure.add_edge(a.id, b.id);
                }
                continue;
            }
            if is_type_twin(a, &nodes) || is_type_twin(b, &nodes) {
                continue;
            }
            if edge_probability(table, a.span, b.span) > threshold {
                structure.add_edge(a.id, b.id);
            }
        }
    }

    if query_type != QueryType::Judge {
        let cls = Span::new(CLS_POSITION, CLS_POSITION + 1);
        let target = nodes
            .iter()
            .map(|node| (node.id, edge_probability(table, cls, node.span)))
            .fold(None::<(NodeId, f64)>, |best, (id, p)| match best {
                None => Some((id, p)),
                Some((_, bp)) if p > bp => Some((id, p)),
                Some(b) => Some(b),
            });
        structure.target = Some(target.ok_or(DecodeError::NoNodes)?.0);
    }

    Ok(structure)
}

/// Gold token labels for an annotated structure: B/I markers over each
/// node mention, with twin pairs collapsing to the VT class. Synthetic
/// positions stay outside.
pub fn encode_labels(structure: &QueryGraphStructure, n: usize) -> Vec<usize> {
    let mut labels = vec![LABEL_O; n];
    let mut spans: Vec<(Span, SpanClass)> = Vec::new();
    for node in &structure.nodes {
        let twin_partner = structure
            .nodes
            .iter()
            .any(|o| o.id != node.id && o.span == node.span);
        let class = match (node.tag, twin_partner) {
            (NodeTag::Variable, true) | (NodeTag::Type, true) => SpanClass::VT,
            (NodeTag::Variable, false) => SpanClass::V,
            (NodeTag::Entity, _) => SpanClass::E,
            (NodeTag::Type, false) => SpanClass::T,
        };
        if !spans.contains(&(node.span, class)) {
            spans.push((node.span, class));
        }
    }
    for (span, class) in spans {
        for pos in span.tokens() {
            labels[pos] = label_index(pos == span.start, class);
        }
    }
    labels
}

/// Gold boolean pair table for an annotated structure: one rectangle
/// of `true` per edge (both orders), the `[CLS]` row and column over
/// the target span, and for JUDGE the `[CLS]`-`[SEP]` cell with the
/// separator sitting at the last position.
pub fn encode_table(structure: &QueryGraphStructure, n: usize) -> Vec<bool> {
    let mut table = vec![false; n * n];
    let mut mark = |i: usize, j: usize| {
        table[i * n + j] = true;
        table[j * n + i] = true;
    };
    for edge in &structure.edges {
        let a = structure.node(edge.a).expect("edge endpoint");
        let b = structure.node(edge.b).expect("edge endpoint");
        for i in a.span.tokens() {
            for j in b.span.tokens() {
                mark(i, j);
            }
        }
    }
    if let Some(target) = structure.target {
        let span = structure.node(target).expect("target node").span;
        for j in span.tokens() {
            mark(CLS_POSITION, j);
        }
    }
    if structure.query_type == QueryType::Judge {
        mark(CLS_POSITION, n - 1);
    }
    table
}

/// Turns a gold boolean table into a hard probability table
/// (`high`/`1 - high` per cell); handy for fixtures and round trips.
pub fn table_from_gold(gold: &[bool], n: usize, high: f64) -> GcScoreTable {
    let edge_probs: Vec<f64> = gold
        .iter()
        .map(|&g| if g { high } else { 1.0 - high })
        .collect();
    GcScoreTable::from_edge_probs(n, &edge_probs)
        .expect("gold-derived probabilities are valid")
        .with_gold(gold.to_vec())
        .expect("gold tables are symmetric by construction")
}
