//! Query-type classification from trigger words and SPARQL
//! serialization of bound query graphs, plus a minimal reader used to
//! round-trip the emitted text.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::SparqlError;
use crate::query_graph::{NodeId, NodeTag, QueryGraph, QueryType};

/// Trigger phrases mapped to query types, matched longest-first on the
/// lower-cased question. Single-word triggers match only as the first
/// word; multi-word triggers match anywhere. No match defaults to
/// SELECT.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TriggerLexicon {
    entries: Vec<(Vec<String>, QueryType)>,
}

impl Default for TriggerLexicon {
    fn default() -> Self {
        let judge = ["is", "are", "was", "were", "did", "does", "do"];
        let count = [
            "how many",
            "count",
            "what is the number of",
            "give me the total number of",
        ];
        let mut pairs: Vec<(String, QueryType)> = Vec::new();
        for t in judge {
            pairs.push((t.to_string(), QueryType::Judge));
        }
        for t in count {
            pairs.push((t.to_string(), QueryType::Count));
        }
        TriggerLexicon::new(pairs)
    }
}

impl TriggerLexicon {
    pub fn new(pairs: impl IntoIterator<Item = (String, QueryType)>) -> Self {
        let mut entries: Vec<(Vec<String>, QueryType)> = pairs
            .into_iter()
            .map(|(phrase, qt)| {
                (
                    phrase
                        .to_lowercase()
                        .split_whitespace()
                        .map(String::from)
                        .collect(),
                    qt,
                )
            })
            .filter(|(words, _): &(Vec<String>, _)| !words.is_empty())
            .collect();
        entries.sort_by(|a, b| b.0.len().cmp(&a.0.len()).then_with(|| a.0.cmp(&b.0)));
        TriggerLexicon { entries }
    }

    /// Parses tab-separated `phrase<TAB>TYPE` lines, where TYPE is one
    /// of SELECT, COUNT, JUDGE.
    pub fn from_tsv(reader: impl std::io::BufRead) -> std::io::Result<Self> {
        let mut pairs = Vec::new();
        for line in reader.lines() {
            let line = line?;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let (phrase, qt) = trimmed.split_once('\t').ok_or_else(|| {
                std::io::Error::new(
                    std::io::ErrorKind::InvalidData,
                    format!("lexicon line missing tab: {trimmed:?}"),
                )
            })?;
            let qt = match qt.trim().to_uppercase().as_str() {
                "SELECT" => QueryType::Select,
                "COUNT" => QueryType::Count,
                "JUDGE" | "ASK" => QueryType::Judge,
                other => {
                    return Err(std::io::Error::new(
                        std::io::ErrorKind::InvalidData,
                        format!("unknown query type {other:?}"),
                    ))
                }
            };
            pairs.push((phrase.trim().to_string(), qt));
        }
        Ok(TriggerLexicon::new(pairs))
    }
}

fn content_words(question: &str) -> Vec<String> {
    question
        .to_lowercase()
        .split_whitespace()
        .map(|w| {
            w.trim_matches(|c: char| !c.is_alphanumeric() && c != '\'')
                .to_string()
        })
        .filter(|w| !w.is_empty())
        .collect()
}

/// Classifies a question by its first matching trigger; total and
/// case-insensitive, defaulting to SELECT.
pub fn classify_query_type(question: &str, lexicon: &TriggerLexicon) -> QueryType {
    let words = content_words(question);
    for (phrase, qt) in &lexicon.entries {
        let matched = if phrase.len() == 1 {
            words.first() == phrase.first()
        } else {
            words.windows(phrase.len()).any(|w| w == phrase.as_slice())
        };
        if matched {
            return *qt;
        }
    }
    QueryType::Select
}

/// Prefix declarations used to compact absolute URIs on output.
pub type PrefixMap = BTreeMap<String, String>;

/// Parses tab-separated `prefix<TAB>expansion` lines.
pub fn prefix_map_from_tsv(reader: impl std::io::BufRead) -> std::io::Result<PrefixMap> {
    let mut map = PrefixMap::new();
    for line in reader.lines() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        if let Some((prefix, expansion)) = trimmed.split_once('\t') {
            map.insert(prefix.trim().to_string(), expansion.trim().to_string());
        }
    }
    Ok(map)
}

fn render_uri(uri: &str, prefixes: &PrefixMap) -> String {
    // longest expansion wins so nested namespaces compact correctly
    let mut best: Option<(&str, &str)> = None;
    for (prefix, expansion) in prefixes {
        if uri.starts_with(expansion.as_str()) {
            let better = best.map(|(_, e)| expansion.len() > e.len()).unwrap_or(true);
            if better {
                best = Some((prefix, expansion));
            }
        }
    }
    if let Some((prefix, expansion)) = best {
        return format!("{prefix}:{}", &uri[expansion.len()..]);
    }
    if uri.contains("://") {
        format!("<{uri}>")
    } else {
        uri.to_string()
    }
}

fn sanitize_variable(mention: &str) -> String {
    let cleaned: String = mention
        .to_lowercase()
        .chars()
        .map(|c| if c.is_alphanumeric() { c } else { '_' })
        .collect();
    let cleaned = cleaned.trim_matches('_').to_string();
    if cleaned.is_empty() || cleaned.chars().next().is_some_and(|c| c.is_numeric()) {
        format!("v{cleaned}")
    } else {
        cleaned
    }
}

/// Deterministic variable names: sanitized mention text, with the node
/// id appended when two variables would collide.
fn variable_names(graph: &QueryGraph, tokens: &[String]) -> BTreeMap<NodeId, String> {
    let mut names: BTreeMap<NodeId, String> = BTreeMap::new();
    let mut used: BTreeMap<String, u32> = BTreeMap::new();
    for node in &graph.structure.nodes {
        if node.tag != NodeTag::Variable {
            continue;
        }
        let mention = tokens
            .get(node.span.start..node.span.end)
            .map(|t| t.join(" "))
            .unwrap_or_default();
        let base = sanitize_variable(&mention);
        let name = match used.get(&base) {
            None => base.clone(),
            Some(_) => format!("{base}_{}", node.id.0),
        };
        used.insert(base, node.id.0);
        names.insert(node.id, name);
    }
    names
}

/// Serializes a fully bound graph to SPARQL text.
///
/// Headers follow the three supported query types ("select ?x",
/// "select count(?x)", "ask"); the body holds one triple per edge in
/// binding insertion order, with `rdf:type` rendered as `a`.
pub fn emit_sparql(
    graph: &QueryGraph,
    tokens: &[String],
    prefixes: &PrefixMap,
) -> Result<String, SparqlError> {
    let names = variable_names(graph, tokens);
    let term_of = |id: NodeId| -> Result<String, SparqlError> {
        let node = graph
            .structure
            .node(id)
            .ok_or(SparqlError::UnboundEdge(id.0, id.0))?;
        if node.tag == NodeTag::Variable {
            Ok(format!("?{}", names[&id]))
        } else {
            let uri = node
                .uri
                .as_ref()
                .ok_or(SparqlError::UnboundEdge(id.0, id.0))?;
            Ok(render_uri(uri, prefixes))
        }
    };

    let header = match graph.structure.query_type {
        QueryType::Judge => "ask".to_string(),
        QueryType::Select | QueryType::Count => {
            let target = graph.structure.target.ok_or(SparqlError::MissingTarget)?;
            let target_term = term_of(target)?;
            if graph.structure.query_type == QueryType::Select {
                format!("select {target_term}")
            } else {
                format!("select count({target_term})")
            }
        }
    };

    let mut triples = Vec::new();
    for edge in &graph.structure.edges {
        if graph.binding_for(*edge).is_none() {
            return Err(SparqlError::UnboundEdge(edge.a.0, edge.b.0));
        }
    }
    for binding in &graph.bindings {
        let (s, o) = binding.oriented();
        let pred = if binding.predicate == "rdf:type" {
            "a".to_string()
        } else {
            render_uri(&binding.predicate, prefixes)
        };
        triples.push(format!("{} {} {}", term_of(s)?, pred, term_of(o)?));
    }
    Ok(format!("{header} {{{}}}", triples.join(". ")))
}

/// Header and body recovered by the minimal reader.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedQuery {
    pub query_type: QueryType,
    pub target: Option<String>,
    /// Triples as written, `a` expanded back to `rdf:type`. A multiset:
    /// order preserved, duplicates kept.
    pub triples: Vec<(String, String, String)>,
}

/// Minimal reader for the exact dialect written by [`emit_sparql`];
/// used by round-trip checks, not a general SPARQL parser.
pub fn parse_sparql(text: &str) -> Result<ParsedQuery, SparqlError> {
    let text = text.trim();
    let open = text
        .find('{')
        .ok_or_else(|| SparqlError::Parse("missing body".into()))?;
    let close = text
        .rfind('}')
        .ok_or_else(|| SparqlError::Parse("missing closing brace".into()))?;
    let header = text[..open].trim();
    let body = &text[open + 1..close];

    let (query_type, target) = if header.eq_ignore_ascii_case("ask") {
        (QueryType::Judge, None)
    } else if let Some(rest) = header.strip_prefix("select count(") {
        let inner = rest
            .strip_suffix(')')
            .ok_or_else(|| SparqlError::Parse("unclosed count()".into()))?;
        (QueryType::Count, Some(inner.trim().to_string()))
    } else if let Some(rest) = header.strip_prefix("select ") {
        (QueryType::Select, Some(rest.trim().to_string()))
    } else {
        return Err(SparqlError::Parse(format!("unknown header {header:?}")));
    };

    let mut triples = Vec::new();
    for chunk in body.split(". ") {
        let chunk = chunk.trim().trim_end_matches('.');
        if chunk.is_empty() {
            continue;
        }
        let parts: Vec<&str> = chunk.split_whitespace().collect();
        if parts.len() != 3 {
            return Err(SparqlError::Parse(format!("bad triple {chunk:?}")));
        }
        let pred = if parts[1] == "a" {
            "rdf:type".to_string()
        } else {
            parts[1].to_string()
        };
        triples.push((parts[0].to_string(), pred, parts[2].to_string()));
    }
    Ok(ParsedQuery {
        query_type,
        target,
        triples,
    })
}
