//! Entity and type linking: attach KB identifiers to the non-variable
//! nodes of a decoded structure, discarding nodes that cannot be
//! linked.
//!
//! Entity mentions link by exact KB name first, then through a lookup
//! client (an offline fixture table by default, an HTTP service behind
//! the `remote-lookup` feature). Type mentions go through a
//! mention-to-type dictionary, falling back to a naive
//! singularize-and-capitalize rule checked against the store.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::LinkError;
use crate::kb::TripleStore;
use crate::query_graph::{NodeTag, QueryGraphStructure};

/// One ranked lookup result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LookupCandidate {
    pub uri: String,
    pub name: String,
    pub score: f64,
}

/// Source of ranked entity candidates for a mention. Results must be
/// ordered by descending score and deterministic per implementation.
pub trait LookupClient: Send + Sync {
    fn query(&self, mention: &str) -> Result<Vec<LookupCandidate>, LinkError>;
}

/// Offline lookup table keyed by lower-cased mention; the default
/// client.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct FixtureLookupClient {
    entries: BTreeMap<String, Vec<LookupCandidate>>,
}

impl FixtureLookupClient {
    pub fn new(entries: BTreeMap<String, Vec<LookupCandidate>>) -> Self {
        let entries = entries
            .into_iter()
            .map(|(mention, mut candidates)| {
                candidates.sort_by(|a, b| {
                    b.score
                        .partial_cmp(&a.score)
                        .unwrap_or(std::cmp::Ordering::Equal)
                        .then_with(|| a.uri.cmp(&b.uri))
                });
                (mention.to_lowercase(), candidates)
            })
            .collect();
        FixtureLookupClient { entries }
    }

    pub fn from_json(reader: impl std::io::Read) -> Result<Self, LinkError> {
        let entries: BTreeMap<String, Vec<LookupCandidate>> = serde_json::from_reader(reader)
            .map_err(|e| LinkError::Transport {
                mention: "<fixture file>".into(),
                reason: e.to_string(),
            })?;
        Ok(FixtureLookupClient::new(entries))
    }
}

impl LookupClient for FixtureLookupClient {
    fn query(&self, mention: &str) -> Result<Vec<LookupCandidate>, LinkError> {
        Ok(self
            .entries
            .get(&mention.to_lowercase())
            .cloned()
            .unwrap_or_default())
    }
}

/// HTTP-backed lookup client: GET `endpoint?query=<mention>`, response
/// body a JSON array of candidates. Retries once on transport failure,
/// then fails; it never silently degrades to fixture results.
#[cfg(feature = "remote-lookup")]
pub struct HttpLookupClient {
    endpoint: String,
}

#[cfg(feature = "remote-lookup")]
impl HttpLookupClient {
    pub fn new(endpoint: impl Into<String>) -> Self {
        HttpLookupClient {
            endpoint: endpoint.into(),
        }
    }
}

#[cfg(feature = "remote-lookup")]
impl LookupClient for HttpLookupClient {
    fn query(&self, mention: &str) -> Result<Vec<LookupCandidate>, LinkError> {
        let url = format!("{}?query={}", self.endpoint, url_encode(mention));
        let mut last_err = String::new();
        for _ in 0..2 {
            match ureq::get(&url).call() {
                Ok(mut response) => {
                    let body =
                        response
                            .body_mut()
                            .read_to_string()
                            .map_err(|e| LinkError::Transport {
                                mention: mention.to_string(),
                                reason: e.to_string(),
                            })?;
                    let mut candidates: Vec<LookupCandidate> = serde_json::from_str(&body)
                        .map_err(|e| LinkError::Transport {
                            mention: mention.to_string(),
                            reason: format!("bad response: {e}"),
                        })?;
                    candidates.sort_by(|a, b| {
                        b.score
                            .partial_cmp(&a.score)
                            .unwrap_or(std::cmp::Ordering::Equal)
                            .then_with(|| a.uri.cmp(&b.uri))
                    });
                    return Ok(candidates);
                }
                Err(e) => last_err = e.to_string(),
            }
        }
        Err(LinkError::Transport {
            mention: mention.to_string(),
            reason: last_err,
        })
    }
}

#[cfg(feature = "remote-lookup")]
fn url_encode(s: &str) -> String {
    let mut out = String::new();
    for byte in s.bytes() {
        match byte {
            b'0'..=b'9' | b'a'..=b'z' | b'A'..=b'Z' | b'-' | b'_' | b'.' | b'~' => {
                out.push(byte as char)
            }
            b' ' => out.push_str("%20"),
            other => out.push_str(&format!("%{other:02X}")),
        }
    }
    out
}

/// Mention-to-type dictionary built from training pairs; lookups are
/// case-insensitive on the mention.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct TypeDictionary {
    entries: BTreeMap<String, String>,
}

impl TypeDictionary {
    pub fn new(pairs: impl IntoIterator<Item = (String, String)>) -> Self {
        TypeDictionary {
            entries: pairs
                .into_iter()
                .map(|(m, u)| (m.to_lowercase(), u))
                .collect(),
        }
    }

    /// Parses tab-separated `mention<TAB>type-uri` lines.
    pub fn from_tsv(reader: impl std::io::BufRead) -> std::io::Result<Self> {
        let mut pairs = Vec::new();
        for line in reader.lines() {
            let line = line?;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            if let Some((mention, uri)) = trimmed.split_once('\t') {
                pairs.push((mention.trim().to_string(), uri.trim().to_string()));
            }
        }
        Ok(TypeDictionary::new(pairs))
    }

    pub fn get(&self, mention: &str) -> Option<&str> {
        self.entries
            .get(&mention.to_lowercase())
            .map(String::as_str)
    }
}

/// Configurable URI prefixes used when constructing candidate names.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LinkerConfig {
    /// Prefix for exact-name entity candidates.
    pub entity_prefix: String,
    /// Prefix for constructed type candidates.
    pub type_prefix: String,
}

impl Default for LinkerConfig {
    fn default() -> Self {
        LinkerConfig {
            entity_prefix: "dbr:".into(),
            type_prefix: "dbo:".into(),
        }
    }
}

/// Links an entity mention.
///
/// Priority: (1) the KB entity whose name equals the mention
/// (spaces mapped to underscores); (2) among lookup candidates, those
/// whose lower-cased name equals the lower-cased mention, by score;
/// (3) the top-scored candidate; (4) none.
pub fn link_entity(
    mention: &str,
    store: &TripleStore,
    client: &dyn LookupClient,
    config: &LinkerConfig,
) -> Result<Option<String>, LinkError> {
    let exact = format!("{}{}", config.entity_prefix, mention.replace(' ', "_"));
    if store.contains_node(&exact) {
        return Ok(Some(exact));
    }
    let candidates = client.query(mention)?;
    if candidates.is_empty() {
        return Ok(None);
    }
    let mention_lower = mention.to_lowercase();
    let prioritized = candidates
        .iter()
        .filter(|c| c.name.to_lowercase() == mention_lower)
        .max_by(|a, b| {
            a.score
                .partial_cmp(&b.score)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then_with(|| b.uri.cmp(&a.uri))
        });
    match prioritized {
        Some(c) => Ok(Some(c.uri.clone())),
        None => Ok(Some(candidates[0].uri.clone())),
    }
}

/// Naive singularization: trailing "ies" -> "y", trailing "ses" -> "s",
/// otherwise strip one trailing "s". Applied to the final word only.
/// The one documented data point ("bands" -> "Band") fixes the rule;
/// irregular plurals belong in the dictionary.
fn singularize(word: &str) -> String {
    if let Some(stem) = word.strip_suffix("ies") {
        format!("{stem}y")
    } else if let Some(stem) = word.strip_suffix("ses") {
        format!("{stem}s")
    } else if let Some(stem) = word.strip_suffix('s') {
        stem.to_string()
    } else {
        word.to_string()
    }
}

fn capitalize(word: &str) -> String {
    let mut chars = word.chars();
    match chars.next() {
        Some(first) => first.to_uppercase().collect::<String>() + chars.as_str(),
        None => String::new(),
    }
}

/// Constructed type candidate: singularize the final word, capitalize
/// each word, join without spaces, and prefix.
pub fn type_candidate(mention: &str, config: &LinkerConfig) -> String {
    let words: Vec<&str> = mention.split_whitespace().collect();
    let mut parts: Vec<String> = Vec::with_capacity(words.len());
    for (i, word) in words.iter().enumerate() {
        let w = if i + 1 == words.len() {
            singularize(word)
        } else {
            (*word).to_string()
        };
        parts.push(capitalize(&w));
    }
    format!("{}{}", config.type_prefix, parts.join(""))
}

/// Links a type mention: a dictionary hit wins; otherwise the
/// constructed candidate is returned iff it occurs in the store.
pub fn link_type(
    mention: &str,
    dict: &TypeDictionary,
    store: &TripleStore,
    config: &LinkerConfig,
) -> Option<String> {
    if let Some(uri) = dict.get(mention) {
        return Some(uri.to_string());
    }
    let candidate = type_candidate(mention, config);
    if store.contains_node(&candidate) {
        Some(candidate)
    } else {
        None
    }
}

/// Linked structure plus the report of what was discarded.
pub type LinkOutcome = (QueryGraphStructure, LinkReport);

/// Outcome of linking a full structure.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinkReport {
    /// Node ids that were discarded together with their edges.
    pub discarded: Vec<u32>,
}

/// Links every entity and type node of the structure, using the token
/// list to recover mention text. Nodes with no link are discarded along
/// with their incident edges; variables are untouched. Discarding the
/// target is an error: the question is unanswerable as parsed.
pub fn link_nodes(
    structure: &QueryGraphStructure,
    tokens: &[String],
    store: &TripleStore,
    client: &dyn LookupClient,
    dict: &TypeDictionary,
    config: &LinkerConfig,
) -> Result<LinkOutcome, LinkError> {
    let mut linked = structure.clone();
    let mut discarded = Vec::new();
    for node in structure.nodes.clone() {
        let mention = tokens[node.span.start..node.span.end].join(" ");
        let uri = match node.tag {
            NodeTag::Variable => continue,
            NodeTag::Entity => link_entity(&mention, store, client, config)?,
            NodeTag::Type => link_type(&mention, dict, store, config),
        };
        match uri {
            Some(uri) => {
                if let Some(n) = linked.nodes.iter_mut().find(|n| n.id == node.id) {
                    n.uri = Some(uri);
                }
            }
            None => {
                if structure.target == Some(node.id) {
                    return Err(LinkError::TargetDiscarded(mention));
                }
                linked.remove_node(node.id);
                discarded.push(node.id.0);
            }
        }
    }
    Ok((linked, LinkReport { discarded }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kb::{load_triples, KbFormat};
    use crate::query_graph::{Node, NodeId, NodeTag, QueryType, Span};

    fn store() -> TripleStore {
        let text = "dbr:New_York\trdf:type\tdbo:City\n\
                    dbr:Ohio\trdf:type\tdbo:State\n\
                    x\trdf:type\tdbo:Band";
        load_triples(text.as_bytes(), KbFormat::Tsv).unwrap()
    }

    type ClientSpec<'a> = (&'a str, &'a [(&'a str, &'a str, f64)]);

    fn client(entries: &[ClientSpec]) -> FixtureLookupClient {
        FixtureLookupClient::new(
            entries
                .iter()
                .map(|(mention, cands)| {
                    (
                        mention.to_string(),
                        cands
                            .iter()
                            .map(|(uri, name, score)| LookupCandidate {
                                uri: uri.to_string(),
                                name: name.to_string(),
                                score: *score,
                            })
                            .collect(),
                    )
                })
                .collect(),
        )
    }

    #[test]
    fn exact_name_entity_links_directly() {
        let linked =
            link_entity("New York", &store(), &client(&[]), &LinkerConfig::default()).unwrap();
        assert_eq!(linked.as_deref(), Some("dbr:New_York"));
    }

    #[test]
    fn unknown_mention_with_empty_results_is_none() {
        let linked =
            link_entity("Atlantis", &store(), &client(&[]), &LinkerConfig::default()).unwrap();
        assert_eq!(linked, None);
    }

    #[test]
    fn lowercase_equal_name_beats_higher_score() {
        let c = client(&[("new york", &[("B", "York", 0.9), ("A", "new york", 0.4)])]);
        // shadow the store so the exact-name rule misses
        let empty = load_triples("".as_bytes(), KbFormat::Tsv).unwrap();
        let linked = link_entity("new york", &empty, &c, &LinkerConfig::default()).unwrap();
        assert_eq!(linked.as_deref(), Some("A"));
    }

    #[test]
    fn falls_back_to_top_scored_candidate() {
        let c = client(&[(
            "springfield",
            &[
                ("S2", "Springfield, MA", 0.8),
                ("S1", "Springfield, IL", 0.6),
            ],
        )]);
        let empty = load_triples("".as_bytes(), KbFormat::Tsv).unwrap();
        let linked = link_entity("springfield", &empty, &c, &LinkerConfig::default()).unwrap();
        assert_eq!(linked.as_deref(), Some("S2"));
    }

    #[test]
    fn type_singularize_and_capitalize() {
        let dict = TypeDictionary::default();
        let linked = link_type("bands", &dict, &store(), &LinkerConfig::default());
        assert_eq!(linked.as_deref(), Some("dbo:Band"));
    }

    #[test]
    fn type_dictionary_hit_wins() {
        let dict = TypeDictionary::new([("authors".to_string(), "dbo:Writer".to_string())]);
        let linked = link_type("Authors", &dict, &store(), &LinkerConfig::default());
        assert_eq!(linked.as_deref(), Some("dbo:Writer"));
    }

    #[test]
    fn type_absent_everywhere_is_none() {
        let dict = TypeDictionary::default();
        assert_eq!(
            link_type("xyzzies", &dict, &store(), &LinkerConfig::default()),
            None
        );
    }

    #[test]
    fn singularize_rules() {
        assert_eq!(singularize("cities"), "city");
        assert_eq!(singularize("buses"), "bus");
        assert_eq!(singularize("bands"), "band");
        assert_eq!(singularize("sheep"), "sheep");
    }

    #[test]
    fn type_candidate_joins_capitalized_words() {
        let config = LinkerConfig::default();
        assert_eq!(type_candidate("rock bands", &config), "dbo:RockBand");
    }

    fn tokens(text: &str) -> Vec<String> {
        text.split_whitespace().map(String::from).collect()
    }

    #[test]
    fn link_nodes_links_and_discards() {
        // [CLS] which state is new york in ; entity "New York" + bogus type
        let toks = tokens("[CLS] which state is New York in xyzzies");
        let mut s = QueryGraphStructure::new(QueryType::Select);
        s.nodes = vec![
            Node::new(NodeId(0), Span::new(2, 3), NodeTag::Type), // "state"
            Node::new(NodeId(1), Span::new(4, 6), NodeTag::Entity), // "New York"
            Node::new(NodeId(2), Span::new(7, 8), NodeTag::Type), // "xyzzies"
            Node::new(NodeId(3), Span::new(1, 2), NodeTag::Variable),
        ];
        s.add_edge(NodeId(3), NodeId(1));
        s.add_edge(NodeId(3), NodeId(0));
        s.add_edge(NodeId(2), NodeId(3));
        s.target = Some(NodeId(3));
        let dict = TypeDictionary::new([("state".to_string(), "dbo:State".to_string())]);
        let (linked, report) = link_nodes(
            &s,
            &toks,
            &store(),
            &client(&[]),
            &dict,
            &LinkerConfig::default(),
        )
        .unwrap();
        assert_eq!(report.discarded, vec![2]);
        assert_eq!(linked.nodes.len(), 3);
        assert_eq!(
            linked.node(NodeId(1)).unwrap().uri.as_deref(),
            Some("dbr:New_York")
        );
        assert_eq!(
            linked.node(NodeId(0)).unwrap().uri.as_deref(),
            Some("dbo:State")
        );
        assert!(linked.edges.iter().all(|e| !e.touches(NodeId(2))));
        assert!(crate::query_graph::validate_structure(&linked).is_empty());
    }

    #[test]
    fn link_nodes_discarded_target_is_an_error() {
        let toks = tokens("[CLS] who is xyzzy");
        let mut s = QueryGraphStructure::new(QueryType::Select);
        s.nodes = vec![Node::new(NodeId(0), Span::new(3, 4), NodeTag::Entity)];
        s.target = Some(NodeId(0));
        let err = link_nodes(
            &s,
            &toks,
            &store(),
            &client(&[]),
            &TypeDictionary::default(),
            &LinkerConfig::default(),
        )
        .unwrap_err();
        assert!(matches!(err, LinkError::TargetDiscarded(_)));
    }

    #[test]
    fn link_nodes_all_variables_unchanged() {
        let toks = tokens("[CLS] a b");
        let mut s = QueryGraphStructure::new(QueryType::Select);
        s.nodes = vec![
            Node::new(NodeId(0), Span::new(1, 2), NodeTag::Variable),
            Node::new(NodeId(1), Span::new(2, 3), NodeTag::Variable),
        ];
        s.add_edge(NodeId(0), NodeId(1));
        s.target = Some(NodeId(0));
        let (linked, report) = link_nodes(
            &s,
            &toks,
            &store(),
            &client(&[]),
            &TypeDictionary::default(),
            &LinkerConfig::default(),
        )
        .unwrap();
        assert_eq!(linked, s);
        assert!(report.discarded.is_empty());
    }

    #[test]
    fn fixture_client_is_deterministic() {
        let c = client(&[("x", &[("A", "x", 0.5), ("B", "x", 0.5)])]);
        let first = c.query("X").unwrap();
        let second = c.query("x").unwrap();
        assert_eq!(first, second);
        assert_eq!(first[0].uri, "A"); // uri order breaks score ties
    }
}

#[cfg(all(test, feature = "remote-lookup"))]
mod remote_tests {
    use super::*;
    use std::io::{Read as _, Write as _};
    use std::net::TcpListener;

    /// One-shot HTTP server returning a fixed body.
    fn serve_once(body: &'static str) -> String {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let addr = listener.local_addr().unwrap();
        std::thread::spawn(move || {
            if let Ok((mut stream, _)) = listener.accept() {
                let mut buf = [0u8; 4096];
                let _ = stream.read(&mut buf);
                let response = format!(
                    "HTTP/1.1 200 OK\r\ncontent-type: application/json\r\ncontent-length: {}\r\nconnection: close\r\n\r\n{}",
                    body.len(),
                    body
                );
                let _ = stream.write_all(response.as_bytes());
            }
        });
        format!("http://{addr}/lookup")
    }

    #[test]
    fn http_client_parses_and_sorts_candidates() {
        let endpoint = serve_once(
            r#"[{"uri": "B", "name": "two", "score": 0.3},
                {"uri": "A", "name": "one", "score": 0.9}]"#,
        );
        let client = HttpLookupClient::new(endpoint);
        let results = client.query("new york").unwrap();
        assert_eq!(results.len(), 2);
        assert_eq!(results[0].uri, "A");
    }

    #[test]
    fn http_client_fails_after_retries_instead_of_degrading() {
        // a freshly bound then dropped listener leaves the port closed
        let port = {
            let listener = TcpListener::bind("127.0.0.1:0").unwrap();
            listener.local_addr().unwrap().port()
        };
        let client = HttpLookupClient::new(format!("http://127.0.0.1:{port}/lookup"));
        let err = client.query("anything").unwrap_err();
        assert!(matches!(err, LinkError::Transport { .. }));
    }

    #[test]
    fn http_client_rejects_malformed_bodies() {
        let endpoint = serve_once("not json at all");
        let client = HttpLookupClient::new(endpoint);
        let err = client.query("x").unwrap_err();
        assert!(matches!(err, LinkError::Transport { .. }));
    }
}
