//! The per-question pipeline and the batch runners.
//!
//! Stage order: decode labels, expand spans to nodes, classify the
//! query type, decode the structure, link nodes, bind predicates by
//! beam search, emit SPARQL, execute. Unanswerable states are explicit
//! outcomes, never silent empties; hard errors carry exactly one stage
//! tag.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::decode::{decode_ne, decode_structure, spans_to_nodes, CLS_POSITION};
use crate::error::{DecodeError, EngineError, LinkError, SearchError, Stage};
use crate::kb::{execute, Answer, TripleStore};
use crate::linker::{link_nodes, LookupClient, TypeDictionary};
use crate::model::{GcScoreTable, NeLabelTable, StructureModel, LABEL_O, NUM_LABELS};
use crate::par;
use crate::query_graph::{QueryGraph, QueryType};
use crate::relation::{beam_search_re, FixtureRanker, Ranker, RankerFixture, ReferenceRanker};
use crate::sparql::{classify_query_type, emit_sparql, PrefixMap, TriggerLexicon};

use super::{deterministic_features, tokenize, DatasetRecord, EngineConfig, ScoreFixtureFile};

/// Where label logits and the pair table come from.
pub enum ScoreSource<'a> {
    /// Precomputed tensors keyed by question id.
    Fixture(&'a ScoreFixtureFile),
    /// A checkpointed model evaluated over token features.
    Model {
        model: &'a StructureModel,
        features: FeatureMode<'a>,
    },
}

/// Where the model's token features come from.
pub enum FeatureMode<'a> {
    /// Seeded hash of (token, position); needs no external data.
    Deterministic,
    /// Feature matrices stored in the score fixture file.
    FromFixture(&'a ScoreFixtureFile),
}

/// Which ranker scores relation candidates.
pub enum RankerSource<'a> {
    Reference,
    Fixture(&'a RankerFixture),
}

/// Everything the pipeline needs besides the store and the record.
pub struct Providers<'a> {
    pub scores: ScoreSource<'a>,
    pub ranker: RankerSource<'a>,
    pub lookup: &'a dyn LookupClient,
    pub type_dict: &'a TypeDictionary,
    pub lexicon: &'a TriggerLexicon,
    pub prefixes: &'a PrefixMap,
}

/// Outcome for one question.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ParseResult {
    Answered {
        graph: QueryGraph,
        sparql: String,
        answer: Answer,
    },
    Unanswerable {
        stage: Stage,
        reason: String,
    },
}

impl ParseResult {
    /// Answer set for metric comparison; unanswerable questions predict
    /// the empty set.
    pub fn answer_set(&self) -> BTreeSet<String> {
        match self {
            ParseResult::Answered { answer, .. } => answer.as_string_set(),
            ParseResult::Unanswerable { .. } => BTreeSet::new(),
        }
    }

    pub fn sparql(&self) -> Option<&str> {
        match self {
            ParseResult::Answered { sparql, .. } => Some(sparql),
            ParseResult::Unanswerable { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineOutcome {
    pub id: String,
    pub result: ParseResult,
}

fn tables_for(
    record: &DatasetRecord,
    tokens: &[String],
    config: &EngineConfig,
    providers: &Providers,
) -> Result<(NeLabelTable, GcScoreTable), EngineError> {
    match &providers.scores {
        ScoreSource::Fixture(file) => {
            let scores = file.get(&record.id).ok_or_else(|| {
                EngineError::Input(format!("no score fixture for question {}", record.id))
            })?;
            if scores.n() != tokens.len() {
                return Err(EngineError::Input(format!(
                    "question {}: fixture has {} positions, token list has {}",
                    record.id,
                    scores.n(),
                    tokens.len()
                )));
            }
            Ok((scores.label_table()?, scores.score_table()?))
        }
        ScoreSource::Model { model, features } => {
            let feats = match features {
                FeatureMode::Deterministic => {
                    deterministic_features(tokens, model.dims.h_rb, config.seed)
                }
                FeatureMode::FromFixture(file) => file
                    .get(&record.id)
                    .and_then(|s| s.feature_matrix().transpose())
                    .transpose()?
                    .ok_or_else(|| {
                        EngineError::Input(format!("no feature fixture for question {}", record.id))
                    })?,
            };
            let noise = crate::model::Mat::zeros(feats.rows, NUM_LABELS);
            let trace = model
                .forward(&feats, &noise)
                .map_err(|e| EngineError::at(Stage::Parse, e))?;
            let ne = trace
                .label_table(None)
                .map_err(|e| EngineError::at(Stage::Parse, e))?;
            let gc = trace
                .score_table(None)
                .map_err(|e| EngineError::at(Stage::Parse, e))?;
            Ok((ne, gc))
        }
    }
}

/// Runs the full pipeline for one record.
pub fn run_pipeline(
    record: &DatasetRecord,
    store: &TripleStore,
    config: &EngineConfig,
    providers: &Providers,
) -> Result<PipelineOutcome, EngineError> {
    let query_type = classify_query_type(&record.question, providers.lexicon);

    let tokens: Vec<String> = match &record.tokens {
        Some(t) => t.clone(),
        None => {
            let mut t = vec!["[CLS]".to_string()];
            t.extend(tokenize(&record.question));
            if query_type == QueryType::Judge {
                t.push("[SEP]".to_string());
            }
            t
        }
    };
    if tokens.is_empty() {
        return Err(EngineError::Input(format!(
            "question {} has an empty token list",
            record.id
        )));
    }

    let (ne_table, gc_table) = tables_for(record, &tokens, config, providers)?;

    // synthetic positions always carry the outside label
    let mut labels = ne_table.argmax_labels();
    labels[CLS_POSITION] = LABEL_O;
    if query_type == QueryType::Judge {
        let last = labels.len() - 1;
        labels[last] = LABEL_O;
    }

    let spans = decode_ne(&labels);
    let nodes = spans_to_nodes(&spans);

    let structure = match decode_structure(&gc_table, &nodes, query_type, config.threshold) {
        Ok(s) => s,
        Err(DecodeError::NoNodes) => {
            return Ok(PipelineOutcome {
                id: record.id.clone(),
                result: ParseResult::Unanswerable {
                    stage: Stage::Parse,
                    reason: "no nodes decoded for a SELECT/COUNT question".into(),
                },
            })
        }
        Err(e) => return Err(EngineError::at(Stage::Parse, e)),
    };

    let (linked, _report) = match link_nodes(
        &structure,
        &tokens,
        store,
        providers.lookup,
        providers.type_dict,
        &config.linker,
    ) {
        Ok(out) => out,
        Err(LinkError::TargetDiscarded(mention)) => {
            return Ok(PipelineOutcome {
                id: record.id.clone(),
                result: ParseResult::Unanswerable {
                    stage: Stage::Link,
                    reason: format!("target mention {mention:?} could not be linked"),
                },
            })
        }
        Err(e) => return Err(EngineError::at(Stage::Link, e)),
    };

    let fixture_ranker: FixtureRanker;
    let ranker: &dyn Ranker = match &providers.ranker {
        RankerSource::Reference => &ReferenceRanker,
        RankerSource::Fixture(fixture) => {
            fixture_ranker = fixture.for_question(&record.id);
            &fixture_ranker
        }
    };

    let search = match beam_search_re(
        &record.question,
        &tokens,
        &linked,
        store,
        ranker,
        config.beam_width,
        config.binding_cap,
    ) {
        Ok(result) => result,
        Err(SearchError::DisconnectedStructure) => {
            return Ok(PipelineOutcome {
                id: record.id.clone(),
                result: ParseResult::Unanswerable {
                    stage: Stage::Re,
                    reason: "structure disconnected after linking".into(),
                },
            })
        }
        Err(e) => return Err(EngineError::at(Stage::Re, e)),
    };

    let graph = match search.beam.into_iter().next() {
        Some(g) => g,
        None => {
            return Ok(PipelineOutcome {
                id: record.id.clone(),
                result: ParseResult::Unanswerable {
                    stage: Stage::Re,
                    reason: "every beam element died during retrieval".into(),
                },
            })
        }
    };

    let sparql = emit_sparql(&graph, &tokens, providers.prefixes)
        .map_err(|e| EngineError::at(Stage::Exec, e))?;
    let answer = execute(store, &graph).map_err(|e| EngineError::at(Stage::Exec, e))?;

    Ok(PipelineOutcome {
        id: record.id.clone(),
        result: ParseResult::Answered {
            graph,
            sparql,
            answer,
        },
    })
}

/// Runs the pipeline over a batch of records. Questions are
/// independent; with the `parallel` feature they run concurrently over
/// the shared read-only store and providers. Output order follows the
/// input order either way.
pub fn run_batch(
    records: &[DatasetRecord],
    store: &TripleStore,
    config: &EngineConfig,
    providers: &Providers,
) -> Result<Vec<PipelineOutcome>, EngineError> {
    par::map_indexed(records.len(), |i| {
        run_pipeline(&records[i], store, config, providers)
    })
    .into_iter()
    .collect()
}

/// Sequential twin of [`run_batch`]; the benchmark baseline.
pub fn run_batch_seq(
    records: &[DatasetRecord],
    store: &TripleStore,
    config: &EngineConfig,
    providers: &Providers,
) -> Result<Vec<PipelineOutcome>, EngineError> {
    par::map_indexed_seq(records.len(), |i| {
        run_pipeline(&records[i], store, config, providers)
    })
    .into_iter()
    .collect()
}

/// Collects outcome answer sets keyed by question id.
pub fn answers_by_id(outcomes: &[PipelineOutcome]) -> BTreeMap<String, BTreeSet<String>> {
    outcomes
        .iter()
        .map(|o| (o.id.clone(), o.result.answer_set()))
        .collect()
}
