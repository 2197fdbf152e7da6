#![allow(dead_code)] // each test target uses a subset of these helpers

//! Shared helpers for the integration and acceptance suites.

pub mod golden;

use std::collections::BTreeMap;
use std::fs::File;
use std::io::BufReader;
use std::path::PathBuf;

use kbqa_core::kb::{load_triples, KbFormat, TripleStore};
use kbqa_core::linker::{FixtureLookupClient, TypeDictionary};
use kbqa_core::pipeline::{read_dataset, DatasetRecord, ScoreFixtureFile};
use kbqa_core::relation::RankerFixture;

/// Workspace-level bundled data directory.
pub fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data")
}

pub fn data_path(name: &str) -> PathBuf {
    data_dir().join(name)
}

pub fn load_toy_store() -> TripleStore {
    let file = File::open(data_path("toy_kb.tsv")).expect("bundled toy_kb.tsv");
    load_triples(BufReader::new(file), KbFormat::Tsv).expect("toy KB parses")
}

pub fn load_toy_dataset() -> Vec<DatasetRecord> {
    let file = File::open(data_path("toy_questions.jsonl")).expect("bundled questions");
    read_dataset(BufReader::new(file)).expect("dataset parses")
}

pub fn load_score_fixtures() -> ScoreFixtureFile {
    let file = File::open(data_path("toy_score_fixtures.json")).expect("bundled score fixtures");
    ScoreFixtureFile::load(BufReader::new(file)).expect("score fixtures parse")
}

pub fn load_ranker_fixture() -> RankerFixture {
    let file = File::open(data_path("toy_ranker_fixtures.json")).expect("bundled ranker fixtures");
    RankerFixture::from_json(BufReader::new(file)).expect("ranker fixtures parse")
}

pub fn load_lookup_client() -> FixtureLookupClient {
    let file = File::open(data_path("toy_lookup_fixtures.json")).expect("bundled lookup fixtures");
    FixtureLookupClient::from_json(BufReader::new(file)).expect("lookup fixtures parse")
}

pub fn load_type_dict() -> TypeDictionary {
    let file = File::open(data_path("toy_type_dict.tsv")).expect("bundled type dictionary");
    TypeDictionary::from_tsv(BufReader::new(file)).expect("dictionary parses")
}

/// Gold answers keyed by question id.
pub fn gold_answer_map(
    records: &[DatasetRecord],
) -> BTreeMap<String, std::collections::BTreeSet<String>> {
    records
        .iter()
        .map(|r| {
            (
                r.id.clone(),
                r.gold_answers
                    .clone()
                    .unwrap_or_default()
                    .into_iter()
                    .collect(),
            )
        })
        .collect()
}
