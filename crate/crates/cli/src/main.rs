//! Command-line interface: parse single questions, answer datasets,
//! evaluate answers, and run the beam-vs-oracle and beam-vs-baseline
//! reports.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use kbqa_core::kb::{load_triples, KbFormat, Term, Triple, TripleStore};
use kbqa_core::linker::{FixtureLookupClient, TypeDictionary};
use kbqa_core::model::{checkpoint, StructureModel};
use kbqa_core::pipeline::{
    evaluate, read_dataset, run_batch, run_pipeline, DatasetRecord, EngineConfig, FeatureMode,
    ParseResult, Providers, RankerSource, ScoreFixtureFile, ScoreSource,
};
use kbqa_core::query_graph::{Direction, NodeTag, QueryType};
use kbqa_core::relation::synthetic::{hub_chain_structure, star_store, star_tokens};
use kbqa_core::relation::{baseline_re, beam_search_re, brute_force_re, Ranker, RankerFixture};
use kbqa_core::sparql::{prefix_map_from_tsv, PrefixMap, TriggerLexicon};

#[derive(Parser)]
#[command(
    name = "kbqa",
    about = "Question-to-query-graph engine over an in-memory triple store"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Scorer {
    Reference,
    Fixture,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Format {
    Text,
    Structured,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum KbFormatArg {
    Tsv,
    Nt,
}

#[derive(Args)]
struct EngineArgs {
    /// Triple store file.
    #[arg(long)]
    kb: Option<PathBuf>,
    /// KB file format.
    #[arg(long, value_enum, default_value = "tsv")]
    kb_format: KbFormatArg,
    /// Dataset (one JSON record per line).
    #[arg(long)]
    dataset: Option<PathBuf>,
    /// Score fixture file (per-question tensors).
    #[arg(long)]
    fixtures: Option<PathBuf>,
    /// Model checkpoint (tensor JSON).
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    /// Ranker fixture file.
    #[arg(long)]
    ranker_fixtures: Option<PathBuf>,
    /// Entity lookup fixture file.
    #[arg(long)]
    lookup_fixtures: Option<PathBuf>,
    /// Mention-to-type dictionary (TSV).
    #[arg(long)]
    type_dict: Option<PathBuf>,
    /// Trigger lexicon (TSV); built-in defaults if absent.
    #[arg(long)]
    lexicon: Option<PathBuf>,
    /// Prefix map (TSV) for URI compaction.
    #[arg(long)]
    prefixes: Option<PathBuf>,
    /// Beam width in relation extraction.
    #[arg(long, default_value_t = 4)]
    beam_width: usize,
    /// Edge-probability threshold in structure decoding.
    #[arg(long, default_value_t = 0.5)]
    threshold: f64,
    /// Binding cap per grounded endpoint in retrieval.
    #[arg(long, default_value_t = 64)]
    binding_cap: usize,
    /// Candidate scorer for relation extraction.
    #[arg(long, value_enum, default_value = "reference")]
    scorer: Scorer,
    /// Seed for deterministic features and sampling.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output format.
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

#[derive(Subcommand)]
enum Command {
    /// Parse one question into a structure and SPARQL text.
    Parse {
        #[command(flatten)]
        engine: EngineArgs,
        /// Question text (tokenized on the fly). Alternatively use
        /// --dataset with --id.
        #[arg(long)]
        question: Option<String>,
        /// Question id within --dataset.
        #[arg(long)]
        id: Option<String>,
    },
    /// Answer every dataset question against the KB.
    Answer {
        #[command(flatten)]
        engine: EngineArgs,
        /// Write the answer report here instead of stdout.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Compare predicted answers with gold answers.
    Eval {
        /// Predictions: JSON map id -> [answers] (or an `answer`
        /// structured report).
        #[arg(long)]
        predictions: PathBuf,
        /// Gold answers: dataset JSONL with gold_answers, or a JSON
        /// map id -> [answers].
        #[arg(long)]
        gold: PathBuf,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Randomized beam-vs-exhaustive-oracle agreement report.
    OracleCheck {
        #[arg(long, default_value_t = 200)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 4)]
        beam_width: usize,
        /// Cap on the exhaustive oracle's assignment space.
        #[arg(long, default_value_t = kbqa_core::relation::EXHAUSTIVE_GUARD)]
        guard: u64,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Candidate-count report: beam search vs k-hop baseline on
    /// synthetic degree-n stores.
    BenchRe {
        /// Comma-separated store degrees.
        #[arg(long, default_value = "10,30,50")]
        degrees: String,
        /// Maximum chain length.
        #[arg(long, default_value_t = 3)]
        hops: usize,
        #[arg(long, default_value_t = 64)]
        binding_cap: usize,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
}

fn main() {
    let cli = Cli::parse();
    if let Err(err) = run(cli) {
        eprintln!("error: {err:#}");
        std::process::exit(1);
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Parse {
            engine,
            question,
            id,
        } => cmd_parse(engine, question, id),
        Command::Answer { engine, output } => cmd_answer(engine, output),
        Command::Eval {
            predictions,
            gold,
            format,
        } => cmd_eval(&predictions, &gold, format),
        Command::OracleCheck {
            trials,
            seed,
            beam_width,
            guard,
            format,
        } => cmd_oracle_check(trials, seed, beam_width, guard, format),
        Command::BenchRe {
            degrees,
            hops,
            binding_cap,
            format,
        } => cmd_bench_re(&degrees, hops, binding_cap, format),
    }
}

struct LoadedEnv {
    store: TripleStore,
    config: EngineConfig,
    scores: Option<ScoreFixtureFile>,
    model: Option<StructureModel>,
    ranker_fixture: Option<RankerFixture>,
    lookup: FixtureLookupClient,
    type_dict: TypeDictionary,
    lexicon: TriggerLexicon,
    prefixes: PrefixMap,
    scorer: Scorer,
    format: Format,
}

fn open(path: &Path) -> Result<BufReader<File>> {
    Ok(BufReader::new(
        File::open(path).with_context(|| format!("opening {}", path.display()))?,
    ))
}

fn load_env(args: &EngineArgs) -> Result<LoadedEnv> {
    let store = match &args.kb {
        Some(path) => {
            let format = match args.kb_format {
                KbFormatArg::Tsv => KbFormat::Tsv,
                KbFormatArg::Nt => KbFormat::NTriples,
            };
            load_triples(open(path)?, format).context("loading KB")?
        }
        None => TripleStore::default(),
    };
    let scores = match &args.fixtures {
        Some(path) => Some(ScoreFixtureFile::load(open(path)?).context("loading fixtures")?),
        None => None,
    };
    let model = match &args.checkpoint {
        Some(path) => Some(checkpoint::load(open(path)?).context("loading checkpoint")?),
        None => None,
    };
    if scores.is_none() && model.is_none() {
        bail!("need --fixtures or --checkpoint to score questions");
    }
    let ranker_fixture = match &args.ranker_fixtures {
        Some(path) => {
            Some(RankerFixture::from_json(open(path)?).context("loading ranker fixtures")?)
        }
        None => None,
    };
    if args.scorer == Scorer::Fixture && ranker_fixture.is_none() {
        bail!("--scorer fixture needs --ranker-fixtures");
    }
    let lookup = match &args.lookup_fixtures {
        Some(path) => FixtureLookupClient::from_json(open(path)?)
            .map_err(|e| anyhow!("loading lookup fixtures: {e}"))?,
        None => FixtureLookupClient::default(),
    };
    let type_dict = match &args.type_dict {
        Some(path) => TypeDictionary::from_tsv(open(path)?).context("loading type dictionary")?,
        None => TypeDictionary::default(),
    };
    let lexicon = match &args.lexicon {
        Some(path) => TriggerLexicon::from_tsv(open(path)?).context("loading lexicon")?,
        None => TriggerLexicon::default(),
    };
    let prefixes = match &args.prefixes {
        Some(path) => prefix_map_from_tsv(open(path)?).context("loading prefixes")?,
        None => PrefixMap::new(),
    };
    let mut config = EngineConfig {
        beam_width: args.beam_width,
        threshold: args.threshold,
        binding_cap: args.binding_cap,
        seed: args.seed,
        ..EngineConfig::default()
    };
    if let Some(m) = &model {
        config.dims = m.dims;
        config.tau = m.transfer.tau;
    }
    Ok(LoadedEnv {
        store,
        config,
        scores,
        model,
        ranker_fixture,
        lookup,
        type_dict,
        lexicon,
        prefixes,
        scorer: args.scorer,
        format: args.format,
    })
}

impl LoadedEnv {
    fn providers(&self) -> Providers<'_> {
        let scores = match (&self.model, &self.scores) {
            (Some(model), Some(fixtures)) => ScoreSource::Model {
                model,
                features: FeatureMode::FromFixture(fixtures),
            },
            (Some(model), None) => ScoreSource::Model {
                model,
                features: FeatureMode::Deterministic,
            },
            (None, Some(fixtures)) => ScoreSource::Fixture(fixtures),
            (None, None) => unreachable!("validated in load_env"),
        };
        let ranker = match (self.scorer, &self.ranker_fixture) {
            (Scorer::Fixture, Some(fixture)) => RankerSource::Fixture(fixture),
            _ => RankerSource::Reference,
        };
        Providers {
            scores,
            ranker,
            lookup: &self.lookup,
            type_dict: &self.type_dict,
            lexicon: &self.lexicon,
            prefixes: &self.prefixes,
        }
    }
}

fn cmd_parse(args: EngineArgs, question: Option<String>, id: Option<String>) -> Result<()> {
    let env = load_env(&args)?;
    let record = match (question, id, &args.dataset) {
        (Some(q), None, _) => DatasetRecord {
            id: "q".to_string(),
            question: q,
            tokens: None,
            gold_sparql: None,
            nodes: None,
            gold_answers: None,
        },
        (None, Some(id), Some(path)) => {
            let records = read_dataset(open(path)?)?;
            records
                .into_iter()
                .find(|r| r.id == id)
                .ok_or_else(|| anyhow!("question {id} not in dataset"))?
        }
        _ => bail!("pass --question TEXT, or --dataset PATH with --id ID"),
    };
    let outcome = run_pipeline(&record, &env.store, &env.config, &env.providers())?;
    match env.format {
        Format::Structured => println!("{}", serde_json::to_string_pretty(&outcome)?),
        Format::Text => match &outcome.result {
            ParseResult::Answered {
                graph,
                sparql,
                answer,
            } => {
                let qt = match graph.structure.query_type {
                    QueryType::Select => "SELECT",
                    QueryType::Count => "COUNT",
                    QueryType::Judge => "JUDGE",
                };
                println!("query type: {qt}");
                println!("nodes:");
                for node in &graph.structure.nodes {
                    let tag = match node.tag {
                        NodeTag::Variable => "variable",
                        NodeTag::Entity => "entity",
                        NodeTag::Type => "type",
                    };
                    println!(
                        "  {} {} [{}, {}) {}",
                        node.id,
                        tag,
                        node.span.start,
                        node.span.end,
                        node.uri.as_deref().unwrap_or("-")
                    );
                }
                println!("edges:");
                for b in &graph.bindings {
                    let arrow = match b.direction {
                        Direction::Forward => "->",
                        Direction::Reverse => "<-",
                    };
                    println!(
                        "  {} {arrow} {} via {} (score {:.3})",
                        b.edge.a, b.edge.b, b.predicate, b.score
                    );
                }
                match graph.structure.target {
                    Some(t) => println!("target: {t}"),
                    None => println!("target: -"),
                }
                println!("sparql: {sparql}");
                println!("answer: {}", render_answers(&answer.as_string_set()));
            }
            ParseResult::Unanswerable { stage, reason } => {
                println!("unanswerable at {stage}: {reason}");
            }
        },
    }
    Ok(())
}

fn render_answers(set: &BTreeSet<String>) -> String {
    if set.is_empty() {
        "-".to_string()
    } else {
        set.iter().cloned().collect::<Vec<_>>().join(", ")
    }
}

fn cmd_answer(args: EngineArgs, output: Option<PathBuf>) -> Result<()> {
    let dataset_path = args
        .dataset
        .clone()
        .ok_or_else(|| anyhow!("answer needs --dataset"))?;
    let env = load_env(&args)?;
    let records = read_dataset(open(&dataset_path)?)?;
    let outcomes = run_batch(&records, &env.store, &env.config, &env.providers())?;

    let rendered = match env.format {
        Format::Structured => {
            #[derive(serde::Serialize)]
            struct Entry {
                answers: Vec<String>,
                #[serde(skip_serializing_if = "Option::is_none")]
                sparql: Option<String>,
                #[serde(skip_serializing_if = "Option::is_none")]
                unanswerable: Option<String>,
            }
            let map: BTreeMap<String, Entry> = outcomes
                .iter()
                .map(|o| {
                    let (sparql, unanswerable) = match &o.result {
                        ParseResult::Answered { sparql, .. } => (Some(sparql.clone()), None),
                        ParseResult::Unanswerable { stage, reason } => {
                            (None, Some(format!("{stage}: {reason}")))
                        }
                    };
                    (
                        o.id.clone(),
                        Entry {
                            answers: o.result.answer_set().into_iter().collect(),
                            sparql,
                            unanswerable,
                        },
                    )
                })
                .collect();
            serde_json::to_string_pretty(&map)? + "\n"
        }
        Format::Text => {
            let mut out = String::new();
            for o in &outcomes {
                match &o.result {
                    ParseResult::Answered { sparql, answer, .. } => {
                        out += &format!(
                            "{}\t{}\t{}\n",
                            o.id,
                            render_answers(&answer.as_string_set()),
                            sparql
                        );
                    }
                    ParseResult::Unanswerable { stage, reason } => {
                        out += &format!("{}\tunanswerable[{stage}]\t{reason}\n", o.id);
                    }
                }
            }
            out
        }
    };
    match output {
        Some(path) => {
            File::create(&path)?.write_all(rendered.as_bytes())?;
        }
        None => print!("{rendered}"),
    }
    Ok(())
}

fn load_answer_map(path: &Path) -> Result<BTreeMap<String, BTreeSet<String>>> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    // bare map id -> [answers]
    if let Ok(map) = serde_json::from_str::<BTreeMap<String, Vec<String>>>(&text) {
        return Ok(map
            .into_iter()
            .map(|(k, v)| (k, v.into_iter().collect()))
            .collect());
    }
    // `answer --format structured` report
    #[derive(serde::Deserialize)]
    struct Entry {
        answers: Vec<String>,
    }
    if let Ok(map) = serde_json::from_str::<BTreeMap<String, Entry>>(&text) {
        return Ok(map
            .into_iter()
            .map(|(k, v)| (k, v.answers.into_iter().collect()))
            .collect());
    }
    // dataset JSONL with gold_answers
    let records = read_dataset(text.as_bytes())?;
    Ok(records
        .into_iter()
        .map(|r| {
            (
                r.id,
                r.gold_answers.unwrap_or_default().into_iter().collect(),
            )
        })
        .collect())
}

fn cmd_eval(predictions: &Path, gold: &Path, format: Format) -> Result<()> {
    let pred = load_answer_map(predictions)?;
    let gold = load_answer_map(gold)?;
    let metrics = evaluate(&pred, &gold)?;
    match format {
        Format::Structured => println!("{}", serde_json::to_string_pretty(&metrics)?),
        Format::Text => {
            for (id, m) in &metrics.per_question {
                println!(
                    "{id}\tP {:.3}\tR {:.3}\tF1 {:.3}",
                    m.precision, m.recall, m.f1
                );
            }
            println!(
                "macro\tP {:.3}\tR {:.3}\tF1 {:.3}",
                metrics.macro_precision, metrics.macro_recall, metrics.macro_f1
            );
        }
    }
    Ok(())
}

/// Deterministic xorshift for trial generation.
struct TrialRng(u64);

impl TrialRng {
    fn next_u64(&mut self) -> u64 {
        self.0 ^= self.0 << 13;
        self.0 ^= self.0 >> 7;
        self.0 ^= self.0 << 17;
        self.0
    }
    fn below(&mut self, n: usize) -> usize {
        (self.next_u64() % n as u64) as usize
    }
}

/// Deterministic pseudo-random ranker for the synthetic reports: every
/// (predicate, direction) pair gets a distinct stable score.
struct SaltedRanker(u64);

impl Ranker for SaltedRanker {
    fn rank(
        &self,
        candidates: &BTreeSet<kbqa_core::kb::DirectedPredicate>,
        _q: &str,
        _m1: &str,
        _m2: &str,
    ) -> Vec<(kbqa_core::kb::DirectedPredicate, f64)> {
        let mut out: Vec<(kbqa_core::kb::DirectedPredicate, f64)> = candidates
            .iter()
            .map(|c| {
                let mut h = self.0 ^ 0xcbf29ce484222325;
                for b in c.predicate.bytes() {
                    h = (h ^ b as u64).wrapping_mul(0x100000001b3);
                }
                h = (h ^ (c.direction == Direction::Reverse) as u64).wrapping_mul(0x100000001b3);
                (
                    c.clone(),
                    0.02 + 0.96 * ((h >> 11) as f64 / (1u64 << 53) as f64),
                )
            })
            .collect();
        out.sort_by(|a, b| {
            b.1.partial_cmp(&a.1)
                .unwrap()
                .then_with(|| a.0.predicate.cmp(&b.0.predicate))
                .then_with(|| a.0.direction.cmp(&b.0.direction))
        });
        out
    }
}

fn cmd_oracle_check(
    trials: u64,
    seed: u64,
    beam_width: usize,
    guard: u64,
    format: Format,
) -> Result<()> {
    let tokens = star_tokens();
    let mut saturated_agreements = 0u64;
    let mut beam_hits = 0u64;
    let mut unsatisfiable = 0u64;
    for trial in 0..trials {
        let mut rng = TrialRng((seed ^ 0xBEA1).wrapping_add(trial.wrapping_mul(0x9E37)) | 1);
        let nodes = 12 + rng.below(29);
        let degree = 1 + rng.below(8);
        let mut triples = vec![Triple::new("dbr:e0", "dbp:p0", Term::uri("dbr:e1"))];
        for node in 0..nodes {
            for _ in 0..degree {
                if rng.below(3) == 0 {
                    continue;
                }
                triples.push(Triple::new(
                    format!("dbr:e{node}"),
                    format!("dbp:p{}", rng.below(8)),
                    Term::uri(format!("dbr:e{}", rng.below(nodes))),
                ));
            }
        }
        let store = TripleStore::from_triples(triples);
        let mut structure = hub_chain_structure(1 + (trial % 3) as usize);
        if let Some(anchor) = structure.nodes.first_mut() {
            anchor.uri = Some("dbr:e0".to_string());
        }
        let ranker = SaltedRanker(trial ^ seed);
        let brute = brute_force_re("q", &tokens, &structure, &store, &ranker, guard)?;
        let width = (brute.leaves.max(1) as usize).min(guard as usize);
        let beam = beam_search_re("q", &tokens, &structure, &store, &ranker, width, 1_000)?;
        match (&brute.graph, beam.best()) {
            (None, None) => {
                unsatisfiable += 1;
                saturated_agreements += 1;
                beam_hits += 1;
            }
            (Some(bg), Some(top)) => {
                if bg.bindings != top.bindings {
                    bail!("trial {trial}: saturated beam disagrees with the oracle");
                }
                saturated_agreements += 1;
                let narrow =
                    beam_search_re("q", &tokens, &structure, &store, &ranker, beam_width, 1_000)?;
                if narrow.beam.iter().any(|g| g.bindings == bg.bindings) {
                    beam_hits += 1;
                }
            }
            (b, t) => bail!(
                "trial {trial}: oracle answered {} but beam answered {}",
                b.is_some(),
                t.is_some()
            ),
        }
    }
    let hit_rate = beam_hits as f64 / trials.max(1) as f64;
    match format {
        Format::Structured => {
            let report = serde_json::json!({
                "trials": trials,
                "saturated_agreements": saturated_agreements,
                "beam_width": beam_width,
                "beam_hits": beam_hits,
                "beam_hit_rate": hit_rate,
                "unsatisfiable_trials": unsatisfiable,
            });
            println!("{}", serde_json::to_string_pretty(&report)?);
        }
        Format::Text => {
            println!("trials: {trials}");
            println!("saturated beam == oracle argmax: {saturated_agreements}/{trials}");
            println!(
                "oracle argmax within beam of {beam_width}: {beam_hits}/{trials} ({hit_rate:.3})"
            );
            println!("unsatisfiable trials: {unsatisfiable}");
        }
    }
    Ok(())
}

fn cmd_bench_re(degrees: &str, hops: usize, binding_cap: usize, format: Format) -> Result<()> {
    let degrees: Vec<usize> = degrees
        .split(',')
        .map(|d| d.trim().parse::<usize>().context("parsing --degrees"))
        .collect::<Result<_>>()?;
    let tokens = star_tokens();
    let mut rows = Vec::new();
    for &n in &degrees {
        let store = star_store(n, hops);
        for k in 1..=hops {
            let structure = hub_chain_structure(k);
            let ranker = SaltedRanker(n as u64 * 31 + k as u64);
            let baseline = baseline_re("q", &tokens, &structure, &store, &ranker, hops)?;
            let beam = beam_search_re("q", &tokens, &structure, &store, &ranker, 4, binding_cap)?;
            rows.push(serde_json::json!({
                "degree": n,
                "hops": k,
                "baseline_enumerated": baseline.total_enumerated(),
                "baseline_per_edge": baseline.per_edge_candidates,
                "beam_total_retrieved": beam.total_candidates(),
                "beam_max_step_retrieval": beam.retrieval_sizes.iter().max().copied().unwrap_or(0),
            }));
        }
    }
    match format {
        Format::Structured => println!("{}", serde_json::to_string_pretty(&rows)?),
        Format::Text => {
            println!("degree\thops\tbaseline-enumerated\tbeam-total\tbeam-max-step");
            for row in &rows {
                println!(
                    "{}\t{}\t{}\t{}\t{}",
                    row["degree"],
                    row["hops"],
                    row["baseline_enumerated"],
                    row["beam_total_retrieved"],
                    row["beam_max_step_retrieval"]
                );
            }
        }
    }
    Ok(())
}
