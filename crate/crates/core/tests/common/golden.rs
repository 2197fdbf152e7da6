//! Definitions of the bundled toy KB and its 20 handcrafted questions:
//! token lists, node annotations, gold structures, gold predicate
//! bindings with fixture scores, expected SPARQL, and gold answers.
//! The `golden_gen` test target serializes these into `data/`; the
//! acceptance suite reads the files back and checks the pipeline
//! reproduces everything.

use kbqa_core::pipeline::{DatasetRecord, NodeAnnotation};
use kbqa_core::query_graph::{
    Direction, EdgeKey, NodeId, QueryGraph, QueryGraphStructure, QueryType,
};
use kbqa_core::relation::{RankerFixture, RankerFixtureEntry};

pub const KB_TSV: &str = "\
dbr:New_York\trdf:type\tdbo:City
dbr:Chicago\trdf:type\tdbo:City
dbr:Columbus\trdf:type\tdbo:City
dbr:Cleveland\trdf:type\tdbo:City
dbr:Cincinnati\trdf:type\tdbo:City
dbr:Boston\trdf:type\tdbo:City
dbr:Berlin\trdf:type\tdbo:City
dbr:Munich\trdf:type\tdbo:City
dbr:Paris\trdf:type\tdbo:City
dbr:Hamburg\trdf:type\tdbo:City
dbr:Bonn\trdf:type\tdbo:City
dbr:Hannibal\trdf:type\tdbo:City
dbr:Honolulu\trdf:type\tdbo:City
dbr:Washington_DC\trdf:type\tdbo:City
dbr:Ohio\trdf:type\tdbo:State
dbr:Illinois\trdf:type\tdbo:State
dbr:Massachusetts\trdf:type\tdbo:State
dbr:Missouri\trdf:type\tdbo:State
dbr:Hawaii\trdf:type\tdbo:State
dbr:Germany\trdf:type\tdbo:Country
dbr:France\trdf:type\tdbo:Country
dbr:United_States\trdf:type\tdbo:Country
dbr:Columbus\tdbo:state\tdbr:Ohio
dbr:Cleveland\tdbo:state\tdbr:Ohio
dbr:Cincinnati\tdbo:state\tdbr:Ohio
dbr:Chicago\tdbo:state\tdbr:Illinois
dbr:Boston\tdbo:state\tdbr:Massachusetts
dbr:Hannibal\tdbo:state\tdbr:Missouri
dbr:Honolulu\tdbo:state\tdbr:Hawaii
dbr:Berlin\tdbo:country\tdbr:Germany
dbr:Munich\tdbo:country\tdbr:Germany
dbr:Hamburg\tdbo:country\tdbr:Germany
dbr:Paris\tdbo:country\tdbr:France
dbr:New_York\tdbo:country\tdbr:United_States
dbr:Chicago\tdbo:country\tdbr:United_States
dbr:Boston\tdbo:country\tdbr:United_States
dbr:Germany\tdbo:capital\tdbr:Berlin
dbr:France\tdbo:capital\tdbr:Paris
dbr:Ohio\tdbo:capital\tdbr:Columbus
dbr:United_States\tdbo:capital\tdbr:Washington_DC
dbr:Germany\tdbo:leader\tdbr:Olaf_Scholz
dbr:France\tdbo:leader\tdbr:Emmanuel_Macron
dbr:Berlin\tdbo:mayor\tdbr:Kai_Wegner
dbr:Chicago\tdbo:mayor\tdbr:Brandon_Johnson
dbr:New_York\tdbo:mayor\tdbr:Eric_Adams
dbr:Olaf_Scholz\trdf:type\tdbo:Politician
dbr:Olaf_Scholz\trdf:type\tdbo:Person
dbr:Emmanuel_Macron\trdf:type\tdbo:Politician
dbr:Emmanuel_Macron\trdf:type\tdbo:Person
dbr:Kai_Wegner\trdf:type\tdbo:Politician
dbr:Kai_Wegner\trdf:type\tdbo:Person
dbr:Brandon_Johnson\trdf:type\tdbo:Politician
dbr:Eric_Adams\trdf:type\tdbo:Politician
dbr:Angela_Merkel\trdf:type\tdbo:Politician
dbr:Angela_Merkel\trdf:type\tdbo:Person
dbr:Angela_Merkel\tdbo:birthPlace\tdbr:Hamburg
dbr:Barack_Obama\trdf:type\tdbo:Politician
dbr:Barack_Obama\trdf:type\tdbo:Person
dbr:Barack_Obama\tdbo:birthPlace\tdbr:Honolulu
dbr:Barack_Obama\tdbo:spouse\tdbr:Michelle_Obama
dbr:Michelle_Obama\trdf:type\tdbo:Person
dbr:Neil_Armstrong\trdf:type\tdbo:Astronaut
dbr:Neil_Armstrong\trdf:type\tdbo:Person
dbr:Neil_Armstrong\tdbo:birthPlace\tdbr:Cincinnati
dbr:Neil_Armstrong\tdbo:almaMater\tdbr:Purdue_University
dbr:John_Glenn\trdf:type\tdbo:Astronaut
dbr:John_Glenn\trdf:type\tdbo:Person
dbr:John_Glenn\tdbo:birthPlace\tdbr:Cleveland
dbr:John_Glenn\tdbo:almaMater\tdbr:Muskingum_University
dbr:Judith_Resnik\trdf:type\tdbo:Astronaut
dbr:Judith_Resnik\trdf:type\tdbo:Person
dbr:Judith_Resnik\tdbo:birthPlace\tdbr:Cleveland
dbr:Mark_Twain\trdf:type\tdbo:Writer
dbr:Mark_Twain\trdf:type\tdbo:Person
dbr:Mark_Twain\tdbo:birthPlace\tdbr:Hannibal
dbr:Mark_Twain\tdbo:notableWork\tdbr:Adventures_of_Huckleberry_Finn
dbr:Toni_Morrison\trdf:type\tdbo:Writer
dbr:Toni_Morrison\trdf:type\tdbo:Person
dbr:Toni_Morrison\tdbo:birthPlace\tdbr:Cleveland
dbr:Toni_Morrison\tdbo:award\tdbr:Nobel_Prize_in_Literature
dbr:The_Adventures_of_Tom_Sawyer\trdf:type\tdbo:Book
dbr:The_Adventures_of_Tom_Sawyer\tdbo:author\tdbr:Mark_Twain
dbr:The_Adventures_of_Tom_Sawyer\tdbo:publisher\tdbr:American_Publishing_Company
dbr:Adventures_of_Huckleberry_Finn\trdf:type\tdbo:Book
dbr:Adventures_of_Huckleberry_Finn\tdbo:author\tdbr:Mark_Twain
dbr:Beloved\trdf:type\tdbo:Book
dbr:Beloved\tdbo:author\tdbr:Toni_Morrison
dbr:Beloved\tdbo:publisher\tdbr:Alfred_A_Knopf
dbr:Ludwig_van_Beethoven\trdf:type\tdbo:Composer
dbr:Ludwig_van_Beethoven\trdf:type\tdbo:Person
dbr:Ludwig_van_Beethoven\tdbo:birthPlace\tdbr:Bonn
dbr:Ludwig_van_Beethoven\tdbo:era\tdbr:Classical_period
dbr:Ohio_River\trdf:type\tdbo:River
dbr:Cuyahoga_River\trdf:type\tdbo:River
dbr:Seine\trdf:type\tdbo:River
dbr:Ohio_River\tdbo:crosses\tdbr:Cincinnati
dbr:Cuyahoga_River\tdbo:crosses\tdbr:Cleveland
dbr:Seine\tdbo:crosses\tdbr:Paris
";

pub const TYPE_DICT_TSV: &str = "people\tdbo:Person\n";

pub const LOOKUP_FIXTURES_JSON: &str = r#"{
  "beethoven": [
    {"uri": "dbr:Ludwig_van_Beethoven", "name": "Ludwig van Beethoven", "score": 0.9},
    {"uri": "dbr:Beethoven_Film", "name": "Beethoven (film)", "score": 0.7}
  ],
  "tom sawyer": [
    {"uri": "dbr:The_Adventures_of_Tom_Sawyer", "name": "The Adventures of Tom Sawyer", "score": 0.85}
  ]
}"#;

/// One golden question.
pub struct Golden {
    pub id: &'static str,
    pub question: &'static str,
    /// Full token list including [CLS] (and [SEP] for JUDGE).
    pub tokens: &'static [&'static str],
    pub query_type: QueryType,
    /// Annotations in id order (span order, Variable < Entity < Type on
    /// span ties). Unlinkable nodes carry no uri.
    pub annotations: &'static [(usize, usize, &'static str, Option<&'static str>)],
    /// Structure edges over annotation indexes, including edges that
    /// linking later removes.
    pub edges: &'static [(u32, u32)],
    pub target: Option<u32>,
    /// Post-linking gold bindings: (a, b, predicate, direction,
    /// fixture score), in beam binding order.
    pub bindings: &'static [(u32, u32, &'static str, Direction, f64)],
    pub sparql: &'static str,
    pub answers: &'static [&'static str],
}

use Direction::{Forward as F, Reverse as R};

pub fn goldens() -> Vec<Golden> {
    vec![
        Golden {
            id: "q01",
            question: "Is New York a city?",
            tokens: &["[CLS]", "Is", "New", "York", "a", "city", "[SEP]"],
            query_type: QueryType::Judge,
            annotations: &[(2, 4, "E", Some("dbr:New_York")), (5, 6, "T", Some("dbo:City"))],
            edges: &[(0, 1)],
            target: None,
            bindings: &[(0, 1, "rdf:type", F, 0.98)],
            sparql: "ask {dbr:New_York a dbo:City}",
            answers: &["true"],
        },
        Golden {
            id: "q02",
            question: "Is Paris the capital of Germany?",
            tokens: &["[CLS]", "Is", "Paris", "the", "capital", "of", "Germany", "[SEP]"],
            query_type: QueryType::Judge,
            annotations: &[(2, 3, "E", Some("dbr:Paris")), (6, 7, "E", Some("dbr:Germany"))],
            edges: &[(0, 1)],
            target: None,
            bindings: &[(0, 1, "dbo:capital", R, 0.95)],
            sparql: "ask {dbr:Germany dbo:capital dbr:Paris}",
            answers: &["false"],
        },
        Golden {
            id: "q03",
            question: "Which country is Berlin located in?",
            tokens: &["[CLS]", "Which", "country", "is", "Berlin", "located", "in"],
            query_type: QueryType::Select,
            annotations: &[
                (2, 3, "V", None),
                (2, 3, "T", Some("dbo:Country")),
                (4, 5, "E", Some("dbr:Berlin")),
            ],
            edges: &[(0, 1), (0, 2)],
            target: Some(0),
            bindings: &[(0, 1, "rdf:type", F, 0.9), (0, 2, "dbo:country", R, 0.92)],
            sparql: "select ?country {?country a dbo:Country. dbr:Berlin dbo:country ?country}",
            answers: &["dbr:Germany"],
        },
        Golden {
            id: "q04",
            question: "How many cities are in Ohio?",
            tokens: &["[CLS]", "How", "many", "cities", "are", "in", "Ohio"],
            query_type: QueryType::Count,
            annotations: &[
                (3, 4, "V", None),
                (3, 4, "T", Some("dbo:City")),
                (6, 7, "E", Some("dbr:Ohio")),
            ],
            edges: &[(0, 1), (0, 2)],
            target: Some(0),
            bindings: &[(0, 1, "rdf:type", F, 0.9), (0, 2, "dbo:state", F, 0.93)],
            sparql: "select count(?cities) {?cities a dbo:City. ?cities dbo:state dbr:Ohio}",
            answers: &["3"],
        },
        Golden {
            id: "q05",
            question: "Where was Beethoven born?",
            tokens: &["[CLS]", "Where", "was", "Beethoven", "born"],
            query_type: QueryType::Select,
            annotations: &[
                (1, 2, "V", None),
                (3, 4, "E", Some("dbr:Ludwig_van_Beethoven")),
            ],
            edges: &[(0, 1)],
            target: Some(0),
            bindings: &[(0, 1, "dbo:birthPlace", R, 0.94)],
            sparql: "select ?where {dbr:Ludwig_van_Beethoven dbo:birthPlace ?where}",
            answers: &["dbr:Bonn"],
        },
        Golden {
            id: "q06",
            question: "Which astronauts were born in cities in Ohio?",
            tokens: &["[CLS]", "Which", "astronauts", "were", "born", "in", "cities", "in", "Ohio"],
            query_type: QueryType::Select,
            annotations: &[
                (2, 3, "V", None),
                (2, 3, "T", Some("dbo:Astronaut")),
                (6, 7, "V", None),
                (6, 7, "T", Some("dbo:City")),
                (8, 9, "E", Some("dbr:Ohio")),
            ],
            edges: &[(0, 1), (0, 2), (2, 3), (2, 4)],
            target: Some(0),
            bindings: &[
                (0, 1, "rdf:type", F, 0.9),
                (0, 2, "dbo:birthPlace", F, 0.91),
                (2, 3, "rdf:type", F, 0.9),
                (2, 4, "dbo:state", F, 0.93),
            ],
            sparql: "select ?astronauts {?astronauts a dbo:Astronaut. ?astronauts dbo:birthPlace ?cities. ?cities a dbo:City. ?cities dbo:state dbr:Ohio}",
            answers: &["dbr:John_Glenn", "dbr:Judith_Resnik", "dbr:Neil_Armstrong"],
        },
        Golden {
            id: "q07",
            question: "Which rivers cross cities where astronauts were born?",
            tokens: &[
                "[CLS]", "Which", "rivers", "cross", "cities", "where", "astronauts", "were",
                "born",
            ],
            query_type: QueryType::Select,
            annotations: &[
                (2, 3, "V", None),
                (2, 3, "T", Some("dbo:River")),
                (4, 5, "V", None),
                (4, 5, "T", Some("dbo:City")),
                (6, 7, "V", None),
                (6, 7, "T", Some("dbo:Astronaut")),
            ],
            edges: &[(0, 1), (0, 2), (2, 3), (2, 4), (4, 5)],
            target: Some(0),
            bindings: &[
                (0, 1, "rdf:type", F, 0.9),
                (0, 2, "dbo:crosses", F, 0.92),
                (2, 3, "rdf:type", F, 0.9),
                (2, 4, "dbo:birthPlace", R, 0.91),
                (4, 5, "rdf:type", F, 0.9),
            ],
            sparql: "select ?rivers {?rivers a dbo:River. ?rivers dbo:crosses ?cities. ?cities a dbo:City. ?astronauts dbo:birthPlace ?cities. ?astronauts a dbo:Astronaut}",
            answers: &["dbr:Cuyahoga_River", "dbr:Ohio_River"],
        },
        Golden {
            id: "q08",
            question: "How many books did Mark Twain write?",
            tokens: &["[CLS]", "How", "many", "books", "did", "Mark", "Twain", "write"],
            query_type: QueryType::Count,
            annotations: &[
                (3, 4, "V", None),
                (3, 4, "T", Some("dbo:Book")),
                (5, 7, "E", Some("dbr:Mark_Twain")),
            ],
            edges: &[(0, 1), (0, 2)],
            target: Some(0),
            bindings: &[(0, 1, "rdf:type", F, 0.9), (0, 2, "dbo:author", F, 0.94)],
            sparql: "select count(?books) {?books a dbo:Book. ?books dbo:author dbr:Mark_Twain}",
            answers: &["2"],
        },
        Golden {
            id: "q09",
            question: "Did Mark Twain write Tom Sawyer?",
            tokens: &["[CLS]", "Did", "Mark", "Twain", "write", "Tom", "Sawyer", "[SEP]"],
            query_type: QueryType::Judge,
            annotations: &[
                (2, 4, "E", Some("dbr:Mark_Twain")),
                (5, 7, "E", Some("dbr:The_Adventures_of_Tom_Sawyer")),
            ],
            edges: &[(0, 1)],
            target: None,
            bindings: &[(0, 1, "dbo:author", R, 0.95)],
            sparql: "ask {dbr:The_Adventures_of_Tom_Sawyer dbo:author dbr:Mark_Twain}",
            answers: &["true"],
        },
        Golden {
            id: "q10",
            question: "Who is the mayor of Berlin?",
            tokens: &["[CLS]", "Who", "is", "the", "mayor", "of", "Berlin"],
            query_type: QueryType::Select,
            annotations: &[(1, 2, "V", None), (6, 7, "E", Some("dbr:Berlin"))],
            edges: &[(0, 1)],
            target: Some(0),
            bindings: &[(0, 1, "dbo:mayor", R, 0.9)],
            sparql: "select ?who {dbr:Berlin dbo:mayor ?who}",
            answers: &["dbr:Kai_Wegner"],
        },
        Golden {
            id: "q11",
            question: "What is the capital of France?",
            tokens: &["[CLS]", "What", "is", "the", "capital", "of", "France"],
            query_type: QueryType::Select,
            annotations: &[(1, 2, "V", None), (6, 7, "E", Some("dbr:France"))],
            edges: &[(0, 1)],
            target: Some(0),
            bindings: &[(0, 1, "dbo:capital", R, 0.9)],
            sparql: "select ?what {dbr:France dbo:capital ?what}",
            answers: &["dbr:Paris"],
        },
        Golden {
            id: "q12",
            question: "What is the number of astronauts born in Cleveland?",
            tokens: &[
                "[CLS]", "What", "is", "the", "number", "of", "astronauts", "born", "in",
                "Cleveland",
            ],
            query_type: QueryType::Count,
            annotations: &[
                (6, 7, "V", None),
                (6, 7, "T", Some("dbo:Astronaut")),
                (9, 10, "E", Some("dbr:Cleveland")),
            ],
            edges: &[(0, 1), (0, 2)],
            target: Some(0),
            bindings: &[(0, 1, "rdf:type", F, 0.9), (0, 2, "dbo:birthPlace", F, 0.92)],
            sparql: "select count(?astronauts) {?astronauts a dbo:Astronaut. ?astronauts dbo:birthPlace dbr:Cleveland}",
            answers: &["2"],
        },
        Golden {
            id: "q13",
            question: "Is Boston a state?",
            tokens: &["[CLS]", "Is", "Boston", "a", "state", "[SEP]"],
            query_type: QueryType::Judge,
            annotations: &[(2, 3, "E", Some("dbr:Boston")), (4, 5, "T", Some("dbo:State"))],
            edges: &[(0, 1)],
            target: None,
            bindings: &[(0, 1, "rdf:type", F, 0.9)],
            sparql: "ask {dbr:Boston a dbo:State}",
            answers: &["false"],
        },
        Golden {
            id: "q14",
            question: "Which politicians were born in Hamburg?",
            tokens: &["[CLS]", "Which", "politicians", "were", "born", "in", "Hamburg"],
            query_type: QueryType::Select,
            annotations: &[
                (2, 3, "V", None),
                (2, 3, "T", Some("dbo:Politician")),
                (6, 7, "E", Some("dbr:Hamburg")),
            ],
            edges: &[(0, 1), (0, 2)],
            target: Some(0),
            bindings: &[(0, 1, "rdf:type", F, 0.9), (0, 2, "dbo:birthPlace", F, 0.92)],
            sparql: "select ?politicians {?politicians a dbo:Politician. ?politicians dbo:birthPlace dbr:Hamburg}",
            answers: &["dbr:Angela_Merkel"],
        },
        Golden {
            id: "q15",
            question: "Which writers were born in cities in Ohio?",
            tokens: &["[CLS]", "Which", "writers", "were", "born", "in", "cities", "in", "Ohio"],
            query_type: QueryType::Select,
            annotations: &[
                (2, 3, "V", None),
                (2, 3, "T", Some("dbo:Writer")),
                (6, 7, "V", None),
                (6, 7, "T", Some("dbo:City")),
                (8, 9, "E", Some("dbr:Ohio")),
            ],
            edges: &[(0, 1), (0, 2), (2, 3), (2, 4)],
            target: Some(0),
            bindings: &[
                (0, 1, "rdf:type", F, 0.9),
                (0, 2, "dbo:birthPlace", F, 0.91),
                (2, 3, "rdf:type", F, 0.9),
                (2, 4, "dbo:state", F, 0.93),
            ],
            sparql: "select ?writers {?writers a dbo:Writer. ?writers dbo:birthPlace ?cities. ?cities a dbo:City. ?cities dbo:state dbr:Ohio}",
            answers: &["dbr:Toni_Morrison"],
        },
        Golden {
            id: "q16",
            question: "Was Barack Obama born in Honolulu?",
            tokens: &["[CLS]", "Was", "Barack", "Obama", "born", "in", "Honolulu", "[SEP]"],
            query_type: QueryType::Judge,
            annotations: &[
                (2, 4, "E", Some("dbr:Barack_Obama")),
                (6, 7, "E", Some("dbr:Honolulu")),
            ],
            edges: &[(0, 1)],
            target: None,
            bindings: &[(0, 1, "dbo:birthPlace", F, 0.93)],
            sparql: "ask {dbr:Barack_Obama dbo:birthPlace dbr:Honolulu}",
            answers: &["true"],
        },
        Golden {
            id: "q17",
            question: "Who wrote Beloved?",
            tokens: &["[CLS]", "Who", "wrote", "Beloved"],
            query_type: QueryType::Select,
            annotations: &[(1, 2, "V", None), (3, 4, "E", Some("dbr:Beloved"))],
            edges: &[(0, 1)],
            target: Some(0),
            bindings: &[(0, 1, "dbo:author", R, 0.9)],
            sparql: "select ?who {dbr:Beloved dbo:author ?who}",
            answers: &["dbr:Toni_Morrison"],
        },
        Golden {
            id: "q18",
            question: "How many cities are in Germany?",
            tokens: &["[CLS]", "How", "many", "cities", "are", "in", "Germany"],
            query_type: QueryType::Count,
            annotations: &[
                (3, 4, "V", None),
                (3, 4, "T", Some("dbo:City")),
                (6, 7, "E", Some("dbr:Germany")),
            ],
            edges: &[(0, 1), (0, 2)],
            target: Some(0),
            bindings: &[(0, 1, "rdf:type", F, 0.9), (0, 2, "dbo:country", F, 0.92)],
            sparql: "select count(?cities) {?cities a dbo:City. ?cities dbo:country dbr:Germany}",
            answers: &["3"],
        },
        Golden {
            id: "q19",
            question: "Which waterways cross Paris?",
            tokens: &["[CLS]", "Which", "waterways", "cross", "Paris"],
            query_type: QueryType::Select,
            annotations: &[
                (2, 3, "V", None),
                (2, 3, "T", None), // unlinkable type; linking discards it
                (4, 5, "E", Some("dbr:Paris")),
            ],
            edges: &[(0, 1), (0, 2)],
            target: Some(0),
            bindings: &[(0, 2, "dbo:crosses", F, 0.9)],
            sparql: "select ?waterways {?waterways dbo:crosses dbr:Paris}",
            answers: &["dbr:Seine"],
        },
        Golden {
            id: "q20",
            question: "Who leads the country of Munich?",
            tokens: &["[CLS]", "Who", "leads", "the", "country", "of", "Munich"],
            query_type: QueryType::Select,
            annotations: &[
                (1, 2, "V", None),
                (4, 5, "V", None),
                (6, 7, "E", Some("dbr:Munich")),
            ],
            edges: &[(0, 1), (1, 2)],
            target: Some(0),
            bindings: &[(1, 2, "dbo:country", R, 0.9), (0, 1, "dbo:leader", R, 0.88)],
            sparql: "select ?who {dbr:Munich dbo:country ?country. ?country dbo:leader ?who}",
            answers: &["dbr:Olaf_Scholz"],
        },
    ]
}

impl Golden {
    pub fn token_vec(&self) -> Vec<String> {
        self.tokens.iter().map(|t| t.to_string()).collect()
    }

    pub fn record(&self) -> DatasetRecord {
        DatasetRecord {
            id: self.id.to_string(),
            question: self.question.to_string(),
            tokens: Some(self.token_vec()),
            gold_sparql: Some(self.sparql.to_string()),
            nodes: Some(
                self.annotations
                    .iter()
                    .map(|(start, end, tag, uri)| NodeAnnotation {
                        start: *start,
                        end: *end,
                        tag: tag.to_string(),
                        uri: uri.map(String::from),
                    })
                    .collect(),
            ),
            gold_answers: Some(self.answers.iter().map(|a| a.to_string()).collect()),
        }
    }

    /// Full annotated structure, including nodes linking later removes.
    pub fn structure(&self) -> QueryGraphStructure {
        let record = self.record();
        let mut s = record
            .annotated_structure(self.query_type)
            .expect("annotations present");
        for (a, b) in self.edges {
            s.add_edge(NodeId(*a), NodeId(*b));
        }
        s.target = self.target.map(NodeId);
        s
    }

    /// The post-linking gold graph with its predicate bindings.
    pub fn final_graph(&self) -> QueryGraph {
        let mut s = self.structure();
        // drop nodes that linking would discard (annotated E/T without uri)
        let doomed: Vec<NodeId> = s
            .nodes
            .iter()
            .filter(|n| n.tag != kbqa_core::query_graph::NodeTag::Variable && n.uri.is_none())
            .map(|n| n.id)
            .collect();
        for id in doomed {
            s.remove_node(id);
        }
        let mut graph = QueryGraph::new(s);
        for (a, b, pred, direction, score) in self.bindings {
            graph.bindings.push(kbqa_core::query_graph::BoundEdge {
                edge: EdgeKey::new(NodeId(*a), NodeId(*b)),
                predicate: pred.to_string(),
                direction: *direction,
                score: *score,
            });
        }
        graph
    }

    pub fn mention(&self, node: u32) -> String {
        let (start, end, _, _) = self.annotations[node as usize];
        self.tokens[start..end].join(" ")
    }

    /// Ranker fixture entries: the gold predicate per edge at its
    /// stated score.
    pub fn ranker_entries(&self) -> Vec<RankerFixtureEntry> {
        self.bindings
            .iter()
            .map(|(a, b, pred, direction, score)| RankerFixtureEntry {
                question_id: self.id.to_string(),
                m1: self.mention(*a),
                m2: self.mention(*b),
                predicate: pred.to_string(),
                direction: *direction,
                score: *score,
            })
            .collect()
    }
}

/// Ranker fixture covering every golden question.
pub fn ranker_fixture() -> RankerFixture {
    RankerFixture {
        entries: goldens().iter().flat_map(|g| g.ranker_entries()).collect(),
    }
}
