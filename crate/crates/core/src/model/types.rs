//! Score-table types shared between the numeric model and the decoder.

use serde::{Deserialize, Serialize};

use crate::error::NumericError;

use super::linalg::Mat;

/// Span classes a mention can carry: variable, entity, type, or the
/// overlapping variable-and-type case.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SpanClass {
    V,
    E,
    T,
    VT,
}

impl SpanClass {
    pub const ALL: [SpanClass; 4] = [SpanClass::V, SpanClass::E, SpanClass::T, SpanClass::VT];
}

/// Number of token labels: {O} plus {B, I} x {V, E, T, VT}.
pub const NUM_LABELS: usize = 9;

/// Index of the outside label.
pub const LABEL_O: usize = 0;

/// Label index for a begin/inside marker of a span class. Layout:
/// O, B-V, I-V, B-E, I-E, B-T, I-T, B-VT, I-VT.
pub fn label_index(begin: bool, class: SpanClass) -> usize {
    let base = match class {
        SpanClass::V => 1,
        SpanClass::E => 3,
        SpanClass::T => 5,
        SpanClass::VT => 7,
    };
    if begin {
        base
    } else {
        base + 1
    }
}

/// Inverse of [`label_index`]; `None` for the outside label.
pub fn label_class(index: usize) -> Option<(bool, SpanClass)> {
    match index {
        1 => Some((true, SpanClass::V)),
        2 => Some((false, SpanClass::V)),
        3 => Some((true, SpanClass::E)),
        4 => Some((false, SpanClass::E)),
        5 => Some((true, SpanClass::T)),
        6 => Some((false, SpanClass::T)),
        7 => Some((true, SpanClass::VT)),
        8 => Some((false, SpanClass::VT)),
        _ => None,
    }
}

/// Token features for one question, including the prefixed `[CLS]`
/// position (and a suffixed `[SEP]` when present).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuestionEncoding {
    /// Token count, synthetic positions included.
    pub n: usize,
    /// n x width feature matrix.
    pub features: Mat,
}

impl QuestionEncoding {
    pub fn new(features: Mat) -> Result<Self, NumericError> {
        if features.rows < 2 {
            return Err(NumericError::DimensionMismatch(format!(
                "need at least 2 tokens, got {}",
                features.rows
            )));
        }
        if !features.all_finite() {
            return Err(NumericError::NonFinite("question features".into()));
        }
        Ok(QuestionEncoding {
            n: features.rows,
            features,
        })
    }

    pub fn width(&self) -> usize {
        self.features.cols
    }
}

/// Per-token label logits with optional gold labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NeLabelTable {
    /// n x NUM_LABELS logits.
    pub logits: Mat,
    /// Gold label indices, when training data is attached.
    pub gold: Option<Vec<usize>>,
}

impl NeLabelTable {
    pub fn new(logits: Mat) -> Result<Self, NumericError> {
        if logits.cols != NUM_LABELS {
            return Err(NumericError::DimensionMismatch(format!(
                "label table must have {NUM_LABELS} columns, got {}",
                logits.cols
            )));
        }
        Ok(NeLabelTable { logits, gold: None })
    }

    pub fn with_gold(mut self, gold: Vec<usize>) -> Result<Self, NumericError> {
        if gold.len() != self.logits.rows {
            return Err(NumericError::DimensionMismatch(format!(
                "gold length {} != {} tokens",
                gold.len(),
                self.logits.rows
            )));
        }
        if let Some(&bad) = gold.iter().find(|&&g| g >= NUM_LABELS) {
            return Err(NumericError::LabelOutOfRange {
                index: bad,
                labels: NUM_LABELS,
            });
        }
        self.gold = Some(gold);
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.logits.rows
    }

    /// Per-token argmax labels (first index wins ties).
    pub fn argmax_labels(&self) -> Vec<usize> {
        (0..self.n())
            .map(|i| {
                let row = self.logits.row(i);
                let mut best = 0;
                for (k, v) in row.iter().enumerate() {
                    if *v > row[best] {
                        best = k;
                    }
                }
                best
            })
            .collect()
    }
}

/// n x n x 2 table of edge probabilities with an optional boolean gold
/// table. Class 1 is "edge exists".
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GcScoreTable {
    pub n: usize,
    /// Row-major n*n*2 probabilities.
    pub probs: Vec<f64>,
    /// Optional symmetric gold table (true = edge).
    pub gold: Option<Vec<bool>>,
}

impl GcScoreTable {
    /// Validates that every cell is a probability pair summing to one.
    pub fn new(n: usize, probs: Vec<f64>) -> Result<Self, NumericError> {
        if probs.len() != n * n * 2 {
            return Err(NumericError::DimensionMismatch(format!(
                "expected {} values, got {}",
                n * n * 2,
                probs.len()
            )));
        }
        for i in 0..n {
            for j in 0..n {
                let p0 = probs[(i * n + j) * 2];
                let p1 = probs[(i * n + j) * 2 + 1];
                let ok = p0 >= -1e-9 && p1 >= -1e-9 && (p0 + p1 - 1.0).abs() <= 1e-9;
                if !ok {
                    return Err(NumericError::InvalidProbabilityPair { i, j });
                }
            }
        }
        Ok(GcScoreTable {
            n,
            probs,
            gold: None,
        })
    }

    /// Builds a table from per-cell edge probabilities `p1`, filling
    /// class 0 with the complement.
    pub fn from_edge_probs(n: usize, edge_probs: &[f64]) -> Result<Self, NumericError> {
        if edge_probs.len() != n * n {
            return Err(NumericError::DimensionMismatch(format!(
                "expected {} edge probabilities, got {}",
                n * n,
                edge_probs.len()
            )));
        }
        let mut probs = Vec::with_capacity(n * n * 2);
        for p in edge_probs {
            probs.push(1.0 - p);
            probs.push(*p);
        }
        GcScoreTable::new(n, probs)
    }

    pub fn with_gold(mut self, gold: Vec<bool>) -> Result<Self, NumericError> {
        if gold.len() != self.n * self.n {
            return Err(NumericError::DimensionMismatch(format!(
                "gold table must have {} cells, got {}",
                self.n * self.n,
                gold.len()
            )));
        }
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                if gold[i * self.n + j] != gold[j * self.n + i] {
                    return Err(NumericError::AsymmetricGold { i, j });
                }
            }
        }
        self.gold = Some(gold);
        Ok(self)
    }

    #[inline]
    pub fn prob(&self, i: usize, j: usize, class: usize) -> f64 {
        self.probs[(i * self.n + j) * 2 + class]
    }

    /// Probability that an edge exists between tokens i and j.
    #[inline]
    pub fn edge_prob(&self, i: usize, j: usize) -> f64 {
        self.prob(i, j, 1)
    }

    pub fn gold_at(&self, i: usize, j: usize) -> Option<bool> {
        self.gold.as_ref().map(|g| g[i * self.n + j])
    }
}
