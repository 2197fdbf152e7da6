//! Answer-level precision/recall/F1 with macro averaging across
//! questions. Boolean and count answers compare as singleton sets.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::EngineError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuestionMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub per_question: BTreeMap<String, QuestionMetrics>,
    pub macro_precision: f64,
    pub macro_recall: f64,
    pub macro_f1: f64,
}

fn question_metrics(pred: &BTreeSet<String>, gold: &BTreeSet<String>) -> QuestionMetrics {
    let (precision, recall) = match (pred.is_empty(), gold.is_empty()) {
        (true, true) => (1.0, 1.0),
        (true, false) | (false, true) => (0.0, 0.0),
        (false, false) => {
            let inter = pred.intersection(gold).count() as f64;
            (inter / pred.len() as f64, inter / gold.len() as f64)
        }
    };
    let f1 = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    QuestionMetrics {
        precision,
        recall,
        f1,
    }
}

/// Evaluates predictions against gold answer sets. The id sets must
/// match exactly.
pub fn evaluate(
    predictions: &BTreeMap<String, BTreeSet<String>>,
    gold: &BTreeMap<String, BTreeSet<String>>,
) -> Result<Metrics, EngineError> {
    if predictions.len() != gold.len() || predictions.keys().ne(gold.keys()) {
        return Err(EngineError::Input(
            "prediction and gold id sets differ".into(),
        ));
    }
    let mut per_question = BTreeMap::new();
    let mut sums = (0.0, 0.0, 0.0);
    for (id, pred) in predictions {
        let m = question_metrics(pred, &gold[id]);
        sums.0 += m.precision;
        sums.1 += m.recall;
        sums.2 += m.f1;
        per_question.insert(id.clone(), m);
    }
    let n = per_question.len().max(1) as f64;
    Ok(Metrics {
        per_question,
        macro_precision: sums.0 / n,
        macro_recall: sums.1 / n,
        macro_f1: sums.2 / n,
    })
}
