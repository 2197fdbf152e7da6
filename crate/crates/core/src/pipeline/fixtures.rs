//! Score fixtures: per-question tensors standing in for encoder
//! outputs. One JSON file per split, keyed by question id.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::EngineError;
use crate::model::{GcScoreTable, Mat, NeLabelTable, NUM_LABELS};

/// Tensors for one question: `n x 9` label logits, an `n x n` table of
/// `[no-edge, edge]` probability pairs, and optionally an `n x h`
/// feature matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuestionScores {
    pub ne_logits: Vec<Vec<f64>>,
    pub gc_table: Vec<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub features: Option<Vec<Vec<f64>>>,
}

impl QuestionScores {
    pub fn n(&self) -> usize {
        self.ne_logits.len()
    }

    pub fn label_table(&self) -> Result<NeLabelTable, EngineError> {
        let n = self.ne_logits.len();
        let mut m = Mat::zeros(n, NUM_LABELS);
        for (i, row) in self.ne_logits.iter().enumerate() {
            if row.len() != NUM_LABELS {
                return Err(EngineError::Input(format!(
                    "ne_logits row {i} has {} entries, expected {NUM_LABELS}",
                    row.len()
                )));
            }
            m.row_mut(i).copy_from_slice(row);
        }
        NeLabelTable::new(m).map_err(|e| EngineError::Input(e.to_string()))
    }

    pub fn score_table(&self) -> Result<GcScoreTable, EngineError> {
        let n = self.gc_table.len();
        let mut probs = Vec::with_capacity(n * n * 2);
        for (i, row) in self.gc_table.iter().enumerate() {
            if row.len() != n {
                return Err(EngineError::Input(format!(
                    "gc_table row {i} has {} cells, expected {n}",
                    row.len()
                )));
            }
            for pair in row {
                probs.push(pair[0]);
                probs.push(pair[1]);
            }
        }
        GcScoreTable::new(n, probs).map_err(|e| EngineError::Input(e.to_string()))
    }

    pub fn feature_matrix(&self) -> Result<Option<Mat>, EngineError> {
        match &self.features {
            None => Ok(None),
            Some(rows) => {
                let n = rows.len();
                let width = rows.first().map(Vec::len).unwrap_or(0);
                let mut m = Mat::zeros(n, width);
                for (i, row) in rows.iter().enumerate() {
                    if row.len() != width {
                        return Err(EngineError::Input(format!(
                            "feature row {i} has {} entries, expected {width}",
                            row.len()
                        )));
                    }
                    m.row_mut(i).copy_from_slice(row);
                }
                Ok(Some(m))
            }
        }
    }
}

/// All fixtures for one split.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ScoreFixtureFile {
    pub questions: BTreeMap<String, QuestionScores>,
}

impl ScoreFixtureFile {
    pub fn load(reader: impl Read) -> Result<Self, EngineError> {
        serde_json::from_reader(reader).map_err(|e| EngineError::Input(format!("fixtures: {e}")))
    }

    pub fn save(&self, mut writer: impl Write) -> std::io::Result<()> {
        let json = serde_json::to_string(self)?;
        writer.write_all(json.as_bytes())
    }

    pub fn get(&self, id: &str) -> Option<&QuestionScores> {
        self.questions.get(id)
    }
}
