//! Evaluation protocol: correctness labels, task combinations, and the
//! selective-prediction metrics (AUROC with bootstrap standard errors,
//! risk-coverage curves, smooth calibration error).

mod calibration;
mod labeling;
mod metrics;
mod report;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Method, Split};

pub use calibration::{smooth_ece, smooth_ece_at, SMOOTH_ECE_GRID};
pub use labeling::{combine_splits, label, label_record, ExclusionPolicy, Labeled, Labeling, Recipe};
pub use metrics::{
    auroc, auroc_of, bootstrap_se, bootstrap_se_of, gate, risk_coverage, spearman, threshold_for_coverage,
    CoveragePoint, Decision,
};
pub use report::{evaluate, EvalConfig, EvalReport, ReportCell, ScoredRecord, SummaryCell};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("need at least one correct and one incorrect entry")]
    DegenerateLabels,
    #[error("inputs have lengths {left} and {right}; need equal lengths of at least 2")]
    LengthMismatch { left: usize, right: usize },
    #[error("input has zero variance")]
    ConstantInput,
    #[error("value {0} is outside [0, 1]")]
    OutOfRange(f64),
    #[error("split `{0}` appears twice in the recipe")]
    DuplicateSplit(Split),
    #[error("unknown split or recipe `{0}`")]
    UnknownSplit(String),
    #[error("no data for split `{0}`")]
    MissingSplit(Split),
}

/// One (record, method) entry after exclusion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledScore {
    pub record_id: String,
    pub method: Method,
    /// Uncertainty; larger means more uncertain.
    pub score: f64,
    pub correct: bool,
}

impl LabeledScore {
    pub fn new(record_id: impl Into<String>, method: Method, score: f64, correct: bool) -> Self {
        LabeledScore { record_id: record_id.into(), method, score, correct }
    }
}
