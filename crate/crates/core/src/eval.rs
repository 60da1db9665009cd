//! Exact-match scoring of model predictions against gold task files.

use std::path::Path;

use serde::Serialize;
use thiserror::Error;

use crate::featkit::{FeatureBundle, FeatureInventory};
use crate::sampler::{TaskExample, TaskKind};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("{gold} gold examples but {pred} predictions")]
    LengthMismatch { gold: usize, pred: usize },
    #[error("no runs to aggregate")]
    EmptyRunList,
    #[error("{path}: {message}")]
    Io { path: String, message: String },
}

/// Collapses whitespace runs and trims.
pub fn normalize_ws(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// One scored prediction that did not match.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Mismatch {
    pub index: usize,
    pub gold: String,
    pub pred: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunScore {
    pub correct: usize,
    pub total: usize,
    /// Percent, 0 to 100.
    pub accuracy: f64,
    pub mismatches: Vec<Mismatch>,
}

/// Whether one prediction is correct. Analysis predictions are
/// `lemma TAB features`, compared structurally; unparsable features are wrong.
pub fn is_correct(gold: &TaskExample, pred: &str, inv: &FeatureInventory) -> bool {
    match gold {
        TaskExample::Analysis { lemma, bundle, .. } => {
            let Some((plemma, pfeats)) = pred.trim().split_once('\t') else {
                return false;
            };
            plemma.trim() == lemma
                && FeatureBundle::parse_any(pfeats.trim(), inv)
                    .map(|b| &b == bundle)
                    .unwrap_or(false)
        }
        other => normalize_ws(other.target_form()) == normalize_ws(pred),
    }
}

/// Exact-match accuracy of `preds` against `gold`, with up to `keep` mismatches listed.
pub fn score_run(
    gold: &[TaskExample],
    preds: &[String],
    inv: &FeatureInventory,
    keep: usize,
) -> Result<RunScore, EvalError> {
    if gold.len() != preds.len() {
        return Err(EvalError::LengthMismatch {
            gold: gold.len(),
            pred: preds.len(),
        });
    }
    let mut correct = 0;
    let mut mismatches = Vec::new();
    for (i, (g, p)) in gold.iter().zip(preds).enumerate() {
        if is_correct(g, p, inv) {
            correct += 1;
        } else if mismatches.len() < keep {
            mismatches.push(Mismatch {
                index: i,
                gold: g.gold_output(),
                pred: p.clone(),
            });
        }
    }
    let accuracy = if gold.is_empty() {
        100.0
    } else {
        100.0 * correct as f64 / gold.len() as f64
    };
    Ok(RunScore {
        correct,
        total: gold.len(),
        accuracy,
        mismatches,
    })
}

/// Mean and population standard deviation.
pub fn aggregate_runs(accs: &[f64]) -> Result<(f64, f64), EvalError> {
    if accs.is_empty() {
        return Err(EvalError::EmptyRunList);
    }
    let n = accs.len() as f64;
    let mean = accs.iter().sum::<f64>() / n;
    let var = accs.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / n;
    Ok((mean, var.sqrt()))
}

/// `70.0 ±1.2`.
pub fn format_mean_std(mean: f64, std: f64) -> String {
    format!("{mean:.1} ±{std:.1}")
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub task: TaskKind,
    pub runs: Vec<RunScore>,
    pub mean: f64,
    pub std: f64,
    pub summary: String,
}

pub fn evaluate(
    task: TaskKind,
    gold: &[TaskExample],
    runs: &[Vec<String>],
    inv: &FeatureInventory,
    keep: usize,
) -> Result<EvalReport, EvalError> {
    let scores = runs
        .iter()
        .map(|p| score_run(gold, p, inv, keep))
        .collect::<Result<Vec<_>, _>>()?;
    let accs: Vec<f64> = scores.iter().map(|s| s.accuracy).collect();
    let (mean, std) = aggregate_runs(&accs)?;
    Ok(EvalReport {
        task,
        runs: scores,
        mean,
        std,
        summary: format_mean_std(mean, std),
    })
}

/// One prediction per line; a trailing newline does not add an empty prediction.
pub fn read_predictions(path: impl AsRef<Path>) -> Result<Vec<String>, EvalError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| EvalError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    Ok(text.lines().map(str::to_owned).collect())
}
