//! Ground-truth evaluation: confusion matrices, per-class F1, the anomaly
//! Macro-F1, and the two binary collapses (all-anomalies-vs-normal and
//! global-anomalies-vs-rest).
//!
//! Macro-F1 averages the four anomaly classes only; NT is excluded.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::{from_u64, Real};
use crate::trajdata::ClassLabel;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EvalError {
    #[error("label vectors differ in length: truth {truth}, predictions {pred}")]
    LengthMismatch { truth: usize, pred: usize },
    #[error("cannot evaluate empty label vectors")]
    Empty,
}

/// 5x5 counts, rows = truth, columns = predicted, label order GD,LD,NT,LS,GS.
pub type Confusion = [[u64; 5]; 5];

/// Count (truth, predicted) pairs.
pub fn confusion_matrix(
    truth: &[ClassLabel],
    pred: &[ClassLabel],
) -> Result<Confusion, EvalError> {
    if truth.len() != pred.len() {
        return Err(EvalError::LengthMismatch {
            truth: truth.len(),
            pred: pred.len(),
        });
    }
    if truth.is_empty() {
        return Err(EvalError::Empty);
    }
    let mut matrix = [[0u64; 5]; 5];
    for (&t, &p) in truth.iter().zip(pred) {
        matrix[t.code() as usize][p.code() as usize] += 1;
    }
    Ok(matrix)
}

/// Per-class F1 plus the anomaly Macro-F1.
///
/// A class with neither true nor predicted instances has an undefined F1; it
/// is reported as 0 and flagged in `degenerate`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct F1Breakdown<F: Real> {
    pub per_class: [F; 5],
    pub macro_f1_anomaly: F,
    pub degenerate: [bool; 5],
}

pub fn f1_scores<F: Real>(confusion: &Confusion) -> F1Breakdown<F> {
    let mut per_class = [F::zero(); 5];
    let mut degenerate = [false; 5];
    for c in 0..5 {
        let tp = confusion[c][c];
        let truth_total: u64 = confusion[c].iter().sum();
        let pred_total: u64 = (0..5).map(|r| confusion[r][c]).sum();
        if truth_total == 0 && pred_total == 0 {
            degenerate[c] = true;
            continue;
        }
        per_class[c] = f1_from_counts(tp, pred_total - tp, truth_total - tp);
    }
    F1Breakdown {
        per_class,
        macro_f1_anomaly: macro_f1_anomaly(&per_class),
        degenerate,
    }
}

/// Unweighted mean of F1 over the four anomaly classes (GD, LD, LS, GS).
pub fn macro_f1_anomaly<F: Real>(per_class: &[F; 5]) -> F {
    let sum = ClassLabel::ANOMALIES
        .iter()
        .map(|c| per_class[c.code() as usize])
        .fold(F::zero(), |acc, v| acc + v);
    sum / F::from_u8(4).unwrap()
}

fn f1_from_counts<F: Real>(tp: u64, fp: u64, fn_: u64) -> F {
    if tp == 0 {
        return F::zero();
    }
    let tp = from_u64::<F>(tp);
    let precision = tp / (tp + from_u64(fp));
    let recall = tp / (tp + from_u64(fn_));
    let two = F::from_u8(2).unwrap();
    two * precision * recall / (precision + recall)
}

/// Case 1: every anomaly class counts as anomalous, NT as normal.
pub fn collapse_case1(label: ClassLabel) -> bool {
    label.is_anomaly()
}

/// Case 2: only the global anomalies (GD, GS) count as anomalous.
pub fn collapse_case2(label: ClassLabel) -> bool {
    matches!(label, ClassLabel::Gd | ClassLabel::Gs)
}

/// F1 of the anomalous (positive) class for binary labels.
pub fn binary_f1<F: Real>(truth: &[bool], pred: &[bool]) -> Result<F, EvalError> {
    if truth.len() != pred.len() {
        return Err(EvalError::LengthMismatch {
            truth: truth.len(),
            pred: pred.len(),
        });
    }
    let mut tp = 0u64;
    let mut fp = 0u64;
    let mut fn_ = 0u64;
    for (&t, &p) in truth.iter().zip(pred) {
        match (t, p) {
            (true, true) => tp += 1,
            (false, true) => fp += 1,
            (true, false) => fn_ += 1,
            (false, false) => {}
        }
    }
    Ok(f1_from_counts(tp, fp, fn_))
}

/// The full evaluation of one run against ground truth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct MetricsReport<F: Real> {
    pub confusion: Confusion,
    pub f1_per_class: [F; 5],
    pub macro_f1_anomaly: F,
    pub case1_f1: F,
    pub case2_f1: F,
    /// Classes with zero support and zero predictions (F1 reported as 0).
    pub degenerate_classes: [bool; 5],
}

pub fn evaluate<F: Real>(
    truth: &[ClassLabel],
    pred: &[ClassLabel],
) -> Result<MetricsReport<F>, EvalError> {
    let confusion = confusion_matrix(truth, pred)?;
    let breakdown = f1_scores::<F>(&confusion);
    let collapse = |f: fn(ClassLabel) -> bool| -> (Vec<bool>, Vec<bool>) {
        (
            truth.iter().map(|&l| f(l)).collect(),
            pred.iter().map(|&l| f(l)).collect(),
        )
    };
    let (t1, p1) = collapse(collapse_case1);
    let (t2, p2) = collapse(collapse_case2);
    Ok(MetricsReport {
        confusion,
        f1_per_class: breakdown.per_class,
        macro_f1_anomaly: breakdown.macro_f1_anomaly,
        case1_f1: binary_f1(&t1, &p1)?,
        case2_f1: binary_f1(&t2, &p2)?,
        degenerate_classes: breakdown.degenerate,
    })
}

impl<F: Real> MetricsReport<F> {
    pub const CSV_HEADER: &'static str = "dataset,method,f1_gd,f1_ld,f1_nt,f1_ls,f1_gs,macro_f1_anomaly,case1_f1,case2_f1,seconds_per_100";

    /// One CSV row matching [`Self::CSV_HEADER`]; context columns supplied by
    /// the caller.
    pub fn csv_record(&self, dataset: &str, method: &str, seconds_per_100: f64) -> Vec<String> {
        let mut fields = vec![dataset.to_string(), method.to_string()];
        fields.extend(self.f1_per_class.iter().map(|v| format!("{v}")));
        fields.push(format!("{}", self.macro_f1_anomaly));
        fields.push(format!("{}", self.case1_f1));
        fields.push(format!("{}", self.case2_f1));
        fields.push(format!("{seconds_per_100}"));
        fields
    }
}
