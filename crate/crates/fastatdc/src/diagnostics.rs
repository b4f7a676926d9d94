//! Empirical class-level analysis of stage-1 scores: prototypes, per-class
//! score statistics, and the expected ordering of class means
//! (GS < LS < NT < LD < GD, with NT near zero).

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::{from_usize, Real};
use crate::scoring::dis;
use crate::trajdata::{ClassLabel, Dataset, Trajectory};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DiagnosticsError {
    #[error("trajectory {id} has no ground-truth label")]
    MissingLabel { id: u64 },
    #[error("no stage-1 score supplied for trajectory {id}")]
    MissingScore { id: u64 },
    #[error("class {class} absent; ordering check needs all five classes")]
    MissingClass { class: ClassLabel },
}

/// Stage-1 score statistics of one class.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct ClassStats<F: Real> {
    pub class: ClassLabel,
    pub prototype_id: u64,
    pub mean_s1: F,
    /// Population variance of S1 within the class.
    pub var_s1: F,
    pub count: usize,
}

impl<F: Real> ClassStats<F> {
    pub const CSV_HEADER: &'static str = "class,prototype_id,mean_s1,var_s1,count";

    pub fn csv_record(&self) -> Vec<String> {
        vec![
            self.class.name().to_string(),
            self.prototype_id.to_string(),
            format!("{}", self.mean_s1),
            format!("{}", self.var_s1),
            self.count.to_string(),
        ]
    }
}

/// The class member minimizing the total absolute DIS to its class, ties
/// broken by ascending id. Pairs with no shared cells contribute an infinite
/// penalty, so a member disconnected from its class is never chosen.
pub fn prototype<'a, F: Real>(class_members: &[&'a Trajectory]) -> Option<&'a Trajectory> {
    if class_members.is_empty() {
        return None;
    }
    let objectives: Vec<(F, u64)> = class_members
        .par_iter()
        .map(|&candidate| {
            let mut total = F::zero();
            for &member in class_members {
                if member.id() == candidate.id() {
                    continue;
                }
                total = total
                    + dis::<F>(candidate, member)
                        .map(|d| d.abs())
                        .unwrap_or_else(|_| F::infinity());
            }
            (total, candidate.id())
        })
        .collect();
    let (_, best_id) = objectives
        .into_iter()
        .min_by(|(oa, ia), (ob, ib)| oa.partial_cmp(ob).expect("no NaN objective").then(ia.cmp(ib)))?;
    class_members.iter().copied().find(|t| t.id() == best_id)
}

/// Per-class prototype, mean and population variance of the supplied stage-1
/// scores. The dataset must be fully labeled and every trajectory must have a
/// score. Only classes present in the data are returned, in label-code order.
pub fn class_score_statistics<F: Real>(
    ds: &Dataset,
    s1_scores: &[(u64, F)],
) -> Result<Vec<ClassStats<F>>, DiagnosticsError> {
    let scores: HashMap<u64, F> = s1_scores.iter().copied().collect();
    let mut members: [Vec<&Trajectory>; 5] = Default::default();
    let mut class_scores: [Vec<F>; 5] = Default::default();
    for t in ds {
        let label = t
            .label()
            .ok_or(DiagnosticsError::MissingLabel { id: t.id() })?;
        let score = *scores
            .get(&t.id())
            .ok_or(DiagnosticsError::MissingScore { id: t.id() })?;
        members[label.code() as usize].push(t);
        class_scores[label.code() as usize].push(score);
    }
    let mut stats = Vec::new();
    for class in ClassLabel::ALL {
        let idx = class.code() as usize;
        if members[idx].is_empty() {
            continue;
        }
        let scores = &class_scores[idx];
        let count = scores.len();
        let n = from_usize::<F>(count);
        let mean = scores.iter().copied().fold(F::zero(), |a, v| a + v) / n;
        let var = scores
            .iter()
            .map(|&v| (v - mean) * (v - mean))
            .fold(F::zero(), |a, v| a + v)
            / n;
        let prototype_id = prototype::<F>(&members[idx])
            .expect("class has members")
            .id();
        stats.push(ClassStats {
            class,
            prototype_id,
            mean_s1: mean,
            var_s1: var,
            count,
        });
    }
    Ok(stats)
}

/// Outcome of the class-mean ordering check, one flag per inequality.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrderingReport {
    pub gs_lt_ls: bool,
    pub ls_lt_nt: bool,
    pub nt_lt_ld: bool,
    pub ld_lt_gd: bool,
    /// |mean S1 of NT| <= phi.
    pub nt_near_zero: bool,
}

impl OrderingReport {
    pub fn pass(&self) -> bool {
        self.gs_lt_ls && self.ls_lt_nt && self.nt_lt_ld && self.ld_lt_gd && self.nt_near_zero
    }
}

impl std::fmt::Display for OrderingReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mark = |ok: bool| if ok { "pass" } else { "FAIL" };
        write!(
            f,
            "GS<LS {}, LS<NT {}, NT<LD {}, LD<GD {}, |NT|<=phi {}",
            mark(self.gs_lt_ls),
            mark(self.ls_lt_nt),
            mark(self.nt_lt_ld),
            mark(self.ld_lt_gd),
            mark(self.nt_near_zero)
        )
    }
}

/// Check mean S1 ordering GS < LS < NT < LD < GD and NT's mean within
/// [-phi, phi]. Errors if any of the five classes is missing from `stats`.
pub fn ordering_check<F: Real>(
    stats: &[ClassStats<F>],
    phi: F,
) -> Result<OrderingReport, DiagnosticsError> {
    let mean_of = |class: ClassLabel| -> Result<F, DiagnosticsError> {
        stats
            .iter()
            .find(|s| s.class == class)
            .map(|s| s.mean_s1)
            .ok_or(DiagnosticsError::MissingClass { class })
    };
    let gd = mean_of(ClassLabel::Gd)?;
    let ld = mean_of(ClassLabel::Ld)?;
    let nt = mean_of(ClassLabel::Nt)?;
    let ls = mean_of(ClassLabel::Ls)?;
    let gs = mean_of(ClassLabel::Gs)?;
    Ok(OrderingReport {
        gs_lt_ls: gs < ls,
        ls_lt_nt: ls < nt,
        nt_lt_ld: nt < ld,
        ld_lt_gd: ld < gd,
        nt_near_zero: nt.abs() <= phi,
    })
}
