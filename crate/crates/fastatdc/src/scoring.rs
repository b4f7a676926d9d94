//! Per-trajectory scoring: the DIS distance, stage-1/stage-2 anomaly scores,
//! ANT selection, intersection-based nearest-neighbor search, and the
//! threshold classifier.
//!
//! Both stage scores are the same ratio of sums
//! `sum_j (|i| - |j|) / sum_j |i n j|` over a reference set; they differ only
//! in what the reference set is (a broad sample in stage 1, the k nearest
//! absolute-normal trajectories in stage 2). Numerator and denominator are
//! accumulated in integers, so a score is one exact division and reference
//! order never affects the result.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::{from_i64, from_u64, Real};
use crate::trajdata::{ClassLabel, DatasetPreset, Trajectory};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ScoreError {
    /// DIS is undefined on a pair with no shared cells.
    #[error("trajectories share no cells; DIS is undefined")]
    EmptyIntersection,
    /// The subject shares no cells with any reference.
    #[error("zero total intersection between subject and references")]
    ZeroDenominator,
}

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("theta must satisfy t1 > t2 > 0 > t3 > t4, got ({0}, {1}, {2}, {3})")]
    ThetaOrdering(f64, f64, f64, f64),
    #[error("phi must be non-negative and finite, got {0}")]
    BadPhi(f64),
    #[error("phi must satisfy phi < theta2 and -phi > theta3 so ANT classify as NT")]
    PhiThetaOverlap,
    #[error("k must be positive")]
    ZeroK,
    #[error("sampling rate {name} must lie in (0, 1], got {value}")]
    BadRate { name: &'static str, value: f64 },
}

/// Segmentation thresholds `(t1, t2, t3, t4)` with `t1 > t2 > 0 > t3 > t4`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[F; 4]", into = "[F; 4]", bound = "")]
pub struct Theta<F: Real>([F; 4]);

impl<F: Real> Theta<F> {
    pub fn new(values: [F; 4]) -> Result<Self, ConfigError> {
        let [t1, t2, t3, t4] = values;
        let zero = F::zero();
        if !(t1 > t2 && t2 > zero && zero > t3 && t3 > t4) {
            return Err(ConfigError::ThetaOrdering(
                t1.to_f64().unwrap_or(f64::NAN),
                t2.to_f64().unwrap_or(f64::NAN),
                t3.to_f64().unwrap_or(f64::NAN),
                t4.to_f64().unwrap_or(f64::NAN),
            ));
        }
        Ok(Theta(values))
    }

    /// The hyperparameters every run defaults to: (0.5, 0.11, -0.11, -0.5).
    pub fn standard() -> Self {
        Theta::from_f64([0.5, 0.11, -0.11, -0.5])
    }

    /// Per-preset tuned thresholds; t1 and t4 stay at +/-0.5.
    pub fn tuned_for(preset: DatasetPreset) -> Self {
        let (t2, t3) = match preset {
            DatasetPreset::T1 | DatasetPreset::T3 => (0.1, -0.11),
            DatasetPreset::T2 | DatasetPreset::T5 => (0.11, -0.13),
            DatasetPreset::T4 => (0.075, -0.085),
            DatasetPreset::T6 => (0.09, -0.135),
        };
        Theta::from_f64([0.5, t2, t3, -0.5])
    }

    fn from_f64(values: [f64; 4]) -> Self {
        Theta::new(values.map(|v| F::from_f64(v).unwrap())).expect("valid builtin theta")
    }

    pub fn values(&self) -> [F; 4] {
        self.0
    }
}

impl<F: Real> TryFrom<[F; 4]> for Theta<F> {
    type Error = ConfigError;

    fn try_from(values: [F; 4]) -> Result<Self, ConfigError> {
        Theta::new(values)
    }
}

impl<F: Real> From<Theta<F>> for [F; 4] {
    fn from(theta: Theta<F>) -> [F; 4] {
        theta.0
    }
}

/// All detection hyperparameters for one run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct DetectionConfig<F: Real> {
    k: usize,
    phi: F,
    theta: Theta<F>,
    r1: F,
    r2: F,
    seed: u64,
}

impl<F: Real> DetectionConfig<F> {
    pub fn new(
        k: usize,
        phi: F,
        theta: Theta<F>,
        r1: F,
        r2: F,
        seed: u64,
    ) -> Result<Self, ConfigError> {
        if k == 0 {
            return Err(ConfigError::ZeroK);
        }
        if !(phi >= F::zero() && phi.is_finite()) {
            return Err(ConfigError::BadPhi(phi.to_f64().unwrap_or(f64::NAN)));
        }
        let [_, t2, t3, _] = theta.values();
        if !(phi < t2 && -phi > t3) {
            return Err(ConfigError::PhiThetaOverlap);
        }
        for (name, value) in [("r1", r1), ("r2", r2)] {
            if !(value > F::zero() && value <= F::one()) {
                return Err(ConfigError::BadRate {
                    name,
                    value: value.to_f64().unwrap_or(f64::NAN),
                });
            }
        }
        Ok(DetectionConfig {
            k,
            phi,
            theta,
            r1,
            r2,
            seed,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn phi(&self) -> F {
        self.phi
    }

    pub fn theta(&self) -> &Theta<F> {
        &self.theta
    }

    pub fn r1(&self) -> F {
        self.r1
    }

    pub fn r2(&self) -> F {
        self.r2
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn with_rates(self, r1: F, r2: F) -> Result<Self, ConfigError> {
        DetectionConfig::new(self.k, self.phi, self.theta, r1, r2, self.seed)
    }

    pub fn with_seed(self, seed: u64) -> Self {
        DetectionConfig { seed, ..self }
    }
}

impl<F: Real> Default for DetectionConfig<F> {
    /// k=10, phi=0.04, theta=(0.5, 0.11, -0.11, -0.5), r1=0.004, r2=0.30.
    fn default() -> Self {
        DetectionConfig::new(
            10,
            F::from_f64(0.04).unwrap(),
            Theta::standard(),
            F::from_f64(0.004).unwrap(),
            F::from_f64(0.30).unwrap(),
            0,
        )
        .expect("default config is valid")
    }
}

/// Which stage produced a trajectory's final score.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Stage1,
    Stage2,
}

/// Per-trajectory detection outcome.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct ScoreRecord<F: Real> {
    pub trajectory_id: u64,
    /// Final anomaly score; +/-infinity sentinels mark the zero-intersection
    /// fallback (serialized as the strings "inf"/"-inf").
    #[serde(with = "score_serde")]
    pub score: F,
    pub stage: Stage,
    pub predicted: ClassLabel,
    pub is_ant: bool,
}

/// JSON has no infinities; finite scores serialize as numbers, sentinels as
/// "inf"/"-inf" strings.
mod score_serde {
    use serde::de::Error as _;
    use serde::{Deserialize, Deserializer, Serializer};

    use crate::scalar::Real;

    pub fn serialize<F: Real, S: Serializer>(score: &F, serializer: S) -> Result<S::Ok, S::Error> {
        if score.is_finite() {
            serializer.serialize_f64(score.to_f64().unwrap())
        } else if *score > F::zero() {
            serializer.serialize_str("inf")
        } else {
            serializer.serialize_str("-inf")
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Num(f64),
        Str(String),
    }

    pub fn deserialize<'de, F: Real, D: Deserializer<'de>>(deserializer: D) -> Result<F, D::Error> {
        let value = match Raw::deserialize(deserializer)? {
            Raw::Num(v) => v,
            Raw::Str(s) => match s.as_str() {
                "inf" => f64::INFINITY,
                "-inf" => f64::NEG_INFINITY,
                other => return Err(D::Error::custom(format!("bad score string {other:?}"))),
            },
        };
        F::from_f64(value).ok_or_else(|| D::Error::custom("score not representable"))
    }
}

/// `|a n b|`: cells shared by the two trajectories. Symmetric.
pub fn intersection_size(a: &Trajectory, b: &Trajectory) -> usize {
    let (mut xs, mut ys) = (a.sorted_cells(), b.sorted_cells());
    if xs.len() > ys.len() {
        std::mem::swap(&mut xs, &mut ys);
    }
    let mut count = 0;
    let mut j = 0;
    for &x in xs {
        while j < ys.len() && ys[j] < x {
            j += 1;
        }
        if j == ys.len() {
            break;
        }
        if ys[j] == x {
            count += 1;
            j += 1;
        }
    }
    count
}

/// DIS distance `(|a| - |b|) / |a n b|`. Antisymmetric; errors on disjoint
/// pairs, where the denominator would be zero.
pub fn dis<F: Real>(a: &Trajectory, b: &Trajectory) -> Result<F, ScoreError> {
    let inter = intersection_size(a, b);
    if inter == 0 {
        return Err(ScoreError::EmptyIntersection);
    }
    let num = a.len() as i64 - b.len() as i64;
    Ok(from_i64::<F>(num) / from_u64(inter as u64))
}

fn ratio_of_sums<'a, F, I>(subject: &Trajectory, refs: I) -> Result<F, ScoreError>
where
    F: Real,
    I: IntoIterator<Item = &'a Trajectory>,
{
    let mut num: i64 = 0;
    let mut den: u64 = 0;
    for j in refs {
        num += subject.len() as i64 - j.len() as i64;
        den += intersection_size(subject, j) as u64;
    }
    if den == 0 {
        return Err(ScoreError::ZeroDenominator);
    }
    Ok(from_i64::<F>(num) / from_u64(den))
}

/// Stage-1 anomaly score of `subject` over a broad reference set: the ratio of
/// sums, not a mean of ratios. The caller must exclude the subject itself.
pub fn stage1_score<'a, F, I>(subject: &Trajectory, refs: I) -> Result<F, ScoreError>
where
    F: Real,
    I: IntoIterator<Item = &'a Trajectory>,
{
    ratio_of_sums(subject, refs)
}

/// Stage-2 anomaly score over the selected nearest ANT. Same functional form
/// as [`stage1_score`]; separate entry point because the reference contract
/// differs (neighbors come from the ANT pool).
pub fn stage2_score<'a, F, I>(subject: &Trajectory, neighbors: I) -> Result<F, ScoreError>
where
    F: Real,
    I: IntoIterator<Item = &'a Trajectory>,
{
    ratio_of_sums(subject, neighbors)
}

/// Ids whose stage-1 score lies in the closed interval `[-phi, phi]`, in input
/// order.
pub fn select_ant<F: Real>(scores: &[(u64, F)], phi: F) -> Vec<u64> {
    scores
        .iter()
        .filter(|(_, s)| *s >= -phi && *s <= phi)
        .map(|(id, _)| *id)
        .collect()
}

/// The `min(k, |pool|)` pool members with the largest intersection with
/// `subject`, ties broken by ascending trajectory id.
pub fn k_nearest_ant<'a>(
    subject: &Trajectory,
    pool: &[&'a Trajectory],
    k: usize,
) -> Vec<&'a Trajectory> {
    let mut ranked: Vec<(usize, &'a Trajectory)> = pool
        .iter()
        .map(|&t| (intersection_size(subject, t), t))
        .collect();
    ranked.sort_by(|(ia, ta), (ib, tb)| ib.cmp(ia).then(ta.id().cmp(&tb.id())));
    ranked.truncate(k);
    ranked.into_iter().map(|(_, t)| t).collect()
}

/// Threshold segmentation of the score line:
///
/// ```text
/// GD  if s >= t1
/// LD  if t2 <= s < t1
/// NT  if t3 < s < t2
/// LS  if t4 < s <= t3
/// GS  if s <= t4
/// ```
pub fn classify<F: Real>(score: F, theta: &Theta<F>) -> ClassLabel {
    let [t1, t2, t3, t4] = theta.values();
    if score >= t1 {
        ClassLabel::Gd
    } else if score >= t2 {
        ClassLabel::Ld
    } else if score > t3 {
        ClassLabel::Nt
    } else if score > t4 {
        ClassLabel::Ls
    } else {
        ClassLabel::Gs
    }
}
