//! Full detection runs: seeded sampling, two-stage scoring, score assembly and
//! classification, with wall-clock timing capture.
//!
//! ATDC scores every trajectory against all others in stage 1 and against the
//! k nearest of the whole ANT set in stage 2. FastATDC draws one global
//! reference sample at rate `r1` for stage 1 and one global ANT sample at rate
//! `r2` for stage 2; with both rates at 1.0 the two runners produce
//! bit-identical scores. All randomness is drawn up front, so per-trajectory
//! scoring can fan out across threads without affecting results.

use std::collections::BTreeSet;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::{from_usize, Real};
use crate::scoring::{
    classify, intersection_size, k_nearest_ant, select_ant, stage2_score, ScoreError, ScoreRecord,
    Stage,
};
use crate::scoring::DetectionConfig;
use crate::trajdata::{Dataset, Trajectory};

/// Stream tags for the independent sampling streams of one seed.
const STREAM_STAGE1: u64 = 1;
const STREAM_STAGE2: u64 = 2;
const STREAM_STAGE1_REPLACEMENT: u64 = 3;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("dataset has {n} trajectories; detection needs at least 2")]
    DatasetTooSmall { n: usize },
    #[error("empty ANT set: no stage-1 score within [-phi, phi]; {summary}")]
    EmptyAnt { summary: S1Summary },
    #[error("sample count {count} out of range for pool of {pool}")]
    BadSampleCount { count: usize, pool: usize },
}

/// Distribution summary attached to the empty-ANT error so the caller can see
/// how far off phi was.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct S1Summary {
    pub count: usize,
    pub finite: usize,
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    /// Smallest |S1|; the phi that would have admitted at least one ANT.
    pub min_abs: f64,
}

impl std::fmt::Display for S1Summary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "S1 over {} trajectories ({} finite): min {:.6}, max {:.6}, mean {:.6}, min|S1| {:.6}",
            self.count, self.finite, self.min, self.max, self.mean, self.min_abs
        )
    }
}

impl S1Summary {
    fn from_scores<F: Real>(scores: &[(u64, F)]) -> Self {
        let finite: Vec<f64> = scores
            .iter()
            .filter(|(_, s)| s.is_finite())
            .filter_map(|(_, s)| s.to_f64())
            .collect();
        let (min, max, mean, min_abs) = if finite.is_empty() {
            (f64::NAN, f64::NAN, f64::NAN, f64::NAN)
        } else {
            let sum: f64 = finite.iter().sum();
            (
                finite.iter().cloned().fold(f64::INFINITY, f64::min),
                finite.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
                sum / finite.len() as f64,
                finite.iter().map(|v| v.abs()).fold(f64::INFINITY, f64::min),
            )
        };
        S1Summary {
            count: scores.len(),
            finite: finite.len(),
            min,
            max,
            mean,
            min_abs,
        }
    }
}

/// Which runner produced a result.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Atdc,
    FastAtdc,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Atdc => "atdc",
            Method::FastAtdc => "fastatdc",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Wall-clock timings of one run.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Timings {
    pub stage1_seconds: f64,
    pub stage2_seconds: f64,
    pub total_seconds: f64,
    pub seconds_per_100_trajectories: f64,
}

/// Intersection computations performed, split by stage. Backs the complexity
/// claims without instrumenting the scoring functions themselves.
#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
pub struct WorkStats {
    pub stage1_intersections: u64,
    pub stage2_intersections: u64,
}

impl WorkStats {
    pub fn total(&self) -> u64 {
        self.stage1_intersections + self.stage2_intersections
    }
}

/// Everything a detection run produces.
#[derive(Debug, Clone)]
pub struct RunResult<F: Real> {
    /// One record per trajectory, in dataset order.
    pub records: Vec<ScoreRecord<F>>,
    /// The ANT set tau_0.
    pub ant_ids: BTreeSet<u64>,
    pub timings: Timings,
    pub config_echo: DetectionConfig<F>,
    pub dataset_name: String,
    pub method: Method,
    pub work: WorkStats,
}

/// The effective reference draw for one subject at one stage: the stage-1
/// references it was scored against, or its selected stage-2 neighbors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampleDraw {
    pub stage: Stage,
    pub subject_id: u64,
    pub drawn_ids: Vec<u64>,
}

impl SampleDraw {
    /// Panics if the draw violates its invariants; test helper.
    pub fn assert_valid(&self) {
        let mut seen = BTreeSet::new();
        for &id in &self.drawn_ids {
            assert!(seen.insert(id), "duplicate drawn id {id}");
        }
        if self.stage == Stage::Stage1 {
            assert!(
                !self.drawn_ids.contains(&self.subject_id),
                "stage-1 draw contains its subject"
            );
        }
    }
}

/// Uniform without-replacement sample of `count` indices from `0..pool_size`,
/// returned ascending. Deterministic in `(seed, stream_tag)`; distinct stream
/// tags give independent streams.
pub fn draw_sample(
    pool_size: usize,
    count: usize,
    seed: u64,
    stream_tag: u64,
) -> Result<Vec<usize>, PipelineError> {
    if count == 0 || count > pool_size {
        return Err(PipelineError::BadSampleCount {
            count,
            pool: pool_size,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream_tag);
    let mut indices: Vec<usize> = rand::seq::index::sample(&mut rng, pool_size, count)
        .into_iter()
        .collect();
    indices.sort_unstable();
    Ok(indices)
}

/// Stage-1 reference sample size: round-half-up of `r1 * n`, floored at 1.
pub fn stage1_sample_size<F: Real>(n: usize, r1: F) -> usize {
    let rounded = (r1 * from_usize::<F>(n)).round().to_usize().unwrap_or(0);
    rounded.clamp(1, n)
}

/// Stage-2 ANT sample size: round-half-up of `r2 * d`, floored at k and
/// clamped to the ANT count.
pub fn stage2_sample_size<F: Real>(d: usize, r2: F, k: usize) -> usize {
    let rounded = (r2 * from_usize::<F>(d)).round().to_usize().unwrap_or(0);
    rounded.max(k).min(d)
}

/// The frozen sampling decisions of a run: drawn before any scoring so the
/// scoring loops are pure and parallelizable.
struct SamplingPlan {
    /// Dataset positions in the stage-1 sample, ascending.
    sample1: Vec<usize>,
    /// Replacement position used by the one subject whose removal would empty
    /// a single-element stage-1 sample.
    replacement: Option<usize>,
}

fn stage1_plan<F: Real>(
    ds: &Dataset,
    cfg: &DetectionConfig<F>,
) -> Result<SamplingPlan, PipelineError> {
    let n = ds.n();
    let m1 = stage1_sample_size(n, cfg.r1());
    let sample1 = draw_sample(n, m1, cfg.seed(), STREAM_STAGE1)?;
    let replacement = if m1 == 1 {
        let excluded = sample1[0];
        let raw = draw_sample(n - 1, 1, cfg.seed(), STREAM_STAGE1_REPLACEMENT)?[0];
        Some(if raw >= excluded { raw + 1 } else { raw })
    } else {
        None
    };
    Ok(SamplingPlan {
        sample1,
        replacement,
    })
}

/// Stage-1 references for one subject: the global sample minus the subject,
/// with the replacement standing in when that leaves nothing.
fn stage1_ref_positions<'p>(
    plan: &'p SamplingPlan,
    subject_pos: usize,
) -> impl Iterator<Item = usize> + 'p {
    let lone = plan.sample1.len() == 1 && plan.sample1[0] == subject_pos;
    let replacement = lone.then(|| plan.replacement.expect("replacement drawn"));
    plan.sample1
        .iter()
        .copied()
        .filter(move |&p| p != subject_pos)
        .chain(replacement)
}

/// Fused ratio-of-sums over reference positions; falls back to the +/-infinity
/// sentinel (by subject length vs. mean reference length) when the subject
/// shares no cells with any reference. Returns the score and the number of
/// intersections computed.
fn scored_against<F: Real>(
    subject: &Trajectory,
    refs: impl Iterator<Item = usize>,
    trajectories: &[Trajectory],
) -> (F, u64) {
    let mut num: i64 = 0;
    let mut den: u64 = 0;
    let mut count: u64 = 0;
    let mut len_sum: u64 = 0;
    for pos in refs {
        let j = &trajectories[pos];
        num += subject.len() as i64 - j.len() as i64;
        den += intersection_size(subject, j) as u64;
        count += 1;
        len_sum += j.len() as u64;
    }
    let score = if den > 0 {
        F::from_i64(num).unwrap() / F::from_u64(den).unwrap()
    } else {
        length_sentinel(subject.len(), len_sum as f64 / count.max(1) as f64)
    };
    (score, count)
}

/// Zero-overlap fallback: longer than the reference mean reads as the extreme
/// detour (+inf, classified GD), otherwise the extreme shortcut (-inf, GS).
fn length_sentinel<F: Real>(subject_len: usize, mean_ref_len: f64) -> F {
    if subject_len as f64 > mean_ref_len {
        F::infinity()
    } else {
        F::neg_infinity()
    }
}

/// Stage-1 scores for every trajectory, in dataset order, at the config's r1.
/// With r1 = 1 this is the full N-1-reference score of every trajectory.
pub fn stage1_scores<F: Real>(
    ds: &Dataset,
    cfg: &DetectionConfig<F>,
) -> Result<Vec<(u64, F)>, PipelineError> {
    if ds.n() < 2 {
        return Err(PipelineError::DatasetTooSmall { n: ds.n() });
    }
    let plan = stage1_plan(ds, cfg)?;
    Ok(stage1_pass(ds, &plan).0)
}

fn stage1_pass<F: Real>(ds: &Dataset, plan: &SamplingPlan) -> (Vec<(u64, F)>, u64) {
    let trajectories = ds.trajectories();
    let scored: Vec<(u64, F, u64)> = trajectories
        .par_iter()
        .enumerate()
        .map(|(pos, subject)| {
            let (score, work) =
                scored_against::<F>(subject, stage1_ref_positions(plan, pos), trajectories);
            (subject.id(), score, work)
        })
        .collect();
    let work = scored.iter().map(|(_, _, w)| w).sum();
    (scored.into_iter().map(|(id, s, _)| (id, s)).collect(), work)
}

/// Run FastATDC: sampled stage 1 at `r1`, ANT selection, sampled stage 2 at
/// `r2`, final score and class per trajectory.
pub fn run_fastatdc<F: Real>(
    ds: &Dataset,
    cfg: &DetectionConfig<F>,
) -> Result<RunResult<F>, PipelineError> {
    run_impl(ds, cfg, Method::FastAtdc)
}

/// Run ATDC: the same contract with both sampling rates forced to 1.0, i.e.
/// stage 1 over all other trajectories and stage 2 over the whole ANT set.
pub fn run_atdc<F: Real>(
    ds: &Dataset,
    cfg: &DetectionConfig<F>,
) -> Result<RunResult<F>, PipelineError> {
    let full = cfg
        .with_rates(F::one(), F::one())
        .expect("full sampling rates are valid");
    run_impl(ds, &full, Method::Atdc)
}

fn run_impl<F: Real>(
    ds: &Dataset,
    cfg: &DetectionConfig<F>,
    method: Method,
) -> Result<RunResult<F>, PipelineError> {
    let n = ds.n();
    if n < 2 {
        return Err(PipelineError::DatasetTooSmall { n });
    }
    let trajectories = ds.trajectories();
    let start = Instant::now();

    let plan = stage1_plan(ds, cfg)?;
    let (s1_scores, stage1_work) = stage1_pass::<F>(ds, &plan);
    let ant_ids_ordered = select_ant(&s1_scores, cfg.phi());
    let stage1_seconds = start.elapsed().as_secs_f64();

    if ant_ids_ordered.is_empty() {
        return Err(PipelineError::EmptyAnt {
            summary: S1Summary::from_scores(&s1_scores),
        });
    }

    let stage2_start = Instant::now();
    let ant_set: BTreeSet<u64> = ant_ids_ordered.iter().copied().collect();
    // ANT trajectories in dataset order; positions align with ant_ids_ordered.
    let ant_trajectories: Vec<&Trajectory> = trajectories
        .iter()
        .filter(|t| ant_set.contains(&t.id()))
        .collect();
    let d = ant_trajectories.len();
    let mean_ant_len =
        ant_trajectories.iter().map(|t| t.len() as f64).sum::<f64>() / d as f64;

    let m2 = stage2_sample_size(d, cfg.r2(), cfg.k());
    let tau_r2: Vec<&Trajectory> = draw_sample(d, m2, cfg.seed(), STREAM_STAGE2)?
        .into_iter()
        .map(|pos| ant_trajectories[pos])
        .collect();

    let k = cfg.k();
    let stage2: Vec<Option<(F, u64)>> = trajectories
        .par_iter()
        .map(|subject| {
            if ant_set.contains(&subject.id()) {
                return None;
            }
            let neighbors = k_nearest_ant(subject, &tau_r2, k);
            let work = (tau_r2.len() + neighbors.len()) as u64;
            let score = match stage2_score::<F, _>(subject, neighbors) {
                Ok(s) => s,
                Err(ScoreError::ZeroDenominator) => {
                    length_sentinel(subject.len(), mean_ant_len)
                }
                Err(ScoreError::EmptyIntersection) => unreachable!("not raised by stage2_score"),
            };
            Some((score, work))
        })
        .collect();
    let stage2_work: u64 = stage2.iter().flatten().map(|(_, w)| w).sum();
    let stage2_seconds = stage2_start.elapsed().as_secs_f64();

    let theta = *cfg.theta();
    let records: Vec<ScoreRecord<F>> = s1_scores
        .iter()
        .zip(&stage2)
        .map(|(&(id, s1), s2)| {
            let (score, stage, is_ant) = match s2 {
                None => (s1, Stage::Stage1, true),
                Some((s2, _)) => (*s2, Stage::Stage2, false),
            };
            ScoreRecord {
                trajectory_id: id,
                score,
                stage,
                predicted: classify(score, &theta),
                is_ant,
            }
        })
        .collect();

    let total_seconds = start.elapsed().as_secs_f64();
    let timings = Timings {
        stage1_seconds,
        stage2_seconds,
        total_seconds,
        seconds_per_100_trajectories: total_seconds * 100.0 / n as f64,
    };

    Ok(RunResult {
        records,
        ant_ids: ant_set,
        timings,
        config_echo: *cfg,
        dataset_name: ds.name().to_string(),
        method,
        work: WorkStats {
            stage1_intersections: stage1_work,
            stage2_intersections: stage2_work,
        },
    })
}

/// The per-subject reference draws a run would use: stage-1 reference sets for
/// every trajectory and stage-2 neighbor sets for every non-ANT trajectory.
/// Shares the sampling logic with the runners; intended for inspection and
/// tests, not hot paths.
pub fn sample_draws<F: Real>(
    ds: &Dataset,
    cfg: &DetectionConfig<F>,
) -> Result<Vec<SampleDraw>, PipelineError> {
    if ds.n() < 2 {
        return Err(PipelineError::DatasetTooSmall { n: ds.n() });
    }
    let trajectories = ds.trajectories();
    let plan = stage1_plan(ds, cfg)?;
    let (s1_scores, _) = stage1_pass::<F>(ds, &plan);
    let mut draws: Vec<SampleDraw> = trajectories
        .iter()
        .enumerate()
        .map(|(pos, subject)| SampleDraw {
            stage: Stage::Stage1,
            subject_id: subject.id(),
            drawn_ids: stage1_ref_positions(&plan, pos)
                .map(|p| trajectories[p].id())
                .collect(),
        })
        .collect();

    let ant_ids_ordered = select_ant(&s1_scores, cfg.phi());
    if ant_ids_ordered.is_empty() {
        return Err(PipelineError::EmptyAnt {
            summary: S1Summary::from_scores(&s1_scores),
        });
    }
    let ant_set: BTreeSet<u64> = ant_ids_ordered.iter().copied().collect();
    let ant_trajectories: Vec<&Trajectory> = trajectories
        .iter()
        .filter(|t| ant_set.contains(&t.id()))
        .collect();
    let m2 = stage2_sample_size(ant_trajectories.len(), cfg.r2(), cfg.k());
    let tau_r2: Vec<&Trajectory> = draw_sample(ant_trajectories.len(), m2, cfg.seed(), STREAM_STAGE2)?
        .into_iter()
        .map(|pos| ant_trajectories[pos])
        .collect();
    for subject in trajectories.iter().filter(|t| !ant_set.contains(&t.id())) {
        draws.push(SampleDraw {
            stage: Stage::Stage2,
            subject_id: subject.id(),
            drawn_ids: k_nearest_ant(subject, &tau_r2, cfg.k())
                .iter()
                .map(|t| t.id())
                .collect(),
        });
    }
    Ok(draws)
}

/// Summary object closing a run file: counts, timings, work and config echo.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct RunSummary<F: Real> {
    pub dataset: String,
    pub method: Method,
    pub n: usize,
    pub ant_count: usize,
    pub timings: Timings,
    pub work: WorkStats,
    pub config: DetectionConfig<F>,
}

/// A run file read back: records in dataset order plus the trailing summary.
#[derive(Debug, Clone)]
pub struct RunFile<F: Real> {
    pub records: Vec<ScoreRecord<F>>,
    pub summary: RunSummary<F>,
}

#[derive(Debug, Error)]
pub enum RunIoError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("line {line}: {source}")]
    Parse {
        line: usize,
        #[source]
        source: serde_json::Error,
    },
    #[error("run file has no trailing summary object")]
    MissingSummary,
}

#[derive(Serialize, Deserialize)]
#[serde(bound = "")]
struct SummaryLine<F: Real> {
    summary: RunSummary<F>,
}

/// Write a run as JSON Lines: one `ScoreRecord` per line, then a trailing
/// `{"summary": ...}` object.
pub fn write_run<F: Real, W: Write>(result: &RunResult<F>, writer: W) -> Result<(), RunIoError> {
    let mut w = BufWriter::new(writer);
    for record in &result.records {
        serde_json::to_writer(&mut w, record).map_err(json_io)?;
        w.write_all(b"\n")?;
    }
    let summary = SummaryLine {
        summary: RunSummary {
            dataset: result.dataset_name.clone(),
            method: result.method,
            n: result.records.len(),
            ant_count: result.ant_ids.len(),
            timings: result.timings,
            work: result.work,
            config: result.config_echo,
        },
    };
    serde_json::to_writer(&mut w, &summary).map_err(json_io)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

fn json_io(err: serde_json::Error) -> RunIoError {
    RunIoError::Io(err.into())
}

/// Read a run file written by [`write_run`].
pub fn read_run<F: Real, R: Read>(reader: R) -> Result<RunFile<F>, RunIoError> {
    let mut records = Vec::new();
    let mut summary = None;
    for (idx, line) in BufReader::new(reader).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let parse_err = |source| RunIoError::Parse {
            line: idx + 1,
            source,
        };
        if line.contains("\"summary\"") {
            let parsed: SummaryLine<F> = serde_json::from_str(&line).map_err(parse_err)?;
            summary = Some(parsed.summary);
        } else {
            records.push(serde_json::from_str(&line).map_err(parse_err)?);
        }
    }
    Ok(RunFile {
        records,
        summary: summary.ok_or(RunIoError::MissingSummary)?,
    })
}
