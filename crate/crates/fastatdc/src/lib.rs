//! Anomalous trajectory detection and classification over gridded
//! trajectories.
//!
//! Trajectories are duplicate-free sequences of grid cells with set semantics
//! for similarity. Detection is two-staged: a broad stage-1 score identifies
//! the absolute normal trajectories (ANT), and everything else is re-scored
//! against its k nearest ANT and classified into one of five classes (global
//! detour, local detour, normal, local shortcut, global shortcut) by a
//! threshold segmentation of the score line. The FastATDC runner accelerates
//! both stages with seeded uniform subsampling; at full sampling rates it is
//! bit-identical to plain ATDC.
//!
//! Score arithmetic is generic over the scalar type via [`Real`]; the aliases
//! below fix the double-precision instantiations used by the CLI and the file
//! formats.

pub mod diagnostics;
pub mod eval;
pub mod pipeline;
mod scalar;
pub mod scoring;
pub mod trajdata;

pub use scalar::Real;

/// Scalar used by the CLI and the on-disk formats.
pub type DefaultScalar = f64;

pub type DetectionConfig64 = scoring::DetectionConfig<DefaultScalar>;
pub type Theta64 = scoring::Theta<DefaultScalar>;
pub type ScoreRecord64 = scoring::ScoreRecord<DefaultScalar>;
pub type RunResult64 = pipeline::RunResult<DefaultScalar>;
pub type RunFile64 = pipeline::RunFile<DefaultScalar>;
pub type MetricsReport64 = eval::MetricsReport<DefaultScalar>;
pub type ClassStats64 = diagnostics::ClassStats<DefaultScalar>;
