//! Trajectory data model: grid cells, class labels, trajectories, datasets.
//!
//! Trajectories are ordered, duplicate-free lists of grid cells. Order is kept
//! for generator realism; every similarity computation in this crate treats the
//! cells as a set, so each trajectory also carries a sorted copy of its cells
//! for fast intersection counting.

mod generate;
mod io;

pub use generate::{base_route, generate, DatasetPreset, GenError, GeneratorSpec};
pub use io::{load_dataset, read_dataset, save_dataset, write_dataset, IoError};

use serde::de::{Deserializer, Error as _};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Index of a grid cell in a row-major `grid_w x grid_h` popular-region grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CellId(u32);

impl CellId {
    pub fn new(value: u32) -> Self {
        CellId(value)
    }

    pub fn value(self) -> u32 {
        self.0
    }
}

impl std::fmt::Display for CellId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.0.fmt(f)
    }
}

/// The five trajectory classes. Integer codes are fixed and appear verbatim in
/// the dataset and run file formats.
///
/// Declaration order matches the score line left to right under the
/// segmentation thresholds: GD gets the highest scores, GS the lowest, so the
/// derived `Ord` ranks classes by descending score interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ClassLabel {
    /// Global detour, code 0.
    Gd = 0,
    /// Local detour, code 1.
    Ld = 1,
    /// Normal trajectory, code 2.
    Nt = 2,
    /// Local shortcut, code 3.
    Ls = 3,
    /// Global shortcut, code 4.
    Gs = 4,
}

impl ClassLabel {
    pub const ALL: [ClassLabel; 5] = [
        ClassLabel::Gd,
        ClassLabel::Ld,
        ClassLabel::Nt,
        ClassLabel::Ls,
        ClassLabel::Gs,
    ];

    /// The four anomaly classes, i.e. everything but NT.
    pub const ANOMALIES: [ClassLabel; 4] = [
        ClassLabel::Gd,
        ClassLabel::Ld,
        ClassLabel::Ls,
        ClassLabel::Gs,
    ];

    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn from_code(code: u8) -> Option<Self> {
        Self::ALL.get(code as usize).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            ClassLabel::Gd => "GD",
            ClassLabel::Ld => "LD",
            ClassLabel::Nt => "NT",
            ClassLabel::Ls => "LS",
            ClassLabel::Gs => "GS",
        }
    }

    pub fn is_anomaly(self) -> bool {
        self != ClassLabel::Nt
    }
}

impl std::fmt::Display for ClassLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl Serialize for ClassLabel {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_u8(self.code())
    }
}

impl<'de> Deserialize<'de> for ClassLabel {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let code = u8::deserialize(deserializer)?;
        ClassLabel::from_code(code)
            .ok_or_else(|| D::Error::custom(format!("class label code out of range: {code}")))
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DataError {
    #[error("trajectory {id} has no cells")]
    EmptyTrajectory { id: u64 },
    #[error("trajectory {id} visits cell {cell} more than once")]
    DuplicateCell { id: u64, cell: u32 },
    #[error("duplicate trajectory id {id}")]
    DuplicateId { id: u64 },
    #[error("trajectory {id} cell {cell} out of range for {grid_w}x{grid_h} grid")]
    CellOutOfRange {
        id: u64,
        cell: u32,
        grid_w: u32,
        grid_h: u32,
    },
    #[error("grid dimensions must be positive, got {grid_w}x{grid_h}")]
    EmptyGrid { grid_w: u32, grid_h: u32 },
}

/// One identified trajectory: an ordered list of distinct grid cells plus an
/// optional ground-truth class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trajectory {
    id: u64,
    cells: Vec<CellId>,
    label: Option<ClassLabel>,
    /// Cell values sorted ascending; backs all set operations.
    sorted: Vec<u32>,
}

impl Trajectory {
    pub fn new(id: u64, cells: Vec<CellId>, label: Option<ClassLabel>) -> Result<Self, DataError> {
        if cells.is_empty() {
            return Err(DataError::EmptyTrajectory { id });
        }
        let mut sorted: Vec<u32> = cells.iter().map(|c| c.value()).collect();
        sorted.sort_unstable();
        if let Some(dup) = sorted.windows(2).find(|w| w[0] == w[1]) {
            return Err(DataError::DuplicateCell { id, cell: dup[0] });
        }
        Ok(Trajectory {
            id,
            cells,
            label,
            sorted,
        })
    }

    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn cells(&self) -> &[CellId] {
        &self.cells
    }

    /// Cell count; the `|AT_i|` of the scoring formulas.
    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn label(&self) -> Option<ClassLabel> {
        self.label
    }

    /// Ascending cell values; input to the merge-based intersection count.
    pub fn sorted_cells(&self) -> &[u32] {
        &self.sorted
    }
}

/// A collection of trajectories over one grid, with unique ids and all cells
/// inside the grid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dataset {
    grid_w: u32,
    grid_h: u32,
    name: String,
    trajectories: Vec<Trajectory>,
}

impl Dataset {
    pub fn new(
        grid_w: u32,
        grid_h: u32,
        name: impl Into<String>,
        trajectories: Vec<Trajectory>,
    ) -> Result<Self, DataError> {
        if grid_w == 0 || grid_h == 0 {
            return Err(DataError::EmptyGrid { grid_w, grid_h });
        }
        let cell_limit = grid_w as u64 * grid_h as u64;
        let mut ids: Vec<u64> = trajectories.iter().map(|t| t.id()).collect();
        ids.sort_unstable();
        if let Some(dup) = ids.windows(2).find(|w| w[0] == w[1]) {
            return Err(DataError::DuplicateId { id: dup[0] });
        }
        for t in &trajectories {
            if let Some(&cell) = t.sorted_cells().last() {
                if cell as u64 >= cell_limit {
                    return Err(DataError::CellOutOfRange {
                        id: t.id(),
                        cell,
                        grid_w,
                        grid_h,
                    });
                }
            }
        }
        Ok(Dataset {
            grid_w,
            grid_h,
            name: name.into(),
            trajectories,
        })
    }

    /// The empty dataset; what a blank file loads as.
    pub fn empty() -> Self {
        Dataset {
            grid_w: 1,
            grid_h: 1,
            name: String::new(),
            trajectories: Vec::new(),
        }
    }

    /// Number of trajectories; the `N` of the scoring formulas.
    pub fn n(&self) -> usize {
        self.trajectories.len()
    }

    pub fn grid_w(&self) -> u32 {
        self.grid_w
    }

    pub fn grid_h(&self) -> u32 {
        self.grid_h
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn set_name(&mut self, name: impl Into<String>) {
        self.name = name.into();
    }

    pub fn trajectories(&self) -> &[Trajectory] {
        &self.trajectories
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Trajectory> {
        self.trajectories.iter()
    }

    pub fn is_fully_labeled(&self) -> bool {
        self.trajectories.iter().all(|t| t.label().is_some())
    }

    /// Ground-truth labels in dataset order, or the id of the first unlabeled
    /// trajectory.
    pub fn labels(&self) -> Result<Vec<ClassLabel>, u64> {
        self.trajectories
            .iter()
            .map(|t| t.label().ok_or(t.id()))
            .collect()
    }

    /// Per-class trajectory counts in label-code order, unlabeled excluded.
    pub fn class_counts(&self) -> [usize; 5] {
        let mut counts = [0usize; 5];
        for t in &self.trajectories {
            if let Some(label) = t.label() {
                counts[label.code() as usize] += 1;
            }
        }
        counts
    }
}

impl<'a> IntoIterator for &'a Dataset {
    type Item = &'a Trajectory;
    type IntoIter = std::slice::Iter<'a, Trajectory>;

    fn into_iter(self) -> Self::IntoIter {
        self.trajectories.iter()
    }
}
