//! Synthetic gridded-trajectory datasets with the five-class structure.
//!
//! All routes are lattice paths in disjoint row bands of the grid:
//!
//! * rows 0-3: the shared base route, a monotone right/down staircase; NT
//!   trajectories are the base plus jitter (fringe row 4).
//! * rows 6-8: LD detours. A contiguous mid-route segment of the base is
//!   replaced by a U-shaped detour at least twice as long.
//! * rows 10-11: LS cuts. A segment is replaced by a run half its length.
//! * rows 13-17: the GD middle staircase. GD shares only short endpoint runs
//!   of the base and is ~1.5x its length.
//! * rows 19-20: the GS middle. GS also shares only endpoint runs and is at
//!   most half the base length.
//!
//! Every trajectory gets jitter: up to two cells added from its class fringe
//! row and up to two removed (for anomaly classes, only from class-own cells,
//! so the documented intersection bounds with the base stay exact).

use rand::seq::index::sample as index_sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use super::{CellId, ClassLabel, Dataset, Trajectory};

/// Maximum extra detour cells beyond the mandatory 2x segment length.
const DETOUR_EXTRA_MAX: usize = 10;
/// Maximum cells added/removed per trajectory by jitter.
const JITTER_MAX: usize = 2;
/// Grid rows used by the band layout.
const ROWS_NEEDED: u32 = 21;

const ROW_BASE_TOP: u32 = 0;
const ROW_BASE_FRINGE: u32 = 4;
const ROW_DETOUR_TOP: u32 = 6;
const ROW_DETOUR_FRINGE: u32 = 8;
const ROW_CUT: u32 = 10;
const ROW_CUT_FRINGE: u32 = 11;
const ROW_GD_TOP: u32 = 13;
const ROW_GD_FRINGE: u32 = 17;
const ROW_GS: u32 = 19;
const ROW_GS_FRINGE: u32 = 20;

#[derive(Debug, Error, PartialEq)]
pub enum GenError {
    #[error("class probabilities must be non-negative and sum to 1 (got sum {sum})")]
    InvalidProbs { sum: f64 },
    #[error("route_len must be at least 4, got {route_len}")]
    RouteTooShort { route_len: usize },
    #[error("{name} must lie strictly between 0 and 1, got {value}")]
    FractionOutOfRange { name: &'static str, value: f64 },
    #[error("{name} segment ({seg} cells) does not fit between the protected route ends ({route_len}-cell route)")]
    SegmentTooLong {
        name: &'static str,
        seg: usize,
        route_len: usize,
    },
    #[error("grid too small to host routes of route_len {route_len}: need at least {need_w}x{need_h}, got {got_w}x{got_h}")]
    GridTooSmall {
        route_len: usize,
        need_w: u32,
        need_h: u32,
        got_w: u32,
        got_h: u32,
    },
}

/// Everything that determines a generated dataset. Identical specs (including
/// the seed) generate identical datasets.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorSpec {
    /// Total trajectory count.
    pub n: usize,
    /// Per-class draw probabilities in label-code order (GD, LD, NT, LS, GS).
    pub probs: [f64; 5],
    pub grid_w: u32,
    pub grid_h: u32,
    /// Target cell count of the shared base route.
    pub route_len: usize,
    /// Fraction of the route replaced by a detour for LD.
    pub detour_frac: f64,
    /// Fraction of the route replaced by a cut for LS.
    pub shortcut_frac: f64,
    pub seed: u64,
}

impl Default for GeneratorSpec {
    fn default() -> Self {
        GeneratorSpec {
            n: 2000,
            probs: DatasetPreset::T1.probs(),
            grid_w: 100,
            grid_h: 24,
            route_len: 50,
            detour_frac: 0.25,
            shortcut_frac: 0.2,
            seed: 0,
        }
    }
}

impl GeneratorSpec {
    /// Table-style spec with a preset's size and class mixture and default
    /// route geometry.
    pub fn preset(preset: DatasetPreset, seed: u64) -> Self {
        GeneratorSpec {
            n: preset.n(),
            probs: preset.probs(),
            seed,
            ..GeneratorSpec::default()
        }
    }

    pub fn validate(&self) -> Result<(), GenError> {
        let sum: f64 = self.probs.iter().sum();
        if self.probs.iter().any(|&p| p < 0.0) || (sum - 1.0).abs() > 1e-9 {
            return Err(GenError::InvalidProbs { sum });
        }
        if self.route_len < 4 {
            return Err(GenError::RouteTooShort {
                route_len: self.route_len,
            });
        }
        for (name, value) in [
            ("detour_frac", self.detour_frac),
            ("shortcut_frac", self.shortcut_frac),
        ] {
            if !(value > 0.0 && value < 1.0) {
                return Err(GenError::FractionOutOfRange { name, value });
            }
        }
        let layout = Layout::for_spec(self)?;
        let (need_w, need_h) = (layout.need_w, ROWS_NEEDED);
        if self.grid_w < need_w || self.grid_h < need_h {
            return Err(GenError::GridTooSmall {
                route_len: self.route_len,
                need_w,
                need_h,
                got_w: self.grid_w,
                got_h: self.grid_h,
            });
        }
        Ok(())
    }
}

/// The six dataset scales and class mixtures used throughout the benchmarks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DatasetPreset {
    T1,
    T2,
    T3,
    T4,
    T5,
    T6,
}

impl DatasetPreset {
    pub const ALL: [DatasetPreset; 6] = [
        DatasetPreset::T1,
        DatasetPreset::T2,
        DatasetPreset::T3,
        DatasetPreset::T4,
        DatasetPreset::T5,
        DatasetPreset::T6,
    ];

    pub fn name(self) -> &'static str {
        match self {
            DatasetPreset::T1 => "t1",
            DatasetPreset::T2 => "t2",
            DatasetPreset::T3 => "t3",
            DatasetPreset::T4 => "t4",
            DatasetPreset::T5 => "t5",
            DatasetPreset::T6 => "t6",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.iter().copied().find(|p| p.name() == name)
    }

    pub fn n(self) -> usize {
        match self {
            DatasetPreset::T1 => 1093,
            DatasetPreset::T2 => 311,
            DatasetPreset::T3 => 1720,
            DatasetPreset::T4 => 425,
            DatasetPreset::T5 => 1409,
            DatasetPreset::T6 => 1567,
        }
    }

    /// Class mixture (GD, LD, NT, LS, GS); NT takes the remainder.
    pub fn probs(self) -> [f64; 5] {
        let (gd, ld, ls, gs) = match self {
            DatasetPreset::T1 => (0.015, 0.022, 0.091, 0.003),
            DatasetPreset::T2 => (0.016, 0.013, 0.048, 0.006),
            DatasetPreset::T3 => (0.015, 0.012, 0.042, 0.003),
            DatasetPreset::T4 => (0.005, 0.016, 0.028, 0.005),
            DatasetPreset::T5 => (0.015, 0.027, 0.121, 0.009),
            DatasetPreset::T6 => (0.013, 0.043, 0.154, 0.016),
        };
        [gd, ld, 1.0 - gd - ld - ls - gs, ls, gs]
    }
}

/// Segment lengths, shared-end runs and column budget derived from the spec.
struct Layout {
    route_len: usize,
    /// Detour segment length for LD.
    seg_detour: usize,
    /// Cut segment length for LS.
    seg_cut: usize,
    /// Replacement run length for LS.
    cut_len: usize,
    /// Base cells shared per end with GD.
    shared_gd: usize,
    /// Base cells shared per end with GS.
    shared_gs: usize,
    /// GD length range (before jitter).
    gd_len_min: usize,
    gd_extra_max: usize,
    /// GS length range (before jitter).
    gs_len_min: usize,
    gs_extra_max: usize,
    need_w: u32,
}

impl Layout {
    fn for_spec(spec: &GeneratorSpec) -> Result<Layout, GenError> {
        let r = spec.route_len;
        let seg_detour = ((spec.detour_frac * r as f64).floor() as usize).max(1);
        let seg_cut = ((spec.shortcut_frac * r as f64).floor() as usize).max(2);
        let cut_len = (seg_cut / 2).max(1);
        let shared_gd = (r / 10).max(1);
        let shared_gs = (r / 20).max(1);
        if 2 * shared_gd + seg_detour > r {
            return Err(GenError::SegmentTooLong {
                name: "detour_frac",
                seg: seg_detour,
                route_len: r,
            });
        }
        if 2 * shared_gd + seg_cut > r {
            return Err(GenError::SegmentTooLong {
                name: "shortcut_frac",
                seg: seg_cut,
                route_len: r,
            });
        }

        let gd_len_min = (3 * r).div_ceil(2).max(2 * shared_gd + 4);
        let gd_extra_max = r / 4;
        let gs_len_min = (2 * r / 5).max(2 * shared_gs + 1);
        let gs_extra_max = (r / 2).saturating_sub(gs_len_min).saturating_sub(1).min(4);

        // Column budgets per band; base x-coordinates never exceed the route
        // position, so these bound every placement.
        let base_cols = r - 3;
        let detour_cols =
            (r - shared_gd - seg_detour) + (2 * seg_detour + DETOUR_EXTRA_MAX).div_ceil(2);
        let cut_cols = (r - shared_gd - seg_cut) + cut_len + 2;
        let gd_cols = gd_len_min + gd_extra_max - 2 * shared_gd;
        let gs_cols = gs_len_min + gs_extra_max - 2 * shared_gs;
        let need_w = base_cols.max(detour_cols).max(cut_cols).max(gd_cols).max(gs_cols) as u32;

        Ok(Layout {
            route_len: r,
            seg_detour,
            seg_cut,
            cut_len,
            shared_gd,
            shared_gs,
            gd_len_min,
            gd_extra_max,
            gs_len_min,
            gs_extra_max,
            need_w,
        })
    }
}

#[derive(Clone, Copy)]
struct Pos {
    x: u32,
    y: u32,
}

fn cell(grid_w: u32, pos: Pos) -> CellId {
    CellId::new(pos.y * grid_w + pos.x)
}

/// Monotone right/down staircase: `len` cells starting at (x0, y0) with
/// `downs` down-moves at the given move indices (rest are right-moves).
fn staircase(x0: u32, y0: u32, len: usize, down_moves: &[usize]) -> Vec<Pos> {
    let mut cells = Vec::with_capacity(len);
    let (mut x, mut y) = (x0, y0);
    cells.push(Pos { x, y });
    for m in 0..len - 1 {
        if down_moves.contains(&m) {
            y += 1;
        } else {
            x += 1;
        }
        cells.push(Pos { x, y });
    }
    cells
}

/// The shared base route a spec generates NT trajectories from, before
/// jitter. Useful for inspecting how far each class strays from it.
pub fn base_route(spec: &GeneratorSpec) -> Result<Vec<CellId>, GenError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let downs: Vec<usize> = index_sample(&mut rng, spec.route_len - 1, 3)
        .into_iter()
        .collect();
    Ok(staircase(0, ROW_BASE_TOP, spec.route_len, &downs)
        .into_iter()
        .map(|p| cell(spec.grid_w, p))
        .collect())
}

/// Generate a labeled dataset. Deterministic in the spec, including the seed.
pub fn generate(spec: &GeneratorSpec) -> Result<Dataset, GenError> {
    spec.validate()?;
    let layout = Layout::for_spec(spec)?;
    let r = layout.route_len;
    let w = spec.grid_w;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    // Shared geometry, drawn once: the base staircase and the GD middle.
    let base_downs: Vec<usize> = index_sample(&mut rng, r - 1, 3).into_iter().collect();
    let base = staircase(0, ROW_BASE_TOP, r, &base_downs);
    let gd_mid_max = layout.gd_len_min + layout.gd_extra_max - 2 * layout.shared_gd;
    let gd_downs: Vec<usize> = index_sample(&mut rng, gd_mid_max - 1, 3).into_iter().collect();
    let gd_middle = staircase(0, ROW_GD_TOP, gd_mid_max, &gd_downs);
    let gs_mid_max = layout.gs_len_min + layout.gs_extra_max - 2 * layout.shared_gs;
    let gs_middle: Vec<Pos> = (0..gs_mid_max as u32)
        .map(|x| Pos { x, y: ROW_GS })
        .collect();

    let base_fringe: Vec<Pos> = (0..(r - 3) as u32)
        .map(|x| Pos {
            x,
            y: ROW_BASE_FRINGE,
        })
        .collect();

    let cum: Vec<f64> = spec
        .probs
        .iter()
        .scan(0.0, |acc, p| {
            *acc += p;
            Some(*acc)
        })
        .collect();

    let mut trajectories = Vec::with_capacity(spec.n);
    for id in 0..spec.n as u64 {
        let u: f64 = rng.random();
        let class_idx = cum.iter().position(|&c| u < c).unwrap_or(4);
        let label = ClassLabel::from_code(class_idx as u8).unwrap();

        // Route positions, then the jitter pools: adds come from the class
        // fringe row, removals from the class-own stretch of the route.
        let (mut route, fringe, removable): (Vec<Pos>, Vec<Pos>, std::ops::Range<usize>) =
            match label {
                ClassLabel::Nt => (base.clone(), base_fringe.clone(), 1..r - 1),
                ClassLabel::Ld => {
                    let p_max = r - layout.shared_gd - layout.seg_detour;
                    let p = rng.random_range(layout.shared_gd..=p_max);
                    let extra = rng.random_range(0..=DETOUR_EXTRA_MAX);
                    let detour_len = 2 * layout.seg_detour + extra;
                    let x0 = base[p].x;
                    let top = detour_len.div_ceil(2);
                    let mut detour = Vec::with_capacity(detour_len);
                    for j in 0..top {
                        detour.push(Pos {
                            x: x0 + j as u32,
                            y: ROW_DETOUR_TOP,
                        });
                    }
                    for j in 0..detour_len - top {
                        detour.push(Pos {
                            x: x0 + (top - 1 - j) as u32,
                            y: ROW_DETOUR_TOP + 1,
                        });
                    }
                    let fringe = (0..top as u32)
                        .map(|j| Pos {
                            x: x0 + j,
                            y: ROW_DETOUR_FRINGE,
                        })
                        .collect();
                    let mut route = base[..p].to_vec();
                    let detour_range = route.len()..route.len() + detour_len;
                    route.extend_from_slice(&detour);
                    route.extend_from_slice(&base[p + layout.seg_detour..]);
                    (route, fringe, detour_range)
                }
                ClassLabel::Ls => {
                    let q_max = r - layout.shared_gd - layout.seg_cut;
                    let q = rng.random_range(layout.shared_gd..=q_max);
                    let x0 = base[q].x;
                    let cut: Vec<Pos> = (0..layout.cut_len as u32)
                        .map(|j| Pos {
                            x: x0 + j,
                            y: ROW_CUT,
                        })
                        .collect();
                    let fringe = (0..(layout.cut_len + 2) as u32)
                        .map(|j| Pos {
                            x: x0 + j,
                            y: ROW_CUT_FRINGE,
                        })
                        .collect();
                    let mut route = base[..q].to_vec();
                    let cut_range = route.len()..route.len() + cut.len();
                    route.extend_from_slice(&cut);
                    route.extend_from_slice(&base[q + layout.seg_cut..]);
                    (route, fringe, cut_range)
                }
                ClassLabel::Gd => {
                    let extra = rng.random_range(0..=layout.gd_extra_max);
                    let mid_len = layout.gd_len_min + extra - 2 * layout.shared_gd;
                    let shared = layout.shared_gd;
                    let mut route = base[..shared].to_vec();
                    let mid_range = route.len()..route.len() + mid_len;
                    route.extend_from_slice(&gd_middle[..mid_len]);
                    route.extend_from_slice(&base[r - shared..]);
                    let fringe = (0..mid_len as u32)
                        .map(|x| Pos {
                            x,
                            y: ROW_GD_FRINGE,
                        })
                        .collect();
                    (route, fringe, mid_range)
                }
                ClassLabel::Gs => {
                    let extra = rng.random_range(0..=layout.gs_extra_max);
                    let mid_len = layout.gs_len_min + extra - 2 * layout.shared_gs;
                    let shared = layout.shared_gs;
                    let mut route = base[..shared].to_vec();
                    let mid_range = route.len()..route.len() + mid_len;
                    route.extend_from_slice(&gs_middle[..mid_len]);
                    route.extend_from_slice(&base[r - shared..]);
                    let fringe = (0..mid_len as u32)
                        .map(|x| Pos {
                            x,
                            y: ROW_GS_FRINGE,
                        })
                        .collect();
                    (route, fringe, mid_range)
                }
            };

        // Jitter: adds first (drawn from the fringe), then removals. Removal
        // counts are weighted toward the maximum so reference cell sets vary
        // enough for nearest-neighbor selection to matter.
        let want_add = rng.random_range(0..=JITTER_MAX);
        let n_add = want_add.min(fringe.len());
        let adds: Vec<Pos> = if n_add > 0 {
            index_sample(&mut rng, fringe.len(), n_add)
                .into_iter()
                .map(|j| fringe[j])
                .collect()
        } else {
            Vec::new()
        };
        let u: f64 = rng.random();
        let want_rem = if u < 0.2 {
            0
        } else if u < 0.5 {
            1
        } else {
            JITTER_MAX
        };
        let pool = removable.len();
        let n_rem = want_rem.min(pool);
        if n_rem > 0 {
            let mut rem_idx: Vec<usize> = index_sample(&mut rng, pool, n_rem)
                .into_iter()
                .map(|j| removable.start + j)
                .collect();
            rem_idx.sort_unstable_by(|a, b| b.cmp(a));
            for idx in rem_idx {
                route.remove(idx);
            }
        }
        route.extend_from_slice(&adds);

        let cells = route.into_iter().map(|p| cell(w, p)).collect();
        trajectories.push(
            Trajectory::new(id, cells, Some(label)).expect("generated trajectory is valid"),
        );
    }

    Ok(
        Dataset::new(w, spec.grid_h, format!("synthetic-{}", spec.seed), trajectories)
            .expect("generated dataset is valid"),
    )
}
