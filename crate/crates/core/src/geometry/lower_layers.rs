//! Lower layers of [0,1]^2 on dyadic cell grids.
//!
//! A lower layer on the k×k grid is a downward-closed set of cells, i.e. an
//! order ideal of the k×k grid poset. Ideals are stored as non-increasing
//! column heights; there are C(2k, k) of them.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Cap for the op-level enumeration (the analysis module goes to 8 = 2^3
/// internally for the min-gap check).
pub const ENUMERATION_GRID_CAP: usize = 6;
const INTERNAL_GRID_CAP: usize = 8;

/// A downward-closed set of cells of the k×k grid over [0,1]^2.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LowerLayerGrid {
    size: usize,
    /// Non-increasing column heights, one per column, each in 0..=size.
    heights: Vec<usize>,
}

impl LowerLayerGrid {
    pub fn new(size: usize, heights: Vec<usize>) -> Result<Self> {
        if size == 0 || heights.len() != size {
            return Err(Error::invalid(format!(
                "need {size} column heights, got {}",
                heights.len()
            )));
        }
        if heights.iter().any(|&h| h > size) {
            return Err(Error::invalid("column height exceeds grid size"));
        }
        if heights.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::invalid(
                "heights must be non-increasing (downward closure)",
            ));
        }
        Ok(LowerLayerGrid { size, heights })
    }

    /// Builds from a boolean cell grid `cells[col][row]`, validating
    /// downward closure.
    pub fn from_cells(cells: &[Vec<bool>]) -> Result<Self> {
        let size = cells.len();
        let mut heights = Vec::with_capacity(size);
        for col in cells {
            if col.len() != size {
                return Err(Error::invalid("cell grid must be square"));
            }
            let h = col.iter().take_while(|&&b| b).count();
            if col[h..].iter().any(|&b| b) {
                return Err(Error::invalid("column has a gap: not downward closed"));
            }
            heights.push(h);
        }
        Self::new(size, heights)
    }

    pub fn empty(size: usize) -> Self {
        LowerLayerGrid {
            size,
            heights: vec![0; size],
        }
    }

    pub fn full(size: usize) -> Self {
        LowerLayerGrid {
            size,
            heights: vec![size; size],
        }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn heights(&self) -> &[usize] {
        &self.heights
    }

    /// Boolean membership grid, `cells()[col][row]`.
    pub fn cells(&self) -> Vec<Vec<bool>> {
        self.heights
            .iter()
            .map(|&h| (0..self.size).map(|r| r < h).collect())
            .collect()
    }

    pub fn cell_count(&self) -> usize {
        self.heights.iter().sum()
    }

    /// Lebesgue measure over [0,1]^2 (cells have side 1/size).
    pub fn measure(&self) -> f64 {
        self.cell_count() as f64 / (self.size * self.size) as f64
    }

    /// `d_λ` between two layers on the same grid: columns are downward
    /// closed, so the symmetric difference is `Σ |h_i − h'_i|` cells.
    pub fn dist(&self, other: &LowerLayerGrid) -> Result<f64> {
        if self.size != other.size {
            return Err(Error::DimensionMismatch {
                left: self.size,
                right: other.size,
            });
        }
        let cells: usize = self
            .heights
            .iter()
            .zip(&other.heights)
            .map(|(&a, &b)| a.abs_diff(b))
            .sum();
        Ok(cells as f64 / (self.size * self.size) as f64)
    }

    pub fn is_subset_of(&self, other: &LowerLayerGrid) -> bool {
        self.size == other.size
            && self
                .heights
                .iter()
                .zip(&other.heights)
                .all(|(&a, &b)| a <= b)
    }

    /// The smallest layer on the half-resolution grid containing `self`
    /// (the lower-layers analogue of `g_n`). Size must be even.
    pub fn coarsen(&self) -> Result<LowerLayerGrid> {
        if self.size % 2 != 0 {
            return Err(Error::invalid("coarsen needs an even grid size"));
        }
        let half = self.size / 2;
        let heights = (0..half)
            .map(|j| {
                let m = self.heights[2 * j].max(self.heights[2 * j + 1]);
                m.div_ceil(2)
            })
            .collect();
        LowerLayerGrid::new(half, heights)
    }

    /// The same layer re-expressed on the doubled grid.
    pub fn refine(&self) -> LowerLayerGrid {
        let heights = self
            .heights
            .iter()
            .flat_map(|&h| [2 * h, 2 * h])
            .collect();
        LowerLayerGrid {
            size: 2 * self.size,
            heights,
        }
    }

    /// All order ideals of the k×k grid, for internal analysis use.
    pub(crate) fn enumerate_internal(size: usize) -> Result<Vec<LowerLayerGrid>> {
        if size == 0 || size > INTERNAL_GRID_CAP {
            return Err(Error::CapExceeded {
                what: "lower-layer grid size",
                requested: size,
                cap: INTERNAL_GRID_CAP,
            });
        }
        let mut out = Vec::new();
        let mut heights = vec![0usize; size];
        fn rec(col: usize, max: usize, size: usize, heights: &mut Vec<usize>, out: &mut Vec<LowerLayerGrid>) {
            if col == size {
                out.push(LowerLayerGrid {
                    size,
                    heights: heights.clone(),
                });
                return;
            }
            for h in (0..=max).rev() {
                heights[col] = h;
                rec(col + 1, h, size, heights, out);
            }
        }
        rec(0, size, size, &mut heights, &mut out);
        Ok(out)
    }

    /// C(2k, k), the number of order ideals of the k×k grid.
    pub fn count(size: usize) -> u128 {
        binomial(2 * size as u128, size as u128)
    }
}

fn binomial(n: u128, k: u128) -> u128 {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// All downward-closed cell sets of the gridSize×gridSize grid, with the
/// exact count. Exponential in the grid size, capped at 6.
pub fn lower_layers_enumerate(grid_size: usize) -> Result<(u128, Vec<LowerLayerGrid>)> {
    if grid_size > ENUMERATION_GRID_CAP {
        return Err(Error::CapExceeded {
            what: "lower-layer grid size",
            requested: grid_size,
            cap: ENUMERATION_GRID_CAP,
        });
    }
    let all = LowerLayerGrid::enumerate_internal(grid_size)?;
    Ok((all.len() as u128, all))
}

/// `min over U of min over strict supersets V of d_λ(U,V)` on the 2^n grid.
/// Any strict superset adds at least one cell and a single addable cell
/// always exists below the full layer, so the gap is exactly 2^-2n.
pub fn lower_layers_min_gap(n: u32) -> Result<f64> {
    if n > 3 {
        return Err(Error::CapExceeded {
            what: "lower-layer level",
            requested: n as usize,
            cap: 3,
        });
    }
    let size = 1usize << n;
    let all = LowerLayerGrid::enumerate_internal(size)?;
    let cell = 1.0 / (size * size) as f64;
    let mut min_gap = f64::INFINITY;
    for u in &all {
        if u.cell_count() == size * size {
            continue;
        }
        // smallest superset: add one addable cell
        let mut best = f64::INFINITY;
        for col in 0..size {
            let h = u.heights[col];
            let room = h < size && (col == 0 || u.heights[col - 1] > h);
            if room {
                best = best.min(cell);
            }
        }
        debug_assert!(best.is_finite(), "non-full ideal always has an addable cell");
        min_gap = min_gap.min(best);
    }
    Ok(min_gap)
}
