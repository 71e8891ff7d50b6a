//! Exact Lebesgue measure of finite unions of anchored rectangles.
//!
//! Two independent routes: inclusion–exclusion over componentwise-min
//! intersections (exact, 2^k terms, small k) and a coordinate-compression
//! sweep (any k). They agree to machine precision and cross-check each other.

use super::{Rect, RectKey};
use crate::error::{Error, Result};
use std::collections::BTreeMap;

/// Hard limit on the inclusion–exclusion path (2^k terms).
pub const INCLUSION_EXCLUSION_CAP: usize = 24;

/// Exact measure of `∪ rects`, dispatching on the collection size.
pub fn measure_union(rects: &[Rect]) -> Result<f64> {
    let live: Vec<&Rect> = rects.iter().filter(|r| !r.is_empty()).collect();
    if live.len() <= 12 {
        measure_union_inclusion_exclusion(rects)
    } else {
        measure_union_sweep(rects)
    }
}

/// Inclusion–exclusion: `m(∪U_i) = Σ_{∅≠S} (−1)^{|S|+1} m(⋂S)`.
///
/// Terms are collapsed to integer coefficients per distinct intersection
/// rectangle and summed in canonical order, so equivalent inputs (duplicates,
/// permutations, redundant members) give bit-identical output.
pub fn measure_union_inclusion_exclusion(rects: &[Rect]) -> Result<f64> {
    let live: Vec<&Rect> = rects.iter().filter(|r| !r.is_empty()).collect();
    check_dims(&live)?;
    let k = live.len();
    if k == 0 {
        return Ok(0.0);
    }
    if k > INCLUSION_EXCLUSION_CAP {
        return Err(Error::CapExceeded {
            what: "inclusion-exclusion union size",
            requested: k,
            cap: INCLUSION_EXCLUSION_CAP,
        });
    }
    let mut coefs: BTreeMap<RectKey, (i64, f64)> = BTreeMap::new();
    for mask in 1u32..(1u32 << k) {
        let mut rect: Option<Rect> = None;
        for (i, r) in live.iter().enumerate() {
            if mask >> i & 1 == 1 {
                rect = Some(match rect {
                    None => (*r).clone(),
                    Some(acc) => acc.intersect(r),
                });
            }
        }
        let rect = rect.expect("mask is nonzero");
        let sign = if mask.count_ones() % 2 == 1 { 1 } else { -1 };
        let entry = coefs.entry(rect.key()).or_insert((0, rect.measure()));
        entry.0 += sign;
    }
    Ok(coefs.values().map(|(c, m)| *c as f64 * m).sum())
}

/// Coordinate-compression sweep: distinct corner values per axis cut the
/// union into boxes; a box is covered iff some rectangle dominates its upper
/// corner. Exact for any collection size.
pub fn measure_union_sweep(rects: &[Rect]) -> Result<f64> {
    let live: Vec<&Rect> = rects.iter().filter(|r| !r.is_empty()).collect();
    check_dims(&live)?;
    if live.is_empty() {
        return Ok(0.0);
    }
    let dim = live[0].dim();
    let mut cuts: Vec<Vec<f64>> = vec![Vec::new(); dim];
    for axis in 0..dim {
        let mut vals: Vec<f64> = live.iter().map(|r| r.corner()[axis]).collect();
        vals.push(0.0);
        vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
        vals.dedup();
        cuts[axis] = vals;
    }
    let cells_per_axis: Vec<usize> = cuts.iter().map(|c| c.len() - 1).collect();
    let total: usize = cells_per_axis.iter().product();
    if total > 50_000_000 {
        return Err(Error::CapExceeded {
            what: "sweep cell count",
            requested: total,
            cap: 50_000_000,
        });
    }
    if total == 0 {
        return Ok(0.0);
    }
    let mut sum = 0.0;
    let mut idx = vec![0usize; dim];
    'outer: loop {
        let covered = live.iter().any(|r| {
            (0..dim).all(|axis| cuts[axis][idx[axis] + 1] <= r.corner()[axis])
        });
        if covered {
            let vol: f64 = (0..dim)
                .map(|axis| cuts[axis][idx[axis] + 1] - cuts[axis][idx[axis]])
                .product();
            sum += vol;
        }
        let mut axis = dim;
        loop {
            if axis == 0 {
                break 'outer;
            }
            axis -= 1;
            idx[axis] += 1;
            if idx[axis] < cells_per_axis[axis] {
                break;
            }
            idx[axis] = 0;
        }
    }
    Ok(sum)
}

fn check_dims(live: &[&Rect]) -> Result<()> {
    if let Some(first) = live.first() {
        for r in live.iter().skip(1) {
            if r.dim() != first.dim() {
                return Err(Error::DimensionMismatch {
                    left: first.dim(),
                    right: r.dim(),
                });
            }
        }
    }
    Ok(())
}
