//! Adaptive unboundedness demonstration.
//!
//! Partition [0,1]×[0,h] into k equal vertical strips. Brownian increments
//! over the strips are iid N(0, h/k), so the adaptively selected union
//! C(ω) = {strips with positive increment} has measure ≈ h/2 < h while
//! W_C = Σ Z_i⁺ has mean k·√(h/k)/√(2π) = √(kh/(2π)), which grows without
//! bound in k. |ΔX| over the class C is therefore not controlled by m(C).

use crate::error::{Error, Result};
use crate::rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct UnboundedDemoReport {
    pub strip_height: f64,
    pub cells: usize,
    pub replicates: usize,
    pub seed: u64,
    /// Mean over replicates of `W_C(ω) = Σ positive increments`.
    pub mean_w_c: f64,
    /// Mean over replicates of `λ(C(ω))`.
    pub mean_lambda_c: f64,
    /// `E[W_C] = √(kh/(2π))`.
    pub theoretical_mean: f64,
}

/// Runs the demonstration for the region `[0,1]×[0,h]` cut into `cells`
/// strips. `cells` must be a power of two so strip walls are dyadic.
pub fn demo_unbounded(
    h: f64,
    cells: usize,
    seed: u64,
    replicates: usize,
) -> Result<UnboundedDemoReport> {
    if !(0.0 < h && h < 1.0) {
        return Err(Error::invalid(format!("h must lie in (0,1), got {h}")));
    }
    if cells == 0 || !cells.is_power_of_two() {
        return Err(Error::invalid(format!(
            "cell count must be a power of 2, got {cells}"
        )));
    }
    if replicates == 0 {
        return Err(Error::invalid("need at least one replicate"));
    }
    let sigma = (h / cells as f64).sqrt();
    let per_rep: Vec<(f64, f64)> = (0..replicates)
        .into_par_iter()
        .map(|rep| {
            let mut w = 0.0;
            let mut positive = 0usize;
            for i in 0..cells {
                let z = sigma * rng::normal(seed, rep as u64, i as u64);
                if z > 0.0 {
                    w += z;
                    positive += 1;
                }
            }
            (w, positive as f64 / cells as f64 * h)
        })
        .collect();
    let n = replicates as f64;
    Ok(UnboundedDemoReport {
        strip_height: h,
        cells,
        replicates,
        seed,
        mean_w_c: per_rep.iter().map(|(w, _)| w).sum::<f64>() / n,
        mean_lambda_c: per_rep.iter().map(|(_, l)| l).sum::<f64>() / n,
        theoretical_mean: (cells as f64 * h / (2.0 * std::f64::consts::PI)).sqrt(),
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GrowthRow {
    pub cells: usize,
    pub mean_w_c: f64,
    pub theoretical_mean: f64,
}

/// Mean of `W_C` across a geometric range of cell counts; the means grow
/// like `√k` with slope `√(h/(2π))`.
pub fn demo_unbounded_growth(
    h: f64,
    cell_counts: &[usize],
    seed: u64,
    replicates: usize,
) -> Result<Vec<GrowthRow>> {
    cell_counts
        .iter()
        .enumerate()
        .map(|(i, &k)| {
            let rep = demo_unbounded(h, k, seed.wrapping_add(i as u64), replicates)?;
            Ok(GrowthRow {
                cells: k,
                mean_w_c: rep.mean_w_c,
                theoretical_mean: rep.theoretical_mean,
            })
        })
        .collect()
}
