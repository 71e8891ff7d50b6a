//! Localized sampling design: per radius, dyadic neighbours of the center
//! at the radius-matched grid level plus uniform random corners inside the
//! ball. Keeps the jointly sampled Gaussian vector small (the exponent
//! definitions are local; a full grid at depth would be infeasible).

use super::{BallMetric, ScalePlan};
use crate::error::{Error, Result};
use crate::geometry::{DyadicLevel, Rect};
use crate::rng;

/// Hard cap on the number of design sets.
pub const DESIGN_SET_CAP: usize = 2000;

#[derive(Clone, Debug)]
pub struct BallDesign {
    pub center: Rect,
    pub metric: BallMetric,
    pub radii: Vec<f64>,
    /// All design sets; `sets[0]` is the center.
    pub sets: Vec<Rect>,
}

impl BallDesign {
    pub fn build(center: &Rect, plan: &ScalePlan, seed: u64) -> Result<BallDesign> {
        if center.is_empty() || center.measure() == 0.0 {
            return Err(Error::invalid(
                "ball designs need a center with positive measure",
            ));
        }
        let dim = center.dim();
        let c = center.corner();
        let mut sets = vec![center.clone()];
        let mut seen = std::collections::HashSet::new();
        seen.insert(center.key());
        let mut counter = 0u64;
        let mut next = |salt: u64| {
            counter += 1;
            rng::uniform(seed, salt, counter)
        };
        for (j, &rho) in plan.radii.iter().enumerate() {
            let level_n = ((dim as f64 / rho).log2().ceil() as i64).clamp(1, 40) as u32;
            let level = DyadicLevel::new(level_n, dim)?;
            let step = level.step();
            let g = center.g_n(&level);
            let mut accepted = 0usize;
            let mut tries = 0usize;
            while accepted < plan.pair_budget && tries < 40 * plan.pair_budget {
                tries += 1;
                let corner: Vec<f64> = if tries % 2 == 0 {
                    // dyadic neighbour of g_n(center)
                    (0..dim)
                        .map(|i| {
                            let off = (next(2 * j as u64) * 5.0).floor() as i64 - 2; // -2..=2
                            g.corner()[i] + off as f64 * step
                        })
                        .collect()
                } else {
                    // uniform corner in the ball, coordinate scale matched
                    (0..dim)
                        .map(|i| {
                            let others: f64 = (0..dim)
                                .filter(|k| *k != i)
                                .map(|k| c[k])
                                .product::<f64>()
                                .max(1e-9);
                            let delta = (2.0 * next(2 * j as u64 + 1) - 1.0) * 1.5 * rho;
                            c[i] + delta / others
                        })
                        .collect()
                };
                if corner.iter().any(|x| !(*x > 0.0 && *x <= 1.0)) {
                    continue;
                }
                let cand = Rect::anchored(corner)?;
                if plan.metric.dist(&cand, center) >= rho {
                    continue;
                }
                if seen.insert(cand.key()) {
                    sets.push(cand);
                    accepted += 1;
                    if sets.len() >= DESIGN_SET_CAP {
                        return Ok(BallDesign {
                            center: center.clone(),
                            metric: plan.metric,
                            radii: plan.radii.clone(),
                            sets,
                        });
                    }
                }
            }
            if accepted < 2 {
                return Err(Error::Degenerate(format!(
                    "could not place sets inside the ball of radius {rho}"
                )));
            }
        }
        Ok(BallDesign {
            center: center.clone(),
            metric: plan.metric,
            radii: plan.radii.clone(),
            sets,
        })
    }
}
