//! Hölder exponent estimators: pointwise, local, C-class (nested pairs),
//! pointwise-continuity, and their deterministic twins computed from the
//! analytic incremental variance.

mod design;
mod kolmogorov;

pub use design::BallDesign;
pub use kolmogorov::{
    diagonal_design, kolmogorov_harness, EscalationStep, KolmogorovReport, VerificationSummary,
};

use crate::error::{Error, Result};
use crate::gaussian::{delta_increment, sample_paths, CovModel, SamplePath};
use crate::geometry::{left_neighbourhood, DyadicLevel, Point, Rect};
use serde::{Deserialize, Serialize};

/// Metric used for balls around the estimation center.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BallMetric {
    Dm,
    Hausdorff,
}

impl BallMetric {
    pub fn dist(&self, u: &Rect, v: &Rect) -> f64 {
        match self {
            BallMetric::Dm => u.d_m(v),
            BallMetric::Hausdorff => u.d_hausdorff(v).unwrap_or(f64::INFINITY),
        }
    }
}

/// Radii, pair budget and metric of a localized estimation design.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ScalePlan {
    /// Strictly decreasing ball radii.
    pub radii: Vec<f64>,
    /// Sets drawn per radius (≥ 16).
    pub pair_budget: usize,
    pub metric: BallMetric,
}

impl ScalePlan {
    pub fn new(radii: Vec<f64>, pair_budget: usize, metric: BallMetric) -> Result<Self> {
        if radii.len() < 2 {
            return Err(Error::invalid("need at least two radii"));
        }
        if radii.windows(2).any(|w| w[1] >= w[0]) || radii.iter().any(|r| *r <= 0.0) {
            return Err(Error::invalid("radii must be positive and strictly decreasing"));
        }
        if pair_budget < 16 {
            return Err(Error::invalid("pair budget must be at least 16"));
        }
        Ok(ScalePlan {
            radii,
            pair_budget,
            metric,
        })
    }

    /// Radii `2^-j` for `j` in `j_min..=j_max`.
    pub fn dyadic(j_min: u32, j_max: u32, pair_budget: usize, metric: BallMetric) -> Result<Self> {
        if j_max <= j_min {
            return Err(Error::invalid("j_max must exceed j_min"));
        }
        let radii = (j_min..=j_max).map(|j| (0.5f64).powi(j as i32)).collect();
        ScalePlan::new(radii, pair_budget, metric)
    }

    /// Default: radii 2^-2 .. 2^-18, budget 40, d_m.
    pub fn default_plan() -> Self {
        ScalePlan::dyadic(2, 18, 40, BallMetric::Dm).expect("valid default")
    }

    pub fn rho_min(&self) -> f64 {
        *self.radii.last().expect("non-empty radii")
    }

    pub fn rho_max(&self) -> f64 {
        self.radii[0]
    }
}

/// Which exponent an [`ExponentReport`] estimates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum ExponentKind {
    Pointwise,
    Local,
    PointwiseC,
    LocalC,
    Pc,
    DetPointwise,
    DetLocal,
    DetPc,
}

/// An estimated exponent with its scale range and regression diagnostics.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExponentReport {
    pub kind: ExponentKind,
    /// Median across replicates (infinite only when `degenerate`).
    pub estimate: f64,
    pub scale_range: (f64, f64),
    pub regression_r2: f64,
    pub pairs_used: usize,
    pub target: Option<f64>,
    pub zero_increments_dropped: usize,
    /// All oscillations vanished (e.g. a constant path); estimate is +∞.
    pub degenerate: bool,
    pub per_replicate: Vec<f64>,
}

fn median(values: &mut [f64]) -> f64 {
    assert!(!values.is_empty());
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Ordinary least squares of y on x; returns (slope, r²).
fn ols(points: &[(f64, f64)]) -> (f64, f64) {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in points {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { (sxy * sxy) / (sxx * syy) };
    (slope, r2)
}

fn ball_members(path: &SamplePath, center: &Rect, rho: f64, metric: BallMetric) -> Vec<usize> {
    path.sets
        .iter()
        .enumerate()
        .filter(|(_, s)| metric.dist(s, center) < rho)
        .map(|(i, _)| i)
        .collect()
}

/// Sampled modulus of continuity: `max |X_U − X_V|` over pairs in
/// `B(center, rho)`, per replicate. `ordered` restricts to nested pairs.
pub fn oscillation(
    path: &SamplePath,
    center: &Rect,
    rho: f64,
    metric: BallMetric,
    ordered: bool,
) -> Result<Vec<f64>> {
    let members = ball_members(path, center, rho, metric);
    if members.len() < 2 {
        return Err(Error::Degenerate(format!(
            "ball of radius {rho} holds {} set(s); need at least 2",
            members.len()
        )));
    }
    if ordered {
        let mut pairs = Vec::new();
        for (a, &i) in members.iter().enumerate() {
            for &j in &members[a + 1..] {
                if path.sets[i].is_subset_of(&path.sets[j])
                    || path.sets[j].is_subset_of(&path.sets[i])
                {
                    pairs.push((i, j));
                }
            }
        }
        Ok(path
            .values
            .iter()
            .map(|row| {
                pairs
                    .iter()
                    .map(|&(i, j)| (row[i] - row[j]).abs())
                    .fold(0.0, f64::max)
            })
            .collect())
    } else {
        // unordered max |x_i − x_j| is the range
        Ok(path
            .values
            .iter()
            .map(|row| {
                let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
                for &i in &members {
                    lo = lo.min(row[i]);
                    hi = hi.max(row[i]);
                }
                hi - lo
            })
            .collect())
    }
}

fn count_pairs(path: &SamplePath, center: &Rect, plan: &ScalePlan, ordered: bool) -> usize {
    plan.radii
        .iter()
        .map(|&rho| {
            let members = ball_members(path, center, rho, plan.metric);
            if ordered {
                let mut c = 0;
                for (a, &i) in members.iter().enumerate() {
                    for &j in &members[a + 1..] {
                        if path.sets[i].is_subset_of(&path.sets[j])
                            || path.sets[j].is_subset_of(&path.sets[i])
                        {
                            c += 1;
                        }
                    }
                }
                c
            } else {
                members.len() * members.len().saturating_sub(1) / 2
            }
        })
        .sum()
}

fn slope_report(
    path: &SamplePath,
    center: &Rect,
    plan: &ScalePlan,
    ordered: bool,
    kind: ExponentKind,
) -> Result<ExponentReport> {
    let osc_by_radius: Vec<Vec<f64>> = plan
        .radii
        .iter()
        .map(|&rho| oscillation(path, center, rho, plan.metric, ordered))
        .collect::<Result<_>>()?;
    let reps = path.replicates();
    let mut slopes = Vec::with_capacity(reps);
    let mut r2s = Vec::with_capacity(reps);
    let mut zero_dropped = 0usize;
    let mut any_nonzero = false;
    for rep in 0..reps {
        let mut pts = Vec::with_capacity(plan.radii.len());
        for (j, &rho) in plan.radii.iter().enumerate() {
            let osc = osc_by_radius[j][rep];
            if osc > 0.0 {
                any_nonzero = true;
                pts.push((rho.ln(), osc.ln()));
            } else {
                zero_dropped += 1;
            }
        }
        if pts.len() >= 4 {
            let (slope, r2) = ols(&pts);
            slopes.push(slope);
            r2s.push(r2);
        }
    }
    if slopes.is_empty() {
        if !any_nonzero {
            return Ok(ExponentReport {
                kind,
                estimate: f64::INFINITY,
                scale_range: (plan.rho_min(), plan.rho_max()),
                regression_r2: 0.0,
                pairs_used: count_pairs(path, center, plan, ordered),
                target: None,
                zero_increments_dropped: zero_dropped,
                degenerate: true,
                per_replicate: Vec::new(),
            });
        }
        return Err(Error::Degenerate(
            "fewer than 4 radii with nonzero oscillation".into(),
        ));
    }
    Ok(ExponentReport {
        kind,
        estimate: median(&mut slopes.clone()),
        scale_range: (plan.rho_min(), plan.rho_max()),
        regression_r2: median(&mut r2s),
        pairs_used: count_pairs(path, center, plan, ordered),
        target: None,
        zero_increments_dropped: zero_dropped,
        degenerate: false,
        per_replicate: slopes,
    })
}

/// Pointwise Hölder exponent: per replicate, the log–log slope of the
/// sampled oscillation against the ball radius; median across replicates.
pub fn estimate_pointwise(
    path: &SamplePath,
    center: &Rect,
    plan: &ScalePlan,
) -> Result<ExponentReport> {
    slope_report(path, center, plan, false, ExponentKind::Pointwise)
}

fn min_ratio_report(
    path: &SamplePath,
    center: &Rect,
    plan: &ScalePlan,
    ordered: bool,
    kind: ExponentKind,
) -> Result<ExponentReport> {
    let rho_min = plan.rho_min();
    // smallest ball holding at least one usable pair
    let mut chosen: Option<(f64, Vec<(usize, usize, f64)>)> = None;
    for &rho in plan.radii.iter().rev() {
        let members = ball_members(path, center, rho, plan.metric);
        let mut pairs = Vec::new();
        for (a, &i) in members.iter().enumerate() {
            for &j in &members[a + 1..] {
                if ordered
                    && !(path.sets[i].is_subset_of(&path.sets[j])
                        || path.sets[j].is_subset_of(&path.sets[i]))
                {
                    continue;
                }
                let d = plan.metric.dist(&path.sets[i], &path.sets[j]);
                if d >= rho_min * 1e-3 && d < 1.0 {
                    pairs.push((i, j, d));
                }
            }
        }
        if !pairs.is_empty() {
            chosen = Some((rho, pairs));
            break;
        }
    }
    let (_, pairs) = chosen.ok_or_else(|| {
        Error::Degenerate("no usable pair in any ball for the local estimator".into())
    })?;
    let mut ratios_med = Vec::with_capacity(path.replicates());
    let mut zero_dropped = 0usize;
    for row in &path.values {
        let mut best = f64::INFINITY;
        for &(i, j, d) in &pairs {
            let dx = (row[i] - row[j]).abs();
            if dx == 0.0 {
                zero_dropped += 1;
                continue;
            }
            best = best.min(dx.ln() / d.ln());
        }
        if best.is_finite() {
            ratios_med.push(best);
        }
    }
    if ratios_med.is_empty() {
        return Ok(ExponentReport {
            kind,
            estimate: f64::INFINITY,
            scale_range: (rho_min, plan.rho_max()),
            regression_r2: 0.0,
            pairs_used: pairs.len(),
            target: None,
            zero_increments_dropped: zero_dropped,
            degenerate: true,
            per_replicate: Vec::new(),
        });
    }
    Ok(ExponentReport {
        kind,
        estimate: median(&mut ratios_med.clone()),
        scale_range: (rho_min, plan.rho_max()),
        regression_r2: 1.0,
        pairs_used: pairs.len(),
        target: None,
        zero_increments_dropped: zero_dropped,
        degenerate: false,
        per_replicate: ratios_med,
    })
}

/// Local Hölder exponent: per replicate, the smallest
/// `log |X_U − X_V| / log d(U,V)` over pairs in the smallest ball, pairs at
/// distance below `ρ_min·1e-3` or with zero increment excluded; median
/// across replicates.
pub fn estimate_local(
    path: &SamplePath,
    center: &Rect,
    plan: &ScalePlan,
) -> Result<ExponentReport> {
    min_ratio_report(path, center, plan, false, ExponentKind::Local)
}

/// Pointwise and local C-exponents via the nested-pair characterization
/// (`U ⊂ V` within the ball).
pub fn estimate_c_exponents(
    path: &SamplePath,
    center: &Rect,
    plan: &ScalePlan,
) -> Result<(ExponentReport, ExponentReport)> {
    let pw = slope_report(path, center, plan, true, ExponentKind::PointwiseC)?;
    let loc = min_ratio_report(path, center, plan, true, ExponentKind::LocalC)?;
    Ok((pw, loc))
}

/// Pointwise-continuity exponent at `t`: per replicate, the slope of
/// `log |ΔX_{C_n(t)}|` against `log m(C_n(t))` over the level range;
/// median across replicates.
pub fn estimate_pc(
    model: &CovModel,
    t: &Point,
    levels: std::ops::RangeInclusive<u32>,
    seed: u64,
    replicates: usize,
) -> Result<ExponentReport> {
    let dim = t.dim();
    let csets: Vec<_> = levels
        .clone()
        .map(|n| left_neighbourhood(t, &DyadicLevel::new(n, dim)?))
        .collect::<Result<_>>()?;
    if csets.len() < 3 {
        return Err(Error::Degenerate("need at least 3 levels".into()));
    }
    let mut family = Vec::new();
    for c in &csets {
        family.extend(c.closure_sets()?);
    }
    let family = crate::gaussian::dedup_rects(family);
    let path = sample_paths(model, &family, seed, replicates)?;
    let mut measures = Vec::with_capacity(csets.len());
    let mut deltas = Vec::with_capacity(csets.len());
    for c in &csets {
        measures.push(c.measure()?);
        deltas.push(delta_increment(&path, c)?);
    }
    let mut slopes = Vec::with_capacity(replicates);
    let mut zero_dropped = 0usize;
    for rep in 0..replicates {
        let mut pts = Vec::with_capacity(csets.len());
        for (lvl, m) in measures.iter().enumerate() {
            let d = deltas[lvl][rep].abs();
            if d > 0.0 && *m > 0.0 {
                pts.push((m.ln(), d.ln()));
            } else {
                zero_dropped += 1;
            }
        }
        if pts.len() < 3 {
            return Err(Error::Degenerate(format!(
                "replicate {rep} kept {} levels; need at least 3",
                pts.len()
            )));
        }
        let (slope, _) = ols(&pts);
        slopes.push(slope);
    }
    Ok(ExponentReport {
        kind: ExponentKind::Pc,
        estimate: median(&mut slopes.clone()),
        scale_range: (
            measures.iter().cloned().fold(f64::INFINITY, f64::min),
            measures.iter().cloned().fold(0.0, f64::max),
        ),
        regression_r2: 1.0,
        pairs_used: csets.len(),
        target: Some(model.pc_target(dim)),
        zero_increments_dropped: zero_dropped,
        degenerate: false,
        per_replicate: slopes,
    })
}

/// Builds, per radius, a pair at `d_m` distance exactly `ρ_j` from the
/// center by sliding one corner coordinate inward.
fn canonical_pairs(center: &Rect, radii: &[f64]) -> Result<Vec<(Rect, f64)>> {
    if center.is_empty() || center.measure() == 0.0 {
        return Err(Error::invalid(
            "deterministic exponents need a center with positive measure",
        ));
    }
    let corner = center.corner();
    radii
        .iter()
        .map(|&rho| {
            for axis in 0..corner.len() {
                let others: f64 = corner
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| *i != axis)
                    .map(|(_, c)| c)
                    .product();
                let delta = rho / others;
                if delta < corner[axis] {
                    let mut c = corner.to_vec();
                    c[axis] -= delta;
                    let moved = Rect::anchored(c)?;
                    let d = center.d_m(&moved);
                    return Ok((moved, d));
                }
            }
            Err(Error::invalid(format!(
                "radius {rho} too large for center {corner:?}"
            )))
        })
        .collect()
}

/// Deterministic pointwise and local exponents from `√ E|X_U − X_V|²`,
/// no randomness: the usual log–log machinery fed with the analytic
/// incremental standard deviation on canonical pairs.
pub fn deterministic_exponents(
    model: &CovModel,
    center: &Rect,
    plan: &ScalePlan,
) -> Result<(ExponentReport, ExponentReport)> {
    if plan.radii.len() < 4 {
        return Err(Error::invalid("need at least 4 radii"));
    }
    let pairs = canonical_pairs(center, &plan.radii)?;
    let mut pts = Vec::with_capacity(pairs.len());
    let mut min_ratio = f64::INFINITY;
    for (&rho, (moved, d)) in plan.radii.iter().zip(&pairs) {
        let sd = model.increment_var(center, moved).sqrt();
        if sd > 0.0 {
            pts.push((rho.ln(), sd.ln()));
            if *d > 0.0 && *d < 1.0 {
                min_ratio = min_ratio.min(sd.ln() / d.ln());
            }
        }
    }
    if pts.len() < 4 {
        return Err(Error::Degenerate(
            "fewer than 4 radii with nonzero deterministic increments".into(),
        ));
    }
    let (slope, r2) = ols(&pts);
    let target = Some(model.holder_target());
    let mk = |kind, estimate, r2| ExponentReport {
        kind,
        estimate,
        scale_range: (plan.rho_min(), plan.rho_max()),
        regression_r2: r2,
        pairs_used: pairs.len(),
        target,
        zero_increments_dropped: 0,
        degenerate: false,
        per_replicate: vec![estimate],
    };
    Ok((
        mk(ExponentKind::DetPointwise, slope, r2),
        mk(ExponentKind::DetLocal, min_ratio, 1.0),
    ))
}

/// Deterministic pointwise-continuity exponent: half the slope of
/// `log E[(ΔX_{C_n(t)})²]` against `log m(C_n(t))`, the variance computed
/// from the full inclusion–exclusion bilinear expansion of the kernel.
pub fn deterministic_pc(
    model: &CovModel,
    t: &Point,
    levels: std::ops::RangeInclusive<u32>,
) -> Result<ExponentReport> {
    let dim = t.dim();
    let mut pts = Vec::new();
    let mut min_m = f64::INFINITY;
    let mut max_m = 0.0f64;
    for n in levels {
        let cset = left_neighbourhood(t, &DyadicLevel::new(n, dim)?)?;
        let var = delta_variance(model, &cset)?;
        let m = cset.measure()?;
        if var > 0.0 && m > 0.0 {
            pts.push((m.ln(), 0.5 * var.ln()));
            min_m = min_m.min(m);
            max_m = max_m.max(m);
        }
    }
    if pts.len() < 3 {
        return Err(Error::Degenerate("need at least 3 usable levels".into()));
    }
    let (slope, r2) = ols(&pts);
    Ok(ExponentReport {
        kind: ExponentKind::DetPc,
        estimate: slope,
        scale_range: (min_m, max_m),
        regression_r2: r2,
        pairs_used: pts.len(),
        target: Some(model.pc_target(dim)),
        zero_increments_dropped: 0,
        degenerate: false,
        per_replicate: vec![slope],
    })
}

/// Exact `E[(ΔX_C)²]` from the analytic kernel: the bilinear expansion
/// `Σ_i Σ_j c_i c_j cov(R_i, R_j)` over the signed closure of `C`
/// (10 terms for N = 2 before collapsing).
pub fn delta_variance(model: &CovModel, cset: &crate::geometry::CSet) -> Result<f64> {
    let closure = cset.signed_closure()?;
    let mut acc = 0.0;
    for (ci, ri) in &closure {
        for (cj, rj) in &closure {
            acc += (*ci as f64) * (*cj as f64) * model.cov(ri, rj);
        }
    }
    Ok(acc)
}

/// Samples a localized ball design around the center and returns the path;
/// convenience wrapper used by the estimation front end.
pub fn sample_ball_design(
    model: &CovModel,
    center: &Rect,
    plan: &ScalePlan,
    seed: u64,
    replicates: usize,
) -> Result<(BallDesign, SamplePath)> {
    let design = BallDesign::build(center, plan, seed)?;
    let path = sample_paths(model, &design.sets, seed.wrapping_add(1), replicates)?;
    Ok((design, path))
}
