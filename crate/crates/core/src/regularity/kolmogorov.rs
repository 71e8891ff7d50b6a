//! Moment-scaling fit and path verification for the continuity criterion.
//!
//! For a centered Gaussian process, `E|X_U − X_V|^α = M_{α/2} (E|X_U − X_V|²)^{α/2}`
//! with `M_p = (2p−1)!!`, so the fitted exponent `s` in
//! `E|X_U − X_V|^α ≈ K d^s` obeys `s = αH` for SIfBm. The criterion applies
//! when `β = s − q > 0`, and paths are then locally γ-Hölder for
//! `γ ∈ (0, β/α)`; the harness verifies sampled paths at requested γ values.

use crate::error::{Error, Result};
use crate::gaussian::{sample_paths, CovModel};
use crate::geometry::Rect;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EscalationStep {
    pub alpha: u32,
    pub fitted_s: f64,
    pub beta: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VerificationSummary {
    pub gamma: f64,
    /// Hölder constant allowed in the search for (L, h*).
    pub l_bound: f64,
    pub replicates: usize,
    /// Fraction of replicates where a finite (L ≤ l_bound, h*) exists.
    pub pass_fraction: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct KolmogorovReport {
    pub model: CovModel,
    pub q: f64,
    /// Final, possibly escalated, even moment order.
    pub alpha: u32,
    pub fitted_s: f64,
    pub fit_r2: f64,
    pub beta: f64,
    /// Upper end of the admissible range (0, β/α); 0 when inapplicable.
    pub gamma_upper: f64,
    pub applicable: bool,
    pub inapplicable_reason: Option<String>,
    pub escalations: Vec<EscalationStep>,
    pub verification: Vec<VerificationSummary>,
}

const L_BOUND: f64 = 10.0;
const ALPHA_CAP: u32 = 64;

/// Gaussian absolute moment coefficient for even α = 2p: (2p−1)!!.
fn double_factorial_odd(p: u32) -> f64 {
    let mut acc = 1.0;
    let mut k = 1u64;
    for _ in 0..p {
        acc *= (2 * k - 1) as f64;
        k += 1;
    }
    // (2p-1)!! = 1·3·…·(2p−1); the loop above multiplies p odd factors
    acc
}

/// Fits `E|X_U − X_V|^α ≈ K d^s` over the design pairs, escalating α until
/// `β = s − q > 0` (or the cap), then samples paths and reports the fraction
/// of replicates admitting a finite Hölder pair (L ≤ 10, h*) at each γ of
/// `verification_gammas` (default: half the admissible bound).
pub fn kolmogorov_harness(
    model: &CovModel,
    q: f64,
    alpha: u32,
    design: &[Rect],
    verification_gammas: &[f64],
    seed: u64,
    replicates: usize,
) -> Result<KolmogorovReport> {
    if alpha == 0 || alpha % 2 != 0 {
        return Err(Error::invalid("alpha must be a positive even integer"));
    }
    if q <= 0.0 {
        return Err(Error::invalid("q must be positive"));
    }
    let mut pairs = Vec::new();
    for i in 0..design.len() {
        for j in i + 1..design.len() {
            let d = design[i].d_m(&design[j]);
            if d > 0.0 {
                pairs.push((i, j, d));
            }
        }
    }
    if pairs.len() < 8 {
        return Err(Error::Degenerate("need at least 8 positive-distance pairs".into()));
    }
    let dmin = pairs.iter().map(|p| p.2).fold(f64::INFINITY, f64::min);
    let dmax = pairs.iter().map(|p| p.2).fold(0.0f64, f64::max);
    if dmax / dmin < 8.0 {
        return Err(Error::invalid(format!(
            "pair distances must span at least 3 dyadic decades (got ratio {:.3})",
            dmax / dmin
        )));
    }

    let fit = |a: u32| -> (f64, f64) {
        let m_p = double_factorial_odd(a / 2);
        let pts: Vec<(f64, f64)> = pairs
            .iter()
            .filter_map(|&(i, j, d)| {
                let var = model.increment_var(&design[i], &design[j]);
                (var > 0.0).then(|| (d.ln(), (m_p * var.powf(a as f64 / 2.0)).ln()))
            })
            .collect();
        super::ols(&pts)
    };

    let mut escalations = Vec::new();
    let mut a = alpha;
    let (mut s, mut r2) = fit(a);
    escalations.push(EscalationStep {
        alpha: a,
        fitted_s: s,
        beta: s - q,
    });
    while s - q <= 0.0 && a < ALPHA_CAP {
        a *= 2;
        let (s2, r22) = fit(a);
        s = s2;
        r2 = r22;
        escalations.push(EscalationStep {
            alpha: a,
            fitted_s: s,
            beta: s - q,
        });
    }
    let beta = s - q;
    let applicable = beta > 0.0;

    let mut verification = Vec::new();
    if applicable && replicates > 0 {
        let default_gamma = [0.5 * beta / a as f64];
        let gammas = if verification_gammas.is_empty() {
            &default_gamma[..]
        } else {
            verification_gammas
        };
        let path = sample_paths(model, design, seed, replicates)?;
        for &gamma in gammas {
            let mut passes = 0usize;
            for row in &path.values {
                // h*: the smallest failing distance; success if some pair
                // lies strictly below it.
                let mut h_star = f64::INFINITY;
                for &(i, j, d) in &pairs {
                    if (row[i] - row[j]).abs() > L_BOUND * d.powf(gamma) {
                        h_star = h_star.min(d);
                    }
                }
                if h_star > dmin {
                    passes += 1;
                }
            }
            verification.push(VerificationSummary {
                gamma,
                l_bound: L_BOUND,
                replicates,
                pass_fraction: passes as f64 / replicates as f64,
            });
        }
    }

    Ok(KolmogorovReport {
        model: *model,
        q,
        alpha: a,
        fitted_s: s,
        fit_r2: r2,
        beta,
        gamma_upper: if applicable { beta / a as f64 } else { 0.0 },
        applicable,
        inapplicable_reason: (!applicable)
            .then(|| format!("beta = {beta:.6} <= 0 at alpha = {a}: criterion inapplicable at this q")),
        escalations,
        verification,
    })
}

/// A dyadic chain design along the diagonal: distances span the requested
/// dyadic decades around the anchor corner.
pub fn diagonal_design(dim: usize, j_min: u32, j_max: u32) -> Result<Vec<Rect>> {
    if j_max <= j_min {
        return Err(Error::invalid("j_max must exceed j_min"));
    }
    let mut sets = vec![Rect::anchored(vec![0.9; dim])?];
    for j in j_min..=j_max {
        let rho = (0.5f64).powi(j as i32);
        for frac in [1.0, 0.5] {
            let mut corner = vec![0.9; dim];
            // shift the first coordinate so d_m steps through the decades
            let others: f64 = corner[1..].iter().product();
            corner[0] -= rho * frac / others;
            sets.push(Rect::anchored(corner)?);
        }
    }
    Ok(sets)
}
