//! Analytic covariance kernels over the rectangle collection, exact increment
//! variances, joint Gaussian sampling and inclusion–exclusion increments.

mod demo;
mod factor;
mod path;

pub use demo::{demo_unbounded, demo_unbounded_growth, GrowthRow, UnboundedDemoReport};
pub use factor::{psd_factorize, PsdFactor};
pub use path::{
    dedup_rects, delta_increment, delta_union, empirical_cov, sample_paths, union_closure_sets,
    SamplePath, BINARY_MAGIC,
};

use crate::error::{Error, Result};
use crate::geometry::Rect;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

/// Default cap on the size of a jointly sampled Gaussian vector.
pub const COV_MATRIX_CAP: usize = 4096;

/// Covariance kernel of a centered set-indexed Gaussian process.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum CovModel {
    /// Set-indexed Brownian motion: `cov(U,V) = m(U ∩ V)`.
    Sibm,
    /// Set-indexed fractional Brownian motion, `H ∈ (0, 1/2]`:
    /// `cov(U,V) = (m(U)^2H + m(V)^2H − m(U △ V)^2H) / 2`.
    Sifbm { hurst: f64 },
    /// Stationary set-indexed Ornstein–Uhlenbeck process:
    /// `cov(U,V) = σ²/(2γ) · exp(−γ m(U △ V))`.
    Siou { sigma: f64, gamma: f64 },
}

impl CovModel {
    pub fn sibm() -> Self {
        CovModel::Sibm
    }

    pub fn sifbm(hurst: f64) -> Result<Self> {
        if !(hurst > 0.0 && hurst <= 0.5) {
            return Err(Error::invalid(format!(
                "H must lie in (0, 0.5], got {hurst}"
            )));
        }
        Ok(CovModel::Sifbm { hurst })
    }

    pub fn siou(sigma: f64, gamma: f64) -> Result<Self> {
        if sigma <= 0.0 || gamma <= 0.0 {
            return Err(Error::invalid(format!(
                "sigma and gamma must be positive, got sigma={sigma}, gamma={gamma}"
            )));
        }
        Ok(CovModel::Siou { sigma, gamma })
    }

    /// `E[X_U X_V]`.
    pub fn cov(&self, u: &Rect, v: &Rect) -> f64 {
        match *self {
            CovModel::Sibm => u.intersect(v).measure(),
            CovModel::Sifbm { hurst } => {
                let h2 = 2.0 * hurst;
                0.5 * (u.measure().powf(h2) + v.measure().powf(h2) - u.d_m(v).powf(h2))
            }
            CovModel::Siou { sigma, gamma } => {
                sigma * sigma / (2.0 * gamma) * (-gamma * u.d_m(v)).exp()
            }
        }
    }

    /// `E|X_U − X_V|²` in closed form.
    pub fn increment_var(&self, u: &Rect, v: &Rect) -> f64 {
        self.increment_var_at(u.d_m(v))
    }

    /// Increment variance as a function of `d_m(U, V)`.
    pub fn increment_var_at(&self, d: f64) -> f64 {
        match *self {
            CovModel::Sibm => d,
            CovModel::Sifbm { hurst } => d.powf(2.0 * hurst),
            CovModel::Siou { sigma, gamma } => sigma * sigma / gamma * (-(-gamma * d).exp_m1()),
        }
    }

    /// The a.s. pointwise/local Hölder exponent of the model over the
    /// rectangles under `d_m`, when known.
    pub fn holder_target(&self) -> f64 {
        match *self {
            CovModel::Sibm => 0.5,
            CovModel::Sifbm { hurst } => hurst,
            CovModel::Siou { .. } => 0.5,
        }
    }

    /// The deterministic pointwise-continuity exponent over the rectangles
    /// of [0,1]^dim, read off the exact kernel: SIBM and SIOU increments over
    /// `C_n(t)` have variance of order `m(C_n(t))`, while the SIfBm variance
    /// for H < 1/2 is of order `2^-2nH = m(C_n(t))^(H/dim)`.
    pub fn pc_target(&self, dim: usize) -> f64 {
        match *self {
            CovModel::Sibm => 0.5,
            CovModel::Siou { .. } => 0.5,
            CovModel::Sifbm { hurst } => {
                if (hurst - 0.5).abs() < 1e-12 {
                    0.5
                } else {
                    hurst / dim as f64
                }
            }
        }
    }

    pub fn label(&self) -> String {
        match *self {
            CovModel::Sibm => "sibm".into(),
            CovModel::Sifbm { hurst } => format!("sifbm(H={hurst})"),
            CovModel::Siou { sigma, gamma } => format!("siou(sigma={sigma},gamma={gamma})"),
        }
    }
}

/// Dense covariance matrix of the model over a finite family of sets.
pub fn build_cov_matrix(model: &CovModel, sets: &[Rect]) -> Result<DMatrix<f64>> {
    build_cov_matrix_capped(model, sets, COV_MATRIX_CAP)
}

pub fn build_cov_matrix_capped(
    model: &CovModel,
    sets: &[Rect],
    cap: usize,
) -> Result<DMatrix<f64>> {
    if sets.len() > cap {
        return Err(Error::CapExceeded {
            what: "covariance matrix size",
            requested: sets.len(),
            cap,
        });
    }
    let n = sets.len();
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let c = model.cov(&sets[i], &sets[j]);
            m[(i, j)] = c;
            m[(j, i)] = c;
        }
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    fn rect(c: &[f64]) -> Rect {
        Rect::anchored(c.to_vec()).unwrap()
    }

    fn random_rect(seed: u64, idx: u64) -> Rect {
        rect(&[
            0.05 + 0.95 * rng::uniform(seed, 1, 2 * idx),
            0.05 + 0.95 * rng::uniform(seed, 1, 2 * idx + 1),
        ])
    }

    #[test]
    fn sifbm_diagonal_and_sibm_reduction() {
        let m = CovModel::sifbm(0.3).unwrap();
        let u = rect(&[0.4, 0.9]);
        assert!((m.cov(&u, &u) - u.measure().powf(0.6)).abs() < 1e-15);
        // H = 1/2 collapses to the SIBM kernel on random pairs
        let half = CovModel::sifbm(0.5).unwrap();
        let bm = CovModel::sibm();
        for i in 0..1000u64 {
            let u = random_rect(5, 2 * i);
            let v = random_rect(5, 2 * i + 1);
            assert!((half.cov(&u, &v) - bm.cov(&u, &v)).abs() < 1e-12);
        }
    }

    #[test]
    fn siou_diagonal() {
        let m = CovModel::siou(1.5, 2.0).unwrap();
        let u = rect(&[0.4, 0.9]);
        assert!((m.cov(&u, &u) - 1.5 * 1.5 / 4.0).abs() < 1e-15);
    }

    #[test]
    fn increment_var_examples() {
        let fbm = CovModel::sifbm(0.3).unwrap();
        assert!((fbm.increment_var_at(0.25) - 0.25f64.powf(0.6)).abs() < 1e-15);
        assert!((fbm.increment_var_at(0.25) - 0.435_275_281_648_062).abs() < 1e-12);
        let ou = CovModel::siou(1.0, 1.0).unwrap();
        assert!((ou.increment_var_at(0.1) - (1.0 - (-0.1f64).exp())).abs() < 1e-15);
        for model in [fbm, ou, CovModel::sibm()] {
            let u = rect(&[0.4, 0.7]);
            assert_eq!(model.increment_var(&u, &u), 0.0);
        }
    }

    #[test]
    fn increment_var_consistent_with_cov() {
        let models = [
            CovModel::sibm(),
            CovModel::sifbm(0.2).unwrap(),
            CovModel::sifbm(0.5).unwrap(),
            CovModel::siou(0.7, 1.3).unwrap(),
        ];
        for model in models {
            for i in 0..1000u64 {
                let u = random_rect(11, 2 * i);
                let v = random_rect(11, 2 * i + 1);
                let direct = model.increment_var(&u, &v);
                let via_cov = model.cov(&u, &u) + model.cov(&v, &v) - 2.0 * model.cov(&u, &v);
                assert!(
                    (direct - via_cov).abs() < 1e-12,
                    "{model:?}: {direct} vs {via_cov}"
                );
            }
        }
    }

    #[test]
    fn cov_matrix_shapes() {
        let m = CovModel::sifbm(0.4).unwrap();
        let u = rect(&[0.5, 0.5]);
        let single = build_cov_matrix(&m, std::slice::from_ref(&u)).unwrap();
        assert_eq!(single.nrows(), 1);
        assert!((single[(0, 0)] - 0.25f64.powf(0.8)).abs() < 1e-15);

        // SIBM over a nested chain has cov m(U_min(i,j))
        let chain = vec![rect(&[0.2, 0.2]), rect(&[0.5, 0.5]), rect(&[0.9, 0.9])];
        let bm = build_cov_matrix(&CovModel::sibm(), &chain).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let expect = chain[i.min(j)].measure();
                assert!((bm[(i, j)] - expect).abs() < 1e-15);
            }
        }
        let too_many = vec![u; 5];
        assert!(build_cov_matrix_capped(&m, &too_many, 4).is_err());
    }

    #[test]
    fn sifbm_matrices_are_near_psd() {
        // minimum eigenvalue ≥ -1e-8 · trace on random families
        for &h in &[0.2, 0.35, 0.5] {
            let model = CovModel::sifbm(h).unwrap();
            let sets: Vec<Rect> = (0..200).map(|i| random_rect(31 + h.to_bits(), i)).collect();
            let m = build_cov_matrix(&model, &sets).unwrap();
            let eigs = m.clone().symmetric_eigenvalues();
            let min = eigs.iter().cloned().fold(f64::INFINITY, f64::min);
            assert!(min >= -1e-8 * m.trace(), "H={h}: min eig {min}");
        }
    }
}
