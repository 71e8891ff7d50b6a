//! PSD factorization with a repair ladder.
//!
//! SIfBm kernels at H < 1/2 on near-duplicate sets are numerically
//! semidefinite; plain Cholesky then fails. The ladder: try Cholesky, add
//! jitter εI with ε escalating ×10 from 1e-12 to 1e-6, then clip negative
//! eigenvalues and refactorize. Everything done is recorded.

use crate::error::{Error, Result};
use nalgebra::DMatrix;

#[derive(Clone, Debug)]
pub struct PsdFactor {
    /// Lower-triangular factor with `L Lᵀ ≈ A + jitter·I` (after clipping,
    /// of the clipped matrix).
    pub lower: DMatrix<f64>,
    pub jitter_applied: f64,
    pub clipped_eigs: usize,
}

const JITTER_START: f64 = 1e-12;
const JITTER_MAX: f64 = 1e-6;

pub fn psd_factorize(matrix: &DMatrix<f64>) -> Result<PsdFactor> {
    if matrix.nrows() != matrix.ncols() {
        return Err(Error::Numeric(format!(
            "matrix is {}x{}, not square",
            matrix.nrows(),
            matrix.ncols()
        )));
    }
    let n = matrix.nrows();
    if n == 0 {
        return Ok(PsdFactor {
            lower: DMatrix::zeros(0, 0),
            jitter_applied: 0.0,
            clipped_eigs: 0,
        });
    }
    let scale = matrix.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    let asym = (matrix - matrix.transpose())
        .iter()
        .fold(0.0f64, |a, x| a.max(x.abs()));
    if asym > 1e-10 * scale.max(1.0) {
        return Err(Error::Numeric(format!(
            "matrix is not symmetric (max asymmetry {asym:e})"
        )));
    }
    if matrix.iter().any(|x| !x.is_finite()) {
        return Err(Error::Numeric("matrix has non-finite entries".into()));
    }

    if let Some(f) = try_jitter_ladder(matrix) {
        return Ok(f);
    }

    // Eigenvalue clipping fallback.
    let eig = matrix.clone().symmetric_eigen();
    let clipped = eig.eigenvalues.iter().filter(|&&l| l < 0.0).count();
    let mut vals = eig.eigenvalues.clone();
    for l in vals.iter_mut() {
        if *l < 0.0 {
            *l = 0.0;
        }
    }
    let rebuilt = &eig.eigenvectors
        * DMatrix::from_diagonal(&vals)
        * eig.eigenvectors.transpose();
    let rebuilt = 0.5 * (&rebuilt + rebuilt.transpose());
    match try_jitter_ladder(&rebuilt) {
        Some(mut f) => {
            f.clipped_eigs = clipped;
            Ok(f)
        }
        None => Err(Error::Numeric(
            "factorization failed even after eigenvalue clipping".into(),
        )),
    }
}

fn try_jitter_ladder(matrix: &DMatrix<f64>) -> Option<PsdFactor> {
    if let Some(ch) = nalgebra::Cholesky::new(matrix.clone()) {
        return Some(PsdFactor {
            lower: ch.unpack(),
            jitter_applied: 0.0,
            clipped_eigs: 0,
        });
    }
    let n = matrix.nrows();
    let mut eps = JITTER_START;
    while eps <= JITTER_MAX * (1.0 + 1e-9) {
        let jittered = matrix + DMatrix::identity(n, n) * eps;
        if let Some(ch) = nalgebra::Cholesky::new(jittered) {
            return Some(PsdFactor {
                lower: ch.unpack(),
                jitter_applied: eps,
                clipped_eigs: 0,
            });
        }
        eps *= 10.0;
    }
    None
}
