//! Joint Gaussian sampling over finite rectangle families and the
//! inclusion–exclusion increments ΔX.

use super::{build_cov_matrix, psd_factorize, CovModel};
use crate::error::{Error, Result};
use crate::geometry::{CSet, Rect};
use crate::rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::io::{Read, Write};

/// Magic bytes of the compact binary layout.
pub const BINARY_MAGIC: &[u8; 5] = b"SIDX1";

/// A jointly Gaussian realization of the model over a finite family of sets.
///
/// `values[r][i]` is replicate `r` at `sets[i]`. Fully determined by
/// `(model, sets, seed)`; replicates are independent.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SamplePath {
    pub sets: Vec<Rect>,
    pub values: Vec<Vec<f64>>,
    pub seed: u64,
    pub model: CovModel,
    /// Jitter the PSD repair ladder applied to the covariance, if any.
    pub jitter_applied: f64,
    /// Negative eigenvalues clipped during factorization.
    pub clipped_eigs: usize,
}

impl SamplePath {
    pub fn replicates(&self) -> usize {
        self.values.len()
    }

    fn index_of(&self, rect: &Rect) -> Option<usize> {
        self.sets.iter().position(|s| s == rect)
    }
}

/// Samples `replicates` independent realizations of the centered Gaussian
/// vector with the model's covariance over `sets`.
///
/// Replicate `r` is `L z_r` where `L` comes from the PSD repair ladder and
/// `z_r[j] = normal(seed, r, j)`, so output is independent of evaluation
/// order and identical across runs and thread counts.
pub fn sample_paths(
    model: &CovModel,
    sets: &[Rect],
    seed: u64,
    replicates: usize,
) -> Result<SamplePath> {
    if sets.is_empty() {
        return Ok(SamplePath {
            sets: Vec::new(),
            values: vec![Vec::new(); replicates],
            seed,
            model: *model,
            jitter_applied: 0.0,
            clipped_eigs: 0,
        });
    }
    let cov = build_cov_matrix(model, sets)?;
    let factor = psd_factorize(&cov)?;
    let n = sets.len();
    let lower = &factor.lower;
    let values: Vec<Vec<f64>> = (0..replicates)
        .into_par_iter()
        .map(|rep| {
            let z: Vec<f64> = (0..n)
                .map(|j| rng::normal(seed, rep as u64, j as u64))
                .collect();
            (0..n)
                .map(|i| {
                    // L is lower triangular: row i uses z[0..=i]
                    let mut acc = 0.0;
                    for j in 0..=i {
                        acc += lower[(i, j)] * z[j];
                    }
                    acc
                })
                .collect()
        })
        .collect();
    Ok(SamplePath {
        sets: sets.to_vec(),
        values,
        seed,
        model: *model,
        jitter_applied: factor.jitter_applied,
        clipped_eigs: factor.clipped_eigs,
    })
}

/// The increment `ΔX_C` per replicate, via the inclusion–exclusion formula.
///
/// Every rectangle of the expansion must already be present in `path.sets`;
/// the caller registers the closure up front (see [`CSet::closure_sets`]).
pub fn delta_increment(path: &SamplePath, cset: &CSet) -> Result<Vec<f64>> {
    let closure = cset.signed_closure()?;
    let mut terms = Vec::with_capacity(closure.len());
    for (coef, rect) in &closure {
        if rect.is_empty() {
            continue; // X_∅ = 0
        }
        let idx = path.index_of(rect).ok_or_else(|| Error::MissingSet {
            rect_json: serde_json::to_string(rect).unwrap_or_default(),
        })?;
        terms.push((*coef as f64, idx));
    }
    Ok(path
        .values
        .iter()
        .map(|row| terms.iter().map(|(c, i)| c * row[*i]).sum())
        .collect())
}

/// Signed inclusion–exclusion expansion of `ΔX_{U_1 ∪ … ∪ U_p}`:
/// coefficient `(−1)^(|S|+1)` on each nonempty intersection, collapsed per
/// distinct rectangle in canonical order.
fn union_signed_closure(rects: &[Rect]) -> Result<Vec<(i64, Rect)>> {
    let live: Vec<&Rect> = rects.iter().filter(|r| !r.is_empty()).collect();
    let p = live.len();
    if p > crate::geometry::INCLUSION_EXCLUSION_CAP {
        return Err(Error::CapExceeded {
            what: "union inclusion-exclusion size",
            requested: p,
            cap: crate::geometry::INCLUSION_EXCLUSION_CAP,
        });
    }
    let mut coefs: std::collections::BTreeMap<crate::geometry::RectKey, (i64, Rect)> =
        Default::default();
    for mask in 1u32..(1u32 << p) {
        let mut rect: Option<Rect> = None;
        for (i, r) in live.iter().enumerate() {
            if mask >> i & 1 == 1 {
                rect = Some(match rect {
                    None => (*r).clone(),
                    Some(acc) => acc.intersect(r),
                });
            }
        }
        let rect = rect.expect("nonzero mask");
        let sign = if mask.count_ones() % 2 == 1 { 1 } else { -1 };
        let entry = coefs.entry(rect.key()).or_insert((0, rect));
        entry.0 += sign;
    }
    Ok(coefs.into_values().filter(|(c, _)| *c != 0).collect())
}

/// Rectangles needed to evaluate `ΔX` over a finite union.
pub fn union_closure_sets(rects: &[Rect]) -> Result<Vec<Rect>> {
    Ok(union_signed_closure(rects)?
        .into_iter()
        .map(|(_, r)| r)
        .collect())
}

/// `ΔX_{U_1 ∪ … ∪ U_p}` per replicate; all intersection rectangles must be
/// registered in the path.
pub fn delta_union(path: &SamplePath, rects: &[Rect]) -> Result<Vec<f64>> {
    let closure = union_signed_closure(rects)?;
    let mut terms = Vec::with_capacity(closure.len());
    for (coef, rect) in &closure {
        if rect.is_empty() {
            continue;
        }
        let idx = path.index_of(rect).ok_or_else(|| Error::MissingSet {
            rect_json: serde_json::to_string(rect).unwrap_or_default(),
        })?;
        terms.push((*coef as f64, idx));
    }
    Ok(path
        .values
        .iter()
        .map(|row| terms.iter().map(|(c, i)| c * row[*i]).sum())
        .collect())
}

impl SamplePath {
    /// CSV: one row per replicate, one column per set, header = set JSON.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let header: Vec<String> = self
            .sets
            .iter()
            .map(|s| serde_json::to_string(s).unwrap_or_default())
            .collect();
        w.write_record(&header)?;
        for row in &self.values {
            w.write_record(row.iter().map(|v| format!("{v:?}")))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(input: R, seed: u64, model: CovModel) -> Result<SamplePath> {
        let mut r = csv::ReaderBuilder::new()
            .has_headers(true)
            .comment(Some(b'#'))
            .from_reader(input);
        let sets: Vec<Rect> = r
            .headers()?
            .iter()
            .map(serde_json::from_str)
            .collect::<std::result::Result<_, _>>()?;
        let mut values = Vec::new();
        for record in r.records() {
            let record = record?;
            let row: Vec<f64> = record
                .iter()
                .map(|v| {
                    v.parse::<f64>()
                        .map_err(|e| Error::invalid(format!("bad value {v:?}: {e}")))
                })
                .collect::<Result<_>>()?;
            if row.len() != sets.len() {
                return Err(Error::invalid(format!(
                    "row has {} values for {} sets",
                    row.len(),
                    sets.len()
                )));
            }
            values.push(row);
        }
        Ok(SamplePath {
            sets,
            values,
            seed,
            model,
            jitter_applied: 0.0,
            clipped_eigs: 0,
        })
    }

    /// Compact binary layout: magic "SIDX1", u8 version, u64 seed, model tag,
    /// set corners and replicate-major values, all little-endian 64-bit.
    pub fn write_binary<W: Write>(&self, mut out: W) -> Result<()> {
        out.write_all(BINARY_MAGIC)?;
        out.write_all(&[1u8])?;
        out.write_all(&self.seed.to_le_bytes())?;
        let (tag, p1, p2) = match self.model {
            CovModel::Sibm => (0u8, 0.0, 0.0),
            CovModel::Sifbm { hurst } => (1u8, hurst, 0.0),
            CovModel::Siou { sigma, gamma } => (2u8, sigma, gamma),
        };
        out.write_all(&[tag])?;
        out.write_all(&p1.to_le_bytes())?;
        out.write_all(&p2.to_le_bytes())?;
        out.write_all(&(self.sets.len() as u64).to_le_bytes())?;
        out.write_all(&(self.values.len() as u64).to_le_bytes())?;
        let dim = self.sets.first().map_or(0, Rect::dim) as u64;
        out.write_all(&dim.to_le_bytes())?;
        for s in &self.sets {
            out.write_all(&[u8::from(s.is_empty())])?;
            for &c in s.corner() {
                out.write_all(&c.to_le_bytes())?;
            }
        }
        for row in &self.values {
            for &v in row {
                out.write_all(&v.to_le_bytes())?;
            }
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(mut input: R) -> Result<SamplePath> {
        let mut magic = [0u8; 5];
        input.read_exact(&mut magic)?;
        if &magic != BINARY_MAGIC {
            return Err(Error::invalid("bad magic: not a SIDX1 file"));
        }
        let mut b1 = [0u8; 1];
        input.read_exact(&mut b1)?;
        if b1[0] != 1 {
            return Err(Error::invalid(format!("unsupported version {}", b1[0])));
        }
        let seed = read_u64(&mut input)?;
        input.read_exact(&mut b1)?;
        let p1 = read_f64(&mut input)?;
        let p2 = read_f64(&mut input)?;
        let model = match b1[0] {
            0 => CovModel::Sibm,
            1 => CovModel::sifbm(p1)?,
            2 => CovModel::siou(p1, p2)?,
            t => return Err(Error::invalid(format!("unknown model tag {t}"))),
        };
        let n_sets = read_u64(&mut input)? as usize;
        let n_reps = read_u64(&mut input)? as usize;
        let dim = read_u64(&mut input)? as usize;
        let mut sets = Vec::with_capacity(n_sets);
        for _ in 0..n_sets {
            input.read_exact(&mut b1)?;
            let mut corner = Vec::with_capacity(dim);
            for _ in 0..dim {
                corner.push(read_f64(&mut input)?);
            }
            sets.push(if b1[0] == 1 {
                Rect::empty(dim)
            } else {
                Rect::anchored(corner)?
            });
        }
        let mut values = Vec::with_capacity(n_reps);
        for _ in 0..n_reps {
            let mut row = Vec::with_capacity(n_sets);
            for _ in 0..n_sets {
                row.push(read_f64(&mut input)?);
            }
            values.push(row);
        }
        Ok(SamplePath {
            sets,
            values,
            seed,
            model,
            jitter_applied: 0.0,
            clipped_eigs: 0,
        })
    }
}

fn read_u64<R: Read>(r: &mut R) -> Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

fn read_f64<R: Read>(r: &mut R) -> Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}

/// Empirical covariance of two registered sets across replicates.
pub fn empirical_cov(path: &SamplePath, i: usize, j: usize) -> f64 {
    let r = path.values.len() as f64;
    let mut acc = 0.0;
    for row in &path.values {
        acc += row[i] * row[j];
    }
    acc / r
}

/// Deduplicates rectangles, preserving first-seen order.
pub fn dedup_rects(rects: impl IntoIterator<Item = Rect>) -> Vec<Rect> {
    let mut seen: HashMap<String, ()> = HashMap::new();
    let mut out = Vec::new();
    for r in rects {
        let key = serde_json::to_string(&r).unwrap_or_default();
        if seen.insert(key, ()).is_none() {
            out.push(r);
        }
    }
    out
}
