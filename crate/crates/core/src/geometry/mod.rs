//! Exact geometry of the rectangle indexing collection of [0,1]^N.
//!
//! Everything here is pure: rectangles `[0,u]`, the increment-index sets
//! `C = U0 \ (V1 ∪ … ∪ Vk)`, the dyadic approximation classes `A_n` with the
//! projection `g_n`, and the two distances `d_m` (measure of the symmetric
//! difference) and `d_H` (Hausdorff).

mod lower_layers;
mod measure;

pub use lower_layers::{lower_layers_enumerate, lower_layers_min_gap, LowerLayerGrid};
pub use measure::{
    measure_union, measure_union_inclusion_exclusion, measure_union_sweep, INCLUSION_EXCLUSION_CAP,
};

use crate::error::{Error, Result};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// A point of [0,1]^N.
#[derive(Clone, Debug, PartialEq)]
pub struct Point(pub Vec<f64>);

impl Point {
    pub fn new(coords: impl Into<Vec<f64>>) -> Result<Self> {
        let coords = coords.into();
        if coords.is_empty() {
            return Err(Error::invalid("a point needs at least one coordinate"));
        }
        if coords.iter().any(|c| !(0.0..=1.0).contains(c)) {
            return Err(Error::invalid(format!(
                "coordinates must lie in [0,1], got {coords:?}"
            )));
        }
        Ok(Point(coords))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }
}

/// A set of the rectangle indexing collection: either `[0, corner]` or `∅`.
///
/// Corners live in [0,1]^N. A corner with some zero coordinate denotes a
/// degenerate (measure-zero) rectangle; such sets arise from grid enumeration
/// and are kept distinct, matching the dyadic subclass cardinality (2^n+1)^N.
#[derive(Clone, Debug)]
pub struct Rect {
    corner: Vec<f64>,
    empty: bool,
}

impl Rect {
    /// The anchored rectangle `[0, corner]`.
    pub fn anchored(corner: impl Into<Vec<f64>>) -> Result<Self> {
        let corner = Point::new(corner)?.0;
        Ok(Rect {
            corner,
            empty: false,
        })
    }

    /// The empty set, tagged with the ambient dimension.
    pub fn empty(dim: usize) -> Self {
        Rect {
            corner: vec![0.0; dim],
            empty: true,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.empty
    }

    pub fn dim(&self) -> usize {
        self.corner.len()
    }

    /// Corner coordinates; meaningless when the rectangle is empty.
    pub fn corner(&self) -> &[f64] {
        &self.corner
    }

    /// Lebesgue measure: the product of the corner coordinates.
    pub fn measure(&self) -> f64 {
        if self.empty {
            0.0
        } else {
            self.corner.iter().product()
        }
    }

    pub fn intersect(&self, other: &Rect) -> Rect {
        if self.empty || other.empty {
            return Rect::empty(self.dim().max(other.dim()));
        }
        let corner = self
            .corner
            .iter()
            .zip(&other.corner)
            .map(|(a, b)| a.min(*b))
            .collect();
        Rect {
            corner,
            empty: false,
        }
    }

    /// Set inclusion. The empty set is contained in everything.
    pub fn is_subset_of(&self, other: &Rect) -> bool {
        if self.empty {
            return true;
        }
        if other.empty {
            return false;
        }
        self.corner
            .iter()
            .zip(&other.corner)
            .all(|(a, b)| a <= b)
    }

    pub fn contains_point(&self, p: &[f64]) -> bool {
        !self.empty
            && p.len() == self.dim()
            && p.iter().zip(&self.corner).all(|(x, c)| *x >= 0.0 && x <= c)
    }

    /// `d_m(U,V) = m(U △ V) = m(U) + m(V) − 2 m(U ∩ V)`.
    ///
    /// A pseudo-distance: distinct degenerate rectangles are at distance 0.
    /// `d_m(∅, U) = m(U)`.
    pub fn d_m(&self, other: &Rect) -> f64 {
        self.measure() + other.measure() - 2.0 * self.intersect(other).measure()
    }

    /// Hausdorff distance between anchored rectangles under the sup metric:
    /// `max_i |u_i − v_i|`. Undefined (an error) when either set is empty.
    pub fn d_hausdorff(&self, other: &Rect) -> Result<f64> {
        if self.empty || other.empty {
            return Err(Error::EmptyHausdorff);
        }
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                left: self.dim(),
                right: other.dim(),
            });
        }
        Ok(self
            .corner
            .iter()
            .zip(&other.corner)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }

    /// The smallest level-`n` dyadic rectangle containing `self`
    /// (componentwise ceiling of the corner; dyadic corners are fixed points).
    /// `g_n(∅) = ∅`.
    pub fn g_n(&self, level: &DyadicLevel) -> Rect {
        if self.empty {
            return self.clone();
        }
        let scale = level.points_per_axis() as f64 - 1.0; // 2^n
        let corner = self
            .corner
            .iter()
            .map(|c| (c * scale).ceil() / scale)
            .collect();
        Rect {
            corner,
            empty: false,
        }
    }

    /// Canonical ordering/equality key (corner bits; coordinates are
    /// non-negative so bit order agrees with numeric order).
    pub(crate) fn key(&self) -> RectKey {
        RectKey {
            empty: self.empty,
            bits: if self.empty {
                Vec::new()
            } else {
                self.corner.iter().map(|c| c.to_bits()).collect()
            },
        }
    }
}

impl PartialEq for Rect {
    fn eq(&self, other: &Self) -> bool {
        if self.empty || other.empty {
            return self.empty && other.empty;
        }
        self.corner == other.corner
    }
}

impl Eq for Rect {}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub(crate) struct RectKey {
    empty: bool,
    bits: Vec<u64>,
}

/// Renders a dyadic rational in [0,1] as its exact finite decimal expansion.
/// Returns `None` for non-dyadic values or depths beyond 2^-30.
pub fn dyadic_decimal(x: f64) -> Option<String> {
    if !(0.0..=1.0).contains(&x) {
        return None;
    }
    let scaled = x * (1u64 << 30) as f64;
    if scaled.fract() != 0.0 {
        return None;
    }
    let mut k = scaled as u64;
    let mut n = 30u32;
    while n > 0 && k % 2 == 0 {
        k /= 2;
        n -= 1;
    }
    if n == 0 {
        return Some(k.to_string());
    }
    let mut v: u128 = k as u128;
    for _ in 0..n {
        v *= 5;
    }
    let digits = n as usize;
    let s = v.to_string();
    Some(if s.len() <= digits {
        format!("0.{}{}", "0".repeat(digits - s.len()), s)
    } else {
        format!("{}.{}", &s[..s.len() - digits], &s[s.len() - digits..])
    })
}

fn serialize_coord<S: Serializer>(x: f64, ser: S) -> std::result::Result<S::Ok, S::Error> {
    match dyadic_decimal(x) {
        Some(s) => ser.serialize_str(&s),
        None => ser.serialize_f64(x),
    }
}

struct Coord(f64);

impl<'de> Deserialize<'de> for Coord {
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Str(String),
        }
        match Raw::deserialize(de)? {
            Raw::Num(x) => Ok(Coord(x)),
            Raw::Str(s) => s
                .parse::<f64>()
                .map(Coord)
                .map_err(|e| D::Error::custom(format!("bad coordinate {s:?}: {e}"))),
        }
    }
}

impl Serialize for Rect {
    fn serialize<S: Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let mut map = ser.serialize_map(Some(1))?;
        if self.empty {
            map.serialize_entry("empty", &true)?;
        } else {
            struct Corner<'a>(&'a [f64]);
            impl Serialize for Corner<'_> {
                fn serialize<S: Serializer>(
                    &self,
                    ser: S,
                ) -> std::result::Result<S::Ok, S::Error> {
                    use serde::ser::SerializeSeq;
                    let mut seq = ser.serialize_seq(Some(self.0.len()))?;
                    for &x in self.0 {
                        struct One(f64);
                        impl Serialize for One {
                            fn serialize<S: Serializer>(
                                &self,
                                ser: S,
                            ) -> std::result::Result<S::Ok, S::Error> {
                                serialize_coord(self.0, ser)
                            }
                        }
                        seq.serialize_element(&One(x))?;
                    }
                    seq.end()
                }
            }
            map.serialize_entry("corner", &Corner(&self.corner))?;
        }
        map.end()
    }
}

impl<'de> Deserialize<'de> for Rect {
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            #[serde(default)]
            corner: Option<Vec<Coord>>,
            #[serde(default)]
            empty: Option<bool>,
            #[serde(default)]
            dim: Option<usize>,
        }
        let raw = Raw::deserialize(de)?;
        if raw.empty == Some(true) {
            return Ok(Rect::empty(raw.dim.unwrap_or(1)));
        }
        let corner = raw
            .corner
            .ok_or_else(|| D::Error::custom("rect needs a corner or empty:true"))?;
        Rect::anchored(corner.into_iter().map(|c| c.0).collect::<Vec<_>>())
            .map_err(|e| D::Error::custom(e.to_string()))
    }
}

/// A set of the class C: `base \ (subtracted_1 ∪ … ∪ subtracted_k)`.
///
/// The representation is not canonical; all consumers go through the signed
/// closure, which collapses equivalent representations to identical
/// coefficient maps (so equal representations give bit-identical results).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CSet {
    pub base: Rect,
    #[serde(rename = "sub")]
    pub subtracted: Vec<Rect>,
}

impl CSet {
    pub fn new(base: Rect, subtracted: Vec<Rect>) -> Result<Self> {
        let dim = base.dim();
        if subtracted.iter().any(|r| r.dim() != dim) {
            return Err(Error::DimensionMismatch {
                left: dim,
                right: subtracted.iter().map(Rect::dim).find(|d| *d != dim).unwrap_or(dim),
            });
        }
        Ok(CSet { base, subtracted })
    }

    pub fn dim(&self) -> usize {
        self.base.dim()
    }

    /// Inclusion–exclusion expansion `Σ_S (−1)^{|S|} X_{base ∩ ⋂_{i∈S} V_i}`
    /// collapsed to integer coefficients per distinct rectangle, in canonical
    /// corner order. Terms cancelled by duplicate or nested subtracted sets
    /// drop out exactly.
    pub fn signed_closure(&self) -> Result<Vec<(i64, Rect)>> {
        let k = self.subtracted.len();
        if k > INCLUSION_EXCLUSION_CAP {
            return Err(Error::CapExceeded {
                what: "inclusion-exclusion subtracted sets",
                requested: k,
                cap: INCLUSION_EXCLUSION_CAP,
            });
        }
        let mut coefs: std::collections::BTreeMap<RectKey, (i64, Rect)> =
            std::collections::BTreeMap::new();
        for mask in 0u32..(1u32 << k) {
            let mut rect = self.base.clone();
            for (i, v) in self.subtracted.iter().enumerate() {
                if mask >> i & 1 == 1 {
                    rect = rect.intersect(v);
                }
            }
            let sign = if mask.count_ones() % 2 == 0 { 1 } else { -1 };
            let entry = coefs.entry(rect.key()).or_insert((0, rect));
            entry.0 += sign;
        }
        Ok(coefs
            .into_values()
            .filter(|(c, _)| *c != 0)
            .collect())
    }

    /// The distinct rectangles a Gaussian vector must contain so that the
    /// increment over this set can be evaluated.
    pub fn closure_sets(&self) -> Result<Vec<Rect>> {
        Ok(self.signed_closure()?.into_iter().map(|(_, r)| r).collect())
    }

    /// Exact Lebesgue measure, invariant under the representation.
    pub fn measure(&self) -> Result<f64> {
        Ok(self
            .signed_closure()?
            .iter()
            .map(|(c, r)| *c as f64 * r.measure())
            .sum())
    }

    pub fn contains_point(&self, p: &[f64]) -> bool {
        self.base.contains_point(p) && !self.subtracted.iter().any(|v| v.contains_point(p))
    }
}

/// The dyadic subclass A_n of the rectangle collection: corners on the
/// 2^-n grid. Cardinality (2^n + 1)^N, the empty set counted separately.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DyadicLevel {
    pub n: u32,
    pub dim: usize,
}

impl DyadicLevel {
    pub fn new(n: u32, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("dimension must be at least 1"));
        }
        if n > 40 {
            return Err(Error::invalid(format!("dyadic level {n} too deep")));
        }
        Ok(DyadicLevel { n, dim })
    }

    pub fn step(&self) -> f64 {
        (0.5f64).powi(self.n as i32)
    }

    pub fn points_per_axis(&self) -> u64 {
        (1u64 << self.n) + 1
    }

    /// k_n = (2^n + 1)^N, None on overflow.
    pub fn cardinality(&self) -> Option<u64> {
        self.points_per_axis().checked_pow(self.dim as u32)
    }
}

pub const ENUMERATION_CAP: usize = 2_000_000;

/// All rectangles of A_n (corners on the 2^-n grid, lexicographic order),
/// preceded by the empty set. Length = (2^n+1)^N + 1.
pub fn enumerate_an(level: &DyadicLevel) -> Result<Vec<Rect>> {
    let per_axis = level.points_per_axis();
    let total = level.cardinality().ok_or_else(|| Error::CapExceeded {
        what: "dyadic subclass cardinality",
        requested: usize::MAX,
        cap: ENUMERATION_CAP,
    })?;
    if total as usize > ENUMERATION_CAP {
        return Err(Error::CapExceeded {
            what: "dyadic subclass cardinality",
            requested: total as usize,
            cap: ENUMERATION_CAP,
        });
    }
    let step = level.step();
    let mut out = Vec::with_capacity(total as usize + 1);
    out.push(Rect::empty(level.dim));
    let mut idx = vec![0u64; level.dim];
    loop {
        let corner: Vec<f64> = idx.iter().map(|&i| i as f64 * step).collect();
        out.push(Rect {
            corner,
            empty: false,
        });
        let mut axis = level.dim;
        loop {
            if axis == 0 {
                return Ok(out);
            }
            axis -= 1;
            idx[axis] += 1;
            if idx[axis] < per_axis {
                break;
            }
            idx[axis] = 0;
        }
    }
}

/// The left neighbourhood `C_n(t)` of `A_t` in the dyadic subclass A_n:
/// the base corner rounds each coordinate up to the grid (fixed when already
/// dyadic) and each of the N subtracted rectangles steps one coordinate down
/// one grid unit. `t ∈ C_n(t)` and `m(C_n(t)) = 2^-nN`.
pub fn left_neighbourhood(t: &Point, level: &DyadicLevel) -> Result<CSet> {
    if t.dim() != level.dim {
        return Err(Error::DimensionMismatch {
            left: t.dim(),
            right: level.dim,
        });
    }
    if t.0.iter().any(|x| *x <= 0.0 || *x >= 1.0) {
        return Err(Error::invalid(format!(
            "left neighbourhood needs t in the open cube (0,1)^N, got {:?}",
            t.0
        )));
    }
    let scale = (1u64 << level.n) as f64;
    let mut upper = Vec::with_capacity(t.dim());
    let mut lower = Vec::with_capacity(t.dim());
    for &x in &t.0 {
        let s = x * scale;
        if s.fract() == 0.0 {
            upper.push(x);
            lower.push((s - 1.0) / scale);
        } else {
            upper.push((s + 1.0).floor() / scale);
            lower.push(s.floor() / scale);
        }
    }
    let base = Rect {
        corner: upper.clone(),
        empty: false,
    };
    let subtracted = (0..t.dim())
        .map(|k| {
            let mut corner = upper.clone();
            corner[k] = lower[k];
            Rect {
                corner,
                empty: false,
            }
        })
        .collect();
    CSet::new(base, subtracted)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rect(c: &[f64]) -> Rect {
        Rect::anchored(c.to_vec()).unwrap()
    }

    #[test]
    fn rect_measure_examples() {
        assert_eq!(rect(&[0.5, 0.5]).measure(), 0.25);
        assert_eq!(Rect::empty(2).measure(), 0.0);
        assert_eq!(rect(&[1.0, 1.0, 1.0]).measure(), 1.0);
    }

    #[test]
    fn rect_intersect_examples() {
        assert_eq!(
            rect(&[0.5, 1.0]).intersect(&rect(&[1.0, 0.5])),
            rect(&[0.5, 0.5])
        );
        let u = rect(&[0.3, 0.8]);
        assert_eq!(u.intersect(&u), u);
        assert!(u.intersect(&Rect::empty(2)).is_empty());
    }

    #[test]
    fn d_m_examples() {
        assert_eq!(rect(&[1.0, 1.0]).d_m(&rect(&[0.5, 1.0])), 0.5);
        let u = rect(&[0.3, 0.8]);
        assert_eq!(u.d_m(&u), 0.0);
        assert!((rect(&[0.5, 0.5]).d_m(&rect(&[0.75, 0.25])) - 0.1875).abs() < 1e-15);
        // d_m(∅, U) = m(U)
        assert_eq!(Rect::empty(2).d_m(&rect(&[0.5, 0.5])), 0.25);
    }

    #[test]
    fn d_hausdorff_examples() {
        assert_eq!(rect(&[1.0, 1.0]).d_hausdorff(&rect(&[0.5, 1.0])).unwrap(), 0.5);
        let u = rect(&[0.3, 0.8]);
        assert_eq!(u.d_hausdorff(&u).unwrap(), 0.0);
        assert!((rect(&[0.3, 0.8]).d_hausdorff(&rect(&[0.5, 0.7])).unwrap() - 0.2).abs() < 1e-15);
        assert!(matches!(
            Rect::empty(2).d_hausdorff(&u),
            Err(Error::EmptyHausdorff)
        ));
    }

    #[test]
    fn g_n_examples() {
        let level = DyadicLevel::new(2, 2).unwrap();
        assert_eq!(rect(&[0.3, 0.6]).g_n(&level), rect(&[0.5, 0.75]));
        // dyadic corners are fixed points
        assert_eq!(rect(&[0.5, 0.75]).g_n(&level), rect(&[0.5, 0.75]));
    }

    #[test]
    fn enumerate_an_cardinalities() {
        let a = enumerate_an(&DyadicLevel::new(1, 1).unwrap()).unwrap();
        assert_eq!(a.len(), 4); // ∅, [0,0], [0,0.5], [0,1]
        assert!(a[0].is_empty());
        assert_eq!(a[1], rect(&[0.0]));
        assert_eq!(a[3], rect(&[1.0]));
        let a2 = enumerate_an(&DyadicLevel::new(1, 2).unwrap()).unwrap();
        assert_eq!(a2.len() - 1, 9);
        let a3 = enumerate_an(&DyadicLevel::new(3, 2).unwrap()).unwrap();
        assert_eq!(a3.len() - 1, 81);
    }

    #[test]
    fn left_neighbourhood_mixed_dyadic_example() {
        let level = DyadicLevel::new(2, 2).unwrap();
        let c = left_neighbourhood(&Point::new(vec![0.5, 0.3]).unwrap(), &level).unwrap();
        assert_eq!(c.base, rect(&[0.5, 0.5]));
        assert_eq!(c.subtracted, vec![rect(&[0.25, 0.5]), rect(&[0.5, 0.25])]);
        assert!((c.measure().unwrap() - 0.0625).abs() < 1e-15);
        assert!(c.contains_point(&[0.5, 0.3]));
    }

    #[test]
    fn left_neighbourhood_rejects_boundary() {
        let level = DyadicLevel::new(2, 2).unwrap();
        assert!(left_neighbourhood(&Point(vec![0.0, 0.5]), &level).is_err());
        assert!(left_neighbourhood(&Point(vec![0.5, 1.0]), &level).is_err());
    }

    #[test]
    fn cset_measure_examples() {
        let c = CSet::new(
            rect(&[0.5, 0.5]),
            vec![rect(&[0.25, 0.5]), rect(&[0.5, 0.25])],
        )
        .unwrap();
        assert!((c.measure().unwrap() - 0.0625).abs() < 1e-15);
        let u = rect(&[0.7, 0.4]);
        assert_eq!(
            CSet::new(u.clone(), vec![u.clone()]).unwrap().measure().unwrap(),
            0.0
        );
        assert_eq!(
            CSet::new(u.clone(), vec![]).unwrap().measure().unwrap(),
            u.measure()
        );
    }

    #[test]
    fn rect_json_uses_exact_dyadic_strings() {
        let r = rect(&[0.5, 0.375]);
        let json = serde_json::to_string(&r).unwrap();
        assert_eq!(json, r#"{"corner":["0.5","0.375"]}"#);
        let back: Rect = serde_json::from_str(&json).unwrap();
        assert_eq!(back, r);
        let e = serde_json::to_string(&Rect::empty(2)).unwrap();
        assert_eq!(e, r#"{"empty":true}"#);
        // non-dyadic coordinates stay numeric and round-trip
        let r2 = rect(&[0.3, 0.7]);
        let back2: Rect = serde_json::from_str(&serde_json::to_string(&r2).unwrap()).unwrap();
        assert_eq!(back2, r2);
    }

    #[test]
    fn dyadic_decimal_is_exact() {
        assert_eq!(dyadic_decimal(0.375).unwrap(), "0.375");
        assert_eq!(dyadic_decimal(1.0).unwrap(), "1");
        assert_eq!(dyadic_decimal(0.0).unwrap(), "0");
        assert_eq!(dyadic_decimal(2f64.powi(-10)).unwrap(), "0.0009765625");
        assert!(dyadic_decimal(0.3).is_none());
        for s in ["0.375", "0.0009765625"] {
            assert_eq!(s.parse::<f64>().unwrap(), dyadic_decimal(s.parse().unwrap()).unwrap().parse::<f64>().unwrap());
        }
    }
}
