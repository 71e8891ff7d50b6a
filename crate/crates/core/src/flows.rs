//! Flows through the rectangle collection and the m-standard projection.
//!
//! An elementary flow is an increasing path t ↦ [0, corner(t)] with
//! piecewise-linear corners. Parametrized by θ(t) = m(f(t)), the projection
//! X^{f,m}_t = ΔX_{f∘θ⁻¹(t)} of a set-indexed process is a one-parameter
//! process; for SIfBm it is a fractional Brownian motion.

use crate::error::{Error, Result};
use crate::gaussian::CovModel;
use crate::geometry::{measure_union, Rect};
use serde::{Deserialize, Serialize};

/// A continuous increasing path through the rectangles, breakpoint corners
/// interpolated componentwise-linearly.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ElementaryFlow {
    breakpoints: Vec<Breakpoint>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Breakpoint {
    pub t: f64,
    pub corner: Vec<f64>,
}

impl ElementaryFlow {
    pub fn new(breakpoints: Vec<(f64, Vec<f64>)>) -> Result<Self> {
        if breakpoints.len() < 2 {
            return Err(Error::invalid("a flow needs at least two breakpoints"));
        }
        let dim = breakpoints[0].1.len();
        for w in breakpoints.windows(2) {
            if w[1].0 <= w[0].0 {
                return Err(Error::invalid("breakpoint times must increase strictly"));
            }
            if w[0].1.len() != dim || w[1].1.len() != dim {
                return Err(Error::DimensionMismatch {
                    left: dim,
                    right: w[1].1.len(),
                });
            }
            if w[0].1.iter().zip(&w[1].1).any(|(a, b)| b < a) {
                return Err(Error::invalid(
                    "corners must be componentwise non-decreasing along the flow",
                ));
            }
        }
        for (_, c) in &breakpoints {
            if c.iter().any(|x| !(0.0..=1.0).contains(x)) {
                return Err(Error::invalid("flow corners must lie in [0,1]^N"));
            }
        }
        Ok(ElementaryFlow {
            breakpoints: breakpoints
                .into_iter()
                .map(|(t, corner)| Breakpoint { t, corner })
                .collect(),
        })
    }

    /// The flow `t ↦ [0, (t, 1, …, 1)]` on [0,1]: θ is the identity.
    pub fn axis_linear(dim: usize) -> Self {
        let mut start = vec![0.0; dim];
        let mut end = vec![1.0; dim];
        for x in start.iter_mut().skip(1) {
            *x = 1.0;
        }
        for x in end.iter_mut() {
            *x = 1.0;
        }
        ElementaryFlow::new(vec![(0.0, start), (1.0, end)]).expect("valid by construction")
    }

    pub fn dim(&self) -> usize {
        self.breakpoints[0].corner.len()
    }

    pub fn domain(&self) -> (f64, f64) {
        (
            self.breakpoints[0].t,
            self.breakpoints[self.breakpoints.len() - 1].t,
        )
    }

    fn corner_at(&self, t: f64) -> Result<Vec<f64>> {
        let (a, b) = self.domain();
        if !(a..=b).contains(&t) {
            return Err(Error::invalid(format!("t={t} outside flow domain [{a},{b}]")));
        }
        let idx = match self
            .breakpoints
            .iter()
            .position(|bp| bp.t >= t)
        {
            Some(0) => return Ok(self.breakpoints[0].corner.clone()),
            Some(i) => i,
            None => unreachable!("t is within the domain"),
        };
        let lo = &self.breakpoints[idx - 1];
        let hi = &self.breakpoints[idx];
        let lambda = (t - lo.t) / (hi.t - lo.t);
        Ok(lo
            .corner
            .iter()
            .zip(&hi.corner)
            .map(|(x, y)| x + lambda * (y - x))
            .collect())
    }

    pub fn rect_at(&self, t: f64) -> Result<Rect> {
        Rect::anchored(self.corner_at(t)?)
    }

    /// θ(t) = m(f(t)); non-decreasing on the domain.
    pub fn theta(&self, t: f64) -> Result<f64> {
        Ok(self.corner_at(t)?.iter().product())
    }

    pub fn theta_range(&self) -> (f64, f64) {
        let (a, b) = self.domain();
        (
            self.theta(a).expect("domain endpoint"),
            self.theta(b).expect("domain endpoint"),
        )
    }

    /// Right inverse of θ: the earliest t with θ(t) ≥ s, so a flat stretch
    /// of θ maps to its left endpoint. Bisection plus Newton polishing;
    /// exact at breakpoints.
    pub fn theta_inverse(&self, s: f64) -> Result<f64> {
        let (s_lo, s_hi) = self.theta_range();
        let slack = 1e-12 * s_hi.abs().max(1.0);
        if s < s_lo - slack || s > s_hi + slack {
            return Err(Error::invalid(format!(
                "s={s} outside the θ-range [{s_lo},{s_hi}]"
            )));
        }
        let s = s.clamp(s_lo, s_hi);
        // first breakpoint already at or past s
        let idx = self
            .breakpoints
            .iter()
            .position(|bp| self.theta(bp.t).expect("breakpoint in domain") >= s)
            .expect("s is within the θ-range");
        if idx == 0 {
            return Ok(self.breakpoints[0].t);
        }
        let (mut lo, mut hi) = (self.breakpoints[idx - 1].t, self.breakpoints[idx].t);
        // bisection: invariant θ(lo) < s ≤ θ(hi)
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.theta(mid)? >= s {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        // Newton polish from the right end keeps θ(t) ≥ s
        let mut t = hi;
        for _ in 0..4 {
            let f = self.theta(t)? - s;
            let df = self.theta_derivative(t)?;
            if df <= 0.0 {
                break;
            }
            let next = t - f / df;
            if next.is_finite() && next >= lo && next <= hi {
                t = if self.theta(next)? >= s { next } else { t };
            }
        }
        Ok(t)
    }

    fn theta_derivative(&self, t: f64) -> Result<f64> {
        let (a, b) = self.domain();
        let t_clamped = t.clamp(a, b);
        let idx = self
            .breakpoints
            .iter()
            .position(|bp| bp.t >= t_clamped)
            .unwrap_or(self.breakpoints.len() - 1)
            .max(1);
        let lo = &self.breakpoints[idx - 1];
        let hi = &self.breakpoints[idx];
        let corner = self.corner_at(t_clamped)?;
        let mut acc = 0.0;
        for i in 0..corner.len() {
            let slope = (hi.corner[i] - lo.corner[i]) / (hi.t - lo.t);
            let mut others = 1.0;
            for (j, c) in corner.iter().enumerate() {
                if j != i {
                    others *= c;
                }
            }
            acc += slope * others;
        }
        Ok(acc)
    }

    /// The rectangles `f∘θ⁻¹(t)` for the requested θ-times; sampling X on
    /// them realizes the m-standard projection.
    pub fn projected_sets(&self, times: &[f64]) -> Result<Vec<Rect>> {
        times
            .iter()
            .map(|&s| self.rect_at(self.theta_inverse(s)?))
            .collect()
    }

    /// Covariance of the projected process at θ-times (s, t).
    pub fn projected_cov(&self, model: &CovModel, s: f64, t: f64) -> Result<f64> {
        let u = self.rect_at(self.theta_inverse(s)?)?;
        let v = self.rect_at(self.theta_inverse(t)?)?;
        Ok(model.cov(&u, &v))
    }
}

/// Covariance of one-parameter fractional Brownian motion.
pub fn fbm_cov(hurst: f64, s: f64, t: f64) -> f64 {
    debug_assert!(hurst > 0.0 && hurst < 1.0);
    debug_assert!(s >= 0.0 && t >= 0.0);
    let h2 = 2.0 * hurst;
    0.5 * (s.powf(h2) + t.powf(h2) - (t - s).abs().powf(h2))
}

/// A chain of elementary flows with accumulated unions:
/// on segment i, `f(s) = f_i(s) ∪ ⋃_{j<i} f_j(end_j)`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SimpleFlow {
    segments: Vec<ElementaryFlow>,
}

impl SimpleFlow {
    pub fn new(segments: Vec<ElementaryFlow>) -> Result<Self> {
        if segments.is_empty() {
            return Err(Error::invalid("a simple flow needs at least one segment"));
        }
        for w in segments.windows(2) {
            let (_, prev_end) = w[0].domain();
            let (next_start, _) = w[1].domain();
            if (prev_end - next_start).abs() > 1e-12 {
                return Err(Error::invalid(
                    "segment domains must chain end-to-start",
                ));
            }
        }
        let flow = SimpleFlow { segments };
        // θ-continuity at the joints: the incoming segment start must add
        // no measure beyond the accumulated union.
        for i in 1..flow.segments.len() {
            let (start, _) = flow.segments[i].domain();
            let before = flow.theta_in_segment(i - 1, flow.segments[i - 1].domain().1)?;
            let after = flow.theta_in_segment(i, start)?;
            if (before - after).abs() > 1e-12 {
                return Err(Error::invalid(format!(
                    "θ jumps from {before} to {after} at segment {i}"
                )));
            }
        }
        Ok(flow)
    }

    pub fn segments(&self) -> &[ElementaryFlow] {
        &self.segments
    }

    pub fn domain(&self) -> (f64, f64) {
        (
            self.segments[0].domain().0,
            self.segments[self.segments.len() - 1].domain().1,
        )
    }

    fn segment_index(&self, t: f64) -> Result<usize> {
        let (a, b) = self.domain();
        if !(a..=b).contains(&t) {
            return Err(Error::invalid(format!("t={t} outside flow domain [{a},{b}]")));
        }
        Ok(self
            .segments
            .iter()
            .position(|seg| t <= seg.domain().1)
            .unwrap_or(self.segments.len() - 1))
    }

    /// The union f(s) as a list of rectangles: the live segment's rectangle
    /// plus the closing rectangles of all earlier segments.
    pub fn union_at(&self, t: f64) -> Result<Vec<Rect>> {
        let idx = self.segment_index(t)?;
        let mut rects = Vec::with_capacity(idx + 1);
        for seg in &self.segments[..idx] {
            rects.push(seg.rect_at(seg.domain().1)?);
        }
        rects.push(self.segments[idx].rect_at(t)?);
        Ok(rects)
    }

    fn theta_in_segment(&self, idx: usize, t: f64) -> Result<f64> {
        let mut rects = Vec::with_capacity(idx + 1);
        for seg in &self.segments[..idx] {
            rects.push(seg.rect_at(seg.domain().1)?);
        }
        rects.push(self.segments[idx].rect_at(t)?);
        measure_union(&rects)
    }

    pub fn theta(&self, t: f64) -> Result<f64> {
        self.theta_in_segment(self.segment_index(t)?, t)
    }

    pub fn theta_range(&self) -> (f64, f64) {
        let (a, b) = self.domain();
        (
            self.theta(a).expect("domain endpoint"),
            self.theta(b).expect("domain endpoint"),
        )
    }

    /// Right inverse of θ by per-segment monotone bisection.
    pub fn theta_inverse(&self, s: f64) -> Result<f64> {
        let (s_lo, s_hi) = self.theta_range();
        let slack = 1e-12 * s_hi.abs().max(1.0);
        if s < s_lo - slack || s > s_hi + slack {
            return Err(Error::invalid(format!(
                "s={s} outside the θ-range [{s_lo},{s_hi}]"
            )));
        }
        let s = s.clamp(s_lo, s_hi);
        let idx = self
            .segments
            .iter()
            .position(|seg| {
                self.theta(seg.domain().1).map(|v| v >= s).unwrap_or(false)
            })
            .expect("s within θ-range");
        let (mut lo, mut hi) = self.segments[idx].domain();
        if self.theta(lo)? >= s {
            return Ok(lo);
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.theta(mid)? >= s {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(hi)
    }

    /// The rectangle unions `f∘θ⁻¹(t)`; the projected value at t is ΔX over
    /// the union (see `gaussian::delta_union` / `union_closure_sets`).
    pub fn projected_unions(&self, times: &[f64]) -> Result<Vec<Vec<Rect>>> {
        times
            .iter()
            .map(|&s| self.union_at(self.theta_inverse(s)?))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn theta_examples() {
        let f = ElementaryFlow::axis_linear(2);
        assert!((f.theta(0.3).unwrap() - 0.3).abs() < 1e-15);
        let diag = ElementaryFlow::new(vec![(0.0, vec![0.0, 0.0]), (1.0, vec![1.0, 1.0])]).unwrap();
        assert!((diag.theta(0.5).unwrap() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn theta_is_monotone_on_random_flows() {
        for i in 0..1000u64 {
            let c1 = crate::rng::uniform(17, 0, 4 * i);
            let c2 = crate::rng::uniform(17, 0, 4 * i + 1);
            let f = ElementaryFlow::new(vec![
                (0.0, vec![0.2 * c1, 0.3]),
                (0.5, vec![0.2 + 0.3 * c2, 0.5]),
                (1.0, vec![0.9, 0.9]),
            ])
            .unwrap();
            let t1 = crate::rng::uniform(17, 1, 2 * i);
            let t2 = crate::rng::uniform(17, 1, 2 * i + 1);
            let (a, b) = if t1 < t2 { (t1, t2) } else { (t2, t1) };
            assert!(f.theta(a).unwrap() <= f.theta(b).unwrap() + 1e-15);
        }
    }

    #[test]
    fn theta_inverse_examples() {
        let f = ElementaryFlow::axis_linear(2);
        assert!((f.theta_inverse(0.4).unwrap() - 0.4).abs() < 1e-12);
        let diag = ElementaryFlow::new(vec![(0.0, vec![0.0, 0.0]), (1.0, vec![1.0, 1.0])]).unwrap();
        assert!((diag.theta_inverse(0.25).unwrap() - 0.5).abs() < 1e-12);
        assert!((diag.theta_inverse(0.49).unwrap() - 0.7).abs() < 1e-10);
    }

    #[test]
    fn theta_round_trip() {
        let f = ElementaryFlow::new(vec![
            (0.0, vec![0.1, 0.4]),
            (0.3, vec![0.5, 0.6]),
            (1.0, vec![0.95, 0.9]),
        ])
        .unwrap();
        let (lo, hi) = f.theta_range();
        for i in 0..1000u64 {
            let s = lo + (hi - lo) * crate::rng::uniform(23, 0, i);
            let t = f.theta_inverse(s).unwrap();
            assert!((f.theta(t).unwrap() - s).abs() <= 1e-10, "s={s}");
        }
    }

    #[test]
    fn flat_theta_returns_left_endpoint() {
        // middle segment adds no measure (corner constant)
        let f = ElementaryFlow::new(vec![
            (0.0, vec![0.2, 0.5]),
            (0.4, vec![0.6, 0.5]),
            (0.6, vec![0.6, 0.5]),
            (1.0, vec![0.9, 0.9]),
        ])
        .unwrap();
        let s = 0.3; // θ value held on the flat stretch [0.4, 0.6]
        let t = f.theta_inverse(s).unwrap();
        assert!((t - 0.4).abs() < 1e-9, "t={t}");
    }

    #[test]
    fn projected_sets_examples() {
        let f = ElementaryFlow::axis_linear(2);
        let sets = f.projected_sets(&[0.25, 0.5]).unwrap();
        assert_eq!(sets[0], Rect::anchored(vec![0.25, 1.0]).unwrap());
        assert_eq!(sets[1], Rect::anchored(vec![0.5, 1.0]).unwrap());
        for (s, r) in [0.25, 0.5].iter().zip(&sets) {
            assert!((r.measure() - s).abs() < 1e-12);
        }
        // increasing times give a chain under inclusion
        let chain = f.projected_sets(&[0.2, 0.4, 0.8]).unwrap();
        assert!(chain[0].is_subset_of(&chain[1]) && chain[1].is_subset_of(&chain[2]));
    }

    #[test]
    fn projected_cov_matches_fbm() {
        let f = ElementaryFlow::axis_linear(2);
        let m = CovModel::sifbm(0.35).unwrap();
        let got = f.projected_cov(&m, 0.2, 0.7).unwrap();
        let want = 0.5 * (0.2f64.powf(0.7) + 0.7f64.powf(0.7) - 0.5f64.powf(0.7));
        assert!((got - want).abs() < 1e-14);
        let s = 0.37;
        assert!((f.projected_cov(&m, s, s).unwrap() - s.powf(0.7)).abs() < 1e-14);
        // SIBM projects to Brownian motion
        let bm = CovModel::sibm();
        assert!((f.projected_cov(&bm, 0.3, 0.8).unwrap() - 0.3).abs() < 1e-12);
    }

    #[test]
    fn fbm_cov_examples() {
        assert!((fbm_cov(0.5, 0.3, 0.8) - 0.3).abs() < 1e-15);
        assert_eq!(fbm_cov(0.3, 0.0, 0.8), 0.0);
        assert_eq!(fbm_cov(0.3, 0.2, 0.9), fbm_cov(0.3, 0.9, 0.2));
    }

    #[test]
    fn simple_flow_theta_is_continuous_and_invertible() {
        let seg1 = ElementaryFlow::new(vec![(0.0, vec![0.0, 0.5]), (0.5, vec![0.5, 0.5])]).unwrap();
        // second segment grows a different rectangle out of the union
        let seg2 = ElementaryFlow::new(vec![(0.5, vec![0.25, 0.25]), (1.0, vec![0.25, 1.0])]).unwrap();
        let flow = SimpleFlow::new(vec![seg1, seg2]).unwrap();
        let (lo, hi) = flow.theta_range();
        assert!((lo - 0.0).abs() < 1e-15);
        // θ(1) = m([0,(.5,.5)] ∪ [0,(.25,1)]) = 0.25 + 0.25 - 0.125
        assert!((hi - 0.375).abs() < 1e-12);
        for i in 0..200u64 {
            let s = lo + (hi - lo) * crate::rng::uniform(29, 0, i);
            let t = flow.theta_inverse(s).unwrap();
            assert!((flow.theta(t).unwrap() - s).abs() < 1e-9);
        }
        let unions = flow.projected_unions(&[0.2, 0.3]).unwrap();
        assert_eq!(unions[0].len(), 1);
        assert_eq!(unions[1].len(), 2);
    }
}
