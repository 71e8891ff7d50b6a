//! Property suites for the rectangle geometry: representation invariance,
//! contractivity, triangle inequalities, metric equivalence, union-path
//! agreement and the dyadic approximation sandwich.

use proptest::prelude::*;
use sidx::geometry::{
    left_neighbourhood, measure_union_inclusion_exclusion, measure_union_sweep, CSet, DyadicLevel,
    Point, Rect,
};

fn coord() -> impl Strategy<Value = f64> {
    // grid-snapped coordinates in (0,1]: exact arithmetic, no denormal noise
    (1u32..=4096).prop_map(|i| i as f64 / 4096.0)
}

fn rect(dim: usize) -> impl Strategy<Value = Rect> {
    prop::collection::vec(coord(), dim).prop_map(|c| Rect::anchored(c).unwrap())
}

fn cset(dim: usize, max_sub: usize) -> impl Strategy<Value = CSet> {
    (rect(dim), prop::collection::vec(rect(dim), 0..=max_sub))
        .prop_map(|(base, sub)| CSet::new(base, sub).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    /// m(C) is invariant under appending a contained subtracted set,
    /// duplicating one, and permuting the collection — exactly.
    #[test]
    fn cset_measure_representation_invariance(c in cset(2, 4), k in 0usize..4) {
        let m0 = c.measure().unwrap();

        // append a subtracted rect contained in an existing one
        if let Some(v) = c.subtracted.first() {
            let shrunk = Rect::anchored(
                v.corner().iter().map(|x| 0.5 * x).collect::<Vec<_>>(),
            ).unwrap();
            let mut sub = c.subtracted.clone();
            sub.push(shrunk);
            let c2 = CSet::new(c.base.clone(), sub).unwrap();
            prop_assert!((c2.measure().unwrap() - m0).abs() <= 1e-12);
        }

        // duplicate a subtracted rect
        if !c.subtracted.is_empty() {
            let mut sub = c.subtracted.clone();
            let dup = sub[k % sub.len()].clone();
            sub.push(dup);
            let c3 = CSet::new(c.base.clone(), sub).unwrap();
            prop_assert!((c3.measure().unwrap() - m0).abs() <= 1e-12);
        }

        // permute (rotate) the subtracted collection
        let mut sub = c.subtracted.clone();
        let rot = k.min(sub.len().saturating_sub(1));
        sub.rotate_left(rot);
        let c4 = CSet::new(c.base.clone(), sub).unwrap();
        prop_assert_eq!(c4.measure().unwrap(), m0);
    }

    /// d_m(U ∩ W, V ∩ W) ≤ d_m(U, V): the contractivity of d_m.
    #[test]
    fn d_m_is_contractive(u in rect(2), v in rect(2), w in rect(2)) {
        let lhs = u.intersect(&w).d_m(&v.intersect(&w));
        prop_assert!(lhs <= u.d_m(&v) + 1e-12);
    }

    #[test]
    fn d_m_triangle_inequality(u in rect(2), v in rect(2), w in rect(2)) {
        prop_assert!(u.d_m(&v) <= u.d_m(&w) + w.d_m(&v) + 1e-12);
    }

    #[test]
    fn d_hausdorff_triangle_and_contractive(u in rect(2), v in rect(2), w in rect(2)) {
        let duv = u.d_hausdorff(&v).unwrap();
        let duw = u.d_hausdorff(&w).unwrap();
        let dwv = w.d_hausdorff(&v).unwrap();
        prop_assert!(duv <= duw + dwv + 1e-12);
        let contracted = u.intersect(&w).d_hausdorff(&v.intersect(&w)).unwrap();
        prop_assert!(contracted <= duv + 1e-12);
    }

    /// On the box [1/4, 1]^N the measure distance is squeezed between the
    /// sup distance with explicit constants.
    #[test]
    fn metric_equivalence_on_compacts(
        s in prop::collection::vec(1024u32..=4096, 2),
        t in prop::collection::vec(1024u32..=4096, 2),
    ) {
        let n = 2usize;
        let s: Vec<f64> = s.into_iter().map(|i| i as f64 / 4096.0).collect();
        let t: Vec<f64> = t.into_iter().map(|i| i as f64 / 4096.0).collect();
        let d_inf = s.iter().zip(&t).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let d_m = Rect::anchored(s).unwrap().d_m(&Rect::anchored(t).unwrap());
        let lower = 0.25f64.powi(n as i32 - 1) * d_inf;
        let upper = n as f64 * d_inf;
        prop_assert!(lower <= d_m + 1e-12, "lower {lower} vs d_m {d_m}");
        prop_assert!(d_m <= upper + 1e-12, "d_m {d_m} vs upper {upper}");
    }

    /// Inclusion–exclusion and the sweep agree on unions of up to 12 rects.
    #[test]
    fn union_paths_agree(rects in prop::collection::vec(rect(2), 1..=12)) {
        let ie = measure_union_inclusion_exclusion(&rects).unwrap();
        let sweep = measure_union_sweep(&rects).unwrap();
        prop_assert!((ie - sweep).abs() <= 1e-12, "ie {ie} vs sweep {sweep}");
    }

    /// U ⊆ g_{n+1}(U) ⊆ g_n(U), with d_m(U, g_n(U)) ≤ N·2^-n.
    #[test]
    fn g_n_sandwich(u in rect(2), n in 1u32..10) {
        let coarse = DyadicLevel::new(n, 2).unwrap();
        let fine = DyadicLevel::new(n + 1, 2).unwrap();
        let g_coarse = u.g_n(&coarse);
        let g_fine = u.g_n(&fine);
        prop_assert!(u.is_subset_of(&g_fine));
        prop_assert!(g_fine.is_subset_of(&g_coarse));
        prop_assert!(u.d_m(&g_coarse) <= 2.0 * coarse.step() + 1e-12);
    }

    /// Left neighbourhoods are nested across levels and have measure 2^-nN.
    #[test]
    fn left_neighbourhood_nested_and_sized(
        tx in 1u32..999,
        ty in 1u32..999,
        n in 2u32..7,
    ) {
        let t = Point::new(vec![tx as f64 / 1000.0, ty as f64 / 1000.0]).unwrap();
        let coarse = left_neighbourhood(&t, &DyadicLevel::new(n, 2).unwrap()).unwrap();
        let fine = left_neighbourhood(&t, &DyadicLevel::new(n + 1, 2).unwrap()).unwrap();
        let m = coarse.measure().unwrap();
        prop_assert!((m - 0.25f64.powi(n as i32)).abs() <= 1e-12);
        prop_assert!(coarse.contains_point(&[tx as f64 / 1000.0, ty as f64 / 1000.0]));

        // grid membership oracle: C_{n+1}(t) ⊆ C_n(t) pointwise
        for i in 0..32 {
            for j in 0..32 {
                let p = [(i as f64 + 0.5) / 32.0, (j as f64 + 0.5) / 32.0];
                if fine.contains_point(&p) {
                    prop_assert!(coarse.contains_point(&p), "point {p:?} escapes");
                }
            }
        }
    }
}

/// Brute-force point-set Hausdorff oracle over boundary samples.
fn hausdorff_oracle(u: &Rect, v: &Rect, samples: usize) -> f64 {
    let boundary = |r: &Rect| -> Vec<[f64; 2]> {
        let c = r.corner();
        let mut pts = Vec::with_capacity(4 * samples);
        for i in 0..=samples {
            let f = i as f64 / samples as f64;
            pts.push([f * c[0], 0.0]);
            pts.push([f * c[0], c[1]]);
            pts.push([0.0, f * c[1]]);
            pts.push([c[0], f * c[1]]);
        }
        pts
    };
    let dist = |p: &[f64; 2], r: &Rect| -> f64 {
        // sup-metric distance from a point to the anchored box
        let c = r.corner();
        let dx = (p[0] - c[0]).max(0.0).max(-p[0]);
        let dy = (p[1] - c[1]).max(0.0).max(-p[1]);
        dx.max(dy)
    };
    let one_sided = |a: &Rect, b: &Rect| -> f64 {
        boundary(a)
            .iter()
            .map(|p| dist(p, b))
            .fold(0.0, f64::max)
    };
    one_sided(u, v).max(one_sided(v, u))
}

#[test]
fn hausdorff_closed_form_matches_point_set_oracle() {
    let u = Rect::anchored(vec![0.3, 0.8]).unwrap();
    let v = Rect::anchored(vec![0.5, 0.7]).unwrap();
    let exact = u.d_hausdorff(&v).unwrap();
    assert!((exact - 0.2).abs() < 1e-15);
    let oracle = hausdorff_oracle(&u, &v, 256);
    assert!((exact - oracle).abs() < 1e-2, "exact {exact} vs oracle {oracle}");

    for i in 0..20u64 {
        let a = Rect::anchored(vec![
            0.1 + 0.9 * sidx::rng::uniform(3, 0, 4 * i),
            0.1 + 0.9 * sidx::rng::uniform(3, 0, 4 * i + 1),
        ])
        .unwrap();
        let b = Rect::anchored(vec![
            0.1 + 0.9 * sidx::rng::uniform(3, 0, 4 * i + 2),
            0.1 + 0.9 * sidx::rng::uniform(3, 0, 4 * i + 3),
        ])
        .unwrap();
        let exact = a.d_hausdorff(&b).unwrap();
        let oracle = hausdorff_oracle(&a, &b, 256);
        assert!((exact - oracle).abs() < 1e-2, "exact {exact} vs oracle {oracle}");
    }
}

#[test]
fn left_neighbourhood_measure_matches_dyadic_cell() {
    // measure equals 2^-2n for N = 2 across levels, exactly
    let t = Point::new(vec![0.5, 0.3]).unwrap();
    for n in 1..=10u32 {
        let c = left_neighbourhood(&t, &DyadicLevel::new(n, 2).unwrap()).unwrap();
        let m = c.measure().unwrap();
        assert!(
            (m - 0.25f64.powi(n as i32)).abs() < 1e-15,
            "level {n}: measure {m}"
        );
    }
}

#[test]
fn measure_union_sweep_handles_large_collections() {
    let rects: Vec<Rect> = (0..100u64)
        .map(|i| {
            Rect::anchored(vec![
                0.2 + 0.8 * sidx::rng::uniform(8, 0, 2 * i),
                0.2 + 0.8 * sidx::rng::uniform(8, 0, 2 * i + 1),
            ])
            .unwrap()
        })
        .collect();
    let m = measure_union_sweep(&rects).unwrap();
    // grid oracle at 400^2 resolution
    let cells = 400;
    let mut covered = 0usize;
    for i in 0..cells {
        for j in 0..cells {
            let p = [
                (i as f64 + 0.5) / cells as f64,
                (j as f64 + 0.5) / cells as f64,
            ];
            if rects.iter().any(|r| r.contains_point(&p)) {
                covered += 1;
            }
        }
    }
    let oracle = covered as f64 / (cells * cells) as f64;
    assert!((m - oracle).abs() < 5e-3, "sweep {m} vs grid {oracle}");
}
