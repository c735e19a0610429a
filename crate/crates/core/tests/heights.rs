use hypdimer::heights::*;
use hypdimer::sampler::{pair_sampler, sample_matching, stream_rng, TemperleySampler};
use proptest::prelude::*;

#[test]
fn grid_angle_flow_is_a_quarter_inside() {
    let reg = family_region(Family::Grid, 2, BoundaryMode::Temperley).unwrap();
    let fg = FaceGraph::new(&reg);
    let flow = angle_flow(&fg);
    for (c, &t) in fg.crossings.iter().zip(&flow) {
        if c.left != fg.outer() && c.right != fg.outer() {
            assert_eq!(t, 0.25);
        }
    }
    assert!(angle_flow_defect(&fg, &flow) < 1e-12);
}

#[test]
fn tiling_angle_flow_has_unit_sums() {
    for fam in [Family::Tiling { p: 3, q: 7 }, Family::Tiling { p: 4, q: 5 }] {
        let reg = family_region(fam, 2, BoundaryMode::Temperley).unwrap();
        let fg = FaceGraph::new(&reg);
        assert!(angle_flow_defect(&fg, &angle_flow(&fg)) < 1e-9, "{fam:?}");
    }
}

#[test]
fn preliminary_heights_close_up() {
    let reg = family_region(Family::Tiling { p: 3, q: 7 }, 2, BoundaryMode::Temperley).unwrap();
    let fg = FaceGraph::new(&reg);
    let flow = angle_flow(&fg);
    let base = fg.center().unwrap();
    let (m, m0) = pair_sampler(&reg, 1, 2).unwrap();
    let h = preliminary_height(&fg, &flow, &m, base).unwrap();
    assert!(h.closure < 1e-9, "{}", h.closure);
    assert_eq!(h.values[base], 0.0);
    assert!(h.values[fg.outer()].is_nan());
    let d = dimer_height(&fg, &flow, &m, &m0, base).unwrap();
    // Differences of two matchings take integer values.
    for f in 0..fg.outer() {
        assert!((d.values[f] - d.values[f].round()).abs() < 1e-9);
    }
    assert!(preliminary_height(&fg, &flow, &m, fg.outer()).is_err());
}

#[test]
fn same_matching_has_zero_height_and_no_loops() {
    let reg = family_region(Family::Grid, 2, BoundaryMode::Temperley).unwrap();
    let fg = FaceGraph::new(&reg);
    let m = sample_matching(&reg, 6).unwrap();
    assert!(double_dimer_height(&fg, &m, &m).unwrap().iter().all(|&h| h == 0));
    let d = cycle_decomposition(&reg, &m, &m).unwrap();
    assert!(d.cycles.is_empty() && d.paths.is_empty());
    assert!(!loops_svg(&reg, &d).contains("<polygon"));
    let labels = level_clusters(&fg, &vec![0; fg.n_faces()]);
    assert!(labels.iter().all(|&l| l == 0));
}

#[test]
fn loops_are_drawn_one_polygon_each() {
    let reg = family_region(Family::Grid, 2, BoundaryMode::Temperley).unwrap();
    let (m1, m2) = pair_sampler(&reg, 10, 11).unwrap();
    let d = cycle_decomposition(&reg, &m1, &m2).unwrap();
    assert!(!d.cycles.is_empty());
    assert_eq!(loops_svg(&reg, &d).matches("<polygon").count(), d.cycles.len());
    for c in &d.cycles {
        assert!(c.len() >= 4 && c.len() % 2 == 0);
        assert!(c.iter().step_by(2).all(|&(w, b, first)| first && m1.contains(w, b)));
        assert!(c.iter().skip(1).step_by(2).all(|&(w, b, first)| !first && m2.contains(w, b)));
    }
}

#[test]
fn level_clusters_split_by_value() {
    let reg = family_region(Family::Grid, 1, BoundaryMode::Temperley).unwrap();
    let fg = FaceGraph::new(&reg);
    let field: Vec<i64> = (0..fg.n_faces()).map(|f| if f == fg.outer() { 0 } else { 1 }).collect();
    let labels = level_clusters(&fg, &field);
    assert_ne!(labels[fg.outer()], labels[0]);
    let inside: Vec<usize> = (0..fg.outer()).map(|f| labels[f]).collect();
    assert!(inside.iter().all(|&l| l == inside[0]));
}

#[test]
fn center_path_agrees_with_full_field() {
    let reg = family_region(Family::Tiling { p: 4, q: 5 }, 2, BoundaryMode::Temperley).unwrap();
    let fg = FaceGraph::new(&reg);
    let c = fg.center().unwrap();
    let path = fg.path_from_outer(c);
    for seed in 0..5 {
        let (a, b) = pair_sampler(&reg, 2 * seed, 2 * seed + 1).unwrap();
        let h = double_dimer_height(&fg, &a, &b).unwrap();
        assert_eq!(height_along(&fg, &path, &a, &b), h[c]);
    }
}

#[test]
fn identical_pairs_have_zero_variance() {
    let t = variance_experiment(Family::Grid, BoundaryMode::Temperley, &[1, 2], 8, 3, true).unwrap();
    assert!(t.rows.iter().all(|r| r.var == 0.0 && r.mean == 0.0));
    assert!(variance_experiment(Family::Grid, BoundaryMode::Temperley, &[], 8, 3, false).is_err());
    let csv = t.to_csv();
    assert_eq!(csv.lines().count(), 3);
    assert!(csv.starts_with("radius,n,mean,var,stderr,slope_fit"));
}

#[test]
fn moments_of_a_small_sample() {
    let (m, v, _) = moments(&[1, -1, 1, -1]);
    assert_eq!((m, v), (0.0, 1.0));
}

#[test]
fn two_corner_family_regions_are_balanced() {
    for fam in [Family::Grid, Family::Tiling { p: 3, q: 7 }] {
        let reg = family_region(fam, 1, BoundaryMode::TwoCorner).unwrap();
        assert!(reg.is_balanced());
        let m = sample_matching(&reg, 2).unwrap();
        m.validate(&reg).unwrap();
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn height_parity_counts_enclosing_loops(seed in any::<u64>(), fam in 0usize..3) {
        let family = [Family::Grid, Family::Tiling { p: 3, q: 7 }, Family::Tiling { p: 4, q: 5 }][fam];
        let reg = family_region(family, 2, BoundaryMode::Temperley).unwrap();
        let fg = FaceGraph::new(&reg);
        let s = TemperleySampler::new(&reg).unwrap();
        let m1 = s.sample(&mut stream_rng(seed, "a", 0)).unwrap();
        let m2 = s.sample(&mut stream_rng(seed, "b", 0)).unwrap();
        let h = double_dimer_height(&fg, &m1, &m2).unwrap();
        let d = cycle_decomposition(&reg, &m1, &m2).unwrap();
        let k = enclosing_cycle_counts(&fg, &d);
        prop_assert_eq!(h[fg.outer()], 0);
        for f in 0..fg.n_faces() {
            prop_assert!(h[f].unsigned_abs() as usize <= k[f]);
            prop_assert_eq!(h[f].rem_euclid(2) as usize, k[f] % 2);
        }
        let labels = level_clusters(&fg, &h);
        for c in &fg.crossings {
            prop_assert_eq!(labels[c.left] == labels[c.right], h[c.left] == h[c.right]);
        }
    }
}
