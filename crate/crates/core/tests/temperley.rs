mod common;

use common::*;
use hypdimer::heights::{family_region, BoundaryMode, Family};
use hypdimer::lattice::{build_pq_tiling, square_grid, Geometry};
use hypdimer::temperley::*;
use proptest::prelude::*;

#[test]
fn superposition_counts() {
    let g = build_pq_tiling(3, 7, 2).unwrap();
    let sg = packed(&g, Geometry::Hyperbolic);
    assert_eq!(sg.n_black(), g.n_vertices() + g.n_interior_faces());
    assert_eq!(sg.n_white(), g.n_edges());
    let inner_half_edges: usize = g.interior_faces().map(|f| g.face_degree(f)).sum();
    assert_eq!(sg.kites.len(), inner_half_edges);
    for w in 0..sg.n_white() {
        let n = sg.white_neighbors(w).iter().flatten().count();
        assert_eq!(n, if g.is_boundary_edge(w) { 3 } else { 4 });
    }
}

#[test]
fn whites_sit_between_their_blacks() {
    let sg = packed(&square_grid(3).unwrap(), Geometry::Euclidean);
    for w in 0..sg.n_white() {
        let nb = sg.white_neighbors(w);
        let (t, h) = (nb[0].unwrap(), nb[1].unwrap());
        let d1 = sg.direction(w, t).unwrap();
        let d2 = sg.direction(w, h).unwrap();
        assert!((d1 + d2).norm() < 1e-12, "primal directions are opposite");
        for f in nb[2..].iter().flatten() {
            let d = sg.direction(w, *f).unwrap();
            assert!((d * d1.conj()).re.abs() < 1e-12, "dual direction is perpendicular");
        }
    }
}

#[test]
fn temperley_trim_is_balanced() {
    for (p, q, d) in [(3, 7, 2), (4, 4, 3), (4, 5, 1)] {
        let g = build_pq_tiling(p, q, d).unwrap();
        let geom = Geometry::of(p, q).unwrap();
        let sg = packed(&g, geom);
        for b0 in g.boundary_vertices().into_iter().take(3) {
            let r = temperley_trim(sg.clone(), b0).unwrap();
            assert!(r.is_balanced());
            assert!(!r.black_in[sg.primal_id(b0)]);
        }
        assert!(temperley_trim(sg.clone(), g.n_vertices()).is_err());
    }
}

#[test]
fn interior_vertex_cannot_be_trimmed() {
    let g = square_grid(2).unwrap();
    let sg = packed(&g, Geometry::Euclidean);
    let inner = (0..g.n_vertices()).find(|&v| !g.is_boundary_vertex(v)).unwrap();
    assert!(matches!(temperley_trim(sg, inner), Err(hypdimer::Error::BadRegion(_))));
}

#[test]
fn two_corner_regions_of_families() {
    for fam in [Family::Grid, Family::Tiling { p: 3, q: 7 }] {
        for r in 1..3 {
            let reg = family_region(fam, r, BoundaryMode::TwoCorner).unwrap();
            assert!(reg.is_balanced(), "{fam:?} {r}");
            let prof = classify_corners(&reg);
            assert!(prof.corners.is_some());
        }
    }
}

#[test]
fn temperley_profile_marks_b0() {
    let reg = family_region(Family::Grid, 2, BoundaryMode::Temperley).unwrap();
    let prof = classify_corners(&reg);
    assert_eq!(prof.b0, Some(default_b0(&reg.sg.graph)));
    assert!(prof.labels.iter().all(|(w, _)| reg.white_in[*w]));
}

#[test]
fn region_spec_round_trip() {
    let (sg, spec) = hypdimer::heights::family_spec(Family::Grid, 1, BoundaryMode::TwoCorner).unwrap();
    let s = serde_json::to_string(&spec).unwrap();
    let back: RegionSpec = serde_json::from_str(&s).unwrap();
    assert_eq!(back, spec);
    let a = spec.build(sg.clone()).unwrap();
    let b = back.build(sg).unwrap();
    assert_eq!(a.whites, b.whites);
    assert_eq!(a.blacks, b.blacks);
}

#[test]
fn superposition_svg_draws_every_vertex() {
    let reg = family_region(Family::Grid, 1, BoundaryMode::Temperley).unwrap();
    let svg = superposition_svg(&reg);
    let primal = reg.blacks.iter().filter(|&&b| reg.sg.is_primal(b)).count();
    assert_eq!(svg.matches("fill=\"black\"").count(), primal);
    assert_eq!(svg.matches("fill=\"gray\"").count(), reg.blacks.len() - primal);
    assert_eq!(svg.matches("fill=\"white\"").count(), reg.whites.len());
    assert_eq!(svg.matches("<line").count(), reg.edges().len());
}

#[test]
fn uncertified_packing_is_rejected() {
    let g = square_grid(2).unwrap();
    let mut pk = hypdimer::packing::solve_double_packing(
        &g,
        &hypdimer::packing::PackingOptions::new(Geometry::Euclidean, hypdimer::packing::BoundaryCondition::UnitRadius),
    )
    .unwrap();
    pk.primal_center[4] += num_complex::Complex64::new(0.1, 0.0);
    assert!(matches!(superpose(&g, &pk, 1e-10), Err(hypdimer::Error::Uncertified(_))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]
    #[test]
    fn random_regions_are_balanced_and_closed(seed in 0u64..5000) {
        for r in random_small_regions(seed, 3, 40) {
            prop_assert!(r.is_balanced());
            for (w, b) in r.edges() {
                prop_assert!(r.white_in[w] && r.black_in[b]);
            }
        }
    }
}
