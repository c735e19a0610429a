mod common;

use std::f64::consts::PI;

use hypdimer::lattice::*;
use hypdimer::packing::*;
use proptest::prelude::*;

/// Regular `{p,q}` hyperbolic radii by bisection on the two right-triangle
/// angle conditions: `tan(pi/q) = tanh(r_f)/sinh(r_v)` at a vertex and
/// `tan(pi/p) = tanh(r_v)/sinh(r_f)` at a face.
fn bisection_radius(p: usize, q: usize) -> f64 {
    let face_of = |rv: f64| ((PI / q as f64).tan() * rv.sinh()).atanh();
    let defect = |rv: f64| rv.tanh() / face_of(rv).sinh() - (PI / p as f64).tan();
    // The face radius exists while tan(pi/q) sinh(r_v) < 1.
    let (mut lo, mut hi): (f64, f64) = (1e-9, (1.0 / (PI / q as f64).tan()).asinh() * (1.0 - 1e-12));
    let s = defect(lo).signum();
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if defect(mid).signum() == s {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn regular_radius_matches_bisection() {
    for (p, q) in [(3, 7), (4, 5), (5, 4), (7, 3), (3, 8), (6, 4)] {
        let r = regular_primal_radius(p, q).unwrap();
        let b = bisection_radius(p, q);
        assert!((r - b).abs() < 1e-10, "({p},{q}): {r} vs {b}");
    }
    assert_eq!(regular_primal_radius(4, 4).unwrap(), 1.0);
}

#[test]
fn regular_packing_is_symmetric() {
    let g = build_pq_tiling(3, 7, 3).unwrap();
    let pk = solve_double_packing(&g, &PackingOptions::regular(3, 7).unwrap()).unwrap();
    let r = regular_primal_radius(3, 7).unwrap();
    for v in 0..g.n_vertices() {
        assert!((pk.primal_radius[v] - r).abs() < 1e-9);
    }
    let rep = certify(&g, &pk, 1e-8);
    assert!(rep.passed, "{rep:?}");
    assert!(pk.primal_center.iter().all(|c| c.norm() < 1.0));
}

#[test]
fn square_grid_radii_are_equal() {
    for n in [2, 4, 7] {
        let g = square_grid(n).unwrap();
        let pk = solve_double_packing(&g, &PackingOptions::new(Geometry::Euclidean, BoundaryCondition::UnitRadius)).unwrap();
        assert!(pk.primal_radius.iter().all(|&r| r == 1.0));
        assert!(g.interior_faces().all(|f| pk.dual_radius[f] == pk.dual_radius[g.root_face()]));
        assert!(certify(&g, &pk, 1e-10).passed);
    }
}

#[test]
fn report_includes_every_residual() {
    let g = square_grid(3).unwrap();
    let pk = solve_double_packing(&g, &PackingOptions::new(Geometry::Euclidean, BoundaryCondition::UnitRadius)).unwrap();
    let rep = certify(&g, &pk, 1e-10);
    let v = serde_json::to_value(&rep).unwrap();
    for k in ["angle_sum", "tangency", "orthogonality", "dual_tangency", "perpendicularity", "max_residual"] {
        assert!(v.get(k).is_some(), "{k}");
    }
}

#[test]
fn json_round_trip_and_svg() {
    let g = square_grid(2).unwrap();
    let pk = solve_double_packing(&g, &PackingOptions::new(Geometry::Euclidean, BoundaryCondition::UnitRadius)).unwrap();
    let back = packing_from_json(&packing_to_json(&pk).unwrap(), g.n_faces()).unwrap();
    assert_eq!(back.primal_center, pk.primal_center);
    assert_eq!(back.tangency, pk.tangency);
    let svg = packing_to_svg(&g, &pk);
    assert_eq!(svg.matches("stroke=\"red\"").count(), 9);
    assert_eq!(svg.matches("stroke=\"blue\"").count(), 4);
}

#[test]
fn metric_weights_follow_radii() {
    let mut g = square_grid(2).unwrap();
    let pk = solve_double_packing(&g, &PackingOptions::new(Geometry::Euclidean, BoundaryCondition::UnitRadius)).unwrap();
    metric_weights(&mut g, &pk).unwrap();
    for e in 0..g.n_edges() {
        assert!((g.nu(e) - 2.0).abs() < 1e-12);
        assert!((g.nu_dual(e) - 2.0).abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]
    #[test]
    fn random_boundary_radii_still_certify(seed in 0u64..10_000, n in 2usize..5) {
        use rand::Rng;
        let g = square_grid(n).unwrap();
        let mut r = common::rng(seed);
        let radii: Vec<f64> = (0..g.n_vertices()).map(|_| r.random_range(0.5..2.0)).collect();
        let pk = solve_double_packing(&g, &PackingOptions::new(Geometry::Euclidean, BoundaryCondition::Prescribed(radii.clone()))).unwrap();
        for v in g.boundary_vertices() {
            prop_assert_eq!(pk.primal_radius[v], radii[v]);
        }
        let rep = certify(&g, &pk, 1e-9);
        prop_assert!(rep.passed, "{:?}", rep);
    }
}
