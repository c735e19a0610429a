//! Acceptance checks, one line per criterion. Exits nonzero if any fails.

mod common;

use std::time::{Duration, Instant};

use common::*;
use hypdimer::heights::*;
use hypdimer::kasteleyn::*;
use hypdimer::lattice::{build_pq_tiling, square_grid, Geometry};
use hypdimer::packing::{certify, solve_double_packing, BoundaryCondition, PackingOptions};
use hypdimer::potential::*;
use hypdimer::sampler::{stream_rng, Matching, TemperleySampler};
use hypdimer::temperley::Region;
use rand::Rng;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

/// `|det D|` against the weighted sum over all perfect matchings.
fn determinant_vs_enumeration() -> Outcome {
    let t = Instant::now();
    let regions = random_small_regions(11, 24, 14);
    let two = regions.iter().filter(|r| matches!(r.kind, hypdimer::temperley::RegionKind::TwoCorner { .. })).count();
    let mut worst: f64 = 0.0;
    for r in &regions {
        let d = build_dirac(r, Variant::Raw).unwrap();
        worst = worst.max(rel(partition_function(&d).unwrap(), weighted_matching_sum(r)));
    }
    let el = t.elapsed();
    outcome(
        regions.len() >= 20 && two > 0 && worst < 1e-9 && el < Duration::from_secs(60),
        format!("{} regions ({two} two-corner), max rel err {worst:.2e}, {el:.1?}", regions.len()),
    )
}

fn cylinder_vs_enumeration() -> Outcome {
    let regions = random_small_regions(12, 8, 14);
    let mut worst: f64 = 0.0;
    let mut total: f64 = 0.0;
    let mut r = rng(5);
    let mut checked = 0;
    for reg in &regions {
        let d = build_dirac(reg, Variant::Raw).unwrap();
        let inv = invert_dirac(&d).unwrap();
        let ms = enumerate_matchings(reg);
        let ws: Vec<f64> = ms.iter().map(|m| matching_weight(&reg.sg, m)).collect();
        let z: f64 = ws.iter().sum();
        let edges = reg.edges();
        let prob = |set: &[(usize, usize)]| -> f64 {
            ms.iter().zip(&ws).filter(|(m, _)| set.iter().all(|e| m.contains(e))).map(|(_, w)| w).sum::<f64>() / z
        };
        for k in 1..=3 {
            for _ in 0..20 {
                let mut set: Vec<(usize, usize)> = (0..k).map(|_| edges[r.random_range(0..edges.len())]).collect();
                set.sort_unstable();
                set.dedup();
                worst = worst.max((local_stats(&d, &inv, &set).unwrap() - prob(&set)).abs());
                checked += 1;
            }
        }
        // Total probability: the edges at one white, and one edge split over a second white.
        for &w in &reg.whites {
            let s: f64 = reg.neighbors(w).into_iter().map(|b| local_stats(&d, &inv, &[(w, b)]).unwrap()).sum();
            total = total.max((s - 1.0).abs());
        }
        let e1 = edges[r.random_range(0..edges.len())];
        let p1 = local_stats(&d, &inv, &[e1]).unwrap();
        for &w2 in reg.whites.iter().filter(|&&w| w != e1.0) {
            let s: f64 = reg.neighbors(w2).into_iter().map(|b| local_stats(&d, &inv, &[e1, (w2, b)]).unwrap()).sum();
            total = total.max((s - p1).abs());
        }
    }
    outcome(
        worst < 1e-9 && total < 1e-9,
        format!("{checked} cylinders, max err {worst:.2e}, total probability err {total:.2e}"),
    )
}

fn green_formula_vs_lu() -> Outcome {
    let mut worst: f64 = 0.0;
    let regions =
        [family_region(Family::Tiling { p: 3, q: 7 }, 2, BoundaryMode::Temperley), family_region(Family::Grid, 2, BoundaryMode::Temperley)];
    for r in regions {
        let r = r.unwrap();
        let d = build_dirac(&r, Variant::Normalized).unwrap();
        let lu = invert_dirac(&d).unwrap().inv;
        let green = inverse_dirac_table(&d).unwrap();
        let scale = lu.iter().fold(0.0f64, |a, z| a.max(z.norm()));
        worst = worst.max((green - &lu).iter().fold(0.0f64, |a, z| a.max(z.norm())) / scale);
    }
    outcome(worst < 1e-8, format!("(3,7,2) and square_grid(4): max rel diff {worst:.2e}"))
}

fn exhaustion_cauchy() -> Outcome {
    let g = build_pq_tiling(3, 7, 4).unwrap();
    let f0 = g.root_face();
    let f1 = g
        .face_half_edges(f0)
        .iter()
        .map(|&h| g.face(h ^ 1))
        .find(|&f| !g.is_outer(f))
        .unwrap();
    let ex = exhaustion_green(&g, GraphSide::Dual, &[1, 2, 3, 4], &[(f0, f0), (f0, f1)]).unwrap();
    let gap = ex.final_gap.iter().fold(0.0f64, |a, &b| a.max(b));
    outcome(
        ex.monotone && gap < 1e-3,
        format!("values {:?}, monotone {}, final gaps {:?}", ex.values, ex.monotone, ex.final_gap),
    )
}

fn random_network(r: &mut impl Rng, n: usize) -> Network {
    let mut edges = Vec::new();
    for v in 1..n {
        edges.push((r.random_range(0..v), v, r.random_range(0.2..3.0)));
    }
    let extra = r.random_range(0..=n + 2);
    for _ in 0..extra {
        let a = r.random_range(0..n);
        let b = r.random_range(0..n);
        if a != b {
            edges.push((a, b, r.random_range(0.2..3.0)));
        }
    }
    Network::new(n, edges).unwrap()
}

fn transfer_currents() -> Outcome {
    let mut r = rng(21);
    let mut worst: f64 = 0.0;
    let mut cases = 0;
    for _ in 0..40 {
        let n = r.random_range(2..=8);
        let net = random_network(&mut r, n);
        let trees = enumerate_spanning_trees(&net);
        let ws: Vec<f64> = trees.iter().map(|t| tree_weight(&net, t)).collect();
        let z: f64 = ws.iter().sum();
        let tc = TransferCurrent::new(&net).unwrap();
        for k in 1..=3.min(net.n_edges()) {
            for _ in 0..10 {
                let mut set: Vec<usize> = (0..k).map(|_| r.random_range(0..net.n_edges())).collect();
                set.sort_unstable();
                set.dedup();
                let exact: f64 =
                    trees.iter().zip(&ws).filter(|(t, _)| set.iter().all(|e| t.contains(e))).map(|(_, w)| w).sum::<f64>() / z;
                worst = worst.max((tc.tree_cylinder_prob(&set) - exact).abs());
                cases += 1;
            }
        }
    }
    let g = square_grid(6).unwrap();
    let net = Network::primal(&g);
    let bd = g.boundary_vertices();
    let part: Vec<usize> = bd[..bd.len() / 2].to_vec();
    let s = forest_sandwich(&net, &bd, &part).unwrap();
    outcome(
        worst < 1e-10 && s.max_violation <= 1e-12,
        format!(
            "{cases} cylinders, max err {worst:.2e}; sandwich on {} interior edges, max violation {:.2e}",
            s.interior_edges.len(),
            s.max_violation
        ),
    )
}

fn temperley_round_trip() -> Outcome {
    let mut lines = Vec::new();
    let mut ok = true;
    let mut regions: Vec<Region> = Vec::new();
    for n in [1, 2, 3] {
        let g = square_grid(n).unwrap();
        let sg = packed(&g, Geometry::Euclidean);
        for b0 in [g.boundary_vertices()[0], *g.boundary_vertices().last().unwrap()] {
            regions.push(hypdimer::temperley::temperley_trim(sg.clone(), b0).unwrap());
        }
    }
    let g = build_pq_tiling(3, 7, 1).unwrap();
    if g.n_interior_faces() <= 10 {
        let sg = packed(&g, Geometry::Hyperbolic);
        regions.push(hypdimer::temperley::temperley_trim(sg, g.boundary_vertices()[0]).unwrap());
    }
    regions.push(family_region(Family::Grid, 1, BoundaryMode::TwoCorner).unwrap());
    for reg in &regions {
        let faces = reg.sg.graph.n_interior_faces();
        let s = TemperleySampler::new(reg).unwrap();
        let net = &s.networks.primal;
        let trees = enumerate_spanning_trees(net);
        let mut seen = std::collections::BTreeSet::new();
        let mut exact = true;
        for t in &trees {
            let dt = orient(net, t, s.networks.primal_sink);
            let m = s.forward(&dt).unwrap();
            m.validate(reg).unwrap();
            let (back, _) = s.inverse(&m).unwrap();
            exact &= back == dt;
            seen.insert(m.pairs());
        }
        let count = enumerate_matchings(reg).len();
        let good = exact && seen.len() == trees.len() && count == trees.len();
        ok &= good;
        lines.push(format!("{faces}f:{}t/{}m", trees.len(), count));
    }
    outcome(ok, format!("round trips exact; trees/matchings {}", lines.join(" ")))
}

/// Orients an undirected spanning tree towards `root`.
fn orient(net: &Network, t: &[usize], root: usize) -> hypdimer::sampler::DirectedTree {
    let mut adj = vec![Vec::new(); net.n];
    for &e in t {
        let (a, b, _) = net.edges[e];
        adj[a].push((b, e));
        adj[b].push((a, e));
    }
    let mut parent = vec![None; net.n];
    let mut stack = vec![root];
    let mut seen = vec![false; net.n];
    seen[root] = true;
    while let Some(x) = stack.pop() {
        for &(y, e) in &adj[x] {
            if !seen[y] {
                seen[y] = true;
                parent[y] = Some((x, e));
                stack.push(y);
            }
        }
    }
    hypdimer::sampler::DirectedTree { root, parent }
}

fn sampler_marginals() -> Outcome {
    let t = Instant::now();
    let g = square_grid(3).unwrap();
    let sg = packed(&g, Geometry::Euclidean);
    let reg = hypdimer::temperley::temperley_trim(sg, hypdimer::temperley::default_b0(&g)).unwrap();
    let d = build_dirac(&reg, Variant::Raw).unwrap();
    let inv = invert_dirac(&d).unwrap();
    let probs = edge_probabilities(&d, &inv);
    let s = TemperleySampler::new(&reg).unwrap();
    let n = 100_000usize;
    let mut counts = std::collections::HashMap::new();
    let mut rng = stream_rng(7, "acceptance/sampler", 0);
    for _ in 0..n {
        let m = s.sample(&mut rng).unwrap();
        for p in m.pairs() {
            *counts.entry(p).or_insert(0usize) += 1;
        }
    }
    let mut worst: f64 = 0.0;
    for e in &probs {
        let f = *counts.get(&(e.white, e.black)).unwrap_or(&0) as f64 / n as f64;
        let se = (e.probability * (1.0 - e.probability) / n as f64).sqrt();
        if se > 0.0 {
            worst = worst.max((f - e.probability).abs() / se);
        } else if f != e.probability {
            worst = f64::INFINITY;
        }
    }
    let el = t.elapsed();
    outcome(
        worst < 4.0 && el < Duration::from_secs(120),
        format!("{} edges, N = {n}, worst |z| {worst:.2}, {el:.1?}", probs.len()),
    )
}

fn packing_certification() -> Outcome {
    let g = build_pq_tiling(3, 7, 3).unwrap();
    let pk = solve_double_packing(&g, &PackingOptions::regular(3, 7).unwrap()).unwrap();
    let hyp = certify(&g, &pk, 1e-8);
    let g = square_grid(8).unwrap();
    let pk = solve_double_packing(&g, &PackingOptions::new(Geometry::Euclidean, BoundaryCondition::UnitRadius)).unwrap();
    let euc = certify(&g, &pk, 1e-10);
    let r0 = pk.primal_radius[0];
    let rv_equal = pk.primal_radius.iter().all(|&r| r == r0);
    let f0 = pk.dual_radius[g.root_face()];
    let rf_equal = g.interior_faces().all(|f| pk.dual_radius[f] == f0);
    outcome(
        hyp.passed && euc.passed && rv_equal && rf_equal,
        format!(
            "(3,7,3) residual {:.2e}, square_grid(8) residual {:.2e}, radii equal {}",
            hyp.max_residual,
            euc.max_residual,
            rv_equal && rf_equal
        ),
    )
}

fn height_identities() -> Outcome {
    let reg = family_region(Family::Tiling { p: 3, q: 7 }, 3, BoundaryMode::Temperley).unwrap();
    let fg = FaceGraph::new(&reg);
    let flow = angle_flow(&fg);
    let s = TemperleySampler::new(&reg).unwrap();
    let base = fg.center().unwrap();
    let out = fg.outer();
    let mut closure: f64 = 0.0;
    let mut integrality: f64 = 0.0;
    let mut identity: f64 = 0.0;
    let pairs = 1000;
    for i in 0..pairs {
        let m1: Matching = s.sample(&mut stream_rng(3, "acceptance/heights", 2 * i)).unwrap();
        let m2: Matching = s.sample(&mut stream_rng(3, "acceptance/heights", 2 * i + 1)).unwrap();
        let h1 = preliminary_height(&fg, &flow, &m1, base).unwrap();
        let h2 = preliminary_height(&fg, &flow, &m2, base).unwrap();
        closure = closure.max(h1.closure).max(h2.closure);
        let dd = double_dimer_height(&fg, &m1, &m2).unwrap();
        for f in 0..fg.n_faces() {
            let diff = (h2.values[f] - h2.values[out]) - (h1.values[f] - h1.values[out]);
            integrality = integrality.max((diff - diff.round()).abs());
            identity = identity.max((diff - dd[f] as f64).abs());
        }
    }
    outcome(
        closure < 1e-10 && integrality < 1e-9 && identity < 1e-9,
        format!("{pairs} pairs: closure {closure:.2e}, integrality {integrality:.2e}, identity {identity:.2e}"),
    )
}

fn variance_contrast() -> Outcome {
    let t = Instant::now();
    let n = 20_000;
    let grid = variance_experiment(Family::Grid, BoundaryMode::Temperley, &[8, 16, 32], n, 101, false).unwrap();
    let grid_ok = grid.slope - 2.0 * grid.slope_stderr > 0.0;
    let hyp = variance_experiment(Family::Tiling { p: 3, q: 7 }, BoundaryMode::Temperley, &[2, 3, 4, 5], n, 202, false)
        .unwrap();
    let v = |k: usize| &hyp.rows[k];
    let inc23 = v(1).var - v(0).var;
    let inc45 = v(3).var - v(2).var;
    let se = (v(3).stderr.powi(2) + v(2).stderr.powi(2) + 0.25 * (v(1).stderr.powi(2) + v(0).stderr.powi(2))).sqrt();
    let hyp_ok = 0.5 * inc23 - inc45 > 2.0 * se;
    let el = t.elapsed();
    outcome(
        grid_ok && hyp_ok && el < Duration::from_secs(1800),
        format!(
            "grid var {:?} slope {:.4} +- {:.4}; (3,7) var {:?}, inc 2->3 {inc23:.4}, inc 4->5 {inc45:.4}, se {se:.4}; {el:.0?}",
            grid.rows.iter().map(|r| format!("{:.4}", r.var)).collect::<Vec<_>>(),
            grid.slope,
            grid.slope_stderr,
            hyp.rows.iter().map(|r| format!("{:.4}", r.var)).collect::<Vec<_>>(),
        ),
    )
}

fn decay_and_isoperimetry() -> Outcome {
    let g = build_pq_tiling(3, 7, 3).unwrap();
    let primal = green_decay_check(&g, GraphSide::Primal, None, 0.05).unwrap();
    let dual = green_decay_check(&g, GraphSide::Dual, None, 0.05).unwrap();
    let decay_ok = [&primal, &dual].iter().all(|r| r.slope < 0.0 && r.r_squared > 0.9);
    let scan = isoperimetric_scan(&g, 12, 400).unwrap();
    let bound = 0.8 * 5.0 * (1.0f64 / 5.0).sqrt();
    let grid = square_grid(8).unwrap();
    let caps = [4, 9, 16, 25, 36];
    let gv: Vec<f64> = caps.iter().map(|&c| isoperimetric_scan(&grid, c, 400).unwrap().constant).collect();
    let grid_ok = gv.windows(2).all(|w| w[1] < w[0]);
    outcome(
        decay_ok && scan.constant > bound && grid_ok,
        format!(
            "slopes {:.3}/{:.3} R2 {:.4}/{:.4}; (3,7) scan {:.3} vs {bound:.3}; grid {:?}",
            primal.slope, dual.slope, primal.r_squared, dual.r_squared, scan.constant, gv
        ),
    )
}

fn correlation_decay() -> Outcome {
    let reg = family_region(Family::Tiling { p: 3, q: 7 }, 3, BoundaryMode::Temperley).unwrap();
    let d = build_dirac(&reg, Variant::Raw).unwrap();
    let inv = invert_dirac(&d).unwrap();
    let fg = FaceGraph::new(&reg);
    let w = reg.sg.kites[fg.kites[fg.center().unwrap()]].white_in;
    let e1 = (w, reg.neighbors(w)[0]);
    let rows = correlation_scan(&d, &inv, e1, usize::MAX).unwrap();
    let monotone = rows.windows(2).all(|p| p[1].max_abs_cov < p[0].max_abs_cov);
    outcome(
        rows.len() >= 4 && monotone,
        format!(
            "max |cov| by separation {:?}",
            rows.iter().map(|r| format!("{}:{:.2e}", r.separation, r.max_abs_cov)).collect::<Vec<_>>()
        ),
    )
}

fn main() {
    let checks: [(&str, fn() -> Outcome); 12] = [
        ("determinant equals weighted matching count", determinant_vs_enumeration),
        ("cylinder probabilities", cylinder_vs_enumeration),
        ("inverse Dirac by Green functions", green_formula_vs_lu),
        ("Green exhaustion monotone and Cauchy", exhaustion_cauchy),
        ("transfer currents and forest sandwich", transfer_currents),
        ("Temperley bijection", temperley_round_trip),
        ("sampler marginals", sampler_marginals),
        ("packing certification", packing_certification),
        ("height identities", height_identities),
        ("variance growth contrast", variance_contrast),
        ("Green decay and isoperimetry", decay_and_isoperimetry),
        ("correlation decay", correlation_decay),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (i, (name, f)) in checks.iter().enumerate() {
        let tag = format!("criterion {:02}", i + 1);
        if !filter.is_empty() && !filter.iter().any(|p| tag.contains(p.as_str()) || name.contains(p.as_str())) {
            continue;
        }
        let o = f();
        if !o.passed {
            failed += 1;
        }
        println!("{tag} {} {name}: {}", if o.passed { "PASS" } else { "FAIL" }, o.detail);
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
