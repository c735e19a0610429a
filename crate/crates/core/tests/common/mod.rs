//! Brute-force oracles shared by the integration tests.
#![allow(dead_code)]

use std::sync::Arc;

use hypdimer::lattice::{build_pq_tiling, square_grid, Geometry, RotationPlanarGraph};
use hypdimer::packing::{solve_double_packing, BoundaryCondition, PackingOptions};
use hypdimer::potential::Network;
use hypdimer::temperley::{default_corners, superpose, temperley_trim, two_corner_region, Region, SuperpositionGraph};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Every perfect matching of the region as `(white, black)` lists.
pub fn enumerate_matchings(region: &Region) -> Vec<Vec<(usize, usize)>> {
    fn go(region: &Region, i: usize, used: &mut Vec<bool>, cur: &mut Vec<(usize, usize)>, out: &mut Vec<Vec<(usize, usize)>>) {
        if i == region.whites.len() {
            out.push(cur.clone());
            return;
        }
        let w = region.whites[i];
        for b in region.neighbors(w) {
            if !used[b] {
                used[b] = true;
                cur.push((w, b));
                go(region, i + 1, used, cur, out);
                cur.pop();
                used[b] = false;
            }
        }
    }
    let mut out = Vec::new();
    if region.whites.len() == region.blacks.len() {
        go(region, 0, &mut vec![false; region.sg.n_black()], &mut Vec::new(), &mut out);
    }
    out
}

pub fn matching_weight(sg: &SuperpositionGraph, m: &[(usize, usize)]) -> f64 {
    m.iter().map(|&(w, b)| sg.edge_weight(w, b)).product()
}

pub fn weighted_matching_sum(region: &Region) -> f64 {
    enumerate_matchings(region).iter().map(|m| matching_weight(&region.sg, m)).sum()
}

fn find(p: &mut [usize], x: usize) -> usize {
    let mut r = x;
    while p[r] != r {
        r = p[r];
    }
    let mut y = x;
    while p[y] != r {
        let n = p[y];
        p[y] = r;
        y = n;
    }
    r
}

/// Every spanning tree of the network as a sorted list of edge ids.
pub fn enumerate_spanning_trees(net: &Network) -> Vec<Vec<usize>> {
    let n = net.n;
    let m = net.edges.len();
    let mut out = Vec::new();
    if n == 1 {
        return vec![Vec::new()];
    }
    let mut chosen = Vec::new();
    fn go(net: &Network, start: usize, chosen: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        let n = net.n;
        if chosen.len() == n - 1 {
            let mut p: Vec<usize> = (0..n).collect();
            for &e in chosen.iter() {
                let (a, b, _) = net.edges[e];
                let (ra, rb) = (find(&mut p, a), find(&mut p, b));
                if ra == rb {
                    return;
                }
                p[ra] = rb;
            }
            out.push(chosen.clone());
            return;
        }
        for e in start..net.edges.len() {
            if net.edges.len() - e < n - 1 - chosen.len() {
                break;
            }
            chosen.push(e);
            go(net, e + 1, chosen, out);
            chosen.pop();
        }
    }
    let _ = m;
    go(net, 0, &mut chosen, &mut out);
    out
}

pub fn tree_weight(net: &Network, t: &[usize]) -> f64 {
    t.iter().map(|&e| net.edges[e].2).product()
}

/// Expected visits to `v` of the walk from `u` killed on `absorbing`, by
/// summing powers of the transition matrix.
pub fn absorbing_chain_visits(net: &Network, absorbing: &[usize], u: usize, v: usize) -> f64 {
    let tot = net.total_conductance();
    let mut p = vec![0.0; net.n];
    p[u] = 1.0;
    let mut visits = 0.0;
    for _ in 0..200_000 {
        if absorbing.contains(&v) {
            break;
        }
        visits += p[v];
        let mut q = vec![0.0; net.n];
        for &(a, b, c) in &net.edges {
            if a == b {
                continue;
            }
            if !absorbing.contains(&a) {
                q[b] += p[a] * c / tot[a];
            }
            if !absorbing.contains(&b) {
                q[a] += p[b] * c / tot[b];
            }
        }
        p = q;
        if p.iter().sum::<f64>() < 1e-17 {
            break;
        }
    }
    visits
}

pub fn random_weights<R: Rng>(g: &mut RotationPlanarGraph, rng: &mut R) {
    let nu: Vec<f64> = (0..g.n_edges()).map(|_| rng.random_range(0.5..2.0)).collect();
    let nd: Vec<f64> = (0..g.n_edges()).map(|_| rng.random_range(0.5..2.0)).collect();
    g.set_weights(nu, nd).unwrap();
}

pub fn packed(g: &RotationPlanarGraph, geometry: Geometry) -> Arc<SuperpositionGraph> {
    let opts = PackingOptions::new(geometry, BoundaryCondition::UnitRadius);
    let pk = solve_double_packing(g, &opts).unwrap();
    Arc::new(superpose(g, &pk, 1e-8).unwrap())
}

/// Connected sets of `k` interior faces grown from random seeds.
pub fn random_face_set<R: Rng>(g: &RotationPlanarGraph, k: usize, deep: bool, rng: &mut R) -> Vec<usize> {
    let faces: Vec<usize> = g
        .interior_faces()
        .filter(|&f| !deep || g.face_vertices(f).iter().all(|&v| !g.is_boundary_vertex(v)))
        .collect();
    if faces.is_empty() {
        return Vec::new();
    }
    let mut set = vec![faces[rng.random_range(0..faces.len())]];
    while set.len() < k {
        let cand: Vec<usize> = faces
            .iter()
            .copied()
            .filter(|f| !set.contains(f))
            .filter(|&f| {
                let vs = g.face_vertices(f);
                set.iter().any(|&s| {
                    let ws = g.face_vertices(s);
                    vs.iter().filter(|v| ws.contains(v)).count() >= 2
                })
            })
            .collect();
        if cand.is_empty() {
            break;
        }
        set.push(cand[rng.random_range(0..cand.len())]);
    }
    set
}

/// Random Temperley and two-corner regions with at most `max_whites`
/// whites and random weights.
pub fn random_small_regions(seed: u64, count: usize, max_whites: usize) -> Vec<Region> {
    let mut r = rng(seed);
    let mut out = Vec::new();
    let hosts: Vec<(RotationPlanarGraph, Geometry)> = vec![
        (square_grid(3).unwrap(), Geometry::Euclidean),
        (square_grid(4).unwrap(), Geometry::Euclidean),
        (build_pq_tiling(3, 7, 1).unwrap(), Geometry::Hyperbolic),
        (build_pq_tiling(4, 5, 1).unwrap(), Geometry::Hyperbolic),
        (build_pq_tiling(3, 6, 1).unwrap(), Geometry::Euclidean),
        (square_grid(5).unwrap(), Geometry::Euclidean),
        (build_pq_tiling(3, 7, 2).unwrap(), Geometry::Hyperbolic),
        (build_pq_tiling(4, 5, 2).unwrap(), Geometry::Hyperbolic),
    ];
    let mut attempts = 0;
    while out.len() < count && attempts < 50 * count {
        attempts += 1;
        let (host, geom) = &hosts[r.random_range(0..hosts.len())];
        let two_corner = r.random_bool(0.5);
        let k = r.random_range(1..=4);
        let faces = random_face_set(host, k, two_corner, &mut r);
        if faces.is_empty() {
            continue;
        }
        let region = if two_corner {
            let mut h = host.clone();
            random_weights(&mut h, &mut r);
            let sg = packed(&h, *geom);
            // Corners on the boundary of the inner faces.
            let mut vs: Vec<usize> = faces.iter().flat_map(|&f| sg.graph.face_vertices(f)).collect();
            vs.sort_unstable();
            vs.dedup();
            let (v1, v2) = match default_corners(&sg.graph, &faces) {
                Ok(c) if r.random_bool(0.5) => c,
                _ => (vs[r.random_range(0..vs.len())], vs[r.random_range(0..vs.len())]),
            };
            match two_corner_region(sg, &faces, v1, v2) {
                Ok(reg) => reg,
                Err(_) => continue,
            }
        } else {
            let Ok((mut sub, _)) = host.subpatch(&faces) else { continue };
            random_weights(&mut sub, &mut r);
            let sg = packed(&sub, *geom);
            let bd = sg.graph.boundary_vertices();
            let b0 = bd[r.random_range(0..bd.len())];
            match temperley_trim(sg, b0) {
                Ok(reg) => reg,
                Err(_) => continue,
            }
        };
        if region.is_balanced() && region.whites.len() <= max_whites && !region.whites.is_empty() {
            out.push(region);
        }
    }
    out
}
