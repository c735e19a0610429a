//! Finite-patch diagnostics: return probabilities, isoperimetric scans,
//! Green decay and Green values along an exhaustion.

use std::collections::{BTreeSet, HashSet};

use serde::Serialize;

use super::{laplacian, Flavor, GreenTable, Network};
use crate::error::{Error, Result};
use crate::lattice::{exhaustion, RotationPlanarGraph, VertexId};

#[derive(Debug, Clone, Serialize)]
pub struct SpectralEstimate {
    /// `p_{2n}(x, x)` for `n = 1..=n_max`.
    pub return_probabilities: Vec<f64>,
    pub rho_hat: f64,
}

/// Return probabilities of the walk that steps along an edge with
/// probability `C(e) / max(total(x), degree)` and dies otherwise.
pub fn spectral_radius_estimate(net: &Network, x: usize, n_max: usize, degree: Option<f64>) -> Result<SpectralEstimate> {
    if x >= net.n || n_max == 0 {
        return Err(Error::InvalidParameter("start vertex or step count".into()));
    }
    let tot = net.total_conductance();
    let norm: Vec<f64> = tot.iter().map(|&t| t.max(degree.unwrap_or(0.0))).collect();
    let adj = net.adjacency();
    let mut p = vec![0.0; net.n];
    p[x] = 1.0;
    let mut returns = Vec::with_capacity(n_max);
    for step in 1..=2 * n_max {
        let mut q = vec![0.0; net.n];
        for (u, &mass) in p.iter().enumerate() {
            if mass == 0.0 {
                continue;
            }
            for &(e, v) in &adj[u] {
                q[v] += mass * net.edges[e].2 / norm[u];
            }
        }
        p = q;
        if step % 2 == 0 {
            returns.push(p[x]);
        }
    }
    let n = returns.len();
    let rho_hat = returns[n - 1].powf(1.0 / (2.0 * n as f64));
    Ok(SpectralEstimate { return_probabilities: returns, rho_hat })
}

#[derive(Debug, Clone, Serialize)]
pub struct IsoperimetricScan {
    /// Full vertex degree used for `|dK| = q|K| - 2|E(K)|`.
    pub degree: usize,
    /// Smallest `|dK| / |K|` found for each size `1..=size_cap`.
    pub by_size: Vec<f64>,
    /// Minimum over all sizes.
    pub constant: f64,
}

/// Beam search over connected sets of interior vertices of size at most
/// `size_cap`, keeping the `beam` sets with fewest boundary edges per size.
pub fn isoperimetric_scan(g: &RotationPlanarGraph, size_cap: usize, beam: usize) -> Result<IsoperimetricScan> {
    let q = (0..g.n_vertices()).map(|v| g.degree(v)).max().unwrap_or(0);
    let interior: Vec<bool> = (0..g.n_vertices()).map(|v| !g.is_boundary_vertex(v) && g.degree(v) == q).collect();
    if size_cap == 0 || !interior.iter().any(|&b| b) {
        return Err(Error::InvalidParameter("no interior vertex to scan".into()));
    }
    let nbrs: Vec<Vec<VertexId>> = (0..g.n_vertices()).map(|v| g.neighbors(v)).collect();
    let inner_edges = |s: &BTreeSet<VertexId>| -> usize {
        s.iter().map(|&v| nbrs[v].iter().filter(|u| s.contains(u)).count()).sum::<usize>() / 2
    };
    let mut level: Vec<(usize, BTreeSet<VertexId>)> =
        (0..g.n_vertices()).filter(|&v| interior[v]).map(|v| (q, BTreeSet::from([v]))).collect();
    level.sort_by_key(|x| x.0);
    level.truncate(beam);
    let mut by_size = vec![q as f64];
    for k in 2..=size_cap {
        let mut seen = HashSet::new();
        let mut next = Vec::new();
        for (_, s) in &level {
            for &v in s {
                for &u in &nbrs[v] {
                    if !interior[u] || s.contains(&u) {
                        continue;
                    }
                    let mut t = s.clone();
                    t.insert(u);
                    if seen.insert(t.iter().copied().collect::<Vec<_>>()) {
                        let b = q * k - 2 * inner_edges(&t);
                        next.push((b, t));
                    }
                }
            }
        }
        if next.is_empty() {
            break;
        }
        next.sort_by(|a, b| a.0.cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
        next.truncate(beam);
        by_size.push(next[0].0 as f64 / k as f64);
        level = next;
    }
    let constant = by_size.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(IsoperimetricScan { degree: q, by_size, constant })
}

/// Graph carrying a Dirichlet Green function of a patch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GraphSide {
    /// Patch vertices; boundary vertices absorb.
    Primal,
    /// Interior faces; the outer face absorbs.
    Dual,
}

/// Network, absorbing set and full degree of one side of a patch.
pub fn side_network(g: &RotationPlanarGraph, side: GraphSide) -> (Network, Vec<usize>, usize) {
    match side {
        GraphSide::Primal => {
            let d = (0..g.n_vertices()).map(|v| g.degree(v)).max().unwrap_or(0);
            (Network::primal(g), g.boundary_vertices(), d)
        }
        GraphSide::Dual => {
            let d = g.interior_faces().map(|f| g.face_degree(f)).max().unwrap_or(0);
            (Network::dual(g), vec![g.outer_face()], d)
        }
    }
}

/// Graph distances from `s` avoiding the absorbing vertices.
fn bfs(net: &Network, s: usize, absorbing: &[usize]) -> Vec<usize> {
    let adj = net.adjacency();
    let mut d = vec![usize::MAX; net.n];
    d[s] = 0;
    let mut q = std::collections::VecDeque::from([s]);
    while let Some(x) = q.pop_front() {
        for &(_, y) in &adj[x] {
            if d[y] == usize::MAX && !absorbing.contains(&y) {
                d[y] = d[x] + 1;
                q.push_back(y);
            }
        }
    }
    d
}

#[derive(Debug, Clone, Serialize)]
pub struct GreenDecayReport {
    pub side: GraphSide,
    pub source: VertexId,
    /// `(distance, mean of ln G, number of vertices)`.
    pub profile: Vec<(usize, f64, usize)>,
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub rho_hat: f64,
    pub rho_prime: f64,
    /// Vertices where `G > sqrt(D/3) rho'^d / (1 - rho')`.
    pub bound_violations: usize,
}

/// Least squares line through `(x, y)`: slope, intercept and `R^2`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let syy: f64 = y.iter().map(|b| (b - my) * (b - my)).sum();
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    (slope, my - slope * mx, r2)
}

/// Dirichlet Green function of one side of a patch from `source` (default:
/// the root face, or its first interior vertex), its log-linear decay in
/// graph distance, and the geometric bound with
/// `rho' = min(rho_hat + margin, 0.999)`.
pub fn green_decay_check(
    g: &RotationPlanarGraph,
    side: GraphSide,
    source: Option<usize>,
    margin: f64,
) -> Result<GreenDecayReport> {
    let (net, absorbing, full_degree) = side_network(g, side);
    let x = match (source, side) {
        (Some(x), _) => x,
        (None, GraphSide::Dual) => g.root_face(),
        (None, GraphSide::Primal) => *g
            .face_vertices(g.root_face())
            .iter()
            .find(|&&v| !g.is_boundary_vertex(v))
            .ok_or_else(|| Error::InvalidParameter("root face has no interior vertex".into()))?,
    };
    if x >= net.n || absorbing.contains(&x) {
        return Err(Error::InvalidParameter(format!("source {x} is absorbing or out of range")));
    }
    let dist = bfs(&net, x, &absorbing);
    let l = laplacian(&net, Flavor::Dirichlet { absorbing })?;
    let table = GreenTable::new(&l)?;
    let dmax = l.vertices.iter().map(|&v| dist[v]).max().unwrap_or(0);
    let mut sums = vec![(0.0, 0usize); dmax + 1];
    for &y in &l.vertices {
        sums[dist[y]].0 += table.g(x, y).ln();
        sums[dist[y]].1 += 1;
    }
    let profile: Vec<(usize, f64, usize)> =
        sums.iter().enumerate().filter(|(_, s)| s.1 > 0).map(|(d, s)| (d, s.0 / s.1 as f64, s.1)).collect();
    let xs: Vec<f64> = profile.iter().map(|p| p.0 as f64).collect();
    let ys: Vec<f64> = profile.iter().map(|p| p.1).collect();
    let (slope, intercept, r_squared) = linear_fit(&xs, &ys);
    let degree = full_degree as f64;
    let rho_hat = spectral_radius_estimate(&net, x, 2 * net.n.min(200), Some(degree))?.rho_hat;
    let rho_prime = (rho_hat + margin).min(0.999);
    let bound_violations = l
        .vertices
        .iter()
        .filter(|&&y| table.g(x, y) > (degree / 3.0).sqrt() * rho_prime.powi(dist[y] as i32) / (1.0 - rho_prime))
        .count();
    Ok(GreenDecayReport { side, source: x, profile, slope, intercept, r_squared, rho_hat, rho_prime, bound_violations })
}

#[derive(Debug, Clone, Serialize)]
pub struct ExhaustionGreen {
    pub radii: Vec<usize>,
    /// `values[step][pair]`, Dirichlet Green value in the step's patch.
    pub values: Vec<Vec<f64>>,
    pub monotone: bool,
    /// `|G_last - G_previous|` per pair.
    pub final_gap: Vec<f64>,
}

/// Dirichlet Green values of host pairs (vertices or interior faces,
/// following `side`) along a face-layer exhaustion.
pub fn exhaustion_green(
    g: &RotationPlanarGraph,
    side: GraphSide,
    schedule: &[usize],
    pairs: &[(usize, usize)],
) -> Result<ExhaustionGreen> {
    let steps = exhaustion(g, schedule)?;
    let mut values = Vec::with_capacity(steps.len());
    for st in &steps {
        let local: std::collections::BTreeMap<usize, usize> = match side {
            GraphSide::Primal => st.map.host_to_local_vertex(),
            GraphSide::Dual => st
                .map
                .face_map
                .iter()
                .enumerate()
                .filter(|&(f, _)| !st.graph.is_outer(f))
                .map(|(f, &h)| (h, f))
                .collect(),
        };
        let (net, absorbing, _) = side_network(&st.graph, side);
        let l = laplacian(&net, Flavor::Dirichlet { absorbing })?;
        let table = GreenTable::new(&l)?;
        values.push(
            pairs
                .iter()
                .map(|(u, v)| match (local.get(u), local.get(v)) {
                    (Some(&a), Some(&b)) => table.g(a, b),
                    _ => 0.0,
                })
                .collect::<Vec<f64>>(),
        );
    }
    let monotone = values.windows(2).all(|w| w[0].iter().zip(&w[1]).all(|(a, b)| *a <= *b + 1e-12));
    let final_gap = match values.len() {
        0 | 1 => vec![f64::INFINITY; pairs.len()],
        n => values[n - 1].iter().zip(&values[n - 2]).map(|(a, b)| (a - b).abs()).collect(),
    };
    Ok(ExhaustionGreen { radii: steps.iter().map(|s| s.radius).collect(), values, monotone, final_gap })
}
