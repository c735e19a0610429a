//! Antisymmetric edge functions, star and cycle projections, transfer
//! currents and spanning-forest marginals.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::{laplacian, Flavor, Network};
use crate::error::{Error, Result};

/// Value per edge in the orientation `(tail, head)` of the network edge;
/// the reversed edge carries the negative.
pub type EdgeFunction = Vec<f64>;

/// `<a, b>_R = sum_e R(e) a(e) b(e)` with `R = 1 / C`.
pub fn energy_inner(net: &Network, a: &[f64], b: &[f64]) -> f64 {
    net.edges.iter().zip(a.iter().zip(b)).map(|(e, (x, y))| x * y / e.2).sum()
}

/// Net outflow at each vertex.
pub fn divergence(net: &Network, theta: &[f64]) -> Vec<f64> {
    let mut d = vec![0.0; net.n];
    for (&(a, b, _), t) in net.edges.iter().zip(theta) {
        d[a] += t;
        d[b] -= t;
    }
    d
}

/// Unit flow along edge `e`.
pub fn unit(net: &Network, e: usize) -> EdgeFunction {
    let mut t = vec![0.0; net.n_edges()];
    t[e] = 1.0;
    t
}

/// `C grad f`, i.e. `C(e) (f(tail) - f(head))`.
pub fn current_of(net: &Network, f: &[f64]) -> EdgeFunction {
    net.edges.iter().map(|&(a, b, c)| c * (f[a] - f[b])).collect()
}

/// Inverse of the Laplacian grounded at the smallest vertex of each
/// component.
#[derive(Debug, Clone)]
pub struct GroundedInverse {
    index: Vec<Option<usize>>,
    inv: DMatrix<f64>,
}

impl GroundedInverse {
    pub fn new(net: &Network) -> Result<Self> {
        let comp = net.components();
        let mut seen = vec![false; net.n];
        let mut ground = Vec::new();
        for v in 0..net.n {
            if !seen[comp[v]] {
                seen[comp[v]] = true;
                ground.push(v);
            }
        }
        let l = laplacian(net, Flavor::Dirichlet { absorbing: ground })?;
        let inv = if l.vertices.is_empty() {
            DMatrix::zeros(0, 0)
        } else {
            l.matrix
                .clone()
                .cholesky()
                .ok_or_else(|| Error::Singular("grounded Laplacian".into()))?
                .inverse()
        };
        Ok(GroundedInverse { index: l.index, inv })
    }

    fn at(&self, u: usize, v: usize) -> f64 {
        match (self.index[u], self.index[v]) {
            (Some(i), Some(j)) => self.inv[(i, j)],
            _ => 0.0,
        }
    }

    /// Potential with `L phi = rho`; `rho` must sum to zero on every component.
    pub fn potential(&self, rho: &[f64]) -> Vec<f64> {
        let m = self.inv.nrows();
        let mut r = DVector::zeros(m);
        for (v, &x) in rho.iter().enumerate() {
            if let Some(i) = self.index[v] {
                r[i] = x;
            }
        }
        let p = &self.inv * r;
        (0..rho.len()).map(|v| self.index[v].map_or(0.0, |i| p[i])).collect()
    }
}

/// Orthogonal projection onto the span of the stars.
pub fn star_project(net: &Network, theta: &[f64]) -> Result<EdgeFunction> {
    let gi = GroundedInverse::new(net)?;
    Ok(current_of(net, &gi.potential(&divergence(net, theta))))
}

/// Fundamental cycles of the breadth-first spanning forest, one per
/// non-tree edge (loops included), as signed edge indicator vectors.
pub fn cycle_basis(net: &Network) -> Vec<Vec<(usize, f64)>> {
    let adj = net.adjacency();
    let mut parent: Vec<Option<(usize, usize)>> = vec![None; net.n];
    let mut depth = vec![usize::MAX; net.n];
    let mut tree = vec![false; net.n_edges()];
    for s in 0..net.n {
        if depth[s] != usize::MAX {
            continue;
        }
        depth[s] = 0;
        let mut queue = std::collections::VecDeque::from([s]);
        while let Some(x) = queue.pop_front() {
            for &(e, y) in &adj[x] {
                if depth[y] == usize::MAX {
                    depth[y] = depth[x] + 1;
                    parent[y] = Some((x, e));
                    tree[e] = true;
                    queue.push_back(y);
                }
            }
        }
    }
    // Signed path from x up to the root: edge traversed from child to parent.
    let up = |mut x: usize, out: &mut Vec<(usize, f64)>, sign: f64| {
        let mut path = Vec::new();
        while let Some((p, e)) = parent[x] {
            let dir = if net.edges[e].0 == x { 1.0 } else { -1.0 };
            path.push((x, e, dir * sign));
            x = p;
        }
        out.extend(path.into_iter().map(|(_, e, s)| (e, s)));
    };
    let mut cycles = Vec::new();
    for (e, &(a, b, _)) in net.edges.iter().enumerate() {
        if tree[e] {
            continue;
        }
        // a -> b along e, then b -> root, then root -> a.
        let mut z = vec![(e, 1.0)];
        if a != b {
            up(b, &mut z, 1.0);
            up(a, &mut z, -1.0);
        }
        let mut dense = std::collections::BTreeMap::new();
        for (i, s) in z {
            *dense.entry(i).or_insert(0.0) += s;
        }
        cycles.push(dense.into_iter().filter(|&(_, s)| s != 0.0).collect());
    }
    cycles
}

/// Orthogonal projection onto the cycle space by normal equations on the
/// fundamental cycles.
pub fn cycle_project(net: &Network, theta: &[f64]) -> Result<EdgeFunction> {
    let cycles = cycle_basis(net);
    let k = cycles.len();
    if k == 0 {
        return Ok(vec![0.0; net.n_edges()]);
    }
    let r: Vec<f64> = net.edges.iter().map(|e| 1.0 / e.2).collect();
    let mut gram = DMatrix::<f64>::zeros(k, k);
    let mut rhs = DVector::<f64>::zeros(k);
    let mut dense = vec![0.0; net.n_edges()];
    for (i, ci) in cycles.iter().enumerate() {
        for &(e, s) in ci {
            dense[e] = s;
            rhs[i] += s * r[e] * theta[e];
        }
        for (j, cj) in cycles.iter().enumerate() {
            gram[(i, j)] = cj.iter().map(|&(e, s)| s * dense[e] * r[e]).sum::<f64>();
        }
        for &(e, _) in ci {
            dense[e] = 0.0;
        }
    }
    let coef = gram
        .cholesky()
        .ok_or_else(|| Error::Singular("cycle Gram matrix".into()))?
        .solve(&rhs);
    let mut out = vec![0.0; net.n_edges()];
    for (i, ci) in cycles.iter().enumerate() {
        for &(e, s) in ci {
            out[e] += coef[i] * s;
        }
    }
    Ok(out)
}

/// Transfer-current matrix `Y(e, f) = (P_star chi_e)(f)` of a network.
#[derive(Debug, Clone)]
pub struct TransferCurrent {
    pub net: Network,
    gi: GroundedInverse,
}

impl TransferCurrent {
    pub fn new(net: &Network) -> Result<Self> {
        Ok(TransferCurrent { net: net.clone(), gi: GroundedInverse::new(net)? })
    }

    pub fn y(&self, e: usize, f: usize) -> f64 {
        let (te, he, _) = self.net.edges[e];
        let (tf, hf, cf) = self.net.edges[f];
        if te == he || tf == hf {
            return 0.0;
        }
        let g = |a, b| self.gi.at(a, b);
        cf * (g(tf, te) - g(tf, he) - g(hf, te) + g(hf, he))
    }

    /// Probability that every listed edge lies in the weighted spanning
    /// forest; exactly zero when the edges contain a cycle.
    pub fn tree_cylinder_prob(&self, edges: &[usize]) -> f64 {
        if contains_cycle(self.net.n, edges.iter().map(|&e| (self.net.edges[e].0, self.net.edges[e].1))) {
            return 0.0;
        }
        let k = edges.len();
        if k == 0 {
            return 1.0;
        }
        DMatrix::from_fn(k, k, |i, j| self.y(edges[i], edges[j])).determinant()
    }

    pub fn marginals(&self) -> Vec<f64> {
        (0..self.net.n_edges()).map(|e| self.y(e, e)).collect()
    }
}

pub fn transfer_current(net: &Network, e: usize, f: usize) -> Result<f64> {
    Ok(TransferCurrent::new(net)?.y(e, f))
}

pub fn tree_cylinder_prob(net: &Network, edges: &[usize]) -> Result<f64> {
    Ok(TransferCurrent::new(net)?.tree_cylinder_prob(edges))
}

pub(crate) fn contains_cycle(n: usize, edges: impl Iterator<Item = (usize, usize)>) -> bool {
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for (a, b) in edges {
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra == rb {
            return true;
        }
        parent[ra] = rb;
    }
    false
}

/// Edge marginals of the spanning forest with the vertices of `wired`
/// identified; edges with both ends wired get 0.
pub fn mixed_boundary_forest(net: &Network, wired: &[usize]) -> Result<Vec<f64>> {
    if wired.len() <= 1 {
        return Ok(TransferCurrent::new(net)?.marginals());
    }
    let (c, _, _, emap) = net.contract(wired);
    let m = TransferCurrent::new(&c)?.marginals();
    Ok(emap.iter().map(|e| e.map_or(0.0, |i| m[i])).collect())
}

#[derive(Debug, Clone, Serialize)]
pub struct ForestSandwich {
    pub wired: Vec<f64>,
    pub mixed: Vec<f64>,
    pub free: Vec<f64>,
    /// Edges with at least one endpoint off the boundary.
    pub interior_edges: Vec<usize>,
    /// Largest of `wired - mixed` and `mixed - free` over interior edges.
    pub max_violation: f64,
}

/// Wired, mixed (wired on `part` only) and free marginals side by side.
pub fn forest_sandwich(net: &Network, boundary: &[usize], part: &[usize]) -> Result<ForestSandwich> {
    let wired = mixed_boundary_forest(net, boundary)?;
    let mixed = mixed_boundary_forest(net, part)?;
    let free = mixed_boundary_forest(net, &[])?;
    let mut on_boundary = vec![false; net.n];
    for &v in boundary {
        on_boundary[v] = true;
    }
    let interior_edges: Vec<usize> =
        (0..net.n_edges()).filter(|&e| !(on_boundary[net.edges[e].0] && on_boundary[net.edges[e].1])).collect();
    let max_violation = interior_edges
        .iter()
        .map(|&e| (wired[e] - mixed[e]).max(mixed[e] - free[e]))
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(ForestSandwich { wired, mixed, free, interior_edges, max_violation })
}

#[derive(Debug, Clone, Serialize)]
pub struct AddedEdgeCurrent {
    /// Current on the network edges followed by the added edge `b -> b0`.
    pub theta: EdgeFunction,
    /// `<theta, chi_(b, b0)>_R`, the share of the unit flow on the added edge.
    pub diagnostic: f64,
}

/// Star projection of the unit flow on an added unit-conductance edge `b -> b0`.
pub fn added_edge_current(net: &Network, b: usize, b0: usize) -> Result<AddedEdgeCurrent> {
    if b == b0 || b >= net.n || b0 >= net.n {
        return Err(Error::InvalidParameter(format!("invalid endpoints ({b}, {b0})")));
    }
    let mut edges = net.edges.clone();
    edges.push((b, b0, 1.0));
    let aug = Network { n: net.n, edges };
    let chi = unit(&aug, aug.n_edges() - 1);
    let theta = star_project(&aug, &chi)?;
    let diagnostic = energy_inner(&aug, &theta, &chi);
    Ok(AddedEdgeCurrent { theta, diagnostic })
}

/// Splits `f` into `g + h` with `g = 0` on `boundary` and `h` harmonic off it.
pub fn harmonic_decompose(net: &Network, boundary: &[usize], f: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let l = laplacian(net, Flavor::Dirichlet { absorbing: boundary.to_vec() })?;
    let mut rhs = DVector::zeros(l.vertices.len());
    for &(a, b, c) in &net.edges {
        match (l.index[a], l.index[b]) {
            (Some(i), None) => rhs[i] += c * f[b],
            (None, Some(j)) => rhs[j] += c * f[a],
            _ => {}
        }
    }
    let sol = if l.vertices.is_empty() {
        DVector::zeros(0)
    } else {
        l.matrix
            .clone()
            .cholesky()
            .ok_or_else(|| Error::Singular("a component has no boundary vertex".into()))?
            .solve(&rhs)
    };
    let h: Vec<f64> = (0..net.n).map(|v| l.index[v].map_or(f[v], |i| sol[i])).collect();
    let g = f.iter().zip(&h).map(|(a, b)| a - b).collect();
    Ok((g, h))
}
