//! Weighted networks, Laplacians, Green functions and the Green-function
//! route to the inverse Dirac operator.

mod diagnostics;
mod flows;

pub use diagnostics::*;
pub use flows::*;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kasteleyn::{block_structure, DiracMatrix};
use crate::lattice::{EdgeId, RotationPlanarGraph};
use crate::temperley::Region;

/// Finite multigraph with a conductance per edge. Loops are allowed and
/// carry no current.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Network {
    pub n: usize,
    /// `(tail, head, conductance)`.
    pub edges: Vec<(usize, usize, f64)>,
}

impl Network {
    pub fn new(n: usize, edges: Vec<(usize, usize, f64)>) -> Result<Self> {
        for &(a, b, c) in &edges {
            if a >= n || b >= n {
                return Err(Error::InvalidGraph(format!("edge ({a}, {b}) out of range")));
            }
            if !(c > 0.0 && c.is_finite()) {
                return Err(Error::InvalidParameter(format!("conductance {c} must be positive")));
            }
        }
        Ok(Network { n, edges })
    }

    /// Unit conductances.
    pub fn simple(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        Network::new(n, edges.iter().map(|&(a, b)| (a, b, 1.0)).collect())
    }

    /// Primal graph with conductance `nu / nu_dual`.
    pub fn primal(g: &RotationPlanarGraph) -> Self {
        let edges = (0..g.n_edges())
            .map(|e| {
                let (a, b) = g.endpoints(e);
                (a, b, g.conductance(e))
            })
            .collect();
        Network { n: g.n_vertices(), edges }
    }

    /// Dual graph on all faces (outer included) with conductance `nu_dual / nu`.
    pub fn dual(g: &RotationPlanarGraph) -> Self {
        let edges = (0..g.n_edges())
            .map(|e| {
                let (l, r) = g.edge_faces(e);
                (l, r, 1.0 / g.conductance(e))
            })
            .collect();
        Network { n: g.n_faces(), edges }
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    /// Incident `(edge, other endpoint)` pairs, loops skipped.
    pub fn adjacency(&self) -> Vec<Vec<(usize, usize)>> {
        let mut adj = vec![Vec::new(); self.n];
        for (i, &(a, b, _)) in self.edges.iter().enumerate() {
            if a != b {
                adj[a].push((i, b));
                adj[b].push((i, a));
            }
        }
        adj
    }

    /// Total conductance at each vertex, loops excluded.
    pub fn total_conductance(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.n];
        for &(a, b, c) in &self.edges {
            if a != b {
                d[a] += c;
                d[b] += c;
            }
        }
        d
    }

    pub fn is_connected(&self) -> bool {
        if self.n == 0 {
            return true;
        }
        self.components().iter().all(|&c| c == 0)
    }

    /// Connected component label per vertex.
    pub fn components(&self) -> Vec<usize> {
        let adj = self.adjacency();
        let mut comp = vec![usize::MAX; self.n];
        let mut next = 0;
        for s in 0..self.n {
            if comp[s] != usize::MAX {
                continue;
            }
            comp[s] = next;
            let mut stack = vec![s];
            while let Some(x) = stack.pop() {
                for &(_, y) in &adj[x] {
                    if comp[y] == usize::MAX {
                        comp[y] = next;
                        stack.push(y);
                    }
                }
            }
            next += 1;
        }
        comp
    }

    /// Identifies the vertices of `set` into one new vertex (the last id);
    /// edges inside `set` disappear. Returns the network, the new vertex, the
    /// vertex map and the edge map (`None` for removed edges).
    pub fn contract(&self, set: &[usize]) -> (Network, usize, Vec<usize>, Vec<Option<usize>>) {
        let mut inside = vec![false; self.n];
        for &v in set {
            inside[v] = true;
        }
        let mut vmap = vec![0; self.n];
        let mut k = 0;
        for v in 0..self.n {
            if !inside[v] {
                vmap[v] = k;
                k += 1;
            }
        }
        let z = k;
        for v in 0..self.n {
            if inside[v] {
                vmap[v] = z;
            }
        }
        let mut edges = Vec::new();
        let mut emap = Vec::with_capacity(self.edges.len());
        for &(a, b, c) in &self.edges {
            if inside[a] && inside[b] {
                emap.push(None);
            } else {
                emap.push(Some(edges.len()));
                edges.push((vmap[a], vmap[b], c));
            }
        }
        (Network { n: z + 1, edges }, z, vmap, emap)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Flavor {
    /// Rows and columns of the absorbing vertices are removed.
    Dirichlet { absorbing: Vec<usize> },
    /// Dirichlet at the single root.
    Neumann { root: usize },
    /// Full singular Laplacian.
    Free,
}

/// Laplacian `(Lf)(x) = sum_y C(x,y) (f(x) - f(y))` on the active vertices.
#[derive(Debug, Clone)]
pub struct LaplacianOperator {
    pub flavor: Flavor,
    /// Network vertex of each row.
    pub vertices: Vec<usize>,
    /// Row of each network vertex, `None` when absorbed.
    pub index: Vec<Option<usize>>,
    pub matrix: DMatrix<f64>,
}

pub fn laplacian(net: &Network, flavor: Flavor) -> Result<LaplacianOperator> {
    let mut removed = vec![false; net.n];
    match &flavor {
        Flavor::Dirichlet { absorbing } => {
            for &v in absorbing {
                if v >= net.n {
                    return Err(Error::InvalidParameter(format!("absorbing vertex {v} out of range")));
                }
                removed[v] = true;
            }
        }
        Flavor::Neumann { root } => {
            if *root >= net.n {
                return Err(Error::InvalidParameter(format!("root {root} out of range")));
            }
            removed[*root] = true;
        }
        Flavor::Free => {}
    }
    let vertices: Vec<usize> = (0..net.n).filter(|&v| !removed[v]).collect();
    let mut index = vec![None; net.n];
    for (i, &v) in vertices.iter().enumerate() {
        index[v] = Some(i);
    }
    let mut m = DMatrix::zeros(vertices.len(), vertices.len());
    for &(a, b, c) in &net.edges {
        if a == b {
            continue;
        }
        if let Some(i) = index[a] {
            m[(i, i)] += c;
        }
        if let Some(j) = index[b] {
            m[(j, j)] += c;
        }
        if let (Some(i), Some(j)) = (index[a], index[b]) {
            m[(i, j)] -= c;
            m[(j, i)] -= c;
        }
    }
    Ok(LaplacianOperator { flavor, vertices, index, matrix: m })
}

/// `F(u, v) = L^{-1}(u, v)` together with `G(u, v) = F(u, v) L(v, v)`,
/// the expected number of visits to `v` of the walk started at `u`.
#[derive(Debug, Clone)]
pub struct GreenTable {
    pub flavor: Flavor,
    pub index: Vec<Option<usize>>,
    pub vertices: Vec<usize>,
    pub inverse: DMatrix<f64>,
    pub diagonal: Vec<f64>,
}

impl GreenTable {
    pub fn new(l: &LaplacianOperator) -> Result<Self> {
        if matches!(l.flavor, Flavor::Free) {
            return Err(Error::Singular("free Laplacian has no Green function".into()));
        }
        let chol = l
            .matrix
            .clone()
            .cholesky()
            .ok_or_else(|| Error::Singular("Laplacian is not positive definite; is a boundary missing?".into()))?;
        Ok(GreenTable {
            flavor: l.flavor.clone(),
            index: l.index.clone(),
            vertices: l.vertices.clone(),
            inverse: chol.inverse(),
            diagonal: l.matrix.diagonal().iter().copied().collect(),
        })
    }

    /// `F^v(u)`, zero when either vertex is absorbed.
    pub fn f(&self, u: usize, v: usize) -> f64 {
        match (self.index[u], self.index[v]) {
            (Some(i), Some(j)) => self.inverse[(i, j)],
            _ => 0.0,
        }
    }

    /// `G(u, v)`, zero when either vertex is absorbed.
    pub fn g(&self, u: usize, v: usize) -> f64 {
        match (self.index[u], self.index[v]) {
            (Some(i), Some(j)) => self.inverse[(i, j)] * self.diagonal[j],
            _ => 0.0,
        }
    }

    /// Largest entry of `L F^v - delta_v` over all `v`.
    pub fn delta_residual(&self, l: &LaplacianOperator) -> f64 {
        let r = &l.matrix * &self.inverse - DMatrix::identity(self.vertices.len(), self.vertices.len());
        r.amax()
    }
}

pub fn dirichlet_green(l: &LaplacianOperator, u: usize, v: usize) -> Result<f64> {
    if !matches!(l.flavor, Flavor::Dirichlet { .. }) {
        return Err(Error::InvalidParameter("Dirichlet flavor required".into()));
    }
    green_value(l, u, v)
}

pub fn neumann_green(l: &LaplacianOperator, u: usize, v: usize) -> Result<f64> {
    if !matches!(l.flavor, Flavor::Neumann { .. }) {
        return Err(Error::InvalidParameter("Neumann flavor required".into()));
    }
    green_value(l, u, v)
}

/// Single value by one solve against `delta_v`.
fn green_value(l: &LaplacianOperator, u: usize, v: usize) -> Result<f64> {
    let (Some(i), Some(j)) = (l.index.get(u).copied().flatten(), l.index.get(v).copied().flatten()) else {
        return Ok(0.0);
    };
    let chol = l
        .matrix
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Singular("Laplacian is not positive definite".into()))?;
    let mut rhs = DVector::zeros(l.vertices.len());
    rhs[j] = 1.0;
    let f = chol.solve(&rhs);
    Ok(f[i] * l.matrix[(j, j)])
}

/// Networks carried by the two black classes of a region: present blacks
/// of one class plus a sink standing for every absent neighbor. Edge `i`
/// of both networks is the white `region.whites[i]`.
#[derive(Debug, Clone)]
pub struct WiredNetworks {
    pub primal: Network,
    pub primal_sink: usize,
    /// Black id of each primal network vertex (sink excluded).
    pub primal_blacks: Vec<usize>,
    pub dual: Network,
    pub dual_sink: usize,
    pub dual_blacks: Vec<usize>,
    local: Vec<usize>,
}

impl WiredNetworks {
    /// Network vertex of a present black in the network of its class.
    pub fn vertex_of(&self, b: usize) -> Option<usize> {
        self.local.get(b).copied().filter(|&i| i != usize::MAX)
    }
}

pub fn wired_networks(region: &Region) -> WiredNetworks {
    let sg = &region.sg;
    let g = &sg.graph;
    let primal_blacks: Vec<usize> = region.blacks.iter().copied().filter(|&b| sg.is_primal(b)).collect();
    let dual_blacks: Vec<usize> = region.blacks.iter().copied().filter(|&b| !sg.is_primal(b)).collect();
    let mut pidx = vec![usize::MAX; sg.n_black()];
    for (i, &b) in primal_blacks.iter().enumerate() {
        pidx[b] = i;
    }
    for (i, &b) in dual_blacks.iter().enumerate() {
        pidx[b] = i;
    }
    let (ps, ds) = (primal_blacks.len(), dual_blacks.len());
    let map = |b: Option<usize>, sink: usize| match b {
        Some(b) if region.black_in[b] => pidx[b],
        _ => sink,
    };
    let mut pe = Vec::with_capacity(region.whites.len());
    let mut de = Vec::with_capacity(region.whites.len());
    for &w in &region.whites {
        let [t, h, l, r] = sg.white_neighbors(w);
        let c = g.conductance(w);
        pe.push((map(t, ps), map(h, ps), c));
        de.push((map(l, ds), map(r, ds), 1.0 / c));
    }
    WiredNetworks {
        primal: Network { n: ps + 1, edges: pe },
        primal_sink: ps,
        primal_blacks,
        dual: Network { n: ds + 1, edges: de },
        dual_sink: ds,
        dual_blacks,
        local: pidx,
    }
}

/// Inverse Dirac operator assembled from the Green functions of the two
/// wired networks, for regions without concave corners.
#[derive(Debug, Clone)]
pub struct GreenDirac {
    pub networks: WiredNetworks,
    pub primal: GreenTable,
    pub dual: GreenTable,
}

impl GreenDirac {
    pub fn new(region: &Region) -> Result<Self> {
        let networks = wired_networks(region);
        let lp = laplacian(&networks.primal, Flavor::Neumann { root: networks.primal_sink })?;
        let ld = laplacian(&networks.dual, Flavor::Dirichlet { absorbing: vec![networks.dual_sink] })?;
        Ok(GreenDirac { primal: GreenTable::new(&lp)?, dual: GreenTable::new(&ld)?, networks })
    }
}

/// `D^{-1}(b, w) = sum_{b'} F^{b'}(b) conj(D(w, b'))` over the blacks `b'` of
/// the class of `b` adjacent to `w`; `d` must be the normalized matrix.
pub fn inverse_dirac_via_green(gd: &GreenDirac, d: &DiracMatrix, b: usize, w: EdgeId) -> Result<Complex64> {
    let region = &d.region;
    if b >= region.black_in.len() || !region.black_in[b] {
        return Err(Error::InvalidParameter(format!("black {b} is not in the region")));
    }
    if w >= region.white_in.len() || !region.white_in[w] {
        return Err(Error::InvalidParameter(format!("white {w} is not in the region")));
    }
    let sg = &region.sg;
    let primal = sg.is_primal(b);
    let table = if primal { &gd.primal } else { &gd.dual };
    let u = gd.networks.vertex_of(b).unwrap();
    let mut s = Complex64::new(0.0, 0.0);
    for b2 in region.neighbors(w) {
        if sg.is_primal(b2) != primal {
            continue;
        }
        let v = gd.networks.vertex_of(b2).unwrap();
        let entry = d.entry(w, b2).unwrap();
        s += entry.conj() * table.f(u, v);
    }
    Ok(s)
}

/// Full inverse by the Green route, black x white in region order.
pub fn inverse_dirac_table(d: &DiracMatrix) -> Result<DMatrix<Complex64>> {
    let bs = block_structure(d);
    if bs.k_count != 0 {
        return Err(Error::BadRegion(format!("{} concave corners couple the two classes", bs.k_count)));
    }
    let gd = GreenDirac::new(&d.region)?;
    let r = &d.region;
    let mut m = DMatrix::zeros(r.blacks.len(), r.whites.len());
    for (j, &w) in r.whites.iter().enumerate() {
        for (i, &b) in r.blacks.iter().enumerate() {
            m[(i, j)] = inverse_dirac_via_green(&gd, d, b, w)?;
        }
    }
    Ok(m)
}
