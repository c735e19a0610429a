//! Regular `{p,q}` patches grown by face layers, square grids and
//! exhaustions by concentric sub-patches.

use std::collections::VecDeque;

use super::graph::{FaceId, PatchMap, RotationPlanarGraph, VertexId};
use crate::error::{Error, Result};

/// Curvature class of the `{p,q}` tiling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Geometry {
    Euclidean,
    Hyperbolic,
}

impl Geometry {
    pub fn of(p: usize, q: usize) -> Result<Self> {
        if p < 3 || q < 3 {
            return Err(Error::InvalidParameter(format!("{{{p},{q}}}: p and q must be at least 3")));
        }
        // 1/p + 1/q compared with 1/2 in integers.
        match (2 * (p + q)).cmp(&(p * q)) {
            std::cmp::Ordering::Greater => Err(Error::InvalidParameter(format!(
                "{{{p},{q}}} is spherical; need 1/p + 1/q <= 1/2"
            ))),
            std::cmp::Ordering::Equal => Ok(Geometry::Euclidean),
            std::cmp::Ordering::Less => Ok(Geometry::Hyperbolic),
        }
    }
}

/// A `{p,q}` patch: `p`-gon faces, interior vertices of degree `q`.
///
/// Depth 0 is a single face; depth `k + 1` adds every face sharing a vertex
/// with depth `k`. Vertices are numbered in the order they are created.
pub fn build_pq_tiling(p: usize, q: usize, depth: usize) -> Result<RotationPlanarGraph> {
    Geometry::of(p, q)?;
    let mut faces: Vec<Vec<VertexId>> = vec![(0..p).collect()];
    let mut n = p;
    for _ in 0..depth {
        let g = RotationPlanarGraph::from_faces(n, &faces)?;
        let (new_faces, new_n) = grow_layer(&g, p, q, n)?;
        faces.extend(new_faces);
        n = new_n;
    }
    RotationPlanarGraph::from_faces(n, &faces)
}

fn grow_layer(
    g: &RotationPlanarGraph,
    p: usize,
    q: usize,
    mut n: usize,
) -> Result<(Vec<Vec<VertexId>>, usize)> {
    let bv = g.boundary_vertices();
    let m = bv.len();
    let missing: Vec<usize> = bv
        .iter()
        .map(|&v| {
            let c = g.interior_face_count(v);
            if c >= q {
                Err(Error::InvalidGraph(format!("boundary vertex {v} already has {c} faces")))
            } else {
                Ok(q - c)
            }
        })
        .collect::<Result<_>>()?;
    let i0 = missing
        .iter()
        .position(|&k| k >= 2)
        .ok_or_else(|| Error::InvalidGraph("layer would close the surface".into()))?;

    // Chains of old boundary vertices touched by each new face, in the
    // counterclockwise order of the new faces around the patch.
    let mut chains: Vec<Vec<VertexId>> = Vec::new();
    let mut i = i0;
    loop {
        for _ in 0..missing[i] - 2 {
            chains.push(vec![bv[i]]);
        }
        let mut chain = vec![bv[i]];
        let mut j = i;
        loop {
            j = (j + 1) % m;
            chain.push(bv[j]);
            if missing[j] != 1 {
                break;
            }
        }
        chains.push(chain);
        i = j;
        if i == i0 {
            break;
        }
    }
    let k = chains.len();
    // Slot s sits between chains[s] and chains[s + 1].
    let mut parent: Vec<usize> = (0..k).collect();
    fn find(parent: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while parent[r] != r {
            r = parent[r];
        }
        let mut y = x;
        while parent[y] != r {
            let t = parent[y];
            parent[y] = r;
            y = t;
        }
        r
    }
    let mut value: Vec<Option<VertexId>> = vec![None; k];
    for (s, chain) in chains.iter().enumerate() {
        let l = chain.len();
        if l > p {
            return Err(Error::InvalidGraph(format!("new face touches {l} boundary vertices, p = {p}")));
        }
        let before = (s + k - 1) % k;
        if p - l == 1 {
            let (a, b) = (find(&mut parent, before), find(&mut parent, s));
            parent[a] = b;
        }
    }
    for (s, chain) in chains.iter().enumerate() {
        if chain.len() == p {
            let before = (s + k - 1) % k;
            for (slot, v) in [(before, chain[p - 1]), (s, chain[0])] {
                let r = find(&mut parent, slot);
                match value[r] {
                    Some(w) if w != v => {
                        return Err(Error::InvalidGraph("inconsistent closing face".into()))
                    }
                    _ => value[r] = Some(v),
                }
            }
        }
    }
    let mut out = Vec::with_capacity(k);
    for (s, chain) in chains.iter().enumerate() {
        let l = chain.len();
        let before = (s + k - 1) % k;
        let mut cyc: Vec<VertexId> = chain.iter().rev().copied().collect();
        let extra = p - l;
        if extra >= 1 {
            let r = find(&mut parent, before);
            let v = *value[r].get_or_insert_with(|| {
                n += 1;
                n - 1
            });
            cyc.push(v);
        }
        if extra >= 2 {
            for _ in 0..extra - 2 {
                cyc.push(n);
                n += 1;
            }
            let r = find(&mut parent, s);
            let v = *value[r].get_or_insert_with(|| {
                n += 1;
                n - 1
            });
            cyc.push(v);
        }
        out.push(cyc);
    }
    Ok((out, n))
}

/// `n x n` grid of unit squares. Vertex `(i, j)` has id `j (n + 1) + i`,
/// face `(i, j)` has id `j n + i`. The root face is the central cell.
pub fn square_grid(n: usize) -> Result<RotationPlanarGraph> {
    if n == 0 {
        return Err(Error::InvalidParameter("square_grid needs n >= 1".into()));
    }
    let id = |i: usize, j: usize| j * (n + 1) + i;
    let mut faces = Vec::with_capacity(n * n);
    for j in 0..n {
        for i in 0..n {
            faces.push(vec![id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)]);
        }
    }
    let mut g = RotationPlanarGraph::from_faces((n + 1) * (n + 1), &faces)?;
    let c = (n - 1) / 2;
    g.set_root_face(c * n + c)?;
    Ok(g)
}

/// Face-layer depth of every interior face, measured from the root face.
/// The outer face gets `usize::MAX`.
pub fn face_layers(g: &RotationPlanarGraph) -> Vec<usize> {
    let mut depth = vec![usize::MAX; g.n_faces()];
    let mut vertex_done = vec![false; g.n_vertices()];
    let root = g.root_face();
    depth[root] = 0;
    let mut frontier = vec![root];
    let mut d = 0;
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for &f in &frontier {
            for v in g.face_vertices(f) {
                if vertex_done[v] {
                    continue;
                }
                vertex_done[v] = true;
                for h in g.outgoing(v) {
                    let h2 = g.face(h);
                    if h2 != g.outer_face() && depth[h2] == usize::MAX {
                        depth[h2] = d + 1;
                        next.push(h2);
                    }
                }
            }
        }
        frontier = next;
        d += 1;
    }
    depth
}

/// One step of an exhaustion: the sub-patch of faces within a face-layer
/// radius of the root face, holes filled.
#[derive(Debug, Clone)]
pub struct ExhaustionStep {
    pub radius: usize,
    pub graph: RotationPlanarGraph,
    pub map: PatchMap,
}

pub fn exhaustion(g: &RotationPlanarGraph, schedule: &[usize]) -> Result<Vec<ExhaustionStep>> {
    if schedule.is_empty() {
        return Err(Error::InvalidParameter("empty exhaustion schedule".into()));
    }
    if schedule.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter("exhaustion radii must be strictly increasing".into()));
    }
    let depth = face_layers(g);
    schedule
        .iter()
        .map(|&r| {
            let mut chosen: Vec<bool> = depth.iter().map(|&d| d <= r).collect();
            fill_holes(g, &mut chosen);
            let faces: Vec<FaceId> = (0..g.n_faces()).filter(|&f| chosen[f]).collect();
            let (graph, map) = g.subpatch(&faces)?;
            Ok(ExhaustionStep { radius: r, graph, map })
        })
        .collect()
}

/// Adds every face not reachable from the outer face through unchosen faces.
fn fill_holes(g: &RotationPlanarGraph, chosen: &mut [bool]) {
    let outer = g.outer_face();
    let mut reach = vec![false; g.n_faces()];
    reach[outer] = true;
    let mut queue = VecDeque::from([outer]);
    while let Some(f) = queue.pop_front() {
        for h in g.face_half_edges(f) {
            let f2 = g.face(h ^ 1);
            if !reach[f2] && !chosen[f2] {
                reach[f2] = true;
                queue.push_back(f2);
            }
        }
    }
    for f in 0..g.n_faces() {
        if f != outer && !reach[f] {
            chosen[f] = true;
        }
    }
}
