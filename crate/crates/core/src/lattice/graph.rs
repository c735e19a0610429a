//! Half-edge rotation systems for finite planar graphs.
//!
//! Edge `e` owns half-edges `2e` and `2e + 1`, so `twin(h) = h ^ 1`.
//! `next(h)` walks the face lying to the left of `h`; around every vertex the
//! counterclockwise successor of `h` is `twin(prev(h))`.

use std::collections::{BTreeMap, HashMap, VecDeque};

use crate::error::{Error, Result};

pub type VertexId = usize;
pub type HalfEdgeId = usize;
pub type EdgeId = usize;
pub type FaceId = usize;

#[derive(Debug, Clone)]
pub struct RotationPlanarGraph {
    n_vertices: usize,
    origin: Vec<VertexId>,
    next: Vec<HalfEdgeId>,
    prev: Vec<HalfEdgeId>,
    face_of: Vec<FaceId>,
    face_start: Vec<HalfEdgeId>,
    out_edge: Vec<HalfEdgeId>,
    outer_face: FaceId,
    root_face: FaceId,
    nu: Vec<f64>,
    nu_dual: Vec<f64>,
}

#[inline]
pub fn twin(h: HalfEdgeId) -> HalfEdgeId {
    h ^ 1
}

impl RotationPlanarGraph {
    /// Builds a graph from raw half-edge data; `outer` is any half-edge whose
    /// left face is the outer face.
    pub fn from_parts(
        n_vertices: usize,
        origin: Vec<VertexId>,
        next: Vec<HalfEdgeId>,
        outer: HalfEdgeId,
    ) -> Result<Self> {
        let nh = origin.len();
        if nh == 0 || nh % 2 != 0 {
            return Err(Error::InvalidGraph(format!("half-edge count {nh} must be positive and even")));
        }
        if next.len() != nh {
            return Err(Error::InvalidGraph("next/origin length mismatch".into()));
        }
        if outer >= nh {
            return Err(Error::InvalidGraph(format!("outer half-edge {outer} out of range")));
        }
        let mut prev = vec![usize::MAX; nh];
        for h in 0..nh {
            if origin[h] >= n_vertices {
                return Err(Error::InvalidGraph(format!("half-edge {h} has origin {} out of range", origin[h])));
            }
            let n = next[h];
            if n >= nh {
                return Err(Error::InvalidGraph(format!("half-edge {h} has next {n} out of range")));
            }
            if prev[n] != usize::MAX {
                return Err(Error::InvalidGraph(format!("next is not a permutation at {n}")));
            }
            prev[n] = h;
        }
        for h in 0..nh {
            if origin[h ^ 1] == origin[h] {
                return Err(Error::InvalidGraph(format!("half-edge {h} is a loop")));
            }
            if origin[next[h]] != origin[h ^ 1] {
                return Err(Error::InvalidGraph(format!(
                    "next of half-edge {h} does not start at its head"
                )));
            }
        }
        let mut out_edge = vec![usize::MAX; n_vertices];
        for h in 0..nh {
            if out_edge[origin[h]] == usize::MAX {
                out_edge[origin[h]] = h;
            }
        }
        if let Some(v) = out_edge.iter().position(|&h| h == usize::MAX) {
            return Err(Error::InvalidGraph(format!("vertex {v} is isolated")));
        }
        // Each vertex must carry a single rotation cycle.
        let mut seen = vec![false; nh];
        for v in 0..n_vertices {
            let start = out_edge[v];
            let mut h = start;
            loop {
                seen[h] = true;
                h = prev[h] ^ 1;
                if h == start {
                    break;
                }
            }
        }
        if let Some(h) = seen.iter().position(|s| !s) {
            return Err(Error::InvalidGraph(format!(
                "rotation at vertex {} is not a single cycle (half-edge {h})",
                origin[h]
            )));
        }
        let mut face_of = vec![usize::MAX; nh];
        let mut face_start = Vec::new();
        for h in 0..nh {
            if face_of[h] != usize::MAX {
                continue;
            }
            let f = face_start.len();
            face_start.push(h);
            let mut g = h;
            loop {
                face_of[g] = f;
                g = next[g];
                if g == h {
                    break;
                }
            }
        }
        let g = Self {
            n_vertices,
            origin,
            next,
            prev,
            outer_face: face_of[outer],
            root_face: usize::MAX,
            face_of,
            face_start,
            out_edge,
            nu: vec![1.0; nh / 2],
            nu_dual: vec![1.0; nh / 2],
        };
        g.check_connected()?;
        let chi = g.n_vertices() as i64 - g.n_edges() as i64 + g.n_faces() as i64;
        if chi != 2 {
            return Err(Error::InvalidGraph(format!("Euler characteristic {chi}, expected 2")));
        }
        let mut g = g;
        // Outer face last, interior faces in order of first half-edge.
        let outer = g.outer_face;
        let mut starts: Vec<HalfEdgeId> =
            (0..g.n_faces()).filter(|&f| f != outer).map(|f| g.face_start[f]).collect();
        starts.push(g.face_start[outer]);
        g.renumber_faces(&starts)?;
        g.root_face = if g.n_faces() > 1 { 0 } else { g.outer_face };
        Ok(g)
    }

    /// Builds a disk patch from counterclockwise vertex cycles. Interior face
    /// `i` receives face id `i`; the outer face gets the last id.
    pub fn from_faces(n_vertices: usize, faces: &[Vec<VertexId>]) -> Result<Self> {
        if faces.is_empty() {
            return Err(Error::InvalidGraph("no faces".into()));
        }
        let mut directed: HashMap<(VertexId, VertexId), HalfEdgeId> = HashMap::new();
        let mut origin: Vec<VertexId> = Vec::new();
        let mut face_cycles: Vec<Vec<HalfEdgeId>> = Vec::new();
        for (fi, cyc) in faces.iter().enumerate() {
            if cyc.len() < 3 {
                return Err(Error::InvalidGraph(format!("face {fi} has fewer than 3 vertices")));
            }
            let mut hs = Vec::with_capacity(cyc.len());
            for k in 0..cyc.len() {
                let (a, b) = (cyc[k], cyc[(k + 1) % cyc.len()]);
                if a >= n_vertices || b >= n_vertices || a == b {
                    return Err(Error::InvalidGraph(format!("face {fi} has a bad side ({a},{b})")));
                }
                if directed.contains_key(&(a, b)) {
                    return Err(Error::InvalidGraph(format!(
                        "side ({a},{b}) appears twice with the same orientation"
                    )));
                }
                let h = if let Some(&t) = directed.get(&(b, a)) {
                    t ^ 1
                } else {
                    let h = origin.len();
                    origin.push(a);
                    origin.push(b);
                    h
                };
                directed.insert((a, b), h);
                hs.push(h);
            }
            face_cycles.push(hs);
        }
        let nh = origin.len();
        let mut next = vec![usize::MAX; nh];
        for hs in &face_cycles {
            for k in 0..hs.len() {
                next[hs[k]] = hs[(k + 1) % hs.len()];
            }
        }
        let mut outer_out: HashMap<VertexId, Vec<HalfEdgeId>> = HashMap::new();
        let mut outer_hs = Vec::new();
        for h in 0..nh {
            if next[h] == usize::MAX {
                outer_out.entry(origin[h]).or_default().push(h);
                outer_hs.push(h);
            }
        }
        if outer_hs.is_empty() {
            return Err(Error::InvalidGraph("faces close up into a sphere".into()));
        }
        for &h in &outer_hs {
            let head = origin[h ^ 1];
            match outer_out.get(&head).map(|v| v.as_slice()) {
                Some([g]) => next[h] = *g,
                _ => {
                    return Err(Error::InvalidGraph(format!(
                        "boundary is not a simple cycle at vertex {head}"
                    )))
                }
            }
        }
        let mut g = Self::from_parts(n_vertices, origin, next, outer_hs[0])?;
        if g.n_faces() != faces.len() + 1 {
            return Err(Error::InvalidGraph("boundary splits into several cycles".into()));
        }
        // Input face i gets id i.
        let mut starts: Vec<HalfEdgeId> = face_cycles.iter().map(|hs| hs[0]).collect();
        starts.push(outer_hs[0]);
        g.renumber_faces(&starts)?;
        g.root_face = 0;
        Ok(g)
    }

    /// Gives face `i` to the face containing `starts[i]`; the outer face must
    /// come last. The root face keeps its identity.
    pub fn renumber_faces(&mut self, starts: &[HalfEdgeId]) -> Result<()> {
        if starts.len() != self.n_faces() || starts.iter().any(|&h| h >= self.origin.len()) {
            return Err(Error::InvalidGraph("face order must name every face once".into()));
        }
        let mut hit = vec![false; self.n_faces()];
        for &h in starts {
            if std::mem::replace(&mut hit[self.face_of[h]], true) {
                return Err(Error::InvalidGraph(format!("face order names the face of {h} twice")));
            }
        }
        if self.face_of[starts[starts.len() - 1]] != self.outer_face {
            return Err(Error::InvalidGraph("outer face must come last".into()));
        }
        let root_half = self.face_start.get(self.root_face).copied();
        for (f, &s) in starts.iter().enumerate() {
            let mut h = s;
            loop {
                self.face_of[h] = f;
                h = self.next[h];
                if h == s {
                    break;
                }
            }
        }
        self.face_start = starts.to_vec();
        self.outer_face = starts.len() - 1;
        if let Some(h) = root_half {
            self.root_face = self.face_of[h];
        }
        Ok(())
    }

    fn check_connected(&self) -> Result<()> {
        let mut seen = vec![false; self.n_vertices];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        let mut count = 1;
        while let Some(v) = queue.pop_front() {
            for h in self.outgoing(v) {
                let u = self.head(h);
                if !seen[u] {
                    seen[u] = true;
                    count += 1;
                    queue.push_back(u);
                }
            }
        }
        if count != self.n_vertices {
            return Err(Error::InvalidGraph("graph is disconnected".into()));
        }
        Ok(())
    }

    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }
    pub fn n_half_edges(&self) -> usize {
        self.origin.len()
    }
    pub fn n_edges(&self) -> usize {
        self.origin.len() / 2
    }
    pub fn n_faces(&self) -> usize {
        self.face_start.len()
    }
    pub fn origin(&self, h: HalfEdgeId) -> VertexId {
        self.origin[h]
    }
    pub fn head(&self, h: HalfEdgeId) -> VertexId {
        self.origin[h ^ 1]
    }
    pub fn next(&self, h: HalfEdgeId) -> HalfEdgeId {
        self.next[h]
    }
    pub fn prev(&self, h: HalfEdgeId) -> HalfEdgeId {
        self.prev[h]
    }
    /// Face to the left of `h`.
    pub fn face(&self, h: HalfEdgeId) -> FaceId {
        self.face_of[h]
    }
    pub fn rot_ccw(&self, h: HalfEdgeId) -> HalfEdgeId {
        self.prev[h] ^ 1
    }
    pub fn rot_cw(&self, h: HalfEdgeId) -> HalfEdgeId {
        self.next[h ^ 1]
    }
    pub fn outer_face(&self) -> FaceId {
        self.outer_face
    }
    pub fn root_face(&self) -> FaceId {
        self.root_face
    }
    pub fn set_root_face(&mut self, f: FaceId) -> Result<()> {
        if f >= self.n_faces() || f == self.outer_face {
            return Err(Error::InvalidParameter(format!("root face {f} is not an interior face")));
        }
        self.root_face = f;
        Ok(())
    }
    pub fn is_outer(&self, f: FaceId) -> bool {
        f == self.outer_face
    }
    pub fn interior_faces(&self) -> impl Iterator<Item = FaceId> + '_ {
        (0..self.n_faces()).filter(move |&f| f != self.outer_face)
    }
    pub fn n_interior_faces(&self) -> usize {
        self.n_faces() - 1
    }
    pub fn out_edge(&self, v: VertexId) -> HalfEdgeId {
        self.out_edge[v]
    }

    /// Outgoing half-edges of `v` in counterclockwise order.
    pub fn outgoing(&self, v: VertexId) -> Vec<HalfEdgeId> {
        let start = self.out_edge[v];
        let mut out = vec![start];
        let mut h = self.rot_ccw(start);
        while h != start {
            out.push(h);
            h = self.rot_ccw(h);
        }
        out
    }

    /// Outgoing half-edges of a boundary vertex starting right after the
    /// outer face, so that consecutive entries bound interior faces.
    pub fn outgoing_from_boundary(&self, v: VertexId) -> Vec<HalfEdgeId> {
        let all = self.outgoing(v);
        match all.iter().position(|&h| self.face(self.rot_cw(h)) == self.outer_face) {
            Some(k) => all[k..].iter().chain(all[..k].iter()).copied().collect(),
            None => all,
        }
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.outgoing(v).len()
    }
    pub fn neighbors(&self, v: VertexId) -> Vec<VertexId> {
        self.outgoing(v).into_iter().map(|h| self.head(h)).collect()
    }
    pub fn edge_of(&self, h: HalfEdgeId) -> EdgeId {
        h / 2
    }
    pub fn endpoints(&self, e: EdgeId) -> (VertexId, VertexId) {
        (self.origin[2 * e], self.origin[2 * e + 1])
    }
    /// Faces to the left and right of half-edge `2e`.
    pub fn edge_faces(&self, e: EdgeId) -> (FaceId, FaceId) {
        (self.face_of[2 * e], self.face_of[2 * e + 1])
    }
    pub fn face_half_edges(&self, f: FaceId) -> Vec<HalfEdgeId> {
        let s = self.face_start[f];
        let mut out = vec![s];
        let mut h = self.next[s];
        while h != s {
            out.push(h);
            h = self.next[h];
        }
        out
    }
    pub fn face_vertices(&self, f: FaceId) -> Vec<VertexId> {
        self.face_half_edges(f).into_iter().map(|h| self.origin[h]).collect()
    }
    pub fn face_degree(&self, f: FaceId) -> usize {
        self.face_half_edges(f).len()
    }
    pub fn find_half_edge(&self, u: VertexId, v: VertexId) -> Option<HalfEdgeId> {
        self.outgoing(u).into_iter().find(|&h| self.head(h) == v)
    }

    /// Boundary cycle, counterclockwise around the patch, as half-edges whose
    /// left face is interior and right face is the outer face.
    pub fn boundary_cycle(&self) -> Vec<HalfEdgeId> {
        let mut hs: Vec<HalfEdgeId> = self
            .face_half_edges(self.outer_face)
            .into_iter()
            .map(|h| h ^ 1)
            .collect();
        hs.reverse();
        if let Some(k) = (0..hs.len()).min_by_key(|&k| self.origin[hs[k]]) {
            hs.rotate_left(k);
        }
        hs
    }
    pub fn boundary_vertices(&self) -> Vec<VertexId> {
        self.boundary_cycle().into_iter().map(|h| self.origin[h]).collect()
    }
    pub fn is_boundary_vertex(&self, v: VertexId) -> bool {
        self.outgoing(v).iter().any(|&h| self.face(h) == self.outer_face)
    }
    pub fn is_boundary_edge(&self, e: EdgeId) -> bool {
        let (l, r) = self.edge_faces(e);
        l == self.outer_face || r == self.outer_face
    }
    /// Number of interior faces around `v`.
    pub fn interior_face_count(&self, v: VertexId) -> usize {
        self.outgoing(v).iter().filter(|&&h| self.face(h) != self.outer_face).count()
    }

    pub fn nu(&self, e: EdgeId) -> f64 {
        self.nu[e]
    }
    pub fn nu_dual(&self, e: EdgeId) -> f64 {
        self.nu_dual[e]
    }
    /// Conductance of primal edge `e`: `nu(e) / nu_dual(e)`.
    pub fn conductance(&self, e: EdgeId) -> f64 {
        self.nu[e] / self.nu_dual[e]
    }
    pub fn set_weights(&mut self, nu: Vec<f64>, nu_dual: Vec<f64>) -> Result<()> {
        if nu.len() != self.n_edges() || nu_dual.len() != self.n_edges() {
            return Err(Error::InvalidParameter("weight vector length mismatch".into()));
        }
        if nu.iter().chain(nu_dual.iter()).any(|&x| !(x.is_finite() && x > 0.0)) {
            return Err(Error::InvalidParameter("weights must be positive and finite".into()));
        }
        self.nu = nu;
        self.nu_dual = nu_dual;
        Ok(())
    }

    /// Dual graph including the vertex for the outer face. Dual half-edge `h`
    /// runs from the face right of `h` to the face left of it.
    pub fn dual(&self) -> Result<RotationPlanarGraph> {
        let nh = self.n_half_edges();
        let origin: Vec<VertexId> = (0..nh).map(|h| self.face_of[h ^ 1]).collect();
        let next: Vec<HalfEdgeId> = (0..nh).map(|h| self.prev[h] ^ 1).collect();
        let outer = self.out_edge[self.boundary_vertices()[0]];
        let mut d = Self::from_parts(self.n_faces(), origin, next, outer)?;
        d.nu = self.nu_dual.clone();
        d.nu_dual = self.nu.clone();
        Ok(d)
    }

    /// Sub-patch spanned by a set of interior faces, with vertices renumbered
    /// in increasing order of their ids here.
    pub fn subpatch(&self, faces: &[FaceId]) -> Result<(RotationPlanarGraph, PatchMap)> {
        let mut fs: Vec<FaceId> = faces.to_vec();
        fs.sort_unstable();
        fs.dedup();
        if fs.iter().any(|&f| f >= self.n_faces() || f == self.outer_face) {
            return Err(Error::InvalidParameter("sub-patch faces must be interior faces".into()));
        }
        let mut verts: Vec<VertexId> = fs.iter().flat_map(|&f| self.face_vertices(f)).collect();
        verts.sort_unstable();
        verts.dedup();
        let index: HashMap<VertexId, usize> = verts.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let cycles: Vec<Vec<VertexId>> = fs
            .iter()
            .map(|&f| self.face_vertices(f).into_iter().map(|v| index[&v]).collect())
            .collect();
        let mut g = Self::from_faces(verts.len(), &cycles)?;
        let mut edge_map = vec![0; g.n_edges()];
        for e in 0..g.n_edges() {
            let (a, b) = g.endpoints(e);
            let h = self
                .find_half_edge(verts[a], verts[b])
                .ok_or_else(|| Error::InvalidGraph("sub-patch edge missing in host".into()))?;
            edge_map[e] = h / 2;
        }
        let nu = edge_map.iter().map(|&e| self.nu[e]).collect();
        let nu_dual = edge_map.iter().map(|&e| self.nu_dual[e]).collect();
        g.set_weights(nu, nu_dual)?;
        if let Some(k) = fs.iter().position(|&f| f == self.root_face) {
            g.root_face = k;
        }
        Ok((g, PatchMap { vertex_map: verts, face_map: fs, edge_map }))
    }

    /// Vertex ids at graph distance from `v`, `usize::MAX` if unreachable.
    pub fn bfs_distances(&self, v: VertexId) -> Vec<usize> {
        let mut dist = vec![usize::MAX; self.n_vertices];
        dist[v] = 0;
        let mut queue = VecDeque::from([v]);
        while let Some(u) = queue.pop_front() {
            for w in self.neighbors(u) {
                if dist[w] == usize::MAX {
                    dist[w] = dist[u] + 1;
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    /// Edge list `(u, v, nu, nu_dual)` ordered by edge id.
    pub fn edge_list(&self) -> Vec<(VertexId, VertexId, f64, f64)> {
        (0..self.n_edges())
            .map(|e| {
                let (a, b) = self.endpoints(e);
                (a, b, self.nu[e], self.nu_dual[e])
            })
            .collect()
    }
}

/// Correspondence between a sub-patch and its host.
#[derive(Debug, Clone)]
pub struct PatchMap {
    /// Host vertex of each sub-patch vertex.
    pub vertex_map: Vec<VertexId>,
    /// Host face of each interior sub-patch face.
    pub face_map: Vec<FaceId>,
    /// Host edge of each sub-patch edge.
    pub edge_map: Vec<EdgeId>,
}

impl PatchMap {
    pub fn host_to_local_vertex(&self) -> BTreeMap<VertexId, VertexId> {
        self.vertex_map.iter().enumerate().map(|(i, &v)| (v, i)).collect()
    }
}

/// Contracts the connected vertex set `s` to a single vertex, dropping the
/// edges inside `s` and keeping parallel edges. Returns the new graph and the
/// id of the merged vertex.
pub fn contract_vertices(
    g: &RotationPlanarGraph,
    s: &[VertexId],
) -> Result<(RotationPlanarGraph, VertexId)> {
    let mut in_s = vec![false; g.n_vertices()];
    for &v in s {
        if v >= g.n_vertices() {
            return Err(Error::InvalidParameter(format!("vertex {v} out of range")));
        }
        in_s[v] = true;
    }
    let k = in_s.iter().filter(|&&b| b).count();
    if k == 0 {
        return Err(Error::InvalidParameter("empty contraction set".into()));
    }
    if k == g.n_vertices() {
        return Err(Error::InvalidParameter("cannot contract every vertex".into()));
    }
    // Connectivity of s inside g.
    let first = (0..g.n_vertices()).find(|&v| in_s[v]).unwrap();
    let mut seen = vec![false; g.n_vertices()];
    seen[first] = true;
    let mut queue = VecDeque::from([first]);
    let mut reached = 1;
    while let Some(u) = queue.pop_front() {
        for w in g.neighbors(u) {
            if in_s[w] && !seen[w] {
                seen[w] = true;
                reached += 1;
                queue.push_back(w);
            }
        }
    }
    if reached != k {
        return Err(Error::InvalidParameter("contraction set must induce a connected subgraph".into()));
    }
    let mut new_id = vec![0; g.n_vertices()];
    let mut n = 0;
    for v in 0..g.n_vertices() {
        if !in_s[v] {
            new_id[v] = n;
            n += 1;
        }
    }
    let z = n;
    for v in 0..g.n_vertices() {
        if in_s[v] {
            new_id[v] = z;
        }
    }
    let keep: Vec<EdgeId> = (0..g.n_edges())
        .filter(|&e| {
            let (a, b) = g.endpoints(e);
            !(in_s[a] && in_s[b])
        })
        .collect();
    let mut new_edge = vec![usize::MAX; g.n_edges()];
    for (i, &e) in keep.iter().enumerate() {
        new_edge[e] = i;
    }
    let map_h = |h: HalfEdgeId| 2 * new_edge[h / 2] + (h & 1);
    let mut origin = Vec::with_capacity(2 * keep.len());
    let mut next = Vec::with_capacity(2 * keep.len());
    for &e in &keep {
        for h in [2 * e, 2 * e + 1] {
            origin.push(new_id[g.origin(h)]);
            let mut r = g.next(h);
            while new_edge[r / 2] == usize::MAX {
                r = g.next(r);
            }
            next.push(map_h(r));
        }
    }
    let outer = g
        .face_half_edges(g.outer_face())
        .into_iter()
        .find(|&h| new_edge[h / 2] != usize::MAX)
        .map(map_h)
        .unwrap_or(0);
    let mut out = RotationPlanarGraph::from_parts(z + 1, origin, next, outer)?;
    out.nu = keep.iter().map(|&e| g.nu[e]).collect();
    out.nu_dual = keep.iter().map(|&e| g.nu_dual[e]).collect();
    Ok((out, z))
}
