//! Superposition graphs of a patch and its interior dual, and the two kinds
//! of balanced regions carved out of them: Temperley trims (one boundary
//! vertex removed) and two-convex-corner regions.

use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{EdgeId, FaceId, RotationPlanarGraph, VertexId};
use crate::packing::{certify, DoublePacking};

/// Black vertex of the superposition graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Black {
    Primal(VertexId),
    Dual(FaceId),
}

/// Quadrilateral face of the superposition graph, counterclockwise:
/// `vertex, white_out, face, white_in`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Kite {
    pub vertex: VertexId,
    pub face: FaceId,
    pub white_out: EdgeId,
    pub white_in: EdgeId,
}

/// Blacks are numbered primal vertices first, then interior faces in
/// increasing face id. Whites are the edges of the patch.
#[derive(Debug, Clone)]
pub struct SuperpositionGraph {
    pub graph: RotationPlanarGraph,
    pub packing: DoublePacking,
    dual_index: Vec<Option<usize>>,
    dual_faces: Vec<FaceId>,
    pub black_pos: Vec<Complex64>,
    pub white_pos: Vec<Complex64>,
    pub kites: Vec<Kite>,
    /// Kites containing each white vertex.
    pub white_kites: Vec<Vec<usize>>,
}

impl SuperpositionGraph {
    pub fn n_black(&self) -> usize {
        self.graph.n_vertices() + self.dual_faces.len()
    }
    pub fn n_white(&self) -> usize {
        self.graph.n_edges()
    }
    pub fn black(&self, b: usize) -> Black {
        let nv = self.graph.n_vertices();
        if b < nv {
            Black::Primal(b)
        } else {
            Black::Dual(self.dual_faces[b - nv])
        }
    }
    pub fn black_id(&self, b: Black) -> Option<usize> {
        match b {
            Black::Primal(v) => (v < self.graph.n_vertices()).then_some(v),
            Black::Dual(f) => self.dual_index.get(f).copied().flatten().map(|k| k + self.graph.n_vertices()),
        }
    }
    pub fn is_primal(&self, b: usize) -> bool {
        b < self.graph.n_vertices()
    }
    pub fn primal_id(&self, v: VertexId) -> usize {
        v
    }
    pub fn dual_id(&self, f: FaceId) -> Option<usize> {
        self.black_id(Black::Dual(f))
    }

    /// Black neighbors of white `w`: tail, head, left face, right face of
    /// half-edge `2w`; faces are `None` on the outer face.
    pub fn white_neighbors(&self, w: EdgeId) -> [Option<usize>; 4] {
        let (a, b) = self.graph.endpoints(w);
        let (l, r) = self.graph.edge_faces(w);
        [Some(a), Some(b), self.dual_id(l), self.dual_id(r)]
    }

    /// Weight `|dbar(w, b)|`: `nu(e)` towards a vertex, `nu_dual(e)` towards a face.
    pub fn edge_weight(&self, w: EdgeId, b: usize) -> f64 {
        if self.is_primal(b) {
            self.graph.nu(w)
        } else {
            self.graph.nu_dual(w)
        }
    }

    /// Unit vector from white `w` towards black `b`.
    pub fn direction(&self, w: EdgeId, b: usize) -> Result<Complex64> {
        let d = self.black_pos[b] - self.white_pos[w];
        let n = d.norm();
        if !(n > 1e-14) {
            return Err(Error::InvalidGraph(format!("zero-length edge between white {w} and black {b}")));
        }
        Ok(d / n)
    }

    /// Face of the superposition graph to the left of the directed edge
    /// `w -> b`, and to its right. `None` stands for a missing kite.
    pub fn sides(&self, w: EdgeId, b: usize) -> (Option<usize>, Option<usize>) {
        let g = &self.graph;
        let (u, v) = g.endpoints(w);
        let (l, r) = g.edge_faces(w);
        let kite = |vert: VertexId, face: FaceId| -> Option<usize> {
            self.white_kites[w]
                .iter()
                .copied()
                .find(|&k| self.kites[k].vertex == vert && self.kites[k].face == face)
        };
        match self.black(b) {
            Black::Primal(x) if x == v => (kite(v, l), kite(v, r)),
            Black::Primal(x) => {
                debug_assert_eq!(x, u);
                (kite(u, r), kite(u, l))
            }
            Black::Dual(f) if f == l => (kite(u, l), kite(v, l)),
            Black::Dual(_) => (kite(v, r), kite(u, r)),
        }
    }
}

/// Superposition of a patch with its interior dual, embedded by a packing.
pub fn superpose(g: &RotationPlanarGraph, p: &DoublePacking, tol: f64) -> Result<SuperpositionGraph> {
    let rep = certify(g, p, tol);
    if !rep.passed {
        return Err(Error::Uncertified(format!("largest residual {:.3e} exceeds {tol:.1e}", rep.max_residual)));
    }
    Ok(superpose_unchecked(g, p))
}

pub(crate) fn superpose_unchecked(g: &RotationPlanarGraph, p: &DoublePacking) -> SuperpositionGraph {
    let mut dual_index = vec![None; g.n_faces()];
    let dual_faces: Vec<FaceId> = g.interior_faces().collect();
    for (k, &f) in dual_faces.iter().enumerate() {
        dual_index[f] = Some(k);
    }
    let mut black_pos: Vec<Complex64> = p.primal_center.clone();
    black_pos.extend(dual_faces.iter().map(|&f| p.dual_center[f]));
    let mut kites = Vec::new();
    let mut white_kites = vec![Vec::new(); g.n_edges()];
    for &f in &dual_faces {
        for h in g.face_half_edges(f) {
            let out = g.next(h);
            let k = Kite { vertex: g.head(h), face: f, white_out: out / 2, white_in: h / 2 };
            white_kites[k.white_out].push(kites.len());
            white_kites[k.white_in].push(kites.len());
            kites.push(k);
        }
    }
    SuperpositionGraph {
        graph: g.clone(),
        packing: p.clone(),
        dual_index,
        dual_faces,
        black_pos,
        white_pos: p.tangency.clone(),
        kites,
        white_kites,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CornerKind {
    Convex,
    Concave,
    Flat,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct BoundaryProfile {
    /// Boundary whites with their label; interior whites are absent.
    pub labels: Vec<(EdgeId, CornerKind)>,
    pub convex: Vec<EdgeId>,
    pub concave: Vec<EdgeId>,
    pub b0: Option<VertexId>,
    pub corners: Option<(VertexId, VertexId)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum RegionKind {
    Temperley { b0: VertexId },
    TwoCorner {
        v1: VertexId,
        v2: VertexId,
        v1_plus: FaceId,
        v2_plus: FaceId,
        /// Kept part of the enlarged dual boundary.
        arc0: Vec<FaceId>,
        /// Removed part.
        arc1: Vec<FaceId>,
    },
    Custom,
}

/// Induced subgraph of a superposition graph on chosen black and white
/// vertices.
#[derive(Debug, Clone)]
pub struct Region {
    pub sg: Arc<SuperpositionGraph>,
    pub blacks: Vec<usize>,
    pub whites: Vec<EdgeId>,
    pub black_in: Vec<bool>,
    pub white_in: Vec<bool>,
    pub kind: RegionKind,
    pub profile: BoundaryProfile,
}

impl Region {
    pub fn new(
        sg: Arc<SuperpositionGraph>,
        blacks: impl IntoIterator<Item = usize>,
        whites: impl IntoIterator<Item = EdgeId>,
        kind: RegionKind,
    ) -> Result<Self> {
        let mut black_in = vec![false; sg.n_black()];
        let mut white_in = vec![false; sg.n_white()];
        for b in blacks {
            *black_in
                .get_mut(b)
                .ok_or_else(|| Error::InvalidParameter(format!("black {b} out of range")))? = true;
        }
        for w in whites {
            *white_in
                .get_mut(w)
                .ok_or_else(|| Error::InvalidParameter(format!("white {w} out of range")))? = true;
        }
        let blacks = (0..black_in.len()).filter(|&b| black_in[b]).collect();
        let whites = (0..white_in.len()).filter(|&w| white_in[w]).collect();
        let mut r = Region {
            sg,
            blacks,
            whites,
            black_in,
            white_in,
            kind,
            profile: BoundaryProfile::default(),
        };
        r.profile = classify_corners(&r);
        Ok(r)
    }

    pub fn is_balanced(&self) -> bool {
        self.blacks.len() == self.whites.len()
    }

    /// Present black neighbors of a present white.
    pub fn neighbors(&self, w: EdgeId) -> Vec<usize> {
        self.sg.white_neighbors(w).into_iter().flatten().filter(|&b| self.black_in[b]).collect()
    }

    pub fn kite_inside(&self, k: usize) -> bool {
        let kt = &self.sg.kites[k];
        self.white_in[kt.white_out]
            && self.white_in[kt.white_in]
            && self.black_in[self.sg.primal_id(kt.vertex)]
            && self.sg.dual_id(kt.face).is_some_and(|b| self.black_in[b])
    }

    /// All edges `(white, black)` of the region.
    pub fn edges(&self) -> Vec<(EdgeId, usize)> {
        self.whites.iter().flat_map(|&w| self.neighbors(w).into_iter().map(move |b| (w, b))).collect()
    }
}

/// Labels every white that is not surrounded by four kites of the region.
pub fn classify_corners(r: &Region) -> BoundaryProfile {
    let sg = &r.sg;
    let mut prof = BoundaryProfile {
        b0: match r.kind {
            RegionKind::Temperley { b0 } => Some(b0),
            _ => None,
        },
        corners: match r.kind {
            RegionKind::TwoCorner { v1, v2, .. } => Some((v1, v2)),
            _ => None,
        },
        ..Default::default()
    };
    for &w in &r.whites {
        let ks = &sg.white_kites[w];
        let inside = ks.iter().filter(|&&k| r.kite_inside(k)).count();
        if inside == 4 {
            continue;
        }
        let concave = ks.iter().any(|&k| {
            let kt = &sg.kites[k];
            let other = if kt.white_out == w { kt.white_in } else { kt.white_out };
            r.black_in[sg.primal_id(kt.vertex)]
                && sg.dual_id(kt.face).is_some_and(|b| r.black_in[b])
                && !r.white_in[other]
        });
        let kind = if concave {
            prof.concave.push(w);
            CornerKind::Concave
        } else if inside == 1 {
            prof.convex.push(w);
            CornerKind::Convex
        } else {
            CornerKind::Flat
        };
        prof.labels.push((w, kind));
    }
    prof
}

/// Boundary vertex with the largest id.
pub fn default_b0(g: &RotationPlanarGraph) -> VertexId {
    g.boundary_vertices().into_iter().max().unwrap()
}

/// Whole superposition graph minus the boundary vertex `b0`.
pub fn temperley_trim(sg: Arc<SuperpositionGraph>, b0: VertexId) -> Result<Region> {
    if b0 >= sg.graph.n_vertices() || !sg.graph.is_boundary_vertex(b0) {
        return Err(Error::BadRegion(format!("b0 = {b0} is not a boundary vertex")));
    }
    let blacks: Vec<usize> = (0..sg.n_black()).filter(|&b| b != sg.primal_id(b0)).collect();
    let whites: Vec<EdgeId> = (0..sg.n_white()).collect();
    let r = Region::new(sg, blacks, whites, RegionKind::Temperley { b0 })?;
    if !r.is_balanced() {
        return Err(Error::BadRegion(format!(
            "{} whites against {} blacks after removing b0",
            r.whites.len(),
            r.blacks.len()
        )));
    }
    Ok(r)
}

/// Host faces adjacent to a face set and the data of the enlarged dual
/// boundary around it.
struct Ring {
    boundary: Vec<VertexId>,
    faces: Vec<FaceId>,
    /// Host edge shared by `faces[k]` and `faces[k + 1]`.
    links: Vec<EdgeId>,
}

fn ring_around(host: &RotationPlanarGraph, inner: &BTreeSet<FaceId>) -> Result<(Ring, RotationPlanarGraph, Vec<VertexId>)> {
    let faces: Vec<FaceId> = inner.iter().copied().collect();
    let (sub, map) = host.subpatch(&faces)?;
    let boundary: Vec<VertexId> = sub.boundary_vertices().into_iter().map(|v| map.vertex_map[v]).collect();
    let m = boundary.len();
    let mut ring: Vec<FaceId> = Vec::new();
    let mut links: Vec<EdgeId> = Vec::new();
    for i in 0..m {
        let u = boundary[i];
        let prev = boundary[(i + m - 1) % m];
        let start = host
            .find_half_edge(u, prev)
            .ok_or_else(|| Error::BadRegion("boundary edge missing in host".into()))?;
        let next = boundary[(i + 1) % m];
        let mut h = start;
        loop {
            let f = host.face(h);
            if f == host.outer_face() {
                return Err(Error::BadRegion(format!(
                    "host patch does not surround the region at vertex {u}"
                )));
            }
            if inner.contains(&f) {
                return Err(Error::BadRegion(format!("region is pinched at vertex {u}")));
            }
            if ring.last() != Some(&f) {
                ring.push(f);
            }
            let g = host.rot_ccw(h);
            if host.head(g) == next {
                break;
            }
            links.push(g / 2);
            h = g;
        }
    }
    if ring.len() > 1 && ring.first() == ring.last() {
        ring.pop();
    }
    let distinct: BTreeSet<FaceId> = ring.iter().copied().collect();
    if distinct.len() != ring.len() || links.len() != ring.len() {
        return Err(Error::BadRegion("enlarged dual boundary is not a simple cycle".into()));
    }
    // links[k] was recorded between ring[k] and ring[k + 1] up to a rotation.
    let r = ring.len();
    let mut ordered = vec![usize::MAX; r];
    for &e in &links {
        let (l, rr) = host.edge_faces(e);
        let a = ring.iter().position(|&f| f == l);
        let b = ring.iter().position(|&f| f == rr);
        match (a, b) {
            (Some(a), Some(b)) if (a + 1) % r == b => ordered[a] = e,
            (Some(a), Some(b)) if (b + 1) % r == a => ordered[b] = e,
            _ => return Err(Error::BadRegion("ring link does not join consecutive faces".into())),
        }
    }
    if ordered.contains(&usize::MAX) {
        return Err(Error::BadRegion("ring has a gap".into()));
    }
    let verts = map.vertex_map.clone();
    Ok((Ring { boundary, faces: ring, links: ordered }, sub, verts))
}

/// Two-convex-corner region around the face set `inner` of the host
/// superposition graph, with corners `v1`, `v2` on its boundary.
///
/// The host must contain every face touching the region. The ring of those
/// faces is split at faces `v1+`, `v2+` next to the corners; the ring part
/// facing the boundary arc from `v2` to `v1` is deleted together with
/// `v1+`, `v2+` and the links between them.
pub fn two_corner_region(
    sg: Arc<SuperpositionGraph>,
    inner: &[FaceId],
    v1: VertexId,
    v2: VertexId,
) -> Result<Region> {
    if v1 == v2 {
        return Err(Error::BadRegion("corners must be distinct".into()));
    }
    let host = &sg.graph;
    let inner_set: BTreeSet<FaceId> = inner.iter().copied().collect();
    let (ring, sub, sub_vertices) = ring_around(host, &inner_set)?;
    let bpos = |v: VertexId| ring.boundary.iter().position(|&x| x == v);
    let (i1, i2) = match (bpos(v1), bpos(v2)) {
        (Some(a), Some(b)) => (a, b),
        _ => return Err(Error::BadRegion("corners must lie on the region boundary".into())),
    };
    let m = ring.boundary.len();
    let arc = |from: usize, to: usize| -> BTreeSet<VertexId> {
        let mut s = BTreeSet::new();
        let mut k = (from + 1) % m;
        while k != to {
            s.insert(ring.boundary[k]);
            k = (k + 1) % m;
        }
        s
    };
    let c0 = arc(i1, i2);
    let c1 = arc(i2, i1);
    let touches = |f: FaceId, set: &BTreeSet<VertexId>| host.face_vertices(f).iter().any(|v| set.contains(v));
    let fan = |v: VertexId| -> Vec<usize> {
        (0..ring.faces.len()).filter(|&k| host.face_vertices(ring.faces[k]).contains(&v)).collect()
    };
    let order = |v: VertexId| -> Vec<usize> {
        let mut ks = fan(v);
        ks.sort_by_key(|&k| (touches(ring.faces[k], &c0) || touches(ring.faces[k], &c1)) as u8);
        ks
    };
    let r = ring.faces.len();
    let between = |a: usize, b: usize| -> Vec<usize> {
        let mut out = Vec::new();
        let mut k = (a + 1) % r;
        while k != b {
            out.push(k);
            k = (k + 1) % r;
        }
        out
    };
    let mut choice = None;
    'outer: for &p1 in &order(v1) {
        for &p2 in &order(v2) {
            if p1 == p2 {
                continue;
            }
            let keep = between(p1, p2);
            let drop = between(p2, p1);
            let ok = drop.iter().all(|&k| !touches(ring.faces[k], &c0))
                && keep.iter().all(|&k| !touches(ring.faces[k], &c1));
            if ok {
                choice = Some((p1, p2, keep, drop));
                break 'outer;
            }
        }
    }
    let (p1, p2, keep, drop) =
        choice.ok_or_else(|| Error::BadRegion("no split of the dual ring separates the two arcs".into()))?;

    let mut blacks: Vec<usize> = sub_vertices.iter().map(|&v| sg.primal_id(v)).collect();
    let mut whites: Vec<EdgeId> = Vec::new();
    for &f in &inner_set {
        blacks.push(sg.dual_id(f).ok_or_else(|| Error::BadRegion(format!("face {f} is not interior")))?);
        for h in host.face_half_edges(f) {
            whites.push(h / 2);
        }
    }
    for &k in &keep {
        blacks.push(sg.dual_id(ring.faces[k]).unwrap());
    }
    let mut k = p1;
    while k != p2 {
        whites.push(ring.links[k]);
        k = (k + 1) % r;
    }
    whites.sort_unstable();
    whites.dedup();
    let inner_edges = sub.n_edges();
    let kind = RegionKind::TwoCorner {
        v1,
        v2,
        v1_plus: ring.faces[p1],
        v2_plus: ring.faces[p2],
        arc0: keep.iter().map(|&k| ring.faces[k]).collect(),
        arc1: drop.iter().map(|&k| ring.faces[k]).collect(),
    };
    let region = Region::new(sg.clone(), blacks, whites, kind)?;
    // A chord between two region vertices would have to be a white as well.
    let chords = (0..host.n_edges())
        .filter(|&e| {
            let (a, b) = host.endpoints(e);
            region.black_in[a] && region.black_in[b] && !region.white_in[e]
        })
        .count();
    if chords > 0 || region.whites.len() < inner_edges {
        return Err(Error::BadRegion("region is not an induced face union".into()));
    }
    if !region.is_balanced() {
        return Err(Error::BadRegion(format!(
            "{} whites against {} blacks",
            region.whites.len(),
            region.blacks.len()
        )));
    }
    if let Some(&w) = region.profile.concave.first() {
        return Err(Error::BadRegion(format!("white {w} is a concave corner")));
    }
    if region.profile.convex.len() != 2 {
        return Err(Error::BadRegion(format!(
            "expected two convex corners, found {:?}",
            region.profile.convex
        )));
    }
    Ok(region)
}

/// Corners roughly opposite each other on the boundary of `inner`, each with
/// a face of the ring touching no other boundary vertex when possible.
pub fn default_corners(host: &RotationPlanarGraph, inner: &[FaceId]) -> Result<(VertexId, VertexId)> {
    let inner_set: BTreeSet<FaceId> = inner.iter().copied().collect();
    let (ring, _, _) = ring_around(host, &inner_set)?;
    let bset: BTreeSet<VertexId> = ring.boundary.iter().copied().collect();
    let mut private: HashMap<VertexId, bool> = HashMap::new();
    for &f in &ring.faces {
        let vs: Vec<VertexId> = host.face_vertices(f).into_iter().filter(|v| bset.contains(v)).collect();
        if let [v] = vs[..] {
            private.insert(v, true);
        }
    }
    let m = ring.boundary.len();
    let good: Vec<usize> = (0..m).filter(|&i| private.contains_key(&ring.boundary[i])).collect();
    let (a, b) = match good.len() {
        0 | 1 => (0, m / 2),
        _ => {
            let a = good[0];
            let b = *good.iter().min_by_key(|&&i| (i as isize - (a + m / 2) as isize).unsigned_abs()).unwrap();
            if a == b { (good[0], good[1]) } else { (a, b) }
        }
    };
    Ok((ring.boundary[a], ring.boundary[b]))
}

/// Region as SVG: edges as segments, primal blacks black, dual blacks gray,
/// whites hollow.
pub fn superposition_svg(region: &Region) -> String {
    use std::fmt::Write;
    let sg = &region.sg;
    let pts = region
        .blacks
        .iter()
        .map(|&b| (sg.black_pos[b], 0.0))
        .chain(region.whites.iter().map(|&w| (sg.white_pos[w], 0.0)));
    let frame = crate::packing::Frame::fit(pts);
    let r = frame.size / 300.0;
    let mut s = frame.open();
    for (w, b) in region.edges() {
        let (x1, y1) = frame.xy(sg.white_pos[w]);
        let (x2, y2) = frame.xy(sg.black_pos[b]);
        let _ = writeln!(s, "<line x1=\"{x1:.3}\" y1=\"{y1:.3}\" x2=\"{x2:.3}\" y2=\"{y2:.3}\" stroke=\"#888\" stroke-width=\"0.6\"/>");
    }
    for &b in &region.blacks {
        let (x, y) = frame.xy(sg.black_pos[b]);
        let fill = if sg.is_primal(b) { "black" } else { "gray" };
        let _ = writeln!(s, "<circle cx=\"{x:.3}\" cy=\"{y:.3}\" r=\"{r:.3}\" fill=\"{fill}\"/>");
    }
    for &w in &region.whites {
        let (x, y) = frame.xy(sg.white_pos[w]);
        let _ = writeln!(s, "<circle cx=\"{x:.3}\" cy=\"{y:.3}\" r=\"{r:.3}\" fill=\"white\" stroke=\"black\" stroke-width=\"0.5\"/>");
    }
    s.push_str("</svg>\n");
    s
}

/// Serializable description of a region inside a superposition graph.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case", deny_unknown_fields)]
pub enum RegionSpec {
    Temperley { b0: VertexId },
    TwoCorner { inner: Vec<FaceId>, v1: VertexId, v2: VertexId },
}

impl RegionSpec {
    pub fn build(&self, sg: Arc<SuperpositionGraph>) -> Result<Region> {
        match self {
            RegionSpec::Temperley { b0 } => temperley_trim(sg, *b0),
            RegionSpec::TwoCorner { inner, v1, v2 } => two_corner_region(sg, inner, *v1, *v2),
        }
    }
}
