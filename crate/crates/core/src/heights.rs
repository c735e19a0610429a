//! Height functions of matchings and pairs of matchings, loop structure of
//! double-dimer configurations, and the center-variance experiment.

use std::collections::VecDeque;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{build_pq_tiling, face_layers, square_grid, EdgeId, RotationPlanarGraph};
use crate::packing::{solve_double_packing, BoundaryCondition, PackingOptions};
use crate::potential::linear_fit;
use crate::sampler::{stream_rng, Matching, TemperleySampler};
use crate::temperley::{default_b0, default_corners, superpose, Region, RegionSpec, SuperpositionGraph};
use crate::lattice::Geometry;

/// Region edge separating two faces of the region: `left` and `right` of
/// the directed edge `white -> black`. Faces are inside kites, numbered
/// in increasing kite id, and the outside, numbered last.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Crossing {
    pub white: EdgeId,
    pub black: usize,
    pub left: usize,
    pub right: usize,
}

/// Faces of a region and the edges between them.
#[derive(Debug, Clone)]
pub struct FaceGraph {
    pub region: Region,
    /// Kite id of each inside face.
    pub kites: Vec<usize>,
    /// Face of each kite, `outer()` when the kite is not inside.
    pub face_of_kite: Vec<usize>,
    pub crossings: Vec<Crossing>,
    /// Crossings at each face.
    pub incident: Vec<Vec<usize>>,
}

impl FaceGraph {
    pub fn new(region: &Region) -> Self {
        let sg = &region.sg;
        let kites: Vec<usize> = (0..sg.kites.len()).filter(|&k| region.kite_inside(k)).collect();
        let outer = kites.len();
        let mut face_of_kite = vec![outer; sg.kites.len()];
        for (i, &k) in kites.iter().enumerate() {
            face_of_kite[k] = i;
        }
        let mut crossings = Vec::new();
        let mut incident = vec![Vec::new(); outer + 1];
        for (w, b) in region.edges() {
            let (l, r) = sg.sides(w, b);
            let left = l.map_or(outer, |k| face_of_kite[k]);
            let right = r.map_or(outer, |k| face_of_kite[k]);
            incident[left].push(crossings.len());
            if right != left {
                incident[right].push(crossings.len());
            }
            crossings.push(Crossing { white: w, black: b, left, right });
        }
        FaceGraph { region: region.clone(), kites, face_of_kite, crossings, incident }
    }

    pub fn outer(&self) -> usize {
        self.kites.len()
    }

    pub fn n_faces(&self) -> usize {
        self.kites.len() + 1
    }

    /// Face containing the root face of the patch: the first inside kite at
    /// that face.
    pub fn center(&self) -> Option<usize> {
        let sg = &self.region.sg;
        let rf = sg.graph.root_face();
        self.kites.iter().position(|&k| sg.kites[k].face == rf)
    }

    /// Crossings from the outside to `target` along a shortest face path,
    /// each with sign `+1` when walked from left to right.
    pub fn path_from_outer(&self, target: usize) -> Vec<(usize, i64)> {
        let n = self.n_faces();
        let mut prev: Vec<Option<(usize, usize)>> = vec![None; n];
        let mut seen = vec![false; n];
        seen[target] = true;
        let mut q = VecDeque::from([target]);
        while let Some(f) = q.pop_front() {
            if f == self.outer() {
                break;
            }
            for &c in &self.incident[f] {
                let cr = self.crossings[c];
                let g = if cr.left == f { cr.right } else { cr.left };
                if !seen[g] {
                    seen[g] = true;
                    prev[g] = Some((f, c));
                    q.push_back(g);
                }
            }
        }
        let mut path = Vec::new();
        let mut f = self.outer();
        while let Some((g, c)) = prev[f] {
            // Walking from f to g.
            let s = if self.crossings[c].left == f { 1 } else { -1 };
            path.push((c, s));
            f = g;
        }
        path
    }
}

/// Flow `theta_e / 2 pi` per crossing: half the angle at the black of each
/// of the (at most two) kites of the superposition graph along the edge.
/// Values within 1e-9 of a multiple of 1/4 are snapped to it.
pub fn angle_flow(fg: &FaceGraph) -> Vec<f64> {
    let sg = &fg.region.sg;
    fg.crossings
        .iter()
        .map(|c| {
            let (l, r) = sg.sides(c.white, c.black);
            let mut t = 0.0;
            for k in [l, r].into_iter().flatten() {
                let kt = sg.kites[k];
                let p = sg.black_pos[c.black];
                let a = (sg.white_pos[kt.white_out] - p).arg();
                let b = (sg.white_pos[kt.white_in] - p).arg();
                let mut d = (a - b).abs();
                if d > std::f64::consts::PI {
                    d = 2.0 * std::f64::consts::PI - d;
                }
                t += d / 2.0;
            }
            let x = t / (2.0 * std::f64::consts::PI);
            let q = (4.0 * x).round() / 4.0;
            if (x - q).abs() < 1e-9 {
                q
            } else {
                x
            }
        })
        .collect()
}

/// Largest deviation of the flow sums from 1 at whites with four inside
/// kites and at blacks all of whose kites are inside.
pub fn angle_flow_defect(fg: &FaceGraph, flow: &[f64]) -> f64 {
    let sg = &fg.region.sg;
    let mut at_white = vec![0.0; sg.n_white()];
    let mut at_black = vec![0.0; sg.n_black()];
    let mut full_black = vec![true; sg.n_black()];
    for (c, &t) in fg.crossings.iter().zip(flow) {
        at_white[c.white] += t;
        at_black[c.black] += t;
        if c.left == fg.outer() || c.right == fg.outer() {
            full_black[c.black] = false;
        }
    }
    let mut defect: f64 = 0.0;
    for &w in &fg.region.whites {
        if sg.white_kites[w].len() == 4 && sg.white_kites[w].iter().all(|&k| fg.face_of_kite[k] != fg.outer()) {
            defect = defect.max((at_white[w] - 1.0).abs());
        }
    }
    for &b in &fg.region.blacks {
        if full_black[b] && sg.is_primal(b) && !sg.graph.is_boundary_vertex(b) {
            defect = defect.max((at_black[b] - 1.0).abs());
        }
        if full_black[b] && !sg.is_primal(b) {
            defect = defect.max((at_black[b] - 1.0).abs());
        }
    }
    defect
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HeightFlavor {
    Preliminary,
    DoubleDimer,
}

/// Height per face; `values[fg.outer()]` is NaN for preliminary fields.
#[derive(Debug, Clone, Serialize)]
pub struct HeightField {
    pub flavor: HeightFlavor,
    pub base: usize,
    pub values: Vec<f64>,
    /// Largest inconsistency over crossings not used by the spanning search.
    pub closure: f64,
}

/// Preliminary height of one matching: crossing from left to right
/// subtracts `1_{e in M} - theta_e / 2 pi`; `base` gets 0.
pub fn preliminary_height(fg: &FaceGraph, flow: &[f64], m: &Matching, base: usize) -> Result<HeightField> {
    if base >= fg.outer() {
        return Err(Error::InvalidParameter("base must be an inside face".into()));
    }
    let inc = |c: usize| {
        let cr = fg.crossings[c];
        (if m.contains(cr.white, cr.black) { 1.0 } else { 0.0 }) - flow[c]
    };
    let n = fg.n_faces();
    let mut h = vec![f64::NAN; n];
    h[base] = 0.0;
    let mut q = VecDeque::from([base]);
    while let Some(f) = q.pop_front() {
        for &c in &fg.incident[f] {
            let cr = fg.crossings[c];
            if cr.left == fg.outer() || cr.right == fg.outer() {
                continue;
            }
            let (g, v) = if cr.left == f { (cr.right, h[f] - inc(c)) } else { (cr.left, h[f] + inc(c)) };
            if h[g].is_nan() {
                h[g] = v;
                q.push_back(g);
            }
        }
    }
    let mut closure: f64 = 0.0;
    for (c, cr) in fg.crossings.iter().enumerate() {
        if cr.left != fg.outer() && cr.right != fg.outer() {
            closure = closure.max((h[cr.right] - (h[cr.left] - inc(c))).abs());
        }
    }
    Ok(HeightField { flavor: HeightFlavor::Preliminary, base, values: h, closure })
}

/// `h_M = hbar_M - hbar_{M0}`, both with base face `base`.
pub fn dimer_height(fg: &FaceGraph, flow: &[f64], m: &Matching, m0: &Matching, base: usize) -> Result<HeightField> {
    let a = preliminary_height(fg, flow, m, base)?;
    let b = preliminary_height(fg, flow, m0, base)?;
    Ok(HeightField {
        flavor: HeightFlavor::Preliminary,
        base,
        values: a.values.iter().zip(&b.values).map(|(x, y)| x - y).collect(),
        closure: a.closure.max(b.closure),
    })
}

/// Integer height of a pair: the outside is 0 and crossing an edge from
/// left to right adds `1_{e in M1} - 1_{e in M2}`.
pub fn double_dimer_height(fg: &FaceGraph, m1: &Matching, m2: &Matching) -> Result<Vec<i64>> {
    let inc = |c: usize| {
        let cr = fg.crossings[c];
        m1.contains(cr.white, cr.black) as i64 - m2.contains(cr.white, cr.black) as i64
    };
    let n = fg.n_faces();
    let mut h: Vec<Option<i64>> = vec![None; n];
    h[fg.outer()] = Some(0);
    let mut q = VecDeque::from([fg.outer()]);
    while let Some(f) = q.pop_front() {
        for &c in &fg.incident[f] {
            let cr = fg.crossings[c];
            if cr.left == cr.right {
                continue;
            }
            let (g, v) = if cr.left == f { (cr.right, h[f].unwrap() + inc(c)) } else { (cr.left, h[f].unwrap() - inc(c)) };
            if h[g].is_none() {
                h[g] = Some(v);
                q.push_back(g);
            }
        }
    }
    let h: Vec<i64> = h
        .into_iter()
        .enumerate()
        .map(|(f, x)| x.ok_or_else(|| Error::InvalidGraph(format!("face {f} is unreachable"))))
        .collect::<Result<_>>()?;
    for (c, cr) in fg.crossings.iter().enumerate() {
        let ok = if cr.left == cr.right { inc(c) == 0 } else { h[cr.right] == h[cr.left] + inc(c) };
        if !ok {
            return Err(Error::BadMatching(format!("double-dimer height is inconsistent at crossing {c}")));
        }
    }
    Ok(h)
}

/// Height at one face from a fixed path of crossings out of the outside.
pub fn height_along(fg: &FaceGraph, path: &[(usize, i64)], m1: &Matching, m2: &Matching) -> i64 {
    path.iter()
        .map(|&(c, s)| {
            let cr = fg.crossings[c];
            s * (m1.contains(cr.white, cr.black) as i64 - m2.contains(cr.white, cr.black) as i64)
        })
        .sum()
}

/// Vertex of the superposition graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Node {
    White(EdgeId),
    Black(usize),
}

/// Components of the symmetric difference. In a finite region both
/// matchings cover every vertex, so every component is a cycle.
#[derive(Debug, Clone, Serialize)]
pub struct CycleDecomposition {
    /// Each cycle as `(white, black, from_first)` edges in traversal order.
    pub cycles: Vec<Vec<(EdgeId, usize, bool)>>,
    /// Open paths; always empty for perfect matchings of a finite region.
    pub paths: Vec<Vec<(EdgeId, usize, bool)>>,
}

pub fn cycle_decomposition(region: &Region, m1: &Matching, m2: &Matching) -> Result<CycleDecomposition> {
    m1.validate(region)?;
    m2.validate(region)?;
    let mut white_of_2 = vec![usize::MAX; region.sg.n_black()];
    for &w in &region.whites {
        white_of_2[m2.black_of[w]] = w;
    }
    let mut done = vec![false; region.sg.n_white()];
    let mut cycles = Vec::new();
    for &w0 in &region.whites {
        if done[w0] || m1.black_of[w0] == m2.black_of[w0] {
            continue;
        }
        let mut cyc = Vec::new();
        let mut w = w0;
        loop {
            done[w] = true;
            let b = m1.black_of[w];
            cyc.push((w, b, true));
            let w2 = white_of_2[b];
            cyc.push((w2, b, false));
            w = w2;
            if w == w0 {
                break;
            }
        }
        cycles.push(cyc);
    }
    Ok(CycleDecomposition { cycles, paths: Vec::new() })
}

/// Number of cycles separating each face from the outside.
pub fn enclosing_cycle_counts(fg: &FaceGraph, d: &CycleDecomposition) -> Vec<usize> {
    let mut count = vec![0; fg.n_faces()];
    let mut blocked = vec![false; fg.crossings.len()];
    let mut index = std::collections::HashMap::new();
    for (i, c) in fg.crossings.iter().enumerate() {
        index.insert((c.white, c.black), i);
    }
    for cyc in &d.cycles {
        let ids: Vec<usize> = cyc.iter().map(|&(w, b, _)| index[&(w, b)]).collect();
        for &i in &ids {
            blocked[i] = true;
        }
        let mut seen = vec![false; fg.n_faces()];
        seen[fg.outer()] = true;
        let mut stack = vec![fg.outer()];
        while let Some(f) = stack.pop() {
            for &c in &fg.incident[f] {
                if blocked[c] {
                    continue;
                }
                let cr = fg.crossings[c];
                let g = if cr.left == f { cr.right } else { cr.left };
                if !seen[g] {
                    seen[g] = true;
                    stack.push(g);
                }
            }
        }
        for f in 0..fg.n_faces() {
            if !seen[f] {
                count[f] += 1;
            }
        }
        for &i in &ids {
            blocked[i] = false;
        }
    }
    count
}

pub fn enclosing_cycle_count(fg: &FaceGraph, d: &CycleDecomposition, face: usize) -> usize {
    enclosing_cycle_counts(fg, d)[face]
}

/// Label per face: maximal face-connected sets of equal height.
pub fn level_clusters(fg: &FaceGraph, field: &[i64]) -> Vec<usize> {
    let mut label = vec![usize::MAX; fg.n_faces()];
    let mut next = 0;
    for s in 0..fg.n_faces() {
        if label[s] != usize::MAX {
            continue;
        }
        label[s] = next;
        let mut stack = vec![s];
        while let Some(f) = stack.pop() {
            for &c in &fg.incident[f] {
                let cr = fg.crossings[c];
                let g = if cr.left == f { cr.right } else { cr.left };
                if label[g] == usize::MAX && field[g] == field[f] {
                    label[g] = next;
                    stack.push(g);
                }
            }
        }
        next += 1;
    }
    label
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Family {
    /// `square_grid(2 r)` for radius `r`.
    Grid,
    /// `{p, q}` tiling of depth `r`.
    Tiling { p: usize, q: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundaryMode {
    Temperley,
    TwoCorner,
}

fn family_graph(family: Family, r: usize) -> Result<(RotationPlanarGraph, PackingOptions)> {
    Ok(match family {
        Family::Grid => {
            if r == 0 {
                return Err(Error::InvalidParameter("grid radius must be positive".into()));
            }
            (square_grid(2 * r)?, PackingOptions::new(Geometry::Euclidean, BoundaryCondition::UnitRadius))
        }
        Family::Tiling { p, q } => (build_pq_tiling(p, q, r)?, PackingOptions::regular(p, q)?),
    })
}

/// Superposition graph of the family member carrying the region of radius
/// `r`, and the region's description. Two-corner regions live in the member
/// of radius `r + 1`, which supplies the dual ring.
pub fn family_spec(family: Family, r: usize, mode: BoundaryMode) -> Result<(Arc<SuperpositionGraph>, RegionSpec)> {
    let opts = family_graph(family, r)?.1;
    let (host, inner) = match mode {
        BoundaryMode::Temperley => (family_graph(family, r)?.0, None),
        BoundaryMode::TwoCorner => match family {
            Family::Grid => {
                let n = 2 * r + 2;
                let inner = (1..=2 * r).flat_map(|j| (1..=2 * r).map(move |i| j * n + i)).collect();
                (square_grid(n)?, Some(inner))
            }
            Family::Tiling { p, q } => {
                let g = build_pq_tiling(p, q, r + 1)?;
                let layer = face_layers(&g);
                let inner: Vec<usize> = g.interior_faces().filter(|&f| layer[f] <= r).collect();
                (g, Some(inner))
            }
        },
    };
    let pk = solve_double_packing(&host, &opts)?;
    let sg = Arc::new(superpose(&host, &pk, 1e-8)?);
    let spec = match inner {
        None => RegionSpec::Temperley { b0: default_b0(&sg.graph) },
        Some(inner) => {
            let (v1, v2) = default_corners(&sg.graph, &inner)?;
            RegionSpec::TwoCorner { inner, v1, v2 }
        }
    };
    Ok((sg, spec))
}

/// Region of the family member of radius `r` (`square_grid(2r)` or the
/// depth-`r` tiling patch) with its regular packing.
pub fn family_region(family: Family, r: usize, mode: BoundaryMode) -> Result<Region> {
    let (sg, spec) = family_spec(family, r, mode)?;
    spec.build(sg)
}

#[derive(Debug, Clone, Serialize)]
pub struct VarianceRow {
    pub radius: usize,
    pub n: usize,
    pub mean: f64,
    pub var: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct VarianceTable {
    pub family: Family,
    pub mode: BoundaryMode,
    pub rows: Vec<VarianceRow>,
    /// Least-squares slope of the variance against `ln radius`.
    pub slope: f64,
    pub slope_stderr: f64,
    pub warnings: Vec<String>,
}

impl VarianceTable {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("radius,n,mean,var,stderr,slope_fit\n");
        for r in &self.rows {
            s.push_str(&format!(
                "{},{},{:.10e},{:.10e},{:.10e},{:.10e}\n",
                r.radius, r.n, r.mean, r.var, r.stderr, self.slope
            ));
        }
        s
    }
}

/// Mean, variance and the standard error of the variance,
/// `sqrt((m4 - var^2) / n)`.
pub fn moments(xs: &[i64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().map(|&x| x as f64).sum::<f64>() / n;
    let m2 = xs.iter().map(|&x| (x as f64 - mean).powi(2)).sum::<f64>() / n;
    let m4 = xs.iter().map(|&x| (x as f64 - mean).powi(4)).sum::<f64>() / n;
    (mean, m2, ((m4 - m2 * m2).max(0.0) / n).sqrt())
}

/// Double-dimer height at the center face for `samples` independent pairs
/// per radius. With `same_pair` the two matchings coincide.
pub fn variance_experiment(
    family: Family,
    mode: BoundaryMode,
    radii: &[usize],
    samples: usize,
    seed: u64,
    same_pair: bool,
) -> Result<VarianceTable> {
    if radii.is_empty() || samples < 2 {
        return Err(Error::InvalidParameter("need radii and at least two samples".into()));
    }
    let mut rows = Vec::new();
    let mut warnings = Vec::new();
    for &r in radii {
        let region = family_region(family, r, mode)?;
        let fg = FaceGraph::new(&region);
        let center = fg.center().ok_or_else(|| Error::BadRegion("root face has no inside kite".into()))?;
        let path = fg.path_from_outer(center);
        let sampler = TemperleySampler::new(&region)?;
        let name = format!("variance/{family:?}/{mode:?}/{r}");
        let hs: Vec<i64> = (0..samples)
            .into_par_iter()
            .map(|i| {
                let mut rng1 = stream_rng(seed, &name, 2 * i as u64);
                let m1 = sampler.sample(&mut rng1)?;
                if same_pair {
                    return Ok(height_along(&fg, &path, &m1, &m1));
                }
                let mut rng2 = stream_rng(seed, &name, 2 * i as u64 + 1);
                let m2 = sampler.sample(&mut rng2)?;
                Ok(height_along(&fg, &path, &m1, &m2))
            })
            .collect::<Result<_>>()?;
        let (mean, var, stderr) = moments(&hs);
        if samples < 1000 {
            warnings.push(format!("radius {r}: {samples} samples give a rough standard error"));
        }
        rows.push(VarianceRow { radius: r, n: samples, mean, var, stderr });
    }
    let (slope, slope_stderr) = if rows.len() >= 2 {
        let xs: Vec<f64> = rows.iter().map(|r| (r.radius as f64).ln()).collect();
        let ys: Vec<f64> = rows.iter().map(|r| r.var).collect();
        let (slope, _, _) = linear_fit(&xs, &ys);
        let mx = xs.iter().sum::<f64>() / xs.len() as f64;
        let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
        let se = xs.iter().zip(&rows).map(|(x, r)| ((x - mx) / sxx * r.stderr).powi(2)).sum::<f64>().sqrt();
        (slope, se)
    } else {
        (f64::NAN, f64::NAN)
    };
    Ok(VarianceTable { family, mode, rows, slope, slope_stderr, warnings })
}

/// Double-dimer loops as SVG over the region's edges; counterclockwise
/// loops red, clockwise loops blue.
pub fn loops_svg(region: &Region, d: &CycleDecomposition) -> String {
    use std::fmt::Write;
    let sg = &region.sg;
    let pts = region
        .blacks
        .iter()
        .map(|&b| (sg.black_pos[b], 0.0))
        .chain(region.whites.iter().map(|&w| (sg.white_pos[w], 0.0)));
    let frame = crate::packing::Frame::fit(pts);
    let mut s = frame.open();
    for (w, b) in region.edges() {
        let (x1, y1) = frame.xy(sg.white_pos[w]);
        let (x2, y2) = frame.xy(sg.black_pos[b]);
        let _ = writeln!(s, "<line x1=\"{x1:.3}\" y1=\"{y1:.3}\" x2=\"{x2:.3}\" y2=\"{y2:.3}\" stroke=\"#ddd\" stroke-width=\"0.4\"/>");
    }
    for cycle in &d.cycles {
        let mut ring = Vec::with_capacity(2 * cycle.len());
        for &(w, b, from_first) in cycle {
            if from_first {
                ring.push(sg.white_pos[w]);
                ring.push(sg.black_pos[b]);
            } else {
                ring.push(sg.black_pos[b]);
                ring.push(sg.white_pos[w]);
            }
        }
        ring.dedup();
        let area: f64 = (0..ring.len()).map(|i| (ring[i].conj() * ring[(i + 1) % ring.len()]).im).sum();
        let color = if area > 0.0 { "red" } else { "blue" };
        let points: Vec<String> = ring
            .iter()
            .map(|&z| {
                let (x, y) = frame.xy(z);
                format!("{x:.3},{y:.3}")
            })
            .collect();
        let _ = writeln!(s, "<polygon points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"/>", points.join(" "));
    }
    s.push_str("</svg>\n");
    s
}
