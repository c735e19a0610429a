//! Complex Dirac (Kasteleyn) matrices on balanced regions, their
//! determinants, inverses and the minors giving matching probabilities.

use std::collections::HashSet;
use std::fmt::Write;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::EdgeId;
use crate::temperley::Region;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    /// `|entry| = nu` of the edge through the white vertex.
    Raw,
    /// Raw entries times `1 / sqrt(nu(e) nu_dual(e))` on each white row.
    Normalized,
}

/// Rows are the region's whites, columns its blacks, both in increasing id.
#[derive(Debug, Clone)]
pub struct DiracMatrix {
    pub variant: Variant,
    pub region: Region,
    row_of: Vec<usize>,
    col_of: Vec<usize>,
    pub entries: Vec<(usize, usize, Complex64)>,
    /// `S(w, w)` per row.
    pub scaling: Vec<f64>,
}

impl DiracMatrix {
    pub fn n_rows(&self) -> usize {
        self.region.whites.len()
    }
    pub fn n_cols(&self) -> usize {
        self.region.blacks.len()
    }
    pub fn row(&self, w: EdgeId) -> Option<usize> {
        self.row_of.get(w).copied().filter(|&r| r != usize::MAX)
    }
    pub fn col(&self, b: usize) -> Option<usize> {
        self.col_of.get(b).copied().filter(|&c| c != usize::MAX)
    }
    pub fn entry(&self, w: EdgeId, b: usize) -> Option<Complex64> {
        let (r, c) = (self.row(w)?, self.col(b)?);
        self.entries.iter().find(|e| e.0 == r && e.1 == c).map(|e| e.2)
    }
    pub fn dense(&self) -> DMatrix<Complex64> {
        let mut m = DMatrix::zeros(self.n_rows(), self.n_cols());
        for &(r, c, v) in &self.entries {
            m[(r, c)] = v;
        }
        m
    }
}

pub fn build_dirac(region: &Region, variant: Variant) -> Result<DiracMatrix> {
    let sg = &region.sg;
    let mut row_of = vec![usize::MAX; sg.n_white()];
    let mut col_of = vec![usize::MAX; sg.n_black()];
    for (i, &w) in region.whites.iter().enumerate() {
        row_of[w] = i;
    }
    for (j, &b) in region.blacks.iter().enumerate() {
        col_of[b] = j;
    }
    let mut entries = Vec::new();
    let mut scaling = Vec::with_capacity(region.whites.len());
    for (i, &w) in region.whites.iter().enumerate() {
        let s = 1.0 / (sg.graph.nu(w) * sg.graph.nu_dual(w)).sqrt();
        scaling.push(s);
        for b in region.neighbors(w) {
            let mut v = sg.direction(w, b)? * sg.edge_weight(w, b);
            if variant == Variant::Normalized {
                v *= s;
            }
            entries.push((i, col_of[b], v));
        }
    }
    // Face condition on every kite of the region.
    for k in 0..sg.kites.len() {
        if !region.kite_inside(k) {
            continue;
        }
        let kt = sg.kites[k];
        let v = sg.primal_id(kt.vertex);
        let f = sg.dual_id(kt.face).unwrap();
        let d = |w: EdgeId, b: usize| sg.direction(w, b);
        let z = -(d(kt.white_out, f)? * d(kt.white_in, v)?) / (d(kt.white_in, f)? * d(kt.white_out, v)?);
        if !(z.re > 0.0 && z.im.abs() < 1e-6 * z.re) {
            return Err(Error::InvalidGraph(format!(
                "face condition fails at kite ({}, {}): {z}",
                kt.vertex, kt.face
            )));
        }
    }
    Ok(DiracMatrix { variant, region: region.clone(), row_of, col_of, entries, scaling })
}

/// Largest `|arg|` of the alternating direction product around the kites
/// of the region; zero when every face has the required sign.
pub fn face_condition_residual(region: &Region) -> Result<f64> {
    let sg = &region.sg;
    let mut worst: f64 = 0.0;
    for (k, kt) in sg.kites.iter().enumerate() {
        if !region.kite_inside(k) {
            continue;
        }
        let v = sg.primal_id(kt.vertex);
        let f = sg.dual_id(kt.face).unwrap();
        let d = |w: EdgeId, b: usize| sg.direction(w, b);
        let z = -(d(kt.white_out, f)? * d(kt.white_in, v)?) / (d(kt.white_in, f)? * d(kt.white_out, v)?);
        worst = worst.max(z.arg().abs());
    }
    Ok(worst)
}

fn require_square(d: &DiracMatrix) -> Result<()> {
    if d.n_rows() != d.n_cols() {
        return Err(Error::BadRegion(format!("{} x {} matrix is not square", d.n_rows(), d.n_cols())));
    }
    Ok(())
}

/// `ln |det|`, or `-inf` for a singular matrix.
pub fn log_abs_det(m: &DMatrix<Complex64>) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    let lu = m.clone().lu();
    let u = lu.u();
    (0..u.nrows()).map(|i| u[(i, i)].norm().ln()).sum()
}

/// `|det|` of the Dirac matrix: the weighted number of perfect matchings.
pub fn partition_function(d: &DiracMatrix) -> Result<f64> {
    require_square(d)?;
    Ok(log_abs_det(&d.dense()).exp())
}

pub fn log_partition_function(d: &DiracMatrix) -> Result<f64> {
    require_square(d)?;
    Ok(log_abs_det(&d.dense()))
}

/// Inverse of a Dirac matrix, indexed black x white.
#[derive(Debug, Clone)]
pub struct DiracInverse {
    pub inv: DMatrix<Complex64>,
    /// `||D||_1 ||D^-1||_1`.
    pub condition: f64,
    row_of: Vec<usize>,
    col_of: Vec<usize>,
}

impl DiracInverse {
    /// `D^{-1}(b, w)` by superposition-graph ids.
    pub fn get(&self, b: usize, w: EdgeId) -> Complex64 {
        self.inv[(self.col_of[b], self.row_of[w])]
    }
}

fn norm1(m: &DMatrix<Complex64>) -> f64 {
    (0..m.ncols()).map(|j| m.column(j).iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max)
}

pub fn invert_dirac(d: &DiracMatrix) -> Result<DiracInverse> {
    require_square(d)?;
    let m = d.dense();
    let inv = m
        .clone()
        .lu()
        .try_inverse()
        .ok_or_else(|| Error::Singular("Dirac matrix has no inverse".into()))?;
    if inv.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Singular("Dirac inverse is not finite".into()));
    }
    let condition = norm1(&m) * norm1(&inv);
    Ok(DiracInverse { inv, condition, row_of: d.row_of.clone(), col_of: d.col_of.clone() })
}

/// Same inverse through a fully pivoted factorization.
pub fn invert_dirac_full_pivot(d: &DiracMatrix) -> Result<DMatrix<Complex64>> {
    require_square(d)?;
    d.dense()
        .full_piv_lu()
        .try_inverse()
        .ok_or_else(|| Error::Singular("Dirac matrix has no inverse".into()))
}

fn check_edges(d: &DiracMatrix, edges: &[(EdgeId, usize)]) -> Result<Vec<(usize, usize, f64)>> {
    edges
        .iter()
        .map(|&(w, b)| {
            let v = d
                .entry(w, b)
                .ok_or_else(|| Error::InvalidParameter(format!("({w}, {b}) is not an edge of the region")))?;
            Ok((d.row(w).unwrap(), d.col(b).unwrap(), v.norm()))
        })
        .collect()
}

fn shares_vertex(edges: &[(EdgeId, usize)]) -> bool {
    let ws: HashSet<EdgeId> = edges.iter().map(|e| e.0).collect();
    let bs: HashSet<usize> = edges.iter().map(|e| e.1).collect();
    ws.len() != edges.len() || bs.len() != edges.len()
}

/// Probability that every listed edge `(white, black)` is in a uniformly
/// weighted random perfect matching.
pub fn local_stats(d: &DiracMatrix, inv: &DiracInverse, edges: &[(EdgeId, usize)]) -> Result<f64> {
    let idx = check_edges(d, edges)?;
    if edges.is_empty() {
        return Ok(1.0);
    }
    if shares_vertex(edges) {
        return Ok(0.0);
    }
    let t = idx.len();
    let minor = DMatrix::from_fn(t, t, |i, j| inv.inv[(idx[i].1, idx[j].0)]);
    let weight: f64 = idx.iter().map(|e| e.2).product();
    Ok(weight * log_abs_det(&minor).exp())
}

/// Outcome of a conditional probability query.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Conditional {
    Value(f64),
    /// The conditioning event itself has probability zero.
    NullEvent,
}

impl Conditional {
    pub fn value(self) -> Option<f64> {
        match self {
            Conditional::Value(p) => Some(p),
            Conditional::NullEvent => None,
        }
    }
}

/// Probability that `f` lies in the matching given that the whites of `s`
/// are matched exactly as in `s`.
pub fn conditional_local_stats(
    d: &DiracMatrix,
    f: &[(EdgeId, usize)],
    s: &[(EdgeId, usize)],
) -> Result<Conditional> {
    require_square(d)?;
    let fi = check_edges(d, f)?;
    let si = check_edges(d, s)?;
    if shares_vertex(s) {
        return Err(Error::InvalidParameter("conditioning edges share a vertex".into()));
    }
    let kw: HashSet<usize> = si.iter().map(|e| e.0).collect();
    let kb: HashSet<usize> = si.iter().map(|e| e.1).collect();
    if fi.iter().any(|e| kw.contains(&e.0)) {
        return Err(Error::InvalidParameter("event and conditioning set share a white vertex".into()));
    }
    let rows: Vec<usize> = (0..d.n_rows()).filter(|r| !kw.contains(r)).collect();
    let cols: Vec<usize> = (0..d.n_cols()).filter(|c| !kb.contains(c)).collect();
    let mut row_new = vec![usize::MAX; d.n_rows()];
    let mut col_new = vec![usize::MAX; d.n_cols()];
    for (i, &r) in rows.iter().enumerate() {
        row_new[r] = i;
    }
    for (j, &c) in cols.iter().enumerate() {
        col_new[c] = j;
    }
    let mut m = DMatrix::<Complex64>::zeros(rows.len(), cols.len());
    for &(r, c, v) in &d.entries {
        if row_new[r] != usize::MAX && col_new[c] != usize::MAX {
            m[(row_new[r], col_new[c])] = v;
        }
    }
    if m.nrows() == 0 {
        return Ok(Conditional::Value(1.0));
    }
    // P(s) = |det minor| prod |D(s)| / |det D|.
    let lu = m.lu();
    let u = lu.u();
    let log_minor: f64 = (0..u.nrows()).map(|i| u[(i, i)].norm().ln()).sum();
    let log_weight: f64 = si.iter().map(|e| e.2.ln()).sum();
    let p_s = (log_minor + log_weight - log_abs_det(&d.dense())).exp();
    if !(p_s > 1e-12) {
        return Ok(Conditional::NullEvent);
    }
    if fi.iter().any(|e| kb.contains(&e.1)) || shares_vertex(f) {
        return Ok(Conditional::Value(0.0));
    }
    let inv = lu.try_inverse().ok_or_else(|| Error::Singular("reduced matrix".into()))?;
    if f.is_empty() {
        return Ok(Conditional::Value(1.0));
    }
    let t = fi.len();
    let minor = DMatrix::from_fn(t, t, |i, j| inv[(col_new[fi[i].1], row_new[fi[j].0])]);
    let weight: f64 = fi.iter().map(|e| e.2).product();
    Ok(Conditional::Value(weight * log_abs_det(&minor).exp()))
}

/// `D* D` split by black type.
#[derive(Debug, Clone)]
pub struct BlockStructure {
    pub primal_blacks: Vec<usize>,
    pub dual_blacks: Vec<usize>,
    pub delta_primal: DMatrix<f64>,
    pub delta_dual: DMatrix<f64>,
    /// `D* D` restricted to primal x dual equals `i A`.
    pub coupling: DMatrix<f64>,
    pub k_count: usize,
    /// Largest part of `D* D` that does not fit the block pattern.
    pub pattern_defect: f64,
}

pub fn block_structure(d: &DiracMatrix) -> BlockStructure {
    let m = d.dense();
    let g = m.adjoint() * &m;
    let sg = &d.region.sg;
    let (mut pr, mut du) = (Vec::new(), Vec::new());
    let (mut pc, mut dc) = (Vec::new(), Vec::new());
    for (j, &b) in d.region.blacks.iter().enumerate() {
        if sg.is_primal(b) {
            pr.push(b);
            pc.push(j);
        } else {
            du.push(b);
            dc.push(j);
        }
    }
    let mut defect: f64 = 0.0;
    let mut real_block = |cs: &[usize]| {
        DMatrix::from_fn(cs.len(), cs.len(), |i, j| {
            let z = g[(cs[i], cs[j])];
            defect = defect.max(z.im.abs());
            z.re
        })
    };
    let delta_primal = real_block(&pc);
    let delta_dual = real_block(&dc);
    let coupling = DMatrix::from_fn(pc.len(), dc.len(), |i, j| {
        let z = g[(pc[i], dc[j])];
        defect = defect.max(z.re.abs());
        z.im
    });
    let scale = g.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1.0);
    let k_count = coupling.iter().filter(|a| a.abs() > 1e-9 * scale).count();
    BlockStructure {
        primal_blacks: pr,
        dual_blacks: du,
        delta_primal,
        delta_dual,
        coupling,
        k_count,
        pattern_defect: defect,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct EdgeProbability {
    pub white: EdgeId,
    pub black: usize,
    pub probability: f64,
}

/// Single-edge probabilities for every edge of the region.
pub fn edge_probabilities(d: &DiracMatrix, inv: &DiracInverse) -> Vec<EdgeProbability> {
    d.entries
        .iter()
        .map(|&(r, c, v)| EdgeProbability {
            white: d.region.whites[r],
            black: d.region.blacks[c],
            probability: v.norm() * inv.inv[(c, r)].norm(),
        })
        .collect()
}

pub fn edge_probabilities_csv(rows: &[EdgeProbability]) -> String {
    let mut s = String::from("white,black,probability\n");
    for r in rows {
        let _ = writeln!(s, "{},{},{:.17e}", r.white, r.black, r.probability);
    }
    s
}

/// Whites of the region at each graph distance of the region from `w0`.
pub fn white_distances(region: &Region, w0: EdgeId) -> Vec<usize> {
    let sg = &region.sg;
    let mut whites_of_black = vec![Vec::new(); sg.n_black()];
    for (w, b) in region.edges() {
        whites_of_black[b].push(w);
    }
    let mut dist = vec![usize::MAX; sg.n_white()];
    dist[w0] = 0;
    let mut q = std::collections::VecDeque::from([w0]);
    while let Some(w) = q.pop_front() {
        for b in region.neighbors(w) {
            for &w2 in &whites_of_black[b] {
                if dist[w2] == usize::MAX {
                    dist[w2] = dist[w] + 2;
                    q.push_back(w2);
                }
            }
        }
    }
    dist
}

#[derive(Debug, Clone, Serialize)]
pub struct CorrelationRow {
    /// Graph distance between the two whites.
    pub separation: usize,
    pub pairs: usize,
    pub max_abs_cov: f64,
    pub mean_abs_cov: f64,
}

/// `|P(A1 and A2) - P(A1) P(A2)|` for `A1 = {e1 in M}` and single-edge
/// events `A2` at increasing separation, with `P(A1 and A2)` computed as
/// `P(A2) P(A1 | A2)` from the vertex-deleted matrix. At most `per_separation`
/// edges, evenly spread, are used at each separation.
pub fn correlation_scan(
    d: &DiracMatrix,
    inv: &DiracInverse,
    e1: (EdgeId, usize),
    per_separation: usize,
) -> Result<Vec<CorrelationRow>> {
    let p1 = local_stats(d, inv, &[e1])?;
    let dist = white_distances(&d.region, e1.0);
    let mut by_sep: std::collections::BTreeMap<usize, Vec<(EdgeId, usize)>> = Default::default();
    for (w, b) in d.region.edges() {
        if dist[w] >= 2 && dist[w] != usize::MAX && b != e1.1 {
            by_sep.entry(dist[w]).or_default().push((w, b));
        }
    }
    let mut rows = Vec::new();
    for (sep, edges) in by_sep {
        let step = edges.len().div_ceil(per_separation.max(1));
        let chosen: Vec<_> = edges.iter().step_by(step.max(1)).copied().collect();
        let mut covs = Vec::with_capacity(chosen.len());
        for e2 in chosen {
            let p2 = local_stats(d, inv, &[e2])?;
            // Conditioning on e2 removes its row and column; the inverse of the
            // minor is a rank one correction of the full inverse.
            let k22 = inv.get(e2.1, e2.0);
            let joint = if k22.norm() <= 1e-14 * inv.inv.camax() {
                0.0
            } else {
                let k11 = inv.get(e1.1, e1.0) - inv.get(e1.1, e2.0) * inv.get(e2.1, e1.0) / k22;
                p2 * d.entry(e1.0, e1.1).unwrap_or_default().norm() * k11.norm()
            };
            covs.push((joint - p1 * p2).abs());
        }
        rows.push(CorrelationRow {
            separation: sep,
            pairs: covs.len(),
            max_abs_cov: covs.iter().copied().fold(0.0, f64::max),
            mean_abs_cov: covs.iter().sum::<f64>() / covs.len() as f64,
        });
    }
    Ok(rows)
}
