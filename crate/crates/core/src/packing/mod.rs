//! Double circle packings: one circle per vertex and one per interior face,
//! primal circles tangent along edges, each face circle orthogonal to the
//! circles of its vertices.
//!
//! Radii are found by nonlinear Gauss-Seidel on the angle sums of the right
//! kites `(v, f)`. Hyperbolic packings are laid out in the Poincaré disk, and
//! every center and radius stored here is Euclidean in that chart; the native
//! hyperbolic radii are kept separately.

mod render;

use std::collections::VecDeque;
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{EdgeId, FaceId, Geometry, RotationPlanarGraph, VertexId};

pub(crate) use render::Frame;
pub use render::{packing_from_json, packing_to_json, packing_to_svg, PackingJson};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryCondition {
    /// Native radius 1 on every boundary vertex.
    UnitRadius,
    /// The same native radius on every boundary vertex.
    Uniform(f64),
    /// Native radius per vertex; only boundary entries are read.
    Prescribed(Vec<f64>),
}

#[derive(Debug, Clone)]
pub struct PackingOptions {
    pub geometry: Geometry,
    pub boundary: BoundaryCondition,
    /// Target for the largest angle-sum defect.
    pub tol: f64,
    pub max_sweeps: usize,
}

impl PackingOptions {
    pub fn new(geometry: Geometry, boundary: BoundaryCondition) -> Self {
        Self { geometry, boundary, tol: 1e-13, max_sweeps: 200_000 }
    }

    /// Boundary radii of the regular `{p,q}` packing, so that the solution is
    /// the symmetric one.
    pub fn regular(p: usize, q: usize) -> Result<Self> {
        let geometry = Geometry::of(p, q)?;
        let r = regular_primal_radius(p, q)?;
        Ok(Self::new(geometry, BoundaryCondition::Uniform(r)))
    }
}

/// Native primal radius of the regular `{p,q}` double packing: half the edge
/// length (Euclidean edges have length 2).
pub fn regular_primal_radius(p: usize, q: usize) -> Result<f64> {
    match Geometry::of(p, q)? {
        Geometry::Euclidean => Ok(1.0),
        Geometry::Hyperbolic => {
            let c = (PI / p as f64).cos() / (PI / q as f64).sin();
            Ok(c.acosh())
        }
    }
}

#[derive(Debug, Clone)]
pub struct DoublePacking {
    pub geometry: Geometry,
    /// Native radius per vertex.
    pub primal_radius: Vec<f64>,
    /// Native radius per face; NaN for the outer face.
    pub dual_radius: Vec<f64>,
    /// Euclidean center and radius per vertex in the drawing chart.
    pub primal_center: Vec<Complex64>,
    pub primal_euclid_radius: Vec<f64>,
    /// Euclidean center and radius per face; NaN for the outer face.
    pub dual_center: Vec<Complex64>,
    pub dual_euclid_radius: Vec<f64>,
    /// Tangency point of the two primal circles of each edge.
    pub tangency: Vec<Complex64>,
    /// Largest angle-sum defect after each sweep.
    pub residual_history: Vec<f64>,
}

#[inline]
fn kite_angle(geom: Geometry, r_self: f64, r_other: f64) -> f64 {
    match geom {
        Geometry::Euclidean => 2.0 * (r_other / r_self).atan(),
        Geometry::Hyperbolic => 2.0 * (r_other.tanh() / r_self.sinh()).atan(),
    }
}

/// Derivative of the kite angle with respect to `ln r_self`.
#[inline]
fn kite_angle_dlog(geom: Geometry, r_self: f64, r_other: f64) -> f64 {
    match geom {
        Geometry::Euclidean => {
            let t = r_other / r_self;
            -2.0 * t / (1.0 + t * t)
        }
        Geometry::Hyperbolic => {
            let a = r_other.tanh();
            let s = r_self.sinh();
            -2.0 * a * r_self.cosh() * r_self / (s * s + a * a)
        }
    }
}

/// Radius `r` with `sum_i kite_angle(r, others[i]) = 2 pi`.
fn solve_angle_equation(geom: Geometry, others: &[f64], start: f64) -> Result<f64> {
    if others.len() < 3 {
        return Err(Error::InvalidGraph("a circle needs at least three kites".into()));
    }
    let f = |x: f64| -> (f64, f64) {
        let r = x.exp();
        let mut val = -2.0 * PI;
        let mut der = 0.0;
        for &o in others {
            val += kite_angle(geom, r, o);
            der += kite_angle_dlog(geom, r, o);
        }
        (val, der)
    };
    let mut x = start.ln();
    let (mut lo, mut hi) = (x - 1.0, x + 1.0);
    while f(lo).0 < 0.0 {
        lo -= 2.0;
        if lo < -700.0 {
            return Err(Error::NoConvergence("radius underflow".into()));
        }
    }
    while f(hi).0 > 0.0 {
        hi += 2.0;
        if hi > 700.0 {
            return Err(Error::NoConvergence("radius overflow".into()));
        }
    }
    for _ in 0..200 {
        let (v, d) = f(x);
        if v > 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let mut nx = x - v / d;
        if !(nx > lo && nx < hi) || d == 0.0 {
            nx = 0.5 * (lo + hi);
        }
        if (nx - x).abs() < 1e-15 * (1.0 + x.abs()) {
            x = nx;
            break;
        }
        x = nx;
    }
    Ok(x.exp())
}

struct Incidence {
    /// Interior faces around each vertex.
    vertex_faces: Vec<Vec<FaceId>>,
    face_vertices: Vec<Vec<VertexId>>,
}

fn incidence(g: &RotationPlanarGraph) -> Incidence {
    let mut vertex_faces = vec![Vec::new(); g.n_vertices()];
    let mut face_vertices = vec![Vec::new(); g.n_faces()];
    for f in g.interior_faces() {
        for v in g.face_vertices(f) {
            vertex_faces[v].push(f);
            face_vertices[f].push(v);
        }
    }
    Incidence { vertex_faces, face_vertices }
}

fn boundary_radius(bc: &BoundaryCondition, v: VertexId) -> Result<f64> {
    let r = match bc {
        BoundaryCondition::UnitRadius => 1.0,
        BoundaryCondition::Uniform(r) => *r,
        BoundaryCondition::Prescribed(rs) => *rs
            .get(v)
            .ok_or_else(|| Error::InvalidParameter(format!("no prescribed radius for vertex {v}")))?,
    };
    if !(r.is_finite() && r > 0.0) {
        return Err(Error::InvalidParameter(format!("boundary radius {r} at vertex {v}")));
    }
    Ok(r)
}

/// Largest angle-sum defect over interior vertices and interior faces.
pub fn angle_residual(g: &RotationPlanarGraph, geom: Geometry, rv: &[f64], rf: &[f64]) -> f64 {
    let inc = incidence(g);
    let mut worst: f64 = 0.0;
    for v in 0..g.n_vertices() {
        if g.is_boundary_vertex(v) {
            continue;
        }
        let s: f64 = inc.vertex_faces[v].iter().map(|&f| kite_angle(geom, rv[v], rf[f])).sum();
        worst = worst.max((s - 2.0 * PI).abs());
    }
    for f in g.interior_faces() {
        let s: f64 = inc.face_vertices[f].iter().map(|&v| kite_angle(geom, rf[f], rv[v])).sum();
        worst = worst.max((s - 2.0 * PI).abs());
    }
    worst
}

pub fn solve_double_packing(g: &RotationPlanarGraph, opts: &PackingOptions) -> Result<DoublePacking> {
    let geom = opts.geometry;
    let inc = incidence(g);
    let nv = g.n_vertices();
    let mut rv = vec![f64::NAN; nv];
    let mut rf = vec![f64::NAN; g.n_faces()];
    let mut interior = Vec::new();
    let mut mean = 0.0;
    let mut nb = 0usize;
    for v in 0..nv {
        if g.is_boundary_vertex(v) {
            rv[v] = boundary_radius(&opts.boundary, v)?;
            mean += rv[v];
            nb += 1;
        } else {
            interior.push(v);
        }
    }
    mean /= nb as f64;
    for &v in &interior {
        rv[v] = mean;
    }
    for f in g.interior_faces() {
        rf[f] = mean;
    }
    let mut history = Vec::new();
    let mut residual = angle_residual(g, geom, &rv, &rf);
    history.push(residual);
    let mut sweeps = 0;
    let mut buf = Vec::new();
    while residual > opts.tol {
        if sweeps >= opts.max_sweeps {
            return Err(Error::NoConvergence(format!(
                "angle defect {residual:.3e} after {sweeps} sweeps"
            )));
        }
        for f in g.interior_faces() {
            buf.clear();
            buf.extend(inc.face_vertices[f].iter().map(|&v| rv[v]));
            rf[f] = solve_angle_equation(geom, &buf, rf[f])?;
        }
        for &v in &interior {
            buf.clear();
            buf.extend(inc.vertex_faces[v].iter().map(|&f| rf[f]));
            rv[v] = solve_angle_equation(geom, &buf, rv[v])?;
        }
        sweeps += 1;
        let next = angle_residual(g, geom, &rv, &rf);
        history.push(next);
        if sweeps > 50 && next >= residual && next < 1e3 * opts.tol {
            // Rounding floor reached.
            break;
        }
        residual = next;
    }
    let mut packing = layout(g, geom, rv, rf)?;
    packing.residual_history = history;
    Ok(packing)
}

/// Places circles from known native radii.
pub fn layout(g: &RotationPlanarGraph, geom: Geometry, rv: Vec<f64>, rf: Vec<f64>) -> Result<DoublePacking> {
    let chart = Chart(geom);
    let nv = g.n_vertices();
    let nf = g.n_faces();
    let mut zv: Vec<Option<Complex64>> = vec![None; nv];
    let mut zf: Vec<Option<Complex64>> = vec![None; nf];
    let root = g.root_face();
    let h0 = g.face_half_edges(root)[0];
    let v0 = g.origin(h0);
    zv[v0] = Some(Complex64::new(0.0, 0.0));
    let mut queue = VecDeque::from([(v0, h0, 0.0f64)]);
    while let Some((v, hk, phik)) = queue.pop_front() {
        let z = zv[v].unwrap();
        let list = if g.is_boundary_vertex(v) { g.outgoing_from_boundary(v) } else { g.outgoing(v) };
        let wraps = !g.is_boundary_vertex(v);
        let k0 = list.iter().position(|&h| h == hk).unwrap();
        let m = list.len();
        let mut phi = vec![f64::NAN; m];
        phi[k0] = phik;
        let angle = |h: usize| -> Option<f64> {
            let f = g.face(h);
            (f != g.outer_face()).then(|| kite_angle(geom, rv[v], rf[f]))
        };
        let mut k = k0;
        loop {
            let kn = (k + 1) % m;
            if kn == k0 || (!wraps && kn == 0) {
                break;
            }
            match angle(list[k]) {
                Some(a) => phi[kn] = phi[k] + a,
                None => break,
            }
            k = kn;
        }
        let mut k = k0;
        loop {
            let kp = (k + m - 1) % m;
            if kp == k0 || !phi[kp].is_nan() || (!wraps && k == 0) {
                break;
            }
            match angle(list[kp]) {
                Some(a) => phi[kp] = phi[k] - a,
                None => break,
            }
            k = kp;
        }
        for (i, &h) in list.iter().enumerate() {
            if phi[i].is_nan() {
                return Err(Error::InvalidGraph(format!("cannot orient half-edge {h} around vertex {v}")));
            }
            let u = g.head(h);
            if zv[u].is_none() {
                let zu = chart.place(z, phi[i], rv[v] + rv[u]);
                zv[u] = Some(zu);
                queue.push_back((u, h ^ 1, chart.direction(zu, z)));
            }
            let f = g.face(h);
            if f != g.outer_face() && zf[f].is_none() {
                let d = match geom {
                    Geometry::Euclidean => rv[v].hypot(rf[f]),
                    Geometry::Hyperbolic => (rv[v].cosh() * rf[f].cosh()).acosh(),
                };
                zf[f] = Some(chart.place(z, phi[i] + 0.5 * kite_angle(geom, rv[v], rf[f]), d));
            }
        }
    }
    let (primal_center, primal_euclid_radius): (Vec<_>, Vec<_>) = (0..nv)
        .map(|v| chart.euclidean_circle(zv[v].unwrap(), rv[v]))
        .unzip();
    let (dual_center, dual_euclid_radius): (Vec<_>, Vec<_>) = (0..nf)
        .map(|f| match zf[f] {
            Some(z) => chart.euclidean_circle(z, rf[f]),
            None => (Complex64::new(f64::NAN, f64::NAN), f64::NAN),
        })
        .unzip();
    let tangency = (0..g.n_edges())
        .map(|e| {
            let (a, b) = g.endpoints(e);
            let d = primal_center[b] - primal_center[a];
            primal_center[a] + d * (primal_euclid_radius[a] / d.norm())
        })
        .collect();
    Ok(DoublePacking {
        geometry: geom,
        primal_radius: rv,
        dual_radius: rf,
        primal_center,
        primal_euclid_radius,
        dual_center,
        dual_euclid_radius,
        tangency,
        residual_history: Vec::new(),
    })
}

#[derive(Clone, Copy)]
struct Chart(Geometry);

impl Chart {
    /// Point at native distance `d` from `z` in direction `phi`.
    fn place(&self, z: Complex64, phi: f64, d: f64) -> Complex64 {
        match self.0 {
            Geometry::Euclidean => z + Complex64::from_polar(d, phi),
            Geometry::Hyperbolic => {
                let w = Complex64::from_polar((0.5 * d).tanh(), phi);
                (w + z) / (Complex64::new(1.0, 0.0) + z.conj() * w)
            }
        }
    }
    /// Direction at `from` of the geodesic towards `to`.
    fn direction(&self, from: Complex64, to: Complex64) -> f64 {
        match self.0 {
            Geometry::Euclidean => (to - from).arg(),
            Geometry::Hyperbolic => ((to - from) / (Complex64::new(1.0, 0.0) - from.conj() * to)).arg(),
        }
    }
    fn euclidean_circle(&self, z: Complex64, r: f64) -> (Complex64, f64) {
        match self.0 {
            Geometry::Euclidean => (z, r),
            Geometry::Hyperbolic => {
                let rho = (0.5 * r).tanh();
                let s2 = z.norm_sqr();
                let den = 1.0 - rho * rho * s2;
                (z * ((1.0 - rho * rho) / den), rho * (1.0 - s2) / den)
            }
        }
    }
}

/// Largest defects of the geometric invariants of a laid-out packing.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CertificationReport {
    pub angle_sum: f64,
    pub tangency: f64,
    pub orthogonality: f64,
    pub dual_tangency: f64,
    pub perpendicularity: f64,
    pub max_residual: f64,
    pub tol: f64,
    pub passed: bool,
}

pub fn certify(g: &RotationPlanarGraph, p: &DoublePacking, tol: f64) -> CertificationReport {
    let angle_sum = angle_residual(g, p.geometry, &p.primal_radius, &p.dual_radius);
    let mut tangency: f64 = 0.0;
    let mut orthogonality: f64 = 0.0;
    let mut dual_tangency: f64 = 0.0;
    let mut perpendicularity: f64 = 0.0;
    for e in 0..g.n_edges() {
        let (a, b) = g.endpoints(e);
        let (ca, cb) = (p.primal_center[a], p.primal_center[b]);
        let (ra, rb) = (p.primal_euclid_radius[a], p.primal_euclid_radius[b]);
        tangency = tangency.max(((cb - ca).norm() - ra - rb).abs());
        let t = p.tangency[e];
        let dir = (cb - ca) / (cb - ca).norm();
        let (fl, fr) = g.edge_faces(e);
        let interior: Vec<FaceId> = [fl, fr].into_iter().filter(|&f| f != g.outer_face()).collect();
        for &f in &interior {
            let v = (p.dual_center[f] - t) / (p.dual_center[f] - t).norm();
            perpendicularity = perpendicularity.max((v.re * dir.re + v.im * dir.im).abs());
        }
        if let [f1, f2] = interior[..] {
            let d = p.dual_center[f2] - p.dual_center[f1];
            let td = p.dual_center[f1] + d * (p.dual_euclid_radius[f1] / d.norm());
            dual_tangency = dual_tangency.max((td - t).norm());
        }
    }
    for f in g.interior_faces() {
        for v in g.face_vertices(f) {
            let d2 = (p.dual_center[f] - p.primal_center[v]).norm_sqr();
            let s = p.dual_euclid_radius[f].powi(2) + p.primal_euclid_radius[v].powi(2);
            orthogonality = orthogonality.max((d2 - s).abs());
        }
    }
    let max_residual = angle_sum.max(tangency).max(orthogonality).max(dual_tangency).max(perpendicularity);
    CertificationReport {
        angle_sum,
        tangency,
        orthogonality,
        dual_tangency,
        perpendicularity,
        max_residual,
        tol,
        passed: max_residual < tol,
    }
}

/// Native lengths attached to an edge and to its dual edge.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdgeMetric {
    pub primal: f64,
    /// `None` when one side of the edge is the outer face.
    pub dual: Option<f64>,
}

pub fn edge_metric(g: &RotationPlanarGraph, p: &DoublePacking, e: EdgeId) -> EdgeMetric {
    let (a, b) = g.endpoints(e);
    let (fl, fr) = g.edge_faces(e);
    let dual = (fl != g.outer_face() && fr != g.outer_face()).then(|| p.dual_radius[fl] + p.dual_radius[fr]);
    EdgeMetric { primal: p.primal_radius[a] + p.primal_radius[b], dual }
}

/// Sets `nu(e)` to the primal edge length and `nu_dual(e)` to the dual edge
/// length (twice the dual radius on boundary edges).
pub fn metric_weights(g: &mut RotationPlanarGraph, p: &DoublePacking) -> Result<()> {
    let mut nu = Vec::with_capacity(g.n_edges());
    let mut nd = Vec::with_capacity(g.n_edges());
    for e in 0..g.n_edges() {
        let m = edge_metric(g, p, e);
        let (fl, fr) = g.edge_faces(e);
        let f = if fl == g.outer_face() { fr } else { fl };
        nu.push(m.primal);
        nd.push(m.dual.unwrap_or(2.0 * p.dual_radius[f]));
    }
    g.set_weights(nu, nd)
}
