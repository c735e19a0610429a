use std::fmt::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::DoublePacking;
use crate::error::{Error, Result};
use crate::lattice::{Geometry, RotationPlanarGraph};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CircleRecord {
    pub id: usize,
    pub center: [f64; 2],
    pub radius: f64,
    pub native_radius: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PackingJson {
    pub geometry: Geometry,
    pub primal: Vec<CircleRecord>,
    pub dual: Vec<CircleRecord>,
    pub tangency: Vec<[f64; 2]>,
    pub residual_history: Vec<f64>,
}

pub fn packing_to_json(p: &DoublePacking) -> Result<String> {
    let rec = |id: usize, c: Complex64, r: f64, nr: f64| CircleRecord {
        id,
        center: [c.re, c.im],
        radius: r,
        native_radius: nr,
    };
    let j = PackingJson {
        geometry: p.geometry,
        primal: (0..p.primal_center.len())
            .map(|v| rec(v, p.primal_center[v], p.primal_euclid_radius[v], p.primal_radius[v]))
            .collect(),
        dual: (0..p.dual_center.len())
            .filter(|&f| p.dual_euclid_radius[f].is_finite())
            .map(|f| rec(f, p.dual_center[f], p.dual_euclid_radius[f], p.dual_radius[f]))
            .collect(),
        tangency: p.tangency.iter().map(|t| [t.re, t.im]).collect(),
        residual_history: p.residual_history.clone(),
    };
    Ok(serde_json::to_string_pretty(&j)?)
}

/// Reads a packing written by [`packing_to_json`]; `n_faces` counts the
/// outer face as well.
pub fn packing_from_json(s: &str, n_faces: usize) -> Result<DoublePacking> {
    let j: PackingJson = serde_json::from_str(s).map_err(|e| Error::Schema(e.to_string()))?;
    let nan = Complex64::new(f64::NAN, f64::NAN);
    let mut dual_center = vec![nan; n_faces];
    let mut dual_euclid_radius = vec![f64::NAN; n_faces];
    let mut dual_radius = vec![f64::NAN; n_faces];
    for c in &j.dual {
        if c.id >= n_faces {
            return Err(Error::Schema(format!("dual circle id {} out of range", c.id)));
        }
        dual_center[c.id] = Complex64::new(c.center[0], c.center[1]);
        dual_euclid_radius[c.id] = c.radius;
        dual_radius[c.id] = c.native_radius;
    }
    Ok(DoublePacking {
        geometry: j.geometry,
        primal_radius: j.primal.iter().map(|c| c.native_radius).collect(),
        dual_radius,
        primal_center: j.primal.iter().map(|c| Complex64::new(c.center[0], c.center[1])).collect(),
        primal_euclid_radius: j.primal.iter().map(|c| c.radius).collect(),
        dual_center,
        dual_euclid_radius,
        tangency: j.tangency.iter().map(|t| Complex64::new(t[0], t[1])).collect(),
        residual_history: j.residual_history,
    })
}

/// Maps a bounding box of the plane onto a square SVG canvas.
pub(crate) struct Frame {
    lo: Complex64,
    scale: f64,
    pub size: f64,
}

impl Frame {
    pub(crate) fn fit(points: impl Iterator<Item = (Complex64, f64)>) -> Self {
        let (mut lo, mut hi) = (Complex64::new(f64::MAX, f64::MAX), Complex64::new(f64::MIN, f64::MIN));
        for (c, r) in points {
            lo = Complex64::new(lo.re.min(c.re - r), lo.im.min(c.im - r));
            hi = Complex64::new(hi.re.max(c.re + r), hi.im.max(c.im + r));
        }
        let size = 800.0;
        let span = (hi.re - lo.re).max(hi.im - lo.im).max(1e-12);
        Frame { lo, scale: size / span, size }
    }
    pub(crate) fn xy(&self, z: Complex64) -> (f64, f64) {
        ((z.re - self.lo.re) * self.scale, self.size - (z.im - self.lo.im) * self.scale)
    }
    pub(crate) fn open(&self) -> String {
        format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{0}\" viewBox=\"0 0 {0} {0}\">\n",
            self.size
        )
    }
}

/// Both packings as SVG: primal circles red, dual circles blue, edges thin gray.
pub fn packing_to_svg(g: &RotationPlanarGraph, p: &DoublePacking) -> String {
    let (mut lo, mut hi) = (Complex64::new(f64::MAX, f64::MAX), Complex64::new(f64::MIN, f64::MIN));
    for (c, r) in p.primal_center.iter().zip(&p.primal_euclid_radius) {
        lo = Complex64::new(lo.re.min(c.re - r), lo.im.min(c.im - r));
        hi = Complex64::new(hi.re.max(c.re + r), hi.im.max(c.im + r));
    }
    let size = 800.0;
    let span = (hi.re - lo.re).max(hi.im - lo.im).max(1e-12);
    let scale = size / span;
    let tx = |z: Complex64| ((z.re - lo.re) * scale, size - (z.im - lo.im) * scale);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" viewBox="0 0 {size} {size}">"#
    );
    if p.geometry == Geometry::Hyperbolic {
        let (cx, cy) = tx(Complex64::new(0.0, 0.0));
        let _ = writeln!(s, r#"<circle cx="{cx:.3}" cy="{cy:.3}" r="{:.3}" fill="none" stroke="black"/>"#, scale);
    }
    for e in 0..g.n_edges() {
        let (a, b) = g.endpoints(e);
        let ((x1, y1), (x2, y2)) = (tx(p.primal_center[a]), tx(p.primal_center[b]));
        let _ = writeln!(
            s,
            r##"<line x1="{x1:.3}" y1="{y1:.3}" x2="{x2:.3}" y2="{y2:.3}" stroke="#999" stroke-width="0.5"/>"##
        );
    }
    for (c, r) in p.primal_center.iter().zip(&p.primal_euclid_radius) {
        let (x, y) = tx(*c);
        let _ = writeln!(s, r#"<circle cx="{x:.3}" cy="{y:.3}" r="{:.3}" fill="none" stroke="red"/>"#, r * scale);
    }
    for (c, r) in p.dual_center.iter().zip(&p.dual_euclid_radius) {
        if r.is_finite() {
            let (x, y) = tx(*c);
            let _ = writeln!(s, r#"<circle cx="{x:.3}" cy="{y:.3}" r="{:.3}" fill="none" stroke="blue"/>"#, r * scale);
        }
    }
    s.push_str("</svg>\n");
    s
}
