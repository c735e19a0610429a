//! JSON exchange format for weighted rotation systems.
//!
//! Half-edges must come in twin pairs `(2e, 2e + 1)`; faces are named by a
//! half-edge on their boundary since face ids are derived on load.

use serde::{Deserialize, Serialize};

use super::graph::RotationPlanarGraph;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HalfEdgeRecord {
    pub id: usize,
    pub origin: usize,
    pub twin: usize,
    pub next: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeWeightRecord {
    pub edge: usize,
    pub nu: f64,
    pub nu_dual: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FaceMarker {
    pub half_edge: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphJson {
    pub vertices: Vec<usize>,
    pub half_edges: Vec<HalfEdgeRecord>,
    pub edge_weights: Vec<EdgeWeightRecord>,
    pub marked_outer_face: FaceMarker,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub root_face: Option<FaceMarker>,
    /// One half-edge per face in face-id order, outer face last.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub faces: Option<Vec<FaceMarker>>,
}

impl GraphJson {
    pub fn from_graph(g: &RotationPlanarGraph) -> Self {
        let half_edges = (0..g.n_half_edges())
            .map(|h| HalfEdgeRecord { id: h, origin: g.origin(h), twin: h ^ 1, next: g.next(h) })
            .collect();
        let edge_weights = (0..g.n_edges())
            .map(|e| EdgeWeightRecord { edge: e, nu: g.nu(e), nu_dual: g.nu_dual(e) })
            .collect();
        GraphJson {
            vertices: (0..g.n_vertices()).collect(),
            half_edges,
            edge_weights,
            marked_outer_face: FaceMarker { half_edge: g.face_half_edges(g.outer_face())[0] },
            root_face: Some(FaceMarker { half_edge: g.face_half_edges(g.root_face())[0] }),
            faces: Some((0..g.n_faces()).map(|f| FaceMarker { half_edge: g.face_half_edges(f)[0] }).collect()),
        }
    }

    pub fn to_graph(&self) -> Result<RotationPlanarGraph> {
        let n = self.vertices.len();
        if self.vertices.iter().enumerate().any(|(i, &v)| i != v) {
            return Err(Error::Schema("vertex ids must be 0..n in order".into()));
        }
        let nh = self.half_edges.len();
        let mut origin = vec![0; nh];
        let mut next = vec![0; nh];
        for (i, r) in self.half_edges.iter().enumerate() {
            if r.id != i {
                return Err(Error::Schema(format!("half-edge record {i} has id {}", r.id)));
            }
            if r.twin != (i ^ 1) {
                return Err(Error::Schema(format!("half-edge {i} must have twin {}", i ^ 1)));
            }
            origin[i] = r.origin;
            next[i] = r.next;
        }
        let mut g = RotationPlanarGraph::from_parts(n, origin, next, self.marked_outer_face.half_edge)
            .map_err(|e| Error::Schema(e.to_string()))?;
        if let Some(order) = &self.faces {
            let starts: Vec<usize> = order.iter().map(|m| m.half_edge).collect();
            g.renumber_faces(&starts).map_err(|e| Error::Schema(e.to_string()))?;
        }
        let ne = g.n_edges();
        if self.edge_weights.len() != ne {
            return Err(Error::Schema(format!("expected {ne} edge weights, got {}", self.edge_weights.len())));
        }
        let mut nu = vec![f64::NAN; ne];
        let mut nu_dual = vec![f64::NAN; ne];
        for w in &self.edge_weights {
            if w.edge >= ne || !nu[w.edge].is_nan() {
                return Err(Error::Schema(format!("bad or repeated edge id {}", w.edge)));
            }
            nu[w.edge] = w.nu;
            nu_dual[w.edge] = w.nu_dual;
        }
        g.set_weights(nu, nu_dual).map_err(|e| Error::Schema(e.to_string()))?;
        if let Some(r) = &self.root_face {
            if r.half_edge >= nh {
                return Err(Error::Schema("root face half-edge out of range".into()));
            }
            let f = g.face(r.half_edge);
            g.set_root_face(f).map_err(|e| Error::Schema(e.to_string()))?;
        }
        Ok(g)
    }
}

pub fn graph_to_json(g: &RotationPlanarGraph) -> Result<String> {
    Ok(serde_json::to_string_pretty(&GraphJson::from_graph(g))?)
}

pub fn graph_from_json(s: &str) -> Result<RotationPlanarGraph> {
    let j: GraphJson = serde_json::from_str(s).map_err(|e| Error::Schema(e.to_string()))?;
    j.to_graph()
}
