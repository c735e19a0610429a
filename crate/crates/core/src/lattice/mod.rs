//! Planar graphs, regular tilings and exhaustions.

mod graph;
mod io;
mod tiling;

pub use graph::{
    contract_vertices, twin, EdgeId, FaceId, HalfEdgeId, PatchMap, RotationPlanarGraph, VertexId,
};
pub use io::{graph_from_json, graph_to_json, EdgeWeightRecord, FaceMarker, GraphJson, HalfEdgeRecord};
pub use tiling::{build_pq_tiling, exhaustion, face_layers, square_grid, ExhaustionStep, Geometry};
