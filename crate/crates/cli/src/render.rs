//! SVG figures from the artifacts of a verify run.

use std::sync::Arc;

use hypdimer::heights::{cycle_decomposition, loops_svg, CycleDecomposition};
use hypdimer::lattice::graph_from_json;
use hypdimer::packing::{packing_from_json, packing_to_svg};
use hypdimer::sampler::pair_sampler;
use hypdimer::temperley::{superpose, superposition_svg, RegionSpec};

use crate::config::{Overlay, RunConfig};
use crate::setup::packing_tol;
use crate::{write_file, Failure};

fn read(path: &std::path::Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Missing(format!("{}: {e}", path.display())))
}

pub fn run(cfg: &RunConfig) -> Result<Vec<String>, Failure> {
    let out = &cfg.out;
    let graph = read(&out.join("graph.json"))?;
    let packing = read(&out.join("packing.json"))?;
    let region = read(&out.join("region.json"))?;
    let g = graph_from_json(&graph).map_err(|e| Failure::Config(format!("graph.json: {e}")))?;
    let pk = packing_from_json(&packing, g.n_faces()).map_err(|e| Failure::Config(format!("packing.json: {e}")))?;
    let spec: RegionSpec =
        serde_json::from_str(&region).map_err(|e| Failure::Config(format!("region.json: {e}")))?;
    let tol = packing_tol(cfg, pk.geometry);
    let sg = Arc::new(superpose(&g, &pk, tol).map_err(Failure::invariant)?);
    let region = spec.build(sg.clone()).map_err(Failure::from_core)?;

    write_file(&out.join("packing.svg"), &packing_to_svg(&g, &pk))?;
    write_file(&out.join("superposition.svg"), &superposition_svg(&region))?;
    let loops = match cfg.render.overlay {
        Overlay::Sampled => {
            let (m1, m2) = pair_sampler(&region, cfg.seed, cfg.seed.wrapping_add(1)).map_err(Failure::invariant)?;
            cycle_decomposition(&region, &m1, &m2).map_err(Failure::invariant)?
        }
        Overlay::None => CycleDecomposition { cycles: Vec::new(), paths: Vec::new() },
    };
    write_file(&out.join("loops.svg"), &loops_svg(&region, &loops))?;
    Ok(vec!["packing.svg".into(), "superposition.svg".into(), "loops.svg".into()])
}
