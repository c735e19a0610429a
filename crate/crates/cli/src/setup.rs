//! Host graph, packing and region described by a configuration.

use std::sync::Arc;

use hypdimer::heights::{family_spec, Family};
use hypdimer::lattice::{graph_from_json, Geometry};
use hypdimer::packing::{solve_double_packing, BoundaryCondition, PackingOptions};
use hypdimer::temperley::{default_b0, superpose, Region, RegionSpec, SuperpositionGraph};

use crate::config::RunConfig;
use crate::Failure;

pub struct Setup {
    pub sg: Arc<SuperpositionGraph>,
    pub spec: RegionSpec,
    pub region: Region,
}

pub fn packing_tol(cfg: &RunConfig, geometry: Geometry) -> f64 {
    match geometry {
        Geometry::Euclidean => cfg.tolerances.packing_euclidean,
        Geometry::Hyperbolic => cfg.tolerances.packing_hyperbolic,
    }
}

fn packing_options(family: Family) -> Result<PackingOptions, Failure> {
    Ok(match family {
        Family::Grid => PackingOptions::new(Geometry::Euclidean, BoundaryCondition::UnitRadius),
        Family::Tiling { p, q } => PackingOptions::regular(p, q).map_err(|e| Failure::Config(e.to_string()))?,
    })
}

pub fn build(cfg: &RunConfig) -> Result<Setup, Failure> {
    let (sg, spec) = match &cfg.graph {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Failure::Missing(format!("cannot read graph {}: {e}", path.display())))?;
            let g = graph_from_json(&text).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
            let opts = packing_options(cfg.family)?;
            let tol = packing_tol(cfg, opts.geometry);
            let pk = solve_double_packing(&g, &opts).map_err(Failure::invariant)?;
            let sg = Arc::new(superpose(&g, &pk, tol).map_err(Failure::invariant)?);
            let spec = cfg.region.clone().unwrap_or_else(|| RegionSpec::Temperley { b0: default_b0(&sg.graph) });
            (sg, spec)
        }
        None => {
            if cfg.region.is_some() {
                return Err(Failure::Config("region is only read together with a graph file".into()));
            }
            family_spec(cfg.family, cfg.radius, cfg.boundary).map_err(Failure::from_core)?
        }
    };
    let region = spec.build(sg.clone()).map_err(Failure::from_core)?;
    Ok(Setup { sg, spec, region })
}
