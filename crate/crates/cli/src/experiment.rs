//! Monte-Carlo and determinantal experiments with provenance.

use hypdimer::heights::{variance_experiment, FaceGraph, Family};
use hypdimer::kasteleyn::{build_dirac, correlation_scan, edge_probabilities, edge_probabilities_csv, invert_dirac, Variant};
use hypdimer::lattice::build_pq_tiling;
use hypdimer::potential::{green_decay_check, GraphSide};
use serde::Serialize;

use crate::config::{Provenance, RunConfig};
use crate::setup::build;
use crate::{write_file, Failure};

#[derive(Serialize)]
struct GreenArtifact {
    version: &'static str,
    config_hash: String,
    family: Family,
    depth: usize,
    primal: hypdimer::potential::GreenDecayReport,
    dual: hypdimer::potential::GreenDecayReport,
}

/// Files written, relative to the output directory.
pub fn run(cfg: &RunConfig) -> Result<Vec<String>, Failure> {
    let prov = Provenance::of(cfg);
    let out = &cfg.out;
    let e = &cfg.experiment;
    let mut written = Vec::new();
    let mut emit = |name: &str, body: String| -> Result<(), Failure> {
        write_file(&out.join(name), &body)?;
        written.push(name.to_string());
        Ok(())
    };

    let header = prov.csv_header();
    for (name, family, radii) in
        [("variance_grid.csv", Family::Grid, &e.grid_radii), ("variance_tiling.csv", e.tiling, &e.tiling_radii)]
    {
        if radii.is_empty() {
            continue;
        }
        let t = variance_experiment(family, e.variance_mode, radii, e.samples, cfg.seed, false)
            .map_err(Failure::invariant)?;
        emit(name, format!("{header}{}", t.to_csv()))?;
    }

    let Family::Tiling { p, q } = e.tiling else {
        return Err(Failure::Config("experiment.tiling must be a tiling family".into()));
    };
    let g = build_pq_tiling(p, q, e.green_depth).map_err(|x| Failure::Config(x.to_string()))?;
    let green = GreenArtifact {
        version: prov.version,
        config_hash: prov.config_hash.clone(),
        family: e.tiling,
        depth: e.green_depth,
        primal: green_decay_check(&g, GraphSide::Primal, None, e.green_margin).map_err(Failure::invariant)?,
        dual: green_decay_check(&g, GraphSide::Dual, None, e.green_margin).map_err(Failure::invariant)?,
    };
    emit("green_decay.json", serde_json::to_string_pretty(&green).expect("report serializes"))?;

    let s = build(cfg)?;
    let d = build_dirac(&s.region, Variant::Raw).map_err(Failure::invariant)?;
    let inv = invert_dirac(&d).map_err(Failure::invariant)?;
    emit("edge_probabilities.csv", format!("{header}{}", edge_probabilities_csv(&edge_probabilities(&d, &inv))))?;
    let fg = FaceGraph::new(&s.region);
    let center = fg.center().ok_or_else(|| Failure::Invariant("region has no center face".into()))?;
    let w = s.sg.kites[fg.kites[center]].white_in;
    let e1 = (w, s.region.neighbors(w)[0]);
    let rows = correlation_scan(&d, &inv, e1, e.correlation_per_separation).map_err(Failure::invariant)?;
    let mut csv = format!("{header}# first edge white {} black {}\nseparation,pairs,max_abs_cov,mean_abs_cov\n", e1.0, e1.1);
    for r in rows {
        csv.push_str(&format!("{},{},{:.10e},{:.10e}\n", r.separation, r.pairs, r.max_abs_cov, r.mean_abs_cov));
    }
    emit("correlation.csv", csv)?;
    emit("provenance.json", serde_json::to_string_pretty(&prov).expect("provenance serializes"))?;
    Ok(written)
}
