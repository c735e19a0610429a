//! Identity suites on the configured region.

use hypdimer::kasteleyn::{
    block_structure, build_dirac, face_condition_residual, invert_dirac, log_partition_function, Variant,
};
use hypdimer::lattice::graph_to_json;
use hypdimer::packing::{certify, packing_to_json};
use hypdimer::potential::{inverse_dirac_table, laplacian, wired_networks, Flavor, GreenTable};
use nalgebra::DMatrix;
use serde::Serialize;

use crate::config::{Provenance, RunConfig};
use crate::setup::{build, packing_tol, Setup};
use crate::{write_file, Failure};

#[derive(Debug, Clone, Serialize)]
pub struct SuiteResult {
    pub name: String,
    pub residual: f64,
    pub tol: f64,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub version: &'static str,
    pub config_hash: String,
    pub config: RunConfig,
    pub suites: Vec<SuiteResult>,
    pub passed: bool,
}

fn suite(name: &str, tol: f64, r: hypdimer::Result<f64>) -> SuiteResult {
    match r {
        Ok(residual) => SuiteResult { name: name.into(), residual, tol, passed: residual <= tol, error: None },
        Err(e) => SuiteResult {
            name: name.into(),
            residual: f64::INFINITY,
            tol,
            passed: false,
            error: Some(e.to_string()),
        },
    }
}

fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0, |a, x| a.max(x.abs()))
}

/// `D* D` of the normalized matrix against the wired Laplacians, plus the
/// part of `D* D` outside the block pattern.
fn block_laplacian_residual(s: &Setup) -> hypdimer::Result<f64> {
    let d = build_dirac(&s.region, Variant::Normalized)?;
    let bs = block_structure(&d);
    let nets = wired_networks(&s.region);
    let mut worst = bs.pattern_defect;
    let sides = [
        (&bs.primal_blacks, &bs.delta_primal, &nets.primal, nets.primal_sink),
        (&bs.dual_blacks, &bs.delta_dual, &nets.dual, nets.dual_sink),
    ];
    for (blacks, delta, net, sink) in sides {
        let l = laplacian(net, Flavor::Dirichlet { absorbing: vec![sink] })?;
        let rows: Vec<usize> = blacks
            .iter()
            .map(|&b| l.index[nets.vertex_of(b).expect("region black")].expect("not the sink"))
            .collect();
        let mut diff = delta.clone();
        for i in 0..rows.len() {
            for j in 0..rows.len() {
                diff[(i, j)] -= l.matrix[(rows[i], rows[j])];
            }
        }
        worst = worst.max(max_abs(&diff) / max_abs(delta).max(1.0));
    }
    Ok(worst)
}

/// `|det D|` against `prod nu_dual` times the weighted tree count of the
/// primal wired network.
fn determinant_residual(s: &Setup) -> hypdimer::Result<f64> {
    let d = build_dirac(&s.region, Variant::Raw)?;
    let log_z = log_partition_function(&d)?;
    let nets = wired_networks(&s.region);
    let l = laplacian(&nets.primal, Flavor::Dirichlet { absorbing: vec![nets.primal_sink] })?;
    let chol = l
        .matrix
        .clone()
        .cholesky()
        .ok_or_else(|| hypdimer::Error::Singular("wired Laplacian is not positive definite".into()))?;
    let log_trees: f64 = 2.0 * chol.l().diagonal().iter().map(|x| x.ln()).sum::<f64>();
    let log_dual: f64 = s.region.whites.iter().map(|&w| s.sg.graph.nu_dual(w).ln()).sum();
    Ok(((log_z - log_trees - log_dual).exp() - 1.0).abs())
}

fn green_inverse_residual(s: &Setup) -> hypdimer::Result<f64> {
    let d = build_dirac(&s.region, Variant::Normalized)?;
    let lu = invert_dirac(&d)?.inv;
    let green = inverse_dirac_table(&d)?;
    let scale = lu.iter().fold(0.0f64, |a, z| a.max(z.norm()));
    Ok((green - &lu).iter().fold(0.0f64, |a, z| a.max(z.norm())) / scale)
}

fn inverse_residual(s: &Setup) -> hypdimer::Result<f64> {
    let d = build_dirac(&s.region, Variant::Normalized)?;
    let inv = invert_dirac(&d)?;
    let m = d.dense();
    let prod = &m * &inv.inv;
    let n = prod.nrows();
    Ok((0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| (prod[(i, j)] - if i == j { 1.0 } else { 0.0 }).norm())
        .fold(0.0, f64::max))
}

fn green_delta_residual(s: &Setup) -> hypdimer::Result<f64> {
    let nets = wired_networks(&s.region);
    let l = laplacian(&nets.primal, Flavor::Dirichlet { absorbing: vec![nets.primal_sink] })?;
    Ok(GreenTable::new(&l)?.delta_residual(&l))
}

pub fn run(cfg: &RunConfig) -> Result<Report, Failure> {
    let s = build(cfg)?;
    let out = &cfg.out;
    let prov = Provenance::of(cfg);
    write_file(&out.join("graph.json"), &graph_to_json(&s.sg.graph).map_err(Failure::invariant)?)?;
    write_file(&out.join("packing.json"), &packing_to_json(&s.sg.packing).map_err(Failure::invariant)?)?;
    write_file(&out.join("region.json"), &serde_json::to_string_pretty(&s.spec).expect("region serializes"))?;
    let tol = cfg.tolerances.identity;
    let ptol = packing_tol(cfg, s.sg.packing.geometry);
    let suites = vec![
        suite("packing_certification", ptol, Ok(certify(&s.sg.graph, &s.sg.packing, ptol).max_residual)),
        suite("face_condition", cfg.tolerances.face_angle, face_condition_residual(&s.region)),
        suite("dirac_block_laplacian", tol, block_laplacian_residual(&s)),
        suite("determinant_tree_count", tol, determinant_residual(&s)),
        suite("inverse_green_vs_lu", tol, green_inverse_residual(&s)),
        suite("dirac_inverse_identity", tol, inverse_residual(&s)),
        suite("green_delta", tol, green_delta_residual(&s)),
    ];
    let passed = suites.iter().all(|x| x.passed);
    let report = Report { version: prov.version, config_hash: prov.config_hash, config: prov.config, suites, passed };
    write_file(&out.join("report.json"), &serde_json::to_string_pretty(&report).expect("report serializes"))?;
    Ok(report)
}

pub fn first_failure(report: &Report) -> Option<&SuiteResult> {
    report.suites.iter().find(|s| !s.passed)
}

