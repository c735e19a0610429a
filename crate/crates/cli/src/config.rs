//! Run configuration: one TOML file plus flag overrides.

use std::path::{Path, PathBuf};

use hypdimer::heights::{BoundaryMode, Family};
use hypdimer::temperley::RegionSpec;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::Failure;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    /// Patch family used when no graph file is given.
    pub family: Family,
    /// Depth of a tiling patch, or half the side of a grid.
    pub radius: usize,
    pub boundary: BoundaryMode,
    /// Weighted rotation system in JSON replacing the family patch.
    pub graph: Option<PathBuf>,
    /// Region inside a graph file; defaults to a Temperley trim.
    pub region: Option<RegionSpec>,
    pub seed: u64,
    /// Worker threads; 0 uses every core.
    pub jobs: usize,
    pub out: PathBuf,
    pub tolerances: Tolerances,
    pub experiment: ExperimentConfig,
    pub render: RenderConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub packing_euclidean: f64,
    pub packing_hyperbolic: f64,
    /// Relative tolerance of the linear-algebra identities.
    pub identity: f64,
    /// Largest `|arg|` allowed in the face condition.
    pub face_angle: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub grid_radii: Vec<usize>,
    pub tiling: Family,
    pub tiling_radii: Vec<usize>,
    pub variance_mode: BoundaryMode,
    pub samples: usize,
    /// Depth of the tiling patch used for the Green decay report.
    pub green_depth: usize,
    pub green_margin: f64,
    /// Largest number of second edges per separation in the correlation scan.
    pub correlation_per_separation: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Overlay {
    /// Loops of two sampled matchings.
    Sampled,
    /// No matchings; the loop file only shows the region.
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RenderConfig {
    pub overlay: Overlay,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            family: Family::Tiling { p: 3, q: 7 },
            radius: 2,
            boundary: BoundaryMode::Temperley,
            graph: None,
            region: None,
            seed: 1,
            jobs: 0,
            out: PathBuf::from("out"),
            tolerances: Tolerances::default(),
            experiment: ExperimentConfig::default(),
            render: RenderConfig::default(),
        }
    }
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { packing_euclidean: 1e-10, packing_hyperbolic: 1e-8, identity: 1e-8, face_angle: 1e-6 }
    }
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            grid_radii: vec![2, 4, 8],
            tiling: Family::Tiling { p: 3, q: 7 },
            tiling_radii: vec![1, 2, 3],
            variance_mode: BoundaryMode::Temperley,
            samples: 200,
            green_depth: 3,
            green_margin: 0.05,
            correlation_per_separation: 100_000,
        }
    }
}

impl Default for RenderConfig {
    fn default() -> Self {
        RenderConfig { overlay: Overlay::Sampled }
    }
}

impl RunConfig {
    /// Parses a TOML file; relative paths inside it are taken from its directory.
    pub fn load(path: &Path) -> Result<Self, Failure> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::Config(format!("cannot read config {}: {e}", path.display())))?;
        let mut cfg: RunConfig =
            toml::from_str(&text).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        if let Some(g) = &cfg.graph {
            if g.is_relative() {
                cfg.graph = Some(base.join(g));
            }
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), Failure> {
        let t = &self.tolerances;
        if [t.packing_euclidean, t.packing_hyperbolic, t.identity, t.face_angle].iter().any(|&x| !(x > 0.0)) {
            return Err(Failure::Config("tolerances must be positive".into()));
        }
        let e = &self.experiment;
        if e.samples < 2 {
            return Err(Failure::Config("experiment.samples must be at least 2".into()));
        }
        if e.grid_radii.contains(&0) {
            return Err(Failure::Config("grid radii must be positive".into()));
        }
        if !matches!(e.tiling, Family::Tiling { .. }) {
            return Err(Failure::Config("experiment.tiling must be a tiling family".into()));
        }
        Ok(())
    }

    /// Canonical JSON of the resolved configuration.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    /// Hash of the canonical JSON with the output directory and thread
    /// count cleared, since neither changes any result.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.out = PathBuf::new();
        c.jobs = 0;
        let digest = Sha256::digest(c.canonical_json().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Version, config hash and the full resolved configuration.
#[derive(Debug, Clone, Serialize)]
pub struct Provenance {
    pub version: &'static str,
    pub config_hash: String,
    pub config: RunConfig,
}

impl Provenance {
    pub fn of(cfg: &RunConfig) -> Self {
        Provenance { version: hypdimer::VERSION, config_hash: cfg.hash(), config: cfg.clone() }
    }

    /// First line of every CSV artifact.
    pub fn csv_header(&self) -> String {
        format!("# hypdimer {} config {}\n", self.version, self.config_hash)
    }
}
