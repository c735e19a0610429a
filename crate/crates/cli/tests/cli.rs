use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hypdimer")).current_dir(dir).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn write_config(dir: &Path, body: &str) -> String {
    let p = dir.join("run.toml");
    fs::write(&p, body).unwrap();
    p.display().to_string()
}

#[test]
fn default_verify_passes_every_suite() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["verify", "--out", "o"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("o/report.json")).unwrap()).unwrap();
    let suites = report["suites"].as_array().unwrap();
    assert_eq!(suites.len(), 7);
    assert!(suites.iter().all(|s| s["passed"] == true));
    assert_eq!(report["passed"], true);
    assert_eq!(report["config_hash"].as_str().unwrap().len(), 64);
    for f in ["graph.json", "packing.json", "region.json"] {
        assert!(dir.path().join("o").join(f).exists());
    }
}

#[test]
fn corrupted_graph_file_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("g.json"), "{\"half_edges\": [1, 2").unwrap();
    let cfg = write_config(dir.path(), "graph = \"g.json\"\n");
    assert_eq!(code(&run(dir.path(), &["verify", "--config", &cfg, "--out", "o"])), 2);
}

#[test]
fn missing_graph_file_is_missing_input() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "graph = \"absent.json\"\n");
    assert_eq!(code(&run(dir.path(), &["verify", "--config", &cfg, "--out", "o"])), 3);
}

#[test]
fn unknown_config_key_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "radius = 1\nradiuss = 2\n");
    let o = run(dir.path(), &["verify", "--config", &cfg]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("radiuss"));
}

#[test]
fn render_without_inputs_is_missing_input() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&run(dir.path(), &["render", "--out", "nothing"])), 3);
}

#[test]
fn tight_tolerance_fails_with_invariant_code() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "radius = 1\n");
    let o = run(dir.path(), &["verify", "--config", &cfg, "--tol", "1e-30", "--out", "o"]);
    assert_eq!(code(&o), 1);
}

const SMALL: &str = "radius = 1\n\
[experiment]\n\
grid_radii = [1, 2]\n\
tiling_radii = [1]\n\
samples = 20\n\
green_depth = 2\n\
correlation_per_separation = 50\n";

#[test]
fn experiment_is_reproducible_for_a_seed() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    for out in ["a", "b"] {
        let o = run(dir.path(), &["experiment", "--config", &cfg, "--seed", "5", "--jobs", "2", "--out", out]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    }
    for f in ["variance_grid.csv", "variance_tiling.csv", "edge_probabilities.csv", "correlation.csv", "green_decay.json"] {
        let a = fs::read(dir.path().join("a").join(f)).unwrap();
        let b = fs::read(dir.path().join("b").join(f)).unwrap();
        assert_eq!(a, b, "{f}");
    }
    let csv = fs::read_to_string(dir.path().join("a/variance_grid.csv")).unwrap();
    assert!(csv.starts_with("# hypdimer "));
    let o = run(dir.path(), &["experiment", "--config", &cfg, "--seed", "6", "--out", "c"]);
    assert_eq!(code(&o), 0);
    assert_ne!(fs::read(dir.path().join("c/variance_grid.csv")).unwrap(), csv.into_bytes());
}

#[test]
fn render_grid_draws_every_vertex_circle() {
    let dir = tempfile::tempdir().unwrap();
    // Grid radius 1 is the 2 x 2 grid with 3 x 3 vertices.
    let cfg = write_config(dir.path(), "family = { kind = \"grid\" }\nradius = 1\n");
    assert_eq!(code(&run(dir.path(), &["verify", "--config", &cfg, "--out", "o"])), 0);
    let o = run(dir.path(), &["render", "--config", &cfg, "--out", "o"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let svg = fs::read_to_string(dir.path().join("o/packing.svg")).unwrap();
    assert_eq!(svg.matches("stroke=\"red\"").count(), 9);
    assert_eq!(svg.matches("stroke=\"blue\"").count(), 4);
    for f in ["superposition.svg", "loops.svg"] {
        assert!(fs::read_to_string(dir.path().join("o").join(f)).unwrap().starts_with("<svg"));
    }
}

#[test]
fn render_without_overlay_has_no_loops() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "radius = 1\n[render]\noverlay = \"none\"\n");
    assert_eq!(code(&run(dir.path(), &["verify", "--config", &cfg, "--out", "o"])), 0);
    assert_eq!(code(&run(dir.path(), &["render", "--config", &cfg, "--out", "o"])), 0);
    assert!(!fs::read_to_string(dir.path().join("o/loops.svg")).unwrap().contains("<polygon"));
}
