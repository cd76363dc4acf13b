use std::fs;
use std::path::Path;
use std::process::Command;

use plcp::data::{dataset_paths, load_dataset, save_dataset};
use plcp::experiment::{
    cmd_generate, cmd_run, cmd_sweep, read_csv, ExperimentConfig, ResultRow, SummaryRow, SweepRow,
    TrajectoryRow,
};
use plcp::{Matrix, PartialLabelDataset};

fn write(dir: &Path, name: &str, text: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

const SPEC: &str = "n = 100\nd = 2\nl = 3\nflip_q = 0.3\nseed = 1\n";

fn synthetic_config(seeds: &str, extra: &str) -> ExperimentConfig {
    let text = format!(
        "seeds = {seeds}\n{extra}\n[dataset]\nsource = \"synthetic\"\nn = 60\nd = 3\nl = 3\nflip_q = 0.3\n"
    );
    ExperimentConfig::from_toml_str(&text, Path::new("test")).unwrap()
}

#[test]
fn generate_round_trips_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(dir.path(), "spec.toml", SPEC);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let ds = cmd_generate(&spec, &a).unwrap();
    cmd_generate(&spec, &b).unwrap();
    let (fa, ca, ta) = dataset_paths(&a);
    assert_eq!(load_dataset(&fa, &ca, Some(&ta)).unwrap(), ds);
    let (fb, cb, tb) = dataset_paths(&b);
    for (x, y) in [(fa, fb), (ca, cb), (ta, tb)] {
        assert_eq!(fs::read(x).unwrap(), fs::read(y).unwrap());
    }
}

#[test]
fn generate_without_flips_writes_one_hot_rows() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(dir.path(), "spec.toml", &SPEC.replace("0.3", "0.0"));
    cmd_generate(&spec, dir.path()).unwrap();
    let text = fs::read_to_string(dataset_paths(dir.path()).1).unwrap();
    assert_eq!(text.lines().count(), 100);
    assert!(text
        .lines()
        .all(|l| l.split(',').filter(|v| *v == "1").count() == 1));
}

#[test]
fn generate_reports_bad_fields_with_a_line() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(
        dir.path(),
        "spec.toml",
        "n = 100\nd = 2\nl = \"three\"\nflip_q = 0.3\nseed = 1\n",
    );
    let err = cmd_generate(&spec, dir.path()).unwrap_err().to_string();
    assert!(err.contains("line 3"), "{err}");
    let spec = write(
        dir.path(),
        "spec.toml",
        &SPEC.replace("flip_q = 0.3", "flip_q = 1.0"),
    );
    assert!(cmd_generate(&spec, dir.path()).is_err());
}

#[test]
fn smallest_run_writes_two_rows() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = synthetic_config("[5]", "");
    config.engine.max_iter = 1;
    let run = cmd_run(&config, dir.path()).unwrap();
    assert!(run.failures.is_empty());
    let rows: Vec<ResultRow> = read_csv(&dir.path().join("results.csv")).unwrap();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0].method, "pl-knn");
    assert_eq!(rows[1].method, "pl-knn-plcp");
    assert_eq!(rows[1].iterations_run, 1);
    // what was written is what was returned
    assert_eq!(rows, run.results);
    let resolved = fs::read_to_string(dir.path().join("resolved_config.toml")).unwrap();
    let back = ExperimentConfig::from_toml_str(&resolved, Path::new("resolved")).unwrap();
    assert_eq!(back.engine, config.engine);
    assert_eq!(back.output_dir.as_deref(), Some(dir.path()));
}

#[test]
fn summary_means_are_seed_averages() {
    let dir = tempfile::tempdir().unwrap();
    let config = synthetic_config("[0, 1, 2, 3, 4, 5, 6, 7, 8, 9]", "");
    let run = cmd_run(&config, dir.path()).unwrap();
    let summary: Vec<SummaryRow> = read_csv(&dir.path().join("summary.csv")).unwrap();
    assert_eq!(summary.len(), 2);
    for s in &summary {
        let mine: Vec<&ResultRow> = run
            .results
            .iter()
            .filter(|r| r.method == s.method)
            .collect();
        assert_eq!(s.runs, 10);
        let mean = mine.iter().map(|r| r.test_accuracy).sum::<f64>() / 10.0;
        assert!((s.test_accuracy_mean - mean).abs() < 1e-12);
        let tmean = mine.iter().map(|r| r.transductive_accuracy).sum::<f64>() / 10.0;
        assert!((s.transductive_accuracy_mean - tmean).abs() < 1e-12);
    }
}

#[test]
fn trajectories_have_one_row_per_sample_and_round() {
    let dir = tempfile::tempdir().unwrap();
    // six points, three per side after the split
    let ds = PartialLabelDataset::new(
        Matrix::from_row_slice(
            6,
            2,
            &[0.0, 0.0, 0.1, 0.2, 3.0, 3.0, 3.1, 2.9, 0.2, 0.1, 2.8, 3.2],
        ),
        Matrix::from_row_slice(6, 2, &[1., 1., 1., 0., 1., 1., 0., 1., 1., 1., 1., 1.]),
        Some(vec![0, 0, 1, 1, 0, 1]),
    )
    .unwrap();
    let (f, c, t) = dataset_paths(dir.path());
    save_dataset(&ds, &f, &c, Some(&t)).unwrap();
    for max_iter in [1, 3] {
        let cfg = format!(
            "seeds = [2]\nemit_trajectories = true\n[dataset]\nsource = \"files\"\nfeatures = \"features.csv\"\ncandidates = \"candidates.csv\"\ntruth = \"truth.csv\"\n[engine]\nmax_iter = {max_iter}\nstop_change_frac = 0.0\n[engine.base]\nkind = \"pl-knn\"\nk_neighbors = 1\n"
        );
        let path = write(dir.path(), "run.toml", &cfg);
        let config = ExperimentConfig::from_file(&path).unwrap();
        let out = dir.path().join(format!("out{max_iter}"));
        let run = cmd_run(&config, &out).unwrap();
        assert!(run.failures.is_empty(), "{:?}", run.failures);
        let rows: Vec<TrajectoryRow> = read_csv(&out.join("trajectories.csv")).unwrap();
        let iterations = run.results[1].iterations_run;
        assert!(iterations >= 1 && iterations <= max_iter);
        assert_eq!(rows.len(), iterations * 3);
        if max_iter == 1 {
            assert_eq!(rows.len(), 3);
        }
        assert!(rows.iter().all(|r| r.partner_truth_confidence.is_some()));
    }
}

#[test]
fn failures_are_recorded_and_other_seeds_continue() {
    let dir = tempfile::tempdir().unwrap();
    // 4 samples: seed splits leave 2 training points, too few for 3 neighbours
    let mut config = synthetic_config("[0, 1]", "");
    if let plcp::experiment::DatasetSource::Synthetic { n, .. } = &mut config.dataset {
        *n = 4;
    }
    config.engine.base = plcp::BaseClassifierKind::PlKnn { k_neighbors: 3 };
    let run = cmd_run(&config, dir.path()).unwrap();
    assert_eq!(run.failures.len(), 2);
    assert_eq!(run.results.len(), 4);
    assert!(run.results.iter().all(|r| r.test_accuracy.is_nan()));
    let failures: Vec<plcp::experiment::FailureRow> =
        read_csv(&dir.path().join("failures.csv")).unwrap();
    assert_eq!(failures, run.failures);
}

#[test]
fn degenerate_sweep_matches_run() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = synthetic_config("[3, 4]", "");
    config.grid.gamma = vec![2.0];
    let sweep = cmd_sweep(&config, &dir.path().join("sweep")).unwrap();
    let run = cmd_run(&config, &dir.path().join("run")).unwrap();
    assert_eq!(sweep.rows.len(), run.results.len());
    for (s, r) in sweep.rows.iter().zip(&run.results) {
        assert_eq!((s.method.as_str(), s.seed), (r.method.as_str(), r.seed));
        assert_eq!(s.test_accuracy.to_bits(), r.test_accuracy.to_bits());
        assert_eq!(
            s.transductive_accuracy.to_bits(),
            r.transductive_accuracy.to_bits()
        );
    }
}

#[test]
fn sweep_records_grid_points() {
    let dir = tempfile::tempdir().unwrap();
    let config = synthetic_config("[1]", "[grid]\nk = [-5.0, -1.0, 0.5]\n");
    let sweep = cmd_sweep(&config, dir.path()).unwrap();
    let rows: Vec<SweepRow> = read_csv(&dir.path().join("sweep.csv")).unwrap();
    assert_eq!(rows.len(), 6);
    let ks: Vec<f64> = rows.iter().step_by(2).map(|r| r.k).collect();
    assert_eq!(ks, vec![-5.0, -1.0, 0.5]);
    assert_eq!(
        rows.iter().map(|r| r.cell).collect::<Vec<_>>(),
        vec![0, 0, 1, 1, 2, 2]
    );
    assert_eq!(rows.len(), sweep.rows.len());
}

#[test]
fn sweep_survives_huge_gamma() {
    let dir = tempfile::tempdir().unwrap();
    let config = synthetic_config("[1, 2]", "[grid]\ngamma = [0.0, 2.0, 1e6]\n");
    let sweep = cmd_sweep(&config, dir.path()).unwrap();
    assert!(sweep.failures.is_empty());
    let big: Vec<&SweepRow> = sweep.rows.iter().filter(|r| r.gamma == 1e6).collect();
    assert_eq!(big.len(), 4);
    assert!(big
        .iter()
        .all(|r| r.test_accuracy.is_finite() && r.transductive_accuracy.is_finite()));
}

#[test]
fn sweep_refuses_oversized_grids() {
    let dir = tempfile::tempdir().unwrap();
    let config = synthetic_config(
        "[1]",
        "max_cells = 3\n[grid]\nlambda = [0.01, 0.1]\nalpha = [0.2, 0.5]\n",
    );
    let err = cmd_sweep(&config, dir.path()).unwrap_err().to_string();
    assert!(err.contains("4 cells"), "{err}");
}

fn plcp_bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_plcp"));
    c.env_remove("PLCP_OUTPUT_DIR").env("RUST_LOG", "warn");
    c
}

#[test]
fn binary_generate_inspect_run() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(dir.path(), "spec.toml", SPEC);
    let data = dir.path().join("data");
    assert!(plcp_bin()
        .arg("generate")
        .arg(&spec)
        .arg("--out")
        .arg(&data)
        .status()
        .unwrap()
        .success());

    let out = plcp_bin().arg("inspect").arg(&data).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(
        text.contains("examples    100") && text.contains("labels      3"),
        "{text}"
    );

    let cfg = write(
        dir.path(),
        "run.toml",
        "seeds = [1, 2]\n[dataset]\nsource = \"files\"\nfeatures = \"data/features.csv\"\ncandidates = \"data/candidates.csv\"\ntruth = \"data/truth.csv\"\n",
    );
    let results = dir.path().join("results");
    let status = plcp_bin()
        .arg("run")
        .arg(&cfg)
        .env("PLCP_OUTPUT_DIR", &results)
        .status()
        .unwrap();
    assert!(status.success());
    let rows: Vec<ResultRow> = read_csv(&results.join("results.csv")).unwrap();
    assert_eq!(rows.len(), 4);
}

#[test]
fn binary_exits_nonzero_when_a_seed_fails() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(dir.path(), "spec.toml", SPEC);
    cmd_generate(&spec, dir.path()).unwrap();
    // no truth file: nothing can be scored
    let cfg = write(
        dir.path(),
        "run.toml",
        "seeds = [1]\n[dataset]\nsource = \"files\"\nfeatures = \"features.csv\"\ncandidates = \"candidates.csv\"\n",
    );
    let out = dir.path().join("out");
    let status = plcp_bin()
        .arg("run")
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(!status.success());
    assert!(fs::read_to_string(out.join("failures.csv"))
        .unwrap()
        .contains("ground truth"));
}

#[test]
fn shipped_configs_parse() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    for name in ["blobs.toml", "sensitivity.toml"] {
        let c = ExperimentConfig::from_file(&root.join(name)).unwrap();
        assert!(!c.seeds.is_empty());
    }
    let spec: plcp::data::SyntheticSpec =
        toml::from_str(&fs::read_to_string(root.join("synthetic.toml")).unwrap()).unwrap();
    spec.validate().unwrap();
}

#[test]
fn full_engine_block_parses() {
    let text = r#"
seeds = [0]
[dataset]
source = "synthetic"
n = 20
d = 2
l = 3
flip_q = 0.2
[engine]
alpha = 0.5
k = -1.0
max_iter = 5
stop_change_frac = 0.05
binarize_base_supervision = false
predict_with_base = false
[engine.base]
kind = "pl-knn"
k_neighbors = 10
[engine.partner]
lambda = 0.05
gamma = 2.0
inner_iters = 10
inner_tol = 1e-6
kernel = "gaussian"
sigma = "mean-pairwise-distance"
term = "trace"
"#;
    let c = ExperimentConfig::from_toml_str(text, Path::new("x")).unwrap();
    assert_eq!(c.engine, plcp::EngineConfig::default());
    let fixed = text
        .replace("\"mean-pairwise-distance\"", "{ fixed = 1.5 }")
        .replace(
            "kind = \"pl-knn\"\nk_neighbors = 10",
            "kind = \"kernel-ls\"",
        );
    let c = ExperimentConfig::from_toml_str(&fixed, Path::new("x")).unwrap();
    assert_eq!(c.engine.partner.sigma, plcp::SigmaPolicy::Fixed(1.5));
}
