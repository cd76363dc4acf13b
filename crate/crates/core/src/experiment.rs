//! Experiment harness behind the `plcp` binary: dataset generation, paired
//! base-vs-PLCP runs over seeds, and hyper-parameter sweeps.
//!
//! Configs are TOML. Every run writes `results.csv`, `summary.csv`,
//! `failures.csv` and the resolved config to its output directory.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use log::{info, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::statistics::Statistics;

use crate::base::BaseClassifierKind;
use crate::data::{
    dataset_paths, generate_synthetic, load_dataset, save_dataset, split, SyntheticSpec,
};
use crate::dataset::PartialLabelDataset;
use crate::engine::{run_base_alone, run_plcp, EngineConfig, IterationSnapshot};
use crate::error::{PlcpError, Result};
use crate::metrics::{accuracy, correction_metrics, MetricReport};

/// Overrides the output directory of `run` and `sweep`.
pub const OUTPUT_DIR_ENV: &str = "PLCP_OUTPUT_DIR";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DatasetSource {
    /// Regenerated per run from the run seed unless `seed` pins it.
    Synthetic {
        n: usize,
        d: usize,
        l: usize,
        flip_q: f64,
        #[serde(default = "default_spread")]
        cluster_spread: f64,
        #[serde(default = "default_separation")]
        separation: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
    },
    Files {
        features: PathBuf,
        candidates: PathBuf,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        truth: Option<PathBuf>,
    },
}

fn default_spread() -> f64 {
    1.0
}

fn default_separation() -> f64 {
    4.0
}

impl DatasetSource {
    fn synthetic_spec(&self, run_seed: u64) -> Option<SyntheticSpec> {
        match *self {
            DatasetSource::Synthetic {
                n,
                d,
                l,
                flip_q,
                cluster_spread,
                separation,
                seed,
            } => Some(SyntheticSpec {
                n,
                d,
                l,
                flip_q,
                cluster_spread,
                separation,
                seed: seed.unwrap_or(run_seed),
            }),
            DatasetSource::Files { .. } => None,
        }
    }

    pub fn load(&self, run_seed: u64) -> Result<PartialLabelDataset> {
        match self {
            DatasetSource::Synthetic { .. } => {
                generate_synthetic(&self.synthetic_spec(run_seed).expect("synthetic"))
            }
            DatasetSource::Files {
                features,
                candidates,
                truth,
            } => load_dataset(features, candidates, truth.as_deref()),
        }
    }
}

/// Axes of a sweep. Empty or missing axes keep the base config's value.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Grid {
    pub lambda: Vec<f64>,
    pub alpha: Vec<f64>,
    pub gamma: Vec<f64>,
    pub k: Vec<f64>,
    pub flip_q: Vec<f64>,
    pub k_neighbors: Vec<usize>,
}

/// One point of a sweep grid. `None` means the axis was not swept.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct GridPoint {
    pub lambda: Option<f64>,
    pub alpha: Option<f64>,
    pub gamma: Option<f64>,
    pub k: Option<f64>,
    pub flip_q: Option<f64>,
    pub k_neighbors: Option<usize>,
}

fn axis<T: Copy>(values: &[T]) -> Vec<Option<T>> {
    if values.is_empty() {
        vec![None]
    } else {
        values.iter().copied().map(Some).collect()
    }
}

impl Grid {
    pub fn cell_count(&self) -> usize {
        [
            self.lambda.len(),
            self.alpha.len(),
            self.gamma.len(),
            self.k.len(),
            self.flip_q.len(),
            self.k_neighbors.len(),
        ]
        .iter()
        .map(|n| (*n).max(1))
        .product()
    }

    /// Cartesian product in row-major order over
    /// (lambda, alpha, gamma, k, flip_q, k_neighbors).
    pub fn points(&self) -> Vec<GridPoint> {
        let mut out = Vec::with_capacity(self.cell_count());
        for lambda in axis(&self.lambda) {
            for alpha in axis(&self.alpha) {
                for gamma in axis(&self.gamma) {
                    for k in axis(&self.k) {
                        for flip_q in axis(&self.flip_q) {
                            for k_neighbors in axis(&self.k_neighbors) {
                                out.push(GridPoint {
                                    lambda,
                                    alpha,
                                    gamma,
                                    k,
                                    flip_q,
                                    k_neighbors,
                                });
                            }
                        }
                    }
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub dataset: DatasetSource,
    #[serde(default)]
    pub engine: EngineConfig,
    pub seeds: Vec<u64>,
    #[serde(default = "default_train_frac")]
    pub train_frac: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub emit_trajectories: bool,
    #[serde(default)]
    pub grid: Grid,
    #[serde(default = "default_max_cells")]
    pub max_cells: usize,
}

fn default_train_frac() -> f64 {
    0.5
}

fn default_max_cells() -> usize {
    1000
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str, origin: &Path) -> Result<Self> {
        let config: Self = toml::from_str(text).map_err(|e| parse_error(origin, e))?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let config = Self::from_toml_str(&fs::read_to_string(path)?, path)?;
        Ok(config.relative_to(path.parent().unwrap_or(Path::new("."))))
    }

    /// Resolves relative dataset paths against `dir`.
    fn relative_to(mut self, dir: &Path) -> Self {
        if let DatasetSource::Files {
            features,
            candidates,
            truth,
        } = &mut self.dataset
        {
            for p in [Some(features), Some(candidates), truth.as_mut()]
                .into_iter()
                .flatten()
            {
                if p.is_relative() {
                    *p = dir.join(&*p);
                }
            }
        }
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.seeds.is_empty() {
            return Err(PlcpError::invalid("seeds", "at least one seed is required"));
        }
        if !(self.train_frac > 0.0 && self.train_frac < 1.0) {
            return Err(PlcpError::invalid(
                "train_frac",
                format!("{} outside (0, 1)", self.train_frac),
            ));
        }
        if let Some(spec) = self.dataset.synthetic_spec(0) {
            spec.validate()?;
        }
        self.engine.validate()
    }

    /// Copy of this config with one grid point applied and the grid cleared.
    pub fn at(&self, point: &GridPoint) -> Result<Self> {
        let mut c = self.clone();
        c.grid = Grid::default();
        if let Some(v) = point.lambda {
            c.engine.partner.lambda = v;
        }
        if let Some(v) = point.alpha {
            c.engine.alpha = v;
        }
        if let Some(v) = point.gamma {
            c.engine.partner.gamma = v;
        }
        if let Some(v) = point.k {
            c.engine.k = v;
        }
        if let Some(v) = point.flip_q {
            match &mut c.dataset {
                DatasetSource::Synthetic { flip_q, .. } => *flip_q = v,
                DatasetSource::Files { .. } => {
                    return Err(PlcpError::invalid(
                        "grid.flip_q",
                        "only applies to synthetic datasets",
                    ));
                }
            }
        }
        if let Some(v) = point.k_neighbors {
            match &mut c.engine.base {
                BaseClassifierKind::PlKnn { k_neighbors } => *k_neighbors = v,
                other => {
                    return Err(PlcpError::invalid(
                        "grid.k_neighbors",
                        format!("base classifier {} has no neighbour count", other.name()),
                    ));
                }
            }
        }
        Ok(c)
    }
}

fn parse_error(path: &Path, e: impl std::fmt::Display) -> PlcpError {
    PlcpError::Parse {
        path: path.display().to_string(),
        message: e.to_string(),
    }
}

/// Picks the output directory: explicit argument, then the environment
/// override, then the config, then `./plcp-output`.
pub fn resolve_output_dir(explicit: Option<&Path>, config: &ExperimentConfig) -> PathBuf {
    explicit
        .map(Path::to_path_buf)
        .or_else(|| std::env::var_os(OUTPUT_DIR_ENV).map(PathBuf::from))
        .or_else(|| config.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("plcp-output"))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub method: String,
    pub seed: u64,
    pub test_accuracy: f64,
    pub transductive_accuracy: f64,
    pub correction_ratio: f64,
    pub miscorrection_ratio: f64,
    pub iterations_run: usize,
    pub wall_ms: u64,
}

impl ResultRow {
    fn failed(method: String, seed: u64) -> Self {
        ResultRow {
            method,
            seed,
            test_accuracy: f64::NAN,
            transductive_accuracy: f64::NAN,
            correction_ratio: f64::NAN,
            miscorrection_ratio: f64::NAN,
            iterations_run: 0,
            wall_ms: 0,
        }
    }

    fn is_failure(&self) -> bool {
        self.test_accuracy.is_nan()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailureRow {
    pub cell: usize,
    pub seed: u64,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRow {
    pub seed: u64,
    pub iteration: usize,
    pub sample: usize,
    pub label: usize,
    pub base_label: usize,
    pub change_fraction: f64,
    pub base_truth_confidence: Option<f64>,
    pub base_rival_confidence: Option<f64>,
    pub partner_truth_confidence: Option<f64>,
    pub partner_rival_confidence: Option<f64>,
}

/// Outcome of one seed: base alone versus base with PLCP, on the same split.
#[derive(Debug, Clone)]
pub struct PairedOutcome {
    pub seed: u64,
    pub base: MetricReport,
    pub plcp: MetricReport,
    pub iterations_run: usize,
    pub invariant_checks: usize,
    pub base_ms: u64,
    pub plcp_ms: u64,
    pub trajectories: Vec<IterationSnapshot>,
}

pub fn base_method_name(config: &EngineConfig) -> String {
    config.base.name().to_owned()
}

pub fn plcp_method_name(config: &EngineConfig) -> String {
    format!("{}-plcp", config.base.name())
}

impl PairedOutcome {
    pub fn rows(&self, engine: &EngineConfig) -> [ResultRow; 2] {
        let row = |method, m: &MetricReport, iterations_run, wall_ms| ResultRow {
            method,
            seed: self.seed,
            test_accuracy: m.test_accuracy,
            transductive_accuracy: m.transductive_accuracy,
            correction_ratio: m.correction_ratio,
            miscorrection_ratio: m.miscorrection_ratio,
            iterations_run,
            wall_ms,
        };
        [
            row(base_method_name(engine), &self.base, 0, self.base_ms),
            row(
                plcp_method_name(engine),
                &self.plcp,
                self.iterations_run,
                self.plcp_ms,
            ),
        ]
    }

    fn trajectory_rows(&self) -> Vec<TrajectoryRow> {
        let mut rows = Vec::new();
        for snap in &self.trajectories {
            for (i, &label) in snap.labels.iter().enumerate() {
                let base = snap.base_confidence.as_ref().map(|v| v[i]);
                let partner = snap.partner_confidence.as_ref().map(|v| v[i]);
                rows.push(TrajectoryRow {
                    seed: self.seed,
                    iteration: snap.iteration,
                    sample: i,
                    label,
                    base_label: snap.base_labels[i],
                    change_fraction: snap.change_fraction,
                    base_truth_confidence: base.map(|p| p.0),
                    base_rival_confidence: base.map(|p| p.1),
                    partner_truth_confidence: partner.map(|p| p.0),
                    partner_rival_confidence: partner.map(|p| p.1),
                });
            }
        }
        rows
    }
}

/// Splits `dataset` with `seed`, runs the base alone and with PLCP on the
/// training side, and scores both.
pub fn run_paired(
    dataset: &PartialLabelDataset,
    seed: u64,
    train_frac: f64,
    engine: &EngineConfig,
) -> Result<PairedOutcome> {
    let (train, test) = split(dataset, train_frac, seed)?;
    let train_truth = train
        .ground_truth()
        .ok_or(PlcpError::MissingTruth("transductive accuracy"))?;
    let test_truth = test
        .ground_truth()
        .ok_or(PlcpError::MissingTruth("test accuracy"))?;
    let engine = EngineConfig {
        seed,
        ..engine.clone()
    };

    let start = Instant::now();
    let base = run_base_alone(&train, test.features(), &engine)?;
    let base_ms = start.elapsed().as_millis() as u64;
    let start = Instant::now();
    let plcp = run_plcp(&train, test.features(), &engine)?;
    let plcp_ms = start.elapsed().as_millis() as u64;

    let (correction_ratio, miscorrection_ratio) = correction_metrics(
        &base.train_predictions,
        &plcp.train_predictions,
        train_truth,
    )?;
    Ok(PairedOutcome {
        seed,
        base: MetricReport {
            test_accuracy: accuracy(&base.test_predictions, test_truth)?,
            transductive_accuracy: accuracy(&base.train_predictions, train_truth)?,
            correction_ratio: 0.0,
            miscorrection_ratio: 0.0,
            tolerance_accuracy: None,
        },
        plcp: MetricReport {
            test_accuracy: accuracy(&plcp.test_predictions, test_truth)?,
            transductive_accuracy: accuracy(&plcp.train_predictions, train_truth)?,
            correction_ratio,
            miscorrection_ratio,
            tolerance_accuracy: None,
        },
        iterations_run: plcp.iterations_run,
        invariant_checks: plcp.invariant_checks,
        base_ms,
        plcp_ms,
        trajectories: plcp.trajectories,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub method: String,
    pub runs: usize,
    pub test_accuracy_mean: f64,
    pub test_accuracy_std: f64,
    pub transductive_accuracy_mean: f64,
    pub transductive_accuracy_std: f64,
    pub correction_ratio_mean: f64,
    pub correction_ratio_std: f64,
    pub miscorrection_ratio_mean: f64,
    pub miscorrection_ratio_std: f64,
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    match values.len() {
        0 => (f64::NAN, f64::NAN),
        1 => (values[0], 0.0),
        _ => (values.mean(), values.std_dev()),
    }
}

/// Mean and sample standard deviation per method over the successful rows,
/// in order of first appearance.
pub fn summarize(rows: &[ResultRow]) -> Vec<SummaryRow> {
    let mut methods: Vec<&str> = Vec::new();
    for r in rows {
        if !methods.contains(&r.method.as_str()) {
            methods.push(&r.method);
        }
    }
    methods
        .into_iter()
        .map(|method| {
            let ok: Vec<&ResultRow> = rows
                .iter()
                .filter(|r| r.method == method && !r.is_failure())
                .collect();
            let stat =
                |f: fn(&ResultRow) -> f64| mean_std(&ok.iter().map(|r| f(r)).collect::<Vec<_>>());
            let (ta, tas) = stat(|r| r.test_accuracy);
            let (tr, trs) = stat(|r| r.transductive_accuracy);
            let (cr, crs) = stat(|r| r.correction_ratio);
            let (mr, mrs) = stat(|r| r.miscorrection_ratio);
            SummaryRow {
                method: method.to_owned(),
                runs: ok.len(),
                test_accuracy_mean: ta,
                test_accuracy_std: tas,
                transductive_accuracy_mean: tr,
                transductive_accuracy_std: trs,
                correction_ratio_mean: cr,
                correction_ratio_std: crs,
                miscorrection_ratio_mean: mr,
                miscorrection_ratio_std: mrs,
            }
        })
        .collect()
}

pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_path(path)?;
    r.deserialize()
        .map(|row| row.map_err(PlcpError::from))
        .collect()
}

/// What a `run` or `sweep` produced.
#[derive(Debug, Clone)]
pub struct RunSummary {
    pub output_dir: PathBuf,
    pub results: Vec<ResultRow>,
    pub summary: Vec<SummaryRow>,
    pub failures: Vec<FailureRow>,
}

struct SeedResult {
    rows: [ResultRow; 2],
    trajectories: Vec<TrajectoryRow>,
    failure: Option<FailureRow>,
}

fn run_seed(
    config: &ExperimentConfig,
    cell: usize,
    seed: u64,
    shared: Option<&PartialLabelDataset>,
) -> SeedResult {
    let outcome = match shared {
        Some(ds) => run_paired(ds, seed, config.train_frac, &config.engine),
        None => config
            .dataset
            .load(seed)
            .and_then(|ds| run_paired(&ds, seed, config.train_frac, &config.engine)),
    };
    match outcome {
        Ok(out) => SeedResult {
            rows: out.rows(&config.engine),
            trajectories: if config.emit_trajectories {
                out.trajectory_rows()
            } else {
                Vec::new()
            },
            failure: None,
        },
        Err(e) => {
            warn!("cell {cell}, seed {seed} failed: {e}");
            SeedResult {
                rows: [
                    ResultRow::failed(base_method_name(&config.engine), seed),
                    ResultRow::failed(plcp_method_name(&config.engine), seed),
                ],
                trajectories: Vec::new(),
                failure: Some(FailureRow {
                    cell,
                    seed,
                    error: e.to_string(),
                }),
            }
        }
    }
}

/// Loads a file-backed dataset once; synthetic data is generated per seed.
fn shared_dataset(config: &ExperimentConfig) -> Result<Option<PartialLabelDataset>> {
    match config.dataset {
        DatasetSource::Files { .. } => config.dataset.load(0).map(Some),
        DatasetSource::Synthetic { .. } => Ok(None),
    }
}

fn write_resolved_config(dir: &Path, config: &ExperimentConfig) -> Result<()> {
    let mut resolved = config.clone();
    resolved.output_dir = Some(dir.to_path_buf());
    let text = toml::to_string(&resolved)
        .map_err(|e| PlcpError::Invariant(format!("config serialization: {e}")))?;
    fs::write(dir.join("resolved_config.toml"), text)?;
    Ok(())
}

/// Runs every seed of `config` and writes the result files into `out_dir`.
pub fn cmd_run(config: &ExperimentConfig, out_dir: &Path) -> Result<RunSummary> {
    config.validate()?;
    if config.grid != Grid::default() {
        warn!("grid section ignored by run; use sweep");
    }
    fs::create_dir_all(out_dir)?;
    write_resolved_config(out_dir, config)?;
    let shared = shared_dataset(config)?;
    let per_seed: Vec<SeedResult> = config
        .seeds
        .par_iter()
        .map(|&seed| run_seed(config, 0, seed, shared.as_ref()))
        .collect();

    let mut results = Vec::new();
    let mut trajectories = Vec::new();
    let mut failures = Vec::new();
    for r in per_seed {
        results.extend(r.rows);
        trajectories.extend(r.trajectories);
        failures.extend(r.failure);
    }
    let summary = summarize(&results);
    write_csv(&out_dir.join("results.csv"), &results)?;
    write_csv(&out_dir.join("summary.csv"), &summary)?;
    write_csv(&out_dir.join("failures.csv"), &failures)?;
    if config.emit_trajectories {
        write_csv(&out_dir.join("trajectories.csv"), &trajectories)?;
    }
    info!(
        "{} seeds, {} failures, results in {}",
        config.seeds.len(),
        failures.len(),
        out_dir.display()
    );
    Ok(RunSummary {
        output_dir: out_dir.to_path_buf(),
        results,
        summary,
        failures,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub cell: usize,
    pub lambda: f64,
    pub alpha: f64,
    pub gamma: f64,
    pub k: f64,
    pub flip_q: Option<f64>,
    pub k_neighbors: Option<usize>,
    pub method: String,
    pub seed: u64,
    pub test_accuracy: f64,
    pub transductive_accuracy: f64,
    pub correction_ratio: f64,
    pub miscorrection_ratio: f64,
    pub iterations_run: usize,
    pub wall_ms: u64,
}

impl SweepRow {
    fn new(cell: usize, config: &ExperimentConfig, r: ResultRow) -> Self {
        let flip_q = match config.dataset {
            DatasetSource::Synthetic { flip_q, .. } => Some(flip_q),
            DatasetSource::Files { .. } => None,
        };
        let k_neighbors = match config.engine.base {
            BaseClassifierKind::PlKnn { k_neighbors } => Some(k_neighbors),
            _ => None,
        };
        SweepRow {
            cell,
            lambda: config.engine.partner.lambda,
            alpha: config.engine.alpha,
            gamma: config.engine.partner.gamma,
            k: config.engine.k,
            flip_q,
            k_neighbors,
            method: r.method,
            seed: r.seed,
            test_accuracy: r.test_accuracy,
            transductive_accuracy: r.transductive_accuracy,
            correction_ratio: r.correction_ratio,
            miscorrection_ratio: r.miscorrection_ratio,
            iterations_run: r.iterations_run,
            wall_ms: r.wall_ms,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SweepSummary {
    pub output_dir: PathBuf,
    pub rows: Vec<SweepRow>,
    pub failures: Vec<FailureRow>,
}

/// Runs the Cartesian product of the grid, every cell over every seed.
/// Rows come out sorted by cell, then seed order, then method.
pub fn cmd_sweep(config: &ExperimentConfig, out_dir: &Path) -> Result<SweepSummary> {
    config.validate()?;
    let cells = config.grid.cell_count();
    if cells > config.max_cells {
        return Err(PlcpError::invalid(
            "grid",
            format!(
                "{cells} cells exceed the cap of {}; raise max_cells to allow it",
                config.max_cells
            ),
        ));
    }
    let configs = config
        .grid
        .points()
        .iter()
        .map(|p| {
            let c = config.at(p)?;
            c.validate()?;
            Ok(c)
        })
        .collect::<Result<Vec<_>>>()?;
    fs::create_dir_all(out_dir)?;
    write_resolved_config(out_dir, config)?;
    let shared = shared_dataset(config)?;

    let jobs: Vec<(usize, u64)> = (0..configs.len())
        .flat_map(|cell| config.seeds.iter().map(move |&s| (cell, s)))
        .collect();
    let results: Vec<SeedResult> = jobs
        .par_iter()
        .map(|&(cell, seed)| run_seed(&configs[cell], cell, seed, shared.as_ref()))
        .collect();

    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for ((cell, _), r) in jobs.iter().zip(results) {
        rows.extend(
            r.rows
                .into_iter()
                .map(|row| SweepRow::new(*cell, &configs[*cell], row)),
        );
        failures.extend(r.failure);
    }
    write_csv(&out_dir.join("sweep.csv"), &rows)?;
    write_csv(&out_dir.join("failures.csv"), &failures)?;
    info!(
        "{cells} cells × {} seeds, {} failures",
        config.seeds.len(),
        failures.len()
    );
    Ok(SweepSummary {
        output_dir: out_dir.to_path_buf(),
        rows,
        failures,
    })
}

/// Reads a flat TOML synthetic spec and writes the dataset into `out_dir`.
pub fn cmd_generate(spec_file: &Path, out_dir: &Path) -> Result<PartialLabelDataset> {
    let text = fs::read_to_string(spec_file)?;
    let spec: SyntheticSpec = toml::from_str(&text).map_err(|e| parse_error(spec_file, e))?;
    spec.validate()?;
    let ds = generate_synthetic(&spec)?;
    fs::create_dir_all(out_dir)?;
    let (f, c, t) = dataset_paths(out_dir);
    save_dataset(&ds, &f, &c, Some(&t))?;
    Ok(ds)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DatasetStats {
    pub n: usize,
    pub d: usize,
    pub l: usize,
    pub avg_candidates: f64,
    pub has_truth: bool,
}

impl std::fmt::Display for DatasetStats {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "examples    {}", self.n)?;
        writeln!(f, "features    {}", self.d)?;
        writeln!(f, "labels      {}", self.l)?;
        writeln!(f, "avg #CLs    {:.2}", self.avg_candidates)?;
        write!(
            f,
            "truth       {}",
            if self.has_truth { "yes" } else { "no" }
        )
    }
}

pub fn inspect(dataset: &PartialLabelDataset) -> DatasetStats {
    DatasetStats {
        n: dataset.len(),
        d: dataset.feature_dim(),
        l: dataset.label_count(),
        avg_candidates: dataset.mean_candidate_count(),
        has_truth: dataset.ground_truth().is_some(),
    }
}
