//! Experiment orchestration: full pipeline runs, model comparison tables,
//! sample-size sweeps, benchmark curves and scaling-law refits.
//!
//! Every output file is written from data that depends only on the config,
//! so rerunning an echoed config reproduces the report byte for byte.
//! Wall-clock timings go to a separate `timings.json`.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dataset::{
    build_pure_dataset, build_werner_dataset, featurize_density, featurize_pure, save_dataset, Dataset,
    Family, Layout, SplitPlan,
};
use crate::ensemble::{fit_stack, BaseModel, EnsembleConfig, FeatureSpec, StackedEnsemble, save_ensemble};
use crate::error::{param, Error, Result};
use crate::matrix::Matrix;
use crate::metrics::{compute_metrics, fit_scaling_law, line_fit, LineFit, MetricsReport, ScalingCoefficients, ScalingRecord};
use crate::negativity::{werner_negativity_closed_form, zeta_negativity_closed_form};
use crate::rng::{derive_seed, RngHandle};
use crate::states::{werner_state, zeta_state, Spin, SpinPair};

pub const REPORT_VERSION: u32 = 1;

/// Rows whose prediction exceeds this count as entangled in an alpha sweep.
pub const THRESHOLD_LEVEL: f64 = 0.01;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub family: Family,
    /// Spin of subsystem A (and B for Werner states).
    pub j: f64,
    /// Spin of subsystem B for pure states; defaults to `j`.
    pub j2: Option<f64>,
    pub samples: usize,
    pub seed: u64,
    pub layout: Layout,
    pub train_fraction: f64,
    pub ensemble: EnsembleConfig,
    pub curve_points: usize,
    /// Divide plotted negativities by the maximum `(D - 1)/2`.
    pub normalize_negativity: bool,
    pub persist_dataset: bool,
    pub persist_ensemble: bool,
    pub out_dir: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self::desk_default(Family::Pure, 0.5)
    }
}

impl ExperimentConfig {
    /// Desk-scale sample sizes and layouts for a family and spin.
    pub fn desk_default(family: Family, j: f64) -> Self {
        let samples = match family {
            Family::Pure if j >= 5.0 => 30_000,
            Family::Pure if j >= 1.0 => 20_000,
            _ => 10_000,
        };
        Self {
            family,
            j,
            j2: None,
            samples,
            seed: 42,
            layout: default_layout(family, j),
            train_fraction: 0.8,
            ensemble: EnsembleConfig::default(),
            curve_points: 41,
            normalize_negativity: false,
            persist_dataset: true,
            persist_ensemble: true,
            out_dir: None,
        }
    }

    pub fn pair(&self) -> Result<SpinPair> {
        match self.family {
            Family::Pure => SpinPair::new(self.j, self.j2.unwrap_or(self.j)),
            Family::Werner => Ok(SpinPair::symmetric(Spin::new(self.j)?)),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.pair()?;
        match (self.family, self.layout) {
            (Family::Pure, Layout::PureAmplitudes) => {}
            (Family::Werner, Layout::DensityFull | Layout::DensityCompact) => {}
            (f, l) => return Err(param(format!("layout {l:?} does not fit family {f:?}"))),
        }
        if self.family == Family::Werner && self.j2.is_some_and(|j2| j2 != self.j) {
            return Err(param("werner states have equal spins; drop j2"));
        }
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(param(format!("train_fraction {} outside (0, 1)", self.train_fraction)));
        }
        if self.curve_points == 0 {
            return Err(param("curve_points must be positive"));
        }
        Ok(())
    }

    /// First 16 hex digits of the SHA-256 of the config, output directory excluded.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.out_dir = None;
        let text = serde_json::to_string(&c).expect("config serializes");
        hex::encode(Sha256::digest(text.as_bytes()))[..16].to_string()
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Schema(format!("toml: {e}")))
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| param(format!("config file: {e}")))
    }

    /// Overlay the keys of a TOML document on this config.
    pub fn overlay_toml(&self, text: &str) -> Result<Self> {
        let mut base: toml::Value = toml::Value::try_from(self).map_err(|e| Error::Schema(format!("toml: {e}")))?;
        let over: toml::Value = toml::from_str(text).map_err(|e| param(format!("config file: {e}")))?;
        merge(&mut base, over);
        base.try_into().map_err(|e| param(format!("config file: {e}")))
    }
}

pub fn default_layout(family: Family, j: f64) -> Layout {
    match family {
        Family::Pure => Layout::PureAmplitudes,
        // the full layout at j = 5 is ~29k columns wide
        Family::Werner if j >= 5.0 => Layout::DensityCompact,
        Family::Werner => Layout::DensityFull,
    }
}

fn merge(base: &mut toml::Value, over: toml::Value) {
    match (base, over) {
        (toml::Value::Table(b), toml::Value::Table(o)) => {
            for (k, v) in o {
                match b.get_mut(&k) {
                    Some(slot) => merge(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

/// Model rows of reports and tables, in display order.
pub const MODEL_ROWS: [&str; 4] = ["mlp", "gbt", "extra_trees", "ensemble"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelResult {
    pub model: String,
    pub metrics: MetricsReport,
    pub line_fit: Option<LineFit>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub version: u32,
    pub config_hash: String,
    pub config: ExperimentConfig,
    pub dataset_seed: u64,
    pub split_seed: u64,
    pub ensemble_seed: u64,
    pub split: SplitPlan,
    pub meta_best_iteration: usize,
    pub meta_rounds_run: usize,
    pub results: Vec<ModelResult>,
    /// File names relative to the output directory.
    pub artifacts: Vec<String>,
}

impl ExperimentReport {
    pub fn result(&self, model: &str) -> Option<&ModelResult> {
        self.results.iter().find(|r| r.model == model)
    }

    pub fn ensemble(&self) -> &MetricsReport {
        &self.result("ensemble").expect("ensemble row").metrics
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub stages: Vec<(String, f64)>,
}

impl Timings {
    pub fn total(&self) -> f64 {
        self.stages.iter().map(|s| s.1).sum()
    }
}

pub struct PipelineRun {
    pub report: ExperimentReport,
    pub ensemble: StackedEnsemble,
    pub timings: Timings,
    pub test_targets: Vec<f64>,
    /// Test predictions per entry of [`MODEL_ROWS`].
    pub test_predictions: Vec<Vec<f64>>,
}

pub fn build_dataset(config: &ExperimentConfig) -> Result<Dataset> {
    config.validate()?;
    let mut rng = RngHandle::new(derive_seed(config.seed, &[0]));
    match config.family {
        Family::Pure => build_pure_dataset(config.pair()?, config.samples, &mut rng),
        Family::Werner => build_werner_dataset(Spin::new(config.j)?, config.samples, config.layout, &mut rng),
    }
}

struct Clock {
    stages: Vec<(String, f64)>,
    start: Instant,
}

impl Clock {
    fn new() -> Self {
        Clock {
            stages: Vec::new(),
            start: Instant::now(),
        }
    }

    fn lap(&mut self, name: &str) {
        let now = Instant::now();
        self.stages.push((name.to_string(), (now - self.start).as_secs_f64()));
        self.start = now;
    }
}

/// Build the dataset, split it, fit the stack and evaluate every model on
/// the held-out rows. Files are written only when `out_dir` is set.
pub fn run_pipeline(config: &ExperimentConfig) -> Result<PipelineRun> {
    let hash = config.hash();
    let staged = |stage: &'static str| {
        let hash = hash.clone();
        move |e: Error| e.stage(stage, hash)
    };
    config.validate().map_err(staged("config"))?;
    let mut clock = Clock::new();
    let out = config.out_dir.clone();
    if let Some(dir) = &out {
        std::fs::create_dir_all(dir).map_err(|e| Error::from(e).stage("output", hash.clone()))?;
    }
    let mut artifacts = Vec::new();

    let dataset = build_dataset(config).map_err(staged("dataset"))?;
    if let (Some(dir), true) = (&out, config.persist_dataset) {
        save_dataset(&dataset, &dir.join("dataset.csv")).map_err(staged("dataset"))?;
        artifacts.extend(["dataset.csv".to_string(), "dataset.meta".to_string()]);
    }
    clock.lap("dataset");

    let split_seed = derive_seed(config.seed, &[1]);
    let split = SplitPlan::new(dataset.len(), config.train_fraction, &mut RngHandle::new(split_seed))
        .map_err(staged("split"))?;
    let pair = dataset.meta.pair();
    let Dataset { features, targets, .. } = dataset;
    let train_x = features.select_rows(&split.train);
    let test_x = features.select_rows(&split.test);
    drop(features);
    let train_y: Vec<f64> = split.train.iter().map(|&r| targets[r]).collect();
    let test_y: Vec<f64> = split.test.iter().map(|&r| targets[r]).collect();
    drop(targets);

    let ensemble_seed = derive_seed(config.seed, &[2]);
    let mut ensemble = fit_stack(&train_x, &train_y, &config.ensemble, ensemble_seed).map_err(staged("ensemble"))?;
    drop(train_x);
    ensemble.feature_spec = Some(FeatureSpec {
        family: config.family,
        j1: pair.j1,
        j2: pair.j2,
        layout: config.layout,
        width: test_x.cols(),
    });
    clock.lap("fit");

    let output = ensemble.predict_all(&test_x).map_err(staged("evaluate"))?;
    drop(test_x);
    let column = |m: BaseModel| {
        let c = ensemble.meta_columns.iter().position(|x| *x == m).expect("base column");
        output.base.row_iter().map(|r| r[c]).collect::<Vec<f64>>()
    };
    let predictions = vec![
        column(BaseModel::Mlp),
        column(BaseModel::Gbt),
        column(BaseModel::ExtraTrees),
        output.ensemble.clone(),
    ];
    let mut results = Vec::new();
    for (name, pred) in MODEL_ROWS.iter().zip(&predictions) {
        let metrics = compute_metrics(&test_y, pred).map_err(staged("evaluate"))?;
        results.push(ModelResult {
            model: name.to_string(),
            metrics,
            line_fit: line_fit(&test_y, pred).ok(),
        });
    }
    clock.lap("evaluate");

    if let Some(dir) = &out {
        let scale = plot_scale(config.normalize_negativity, pair);
        for (name, pred) in MODEL_ROWS.iter().zip(&predictions) {
            let file = format!("scatter_{name}.csv");
            let rows: Vec<[f64; 2]> = test_y.iter().zip(pred).map(|(a, p)| [a / scale, p / scale]).collect();
            write_csv(&dir.join(&file), &["actual", "predicted"], &rows).map_err(staged("write"))?;
            artifacts.push(file);
        }
        if config.persist_ensemble {
            save_ensemble(&ensemble, &dir.join("ensemble.json")).map_err(staged("write"))?;
            artifacts.push("ensemble.json".into());
        }
    }
    if out.is_some() {
        artifacts.push("report.json".into());
        artifacts.push("timings.json".into());
    }

    let report = ExperimentReport {
        version: REPORT_VERSION,
        config_hash: hash.clone(),
        config: config.clone(),
        dataset_seed: derive_seed(config.seed, &[0]),
        split_seed,
        ensemble_seed,
        split,
        meta_best_iteration: ensemble.meta.best_iteration,
        meta_rounds_run: ensemble.meta.validation_curve.len(),
        results,
        artifacts,
    };
    clock.lap("write");
    let timings = Timings { stages: clock.stages };
    if let Some(dir) = &out {
        write_json(&dir.join("report.json"), &report).map_err(staged("write"))?;
        write_json(&dir.join("timings.json"), &timings).map_err(staged("write"))?;
    }
    Ok(PipelineRun {
        report,
        ensemble,
        timings,
        test_targets: test_y,
        test_predictions: predictions,
    })
}

fn plot_scale(normalize: bool, pair: SpinPair) -> f64 {
    if normalize {
        pair.max_negativity()
    } else {
        1.0
    }
}

pub(crate) fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

fn csv_writer(path: &Path) -> Result<csv::Writer<std::fs::File>> {
    Ok(csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)?)
}

fn write_csv<const N: usize>(path: &Path, header: &[&str; N], rows: &[[f64; N]]) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(header)?;
    for r in rows {
        w.write_record(r.iter().map(|v| format!("{v:?}")))?;
    }
    w.flush()?;
    Ok(())
}

/// Model-by-metric table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonTable {
    pub family: Family,
    pub j: f64,
    pub samples: usize,
    pub rows: Vec<(String, MetricsReport)>,
}

impl ComparisonTable {
    pub fn from_report(report: &ExperimentReport) -> Self {
        ComparisonTable {
            family: report.config.family,
            j: report.config.j,
            samples: report.config.samples,
            rows: report.results.iter().map(|r| (r.model.clone(), r.metrics)).collect(),
        }
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let family = match self.family {
            Family::Pure => "pure",
            Family::Werner => "werner",
        };
        let _ = writeln!(s, "family={family} j={} S={}", self.j, self.samples);
        let _ = writeln!(s, "{:<12} {:>14} {:>14} {:>10}", "model", "mse", "mae", "r2");
        for (name, m) in &self.rows {
            let _ = writeln!(s, "{:<12} {:>14.6e} {:>14.6e} {:>10.6}", name, m.mse, m.mae, m.r2);
        }
        s
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::write(dir.join("compare.txt"), self.to_text())?;
        let mut w = csv_writer(&dir.join("compare.csv"))?;
        w.write_record(["model", "mse", "mae", "r2"])?;
        for (name, m) in &self.rows {
            w.write_record([name.clone(), format!("{:?}", m.mse), format!("{:?}", m.mae), format!("{:?}", m.r2)])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Run the pipeline and emit `compare.txt` / `compare.csv`.
pub fn compare_models(config: &ExperimentConfig) -> Result<(ComparisonTable, PipelineRun)> {
    let run = run_pipeline(config)?;
    let table = ComparisonTable::from_report(&run.report);
    if let Some(dir) = &config.out_dir {
        table.write(dir).map_err(|e| e.stage("write", config.hash()))?;
    }
    Ok((table, run))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    #[serde(rename = "S")]
    pub samples: usize,
    pub j: f64,
    pub family: Family,
    pub model: String,
    pub status: String,
    pub mse: f64,
    pub mae: f64,
    pub r2: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SweepLog {
    pub rows: Vec<SweepRow>,
}

impl SweepLog {
    pub fn ensemble_r2(&self) -> Vec<(usize, f64)> {
        self.rows
            .iter()
            .filter(|r| r.model == "ensemble" && r.status == "ok")
            .map(|r| (r.samples, r.r2))
            .collect()
    }

    /// Records for [`fit_scaling_law`] from the ensemble rows.
    pub fn scaling_records(&self) -> Vec<ScalingRecord> {
        self.rows
            .iter()
            .filter(|r| r.model == "ensemble" && r.status == "ok")
            .map(|r| ScalingRecord {
                j: r.j,
                mse: r.mse,
                mae: r.mae,
                r2: r.r2,
                samples: r.samples as f64,
            })
            .collect()
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv_writer(path)?;
        for r in &self.rows {
            w.serialize(r)?;
        }
        if self.rows.is_empty() {
            w.write_record(["S", "j", "family", "model", "status", "mse", "mae", "r2"])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        if !path.exists() {
            return Err(Error::MissingFile(path.to_path_buf()));
        }
        let mut r = csv::Reader::from_path(path)?;
        let rows = r.deserialize().collect::<std::result::Result<Vec<SweepRow>, _>>()?;
        Ok(SweepLog { rows })
    }
}

/// Seed of the sweep entry with `samples` rows.
pub fn sweep_seed(seed: u64, samples: usize) -> u64 {
    derive_seed(seed, &[0x5AE3, samples as u64])
}

/// One pipeline run per size, each on a freshly generated dataset; a failed
/// size is logged with its error and the sweep moves on.
pub fn sweep_samples(config: &ExperimentConfig, sizes: &[usize]) -> Result<(SweepLog, Vec<Result<PipelineRun>>)> {
    if sizes.windows(2).any(|w| w[0] >= w[1]) || sizes.is_empty() {
        return Err(param("sample sizes must be nonempty and strictly ascending"));
    }
    let mut log = SweepLog::default();
    let mut runs = Vec::new();
    for &s in sizes {
        let mut c = config.clone();
        c.samples = s;
        c.seed = sweep_seed(config.seed, s);
        c.out_dir = config.out_dir.as_ref().map(|d| d.join(format!("S_{s}")));
        let run = run_pipeline(&c);
        match &run {
            Ok(r) => {
                for res in &r.report.results {
                    log.rows.push(SweepRow {
                        samples: s,
                        j: config.j,
                        family: config.family,
                        model: res.model.clone(),
                        status: "ok".into(),
                        mse: res.metrics.mse,
                        mae: res.metrics.mae,
                        r2: res.metrics.r2,
                    });
                }
            }
            Err(e) => log.rows.push(SweepRow {
                samples: s,
                j: config.j,
                family: config.family,
                model: "ensemble".into(),
                status: format!("error: {e}"),
                mse: f64::NAN,
                mae: f64::NAN,
                r2: f64::NAN,
            }),
        }
        runs.push(run);
    }
    if let Some(dir) = &config.out_dir {
        std::fs::create_dir_all(dir)?;
        log.write_csv(&dir.join("sweep_samples.csv"))?;
    }
    Ok((log, runs))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub x: f64,
    pub exact: f64,
    pub predicted: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Curve {
    /// `theta` or `alpha`.
    pub parameter: String,
    pub points: Vec<CurvePoint>,
    /// Values divided by this before writing.
    pub scale: f64,
}

impl Curve {
    pub fn max_abs_error(&self) -> f64 {
        self.points.iter().map(|p| (p.predicted - p.exact).abs()).fold(0.0, f64::max)
    }

    /// First grid value whose prediction exceeds [`THRESHOLD_LEVEL`].
    pub fn predicted_threshold(&self) -> Option<f64> {
        self.points.iter().find(|p| p.predicted > THRESHOLD_LEVEL).map(|p| p.x)
    }

    /// Zero crossing of the exact column, extrapolated back from its first
    /// two positive points (the exact Werner curve is linear past the threshold).
    pub fn exact_threshold(&self) -> Option<f64> {
        let i = self.points.iter().position(|p| p.exact > 0.0)?;
        let a = self.points[i];
        if i == 0 {
            return Some(a.x);
        }
        let b = *self.points.get(i + 1)?;
        Some(a.x - a.exact * (b.x - a.x) / (b.exact - a.exact))
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let rows: Vec<[f64; 3]> = self
            .points
            .iter()
            .map(|p| [p.x, p.exact / self.scale, p.predicted / self.scale])
            .collect();
        write_csv(path, &[self.parameter.as_str(), "exact", "predicted"], &rows)
    }
}

/// `n` evenly spaced points on `[lo, hi]`; a single point sits at `lo`.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n)
        .map(|i| if i + 1 == n { hi } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 })
        .collect()
}

fn check_spec(ensemble: &StackedEnsemble, family: Family, j: Spin) -> Result<()> {
    if let Some(spec) = &ensemble.feature_spec {
        if spec.family != family || spec.j1 != j || spec.j2 != j {
            return Err(param(format!(
                "ensemble was trained on {:?} states with j=({}, {}), not {family:?} j={j}",
                spec.family, spec.j1, spec.j2
            )));
        }
    }
    Ok(())
}

/// Predicted and closed-form negativity of `cos t |-j,-j> + sin t |j,j>`.
pub fn sweep_theta(ensemble: &StackedEnsemble, j: Spin, grid: &[f64], normalize: bool) -> Result<Curve> {
    check_spec(ensemble, Family::Pure, j)?;
    let width = SpinPair::symmetric(j).n_amp();
    let mut data = Vec::with_capacity(grid.len() * width);
    let mut exact = Vec::with_capacity(grid.len());
    for &t in grid {
        data.extend(featurize_pure(&zeta_state(j, t)?).values);
        exact.push(zeta_negativity_closed_form(j, t)?.value);
    }
    let pred = ensemble.predict_all(&Matrix::from_vec(grid.len(), width, data)?)?.ensemble;
    Ok(Curve {
        parameter: "theta".into(),
        points: grid
            .iter()
            .zip(exact)
            .zip(pred)
            .map(|((&x, exact), predicted)| CurvePoint { x, exact, predicted })
            .collect(),
        scale: plot_scale(normalize, SpinPair::symmetric(j)),
    })
}

/// Predicted and closed-form negativity along the Werner family.
pub fn sweep_alpha(
    ensemble: &StackedEnsemble,
    j: Spin,
    layout: Layout,
    grid: &[f64],
    normalize: bool,
) -> Result<Curve> {
    check_spec(ensemble, Family::Werner, j)?;
    let width = layout.width(SpinPair::symmetric(j).n_amp());
    let mut data = Vec::with_capacity(grid.len() * width);
    let mut exact = Vec::with_capacity(grid.len());
    for &a in grid {
        data.extend(featurize_density(&werner_state(j, a)?, layout)?.values);
        exact.push(werner_negativity_closed_form(j, a)?.value);
    }
    let pred = ensemble.predict_all(&Matrix::from_vec(grid.len(), width, data)?)?.ensemble;
    Ok(Curve {
        parameter: "alpha".into(),
        points: grid
            .iter()
            .zip(exact)
            .zip(pred)
            .map(|((&x, exact), predicted)| CurvePoint { x, exact, predicted })
            .collect(),
        scale: plot_scale(normalize, SpinPair::symmetric(j)),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveSummary {
    pub parameter: String,
    pub points: usize,
    pub max_abs_error: f64,
    pub predicted_threshold: Option<f64>,
    pub exact_threshold: Option<f64>,
}

impl From<&Curve> for CurveSummary {
    fn from(c: &Curve) -> Self {
        CurveSummary {
            parameter: c.parameter.clone(),
            points: c.points.len(),
            max_abs_error: c.max_abs_error(),
            predicted_threshold: c.predicted_threshold(),
            exact_threshold: c.exact_threshold(),
        }
    }
}

/// Write `<stem>.csv` and `<stem>.json` (summary) into `dir`.
pub fn write_curve(curve: &Curve, dir: &Path, stem: &str) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    curve.write_csv(&dir.join(format!("{stem}.csv")))?;
    write_json(&dir.join(format!("{stem}.json")), &CurveSummary::from(curve))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub records: Vec<ScalingRecord>,
    pub coefficients: ScalingCoefficients,
    /// `cJ > 0, cMSE < 0, cMAE < 0, cR2 > 0`.
    pub matches_published_signs: bool,
}

pub fn signs_match(c: &ScalingCoefficients) -> bool {
    c.c_j > 0.0 && c.c_mse < 0.0 && c.c_mae < 0.0 && c.c_r2 > 0.0
}

/// Refit the scaling law on the ensemble rows of one or more sweep logs.
pub fn scaling_fit(logs: &[SweepLog]) -> Result<ScalingFit> {
    let records: Vec<ScalingRecord> = logs.iter().flat_map(|l| l.scaling_records()).collect();
    let coefficients = fit_scaling_law(&records)?;
    Ok(ScalingFit {
        matches_published_signs: signs_match(&coefficients),
        records,
        coefficients,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::regressors::{ExtraTreesConfig, GbtConfig, MetaGbtConfig, MlpConfig};

    pub(crate) fn tiny(family: Family, j: f64, samples: usize) -> ExperimentConfig {
        let mut c = ExperimentConfig::desk_default(family, j);
        c.samples = samples;
        c.ensemble = EnsembleConfig {
            folds: 3,
            mlp: MlpConfig { hidden: vec![16, 8], epochs: 10, batch_size: 8, ..Default::default() },
            extra_trees: ExtraTreesConfig { n_estimators: 10, ..Default::default() },
            gbt: GbtConfig { n_estimators: 20, max_depth: 4, ..Default::default() },
            meta: MetaGbtConfig { max_estimators: 100, patience: 10, ..Default::default() },
        };
        c
    }

    #[test]
    fn layouts_and_defaults() {
        assert_eq!(ExperimentConfig::desk_default(Family::Pure, 1.0).samples, 20_000);
        assert_eq!(ExperimentConfig::desk_default(Family::Pure, 5.0).samples, 30_000);
        assert_eq!(ExperimentConfig::desk_default(Family::Werner, 5.0).layout, Layout::DensityCompact);
        let c = ExperimentConfig { layout: Layout::DensityFull, ..Default::default() };
        assert!(c.validate().is_err());
    }

    #[test]
    fn toml_round_trip_and_overlay() {
        let c = tiny(Family::Werner, 1.0, 60);
        let back = ExperimentConfig::from_toml(&c.to_toml().unwrap()).unwrap();
        assert_eq!(back, c);
        let o = c.overlay_toml("samples = 77\n[ensemble.gbt]\nmax_depth = 2\n").unwrap();
        assert_eq!(o.samples, 77);
        assert_eq!(o.ensemble.gbt.max_depth, 2);
        assert_eq!(o.ensemble.gbt.n_estimators, 20);
        assert!(c.overlay_toml("samples = \"many\"").is_err());
    }

    #[test]
    fn smoke_pipeline() {
        let run = run_pipeline(&tiny(Family::Pure, 0.5, 50)).unwrap();
        assert_eq!(run.report.results.len(), 4);
        assert_eq!(run.report.split.train.len(), 40);
        assert!(run.test_predictions[3].iter().all(|p| *p >= 0.0));
    }

    #[test]
    fn stage_errors_carry_hash() {
        let mut c = tiny(Family::Pure, 0.5, 5);
        c.samples = 5;
        let e = run_pipeline(&c).err().unwrap();
        match &e {
            Error::Stage { stage, config_hash, .. } => {
                assert_eq!(stage, "dataset");
                assert_eq!(config_hash, &c.hash());
            }
            other => panic!("{other:?}"),
        }
        assert_eq!(e.exit_code(), 2);
    }

    #[test]
    fn grid_shapes() {
        assert_eq!(linspace(0.0, 1.0, 1), vec![0.0]);
        let g = linspace(0.0, 1.0, 41);
        assert_eq!((g[0], g[40], g.len()), (0.0, 1.0, 41));
    }

    #[test]
    fn exact_threshold_from_grid() {
        let j = Spin::new(5.0).unwrap();
        let pts = linspace(0.0, 1.0, 41)
            .into_iter()
            .map(|x| CurvePoint { x, exact: werner_negativity_closed_form(j, x).unwrap().value, predicted: 0.0 })
            .collect();
        let c = Curve { parameter: "alpha".into(), points: pts, scale: 1.0 };
        assert!((c.exact_threshold().unwrap() - 1.0 / 12.0).abs() < 1e-12);
        assert_eq!(c.predicted_threshold(), None);
    }
}
