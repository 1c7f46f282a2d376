//! Stacked generalization: K-fold out-of-fold base predictions feed a
//! boosted meta-learner, and the base models are refit on the full
//! training set for inference.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dataset::{Family, Layout, Standardizer};
use crate::error::{param, Error, Result};
use crate::matrix::Matrix;
use crate::regressors::{
    extratrees_fit, gbt_fit, meta_gbt_fit, mlp_fit, ExtraTreesConfig, GbtConfig, MetaGbtConfig,
    MetaGbtModel, MlpConfig, TrainedModel,
};
use crate::rng::{derive_seed, RngHandle};
use crate::states::Spin;

pub const ENSEMBLE_SCHEMA_VERSION: u32 = 1;

/// Meta-feature column order.
pub const BASE_MODELS: [BaseModel; 3] = [BaseModel::Mlp, BaseModel::ExtraTrees, BaseModel::Gbt];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaseModel {
    Mlp,
    ExtraTrees,
    Gbt,
}

impl BaseModel {
    pub fn name(self) -> &'static str {
        match self {
            BaseModel::Mlp => "mlp",
            BaseModel::ExtraTrees => "extra_trees",
            BaseModel::Gbt => "gbt",
        }
    }

    fn index(self) -> u64 {
        BASE_MODELS.iter().position(|m| *m == self).expect("listed") as u64
    }
}

/// Seed streams used by [`fit_stack`].
pub const STAGE_FOLDS: u64 = 0;
pub const STAGE_OOF: u64 = 1;
pub const STAGE_REFIT: u64 = 2;
pub const STAGE_META: u64 = 3;

/// Seed of one base-model fit; the refit stage uses fold 0.
pub fn base_job_seed(seed: u64, stage: u64, fold: usize, model: BaseModel) -> u64 {
    derive_seed(seed, &[stage, fold as u64, model.index()])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EnsembleConfig {
    pub folds: usize,
    pub mlp: MlpConfig,
    pub extra_trees: ExtraTreesConfig,
    pub gbt: GbtConfig,
    pub meta: MetaGbtConfig,
}

impl Default for EnsembleConfig {
    fn default() -> Self {
        Self {
            folds: 5,
            mlp: MlpConfig::default(),
            extra_trees: ExtraTreesConfig::default(),
            gbt: GbtConfig::default(),
            meta: MetaGbtConfig::default(),
        }
    }
}

/// Fit one base model on already standardized features.
pub fn fit_base(
    model: BaseModel,
    features: &Matrix,
    targets: &[f64],
    config: &EnsembleConfig,
    seed: u64,
) -> Result<TrainedModel> {
    let fitted = match model {
        BaseModel::Mlp => TrainedModel::Mlp(mlp_fit(features, targets, &config.mlp, &mut RngHandle::new(seed))?),
        BaseModel::ExtraTrees => {
            let cfg = ExtraTreesConfig { seed, ..config.extra_trees.clone() };
            TrainedModel::ExtraTrees(extratrees_fit(features, targets, &cfg)?)
        }
        BaseModel::Gbt => {
            let cfg = GbtConfig { seed, ..config.gbt.clone() };
            TrainedModel::Gbt(gbt_fit(features, targets, &cfg)?)
        }
    };
    Ok(fitted)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub k: usize,
    /// Fold index of every row.
    pub assignments: Vec<usize>,
}

impl FoldPlan {
    pub fn len(&self) -> usize {
        self.assignments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignments.is_empty()
    }

    /// Rows of fold `f`, ascending.
    pub fn fold_rows(&self, f: usize) -> Vec<usize> {
        (0..self.len()).filter(|&r| self.assignments[r] == f).collect()
    }

    /// Rows outside fold `f`, ascending.
    pub fn training_rows(&self, f: usize) -> Vec<usize> {
        (0..self.len()).filter(|&r| self.assignments[r] != f).collect()
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut s = vec![0; self.k];
        for &f in &self.assignments {
            s[f] += 1;
        }
        s
    }

    pub fn validate(&self) -> Result<()> {
        if self.k < 2 || self.k > self.len() || self.assignments.iter().any(|&f| f >= self.k) {
            return Err(Error::Integrity("fold plan is malformed".into()));
        }
        let s = self.sizes();
        if s.iter().max().unwrap() - s.iter().min().unwrap() > 1 {
            return Err(Error::Integrity("fold sizes differ by more than one".into()));
        }
        Ok(())
    }
}

/// Seeded permutation dealt into `k` folds: the first `s mod k` folds get
/// one extra row.
pub fn kfold_plan(s: usize, k: usize, rng: &mut RngHandle) -> Result<FoldPlan> {
    if k < 2 || k > s {
        return Err(param(format!("fold count {k} must satisfy 2 <= K <= S = {s}")));
    }
    let perm = rng.permutation(s);
    let mut assignments = vec![0; s];
    let (base, extra) = (s / k, s % k);
    let mut pos = 0;
    for f in 0..k {
        let size = base + usize::from(f < extra);
        for &r in &perm[pos..pos + size] {
            assignments[r] = f;
        }
        pos += size;
    }
    Ok(FoldPlan { k, assignments })
}

/// One fold fit: which rows trained the model and which rows it predicted.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OofJob {
    pub fold: usize,
    pub model: BaseModel,
    pub seed: u64,
    pub trained_on: Vec<usize>,
    pub predicted: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OofPredictions {
    /// `S x 3`, columns in [`BASE_MODELS`] order.
    pub matrix: Matrix,
    pub jobs: Vec<OofJob>,
}

/// Out-of-fold predictions on standardized `features`.
pub fn oof_predictions(
    features: &Matrix,
    targets: &[f64],
    plan: &FoldPlan,
    config: &EnsembleConfig,
    seed: u64,
) -> Result<OofPredictions> {
    if plan.len() != features.rows() || targets.len() != features.rows() {
        return Err(Error::Structural(format!(
            "fold plan covers {} rows, features have {}, targets {}",
            plan.len(),
            features.rows(),
            targets.len()
        )));
    }
    plan.validate()?;
    let mut matrix = Matrix::zeros(features.rows(), BASE_MODELS.len());
    let mut jobs = Vec::with_capacity(plan.k * BASE_MODELS.len());
    for f in 0..plan.k {
        let train = plan.training_rows(f);
        let held = plan.fold_rows(f);
        let x = features.select_rows(&train);
        let y: Vec<f64> = train.iter().map(|&r| targets[r]).collect();
        let xh = features.select_rows(&held);
        for (c, &model) in BASE_MODELS.iter().enumerate() {
            let job_seed = base_job_seed(seed, STAGE_OOF, f, model);
            let fitted = fit_base(model, &x, &y, config, job_seed)
                .map_err(|e| e.tagged(format!("fold {f}, model {}", model.name())))?;
            let pred = fitted.predict(&xh)?;
            for (&r, p) in held.iter().zip(pred) {
                if !p.is_finite() {
                    return Err(Error::Divergence(format!(
                        "{} produced a non-finite out-of-fold prediction in fold {f}",
                        model.name()
                    )));
                }
                matrix[(r, c)] = p;
            }
            jobs.push(OofJob {
                fold: f,
                model,
                seed: job_seed,
                trained_on: train.clone(),
                predicted: held.clone(),
            });
        }
    }
    Ok(OofPredictions { matrix, jobs })
}

/// What the feature columns mean; carried so a loaded ensemble can report
/// what it was trained on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSpec {
    pub family: Family,
    pub j1: Spin,
    pub j2: Spin,
    pub layout: Layout,
    pub width: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StackedEnsemble {
    pub seed: u64,
    pub config: EnsembleConfig,
    pub feature_spec: Option<FeatureSpec>,
    pub standardizer: Standardizer,
    pub fold_plan: FoldPlan,
    pub meta_columns: Vec<BaseModel>,
    /// Refit on the full training set, in `meta_columns` order.
    pub base_models: Vec<TrainedModel>,
    pub meta: MetaGbtModel,
}

/// Base and stacked predictions for one batch.
#[derive(Debug, Clone, PartialEq)]
pub struct StackOutput {
    /// `n x 3` base predictions in meta-column order.
    pub base: Matrix,
    pub ensemble: Vec<f64>,
}

impl StackedEnsemble {
    pub fn width(&self) -> usize {
        self.standardizer.width()
    }

    pub fn base_model(&self, model: BaseModel) -> &TrainedModel {
        let i = self.meta_columns.iter().position(|m| *m == model).expect("all bases present");
        &self.base_models[i]
    }

    /// Standardize, run every base model, then the meta model.
    pub fn predict_all(&self, raw: &Matrix) -> Result<StackOutput> {
        let x = self.standardizer.apply(raw)?;
        let mut base = Matrix::zeros(raw.rows(), self.base_models.len());
        for (c, m) in self.base_models.iter().enumerate() {
            for (r, p) in m.predict(&x)?.into_iter().enumerate() {
                base[(r, c)] = p;
            }
        }
        let ensemble = base.row_iter().map(|r| self.meta.predict_row(r).max(0.0)).collect();
        Ok(StackOutput { base, ensemble })
    }

    pub fn validate(&self) -> Result<()> {
        self.fold_plan.validate()?;
        if self.meta_columns != BASE_MODELS || self.base_models.len() != BASE_MODELS.len() {
            return Err(Error::Integrity("ensemble meta columns are not (mlp, extra_trees, gbt)".into()));
        }
        for (m, b) in self.meta_columns.iter().zip(&self.base_models) {
            if m.name() != b.name() {
                return Err(Error::Integrity(format!("meta column {} holds a {} model", m.name(), b.name())));
            }
            if b.width() != self.width() {
                return Err(Error::Integrity(format!("{} width differs from standardizer", b.name())));
            }
            b.validate()?;
        }
        if self.meta.width != BASE_MODELS.len() {
            return Err(Error::Integrity("meta model must take 3 inputs".into()));
        }
        TrainedModel::Meta(self.meta.clone()).validate()
    }
}

/// Standardize on `raw_train`, build out-of-fold meta features, fit the
/// meta-learner on them and refit every base model on all training rows.
pub fn fit_stack(
    raw_train: &Matrix,
    targets: &[f64],
    config: &EnsembleConfig,
    seed: u64,
) -> Result<StackedEnsemble> {
    let n = raw_train.rows();
    if targets.len() != n {
        return Err(Error::Structural(format!("{n} rows but {} targets", targets.len())));
    }
    if n < 5 * config.folds {
        return Err(param(format!("stacking needs S >= 5 K = {}, got {n}", 5 * config.folds)));
    }
    let standardizer = Standardizer::fit(raw_train).map_err(|e| e.tagged("standardizer"))?;
    let x = standardizer.apply(raw_train)?;
    let fold_plan = kfold_plan(n, config.folds, &mut RngHandle::new(derive_seed(seed, &[STAGE_FOLDS])))?;
    let oof = oof_predictions(&x, targets, &fold_plan, config, seed).map_err(|e| e.tagged("out-of-fold"))?;
    let meta = meta_gbt_fit(
        &oof.matrix,
        targets,
        &config.meta,
        &mut RngHandle::new(derive_seed(seed, &[STAGE_META])),
    )
    .map_err(|e| e.tagged("meta learner"))?;
    drop(oof);
    let mut base_models = Vec::with_capacity(BASE_MODELS.len());
    for &model in &BASE_MODELS {
        let fitted = fit_base(model, &x, targets, config, base_job_seed(seed, STAGE_REFIT, 0, model))
            .map_err(|e| e.tagged(format!("refit {}", model.name())))?;
        base_models.push(fitted);
    }
    Ok(StackedEnsemble {
        seed,
        config: config.clone(),
        feature_spec: None,
        standardizer,
        fold_plan,
        meta_columns: BASE_MODELS.to_vec(),
        base_models,
        meta,
    })
}

/// Final predictions, clamped at zero.
pub fn stack_predict(ensemble: &StackedEnsemble, raw: &Matrix) -> Result<Vec<f64>> {
    Ok(ensemble.predict_all(raw)?.ensemble)
}

#[derive(Debug, Serialize, Deserialize)]
struct ComponentEntry {
    name: String,
    sha256: String,
}

#[derive(Debug, Serialize, Deserialize)]
struct Manifest {
    schema_version: u32,
    components: Vec<ComponentEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
struct Container {
    manifest: Manifest,
    /// Serialized components, in manifest order.
    blobs: Vec<String>,
}

#[derive(Serialize, Deserialize)]
struct Header {
    seed: u64,
    config: EnsembleConfig,
    feature_spec: Option<FeatureSpec>,
    meta_columns: Vec<BaseModel>,
}

fn sha256_hex(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

pub fn ensemble_to_json(e: &StackedEnsemble) -> Result<String> {
    let header = Header {
        seed: e.seed,
        config: e.config.clone(),
        feature_spec: e.feature_spec.clone(),
        meta_columns: e.meta_columns.clone(),
    };
    let mut named = vec![
        ("header".to_string(), serde_json::to_string(&header)?),
        ("standardizer".to_string(), serde_json::to_string(&e.standardizer)?),
        ("fold_plan".to_string(), serde_json::to_string(&e.fold_plan)?),
    ];
    for m in &e.base_models {
        named.push((m.name().to_string(), crate::regressors::model_to_json(m)?));
    }
    named.push((
        "meta_gbt".to_string(),
        crate::regressors::model_to_json(&TrainedModel::Meta(e.meta.clone()))?,
    ));
    let container = Container {
        manifest: Manifest {
            schema_version: ENSEMBLE_SCHEMA_VERSION,
            components: named
                .iter()
                .map(|(name, blob)| ComponentEntry {
                    name: name.clone(),
                    sha256: sha256_hex(blob),
                })
                .collect(),
        },
        blobs: named.into_iter().map(|(_, b)| b).collect(),
    };
    Ok(serde_json::to_string(&container)?)
}

pub fn ensemble_from_json(text: &str) -> Result<StackedEnsemble> {
    let c: Container = serde_json::from_str(text)?;
    if c.manifest.schema_version != ENSEMBLE_SCHEMA_VERSION {
        return Err(Error::Schema(format!(
            "ensemble schema version {}, expected {ENSEMBLE_SCHEMA_VERSION}",
            c.manifest.schema_version
        )));
    }
    let expected = ["header", "standardizer", "fold_plan", "mlp", "extra_trees", "gbt", "meta_gbt"];
    let names: Vec<&str> = c.manifest.components.iter().map(|e| e.name.as_str()).collect();
    if names != expected || c.blobs.len() != expected.len() {
        return Err(Error::Integrity(format!("unexpected ensemble components {names:?}")));
    }
    for (entry, blob) in c.manifest.components.iter().zip(&c.blobs) {
        if sha256_hex(blob) != entry.sha256 {
            return Err(Error::Integrity(format!("checksum mismatch in component `{}`", entry.name)));
        }
    }
    let header: Header = serde_json::from_str(&c.blobs[0])?;
    let standardizer: Standardizer = serde_json::from_str(&c.blobs[1])?;
    let fold_plan: FoldPlan = serde_json::from_str(&c.blobs[2])?;
    let base_models = c.blobs[3..6]
        .iter()
        .map(|b| crate::regressors::model_from_json(b))
        .collect::<Result<Vec<_>>>()?;
    let meta = match crate::regressors::model_from_json(&c.blobs[6])? {
        TrainedModel::Meta(m) => m,
        other => return Err(Error::Integrity(format!("meta component holds a {} model", other.name()))),
    };
    let e = StackedEnsemble {
        seed: header.seed,
        config: header.config,
        feature_spec: header.feature_spec,
        standardizer,
        fold_plan,
        meta_columns: header.meta_columns,
        base_models,
        meta,
    };
    e.validate()?;
    Ok(e)
}

pub fn save_ensemble(e: &StackedEnsemble, path: &Path) -> Result<()> {
    std::fs::write(path, ensemble_to_json(e)?)?;
    Ok(())
}

pub fn load_ensemble(path: &Path) -> Result<StackedEnsemble> {
    if !path.exists() {
        return Err(Error::MissingFile(path.to_path_buf()));
    }
    ensemble_from_json(&std::fs::read_to_string(path)?)
}
