//! From-scratch regressors: a ReLU network, second-order gradient boosting,
//! extremely randomized trees and the boosted meta-learner.

pub mod extra_trees;
pub mod gbt;
pub mod meta;
pub mod mlp;
pub mod tree;

use std::path::Path;

use serde::{Deserialize, Serialize};

pub use extra_trees::{extratrees_fit, variance_reduction, ExtraTreesConfig, ExtraTreesModel};
pub use gbt::{gbt_fit, gbt_split_gain, GbtConfig, GbtModel};
pub use meta::{meta_gbt_fit, target_statistic, MetaBaseline, MetaGbtConfig, MetaGbtModel};
pub use mlp::{mlp_fit, mlp_forward, mlp_gradient, mlp_loss, MlpConfig, MlpModel, Optimizer};
pub use tree::{FeatureSampling, Tree, TreeNode};

use crate::error::{Error, Result};
use crate::matrix::Matrix;

pub const MODEL_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "model", rename_all = "snake_case")]
pub enum TrainedModel {
    Mlp(MlpModel),
    Gbt(GbtModel),
    ExtraTrees(ExtraTreesModel),
    Meta(MetaGbtModel),
}

impl TrainedModel {
    pub fn name(&self) -> &'static str {
        match self {
            TrainedModel::Mlp(_) => "mlp",
            TrainedModel::Gbt(_) => "gbt",
            TrainedModel::ExtraTrees(_) => "extra_trees",
            TrainedModel::Meta(_) => "meta_gbt",
        }
    }

    pub fn width(&self) -> usize {
        match self {
            TrainedModel::Mlp(m) => m.input_width(),
            TrainedModel::Gbt(m) => m.width,
            TrainedModel::ExtraTrees(m) => m.width,
            TrainedModel::Meta(m) => m.width,
        }
    }

    pub fn predict(&self, features: &Matrix) -> Result<Vec<f64>> {
        if features.cols() != self.width() {
            return Err(Error::Width {
                expected: self.width(),
                got: features.cols(),
            });
        }
        Ok(match self {
            TrainedModel::Mlp(m) => m.predict(features)?,
            TrainedModel::Gbt(m) => features.row_iter().map(|r| m.predict_row(r)).collect(),
            TrainedModel::ExtraTrees(m) => features.row_iter().map(|r| m.predict_row(r)).collect(),
            TrainedModel::Meta(m) => features.row_iter().map(|r| m.predict_row(r)).collect(),
        })
    }

    /// Shape checks run after deserialization.
    pub fn validate(&self) -> Result<()> {
        match self {
            TrainedModel::Mlp(m) => m.validate(),
            TrainedModel::Gbt(m) => {
                finite(m.base_score, "gbt base score")?;
                m.trees.iter().try_for_each(|t| t.validate(m.width))
            }
            TrainedModel::ExtraTrees(m) => {
                if m.trees.is_empty() {
                    return Err(Error::Integrity("extra-trees model has no trees".into()));
                }
                m.trees.iter().try_for_each(|t| t.validate(m.width))
            }
            TrainedModel::Meta(m) => {
                finite(m.base_score, "meta base score")?;
                if m.encodings.iter().any(|e| e.column >= m.width) {
                    return Err(Error::Integrity("meta encoding column out of range".into()));
                }
                m.trees.iter().try_for_each(|t| t.validate(m.width))
            }
        }
    }
}

fn finite(v: f64, what: &str) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::Integrity(format!("{what} is not finite")))
    }
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    version: u32,
    #[serde(flatten)]
    model: TrainedModel,
}

pub fn model_to_json(model: &TrainedModel) -> Result<String> {
    Ok(serde_json::to_string(&ModelFile {
        version: MODEL_VERSION,
        model: model.clone(),
    })?)
}

pub fn model_from_json(text: &str) -> Result<TrainedModel> {
    let v: serde_json::Value = serde_json::from_str(text)?;
    match v.get("version").and_then(|v| v.as_u64()) {
        Some(x) if x == MODEL_VERSION as u64 => {}
        other => {
            return Err(Error::Schema(format!(
                "model file version {other:?}, expected {MODEL_VERSION}"
            )))
        }
    }
    let file: ModelFile = serde_json::from_value(v)?;
    file.model.validate()?;
    Ok(file.model)
}

pub fn save_model(model: &TrainedModel, path: &Path) -> Result<()> {
    std::fs::write(path, model_to_json(model)?)?;
    Ok(())
}

pub fn load_model(path: &Path) -> Result<TrainedModel> {
    if !path.exists() {
        return Err(Error::MissingFile(path.to_path_buf()));
    }
    model_from_json(&std::fs::read_to_string(path)?)
}
