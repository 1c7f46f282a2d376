//! Boosted meta-regressor with validation-based early stopping, plus an
//! ordered target-statistic encoder for categorical columns.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::gbt::{check_xy, target_mean, Booster, TreeParams};
use super::tree::{FeatureSampling, Tree};
use crate::error::{param, Error, Result};
use crate::matrix::Matrix;
use crate::rng::RngHandle;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MetaGbtConfig {
    pub max_estimators: usize,
    pub patience: usize,
    pub validation_fraction: f64,
    pub learning_rate: f64,
    pub max_depth: usize,
    pub lambda: f64,
    pub gamma: f64,
    pub min_child_weight: f64,
    /// Columns holding category codes; empty in the stacking pipeline.
    pub categorical: Vec<usize>,
    /// Prior weight `a` of the target statistic.
    pub ts_prior_weight: f64,
    pub baseline: MetaBaseline,
}

/// Starting prediction the trees correct.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetaBaseline {
    /// Constant mean target.
    Mean,
    /// The non-categorical input column with the lowest squared error on the
    /// fitting rows. Boosting may then stop after zero rounds.
    BestColumn,
}

impl Default for MetaGbtConfig {
    fn default() -> Self {
        Self {
            max_estimators: 1000,
            patience: 50,
            validation_fraction: 0.1,
            learning_rate: 0.05,
            max_depth: 6,
            lambda: 1.0,
            gamma: 0.0,
            min_child_weight: 1.0,
            categorical: Vec::new(),
            ts_prior_weight: 1.0,
            baseline: MetaBaseline::BestColumn,
        }
    }
}

/// Per-category target sums over the full fitting set, used at prediction time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoryEncoding {
    pub column: usize,
    pub prior: f64,
    pub prior_weight: f64,
    /// `(code bits, target sum, count)`, sorted by code bits.
    pub table: Vec<(u64, f64, usize)>,
}

impl CategoryEncoding {
    fn encode(&self, code: f64) -> f64 {
        let key = category_key(code);
        match self.table.binary_search_by_key(&key, |e| e.0) {
            Ok(i) => {
                let (_, s, c) = self.table[i];
                (s + self.prior_weight * self.prior) / (c as f64 + self.prior_weight)
            }
            Err(_) => self.prior,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetaGbtModel {
    pub config: MetaGbtConfig,
    pub seed: u64,
    pub width: usize,
    pub base_score: f64,
    /// Input column added to `base_score` before the trees.
    pub baseline_column: Option<usize>,
    pub trees: Vec<Tree>,
    /// Validation MSE after each boosting round that was run.
    pub validation_curve: Vec<f64>,
    /// Number of rounds retained (1-based index of the best validation MSE).
    pub best_iteration: usize,
    pub encodings: Vec<CategoryEncoding>,
}

impl MetaGbtModel {
    pub fn predict_row(&self, x: &[f64]) -> f64 {
        let encoded;
        let x = if self.encodings.is_empty() {
            x
        } else {
            let mut v = x.to_vec();
            for e in &self.encodings {
                v[e.column] = e.encode(v[e.column]);
            }
            encoded = v;
            &encoded
        };
        let mut y = self.base_score + self.baseline_column.map_or(0.0, |c| x[c]);
        for t in &self.trees {
            y += self.config.learning_rate * t.predict_row(x);
        }
        y
    }
}

fn category_key(code: f64) -> u64 {
    // -0.0 and 0.0 are the same category
    if code == 0.0 {
        0
    } else {
        code.to_bits()
    }
}

/// Ordered target statistic: the row at permutation position `t` is encoded
/// with the prior-smoothed mean target of strictly earlier rows of its
/// category, `(sum + a P) / (count + a)`. Output is indexed by row.
pub fn target_statistic(
    codes: &[f64],
    targets: &[f64],
    permutation: &[usize],
    prior_weight: f64,
    prior: f64,
) -> Result<Vec<f64>> {
    let n = codes.len();
    if targets.len() != n || permutation.len() != n {
        return Err(Error::Structural("codes, targets and permutation differ in length".into()));
    }
    if !(prior_weight > 0.0) {
        return Err(param(format!("prior weight must be positive, got {prior_weight}")));
    }
    let mut seen = vec![false; n];
    for &p in permutation {
        if p >= n || std::mem::replace(&mut seen[p], true) {
            return Err(Error::Contract("permutation is not a bijection on the rows".into()));
        }
    }
    let mut acc: HashMap<u64, (f64, usize)> = HashMap::new();
    let mut out = vec![0.0; n];
    for &row in permutation {
        let e = acc.entry(category_key(codes[row])).or_insert((0.0, 0));
        out[row] = (e.0 + prior_weight * prior) / (e.1 as f64 + prior_weight);
        e.0 += targets[row];
        e.1 += 1;
    }
    Ok(out)
}

fn mse(pred: &[f64], y: &[f64]) -> f64 {
    pred.iter().zip(y).map(|(p, t)| (p - t) * (p - t)).sum::<f64>() / y.len() as f64
}

pub const MIN_META_ROWS: usize = 20;

pub fn meta_gbt_fit(
    features: &Matrix,
    targets: &[f64],
    config: &MetaGbtConfig,
    rng: &mut RngHandle,
) -> Result<MetaGbtModel> {
    check_xy(features, targets)?;
    let n = features.rows();
    if n < MIN_META_ROWS {
        return Err(param(format!(
            "meta learner needs >= {MIN_META_ROWS} rows for its validation holdout, got {n}"
        )));
    }
    if !(config.validation_fraction > 0.0 && config.validation_fraction < 1.0) {
        return Err(param("validation_fraction must be in (0, 1)"));
    }
    if let Some(&c) = config.categorical.iter().find(|&&c| c >= features.cols()) {
        return Err(param(format!("categorical column {c} out of range")));
    }
    let perm = rng.permutation(n);
    let cut = ((1.0 - config.validation_fraction) * n as f64).floor() as usize;
    let cut = cut.clamp(1, n - 1);
    let (fit_rows, val_rows) = perm.split_at(cut);
    let mut fit_x = features.select_rows(fit_rows);
    let fit_y: Vec<f64> = fit_rows.iter().map(|&r| targets[r]).collect();
    let mut val_x = features.select_rows(val_rows);
    let val_y: Vec<f64> = val_rows.iter().map(|&r| targets[r]).collect();

    let mut encodings = Vec::new();
    if !config.categorical.is_empty() {
        let prior = fit_y.iter().sum::<f64>() / fit_y.len() as f64;
        let order = rng.permutation(fit_y.len());
        for &c in &config.categorical {
            let codes: Vec<f64> = fit_x.row_iter().map(|r| r[c]).collect();
            let ts = target_statistic(&codes, &fit_y, &order, config.ts_prior_weight, prior)?;
            let mut table: HashMap<u64, (f64, usize)> = HashMap::new();
            for (code, y) in codes.iter().zip(&fit_y) {
                let e = table.entry(category_key(*code)).or_insert((0.0, 0));
                e.0 += y;
                e.1 += 1;
            }
            let mut table: Vec<(u64, f64, usize)> = table.into_iter().map(|(k, (s, c))| (k, s, c)).collect();
            table.sort_by_key(|e| e.0);
            let enc = CategoryEncoding {
                column: c,
                prior,
                prior_weight: config.ts_prior_weight,
                table,
            };
            for (r, v) in ts.into_iter().enumerate() {
                fit_x[(r, c)] = v;
            }
            for r in 0..val_x.rows() {
                val_x[(r, c)] = enc.encode(val_x[(r, c)]);
            }
            encodings.push(enc);
        }
    }

    let candidates: Vec<usize> = (0..features.cols()).filter(|c| !config.categorical.contains(c)).collect();
    let baseline_column = match config.baseline {
        MetaBaseline::BestColumn if !candidates.is_empty() => {
            let err = |c: usize| fit_x.row_iter().zip(&fit_y).map(|(r, y)| (r[c] - y) * (r[c] - y)).sum::<f64>();
            let errs: Vec<f64> = candidates.iter().map(|&c| err(c)).collect();
            let i = (0..errs.len()).fold(0, |b, i| if errs[i] < errs[b] { i } else { b });
            errs[i].is_finite().then_some(candidates[i])
        }
        _ => None,
    };
    let base_score = if baseline_column.is_some() { 0.0 } else { target_mean(&fit_y) };
    let start = |x: &Matrix| -> Vec<f64> {
        match baseline_column {
            Some(c) => x.row_iter().map(|r| r[c]).collect(),
            None => vec![base_score; x.rows()],
        }
    };
    let params = TreeParams {
        max_depth: config.max_depth,
        lambda: config.lambda,
        gamma: config.gamma,
        min_child_weight: config.min_child_weight,
        features_per_node: FeatureSampling::All.resolve(features.cols()),
    };
    let mut booster = Booster::new(&fit_x, params, base_score);
    booster.pred = start(&fit_x);
    let mut val_pred = start(&val_x);
    let mut trees = Vec::new();
    let mut curve = Vec::new();
    // a column baseline competes as round 0
    let mut best = match baseline_column {
        Some(_) => (mse(&val_pred, &val_y), 0usize),
        None => (f64::INFINITY, 0usize),
    };
    let tree_rng = rng.derive(&[0x7EE5]);
    for m in 1..=config.max_estimators {
        let tree = booster.step(&fit_y, config.learning_rate, &mut tree_rng.derive(&[m as u64]));
        for (p, row) in val_pred.iter_mut().zip(val_x.row_iter()) {
            *p += config.learning_rate * tree.predict_row(row);
        }
        trees.push(tree);
        let loss = mse(&val_pred, &val_y);
        if !loss.is_finite() {
            return Err(Error::Divergence(format!("meta learner validation loss {loss} at round {m}")));
        }
        curve.push(loss);
        if loss < best.0 {
            best = (loss, m);
        }
        if m - best.1 >= config.patience {
            break;
        }
    }
    trees.truncate(best.1);
    Ok(MetaGbtModel {
        config: config.clone(),
        seed: rng.seed(),
        width: features.cols(),
        base_score,
        baseline_column,
        trees,
        validation_curve: curve,
        best_iteration: best.1,
        encodings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_occurrence_gets_prior() {
        let ts = target_statistic(&[1.0, 2.0, 1.0], &[1.0, 0.0, 0.0], &[0, 1, 2], 1.0, 0.5).unwrap();
        assert_eq!(ts[0], 0.5);
        assert_eq!(ts[1], 0.5);
        assert_eq!(ts[2], 0.75);
    }

    #[test]
    fn ts_respects_permutation_order() {
        // rows (A,1),(A,0) visited in reverse: row 0 now sees row 1
        let ts = target_statistic(&[7.0, 7.0], &[1.0, 0.0], &[1, 0], 1.0, 0.5).unwrap();
        assert_eq!(ts[1], 0.5);
        assert_eq!(ts[0], 0.25);
    }

    #[test]
    fn huge_prior_weight_pins_to_prior() {
        let ts = target_statistic(&[1.0; 5], &[9.0; 5], &[0, 1, 2, 3, 4], 1e12, 0.3).unwrap();
        assert!(ts.iter().all(|v| (v - 0.3).abs() < 1e-9));
    }

    #[test]
    fn non_bijective_permutation_rejected() {
        let r = target_statistic(&[1.0, 2.0], &[0.0, 1.0], &[0, 0], 1.0, 0.0);
        assert!(matches!(r, Err(Error::Contract(_))));
        assert!(target_statistic(&[1.0], &[0.0], &[0], 0.0, 0.0).is_err());
    }

    fn linear(n: usize, seed: u64) -> (Matrix, Vec<f64>) {
        let mut rng = RngHandle::new(seed);
        let rows: Vec<Vec<f64>> = (0..n).map(|_| (0..3).map(|_| rng.uniform()).collect()).collect();
        let y = rows.iter().map(|r| r[0] + 2.0 * r[1] - r[2]).collect();
        (Matrix::from_rows(&rows).unwrap(), y)
    }

    #[test]
    fn early_stopping_retains_best_round() {
        let (x, y) = linear(200, 1);
        let m = meta_gbt_fit(&x, &y, &MetaGbtConfig::default(), &mut RngHandle::new(2)).unwrap();
        assert!(m.validation_curve.len() < 600, "ran {} rounds", m.validation_curve.len());
        let min = m.validation_curve.iter().cloned().fold(f64::INFINITY, f64::min);
        assert_eq!(m.validation_curve[m.best_iteration - 1], min);
        assert_eq!(m.trees.len(), m.best_iteration);
        assert_eq!(m.validation_curve.len(), m.best_iteration + 50);
    }

    #[test]
    fn zero_patience_keeps_first_tree() {
        let (x, y) = linear(100, 3);
        let cfg = MetaGbtConfig { patience: 0, ..Default::default() };
        let m = meta_gbt_fit(&x, &y, &cfg, &mut RngHandle::new(2)).unwrap();
        assert_eq!(m.trees.len(), 1);
        assert_eq!(m.validation_curve.len(), 1);
    }

    #[test]
    fn deterministic_stopping() {
        let (x, y) = linear(200, 4);
        let a = meta_gbt_fit(&x, &y, &MetaGbtConfig::default(), &mut RngHandle::new(9)).unwrap();
        let b = meta_gbt_fit(&x, &y, &MetaGbtConfig::default(), &mut RngHandle::new(9)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn exact_column_needs_no_trees() {
        let (x, _) = linear(100, 6);
        let y: Vec<f64> = x.row_iter().map(|r| r[1]).collect();
        let m = meta_gbt_fit(&x, &y, &MetaGbtConfig::default(), &mut RngHandle::new(3)).unwrap();
        assert_eq!(m.baseline_column, Some(1));
        assert!(m.trees.is_empty());
        assert_eq!(m.predict_row(&[0.1, 0.7, 0.3]), 0.7);
        let mean = MetaGbtConfig { baseline: MetaBaseline::Mean, ..Default::default() };
        let m = meta_gbt_fit(&x, &y, &mean, &mut RngHandle::new(3)).unwrap();
        assert_eq!(m.baseline_column, None);
        assert!(!m.trees.is_empty());
    }

    #[test]
    fn too_few_rows() {
        let (x, y) = linear(19, 4);
        assert!(meta_gbt_fit(&x, &y, &MetaGbtConfig::default(), &mut RngHandle::new(9)).is_err());
    }

    #[test]
    fn categorical_column_is_encoded() {
        let mut rng = RngHandle::new(5);
        let rows: Vec<Vec<f64>> = (0..400).map(|_| vec![rng.below(4) as f64, rng.uniform()]).collect();
        let y: Vec<f64> = rows.iter().map(|r| [0.0, 1.0, 5.0, 2.0][r[0] as usize] + 0.1 * r[1]).collect();
        let x = Matrix::from_rows(&rows).unwrap();
        let cfg = MetaGbtConfig { categorical: vec![0], ..Default::default() };
        let m = meta_gbt_fit(&x, &y, &cfg, &mut RngHandle::new(1)).unwrap();
        assert_eq!(m.encodings.len(), 1);
        let err = (m.predict_row(&[2.0, 0.5]) - 5.05).abs();
        assert!(err < 0.2, "{err}");
    }
}
