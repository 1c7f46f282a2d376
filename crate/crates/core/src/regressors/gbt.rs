//! Second-order gradient boosting with L2 leaf regularization.
//!
//! Each tree is grown level by level with exact split enumeration. A leaf
//! holding gradient sum `G` and hessian sum `H` scores `-G / (H + lambda)`;
//! a split is taken only if its gain is positive.

use serde::{Deserialize, Serialize};

use super::tree::{midpoint, sample_usable_features, Columns, FeatureSampling, Tree, TreeNode};
use crate::error::{param, Error, Result};
use crate::matrix::Matrix;
use crate::rng::RngHandle;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GbtConfig {
    pub n_estimators: usize,
    pub learning_rate: f64,
    pub max_depth: usize,
    pub lambda: f64,
    pub gamma: f64,
    pub min_child_weight: f64,
    pub feature_sampling: FeatureSampling,
    pub seed: u64,
}

impl Default for GbtConfig {
    fn default() -> Self {
        Self {
            n_estimators: 300,
            learning_rate: 0.05,
            max_depth: 10,
            lambda: 1.0,
            gamma: 0.0,
            min_child_weight: 1.0,
            feature_sampling: FeatureSampling::Auto,
            seed: 42,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GbtModel {
    pub config: GbtConfig,
    pub width: usize,
    /// Features examined per node after resolving `feature_sampling`.
    pub features_per_node: usize,
    pub base_score: f64,
    pub trees: Vec<Tree>,
    /// Training MSE after 0, 1, ... trees.
    pub training_loss: Vec<f64>,
}

impl GbtModel {
    pub fn predict_row(&self, x: &[f64]) -> f64 {
        let lr = self.config.learning_rate;
        let mut y = self.base_score;
        for t in &self.trees {
            y += lr * t.predict_row(x);
        }
        y
    }
}

/// Split gain `1/2 [G_L^2/(H_L+l) + G_R^2/(H_R+l) - G^2/(H+l)] - gamma`.
pub fn gbt_split_gain(g: f64, h: f64, g_left: f64, h_left: f64, lambda: f64, gamma: f64) -> f64 {
    let g_right = g - g_left;
    let h_right = h - h_left;
    0.5 * (g_left * g_left / (h_left + lambda) + g_right * g_right / (h_right + lambda)
        - g * g / (h + lambda))
        - gamma
}

pub(crate) struct TreeParams {
    pub max_depth: usize,
    pub lambda: f64,
    pub gamma: f64,
    pub min_child_weight: f64,
    pub features_per_node: usize,
}

#[derive(Clone, Copy)]
struct Best {
    gain: f64,
    feature: usize,
    threshold: f64,
}

#[derive(Clone, Copy)]
struct Scan {
    g: f64,
    h: f64,
    last: f64,
    started: bool,
}

const NO_NODE: u32 = u32::MAX;

/// Grows one tree on the gradient pairs and writes each row's final leaf
/// into `leaf_of_row`.
pub(crate) struct GradientTreeBuilder<'a> {
    pub cols: &'a Columns,
    /// Present when every node examines every feature.
    pub presorted: Option<&'a [Vec<u32>]>,
    pub params: &'a TreeParams,
}

impl GradientTreeBuilder<'_> {
    pub fn build(
        &self,
        grad: &[f64],
        hess: &[f64],
        rng: &mut RngHandle,
        leaf_of_row: &mut Vec<u32>,
    ) -> Tree {
        let n = self.cols.rows;
        let p = self.params;
        let mut nodes: Vec<TreeNode> = Vec::new();
        let mut sums: Vec<(f64, f64)> = Vec::new();
        let (mut g0, mut h0) = (0.0, 0.0);
        for r in 0..n {
            g0 += grad[r];
            h0 += hess[r];
        }
        nodes.push(TreeNode::Leaf { value: 0.0 });
        sums.push((g0, h0));
        leaf_of_row.clear();
        leaf_of_row.resize(n, 0);
        let mut level: Vec<usize> = vec![0];

        for _depth in 0..p.max_depth {
            if level.is_empty() {
                break;
            }
            let best = match self.presorted {
                Some(sorted) => self.best_splits_presorted(sorted, &level, &sums, grad, hess, leaf_of_row),
                None => self.best_splits_per_node(&level, &sums, grad, hess, leaf_of_row, rng),
            };
            // slot of each node of this level that splits, plus its children
            let mut child_of: Vec<Option<(usize, usize)>> = vec![None; nodes.len()];
            let mut next = Vec::new();
            for (slot, &node) in level.iter().enumerate() {
                if let Some(b) = best[slot] {
                    let left = nodes.len();
                    nodes.push(TreeNode::Leaf { value: 0.0 });
                    nodes.push(TreeNode::Leaf { value: 0.0 });
                    sums.push((0.0, 0.0));
                    sums.push((0.0, 0.0));
                    nodes[node] = TreeNode::Split {
                        feature: b.feature,
                        threshold: b.threshold,
                        left,
                        right: left + 1,
                    };
                    child_of.resize(nodes.len(), None);
                    child_of[node] = Some((left, left + 1));
                    next.push(left);
                    next.push(left + 1);
                }
            }
            if next.is_empty() {
                break;
            }
            for r in 0..n {
                let node = leaf_of_row[r] as usize;
                if let Some((l, rt)) = child_of.get(node).copied().flatten() {
                    let TreeNode::Split { feature, threshold, .. } = nodes[node] else {
                        unreachable!("split recorded for a leaf")
                    };
                    let child = if self.cols.col(feature)[r] < threshold { l } else { rt };
                    leaf_of_row[r] = child as u32;
                    sums[child].0 += grad[r];
                    sums[child].1 += hess[r];
                }
            }
            level = next;
        }
        for (i, node) in nodes.iter_mut().enumerate() {
            if let TreeNode::Leaf { value } = node {
                let (g, h) = sums[i];
                *value = -g / (h + p.lambda);
            }
        }
        Tree { nodes }
    }

    #[inline]
    fn consider(&self, st: &Scan, v: f64, total: (f64, f64), f: usize, best: &mut Option<Best>) {
        let p = self.params;
        if st.started && v != st.last && st.h >= p.min_child_weight && total.1 - st.h >= p.min_child_weight {
            let gain = gbt_split_gain(total.0, total.1, st.g, st.h, p.lambda, p.gamma);
            if gain > best.map_or(0.0, |b| b.gain) {
                *best = Some(Best {
                    gain,
                    feature: f,
                    threshold: midpoint(st.last, v),
                });
            }
        }
    }

    fn best_splits_presorted(
        &self,
        sorted: &[Vec<u32>],
        level: &[usize],
        sums: &[(f64, f64)],
        grad: &[f64],
        hess: &[f64],
        leaf_of_row: &[u32],
    ) -> Vec<Option<Best>> {
        let max_node = level.iter().copied().max().unwrap_or(0);
        let mut slot_of = vec![NO_NODE; max_node + 1];
        for (s, &node) in level.iter().enumerate() {
            slot_of[node] = s as u32;
        }
        let mut best: Vec<Option<Best>> = vec![None; level.len()];
        let empty = Scan {
            g: 0.0,
            h: 0.0,
            last: 0.0,
            started: false,
        };
        let mut scans = vec![empty; level.len()];
        for (f, order) in sorted.iter().enumerate() {
            let col = self.cols.col(f);
            scans.iter_mut().for_each(|s| *s = empty);
            for &r in order {
                let r = r as usize;
                let node = leaf_of_row[r] as usize;
                let Some(&slot) = slot_of.get(node) else { continue };
                if slot == NO_NODE {
                    continue;
                }
                let slot = slot as usize;
                let v = col[r];
                let st = &mut scans[slot];
                self.consider(st, v, sums[level[slot]], f, &mut best[slot]);
                st.g += grad[r];
                st.h += hess[r];
                st.last = v;
                st.started = true;
            }
        }
        best
    }

    fn best_splits_per_node(
        &self,
        level: &[usize],
        sums: &[(f64, f64)],
        grad: &[f64],
        hess: &[f64],
        leaf_of_row: &[u32],
        rng: &mut RngHandle,
    ) -> Vec<Option<Best>> {
        let max_node = level.iter().copied().max().unwrap_or(0);
        let mut slot_of = vec![NO_NODE; max_node + 1];
        for (s, &node) in level.iter().enumerate() {
            slot_of[node] = s as u32;
        }
        let mut members: Vec<Vec<usize>> = vec![Vec::new(); level.len()];
        for (r, &node) in leaf_of_row.iter().enumerate() {
            if let Some(&slot) = slot_of.get(node as usize) {
                if slot != NO_NODE {
                    members[slot as usize].push(r);
                }
            }
        }
        let mut out = Vec::with_capacity(level.len());
        let mut pairs: Vec<(f64, usize)> = Vec::new();
        for (slot, rows) in members.iter().enumerate() {
            let total = sums[level[slot]];
            let features = sample_usable_features(
                self.cols.width,
                self.params.features_per_node,
                rng,
                |f| {
                    let col = self.cols.col(f);
                    let first = col[rows[0]];
                    rows.iter().any(|&r| col[r] != first)
                },
            );
            let mut best = None;
            for f in features {
                let col = self.cols.col(f);
                pairs.clear();
                pairs.extend(rows.iter().map(|&r| (col[r], r)));
                // stable: equal values stay in row order, matching the presorted scan
                pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
                let mut st = Scan {
                    g: 0.0,
                    h: 0.0,
                    last: 0.0,
                    started: false,
                };
                for &(v, r) in &pairs {
                    self.consider(&st, v, total, f, &mut best);
                    st.g += grad[r];
                    st.h += hess[r];
                    st.last = v;
                    st.started = true;
                }
            }
            out.push(best);
        }
        out
    }
}

fn mse_against(pred: &[f64], y: &[f64]) -> f64 {
    pred.iter().zip(y).map(|(p, t)| (p - t) * (p - t)).sum::<f64>() / y.len() as f64
}

/// Boosting state shared with the early-stopped meta learner.
pub(crate) struct Booster {
    pub cols: Columns,
    pub presorted: Option<Vec<Vec<u32>>>,
    pub params: TreeParams,
    pub pred: Vec<f64>,
    pub grad: Vec<f64>,
    pub hess: Vec<f64>,
    leaf_of_row: Vec<u32>,
}

impl Booster {
    pub fn new(features: &Matrix, params: TreeParams, base_score: f64) -> Self {
        let cols = Columns::new(features);
        let presorted = (params.features_per_node >= cols.width).then(|| cols.presort());
        let n = cols.rows;
        Booster {
            cols,
            presorted,
            params,
            pred: vec![base_score; n],
            grad: vec![0.0; n],
            hess: vec![1.0; n],
            leaf_of_row: Vec::with_capacity(n),
        }
    }

    /// Fit one squared-error tree to the current residuals and apply it.
    pub fn step(&mut self, targets: &[f64], learning_rate: f64, rng: &mut RngHandle) -> Tree {
        for ((g, p), y) in self.grad.iter_mut().zip(&self.pred).zip(targets) {
            *g = p - y;
        }
        let builder = GradientTreeBuilder {
            cols: &self.cols,
            presorted: self.presorted.as_deref(),
            params: &self.params,
        };
        let tree = builder.build(&self.grad, &self.hess, rng, &mut self.leaf_of_row);
        for (p, &leaf) in self.pred.iter_mut().zip(&self.leaf_of_row) {
            if let TreeNode::Leaf { value } = tree.nodes[leaf as usize] {
                *p += learning_rate * value;
            }
        }
        tree
    }
}

/// Arithmetic mean that returns the common value exactly for constant input.
pub(crate) fn target_mean(y: &[f64]) -> f64 {
    if y.iter().all(|v| *v == y[0]) {
        return y[0];
    }
    y.iter().sum::<f64>() / y.len() as f64
}

pub(crate) fn check_xy(features: &Matrix, targets: &[f64]) -> Result<()> {
    if features.rows() != targets.len() {
        return Err(Error::Structural(format!(
            "{} rows but {} targets",
            features.rows(),
            targets.len()
        )));
    }
    if features.rows() == 0 {
        return Err(param("cannot fit on an empty training set"));
    }
    Ok(())
}

pub fn gbt_fit(features: &Matrix, targets: &[f64], config: &GbtConfig) -> Result<GbtModel> {
    check_xy(features, targets)?;
    if !(config.learning_rate > 0.0) || config.lambda < 0.0 {
        return Err(param("GBT needs learning_rate > 0 and lambda >= 0"));
    }
    let width = features.cols();
    let features_per_node = config.feature_sampling.resolve(width);
    let base_score = target_mean(targets);
    let params = TreeParams {
        max_depth: config.max_depth,
        lambda: config.lambda,
        gamma: config.gamma,
        min_child_weight: config.min_child_weight,
        features_per_node,
    };
    let mut booster = Booster::new(features, params, base_score);
    let initial = mse_against(&booster.pred, targets);
    let mut training_loss = vec![initial];
    let mut trees = Vec::with_capacity(config.n_estimators);
    let root = RngHandle::new(config.seed);
    for k in 0..config.n_estimators {
        let mut rng = root.derive(&[k as u64]);
        trees.push(booster.step(targets, config.learning_rate, &mut rng));
        let loss = mse_against(&booster.pred, targets);
        if !loss.is_finite() || loss > 10.0 * initial.max(f64::MIN_POSITIVE) {
            return Err(Error::Divergence(format!(
                "GBT training loss {loss} after tree {k} exceeds 10x the initial {initial}"
            )));
        }
        training_loss.push(loss);
    }
    Ok(GbtModel {
        config: config.clone(),
        width,
        features_per_node,
        base_score,
        trees,
        training_loss,
    })
}
