//! Extremely randomized trees: every tree sees all training rows, and each
//! candidate feature gets one uniformly random cut inside the node's range.

use serde::{Deserialize, Serialize};

use super::gbt::check_xy;
use super::tree::{sample_usable_features, Columns, FeatureSampling, Tree, TreeNode};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::rng::RngHandle;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExtraTreesConfig {
    pub n_estimators: usize,
    pub max_depth: usize,
    pub max_features: FeatureSampling,
    pub min_samples_split: usize,
    pub seed: u64,
}

impl Default for ExtraTreesConfig {
    fn default() -> Self {
        Self {
            n_estimators: 300,
            max_depth: 15,
            max_features: FeatureSampling::Sqrt,
            min_samples_split: 2,
            seed: 42,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtraTreesModel {
    pub config: ExtraTreesConfig,
    pub width: usize,
    pub features_per_node: usize,
    pub tree_seeds: Vec<u64>,
    pub trees: Vec<Tree>,
}

impl ExtraTreesModel {
    pub fn predict_row(&self, x: &[f64]) -> f64 {
        let s: f64 = self.trees.iter().map(|t| t.predict_row(x)).sum();
        s / self.trees.len() as f64
    }
}

fn population_variance(v: &[f64]) -> f64 {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n
}

/// `Var(t) - (n_L/n) Var(t_L) - (n_R/n) Var(t_R)` with population variances.
pub fn variance_reduction(targets: &[f64], left_mask: &[bool]) -> Result<f64> {
    if targets.len() != left_mask.len() {
        return Err(Error::Structural(format!(
            "{} targets but {} mask entries",
            targets.len(),
            left_mask.len()
        )));
    }
    let (left, right): (Vec<(f64, bool)>, Vec<(f64, bool)>) = targets
        .iter()
        .copied()
        .zip(left_mask.iter().copied())
        .partition(|(_, l)| *l);
    if left.is_empty() || right.is_empty() {
        return Err(Error::Contract("variance reduction needs two nonempty children".into()));
    }
    let left: Vec<f64> = left.into_iter().map(|(t, _)| t).collect();
    let right: Vec<f64> = right.into_iter().map(|(t, _)| t).collect();
    let n = targets.len() as f64;
    Ok(population_variance(targets)
        - left.len() as f64 / n * population_variance(&left)
        - right.len() as f64 / n * population_variance(&right))
}

struct Pending {
    node: usize,
    start: usize,
    end: usize,
    depth: usize,
}

fn grow_tree(
    cols: &Columns,
    targets: &[f64],
    config: &ExtraTreesConfig,
    features_per_node: usize,
    rng: &mut RngHandle,
) -> Tree {
    let mut rows: Vec<usize> = (0..cols.rows).collect();
    let mut nodes = vec![TreeNode::Leaf { value: 0.0 }];
    let mut queue = std::collections::VecDeque::new();
    queue.push_back(Pending {
        node: 0,
        start: 0,
        end: rows.len(),
        depth: 0,
    });
    let mut scratch = Vec::new();
    while let Some(p) = queue.pop_front() {
        let idx = &rows[p.start..p.end];
        let n = idx.len();
        let sum: f64 = idx.iter().map(|&r| targets[r]).sum();
        let mean = sum / n as f64;
        let pure = idx.iter().all(|&r| targets[r] == targets[idx[0]]);
        if n < config.min_samples_split.max(2) || p.depth >= config.max_depth || pure {
            nodes[p.node] = TreeNode::Leaf { value: mean };
            continue;
        }
        let mut ranges = Vec::new();
        let features = sample_usable_features(cols.width, features_per_node, rng, |f| {
            let col = cols.col(f);
            let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
            for &r in idx {
                lo = lo.min(col[r]);
                hi = hi.max(col[r]);
            }
            let ok = hi > lo;
            if ok {
                ranges.push((f, lo, hi));
            }
            ok
        });
        debug_assert_eq!(features.len(), ranges.len());
        let mut best: Option<(f64, usize, f64)> = None;
        ranges.sort_by_key(|r| r.0);
        let draws: Vec<(usize, f64)> = ranges
            .iter()
            .map(|&(f, lo, hi)| {
                let mut t = hi - rng.uniform() * (hi - lo);
                if t <= lo {
                    t = hi;
                }
                (f, t)
            })
            .collect();
        for &(f, t) in &draws {
            let col = cols.col(f);
            let (mut nl, mut sl) = (0usize, 0.0);
            for &r in idx {
                if col[r] < t {
                    nl += 1;
                    sl += targets[r];
                }
            }
            let nr = n - nl;
            if nl == 0 || nr == 0 {
                continue;
            }
            let ml = sl / nl as f64;
            let mr = (sum - sl) / nr as f64;
            // equals the variance reduction of the split
            let score = (nl as f64 * nr as f64) / (n as f64 * n as f64) * (ml - mr) * (ml - mr);
            if best.is_none_or(|b| score > b.0) {
                best = Some((score, f, t));
            }
        }
        let Some((_, feature, threshold)) = best else {
            nodes[p.node] = TreeNode::Leaf { value: mean };
            continue;
        };
        let col = cols.col(feature);
        scratch.clear();
        scratch.extend(rows[p.start..p.end].iter().copied().filter(|&r| col[r] >= threshold));
        let mut w = p.start;
        for i in p.start..p.end {
            let r = rows[i];
            if col[r] < threshold {
                rows[w] = r;
                w += 1;
            }
        }
        rows[w..p.end].copy_from_slice(&scratch);
        let left = nodes.len();
        nodes.push(TreeNode::Leaf { value: 0.0 });
        nodes.push(TreeNode::Leaf { value: 0.0 });
        nodes[p.node] = TreeNode::Split {
            feature,
            threshold,
            left,
            right: left + 1,
        };
        queue.push_back(Pending {
            node: left,
            start: p.start,
            end: w,
            depth: p.depth + 1,
        });
        queue.push_back(Pending {
            node: left + 1,
            start: w,
            end: p.end,
            depth: p.depth + 1,
        });
    }
    Tree { nodes }
}

pub fn extratrees_fit(
    features: &Matrix,
    targets: &[f64],
    config: &ExtraTreesConfig,
) -> Result<ExtraTreesModel> {
    check_xy(features, targets)?;
    if config.n_estimators == 0 {
        return Err(crate::error::param("extra-trees needs at least one tree"));
    }
    let cols = Columns::new(features);
    let features_per_node = config.max_features.resolve(features.cols());
    let root = RngHandle::new(config.seed);
    let mut trees = Vec::with_capacity(config.n_estimators);
    let mut tree_seeds = Vec::with_capacity(config.n_estimators);
    for k in 0..config.n_estimators {
        let mut rng = root.derive(&[k as u64]);
        tree_seeds.push(rng.seed());
        trees.push(grow_tree(&cols, targets, config, features_per_node, &mut rng));
    }
    Ok(ExtraTreesModel {
        config: config.clone(),
        width: features.cols(),
        features_per_node,
        tree_seeds,
        trees,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn variance_reduction_examples() {
        let t = [0.0, 0.0, 1.0, 1.0];
        let v = variance_reduction(&t, &[true, true, false, false]).unwrap();
        assert!((v - 0.25).abs() < 1e-15);
        let t = [0.0, 1.0, 2.0, 3.0];
        let v = variance_reduction(&t, &[true, true, false, false]).unwrap();
        assert!((v - 1.0).abs() < 1e-15);
        let c = [4.0; 5];
        assert_eq!(variance_reduction(&c, &[true, false, true, false, false]).unwrap(), 0.0);
        assert!(matches!(
            variance_reduction(&t, &[true; 4]),
            Err(Error::Contract(_))
        ));
    }

    fn smooth(n: usize, seed: u64) -> (Matrix, Vec<f64>) {
        let mut rng = RngHandle::new(seed);
        let xs: Vec<f64> = (0..n).map(|_| rng.uniform() * 2.0 - 1.0).collect();
        let ys = xs.iter().map(|x| (3.0 * x).sin()).collect();
        (Matrix::from_vec(n, 1, xs).unwrap(), ys)
    }

    #[test]
    fn depth_zero_predicts_global_mean() {
        let (x, y) = smooth(50, 1);
        let cfg = ExtraTreesConfig { max_depth: 0, n_estimators: 5, ..Default::default() };
        let m = extratrees_fit(&x, &y, &cfg).unwrap();
        let mean = y.iter().sum::<f64>() / 50.0;
        assert!((m.predict_row(&[0.3]) - mean).abs() < 1e-15);
    }

    #[test]
    fn constant_column_never_split() {
        let mut rng = RngHandle::new(2);
        let rows: Vec<Vec<f64>> = (0..100).map(|_| vec![5.0, rng.normal()]).collect();
        let y: Vec<f64> = rows.iter().map(|r| r[1].powi(2)).collect();
        let x = Matrix::from_rows(&rows).unwrap();
        let cfg = ExtraTreesConfig { n_estimators: 10, max_features: FeatureSampling::Count(1), ..Default::default() };
        let m = extratrees_fit(&x, &y, &cfg).unwrap();
        for t in &m.trees {
            for n in &t.nodes {
                if let TreeNode::Split { feature, .. } = n {
                    assert_eq!(*feature, 1);
                }
            }
        }
    }

    #[test]
    fn smooth_target_r2() {
        let (x, y) = smooth(500, 3);
        let m = extratrees_fit(&x, &y, &ExtraTreesConfig::default()).unwrap();
        let (xt, yt) = smooth(300, 4);
        let mean = yt.iter().sum::<f64>() / 300.0;
        let ss_res: f64 = xt.row_iter().zip(&yt).map(|(r, t)| (m.predict_row(r) - t).powi(2)).sum();
        let ss_tot: f64 = yt.iter().map(|t| (t - mean).powi(2)).sum();
        let r2 = 1.0 - ss_res / ss_tot;
        assert!(r2 >= 0.95, "{r2}");
    }

    #[test]
    fn unbounded_depth_interpolates_training_rows() {
        let mut rng = RngHandle::new(5);
        let rows: Vec<Vec<f64>> = (0..80).map(|_| vec![rng.normal(), rng.normal()]).collect();
        let y: Vec<f64> = (0..80).map(|_| rng.normal()).collect();
        let x = Matrix::from_rows(&rows).unwrap();
        let cfg = ExtraTreesConfig {
            n_estimators: 7,
            max_depth: 10_000,
            max_features: FeatureSampling::All,
            ..Default::default()
        };
        let m = extratrees_fit(&x, &y, &cfg).unwrap();
        for (r, t) in x.row_iter().zip(&y) {
            assert!((m.predict_row(r) - t).abs() < 1e-12);
        }
    }

    #[test]
    fn prediction_is_mean_of_trees() {
        let (x, y) = smooth(60, 6);
        let m = extratrees_fit(&x, &y, &ExtraTreesConfig { n_estimators: 9, ..Default::default() }).unwrap();
        let row = [0.25];
        let manual: f64 = m.trees.iter().map(|t| t.predict_row(&row)).sum::<f64>() / 9.0;
        assert_eq!(m.predict_row(&row), manual);
    }
}
