//! Binary regression trees shared by the boosted and randomized ensembles.
//!
//! A row goes to the left child when `x[feature] < threshold`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::RngHandle;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TreeNode {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        value: f64,
    },
}

/// Nodes in breadth-first creation order; the root is node 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<TreeNode>,
}

impl Tree {
    pub fn leaf(value: f64) -> Self {
        Tree {
            nodes: vec![TreeNode::Leaf { value }],
        }
    }

    pub fn predict_row(&self, x: &[f64]) -> f64 {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                TreeNode::Leaf { value } => return *value,
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => i = if x[*feature] < *threshold { *left } else { *right },
            }
        }
    }

    pub fn leaf_count(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n, TreeNode::Leaf { .. }))
            .count()
    }

    pub fn depth(&self) -> usize {
        let mut depth = vec![0usize; self.nodes.len()];
        let mut max = 0;
        for (i, n) in self.nodes.iter().enumerate() {
            if let TreeNode::Split { left, right, .. } = n {
                depth[*left] = depth[i] + 1;
                depth[*right] = depth[i] + 1;
                max = max.max(depth[i] + 1);
            }
        }
        max
    }

    /// Structural checks used when loading a serialized tree.
    pub fn validate(&self, width: usize) -> Result<()> {
        if self.nodes.is_empty() {
            return Err(Error::Integrity("tree has no nodes".into()));
        }
        for (i, n) in self.nodes.iter().enumerate() {
            match n {
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    // children are always created after their parent
                    let ok = *feature < width
                        && !threshold.is_nan()
                        && *left > i
                        && *right > i
                        && *left < self.nodes.len()
                        && *right < self.nodes.len()
                        && left != right;
                    if !ok {
                        return Err(Error::Integrity(format!("tree node {i} is malformed")));
                    }
                }
                TreeNode::Leaf { value } => {
                    if !value.is_finite() {
                        return Err(Error::Integrity(format!("tree leaf {i} is not finite")));
                    }
                }
            }
        }
        Ok(())
    }
}

/// How many features a node considers when searching for a split.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureSampling {
    /// All features up to width 256, `ceil(sqrt(width))` above.
    Auto,
    All,
    Sqrt,
    Count(usize),
}

impl FeatureSampling {
    pub fn resolve(self, width: usize) -> usize {
        let sqrt = (width as f64).sqrt().ceil() as usize;
        let k = match self {
            FeatureSampling::Auto => {
                if width <= 256 {
                    width
                } else {
                    sqrt
                }
            }
            FeatureSampling::All => width,
            FeatureSampling::Sqrt => sqrt,
            FeatureSampling::Count(k) => k,
        };
        k.clamp(1, width.max(1))
    }
}

/// Visit features in random order until `quota` have been looked at and at
/// least one of them is usable; returns the usable ones in ascending order.
///
/// A node whose candidate draws are all unusable keeps drawing, so constant
/// columns can never block a split that another feature could make.
pub(crate) fn sample_usable_features(
    width: usize,
    quota: usize,
    rng: &mut RngHandle,
    mut usable: impl FnMut(usize) -> bool,
) -> Vec<usize> {
    let mut order: Vec<usize> = (0..width).collect();
    let mut chosen = Vec::new();
    for i in 0..width {
        let j = i + rng.below(width - i);
        order.swap(i, j);
        let f = order[i];
        if usable(f) {
            chosen.push(f);
        }
        if i + 1 >= quota && !chosen.is_empty() {
            break;
        }
    }
    chosen.sort_unstable();
    chosen
}

/// Column-major view of a training matrix.
pub(crate) struct Columns {
    pub rows: usize,
    pub width: usize,
    pub data: Vec<f64>,
}

impl Columns {
    pub fn new(m: &crate::matrix::Matrix) -> Self {
        Columns {
            rows: m.rows(),
            width: m.cols(),
            data: m.to_column_major(),
        }
    }

    #[inline]
    pub fn col(&self, f: usize) -> &[f64] {
        &self.data[f * self.rows..(f + 1) * self.rows]
    }

    /// Row order of each feature, ties broken by row index.
    pub fn presort(&self) -> Vec<Vec<u32>> {
        (0..self.width)
            .map(|f| {
                let col = self.col(f);
                let mut idx: Vec<u32> = (0..self.rows as u32).collect();
                idx.sort_by(|&a, &b| col[a as usize].total_cmp(&col[b as usize]));
                idx
            })
            .collect()
    }
}

/// Threshold strictly above `lo` and at most `hi`.
#[inline]
pub(crate) fn midpoint(lo: f64, hi: f64) -> f64 {
    let m = 0.5 * (lo + hi);
    if m > lo {
        m
    } else {
        hi
    }
}
