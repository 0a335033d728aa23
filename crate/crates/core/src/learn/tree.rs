use serde::{Deserialize, Serialize};

use super::cv::TrainSet;
use super::grid::{Depth, GridSpec};
use super::persist::ModelState;
use super::{majority, Algorithm, Classifier, Hyperparams};
use crate::error::{Error, Result};

/// Smallest impurity decrease that justifies a split.
const MIN_GAIN: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeParams {
    /// `None` grows until the leaves are pure or too small.
    pub max_depth: Option<usize>,
    pub min_leaf: usize,
}

impl Default for TreeParams {
    fn default() -> Self {
        Self {
            max_depth: None,
            min_leaf: 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "snake_case")]
pub enum TreeNode {
    Leaf {
        label: usize,
        counts: Vec<usize>,
    },
    /// `x[feature] <= threshold` goes left.
    Split {
        feature: usize,
        threshold: f64,
        left: Box<TreeNode>,
        right: Box<TreeNode>,
    },
}

/// Binary CART classifier with Gini impurity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    pub params: TreeParams,
    pub n_features: usize,
    pub root: TreeNode,
}

struct Builder<'a> {
    rows: &'a [Vec<f64>],
    labels: &'a [usize],
    n_classes: usize,
    params: TreeParams,
}

impl Builder<'_> {
    fn counts(&self, idx: &[usize]) -> Vec<usize> {
        let mut c = vec![0; self.n_classes];
        for &i in idx {
            c[self.labels[i]] += 1;
        }
        c
    }

    /// Best split as (feature, threshold); the first maximum in feature
    /// order, then ascending threshold.
    fn best_split(&self, idx: &[usize], counts: &[usize]) -> Option<(usize, f64)> {
        let n = idx.len();
        let nf = n as f64;
        let sq = |c: &[usize]| c.iter().map(|&v| (v * v) as f64).sum::<f64>();
        // Gini gain is (S_l/n_l + S_r/n_r)/n - S/n^2 with S the summed
        // squared class counts of a node.
        let parent = sq(counts) / (nf * nf);
        let min_leaf = self.params.min_leaf.max(1);
        let mut best: Option<(usize, f64)> = None;
        let mut best_gain = MIN_GAIN;
        let mut column: Vec<(f64, usize)> = Vec::with_capacity(n);
        let mut left = vec![0usize; self.n_classes];
        let mut right = vec![0usize; self.n_classes];
        for f in 0..self.rows[idx[0]].len() {
            column.clear();
            column.extend(idx.iter().map(|&i| (self.rows[i][f], self.labels[i])));
            column.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));
            left.iter_mut().for_each(|c| *c = 0);
            right.copy_from_slice(counts);
            let (mut sq_left, mut sq_right) =
                (0usize, counts.iter().map(|&c| c * c).sum::<usize>());
            for s in 0..n - 1 {
                let c = column[s].1;
                sq_left += 2 * left[c] + 1;
                sq_right -= 2 * right[c] - 1;
                left[c] += 1;
                right[c] -= 1;
                let (lo, hi) = (column[s].0, column[s + 1].0);
                let n_left = s + 1;
                if lo == hi || n_left < min_leaf || n - n_left < min_leaf {
                    continue;
                }
                let gain = (sq_left as f64 / n_left as f64 + sq_right as f64 / (n - n_left) as f64)
                    / nf
                    - parent;
                if gain > best_gain {
                    best_gain = gain;
                    let mid = (lo + hi) / 2.0;
                    best = Some((f, if mid < hi { mid } else { lo }));
                }
            }
        }
        best
    }

    fn grow(&self, idx: &[usize], depth: usize) -> TreeNode {
        let counts = self.counts(idx);
        let leaf = |counts: Vec<usize>| TreeNode::Leaf {
            label: majority(&counts),
            counts,
        };
        let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
        if pure || self.params.max_depth.is_some_and(|d| depth >= d) {
            return leaf(counts);
        }
        let Some((feature, threshold)) = self.best_split(idx, &counts) else {
            return leaf(counts);
        };
        let (l, r): (Vec<usize>, Vec<usize>) = idx
            .iter()
            .partition(|&&i| self.rows[i][feature] <= threshold);
        TreeNode::Split {
            feature,
            threshold,
            left: Box::new(self.grow(&l, depth + 1)),
            right: Box::new(self.grow(&r, depth + 1)),
        }
    }
}

impl DecisionTree {
    pub fn fit(
        rows: &[Vec<f64>],
        labels: &[usize],
        n_classes: usize,
        params: TreeParams,
    ) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::Training(
                "decision tree needs a non-empty training set".into(),
            ));
        }
        if rows.len() != labels.len() {
            return Err(Error::domain("rows and labels differ in length"));
        }
        let n_features = rows[0].len();
        let builder = Builder {
            rows,
            labels,
            n_classes,
            params,
        };
        let idx: Vec<usize> = (0..rows.len()).collect();
        Ok(Self {
            params,
            n_features,
            root: builder.grow(&idx, 0),
        })
    }

    pub fn depth(&self) -> usize {
        fn walk(n: &TreeNode) -> usize {
            match n {
                TreeNode::Leaf { .. } => 0,
                TreeNode::Split { left, right, .. } => 1 + walk(left).max(walk(right)),
            }
        }
        walk(&self.root)
    }
}

impl Classifier for DecisionTree {
    fn predict(&self, x: &[f64]) -> Result<usize> {
        if x.len() != self.n_features {
            return Err(Error::domain(format!(
                "expected {} features, got {}",
                self.n_features,
                x.len()
            )));
        }
        let mut node = &self.root;
        loop {
            match node {
                TreeNode::Leaf { label, .. } => return Ok(*label),
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    node = if x[*feature] <= *threshold {
                        left
                    } else {
                        right
                    }
                }
            }
        }
    }

    fn state(&self) -> ModelState {
        ModelState::Tree(self.clone())
    }
}

pub struct TreeAlgorithm;

impl Algorithm for TreeAlgorithm {
    fn name(&self) -> &str {
        "dt"
    }

    fn candidates(&self, grid: &GridSpec, _n_features: usize) -> Vec<Hyperparams> {
        let mut out = Vec::new();
        for d in &grid.max_depth {
            for &min_leaf in &grid.min_leaf {
                let max_depth = match d {
                    Depth::Limit(n) => Some(*n),
                    Depth::Unlimited => None,
                };
                out.push(Hyperparams::Tree(TreeParams {
                    max_depth,
                    min_leaf,
                }));
            }
        }
        out
    }

    fn fit(&self, train: &TrainSet, params: &Hyperparams) -> Result<Box<dyn Classifier>> {
        match params {
            Hyperparams::Tree(p) => Ok(Box::new(DecisionTree::fit(
                train.rows(),
                train.labels(),
                train.n_classes(),
                *p,
            )?)),
            other => Err(Error::config(format!("decision tree cannot use {other:?}"))),
        }
    }
}
