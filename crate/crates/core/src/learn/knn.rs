use serde::{Deserialize, Serialize};

use super::cv::TrainSet;
use super::grid::GridSpec;
use super::kernel::sqdist;
use super::persist::ModelState;
use super::{Algorithm, Classifier, Hyperparams};
use crate::error::{Error, Result};

/// Stored training set of a k-nearest-neighbour classifier.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KnnModel {
    pub k: usize,
    pub n_classes: usize,
    pub rows: Vec<Vec<f64>>,
    pub labels: Vec<usize>,
}

impl KnnModel {
    pub fn fit(train: &TrainSet, k: usize) -> Result<Self> {
        check_k(k, train.len())?;
        Ok(Self {
            k,
            n_classes: train.n_classes(),
            rows: train.rows().to_vec(),
            labels: train.labels().to_vec(),
        })
    }
}

fn check_k(k: usize, n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::Training(
            "k-NN needs a non-empty training set".into(),
        ));
    }
    if k == 0 || k > n {
        return Err(Error::Training(format!(
            "k = {k} is outside 1..={n} training examples"
        )));
    }
    Ok(())
}

/// Majority vote among the `k` nearest rows (Euclidean).
///
/// Equal distances keep training order. A tied vote goes to the label with
/// the smallest mean distance among its neighbours, then to the lower label.
pub fn knn_predict(
    k: usize,
    rows: &[Vec<f64>],
    labels: &[usize],
    n_classes: usize,
    x: &[f64],
) -> Result<usize> {
    check_k(k, rows.len())?;
    if rows[0].len() != x.len() {
        return Err(Error::domain(format!(
            "expected {} features, got {}",
            rows[0].len(),
            x.len()
        )));
    }
    let mut order: Vec<(f64, usize)> = rows
        .iter()
        .enumerate()
        .map(|(i, r)| (sqdist(r, x), i))
        .collect();
    order.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut votes = vec![0usize; n_classes];
    let mut dist_sum = vec![0.0; n_classes];
    for &(d2, i) in &order[..k] {
        votes[labels[i]] += 1;
        dist_sum[labels[i]] += d2.sqrt();
    }
    let mut best = 0;
    for c in 1..n_classes {
        let better = votes[c] > votes[best]
            || (votes[c] == votes[best]
                && votes[c] > 0
                && dist_sum[c] / (votes[c] as f64) < dist_sum[best] / (votes[best] as f64));
        if better {
            best = c;
        }
    }
    Ok(best)
}

impl Classifier for KnnModel {
    fn predict(&self, x: &[f64]) -> Result<usize> {
        knn_predict(self.k, &self.rows, &self.labels, self.n_classes, x)
    }

    fn state(&self) -> ModelState {
        ModelState::Knn(self.clone())
    }
}

pub struct KnnAlgorithm;

impl Algorithm for KnnAlgorithm {
    fn name(&self) -> &str {
        "knn"
    }

    fn candidates(&self, grid: &GridSpec, _n_features: usize) -> Vec<Hyperparams> {
        grid.k.iter().map(|&k| Hyperparams::Knn { k }).collect()
    }

    fn fit(&self, train: &TrainSet, params: &Hyperparams) -> Result<Box<dyn Classifier>> {
        match params {
            Hyperparams::Knn { k } => Ok(Box::new(KnnModel::fit(train, *k)?)),
            other => Err(Error::config(format!("k-NN cannot use {other:?}"))),
        }
    }
}
