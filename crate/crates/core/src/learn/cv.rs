use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use rayon::prelude::*;

use super::kernel::{dot, sqdist, KernelKind, KernelSpec};
use super::standardize::Standardizer;
use super::{Algorithm, Classifier, Hyperparams};
use crate::error::{Error, Result};

type KernelKey = (KernelKind, u64, u32, u64);

/// Standardized training rows plus lazily built pairwise caches.
///
/// The standardizer is fitted on exactly the rows handed to [`TrainSet::new`],
/// so inside a fold the held-out example never influences it.
pub struct TrainSet {
    rows: Vec<Vec<f64>>,
    labels: Vec<usize>,
    n_classes: usize,
    standardizer: Standardizer,
    dots: OnceLock<Vec<f64>>,
    sqdists: OnceLock<Vec<f64>>,
    kernels: Mutex<HashMap<KernelKey, Arc<Vec<f64>>>>,
}

impl TrainSet {
    pub fn new<'a, I>(raw: I, labels: &[usize], n_classes: usize) -> Result<Self>
    where
        I: IntoIterator<Item = &'a [f64]>,
        I::IntoIter: Clone,
    {
        let raw = raw.into_iter();
        let standardizer = Standardizer::fit(raw.clone())?;
        let rows = raw
            .map(|r| standardizer.transform(r))
            .collect::<Result<Vec<_>>>()?;
        if rows.len() != labels.len() {
            return Err(Error::domain("rows and labels differ in length"));
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= n_classes) {
            return Err(Error::domain(format!(
                "label index {bad} out of range for {n_classes} classes"
            )));
        }
        Ok(Self {
            rows,
            labels: labels.to_vec(),
            n_classes,
            standardizer,
            dots: OnceLock::new(),
            sqdists: OnceLock::new(),
            kernels: Mutex::new(HashMap::new()),
        })
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn standardizer(&self) -> &Standardizer {
        &self.standardizer
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.standardizer.dim()
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.n_classes];
        for &l in &self.labels {
            counts[l] += 1;
        }
        counts
    }

    fn pairwise(&self, f: fn(&[f64], &[f64]) -> f64) -> Vec<f64> {
        let n = self.len();
        let mut m = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                let v = f(&self.rows[i], &self.rows[j]);
                m[i * n + j] = v;
                m[j * n + i] = v;
            }
        }
        m
    }

    /// Full `n x n` Gram matrix of the standardized rows, shared between
    /// callers asking for the same kernel.
    pub fn kernel_matrix(&self, spec: &KernelSpec) -> Arc<Vec<f64>> {
        let key = spec.cache_key();
        if let Some(m) = self.kernels.lock().unwrap().get(&key) {
            return Arc::clone(m);
        }
        let m = Arc::new(match spec.kind {
            KernelKind::Rbf => {
                let d = self.sqdists.get_or_init(|| self.pairwise(sqdist));
                d.iter().map(|&s| spec.from_parts(0.0, s)).collect()
            }
            _ => {
                let d = self.dots.get_or_init(|| self.pairwise(dot));
                d.iter().map(|&v| spec.from_parts(v, 0.0)).collect()
            }
        });
        Arc::clone(self.kernels.lock().unwrap().entry(key).or_insert(m))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CvOptions {
    /// Worker threads for fold evaluation; 1 runs inline.
    pub jobs: usize,
}

impl Default for CvOptions {
    fn default() -> Self {
        Self { jobs: 1 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LoocvResult {
    /// Predicted label index for each held-out example, in dataset order.
    pub predictions: Vec<usize>,
    pub accuracy: f64,
}

impl LoocvResult {
    fn from_predictions(predictions: Vec<usize>, labels: &[usize]) -> Self {
        let correct = predictions
            .iter()
            .zip(labels)
            .filter(|(p, t)| p == t)
            .count();
        let accuracy = correct as f64 / labels.len() as f64;
        Self {
            predictions,
            accuracy,
        }
    }
}

fn check_inputs(rows: &[Vec<f64>], labels: &[usize]) -> Result<()> {
    if rows.len() != labels.len() {
        return Err(Error::domain("rows and labels differ in length"));
    }
    if rows.len() < 2 {
        return Err(Error::domain("leave-one-out needs at least two examples"));
    }
    Ok(())
}

fn fold_train_set(
    rows: &[Vec<f64>],
    labels: &[usize],
    n_classes: usize,
    held_out: usize,
) -> Result<TrainSet> {
    let keep = || {
        rows.iter()
            .enumerate()
            .filter(move |(i, _)| *i != held_out)
            .map(|(_, r)| r.as_slice())
    };
    let fold_labels: Vec<usize> = labels
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != held_out)
        .map(|(_, &l)| l)
        .collect();
    TrainSet::new(keep(), &fold_labels, n_classes)
}

fn run_folds<T, F>(n: usize, opts: &CvOptions, fold: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    let wrap = |i: usize| {
        fold(i).map_err(|e| Error::Fold {
            fold: i,
            source: Box::new(e),
        })
    };
    if opts.jobs <= 1 {
        return (0..n).map(wrap).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.jobs)
        .build()
        .map_err(|e| Error::config(format!("cannot start worker pool: {e}")))?;
    pool.install(|| (0..n).into_par_iter().map(wrap).collect())
}

/// Leave-one-out cross-validation with an arbitrary trainer.
///
/// For every example the trainer receives a [`TrainSet`] built from all other
/// rows; the held-out row is standardized with that fold's statistics before
/// prediction. Trainer errors carry the fold index.
pub fn loocv<F>(
    rows: &[Vec<f64>],
    labels: &[usize],
    n_classes: usize,
    fit: F,
) -> Result<LoocvResult>
where
    F: Fn(&TrainSet) -> Result<Box<dyn Classifier>> + Sync + Send,
{
    check_inputs(rows, labels)?;
    let predictions = run_folds(rows.len(), &CvOptions::default(), |i| {
        let train = fold_train_set(rows, labels, n_classes, i)?;
        let model = fit(&train)?;
        model.predict(&train.standardizer().transform(&rows[i])?)
    })?;
    Ok(LoocvResult::from_predictions(predictions, labels))
}

/// LOOCV for several hyperparameter candidates at once. Each fold's training
/// set and kernel caches are shared by all candidates.
pub fn loocv_many(
    rows: &[Vec<f64>],
    labels: &[usize],
    n_classes: usize,
    algorithm: &dyn Algorithm,
    candidates: &[Hyperparams],
    opts: &CvOptions,
) -> Result<Vec<LoocvResult>> {
    check_inputs(rows, labels)?;
    let per_fold = run_folds(rows.len(), opts, |i| {
        let train = fold_train_set(rows, labels, n_classes, i)?;
        let x = train.standardizer().transform(&rows[i])?;
        candidates
            .iter()
            .map(|p| algorithm.fit(&train, p)?.predict(&x))
            .collect::<Result<Vec<_>>>()
    })?;
    Ok((0..candidates.len())
        .map(|c| {
            let preds = per_fold.iter().map(|f| f[c]).collect();
            LoocvResult::from_predictions(preds, labels)
        })
        .collect())
}

#[derive(Clone, Debug, PartialEq)]
pub struct GridSearchResult {
    pub best: Hyperparams,
    pub best_index: usize,
    /// LOOCV outcome of the winning candidate.
    pub loocv: LoocvResult,
    /// Accuracy of every candidate in declaration order.
    pub scores: Vec<(Hyperparams, f64)>,
}

impl GridSearchResult {
    pub fn accuracy(&self) -> f64 {
        self.loocv.accuracy
    }
}

/// Scores every candidate by LOOCV; the highest accuracy wins, ties going to
/// the earliest candidate.
pub fn grid_search(
    rows: &[Vec<f64>],
    labels: &[usize],
    n_classes: usize,
    algorithm: &dyn Algorithm,
    candidates: &[Hyperparams],
    opts: &CvOptions,
) -> Result<GridSearchResult> {
    if candidates.is_empty() {
        return Err(Error::config(format!(
            "empty hyperparameter grid for `{}`",
            algorithm.name()
        )));
    }
    let results = loocv_many(rows, labels, n_classes, algorithm, candidates, opts)?;
    let mut best_index = 0;
    for (i, r) in results.iter().enumerate() {
        if r.accuracy > results[best_index].accuracy {
            best_index = i;
        }
    }
    let scores = candidates
        .iter()
        .cloned()
        .zip(results.iter().map(|r| r.accuracy))
        .collect();
    Ok(GridSearchResult {
        best: candidates[best_index].clone(),
        best_index,
        loocv: results.into_iter().nth(best_index).unwrap(),
        scores,
    })
}
