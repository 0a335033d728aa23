//! Classifier suite and model selection.
//!
//! Every learning algorithm implements [`Algorithm`] and is registered by
//! name in a [`Registry`]; evaluation code looks algorithms up by name and
//! never depends on a concrete type. Algorithms fit on a [`TrainSet`] that is
//! already standardized and produce a boxed [`Classifier`].

mod cv;
mod grid;
mod kernel;
mod knn;
mod persist;
mod smo;
mod standardize;
mod svm;
mod tree;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use cv::{grid_search, loocv, loocv_many, CvOptions, GridSearchResult, LoocvResult, TrainSet};
pub use grid::{Depth, Gamma, GridSpec};
pub use kernel::{kernel_eval, KernelKind, KernelSpec};
pub use knn::{knn_predict, KnnAlgorithm, KnnModel};
pub use persist::{FittedModel, ModelState, MODEL_SCHEMA};
pub use smo::{
    bias_from_errors, dual_objective, solve_dual, svm_train_smo, BinarySvm, DualSolution,
    KernelMatrix, PairSelection, SmoParams, SmoReport, TracePoint,
};
pub use standardize::Standardizer;
pub use svm::{svm_predict, OneVsOneSvm, PairModel, SvmAlgorithm};
pub use tree::{DecisionTree, TreeAlgorithm, TreeNode, TreeParams};

use crate::error::{Error, Result};

/// One point of a hyperparameter grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Hyperparams {
    Knn { k: usize },
    Tree(TreeParams),
    Svm { c: f64, kernel: KernelSpec },
}

impl fmt::Display for Hyperparams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Hyperparams::Knn { k } => write!(f, "k={k}"),
            Hyperparams::Tree(p) => match p.max_depth {
                Some(d) => write!(f, "max_depth={d} min_leaf={}", p.min_leaf),
                None => write!(f, "max_depth=none min_leaf={}", p.min_leaf),
            },
            Hyperparams::Svm { c, kernel } => match kernel.kind {
                KernelKind::Linear => write!(f, "C={c}"),
                KernelKind::Rbf => write!(f, "C={c} gamma={}", kernel.gamma),
                KernelKind::Polynomial => write!(
                    f,
                    "C={c} gamma={} degree={} coef0={}",
                    kernel.gamma, kernel.degree, kernel.coef0
                ),
            },
        }
    }
}

/// A fitted model working on standardized features.
pub trait Classifier: Send + Sync {
    /// Index of the predicted label.
    fn predict(&self, x: &[f64]) -> Result<usize>;

    /// Serializable form of the model.
    fn state(&self) -> ModelState;
}

/// A learning strategy selectable by name.
pub trait Algorithm: Send + Sync {
    fn name(&self) -> &str;

    /// Grid points for this algorithm in declaration order.
    fn candidates(&self, grid: &GridSpec, n_features: usize) -> Vec<Hyperparams>;

    fn fit(&self, train: &TrainSet, params: &Hyperparams) -> Result<Box<dyn Classifier>>;
}

/// Algorithms by name, in registration order.
#[derive(Clone, Default)]
pub struct Registry {
    entries: Vec<Arc<dyn Algorithm>>,
}

impl Registry {
    pub fn empty() -> Self {
        Self::default()
    }

    /// KNN, decision tree and the three SVM kernels.
    pub fn builtin() -> Self {
        let mut r = Self::empty();
        r.register(Arc::new(KnnAlgorithm)).unwrap();
        r.register(Arc::new(TreeAlgorithm)).unwrap();
        r.register(Arc::new(SvmAlgorithm::new(KernelKind::Linear)))
            .unwrap();
        r.register(Arc::new(SvmAlgorithm::new(KernelKind::Polynomial)))
            .unwrap();
        r.register(Arc::new(SvmAlgorithm::new(KernelKind::Rbf)))
            .unwrap();
        r
    }

    pub fn register(&mut self, algorithm: Arc<dyn Algorithm>) -> Result<()> {
        if self.get(algorithm.name()).is_some() {
            return Err(Error::config(format!(
                "algorithm `{}` registered twice",
                algorithm.name()
            )));
        }
        self.entries.push(algorithm);
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<Arc<dyn Algorithm>> {
        self.entries.iter().find(|a| a.name() == name).cloned()
    }

    pub fn require(&self, name: &str) -> Result<Arc<dyn Algorithm>> {
        self.get(name).ok_or_else(|| {
            Error::config(format!(
                "unknown algorithm `{name}` (known: {})",
                self.names().collect::<Vec<_>>().join(", ")
            ))
        })
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|a| a.name())
    }
}

/// Majority label; ties go to the lowest label index.
pub(crate) fn majority(counts: &[usize]) -> usize {
    let mut best = 0;
    for (i, &c) in counts.iter().enumerate() {
        if c > counts[best] {
            best = i;
        }
    }
    best
}
