use serde::{Deserialize, Serialize};

use super::cv::TrainSet;
use super::grid::GridSpec;
use super::kernel::{KernelKind, KernelSpec};
use super::persist::ModelState;
use super::smo::{solve_dual, KernelMatrix, SmoParams};
use super::{Algorithm, Classifier, Hyperparams};
use crate::error::{Error, Result};

/// Binary machine separating `positive` (+1) from `negative` (-1).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairModel {
    pub positive: usize,
    pub negative: usize,
    /// Indices into the shared support vectors.
    pub support: Vec<usize>,
    /// `a_s y_s` for each entry of `support`.
    pub coefficients: Vec<f64>,
    pub bias: f64,
}

impl PairModel {
    fn decision(&self, kernel_values: &[f64]) -> f64 {
        self.support
            .iter()
            .zip(&self.coefficients)
            .map(|(&s, c)| c * kernel_values[s])
            .sum::<f64>()
            + self.bias
    }
}

/// One-vs-one multi-class SVM.
///
/// Each pair model casts one vote; a non-negative decision votes for the
/// lower label. Equal vote counts are settled by the summed `|decision|` of
/// the contests each label won, then by the lower label.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OneVsOneSvm {
    pub n_classes: usize,
    pub n_features: usize,
    pub kernel: KernelSpec,
    pub c: f64,
    /// Union of the support vectors of all pairs, in training order.
    pub support_vectors: Vec<Vec<f64>>,
    pub pairs: Vec<PairModel>,
    /// Set when training saw a single class.
    pub constant: Option<usize>,
}

impl OneVsOneSvm {
    pub fn fit(train: &TrainSet, kernel: KernelSpec, params: &SmoParams) -> Result<Self> {
        kernel.validate()?;
        if train.is_empty() {
            return Err(Error::Training("SVM needs a non-empty training set".into()));
        }
        let present: Vec<usize> = train
            .class_counts()
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(l, _)| l)
            .collect();
        let mut model = Self {
            n_classes: train.n_classes(),
            n_features: train.dim(),
            kernel,
            c: params.c,
            support_vectors: Vec::new(),
            pairs: Vec::new(),
            constant: None,
        };
        if present.len() == 1 {
            model.constant = Some(present[0]);
            return Ok(model);
        }
        let gram = train.kernel_matrix(&kernel);
        let n = train.len();
        let labels = train.labels();
        // pair models first refer to training rows, remapped below
        let mut used = vec![false; n];
        let mut sub = Vec::new();
        for (ai, &a) in present.iter().enumerate() {
            for &b in &present[ai + 1..] {
                let idx: Vec<usize> = (0..n)
                    .filter(|&i| labels[i] == a || labels[i] == b)
                    .collect();
                let y: Vec<f64> = idx
                    .iter()
                    .map(|&i| if labels[i] == a { 1.0 } else { -1.0 })
                    .collect();
                let m = idx.len();
                sub.clear();
                for &i in &idx {
                    let row = &gram[i * n..(i + 1) * n];
                    sub.extend(idx.iter().map(|&j| row[j]));
                }
                let sol = solve_dual(&KernelMatrix::new(m, &sub)?, &y, params)?;
                let mut pair = PairModel {
                    positive: a,
                    negative: b,
                    support: Vec::new(),
                    coefficients: Vec::new(),
                    bias: sol.bias,
                };
                for ((&i, &yt), &alpha) in idx.iter().zip(&y).zip(&sol.alpha) {
                    if alpha > 0.0 {
                        used[i] = true;
                        pair.support.push(i);
                        pair.coefficients.push(alpha * yt);
                    }
                }
                model.pairs.push(pair);
            }
        }
        let mut slot = vec![usize::MAX; n];
        for i in (0..n).filter(|&i| used[i]) {
            slot[i] = model.support_vectors.len();
            model.support_vectors.push(train.rows()[i].clone());
        }
        for p in &mut model.pairs {
            p.support.iter_mut().for_each(|s| *s = slot[*s]);
        }
        Ok(model)
    }

    /// Decision value of every pair model, in `pairs` order.
    pub fn decisions(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.n_features {
            return Err(Error::domain(format!(
                "expected {} features, got {}",
                self.n_features,
                x.len()
            )));
        }
        let kv: Vec<f64> = self
            .support_vectors
            .iter()
            .map(|sv| self.kernel.eval_unchecked(sv, x))
            .collect();
        Ok(self.pairs.iter().map(|p| p.decision(&kv)).collect())
    }
}

pub fn svm_predict(model: &OneVsOneSvm, x: &[f64]) -> Result<usize> {
    let decisions = model.decisions(x)?;
    if let Some(c) = model.constant {
        return Ok(c);
    }
    let mut votes = vec![0usize; model.n_classes];
    let mut strength = vec![0.0; model.n_classes];
    for (p, d) in model.pairs.iter().zip(decisions) {
        let winner = if d >= 0.0 { p.positive } else { p.negative };
        votes[winner] += 1;
        strength[winner] += d.abs();
    }
    let mut best = 0;
    for c in 1..model.n_classes {
        if votes[c] > votes[best] || (votes[c] == votes[best] && strength[c] > strength[best]) {
            best = c;
        }
    }
    Ok(best)
}

impl Classifier for OneVsOneSvm {
    fn predict(&self, x: &[f64]) -> Result<usize> {
        svm_predict(self, x)
    }

    fn state(&self) -> ModelState {
        ModelState::Svm(self.clone())
    }
}

/// SVM with a fixed kernel family; C and kernel parameters come from the grid.
pub struct SvmAlgorithm {
    kind: KernelKind,
    smo: SmoParams,
}

impl SvmAlgorithm {
    pub fn new(kind: KernelKind) -> Self {
        Self {
            kind,
            smo: SmoParams::default(),
        }
    }

    pub fn with_smo(kind: KernelKind, smo: SmoParams) -> Self {
        Self { kind, smo }
    }
}

impl Algorithm for SvmAlgorithm {
    fn name(&self) -> &str {
        match self.kind {
            KernelKind::Linear => "svm-linear",
            KernelKind::Polynomial => "svm-poly",
            KernelKind::Rbf => "svm-rbf",
        }
    }

    fn candidates(&self, grid: &GridSpec, n_features: usize) -> Vec<Hyperparams> {
        let mut out = Vec::new();
        for &c in &grid.c {
            match self.kind {
                KernelKind::Linear => out.push(Hyperparams::Svm {
                    c,
                    kernel: KernelSpec::linear(),
                }),
                KernelKind::Rbf => {
                    for g in &grid.gamma {
                        out.push(Hyperparams::Svm {
                            c,
                            kernel: KernelSpec::rbf(g.resolve(n_features)),
                        });
                    }
                }
                KernelKind::Polynomial => {
                    for g in &grid.gamma {
                        for &degree in &grid.degree {
                            for &coef0 in &grid.coef0 {
                                out.push(Hyperparams::Svm {
                                    c,
                                    kernel: KernelSpec::polynomial(
                                        g.resolve(n_features),
                                        degree,
                                        coef0,
                                    ),
                                });
                            }
                        }
                    }
                }
            }
        }
        out
    }

    fn fit(&self, train: &TrainSet, params: &Hyperparams) -> Result<Box<dyn Classifier>> {
        match params {
            Hyperparams::Svm { c, kernel } if kernel.kind == self.kind => {
                let smo = SmoParams { c: *c, ..self.smo };
                Ok(Box::new(OneVsOneSvm::fit(train, *kernel, &smo)?))
            }
            other => Err(Error::config(format!(
                "{} cannot use {other:?}",
                self.name()
            ))),
        }
    }
}
