use std::path::Path;

use serde::{Deserialize, Serialize};

use super::cv::TrainSet;
use super::knn::KnnModel;
use super::standardize::Standardizer;
use super::svm::OneVsOneSvm;
use super::tree::DecisionTree;
use super::{Algorithm, Classifier, Hyperparams};
use crate::error::{Error, Result};

pub const MODEL_SCHEMA: u32 = 1;

const TIE_BREAK: &str =
    "votes, then summed |decision| (svm) or mean neighbour distance (knn), then lowest label index";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ModelState {
    Knn(KnnModel),
    Tree(DecisionTree),
    Svm(OneVsOneSvm),
}

impl ModelState {
    pub fn classifier(&self) -> &dyn Classifier {
        match self {
            ModelState::Knn(m) => m,
            ModelState::Tree(m) => m,
            ModelState::Svm(m) => m,
        }
    }
}

/// A trained model with everything needed to classify raw feature vectors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FittedModel {
    pub schema: u32,
    pub algorithm: String,
    pub hyperparams: Hyperparams,
    pub labels: Vec<String>,
    pub feature_names: Vec<String>,
    pub standardizer: Standardizer,
    pub tie_break: String,
    pub model: ModelState,
}

impl FittedModel {
    /// Fits on all rows.
    pub fn train(
        algorithm: &dyn Algorithm,
        params: &Hyperparams,
        rows: &[Vec<f64>],
        targets: &[usize],
        labels: &[String],
        feature_names: &[String],
    ) -> Result<Self> {
        let train = TrainSet::new(rows.iter().map(Vec::as_slice), targets, labels.len())?;
        let model = algorithm.fit(&train, params)?.state();
        Ok(Self {
            schema: MODEL_SCHEMA,
            algorithm: algorithm.name().to_owned(),
            hyperparams: params.clone(),
            labels: labels.to_vec(),
            feature_names: feature_names.to_vec(),
            standardizer: train.standardizer().clone(),
            tie_break: TIE_BREAK.to_owned(),
            model,
        })
    }

    /// Label index for a raw (unstandardized) feature vector.
    pub fn predict_index(&self, x: &[f64]) -> Result<usize> {
        self.model
            .classifier()
            .predict(&self.standardizer.transform(x)?)
    }

    pub fn predict(&self, x: &[f64]) -> Result<&str> {
        Ok(&self.labels[self.predict_index(x)?])
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct Version {
            schema: u32,
        }
        let v: Version = serde_json::from_str(text)?;
        if v.schema != MODEL_SCHEMA {
            return Err(Error::Schema {
                expected: MODEL_SCHEMA,
                found: v.schema,
            });
        }
        Ok(serde_json::from_str(text)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()? + "\n").map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}
