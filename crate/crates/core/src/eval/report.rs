use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::confusion::ConfusionMatrix;
use super::groups::{group_analysis, GroupAnalysis};
use super::spearman::{resolution_trends, ResolutionTrend};
use super::study::{Cell, SweepResult};
use crate::dataset::{Dataset, Modality, ResolutionScheme};
use crate::error::{Error, Result};
use crate::learn::GridSpec;

pub const REPORT_SCHEMA: u32 = 1;

/// Algorithm whose predictions feed the confusion and group analyses.
pub const REFERENCE_ALGORITHM: &str = "svm-rbf";

/// Everything needed to rerun the evaluation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportProvenance {
    pub seed: u64,
    /// Hash of the generator configuration recorded in the dataset.
    pub config_hash: String,
    pub grid: GridSpec,
    pub schemes: Vec<ResolutionScheme>,
    /// The invoking run configuration, as written by the caller.
    pub run: serde_json::Value,
    pub version: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModalityConfusion {
    pub modality: Modality,
    pub algorithm: String,
    pub accuracy: f64,
    pub matrix: ConfusionMatrix,
    pub groups: GroupAnalysis,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema: u32,
    pub provenance: ReportProvenance,
    pub labels: Vec<String>,
    /// Algorithm-major, tactile before pressure.
    pub cells: Vec<Cell>,
    pub confusion: Vec<ModalityConfusion>,
    pub sweep: Option<SweepResult>,
    pub trends: Vec<ResolutionTrend>,
}

impl Report {
    /// Assembles the report. Confusion and group analyses use the
    /// reference algorithm's cells, or the first algorithm's without it.
    pub fn build(
        ds: &Dataset,
        cells: Vec<Cell>,
        sweep: Option<SweepResult>,
        provenance: ReportProvenance,
    ) -> Result<Self> {
        let reference = cells
            .iter()
            .find(|c| c.algorithm == REFERENCE_ALGORITHM)
            .or(cells.first())
            .map(|c| c.algorithm.clone());
        let targets = ds.targets();
        let groups = ds.group_map();
        let mut confusion = Vec::new();
        for cell in cells
            .iter()
            .filter(|c| Some(&c.algorithm) == reference.as_ref())
        {
            let matrix = ConfusionMatrix::from_indices(&targets, &cell.predictions, &ds.labels)?;
            confusion.push(ModalityConfusion {
                modality: cell.modality,
                algorithm: cell.algorithm.clone(),
                accuracy: cell.accuracy,
                groups: group_analysis(&matrix, &groups)?,
                matrix,
            });
        }
        let trends = sweep.as_ref().map(resolution_trends).unwrap_or_default();
        Ok(Self {
            schema: REPORT_SCHEMA,
            provenance,
            labels: ds.labels.clone(),
            cells,
            confusion,
            sweep,
            trends,
        })
    }

    pub fn cell(&self, algorithm: &str, modality: Modality) -> Option<&Cell> {
        self.cells
            .iter()
            .find(|c| c.algorithm == algorithm && c.modality == modality)
    }

    pub fn confusion_for(&self, modality: Modality) -> Option<&ModalityConfusion> {
        self.confusion.iter().find(|c| c.modality == modality)
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct Head {
            schema: u32,
        }
        let head: Head = serde_json::from_str(text)?;
        if head.schema != REPORT_SCHEMA {
            return Err(Error::Schema {
                expected: REPORT_SCHEMA,
                found: head.schema,
            });
        }
        Ok(serde_json::from_str(text)?)
    }

    /// `algorithm,modality,accuracy`.
    pub fn table1_csv(&self) -> String {
        let mut out = String::from("algorithm,modality,accuracy\n");
        for c in &self.cells {
            let _ = writeln!(out, "{},{},{}", c.algorithm, c.modality, c.accuracy);
        }
        out
    }

    pub fn groups_csv(&self) -> String {
        let mut out = String::from("modality,label,group,correct,same_group,wrong_group\n");
        for c in &self.confusion {
            for r in &c.groups.rows {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{}",
                    c.modality, r.label, r.group, r.correct, r.same_group, r.wrong_group
                );
            }
        }
        out
    }

    pub fn sweep_csv(&self) -> Option<String> {
        let sweep = self.sweep.as_ref()?;
        let mut out =
            String::from("algorithm,scheme,modality,units_per_finger,n_features,accuracy,best\n");
        for r in &sweep.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                sweep.algorithm,
                r.scheme,
                r.modality,
                r.units_per_finger,
                r.n_features,
                r.accuracy,
                r.best
            );
        }
        Some(out)
    }

    /// Writes `report.json` and the CSV tables into `dir`, creating it.
    /// Returns the written paths.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let mut files = vec![("report.json".to_string(), self.to_json()?)];
        if !self.cells.is_empty() {
            files.push(("table1.csv".into(), self.table1_csv()));
        }
        for c in &self.confusion {
            files.push((format!("confusion_{}.csv", c.modality), c.matrix.to_csv()));
        }
        if !self.confusion.is_empty() {
            files.push(("groups.csv".into(), self.groups_csv()));
        }
        if let Some(s) = self.sweep_csv() {
            files.push(("sweep.csv".into(), s));
        }
        files
            .into_iter()
            .map(|(name, body)| {
                let path = dir.join(name);
                fs::write(&path, body).map_err(|e| Error::io(&path, e))?;
                Ok(path)
            })
            .collect()
    }
}
