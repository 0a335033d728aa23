//! Run configuration: one TOML file, overridden by command-line flags.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use taxelsim::dataset::{Modality, SchemeSet};
use taxelsim::eval::REFERENCE_ALGORITHM;
use taxelsim::grasp::{default_object_specs, load_object_specs, HandConfig, ObjectSpec};
use taxelsim::learn::{GridSpec, Registry};

use crate::CliError;

pub const DEFAULT_SEED: u64 = 42;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub out: PathBuf,
    pub jobs: usize,
    /// Object spec file; the shipped objects when absent.
    pub objects: Option<PathBuf>,
    pub grasps_per_object: usize,
    /// Existing dataset for `evaluate`, `sweep` and `train`; generated from
    /// the settings above when absent.
    pub dataset: Option<PathBuf>,
    /// Hyperparameter grid file; the shipped grid when absent.
    pub grid: Option<PathBuf>,
    /// Scheme definition file; the shipped schemes when absent.
    pub scheme_file: Option<PathBuf>,
    /// Schemes of the resolution sweep, in output order.
    pub schemes: Vec<String>,
    pub algorithms: Vec<String>,
    pub sweep_algorithm: String,
    pub hand: HandConfig,
    pub curves: CurvesConfig,
    pub train: TrainConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: DEFAULT_SEED,
            out: PathBuf::from("out"),
            jobs: 1,
            objects: None,
            grasps_per_object: 30,
            dataset: None,
            grid: None,
            scheme_file: None,
            schemes: SchemeSet::builtin().names().map(String::from).collect(),
            algorithms: Registry::builtin().names().map(String::from).collect(),
            sweep_algorithm: REFERENCE_ALGORITHM.into(),
            hand: HandConfig::default(),
            curves: CurvesConfig::default(),
            train: TrainConfig::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CurvesConfig {
    /// Ohms, one characteristic curve each.
    pub pullups: Vec<f64>,
    /// kPa, upper end of the curve grid starting at 0.
    pub max_pressure: f64,
    pub points: usize,
    /// kPa, peak of the triangular hysteresis ramp.
    pub ramp_peak: f64,
    /// Seconds for the whole ramp.
    pub ramp_duration: f64,
}

impl Default for CurvesConfig {
    fn default() -> Self {
        Self {
            pullups: vec![10e3, 47e3, 100e3, 470e3, 1e6],
            max_pressure: 100.0,
            points: 1001,
            ramp_peak: 60.0,
            ramp_duration: 4.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub algorithm: String,
    pub modality: Modality,
    /// Resolution scheme of the features; full resolution when absent.
    pub scheme: Option<String>,
    pub model_file: String,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            algorithm: REFERENCE_ALGORITHM.into(),
            modality: Modality::Tactile,
            scheme: None,
            model_file: "model.json".into(),
        }
    }
}

/// Command-line values that replace file values when present.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub jobs: Option<usize>,
    pub grid: Option<PathBuf>,
    pub dataset: Option<PathBuf>,
}

impl RunConfig {
    pub fn from_toml(text: &str, origin: &Path) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Data(format!("{}: {e}", origin.display())))
    }

    /// Reads `path` if given, then applies the overrides.
    pub fn load(path: Option<&Path>, overrides: &Overrides) -> Result<Self, CliError> {
        let mut cfg = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| taxelsim::Error::Io {
                    path: p.to_path_buf(),
                    source: e,
                })?;
                Self::from_toml(&text, p)?
            }
            None => Self::default(),
        };
        cfg.apply(overrides);
        Ok(cfg)
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(s) = o.seed {
            self.seed = s;
        }
        if let Some(p) = &o.out {
            self.out = p.clone();
        }
        if let Some(j) = o.jobs {
            self.jobs = j;
        }
        if let Some(g) = &o.grid {
            self.grid = Some(g.clone());
        }
        if let Some(d) = &o.dataset {
            self.dataset = Some(d.clone());
        }
    }

    pub fn object_specs(&self) -> Result<Vec<ObjectSpec>, CliError> {
        Ok(match &self.objects {
            Some(p) => load_object_specs(p)?,
            None => default_object_specs(),
        })
    }

    pub fn grid_spec(&self) -> Result<GridSpec, CliError> {
        Ok(match &self.grid {
            Some(p) => GridSpec::load(p)?,
            None => GridSpec::builtin(),
        })
    }

    pub fn scheme_set(&self) -> Result<SchemeSet, CliError> {
        Ok(match &self.scheme_file {
            Some(p) => SchemeSet::load(p)?,
            None => SchemeSet::builtin(),
        })
    }

    pub fn dataset_path(&self) -> PathBuf {
        self.dataset
            .clone()
            .unwrap_or_else(|| self.out.join("dataset.jsonl"))
    }
}
