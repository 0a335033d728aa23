//! Simulated coarser sensors: partitions of a finger's units whose members
//! are averaged into one feature.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::frame::{GraspFrame, Modality, FINGERS};
use crate::error::{Error, Result};

const DEFAULT_SCHEMES: &str = include_str!("../../config/schemes.toml");

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResolutionScheme {
    pub name: String,
    pub modality: Modality,
    pub groups: Vec<Vec<usize>>,
}

impl ResolutionScheme {
    /// Full resolution of a modality: every unit in its own group.
    pub fn identity(modality: Modality) -> Self {
        let n = modality.units_per_finger();
        let name = match modality {
            Modality::Tactile => format!("T{n}"),
            Modality::Pressure => format!("P{n}"),
        };
        Self {
            name,
            modality,
            groups: (0..n).map(|i| vec![i]).collect(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.modality.units_per_finger();
        let mut seen = vec![false; n];
        for group in &self.groups {
            if group.is_empty() {
                return Err(Error::config(format!("scheme {}: empty group", self.name)));
            }
            for &i in group {
                if i >= n {
                    return Err(Error::config(format!(
                        "scheme {}: index {i} out of range for {} ({n} units)",
                        self.name, self.modality
                    )));
                }
                if std::mem::replace(&mut seen[i], true) {
                    return Err(Error::config(format!(
                        "scheme {}: index {i} appears twice",
                        self.name
                    )));
                }
            }
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Err(Error::config(format!(
                "scheme {}: index {missing} not covered",
                self.name
            )));
        }
        Ok(())
    }

    pub fn units_per_finger(&self) -> usize {
        self.groups.len()
    }

    pub fn output_dim(&self) -> usize {
        FINGERS * self.groups.len()
    }

    /// Name of every output feature: the unit's own name for single-unit
    /// groups, `f<finger>_<scheme>_g<group>` otherwise.
    pub fn feature_names(&self) -> Vec<String> {
        let unit = match self.modality {
            Modality::Tactile => "taxel",
            Modality::Pressure => "chamber",
        };
        let mut out = Vec::with_capacity(self.output_dim());
        for finger in 0..FINGERS {
            for (g, group) in self.groups.iter().enumerate() {
                out.push(match group.as_slice() {
                    [i] if self.modality == Modality::Tactile => format!("f{finger}_{unit}{i:02}"),
                    [i] => format!("f{finger}_{unit}{i}"),
                    _ => format!("f{finger}_{}_g{g}", self.name),
                });
            }
        }
        out
    }

    /// Group means, finger-major. Features of the other modality are dropped.
    pub fn apply(&self, frame: &GraspFrame) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.output_dim());
        for finger in 0..FINGERS {
            let units = frame.units(self.modality, finger);
            for group in &self.groups {
                let sum: f64 = group.iter().map(|&i| units[i]).sum();
                out.push(sum / group.len() as f64);
            }
        }
        out
    }
}

pub fn downsample(frame: &GraspFrame, scheme: &ResolutionScheme) -> Result<Vec<f64>> {
    scheme.validate()?;
    Ok(scheme.apply(frame))
}

/// Named schemes in declaration order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemeSet {
    #[serde(rename = "scheme")]
    schemes: Vec<ResolutionScheme>,
}

impl SchemeSet {
    pub fn builtin() -> Self {
        Self::from_toml(DEFAULT_SCHEMES).expect("shipped scheme file is valid")
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let set: SchemeSet =
            toml::from_str(text).map_err(|e| Error::config(format!("scheme file: {e}")))?;
        set.validate()?;
        Ok(set)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text)
    }

    fn validate(&self) -> Result<()> {
        for (i, s) in self.schemes.iter().enumerate() {
            s.validate()?;
            if self.schemes[..i].iter().any(|o| o.name == s.name) {
                return Err(Error::config(format!("duplicate scheme name {}", s.name)));
            }
        }
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<&ResolutionScheme> {
        self.schemes.iter().find(|s| s.name == name)
    }

    pub fn select(&self, names: &[String]) -> Result<Vec<ResolutionScheme>> {
        names
            .iter()
            .map(|n| {
                self.get(n)
                    .cloned()
                    .ok_or_else(|| Error::config(format!("unknown resolution scheme `{n}`")))
            })
            .collect()
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.schemes.iter().map(|s| s.name.as_str())
    }

    pub fn iter(&self) -> impl Iterator<Item = &ResolutionScheme> {
        self.schemes.iter()
    }
}
