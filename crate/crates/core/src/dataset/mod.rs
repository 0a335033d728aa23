//! Data model, on-disk format, sensor geometry and resolution reduction.

mod frame;
mod io;
mod layout;
mod scheme;

pub use frame::{
    feature_names, flat_index, GraspFrame, Modality, ObjectGroup, CHAMBERS_PER_FINGER,
    FEATURES_PER_FINGER, FINGERS, FRAME_DIM, TAXELS_PER_FINGER,
};
pub use io::{load_dataset, read_dataset, save_dataset, write_dataset, DATASET_SCHEMA};
pub use layout::{Taxel, TaxelKind, TaxelLayout, FINGERTIP_TAXELS, PROXIMAL_TAXELS};
pub use scheme::{downsample, ResolutionScheme, SchemeSet};

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Where a dataset came from.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub seed: u64,
    /// SHA-256 of the generator configuration.
    pub config_hash: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    /// Closed label set in declaration order; label indices refer to it.
    pub labels: Vec<String>,
    /// Group of each label, parallel to `labels`.
    pub label_groups: Vec<ObjectGroup>,
    pub feature_names: Vec<String>,
    pub frames: Vec<GraspFrame>,
    pub provenance: Provenance,
}

impl Dataset {
    pub fn new(
        labels: Vec<String>,
        label_groups: Vec<ObjectGroup>,
        provenance: Provenance,
    ) -> Result<Self> {
        if labels.len() != label_groups.len() {
            return Err(Error::config("labels and label groups differ in length"));
        }
        for (i, l) in labels.iter().enumerate() {
            if labels[..i].contains(l) {
                return Err(Error::config(format!("duplicate label `{l}`")));
            }
        }
        Ok(Self {
            labels,
            label_groups,
            feature_names: feature_names(),
            frames: Vec::new(),
            provenance,
        })
    }

    pub fn push(&mut self, frame: GraspFrame) -> Result<()> {
        let idx = self.label_index(&frame.label)?;
        if self.label_groups[idx] != frame.group {
            return Err(Error::config(format!(
                "label `{}` belongs to group {}, frame says {}",
                frame.label, self.label_groups[idx], frame.group
            )));
        }
        self.frames.push(frame);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn label_index(&self, label: &str) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::domain(format!("unknown label `{label}`")))
    }

    /// Label index of every frame.
    pub fn targets(&self) -> Vec<usize> {
        self.frames
            .iter()
            .map(|f| {
                self.label_index(&f.label)
                    .expect("frames carry declared labels")
            })
            .collect()
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.labels.len()];
        for t in self.targets() {
            counts[t] += 1;
        }
        counts
    }

    /// Object group of every label.
    pub fn group_map(&self) -> HashMap<String, ObjectGroup> {
        self.labels
            .iter()
            .cloned()
            .zip(self.label_groups.iter().copied())
            .collect()
    }

    /// Feature rows after applying a resolution scheme to every frame.
    pub fn features(&self, scheme: &ResolutionScheme) -> Result<Vec<Vec<f64>>> {
        scheme.validate()?;
        Ok(self.frames.iter().map(|f| scheme.apply(f)).collect())
    }

    /// Full-resolution features of one modality (56 tactile or 8 pressure).
    pub fn modality_features(&self, modality: Modality) -> Vec<Vec<f64>> {
        let scheme = ResolutionScheme::identity(modality);
        self.frames.iter().map(|f| scheme.apply(f)).collect()
    }
}
