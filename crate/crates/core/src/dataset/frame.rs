use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const FINGERS: usize = 4;
pub const TAXELS_PER_FINGER: usize = 14;
pub const CHAMBERS_PER_FINGER: usize = 2;
pub const FEATURES_PER_FINGER: usize = TAXELS_PER_FINGER + CHAMBERS_PER_FINGER;
pub const FRAME_DIM: usize = FINGERS * FEATURES_PER_FINGER;

/// Physical category of a grasped object.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ObjectGroup {
    /// Deformable packaging with loose contents.
    Packaged,
    Bottle,
    Sphere,
}

impl ObjectGroup {
    pub fn as_str(self) -> &'static str {
        match self {
            ObjectGroup::Packaged => "packaged",
            ObjectGroup::Bottle => "bottle",
            ObjectGroup::Sphere => "sphere",
        }
    }
}

impl fmt::Display for ObjectGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Sensing modality a feature belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Modality {
    Tactile,
    Pressure,
}

impl Modality {
    pub fn as_str(self) -> &'static str {
        match self {
            Modality::Tactile => "tactile",
            Modality::Pressure => "pressure",
        }
    }

    /// Number of raw sensing units per finger.
    pub fn units_per_finger(self) -> usize {
        match self {
            Modality::Tactile => TAXELS_PER_FINGER,
            Modality::Pressure => CHAMBERS_PER_FINGER,
        }
    }
}

impl fmt::Display for Modality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Modality {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tactile" => Ok(Modality::Tactile),
            "pressure" => Ok(Modality::Pressure),
            other => Err(Error::config(format!("unknown modality `{other}`"))),
        }
    }
}

/// One labeled observation after the hand has closed and settled.
#[derive(Clone, Debug, PartialEq)]
pub struct GraspFrame {
    /// Volts, `[finger][taxel]`.
    pub taxel_voltages: [[f64; TAXELS_PER_FINGER]; FINGERS],
    /// kPa, `[finger][chamber]` with chamber 0 proximal and 1 distal.
    pub chamber_pressures: [[f64; CHAMBERS_PER_FINGER]; FINGERS],
    pub label: String,
    pub group: ObjectGroup,
}

impl GraspFrame {
    pub fn zeros(label: impl Into<String>, group: ObjectGroup) -> Self {
        Self {
            taxel_voltages: [[0.0; TAXELS_PER_FINGER]; FINGERS],
            chamber_pressures: [[0.0; CHAMBERS_PER_FINGER]; FINGERS],
            label: label.into(),
            group,
        }
    }

    /// Finger-major feature vector: per finger the 14 taxels, then the 2 chambers.
    pub fn flatten(&self) -> [f64; FRAME_DIM] {
        let mut x = [0.0; FRAME_DIM];
        for f in 0..FINGERS {
            let base = f * FEATURES_PER_FINGER;
            x[base..base + TAXELS_PER_FINGER].copy_from_slice(&self.taxel_voltages[f]);
            x[base + TAXELS_PER_FINGER..base + FEATURES_PER_FINGER]
                .copy_from_slice(&self.chamber_pressures[f]);
        }
        x
    }

    pub fn unflatten(x: &[f64], label: impl Into<String>, group: ObjectGroup) -> Result<Self> {
        if x.len() != FRAME_DIM {
            return Err(Error::domain(format!(
                "frame needs {FRAME_DIM} features, got {}",
                x.len()
            )));
        }
        let mut frame = Self::zeros(label, group);
        for f in 0..FINGERS {
            let base = f * FEATURES_PER_FINGER;
            frame.taxel_voltages[f].copy_from_slice(&x[base..base + TAXELS_PER_FINGER]);
            frame.chamber_pressures[f]
                .copy_from_slice(&x[base + TAXELS_PER_FINGER..base + FEATURES_PER_FINGER]);
        }
        Ok(frame)
    }

    /// Raw per-finger values of one modality.
    pub fn units(&self, modality: Modality, finger: usize) -> &[f64] {
        match modality {
            Modality::Tactile => &self.taxel_voltages[finger],
            Modality::Pressure => &self.chamber_pressures[finger],
        }
    }
}

pub fn flat_index(finger: usize, taxel: usize) -> usize {
    finger * FEATURES_PER_FINGER + taxel
}

pub fn feature_names() -> Vec<String> {
    let mut names = Vec::with_capacity(FRAME_DIM);
    for f in 0..FINGERS {
        names.extend((0..TAXELS_PER_FINGER).map(|t| format!("f{f}_taxel{t:02}")));
        names.extend((0..CHAMBERS_PER_FINGER).map(|c| format!("f{f}_chamber{c}")));
    }
    names
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn zero_frame_flattens_to_zeros() {
        let f = GraspFrame::zeros("a", ObjectGroup::Sphere);
        assert!(f.flatten().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn single_taxel_lands_at_finger_major_index() {
        let mut f = GraspFrame::zeros("a", ObjectGroup::Sphere);
        f.taxel_voltages[2][5] = 1.0;
        let x = f.flatten();
        assert_eq!(flat_index(2, 5), 37);
        assert_eq!(x[37], 1.0);
        assert_eq!(x.iter().filter(|&&v| v != 0.0).count(), 1);
    }

    #[test]
    fn feature_names_follow_layout() {
        let names = feature_names();
        assert_eq!(names.len(), 64);
        assert_eq!(names[37], "f2_taxel05");
        assert_eq!(names[14], "f0_chamber0");
        assert_eq!(names[63], "f3_chamber1");
    }

    #[test]
    fn unflatten_rejects_wrong_length() {
        assert!(GraspFrame::unflatten(&[0.0; 63], "a", ObjectGroup::Bottle).is_err());
    }

    proptest! {
        #[test]
        fn flatten_round_trips(xs in proptest::collection::vec(-1e6f64..1e6, FRAME_DIM)) {
            let f = GraspFrame::unflatten(&xs, "obj", ObjectGroup::Packaged).unwrap();
            prop_assert_eq!(f.flatten().to_vec(), xs.clone());
            let g = GraspFrame::unflatten(&f.flatten(), "obj", ObjectGroup::Packaged).unwrap();
            prop_assert_eq!(f, g);
        }
    }
}
