use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// RBF/polynomial gamma: a fixed value or `1/d` with `d` the feature count.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Scalar", into = "Scalar")]
pub enum Gamma {
    Fixed(f64),
    InverseDim,
}

impl Gamma {
    pub fn resolve(self, n_features: usize) -> f64 {
        match self {
            Gamma::Fixed(g) => g,
            Gamma::InverseDim => 1.0 / n_features.max(1) as f64,
        }
    }
}

/// Tree depth limit; `"none"` in config files.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Scalar", into = "Scalar")]
pub enum Depth {
    Limit(usize),
    Unlimited,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum Scalar {
    Int(i64),
    Float(f64),
    Text(String),
}

impl TryFrom<Scalar> for Gamma {
    type Error = String;

    fn try_from(s: Scalar) -> std::result::Result<Self, String> {
        match s {
            Scalar::Int(v) if v > 0 => Ok(Gamma::Fixed(v as f64)),
            Scalar::Float(v) if v > 0.0 && v.is_finite() => Ok(Gamma::Fixed(v)),
            Scalar::Text(t) if t.trim() == "1/d" => Ok(Gamma::InverseDim),
            _ => Err("gamma must be a positive number or \"1/d\"".into()),
        }
    }
}

impl From<Gamma> for Scalar {
    fn from(g: Gamma) -> Self {
        match g {
            Gamma::Fixed(v) => Scalar::Float(v),
            Gamma::InverseDim => Scalar::Text("1/d".into()),
        }
    }
}

impl TryFrom<Scalar> for Depth {
    type Error = String;

    fn try_from(s: Scalar) -> std::result::Result<Self, String> {
        match s {
            Scalar::Int(v) if v >= 1 => Ok(Depth::Limit(v as usize)),
            Scalar::Text(t) if t.trim() == "none" => Ok(Depth::Unlimited),
            _ => Err("max_depth must be a positive integer or \"none\"".into()),
        }
    }
}

impl From<Depth> for Scalar {
    fn from(d: Depth) -> Self {
        match d {
            Depth::Limit(v) => Scalar::Int(v as i64),
            Depth::Unlimited => Scalar::Text("none".into()),
        }
    }
}

impl fmt::Display for Gamma {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Gamma::Fixed(v) => write!(f, "{v}"),
            Gamma::InverseDim => f.write_str("1/d"),
        }
    }
}

/// Candidate lists for every hyperparameter. Candidates expand in the order
/// C, gamma, degree (SVMs) and max_depth, min_leaf (trees), each list in the
/// order written.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub c: Vec<f64>,
    pub gamma: Vec<Gamma>,
    pub degree: Vec<u32>,
    pub coef0: Vec<f64>,
    pub k: Vec<usize>,
    pub max_depth: Vec<Depth>,
    pub min_leaf: Vec<usize>,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self::builtin()
    }
}

impl GridSpec {
    pub fn builtin() -> Self {
        Self::from_toml(include_str!("../../config/grid.toml")).expect("bundled grid is valid")
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let grid: Self = toml::from_str(text).map_err(|e| Error::config(e.to_string()))?;
        grid.validate()?;
        Ok(grid)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text).map_err(|e| Error::config(format!("{}: {e}", path.display())))
    }

    pub fn validate(&self) -> Result<()> {
        let lists = [
            ("c", self.c.is_empty()),
            ("gamma", self.gamma.is_empty()),
            ("degree", self.degree.is_empty()),
            ("coef0", self.coef0.is_empty()),
            ("k", self.k.is_empty()),
            ("max_depth", self.max_depth.is_empty()),
            ("min_leaf", self.min_leaf.is_empty()),
        ];
        if let Some((name, _)) = lists.iter().find(|(_, empty)| *empty) {
            return Err(Error::config(format!("grid list `{name}` is empty")));
        }
        if self.c.iter().any(|&c| !(c > 0.0 && c.is_finite())) {
            return Err(Error::config("every C must be positive"));
        }
        if self.degree.contains(&0) || self.k.contains(&0) || self.min_leaf.contains(&0) {
            return Err(Error::config("degree, k and min_leaf must be at least 1"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_grid() {
        let g = GridSpec::builtin();
        assert_eq!(g.c, [0.1, 1.0, 10.0, 100.0, 1000.0]);
        assert_eq!(
            g.gamma,
            [
                Gamma::InverseDim,
                Gamma::Fixed(0.01),
                Gamma::Fixed(0.1),
                Gamma::Fixed(1.0)
            ]
        );
        assert_eq!(g.degree, [2, 3]);
        assert_eq!(g.k, [1, 3, 5, 7, 9]);
        assert_eq!(
            g.max_depth,
            [
                Depth::Limit(3),
                Depth::Limit(5),
                Depth::Limit(8),
                Depth::Unlimited
            ]
        );
        assert_eq!(g.min_leaf, [1, 3, 5]);
        assert_eq!(Gamma::InverseDim.resolve(56), 1.0 / 56.0);
    }

    #[test]
    fn round_trips_through_toml() {
        let g = GridSpec::builtin();
        let text = toml::to_string(&g).unwrap();
        assert_eq!(GridSpec::from_toml(&text).unwrap(), g);
    }

    #[test]
    fn rejects_bad_lists() {
        let base = toml::to_string(&GridSpec::builtin()).unwrap();
        let empty_k = base.replace("k = [1, 3, 5, 7, 9]", "k = []");
        assert_ne!(empty_k, base);
        assert!(GridSpec::from_toml(&empty_k).is_err());
        assert!(GridSpec::from_toml(&base.replace("\"1/d\"", "\"1/x\"")).is_err());
        assert!(GridSpec::from_toml(&base.replace("\"none\"", "0")).is_err());
    }
}
