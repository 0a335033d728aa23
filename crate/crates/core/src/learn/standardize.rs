use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Features whose spread falls below this are treated as constant.
const MIN_SCALE: f64 = 1e-12;

/// Per-feature z-scoring fitted on training rows only.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    /// Population standard deviation; 0 marks a constant feature.
    pub std: Vec<f64>,
}

impl Standardizer {
    pub fn fit<'a, I>(rows: I) -> Result<Self>
    where
        I: IntoIterator<Item = &'a [f64]>,
        I::IntoIter: Clone,
    {
        let rows = rows.into_iter();
        let dim = rows
            .clone()
            .next()
            .map(<[f64]>::len)
            .ok_or_else(|| Error::Training("cannot standardize an empty set".into()))?;
        let mut n = 0usize;
        let mut mean = vec![0.0; dim];
        for row in rows.clone() {
            if row.len() != dim {
                return Err(Error::domain("rows differ in dimension"));
            }
            n += 1;
            for (m, v) in mean.iter_mut().zip(row) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n as f64);
        let mut var = vec![0.0; dim];
        for row in rows {
            for ((s, v), m) in var.iter_mut().zip(row).zip(&mean) {
                *s += (v - m) * (v - m);
            }
        }
        let std = var
            .into_iter()
            .map(|s| {
                let sd = (s / n as f64).sqrt();
                if sd > MIN_SCALE {
                    sd
                } else {
                    0.0
                }
            })
            .collect();
        Ok(Self { mean, std })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn transform(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.dim() {
            return Err(Error::domain(format!(
                "expected {} features, got {}",
                self.dim(),
                x.len()
            )));
        }
        Ok(x.iter()
            .zip(self.mean.iter().zip(&self.std))
            .map(|(v, (m, s))| if *s > 0.0 { (v - m) / s } else { 0.0 })
            .collect())
    }
}
