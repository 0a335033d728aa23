use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelKind {
    Linear,
    Polynomial,
    Rbf,
}

/// Kernel function with its parameters. `gamma` is unused by the linear
/// kernel, `degree` and `coef0` only by the polynomial one.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub kind: KernelKind,
    pub gamma: f64,
    pub degree: u32,
    pub coef0: f64,
}

impl KernelSpec {
    pub fn linear() -> Self {
        Self {
            kind: KernelKind::Linear,
            gamma: 1.0,
            degree: 1,
            coef0: 0.0,
        }
    }

    pub fn rbf(gamma: f64) -> Self {
        Self {
            kind: KernelKind::Rbf,
            gamma,
            degree: 1,
            coef0: 0.0,
        }
    }

    pub fn polynomial(gamma: f64, degree: u32, coef0: f64) -> Self {
        Self {
            kind: KernelKind::Polynomial,
            gamma,
            degree,
            coef0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self.kind {
            KernelKind::Linear => Ok(()),
            KernelKind::Rbf if self.gamma > 0.0 && self.gamma.is_finite() => Ok(()),
            KernelKind::Polynomial
                if self.gamma > 0.0 && self.degree >= 1 && self.coef0.is_finite() =>
            {
                Ok(())
            }
            _ => Err(Error::config(format!("invalid kernel parameters {self:?}"))),
        }
    }

    /// Kernel value from a precomputed dot product and squared distance.
    #[inline]
    pub fn from_parts(&self, dot: f64, sqdist: f64) -> f64 {
        match self.kind {
            KernelKind::Linear => dot,
            KernelKind::Polynomial => (self.gamma * dot + self.coef0).powi(self.degree as i32),
            KernelKind::Rbf => (-self.gamma * sqdist).exp(),
        }
    }

    #[inline]
    pub(crate) fn eval_unchecked(&self, x: &[f64], y: &[f64]) -> f64 {
        match self.kind {
            KernelKind::Rbf => (-self.gamma * sqdist(x, y)).exp(),
            _ => self.from_parts(dot(x, y), 0.0),
        }
    }

    /// Cache key: kernels that produce identical matrices share it.
    pub(crate) fn cache_key(&self) -> (KernelKind, u64, u32, u64) {
        match self.kind {
            KernelKind::Linear => (self.kind, 0, 0, 0),
            KernelKind::Rbf => (self.kind, self.gamma.to_bits(), 0, 0),
            KernelKind::Polynomial => (
                self.kind,
                self.gamma.to_bits(),
                self.degree,
                self.coef0.to_bits(),
            ),
        }
    }
}

#[inline]
pub(crate) fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

#[inline]
pub(crate) fn sqdist(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum()
}

pub fn kernel_eval(spec: &KernelSpec, x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::domain(format!(
            "kernel arguments differ in dimension: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    Ok(spec.eval_unchecked(x, y))
}
