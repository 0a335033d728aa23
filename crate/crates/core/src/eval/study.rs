use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, Modality, ResolutionScheme};
use crate::error::{Error, Result};
use crate::learn::{grid_search, Algorithm, CvOptions, GridSpec, Hyperparams};

/// Grid-searched leave-one-out result for one algorithm on one feature set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub algorithm: String,
    pub modality: Modality,
    pub scheme: String,
    pub n_features: usize,
    pub best: Hyperparams,
    pub accuracy: f64,
    /// Held-out prediction of every frame under `best`, in dataset order.
    pub predictions: Vec<usize>,
    /// Accuracy of every candidate in grid order.
    pub scores: Vec<(Hyperparams, f64)>,
}

/// Runs the grid search for `algorithm` on features reduced by `scheme`.
pub fn evaluate_cell(
    ds: &Dataset,
    scheme: &ResolutionScheme,
    algorithm: &dyn Algorithm,
    grid: &GridSpec,
    opts: &CvOptions,
) -> Result<Cell> {
    let rows = ds.features(scheme)?;
    let n_features = scheme.output_dim();
    let candidates = algorithm.candidates(grid, n_features);
    let found = grid_search(
        &rows,
        &ds.targets(),
        ds.labels.len(),
        algorithm,
        &candidates,
        opts,
    )?;
    Ok(Cell {
        algorithm: algorithm.name().to_string(),
        modality: scheme.modality,
        scheme: scheme.name.clone(),
        n_features,
        accuracy: found.accuracy(),
        best: found.best,
        predictions: found.loocv.predictions,
        scores: found.scores,
    })
}

/// Every algorithm on full-resolution tactile and pressure features.
/// Cells are algorithm-major, tactile before pressure.
pub fn modality_comparison(
    ds: &Dataset,
    algorithms: &[&dyn Algorithm],
    grid: &GridSpec,
    opts: &CvOptions,
) -> Result<Vec<Cell>> {
    let mut cells = Vec::with_capacity(2 * algorithms.len());
    for &alg in algorithms {
        for modality in [Modality::Tactile, Modality::Pressure] {
            let scheme = ResolutionScheme::identity(modality);
            cells.push(evaluate_cell(ds, &scheme, alg, grid, opts)?);
        }
    }
    Ok(cells)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub scheme: String,
    pub modality: Modality,
    pub units_per_finger: usize,
    pub n_features: usize,
    pub accuracy: f64,
    pub best: Hyperparams,
    pub predictions: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub algorithm: String,
    /// One row per requested scheme, in request order.
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    pub fn row(&self, scheme: &str) -> Option<&SweepRow> {
        self.rows.iter().find(|r| r.scheme == scheme)
    }
}

/// Re-optimizes `algorithm` separately on every scheme.
pub fn resolution_sweep(
    ds: &Dataset,
    schemes: &[ResolutionScheme],
    algorithm: &dyn Algorithm,
    grid: &GridSpec,
    opts: &CvOptions,
) -> Result<SweepResult> {
    resolution_sweep_with_cells(ds, schemes, algorithm, grid, opts, &[])
}

/// As [`resolution_sweep`], but identity schemes take their row from a
/// matching cell in `known` instead of repeating its grid search. `known`
/// must come from [`modality_comparison`] on the same dataset and grid.
pub fn resolution_sweep_with_cells(
    ds: &Dataset,
    schemes: &[ResolutionScheme],
    algorithm: &dyn Algorithm,
    grid: &GridSpec,
    opts: &CvOptions,
    known: &[Cell],
) -> Result<SweepResult> {
    for (i, s) in schemes.iter().enumerate() {
        if schemes[..i].iter().any(|o| o.name == s.name) {
            return Err(Error::config(format!(
                "scheme `{}` requested twice",
                s.name
            )));
        }
    }
    let rows = schemes
        .iter()
        .map(|s| {
            let reuse = known.iter().find(|c| {
                c.algorithm == algorithm.name()
                    && c.scheme == s.name
                    && *s == ResolutionScheme::identity(s.modality)
            });
            let cell = match reuse {
                Some(c) => c.clone(),
                None => evaluate_cell(ds, s, algorithm, grid, opts)?,
            };
            Ok(SweepRow {
                scheme: cell.scheme,
                modality: cell.modality,
                units_per_finger: s.units_per_finger(),
                n_features: cell.n_features,
                accuracy: cell.accuracy,
                best: cell.best,
                predictions: cell.predictions,
            })
        })
        .collect::<Result<_>>()?;
    Ok(SweepResult {
        algorithm: algorithm.name().to_string(),
        rows,
    })
}
