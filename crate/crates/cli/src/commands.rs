use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use taxelsim::dataset::{load_dataset, save_dataset, Dataset, ResolutionScheme, FRAME_DIM};
use taxelsim::eval::{modality_comparison, resolution_sweep_with_cells, Report, ReportProvenance};
use taxelsim::grasp::generate_dataset;
use taxelsim::learn::{grid_search, Algorithm, CvOptions, FittedModel, Registry};
use taxelsim::sensor::{characteristic_curve, hysteresis_loop, ReadoutConfig};

use crate::{CliError, RunConfig};

/// Files written by a command and a human-readable summary.
#[derive(Debug)]
pub struct Outcome {
    pub files: Vec<PathBuf>,
    pub summary: String,
}

fn create_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| taxelsim::Error::Io {
        path: dir.to_path_buf(),
        source: e,
    })?;
    Ok(())
}

fn write_file(path: PathBuf, body: &str) -> Result<PathBuf, CliError> {
    fs::write(&path, body).map_err(|e| taxelsim::Error::Io {
        path: path.clone(),
        source: e,
    })?;
    Ok(path)
}

/// Characteristic curves for every configured pull-up and a hysteresis loop
/// from a triangular ramp.
pub fn curves(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let c = &cfg.curves;
    if c.pullups.is_empty() {
        return Err(CliError::Usage(
            "at least one pull-up resistance is required".into(),
        ));
    }
    if let Some(bad) = c.pullups.iter().find(|r| !(r.is_finite() && **r > 0.0)) {
        return Err(CliError::Usage(format!(
            "pull-up resistance {bad} is not positive"
        )));
    }
    if c.points < 2 || !(c.max_pressure > 0.0) {
        return Err(CliError::Usage(
            "curves need points >= 2 and max_pressure > 0".into(),
        ));
    }
    let step = c.max_pressure / (c.points - 1) as f64;
    let pressures: Vec<f64> = (0..c.points).map(|i| i as f64 * step).collect();
    let mut csv = String::from("pressure_kpa,voltage_v,pullup_ohm\n");
    for &pullup in &c.pullups {
        let readout = ReadoutConfig {
            pullup_resistance: pullup,
            ..cfg.hand.readout
        };
        for (p, v) in characteristic_curve(&cfg.hand.piezo, &readout, &pressures)? {
            let _ = writeln!(csv, "{p},{v},{pullup}");
        }
    }
    let ramp = hysteresis_loop(
        &cfg.hand.piezo,
        cfg.hand.relaxation,
        &cfg.hand.readout,
        c.ramp_peak,
        c.ramp_duration,
    )?;
    let mut loop_csv = String::from("time_s,input_kpa,effective_kpa,voltage_v,branch\n");
    for s in &ramp {
        let branch = if s.unloading { "unload" } else { "load" };
        let _ = writeln!(
            loop_csv,
            "{},{},{},{},{branch}",
            s.time, s.input_pressure, s.effective_pressure, s.voltage
        );
    }
    create_dir(&cfg.out)?;
    let files = vec![
        write_file(cfg.out.join("curves.csv"), &csv)?,
        write_file(cfg.out.join("hysteresis.csv"), &loop_csv)?,
    ];
    let summary = format!(
        "{} curves of {} points, hysteresis loop of {} samples\n",
        c.pullups.len(),
        c.points,
        ramp.len()
    );
    Ok(Outcome { files, summary })
}

fn generate_from(cfg: &RunConfig) -> Result<Dataset, CliError> {
    if cfg.grasps_per_object == 0 {
        return Err(CliError::Usage("grasps_per_object must be > 0".into()));
    }
    let specs = cfg.object_specs()?;
    Ok(generate_dataset(
        &specs,
        cfg.grasps_per_object,
        &cfg.hand,
        cfg.seed,
    )?)
}

fn dataset_summary(ds: &Dataset) -> String {
    let mut s = format!("{} frames, {FRAME_DIM} features\n", ds.len());
    for (label, n) in ds.labels.iter().zip(ds.class_counts()) {
        let _ = writeln!(s, "  {label}: {n}");
    }
    s
}

/// Simulates the grasp protocol and writes the dataset file.
pub fn generate(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let ds = generate_from(cfg)?;
    let path = cfg.dataset_path();
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        create_dir(dir)?;
    }
    save_dataset(&ds, &path)?;
    Ok(Outcome {
        summary: dataset_summary(&ds),
        files: vec![path],
    })
}

/// The configured dataset file, or a freshly generated dataset without one.
pub fn obtain_dataset(cfg: &RunConfig) -> Result<Dataset, CliError> {
    match &cfg.dataset {
        Some(p) => Ok(load_dataset(p)?),
        None => generate_from(cfg),
    }
}

fn provenance(
    cfg: &RunConfig,
    ds: &Dataset,
    schemes: Vec<ResolutionScheme>,
) -> Result<ReportProvenance, CliError> {
    let run = serde_json::json!({
        "config": cfg,
        "objects": cfg.object_specs()?,
    });
    Ok(ReportProvenance {
        seed: ds.provenance.seed,
        config_hash: ds.provenance.config_hash.clone(),
        grid: cfg.grid_spec()?,
        schemes,
        run,
        version: env!("CARGO_PKG_VERSION").into(),
    })
}

fn report_summary(r: &Report) -> String {
    let mut s = String::new();
    if !r.cells.is_empty() {
        s.push_str("algorithm   modality  accuracy  best\n");
        for c in &r.cells {
            let _ = writeln!(
                s,
                "{:<11} {:<9} {:<9.4} {}",
                c.algorithm, c.modality, c.accuracy, c.best
            );
        }
    }
    for c in &r.confusion {
        let _ = writeln!(
            s,
            "{} {}: within-group error share {}",
            c.algorithm,
            c.modality,
            c.groups.share_display()
        );
    }
    if let Some(sweep) = &r.sweep {
        let _ = writeln!(s, "resolution sweep ({})", sweep.algorithm);
        for row in &sweep.rows {
            let _ = writeln!(
                s,
                "  {:<4} {:>2} units/finger  {:.4}",
                row.scheme, row.units_per_finger, row.accuracy
            );
        }
    }
    for t in &r.trends {
        let rho = t.rho.map_or("n/a".to_string(), |v| format!("{v:.4}"));
        let _ = writeln!(
            s,
            "spearman {} [{}]: {rho}",
            t.modality,
            t.schemes.join(" ")
        );
    }
    s
}

fn run_study(cfg: &RunConfig, with_table: bool) -> Result<Outcome, CliError> {
    if cfg.jobs == 0 {
        return Err(CliError::Usage("--jobs must be at least 1".into()));
    }
    let ds = obtain_dataset(cfg)?;
    let registry = Registry::builtin();
    let grid = cfg.grid_spec()?;
    let schemes = cfg.scheme_set()?.select(&cfg.schemes)?;
    let opts = CvOptions { jobs: cfg.jobs };
    let cells = if with_table {
        let algs = cfg
            .algorithms
            .iter()
            .map(|n| registry.require(n))
            .collect::<taxelsim::Result<Vec<_>>>()?;
        let refs: Vec<&dyn Algorithm> = algs.iter().map(|a| a.as_ref()).collect();
        modality_comparison(&ds, &refs, &grid, &opts)?
    } else {
        Vec::new()
    };
    let sweep = if schemes.is_empty() {
        None
    } else {
        let alg = registry.require(&cfg.sweep_algorithm)?;
        Some(resolution_sweep_with_cells(
            &ds,
            &schemes,
            alg.as_ref(),
            &grid,
            &opts,
            &cells,
        )?)
    };
    let report = Report::build(&ds, cells, sweep, provenance(cfg, &ds, schemes)?)?;
    let files = report.write(&cfg.out)?;
    Ok(Outcome {
        summary: report_summary(&report),
        files,
    })
}

/// Classifier comparison, confusion and group analysis, and the sweep.
pub fn evaluate(cfg: &RunConfig) -> Result<Outcome, CliError> {
    run_study(cfg, true)
}

/// Only the resolution sweep.
pub fn sweep(cfg: &RunConfig) -> Result<Outcome, CliError> {
    run_study(cfg, false)
}

/// Grid-searches one algorithm and fits it on the whole dataset.
pub fn train(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let t = &cfg.train;
    let scheme = match &t.scheme {
        Some(name) => cfg
            .scheme_set()?
            .get(name)
            .cloned()
            .ok_or_else(|| CliError::Usage(format!("unknown scheme `{name}`")))?,
        None => ResolutionScheme::identity(t.modality),
    };
    if scheme.modality != t.modality {
        return Err(CliError::Usage(format!(
            "scheme {} reads {} features, not {}",
            scheme.name, scheme.modality, t.modality
        )));
    }
    let ds = obtain_dataset(cfg)?;
    let alg = Registry::builtin().require(&t.algorithm)?;
    let rows = ds.features(&scheme)?;
    let targets = ds.targets();
    let candidates = alg.candidates(&cfg.grid_spec()?, scheme.output_dim());
    let found = grid_search(
        &rows,
        &targets,
        ds.labels.len(),
        alg.as_ref(),
        &candidates,
        &CvOptions {
            jobs: cfg.jobs.max(1),
        },
    )?;
    let model = FittedModel::train(
        alg.as_ref(),
        &found.best,
        &rows,
        &targets,
        &ds.labels,
        &scheme.feature_names(),
    )?;
    create_dir(&cfg.out)?;
    let path = cfg.out.join(&t.model_file);
    model.save(&path)?;
    Ok(Outcome {
        summary: format!(
            "{} on {}: {} (leave-one-out accuracy {:.4})\n",
            t.algorithm,
            scheme.name,
            found.best,
            found.accuracy()
        ),
        files: vec![path],
    })
}
