use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use taxelsim::dataset::load_dataset;
use taxelsim::eval::Report;
use taxelsim::learn::FittedModel;

fn taxelsim(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_taxelsim"))
        .current_dir(dir)
        .env_remove("TAXELSIM_SEED")
        .args(args)
        .output()
        .unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const SMALL_GRID: &str = "c = [1.0, 10.0]\ngamma = [\"1/d\"]\ndegree = [2]\ncoef0 = [1.0]\n\
                          k = [1, 3]\nmax_depth = [3, \"none\"]\nmin_leaf = [1]\n";

fn small_config(dir: &Path, extra: &str) -> String {
    fs::write(dir.join("grid.toml"), SMALL_GRID).unwrap();
    let cfg = format!(
        "grasps_per_object = 3\ngrid = \"grid.toml\"\nalgorithms = [\"knn\", \"dt\"]\n\
         sweep_algorithm = \"knn\"\n{extra}"
    );
    fs::write(dir.join("run.toml"), cfg).unwrap();
    "run.toml".into()
}

#[test]
fn curves_are_written_once_per_pullup_and_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    for out in ["a", "b"] {
        let o = taxelsim(dir.path(), &["curves", "--out", out]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
    }
    let text = fs::read_to_string(dir.path().join("a/curves.csv")).unwrap();
    assert_eq!(
        text.lines().next(),
        Some("pressure_kpa,voltage_v,pullup_ohm")
    );
    let mut pullups: Vec<String> = text
        .lines()
        .skip(1)
        .map(|l| l.rsplit(',').next().unwrap().to_string())
        .collect();
    pullups.dedup();
    assert_eq!(pullups.len(), 5);
    for name in ["curves.csv", "hysteresis.csv"] {
        assert_eq!(
            fs::read(dir.path().join("a").join(name)).unwrap(),
            fs::read(dir.path().join("b").join(name)).unwrap()
        );
    }
    let hyst = fs::read_to_string(dir.path().join("a/hysteresis.csv")).unwrap();
    assert!(hyst.contains(",load\n") && hyst.contains(",unload\n"));
}

#[test]
fn empty_pullup_list_is_a_usage_error_without_files() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("run.toml"), "[curves]\npullups = []\n").unwrap();
    let o = taxelsim(
        dir.path(),
        &["curves", "--config", "run.toml", "--out", "o"],
    );
    assert_eq!(code(&o), 1);
    assert!(!dir.path().join("o").exists());
}

#[test]
fn unknown_subcommand_and_bad_flag_are_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&taxelsim(dir.path(), &["frobnicate"])), 1);
    assert_eq!(code(&taxelsim(dir.path(), &["generate", "--seed", "x"])), 1);
}

#[test]
fn generate_single_grasp_per_object() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("run.toml"), "grasps_per_object = 1\n").unwrap();
    let o = taxelsim(
        dir.path(),
        &["generate", "--config", "run.toml", "--seed", "3"],
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(String::from_utf8_lossy(&o.stdout).contains("9 frames, 64 features"));
    let ds = load_dataset(&dir.path().join("out/dataset.jsonl")).unwrap();
    assert_eq!(ds.len(), 9);
    assert_eq!(ds.provenance.seed, 3);
}

#[test]
fn seed_comes_from_flag_then_environment_then_file() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("run.toml"),
        "grasps_per_object = 1\nseed = 5\n",
    )
    .unwrap();
    let seed_of = |env: Option<&str>, flag: Option<&str>, out: &str| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_taxelsim"));
        cmd.current_dir(dir.path()).env_remove("TAXELSIM_SEED");
        if let Some(e) = env {
            cmd.env("TAXELSIM_SEED", e);
        }
        cmd.args(["generate", "--config", "run.toml", "--out", out]);
        if let Some(f) = flag {
            cmd.args(["--seed", f]);
        }
        assert!(cmd.status().unwrap().success());
        load_dataset(&dir.path().join(out).join("dataset.jsonl"))
            .unwrap()
            .provenance
            .seed
    };
    assert_eq!(seed_of(None, None, "a"), 5);
    assert_eq!(seed_of(Some("7"), None, "b"), 7);
    assert_eq!(seed_of(Some("7"), Some("8"), "c"), 8);
}

#[test]
fn missing_and_malformed_object_files() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("run.toml"), "objects = \"nowhere.toml\"\n").unwrap();
    let o = taxelsim(dir.path(), &["generate", "--config", "run.toml"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("nowhere.toml"));

    fs::write(
        dir.path().join("objs.toml"),
        "[[object]]\nname = \"a\"\ngroup = \"bottle\"\nstifness = 1\n",
    )
    .unwrap();
    fs::write(dir.path().join("run.toml"), "objects = \"objs.toml\"\n").unwrap();
    let o = taxelsim(dir.path(), &["generate", "--config", "run.toml"]);
    assert_eq!(code(&o), 3);
    let err = stderr(&o);
    assert!(err.contains("objs.toml") && err.contains("line"), "{err}");

    let o = taxelsim(dir.path(), &["generate", "--config", "absent.toml"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("absent.toml"));
}

#[test]
fn evaluate_writes_report_and_tables() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path(), "schemes = [\"T14\"]\n");
    let o = taxelsim(dir.path(), &["evaluate", "--config", &cfg, "--seed", "11"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let out = dir.path().join("out");
    for f in [
        "report.json",
        "table1.csv",
        "confusion_tactile.csv",
        "confusion_pressure.csv",
        "groups.csv",
        "sweep.csv",
    ] {
        assert!(out.join(f).exists(), "{f}");
    }
    let report = Report::from_json(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report.provenance.seed, 11);
    assert_eq!(report.provenance.run["config"]["seed"], 11);
    assert_eq!(report.cells.len(), 4);
    let sweep = report.sweep.unwrap();
    assert_eq!(sweep.rows.len(), 1);
    assert_eq!(sweep.rows[0].scheme, "T14");
    assert_eq!(sweep.rows[0].predictions, report.cells[0].predictions);
}

#[test]
fn evaluate_is_byte_identical_across_runs_and_jobs() {
    let root = tempfile::tempdir().unwrap();
    for (run, jobs) in [("a", "1"), ("b", "1"), ("c", "2")] {
        let dir = root.path().join(run);
        fs::create_dir(&dir).unwrap();
        let cfg = small_config(&dir, "schemes = [\"T2\", \"P1\"]\n");
        let o = taxelsim(&dir, &["evaluate", "--config", &cfg, "--jobs", jobs]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
    }
    let read =
        |run: &str, name: &str| fs::read(root.path().join(run).join("out").join(name)).unwrap();
    for name in [
        "table1.csv",
        "groups.csv",
        "sweep.csv",
        "confusion_tactile.csv",
    ] {
        assert_eq!(read("a", name), read("b", name), "{name}");
        assert_eq!(read("a", name), read("c", name), "{name}");
    }
    assert_eq!(read("a", "report.json"), read("b", "report.json"));
}

#[test]
fn report_provenance_reproduces_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path(), "schemes = [\"T1\"]\n");
    let o = taxelsim(
        dir.path(),
        &["evaluate", "--config", &cfg, "--seed", "4", "--out", "a"],
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let first = fs::read_to_string(dir.path().join("a/report.json")).unwrap();
    let report = Report::from_json(&first).unwrap();
    // Rebuild a config file from the provenance block alone.
    let mut config: taxelsim_cli::RunConfig =
        serde_json::from_value(report.provenance.run["config"].clone()).unwrap();
    fs::write(
        dir.path().join("grid2.toml"),
        toml::to_string(&report.provenance.grid).unwrap(),
    )
    .unwrap();
    config.grid = Some("grid2.toml".into());
    fs::write(
        dir.path().join("again.toml"),
        toml::to_string(&config).unwrap(),
    )
    .unwrap();
    let o = taxelsim(
        dir.path(),
        &["evaluate", "--config", "again.toml", "--out", "b"],
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let second =
        Report::from_json(&fs::read_to_string(dir.path().join("b/report.json")).unwrap()).unwrap();
    assert_eq!(second.cells, report.cells);
    assert_eq!(second.sweep, report.sweep);
    assert_eq!(second.provenance.grid, report.provenance.grid);
}

#[test]
fn sweep_only_writes_the_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path(), "schemes = [\"T1\", \"P1\"]\n");
    let o = taxelsim(dir.path(), &["sweep", "--config", &cfg]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let out = dir.path().join("out");
    assert!(out.join("sweep.csv").exists());
    assert!(!out.join("table1.csv").exists());
    let sweep = fs::read_to_string(out.join("sweep.csv")).unwrap();
    assert_eq!(sweep.lines().count(), 3);
}

#[test]
fn dataset_schema_mismatch_reports_versions() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path(), "");
    let o = taxelsim(dir.path(), &["generate", "--config", &cfg]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let path = dir.path().join("out/dataset.jsonl");
    let text = fs::read_to_string(&path)
        .unwrap()
        .replacen("\"schema\":1", "\"schema\":9", 1);
    fs::write(dir.path().join("old.jsonl"), text).unwrap();
    let o = taxelsim(
        dir.path(),
        &["evaluate", "--config", &cfg, "--dataset", "old.jsonl"],
    );
    assert_eq!(code(&o), 3);
    let err = stderr(&o);
    assert!(err.contains('1') && err.contains('9'), "{err}");

    let o = taxelsim(
        dir.path(),
        &["evaluate", "--config", &cfg, "--dataset", "gone.jsonl"],
    );
    assert_eq!(code(&o), 2);
}

#[test]
fn train_saves_a_loadable_model() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(
        dir.path(),
        "[train]\nalgorithm = \"knn\"\nmodality = \"tactile\"\nscheme = \"T4\"\n",
    );
    let o = taxelsim(dir.path(), &["generate", "--config", &cfg]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let o = taxelsim(
        dir.path(),
        &["train", "--config", &cfg, "--dataset", "out/dataset.jsonl"],
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let model = FittedModel::load(&dir.path().join("out/model.json")).unwrap();
    assert_eq!(model.algorithm, "knn");
    assert_eq!(model.feature_names.len(), 16);
    let ds = load_dataset(&dir.path().join("out/dataset.jsonl")).unwrap();
    let scheme = taxelsim::dataset::SchemeSet::builtin()
        .get("T4")
        .unwrap()
        .clone();
    let x = scheme.apply(&ds.frames[0]);
    assert!(ds.labels.iter().any(|l| l == model.predict(&x).unwrap()));

    let bad = small_config(
        dir.path(),
        "[train]\nmodality = \"pressure\"\nscheme = \"T4\"\n",
    );
    assert_eq!(code(&taxelsim(dir.path(), &["train", "--config", &bad])), 1);
}
