mod support;

use support::*;
use taxelsim::learn::{loocv, loocv_many, CvOptions, GridSpec, KernelSpec, Registry, SmoParams};

/// KKT tolerance for the probe comparison. At the default 1e-3 the decision
/// value of a probe point lying within ~1e-3 of the boundary may change sign.
const PROBE_TOLERANCE: f64 = 1e-6;

#[test]
fn smo_matches_projected_gradient_on_random_problems() {
    let mut rng = seeded(5);
    for trial in 0..50 {
        let p = random_binary_problem(&mut rng);
        let (check, report, _) = check_smo_against_oracle(&p, PROBE_TOLERANCE);
        assert!(report.converged, "trial {trial}");
        assert!(
            check.objective_gap <= 1e-3,
            "trial {trial}: gap {}",
            check.objective_gap
        );
        assert_eq!(check.probe_mismatches, 0, "trial {trial}");
        assert!(check.worst_alpha_violation <= 0.0, "trial {trial}");
        assert!(check.worst_equality_residual <= 1e-9, "trial {trial}");
    }
}

#[test]
fn default_tolerance_reaches_the_oracle_objective() {
    let mut rng = seeded(5);
    for trial in 0..50 {
        let p = random_binary_problem(&mut rng);
        let (check, report, _) = check_smo_against_oracle(&p, SmoParams::default().tolerance);
        assert!(report.converged, "trial {trial}");
        assert!(
            check.objective_gap <= 1e-3,
            "trial {trial}: gap {}",
            check.objective_gap
        );
    }
}

#[test]
fn xor_matches_oracle() {
    let p = BinaryProblem {
        rows: vec![
            vec![1.0, 1.0],
            vec![-1.0, -1.0],
            vec![1.0, -1.0],
            vec![-1.0, 1.0],
        ],
        y: vec![1.0, 1.0, -1.0, -1.0],
        kernel: KernelSpec::rbf(1.0),
        c: 10.0,
    };
    let (check, _, model) = check_smo_against_oracle(&p, 1e-3);
    assert!(check.objective_gap <= 1e-3);
    assert_eq!(check.probe_mismatches, 0);
    for (r, &t) in p.rows.iter().zip(&p.y) {
        assert_eq!(model.predict(r).unwrap(), t);
    }
}

#[test]
fn loocv_matches_brute_force_fold_enumeration() {
    let registry = Registry::builtin();
    let grid = GridSpec::builtin();
    let mut rng = seeded(11);
    for trial in 0..20 {
        let (rows, labels, n_classes) = random_dataset(&mut rng);
        for name in registry.names() {
            let alg = registry.require(name).unwrap();
            let cands: Vec<_> = alg
                .candidates(&grid, rows[0].len())
                .into_iter()
                .filter(
                    |c| !matches!(c, taxelsim::learn::Hyperparams::Knn { k } if *k >= rows.len()),
                )
                .step_by(3)
                .collect();
            let many = loocv_many(
                &rows,
                &labels,
                n_classes,
                alg.as_ref(),
                &cands,
                &CvOptions { jobs: 2 },
            )
            .unwrap();
            for (params, got) in cands.iter().zip(&many) {
                let expect = brute_force_loocv(&rows, &labels, n_classes, alg.as_ref(), params);
                assert_eq!(got.predictions, expect, "trial {trial} {name} {params}");
                let single = loocv(&rows, &labels, n_classes, |t| alg.fit(t, params)).unwrap();
                assert_eq!(single.predictions, expect);
            }
        }
    }
}

proptest::proptest! {
    #![proptest_config(proptest::prelude::ProptestConfig::with_cases(64))]
    #[test]
    fn smo_stays_feasible_and_monotone(seed in 0u64..1_000_000) {
        let p = random_binary_problem(&mut seeded(seed));
        let (check, report, _) = check_smo_against_oracle(&p, 1e-3);
        proptest::prop_assert!(check.worst_alpha_violation <= 0.0);
        proptest::prop_assert!(check.worst_equality_residual <= 1e-9);
        for w in report.trace.windows(2) {
            proptest::prop_assert!(w[1].objective >= w[0].objective - 1e-9);
        }
    }
}
