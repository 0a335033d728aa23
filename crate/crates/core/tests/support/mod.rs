//! Reference implementations used as test oracles. They share no code with
//! the library beyond its public types.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use taxelsim::learn::{
    kernel_eval, svm_train_smo, Algorithm, BinarySvm, Hyperparams, KernelSpec, SmoParams,
    SmoReport, TrainSet,
};

/// Random binary problem in the plane with both classes present.
pub struct BinaryProblem {
    pub rows: Vec<Vec<f64>>,
    pub y: Vec<f64>,
    pub kernel: KernelSpec,
    pub c: f64,
}

pub fn random_binary_problem(rng: &mut ChaCha8Rng) -> BinaryProblem {
    let n = rng.random_range(4..=20);
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|_| vec![rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)])
        .collect();
    let tilt: f64 = rng.random_range(-1.0..1.0);
    let mut y: Vec<f64> = rows
        .iter()
        .map(|r| {
            let noisy = r[1] - tilt * r[0] + rng.random_range(-0.8..0.8);
            if noisy >= 0.0 {
                1.0
            } else {
                -1.0
            }
        })
        .collect();
    y[0] = 1.0;
    y[1] = -1.0;
    let kernel = match rng.random_range(0..3) {
        0 => KernelSpec::linear(),
        1 => KernelSpec::polynomial(0.5, 2, 1.0),
        _ => KernelSpec::rbf(rng.random_range(0.2..2.0)),
    };
    let c = [0.1, 1.0, 10.0, 100.0][rng.random_range(0..4)];
    BinaryProblem { rows, y, kernel, c }
}

pub fn gram(rows: &[Vec<f64>], kernel: &KernelSpec) -> Vec<Vec<f64>> {
    rows.iter()
        .map(|a| {
            rows.iter()
                .map(|b| kernel_eval(kernel, a, b).unwrap())
                .collect()
        })
        .collect()
}

pub fn dual_value(k: &[Vec<f64>], y: &[f64], alpha: &[f64]) -> f64 {
    let n = y.len();
    let mut quad = 0.0;
    for i in 0..n {
        for j in 0..n {
            quad += alpha[i] * alpha[j] * y[i] * y[j] * k[i][j];
        }
    }
    alpha.iter().sum::<f64>() - 0.5 * quad
}

/// Euclidean projection onto `{0 <= a <= C, y.a = 0}` by bisection on the
/// multiplier of the equality constraint.
fn project(v: &[f64], y: &[f64], c: f64) -> Vec<f64> {
    let at = |lambda: f64| -> Vec<f64> {
        v.iter()
            .zip(y)
            .map(|(vi, yi)| (vi - lambda * yi).clamp(0.0, c))
            .collect()
    };
    let residual = |a: &[f64]| a.iter().zip(y).map(|(ai, yi)| ai * yi).sum::<f64>();
    let span = v.iter().map(|x| x.abs()).fold(0.0, f64::max) + c + 1.0;
    let (mut lo, mut hi) = (-span, span);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if residual(&at(mid)) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    at(0.5 * (lo + hi))
}

/// Accelerated projected gradient ascent on the SVM dual.
pub fn projected_gradient_dual(k: &[Vec<f64>], y: &[f64], c: f64) -> Vec<f64> {
    let n = y.len();
    let q: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| y[i] * y[j] * k[i][j]).collect())
        .collect();
    let lipschitz = q
        .iter()
        .map(|row| row.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
        .max(1e-12);
    let step = 1.0 / lipschitz;
    let mut alpha = vec![0.0; n];
    let mut z = alpha.clone();
    let mut t = 1.0f64;
    for _ in 0..400_000 {
        let grad: Vec<f64> = (0..n)
            .map(|i| 1.0 - (0..n).map(|j| q[i][j] * z[j]).sum::<f64>())
            .collect();
        let v: Vec<f64> = z.iter().zip(&grad).map(|(zi, g)| zi + step * g).collect();
        let next = project(&v, y, c);
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        let moved = next
            .iter()
            .zip(&alpha)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        z = next
            .iter()
            .zip(&alpha)
            .map(|(a, b)| a + (t - 1.0) / t_next * (a - b))
            .collect();
        alpha = next;
        t = t_next;
        if moved < 1e-12 {
            break;
        }
    }
    alpha
}

/// Decision function from oracle multipliers; the bias averages the margin
/// conditions of free multipliers.
pub fn oracle_decision(
    rows: &[Vec<f64>],
    y: &[f64],
    alpha: &[f64],
    c: f64,
    kernel: &KernelSpec,
) -> impl Fn(&[f64]) -> f64 {
    let k = gram(rows, kernel);
    let n = y.len();
    let f0 = |i: usize| (0..n).map(|j| alpha[j] * y[j] * k[i][j]).sum::<f64>();
    let eps = 1e-6 * c;
    let free: Vec<usize> = (0..n)
        .filter(|&i| alpha[i] > eps && alpha[i] < c - eps)
        .collect();
    let bias = if !free.is_empty() {
        free.iter().map(|&i| y[i] - f0(i)).sum::<f64>() / free.len() as f64
    } else {
        // interval of biases compatible with the KKT conditions
        let mut lo = f64::NEG_INFINITY;
        let mut hi = f64::INFINITY;
        for i in 0..n {
            let b = y[i] - f0(i);
            let at_upper = alpha[i] >= c - eps;
            if (y[i] > 0.0) != at_upper {
                lo = lo.max(b);
            } else {
                hi = hi.min(b);
            }
        }
        0.5 * (lo + hi)
    };
    let rows = rows.to_vec();
    let alpha = alpha.to_vec();
    let y = y.to_vec();
    let kernel = *kernel;
    move |x: &[f64]| {
        rows.iter()
            .zip(alpha.iter().zip(&y))
            .map(|(r, (a, yi))| a * yi * kernel_eval(&kernel, r, x).unwrap())
            .sum::<f64>()
            + bias
    }
}

pub fn probe_grid(rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut out = Vec::with_capacity(100);
    for i in 0..10 {
        for j in 0..10 {
            out.push(vec![
                -2.5 + 5.0 * i as f64 / 9.0,
                -2.5 + 5.0 * j as f64 / 9.0,
            ]);
        }
    }
    debug_assert!(rows.iter().all(|r| r.len() == 2));
    out
}

pub struct SmoCheck {
    pub objective_gap: f64,
    pub probe_mismatches: usize,
    pub worst_alpha_violation: f64,
    pub worst_equality_residual: f64,
}

/// Runs SMO with a trace and compares it to the projected-gradient oracle.
pub fn check_smo_against_oracle(
    p: &BinaryProblem,
    tolerance: f64,
) -> (SmoCheck, SmoReport, BinarySvm) {
    let params = SmoParams {
        c: p.c,
        tolerance,
        trace: true,
        ..SmoParams::default()
    };
    let (model, report) = svm_train_smo(&p.rows, &p.y, p.kernel, &params).unwrap();
    let k = gram(&p.rows, &p.kernel);
    let alpha = projected_gradient_dual(&k, &p.y, p.c);
    let oracle_obj = dual_value(&k, &p.y, &alpha);
    let decide = oracle_decision(&p.rows, &p.y, &alpha, p.c, &p.kernel);
    let probe_mismatches = probe_grid(&p.rows)
        .iter()
        .filter(|x| (model.decision(x).unwrap() >= 0.0) != (decide(x) >= 0.0))
        .count();
    let mut worst_alpha_violation: f64 = 0.0;
    let mut worst_equality_residual: f64 = 0.0;
    for t in &report.trace {
        worst_alpha_violation = worst_alpha_violation
            .max(-t.min_alpha)
            .max(t.max_alpha - p.c);
        worst_equality_residual = worst_equality_residual.max(t.equality_residual.abs());
    }
    (
        SmoCheck {
            objective_gap: (report.objective - oracle_obj).abs(),
            probe_mismatches,
            worst_alpha_violation,
            worst_equality_residual,
        },
        report,
        model,
    )
}

/// Random multi-class dataset for LOOCV comparisons.
pub fn random_dataset(rng: &mut ChaCha8Rng) -> (Vec<Vec<f64>>, Vec<usize>, usize) {
    let n_classes = rng.random_range(2..=4);
    let n = rng.random_range(n_classes.max(3)..=30);
    let dim = rng.random_range(1..=5);
    let labels: Vec<usize> = (0..n)
        .map(|i| {
            if i < n_classes {
                i
            } else {
                rng.random_range(0..n_classes)
            }
        })
        .collect();
    let rows = labels
        .iter()
        .map(|&l| {
            (0..dim)
                .map(|d| if d == 0 { l as f64 } else { 0.0 } + rng.random_range(-1.5..1.5) * (d + 1) as f64)
                .collect()
        })
        .collect();
    (rows, labels, n_classes)
}

/// Leave-one-out by materializing every fold as its own copy of the data and
/// training from scratch on it.
pub fn brute_force_loocv(
    rows: &[Vec<f64>],
    labels: &[usize],
    n_classes: usize,
    algorithm: &dyn Algorithm,
    params: &Hyperparams,
) -> Vec<usize> {
    (0..rows.len())
        .map(|held_out| {
            let mut fold_rows = Vec::new();
            let mut fold_labels = Vec::new();
            for (i, (r, &l)) in rows.iter().zip(labels).enumerate() {
                if i != held_out {
                    fold_rows.push(r.clone());
                    fold_labels.push(l);
                }
            }
            // independent standardization of the fold
            let n = fold_rows.len() as f64;
            let dim = rows[0].len();
            let mean: Vec<f64> = (0..dim)
                .map(|d| fold_rows.iter().map(|r| r[d]).sum::<f64>() / n)
                .collect();
            let sd: Vec<f64> = (0..dim)
                .map(|d| {
                    (fold_rows
                        .iter()
                        .map(|r| (r[d] - mean[d]).powi(2))
                        .sum::<f64>()
                        / n)
                        .sqrt()
                })
                .collect();
            let z = |r: &[f64]| -> Vec<f64> {
                r.iter()
                    .enumerate()
                    .map(|(d, v)| {
                        if sd[d] > 1e-12 {
                            (v - mean[d]) / sd[d]
                        } else {
                            0.0
                        }
                    })
                    .collect()
            };
            let train = TrainSet::new(fold_rows.iter().map(Vec::as_slice), &fold_labels, n_classes)
                .unwrap();
            for (mine, theirs) in mean.iter().zip(&train.standardizer().mean) {
                assert!((mine - theirs).abs() <= 1e-12 * (1.0 + mine.abs()));
            }
            let model = algorithm.fit(&train, params).unwrap();
            model.predict(&z(&rows[held_out])).unwrap()
        })
        .collect()
}

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
