//! Sequential minimal optimization for the soft-margin SVM dual
//!
//! ```text
//! maximize   W(a) = sum_i a_i - 1/2 sum_ij a_i a_j y_i y_j K_ij
//! subject to 0 <= a_i <= C,  sum_i a_i y_i = 0
//! ```
//!
//! Every iteration scans all examples for KKT violations. The first
//! multiplier maximises `-E_i` over the examples that may move up. The second
//! is taken from those that may move down, either maximising `E_j` (the most
//! violating pair, largest `|E_i - E_j|`) or maximising the second-order
//! estimate `(E_j - E_i)^2 / eta` of the objective increase. The pair is then
//! optimised analytically. Training stops once the largest violation falls
//! below the tolerance.

use serde::{Deserialize, Serialize};

use super::kernel::KernelSpec;
use crate::error::{Error, Result};

/// Curvature used when a pair's kernel submatrix is singular.
const MIN_CURVATURE: f64 = 1e-12;

/// Relative distance below which a multiplier counts as sitting on a bound.
const BOUND_SNAP: f64 = 1e-12;

/// Rule for choosing the second multiplier of a pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairSelection {
    MaxViolation,
    SecondOrder,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SmoParams {
    pub c: f64,
    /// Stop when the maximal KKT violation (gap between the two selected
    /// errors) drops below this.
    pub tolerance: f64,
    pub max_iter: usize,
    pub selection: PairSelection,
    /// Record the dual objective and feasibility after every update.
    pub trace: bool,
}

impl Default for SmoParams {
    fn default() -> Self {
        Self {
            c: 1.0,
            tolerance: 1e-3,
            max_iter: 1_000_000,
            selection: PairSelection::MaxViolation,
            trace: false,
        }
    }
}

impl SmoParams {
    pub fn with_c(c: f64) -> Self {
        Self {
            c,
            ..Self::default()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TracePoint {
    pub objective: f64,
    /// `sum_i a_i y_i`.
    pub equality_residual: f64,
    pub min_alpha: f64,
    pub max_alpha: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SmoReport {
    pub iterations: usize,
    pub converged: bool,
    /// Largest remaining KKT violation.
    pub kkt_gap: f64,
    pub objective: f64,
    pub trace: Vec<TracePoint>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DualSolution {
    pub alpha: Vec<f64>,
    pub bias: f64,
    pub report: SmoReport,
}

/// Row-major square kernel matrix.
pub struct KernelMatrix<'a> {
    n: usize,
    data: &'a [f64],
}

impl<'a> KernelMatrix<'a> {
    pub fn new(n: usize, data: &'a [f64]) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::domain("kernel matrix is not n x n"));
        }
        Ok(Self { n, data })
    }

    #[inline]
    fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    #[inline]
    fn at(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }
}

/// Dual objective `W(a)`.
pub fn dual_objective(k: &KernelMatrix<'_>, y: &[f64], alpha: &[f64]) -> f64 {
    let mut quad = 0.0;
    for i in 0..k.n {
        if alpha[i] == 0.0 {
            continue;
        }
        let row = k.row(i);
        let g: f64 = (0..k.n).map(|j| alpha[j] * y[j] * row[j]).sum();
        quad += alpha[i] * y[i] * g;
    }
    alpha.iter().sum::<f64>() - 0.5 * quad
}

fn check_labels(y: &[f64]) -> Result<()> {
    if let Some(bad) = y.iter().find(|&&v| v != 1.0 && v != -1.0) {
        return Err(Error::Training(format!(
            "binary labels must be +1 or -1, got {bad}"
        )));
    }
    if !y.contains(&1.0) || !y.contains(&-1.0) {
        return Err(Error::Training(
            "both classes need at least one example".into(),
        ));
    }
    Ok(())
}

/// Solves the dual on a precomputed kernel matrix.
pub fn solve_dual(k: &KernelMatrix<'_>, y: &[f64], params: &SmoParams) -> Result<DualSolution> {
    let n = k.n;
    if y.len() != n {
        return Err(Error::domain("label count does not match kernel matrix"));
    }
    check_labels(y)?;
    let c = params.c;
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::Training(format!("C must be positive, got {c}")));
    }

    let mut alpha = vec![0.0f64; n];
    // err[t] = sum_j a_j y_j K_tj - y_t, the prediction error without bias.
    let mut err: Vec<f64> = y.iter().map(|v| -v).collect();
    let diag: Vec<f64> = (0..n).map(|t| k.at(t, t)).collect();
    let can_rise = |a: f64, yt: f64| if yt > 0.0 { a < c } else { a > 0.0 };
    let can_fall = |a: f64, yt: f64| if yt > 0.0 { a > 0.0 } else { a < c };
    let mut up: Vec<bool> = (0..n).map(|t| can_rise(0.0, y[t])).collect();
    let mut low: Vec<bool> = (0..n).map(|t| can_fall(0.0, y[t])).collect();
    let mut trace = Vec::new();
    let mut iterations = 0;
    let mut converged = false;
    let mut gap;
    let mut pick = Pick::new();
    for (t, ((&e, &u), &l)) in err.iter().zip(&up).zip(&low).enumerate() {
        pick.offer(t, e, u, l);
    }

    loop {
        let Pick {
            i_sel,
            up_best,
            mut j_sel,
            low_best,
        } = pick;
        gap = up_best + low_best;
        if i_sel == usize::MAX || j_sel == usize::MAX || gap < params.tolerance {
            converged = true;
            break;
        }
        if params.selection == PairSelection::SecondOrder {
            // the partner promising the largest objective increase
            let ri = k.row(i_sel);
            let kii = diag[i_sel];
            let mut best_gain = f64::NEG_INFINITY;
            for (t, (((&e, &l), &kt), &kit)) in err.iter().zip(&low).zip(&diag).zip(ri).enumerate()
            {
                let b = up_best + e;
                if l && b > 0.0 {
                    let gain = b * b / (kii + kt - 2.0 * kit).max(MIN_CURVATURE);
                    if gain > best_gain {
                        best_gain = gain;
                        j_sel = t;
                    }
                }
            }
        }
        if iterations >= params.max_iter {
            break;
        }
        iterations += 1;

        let (i, j) = (i_sel, j_sel);
        let (yi, yj) = (y[i], y[j]);
        let (ai, aj) = (alpha[i], alpha[j]);
        let eta = (diag[i] + diag[j] - 2.0 * k.at(i, j)).max(MIN_CURVATURE);
        let (lo, hi) = if yi != yj {
            ((aj - ai).max(0.0), (c + aj - ai).min(c))
        } else {
            ((ai + aj - c).max(0.0), (ai + aj).min(c))
        };
        let aj_new = snap((aj + yj * (err[i] - err[j]) / eta).clamp(lo, hi), c);
        let ai_new = snap((ai + yi * yj * (aj - aj_new)).clamp(0.0, c), c);
        let (di, dj) = (ai_new - ai, aj_new - aj);
        if di == 0.0 && dj == 0.0 {
            // Numerically stuck pair; the gap cannot shrink further.
            break;
        }
        alpha[i] = ai_new;
        alpha[j] = aj_new;
        for t in [i, j] {
            up[t] = can_rise(alpha[t], y[t]);
            low[t] = can_fall(alpha[t], y[t]);
        }
        // the error update doubles as the next selection scan
        let (si, sj) = (di * yi, dj * yj);
        pick = Pick::new();
        let rows = k.row(i).iter().zip(k.row(j));
        for (t, (((e, (&a, &b)), &u), &l)) in
            err.iter_mut().zip(rows).zip(&up).zip(&low).enumerate()
        {
            *e += si * a + sj * b;
            pick.offer(t, *e, u, l);
        }

        if params.trace {
            trace.push(TracePoint {
                objective: dual_objective(k, y, &alpha),
                equality_residual: alpha.iter().zip(y).map(|(a, v)| a * v).sum(),
                min_alpha: alpha.iter().copied().fold(f64::INFINITY, f64::min),
                max_alpha: alpha.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            });
        }
    }

    let bias = bias_from_errors(&alpha, y, &err, c);
    let objective = alpha.iter().sum::<f64>()
        - 0.5
            * alpha
                .iter()
                .zip(y)
                .zip(&err)
                .map(|((a, v), e)| a * v * (e + v))
                .sum::<f64>();
    Ok(DualSolution {
        alpha,
        bias,
        report: SmoReport {
            iterations,
            converged,
            kkt_gap: gap,
            objective,
            trace,
        },
    })
}

/// Largest `-E` over the "up" set and largest `E` over the "low" set; the
/// first index wins ties.
#[derive(Clone, Copy)]
struct Pick {
    i_sel: usize,
    up_best: f64,
    j_sel: usize,
    low_best: f64,
}

impl Pick {
    fn new() -> Self {
        Self {
            i_sel: usize::MAX,
            up_best: f64::NEG_INFINITY,
            j_sel: usize::MAX,
            low_best: f64::NEG_INFINITY,
        }
    }

    // written as selects so the scan compiles without data-dependent branches
    #[inline]
    fn offer(&mut self, t: usize, e: f64, up: bool, low: bool) {
        let u = if up { -e } else { f64::NEG_INFINITY };
        let l = if low { e } else { f64::NEG_INFINITY };
        let take_u = u > self.up_best;
        let take_l = l > self.low_best;
        self.up_best = if take_u { u } else { self.up_best };
        self.i_sel = if take_u { t } else { self.i_sel };
        self.low_best = if take_l { l } else { self.low_best };
        self.j_sel = if take_l { t } else { self.j_sel };
    }
}

/// Moves a multiplier that rounding left a hair away from a bound onto it.
/// Otherwise the pair step would keep selecting it without making progress.
#[inline]
fn snap(a: f64, c: f64) -> f64 {
    let eps = BOUND_SNAP * c;
    if a < eps {
        0.0
    } else if a > c - eps {
        c
    } else {
        a
    }
}

/// Bias from the bias-free errors: the mean over free multipliers, or the
/// midpoint of the feasible interval when every multiplier sits at a bound.
pub fn bias_from_errors(alpha: &[f64], y: &[f64], err: &[f64], c: f64) -> f64 {
    let mut ub = f64::INFINITY;
    let mut lb = f64::NEG_INFINITY;
    let mut free_sum = 0.0;
    let mut free = 0usize;
    for ((&a, &yt), &e) in alpha.iter().zip(y).zip(err) {
        if a >= c {
            if yt < 0.0 {
                ub = ub.min(e)
            } else {
                lb = lb.max(e)
            }
        } else if a <= 0.0 {
            if yt > 0.0 {
                ub = ub.min(e)
            } else {
                lb = lb.max(e)
            }
        } else {
            free += 1;
            free_sum += e;
        }
    }
    let rho = if free > 0 {
        free_sum / free as f64
    } else {
        (ub + lb) / 2.0
    };
    -rho
}

/// Binary kernel machine: `f(x) = sum_s coef_s K(sv_s, x) + bias`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BinarySvm {
    pub kernel: KernelSpec,
    pub c: f64,
    pub support_vectors: Vec<Vec<f64>>,
    /// `a_s y_s` for each support vector.
    pub coefficients: Vec<f64>,
    pub bias: f64,
}

impl BinarySvm {
    pub fn from_solution(
        rows: &[&[f64]],
        y: &[f64],
        kernel: KernelSpec,
        c: f64,
        sol: &DualSolution,
    ) -> Self {
        let mut support_vectors = Vec::new();
        let mut coefficients = Vec::new();
        for ((row, &yt), &a) in rows.iter().zip(y).zip(&sol.alpha) {
            if a > 0.0 {
                support_vectors.push(row.to_vec());
                coefficients.push(a * yt);
            }
        }
        Self {
            kernel,
            c,
            support_vectors,
            coefficients,
            bias: sol.bias,
        }
    }

    pub fn decision(&self, x: &[f64]) -> Result<f64> {
        if let Some(sv) = self.support_vectors.first() {
            if sv.len() != x.len() {
                return Err(Error::domain(format!(
                    "expected {} features, got {}",
                    sv.len(),
                    x.len()
                )));
            }
        }
        Ok(self
            .support_vectors
            .iter()
            .zip(&self.coefficients)
            .map(|(sv, c)| c * self.kernel.eval_unchecked(sv, x))
            .sum::<f64>()
            + self.bias)
    }

    /// `+1` when the decision value is non-negative.
    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        Ok(if self.decision(x)? >= 0.0 { 1.0 } else { -1.0 })
    }
}

/// Trains a binary SVM on raw rows with labels in {+1, -1}.
pub fn svm_train_smo(
    rows: &[Vec<f64>],
    y: &[f64],
    kernel: KernelSpec,
    params: &SmoParams,
) -> Result<(BinarySvm, SmoReport)> {
    kernel.validate()?;
    if rows.len() != y.len() {
        return Err(Error::domain("rows and labels differ in length"));
    }
    check_labels(y)?;
    let dim = rows[0].len();
    if rows.iter().any(|r| r.len() != dim) {
        return Err(Error::domain("rows differ in dimension"));
    }
    let n = rows.len();
    let mut gram = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let v = kernel.eval_unchecked(&rows[i], &rows[j]);
            gram[i * n + j] = v;
            gram[j * n + i] = v;
        }
    }
    let sol = solve_dual(&KernelMatrix::new(n, &gram)?, y, params)?;
    let refs: Vec<&[f64]> = rows.iter().map(Vec::as_slice).collect();
    let model = BinarySvm::from_solution(&refs, y, kernel, params.c, &sol);
    Ok((model, sol.report))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_two_point_problem() {
        let rows = vec![vec![-1.0], vec![1.0]];
        let y = [-1.0, 1.0];
        let (m, rep) =
            svm_train_smo(&rows, &y, KernelSpec::linear(), &SmoParams::with_c(1.0)).unwrap();
        assert!(rep.converged);
        assert!(m.bias.abs() < 1e-3);
        assert_eq!(m.predict(&[-1.0]).unwrap(), -1.0);
        assert_eq!(m.predict(&[1.0]).unwrap(), 1.0);
        // a = 0.5 for both, margin exactly at +-1
        assert!((m.decision(&[1.0]).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn xor_is_separated_by_rbf() {
        let rows = vec![
            vec![1.0, 1.0],
            vec![-1.0, -1.0],
            vec![1.0, -1.0],
            vec![-1.0, 1.0],
        ];
        let y = [1.0, 1.0, -1.0, -1.0];
        let (m, rep) =
            svm_train_smo(&rows, &y, KernelSpec::rbf(1.0), &SmoParams::with_c(10.0)).unwrap();
        assert!(rep.converged);
        for (r, &t) in rows.iter().zip(&y) {
            assert_eq!(m.predict(r).unwrap(), t);
        }
    }

    #[test]
    fn single_class_is_rejected() {
        let rows = vec![vec![0.0], vec![1.0]];
        assert!(matches!(
            svm_train_smo(
                &rows,
                &[1.0, 1.0],
                KernelSpec::linear(),
                &SmoParams::default()
            ),
            Err(Error::Training(_))
        ));
        assert!(svm_train_smo(
            &rows,
            &[1.0, 0.0],
            KernelSpec::linear(),
            &SmoParams::default()
        )
        .is_err());
        assert!(svm_train_smo(
            &rows,
            &[1.0, -1.0],
            KernelSpec::linear(),
            &SmoParams::with_c(0.0)
        )
        .is_err());
    }

    #[test]
    fn trace_is_feasible_and_monotone() {
        let rows: Vec<Vec<f64>> = (0..16)
            .map(|i| vec![(i as f64 * 0.37).sin() * 2.0, (i as f64 * 1.3).cos()])
            .collect();
        let y: Vec<f64> = (0..16)
            .map(|i| if (i * 7) % 3 == 0 { 1.0 } else { -1.0 })
            .collect();
        let params = SmoParams {
            c: 5.0,
            trace: true,
            ..SmoParams::default()
        };
        let (_, rep) = svm_train_smo(&rows, &y, KernelSpec::rbf(0.8), &params).unwrap();
        assert!(!rep.trace.is_empty());
        let mut prev = 0.0;
        for p in &rep.trace {
            assert!(p.min_alpha >= 0.0 && p.max_alpha <= 5.0);
            assert!(p.equality_residual.abs() < 1e-9);
            assert!(p.objective >= prev - 1e-12);
            prev = p.objective;
        }
        assert!((rep.objective - prev).abs() < 1e-9);
    }

    #[test]
    fn decision_checks_dimension() {
        let rows = vec![vec![-1.0, 0.0], vec![1.0, 0.0]];
        let (m, _) = svm_train_smo(
            &rows,
            &[-1.0, 1.0],
            KernelSpec::linear(),
            &SmoParams::default(),
        )
        .unwrap();
        assert!(m.decision(&[1.0]).is_err());
    }
}
