//! C-support vector classification solved by SMO with second-order working
//! set selection.

use serde::{Deserialize, Serialize};

use crate::corpus::Label;
use crate::{Error, Result};

const TAU: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Gamma {
    /// 1 / (d · variance of the standardized training matrix).
    Scale,
    Value(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum KernelSpec {
    Linear,
    Rbf(Gamma),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Kernel {
    Linear,
    Rbf { gamma: f64 },
}

impl Kernel {
    pub fn eval(&self, a: &[f64], b: &[f64]) -> f64 {
        match *self {
            Kernel::Linear => a.iter().zip(b).map(|(x, y)| x * y).sum(),
            Kernel::Rbf { gamma } => {
                let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
                (-gamma * d2).exp()
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SvmParams {
    pub c: f64,
    pub kernel: KernelSpec,
    /// Stopping tolerance on the maximal KKT violation.
    pub tol: f64,
    pub standardize: bool,
}

impl Default for SvmParams {
    fn default() -> Self {
        SvmParams {
            c: 1.0,
            kernel: KernelSpec::Rbf(Gamma::Scale),
            tol: 1e-3,
            standardize: true,
        }
    }
}

/// Per-feature affine map to zero mean and unit variance, fitted on training
/// rows. Constant features keep scale 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Standardizer {
    pub fn fit(rows: &[&[f64]]) -> Standardizer {
        let d = rows.first().map_or(0, |r| r.len());
        let n = rows.len().max(1) as f64;
        let mut mean = vec![0.0; d];
        for r in rows {
            for (m, x) in mean.iter_mut().zip(r.iter()) {
                *m += x;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = vec![0.0; d];
        for r in rows {
            for ((v, x), m) in var.iter_mut().zip(r.iter()).zip(&mean) {
                *v += (x - m) * (x - m);
            }
        }
        let std = var
            .into_iter()
            .map(|v| {
                let s = (v / n).sqrt();
                if s > 0.0 && s.is_finite() {
                    s
                } else {
                    1.0
                }
            })
            .collect();
        Standardizer { mean, std }
    }

    pub fn identity(d: usize) -> Standardizer {
        Standardizer {
            mean: vec![0.0; d],
            std: vec![1.0; d],
        }
    }

    pub fn transform(&self, row: &[f64]) -> Vec<f64> {
        row.iter().zip(&self.mean).zip(&self.std).map(|((x, m), s)| (x - m) / s).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    pub kernel: Kernel,
    pub c: f64,
    pub scaler: Standardizer,
    /// Standardized support vectors.
    pub support: Vec<Vec<f64>>,
    pub support_indices: Vec<usize>,
    /// αᵢ per support vector, each in (0, C].
    pub alphas: Vec<f64>,
    /// yᵢ ∈ {−1, +1} per support vector.
    pub signs: Vec<f64>,
    pub bias: f64,
    pub iterations: usize,
}

impl SvmModel {
    /// Signed distance proxy; positive means `Abuse`.
    pub fn decision(&self, row: &[f64]) -> f64 {
        let x = self.scaler.transform(row);
        self.support
            .iter()
            .zip(self.alphas.iter().zip(&self.signs))
            .map(|(sv, (a, y))| a * y * self.kernel.eval(sv, &x))
            .sum::<f64>()
            + self.bias
    }

    pub fn predict(&self, row: &[f64]) -> Label {
        if self.decision(row) > 0.0 {
            Label::Abuse
        } else {
            Label::NonAbuse
        }
    }
}

pub(crate) fn check_finite(rows: &[&[f64]]) -> Result<()> {
    for (r, row) in rows.iter().enumerate() {
        if let Some(c) = row.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteFeature { row: r, col: c });
        }
    }
    Ok(())
}

/// Dual solution with its final gradient, kept for KKT checks.
pub(crate) struct Solution {
    pub alpha: Vec<f64>,
    #[cfg_attr(not(test), allow(dead_code))]
    pub grad: Vec<f64>,
    pub rho: f64,
    pub iterations: usize,
}

/// Solves min ½αᵀQα − eᵀα s.t. yᵀα = 0, 0 ≤ α ≤ C, with Q = (yyᵀ)∘K.
pub(crate) fn solve(k: &[Vec<f64>], y: &[f64], c: f64, tol: f64) -> Solution {
    let n = y.len();
    let mut alpha = vec![0.0; n];
    let mut grad = vec![-1.0; n];
    let max_iter = (100 * n).max(10_000_000);
    let mut iterations = 0;
    let up = |a: f64, yt: f64| if yt > 0.0 { a < c } else { a > 0.0 };
    let low = |a: f64, yt: f64| if yt > 0.0 { a > 0.0 } else { a < c };

    while iterations < max_iter {
        let mut gmax = f64::NEG_INFINITY;
        let mut i = usize::MAX;
        for t in 0..n {
            if up(alpha[t], y[t]) && -y[t] * grad[t] >= gmax {
                gmax = -y[t] * grad[t];
                i = t;
            }
        }
        if i == usize::MAX {
            break;
        }
        let mut gmin = f64::INFINITY;
        let mut j = usize::MAX;
        let mut best = f64::INFINITY;
        for t in 0..n {
            if !low(alpha[t], y[t]) {
                continue;
            }
            let v = -y[t] * grad[t];
            gmin = gmin.min(v);
            let b = gmax - v;
            if b > 0.0 {
                let mut a = k[i][i] + k[t][t] - 2.0 * k[i][t];
                if a <= 0.0 {
                    a = TAU;
                }
                let obj = -(b * b) / a;
                if obj <= best {
                    best = obj;
                    j = t;
                }
            }
        }
        if gmax - gmin < tol || j == usize::MAX {
            break;
        }
        iterations += 1;

        let (ai, aj) = (alpha[i], alpha[j]);
        let qij = y[i] * y[j] * k[i][j];
        if y[i] != y[j] {
            let mut quad = k[i][i] + k[j][j] + 2.0 * qij;
            if quad <= 0.0 {
                quad = TAU;
            }
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = ai - aj;
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > 0.0 {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let mut quad = k[i][i] + k[j][j] - 2.0 * qij;
            if quad <= 0.0 {
                quad = TAU;
            }
            let delta = (grad[i] - grad[j]) / quad;
            let sum = ai + aj;
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > c {
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }
        let (di, dj) = (alpha[i] - ai, alpha[j] - aj);
        for t in 0..n {
            grad[t] += y[t] * (y[i] * k[i][t] * di + y[j] * k[j][t] * dj);
        }
    }

    // rho from free vectors, else the midpoint of the feasible interval
    let (mut ub, mut lb, mut sum, mut free) = (f64::INFINITY, f64::NEG_INFINITY, 0.0, 0usize);
    for t in 0..n {
        let yg = y[t] * grad[t];
        if alpha[t] >= c {
            if y[t] < 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if alpha[t] <= 0.0 {
            if y[t] > 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            free += 1;
            sum += yg;
        }
    }
    let rho = if free > 0 { sum / free as f64 } else { (ub + lb) / 2.0 };
    Solution {
        alpha,
        grad,
        rho,
        iterations,
    }
}

pub fn train_svm(rows: &[&[f64]], labels: &[Label], params: &SvmParams) -> Result<SvmModel> {
    if rows.len() != labels.len() {
        return Err(Error::LengthMismatch {
            expected: rows.len(),
            got: labels.len(),
        });
    }
    if !(params.c > 0.0) || !(params.tol > 0.0) {
        return Err(Error::InvalidParameter("C and tol must be positive".into()));
    }
    check_finite(rows)?;
    let positives = labels.iter().filter(|&&l| l == Label::Abuse).count();
    if positives == 0 || positives == labels.len() {
        return Err(Error::SingleClassTraining);
    }
    let d = rows[0].len();
    if let Some(r) = rows.iter().find(|r| r.len() != d) {
        return Err(Error::LengthMismatch { expected: d, got: r.len() });
    }
    let scaler = if params.standardize {
        Standardizer::fit(rows)
    } else {
        Standardizer::identity(d)
    };
    let x: Vec<Vec<f64>> = rows.iter().map(|r| scaler.transform(r)).collect();
    let kernel = match params.kernel {
        KernelSpec::Linear => Kernel::Linear,
        KernelSpec::Rbf(Gamma::Value(g)) => Kernel::Rbf { gamma: g },
        KernelSpec::Rbf(Gamma::Scale) => {
            let all: Vec<f64> = x.iter().flatten().copied().collect();
            let m = crate::util::mean(&all);
            let var = all.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / all.len().max(1) as f64;
            let gamma = if var > 0.0 && d > 0 { 1.0 / (d as f64 * var) } else { 1.0 };
            Kernel::Rbf { gamma }
        }
    };
    let y: Vec<f64> = labels.iter().map(|l| l.sign()).collect();
    let n = x.len();
    let mut k = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i..n {
            let v = kernel.eval(&x[i], &x[j]);
            k[i][j] = v;
            k[j][i] = v;
        }
    }
    let sol = solve(&k, &y, params.c, params.tol);
    let mut model = SvmModel {
        kernel,
        c: params.c,
        scaler,
        support: Vec::new(),
        support_indices: Vec::new(),
        alphas: Vec::new(),
        signs: Vec::new(),
        bias: -sol.rho,
        iterations: sol.iterations,
    };
    for (t, &a) in sol.alpha.iter().enumerate() {
        if a > 0.0 {
            model.support.push(x[t].clone());
            model.support_indices.push(t);
            model.alphas.push(a);
            model.signs.push(y[t]);
        }
    }
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use Label::{Abuse as P, NonAbuse as N};

    fn refs(rows: &[Vec<f64>]) -> Vec<&[f64]> {
        rows.iter().map(Vec::as_slice).collect()
    }

    fn linear() -> SvmParams {
        SvmParams {
            kernel: KernelSpec::Linear,
            standardize: false,
            ..Default::default()
        }
    }

    #[test]
    fn separates_two_points() {
        let x = vec![vec![0.0, 0.0], vec![1.0, 1.0]];
        let m = train_svm(&refs(&x), &[N, P], &linear()).unwrap();
        assert_eq!(m.predict(&x[0]), N);
        assert_eq!(m.predict(&x[1]), P);
    }

    #[test]
    fn separable_set_is_fit_exactly() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut x = Vec::new();
        let mut y = Vec::new();
        for _ in 0..60 {
            let a: f64 = rng.random_range(-1.0..1.0);
            let b: f64 = rng.random_range(-1.0..1.0);
            let s = a + 2.0 * b;
            if s.abs() < 0.3 {
                continue;
            }
            x.push(vec![a, b]);
            y.push(if s > 0.0 { P } else { N });
        }
        let params = SvmParams {
            c: 100.0,
            ..linear()
        };
        let m = train_svm(&refs(&x), &y, &params).unwrap();
        for (r, l) in x.iter().zip(&y) {
            assert_eq!(m.predict(r), *l);
        }
    }

    #[test]
    fn conflicting_duplicates_are_absorbed() {
        let x = vec![vec![0.5, 0.5], vec![0.5, 0.5], vec![0.0, 0.0], vec![1.0, 1.0]];
        let m = train_svm(&refs(&x), &[P, N, N, P], &linear()).unwrap();
        assert!(m.alphas.iter().all(|&a| a <= m.c + 1e-12));
        assert!(m.bias.is_finite());
    }

    #[test]
    fn kkt_conditions_hold_at_tolerance() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let n = 80;
        let x: Vec<Vec<f64>> = (0..n).map(|_| (0..3).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
        let y: Vec<f64> = x.iter().map(|r| if r[0] + 0.3 * rng.random_range(-1.0..1.0) > 0.0 { 1.0 } else { -1.0 }).collect();
        let kern = Kernel::Rbf { gamma: 0.5 };
        let k: Vec<Vec<f64>> = x.iter().map(|a| x.iter().map(|b| kern.eval(a, b)).collect()).collect();
        let c = 1.0;
        let sol = solve(&k, &y, c, 1e-3);
        let eq: f64 = sol.alpha.iter().zip(&y).map(|(a, y)| a * y).sum();
        assert!(eq.abs() < 1e-9);
        let m_up = (0..n)
            .filter(|&t| if y[t] > 0.0 { sol.alpha[t] < c } else { sol.alpha[t] > 0.0 })
            .map(|t| -y[t] * sol.grad[t])
            .fold(f64::NEG_INFINITY, f64::max);
        let m_low = (0..n)
            .filter(|&t| if y[t] > 0.0 { sol.alpha[t] > 0.0 } else { sol.alpha[t] < c })
            .map(|t| -y[t] * sol.grad[t])
            .fold(f64::INFINITY, f64::min);
        assert!(m_up - m_low < 1e-3);
        assert!(sol.alpha.iter().all(|&a| (0.0..=c).contains(&a)));
    }

    #[test]
    fn vanishing_gamma_predicts_the_majority() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let x: Vec<Vec<f64>> = (0..30).map(|_| vec![rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)]).collect();
        let y: Vec<Label> = (0..30).map(|i| if i < 20 { P } else { N }).collect();
        let params = SvmParams {
            kernel: KernelSpec::Rbf(Gamma::Value(1e-9)),
            ..Default::default()
        };
        let m = train_svm(&refs(&x), &y, &params).unwrap();
        for r in &x {
            assert_eq!(m.predict(r), P);
        }
    }

    #[test]
    fn errors() {
        let x = vec![vec![0.0], vec![f64::NAN]];
        assert!(matches!(
            train_svm(&refs(&x), &[P, N], &linear()),
            Err(Error::NonFiniteFeature { row: 1, col: 0 })
        ));
        let x = vec![vec![0.0], vec![1.0]];
        assert!(matches!(train_svm(&refs(&x), &[P, P], &linear()), Err(Error::SingleClassTraining)));
        assert!(matches!(train_svm(&refs(&x), &[P], &linear()), Err(Error::LengthMismatch { .. })));
    }

    #[test]
    fn standardizer_handles_constant_columns() {
        let rows = vec![vec![1.0, 5.0], vec![3.0, 5.0]];
        let s = Standardizer::fit(&refs(&rows));
        assert_eq!(s.mean, vec![2.0, 5.0]);
        assert_eq!(s.std, vec![1.0, 1.0]);
        assert_eq!(s.transform(&[3.0, 5.0]), vec![1.0, 0.0]);
    }
}
