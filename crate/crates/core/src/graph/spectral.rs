//! Dense Laplacian spectra, pseudoinverses and heat kernels.
//!
//! Conversational graphs are small (tens of nodes), so everything here is a
//! dense symmetric eigendecomposition.

use nalgebra::{DMatrix, SymmetricEigen};

use super::ConvGraph;
use crate::{Error, Result};

/// Relative tolerance (against the spectral radius) under which an
/// eigenvalue counts as zero.
pub const ZERO_TOL: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct Spectrum {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Orthonormal eigenvectors as columns, matching `eigenvalues`.
    pub eigenvectors: Option<DMatrix<f64>>,
}

impl Spectrum {
    pub fn zero_threshold(&self) -> f64 {
        let radius = self.eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        ZERO_TOL * radius.max(f64::MIN_POSITIVE)
    }

    pub fn zero_count(&self) -> usize {
        let tol = self.zero_threshold();
        self.eigenvalues.iter().filter(|v| v.abs() <= tol).count()
    }
}

fn require_undirected(g: &ConvGraph) -> Result<()> {
    if g.is_directed() {
        Err(Error::InvalidParameter(
            "spectral routines need an undirected graph; collapse it first".into(),
        ))
    } else {
        Ok(())
    }
}

/// Eigendecomposition of a symmetric matrix, eigenvalues ascending.
pub(crate) fn symmetric_eigen(m: DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let n = m.nrows();
    if n == 0 {
        return Ok((Vec::new(), DMatrix::zeros(0, 0)));
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::Spectral("matrix has non-finite entries".into()));
    }
    let eig = SymmetricEigen::try_new(m, f64::EPSILON, 100_000)
        .ok_or_else(|| Error::Spectral("symmetric eigensolver did not converge".into()))?;
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]).then(a.cmp(&b)));
    let values: Vec<f64> = idx.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, idx[c])]);
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Spectral("non-finite eigenvalue".into()));
    }
    Ok((values, vectors))
}

/// Combinatorial Laplacian D - A of an undirected graph.
pub fn laplacian(g: &ConvGraph) -> Result<DMatrix<f64>> {
    require_undirected(g)?;
    let a = g.adjacency();
    let n = a.nrows();
    let mut l = -a;
    for i in 0..n {
        let d: f64 = -l.row(i).sum();
        l[(i, i)] = d;
    }
    Ok(l)
}

/// I - D^{-1/2} A D^{-1/2}, with all-zero rows for isolated nodes.
pub fn normalized_laplacian(g: &ConvGraph) -> Result<DMatrix<f64>> {
    require_undirected(g)?;
    let a = g.adjacency();
    let n = a.nrows();
    let inv_sqrt: Vec<f64> = (0..n)
        .map(|i| {
            let d = a.row(i).sum();
            if d > 0.0 {
                1.0 / d.sqrt()
            } else {
                0.0
            }
        })
        .collect();
    Ok(DMatrix::from_fn(n, n, |i, j| {
        let off = -a[(i, j)] * inv_sqrt[i] * inv_sqrt[j];
        if i == j && inv_sqrt[i] > 0.0 {
            1.0 + off
        } else {
            off
        }
    }))
}

pub fn normalized_laplacian_spectrum(g: &ConvGraph, with_vectors: bool) -> Result<Spectrum> {
    let (mut values, vectors) = symmetric_eigen(normalized_laplacian(g)?)?;
    let radius = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let tol = ZERO_TOL * radius.max(f64::MIN_POSITIVE);
    for v in &mut values {
        if v.abs() <= tol {
            *v = 0.0;
        } else if *v > 2.0 && *v - 2.0 <= tol {
            *v = 2.0;
        }
    }
    Ok(Spectrum {
        eigenvalues: values,
        eigenvectors: with_vectors.then_some(vectors),
    })
}

/// Connected component id per node, numbered in order of first node.
pub fn components(g: &ConvGraph) -> Vec<usize> {
    let n = g.node_count();
    let mut adj = vec![Vec::new(); n];
    for e in g.edges() {
        adj[e.src].push(e.dst);
        adj[e.dst].push(e.src);
    }
    let mut comp = vec![usize::MAX; n];
    let mut next = 0;
    for s in 0..n {
        if comp[s] != usize::MAX {
            continue;
        }
        comp[s] = next;
        let mut stack = vec![s];
        while let Some(v) = stack.pop() {
            for &u in &adj[v] {
                if comp[u] == usize::MAX {
                    comp[u] = next;
                    stack.push(u);
                }
            }
        }
        next += 1;
    }
    comp
}

/// Moore-Penrose pseudoinverse of the combinatorial Laplacian. On a
/// disconnected graph this is the block-diagonal per-component pseudoinverse.
pub fn laplacian_pseudoinverse(g: &ConvGraph) -> Result<DMatrix<f64>> {
    let l = laplacian(g)?;
    let n = l.nrows();
    let (values, vectors) = symmetric_eigen(l)?;
    let radius = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let tol = ZERO_TOL * radius.max(f64::MIN_POSITIVE);
    let mut pinv = DMatrix::zeros(n, n);
    for (k, &lambda) in values.iter().enumerate() {
        if lambda.abs() <= tol {
            continue;
        }
        let u = vectors.column(k);
        pinv.ger(1.0 / lambda, &u, &u, 1.0);
    }
    // exact symmetry
    let pinv = (&pinv + pinv.transpose()) * 0.5;
    Ok(pinv)
}

/// Pairwise effective resistances; `f64::INFINITY` across components.
pub fn effective_resistance(g: &ConvGraph) -> Result<DMatrix<f64>> {
    let pinv = laplacian_pseudoinverse(g)?;
    let comp = components(g);
    let n = g.node_count();
    Ok(DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            0.0
        } else if comp[i] != comp[j] {
            f64::INFINITY
        } else {
            (pinv[(i, i)] + pinv[(j, j)] - 2.0 * pinv[(i, j)]).max(0.0)
        }
    }))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HeatMode {
    Exact,
    /// Chebyshev polynomial expansion of the given order.
    Chebyshev(usize),
}

/// Heat kernel exp(-s L) of the combinatorial Laplacian; column `a` is the
/// heat wavelet centered at node `a`.
pub fn heat_kernel(g: &ConvGraph, s: f64, mode: HeatMode) -> Result<DMatrix<f64>> {
    if !(s > 0.0 && s.is_finite()) {
        return Err(Error::InvalidParameter(format!("heat coefficient must be positive, got {s}")));
    }
    let l = laplacian(g)?;
    let n = l.nrows();
    match mode {
        HeatMode::Exact => {
            let (values, vectors) = symmetric_eigen(l)?;
            let scaled = DMatrix::from_fn(n, n, |r, c| vectors[(r, c)] * (-s * values[c].max(0.0)).exp());
            let h = &scaled * vectors.transpose();
            Ok((&h + h.transpose()) * 0.5)
        }
        HeatMode::Chebyshev(order) => chebyshev_heat(&l, s, order),
    }
}

fn chebyshev_heat(l: &DMatrix<f64>, s: f64, order: usize) -> Result<DMatrix<f64>> {
    let n = l.nrows();
    if order == 0 {
        return Err(Error::InvalidParameter("chebyshev order must be >= 1".into()));
    }
    // Gershgorin bound on the largest eigenvalue of D - A.
    let lmax = (0..n).map(|i| 2.0 * l[(i, i)]).fold(0.0f64, f64::max);
    if lmax <= 0.0 {
        return Ok(DMatrix::identity(n, n));
    }
    let half = lmax / 2.0;
    let m = order + 1;
    let coeffs: Vec<f64> = (0..=order)
        .map(|k| {
            let sum: f64 = (0..m)
                .map(|j| {
                    let theta = std::f64::consts::PI * (j as f64 + 0.5) / m as f64;
                    let lambda = (theta.cos() + 1.0) * half;
                    (-s * lambda).exp() * (k as f64 * theta).cos()
                })
                .sum();
            2.0 * sum / m as f64
        })
        .collect();

    // shifted operator with spectrum in [-1, 1]
    let shifted = l / half - DMatrix::identity(n, n);
    let mut t_prev = DMatrix::identity(n, n);
    let mut t_cur = shifted.clone();
    let mut acc = &t_prev * (coeffs[0] / 2.0) + &t_cur * coeffs[1];
    for &c in &coeffs[2..] {
        let t_next = &shifted * &t_cur * 2.0 - &t_prev;
        acc += &t_next * c;
        t_prev = t_cur;
        t_cur = t_next;
    }
    if acc.iter().any(|v| !v.is_finite()) {
        return Err(Error::Spectral("chebyshev expansion diverged".into()));
    }
    Ok((&acc + acc.transpose()) * 0.5)
}

/// L L^+ L residual, max-abs; exposed for diagnostics and tests.
pub fn pseudoinverse_residual(l: &DMatrix<f64>, pinv: &DMatrix<f64>) -> f64 {
    (l * pinv * l - l).amax()
}
