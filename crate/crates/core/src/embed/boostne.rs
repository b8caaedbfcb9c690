//! Boosted non-negative matrix factorization of the transition matrix.
//!
//! Objective per factorization: ½‖M − WH‖²_F + (α/2)(‖W‖²_F + ‖H‖²_F),
//! minimized by multiplicative updates, which keep every entry non-negative
//! and never increase the objective.

use nalgebra::DMatrix;
use rand::Rng;

use super::BoostNeConfig;
use crate::graph::{CollapseMode, ConvGraph};
use crate::util::derived_rng;
use crate::{Error, Result};

/// Average of P¹..P^order, P the row-normalized weighted adjacency of the
/// undirected collapse. Rows of isolated nodes are zero.
pub fn target_matrix(g: &ConvGraph, order: usize) -> Result<DMatrix<f64>> {
    if order == 0 {
        return Err(Error::InvalidParameter("order must be at least 1".into()));
    }
    let mut p = g.collapse(CollapseMode::UndirectedWeighted).adjacency();
    for mut row in p.row_iter_mut() {
        let s: f64 = row.sum();
        if s > 0.0 {
            row /= s;
        }
    }
    let mut power = p.clone();
    let mut acc = p.clone();
    for _ in 1..order {
        power = &power * &p;
        acc += &power;
    }
    acc /= order as f64;
    if acc.iter().all(|&x| x == 0.0) {
        return Err(Error::DegenerateMatrix);
    }
    Ok(acc)
}

pub fn nmf_objective(m: &DMatrix<f64>, w: &DMatrix<f64>, h: &DMatrix<f64>, alpha: f64) -> f64 {
    0.5 * (m - w * h).norm_squared() + 0.5 * alpha * (w.norm_squared() + h.norm_squared())
}

fn mu_update(x: &mut DMatrix<f64>, num: &DMatrix<f64>, den: &DMatrix<f64>) {
    for ((xv, &n), &d) in x.iter_mut().zip(num.iter()).zip(den.iter()) {
        // a zero entry stays zero; a positive one has a positive denominator
        // whenever alpha > 0
        if *xv > 0.0 && d > 0.0 {
            *xv *= n / d;
        }
    }
}

/// Rank-`k` NMF from a seeded uniform(0,1) start. When `trace` is given,
/// the objective is recorded before the first and after every update of H
/// and of W.
pub fn nmf(
    m: &DMatrix<f64>,
    k: usize,
    alpha: f64,
    iterations: usize,
    seed: u64,
    mut trace: Option<&mut Vec<f64>>,
) -> (DMatrix<f64>, DMatrix<f64>) {
    let (r, c) = m.shape();
    let mut rng = derived_rng(seed, &[b"nmf"]);
    let mut w = DMatrix::from_fn(r, k, |_, _| rng.random::<f64>());
    let mut h = DMatrix::from_fn(k, c, |_, _| rng.random::<f64>());
    if let Some(t) = trace.as_deref_mut() {
        t.push(nmf_objective(m, &w, &h, alpha));
    }
    for _ in 0..iterations {
        let wt = w.transpose();
        let num = &wt * m;
        let den = &wt * &w * &h + &h * alpha;
        mu_update(&mut h, &num, &den);
        if let Some(t) = trace.as_deref_mut() {
            t.push(nmf_objective(m, &w, &h, alpha));
        }
        let ht = h.transpose();
        let num = m * &ht;
        let den = &w * (&h * &ht) + &w * alpha;
        mu_update(&mut w, &num, &den);
        if let Some(t) = trace.as_deref_mut() {
            t.push(nmf_objective(m, &w, &h, alpha));
        }
    }
    (w, h)
}

/// Per-stage results of the boosting loop.
#[derive(Debug, Clone)]
pub struct BoostStages {
    pub factors: Vec<DMatrix<f64>>,
    /// ‖R_i‖_F of the matrix factorized at stage i.
    pub residual_norms: Vec<f64>,
}

pub fn boost(m: &DMatrix<f64>, cfg: &BoostNeConfig, seed: u64) -> BoostStages {
    let mut residual = m.clone();
    let mut factors = Vec::with_capacity(cfg.iterations + 1);
    let mut residual_norms = Vec::with_capacity(cfg.iterations + 1);
    for stage in 0..=cfg.iterations {
        residual_norms.push(residual.norm());
        let stage_seed = crate::util::stable_hash(&[&seed.to_le_bytes(), &(stage as u64).to_le_bytes()]);
        let (w, h) = nmf(&residual, cfg.dimensions, cfg.alpha, cfg.inner_iterations, stage_seed, None);
        residual -= &w * &h;
        residual.apply(|x| *x = x.max(0.0));
        factors.push(w);
    }
    BoostStages {
        factors,
        residual_norms,
    }
}

/// Target-node rows of W₀..W_iterations, concatenated.
pub fn boostne(g: &ConvGraph, cfg: &BoostNeConfig, seed: u64) -> Result<Vec<f64>> {
    cfg.validate()?;
    let m = target_matrix(g, cfg.order)?;
    let stages = boost(&m, cfg, seed);
    let t = g.target();
    Ok(stages
        .factors
        .iter()
        .flat_map(|w| w.row(t).iter().copied().collect::<Vec<_>>())
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::test_graphs::*;

    #[test]
    fn transition_matrix_rows_sum_to_one() {
        let g = random_directed(12, 0.25, 3);
        let m = target_matrix(&g, 1).unwrap();
        let adj = crate::features::measures::undirected_lists(&g);
        for (i, row) in m.row_iter().enumerate() {
            let s: f64 = row.sum();
            if adj[i].is_empty() {
                assert_eq!(s, 0.0);
            } else {
                assert!((s - 1.0).abs() < 1e-12);
            }
        }
        let m2 = target_matrix(&g, 2).unwrap();
        let p = target_matrix(&g, 1).unwrap();
        assert!((m2 - (&p + &p * &p) / 2.0).norm() < 1e-12);
    }

    #[test]
    fn edgeless_graph_is_degenerate() {
        assert!(matches!(target_matrix(&directed(3, &[]), 1), Err(Error::DegenerateMatrix)));
    }

    #[test]
    fn multiplicative_updates_are_monotone() {
        for seed in 0..5 {
            let g = random_directed(20, 0.2, seed);
            let m = target_matrix(&g, 1).unwrap();
            let mut trace = Vec::new();
            let (w, h) = nmf(&m, 8, 0.01, 200, seed, Some(&mut trace));
            for pair in trace.windows(2) {
                assert!(pair[1] <= pair[0] + 1e-9, "{} -> {}", pair[0], pair[1]);
            }
            assert!(w.iter().chain(h.iter()).all(|&x| x >= 0.0));
        }
    }

    #[test]
    fn residual_norms_do_not_increase() {
        let g = random_directed(20, 0.2, 7);
        let m = target_matrix(&g, 1).unwrap();
        let stages = boost(&m, &BoostNeConfig::default(), 1);
        assert_eq!(stages.factors.len(), 17);
        for pair in stages.residual_norms.windows(2) {
            assert!(pair[1] <= pair[0] + 1e-12);
        }
    }

    #[test]
    fn output_dimension_and_determinism() {
        let g = random_directed(15, 0.2, 1);
        let a = boostne(&g, &BoostNeConfig::default(), 2).unwrap();
        assert_eq!(a.len(), 136);
        assert_eq!(a, boostne(&g, &BoostNeConfig::default(), 2).unwrap());
        assert!(a.iter().all(|&x| x >= 0.0 && x.is_finite()));
    }
}
