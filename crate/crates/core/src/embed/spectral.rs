//! Spectral embeddings: SF and FGSD for whole graphs, GraphWave for nodes.
//!
//! SF and FGSD reorder nodes canonically before any floating-point work and
//! snap their outputs to a grid, so isomorphic inputs give identical bytes.

use num_complex::Complex64;

use super::{FgsdConfig, GraphWaveConfig, SfConfig};
use crate::graph::{
    canonical_order, effective_resistance, heat_kernel, normalized_laplacian_spectrum, CollapseMode, ConvGraph, HeatMode,
};
use crate::{Error, Result};

/// Grid spacing for reported eigenvalues.
pub const SF_GRID: f64 = 1.0 / 4_294_967_296.0;

/// Slack added before flooring a distance into its histogram bin, so values
/// that land on a bin edge up to rounding fall into the upper bin.
pub const BIN_EPS: f64 = 1e-9;

pub(crate) fn canonical(g: &ConvGraph) -> Result<ConvGraph> {
    let order = canonical_order(g);
    let mut perm = vec![0; order.len()];
    for (pos, &v) in order.iter().enumerate() {
        perm[v] = pos;
    }
    g.permuted(&perm)
}

/// The k smallest positive normalized-Laplacian eigenvalues of the
/// unweighted collapse, ascending and zero-padded to length k.
pub fn sf_embed(g: &ConvGraph, cfg: &SfConfig) -> Result<Vec<f64>> {
    cfg.validate()?;
    let u = canonical(&g.collapse(CollapseMode::UndirectedUnweighted))?;
    let spec = normalized_laplacian_spectrum(&u, false)?;
    let mut out: Vec<f64> = spec
        .eigenvalues
        .iter()
        .filter(|&&v| v > 0.0)
        .take(cfg.dimensions)
        .map(|&v| (v / SF_GRID).round() * SF_GRID)
        .collect();
    out.resize(cfg.dimensions, 0.0);
    Ok(out)
}

/// Histogram bin of a distance: equal-width bins over [0, range], with
/// larger and infinite distances in the last bin.
pub fn fgsd_bin(r: f64, bins: usize, range: f64) -> usize {
    if !r.is_finite() {
        return bins - 1;
    }
    let width = range / bins as f64;
    let b = (r / width + BIN_EPS).floor();
    if b < 0.0 {
        0
    } else {
        (b as usize).min(bins - 1)
    }
}

/// Histogram of effective resistances over unordered node pairs of the
/// weighted collapse.
pub fn fgsd_embed(g: &ConvGraph, cfg: &FgsdConfig) -> Result<Vec<f64>> {
    cfg.validate()?;
    let u = canonical(&g.collapse(CollapseMode::UndirectedWeighted))?;
    let r = effective_resistance(&u)?;
    let n = u.node_count();
    let mut hist = vec![0.0; cfg.hist_bins];
    for i in 0..n {
        for j in i + 1..n {
            hist[fgsd_bin(r[(i, j)], cfg.hist_bins, cfg.hist_range)] += 1.0;
        }
    }
    Ok(hist)
}

/// Empirical characteristic function of the target's heat wavelet,
/// interleaved as (Re, Im) at t_j = j·step_size.
pub fn graphwave(g: &ConvGraph, cfg: &GraphWaveConfig) -> Result<Vec<f64>> {
    Ok(graphwave_nodes(g, cfg, &[g.target()])?.swap_remove(0))
}

pub fn graphwave_nodes(g: &ConvGraph, cfg: &GraphWaveConfig, nodes: &[usize]) -> Result<Vec<Vec<f64>>> {
    cfg.validate()?;
    let u = g.collapse(CollapseMode::UndirectedWeighted);
    let n = u.node_count();
    let mode = if n <= cfg.switch {
        HeatMode::Exact
    } else {
        HeatMode::Chebyshev(cfg.approximation)
    };
    let psi = heat_kernel(&u, cfg.heat_coefficient, mode)?;
    let mut out = Vec::with_capacity(nodes.len());
    for &a in nodes {
        if a >= n {
            return Err(Error::InvalidParameter(format!("node {a} out of range")));
        }
        let col = psi.column(a);
        let mut emb = Vec::with_capacity(2 * cfg.dimensions);
        for j in 0..cfg.dimensions {
            let t = j as f64 * cfg.step_size;
            let phi: Complex64 = col.iter().map(|&x| Complex64::new(0.0, t * x).exp()).sum::<Complex64>() / n as f64;
            emb.push(phi.re);
            emb.push(phi.im);
        }
        out.push(emb);
    }
    Ok(out)
}
