//! Graph builders and linear-algebra oracles shared by the integration tests.
//! Nothing here calls into the library's numerical code.
#![allow(dead_code)]

use convgraph::graph::{Edge, GraphMeta};
use convgraph::ConvGraph;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn names(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("n{i:03}")).collect()
}

pub fn undirected(n: usize, pairs: &[(usize, usize)]) -> ConvGraph {
    let edges = pairs.iter().map(|&(src, dst)| Edge { src, dst, weight: 1.0 }).collect();
    ConvGraph::new(names(n), edges, 0, false, GraphMeta::default()).unwrap()
}

pub fn directed(n: usize, edges: &[(usize, usize, f64)], target: usize) -> ConvGraph {
    let edges = edges.iter().map(|&(src, dst, weight)| Edge { src, dst, weight }).collect();
    ConvGraph::new(names(n), edges, target, true, GraphMeta::default()).unwrap()
}

pub fn with_target(g: &ConvGraph, target: usize) -> ConvGraph {
    ConvGraph::new(g.nodes().to_vec(), g.edges().to_vec(), target, g.is_directed(), g.meta().clone()).unwrap()
}

pub fn complete(n: usize) -> ConvGraph {
    let pairs: Vec<_> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    undirected(n, &pairs)
}

pub fn cycle(n: usize) -> ConvGraph {
    let pairs: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
    undirected(n, &pairs)
}

pub fn path(n: usize) -> ConvGraph {
    let pairs: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
    undirected(n, &pairs)
}

/// Center 0 plus `leaves` leaves.
pub fn star(leaves: usize) -> ConvGraph {
    let pairs: Vec<_> = (1..=leaves).map(|i| (0, i)).collect();
    undirected(leaves + 1, &pairs)
}

/// Two `k`-cliques joined by one edge.
pub fn barbell(k: usize) -> ConvGraph {
    let mut pairs = Vec::new();
    for off in [0, k] {
        for i in 0..k {
            for j in i + 1..k {
                pairs.push((off + i, off + j));
            }
        }
    }
    pairs.push((k - 1, k));
    undirected(2 * k, &pairs)
}

/// Seeded directed Erdős–Rényi graph with weights in [0.5, 3).
pub fn erdos_renyi(n: usize, p: f64, seed: u64) -> ConvGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for s in 0..n {
        for d in 0..n {
            if s != d && rng.random_bool(p) {
                edges.push((s, d, rng.random_range(0.5..3.0)));
            }
        }
    }
    directed(n, &edges, 0)
}

pub fn random_permutation(n: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut p: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = rng.random_range(0..=i);
        p.swap(i, j);
    }
    p
}

pub type Dense = Vec<Vec<f64>>;

/// Dense directed weight matrix from the edge list.
pub fn weights(g: &ConvGraph) -> Dense {
    let n = g.node_count();
    let mut a = vec![vec![0.0; n]; n];
    for e in g.edges() {
        a[e.src][e.dst] += e.weight;
        if !g.is_directed() {
            a[e.dst][e.src] += e.weight;
        }
    }
    a
}

/// Symmetrized weights w(u, v) + w(v, u) of a directed graph.
pub fn symmetric_weights(g: &ConvGraph) -> Dense {
    let a = weights(g);
    let n = a.len();
    if !g.is_directed() {
        return a;
    }
    (0..n).map(|i| (0..n).map(|j| a[i][j] + a[j][i]).collect()).collect()
}

/// 0/1 undirected adjacency lists, sorted.
pub fn neighbor_sets(g: &ConvGraph) -> Vec<Vec<usize>> {
    let s = symmetric_weights(g);
    s.iter().map(|row| (0..row.len()).filter(|&j| row[j] > 0.0).collect()).collect()
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.
pub fn jacobi_eigenvalues(mut a: Dense) -> Vec<f64> {
    let n = a.len();
    for _sweep in 0..100 {
        let off: f64 = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| a[i][j] * a[i][j]).sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Inverse by Gauss-Jordan elimination with partial pivoting.
pub fn invert(mut a: Dense) -> Dense {
    let n = a.len();
    let mut inv: Dense = (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
    for col in 0..n {
        let piv = (col..n).max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs())).unwrap();
        a.swap(col, piv);
        inv.swap(col, piv);
        let d = a[col][col];
        assert!(d.abs() > 1e-300, "singular matrix");
        for j in 0..n {
            a[col][j] /= d;
            inv[col][j] /= d;
        }
        for r in 0..n {
            if r != col {
                let f = a[r][col];
                if f != 0.0 {
                    for j in 0..n {
                        a[r][j] -= f * a[col][j];
                        inv[r][j] -= f * inv[col][j];
                    }
                }
            }
        }
    }
    inv
}

/// Solves `a x = b` via [`invert`].
pub fn solve(a: Dense, b: &[f64]) -> Vec<f64> {
    let inv = invert(a);
    inv.iter().map(|row| row.iter().zip(b).map(|(x, y)| x * y).sum()).collect()
}

/// Connected components of an undirected 0/1 structure by label propagation.
pub fn component_labels(adj: &[Vec<usize>]) -> Vec<usize> {
    let n = adj.len();
    let mut label: Vec<usize> = (0..n).collect();
    loop {
        let mut changed = false;
        for v in 0..n {
            for &u in &adj[v] {
                let m = label[v].min(label[u]);
                if label[v] != m || label[u] != m {
                    label[v] = m;
                    label[u] = m;
                    changed = true;
                }
            }
        }
        if !changed {
            return label;
        }
    }
}
