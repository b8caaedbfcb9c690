//! Individual topological measures.

use std::collections::VecDeque;

use nalgebra::DMatrix;

use crate::graph::spectral::symmetric_eigen;
use crate::graph::{CollapseMode, ConvGraph};
use crate::util::stable_hash;
use crate::Result;

pub const DAMPING: f64 = 0.85;

/// Weighted PageRank on the directed graph; dangling mass is spread uniformly.
pub fn pagerank(g: &ConvGraph, damping: f64) -> Vec<f64> {
    let n = g.node_count();
    let out = g.out_neighbors();
    let out_w: Vec<f64> = out.iter().map(|l| l.iter().map(|&(_, w)| w).sum()).collect();
    let mut x = vec![1.0 / n as f64; n];
    for _ in 0..10_000 {
        let dangling: f64 = (0..n).filter(|&v| out_w[v] == 0.0).map(|v| x[v]).sum();
        let base = (1.0 - damping) / n as f64 + damping * dangling / n as f64;
        let mut next = vec![base; n];
        for v in 0..n {
            if out_w[v] > 0.0 {
                let share = damping * x[v] / out_w[v];
                for &(u, w) in &out[v] {
                    next[u] += share * w;
                }
            }
        }
        let s: f64 = next.iter().sum();
        next.iter_mut().for_each(|v| *v /= s);
        let diff: f64 = next.iter().zip(&x).map(|(a, b)| (a - b).abs()).sum();
        x = next;
        if diff < 1e-15 {
            break;
        }
    }
    x
}

/// HITS hub and authority scores of the weighted directed adjacency `A`.
///
/// Each vector is the power-iteration limit from the all-ones start, i.e. the
/// projection of the ones vector on the top eigenspace of `A A^T` (hubs) or
/// `A^T A` (authorities), unit L2 norm. An edgeless graph scores all zeros.
pub fn hits(g: &ConvGraph) -> Result<(Vec<f64>, Vec<f64>)> {
    let a = g.adjacency();
    let hubs = principal_direction(&a * a.transpose())?;
    let auths = principal_direction(a.transpose() * &a)?;
    Ok((hubs, auths))
}

fn principal_direction(m: DMatrix<f64>) -> Result<Vec<f64>> {
    let n = m.nrows();
    let (values, vectors) = symmetric_eigen(m)?;
    let top = values.last().copied().unwrap_or(0.0);
    if top <= 0.0 {
        return Ok(vec![0.0; n]);
    }
    let mut x = vec![0.0; n];
    for (k, &lambda) in values.iter().enumerate() {
        if lambda < top * (1.0 - 1e-9) {
            continue;
        }
        let u = vectors.column(k);
        let c: f64 = u.sum();
        for i in 0..n {
            x[i] += c * u[i];
        }
    }
    for v in &mut x {
        *v = v.max(0.0);
    }
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm > 0.0 {
        x.iter_mut().for_each(|v| *v /= norm);
    }
    Ok(x)
}

/// BFS hop distances from `s` over undirected adjacency lists; `usize::MAX` when unreachable.
pub fn bfs(adj: &[Vec<usize>], s: usize) -> Vec<usize> {
    let mut dist = vec![usize::MAX; adj.len()];
    dist[s] = 0;
    let mut q = VecDeque::from([s]);
    while let Some(v) = q.pop_front() {
        for &u in &adj[v] {
            if dist[u] == usize::MAX {
                dist[u] = dist[v] + 1;
                q.push_back(u);
            }
        }
    }
    dist
}

pub fn undirected_lists(g: &ConvGraph) -> Vec<Vec<usize>> {
    g.collapse(CollapseMode::UndirectedUnweighted)
        .out_neighbors()
        .into_iter()
        .map(|l| l.into_iter().map(|(v, _)| v).collect())
        .collect()
}

/// Closeness on the unweighted undirected collapse, restricted to reachable
/// nodes and scaled by the reachable fraction (Wasserman-Faust):
/// `((r - 1) / (n - 1)) * ((r - 1) / sum_d)`. Equals `(n - 1) / sum_d` on a
/// connected graph and stays finite otherwise; isolated nodes score 0.
pub fn closeness(adj: &[Vec<usize>]) -> Vec<f64> {
    let n = adj.len();
    (0..n)
        .map(|v| {
            let dist = bfs(adj, v);
            let reach: Vec<usize> = dist.iter().copied().filter(|&d| d != usize::MAX).collect();
            let r = reach.len();
            let total: usize = reach.iter().sum();
            if r <= 1 || total == 0 {
                0.0
            } else {
                let r1 = (r - 1) as f64;
                (r1 / (n - 1) as f64) * (r1 / total as f64)
            }
        })
        .collect()
}

/// Sum of incoming and outgoing edge weights.
pub fn strength(g: &ConvGraph) -> Vec<f64> {
    let mut s = vec![0.0; g.node_count()];
    for e in g.edges() {
        s[e.src] += e.weight;
        s[e.dst] += e.weight;
    }
    s
}

/// k-core numbers by repeated minimum-degree peeling.
pub fn coreness(adj: &[Vec<usize>]) -> Vec<usize> {
    let n = adj.len();
    let mut degree: Vec<usize> = adj.iter().map(Vec::len).collect();
    let mut removed = vec![false; n];
    let mut core = vec![0; n];
    let mut k = 0;
    for _ in 0..n {
        let v = (0..n)
            .filter(|&v| !removed[v])
            .min_by_key(|&v| (degree[v], v))
            .expect("node left");
        k = k.max(degree[v]);
        core[v] = k;
        removed[v] = true;
        for &u in &adj[v] {
            if !removed[u] {
                degree[u] -= 1;
            }
        }
    }
    core
}

/// Fraction of directed edges whose reverse edge also exists (0 when edgeless).
pub fn reciprocity(g: &ConvGraph) -> f64 {
    if g.edge_count() == 0 {
        return 0.0;
    }
    if !g.is_directed() {
        return 1.0;
    }
    let a = g.adjacency();
    let mutual = g.edges().iter().filter(|e| a[(e.dst, e.src)] > 0.0).count();
    mutual as f64 / g.edge_count() as f64
}

/// Directed density m / (n (n - 1)).
pub fn density(g: &ConvGraph) -> f64 {
    let n = g.node_count();
    if n < 2 {
        return 0.0;
    }
    let m = if g.is_directed() { g.edge_count() } else { 2 * g.edge_count() };
    m as f64 / (n * (n - 1)) as f64
}

/// Global clustering: 3 x triangles / connected triples.
pub fn transitivity(adj: &[Vec<usize>]) -> f64 {
    let (mut closed, mut triples) = (0usize, 0usize);
    for nbrs in adj {
        let d = nbrs.len();
        triples += d * d.saturating_sub(1) / 2;
        for (i, &a) in nbrs.iter().enumerate() {
            for &b in &nbrs[i + 1..] {
                if adj[a].contains(&b) {
                    closed += 1;
                }
            }
        }
    }
    if triples == 0 {
        0.0
    } else {
        closed as f64 / triples as f64
    }
}

/// Eccentricity within each node's component.
pub fn eccentricity(adj: &[Vec<usize>]) -> Vec<usize> {
    (0..adj.len())
        .map(|v| bfs(adj, v).into_iter().filter(|&d| d != usize::MAX).max().unwrap_or(0))
        .collect()
}

/// Brandes betweenness on the unweighted undirected graph, normalized by
/// `(n - 1)(n - 2) / 2`.
pub fn betweenness(adj: &[Vec<usize>]) -> Vec<f64> {
    let n = adj.len();
    let mut cb = vec![0.0; n];
    for s in 0..n {
        let mut stack = Vec::with_capacity(n);
        let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
        let mut sigma = vec![0.0f64; n];
        let mut dist = vec![usize::MAX; n];
        sigma[s] = 1.0;
        dist[s] = 0;
        let mut q = VecDeque::from([s]);
        while let Some(v) = q.pop_front() {
            stack.push(v);
            for &w in &adj[v] {
                if dist[w] == usize::MAX {
                    dist[w] = dist[v] + 1;
                    q.push_back(w);
                }
                if dist[w] == dist[v] + 1 {
                    sigma[w] += sigma[v];
                    preds[w].push(v);
                }
            }
        }
        let mut delta = vec![0.0; n];
        while let Some(w) = stack.pop() {
            for &v in &preds[w] {
                delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w]);
            }
            if w != s {
                cb[w] += delta[w];
            }
        }
    }
    // each undirected pair was counted from both ends
    let scale = if n > 2 { 1.0 / ((n - 1) * (n - 2)) as f64 } else { 0.0 };
    cb.iter().map(|c| c * scale).collect()
}

/// Greedy agglomerative modularity maximization on the weighted undirected
/// collapse. Ties are broken by a seeded hash order over node ids so the
/// partition does not depend on node indices. Returns (modularity, community per node).
pub fn greedy_modularity(g: &ConvGraph, seed: u64) -> (f64, Vec<usize>) {
    let u = g.collapse(CollapseMode::UndirectedWeighted);
    let n = u.node_count();
    let total: f64 = u.edges().iter().map(|e| e.weight).sum();
    if total == 0.0 {
        return (0.0, (0..n).collect());
    }
    let seed_bytes = seed.to_le_bytes();
    let mut rank: Vec<usize> = (0..n).collect();
    rank.sort_by_key(|&v| (stable_hash(&[&seed_bytes, u.nodes()[v].as_bytes()]), u.nodes()[v].clone()));
    // community c starts as the node at rank position c
    let mut member: Vec<usize> = vec![0; n];
    for (c, &v) in rank.iter().enumerate() {
        member[v] = c;
    }
    let mut between = DMatrix::<f64>::zeros(n, n);
    let mut degree = vec![0.0; n];
    for e in u.edges() {
        let (a, b) = (member[e.src], member[e.dst]);
        between[(a, b)] += e.weight;
        between[(b, a)] += e.weight;
        degree[a] += e.weight;
        degree[b] += e.weight;
    }
    let m2 = 2.0 * total;
    let mut alive = vec![true; n];
    loop {
        let mut best: Option<(f64, usize, usize)> = None;
        for i in 0..n {
            if !alive[i] {
                continue;
            }
            for j in i + 1..n {
                if !alive[j] || between[(i, j)] == 0.0 {
                    continue;
                }
                let dq = 2.0 * (between[(i, j)] / m2 - degree[i] * degree[j] / (m2 * m2));
                if best.is_none_or(|(b, _, _)| dq > b) {
                    best = Some((dq, i, j));
                }
            }
        }
        match best {
            Some((dq, i, j)) if dq > 1e-12 => {
                for k in 0..n {
                    let w = between[(j, k)];
                    between[(i, k)] += w;
                    between[(k, i)] += w;
                    between[(j, k)] = 0.0;
                    between[(k, j)] = 0.0;
                }
                between[(i, i)] = 0.0;
                degree[i] += degree[j];
                degree[j] = 0.0;
                alive[j] = false;
                for c in member.iter_mut() {
                    if *c == j {
                        *c = i;
                    }
                }
            }
            _ => break,
        }
    }
    (modularity(&u, &member), member)
}

/// Newman modularity of a partition of an undirected weighted graph.
pub fn modularity(u: &ConvGraph, member: &[usize]) -> f64 {
    let total: f64 = u.edges().iter().map(|e| e.weight).sum();
    if total == 0.0 {
        return 0.0;
    }
    let n = u.node_count();
    let mut internal = vec![0.0; n];
    let mut deg = vec![0.0; n];
    for e in u.edges() {
        if member[e.src] == member[e.dst] {
            internal[member[e.src]] += e.weight;
        }
        deg[member[e.src]] += e.weight;
        deg[member[e.dst]] += e.weight;
    }
    (0..n)
        .map(|c| internal[c] / total - (deg[c] / (2.0 * total)).powi(2))
        .sum()
}

/// Participation coefficient 1 - sum_c (k_vc / k_v)^2 over weighted degrees.
pub fn participation(g: &ConvGraph, member: &[usize]) -> Vec<f64> {
    let u = g.collapse(CollapseMode::UndirectedWeighted);
    let n = u.node_count();
    u.out_neighbors()
        .iter()
        .map(|l| {
            let k: f64 = l.iter().map(|&(_, w)| w).sum();
            if k == 0.0 {
                return 0.0;
            }
            let mut per = vec![0.0; n];
            for &(v, w) in l {
                per[member[v]] += w;
            }
            1.0 - per.iter().map(|x| (x / k).powi(2)).sum::<f64>()
        })
        .collect()
}
