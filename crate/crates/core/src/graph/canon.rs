use super::ConvGraph;

/// Node order from weighted color refinement: nodes sorted by their stable
/// refinement color, ties broken by index.
///
/// Refined colors are isomorphism-invariant, so when the partition is discrete
/// (or ties are automorphic) any relabeling of the graph yields the same
/// reordered adjacency matrix. Spectral routines run on this order so their
/// floating-point output does not depend on the input labeling.
pub fn canonical_order(g: &ConvGraph) -> Vec<usize> {
    let n = g.node_count();
    let out = g.out_neighbors();
    let inn = if g.is_directed() { g.in_neighbors() } else { vec![Vec::new(); n] };

    let mut colors = vec![0usize; n];
    let mut n_colors = 1;
    loop {
        let sigs: Vec<(usize, Vec<(usize, u64)>, Vec<(usize, u64)>)> = (0..n)
            .map(|v| {
                let mut o: Vec<(usize, u64)> = out[v].iter().map(|&(u, w)| (colors[u], w.to_bits())).collect();
                let mut i: Vec<(usize, u64)> = inn[v].iter().map(|&(u, w)| (colors[u], w.to_bits())).collect();
                o.sort_unstable();
                i.sort_unstable();
                (colors[v], o, i)
            })
            .collect();
        let mut distinct: Vec<&(usize, Vec<(usize, u64)>, Vec<(usize, u64)>)> = sigs.iter().collect();
        distinct.sort();
        distinct.dedup();
        let next: Vec<usize> = sigs
            .iter()
            .map(|s| distinct.binary_search(&s).expect("present"))
            .collect();
        let count = distinct.len();
        colors = next;
        if count == n_colors {
            break;
        }
        n_colors = count;
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&v| (colors[v], v));
    order
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::test_graphs::*;
    use crate::graph::CollapseMode;
    use rand::seq::SliceRandom;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn reordered_adjacency_is_labeling_invariant() {
        let g = random_directed(20, 0.2, 1).collapse(CollapseMode::UndirectedWeighted);
        let reorder = |g: &ConvGraph| {
            let ord = canonical_order(g);
            let a = g.adjacency();
            nalgebra::DMatrix::from_fn(a.nrows(), a.ncols(), |i, j| a[(ord[i], ord[j])])
        };
        let base = reorder(&g);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..20 {
            let mut perm: Vec<usize> = (0..20).collect();
            perm.shuffle(&mut rng);
            assert_eq!(reorder(&g.permuted(&perm).unwrap()), base);
        }
    }

    #[test]
    fn star_center_separated_from_leaves() {
        let ord = canonical_order(&star(4));
        // leaves have the lower degree signature, center sorts last
        assert_eq!(ord[4], 0);
    }
}
