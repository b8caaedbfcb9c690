mod common;

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::directed;
use convgraph::analysis::{capture_matrix, Verdict};
use convgraph::classify::{make_splits, SvmParams};
use convgraph::corpus::Label;
use convgraph::features::{compute_features, FeatureConfig};

/// Graphs whose label is decided by how much traffic reaches the target; an
/// embedding of pure noise cannot know that, so the measure must be reported
/// as not captured.
#[test]
fn noise_embedding_misses_target_strength() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut labels = Vec::new();
    let mut strength = Vec::new();
    let mut noise = Vec::new();
    let cfg = FeatureConfig::default();
    for i in 0..200 {
        let label = if i % 2 == 0 { Label::Abuse } else { Label::NonAbuse };
        let n = rng.random_range(8..14);
        let mut w = BTreeMap::new();
        for _ in 0..3 * n {
            let (s, d) = (rng.random_range(0..n), rng.random_range(0..n));
            if s != d {
                *w.entry((s, d)).or_insert(0.0) += 1.0;
            }
        }
        let heavy = if label == Label::Abuse { 6.0 } else { 1.0 };
        *w.entry((1, 0)).or_insert(0.0) += heavy;
        *w.entry((0, 2)).or_insert(0.0) += heavy;
        let edges: Vec<_> = w.into_iter().map(|((s, d), x)| (s, d, x)).collect();
        let g = directed(n, &edges, 0);
        let f = compute_features(&g, &["strength_target".to_string()], &cfg).unwrap();
        strength.push(f.get("strength_target").unwrap());
        noise.push((0..128).map(|_| rng.random_range(-1.0..1.0)).collect::<Vec<f64>>());
        labels.push(label);
    }
    let plan = make_splits(&labels, 1).unwrap();
    let rep = capture_matrix(
        &[("noise".to_string(), noise)],
        &[("strength_target".to_string(), strength)],
        &labels,
        &plan,
        &SvmParams::default(),
    )
    .unwrap();
    let cell = rep.cell("noise", "strength_target").unwrap();
    assert_eq!(cell.verdict, Verdict::NotCaptured, "{cell:?}");
    assert!(cell.delta_f >= 0.25, "{cell:?}");
}
