mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::{erdos_renyi, random_permutation};
use convgraph::analysis::{fuse, verdict, Verdict};
use convgraph::classify::{accuracy, make_splits, micro_f};
use convgraph::corpus::{ingest, sample_balanced, synthesize, write_jsonl, DatasetSpec, Format, Label, SynthParams};
use convgraph::embed::spectral::{fgsd_embed, sf_embed};
use convgraph::embed::{EmbeddingVector, FgsdConfig, Method, SfConfig};
use convgraph::features::{FeatureVector, Scale};
use convgraph::ConvGraph;

fn labels_strategy() -> impl Strategy<Value = Vec<Label>> {
    prop::collection::vec(any::<bool>(), 1..300)
        .prop_map(|v| v.into_iter().map(|b| if b { Label::Abuse } else { Label::NonAbuse }).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn spectral_embeddings_ignore_node_order(n in 2usize..25, p in 0.0f64..0.5, seed in any::<u64>()) {
        let g = erdos_renyi(n, p, seed);
        let perm = random_permutation(n, &mut ChaCha8Rng::seed_from_u64(seed ^ 1));
        let h = g.permuted(&perm).unwrap();
        prop_assert_eq!(sf_embed(&g, &SfConfig::default()).unwrap(), sf_embed(&h, &SfConfig::default()).unwrap());
        prop_assert_eq!(fgsd_embed(&g, &FgsdConfig::default()).unwrap(), fgsd_embed(&h, &FgsdConfig::default()).unwrap());
    }

    #[test]
    fn fgsd_counts_every_pair(n in 1usize..30, p in 0.0f64..0.4, seed in any::<u64>()) {
        let h = fgsd_embed(&erdos_renyi(n, p, seed), &FgsdConfig::default()).unwrap();
        prop_assert_eq!(h.iter().sum::<f64>(), (n * (n - 1) / 2) as f64);
    }

    #[test]
    fn micro_f_is_accuracy(pairs in prop::collection::vec((any::<bool>(), any::<bool>()), 1..400)) {
        let to = |b: bool| if b { Label::Abuse } else { Label::NonAbuse };
        let pred: Vec<Label> = pairs.iter().map(|p| to(p.0)).collect();
        let truth: Vec<Label> = pairs.iter().map(|p| to(p.1)).collect();
        prop_assert!((micro_f(&pred, &truth).unwrap() - accuracy(&pred, &truth).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn verdict_rule(delta in -1.0f64..1.0, p in 0.0f64..1.0) {
        let v = verdict(delta, p);
        let want = if delta < 0.005 {
            Verdict::Captured
        } else if p < 0.05 {
            Verdict::NotCaptured
        } else {
            Verdict::Partial
        };
        prop_assert_eq!(v, want);
    }

    #[test]
    fn fused_length_is_the_sum(d in 1usize..300, f in 0usize..500) {
        let e = EmbeddingVector { graph_id: "g".into(), method: Method::Sf, values: vec![0.5; d] };
        let fv = FeatureVector {
            names: (0..f).map(|i| format!("m{i}")).collect(),
            values: vec![1.0; f],
            scales: vec![Scale::Graph; f],
        };
        let r = fuse(&e, "g", &fv).unwrap();
        prop_assert_eq!(r.values.len(), d + f);
        prop_assert_eq!(r.provenance.len(), d + f);
        prop_assert!(fuse(&e, "other", &fv).is_err());
    }

    #[test]
    fn splits_are_stratified_and_disjoint(labels in labels_strategy(), seed in any::<u64>()) {
        let Ok(plan) = make_splits(&labels, seed) else { return Ok(()) };
        let abuse = labels.iter().filter(|&&l| l == Label::Abuse).count();
        prop_assert_eq!(plan.splits.len(), 10);
        for s in &plan.splits {
            prop_assert_eq!(s.train.len() + s.test.len(), labels.len());
            let mut all: Vec<usize> = s.train.iter().chain(&s.test).copied().collect();
            all.sort_unstable();
            all.dedup();
            prop_assert_eq!(all.len(), labels.len());
            let test_abuse = s.test.iter().filter(|&&i| labels[i] == Label::Abuse).count() as f64;
            let share = s.test.len() as f64 / labels.len() as f64;
            prop_assert!((test_abuse - share * abuse as f64).abs() <= 1.0);
        }
    }

    #[test]
    fn graph_json_round_trip(n in 1usize..20, p in 0.0f64..0.5, seed in any::<u64>()) {
        let g = erdos_renyi(n, p, seed);
        let back = ConvGraph::from_json(&g.to_json().unwrap()).unwrap();
        prop_assert_eq!(back, g);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn balanced_sample_and_corpus_round_trip(seed in any::<u64>(), count in 1usize..6) {
        let stream = synthesize(&SynthParams {
            n_conversations: 3,
            msgs_per_conv: 600,
            abuse_rate: 4.0 / 600.0,
            structure_signal: 0.5,
            seed,
        })
        .unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.jsonl");
        write_jsonl(&stream, &path).unwrap();
        let back = ingest(&path, Format::Jsonl).unwrap();
        prop_assert!(back.warnings.is_empty());
        prop_assert_eq!(&back.messages, &stream);

        let spec = DatasetSpec { abuse_count: count, context_period: 60, seed, ..DatasetSpec::default() };
        let picked = sample_balanced(&stream, &spec).unwrap();
        let abuse = picked.iter().filter(|m| m.label == Label::Abuse).count();
        prop_assert_eq!(abuse, count);
        prop_assert_eq!(picked.len(), 2 * count);
    }
}
