use dp_lumberjack::hh::{
    brute_force_heavy, mark_heavy_hitters, mark_heavy_hitters_reference, mark_with_oracle, misclassification_margin,
    CountTree, NodeId,
};
use dp_lumberjack::rng::{stream_rng, Stream};
use dp_lumberjack::threshold::{GaussianSparseThreshold, InstrumentedOracle, ThresholdOracleConfig, Variant};
use proptest::prelude::*;

fn arb_tree(max_height: usize) -> impl Strategy<Value = CountTree> {
    (1..=max_height).prop_flat_map(|h| {
        let width = 1u128 << (h - 1);
        prop::collection::vec((0..width, 1u64..30), 0..60).prop_map(move |leaves| {
            CountTree::from_leaf_counts(h, leaves.into_iter().map(|(i, c)| (NodeId(width + i), c))).unwrap()
        })
    })
}

fn bound(h: usize) -> u32 {
    1 + h.ilog2()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn noiseless_marking_is_exact(tree in arb_tree(14), tau in 1.0f64..60.0, gate_frac in 0.0f64..1.0) {
        let gate = (tau - 1.0) * gate_frac;
        let cfg = ThresholdOracleConfig::noiseless(tau, gate, Variant::OneSided).unwrap();
        let heavy = mark_heavy_hitters(&tree, &cfg, stream_rng(0, Stream::Threshold, 0, 0)).unwrap();
        prop_assert_eq!(&heavy, &brute_force_heavy(&tree, tau));
        prop_assert_eq!(misclassification_margin(&tree, &heavy, tau), 0.0);
    }

    #[test]
    fn touches_per_path_are_logarithmic(tree in arb_tree(20), seed in any::<u64>(), sigma in 0.5f64..20.0) {
        let cfg = ThresholdOracleConfig::new(sigma, 10.0, 4.0, Variant::OneSided).unwrap();
        let mut oracle = InstrumentedOracle::new(GaussianSparseThreshold::new(cfg, stream_rng(seed, Stream::Threshold, 0, 0)));
        let heavy = mark_with_oracle(&tree, &mut oracle);
        prop_assert!(heavy.is_upward_closed());
        prop_assert!(oracle.max_repeat() <= 1);
        let h = tree.height();
        for leaf in tree.layer(h - 1) {
            prop_assert!(oracle.touches_on_path(leaf.label) <= bound(h));
        }
    }

    #[test]
    fn skipping_matches_reference(tree in arb_tree(12), seed in any::<u64>(), sigma in 0.5f64..10.0, gate in 0.0f64..10.0) {
        let tau = 1.0 + gate + 2.0;
        let cfg = ThresholdOracleConfig::new(sigma, tau, gate, Variant::OneSided).unwrap();
        let fast = mark_heavy_hitters(&tree, &cfg, stream_rng(seed, Stream::Threshold, 0, 0)).unwrap();
        let mut oracle = GaussianSparseThreshold::new(cfg, stream_rng(seed, Stream::Threshold, 0, 0));
        let slow = mark_heavy_hitters_reference(&tree, &mut oracle).unwrap();
        prop_assert_eq!(fast, slow);
    }

    #[test]
    fn two_sided_error_is_bounded(tree in arb_tree(12), seed in any::<u64>(), sigma in 0.5f64..10.0) {
        let (tau, gate) = (12.0, 5.0);
        let cfg = ThresholdOracleConfig::new(sigma, tau, gate, Variant::TwoSided).unwrap();
        let heavy = mark_heavy_hitters(&tree, &cfg, stream_rng(seed, Stream::Threshold, 0, 0)).unwrap();
        prop_assert!(misclassification_margin(&tree, &heavy, tau) <= 1.0 + gate);
    }
}

#[test]
fn reference_accepts_low_tau() {
    let tree = CountTree::from_leaf_counts(3, [(NodeId(4), 3)]).unwrap();
    let cfg = ThresholdOracleConfig::noiseless(-1.0, 0.0, Variant::OneSided).unwrap();
    let mut oracle = GaussianSparseThreshold::new(cfg, stream_rng(0, Stream::Threshold, 0, 0));
    let heavy = mark_heavy_hitters_reference(&tree, &mut oracle).unwrap();
    // every node of the complete tree exceeds a negative threshold
    assert_eq!(heavy.len(), 7);
    assert!(mark_heavy_hitters(&tree, &cfg, stream_rng(0, Stream::Threshold, 0, 0)).is_err());
}
