use dp_lumberjack::data::{Column, Dataset};
use dp_lumberjack::hh::NodeId;
use dp_lumberjack::tree::{grow_random_tree, FeatureSchema, FeatureSpec, NodeRule, PathState, SplitKind};
use proptest::prelude::*;

fn schema() -> FeatureSchema {
    FeatureSchema::new(
        "y",
        vec!["a".into(), "b".into()],
        vec![
            FeatureSpec::numeric("x", -5.0, 5.0),
            FeatureSpec::categorical("c", ["p", "q", "r", "s"]),
            FeatureSpec::numeric("z", 0.0, 100.0),
        ],
    )
    .unwrap()
}

fn arb_data() -> impl Strategy<Value = Dataset> {
    prop::collection::vec((-5.0f64..=5.0, 0u32..4, 0.0f64..=100.0, 0u32..2), 1..300).prop_map(|rows| {
        let x = rows.iter().map(|r| r.0).collect();
        let c = rows.iter().map(|r| r.1).collect();
        let z = rows.iter().map(|r| r.2).collect();
        let y = rows.iter().map(|r| r.3).collect();
        Dataset::new(vec![Column::Numeric(x), Column::Categorical(c), Column::Numeric(z)], Some(y)).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn counts_add_up_and_ranges_nest(data in arb_data(), depth in 1usize..25, seed in any::<u64>()) {
        let s = schema();
        let t = grow_random_tree(&data, &s, depth, 0.0, seed, 0).unwrap();
        t.count_tree().validate().unwrap();
        prop_assert_eq!(t.count_tree().root_count(), data.len() as u64);
        prop_assert_eq!(t.bottom_layer().iter().map(|n| n.count).sum::<u64>(), data.len() as u64);
        prop_assert!(t.placements() <= (data.len() * depth) as u64);

        // replay every path and check ranges and one-hot exclusion
        for (label, _) in t.split_rules() {
            let mut state = PathState::root(&s);
            let path: Vec<NodeId> = label.path_from_root().collect();
            for w in path.windows(2) {
                let rule = *t.rule(w[0]).unwrap().split().unwrap();
                if let SplitKind::CategoryIs(c) = rule.kind {
                    prop_assert!(!state.is_used(rule.feature as usize, c));
                }
                let (before0, before2) = (state.range(0).unwrap(), state.range(2).unwrap());
                state.descend(&rule, w[1] == w[0].left());
                let (after0, after2) = (state.range(0).unwrap(), state.range(2).unwrap());
                prop_assert!(before0.0 <= after0.0 && after0.1 <= before0.1 && after0.0 < after0.1);
                prop_assert!(before2.0 <= after2.0 && after2.1 <= before2.1 && after2.0 < after2.1);
            }
            if let NodeRule::Split(rule) = t.rule(label).unwrap() {
                if let SplitKind::Threshold(v) = rule.kind {
                    let (lo, hi) = state.range(rule.feature as usize).unwrap();
                    prop_assert!(lo < v && v < hi);
                }
            }
        }
    }

    #[test]
    fn structure_ignores_data(a in arb_data(), b in arb_data(), seed in any::<u64>()) {
        let s = schema();
        let ta = grow_random_tree(&a, &s, 15, 0.0, seed, 2).unwrap();
        let tb = grow_random_tree(&b, &s, 15, 0.0, seed, 2).unwrap();
        let rules_b: std::collections::HashMap<_, _> = tb.split_rules().collect();
        for (label, rule) in ta.split_rules() {
            if let Some(other) = rules_b.get(&label) {
                prop_assert_eq!(*other, rule);
            }
        }
    }
}
