mod common;

use common::{check_network, NetworkSpec};
use inld_core::catms::{Environment, NodeKind};
use proptest::prelude::*;

/// Networks with up to 12 assumptions, 10 ordinary nodes, 5 contradiction
/// nodes and 40 justifications. Ordinary consequents draw antecedents from
/// lower-numbered nodes only.
fn network() -> impl Strategy<Value = NetworkSpec> {
    (1usize..=12, 0usize..=10, 0usize..=5)
        .prop_flat_map(|(a, o, c)| {
            let total = a + o + c;
            let just = (0..total, prop::collection::vec(any::<prop::sample::Index>(), 1..=3));
            (Just((a, o, c)), prop::collection::vec(just, 0..=40))
        })
        .prop_map(|((a, o, c), raw)| {
            let mut spec = NetworkSpec { assumptions: a, ordinary: o, contradictions: c, justifications: vec![] };
            for (consequent, picks) in raw {
                let pool = match spec.kind(consequent) {
                    NodeKind::Ordinary => consequent,
                    _ => a + o,
                };
                let ants: Vec<usize> = picks.iter().map(|i| i.index(pool)).collect();
                if spec.kind(consequent) == NodeKind::Assumption && ants.contains(&consequent) {
                    continue;
                }
                spec.justifications.push((ants, consequent));
            }
            spec
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn labels_nogoods_and_queries_match_forward_chaining(spec in network()) {
        if let Err(e) = check_network(&spec) {
            prop_assert!(false, "{}", e);
        }
    }

    #[test]
    fn insertion_order_does_not_change_answers(spec in network(), seed in any::<u64>()) {
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        let mut shuffled = spec.clone();
        shuffled.justifications.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
        let (a, ids_a) = spec.build();
        let (b, ids_b) = shuffled.build();
        let nogoods = |t: &inld_core::catms::Tms| t.nogoods().iter().cloned().collect::<std::collections::BTreeSet<_>>();
        prop_assert_eq!(ids_a, ids_b);
        prop_assert_eq!(nogoods(&a), nogoods(&b));
        for n in a.nodes() {
            let mut la = a.label(n.id).to_vec();
            let mut lb = b.label(n.id).to_vec();
            la.sort();
            lb.sort();
            prop_assert_eq!(la, lb, "label of {}", n.datum);
        }
    }
}

#[test]
fn derived_assumptions_are_expanded_at_query_time() {
    // a0 -> n3 -> a2 ; a1 & a2 -> n4 ; optionally n4 -> contradiction
    let mut spec = NetworkSpec {
        assumptions: 3,
        ordinary: 2,
        contradictions: 0,
        justifications: vec![(vec![0], 3), (vec![3], 2), (vec![1, 2], 4)],
    };
    check_network(&spec).unwrap();
    let (tms, ids) = spec.build();
    let env = Environment::new([ids[0], ids[1]]);
    assert!(tms.holds_in(ids[4], &env).unwrap());
    assert_eq!(tms.label(ids[2]), [Environment::singleton(ids[2])]);

    spec.contradictions = 1;
    spec.justifications.push((vec![4], 5));
    check_network(&spec).unwrap();
    let (tms, ids) = spec.build();
    assert!(!tms.env_consistent(&Environment::new([ids[0], ids[1]])));
    assert!(tms.env_consistent(&Environment::new([ids[0]])));
}
