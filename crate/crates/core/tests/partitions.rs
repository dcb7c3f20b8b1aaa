mod common;

use matbeta::partitions::{enumerate, Partition};
use proptest::prelude::*;

#[test]
fn counts_match_partition_function() {
    let p = common::partition_numbers(20);
    for k in 0..=20 {
        assert_eq!(enumerate(k, k.max(1)).len() as u64, p[k], "k = {k}");
    }
}

#[test]
fn bounded_length_and_weight() {
    for k in 0..=14 {
        for m in 1..=5 {
            let all = enumerate(k, m);
            let mut seen = std::collections::HashSet::new();
            for kappa in &all {
                assert!(kappa.len() <= m);
                assert_eq!(kappa.weight(), k);
                assert!(kappa.parts().windows(2).all(|w| w[0] >= w[1]));
                assert!(seen.insert(kappa.clone()));
            }
            // Reverse-lexicographic order.
            assert!(all.windows(2).all(|w| w[0].parts() > w[1].parts()));
        }
    }
}

proptest! {
    #[test]
    fn conjugation_is_an_involution(parts in proptest::collection::vec(1usize..7, 0..6)) {
        let kappa = Partition::new(parts);
        prop_assume!(kappa.weight() <= 12);
        prop_assert_eq!(kappa.conjugate().conjugate(), kappa.clone());
        prop_assert_eq!(kappa.conjugate().weight(), kappa.weight());
    }
}
