//! Bounds and exact values of minimum variable stopping sets.

mod common;

use polar_stopping::graph::FactorGraph;
use polar_stopping::polar::{construct_bec, CodeSpec};
use polar_stopping::stopping::{
    deletion_bound_i, deletion_bound_ii, deletion_bound_ii_trial, encoding_bound, exhaustive_mvss,
    lower_bound_i, lower_bound_ii, mvss_exact_or_bounds, stopping_distance, verify_vss,
    ExactMethod,
};
use polar_stopping::Error;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn exhaustive_matches_brute_force_at_n3() {
    let g = FactorGraph::new(3).unwrap();
    let t = common::Tanner::new(3);
    for m in 1u32..256 {
        let set = common::bits(m);
        let got = exhaustive_mvss(&g, &set).unwrap();
        let (size, mut witnesses) = t.mvss(&set);
        witnesses.sort();
        assert_eq!(got.size, size, "J = {set:?}");
        assert_eq!(got.witnesses, witnesses, "J = {set:?}");
    }
}

#[test]
fn minimum_witnesses_lie_in_the_union_of_row_supports() {
    let t = common::Tanner::new(3);
    for m in 1u32..256 {
        let set = common::bits(m);
        assert_eq!(t.mvss_search(&set, false), t.mvss_search(&set, true));
    }
}

#[test]
fn exhaustive_matches_brute_force_at_n4() {
    let g = FactorGraph::new(4).unwrap();
    let t = common::Tanner::new(4);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..60 {
        let m: u32 = rng.random_range(1..1 << 16);
        let set = common::bits(m);
        let got = exhaustive_mvss(&g, &set).unwrap();
        let (size, mut witnesses) = t.mvss(&set);
        witnesses.sort();
        assert_eq!(got.size, size, "J = {set:?}");
        assert_eq!(got.witnesses, witnesses, "J = {set:?}");
    }
}

#[test]
fn worked_example_zero_three_seven() {
    let g = FactorGraph::new(3).unwrap();
    let set = [0, 3, 7];
    let (w, support) = encoding_bound(&set, 3).unwrap();
    assert_eq!((w, support), (5, vec![0, 4, 5, 6, 7]));
    assert_eq!(deletion_bound_i(&g, &set).unwrap().size, 7);
    assert_eq!(exhaustive_mvss(&g, &set).unwrap().size, 5);
}

#[test]
fn worked_example_one_six_seven() {
    let g = FactorGraph::new(3).unwrap();
    let r = exhaustive_mvss(&g, &[1, 6, 7]).unwrap();
    assert_eq!(r.witnesses, vec![vec![0, 3, 5, 7], vec![1, 3, 5, 7]]);
}

#[test]
fn verify_vss_agrees_with_reference() {
    let g = FactorGraph::new(3).unwrap();
    let t = common::Tanner::new(3);
    for m in (1u32..256).step_by(7) {
        let set = common::bits(m);
        for l in 0u32..256 {
            let leaves = common::bits(l);
            assert_eq!(verify_vss(&g, &set, &leaves), t.is_vss(&set, &leaves));
        }
    }
}

#[test]
fn deletion_trace_replays_to_witness() {
    let g = FactorGraph::new(5).unwrap();
    let t = common::Tanner::new(5);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..50 {
        let m: u32 = rng.random();
        if m == 0 {
            continue;
        }
        let set = common::bits(m);
        let d1 = deletion_bound_i(&g, &set).unwrap();
        assert_eq!(d1.trace.replay(&g, &set).unwrap(), d1.witness);
        assert!(t.is_vss(&set, &d1.witness));
        let d2 = deletion_bound_ii_trial(&g, &set, 5, 1).unwrap();
        assert_eq!(d2.trace.replay(&g, &set).unwrap(), d2.witness);
        assert!(t.is_vss(&set, &d2.witness));
    }
}

#[test]
fn random_deletion_is_reproducible() {
    let g = FactorGraph::new(5).unwrap();
    let set = [3, 5, 6, 9, 17, 24, 30];
    let a = deletion_bound_ii(&g, &set, 10, 42).unwrap();
    let b = deletion_bound_ii(&g, &set, 10, 42).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.trial_sizes.len(), 10);
    assert_eq!(a.best.size, *a.trial_sizes.iter().min().unwrap());
    assert!(deletion_bound_ii(&g, &set, 0, 42).is_err());
}

#[test]
fn dispatch_selects_exact_methods() {
    let g = FactorGraph::new(4).unwrap();
    let pair = mvss_exact_or_bounds(&g, &[3, 12], 5, 0).unwrap();
    assert_eq!(pair.exact_method, Some(ExactMethod::Pair));
    assert_eq!(pair.exact, Some(common::lower_bound_ii(4, &[3, 12])));
    let closed = common::cover_swap_closure(4, &[5]);
    let r = mvss_exact_or_bounds(&g, &closed, 5, 0).unwrap();
    assert_eq!(r.exact_method, Some(ExactMethod::CoverSwap));
    assert_eq!(r.exact, Some(common::lower_bound_i(&closed)));
    let t = common::Tanner::new(4);
    assert!(t.is_vss(&closed, r.witness.as_ref().unwrap()));
}

#[test]
fn large_orders_report_bounds_only() {
    let g = FactorGraph::new(7).unwrap();
    assert!(matches!(exhaustive_mvss(&g, &[3, 77]), Err(Error::InstanceTooLarge(_))));
    let set = [7, 11, 19, 35, 67, 100, 101];
    let r = mvss_exact_or_bounds(&g, &set, 5, 0).unwrap();
    assert!(r.lower() <= r.upper());
    if r.exact.is_none() {
        assert!(r.exact_method.is_none());
    }
}

#[test]
fn stopping_distance_is_minimum_leaf_count() {
    let spec = construct_bec(8, 128, 0.5).unwrap();
    let want = spec.info_set().iter().map(|&i| common::leaf_count(i)).min().unwrap();
    assert_eq!(stopping_distance(&spec).unwrap(), want);
    let spec = CodeSpec::from_info_set(3, &[3, 5, 6, 7]).unwrap();
    assert_eq!(stopping_distance(&spec).unwrap(), 4);
}

#[test]
fn empty_set_is_rejected() {
    assert!(matches!(lower_bound_i(&[], 3), Err(Error::EmptyIndexSet)));
    let g = FactorGraph::new(3).unwrap();
    assert!(matches!(mvss_exact_or_bounds(&g, &[], 2, 0), Err(Error::EmptyIndexSet)));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn closed_form_bounds_match_reference(n in 1usize..7, raw in proptest::collection::vec(0usize..64, 1..10)) {
        let set: Vec<usize> = raw.iter().map(|&j| j % (1 << n)).collect();
        let mut uniq = set.clone();
        uniq.sort_unstable();
        uniq.dedup();
        prop_assert_eq!(lower_bound_i(&set, n).unwrap(), common::lower_bound_i(&uniq));
        prop_assert_eq!(lower_bound_ii(&set, n).unwrap(), common::lower_bound_ii(n, &uniq));
        prop_assert_eq!(encoding_bound(&set, n).unwrap().0, common::encoding_bound(n, &uniq));
    }

    #[test]
    fn report_is_sandwiched(m in 1u32..65536, seed in any::<u64>()) {
        let g = FactorGraph::new(4).unwrap();
        let t = common::Tanner::new(4);
        let set = common::bits(m);
        let r = mvss_exact_or_bounds(&g, &set, 4, seed).unwrap();
        let (exact, _) = t.mvss(&set);
        prop_assert_eq!(r.exact, Some(exact));
        prop_assert!(r.lower() <= exact && exact <= r.upper());
        let w = r.witness.clone().unwrap();
        prop_assert_eq!(w.len(), exact);
        prop_assert!(t.is_vss(&set, &w));
    }

    #[test]
    fn upper_bounds_hold_at_n5(set in proptest::collection::btree_set(0usize..32, 1..8), seed in any::<u64>()) {
        let g = FactorGraph::new(5).unwrap();
        let t = common::Tanner::new(5);
        let set: Vec<usize> = set.into_iter().collect();
        let r = mvss_exact_or_bounds(&g, &set, 3, seed).unwrap();
        prop_assert!(r.lower() <= r.upper());
        if let Some(e) = r.exact {
            prop_assert!(r.lower() <= e && e <= r.upper());
        }
        if let Some(w) = &r.witness {
            prop_assert!(t.is_vss(&set, w));
        }
    }
}
