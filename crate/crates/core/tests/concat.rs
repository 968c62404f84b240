//! Concatenated code layout, encoding and outer-code redesign.

mod common;

use polar_stopping::concat::{
    augmented_d_values, build_augmented_spec, build_local_global_spec, ga_augmented,
    ga_local_global, halving_partition, local_global_d_values, opss_construct,
    opss_construct_grouped, ConcatSpec, Interleaver, InterleaverPreset, StoppingBackend,
};
use polar_stopping::graph::FactorGraph;
use polar_stopping::polar::{construct_bec, construct_ga, CodeSpec, Construction};
use polar_stopping::stopping::{concat_sd_upper, exhaustive_mvss};
use polar_stopping::Error;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn small_augmented() -> polar_stopping::concat::AugmentedSpec {
    let inner = CodeSpec::from_order(3, 0, vec![7, 5, 3, 1, 6, 4, 2, 0], Construction::Explicit)
        .unwrap();
    let outer = construct_bec(2, 2, 0.5).unwrap();
    build_augmented_spec(&inner, outer, 0, Interleaver::natural(4)).unwrap()
}

#[test]
fn small_augmented_h_set_and_mvss() {
    let spec = small_augmented();
    assert_eq!(spec.h_set(2).unwrap(), vec![1, 5]);
    let g = FactorGraph::new(3).unwrap();
    let r = exhaustive_mvss(&g, &[1, 5]).unwrap();
    assert_eq!(r.size, 2);
    assert_eq!(r.witnesses, vec![vec![4, 5]]);
    let t = common::Tanner::new(3);
    assert_eq!(t.mvss(&[1, 5]).0, 2);
}

#[test]
fn augmented_encoding_matches_reference() {
    let spec = ga_augmented(7, 40, 4, 8, 3.0, InterleaverPreset::Random { seed: 9 }).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..20 {
        let info: Vec<bool> = (0..spec.info_len()).map(|_| rng.random()).collect();
        let u = spec.inner_u(&info).unwrap();
        assert_eq!(spec.encode(&info).unwrap(), common::encode(&u));
        // the outer codeword sits on the semipolarized channels
        let outer = spec.outer();
        let v = outer.embed(&info[..outer.k()]).unwrap();
        let y = common::encode(&v);
        for (k, &bit) in y.iter().enumerate() {
            assert_eq!(u[spec.inner_position(k)], bit);
        }
        for (pos, &p) in spec.good_channels().iter().enumerate() {
            assert_eq!(u[p], info[outer.k() + pos]);
        }
    }
}

#[test]
fn local_global_layout_is_consistent() {
    let spec = ga_local_global(10, 8, 448, 3.0, &[]).unwrap();
    assert_eq!(spec.num_blocks(), 2);
    assert!((spec.rate() - 0.5).abs() < 1e-12);
    let outer_info = spec.outer().info_set().to_vec();
    let (lo, hi) = outer_info.split_at(outer_info.len() / 2);
    assert_eq!(spec.block_info(0), hi);
    assert_eq!(spec.block_info(1), lo);
    let parity = spec.outer().frozen_set();
    let (plo, phi) = parity.split_at(parity.len() / 2);
    assert_eq!(spec.block_parity(0), plo);
    assert_eq!(spec.block_parity(1), phi);
    for block in spec.blocks() {
        assert_eq!(block.semipolarized.len(), 128);
        let mut w = block.wired.clone();
        w.sort_unstable();
        assert_eq!(w, block.wired);
    }
}

#[test]
fn local_global_encoding_is_systematic() {
    let inner = construct_ga(6, 20, 3.0, 0.5).unwrap();
    let outer = construct_ga(4, 8, 3.0, 0.5).unwrap();
    let partition = halving_partition(&outer).to_vec();
    let spec =
        build_local_global_spec(&[inner.clone(), inner], outer, &[20, 20], Some(partition), &[])
            .unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let info_a: Vec<bool> = (0..spec.outer().k()).map(|_| rng.random()).collect();
    let info_b: Vec<bool> = (0..spec.global_info_len()).map(|_| rng.random()).collect();
    let us = spec.inner_us(&info_a, &info_b).unwrap();
    let y = spec.outer_codeword(&us);
    for (pos, &i) in spec.outer().info_set().iter().enumerate() {
        assert_eq!(y[i], info_a[pos]);
    }
    // y is an outer codeword: its preimage vanishes on the frozen positions
    let v = common::encode(&y);
    for i in spec.outer().frozen_set() {
        assert!(!v[i]);
    }
    let xs = spec.encode(&info_a, &info_b).unwrap();
    for (x, u) in xs.iter().zip(&us) {
        assert_eq!(x, &common::encode(u));
    }
}

#[test]
fn spec_files_round_trip() {
    let aug = ConcatSpec::Augmented(ga_augmented(6, 20, 3, 4, 3.0, InterleaverPreset::Natural).unwrap());
    assert_eq!(ConcatSpec::from_toml(&aug.to_toml()).unwrap(), aug);
    let lg = ConcatSpec::LocalGlobal(ga_local_global(9, 6, 224, 3.0, &[]).unwrap());
    assert_eq!(ConcatSpec::from_toml(&lg.to_toml()).unwrap(), lg);
}

#[test]
fn d_values_match_per_set_mvss() {
    let spec = ga_augmented(5, 8, 3, 4, 3.0, InterleaverPreset::Natural).unwrap();
    let d = augmented_d_values(&spec, StoppingBackend::Best { trials: 10, seed: 0 }).unwrap();
    let g = FactorGraph::new(5).unwrap();
    for (i, &di) in d.iter().enumerate() {
        let h = spec.h_set(i).unwrap();
        assert_eq!(di, exhaustive_mvss(&g, &h).unwrap().size, "outer index {i}");
    }
    let sd = concat_sd_upper(&spec, spec.outer().info_set(), spec.good_channels(), 10, 0).unwrap();
    let want = spec
        .outer()
        .info_set()
        .iter()
        .map(|&i| d[i])
        .chain(spec.good_channels().iter().map(|&j| common::leaf_count(j)))
        .min()
        .unwrap();
    assert_eq!(sd.value, want);
    assert!(sd.exact_terms);
}

#[test]
fn local_global_opss_keeps_block_sizes() {
    let spec = ga_local_global(10, 8, 448, 3.0, &[]).unwrap();
    let d = local_global_d_values(&spec, StoppingBackend::DeletionI).unwrap();
    let outer = spec.outer();
    let info =
        opss_construct_grouped(outer.reliability_order(), &d, 4, outer.k(), &spec.block_of())
            .unwrap();
    let redesigned = spec.with_outer(outer.with_info_set(&info).unwrap()).unwrap();
    for b in 0..2 {
        assert_eq!(redesigned.block_info(b).len(), spec.block_info(b).len());
    }
    assert_eq!(redesigned.wiring(), spec.wiring());
}

#[test]
fn invalid_layouts_are_rejected() {
    let inner = construct_bec(3, 4, 0.5).unwrap();
    let outer = construct_bec(2, 2, 0.5).unwrap();
    assert!(matches!(
        build_augmented_spec(&inner, outer.clone(), 5, Interleaver::natural(4)),
        Err(Error::CapacityExceeded { .. })
    ));
    assert!(build_augmented_spec(&inner, outer, 2, Interleaver::natural(3)).is_err());
    assert!(Interleaver::from_perm(vec![0, 0]).is_err());
}

proptest! {
    #[test]
    fn interleavers_are_permutations(len in 1usize..300, seed in any::<u64>()) {
        let p = Interleaver::random(len, seed);
        let mut v = p.as_slice().to_vec();
        v.sort_unstable();
        prop_assert_eq!(v, (0..len).collect::<Vec<_>>());
        prop_assert_eq!(Interleaver::random(len, seed), p);
    }

    #[test]
    fn opss_swaps_exactly_s_positions(
        d in proptest::collection::vec(1usize..40, 32),
        s in 0usize..5,
        k0 in 8usize..24,
    ) {
        let order: Vec<usize> = (0..32).rev().collect();
        let top: std::collections::BTreeSet<usize> = order[..k0].iter().copied().collect();
        let mut sorted: Vec<usize> = top.iter().map(|&i| d[i]).collect();
        sorted.sort_unstable();
        match opss_construct(&order, &d, s, k0) {
            Ok(info) => {
                prop_assert_eq!(info.len(), k0);
                let out: Vec<usize> = top.iter().copied().filter(|i| !info.contains(i)).collect();
                let new: Vec<usize> = info.iter().copied().filter(|i| !top.contains(i)).collect();
                prop_assert_eq!(out.len(), s);
                prop_assert_eq!(new.len(), s);
                if s > 0 {
                    let threshold = sorted[s - 1];
                    for &j in &new {
                        prop_assert!(d[j] > threshold);
                    }
                }
            }
            Err(Error::SwapPrecondition(_)) => {
                let threshold = sorted[s.max(1) - 1];
                let eligible = order[k0..].iter().filter(|&&j| d[j] > threshold).count();
                prop_assert!(s > 0 && eligible < s);
            }
            Err(e) => prop_assert!(false, "unexpected error {e}"),
        }
    }
}
