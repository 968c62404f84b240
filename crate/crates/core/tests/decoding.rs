//! Belief propagation and erasure peeling.

mod common;

use polar_stopping::concat::{
    build_local_global_spec, ga_augmented, halving_partition, InterleaverPreset,
};
use polar_stopping::decoding::{
    augmented_bec_peel, augmented_bp_decode, bec_peel, bp_decode, global_decode, local_decode,
    CheckRule, Schedule,
};
use polar_stopping::polar::{awgn_sigma, construct_bec, construct_ga, encode, CodeSpec};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

fn bpsk_llr(x: &[bool], sigma: f64, rng: &mut ChaCha8Rng) -> Vec<f32> {
    let noise = Normal::new(0.0, sigma).unwrap();
    x.iter()
        .map(|&b| {
            let s = if b { -1.0 } else { 1.0 };
            (2.0 * (s + noise.sample(rng)) / (sigma * sigma)) as f32
        })
        .collect()
}

fn clean_llr(x: &[bool]) -> Vec<f32> {
    x.iter().map(|&b| if b { -8.0 } else { 8.0 }).collect()
}

fn random_bits(k: usize, rng: &mut ChaCha8Rng) -> Vec<bool> {
    (0..k).map(|_| rng.random()).collect()
}

#[test]
fn bp_recovers_noiseless_codewords() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for n in 1..=9 {
        let spec = construct_bec(n, 1 << (n - 1), 0.5).unwrap();
        for rule in [CheckRule::SumProduct, CheckRule::min_sum()] {
            let info = random_bits(spec.k(), &mut rng);
            let x = encode(&spec, &spec.embed(&info).unwrap()).unwrap();
            let r = bp_decode(&spec, &clean_llr(&x), 50, rule).unwrap();
            assert_eq!(r.info, info);
            assert!(r.converged);
        }
    }
}

#[test]
fn bp_decodes_at_high_snr() {
    let spec = construct_ga(8, 128, 4.0, 0.5).unwrap();
    let sigma = awgn_sigma(4.0, 0.5);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut errors = 0;
    for _ in 0..200 {
        let info = random_bits(spec.k(), &mut rng);
        let x = encode(&spec, &spec.embed(&info).unwrap()).unwrap();
        let r = bp_decode(&spec, &bpsk_llr(&x, sigma, &mut rng), 100, CheckRule::SumProduct).unwrap();
        errors += usize::from(r.info != info);
    }
    assert!(errors <= 4, "{errors} frame errors at 4 dB");
}

#[test]
fn bp_with_erased_channel_matches_peeling_outcome() {
    // With LLRs in {0, ±inf-ish}, BP success on the information bits matches peeling.
    let spec = construct_bec(5, 12, 0.5).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..200 {
        let info = random_bits(spec.k(), &mut rng);
        let x = encode(&spec, &spec.embed(&info).unwrap()).unwrap();
        let erased: Vec<bool> = (0..32).map(|_| rng.random_bool(0.3)).collect();
        let obs: Vec<Option<bool>> = x.iter().zip(&erased).map(|(&b, &e)| (!e).then_some(b)).collect();
        let peel = bec_peel(&spec, &obs).unwrap();
        if peel.converged {
            assert_eq!(peel.info, info);
            let llr: Vec<f32> = x
                .iter()
                .zip(&erased)
                .map(|(&b, &e)| if e { 0.0 } else if b { -30.0 } else { 30.0 })
                .collect();
            let bp = bp_decode(&spec, &llr, 100, CheckRule::SumProduct).unwrap();
            assert_eq!(bp.info, info);
        }
    }
}

#[test]
fn augmented_bp_recovers_noiseless_codewords() {
    let spec = ga_augmented(7, 40, 4, 8, 3.0, InterleaverPreset::Natural).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for schedule in [Schedule::RoundRobin, Schedule::InnerOnly] {
        let info = random_bits(spec.info_len(), &mut rng);
        let x = spec.encode(&info).unwrap();
        let r = augmented_bp_decode(&spec, &clean_llr(&x), 50, schedule, CheckRule::SumProduct)
            .unwrap();
        assert_eq!(r.info, info);
    }
}

#[test]
fn augmented_peeling_without_erasures_succeeds() {
    let spec = ga_augmented(6, 20, 3, 4, 3.0, InterleaverPreset::Random { seed: 3 }).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let info = random_bits(spec.info_len(), &mut rng);
    let x = spec.encode(&info).unwrap();
    let obs: Vec<Option<bool>> = x.iter().map(|&b| Some(b)).collect();
    let r = augmented_bec_peel(&spec, &obs).unwrap();
    assert!(r.converged);
    assert_eq!(r.info, info);
    let none = vec![None; x.len()];
    assert!(!augmented_bec_peel(&spec, &none).unwrap().converged);
}

#[test]
fn local_and_global_decoding_recover_noiseless_codewords() {
    let inner = construct_ga(6, 20, 3.0, 0.5).unwrap();
    let outer = construct_ga(4, 8, 3.0, 0.5).unwrap();
    let partition = halving_partition(&outer).to_vec();
    let spec = build_local_global_spec(&[inner.clone(), inner], outer, &[20, 20], Some(partition), &[])
        .unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let info_a = random_bits(spec.outer().k(), &mut rng);
    let info_b = random_bits(spec.global_info_len(), &mut rng);
    let xs = spec.encode(&info_a, &info_b).unwrap();
    let llrs: Vec<Vec<f32>> = xs.iter().map(|x| clean_llr(x)).collect();
    let g = global_decode(&spec, &llrs, 50, Schedule::RoundRobin, CheckRule::SumProduct).unwrap();
    let mut want = info_a.clone();
    want.extend(&info_b);
    assert_eq!(g.info, want);
    let mut offset = 0;
    for b in 0..spec.num_blocks() {
        let l = local_decode(&spec, b, &llrs[b], 50, CheckRule::SumProduct).unwrap();
        let outer_info = spec.outer().info_set();
        let mut expect: Vec<bool> = spec
            .block_info(b)
            .iter()
            .map(|k| info_a[outer_info.iter().position(|p| p == k).unwrap()])
            .collect();
        let good = spec.blocks()[b].good.len();
        expect.extend(&info_b[offset..offset + good]);
        offset += good;
        assert_eq!(l.info, expect);
    }
    assert!(local_decode(&spec, 2, &llrs[0], 5, CheckRule::SumProduct).is_err());
}

#[test]
fn length_mismatches_are_rejected() {
    let spec = construct_bec(3, 4, 0.5).unwrap();
    assert!(bp_decode(&spec, &[0.0; 7], 5, CheckRule::SumProduct).is_err());
    assert!(bec_peel(&spec, &[None; 9]).is_err());
}

proptest! {
    #[test]
    fn peeling_matches_reference_residual(
        n in 2usize..6,
        info_mask in any::<u32>(),
        erase_mask in any::<u32>(),
    ) {
        let len = 1usize << n;
        let info: Vec<usize> = (0..len).filter(|&i| info_mask >> i & 1 == 1).collect();
        prop_assume!(!info.is_empty());
        let spec = CodeSpec::from_info_set(n, &info).unwrap();
        let erased: Vec<usize> = (0..len).filter(|&k| erase_mask >> k & 1 == 1).collect();
        let u = vec![false; len];
        let x = encode(&spec, &u).unwrap();
        let obs: Vec<Option<bool>> = (0..len).map(|k| (erase_mask >> k & 1 == 0).then_some(x[k])).collect();
        let got = bec_peel(&spec, &obs).unwrap();
        let t = common::Tanner::new(n);
        let (roots, _) = t.residual(&info, &erased);
        prop_assert_eq!(got.unresolved, roots);
    }
}
