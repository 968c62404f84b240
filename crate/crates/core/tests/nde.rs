//! Quantized density evolution and the NDE outer construction.

mod common;

use polar_stopping::concat::{ga_augmented, ga_local_global, InterleaverPreset};
use polar_stopping::decoding::CheckRule;
use polar_stopping::nde::{
    augmented_nde, bin_center, local_global_nde, order_from_error_probabilities, quantize, Density,
    DensityEvolution, NdeConfig, BINS, MIN_SAMPLES,
};
use polar_stopping::Error;

fn cfg(samples: usize, iterations: usize) -> NdeConfig {
    NdeConfig {
        ebno_db: 3.0,
        iterations,
        samples,
        seed: 5,
        rule: CheckRule::SumProduct,
    }
}

/// `Q(x)` by Simpson integration of the normal density over `[x, x + 12]`.
fn q_function(x: f64) -> f64 {
    let steps = 20_000;
    let h = 12.0 / steps as f64;
    let pdf = |t: f64| (-t * t / 2.0).exp() / (2.0 * std::f64::consts::PI).sqrt();
    let mut s = pdf(x) + pdf(x + 12.0);
    for i in 1..steps {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * pdf(x + i as f64 * h);
    }
    s * h / 3.0
}

#[test]
fn grid_is_symmetric_around_zero() {
    assert_eq!(quantize(0.0), BINS / 2);
    assert!(bin_center(BINS / 2).abs() < 1e-12);
    assert_eq!(quantize(1e9), BINS - 1);
    assert_eq!(quantize(-1e9), 0);
    for i in 1..BINS {
        assert!((bin_center(i) + bin_center(BINS - i)).abs() < 1e-9);
    }
}

#[test]
fn erasure_densities_reproduce_bec_recursion() {
    for n in 1..=5 {
        for eps in [0.2, 0.6] {
            let leaves = vec![Density::erasure(eps); 1 << n];
            let pe = DensityEvolution::new().bit_error_probabilities(&leaves).unwrap();
            let z = common::bec_z(n, eps);
            for (p, z) in pe.iter().zip(&z) {
                assert!((p - z / 2.0).abs() < 1e-9, "n={n} eps={eps}: {p} vs {}", z / 2.0);
            }
        }
    }
}

#[test]
fn gaussian_error_probability_matches_q_function() {
    for mean in [0.5, 2.0, 6.0] {
        let d = Density::consistent_gaussian(mean);
        let want = q_function((mean / 2.0).sqrt());
        assert!((d.error_probability() - want).abs() < 2e-3, "mean {mean}");
        let total: f64 = d.mass().iter().sum();
        assert!((total - 1.0).abs() < 1e-6);
    }
}

#[test]
fn node_operations_preserve_mass_and_order() {
    let de = DensityEvolution::new();
    let a = Density::consistent_gaussian(3.0);
    let b = Density::consistent_gaussian(5.0);
    let c = de.check(&a, &b);
    let v = de.var(&a, &b);
    for d in [&c, &v] {
        let total: f64 = d.mass().iter().sum();
        assert!((total - 1.0).abs() < 1e-9);
    }
    assert!(c.error_probability() > a.error_probability());
    assert!(v.error_probability() < a.error_probability());
    // a point mass at zero is absorbing for the check node
    let z = de.check(&Density::point(0.0), &b);
    assert!((z.mass()[BINS / 2] - 1.0).abs() < 1e-12);
}

#[test]
fn invalid_configurations_are_rejected() {
    let spec = ga_augmented(6, 24, 3, 4, 3.0, InterleaverPreset::Natural).unwrap();
    assert!(matches!(augmented_nde(&spec, &cfg(MIN_SAMPLES, 0)), Err(Error::InvalidParameter(_))));
    assert!(matches!(
        augmented_nde(&spec, &cfg(MIN_SAMPLES - 1, 3)),
        Err(Error::InsufficientSamples { .. })
    ));
    assert!(Density::from_counts(&[0; BINS]).is_err());
    assert!(Density::from_counts(&[1; 3]).is_err());
}

#[test]
fn augmented_nde_is_reproducible_and_sized() {
    let spec = ga_augmented(6, 24, 3, 4, 3.0, InterleaverPreset::Natural).unwrap();
    let a = augmented_nde(&spec, &cfg(MIN_SAMPLES, 3)).unwrap();
    let b = augmented_nde(&spec, &cfg(MIN_SAMPLES, 3)).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.info_set.len(), 4);
    assert_eq!(a.error_probabilities.len(), 8);
    let order = order_from_error_probabilities(&a.error_probabilities);
    let mut top: Vec<usize> = order[..4].to_vec();
    top.sort_unstable();
    assert_eq!(top, a.info_set);
}

#[test]
fn local_global_nde_keeps_block_sizes() {
    let spec = ga_local_global(9, 6, 224, 3.0, &[]).unwrap();
    let out = local_global_nde(&spec, &cfg(MIN_SAMPLES, 4)).unwrap();
    assert_eq!(out.info_set.len(), spec.outer().k());
    let redesigned = spec
        .with_outer(spec.outer().with_info_set(&out.info_set).unwrap())
        .unwrap();
    for b in 0..2 {
        assert_eq!(redesigned.block_info(b).len(), spec.block_info(b).len());
    }
}
