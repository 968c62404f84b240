//! Discretized density evolution on the outer polar graph, and the
//! non-stationary (NDE) outer-code construction that feeds it with empirical
//! per-position LLR densities measured after a few inner BP iterations.
//!
//! Densities live on a fixed grid of [`BINS`] points `-40 + i·w`,
//! `w = 80 / BINS`, so that LLR 0 is a grid point and sums of grid points are
//! grid points. Values beyond the grid saturate to its ends.

use std::sync::OnceLock;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::concat::{AugmentedSpec, LocalGlobalSpec};
use crate::decoding::{CheckRule, PolarBp, LLR_MAX};
use crate::error::{Error, Result};
use crate::polar::awgn_sigma;
use crate::rng;

/// Number of histogram bins.
pub const BINS: usize = 2048;
/// Grid half-width in LLR units.
pub const RANGE: f64 = 40.0;
/// Minimum number of sampled frames accepted by the NDE construction.
pub const MIN_SAMPLES: usize = 10_000;

const ZERO_BIN: usize = BINS / 2;

fn step() -> f64 {
    2.0 * RANGE / BINS as f64
}

/// Grid value of bin `i`.
pub fn bin_center(i: usize) -> f64 {
    -RANGE + i as f64 * step()
}

/// Nearest bin of an LLR, saturating at the grid ends.
pub fn quantize(llr: f64) -> usize {
    let idx = ((llr + RANGE) / step()).round();
    idx.clamp(0.0, (BINS - 1) as f64) as usize
}

/// A probability mass function over the LLR grid.
#[derive(Clone, Debug, PartialEq)]
pub struct Density {
    mass: Vec<f64>,
}

impl Density {
    /// All mass at one LLR value.
    pub fn point(llr: f64) -> Self {
        let mut mass = vec![0.0; BINS];
        mass[quantize(llr)] = 1.0;
        Self { mass }
    }

    /// Erasure-channel density: mass `eps` at 0, the rest at the top of the grid.
    pub fn erasure(eps: f64) -> Self {
        let mut mass = vec![0.0; BINS];
        mass[ZERO_BIN] = eps;
        mass[BINS - 1] = 1.0 - eps;
        Self { mass }
    }

    /// Discretized Gaussian `N(mean, 2 mean)`, the consistent density of a
    /// BI-AWGN channel LLR.
    pub fn consistent_gaussian(mean: f64) -> Self {
        let sd = (2.0 * mean).sqrt();
        let half = step() / 2.0;
        let cdf = |x: f64| 0.5 * (1.0 + erf((x - mean) / (sd * std::f64::consts::SQRT_2)));
        let mass = (0..BINS)
            .map(|i| {
                let c = bin_center(i);
                let lo = if i == 0 { f64::NEG_INFINITY } else { c - half };
                let hi = if i == BINS - 1 { f64::INFINITY } else { c + half };
                let p = |x: f64| {
                    if x.is_infinite() {
                        if x > 0.0 {
                            1.0
                        } else {
                            0.0
                        }
                    } else {
                        cdf(x)
                    }
                };
                (p(hi) - p(lo)).max(0.0)
            })
            .collect();
        Self { mass }
    }

    /// Normalized histogram of samples.
    pub fn from_counts(counts: &[u64]) -> Result<Self> {
        if counts.len() != BINS {
            return Err(Error::LengthMismatch {
                expected: BINS,
                got: counts.len(),
            });
        }
        let total: u64 = counts.iter().sum();
        if total == 0 {
            return Err(Error::InsufficientSamples { got: 0, min: 1 });
        }
        Ok(Self {
            mass: counts.iter().map(|&c| c as f64 / total as f64).collect(),
        })
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    /// `P(L < 0) + P(L = 0) / 2`.
    pub fn error_probability(&self) -> f64 {
        self.mass[..ZERO_BIN].iter().sum::<f64>() + 0.5 * self.mass[ZERO_BIN]
    }
}

// Chebyshev fit of erfc, relative error below 1.2e-7.
fn erf(x: f64) -> f64 {
    let z = x.abs();
    let t = 1.0 / (1.0 + 0.5 * z);
    let r = t
        * (-z * z - 1.265_512_23
            + t * (1.000_023_68
                + t * (0.374_091_96
                    + t * (0.096_784_18
                        + t * (-0.186_288_06
                            + t * (0.278_868_07
                                + t * (-1.135_203_98
                                    + t * (1.488_515_87
                                        + t * (-0.822_152_23 + t * 0.170_872_77)))))))))
            .exp();
    if x >= 0.0 {
        1.0 - r
    } else {
        r - 1.0
    }
}

/// Check- and variable-node density operations on the grid.
pub struct DensityEvolution {
    table: &'static [u16],
}

fn nonzero(d: &Density) -> Vec<(usize, f64)> {
    d.mass
        .iter()
        .enumerate()
        .filter(|(_, &m)| m > 0.0)
        .map(|(j, &m)| (j, m))
        .collect()
}

fn boxplus_table() -> &'static [u16] {
    static TABLE: OnceLock<Vec<u16>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = vec![0u16; BINS * BINS];
        for i in 0..BINS {
            let a = bin_center(i);
            for j in 0..=i {
                let b = bin_center(j);
                let sign = if (a < 0.0) != (b < 0.0) { -1.0 } else { 1.0 };
                let v = sign * a.abs().min(b.abs()) + (-(a + b).abs()).exp().ln_1p()
                    - (-(a - b).abs()).exp().ln_1p();
                let q = quantize(v) as u16;
                t[i * BINS + j] = q;
                t[j * BINS + i] = q;
            }
        }
        t
    })
}

impl Default for DensityEvolution {
    fn default() -> Self {
        Self::new()
    }
}

impl DensityEvolution {
    pub fn new() -> Self {
        Self {
            table: boxplus_table(),
        }
    }

    /// Density of `a ⊞ b` for independent `a`, `b` (exact boxplus per bin pair).
    pub fn check(&self, a: &Density, b: &Density) -> Density {
        let mut out = vec![0.0; BINS];
        let nz_b = nonzero(b);
        for (i, &pa) in a.mass.iter().enumerate() {
            if pa == 0.0 {
                continue;
            }
            let row = &self.table[i * BINS..(i + 1) * BINS];
            for &(j, pb) in &nz_b {
                out[row[j] as usize] += pa * pb;
            }
        }
        Density { mass: out }
    }

    /// Density of `a + b` for independent `a`, `b` (direct convolution).
    pub fn var(&self, a: &Density, b: &Density) -> Density {
        let mut out = vec![0.0; BINS];
        let nz_b = nonzero(b);
        let top = BINS as isize - 1;
        for (i, &pa) in a.mass.iter().enumerate() {
            if pa == 0.0 {
                continue;
            }
            // Grid points i and j sum to grid point i + j - BINS/2.
            for &(j, pb) in &nz_b {
                let idx = (i as isize + j as isize - ZERO_BIN as isize).clamp(0, top);
                out[idx as usize] += pa * pb;
            }
        }
        Density { mass: out }
    }

    /// Successive-cancellation density evolution through the polar graph:
    /// given the LLR density of each codeword position, returns the error
    /// probability of each u-position assuming earlier bits are known.
    pub fn bit_error_probabilities(&self, leaves: &[Density]) -> Result<Vec<f64>> {
        let len = leaves.len();
        if !len.is_power_of_two() || len < 2 {
            return Err(Error::InvalidParameter(format!(
                "density count {len} is not a power of two >= 2"
            )));
        }
        let mut d = leaves.to_vec();
        let mut span = len / 2;
        while span >= 1 {
            let mut next = d.clone();
            for base in (0..len).step_by(2 * span) {
                let pairs: Vec<(Density, Density)> = (base..base + span)
                    .into_par_iter()
                    .map(|a| (self.check(&d[a], &d[a + span]), self.var(&d[a], &d[a + span])))
                    .collect();
                for (off, (c, v)) in pairs.into_iter().enumerate() {
                    next[base + off] = c;
                    next[base + off + span] = v;
                }
            }
            d = next;
            span /= 2;
        }
        Ok(d.iter().map(Density::error_probability).collect())
    }
}

/// Parameters of the empirical-density sampling.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NdeConfig {
    pub ebno_db: f64,
    /// Inner BP iterations before sampling.
    pub iterations: usize,
    /// Simulated all-zero frames.
    pub samples: usize,
    pub seed: u64,
    pub rule: CheckRule,
}

/// Result of an NDE construction.
#[derive(Clone, Debug, PartialEq)]
pub struct NdeOutcome {
    /// Chosen outer information set, ascending.
    pub info_set: Vec<usize>,
    /// Estimated error probability of every outer u-position.
    pub error_probabilities: Vec<f64>,
}

fn validate(cfg: &NdeConfig) -> Result<()> {
    if cfg.iterations == 0 {
        return Err(Error::InvalidParameter("NDE needs at least one inner iteration".into()));
    }
    if cfg.samples < MIN_SAMPLES {
        return Err(Error::InsufficientSamples {
            got: cfg.samples,
            min: MIN_SAMPLES,
        });
    }
    Ok(())
}

/// Histograms of the inner-to-outer messages of one inner code, sampled over
/// all-zero frames. `taps[t]` is the inner u-position of tap `t`.
fn sample_inner(
    n: usize,
    open: &[usize],
    taps: &[usize],
    sigma: f64,
    cfg: &NdeConfig,
    stream: u64,
) -> Vec<Vec<u64>> {
    let len = 1usize << n;
    let mut prior = vec![LLR_MAX; len];
    for &p in open {
        prior[p] = 0.0;
    }
    const CHUNK: usize = 256;
    let chunks = cfg.samples.div_ceil(CHUNK);
    let partial: Vec<Vec<Vec<u64>>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut hist = vec![vec![0u64; BINS]; taps.len()];
            let mut bp = PolarBp::new(n, cfg.rule);
            let mut llr = vec![0f32; len];
            for f in c * CHUNK..((c + 1) * CHUNK).min(cfg.samples) {
                let mut rng = rng::stream(cfg.seed, &[stream, f as u64]);
                for v in llr.iter_mut() {
                    let z: f64 = rng.sample(StandardNormal);
                    *v = (2.0 * (1.0 + sigma * z) / (sigma * sigma)) as f32;
                }
                bp.reset(&prior, &llr);
                for _ in 0..cfg.iterations {
                    bp.iterate();
                }
                for (h, &p) in hist.iter_mut().zip(taps) {
                    h[quantize(bp.u_extrinsic(p) as f64)] += 1;
                }
            }
            hist
        })
        .collect();
    // Integer counts: the reduction is exact, hence order independent.
    let mut total = vec![vec![0u64; BINS]; taps.len()];
    for hist in partial {
        for (t, h) in total.iter_mut().zip(hist) {
            for (a, b) in t.iter_mut().zip(h) {
                *a += b;
            }
        }
    }
    total
}

/// NDE outer construction for an augmented code: returns the `K_0` outer
/// positions with the smallest estimated error probability.
pub fn augmented_nde(spec: &AugmentedSpec, cfg: &NdeConfig) -> Result<NdeOutcome> {
    validate(cfg)?;
    let sigma = awgn_sigma(cfg.ebno_db, spec.rate());
    let open: Vec<usize> = spec
        .good_channels()
        .iter()
        .chain(spec.semipolarized())
        .copied()
        .collect();
    let n0 = spec.outer().len();
    let taps: Vec<usize> = (0..n0).map(|k| spec.inner_position(k)).collect();
    let hist = sample_inner(spec.inner_order(), &open, &taps, sigma, cfg, 0);
    let leaves = hist
        .iter()
        .map(|h| Density::from_counts(h))
        .collect::<Result<Vec<_>>>()?;
    let pe = DensityEvolution::new().bit_error_probabilities(&leaves)?;
    let info_set = top_k(&pe, spec.outer().k(), |_| true);
    Ok(NdeOutcome {
        info_set,
        error_probabilities: pe,
    })
}

/// NDE outer construction for a local-global code. Each block keeps the
/// number of outer information positions it has in `spec`; within a block
/// the positions with the smallest estimated error probability are chosen.
pub fn local_global_nde(spec: &LocalGlobalSpec, cfg: &NdeConfig) -> Result<NdeOutcome> {
    validate(cfg)?;
    let sigma = awgn_sigma(cfg.ebno_db, spec.rate());
    let n0 = spec.outer().len();
    let mut leaves: Vec<Option<Density>> = vec![None; n0];
    for (b, block) in spec.blocks().iter().enumerate() {
        let open: Vec<usize> = block.good.iter().chain(&block.semipolarized).copied().collect();
        let positions: Vec<usize> = (0..n0).filter(|&k| spec.wiring()[k].0 == b).collect();
        let taps: Vec<usize> = positions.iter().map(|&k| spec.wiring()[k].1).collect();
        let hist = sample_inner(spec.inner_order(), &open, &taps, sigma, cfg, b as u64);
        for (&k, h) in positions.iter().zip(&hist) {
            leaves[k] = Some(Density::from_counts(h)?);
        }
    }
    let leaves: Vec<Density> = leaves.into_iter().map(|d| d.expect("every position wired")).collect();
    let pe = DensityEvolution::new().bit_error_probabilities(&leaves)?;
    let mut info_set = Vec::new();
    for b in 0..spec.num_blocks() {
        let want = spec.block_info(b).len();
        info_set.extend(top_k(&pe, want, |k| spec.wiring()[k].0 == b));
    }
    info_set.sort_unstable();
    Ok(NdeOutcome {
        info_set,
        error_probabilities: pe,
    })
}

/// The `k` eligible positions with the smallest error probability (lower
/// index on ties), ascending.
fn top_k(pe: &[f64], k: usize, eligible: impl Fn(usize) -> bool) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..pe.len()).filter(|&i| eligible(i)).collect();
    idx.sort_by(|&a, &b| pe[a].total_cmp(&pe[b]).then(a.cmp(&b)));
    idx.truncate(k);
    idx.sort_unstable();
    idx
}

/// Reliability order (most reliable first) from per-position error probabilities.
pub fn order_from_error_probabilities(pe: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..pe.len()).collect();
    idx.sort_by(|&a, &b| pe[a].total_cmp(&pe[b]).then(a.cmp(&b)));
    idx
}
