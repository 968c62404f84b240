//! Polar encoding, code construction and the cover/swap partial order.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{check_index, Error, Result};
use crate::graph::MAX_ORDER;

/// `f(i) = 2^{wt(i)}`, the leaf count of the stopping tree of `i`.
#[inline]
pub fn leaf_count(i: usize) -> usize {
    1usize << i.count_ones()
}

/// How an information set was obtained.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum Construction {
    /// Bhattacharyya parameters on a BEC with erasure probability `eps`.
    Bec { eps: f64 },
    /// Gaussian approximation of density evolution on the BI-AWGN channel.
    Ga { ebno_db: f64, rate: f64 },
    /// Information set supplied directly (random sets, OPSS/NDE outputs, fixtures).
    Explicit,
}

/// A polar code: length `2^n`, information set and reliability order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CodeSpec {
    n: usize,
    k: usize,
    construction: Construction,
    /// Sorted ascending.
    info_set: Vec<usize>,
    /// All indices, most reliable first.
    reliability_order: Vec<usize>,
}

impl CodeSpec {
    /// Builds a code from a reliability order; the information set is its first `k` entries.
    pub fn from_order(
        n: usize,
        k: usize,
        order: Vec<usize>,
        construction: Construction,
    ) -> Result<Self> {
        check_order(n)?;
        let len = 1usize << n;
        if order.len() != len {
            return Err(Error::LengthMismatch {
                expected: len,
                got: order.len(),
            });
        }
        let mut seen = vec![false; len];
        for &i in &order {
            check_index(i, len)?;
            if std::mem::replace(&mut seen[i], true) {
                return Err(Error::InvalidParameter(format!(
                    "reliability order repeats index {i}"
                )));
            }
        }
        if k > len {
            return Err(Error::InvalidParameter(format!("K={k} exceeds N={len}")));
        }
        let mut info_set = order[..k].to_vec();
        info_set.sort_unstable();
        Ok(Self {
            n,
            k,
            construction,
            info_set,
            reliability_order: order,
        })
    }

    /// Builds a code from an explicit information set. The reliability order lists
    /// the information indices (descending) followed by the frozen ones (descending).
    pub fn from_info_set(n: usize, info: &[usize]) -> Result<Self> {
        check_order(n)?;
        let len = 1usize << n;
        let mut member = vec![false; len];
        for &i in info {
            check_index(i, len)?;
            member[i] = true;
        }
        let k = member.iter().filter(|&&b| b).count();
        let order: Vec<usize> = (0..len)
            .rev()
            .filter(|&i| member[i])
            .chain((0..len).rev().filter(|&i| !member[i]))
            .collect();
        Self::from_order(n, k, order, Construction::Explicit)
    }

    /// Same reliability order, different information set (used after OPSS swaps).
    pub fn with_info_set(&self, info: &[usize]) -> Result<Self> {
        let mut spec = Self::from_info_set(self.n, info)?;
        spec.reliability_order = self.reliability_order.clone();
        spec.construction = Construction::Explicit;
        Ok(spec)
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        1 << self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn rate(&self) -> f64 {
        self.k as f64 / self.len() as f64
    }

    pub fn construction(&self) -> &Construction {
        &self.construction
    }

    pub fn info_set(&self) -> &[usize] {
        &self.info_set
    }

    pub fn reliability_order(&self) -> &[usize] {
        &self.reliability_order
    }

    pub fn frozen_set(&self) -> Vec<usize> {
        let mask = self.info_mask();
        (0..self.len()).filter(|&i| !mask[i]).collect()
    }

    /// `mask[i]` is true for information positions.
    pub fn info_mask(&self) -> Vec<bool> {
        let mut mask = vec![false; self.len()];
        for &i in &self.info_set {
            mask[i] = true;
        }
        mask
    }

    /// Places `info` (length K) at the information positions of a length-N vector.
    pub fn embed(&self, info: &[bool]) -> Result<Vec<bool>> {
        if info.len() != self.k {
            return Err(Error::LengthMismatch {
                expected: self.k,
                got: info.len(),
            });
        }
        let mut u = vec![false; self.len()];
        for (&pos, &b) in self.info_set.iter().zip(info) {
            u[pos] = b;
        }
        Ok(u)
    }

    pub fn extract(&self, u: &[bool]) -> Vec<bool> {
        self.info_set.iter().map(|&i| u[i]).collect()
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("code spec serializes")
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let raw: CodeSpec = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        // Re-validate through the constructor so hand-edited files are checked.
        let mut spec = Self::from_order(raw.n, raw.k, raw.reliability_order, raw.construction)?;
        if raw.info_set.len() != raw.k {
            return Err(Error::Parse(format!(
                "info_set has {} entries but k = {}",
                raw.info_set.len(),
                raw.k
            )));
        }
        let mut info = raw.info_set;
        info.sort_unstable();
        if info != spec.info_set {
            // Explicit (swapped) sets need not be a prefix of the order.
            let order = spec.reliability_order.clone();
            let construction = spec.construction.clone();
            spec = Self::from_info_set(raw.n, &info)?;
            spec.reliability_order = order;
            spec.construction = construction;
        }
        Ok(spec)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml(&text)
    }
}

fn check_order(n: usize) -> Result<()> {
    if n == 0 || n > MAX_ORDER {
        Err(Error::OrderOutOfRange { n, max: MAX_ORDER })
    } else {
        Ok(())
    }
}

/// `supp(r_i)`: the support of row `i` of `F^{⊗n}`, via the Kronecker recursion.
pub fn row_support(n: usize, i: usize) -> Result<Vec<usize>> {
    check_order(n)?;
    check_index(i, 1 << n)?;
    let mut support = vec![0usize];
    // G^{m+1} = [[G^m, 0], [G^m, G^m]]: a row in the lower half repeats its
    // support shifted by 2^m.
    for m in 0..n {
        if (i >> m) & 1 == 1 {
            let shift = 1usize << m;
            let shifted: Vec<usize> = support.iter().map(|&k| k + shift).collect();
            support.extend(shifted);
        }
    }
    support.sort_unstable();
    Ok(support)
}

/// In-place `x = u F^{⊗n}` over GF(2) with `n` butterfly passes.
pub fn encode_in_place(bits: &mut [bool]) {
    let len = bits.len();
    debug_assert!(len.is_power_of_two());
    let mut span = len / 2;
    while span >= 1 {
        for base in (0..len).step_by(2 * span) {
            for r in base..base + span {
                bits[r] ^= bits[r + span];
            }
        }
        span /= 2;
    }
}

/// `x = uG` for a length-N `u` (frozen positions are not forced to zero).
pub fn encode(spec: &CodeSpec, u: &[bool]) -> Result<Vec<bool>> {
    if u.len() != spec.len() {
        return Err(Error::LengthMismatch {
            expected: spec.len(),
            got: u.len(),
        });
    }
    let mut x = u.to_vec();
    encode_in_place(&mut x);
    Ok(x)
}

/// Systematic encoding with `B = A`: returns `(u, x)` with `x_A = info`,
/// `u_F = 0` and `x = uG`.
pub fn systematic_encode(spec: &CodeSpec, info: &[bool]) -> Result<(Vec<bool>, Vec<bool>)> {
    if info.len() != spec.k() {
        return Err(Error::LengthMismatch {
            expected: spec.k(),
            got: info.len(),
        });
    }
    let len = spec.len();
    let mask = spec.info_mask();
    // Known values: u at frozen positions (0), x at information positions.
    let mut known = vec![false; len];
    for (&pos, &b) in spec.info_set().iter().zip(info) {
        known[pos] = b;
    }
    let mut u = vec![false; len];
    let mut x = vec![false; len];
    solve_systematic(&mask, &known, &mut u, &mut x);
    debug_assert_eq!(encode(spec, &u).ok().as_deref(), Some(&x[..]));
    Ok((u, x))
}

/// Solves `x = uG` where for each position either `x` (when `x_known[i]`) or
/// `u` is given by `value[i]`. Back-substitutes one check column at a time,
/// right to left, by splitting into the lower and upper half-graphs.
fn solve_systematic(x_known: &[bool], value: &[bool], u: &mut [bool], x: &mut [bool]) {
    let len = x_known.len();
    if len == 1 {
        u[0] = value[0];
        x[0] = value[0];
        return;
    }
    let half = len / 2;
    // x = [(u_U ^ u_L) G', u_L G'].
    let (u_up, u_low) = u.split_at_mut(half);
    let (x_up, x_low) = x.split_at_mut(half);
    solve_systematic(&x_known[half..], &value[half..], u_low, x_low);
    // Upper half in terms of w = u_U ^ u_L: known w where u_U is given.
    let upper_value: Vec<bool> = (0..half)
        .map(|r| {
            if x_known[r] {
                value[r]
            } else {
                value[r] ^ u_low[r]
            }
        })
        .collect();
    let mut w = vec![false; half];
    solve_systematic(&x_known[..half], &upper_value, &mut w, x_up);
    for r in 0..half {
        u_up[r] = w[r] ^ u_low[r];
    }
}

/// Bhattacharyya parameters of all bit-channels on a BEC, tracked as
/// `(ln Z, ln(1 - Z))` so that neither tail saturates.
pub fn bec_log_bhattacharyya(n: usize, eps: f64) -> Result<Vec<(f64, f64)>> {
    check_order(n)?;
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "erasure probability {eps} must lie in (0, 1)"
        )));
    }
    let len = 1usize << n;
    let mut out = Vec::with_capacity(len);
    for i in 0..len {
        let (mut lz, mut l1z) = (eps.ln(), (-eps).ln_1p());
        // The most significant bit selects the first polarization step.
        for b in (0..n).rev() {
            if (i >> b) & 1 == 1 {
                // z -> z^2, 1 - z^2 = (1 - z)(1 + z)
                l1z += lz.exp().ln_1p();
                lz *= 2.0;
            } else {
                // z -> 2z - z^2 = z(2 - z), 1 - z' = (1 - z)^2
                lz += l1z.exp().ln_1p();
                l1z *= 2.0;
            }
        }
        out.push((lz, l1z));
    }
    Ok(out)
}

/// Bhattacharyya parameters on a BEC (plain values).
pub fn bec_bhattacharyya(n: usize, eps: f64) -> Result<Vec<f64>> {
    Ok(bec_log_bhattacharyya(n, eps)?
        .into_iter()
        .map(|(lz, _)| lz.exp())
        .collect())
}

// Monotone in Z over (0, 1), finite at both ends.
fn unreliability_key((lz, l1z): (f64, f64)) -> f64 {
    let half = 0.5f64.ln();
    if lz <= half {
        lz
    } else {
        2.0 * half - l1z
    }
}

/// Selects the `k` bit-channels with the smallest Bhattacharyya parameter on a BEC.
pub fn construct_bec(n: usize, k: usize, eps: f64) -> Result<CodeSpec> {
    let z = bec_log_bhattacharyya(n, eps)?;
    let len = 1usize << n;
    if k == 0 || k > len {
        return Err(Error::InvalidParameter(format!("K={k} must lie in 1..={len}")));
    }
    let keys: Vec<f64> = z.into_iter().map(unreliability_key).collect();
    let mut order: Vec<usize> = (0..len).collect();
    order.sort_by(|&a, &b| keys[a].total_cmp(&keys[b]).then(a.cmp(&b)));
    CodeSpec::from_order(n, k, order, Construction::Bec { eps })
}

/// Four-segment approximation of the check-node mean update
/// `m -> φ^{-1}(1 - (1 - φ(m))^2)` of Gaussian-approximated density evolution:
///
/// | range          | value                                   |
/// |----------------|-----------------------------------------|
/// | `m <= 1`       | `0.2202 m^2 + 0.06448 m`                |
/// | `1 < m <= 3.5` | `0.062883 m^2 + 0.3678 m - 0.1627`      |
/// | `3.5 < m <= 12`| `0.009005 m^2 + 0.7694 m - 0.9507`      |
/// | `m > 12`       | `0.9861 m - 2.3152`                     |
pub fn ga_check_mean(m: f64) -> f64 {
    if m > 12.0 {
        0.9861 * m - 2.3152
    } else if m > 3.5 {
        m * (0.009005 * m + 0.7694) - 0.9507
    } else if m > 1.0 {
        m * (0.062883 * m + 0.3678) - 0.1627
    } else {
        m * (0.2202 * m + 0.06448)
    }
}

/// Noise standard deviation for BPSK at the given `Eb/N0` and code rate.
pub fn awgn_sigma(ebno_db: f64, rate: f64) -> f64 {
    let ebno = 10f64.powf(ebno_db / 10.0);
    (1.0 / (2.0 * rate * ebno)).sqrt()
}

/// Mean LLR of every bit-channel under the Gaussian approximation.
pub fn ga_means(n: usize, ebno_db: f64, rate: f64) -> Result<Vec<f64>> {
    check_order(n)?;
    if !(rate > 0.0 && rate <= 1.0) || !ebno_db.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "need finite Eb/N0 and rate in (0, 1], got {ebno_db} dB, R={rate}"
        )));
    }
    let sigma = awgn_sigma(ebno_db, rate);
    let m0 = 2.0 / (sigma * sigma);
    let len = 1usize << n;
    Ok((0..len)
        .map(|i| {
            (0..n).rev().fold(m0, |m, b| {
                if (i >> b) & 1 == 1 {
                    2.0 * m
                } else {
                    ga_check_mean(m)
                }
            })
        })
        .collect())
}

/// Selects the `k` bit-channels with the largest GA mean LLR.
pub fn construct_ga(n: usize, k: usize, ebno_db: f64, rate: f64) -> Result<CodeSpec> {
    let means = ga_means(n, ebno_db, rate)?;
    let len = 1usize << n;
    if k == 0 || k > len {
        return Err(Error::InvalidParameter(format!("K={k} must lie in 1..={len}")));
    }
    let mut order: Vec<usize> = (0..len).collect();
    order.sort_by(|&a, &b| means[b].total_cmp(&means[a]).then(a.cmp(&b)));
    CodeSpec::from_order(n, k, order, Construction::Ga { ebno_db, rate })
}

/// True when `j ↗ i`: `i` moves one 1-bit of `j` to a more significant 0-bit.
pub fn is_single_swap(j: usize, i: usize) -> bool {
    let diff = i ^ j;
    if diff.count_ones() != 2 {
        return false;
    }
    let low = diff & diff.wrapping_neg();
    let high = diff ^ low;
    j & low != 0 && i & high != 0
}

/// True iff `set` is closed under the cover relation (adding 1-bits) and the
/// single-swap relation `↗`.
pub fn check_cover_swap_closure(set: &[usize], n: usize) -> bool {
    let len = 1usize << n;
    let mut member = vec![false; len];
    for &j in set {
        if j >= len {
            return false;
        }
        member[j] = true;
    }
    for &j in set {
        for k in 0..n {
            if (j >> k) & 1 == 1 {
                continue;
            }
            // cover: add bit k
            if !member[j | (1 << k)] {
                return false;
            }
            // swap: move any lower 1-bit up to position k
            for low in 0..k {
                if (j >> low) & 1 == 1 && !member[(j & !(1 << low)) | (1 << k)] {
                    return false;
                }
            }
        }
    }
    true
}

/// Closes `seeds` upward under both relations.
pub fn cover_swap_closure(seeds: &[usize], n: usize) -> Vec<usize> {
    let len = 1usize << n;
    let mut member = vec![false; len];
    let mut stack: Vec<usize> = seeds.iter().copied().filter(|&s| s < len).collect();
    while let Some(j) = stack.pop() {
        if std::mem::replace(&mut member[j], true) {
            continue;
        }
        for k in 0..n {
            if (j >> k) & 1 == 1 {
                continue;
            }
            stack.push(j | (1 << k));
            for low in 0..k {
                if (j >> low) & 1 == 1 {
                    stack.push((j & !(1 << low)) | (1 << k));
                }
            }
        }
    }
    (0..len).filter(|&i| member[i]).collect()
}
