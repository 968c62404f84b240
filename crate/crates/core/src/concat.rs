//! Augmented and local-global concatenated polar codes: layouts, connection
//! sets, encoders and the stopping-set (OPSS) outer-code construction.
//!
//! In both architectures the codeword of a short outer polar code is placed on
//! the *semipolarized* u-positions of the inner code(s): the positions that
//! follow the good channels in the inner reliability order.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{check_index, Error, Result};
use crate::graph::FactorGraph;
use crate::polar::{construct_ga, encode_in_place, systematic_encode, CodeSpec};
use crate::rng;
use crate::stopping::{deletion_bound_i, deletion_bound_ii, mvss_exact_or_bounds};

/// Permutation from outer codeword positions to slots of the sorted
/// semipolarized set.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Interleaver {
    perm: Vec<usize>,
}

impl Interleaver {
    pub fn natural(len: usize) -> Self {
        Self {
            perm: (0..len).collect(),
        }
    }

    /// Uniformly random permutation drawn from the given seed.
    pub fn random(len: usize, seed: u64) -> Self {
        let mut perm: Vec<usize> = (0..len).collect();
        perm.shuffle(&mut rng::stream(seed, &[0x1e7e_a7e5]));
        Self { perm }
    }

    pub fn from_perm(perm: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; perm.len()];
        for &p in &perm {
            check_index(p, perm.len())?;
            if std::mem::replace(&mut seen[p], true) {
                return Err(Error::InvalidParameter(format!(
                    "interleaver maps two positions to slot {p}"
                )));
            }
        }
        Ok(Self { perm })
    }

    pub fn len(&self) -> usize {
        self.perm.len()
    }

    pub fn is_empty(&self) -> bool {
        self.perm.is_empty()
    }

    #[inline]
    pub fn map(&self, k: usize) -> usize {
        self.perm[k]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.perm
    }
}

/// Named interleaver presets.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InterleaverPreset {
    Natural,
    Random { seed: u64 },
}

impl InterleaverPreset {
    pub fn build(self, len: usize) -> Interleaver {
        match self {
            InterleaverPreset::Natural => Interleaver::natural(len),
            InterleaverPreset::Random { seed } => Interleaver::random(len, seed),
        }
    }
}

/// Splits an inner reliability order into the top `good` channels and the
/// following `semi` channels (both returned sorted ascending).
fn split_inner(inner: &CodeSpec, good: usize, semi: usize) -> Result<(Vec<usize>, Vec<usize>)> {
    if good + semi > inner.len() {
        return Err(Error::CapacityExceeded {
            needed: good + semi,
            available: inner.len(),
        });
    }
    let order = inner.reliability_order();
    let mut g = order[..good].to_vec();
    let mut s = order[good..good + semi].to_vec();
    g.sort_unstable();
    s.sort_unstable();
    Ok((g, s))
}

/// Leaves `k` of the outer stopping tree `ST(i)`.
fn outer_leaves(i: usize) -> impl Iterator<Item = usize> {
    let mut next = Some(i);
    std::iter::from_fn(move || {
        let k = next?;
        next = if k == 0 { None } else { Some((k - 1) & i) };
        Some(k)
    })
}

/// An inner code carrying an outer codeword on its semipolarized channels.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AugmentedSpec {
    outer: CodeSpec,
    /// Reliability order of the inner code; its information set is the good channels.
    inner: CodeSpec,
    good: Vec<usize>,
    semipolarized: Vec<usize>,
    interleaver: Interleaver,
}

/// Lays out an augmented code: the top `k1` inner channels carry plain
/// information, the next `N_0` carry the outer codeword.
pub fn build_augmented_spec(
    inner: &CodeSpec,
    outer: CodeSpec,
    k1: usize,
    interleaver: Interleaver,
) -> Result<AugmentedSpec> {
    let n0 = outer.len();
    let (good, semipolarized) = split_inner(inner, k1, n0)?;
    if interleaver.len() != n0 {
        return Err(Error::LengthMismatch {
            expected: n0,
            got: interleaver.len(),
        });
    }
    let inner = inner.with_info_set(&good)?;
    Ok(AugmentedSpec {
        outer,
        inner,
        good,
        semipolarized,
        interleaver,
    })
}

impl AugmentedSpec {
    pub fn outer(&self) -> &CodeSpec {
        &self.outer
    }

    pub fn inner(&self) -> &CodeSpec {
        &self.inner
    }

    pub fn inner_order(&self) -> usize {
        self.inner.order()
    }

    pub fn inner_len(&self) -> usize {
        self.inner.len()
    }

    /// Good inner channels, ascending.
    pub fn good_channels(&self) -> &[usize] {
        &self.good
    }

    /// Semipolarized inner channels, ascending.
    pub fn semipolarized(&self) -> &[usize] {
        &self.semipolarized
    }

    pub fn interleaver(&self) -> &Interleaver {
        &self.interleaver
    }

    /// `K_0 + K_1`.
    pub fn info_len(&self) -> usize {
        self.outer.k() + self.good.len()
    }

    pub fn rate(&self) -> f64 {
        self.info_len() as f64 / self.inner_len() as f64
    }

    /// Same layout with a different outer code of the same length.
    pub fn with_outer(&self, outer: CodeSpec) -> Result<Self> {
        if outer.len() != self.outer.len() {
            return Err(Error::LengthMismatch {
                expected: self.outer.len(),
                got: outer.len(),
            });
        }
        Ok(Self {
            outer,
            ..self.clone()
        })
    }

    /// Inner u-position carrying outer codeword bit `k`.
    #[inline]
    pub fn inner_position(&self, k: usize) -> usize {
        self.semipolarized[self.interleaver.map(k)]
    }

    /// `H_i`: inner positions wired to the leaves of the outer stopping tree `ST(i)`, ascending.
    pub fn h_set(&self, i: usize) -> Result<Vec<usize>> {
        check_index(i, self.outer.len())?;
        let mut h: Vec<usize> = outer_leaves(i).map(|k| self.inner_position(k)).collect();
        h.sort_unstable();
        Ok(h)
    }

    /// Inner u-vector: outer codeword on the semipolarized positions, the
    /// last `K_1` bits on the good channels, zeros elsewhere.
    pub fn inner_u(&self, info: &[bool]) -> Result<Vec<bool>> {
        if info.len() != self.info_len() {
            return Err(Error::LengthMismatch {
                expected: self.info_len(),
                got: info.len(),
            });
        }
        let (outer_info, inner_info) = info.split_at(self.outer.k());
        let mut y = self.outer.embed(outer_info)?;
        encode_in_place(&mut y);
        let mut u = vec![false; self.inner_len()];
        for (k, &b) in y.iter().enumerate() {
            u[self.inner_position(k)] = b;
        }
        for (&pos, &b) in self.good.iter().zip(inner_info) {
            u[pos] = b;
        }
        Ok(u)
    }

    /// Encodes `K_0 + K_1` bits into a length-`N_1` inner codeword.
    pub fn encode(&self, info: &[bool]) -> Result<Vec<bool>> {
        let mut x = self.inner_u(info)?;
        encode_in_place(&mut x);
        Ok(x)
    }

    /// Reads the outer codeword back from an inner u-vector.
    pub fn outer_codeword(&self, u: &[bool]) -> Vec<bool> {
        (0..self.outer.len()).map(|k| u[self.inner_position(k)]).collect()
    }
}

/// Outer positions assigned to one inner code of a local-global code.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockPartition {
    /// Outer information positions `K_{a_i}`, ascending.
    pub info: Vec<usize>,
    /// Outer parity positions `P_{a_i}`, ascending.
    pub parity: Vec<usize>,
}

/// The default partition for two inner codes: `K_{a_2}` is the first half of
/// the outer information set in natural order and `K_{a_1}` the second half;
/// `P_{a_1}` is the first half of the parity positions and `P_{a_2}` the second.
/// Index 0 of the result is the first inner code.
pub fn halving_partition(outer: &CodeSpec) -> [BlockPartition; 2] {
    let info = outer.info_set().to_vec();
    let parity = outer.frozen_set();
    let (info_lo, info_hi) = info.split_at(info.len() / 2);
    let (par_lo, par_hi) = parity.split_at(parity.len() / 2);
    [
        BlockPartition {
            info: info_hi.to_vec(),
            parity: par_lo.to_vec(),
        },
        BlockPartition {
            info: info_lo.to_vec(),
            parity: par_hi.to_vec(),
        },
    ]
}

/// One inner code of a local-global code.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InnerBlock {
    /// Reliability order of the inner code; its information set is the good channels.
    pub code: CodeSpec,
    /// Good channels `K_{b_i}`, ascending.
    pub good: Vec<usize>,
    /// Semipolarized channels, ascending.
    pub semipolarized: Vec<usize>,
    /// Outer positions wired to this block, ascending (slot order).
    pub wired: Vec<usize>,
    /// Slot `t` of `wired` connects to `semipolarized[interleaver.map(t)]`.
    pub interleaver: Interleaver,
}

/// `M` equal-length inner codes coupled by a systematic outer polar code.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocalGlobalSpec {
    outer: CodeSpec,
    blocks: Vec<InnerBlock>,
    /// For each outer position, `(block, inner position)`.
    wiring: Vec<(usize, usize)>,
}

/// Checks the parameter range in which the halving partition is known to
/// keep every swap inside one block.
fn check_halving_regime(inners: &[CodeSpec], outer: &CodeSpec) -> Result<()> {
    let n = inners[0].order();
    let n0 = outer.order();
    let ok = inners.len() == 2
        && 2 * outer.k() == outer.len()
        && (9..=11).contains(&n)
        && (6..=8).contains(&n0);
    if ok {
        Ok(())
    } else {
        Err(Error::UnsupportedRegime(format!(
            "default partition needs M=2, outer rate 1/2, 2^9 <= N <= 2^11, 2^6 <= N_0 <= 2^8 \
             (got M={}, N={}, N_0={}, K_a={}); pass an explicit partition",
            inners.len(),
            1usize << n,
            outer.len(),
            outer.k()
        )))
    }
}

/// Lays out a local-global code. Without `partition` the two-block halving
/// rule is used and the parameter regime is checked.
pub fn build_local_global_spec(
    inners: &[CodeSpec],
    outer: CodeSpec,
    good_per_block: &[usize],
    partition: Option<Vec<BlockPartition>>,
    interleavers: &[InterleaverPreset],
) -> Result<LocalGlobalSpec> {
    if inners.is_empty() {
        return Err(Error::InvalidParameter("at least one inner code is required".into()));
    }
    if outer.k() == 0 {
        return Err(Error::InvalidParameter("outer code must carry information".into()));
    }
    let m = inners.len();
    if inners.iter().any(|c| c.order() != inners[0].order()) {
        return Err(Error::InvalidParameter("inner codes must share one length".into()));
    }
    if good_per_block.len() != m {
        return Err(Error::LengthMismatch {
            expected: m,
            got: good_per_block.len(),
        });
    }
    let partition = match partition {
        Some(p) => p,
        None => {
            check_halving_regime(inners, &outer)?;
            halving_partition(&outer).to_vec()
        }
    };
    if partition.len() != m {
        return Err(Error::LengthMismatch {
            expected: m,
            got: partition.len(),
        });
    }
    let info_mask = outer.info_mask();
    let mut owner = vec![usize::MAX; outer.len()];
    for (b, part) in partition.iter().enumerate() {
        for (&k, is_info) in part
            .info
            .iter()
            .map(|k| (k, true))
            .chain(part.parity.iter().map(|k| (k, false)))
        {
            check_index(k, outer.len())?;
            if info_mask[k] != is_info {
                return Err(Error::InvalidParameter(format!(
                    "outer position {k} is listed in the wrong partition class"
                )));
            }
            if owner[k] != usize::MAX {
                return Err(Error::InvalidParameter(format!(
                    "outer position {k} assigned to two blocks"
                )));
            }
            owner[k] = b;
        }
    }
    if let Some(k) = owner.iter().position(|&b| b == usize::MAX) {
        return Err(Error::InvalidParameter(format!(
            "outer position {k} is not assigned to any block"
        )));
    }
    let presets: Vec<InterleaverPreset> = match interleavers.len() {
        0 => vec![InterleaverPreset::Natural; m],
        l if l == m => interleavers.to_vec(),
        l => return Err(Error::LengthMismatch { expected: m, got: l }),
    };

    let mut blocks = Vec::with_capacity(m);
    let mut wiring = vec![(0, 0); outer.len()];
    for (b, (code, part)) in inners.iter().zip(&partition).enumerate() {
        let mut wired: Vec<usize> = part.info.iter().chain(&part.parity).copied().collect();
        wired.sort_unstable();
        let (good, semipolarized) = split_inner(code, good_per_block[b], wired.len())?;
        let interleaver = presets[b].build(wired.len());
        for (t, &k) in wired.iter().enumerate() {
            wiring[k] = (b, semipolarized[interleaver.map(t)]);
        }
        blocks.push(InnerBlock {
            code: code.with_info_set(&good)?,
            good,
            semipolarized,
            wired,
            interleaver,
        });
    }
    Ok(LocalGlobalSpec {
        outer,
        blocks,
        wiring,
    })
}

impl LocalGlobalSpec {
    pub fn outer(&self) -> &CodeSpec {
        &self.outer
    }

    pub fn blocks(&self) -> &[InnerBlock] {
        &self.blocks
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn inner_len(&self) -> usize {
        self.blocks[0].code.len()
    }

    pub fn inner_order(&self) -> usize {
        self.blocks[0].code.order()
    }

    /// `(block, inner position)` of every outer codeword position.
    pub fn wiring(&self) -> &[(usize, usize)] {
        &self.wiring
    }

    /// Block owning each outer position.
    pub fn block_of(&self) -> Vec<usize> {
        self.wiring.iter().map(|&(b, _)| b).collect()
    }

    /// `K_{a_i}`: outer information positions wired to block `b`, ascending.
    pub fn block_info(&self, b: usize) -> Vec<usize> {
        self.outer
            .info_set()
            .iter()
            .copied()
            .filter(|&k| self.wiring[k].0 == b)
            .collect()
    }

    /// `P_{a_i}`: outer parity positions wired to block `b`, ascending.
    pub fn block_parity(&self, b: usize) -> Vec<usize> {
        self.outer
            .frozen_set()
            .into_iter()
            .filter(|&k| self.wiring[k].0 == b)
            .collect()
    }

    /// `K_b = Σ K_{b_i}`.
    pub fn global_info_len(&self) -> usize {
        self.blocks.iter().map(|b| b.good.len()).sum()
    }

    pub fn rate(&self) -> f64 {
        (self.outer.k() + self.global_info_len()) as f64
            / (self.num_blocks() * self.inner_len()) as f64
    }

    /// Same wiring with a different outer information set (e.g. after OPSS swaps).
    pub fn with_outer(&self, outer: CodeSpec) -> Result<Self> {
        if outer.len() != self.outer.len() {
            return Err(Error::LengthMismatch {
                expected: self.outer.len(),
                got: outer.len(),
            });
        }
        Ok(Self {
            outer,
            ..self.clone()
        })
    }

    /// `H_i^m` for every block `m`: inner positions of block `m` wired to
    /// leaves of the outer stopping tree `ST(i)`, ascending.
    pub fn h_sets(&self, i: usize) -> Result<Vec<Vec<usize>>> {
        check_index(i, self.outer.len())?;
        let mut out = vec![Vec::new(); self.num_blocks()];
        for k in outer_leaves(i) {
            let (b, p) = self.wiring[k];
            out[b].push(p);
        }
        for h in &mut out {
            h.sort_unstable();
        }
        Ok(out)
    }

    /// Systematically encodes `info_a` (on the outer information positions,
    /// ascending) and places `info_b` (blocks' good channels, block by block).
    /// Returns the `M` inner u-vectors.
    pub fn inner_us(&self, info_a: &[bool], info_b: &[bool]) -> Result<Vec<Vec<bool>>> {
        if info_b.len() != self.global_info_len() {
            return Err(Error::LengthMismatch {
                expected: self.global_info_len(),
                got: info_b.len(),
            });
        }
        let (_, y) = systematic_encode(&self.outer, info_a)?;
        let mut us = vec![vec![false; self.inner_len()]; self.num_blocks()];
        for (k, &bit) in y.iter().enumerate() {
            let (b, p) = self.wiring[k];
            us[b][p] = bit;
        }
        let mut rest = info_b;
        for (block, u) in self.blocks.iter().zip(&mut us) {
            let (mine, tail) = rest.split_at(block.good.len());
            for (&p, &bit) in block.good.iter().zip(mine) {
                u[p] = bit;
            }
            rest = tail;
        }
        Ok(us)
    }

    /// Encodes into `M` inner codewords.
    pub fn encode(&self, info_a: &[bool], info_b: &[bool]) -> Result<Vec<Vec<bool>>> {
        let mut xs = self.inner_us(info_a, info_b)?;
        for x in &mut xs {
            encode_in_place(x);
        }
        Ok(xs)
    }

    /// Reassembles the outer codeword from the `M` inner u-vectors.
    pub fn outer_codeword(&self, us: &[Vec<bool>]) -> Vec<bool> {
        self.wiring.iter().map(|&(b, p)| us[b][p]).collect()
    }
}

/// A concatenated code of either architecture (used for spec files).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "architecture", rename_all = "snake_case")]
pub enum ConcatSpec {
    Augmented(AugmentedSpec),
    LocalGlobal(LocalGlobalSpec),
}

impl ConcatSpec {
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("concat spec serializes")
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }
}

/// Augmented code whose inner and outer reliability orders both come from
/// Gaussian approximation at `ebno_db`: the inner at the overall rate, the
/// outer at its own rate.
pub fn ga_augmented(
    n1: usize,
    k1: usize,
    n0: usize,
    k0: usize,
    ebno_db: f64,
    interleaver: InterleaverPreset,
) -> Result<AugmentedSpec> {
    let rate = (k0 + k1) as f64 / (1usize << n1) as f64;
    let inner = construct_ga(n1, k1, ebno_db, rate)?;
    let outer = construct_ga(n0, k0, ebno_db, k0 as f64 / (1usize << n0) as f64)?;
    build_augmented_spec(&inner, outer, k1, interleaver.build(1 << n0))
}

/// Two-block local-global code with GA reliability orders at `ebno_db`, the
/// halving partition and `k_b` good channels per block. The outer code has
/// rate 1/2.
pub fn ga_local_global(
    n: usize,
    n0: usize,
    k_b: usize,
    ebno_db: f64,
    interleavers: &[InterleaverPreset],
) -> Result<LocalGlobalSpec> {
    let outer_len = 1usize << n0;
    let k0 = outer_len / 2;
    let rate = (k0 + 2 * k_b) as f64 / (2 << n) as f64;
    let inner = construct_ga(n, k_b, ebno_db, rate)?;
    let outer = construct_ga(n0, k0, ebno_db, 0.5)?;
    build_local_global_spec(&[inner.clone(), inner], outer, &[k_b, k_b], None, interleavers)
}

/// Which bound on `|MVSS(H_i)|` drives the OPSS construction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StoppingBackend {
    DeletionI,
    DeletionII { trials: usize, seed: u64 },
    /// Exact value when available, else the best upper bound.
    Best { trials: usize, seed: u64 },
}

fn mvss_value(g: &FactorGraph, set: &[usize], backend: StoppingBackend, key: u64) -> Result<usize> {
    if set.is_empty() {
        return Ok(0);
    }
    Ok(match backend {
        StoppingBackend::DeletionI => deletion_bound_i(g, set)?.size,
        StoppingBackend::DeletionII { trials, seed } => {
            deletion_bound_ii(g, set, trials, rng::mix(seed, key))?.best.size
        }
        StoppingBackend::Best { trials, seed } => {
            mvss_exact_or_bounds(g, set, trials, rng::mix(seed, key))?.best()
        }
    })
}

/// `d(i)` for every outer position of an augmented code.
pub fn augmented_d_values(spec: &AugmentedSpec, backend: StoppingBackend) -> Result<Vec<usize>> {
    let g = FactorGraph::new(spec.inner_order())?;
    (0..spec.outer().len())
        .map(|i| mvss_value(&g, &spec.h_set(i)?, backend, i as u64))
        .collect()
}

/// `d(i) = Σ_m |MVSS(H_i^m)|` for every outer position of a local-global code.
pub fn local_global_d_values(
    spec: &LocalGlobalSpec,
    backend: StoppingBackend,
) -> Result<Vec<usize>> {
    let g = FactorGraph::new(spec.inner_order())?;
    let m = spec.num_blocks() as u64;
    (0..spec.outer().len())
        .map(|i| {
            spec.h_sets(i)?
                .iter()
                .enumerate()
                .map(|(b, h)| mvss_value(&g, h, backend, i as u64 * m + b as u64))
                .sum()
        })
        .collect()
}

/// Outer-code construction by stopping-set swapping.
///
/// `order` is the outer reliability order (most reliable first) and `d[i]` a
/// stopping value per outer index. The threshold is the `s`-th smallest `d`
/// among the first `k0` entries. Then `s` times, the unfrozen entry with the
/// smallest `d` (first occurrence on ties) is replaced by the first remaining
/// frozen entry whose `d` exceeds the threshold, which is removed from the
/// frozen part. Returns the final first `k0` entries, sorted.
pub fn opss_construct(order: &[usize], d: &[usize], s: usize, k0: usize) -> Result<Vec<usize>> {
    opss_impl(order, d, s, k0, None)
}

/// [`opss_construct`] where a frozen entry may only replace an unfrozen entry
/// of the same group (`group[i]` for outer index `i`), so per-group sizes are
/// preserved.
pub fn opss_construct_grouped(
    order: &[usize],
    d: &[usize],
    s: usize,
    k0: usize,
    group: &[usize],
) -> Result<Vec<usize>> {
    if group.len() != d.len() {
        return Err(Error::LengthMismatch {
            expected: d.len(),
            got: group.len(),
        });
    }
    opss_impl(order, d, s, k0, Some(group))
}

fn opss_impl(
    order: &[usize],
    d: &[usize],
    s: usize,
    k0: usize,
    group: Option<&[usize]>,
) -> Result<Vec<usize>> {
    let len = order.len();
    if d.len() != len {
        return Err(Error::LengthMismatch {
            expected: len,
            got: d.len(),
        });
    }
    if k0 == 0 || k0 > len {
        return Err(Error::InvalidParameter(format!("K_0={k0} must lie in 1..={len}")));
    }
    for &i in order {
        check_index(i, len)?;
    }
    let mut top: Vec<usize> = order[..k0].to_vec();
    if s == 0 {
        top.sort_unstable();
        return Ok(top);
    }
    if s > k0 {
        return Err(Error::SwapPrecondition(format!("s={s} exceeds K_0={k0}")));
    }
    let mut top_d: Vec<usize> = top.iter().map(|&i| d[i]).collect();
    top_d.sort_unstable();
    let threshold = top_d[s - 1];
    let mut rest: Vec<usize> = order[k0..].to_vec();
    let eligible = rest.iter().filter(|&&j| d[j] > threshold).count();
    if eligible < s {
        return Err(Error::SwapPrecondition(format!(
            "only {eligible} frozen indices have d > {threshold}, need {s}"
        )));
    }
    for _ in 0..s {
        let pos = (0..k0)
            .min_by_key(|&p| (d[top[p]], p))
            .expect("k0 >= 1");
        let out = top[pos];
        let found = rest.iter().position(|&j| {
            d[j] > threshold && group.is_none_or(|g| g[j] == g[out])
        });
        let Some(r) = found else {
            return Err(Error::SwapPrecondition(format!(
                "no frozen index with d > {threshold} can replace {out} within its group"
            )));
        };
        top[pos] = rest.remove(r);
    }
    top.sort_unstable();
    Ok(top)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polar::construct_bec;

    fn small_augmented() -> AugmentedSpec {
        let inner = CodeSpec::from_order(
            3,
            0,
            vec![7, 5, 3, 1, 6, 4, 2, 0],
            crate::polar::Construction::Explicit,
        )
        .unwrap();
        let outer = construct_bec(2, 2, 0.5).unwrap();
        build_augmented_spec(&inner, outer, 0, Interleaver::natural(4)).unwrap()
    }

    #[test]
    fn small_augmented_layout() {
        let spec = small_augmented();
        assert_eq!(spec.semipolarized(), &[1, 3, 5, 7]);
        assert_eq!(spec.h_set(2).unwrap(), vec![1, 5]);
        assert_eq!(spec.h_set(3).unwrap(), vec![1, 3, 5, 7]);
        assert_eq!(spec.h_set(0).unwrap(), vec![1]);
        assert!(spec.h_set(4).is_err());
    }

    #[test]
    fn augmented_encoder_places_outer_codeword() {
        let spec = small_augmented();
        // outer info set {2, 3}: info bit 0 sits at outer index 2
        let u = spec.inner_u(&[true, false]).unwrap();
        let support: Vec<usize> = (0..8).filter(|&k| u[k]).collect();
        assert_eq!(support, vec![1, 5]);
        assert_eq!(spec.encode(&[false, false]).unwrap(), vec![false; 8]);
    }

    #[test]
    fn capacity_is_checked() {
        let inner = construct_bec(3, 4, 0.5).unwrap();
        let outer = construct_bec(2, 2, 0.5).unwrap();
        assert!(build_augmented_spec(&inner, outer.clone(), 4, Interleaver::natural(4)).is_ok());
        assert!(matches!(
            build_augmented_spec(&inner, outer, 5, Interleaver::natural(4)),
            Err(Error::CapacityExceeded { .. })
        ));
    }

    #[test]
    fn halving_partition_example() {
        let outer = CodeSpec::from_info_set(3, &[2, 3, 6, 7]).unwrap();
        let [first, second] = halving_partition(&outer);
        assert_eq!(second.info, vec![2, 3]);
        assert_eq!(first.info, vec![6, 7]);
        assert_eq!(first.parity, vec![0, 1]);
        assert_eq!(second.parity, vec![4, 5]);
    }

    #[test]
    fn opss_examples() {
        let o = opss_construct(&[3, 2, 1, 0], &[8, 2, 4, 1], 1, 2).unwrap();
        assert_eq!(o, vec![1, 2]);
        let o = opss_construct(&[3, 2, 1, 0], &[8, 2, 4, 1], 0, 2).unwrap();
        assert_eq!(o, vec![2, 3]);
        assert!(matches!(
            opss_construct(&[3, 2, 1, 0], &[1, 1, 1, 1], 1, 2),
            Err(Error::SwapPrecondition(_))
        ));
        // index 1 may only replace members of its own group
        let err = opss_construct_grouped(&[3, 2, 1, 0], &[8, 2, 4, 1], 1, 2, &[0, 0, 0, 1]);
        assert!(matches!(err, Err(Error::SwapPrecondition(_))));
        let ok = opss_construct_grouped(&[3, 2, 1, 0], &[8, 2, 4, 1], 1, 2, &[0, 1, 0, 1]);
        assert_eq!(ok.unwrap(), vec![1, 2]);
    }

    #[test]
    fn interleaver_validation() {
        assert!(Interleaver::from_perm(vec![1, 0, 2]).is_ok());
        assert!(Interleaver::from_perm(vec![1, 1, 2]).is_err());
        let r = Interleaver::random(64, 5);
        assert_eq!(r, Interleaver::random(64, 5));
        assert!(Interleaver::from_perm(r.as_slice().to_vec()).is_ok());
    }
}
