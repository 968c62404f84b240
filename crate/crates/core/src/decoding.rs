//! Erasure peeling and LLR belief propagation on polar factor graphs,
//! including joint decoding of augmented and local-global codes.

use serde::{Deserialize, Serialize};

use crate::concat::{AugmentedSpec, LocalGlobalSpec};
use crate::error::{Error, Result};
use crate::polar::{encode_in_place, CodeSpec};

/// LLR magnitude used for saturation and for frozen (known-zero) priors.
pub const LLR_MAX: f32 = 40.0;

/// Default scaling of the min-sum check rule.
pub const MIN_SUM_SCALE: f32 = 0.9375;

/// Check-node update rule.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CheckRule {
    /// `2 atanh(tanh(a/2) tanh(b/2))`, evaluated in the log domain.
    SumProduct,
    /// `scale · sign(a) sign(b) min(|a|, |b|)`.
    MinSum { scale: f32 },
}

impl Default for CheckRule {
    fn default() -> Self {
        CheckRule::SumProduct
    }
}

impl CheckRule {
    pub fn min_sum() -> Self {
        CheckRule::MinSum {
            scale: MIN_SUM_SCALE,
        }
    }

    #[inline]
    fn apply(self, a: f32, b: f32) -> f32 {
        let sign = if (a < 0.0) != (b < 0.0) { -1.0 } else { 1.0 };
        let m = a.abs().min(b.abs());
        match self {
            CheckRule::SumProduct => {
                let corr = (-(a + b).abs()).exp().ln_1p() - (-(a - b).abs()).exp().ln_1p();
                sign * m + corr
            }
            CheckRule::MinSum { scale } => sign * scale * m,
        }
    }
}

#[inline]
fn sat(x: f32) -> f32 {
    x.clamp(-LLR_MAX, LLR_MAX)
}

/// Outcome of one decoding attempt.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecodeResult {
    /// Decoded information bits in the code's natural information order.
    pub info: Vec<bool>,
    pub converged: bool,
    pub iterations: usize,
    /// Information u-indices left unresolved (erasure decoding only).
    pub unresolved: Vec<usize>,
}

/// Message buffers for flooding BP on one polar factor graph.
///
/// The decoder uses the butterfly order with span `2^c` in column `c`
/// (adjacent `u` pairs combine first). It realizes the same transform as the
/// analysis graph of [`crate::graph`], whose stages run in the opposite
/// order, but flooding BP on it is far stronger on noisy channels.
///
/// `l` carries messages travelling leftward (from the channel), `r` messages
/// travelling rightward (from the priors), both stored column-major with
/// `n + 1` columns of `N` rows.
#[derive(Clone, Debug)]
pub struct PolarBp {
    n: usize,
    len: usize,
    rule: CheckRule,
    l: Vec<f32>,
    r: Vec<f32>,
    u_hat: Vec<bool>,
    x_hat: Vec<bool>,
}

impl PolarBp {
    pub fn new(n: usize, rule: CheckRule) -> Self {
        let len = 1usize << n;
        Self {
            n,
            len,
            rule,
            l: vec![0.0; (n + 1) * len],
            r: vec![0.0; (n + 1) * len],
            u_hat: vec![false; len],
            x_hat: vec![false; len],
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Clears all messages and loads column-0 priors and channel LLRs.
    pub fn reset(&mut self, prior: &[f32], channel: &[f32]) {
        self.l.fill(0.0);
        self.r.fill(0.0);
        for (d, &p) in self.r[..self.len].iter_mut().zip(prior) {
            *d = sat(p);
        }
        let base = self.n * self.len;
        for (d, &c) in self.l[base..].iter_mut().zip(channel) {
            *d = sat(c);
        }
    }

    /// Prior on `u_i` (rightward message into column 0).
    #[inline]
    pub fn set_prior(&mut self, i: usize, llr: f32) {
        self.r[i] = sat(llr);
    }

    /// Channel LLR of `x_k`.
    #[inline]
    pub fn set_channel(&mut self, k: usize, llr: f32) {
        self.l[self.n * self.len + k] = sat(llr);
    }

    /// Message from the graph to `u_i`, excluding its prior.
    #[inline]
    pub fn u_extrinsic(&self, i: usize) -> f32 {
        self.l[i]
    }

    /// Message from the graph to `x_k`, excluding its channel LLR.
    #[inline]
    pub fn x_extrinsic(&self, k: usize) -> f32 {
        self.r[self.n * self.len + k]
    }

    /// Posterior LLR of `u_i`.
    #[inline]
    pub fn u_llr(&self, i: usize) -> f32 {
        self.l[i] + self.r[i]
    }

    /// One iteration: a right-to-left sweep followed by a left-to-right sweep.
    pub fn iterate(&mut self) {
        let (n, len, rule) = (self.n, self.len, self.rule);
        for c in (0..n).rev() {
            let span = 1usize << c;
            let (lo, hi) = (c * len, (c + 1) * len);
            for base in (0..len).step_by(2 * span) {
                for a in base..base + span {
                    let b = a + span;
                    let (lc, ld) = (self.l[hi + a], self.l[hi + b]);
                    let (ra, rb) = (self.r[lo + a], self.r[lo + b]);
                    self.l[lo + a] = sat(rule.apply(lc, ld + rb));
                    self.l[lo + b] = sat(rule.apply(ra, lc) + ld);
                }
            }
        }
        for c in 0..n {
            let span = 1usize << c;
            let (lo, hi) = (c * len, (c + 1) * len);
            for base in (0..len).step_by(2 * span) {
                for a in base..base + span {
                    let b = a + span;
                    let (lc, ld) = (self.l[hi + a], self.l[hi + b]);
                    let (ra, rb) = (self.r[lo + a], self.r[lo + b]);
                    self.r[hi + a] = sat(rule.apply(ra, ld + rb));
                    self.r[hi + b] = sat(rule.apply(ra, lc) + rb);
                }
            }
        }
    }

    /// Hard decisions on `u`, and whether they re-encode to the hard decisions on `x`.
    pub fn hard_decide(&mut self) -> bool {
        let base = self.n * self.len;
        for i in 0..self.len {
            self.u_hat[i] = self.l[i] + self.r[i] < 0.0;
            self.x_hat[i] = self.l[base + i] + self.r[base + i] < 0.0;
        }
        let mut enc = self.u_hat.clone();
        encode_in_place(&mut enc);
        enc == self.x_hat
    }

    pub fn u_hat(&self) -> &[bool] {
        &self.u_hat
    }
}

fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::LengthMismatch { expected, got })
    }
}

/// Column-0 priors: `+LLR_MAX` on frozen positions, 0 elsewhere.
fn frozen_prior(len: usize, open: &[usize]) -> Vec<f32> {
    let mut prior = vec![LLR_MAX; len];
    for &i in open {
        prior[i] = 0.0;
    }
    prior
}

/// Flooding BP on a plain polar code. Stops early once the hard decisions
/// on `u` re-encode to the hard decisions on `x`.
pub fn bp_decode(
    spec: &CodeSpec,
    llr: &[f32],
    max_iter: usize,
    rule: CheckRule,
) -> Result<DecodeResult> {
    check_len(spec.len(), llr.len())?;
    let mut bp = PolarBp::new(spec.order(), rule);
    bp.reset(&frozen_prior(spec.len(), spec.info_set()), llr);
    let mut converged = false;
    let mut iterations = 0;
    while iterations < max_iter {
        bp.iterate();
        iterations += 1;
        if bp.hard_decide() {
            converged = true;
            break;
        }
    }
    if iterations == 0 {
        bp.hard_decide();
    }
    Ok(DecodeResult {
        info: spec.extract(bp.u_hat()),
        converged,
        iterations,
        unresolved: Vec::new(),
    })
}

/// How the inner and outer graphs of a concatenated code exchange messages.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Schedule {
    /// Each global iteration: one pass on every inner graph, transfer to the
    /// outer graph, one outer pass, transfer back.
    #[default]
    RoundRobin,
    /// No exchange: inner graphs decode alone with the outer positions
    /// treated as unconstrained information.
    InnerOnly,
}

/// Joint BP on inner graph(s) and the outer graph, wired by `(block, inner
/// position)` per outer codeword position. Returns the inner decoders, the
/// outer decoder, iterations used and whether everything converged.
struct JointBp {
    inners: Vec<PolarBp>,
    outer: PolarBp,
    outer_len: usize,
    outer_info: Vec<bool>,
}

impl JointBp {
    fn run(
        &mut self,
        wiring: &[(usize, usize)],
        max_iter: usize,
        schedule: Schedule,
    ) -> (usize, bool) {
        let mut iterations = 0;
        while iterations < max_iter {
            for bp in &mut self.inners {
                bp.iterate();
            }
            iterations += 1;
            if schedule == Schedule::InnerOnly {
                if self.inners.iter_mut().all(|bp| bp.hard_decide()) {
                    return (iterations, true);
                }
                continue;
            }
            for (k, &(b, p)) in wiring.iter().enumerate() {
                let v = self.inners[b].u_extrinsic(p);
                self.outer.set_channel(k, v);
            }
            self.outer.iterate();
            for (k, &(b, p)) in wiring.iter().enumerate() {
                let v = self.outer.x_extrinsic(k);
                self.inners[b].set_prior(p, v);
            }
            if self.consistent(wiring) {
                return (iterations, true);
            }
        }
        if schedule == Schedule::InnerOnly {
            for bp in &mut self.inners {
                bp.hard_decide();
            }
        } else {
            self.consistent(wiring);
        }
        (iterations, false)
    }

    /// Every inner graph consistent, and the outer codeword read from the
    /// inner decisions is the encoding of the outer decisions.
    fn consistent(&mut self, wiring: &[(usize, usize)]) -> bool {
        let mut ok = true;
        for bp in &mut self.inners {
            ok &= bp.hard_decide();
        }
        self.outer.hard_decide();
        let mut v: Vec<bool> = (0..self.outer_len)
            .map(|i| self.outer_info[i] && self.outer.u_hat()[i])
            .collect();
        encode_in_place(&mut v);
        ok && wiring
            .iter()
            .zip(&v)
            .all(|(&(b, p), &bit)| self.inners[b].u_hat()[p] == bit)
    }
}

/// Joint BP for an augmented code. The result's `info` holds the `K_0` outer
/// bits followed by the `K_1` good-channel bits.
pub fn augmented_bp_decode(
    spec: &AugmentedSpec,
    llr: &[f32],
    max_iter: usize,
    schedule: Schedule,
    rule: CheckRule,
) -> Result<DecodeResult> {
    check_len(spec.inner_len(), llr.len())?;
    let open: Vec<usize> = spec
        .good_channels()
        .iter()
        .chain(spec.semipolarized())
        .copied()
        .collect();
    let mut inner = PolarBp::new(spec.inner_order(), rule);
    inner.reset(&frozen_prior(spec.inner_len(), &open), llr);
    let outer_spec = spec.outer();
    let mut outer = PolarBp::new(outer_spec.order(), rule);
    outer.reset(
        &frozen_prior(outer_spec.len(), outer_spec.info_set()),
        &vec![0.0; outer_spec.len()],
    );
    let wiring: Vec<(usize, usize)> = (0..outer_spec.len())
        .map(|k| (0, spec.inner_position(k)))
        .collect();
    let mut joint = JointBp {
        inners: vec![inner],
        outer,
        outer_len: outer_spec.len(),
        outer_info: outer_spec.info_mask(),
    };
    let (iterations, converged) = joint.run(&wiring, max_iter, schedule);

    let inner_u = joint.inners[0].u_hat();
    let outer_bits: Vec<bool> = match schedule {
        Schedule::RoundRobin => outer_spec.extract(joint.outer.u_hat()),
        Schedule::InnerOnly => {
            // Recover outer information from the outer codeword on the inner graph.
            let y = spec.outer_codeword(inner_u);
            outer_spec.extract(&invert_codeword(&y))
        }
    };
    let mut info = outer_bits;
    info.extend(spec.good_channels().iter().map(|&p| inner_u[p]));
    Ok(DecodeResult {
        info,
        converged,
        iterations,
        unresolved: Vec::new(),
    })
}

/// `u` with `uG = y` (`G` is an involution).
fn invert_codeword(y: &[bool]) -> Vec<bool> {
    let mut u = y.to_vec();
    encode_in_place(&mut u);
    u
}

/// Decodes block `b` of a local-global code on its own. The result's `info`
/// holds the block's outer information bits `K_{a_i}` (ascending outer
/// position) followed by its good-channel bits `K_{b_i}`.
pub fn local_decode(
    spec: &LocalGlobalSpec,
    b: usize,
    llr: &[f32],
    max_iter: usize,
    rule: CheckRule,
) -> Result<DecodeResult> {
    if b >= spec.num_blocks() {
        return Err(Error::IndexOutOfRange {
            index: b,
            len: spec.num_blocks(),
        });
    }
    check_len(spec.inner_len(), llr.len())?;
    let block = &spec.blocks()[b];
    let open: Vec<usize> = block.good.iter().chain(&block.semipolarized).copied().collect();
    let code = block.code.with_info_set(&open)?;
    let plain = bp_decode(&code, llr, max_iter, rule)?;
    let mut u = vec![false; code.len()];
    for (&p, &bit) in code.info_set().iter().zip(&plain.info) {
        u[p] = bit;
    }
    let wiring = spec.wiring();
    let mut info: Vec<bool> = spec
        .block_info(b)
        .iter()
        .map(|&k| u[wiring[k].1])
        .collect();
    info.extend(block.good.iter().map(|&p| u[p]));
    Ok(DecodeResult {
        info,
        converged: plain.converged,
        iterations: plain.iterations,
        unresolved: Vec::new(),
    })
}

/// Joint BP across all inner graphs and the outer graph. The result's `info`
/// holds the `K_a` outer information bits (ascending outer position) followed
/// by the good-channel bits of every block in order.
pub fn global_decode(
    spec: &LocalGlobalSpec,
    llrs: &[Vec<f32>],
    max_iter: usize,
    schedule: Schedule,
    rule: CheckRule,
) -> Result<DecodeResult> {
    check_len(spec.num_blocks(), llrs.len())?;
    let mut inners = Vec::with_capacity(spec.num_blocks());
    for (block, llr) in spec.blocks().iter().zip(llrs) {
        check_len(spec.inner_len(), llr.len())?;
        let open: Vec<usize> = block.good.iter().chain(&block.semipolarized).copied().collect();
        let mut bp = PolarBp::new(spec.inner_order(), rule);
        bp.reset(&frozen_prior(spec.inner_len(), &open), llr);
        inners.push(bp);
    }
    let outer_spec = spec.outer();
    let mut outer = PolarBp::new(outer_spec.order(), rule);
    outer.reset(
        &frozen_prior(outer_spec.len(), outer_spec.info_set()),
        &vec![0.0; outer_spec.len()],
    );
    let mut joint = JointBp {
        inners,
        outer,
        outer_len: outer_spec.len(),
        outer_info: outer_spec.info_mask(),
    };
    let wiring = spec.wiring();
    let (iterations, converged) = joint.run(wiring, max_iter, schedule);

    // The outer code is systematic: information sits on the codeword positions.
    let y: Vec<bool> = match schedule {
        Schedule::RoundRobin => {
            let mut v: Vec<bool> = (0..outer_spec.len())
                .map(|i| joint.outer_info[i] && joint.outer.u_hat()[i])
                .collect();
            encode_in_place(&mut v);
            v
        }
        Schedule::InnerOnly => wiring
            .iter()
            .map(|&(b, p)| joint.inners[b].u_hat()[p])
            .collect(),
    };
    let mut info = outer_spec.extract(&y);
    for (block, bp) in spec.blocks().iter().zip(&joint.inners) {
        info.extend(block.good.iter().map(|&p| bp.u_hat()[p]));
    }
    Ok(DecodeResult {
        info,
        converged,
        iterations,
        unresolved: Vec::new(),
    })
}

/// Parity constraints over binary variables, decoded by erasure peeling.
///
/// Polar graphs are added as blocks of `N(n+1)` variables laid out like
/// [`crate::graph::FactorGraph`] (`id = column · N + row`); further equality
/// constraints can tie variables of different blocks together.
#[derive(Clone, Debug, Default)]
pub struct ErasureGraph {
    checks: Vec<[u32; 3]>,
    degree: Vec<u8>,
    num_vars: usize,
}

impl ErasureGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    /// Adds the factor graph of a length-`2^n` polar code; returns the id offset.
    pub fn add_polar(&mut self, n: usize) -> usize {
        let len = 1usize << n;
        let offset = self.num_vars;
        self.num_vars += (n + 1) * len;
        for c in 0..n {
            let span = len >> (c + 1);
            for base in (0..len).step_by(2 * span) {
                for a in base..base + span {
                    let b = a + span;
                    let id = |row: usize, col: usize| (offset + col * len + row) as u32;
                    self.checks.push([id(a, c), id(b, c), id(a, c + 1)]);
                    self.degree.push(3);
                    self.checks.push([id(b, c), id(b, c + 1), 0]);
                    self.degree.push(2);
                }
            }
        }
        offset
    }

    /// Requires variables `a` and `b` to be equal.
    pub fn add_equal(&mut self, a: usize, b: usize) {
        self.checks.push([a as u32, b as u32, 0]);
        self.degree.push(2);
    }

    /// Peels to a fixed point. `known[v]` is the value of each variable if
    /// known; unknown variables are resolved in place. Returns the number of
    /// passes over the constraint list.
    pub fn peel(&self, known: &mut [Option<bool>]) -> usize {
        let mut passes = 0;
        loop {
            passes += 1;
            let mut changed = false;
            for (check, &deg) in self.checks.iter().zip(&self.degree) {
                let vars = &check[..deg as usize];
                let mut parity = false;
                let mut missing = None;
                let mut unknown = 0;
                for &v in vars {
                    match known[v as usize] {
                        Some(bit) => parity ^= bit,
                        None => {
                            unknown += 1;
                            missing = Some(v as usize);
                        }
                    }
                }
                if unknown == 1 {
                    known[missing.expect("one unknown")] = Some(parity);
                    changed = true;
                }
            }
            if !changed {
                return passes;
            }
        }
    }
}

/// Erasure-domain decoding of a polar code: `obs[k]` is `None` for an erased
/// `x_k`. Frozen u-positions are known zeros.
pub fn bec_peel(spec: &CodeSpec, obs: &[Option<bool>]) -> Result<DecodeResult> {
    check_len(spec.len(), obs.len())?;
    let mut graph = ErasureGraph::new();
    graph.add_polar(spec.order());
    let len = spec.len();
    let mut known = vec![None; graph.num_vars()];
    for i in spec.frozen_set() {
        known[i] = Some(false);
    }
    let base = spec.order() * len;
    known[base..].copy_from_slice(obs);
    let passes = graph.peel(&mut known);
    let unresolved: Vec<usize> = spec
        .info_set()
        .iter()
        .copied()
        .filter(|&i| known[i].is_none())
        .collect();
    Ok(DecodeResult {
        info: spec.info_set().iter().map(|&i| known[i].unwrap_or(false)).collect(),
        converged: unresolved.is_empty(),
        iterations: passes,
        unresolved,
    })
}

/// Erasure-domain joint decoding of an augmented code. `unresolved` lists
/// outer information indices left erased; good channels left erased are
/// reported as `N_0 + position`.
pub fn augmented_bec_peel(spec: &AugmentedSpec, obs: &[Option<bool>]) -> Result<DecodeResult> {
    check_len(spec.inner_len(), obs.len())?;
    let outer_spec = spec.outer();
    let mut graph = ErasureGraph::new();
    let inner_off = graph.add_polar(spec.inner_order());
    let outer_off = graph.add_polar(outer_spec.order());
    let n0 = outer_spec.len();
    let outer_leaf = |k: usize| outer_off + outer_spec.order() * n0 + k;
    for k in 0..n0 {
        graph.add_equal(inner_off + spec.inner_position(k), outer_leaf(k));
    }
    let mut known = vec![None; graph.num_vars()];
    let mut open = vec![false; spec.inner_len()];
    for &p in spec.good_channels().iter().chain(spec.semipolarized()) {
        open[p] = true;
    }
    for (i, &o) in open.iter().enumerate() {
        if !o {
            known[inner_off + i] = Some(false);
        }
    }
    for i in outer_spec.frozen_set() {
        known[outer_off + i] = Some(false);
    }
    let base = inner_off + spec.inner_order() * spec.inner_len();
    known[base..base + spec.inner_len()].copy_from_slice(obs);
    let passes = graph.peel(&mut known);

    let mut unresolved: Vec<usize> = outer_spec
        .info_set()
        .iter()
        .copied()
        .filter(|&i| known[outer_off + i].is_none())
        .collect();
    unresolved.extend(
        spec.good_channels()
            .iter()
            .filter(|&&p| known[inner_off + p].is_none())
            .map(|&p| n0 + p),
    );
    let mut info: Vec<bool> = outer_spec
        .info_set()
        .iter()
        .map(|&i| known[outer_off + i].unwrap_or(false))
        .collect();
    info.extend(
        spec.good_channels()
            .iter()
            .map(|&p| known[inner_off + p].unwrap_or(false)),
    );
    Ok(DecodeResult {
        info,
        converged: unresolved.is_empty(),
        iterations: passes,
        unresolved,
    })
}
