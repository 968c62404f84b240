//! Bounds and exact values for the size of minimum variable stopping sets.
//!
//! For an index set `J` of column-0 variables, a variable stopping set
//! `VSS(J)` is the leaf set of a stopping set whose column-0 members are
//! exactly `J`; every such stopping set lies inside the union tree `UT(J)`.
//! `MVSS(J)` is a smallest one. Witnesses are reported as ascending leaf
//! indices `k` of `x_k`.

use std::collections::HashMap;
use std::rc::Rc;
use std::fmt;
use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_index, Error, Result};
use crate::graph::{classify_with_tree, union_tree, FactorGraph, LeafClassification, SubgraphMask};
use crate::polar::{check_cover_swap_closure, leaf_count, CodeSpec};
use crate::rng;

/// Largest graph order accepted by [`exhaustive_mvss`].
pub const EXHAUSTIVE_MAX_ORDER: usize = 5;

fn validate(set: &[usize], n: usize) -> Result<Vec<usize>> {
    if set.is_empty() {
        return Err(Error::EmptyIndexSet);
    }
    let mut out = set.to_vec();
    for &j in &out {
        check_index(j, 1 << n)?;
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

/// Lower Bound I: `min_{j ∈ J} f(j)`.
pub fn lower_bound_i(set: &[usize], n: usize) -> Result<usize> {
    let set = validate(set, n)?;
    Ok(set.iter().map(|&j| leaf_count(j)).min().expect("non-empty"))
}

/// Lower Bound II: the number of leaf positions covered by exactly one of the
/// row supports `supp(r_j)`, `j ∈ J`.
pub fn lower_bound_ii(set: &[usize], n: usize) -> Result<usize> {
    let set = validate(set, n)?;
    let mut count = vec![0u8; 1 << n];
    for &j in &set {
        for_each_submask(j, |k| count[k] = (count[k] + 1).min(2));
    }
    Ok(count.iter().filter(|&&c| c == 1).count())
}

/// Calls `f` on every `k` whose bits are a subset of `j` (the support of row `j`).
fn for_each_submask(j: usize, mut f: impl FnMut(usize)) {
    let mut k = j;
    loop {
        f(k);
        if k == 0 {
            break;
        }
        k = (k - 1) & j;
    }
}

/// Encoding Bound: weight and support of `uG` where `supp(u) = J`.
pub fn encoding_bound(set: &[usize], n: usize) -> Result<(usize, Vec<usize>)> {
    let set = validate(set, n)?;
    let mut x = vec![false; 1 << n];
    for &j in &set {
        x[j] = true;
    }
    crate::polar::encode_in_place(&mut x);
    let witness: Vec<usize> = (0..x.len()).filter(|&k| x[k]).collect();
    Ok((witness.len(), witness))
}

/// One attempted deletion of either deletion bound.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeletionStep {
    /// The overlapped leaf `l` picked in this iteration.
    pub leaf: usize,
    /// Every leaf removed by the attempt (explicitly deleted or peeled).
    pub deleted: Vec<usize>,
    pub accepted: bool,
}

/// The sequence of deletion attempts made by one run of a deletion algorithm.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeletionTrace {
    pub steps: Vec<DeletionStep>,
}

impl DeletionTrace {
    /// Re-applies the accepted deletions to `UT(J)` and returns the surviving leaves.
    pub fn replay(&self, g: &FactorGraph, set: &[usize]) -> Result<Vec<usize>> {
        let mut mask = union_tree(g, set)?;
        for step in self.steps.iter().filter(|s| s.accepted) {
            let vars: Vec<usize> = step.deleted.iter().map(|&k| g.leaf_id(k)).collect();
            mask.delete_and_peel(g, &vars);
        }
        Ok(mask.leaves(g))
    }
}

/// A variable stopping set found by a deletion algorithm.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DeletionResult {
    pub size: usize,
    pub witness: Vec<usize>,
    pub trace: DeletionTrace,
}

/// Shared driver of both deletion bounds. `pick` chooses the position in the
/// remaining overlapped-leaf list; `targets` lists the leaves to delete for a
/// picked leaf given the current punctured tree.
fn run_deletion(
    g: &FactorGraph,
    ut: &SubgraphMask,
    cls: &LeafClassification,
    mut pick: impl FnMut(&[usize]) -> usize,
    targets: impl Fn(&SubgraphMask, usize) -> Vec<usize>,
) -> DeletionResult {
    let mut punc = ut.clone();
    let mut pending = cls.oll.clone();
    let mut trace = DeletionTrace::default();
    while !pending.is_empty() {
        let l = pending.remove(pick(&pending));
        let vars: Vec<usize> = targets(&punc, l).into_iter().map(|k| g.leaf_id(k)).collect();
        let log = punc.delete_and_peel(g, &vars);
        let deleted = log.leaves(g);
        let accepted = !log.touches_roots(g);
        if accepted {
            pending.retain(|k| deleted.binary_search(k).is_err());
        } else {
            punc.restore(&log);
        }
        trace.steps.push(DeletionStep {
            leaf: l,
            deleted,
            accepted,
        });
    }
    let witness = punc.leaves(g);
    DeletionResult {
        size: witness.len(),
        witness,
        trace,
    }
}

/// Deletion Bound I: tries overlapped leaves in descending
/// index order, each time deleting every leaf of the punctured tree below the
/// leaf's root ICN, and keeps a deletion iff peeling leaves `J` intact.
pub fn deletion_bound_i(g: &FactorGraph, set: &[usize]) -> Result<DeletionResult> {
    let set = validate(set, g.order())?;
    let ut = union_tree(g, &set)?;
    let cls = classify_with_tree(g, &set, &ut);
    Ok(run_deletion(
        g,
        &ut,
        &cls,
        |pending| pending.len() - 1,
        |punc, l| {
            let icn = cls.root_icn[&l];
            let output = g.check_output(g.check_id(icn.row, icn.col));
            let mut leaves = if punc.has_var(output) {
                punc.descendant_leaves(g, output)
            } else {
                Vec::new()
            };
            if !leaves.contains(&l) {
                leaves.push(l);
            }
            leaves
        },
    ))
}

/// One randomized deletion run with its own random stream.
pub fn deletion_bound_ii_trial(
    g: &FactorGraph,
    set: &[usize],
    seed: u64,
    trial: u64,
) -> Result<DeletionResult> {
    let set = validate(set, g.order())?;
    let ut = union_tree(g, &set)?;
    let cls = classify_with_tree(g, &set, &ut);
    Ok(random_deletion(g, &ut, &cls, seed, trial))
}

fn random_deletion(
    g: &FactorGraph,
    ut: &SubgraphMask,
    cls: &LeafClassification,
    seed: u64,
    trial: u64,
) -> DeletionResult {
    let mut rng = rng::stream(seed, &[trial]);
    run_deletion(
        g,
        ut,
        cls,
        |pending| rng.random_range(0..pending.len()),
        |_, l| vec![l],
    )
}

/// Outcome of `t` independent randomized deletion runs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RandomDeletionResult {
    /// The smallest result (earliest trial on ties).
    pub best: DeletionResult,
    pub best_trial: usize,
    /// Result size of every trial, in trial order.
    pub trial_sizes: Vec<usize>,
}

/// Deletion Bound II: single-leaf deletions in random order,
/// repeated `trials` times; the smallest result is the bound.
pub fn deletion_bound_ii(
    g: &FactorGraph,
    set: &[usize],
    trials: usize,
    seed: u64,
) -> Result<RandomDeletionResult> {
    if trials == 0 {
        return Err(Error::InvalidParameter("trial count must be at least 1".into()));
    }
    let set = validate(set, g.order())?;
    let ut = union_tree(g, &set)?;
    let cls = classify_with_tree(g, &set, &ut);
    let runs: Vec<DeletionResult> = (0..trials as u64)
        .into_par_iter()
        .map(|t| random_deletion(g, &ut, &cls, seed, t))
        .collect();
    let trial_sizes: Vec<usize> = runs.iter().map(|r| r.size).collect();
    let best_trial = (0..runs.len())
        .min_by_key(|&t| (runs[t].size, t))
        .expect("at least one trial");
    let best = runs.into_iter().nth(best_trial).expect("index in range");
    Ok(RandomDeletionResult {
        best,
        best_trial,
        trial_sizes,
    })
}

/// Exact `|MVSS(J)|` with all minimum witnesses.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExhaustiveResult {
    pub size: usize,
    /// Every minimum variable stopping set, sorted.
    pub witnesses: Vec<Vec<usize>>,
}

/// Exact search by the recursive structure of the graph. Below column 0 the
/// graph splits into two independent half-size graphs on the top and bottom
/// rows. A column-0 check on rows `r`, `r + N/2` forces its column-1 variable
/// into the stopping set when exactly one of the two roots is present, leaves
/// it free when both are, and excludes it otherwise. Minimizing over the free
/// choices with memoization over root sets gives every minimum witness.
pub fn exhaustive_mvss(g: &FactorGraph, set: &[usize]) -> Result<ExhaustiveResult> {
    let n = g.order();
    if n > EXHAUSTIVE_MAX_ORDER {
        return Err(Error::InstanceTooLarge(format!(
            "n = {n} exceeds {EXHAUSTIVE_MAX_ORDER}"
        )));
    }
    let set = validate(set, n)?;

    type Entry = Rc<(usize, Vec<u64>)>;

    fn solve(m: usize, roots: u64, memo: &mut HashMap<(usize, u64), Entry>) -> Entry {
        if roots == 0 {
            return Rc::new((0, vec![0]));
        }
        if m == 0 {
            return Rc::new((1, vec![1]));
        }
        if let Some(e) = memo.get(&(m, roots)) {
            return Rc::clone(e);
        }
        let h = 1usize << (m - 1);
        let lo = roots & ((1u64 << h) - 1);
        let hi = roots >> h;
        let forced = lo ^ hi;
        let free = lo & hi;
        let bottom = solve(m - 1, hi, memo);
        let mut best = usize::MAX;
        let mut witnesses = Vec::new();
        let mut sub = free;
        loop {
            let top = solve(m - 1, forced | sub, memo);
            let size = top.0 + bottom.0;
            if size < best {
                best = size;
                witnesses.clear();
            }
            if size == best {
                for &t in &top.1 {
                    witnesses.extend(bottom.1.iter().map(|&b| t | b << h));
                }
            }
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & free;
        }
        witnesses.sort_unstable();
        witnesses.dedup();
        let e = Rc::new((best, witnesses));
        memo.insert((m, roots), Rc::clone(&e));
        e
    }

    let roots = set.iter().fold(0u64, |r, &j| r | 1 << j);
    let found = solve(n, roots, &mut HashMap::new());
    let mut witnesses: Vec<Vec<usize>> = found
        .1
        .iter()
        .map(|&s| (0..g.len()).filter(|&k| s & (1 << k) != 0).collect())
        .collect();
    witnesses.sort();
    Ok(ExhaustiveResult {
        size: found.0,
        witnesses,
    })
}

/// True iff `leaves` is exactly the leaf set of some stopping set whose
/// column-0 members are exactly `J`.
pub fn verify_vss(g: &FactorGraph, set: &[usize], leaves: &[usize]) -> bool {
    let Ok(set) = validate(set, g.order()) else {
        return false;
    };
    let mut mask = union_tree(g, &set).expect("validated");
    let mut keep = vec![false; g.len()];
    for &k in leaves {
        if k >= g.len() {
            return false;
        }
        keep[k] = true;
    }
    let drop: Vec<usize> = (0..g.len())
        .filter(|&k| !keep[k])
        .map(|k| g.leaf_id(k))
        .collect();
    mask.delete_and_peel(g, &drop);
    let mut want = leaves.to_vec();
    want.sort_unstable();
    want.dedup();
    mask.roots(g) == set && mask.leaves(g) == want && crate::graph::is_stopping_set(g, &mask)
}

/// How the exact value in a [`BoundReport`] was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExactMethod {
    /// `|J| = 2`: the exact value is Lower Bound II.
    Pair,
    /// `J` is closed under cover and swap: the exact value is Lower Bound I.
    CoverSwap,
    /// The best lower and upper bounds coincide.
    BoundsMeet,
    /// Exhaustive search.
    Exhaustive,
}

impl fmt::Display for ExactMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ExactMethod::Pair => "pair",
            ExactMethod::CoverSwap => "cover_swap",
            ExactMethod::BoundsMeet => "bounds_meet",
            ExactMethod::Exhaustive => "exhaustive",
        })
    }
}

/// Seconds spent on each bound.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct BoundTimings {
    pub lb1: f64,
    pub lb2: f64,
    pub enc: f64,
    pub del1: f64,
    pub del2: f64,
    pub exact: f64,
}

/// Every bound on `|MVSS(J)|`, plus the exact value when one is available.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundReport {
    pub set: Vec<usize>,
    pub lb1: usize,
    pub lb2: usize,
    pub enc_ub: usize,
    pub del1_ub: usize,
    pub del2_ub: usize,
    pub exact: Option<usize>,
    pub exact_method: Option<ExactMethod>,
    pub witness: Option<Vec<usize>>,
    pub timings: BoundTimings,
}

impl BoundReport {
    pub fn lower(&self) -> usize {
        self.lb1.max(self.lb2)
    }

    pub fn upper(&self) -> usize {
        self.enc_ub.min(self.del1_ub).min(self.del2_ub)
    }

    /// The exact value if known, otherwise the best upper bound.
    pub fn best(&self) -> usize {
        self.exact.unwrap_or_else(|| self.upper())
    }
}

/// Computes all bounds and, where possible, the exact value of `|MVSS(J)|`.
/// Exact paths are tried in the order pair, cover/swap closure, meeting
/// bounds, exhaustive search (small instances only).
pub fn mvss_exact_or_bounds(
    g: &FactorGraph,
    set: &[usize],
    trials: usize,
    seed: u64,
) -> Result<BoundReport> {
    let n = g.order();
    let set = validate(set, n)?;
    let mut timings = BoundTimings::default();

    let clock = Instant::now();
    let lb1 = lower_bound_i(&set, n)?;
    timings.lb1 = clock.elapsed().as_secs_f64();
    let clock = Instant::now();
    let lb2 = lower_bound_ii(&set, n)?;
    timings.lb2 = clock.elapsed().as_secs_f64();
    let clock = Instant::now();
    let (enc_ub, enc_witness) = encoding_bound(&set, n)?;
    timings.enc = clock.elapsed().as_secs_f64();
    let clock = Instant::now();
    let del1 = deletion_bound_i(g, &set)?;
    timings.del1 = clock.elapsed().as_secs_f64();
    let clock = Instant::now();
    let del2 = deletion_bound_ii(g, &set, trials, seed)?;
    timings.del2 = clock.elapsed().as_secs_f64();

    let clock = Instant::now();
    let lower = lb1.max(lb2);
    let upper_witness = [
        (enc_ub, &enc_witness),
        (del1.size, &del1.witness),
        (del2.best.size, &del2.best.witness),
    ]
    .into_iter()
    .min_by_key(|(size, _)| *size)
    .map(|(size, w)| (size, w.clone()))
    .expect("three candidates");
    let witness_of_size =
        |size: usize| (upper_witness.0 == size).then(|| upper_witness.1.clone());
    let small = n <= EXHAUSTIVE_MAX_ORDER;

    let (exact, method, witness) = if set.len() == 2 {
        // The two row supports' symmetric difference is both the encoding
        // witness and the weight-one column set.
        (Some(lb2), Some(ExactMethod::Pair), witness_of_size(lb2))
    } else if check_cover_swap_closure(&set, n) {
        let witness = witness_of_size(lb1).or_else(|| {
            small
                .then(|| exhaustive_mvss(g, &set).ok())
                .flatten()
                .and_then(|r| r.witnesses.into_iter().next())
        });
        (Some(lb1), Some(ExactMethod::CoverSwap), witness)
    } else if lower == upper_witness.0 {
        (Some(lower), Some(ExactMethod::BoundsMeet), Some(upper_witness.1.clone()))
    } else if small {
        match exhaustive_mvss(g, &set) {
            Ok(r) => (
                Some(r.size),
                Some(ExactMethod::Exhaustive),
                r.witnesses.into_iter().next(),
            ),
            Err(Error::InstanceTooLarge(_)) => (None, None, None),
            Err(e) => return Err(e),
        }
    } else {
        (None, None, None)
    };
    timings.exact = clock.elapsed().as_secs_f64();

    Ok(BoundReport {
        set,
        lb1,
        lb2,
        enc_ub,
        del1_ub: del1.size,
        del2_ub: del2.best.size,
        exact,
        exact_method: method,
        witness,
        timings,
    })
}

/// Stopping distance of a polar code: `min_{i ∈ A} f(i)`.
pub fn stopping_distance(spec: &CodeSpec) -> Result<usize> {
    lower_bound_i(spec.info_set(), spec.order())
}

/// Upper bound on the stopping distance of an augmented code restricted to
/// the given outer and inner information indices.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ConcatSdBound {
    pub value: usize,
    /// False when some outer term relied on an upper bound rather than an
    /// exact `|MVSS(H_j)|`.
    pub exact_terms: bool,
}

impl fmt::Display for ConcatSdBound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let label = if self.exact_terms {
            "exact terms"
        } else {
            "upper bound terms"
        };
        write!(f, "{} ({label})", self.value)
    }
}

/// `min( min_{j ∈ J_out} |MVSS(H_j)|, min_{j ∈ J_in} f(j) )`, using the best
/// available value for each `|MVSS(H_j)|`.
pub fn concat_sd_upper(
    spec: &crate::concat::AugmentedSpec,
    outer_set: &[usize],
    inner_set: &[usize],
    trials: usize,
    seed: u64,
) -> Result<ConcatSdBound> {
    if outer_set.is_empty() && inner_set.is_empty() {
        return Err(Error::EmptyIndexSet);
    }
    let outer_info = spec.outer().info_mask();
    for &j in outer_set {
        check_index(j, outer_info.len())?;
        if !outer_info[j] {
            return Err(Error::InvalidParameter(format!(
                "outer index {j} is not an outer information position"
            )));
        }
    }
    let good = spec.good_channels();
    for &j in inner_set {
        if good.binary_search(&j).is_err() {
            return Err(Error::InvalidParameter(format!(
                "inner index {j} is not a good channel"
            )));
        }
    }
    let g = FactorGraph::new(spec.inner_order())?;
    let mut value = usize::MAX;
    let mut exact_terms = true;
    for &j in outer_set {
        let h = spec.h_set(j)?;
        let report = mvss_exact_or_bounds(&g, &h, trials, rng::mix(seed, j as u64))?;
        if report.exact.is_none() {
            exact_terms = false;
        }
        value = value.min(report.best());
    }
    for &j in inner_set {
        value = value.min(leaf_count(j));
    }
    Ok(ConcatSdBound { value, exact_terms })
}
