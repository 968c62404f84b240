//! Sparse polar factor graph (normal realization).
//!
//! The graph for a length `N = 2^n` code has `n + 1` columns of variable nodes
//! and `n` columns of check nodes. Variable `v(r, 0)` is the u-domain input
//! `u_r`, variable `v(r, n)` is the codeword bit `x_r`. Check column `c`
//! combines rows at distance `2^(n-1-c)`:
//!
//! * if bit `n-1-c` of `r` is clear, `c(r, c)` is a degree-3 check tying
//!   `v(r, c)`, `v(r + 2^(n-1-c), c)` and `v(r, c + 1)`;
//! * otherwise `c(r, c)` is a degree-2 pass-through check tying `v(r, c)` and
//!   `v(r, c + 1)`.
//!
//! Propagating `u` left to right therefore computes `x = u F^{⊗n}` without any
//! bit reversal, and the leftmost check column joins the upper and lower
//! half-graphs, each isomorphic to the graph of order `n - 1`.

use std::collections::{BTreeMap, BinaryHeap, VecDeque};
use std::cmp::Reverse;
use std::fmt;
use std::io::{self, Write};

use crate::error::{check_index, Error, Result};

/// Default ceiling on the graph order accepted by [`FactorGraph::new`].
pub const MAX_ORDER: usize = 20;

const NONE: u32 = u32::MAX;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NodeKind {
    Variable,
    Check,
}

/// A node of the factor graph addressed by `(row, column)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeRef {
    pub kind: NodeKind,
    pub row: usize,
    pub col: usize,
}

impl NodeRef {
    pub fn var(row: usize, col: usize) -> Self {
        Self {
            kind: NodeKind::Variable,
            row,
            col,
        }
    }

    pub fn check(row: usize, col: usize) -> Self {
        Self {
            kind: NodeKind::Check,
            row,
            col,
        }
    }
}

impl fmt::Display for NodeRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.kind {
            NodeKind::Variable => 'v',
            NodeKind::Check => 'c',
        };
        write!(f, "{}({},{})", tag, self.row, self.col)
    }
}

/// The factor graph `T_n`. Immutable after construction.
///
/// Node ids are dense: variable `v(r, c)` and check `c(r, c)` both have id
/// `c * N + r` in their respective id spaces.
#[derive(Clone, Debug)]
pub struct FactorGraph {
    n: usize,
    len: usize,
    // Check neighbors are stored as [inputs.., output]; degree-2 checks leave
    // the last slot unused.
    check_adj: Vec<[u32; 3]>,
    check_deg: Vec<u8>,
    var_adj: Vec<[u32; 3]>,
    var_deg: Vec<u8>,
}

impl FactorGraph {
    pub fn new(n: usize) -> Result<Self> {
        Self::with_max_order(n, MAX_ORDER)
    }

    pub fn with_max_order(n: usize, max: usize) -> Result<Self> {
        if n == 0 || n > max {
            return Err(Error::OrderOutOfRange { n, max });
        }
        let len = 1usize << n;
        let mut check_adj = vec![[NONE; 3]; len * n];
        let mut check_deg = vec![0u8; len * n];
        let mut var_adj = vec![[NONE; 3]; len * (n + 1)];
        let mut var_deg = vec![0u8; len * (n + 1)];

        let mut link = |check: usize, var: usize, check_adj: &mut Vec<[u32; 3]>| {
            let d = check_deg[check] as usize;
            check_adj[check][d] = var as u32;
            check_deg[check] += 1;
            let dv = var_deg[var] as usize;
            var_adj[var][dv] = check as u32;
            var_deg[var] += 1;
        };

        for col in 0..n {
            let span = 1usize << (n - 1 - col);
            for row in 0..len {
                let check = col * len + row;
                link(check, col * len + row, &mut check_adj);
                if row & span == 0 {
                    link(check, col * len + row + span, &mut check_adj);
                }
                link(check, (col + 1) * len + row, &mut check_adj);
            }
        }

        Ok(Self {
            n,
            len,
            check_adj,
            check_deg,
            var_adj,
            var_deg,
        })
    }

    /// Graph order `n`.
    pub fn order(&self) -> usize {
        self.n
    }

    /// Code length `N = 2^n`.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn num_vars(&self) -> usize {
        self.var_deg.len()
    }

    pub fn num_checks(&self) -> usize {
        self.check_deg.len()
    }

    #[inline]
    pub fn var_id(&self, row: usize, col: usize) -> usize {
        debug_assert!(row < self.len && col <= self.n);
        col * self.len + row
    }

    #[inline]
    pub fn check_id(&self, row: usize, col: usize) -> usize {
        debug_assert!(row < self.len && col < self.n);
        col * self.len + row
    }

    #[inline]
    pub fn leaf_id(&self, k: usize) -> usize {
        self.n * self.len + k
    }

    /// `(row, column)` of a variable or check id.
    #[inline]
    pub fn position(&self, id: usize) -> (usize, usize) {
        (id % self.len, id / self.len)
    }

    #[inline]
    pub fn var_column(&self, id: usize) -> usize {
        id / self.len
    }

    pub fn var_ref(&self, id: usize) -> NodeRef {
        let (r, c) = self.position(id);
        NodeRef::var(r, c)
    }

    pub fn check_ref(&self, id: usize) -> NodeRef {
        let (r, c) = self.position(id);
        NodeRef::check(r, c)
    }

    /// Neighboring variables of a check, inputs first and output last.
    #[inline]
    pub fn check_neighbors(&self, check: usize) -> &[u32] {
        &self.check_adj[check][..self.check_deg[check] as usize]
    }

    #[inline]
    pub fn var_neighbors(&self, var: usize) -> &[u32] {
        &self.var_adj[var][..self.var_deg[var] as usize]
    }

    #[inline]
    pub fn check_degree(&self, check: usize) -> usize {
        self.check_deg[check] as usize
    }

    /// The right-hand variable `v(r, c + 1)` of check `c(r, c)`.
    #[inline]
    pub fn check_output(&self, check: usize) -> usize {
        let d = self.check_deg[check] as usize;
        self.check_adj[check][d - 1] as usize
    }

    #[inline]
    pub fn check_inputs(&self, check: usize) -> &[u32] {
        let d = self.check_deg[check] as usize;
        &self.check_adj[check][..d - 1]
    }

    /// The check whose output is `var` (`None` for column-0 variables).
    #[inline]
    pub fn parent_check(&self, var: usize) -> Option<usize> {
        let (row, col) = self.position(var);
        (col > 0).then(|| self.check_id(row, col - 1))
    }

    /// Checks for which `var` is an input (the checks in the variable's own column).
    pub fn child_checks(&self, var: usize) -> impl Iterator<Item = usize> + '_ {
        let col = self.var_column(var);
        self.var_neighbors(var)
            .iter()
            .map(|&c| c as usize)
            .filter(move |&c| self.var_column(c) == col)
    }

    /// Assigns `u` to column 0 and propagates through every check, returning
    /// the value of every variable node indexed by id.
    pub fn propagate(&self, u: &[bool]) -> Result<Vec<bool>> {
        if u.len() != self.len {
            return Err(Error::LengthMismatch {
                expected: self.len,
                got: u.len(),
            });
        }
        let mut values = vec![false; self.num_vars()];
        values[..self.len].copy_from_slice(u);
        for check in 0..self.num_checks() {
            // Ids are column-major, so every input is set before its check is visited.
            let parity = self
                .check_inputs(check)
                .iter()
                .fold(false, |acc, &v| acc ^ values[v as usize]);
            values[self.check_output(check)] = parity;
        }
        Ok(values)
    }

    /// Writes one line per edge: `v r c  --  c r' c'`.
    pub fn write_edge_list<W: Write>(&self, mut out: W) -> io::Result<()> {
        for check in 0..self.num_checks() {
            let (cr, cc) = self.position(check);
            for &v in self.check_neighbors(check) {
                let (vr, vc) = self.position(v as usize);
                writeln!(out, "v {vr} {vc}  --  c {cr} {cc}")?;
            }
        }
        Ok(())
    }
}

/// A subset of the variable and check nodes of a [`FactorGraph`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubgraphMask {
    vars: Vec<bool>,
    checks: Vec<bool>,
}

impl SubgraphMask {
    pub fn empty(g: &FactorGraph) -> Self {
        Self {
            vars: vec![false; g.num_vars()],
            checks: vec![false; g.num_checks()],
        }
    }

    /// Every node of the graph.
    pub fn full(g: &FactorGraph) -> Self {
        Self {
            vars: vec![true; g.num_vars()],
            checks: vec![true; g.num_checks()],
        }
    }

    /// Mask holding exactly the given variables plus every check adjacent to them.
    pub fn from_vars(g: &FactorGraph, vars: impl IntoIterator<Item = usize>) -> Self {
        let mut mask = Self::empty(g);
        for v in vars {
            mask.vars[v] = true;
            for &c in g.var_neighbors(v) {
                mask.checks[c as usize] = true;
            }
        }
        mask
    }

    #[inline]
    pub fn has_var(&self, id: usize) -> bool {
        self.vars[id]
    }

    #[inline]
    pub fn has_check(&self, id: usize) -> bool {
        self.checks[id]
    }

    pub fn insert_var(&mut self, id: usize) {
        self.vars[id] = true;
    }

    pub fn insert_check(&mut self, id: usize) {
        self.checks[id] = true;
    }

    pub fn remove_var(&mut self, id: usize) {
        self.vars[id] = false;
    }

    pub fn remove_check(&mut self, id: usize) {
        self.checks[id] = false;
    }

    pub fn var_ids(&self) -> impl Iterator<Item = usize> + '_ {
        self.vars.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i)
    }

    pub fn check_ids(&self) -> impl Iterator<Item = usize> + '_ {
        self.checks.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i)
    }

    pub fn var_count(&self) -> usize {
        self.vars.iter().filter(|&&b| b).count()
    }

    pub fn check_count(&self) -> usize {
        self.checks.iter().filter(|&&b| b).count()
    }

    /// Row indices of the member variables in `column`.
    pub fn column_rows(&self, g: &FactorGraph, column: usize) -> Vec<usize> {
        let base = column * g.len();
        (0..g.len()).filter(|&r| self.vars[base + r]).collect()
    }

    /// Indices `k` of the member leaves `x_k`.
    pub fn leaves(&self, g: &FactorGraph) -> Vec<usize> {
        self.column_rows(g, g.order())
    }

    /// Rows of the member column-0 variables.
    pub fn roots(&self, g: &FactorGraph) -> Vec<usize> {
        self.column_rows(g, 0)
    }

    pub fn union_with(&mut self, other: &SubgraphMask) {
        for (a, &b) in self.vars.iter_mut().zip(&other.vars) {
            *a |= b;
        }
        for (a, &b) in self.checks.iter_mut().zip(&other.checks) {
            *a |= b;
        }
    }

    /// True if every member variable (and check) is also in `other`.
    pub fn is_subset_of(&self, other: &SubgraphMask) -> bool {
        self.vars.iter().zip(&other.vars).all(|(&a, &b)| !a || b)
            && self.checks.iter().zip(&other.checks).all(|(&a, &b)| !a || b)
    }

    /// Number of member variables adjacent to a check.
    pub fn member_degree(&self, g: &FactorGraph, check: usize) -> usize {
        g.check_neighbors(check)
            .iter()
            .filter(|&&v| self.vars[v as usize])
            .count()
    }

    /// Leaves reachable from `var` moving rightward through member nodes.
    pub fn descendant_leaves(&self, g: &FactorGraph, var: usize) -> Vec<usize> {
        let mut seen = vec![false; g.num_vars()];
        let mut queue = VecDeque::from([var]);
        seen[var] = true;
        let mut leaves = Vec::new();
        while let Some(v) = queue.pop_front() {
            let (row, col) = g.position(v);
            if col == g.order() {
                leaves.push(row);
                continue;
            }
            for c in g.child_checks(v) {
                if !self.checks[c] {
                    continue;
                }
                let o = g.check_output(c);
                if self.vars[o] && !seen[o] {
                    seen[o] = true;
                    queue.push_back(o);
                }
            }
        }
        leaves.sort_unstable();
        leaves
    }

    /// Repeatedly deletes degree-1 member checks together with their sole member
    /// variable until none remain. Checks left with no member variable are
    /// dropped as well. Returns the ids of the variables removed.
    ///
    /// The fixed point is the largest stopping set contained in the mask (with
    /// respect to member checks), independent of processing order; degree-1
    /// checks are processed in `(row, column)` order for reproducible traces.
    pub fn peel(&mut self, g: &FactorGraph) -> Vec<usize> {
        self.peel_with(g, PeelOrder::Lexicographic)
    }

    pub(crate) fn peel_with(&mut self, g: &FactorGraph, order: PeelOrder) -> Vec<usize> {
        let mut degree = vec![0u8; g.num_checks()];
        let mut queue = PeelQueue::new(order);
        for c in 0..g.num_checks() {
            if !self.checks[c] {
                continue;
            }
            let d = self.member_degree(g, c) as u8;
            degree[c] = d;
            match d {
                0 => self.checks[c] = false,
                1 => queue.push(g, c),
                _ => {}
            }
        }

        let mut removed = Vec::new();
        while let Some(c) = queue.pop() {
            if !self.checks[c] || degree[c] != 1 {
                continue;
            }
            self.checks[c] = false;
            let v = g
                .check_neighbors(c)
                .iter()
                .map(|&v| v as usize)
                .find(|&v| self.vars[v])
                .expect("degree-1 check has a member variable");
            self.vars[v] = false;
            removed.push(v);
            for &other in g.var_neighbors(v) {
                let other = other as usize;
                if !self.checks[other] {
                    continue;
                }
                degree[other] -= 1;
                match degree[other] {
                    0 => self.checks[other] = false,
                    1 => queue.push(g, other),
                    _ => {}
                }
            }
        }
        removed
    }

    /// Removes `vars` and peels only the region they affect. Assumes the mask
    /// had no degree-1 checks beforehand (e.g. it is a stopping set or the
    /// result of [`peel`](Self::peel)); the outcome then equals a full peel.
    pub fn delete_and_peel(&mut self, g: &FactorGraph, vars: &[usize]) -> PeelLog {
        let mut log = PeelLog::default();
        let mut queue = PeelQueue::new(PeelOrder::Lexicographic);
        for &v in vars {
            if self.vars[v] {
                self.vars[v] = false;
                log.vars.push(v);
                for &c in g.var_neighbors(v) {
                    if self.checks[c as usize] {
                        queue.push(g, c as usize);
                    }
                }
            }
        }
        while let Some(c) = queue.pop() {
            if !self.checks[c] {
                continue;
            }
            let mut members = g
                .check_neighbors(c)
                .iter()
                .map(|&v| v as usize)
                .filter(|&v| self.vars[v]);
            let first = members.next();
            if members.next().is_some() {
                continue;
            }
            self.checks[c] = false;
            log.checks.push(c);
            if let Some(v) = first {
                self.vars[v] = false;
                log.vars.push(v);
                for &o in g.var_neighbors(v) {
                    if self.checks[o as usize] {
                        queue.push(g, o as usize);
                    }
                }
            }
        }
        log
    }

    /// Reinserts everything recorded in `log`.
    pub fn restore(&mut self, log: &PeelLog) {
        for &v in &log.vars {
            self.vars[v] = true;
        }
        for &c in &log.checks {
            self.checks[c] = true;
        }
    }
}

/// Nodes removed by [`SubgraphMask::delete_and_peel`], used to undo a trial deletion.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PeelLog {
    pub vars: Vec<usize>,
    pub checks: Vec<usize>,
}

impl PeelLog {
    /// Removed leaves `x_k`, ascending.
    pub fn leaves(&self, g: &FactorGraph) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .vars
            .iter()
            .map(|&v| g.position(v))
            .filter(|&(_, c)| c == g.order())
            .map(|(r, _)| r)
            .collect();
        out.sort_unstable();
        out
    }

    /// True if a column-0 variable was removed.
    pub fn touches_roots(&self, g: &FactorGraph) -> bool {
        self.vars.iter().any(|&v| v < g.len())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum PeelOrder {
    Lexicographic,
    #[cfg_attr(not(test), allow(dead_code))]
    Fifo,
}

enum PeelQueue {
    Lex(BinaryHeap<Reverse<(usize, usize, usize)>>),
    Fifo(VecDeque<usize>),
}

impl PeelQueue {
    fn new(order: PeelOrder) -> Self {
        match order {
            PeelOrder::Lexicographic => PeelQueue::Lex(BinaryHeap::new()),
            PeelOrder::Fifo => PeelQueue::Fifo(VecDeque::new()),
        }
    }

    fn push(&mut self, g: &FactorGraph, c: usize) {
        match self {
            PeelQueue::Lex(h) => {
                let (r, col) = g.position(c);
                h.push(Reverse((r, col, c)));
            }
            PeelQueue::Fifo(q) => q.push_back(c),
        }
    }

    fn pop(&mut self) -> Option<usize> {
        match self {
            PeelQueue::Lex(h) => h.pop().map(|Reverse((_, _, c))| c),
            PeelQueue::Fifo(q) => q.pop_front(),
        }
    }
}

/// Overlapped / non-overlapped leaves of a union tree and their root ICNs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LeafClassification {
    /// Leaves shared by at least two stopping trees, ascending.
    pub oll: Vec<usize>,
    /// Leaves owned by exactly one stopping tree, ascending.
    pub noll: Vec<usize>,
    /// For each overlapped leaf, its parent intersection check of largest column.
    pub root_icn: BTreeMap<usize, NodeRef>,
}

fn validate_set(g: &FactorGraph, set: &[usize]) -> Result<Vec<usize>> {
    if set.is_empty() {
        return Err(Error::EmptyIndexSet);
    }
    let mut out = set.to_vec();
    for &i in &out {
        check_index(i, g.len())?;
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

/// The unique stopping tree rooted at `v(i, 0)`.
pub fn stopping_tree(g: &FactorGraph, i: usize) -> Result<SubgraphMask> {
    check_index(i, g.len())?;
    let mut mask = SubgraphMask::empty(g);
    grow_tree(g, i, &mut mask);
    Ok(mask)
}

fn grow_tree(g: &FactorGraph, i: usize, mask: &mut SubgraphMask) {
    let root = g.var_id(i, 0);
    mask.vars[root] = true;
    let mut stack = vec![root];
    while let Some(v) = stack.pop() {
        for c in g.child_checks(v) {
            mask.checks[c] = true;
            let o = g.check_output(c);
            if !mask.vars[o] {
                mask.vars[o] = true;
                stack.push(o);
            }
        }
    }
}

/// `UT(J)`: the union of the stopping trees of every index in `J`.
pub fn union_tree(g: &FactorGraph, set: &[usize]) -> Result<SubgraphMask> {
    let set = validate_set(g, set)?;
    let mut mask = SubgraphMask::empty(g);
    for &j in &set {
        grow_tree(g, j, &mut mask);
    }
    Ok(mask)
}

/// Splits the leaves of `UT(J)` into overlapped and non-overlapped leaves and
/// locates the root intersection check of every overlapped leaf.
pub fn classify_leaves(g: &FactorGraph, set: &[usize]) -> Result<LeafClassification> {
    let set = validate_set(g, set)?;
    let ut = union_tree(g, &set)?;
    Ok(classify_with_tree(g, &set, &ut))
}

pub(crate) fn classify_with_tree(
    g: &FactorGraph,
    set: &[usize],
    ut: &SubgraphMask,
) -> LeafClassification {
    // Leaf x_k belongs to ST(j) exactly when the bits of k are a subset of j.
    let mut count = vec![0u8; g.len()];
    for &j in set {
        let mut k = j;
        loop {
            count[k] = count[k].saturating_add(1).min(2);
            if k == 0 {
                break;
            }
            k = (k - 1) & j;
        }
    }
    let mut oll = Vec::new();
    let mut noll = Vec::new();
    for (k, &c) in count.iter().enumerate() {
        match c {
            0 => {}
            1 => noll.push(k),
            _ => oll.push(k),
        }
    }
    let root_icn = oll
        .iter()
        .map(|&k| {
            let icn = root_icn(g, ut, k).expect("an overlapped leaf has a parent ICN");
            (k, g.check_ref(icn))
        })
        .collect();
    LeafClassification {
        oll,
        noll,
        root_icn,
    }
}

/// A member check with all of its (three) neighbors in the mask.
pub fn is_icn(g: &FactorGraph, mask: &SubgraphMask, check: usize) -> bool {
    mask.has_check(check) && g.check_degree(check) == 3 && mask.member_degree(g, check) == 3
}

/// Walks leftward from leaf `x_k` through mask members and returns the
/// ancestor ICN with the largest column (lowest row on ties).
pub fn root_icn(g: &FactorGraph, mask: &SubgraphMask, k: usize) -> Option<usize> {
    let mut frontier = vec![g.leaf_id(k)];
    let mut seen = vec![false; g.num_vars()];
    while !frontier.is_empty() {
        let mut parents: Vec<usize> = frontier
            .iter()
            .filter_map(|&v| g.parent_check(v))
            .filter(|&c| mask.has_check(c))
            .collect();
        parents.sort_unstable();
        parents.dedup();
        if let Some(&icn) = parents.iter().find(|&&c| is_icn(g, mask, c)) {
            return Some(icn);
        }
        let mut next = Vec::new();
        for c in parents {
            for &v in g.check_inputs(c) {
                let v = v as usize;
                if mask.has_var(v) && !seen[v] {
                    seen[v] = true;
                    next.push(v);
                }
            }
        }
        frontier = next;
    }
    None
}

/// True iff the mask's variable set is non-empty and every check adjacent to
/// a member variable has at least two member variable neighbors.
pub fn is_stopping_set(g: &FactorGraph, mask: &SubgraphMask) -> bool {
    let mut any = false;
    for v in mask.var_ids() {
        any = true;
        for &c in g.var_neighbors(v) {
            if mask.member_degree(g, c as usize) < 2 {
                return false;
            }
        }
    }
    any
}
