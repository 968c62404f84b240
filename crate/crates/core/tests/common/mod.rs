//! Independent reference implementations used to check the library.
//!
//! Nothing here calls into `polar_stopping`; every value is recomputed from
//! first principles with deliberately naive code.

#![allow(dead_code)]

/// `x = u F^{⊗n}` by definition: `x_k = Σ_{i ⊇ k} u_i`.
pub fn encode(u: &[bool]) -> Vec<bool> {
    let len = u.len();
    (0..len)
        .map(|k| (0..len).filter(|&i| i & k == k && u[i]).count() % 2 == 1)
        .collect()
}

/// Leaf count of the stopping tree of `i`: `2^{wt(i)}`.
pub fn leaf_count(i: usize) -> usize {
    1 << i.count_ones()
}

/// Support of row `j` of the generator matrix.
pub fn row_support(n: usize, j: usize) -> Vec<usize> {
    (0..1usize << n).filter(|&k| k & j == k).collect()
}

pub fn lower_bound_i(set: &[usize]) -> usize {
    set.iter().map(|&j| leaf_count(j)).min().unwrap()
}

pub fn lower_bound_ii(n: usize, set: &[usize]) -> usize {
    (0..1usize << n)
        .filter(|&k| set.iter().filter(|&&j| k & j == k).count() == 1)
        .count()
}

pub fn encoding_bound(n: usize, set: &[usize]) -> usize {
    let mut u = vec![false; 1 << n];
    for &j in set {
        u[j] = true;
    }
    encode(&u).iter().filter(|&&b| b).count()
}

/// Analysis Tanner graph: variable `(row, col)` has id `col * N + row`.
/// Stage `c` maps column `c` to column `c + 1` with span `N / 2^{c+1}`:
/// the upper row of each pair takes the XOR, the lower row is copied.
pub struct Tanner {
    pub n: usize,
    pub len: usize,
    pub checks: Vec<Vec<usize>>,
}

impl Tanner {
    pub fn new(n: usize) -> Self {
        let len = 1usize << n;
        let id = |r: usize, c: usize| c * len + r;
        let mut checks = Vec::new();
        for c in 0..n {
            let s = len >> (c + 1);
            for r in 0..len {
                if r & s == 0 {
                    checks.push(vec![id(r, c), id(r + s, c), id(r, c + 1)]);
                } else {
                    checks.push(vec![id(r, c), id(r, c + 1)]);
                }
            }
        }
        Tanner { n, len, checks }
    }

    pub fn num_vars(&self) -> usize {
        (self.n + 1) * self.len
    }

    pub fn leaf(&self, k: usize) -> usize {
        self.n * self.len + k
    }

    /// Values of every variable when column 0 holds `u`.
    pub fn evaluate(&self, u: &[bool]) -> Vec<bool> {
        let len = self.len;
        let mut v = vec![false; self.num_vars()];
        v[..len].copy_from_slice(u);
        for c in 0..self.n {
            let s = len >> (c + 1);
            for r in 0..len {
                let a = v[c * len + r];
                v[(c + 1) * len + r] = if r & s == 0 { a ^ v[c * len + r + s] } else { a };
            }
        }
        v
    }

    /// Repeatedly resolves any check with a single unknown neighbor; returns
    /// the unknown set left over (the largest stopping set inside `unknown`).
    pub fn peel(&self, unknown: &[bool]) -> Vec<bool> {
        let mut unknown = unknown.to_vec();
        loop {
            let mut progress = false;
            for ch in &self.checks {
                let open: Vec<usize> = ch.iter().copied().filter(|&v| unknown[v]).collect();
                if open.len() == 1 {
                    unknown[open[0]] = false;
                    progress = true;
                }
            }
            if !progress {
                return unknown;
            }
        }
    }

    /// Residual of peeling when the leaves in `leaves`, every hidden node and
    /// the roots in `set` start unknown. Returns `(roots, leaves)` of the residual.
    pub fn residual(&self, set: &[usize], leaves: &[usize]) -> (Vec<usize>, Vec<usize>) {
        let len = self.len;
        let mut unknown = vec![false; self.num_vars()];
        for &j in set {
            unknown[j] = true;
        }
        for v in len..self.n * len {
            unknown[v] = true;
        }
        for &k in leaves {
            unknown[self.leaf(k)] = true;
        }
        let rest = self.peel(&unknown);
        let roots = (0..len).filter(|&r| rest[r]).collect();
        let out = (0..len).filter(|&k| rest[self.leaf(k)]).collect();
        (roots, out)
    }

    /// True iff `leaves` is the observed part of a stopping set whose
    /// column-0 members are exactly `set`.
    pub fn is_vss(&self, set: &[usize], leaves: &[usize]) -> bool {
        let mut set = set.to_vec();
        set.sort_unstable();
        set.dedup();
        let mut want = leaves.to_vec();
        want.sort_unstable();
        want.dedup();
        let (roots, got) = self.residual(&set, &want);
        roots == set && got == want
    }

    /// All variable stopping sets of `set`, as leaf bitmasks (n ≤ 4).
    pub fn all_vss(&self, set: &[usize]) -> Vec<u32> {
        assert!(self.n <= 4);
        (1u32..1 << self.len)
            .filter(|&m| self.is_vss(set, &bits(m)))
            .collect()
    }

    /// `|MVSS(J)|` and every minimum witness, by enumerating leaf subsets in
    /// order of increasing size (n ≤ 4). With `restrict`, only subsets of the
    /// union of the row supports of `J` are tried.
    pub fn mvss_search(&self, set: &[usize], restrict: bool) -> (usize, Vec<Vec<usize>>) {
        assert!(self.n <= 4);
        let universe: u32 = if restrict {
            set.iter()
                .flat_map(|&j| row_support(self.n, j))
                .fold(0, |acc, k| acc | 1 << k)
        } else {
            ((1u64 << self.len) - 1) as u32
        };
        let mut masks: Vec<u32> = (1u32..=universe)
            .filter(|&m| m & !universe == 0)
            .collect();
        masks.sort_by_key(|m| (m.count_ones(), *m));
        let mut best = None;
        let mut witnesses = Vec::new();
        for m in masks {
            let size = m.count_ones() as usize;
            if best.is_some_and(|b| size > b) {
                break;
            }
            let l = bits(m);
            if self.is_vss(set, &l) {
                best = Some(size);
                witnesses.push(l);
            }
        }
        (best.expect("the union tree leaves always form a VSS"), witnesses)
    }

    pub fn mvss(&self, set: &[usize]) -> (usize, Vec<Vec<usize>>) {
        self.mvss_search(set, true)
    }
}

/// Indices of the set bits of `m`, ascending.
pub fn bits(m: u32) -> Vec<usize> {
    (0..32).filter(|&k| m >> k & 1 == 1).collect()
}

/// True when `i` is obtained from `j` by adding one 1-bit (cover) or moving
/// one 1-bit to a more significant 0-bit (swap).
fn one_step_above(j: usize, i: usize) -> bool {
    let diff = i ^ j;
    match diff.count_ones() {
        1 => i & diff != 0,
        2 => {
            let low = diff & diff.wrapping_neg();
            j & low != 0 && i & (diff ^ low) != 0
        }
        _ => false,
    }
}

/// Closes `seeds` under cover and swap by fixed-point iteration.
pub fn cover_swap_closure(n: usize, seeds: &[usize]) -> Vec<usize> {
    let len = 1usize << n;
    let mut member = vec![false; len];
    for &s in seeds {
        member[s] = true;
    }
    loop {
        let mut changed = false;
        for j in 0..len {
            if !member[j] {
                continue;
            }
            for i in 0..len {
                if !member[i] && one_step_above(j, i) {
                    member[i] = true;
                    changed = true;
                }
            }
        }
        if !changed {
            return (0..len).filter(|&i| member[i]).collect();
        }
    }
}

pub fn is_cover_swap_closed(n: usize, set: &[usize]) -> bool {
    cover_swap_closure(n, set).len() == {
        let mut s = set.to_vec();
        s.sort_unstable();
        s.dedup();
        s.len()
    }
}

/// Bhattacharyya parameters of the BEC(eps) bit-channels by the textbook
/// recursion, MSB of the index first: bit 0 → `2z − z²`, bit 1 → `z²`.
pub fn bec_z(n: usize, eps: f64) -> Vec<f64> {
    (0..1usize << n)
        .map(|i| {
            let mut z = eps;
            for b in (0..n).rev() {
                z = if i >> b & 1 == 1 { z * z } else { 2.0 * z - z * z };
            }
            z
        })
        .collect()
}

/// Two-sided Wilson score interval.
pub fn wilson(errors: u64, frames: u64, z: f64) -> (f64, f64) {
    let n = frames as f64;
    let p = errors as f64 / n;
    let z2 = z * z;
    let center = (p + z2 / (2.0 * n)) / (1.0 + z2 / n);
    let half = z / (1.0 + z2 / n) * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    (center - half, center + half)
}
