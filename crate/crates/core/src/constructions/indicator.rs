//! Exact image of a row-indicator operation.
//!
//! For `f(x) = high` when `x` is one of a fixed set of row vectors and `0`
//! otherwise, every output column lies in `{0, high}^l`. A pattern `c` is in
//! `f(rel)` iff some selection `r_1, …, r_k ∈ rel` makes the coordinate
//! vector `V_i = (r_1(i), …, r_k(i))` a row exactly at the coordinates where
//! `c_i = high`. The search below decides this per pattern:
//!
//! 1. assign a target row to each high coordinate, narrowing the candidate
//!    tuples for every selection position (backtracking, pruned as soon as a
//!    position has no candidate left);
//! 2. for the low coordinates, each (coordinate, row) pair must be broken by
//!    some position whose chosen tuple disagrees with that row there. This is
//!    a small covering problem solved by memoised search over positions.
//!
//! Cost is governed by `2^l` patterns rather than `|rel|^k` selections.

use std::collections::HashSet;

use fixedbitset::FixedBitSet;

use crate::algebra::{Kernel, Operation};
use crate::error::{Error, Result};
use crate::relations::{Counterexample, Preservation, Relation};

/// Patterns are enumerated over `{0, high}^l`, so `l` is capped.
pub const MAX_INDICATOR_ARITY: usize = 20;

struct Search<'a> {
    rel: &'a Relation,
    rows: &'a [Vec<u32>],
    k: usize,
    /// `by_value[i][v]`: tuples with value `v` at coordinate `i`.
    by_value: Vec<Vec<FixedBitSet>>,
}

impl<'a> Search<'a> {
    fn new(rel: &'a Relation, rows: &'a [Vec<u32>], k: usize) -> Self {
        let n = rel.domain().size() as usize;
        let m = rel.len();
        let mut by_value = vec![vec![FixedBitSet::with_capacity(m); n]; rel.arity()];
        for (t, tuple) in rel.tuples().enumerate() {
            for (i, &v) in tuple.iter().enumerate() {
                by_value[i][v as usize].insert(t);
            }
        }
        Self {
            rel,
            rows,
            k,
            by_value,
        }
    }

    /// A selection (tuple index per position) realising `high_coords`, if any.
    fn realise(&self, high: &[bool]) -> Option<Vec<usize>> {
        let mut all = FixedBitSet::with_capacity(self.rel.len());
        all.insert_range(..);
        let candidates = vec![all; self.k];
        let high_coords: Vec<usize> = (0..high.len()).filter(|&i| high[i]).collect();
        self.assign(&high_coords, 0, candidates, high)
    }

    fn assign(
        &self,
        high_coords: &[usize],
        at: usize,
        candidates: Vec<FixedBitSet>,
        high: &[bool],
    ) -> Option<Vec<usize>> {
        let Some(&i) = high_coords.get(at) else {
            return self.cover_low(&candidates, high);
        };
        'rows: for row in self.rows {
            let mut narrowed = candidates.clone();
            for (j, set) in narrowed.iter_mut().enumerate() {
                let v = row[j] as usize;
                match self.by_value[i].get(v) {
                    Some(with_v) => set.intersect_with(with_v),
                    None => continue 'rows,
                }
                if set.is_clear() {
                    continue 'rows;
                }
            }
            if let Some(sel) = self.assign(high_coords, at + 1, narrowed, high) {
                return Some(sel);
            }
        }
        None
    }

    /// Picks one candidate per position so no low coordinate's vector equals
    /// any row.
    fn cover_low(&self, candidates: &[FixedBitSet], high: &[bool]) -> Option<Vec<usize>> {
        let low: Vec<usize> = (0..high.len()).filter(|&i| !high[i]).collect();
        let pairs = low.len() * self.rows.len();
        if pairs == 0 {
            return Some(
                candidates
                    .iter()
                    .map(|s| s.ones().next().unwrap())
                    .collect(),
            );
        }
        // options[j]: non-dominated (mask of broken pairs, tuple index)
        let mut options: Vec<Vec<(FixedBitSet, usize)>> = Vec::with_capacity(self.k);
        let mut reachable = FixedBitSet::with_capacity(pairs);
        for (j, set) in candidates.iter().enumerate() {
            let mut masks: Vec<(FixedBitSet, usize)> = Vec::new();
            for t in set.ones() {
                let tuple = self.rel.tuple(t);
                let mut mask = FixedBitSet::with_capacity(pairs);
                for (li, &i) in low.iter().enumerate() {
                    for (q, row) in self.rows.iter().enumerate() {
                        if tuple[i] != row[j] {
                            mask.insert(li * self.rows.len() + q);
                        }
                    }
                }
                if masks.iter().any(|(m, _)| mask.is_subset(m)) {
                    continue;
                }
                masks.retain(|(m, _)| !m.is_subset(&mask));
                masks.push((mask, t));
            }
            for (m, _) in &masks {
                reachable.union_with(m);
            }
            options.push(masks);
        }
        if reachable.count_ones(..) < pairs {
            return None;
        }
        let mut seen = HashSet::new();
        let mut chosen = Vec::with_capacity(self.k);
        let covered = FixedBitSet::with_capacity(pairs);
        cover_dfs(&options, 0, &covered, pairs, &mut seen, &mut chosen).then_some(chosen)
    }
}

fn cover_dfs(
    options: &[Vec<(FixedBitSet, usize)>],
    j: usize,
    covered: &FixedBitSet,
    pairs: usize,
    seen: &mut HashSet<(usize, FixedBitSet)>,
    chosen: &mut Vec<usize>,
) -> bool {
    if j == options.len() {
        return covered.count_ones(..) == pairs;
    }
    if !seen.insert((j, covered.clone())) {
        return false;
    }
    for (mask, t) in &options[j] {
        let mut next = covered.clone();
        next.union_with(mask);
        chosen.push(*t);
        if cover_dfs(options, j + 1, &next, pairs, seen, chosen) {
            return true;
        }
        chosen.pop();
    }
    false
}

fn indicator_parts(op: &Operation) -> Result<(&[Vec<u32>], u32)> {
    match op.kernel() {
        Some(Kernel::RowIndicator { rows, high }) => Ok((rows, *high)),
        _ => Err(Error::NotIndicator),
    }
}

/// Every column of `op(rel)` with one witnessing selection each, in
/// lexicographic order of the output column.
pub fn indicator_image(op: &Operation, rel: &Relation) -> Result<Vec<Counterexample>> {
    let (rows, high) = indicator_parts(op)?;
    op.domain().same_as(rel.domain())?;
    let l = rel.arity();
    if l > MAX_INDICATOR_ARITY {
        return Err(Error::InvalidParameter(format!(
            "indicator checker supports relation arity <= {MAX_INDICATOR_ARITY}, got {l}"
        )));
    }
    if rel.is_empty() {
        return Ok(Vec::new());
    }
    let search = Search::new(rel, rows, op.arity());
    let mut out = Vec::new();
    for bits in 0u64..1 << l {
        // coordinate 0 is the most significant bit, so 0 < high sorts first
        let high_mask: Vec<bool> = (0..l).map(|i| bits >> (l - 1 - i) & 1 == 1).collect();
        if let Some(sel) = search.realise(&high_mask) {
            out.push(Counterexample {
                selection: sel.iter().map(|&t| rel.tuple(t).to_vec()).collect(),
                output: high_mask
                    .iter()
                    .map(|&h| if h { high } else { 0 })
                    .collect(),
            });
        }
    }
    Ok(out)
}

/// `op ▷ rel` for a row-indicator `op`, with the lexicographically first
/// offending output column as counterexample.
pub fn indicator_preserves_op(op: &Operation, rel: &Relation) -> Result<Preservation> {
    Ok(indicator_image(op, rel)?
        .into_iter()
        .find(|c| !rel.contains(&c.output))
        .map_or(Preservation::Preserved, Preservation::Violated))
}
