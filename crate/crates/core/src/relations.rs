//! Relations as sets of tuples, images under operations, and preservation.
//!
//! A relation's tuples are kept deduplicated in ascending lexicographic
//! order. Reading the tuples as the columns of a matrix, row `i` of the
//! matrix is the vector of `i`-th coordinates in that order.

use std::collections::HashSet;

use fixedbitset::FixedBitSet;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::{encode, Domain, Odometer, Operation};
use crate::error::{Error, Result};

/// Default cap on the number of column selections a naive scan may visit.
pub const DEFAULT_BUDGET: u64 = 100_000_000;

/// Cap on `|rel|^arity` for naive image and preservation scans.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Budget {
    pub max_selections: u64,
}

impl Budget {
    pub const fn new(max_selections: u64) -> Self {
        Self { max_selections }
    }

    pub const fn unlimited() -> Self {
        Self::new(u64::MAX)
    }

    fn admit(&self, rel_len: usize, arity: usize) -> Result<u64> {
        let needed = (rel_len as u64).checked_pow(arity as u32);
        match needed {
            Some(needed) if needed <= self.max_selections => Ok(needed),
            _ => Err(Error::BudgetExceeded {
                needed: needed
                    .map(|v| v.to_string())
                    .unwrap_or_else(|| format!("{rel_len}^{arity}")),
                budget: self.max_selections,
            }),
        }
    }
}

impl Default for Budget {
    fn default() -> Self {
        Self::new(DEFAULT_BUDGET)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Relation {
    domain: Domain,
    arity: usize,
    /// Tuples back to back, sorted and deduplicated.
    data: Vec<u32>,
}

impl Relation {
    pub fn new<I, T>(domain: Domain, arity: usize, tuples: I) -> Result<Self>
    where
        I: IntoIterator<Item = T>,
        T: AsRef<[u32]>,
    {
        if arity == 0 {
            return Err(Error::ZeroArity);
        }
        let mut rows: Vec<Vec<u32>> = Vec::new();
        for t in tuples {
            let t = t.as_ref();
            if t.len() != arity {
                return Err(Error::ArityMismatch {
                    expected: arity,
                    got: t.len(),
                });
            }
            for &x in t {
                domain.check(x)?;
            }
            rows.push(t.to_vec());
        }
        rows.sort_unstable();
        rows.dedup();
        Ok(Self {
            domain,
            arity,
            data: rows.concat(),
        })
    }

    pub fn empty(domain: Domain, arity: usize) -> Result<Self> {
        Self::new(domain, arity, std::iter::empty::<Vec<u32>>())
    }

    /// All of `A^arity`.
    pub fn full(domain: Domain, arity: usize) -> Result<Self> {
        let count = domain.tuple_count(arity).unwrap_or(u64::MAX);
        if count > crate::algebra::MATERIALIZE_LIMIT {
            return Err(Error::TooLarge {
                entries: format!("{}^{}", domain.size(), arity),
                limit: crate::algebra::MATERIALIZE_LIMIT,
            });
        }
        let mut data = Vec::with_capacity(count as usize * arity);
        let mut odo = Odometer::new(domain.size(), arity);
        while let Some(t) = odo.next() {
            data.extend_from_slice(t);
        }
        Ok(Self {
            domain,
            arity,
            data,
        })
    }

    /// `x·I^(l)`: the `l` tuples with `x` in one coordinate and 0 elsewhere.
    /// For `x = 0` they all coincide.
    pub fn scaled_identity(domain: Domain, x: u32, arity: usize) -> Result<Self> {
        domain.check(x)?;
        Self::new(
            domain,
            arity,
            (0..arity).map(|i| {
                let mut t = vec![0; arity];
                t[i] = x;
                t
            }),
        )
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.arity
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn tuples(&self) -> impl ExactSizeIterator<Item = &[u32]> + '_ {
        self.data.chunks_exact(self.arity)
    }

    /// The `index`-th tuple in canonical order, 0-based.
    pub fn tuple(&self, index: usize) -> &[u32] {
        &self.data[index * self.arity..(index + 1) * self.arity]
    }

    pub fn to_vecs(&self) -> Vec<Vec<u32>> {
        self.tuples().map(<[u32]>::to_vec).collect()
    }

    pub fn contains(&self, t: &[u32]) -> bool {
        self.position(t).is_some()
    }

    fn position(&self, t: &[u32]) -> Option<usize> {
        if t.len() != self.arity {
            return None;
        }
        let (mut lo, mut hi) = (0, self.len());
        while lo < hi {
            let mid = (lo + hi) / 2;
            match self.tuple(mid).cmp(t) {
                std::cmp::Ordering::Less => lo = mid + 1,
                std::cmp::Ordering::Greater => hi = mid,
                std::cmp::Ordering::Equal => return Some(mid),
            }
        }
        None
    }

    /// Row `index` (1-based) of the matrix view.
    pub fn row(&self, index: usize) -> Result<Vec<u32>> {
        if index == 0 || index > self.arity {
            return Err(Error::IndexOutOfRange {
                index,
                max: self.arity,
            });
        }
        Ok(self.tuples().map(|t| t[index - 1]).collect())
    }

    /// All rows of the matrix view.
    pub fn matrix(&self) -> Vec<Vec<u32>> {
        (1..=self.arity)
            .map(|i| self.row(i).expect("row index in range"))
            .collect()
    }

    pub fn union(&self, other: &Relation) -> Result<Relation> {
        self.domain.same_as(other.domain)?;
        if self.arity != other.arity {
            return Err(Error::ArityMismatch {
                expected: self.arity,
                got: other.arity,
            });
        }
        Relation::new(self.domain, self.arity, self.tuples().chain(other.tuples()))
    }

    /// `self ∖ {t}`.
    pub fn without(&self, t: &[u32]) -> Relation {
        let mut out = self.clone();
        if let Some(pos) = self.position(t) {
            out.data.drain(pos * self.arity..(pos + 1) * self.arity);
        }
        out
    }

    /// `self ∪ {t}`.
    pub fn with(&self, t: &[u32]) -> Result<Relation> {
        Relation::new(
            self.domain,
            self.arity,
            self.tuples().chain(std::iter::once(t)),
        )
    }

    pub fn is_subset(&self, other: &Relation) -> bool {
        self.domain == other.domain
            && self.arity == other.arity
            && self.tuples().all(|t| other.contains(t))
    }
}

/// Fast membership and accumulation set over `A^l`.
#[derive(Clone, Debug)]
pub(crate) enum TupleSet {
    Dense { bits: FixedBitSet, n: u32 },
    Sparse(HashSet<Vec<u32>>),
}

const DENSE_LIMIT: u64 = 1 << 22;

impl TupleSet {
    pub(crate) fn with_shape(domain: Domain, arity: usize) -> Self {
        match domain.tuple_count(arity) {
            Some(len) if len <= DENSE_LIMIT => TupleSet::Dense {
                bits: FixedBitSet::with_capacity(len as usize),
                n: domain.size(),
            },
            _ => TupleSet::Sparse(HashSet::new()),
        }
    }

    pub(crate) fn of(rel: &Relation) -> Self {
        let mut set = Self::with_shape(rel.domain, rel.arity);
        for t in rel.tuples() {
            set.insert(t);
        }
        set
    }

    #[inline]
    pub(crate) fn contains(&self, t: &[u32]) -> bool {
        match self {
            TupleSet::Dense { bits, n } => bits.contains(encode(t, *n) as usize),
            TupleSet::Sparse(set) => set.contains(t),
        }
    }

    #[inline]
    pub(crate) fn insert(&mut self, t: &[u32]) {
        match self {
            TupleSet::Dense { bits, n } => bits.insert(encode(t, *n) as usize),
            TupleSet::Sparse(set) => {
                if !set.contains(t) {
                    set.insert(t.to_vec());
                }
            }
        }
    }

    fn merge(mut self, other: TupleSet) -> TupleSet {
        match (&mut self, other) {
            (TupleSet::Dense { bits, .. }, TupleSet::Dense { bits: b, .. }) => bits.union_with(&b),
            (TupleSet::Sparse(a), TupleSet::Sparse(b)) => a.extend(b),
            _ => unreachable!("tuple sets of one scan share a shape"),
        }
        self
    }

    fn into_relation(self, domain: Domain, arity: usize) -> Result<Relation> {
        match self {
            TupleSet::Dense { bits, n } => Relation::new(
                domain,
                arity,
                bits.ones()
                    .map(|i| crate::algebra::decode(i as u64, n, arity)),
            ),
            TupleSet::Sparse(set) => Relation::new(domain, arity, set),
        }
    }
}

/// A column selection `r_1, …, r_d` from a relation and the column the
/// operation produces from it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counterexample {
    pub selection: Vec<Vec<u32>>,
    pub output: Vec<u32>,
}

impl Counterexample {
    /// Recomputes the output column by evaluating `op` row by row.
    pub fn replay(&self, op: &Operation) -> Result<Vec<u32>> {
        apply_to_columns(op, &self.selection)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Preservation {
    Preserved,
    Violated(Counterexample),
}

impl Preservation {
    pub fn holds(&self) -> bool {
        matches!(self, Preservation::Preserved)
    }

    pub fn counterexample(&self) -> Option<&Counterexample> {
        match self {
            Preservation::Preserved => None,
            Preservation::Violated(c) => Some(c),
        }
    }
}

/// Applies `op` coordinate-wise to the columns `selection`.
pub fn apply_to_columns<T: AsRef<[u32]>>(op: &Operation, selection: &[T]) -> Result<Vec<u32>> {
    if selection.len() != op.arity() {
        return Err(Error::ArityMismatch {
            expected: op.arity(),
            got: selection.len(),
        });
    }
    let l = selection.first().map_or(0, |c| c.as_ref().len());
    let mut args = vec![0; op.arity()];
    (0..l)
        .map(|i| {
            for (slot, col) in args.iter_mut().zip(selection) {
                let col = col.as_ref();
                if col.len() != l {
                    return Err(Error::ArityMismatch {
                        expected: l,
                        got: col.len(),
                    });
                }
                *slot = col[i];
            }
            op.evaluate(&args)
        })
        .collect()
}

/// Row-parallel enumeration of `rel^arity`, split into chunks by a fixed
/// prefix of the selection so chunks can run on separate workers.
struct SelectionScan<'a> {
    op: &'a Operation,
    rel: &'a Relation,
    prefix: usize,
}

impl<'a> SelectionScan<'a> {
    fn new(op: &'a Operation, rel: &'a Relation) -> Self {
        let m = rel.len() as u64;
        let d = op.arity();
        let mut prefix = 0;
        let mut chunks = 1u64;
        while prefix < d && chunks < 1024 {
            chunks = chunks.saturating_mul(m.max(1));
            prefix += 1;
        }
        Self { op, rel, prefix }
    }

    fn chunk_count(&self) -> u64 {
        (self.rel.len() as u64).pow(self.prefix as u32)
    }

    /// Visits every selection in chunk `chunk`, in lexicographic order of
    /// tuple indices. `visit` returns `false` to stop early.
    fn run_chunk(&self, chunk: u64, mut visit: impl FnMut(&[usize], &[u32]) -> bool) {
        let m = self.rel.len();
        let d = self.op.arity();
        let l = self.rel.arity();
        let mut idx = vec![0usize; d];
        let mut rest = chunk;
        for j in (0..self.prefix).rev() {
            idx[j] = (rest % m as u64) as usize;
            rest /= m as u64;
        }
        // args[i*d + j] = coordinate i of the j-th selected tuple
        let mut args = vec![0u32; l * d];
        for (j, &t) in idx.iter().enumerate() {
            let tuple = self.rel.tuple(t);
            for i in 0..l {
                args[i * d + j] = tuple[i];
            }
        }
        let mut out = vec![0u32; l];
        loop {
            for i in 0..l {
                out[i] = self.op.eval(&args[i * d..(i + 1) * d]);
            }
            if !visit(&idx, &out) {
                return;
            }
            let mut j = d;
            loop {
                if j == self.prefix {
                    return;
                }
                j -= 1;
                idx[j] += 1;
                if idx[j] == m {
                    idx[j] = 0;
                }
                let tuple = self.rel.tuple(idx[j]);
                for i in 0..l {
                    args[i * d + j] = tuple[i];
                }
                if idx[j] != 0 {
                    break;
                }
            }
        }
    }

    fn counterexample(&self, idx: &[usize], out: &[u32]) -> Counterexample {
        Counterexample {
            selection: idx.iter().map(|&t| self.rel.tuple(t).to_vec()).collect(),
            output: out.to_vec(),
        }
    }
}

fn check_shared_domain(op: &Operation, rel: &Relation) -> Result<()> {
    op.domain().same_as(rel.domain())
}

/// `f(ρ)` by full enumeration of the `|ρ|^arity` column selections.
pub fn image(op: &Operation, rel: &Relation, budget: Budget) -> Result<Relation> {
    check_shared_domain(op, rel)?;
    if rel.is_empty() {
        return Relation::empty(rel.domain(), rel.arity());
    }
    budget.admit(rel.len(), op.arity())?;
    let scan = SelectionScan::new(op, rel);
    let shape = TupleSet::with_shape(rel.domain(), rel.arity());
    let set = (0..scan.chunk_count())
        .into_par_iter()
        .fold(
            || shape.clone(),
            |mut acc, chunk| {
                scan.run_chunk(chunk, |_, out| {
                    acc.insert(out);
                    true
                });
                acc
            },
        )
        .reduce(|| shape.clone(), TupleSet::merge);
    set.into_relation(rel.domain(), rel.arity())
}

/// Whether `f(ρ) ⊆ ρ`. On failure the counterexample is the first violating
/// selection in lexicographic order of tuple indices, so results are
/// reproducible regardless of worker count.
pub fn preserves(op: &Operation, rel: &Relation, budget: Budget) -> Result<Preservation> {
    check_shared_domain(op, rel)?;
    if rel.is_empty() {
        return Ok(Preservation::Preserved);
    }
    budget.admit(rel.len(), op.arity())?;
    let scan = SelectionScan::new(op, rel);
    let members = TupleSet::of(rel);
    let first = (0..scan.chunk_count())
        .into_par_iter()
        .find_map_first(|chunk| {
            let mut hit = None;
            scan.run_chunk(chunk, |idx, out| {
                if members.contains(out) {
                    true
                } else {
                    hit = Some(scan.counterexample(idx, out));
                    false
                }
            });
            hit
        });
    Ok(match first {
        Some(c) => Preservation::Violated(c),
        None => Preservation::Preserved,
    })
}
