//! Exact m-ary part of a generated clone, by fixpoint over operation tables.
//!
//! Start from the m-ary projections and keep applying every generator to
//! tuples of current members until nothing new appears. Every m-ary term
//! over the generators evaluates node by node to a member of this set, so
//! the fixpoint is exactly `Clo(F)^(m)`.

use indexmap::IndexSet;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::{Domain, Operation};
use crate::error::{Error, Result};

/// Explicit caps for the fixpoint; exceeding any is "undetermined".
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ClosureLimits {
    pub max_members: usize,
    pub max_applications: u64,
    /// Largest `n^m` (entries per member table).
    pub max_table_len: u64,
}

impl Default for ClosureLimits {
    fn default() -> Self {
        Self {
            max_members: 2_000_000,
            max_applications: 1_000_000_000,
            max_table_len: 1 << 12,
        }
    }
}

/// The m-ary members of `Clo(generators)`, sorted by table.
#[derive(Clone, Debug)]
pub struct ClosureSet {
    pub domain: Domain,
    pub target_arity: usize,
    pub generators: Vec<Operation>,
    members: IndexSet<Box<[u32]>>,
}

impl ClosureSet {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains_table(&self, table: &[u32]) -> bool {
        self.members.contains(table)
    }

    pub fn contains(&self, op: &Operation) -> bool {
        op.domain() == self.domain
            && op.arity() == self.target_arity
            && op.to_table().is_ok_and(|t| self.contains_table(&t))
    }

    pub fn tables(&self) -> impl Iterator<Item = &[u32]> {
        self.members.iter().map(|t| &**t)
    }

    pub fn operations(&self) -> impl Iterator<Item = Operation> + '_ {
        self.tables().map(|t| {
            Operation::from_table(self.domain, self.target_arity, t.to_vec())
                .expect("members are valid tables")
        })
    }

    /// Same member set (generators are not compared).
    pub fn same_members(&self, other: &ClosureSet) -> bool {
        self.domain == other.domain
            && self.target_arity == other.target_arity
            && self.members.len() == other.members.len()
            && self.members.iter().all(|t| other.members.contains(t))
    }
}

fn guard(msg: String) -> Error {
    Error::ClosureGuard(msg)
}

/// `Clo(generators)^(m)` on `domain`.
pub fn close_at_arity(
    domain: Domain,
    generators: &[Operation],
    m: usize,
    limits: &ClosureLimits,
) -> Result<ClosureSet> {
    if m == 0 {
        return Err(Error::ZeroArity);
    }
    let len = domain
        .tuple_count(m)
        .filter(|&l| l <= limits.max_table_len)
        .ok_or_else(|| {
            guard(format!(
                "member tables would have {}^{m} entries (cap {})",
                domain.size(),
                limits.max_table_len
            ))
        })? as usize;
    let mut tabulated = Vec::with_capacity(generators.len());
    for g in generators {
        domain.same_as(g.domain())?;
        tabulated.push(g.materialize()?);
    }

    // Column x of every member table is that member evaluated at input x.
    let inputs: Vec<Vec<u32>> = (0..len as u64)
        .map(|i| crate::algebra::decode(i, domain.size(), m))
        .collect();
    let mut members: IndexSet<Box<[u32]>> = IndexSet::new();
    for i in 0..m {
        members.insert(inputs.iter().map(|x| x[i]).collect());
    }

    let mut frontier = 0;
    let mut applications = 0u64;
    while frontier < members.len() {
        let total = members.len();
        let mut round: Vec<Box<[u32]>> = Vec::new();
        for g in &tabulated {
            let k = g.arity() as u32;
            let new_tuples = (total as u64)
                .checked_pow(k)
                .and_then(|all| all.checked_sub((frontier as u64).pow(k)))
                .ok_or_else(|| guard("application count overflow".into()))?;
            applications = applications.saturating_add(new_tuples);
            if applications > limits.max_applications {
                return Err(guard(format!(
                    "more than {} generator applications",
                    limits.max_applications
                )));
            }
            round.extend(apply_round(g, &members, frontier, len));
        }
        frontier = total;
        for t in round {
            members.insert(t);
        }
        if members.len() > limits.max_members {
            return Err(guard(format!("more than {} members", limits.max_members)));
        }
    }
    members.sort_unstable();
    Ok(ClosureSet {
        domain,
        target_arity: m,
        generators: generators.to_vec(),
        members,
    })
}

/// Applies `g` to every tuple of members with at least one index at or past
/// `frontier`, returning the tables not already present.
fn apply_round(
    g: &Operation,
    members: &IndexSet<Box<[u32]>>,
    frontier: usize,
    len: usize,
) -> Vec<Box<[u32]>> {
    let k = g.arity();
    let total = members.len();
    let table = g.as_table().expect("generators are tabulated");
    let n = u64::from(g.domain().size());
    (0..total)
        .into_par_iter()
        .fold(IndexSet::<Box<[u32]>>::new, |mut found, first| {
            let mut idx = vec![0usize; k];
            idx[0] = first;
            let mut scratch = vec![0u32; len];
            enumerate_rest(
                &mut idx,
                1,
                first >= frontier,
                frontier,
                total,
                &mut |idx| {
                    for (x, slot) in scratch.iter_mut().enumerate() {
                        let code = idx
                            .iter()
                            .fold(0u64, |acc, &j| acc * n + u64::from(members[j][x]));
                        *slot = table[code as usize];
                    }
                    if !members.contains(&*scratch) && !found.contains(&*scratch) {
                        found.insert(scratch.clone().into_boxed_slice());
                    }
                },
            );
            found
        })
        .map(|s| s.into_iter().collect::<Vec<_>>())
        .reduce(Vec::new, |mut a, b| {
            a.extend(b);
            a
        })
}

fn enumerate_rest(
    idx: &mut [usize],
    at: usize,
    has_new: bool,
    frontier: usize,
    total: usize,
    visit: &mut impl FnMut(&[usize]),
) {
    if at == idx.len() {
        if has_new {
            visit(idx);
        }
        return;
    }
    // The last slot must supply a new member if none came earlier.
    let lo = if at + 1 == idx.len() && !has_new {
        frontier
    } else {
        0
    };
    for j in lo..total {
        idx[at] = j;
        enumerate_rest(
            idx,
            at + 1,
            has_new || j >= frontier,
            frontier,
            total,
            visit,
        );
    }
}

/// Whether the m-ary `op` lies in `Clo(generators)`.
pub fn member(op: &Operation, generators: &[Operation], limits: &ClosureLimits) -> Result<bool> {
    let closure = close_at_arity(op.domain(), generators, op.arity(), limits)?;
    Ok(closure.contains(op))
}

/// Bounded evidence about `λ(C)` for `C = Clo(generators)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LambdaVerdict {
    /// Least `k ≤ checked_arity_cap` whose k-ary part regenerates every
    /// `C^(j)` with `j ≤ checked_arity_cap`. An upper bound only as far as
    /// the cap can see.
    pub candidate_k: Option<usize>,
    /// `λ(C) ≥ definitive_lower` holds unconditionally: every smaller `k`
    /// failed to regenerate some `C^(j)`.
    pub definitive_lower: usize,
    pub checked_arity_cap: usize,
}

pub fn lambda_bounded(
    domain: Domain,
    generators: &[Operation],
    m_max: usize,
    limits: &ClosureLimits,
) -> Result<LambdaVerdict> {
    if m_max == 0 {
        return Err(Error::ZeroArity);
    }
    let parts: Vec<ClosureSet> = (1..=m_max)
        .map(|j| close_at_arity(domain, generators, j, limits))
        .collect::<Result<_>>()?;
    for k in 1..=m_max {
        let gens: Vec<Operation> = parts[k - 1].operations().collect();
        let mut reproduces = true;
        for (j, part) in parts.iter().enumerate() {
            if !close_at_arity(domain, &gens, j + 1, limits)?.same_members(part) {
                reproduces = false;
                break;
            }
        }
        if reproduces {
            return Ok(LambdaVerdict {
                candidate_k: Some(k),
                definitive_lower: k,
                checked_arity_cap: m_max,
            });
        }
    }
    Ok(LambdaVerdict {
        candidate_k: None,
        definitive_lower: m_max + 1,
        checked_arity_cap: m_max,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bool_domain() -> Domain {
        Domain::new(2).unwrap()
    }

    fn maj() -> Operation {
        Operation::from_fn(bool_domain(), 3, |x| u32::from(x.iter().sum::<u32>() >= 2)).unwrap()
    }

    #[test]
    fn empty_generators_give_projections() {
        let c = close_at_arity(bool_domain(), &[], 3, &ClosureLimits::default()).unwrap();
        assert_eq!(c.len(), 3);
        for i in 1..=3 {
            assert!(c.contains(&Operation::projection(bool_domain(), 3, i).unwrap()));
        }
    }

    #[test]
    fn maj_binary_part_is_projections() {
        let c = close_at_arity(bool_domain(), &[maj()], 2, &ClosureLimits::default()).unwrap();
        assert_eq!(c.len(), 2);
    }

    #[test]
    fn maj_ternary_part_contains_maj() {
        let c = close_at_arity(bool_domain(), &[maj()], 3, &ClosureLimits::default()).unwrap();
        assert!(c.contains(&maj()));
    }

    #[test]
    fn membership() {
        let limits = ClosureLimits::default();
        let p2 = Operation::projection(bool_domain(), 2, 2).unwrap();
        assert!(member(&p2, &[maj()], &limits).unwrap());
        assert!(member(&maj(), &[maj()], &limits).unwrap());
        let not = Operation::from_fn(bool_domain(), 1, |x| 1 - x[0]).unwrap();
        assert!(!member(&not, &[maj()], &limits).unwrap());
    }

    #[test]
    fn negation_generates_both_unaries() {
        let not = Operation::from_fn(bool_domain(), 1, |x| 1 - x[0]).unwrap();
        let c = close_at_arity(bool_domain(), &[not], 1, &ClosureLimits::default()).unwrap();
        assert_eq!(c.len(), 2);
    }

    #[test]
    fn guards_trip() {
        let limits = ClosureLimits {
            max_members: 3,
            ..Default::default()
        };
        let nand = Operation::from_fn(bool_domain(), 2, |x| 1 - (x[0] & x[1])).unwrap();
        let err = close_at_arity(bool_domain(), &[nand], 2, &limits).unwrap_err();
        assert!(err.is_budget());
        let err =
            close_at_arity(Domain::new(5).unwrap(), &[], 6, &ClosureLimits::default()).unwrap_err();
        assert!(err.is_budget());
    }

    #[test]
    fn nand_generates_everything_binary() {
        let nand = Operation::from_fn(bool_domain(), 2, |x| 1 - (x[0] & x[1])).unwrap();
        let c = close_at_arity(bool_domain(), &[nand], 2, &ClosureLimits::default()).unwrap();
        assert_eq!(c.len(), 16);
    }

    #[test]
    fn lambda_of_projection_clone() {
        let p = Operation::projection(bool_domain(), 2, 1).unwrap();
        let v = lambda_bounded(bool_domain(), &[p], 3, &ClosureLimits::default()).unwrap();
        assert_eq!(v.candidate_k, Some(1));
        assert_eq!(v.definitive_lower, 1);
    }
}
