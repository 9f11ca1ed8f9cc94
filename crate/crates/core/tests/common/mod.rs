#![allow(dead_code)]

use std::collections::BTreeSet;

use clone_forge::{Domain, Operation, Relation};
use rand::Rng;

pub fn random_op(rng: &mut impl Rng, n: u32, arity: usize) -> Operation {
    let d = Domain::new(n).unwrap();
    let len = (n as usize).pow(arity as u32);
    let table = (0..len).map(|_| rng.gen_range(0..n)).collect();
    Operation::from_table(d, arity, table).unwrap()
}

pub fn random_relation(rng: &mut impl Rng, n: u32, arity: usize, max_len: usize) -> Relation {
    let d = Domain::new(n).unwrap();
    let len = rng.gen_range(0..=max_len);
    let tuples: Vec<Vec<u32>> = (0..len)
        .map(|_| (0..arity).map(|_| rng.gen_range(0..n)).collect())
        .collect();
    Relation::new(d, arity, tuples).unwrap()
}

/// Applies `op` row-wise to every selection of columns from `tuples`.
fn apply_all(op: &Operation, tuples: &[Vec<u32>], out: &mut BTreeSet<Vec<u32>>) {
    let k = op.arity();
    let l = tuples.first().map_or(0, Vec::len);
    let m = tuples.len();
    if m == 0 {
        return;
    }
    let mut idx = vec![0usize; k];
    loop {
        let col: Vec<u32> = (0..l)
            .map(|i| {
                let args: Vec<u32> = idx.iter().map(|&j| tuples[j][i]).collect();
                op.evaluate(&args).unwrap()
            })
            .collect();
        out.insert(col);
        let mut p = k;
        loop {
            if p == 0 {
                return;
            }
            p -= 1;
            idx[p] += 1;
            if idx[p] < m {
                break;
            }
            idx[p] = 0;
        }
    }
}

/// The smallest relation containing `seed` that every op preserves, by
/// brute-force iteration to a fixpoint. Preserved by construction.
pub fn subuniverse(ops: &[Operation], seed: &Relation) -> Relation {
    let mut current: BTreeSet<Vec<u32>> = seed.to_vecs().into_iter().collect();
    loop {
        let tuples: Vec<Vec<u32>> = current.iter().cloned().collect();
        let mut next = current.clone();
        for op in ops {
            apply_all(op, &tuples, &mut next);
        }
        if next.len() == current.len() {
            return Relation::new(seed.domain(), seed.arity(), current).unwrap();
        }
        current = next;
    }
}

/// Reference closure: apply every generator to every tuple of the current
/// set until stable. No frontier bookkeeping, no parallelism.
pub fn oracle_closure(n: u32, generators: &[Operation], m: usize) -> BTreeSet<Vec<u32>> {
    let d = Domain::new(n).unwrap();
    let mut set: BTreeSet<Vec<u32>> = (1..=m)
        .map(|i| Operation::projection(d, m, i).unwrap().to_table().unwrap())
        .collect();
    let len = (n as usize).pow(m as u32);
    loop {
        let members: Vec<Vec<u32>> = set.iter().cloned().collect();
        let mut next = set.clone();
        for g in generators {
            let k = g.arity();
            let mut idx = vec![0usize; k];
            let mut args = vec![0u32; k];
            'outer: loop {
                let table: Vec<u32> = (0..len)
                    .map(|x| {
                        for (a, &j) in args.iter_mut().zip(&idx) {
                            *a = members[j][x];
                        }
                        g.evaluate(&args).unwrap()
                    })
                    .collect();
                next.insert(table);
                let mut p = k;
                loop {
                    if p == 0 {
                        break 'outer;
                    }
                    p -= 1;
                    idx[p] += 1;
                    if idx[p] < members.len() {
                        break;
                    }
                    idx[p] = 0;
                }
            }
        }
        if next.len() == set.len() {
            return set;
        }
        set = next;
    }
}
