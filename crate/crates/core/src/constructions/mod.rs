//! Parametric witness constructions for the two lower-bound families.
//!
//! * `thm2` (n ≥ 4, ternary g): σ is the union of `x·I^(2)` for
//!   `x = 1..n−1` plus `(2,1)` and `(1,2)`; ρ = σ ∪ {(0,0)}; k = 2n.
//! * `thm3` (n ≥ 3, d ≥ 3, (d+1)-ary g): σ is the union of `x·I^(d)` for
//!   `x = 1..n−2`; ρ = σ ∪ ({0,n−1}^d ∖ {(n−1,…,n−1)}); k = d(n−2).
//!
//! In both, f is the k-ary indicator of "the argument vector is a row of
//! σ's matrix" with values {0, n−1}, and g returns the prevailing value on
//! near-unanimous tuples, otherwise 0 when some argument is 0 and the
//! maximum argument when none is.

mod indicator;
pub mod mutations;

use serde::{Deserialize, Serialize};

use crate::algebra::{Domain, Kernel, Operation, RuleId, RuleParams, RuleSpec};
use crate::error::{Error, Result};
use crate::relations::{Preservation, Relation};

pub use indicator::{indicator_image, indicator_preserves_op, MAX_INDICATOR_ARITY};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConstructionKind {
    Thm2,
    Thm3,
    /// Anything assembled by hand, including mutated bundles.
    Custom,
}

/// σ, ρ, f, g and the parameters of one instance.
#[derive(Clone, Debug)]
pub struct ConstructionBundle {
    pub kind: ConstructionKind,
    pub n: u32,
    /// g has arity `d + 1`.
    pub d: u32,
    /// The claimed bound; f has arity `k`.
    pub k: usize,
    pub sigma: Relation,
    pub rho: Relation,
    pub f: Operation,
    pub g: Operation,
}

impl ConstructionBundle {
    pub fn domain(&self) -> Domain {
        self.rho.domain()
    }

    /// `ρ ∖ {t}` for each `t ∈ σ`, in σ's canonical order.
    pub fn rho_minus_each_t(&self) -> impl Iterator<Item = (Vec<u32>, Relation)> + '_ {
        self.sigma
            .tuples()
            .map(|t| (t.to_vec(), self.rho.without(t)))
    }
}

fn thm2_sigma(n: u32) -> Result<Relation> {
    check_thm2(n)?;
    let domain = Domain::new(n)?;
    let mut tuples = vec![vec![2, 1], vec![1, 2]];
    for x in 1..n {
        tuples.extend(Relation::scaled_identity(domain, x, 2)?.to_vecs());
    }
    Relation::new(domain, 2, tuples)
}

fn thm3_sigma(n: u32, d: u32) -> Result<Relation> {
    check_thm3(n, d)?;
    let domain = Domain::new(n)?;
    let mut tuples = Vec::new();
    for x in 1..n - 1 {
        tuples.extend(Relation::scaled_identity(domain, x, d as usize)?.to_vecs());
    }
    Relation::new(domain, d as usize, tuples)
}

fn check_thm2(n: u32) -> Result<()> {
    if n < 4 {
        return Err(Error::InvalidParameter(format!(
            "thm2 requires n >= 4, got n = {n}"
        )));
    }
    Ok(())
}

fn check_thm3(n: u32, d: u32) -> Result<()> {
    if n < 3 || d < 3 {
        return Err(Error::InvalidParameter(format!(
            "thm3 requires n >= 3 and d >= 3, got n = {n}, d = {d}"
        )));
    }
    Ok(())
}

fn indicator_of(sigma: &Relation, name: RuleId, d: Option<u32>) -> Operation {
    let domain = sigma.domain();
    let mut rows = sigma.matrix();
    rows.sort();
    rows.dedup();
    let spec = RuleSpec {
        name,
        params: RuleParams {
            n: domain.size(),
            d,
        },
    };
    let high = domain.size() - 1;
    Operation::from_rule(
        domain,
        sigma.len(),
        spec,
        Kernel::RowIndicator { rows, high },
    )
}

fn nu_rule(name: RuleId, n: u32, d: u32) -> Result<Operation> {
    let params = RuleParams {
        n,
        d: (name == RuleId::Thm3G).then_some(d),
    };
    Ok(Operation::from_rule(
        Domain::new(n)?,
        d as usize + 1,
        RuleSpec { name, params },
        Kernel::NuElseZeroOrMax,
    ))
}

/// Resolves a rule descriptor to its operation.
pub fn rule_operation(spec: &RuleSpec) -> Result<Operation> {
    let n = spec.params.n;
    let need_d = || {
        spec.params
            .d
            .ok_or_else(|| Error::InvalidParameter(format!("rule {} needs parameter d", spec.name)))
    };
    match spec.name {
        RuleId::Thm2F => Ok(indicator_of(&thm2_sigma(n)?, RuleId::Thm2F, None)),
        RuleId::Thm2G => {
            check_thm2(n)?;
            nu_rule(RuleId::Thm2G, n, 2)
        }
        RuleId::Thm3F => {
            let d = need_d()?;
            Ok(indicator_of(&thm3_sigma(n, d)?, RuleId::Thm3F, Some(d)))
        }
        RuleId::Thm3G => {
            let d = need_d()?;
            check_thm3(n, d)?;
            nu_rule(RuleId::Thm3G, n, d)
        }
    }
}

pub fn build_thm2(n: u32) -> Result<ConstructionBundle> {
    let sigma = thm2_sigma(n)?;
    let rho = sigma.with(&[0, 0])?;
    let f = indicator_of(&sigma, RuleId::Thm2F, None);
    let g = nu_rule(RuleId::Thm2G, n, 2)?;
    Ok(ConstructionBundle {
        kind: ConstructionKind::Thm2,
        n,
        d: 2,
        k: 2 * n as usize,
        sigma,
        rho,
        f,
        g,
    })
}

pub fn build_thm3(n: u32, d: u32) -> Result<ConstructionBundle> {
    let sigma = thm3_sigma(n, d)?;
    let domain = sigma.domain();
    let l = d as usize;
    let high = n - 1;
    let corners = (0u64..1 << l)
        .map(|bits| {
            (0..l)
                .map(|i| {
                    if bits >> (l - 1 - i) & 1 == 1 {
                        high
                    } else {
                        0
                    }
                })
                .collect::<Vec<u32>>()
        })
        .filter(|t| t.iter().any(|&x| x != high));
    let rho = sigma.union(&Relation::new(domain, l, corners)?)?;
    let f = indicator_of(&sigma, RuleId::Thm3F, Some(d));
    let g = nu_rule(RuleId::Thm3G, n, d)?;
    Ok(ConstructionBundle {
        kind: ConstructionKind::Thm3,
        n,
        d,
        k: (d * (n - 2)) as usize,
        sigma,
        rho,
        f,
        g,
    })
}

/// Decides `bundle.f ▷ rel` for `rel ⊆ bundle.ρ` without enumerating the
/// `|rel|^k` column selections.
pub fn indicator_preserves(bundle: &ConstructionBundle, rel: &Relation) -> Result<Preservation> {
    if !rel.is_subset(&bundle.rho) {
        return Err(Error::NotSubrelation);
    }
    indicator_preserves_op(&bundle.f, rel)
}
