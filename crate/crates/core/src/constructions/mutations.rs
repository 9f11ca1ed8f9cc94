//! Scripted corruptions of a bundle, used as negative controls.

use crate::algebra::{maj_of_near_unanimous, Odometer, Operation};
use crate::error::{Error, Result};

use super::{ConstructionBundle, ConstructionKind};

/// Tabulates g and redirects its first non-near-unanimous input whose
/// arguments miss some domain value to the smallest missing value.
/// Returns the bundle and the mutated input.
pub fn non_conservative_g(bundle: &ConstructionBundle) -> Result<(ConstructionBundle, Vec<u32>)> {
    let g = &bundle.g;
    let n = g.domain().size();
    let mut table = g.to_table()?;
    let mut odo = Odometer::new(n, g.arity());
    let mut index = 0usize;
    while let Some(args) = odo.next() {
        if maj_of_near_unanimous(args).is_none() {
            if let Some(missing) = (0..n).find(|v| !args.contains(v)) {
                table[index] = missing;
                let input = args.to_vec();
                let mut out = bundle.clone();
                out.kind = ConstructionKind::Custom;
                out.g = Operation::from_table(g.domain(), g.arity(), table)?;
                return Ok((out, input));
            }
        }
        index += 1;
    }
    Err(Error::InvalidParameter(
        "g has no input that can be made non-conservative".into(),
    ))
}

/// Removes the last element of σ (canonical order). Returns the bundle and
/// the removed tuple.
pub fn drop_sigma_element(bundle: &ConstructionBundle) -> Result<(ConstructionBundle, Vec<u32>)> {
    let last = bundle
        .sigma
        .tuples()
        .last()
        .ok_or_else(|| Error::InvalidParameter("sigma is empty".into()))?
        .to_vec();
    let mut out = bundle.clone();
    out.kind = ConstructionKind::Custom;
    out.sigma = bundle.sigma.without(&last);
    Ok((out, last))
}

/// Adds the all-`(n−1)` tuple to ρ.
pub fn augment_rho_with_top(bundle: &ConstructionBundle) -> Result<(ConstructionBundle, Vec<u32>)> {
    let top = vec![bundle.domain().size() - 1; bundle.rho.arity()];
    let mut out = bundle.clone();
    out.kind = ConstructionKind::Custom;
    out.rho = bundle.rho.with(&top)?;
    Ok((out, top))
}
