//! Finite clone algebra with certificate checking for lower bounds on the
//! generating arity of clones with a conservative near-unanimity operation.
//!
//! * [`algebra`]: domains, operations, composition, nu/conservativity/
//!   essential-variable predicates.
//! * [`relations`]: relations, images `f(ρ)`, preservation `f ▷ ρ`.
//! * [`constructions`]: the two parametric witness families and the
//!   row-indicator fast path.
//! * [`witness`]: premise checks and [`witness::Certificate`].
//! * [`closure`]: bounded clone closure and λ evidence.
//! * [`format`]: JSON documents.

pub mod algebra;
pub mod closure;
pub mod constructions;
pub mod error;
pub mod format;
pub mod relations;
pub mod witness;

pub use algebra::{maj_of_near_unanimous, Domain, Operation, RuleId, RuleSpec};
pub use closure::{
    close_at_arity, lambda_bounded, member, ClosureLimits, ClosureSet, LambdaVerdict,
};
pub use constructions::{build_thm2, build_thm3, indicator_preserves, ConstructionBundle};
pub use error::{Error, Result};
pub use relations::{image, preserves, Budget, Counterexample, Preservation, Relation};
pub use witness::{certify, Certificate, CheckMode, Status, Verdict, VerifyConfig};
