//! Machine check of the three premises that turn a bundle into a lower bound
//! `γ_d(n) ≥ k`, and the certificate recording the outcome.
//!
//! 1. `|σ| = k` and `σ ⊆ ρ`;
//! 2. `f ⋫ ρ`, but `f ▷ ρ ∖ {t}` for every `t ∈ σ`;
//! 3. `g` is a `(d+1)`-ary conservative near-unanimity operation and
//!    `g ▷ ρ ∖ {t}` for every `t ∈ σ`.
//!
//! Only the premises are verified. The step from premises to the bound is a
//! proof, not a computation, and the certificate says so.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::{Kernel, Operation};
use crate::constructions::{indicator_image, ConstructionBundle, ConstructionKind};
use crate::error::{Error, Result};
use crate::relations::{
    apply_to_columns, image, preserves, Budget, Counterexample, Preservation, Relation,
};

pub const CERTIFICATE_VERSION: &str = "cert-v1";

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckMode {
    /// Indicator fast path when f is a recognised row indicator.
    #[default]
    Auto,
    Naive,
    Indicator,
}

#[derive(Clone, Copy, Debug, Default)]
pub struct VerifyConfig {
    pub mode: CheckMode,
    pub budget: Budget,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

impl Verdict {
    fn all(verdicts: impl IntoIterator<Item = Verdict>) -> Verdict {
        let mut out = Verdict::Pass;
        for v in verdicts {
            match v {
                Verdict::Fail => return Verdict::Fail,
                Verdict::Inconclusive => out = Verdict::Inconclusive,
                Verdict::Pass => {}
            }
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Checker {
    /// Full enumeration of column selections.
    Naive,
    /// Pattern search for row-indicator operations.
    Indicator,
    /// The selection "all columns of σ in canonical order".
    Canonical,
    /// Exhaustive scan over operation inputs.
    Exhaustive,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Certified,
    Failed,
    Inconclusive,
}

/// One preservation question `op ▷ rel`, with `rel = ρ` or `ρ ∖ {t}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PreservationCheck {
    /// `t` when the relation is `ρ ∖ {t}`; absent for `ρ` itself.
    pub removed: Option<Vec<u32>>,
    pub expect_preserved: bool,
    /// `None` when the check was inconclusive.
    pub preserved: Option<bool>,
    pub verdict: Verdict,
    pub checker: Checker,
    /// Present whenever `preserved == Some(false)`.
    pub counterexample: Option<Counterexample>,
    /// The full image, when the checker produced it.
    pub image: Option<Vec<Vec<u32>>>,
    pub reason: Option<String>,
}

impl PreservationCheck {
    fn decided(
        removed: Option<Vec<u32>>,
        expect_preserved: bool,
        checker: Checker,
        outcome: Preservation,
        image: Option<Vec<Vec<u32>>>,
    ) -> Self {
        let preserved = outcome.holds();
        Self {
            removed,
            expect_preserved,
            preserved: Some(preserved),
            verdict: if preserved == expect_preserved {
                Verdict::Pass
            } else {
                Verdict::Fail
            },
            checker,
            counterexample: outcome.counterexample().cloned(),
            image,
            reason: None,
        }
    }

    fn inconclusive(
        removed: Option<Vec<u32>>,
        expect_preserved: bool,
        checker: Checker,
        err: &Error,
    ) -> Self {
        Self {
            removed,
            expect_preserved,
            preserved: None,
            verdict: Verdict::Inconclusive,
            checker,
            counterexample: None,
            image: None,
            reason: Some(err.to_string()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputWitness {
    pub input: Vec<u32>,
    pub output: u32,
}

/// A property of g decided by scanning its inputs.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputCheck {
    pub verdict: Verdict,
    pub checker: Checker,
    pub violation: Option<InputWitness>,
    pub reason: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Condition1 {
    pub verdict: Verdict,
    pub sigma_size: usize,
    pub k: usize,
    pub sigma_subset_of_rho: bool,
    pub sigma_outside_rho: Vec<Vec<u32>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Condition2 {
    pub verdict: Verdict,
    /// `f ⋫ ρ`: passes when a violating selection is found.
    pub f_violates_rho: PreservationCheck,
    /// `f ▷ ρ ∖ {t}` for each `t ∈ σ`, in σ's canonical order.
    pub per_t: Vec<PreservationCheck>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Condition3 {
    pub verdict: Verdict,
    pub expected_arity: usize,
    pub arity: usize,
    pub conservative: InputCheck,
    pub near_unanimity: InputCheck,
    /// `g ▷ ρ ∖ {t}` for each `t ∈ σ`, in σ's canonical order.
    pub per_t: Vec<PreservationCheck>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Params {
    pub n: u32,
    pub d: u32,
    pub k: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImpliedBound {
    pub n: u32,
    pub d: u32,
    pub k: usize,
    pub statement: String,
    pub basis: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub condition1_ms: f64,
    pub condition2_ms: f64,
    pub condition3_ms: f64,
    pub total_ms: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub version: String,
    pub construction: ConstructionKind,
    pub params: Params,
    pub status: Status,
    pub condition1: Condition1,
    pub condition2: Condition2,
    pub condition3: Condition3,
    /// Present iff all three conditions pass.
    pub implied_bound: Option<ImpliedBound>,
    pub notes: Vec<String>,
    pub timings: Timings,
}

impl Certificate {
    /// The certificate with timings zeroed; two runs on the same bundle
    /// compare equal after this.
    pub fn without_timings(&self) -> Certificate {
        Certificate {
            timings: Timings::default(),
            ..self.clone()
        }
    }

    pub fn verdicts(&self) -> [Verdict; 3] {
        [
            self.condition1.verdict,
            self.condition2.verdict,
            self.condition3.verdict,
        ]
    }

    /// Every recorded preservation check, in certificate order.
    pub fn preservation_checks(&self) -> impl Iterator<Item = &PreservationCheck> {
        std::iter::once(&self.condition2.f_violates_rho)
            .chain(&self.condition2.per_t)
            .chain(&self.condition3.per_t)
    }

    /// Re-evaluates every recorded counterexample and input witness against
    /// the bundle. Returns a description of the first one that does not
    /// reproduce.
    pub fn replay(&self, bundle: &ConstructionBundle) -> std::result::Result<(), String> {
        let checks = std::iter::once((&bundle.f, &self.condition2.f_violates_rho))
            .chain(self.condition2.per_t.iter().map(|c| (&bundle.f, c)))
            .chain(self.condition3.per_t.iter().map(|c| (&bundle.g, c)));
        for (op, check) in checks {
            let rel = match &check.removed {
                Some(t) => bundle.rho.without(t),
                None => bundle.rho.clone(),
            };
            if check.preserved == Some(false) && check.counterexample.is_none() {
                return Err(format!("negative verdict without witness: {check:?}"));
            }
            if let Some(c) = &check.counterexample {
                let out = c.replay(op).map_err(|e| e.to_string())?;
                if out != c.output {
                    return Err(format!("witness output mismatch: {c:?} replays to {out:?}"));
                }
                if rel.contains(&out) {
                    return Err(format!("witness output {out:?} lies inside the relation"));
                }
                if let Some(col) = c.selection.iter().find(|col| !rel.contains(col)) {
                    return Err(format!("selected column {col:?} is not in the relation"));
                }
            }
        }
        for check in [
            &self.condition3.conservative,
            &self.condition3.near_unanimity,
        ] {
            if let Some(w) = &check.violation {
                let out = bundle.g.evaluate(&w.input).map_err(|e| e.to_string())?;
                if out != w.output {
                    return Err(format!(
                        "g{:?} = {out}, certificate says {}",
                        w.input, w.output
                    ));
                }
            }
        }
        if let Some(w) = &self.condition3.conservative.violation {
            if w.input.contains(&w.output) {
                return Err(format!("conservativity witness {w:?} is not a violation"));
            }
        }
        Ok(())
    }
}

pub fn check_condition1(bundle: &ConstructionBundle) -> Condition1 {
    let outside: Vec<Vec<u32>> = bundle
        .sigma
        .tuples()
        .filter(|t| !bundle.rho.contains(t))
        .map(<[u32]>::to_vec)
        .collect();
    let subset = outside.is_empty()
        && bundle.sigma.arity() == bundle.rho.arity()
        && bundle.sigma.domain() == bundle.rho.domain();
    let size_ok = bundle.sigma.len() == bundle.k;
    Condition1 {
        verdict: if size_ok && subset {
            Verdict::Pass
        } else {
            Verdict::Fail
        },
        sigma_size: bundle.sigma.len(),
        k: bundle.k,
        sigma_subset_of_rho: subset,
        sigma_outside_rho: outside,
    }
}

fn is_indicator(op: &Operation) -> bool {
    matches!(op.kernel(), Some(Kernel::RowIndicator { .. }))
}

fn resolve_mode(mode: CheckMode, f: &Operation) -> Checker {
    match mode {
        CheckMode::Naive => Checker::Naive,
        CheckMode::Indicator => Checker::Indicator,
        CheckMode::Auto if is_indicator(f) => Checker::Indicator,
        CheckMode::Auto => Checker::Naive,
    }
}

/// One preservation check with the requested checker.
fn run_check(
    op: &Operation,
    rel: &Relation,
    removed: Option<Vec<u32>>,
    expect_preserved: bool,
    checker: Checker,
    budget: Budget,
) -> PreservationCheck {
    let outcome = match checker {
        Checker::Indicator => indicator_image(op, rel).map(|img| {
            let violation = img.iter().find(|c| !rel.contains(&c.output)).cloned();
            let columns = img.into_iter().map(|c| c.output).collect();
            (
                violation.map_or(Preservation::Preserved, Preservation::Violated),
                Some(columns),
            )
        }),
        _ => preserves(op, rel, budget).and_then(|p| {
            // f ⋫ ρ failing is only evidenced by the whole image.
            if p.holds() && !expect_preserved {
                let img = image(op, rel, budget)?;
                Ok((p, Some(img.to_vecs())))
            } else {
                Ok((p, None))
            }
        }),
    };
    match outcome {
        Ok((p, img)) => PreservationCheck::decided(removed, expect_preserved, checker, p, img),
        Err(e) => PreservationCheck::inconclusive(removed, expect_preserved, checker, &e),
    }
}

fn canonical_violation(bundle: &ConstructionBundle) -> Option<Counterexample> {
    if bundle.f.arity() != bundle.sigma.len() || !bundle.sigma.is_subset(&bundle.rho) {
        return None;
    }
    let selection = bundle.sigma.to_vecs();
    let output = apply_to_columns(&bundle.f, &selection).ok()?;
    (!bundle.rho.contains(&output)).then_some(Counterexample { selection, output })
}

pub fn check_condition2(bundle: &ConstructionBundle, config: &VerifyConfig) -> Condition2 {
    let checker = resolve_mode(config.mode, &bundle.f);
    let f_violates_rho = match canonical_violation(bundle) {
        Some(c) => PreservationCheck::decided(
            None,
            false,
            Checker::Canonical,
            Preservation::Violated(c),
            None,
        ),
        None => run_check(&bundle.f, &bundle.rho, None, false, checker, config.budget),
    };
    let cases: Vec<(Vec<u32>, Relation)> = bundle.rho_minus_each_t().collect();
    let per_t: Vec<PreservationCheck> = cases
        .into_par_iter()
        .map(|(t, rel)| run_check(&bundle.f, &rel, Some(t), true, checker, config.budget))
        .collect();
    let verdict = Verdict::all(
        std::iter::once(f_violates_rho.verdict).chain(per_t.iter().map(|c| c.verdict)),
    );
    Condition2 {
        verdict,
        f_violates_rho,
        per_t,
    }
}

fn input_check(
    g: &Operation,
    budget: Budget,
    scan: impl FnOnce(&Operation) -> Result<Option<(Vec<u32>, u32)>>,
) -> InputCheck {
    let inputs = g.table_len().unwrap_or(u64::MAX);
    if inputs > budget.max_selections {
        return InputCheck {
            verdict: Verdict::Inconclusive,
            checker: Checker::Exhaustive,
            violation: None,
            reason: Some(
                Error::BudgetExceeded {
                    needed: inputs.to_string(),
                    budget: budget.max_selections,
                }
                .to_string(),
            ),
        };
    }
    match scan(g) {
        Ok(None) => InputCheck {
            verdict: Verdict::Pass,
            checker: Checker::Exhaustive,
            violation: None,
            reason: None,
        },
        Ok(Some((input, output))) => InputCheck {
            verdict: Verdict::Fail,
            checker: Checker::Exhaustive,
            violation: Some(InputWitness { input, output }),
            reason: None,
        },
        Err(e) => InputCheck {
            verdict: if e.is_budget() {
                Verdict::Inconclusive
            } else {
                Verdict::Fail
            },
            checker: Checker::Exhaustive,
            violation: None,
            reason: Some(e.to_string()),
        },
    }
}

pub fn check_condition3(bundle: &ConstructionBundle, config: &VerifyConfig) -> Condition3 {
    let expected_arity = bundle.d as usize + 1;
    // Tabulated g is much faster in the selection scans.
    let g = bundle.g.materialize().unwrap_or_else(|_| bundle.g.clone());
    let conservative = input_check(&g, config.budget, |g| Ok(g.conservativity_violation()));
    let near_unanimity = input_check(&g, config.budget, Operation::near_unanimity_violation);
    let cases: Vec<(Vec<u32>, Relation)> = bundle.rho_minus_each_t().collect();
    let per_t: Vec<PreservationCheck> = cases
        .into_par_iter()
        .map(|(t, rel)| run_check(&g, &rel, Some(t), true, Checker::Naive, config.budget))
        .collect();
    let arity_verdict = if g.arity() == expected_arity {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    let verdict = Verdict::all(
        [arity_verdict, conservative.verdict, near_unanimity.verdict]
            .into_iter()
            .chain(per_t.iter().map(|c| c.verdict)),
    );
    Condition3 {
        verdict,
        expected_arity,
        arity: g.arity(),
        conservative,
        near_unanimity,
        per_t,
    }
}

fn bound_statement(d: u32, n: u32, k: usize) -> String {
    format!("γ_{d}({n}) ≥ {k}")
}

/// Runs all three checks and assembles the certificate.
pub fn certify(bundle: &ConstructionBundle, config: &VerifyConfig) -> Certificate {
    let start = Instant::now();
    let condition1 = check_condition1(bundle);
    let t1 = start.elapsed();
    let condition2 = check_condition2(bundle, config);
    let t2 = start.elapsed();
    let condition3 = check_condition3(bundle, config);
    let t3 = start.elapsed();

    let status = match Verdict::all([condition1.verdict, condition2.verdict, condition3.verdict]) {
        Verdict::Pass => Status::Certified,
        Verdict::Fail => Status::Failed,
        Verdict::Inconclusive => Status::Inconclusive,
    };
    let implied_bound = (status == Status::Certified).then(|| ImpliedBound {
        n: bundle.n,
        d: bundle.d,
        k: bundle.k,
        statement: bound_statement(bundle.d, bundle.n, bundle.k),
        basis: "conditions 1-3 were machine-checked; the bound follows from them because \
                every (k-1)-ary member of Clo{f, g} preserves rho while f does not. That \
                implication is trusted, not checked. Lower bound only; no upper bound is claimed."
            .into(),
    });

    let mut notes = Vec::new();
    if bundle.kind == ConstructionKind::Thm2 {
        notes.extend(thm2_image_discrepancies(bundle, &condition2));
    }
    if status == Status::Inconclusive {
        notes.push("enumeration budget exhausted; this is not a refutation".into());
    }

    let ms = |d: std::time::Duration| d.as_secs_f64() * 1e3;
    Certificate {
        version: CERTIFICATE_VERSION.into(),
        construction: bundle.kind,
        params: Params {
            n: bundle.n,
            d: bundle.d,
            k: bundle.k,
        },
        status,
        condition1,
        condition2,
        condition3,
        implied_bound,
        notes,
        timings: Timings {
            condition1_ms: ms(t1),
            condition2_ms: ms(t2 - t1),
            condition3_ms: ms(t3 - t2),
            total_ms: ms(t3),
        },
    }
}

/// For the binary family the images `f(ρ ∖ {t})` are expected to stay inside
/// `{(0,0), (n−1,0), (0,n−1)}`. The verdict never depends on this; any
/// departure is reported for study.
fn thm2_image_discrepancies(bundle: &ConstructionBundle, condition2: &Condition2) -> Vec<String> {
    let high = bundle.n - 1;
    let expected = [vec![0, 0], vec![high, 0], vec![0, high]];
    condition2
        .per_t
        .iter()
        .filter_map(|check| {
            let img = check.image.as_ref()?;
            let extra: Vec<&Vec<u32>> = img.iter().filter(|c| !expected.contains(c)).collect();
            (!extra.is_empty()).then(|| {
                format!(
                    "f(rho \\ {{{:?}}}) contains {:?}, outside {{(0,0),(n-1,0),(0,n-1)}}",
                    check.removed.as_deref().unwrap_or(&[]),
                    extra
                )
            })
        })
        .collect()
}
