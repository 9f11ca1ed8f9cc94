//! Plain-text renderings. Informational only; exit codes carry the verdict.

use std::fmt::Write;

use clone_forge::closure::{ClosureSet, LambdaVerdict};
use clone_forge::witness::{Certificate, PreservationCheck, Verdict};
use clone_forge::{Preservation, Relation};

fn verdict(v: Verdict) -> &'static str {
    match v {
        Verdict::Pass => "pass",
        Verdict::Fail => "FAIL",
        Verdict::Inconclusive => "inconclusive",
    }
}

fn per_t_summary(checks: &[PreservationCheck]) -> String {
    let ok = checks.iter().filter(|c| c.verdict == Verdict::Pass).count();
    let checker = checks
        .first()
        .map(|c| format!("{:?}", c.checker).to_lowercase())
        .unwrap_or_default();
    format!("{ok}/{} removals preserved via {checker}", checks.len())
}

pub fn certificate(cert: &Certificate) -> String {
    let mut s = String::new();
    let p = &cert.params;
    let c1 = &cert.condition1;
    let c2 = &cert.condition2;
    let c3 = &cert.condition3;
    let _ = writeln!(
        s,
        "construction {:?}: n = {}, d = {}, k = {}",
        cert.construction, p.n, p.d, p.k
    );
    let _ = writeln!(
        s,
        "condition 1: {} (|sigma| = {}, k = {}, sigma in rho: {})",
        verdict(c1.verdict),
        c1.sigma_size,
        c1.k,
        c1.sigma_subset_of_rho
    );
    let f_rho = match &c2.f_violates_rho.counterexample {
        Some(c) => format!(
            "f moves rho to {:?} via {:?}",
            c.output, c2.f_violates_rho.checker
        )
        .to_lowercase(),
        None => match &c2.f_violates_rho.reason {
            Some(r) => r.clone(),
            None => "f preserves rho".into(),
        },
    };
    let _ = writeln!(
        s,
        "condition 2: {} ({f_rho}; {})",
        verdict(c2.verdict),
        per_t_summary(&c2.per_t)
    );
    let _ = writeln!(
        s,
        "condition 3: {} (arity {}/{}, conservative {}, near-unanimity {}; {})",
        verdict(c3.verdict),
        c3.arity,
        c3.expected_arity,
        verdict(c3.conservative.verdict),
        verdict(c3.near_unanimity.verdict),
        per_t_summary(&c3.per_t)
    );
    for check in cert.preservation_checks() {
        if check.verdict != Verdict::Pass {
            let _ = writeln!(
                s,
                "  removed {:?}: {} {}",
                check.removed,
                verdict(check.verdict),
                check
                    .counterexample
                    .as_ref()
                    .map(|c| format!("selection {:?} -> {:?}", c.selection, c.output))
                    .or_else(|| check.reason.clone())
                    .unwrap_or_default()
            );
        }
    }
    let _ = writeln!(s, "status: {:?}", cert.status);
    if let Some(b) = &cert.implied_bound {
        let _ = writeln!(s, "bound: {} (lower bound)", b.statement);
    }
    for note in &cert.notes {
        let _ = writeln!(s, "note: {note}");
    }
    let _ = write!(s, "time: {:.1} ms", cert.timings.total_ms);
    s
}

pub fn preservation(p: &Preservation) -> String {
    match p {
        Preservation::Preserved => "preserved: true".into(),
        Preservation::Violated(c) => format!(
            "preserved: false\nselection: {:?}\noutput: {:?}",
            c.selection, c.output
        ),
    }
}

pub fn relation(rel: &Relation) -> String {
    let mut s = format!("{} tuples of arity {}", rel.len(), rel.arity());
    for t in rel.tuples() {
        let _ = write!(s, "\n{t:?}");
    }
    s
}

pub fn closure(set: &ClosureSet) -> String {
    let mut s = format!("{} members at arity {}", set.len(), set.target_arity);
    for t in set.tables() {
        let _ = write!(s, "\n{t:?}");
    }
    s
}

pub fn lambda(v: &LambdaVerdict) -> String {
    match v.candidate_k {
        Some(k) => format!(
            "candidate_k: {k} (regenerates every part up to arity {})\ndefinitive lower bound: {}",
            v.checked_arity_cap, v.definitive_lower
        ),
        None => format!(
            "candidate_k: undetermined up to arity {}\ndefinitive lower bound: {}",
            v.checked_arity_cap, v.definitive_lower
        ),
    }
}
