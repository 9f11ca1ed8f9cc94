use std::collections::BTreeSet;

use clone_forge::algebra::Odometer;
use clone_forge::constructions::mutations::{
    augment_rho_with_top, drop_sigma_element, non_conservative_g,
};
use clone_forge::constructions::{indicator_preserves, ConstructionBundle};
use clone_forge::witness::{check_condition2, Verdict};
use clone_forge::{
    build_thm2, build_thm3, certify, preserves, Budget, CheckMode, Status, VerifyConfig,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const THM2: [u32; 5] = [4, 5, 6, 7, 8];
const THM3: [(u32, u32); 5] = [(3, 3), (4, 3), (5, 3), (3, 4), (4, 4)];

fn all_bundles() -> Vec<ConstructionBundle> {
    let mut out: Vec<_> = THM2.iter().map(|&n| build_thm2(n).unwrap()).collect();
    out.extend(THM3.iter().map(|&(n, d)| build_thm3(n, d).unwrap()));
    out
}

/// `{(x,0,…,0), (0,x,0,…), …}`: the arity-`d` tuples with a single nonzero
/// entry equal to `x`.
fn scaled_identity(x: u32, d: usize) -> Vec<Vec<u32>> {
    (0..d)
        .map(|i| (0..d).map(|j| if i == j { x } else { 0 }).collect())
        .collect()
}

fn sigma_oracle_thm2(n: u32) -> BTreeSet<Vec<u32>> {
    let mut s: BTreeSet<_> = (1..n).flat_map(|x| scaled_identity(x, 2)).collect();
    s.insert(vec![2, 1]);
    s.insert(vec![1, 2]);
    s
}

fn sigma_oracle_thm3(n: u32, d: u32) -> BTreeSet<Vec<u32>> {
    (1..n - 1)
        .flat_map(|x| scaled_identity(x, d as usize))
        .collect()
}

#[test]
fn sigma_matches_its_definition() {
    for n in THM2 {
        let b = build_thm2(n).unwrap();
        let got: BTreeSet<_> = b.sigma.to_vecs().into_iter().collect();
        assert_eq!(got, sigma_oracle_thm2(n), "n = {n}");
        let mut rho = sigma_oracle_thm2(n);
        rho.insert(vec![0, 0]);
        assert_eq!(b.rho.to_vecs().into_iter().collect::<BTreeSet<_>>(), rho);
    }
    for (n, d) in THM3 {
        let b = build_thm3(n, d).unwrap();
        let got: BTreeSet<_> = b.sigma.to_vecs().into_iter().collect();
        assert_eq!(got, sigma_oracle_thm3(n, d), "n = {n}, d = {d}");
    }
}

#[test]
fn sigma_rows_for_four_elements() {
    let b = build_thm2(4).unwrap();
    assert_eq!(b.sigma.row(1).unwrap(), vec![0, 0, 0, 1, 1, 2, 2, 3]);
    assert_eq!(b.sigma.row(2).unwrap(), vec![1, 2, 3, 0, 2, 0, 1, 0]);
    assert_eq!(b.f.evaluate(&[0, 0, 0, 1, 1, 2, 2, 3]).unwrap(), 3);
}

#[test]
fn sizes_follow_the_counting_argument() {
    let b = build_thm2(4).unwrap();
    assert_eq!((b.sigma.len(), b.rho.len()), (8, 9));
    let b = build_thm3(3, 3).unwrap();
    assert_eq!((b.k, b.sigma.len(), b.rho.len()), (3, 3, 10));
    let b = build_thm3(4, 3).unwrap();
    let mut odo = Odometer::new(2, 3);
    while let Some(bits) = odo.next() {
        let corner: Vec<u32> = bits.iter().map(|&x| x * 3).collect();
        assert_eq!(b.rho.contains(&corner), corner != [3, 3, 3]);
    }
}

#[test]
fn construction_invariants() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for b in all_bundles() {
        let label = format!("{:?} n = {} d = {}", b.kind, b.n, b.d);
        let expected_k = if b.d == 2 { 2 * b.n } else { b.d * (b.n - 2) } as usize;
        assert_eq!(b.k, expected_k, "{label}");
        assert_eq!(b.sigma.len(), b.k, "{label}");
        assert!(b.sigma.is_subset(&b.rho), "{label}");
        assert_eq!(b.g.arity(), b.d as usize + 1, "{label}");
        assert!(b.g.is_near_unanimity().unwrap(), "{label}");
        assert!(b.g.is_conservative(), "{label}");

        let n = b.n;
        let in_range = |v: u32| v == 0 || v == n - 1;
        let total = u64::from(n).checked_pow(b.k as u32);
        if total.is_some_and(|t| t <= 10_000_000) {
            let mut odo = Odometer::new(n, b.k);
            while let Some(x) = odo.next() {
                assert!(in_range(b.f.evaluate(x).unwrap()), "{label} at {x:?}");
            }
        } else {
            for _ in 0..200_000 {
                let x: Vec<u32> = (0..b.k).map(|_| rng.gen_range(0..n)).collect();
                assert!(in_range(b.f.evaluate(&x).unwrap()), "{label} at {x:?}");
            }
            for row in b.sigma.matrix() {
                assert_eq!(b.f.evaluate(&row).unwrap(), n - 1, "{label}");
            }
        }
    }
}

/// Both checkers on ρ and on every ρ∖{t}: same verdicts, and the
/// certificate-level checks agree too.
#[test]
fn naive_and_indicator_agree() {
    let bundles = [
        build_thm2(4).unwrap(),
        build_thm3(3, 3).unwrap(),
        build_thm3(4, 3).unwrap(),
    ];
    for b in &bundles {
        let mut rels = vec![b.rho.clone()];
        rels.extend(b.rho_minus_each_t().map(|(_, r)| r));
        for rel in &rels {
            let naive = preserves(&b.f, rel, Budget::default()).unwrap();
            let fast = indicator_preserves(b, rel).unwrap();
            assert_eq!(naive.holds(), fast.holds());
        }
        let verdicts = |mode| {
            let c = check_condition2(
                b,
                &VerifyConfig {
                    mode,
                    budget: Budget::default(),
                },
            );
            let mut v = vec![c.f_violates_rho.verdict];
            v.extend(c.per_t.iter().map(|p| p.verdict));
            v
        };
        let naive = verdicts(CheckMode::Naive);
        assert!(naive.iter().all(|&v| v == Verdict::Pass));
        assert_eq!(naive, verdicts(CheckMode::Indicator));
    }
}

#[test]
fn certificates_are_deterministic() {
    let config = VerifyConfig::default();
    for b in [build_thm2(5).unwrap(), build_thm3(4, 3).unwrap()] {
        let a = certify(&b, &config).without_timings();
        let c = certify(&b, &config).without_timings();
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&c).unwrap()
        );
    }
}

#[test]
fn all_parameters_certify() {
    let config = VerifyConfig::default();
    for b in all_bundles() {
        let cert = certify(&b, &config);
        assert_eq!(cert.status, Status::Certified, "{:?}", cert.verdicts());
        let bound = cert.implied_bound.as_ref().unwrap();
        assert_eq!(bound.k, b.k);
        cert.replay(&b).unwrap();
    }
}

mod mutations {
    use super::*;

    fn bases() -> Vec<ConstructionBundle> {
        vec![
            build_thm2(4).unwrap(),
            build_thm2(5).unwrap(),
            build_thm3(3, 3).unwrap(),
            build_thm3(4, 3).unwrap(),
        ]
    }

    #[test]
    fn non_conservative_g_fails_condition3_only() {
        for base in bases() {
            let (b, input) = non_conservative_g(&base).unwrap();
            assert!(!input.contains(&b.g.evaluate(&input).unwrap()));
            let cert = certify(&b, &VerifyConfig::default());
            assert_eq!(cert.status, Status::Failed);
            assert_eq!(
                cert.verdicts(),
                [Verdict::Pass, Verdict::Pass, Verdict::Fail]
            );
            let w = cert.condition3.conservative.violation.as_ref().unwrap();
            assert_eq!(w.output, b.g.evaluate(&w.input).unwrap());
            assert!(!w.input.contains(&w.output));
            cert.replay(&b).unwrap();
        }
    }

    #[test]
    fn dropped_sigma_element_fails_condition1_only() {
        for base in bases() {
            let (b, removed) = drop_sigma_element(&base).unwrap();
            assert!(!b.sigma.contains(&removed));
            let cert = certify(&b, &VerifyConfig::default());
            assert_eq!(cert.status, Status::Failed);
            assert_eq!(
                cert.verdicts(),
                [Verdict::Fail, Verdict::Pass, Verdict::Pass]
            );
            assert_eq!(cert.condition1.sigma_size + 1, cert.condition1.k);
            assert!(cert.implied_bound.is_none());
            cert.replay(&b).unwrap();
        }
    }

    /// Only the "f does not preserve ρ" clause can break: every other
    /// check is unchanged for the d ≥ 3 family.
    #[test]
    fn top_in_rho_fails_only_the_violation_clause() {
        for base in [
            build_thm3(3, 3).unwrap(),
            build_thm3(4, 3).unwrap(),
            build_thm3(3, 4).unwrap(),
        ] {
            let (b, top) = augment_rho_with_top(&base).unwrap();
            assert!(b.rho.contains(&top));
            let cert = certify(&b, &VerifyConfig::default());
            assert_eq!(cert.status, Status::Failed);
            assert_eq!(
                cert.verdicts(),
                [Verdict::Pass, Verdict::Fail, Verdict::Pass]
            );
            let clause = &cert.condition2.f_violates_rho;
            assert_eq!(
                (clause.verdict, clause.preserved),
                (Verdict::Fail, Some(true))
            );
            assert!(cert
                .condition2
                .per_t
                .iter()
                .all(|p| p.verdict == Verdict::Pass));
            cert.replay(&b).unwrap();
        }
    }

    /// For d = 2 the extra tuple (n−1, n−1) also sits in ρ∖{(n−1,0)} and
    /// ρ∖{(0,n−1)}, so those two removals stop being preserved as well.
    #[test]
    fn top_in_rho_for_pairs_also_breaks_the_corner_removals() {
        for base in [build_thm2(4).unwrap(), build_thm2(5).unwrap()] {
            let n = base.n;
            let (b, _) = augment_rho_with_top(&base).unwrap();
            let cert = certify(&b, &VerifyConfig::default());
            assert_eq!(cert.condition1.verdict, Verdict::Pass);
            let clause = &cert.condition2.f_violates_rho;
            assert_eq!(
                (clause.verdict, clause.preserved),
                (Verdict::Fail, Some(true))
            );
            let corners = [vec![0, n - 1], vec![n - 1, 0]];
            for per_t in [&cert.condition2.per_t, &cert.condition3.per_t] {
                for p in per_t {
                    let t = p.removed.as_ref().unwrap();
                    let expected = if corners.contains(t) {
                        Verdict::Fail
                    } else {
                        Verdict::Pass
                    };
                    assert_eq!(p.verdict, expected, "removed {t:?}");
                    if let Some(c) = &p.counterexample {
                        assert_eq!(&c.output, t);
                    }
                }
            }
            cert.replay(&b).unwrap();
        }
    }
}
