use super::*;
use crate::hecke::build_order;

fn big(x: i64) -> BigInt {
    BigInt::from(x)
}

fn pipeline(level: u64) -> (ModSymSpace, HeckeOrder) {
    let space = build_space(level).unwrap();
    let order = build_order(&space).unwrap();
    (space, order)
}

/// Brute-force point count of the rational elliptic factor y^2 + xy = x^3 - x
/// of the level-65 Jacobian: an oracle for the rational component of the
/// Frobenius trace.
fn curve65_a_ell(ell: u64) -> i64 {
    let mut n: i64 = 1;
    for x in 0..ell as i64 {
        let rhs = (x * x % ell as i64 * x - x).rem_euclid(ell as i64);
        for y in 0..ell as i64 {
            if (y * y + x * y - rhs) % ell as i64 == 0 {
                n += 1;
            }
        }
    }
    ell as i64 + 1 - n
}

#[test]
fn jacobian_counts_match_the_tables() {
    let (space, order) = pipeline(65);
    let expect: &[(u64, i64, &[(u64, u32)])] = &[
        (3, 504, &[(2, 3), (3, 2), (7, 1)]),
        (11, 217560, &[(2, 3), (3, 1), (5, 1), (7, 2), (37, 1)]),
        (19, 3466008, &[(2, 3), (3, 2), (7, 1), (13, 1), (23, 2)]),
    ];
    for &(ell, count, fac) in expect {
        let jc = jacobian_count(&space, &order, ell).unwrap();
        assert_eq!(jc.count, big(count), "count at {ell}");
        assert_eq!(jc.factorization, fac.to_vec(), "factorization at {ell}");
    }
    // errors: bad primes and 2
    assert!(jacobian_count(&space, &order, 5).is_err());
    assert!(jacobian_count(&space, &order, 13).is_err());
    assert!(jacobian_count(&space, &order, 2).is_err());
    assert!(jacobian_count(&space, &order, 9).is_err());
}

#[test]
fn jacobian_count_at_937() {
    let (space, order) = pipeline(65);
    let jc = jacobian_count(&space, &order, 937).unwrap();
    assert_eq!(
        jc.factorization,
        vec![
            (2, 13),
            (3, 2),
            (7, 1),
            (11, 2),
            (41, 1),
            (97, 1),
            (2963, 1)
        ]
    );
}

#[test]
fn jacobian_count_at_29_and_the_lemma_check() {
    // computed from T_29 = -4 T_1 + T_2 + 12 T_3 - 13 T_5 + 9 T_11: the
    // count is 2^6 * 3 * 7^2 * 31 * 107, and 7^2 *does* divide it, so the
    // classical check at the smallest prime split in Q(mu_7) fails as
    // printed in the tables (the tabulated value repeats the l = 19 one)
    let (space, order) = pipeline(65);
    let jc = jacobian_count(&space, &order, 29).unwrap();
    assert_eq!(jc.count, big(31_206_336));
    assert_eq!(
        jc.factorization,
        vec![(2, 6), (3, 1), (7, 2), (31, 1), (107, 1)]
    );
}

#[test]
fn rational_component_matches_the_elliptic_factor() {
    let (space, order) = pipeline(65);
    for ell in [3u64, 7, 11, 19, 29] {
        let jc = jacobian_count(&space, &order, ell).unwrap();
        let a = curve65_a_ell(ell);
        match &jc.frobenius_trace.comps[0] {
            crate::hecke::CompValue::Rat(x) => {
                assert_eq!(x, &num_rational::BigRational::from(big(a)), "a_{ell}");
            }
            _ => panic!("first component is rational"),
        }
    }
}

#[test]
fn cuspidal_order_divides_every_count() {
    let (space, order) = pipeline(65);
    for ell in [3u64, 7, 11, 17, 19, 23, 29] {
        let jc = jacobian_count(&space, &order, ell).unwrap();
        assert!(
            (&jc.count % big(168)).is_zero(),
            "#C = 168 must divide #J(F_{ell}) = {}",
            jc.count
        );
    }
}

#[test]
fn torsion_gcd_bounds() {
    let (space, order) = pipeline(65);
    let (g, _) = torsion_gcd_bound(&space, &order, &[3, 11]).unwrap();
    assert_eq!(g, big(168));
    let (g, _) = torsion_gcd_bound(&space, &order, &[3]).unwrap();
    assert_eq!(g, big(504));
    let (g, _) = torsion_gcd_bound(&space, &order, &[3, 11, 19]).unwrap();
    assert_eq!(g, big(168));
    assert!(matches!(
        torsion_gcd_bound(&space, &order, &[]),
        Err(ClassifyError::EmptyPrimeList)
    ));
}

#[test]
fn splitting_searches() {
    let c = splitting_search(&SplittingCondition::SplitsInKp { p: 7 });
    assert_eq!(c.prime, 19);
    assert_eq!(c.order_mod_p2, Some(6));

    let c = splitting_search(&SplittingCondition::CongruenceOneMod {
        moduli: vec![9, 13],
    });
    assert_eq!(c.prime, 937);
    assert_eq!(c.residues, vec![(9, 1), (13, 1)]);

    let c = splitting_search(&SplittingCondition::CongruenceOneMod { moduli: vec![7] });
    assert_eq!(c.prime, 29);
}

#[test]
fn obstruction_checks_for_level_65() {
    let (space, order) = pipeline(65);
    let consts = LevelConstants::builtin(65).unwrap();
    let reports: Vec<ObstructionReport> = consts
        .obstructions
        .iter()
        .map(|s| obstruction_check(&space, &order, s).unwrap())
        .collect();
    // gating checks pass: 7^2 does not divide #J(F_19), 3^3 does not divide
    // #J(F_937)
    assert!(reports[0].passes && reports[0].witness() == Some(19));
    assert!(reports[1].passes && reports[1].witness() == Some(937));
    // the informational check at l = 29 fails: 7^2 divides the true count
    assert!(reports[2].informational);
    assert!(!reports[2].passes && reports[2].attempts[0].ell == 29);
}

#[test]
fn candidate_enumeration() {
    let consts = LevelConstants::builtin(65).unwrap();
    let cands = enumerate_candidates(&consts, &AbGroup::cyclic(84));
    let names: Vec<String> = cands.iter().map(|c| c.name()).collect();
    assert_eq!(names.len(), 6);
    for expected in ["0", "C3", "Sigma3", "C7", "C3 x C7", "Sigma3 x C7"] {
        assert!(names.iter().any(|n| n == expected), "missing {expected}");
    }

    let consts39 = LevelConstants::builtin(39).unwrap();
    let cands = enumerate_candidates(&consts39, &AbGroup::cyclic(28));
    let names: Vec<String> = cands.iter().map(|c| c.name()).collect();
    assert_eq!(names, vec!["0", "C7"]);

    let consts35 = LevelConstants::builtin(35).unwrap();
    let cands = enumerate_candidates(&consts35, &AbGroup::cyclic(24));
    let names: Vec<String> = cands.iter().map(|c| c.name()).collect();
    assert_eq!(names, vec!["0", "C3", "Sigma3"]);
}

#[test]
fn phi_data_for_level_65() {
    let consts = LevelConstants::builtin(65).unwrap();
    let (p5, p13) = phi_data(&consts).unwrap();
    assert_eq!(p5.group, AbGroup::cyclic(42));
    assert_eq!(
        (p5.order_cp.clone(), p5.order_cq.clone()),
        (big(14), big(1))
    );
    assert!(p5.computed);
    assert_eq!(p13.group, AbGroup::cyclic(6));
    assert_eq!(
        (p13.order_cp.clone(), p13.order_cq.clone()),
        (big(1), big(6))
    );
}

#[test]
fn phi_override_for_level_39_is_checked_against_the_graph() {
    let consts = LevelConstants::builtin(39).unwrap();
    let (p3, p13) = phi_data(&consts).unwrap();
    assert_eq!(p3.group, AbGroup::cyclic(28));
    assert!(!p3.computed);
    assert_eq!(
        (p3.order_cp.clone(), p3.order_cq.clone()),
        (big(14), big(1))
    );
    assert_eq!(p13.group, AbGroup::cyclic(4));
    assert!(p13.computed);

    // a corrupted override is rejected
    let mut bad = consts.clone();
    bad.component_overrides.get_mut(&3).unwrap().invariants = vec![14];
    assert!(matches!(
        phi_data(&bad),
        Err(ClassifyError::InconsistentConstants(_))
    ));
}

#[test]
fn classification_of_level_65() {
    let consts = LevelConstants::builtin(65).unwrap();
    let cert = run_level(&consts, None).unwrap();
    assert_eq!(cert.survivors.len(), 1, "unique survivor");
    assert_eq!(cert.survivors[0].name(), "C7");
    assert_eq!(cert.survivors[0].group_order(), 7);
    assert_eq!(cert.eisenstein_quotient, AbGroup::cyclic(84));
    assert_eq!(cert.cuspidal_group.invariant_factors, vec![big(2), big(84)]);

    // the zero candidate predicts odd orders (21, 3) against targets (3, 21)
    let zero = cert
        .candidates
        .iter()
        .find(|v| v.candidate.name() == "0")
        .unwrap();
    assert!(!zero.survives);
    let preds: Vec<(BigInt, BigInt)> = zero
        .per_prime
        .iter()
        .map(|(_, b, t)| (b[0].predicted_odd_order.clone(), t.clone()))
        .collect();
    assert_eq!(preds, vec![(big(21), big(3)), (big(3), big(21))]);

    // C3 is rejected at r = 5 with prediction 21 * 3 / 1 = 63
    let c3 = cert
        .candidates
        .iter()
        .find(|v| v.candidate.name() == "C3")
        .unwrap();
    assert!(!c3.survives);
    let (r, preds, target) = &c3.per_prime[0];
    assert_eq!(*r, 5);
    assert_eq!(preds[0].predicted_odd_order, big(63));
    assert_eq!(target, &big(3));
}

#[test]
fn classification_of_level_39() {
    let consts = LevelConstants::builtin(39).unwrap();
    let cert = run_level(&consts, None).unwrap();
    assert_eq!(cert.survivors.len(), 1);
    assert_eq!(cert.survivors[0].name(), "C7");
    // the exclusion needs the third prime split in K_7: the counts at 19
    // and 31 are divisible by 49 at this level
    let ob = &cert.obstructions[0];
    assert!(ob.passes);
    assert_eq!(
        ob.attempts.iter().map(|a| a.ell).collect::<Vec<_>>(),
        vec![19, 31, 67]
    );
    assert_eq!(ob.witness(), Some(67));
}

#[test]
fn classification_of_level_35() {
    let consts = LevelConstants::builtin(35).unwrap();
    let cert = run_level(&consts, None).unwrap();
    assert_eq!(cert.survivors.len(), 1);
    assert_eq!(cert.survivors[0].name(), "0");
}

#[test]
fn classifier_refuses_on_failed_gating_obstruction() {
    let consts = LevelConstants::builtin(65).unwrap();
    let (space, order) = pipeline(65);
    let eis = eisenstein_ideal(&space, &order, 14).unwrap();
    let (pp, qq) = phi_data(&consts).unwrap();
    // promote the failing informational check to a gating one
    let mut spec = consts.obstructions[2].clone();
    spec.informational = false;
    let report = obstruction_check(&space, &order, &spec).unwrap();
    assert!(!report.passes);
    let err = classify_kernel(&consts, &eis, &pp, &qq, vec![report]).unwrap_err();
    assert!(matches!(err, ClassifyError::ObstructionFailed(_)));
}

#[test]
fn inconsistent_constants_are_rejected() {
    let mut consts = LevelConstants::builtin(65).unwrap();
    consts.cusp_order_p = 29; // breaks divisibility by the reduction order
    let err = run_level(&consts, None).unwrap_err();
    assert!(matches!(err, ClassifyError::InconsistentConstants(_)));
}

#[test]
fn swapping_prime_roles_transposes_predictions() {
    let consts = LevelConstants::builtin(65).unwrap();
    let (p5, p13) = phi_data(&consts).unwrap();
    let mut swapped = consts.clone();
    swapped.cusp_order_p = consts.cusp_order_q;
    swapped.cusp_order_q = consts.cusp_order_p;
    swapped.cusp_relations = consts.cusp_relations.iter().map(|&(a, b)| (b, a)).collect();
    let swap_phi = |d: &PhiData| PhiData {
        prime: d.prime,
        group: d.group.clone(),
        order_cp: d.order_cq.clone(),
        order_cq: d.order_cp.clone(),
        computed: d.computed,
    };
    let eis_q = AbGroup::cyclic(84);
    for cand in enumerate_candidates(&consts, &eis_q) {
        for phi in [&p5, &p13] {
            let direct = predictions_at(&consts, &cand, phi, 5, 13);
            let transposed = predictions_at(&swapped, &cand, &swap_phi(phi), 13, 5);
            let key = |v: &Vec<BranchPrediction>| -> Vec<(u64, u64, BigInt)> {
                v.iter()
                    .map(|b| (b.h0_odd, b.h1_odd, b.predicted_odd_order.clone()))
                    .collect()
            };
            assert_eq!(key(&direct), key(&transposed), "candidate {}", cand.name());
        }
    }
}

#[test]
fn level_constants_round_trip_through_json() {
    for level in [65u64, 35, 39] {
        let consts = LevelConstants::builtin(level).unwrap();
        let json = serde_json::to_string_pretty(&consts).unwrap();
        let back: LevelConstants = serde_json::from_str(&json).unwrap();
        assert_eq!(consts, back);
    }
}
