use super::{CriterionResult, Xorshift};
use crate::arith::primes_up_to;
use crate::classify::{
    jacobian_count, run_level, splitting_search, LevelConstants, SplittingCondition,
};
use crate::hecke::{build_order, poly_roots_within_weil_bound, CompValue, EtaleElt, QuadElt};
use crate::ideals::{
    eisenstein_ideal, eisenstein_maximal_ideals, ideal_from_generators, ideal_product,
    multiplier_ring, odd_ideal_transfer, socle_dimension, TransferDirection,
};
use crate::modsym::build_space;
use crate::redgraph::{component_group, cusp_reduction_map, dual_graph, mass_identity_holds};
use crate::zlinalg::Matrix;
use crate::{AbGroup, IntMatrix};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

fn big(x: i64) -> BigInt {
    BigInt::from(x)
}

fn result(id: u32, name: &str, passed: bool, detail: String) -> CriterionResult {
    CriterionResult {
        id,
        name: name.to_string(),
        passed,
        detail,
    }
}

fn poly_mul(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    let mut out = vec![BigInt::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Run the complete verification suite: every headline value the toolkit
/// must reproduce, one pass/fail line per criterion.
pub fn run_all() -> Vec<CriterionResult> {
    let mut out = Vec::new();

    let space = match build_space(65) {
        Ok(s) => s,
        Err(e) => {
            out.push(result(
                1,
                "modular symbols",
                false,
                format!("build failed: {e}"),
            ));
            return out;
        }
    };
    let order = match build_order(&space) {
        Ok(o) => o,
        Err(e) => {
            out.push(result(
                2,
                "Hecke order",
                false,
                format!("build failed: {e}"),
            ));
            return out;
        }
    };

    // 1. modular symbols dimensions and the T_2 characteristic polynomial
    {
        let t2 = space.hecke_operator(2).expect("T_2");
        let h = poly_mul(
            &poly_mul(&[big(1), big(1)], &[big(-1), big(2), big(1)]),
            &[big(-3), big(0), big(1)],
        );
        let expected = poly_mul(&h, &h);
        let cp = t2.matrix.charpoly().expect("square");
        let ok = space.cuspidal_dim == 10 && space.num_cusps() == 4 && cp == expected;
        out.push(result(
            1,
            "modular symbols",
            ok,
            format!(
                "level 65: cuspidal rank {}, {} cusps, charpoly(T_2) {}",
                space.cuspidal_dim,
                space.num_cusps(),
                if cp == expected {
                    "= ((x+1)(x^2+2x-1)(x^2-3))^2"
                } else {
                    "mismatch"
                }
            ),
        ));
    }

    // 2. discriminant, index in the normalization, congruence model
    {
        let model = |v: &[i64]| -> bool {
            (v[0] - v[1]) % 2 == 0 && (v[0] - v[3] - v[4]) % 2 == 0 && (v[2] - v[4]) % 2 == 0
        };
        let mut congruences_ok = true;
        for bits in 0..32u32 {
            let v: Vec<i64> = (0..5).map(|i| ((bits >> i) & 1) as i64).collect();
            let e = EtaleElt {
                comps: vec![
                    CompValue::Rat(BigRational::from(big(v[0]))),
                    CompValue::Quad(QuadElt::from_ints(2, v[1], v[2])),
                    CompValue::Quad(QuadElt::from_ints(3, v[3], v[4])),
                ],
            };
            if order.membership(&e).expect("integral") != model(&v) {
                congruences_ok = false;
            }
        }
        let ok = order.disc == big(6144) && order.index_in_max == big(8) && congruences_ok;
        out.push(result(
            2,
            "Hecke order",
            ok,
            format!(
                "disc(T) = {} (2^11*3 = 6144), [Tmax:T] = {}, congruence model {}",
                order.disc,
                order.index_in_max,
                if congruences_ok {
                    "agrees on all 32 residue patterns"
                } else {
                    "disagrees"
                }
            ),
        ));
    }

    // 3. basis expansions, including the recomputed T_29
    {
        let expand = |n: u64| -> Vec<BigInt> {
            let t = space.hecke_operator(n).expect("T_n");
            let e = order.etale_of_matrix(&t.matrix).expect("etale");
            order.expand_in_basis(&e).expect("in order")
        };
        let t7_ok = expand(7) == vec![big(2), big(-1), big(-6), big(9), big(-5)];
        let t13_ok = expand(13) == vec![big(0), big(0), big(-1), big(1), big(-1)];
        let t19_ok = expand(19) == vec![big(2), big(2), big(-4), big(8), big(-3)];
        let t29 = expand(29);
        let t29_matches_tables = t29 == vec![big(-4), big(1), big(12), big(-13), big(9)];
        let ok = t7_ok && t13_ok && t19_ok && t29_matches_tables;
        out.push(result(
            3,
            "basis expansions",
            ok,
            format!(
                "T_7, T_13, T_19 exact; T_29 = {t29:?} {} the tabulated expansion \
                 (note: the tabulated #J(F_29) value is inconsistent with it; \
                 see criterion 8 report)",
                if t29_matches_tables {
                    "matches"
                } else {
                    "DIFFERS from"
                }
            ),
        ));
    }

    // 4. Eisenstein ideal: quotient, stability, residues
    let eis = eisenstein_ideal(&space, &order, 14);
    {
        match &eis {
            Ok(e) => {
                let t5 = order
                    .etale_of_matrix(&space.hecke_operator(5).unwrap().matrix)
                    .unwrap();
                let t13 = order
                    .etale_of_matrix(&space.hecke_operator(13).unwrap().matrix)
                    .unwrap();
                let r5 = e.residue(&order, &t5);
                let r13 = e.residue(&order, &t13);
                let ok = e.quotient == AbGroup::cyclic(84)
                    && r5 == Some(big(29))
                    && r13 == Some(big(13));
                out.push(result(
                    4,
                    "Eisenstein ideal",
                    ok,
                    format!(
                        "T/E = {} (stable when the prime bound doubles 14 -> 28); \
                         T_5 = {:?}, T_13 = {:?} mod E",
                        e.quotient, r5, r13
                    ),
                ));
            }
            Err(e) => {
                out.push(result(4, "Eisenstein ideal", false, format!("{e}")));
            }
        }
    }
    let Ok(eis) = eis else { return out };

    // 5. maximal ideals: generators, non-principality, socles
    {
        let max = eisenstein_maximal_ideals(&order, &eis);
        let chars: Vec<u64> = max.iter().map(|m| m.residue_char).collect();
        let m2 = max.iter().find(|m| m.residue_char == 2);
        let m3 = max.iter().find(|m| m.residue_char == 3);
        let m7 = max.iter().find(|m| m.residue_char == 7);
        let mut ok = chars == vec![2, 3, 7] && m2.is_some();
        let mut notes = Vec::new();
        if let (Some(m2), Some(m3), Some(m7)) = (m2, m3, m7) {
            // verified generators for the odd ideals
            for m in [m3, m7] {
                match &m.generator {
                    Some(theta) => {
                        let coords = order.algebra.int_coords(theta).unwrap();
                        let regen = ideal_from_generators(&order, &[coords]);
                        if regen != m.ideal {
                            ok = false;
                            notes.push(format!("generator of m_{} fails", m.residue_char));
                        }
                    }
                    None => {
                        ok = false;
                        notes.push(format!("no generator for m_{}", m.residue_char));
                    }
                }
            }
            // multiplier-ring certificates for powers of m_2
            let mut power = m2.ideal.clone();
            for n in 1..=4 {
                let cert = multiplier_ring(&order, &power);
                if !cert.strictly_contains_order {
                    ok = false;
                    notes.push(format!("m_2^{n} multiplier certificate missing"));
                }
                power = ideal_product(&order, &power, &m2.ideal);
            }
            let socles = (
                socle_dimension(&order, m2),
                socle_dimension(&order, m3),
                socle_dimension(&order, m7),
            );
            if socles.0 < 2 || socles.1 != 1 || socles.2 != 1 {
                ok = false;
            }
            notes.push(format!(
                "socle dims (m_2, m_3, m_7) = ({}, {}, {})",
                socles.0, socles.1, socles.2
            ));
        }
        out.push(result(
            5,
            "ideal certificates",
            ok,
            format!(
                "Eisenstein maximal ideals at {chars:?}; generators verified for m_3, m_7; \
                 m_2^n non-principal for n <= 4; {}",
                notes.join("; ")
            ),
        ));
    }

    // 6. component groups and cusp reductions
    {
        let g5 = dual_graph(13, 5).expect("graph at 5");
        let c5 = component_group(&g5);
        let r5 = cusp_reduction_map(&g5, &c5);
        let g13 = dual_graph(5, 13).expect("graph at 13");
        let c13 = component_group(&g13);
        let r13 = cusp_reduction_map(&g13, &c13);
        let ok = c5.group == AbGroup::cyclic(42)
            && c13.group == AbGroup::cyclic(6)
            && r5.order_for(5) == &big(14)
            && r5.order_for(13) == &big(1)
            && r13.order_for(13) == &big(6)
            && r13.order_for(5) == &big(1)
            && r5.cokernel == AbGroup::cyclic(3)
            && r13.cokernel.is_trivial();
        out.push(result(
            6,
            "component groups",
            ok,
            format!(
                "Phi(5) = {}, Phi(13) = {}; reduction orders ({}, {}) at 5 and ({}, {}) at 13; \
                 cokernels {} and {}",
                c5.group,
                c13.group,
                r5.order_for(5),
                r5.order_for(13),
                r13.order_for(5),
                r13.order_for(13),
                r5.cokernel,
                r13.cokernel
            ),
        ));
    }

    // 7. point counts and the torsion gcd
    {
        let mut ok = true;
        let mut notes = Vec::new();
        let expect: &[(u64, &[(u64, u32)])] = &[
            (3, &[(2, 3), (3, 2), (7, 1)]),
            (11, &[(2, 3), (3, 1), (5, 1), (7, 2), (37, 1)]),
            (19, &[(2, 3), (3, 2), (7, 1), (13, 1), (23, 2)]),
            (
                937,
                &[
                    (2, 13),
                    (3, 2),
                    (7, 1),
                    (11, 2),
                    (41, 1),
                    (97, 1),
                    (2963, 1),
                ],
            ),
        ];
        let mut counts = std::collections::BTreeMap::new();
        for (ell, fac) in expect {
            let jc = jacobian_count(&space, &order, *ell).expect("count");
            if jc.factorization != *fac {
                ok = false;
                notes.push(format!("factorization mismatch at {ell}"));
            }
            counts.insert(*ell, jc.count);
        }
        let gcd = num_integer::Integer::gcd(&counts[&3], &counts[&11]);
        if gcd != big(168) {
            ok = false;
        }
        out.push(result(
            7,
            "point counts",
            ok,
            format!(
                "#J(F_3) = {}, #J(F_11) = {}, #J(F_19) = {}, #J(F_937) = {}; gcd over {{3,11}} = {} {}",
                counts[&3], counts[&11], counts[&19], counts[&937], gcd,
                notes.join("; ")
            ),
        ));
    }

    // 8. splitting searches with certificates, and the l = 29 report
    {
        let k7 = splitting_search(&SplittingCondition::SplitsInKp { p: 7 });
        let c913 = splitting_search(&SplittingCondition::CongruenceOneMod {
            moduli: vec![9, 13],
        });
        let c7 = splitting_search(&SplittingCondition::CongruenceOneMod { moduli: vec![7] });
        let jc29 = jacobian_count(&space, &order, 29).expect("count at 29");
        let seven_sq_divides = jc29.factorization.iter().any(|&(p, e)| p == 7 && e >= 2);
        let ok = k7.prime == 19
            && k7.order_mod_p2 == Some(6)
            && c913.prime == 937
            && c7.prime == 29
            && seven_sq_divides; // the honest recomputation: 7^2 | #J(F_29)
        out.push(result(
            8,
            "splitting searches",
            ok,
            format!(
                "K_7 -> 19 (order 6 mod 49); 1 mod 9 & 13 -> 937; 1 mod 7 -> 29; \
                 recomputed #J(F_29) = {} ({}) where the classical tables print the \
                 l = 19 value; 7^2 | #J(F_29) is {}",
                jc29.count,
                crate::arith::factor_string(&jc29.count),
                seven_sq_divides
            ),
        ));
    }

    // 9. classification at the three levels
    {
        let mut ok = true;
        let mut notes = Vec::new();
        for (level, expected) in [(65u64, "C7"), (39, "C7"), (35, "0")] {
            let consts = LevelConstants::builtin(level).expect("builtin constants");
            match run_level(&consts, None) {
                Ok(cert) => {
                    let names: Vec<String> = cert.survivors.iter().map(|s| s.name()).collect();
                    if names != vec![expected.to_string()] {
                        ok = false;
                        notes.push(format!("level {level}: survivors {names:?}"));
                    } else {
                        notes.push(format!("level {level}: unique survivor {expected}"));
                    }
                }
                Err(e) => {
                    ok = false;
                    notes.push(format!("level {level}: {e}"));
                }
            }
        }
        out.push(result(9, "kernel classification", ok, notes.join("; ")));
    }

    // 10. property suites
    {
        let mut ok = true;
        let mut notes = Vec::new();

        // SNF/HNF randomized unimodular invariance, 500 cases
        let mut rng = Xorshift::new(0x5eed);
        for case in 0..500 {
            let rows = 2 + (case % 3);
            let cols = 2 + (case % 4);
            let mut m = Matrix::<BigInt>::zero(rows, cols);
            for i in 0..rows {
                for j in 0..cols {
                    m[(i, j)] = big(rng.signed(9));
                }
            }
            let (d, l, r) = m.snf();
            if l.mul(&m).mul(&r) != d
                || l.det().unwrap().abs() != big(1)
                || r.det().unwrap().abs() != big(1)
            {
                ok = false;
                notes.push(format!("SNF transform failure on case {case}"));
                break;
            }
            let u = random_unimodular(&mut rng, rows);
            let v = random_unimodular(&mut rng, cols);
            let (d2, _, _) = u.mul(&m).mul(&v).snf();
            if d != d2 {
                ok = false;
                notes.push(format!("SNF invariance failure on case {case}"));
                break;
            }
            let h = m.hnf_basis();
            if h.hnf_basis() != h {
                ok = false;
                notes.push(format!("HNF idempotence failure on case {case}"));
                break;
            }
        }
        if ok {
            notes.push("SNF/HNF invariance on 500 randomized cases".to_string());
        }

        // Hecke commutativity for n, m <= 30
        let ops: Vec<IntMatrix> = (1..=30)
            .map(|n| space.hecke_operator(n).expect("T_n").matrix)
            .collect();
        let mut comm = true;
        for i in 0..ops.len() {
            for j in i + 1..ops.len() {
                if ops[i].mul(&ops[j]) != ops[j].mul(&ops[i]) {
                    comm = false;
                }
            }
        }
        ok &= comm;
        notes.push(format!(
            "Hecke commutativity n, m <= 30: {}",
            if comm { "holds" } else { "FAILS" }
        ));

        // Ramanujan bound for good primes up to 100
        let mut weil = true;
        for ell in primes_up_to(100) {
            if 65 % ell == 0 {
                continue;
            }
            let cp = space
                .hecke_operator(ell)
                .expect("T_l")
                .matrix
                .charpoly()
                .unwrap();
            if !poly_roots_within_weil_bound(&cp, ell) {
                weil = false;
                notes.push(format!("Weil bound fails at {ell}"));
            }
        }
        ok &= weil;
        if weil {
            notes.push("Ramanujan bound for l <= 100".to_string());
        }

        // ideal transfer round trip on 50 generated odd ideals
        let mut transfer_ok = true;
        let mut count = 0;
        let mut rng = Xorshift::new(0x1dea);
        while count < 50 {
            let coords: Vec<BigInt> = (0..5).map(|_| big(rng.signed(6))).collect();
            if !order.lattice.lattice_contains(&coords) {
                continue;
            }
            let e = order.algebra.from_int_coords(&coords);
            let n = e.norm();
            if n.is_zero() || (&n.numer().abs() % big(2)).is_zero() {
                continue;
            }
            let ideal = ideal_from_generators(&order, &[coords]);
            if (&ideal.index % big(2)).is_zero() {
                continue;
            }
            count += 1;
            let up = odd_ideal_transfer(&order, &ideal.basis, TransferDirection::ToNormalization)
                .expect("odd");
            let down = odd_ideal_transfer(&order, &up, TransferDirection::ToOrder).expect("odd");
            if down != ideal.basis {
                transfer_ok = false;
            }
        }
        ok &= transfer_ok;
        notes.push(format!(
            "ideal transfer round-trip on 50 odd ideals: {}",
            if transfer_ok { "holds" } else { "FAILS" }
        ));

        // mass identity for q <= 97
        let mut mass_ok = true;
        for q in primes_up_to(97).into_iter().filter(|&q| q >= 5) {
            for p in [3u64, 5, 7, 13] {
                if p == q {
                    continue;
                }
                let g = dual_graph(p, q).expect("graph");
                if !mass_identity_holds(&g) {
                    mass_ok = false;
                }
            }
        }
        ok &= mass_ok;
        notes.push(format!(
            "mass identity for 5 <= q <= 97: {}",
            if mass_ok { "holds" } else { "FAILS" }
        ));

        out.push(result(10, "property suites", ok, notes.join("; ")));
    }

    out
}

fn random_unimodular(rng: &mut Xorshift, n: usize) -> Matrix<BigInt> {
    let mut u = Matrix::<BigInt>::identity(n);
    if n < 2 {
        return u;
    }
    for _ in 0..3 * n {
        let i = rng.below(n as u64) as usize;
        let mut j = rng.below(n as u64) as usize;
        if i == j {
            j = (j + 1) % n;
        }
        let c = big(rng.signed(2));
        for k in 0..n {
            let t = &c * &u[(j, k)];
            u[(i, k)] = u[(i, k)].clone() + t;
        }
    }
    u
}
