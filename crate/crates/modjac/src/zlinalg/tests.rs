use super::*;
use crate::verify::Xorshift;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::Zero;

type M = Matrix<BigInt>;

fn big(x: i64) -> BigInt {
    BigInt::from(x)
}

/// Independent 2x2 determinant for the HNF oracle.
fn det2(m: &M) -> BigInt {
    m[(0, 0)].clone() * m[(1, 1)].clone() - m[(0, 1)].clone() * m[(1, 0)].clone()
}

/// gcd of all k x k minors, by brute force. Independent oracle for SNF
/// invariants: d_1 * ... * d_k = gcd of k x k minors.
fn minor_gcd(m: &M, k: usize) -> BigInt {
    fn combos(n: usize, k: usize) -> Vec<Vec<usize>> {
        if k == 0 {
            return vec![vec![]];
        }
        let mut out = Vec::new();
        for first in 0..n {
            for mut rest in combos(n, k - 1) {
                if rest.iter().all(|&x| x > first) {
                    let mut c = vec![first];
                    c.append(&mut rest);
                    out.push(c);
                }
            }
        }
        out
    }
    let mut g = BigInt::from(0);
    for rows in combos(m.rows(), k) {
        for cols in combos(m.cols(), k) {
            let mut sub = M::zero(k, k);
            for (i, &r) in rows.iter().enumerate() {
                for (j, &c) in cols.iter().enumerate() {
                    sub[(i, j)] = m[(r, c)].clone();
                }
            }
            g = num_integer::Integer::gcd(&g, &sub.det().unwrap());
        }
    }
    g
}

fn random_matrix(rng: &mut Xorshift, rows: usize, cols: usize, bound: i64) -> M {
    let mut m = M::zero(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            m[(i, j)] = big(rng.below(2 * bound as u64 + 1) as i64 - bound);
        }
    }
    m
}

/// Random unimodular matrix: a product of elementary row operations.
fn random_unimodular(rng: &mut Xorshift, n: usize, steps: usize) -> M {
    let mut u = M::identity(n);
    for _ in 0..steps {
        let i = rng.below(n as u64) as usize;
        let mut j = rng.below(n as u64) as usize;
        if i == j {
            j = (j + 1) % n;
        }
        if n == 1 {
            continue;
        }
        let c = big(rng.below(5) as i64 - 2);
        let q = -c;
        u.submul_row(i, j, &q);
    }
    u
}

#[test]
fn hnf_fixed_points() {
    let d = M::from_i64(&[&[2, 0], &[0, 3]]);
    let (h, u) = d.hnf();
    assert_eq!(h, d);
    assert_eq!(u.det().unwrap(), big(1));

    let id = M::identity(2);
    assert_eq!(id.hnf().0, id);
}

#[test]
fn hnf_preserves_determinant() {
    let m = M::from_i64(&[&[2, 4], &[6, 8]]);
    assert_eq!(det2(&m).abs(), big(8));
    let (h, u) = m.hnf();
    assert_eq!(u.mul(&m), h);
    assert_eq!(u.det().unwrap().abs(), big(1));
    assert_eq!(h.det().unwrap().abs(), big(8));
    // upper triangular with positive pivots
    assert!(h[(1, 0)].is_zero());
    assert!(h[(0, 0)].is_positive() && h[(1, 1)].is_positive());
}

#[test]
fn hnf_is_idempotent() {
    let mut rng = Xorshift::new(7);
    for _ in 0..40 {
        let m = random_matrix(&mut rng, 4, 5, 9);
        let h = m.hnf_basis();
        assert_eq!(h.hnf_basis(), h);
    }
}

#[test]
fn snf_examples() {
    let (d, l, r) = M::from_i64(&[&[2, 0], &[0, 3]]).snf();
    assert_eq!(d, M::from_i64(&[&[1, 0], &[0, 6]]));
    assert_eq!(l.det().unwrap().abs(), big(1));
    assert_eq!(r.det().unwrap().abs(), big(1));

    let z = M::zero(2, 3);
    assert_eq!(z.snf().0, z);

    // cuspidal-group presentation: gcd of entries 2, gcd of 2x2 minors 168
    let m = M::from_i64(&[&[28, 0], &[0, 12], &[14, -6]]);
    assert_eq!(minor_gcd(&m, 1), big(2));
    assert_eq!(minor_gcd(&m, 2), big(168));
    let (d, l, r) = m.snf();
    assert_eq!(d[(0, 0)], big(2));
    assert_eq!(d[(1, 1)], big(84));
    assert_eq!(l.mul(&m).mul(&r), d);
}

#[test]
fn snf_transforms_are_exact_and_unimodular() {
    let mut rng = Xorshift::new(22);
    for _ in 0..60 {
        let rows = 1 + rng.below(5) as usize;
        let cols = 1 + rng.below(5) as usize;
        let m = random_matrix(&mut rng, rows, cols, 12);
        let (d, l, r) = m.snf();
        assert_eq!(l.mul(&m).mul(&r), d, "l*m*r != d for {m:?}");
        assert_eq!(l.det().unwrap().abs(), big(1));
        assert_eq!(r.det().unwrap().abs(), big(1));
        for i in 0..rows.min(cols).saturating_sub(1) {
            if !d[(i + 1, i + 1)].is_zero() {
                assert!(
                    d[(i + 1, i + 1)].clone().mod_floor(&d[(i, i)]).is_zero(),
                    "divisibility chain broken in {d:?}"
                );
            }
        }
    }
}

#[test]
fn snf_invariants_stable_under_unimodular_action() {
    let mut rng = Xorshift::new(99);
    for _ in 0..50 {
        let m = random_matrix(&mut rng, 4, 4, 8);
        let (d, _, _) = m.snf();
        let a = random_unimodular(&mut rng, 4, 12);
        let b = random_unimodular(&mut rng, 4, 12);
        let (d2, _, _) = a.mul(&m).mul(&b).snf();
        assert_eq!(d, d2);
    }
}

#[test]
fn snf_invariants_match_minor_gcds() {
    let mut rng = Xorshift::new(5);
    for _ in 0..25 {
        let m = random_matrix(&mut rng, 3, 4, 7);
        let (d, _, _) = m.snf();
        let mut prod = big(1);
        for k in 1..=3usize {
            let g = minor_gcd(&m, k);
            let dk = d[(k - 1, k - 1)].clone();
            prod *= &dk;
            assert_eq!(prod, g, "product of first {k} invariants vs {k}-minor gcd");
            if g.is_zero() {
                break;
            }
        }
    }
}

#[test]
fn det_matches_bareiss_against_cofactor() {
    fn cofactor_det(m: &M) -> BigInt {
        let n = m.rows();
        if n == 1 {
            return m[(0, 0)].clone();
        }
        let mut acc = big(0);
        for j in 0..n {
            let mut sub = M::zero(n - 1, n - 1);
            for i in 1..n {
                let mut cj = 0;
                for k in 0..n {
                    if k == j {
                        continue;
                    }
                    sub[(i - 1, cj)] = m[(i, k)].clone();
                    cj += 1;
                }
            }
            let term = m[(0, j)].clone() * cofactor_det(&sub);
            if j % 2 == 0 {
                acc += term;
            } else {
                acc -= term;
            }
        }
        acc
    }
    let mut rng = Xorshift::new(13);
    for _ in 0..30 {
        let m = random_matrix(&mut rng, 5, 5, 10);
        assert_eq!(m.det().unwrap(), cofactor_det(&m));
    }
}

#[test]
fn charpoly_examples() {
    // (x-1)^2 = x^2 - 2x + 1
    assert_eq!(
        M::identity(2).charpoly().unwrap(),
        vec![big(1), big(-2), big(1)]
    );
    // (x-2)(x-3) = x^2 - 5x + 6
    assert_eq!(
        M::from_i64(&[&[2, 0], &[0, 3]]).charpoly().unwrap(),
        vec![big(6), big(-5), big(1)]
    );
    // companion matrix of x^2 + 2x - 1
    let comp = M::from_i64(&[&[0, 1], &[1, -2]]);
    assert_eq!(comp.charpoly().unwrap(), vec![big(-1), big(2), big(1)]);
    // non-square input errors
    assert!(M::zero(2, 3).charpoly().is_err());
}

#[test]
fn charpoly_constant_term_is_det() {
    let mut rng = Xorshift::new(31);
    for _ in 0..20 {
        let m = random_matrix(&mut rng, 4, 4, 9);
        let cp = m.charpoly().unwrap();
        // c_0 = (-1)^n det
        assert_eq!(cp[0], m.det().unwrap());
    }
}

#[test]
fn kernel_and_solve() {
    let m = M::from_i64(&[&[1, 2], &[2, 4], &[0, 1]]);
    let k = m.kernel();
    assert_eq!(k.rows(), 1);
    assert!(k.mul(&m).is_zero());
    // saturation: the kernel generator is primitive
    let g = num_integer::Integer::gcd(
        &k[(0, 0)],
        &num_integer::Integer::gcd(&k[(0, 1)], &k[(0, 2)]),
    );
    assert_eq!(g, big(1));

    let b = vec![big(1), big(3)]; // row0 + row2
    let x = m.solve_left(&b).unwrap();
    assert_eq!(m.apply_row(&x), b);
    assert!(m.solve_left(&[big(0), big(-1)]).is_some());
}

#[test]
fn lattice_ops() {
    let a = M::from_i64(&[&[2, 0], &[0, 2]]);
    let b = M::from_i64(&[&[1, 1]]);
    let inter = a.lattice_intersection(&b);
    // intersection of 2Z^2 with Z(1,1) is Z(2,2)
    assert_eq!(inter, M::from_i64(&[&[2, 2]]));
    assert_eq!(a.lattice_index().unwrap(), big(4));
    assert!(a.lattice_contains(&[big(4), big(-2)]));
    assert!(!a.lattice_contains(&[big(1), big(0)]));
}

#[test]
fn abgroup_from_relations_examples() {
    let g = abgroup_from_relations(2, &M::from_i64(&[&[28, 0], &[0, 12], &[14, -6]])).unwrap();
    assert_eq!(g.invariant_factors, vec![big(2), big(84)]);
    assert_eq!(g.order(), big(168));
    assert_eq!(g.exponent(), big(84));

    let g = abgroup_from_relations(1, &M::from_i64(&[&[84]])).unwrap();
    assert_eq!(g, AbGroup::cyclic(84));

    let g = abgroup_from_relations(1, &M::from_i64(&[&[1]])).unwrap();
    assert!(g.is_trivial());

    // nonzero free rank is an error
    assert!(matches!(
        abgroup_from_relations(2, &M::from_i64(&[&[1, 0]])),
        Err(ZlinalgError::FreeRank(1))
    ));
}

#[test]
fn abgroup_order_equals_relation_determinant() {
    let mut rng = Xorshift::new(41);
    let mut tried = 0;
    while tried < 25 {
        let m = random_matrix(&mut rng, 3, 3, 6);
        let d = m.det().unwrap();
        if d.is_zero() {
            continue;
        }
        tried += 1;
        let g = abgroup_from_relations(3, &m).unwrap();
        assert_eq!(g.order(), d.abs());
    }
}

#[test]
fn element_orders() {
    let pres = Presentation::new(1, &M::from_i64(&[&[84]]));
    assert_eq!(pres.element_order(&[big(0)]).unwrap(), big(1));
    assert_eq!(pres.element_order(&[big(1)]).unwrap(), big(84));
    assert_eq!(pres.element_order(&[big(14)]).unwrap(), big(6));
}

/// Hub-difference order in the subdivided {1,1,1,1,3,3} chain graph: the
/// component-group computation behind the order-14 cusp reduction.
#[test]
fn banana_graph_hub_difference_has_order_14() {
    // vertices: A, x1, x2, y1, y2 (hub B deleted); four unit edges A-B,
    // two chains A-x1-x2-B and A-y1-y2-B
    let reduced_laplacian = M::from_i64(&[
        &[6, -1, 0, -1, 0],
        &[-1, 2, -1, 0, 0],
        &[0, -1, 2, 0, 0],
        &[-1, 0, 0, 2, -1],
        &[0, 0, 0, -1, 2],
    ]);
    let pres = Presentation::new(5, &reduced_laplacian);
    let group = pres.group().unwrap();
    assert_eq!(group.order(), big(42));
    let hub_diff = [big(1), big(0), big(0), big(0), big(0)];
    assert_eq!(pres.element_order(&hub_diff).unwrap(), big(14));
}

#[test]
fn mod_p_rank() {
    let m = M::from_i64(&[&[2, 4], &[1, 3]]);
    assert_eq!(rank_mod_p(&m, 2), 1);
    assert_eq!(rank_mod_p(&m, 5), 2);
    assert_eq!(kernel_dim_mod_p(&m, 2), 1);
}

#[test]
fn generic_scalar_small_types() {
    // the kernel is generic: i64 and i128 behave identically to BigInt
    let m64 = Matrix::<i64>::from_i64(&[&[28, 0], &[0, 12], &[14, -6]]);
    let (d, _, _) = m64.snf();
    assert_eq!((d[(0, 0)], d[(1, 1)]), (2, 84));
    let m128 = Matrix::<i128>::from_i64(&[&[6, 0], &[0, 4]]);
    let (d, _, _) = m128.snf();
    assert_eq!((d[(0, 0)], d[(1, 1)]), (2, 12));
    assert_eq!(m128.det().unwrap(), 24);
}
