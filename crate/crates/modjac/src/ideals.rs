//! Ideal theory of the Hecke order: the Eisenstein ideal and its quotient,
//! Eisenstein maximal ideals, transfer of odd-index ideals to and from the
//! normalization, principal generators by the unit-padding construction,
//! multiplier rings as non-principality certificates, and Gorenstein socle
//! dimensions.
//!
//! Ideals are represented as full-rank sublattices of the order in
//! maximal-order coordinates, with Hermite-form bases; equality of ideals is
//! equality of HNF bases.

use crate::arith::{exact_sqrt, is_prime, legendre, primes_up_to};
use crate::hecke::{CompField, CompValue, EtaleElt, HeckeError, HeckeOrder, QuadElt};
use crate::modsym::ModSymSpace;
use crate::zlinalg::{kernel_dim_mod_p, Presentation};
use crate::{AbGroup, IntMatrix};
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IdealError {
    Hecke(HeckeError),
    /// The Eisenstein lattice kept changing when the prime bound doubled.
    NonStabilized {
        bound: u64,
    },
    /// Transfer requires an odd-index ideal.
    EvenIndex,
    /// Generator construction requires odd residue characteristic.
    EvenResidue,
    /// The unit-padding search failed to produce a verified generator.
    NoGenerator,
    /// Prime bound below the Sturm bound.
    BoundTooSmall {
        bound: u64,
        sturm: u64,
    },
}

impl fmt::Display for IdealError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IdealError::Hecke(e) => write!(f, "{e}"),
            IdealError::NonStabilized { bound } => {
                write!(f, "Eisenstein lattice not stable at doubled bound {bound}")
            }
            IdealError::EvenIndex => write!(f, "ideal transfer requires odd index"),
            IdealError::EvenResidue => {
                write!(
                    f,
                    "generator construction requires odd residue characteristic"
                )
            }
            IdealError::NoGenerator => write!(f, "no verified principal generator found"),
            IdealError::BoundTooSmall { bound, sturm } => {
                write!(f, "prime bound {bound} is below the Sturm bound {sturm}")
            }
        }
    }
}

impl std::error::Error for IdealError {}

impl From<HeckeError> for IdealError {
    fn from(e: HeckeError) -> Self {
        IdealError::Hecke(e)
    }
}

/// A finite-index sublattice of the order closed under multiplication, in
/// Hermite-form basis (maximal-order coordinates).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrderIdeal {
    pub basis: IntMatrix,
    /// Index [T : I].
    pub index: BigInt,
}

impl OrderIdeal {
    fn from_lattice(order: &HeckeOrder, lattice: IntMatrix) -> Self {
        let basis = lattice.hnf_basis();
        assert_eq!(
            basis.rows(),
            order.rank,
            "ideal lattice must have full rank"
        );
        let det_i = basis.lattice_index().expect("square");
        let det_t = order.lattice.lattice_index().expect("square");
        let (index, rem) = det_i.div_rem(&det_t);
        assert!(rem.is_zero(), "ideal is not contained in the order");
        OrderIdeal { basis, index }
    }

    pub fn contains(&self, coords: &[BigInt]) -> bool {
        self.basis.lattice_contains(coords)
    }
}

/// Span of `T * g` over a set of generators `g` (maximal-order coordinates):
/// the ideal of the order generated by them.
pub fn ideal_from_generators(order: &HeckeOrder, gens: &[Vec<BigInt>]) -> OrderIdeal {
    let mut rows = Vec::with_capacity(order.rank * gens.len());
    for g in gens {
        for i in 0..order.rank {
            rows.push(order.coords_mul(order.lattice.row(i), g));
        }
    }
    OrderIdeal::from_lattice(order, IntMatrix::from_rows(rows))
}

/// Verify T * I is contained in I.
pub fn is_ideal(order: &HeckeOrder, ideal: &OrderIdeal) -> bool {
    for i in 0..order.rank {
        for j in 0..ideal.basis.rows() {
            let prod = order.coords_mul(order.lattice.row(i), ideal.basis.row(j));
            if !ideal.contains(&prod) {
                return false;
            }
        }
    }
    true
}

/// Product ideal I * J (span of pairwise products).
pub fn ideal_product(order: &HeckeOrder, a: &OrderIdeal, b: &OrderIdeal) -> OrderIdeal {
    let mut rows = Vec::new();
    for i in 0..a.basis.rows() {
        for j in 0..b.basis.rows() {
            rows.push(order.coords_mul(a.basis.row(i), b.basis.row(j)));
        }
    }
    OrderIdeal::from_lattice(order, IntMatrix::from_rows(rows))
}

/// The Eisenstein ideal together with its quotient data.
#[derive(Clone, Debug)]
pub struct EisensteinData {
    pub ideal: OrderIdeal,
    /// T / E in invariant-factor form.
    pub quotient: AbGroup,
    /// Presentation of the quotient on the order basis, for order queries.
    presentation: Presentation<BigInt>,
    pub prime_bound: u64,
}

impl EisensteinData {
    /// The residue of an element in T/E when the quotient is cyclic
    /// generated by the identity: the least `v >= 0` with `e - v*1` in E.
    pub fn residue(&self, order: &HeckeOrder, e: &EtaleElt) -> Option<BigInt> {
        let coords = order.algebra.int_coords(e).ok()?;
        let one = order.algebra.int_coords(&order.algebra.one()).ok()?;
        let n = self.quotient.order();
        let mut v = BigInt::zero();
        while v < n {
            let shifted: Vec<BigInt> = coords.iter().zip(&one).map(|(c, o)| c - &v * o).collect();
            if self.ideal.contains(&shifted) {
                return Some(v);
            }
            v += 1;
        }
        None
    }

    /// Order of an element's class in T/E (coordinates on the order basis).
    pub fn class_order(&self, t_basis_coords: &[BigInt]) -> BigInt {
        self.presentation
            .element_order(t_basis_coords)
            .expect("finite quotient")
    }

    /// The action of a residue on the primary decomposition of a cyclic
    /// quotient: pairs (prime power q, balanced residue mod q). A residue
    /// of 29 on Z/84 acts as (1, -1, 1) on Z/4 x Z/3 x Z/7.
    pub fn component_action(&self, residue: &BigInt) -> Vec<(BigInt, BigInt)> {
        let n = self.quotient.order();
        crate::arith::factor(&n)
            .into_iter()
            .map(|(p, e)| {
                let q = BigInt::from(p).pow(e);
                let mut r = residue.mod_floor(&q);
                if &r + &r > q {
                    r -= &q; // balanced representative
                }
                (q, r)
            })
            .collect()
    }
}

/// Ideal generated by `T_l - (l + 1)` over primes `l <= prime_bound` away
/// from the level, verified stable when the bound doubles.
pub fn eisenstein_ideal(
    space: &ModSymSpace,
    order: &HeckeOrder,
    prime_bound: u64,
) -> Result<EisensteinData, IdealError> {
    if prime_bound < order.sturm_bound {
        return Err(IdealError::BoundTooSmall {
            bound: prime_bound,
            sturm: order.sturm_bound,
        });
    }
    let build = |bound: u64| -> Result<OrderIdeal, IdealError> {
        let mut gens = Vec::new();
        for l in primes_up_to(bound) {
            if space.level % l == 0 {
                continue;
            }
            let t = space.hecke_operator(l).map_err(HeckeError::from)?;
            let e = order.etale_of_matrix(&t.matrix)?;
            let shifted = e.sub(&order.algebra.scalar(l as i64 + 1));
            gens.push(order.algebra.int_coords(&shifted)?);
        }
        Ok(ideal_from_generators(order, &gens))
    };
    let at_bound = build(prime_bound)?;
    let doubled = build(2 * prime_bound)?;
    if at_bound != doubled {
        return Err(IdealError::NonStabilized {
            bound: 2 * prime_bound,
        });
    }
    let rel = ideal_in_order_coords(order, &at_bound);
    let presentation = Presentation::new(order.rank, &rel);
    let quotient = presentation.group().expect("finite quotient");
    Ok(EisensteinData {
        ideal: at_bound,
        quotient,
        presentation,
        prime_bound,
    })
}

/// Re-express an ideal's basis in coordinates on the order basis.
pub fn ideal_in_order_coords(order: &HeckeOrder, ideal: &OrderIdeal) -> IntMatrix {
    let rows: Vec<Vec<BigInt>> = (0..ideal.basis.rows())
        .map(|i| {
            order
                .lattice
                .solve_left(ideal.basis.row(i))
                .expect("ideal contained in order")
        })
        .collect();
    IntMatrix::from_rows(rows)
}

/// How a rational prime sits in one component of the etale algebra.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PrimeBehavior {
    Rational,
    Split,
    Inert,
    Ramified,
}

/// One maximal ideal with its certificates.
#[derive(Clone, Debug)]
pub struct MaximalIdealData {
    pub ideal: OrderIdeal,
    pub residue_char: u64,
    pub residue_degree: u32,
    pub eisenstein: bool,
    /// The unique etale component carrying the ideal, when there is one (the
    /// Eisenstein 2-ideal meets every component).
    pub component: Option<usize>,
    pub behavior: Option<PrimeBehavior>,
    /// Verified principal generator, when one was constructed.
    pub generator: Option<EtaleElt>,
}

/// The Eisenstein maximal ideals: one for each prime dividing #(T/E).
pub fn eisenstein_maximal_ideals(
    order: &HeckeOrder,
    eis: &EisensteinData,
) -> Vec<MaximalIdealData> {
    let n = eis.quotient.order();
    let mut out = Vec::new();
    for (p, _) in crate::arith::factor(&n) {
        let mut rows: Vec<Vec<BigInt>> = Vec::new();
        for i in 0..eis.ideal.basis.rows() {
            rows.push(eis.ideal.basis.row_vec(i));
        }
        for i in 0..order.rank {
            rows.push(
                order
                    .lattice
                    .row(i)
                    .iter()
                    .map(|x| x * BigInt::from(p))
                    .collect(),
            );
        }
        let ideal = OrderIdeal::from_lattice(order, IntMatrix::from_rows(rows));
        let degree = {
            let mut ix = ideal.index.clone();
            let mut f = 0u32;
            let pb = BigInt::from(p);
            while (&ix % &pb).is_zero() {
                ix /= &pb;
                f += 1;
            }
            assert!(
                ix.is_one(),
                "Eisenstein maximal ideal index is not a prime power"
            );
            f
        };
        assert_eq!(degree, 1, "Eisenstein residue fields here are prime fields");
        let incident = incident_components(order, &ideal);
        let (component, behavior) = if incident.len() == 1 {
            let k = incident[0];
            (Some(k), Some(prime_behavior(&order.algebra.comps[k], p)))
        } else {
            (None, None)
        };
        let generator = if p % 2 == 1 {
            principal_generator_for_ideal(order, &ideal, p)
                .ok()
                .map(|(g, _)| g)
        } else {
            None
        };
        out.push(MaximalIdealData {
            ideal,
            residue_char: p,
            residue_degree: degree,
            eisenstein: true,
            component,
            behavior,
            generator,
        });
    }
    out
}

fn prime_behavior(field: &CompField, p: u64) -> PrimeBehavior {
    match field {
        CompField::Rational => PrimeBehavior::Rational,
        CompField::Quadratic { d, .. } => {
            if p == 2 {
                // 2 ramifies unless d = 1 mod 4; then split iff d = 1 mod 8
                match d.rem_euclid(8) {
                    1 => PrimeBehavior::Split,
                    5 => PrimeBehavior::Inert,
                    _ => PrimeBehavior::Ramified,
                }
            } else if d.rem_euclid(p as i64) == 0 {
                PrimeBehavior::Ramified
            } else if legendre(*d, p) == 1 {
                PrimeBehavior::Split
            } else {
                PrimeBehavior::Inert
            }
        }
    }
}

/// The sublattice of T of elements whose k-th etale component vanishes.
pub fn component_kernel(order: &HeckeOrder, comp: usize) -> IntMatrix {
    let r = order.rank;
    let off = component_offset(order, comp);
    let deg = order.algebra.comps[comp].degree();
    let mut rows = Vec::new();
    for j in 0..r {
        if j < off || j >= off + deg {
            let mut unit = vec![BigInt::zero(); r];
            unit[j] = BigInt::one();
            rows.push(unit);
        }
    }
    IntMatrix::from_rows(rows).lattice_intersection(&order.lattice)
}

fn component_offset(order: &HeckeOrder, comp: usize) -> usize {
    order
        .algebra
        .comps
        .iter()
        .take(comp)
        .map(|c| c.degree())
        .sum()
}

/// Which components a maximal ideal lies on: those whose kernel it contains.
pub fn incident_components(order: &HeckeOrder, ideal: &OrderIdeal) -> Vec<usize> {
    (0..order.algebra.comps.len())
        .filter(|&k| {
            ideal
                .basis
                .lattice_contains_all(&component_kernel(order, k))
        })
        .collect()
}

/// Direction of an odd-ideal transfer.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TransferDirection {
    ToNormalization,
    ToOrder,
}

/// Transfer an odd-index ideal between the order and its normalization:
/// `I -> I * Tmax` and `J -> J meet T` are mutually inverse on odd ideals.
/// Input and output are lattices in maximal-order coordinates.
pub fn odd_ideal_transfer(
    order: &HeckeOrder,
    lattice: &IntMatrix,
    direction: TransferDirection,
) -> Result<IntMatrix, IdealError> {
    let r = order.rank;
    let det = lattice
        .hnf_basis()
        .lattice_index()
        .map_err(|_| IdealError::EvenIndex)?;
    let quotient_order = match direction {
        TransferDirection::ToNormalization => {
            let det_t = order.lattice.lattice_index().expect("square");
            let (ix, rem) = det.div_rem(&det_t);
            assert!(rem.is_zero(), "input is not a sublattice of the order");
            ix
        }
        TransferDirection::ToOrder => det,
    };
    if (&quotient_order % BigInt::from(2)).is_zero() {
        return Err(IdealError::EvenIndex);
    }
    match direction {
        TransferDirection::ToNormalization => {
            let mut rows = Vec::new();
            for i in 0..lattice.rows() {
                for j in 0..r {
                    let mut unit = vec![BigInt::zero(); r];
                    unit[j] = BigInt::one();
                    rows.push(order.coords_mul(lattice.row(i), &unit));
                }
            }
            Ok(IntMatrix::from_rows(rows).hnf_basis())
        }
        TransferDirection::ToOrder => Ok(lattice.lattice_intersection(&order.lattice)),
    }
}

/// A verified principal generator of an odd maximal ideal, by the case
/// construction: take a generator of the unique proper component prime in
/// the normalization and pad the other components with units until the
/// result lands in the order; verify theta * T equals the ideal by lattice
/// equality.
pub fn principal_generator_odd(
    order: &HeckeOrder,
    m: &MaximalIdealData,
) -> Result<(EtaleElt, String), IdealError> {
    if m.residue_char % 2 == 0 {
        return Err(IdealError::EvenResidue);
    }
    principal_generator_for_ideal(order, &m.ideal, m.residue_char)
}

fn principal_generator_for_ideal(
    order: &HeckeOrder,
    ideal: &OrderIdeal,
    p: u64,
) -> Result<(EtaleElt, String), IdealError> {
    if p % 2 == 0 {
        return Err(IdealError::EvenResidue);
    }
    let up = odd_ideal_transfer(order, &ideal.basis, TransferDirection::ToNormalization)?;
    let blocks = component_blocks(order, &up);
    // the unique proper component
    let mut proper: Option<usize> = None;
    for (k, b) in blocks.iter().enumerate() {
        if *b != IntMatrix::identity(b.rows()) {
            if proper.is_some() {
                return Err(IdealError::NoGenerator);
            }
            proper = Some(k);
        }
    }
    let Some(k) = proper else {
        return Err(IdealError::NoGenerator);
    };

    let pi_candidates: Vec<CompValue> = match &order.algebra.comps[k] {
        CompField::Rational => vec![CompValue::Rat(BigRational::from(BigInt::from(p)))],
        CompField::Quadratic { .. } => prime_candidates(order, k, p)?
            .into_iter()
            .filter(|q| principal_block(order, k, q) == blocks[k])
            .map(CompValue::Quad)
            .collect(),
    };
    if pi_candidates.is_empty() {
        return Err(IdealError::NoGenerator);
    }
    let paddings: Vec<Vec<CompValue>> = order
        .algebra
        .comps
        .iter()
        .enumerate()
        .map(|(j, c)| if j == k { vec![] } else { unit_candidates(c) })
        .collect();

    // for each candidate prime generator, walk the product of unit paddings
    // in a fixed order; primitive generators come before unit multiples, so
    // the search reproduces the classical padded forms
    for pi in &pi_candidates {
        let mut choice = vec![0usize; order.algebra.comps.len()];
        'paddings: loop {
            let mut comps = Vec::new();
            for (j, _) in order.algebra.comps.iter().enumerate() {
                if j == k {
                    comps.push(pi.clone());
                } else {
                    comps.push(paddings[j][choice[j]].clone());
                }
            }
            let theta = EtaleElt { comps };
            if let Ok(true) = order.membership(&theta) {
                let coords = order
                    .algebra
                    .int_coords(&theta)
                    .expect("member is integral");
                let generated = ideal_from_generators(order, &[coords]);
                if generated == *ideal {
                    return Ok((theta, describe_case(order, k, p)));
                }
            }
            // advance the padding choice
            let mut j = 0;
            loop {
                if j == choice.len() {
                    break 'paddings;
                }
                if paddings[j].is_empty() {
                    j += 1;
                    continue;
                }
                choice[j] += 1;
                if choice[j] < paddings[j].len() {
                    break;
                }
                choice[j] = 0;
                j += 1;
            }
        }
    }
    Err(IdealError::NoGenerator)
}

fn describe_case(order: &HeckeOrder, comp: usize, p: u64) -> String {
    match &order.algebra.comps[comp] {
        CompField::Rational => format!("rational component, p = {p}"),
        CompField::Quadratic { d, .. } => {
            let b = match prime_behavior(&order.algebra.comps[comp], p) {
                PrimeBehavior::Ramified => "ramified",
                PrimeBehavior::Split => "split",
                PrimeBehavior::Inert => "inert",
                PrimeBehavior::Rational => unreachable!(),
            };
            format!("quadratic component sqrt({d}), p = {p} {b}")
        }
    }
}

/// Unit paddings for one component, in search order: 1 first, then
/// ascending powers of the fundamental unit, then their negatives.
fn unit_candidates(field: &CompField) -> Vec<CompValue> {
    match field {
        CompField::Rational => vec![
            CompValue::Rat(BigRational::from(BigInt::one())),
            CompValue::Rat(BigRational::from(-BigInt::one())),
        ],
        CompField::Quadratic { d, .. } => {
            let u = fundamental_unit(*d);
            let mut acc = QuadElt::one(*d);
            let mut out = Vec::new();
            for _ in 0..4 {
                out.push(CompValue::Quad(acc.clone()));
                out.push(CompValue::Quad(acc.neg()));
                acc = acc.mul(&u);
            }
            // move 1 to the very front, -1 after the positive powers
            out.swap(1, 2);
            out
        }
    }
}

/// Fundamental unit of the maximal order of Q(sqrt d), by the smallest Pell
/// solution (x^2 - d y^2 = +-1, or +-4 on the half-integer basis).
pub fn fundamental_unit(d: i64) -> QuadElt {
    let half_basis = d.rem_euclid(4) == 1;
    let mut y: i64 = 1;
    loop {
        // half-integer solutions are smaller, so try the +-4 targets first
        for target in [-4i64, 4, -1, 1] {
            if target.abs() == 4 && !half_basis {
                continue;
            }
            let v = d * y * y + target;
            if v < 0 {
                continue;
            }
            if let Some(x) =
                exact_sqrt(&BigInt::from(v)).and_then(|r| r.to_string().parse::<i64>().ok())
            {
                if x == 0 {
                    continue;
                }
                if target.abs() == 4 {
                    if (x - y).rem_euclid(2) == 0 {
                        let two = BigRational::from(BigInt::from(2));
                        return QuadElt::new(
                            d,
                            BigRational::from(BigInt::from(x)) / &two,
                            BigRational::from(BigInt::from(y)) / &two,
                        );
                    }
                } else {
                    return QuadElt::from_ints(d, x, y);
                }
            }
        }
        y += 1;
        assert!(
            y < 1_000_000,
            "fundamental unit search overflow for d = {d}"
        );
    }
}

/// Per-component blocks of a lattice in the normalization (which is a
/// product of component lattices for any ideal of the normalization).
fn component_blocks(order: &HeckeOrder, lattice: &IntMatrix) -> Vec<IntMatrix> {
    let mut out = Vec::new();
    let mut off = 0;
    for c in &order.algebra.comps {
        let deg = c.degree();
        let mut rows = Vec::new();
        for i in 0..lattice.rows() {
            let row = lattice.row(i);
            let inside = row
                .iter()
                .enumerate()
                .all(|(j, x)| (off..off + deg).contains(&j) || x.is_zero());
            let nonzero = row[off..off + deg].iter().any(|x| !x.is_zero());
            if inside && nonzero {
                rows.push(row[off..off + deg].to_vec());
            }
        }
        assert_eq!(
            rows.len(),
            deg,
            "ideal of the normalization must split as a product of components"
        );
        out.push(IntMatrix::from_rows(rows).hnf_basis());
        off += deg;
    }
    out
}

/// Small solutions of N(x + y sqrt d) = +-p together with conjugates and
/// unit multiples: the candidate generators of primes over p in a quadratic
/// component.
fn prime_candidates(order: &HeckeOrder, comp: usize, p: u64) -> Result<Vec<QuadElt>, IdealError> {
    let CompField::Quadratic { d, half_basis } = &order.algebra.comps[comp] else {
        return Err(IdealError::NoGenerator);
    };
    let mut raw: Vec<QuadElt> = Vec::new();
    if d.rem_euclid(p as i64) == 0 {
        raw.push(QuadElt::from_ints(*d, 0, 1)); // sqrt(d)
    } else if legendre(*d, p) == -1 {
        raw.push(QuadElt::from_ints(*d, p as i64, 0));
    } else {
        let scale = if *half_basis { 4i64 } else { 1 };
        'outer: for y in 1..=(4 * p as i64 + 4) {
            for sign in [1i64, -1] {
                let v = scale * sign * (p as i64) + d * y * y;
                if v < 0 {
                    continue;
                }
                if let Some(x) =
                    exact_sqrt(&BigInt::from(v)).and_then(|r| r.to_string().parse::<i64>().ok())
                {
                    if *half_basis {
                        if (x - y).rem_euclid(2) == 0 {
                            let two = BigRational::from(BigInt::from(2));
                            raw.push(QuadElt::new(
                                *d,
                                BigRational::from(BigInt::from(x)) / &two,
                                BigRational::from(BigInt::from(y)) / &two,
                            ));
                            break 'outer;
                        }
                    } else {
                        raw.push(QuadElt::from_ints(*d, x, y));
                        break 'outer;
                    }
                }
            }
        }
        if raw.is_empty() {
            return Err(IdealError::NoGenerator);
        }
    }
    let u = fundamental_unit(*d);
    let mut variants = Vec::new();
    for base in raw.iter().flat_map(|x| [x.clone(), x.conj()]) {
        let mut acc = base.clone();
        for _ in 0..4 {
            variants.push(acc.clone());
            acc = acc.mul(&u);
        }
    }
    Ok(variants)
}

/// The principal lattice (pi) inside one quadratic component, as a 2x2 HNF
/// block on that component's integral basis.
fn principal_block(order: &HeckeOrder, comp: usize, pi: &QuadElt) -> IntMatrix {
    let off = component_offset(order, comp);
    let basis1 = match &order.algebra.comps[comp] {
        CompField::Quadratic { d, half_basis } => {
            if *half_basis {
                let two = BigRational::from(BigInt::from(2));
                QuadElt::new(
                    *d,
                    BigRational::from(BigInt::one()) / &two,
                    BigRational::from(BigInt::one()) / &two,
                )
            } else {
                QuadElt::from_ints(*d, 0, 1)
            }
        }
        CompField::Rational => unreachable!(),
    };
    let embed = |q: &QuadElt| -> Vec<BigInt> {
        let comps = order
            .algebra
            .comps
            .iter()
            .enumerate()
            .map(|(j, c)| {
                if j == comp {
                    CompValue::Quad(q.clone())
                } else {
                    match c {
                        CompField::Rational => CompValue::Rat(BigRational::zero()),
                        CompField::Quadratic { d, .. } => CompValue::Quad(QuadElt::zero(*d)),
                    }
                }
            })
            .collect();
        let full = order
            .algebra
            .int_coords(&EtaleElt { comps })
            .expect("integral");
        full[off..off + 2].to_vec()
    };
    IntMatrix::from_rows(vec![embed(pi), embed(&pi.mul(&basis1))]).hnf_basis()
}

/// Multiplier ring (I : I) = { x in Tmax : x I contained in I } as a lattice
/// in maximal-order coordinates. If the lattice strictly contains the order,
/// the ideal cannot be principal; a witness element is attached.
#[derive(Clone, Debug)]
pub struct MultiplierData {
    pub lattice: IntMatrix,
    pub strictly_contains_order: bool,
    pub witness: Option<Vec<BigInt>>,
}

pub fn multiplier_ring(order: &HeckeOrder, ideal: &OrderIdeal) -> MultiplierData {
    let r = order.rank;
    let k = ideal.basis.rows();
    // unknowns (x, y_1, ..., y_k); conditions x * M_j = y_j * H for each j,
    // where M_j is multiplication by the j-th ideal basis element and H the
    // ideal basis
    let mut big = IntMatrix::zero(r + k * r, k * r);
    for j in 0..k {
        let mj = order
            .algebra
            .mult_matrix(&order.algebra.from_int_coords(ideal.basis.row(j)))
            .expect("integral");
        for i in 0..r {
            for c in 0..r {
                big[(i, j * r + c)] = mj[(i, c)].clone();
            }
        }
        for i in 0..r {
            for c in 0..r {
                big[(r + j * r + i, j * r + c)] = -ideal.basis[(i, c)].clone();
            }
        }
    }
    let ker = big.kernel();
    let rows: Vec<Vec<BigInt>> = (0..ker.rows()).map(|i| ker.row(i)[..r].to_vec()).collect();
    let lattice = IntMatrix::from_rows(rows).hnf_basis();
    assert!(
        lattice.lattice_contains_all(&order.lattice),
        "multiplier ring must contain the order"
    );
    let strictly = !order.lattice.lattice_contains_all(&lattice);
    let witness = if strictly {
        (0..lattice.rows())
            .map(|i| lattice.row_vec(i))
            .find(|row| !order.lattice.lattice_contains(row))
    } else {
        None
    };
    MultiplierData {
        lattice,
        strictly_contains_order: strictly,
        witness,
    }
}

/// Dimension over T/m of the annihilator of m in T/pT. Value 1 certifies a
/// Gorenstein completion at m; 2 or more certifies non-Gorenstein.
pub fn socle_dimension(order: &HeckeOrder, m: &MaximalIdealData) -> u32 {
    let p = m.residue_char as i64;
    let r = order.rank;
    let k = m.ideal.basis.rows();
    // multiplication by each ideal basis element, written on the order basis
    let mut stacked = IntMatrix::zero(r, r * k);
    for j in 0..k {
        for i in 0..r {
            let prod = order.coords_mul(order.lattice.row(i), m.ideal.basis.row(j));
            let in_order = order.lattice.solve_left(&prod).expect("T-stable");
            for c in 0..r {
                stacked[(i, j * r + c)] = in_order[c].clone();
            }
        }
    }
    let dim = kernel_dim_mod_p(&stacked, p) as u32;
    assert!(dim % m.residue_degree == 0);
    dim / m.residue_degree
}

/// All maximal ideals of the order above an odd prime p, constructed by
/// factoring p in the normalization and transferring down.
pub fn maximal_ideals_above(
    order: &HeckeOrder,
    p: u64,
) -> Result<Vec<MaximalIdealData>, IdealError> {
    assert!(p % 2 == 1 && is_prime(p), "needs an odd prime");
    let r = order.rank;
    let mut out = Vec::new();
    for (k, c) in order.algebra.comps.iter().enumerate() {
        let off = component_offset(order, k);
        let deg = c.degree();
        let blocks: Vec<(IntMatrix, u32, PrimeBehavior)> = match c {
            CompField::Rational => vec![(
                IntMatrix::from_rows(vec![vec![BigInt::from(p)]]),
                1,
                PrimeBehavior::Rational,
            )],
            CompField::Quadratic { d, .. } => match prime_behavior(c, p) {
                PrimeBehavior::Ramified => {
                    let pi = QuadElt::from_ints(*d, 0, 1);
                    vec![(principal_block(order, k, &pi), 1, PrimeBehavior::Ramified)]
                }
                PrimeBehavior::Inert => {
                    let m = IntMatrix::from_rows(vec![
                        vec![BigInt::from(p), BigInt::zero()],
                        vec![BigInt::zero(), BigInt::from(p)],
                    ]);
                    vec![(m, 2, PrimeBehavior::Inert)]
                }
                PrimeBehavior::Split => {
                    let mut seen: Vec<IntMatrix> = Vec::new();
                    for q in prime_candidates(order, k, p)? {
                        let b = principal_block(order, k, &q);
                        if !seen.contains(&b) {
                            seen.push(b);
                        }
                    }
                    assert_eq!(seen.len(), 2, "split prime must give two distinct blocks");
                    seen.into_iter()
                        .map(|b| (b, 1, PrimeBehavior::Split))
                        .collect()
                }
                PrimeBehavior::Rational => unreachable!(),
            },
        };
        for (block, degree, behavior) in blocks {
            let mut rows = Vec::new();
            for j in 0..r {
                if j < off || j >= off + deg {
                    let mut unit = vec![BigInt::zero(); r];
                    unit[j] = BigInt::one();
                    rows.push(unit);
                }
            }
            for i in 0..block.rows() {
                let mut row = vec![BigInt::zero(); r];
                for (c2, x) in block.row(i).iter().enumerate() {
                    row[off + c2] = x.clone();
                }
                rows.push(row);
            }
            let up = IntMatrix::from_rows(rows).hnf_basis();
            let down = odd_ideal_transfer(order, &up, TransferDirection::ToOrder)?;
            let ideal = OrderIdeal::from_lattice(order, down);
            out.push(MaximalIdealData {
                ideal,
                residue_char: p,
                residue_degree: degree,
                eisenstein: false,
                component: Some(k),
                behavior: Some(behavior),
                generator: None,
            });
        }
    }
    Ok(out)
}

/// Verify that the quotient by a candidate maximal ideal is a field: the
/// index must be p^degree and the multiplication table of the quotient ring
/// must have no zero divisors. Prime index is automatic; for higher degree
/// the cosets are enumerated through the Smith form and multiplied out.
pub fn residue_ring_is_field(order: &HeckeOrder, m: &MaximalIdealData) -> bool {
    let p = BigInt::from(m.residue_char);
    let size = p.pow(m.residue_degree);
    if m.ideal.index != size {
        return false;
    }
    if m.residue_degree == 1 {
        return true; // Z/p
    }
    // coset representatives: lift Smith-coordinate tuples back through the
    // right transform of the relation presentation
    let rel = ideal_in_order_coords(order, &m.ideal);
    let (d, _, r) = rel.snf();
    let rank = order.rank;
    let diag: Vec<BigInt> = (0..rank).map(|i| d[(i, i)].clone()).collect();
    // enumerate tuples y with 0 <= y_i < d_i; representative x solves
    // x * r = y, i.e. x = y * r^{-1}; build r^{-1} by solving unit rows
    let rinv_rows: Vec<Vec<BigInt>> = (0..rank)
        .map(|i| {
            let mut unit = vec![BigInt::zero(); rank];
            unit[i] = BigInt::one();
            r.solve_left(&unit).expect("unimodular")
        })
        .collect();
    let rinv = IntMatrix::from_rows(rinv_rows);
    let mut reps: Vec<Vec<BigInt>> = Vec::new();
    let mut tuple = vec![BigInt::zero(); rank];
    'enumerate: loop {
        reps.push(rinv.apply_row(&tuple));
        for i in 0..rank {
            tuple[i] += 1;
            if tuple[i] < diag[i] {
                continue 'enumerate;
            }
            tuple[i] = BigInt::zero();
        }
        break;
    }
    assert_eq!(BigInt::from(reps.len()), size);
    // nonzero * nonzero must be nonzero in the quotient
    let in_ideal = |x: &[BigInt]| -> bool {
        let max_coords = order.lattice.transpose().apply_row(x);
        m.ideal.contains(&max_coords)
    };
    for a in &reps {
        if in_ideal(a) {
            continue;
        }
        for b in &reps {
            if in_ideal(b) {
                continue;
            }
            let am = order.lattice.transpose().apply_row(a);
            let bm = order.lattice.transpose().apply_row(b);
            let prod = order.coords_mul(&am, &bm);
            if order.lattice.solve_left(&prod).map(|v| in_ideal(&v)) != Some(false) {
                return false;
            }
        }
    }
    true
}

/// Spec(T) incidence data: which irreducible components each maximal ideal
/// lies on, with the completion behavior of its prime.
#[derive(Clone, Debug)]
pub struct SpectrumEntry {
    pub residue_char: u64,
    pub incident_components: Vec<usize>,
    pub component_names: Vec<String>,
    pub completion: Option<String>,
}

pub fn component_name(field: &CompField) -> String {
    match field {
        CompField::Rational => "Z".to_string(),
        CompField::Quadratic { d, half_basis } => {
            if *half_basis {
                format!("Z[(1+sqrt{d})/2]")
            } else {
                format!("Z[sqrt{d}]")
            }
        }
    }
}

pub fn spectrum_report(order: &HeckeOrder, ideals: &[MaximalIdealData]) -> Vec<SpectrumEntry> {
    ideals
        .iter()
        .map(|m| {
            let incident = incident_components(order, &m.ideal);
            let completion = match (&m.component, &m.behavior) {
                (Some(_), Some(PrimeBehavior::Rational | PrimeBehavior::Split)) => {
                    Some(format!("Z_{}", m.residue_char))
                }
                (Some(k), Some(PrimeBehavior::Ramified)) => match &order.algebra.comps[*k] {
                    CompField::Quadratic { d, .. } => {
                        Some(format!("Z_{}[sqrt{}]", m.residue_char, d))
                    }
                    CompField::Rational => None,
                },
                (Some(_), Some(PrimeBehavior::Inert)) => {
                    Some(format!("unramified quadratic over Z_{}", m.residue_char))
                }
                _ => None,
            };
            SpectrumEntry {
                residue_char: m.residue_char,
                incident_components: incident.clone(),
                component_names: incident
                    .iter()
                    .map(|&k| component_name(&order.algebra.comps[k]))
                    .collect(),
                completion,
            }
        })
        .collect()
}
