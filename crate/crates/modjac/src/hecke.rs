//! The Hecke order of a two-prime level: a rank-`g` ring of integer matrices
//! on the cuspidal lattice, reconstructed as a lattice in its etale algebra
//! `Q x Q(sqrt(d_1)) x ...` with exact arithmetic in both representations.
//!
//! The splitting is pinned by a generator (the first Hecke operator with
//! squarefree characteristic polynomial on the order): components are
//! ordered rational-first then by ascending discriminant, and each `sqrt(d)`
//! takes the positive sign in the generator's image. For level 65 this makes
//! the coordinates directly comparable with the classical tables:
//! `T_2 = (-1, -1+sqrt2, sqrt3)`.

use crate::arith::{exact_sqrt, factor, is_prime};
use crate::modsym::{ModSymError, ModSymSpace};
use crate::zlinalg::QMatrix;
use crate::IntMatrix;
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum HeckeError {
    ModSym(ModSymError),
    /// The operator lattice kept growing past the Sturm bound.
    NonStabilizedLattice {
        bound: u64,
    },
    /// The splitting polynomial is not a product of distinct linear and
    /// real-quadratic factors.
    SplittingShape(String),
    /// Element is not integral over the maximal order.
    NotIntegral,
    /// Element does not lie in the order lattice.
    NotInLattice,
    /// No subset of Hecke operators forms a Z-basis below the Sturm bound.
    NoOperatorBasis,
}

impl fmt::Display for HeckeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HeckeError::ModSym(e) => write!(f, "{e}"),
            HeckeError::NonStabilizedLattice { bound } => {
                write!(f, "operator lattice not stable at doubled bound {bound}")
            }
            HeckeError::SplittingShape(s) => write!(f, "unexpected splitting: {s}"),
            HeckeError::NotIntegral => write!(f, "element is not integral"),
            HeckeError::NotInLattice => write!(f, "element is not in the order"),
            HeckeError::NoOperatorBasis => write!(f, "no Hecke-operator basis found"),
        }
    }
}

impl std::error::Error for HeckeError {}

impl From<ModSymError> for HeckeError {
    fn from(e: ModSymError) -> Self {
        HeckeError::ModSym(e)
    }
}

/// Element `a + b sqrt(d)` of a real quadratic field.
#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuadElt {
    pub d: i64,
    pub a: BigRational,
    pub b: BigRational,
}

impl QuadElt {
    pub fn new(d: i64, a: BigRational, b: BigRational) -> Self {
        QuadElt { d, a, b }
    }

    pub fn from_ints(d: i64, a: i64, b: i64) -> Self {
        QuadElt {
            d,
            a: rat(a),
            b: rat(b),
        }
    }

    pub fn zero(d: i64) -> Self {
        Self::from_ints(d, 0, 0)
    }

    pub fn one(d: i64) -> Self {
        Self::from_ints(d, 1, 0)
    }

    pub fn add(&self, o: &Self) -> Self {
        assert_eq!(self.d, o.d);
        QuadElt {
            d: self.d,
            a: &self.a + &o.a,
            b: &self.b + &o.b,
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        assert_eq!(self.d, o.d);
        QuadElt {
            d: self.d,
            a: &self.a - &o.a,
            b: &self.b - &o.b,
        }
    }

    pub fn mul(&self, o: &Self) -> Self {
        assert_eq!(self.d, o.d);
        let d = BigRational::from(BigInt::from(self.d));
        QuadElt {
            d: self.d,
            a: &self.a * &o.a + &d * &self.b * &o.b,
            b: &self.a * &o.b + &self.b * &o.a,
        }
    }

    pub fn neg(&self) -> Self {
        QuadElt {
            d: self.d,
            a: -self.a.clone(),
            b: -self.b.clone(),
        }
    }

    pub fn conj(&self) -> Self {
        QuadElt {
            d: self.d,
            a: self.a.clone(),
            b: -self.b.clone(),
        }
    }

    /// Field norm a^2 - d b^2.
    pub fn norm(&self) -> BigRational {
        let d = BigRational::from(BigInt::from(self.d));
        &self.a * &self.a - d * &self.b * &self.b
    }

    pub fn trace(&self) -> BigRational {
        &self.a + &self.a
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }
}

impl fmt::Debug for QuadElt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for QuadElt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.b.is_zero() {
            return write!(f, "{}", self.a);
        }
        if self.a.is_zero() {
            return write!(f, "{}*sqrt{}", self.b, self.d);
        }
        write!(f, "{} + {}*sqrt{}", self.a, self.b, self.d)
    }
}

/// One component of an element of the etale algebra.
#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum CompValue {
    Rat(BigRational),
    Quad(QuadElt),
}

impl fmt::Debug for CompValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CompValue::Rat(x) => write!(f, "{x}"),
            CompValue::Quad(x) => write!(f, "{x}"),
        }
    }
}

/// Element of the etale algebra, componentwise.
#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EtaleElt {
    pub comps: Vec<CompValue>,
}

impl fmt::Debug for EtaleElt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.comps.iter().map(|c| format!("{c:?}")).collect();
        write!(f, "({})", parts.join(", "))
    }
}

impl fmt::Display for EtaleElt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

impl EtaleElt {
    pub fn add(&self, o: &Self) -> Self {
        self.zip(o, QuadElt::add, |a, b| a + b)
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.zip(o, QuadElt::sub, |a, b| a - b)
    }

    pub fn mul(&self, o: &Self) -> Self {
        self.zip(o, QuadElt::mul, |a, b| a * b)
    }

    fn zip(
        &self,
        o: &Self,
        fq: impl Fn(&QuadElt, &QuadElt) -> QuadElt,
        fr: impl Fn(&BigRational, &BigRational) -> BigRational,
    ) -> Self {
        assert_eq!(self.comps.len(), o.comps.len());
        let comps = self
            .comps
            .iter()
            .zip(&o.comps)
            .map(|(x, y)| match (x, y) {
                (CompValue::Rat(a), CompValue::Rat(b)) => CompValue::Rat(fr(a, b)),
                (CompValue::Quad(a), CompValue::Quad(b)) => CompValue::Quad(fq(a, b)),
                _ => panic!("component mismatch"),
            })
            .collect();
        EtaleElt { comps }
    }

    /// Product of the component norms (each quadratic component contributes
    /// its degree-2 field norm).
    pub fn norm(&self) -> BigRational {
        let mut n = BigRational::one();
        for c in &self.comps {
            match c {
                CompValue::Rat(x) => n *= x,
                CompValue::Quad(x) => n *= x.norm(),
            }
        }
        n
    }

    pub fn trace(&self) -> BigRational {
        let mut t = BigRational::zero();
        for c in &self.comps {
            match c {
                CompValue::Rat(x) => t += x,
                CompValue::Quad(x) => t += x.trace(),
            }
        }
        t
    }

    pub fn is_zero(&self) -> bool {
        self.comps.iter().all(|c| match c {
            CompValue::Rat(x) => x.is_zero(),
            CompValue::Quad(x) => x.is_zero(),
        })
    }
}

/// Shape of one component field of the etale algebra.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CompField {
    Rational,
    /// Real quadratic field Q(sqrt(d)), d squarefree. `half_basis` marks
    /// d = 1 mod 4, where the maximal order is Z[(1+sqrt(d))/2].
    Quadratic {
        d: i64,
        half_basis: bool,
    },
}

impl CompField {
    pub fn degree(&self) -> usize {
        match self {
            CompField::Rational => 1,
            CompField::Quadratic { .. } => 2,
        }
    }

    pub fn disc(&self) -> i64 {
        match self {
            CompField::Rational => 1,
            CompField::Quadratic { d, half_basis } => {
                if *half_basis {
                    *d
                } else {
                    4 * d
                }
            }
        }
    }
}

/// The etale algebra `T tensor Q` with a fixed component order and the
/// integral basis of its maximal order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EtaleAlgebra {
    pub comps: Vec<CompField>,
}

impl EtaleAlgebra {
    pub fn rank(&self) -> usize {
        self.comps.iter().map(|c| c.degree()).sum()
    }

    /// Discriminant of the maximal order.
    pub fn disc_max(&self) -> BigInt {
        self.comps.iter().map(|c| BigInt::from(c.disc())).product()
    }

    pub fn zero(&self) -> EtaleElt {
        let comps = self
            .comps
            .iter()
            .map(|c| match c {
                CompField::Rational => CompValue::Rat(BigRational::zero()),
                CompField::Quadratic { d, .. } => CompValue::Quad(QuadElt::zero(*d)),
            })
            .collect();
        EtaleElt { comps }
    }

    pub fn one(&self) -> EtaleElt {
        let comps = self
            .comps
            .iter()
            .map(|c| match c {
                CompField::Rational => CompValue::Rat(BigRational::one()),
                CompField::Quadratic { d, .. } => CompValue::Quad(QuadElt::one(*d)),
            })
            .collect();
        EtaleElt { comps }
    }

    pub fn scalar(&self, n: i64) -> EtaleElt {
        let comps = self
            .comps
            .iter()
            .map(|c| match c {
                CompField::Rational => CompValue::Rat(rat(n)),
                CompField::Quadratic { d, .. } => CompValue::Quad(QuadElt::from_ints(*d, n, 0)),
            })
            .collect();
        EtaleElt { comps }
    }

    /// Rational coordinates of `e` on the integral basis of the maximal
    /// order: 1 per rational component; (1, sqrt d) or (1, (1+sqrt d)/2) per
    /// quadratic component.
    pub fn coords(&self, e: &EtaleElt) -> Vec<BigRational> {
        let mut out = Vec::with_capacity(self.rank());
        for (c, v) in self.comps.iter().zip(&e.comps) {
            match (c, v) {
                (CompField::Rational, CompValue::Rat(x)) => out.push(x.clone()),
                (CompField::Quadratic { half_basis, .. }, CompValue::Quad(x)) => {
                    if *half_basis {
                        // x + y sqrt(d) = (x - y) + 2y * (1+sqrt(d))/2
                        out.push(&x.a - &x.b);
                        out.push(&x.b + &x.b);
                    } else {
                        out.push(x.a.clone());
                        out.push(x.b.clone());
                    }
                }
                _ => panic!("component mismatch"),
            }
        }
        out
    }

    /// Integer coordinates on the maximal-order basis, if integral.
    pub fn int_coords(&self, e: &EtaleElt) -> Result<Vec<BigInt>, HeckeError> {
        self.coords(e)
            .into_iter()
            .map(|x| {
                if x.denom().is_one() {
                    Ok(x.numer().clone())
                } else {
                    Err(HeckeError::NotIntegral)
                }
            })
            .collect()
    }

    /// Element from integer coordinates on the maximal-order basis.
    pub fn from_int_coords(&self, coords: &[BigInt]) -> EtaleElt {
        assert_eq!(coords.len(), self.rank());
        let mut comps = Vec::new();
        let mut i = 0;
        for c in &self.comps {
            match c {
                CompField::Rational => {
                    comps.push(CompValue::Rat(BigRational::from(coords[i].clone())));
                    i += 1;
                }
                CompField::Quadratic { d, half_basis } => {
                    let (u, v) = (coords[i].clone(), coords[i + 1].clone());
                    i += 2;
                    let (a, b) = if *half_basis {
                        // u + v (1+sqrt d)/2
                        let half = BigRational::new(BigInt::one(), BigInt::from(2));
                        (
                            BigRational::from(u) + BigRational::from(v.clone()) * &half,
                            BigRational::from(v) * &half,
                        )
                    } else {
                        (BigRational::from(u), BigRational::from(v))
                    };
                    comps.push(CompValue::Quad(QuadElt::new(*d, a, b)));
                }
            }
        }
        EtaleElt { comps }
    }

    /// Matrix of multiplication by an integral element on the maximal-order
    /// basis (row convention).
    pub fn mult_matrix(&self, e: &EtaleElt) -> Result<IntMatrix, HeckeError> {
        let r = self.rank();
        let mut rows = Vec::with_capacity(r);
        for j in 0..r {
            let mut unit = vec![BigInt::zero(); r];
            unit[j] = BigInt::one();
            let basis_elt = self.from_int_coords(&unit);
            rows.push(self.int_coords(&basis_elt.mul(e))?);
        }
        Ok(IntMatrix::from_rows(rows))
    }

    /// Norm of an integral element, computed both as the determinant of the
    /// regular representation and as the product of component norms; the two
    /// routes must agree.
    pub fn norm_form(&self, e: &EtaleElt) -> Result<BigInt, HeckeError> {
        let det = self.mult_matrix(e)?.det().expect("square");
        let prod = e.norm();
        assert!(prod.denom().is_one(), "integral element has integer norm");
        assert_eq!(det, prod.numer().clone(), "norm routes disagree");
        Ok(det)
    }
}

/// One element of the Hecke order, carried in both linked representations.
#[derive(Clone, Debug)]
pub struct HeckeElement {
    pub index: Option<u64>,
    /// Matrix on the cuspidal lattice.
    pub matrix: IntMatrix,
    /// Coordinates in the etale algebra.
    pub etale: EtaleElt,
}

/// The Hecke order `T` as a lattice in its etale algebra.
#[derive(Clone, Debug)]
pub struct HeckeOrder {
    pub level: u64,
    pub algebra: EtaleAlgebra,
    pub rank: usize,
    /// Indices n of the Hecke operators forming the distinguished Z-basis.
    pub basis_indices: Vec<u64>,
    pub basis: Vec<HeckeElement>,
    /// Coordinates of the basis elements on the maximal-order basis.
    pub basis_coords: IntMatrix,
    /// HNF basis of the order lattice in maximal-order coordinates.
    pub lattice: IntMatrix,
    /// Index of the order in the maximal order.
    pub index_in_max: BigInt,
    /// Discriminant of the trace form.
    pub disc: BigInt,
    pub disc_max: BigInt,
    pub sturm_bound: u64,
    /// Index of the splitting generator and the cuspidal matrices of its
    /// powers, for expressing arbitrary operators as polynomials in it.
    gen_index: u64,
    gen_powers: Vec<IntMatrix>,
    gen_charpoly: Vec<BigInt>,
}

fn rat(n: i64) -> BigRational {
    BigRational::from(BigInt::from(n))
}

/// Reconstruct the Hecke order from a built modular symbols space.
///
/// The lattice is generated by `T_1..T_B` with `B` the weight-2 Sturm bound
/// `ceil(mu/12 * 2)`; stabilization is verified at `2B`.
pub fn build_order(space: &ModSymSpace) -> Result<HeckeOrder, HeckeError> {
    let mu = (space.p + 1) * (space.q + 1);
    let sturm = mu.div_ceil(6);
    let g = space.genus();

    // operator matrices up to the doubled bound
    let mut mats = Vec::with_capacity(2 * sturm as usize);
    for n in 1..=2 * sturm {
        mats.push(space.hecke_operator(n)?.matrix);
    }
    let flat = |ms: &[IntMatrix]| -> IntMatrix {
        IntMatrix::from_rows(
            ms.iter()
                .map(|m| {
                    (0..g * 2)
                        .flat_map(|i| m.row_vec(i))
                        .collect::<Vec<BigInt>>()
                })
                .collect(),
        )
    };
    let lat_b = flat(&mats[..sturm as usize]).hnf_basis();
    let lat_2b = flat(&mats).hnf_basis();
    if lat_b != lat_2b {
        return Err(HeckeError::NonStabilizedLattice { bound: 2 * sturm });
    }
    if lat_b.rows() != g {
        return Err(HeckeError::SplittingShape(format!(
            "operator lattice has rank {}, expected genus {}",
            lat_b.rows(),
            g
        )));
    }

    // splitting generator: smallest prime index whose regular representation
    // has squarefree characteristic polynomial
    type GeneratorData = (u64, Vec<IntMatrix>, Vec<BigInt>, Vec<Vec<BigInt>>);
    let flat_elt =
        |m: &IntMatrix| -> Vec<BigInt> { (0..g * 2).flat_map(|i| m.row_vec(i)).collect() };
    let mut gen: Option<GeneratorData> = None;
    for n in 2..=sturm {
        if !is_prime(n) {
            continue;
        }
        let t = &mats[n as usize - 1];
        // regular representation on the operator lattice
        let mut reg_rows = Vec::with_capacity(g);
        let mut ok = true;
        for i in 0..g {
            let row = IntMatrix::from_rows(vec![lat_b.row_vec(i)]);
            // row is a flattened matrix; unflatten, multiply by t, reflatten
            let mi = unflatten(&row.row_vec(0), 2 * g);
            let prod = flat_elt(&mi.mul(t));
            match lat_b.solve_left(&prod) {
                Some(x) => reg_rows.push(x),
                None => {
                    ok = false;
                    break;
                }
            }
        }
        if !ok {
            continue;
        }
        let reg = IntMatrix::from_rows(reg_rows);
        let cp = reg.charpoly().expect("square");
        if let Ok(factors) = factor_into_small_irreducibles(&cp) {
            // distinct factors of degree <= 2: t generates the algebra
            let powers: Vec<IntMatrix> = {
                let mut ps = Vec::with_capacity(g);
                let mut cur = IntMatrix::identity(2 * g);
                for _ in 0..g {
                    ps.push(cur.clone());
                    cur = cur.mul(t);
                }
                ps
            };
            gen = Some((n, powers, cp, factors));
            break;
        }
    }
    let Some((gen_index, gen_powers, gen_charpoly, factors)) = gen else {
        return Err(HeckeError::SplittingShape(
            "no squarefree generator found".into(),
        ));
    };

    // component fields: rational components first (ascending root), then
    // quadratic components by ascending squarefree discriminant
    let mut rational_roots: Vec<BigInt> = Vec::new();
    let mut quads: Vec<(i64, BigInt, BigInt)> = Vec::new(); // (d, B, m): root (-B + m sqrt d)/2
    for f in &factors {
        match f.len() {
            2 => rational_roots.push(-f[0].clone()),
            3 => {
                let b = f[1].clone();
                let c = f[0].clone();
                let delta = &b * &b - BigInt::from(4) * &c;
                if !delta.is_positive() {
                    return Err(HeckeError::SplittingShape(format!(
                        "non-totally-real quadratic factor disc {delta}"
                    )));
                }
                let (d, m) = squarefree_part(&delta);
                quads.push((d, b, m));
            }
            _ => {
                return Err(HeckeError::SplittingShape(format!(
                    "irreducible factor of degree {}",
                    f.len() - 1
                )))
            }
        }
    }
    rational_roots.sort();
    quads.sort_by_key(|(d, _, _)| *d);
    let mut comps: Vec<CompField> = rational_roots.iter().map(|_| CompField::Rational).collect();
    for (d, _, _) in &quads {
        comps.push(CompField::Quadratic {
            d: *d,
            half_basis: d.rem_euclid(4) == 1,
        });
    }
    let algebra = EtaleAlgebra { comps };

    // image of the generator in each component pins the embeddings
    let mut gen_comps: Vec<CompValue> = rational_roots
        .iter()
        .map(|r| CompValue::Rat(BigRational::from(r.clone())))
        .collect();
    for (d, b, m) in &quads {
        let half = BigRational::new(BigInt::one(), BigInt::from(2));
        gen_comps.push(CompValue::Quad(QuadElt::new(
            *d,
            BigRational::from(-b.clone()) * &half,
            BigRational::from(m.clone()) * &half,
        )));
    }
    let gen_etale = EtaleElt { comps: gen_comps };

    let order_shell = OrderShell {
        algebra: algebra.clone(),
        gen_powers: gen_powers.clone(),
        gen_etale,
        rank: g,
    };

    // coordinates of T_1..T_B on the maximal-order basis
    let mut coord_rows = Vec::with_capacity(sturm as usize);
    let mut etales = Vec::with_capacity(sturm as usize);
    for t in mats.iter().take(sturm as usize) {
        let e = order_shell.etale_of_matrix(t)?;
        coord_rows.push(algebra.int_coords(&e)?);
        etales.push(e);
    }
    let coord_mat = IntMatrix::from_rows(coord_rows.clone());
    let lattice = coord_mat.hnf_basis();
    if lattice.rows() != g {
        return Err(HeckeError::SplittingShape(
            "coordinate lattice rank mismatch".into(),
        ));
    }
    let index_in_max = lattice.lattice_index().expect("full rank").abs();
    let disc_max = algebra.disc_max();
    let disc = &index_in_max * &index_in_max * &disc_max;

    // trace-form discriminant must agree
    let disc_trace = trace_form_disc(&algebra, &lattice);
    assert_eq!(disc, disc_trace, "trace-form discriminant disagrees");

    // distinguished basis: lexicographically first set of prime (or 1)
    // operator indices whose coordinates span the full lattice
    let candidates: Vec<usize> = (1..=sturm as usize)
        .filter(|&n| n == 1 || is_prime(n as u64))
        .collect();
    let basis_indices = find_operator_basis(&coord_rows, &candidates, &index_in_max, g)
        .ok_or(HeckeError::NoOperatorBasis)?;
    let basis: Vec<HeckeElement> = basis_indices
        .iter()
        .map(|&n| HeckeElement {
            index: Some(n),
            matrix: mats[n as usize - 1].clone(),
            etale: etales[n as usize - 1].clone(),
        })
        .collect();
    let basis_coords = IntMatrix::from_rows(
        basis
            .iter()
            .map(|b| algebra.int_coords(&b.etale).unwrap())
            .collect(),
    );

    Ok(HeckeOrder {
        level: space.level,
        algebra,
        rank: g,
        basis_indices,
        basis,
        basis_coords,
        lattice,
        index_in_max,
        disc,
        disc_max,
        sturm_bound: sturm,
        gen_index,
        gen_powers,
        gen_charpoly,
    })
}

/// Enough of the order to convert matrices to etale coordinates.
struct OrderShell {
    algebra: EtaleAlgebra,
    gen_powers: Vec<IntMatrix>,
    gen_etale: EtaleElt,
    rank: usize,
}

impl OrderShell {
    fn etale_of_matrix(&self, m: &IntMatrix) -> Result<EtaleElt, HeckeError> {
        let g2 = self.gen_powers[0].rows();
        let rows: Vec<Vec<BigRational>> = self
            .gen_powers
            .iter()
            .map(|p| {
                (0..g2)
                    .flat_map(|i| p.row_vec(i))
                    .map(BigRational::from)
                    .collect::<Vec<BigRational>>()
            })
            .collect();
        let sys = QMatrix::from_rows(rows);
        let target: Vec<BigRational> = (0..g2)
            .flat_map(|i| m.row_vec(i))
            .map(BigRational::from)
            .collect();
        let coeffs = sys
            .solve_left(&target)
            .ok_or_else(|| HeckeError::SplittingShape("operator outside Q[t]".into()))?;
        assert_eq!(coeffs.len(), self.rank);
        // evaluate sum coeffs[k] * gen^k componentwise
        let mut acc = self.algebra.zero();
        let mut pw = self.algebra.one();
        for c in &coeffs {
            let term = scale_etale(&pw, c);
            acc = acc.add(&term);
            pw = pw.mul(&self.gen_etale);
        }
        Ok(acc)
    }
}

fn scale_etale(e: &EtaleElt, c: &BigRational) -> EtaleElt {
    let comps = e
        .comps
        .iter()
        .map(|v| match v {
            CompValue::Rat(x) => CompValue::Rat(x * c),
            CompValue::Quad(x) => CompValue::Quad(QuadElt::new(x.d, &x.a * c, &x.b * c)),
        })
        .collect();
    EtaleElt { comps }
}

fn unflatten(v: &[BigInt], n: usize) -> IntMatrix {
    assert_eq!(v.len(), n * n);
    IntMatrix::from_rows(v.chunks(n).map(|c| c.to_vec()).collect())
}

fn trace_form_disc(algebra: &EtaleAlgebra, lattice: &IntMatrix) -> BigInt {
    let r = algebra.rank();
    let elts: Vec<EtaleElt> = (0..r)
        .map(|i| algebra.from_int_coords(lattice.row(i)))
        .collect();
    let mut gram = IntMatrix::zero(r, r);
    for i in 0..r {
        for j in 0..r {
            let t = elts[i].mul(&elts[j]).trace();
            assert!(t.denom().is_one());
            gram[(i, j)] = t.numer().clone();
        }
    }
    gram.det().expect("square")
}

fn find_operator_basis(
    coord_rows: &[Vec<BigInt>],
    candidates: &[usize],
    index_in_max: &BigInt,
    rank: usize,
) -> Option<Vec<u64>> {
    let n = candidates.len();
    if n < rank {
        return None;
    }
    let mut pick: Vec<usize> = (0..rank).collect();
    loop {
        let m = IntMatrix::from_rows(
            pick.iter()
                .map(|&i| coord_rows[candidates[i] - 1].clone())
                .collect(),
        );
        if let Ok(d) = m.det() {
            if d.abs() == *index_in_max {
                return Some(pick.iter().map(|&i| candidates[i] as u64).collect());
            }
        }
        // advance to the next lexicographic combination
        let mut i = rank as i64 - 1;
        while i >= 0 && pick[i as usize] == n - rank + i as usize {
            i -= 1;
        }
        if i < 0 {
            return None;
        }
        let i = i as usize;
        pick[i] += 1;
        for j in i + 1..rank {
            pick[j] = pick[j - 1] + 1;
        }
    }
}

impl HeckeOrder {
    /// Etale coordinates of an arbitrary integer matrix commuting with the
    /// order (e.g. any Hecke operator on the cuspidal lattice).
    pub fn etale_of_matrix(&self, m: &IntMatrix) -> Result<EtaleElt, HeckeError> {
        let shell = OrderShell {
            algebra: self.algebra.clone(),
            gen_powers: self.gen_powers.clone(),
            gen_etale: self.gen_element(),
            rank: self.rank,
        };
        shell.etale_of_matrix(m)
    }

    /// The etale image of the splitting generator.
    pub fn gen_element(&self) -> EtaleElt {
        // reconstruct from the stored basis: the generator is one of the
        // basis operators whenever possible, otherwise recompute from its
        // stored index
        for b in &self.basis {
            if b.index == Some(self.gen_index) {
                return b.etale.clone();
            }
        }
        // the generator was not part of the distinguished basis; derive its
        // etale form from the charpoly factorization convention
        let factors = factor_into_small_irreducibles(&self.gen_charpoly).expect("stored factors");
        let mut rational_roots: Vec<BigInt> = Vec::new();
        let mut quads: Vec<(i64, BigInt, BigInt)> = Vec::new();
        for f in &factors {
            if f.len() == 2 {
                rational_roots.push(-f[0].clone());
            } else {
                let b = f[1].clone();
                let delta = &b * &b - BigInt::from(4) * &f[0];
                let (d, m) = squarefree_part(&delta);
                quads.push((d, b, m));
            }
        }
        rational_roots.sort();
        quads.sort_by_key(|(d, _, _)| *d);
        let mut comps: Vec<CompValue> = rational_roots
            .into_iter()
            .map(|r| CompValue::Rat(BigRational::from(r)))
            .collect();
        for (d, b, m) in quads {
            let half = BigRational::new(BigInt::one(), BigInt::from(2));
            comps.push(CompValue::Quad(QuadElt::new(
                d,
                BigRational::from(-b) * &half,
                BigRational::from(m) * &half,
            )));
        }
        EtaleElt { comps }
    }

    /// Build the order element for a Hecke operator matrix.
    pub fn element_from_matrix(
        &self,
        index: Option<u64>,
        m: &IntMatrix,
    ) -> Result<HeckeElement, HeckeError> {
        let etale = self.etale_of_matrix(m)?;
        Ok(HeckeElement {
            index,
            matrix: m.clone(),
            etale,
        })
    }

    /// Exact coefficients of `e` on the distinguished operator basis.
    pub fn expand_in_basis(&self, e: &EtaleElt) -> Result<Vec<BigInt>, HeckeError> {
        let coords = self.algebra.int_coords(e)?;
        self.basis_coords
            .solve_left(&coords)
            .ok_or(HeckeError::NotInLattice)
    }

    /// Is the (integral) element in the order?
    pub fn membership(&self, e: &EtaleElt) -> Result<bool, HeckeError> {
        let coords = self.algebra.int_coords(e)?;
        Ok(self.lattice.lattice_contains(&coords))
    }

    /// Norm form: determinant of multiplication by `e` on the order lattice,
    /// equal to the product of component norms.
    pub fn norm_form(&self, e: &EtaleElt) -> Result<BigInt, HeckeError> {
        self.algebra.norm_form(e)
    }

    /// Multiplication in maximal-order coordinates.
    pub fn coords_mul(&self, a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
        let ea = self.algebra.from_int_coords(a);
        let eb = self.algebra.from_int_coords(b);
        self.algebra
            .int_coords(&ea.mul(&eb))
            .expect("product of integral elements")
    }

    /// The characteristic polynomial of the splitting generator on the order.
    pub fn gen_charpoly(&self) -> &[BigInt] {
        &self.gen_charpoly
    }

    pub fn gen_index(&self) -> u64 {
        self.gen_index
    }
}

// ---------- polynomial helpers ----------

/// Factor a monic integer polynomial into monic factors of degree at most 2
/// (linear factors for every integer root, with multiplicity, then integer
/// quadratics). Fails when an irreducible piece of degree 3 or more remains.
pub fn factor_linear_quadratic(poly: &[BigInt]) -> Result<Vec<Vec<BigInt>>, HeckeError> {
    assert!(
        poly.last().map(|c| c.is_one()).unwrap_or(false),
        "monic input"
    );
    let mut rem = poly.to_vec();
    let mut factors: Vec<Vec<BigInt>> = Vec::new();
    // strip integer roots, with multiplicity
    loop {
        if rem.len() <= 1 {
            break;
        }
        let mut found = None;
        for r in integer_root_candidates(&rem) {
            if poly_eval_int(&rem, &r).is_zero() {
                found = Some(r);
                break;
            }
        }
        match found {
            Some(r) => {
                rem = poly_div_linear(&rem, &r);
                factors.push(vec![-r, BigInt::one()]);
            }
            None => break,
        }
    }
    // remaining part must factor into monic integer quadratics
    let mut quad_part = rem;
    while quad_part.len() > 1 {
        if quad_part.len() == 3 {
            factors.push(quad_part.clone());
            break;
        }
        if quad_part.len() < 3 || quad_part.len() % 2 == 0 {
            return Err(HeckeError::SplittingShape("odd leftover degree".into()));
        }
        let Some((f, rest)) = split_off_quadratic(&quad_part) else {
            return Err(HeckeError::SplittingShape(format!(
                "cannot factor degree-{} part into quadratics",
                quad_part.len() - 1
            )));
        };
        factors.push(f);
        quad_part = rest;
    }
    Ok(factors)
}

/// Factor a monic integer polynomial into *distinct irreducible* monic
/// factors of degree at most 2; errors when the polynomial is not squarefree
/// or a factor is reducible or too large. This is the shape required of a
/// splitting generator's characteristic polynomial.
pub fn factor_into_small_irreducibles(poly: &[BigInt]) -> Result<Vec<Vec<BigInt>>, HeckeError> {
    let factors = factor_linear_quadratic(poly)?;
    for i in 0..factors.len() {
        for j in i + 1..factors.len() {
            if factors[i] == factors[j] {
                return Err(HeckeError::SplittingShape("repeated factor".into()));
            }
        }
    }
    for f in &factors {
        if f.len() == 3 {
            let delta = &f[1] * &f[1] - BigInt::from(4) * &f[0];
            if exact_sqrt(&delta).is_some() {
                return Err(HeckeError::SplittingShape(
                    "quadratic factor splits rationally".into(),
                ));
            }
        }
    }
    Ok(factors)
}

fn integer_root_candidates(poly: &[BigInt]) -> Vec<BigInt> {
    let c0 = &poly[0];
    if c0.is_zero() {
        return vec![BigInt::zero()];
    }
    // a monic integer polynomial has integer rational roots dividing c0
    let mut out = Vec::new();
    let bound = c0.abs();
    let mut d = BigInt::one();
    while &d * &d <= bound {
        if (bound.clone() % &d).is_zero() {
            let q = &bound / &d;
            for cand in [d.clone(), -d.clone(), q.clone(), -q] {
                if !out.contains(&cand) {
                    out.push(cand);
                }
            }
        }
        d += 1;
    }
    out
}

fn poly_eval_int(poly: &[BigInt], x: &BigInt) -> BigInt {
    let mut acc = BigInt::zero();
    for c in poly.iter().rev() {
        acc = acc * x + c;
    }
    acc
}

/// Divide a monic polynomial by (x - r), assuming r is a root.
fn poly_div_linear(poly: &[BigInt], r: &BigInt) -> Vec<BigInt> {
    let n = poly.len() - 1;
    let mut q = vec![BigInt::zero(); n];
    let mut carry = BigInt::zero();
    for k in (0..n).rev() {
        let c = &poly[k + 1] + &carry;
        q[k] = c.clone();
        carry = c * r;
    }
    debug_assert!((&poly[0] + carry).is_zero());
    q
}

/// Try to split a monic even-degree polynomial as (x^2+ax+b) * rest with
/// integer a, b; returns the quadratic and the quotient.
fn split_off_quadratic(poly: &[BigInt]) -> Option<(Vec<BigInt>, Vec<BigInt>)> {
    let c0 = &poly[0];
    if c0.is_zero() {
        return None; // handled by root stripping
    }
    let bound = c0.abs();
    let mut bs = Vec::new();
    let mut d = BigInt::one();
    while &d * &d <= bound {
        if (bound.clone() % &d).is_zero() {
            let q = &bound / &d;
            bs.extend([d.clone(), -d.clone(), q.clone(), -q]);
        }
        d += 1;
    }
    // coefficient bound for a: Cauchy-style, generous
    let a_bound: BigInt = poly.iter().map(|c| c.abs()).sum::<BigInt>() + BigInt::one();
    for b in bs {
        let mut a = -a_bound.clone();
        while a <= a_bound {
            let quad = vec![b.clone(), a.clone(), BigInt::one()];
            if let Some(rest) = poly_divide_exact(poly, &quad) {
                return Some((quad, rest));
            }
            a += 1;
        }
    }
    None
}

/// Exact division of monic polynomials; None if the remainder is nonzero.
fn poly_divide_exact(num: &[BigInt], den: &[BigInt]) -> Option<Vec<BigInt>> {
    let mut rem = num.to_vec();
    let dn = den.len() - 1;
    if rem.len() <= dn {
        return None;
    }
    let mut quot = vec![BigInt::zero(); rem.len() - dn];
    for k in (dn..rem.len()).rev() {
        let c = rem[k].clone();
        quot[k - dn] = c.clone();
        if c.is_zero() {
            continue;
        }
        for (i, dc) in den.iter().enumerate() {
            let idx = k - dn + i;
            rem[idx] = &rem[idx] - &c * dc;
        }
    }
    if rem.iter().take(dn).all(|c| c.is_zero()) {
        Some(quot)
    } else {
        None
    }
}

/// Write delta = m^2 d with d squarefree; returns (d, m).
pub fn squarefree_part(delta: &BigInt) -> (i64, BigInt) {
    assert!(delta.is_positive());
    let fac = factor(delta);
    let mut d = BigInt::one();
    let mut m = BigInt::one();
    for (p, e) in fac {
        let pb = BigInt::from(p);
        for _ in 0..e / 2 {
            m *= &pb;
        }
        if e % 2 == 1 {
            d *= &pb;
        }
    }
    (
        d.to_string().parse::<i64>().expect("small squarefree part"),
        m,
    )
}

/// Exact check that every root of a monic integer polynomial that factors
/// into linear and real-quadratic pieces lies in `[-2 sqrt(l), 2 sqrt(l)]`.
/// Used for the Ramanujan bound on Hecke eigenvalues: the input is the
/// characteristic polynomial on the cuspidal lattice (a perfect square), and
/// the bound is checked on its square root.
pub fn poly_roots_within_weil_bound(charpoly_squared: &[BigInt], ell: u64) -> bool {
    let h = match poly_sqrt_monic(charpoly_squared) {
        Some(h) => h,
        None => return false,
    };
    let factors = match factor_linear_quadratic(&h) {
        Ok(f) => f,
        Err(_) => return false,
    };
    let l = BigInt::from(ell);
    for f in factors {
        if f.len() == 2 {
            // root -f[0]: need root^2 <= 4 l
            let r = &f[0] * &f[0];
            if r > BigInt::from(4) * &l {
                return false;
            }
        } else {
            // monic x^2 + Bx + C with real roots in [-2 sqrt l, 2 sqrt l]:
            // f(s) >= 0, f(-s) >= 0 for s = 2 sqrt l, and vertex inside
            let b = &f[1];
            let c = &f[0];
            let delta = b * b - BigInt::from(4) * c;
            if delta.is_negative() {
                return false; // not totally real
            }
            // f(+-s) = 4l + C +- 2B sqrt(l) >= 0
            let base = BigInt::from(4) * &l + c;
            let two_b = BigInt::from(2) * b;
            if !nonneg_x_plus_y_sqrt(&base, &two_b, &l)
                || !nonneg_x_plus_y_sqrt(&base, &(-two_b), &l)
            {
                return false;
            }
            // vertex: B^2 <= 16 l
            if b * b > BigInt::from(16) * &l {
                return false;
            }
        }
    }
    true
}

/// Is x + y sqrt(l) >= 0? Exact integer arithmetic.
fn nonneg_x_plus_y_sqrt(x: &BigInt, y: &BigInt, l: &BigInt) -> bool {
    if !x.is_negative() && !y.is_negative() {
        return true;
    }
    if x.is_negative() && y.is_negative() {
        return false;
    }
    let x2 = x * x;
    let y2l = y * y * l;
    if y.is_negative() {
        // need x >= |y| sqrt(l): x >= 0 here
        x2 >= y2l
    } else {
        // x < 0, y > 0: need y sqrt(l) >= |x|
        y2l >= x2
    }
}

/// Square root of a monic polynomial that is a perfect square; None if not.
pub fn poly_sqrt_monic(s: &[BigInt]) -> Option<Vec<BigInt>> {
    let deg2 = s.len() - 1;
    if deg2 % 2 != 0 || !s[deg2].is_one() {
        return None;
    }
    let m = deg2 / 2;
    let mut h = vec![BigInt::zero(); m + 1];
    h[m] = BigInt::one();
    for t in (0..m).rev() {
        // s_{m+t} = 2 h_t + sum_{i=t+1}^{m-1} h_i h_{m+t-i}
        let mut acc = BigInt::zero();
        for i in t + 1..m {
            let j = m + t - i;
            if j <= m && j > t {
                acc += &h[i] * &h[j];
            }
        }
        let num = &s[m + t] - acc;
        let (q, r) = num.div_rem(&BigInt::from(2));
        if !r.is_zero() {
            return None;
        }
        h[t] = q;
    }
    // verify
    let mut sq = vec![BigInt::zero(); deg2 + 1];
    for i in 0..=m {
        for j in 0..=m {
            let idx = i + j;
            sq[idx] = &sq[idx] + &h[i] * &h[j];
        }
    }
    if sq == s {
        Some(h)
    } else {
        None
    }
}
