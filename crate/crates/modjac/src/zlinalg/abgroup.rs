//! Finite abelian groups presented by integer relation matrices.

use super::{Matrix, Scalar, ZlinalgError};
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use std::fmt;

/// A finite abelian group in invariant-factor form: `Z/d_1 x ... x Z/d_k`
/// with `d_1 | d_2 | ... | d_k` and every `d_i >= 2`. Unit factors are
/// dropped, so equal groups compare equal.
#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AbGroup {
    pub invariant_factors: Vec<BigInt>,
}

impl AbGroup {
    pub fn trivial() -> Self {
        AbGroup {
            invariant_factors: vec![],
        }
    }

    pub fn cyclic(n: u64) -> Self {
        if n <= 1 {
            Self::trivial()
        } else {
            AbGroup {
                invariant_factors: vec![BigInt::from(n)],
            }
        }
    }

    pub fn is_trivial(&self) -> bool {
        self.invariant_factors.is_empty()
    }

    pub fn order(&self) -> BigInt {
        self.invariant_factors
            .iter()
            .product::<BigInt>()
            .max(BigInt::one())
    }

    pub fn exponent(&self) -> BigInt {
        self.invariant_factors
            .last()
            .cloned()
            .unwrap_or_else(BigInt::one)
    }

    /// Largest-odd-order subgroup, i.e. the product of the odd parts of the
    /// invariant factors.
    pub fn odd_part(&self) -> AbGroup {
        let factors: Vec<BigInt> = self
            .invariant_factors
            .iter()
            .map(|d| {
                let mut d = d.clone();
                let two = BigInt::from(2);
                while (&d % &two).is_zero() {
                    d /= &two;
                }
                d
            })
            .filter(|d| *d > BigInt::one())
            .collect();
        AbGroup {
            invariant_factors: factors,
        }
    }
}

impl fmt::Debug for AbGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for AbGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.invariant_factors.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .invariant_factors
            .iter()
            .map(|d| format!("Z/{d}"))
            .collect();
        write!(f, "{}", parts.join(" x "))
    }
}

/// A presentation `Z^n / rowspan(relations)` of a finite abelian group,
/// retaining the Smith transforms so that elements given in generator
/// coordinates can be tracked through the quotient.
#[derive(Clone, Debug)]
pub struct Presentation<T: Scalar> {
    pub n_gens: usize,
    /// Smith diagonal of the relation matrix, padded with zeros up to n_gens.
    diag: Vec<T>,
    /// Right Smith transform: generator coordinates map to Smith coordinates
    /// by `v -> v * r`.
    r: Matrix<T>,
    relations: Matrix<T>,
}

impl<T: Scalar> Presentation<T> {
    /// Present `Z^n_gens / rowspan(relations)`.
    pub fn new(n_gens: usize, relations: &Matrix<T>) -> Self {
        assert_eq!(
            relations.cols(),
            n_gens,
            "relations must have n_gens columns"
        );
        let (d, _, r) = relations.snf();
        let mut diag = vec![T::zero(); n_gens];
        for i in 0..d.rows().min(d.cols()) {
            diag[i] = d[(i, i)].clone();
        }
        Presentation {
            n_gens,
            diag,
            r,
            relations: relations.clone(),
        }
    }

    /// Rank of the free part of the quotient.
    pub fn free_rank(&self) -> usize {
        self.diag.iter().filter(|x| x.is_zero()).count()
    }

    /// The quotient as a finite abelian group; errors if the free rank is
    /// nonzero.
    pub fn group(&self) -> Result<AbGroup, ZlinalgError> {
        let free = self.free_rank();
        if free > 0 {
            return Err(ZlinalgError::FreeRank(free));
        }
        let factors = self
            .diag
            .iter()
            .filter(|d| d.abs() > T::one())
            .map(|d| scalar_to_bigint(&d.abs()))
            .collect();
        Ok(AbGroup {
            invariant_factors: factors,
        })
    }

    /// Order of the class of `element` (generator coordinates) in the
    /// quotient: least `n >= 1` with `n * element` in the relation span.
    pub fn element_order(&self, element: &[T]) -> Result<BigInt, ZlinalgError> {
        assert_eq!(element.len(), self.n_gens);
        let smith = self.r.apply_row(element);
        let mut ord = BigInt::one();
        for (y, d) in smith.iter().zip(&self.diag) {
            if d.is_zero() {
                if !y.is_zero() {
                    return Err(ZlinalgError::FreeRank(1));
                }
                continue;
            }
            let db = scalar_to_bigint(d);
            let yb = scalar_to_bigint(y);
            let g = num_integer::Integer::gcd(&yb, &db);
            let o = db / g;
            ord = num_integer::Integer::lcm(&ord, &o.abs());
        }
        Ok(ord)
    }

    /// Order of the subgroup generated by the given elements.
    pub fn subgroup_order(&self, gens: &[Vec<T>]) -> Result<BigInt, ZlinalgError> {
        let full = self.relations.hnf_basis();
        let full_index = lattice_index_checked(&full)?;
        let mut stacked = self.relations.clone();
        for g in gens {
            stacked.push_row(g.clone());
        }
        let joined = stacked.hnf_basis();
        let joined_index = lattice_index_checked(&joined)?;
        Ok(full_index / joined_index)
    }

    /// Quotient of the group by the subgroup generated by the given elements.
    pub fn quotient_by(&self, gens: &[Vec<T>]) -> Result<AbGroup, ZlinalgError> {
        let mut stacked = self.relations.clone();
        for g in gens {
            stacked.push_row(g.clone());
        }
        Presentation::new(self.n_gens, &stacked).group()
    }
}

fn lattice_index_checked<T: Scalar>(basis: &Matrix<T>) -> Result<BigInt, ZlinalgError> {
    if basis.rows() != basis.cols() {
        return Err(ZlinalgError::FreeRank(basis.cols() - basis.rows()));
    }
    let mut ix = BigInt::one();
    for i in 0..basis.rows() {
        ix *= scalar_to_bigint(&basis[(i, i)]);
    }
    Ok(ix.abs())
}

fn scalar_to_bigint<T: Scalar>(x: &T) -> BigInt {
    // round-trip through the decimal representation; exact for any size
    x.to_i64().map(BigInt::from).unwrap_or_else(|| {
        format!("{x}")
            .parse::<BigInt>()
            .expect("integer scalar prints in decimal")
    })
}

/// Quotient `Z^n_gens / rowspan(relations)` in invariant-factor form.
/// Errors if the quotient is infinite (nonzero free rank).
pub fn abgroup_from_relations<T: Scalar>(
    n_gens: usize,
    relations: &Matrix<T>,
) -> Result<AbGroup, ZlinalgError> {
    Presentation::new(n_gens, relations).group()
}
