//! Exact integer linear algebra: Hermite and Smith normal forms, fraction-free
//! determinants, characteristic polynomials, integer kernels and lattice
//! arithmetic, plus finite abelian groups presented by relation matrices.
//!
//! All lattices are *row* lattices: a matrix spans the lattice generated by
//! its rows, and an operator with matrix `M` sends the row vector `v` to
//! `v * M`. Everything is exact; there is no rounding anywhere in the module.
//!
//! The matrix type is generic over the integer scalar. The rest of the crate
//! instantiates it with [`num_bigint::BigInt`] (see `crate::IntMatrix`);
//! `i64` and `i128` work as well for small inputs.

mod abgroup;
mod ratsolve;

pub use abgroup::{abgroup_from_relations, AbGroup, Presentation};
pub use ratsolve::QMatrix;

use num_traits::{FromPrimitive, Signed, ToPrimitive};
use std::fmt;

/// Scalar trait for exact integer matrix entries.
pub trait Scalar:
    num_integer::Integer + Signed + FromPrimitive + ToPrimitive + Clone + fmt::Debug + fmt::Display
{
}

impl<T> Scalar for T where
    T: num_integer::Integer
        + Signed
        + FromPrimitive
        + ToPrimitive
        + Clone
        + fmt::Debug
        + fmt::Display
{
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ZlinalgError {
    /// Operation requires a square matrix.
    NonSquare { rows: usize, cols: usize },
    /// A group presentation had positive free rank where a finite group was
    /// required.
    FreeRank(usize),
    /// Exact division failed (vector not in lattice, system unsolvable, ...).
    NotSolvable,
}

impl fmt::Display for ZlinalgError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ZlinalgError::NonSquare { rows, cols } => {
                write!(f, "matrix is {rows}x{cols}, expected square")
            }
            ZlinalgError::FreeRank(r) => write!(f, "presentation has free rank {r}"),
            ZlinalgError::NotSolvable => write!(f, "no exact integer solution"),
        }
    }
}

impl std::error::Error for ZlinalgError {}

/// Dense row-major matrix over an exact integer scalar.
#[derive(Clone, PartialEq, Eq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: fmt::Debug> fmt::Debug for Matrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  [")?;
            for j in 0..self.cols {
                if j > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{:?}", self.data[i * self.cols + j])?;
            }
            writeln!(f, "]")?;
        }
        write!(f, "]")
    }
}

impl<T: Scalar> Matrix<T> {
    pub fn zero(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: (0..rows * cols).map(|_| T::zero()).collect(),
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zero(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Matrix {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        }
    }

    /// Convenience constructor from machine integers.
    pub fn from_i64(rows: &[&[i64]]) -> Self {
        Self::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&x| T::from_i64(x).unwrap()).collect())
                .collect(),
        )
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_vec(&self, i: usize) -> Vec<T> {
        self.row(i).to_vec()
    }

    pub fn push_row(&mut self, row: Vec<T>) {
        assert_eq!(row.len(), self.cols);
        self.data.extend(row);
        self.rows += 1;
    }

    /// Vertical concatenation.
    pub fn stack(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.cols);
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        Matrix {
            rows: self.rows + other.rows,
            cols: self.cols,
            data,
        }
    }

    /// Horizontal concatenation.
    pub fn augment(&self, other: &Self) -> Self {
        assert_eq!(self.rows, other.rows);
        let mut m = Self::zero(self.rows, self.cols + other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m[(i, j)] = self[(i, j)].clone();
            }
            for j in 0..other.cols {
                m[(i, self.cols + j)] = other[(i, j)].clone();
            }
        }
        m
    }

    pub fn transpose(&self) -> Self {
        let mut m = Self::zero(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m[(j, i)] = self[(i, j)].clone();
            }
        }
        m
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "dimension mismatch in mul");
        let mut m = Self::zero(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let t = a.clone() * other[(k, j)].clone();
                    m[(i, j)] = m[(i, j)].clone() + t;
                }
            }
        }
        m
    }

    pub fn scale(&self, c: &T) -> Self {
        let mut m = self.clone();
        for x in &mut m.data {
            *x = x.clone() * c.clone();
        }
        m
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut m = self.clone();
        for (x, y) in m.data.iter_mut().zip(&other.data) {
            *x = x.clone() + y.clone();
        }
        m
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut m = self.clone();
        for (x, y) in m.data.iter_mut().zip(&other.data) {
            *x = x.clone() - y.clone();
        }
        m
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(&T) -> U) -> Matrix<U> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn apply_row(&self, v: &[T]) -> Vec<T> {
        assert_eq!(v.len(), self.rows);
        let mut out = vec![T::zero(); self.cols];
        for (i, vi) in v.iter().enumerate() {
            if vi.is_zero() {
                continue;
            }
            for j in 0..self.cols {
                out[j] = out[j].clone() + vi.clone() * self[(i, j)].clone();
            }
        }
        out
    }

    pub fn trace(&self) -> T {
        assert!(self.is_square());
        let mut t = T::zero();
        for i in 0..self.rows {
            t = t + self[(i, i)].clone();
        }
        t
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    fn negate_row(&mut self, i: usize) {
        for j in 0..self.cols {
            self[(i, j)] = -self[(i, j)].clone();
        }
    }

    /// row a -= q * row b
    fn submul_row(&mut self, a: usize, b: usize, q: &T) {
        if q.is_zero() {
            return;
        }
        for j in 0..self.cols {
            let t = q.clone() * self[(b, j)].clone();
            self[(a, j)] = self[(a, j)].clone() - t;
        }
    }

    /// Hermite normal form by row operations, with transform.
    ///
    /// Returns `(h, u)` where `u` is unimodular, `u * self = h`, and `h` is in
    /// row echelon form with positive pivots and the entries above each pivot
    /// reduced into `[0, pivot)`. Zero rows sink to the bottom. Pivoting picks
    /// the smallest nonzero entry in the working column to limit coefficient
    /// growth.
    pub fn hnf(&self) -> (Self, Self) {
        let mut h = self.clone();
        let mut u = Self::identity(self.rows);
        let mut r = 0; // next pivot row
        for c in 0..self.cols {
            if r == h.rows {
                break;
            }
            // gcd-eliminate column c among rows r.. with balanced division
            loop {
                let mut piv: Option<usize> = None;
                for i in r..h.rows {
                    if !h[(i, c)].is_zero() && piv.is_none_or(|p| h[(i, c)].abs() < h[(p, c)].abs())
                    {
                        piv = Some(i);
                    }
                }
                let Some(p) = piv else { break };
                h.swap_rows(r, p);
                u.swap_rows(r, p);
                let mut any = false;
                for i in r + 1..h.rows {
                    if !h[(i, c)].is_zero() {
                        let q = div_nearest(&h[(i, c)], &h[(r, c)]);
                        h.submul_row(i, r, &q);
                        u.submul_row(i, r, &q);
                        if !h[(i, c)].is_zero() {
                            any = true;
                        }
                    }
                }
                if !any {
                    break;
                }
            }
            if h[(r, c)].is_zero() {
                continue;
            }
            if h[(r, c)].is_negative() {
                h.negate_row(r);
                u.negate_row(r);
            }
            // reduce entries above pivot into [0, pivot)
            for i in 0..r {
                let q = div_floor_scalar(&h[(i, c)], &h[(r, c)]);
                h.submul_row(i, r, &q);
                u.submul_row(i, r, &q);
            }
            r += 1;
        }
        (h, u)
    }

    /// HNF with zero rows removed: a canonical basis of the row lattice.
    pub fn hnf_basis(&self) -> Self {
        let (h, _) = self.hnf();
        let rows: Vec<Vec<T>> = (0..h.rows)
            .map(|i| h.row_vec(i))
            .filter(|r| r.iter().any(|x| !x.is_zero()))
            .collect();
        if rows.is_empty() {
            Matrix {
                rows: 0,
                cols: self.cols,
                data: vec![],
            }
        } else {
            Matrix::from_rows(rows)
        }
    }

    pub fn rank(&self) -> usize {
        self.hnf_basis().rows
    }

    /// Smith normal form with transforms: returns `(d, l, r)` with `l`, `r`
    /// unimodular and `l * self * r = d` diagonal, `d_1 | d_2 | ...`.
    ///
    /// Every sweep moves the smallest nonzero entry of the working submatrix
    /// to the pivot and reduces with balanced (nearest-integer) division, so
    /// the pivot at least halves between sweeps and coefficients stay tame.
    pub fn snf(&self) -> (Self, Self, Self) {
        let mut d = self.clone();
        let mut l = Self::identity(self.rows);
        let mut r = Self::identity(self.cols);
        let n = self.rows.min(self.cols);
        let mut k = 0;
        while k < n {
            'step: loop {
                // move the smallest nonzero entry of d[k.., k..] to (k, k)
                let mut piv: Option<(usize, usize)> = None;
                for i in k..d.rows {
                    for j in k..d.cols {
                        if !d[(i, j)].is_zero()
                            && piv.is_none_or(|(pi, pj)| d[(i, j)].abs() < d[(pi, pj)].abs())
                        {
                            piv = Some((i, j));
                        }
                    }
                }
                let Some((pi, pj)) = piv else { break 'step };
                d.swap_rows(k, pi);
                l.swap_rows(k, pi);
                swap_cols(&mut d, k, pj);
                swap_cols(&mut r, k, pj);
                // one balanced reduction sweep of column k and row k
                let mut leftover = false;
                for i in k + 1..d.rows {
                    if !d[(i, k)].is_zero() {
                        let q = div_nearest(&d[(i, k)], &d[(k, k)]);
                        d.submul_row(i, k, &q);
                        l.submul_row(i, k, &q);
                        leftover |= !d[(i, k)].is_zero();
                    }
                }
                for j in k + 1..d.cols {
                    if !d[(k, j)].is_zero() {
                        let q = div_nearest(&d[(k, j)], &d[(k, k)]);
                        submul_col(&mut d, j, k, &q);
                        submul_col(&mut r, j, k, &q);
                        leftover |= !d[(k, j)].is_zero();
                    }
                }
                if leftover {
                    continue 'step; // remainders are at most half the pivot
                }
                // divisibility: d[k,k] must divide the rest of the submatrix
                for i in k + 1..d.rows {
                    for j in k + 1..d.cols {
                        if !d[(i, j)].clone().mod_floor(&d[(k, k)]).is_zero() {
                            // fold row i into row k and restart the step
                            let minus_one = T::zero() - T::one();
                            d.submul_row(k, i, &minus_one);
                            l.submul_row(k, i, &minus_one);
                            continue 'step;
                        }
                    }
                }
                break 'step;
            }
            if d[(k, k)].is_negative() {
                d.negate_row(k);
                l.negate_row(k);
            }
            k += 1;
        }
        (d, l, r)
    }

    /// Determinant via the Bareiss fraction-free algorithm.
    pub fn det(&self) -> Result<T, ZlinalgError> {
        if !self.is_square() {
            return Err(ZlinalgError::NonSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        let n = self.rows;
        if n == 0 {
            return Ok(T::one());
        }
        let mut a = self.clone();
        let mut sign = false;
        let mut prev = T::one();
        for k in 0..n - 1 {
            if a[(k, k)].is_zero() {
                let Some(p) = (k + 1..n).find(|&i| !a[(i, k)].is_zero()) else {
                    return Ok(T::zero());
                };
                a.swap_rows(k, p);
                sign = !sign;
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let num = a[(k, k)].clone() * a[(i, j)].clone()
                        - a[(i, k)].clone() * a[(k, j)].clone();
                    let (q, rem) = num.div_rem(&prev);
                    debug_assert!(rem.is_zero(), "Bareiss division not exact");
                    a[(i, j)] = q;
                }
                a[(i, k)] = T::zero();
            }
            prev = a[(k, k)].clone();
        }
        let d = a[(n - 1, n - 1)].clone();
        Ok(if sign { -d } else { d })
    }

    /// Characteristic polynomial, monic, returned as coefficients
    /// `[c_0, c_1, ..., c_{n-1}, 1]` of `x^n + c_{n-1} x^{n-1} + ... + c_0`.
    ///
    /// Faddeev-LeVerrier: all intermediate matrices stay integral and the
    /// divisions by `k` are exact.
    pub fn charpoly(&self) -> Result<Vec<T>, ZlinalgError> {
        if !self.is_square() {
            return Err(ZlinalgError::NonSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        let n = self.rows;
        let mut coeffs = vec![T::zero(); n + 1];
        coeffs[n] = T::one();
        let mut m = Self::identity(n);
        for k in 1..=n {
            let am = self.mul(&m);
            let tr = am.trace();
            let kk = T::from_usize(k).unwrap();
            let (c, rem) = (-tr).div_rem(&kk);
            debug_assert!(rem.is_zero(), "Faddeev-LeVerrier division not exact");
            coeffs[n - k] = c.clone();
            m = am;
            for i in 0..n {
                m[(i, i)] = m[(i, i)].clone() + c.clone();
            }
        }
        Ok(coeffs)
    }

    /// Basis of the left kernel lattice `{ x : x * self = 0 }`.
    ///
    /// The kernel of a map to a free module is saturated, so this basis spans
    /// the full kernel sublattice of `Z^rows`.
    pub fn kernel(&self) -> Self {
        let aug = self.augment(&Self::identity(self.rows));
        let (h, _) = aug.hnf();
        let rows: Vec<Vec<T>> = (0..h.rows)
            .filter(|&i| (0..self.cols).all(|j| h[(i, j)].is_zero()))
            .map(|i| {
                (0..self.rows)
                    .map(|j| h[(i, self.cols + j)].clone())
                    .collect()
            })
            .collect();
        if rows.is_empty() {
            Matrix {
                rows: 0,
                cols: self.rows,
                data: vec![],
            }
        } else {
            Matrix::from_rows(rows)
        }
    }

    /// Solve `x * self = b` exactly over the integers.
    pub fn solve_left(&self, b: &[T]) -> Option<Vec<T>> {
        assert_eq!(b.len(), self.cols);
        let (h, u) = self.hnf();
        let mut resid = b.to_vec();
        let mut y = vec![T::zero(); self.rows];
        for i in 0..h.rows {
            let Some(pc) = (0..h.cols).find(|&j| !h[(i, j)].is_zero()) else {
                break;
            };
            let (q, rem) = resid[pc].div_rem(&h[(i, pc)]);
            if !rem.is_zero() {
                return None;
            }
            if !q.is_zero() {
                for j in 0..h.cols {
                    let t = q.clone() * h[(i, j)].clone();
                    resid[j] = resid[j].clone() - t;
                }
            }
            y[i] = q;
        }
        if resid.iter().any(|x| !x.is_zero()) {
            return None;
        }
        // x = y * u
        let mut x = vec![T::zero(); self.rows];
        for i in 0..self.rows {
            if y[i].is_zero() {
                continue;
            }
            for j in 0..self.rows {
                let t = y[i].clone() * u[(i, j)].clone();
                x[j] = x[j].clone() + t;
            }
        }
        Some(x)
    }

    /// Does the row lattice of `self` contain `v`?
    pub fn lattice_contains(&self, v: &[T]) -> bool {
        self.solve_left(v).is_some()
    }

    /// Does the row lattice of `self` contain every row of `other`?
    pub fn lattice_contains_all(&self, other: &Self) -> bool {
        (0..other.rows()).all(|i| self.lattice_contains(other.row(i)))
    }

    /// Index `[Z^n : L]` of a full-rank row lattice in its ambient space.
    pub fn lattice_index(&self) -> Result<T, ZlinalgError> {
        let b = self.hnf_basis();
        if !b.is_square() {
            return Err(ZlinalgError::NonSquare {
                rows: b.rows,
                cols: b.cols,
            });
        }
        let mut ix = T::one();
        for i in 0..b.rows {
            ix = ix * b[(i, i)].clone();
        }
        Ok(ix)
    }

    /// Basis of the intersection of the row lattices of `self` and `other`.
    pub fn lattice_intersection(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.cols);
        let stacked = self.stack(&other.map(|x| -x.clone()));
        let ker = stacked.kernel();
        // project kernel rows onto the x-part and multiply back into the lattice
        let mut rows = Vec::new();
        for i in 0..ker.rows() {
            let x: Vec<T> = ker.row(i)[..self.rows].to_vec();
            rows.push(self.apply_row(&x));
        }
        if rows.is_empty() {
            Matrix {
                rows: 0,
                cols: self.cols,
                data: vec![],
            }
        } else {
            Matrix::from_rows(rows).hnf_basis()
        }
    }
}

impl<T> std::ops::Index<(usize, usize)> for Matrix<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T> std::ops::IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

fn swap_cols<T: Scalar>(m: &mut Matrix<T>, a: usize, b: usize) {
    if a == b {
        return;
    }
    for i in 0..m.rows() {
        let x = m[(i, a)].clone();
        m[(i, a)] = m[(i, b)].clone();
        m[(i, b)] = x;
    }
}

/// col a -= q * col b
fn submul_col<T: Scalar>(m: &mut Matrix<T>, a: usize, b: usize, q: &T) {
    if q.is_zero() {
        return;
    }
    for i in 0..m.rows() {
        let t = q.clone() * m[(i, b)].clone();
        m[(i, a)] = m[(i, a)].clone() - t;
    }
}

fn div_floor_scalar<T: Scalar>(a: &T, b: &T) -> T {
    a.div_floor(b)
}

/// Nearest-integer quotient: the remainder `a - q b` has absolute value at
/// most `|b| / 2`.
fn div_nearest<T: Scalar>(a: &T, b: &T) -> T {
    let q = a.div_floor(b);
    let r = a.clone() - q.clone() * b.clone();
    // after floor division r has the sign of b and |r| < |b|; stepping q up
    // by one replaces r with r - b, which shrinks it in both sign cases
    let two_r = r.clone() + r;
    if two_r.abs() > b.abs() {
        q + T::one()
    } else {
        q
    }
}

/// Rank of a matrix reduced mod a small prime.
pub fn rank_mod_p<T: Scalar>(m: &Matrix<T>, p: i64) -> usize {
    let mut a: Vec<Vec<i64>> = (0..m.rows())
        .map(|i| m.row(i).iter().map(|x| mod_to_i64(x, p)).collect())
        .collect();
    let rows = a.len();
    let cols = if rows == 0 { 0 } else { a[0].len() };
    let mut rank = 0;
    for c in 0..cols {
        let Some(pr) = (rank..rows).find(|&i| a[i][c] % p != 0) else {
            continue;
        };
        a.swap(rank, pr);
        let inv = mod_inverse(a[rank][c], p);
        for x in &mut a[rank] {
            *x = (*x * inv).rem_euclid(p);
        }
        for i in 0..rows {
            if i != rank && a[i][c] != 0 {
                let f = a[i][c];
                for j in 0..cols {
                    a[i][j] = (a[i][j] - f * a[rank][j]).rem_euclid(p);
                }
            }
        }
        rank += 1;
        if rank == rows {
            break;
        }
    }
    rank
}

/// Dimension of the left kernel of `m` over `F_p`.
pub fn kernel_dim_mod_p<T: Scalar>(m: &Matrix<T>, p: i64) -> usize {
    m.rows() - rank_mod_p(m, p)
}

fn mod_to_i64<T: Scalar>(x: &T, p: i64) -> i64 {
    let pp = T::from_i64(p).unwrap();
    x.mod_floor(&pp).to_i64().expect("residue fits in i64")
}

fn mod_inverse(a: i64, p: i64) -> i64 {
    // extended euclid, p prime
    let (mut t, mut new_t) = (0i64, 1i64);
    let (mut r, mut new_r) = (p, a.rem_euclid(p));
    while new_r != 0 {
        let q = r / new_r;
        (t, new_t) = (new_t, t - q * new_t);
        (r, new_r) = (new_r, r - q * new_r);
    }
    assert_eq!(r, 1, "not invertible mod {p}");
    t.rem_euclid(p)
}

#[cfg(test)]
mod tests;
