//! Minimal exact rational elimination, used to present quotient spaces and to
//! expand operators as polynomials in a generator. Not a general-purpose
//! rational matrix type; only what the crate needs.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

/// Dense matrix of exact rationals.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigRational>,
}

impl QMatrix {
    pub fn zero(rows: usize, cols: usize) -> Self {
        QMatrix {
            rows,
            cols,
            data: vec![BigRational::zero(); rows * cols],
        }
    }

    pub fn from_rows(rows: Vec<Vec<BigRational>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        QMatrix {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn from_int_rows(rows: &[Vec<BigInt>]) -> Self {
        Self::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|x| BigRational::from(x.clone())).collect())
                .collect(),
        )
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[BigRational] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn get(&self, i: usize, j: usize) -> &BigRational {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: BigRational) {
        self.data[i * self.cols + j] = v;
    }

    /// Reduced row echelon form in place; returns the pivot columns.
    pub fn rref(&mut self) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..self.cols {
            if r == self.rows {
                break;
            }
            let Some(p) = (r..self.rows).find(|&i| !self.get(i, c).is_zero()) else {
                continue;
            };
            for j in 0..self.cols {
                let a = self.get(r, j).clone();
                let b = self.get(p, j).clone();
                self.set(r, j, b);
                self.set(p, j, a);
            }
            let inv = self.get(r, c).recip();
            for j in 0..self.cols {
                let v = self.get(r, j) * &inv;
                self.set(r, j, v);
            }
            for i in 0..self.rows {
                if i != r && !self.get(i, c).is_zero() {
                    let f = self.get(i, c).clone();
                    for j in 0..self.cols {
                        let v = self.get(i, j) - &f * self.get(r, j);
                        self.set(i, j, v);
                    }
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    /// Solve `x * m = b` for a single row vector `x`, exactly over Q.
    /// Returns None when the system is inconsistent; when the solution space
    /// is positive-dimensional an arbitrary solution is returned.
    pub fn solve_left(&self, b: &[BigRational]) -> Option<Vec<BigRational>> {
        assert_eq!(b.len(), self.cols);
        // transpose system: m^T x^T = b^T, eliminate on [m^T | b^T]
        let mut aug = QMatrix::zero(self.cols, self.rows + 1);
        for i in 0..self.cols {
            for j in 0..self.rows {
                aug.set(i, j, self.get(j, i).clone());
            }
            aug.set(i, self.rows, b[i].clone());
        }
        let pivots = aug.rref();
        if pivots.contains(&self.rows) {
            return None; // pivot in the constant column
        }
        let mut x = vec![BigRational::zero(); self.rows];
        for (row, &pc) in pivots.iter().enumerate() {
            x[pc] = aug.get(row, self.rows).clone();
        }
        Some(x)
    }

    /// Clear denominators: returns (integer rows, common denominator).
    pub fn clear_denominators(&self) -> (Vec<Vec<BigInt>>, BigInt) {
        let mut den = BigInt::one();
        for x in &self.data {
            den = num_integer::Integer::lcm(&den, x.denom());
        }
        let rows = (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .map(|x| x.numer() * (&den / x.denom()))
                    .collect::<Vec<BigInt>>()
            })
            .collect();
        (rows, den)
    }
}
