//! Weight-2 modular symbols for `Gamma_0(N)` in the Manin-symbol
//! presentation, with exact integer structure.
//!
//! The ambient space is the quotient of the free module on `P^1(Z/N)` by the
//! two- and three-term Manin relations, carried as a distinguished integral
//! lattice inside the rational quotient (torsion in the raw relation quotient
//! is discarded). The boundary map lands in the free module on the cusp
//! classes; its kernel is the cuspidal lattice, of rank `2g`. Hecke operators
//! act through Heilbronn-Merel matrices and restrict to exact integer
//! matrices on the cuspidal lattice. Atkin-Lehner involutions act through
//! their rational normalizer matrices and continued-fraction re-expansion.

use crate::arith::{egcd, gcd_i64};
use crate::zlinalg::QMatrix;
use crate::IntMatrix;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use std::collections::HashMap;
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ModSymError {
    /// Level is not a product of two distinct primes.
    UnsupportedLevel(u64),
    /// Hecke index 0 is meaningless.
    BadHeckeIndex,
    /// Q is not an exact divisor of N.
    NotExactDivisor { level: u64, q: u64 },
}

impl fmt::Display for ModSymError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModSymError::UnsupportedLevel(n) => {
                write!(f, "level {n} is not a supported squarefree two-prime level")
            }
            ModSymError::BadHeckeIndex => write!(f, "Hecke index must be >= 1"),
            ModSymError::NotExactDivisor { level, q } => {
                write!(f, "{q} is not an exact divisor of {level}")
            }
        }
    }
}

impl std::error::Error for ModSymError {}

/// The projective line over `Z/N` with a fixed canonical-representative
/// normalization: each class is stored as its lexicographically smallest
/// representative over all unit multiples.
#[derive(Clone, Debug)]
pub struct P1 {
    pub n: i64,
    elems: Vec<(i64, i64)>,
    /// Class index for every residue pair, None on imprimitive pairs.
    table: Vec<Option<usize>>,
}

impl P1 {
    pub fn new(n: i64) -> Self {
        assert!(n >= 2);
        let units: Vec<i64> = (1..n).filter(|&u| gcd_i64(u, n) == 1).collect();
        let mut elems = Vec::new();
        let mut index = HashMap::new();
        for c in 0..n {
            for d in 0..n {
                if gcd_i64(gcd_i64(c, d), n) != 1 {
                    continue;
                }
                let canon = Self::canon_with(&units, n, c, d);
                if canon == (c, d) {
                    index.insert(canon, elems.len());
                    elems.push(canon);
                }
            }
        }
        // full lookup table so the hot Hecke loops avoid re-canonicalizing
        let mut table = vec![None; (n * n) as usize];
        for c in 0..n {
            for d in 0..n {
                if gcd_i64(gcd_i64(c, d), n) != 1 {
                    continue;
                }
                let canon = Self::canon_with(&units, n, c, d);
                table[(c * n + d) as usize] = Some(index[&canon]);
            }
        }
        P1 { n, elems, table }
    }

    fn canon_with(units: &[i64], n: i64, c: i64, d: i64) -> (i64, i64) {
        let mut best = (n, n);
        for &u in units {
            let cand = ((u * c).rem_euclid(n), (u * d).rem_euclid(n));
            if cand < best {
                best = cand;
            }
        }
        best
    }

    pub fn len(&self) -> usize {
        self.elems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elems.is_empty()
    }

    pub fn rep(&self, i: usize) -> (i64, i64) {
        self.elems[i]
    }

    /// Index of the class of (c, d); None when gcd(c, d, N) > 1.
    pub fn lookup(&self, c: i64, d: i64) -> Option<usize> {
        let c = c.rem_euclid(self.n);
        let d = d.rem_euclid(self.n);
        self.table[(c * self.n + d) as usize]
    }

    /// Lift a class to a matrix [[a, b], [c, d]] in SL2(Z) whose bottom row
    /// reduces to the stored representative mod N.
    pub fn lift(&self, i: usize) -> [[i64; 2]; 2] {
        let (c, d) = self.elems[i];
        let c1 = if c == 0 { self.n } else { c };
        let mut d1 = d;
        let mut tries = 0;
        while gcd_i64(c1, d1) != 1 {
            d1 += self.n;
            tries += 1;
            assert!(
                tries < 4 * self.n,
                "lift failed for ({c}, {d}) mod {}",
                self.n
            );
        }
        // solve a*d1 - b*c1 = 1
        let (g, a, y) = egcd(d1, c1);
        assert_eq!(g, 1);
        let b = -y;
        debug_assert_eq!(a * d1 - b * c1, 1);
        [[a, b], [c1, d1]]
    }
}

/// One Hecke (or Atkin-Lehner) operator as an exact integer matrix on the
/// cuspidal lattice basis, together with its action on the ambient lattice.
#[derive(Clone, Debug)]
pub struct HeckeMatrix {
    pub index: u64,
    /// Matrix on the cuspidal lattice (row convention: v maps to v * m).
    pub matrix: IntMatrix,
    /// Matrix on the full ambient lattice.
    pub ambient: IntMatrix,
}

/// The Manin-symbol presentation of weight-2 modular symbols for
/// `Gamma_0(N)`, with its integral ambient lattice, boundary map and
/// saturated cuspidal sublattice.
#[derive(Clone, Debug)]
pub struct ModSymSpace {
    pub level: u64,
    pub p: u64,
    pub q: u64,
    p1: P1,
    /// Coordinates of each Manin generator in the ambient lattice basis.
    sym_coords: IntMatrix,
    /// Each ambient basis vector as a Z-combination of Manin generators.
    basis_combos: IntMatrix,
    pub ambient_dim: usize,
    /// Boundary matrix ambient -> cusp module, columns ordered by
    /// `cusp_divisors`.
    pub boundary: IntMatrix,
    /// Cusp class labels: the divisors 1, p, q, pq of N.
    pub cusp_divisors: Vec<u64>,
    /// Basis of the cuspidal lattice, rows in ambient coordinates.
    pub cuspidal_basis: IntMatrix,
    pub cuspidal_dim: usize,
}

/// Build the modular symbols space for a level `N = p*q`, a product of two
/// distinct primes.
pub fn build_space(n: u64) -> Result<ModSymSpace, ModSymError> {
    let (p, q) = crate::arith::split_two_primes(n).ok_or(ModSymError::UnsupportedLevel(n))?;
    let p1 = P1::new(n as i64);
    let m = p1.len();

    // Manin relations x + x*sigma and x + x*tau + x*tau^2
    let mut rel_rows: Vec<Vec<BigRational>> = Vec::with_capacity(2 * m);
    for i in 0..m {
        let (c, d) = p1.rep(i);
        let s = p1.lookup(d, -c).expect("sigma preserves P1");
        let mut row = vec![BigRational::zero(); m];
        row[i] += BigRational::one();
        row[s] += BigRational::one();
        rel_rows.push(row);

        let t = p1.lookup(d, -c - d).expect("tau preserves P1");
        let t2 = p1.lookup(-c - d, c).expect("tau^2 preserves P1");
        let mut row = vec![BigRational::zero(); m];
        row[i] += BigRational::one();
        row[t] += BigRational::one();
        row[t2] += BigRational::one();
        rel_rows.push(row);
    }
    let mut rel = QMatrix::from_rows(rel_rows);
    let pivots = rel.rref();
    let free: Vec<usize> = (0..m).filter(|j| !pivots.contains(j)).collect();
    let dim = free.len();
    let free_pos: HashMap<usize, usize> = free.iter().enumerate().map(|(k, &j)| (j, k)).collect();

    // rational coordinates of each generator in the free-column basis
    let mut psi = QMatrix::zero(m, dim);
    for (k, &j) in free.iter().enumerate() {
        psi.set(j, k, BigRational::one());
    }
    for (row, &c) in pivots.iter().enumerate() {
        for (&j, &k) in &free_pos {
            let v = -rel.get(row, j).clone();
            psi.set(c, k, v);
        }
    }

    // integral ambient lattice: the image of the Z-span of the generators
    let (wi_rows, _den) = psi.clear_denominators();
    let wi = IntMatrix::from_rows(wi_rows);
    let (h, u) = wi.hnf();
    let rank = (0..h.rows())
        .take_while(|&i| (0..h.cols()).any(|j| !h[(i, j)].is_zero()))
        .count();
    assert_eq!(rank, dim, "Manin quotient lattice is not full rank");
    let basis = IntMatrix::from_rows((0..dim).map(|i| h.row_vec(i)).collect());
    let basis_combos = IntMatrix::from_rows((0..dim).map(|i| u.row_vec(i)).collect());

    // generator coordinates in the lattice basis: solve coords * basis = wi
    let mut sym_rows = Vec::with_capacity(m);
    for i in 0..m {
        let x = basis
            .solve_left(wi.row(i))
            .expect("generator image lies in the ambient lattice");
        sym_rows.push(x);
    }
    let sym_coords = IntMatrix::from_rows(sym_rows);
    debug_assert_eq!(basis_combos.mul(&sym_coords), IntMatrix::identity(dim));

    // boundary: [g(infinity)] - [g(0)] per generator; for squarefree N the
    // cusp class of a reduced fraction is determined by gcd(denominator, N)
    let cusp_divisors = vec![1, p, q, n];
    let cusp_pos = |c: i64| -> usize {
        let g = gcd_i64(c, n as i64) as u64;
        cusp_divisors
            .iter()
            .position(|&d| d == g)
            .expect("divisor class")
    };
    let mut bd_rows = Vec::with_capacity(m);
    for i in 0..m {
        let g = p1.lift(i);
        let mut row = vec![BigInt::zero(); 4];
        row[cusp_pos(g[1][0])] += 1; // g(inf) = a/c
        row[cusp_pos(g[1][1])] -= 1; // g(0) = b/d
        bd_rows.push(row);
    }
    let bd_sym = IntMatrix::from_rows(bd_rows);
    let boundary = basis_combos.mul(&bd_sym);
    let cuspidal_basis = boundary.kernel();
    let cuspidal_dim = cuspidal_basis.rows();

    let space = ModSymSpace {
        level: n,
        p,
        q,
        p1,
        sym_coords,
        basis_combos,
        ambient_dim: dim,
        boundary,
        cusp_divisors,
        cuspidal_basis,
        cuspidal_dim,
    };
    assert_eq!(
        space.ambient_dim,
        space.cuspidal_dim + space.num_cusps() - 1
    );
    Ok(space)
}

impl ModSymSpace {
    pub fn genus(&self) -> usize {
        self.cuspidal_dim / 2
    }

    pub fn num_cusps(&self) -> usize {
        self.cusp_divisors.len()
    }

    pub fn p1_size(&self) -> usize {
        self.p1.len()
    }

    /// Cusp labels [1], [p], [q], [pq], matched to the boundary columns.
    pub fn cusp_list(&self) -> Vec<String> {
        self.cusp_divisors
            .iter()
            .map(|d| format!("[{d}]"))
            .collect()
    }

    /// Ambient matrix of the operator sending each Manin generator `i` to
    /// `sum_j action[i][j] * generator_j`.
    fn ambient_from_symbol_action(&self, action: &IntMatrix) -> IntMatrix {
        self.basis_combos.mul(&action.mul(&self.sym_coords))
    }

    /// Restrict an ambient matrix to the cuspidal lattice. None if the
    /// operator does not preserve the lattice.
    pub fn restrict_to_cuspidal(&self, ambient: &IntMatrix) -> Option<IntMatrix> {
        let image = self.cuspidal_basis.mul(ambient);
        let mut rows = Vec::with_capacity(image.rows());
        for i in 0..image.rows() {
            rows.push(self.cuspidal_basis.solve_left(image.row(i))?);
        }
        Some(IntMatrix::from_rows(rows))
    }

    /// The Hecke operator `T_n` on the ambient lattice.
    pub fn hecke_ambient(&self, n: u64) -> Result<IntMatrix, ModSymError> {
        if n == 0 {
            return Err(ModSymError::BadHeckeIndex);
        }
        if n == 1 {
            return Ok(IntMatrix::identity(self.ambient_dim));
        }
        let fac = crate::arith::factor(&BigInt::from(n));
        if fac.len() == 1 {
            let (prime, e) = fac[0];
            if e == 1 {
                return Ok(self.hecke_prime_ambient(prime));
            }
            let tp = self.hecke_prime_ambient(prime);
            if self.level % prime == 0 {
                // T_{q^k} = T_q^k at the level
                let mut acc = tp.clone();
                for _ in 1..e {
                    acc = acc.mul(&tp);
                }
                return Ok(acc);
            }
            // T_{p^{k+1}} = T_p T_{p^k} - p T_{p^{k-1}} away from the level
            let mut prev = IntMatrix::identity(self.ambient_dim);
            let mut cur = tp.clone();
            for _ in 1..e {
                let next = cur.mul(&tp).sub(&prev.scale(&BigInt::from(prime)));
                prev = cur;
                cur = next;
            }
            return Ok(cur);
        }
        // multiplicative across coprime prime powers
        let mut acc = IntMatrix::identity(self.ambient_dim);
        for (prime, e) in fac {
            let part = self.hecke_ambient(u64::pow(prime, e))?;
            acc = acc.mul(&part);
        }
        Ok(acc)
    }

    fn hecke_prime_ambient(&self, p: u64) -> IntMatrix {
        let set = merel_matrices(p as i64);
        let m = self.p1.len();
        let mut action = IntMatrix::zero(m, m);
        for i in 0..m {
            let (c, d) = self.p1.rep(i);
            for h in &set {
                let c2 = c * h[0][0] + d * h[1][0];
                let d2 = c * h[0][1] + d * h[1][1];
                // symbols that become imprimitive at the level act as zero;
                // this only happens when p divides N
                if let Some(j) = self.p1.lookup(c2, d2) {
                    action[(i, j)] += BigInt::one();
                }
            }
        }
        self.ambient_from_symbol_action(&action)
    }

    /// `T_n` restricted to the cuspidal lattice.
    pub fn hecke_operator(&self, n: u64) -> Result<HeckeMatrix, ModSymError> {
        let ambient = self.hecke_ambient(n)?;
        let matrix = self
            .restrict_to_cuspidal(&ambient)
            .expect("Hecke operator preserves the cuspidal lattice");
        Ok(HeckeMatrix {
            index: n,
            matrix,
            ambient,
        })
    }

    /// The Atkin-Lehner involution `W_Q` for an exact divisor `Q` of the
    /// level, on the cuspidal lattice.
    pub fn atkin_lehner(&self, big_q: u64) -> Result<HeckeMatrix, ModSymError> {
        let n = self.level;
        if big_q == 0 || n % big_q != 0 || gcd_i64(big_q as i64, (n / big_q) as i64) != 1 {
            return Err(ModSymError::NotExactDivisor { level: n, q: big_q });
        }
        let (qq, nn) = (big_q as i64, n as i64);
        // w = [[Q s, -t], [N, Q]] with s Q + t (N/Q) = 1 has determinant Q
        // and normalizes Gamma_0(N)
        let (g, s, t) = egcd(qq, nn / qq);
        assert_eq!(g, 1);
        let w = [[qq * s, -t], [nn, qq]];
        debug_assert_eq!(w[0][0] * w[1][1] - w[0][1] * w[1][0], qq);

        let m = self.p1.len();
        let mut action = IntMatrix::zero(m, m);
        for i in 0..m {
            let lift = self.p1.lift(i);
            // the symbol is the path {g 0, g inf}; push both endpoints
            // through w and re-expand
            let from = mobius(&w, (lift[0][1], lift[1][1]));
            let to = mobius(&w, (lift[0][0], lift[1][0]));
            for (j, coeff) in self.modsym_to_manin(from, to) {
                action[(i, j)] += BigInt::from(coeff);
            }
        }
        let ambient = self.ambient_from_symbol_action(&action);
        let matrix = self
            .restrict_to_cuspidal(&ambient)
            .expect("Atkin-Lehner preserves the cuspidal lattice");
        Ok(HeckeMatrix {
            index: big_q,
            matrix,
            ambient,
        })
    }

    /// Expand the modular symbol {a, b} (projective endpoints) as an integer
    /// combination of Manin generators, by Manin's continued-fraction trick.
    fn modsym_to_manin(&self, a: (i128, i128), b: (i128, i128)) -> Vec<(usize, i64)> {
        let mut acc: HashMap<usize, i64> = HashMap::new();
        for (pt, sign) in [(b, 1i64), (a, -1i64)] {
            for (idx, c) in self.path_from_infinity(pt) {
                *acc.entry(idx).or_insert(0) += sign * c;
            }
        }
        acc.into_iter().filter(|&(_, c)| c != 0).collect()
    }

    /// The modular symbol {infinity, x} as Manin generators: if p_k/q_k are
    /// the continued-fraction convergents of x, the path is the sum of the
    /// symbols with bottom row (q_k, (-1)^{k-1} q_{k-1}).
    fn path_from_infinity(&self, pt: (i128, i128)) -> Vec<(usize, i64)> {
        let (mut num, mut den) = pt;
        if den == 0 {
            return Vec::new(); // {inf, inf} vanishes
        }
        if den < 0 {
            num = -num;
            den = -den;
        }
        let g = gcd_i128(num, den);
        if g > 1 {
            num /= g;
            den /= g;
        }
        let nn = self.level as i128;
        let mut out = Vec::new();
        let (mut p_prev, mut q_prev) = (1i128, 0i128); // convergent p_{-1}/q_{-1}
        let (mut a, mut b) = (num, den);
        let quot = a.div_euclid(b);
        let (mut p_cur, mut q_cur) = (quot, 1i128);
        (a, b) = (b, a - quot * b);
        {
            let c = q_cur.rem_euclid(nn) as i64;
            let d = (-q_prev).rem_euclid(nn) as i64;
            let idx = self.p1.lookup(c, d).expect("CF symbol is primitive");
            out.push((idx, 1));
        }
        let mut k = 0usize;
        while b != 0 {
            k += 1;
            let quot = a.div_euclid(b);
            let p_next = quot * p_cur + p_prev;
            let q_next = quot * q_cur + q_prev;
            (p_prev, q_prev) = (p_cur, q_cur);
            (p_cur, q_cur) = (p_next, q_next);
            (a, b) = (b, a - quot * b);
            let sign: i128 = if k % 2 == 1 { 1 } else { -1 };
            let c = q_cur.rem_euclid(nn) as i64;
            let d = (sign * q_prev).rem_euclid(nn) as i64;
            let idx = self.p1.lookup(c, d).expect("CF symbol is primitive");
            out.push((idx, 1));
        }
        debug_assert_eq!((p_cur, q_cur), (num, den), "convergents must end at x");
        out
    }
}

fn gcd_i128(a: i128, b: i128) -> i128 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn mobius(w: &[[i64; 2]; 2], pt: (i64, i64)) -> (i128, i128) {
    let (x, y) = (pt.0 as i128, pt.1 as i128);
    (
        w[0][0] as i128 * x + w[0][1] as i128 * y,
        w[1][0] as i128 * x + w[1][1] as i128 * y,
    )
}

/// Merel's family of integer matrices of determinant `p`: all
/// `[[a, b], [c, d]]` with `ad - bc = p`, `a > b >= 0`, `d > c >= 0`.
/// Their combined right action on Manin symbols computes `T_p`, with symbols
/// that become imprimitive at the level acting as zero.
pub fn merel_matrices(p: i64) -> Vec<[[i64; 2]; 2]> {
    let mut out = Vec::new();
    for a in 1..=p {
        for b in 0..a {
            // ad - bc = p with d > c >= 0 forces (a - b) c < p
            let mut c = 0;
            while (a - b) * c < p {
                let num = p + b * c;
                if num % a == 0 {
                    let d = num / a;
                    if d > c {
                        out.push([[a, b], [c, d]]);
                    }
                }
                c += 1;
            }
        }
    }
    out
}

#[cfg(test)]
mod tests;
