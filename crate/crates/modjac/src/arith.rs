//! Elementary number-theoretic helpers: gcds, primes, Legendre symbols and
//! integer factorization by trial division. Everything here is exact and
//! deterministic; inputs stay well below the sizes where sieving or
//! probabilistic methods would be warranted.

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub fn gcd_i64(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Extended gcd: returns (g, x, y) with a*x + b*y = g = gcd(a, b) >= 0.
pub fn egcd(a: i64, b: i64) -> (i64, i64, i64) {
    let (mut r0, mut r1) = (a, b);
    let (mut x0, mut x1) = (1i64, 0i64);
    let (mut y0, mut y1) = (0i64, 1i64);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (x0, x1) = (x1, x0 - q * x1);
        (y0, y1) = (y1, y0 - q * y1);
    }
    if r0 < 0 {
        (-r0, -x0, -y0)
    } else {
        (r0, x0, y0)
    }
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n % 2 == 0 {
        return n == 2;
    }
    let mut d = 3u64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

/// Primes in ascending order, `p <= bound`.
pub fn primes_up_to(bound: u64) -> Vec<u64> {
    (2..=bound).filter(|&n| is_prime(n)).collect()
}

/// Legendre symbol (a/p) for an odd prime p.
pub fn legendre(a: i64, p: u64) -> i64 {
    assert!(p > 2 && is_prime(p), "legendre needs an odd prime, got {p}");
    let a = a.rem_euclid(p as i64) as u64;
    if a == 0 {
        return 0;
    }
    let mut e = (p - 1) / 2;
    let mut acc = 1u128;
    let mut base = (a % p) as u128;
    let pp = p as u128;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * base % pp;
        }
        base = base * base % pp;
        e >>= 1;
    }
    if acc == 1 {
        1
    } else {
        -1
    }
}

/// Multiplicative order of a modulo m (gcd(a, m) = 1).
pub fn mult_order(a: u64, m: u64) -> u64 {
    assert_eq!(gcd_i64(a as i64, m as i64), 1);
    let mut x = (a % m) as u128;
    let step = (a % m) as u128;
    let mm = m as u128;
    let mut k = 1;
    while x != 1 {
        x = x * step % mm;
        k += 1;
        assert!(k <= m, "order search exceeded modulus");
    }
    k
}

/// Split a squarefree two-prime level into (p, q) with p < q.
pub fn split_two_primes(n: u64) -> Option<(u64, u64)> {
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            let q = n / p;
            if p != q && is_prime(p) && is_prime(q) {
                return Some((p, q));
            }
            return None;
        }
        p += 1;
    }
    None
}

/// Prime factorization with exponents, ascending primes.
/// Trial division; panics if the value exceeds u128.
pub fn factor(n: &BigInt) -> Vec<(u64, u32)> {
    assert!(!n.is_zero(), "cannot factor zero");
    let mut m = n.abs().to_u128().expect("factor: value exceeds u128");
    let mut out: Vec<(u64, u32)> = Vec::new();
    let mut push = |p: u64, e: u32| {
        if e > 0 {
            out.push((p, e));
        }
    };
    let mut e = 0;
    while m % 2 == 0 {
        m /= 2;
        e += 1;
    }
    push(2, e);
    let mut p = 3u128;
    while p * p <= m {
        let mut e = 0;
        while m % p == 0 {
            m /= p;
            e += 1;
        }
        push(p as u64, e);
        p += 2;
    }
    if m > 1 {
        push(m as u64, 1);
    }
    out
}

/// Render a factorization as `2^3 * 3 * 7`.
pub fn factor_string(n: &BigInt) -> String {
    if n.is_one() {
        return "1".to_string();
    }
    let sign = if n.is_negative() { "-" } else { "" };
    let parts: Vec<String> = factor(n)
        .into_iter()
        .map(|(p, e)| {
            if e == 1 {
                format!("{p}")
            } else {
                format!("{p}^{e}")
            }
        })
        .collect();
    format!("{sign}{}", parts.join(" * "))
}

/// Exact square root of a perfect-square BigInt; None if not a square.
pub fn exact_sqrt(n: &BigInt) -> Option<BigInt> {
    if n.is_negative() {
        return None;
    }
    let r = n.sqrt();
    if &r * &r == *n {
        Some(r)
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_primes_and_legendre() {
        assert_eq!(primes_up_to(20), vec![2, 3, 5, 7, 11, 13, 17, 19]);
        assert_eq!(legendre(-1, 5), 1);
        assert_eq!(legendre(-1, 7), -1);
        assert_eq!(legendre(-3, 13), 1);
        assert_eq!(legendre(-3, 7), 1);
        assert_eq!(legendre(2, 7), 1); // 7 splits in Z[sqrt(2)]
        assert_eq!(legendre(3, 7), -1); // 7 inert in Z[sqrt(3)]
    }

    #[test]
    fn factorization() {
        let n = BigInt::from(3466008);
        assert_eq!(factor(&n), vec![(2, 3), (3, 2), (7, 1), (13, 1), (23, 2)]);
        assert_eq!(factor_string(&n), "2^3 * 3^2 * 7 * 13 * 23^2");
        assert_eq!(factor_string(&BigInt::from(6144)), "2^11 * 3");
    }

    #[test]
    fn egcd_identity() {
        for (a, b) in [(12, 18), (-5, 7), (65, 84), (0, 9)] {
            let (g, x, y) = egcd(a, b);
            assert_eq!(a * x + b * y, g);
            assert_eq!(g, gcd_i64(a, b));
        }
    }

    #[test]
    fn orders() {
        assert_eq!(mult_order(19, 49), 6); // 19 splits completely in K_7
        assert_eq!(mult_order(3, 49), 42);
    }
}
