//! Exact arithmetic for modular Jacobians of squarefree two-prime level.
//!
//! This crate recomputes, from first principles, the arithmetic invariants of
//! `J_0(pq)` that control isogenies to the Jacobian of the companion Shimura
//! curve of discriminant `pq`:
//!
//! * weight-2 modular symbols and Hecke operators as exact integer matrices
//!   ([`modsym`]),
//! * the Hecke order as a rank-`g` lattice in a product of a rational and
//!   real quadratic number fields ([`hecke`]),
//! * the Eisenstein ideal, its maximal ideals, principal generators,
//!   multiplier rings and Gorenstein socles ([`ideals`]),
//! * component groups of the Neron model at the bad primes, computed as
//!   critical groups of mass-formula dual graphs ([`redgraph`]),
//! * point counts of the Jacobian over prime fields and the final
//!   classification of odd isogeny-kernel candidates ([`classify`]).
//!
//! Everything is computed over the integers or exact rationals; there is no
//! floating point anywhere. The linear-algebra kernel ([`zlinalg`]) is generic
//! over the integer scalar so that small experiments can run on `i64` while
//! the production pipeline uses arbitrary precision.

pub mod classify;
pub mod hecke;
pub mod ideals;
pub mod modsym;
pub mod redgraph;
pub mod verify;
pub mod zlinalg;

pub use num_bigint::BigInt;
pub use num_rational::BigRational;

/// Dense matrix of arbitrary-precision integers, the substrate for every
/// lattice computation in the crate.
pub type IntMatrix = zlinalg::Matrix<BigInt>;

/// Dense matrix over machine integers, for small exact computations.
pub type SmallMatrix = zlinalg::Matrix<i64>;

/// Finite abelian group in invariant-factor form.
pub type AbGroup = zlinalg::AbGroup;
pub mod arith;
