//! The `verify-paper` criterion runner: every headline quantity the toolkit
//! is expected to reproduce, executed as a list of named checks with one
//! pass/fail line each. The CLI `verify-paper` subcommand and the acceptance
//! test suite both drive this module, so they cannot drift apart.

use serde::{Deserialize, Serialize};

/// Small deterministic xorshift generator for the randomized suites.
/// Reproducibility matters more than statistical quality here.
#[derive(Clone, Debug)]
pub struct Xorshift {
    state: u64,
}

impl Xorshift {
    pub fn new(seed: u64) -> Self {
        Xorshift {
            state: seed.wrapping_mul(0x9e3779b97f4a7c15).max(1),
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        let mut x = self.state;
        x ^= x << 13;
        x ^= x >> 7;
        x ^= x << 17;
        self.state = x;
        x
    }

    /// Uniform-ish value in `0..bound`.
    pub fn below(&mut self, bound: u64) -> u64 {
        assert!(bound > 0);
        self.next_u64() % bound
    }

    /// Signed value in `[-bound, bound]`.
    pub fn signed(&mut self, bound: i64) -> i64 {
        self.below(2 * bound as u64 + 1) as i64 - bound
    }
}

/// Outcome of one acceptance criterion.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CriterionResult {
    pub id: u32,
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl CriterionResult {
    pub fn line(&self) -> String {
        let status = if self.passed { "PASS" } else { "FAIL" };
        format!(
            "[{status}] criterion {:>2}: {} -- {}",
            self.id, self.name, self.detail
        )
    }
}

mod criteria;
pub use criteria::run_all;
