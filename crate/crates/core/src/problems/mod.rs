//! Objective functions. Everything is minimized; maximization problems are
//! negated at this boundary.

mod knapsack;
mod maxsat;
mod portfolio;
mod synthetic;

pub use knapsack::Knapsack;
pub use maxsat::{parse_dimacs_cnf, MaxSat};
pub use portfolio::{load_covariance_csv, random_covariance, CovarianceInput, Portfolio};
pub use synthetic::{OneMax, Trap};

use std::sync::Arc;

use crate::bits::BitString;
use crate::error::{Error, Result};

/// Largest dimension accepted by [`brute_force_optimum`].
pub const BRUTE_FORCE_LIMIT: usize = 24;

/// An objective `f: {0,1}^N → ℝ ∪ {+∞}` to be minimized.
///
/// Implementations must be pure; runs evaluate them concurrently.
pub trait Problem: Send + Sync {
    fn dim(&self) -> usize;

    /// Objective of `x`. Callers guarantee `x.len() == self.dim()`.
    fn evaluate(&self, x: &BitString) -> f64;

    /// The best achievable objective, when known.
    fn known_optimum(&self) -> Option<f64> {
        None
    }

    /// Length-checked [`evaluate`](Self::evaluate).
    fn objective(&self, x: &BitString) -> Result<f64> {
        x.check_len(self.dim())?;
        Ok(self.evaluate(x))
    }
}

impl<P: Problem + ?Sized> Problem for Arc<P> {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn evaluate(&self, x: &BitString) -> f64 {
        (**self).evaluate(x)
    }

    fn known_optimum(&self) -> Option<f64> {
        (**self).known_optimum()
    }
}

impl<P: Problem + ?Sized> Problem for &P {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn evaluate(&self, x: &BitString) -> f64 {
        (**self).evaluate(x)
    }

    fn known_optimum(&self) -> Option<f64> {
        (**self).known_optimum()
    }
}

/// Exhaustive search over all `2^N` strings in lexicographic order; the
/// first minimizer wins ties.
pub fn brute_force_optimum<P: Problem + ?Sized>(problem: &P) -> Result<(BitString, f64)> {
    let n = problem.dim();
    if n > BRUTE_FORCE_LIMIT {
        return Err(Error::TooLarge {
            dim: n,
            limit: BRUTE_FORCE_LIMIT,
        });
    }
    let mut best = (BitString::zeros(n), problem.evaluate(&BitString::zeros(n)));
    for v in 1..1u64 << n {
        let x = BitString::from_index(v, n);
        let f = problem.evaluate(&x);
        if f < best.1 {
            best = (x, f);
        }
    }
    Ok(best)
}

/// `(f - f*) / |f*|`, or the plain gap `f - f*` when `f* = 0`.
pub fn relative_error(f: f64, optimum: f64) -> f64 {
    if optimum == 0.0 {
        f - optimum
    } else {
        (f - optimum) / optimum.abs()
    }
}

/// Presents `inner` under a variable reordering: position `k` of the solver's
/// string is variable `perm[k]` of the original problem.
pub struct PermutedProblem<P> {
    inner: P,
    perm: Vec<usize>,
}

impl<P: Problem> PermutedProblem<P> {
    pub fn new(inner: P, perm: Vec<usize>) -> Result<Self> {
        let n = inner.dim();
        let mut seen = vec![false; n];
        if perm.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                actual: perm.len(),
            });
        }
        for &p in &perm {
            if p >= n || seen[p] {
                return Err(Error::invalid("ordering is not a permutation"));
            }
            seen[p] = true;
        }
        Ok(PermutedProblem { inner, perm })
    }

    pub fn perm(&self) -> &[usize] {
        &self.perm
    }

    pub fn inner(&self) -> &P {
        &self.inner
    }

    /// Maps a solver-side string back to the original variable order.
    pub fn to_original(&self, x: &BitString) -> BitString {
        x.unpermuted(&self.perm)
    }
}

impl<P: Problem> Problem for PermutedProblem<P> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn evaluate(&self, x: &BitString) -> f64 {
        self.inner.evaluate(&x.unpermuted(&self.perm))
    }

    fn known_optimum(&self) -> Option<f64> {
        self.inner.known_optimum()
    }
}
