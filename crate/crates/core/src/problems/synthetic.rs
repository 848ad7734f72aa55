//! Synthetic test functions. These are not benchmark instances; they exist
//! so solvers can be exercised against known optima.

use super::Problem;
use crate::bits::BitString;
use crate::error::{Error, Result};

/// `f(x) = -|x|`, optimum at all ones.
#[derive(Clone, Debug)]
pub struct OneMax {
    n: usize,
}

impl OneMax {
    pub fn new(n: usize) -> Self {
        OneMax { n }
    }
}

impl Problem for OneMax {
    fn dim(&self) -> usize {
        self.n
    }

    fn evaluate(&self, x: &BitString) -> f64 {
        -(x.count_ones() as f64)
    }

    fn known_optimum(&self) -> Option<f64> {
        Some(-(self.n as f64))
    }
}

/// Concatenated deceptive traps over consecutive blocks of `k` bits. A block
/// with `u` ones scores `k` when full and `k - 1 - u` otherwise, so every
/// block's gradient points towards all zeros while the optimum is all ones.
#[derive(Clone, Debug)]
pub struct Trap {
    n: usize,
    k: usize,
}

impl Trap {
    pub fn new(n: usize, k: usize) -> Result<Self> {
        if k < 2 || n == 0 || !n.is_multiple_of(k) {
            return Err(Error::invalid(format!("trap needs k >= 2 dividing n (n={n}, k={k})")));
        }
        Ok(Trap { n, k })
    }
}

impl Problem for Trap {
    fn dim(&self) -> usize {
        self.n
    }

    fn evaluate(&self, x: &BitString) -> f64 {
        let score: usize = x
            .bits()
            .chunks(self.k)
            .map(|block| {
                let u = block.iter().filter(|&&b| b == 1).count();
                if u == self.k {
                    self.k
                } else {
                    self.k - 1 - u
                }
            })
            .sum();
        -(score as f64)
    }

    fn known_optimum(&self) -> Option<f64> {
        Some(-(self.n as f64))
    }
}
