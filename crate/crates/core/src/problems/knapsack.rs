use std::fmt::Write as _;

use rand::Rng;

use super::Problem;
use crate::bits::BitString;
use crate::error::{Error, Result};

/// 0/1 knapsack as minimization: a feasible selection scores minus its total
/// value, an overweight one scores `excess · (1 + Σ values)`, which is
/// positive and therefore worse than every feasible selection.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Knapsack {
    values: Vec<u64>,
    weights: Vec<u64>,
    capacity: u64,
}

impl Knapsack {
    pub fn new(values: Vec<u64>, weights: Vec<u64>, capacity: u64) -> Result<Self> {
        if values.len() != weights.len() {
            return Err(Error::DimensionMismatch {
                expected: values.len(),
                actual: weights.len(),
            });
        }
        if values.is_empty() {
            return Err(Error::Empty("knapsack items"));
        }
        if values.iter().chain(&weights).any(|&v| v == 0) || capacity == 0 {
            return Err(Error::invalid("knapsack values, weights and capacity must be positive"));
        }
        Ok(Knapsack {
            values,
            weights,
            capacity,
        })
    }

    /// Values and weights uniform on `1..=100`, capacity half the total weight.
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Self> {
        let values: Vec<u64> = (0..n).map(|_| rng.random_range(1..=100)).collect();
        let weights: Vec<u64> = (0..n).map(|_| rng.random_range(1..=100)).collect();
        let capacity = (weights.iter().sum::<u64>() / 2).max(1);
        Knapsack::new(values, weights, capacity)
    }

    pub fn values(&self) -> &[u64] {
        &self.values
    }

    pub fn weights(&self) -> &[u64] {
        &self.weights
    }

    pub fn capacity(&self) -> u64 {
        self.capacity
    }

    pub fn total_weight(&self, x: &BitString) -> u64 {
        self.weights.iter().zip(x.bits()).filter(|(_, &b)| b == 1).map(|(w, _)| w).sum()
    }

    pub fn total_value(&self, x: &BitString) -> u64 {
        self.values.iter().zip(x.bits()).filter(|(_, &b)| b == 1).map(|(v, _)| v).sum()
    }

    /// Exact optimum by dynamic programming over capacities, as
    /// `(selection, objective)`.
    pub fn dp_optimum(&self) -> (BitString, f64) {
        let n = self.values.len();
        let cap = self.capacity as usize;
        // best[i][c]: max value using items i.. with capacity c.
        let mut best = vec![vec![0u64; cap + 1]; n + 1];
        for i in (0..n).rev() {
            let w = self.weights[i] as usize;
            for c in 0..=cap {
                let skip = best[i + 1][c];
                best[i][c] = if w <= c {
                    skip.max(best[i + 1][c - w] + self.values[i])
                } else {
                    skip
                };
            }
        }
        let mut x = BitString::zeros(n);
        let mut c = cap;
        for i in 0..n {
            if best[i][c] != best[i + 1][c] {
                x.set(i, true);
                c -= self.weights[i] as usize;
            }
        }
        (x, -(best[0][cap] as f64))
    }

    /// Parses the text format: first line `<N> <capacity>`, then `N` lines
    /// `<value> <weight>`. Blank lines are ignored.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty());
        let ints = |no: usize, line: &str| -> Result<Vec<u64>> {
            let v = line
                .split_whitespace()
                .map(|t| t.parse::<u64>().map_err(|_| Error::parse(no, format!("bad integer {t:?}"))))
                .collect::<Result<Vec<_>>>()?;
            if v.len() != 2 {
                return Err(Error::parse(no, format!("expected two integers, found {}", v.len())));
            }
            Ok(v)
        };
        let (no, head) = lines.next().ok_or_else(|| Error::parse(0, "empty knapsack file"))?;
        let head = ints(no, head)?;
        let (n, capacity) = (head[0] as usize, head[1]);
        let mut values = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        for (no, line) in lines {
            if values.len() == n {
                return Err(Error::parse(no, format!("more than {n} items")));
            }
            let item = ints(no, line)?;
            values.push(item[0]);
            weights.push(item[1]);
        }
        if values.len() != n {
            return Err(Error::parse(1, format!("header declares {n} items, found {}", values.len())));
        }
        Knapsack::new(values, weights, capacity).map_err(|e| Error::parse(1, e.to_string()))
    }

    pub fn serialize(&self) -> String {
        let mut out = String::new();
        writeln!(out, "{} {}", self.values.len(), self.capacity).unwrap();
        for (v, w) in self.values.iter().zip(&self.weights) {
            writeln!(out, "{v} {w}").unwrap();
        }
        out
    }
}

impl Problem for Knapsack {
    fn dim(&self) -> usize {
        self.values.len()
    }

    fn evaluate(&self, x: &BitString) -> f64 {
        let weight = self.total_weight(x);
        if weight <= self.capacity {
            -(self.total_value(x) as f64)
        } else {
            let total: u64 = self.values.iter().sum();
            ((weight - self.capacity) as f64) * (1.0 + total as f64)
        }
    }
}
