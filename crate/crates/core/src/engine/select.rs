//! Selection operators. They work on a slice of objective values and return
//! indices into it, so the same code serves the bank and a population.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which bank entries a Boltzmann selection may draw from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pool {
    AllUnique,
    TopK(usize),
}

/// Normalized `exp(-f/T)` weights, shifted by the minimum objective so the
/// best entry has weight one before normalization. Infinite objectives get
/// zero weight; a pool where every objective is infinite is uniform.
pub fn boltzmann_weights(values: &[f64], temperature: f64) -> Result<Vec<f64>> {
    if values.is_empty() {
        return Err(Error::Empty("selection pool"));
    }
    if !(temperature > 0.0) {
        return Err(Error::invalid(format!("temperature {temperature} must be positive")));
    }
    let fmin = values.iter().copied().fold(f64::INFINITY, f64::min);
    if fmin == f64::INFINITY {
        return Ok(vec![1.0 / values.len() as f64; values.len()]);
    }
    let w: Vec<f64> = values
        .iter()
        .map(|&f| if f == f64::INFINITY { 0.0 } else { (-(f - fmin) / temperature).exp() })
        .collect();
    let total: f64 = w.iter().sum();
    Ok(w.into_iter().map(|v| v / total).collect())
}

/// `n` draws with replacement, each index chosen with probability
/// proportional to `exp(-values[i] / T)`.
pub fn boltzmann_select<R: Rng + ?Sized>(values: &[f64], n: usize, temperature: f64, rng: &mut R) -> Result<Vec<usize>> {
    let w = boltzmann_weights(values, temperature)?;
    let dist = WeightedIndex::new(&w).map_err(|e| Error::invalid(e.to_string()))?;
    Ok((0..n).map(|_| dist.sample(rng)).collect())
}

/// `n` winners of `arity`-way tournaments, contestants drawn uniformly with
/// replacement; ties between contestants are broken uniformly.
pub fn tournament_select<R: Rng + ?Sized>(values: &[f64], n: usize, arity: usize, rng: &mut R) -> Result<Vec<usize>> {
    if values.is_empty() {
        return Err(Error::Empty("tournament population"));
    }
    if arity == 0 {
        return Err(Error::invalid("tournament arity must be at least 1"));
    }
    let mut out = Vec::with_capacity(n);
    let mut contestants = Vec::with_capacity(arity);
    for _ in 0..n {
        contestants.clear();
        contestants.extend((0..arity).map(|_| rng.random_range(0..values.len())));
        let best = contestants.iter().map(|&i| values[i]).fold(f64::INFINITY, f64::min);
        let tied: Vec<usize> = contestants.iter().copied().filter(|&i| values[i] <= best).collect();
        let pick = if tied.len() == 1 {
            tied[0]
        } else {
            tied[rng.random_range(0..tied.len())]
        };
        out.push(pick);
    }
    Ok(out)
}

/// Indices of the `k` lowest objectives, ties in index order.
pub fn greedy_select(values: &[f64], k: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    order.truncate(k);
    order
}
