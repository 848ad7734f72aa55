use std::collections::HashMap;

use crate::bits::BitString;

#[derive(Clone, Debug, PartialEq)]
pub struct Entry {
    pub x: BitString,
    pub value: f64,
    /// Generation in which the string was first evaluated.
    pub generation: usize,
}

/// Every distinct string evaluated during a run, in insertion order.
///
/// The number of entries equals the number of objective calls made.
#[derive(Clone, Debug, Default)]
pub struct SolutionBank {
    index: HashMap<BitString, usize>,
    entries: Vec<Entry>,
}

impl SolutionBank {
    pub fn new() -> Self {
        SolutionBank::default()
    }

    /// Adds `x` unless already present. NaN objectives are stored as `+∞`.
    /// Returns `true` for a new string.
    pub fn insert(&mut self, x: BitString, value: f64, generation: usize) -> bool {
        if self.index.contains_key(&x) {
            return false;
        }
        let value = if value.is_nan() { f64::INFINITY } else { value };
        self.index.insert(x.clone(), self.entries.len());
        self.entries.push(Entry { x, value, generation });
        true
    }

    pub fn contains(&self, x: &BitString) -> bool {
        self.index.contains_key(x)
    }

    pub fn get(&self, x: &BitString) -> Option<&Entry> {
        self.index.get(x).map(|&i| &self.entries[i])
    }

    pub fn position(&self, x: &BitString) -> Option<usize> {
        self.index.get(x).copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[Entry] {
        &self.entries
    }

    pub fn entry(&self, i: usize) -> &Entry {
        &self.entries[i]
    }

    /// Lowest objective; the earliest inserted wins ties.
    pub fn best(&self) -> Option<&Entry> {
        self.best_index().map(|i| &self.entries[i])
    }

    pub fn best_index(&self) -> Option<usize> {
        (0..self.entries.len()).reduce(|b, i| if self.entries[i].value < self.entries[b].value { i } else { b })
    }

    /// Entry indices sorted by objective, ties in insertion order.
    pub fn ranked(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.entries.len()).collect();
        order.sort_by(|&a, &b| self.entries[a].value.total_cmp(&self.entries[b].value));
        order
    }

    /// The `k` best entries (all of them if `k ≥ len`).
    pub fn top_k(&self, k: usize) -> Vec<usize> {
        let mut order = self.ranked();
        order.truncate(k);
        order
    }

    pub fn values(&self, indices: &[usize]) -> Vec<f64> {
        indices.iter().map(|&i| self.entries[i].value).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b(s: &str) -> BitString {
        s.parse().unwrap()
    }

    #[test]
    fn deduplicates_and_ranks() {
        let mut bank = SolutionBank::new();
        assert!(bank.insert(b("00"), 3.0, 0));
        assert!(bank.insert(b("01"), 1.0, 0));
        assert!(!bank.insert(b("00"), -5.0, 1));
        assert!(bank.insert(b("10"), 1.0, 1));
        assert!(bank.insert(b("11"), f64::NAN, 2));
        assert_eq!(bank.len(), 4);
        assert_eq!(bank.get(&b("00")).unwrap().value, 3.0);
        assert_eq!(bank.ranked(), vec![1, 2, 0, 3]);
        assert_eq!(bank.top_k(2), vec![1, 2]);
        assert_eq!(bank.best().unwrap().x, b("01"));
        assert_eq!(bank.entry(3).value, f64::INFINITY);
        assert_eq!(bank.get(&b("10")).unwrap().generation, 1);
    }
}
