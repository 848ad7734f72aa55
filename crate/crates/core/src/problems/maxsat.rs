use std::fmt::Write as _;

use rand::seq::index::sample;
use rand::Rng;

use super::Problem;
use crate::bits::BitString;
use crate::error::{Error, Result};

/// Max-SAT with objective = number of unsatisfied clauses. Literal `+v` is
/// satisfied by `x_{v-1} = 1`, `-v` by `x_{v-1} = 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MaxSat {
    n_vars: usize,
    clauses: Vec<Vec<i32>>,
}

impl MaxSat {
    pub fn new(n_vars: usize, clauses: Vec<Vec<i32>>) -> Result<Self> {
        if n_vars == 0 {
            return Err(Error::invalid("formula needs at least one variable"));
        }
        for c in &clauses {
            if let Some(&l) = c.iter().find(|&&l| l == 0 || l.unsigned_abs() as usize > n_vars) {
                return Err(Error::invalid(format!("literal {l} out of range 1..={n_vars}")));
            }
        }
        Ok(MaxSat { n_vars, clauses })
    }

    /// Uniform random 3-SAT: three distinct variables per clause, each negated
    /// with probability 1/2.
    pub fn random_3sat<R: Rng + ?Sized>(n_vars: usize, n_clauses: usize, rng: &mut R) -> Result<Self> {
        if n_vars < 3 {
            return Err(Error::invalid("3-SAT needs at least three variables"));
        }
        let clauses = (0..n_clauses)
            .map(|_| {
                sample(rng, n_vars, 3)
                    .into_iter()
                    .map(|v| {
                        let lit = v as i32 + 1;
                        if rng.random::<bool>() {
                            -lit
                        } else {
                            lit
                        }
                    })
                    .collect()
            })
            .collect();
        MaxSat::new(n_vars, clauses)
    }

    /// Random 3-SAT conditioned on being satisfied by a hidden assignment,
    /// which is returned alongside.
    pub fn random_planted_3sat<R: Rng + ?Sized>(
        n_vars: usize,
        n_clauses: usize,
        rng: &mut R,
    ) -> Result<(Self, BitString)> {
        let hidden = BitString::random(n_vars, rng);
        let mut clauses = Vec::with_capacity(n_clauses);
        while clauses.len() < n_clauses {
            let c = MaxSat::random_3sat(n_vars, 1, rng)?.clauses.remove(0);
            if c.iter().any(|&l| literal_true(l, &hidden)) {
                clauses.push(c);
            }
        }
        Ok((MaxSat::new(n_vars, clauses)?, hidden))
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn clauses(&self) -> &[Vec<i32>] {
        &self.clauses
    }

    /// Clauses whose length is not three; nonzero means the formula is
    /// general CNF rather than 3-SAT.
    pub fn irregular_clauses(&self) -> usize {
        self.clauses.iter().filter(|c| c.len() != 3).count()
    }

    pub fn is_3sat(&self) -> bool {
        self.irregular_clauses() == 0
    }

    pub fn unsatisfied(&self, x: &BitString) -> usize {
        self.clauses.iter().filter(|c| !c.iter().any(|&l| literal_true(l, x))).count()
    }

    /// Canonical DIMACS text: problem line then one clause per line.
    pub fn serialize(&self) -> String {
        let mut out = String::new();
        writeln!(out, "p cnf {} {}", self.n_vars, self.clauses.len()).unwrap();
        for c in &self.clauses {
            for l in c {
                write!(out, "{l} ").unwrap();
            }
            writeln!(out, "0").unwrap();
        }
        out
    }
}

fn literal_true(l: i32, x: &BitString) -> bool {
    let bit = x.get(l.unsigned_abs() as usize - 1) == 1;
    if l > 0 {
        bit
    } else {
        !bit
    }
}

impl Problem for MaxSat {
    fn dim(&self) -> usize {
        self.n_vars
    }

    fn evaluate(&self, x: &BitString) -> f64 {
        self.unsatisfied(x) as f64
    }
}

/// Parses DIMACS CNF. Comment lines (`c ...`) are skipped, clauses may span
/// lines and end at `0`, and a line starting with `%` ends the clause list.
/// Clauses of any length are accepted; see [`MaxSat::irregular_clauses`].
pub fn parse_dimacs_cnf(text: &str) -> Result<MaxSat> {
    let mut header: Option<(usize, usize, usize)> = None;
    let mut clauses: Vec<Vec<i32>> = Vec::new();
    let mut current: Vec<i32> = Vec::new();
    let mut last_line = 0;
    for (i, raw) in text.lines().enumerate() {
        let no = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('c') {
            continue;
        }
        if line.starts_with('%') {
            break;
        }
        if line.starts_with('p') {
            if header.is_some() {
                return Err(Error::parse(no, "duplicate problem line"));
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            match fields[..] {
                ["p", "cnf", v, c] => {
                    let v = v.parse().map_err(|_| Error::parse(no, "bad variable count"))?;
                    let c = c.parse().map_err(|_| Error::parse(no, "bad clause count"))?;
                    header = Some((no, v, c));
                }
                _ => return Err(Error::parse(no, "expected `p cnf <vars> <clauses>`")),
            }
            continue;
        }
        let (_, n_vars, _) = header.ok_or_else(|| Error::parse(no, "clause before problem line"))?;
        for tok in line.split_whitespace() {
            let lit: i32 = tok.parse().map_err(|_| Error::parse(no, format!("bad literal {tok:?}")))?;
            if lit == 0 {
                clauses.push(std::mem::take(&mut current));
            } else if lit.unsigned_abs() as usize > n_vars {
                return Err(Error::parse(no, format!("literal {lit} exceeds {n_vars} variables")));
            } else {
                current.push(lit);
            }
        }
        last_line = no;
    }
    let (p_line, n_vars, n_clauses) = header.ok_or_else(|| Error::parse(0, "missing problem line"))?;
    if !current.is_empty() {
        return Err(Error::parse(last_line, "last clause is not terminated by 0"));
    }
    if clauses.len() != n_clauses {
        return Err(Error::parse(
            p_line,
            format!("problem line declares {n_clauses} clauses, found {}", clauses.len()),
        ));
    }
    MaxSat::new(n_vars, clauses).map_err(|e| Error::parse(p_line, e.to_string()))
}
