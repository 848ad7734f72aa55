//! Chain-structured Bayesian network `p(x_1) Π p(x_{i+1} | x_i)` fitted by
//! (smoothed) maximum likelihood.

use std::fmt::Write as _;

use rand::Rng;

use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::mps::{Mode, Mps, SiteTensor};

use super::born::check_data;

/// `conditionals[i][a][b] = p(x_{i+1} = b | x_i = a)`; every row sums to one.
#[derive(Clone, Debug, PartialEq)]
pub struct ChainBayes {
    p_first: [f64; 2],
    conditionals: Vec<[[f64; 2]; 2]>,
    smoothing: f64,
}

/// Smoothed frequencies of `counts`; uniform when nothing was observed and
/// there is no pseudo-count.
fn frequencies(counts: [f64; 2], smoothing: f64) -> [f64; 2] {
    let total = counts[0] + counts[1] + 2.0 * smoothing;
    if total == 0.0 {
        return [0.5, 0.5];
    }
    [(counts[0] + smoothing) / total, (counts[1] + smoothing) / total]
}

/// Fits the chain with `smoothing` pseudo-counts per outcome (0 is plain MLE).
pub fn fit_chain_bayes(data: &[BitString], smoothing: f64) -> Result<ChainBayes> {
    if !(smoothing >= 0.0) || !smoothing.is_finite() {
        return Err(Error::invalid("smoothing must be finite and >= 0"));
    }
    let n = check_data(data, None)?;
    let mut first = [0.0; 2];
    let mut pairs = vec![[[0.0; 2]; 2]; n - 1];
    for x in data {
        first[x.get(0) as usize] += 1.0;
        for (i, table) in pairs.iter_mut().enumerate() {
            table[x.get(i) as usize][x.get(i + 1) as usize] += 1.0;
        }
    }
    let conditionals = pairs
        .iter()
        .map(|t| [frequencies(t[0], smoothing), frequencies(t[1], smoothing)])
        .collect();
    Ok(ChainBayes {
        p_first: frequencies(first, smoothing),
        conditionals,
        smoothing,
    })
}

impl ChainBayes {
    pub fn new(p_first: [f64; 2], conditionals: Vec<[[f64; 2]; 2]>, smoothing: f64) -> Result<Self> {
        let ok = |row: &[f64; 2]| row.iter().all(|&p| (0.0..=1.0).contains(&p)) && (row[0] + row[1] - 1.0).abs() < 1e-9;
        if !ok(&p_first) || !conditionals.iter().all(|t| ok(&t[0]) && ok(&t[1])) {
            return Err(Error::invalid("chain tables must be stochastic"));
        }
        Ok(ChainBayes {
            p_first,
            conditionals,
            smoothing,
        })
    }

    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("chain needs at least one variable"));
        }
        Ok(ChainBayes {
            p_first: [0.5; 2],
            conditionals: vec![[[0.5; 2]; 2]; n - 1],
            smoothing: 0.0,
        })
    }

    pub fn n_sites(&self) -> usize {
        self.conditionals.len() + 1
    }

    pub fn p_first(&self) -> [f64; 2] {
        self.p_first
    }

    pub fn conditionals(&self) -> &[[[f64; 2]; 2]] {
        &self.conditionals
    }

    pub fn smoothing(&self) -> f64 {
        self.smoothing
    }

    pub fn chain_probability(&self, x: &BitString) -> Result<f64> {
        x.check_len(self.n_sites())?;
        let mut p = self.p_first[x.get(0) as usize];
        for (i, t) in self.conditionals.iter().enumerate() {
            p *= t[x.get(i) as usize][x.get(i + 1) as usize];
        }
        Ok(p)
    }

    /// Ancestral sampling along the chain.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> BitString {
        let mut bits = Vec::with_capacity(self.n_sites());
        let draw = |p: &[f64; 2], rng: &mut R| u8::from(rng.random::<f64>() * (p[0] + p[1]) >= p[0]);
        let mut prev = draw(&self.p_first, rng);
        bits.push(prev);
        for t in &self.conditionals {
            prev = draw(&t[prev as usize], rng);
            bits.push(prev);
        }
        BitString::from_bits(bits)
    }

    /// The same distribution as a nonnegative MPS of bond dimension 2: each
    /// bond carries a copy of the previous bit.
    pub fn to_mps(&self) -> Mps {
        let n = self.n_sites();
        if n == 1 {
            let t = SiteTensor::from_vec(1, 1, self.p_first.to_vec());
            return Mps::from_tensors(vec![t], Mode::DirectPositive, 2).expect("valid chain tensors");
        }
        let mut tensors = Vec::with_capacity(n);
        tensors.push(SiteTensor::from_fn(1, 2, |_, s, r| if s == r { self.p_first[s] } else { 0.0 }));
        for (i, t) in self.conditionals.iter().enumerate() {
            if i + 2 == n {
                tensors.push(SiteTensor::from_fn(2, 1, |a, s, _| t[a][s]));
            } else {
                tensors.push(SiteTensor::from_fn(2, 2, |a, s, r| if s == r { t[a][s] } else { 0.0 }));
            }
        }
        Mps::from_tensors(tensors, Mode::DirectPositive, 2).expect("valid chain tensors")
    }

    /// Text table: a `tneda-chain 1` header, `smoothing <α>`, `first <p0> <p1>`,
    /// then one line `<p(0|0)> <p(1|0)> <p(0|1)> <p(1|1)>` per link.
    pub fn dump(&self) -> String {
        let mut out = String::from("tneda-chain 1\n");
        writeln!(out, "smoothing {:?}", self.smoothing).unwrap();
        writeln!(out, "first {:?} {:?}", self.p_first[0], self.p_first[1]).unwrap();
        for t in &self.conditionals {
            writeln!(out, "{:?} {:?} {:?} {:?}", t[0][0], t[0][1], t[1][0], t[1][1]).unwrap();
        }
        out
    }

    pub fn load(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty());
        match lines.next() {
            Some((_, "tneda-chain 1")) => {}
            Some((no, _)) => return Err(Error::parse(no, "missing tneda-chain header")),
            None => return Err(Error::parse(0, "empty input")),
        }
        let numbers = |no: usize, text: &str| -> Result<Vec<f64>> {
            text.split_whitespace()
                .map(|v| v.parse::<f64>().map_err(|_| Error::parse(no, format!("bad number {v:?}"))))
                .collect()
        };
        let (no, line) = lines.next().ok_or_else(|| Error::parse(0, "missing smoothing line"))?;
        let rest = line
            .strip_prefix("smoothing ")
            .ok_or_else(|| Error::parse(no, "expected `smoothing <value>`"))?;
        let smoothing = match numbers(no, rest)?[..] {
            [v] => v,
            _ => return Err(Error::parse(no, "expected one smoothing value")),
        };
        let (no, line) = lines.next().ok_or_else(|| Error::parse(0, "missing first line"))?;
        let rest = line
            .strip_prefix("first ")
            .ok_or_else(|| Error::parse(no, "expected `first <p0> <p1>`"))?;
        let p_first = match numbers(no, rest)?[..] {
            [a, b] => [a, b],
            _ => return Err(Error::parse(no, "expected two probabilities")),
        };
        let mut conditionals = Vec::new();
        for (no, line) in lines {
            match numbers(no, line)?[..] {
                [a, b, c, d] => conditionals.push([[a, b], [c, d]]),
                _ => return Err(Error::parse(no, "expected four probabilities")),
            }
        }
        ChainBayes::new(p_first, conditionals, smoothing)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    fn all(n: usize) -> Vec<BitString> {
        (0..1u64 << n).map(|v| BitString::from_index(v, n)).collect()
    }

    #[test]
    fn laplace_smoothing_on_single_datum() {
        let b = fit_chain_bayes(&[BitString::zeros(2)], 1.0).unwrap();
        assert!((b.p_first()[0] - 2.0 / 3.0).abs() < 1e-15);
        assert!((b.p_first()[1] - 1.0 / 3.0).abs() < 1e-15);
        // Row x_1 = 1 was never observed: pure pseudo-counts.
        assert_eq!(b.conditionals()[0][1], [0.5, 0.5]);
    }

    #[test]
    fn copied_bits_give_identity_tables() {
        let data: Vec<BitString> = ["0000", "1111", "0000"].iter().map(|s| s.parse().unwrap()).collect();
        let b = fit_chain_bayes(&data, 0.0).unwrap();
        for t in b.conditionals() {
            assert_eq!(*t, [[1.0, 0.0], [0.0, 1.0]]);
        }
        let m = ChainBayes::new([0.5, 0.5], vec![[[1.0, 0.0], [0.0, 1.0]]; 3], 0.0).unwrap();
        for x in all(4) {
            let p = m.chain_probability(&x).unwrap();
            let constant = x.count_ones() == 0 || x.count_ones() == 4;
            assert_eq!(p > 0.0, constant);
        }
    }

    #[test]
    fn full_cube_fits_uniform() {
        let b = fit_chain_bayes(&all(5), 0.0).unwrap();
        assert_eq!(b.p_first(), [0.5, 0.5]);
        assert!(b.conditionals().iter().all(|t| *t == [[0.5; 2]; 2]));
        for x in all(5) {
            assert_eq!(b.chain_probability(&x).unwrap(), 1.0 / 32.0);
        }
    }

    #[test]
    fn smoothing_gives_full_support() {
        let b = fit_chain_bayes(&[BitString::ones(6)], 0.5).unwrap();
        let total: f64 = all(6).iter().map(|x| b.chain_probability(x).unwrap()).sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert!(all(6).iter().all(|x| b.chain_probability(x).unwrap() > 0.0));
    }

    #[test]
    fn mps_form_matches_chain() {
        let mut rng = seeded(9);
        let data: Vec<BitString> = (0..30).map(|_| BitString::random(7, &mut rng)).collect();
        let b = fit_chain_bayes(&data, 1.0).unwrap();
        let m = b.to_mps();
        assert!((m.partition_function().unwrap() - 1.0).abs() < 1e-12);
        for x in all(7) {
            assert!((m.probability(&x).unwrap() - b.chain_probability(&x).unwrap()).abs() < 1e-14);
        }
        let one = fit_chain_bayes(&[BitString::ones(1)], 1.0).unwrap().to_mps();
        assert!((one.probability(&BitString::ones(1)).unwrap() - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn dump_load_round_trip() {
        let mut rng = seeded(3);
        let data: Vec<BitString> = (0..10).map(|_| BitString::random(5, &mut rng)).collect();
        let b = fit_chain_bayes(&data, 1.0).unwrap();
        assert_eq!(ChainBayes::load(&b.dump()).unwrap(), b);
        assert!(matches!(
            ChainBayes::load("tneda-chain 1\nsmoothing 1\nfirst 0.5 0.5\n0.5 0.5 x 0.5\n"),
            Err(Error::Parse { line: 4, .. })
        ));
    }

    #[test]
    fn errors() {
        assert!(matches!(fit_chain_bayes(&[], 1.0), Err(Error::Empty(_))));
        assert!(fit_chain_bayes(&[BitString::zeros(2)], -1.0).is_err());
        let b = ChainBayes::uniform(3).unwrap();
        assert!(b.chain_probability(&BitString::zeros(4)).is_err());
    }
}
