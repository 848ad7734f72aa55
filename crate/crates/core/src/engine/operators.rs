use rand::Rng;

use crate::bits::BitString;
use crate::error::{Error, Result};

/// Flips every bit independently with probability `p_flip`.
pub fn mutate<R: Rng + ?Sized>(x: &BitString, p_flip: f64, rng: &mut R) -> BitString {
    let mut out = x.clone();
    if p_flip <= 0.0 {
        return out;
    }
    for i in 0..out.len() {
        if rng.random::<f64>() < p_flip {
            out.flip(i);
        }
    }
    out
}

/// Children of `a` and `b` with the segment `[i, j)` swapped.
pub fn two_point_crossover_at(a: &BitString, b: &BitString, i: usize, j: usize) -> Result<(BitString, BitString)> {
    a.check_len(b.len())?;
    if i > j || j > a.len() {
        return Err(Error::invalid(format!("cut points {i}, {j} invalid for length {}", a.len())));
    }
    let mut c = a.clone();
    let mut d = b.clone();
    for k in i..j {
        c.set(k, b.get(k) == 1);
        d.set(k, a.get(k) == 1);
    }
    Ok((c, d))
}

/// Two-point crossover with both cut points uniform on `0..=N`.
pub fn two_point_crossover<R: Rng + ?Sized>(a: &BitString, b: &BitString, rng: &mut R) -> Result<(BitString, BitString)> {
    a.check_len(b.len())?;
    let n = a.len();
    let (p, q) = (rng.random_range(0..=n), rng.random_range(0..=n));
    two_point_crossover_at(a, b, p.min(q), p.max(q))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    fn b(s: &str) -> BitString {
        s.parse().unwrap()
    }

    #[test]
    fn mutation_endpoints() {
        let x = b("0110100");
        let mut rng = seeded(1);
        assert_eq!(mutate(&x, 0.0, &mut rng), x);
        assert_eq!(mutate(&x, 1.0, &mut rng), b("1001011"));
    }

    #[test]
    fn fixed_cuts() {
        let (c, d) = two_point_crossover_at(&b("0000"), &b("1111"), 1, 3).unwrap();
        assert_eq!((c, d), (b("0110"), b("1001")));
        let (c, d) = two_point_crossover_at(&b("0101"), &b("1100"), 2, 2).unwrap();
        assert_eq!((c, d), (b("0101"), b("1100")));
        assert!(two_point_crossover_at(&b("01"), &b("011"), 0, 1).is_err());
        assert!(two_point_crossover_at(&b("01"), &b("01"), 2, 1).is_err());
    }

    #[test]
    fn alleles_conserved() {
        let mut rng = seeded(5);
        for _ in 0..200 {
            let x = BitString::random(12, &mut rng);
            let y = BitString::random(12, &mut rng);
            let (c, d) = two_point_crossover(&x, &y, &mut rng).unwrap();
            for k in 0..12 {
                let mut before = [x.get(k), y.get(k)];
                let mut after = [c.get(k), d.get(k)];
                before.sort();
                after.sort();
                assert_eq!(before, after);
            }
        }
    }
}
