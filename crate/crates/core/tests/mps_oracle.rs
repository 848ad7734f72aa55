//! Brute-force checks of contraction, sampling and diffusion.

use proptest::prelude::*;
use rand::Rng;
use tneda::mps::{canonicalize_split, Mode, Mps, SiteTensor, TwoSiteTensor};
use tneda::rng::seeded;
use tneda::BitString;

fn strings(n: usize) -> Vec<BitString> {
    (0..1u64 << n).map(|v| BitString::from_index(v, n)).collect()
}

/// Product of the selected matrices, computed without any library helper.
fn raw_value(m: &Mps, x: &BitString) -> f64 {
    let mut row = vec![1.0];
    for (i, t) in m.tensors().iter().enumerate() {
        let s = x.get(i) as usize;
        let mut next = vec![0.0; t.right()];
        for (l, &rl) in row.iter().enumerate() {
            for (r, nr) in next.iter_mut().enumerate() {
                *nr += rl * t.get(l, s, r);
            }
        }
        row = next;
    }
    row[0]
}

fn raw_weight(m: &Mps, x: &BitString) -> f64 {
    let v = raw_value(m, x);
    match m.mode() {
        Mode::Amplitude => v * v,
        _ => v,
    }
}

fn brute_probs(m: &Mps) -> Vec<f64> {
    let w: Vec<f64> = strings(m.n_sites()).iter().map(|x| raw_weight(m, x)).collect();
    let z: f64 = w.iter().sum();
    w.into_iter().map(|v| v / z).collect()
}

/// `q̃(x) = Σ_y Π_i D(x_i | y_i) q(y)` by a full double sum.
fn brute_diffused(m: &Mps, p: f64) -> Vec<f64> {
    let n = m.n_sites();
    let q = brute_probs(m);
    (0..1u64 << n)
        .map(|x| {
            (0..1u64 << n)
                .map(|y| {
                    let flips = (x ^ y).count_ones() as i32;
                    p.powi(flips) * (1.0 - p).powi(n as i32 - flips) * q[y as usize]
                })
                .sum()
        })
        .collect()
}

#[test]
fn partition_function_matches_enumeration() {
    for seed in 0..20 {
        for mode in [Mode::Amplitude, Mode::DirectPositive] {
            let n = 2 + (seed as usize % 11);
            let m = Mps::random(n, 1 + seed as usize % 4, mode, &mut seeded(seed)).unwrap();
            let brute: f64 = strings(n).iter().map(|x| raw_weight(&m, x)).sum();
            let z = m.partition_function().unwrap();
            assert!(((z - brute) / brute).abs() < 1e-10, "seed {seed} {mode:?}: {z} vs {brute}");
        }
    }
}

#[test]
fn probabilities_match_enumeration() {
    for seed in 0..10 {
        for mode in [Mode::Amplitude, Mode::DirectPositive] {
            let m = Mps::random(8, 3, mode, &mut seeded(100 + seed)).unwrap();
            let exact = brute_probs(&m);
            let mut total = 0.0;
            for (x, e) in strings(8).iter().zip(&exact) {
                let p = m.probability(x).unwrap();
                assert!((p - e).abs() < 1e-12);
                total += p;
            }
            assert!((total - 1.0).abs() < 1e-9);
        }
    }
}

#[test]
fn trivial_partition_functions() {
    let ones = SiteTensor::from_vec(1, 1, vec![1.0, 1.0]);
    let m = Mps::from_tensors(vec![ones.clone(); 3], Mode::DirectPositive, 1).unwrap();
    assert!((m.partition_function().unwrap() - 8.0).abs() < 1e-12);
    for x in strings(3) {
        assert!((m.probability(&x).unwrap() - 0.125).abs() < 1e-15);
    }
    let psi = Mps::from_tensors(vec![ones], Mode::Amplitude, 1).unwrap();
    assert!((psi.partition_function().unwrap() - 2.0).abs() < 1e-12);
    assert!((psi.probability(&"0".parse().unwrap()).unwrap() - 0.5).abs() < 1e-15);
}

/// Pearson statistic of `samples` draws against the exact distribution.
fn chi_square(m: &Mps, samples: usize, seed: u64) -> f64 {
    let n = m.n_sites();
    let exact = brute_probs(m);
    let mut counts = vec![0usize; 1 << n];
    let mut rng = seeded(seed);
    for x in m.sampler().unwrap().sample_many(samples, &mut rng) {
        let idx = x.bits().iter().fold(0usize, |a, &b| (a << 1) | b as usize);
        counts[idx] += 1;
    }
    counts
        .iter()
        .zip(&exact)
        .map(|(&c, &p)| {
            let e = p * samples as f64;
            (c as f64 - e).powi(2) / e
        })
        .sum()
}

#[test]
fn sampling_matches_exact_distribution() {
    // 255 degrees of freedom: mean 255, std ~22.6. Allow five std.
    for (seed, mode) in [(1, Mode::Amplitude), (2, Mode::DirectPositive)] {
        let m = Mps::random(8, 3, mode, &mut seeded(seed)).unwrap();
        let stat = chi_square(&m, 200_000, seed + 50);
        assert!(stat < 255.0 + 5.0 * 22.6, "{mode:?}: chi2 {stat}");
    }
}

#[test]
fn sampling_never_hits_zero_probability() {
    let x: BitString = "0110".parse().unwrap();
    let m = Mps::product_state(&x, Mode::Amplitude).unwrap();
    let mut rng = seeded(3);
    for _ in 0..100 {
        assert_eq!(m.perfect_sample(&mut rng).unwrap(), x);
    }
}

#[test]
fn diffusion_matches_double_sum() {
    for (seed, mode) in [(4, Mode::Amplitude), (5, Mode::DirectPositive)] {
        let m = Mps::random(8, 3, mode, &mut seeded(seed)).unwrap();
        for p in [0.0, 0.005, 0.01, 0.025, 0.5] {
            let d = m.apply_diffusion(p).unwrap();
            let brute = brute_diffused(&m, p);
            let mut total = 0.0;
            for (x, b) in strings(8).iter().zip(&brute) {
                let q = d.probability(x).unwrap();
                assert!((q - b).abs() < 1e-12, "{mode:?} p={p}");
                total += q;
            }
            assert!((total - 1.0).abs() < 1e-12);
        }
    }
}

#[test]
fn diffusion_composes_as_markov_chain() {
    let m = Mps::random(7, 2, Mode::Amplitude, &mut seeded(8)).unwrap();
    let (p, q) = (0.03, 0.11);
    let twice = m.apply_diffusion(p).unwrap().apply_diffusion(q).unwrap();
    let once = m.apply_diffusion(p + q - 2.0 * p * q).unwrap();
    for x in strings(7) {
        assert!((twice.probability(&x).unwrap() - once.probability(&x).unwrap()).abs() < 1e-10);
    }
}

#[test]
fn diffusion_rejects_bad_probability() {
    let m = Mps::uniform(3, Mode::Amplitude).unwrap();
    assert!(m.apply_diffusion(-0.1).is_err());
    assert!(m.apply_diffusion(1.5).is_err());
}

#[test]
fn tensor_noise_statistics() {
    let m = Mps::random(100, 10, Mode::Amplitude, &mut seeded(9)).unwrap();
    let alpha = 0.035;
    let noisy = m.add_tensor_noise(alpha, &mut seeded(10)).unwrap();
    let diffs: Vec<f64> = m
        .tensors()
        .iter()
        .zip(noisy.tensors())
        .flat_map(|(a, b)| a.data().iter().zip(b.data()).map(|(x, y)| y - x).collect::<Vec<_>>())
        .collect();
    assert!(diffs.len() >= 10_000, "{} entries", diffs.len());
    let mean = diffs.iter().sum::<f64>() / diffs.len() as f64;
    let std = (diffs.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (diffs.len() - 1) as f64).sqrt();
    assert!((std - alpha).abs() < 0.1 * alpha, "std {std}");
    assert_eq!(noisy, m.add_tensor_noise(alpha, &mut seeded(10)).unwrap());
}

fn random_theta(cl: usize, cr: usize, seed: u64) -> TwoSiteTensor {
    let mut rng = seeded(seed);
    TwoSiteTensor::from_vec(cl, cr, (0..cl * 4 * cr).map(|_| rng.random_range(-1.0..1.0)).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn split_output_is_a_valid_chain(cl in 1usize..5, cr in 1usize..5, chi in 1usize..6, seed in 0u64..1000) {
        let theta = random_theta(cl, cr, seed);
        let res = canonicalize_split(&theta, chi, 1e-6).unwrap();
        prop_assert!(res.bond_dim() <= chi);
        prop_assert_eq!(res.left.right(), res.right.left());
        prop_assert_eq!(res.left.left(), cl);
        prop_assert_eq!(res.right.right(), cr);
        // The pair embeds into a chain with matching outer bonds.
        let first = SiteTensor::from_fn(1, cl, |_, s, r| if s == 0 { 1.0 } else { (r + 1) as f64 });
        let last = SiteTensor::from_fn(cr, 1, |l, s, _| 1.0 + (l + s) as f64);
        prop_assert!(Mps::from_tensors(vec![first, res.left, res.right, last], Mode::Amplitude, 16).is_ok());
    }

    #[test]
    fn probabilities_sum_to_one(n in 1usize..10, chi in 1usize..5, seed in 0u64..1000, positive in any::<bool>()) {
        let mode = if positive { Mode::DirectPositive } else { Mode::Amplitude };
        let m = Mps::random(n, chi, mode, &mut seeded(seed)).unwrap();
        let total: f64 = strings(n).iter().map(|x| m.probability(x).unwrap()).sum();
        prop_assert!((total - 1.0).abs() < 1e-9);
    }
}
