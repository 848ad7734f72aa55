use tneda::diagnostics::{diffused_kl, run_with_reference, ReferenceConfig};
use tneda::engine::{run_eda, Preset, SolverConfig};
use tneda::models::FiniteDistribution;
use tneda::mps::{Mode, Mps};
use tneda::problems::{random_covariance, Portfolio};
use tneda::rng::{self, seeded};
use tneda::BitString;

fn strings(n: usize) -> Vec<BitString> {
    (0..1u64 << n).map(|v| BitString::from_index(v, n)).collect()
}

/// Diffused model probabilities by summing over every source string.
fn brute_diffused(m: &Mps, p: f64) -> Vec<f64> {
    let n = m.n_sites();
    let q: Vec<f64> = strings(n).iter().map(|x| m.probability(x).unwrap()).collect();
    (0..1u64 << n)
        .map(|x| {
            (0..1u64 << n)
                .map(|y| {
                    let k = (x ^ y).count_ones() as i32;
                    p.powi(k) * (1.0 - p).powi(n as i32 - k) * q[y as usize]
                })
                .sum()
        })
        .collect()
}

fn target(n: usize, seed: u64) -> FiniteDistribution {
    use rand::Rng;
    let mut rng = seeded(seed);
    let support: Vec<BitString> = strings(n).into_iter().filter(|_| rng.random::<f64>() < 0.3).collect();
    let weights = support.iter().map(|_| rng.random::<f64>() + 0.01).collect();
    FiniteDistribution::from_weights(support, weights).unwrap()
}

#[test]
fn diffused_kl_matches_brute_force() {
    for (seed, n) in [(1u64, 6usize), (2, 8), (3, 10)] {
        let m = Mps::random(n, 3, Mode::Amplitude, &mut seeded(seed)).unwrap();
        let t = target(n, seed + 10);
        for p in [0.0, 0.005, 0.01, 0.025, 0.5] {
            let q = brute_diffused(&m, p);
            let expected: f64 = t
                .support()
                .iter()
                .zip(t.probs())
                .map(|(x, &pt)| {
                    let idx = x.bits().iter().fold(0usize, |a, &b| (a << 1) | b as usize);
                    pt * (pt / q[idx]).ln()
                })
                .sum();
            let kl = diffused_kl(&m, p, &t).unwrap();
            assert!((kl.value - expected).abs() < 1e-9, "n={n} p={p}: {} vs {expected}", kl.value);
        }
        let half = diffused_kl(&m, 0.5, &t).unwrap().value;
        assert!((half - (n as f64 * std::f64::consts::LN_2 - t.entropy())).abs() < 1e-9);
    }
}

#[test]
fn diffused_kl_is_continuous() {
    let m = Mps::random(8, 3, Mode::DirectPositive, &mut seeded(4)).unwrap();
    let t = target(8, 5);
    let h = 1e-6;
    for p in [0.01, 0.1, 0.3] {
        let a = diffused_kl(&m, p - h, &t).unwrap().value;
        let b = diffused_kl(&m, p, &t).unwrap().value;
        let c = diffused_kl(&m, p + h, &t).unwrap().value;
        assert!((a - b).abs() < 1e-3 && (c - b).abs() < 1e-3);
        // Second difference stays small: the curve is smooth, not just continuous.
        assert!((a - 2.0 * b + c).abs() < 1e-6);
    }
}

#[test]
fn diffused_probabilities_sum_to_one() {
    for n in [3, 7, 10] {
        let m = Mps::random(n, 4, Mode::Amplitude, &mut seeded(n as u64)).unwrap();
        let d = m.apply_diffusion(0.07).unwrap();
        let total: f64 = strings(n).iter().map(|x| d.probability(x).unwrap()).sum();
        assert!((total - 1.0).abs() < 1e-9);
    }
}

fn small_geo() -> (Portfolio, SolverConfig) {
    let sigma = random_covariance(12, &mut seeded(8));
    let problem = Portfolio::new(sigma, 3, 5, Portfolio::DEFAULT_PENALTY).unwrap();
    let mut cfg = Preset::Geo.config();
    cfg.eda.n_parents = 100;
    cfg.eda.n_children = 100;
    cfg.eda.generations = 6;
    cfg.eda.mutation_rate = 0.01;
    (problem, cfg)
}

#[test]
fn mirrored_reference_has_zero_delta() {
    let (problem, cfg) = small_geo();
    let (_, reports) = run_with_reference(&problem, &cfg, &ReferenceConfig::mirror(&cfg), 3).unwrap();
    assert_eq!(reports.len(), 6);
    for r in reports {
        assert_eq!(r.delta, Some(0.0), "{r:?}");
    }
}

#[test]
fn reference_is_a_bystander() {
    let (problem, cfg) = small_geo();
    let (with, reports) = run_with_reference(&problem, &cfg, &ReferenceConfig::noiseless(&cfg), 11).unwrap();
    let without = run_eda(&problem, &cfg, &mut rng::stream(11, rng::stream::RUN), None).unwrap();
    assert_eq!(with.bank.entries(), without.bank.entries());
    assert_eq!(reports.len(), with.records.len() - 1);
    for (a, b) in with.records.iter().zip(&without.records) {
        assert_eq!((a.calls, a.best_value, a.temperature), (b.calls, b.best_value, b.temperature));
    }
}
