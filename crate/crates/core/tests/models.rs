use tneda::models::{fit_chain_bayes, nll, train_born_machine, train_positive_mps, TrainConfig};
use tneda::mps::{Mode, Mps};
use tneda::rng::seeded;
use tneda::BitString;

fn strings(n: usize) -> Vec<BitString> {
    (0..1u64 << n).map(|v| BitString::from_index(v, n)).collect()
}

fn data(rows: &[&str]) -> Vec<BitString> {
    rows.iter().map(|s| s.parse().unwrap()).collect()
}

#[test]
fn chain_counts_and_mps_agree_with_hand_product() {
    let d = data(&["0011", "0111", "1011", "0010", "0011"]);
    let chain = fit_chain_bayes(&d, 0.0).unwrap();
    let mps = chain.to_mps();
    for x in strings(4) {
        // p(x0) · Π p(x_{i+1} | x_i) with every factor a count ratio.
        let mut p = d.iter().filter(|y| y.get(0) == x.get(0)).count() as f64 / d.len() as f64;
        for i in 0..3 {
            let from = d.iter().filter(|y| y.get(i) == x.get(i)).count() as f64;
            let both = d.iter().filter(|y| y.get(i) == x.get(i) && y.get(i + 1) == x.get(i + 1)).count() as f64;
            p *= if from == 0.0 { 0.5 } else { both / from };
        }
        assert!((chain.chain_probability(&x).unwrap() - p).abs() < 1e-12, "{x}");
        assert!((mps.probability(&x).unwrap() - p).abs() < 1e-12, "{x}");
    }
    assert_eq!(fit_chain_bayes(&d, 0.0).unwrap().dump(), chain.dump());
}

#[test]
fn born_training_lowers_nll() {
    let d = data(&["110011", "110011", "111011", "110001", "010011", "110010"]);
    let cfg = TrainConfig {
        sweeps: 10,
        chi_max: 4,
        learning_rate: 0.1,
        ..TrainConfig::solver()
    };
    let init = Mps::random(6, 2, Mode::Amplitude, &mut seeded(1)).unwrap();
    let before = nll(&init, &d).unwrap();
    let trained = train_born_machine(&d, &cfg, Some(&init), &mut seeded(2)).unwrap();
    let after = nll(&trained, &d).unwrap();
    assert!(after < before - 0.5, "{before} -> {after}");
    assert!(trained.chi_max() <= 4);
    let mass: f64 = d.iter().collect::<std::collections::HashSet<_>>().iter().map(|x| trained.probability(x).unwrap()).sum();
    assert!(mass > 0.5, "training mass {mass}");
}

#[test]
fn positive_training_moves_mass_to_data() {
    let d = data(&["10101", "10101", "10111"]);
    let init = Mps::random(5, 2, Mode::DirectPositive, &mut seeded(3)).unwrap();
    let cfg = TrainConfig {
        learning_rate: 0.01,
        ..TrainConfig::solver()
    };
    let before = nll(&init, &d).unwrap();
    let m = train_positive_mps(&d, &cfg, &init).unwrap();
    assert!(nll(&m, &d).unwrap() < before);
    assert!(m.tensors().iter().all(|t| t.data().iter().all(|&v| v >= 0.0)));
    let total: f64 = strings(5).iter().map(|x| m.probability(x).unwrap()).sum();
    assert!((total - 1.0).abs() < 1e-9);
}
