use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use cyclocopula::copula::kendall_tau;
use cyclocopula::fbm::HurstParameter;
use cyclocopula::sim::{empirical_phase_stats, simulate_parfbm, ParfbmConfig, ParfbmSimulator};

fn mean_sd(v: &[f64]) -> (f64, f64) {
    let m = v.iter().sum::<f64>() / v.len() as f64;
    let var = v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() - 1) as f64;
    (m, var.sqrt())
}

#[test]
fn phase_means_constant_and_variances_differ() {
    let cfg = ParfbmConfig::new(240, 2, 0.7, 0.7, HurstParameter::new(0.25).unwrap());
    let sim = ParfbmSimulator::new(cfg).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let reps = 1000;
    let (mut mean_diff, mut var_diff) = (Vec::with_capacity(reps), Vec::with_capacity(reps));
    for _ in 0..reps {
        let (x, _) = sim.simulate(&mut rng).unwrap();
        let stats = empirical_phase_stats(x.values(), 2).unwrap();
        mean_diff.push(stats.means[0] - stats.means[1]);
        var_diff.push(stats.variances[0] - stats.variances[1]);
    }
    let (m, sd) = mean_sd(&mean_diff);
    let se = sd / (reps as f64).sqrt();
    assert!(m.abs() <= 3.0 * se, "phase mean difference {m} vs 3 SE {}", 3.0 * se);
    let (v, sd) = mean_sd(&var_diff);
    let se = sd / (reps as f64).sqrt();
    assert!(v.abs() > 10.0 * se, "phase variance difference {v} only {} SE", v / se);
}

#[test]
fn zero_alpha_decouples_y() {
    let cfg = ParfbmConfig::new(1200, 3, 0.7, 0.0, HurstParameter::new(0.75).unwrap());
    for seed in 0..5 {
        let (x, y) = simulate_parfbm(&cfg, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        let pairs: Vec<(f64, f64)> = x.values().iter().copied().zip(y.values().iter().copied()).collect();
        let tau = kendall_tau(&pairs).unwrap();
        assert!(tau.abs() < 0.05, "seed {seed}: tau {tau}");
    }
}
