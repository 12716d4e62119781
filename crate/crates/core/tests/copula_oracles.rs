use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use cyclocopula::copula::{fit_copula, kendall_tau, Copula, CopulaFamily, CopulaParams};

fn sample(family: CopulaFamily, params: CopulaParams, m: usize, seed: u64) -> Vec<(f64, f64)> {
    Copula::new(family, params).unwrap().sample(m, &mut ChaCha8Rng::seed_from_u64(seed))
}

#[test]
fn sampled_tau_matches_relation() {
    let clayton = kendall_tau(&sample(CopulaFamily::Clayton, CopulaParams::theta(2.0), 100_000, 1)).unwrap();
    assert!((clayton - 0.5).abs() < 0.01, "{clayton}");
    let gumbel = kendall_tau(&sample(CopulaFamily::Gumbel, CopulaParams::theta(2.0), 100_000, 2)).unwrap();
    assert!((gumbel - 0.5).abs() < 0.01, "{gumbel}");
    let indep = kendall_tau(&sample(CopulaFamily::Gaussian, CopulaParams::theta(0.0), 100_000, 3)).unwrap();
    assert!(indep.abs() < 0.01, "{indep}");
}

#[test]
fn independent_uniforms_fit_near_zero() {
    let pairs = sample(CopulaFamily::Gaussian, CopulaParams::theta(0.0), 5000, 4);
    let theta = fit_copula(&pairs, CopulaFamily::Gaussian).unwrap().params.theta;
    assert!(theta.abs() < 0.05, "{theta}");
}

fn tail_ratios(pairs: &[(f64, f64)], q: f64) -> (f64, f64) {
    let upper = pairs.iter().filter(|(u, v)| *u > q && *v > q).count();
    let lower = pairs.iter().filter(|(u, v)| *u < 1.0 - q && *v < 1.0 - q).count();
    let denom = pairs.len() as f64 * (1.0 - q);
    (upper as f64 / denom, lower as f64 / denom)
}

#[test]
fn frank_has_no_tail_dependence() {
    let (up, low) = tail_ratios(&sample(CopulaFamily::Frank, CopulaParams::theta(5.0), 100_000, 5), 0.99);
    // corner density theta / (1 - e^-theta) ~ 5 gives about 0.05 at this depth
    assert!(up < 0.1 && low < 0.1, "upper {up}, lower {low}");
    let (g_up, _) = tail_ratios(&sample(CopulaFamily::Gumbel, CopulaParams::theta(2.0), 100_000, 6), 0.99);
    assert!(g_up > 0.5, "Gumbel upper {g_up}, limit 2 - sqrt 2");
    let (_, c_low) = tail_ratios(&sample(CopulaFamily::Clayton, CopulaParams::theta(2.0), 100_000, 7), 0.99);
    assert!(c_low > 0.6, "Clayton lower {c_low}, limit 2^-1/2");
}
