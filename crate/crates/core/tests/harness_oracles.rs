use cyclocopula::copula::CopulaFamily;
use cyclocopula::fbm::{fgn_autocovariance, HurstParameter};
use cyclocopula::harness::{replication_seed, run_replication, CellCoords, ReplicationSettings};
use cyclocopula::sim::phi_schedule;

fn coords(hurst: f64, alpha: f64, n: usize) -> CellCoords {
    CellCoords {
        hurst: HurstParameter::new(hurst).unwrap(),
        family: CopulaFamily::Gaussian,
        period: 1,
        phi: 0.7,
        alpha,
        n,
    }
}

fn mean_r(c: &CellCoords, reps: u64) -> f64 {
    let settings = ReplicationSettings::default();
    (0..reps).map(|rep| run_replication(c, replication_seed(3, 0, rep), &settings).unwrap().r).sum::<f64>()
        / reps as f64
}

#[test]
fn replication_is_deterministic() {
    let c = coords(0.25, 0.7, 240);
    let settings = ReplicationSettings::default();
    let a = run_replication(&c, 99, &settings).unwrap();
    let b = run_replication(&c, 99, &settings).unwrap();
    assert_eq!((a.r.to_bits(), a.wi.to_bits(), a.ns.to_bits()), (b.r.to_bits(), b.wi.to_bits(), b.ns.to_bits()));
}

#[test]
fn zero_alpha_gives_no_skill() {
    let r = mean_r(&coords(0.25, 0.0, 1200), 40);
    assert!(r.abs() < 0.05, "mean r {r}");
}

/// Stationary variance of `X_t = c X_{t-1} + e_t` driven by unit fGn.
fn ar_variance(c: f64, hurst: HurstParameter) -> f64 {
    let lags = 2000;
    let gamma: Vec<f64> = (0..lags).map(|k| fgn_autocovariance(k as u64, hurst)).collect();
    // sum_j sum_k c^(j+k) gamma(|j - k|) = sum_l gamma(l) w(l)
    let mut total = gamma[0] / (1.0 - c * c);
    for (l, g) in gamma.iter().enumerate().skip(1) {
        total += 2.0 * g * c.powi(l as i32) / (1.0 - c * c);
    }
    total
}

#[test]
fn skill_is_bounded_by_signal_to_noise() {
    // With unit noise in Y the best possible correlation is corr(X, Y).
    for (hurst, alpha) in [(0.25, 0.7), (0.75, 0.7), (0.25, 0.3)] {
        let c = coords(hurst, alpha, 1200);
        let var_x = ar_variance(phi_schedule(0, 1, 0.7), c.hurst);
        let bound = alpha * var_x.sqrt() / (alpha * alpha * var_x + 1.0).sqrt();
        let r = mean_r(&c, 30);
        assert!(r <= bound + 0.01, "H={hurst} alpha={alpha}: r {r} above bound {bound}");
        assert!(r >= bound - 0.04, "H={hurst} alpha={alpha}: r {r} far below bound {bound}");
    }
}
