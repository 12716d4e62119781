//! Kendall's tau-b in O(m log m) (Knight's merge-sort algorithm).

use crate::error::{Error, Result};

/// Sum of t(t-1)/2 over runs of equal adjacent elements under `eq`.
fn tied_pairs<T>(items: &[T], eq: impl Fn(&T, &T) -> bool) -> u64 {
    let mut total = 0u64;
    let mut run = 1u64;
    for w in items.windows(2) {
        if eq(&w[0], &w[1]) {
            run += 1;
        } else {
            total += run * (run - 1) / 2;
            run = 1;
        }
    }
    total + run * (run - 1) / 2
}

/// Stable merge sort of `v` returning the number of strict inversions.
fn sort_count_swaps(v: &mut [f64], buf: &mut [f64]) -> u64 {
    let n = v.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let mut swaps = sort_count_swaps(&mut v[..mid], &mut buf[..mid]);
    swaps += sort_count_swaps(&mut v[mid..], &mut buf[mid..]);
    let (mut i, mut j, mut k) = (0, mid, 0);
    while i < mid && j < n {
        if v[j] < v[i] {
            buf[k] = v[j];
            swaps += (mid - i) as u64;
            j += 1;
        } else {
            buf[k] = v[i];
            i += 1;
        }
        k += 1;
    }
    buf[k..k + mid - i].copy_from_slice(&v[i..mid]);
    k += mid - i;
    buf[k..k + n - j].copy_from_slice(&v[j..n]);
    v.copy_from_slice(&buf[..n]);
    swaps
}

/// Kendall's tau-b with tie correction for the pairs `(x, y)`.
pub fn kendall_tau(pairs: &[(f64, f64)]) -> Result<f64> {
    let m = pairs.len();
    if m < 2 {
        return Err(Error::SampleTooSmall { min: 2, got: m });
    }
    if let Some(i) = pairs.iter().position(|(x, y)| !x.is_finite() || !y.is_finite()) {
        return Err(Error::NonFinite(i));
    }
    let mut sorted = pairs.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let total = (m as u64) * (m as u64 - 1) / 2;
    let tied_x = tied_pairs(&sorted, |a, b| a.0 == b.0);
    let tied_xy = tied_pairs(&sorted, |a, b| a.0 == b.0 && a.1 == b.1);
    let mut ys: Vec<f64> = sorted.iter().map(|p| p.1).collect();
    let mut buf = vec![0.0; m];
    let swaps = sort_count_swaps(&mut ys, &mut buf);
    let tied_y = tied_pairs(&ys, |a, b| a == b);
    if tied_x == total {
        return Err(Error::AllTied("x"));
    }
    if tied_y == total {
        return Err(Error::AllTied("y"));
    }
    let numer = total as f64 - tied_x as f64 - tied_y as f64 + tied_xy as f64 - 2.0 * swaps as f64;
    let denom = ((total - tied_x) as f64).sqrt() * ((total - tied_y) as f64).sqrt();
    Ok((numer / denom).clamp(-1.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// O(m^2) tau-b straight from the definition.
    fn brute_tau_b(pairs: &[(f64, f64)]) -> f64 {
        let (mut c, mut d, mut tx, mut ty) = (0.0f64, 0.0, 0.0, 0.0);
        for i in 0..pairs.len() {
            for j in (i + 1)..pairs.len() {
                let dx = pairs[i].0 - pairs[j].0;
                let dy = pairs[i].1 - pairs[j].1;
                if dx == 0.0 && dy == 0.0 {
                    continue;
                } else if dx == 0.0 {
                    tx += 1.0;
                } else if dy == 0.0 {
                    ty += 1.0;
                } else if dx * dy > 0.0 {
                    c += 1.0;
                } else {
                    d += 1.0;
                }
            }
        }
        (c - d) / ((c + d + tx) * (c + d + ty)).sqrt()
    }

    #[test]
    fn extremes() {
        assert_eq!(kendall_tau(&[(1.0, 1.0), (2.0, 2.0), (3.0, 3.0)]).unwrap(), 1.0);
        assert_eq!(kendall_tau(&[(1.0, 3.0), (2.0, 2.0), (3.0, 1.0)]).unwrap(), -1.0);
    }

    #[test]
    fn errors() {
        assert!(matches!(kendall_tau(&[(1.0, 2.0)]), Err(Error::SampleTooSmall { .. })));
        assert!(matches!(kendall_tau(&[(1.0, 2.0), (1.0, 3.0)]), Err(Error::AllTied("x"))));
        assert!(matches!(kendall_tau(&[(1.0, 2.0), (4.0, 2.0)]), Err(Error::AllTied("y"))));
    }

    #[test]
    fn ties_against_brute_force() {
        let pairs = [(1.0, 2.0), (1.0, 2.0), (2.0, 1.0), (2.0, 3.0), (3.0, 3.0), (4.0, 0.0), (4.0, 5.0)];
        assert!((kendall_tau(&pairs).unwrap() - brute_tau_b(&pairs)).abs() < 1e-14);
    }

    proptest! {
        #[test]
        fn matches_quadratic_definition(
            raw in prop::collection::vec((0i32..6, 0i32..6), 3..60)
        ) {
            let pairs: Vec<(f64, f64)> = raw.iter().map(|&(a, b)| (a as f64, b as f64)).collect();
            let fast = kendall_tau(&pairs);
            let slow = brute_tau_b(&pairs);
            match fast {
                Ok(v) => prop_assert!((v - slow).abs() < 1e-12, "{} vs {}", v, slow),
                Err(_) => prop_assert!(!slow.is_finite()),
            }
        }
    }
}
