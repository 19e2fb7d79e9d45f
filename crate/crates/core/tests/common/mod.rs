#![allow(dead_code)]

use mbp_core::revenue::{MarketInstance, MarketPoint};
use rand::seq::index::sample;
use rand::Rng;

/// Random valid market with `1..=max_n` points. With `int_a = Some(m)` the
/// parameters are distinct integers in `1..=m`, otherwise positive reals.
/// Valuations sometimes repeat and masses are sometimes zero, to exercise
/// ties.
pub fn random_market<R: Rng>(rng: &mut R, max_n: usize, int_a: Option<usize>) -> MarketInstance {
    let n = rng.gen_range(1..=max_n);
    let a: Vec<f64> = match int_a {
        Some(m) => {
            let mut picks: Vec<usize> = sample(rng, m, n.min(m)).into_iter().map(|i| i + 1).collect();
            picks.sort_unstable();
            picks.into_iter().map(|i| i as f64).collect()
        }
        None => {
            let mut acc = 0.0;
            (0..n)
                .map(|_| {
                    acc += rng.gen_range(0.1..3.0);
                    acc
                })
                .collect()
        }
    };
    let integral = rng.gen_bool(0.3);
    let mut v = if integral { rng.gen_range(0..20) as f64 } else { rng.gen_range(0.0..50.0) };
    let points = a
        .into_iter()
        .map(|a| {
            let point = MarketPoint {
                a,
                v,
                b: if rng.gen_bool(0.1) { 0.0 } else { rng.gen_range(0.0..1.0) },
            };
            if !rng.gen_bool(0.2) {
                v += if integral { rng.gen_range(0..20) as f64 } else { rng.gen_range(0.0..50.0) };
            }
            point
        })
        .collect();
    MarketInstance::new(points).expect("generated market is valid")
}

/// Relaxed-feasible prices at the given parameters: nondecreasing with
/// nonincreasing price per unit.
pub fn random_chain<R: Rng>(rng: &mut R, a: &[f64]) -> Vec<f64> {
    let mut z: Vec<f64> = Vec::with_capacity(a.len());
    for (j, &aj) in a.iter().enumerate() {
        let next = if j == 0 {
            rng.gen_range(0.0..10.0) * aj
        } else {
            let lo = z[j - 1];
            let hi = z[j - 1] * aj / a[j - 1];
            lo + rng.gen_range(0.0..=1.0) * (hi - lo)
        };
        z.push(next);
    }
    z
}

/// Sorted random grid of `n` points in `(0, hi]`.
pub fn random_grid<R: Rng>(rng: &mut R, n: usize, hi: f64) -> Vec<f64> {
    let mut g: Vec<f64> = (0..n).map(|_| hi * (1.0 - rng.gen_range(0.0..1.0))).collect();
    g.sort_by(f64::total_cmp);
    g.dedup();
    g
}

/// Cheapest unbounded multiset of `(size, price)` items whose sizes sum to
/// at least `target`. Written independently of the library's covering code.
pub fn min_cover(items: &[(usize, f64)], target: usize) -> f64 {
    let mut best = vec![f64::INFINITY; target + 1];
    best[0] = 0.0;
    for t in 1..=target {
        for &(size, price) in items {
            let rest = t.saturating_sub(size);
            best[t] = best[t].min(price + best[rest]);
        }
    }
    best[target]
}

/// Whether prices at integer parameters extend to a monotone subadditive
/// function: monotone, and no point costs more than a cover by the others.
pub fn extendable(a: &[usize], z: &[f64]) -> bool {
    if z.windows(2).any(|w| w[0] > w[1] + 1e-9) || z.iter().any(|&p| p < -1e-9) {
        return false;
    }
    let items: Vec<(usize, f64)> = a.iter().copied().zip(z.iter().copied()).collect();
    a.iter()
        .zip(z)
        .all(|(&aj, &zj)| zj <= min_cover(&items, aj) + 1e-9)
}
