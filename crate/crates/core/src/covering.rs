//! Unbounded covering costs on an integer grid.
//!
//! Given offered points `(a_i, P_i)`, the covering cost of `x` is the
//! cheapest multiset of offers whose parameters add up to at least `x`.
//! As a function of `x` it is the largest monotone subadditive function
//! bounded by the offers, which makes it the exact test for whether a set
//! of price points extends to an arbitrage-free pricing function.

use crate::error::{Error, Result};

/// Largest denominator tried when reading a float as a rational.
const MAX_DENOMINATOR: u64 = 1_000_000;

/// Parameters rescaled to integers by the least common multiple of their
/// denominators.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntegerScale {
    pub factor: u64,
    pub values: Vec<usize>,
}

/// Best rational approximation `p/q` of `x` with `q <= MAX_DENOMINATOR`
/// that reproduces `x` to about 1e-9 relative; `None` if there is none.
fn as_rational(x: f64) -> Option<(u64, u64)> {
    let tol = 1e-9 * x.abs().max(1.0);
    let (mut h0, mut h1) = (0u64, 1u64);
    let (mut k0, mut k1) = (1u64, 0u64);
    let mut rem = x;
    for _ in 0..64 {
        let whole = rem.floor();
        if whole > u32::MAX as f64 {
            return None;
        }
        let w = whole as u64;
        let h2 = w.checked_mul(h1)?.checked_add(h0)?;
        let k2 = w.checked_mul(k1)?.checked_add(k0)?;
        if k2 > MAX_DENOMINATOR {
            return None;
        }
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        if (h1 as f64 / k1 as f64 - x).abs() <= tol {
            return Some((h1, k1));
        }
        let frac = rem - whole;
        if frac <= 0.0 {
            return None;
        }
        rem = 1.0 / frac;
    }
    None
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Scale positive rational parameters to integers; fails with a resource
/// error when the largest scaled value exceeds `cap`.
pub fn integer_scale(params: &[f64], cap: usize) -> Result<IntegerScale> {
    let mut factor = 1u64;
    let mut fractions = Vec::with_capacity(params.len());
    for &a in params {
        if !(a > 0.0) || !a.is_finite() {
            return Err(Error::domain(format!("parameter {a} must be positive and finite")));
        }
        let (p, q) = as_rational(a)
            .ok_or_else(|| Error::Resource(format!("parameter {a} has no small rational form")))?;
        factor = (factor / gcd(factor, q))
            .checked_mul(q)
            .filter(|&f| f <= cap as u64)
            .ok_or_else(|| Error::Resource(format!("common denominator exceeds cap {cap}")))?;
        fractions.push((p, q));
    }
    let mut values = Vec::with_capacity(params.len());
    for (p, q) in fractions {
        let v = (p as u128) * (factor / q) as u128;
        if v > cap as u128 {
            return Err(Error::Resource(format!(
                "scaled parameter {v} exceeds grid cap {cap}"
            )));
        }
        values.push(v as usize);
    }
    Ok(IntegerScale { factor, values })
}

/// `costs[t]` is the minimum of `sum k_i * price_i` subject to
/// `sum k_i * size_i >= t`, for `t = 0..=max_target`. Entries are infinite
/// when `items` is empty.
pub fn covering_costs(items: &[(usize, f64)], max_target: usize) -> Vec<f64> {
    let mut costs = vec![f64::INFINITY; max_target + 1];
    costs[0] = 0.0;
    for t in 1..=max_target {
        let mut best = f64::INFINITY;
        for &(size, price) in items {
            let c = price + costs[t.saturating_sub(size)];
            if c < best {
                best = c;
            }
        }
        costs[t] = best;
    }
    costs
}
