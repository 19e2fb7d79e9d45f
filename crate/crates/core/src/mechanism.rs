//! Gaussian release mechanism and Monte Carlo error curves.
//!
//! A version with noise control parameter `delta` is `h* + w` where the
//! coordinates of `w` are independent `N(0, delta / d)`, so the total noise
//! variance is `delta`. Pricing works on the inverse axis `x = 1 / delta`.

use std::path::Path;

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::isotonic::isotonic_decreasing;
use crate::models::{loss_eval, LossFamily, LossSpec, ModelInstance};

/// Total noise variance `delta`; `0` means exact release.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NoiseControl(f64);

impl NoiseControl {
    pub fn new(delta: f64) -> Result<Self> {
        if !(delta >= 0.0) || !delta.is_finite() {
            return Err(Error::domain(format!(
                "noise control parameter must be finite and >= 0, got {delta}"
            )));
        }
        Ok(Self(delta))
    }

    pub fn from_inverse(x: f64) -> Result<Self> {
        if !(x > 0.0) {
            return Err(Error::domain(format!("inverse NCP must be > 0, got {x}")));
        }
        Self::new(1.0 / x)
    }

    pub fn delta(self) -> f64 {
        self.0
    }

    /// `1 / delta`; infinite for exact release.
    pub fn inverse(self) -> f64 {
        1.0 / self.0
    }
}

pub fn perturb(h_star: &ModelInstance, delta: f64, seed: u64) -> Result<ModelInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    perturb_with_rng(h_star, NoiseControl::new(delta)?, &mut rng)
}

pub fn perturb_with_rng<R: Rng + ?Sized>(
    h_star: &ModelInstance,
    ncp: NoiseControl,
    rng: &mut R,
) -> Result<ModelInstance> {
    if ncp.delta() == 0.0 {
        return Ok(h_star.clone());
    }
    let d = h_star.dim();
    let sd = (ncp.delta() / d as f64).sqrt();
    let noise = DVector::from_iterator(d, (0..d).map(|_| sd * rng.sample::<f64, _>(StandardNormal)));
    Ok(h_star.with_weights(&h_star.weights + noise))
}

/// Counter-based seed for sample `sample` at grid point `point`
/// (splitmix64 finalizer over the three words).
pub fn sample_seed(seed: u64, point: usize, sample: usize) -> u64 {
    fn mix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
    mix(mix(mix(seed) ^ point as u64) ^ sample as u64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub x: f64,
    pub mean_error: f64,
    pub stderr: f64,
    pub samples: usize,
}

/// Expected error of released versions as a function of inverse NCP.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorCurve {
    pub epsilon: LossFamily,
    pub seed: u64,
    pub points: Vec<CurvePoint>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    Parallel,
}

pub fn estimate_error_curve(
    h_star: &ModelInstance,
    eval_data: &Dataset,
    spec: &LossSpec,
    x_grid: &[f64],
    samples_per_point: usize,
    seed: u64,
) -> Result<ErrorCurve> {
    estimate_error_curve_with(
        h_star,
        eval_data,
        spec,
        x_grid,
        samples_per_point,
        seed,
        Execution::Parallel,
    )
}

/// Same as [`estimate_error_curve`] with explicit scheduling. Both
/// schedules return identical curves.
pub fn estimate_error_curve_with(
    h_star: &ModelInstance,
    eval_data: &Dataset,
    spec: &LossSpec,
    x_grid: &[f64],
    samples_per_point: usize,
    seed: u64,
    execution: Execution,
) -> Result<ErrorCurve> {
    if samples_per_point < 2 {
        return Err(Error::domain("need at least 2 samples per grid point"));
    }
    if x_grid.is_empty() {
        return Err(Error::domain("inverse NCP grid is empty"));
    }
    if x_grid.iter().any(|x| !(*x > 0.0) || !x.is_finite())
        || x_grid.windows(2).any(|w| w[0] >= w[1])
    {
        return Err(Error::domain(
            "inverse NCP grid must be positive, finite and strictly increasing",
        ));
    }
    let mut points = Vec::with_capacity(x_grid.len());
    for (index, &x) in x_grid.iter().enumerate() {
        let at = |source: Error| Error::AtGridPoint {
            index,
            x,
            source: Box::new(source),
        };
        let ncp = NoiseControl::from_inverse(x).map_err(at)?;
        let draw = |i: usize| -> Result<f64> {
            let mut rng = ChaCha8Rng::seed_from_u64(sample_seed(seed, index, i));
            let h = perturb_with_rng(h_star, ncp, &mut rng)?;
            loss_eval(&h, eval_data, spec)
        };
        let errors: Vec<f64> = match execution {
            Execution::Sequential => (0..samples_per_point).map(draw).collect::<Result<_>>(),
            Execution::Parallel => (0..samples_per_point)
                .into_par_iter()
                .map(draw)
                .collect::<Result<_>>(),
        }
        .map_err(at)?;
        let m = errors.len() as f64;
        let mean = errors.iter().sum::<f64>() / m;
        let var = errors.iter().map(|e| (e - mean) * (e - mean)).sum::<f64>() / (m - 1.0);
        points.push(CurvePoint {
            x,
            mean_error: mean,
            stderr: (var / m).sqrt(),
            samples: errors.len(),
        });
    }
    Ok(ErrorCurve {
        epsilon: spec.family,
        seed,
        points,
    })
}

/// `n` geometrically spaced values from `lo` to `hi` inclusive.
pub fn geometric_grid(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi > lo && hi.is_finite()) || n < 2 {
        return Err(Error::domain(format!(
            "geometric grid needs 0 < lo < hi and n >= 2 (lo = {lo}, hi = {hi}, n = {n})"
        )));
    }
    let ratio = (hi / lo).ln() / (n - 1) as f64;
    let mut grid: Vec<f64> = (0..n).map(|i| lo * (ratio * i as f64).exp()).collect();
    grid[0] = lo;
    grid[n - 1] = hi;
    Ok(grid)
}

pub const DEFAULT_GRID_POINTS: usize = 16;

/// Default inverse-NCP grid: 16 geometric points over four decades centred
/// at `x0 = 1 / base_error`, where `base_error` is the error of the
/// un-noised model. A zero or non-finite base error centres at `x0 = 1`.
pub fn default_grid(base_error: f64) -> Vec<f64> {
    let x0 = if base_error > 1e-12 && base_error.is_finite() {
        1.0 / base_error
    } else {
        1.0
    };
    geometric_grid(x0 / 100.0, x0 * 100.0, DEFAULT_GRID_POINTS).expect("valid default grid")
}

impl ErrorCurve {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let curve: ErrorCurve = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        curve.check()?;
        Ok(curve)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }

    pub fn check(&self) -> Result<()> {
        if self.points.is_empty() {
            return Err(Error::CurveInvalid("curve has no points".into()));
        }
        if self.points.windows(2).any(|w| !(w[0].x < w[1].x)) {
            return Err(Error::CurveInvalid("grid x must be strictly increasing".into()));
        }
        for p in &self.points {
            if !(p.x > 0.0) || !p.mean_error.is_finite() || !(p.stderr >= 0.0) || p.samples == 0 {
                return Err(Error::CurveInvalid(format!("bad curve point at x = {}", p.x)));
            }
        }
        Ok(())
    }

    pub fn x_range(&self) -> (f64, f64) {
        (self.points[0].x, self.points[self.points.len() - 1].x)
    }

    /// Means after a decreasing isotonic fit weighted by sample counts.
    /// Strictly decreasing raw means come back unchanged.
    pub fn smoothed_means(&self) -> Vec<f64> {
        let means: Vec<f64> = self.points.iter().map(|p| p.mean_error).collect();
        let weights: Vec<f64> = self.points.iter().map(|p| p.samples as f64).collect();
        isotonic_decreasing(&means, &weights)
    }

    /// Achievable expected-error interval `[min, max]` after smoothing.
    pub fn error_range(&self) -> (f64, f64) {
        let m = self.smoothed_means();
        (m[m.len() - 1], m[0])
    }

    /// Expected error at `x` by linear interpolation of the smoothed means.
    pub fn error_at(&self, x: f64) -> Result<f64> {
        self.check()?;
        let (lo, hi) = self.x_range();
        if !(x >= lo && x <= hi) {
            return Err(Error::OutOfRange {
                target: x,
                min: lo,
                max: hi,
            });
        }
        let means = self.smoothed_means();
        let k = self.points.partition_point(|p| p.x < x);
        if self.points[k].x == x {
            return Ok(means[k]);
        }
        let (x0, x1) = (self.points[k - 1].x, self.points[k].x);
        let t = (x - x0) / (x1 - x0);
        Ok(means[k - 1] + t * (means[k] - means[k - 1]))
    }

    /// Smallest inverse NCP whose expected error is at most `target`.
    pub fn invert(&self, target: f64) -> Result<f64> {
        self.check()?;
        let means = self.smoothed_means();
        if means.iter().any(|m| !m.is_finite()) {
            return Err(Error::CurveInvalid("smoothing produced non-finite errors".into()));
        }
        let (min, max) = (means[means.len() - 1], means[0]);
        if !(target >= min && target <= max) {
            return Err(Error::OutOfRange { target, min, max });
        }
        let k = means.iter().position(|&m| m <= target).expect("target within range");
        if k == 0 || means[k] == target {
            return Ok(self.points[k].x);
        }
        let (m0, m1) = (means[k - 1], means[k]);
        let (x0, x1) = (self.points[k - 1].x, self.points[k].x);
        Ok(x0 + (m0 - target) / (m0 - m1) * (x1 - x0))
    }
}

/// Error-inverse: the inverse NCP `x` delivering `target_error`; the
/// corresponding NCP is `1 / x`.
pub fn invert_error(curve: &ErrorCurve, target_error: f64) -> Result<f64> {
    curve.invert(target_error)
}
