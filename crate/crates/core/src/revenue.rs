//! Seller-side price optimization over a finite set of versions.
//!
//! A market lists, for each offered inverse NCP `a_j`, the buyers'
//! valuation `v_j` and demand mass `b_j`. Prices `z_j` earn
//! `sum b_j z_j [z_j <= v_j]`. The tractable problem constrains `z` to be
//! nonnegative, nondecreasing and with `z / a` nonincreasing; it is solved
//! exactly in `O(n^2)` by [`optimize_dp`]. [`oracle_relaxed`] and
//! [`oracle_exact`] are exponential reference solvers for the relaxed and
//! the fully subadditive problems.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::covering::{covering_costs, integer_scale};
use crate::error::{Error, Result};
use crate::isotonic::{isotonic_decreasing, isotonic_increasing};
use crate::pricing::{approx_le, check_chain, make_piecewise, Breakpoint, PricingCurve, TOL};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarketPoint {
    pub a: f64,
    pub v: f64,
    pub b: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MarketFile", into = "MarketFile")]
pub struct MarketInstance {
    points: Vec<MarketPoint>,
}

#[derive(Serialize, Deserialize)]
struct MarketFile {
    points: Vec<MarketPoint>,
}

impl TryFrom<MarketFile> for MarketInstance {
    type Error = Error;

    fn try_from(file: MarketFile) -> Result<Self> {
        MarketInstance::new(file.points)
    }
}

impl From<MarketInstance> for MarketFile {
    fn from(m: MarketInstance) -> Self {
        MarketFile { points: m.points }
    }
}

impl MarketInstance {
    /// Requires `a` strictly increasing and positive, `v` nondecreasing,
    /// and all values finite and nonnegative. Nothing is reordered.
    pub fn new(points: Vec<MarketPoint>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::domain("market has no price points"));
        }
        for (j, p) in points.iter().enumerate() {
            let finite = p.a.is_finite() && p.v.is_finite() && p.b.is_finite();
            if !finite || !(p.a > 0.0) || !(p.v >= 0.0) || !(p.b >= 0.0) {
                return Err(Error::domain(format!(
                    "point {j}: need finite a > 0, v >= 0, b >= 0 (got a = {}, v = {}, b = {})",
                    p.a, p.v, p.b
                )));
            }
        }
        for (j, w) in points.windows(2).enumerate() {
            if !(w[0].a < w[1].a) {
                return Err(Error::domain(format!(
                    "parameters must be strictly increasing: a[{j}] = {} >= a[{}] = {}",
                    w[0].a,
                    j + 1,
                    w[1].a
                )));
            }
            if !(w[0].v <= w[1].v) {
                return Err(Error::domain(format!(
                    "valuations must be nondecreasing: v[{j}] = {} > v[{}] = {}",
                    w[0].v,
                    j + 1,
                    w[1].v
                )));
            }
        }
        Ok(Self { points })
    }

    pub fn from_columns(a: &[f64], v: &[f64], b: &[f64]) -> Result<Self> {
        if a.len() != v.len() || a.len() != b.len() {
            return Err(Error::domain("market columns differ in length"));
        }
        Self::new(
            a.iter()
                .zip(v)
                .zip(b)
                .map(|((&a, &v), &b)| MarketPoint { a, v, b })
                .collect(),
        )
    }

    /// Replaces valuations by their nondecreasing least-squares fit. Never
    /// applied implicitly.
    pub fn with_isotonic_valuations(points: Vec<MarketPoint>) -> Result<Self> {
        let v: Vec<f64> = points.iter().map(|p| p.v).collect();
        let fit = isotonic_increasing(&v, &vec![1.0; v.len()]);
        Self::new(
            points
                .into_iter()
                .zip(fit)
                .map(|(p, v)| MarketPoint { v, ..p })
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[MarketPoint] {
        &self.points
    }

    pub fn params(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.a).collect()
    }

    pub fn total_mass(&self) -> f64 {
        self.points.iter().map(|p| p.b).sum()
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let file: MarketFile = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        Self::new(file.points)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }
}

/// Which constraint family a price vector is guaranteed to satisfy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Feasibility {
    /// Nonnegative, nondecreasing, nonincreasing price per unit.
    #[serde(rename = "relaxed_5")]
    Relaxed,
    /// Extends to a monotone subadditive function (the covering extension).
    #[serde(rename = "exact_3")]
    Exact,
    /// Only nonnegative and nondecreasing; may admit arbitrage.
    #[serde(rename = "monotone_only")]
    MonotoneOnly,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "AssignmentFile", try_from = "AssignmentFile")]
pub struct PriceAssignment {
    pub a: Vec<f64>,
    pub z: Vec<f64>,
    pub objective: f64,
    pub feasibility: Feasibility,
}

#[derive(Serialize, Deserialize)]
struct AssignmentFile {
    a: Vec<f64>,
    z: Vec<f64>,
    objective: f64,
    feasibility: Feasibility,
    #[serde(default)]
    curve: Option<PricingCurve>,
}

impl From<PriceAssignment> for AssignmentFile {
    fn from(p: PriceAssignment) -> Self {
        let curve = p.curve();
        AssignmentFile {
            a: p.a,
            z: p.z,
            objective: p.objective,
            feasibility: p.feasibility,
            curve,
        }
    }
}

impl TryFrom<AssignmentFile> for PriceAssignment {
    type Error = Error;

    fn try_from(f: AssignmentFile) -> Result<Self> {
        if f.a.len() != f.z.len() {
            return Err(Error::domain("price assignment: a and z differ in length"));
        }
        Ok(PriceAssignment {
            a: f.a,
            z: f.z,
            objective: f.objective,
            feasibility: f.feasibility,
        })
    }
}

impl PriceAssignment {
    /// The pricing curve through `(a_j, z_j)`, when the prices satisfy the
    /// chain constraints.
    pub fn curve(&self) -> Option<PricingCurve> {
        let points: Vec<(f64, f64)> = self.a.iter().copied().zip(self.z.iter().copied()).collect();
        make_piecewise(&points).ok()
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let file: AssignmentFile = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        Self::try_from(file)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }
}

fn sells(price: f64, valuation: f64) -> bool {
    approx_le(price, valuation)
}

/// `sum_j b_j z_j [z_j <= v_j]` for a raw price vector.
pub fn revenue_of(z: &[f64], market: &MarketInstance) -> Result<f64> {
    if z.len() != market.len() {
        return Err(Error::domain(format!(
            "{} prices for {} market points",
            z.len(),
            market.len()
        )));
    }
    Ok(z.iter()
        .zip(market.points())
        .filter(|(z, p)| sells(**z, p.v))
        .map(|(z, p)| p.b * z)
        .sum())
}

pub fn revenue(assignment: &PriceAssignment, market: &MarketInstance) -> Result<f64> {
    revenue_of(&assignment.z, market)
}

/// Demand-weighted share of buyers whose valuation covers their price.
pub fn affordability_of(z: &[f64], market: &MarketInstance) -> Result<f64> {
    if z.len() != market.len() {
        return Err(Error::domain(format!(
            "{} prices for {} market points",
            z.len(),
            market.len()
        )));
    }
    let total = market.total_mass();
    if !(total > 0.0) {
        return Err(Error::domain("total demand mass is zero"));
    }
    let served: f64 = z
        .iter()
        .zip(market.points())
        .filter(|(z, p)| sells(**z, p.v))
        .map(|(_, p)| p.b)
        .sum();
    Ok(served / total)
}

pub fn affordability(assignment: &PriceAssignment, market: &MarketInstance) -> Result<f64> {
    affordability_of(&assignment.z, market)
}

/// Branch taken by the dynamic program at a state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    /// Price at the per-unit cap: `z_k = delta * a_k <= v_k`.
    Fill,
    /// Sell at the valuation and tighten the cap to `v_k / a_k`.
    Sell,
    /// Leave the point unsold at the lowest price the neighbouring prices
    /// allow.
    Skip,
}

/// Value and choice tables of the revenue dynamic program.
///
/// State `(k, delta)` is the best revenue from points `k..n` when every
/// price there satisfies `z_j / a_j <= delta`. The caps are the thresholds
/// `v_i / a_i` and `+inf`; at stage `k` only the caps reachable from the
/// root are tabulated (`v_i / a_i` for `i < k`, and `+inf`), so storage is
/// triangular.
#[derive(Debug, Clone)]
pub struct DpTable {
    thresholds: Vec<f64>,
    opt: Vec<f64>,
    choice: Vec<u8>,
}

const FILL: u8 = 0;
const SELL: u8 = 1;
const SKIP: u8 = 2;

impl Branch {
    fn from_code(code: u8) -> Self {
        match code {
            FILL => Branch::Fill,
            SELL => Branch::Sell,
            _ => Branch::Skip,
        }
    }
}

fn row_offset(k: usize) -> usize {
    k * (k + 1) / 2
}

fn thresholds_of(market: &MarketInstance) -> Vec<f64> {
    let mut t: Vec<f64> = market.points().iter().map(|p| p.v / p.a).collect();
    t.push(f64::INFINITY);
    t
}

/// Runs the backward recursion with two rolling value rows. `row` receives
/// each stage's values and choices, slot `s < k` holding cap
/// `thresholds[s]` and slot `k` the infinite cap. Returns the root value.
fn sweep(market: &MarketInstance, thresholds: &[f64], mut row: impl FnMut(usize, &[f64], &[u8])) -> f64 {
    let pts = market.points();
    let n = pts.len();
    let mut next = vec![0.0; n + 1];
    let mut cur = vec![0.0; n + 1];
    let mut choice = vec![SKIP; n + 1];

    let last = pts[n - 1];
    for slot in 0..n {
        let cap = if slot + 1 == n { f64::INFINITY } else { thresholds[slot] };
        let filled = cap * last.a;
        (cur[slot], choice[slot]) = if sells(filled, last.v) {
            (last.b * filled.min(last.v), FILL)
        } else {
            (last.b * last.v, SELL)
        };
    }
    row(n - 1, &cur[..n], &choice[..n]);
    std::mem::swap(&mut cur, &mut next);

    for k in (0..n - 1).rev() {
        let p = pts[k];
        let sell_value = p.b * p.v + next[k];
        // branch-free body: the choice pattern is irregular, so selects
        // beat jumps here
        let limit = p.v + TOL * p.v.max(1.0);
        let rows = cur[..k].iter_mut().zip(choice[..k].iter_mut());
        for ((value, branch), (&keep, &cap)) in rows.zip(next[..k].iter().zip(&thresholds[..k])) {
            let filled = cap * p.a;
            let fill = filled <= limit;
            let sell = sell_value > keep;
            let other = if sell { sell_value } else { keep };
            *value = if fill { p.b * filled.min(p.v) + keep } else { other };
            *branch = if fill { FILL } else { SKIP - sell as u8 };
        }
        // infinite cap: filling is impossible
        let keep = next[k + 1];
        (cur[k], choice[k]) = if sell_value > keep {
            (sell_value, SELL)
        } else {
            (keep, SKIP)
        };
        row(k, &cur[..=k], &choice[..=k]);
        std::mem::swap(&mut cur, &mut next);
    }
    next[0]
}

/// Walks the stored choices from the root and prices every point.
fn reconstruct(market: &MarketInstance, thresholds: &[f64], choice: impl Fn(usize, usize) -> Branch) -> Vec<f64> {
    let pts = market.points();
    let n = pts.len();
    let mut path = Vec::with_capacity(n);
    let mut slot = 0;
    let mut cap = f64::INFINITY;
    for (k, &threshold) in thresholds.iter().enumerate().take(n) {
        let branch = choice(k, slot);
        path.push((branch, cap));
        if branch == Branch::Sell {
            slot = k;
            cap = threshold;
        } else if slot == k {
            // the infinite cap moves to the next row's last slot
            slot = k + 1;
        }
    }
    let mut z = vec![0.0; n];
    for k in (0..n).rev() {
        let (branch, cap) = path[k];
        z[k] = match branch {
            Branch::Fill => (cap * pts[k].a).min(pts[k].v),
            Branch::Sell => pts[k].v,
            Branch::Skip => z[k + 1] * pts[k].a / pts[k + 1].a,
        };
    }
    // a skipped point may sit below an earlier price; lifting it to that
    // price keeps both chain constraints with its neighbours
    for k in 1..n {
        if path[k].0 == Branch::Skip && z[k] < z[k - 1] {
            z[k] = z[k - 1];
        }
    }
    z
}

impl DpTable {
    pub fn build(market: &MarketInstance) -> Self {
        let thresholds = thresholds_of(market);
        let cells = row_offset(market.len());
        let mut opt = vec![0.0; cells];
        let mut choice = vec![SKIP; cells];
        sweep(market, &thresholds, |k, values, branches| {
            let at = row_offset(k);
            opt[at..at + values.len()].copy_from_slice(values);
            choice[at..at + branches.len()].copy_from_slice(branches);
        });
        Self {
            thresholds,
            opt,
            choice,
        }
    }

    pub fn len(&self) -> usize {
        self.thresholds.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// The `n + 1` caps `v_1/a_1, ..., v_n/a_n, +inf`.
    pub fn thresholds(&self) -> &[f64] {
        &self.thresholds
    }

    /// Maps a threshold index (`n` meaning `+inf`) to its slot at stage `k`.
    fn slot(&self, k: usize, threshold: usize) -> Option<usize> {
        let n = self.len();
        if k >= n {
            return None;
        }
        if threshold == n {
            Some(k)
        } else if threshold < k {
            Some(threshold)
        } else {
            None
        }
    }

    /// Optimal revenue of state `(k, thresholds[threshold])`, if tabulated.
    pub fn opt(&self, k: usize, threshold: usize) -> Option<f64> {
        self.slot(k, threshold).map(|s| self.opt[row_offset(k) + s])
    }

    pub fn choice(&self, k: usize, threshold: usize) -> Option<Branch> {
        self.slot(k, threshold).map(|s| Branch::from_code(self.choice[row_offset(k) + s]))
    }

    /// Optimal revenue for the whole market.
    pub fn root(&self) -> f64 {
        self.opt[0]
    }

    /// Price vector of the optimal solution, following the stored choices
    /// from the root.
    pub fn prices(&self, market: &MarketInstance) -> Vec<f64> {
        reconstruct(market, &self.thresholds, |k, slot| Branch::from_code(self.choice[row_offset(k) + slot]))
    }
}

/// Revenue-optimal prices under the relaxed constraints, by backward
/// dynamic programming in `O(n^2)` time and space. Between selling at the
/// valuation and skipping a point, selling is chosen only when strictly
/// better.
///
/// Only the choice table is kept; values live in two rolling rows. Use
/// [`DpTable`] to inspect the values.
pub fn optimize_dp(market: &MarketInstance) -> Result<PriceAssignment> {
    let thresholds = thresholds_of(market);
    let mut choice = vec![SKIP; row_offset(market.len())];
    let objective = sweep(market, &thresholds, |k, _, branches| {
        let at = row_offset(k);
        choice[at..at + branches.len()].copy_from_slice(branches);
    });
    let z = reconstruct(market, &thresholds, |k, slot| Branch::from_code(choice[row_offset(k) + slot]));
    Ok(PriceAssignment {
        a: market.params(),
        z,
        objective,
        feasibility: Feasibility::Relaxed,
    })
}

pub const ORACLE_RELAXED_MAX_N: usize = 8;

/// Exhaustive optimum of the relaxed problem over the candidate prices
/// `{v_i a_j / a_i} + {v_j}` at each point, with prefix pruning on the
/// chain constraints.
pub fn oracle_relaxed(market: &MarketInstance) -> Result<PriceAssignment> {
    let n = market.len();
    if n > ORACLE_RELAXED_MAX_N {
        return Err(Error::Resource(format!(
            "relaxed oracle enumerates exponentially many prices; n = {n} > {ORACLE_RELAXED_MAX_N}"
        )));
    }
    let pts = market.points();
    let candidates: Vec<Vec<f64>> = (0..n)
        .map(|j| {
            let mut c: Vec<f64> = pts.iter().map(|p| p.v * pts[j].a / p.a).collect();
            c.push(pts[j].v);
            c.push(0.0);
            c.sort_by(f64::total_cmp);
            c.dedup();
            c
        })
        .collect();

    struct Search<'a> {
        pts: &'a [MarketPoint],
        candidates: Vec<Vec<f64>>,
        current: Vec<f64>,
        best: Vec<f64>,
        best_value: f64,
    }

    impl Search<'_> {
        fn go(&mut self, j: usize, value: f64) {
            if j == self.pts.len() {
                if value > self.best_value {
                    self.best_value = value;
                    self.best.clone_from(&self.current);
                }
                return;
            }
            let p = self.pts[j];
            for c in 0..self.candidates[j].len() {
                let z = self.candidates[j][c];
                if j > 0 {
                    let (prev, prev_a) = (self.current[j - 1], self.pts[j - 1].a);
                    if !approx_le(prev, z) || !approx_le(z / p.a, prev / prev_a) {
                        continue;
                    }
                }
                let gain = if sells(z, p.v) { p.b * z } else { 0.0 };
                self.current.push(z);
                self.go(j + 1, value + gain);
                self.current.pop();
            }
        }
    }

    let mut search = Search {
        pts,
        candidates,
        current: Vec::with_capacity(n),
        best: vec![0.0; n],
        best_value: 0.0,
    };
    search.go(0, 0.0);
    Ok(PriceAssignment {
        a: market.params(),
        z: search.best,
        objective: search.best_value,
        feasibility: Feasibility::Relaxed,
    })
}

pub const ORACLE_EXACT_MAX_N: usize = 12;

/// Optimum over pricing functions that are monotone and subadditive
/// everywhere, by enumerating which points are offered at their valuation.
///
/// For each active subset the price at every `a_j` is the cheapest
/// unbounded combination of active offers covering `a_j`, computed by a
/// covering dynamic program on integer-rescaled parameters. Buyers outside
/// the active set also buy whenever the resulting price is within their
/// valuation.
pub fn oracle_exact(market: &MarketInstance, scale_cap: usize) -> Result<PriceAssignment> {
    let n = market.len();
    if n > ORACLE_EXACT_MAX_N {
        return Err(Error::Resource(format!(
            "exact oracle enumerates 2^n subsets; n = {n} > {ORACLE_EXACT_MAX_N}"
        )));
    }
    let pts = market.points();
    let scale = integer_scale(&market.params(), scale_cap)?;
    let top = *scale.values.iter().max().expect("nonempty market");

    let mut best = vec![0.0; n];
    let mut best_value = 0.0;
    let mut items = Vec::with_capacity(n);
    for mask in 1u32..(1 << n) {
        items.clear();
        items.extend(
            (0..n)
                .filter(|w| mask & (1 << w) != 0)
                .map(|w| (scale.values[w], pts[w].v)),
        );
        let costs = covering_costs(&items, top);
        let prices: Vec<f64> = scale.values.iter().map(|&s| costs[s]).collect();
        if prices.windows(2).any(|w| !approx_le(w[0], w[1])) {
            continue;
        }
        let value: f64 = prices
            .iter()
            .zip(pts)
            .filter(|(z, p)| sells(**z, p.v))
            .map(|(z, p)| p.b * z)
            .sum();
        if value > best_value {
            best_value = value;
            best = prices;
        }
    }
    Ok(PriceAssignment {
        a: market.params(),
        z: best,
        objective: best_value,
        feasibility: Feasibility::Exact,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InterpolationLoss {
    L2,
    L1,
}

pub const INTERPOLATION_TOL: f64 = 1e-8;
pub const INTERPOLATION_MAX_ITER: usize = 100_000;

/// Projection onto `{z >= 0, z nondecreasing}`.
fn project_monotone(y: &[f64]) -> Vec<f64> {
    isotonic_increasing(y, &vec![1.0; y.len()])
        .into_iter()
        .map(|v| v.max(0.0))
        .collect()
}

/// Projection onto `{z / a nonincreasing}`: a decreasing isotonic fit of
/// `y / a` with weights `a^2`.
fn project_ratio(y: &[f64], a: &[f64]) -> Vec<f64> {
    let u: Vec<f64> = y.iter().zip(a).map(|(y, a)| y / a).collect();
    let w: Vec<f64> = a.iter().map(|a| a * a).collect();
    isotonic_decreasing(&u, &w)
        .into_iter()
        .zip(a)
        .map(|(u, a)| u * a)
        .collect()
}

fn max_abs_diff(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
}

/// Euclidean projection onto the relaxed feasible cone by Dykstra's
/// alternating projections, followed by a repair pass that removes the
/// residual violation of order `tol`.
pub fn project_relaxed(y: &[f64], a: &[f64], tol: f64, max_iter: usize) -> Result<Vec<f64>> {
    let n = y.len();
    let mut x = y.to_vec();
    let mut p = vec![0.0; n];
    let mut q = vec![0.0; n];
    let mut moved = f64::INFINITY;
    let mut converged = false;
    for _ in 0..max_iter {
        let shifted: Vec<f64> = x.iter().zip(&p).map(|(x, p)| x + p).collect();
        let y1 = project_monotone(&shifted);
        for i in 0..n {
            p[i] = shifted[i] - y1[i];
        }
        let shifted: Vec<f64> = y1.iter().zip(&q).map(|(y, q)| y + q).collect();
        let x_next = project_ratio(&shifted, a);
        for i in 0..n {
            q[i] = shifted[i] - x_next[i];
        }
        moved = max_abs_diff(&x_next, &x);
        x = x_next;
        if moved <= tol {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::Convergence {
            iterations: max_iter,
            residual: moved,
        });
    }
    // x has nonincreasing z / a; clamping at zero and a running maximum
    // keep that while restoring nonnegativity and monotonicity exactly
    let mut running = 0.0f64;
    for v in &mut x {
        running = running.max(*v);
        *v = running;
    }
    Ok(x)
}

/// Closest relaxed-feasible prices to target prices `P_j` under the chosen
/// loss; the objective reported is `-sum loss(z_j, P_j)`.
///
/// `l2` is the Euclidean projection. `l1` runs projected subgradient descent
/// from that projection with step `1 / sqrt(k)` and keeps the best iterate;
/// it stops early when an iterate no longer moves by more than `tol`.
pub fn solve_interpolation(
    points: &[(f64, f64)],
    loss: InterpolationLoss,
    tol: f64,
    max_iter: usize,
) -> Result<PriceAssignment> {
    if points.is_empty() {
        return Err(Error::domain("no price points to interpolate"));
    }
    for (j, &(a, p)) in points.iter().enumerate() {
        if !(a > 0.0) || !a.is_finite() || !(p >= 0.0) || !p.is_finite() {
            return Err(Error::domain(format!(
                "point {j}: need a > 0 and a finite target price >= 0"
            )));
        }
    }
    if points.windows(2).any(|w| !(w[0].0 < w[1].0)) {
        return Err(Error::domain("parameters must be strictly increasing"));
    }
    let a: Vec<f64> = points.iter().map(|p| p.0).collect();
    let target: Vec<f64> = points.iter().map(|p| p.1).collect();
    let l1 = |z: &[f64]| z.iter().zip(&target).map(|(z, t)| (z - t).abs()).sum::<f64>();
    let l2 = |z: &[f64]| z.iter().zip(&target).map(|(z, t)| (z - t) * (z - t)).sum::<f64>();

    let projected = project_relaxed(&target, &a, tol, max_iter)?;
    let (z, objective) = match loss {
        InterpolationLoss::L2 => {
            let value = -l2(&projected);
            (projected, value)
        }
        InterpolationLoss::L1 => {
            let mut best_value = l1(&projected);
            let mut best = projected.clone();
            let mut z = projected;
            for k in 1..=max_iter {
                let step = 1.0 / (k as f64).sqrt();
                let trial: Vec<f64> = z
                    .iter()
                    .zip(&target)
                    .map(|(z, t)| z - step * (z - t).signum() * ((z - t) != 0.0) as u8 as f64)
                    .collect();
                let next = project_relaxed(&trial, &a, tol, max_iter)?;
                let moved = max_abs_diff(&next, &z);
                z = next;
                let value = l1(&z);
                if value < best_value {
                    best_value = value;
                    best.clone_from(&z);
                }
                if moved <= tol {
                    break;
                }
            }
            (best, -best_value)
        }
    };
    Ok(PriceAssignment {
        a,
        z,
        objective,
        feasibility: Feasibility::Relaxed,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaselineKind {
    /// Line through `(a_1, v_1)` and `(a_n, v_n)`.
    Lin,
    /// Constant at the highest valuation.
    MaxC,
    /// Largest constant affordable to at least half the demand mass.
    MedC,
    /// Constant maximizing revenue among the valuations.
    OptC,
}

impl std::str::FromStr for BaselineKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "lin" => BaselineKind::Lin,
            "max_c" => BaselineKind::MaxC,
            "med_c" => BaselineKind::MedC,
            "opt_c" => BaselineKind::OptC,
            other => return Err(Error::domain(format!("unknown baseline {other:?}"))),
        })
    }
}

pub fn baseline(kind: BaselineKind, market: &MarketInstance) -> Result<PriceAssignment> {
    let pts = market.points();
    let n = pts.len();
    if n == 0 {
        return Err(Error::domain("market has no price points"));
    }
    let (first, last) = (pts[0], pts[n - 1]);
    // demand mass of buyers able to pay c
    let mass_at = |c: f64| -> f64 { pts.iter().filter(|p| sells(c, p.v)).map(|p| p.b).sum() };
    let z: Vec<f64> = match kind {
        BaselineKind::Lin => {
            if n == 1 {
                vec![first.v]
            } else {
                let slope = (last.v - first.v) / (last.a - first.a);
                pts.iter().map(|p| first.v + slope * (p.a - first.a)).collect()
            }
        }
        BaselineKind::MaxC => vec![last.v; n],
        BaselineKind::MedC => {
            let half = market.total_mass() / 2.0;
            let c = pts
                .iter()
                .rev()
                .map(|p| p.v)
                .find(|&c| mass_at(c) >= half)
                .unwrap_or(first.v);
            vec![c; n]
        }
        BaselineKind::OptC => {
            let mut best = (first.v * mass_at(first.v), first.v);
            for p in &pts[1..] {
                let value = p.v * mass_at(p.v);
                if value > best.0 {
                    best = (value, p.v);
                }
            }
            vec![best.1; n]
        }
    };
    let objective = revenue_of(&z, market)?;
    let breakpoints: Vec<Breakpoint> = pts
        .iter()
        .zip(&z)
        .map(|(p, &price)| Breakpoint { a: p.a, price })
        .collect();
    let feasibility = if check_chain(&breakpoints).is_ok() {
        Feasibility::Relaxed
    } else {
        Feasibility::MonotoneOnly
    };
    Ok(PriceAssignment {
        a: market.params(),
        z,
        objective,
        feasibility,
    })
}

/// Shape of a synthetic valuation curve over the normalized parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ValueShape {
    Linear,
    Convex,
    Concave,
}

/// Market with `a_j = j` (`j = 1..=n`), valuations `100 * f(j / n)` for the
/// given shape and random demand masses normalized to sum to one.
pub fn synthetic_market(n: usize, shape: ValueShape, seed: u64) -> Result<MarketInstance> {
    if n == 0 {
        return Err(Error::domain("synthetic market needs n >= 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let raw: Vec<f64> = (0..n).map(|_| rng.gen_range(0.05..1.0)).collect();
    let total: f64 = raw.iter().sum();
    let points = (1..=n)
        .zip(raw)
        .map(|(j, mass)| {
            let t = j as f64 / n as f64;
            let f = match shape {
                ValueShape::Linear => t,
                ValueShape::Convex => t * t,
                ValueShape::Concave => t.sqrt(),
            };
            MarketPoint {
                a: j as f64,
                v: 100.0 * f,
                b: mass / total,
            }
        })
        .collect();
    MarketInstance::new(points)
}
