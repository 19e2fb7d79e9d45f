//! Pricing functions over inverse NCP.
//!
//! A [`PricingCurve`] is built from price points `(a_j, z_j)` that satisfy
//! the relaxed chain constraints: `z >= 0`, `z` nondecreasing in `a` and
//! `z / a` nonincreasing in `a`. It is extended to all `x > 0` as the line
//! through the origin below `a_1`, linear interpolation between knots and
//! the constant `z_n` above `a_n`. Any such curve is monotone and
//! subadditive, hence arbitrage-free.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::covering::{covering_costs, integer_scale};
use crate::error::{Error, Result};
use crate::mechanism::ErrorCurve;

/// Tolerance for every inequality check on prices.
pub const TOL: f64 = 1e-9;

/// `a <= b` up to [`TOL`], scaled by magnitude above 1.
pub fn approx_le(a: f64, b: f64) -> bool {
    a <= b || (a.is_finite() && b.is_finite() && a - b <= TOL * a.abs().max(b.abs()).max(1.0))
}

/// Anything that can be asked for a price at inverse NCP `x > 0`.
pub trait PriceFunction {
    fn price(&self, x: f64) -> f64;
}

impl<F: Fn(f64) -> f64> PriceFunction for F {
    fn price(&self, x: f64) -> f64 {
        self(x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Breakpoint {
    pub a: f64,
    pub price: f64,
}

/// Piecewise-linear function with the origin/constant extension rule and
/// no shape constraints. Used to read arbitrary curve files for auditing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CurveFile", into = "CurveFile")]
pub struct PiecewiseLinear {
    breakpoints: Vec<Breakpoint>,
}

#[derive(Serialize, Deserialize)]
struct CurveFile {
    breakpoints: Vec<Breakpoint>,
}

impl TryFrom<CurveFile> for PiecewiseLinear {
    type Error = Error;

    fn try_from(file: CurveFile) -> Result<Self> {
        PiecewiseLinear::new(file.breakpoints)
    }
}

impl From<PiecewiseLinear> for CurveFile {
    fn from(curve: PiecewiseLinear) -> Self {
        CurveFile {
            breakpoints: curve.breakpoints,
        }
    }
}

impl PiecewiseLinear {
    pub fn new(breakpoints: Vec<Breakpoint>) -> Result<Self> {
        if breakpoints.is_empty() {
            return Err(Error::domain("a pricing curve needs at least one breakpoint"));
        }
        for (j, bp) in breakpoints.iter().enumerate() {
            if !(bp.a > 0.0) || !bp.a.is_finite() || !bp.price.is_finite() {
                return Err(Error::domain(format!(
                    "breakpoint {j} must have finite a > 0 and a finite price"
                )));
            }
        }
        if let Some(j) = breakpoints.windows(2).position(|w| !(w[0].a < w[1].a)) {
            return Err(Error::domain(format!(
                "breakpoint parameters must be strictly increasing (index {})",
                j + 1
            )));
        }
        Ok(Self { breakpoints })
    }

    pub fn from_points(points: &[(f64, f64)]) -> Result<Self> {
        Self::new(
            points
                .iter()
                .map(|&(a, price)| Breakpoint { a, price })
                .collect(),
        )
    }

    pub fn breakpoints(&self) -> &[Breakpoint] {
        &self.breakpoints
    }

    /// Reads `{"breakpoints": [...]}`; malformed JSON is an I/O-class error,
    /// bad breakpoints a domain error.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let file: CurveFile = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        Self::new(file.breakpoints)
    }

    /// Value at `x > 0`; for `x <= 0` see [`PiecewiseLinear::eval`].
    fn value(&self, x: f64) -> f64 {
        let bps = &self.breakpoints;
        let first = bps[0];
        let last = bps[bps.len() - 1];
        if x <= first.a {
            return if x == first.a {
                first.price
            } else {
                first.price / first.a * x
            };
        }
        if x >= last.a {
            return last.price;
        }
        let k = bps.partition_point(|bp| bp.a < x);
        let (left, right) = (bps[k - 1], bps[k]);
        if right.a == x {
            return right.price;
        }
        let t = (x - left.a) / (right.a - left.a);
        (1.0 - t) * left.price + t * right.price
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        if !(x > 0.0) {
            return Err(Error::domain(format!("prices are defined for x > 0, got {x}")));
        }
        Ok(self.value(x))
    }
}

impl PriceFunction for PiecewiseLinear {
    fn price(&self, x: f64) -> f64 {
        self.value(x)
    }
}

/// Checks the relaxed chain constraints on consecutive price points and
/// names the first violated pair.
pub fn check_chain(breakpoints: &[Breakpoint]) -> Result<()> {
    for (j, bp) in breakpoints.iter().enumerate() {
        if !approx_le(0.0, bp.price) {
            return Err(Error::InfeasiblePoints {
                index: j,
                reason: format!("negative price {}", bp.price),
            });
        }
    }
    for (j, w) in breakpoints.windows(2).enumerate() {
        let (lo, hi) = (w[0], w[1]);
        if !approx_le(lo.price, hi.price) {
            return Err(Error::InfeasiblePoints {
                index: j,
                reason: format!(
                    "price drops from {} at a = {} to {} at a = {}",
                    lo.price, lo.a, hi.price, hi.a
                ),
            });
        }
        if !approx_le(hi.price / hi.a, lo.price / lo.a) {
            return Err(Error::InfeasiblePoints {
                index: j,
                reason: format!(
                    "price per unit rises from {} at a = {} to {} at a = {}",
                    lo.price / lo.a,
                    lo.a,
                    hi.price / hi.a,
                    hi.a
                ),
            });
        }
    }
    Ok(())
}

/// Pricing curve whose knots satisfy the chain constraints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PiecewiseLinear", into = "PiecewiseLinear")]
pub struct PricingCurve {
    inner: PiecewiseLinear,
}

impl TryFrom<PiecewiseLinear> for PricingCurve {
    type Error = Error;

    fn try_from(inner: PiecewiseLinear) -> Result<Self> {
        check_chain(inner.breakpoints())?;
        Ok(Self { inner })
    }
}

impl From<PricingCurve> for PiecewiseLinear {
    fn from(curve: PricingCurve) -> Self {
        curve.inner
    }
}

impl PricingCurve {
    pub fn breakpoints(&self) -> &[Breakpoint] {
        self.inner.breakpoints()
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        self.inner.eval(x)
    }

    pub fn as_piecewise(&self) -> &PiecewiseLinear {
        &self.inner
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::try_from(PiecewiseLinear::load(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }

    /// Largest `x` in `[lo, hi]` whose price does not exceed `budget`, by
    /// inverting the linear piece that crosses the budget.
    fn last_affordable(&self, budget: f64, lo: f64, hi: f64) -> f64 {
        if self.inner.value(hi) <= budget {
            return hi;
        }
        // knots including the origin; prices are nondecreasing along them
        let mut knots = vec![(0.0, 0.0)];
        knots.extend(self.breakpoints().iter().map(|bp| (bp.a, bp.price)));
        let k = knots.iter().rposition(|&(_, z)| z <= budget).unwrap_or(0);
        let x = match knots.get(k + 1) {
            Some(&(a1, z1)) => {
                let (a0, z0) = knots[k];
                a0 + (budget - z0) / (z1 - z0) * (a1 - a0)
            }
            None => hi,
        };
        x.clamp(lo, hi)
    }
}

impl PriceFunction for PricingCurve {
    fn price(&self, x: f64) -> f64 {
        self.inner.value(x)
    }
}

pub fn make_piecewise(points: &[(f64, f64)]) -> Result<PricingCurve> {
    PricingCurve::try_from(PiecewiseLinear::from_points(points)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    Negative { x: f64, price: f64 },
    /// `x < y` but `p(x) > p(y)`.
    Monotone { x: f64, y: f64, price_x: f64, price_y: f64 },
    /// `p(x + y) > p(x) + p(y)`.
    Subadditive { x: f64, y: f64, price_sum: f64, price_x: f64, price_y: f64 },
}

/// Outcome of a grid audit. A clean report is evidence at grid
/// resolution, not a proof over all positive reals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub non_negative: bool,
    pub monotone: bool,
    pub subadditive: bool,
    pub witnesses: Vec<Witness>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.non_negative && self.monotone && self.subadditive
    }
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::domain("validation grid is empty"));
    }
    if grid.iter().any(|x| !(*x > 0.0) || !x.is_finite()) || grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::domain("grid must be positive, finite and strictly increasing"));
    }
    Ok(())
}

/// Audits non-negativity, monotonicity and subadditivity on `grid`. Every
/// pair `x_i <= x_j` with `x_i + x_j <= max(grid)` is tested, evaluating the
/// function at the sum.
pub fn validate<P: PriceFunction + ?Sized>(price_fn: &P, grid: &[f64]) -> Result<ValidationReport> {
    check_grid(grid)?;
    let values: Vec<f64> = grid.iter().map(|&x| price_fn.price(x)).collect();
    let mut witnesses = Vec::new();
    for (&x, &price) in grid.iter().zip(&values) {
        if !approx_le(0.0, price) {
            witnesses.push(Witness::Negative { x, price });
        }
    }
    let non_negative = witnesses.is_empty();
    for i in 1..grid.len() {
        if !approx_le(values[i - 1], values[i]) {
            witnesses.push(Witness::Monotone {
                x: grid[i - 1],
                y: grid[i],
                price_x: values[i - 1],
                price_y: values[i],
            });
        }
    }
    let before = witnesses.len();
    let top = grid[grid.len() - 1];
    for i in 0..grid.len() {
        for j in i..grid.len() {
            let sum = grid[i] + grid[j];
            if sum > top {
                break;
            }
            let price_sum = price_fn.price(sum);
            if !approx_le(price_sum, values[i] + values[j]) {
                witnesses.push(Witness::Subadditive {
                    x: grid[i],
                    y: grid[j],
                    price_sum,
                    price_x: values[i],
                    price_y: values[j],
                });
            }
        }
    }
    let subadditive = witnesses.len() == before;
    let monotone = witnesses
        .iter()
        .all(|w| !matches!(w, Witness::Monotone { .. }));
    Ok(ValidationReport {
        non_negative,
        monotone,
        subadditive,
        witnesses,
    })
}

/// Values `q(x) = x * min_{y <= x} p(y) / y` at the grid points, the minimum
/// taken over grid points.
pub fn envelope_values<P: PriceFunction + ?Sized>(price_fn: &P, grid: &[f64]) -> Result<Vec<f64>> {
    check_grid(grid)?;
    let mut best_rate = f64::INFINITY;
    let mut out = Vec::with_capacity(grid.len());
    for &x in grid {
        let p = price_fn.price(x);
        if !(p >= 0.0) {
            return Err(Error::domain(format!("negative price {p} at x = {x}")));
        }
        best_rate = best_rate.min(p / x);
        out.push(x * best_rate);
    }
    Ok(out)
}

/// Repairs a price function into a curve with nonincreasing price per
/// unit, losing at most half the price when the input is monotone and
/// subadditive. The input must be monotone on the grid for the result to
/// be a valid [`PricingCurve`].
pub fn subadditive_envelope<P: PriceFunction + ?Sized>(price_fn: &P, grid: &[f64]) -> Result<PricingCurve> {
    let values = envelope_values(price_fn, grid)?;
    let points: Vec<(f64, f64)> = grid.iter().copied().zip(values).collect();
    make_piecewise(&points)
}

/// Exact decision: can the points be interpolated by a positive, monotone,
/// subadditive function? Parameters are rescaled to integers (at most
/// `scale_cap` after scaling) and each price is compared with the cheapest
/// unbounded combination of offers covering its parameter.
pub fn interpolation_feasible(points: &[(f64, f64)], scale_cap: usize) -> Result<bool> {
    if points.is_empty() {
        return Ok(true);
    }
    for &(a, p) in points {
        if !(a > 0.0) || !a.is_finite() || !(p >= 0.0) || !p.is_finite() {
            return Err(Error::domain(format!(
                "point ({a}, {p}) needs a > 0 and a finite price >= 0"
            )));
        }
    }
    let mut sorted = points.to_vec();
    sorted.sort_by(|l, r| l.0.total_cmp(&r.0));
    if sorted.windows(2).any(|w| !approx_le(w[0].1, w[1].1)) {
        return Ok(false);
    }
    let params: Vec<f64> = sorted.iter().map(|p| p.0).collect();
    let scale = integer_scale(&params, scale_cap)?;
    let items: Vec<(usize, f64)> = scale
        .values
        .iter()
        .copied()
        .zip(sorted.iter().map(|p| p.1))
        .collect();
    let top = *scale.values.iter().max().expect("nonempty");
    let costs = covering_costs(&items, top);
    Ok(items
        .iter()
        .all(|&(size, price)| approx_le(price, costs[size])))
}

/// What a buyer receives: the version, its price and expected error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuoteResult {
    pub delta: f64,
    pub x: f64,
    pub price: f64,
    pub expected_error: Option<f64>,
}

impl QuoteResult {
    fn at(curve: &PricingCurve, errors: Option<&ErrorCurve>, x: f64) -> Result<Self> {
        Ok(Self {
            delta: 1.0 / x,
            x,
            price: curve.eval(x)?,
            expected_error: errors.map(|e| e.error_at(x)).transpose()?,
        })
    }
}

/// Cheapest version whose expected error is at most `error_budget`. When
/// the curve is flat there, the most accurate version at that price wins.
pub fn quote_by_error_budget(
    curve: &PricingCurve,
    errors: &ErrorCurve,
    error_budget: f64,
) -> Result<QuoteResult> {
    let x_min = errors.invert(error_budget)?;
    let (lo, hi) = errors.x_range();
    let price = curve.eval(x_min)?;
    let x = curve.last_affordable(price, lo, hi).max(x_min);
    QuoteResult::at(curve, Some(errors), x)
}

/// Most accurate version (largest `x` on the error curve's grid range)
/// whose price is at most `price_budget`.
pub fn quote_by_price_budget(
    curve: &PricingCurve,
    errors: &ErrorCurve,
    price_budget: f64,
) -> Result<QuoteResult> {
    errors.check()?;
    let (lo, hi) = errors.x_range();
    let min_price = curve.eval(lo)?;
    if !approx_le(min_price, price_budget) {
        return Err(Error::BudgetTooLow {
            budget: price_budget,
            min_price,
        });
    }
    let x = curve.last_affordable(price_budget.max(min_price), lo, hi);
    QuoteResult::at(curve, Some(errors), x)
}

/// Price (and, when an error curve covering `x` is supplied, expected
/// error) of the version at inverse NCP `x`.
pub fn quote_at_point(curve: &PricingCurve, errors: Option<&ErrorCurve>, x: f64) -> Result<QuoteResult> {
    QuoteResult::at(curve, errors, x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mechanism::CurvePoint;
    use crate::models::LossFamily;

    fn reference_curve() -> PricingCurve {
        make_piecewise(&[(1.0, 100.0), (2.0, 150.0), (3.0, 225.0), (4.0, 300.0)]).unwrap()
    }

    fn identity_errors(xs: &[f64]) -> ErrorCurve {
        ErrorCurve {
            epsilon: LossFamily::SquareToOptimal,
            seed: 0,
            points: xs
                .iter()
                .map(|&x| CurvePoint {
                    x,
                    mean_error: 1.0 / x,
                    stderr: 0.0,
                    samples: 2,
                })
                .collect(),
        }
    }

    #[test]
    fn extension_branches() {
        let c = reference_curve();
        assert_eq!(c.eval(0.5).unwrap(), 50.0);
        assert_eq!(c.eval(2.5).unwrap(), 187.5);
        assert_eq!(c.eval(40.0).unwrap(), 300.0);
        let c = make_piecewise(&[(1.0, 100.0), (2.0, 150.0)]).unwrap();
        assert_eq!(c.eval(10.0).unwrap(), 150.0);
        assert!(c.eval(1e-12).unwrap() < 1e-9);
    }

    #[test]
    fn knots_exact_and_slope_intercept_agrees() {
        let c = reference_curve();
        for bp in c.breakpoints() {
            assert_eq!(c.eval(bp.a).unwrap(), bp.price);
        }
        let bps = c.breakpoints();
        for k in 0..=300 {
            let x = 1.0 + k as f64 * 0.01;
            let seg = bps.iter().rposition(|bp| bp.a <= x).unwrap().min(bps.len() - 2);
            let (l, r) = (bps[seg], bps[seg + 1]);
            let slope = (r.price - l.price) / (r.a - l.a);
            let intercept = l.price - slope * l.a;
            let other = slope * x + intercept;
            assert!((c.eval(x).unwrap() - other).abs() < 1e-9);
        }
    }

    #[test]
    fn chain_violation_names_pair() {
        match make_piecewise(&[(1.0, 1.0), (2.0, 4.0)]).unwrap_err() {
            Error::InfeasiblePoints { index, .. } => assert_eq!(index, 0),
            other => panic!("{other}"),
        }
        assert!(matches!(
            make_piecewise(&[(1.0, 1.0), (2.0, 1.5), (3.0, 1.0)]),
            Err(Error::InfeasiblePoints { index: 1, .. })
        ));
        assert!(matches!(make_piecewise(&[(1.0, -1.0)]), Err(Error::InfeasiblePoints { .. })));
        assert!(matches!(make_piecewise(&[(2.0, 1.0), (1.0, 1.0)]), Err(Error::Domain(_))));
        assert!(matches!(make_piecewise(&[]), Err(Error::Domain(_))));
    }

    #[test]
    fn eval_domain() {
        assert!(matches!(reference_curve().eval(0.0), Err(Error::Domain(_))));
        assert!(matches!(reference_curve().eval(-1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn validate_examples() {
        let grid = [0.5, 1.0, 2.0, 3.0, 7.0];
        let r = validate(&|_x: f64| 3.0, &grid).unwrap();
        assert!(r.passed() && r.witnesses.is_empty());

        let r = validate(&|x: f64| x * x, &[1.0, 2.0]).unwrap();
        assert!(!r.subadditive && r.monotone && r.non_negative);
        assert_eq!(
            r.witnesses,
            vec![Witness::Subadditive {
                x: 1.0,
                y: 1.0,
                price_sum: 4.0,
                price_x: 1.0,
                price_y: 1.0
            }]
        );

        let drop = PiecewiseLinear::from_points(&[(1.0, 5.0), (2.0, 3.0)]).unwrap();
        let r = validate(&drop, &[1.0, 2.0]).unwrap();
        assert!(!r.monotone);
        assert!(matches!(r.witnesses[0], Witness::Monotone { x, y, .. } if x == 1.0 && y == 2.0));

        let r = validate(&|x: f64| x - 1.0, &[0.5, 1.0]).unwrap();
        assert!(!r.non_negative);
        assert!(validate(&|x: f64| x, &[]).is_err());
        assert!(validate(&|x: f64| x, &[2.0, 1.0]).is_err());
    }

    #[test]
    fn envelope_examples() {
        let grid = [1.0, 2.0];
        let q = envelope_values(&|x: f64| x * x, &grid).unwrap();
        assert_eq!(q, vec![1.0, 2.0]);
        let q = envelope_values(&|_x: f64| 7.0, &[1.0, 2.0, 5.0]).unwrap();
        assert_eq!(q, vec![7.0, 7.0, 7.0]);
        let feasible = reference_curve();
        let grid = [1.0, 2.0, 3.0, 4.0];
        let q = envelope_values(&feasible, &grid).unwrap();
        for (x, v) in grid.iter().zip(q) {
            assert!((v - feasible.eval(*x).unwrap()).abs() < 1e-12);
        }
        assert!(subadditive_envelope(&|x: f64| -x, &grid).is_err());
        let curve = subadditive_envelope(&|x: f64| x.sqrt() + x * x, &grid).unwrap();
        assert_eq!(curve.breakpoints().len(), 4);
    }

    #[test]
    fn feasibility_checker() {
        assert!(!interpolation_feasible(&[(2.0, 2.0), (3.0, 3.0), (5.0, 5.5)], 1000).unwrap());
        assert!(interpolation_feasible(&[(2.0, 2.0), (3.0, 3.0), (5.0, 5.0)], 1000).unwrap());
        assert!(interpolation_feasible(&[(0.7, 3.0)], 1000).unwrap());
        // price drop
        assert!(!interpolation_feasible(&[(1.0, 5.0), (2.0, 3.0)], 1000).unwrap());
        // concave points pass, superadditive points fail
        assert!(interpolation_feasible(&[(0.5, 1.0), (1.5, 2.0)], 1000).unwrap());
        assert!(!interpolation_feasible(&[(1.0, 1.0), (2.0, 4.0)], 1000).unwrap());
        assert!(matches!(
            interpolation_feasible(&[(2.0, 2.0), (5000.0, 5.0)], 100),
            Err(Error::Resource(_))
        ));
    }

    #[test]
    fn error_budget_quotes() {
        let errors = identity_errors(&[0.5, 1.0, 2.0, 3.0, 4.0]);
        let q = quote_by_error_budget(&reference_curve(), &errors, 0.5).unwrap();
        assert_eq!((q.delta, q.x, q.price), (0.5, 2.0, 150.0));
        assert_eq!(q.expected_error, Some(0.5));
        // loosest budget: cheapest version
        let q = quote_by_error_budget(&reference_curve(), &errors, 2.0).unwrap();
        assert_eq!((q.x, q.price), (0.5, 50.0));
        assert!(matches!(
            quote_by_error_budget(&reference_curve(), &errors, 0.1),
            Err(Error::OutOfRange { .. })
        ));
    }

    #[test]
    fn error_budget_tie_prefers_accuracy() {
        // flat price between a = 2 and a = 4
        let curve = make_piecewise(&[(1.0, 10.0), (2.0, 20.0), (4.0, 20.0)]).unwrap();
        let errors = identity_errors(&[1.0, 2.0, 3.0, 4.0, 5.0]);
        let q = quote_by_error_budget(&curve, &errors, 0.5).unwrap();
        assert_eq!((q.x, q.price), (5.0, 20.0));
    }

    #[test]
    fn price_budget_quotes() {
        let curve = reference_curve();
        let errors = identity_errors(&[0.5, 1.0, 2.0, 3.0, 4.0]);
        let q = quote_by_price_budget(&curve, &errors, 1000.0).unwrap();
        assert_eq!(q.x, 4.0);
        let q = quote_by_price_budget(&curve, &errors, 150.0).unwrap();
        assert_eq!(q.x, 2.0);
        // midpoint of the (2, 150)-(3, 225) segment
        let q = quote_by_price_budget(&curve, &errors, 187.5).unwrap();
        assert!((q.x - 2.5).abs() < 1e-12);
        assert!((curve.eval(q.x).unwrap() - 187.5).abs() < 1e-9);
        match quote_by_price_budget(&curve, &errors, 10.0).unwrap_err() {
            Error::BudgetTooLow { min_price, .. } => assert_eq!(min_price, 50.0),
            other => panic!("{other}"),
        }
    }

    #[test]
    fn point_quote() {
        let q = quote_at_point(&reference_curve(), None, 3.0).unwrap();
        assert_eq!((q.price, q.expected_error), (225.0, None));
    }

    #[test]
    fn curve_json() {
        let text = serde_json::to_string(&reference_curve()).unwrap();
        assert!(text.starts_with("{\"breakpoints\":[{\"a\":1.0,\"price\":100.0}"));
        let back: PricingCurve = serde_json::from_str(&text).unwrap();
        assert_eq!(back, reference_curve());
        let bad = r#"{"breakpoints":[{"a":1,"price":1},{"a":2,"price":4}]}"#;
        assert!(serde_json::from_str::<PricingCurve>(bad).is_err());
        assert!(serde_json::from_str::<PiecewiseLinear>(bad).is_ok());
    }
}
