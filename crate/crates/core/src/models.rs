//! Generalized linear models without intercept: training and the error
//! functions used both as training objectives and as evaluation errors.
//!
//! Normalization is fixed crate-wide: the square-loss data term is
//! averaged with `1/(2n)`, log and hinge data terms with `1/n`, and the
//! ridge term `mu * |h|^2` is never averaged.

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, Task};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Linear,
    Logistic,
    SvmL2,
}

impl ModelKind {
    pub fn task(self) -> Task {
        match self {
            ModelKind::Linear => Task::Regression,
            ModelKind::Logistic | ModelKind::SvmL2 => Task::Classification,
        }
    }

    /// Training loss associated with this kind of model.
    pub fn training_loss(self) -> LossFamily {
        match self {
            ModelKind::Linear => LossFamily::Square,
            ModelKind::Logistic => LossFamily::Log,
            ModelKind::SvmL2 => LossFamily::HingeL2,
        }
    }
}

/// A weight vector `h` together with how it was produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelInstance {
    pub kind: ModelKind,
    #[serde(with = "dvector_as_vec")]
    pub weights: DVector<f64>,
    /// Ridge coefficient used in training.
    #[serde(default)]
    pub mu: f64,
}

mod dvector_as_vec {
    use nalgebra::DVector;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &DVector<f64>, s: S) -> Result<S::Ok, S::Error> {
        v.as_slice().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<DVector<f64>, D::Error> {
        Ok(DVector::from_vec(Vec::<f64>::deserialize(d)?))
    }
}

impl ModelInstance {
    pub fn new(kind: ModelKind, weights: DVector<f64>, mu: f64) -> Result<Self> {
        if weights.is_empty() || weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::domain("model weights must be nonempty and finite"));
        }
        Ok(Self { kind, weights, mu })
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn with_weights(&self, weights: DVector<f64>) -> Self {
        Self {
            kind: self.kind,
            weights,
            mu: self.mu,
        }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let model: ModelInstance = serde_json::from_str(&text)?;
        ModelInstance::new(model.kind, model.weights, model.mu)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossFamily {
    Square,
    Log,
    HingeL2,
    ZeroOne,
    /// Squared euclidean distance to a reference model; ignores the data.
    SquareToOptimal,
}

impl LossFamily {
    pub fn name(self) -> &'static str {
        match self {
            LossFamily::Square => "square",
            LossFamily::Log => "log",
            LossFamily::HingeL2 => "hinge_l2",
            LossFamily::ZeroOne => "zero_one",
            LossFamily::SquareToOptimal => "square_to_optimal",
        }
    }

    fn regularized(self) -> bool {
        matches!(self, LossFamily::Square | LossFamily::Log | LossFamily::HingeL2)
    }
}

impl std::str::FromStr for LossFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "square" => LossFamily::Square,
            "log" => LossFamily::Log,
            "hinge_l2" | "hinge" => LossFamily::HingeL2,
            "zero_one" => LossFamily::ZeroOne,
            "square_to_optimal" => LossFamily::SquareToOptimal,
            other => return Err(Error::domain(format!("unknown loss family {other:?}"))),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LossSpec {
    pub family: LossFamily,
    pub mu: f64,
    pub reference: Option<ModelInstance>,
}

impl LossSpec {
    pub fn new(family: LossFamily, mu: f64) -> Result<Self> {
        if !(mu >= 0.0) || !mu.is_finite() {
            return Err(Error::domain(format!("regularization must be >= 0, got {mu}")));
        }
        if family == LossFamily::SquareToOptimal {
            return Err(Error::domain(
                "square_to_optimal needs a reference model; use LossSpec::square_to_optimal",
            ));
        }
        Ok(Self {
            family,
            mu,
            reference: None,
        })
    }

    pub fn square_to_optimal(reference: ModelInstance) -> Self {
        Self {
            family: LossFamily::SquareToOptimal,
            mu: 0.0,
            reference: Some(reference),
        }
    }
}

fn check_dims(h: &ModelInstance, data: &Dataset) -> Result<()> {
    if h.dim() != data.dim() {
        return Err(Error::domain(format!(
            "model has {} weights but data has {} features",
            h.dim(),
            data.dim()
        )));
    }
    Ok(())
}

/// `log(1 + e^z)` without overflow.
fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Example-averaged error of `h` on `data`, plus `mu |h|^2` for the
/// regularizable families.
pub fn loss_eval(h: &ModelInstance, data: &Dataset, spec: &LossSpec) -> Result<f64> {
    if spec.family == LossFamily::SquareToOptimal {
        let reference = spec
            .reference
            .as_ref()
            .ok_or_else(|| Error::domain("square_to_optimal needs a reference model"))?;
        if reference.dim() != h.dim() {
            return Err(Error::domain("reference model dimension mismatch"));
        }
        return Ok((&h.weights - &reference.weights).norm_squared());
    }
    check_dims(h, data)?;
    if data.is_empty() {
        return Err(Error::domain("cannot evaluate a loss on an empty dataset"));
    }
    let n = data.len() as f64;
    let margins = data.features() * &h.weights;
    let y = data.targets();
    let data_term = match spec.family {
        LossFamily::Square => {
            margins
                .iter()
                .zip(y.iter())
                .map(|(m, y)| (m - y) * (m - y))
                .sum::<f64>()
                / (2.0 * n)
        }
        LossFamily::Log => {
            margins
                .iter()
                .zip(y.iter())
                .map(|(m, y)| softplus(-y * m))
                .sum::<f64>()
                / n
        }
        LossFamily::HingeL2 => {
            margins
                .iter()
                .zip(y.iter())
                .map(|(m, y)| (1.0 - y * m).max(0.0))
                .sum::<f64>()
                / n
        }
        LossFamily::ZeroOne => {
            let wrong = margins
                .iter()
                .zip(y.iter())
                .filter(|(m, y)| (**m > 0.0) != (**y > 0.0))
                .count();
            wrong as f64 / n
        }
        LossFamily::SquareToOptimal => unreachable!(),
    };
    let ridge = if spec.family.regularized() {
        spec.mu * h.weights.norm_squared()
    } else {
        0.0
    };
    Ok(data_term + ridge)
}

/// Gradient of [`loss_eval`] with respect to the weights. The hinge family
/// returns a subgradient; zero-one has none.
pub fn loss_gradient(h: &ModelInstance, data: &Dataset, spec: &LossSpec) -> Result<DVector<f64>> {
    if spec.family == LossFamily::SquareToOptimal {
        let reference = spec
            .reference
            .as_ref()
            .ok_or_else(|| Error::domain("square_to_optimal needs a reference model"))?;
        return Ok((&h.weights - &reference.weights) * 2.0);
    }
    check_dims(h, data)?;
    let n = data.len() as f64;
    let x = data.features();
    let y = data.targets();
    let margins = x * &h.weights;
    let coef = match spec.family {
        LossFamily::Square => DVector::from_iterator(
            margins.len(),
            margins.iter().zip(y.iter()).map(|(m, y)| (m - y) / n),
        ),
        LossFamily::Log => DVector::from_iterator(
            margins.len(),
            margins
                .iter()
                .zip(y.iter())
                .map(|(m, y)| -y * sigmoid(-y * m) / n),
        ),
        LossFamily::HingeL2 => DVector::from_iterator(
            margins.len(),
            margins
                .iter()
                .zip(y.iter())
                .map(|(m, y)| if y * m < 1.0 { -y / n } else { 0.0 }),
        ),
        LossFamily::ZeroOne => {
            return Err(Error::domain("zero-one loss has no gradient"));
        }
        LossFamily::SquareToOptimal => unreachable!(),
    };
    Ok(x.tr_mul(&coef) + &h.weights * (2.0 * spec.mu))
}

/// Exact ridge least squares through the normal equations
/// `(X^T X / n + 2 mu I) h = X^T y / n`.
pub fn train_linear(train: &Dataset, mu: f64) -> Result<ModelInstance> {
    if train.task() != Task::Regression {
        return Err(Error::domain("linear regression needs a regression dataset"));
    }
    if train.is_empty() {
        return Err(Error::domain("cannot train on an empty dataset"));
    }
    if !(mu >= 0.0) || !mu.is_finite() {
        return Err(Error::domain(format!("regularization must be >= 0, got {mu}")));
    }
    let n = train.len() as f64;
    let d = train.dim();
    let x = train.features();
    let a: DMatrix<f64> = x.tr_mul(x) / n + DMatrix::identity(d, d) * (2.0 * mu);
    let b: DVector<f64> = x.tr_mul(train.targets()) / n;

    let max_diag = a.diagonal().max();
    let ill_posed = || {
        Error::IllPosed(format!(
            "normal equations are singular (mu = {mu}); use a positive regularization mu"
        ))
    };
    let chol = a.clone().cholesky().ok_or_else(ill_posed)?;
    // Cholesky succeeds on numerically rank-deficient systems with tiny pivots.
    let min_pivot = chol.l_dirty().diagonal().map(|l| l * l).min();
    if !(max_diag > 0.0) || min_pivot <= 1e-12 * max_diag {
        return Err(ill_posed());
    }
    let mut h = chol.solve(&b);
    // one step of iterative refinement
    let residual = &b - &a * &h;
    h += chol.solve(&residual);
    ModelInstance::new(ModelKind::Linear, h, mu)
}

/// Iterative training for the classification losses, starting from `h = 0`.
///
/// Log loss uses gradient descent with Armijo backtracking and stops once
/// the gradient norm is at most `tol`. The hinge loss is nonsmooth, so it is
/// solved through its box-constrained dual by cyclic coordinate descent; the
/// stopping residual there is the spread of projected dual gradients.
pub fn train_iterative(
    train: &Dataset,
    family: LossFamily,
    mu: f64,
    tol: f64,
    max_iter: usize,
) -> Result<ModelInstance> {
    if train.task() != Task::Classification {
        return Err(Error::domain("iterative training needs a classification dataset"));
    }
    if train.is_empty() {
        return Err(Error::domain("cannot train on an empty dataset"));
    }
    if !(mu >= 0.0) || !mu.is_finite() {
        return Err(Error::domain(format!("regularization must be >= 0, got {mu}")));
    }
    match family {
        LossFamily::Log => train_logistic(train, mu, tol, max_iter),
        LossFamily::HingeL2 => {
            if mu <= 0.0 {
                return Err(Error::domain("hinge loss training requires mu > 0"));
            }
            train_hinge(train, mu, tol, max_iter)
        }
        other => Err(Error::domain(format!(
            "{} is not trained iteratively",
            other.name()
        ))),
    }
}

fn train_logistic(train: &Dataset, mu: f64, tol: f64, max_iter: usize) -> Result<ModelInstance> {
    let spec = LossSpec::new(LossFamily::Log, mu)?;
    let mut model = ModelInstance {
        kind: ModelKind::Logistic,
        weights: DVector::zeros(train.dim()),
        mu,
    };
    let mut step = 1.0;
    let mut noisy = false;
    for _ in 0..max_iter {
        let grad = loss_gradient(&model, train, &spec)?;
        let gnorm2 = grad.norm_squared();
        if gnorm2.sqrt() <= tol {
            return Ok(model);
        }
        let f0 = loss_eval(&model, train, &spec)?;
        let mut t = if noisy { step } else { step * 2.0 };
        let next = loop {
            let candidate = model.with_weights(&model.weights - &grad * t);
            let f1 = loss_eval(&candidate, train, &spec)?;
            if f1 <= f0 - 0.5 * t * gnorm2 {
                break Some(candidate);
            }
            // near the optimum the decrease drops below rounding noise in
            // the objective; fall back to asking for a smaller gradient
            if (f1 - f0).abs() <= 4.0 * f64::EPSILON * f0.abs().max(1.0)
                && loss_gradient(&candidate, train, &spec)?.norm_squared() < gnorm2
            {
                noisy = true;
                break Some(candidate);
            }
            t *= 0.5;
            if t < 1e-30 {
                break None;
            }
        };
        match next {
            Some(candidate) => {
                model = candidate;
                step = t;
            }
            // line search exhausted: no representable descent left
            None => break,
        }
    }
    let residual = loss_gradient(&model, train, &spec)?.norm();
    if residual <= tol {
        Ok(model)
    } else {
        Err(Error::Convergence {
            iterations: max_iter,
            residual,
        })
    }
}

fn train_hinge(train: &Dataset, mu: f64, tol: f64, max_iter: usize) -> Result<ModelInstance> {
    let n = train.len();
    let d = train.dim();
    let x = train.features();
    let y = train.targets();
    let rows: Vec<f64> = (0..n).flat_map(|i| x.row(i).iter().copied().collect::<Vec<_>>()).collect();
    let row = |i: usize| &rows[i * d..(i + 1) * d];
    let cap = 1.0 / (2.0 * mu * n as f64);
    let q: Vec<f64> = (0..n).map(|i| row(i).iter().map(|v| v * v).sum()).collect();
    let mut alpha = vec![0.0; n];
    let mut w = vec![0.0; d];
    let mut residual = f64::INFINITY;
    for _ in 0..max_iter {
        let (mut pg_max, mut pg_min) = (f64::NEG_INFINITY, f64::INFINITY);
        for i in 0..n {
            let xi = row(i);
            let g = y[i] * xi.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>() - 1.0;
            let pg = if alpha[i] <= 0.0 {
                g.min(0.0)
            } else if alpha[i] >= cap {
                g.max(0.0)
            } else {
                g
            };
            pg_max = pg_max.max(pg);
            pg_min = pg_min.min(pg);
            if pg != 0.0 && q[i] > 0.0 {
                let old = alpha[i];
                alpha[i] = (old - g / q[i]).clamp(0.0, cap);
                let delta = (alpha[i] - old) * y[i];
                for (wj, xj) in w.iter_mut().zip(xi) {
                    *wj += delta * xj;
                }
            }
        }
        residual = pg_max - pg_min;
        if residual <= tol {
            return ModelInstance::new(ModelKind::SvmL2, DVector::from_vec(w), mu);
        }
    }
    Err(Error::Convergence {
        iterations: max_iter,
        residual,
    })
}
