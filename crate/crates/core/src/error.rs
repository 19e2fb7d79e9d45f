use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed input at row {row}, column {column}: {message}")]
    MalformedInput {
        row: usize,
        column: usize,
        message: String,
    },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("ill-posed problem: {0}")]
    IllPosed(String),

    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    Convergence { iterations: usize, residual: f64 },

    #[error("target {target} outside achievable range [{min}, {max}]")]
    OutOfRange { target: f64, min: f64, max: f64 },

    #[error("invalid error curve: {0}")]
    CurveInvalid(String),

    #[error("infeasible price points at index {index}: {reason}")]
    InfeasiblePoints { index: usize, reason: String },

    #[error("resource limit exceeded: {0}")]
    Resource(String),

    #[error("budget {budget} is below the cheapest offered price {min_price}")]
    BudgetTooLow { budget: f64, min_price: f64 },

    #[error("at grid point {index} (x = {x}): {source}")]
    AtGridPoint {
        index: usize,
        x: f64,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// True for failures caused by the environment (files, encodings) rather
    /// than by the numerical content of the request.
    pub fn is_io(&self) -> bool {
        match self {
            Error::Io(_) | Error::Json(_) | Error::MalformedInput { .. } => true,
            Error::AtGridPoint { source, .. } => source.is_io(),
            _ => false,
        }
    }
}
