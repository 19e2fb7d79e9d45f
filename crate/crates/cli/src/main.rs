use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use mbp_core::dataset::{self, Dataset};
use mbp_core::mechanism::{self, ErrorCurve};
use mbp_core::models::{self, LossFamily, LossSpec, ModelInstance, ModelKind};
use mbp_core::pricing::{self, Breakpoint, PiecewiseLinear, PricingCurve};
use mbp_core::revenue::{
    self, BaselineKind, InterpolationLoss, MarketInstance, PriceAssignment, ValueShape,
};

/// Arbitrage-free pricing of noisy model versions.
#[derive(Parser)]
#[command(name = "mbp", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic dataset as CSV.
    GenData(GenDataArgs),
    /// Train the optimal model instance on a CSV dataset.
    Train(TrainArgs),
    /// Estimate the expected error of noisy versions over a grid.
    Curve(CurveArgs),
    /// Compute prices for a market.
    Price(PriceArgs),
    /// Check a pricing curve for monotonicity, subadditivity and sign.
    Validate(ValidateArgs),
    /// Revenue and affordability of prices on a market.
    Simulate(SimulateArgs),
    /// Answer a buyer's request against a pricing curve.
    Quote(QuoteArgs),
    /// Time the dynamic program against the exact oracle.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum DataKind {
    Simulated1,
    Simulated2,
}

#[derive(Args)]
struct GenDataArgs {
    #[arg(value_enum)]
    kind: DataKind,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    d: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    Linear,
    Logistic,
    #[value(name = "svm_l2")]
    SvmL2,
}

impl From<ModelArg> for ModelKind {
    fn from(m: ModelArg) -> Self {
        match m {
            ModelArg::Linear => ModelKind::Linear,
            ModelArg::Logistic => ModelKind::Logistic,
            ModelArg::SvmL2 => ModelKind::SvmL2,
        }
    }
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long, value_enum)]
    model: ModelArg,
    #[arg(long, default_value_t = 0.0)]
    mu: f64,
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    #[arg(long, default_value_t = 100_000)]
    max_iter: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum EpsilonArg {
    Square,
    Log,
    #[value(name = "hinge_l2")]
    HingeL2,
    #[value(name = "zero_one")]
    ZeroOne,
    #[value(name = "square_to_optimal")]
    SquareToOptimal,
}

impl From<EpsilonArg> for LossFamily {
    fn from(e: EpsilonArg) -> Self {
        match e {
            EpsilonArg::Square => LossFamily::Square,
            EpsilonArg::Log => LossFamily::Log,
            EpsilonArg::HingeL2 => LossFamily::HingeL2,
            EpsilonArg::ZeroOne => LossFamily::ZeroOne,
            EpsilonArg::SquareToOptimal => LossFamily::SquareToOptimal,
        }
    }
}

#[derive(Args)]
struct CurveArgs {
    /// Model JSON written by `train`.
    #[arg(long)]
    model: PathBuf,
    /// CSV on which the error is measured; not needed for square_to_optimal.
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long, value_enum)]
    epsilon: EpsilonArg,
    /// Regularization inside the error function.
    #[arg(long, default_value_t = 0.0)]
    mu: f64,
    /// Inverse-NCP grid: `x1,x2,...` or `geom:lo:hi:n`. Defaults to 16
    /// geometric points around the inverse of the optimal model's error.
    #[arg(long)]
    grid: Option<String>,
    #[arg(long, default_value_t = 2000)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PriceArgs {
    #[command(subcommand)]
    method: PriceMethod,
}

#[derive(Subcommand)]
enum PriceMethod {
    /// Revenue-optimal relaxed prices by dynamic programming.
    Optimize {
        #[arg(long)]
        market: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exhaustive reference optimum (small markets only).
    Oracle {
        #[arg(long)]
        market: PathBuf,
        /// Optimize over all monotone subadditive functions instead of the
        /// relaxed constraints.
        #[arg(long)]
        exact: bool,
        /// Largest admissible integer rescaling of the parameters.
        #[arg(long, default_value_t = 100_000)]
        scale_cap: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Closest relaxed-feasible prices to a target curve.
    Interpolate {
        /// Curve JSON with the target breakpoints.
        #[arg(long)]
        targets: PathBuf,
        #[arg(long, value_enum, default_value = "l2")]
        loss: LossArg,
        #[arg(long, default_value_t = revenue::INTERPOLATION_TOL)]
        tol: f64,
        #[arg(long, default_value_t = revenue::INTERPOLATION_MAX_ITER)]
        max_iter: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Simple reference pricing schemes.
    Baseline {
        #[arg(long)]
        market: PathBuf,
        #[arg(long, value_enum)]
        kind: BaselineArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum LossArg {
    L2,
    L1,
}

#[derive(Clone, Copy, ValueEnum)]
enum BaselineArg {
    Lin,
    #[value(name = "max_c")]
    MaxC,
    #[value(name = "med_c")]
    MedC,
    #[value(name = "opt_c")]
    OptC,
}

impl From<BaselineArg> for BaselineKind {
    fn from(b: BaselineArg) -> Self {
        match b {
            BaselineArg::Lin => BaselineKind::Lin,
            BaselineArg::MaxC => BaselineKind::MaxC,
            BaselineArg::MedC => BaselineKind::MedC,
            BaselineArg::OptC => BaselineKind::OptC,
        }
    }
}

#[derive(Args)]
struct ValidateArgs {
    /// Curve JSON, or a price assignment written by `price`.
    #[arg(long)]
    curve: PathBuf,
    /// Check points: `x1,x2,...` or `geom:lo:hi:n`. Defaults to the knots,
    /// their midpoints, half the first knot and twice the last.
    #[arg(long)]
    grid: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    market: PathBuf,
    /// Price assignment or curve JSON.
    #[arg(long)]
    pricing: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct QuoteArgs {
    /// Curve JSON, or a price assignment written by `price`.
    #[arg(long)]
    curve: PathBuf,
    /// Error curve JSON written by `curve`.
    #[arg(long)]
    error_curve: Option<PathBuf>,
    #[arg(long, conflicts_with_all = ["price_budget", "point"])]
    error_budget: Option<f64>,
    #[arg(long, conflicts_with = "point")]
    price_budget: Option<f64>,
    /// Inverse NCP of the requested version.
    #[arg(long)]
    point: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// Market sizes for the dynamic program.
    #[arg(long, value_delimiter = ',', default_value = "200,500,1000,2000")]
    dp_sizes: Vec<usize>,
    /// Market sizes for the exact oracle (at most 12).
    #[arg(long, value_delimiter = ',', default_value = "4,6,8,10,12")]
    exact_sizes: Vec<usize>,
    #[arg(long, default_value_t = 3)]
    reps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Invalid combination of otherwise well-formed arguments.
#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    anyhow!(UsageError(msg.into()))
}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<UsageError>().is_some() {
        return 2;
    }
    if let Some(core) = err.downcast_ref::<mbp_core::Error>() {
        return if core.is_io() { 2 } else { 1 };
    }
    if err.downcast_ref::<std::io::Error>().is_some()
        || err.downcast_ref::<serde_json::Error>().is_some()
    {
        return 2;
    }
    1
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::GenData(args) => gen_data(args).map(|_| 0),
        Command::Train(args) => train(args).map(|_| 0),
        Command::Curve(args) => curve(args).map(|_| 0),
        Command::Price(args) => price(args).map(|_| 0),
        Command::Validate(args) => validate(args),
        Command::Simulate(args) => simulate(args).map(|_| 0),
        Command::Quote(args) => quote(args).map(|_| 0),
        Command::Bench(args) => bench(args).map(|_| 0),
    }
}

fn emit<T: Serialize>(value: &T, out: Option<&Path>) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    match out {
        Some(path) => {
            fs::write(path, text).with_context(|| format!("writing {}", path.display()))?
        }
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    if let Some(rest) = spec.strip_prefix("geom:") {
        let parts: Vec<&str> = rest.split(':').collect();
        let [lo, hi, n] = parts[..] else {
            return Err(usage(format!("grid {spec:?}: expected geom:lo:hi:n")));
        };
        let lo: f64 = lo.parse().map_err(|_| usage(format!("bad grid bound {lo:?}")))?;
        let hi: f64 = hi.parse().map_err(|_| usage(format!("bad grid bound {hi:?}")))?;
        let n: usize = n.parse().map_err(|_| usage(format!("bad grid size {n:?}")))?;
        return Ok(mechanism::geometric_grid(lo, hi, n)?);
    }
    spec.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| usage(format!("bad grid value {s:?}")))
        })
        .collect()
}

fn gen_data(args: GenDataArgs) -> Result<()> {
    let data = match args.kind {
        DataKind::Simulated1 => dataset::gen_simulated1(args.n, args.d, args.seed)?,
        DataKind::Simulated2 => dataset::gen_simulated2(args.n, args.d, args.seed)?,
    };
    dataset::save_csv(&args.out, &data)
        .with_context(|| format!("writing {}", args.out.display()))?;
    Ok(())
}

fn load_data(path: &Path, kind: ModelKind) -> Result<Dataset> {
    dataset::load_csv(path, kind.task()).with_context(|| format!("reading {}", path.display()))
}

fn train(args: TrainArgs) -> Result<()> {
    let kind = ModelKind::from(args.model);
    if kind == ModelKind::SvmL2 && args.mu.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) {
        return Err(usage("svm_l2 needs --mu > 0"));
    }
    let data = load_data(&args.data, kind)?;
    let model = match kind {
        ModelKind::Linear => models::train_linear(&data, args.mu)?,
        _ => models::train_iterative(&data, kind.training_loss(), args.mu, args.tol, args.max_iter)?,
    };
    emit(&model, args.out.as_deref())
}

fn curve(args: CurveArgs) -> Result<()> {
    if args.samples < 2 {
        return Err(usage("--samples must be at least 2 to estimate a standard error"));
    }
    let model = ModelInstance::load(&args.model)
        .with_context(|| format!("reading {}", args.model.display()))?;
    let family = LossFamily::from(args.epsilon);
    let (spec, data) = if family == LossFamily::SquareToOptimal {
        let data = match &args.data {
            Some(path) => load_data(path, model.kind)?,
            None => Dataset::empty(model.dim(), model.kind.task())?,
        };
        (LossSpec::square_to_optimal(model.clone()), data)
    } else {
        let path = args
            .data
            .as_ref()
            .ok_or_else(|| usage(format!("--epsilon {} needs --data", family.name())))?;
        (LossSpec::new(family, args.mu)?, load_data(path, model.kind)?)
    };
    let grid = match &args.grid {
        Some(g) => parse_grid(g)?,
        None => mechanism::default_grid(models::loss_eval(&model, &data, &spec)?),
    };
    let errors = mechanism::estimate_error_curve(&model, &data, &spec, &grid, args.samples, args.seed)?;
    emit(&errors, args.out.as_deref())
}

fn price(args: PriceArgs) -> Result<()> {
    let (assignment, out) = match args.method {
        PriceMethod::Optimize { market, out } => (revenue::optimize_dp(&load_market(&market)?)?, out),
        PriceMethod::Oracle {
            market,
            exact,
            scale_cap,
            out,
        } => {
            let market = load_market(&market)?;
            let result = if exact {
                revenue::oracle_exact(&market, scale_cap)?
            } else {
                revenue::oracle_relaxed(&market)?
            };
            (result, out)
        }
        PriceMethod::Interpolate {
            targets,
            loss,
            tol,
            max_iter,
            out,
        } => {
            let curve = PiecewiseLinear::load(&targets)
                .with_context(|| format!("reading {}", targets.display()))?;
            let points: Vec<(f64, f64)> = curve.breakpoints().iter().map(|b| (b.a, b.price)).collect();
            let loss = match loss {
                LossArg::L2 => InterpolationLoss::L2,
                LossArg::L1 => InterpolationLoss::L1,
            };
            (revenue::solve_interpolation(&points, loss, tol, max_iter)?, out)
        }
        PriceMethod::Baseline { market, kind, out } => {
            (revenue::baseline(kind.into(), &load_market(&market)?)?, out)
        }
    };
    emit(&assignment, out.as_deref())
}

fn load_market(path: &Path) -> Result<MarketInstance> {
    MarketInstance::load(path).with_context(|| format!("reading {}", path.display()))
}

/// A curve file (`breakpoints`) or a price assignment (`a`, `z`).
enum Prices {
    Curve(PiecewiseLinear),
    Assignment(PriceAssignment),
}

impl Prices {
    fn load(path: &Path) -> Result<Self> {
        let context = || format!("reading {}", path.display());
        let text = fs::read_to_string(path).with_context(context)?;
        let value: serde_json::Value = serde_json::from_str(&text).with_context(context)?;
        if value.get("breakpoints").is_some() {
            Ok(Prices::Curve(PiecewiseLinear::load(path).with_context(context)?))
        } else if value.get("z").is_some() {
            Ok(Prices::Assignment(PriceAssignment::load(path).with_context(context)?))
        } else {
            Err(mbp_core::Error::MalformedInput {
                row: 0,
                column: 0,
                message: "expected a curve (breakpoints) or a price assignment (a, z)".into(),
            })
            .with_context(context)
        }
    }

    fn piecewise(&self) -> Result<PiecewiseLinear> {
        match self {
            Prices::Curve(c) => Ok(c.clone()),
            Prices::Assignment(p) => Ok(PiecewiseLinear::new(
                p.a.iter()
                    .zip(&p.z)
                    .map(|(&a, &price)| Breakpoint { a, price })
                    .collect(),
            )?),
        }
    }
}

fn default_validation_grid(curve: &PiecewiseLinear) -> Vec<f64> {
    let knots: Vec<f64> = curve.breakpoints().iter().map(|b| b.a).collect();
    let mut grid = knots.clone();
    grid.extend(knots.windows(2).map(|w| 0.5 * (w[0] + w[1])));
    grid.push(knots[0] / 2.0);
    grid.push(2.0 * knots[knots.len() - 1]);
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    grid
}

fn validate(args: ValidateArgs) -> Result<u8> {
    let curve = Prices::load(&args.curve)?.piecewise()?;
    let grid = match &args.grid {
        Some(g) => parse_grid(g)?,
        None => default_validation_grid(&curve),
    };
    let report = pricing::validate(&curve, &grid)?;
    emit(&report, args.out.as_deref())?;
    Ok(if report.passed() { 0 } else { 1 })
}

#[derive(Serialize)]
struct Metrics {
    revenue: f64,
    affordability: f64,
}

fn simulate(args: SimulateArgs) -> Result<()> {
    let market = load_market(&args.market)?;
    let z: Vec<f64> = match Prices::load(&args.pricing)? {
        Prices::Assignment(p) => {
            if p.a != market.params() {
                bail!(mbp_core::Error::Domain(
                    "price assignment parameters differ from the market's".into()
                ));
            }
            p.z
        }
        Prices::Curve(c) => market
            .points()
            .iter()
            .map(|p| c.eval(p.a))
            .collect::<mbp_core::Result<_>>()?,
    };
    let metrics = Metrics {
        revenue: revenue::revenue_of(&z, &market)?,
        affordability: revenue::affordability_of(&z, &market)?,
    };
    emit(&metrics, args.out.as_deref())
}

fn quote(args: QuoteArgs) -> Result<()> {
    let curve = PricingCurve::try_from(Prices::load(&args.curve)?.piecewise()?)?;
    let errors = match &args.error_curve {
        Some(path) => Some(ErrorCurve::load(path).with_context(|| format!("reading {}", path.display()))?),
        None => None,
    };
    let need_errors = || {
        errors
            .as_ref()
            .ok_or_else(|| usage("budgets need --error-curve"))
    };
    let result = match (args.error_budget, args.price_budget, args.point) {
        (Some(e), None, None) => pricing::quote_by_error_budget(&curve, need_errors()?, e)?,
        (None, Some(b), None) => pricing::quote_by_price_budget(&curve, need_errors()?, b)?,
        (None, None, Some(x)) => pricing::quote_at_point(&curve, errors.as_ref(), x)?,
        _ => return Err(usage("give exactly one of --error-budget, --price-budget, --point")),
    };
    emit(&result, args.out.as_deref())
}

#[derive(Serialize)]
struct Timing {
    n: usize,
    seconds: f64,
    objective: f64,
}

#[derive(Serialize)]
struct BenchReport {
    reps: usize,
    optimize_dp: Vec<Timing>,
    oracle_exact: Vec<Timing>,
}

fn time_min<F: FnMut() -> Result<f64>>(reps: usize, mut f: F) -> Result<(f64, f64)> {
    let mut best = f64::INFINITY;
    let mut objective = 0.0;
    for _ in 0..reps.max(1) {
        let start = Instant::now();
        objective = f()?;
        best = best.min(start.elapsed().as_secs_f64());
    }
    Ok((best, objective))
}

fn bench(args: BenchArgs) -> Result<()> {
    let mut report = BenchReport {
        reps: args.reps.max(1),
        optimize_dp: Vec::new(),
        oracle_exact: Vec::new(),
    };
    for &n in &args.dp_sizes {
        let market = revenue::synthetic_market(n, ValueShape::Convex, args.seed)?;
        let (seconds, objective) = time_min(args.reps, || Ok(revenue::optimize_dp(&market)?.objective))?;
        report.optimize_dp.push(Timing { n, seconds, objective });
    }
    for &n in &args.exact_sizes {
        let market = revenue::synthetic_market(n, ValueShape::Convex, args.seed)?;
        let (seconds, objective) =
            time_min(args.reps, || Ok(revenue::oracle_exact(&market, 100_000)?.objective))?;
        report.oracle_exact.push(Timing { n, seconds, objective });
    }
    emit(&report, args.out.as_deref())
}
