//! Experiment assembly: benchmark problems, estimator and step-size
//! specifications, seeded starting points, reference solves, and solver
//! invocation.

use std::path::Path;

use provar_core::dataset::LabeledDataset;
use provar_core::estimator::EstimatorKind;
use provar_core::objective::{FiniteSumObjective, ObjectiveKind};
use provar_core::regularizer::Regularizer;
use provar_core::rng::SplitMix64;
use provar_core::solver::{self, Reference, RunTrajectory, SolverConfig, StepPolicy};
use provar_core::stepsize::Regime;

use crate::{io, CliError};

/// Benchmark problem families.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Problem {
    /// Least squares plus a squared-l2 penalty.
    Ridge,
    /// Least squares plus an l1 penalty.
    Lasso,
    /// Concave quadratic over the nonnegative part of the unit ball.
    Nnpca,
}

impl Problem {
    /// Regime assumed for `theory` steps when `--regime` is not given.
    pub fn default_regime(self) -> Regime {
        match self {
            Problem::Ridge => Regime::StronglyConvex,
            Problem::Lasso => Regime::Convex,
            Problem::Nnpca => Regime::NonConvex,
        }
    }
}

impl core::fmt::Display for Problem {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        let name = match self {
            Problem::Ridge => "ridge",
            Problem::Lasso => "lasso",
            Problem::Nnpca => "nnpca",
        };
        f.write_str(name)
    }
}

/// Parses a problem name.
pub fn parse_problem(text: &str) -> Result<Problem, CliError> {
    match text {
        "ridge" => Ok(Problem::Ridge),
        "lasso" => Ok(Problem::Lasso),
        "nnpca" => Ok(Problem::Nnpca),
        other => Err(CliError::Config(format!(
            "unknown problem {other:?} (expected ridge, lasso, or nnpca)"
        ))),
    }
}

/// A θ value, possibly deferred to the sample count of the dataset.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ThetaToken {
    /// An explicit positive value.
    Value(f64),
    /// The literal `n`, resolved once the dataset is loaded.
    SampleCount,
}

impl ThetaToken {
    /// Concrete θ for a dataset with `n` samples.
    pub fn resolve(self, n: usize) -> f64 {
        match self {
            ThetaToken::Value(v) => v,
            ThetaToken::SampleCount => n as f64,
        }
    }
}

/// Parses a θ token: a positive real or the literal `n`.
pub fn parse_theta_token(text: &str) -> Result<ThetaToken, CliError> {
    if text == "n" {
        return Ok(ThetaToken::SampleCount);
    }
    match text.parse::<f64>() {
        Ok(v) if v > 0.0 && v.is_finite() => Ok(ThetaToken::Value(v)),
        _ => Err(CliError::Config(format!(
            "invalid theta {text:?} (expected a positive number or n)"
        ))),
    }
}

/// Parses a comma-separated θ list.
pub fn parse_theta_list(text: &str) -> Result<Vec<ThetaToken>, CliError> {
    text.split(',')
        .map(|token| parse_theta_token(token.trim()))
        .collect()
}

/// Estimator families selectable on the command line.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EstimatorFamily {
    Sgd,
    BSaga,
    BSvrg,
    Sarah,
    Sarge,
}

impl EstimatorFamily {
    /// Whether the family takes a bias parameter θ.
    pub fn takes_theta(self) -> bool {
        matches!(self, EstimatorFamily::BSaga | EstimatorFamily::BSvrg)
    }
}

impl core::fmt::Display for EstimatorFamily {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        let name = match self {
            EstimatorFamily::Sgd => "sgd",
            EstimatorFamily::BSaga => "bsaga",
            EstimatorFamily::BSvrg => "bsvrg",
            EstimatorFamily::Sarah => "sarah",
            EstimatorFamily::Sarge => "sarge",
        };
        f.write_str(name)
    }
}

/// One requested estimator, e.g. `bsaga:10` or `sarah`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EstimatorChoice {
    pub family: EstimatorFamily,
    /// θ attached to the spec itself (the `name:θ` form).
    pub theta: Option<ThetaToken>,
}

/// Parses an estimator spec of the form `name` or `name:θ`.
pub fn parse_estimator(text: &str) -> Result<EstimatorChoice, CliError> {
    let (name, theta) = match text.split_once(':') {
        Some((name, theta)) => (name, Some(parse_theta_token(theta)?)),
        None => (text, None),
    };
    let family = match name {
        "sgd" => EstimatorFamily::Sgd,
        "bsaga" => EstimatorFamily::BSaga,
        "bsvrg" => EstimatorFamily::BSvrg,
        "sarah" => EstimatorFamily::Sarah,
        "sarge" => EstimatorFamily::Sarge,
        other => {
            return Err(CliError::Config(format!(
                "unknown estimator {other:?} (expected sgd, bsaga, bsvrg, sarah, or sarge)"
            )))
        }
    };
    if theta.is_some() && !family.takes_theta() {
        return Err(CliError::Config(format!(
            "estimator {family} does not take a theta parameter"
        )));
    }
    Ok(EstimatorChoice { family, theta })
}

/// Parses a comma-separated estimator list.
pub fn parse_estimator_list(text: &str) -> Result<Vec<EstimatorChoice>, CliError> {
    text.split(',')
        .map(|token| parse_estimator(token.trim()))
        .collect()
}

impl EstimatorChoice {
    /// Concrete estimator for a dataset of `n` samples. A θ attached to
    /// the spec wins over the separate `--theta` flag; θ defaults to 1
    /// and epoch lengths default to n.
    pub fn resolve(
        &self,
        theta_flag: Option<ThetaToken>,
        epoch_len: Option<usize>,
        n: usize,
    ) -> Result<EstimatorKind, CliError> {
        let theta = self
            .theta
            .or(theta_flag)
            .map(|t| t.resolve(n))
            .unwrap_or(1.0);
        let m = epoch_len.unwrap_or(n);
        let kind = match self.family {
            EstimatorFamily::Sgd => EstimatorKind::Sgd,
            EstimatorFamily::BSaga => EstimatorKind::BSaga { theta },
            EstimatorFamily::BSvrg => EstimatorKind::BSvrg {
                theta,
                epoch_len: m,
            },
            EstimatorFamily::Sarah => EstimatorKind::Sarah { epoch_len: m },
            EstimatorFamily::Sarge => EstimatorKind::Sarge,
        };
        kind.validate()
            .map_err(|e| CliError::Config(e.to_string()))?;
        Ok(kind)
    }

    /// File stem for per-run CSV names, e.g. `bsaga_theta10` or `sarah`.
    pub fn file_stem(&self, theta_flag: Option<ThetaToken>, n: usize) -> String {
        match (self.family.takes_theta(), self.theta.or(theta_flag)) {
            (true, Some(t)) => format!("{}_theta{}", self.family, t.resolve(n)),
            _ => self.family.to_string(),
        }
    }
}

/// Step-size specification.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StepSpec {
    /// Worst-case step size from the estimator's convergence analysis.
    Theory,
    /// Preset constant selected by the token `paper`: η = 1/(5L) for
    /// ridge and lasso, η = 1/(5Ln) for nnpca.
    Preset,
    /// Explicit positive constant.
    Fixed(f64),
}

/// Parses `theory`, `paper`, or a positive real.
pub fn parse_step(text: &str) -> Result<StepSpec, CliError> {
    match text {
        "theory" => Ok(StepSpec::Theory),
        "paper" => Ok(StepSpec::Preset),
        other => match other.parse::<f64>() {
            Ok(v) if v > 0.0 && v.is_finite() => Ok(StepSpec::Fixed(v)),
            _ => Err(CliError::Config(format!(
                "invalid step {other:?} (expected theory, paper, or a positive number)"
            ))),
        },
    }
}

/// Parses a regime name for theory step sizes.
pub fn parse_regime(text: &str) -> Result<Regime, CliError> {
    match text {
        "convex" => Ok(Regime::Convex),
        "strongly-convex" => Ok(Regime::StronglyConvex),
        "nonconvex" => Ok(Regime::NonConvex),
        other => Err(CliError::Config(format!(
            "unknown regime {other:?} (expected convex, strongly-convex, or nonconvex)"
        ))),
    }
}

/// A fully constructed problem instance.
pub struct Workload {
    pub data: LabeledDataset,
    pub problem: Problem,
    pub objective_kind: ObjectiveKind,
    pub regularizer: Regularizer,
    pub x0: Vec<f64>,
}

impl Workload {
    /// Borrows the dataset as a finite-sum objective.
    pub fn objective(&self) -> Result<FiniteSumObjective<'_>, CliError> {
        FiniteSumObjective::new(self.objective_kind, &self.data)
            .map_err(|e| CliError::Config(format!("objective rejected dataset: {e}")))
    }
}

/// Loads the dataset, rescales every feature to [-1, 1], and assembles
/// the requested problem. Ridge and lasso start from the origin with
/// the penalty weight defaulting to 1/n; nnpca starts from a seeded
/// random point of its constraint set and takes no beta.
pub fn build_workload(
    problem: Problem,
    data_path: &Path,
    beta: Option<f64>,
    seed: u64,
) -> Result<Workload, CliError> {
    if let Some(b) = beta {
        if !(b > 0.0 && b.is_finite()) {
            return Err(CliError::Config(format!("beta must be positive, got {b}")));
        }
    }
    let mut data = io::load_dataset(data_path).map_err(CliError::Io)?;
    data.rescale_features();
    let n = data.n_samples();
    let p = data.n_features();
    let (objective_kind, regularizer, x0) = match problem {
        Problem::Ridge => (
            ObjectiveKind::LeastSquares,
            Regularizer::SquaredL2 {
                beta: beta.unwrap_or(1.0 / n as f64),
            },
            vec![0.0; p],
        ),
        Problem::Lasso => (
            ObjectiveKind::LeastSquares,
            Regularizer::L1 {
                beta: beta.unwrap_or(1.0 / n as f64),
            },
            vec![0.0; p],
        ),
        Problem::Nnpca => {
            if beta.is_some() {
                return Err(CliError::Config(
                    "nnpca takes no beta; its regularizer is a constraint indicator".to_string(),
                ));
            }
            (
                ObjectiveKind::NegSquare,
                Regularizer::NonnegativeBall,
                feasible_start(p, seed),
            )
        }
    };
    Ok(Workload {
        data,
        problem,
        objective_kind,
        regularizer,
        x0,
    })
}

/// Seeded starting point on the constraint set of nnpca: the
/// coordinatewise absolute value of a standard-normal draw, normalized
/// onto the unit sphere. Never the origin, so the first gradient is
/// informative.
fn feasible_start(dim: usize, seed: u64) -> Vec<f64> {
    let mut rng = SplitMix64::new(seed ^ 0x9E37_79B9_7F4A_7C15);
    let mut x: Vec<f64> = (0..dim).map(|_| standard_normal(&mut rng).abs()).collect();
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm == 0.0 {
        x[0] = 1.0;
        return x;
    }
    for v in &mut x {
        *v /= norm;
    }
    x
}

/// Box-Muller transform; the first uniform is shifted into (0, 1] so
/// the logarithm stays finite.
fn standard_normal(rng: &mut SplitMix64) -> f64 {
    let u1 = ((rng.next_u64() >> 11) + 1) as f64 * (1.0 / 9_007_199_254_740_992.0);
    let u2 = rng.next_f64();
    (-2.0 * u1.ln()).sqrt() * (core::f64::consts::TAU * u2).cos()
}

/// Turns a step specification into a solver policy for this problem.
pub fn resolve_step_policy(
    spec: StepSpec,
    problem: Problem,
    regime: Option<Regime>,
    obj: &FiniteSumObjective<'_>,
) -> StepPolicy {
    match spec {
        StepSpec::Theory => StepPolicy::Theory(regime.unwrap_or(problem.default_regime())),
        StepSpec::Preset => {
            let l = obj.lipschitz_bound();
            let eta = match problem {
                Problem::Ridge | Problem::Lasso => 1.0 / (5.0 * l),
                Problem::Nnpca => 1.0 / (5.0 * l * obj.n() as f64),
            };
            StepPolicy::Fixed(eta)
        }
        StepSpec::Fixed(eta) => StepPolicy::Fixed(eta),
    }
}

/// Full-gradient step size for reference solves: 1/L, except 1/(10Ln)
/// for nnpca where descent toward a stationary point is kept cautious.
pub fn reference_step(problem: Problem, obj: &FiniteSumObjective<'_>) -> f64 {
    let l = obj.lipschitz_bound();
    match problem {
        Problem::Ridge | Problem::Lasso => 1.0 / l,
        Problem::Nnpca => 1.0 / (10.0 * l * obj.n() as f64),
    }
}

/// Computes a high-accuracy reference with deterministic proximal
/// gradient descent from the workload's starting point.
pub fn compute_reference(
    workload: &Workload,
    tol: f64,
    max_iters: usize,
) -> Result<Reference, CliError> {
    let obj = workload.objective()?;
    let eta = reference_step(workload.problem, &obj);
    Ok(solver::reference_solution(
        &obj,
        &workload.regularizer,
        &workload.x0,
        eta,
        tol,
        max_iters,
    ))
}

/// One solver invocation with fully resolved pieces.
#[derive(Clone, Copy, Debug)]
pub struct RunPlan {
    pub estimator: EstimatorKind,
    pub step: StepPolicy,
    pub seed: u64,
    /// Effective passes over the data; iterations = epochs × n.
    pub epochs: usize,
}

/// Runs the solver for `epochs` passes, checkpointing every pass.
pub fn execute(
    workload: &Workload,
    plan: &RunPlan,
    reference: Option<&Reference>,
) -> Result<RunTrajectory, CliError> {
    let obj = workload.objective()?;
    let n = obj.n();
    let config = SolverConfig {
        estimator: plan.estimator,
        step: plan.step,
        iterations: plan.epochs.saturating_mul(n),
        record_every: n,
        seed: plan.seed,
        sarge_cold_start: false,
    };
    solver::run(
        &obj,
        &workload.regularizer,
        &config,
        &workload.x0,
        reference,
    )
    .map_err(CliError::Solver)
}
