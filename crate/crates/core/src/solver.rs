//! Proximal stochastic gradient solver.
//!
//! Iterates x_{k+1} = prox_{ηg}(x_k − η∇̃_k) where ∇̃_k comes from any of
//! the gradient estimators, with one uniformly sampled component index per
//! iteration drawn from a seeded deterministic PRNG. Also provides the
//! deterministic proximal-gradient reference solver used to compute
//! high-accuracy minimizers, and the generalized gradient map
//! G_η(x) = (1/η)(x − prox_{ηg}(x − η∇f(x))) used both as the reference
//! stopping criterion and as the stationarity measure on non-convex runs.

use crate::estimator::{EstimatorError, EstimatorKind, EstimatorState};
use crate::linalg;
use crate::objective::FiniteSumObjective;
use crate::regularizer::Regularizer;
use crate::rng::SplitMix64;
use crate::stepsize::{theory_step_size, Regime, StepSizeError};
use alloc::vec::Vec;
use core::fmt;

/// Divergence guard: a run aborts once ‖x_k‖ exceeds this bound.
pub const DIVERGENCE_NORM_BOUND: f64 = 1e12;

/// How the step size η is chosen.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StepPolicy {
    /// Use this η as given.
    Fixed(f64),
    /// Resolve η from the estimator's guarantee for the given regime.
    Theory(Regime),
}

/// Full specification of one stochastic run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverConfig {
    pub estimator: EstimatorKind,
    pub step: StepPolicy,
    /// Total iteration count T.
    pub iterations: usize,
    /// Checkpoint stride; iterations 0, every multiple of this, and T are
    /// recorded.
    pub record_every: usize,
    /// PRNG seed for the index sequence j_0, j_1, ….
    pub seed: u64,
    /// Start SARGE without its initial full gradient pass.
    pub sarge_cold_start: bool,
}

/// Metrics recorded at one iteration. The three reference-relative columns
/// (`gap`, `avg_gap`, `dist_sq`) are NaN when the run has no reference
/// solution.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Checkpoint {
    pub iter: usize,
    pub oracle_calls: u64,
    /// F(x_k) = f(x_k) + g(x_k).
    pub objective: f64,
    /// F(x_k) − F*.
    pub gap: f64,
    /// F(x̄_k) − F* at the running average x̄_k of x₁..x_k (x̄₀ = x₀).
    pub avg_gap: f64,
    /// ‖x_k − x*‖².
    pub dist_sq: f64,
    /// ‖G_{η/2}(x_k)‖.
    pub gen_grad_norm: f64,
}

/// Result of a stochastic run.
#[derive(Clone, Debug)]
pub struct RunTrajectory {
    pub checkpoints: Vec<Checkpoint>,
    pub final_x: Vec<f64>,
    /// Running average of x₁..x_T (x₀ if no iterations ran).
    pub final_avg: Vec<f64>,
    /// The resolved step size the run used.
    pub step_size: f64,
}

/// High-accuracy solution produced by the deterministic reference solver.
#[derive(Clone, Debug)]
pub struct Reference {
    pub x_star: Vec<f64>,
    pub f_star: f64,
    /// ‖G_η(x_star)‖ at the returned point.
    pub residual: f64,
    /// Whether the residual met the requested tolerance.
    pub converged: bool,
}

/// Solver failures.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SolverError {
    Step(StepSizeError),
    Estimator(EstimatorError),
    /// Fixed step size not a positive finite number.
    BadStep {
        eta: f64,
    },
    /// Checkpoint stride must be at least one.
    ZeroRecordStride,
    /// F(x₀) is not finite (starting point violates the constraint set).
    InfeasibleStart,
    /// Iterate norm exceeded the divergence guard or went non-finite.
    Diverged {
        iteration: usize,
    },
}

impl fmt::Display for SolverError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            SolverError::Step(e) => write!(f, "{e}"),
            SolverError::Estimator(e) => write!(f, "{e}"),
            SolverError::BadStep { eta } => {
                write!(f, "step size must be a positive finite number, got {eta}")
            }
            SolverError::ZeroRecordStride => write!(f, "record stride must be at least 1"),
            SolverError::InfeasibleStart => {
                write!(f, "objective is not finite at the starting point")
            }
            SolverError::Diverged { iteration } => write!(
                f,
                "iterates diverged at iteration {iteration}; the step size is too large"
            ),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for SolverError {}

impl From<StepSizeError> for SolverError {
    fn from(e: StepSizeError) -> Self {
        SolverError::Step(e)
    }
}

impl From<EstimatorError> for SolverError {
    fn from(e: EstimatorError) -> Self {
        SolverError::Estimator(e)
    }
}

/// One proximal step: prox_{ηg}(x − ηv). Shared by the solver, the
/// reference solver, and the audit enumeration so they apply bit-identical
/// arithmetic.
pub fn prox_gradient_step(reg: &Regularizer, x: &[f64], v: &[f64], eta: f64) -> Vec<f64> {
    debug_assert_eq!(x.len(), v.len());
    let y: Vec<f64> = x.iter().zip(v).map(|(&xi, &vi)| xi - eta * vi).collect();
    reg.prox(&y, eta)
}

/// The generalized gradient map G_η(x) = (1/η)(x − prox_{ηg}(x − η∇f(x))).
pub fn generalized_gradient(
    obj: &FiniteSumObjective<'_>,
    reg: &Regularizer,
    x: &[f64],
    eta: f64,
) -> Vec<f64> {
    debug_assert!(eta > 0.0);
    let grad = obj.full_gradient(x);
    let stepped = prox_gradient_step(reg, x, &grad, eta);
    x.iter()
        .zip(&stepped)
        .map(|(&xi, &si)| (xi - si) / eta)
        .collect()
}

/// Resolves the configured step policy to a concrete η.
pub fn resolve_step_size(
    config: &SolverConfig,
    obj: &FiniteSumObjective<'_>,
    reg: &Regularizer,
) -> Result<f64, SolverError> {
    match config.step {
        StepPolicy::Fixed(eta) => {
            if eta > 0.0 && eta.is_finite() {
                Ok(eta)
            } else {
                Err(SolverError::BadStep { eta })
            }
        }
        StepPolicy::Theory(regime) => Ok(theory_step_size(
            config.estimator,
            regime,
            obj.n(),
            obj.lipschitz_bound(),
            reg.strong_convexity(),
        )?),
    }
}

fn checkpoint_at(
    iter: usize,
    oracle_calls: u64,
    obj: &FiniteSumObjective<'_>,
    reg: &Regularizer,
    x: &[f64],
    avg: &[f64],
    eta: f64,
    reference: Option<&Reference>,
) -> Checkpoint {
    let objective = obj.value(x) + reg.value(x);
    let gen = generalized_gradient(obj, reg, x, eta / 2.0);
    let (gap, avg_gap, dist_sq) = match reference {
        Some(r) => (
            objective - r.f_star,
            obj.value(avg) + reg.value(avg) - r.f_star,
            linalg::dist_sq(x, &r.x_star),
        ),
        None => (f64::NAN, f64::NAN, f64::NAN),
    };
    Checkpoint {
        iter,
        oracle_calls,
        objective,
        gap,
        avg_gap,
        dist_sq,
        gen_grad_norm: linalg::norm(&gen),
    }
}

/// Runs the stochastic solver from `x0` and records checkpoints.
///
/// Exactly one index is drawn per iteration from the seeded generator, so
/// a given (config, x0) pair always reproduces the same trajectory
/// bit-for-bit. Gap columns require `reference`; without it they are NaN.
pub fn run(
    obj: &FiniteSumObjective<'_>,
    reg: &Regularizer,
    config: &SolverConfig,
    x0: &[f64],
    reference: Option<&Reference>,
) -> Result<RunTrajectory, SolverError> {
    if config.record_every == 0 {
        return Err(SolverError::ZeroRecordStride);
    }
    let eta = resolve_step_size(config, obj, reg)?;
    let mut state = if config.sarge_cold_start && config.estimator == EstimatorKind::Sarge {
        EstimatorState::init_sarge_cold(obj, x0)
    } else {
        EstimatorState::init(config.estimator, obj, x0)?
    };
    if !(obj.value(x0) + reg.value(x0)).is_finite() {
        return Err(SolverError::InfeasibleStart);
    }

    let n = obj.n();
    let mut rng = SplitMix64::new(config.seed);
    let mut x = x0.to_vec();
    let mut avg = x0.to_vec();
    let mut checkpoints = alloc::vec![checkpoint_at(
        0,
        state.oracle_calls,
        obj,
        reg,
        &x,
        &avg,
        eta,
        reference
    )];

    for k in 0..config.iterations {
        let j = rng.next_index(n);
        let v = state.next_estimate(obj, &x, j);
        x = prox_gradient_step(reg, &x, &v, eta);

        let norm_sq = linalg::norm_sq(&x);
        if !norm_sq.is_finite() || norm_sq > DIVERGENCE_NORM_BOUND * DIVERGENCE_NORM_BOUND {
            return Err(SolverError::Diverged { iteration: k + 1 });
        }

        let iter = k + 1;
        let count = iter as f64;
        for (a, &xi) in avg.iter_mut().zip(&x) {
            *a += (xi - *a) / count;
        }

        if iter % config.record_every == 0 || iter == config.iterations {
            checkpoints.push(checkpoint_at(
                iter,
                state.oracle_calls,
                obj,
                reg,
                &x,
                &avg,
                eta,
                reference,
            ));
        }
    }

    Ok(RunTrajectory {
        checkpoints,
        final_x: x,
        final_avg: avg,
        step_size: eta,
    })
}

/// Deterministic proximal gradient descent to high accuracy.
///
/// Steps x ← prox_{ηg}(x − η∇f(x)) until ‖G_η(x)‖ ≤ `tol` or `max_iters`
/// steps have been taken; returns the last point together with its
/// objective value and residual. `converged` reports whether the
/// tolerance was met.
pub fn reference_solution(
    obj: &FiniteSumObjective<'_>,
    reg: &Regularizer,
    x0: &[f64],
    eta: f64,
    tol: f64,
    max_iters: usize,
) -> Reference {
    assert!(eta > 0.0 && tol > 0.0);
    let mut x = x0.to_vec();
    let mut grad = alloc::vec![0.0; x.len()];
    let mut residual = f64::INFINITY;
    let mut converged = false;
    for _ in 0..=max_iters {
        obj.full_gradient_into(&x, &mut grad);
        let next = prox_gradient_step(reg, &x, &grad, eta);
        residual = linalg::sqrt(linalg::dist_sq(&x, &next)) / eta;
        if residual <= tol {
            converged = true;
            break;
        }
        x = next;
    }
    let f_star = obj.value(&x) + reg.value(&x);
    Reference {
        x_star: x,
        f_star,
        residual,
        converged,
    }
}
