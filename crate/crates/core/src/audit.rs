//! Verification oracles.
//!
//! Everything here certifies the production code paths rather than
//! reimplementing them: finite differences validate the objective's
//! gradients against its values, and exhaustive enumeration of the
//! sampling randomness validates the estimators' bias and MSE behavior.
//! Enumeration clones estimator state and calls the same `next_estimate`
//! and proximal step the solver uses, so any discrepancy implicates the
//! real implementation.
//!
//! Enumeration is exponential in the horizon (n^T branches) and is capped
//! by a hard branch budget; these oracles are for tiny audit instances,
//! not production runs.

use crate::estimator::{EstimatorKind, EstimatorState};
use crate::linalg;
use crate::objective::FiniteSumObjective;
use crate::regularizer::Regularizer;
use crate::rng::SplitMix64;
use crate::solver::prox_gradient_step;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

/// Hard cap on enumerated sampling sequences.
pub const BRANCH_BUDGET: u64 = 1024;

/// Audit failures.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum AuditError {
    /// n^T exceeds [`BRANCH_BUDGET`].
    BranchBudget { required: u64 },
}

impl fmt::Display for AuditError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            AuditError::BranchBudget { required } => write!(
                f,
                "enumeration needs {required} branches, budget is {BRANCH_BUDGET}"
            ),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for AuditError {}

/// Constants of the bounded-MSE property each estimator satisfies:
/// MSE_k ≤ M₁·mean-squared gradient drift + M₂·suboptimality terms, with
/// geometric forgetting rates ρ_M and ρ_F, window m, recursive bias factor
/// ρ_B, and staleness constant B₁ for the table-based kinds.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BmseConstants {
    pub m1: f64,
    pub m2: f64,
    pub rho_m: f64,
    pub rho_f: f64,
    pub m: usize,
    pub rho_b: f64,
    pub b1: f64,
}

/// The constants for `kind` on an n-component problem. SGD carries no
/// such certificate, so it yields `None`.
pub fn bmse_constants(kind: EstimatorKind, n: usize) -> Option<BmseConstants> {
    let nf = n as f64;
    match kind {
        EstimatorKind::Sgd => None,
        EstimatorKind::BSaga { theta } => {
            let base = 2.0 * nf + 1.0;
            let m1 = if theta <= 2.0 {
                base / (theta * theta)
            } else {
                let w = 1.0 - 1.0 / theta;
                base * w * w
            };
            Some(BmseConstants {
                m1,
                m2: 0.0,
                rho_m: 1.0 / (2.0 * nf),
                rho_f: 1.0,
                m: 1,
                rho_b: 0.0,
                b1: 2.0 * nf * base,
            })
        }
        EstimatorKind::BSvrg { theta, epoch_len } => {
            let mf = epoch_len as f64;
            let base = 3.0 * mf * (mf + 1.0);
            let m1 = if theta <= 2.0 {
                base / (theta * theta)
            } else {
                let w = 1.0 - 1.0 / theta;
                base * w * w
            };
            Some(BmseConstants {
                m1,
                m2: 0.0,
                rho_m: 1.0,
                rho_f: 1.0,
                m: epoch_len,
                rho_b: 0.0,
                b1: base,
            })
        }
        EstimatorKind::Sarah { epoch_len } => Some(BmseConstants {
            m1: epoch_len as f64,
            m2: 0.0,
            rho_m: 1.0,
            rho_f: 1.0,
            m: epoch_len,
            rho_b: 0.0,
            b1: 0.0,
        }),
        EstimatorKind::Sarge => Some(BmseConstants {
            m1: 12.0,
            m2: 39.0 / nf,
            rho_m: 1.0 / (4.0 * nf),
            rho_f: 1.0 / (2.0 * nf),
            m: 1,
            rho_b: 1.0 / nf,
            b1: 0.0,
        }),
    }
}

/// Central-difference check of every component gradient at `x`.
///
/// Returns the worst error |(f_i(x+he_q) − f_i(x−he_q))/(2h) − ∂_q f_i(x)|
/// over all components i and coordinates q, scaled by max(1, |∂_q f_i(x)|).
pub fn fd_gradient_check(obj: &FiniteSumObjective<'_>, x: &[f64], h: f64) -> f64 {
    assert!(h > 0.0);
    let dim = x.len();
    let mut probe = x.to_vec();
    let mut worst = 0.0f64;
    for i in 0..obj.n() {
        let grad = obj.component_gradient(i, x);
        for q in 0..dim {
            probe[q] = x[q] + h;
            let plus = obj.component_value(i, &probe);
            probe[q] = x[q] - h;
            let minus = obj.component_value(i, &probe);
            probe[q] = x[q];
            let fd = (plus - minus) / (2.0 * h);
            let err = (fd - grad[q]).abs() / grad[q].abs().max(1.0);
            if err > worst {
                worst = err;
            }
        }
    }
    worst
}

/// Bias the estimator's structure predicts for `state` at `x`, given the
/// previous iterate and estimate for the recursive kinds. Epoch-boundary
/// steps return a deterministic full gradient, so their predicted bias is
/// the deterministic gap (zero once the boundary refreshes the anchor).
fn predicted_bias(
    obj: &FiniteSumObjective<'_>,
    state: &EstimatorState,
    x: &[f64],
    x_prev: Option<&[f64]>,
    est_prev: Option<&[f64]>,
) -> Vec<f64> {
    let full = obj.full_gradient(x);
    let dim = state.dim;
    let nf = state.n as f64;
    match state.kind {
        EstimatorKind::Sgd => vec![0.0; dim],
        EstimatorKind::BSaga { theta } => {
            let w = 1.0 - 1.0 / theta;
            (0..dim)
                .map(|q| w * (full[q] - state.table_mean[q]))
                .collect()
        }
        EstimatorKind::BSvrg { theta, .. } => {
            if state.is_epoch_boundary() {
                if state.step_index == 0 {
                    (0..dim)
                        .map(|q| full[q] - state.snapshot_full_grad[q])
                        .collect()
                } else {
                    vec![0.0; dim]
                }
            } else {
                let w = 1.0 - 1.0 / theta;
                (0..dim)
                    .map(|q| w * (full[q] - state.snapshot_full_grad[q]))
                    .collect()
            }
        }
        EstimatorKind::Sarah { .. } => {
            if state.is_epoch_boundary() {
                if state.step_index == 0 {
                    (0..dim).map(|q| full[q] - state.prev_estimate[q]).collect()
                } else {
                    vec![0.0; dim]
                }
            } else {
                let xp = x_prev.unwrap_or(&state.prev_point);
                let ep = est_prev.unwrap_or(&state.prev_estimate);
                let full_prev = obj.full_gradient(xp);
                (0..dim).map(|q| full_prev[q] - ep[q]).collect()
            }
        }
        EstimatorKind::Sarge => {
            if state.sarge_cold_pending {
                // The first cold-start draw is the plain component
                // gradient, which is unbiased.
                vec![0.0; dim]
            } else {
                let xp = x_prev.unwrap_or(&state.prev_point);
                let ep = est_prev.unwrap_or(&state.prev_estimate);
                let w = 1.0 - 1.0 / nf;
                let full_prev = obj.full_gradient(xp);
                (0..dim).map(|q| w * (full_prev[q] - ep[q])).collect()
            }
        }
    }
}

/// ‖predicted bias − enumerated bias‖ for `state` at `x`.
///
/// The enumerated bias is ∇f(x) − E[∇̃ | state], with the expectation
/// taken exactly over the sampled index. For the recursive kinds the
/// caller may supply the previous iterate and estimate; otherwise the
/// state's own stored anchors are used.
pub fn bias_identity_residual(
    obj: &FiniteSumObjective<'_>,
    state: &EstimatorState,
    x: &[f64],
    x_prev: Option<&[f64]>,
    est_prev: Option<&[f64]>,
) -> f64 {
    let mean = state.conditional_mean(obj, x);
    let full = obj.full_gradient(x);
    let predicted = predicted_bias(obj, state, x, x_prev, est_prev);
    let mut acc = 0.0;
    for q in 0..state.dim {
        let actual = full[q] - mean[q];
        acc += (predicted[q] - actual) * (predicted[q] - actual);
    }
    linalg::sqrt(acc)
}

/// |enumerated MSE − (‖bias‖² + variance)| for `state` at `x`; the
/// decomposition must hold exactly up to rounding for every estimator.
pub fn mse_decomposition_residual(
    obj: &FiniteSumObjective<'_>,
    state: &EstimatorState,
    x: &[f64],
) -> f64 {
    let full = obj.full_gradient(x);
    let mean = state.conditional_mean(obj, x);
    let mse = state.conditional_mse(obj, x);
    let mut variance = 0.0;
    for j in 0..state.n {
        let mut branch = state.clone();
        let v = branch.next_estimate(obj, x, j);
        variance += linalg::dist_sq(&v, &mean);
    }
    variance /= state.n as f64;
    let bias_sq = linalg::dist_sq(&full, &mean);
    (mse - (bias_sq + variance)).abs()
}

/// |enumerated MSE − closed form| for the table-based estimators.
///
/// B-SAGA and B-SVRG satisfy, exactly,
/// E‖∇̃ − ∇f(x)‖² = (1/(nθ²))Σᵢ‖∇fᵢ(x) − tᵢ‖² + (1 − 2/θ)‖∇f(x) − t̄‖²,
/// where tᵢ is the stored table row (B-SAGA) or ∇fᵢ(snapshot) (B-SVRG)
/// and t̄ their mean. Epoch-boundary steps return a deterministic value,
/// for which the closed form degenerates to the deterministic gap.
/// Returns `None` for the other kinds.
pub fn mse_table_identity_residual(
    obj: &FiniteSumObjective<'_>,
    state: &EstimatorState,
    x: &[f64],
) -> Option<f64> {
    let full = obj.full_gradient(x);
    let mse = state.conditional_mse(obj, x);
    let nf = state.n as f64;
    let closed = match state.kind {
        EstimatorKind::BSaga { theta } => {
            let mut spread = 0.0;
            for i in 0..state.n {
                let row = &state.grad_table[i * state.dim..(i + 1) * state.dim];
                spread += linalg::dist_sq(&obj.component_gradient(i, x), row);
            }
            spread / (nf * theta * theta)
                + (1.0 - 2.0 / theta) * linalg::dist_sq(&full, &state.table_mean)
        }
        EstimatorKind::BSvrg { theta, .. } => {
            if state.is_epoch_boundary() {
                if state.step_index == 0 {
                    linalg::dist_sq(&full, &state.snapshot_full_grad)
                } else {
                    0.0
                }
            } else {
                let mut spread = 0.0;
                for i in 0..state.n {
                    let snap = obj.component_gradient(i, &state.snapshot_point);
                    spread += linalg::dist_sq(&obj.component_gradient(i, x), &snap);
                }
                spread / (nf * theta * theta)
                    + (1.0 - 2.0 / theta) * linalg::dist_sq(&full, &state.snapshot_full_grad)
            }
        }
        _ => return None,
    };
    Some((mse - closed).abs())
}

/// Residual of the optimality condition y − y⁺ ∈ η∂g(y⁺) at y⁺ = prox_{ηg}(y).
///
/// For the separable kinds the subdifferential inclusion is checked
/// coordinate-wise and the worst violation returned. For the ball
/// indicator the variational inequality ⟨y − y⁺, z − y⁺⟩ ≤ 0 is probed
/// over a fixed-seed sample of feasible points z (plus the vertices and
/// the origin) and the worst positive inner product returned.
pub fn prox_optimality_residual(reg: &Regularizer, y: &[f64], eta: f64) -> f64 {
    assert!(eta > 0.0);
    let p = reg.prox(y, eta);
    match *reg {
        Regularizer::Zero => linalg::sqrt(linalg::dist_sq(y, &p)),
        Regularizer::SquaredL2 { beta } => {
            let mut acc = 0.0;
            for q in 0..y.len() {
                let r = (y[q] - p[q]) - eta * beta * p[q];
                acc += r * r;
            }
            linalg::sqrt(acc)
        }
        Regularizer::L1 { beta } => {
            let t = eta * beta;
            let mut worst = 0.0f64;
            for q in 0..y.len() {
                let d = y[q] - p[q];
                let viol = if p[q] > 0.0 {
                    (d - t).abs()
                } else if p[q] < 0.0 {
                    (d + t).abs()
                } else {
                    (d.abs() - t).max(0.0)
                };
                if viol > worst {
                    worst = viol;
                }
            }
            worst
        }
        Regularizer::NonnegativeBall => {
            let dim = y.len();
            let mut rng = SplitMix64::new(0x5EED_FACE);
            let mut worst = 0.0f64;
            let mut check = |z: &[f64]| {
                let mut ip = 0.0;
                for q in 0..dim {
                    ip += (y[q] - p[q]) * (z[q] - p[q]);
                }
                if ip > worst {
                    worst = ip;
                }
            };
            let mut z = vec![0.0; dim];
            check(&z); // origin
            for q in 0..dim {
                z[q] = 1.0; // vertex e_q
                check(&z);
                z[q] = 0.0;
            }
            for _ in 0..200 {
                for zq in z.iter_mut() {
                    *zq = rng.next_f64();
                }
                let norm = linalg::norm(&z);
                if norm > 1.0 {
                    for zq in z.iter_mut() {
                        *zq /= norm;
                    }
                }
                check(&z);
            }
            worst
        }
    }
}

/// Exact expectations for one transition x_k → x_{k+1}, taken over every
/// sampling sequence j₀..j_k.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepExpectation {
    /// E‖∇̃_k − ∇f(x_k)‖².
    pub mse: f64,
    /// E‖x_{k+1} − x_k‖².
    pub step_sq: f64,
    /// (1/n)Σᵢ E‖∇fᵢ(x_{k+1}) − ∇fᵢ(x_k)‖².
    pub grad_diff_sq: f64,
    /// (1/n)Σᵢ E‖∇fᵢ(x_k) − tᵢ‖² against the estimator's table rows
    /// (stored gradients for B-SAGA, snapshot gradients for B-SVRG; zero
    /// for the kinds without a gradient table).
    pub table_dist_sq: f64,
}

/// Exact per-step expectations of a T-step run.
#[derive(Clone, Debug)]
pub struct TrajectoryExpectation {
    pub steps: Vec<StepExpectation>,
}

fn branch_count(n: usize, t: usize) -> Result<u64, AuditError> {
    let mut b: u64 = 1;
    for _ in 0..t {
        b = b.saturating_mul(n as u64);
        if b > BRANCH_BUDGET {
            return Err(AuditError::BranchBudget { required: b });
        }
    }
    Ok(b)
}

fn expected_table_dist_sq(obj: &FiniteSumObjective<'_>, state: &EstimatorState, x: &[f64]) -> f64 {
    match state.kind {
        EstimatorKind::BSaga { .. } | EstimatorKind::Sarge => {
            let mut acc = 0.0;
            for i in 0..state.n {
                let row = &state.grad_table[i * state.dim..(i + 1) * state.dim];
                acc += linalg::dist_sq(&obj.component_gradient(i, x), row);
            }
            acc / state.n as f64
        }
        EstimatorKind::BSvrg { .. } => {
            let mut acc = 0.0;
            for i in 0..state.n {
                let snap = obj.component_gradient(i, &state.snapshot_point);
                acc += linalg::dist_sq(&obj.component_gradient(i, x), &snap);
            }
            acc / state.n as f64
        }
        _ => 0.0,
    }
}

fn walk<N, T>(
    obj: &FiniteSumObjective<'_>,
    reg: &Regularizer,
    eta: f64,
    horizon: usize,
    depth: usize,
    state: &EstimatorState,
    x: &[f64],
    weight: f64,
    node: &mut N,
    transition: &mut T,
) where
    N: FnMut(usize, &EstimatorState, &[f64], f64),
    T: FnMut(usize, &[f64], f64, &[f64], &[f64]),
{
    if depth == horizon {
        return;
    }
    node(depth, state, x, weight);
    let branch_weight = weight / state.n as f64;
    for j in 0..state.n {
        let mut branch = state.clone();
        let v = branch.next_estimate(obj, x, j);
        let x_next = prox_gradient_step(reg, x, &v, eta);
        transition(depth, x, branch_weight, &v, &x_next);
        walk(
            obj,
            reg,
            eta,
            horizon,
            depth + 1,
            &branch,
            &x_next,
            branch_weight,
            node,
            transition,
        );
    }
}

/// Visits every reachable pre-step state of a `horizon`-step run.
///
/// The visitor receives (step index k, state before step k, iterate x_k,
/// reach probability). Every sampling sequence is expanded with the
/// production estimator update and proximal step, so identity checks run
/// against exactly the arithmetic the solver performs.
pub fn for_each_reachable_state<F>(
    obj: &FiniteSumObjective<'_>,
    reg: &Regularizer,
    kind: EstimatorKind,
    x0: &[f64],
    eta: f64,
    horizon: usize,
    mut visitor: F,
) -> Result<(), AuditError>
where
    F: FnMut(usize, &EstimatorState, &[f64], f64),
{
    branch_count(obj.n(), horizon)?;
    let state = EstimatorState::init(kind, obj, x0).expect("validated estimator parameters");
    walk(
        obj,
        reg,
        eta,
        horizon,
        0,
        &state,
        x0,
        1.0,
        &mut |depth, st, x, w| visitor(depth, st, x, w),
        &mut |_, _, _, _, _| {},
    );
    Ok(())
}

/// Runs the exhaustive enumeration of a `horizon`-step trajectory and
/// returns the exact per-step expectations.
pub fn trajectory_expectation(
    obj: &FiniteSumObjective<'_>,
    reg: &Regularizer,
    kind: EstimatorKind,
    x0: &[f64],
    eta: f64,
    horizon: usize,
) -> Result<TrajectoryExpectation, AuditError> {
    branch_count(obj.n(), horizon)?;
    let state = EstimatorState::init(kind, obj, x0).expect("validated estimator parameters");
    let mut table_dists = vec![0.0f64; horizon];
    let mut mses = vec![0.0f64; horizon];
    let mut step_sqs = vec![0.0f64; horizon];
    let mut grad_diffs = vec![0.0f64; horizon];

    let n = obj.n();
    walk(
        obj,
        reg,
        eta,
        horizon,
        0,
        &state,
        x0,
        1.0,
        &mut |depth, st, x, w| {
            table_dists[depth] += w * expected_table_dist_sq(obj, st, x);
        },
        &mut |depth, x, w, v, x_next| {
            let full = obj.full_gradient(x);
            mses[depth] += w * linalg::dist_sq(v, &full);
            step_sqs[depth] += w * linalg::dist_sq(x_next, x);
            let mut gd = 0.0;
            for i in 0..n {
                gd += linalg::dist_sq(
                    &obj.component_gradient(i, x_next),
                    &obj.component_gradient(i, x),
                );
            }
            grad_diffs[depth] += w * gd / n as f64;
        },
    );

    let steps = (0..horizon)
        .map(|k| StepExpectation {
            mse: mses[k],
            step_sq: step_sqs[k],
            grad_diff_sq: grad_diffs[k],
            table_dist_sq: table_dists[k],
        })
        .collect();
    Ok(TrajectoryExpectation { steps })
}
