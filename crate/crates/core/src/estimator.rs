//! Stochastic gradient estimators.
//!
//! Five interchangeable state machines produce the search direction ∇̃_k
//! consumed by the proximal solver: plain sampling (SGD), biased SAGA
//! (B-SAGA, weight θ), biased SVRG (B-SVRG, weight θ and epoch length m),
//! the recursive SARAH estimator, and the recursive-with-memory SARGE
//! estimator. All randomness comes from the caller-supplied sample index
//! `j`, so the machines themselves are deterministic and cloneable — the
//! audit module exploits this to enumerate conditional means and MSEs
//! exactly.
//!
//! Oracle accounting counts component-gradient evaluations: SGD and B-SAGA
//! cost one per step; B-SVRG and SARAH cost two per inner step and a full
//! pass (n) at every epoch boundary after the first (initialization pays
//! for the boundary at step zero); SARGE costs two per step after an
//! initial full pass and never takes a full pass again.

use crate::objective::FiniteSumObjective;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

/// Which estimator drives the run, with its tuning parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum EstimatorKind {
    /// ∇̃_k = ∇f_{j_k}(x_k).
    Sgd,
    /// ∇̃_k = (1/θ)(∇f_{j_k}(x_k) − table[j_k]) + table_mean, with a
    /// stored-gradient table updated at the sampled row. θ = 1 is SAGA;
    /// θ = n is SAG.
    BSaga { theta: f64 },
    /// ∇̃_k = (1/θ)(∇f_{j_k}(x_k) − ∇f_{j_k}(φ)) + ∇f(φ) against a
    /// snapshot φ refreshed every `epoch_len` steps. θ = 1 is SVRG.
    BSvrg { theta: f64, epoch_len: usize },
    /// ∇̃_k = ∇f_{j_k}(x_k) − ∇f_{j_k}(x_{k−1}) + ∇̃_{k−1}, restarted from
    /// a full gradient every `epoch_len` steps.
    Sarah { epoch_len: usize },
    /// ∇̃_k = ∇f_{j_k}(x_k) − ψ[j_k] + ψ_mean
    ///        − (1 − 1/n)(∇f_{j_k}(x_{k−1}) − ∇̃_{k−1}),
    /// with ψ[j_k] ← ∇f_{j_k}(x_k) − (1 − 1/n)∇f_{j_k}(x_{k−1}). Combines
    /// the recursive correction with a stored table and needs no epochs.
    Sarge,
}

/// Parameter validation failures for [`EstimatorKind`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum EstimatorError {
    /// θ must be strictly positive (and finite).
    BadTheta { theta: f64 },
    /// Epoch length must be at least one.
    ZeroEpochLength,
}

impl fmt::Display for EstimatorError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            EstimatorError::BadTheta { theta } => {
                write!(f, "estimator weight theta must be positive, got {theta}")
            }
            EstimatorError::ZeroEpochLength => {
                write!(f, "epoch length must be at least 1")
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for EstimatorError {}

impl EstimatorKind {
    /// Checks parameter ranges: θ > 0 and finite, epoch length ≥ 1.
    pub fn validate(&self) -> Result<(), EstimatorError> {
        match *self {
            EstimatorKind::Sgd | EstimatorKind::Sarge => Ok(()),
            EstimatorKind::BSaga { theta } => {
                if theta > 0.0 && theta.is_finite() {
                    Ok(())
                } else {
                    Err(EstimatorError::BadTheta { theta })
                }
            }
            EstimatorKind::BSvrg { theta, epoch_len } => {
                if !(theta > 0.0 && theta.is_finite()) {
                    Err(EstimatorError::BadTheta { theta })
                } else if epoch_len == 0 {
                    Err(EstimatorError::ZeroEpochLength)
                } else {
                    Ok(())
                }
            }
            EstimatorKind::Sarah { epoch_len } => {
                if epoch_len == 0 {
                    Err(EstimatorError::ZeroEpochLength)
                } else {
                    Ok(())
                }
            }
        }
    }

    /// Epoch length for the epoch-based kinds, `None` otherwise.
    pub fn epoch_len(&self) -> Option<usize> {
        match *self {
            EstimatorKind::BSvrg { epoch_len, .. } | EstimatorKind::Sarah { epoch_len } => {
                Some(epoch_len)
            }
            _ => None,
        }
    }
}

/// Mutable estimator state threaded through a run.
///
/// Field usage varies by kind; unused buffers stay empty. `grad_table`
/// holds the per-component stored gradients for B-SAGA and the ψ table for
/// SARGE, flattened row-major (n × dim). `table_mean` is maintained
/// incrementally as the exact mean of the table rows.
#[derive(Clone, Debug)]
pub struct EstimatorState {
    pub kind: EstimatorKind,
    pub n: usize,
    pub dim: usize,
    /// B-SAGA stored gradients / SARGE ψ rows, row-major n × dim.
    pub grad_table: Vec<f64>,
    /// Running mean of the `grad_table` rows.
    pub table_mean: Vec<f64>,
    /// B-SVRG/SARAH snapshot point φ.
    pub snapshot_point: Vec<f64>,
    /// Full gradient at the snapshot point (B-SVRG).
    pub snapshot_full_grad: Vec<f64>,
    /// Previous iterate x_{k−1} (SARAH/SARGE recursion anchor).
    pub prev_point: Vec<f64>,
    /// Previous estimate ∇̃_{k−1} (SARAH/SARGE recursion anchor).
    pub prev_estimate: Vec<f64>,
    /// Number of `next_estimate` calls made so far (the caller's k).
    pub step_index: usize,
    /// Cumulative component-gradient evaluations.
    pub oracle_calls: u64,
    /// Set by the SARGE cold start; the first call then seeds the
    /// recursion from a single component gradient instead of a full pass.
    pub sarge_cold_pending: bool,
}

impl EstimatorState {
    /// Initializes estimator state at the starting point.
    ///
    /// B-SAGA starts from an all-zero table (no oracle calls). B-SVRG,
    /// SARAH, and SARGE each pay one full pass (n calls) to anchor their
    /// recursions at x₀. SGD is stateless.
    pub fn init(
        kind: EstimatorKind,
        obj: &FiniteSumObjective<'_>,
        x0: &[f64],
    ) -> Result<Self, EstimatorError> {
        kind.validate()?;
        let n = obj.n();
        let dim = obj.dim();
        assert_eq!(x0.len(), dim, "starting point has wrong dimension");
        let mut state = EstimatorState {
            kind,
            n,
            dim,
            grad_table: Vec::new(),
            table_mean: Vec::new(),
            snapshot_point: Vec::new(),
            snapshot_full_grad: Vec::new(),
            prev_point: Vec::new(),
            prev_estimate: Vec::new(),
            step_index: 0,
            oracle_calls: 0,
            sarge_cold_pending: false,
        };
        match kind {
            EstimatorKind::Sgd => {}
            EstimatorKind::BSaga { .. } => {
                state.grad_table = vec![0.0; n * dim];
                state.table_mean = vec![0.0; dim];
            }
            EstimatorKind::BSvrg { .. } => {
                state.snapshot_point = x0.to_vec();
                state.snapshot_full_grad = obj.full_gradient(x0);
                state.oracle_calls = n as u64;
            }
            EstimatorKind::Sarah { .. } => {
                state.snapshot_point = x0.to_vec();
                state.prev_point = x0.to_vec();
                state.prev_estimate = obj.full_gradient(x0);
                state.oracle_calls = n as u64;
            }
            EstimatorKind::Sarge => {
                state.grad_table = vec![0.0; n * dim];
                state.table_mean = vec![0.0; dim];
                state.prev_point = x0.to_vec();
                state.prev_estimate = obj.full_gradient(x0);
                state.oracle_calls = n as u64;
            }
        }
        Ok(state)
    }

    /// SARGE without the initial full pass: no oracle work at
    /// initialization; the first `next_estimate` call returns the sampled
    /// component gradient and seeds the recursion from it (one call).
    /// The estimator then never evaluates more than two component
    /// gradients per step over its entire lifetime.
    pub fn init_sarge_cold(obj: &FiniteSumObjective<'_>, x0: &[f64]) -> Self {
        let n = obj.n();
        let dim = obj.dim();
        assert_eq!(x0.len(), dim, "starting point has wrong dimension");
        EstimatorState {
            kind: EstimatorKind::Sarge,
            n,
            dim,
            grad_table: vec![0.0; n * dim],
            table_mean: vec![0.0; dim],
            snapshot_point: Vec::new(),
            snapshot_full_grad: Vec::new(),
            prev_point: x0.to_vec(),
            prev_estimate: vec![0.0; dim],
            step_index: 0,
            oracle_calls: 0,
            sarge_cold_pending: true,
        }
    }

    /// True when the next `next_estimate` call lands on an epoch boundary
    /// (B-SVRG/SARAH only) and therefore returns a full gradient that does
    /// not depend on the sampled index.
    pub fn is_epoch_boundary(&self) -> bool {
        match self.kind {
            EstimatorKind::BSvrg { epoch_len, .. } | EstimatorKind::Sarah { epoch_len } => {
                self.step_index % epoch_len == 0
            }
            _ => false,
        }
    }

    fn table_row(&self, j: usize) -> &[f64] {
        &self.grad_table[j * self.dim..(j + 1) * self.dim]
    }

    /// Replaces table row `j` with `new_row`, keeping `table_mean` the
    /// exact incremental mean.
    fn set_table_row(&mut self, j: usize, new_row: &[f64]) {
        let n = self.n as f64;
        let start = j * self.dim;
        for q in 0..self.dim {
            self.table_mean[q] += (new_row[q] - self.grad_table[start + q]) / n;
            self.grad_table[start + q] = new_row[q];
        }
    }

    /// Produces ∇̃_k for iterate `x` and sampled index `j`, then advances
    /// the internal state (tables, recursion anchors, step and oracle
    /// counters).
    pub fn next_estimate(&mut self, obj: &FiniteSumObjective<'_>, x: &[f64], j: usize) -> Vec<f64> {
        assert!(
            j < self.n,
            "sample index {j} out of range for n = {}",
            self.n
        );
        assert_eq!(x.len(), self.dim, "iterate has wrong dimension");
        assert_eq!(obj.n(), self.n, "objective does not match estimator state");
        let estimate = match self.kind {
            EstimatorKind::Sgd => {
                self.oracle_calls += 1;
                obj.component_gradient(j, x)
            }
            EstimatorKind::BSaga { theta } => {
                let g = obj.component_gradient(j, x);
                self.oracle_calls += 1;
                let row = self.table_row(j);
                let v: Vec<f64> = (0..self.dim)
                    .map(|q| (g[q] - row[q]) / theta + self.table_mean[q])
                    .collect();
                self.set_table_row(j, &g);
                v
            }
            EstimatorKind::BSvrg { theta, epoch_len } => {
                if self.step_index % epoch_len == 0 {
                    // Epoch boundary: refresh the snapshot at the current
                    // iterate and return its full gradient. Step zero is
                    // already anchored by init, so only later boundaries
                    // pay the full pass.
                    if self.step_index > 0 {
                        self.snapshot_point.copy_from_slice(x);
                        obj.full_gradient_into(x, &mut self.snapshot_full_grad);
                        self.oracle_calls += self.n as u64;
                    }
                    self.snapshot_full_grad.clone()
                } else {
                    let gx = obj.component_gradient(j, x);
                    let gs = obj.component_gradient(j, &self.snapshot_point);
                    self.oracle_calls += 2;
                    (0..self.dim)
                        .map(|q| (gx[q] - gs[q]) / theta + self.snapshot_full_grad[q])
                        .collect()
                }
            }
            EstimatorKind::Sarah { epoch_len } => {
                if self.step_index % epoch_len == 0 {
                    if self.step_index > 0 {
                        obj.full_gradient_into(x, &mut self.prev_estimate);
                        self.oracle_calls += self.n as u64;
                    }
                    self.snapshot_point.copy_from_slice(x);
                    self.prev_point.copy_from_slice(x);
                    self.prev_estimate.clone()
                } else {
                    let gx = obj.component_gradient(j, x);
                    let gp = obj.component_gradient(j, &self.prev_point);
                    self.oracle_calls += 2;
                    let v: Vec<f64> = (0..self.dim)
                        .map(|q| gx[q] - gp[q] + self.prev_estimate[q])
                        .collect();
                    self.prev_estimate.copy_from_slice(&v);
                    self.prev_point.copy_from_slice(x);
                    v
                }
            }
            EstimatorKind::Sarge => {
                let weight = 1.0 - 1.0 / self.n as f64;
                if self.sarge_cold_pending {
                    // Cold start: the first estimate is the bare component
                    // gradient, which also plays the role of ∇f_j(x_{k−1})
                    // in the ψ update (prev_point equals x here), so one
                    // oracle call covers both uses.
                    self.sarge_cold_pending = false;
                    let g = obj.component_gradient(j, x);
                    self.oracle_calls += 1;
                    let new_row: Vec<f64> = (0..self.dim).map(|q| g[q] - weight * g[q]).collect();
                    self.set_table_row(j, &new_row);
                    self.prev_estimate.copy_from_slice(&g);
                    self.prev_point.copy_from_slice(x);
                    g
                } else {
                    let gx = obj.component_gradient(j, x);
                    let gp = obj.component_gradient(j, &self.prev_point);
                    self.oracle_calls += 2;
                    let row = self.table_row(j);
                    let v: Vec<f64> = (0..self.dim)
                        .map(|q| {
                            gx[q] - row[q] + self.table_mean[q]
                                - weight * (gp[q] - self.prev_estimate[q])
                        })
                        .collect();
                    let new_row: Vec<f64> = (0..self.dim).map(|q| gx[q] - weight * gp[q]).collect();
                    self.set_table_row(j, &new_row);
                    self.prev_estimate.copy_from_slice(&v);
                    self.prev_point.copy_from_slice(x);
                    v
                }
            }
        };
        self.step_index += 1;
        estimate
    }

    /// E[∇̃_k | state] at iterate `x`: the average of `next_estimate` over
    /// every sample index, each evaluated on a clone so `self` is never
    /// mutated. Cost is n oracle passes — audit use only.
    pub fn conditional_mean(&self, obj: &FiniteSumObjective<'_>, x: &[f64]) -> Vec<f64> {
        let mut acc = vec![0.0; self.dim];
        for j in 0..self.n {
            let mut branch = self.clone();
            let v = branch.next_estimate(obj, x, j);
            for q in 0..self.dim {
                acc[q] += v[q];
            }
        }
        let n = self.n as f64;
        for a in acc.iter_mut() {
            *a /= n;
        }
        acc
    }

    /// E‖∇̃_k − ∇f(x)‖² at iterate `x`, enumerated over every sample index
    /// on cloned states. Audit use only.
    pub fn conditional_mse(&self, obj: &FiniteSumObjective<'_>, x: &[f64]) -> f64 {
        let full = obj.full_gradient(x);
        let mut acc = 0.0;
        for j in 0..self.n {
            let mut branch = self.clone();
            let v = branch.next_estimate(obj, x, j);
            acc += crate::linalg::dist_sq(&v, &full);
        }
        acc / self.n as f64
    }
}
