//! Regularizers g and their proximal maps prox_{ηg}(y) =
//! argmin_x ηg(x) + ½‖x−y‖².
//!
//! Four choices cover the benchmark problems: none, scaled squared L2
//! (ridge), scaled L1 (LASSO), and the indicator of
//! C = {x : ‖x‖ ≤ 1, x ≥ 0} (non-negative PCA).

use crate::linalg;
use alloc::vec::Vec;

/// Feasibility slack for the ball-indicator value; projected iterates can
/// sit on the boundary up to floating-point drift and must not read as
/// infeasible.
pub const FEASIBILITY_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Regularizer {
    Zero,
    /// (β/2)‖x‖²
    SquaredL2 {
        beta: f64,
    },
    /// β‖x‖₁
    L1 {
        beta: f64,
    },
    /// Indicator of the intersection of the unit ball and the
    /// non-negative orthant.
    NonnegativeBall,
}

impl Regularizer {
    /// g(x); +infinity outside the feasible set for the ball indicator.
    pub fn value(&self, x: &[f64]) -> f64 {
        match *self {
            Regularizer::Zero => 0.0,
            Regularizer::SquaredL2 { beta } => 0.5 * beta * linalg::norm_sq(x),
            Regularizer::L1 { beta } => beta * x.iter().map(|v| v.abs()).sum::<f64>(),
            Regularizer::NonnegativeBall => {
                let feasible = linalg::norm(x) <= 1.0 + FEASIBILITY_TOL
                    && x.iter().all(|&v| v >= -FEASIBILITY_TOL);
                if feasible {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
        }
    }

    /// Writes prox_{ηg}(y) into `out`.
    pub fn prox_into(&self, y: &[f64], eta: f64, out: &mut [f64]) {
        debug_assert!(eta > 0.0);
        debug_assert_eq!(y.len(), out.len());
        match *self {
            Regularizer::Zero => out.copy_from_slice(y),
            Regularizer::SquaredL2 { beta } => {
                let scale = 1.0 / (1.0 + eta * beta);
                for (o, &v) in out.iter_mut().zip(y) {
                    *o = v * scale;
                }
            }
            Regularizer::L1 { beta } => {
                let t = eta * beta;
                for (o, &v) in out.iter_mut().zip(y) {
                    *o = v.signum() * (v.abs() - t).max(0.0);
                }
            }
            // Exact Euclidean projection onto C: clip to the orthant, then
            // scale radially. Clipping never increases the norm, so the
            // order is correct.
            Regularizer::NonnegativeBall => {
                for (o, &v) in out.iter_mut().zip(y) {
                    *o = v.max(0.0);
                }
                let norm = linalg::norm(out);
                if norm > 1.0 {
                    for o in out.iter_mut() {
                        *o /= norm;
                    }
                }
            }
        }
    }

    pub fn prox(&self, y: &[f64], eta: f64) -> Vec<f64> {
        let mut out = alloc::vec![0.0; y.len()];
        self.prox_into(y, eta, &mut out);
        out
    }

    /// Strong-convexity constant μ of g: β for squared L2, zero otherwise.
    pub fn strong_convexity(&self) -> f64 {
        match *self {
            Regularizer::SquaredL2 { beta } => beta,
            _ => 0.0,
        }
    }
}
