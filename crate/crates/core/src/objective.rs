//! Smooth finite-sum part f(x) = (1/n) Σ f_i(x) of the composite objective.
//!
//! Two component families cover every benchmark problem here:
//! least squares f_i(x) = (h_i·x - l_i)^2 for ridge and LASSO, and the
//! negative square f_i(x) = -(h_i·x)^2 for non-negative PCA. Both have
//! rank-one Hessians ±2 h_i h_iᵀ, so 2 max_i ‖h_i‖² bounds every component's
//! gradient Lipschitz constant exactly.

use crate::dataset::LabeledDataset;
use alloc::vec::Vec;
use core::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ObjectiveKind {
    LeastSquares,
    NegSquare,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ObjectiveError {
    /// Every feature value is zero, so L = 0 and the step-size formulas
    /// would divide by zero.
    AllZeroData,
}

impl fmt::Display for ObjectiveError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ObjectiveError::AllZeroData => {
                write!(
                    f,
                    "all feature values are zero (Lipschitz bound would be 0)"
                )
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for ObjectiveError {}

/// Component-gradient oracle over a borrowed dataset. Stateless beyond the
/// immutable data reference; safe to share across concurrent runs.
#[derive(Clone, Copy, Debug)]
pub struct FiniteSumObjective<'a> {
    kind: ObjectiveKind,
    data: &'a LabeledDataset,
    lipschitz: f64,
}

impl<'a> FiniteSumObjective<'a> {
    pub fn new(kind: ObjectiveKind, data: &'a LabeledDataset) -> Result<Self, ObjectiveError> {
        let mut l = 0.0_f64;
        for row in data.rows() {
            l = l.max(2.0 * row.norm_sq());
        }
        if l <= 0.0 {
            return Err(ObjectiveError::AllZeroData);
        }
        Ok(FiniteSumObjective {
            kind,
            data,
            lipschitz: l,
        })
    }

    pub fn kind(&self) -> ObjectiveKind {
        self.kind
    }

    /// Number of components n.
    pub fn n(&self) -> usize {
        self.data.n_samples()
    }

    /// Ambient dimension p.
    pub fn dim(&self) -> usize {
        self.data.n_features()
    }

    /// Exact bound L = max_i 2‖h_i‖² on every component's gradient
    /// Lipschitz constant (max, not average: the analysis assumes it
    /// per component).
    pub fn lipschitz_bound(&self) -> f64 {
        self.lipschitz
    }

    pub fn component_value(&self, i: usize, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dim());
        let t = self.data.row(i).dot(x);
        match self.kind {
            ObjectiveKind::LeastSquares => {
                let r = t - self.data.label(i);
                r * r
            }
            ObjectiveKind::NegSquare => -(t * t),
        }
    }

    /// f(x) = (1/n) Σ f_i(x).
    pub fn value(&self, x: &[f64]) -> f64 {
        let n = self.n();
        let mut s = 0.0;
        for i in 0..n {
            s += self.component_value(i, x);
        }
        s / n as f64
    }

    /// Writes ∇f_i(x) into `out` (dense, zeroed first).
    pub fn component_gradient_into(&self, i: usize, x: &[f64], out: &mut [f64]) {
        assert!(i < self.n(), "component index {i} out of range");
        assert_eq!(x.len(), self.dim(), "dimension mismatch");
        out.fill(0.0);
        let row = self.data.row(i);
        let t = row.dot(x);
        let scale = match self.kind {
            ObjectiveKind::LeastSquares => 2.0 * (t - self.data.label(i)),
            ObjectiveKind::NegSquare => -2.0 * t,
        };
        row.add_scaled_into(scale, out);
    }

    pub fn component_gradient(&self, i: usize, x: &[f64]) -> Vec<f64> {
        let mut out = alloc::vec![0.0; self.dim()];
        self.component_gradient_into(i, x, &mut out);
        out
    }

    /// Writes ∇f(x) = (1/n) Σ ∇f_i(x) into `out` in one pass over the rows.
    pub fn full_gradient_into(&self, x: &[f64], out: &mut [f64]) {
        assert_eq!(x.len(), self.dim(), "dimension mismatch");
        out.fill(0.0);
        let n = self.n() as f64;
        for i in 0..self.n() {
            let row = self.data.row(i);
            let t = row.dot(x);
            let scale = match self.kind {
                ObjectiveKind::LeastSquares => 2.0 * (t - self.data.label(i)),
                ObjectiveKind::NegSquare => -2.0 * t,
            };
            row.add_scaled_into(scale / n, out);
        }
    }

    pub fn full_gradient(&self, x: &[f64]) -> Vec<f64> {
        let mut out = alloc::vec![0.0; self.dim()];
        self.full_gradient_into(x, &mut out);
        out
    }
}
