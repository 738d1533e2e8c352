//! Closed-form theory step sizes.
//!
//! Each estimator kind has a guaranteed-convergence step size per regime
//! (convex, strongly convex, non-convex), expressed in terms of the
//! component count n, the smoothness bound L, the strong-convexity
//! constant μ, the bias weight θ, and the epoch length m. Plain SGD has no
//! such formula here and always reports an error.

use crate::estimator::{EstimatorError, EstimatorKind};
use crate::linalg::sqrt;
use core::fmt;

/// Problem regime the step-size guarantee targets.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Regime {
    Convex,
    StronglyConvex,
    NonConvex,
}

/// Failures of [`theory_step_size`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StepSizeError {
    /// The kind has no theory step size (SGD).
    NoTheoryFormula,
    /// Convex and strongly convex B-SAGA/B-SVRG formulas require θ ≥ 1.
    ThetaBelowOne { theta: f64 },
    /// L must be strictly positive.
    BadLipschitz { lipschitz: f64 },
    /// The strongly convex regime requires μ > 0.
    BadStrongConvexity { mu: f64 },
    /// The estimator parameters themselves are invalid.
    BadEstimator(EstimatorError),
}

impl fmt::Display for StepSizeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            StepSizeError::NoTheoryFormula => {
                write!(f, "no theory step size exists for this estimator")
            }
            StepSizeError::ThetaBelowOne { theta } => write!(
                f,
                "convex-regime step sizes require theta >= 1, got {theta}"
            ),
            StepSizeError::BadLipschitz { lipschitz } => {
                write!(f, "smoothness bound must be positive, got {lipschitz}")
            }
            StepSizeError::BadStrongConvexity { mu } => write!(
                f,
                "strongly convex regime requires a positive modulus, got {mu}"
            ),
            StepSizeError::BadEstimator(e) => write!(f, "{e}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for StepSizeError {}

impl From<EstimatorError> for StepSizeError {
    fn from(e: EstimatorError) -> Self {
        StepSizeError::BadEstimator(e)
    }
}

/// Returns the guaranteed step size η for `(kind, regime)` on a problem
/// with `n` components, smoothness bound `lipschitz`, and (for the
/// strongly convex regime) modulus `mu`.
pub fn theory_step_size(
    kind: EstimatorKind,
    regime: Regime,
    n: usize,
    lipschitz: f64,
    mu: f64,
) -> Result<f64, StepSizeError> {
    kind.validate()?;
    if !(lipschitz > 0.0 && lipschitz.is_finite()) {
        return Err(StepSizeError::BadLipschitz { lipschitz });
    }
    if regime == Regime::StronglyConvex && !(mu > 0.0 && mu.is_finite()) {
        return Err(StepSizeError::BadStrongConvexity { mu });
    }
    let l = lipschitz;
    let nf = n as f64;
    match kind {
        EstimatorKind::Sgd => Err(StepSizeError::NoTheoryFormula),
        EstimatorKind::BSaga { theta } => {
            let root = sqrt(nf * (2.0 * nf + 1.0));
            match regime {
                Regime::NonConvex => {
                    if theta <= 2.0 {
                        Ok(theta / (2.0 * l * root))
                    } else {
                        Ok(1.0 / (2.0 * l * (1.0 - 1.0 / theta) * root))
                    }
                }
                Regime::Convex | Regime::StronglyConvex => {
                    let convex = if (1.0..=2.0).contains(&theta) {
                        1.0 / (l * (1.0 + (6.0 / theta) * root))
                    } else if theta > 2.0 {
                        1.0 / (l * (1.0 + 6.0 * (1.0 - 1.0 / theta) * root))
                    } else {
                        return Err(StepSizeError::ThetaBelowOne { theta });
                    };
                    if regime == Regime::StronglyConvex {
                        Ok(convex.min(1.0 / (4.0 * mu * nf)))
                    } else {
                        Ok(convex)
                    }
                }
            }
        }
        EstimatorKind::BSvrg { theta, epoch_len } => {
            let m = epoch_len as f64;
            match regime {
                Regime::NonConvex => {
                    let root = sqrt(3.0 * m * (m + 1.0));
                    if theta <= 2.0 {
                        Ok(sqrt(2.0) * theta / (2.0 * l * root))
                    } else {
                        Ok(sqrt(2.0) * theta / (2.0 * l * (1.0 - 1.0 / theta) * root))
                    }
                }
                Regime::Convex | Regime::StronglyConvex => {
                    let root = sqrt(6.0 * m * (m + 1.0));
                    let convex = if (1.0..=2.0).contains(&theta) {
                        1.0 / (l * (1.0 + (3.0 / theta) * root))
                    } else if theta > 2.0 {
                        1.0 / (l * (1.0 + 3.0 * (1.0 - 1.0 / theta) * root))
                    } else {
                        return Err(StepSizeError::ThetaBelowOne { theta });
                    };
                    if regime == Regime::StronglyConvex {
                        Ok(convex.min(1.0 / (2.0 * mu)))
                    } else {
                        Ok(convex)
                    }
                }
            }
        }
        EstimatorKind::Sarah { epoch_len } => {
            let m = epoch_len as f64;
            match regime {
                Regime::Convex => Ok(1.0 / (l * (4.0 * sqrt(2.0 * m) + 1.0))),
                Regime::StronglyConvex => {
                    let a = 1.0 / (3.0 * l * (4.0 * sqrt(2.0 * m) + 1.0));
                    Ok(a.min(1.0 / (mu * m)))
                }
                Regime::NonConvex => Ok(1.0 / (l * sqrt(2.0 * m))),
            }
        }
        EstimatorKind::Sarge => {
            let root = sqrt(3.0 * (nf + 13.0));
            match regime {
                Regime::Convex => Ok(1.0 / (l * (16.0 * root + 1.0))),
                Regime::StronglyConvex => {
                    let a = 1.0 / (3.0 * l * (16.0 * root + 1.0));
                    Ok(a.min(1.0 / (4.0 * mu * nf)))
                }
                Regime::NonConvex => Ok(1.0 / (4.0 * l * root)),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sarah_convex_small_epoch() {
        let eta = theory_step_size(
            EstimatorKind::Sarah { epoch_len: 2 },
            Regime::Convex,
            5,
            1.0,
            0.0,
        )
        .unwrap();
        assert!((eta - 1.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn bsaga_convex_matches_formula() {
        let eta = theory_step_size(
            EstimatorKind::BSaga { theta: 1.0 },
            Regime::Convex,
            2,
            1.0,
            0.0,
        )
        .unwrap();
        let expected = 1.0 / (1.0 + 6.0 * 10.0f64.sqrt());
        assert!((eta - expected).abs() < 1e-15);
        assert!((eta - 0.0500659).abs() < 1e-7);
    }

    #[test]
    fn sarge_non_convex_small_n() {
        let eta = theory_step_size(EstimatorKind::Sarge, Regime::NonConvex, 3, 1.0, 0.0).unwrap();
        let expected = 1.0 / (4.0 * 48.0f64.sqrt());
        assert!((eta - expected).abs() < 1e-15);
        assert!((eta - 0.0360844).abs() < 1e-7);
    }

    #[test]
    fn bsvrg_branches() {
        // Convex, θ = 1, m = 2: 6m(m+1) = 36 so η = 1/(1 + 3·6).
        let eta = theory_step_size(
            EstimatorKind::BSvrg {
                theta: 1.0,
                epoch_len: 2,
            },
            Regime::Convex,
            4,
            1.0,
            0.0,
        )
        .unwrap();
        assert!((eta - 1.0 / 19.0).abs() < 1e-15);

        // Non-convex, θ = 1, m = 2: √2/(2√18) = 1/6.
        let eta = theory_step_size(
            EstimatorKind::BSvrg {
                theta: 1.0,
                epoch_len: 2,
            },
            Regime::NonConvex,
            4,
            1.0,
            0.0,
        )
        .unwrap();
        assert!((eta - 1.0 / 6.0).abs() < 1e-15);

        // Non-convex, θ = 4 > 2 keeps θ in the numerator: 4√2/((3/2)√18) = 8/9.
        let eta = theory_step_size(
            EstimatorKind::BSvrg {
                theta: 4.0,
                epoch_len: 2,
            },
            Regime::NonConvex,
            4,
            1.0,
            0.0,
        )
        .unwrap();
        assert!((eta - 8.0 / 9.0).abs() < 1e-14);
    }

    #[test]
    fn strongly_convex_caps_apply() {
        // B-SAGA: 1/(4μn) = 1/800 is far below the convex value.
        let eta = theory_step_size(
            EstimatorKind::BSaga { theta: 1.0 },
            Regime::StronglyConvex,
            2,
            1.0,
            100.0,
        )
        .unwrap();
        assert_eq!(eta, 1.0 / 800.0);

        // SARAH: min(1/(3·9), 1/(μm)) with μ = 1, m = 2 → 1/27.
        let eta = theory_step_size(
            EstimatorKind::Sarah { epoch_len: 2 },
            Regime::StronglyConvex,
            5,
            1.0,
            1.0,
        )
        .unwrap();
        assert!((eta - 1.0 / 27.0).abs() < 1e-15);

        // Tiny μ leaves the convex value in charge.
        let convex = theory_step_size(
            EstimatorKind::BSaga { theta: 1.0 },
            Regime::Convex,
            2,
            1.0,
            0.0,
        )
        .unwrap();
        let capped = theory_step_size(
            EstimatorKind::BSaga { theta: 1.0 },
            Regime::StronglyConvex,
            2,
            1.0,
            1e-9,
        )
        .unwrap();
        assert_eq!(convex, capped);
    }

    #[test]
    fn error_cases() {
        assert_eq!(
            theory_step_size(EstimatorKind::Sgd, Regime::Convex, 2, 1.0, 0.0),
            Err(StepSizeError::NoTheoryFormula)
        );
        assert!(matches!(
            theory_step_size(
                EstimatorKind::BSaga { theta: 0.5 },
                Regime::Convex,
                2,
                1.0,
                0.0
            ),
            Err(StepSizeError::ThetaBelowOne { .. })
        ));
        // ... but θ = 0.5 is fine in the non-convex regime.
        assert!(theory_step_size(
            EstimatorKind::BSaga { theta: 0.5 },
            Regime::NonConvex,
            2,
            1.0,
            0.0
        )
        .is_ok());
        assert!(matches!(
            theory_step_size(EstimatorKind::Sarge, Regime::Convex, 2, 0.0, 0.0),
            Err(StepSizeError::BadLipschitz { .. })
        ));
        assert!(matches!(
            theory_step_size(EstimatorKind::Sarge, Regime::StronglyConvex, 2, 1.0, 0.0),
            Err(StepSizeError::BadStrongConvexity { .. })
        ));
        assert!(matches!(
            theory_step_size(
                EstimatorKind::BSaga { theta: -1.0 },
                Regime::NonConvex,
                2,
                1.0,
                0.0
            ),
            Err(StepSizeError::BadEstimator(_))
        ));
    }
}
