//! Proximal stochastic gradient methods for composite finite-sum problems
//!
//! ```text
//! minimize  F(x) = (1/n) Σ f_i(x) + g(x)
//! ```
//!
//! with interchangeable gradient estimators (plain SGD, B-SAGA, B-SVRG,
//! SARAH, SARGE), closed-form theory step sizes, and an audit layer that
//! verifies the estimators' bias and mean-squared-error structure exactly
//! by enumerating the sampling randomness at small scale.
//!
//! The crate is `no_std`-compatible (`--no-default-features --features libm`);
//! it needs only `alloc`. File formats, CSV output and the command line live
//! in the companion `provar-cli` crate.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

#[cfg(not(any(feature = "std", feature = "libm")))]
compile_error!("provar-core needs float math: enable the `std` (default) or `libm` feature");

pub mod audit;
pub mod dataset;
pub mod estimator;
pub mod linalg;
pub mod objective;
pub mod regularizer;
pub mod rng;
pub mod solver;
pub mod stepsize;
