//! Estimation of and inference on the minimum L² distance between the
//! law of `(‖Y‖, Y/‖Y‖)` and its best spherically symmetric approximation.
//!
//! The measure is
//!
//! ```text
//! M² = ∫∫ f²(u, v) du ω(dv) − ω_{p−1}⁻¹ ∫ f_U²(u) du,
//! ```
//!
//! where `f` is the joint density of norm and direction and `f_U` the
//! density of the norm. It is estimated by an order-2 U-statistic that
//! combines a radial kernel with a von Mises–Fisher (Langevin) kernel on
//! the sphere.
//!
//! Module map:
//!
//! - [`kernels`]: radial kernels, log-scale Bessel functions, the Langevin
//!   kernel and quadrature of its normalizing integrals.
//! - [`estimator`]: polar decomposition, the pair kernel and the point
//!   estimate with its full sequential path.
//! - [`variance`]: plug-in variance under sphericity and the jackknife.
//! - [`inference`]: confidence intervals, relevant / equivalence / exact
//!   tests, the self-normalizer and quantiles of its pivotal limit.
//! - [`bandwidth`]: the `(h, κ)` grid and volatility-based selection.
//! - [`simulate`]: data generators, an independent oracle for `M²` and the
//!   Monte Carlo experiment harness.

// `!(x > 0.0)` is how NaN inputs get rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bandwidth;
pub mod error;
pub mod estimator;
pub mod inference;
pub mod kernels;
pub mod simulate;
pub mod variance;

mod parallel;
mod sum;

pub use error::{Error, Result};
