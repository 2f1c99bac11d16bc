//! The von Mises–Fisher (Langevin) kernel on `S^{p−1}`.
//!
//! `L(κt) = κ^{p/2−1} {(2π)^{p/2} I_{p/2−1}(κ)}^{−1} e^{κt}` is kept in log
//! form; `e^κ` alone overflows past κ ≈ 710.

use super::bessel::log_bessel_i;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Slack allowed on `|t| ≤ 1` before an inner product is rejected.
pub const INNER_PRODUCT_SLACK: f64 = 1e-9;

/// Concentration and ambient dimension of the spherical kernel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SphericalKernelParams {
    pub kappa: f64,
    pub p: usize,
}

impl SphericalKernelParams {
    pub fn new(kappa: f64, p: usize) -> Result<Self> {
        if !(kappa > 0.0) || !kappa.is_finite() {
            return Err(Error::Config(format!("kappa must be positive and finite, got {kappa}")));
        }
        if p < 2 {
            return Err(Error::Config(format!("dimension p must be at least 2, got {p}")));
        }
        Ok(Self { kappa, p })
    }

    /// Bessel order `p/2 − 1`.
    pub fn order(&self) -> f64 {
        0.5 * self.p as f64 - 1.0
    }
}

/// Precomputed Langevin kernel for a fixed `(κ, p)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Langevin {
    params: SphericalKernelParams,
    /// `log L(κ)`, the value at `t = 1`.
    log_peak: f64,
}

impl Langevin {
    pub fn new(params: SphericalKernelParams) -> Result<Self> {
        let SphericalKernelParams { kappa, p } = params;
        let nu = params.order();
        let log_norm = nu * kappa.ln() - 0.5 * p as f64 * (2.0 * PI).ln() - log_bessel_i(nu, kappa)?;
        Ok(Self { params, log_peak: log_norm + kappa })
    }

    pub fn params(&self) -> SphericalKernelParams {
        self.params
    }

    pub fn kappa(&self) -> f64 {
        self.params.kappa
    }

    /// `log L(κ)`.
    pub fn log_peak(&self) -> f64 {
        self.log_peak
    }

    /// `log L(κt)` for `t` already clamped to `[−1, 1]`.
    #[inline]
    pub fn log_eval(&self, t: f64) -> f64 {
        self.log_peak + self.params.kappa * (t - 1.0)
    }

    /// `L(κt)` for `t ∈ [−1, 1]`, via `L(κ) e^{κ(t−1)}`.
    #[inline]
    pub fn eval(&self, t: f64) -> f64 {
        self.log_eval(t).exp()
    }
}

/// `log L(κt)`; `t` may exceed `[−1, 1]` by at most [`INNER_PRODUCT_SLACK`].
pub fn eval_langevin_log(params: SphericalKernelParams, t: f64) -> Result<f64> {
    let t = clamp_inner_product(t)?;
    Ok(Langevin::new(params)?.log_eval(t))
}

pub(crate) fn clamp_inner_product(t: f64) -> Result<f64> {
    if !(t.abs() <= 1.0 + INNER_PRODUCT_SLACK) {
        return Err(Error::Domain(format!("inner product {t} lies outside [-1, 1]")));
    }
    Ok(t.clamp(-1.0, 1.0))
}
