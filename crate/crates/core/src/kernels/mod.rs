//! Kernel evaluation and the normalizing integrals of the Langevin kernel.
//!
//! `c_j(κ) = ω_{p−2} ∫_0^π L^j(κ cos θ) sin^{p−2}θ dθ` and
//! `b_j(κ) = ω_{p−2} ∫_0^π L(κ cos θ) sin^{p−2}θ θ^j dθ`
//! are computed by adaptive Gauss–Legendre quadrature in θ. The integrand
//! is evaluated relative to its value at θ = 0, so the exponentials never
//! overflow; panels are graded geometrically away from θ = 0, where the
//! integrand has width O(κ^{−1/2}).

pub mod bessel;
pub mod langevin;
pub mod quadrature;
pub mod radial;

pub use bessel::log_bessel_i;
pub use langevin::{eval_langevin_log, Langevin, SphericalKernelParams};
pub use radial::{eval_radial, kernel_moments, BaseKernel, KernelMoments, RadialKernel};

use crate::{Error, Result};
use quadrature::integrate_panels;
use statrs::function::gamma::ln_gamma;
use std::f64::consts::PI;

const QUAD_REL_TOL: f64 = 1e-12;

/// Surface area `ω_{p−1} = 2π^{p/2}/Γ(p/2)` of the unit sphere in `R^p`.
pub fn surface_area(p: usize) -> f64 {
    log_surface_area(p).exp()
}

pub fn log_surface_area(p: usize) -> f64 {
    assert!(p >= 1, "surface_area needs p >= 1");
    let half = 0.5 * p as f64;
    std::f64::consts::LN_2 + half * PI.ln() - ln_gamma(half)
}

/// Panel edges on `[0, π]`: `0, w, 2w, 4w, ...` with `w = (scale)^{-1/2}`.
fn graded_edges(scale: f64) -> Vec<f64> {
    let w = scale.max(1e-300).sqrt().recip();
    let mut edges = vec![0.0];
    let mut x = w;
    while x < PI {
        edges.push(x);
        x *= 2.0;
    }
    edges.push(PI);
    edges
}

/// `∫_0^π exp(−2 jκ sin²(θ/2)) sin^{p−2}θ θ^m dθ`.
fn shifted_integral(j: u32, m: u32, params: SphericalKernelParams) -> f64 {
    let jk = j as f64 * params.kappa;
    let sin_pow = params.p as i32 - 2;
    let f = move |theta: f64| {
        let s = (0.5 * theta).sin();
        (-2.0 * jk * s * s).exp() * theta.sin().powi(sin_pow) * theta.powi(m as i32)
    };
    integrate_panels(&f, &graded_edges(jk), QUAD_REL_TOL, 0.0)
}

/// `log c_j(κ)`.
pub fn log_c_j_integral(j: u32, params: SphericalKernelParams) -> Result<f64> {
    if j < 1 {
        return Err(Error::Config("c_j needs j >= 1".into()));
    }
    let l = Langevin::new(params)?;
    Ok(log_surface_area(params.p - 1) + j as f64 * l.log_peak() + shifted_integral(j, 0, params).ln())
}

/// `c_j(κ)`; `c_1(κ) = 1` since `L` is a density on the sphere.
pub fn c_j_integral(j: u32, params: SphericalKernelParams) -> Result<f64> {
    log_c_j_integral(j, params).map(f64::exp)
}

/// `b_j(κ)`, the `j`-th angular moment of the Langevin density.
pub fn b_j_integral(j: u32, params: SphericalKernelParams) -> Result<f64> {
    if j < 1 {
        return Err(Error::Config("b_j needs j >= 1".into()));
    }
    let l = Langevin::new(params)?;
    let log = log_surface_area(params.p - 1) + l.log_peak() + shifted_integral(1, j, params).ln();
    Ok(log.exp())
}

/// Leading constant of `b_j(κ) ~ a_j(p) κ^{−j/2}`.
pub fn b_j_rate_constant(j: u32, p: usize) -> f64 {
    let jf = j as f64;
    let pf = p as f64;
    (0.5 * jf * std::f64::consts::LN_2 + ln_gamma(0.5 * (pf + jf - 1.0)) - ln_gamma(0.5 * (pf - 1.0))).exp()
}

/// Leading constant of `c_j(κ) ~ d_j(p) κ^{(j−1)(p−1)/2}`.
pub fn c_j_rate_constant(j: u32, p: usize) -> f64 {
    let jf = j as f64;
    let e = 0.5 * (pf(p) - 1.0);
    (2.0 * PI).powf((1.0 - jf) * e) * jf.powf(-e)
}

fn pf(p: usize) -> f64 {
    p as f64
}
