//! Compactly supported radial kernels on `(−1, 1)`.

use super::quadrature::panel_rule;
use serde::{Deserialize, Serialize};
use std::f64::consts::SQRT_2;

/// Symmetric probability density supported on `(−1, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BaseKernel {
    /// `0.75 (1 − u²)`.
    Epanechnikov,
}

impl BaseKernel {
    #[inline]
    pub fn eval(self, u: f64) -> f64 {
        match self {
            BaseKernel::Epanechnikov => {
                if u.abs() < 1.0 {
                    0.75 * (1.0 - u * u)
                } else {
                    0.0
                }
            }
        }
    }
}

/// Radial kernel used for the norm component.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RadialKernel {
    Plain(BaseKernel),
    /// `K̃(u) = 2√2 K(√2 u) − K(u)`; removes the second moment of `K`.
    JackknifeCorrected(BaseKernel),
}

impl Default for RadialKernel {
    fn default() -> Self {
        RadialKernel::Plain(BaseKernel::Epanechnikov)
    }
}

impl RadialKernel {
    pub const EPANECHNIKOV: RadialKernel = RadialKernel::Plain(BaseKernel::Epanechnikov);
    pub const CORRECTED_EPANECHNIKOV: RadialKernel = RadialKernel::JackknifeCorrected(BaseKernel::Epanechnikov);

    pub fn base(self) -> BaseKernel {
        match self {
            RadialKernel::Plain(b) | RadialKernel::JackknifeCorrected(b) => b,
        }
    }

    #[inline]
    pub fn eval(self, u: f64) -> f64 {
        eval_radial(self, u)
    }

    /// Points where the kernel is not smooth, in ascending order, including ±1.
    fn breakpoints(self) -> Vec<f64> {
        match self {
            RadialKernel::Plain(_) => vec![-1.0, 1.0],
            RadialKernel::JackknifeCorrected(_) => vec![-1.0, -1.0 / SQRT_2, 1.0 / SQRT_2, 1.0],
        }
    }
}

/// Kernel value at `u`; zero outside `(−1, 1)`.
#[inline]
pub fn eval_radial(kernel: RadialKernel, u: f64) -> f64 {
    match kernel {
        RadialKernel::Plain(b) => b.eval(u),
        RadialKernel::JackknifeCorrected(b) => {
            if u.abs() < 1.0 {
                2.0 * SQRT_2 * b.eval(SQRT_2 * u) - b.eval(u)
            } else {
                0.0
            }
        }
    }
}

/// `ψ_j(K) = ∫K^j` and `φ_2(K) = ∫u²K(u)du`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelMoments {
    pub psi_2: f64,
    pub psi_4: f64,
    pub phi_2: f64,
}

/// Moments in closed form for the Epanechnikov kernel, otherwise by
/// Gauss–Legendre quadrature between the kernel's breakpoints (exact for the
/// piecewise polynomial kernels offered here).
pub fn kernel_moments(kernel: RadialKernel) -> KernelMoments {
    match kernel {
        RadialKernel::Plain(BaseKernel::Epanechnikov) => KernelMoments {
            psi_2: 3.0 / 5.0,
            psi_4: 9.0 / 35.0,
            phi_2: 1.0 / 5.0,
        },
        _ => KernelMoments {
            psi_2: integrate_kernel(kernel, |k, _| k * k),
            psi_4: integrate_kernel(kernel, |k, _| k.powi(4)),
            phi_2: integrate_kernel(kernel, |k, u| u * u * k),
        },
    }
}

/// `∫_{−1}^{1} g(K(u), u) du`, panel by panel.
pub(crate) fn integrate_kernel<G: Fn(f64, f64) -> f64>(kernel: RadialKernel, g: G) -> f64 {
    let rule = panel_rule();
    kernel
        .breakpoints()
        .windows(2)
        .map(|w| rule.integrate(w[0], w[1], |u| g(kernel.eval(u), u)))
        .sum()
}
