//! Variance estimation: the plug-in `ŝ_n²` for the exact-sphericity regime
//! and the jackknife `σ̂_n²` for everything else.

use crate::estimator::{fit, Bandwidths, PolarSample, UStatFit};
use crate::kernels::kernel_moments;
use crate::sum::compensated_sum;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Divisor applied to the sum of squared pseudovalue deviations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum JackknifeNormalization {
    /// `Σ (M̃ᵢ − M̄)² / (n − 1)`: estimates `Var(√n M̂²_n)`, so that
    /// `σ̂_n/√n` is the standard error of `M̂²_n`.
    #[default]
    Full,
    /// `Σ (M̃ᵢ − M̄)² / (4(n − 1))`: estimates `σ²` in
    /// `√n (M̂²_n − M²) → N(0, 4σ²)`.
    Quarter,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarianceEstimates {
    /// Plug-in variance of `M̂²_n` under sphericity.
    pub s_hat_sq: f64,
    /// Jackknife variance, normalized per `normalization`.
    pub sigma_hat_sq: f64,
    /// `M̃²ᵢ = n M̂²_n − (n−1) M̂²_{n−1}(−i)`.
    pub pseudovalues: Vec<f64>,
    /// `M̂²_{n−1}(−i)`.
    pub leave_one_out: Vec<f64>,
    /// `M̄²_n`, the mean of the pseudovalues.
    pub jackknife_mean: f64,
    pub normalization: JackknifeNormalization,
    /// All pseudovalues coincide, so `σ̂² = 0`.
    pub degenerate: bool,
}

impl VarianceEstimates {
    pub fn sigma_hat(&self) -> f64 {
        self.sigma_hat_sq.sqrt()
    }

    /// `σ̂_n / √n`, the scale used by the jackknife interval and tests.
    pub fn jackknife_scale(&self) -> f64 {
        (self.sigma_hat_sq / self.pseudovalues.len() as f64).sqrt()
    }
}

/// `κ^{(p−1)/2} ψ₂(K) / (2^{p−2} π^{(p−1)/2} n(n−1) h)`.
fn plug_in_prefactor(bw: &Bandwidths, n: usize, p: usize) -> f64 {
    let psi2 = kernel_moments(bw.radial_kernel).psi_2;
    let e = 0.5 * (p as f64 - 1.0);
    let n = n as f64;
    psi2 * bw.kappa.powf(e) / (2f64.powi(p as i32 - 2) * PI.powf(e) * n * (n - 1.0) * bw.h)
}

/// `ŝ_n²` from an existing pass; uses `M̂⁽²⁾_n` at `κ` alone.
pub fn plug_in_variance_from_fit(fit: &UStatFit) -> f64 {
    let bw = fit.estimate.bandwidths;
    let v = plug_in_prefactor(&bw, fit.n(), fit.p) * fit.m2_primary;
    v.max(0.0)
}

/// Plug-in estimate of the null variance of `M̂²_n`.
pub fn plug_in_variance(polar: &PolarSample, bw: Bandwidths) -> Result<f64> {
    Ok(plug_in_variance_from_fit(&fit(polar, bw.without_bias_reduction())?))
}

/// Jackknife from the row sums of an existing pass: with `S = Σ_{i<j} H`
/// and `Rᵢ = Σ_{j≠i} H(Yᵢ, Yⱼ)`, `M̂²_{n−1}(−i) = 2(S − Rᵢ)/((n−1)(n−2))`.
pub fn jackknife_from_fit(fit: &UStatFit, normalization: JackknifeNormalization) -> Result<VarianceEstimates> {
    let n = fit.n();
    if n < 3 {
        return Err(Error::Dimension(format!("the jackknife needs at least 3 observations, got {n}")));
    }
    let nf = n as f64;
    let msq = fit.estimate.msq;
    let loo_scale = 2.0 / ((nf - 1.0) * (nf - 2.0));
    let leave_one_out: Vec<f64> = fit.row_sums.iter().map(|r| loo_scale * (fit.pair_sum - r)).collect();
    let pseudovalues: Vec<f64> = leave_one_out.iter().map(|l| nf * msq - (nf - 1.0) * l).collect();
    let mean = compensated_sum(pseudovalues.iter().copied()) / nf;
    let ss = compensated_sum(pseudovalues.iter().map(|x| (x - mean) * (x - mean)));
    let divisor = match normalization {
        JackknifeNormalization::Full => nf - 1.0,
        JackknifeNormalization::Quarter => 4.0 * (nf - 1.0),
    };
    let spread = pseudovalues.iter().fold(0.0f64, |m, x| m.max((x - mean).abs()));
    let degenerate = spread <= 1e-14 * mean.abs().max(f64::MIN_POSITIVE);
    if degenerate {
        log::warn!("{}", Error::Degenerate("all jackknife pseudovalues coincide, sigma_hat = 0".into()));
    }
    Ok(VarianceEstimates {
        s_hat_sq: plug_in_variance_from_fit(fit),
        sigma_hat_sq: if degenerate { 0.0 } else { ss / divisor },
        pseudovalues,
        leave_one_out,
        jackknife_mean: mean,
        normalization,
        degenerate,
    })
}

/// One pass over the pairs, then [`jackknife_from_fit`].
pub fn jackknife(polar: &PolarSample, bw: Bandwidths, normalization: JackknifeNormalization) -> Result<VarianceEstimates> {
    if polar.n() < 3 {
        return Err(Error::Dimension(format!("the jackknife needs at least 3 observations, got {}", polar.n())));
    }
    jackknife_from_fit(&fit(polar, bw)?, normalization)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimator::{estimate_msq, polar_decompose, Sample};
    use approx::assert_relative_eq;

    fn sample(n: usize, seed: u64) -> PolarSample {
        // Deterministic scatter, not random: enough for algebraic identities.
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                let x = (i as f64 + 1.0) * (seed as f64 + 0.618);
                vec![1.0 + 0.4 * (1.7 * x).sin(), 0.6 * (2.3 * x).cos(), 0.5 * (0.9 * x).sin() + 0.2]
            })
            .collect();
        polar_decompose(&Sample::from_rows(&rows).unwrap()).unwrap()
    }

    #[test]
    fn separated_norms_give_zero_plug_in() {
        let rows: Vec<Vec<f64>> = (1..6).map(|i| vec![0.0, i as f64, 0.0]).collect();
        let ps = polar_decompose(&Sample::from_rows(&rows).unwrap()).unwrap();
        assert_eq!(plug_in_variance(&ps, Bandwidths::new(0.5, 10.0).unwrap()).unwrap(), 0.0);
    }

    #[test]
    fn equilateral_triple_is_degenerate() {
        // Same norm, directions 120° apart in a plane: all pairs share one kernel value.
        let s = 3f64.sqrt() / 2.0;
        let rows = vec![vec![1.0, 0.0, 0.0], vec![-0.5, s, 0.0], vec![-0.5, -s, 0.0]];
        let ps = polar_decompose(&Sample::from_rows(&rows).unwrap()).unwrap();
        let v = jackknife(&ps, Bandwidths::new(1.0, 2.0).unwrap(), JackknifeNormalization::Full).unwrap();
        assert!(v.degenerate);
        assert_eq!(v.sigma_hat_sq, 0.0);
        assert!(v.pseudovalues.windows(2).all(|w| (w[0] - w[1]).abs() < 1e-14));
    }

    #[test]
    fn row_sum_leave_one_out_matches_recomputation() {
        let ps = sample(50, 3);
        let bw = Bandwidths::new(0.5, 15.0).unwrap();
        let v = jackknife(&ps, bw, JackknifeNormalization::Full).unwrap();
        for i in 0..ps.n() {
            let keep: Vec<usize> = (0..ps.n()).filter(|&j| j != i).collect();
            let brute = estimate_msq(&ps.select(&keep), bw).unwrap().msq;
            assert!((v.leave_one_out[i] - brute).abs() < 1e-9, "i={i}");
        }
    }

    #[test]
    fn pseudovalue_mean_identity() {
        let ps = sample(40, 7);
        let bw = Bandwidths::new(0.6, 20.0).unwrap();
        let v = jackknife(&ps, bw, JackknifeNormalization::Full).unwrap();
        let n = ps.n() as f64;
        let msq = estimate_msq(&ps, bw).unwrap().msq;
        let want = n * msq - (n - 1.0) / n * v.leave_one_out.iter().sum::<f64>();
        assert!((v.jackknife_mean - want).abs() < 1e-10);
    }

    #[test]
    fn normalizations_differ_by_four() {
        let ps = sample(30, 1);
        let bw = Bandwidths::new(0.6, 20.0).unwrap();
        let full = jackknife(&ps, bw, JackknifeNormalization::Full).unwrap();
        let quarter = jackknife(&ps, bw, JackknifeNormalization::Quarter).unwrap();
        assert_relative_eq!(full.sigma_hat_sq, 4.0 * quarter.sigma_hat_sq, max_relative = 1e-14);
    }

    #[test]
    fn plug_in_prefactor_scales_with_n() {
        let bw = Bandwidths::new(0.6, 20.0).unwrap();
        let a = plug_in_prefactor(&bw, 100, 3);
        let b = plug_in_prefactor(&bw, 200, 3);
        assert_relative_eq!(b / a, (100.0 * 99.0) / (200.0 * 199.0), max_relative = 1e-14);
    }

    #[test]
    fn too_small_for_jackknife() {
        let ps = sample(2, 1);
        assert!(matches!(
            jackknife(&ps, Bandwidths::new(0.6, 20.0).unwrap(), JackknifeNormalization::Full),
            Err(Error::Dimension(_))
        ));
    }
}
