//! Modified Bessel function of the first kind on the log scale.
//!
//! `I_ν(κ)` grows like `e^κ/√(2πκ)`, so only `log I_ν(κ)` is exposed. Small
//! arguments use the ascending series, large ones the Hankel asymptotic
//! expansion; the two agree to ~1e-12 relative on the overlap near κ = 50.

use crate::{Error, Result};
use statrs::function::gamma::ln_gamma;
use std::f64::consts::PI;

/// Argument above which the asymptotic expansion is used.
pub const SERIES_CUTOFF: f64 = 50.0;

/// `log I_ν(κ)` for `ν ≥ 0`, `κ > 0`.
pub fn log_bessel_i(nu: f64, kappa: f64) -> Result<f64> {
    if !(kappa > 0.0) || !kappa.is_finite() {
        return Err(Error::Domain(format!("log_bessel_i needs kappa > 0, got {kappa}")));
    }
    if !(nu >= 0.0) || !nu.is_finite() {
        return Err(Error::Domain(format!("log_bessel_i needs nu >= 0, got {nu}")));
    }
    // The Hankel expansion needs κ large relative to ν²; otherwise the
    // log-scaled series is used at any κ.
    if kappa > SERIES_CUTOFF && nu * nu < 0.25 * kappa {
        Ok(log_bessel_i_asymptotic(nu, kappa))
    } else {
        Ok(log_bessel_i_series(nu, kappa))
    }
}

/// Ascending series `Σ_k (κ/2)^{2k+ν} / (k! Γ(k+ν+1))`, summed with the
/// largest term factored out.
pub(crate) fn log_bessel_i_series(nu: f64, kappa: f64) -> f64 {
    let q = 0.25 * kappa * kappa;
    let log_q = q.ln();
    // log of term k relative to term 0.
    let log_term = |k: f64| k * log_q - ln_gamma(k + 1.0) - (ln_gamma(k + nu + 1.0) - ln_gamma(nu + 1.0));
    // Terms increase while q / (k (k + ν)) > 1.
    let k_peak = (0.5 * (-nu + (nu * nu + 4.0 * q).sqrt())).floor().max(0.0);
    let peak = log_term(k_peak);

    let mut sum = 0.0;
    // Walk upward from the peak.
    let mut t = 1.0;
    let mut k = k_peak;
    loop {
        sum += t;
        k += 1.0;
        t *= q / (k * (k + nu));
        if t < 1e-18 * sum {
            break;
        }
    }
    // And downward.
    let mut t = 1.0;
    let mut k = k_peak;
    while k >= 1.0 {
        t *= k * (k + nu) / q;
        k -= 1.0;
        sum += t;
        if t < 1e-18 * sum {
            break;
        }
    }
    nu * (0.5 * kappa).ln() - ln_gamma(nu + 1.0) + peak + sum.ln()
}

/// `I_ν(κ) ~ e^κ/√(2πκ) Σ_k (−1)^k a_k(ν) κ^{−k}`, truncated at the smallest term.
pub(crate) fn log_bessel_i_asymptotic(nu: f64, kappa: f64) -> f64 {
    let mu = 4.0 * nu * nu;
    let mut sum = 1.0;
    let mut term: f64 = 1.0;
    for k in 1..200 {
        let kf = k as f64;
        let odd = 2.0 * kf - 1.0;
        let next = -term * (mu - odd * odd) / (8.0 * kf * kappa);
        if next.abs() >= term.abs() {
            break;
        }
        term = next;
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    kappa - 0.5 * (2.0 * PI * kappa).ln() + sum.ln()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn log_i_half(kappa: f64) -> f64 {
        // I_{1/2}(κ) = √(2/(πκ)) sinh κ, written stably in log space.
        kappa - 0.5 * (2.0 * PI * kappa).ln() + (-(-2.0 * kappa).exp()).ln_1p()
    }

    #[test]
    fn half_order_closed_form_small_argument() {
        let want = ((2.0 / PI).sqrt() * 1f64.sinh()).ln();
        assert_relative_eq!(log_bessel_i(0.5, 1.0).unwrap(), want, max_relative = 1e-13);
        assert_relative_eq!((2.0 / PI).sqrt() * 1f64.sinh(), 0.93767, epsilon = 1e-5);
    }

    #[test]
    fn half_order_closed_form_large_argument() {
        for kappa in [60.0, 100.0, 750.0, 5000.0] {
            assert_relative_eq!(log_bessel_i(0.5, kappa).unwrap(), log_i_half(kappa), max_relative = 1e-14);
        }
    }

    #[test]
    fn leading_series_term_near_zero() {
        let kappa: f64 = 1e-6;
        let want = 1.5 * (kappa / 2.0).ln() - ln_gamma(2.5);
        assert_relative_eq!(log_bessel_i(1.5, kappa).unwrap(), want, max_relative = 1e-12);
    }

    #[test]
    fn routes_agree_on_the_overlap() {
        for nu in [0.0, 0.5, 1.0, 1.5, 2.0, 2.5] {
            for kappa in [50.0, 55.0, 70.0, 100.0] {
                let s = log_bessel_i_series(nu, kappa);
                let a = log_bessel_i_asymptotic(nu, kappa);
                // Relative accuracy of I itself: |Δlog I| ≈ |ΔI|/I.
                assert!((s - a).abs() < 1e-10, "nu={nu} kappa={kappa}: {s} vs {a}");
            }
        }
    }

    #[test]
    fn order_zero_reference_values() {
        // I_0(1) = 1.2660658777520082, I_1(1) = 0.5651591039924851.
        assert_relative_eq!(log_bessel_i(0.0, 1.0).unwrap(), 1.2660658777520082f64.ln(), max_relative = 1e-14);
        assert_relative_eq!(log_bessel_i(1.0, 1.0).unwrap(), 0.5651591039924851f64.ln(), max_relative = 1e-13);
        // I_2(10) = 2281.518967726004.
        assert_relative_eq!(log_bessel_i(2.0, 10.0).unwrap(), 2281.518967726004f64.ln(), max_relative = 1e-13);
    }

    #[test]
    fn recurrence_holds_across_the_switch() {
        // I_{ν−1}(κ) − I_{ν+1}(κ) = (2ν/κ) I_ν(κ)
        for kappa in [10.0, 49.0, 51.0, 300.0] {
            let nu = 1.0;
            let lm = log_bessel_i(nu - 1.0, kappa).unwrap();
            let lp = log_bessel_i(nu + 1.0, kappa).unwrap();
            let l = log_bessel_i(nu, kappa).unwrap();
            let lhs = (lm - l).exp() - (lp - l).exp();
            assert_relative_eq!(lhs, 2.0 * nu / kappa, max_relative = 1e-10);
        }
    }

    #[test]
    fn rejects_nonpositive_argument() {
        assert!(matches!(log_bessel_i(0.5, 0.0), Err(Error::Domain(_))));
        assert!(matches!(log_bessel_i(0.5, -1.0), Err(Error::Domain(_))));
    }
}
