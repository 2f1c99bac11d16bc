//! Confidence intervals, hypothesis tests and the self-normalizer.
//!
//! Two scales are supported throughout: the jackknife standard error
//! `σ̂_n/√n` with standard-normal quantiles, and the self-normalizer `V̂_n`
//! with quantiles of the pivotal limit `W`.

mod wtable;

pub use wtable::{
    default_levels, empirical_quantile, simulate_w, WQuantileTable, BLOCK_PATHS, GENERATOR, LEVEL_MATCH_TOL,
    TABLE_VERSION,
};

use crate::estimator::MsqEstimate;
use crate::sum::compensated_sum;
use crate::variance::VarianceEstimates;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

/// Standard-normal quantile `u_level`.
pub fn normal_quantile(level: f64) -> Result<f64> {
    check_alpha(level)?;
    let std = Normal::new(0.0, 1.0).map_err(|e| Error::Config(e.to_string()))?;
    Ok(std.inverse_cdf(level))
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::Config(format!("probability {alpha} is outside (0, 1)")))
    }
}

fn check_delta(delta: f64) -> Result<()> {
    if delta >= 0.0 && delta.is_finite() {
        Ok(())
    } else {
        Err(Error::Config(format!("threshold delta must be finite and >= 0, got {delta}")))
    }
}

/// `V̂_n = Σ_{k=2}^{n} |M̂²_k − M̂²_n| (k/n)(1/n)` for a path whose entry
/// `k − 2` is `M̂²_k`.
pub fn vhat(path: &[f64]) -> f64 {
    let Some(&last) = path.last() else {
        return 0.0;
    };
    let n = (path.len() + 1) as f64;
    let s = compensated_sum(path.iter().enumerate().map(|(i, m)| (m - last).abs() * (i + 2) as f64));
    s / (n * n)
}

pub fn vhat_of(est: &MsqEstimate) -> f64 {
    vhat(&est.sequential)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    Jackknife,
    Pivotal,
    Exact,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Hypothesis {
    /// `H₀: M² ≤ Δ` against `M² > Δ`.
    RelevantGreater,
    /// `H₀: M² > Δ` against `M² ≤ Δ`.
    Equivalence,
    /// `H₀: M² = 0`.
    ExactSphericity,
}

/// Where critical values come from.
#[derive(Debug, Clone, Copy)]
pub enum QuantileSource<'a> {
    Normal,
    W(&'a WQuantileTable),
}

impl QuantileSource<'_> {
    pub fn quantile(&self, level: f64) -> Result<f64> {
        match self {
            QuantileSource::Normal => normal_quantile(level),
            QuantileSource::W(t) => {
                check_alpha(level)?;
                t.quantile(level)
            }
        }
    }

    pub fn method(&self) -> Method {
        match self {
            QuantileSource::Normal => Method::Jackknife,
            QuantileSource::W(_) => Method::Pivotal,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceInterval {
    pub lower: f64,
    pub upper: f64,
    pub level: f64,
    pub method: Method,
}

impl ConfidenceInterval {
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lower <= x && x <= self.upper
    }
}

fn symmetric_interval(center: f64, half: f64, alpha: f64, method: Method) -> ConfidenceInterval {
    ConfidenceInterval { lower: center - half, upper: center + half, level: 1.0 - alpha, method }
}

/// `M̂²_n ± u_{1−α/2} σ̂_n/√n`.
pub fn jackknife_ci(msq: f64, var: &VarianceEstimates, alpha: f64) -> Result<ConfidenceInterval> {
    jackknife_ci_from_scale(msq, var.jackknife_scale(), alpha)
}

/// `M̂²_n ± u_{1−α/2}·scale`.
pub fn jackknife_ci_from_scale(msq: f64, scale: f64, alpha: f64) -> Result<ConfidenceInterval> {
    let u = normal_quantile(1.0 - alpha / 2.0)?;
    Ok(symmetric_interval(msq, u * scale, alpha, Method::Jackknife))
}

/// `M̂²_n ± q_{1−α/2} V̂_n`.
pub fn pivotal_ci(msq: f64, vhat: f64, table: &WQuantileTable, alpha: f64) -> Result<ConfidenceInterval> {
    check_alpha(alpha)?;
    let q = table.quantile(1.0 - alpha / 2.0)?;
    Ok(symmetric_interval(msq, q * vhat, alpha, Method::Pivotal))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub statistic: f64,
    pub delta: f64,
    pub alpha: f64,
    pub reject: bool,
    /// The value the statistic is compared with.
    pub critical_boundary: f64,
    pub method: Method,
    pub hypothesis: Hypothesis,
}

/// Rejects when `M̂²_n > Δ + q_{1−α}·scale`. Ties retain.
pub fn test_relevant(msq: f64, scale: f64, source: QuantileSource<'_>, delta: f64, alpha: f64) -> Result<TestResult> {
    check_delta(delta)?;
    let q = source.quantile(1.0 - alpha)?;
    Ok(TestResult {
        statistic: msq,
        delta,
        alpha,
        reject: msq - q * scale > delta,
        critical_boundary: delta + q * scale,
        method: source.method(),
        hypothesis: Hypothesis::RelevantGreater,
    })
}

/// Rejects, deciding for approximate sphericity, when
/// `M̂²_n ≤ Δ + q_α·scale`. Ties reject.
///
/// The comparison is evaluated as `M̂²_n − q_α·scale ≤ Δ`, the same
/// expression [`adaptive_threshold`] returns, so the two agree exactly.
pub fn test_equivalence(msq: f64, scale: f64, source: QuantileSource<'_>, delta: f64, alpha: f64) -> Result<TestResult> {
    check_delta(delta)?;
    let q = source.quantile(alpha)?;
    Ok(TestResult {
        statistic: msq,
        delta,
        alpha,
        reject: msq - q * scale <= delta,
        critical_boundary: delta + q * scale,
        method: source.method(),
        hypothesis: Hypothesis::Equivalence,
    })
}

/// How `ŝ_n` enters the exact-test boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum ExactScaling {
    /// `u_{1−α} ŝ_n / √n`.
    #[default]
    RootN,
    /// `u_{1−α} ŝ_n`; `ŝ_n²` already estimates `Var(M̂²_n)`.
    Direct,
}

/// Test of exact sphericity from the plug-in `ŝ_n²`. Ties retain.
pub fn test_exact(msq: f64, s_hat_sq: f64, n: usize, alpha: f64, scaling: ExactScaling) -> Result<TestResult> {
    let u = normal_quantile(1.0 - alpha)?;
    let s = s_hat_sq.max(0.0).sqrt();
    let scale = match scaling {
        ExactScaling::RootN => s / (n as f64).sqrt(),
        ExactScaling::Direct => s,
    };
    let boundary = u * scale;
    Ok(TestResult {
        statistic: msq,
        delta: 0.0,
        alpha,
        reject: msq > boundary,
        critical_boundary: boundary,
        method: Method::Exact,
        hypothesis: Hypothesis::ExactSphericity,
    })
}

/// `Δ̂_α = max(0, M̂²_n − q_α·scale)`, the smallest `Δ ≥ 0` at which the
/// equivalence test rejects.
pub fn adaptive_threshold(msq: f64, scale: f64, source: QuantileSource<'_>, alpha: f64) -> Result<f64> {
    let q = source.quantile(alpha)?;
    Ok((msq - q * scale).max(0.0))
}
