//! Data generators, an independent oracle for `M²` and the Monte Carlo
//! harness.
//!
//! Every random draw comes from `ChaCha8Rng::seed_from_u64(master)` on a
//! stream chosen by [`derive_stream`], so parallel replications never share
//! a stream and results do not depend on scheduling.

mod experiment;
mod oracle;

pub use experiment::{
    coverage_rows, rejection_rows, replicate, run_coverage_experiment, run_experiment, run_rejection_experiment,
    ExperimentConfig, ExperimentReport, Replicate, ReportRow, SizeSummary,
};
pub use oracle::{
    oracle_by_estimator, oracle_msq, oracle_msq_with_rule, EstimatorOracle, OracleResult, SphericalRule, SELF_CHECK_TOL,
};

use crate::estimator::Sample;
use crate::{Error, Result};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

/// Burn-in length of the AR(1) generator.
pub const AR1_BURN_IN: usize = 500;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModelKind {
    Gaussian,
    AR1Gaussian,
    SphericalGaussian,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub kind: ModelKind,
    pub mu: Vec<f64>,
    /// Row-major `p × p` covariance.
    pub sigma: Vec<f64>,
    pub rho: Option<f64>,
}

fn scaled(m: &[f64], s: f64) -> Vec<f64> {
    m.iter().map(|x| x * s).collect()
}

impl ModelSpec {
    pub fn gaussian(mu: Vec<f64>, sigma: Vec<f64>) -> Result<Self> {
        let spec = Self { kind: ModelKind::Gaussian, mu, sigma, rho: None };
        spec.validate()?;
        Ok(spec)
    }

    pub fn spherical(p: usize) -> Self {
        let mut sigma = vec![0.0; p * p];
        for i in 0..p {
            sigma[i * p + i] = 1.0;
        }
        Self { kind: ModelKind::SphericalGaussian, mu: vec![0.0; p], sigma, rho: None }
    }

    pub fn model1() -> Self {
        #[rustfmt::skip]
        let s = [
            1.0, 0.3, 0.0,
            0.3, 1.0, 0.0,
            0.0, 0.0, 1.0,
        ];
        Self { kind: ModelKind::Gaussian, mu: vec![1.0, 0.0, 2.0], sigma: scaled(&s, 0.25), rho: None }
    }

    pub fn model2() -> Self {
        #[rustfmt::skip]
        let s = [
            1.0, 0.2, 0.0, 0.0, 0.0,
            0.2, 1.0, 0.3, 0.0, 0.0,
            0.0, 0.3, 1.0, 0.0, 0.0,
            0.0, 0.0, 0.0, 1.0, 0.2,
            0.0, 0.0, 0.0, 0.2, 1.0,
        ];
        Self {
            kind: ModelKind::Gaussian,
            mu: vec![1.0, 0.0, 0.0, -2.0, 0.0],
            sigma: scaled(&s, 0.25),
            rho: None,
        }
    }

    /// The same marginal law, generated with AR(1) dependence.
    pub fn with_ar1(mut self, rho: f64) -> Result<Self> {
        self.kind = ModelKind::AR1Gaussian;
        self.rho = Some(rho);
        self.validate()?;
        Ok(self)
    }

    pub fn p(&self) -> usize {
        self.mu.len()
    }

    pub fn sigma_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.p(), self.p(), &self.sigma)
    }

    /// Lower-triangular `L` with `L Lᵀ = Σ`.
    pub fn cholesky(&self) -> Result<DMatrix<f64>> {
        self.sigma_matrix().cholesky().map(|c| c.l()).ok_or(Error::Factorization)
    }

    pub fn validate(&self) -> Result<()> {
        let p = self.p();
        if p < 2 {
            return Err(Error::Dimension(format!("models need p >= 2, got {p}")));
        }
        if self.sigma.len() != p * p {
            return Err(Error::Dimension(format!("sigma has {} entries, expected {}", self.sigma.len(), p * p)));
        }
        for i in 0..p {
            for j in 0..i {
                if (self.sigma[i * p + j] - self.sigma[j * p + i]).abs() > 1e-12 {
                    return Err(Error::Config(format!("sigma is not symmetric at ({i}, {j})")));
                }
            }
        }
        self.cholesky()?;
        match (self.kind, self.rho) {
            (ModelKind::AR1Gaussian, Some(r)) if r > -1.0 && r < 1.0 => Ok(()),
            (ModelKind::AR1Gaussian, Some(r)) => Err(Error::Config(format!("AR coefficient must lie in (-1, 1), got {r}"))),
            (ModelKind::AR1Gaussian, None) => Err(Error::Config("AR(1) model without a coefficient".into())),
            _ => Ok(()),
        }
    }
}

/// Stream index for replication `rep` at sample size `n`.
pub fn derive_stream(n: usize, rep: usize) -> u64 {
    ((n as u64) << 32) | rep as u64
}

pub fn rng_for(master: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(stream);
    rng
}

fn normal_vector<R: Rng>(rng: &mut R, p: usize) -> DVector<f64> {
    DVector::from_iterator(p, (0..p).map(|_| rng.sample::<f64, _>(StandardNormal)))
}

fn push_row(data: &mut Vec<f64>, y: &DVector<f64>) -> bool {
    if y.iter().all(|x| *x == 0.0) {
        log::warn!("generated an exact zero row, resampling");
        return false;
    }
    data.extend(y.iter());
    true
}

/// `Y = μ + L Z` from a generator.
pub fn gen_gaussian_with<R: Rng>(spec: &ModelSpec, n: usize, rng: &mut R) -> Result<Sample> {
    spec.validate()?;
    let p = spec.p();
    let l = spec.cholesky()?;
    let mu = DVector::from_column_slice(&spec.mu);
    let mut data = Vec::with_capacity(n * p);
    let mut have = 0;
    while have < n {
        let y = &mu + &l * normal_vector(rng, p);
        if push_row(&mut data, &y) {
            have += 1;
        }
    }
    Sample::new(data, n, p)
}

pub fn gen_gaussian(spec: &ModelSpec, n: usize, seed: u64) -> Result<Sample> {
    gen_gaussian_with(spec, n, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// Componentwise `z_t = ρ z_{t−1} + ε_t` started from the stationary law,
/// then `Y_t = μ + L z_t √(1−ρ²)`.
pub fn gen_ar1_with<R: Rng>(spec: &ModelSpec, n: usize, rng: &mut R) -> Result<Sample> {
    spec.validate()?;
    let rho = spec.rho.ok_or_else(|| Error::Config("AR(1) generation needs a coefficient".into()))?;
    let p = spec.p();
    let l = spec.cholesky()?;
    let mu = DVector::from_column_slice(&spec.mu);
    let innov_scale = (1.0 - rho * rho).sqrt();
    let mut z = normal_vector(rng, p) / innov_scale;
    for _ in 0..AR1_BURN_IN {
        z = z * rho + normal_vector(rng, p);
    }
    let mut data = Vec::with_capacity(n * p);
    let mut have = 0;
    while have < n {
        z = z * rho + normal_vector(rng, p);
        let y = &mu + &l * (&z * innov_scale);
        if push_row(&mut data, &y) {
            have += 1;
        }
    }
    Sample::new(data, n, p)
}

pub fn gen_ar1(spec: &ModelSpec, n: usize, seed: u64) -> Result<Sample> {
    gen_ar1_with(spec, n, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// Dispatches on the model kind.
pub fn generate<R: Rng>(spec: &ModelSpec, n: usize, rng: &mut R) -> Result<Sample> {
    match spec.kind {
        ModelKind::AR1Gaussian => gen_ar1_with(spec, n, rng),
        ModelKind::Gaussian | ModelKind::SphericalGaussian => gen_gaussian_with(spec, n, rng),
    }
}
