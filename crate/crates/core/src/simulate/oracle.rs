//! `M²` of a Gaussian model without touching the kernel estimator.
//!
//! With `f(u, v) = f_Y(uv) u^{p−1}`, the first term `∫∫ f²` is
//! `E[f_Y(Y) ‖Y‖^{p−1}]`, estimated by Monte Carlo with the exact density.
//! The norm density `f_U(u) = u^{p−1} ∫ f_Y(uv) ω(dv)` comes from a
//! spherical product rule, and `∫ f_U²` from Gauss–Legendre panels in `u`.

use super::{generate, rng_for, ModelSpec};
use crate::bandwidth::{choose, BandwidthChoice};
use crate::estimator::polar_decompose;
use crate::kernels::quadrature::GaussLegendre;
use crate::kernels::surface_area;
use crate::parallel::map_collect;
use crate::sum::CompensatedSum;
use crate::{Error, Result};
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Largest accepted change of `f_U` at a probe point when the spherical
/// rule is doubled.
pub const SELF_CHECK_TOL: f64 = 1e-6;
const U_PANELS: usize = 8;
const U_NODES: usize = 64;

/// Gauss–Legendre in each polar angle, trapezoid in the azimuth.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SphericalRule {
    pub p: usize,
    pub theta_nodes: usize,
    pub phi_nodes: usize,
}

impl SphericalRule {
    /// 64 × 128 on the 2-sphere, 32 per angle beyond that.
    pub fn default_for(p: usize) -> Self {
        let theta_nodes = if p <= 3 { 64 } else { 32 };
        Self { p, theta_nodes, phi_nodes: 2 * theta_nodes }
    }

    pub fn doubled(self) -> Self {
        Self { theta_nodes: 2 * self.theta_nodes, phi_nodes: 2 * self.phi_nodes, ..self }
    }

    pub fn node_count(self) -> usize {
        self.theta_nodes.pow(self.p.saturating_sub(2) as u32) * self.phi_nodes
    }

    /// Calls `f(v, w)` for every node `v` on the unit sphere with weight `w`;
    /// the weights sum to the surface area.
    pub fn for_each<F: FnMut(&[f64], f64)>(self, mut f: F) {
        let gl = GaussLegendre::new(self.theta_nodes);
        let thetas: Vec<(f64, f64, f64)> = gl
            .nodes()
            .iter()
            .zip(gl.weights())
            .map(|(x, w)| {
                let t = 0.5 * PI * (x + 1.0);
                (t.cos(), t.sin(), 0.5 * PI * w)
            })
            .collect();
        let dphi = 2.0 * PI / self.phi_nodes as f64;
        let phis: Vec<(f64, f64)> = (0..self.phi_nodes)
            .map(|k| {
                let a = dphi * k as f64;
                (a.cos(), a.sin())
            })
            .collect();
        let mut v = vec![0.0; self.p];
        let levels = self.p - 2;
        let mut idx = vec![0usize; levels];
        loop {
            let mut radius = 1.0;
            let mut weight = dphi;
            for (level, &i) in idx.iter().enumerate() {
                let (c, s, w) = thetas[i];
                v[level] = radius * c;
                weight *= w * s.powi((self.p - 2 - level) as i32);
                radius *= s;
            }
            for &(c, s) in &phis {
                v[levels] = radius * c;
                v[levels + 1] = radius * s;
                f(&v, weight);
            }
            let mut l = levels;
            loop {
                if l == 0 {
                    return;
                }
                l -= 1;
                idx[l] += 1;
                if idx[l] < self.theta_nodes {
                    break;
                }
                idx[l] = 0;
            }
        }
    }
}

/// Whitened Gaussian log-density pieces.
struct Density {
    l: DMatrix<f64>,
    l_inv: DMatrix<f64>,
    mu: DVector<f64>,
    white_mu: DVector<f64>,
    log_norm: f64,
}

impl Density {
    fn new(spec: &ModelSpec) -> Result<Self> {
        let l = spec.cholesky()?;
        let p = spec.p();
        let l_inv = l.clone().try_inverse().ok_or(Error::Factorization)?;
        let mu = DVector::from_column_slice(&spec.mu);
        let white_mu = &l_inv * &mu;
        let log_det: f64 = (0..p).map(|i| l[(i, i)].ln()).sum();
        let log_norm = -0.5 * p as f64 * (2.0 * PI).ln() - log_det;
        Ok(Self { l, l_inv, mu, white_mu, log_norm })
    }

    fn pdf(&self, y: &DVector<f64>) -> f64 {
        let z = self
            .l
            .solve_lower_triangular(&(y - &self.mu))
            .expect("Cholesky factor has a positive diagonal");
        (self.log_norm - 0.5 * z.norm_squared()).exp()
    }

    /// `f_U(u)` at every `u` in `us` under `rule`.
    fn norm_density(&self, us: &[f64], rule: SphericalRule) -> Vec<f64> {
        let p = rule.p;
        let c = self.white_mu.norm_squared();
        let mut acc = vec![CompensatedSum::new(); us.len()];
        let mut wv = DVector::zeros(p);
        rule.for_each(|v, w| {
            wv.copy_from(&(&self.l_inv * DVector::from_column_slice(v)));
            let a = wv.norm_squared();
            let b = wv.dot(&self.white_mu);
            for (s, &u) in acc.iter_mut().zip(us) {
                s.add(w * (self.log_norm - 0.5 * (u * u * a - 2.0 * u * b + c)).exp());
            }
        });
        acc.iter().zip(us).map(|(s, &u)| u.powi(p as i32 - 1) * s.value()).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleResult {
    /// `∫∫ f²`.
    pub joint_term: f64,
    pub joint_term_se: f64,
    /// `∫ f_U²`.
    pub marginal_term: f64,
    pub msq: f64,
    /// Monte Carlo standard error of `msq`; the marginal term is deterministic.
    pub se: f64,
    pub draws: usize,
    pub seed: u64,
    pub rule: SphericalRule,
    /// Largest change of `f_U` at the probe points under the doubled rule.
    pub self_check_change: f64,
}

fn u_upper(spec: &ModelSpec) -> f64 {
    let mu = spec.mu.iter().map(|x| x * x).sum::<f64>().sqrt();
    let tr: f64 = (0..spec.p()).map(|i| spec.sigma[i * spec.p() + i]).sum();
    mu + 12.0 * tr.sqrt() + 1.0
}

/// `M² = ∫∫ f² − ω_{p−1}⁻¹ ∫ f_U²` for a Gaussian model.
pub fn oracle_msq(spec: &ModelSpec, mc_draws: usize, seed: u64) -> Result<OracleResult> {
    oracle_msq_with_rule(spec, mc_draws, seed, SphericalRule::default_for(spec.p()))
}

pub fn oracle_msq_with_rule(spec: &ModelSpec, mc_draws: usize, seed: u64, rule: SphericalRule) -> Result<OracleResult> {
    spec.validate()?;
    if mc_draws < 2 {
        return Err(Error::Config(format!("the oracle needs at least 2 draws, got {mc_draws}")));
    }
    if rule.p != spec.p() {
        return Err(Error::Dimension("spherical rule and model dimensions differ".into()));
    }
    let p = spec.p();
    let dens = Density::new(spec)?;
    let upper = u_upper(spec);

    let probes: Vec<f64> = [0.25, 0.5, 1.0, 1.5].iter().map(|t| t * (upper - 1.0) / 6.0).collect();
    let coarse = dens.norm_density(&probes, rule);
    let fine = dens.norm_density(&probes, rule.doubled());
    let change = coarse.iter().zip(&fine).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    if change > SELF_CHECK_TOL {
        return Err(Error::QuadratureBudget(format!(
            "doubling the spherical rule moved f_U by {change:e} (limit {SELF_CHECK_TOL:e})"
        )));
    }

    let gl = GaussLegendre::new(U_NODES);
    let width = upper / U_PANELS as f64;
    let mut us = Vec::with_capacity(U_PANELS * U_NODES);
    let mut ws = Vec::with_capacity(U_PANELS * U_NODES);
    for k in 0..U_PANELS {
        let mid = (k as f64 + 0.5) * width;
        for (x, w) in gl.nodes().iter().zip(gl.weights()) {
            us.push(mid + 0.5 * width * x);
            ws.push(0.5 * width * w);
        }
    }
    let fu = dens.norm_density(&us, rule);
    let marginal: f64 = fu.iter().zip(&ws).map(|(f, w)| w * f * f).sum();

    let mut rng = rng_for(seed, 0);
    let l = &dens.l;
    let mut s = CompensatedSum::new();
    let mut ss = CompensatedSum::new();
    for _ in 0..mc_draws {
        let z = DVector::from_iterator(p, (0..p).map(|_| rng.sample::<f64, _>(StandardNormal)));
        let y = &dens.mu + l * z;
        let g = dens.pdf(&y) * y.norm().powi(p as i32 - 1);
        s.add(g);
        ss.add(g * g);
    }
    let m = mc_draws as f64;
    let joint = s.value() / m;
    let var = ((ss.value() - m * joint * joint) / (m - 1.0)).max(0.0);
    let joint_se = (var / m).sqrt();
    Ok(OracleResult {
        joint_term: joint,
        joint_term_se: joint_se,
        marginal_term: marginal,
        msq: joint - marginal / surface_area(p),
        se: joint_se,
        draws: mc_draws,
        seed,
        rule,
        self_check_change: change,
    })
}

/// The alternative route: the average of the estimator over many samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatorOracle {
    pub mean: f64,
    pub se: f64,
    pub n: usize,
    pub reps: usize,
    pub seed: u64,
}

pub fn oracle_by_estimator(
    spec: &ModelSpec,
    n: usize,
    reps: usize,
    choice: &BandwidthChoice,
    seed: u64,
) -> Result<EstimatorOracle> {
    if reps < 2 {
        return Err(Error::Config(format!("need at least 2 replications, got {reps}")));
    }
    let values = map_collect((0..reps).collect(), |r| -> Result<f64> {
        let mut rng = rng_for(seed, super::derive_stream(n, r));
        let sample = generate(spec, n, &mut rng)?;
        Ok(choose(&polar_decompose(&sample)?, choice)?.fit.estimate.msq)
    })
    .into_iter()
    .collect::<Result<Vec<f64>>>()?;
    let m = reps as f64;
    let mean = values.iter().sum::<f64>() / m;
    let var = values.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (m - 1.0);
    Ok(EstimatorOracle { mean, se: (var / m).sqrt(), n, reps, seed })
}
