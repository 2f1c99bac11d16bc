//! The U-statistic estimator of `M²` and its sequential path.
//!
//! For observations `Y_i = U_i V_i` (norm times direction) the pair kernel is
//!
//! ```text
//! H(Y_i, Y_j) = K((U_i − U_j)/h)/h · { L(κ V_iᵀV_j)/c_1(κ) − 1/ω_{p−1} }
//! ```
//!
//! and `M̂²_n = 2/(n(n−1)) Σ_{j<i} H(Y_i, Y_j)`. A single pass over the pairs,
//! in index-ascending order, yields the estimate, every prefix estimate
//! `M̂²_k` (k = 2..n) and the per-observation row sums needed by the
//! jackknife. Pair sums use compensated summation so that results are
//! reproducible to the last bits for a fixed row order.

use crate::kernels::{c_j_integral, surface_area, Langevin, RadialKernel, SphericalKernelParams};
use crate::sum::CompensatedSum;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// Norms below this are treated as zero vectors.
pub const ZERO_NORM: f64 = 1e-300;

/// Tolerated deviation of the quadrature value of `c_1(κ)` from 1.
pub const C1_SELF_CHECK_TOL: f64 = 1e-6;

/// An `n × p` data matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    data: Vec<f64>,
    n: usize,
    p: usize,
}

impl Sample {
    pub fn new(data: Vec<f64>, n: usize, p: usize) -> Result<Self> {
        if data.len() != n * p {
            return Err(Error::Dimension(format!(
                "data has {} entries, expected n*p = {}",
                data.len(),
                n * p
            )));
        }
        if p < 2 {
            return Err(Error::Dimension(format!("dimension must be at least 2, got {p}")));
        }
        if n < 2 {
            return Err(Error::Dimension(format!("need at least 2 observations, got {n}")));
        }
        if let Some(idx) = data.iter().position(|x| !x.is_finite()) {
            return Err(Error::Parse {
                row: idx / p,
                col: idx % p,
                msg: "non-finite value".into(),
            });
        }
        Ok(Self { data, n, p })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let p = rows.first().map(|r| r.as_ref().len()).unwrap_or(0);
        let mut data = Vec::with_capacity(rows.len() * p);
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != p {
                return Err(Error::Dimension(format!("row {i} has {} columns, expected {p}", r.len())));
            }
            data.extend_from_slice(r);
        }
        Self::new(data, rows.len(), p)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.p..(i + 1) * self.p]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.p)
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }
}

/// Norms `U_i = ‖Y_i‖` and unit directions `V_i = Y_i / U_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarSample {
    u: Vec<f64>,
    v: Vec<f64>,
    p: usize,
}

impl PolarSample {
    pub fn n(&self) -> usize {
        self.u.len()
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn norms(&self) -> &[f64] {
        &self.u
    }

    pub fn direction(&self, i: usize) -> &[f64] {
        &self.v[i * self.p..(i + 1) * self.p]
    }

    /// The observations at `indices`, in that order.
    pub fn select(&self, indices: &[usize]) -> PolarSample {
        let mut u = Vec::with_capacity(indices.len());
        let mut v = Vec::with_capacity(indices.len() * self.p);
        for &i in indices {
            u.push(self.u[i]);
            v.extend_from_slice(self.direction(i));
        }
        PolarSample { u, v, p: self.p }
    }

    /// The first `k` observations.
    pub fn prefix(&self, k: usize) -> PolarSample {
        PolarSample {
            u: self.u[..k].to_vec(),
            v: self.v[..k * self.p].to_vec(),
            p: self.p,
        }
    }
}

/// Splits every observation into its norm and direction.
pub fn polar_decompose(sample: &Sample) -> Result<PolarSample> {
    let p = sample.p();
    let mut u = Vec::with_capacity(sample.n());
    let mut v = Vec::with_capacity(sample.n() * p);
    for (i, row) in sample.rows().enumerate() {
        let norm = euclidean_norm(row);
        if !(norm >= ZERO_NORM) {
            return Err(Error::ZeroVector { row: i });
        }
        u.push(norm);
        v.extend(row.iter().map(|x| x / norm));
    }
    Ok(PolarSample { u, v, p })
}

/// Overflow- and underflow-safe `‖x‖`.
fn euclidean_norm(x: &[f64]) -> f64 {
    let scale = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 || !scale.is_finite() {
        return scale;
    }
    scale * x.iter().map(|v| (v / scale).powi(2)).sum::<f64>().sqrt()
}

/// Smoothing parameters of the estimator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bandwidths {
    /// Radial bandwidth, in the units of `‖Y‖`.
    pub h: f64,
    /// Spherical concentration.
    pub kappa: f64,
    /// Weight `a` of the combination `(M̂²(κ) − a M̂²(aκ))/(1 − a)`.
    pub bias_reduction_a: Option<f64>,
    pub radial_kernel: RadialKernel,
}

/// Bias-reduction weight used when none is given explicitly.
pub const DEFAULT_BIAS_REDUCTION_A: f64 = 0.5;

impl Bandwidths {
    /// Bandwidths with the jackknife-corrected Epanechnikov kernel and no
    /// bias reduction.
    pub fn new(h: f64, kappa: f64) -> Result<Self> {
        let bw = Self {
            h,
            kappa,
            bias_reduction_a: None,
            radial_kernel: RadialKernel::CORRECTED_EPANECHNIKOV,
        };
        bw.validate()?;
        Ok(bw)
    }

    pub fn with_kernel(mut self, kernel: RadialKernel) -> Self {
        self.radial_kernel = kernel;
        self
    }

    pub fn with_bias_reduction(mut self, a: f64) -> Result<Self> {
        self.bias_reduction_a = Some(a);
        self.validate()?;
        Ok(self)
    }

    pub fn without_bias_reduction(mut self) -> Self {
        self.bias_reduction_a = None;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.h > 0.0) || !self.h.is_finite() {
            return Err(Error::Config(format!("radial bandwidth h must be positive, got {}", self.h)));
        }
        if !(self.kappa > 0.0) || !self.kappa.is_finite() {
            return Err(Error::Config(format!("concentration kappa must be positive, got {}", self.kappa)));
        }
        if let Some(a) = self.bias_reduction_a {
            if !(a > 0.0 && a < 1.0) {
                return Err(Error::Config(format!("bias-reduction weight a must lie in (0, 1), got {a}")));
            }
        }
        Ok(())
    }
}

/// One Langevin component of the pair kernel: `L(κ t) / c_1(κ)` in log form.
#[derive(Debug, Clone, Copy)]
struct SphericalPart {
    /// `log L(κ) − log c_1(κ)`.
    log_peak_normalized: f64,
    kappa: f64,
}

impl SphericalPart {
    fn new(kappa: f64, p: usize) -> Result<Self> {
        let params = SphericalKernelParams::new(kappa, p)?;
        let langevin = Langevin::new(params)?;
        let c1 = c_j_integral(1, params)?;
        if (c1 - 1.0).abs() > C1_SELF_CHECK_TOL {
            return Err(Error::Domain(format!("c_1({kappa}) = {c1} failed its self-check")));
        }
        Ok(Self {
            log_peak_normalized: langevin.log_peak() - c1.ln(),
            kappa,
        })
    }

    #[inline]
    fn eval(&self, t: f64) -> f64 {
        (self.log_peak_normalized + self.kappa * (t - 1.0)).exp()
    }
}

/// The order-2 kernel `H` for fixed bandwidths and dimension.
#[derive(Debug, Clone)]
pub struct PairKernel {
    bw: Bandwidths,
    p: usize,
    inv_h: f64,
    inv_omega: f64,
    primary: SphericalPart,
    /// `(component at aκ, a)` when bias reduction is on.
    secondary: Option<(SphericalPart, f64)>,
}

/// Contributions of one pair.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PairTerms {
    /// `K(Δu/h)/h`.
    pub radial: f64,
    /// `K(Δu/h) L(κt) / (h c_1(κ))`.
    pub joint: f64,
    /// Same at `aκ`; zero without bias reduction.
    pub joint_secondary: f64,
    /// The (possibly bias-reduced) kernel value `H`.
    pub h: f64,
}

impl PairKernel {
    pub fn new(bw: Bandwidths, p: usize) -> Result<Self> {
        bw.validate()?;
        if p < 2 {
            return Err(Error::Dimension(format!("dimension must be at least 2, got {p}")));
        }
        let primary = SphericalPart::new(bw.kappa, p)?;
        let secondary = match bw.bias_reduction_a {
            Some(a) => Some((SphericalPart::new(a * bw.kappa, p)?, a)),
            None => None,
        };
        Ok(Self {
            bw,
            p,
            inv_h: 1.0 / bw.h,
            inv_omega: 1.0 / surface_area(p),
            primary,
            secondary,
        })
    }

    pub fn bandwidths(&self) -> Bandwidths {
        self.bw
    }

    pub fn p(&self) -> usize {
        self.p
    }

    /// `K((u_i − u_j)/h)/h`.
    #[inline]
    pub fn radial(&self, ui: f64, uj: f64) -> f64 {
        self.bw.radial_kernel.eval((ui - uj) * self.inv_h) * self.inv_h
    }

    /// All pieces of the kernel for one pair.
    #[inline]
    pub fn terms(&self, ui: f64, uj: f64, vi: &[f64], vj: &[f64]) -> PairTerms {
        let radial = self.radial(ui, uj);
        if radial == 0.0 {
            return PairTerms::default();
        }
        let t = dot(vi, vj).clamp(-1.0, 1.0);
        let joint = radial * self.primary.eval(t);
        match &self.secondary {
            None => PairTerms {
                radial,
                joint,
                joint_secondary: 0.0,
                h: joint - radial * self.inv_omega,
            },
            Some((part, a)) => {
                let js = radial * part.eval(t);
                PairTerms {
                    radial,
                    joint,
                    joint_secondary: js,
                    h: (joint - a * js) / (1.0 - a) - radial * self.inv_omega,
                }
            }
        }
    }

    #[inline]
    pub fn eval(&self, ui: f64, uj: f64, vi: &[f64], vj: &[f64]) -> f64 {
        self.terms(ui, uj, vi, vj).h
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `H(Y_i, Y_j)` for a single pair.
pub fn kernel_h(ui: f64, uj: f64, vi: &[f64], vj: &[f64], bw: Bandwidths) -> Result<f64> {
    if vi.len() != vj.len() {
        return Err(Error::Dimension("direction vectors differ in length".into()));
    }
    Ok(PairKernel::new(bw, vi.len())?.eval(ui, uj, vi, vj))
}

/// Point estimate of `M²` together with its prefix path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MsqEstimate {
    /// `M̂²_n`.
    pub msq: f64,
    /// `M̂²_k` for `k = 2..=n`; entry `k − 2` holds `M̂²_k`.
    pub sequential: Vec<f64>,
    /// Marginal term `M̂⁽¹⁾_n`, estimating `∫ f_U²`.
    pub m1: f64,
    /// Joint term `M̂⁽²⁾_n`, estimating `∫∫ f²`.
    pub m2: f64,
    pub bandwidths: Bandwidths,
}

impl MsqEstimate {
    pub fn n(&self) -> usize {
        self.sequential.len() + 1
    }

    /// `M̂²_k` for `2 ≤ k ≤ n`.
    pub fn at(&self, k: usize) -> f64 {
        self.sequential[k - 2]
    }
}

/// Everything one pass over the pairs produces.
#[derive(Debug, Clone, PartialEq)]
pub struct UStatFit {
    pub estimate: MsqEstimate,
    /// `S = Σ_{j<i} H(Y_i, Y_j)`.
    pub pair_sum: f64,
    /// `R_i = Σ_{j≠i} H(Y_i, Y_j)`.
    pub row_sums: Vec<f64>,
    /// `M̂⁽²⁾_n` at `κ` alone, even when bias reduction is on.
    pub m2_primary: f64,
    pub p: usize,
}

impl UStatFit {
    pub fn n(&self) -> usize {
        self.row_sums.len()
    }
}

/// Single pass over all pairs with the kernel implied by `bw` (bias
/// reduction included when `bw.bias_reduction_a` is set).
pub fn fit(polar: &PolarSample, bw: Bandwidths) -> Result<UStatFit> {
    let kernel = PairKernel::new(bw, polar.p())?;
    fit_with(polar, &kernel)
}

pub fn fit_with(polar: &PolarSample, kernel: &PairKernel) -> Result<UStatFit> {
    let n = polar.n();
    if n < 2 {
        return Err(Error::Dimension(format!("need at least 2 observations, got {n}")));
    }
    if kernel.p() != polar.p() {
        return Err(Error::Dimension("kernel and sample dimensions differ".into()));
    }
    let u = polar.norms();
    let mut row_sums = vec![CompensatedSum::new(); n];
    let mut total = CompensatedSum::new();
    let mut radial_total = CompensatedSum::new();
    let mut joint_total = CompensatedSum::new();
    let mut joint2_total = CompensatedSum::new();
    let mut sequential = Vec::with_capacity(n - 1);

    for i in 1..n {
        let ui = u[i];
        let vi = polar.direction(i);
        let mut row = CompensatedSum::new();
        for j in 0..i {
            let t = kernel.terms(ui, u[j], vi, polar.direction(j));
            if t.radial == 0.0 {
                continue;
            }
            row.add(t.h);
            row_sums[j].add(t.h);
            radial_total.add(t.radial);
            joint_total.add(t.joint);
            joint2_total.add(t.joint_secondary);
        }
        let r = row.value();
        row_sums[i].add(r);
        total.add(r);
        let k = (i + 1) as f64;
        sequential.push(2.0 * total.value() / (k * (k - 1.0)));
    }

    let pairs = 0.5 * n as f64 * (n as f64 - 1.0);
    let m1 = radial_total.value() / pairs;
    let m2_primary = joint_total.value() / pairs;
    let m2 = match kernel.bw.bias_reduction_a {
        None => m2_primary,
        Some(a) => (m2_primary - a * joint2_total.value() / pairs) / (1.0 - a),
    };
    let msq = *sequential.last().expect("n >= 2");
    Ok(UStatFit {
        estimate: MsqEstimate {
            msq,
            sequential,
            m1,
            m2,
            bandwidths: kernel.bw,
        },
        pair_sum: total.value(),
        row_sums: row_sums.iter().map(CompensatedSum::value).collect(),
        m2_primary,
        p: polar.p(),
    })
}

/// `M̂⁽¹⁾_n = (n(n−1)h)⁻¹ Σ_{i≠j} K((U_i − U_j)/h)`.
pub fn estimate_m1(polar: &PolarSample, h: f64, kernel: RadialKernel) -> Result<f64> {
    let n = polar.n();
    if n < 2 {
        return Err(Error::Dimension(format!("need at least 2 observations, got {n}")));
    }
    if !(h > 0.0) {
        return Err(Error::Config(format!("radial bandwidth h must be positive, got {h}")));
    }
    let u = polar.norms();
    let mut s = CompensatedSum::new();
    for i in 1..n {
        for j in 0..i {
            s.add(kernel.eval((u[i] - u[j]) / h));
        }
    }
    Ok(2.0 * s.value() / (n as f64 * (n as f64 - 1.0) * h))
}

/// `M̂⁽²⁾_n = (n(n−1)c_1(κ)h)⁻¹ Σ_{i≠j} K((U_i − U_j)/h) L(κ V_iᵀV_j)`,
/// combined over `κ` and `aκ` when bias reduction is set.
pub fn estimate_m2(polar: &PolarSample, bw: Bandwidths) -> Result<f64> {
    let n = polar.n();
    if n < 2 {
        return Err(Error::Dimension(format!("need at least 2 observations, got {n}")));
    }
    let kernel = PairKernel::new(bw, polar.p())?;
    let u = polar.norms();
    let mut s1 = CompensatedSum::new();
    let mut s2 = CompensatedSum::new();
    for i in 1..n {
        for j in 0..i {
            let t = kernel.terms(u[i], u[j], polar.direction(i), polar.direction(j));
            s1.add(t.joint);
            s2.add(t.joint_secondary);
        }
    }
    let pairs = 0.5 * n as f64 * (n as f64 - 1.0);
    Ok(match bw.bias_reduction_a {
        None => s1.value() / pairs,
        Some(a) => (s1.value() - a * s2.value()) / ((1.0 - a) * pairs),
    })
}

/// `M̂²_n` with its sequential path, without bias reduction.
pub fn estimate_msq(polar: &PolarSample, bw: Bandwidths) -> Result<MsqEstimate> {
    Ok(fit(polar, bw.without_bias_reduction())?.estimate)
}

/// `M̃²_n(a, κ) = M̂²_n(κ)/(1−a) − a M̂²_n(aκ)/(1−a)` along the whole path.
pub fn estimate_msq_bias_reduced(polar: &PolarSample, bw: Bandwidths) -> Result<MsqEstimate> {
    match bw.bias_reduction_a {
        None => Err(Error::Config("bias reduction requested without a weight a".into())),
        Some(_) => {
            bw.validate()?;
            Ok(fit(polar, bw)?.estimate)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{Langevin, SphericalKernelParams};
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn polar(rows: &[Vec<f64>]) -> PolarSample {
        polar_decompose(&Sample::from_rows(rows).unwrap()).unwrap()
    }

    #[test]
    fn decomposes_three_four_five() {
        let ps = polar(&[vec![3.0, 4.0], vec![0.0, 1.0]]);
        assert_eq!(ps.norms(), &[5.0, 1.0]);
        assert_relative_eq!(ps.direction(0)[0], 0.6, epsilon = 1e-15);
        assert_relative_eq!(ps.direction(0)[1], 0.8, epsilon = 1e-15);
        let unit = polar(&[vec![0.0, 0.0, 1.0], vec![1.0, 0.0, 0.0]]);
        assert_eq!(unit.norms()[0], 1.0);
        assert_eq!(unit.direction(0), &[0.0, 0.0, 1.0]);
    }

    #[test]
    fn zero_row_is_reported() {
        let s = Sample::from_rows(&[vec![1.0, 2.0], vec![0.0, 0.0], vec![1.0, 1.0]]).unwrap();
        assert_eq!(polar_decompose(&s), Err(Error::ZeroVector { row: 1 }));
    }

    #[test]
    fn sample_shape_validation() {
        assert!(matches!(Sample::from_rows(&[vec![1.0], vec![2.0]]), Err(Error::Dimension(_))));
        assert!(matches!(Sample::from_rows(&[vec![1.0, 2.0]]), Err(Error::Dimension(_))));
        assert!(matches!(
            Sample::from_rows(&[vec![1.0, 2.0], vec![f64::NAN, 1.0]]),
            Err(Error::Parse { row: 1, col: 0, .. })
        ));
    }

    #[test]
    fn directions_have_unit_norm() {
        let ps = polar(&[vec![1e-3, 2e5, -7.0], vec![-1.0, -1.0, -1.0], vec![1e-200, 0.0, 3e-200]]);
        for i in 0..ps.n() {
            let nrm: f64 = ps.direction(i).iter().map(|x| x * x).sum::<f64>().sqrt();
            assert!((nrm - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn kernel_vanishes_outside_radial_support() {
        let bw = Bandwidths::new(1.0, 10.0).unwrap();
        let v = [0.0, 0.0, 1.0];
        assert_eq!(kernel_h(1.0, 2.0, &v, &v, bw).unwrap(), 0.0);
        assert_eq!(kernel_h(1.0, 2.5, &v, &v, bw).unwrap(), 0.0);
    }

    #[test]
    fn kernel_at_identical_points() {
        let bw = Bandwidths::new(1.0, 10.0).unwrap().with_kernel(RadialKernel::EPANECHNIKOV);
        let v = [0.0, 0.0, 1.0];
        // L(κ) = κ^{1/2} e^κ / ((2π)^{3/2} I_{1/2}(κ)), I_{1/2}(κ) = √(2/(πκ)) sinh κ.
        let kappa: f64 = 10.0;
        let i_half = (2.0 / (PI * kappa)).sqrt() * kappa.sinh();
        let l = kappa.sqrt() * kappa.exp() / ((2.0 * PI).powf(1.5) * i_half);
        let c1 = c_j_integral(1, SphericalKernelParams::new(kappa, 3).unwrap()).unwrap();
        let want = 0.75 * (l / c1 - 1.0 / (4.0 * PI));
        assert_relative_eq!(kernel_h(2.0, 2.0, &v, &v, bw).unwrap(), want, max_relative = 1e-12);
    }

    #[test]
    fn kernel_is_symmetric() {
        let bw = Bandwidths::new(0.7, 30.0).unwrap().with_bias_reduction(0.5).unwrap();
        let ps = polar(&[vec![0.3, -1.0, 0.8], vec![0.5, -0.7, 1.1]]);
        let k = PairKernel::new(bw, 3).unwrap();
        let a = k.eval(ps.norms()[0], ps.norms()[1], ps.direction(0), ps.direction(1));
        let b = k.eval(ps.norms()[1], ps.norms()[0], ps.direction(1), ps.direction(0));
        assert_eq!(a, b);
    }

    #[test]
    fn two_observations_give_the_single_pair_kernel() {
        let bw = Bandwidths::new(0.9, 12.0).unwrap();
        let ps = polar(&[vec![1.0, 0.2, 0.1], vec![0.9, 0.3, 0.0]]);
        let est = estimate_msq(&ps, bw).unwrap();
        let h = kernel_h(ps.norms()[0], ps.norms()[1], ps.direction(0), ps.direction(1), bw).unwrap();
        assert_relative_eq!(est.msq, h, max_relative = 1e-14);
        assert_eq!(est.sequential.len(), 1);
    }

    #[test]
    fn m1_small_cases() {
        let ps = polar(&[vec![1.0, 0.0], vec![0.0, 3.0]]);
        assert_eq!(estimate_m1(&ps, 1.0, RadialKernel::EPANECHNIKOV).unwrap(), 0.0);
        let ps = polar(&[vec![1.0, 0.0], vec![0.0, 1.0]]);
        assert_eq!(estimate_m1(&ps, 1.0, RadialKernel::EPANECHNIKOV).unwrap(), 0.75);
    }

    #[test]
    fn separated_norms_give_zero() {
        let rows: Vec<Vec<f64>> = (1..8).map(|i| vec![i as f64, 0.0, 0.0]).collect();
        let ps = polar(&rows);
        let bw = Bandwidths::new(0.5, 20.0).unwrap();
        let est = estimate_msq(&ps, bw).unwrap();
        assert_eq!(est.msq, 0.0);
        assert_eq!(estimate_m2(&ps, bw).unwrap(), 0.0);
    }

    #[test]
    fn decomposition_identity_and_components_agree() {
        let rows: Vec<Vec<f64>> = (0..40)
            .map(|i| {
                let x = i as f64;
                vec![(0.37 * x).sin() + 1.2, (0.11 * x).cos(), 0.05 * x - 0.8]
            })
            .collect();
        let ps = polar(&rows);
        for bw in [
            Bandwidths::new(0.6, 25.0).unwrap(),
            Bandwidths::new(0.6, 25.0).unwrap().with_bias_reduction(0.5).unwrap(),
            Bandwidths::new(0.4, 80.0).unwrap().with_kernel(RadialKernel::EPANECHNIKOV),
        ] {
            let f = fit(&ps, bw).unwrap();
            let e = &f.estimate;
            assert!((e.msq - (e.m2 - e.m1 / (4.0 * PI))).abs() < 1e-12);
            assert_relative_eq!(e.m1, estimate_m1(&ps, bw.h, bw.radial_kernel).unwrap(), max_relative = 1e-12);
            assert_relative_eq!(e.m2, estimate_m2(&ps, bw).unwrap(), max_relative = 1e-12);
            assert_eq!(e.msq, *e.sequential.last().unwrap());
        }
    }

    #[test]
    fn bias_reduction_equals_pointwise_combination() {
        let rows: Vec<Vec<f64>> = (0..30)
            .map(|i| {
                let x = i as f64;
                vec![(1.3 * x).sin() + 1.0, (0.7 * x).cos(), 0.5]
            })
            .collect();
        let ps = polar(&rows);
        let a = 0.5;
        let bw = Bandwidths::new(0.8, 40.0).unwrap();
        let full = estimate_msq(&ps, bw).unwrap();
        let half = estimate_msq(&ps, Bandwidths { kappa: a * bw.kappa, ..bw }).unwrap();
        let br = estimate_msq_bias_reduced(&ps, bw.with_bias_reduction(a).unwrap()).unwrap();
        for k in 2..=ps.n() {
            let want = full.at(k) / (1.0 - a) - a * half.at(k) / (1.0 - a);
            assert!((br.at(k) - want).abs() < 1e-12, "k={k}");
        }
        assert_eq!(1.0 / (1.0 - a) - a / (1.0 - a), 1.0);
    }

    #[test]
    fn bias_reduction_weight_validated() {
        let bw = Bandwidths::new(0.8, 40.0).unwrap();
        assert!(matches!(bw.with_bias_reduction(1.0), Err(Error::Config(_))));
        assert!(matches!(bw.with_bias_reduction(0.0), Err(Error::Config(_))));
        let ps = polar(&[vec![1.0, 0.0], vec![0.0, 1.0]]);
        assert!(matches!(estimate_msq_bias_reduced(&ps, bw), Err(Error::Config(_))));
    }

    #[test]
    fn large_concentration_stays_finite() {
        let rows: Vec<Vec<f64>> = (0..20).map(|i| vec![1.0 + 0.01 * i as f64, 0.001 * i as f64, 0.3]).collect();
        let ps = polar(&rows);
        let est = estimate_msq(&ps, Bandwidths::new(0.5, 5000.0).unwrap()).unwrap();
        assert!(est.msq.is_finite());
        let l = Langevin::new(SphericalKernelParams::new(5000.0, 3).unwrap()).unwrap();
        assert!(l.eval(1.0).is_finite());
    }
}
