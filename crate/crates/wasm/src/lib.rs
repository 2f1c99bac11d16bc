//! wasm-bindgen bindings for the browser demo in `www/`.

use sphericity::estimator::{polar_decompose, Bandwidths};
use sphericity::inference::{jackknife_ci_from_scale, pivotal_ci, simulate_w, vhat, WQuantileTable};
use sphericity::kernels::{Langevin, SphericalKernelParams};
use sphericity::simulate::{gen_gaussian, ModelSpec};
use sphericity::variance::{jackknife_from_fit, JackknifeNormalization};
use wasm_bindgen::prelude::*;

fn js(e: sphericity::Error) -> JsError {
    JsError::new(&e.to_string())
}

/// Langevin density at angles `θ_i = iπ/(points − 1)` from the mean direction.
#[wasm_bindgen]
pub fn langevin_profile(kappa: f64, p: usize, points: usize) -> Result<Vec<f64>, JsError> {
    let l = Langevin::new(SphericalKernelParams::new(kappa, p).map_err(js)?).map_err(js)?;
    let step = std::f64::consts::PI / (points.max(2) - 1) as f64;
    Ok((0..points.max(2)).map(|i| l.eval((i as f64 * step).cos())).collect())
}

/// One fit of the estimator to `N((shift, 0, 0), diag(stretch², 1, 1))`.
#[wasm_bindgen]
pub struct MsqFit {
    msq: f64,
    path: Vec<f64>,
    jackknife: [f64; 2],
    pivotal: [f64; 2],
    vhat: f64,
}

#[wasm_bindgen]
impl MsqFit {
    #[wasm_bindgen(getter)]
    pub fn msq(&self) -> f64 {
        self.msq
    }

    /// `M̂²_k` for `k = 2..=n`.
    #[wasm_bindgen(getter)]
    pub fn path(&self) -> Vec<f64> {
        self.path.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn jackknife_ci(&self) -> Vec<f64> {
        self.jackknife.to_vec()
    }

    #[wasm_bindgen(getter)]
    pub fn pivotal_ci(&self) -> Vec<f64> {
        self.pivotal.to_vec()
    }

    #[wasm_bindgen(getter)]
    pub fn vhat(&self) -> f64 {
        self.vhat
    }
}

#[wasm_bindgen]
pub fn fit_gaussian(n: usize, shift: f64, stretch: f64, h: f64, kappa: f64, alpha: f64, seed: u64) -> Result<MsqFit, JsError> {
    let sigma = vec![stretch * stretch, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0];
    let spec = ModelSpec::gaussian(vec![shift, 0.0, 0.0], sigma).map_err(js)?;
    let sample = gen_gaussian(&spec, n, seed).map_err(js)?;
    let bw = Bandwidths::new(h, kappa).and_then(|b| b.with_bias_reduction(0.5)).map_err(js)?;
    let fit = sphericity::estimator::fit(&polar_decompose(&sample).map_err(js)?, bw).map_err(js)?;
    let jk = jackknife_from_fit(&fit, JackknifeNormalization::Full).map_err(js)?;
    let msq = fit.estimate.msq;
    let v = vhat(&fit.estimate.sequential);
    let j = jackknife_ci_from_scale(msq, jk.jackknife_scale(), alpha).map_err(js)?;
    let pv = pivotal_ci(msq, v, WQuantileTable::bundled(), alpha).map_err(js)?;
    Ok(MsqFit { msq, path: fit.estimate.sequential, jackknife: [j.lower, j.upper], pivotal: [pv.lower, pv.upper], vhat: v })
}

/// Density histogram of simulated W over `bins` equal cells of `[lo, hi]`.
#[wasm_bindgen]
pub fn w_histogram(paths: usize, steps: usize, seed: u64, bins: usize, lo: f64, hi: f64) -> Result<Vec<f64>, JsError> {
    if bins == 0 || hi <= lo {
        return Err(JsError::new("need bins >= 1 and hi > lo"));
    }
    let w = simulate_w(paths, steps, seed).map_err(js)?;
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0.0; bins];
    for x in &w {
        if *x >= lo && *x < hi {
            counts[((x - lo) / width) as usize] += 1.0;
        }
    }
    let norm = 1.0 / (w.len() as f64 * width);
    Ok(counts.into_iter().map(|c| c * norm).collect())
}

/// Quantile of W from the bundled table.
#[wasm_bindgen]
pub fn w_quantile(level: f64) -> Result<f64, JsError> {
    WQuantileTable::bundled().quantile(level).map_err(js)
}
