//! The `(h, κ)` grid `hᵢ = n^{−1/(2(p+8))} aᵢ`, `κᵢ = n^{1/(p+8)} cᵢ` and
//! selection of the entry whose neighbourhood has the least volatile `V̂_n`.

use crate::estimator::{fit, Bandwidths, PolarSample, UStatFit};
use crate::inference::vhat;
use crate::parallel::map_collect;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandwidthGrid {
    /// `(hᵢ, κᵢ)` in grid order.
    pub entries: Vec<(f64, f64)>,
    pub a_list: Vec<f64>,
    pub c_list: Vec<f64>,
    pub n: usize,
    pub p: usize,
}

/// Named `(a, c)` constant lists.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Preset {
    Model1P3,
    Model2P5,
}

const A_LIST: [f64; 5] = [0.75, 0.8125, 0.875, 0.9375, 1.0];

impl Preset {
    pub const ALL: [Preset; 2] = [Preset::Model1P3, Preset::Model2P5];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Model1P3 => "model1-p3",
            Preset::Model2P5 => "model2-p5",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|p| p.name() == name)
            .ok_or_else(|| Error::Config(format!("unknown bandwidth preset {name:?}; known: model1-p3, model2-p5")))
    }

    pub fn dimension(self) -> usize {
        match self {
            Preset::Model1P3 => 3,
            Preset::Model2P5 => 5,
        }
    }

    pub fn a_list(self) -> Vec<f64> {
        A_LIST.to_vec()
    }

    pub fn c_list(self) -> Vec<f64> {
        match self {
            Preset::Model1P3 => vec![72.5, 73.75, 75.0, 76.25, 77.5],
            Preset::Model2P5 => vec![37.5, 38.75, 40.0, 41.25, 42.5],
        }
    }

    pub fn grid(self, n: usize) -> Result<BandwidthGrid> {
        build_grid(n, self.dimension(), &self.a_list(), &self.c_list())
    }
}

pub fn build_grid(n: usize, p: usize, a_list: &[f64], c_list: &[f64]) -> Result<BandwidthGrid> {
    if a_list.len() != c_list.len() {
        return Err(Error::Config(format!(
            "a and c lists differ in length ({} vs {})",
            a_list.len(),
            c_list.len()
        )));
    }
    if a_list.len() < 3 {
        return Err(Error::Config(format!("the grid needs at least 3 entries, got {}", a_list.len())));
    }
    if let Some(x) = a_list.iter().chain(c_list).find(|x| !(**x > 0.0 && x.is_finite())) {
        return Err(Error::Config(format!("grid constants must be positive, got {x}")));
    }
    if n < 2 || p < 2 {
        return Err(Error::Dimension(format!("grid needs n >= 2 and p >= 2, got n = {n}, p = {p}")));
    }
    let nf = n as f64;
    let e = 1.0 / (p as f64 + 8.0);
    let h_scale = nf.powf(-0.5 * e);
    let k_scale = nf.powf(e);
    let entries = a_list.iter().zip(c_list).map(|(a, c)| (h_scale * a, k_scale * c)).collect();
    Ok(BandwidthGrid { entries, a_list: a_list.to_vec(), c_list: c_list.to_vec(), n, p })
}

impl BandwidthGrid {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Entry `i` with kernel and bias-reduction settings taken from `template`.
    pub fn bandwidths(&self, i: usize, template: Bandwidths) -> Result<Bandwidths> {
        let (h, kappa) = self.entries[i];
        let bw = Bandwidths { h, kappa, ..template };
        bw.validate()?;
        Ok(bw)
    }
}

/// `sd({V̂_{i−1}, V̂_i, V̂_{i+1}})/√3` for every interior `i`; entry `i − 1`
/// of the result belongs to grid index `i`.
pub fn window_standard_errors(v: &[f64]) -> Vec<f64> {
    v.windows(3)
        .map(|w| {
            let m = (w[0] + w[1] + w[2]) / 3.0;
            let ss = w.iter().map(|x| (x - m) * (x - m)).sum::<f64>();
            (ss / 2.0).sqrt() / 3f64.sqrt()
        })
        .collect()
}

/// Zero-based interior index with the smallest window standard error; ties
/// go to the smaller index.
pub fn flattest_index(v: &[f64]) -> Result<usize> {
    if v.len() < 3 {
        return Err(Error::Config(format!("selection needs at least 3 values, got {}", v.len())));
    }
    let se = window_standard_errors(v);
    let mut best = 0;
    for (i, s) in se.iter().enumerate() {
        if *s < se[best] {
            best = i;
        }
    }
    Ok(best + 1)
}

#[derive(Debug, Clone)]
pub struct Selection {
    /// Zero-based grid index.
    pub index: usize,
    pub bandwidths: Bandwidths,
    /// `V̂_n` at every grid entry.
    pub vhats: Vec<f64>,
    /// The pass at every grid entry.
    pub fits: Vec<UStatFit>,
}

impl Selection {
    pub fn selected_fit(&self) -> &UStatFit {
        &self.fits[self.index]
    }
}

/// Fits every grid entry and picks the flattest interior window of `V̂_n`.
pub fn select_bandwidth(polar: &PolarSample, grid: &BandwidthGrid, template: Bandwidths) -> Result<Selection> {
    if grid.len() < 3 {
        return Err(Error::Config(format!("the grid needs at least 3 entries, got {}", grid.len())));
    }
    if grid.p != polar.p() {
        return Err(Error::Dimension(format!("grid built for p = {}, sample has p = {}", grid.p, polar.p())));
    }
    let bws = (0..grid.len()).map(|i| grid.bandwidths(i, template)).collect::<Result<Vec<_>>>()?;
    let fits = map_collect(bws.clone(), |bw| fit(polar, bw)).into_iter().collect::<Result<Vec<_>>>()?;
    let vhats: Vec<f64> = fits.iter().map(|f| vhat(&f.estimate.sequential)).collect();
    let index = flattest_index(&vhats)?;
    Ok(Selection { index, bandwidths: bws[index], vhats, fits })
}

/// How a pipeline picks its bandwidths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum BandwidthChoice {
    Fixed(Bandwidths),
    /// A grid from `(a, c)` constants, built at the sample's `n` and `p`.
    Grid { a_list: Vec<f64>, c_list: Vec<f64>, template: Bandwidths },
}

impl BandwidthChoice {
    pub fn preset(preset: Preset, template: Bandwidths) -> Self {
        BandwidthChoice::Grid { a_list: preset.a_list(), c_list: preset.c_list(), template }
    }
}

/// The pass that a [`BandwidthChoice`] settles on.
#[derive(Debug, Clone)]
pub struct Chosen {
    pub fit: UStatFit,
    pub vhat: f64,
    pub bandwidths: Bandwidths,
    /// Selected grid index and all grid `V̂_n` values, in grid mode.
    pub grid: Option<(usize, Vec<f64>)>,
}

pub fn choose(polar: &PolarSample, choice: &BandwidthChoice) -> Result<Chosen> {
    match choice {
        BandwidthChoice::Fixed(bw) => {
            let f = fit(polar, *bw)?;
            let v = vhat(&f.estimate.sequential);
            Ok(Chosen { fit: f, vhat: v, bandwidths: *bw, grid: None })
        }
        BandwidthChoice::Grid { a_list, c_list, template } => {
            let grid = build_grid(polar.n(), polar.p(), a_list, c_list)?;
            let Selection { index, bandwidths, vhats, mut fits } = select_bandwidth(polar, &grid, *template)?;
            let f = fits.swap_remove(index);
            Ok(Chosen { fit: f, vhat: vhats[index], bandwidths, grid: Some((index, vhats)) })
        }
    }
}
