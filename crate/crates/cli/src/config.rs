//! Validated run configuration.

use crate::CliError;
use serde::Serialize;
use sphericity::bandwidth::{BandwidthChoice, Preset};
use sphericity::estimator::Bandwidths;
use sphericity::inference::{ExactScaling, Hypothesis, Method};
use sphericity::kernels::RadialKernel;
use sphericity::variance::JackknifeNormalization;
use std::path::PathBuf;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum BandwidthMode {
    Explicit { h: f64, kappa: f64 },
    Preset { name: String },
    Custom { a_list: Vec<f64>, c_list: Vec<f64> },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KernelOptions {
    pub radial_kernel: RadialKernel,
    /// `None` turns bias reduction off.
    pub bias_reduction: Option<f64>,
}

impl KernelOptions {
    pub fn apply(&self, bw: Bandwidths) -> Result<Bandwidths, CliError> {
        let bw = bw.with_kernel(self.radial_kernel);
        Ok(match self.bias_reduction {
            Some(a) => bw.with_bias_reduction(a)?,
            None => bw.without_bias_reduction(),
        })
    }

    pub fn template(&self) -> Result<Bandwidths, CliError> {
        self.apply(Bandwidths::new(1.0, 1.0)?)
    }
}

/// Raw bandwidth flags before the one-mode check.
#[derive(Debug, Clone, Default)]
pub struct BandwidthFlags {
    pub h: Option<f64>,
    pub kappa: Option<f64>,
    pub preset: Option<String>,
    pub a_list: Option<Vec<f64>>,
    pub c_list: Option<Vec<f64>>,
}

impl BandwidthFlags {
    /// The single active mode, or `None` when no flag is given.
    pub fn mode(&self) -> Result<Option<BandwidthMode>, CliError> {
        let explicit = self.h.is_some() || self.kappa.is_some();
        let custom = self.a_list.is_some() || self.c_list.is_some();
        let active = [explicit, self.preset.is_some(), custom].iter().filter(|b| **b).count();
        if active > 1 {
            return Err(CliError::Config(
                "choose exactly one bandwidth mode: --h/--kappa, --preset or --a-list/--c-list".into(),
            ));
        }
        if explicit {
            return match (self.h, self.kappa) {
                (Some(h), Some(kappa)) => Ok(Some(BandwidthMode::Explicit { h, kappa })),
                _ => Err(CliError::Config("--h and --kappa must be given together".into())),
            };
        }
        if let Some(name) = &self.preset {
            Preset::from_name(name)?;
            return Ok(Some(BandwidthMode::Preset { name: name.clone() }));
        }
        if custom {
            return match (&self.a_list, &self.c_list) {
                (Some(a), Some(c)) => Ok(Some(BandwidthMode::Custom { a_list: a.clone(), c_list: c.clone() })),
                _ => Err(CliError::Config("--a-list and --c-list must be given together".into())),
            };
        }
        Ok(None)
    }
}

impl BandwidthMode {
    pub fn choice(&self, kernel: &KernelOptions) -> Result<BandwidthChoice, CliError> {
        let template = kernel.template()?;
        Ok(match self {
            BandwidthMode::Explicit { h, kappa } => BandwidthChoice::Fixed(kernel.apply(Bandwidths::new(*h, *kappa)?)?),
            BandwidthMode::Preset { name } => BandwidthChoice::preset(Preset::from_name(name)?, template),
            BandwidthMode::Custom { a_list, c_list } => {
                BandwidthChoice::Grid { a_list: a_list.clone(), c_list: c_list.clone(), template }
            }
        })
    }
}

/// Everything a command needs, echoed into its report.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub command: String,
    pub input: Option<PathBuf>,
    pub bandwidth: Option<BandwidthMode>,
    pub kernel: KernelOptions,
    pub alpha: f64,
    pub delta: Option<f64>,
    pub methods: Vec<Method>,
    pub hypothesis: Option<Hypothesis>,
    pub normalization: JackknifeNormalization,
    pub exact_scaling: ExactScaling,
    pub seed: Option<u64>,
    pub output: Option<PathBuf>,
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(CliError::Config(format!("alpha must lie in (0, 1), got {}", self.alpha)));
        }
        if let Some(d) = self.delta {
            if !(d >= 0.0 && d.is_finite()) {
                return Err(CliError::Config(format!("delta must be finite and non-negative, got {d}")));
            }
        }
        Ok(())
    }

    pub fn require_bandwidth(&self) -> Result<&BandwidthMode, CliError> {
        self.bandwidth.as_ref().ok_or_else(|| {
            CliError::Config("a bandwidth mode is required: --h/--kappa, --preset or --a-list/--c-list".into())
        })
    }

    pub fn choice(&self) -> Result<BandwidthChoice, CliError> {
        self.require_bandwidth()?.choice(&self.kernel)
    }
}
