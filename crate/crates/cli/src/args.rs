//! Command-line flags.

use crate::config::{BandwidthFlags, KernelOptions, RunConfig};
use crate::CliError;
use clap::{Args, Parser, Subcommand, ValueEnum};
use sphericity::inference::{ExactScaling, Hypothesis, Method, WQuantileTable};
use sphericity::kernels::RadialKernel;
use sphericity::variance::JackknifeNormalization;
use std::path::PathBuf;

#[derive(Debug, Parser)]
#[command(name = "sphericity", version, about = "Estimate and test deviations from spherical symmetry")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Report format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    /// Cap on worker threads.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// W-quantile table file; the bundled table is used otherwise.
    #[arg(long, global = true, env = crate::W_TABLE_ENV)]
    pub w_table: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Point estimate of M² with both scale estimates.
    Estimate(DataArgs),
    /// Confidence intervals for M².
    Ci(DataArgs),
    /// Relevant, equivalence or exact-sphericity test.
    Test(TestArgs),
    /// Smallest threshold at which the equivalence test rejects.
    Threshold(DataArgs),
    /// Coverage and rejection study on a simulated model.
    Simulate(SimulateArgs),
    /// Regenerate the W-quantile table.
    Quantiles(QuantilesArgs),
    /// Population M² of a model.
    Oracle(OracleArgs),
    /// M̂² as a function of h and of κ around an anchor.
    Diagnose(DiagnoseArgs),
}

#[derive(Debug, Clone, Args)]
pub struct BandwidthArgs {
    /// Radial bandwidth.
    #[arg(long)]
    pub h: Option<f64>,
    /// Spherical concentration.
    #[arg(long)]
    pub kappa: Option<f64>,
    /// Grid preset: model1-p3 or model2-p5.
    #[arg(long)]
    pub preset: Option<String>,
    /// Grid constants a_i.
    #[arg(long, value_delimiter = ',')]
    pub a_list: Option<Vec<f64>>,
    /// Grid constants c_i.
    #[arg(long, value_delimiter = ',')]
    pub c_list: Option<Vec<f64>>,
    #[arg(long, value_enum, default_value_t = KernelArg::Corrected)]
    pub kernel: KernelArg,
    /// Bias-reduction factor a in (0, 1), or "off".
    #[arg(long, default_value = "0.5")]
    pub bias_reduce: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KernelArg {
    /// Jackknife-corrected Epanechnikov.
    Corrected,
    Epanechnikov,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Jackknife,
    Pivotal,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum NormalizationArg {
    /// Divisor n − 1.
    Full,
    /// Divisor 4(n − 1).
    Quarter,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ExactScalingArg {
    /// Boundary u·ŝ/√n.
    RootN,
    /// Boundary u·ŝ.
    Direct,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum HypothesisArg {
    Relevant,
    Equivalence,
    Exact,
}

#[derive(Debug, Clone, Args)]
pub struct DataArgs {
    /// CSV file, one observation per row.
    pub input: PathBuf,
    #[command(flatten)]
    pub bandwidth: BandwidthArgs,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    #[arg(long, value_enum, default_value_t = MethodArg::Both)]
    pub method: MethodArg,
    #[arg(long, value_enum, default_value_t = NormalizationArg::Full)]
    pub normalization: NormalizationArg,
}

#[derive(Debug, Clone, Args)]
pub struct TestArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, value_enum)]
    pub hypothesis: HypothesisArg,
    /// Threshold Δ; required unless the hypothesis is exact.
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long, value_enum, default_value_t = ExactScalingArg::RootN)]
    pub exact_scaling: ExactScalingArg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelArg {
    Model1,
    Model2,
    Spherical,
}

#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    #[arg(long, value_enum, default_value_t = ModelArg::Model1)]
    pub model: ModelArg,
    /// Dimension of the spherical model.
    #[arg(long, default_value_t = 3)]
    pub p: usize,
    /// AR(1) coefficient; independent observations otherwise.
    #[arg(long)]
    pub ar1: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub bandwidth: BandwidthArgs,
    #[arg(long, value_delimiter = ',', default_value = "200,500")]
    pub n: Vec<usize>,
    #[arg(long, default_value_t = 1000)]
    pub reps: usize,
    /// Confidence levels for coverage rows.
    #[arg(long, value_delimiter = ',', default_value = "0.95")]
    pub levels: Vec<f64>,
    /// Thresholds for rejection rows; the target M² when omitted.
    #[arg(long, value_delimiter = ',')]
    pub deltas: Option<Vec<f64>>,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    /// True M²; computed by the quadrature oracle when omitted.
    #[arg(long)]
    pub target: Option<f64>,
    /// Monte Carlo draws for the oracle when --target is omitted.
    #[arg(long, default_value_t = 400_000)]
    pub oracle_draws: usize,
    #[arg(long, value_enum, default_value_t = NormalizationArg::Full)]
    pub normalization: NormalizationArg,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args)]
pub struct QuantilesArgs {
    #[arg(long, default_value_t = 20240601)]
    pub seed: u64,
    #[arg(long, default_value_t = 1_000_000)]
    pub paths: usize,
    #[arg(long, default_value_t = 2000)]
    pub steps: usize,
    /// Quantile levels; the default grid otherwise.
    #[arg(long, value_delimiter = ',')]
    pub levels: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RouteArg {
    /// Quadrature marginal term plus Monte Carlo joint term.
    Quadrature,
    /// Average of the kernel estimator over large samples.
    Estimator,
}

#[derive(Debug, Clone, Args)]
pub struct OracleArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, value_enum, default_value_t = RouteArg::Quadrature)]
    pub route: RouteArg,
    /// Monte Carlo draws on the quadrature route.
    #[arg(long, default_value_t = 400_000)]
    pub draws: usize,
    /// Sample size on the estimator route.
    #[arg(long, default_value_t = 2500)]
    pub n: usize,
    /// Replications on the estimator route.
    #[arg(long, default_value_t = 200)]
    pub reps: usize,
    #[command(flatten)]
    pub bandwidth: BandwidthArgs,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args)]
pub struct DiagnoseArgs {
    pub input: PathBuf,
    #[command(flatten)]
    pub bandwidth: BandwidthArgs,
    /// Radial bandwidths of the h-curve; 0.5 to 1.5 times the anchor otherwise.
    #[arg(long, value_delimiter = ',')]
    pub h_values: Option<Vec<f64>>,
    /// Concentrations of the κ-curve; 0.5 to 1.5 times the anchor otherwise.
    #[arg(long, value_delimiter = ',')]
    pub kappa_values: Option<Vec<f64>>,
}

impl BandwidthArgs {
    pub fn flags(&self) -> BandwidthFlags {
        BandwidthFlags {
            h: self.h,
            kappa: self.kappa,
            preset: self.preset.clone(),
            a_list: self.a_list.clone(),
            c_list: self.c_list.clone(),
        }
    }

    pub fn kernel(&self) -> Result<KernelOptions, CliError> {
        let radial_kernel = match self.kernel {
            KernelArg::Corrected => RadialKernel::CORRECTED_EPANECHNIKOV,
            KernelArg::Epanechnikov => RadialKernel::EPANECHNIKOV,
        };
        let bias_reduction = match self.bias_reduce.as_str() {
            "off" | "none" => None,
            s => Some(
                s.parse::<f64>()
                    .map_err(|_| CliError::Config(format!("--bias-reduce takes a number in (0, 1) or \"off\", got {s:?}")))?,
            ),
        };
        Ok(KernelOptions { radial_kernel, bias_reduction })
    }
}

impl MethodArg {
    pub fn methods(self) -> Vec<Method> {
        match self {
            MethodArg::Jackknife => vec![Method::Jackknife],
            MethodArg::Pivotal => vec![Method::Pivotal],
            MethodArg::Both => vec![Method::Jackknife, Method::Pivotal],
        }
    }
}

impl From<NormalizationArg> for JackknifeNormalization {
    fn from(n: NormalizationArg) -> Self {
        match n {
            NormalizationArg::Full => JackknifeNormalization::Full,
            NormalizationArg::Quarter => JackknifeNormalization::Quarter,
        }
    }
}

impl From<ExactScalingArg> for ExactScaling {
    fn from(s: ExactScalingArg) -> Self {
        match s {
            ExactScalingArg::RootN => ExactScaling::RootN,
            ExactScalingArg::Direct => ExactScaling::Direct,
        }
    }
}

impl From<HypothesisArg> for Hypothesis {
    fn from(h: HypothesisArg) -> Self {
        match h {
            HypothesisArg::Relevant => Hypothesis::RelevantGreater,
            HypothesisArg::Equivalence => Hypothesis::Equivalence,
            HypothesisArg::Exact => Hypothesis::ExactSphericity,
        }
    }
}

impl DataArgs {
    pub fn run_config(&self, command: &str, output: &Option<PathBuf>) -> Result<RunConfig, CliError> {
        let config = RunConfig {
            command: command.into(),
            input: Some(self.input.clone()),
            bandwidth: self.bandwidth.flags().mode()?,
            kernel: self.bandwidth.kernel()?,
            alpha: self.alpha,
            delta: None,
            methods: self.method.methods(),
            hypothesis: None,
            normalization: self.normalization.into(),
            exact_scaling: ExactScaling::default(),
            seed: None,
            output: output.clone(),
        };
        config.validate()?;
        Ok(config)
    }
}

/// The table named by flag or environment, or the bundled one.
pub fn load_table(path: &Option<PathBuf>) -> Result<WQuantileTable, CliError> {
    match path {
        None => Ok(WQuantileTable::bundled().clone()),
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|source| CliError::Io { path: p.clone(), source })?;
            let table = WQuantileTable::parse(&text)?;
            table.validate()?;
            Ok(table)
        }
    }
}
