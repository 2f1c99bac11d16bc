//! Replicated coverage and rejection studies.

use super::{derive_stream, generate, rng_for, ModelSpec, AR1_BURN_IN};
use crate::bandwidth::{choose, BandwidthChoice};
use crate::estimator::polar_decompose;
use crate::inference::{jackknife_ci_from_scale, pivotal_ci, test_equivalence, Method, QuantileSource, WQuantileTable};
use crate::parallel::map_collect;
use crate::variance::{jackknife_from_fit, JackknifeNormalization};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::fmt::Write as _;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub spec: ModelSpec,
    pub n_list: Vec<usize>,
    pub reps: usize,
    /// Confidence levels `1 − α` for coverage rows.
    pub levels: Vec<f64>,
    /// Thresholds `Δ` for rejection rows.
    pub deltas: Vec<f64>,
    /// Level of the equivalence test.
    pub alpha: f64,
    pub methods: Vec<Method>,
    pub choice: BandwidthChoice,
    pub normalization: JackknifeNormalization,
    /// The `M²` that intervals should cover.
    pub target: f64,
    pub seed: u64,
}

impl ExperimentConfig {
    fn validate(&self) -> Result<()> {
        if self.reps < 100 {
            return Err(Error::Config(format!("experiments need at least 100 replications, got {}", self.reps)));
        }
        if self.n_list.iter().any(|n| *n < 3) || self.n_list.is_empty() {
            return Err(Error::Config("every sample size must be at least 3".into()));
        }
        if self.methods.contains(&Method::Exact) {
            return Err(Error::Config("experiments cover the jackknife and pivotal methods only".into()));
        }
        self.spec.validate()
    }

    /// First 16 hex digits of the SHA-256 of the configuration's debug form.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(format!("{self:?}").as_bytes());
        digest.iter().take(8).fold(String::new(), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
    }
}

/// What one replication contributes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Replicate {
    pub n: usize,
    pub rep: usize,
    pub msq: f64,
    /// `σ̂_n/√n`.
    pub jackknife_scale: f64,
    pub vhat: f64,
    pub grid_index: Option<usize>,
}

/// Replications `0..reps` at size `n`; replication `r` draws from stream
/// [`derive_stream`]`(n, r)`.
pub fn replicate(
    spec: &ModelSpec,
    n: usize,
    reps: usize,
    choice: &BandwidthChoice,
    normalization: JackknifeNormalization,
    seed: u64,
) -> Result<Vec<Replicate>> {
    map_collect((0..reps).collect(), |rep| -> Result<Replicate> {
        let mut rng = rng_for(seed, derive_stream(n, rep));
        let sample = generate(spec, n, &mut rng)?;
        let chosen = choose(&polar_decompose(&sample)?, choice)?;
        let var = jackknife_from_fit(&chosen.fit, normalization)?;
        Ok(Replicate {
            n,
            rep,
            msq: chosen.fit.estimate.msq,
            jackknife_scale: var.jackknife_scale(),
            vhat: chosen.vhat,
            grid_index: chosen.grid.map(|g| g.0),
        })
    })
    .into_iter()
    .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub n: usize,
    pub method: Method,
    /// Confidence level for coverage rows.
    pub level: Option<f64>,
    /// Threshold for rejection rows.
    pub delta: Option<f64>,
    /// Coverage or rejection rate in percent.
    pub rate: f64,
    /// `100 √(r(1−r)/R)`.
    pub mc_se: f64,
    pub avg_width: Option<f64>,
    pub reps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SizeSummary {
    pub n: usize,
    pub mean_msq: f64,
    pub sd_msq: f64,
    pub mean_jackknife_scale: f64,
    pub mean_vhat: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub seed: u64,
    pub config_hash: String,
    pub config: ExperimentConfig,
    pub ar1_burn_in: Option<usize>,
    pub w_table: String,
    pub summaries: Vec<SizeSummary>,
    pub coverage: Vec<ReportRow>,
    pub rejection: Vec<ReportRow>,
}

fn rate_row(n: usize, method: Method, hits: usize, reps: usize) -> ReportRow {
    let r = hits as f64 / reps as f64;
    ReportRow {
        n,
        method,
        level: None,
        delta: None,
        rate: 100.0 * r,
        mc_se: 100.0 * (r * (1.0 - r) / reps as f64).sqrt(),
        avg_width: None,
        reps,
    }
}

fn summary(n: usize, reps: &[Replicate]) -> SizeSummary {
    let m = reps.len() as f64;
    let mean = reps.iter().map(|r| r.msq).sum::<f64>() / m;
    let var = reps.iter().map(|r| (r.msq - mean).powi(2)).sum::<f64>() / (m - 1.0);
    SizeSummary {
        n,
        mean_msq: mean,
        sd_msq: var.sqrt(),
        mean_jackknife_scale: reps.iter().map(|r| r.jackknife_scale).sum::<f64>() / m,
        mean_vhat: reps.iter().map(|r| r.vhat).sum::<f64>() / m,
    }
}

/// Coverage rows for one sample size.
pub fn coverage_rows(
    reps: &[Replicate],
    target: f64,
    levels: &[f64],
    methods: &[Method],
    table: &WQuantileTable,
) -> Result<Vec<ReportRow>> {
    let n = reps.first().map_or(0, |r| r.n);
    let mut rows = Vec::new();
    for &level in levels {
        let alpha = 1.0 - level;
        for &method in methods {
            let mut hits = 0;
            let mut width = 0.0;
            for r in reps {
                let ci = match method {
                    Method::Pivotal => pivotal_ci(r.msq, r.vhat, table, alpha)?,
                    _ => jackknife_ci_from_scale(r.msq, r.jackknife_scale, alpha)?,
                };
                hits += ci.contains(target) as usize;
                width += ci.width();
            }
            let mut row = rate_row(n, method, hits, reps.len());
            row.level = Some(level);
            row.avg_width = Some(width / reps.len() as f64);
            rows.push(row);
        }
    }
    Ok(rows)
}

/// Equivalence-test rejection rows for one sample size.
pub fn rejection_rows(
    reps: &[Replicate],
    deltas: &[f64],
    alpha: f64,
    methods: &[Method],
    table: &WQuantileTable,
) -> Result<Vec<ReportRow>> {
    let n = reps.first().map_or(0, |r| r.n);
    let mut rows = Vec::new();
    for &delta in deltas {
        for &method in methods {
            let mut hits = 0;
            for r in reps {
                let t = match method {
                    Method::Pivotal => test_equivalence(r.msq, r.vhat, QuantileSource::W(table), delta, alpha)?,
                    _ => test_equivalence(r.msq, r.jackknife_scale, QuantileSource::Normal, delta, alpha)?,
                };
                hits += t.reject as usize;
            }
            let mut row = rate_row(n, method, hits, reps.len());
            row.delta = Some(delta);
            rows.push(row);
        }
    }
    Ok(rows)
}

fn run(config: &ExperimentConfig, table: &WQuantileTable, coverage: bool, rejection: bool) -> Result<ExperimentReport> {
    config.validate()?;
    let mut report = ExperimentReport {
        seed: config.seed,
        config_hash: config.hash(),
        config: config.clone(),
        ar1_burn_in: config.spec.rho.map(|_| AR1_BURN_IN),
        w_table: format!("v{} seed={} paths={} steps={}", table.version, table.seed, table.paths, table.steps),
        summaries: Vec::new(),
        coverage: Vec::new(),
        rejection: Vec::new(),
    };
    for &n in &config.n_list {
        let reps = replicate(&config.spec, n, config.reps, &config.choice, config.normalization, config.seed)?;
        report.summaries.push(summary(n, &reps));
        if coverage {
            report.coverage.extend(coverage_rows(&reps, config.target, &config.levels, &config.methods, table)?);
        }
        if rejection {
            report.rejection.extend(rejection_rows(&reps, &config.deltas, config.alpha, &config.methods, table)?);
        }
    }
    Ok(report)
}

/// Coverage and average width of both intervals at every `n` and level.
pub fn run_coverage_experiment(config: &ExperimentConfig, table: &WQuantileTable) -> Result<ExperimentReport> {
    run(config, table, true, false)
}

/// Equivalence-test rejection rates at every `n` and `Δ`.
pub fn run_rejection_experiment(config: &ExperimentConfig, table: &WQuantileTable) -> Result<ExperimentReport> {
    run(config, table, false, true)
}

/// Both row kinds from one set of replications.
pub fn run_experiment(config: &ExperimentConfig, table: &WQuantileTable) -> Result<ExperimentReport> {
    run(config, table, true, true)
}

fn method_label(m: Method) -> &'static str {
    match m {
        Method::Jackknife => "JK",
        Method::Pivotal => "Piv",
        Method::Exact => "Exact",
    }
}

impl ExperimentReport {
    pub fn rate(&self, n: usize, method: Method, delta: Option<f64>) -> Option<&ReportRow> {
        let rows = if delta.is_some() { &self.rejection } else { &self.coverage };
        rows.iter().find(|r| r.n == n && r.method == method && r.delta == delta)
    }

    /// Layout of the published tables: one line per `n`.
    pub fn to_table_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# seed {} config {} W table {}", self.seed, self.config_hash, self.w_table);
        if let Some(b) = self.ar1_burn_in {
            let _ = writeln!(s, "# AR(1) burn-in {b}, stationary start");
        }
        let methods = &self.config.methods;
        let ns = &self.config.n_list;
        for &level in &self.config.levels {
            if self.coverage.is_empty() {
                break;
            }
            let _ = write!(s, "\ncoverage (%) and average width, level {level}\n{:>6}", "n");
            for m in methods {
                let _ = write!(s, " {:>8}", method_label(*m));
            }
            for m in methods {
                let _ = write!(s, " {:>8}", format!("w{}", method_label(*m)));
            }
            s.push('\n');
            for &n in ns {
                let _ = write!(s, "{n:>6}");
                let rows: Vec<&ReportRow> = methods
                    .iter()
                    .filter_map(|m| self.coverage.iter().find(|r| r.n == n && r.method == *m && r.level == Some(level)))
                    .collect();
                for r in &rows {
                    let _ = write!(s, " {:>8.1}", r.rate);
                }
                for r in &rows {
                    let _ = write!(s, " {:>8.2}", r.avg_width.unwrap_or(f64::NAN));
                }
                s.push('\n');
            }
        }
        if !self.rejection.is_empty() {
            let _ = write!(s, "\nrejection rate (%), alpha {}\n{:>6}", self.config.alpha, "n");
            for d in &self.config.deltas {
                for m in methods {
                    let _ = write!(s, " {:>11}", format!("{}@{d:.3}", method_label(*m)));
                }
            }
            s.push('\n');
            for &n in ns {
                let _ = write!(s, "{n:>6}");
                for d in &self.config.deltas {
                    for m in methods {
                        let rate = self.rate(n, *m, Some(*d)).map_or(f64::NAN, |r| r.rate);
                        let _ = write!(s, " {rate:>11.1}");
                    }
                }
                s.push('\n');
            }
        }
        let _ = writeln!(s, "\n{:>6} {:>10} {:>10} {:>10} {:>10}", "n", "mean", "sd", "jk se", "vhat");
        for m in &self.summaries {
            let _ = writeln!(
                s,
                "{:>6} {:>10.4} {:>10.4} {:>10.4} {:>10.4}",
                m.n, m.mean_msq, m.sd_msq, m.mean_jackknife_scale, m.mean_vhat
            );
        }
        s
    }
}
