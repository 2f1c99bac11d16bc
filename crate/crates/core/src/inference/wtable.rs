//! Quantiles of `W = B(1) / ∫₀¹ |B(t) − t B(1)| dt`.
//!
//! Paths are simulated in blocks of [`BLOCK_PATHS`]; block `b` draws from
//! `ChaCha8Rng::seed_from_u64(seed)` on stream `b`, so the table depends on
//! `(seed, paths, steps)` only and never on the thread count.

use crate::parallel::map_collect;
use crate::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use std::fmt::Write as _;

pub const TABLE_VERSION: u32 = 1;
pub const GENERATOR: &str = "chacha8-stream-per-block1024-riemann-left";
pub const BLOCK_PATHS: usize = 1024;
pub const LEVEL_MATCH_TOL: f64 = 1e-12;

const BUNDLED: &str = include_str!("../../assets/w_quantiles_v1.txt");

#[derive(Debug, Clone, PartialEq)]
pub struct WQuantileTable {
    pub version: u32,
    pub generator: String,
    pub seed: u64,
    pub paths: usize,
    pub steps: usize,
    /// Standard error of the sample median, from the order statistics at
    /// `N/2 ± √N/2`.
    pub median_se: f64,
    pub levels: Vec<f64>,
    pub quantiles: Vec<f64>,
}

/// 0.001, 0.0025, 0.005, 0.01, 0.02, ..., 0.99, 0.995, 0.9975, 0.999, plus
/// 0.025 and 0.975.
pub fn default_levels() -> Vec<f64> {
    let mut v = vec![0.001, 0.0025, 0.005];
    v.extend((1..100).map(|k| k as f64 / 100.0));
    v.extend([0.025, 0.975, 0.995, 0.9975, 0.999]);
    v.sort_by(f64::total_cmp);
    v
}

/// One draw of `W` from a random walk with `steps` increments of variance `1/steps`.
fn draw_w<R: Rng>(rng: &mut R, steps: usize, buf: &mut [f64]) -> f64 {
    let sd = (steps as f64).recip().sqrt();
    let mut b = 0.0;
    for slot in buf.iter_mut() {
        let z: f64 = rng.sample(StandardNormal);
        b += sd * z;
        *slot = b;
    }
    let b1 = b;
    let dt = (steps as f64).recip();
    let mut acc = 0.0;
    for (k, bk) in buf.iter().enumerate() {
        let t = (k + 1) as f64 * dt;
        acc += (bk - t * b1).abs();
    }
    b1 / (acc * dt)
}

/// Raw `W` draws in path order.
pub fn simulate_w(paths: usize, steps: usize, seed: u64) -> Result<Vec<f64>> {
    if paths == 0 || steps < 2 {
        return Err(Error::Config(format!("W simulation needs paths >= 1 and steps >= 2, got {paths} and {steps}")));
    }
    let blocks: Vec<usize> = (0..paths.div_ceil(BLOCK_PATHS)).collect();
    let chunks = map_collect(blocks, |b| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(b as u64);
        let count = BLOCK_PATHS.min(paths - b * BLOCK_PATHS);
        let mut buf = vec![0.0; steps];
        (0..count).map(|_| draw_w(&mut rng, steps, &mut buf)).collect::<Vec<f64>>()
    });
    Ok(chunks.into_iter().flatten().collect())
}

/// Type-7 (linear interpolation) empirical quantile of sorted data.
pub fn empirical_quantile(sorted: &[f64], level: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * level;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

fn check_levels(levels: &[f64]) -> Result<()> {
    if levels.is_empty() {
        return Err(Error::Config("no probability levels requested".into()));
    }
    for w in levels.windows(2) {
        if w[1] <= w[0] {
            return Err(Error::Config(format!("levels must be strictly increasing, got {} then {}", w[0], w[1])));
        }
    }
    if let Some(l) = levels.iter().find(|l| !(**l > 0.0 && **l < 1.0)) {
        return Err(Error::Config(format!("probability level {l} is outside (0, 1)")));
    }
    Ok(())
}

impl WQuantileTable {
    pub fn generate(levels: &[f64], paths: usize, steps: usize, seed: u64) -> Result<Self> {
        check_levels(levels)?;
        let mut w = simulate_w(paths, steps, seed)?;
        w.sort_unstable_by(f64::total_cmp);
        let quantiles: Vec<f64> = levels.iter().map(|&l| empirical_quantile(&w, l)).collect();
        let n = w.len();
        let half = ((n as f64).sqrt() / 2.0).ceil() as usize;
        let mid = n / 2;
        let median_se = if n > 2 * half + 1 {
            0.5 * (w[(mid + half).min(n - 1)] - w[mid.saturating_sub(half)])
        } else {
            f64::NAN
        };
        let table = WQuantileTable {
            version: TABLE_VERSION,
            generator: GENERATOR.to_string(),
            seed,
            paths,
            steps,
            median_se,
            levels: levels.to_vec(),
            quantiles,
        };
        table.validate()?;
        Ok(table)
    }

    /// The table shipped with the crate: 10⁶ paths, 2000 steps.
    pub fn bundled() -> &'static WQuantileTable {
        static TABLE: std::sync::OnceLock<WQuantileTable> = std::sync::OnceLock::new();
        TABLE.get_or_init(|| WQuantileTable::parse(BUNDLED).expect("bundled W table is well formed"))
    }

    pub fn validate(&self) -> Result<()> {
        if self.levels.len() != self.quantiles.len() {
            return Err(Error::Table("levels and quantiles differ in length".into()));
        }
        check_levels(&self.levels).map_err(|e| Error::Table(e.to_string()))?;
        for (i, w) in self.quantiles.windows(2).enumerate() {
            if w[1] <= w[0] {
                return Err(Error::Table(format!(
                    "quantiles not strictly increasing at levels {} and {}",
                    self.levels[i],
                    self.levels[i + 1]
                )));
            }
        }
        Ok(())
    }

    /// Quantile at `level`, interpolating linearly between tabulated levels.
    pub fn quantile(&self, level: f64) -> Result<f64> {
        if let Some(i) = self.levels.iter().position(|l| (l - level).abs() <= LEVEL_MATCH_TOL) {
            return Ok(self.quantiles[i]);
        }
        let first = self.levels[0];
        let last = *self.levels.last().unwrap_or(&first);
        if !(level > first && level < last) {
            return Err(Error::Table(format!("level {level} lies outside the tabulated range [{first}, {last}]")));
        }
        let j = self.levels.partition_point(|l| *l < level);
        let (l0, l1) = (self.levels[j - 1], self.levels[j]);
        let (q0, q1) = (self.quantiles[j - 1], self.quantiles[j]);
        Ok(q0 + (level - l0) / (l1 - l0) * (q1 - q0))
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# quantiles of W = B(1) / int_0^1 |B(t) - t B(1)| dt");
        let _ = writeln!(s, "version = {}", self.version);
        let _ = writeln!(s, "generator = {}", self.generator);
        let _ = writeln!(s, "seed = {}", self.seed);
        let _ = writeln!(s, "paths = {}", self.paths);
        let _ = writeln!(s, "steps = {}", self.steps);
        let _ = writeln!(s, "median_se = {}", self.median_se);
        let _ = writeln!(s, "[quantiles]");
        for (l, q) in self.levels.iter().zip(&self.quantiles) {
            let _ = writeln!(s, "{l} = {q}");
        }
        s
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut version = None;
        let mut generator = None;
        let mut seed = None;
        let mut paths = None;
        let mut steps = None;
        let mut median_se = f64::NAN;
        let mut levels = Vec::new();
        let mut quantiles = Vec::new();
        let mut in_body = false;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if line == "[quantiles]" {
                in_body = true;
                continue;
            }
            let bad = |what: &str| Error::Table(format!("line {}: {what}: {line:?}", lineno + 1));
            let (k, v) = line.split_once('=').ok_or_else(|| bad("expected key = value"))?;
            let (k, v) = (k.trim(), v.trim());
            if in_body {
                levels.push(k.parse::<f64>().map_err(|_| bad("bad level"))?);
                quantiles.push(v.parse::<f64>().map_err(|_| bad("bad quantile"))?);
                continue;
            }
            match k {
                "version" => version = Some(v.parse::<u32>().map_err(|_| bad("bad version"))?),
                "generator" => generator = Some(v.to_string()),
                "seed" => seed = Some(v.parse::<u64>().map_err(|_| bad("bad seed"))?),
                "paths" => paths = Some(v.parse::<usize>().map_err(|_| bad("bad path count"))?),
                "steps" => steps = Some(v.parse::<usize>().map_err(|_| bad("bad step count"))?),
                "median_se" => median_se = v.parse::<f64>().map_err(|_| bad("bad median_se"))?,
                _ => return Err(bad("unknown key")),
            }
        }
        let missing = |k: &str| Error::Table(format!("missing header key {k}"));
        let version = version.ok_or_else(|| missing("version"))?;
        if version != TABLE_VERSION {
            return Err(Error::Table(format!("unsupported table version {version}")));
        }
        let table = WQuantileTable {
            version,
            generator: generator.ok_or_else(|| missing("generator"))?,
            seed: seed.ok_or_else(|| missing("seed"))?,
            paths: paths.ok_or_else(|| missing("paths"))?,
            steps: steps.ok_or_else(|| missing("steps"))?,
            median_se,
            levels,
            quantiles,
        };
        table.validate()?;
        Ok(table)
    }
}
