//! One function per subcommand; each returns its JSON report.

use crate::args::{
    load_table, Cli, Command, DataArgs, DiagnoseArgs, Format, ModelArg, ModelArgs, OracleArgs, QuantilesArgs,
    RouteArg, SimulateArgs, TestArgs,
};
use crate::config::{BandwidthMode, RunConfig};
use crate::ingest::{ingest_csv, Ingested};
use crate::output::{emit, render};
use crate::{CliError, REPORT_SCHEMA_VERSION};
use serde_json::{json, Value};
use sphericity::bandwidth::{build_grid, choose, BandwidthChoice, Chosen, Preset};
use sphericity::estimator::{fit, Bandwidths};
use sphericity::inference::{
    adaptive_threshold, default_levels, jackknife_ci_from_scale, pivotal_ci, test_equivalence, test_exact,
    test_relevant, Hypothesis, Method, QuantileSource, WQuantileTable,
};
use sphericity::simulate::{
    oracle_by_estimator, oracle_msq, run_experiment, ExperimentConfig, ModelSpec,
};
use sphericity::variance::{jackknife_from_fit, plug_in_variance_from_fit, VarianceEstimates};

pub fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(CliError::Config("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| CliError::Config(format!("cannot configure {t} threads: {e}")))?;
    }
    let text = match &cli.command {
        Command::Quantiles(a) => {
            // The table file format is the product of this command.
            let table = cmd_quantiles(a)?;
            match cli.format {
                Format::Text => table.to_text(),
                Format::Json => render(&quantiles_json(&table), Format::Json),
            }
        }
        Command::Simulate(a) => {
            let table = load_table(&cli.w_table)?;
            let (report, text) = cmd_simulate(a, &table)?;
            match cli.format {
                Format::Text => text,
                Format::Json => render(&report, Format::Json),
            }
        }
        other => {
            let report = match other {
                Command::Estimate(a) => cmd_estimate(a, &cli.output)?,
                Command::Ci(a) => cmd_ci(a, &load_table(&cli.w_table)?, &cli.output)?,
                Command::Test(a) => cmd_test(a, &load_table(&cli.w_table)?, &cli.output)?,
                Command::Threshold(a) => cmd_threshold(a, &load_table(&cli.w_table)?, &cli.output)?,
                Command::Oracle(a) => cmd_oracle(a)?,
                Command::Diagnose(a) => cmd_diagnose(a)?,
                Command::Quantiles(_) | Command::Simulate(_) => unreachable!(),
            };
            render(&report, cli.format)
        }
    };
    emit(&text, &cli.output)
}

fn table_echo(t: &WQuantileTable) -> Value {
    json!({
        "version": t.version,
        "generator": t.generator,
        "seed": t.seed,
        "paths": t.paths,
        "steps": t.steps,
    })
}

fn envelope(command: &str, config: Value, result: Value) -> Value {
    json!({
        "schema_version": REPORT_SCHEMA_VERSION,
        "tool_version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "config": config,
        "result": result,
    })
}

/// A fitted data file with both scale estimates.
struct Fitted {
    data: Ingested,
    chosen: Chosen,
    jackknife: VarianceEstimates,
    s_hat_sq: f64,
}

fn fit_data(config: &RunConfig) -> Result<Fitted, CliError> {
    let path = config.input.as_ref().expect("data commands carry an input");
    let data = ingest_csv(path)?;
    let choice = config.choice()?;
    let polar = data.polar()?;
    let chosen = choose(&polar, &choice)?;
    let jackknife = jackknife_from_fit(&chosen.fit, config.normalization)?;
    let s_hat_sq = plug_in_variance_from_fit(&chosen.fit);
    Ok(Fitted { data, chosen, jackknife, s_hat_sq })
}

fn fit_echo(f: &Fitted) -> Value {
    let grid = f.chosen.grid.as_ref().map(|(index, vhats)| json!({"index": index, "vhats": vhats}));
    json!({
        "n": f.data.sample.n(),
        "p": f.data.sample.p(),
        "header": f.data.header,
        "bandwidths": f.chosen.bandwidths,
        "grid_selection": grid,
        "msq": f.chosen.fit.estimate.msq,
        "m1": f.chosen.fit.estimate.m1,
        "m2": f.chosen.fit.estimate.m2,
        "vhat": f.chosen.vhat,
        "jackknife_scale": f.jackknife.jackknife_scale(),
        "sigma_hat_sq": f.jackknife.sigma_hat_sq,
        "jackknife_degenerate": f.jackknife.degenerate,
        "s_hat_sq": f.s_hat_sq,
    })
}

fn scale_and_source<'a>(f: &Fitted, method: Method, table: &'a WQuantileTable) -> (f64, QuantileSource<'a>) {
    match method {
        Method::Pivotal => (f.chosen.vhat, QuantileSource::W(table)),
        _ => (f.jackknife.jackknife_scale(), QuantileSource::Normal),
    }
}

pub fn cmd_estimate(a: &DataArgs, output: &Option<std::path::PathBuf>) -> Result<Value, CliError> {
    let config = a.run_config("estimate", output)?;
    let f = fit_data(&config)?;
    Ok(envelope("estimate", json!(config), fit_echo(&f)))
}

pub fn cmd_ci(a: &DataArgs, table: &WQuantileTable, output: &Option<std::path::PathBuf>) -> Result<Value, CliError> {
    let config = a.run_config("ci", output)?;
    let f = fit_data(&config)?;
    let msq = f.chosen.fit.estimate.msq;
    let mut intervals = Vec::new();
    for &m in &config.methods {
        let ci = match m {
            Method::Pivotal => pivotal_ci(msq, f.chosen.vhat, table, config.alpha)?,
            _ => jackknife_ci_from_scale(msq, f.jackknife.jackknife_scale(), config.alpha)?,
        };
        intervals.push(json!(ci));
    }
    let result = json!({"estimate": fit_echo(&f), "intervals": intervals, "w_table": table_echo(table)});
    Ok(envelope("ci", json!(config), result))
}

pub fn cmd_test(a: &TestArgs, table: &WQuantileTable, output: &Option<std::path::PathBuf>) -> Result<Value, CliError> {
    let mut config = a.data.run_config("test", output)?;
    let hypothesis: Hypothesis = a.hypothesis.into();
    config.hypothesis = Some(hypothesis);
    config.delta = a.delta;
    config.exact_scaling = a.exact_scaling.into();
    config.validate()?;
    let f = fit_data(&config)?;
    let msq = f.chosen.fit.estimate.msq;
    let mut tests = Vec::new();
    if hypothesis == Hypothesis::ExactSphericity {
        config.methods = vec![Method::Exact];
        tests.push(json!(test_exact(msq, f.s_hat_sq, f.data.sample.n(), config.alpha, config.exact_scaling)?));
    } else {
        let delta = a.delta.ok_or_else(|| CliError::Config("--delta is required for this hypothesis".into()))?;
        for &m in &config.methods {
            let (scale, source) = scale_and_source(&f, m, table);
            let t = match hypothesis {
                Hypothesis::RelevantGreater => test_relevant(msq, scale, source, delta, config.alpha)?,
                _ => test_equivalence(msq, scale, source, delta, config.alpha)?,
            };
            tests.push(json!(t));
        }
    }
    let result = json!({"estimate": fit_echo(&f), "tests": tests, "w_table": table_echo(table)});
    Ok(envelope("test", json!(config), result))
}

pub fn cmd_threshold(a: &DataArgs, table: &WQuantileTable, output: &Option<std::path::PathBuf>) -> Result<Value, CliError> {
    let config = a.run_config("threshold", output)?;
    let f = fit_data(&config)?;
    let msq = f.chosen.fit.estimate.msq;
    let mut thresholds = Vec::new();
    for &m in &config.methods {
        let (scale, source) = scale_and_source(&f, m, table);
        let d = adaptive_threshold(msq, scale, source, config.alpha)?;
        thresholds.push(json!({"method": m, "alpha": config.alpha, "threshold": d}));
    }
    let result = json!({"estimate": fit_echo(&f), "thresholds": thresholds, "w_table": table_echo(table)});
    Ok(envelope("threshold", json!(config), result))
}

fn model_spec(m: &ModelArgs) -> Result<ModelSpec, CliError> {
    let spec = match m.model {
        ModelArg::Model1 => ModelSpec::model1(),
        ModelArg::Model2 => ModelSpec::model2(),
        ModelArg::Spherical => {
            if m.p < 2 {
                return Err(CliError::Config(format!("--p must be at least 2, got {}", m.p)));
            }
            ModelSpec::spherical(m.p)
        }
    };
    let spec = match m.ar1 {
        Some(rho) => spec.with_ar1(rho)?,
        None => spec,
    };
    spec.validate()?;
    Ok(spec)
}

/// The flagged bandwidth mode, or the preset matching the model's dimension.
fn model_choice(b: &crate::args::BandwidthArgs, spec: &ModelSpec) -> Result<(BandwidthMode, BandwidthChoice), CliError> {
    let kernel = b.kernel()?;
    let mode = match b.flags().mode()? {
        Some(mode) => mode,
        None => {
            let preset = [Preset::Model1P3, Preset::Model2P5]
                .into_iter()
                .find(|p| p.dimension() == spec.p())
                .ok_or_else(|| CliError::Config(format!("no preset for p = {}; give a bandwidth mode", spec.p())))?;
            BandwidthMode::Preset { name: preset.name().into() }
        }
    };
    let choice = mode.choice(&kernel)?;
    Ok((mode, choice))
}

pub fn cmd_simulate(a: &SimulateArgs, table: &WQuantileTable) -> Result<(Value, String), CliError> {
    let spec = model_spec(&a.model)?;
    let (mode, choice) = model_choice(&a.bandwidth, &spec)?;
    let (target, oracle) = match a.target {
        Some(t) => (t, None),
        None => {
            let o = oracle_msq(&spec, a.oracle_draws, a.seed)?;
            (o.msq, Some(o))
        }
    };
    let config = ExperimentConfig {
        spec,
        n_list: a.n.clone(),
        reps: a.reps,
        levels: a.levels.clone(),
        deltas: a.deltas.clone().unwrap_or_else(|| vec![target]),
        alpha: a.alpha,
        methods: vec![Method::Jackknife, Method::Pivotal],
        choice,
        normalization: a.normalization.into(),
        target,
        seed: a.seed,
    };
    let report = run_experiment(&config, table)?;
    let text = report.to_table_text();
    let echo = json!({"bandwidth": mode, "oracle_draws": a.oracle_draws, "w_table": table_echo(table)});
    let result = json!({"oracle": oracle, "report": report});
    Ok((envelope("simulate", echo, result), text))
}

pub fn cmd_quantiles(a: &QuantilesArgs) -> Result<WQuantileTable, CliError> {
    let levels = a.levels.clone().unwrap_or_else(default_levels);
    Ok(WQuantileTable::generate(&levels, a.paths, a.steps, a.seed)?)
}

fn quantiles_json(t: &WQuantileTable) -> Value {
    let rows: Vec<Value> = t.levels.iter().zip(&t.quantiles).map(|(l, q)| json!({"level": l, "quantile": q})).collect();
    envelope("quantiles", table_echo(t), json!({"median_se": t.median_se, "quantiles": rows}))
}

pub fn cmd_oracle(a: &OracleArgs) -> Result<Value, CliError> {
    let spec = model_spec(&a.model)?;
    match a.route {
        RouteArg::Quadrature => {
            let o = oracle_msq(&spec, a.draws, a.seed)?;
            let echo = json!({"spec": spec, "route": "quadrature", "draws": a.draws, "seed": a.seed});
            Ok(envelope("oracle", echo, json!(o)))
        }
        RouteArg::Estimator => {
            let (mode, choice) = model_choice(&a.bandwidth, &spec)?;
            let o = oracle_by_estimator(&spec, a.n, a.reps, &choice, a.seed)?;
            let echo = json!({"spec": spec, "route": "estimator", "bandwidth": mode, "n": a.n, "reps": a.reps, "seed": a.seed});
            Ok(envelope("oracle", echo, json!(o)))
        }
    }
}

fn spread(anchor: f64) -> Vec<f64> {
    (0..=10).map(|i| anchor * (0.5 + 0.1 * i as f64)).collect()
}

pub fn cmd_diagnose(a: &DiagnoseArgs) -> Result<Value, CliError> {
    let data = ingest_csv(&a.input)?;
    let polar = data.polar()?;
    let kernel = a.bandwidth.kernel()?;
    let mode = a.bandwidth.flags().mode()?.ok_or_else(|| {
        CliError::Config("diagnose needs an anchor: --h/--kappa, --preset or --a-list/--c-list".into())
    })?;
    let (h0, k0) = match &mode {
        BandwidthMode::Explicit { h, kappa } => (*h, *kappa),
        BandwidthMode::Preset { name } => {
            let g = Preset::from_name(name)?.grid(polar.n())?;
            g.entries[g.len() / 2]
        }
        BandwidthMode::Custom { a_list, c_list } => {
            let g = build_grid(polar.n(), polar.p(), a_list, c_list)?;
            g.entries[g.len() / 2]
        }
    };
    let curve = |pairs: Vec<(f64, f64)>| -> Result<Vec<Value>, CliError> {
        pairs
            .into_iter()
            .map(|(h, k)| {
                let bw = kernel.apply(Bandwidths::new(h, k)?)?;
                let msq = fit(&polar, bw)?.estimate.msq;
                Ok(json!({"h": h, "kappa": k, "msq": msq}))
            })
            .collect()
    };
    let hs = a.h_values.clone().unwrap_or_else(|| spread(h0));
    let ks = a.kappa_values.clone().unwrap_or_else(|| spread(k0));
    let h_curve = curve(hs.into_iter().map(|h| (h, k0)).collect())?;
    let k_curve = curve(ks.into_iter().map(|k| (h0, k)).collect())?;
    let echo = json!({"input": a.input, "bandwidth": mode, "kernel": kernel});
    let result = json!({
        "n": polar.n(),
        "p": polar.p(),
        "anchor": {"h": h0, "kappa": k0},
        "h_curve": h_curve,
        "kappa_curve": k_curve,
    });
    Ok(envelope("diagnose", echo, result))
}
