use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use dexp3m::analysis::{
    ratio_audit, regret_report, simplex_audit, virtual_slot_map, VirtualSlotMap,
};
use dexp3m::environment::{run_experiment, DelaySchedule};
use dexp3m::feedback::DeliveryOrder;
use dexp3m::policy::PolicyParams;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{ExperimentConfig, LoadedConfig, SweepAxis};
use crate::error::{CliError, Result};
use crate::output::{
    mean_stderr, write_json, write_run_tables, write_scaling, ScalingRow, SeedResult,
};

/// Runs one seed and every post-run check. Returns the result and any
/// invariant breaches found.
pub fn run_seed(config: &ExperimentConfig, seed: u64) -> Result<(SeedResult, Vec<String>)> {
    let record = run_experiment(&config.run_config(seed))?;
    let report = regret_report(&record)?;
    let slots = VirtualSlotMap::from_run(&record)?;
    let trajectory = record.trajectory.as_deref().unwrap_or_default();
    let ratios = ratio_audit(trajectory, &record.params);
    let simplex = simplex_audit(trajectory, &record.params);

    let mut breaches = Vec::new();
    let check = slots.check(&record.schedule);
    if !check.passed() {
        breaches.push(format!("seed {seed}: staleness identities failed: {check:?}"));
    }
    if !simplex.passed() {
        breaches.push(format!("seed {seed}: simplex audit failed: {simplex:?}"));
    }
    if !ratios.passed() {
        breaches.push(format!("seed {seed}: ratio audit failed: {ratios:?}"));
    }
    Ok((
        SeedResult {
            seed,
            params: record.params,
            total_delay: record.schedule.total_delay(),
            report,
            slots,
            ratios,
            simplex,
        },
        breaches,
    ))
}

#[derive(Debug, Serialize)]
struct SeedParams {
    seed: u64,
    params: PolicyParams,
}

#[derive(Debug, Serialize)]
struct Metadata<'a> {
    tool: &'static str,
    version: &'static str,
    config_path: &'a Path,
    config_sha256: &'a str,
    policy: &'a str,
    estimation: &'static str,
    delivery_order: &'static str,
    seeds: &'a [u64],
    #[serde(skip_serializing_if = "Option::is_none")]
    sweep_point: Option<(String, usize)>,
    parameters: Vec<SeedParams>,
    config: &'a ExperimentConfig,
}

/// Result of a `run`: per-seed results sorted by seed.
#[derive(Debug)]
pub struct RunOutcome {
    pub output_dir: PathBuf,
    pub results: Vec<SeedResult>,
}

fn execute(
    loaded: &LoadedConfig,
    config: &ExperimentConfig,
    dir: &Path,
    sweep_point: Option<(String, usize)>,
) -> Result<RunOutcome> {
    let mut seeds = config.experiment.seeds.clone();
    seeds.sort_unstable();
    let outcomes: Vec<(SeedResult, Vec<String>)> = seeds
        .par_iter()
        .map(|&seed| run_seed(config, seed))
        .collect::<Result<_>>()?;
    let (results, breaches): (Vec<_>, Vec<_>) = outcomes.into_iter().unzip();

    write_run_tables(dir, &results)?;
    let meta = Metadata {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        config_path: &loaded.path,
        config_sha256: &loaded.hash,
        policy: &config.experiment.policy,
        estimation: config.experiment.estimation.as_str(),
        delivery_order: config.experiment.delivery_order.as_str(),
        seeds: &seeds,
        sweep_point,
        parameters: results
            .iter()
            .map(|r| SeedParams {
                seed: r.seed,
                params: r.params,
            })
            .collect(),
        config,
    };
    write_json(&dir.join("metadata.json"), &meta)?;

    let breaches: Vec<String> = breaches.into_iter().flatten().collect();
    if !breaches.is_empty() {
        return Err(CliError::Invariant(breaches.join("; ")));
    }
    Ok(RunOutcome {
        output_dir: dir.to_path_buf(),
        results,
    })
}

pub fn run(loaded: &LoadedConfig, output: Option<&Path>) -> Result<RunOutcome> {
    let dir = output.unwrap_or(&loaded.config.experiment.output_dir);
    execute(loaded, &loaded.config, dir, None)
}

#[derive(Debug)]
pub struct SweepOutcome {
    pub output_dir: PathBuf,
    pub axis: SweepAxis,
    pub rows: Vec<ScalingRow>,
}

/// Runs the config once per axis value into `<out>/<axis>=<value>/` and
/// writes `<out>/scaling.csv`.
pub fn sweep(loaded: &LoadedConfig, output: Option<&Path>) -> Result<SweepOutcome> {
    let spec = loaded
        .config
        .sweep
        .as_ref()
        .ok_or_else(|| CliError::Config("`sweep` needs a [sweep] table".into()))?;
    let dir = output.unwrap_or(&loaded.config.experiment.output_dir);
    let points: Vec<ExperimentConfig> = spec
        .values
        .iter()
        .map(|&v| loaded.config.at_axis(spec.axis, v))
        .collect::<Result<_>>()?;

    let mut rows = Vec::with_capacity(points.len());
    for (value, config) in spec.values.iter().zip(&points) {
        let sub = dir.join(format!("{}={value}", spec.axis));
        let outcome = execute(loaded, config, &sub, Some((spec.axis.to_string(), *value)))?;
        let pseudo: Vec<f64> = outcome.results.iter().map(|r| r.report.pseudo_regret).collect();
        let realized: Vec<f64> = outcome.results.iter().map(|r| r.report.realized_regret).collect();
        let bounds: Vec<f64> = outcome.results.iter().map(|r| r.report.bound_value).collect();
        rows.push(ScalingRow {
            value: *value,
            seeds: outcome.results.len(),
            pseudo: mean_stderr(&pseudo),
            realized: mean_stderr(&realized),
            bound: mean_stderr(&bounds).mean,
        });
    }
    write_scaling(dir, &spec.axis.to_string(), &rows)?;
    Ok(SweepOutcome {
        output_dir: dir.to_path_buf(),
        axis: spec.axis,
        rows,
    })
}

/// Human-readable summary of a valid config, including the tuned
/// parameters for the first seed.
pub fn validate(loaded: &LoadedConfig) -> Result<String> {
    let c = &loaded.config;
    let e = &c.experiment;
    let run = c.run_config(e.seeds[0]);
    let mut streams = dexp3m::environment::Streams::from_seed(run.seed);
    let schedule = run.delays.build()?.schedule(run.horizon, &mut streams.delays)?;
    let p = run.params_for(&schedule)?;

    let mut out = String::new();
    let _ = writeln!(out, "config       {}", loaded.path.display());
    let _ = writeln!(out, "sha256       {}", loaded.hash);
    let _ = writeln!(out, "K={} k={} T={} seeds={:?}", e.arms, e.plays, e.horizon, e.seeds);
    let _ = writeln!(
        out,
        "policy={} estimation={} delivery_order={}",
        e.policy,
        e.estimation.as_str(),
        e.delivery_order.as_str()
    );
    let _ = writeln!(
        out,
        "delays={} d_bar={} losses={}",
        c.delays.kind, c.delays.d_bar, c.losses.kind
    );
    let _ = writeln!(
        out,
        "seed {}: D={} gamma={} delta1={} delta2={} feasible={}{}",
        run.seed,
        schedule.total_delay(),
        p.gamma,
        p.delta1,
        p.delta2,
        p.feasible,
        if p.gamma_clamped { " (gamma clamped)" } else { "" }
    );
    if let Some(s) = &c.sweep {
        let _ = writeln!(out, "sweep {} over {:?}", s.axis, s.values);
    }
    Ok(out)
}

/// Virtual-slot table for the three-round schedule with delays (2, 0, 0).
pub fn demo_table2(order: DeliveryOrder) -> Result<String> {
    let schedule = DelaySchedule::new(vec![2, 0, 0], 2)?;
    let map = virtual_slot_map(&schedule, order)?;
    let mut out = String::new();
    let _ = writeln!(out, "T = 3, delays d_1 = 2, d_2 = 0, d_3 = 0 ({})", order.as_str());
    let line = |label: &str, values: Vec<String>| format!("{label:<14}{}\n", values.join("  "));
    out.push_str(&line("tau", map.rows.iter().map(|r| r.tau.to_string()).collect()));
    out.push_str(&line("t(tau)", map.t_of_tau().iter().map(|v| v.to_string()).collect()));
    out.push_str(&line(
        "L_{t(tau)-1}",
        map.l_before().iter().map(|v| v.to_string()).collect(),
    ));
    out.push_str(&line("s~_tau", map.s_tilde().iter().map(|v| v.to_string()).collect()));
    Ok(out)
}
