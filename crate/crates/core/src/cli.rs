//! Subcommands behind the `fsde-drift` binary. Each writes its files under
//! `config.out` and returns the paths written.
//!
//! Bundles for `simulate` and for `estimate` without `input` come from the
//! stream of trial 0, so they are exactly the paths of the first trial of an
//! `experiment` with the same configuration.

use std::path::PathBuf;

use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::estimators::{estimate_bm, estimate_fbm};
use crate::fbm::{BundleKind, PathBundle};
use crate::montecarlo::{coverage_experiment, run_experiment_with_trials, threshold_sweep, Mode, SummaryReport};
use crate::output::{bundle_table, read_bundle, write_file, Cell, Table};
use crate::rng::stream;

fn prepare_out(config: &RunConfig) -> Result<()> {
    std::fs::create_dir_all(&config.out).map_err(|e| Error::io(&config.out, e))
}

fn first_trial_bundles(config: &RunConfig) -> Result<(PathBundle, PathBundle)> {
    let e = &config.experiment;
    let mut rng = stream(e.seed, &[0]);
    e.simulate(e.n_max, &mut rng)
}

/// Writes `noise` and `paths` bundles (`t,path_1,…,path_N`).
pub fn cmd_simulate(config: &RunConfig) -> Result<Vec<PathBuf>> {
    prepare_out(config)?;
    let (noise, solution) = first_trial_bundles(config)?;
    Ok(vec![
        bundle_table(&noise).write(&config.out, "noise", config.format)?,
        bundle_table(&solution).write(&config.out, "paths", config.format)?,
    ])
}

fn finite_or_null(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        Value::Null
    }
}

/// Estimates `θ₀` from `config.input` (a bundle CSV) or from freshly simulated
/// paths, writes `estimate.json` and returns the record.
pub fn cmd_estimate(config: &RunConfig) -> Result<(Value, PathBuf)> {
    let e = &config.experiment;
    let paths = match &config.input {
        Some(p) => read_bundle(p, BundleKind::Solution)?,
        None => first_trial_bundles(config)?.1,
    };
    let record = match e.mode {
        Mode::Fbm => {
            let est = estimate_fbm(&paths, &e.drift, e.hurst, e.sigma, &e.params)?;
            if !est.theta_tilde.is_finite() && !e.params.enforce_omega {
                return Err(Error::NumericDegeneracy(format!(
                    "estimate is not finite (R_N = {}, I_N = {})",
                    est.r_n, est.i_n
                )));
            }
            json!({
                "theta_tilde": finite_or_null(est.theta_tilde),
                "R_N": finite_or_null(est.r_n),
                "iterations": est.iterations,
                "residual": finite_or_null(est.residual),
                "D_N": est.d_n,
                "I_N": est.i_n,
                "M_N": finite_or_null(est.m_n),
                "omega_holds": est.omega_holds,
                "theta_tilde_c": finite_or_null(est.theta_tilde_c),
                "theta_tilde_cd": finite_or_null(est.theta_tilde_cd),
                "aci_lower": est.aci.map(|c| c.lower),
                "aci_upper": est.aci.map(|c| c.upper),
                "N": est.n_paths,
            })
        }
        Mode::Bm => {
            let vol = e.vol.unwrap_or(crate::sde::VolModel::Constant(e.sigma));
            let est = estimate_bm(&paths, &e.drift, Some(&vol), e.params.d_threshold, e.params.alpha)?;
            let Some(theta_hat) = est.theta_hat else {
                return Err(Error::DegenerateStatistics("D_{N,n} = 0".into()));
            };
            json!({
                "theta_hat": theta_hat,
                "theta_hat_d": est.theta_hat_d,
                "D_Nn": est.d_nn,
                "V_Nn": est.v_nn,
                "d": est.d_threshold,
                "Ybar": est.ybar,
                "aci_lower": est.aci.map(|c| c.lower),
                "aci_upper": est.aci.map(|c| c.upper),
                "N": est.n_paths,
            })
        }
    };
    prepare_out(config)?;
    let path = config.out.join("estimate.json");
    let mut text = serde_json::to_string_pretty(&record).expect("json values serialize");
    text.push('\n');
    write_file(&path, &text)?;
    Ok((record, path))
}

fn summary_table(config: &RunConfig, report: &SummaryReport) -> Table {
    let mut t = Table::new([
        "model",
        "H",
        "N_max",
        "replications",
        "mean_error",
        "std_error",
        "coverage",
        "seconds",
    ]);
    // wall time varies between runs; it is only written on request
    let seconds = if config.timing {
        Cell::Float(report.seconds)
    } else {
        Cell::Empty
    };
    t.push(vec![
        report.model.as_str().into(),
        report.hurst.into(),
        report.n.into(),
        report.replications.into(),
        report.mean_error.into(),
        report.std_error.into(),
        report.coverage.into(),
        seconds,
    ]);
    t
}

/// Writes `summary` (at `N_max`) and `trajectories` (`N = 1..=N_max` for every trial).
pub fn cmd_experiment(config: &RunConfig, workers: Option<usize>) -> Result<(SummaryReport, Vec<PathBuf>)> {
    prepare_out(config)?;
    let (report, trials) = run_experiment_with_trials(&config.experiment, workers)?;
    let mut traj = Table::new(["trial", "N", "estimate", "aci_lower", "aci_upper"]);
    for trial in &trials {
        for p in &trial.trajectory {
            traj.push(vec![
                trial.trial.into(),
                p.n.into(),
                p.estimate.into(),
                p.aci.map(|c| c.lower).into(),
                p.aci.map(|c| c.upper).into(),
            ]);
        }
    }
    if report.failed_trials > 0 {
        log::warn!("{} of {} trials failed at N_max", report.failed_trials, report.replications);
    }
    let files = vec![
        summary_table(config, &report).write(&config.out, "summary", config.format)?,
        traj.write(&config.out, "trajectories", config.format)?,
    ];
    Ok((report, files))
}

/// Writes `sweep` (`threshold,mean_error`) at sample size `n_sweep`.
pub fn cmd_sweep(config: &RunConfig, workers: Option<usize>) -> Result<(SummaryReport, PathBuf)> {
    let grid = config
        .thresholds
        .ok_or_else(|| Error::config("thresholds", "sweep needs a grid start:step:count"))?;
    prepare_out(config)?;
    let report = threshold_sweep(&config.experiment, &grid.values(), config.n_sweep, workers)?;
    let mut t = Table::new(["threshold", "mean_error"]);
    for p in &report.thresholds {
        t.push(vec![p.threshold.into(), p.mean_error.into()]);
    }
    let path = t.write(&config.out, "sweep", config.format)?;
    Ok((report, path))
}

/// Writes `coverage` with the summary columns, coverage evaluated at `N_max`.
pub fn cmd_coverage(config: &RunConfig, workers: Option<usize>) -> Result<(SummaryReport, PathBuf)> {
    prepare_out(config)?;
    let report = coverage_experiment(&config.experiment, workers)?;
    let path = summary_table(config, &report).write(&config.out, "coverage", config.format)?;
    Ok((report, path))
}

/// One-line human summary used by the binary.
pub fn describe(report: &SummaryReport) -> String {
    let mut s = format!(
        "model={} H={} N={} replications={} mean_error={} std_error={}",
        report.model, report.hurst, report.n, report.replications, report.mean_error, report.std_error
    );
    if let Some(c) = report.coverage {
        s.push_str(&format!(" coverage={c}"));
    }
    if report.failed_trials > 0 {
        s.push_str(&format!(" failed_trials={}", report.failed_trials));
    }
    s
}
