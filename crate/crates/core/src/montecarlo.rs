//! Replicated experiments.
//!
//! A trial draws one bundle of `N_max` noise paths from its own stream
//! (`derive_seed(master, [trial])`), solves the SDE once and evaluates the
//! estimator on the prefixes `X^1..X^N`. With `fresh_paths` set, every `N`
//! gets its own bundle from stream `[trial, N]` instead.
//!
//! Trials run on a rayon pool of the requested size. Results are collected
//! in trial order and reduced sequentially, so reports do not depend on the
//! number of workers.

use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::estimators::{estimate_bm, ConfidenceInterval, FbmParams, PreparedPaths};
use crate::fbm::{block_correlation, CrossCorrelation, FbmSampler, Grid, HurstParams, PathBundle};
use crate::linalg::Matrix;
use crate::rng::stream;
use crate::sde::{euler_additive, euler_multiplicative, DriftModel, SdeSpec, VolModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Fbm,
    Bm,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum CorrelationSpec {
    Identity,
    /// Clusters of `q` consecutive copies with correlation `rho`.
    Block { q: usize, rho: f64 },
}

impl CorrelationSpec {
    /// Correlation among the first `n` copies.
    pub fn build(&self, n: usize) -> Result<CrossCorrelation> {
        match *self {
            CorrelationSpec::Identity => Ok(CrossCorrelation::identity(n)),
            CorrelationSpec::Block { q, rho } if n.is_multiple_of(q) => block_correlation(n, q, rho),
            CorrelationSpec::Block { q, rho } => {
                let m = Matrix::from_fn(n, n, |i, k| {
                    if i == k {
                        1.0
                    } else if i / q == k / q {
                        rho
                    } else {
                        0.0
                    }
                });
                CrossCorrelation::new(m)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub drift: DriftModel,
    pub hurst: HurstParams,
    pub grid: Grid,
    pub sigma: f64,
    pub x0: f64,
    pub theta0: f64,
    pub n_max: usize,
    pub replications: usize,
    pub seed: u64,
    pub params: FbmParams,
    pub correlation: CorrelationSpec,
    pub mode: Mode,
    /// Volatility for `bm` mode; `None` means constant `sigma`.
    pub vol: Option<VolModel>,
    pub fresh_paths: bool,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.replications == 0 {
            return Err(Error::config("replications", "at least one replication is required"));
        }
        if self.n_max == 0 {
            return Err(Error::config("n_max", "at least one path is required"));
        }
        match self.mode {
            Mode::Bm if !self.hurst.is_brownian() => {
                return Err(Error::config("H", "bm mode requires H = 0.5"));
            }
            Mode::Fbm if self.hurst.h() <= 0.5 => {
                return Err(Error::config("H", "fbm mode requires H > 0.5"));
            }
            _ => {}
        }
        if let CorrelationSpec::Block { q, rho } = self.correlation {
            block_correlation(self.n_max, q, rho)
                .map_err(|e| Error::config("correlation", e.to_string()))?;
        }
        if let Some(vol) = &self.vol {
            vol.validate()?;
        }
        let p = &self.params;
        if !(p.c > 0.0 && p.c < 1.0) {
            return Err(Error::config("c", format!("must lie in (0, 1), got {}", p.c)));
        }
        if !(p.d_threshold >= 0.0) {
            return Err(Error::config("d", format!("must be nonnegative, got {}", p.d_threshold)));
        }
        if let Some(alpha) = p.alpha {
            if !(alpha > 0.0 && alpha < 1.0) {
                return Err(Error::config("alpha", format!("must lie in (0, 1), got {alpha}")));
            }
        }
        if p.max_iters == Some(0) {
            return Err(Error::config("max_iters", "must be at least 1"));
        }
        if !(p.tol >= 0.0) {
            return Err(Error::config("tol", format!("must be nonnegative, got {}", p.tol)));
        }
        self.spec().map(|_| ())
    }

    pub fn spec(&self) -> Result<SdeSpec> {
        SdeSpec::new(self.x0, self.theta0, self.sigma, self.drift, self.hurst, self.grid)
    }

    fn vol(&self) -> VolModel {
        self.vol.unwrap_or(VolModel::Constant(self.sigma))
    }

    /// Noise and solution bundles of `n` paths drawn from `rng`.
    pub fn simulate(&self, n: usize, rng: &mut crate::rng::StreamRng) -> Result<(PathBundle, PathBundle)> {
        let sampler = FbmSampler::new(self.hurst, self.grid, self.correlation.build(n)?)?;
        let noise = sampler.sample(rng);
        let spec = self.spec()?;
        let solution = match self.mode {
            Mode::Fbm => euler_additive(&spec, &noise)?,
            Mode::Bm => euler_multiplicative(&spec, &self.vol(), &noise)?,
        };
        Ok((noise, solution))
    }
}

/// Estimator output at one sample size.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrajectoryPoint {
    pub n: usize,
    /// Reported estimate: `θ̃_N` (fbm) or `θ̂_{N,n}` (bm) with the configured
    /// truncations applied. `None` when the estimator failed at this `N`.
    pub estimate: Option<f64>,
    pub aci: Option<ConfidenceInterval>,
    pub omega_holds: Option<bool>,
    pub d_n: Option<f64>,
    /// The estimate before the `D_N ≥ 𝔡` truncation, used by sweeps: `θ̃_N`
    /// (or `θ̃_N · 1_{Ω_N}` with `enforce_omega`) in fbm mode, `θ̂_{N,n}` in bm mode.
    pub gated: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialResult {
    pub trial: u64,
    pub trajectory: Vec<TrajectoryPoint>,
    /// `|estimate(N_max) − θ₀|`.
    pub final_error: Option<f64>,
}

impl TrialResult {
    pub fn last(&self) -> &TrajectoryPoint {
        self.trajectory.last().expect("trajectories are never empty")
    }

    pub fn at(&self, n: usize) -> Option<&TrajectoryPoint> {
        self.trajectory.iter().find(|p| p.n == n)
    }
}

fn failed_point(n: usize, e: Error) -> TrajectoryPoint {
    TrajectoryPoint {
        n,
        estimate: None,
        aci: None,
        omega_holds: None,
        d_n: None,
        gated: None,
        error: Some(e.to_string()),
    }
}

fn estimate_prefixes(
    config: &ExperimentConfig,
    solution: &PathBundle,
    sizes: &[usize],
) -> Vec<TrajectoryPoint> {
    match config.mode {
        Mode::Fbm => {
            let prepared = match PreparedPaths::new(solution, config.drift, config.hurst) {
                Ok(p) => p,
                Err(e) => {
                    let msg = e.to_string();
                    return sizes
                        .iter()
                        .map(|&n| failed_point(n, Error::InvalidInput(msg.clone())))
                        .collect();
                }
            };
            sizes
                .iter()
                .map(|&n| match prepared.estimate(n, config.sigma, &config.params) {
                    Ok(est) => {
                        let gated_by_omega = if config.params.enforce_omega {
                            est.theta_tilde_c
                        } else {
                            est.theta_tilde
                        };
                        let reported = if est.d_n >= config.params.d_threshold {
                            gated_by_omega
                        } else {
                            0.0
                        };
                        TrajectoryPoint {
                            n,
                            estimate: Some(reported),
                            aci: est.aci,
                            omega_holds: Some(est.omega_holds),
                            d_n: Some(est.d_n),
                            gated: Some(gated_by_omega),
                            error: None,
                        }
                    }
                    Err(e) => failed_point(n, e),
                })
                .collect()
        }
        Mode::Bm => {
            let vol = config.vol();
            sizes
                .iter()
                .map(|&n| {
                    let result = solution.prefix(n).and_then(|p| {
                        estimate_bm(
                            &p,
                            &config.drift,
                            Some(&vol),
                            config.params.d_threshold,
                            config.params.alpha,
                        )
                    });
                    match result {
                        Ok(est) => TrajectoryPoint {
                            n,
                            estimate: Some(est.theta_hat_d),
                            aci: est.aci,
                            omega_holds: None,
                            d_n: Some(est.d_nn),
                            gated: est.theta_hat,
                            error: None,
                        },
                        Err(e) => failed_point(n, e),
                    }
                })
                .collect()
        }
    }
}

/// One trial evaluated at the given sample sizes (each in `1..=N_max`).
/// The final error refers to the largest size.
pub fn run_trial_at(config: &ExperimentConfig, trial: u64, sizes: &[usize]) -> Result<TrialResult> {
    if sizes.is_empty() || sizes.iter().any(|&n| n == 0 || n > config.n_max) {
        return Err(Error::InvalidInput(format!(
            "sample sizes must lie in 1..={}",
            config.n_max
        )));
    }
    let mut sizes = sizes.to_vec();
    sizes.sort_unstable();
    sizes.dedup();
    let trajectory = if config.fresh_paths {
        sizes
            .iter()
            .flat_map(|&n| {
                let mut rng = stream(config.seed, &[trial, n as u64]);
                match config.simulate(n, &mut rng) {
                    Ok((_, solution)) => estimate_prefixes(config, &solution, &[n]),
                    Err(e) => vec![failed_point(n, e)],
                }
            })
            .collect()
    } else {
        let max = *sizes.iter().max().expect("non-empty");
        let mut rng = stream(config.seed, &[trial]);
        let (_, solution) = config.simulate(config.n_max, &mut rng)?;
        let solution = if max < config.n_max { solution.prefix(max)? } else { solution };
        estimate_prefixes(config, &solution, &sizes)
    };
    let final_error = trajectory
        .last()
        .and_then(|p| p.estimate)
        .map(|e| (e - config.theta0).abs());
    Ok(TrialResult {
        trial,
        trajectory,
        final_error,
    })
}

/// Full trajectory `N = 1..=N_max`.
pub fn run_trial(config: &ExperimentConfig, trial: u64) -> Result<TrialResult> {
    let sizes: Vec<usize> = (1..=config.n_max).collect();
    run_trial_at(config, trial, &sizes)
}

/// Runs `replications` trials on `workers` threads (all cores when `None`).
pub fn run_trials(
    config: &ExperimentConfig,
    sizes: &[usize],
    workers: Option<usize>,
) -> Result<Vec<TrialResult>> {
    config.validate()?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(w) = workers {
        builder = builder.num_threads(w.max(1));
    }
    let pool = builder
        .build()
        .map_err(|e| Error::InvalidInput(format!("cannot start worker pool: {e}")))?;
    pool.install(|| {
        (0..config.replications as u64)
            .into_par_iter()
            .map(|trial| run_trial_at(config, trial, sizes))
            .collect()
    })
}

/// Arithmetic mean and population standard deviation (divisor `R`).
pub fn summarize(errors: &[f64]) -> Result<(f64, f64)> {
    if errors.is_empty() {
        return Err(Error::InvalidInput("cannot summarize an empty list".into()));
    }
    let r = errors.len() as f64;
    let mean = errors.iter().sum::<f64>() / r;
    let var = errors.iter().map(|e| (e - mean) * (e - mean)).sum::<f64>() / r;
    Ok((mean, var.sqrt()))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdPoint {
    pub threshold: f64,
    pub mean_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryReport {
    pub model: String,
    pub hurst: f64,
    pub n: usize,
    pub replications: usize,
    pub mean_error: f64,
    pub std_error: f64,
    /// Fraction of trials whose interval at `N` contains `θ₀`; trials without
    /// an interval count as misses. `None` when no level was requested.
    pub coverage: Option<f64>,
    pub failed_trials: usize,
    pub thresholds: Vec<ThresholdPoint>,
    pub seconds: f64,
}

fn summary_from_trials(config: &ExperimentConfig, n: usize, trials: &[TrialResult], started: Instant) -> Result<SummaryReport> {
    let errors: Vec<f64> = trials
        .iter()
        .filter_map(|t| t.at(n).and_then(|p| p.estimate))
        .map(|e| (e - config.theta0).abs())
        .collect();
    let failed = trials.len() - errors.len();
    let (mean_error, std_error) = summarize(&errors).map_err(|_| {
        Error::DegenerateStatistics("the estimator failed on every trial".into())
    })?;
    let coverage = config.params.alpha.map(|_| {
        let hits = trials
            .iter()
            .filter(|t| {
                t.at(n)
                    .and_then(|p| p.aci)
                    .is_some_and(|ci| ci.contains(config.theta0))
            })
            .count();
        hits as f64 / trials.len() as f64
    });
    Ok(SummaryReport {
        model: config.drift.to_string(),
        hurst: config.hurst.h(),
        n,
        replications: config.replications,
        mean_error,
        std_error,
        coverage,
        failed_trials: failed,
        thresholds: Vec::new(),
        seconds: started.elapsed().as_secs_f64(),
    })
}

/// Trials with full trajectories plus the summary at `N_max`.
pub fn run_experiment_with_trials(
    config: &ExperimentConfig,
    workers: Option<usize>,
) -> Result<(SummaryReport, Vec<TrialResult>)> {
    let started = Instant::now();
    let sizes: Vec<usize> = (1..=config.n_max).collect();
    let trials = run_trials(config, &sizes, workers)?;
    let summary = summary_from_trials(config, config.n_max, &trials, started)?;
    Ok((summary, trials))
}

pub fn run_experiment(config: &ExperimentConfig, workers: Option<usize>) -> Result<SummaryReport> {
    run_experiment_with_trials(config, workers).map(|(s, _)| s)
}

/// Interval coverage at `N_max` only.
pub fn coverage_experiment(config: &ExperimentConfig, workers: Option<usize>) -> Result<SummaryReport> {
    if config.params.alpha.is_none() {
        return Err(Error::config("alpha", "coverage needs a confidence level"));
    }
    let started = Instant::now();
    let trials = run_trials(config, &[config.n_max], workers)?;
    summary_from_trials(config, config.n_max, &trials, started)
}

/// Mean error of the `𝔡`-truncated estimate for each threshold, all
/// thresholds sharing the same simulated trials (with `enforce_omega` this is
/// `|θ̃^{𝔠,𝔡}_N − θ₀|`). The summary's own mean/std describe `𝔡 = 0`.
pub fn threshold_sweep(
    config: &ExperimentConfig,
    thresholds: &[f64],
    n_fixed: usize,
    workers: Option<usize>,
) -> Result<SummaryReport> {
    if thresholds.is_empty() {
        return Err(Error::InvalidInput("threshold grid is empty".into()));
    }
    if n_fixed == 0 || n_fixed > config.n_max {
        return Err(Error::InvalidInput(format!(
            "sweep sample size {n_fixed} outside 1..={}",
            config.n_max
        )));
    }
    let started = Instant::now();
    let trials = run_trials(config, &[n_fixed], workers)?;
    // (D_N, gated estimate) per successful trial
    let points: Vec<(f64, f64)> = trials
        .iter()
        .filter_map(|t| {
            let p = t.at(n_fixed)?;
            Some((p.d_n?, p.gated?))
        })
        .collect();
    let failed = trials.len() - points.len();
    let errors_at = |d: f64| -> Vec<f64> {
        points
            .iter()
            .map(|&(d_n, est)| {
                let truncated = if d_n >= d { est } else { 0.0 };
                (truncated - config.theta0).abs()
            })
            .collect()
    };
    let (mean_error, std_error) = summarize(&errors_at(0.0))
        .map_err(|_| Error::DegenerateStatistics("the estimator failed on every trial".into()))?;
    let thresholds = thresholds
        .iter()
        .map(|&d| {
            summarize(&errors_at(d)).map(|(m, _)| ThresholdPoint {
                threshold: d,
                mean_error: m,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SummaryReport {
        model: config.drift.to_string(),
        hurst: config.hurst.h(),
        n: n_fixed,
        replications: config.replications,
        mean_error,
        std_error,
        coverage: None,
        failed_trials: failed,
        thresholds,
        seconds: started.elapsed().as_secs_f64(),
    })
}
