//! Run configuration: a strict TOML document plus `key=value` overrides.
//!
//! ```toml
//! model = "model2"   # model1 | model2 | custom:c0,c1
//! H = 0.9
//! seed = 1
//! ```
//!
//! The `model1`/`model2` presets fill `T`, `x0`, `theta0` and `sigma`; any of
//! them can still be overridden. Unknown keys are rejected.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::FbmParams;
use crate::fbm::{Grid, HurstParams};
use crate::montecarlo::{CorrelationSpec, ExperimentConfig, Mode};
use crate::sde::DriftModel;

pub const SEED_ENV: &str = "FSDE_DRIFT_SEED";

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    model: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    mode: Option<String>,
    #[serde(rename = "H", alias = "hurst", skip_serializing_if = "Option::is_none")]
    hurst: Option<f64>,
    #[serde(rename = "T", alias = "horizon", skip_serializing_if = "Option::is_none")]
    horizon: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    nu: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    sigma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    x0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    theta0: Option<f64>,
    #[serde(alias = "N", skip_serializing_if = "Option::is_none")]
    n_max: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    replications: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    c: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    d: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    max_iters: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    enforce_omega: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    correlation: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    vol: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    fresh_paths: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    thresholds: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    n_sweep: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    input: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    out: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    format: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    verbosity: Option<u8>,
    #[serde(skip_serializing_if = "Option::is_none")]
    timing: Option<bool>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl std::str::FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            _ => Err(Error::config("format", format!("expected csv or json, got `{s}`"))),
        }
    }
}

impl OutputFormat {
    fn as_str(&self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        }
    }
}

/// `start:step:count` → `start + k·step`, `k = 0..count`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdGrid {
    pub start: f64,
    pub step: f64,
    pub count: usize,
}

impl ThresholdGrid {
    pub fn values(&self) -> Vec<f64> {
        (0..self.count).map(|k| self.start + k as f64 * self.step).collect()
    }
}

impl std::str::FromStr for ThresholdGrid {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = |m: String| Error::config("thresholds", m);
        let parts: Vec<&str> = s.split(':').collect();
        let [start, step, count] = parts.as_slice() else {
            return Err(bad(format!("expected start:step:count, got `{s}`")));
        };
        let start: f64 = start.trim().parse().map_err(|e| bad(format!("start: {e}")))?;
        let step: f64 = step.trim().parse().map_err(|e| bad(format!("step: {e}")))?;
        let count: usize = count.trim().parse().map_err(|e| bad(format!("count: {e}")))?;
        if count == 0 {
            return Err(bad("empty threshold grid".into()));
        }
        if !(start.is_finite() && step.is_finite()) {
            return Err(bad("start and step must be finite".into()));
        }
        Ok(Self { start, step, count })
    }
}

impl std::fmt::Display for ThresholdGrid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:?}:{:?}:{}", self.start, self.step, self.count)
    }
}

/// Validated configuration of a CLI run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub experiment: ExperimentConfig,
    pub thresholds: Option<ThresholdGrid>,
    pub n_sweep: usize,
    pub input: Option<PathBuf>,
    pub out: PathBuf,
    pub format: OutputFormat,
    pub verbosity: u8,
    pub timing: bool,
}

struct Preset {
    horizon: f64,
    x0: f64,
    theta0: f64,
    sigma: f64,
}

fn preset(drift: &DriftModel) -> Preset {
    match drift {
        DriftModel::ArcTan => Preset {
            horizon: 0.1,
            x0: 5.0,
            theta0: 1.0,
            sigma: 0.25,
        },
        DriftModel::NegIdentity => Preset {
            horizon: 0.75,
            x0: 5.0,
            theta0: 1.0,
            sigma: 1.0,
        },
        DriftModel::Affine { .. } => Preset {
            horizon: 1.0,
            x0: 0.0,
            theta0: 1.0,
            sigma: 1.0,
        },
    }
}

fn parse_correlation(s: &str) -> Result<CorrelationSpec> {
    if s == "identity" {
        return Ok(CorrelationSpec::Identity);
    }
    let bad = || Error::config("correlation", format!("expected identity or block:q:rho, got `{s}`"));
    let parts: Vec<&str> = s.split(':').collect();
    match parts.as_slice() {
        ["block", q, rho] => Ok(CorrelationSpec::Block {
            q: q.parse().map_err(|_| bad())?,
            rho: rho.parse().map_err(|_| bad())?,
        }),
        _ => Err(bad()),
    }
}

fn correlation_id(c: &CorrelationSpec) -> String {
    match c {
        CorrelationSpec::Identity => "identity".into(),
        CorrelationSpec::Block { q, rho } => format!("block:{q}:{rho:?}"),
    }
}

/// Parses `key=value`, reading the value as a TOML literal and falling back to
/// a bare string (`model=model2` works without quotes).
pub fn parse_override(kv: &str) -> Result<(String, toml::Value)> {
    let (key, value) = kv
        .split_once('=')
        .ok_or_else(|| Error::config(kv, "override must look like key=value"))?;
    let key = key.trim().to_string();
    let value = value.trim();
    let parsed = toml::from_str::<toml::Table>(&format!("v = {value}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(value.to_string()));
    Ok((key, parsed))
}

fn field_of(message: &str) -> String {
    // toml/serde messages quote the offending key with backticks
    message
        .split('`')
        .nth(1)
        .map(str::to_string)
        .unwrap_or_else(|| "config".into())
}

impl RunConfig {
    /// Builds a configuration from an optional file and a list of overrides.
    pub fn load(path: Option<&Path>, overrides: &[(String, toml::Value)]) -> Result<Self> {
        let mut table = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
                toml::from_str::<toml::Table>(&text)
                    .map_err(|e| Error::config("config", format!("{}: {e}", p.display())))?
            }
            None => toml::Table::new(),
        };
        for (k, v) in overrides {
            table.insert(k.clone(), v.clone());
        }
        Self::from_table(table)
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let table = toml::from_str::<toml::Table>(text).map_err(|e| Error::config("config", e.to_string()))?;
        Self::from_table(table)
    }

    fn from_table(table: toml::Table) -> Result<Self> {
        let raw = RawConfig::deserialize(toml::Value::Table(table)).map_err(|e| {
            let msg = e.to_string();
            Error::config(field_of(&msg), msg)
        })?;
        Self::from_raw(raw)
    }

    fn from_raw(raw: RawConfig) -> Result<Self> {
        let model = raw.model.ok_or_else(|| Error::config("model", "missing drift model"))?;
        let drift: DriftModel = model.parse()?;
        let mode = match raw.mode.as_deref().unwrap_or("fbm") {
            "fbm" => Mode::Fbm,
            "bm" => Mode::Bm,
            other => return Err(Error::config("mode", format!("expected fbm or bm, got `{other}`"))),
        };
        let h = match (raw.hurst, mode) {
            (Some(h), _) => h,
            (None, Mode::Bm) => 0.5,
            (None, Mode::Fbm) => return Err(Error::config("H", "missing Hurst index")),
        };
        let hurst = HurstParams::new(h)?;
        let p = preset(&drift);
        let grid = Grid::new(raw.horizon.unwrap_or(p.horizon), raw.nu.unwrap_or(20))?;
        let sigma = raw.sigma.unwrap_or(p.sigma);
        if sigma == 0.0 || !sigma.is_finite() {
            return Err(Error::config("sigma", "must be nonzero and finite"));
        }
        let n_max = raw.n_max.unwrap_or(50);
        let seed = match raw.seed {
            Some(s) => s,
            None => match std::env::var(SEED_ENV) {
                Ok(v) => v
                    .parse()
                    .map_err(|e| Error::config("seed", format!("{SEED_ENV}={v}: {e}")))?,
                Err(_) => 0,
            },
        };
        let params = FbmParams {
            c: raw.c.unwrap_or(0.5),
            d_threshold: raw.d.unwrap_or(0.0),
            alpha: Some(raw.alpha.unwrap_or(0.05)),
            enforce_omega: raw.enforce_omega.unwrap_or(false),
            max_iters: raw.max_iters,
            tol: raw.tol.unwrap_or(1e-12),
        };
        let experiment = ExperimentConfig {
            drift,
            hurst,
            grid,
            sigma,
            x0: raw.x0.unwrap_or(p.x0),
            theta0: raw.theta0.unwrap_or(p.theta0),
            n_max,
            replications: raw.replications.unwrap_or(100),
            seed,
            params,
            correlation: parse_correlation(raw.correlation.as_deref().unwrap_or("identity"))?,
            mode,
            vol: raw.vol.as_deref().map(str::parse).transpose()?,
            fresh_paths: raw.fresh_paths.unwrap_or(false),
        };
        experiment.validate()?;
        let n_sweep = raw.n_sweep.unwrap_or(n_max);
        if n_sweep == 0 || n_sweep > n_max {
            return Err(Error::config("n_sweep", format!("must lie in 1..={n_max}")));
        }
        Ok(Self {
            experiment,
            thresholds: raw.thresholds.as_deref().map(str::parse).transpose()?,
            n_sweep,
            input: raw.input,
            out: raw.out.unwrap_or_else(|| PathBuf::from("out")),
            format: raw.format.as_deref().unwrap_or("csv").parse()?,
            verbosity: raw.verbosity.unwrap_or(0),
            timing: raw.timing.unwrap_or(false),
        })
    }

    /// The effective configuration as TOML; parsing it back yields `self`.
    pub fn to_toml(&self) -> String {
        let e = &self.experiment;
        let raw = RawConfig {
            model: Some(e.drift.to_string()),
            mode: Some(match e.mode {
                Mode::Fbm => "fbm".into(),
                Mode::Bm => "bm".into(),
            }),
            hurst: Some(e.hurst.h()),
            horizon: Some(e.grid.horizon()),
            nu: Some(e.grid.steps()),
            sigma: Some(e.sigma),
            x0: Some(e.x0),
            theta0: Some(e.theta0),
            n_max: Some(e.n_max),
            replications: Some(e.replications),
            seed: Some(e.seed),
            c: Some(e.params.c),
            d: Some(e.params.d_threshold),
            alpha: e.params.alpha,
            max_iters: e.params.max_iters,
            tol: Some(e.params.tol),
            enforce_omega: Some(e.params.enforce_omega),
            correlation: Some(correlation_id(&e.correlation)),
            vol: e.vol.map(|v| v.to_string()),
            fresh_paths: Some(e.fresh_paths),
            thresholds: self.thresholds.map(|t| t.to_string()),
            n_sweep: Some(self.n_sweep),
            input: self.input.clone(),
            out: Some(self.out.clone()),
            format: Some(self.format.as_str().into()),
            verbosity: Some(self.verbosity),
            timing: Some(self.timing),
        };
        toml::to_string(&raw).expect("plain scalar table always serializes")
    }
}

/// Keys accepted in a configuration document.
pub fn known_keys() -> BTreeMap<&'static str, &'static str> {
    BTreeMap::from([
        ("model", "drift model: model1 | model2 | custom:c0,c1"),
        ("mode", "fbm | bm"),
        ("H", "Hurst index in (0, 1)"),
        ("T", "time horizon"),
        ("nu", "number of grid steps (default 20)"),
        ("sigma", "noise coefficient"),
        ("x0", "initial value"),
        ("theta0", "true drift parameter used for simulation"),
        ("n_max", "number of copies N (default 50)"),
        ("replications", "number of trials (default 100)"),
        ("seed", "master seed"),
        ("c", "contraction constant (default 0.5)"),
        ("d", "truncation threshold on D_N (default 0)"),
        ("alpha", "confidence level parameter (default 0.05)"),
        ("max_iters", "fixed-point iterations (default: schedule, at least 30)"),
        ("tol", "fixed-point tolerance (default 1e-12)"),
        ("enforce_omega", "zero the estimate outside the contraction event"),
        ("correlation", "identity | block:q:rho"),
        ("vol", "bm-mode volatility: const:c | clamp:lower:upper"),
        ("fresh_paths", "resample paths for every N instead of reusing prefixes"),
        ("thresholds", "sweep grid start:step:count"),
        ("n_sweep", "sample size used by the sweep (default n_max)"),
        ("input", "CSV of observed paths for `estimate`"),
        ("out", "output directory"),
        ("format", "csv | json"),
        ("verbosity", "log level 0-3"),
        ("timing", "record wall-clock seconds in summaries"),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_model2() {
        let c = RunConfig::from_toml_str("model = \"model2\"\nH = 0.9\nseed = 1\n").unwrap();
        let e = &c.experiment;
        assert_eq!(e.grid.horizon(), 0.75);
        assert_eq!(e.grid.steps(), 20);
        assert_eq!((e.x0, e.theta0, e.sigma), (5.0, 1.0, 1.0));
        assert_eq!(e.params.c, 0.5);
        assert_eq!(e.params.alpha, Some(0.05));
        assert_eq!(e.params.tol, 1e-12);
        assert!(!e.params.enforce_omega);
        assert_eq!(e.seed, 1);
    }

    #[test]
    fn model1_preset() {
        let c = RunConfig::from_toml_str("model = \"model1\"\nH = 0.7\n").unwrap();
        assert_eq!(c.experiment.grid.horizon(), 0.1);
        assert_eq!(c.experiment.sigma, 0.25);
    }

    #[test]
    fn range_errors_name_the_field() {
        let err = RunConfig::from_toml_str("model = \"model2\"\nH = 1.2\n").unwrap_err();
        assert!(matches!(&err, Error::Config { field, .. } if field == "H"), "{err}");
        let err = RunConfig::from_toml_str("model = \"model2\"\nH = 0.9\nsigma = 0.0\n").unwrap_err();
        assert!(matches!(&err, Error::Config { field, .. } if field == "sigma"), "{err}");
        let err = RunConfig::from_toml_str("model = \"model2\"\nH = 0.9\nc = 1.0\n").unwrap_err();
        assert!(matches!(&err, Error::Config { field, .. } if field == "c"), "{err}");
    }

    #[test]
    fn unknown_keys_rejected() {
        let err = RunConfig::from_toml_str("model = \"model2\"\nH = 0.9\nsigmaa = 1.0\n").unwrap_err();
        assert!(matches!(&err, Error::Config { field, .. } if field == "sigmaa"), "{err}");
    }

    #[test]
    fn round_trip() {
        let c = RunConfig::from_toml_str(
            "model = \"custom:1.5,-0.25\"\nH = 0.65\nT = 0.3\nnu = 7\nsigma = 0.1\nn_max = 12\n\
             correlation = \"block:3:0.2\"\nthresholds = \"0.5:0.1:31\"\nmax_iters = 45\n",
        )
        .unwrap();
        let again = RunConfig::from_toml_str(&c.to_toml()).unwrap();
        assert_eq!(c, again);

        let bm = RunConfig::from_toml_str("model = \"model2\"\nmode = \"bm\"\nvol = \"clamp:0.5:9\"\n").unwrap();
        assert_eq!(bm.experiment.hurst.h(), 0.5);
        assert_eq!(RunConfig::from_toml_str(&bm.to_toml()).unwrap(), bm);
    }

    #[test]
    fn overrides() {
        assert_eq!(parse_override("H=0.7").unwrap(), ("H".into(), toml::Value::Float(0.7)));
        assert_eq!(
            parse_override("model=model1").unwrap(),
            ("model".into(), toml::Value::String("model1".into()))
        );
        assert_eq!(parse_override("nu = 8").unwrap().1, toml::Value::Integer(8));
        assert!(parse_override("novalue").is_err());
        let c = RunConfig::load(
            None,
            &[parse_override("model=model2").unwrap(), parse_override("H=0.8").unwrap()],
        )
        .unwrap();
        assert_eq!(c.experiment.hurst.h(), 0.8);
    }

    #[test]
    fn bm_mode_forces_brownian() {
        let err = RunConfig::from_toml_str("model = \"model2\"\nmode = \"bm\"\nH = 0.7\n").unwrap_err();
        assert!(matches!(&err, Error::Config { field, .. } if field == "H"));
    }

    #[test]
    fn threshold_grids() {
        let g: ThresholdGrid = "0.5:0.1:31".parse().unwrap();
        assert_eq!(g.values().len(), 31);
        assert!((g.values()[30] - 3.5).abs() < 1e-12);
        let g: ThresholdGrid = "1:0.5:31".parse().unwrap();
        assert_eq!(g.values()[30], 16.0);
        assert!("1:0.5:0".parse::<ThresholdGrid>().is_err());
        assert!("1:0.5".parse::<ThresholdGrid>().is_err());
    }
}
