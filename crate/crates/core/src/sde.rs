//! Drift and volatility catalogs, Euler schemes and regeneration copies.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::fbm::{BundleKind, Grid, HurstParams, PathBundle};
use crate::linalg::Matrix;

/// Drift function `b` of `dX = θ₀ b(X) dt + σ dB`, with its derivative,
/// an antiderivative and the bounds the estimator needs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DriftModel {
    /// `b(x) = π − arctan(x)`.
    ArcTan,
    /// `b(x) = −x` (Ornstein–Uhlenbeck).
    NegIdentity,
    /// `b(x) = intercept + slope · x`.
    Affine { intercept: f64, slope: f64 },
}

impl DriftModel {
    pub fn constant(c: f64) -> Self {
        DriftModel::Affine {
            intercept: c,
            slope: 0.0,
        }
    }

    pub fn b(&self, x: f64) -> f64 {
        match *self {
            DriftModel::ArcTan => PI - x.atan(),
            DriftModel::NegIdentity => -x,
            DriftModel::Affine { intercept, slope } => intercept + slope * x,
        }
    }

    pub fn b_prime(&self, x: f64) -> f64 {
        match *self {
            DriftModel::ArcTan => -1.0 / (1.0 + x * x),
            DriftModel::NegIdentity => -1.0,
            DriftModel::Affine { slope, .. } => slope,
        }
    }

    /// Antiderivative of `b`, integration constant 0.
    pub fn antiderivative(&self, x: f64) -> f64 {
        match *self {
            DriftModel::ArcTan => PI * x - x * x.atan() + 0.5 * x.mul_add(x, 1.0).ln(),
            DriftModel::NegIdentity => -0.5 * x * x,
            DriftModel::Affine { intercept, slope } => intercept * x + 0.5 * slope * x * x,
        }
    }

    /// `M = sup b′`.
    pub fn sup_b_prime(&self) -> f64 {
        match *self {
            DriftModel::ArcTan => 0.0,
            DriftModel::NegIdentity => -1.0,
            DriftModel::Affine { slope, .. } => slope,
        }
    }

    /// `‖b′‖_∞`.
    pub fn sup_norm_b_prime(&self) -> f64 {
        match *self {
            DriftModel::ArcTan | DriftModel::NegIdentity => 1.0,
            DriftModel::Affine { slope, .. } => slope.abs(),
        }
    }

    /// A constant `𝔟 > 0` with `b(x)² ≥ 𝔟` everywhere, when one is known.
    pub fn square_lower_bound(&self) -> Option<f64> {
        match *self {
            DriftModel::ArcTan => Some(PI * PI / 4.0),
            DriftModel::NegIdentity => None,
            DriftModel::Affine { intercept, slope } => {
                (slope == 0.0 && intercept != 0.0).then_some(intercept * intercept)
            }
        }
    }
}

impl FromStr for DriftModel {
    type Err = Error;

    /// `model1`, `model2`, or `custom:c0[,c1]` (polynomial coefficients of
    /// `b`, lowest degree first; degree above one has an unbounded derivative).
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "model1" => Ok(DriftModel::ArcTan),
            "model2" => Ok(DriftModel::NegIdentity),
            _ => {
                let coeffs = s
                    .strip_prefix("custom:")
                    .ok_or_else(|| Error::config("model", format!("unknown drift model `{s}`")))?;
                let parsed: Vec<f64> = coeffs
                    .split(',')
                    .map(|c| {
                        c.trim().parse::<f64>().map_err(|e| {
                            Error::config("model", format!("bad coefficient `{c}`: {e}"))
                        })
                    })
                    .collect::<Result<_>>()?;
                if parsed.iter().any(|c| !c.is_finite()) {
                    return Err(Error::config("model", "coefficients must be finite"));
                }
                let degree = parsed.iter().rposition(|&c| c != 0.0).unwrap_or(0);
                if degree > 1 {
                    return Err(Error::config(
                        "model",
                        "polynomial drift of degree above one has an unbounded derivative",
                    ));
                }
                Ok(DriftModel::Affine {
                    intercept: parsed[0],
                    slope: parsed.get(1).copied().unwrap_or(0.0),
                })
            }
        }
    }
}

impl fmt::Display for DriftModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DriftModel::ArcTan => write!(f, "model1"),
            DriftModel::NegIdentity => write!(f, "model2"),
            DriftModel::Affine { intercept, slope } => write!(f, "custom:{intercept:?},{slope:?}"),
        }
    }
}

/// State-dependent noise coefficient for the Brownian (`H = 1/2`) model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum VolModel {
    Constant(f64),
    /// `σ(x) = clamp(x, lower, upper)` with `0 < lower < upper`.
    ClampedIdentity { lower: f64, upper: f64 },
}

impl VolModel {
    pub fn validate(&self) -> Result<()> {
        match *self {
            VolModel::Constant(c) if c != 0.0 && c.is_finite() => Ok(()),
            VolModel::Constant(c) => Err(Error::config("vol", format!("constant volatility {c} must be nonzero"))),
            VolModel::ClampedIdentity { lower, upper } if lower > 0.0 && upper > lower && upper.is_finite() => Ok(()),
            VolModel::ClampedIdentity { lower, upper } => Err(Error::config(
                "vol",
                format!("clamp bounds need 0 < lower < upper, got ({lower}, {upper})"),
            )),
        }
    }

    pub fn sigma(&self, x: f64) -> f64 {
        match *self {
            VolModel::Constant(c) => c,
            VolModel::ClampedIdentity { lower, upper } => x.clamp(lower, upper),
        }
    }

    pub fn sigma_prime(&self, x: f64) -> f64 {
        match *self {
            VolModel::Constant(_) => 0.0,
            VolModel::ClampedIdentity { lower, upper } => {
                if x > lower && x < upper {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// `μ` with `|σ(x)| ≥ μ`.
    pub fn lower_bound(&self) -> f64 {
        match *self {
            VolModel::Constant(c) => c.abs(),
            VolModel::ClampedIdentity { lower, .. } => lower,
        }
    }

    /// `‖σ‖_∞`.
    pub fn upper_bound(&self) -> f64 {
        match *self {
            VolModel::Constant(c) => c.abs(),
            VolModel::ClampedIdentity { upper, .. } => upper,
        }
    }
}

impl FromStr for VolModel {
    type Err = Error;

    /// `const:c` or `clamp:lower:upper`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let num = |p: &str| {
            p.parse::<f64>()
                .map_err(|e| Error::config("vol", format!("bad number `{p}`: {e}")))
        };
        let vol = match parts.as_slice() {
            ["const", c] => VolModel::Constant(num(c)?),
            ["clamp", lo, hi] => VolModel::ClampedIdentity {
                lower: num(lo)?,
                upper: num(hi)?,
            },
            _ => return Err(Error::config("vol", format!("unknown volatility model `{s}`"))),
        };
        vol.validate()?;
        Ok(vol)
    }
}

impl fmt::Display for VolModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VolModel::Constant(c) => write!(f, "const:{c:?}"),
            VolModel::ClampedIdentity { lower, upper } => write!(f, "clamp:{lower:?}:{upper:?}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SdeSpec {
    pub x0: f64,
    pub theta0: f64,
    pub sigma: f64,
    pub drift: DriftModel,
    pub hurst: HurstParams,
    pub grid: Grid,
}

impl SdeSpec {
    pub fn new(
        x0: f64,
        theta0: f64,
        sigma: f64,
        drift: DriftModel,
        hurst: HurstParams,
        grid: Grid,
    ) -> Result<Self> {
        if sigma == 0.0 || !sigma.is_finite() {
            return Err(Error::config("sigma", "noise coefficient must be nonzero and finite"));
        }
        if !x0.is_finite() {
            return Err(Error::config("x0", "initial value must be finite"));
        }
        if !theta0.is_finite() {
            return Err(Error::config("theta0", "drift parameter must be finite"));
        }
        Ok(Self {
            x0,
            theta0,
            sigma,
            drift,
            hurst,
            grid,
        })
    }
}

fn check_noise(spec: &SdeSpec, noise: &PathBundle) -> Result<()> {
    if noise.grid() != &spec.grid {
        return Err(Error::GridMismatch(format!(
            "noise grid {:?} differs from model grid {:?}",
            noise.grid(),
            spec.grid
        )));
    }
    if noise.kind() != BundleKind::Noise {
        return Err(Error::InvalidInput("Euler scheme needs a noise bundle".into()));
    }
    Ok(())
}

fn euler_with(
    spec: &SdeSpec,
    noise: &PathBundle,
    diffusion: impl Fn(f64) -> f64,
) -> Result<PathBundle> {
    let dt = spec.grid.mesh();
    let cols = spec.grid.steps() + 1;
    let mut values = Matrix::zeros(noise.len(), cols);
    for (i, b) in noise.paths().enumerate() {
        let row = values.row_mut(i);
        row[0] = spec.x0;
        for j in 0..cols - 1 {
            let x = row[j];
            row[j + 1] = x + spec.theta0 * spec.drift.b(x) * dt + diffusion(x) * (b[j + 1] - b[j]);
        }
    }
    PathBundle::new(spec.grid, values, BundleKind::Solution)
}

/// `X_{j+1} = X_j + θ₀ b(X_j) Δ + σ (B_{j+1} − B_j)`, row by row from `x₀`.
pub fn euler_additive(spec: &SdeSpec, noise: &PathBundle) -> Result<PathBundle> {
    check_noise(spec, noise)?;
    let sigma = spec.sigma;
    euler_with(spec, noise, |_| sigma)
}

/// Euler–Maruyama for `dX = θ₀ b(X) dt + σ(X) dB` with Brownian noise;
/// `spec.sigma` is ignored in favour of `vol`.
pub fn euler_multiplicative(spec: &SdeSpec, vol: &VolModel, noise: &PathBundle) -> Result<PathBundle> {
    if !spec.hurst.is_brownian() {
        return Err(Error::InvalidInput(format!(
            "multiplicative noise requires H = 1/2, got {}",
            spec.hurst.h()
        )));
    }
    check_noise(spec, noise)?;
    euler_with(spec, noise, |x| vol.sigma(x))
}

/// Copies cut out of one long trajectory at its successive returns to `x₀`.
#[derive(Debug, Clone, PartialEq)]
pub struct RegenerationCopies {
    /// Node index (in the long path) at which each copy starts.
    pub start_nodes: Vec<usize>,
    /// Copies as a bundle on `[0, copy_horizon]`; `None` when none fit.
    pub bundle: Option<PathBundle>,
}

impl RegenerationCopies {
    pub fn count(&self) -> usize {
        self.start_nodes.len()
    }
}

/// Splits a single long path into up to `max_copies` segments of length
/// `copy_horizon`. The first starts at `t = 0`; each following one starts at
/// the first node `t_j > τ + T` with `(X_j − x₀)(X_{j−1} − x₀) ≤ 0`.
///
/// Independence of the copies relies on the process being recurrent (e.g.
/// `b′ ≤ −c < 0` with `θ₀ > 0`); this is not checked.
pub fn extract_regeneration_copies(
    long_path: &PathBundle,
    x0: f64,
    copy_horizon: f64,
    max_copies: usize,
) -> Result<RegenerationCopies> {
    if long_path.len() != 1 {
        return Err(Error::InvalidInput(format!(
            "expected a single long path, got {}",
            long_path.len()
        )));
    }
    let mesh = long_path.grid().mesh();
    let ratio = copy_horizon / mesh;
    let window = ratio.round() as usize;
    if window == 0 || (ratio - window as f64).abs() > 1e-9 * ratio.max(1.0) {
        return Err(Error::GridMismatch(format!(
            "mesh {mesh} does not divide the copy horizon {copy_horizon}"
        )));
    }
    let x = long_path.path(0);
    let last = x.len() - 1;
    let mut starts = Vec::new();
    let mut start = Some(0usize);
    while let Some(s) = start {
        if starts.len() == max_copies || s + window > last {
            break;
        }
        starts.push(s);
        start = (s + window + 1..=last).find(|&j| (x[j] - x0) * (x[j - 1] - x0) <= 0.0);
    }
    let bundle = if starts.is_empty() {
        None
    } else {
        let grid = Grid::new(copy_horizon, window)?;
        let rows: Vec<Vec<f64>> = starts.iter().map(|&s| x[s..=s + window].to_vec()).collect();
        Some(PathBundle::from_rows(grid, &rows, BundleKind::Solution)?)
    };
    Ok(RegenerationCopies {
        start_nodes: starts,
        bundle,
    })
}
