//! Fixed-point estimator of `θ₀` for `H > 1/2`.
//!
//! All integrals are replaced by left-point Riemann sums on the observation
//! grid. The kernel `|t − s|^{2H−2}` only ever meets distinct nodes: the inner
//! sums run over `l < j`.
//!
//! [`PreparedPaths`] walks each path once and caches, per pair `(j, l)` with
//! `l < j`, the weight `b′(X_j)(t_j − t_l)^{2H−2}Δ²` and the exponent
//! `C(t_j) − C(t_l)`. Evaluating `Φ_N` is then one exp-and-dot-product pass,
//! and estimates on any prefix `X^1..X^n` reuse the same cache.

use serde::Serialize;

use super::fixed_point::{fixed_point, FixedPoint};
use super::normal::normal_quantile;
use super::stats::{
    check_omega, cumulative_b_prime, in_from_increments, m_n, path_antiderivative_increment,
    path_b_square_sum, OmegaCheck, SufficientStats,
};
use super::thresholds::iteration_schedule;
use crate::error::{Error, Result};
use crate::fbm::{Grid, HurstParams, PathBundle};
use crate::sde::DriftModel;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FbmParams {
    /// Contraction constant `𝔠 ∈ (0, 1)`.
    pub c: f64,
    /// Truncation threshold `𝔡 ≥ 0` on `D_N`.
    pub d_threshold: f64,
    /// ACI level; `None` skips the interval.
    pub alpha: Option<f64>,
    /// Skip the iteration (and zero the estimate) outside `Ω_N`.
    pub enforce_omega: bool,
    /// Picard steps; `None` uses [`iteration_schedule`].
    pub max_iters: Option<usize>,
    pub tol: f64,
}

impl Default for FbmParams {
    fn default() -> Self {
        Self {
            c: 0.5,
            d_threshold: 0.0,
            alpha: Some(0.05),
            enforce_omega: false,
            max_iters: None,
            tol: 1e-12,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConfidenceInterval {
    pub lower: f64,
    pub upper: f64,
    pub alpha: f64,
}

impl ConfidenceInterval {
    pub fn contains(&self, x: f64) -> bool {
        self.lower <= x && x <= self.upper
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimateFbm {
    pub n_paths: usize,
    /// `θ̃_N = I_N + R_N`; NaN when `Ω_N` is enforced and fails.
    pub theta_tilde: f64,
    pub r_n: f64,
    pub iterations: usize,
    pub residual: f64,
    pub d_n: f64,
    pub i_n: f64,
    pub m_n: f64,
    pub omega: OmegaCheck,
    pub omega_holds: bool,
    pub c: f64,
    pub d_threshold: f64,
    /// `θ̃_N · 1_{Ω_N}`.
    pub theta_tilde_c: f64,
    /// `θ̃_N · 1_{Ω_N ∩ {D_N ≥ 𝔡}}`.
    pub theta_tilde_cd: f64,
    pub aci: Option<ConfidenceInterval>,
    pub ybar: Option<f64>,
}

/// Per-path quantities shared by every estimate computed from a bundle.
#[derive(Debug, Clone)]
pub struct PreparedPaths {
    grid: Grid,
    hurst: HurstParams,
    drift: DriftModel,
    b_square_sums: Vec<f64>,
    antiderivative_increments: Vec<f64>,
    pair_offsets: Vec<usize>,
    pair_weights: Vec<f64>,
    pair_exponents: Vec<f64>,
    /// `Σ_{j≠k} |b(X_j)||b(X_k)| |t_j − t_k|^{2H−2} Δ²`, left-point nodes.
    ybar_double: Vec<f64>,
    /// `(Σ_{j≥1} b′(X_j) Σ_{l<j} (t_j − t_l)^{2H−2} Δ²)²`.
    ybar_quadruple: Vec<f64>,
}

impl PreparedPaths {
    pub fn new(paths: &PathBundle, drift: DriftModel, hurst: HurstParams) -> Result<Self> {
        if hurst.h() <= 0.5 {
            return Err(Error::InvalidInput(format!(
                "the fixed-point estimator needs H > 1/2, got {}",
                hurst.h()
            )));
        }
        let grid = *paths.grid();
        let steps = grid.steps();
        let dt = grid.mesh();
        let dt2 = dt * dt;
        let nodes = grid.nodes();
        let exponent = 2.0 * hurst.h() - 2.0;
        // kernel[j][l] = (t_j − t_l)^{2H−2}
        let kernel = |j: usize, l: usize| (nodes[j] - nodes[l]).abs().powf(exponent);

        let n = paths.len();
        let pairs_per_path = steps * (steps + 1) / 2;
        let mut prepared = Self {
            grid,
            hurst,
            drift,
            b_square_sums: Vec::with_capacity(n),
            antiderivative_increments: Vec::with_capacity(n),
            pair_offsets: Vec::with_capacity(n + 1),
            pair_weights: Vec::with_capacity(n * pairs_per_path),
            pair_exponents: Vec::with_capacity(n * pairs_per_path),
            ybar_double: Vec::with_capacity(n),
            ybar_quadruple: Vec::with_capacity(n),
        };
        prepared.pair_offsets.push(0);

        let mut kernel_table = vec![0.0; (steps + 1) * (steps + 1)];
        for j in 0..=steps {
            for l in 0..=steps {
                if j != l {
                    kernel_table[j * (steps + 1) + l] = kernel(j, l);
                }
            }
        }
        let k = |j: usize, l: usize| kernel_table[j * (steps + 1) + l];

        for path in paths.paths() {
            prepared.b_square_sums.push(path_b_square_sum(path, &drift, dt));
            prepared
                .antiderivative_increments
                .push(path_antiderivative_increment(path, &drift));
            let cum = cumulative_b_prime(path, &drift, dt);
            let mut quad_inner = 0.0;
            for j in 1..=steps {
                let bp = drift.b_prime(path[j]);
                let mut row = 0.0;
                for l in 0..j {
                    prepared.pair_weights.push(bp * k(j, l) * dt2);
                    prepared.pair_exponents.push(cum[j] - cum[l]);
                    row += k(j, l) * dt2;
                }
                quad_inner += bp * row;
            }
            prepared.pair_offsets.push(prepared.pair_weights.len());
            prepared.ybar_quadruple.push(quad_inner * quad_inner);

            let abs_b: Vec<f64> = path[..steps].iter().map(|&x| drift.b(x).abs()).collect();
            let mut double = 0.0;
            for j in 0..steps {
                for l in 0..steps {
                    if j != l {
                        double += abs_b[j] * abs_b[l] * k(j, l) * dt2;
                    }
                }
            }
            prepared.ybar_double.push(double);
        }
        Ok(prepared)
    }

    pub fn len(&self) -> usize {
        self.b_square_sums.len()
    }

    pub fn is_empty(&self) -> bool {
        self.b_square_sums.is_empty()
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    fn check_prefix(&self, n: usize) -> Result<()> {
        if n == 0 || n > self.len() {
            return Err(Error::InvalidInput(format!(
                "prefix of {n} paths requested from {} prepared paths",
                self.len()
            )));
        }
        Ok(())
    }

    /// `D_N` on the first `n` paths.
    pub fn d_n(&self, n: usize) -> Result<f64> {
        self.check_prefix(n)?;
        let s: f64 = self.b_square_sums[..n].iter().sum();
        Ok(s / (n as f64 * self.grid.horizon()))
    }

    /// `I_N` on the first `n` paths.
    pub fn i_n(&self, n: usize, d_n: f64) -> Result<f64> {
        self.check_prefix(n)?;
        let s: f64 = self.antiderivative_increments[..n].iter().sum();
        in_from_increments(s, n, self.grid.horizon(), d_n)
    }

    /// `Φ_N` on the first `n` paths.
    pub fn phi(&self, n: usize, sigma: f64) -> Result<PhiMap<'_>> {
        let d_n = self.d_n(n)?;
        let i_n = self.i_n(n, d_n)?;
        self.phi_with(n, sigma, d_n, i_n)
    }

    fn phi_with(&self, n: usize, sigma: f64, d_n: f64, i_n: f64) -> Result<PhiMap<'_>> {
        self.check_prefix(n)?;
        if !(d_n > 0.0) {
            return Err(Error::DegenerateStatistics(format!("D_N = {d_n}")));
        }
        let end = self.pair_offsets[n];
        Ok(PhiMap {
            scale: -self.hurst.alpha() * sigma * sigma / (n as f64 * self.grid.horizon() * d_n),
            i_n,
            weights: &self.pair_weights[..end],
            exponents: &self.pair_exponents[..end],
        })
    }

    /// `Ȳ_N` on the first `n` paths.
    pub fn ybar(&self, n: usize, sigma: f64) -> Result<f64> {
        self.check_prefix(n)?;
        let alpha = self.hurst.alpha();
        let s2 = sigma * sigma;
        let t2 = self.grid.horizon() * self.grid.horizon();
        let total: f64 = self.ybar_double[..n]
            .iter()
            .zip(&self.ybar_quadruple[..n])
            .map(|(d, q)| alpha * d + alpha * alpha * s2 * q)
            .sum();
        let ybar = s2 * total / (n as f64 * t2);
        if !(ybar >= 0.0) {
            return Err(Error::NumericDegeneracy(format!("Ȳ_N = {ybar} is not a variance")));
        }
        Ok(ybar)
    }

    /// Interval `center ± 2 Ȳ_N^{1/2} u_{1−α/4} / (√N D_N)`.
    pub fn aci(&self, n: usize, sigma: f64, center: f64, alpha: f64) -> Result<ConfidenceInterval> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::config("alpha", format!("level must lie in (0, 1), got {alpha}")));
        }
        let d_n = self.d_n(n)?;
        if !(d_n > 0.0) {
            return Err(Error::DegenerateStatistics(format!("D_N = {d_n}")));
        }
        let ybar = self.ybar(n, sigma)?;
        let half = 2.0 * ybar.sqrt() * normal_quantile(1.0 - alpha / 4.0)? / ((n as f64).sqrt() * d_n);
        Ok(ConfidenceInterval {
            lower: center - half,
            upper: center + half,
            alpha,
        })
    }

    /// Full estimate from the first `n` paths.
    pub fn estimate(&self, n: usize, sigma: f64, params: &FbmParams) -> Result<EstimateFbm> {
        let d_n = self.d_n(n)?;
        let i_n = self.i_n(n, d_n)?;
        let sup_norm = self.drift.sup_norm_b_prime();
        let horizon = self.grid.horizon();
        let m_n = m_n(sup_norm, i_n, horizon);
        let omega = check_omega(d_n, m_n, self.hurst, sigma, sup_norm, horizon, params.c)?;

        let (fp, theta_tilde) = if params.enforce_omega && !omega.holds {
            (None, f64::NAN)
        } else {
            let phi = self.phi(n, sigma)?;
            let max_iters = match params.max_iters {
                Some(m) => m,
                None => iteration_schedule(n, params.c, horizon, sup_norm, self.hurst)?,
            };
            let fp = fixed_point(|r| phi.eval(r), params.c, max_iters, params.tol)?;
            (Some(fp), i_n + fp.value)
        };
        let FixedPoint {
            value: r_n,
            iterations,
            residual,
            ..
        } = fp.unwrap_or(FixedPoint {
            value: f64::NAN,
            iterations: 0,
            residual: f64::NAN,
            error_bound: f64::NAN,
        });

        let theta_tilde_c = if omega.holds { theta_tilde } else { 0.0 };
        let theta_tilde_cd = if d_n >= params.d_threshold { theta_tilde_c } else { 0.0 };

        let (aci, ybar) = match params.alpha {
            Some(alpha) if theta_tilde.is_finite() => {
                let center = if params.enforce_omega { theta_tilde_c } else { theta_tilde };
                let aci = self.aci(n, sigma, center, alpha)?;
                (Some(aci), Some(self.ybar(n, sigma)?))
            }
            _ => (None, None),
        };

        Ok(EstimateFbm {
            n_paths: n,
            theta_tilde,
            r_n,
            iterations,
            residual,
            d_n,
            i_n,
            m_n,
            omega,
            omega_holds: omega.holds,
            c: params.c,
            d_threshold: params.d_threshold,
            theta_tilde_c,
            theta_tilde_cd,
            aci,
            ybar,
        })
    }
}

/// `Φ_N(r) = −(α_H σ²/(N T D_N)) Σ_i Σ_{j≥1} Σ_{l<j} b′(X^i_j)
/// e^{(r + I_N)(C_i(t_j) − C_i(t_l))} (t_j − t_l)^{2H−2} Δ²`.
#[derive(Debug, Clone, Copy)]
pub struct PhiMap<'a> {
    scale: f64,
    i_n: f64,
    weights: &'a [f64],
    exponents: &'a [f64],
}

impl PhiMap<'_> {
    pub fn eval(&self, r: f64) -> f64 {
        let shift = r + self.i_n;
        let s: f64 = self
            .weights
            .iter()
            .zip(self.exponents)
            .map(|(w, a)| w * (shift * a).exp())
            .sum();
        self.scale * s
    }

    pub fn i_n(&self) -> f64 {
        self.i_n
    }
}

pub fn phi_map(
    r: f64,
    stats: &SufficientStats,
    paths: &PathBundle,
    drift: &DriftModel,
    hurst: HurstParams,
    sigma: f64,
) -> Result<f64> {
    let prepared = PreparedPaths::new(paths, *drift, hurst)?;
    let phi = prepared.phi_with(paths.len(), sigma, stats.d_n, stats.i_n)?;
    Ok(phi.eval(r))
}

pub fn aci_fbm(
    paths: &PathBundle,
    drift: &DriftModel,
    hurst: HurstParams,
    sigma: f64,
    theta_center: f64,
    alpha: f64,
) -> Result<ConfidenceInterval> {
    PreparedPaths::new(paths, *drift, hurst)?.aci(paths.len(), sigma, theta_center, alpha)
}

pub fn estimate_fbm(
    paths: &PathBundle,
    drift: &DriftModel,
    hurst: HurstParams,
    sigma: f64,
    params: &FbmParams,
) -> Result<EstimateFbm> {
    PreparedPaths::new(paths, *drift, hurst)?.estimate(paths.len(), sigma, params)
}
