//! Truncation thresholds, iteration counts and admissible horizons.

use crate::error::{Error, Result};
use crate::fbm::HurstParams;
use crate::sde::DriftModel;

/// Iteration floor used when the schedule asks for fewer steps.
pub const MIN_ITERATIONS: usize = 30;

/// `𝔡_max = 𝔟/2` from a known bound `b(x)² ≥ 𝔟`.
pub fn dmax_from_lower_bound(frak_b: f64) -> Result<f64> {
    if !(frak_b > 0.0) {
        return Err(Error::InvalidInput(format!(
            "no computable threshold from the lower bound {frak_b}; supply d explicitly"
        )));
    }
    Ok(frak_b / 2.0)
}

/// `𝔡_max = (x₀²/2) e^{−2 θ_max T_max}` for (fractional) Ornstein–Uhlenbeck
/// copies. Zero when `x₀ = 0`, in which case no useful threshold exists.
pub fn dmax_ou(x0: f64, theta_max: f64, t_max: f64) -> Result<f64> {
    if !(theta_max > 0.0 && t_max > 0.0) {
        return Err(Error::InvalidInput(format!(
            "theta_max and T_max must be positive, got {theta_max} and {t_max}"
        )));
    }
    if x0 == 0.0 {
        log::warn!("x0 = 0: the Ornstein-Uhlenbeck threshold degenerates to 0");
    }
    Ok(0.5 * x0 * x0 * (-2.0 * theta_max * t_max).exp())
}

/// Number of Picard steps: `max(30, ⌈−log(𝔪√N)/log 𝔠⌉)` with
/// `𝔪 = 𝔠(1−𝔠)⁻¹ / (2T ᾱ_H ‖b′‖_∞)`. Returns 1 when `b′ ≡ 0` (then `Φ_N ≡ 0`).
pub fn iteration_schedule(
    n: usize,
    c: f64,
    horizon: f64,
    sup_norm_b_prime: f64,
    hurst: HurstParams,
) -> Result<usize> {
    if !(c > 0.0 && c < 1.0) {
        return Err(Error::config("c", format!("contraction constant must lie in (0, 1), got {c}")));
    }
    if sup_norm_b_prime == 0.0 {
        return Ok(1);
    }
    let m = c / (1.0 - c) / (2.0 * horizon * hurst.alpha_bar() * sup_norm_b_prime);
    let steps = -(m * (n as f64).sqrt()).ln() / c.ln();
    // 1e-9 slack absorbs round-off on exact integers
    let steps = (steps - 1e-9).ceil();
    if steps <= MIN_ITERATIONS as f64 {
        Ok(MIN_ITERATIONS)
    } else {
        Ok(steps as usize)
    }
}

/// Largest horizon `T` for which the consistency condition is guaranteed,
/// given `‖b‖_f ≥ ℓ` and `θ₀ ∈ (0, θ_max]` observed up to `T_max`.
/// Infinite when `b′ ≡ 0`.
#[allow(clippy::too_many_arguments)]
pub fn max_horizon(
    ell: f64,
    theta_max: f64,
    t_max: f64,
    hurst: HurstParams,
    sigma: f64,
    drift: &DriftModel,
    x0: f64,
    c: f64,
) -> Result<f64> {
    if !(ell > 0.0) {
        return Err(Error::InvalidInput(format!("ell must be positive, got {ell}")));
    }
    let bp = drift.sup_norm_b_prime();
    if bp == 0.0 {
        return Ok(f64::INFINITY);
    }
    let c1 = drift.b(x0).abs().max(bp / 2.0);
    let s_th = sigma.abs() * t_max.powf(hurst.h());
    let inner = theta_max * theta_max * t_max * t_max
        + theta_max * t_max / ell
        + s_th * (1.0 + s_th) / (ell * ell);
    let base = c * ell * ell / (hurst.alpha_bar() * sigma * sigma * bp * bp) * (-2.0 * c1 * bp * inner).exp();
    Ok(base.powf(1.0 / (2.0 * hurst.h())))
}
