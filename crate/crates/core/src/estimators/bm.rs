//! Discrete-time least-squares estimator for Brownian noise (`H = 1/2`).

use serde::Serialize;

use super::fbm::ConfidenceInterval;
use super::normal::normal_quantile;
use crate::error::{Error, Result};
use crate::fbm::PathBundle;
use crate::sde::{DriftModel, VolModel};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimateBm {
    pub n_paths: usize,
    /// `D_{N,n} = (1/NT) Σ_i Σ_j b(X^i_{t_j})² Δ`.
    pub d_nn: f64,
    /// `V_{N,n} = (1/NT) Σ_i Σ_j b(X^i_{t_j})(X^i_{t_{j+1}} − X^i_{t_j})`.
    pub v_nn: f64,
    /// `V_{N,n}/D_{N,n}`; `None` when `D_{N,n} = 0`.
    pub theta_hat: Option<f64>,
    /// `θ̂_{N,n} · 1_{D_{N,n} ≥ 𝔡}`.
    pub theta_hat_d: f64,
    pub d_threshold: f64,
    pub aci: Option<ConfidenceInterval>,
    /// `(1/NT²) Σ_i Σ_j b(X^i_{t_j})² σ(X^i_{t_j})² Δ`; needs a volatility model.
    pub ybar: Option<f64>,
}

/// `vol = None` skips `Ȳ_N` and the interval; `alpha = None` skips the interval.
pub fn estimate_bm(
    paths: &PathBundle,
    drift: &DriftModel,
    vol: Option<&VolModel>,
    d_threshold: f64,
    alpha: Option<f64>,
) -> Result<EstimateBm> {
    if !(d_threshold >= 0.0) {
        return Err(Error::config("d", format!("threshold must be nonnegative, got {d_threshold}")));
    }
    let grid = paths.grid();
    let dt = grid.mesh();
    let horizon = grid.horizon();
    let n = paths.len();
    let norm = n as f64 * horizon;

    let mut d_sum = 0.0;
    let mut v_sum = 0.0;
    let mut y_sum = 0.0;
    for path in paths.paths() {
        let (mut d, mut v, mut y) = (0.0, 0.0, 0.0);
        for w in path.windows(2) {
            let b = drift.b(w[0]);
            d += b * b * dt;
            v += b * (w[1] - w[0]);
            if let Some(vol) = vol {
                let s = vol.sigma(w[0]);
                y += b * b * s * s * dt;
            }
        }
        d_sum += d;
        v_sum += v;
        y_sum += y;
    }
    let d_nn = d_sum / norm;
    let v_nn = v_sum / norm;
    let ybar = vol.map(|_| y_sum / (norm * horizon));

    let theta_hat = if d_nn > 0.0 {
        Some(v_nn / d_nn)
    } else if d_threshold == 0.0 {
        return Err(Error::DegenerateStatistics(
            "D_{N,n} = 0 and no truncation threshold".into(),
        ));
    } else {
        None
    };
    let theta_hat_d = match theta_hat {
        Some(t) if d_nn >= d_threshold => t,
        _ => 0.0,
    };

    let aci = match (alpha, ybar, theta_hat) {
        (Some(alpha), Some(ybar), Some(center)) => {
            if !(alpha > 0.0 && alpha < 1.0) {
                return Err(Error::config("alpha", format!("level must lie in (0, 1), got {alpha}")));
            }
            let half = ybar.sqrt() * normal_quantile(1.0 - alpha / 2.0)? / ((n as f64).sqrt() * d_nn);
            Some(ConfidenceInterval {
                lower: center - half,
                upper: center + half,
                alpha,
            })
        }
        _ => None,
    };

    Ok(EstimateBm {
        n_paths: n,
        d_nn,
        v_nn,
        theta_hat,
        theta_hat_d,
        d_threshold,
        aci,
        ybar,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fbm::{BundleKind, Grid};

    #[test]
    fn constant_drift_telescopes() {
        let g = Grid::new(0.5, 4).unwrap();
        let rows = vec![vec![1.0, 1.3, 0.7, 1.1, 1.9], vec![1.0, 0.2, -0.4, 0.0, 0.6]];
        let p = PathBundle::from_rows(g, &rows, BundleKind::Solution).unwrap();
        let c = 2.5;
        let est = estimate_bm(&p, &DriftModel::constant(c), None, 0.0, None).unwrap();
        let closed = ((1.9 - 1.0) + (0.6 - 1.0)) / (2.0 * c * 0.5);
        assert!((est.theta_hat.unwrap() - closed).abs() < 1e-14);
        assert_eq!(est.theta_hat_d, est.theta_hat.unwrap());
        assert!(est.aci.is_none() && est.ybar.is_none());
    }

    #[test]
    fn degenerate_statistics() {
        let g = Grid::new(1.0, 2).unwrap();
        let p = PathBundle::from_rows(g, &[vec![0.0, 0.0, 0.0]], BundleKind::Solution).unwrap();
        assert!(matches!(
            estimate_bm(&p, &DriftModel::NegIdentity, None, 0.0, None),
            Err(Error::DegenerateStatistics(_))
        ));
        let est = estimate_bm(&p, &DriftModel::NegIdentity, None, 0.5, None).unwrap();
        assert_eq!(est.theta_hat, None);
        assert_eq!(est.theta_hat_d, 0.0);
    }

    #[test]
    fn truncation_zeroes_below_threshold() {
        let g = Grid::new(1.0, 2).unwrap();
        let p = PathBundle::from_rows(g, &[vec![1.0, 0.5, 0.4]], BundleKind::Solution).unwrap();
        let vol = VolModel::Constant(1.0);
        let est = estimate_bm(&p, &DriftModel::NegIdentity, Some(&vol), 100.0, Some(0.05)).unwrap();
        assert_eq!(est.theta_hat_d, 0.0);
        assert!(est.ybar.unwrap() >= 0.0);
        let aci = est.aci.unwrap();
        assert!(aci.lower <= est.theta_hat.unwrap() && est.theta_hat.unwrap() <= aci.upper);
    }
}
