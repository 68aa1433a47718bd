use serde::Serialize;

use crate::error::{Error, Result};
use crate::fbm::{HurstParams, PathBundle};
use crate::linalg::Matrix;
use crate::sde::DriftModel;

/// Left-point sum `Σ_{j<ν} b(X_j)² Δ` along one path.
pub(crate) fn path_b_square_sum(path: &[f64], drift: &DriftModel, dt: f64) -> f64 {
    path[..path.len() - 1]
        .iter()
        .map(|&x| {
            let b = drift.b(x);
            b * b * dt
        })
        .sum()
}

/// `𝚋(X_T) − 𝚋(X_0)`.
pub(crate) fn path_antiderivative_increment(path: &[f64], drift: &DriftModel) -> f64 {
    drift.antiderivative(path[path.len() - 1]) - drift.antiderivative(path[0])
}

/// `C(t_j) = Σ_{l<j} b′(X_l) Δ`, `C(t_0) = 0`.
pub(crate) fn cumulative_b_prime(path: &[f64], drift: &DriftModel, dt: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(path.len());
    let mut acc = 0.0;
    out.push(acc);
    for &x in &path[..path.len() - 1] {
        acc += drift.b_prime(x) * dt;
        out.push(acc);
    }
    out
}

/// `D_N = (1/NT) Σ_i Σ_{j<ν} b(X^i_{t_j})² Δ`.
pub fn compute_dn(paths: &PathBundle, drift: &DriftModel) -> f64 {
    let grid = paths.grid();
    let total: f64 = paths
        .paths()
        .map(|p| path_b_square_sum(p, drift, grid.mesh()))
        .sum();
    total / (paths.len() as f64 * grid.horizon())
}

pub(crate) fn in_from_increments(increment_sum: f64, n: usize, horizon: f64, d_n: f64) -> Result<f64> {
    if !(d_n > 0.0) {
        return Err(Error::DegenerateStatistics(format!(
            "D_N = {d_n}: the drift vanishes along every observed path"
        )));
    }
    Ok(increment_sum / (n as f64 * horizon * d_n))
}

/// `I_N = (1/(N T D_N)) Σ_i (𝚋(X^i_T) − 𝚋(x₀))`, the Young integral term.
pub fn compute_in(paths: &PathBundle, drift: &DriftModel, d_n: f64) -> Result<f64> {
    let sum: f64 = paths
        .paths()
        .map(|p| path_antiderivative_increment(p, drift))
        .sum();
    in_from_increments(sum, paths.len(), paths.grid().horizon(), d_n)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SufficientStats {
    pub n_paths: usize,
    pub horizon: f64,
    pub d_n: f64,
    pub i_n: f64,
    /// `M_N = exp(‖b′‖_∞ |I_N| T)`.
    pub m_n: f64,
    /// `N×(ν+1)` cumulative `b′` integrals along each path.
    #[serde(skip)]
    pub cumulative: Matrix,
}

impl SufficientStats {
    pub fn compute(paths: &PathBundle, drift: &DriftModel) -> Result<Self> {
        let d_n = compute_dn(paths, drift);
        let i_n = compute_in(paths, drift, d_n)?;
        let grid = paths.grid();
        let cols = grid.steps() + 1;
        let data = paths
            .paths()
            .flat_map(|p| cumulative_b_prime(p, drift, grid.mesh()))
            .collect();
        Ok(Self {
            n_paths: paths.len(),
            horizon: grid.horizon(),
            d_n,
            i_n,
            m_n: m_n(drift.sup_norm_b_prime(), i_n, grid.horizon()),
            cumulative: Matrix::from_rows(paths.len(), cols, data)?,
        })
    }
}

pub(crate) fn m_n(sup_norm_b_prime: f64, i_n: f64, horizon: f64) -> f64 {
    (sup_norm_b_prime * i_n.abs() * horizon).exp()
}

/// Both sides of the contraction condition defining `Ω_N`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OmegaCheck {
    /// `T^{2H} M_N / D_N`.
    pub ratio: f64,
    /// `𝔠 / (ᾱ_H σ² ‖b′‖_∞²)`; infinite when `b′ ≡ 0`.
    pub bound: f64,
    pub holds: bool,
}

/// `Ω_N = {T^{2H} M_N / D_N ≤ 𝔠 / (ᾱ_H σ² ‖b′‖_∞²)}`.
///
/// With `‖b′‖_∞ = 0` the map `Φ_N` vanishes and the event always holds.
pub fn check_omega(
    d_n: f64,
    m_n: f64,
    hurst: HurstParams,
    sigma: f64,
    sup_norm_b_prime: f64,
    horizon: f64,
    c: f64,
) -> Result<OmegaCheck> {
    if !(c > 0.0 && c < 1.0) {
        return Err(Error::config("c", format!("contraction constant must lie in (0, 1), got {c}")));
    }
    if !(d_n > 0.0) {
        return Err(Error::DegenerateStatistics(format!("D_N = {d_n}")));
    }
    let ratio = horizon.powf(2.0 * hurst.h()) * m_n / d_n;
    if sup_norm_b_prime == 0.0 {
        return Ok(OmegaCheck {
            ratio,
            bound: f64::INFINITY,
            holds: true,
        });
    }
    let bound = c / (hurst.alpha_bar() * sigma * sigma * sup_norm_b_prime * sup_norm_b_prime);
    Ok(OmegaCheck {
        ratio,
        bound,
        holds: ratio <= bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fbm::{BundleKind, Grid};

    fn bundle(rows: &[Vec<f64>], t: f64) -> PathBundle {
        let g = Grid::new(t, rows[0].len() - 1).unwrap();
        PathBundle::from_rows(g, rows, BundleKind::Solution).unwrap()
    }

    #[test]
    fn dn_constant_paths() {
        let p = bundle(&[vec![2.0; 5]], 1.0);
        assert!((compute_dn(&p, &DriftModel::NegIdentity) - 4.0).abs() < 1e-14);
        let p = bundle(&[vec![1.0; 4], vec![3.0; 4]], 0.6);
        assert!((compute_dn(&p, &DriftModel::NegIdentity) - 5.0).abs() < 1e-14);
    }

    #[test]
    fn dn_is_order_invariant() {
        let a = bundle(&[vec![1.0, 0.5, 0.2], vec![-3.0, 1.0, 4.0]], 1.0);
        let b = bundle(&[vec![-3.0, 1.0, 4.0], vec![1.0, 0.5, 0.2]], 1.0);
        let d = DriftModel::ArcTan;
        assert!((compute_dn(&a, &d) - compute_dn(&b, &d)).abs() < 1e-15);
    }

    #[test]
    fn in_examples() {
        let p = bundle(&[vec![5.0, 4.0, 5.0], vec![5.0, 7.0, 5.0]], 1.0);
        assert_eq!(compute_in(&p, &DriftModel::ArcTan, 2.0).unwrap(), 0.0);

        let p = bundle(&[vec![0.0, 0.3, 1.0]], 1.0);
        let d = 0.8;
        let got = compute_in(&p, &DriftModel::NegIdentity, d).unwrap();
        assert!((got - (-1.0 / (2.0 * d))).abs() < 1e-15);

        assert!(matches!(
            compute_in(&p, &DriftModel::NegIdentity, 0.0),
            Err(Error::DegenerateStatistics(_))
        ));
    }

    #[test]
    fn stats_invariants() {
        let p = bundle(&[vec![5.0, 4.0, 3.5, 3.6], vec![5.0, 5.5, 4.9, 4.0]], 0.3);
        let drift = DriftModel::ArcTan;
        let s = SufficientStats::compute(&p, &drift).unwrap();
        assert!(s.d_n >= 0.0 && s.m_n >= 1.0);
        let dt = p.grid().mesh();
        for i in 0..2 {
            let c = s.cumulative.row(i);
            assert_eq!(c[0], 0.0);
            for j in 1..4 {
                for l in 0..j {
                    let span = (j - l) as f64 * dt;
                    let inc = c[j] - c[l];
                    assert!(inc >= -drift.sup_norm_b_prime() * span - 1e-15);
                    assert!(inc <= drift.sup_b_prime() * span + 1e-15);
                }
            }
        }
    }

    #[test]
    fn omega_examples() {
        let h = HurstParams::new(0.75).unwrap();
        // zero derivative: always holds
        assert!(check_omega(1.0, 1e9, h, 1.0, 0.0, 1.0, 0.5).unwrap().holds);
        // ᾱ = 0.1, bound = 0.5/0.1 = 5, ratio = 4
        let check = check_omega(1.0, 4.0, h, 1.0, 1.0, 1.0, 0.5).unwrap();
        assert!((check.bound - 5.0).abs() < 1e-12);
        assert!((check.ratio - 4.0).abs() < 1e-15);
        assert!(check.holds);
        assert!(!check_omega(1.0, 6.0, h, 1.0, 1.0, 1.0, 0.5).unwrap().holds);
        assert!(check_omega(1.0, 4.0, h, 1.0, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn omega_boundary_is_inclusive() {
        let h = HurstParams::new(0.75).unwrap();
        let bound = check_omega(1.0, 1.0, h, 1.0, 1.0, 1.0, 0.5).unwrap().bound;
        // M_N = bound with D_N = 1 and T = 1 makes the ratio equal to the bound exactly
        let check = check_omega(1.0, bound, h, 1.0, 1.0, 1.0, 0.5).unwrap();
        assert_eq!(check.ratio, check.bound);
        assert!(check.holds);
    }
}
