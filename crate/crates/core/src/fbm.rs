//! Exact sampling of (cross-correlated) fractional Brownian motion bundles.
//!
//! A bundle of `N` paths on a uniform grid with `ν` steps is drawn as
//! `L_cross · Z · L_timeᵀ`, where `L_time` is the Cholesky factor of the fBm
//! covariance at the nodes `t_1..t_ν`, `L_cross` the factor of the path
//! correlation matrix, and `Z` an `N×ν` matrix of independent standard
//! normals filled row by row. A zero column is prepended for `t_0 = 0`.
//! The resulting covariance is `Cov(B^i_s, B^k_t) = R_ik · R_H(s, t)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::rng::fill_standard_normal;

/// Uniform dissection of `[0, T]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    horizon: f64,
    steps: usize,
}

impl Grid {
    pub fn new(horizon: f64, steps: usize) -> Result<Self> {
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(Error::config("T", format!("horizon must be positive, got {horizon}")));
        }
        if steps == 0 {
            return Err(Error::config("nu", "step count must be at least 1"));
        }
        Ok(Self { horizon, steps })
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn mesh(&self) -> f64 {
        self.horizon / self.steps as f64
    }

    /// `t_j = jT/ν`, with `t_ν = T` exactly.
    pub fn node(&self, j: usize) -> f64 {
        if j == self.steps {
            self.horizon
        } else {
            j as f64 * self.horizon / self.steps as f64
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..=self.steps).map(|j| self.node(j)).collect()
    }
}

/// Hurst index with the derived constants used by the estimator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HurstParams {
    h: f64,
}

impl HurstParams {
    pub fn new(h: f64) -> Result<Self> {
        if !(h > 0.0 && h < 1.0) {
            return Err(Error::config("H", format!("Hurst index must lie in (0, 1), got {h}")));
        }
        Ok(Self { h })
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    /// `α_H = H(2H − 1)`.
    pub fn alpha(&self) -> f64 {
        self.h * (2.0 * self.h - 1.0)
    }

    /// `ᾱ_H = α_H / (2H(2H + 1))`.
    pub fn alpha_bar(&self) -> f64 {
        self.alpha() / (2.0 * self.h * (2.0 * self.h + 1.0))
    }

    pub fn is_brownian(&self) -> bool {
        self.h == 0.5
    }
}

/// `R_H(s, t) = ½(s^{2H} + t^{2H} − |t − s|^{2H})`.
pub fn fbm_cov(hurst: HurstParams, s: f64, t: f64) -> f64 {
    if hurst.is_brownian() {
        return s.min(t);
    }
    let two_h = 2.0 * hurst.h();
    0.5 * (s.powf(two_h) + t.powf(two_h) - (t - s).abs().powf(two_h))
}

/// Covariance of `(B_{t_1}, …, B_{t_ν})`.
pub fn fbm_covariance(hurst: HurstParams, grid: &Grid) -> Matrix {
    let nodes = grid.nodes();
    Matrix::from_fn(grid.steps(), grid.steps(), |i, j| {
        fbm_cov(hurst, nodes[i + 1], nodes[j + 1])
    })
}

/// Correlation matrix between the driving noises of the `N` copies.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossCorrelation {
    matrix: Matrix,
    factor: Matrix,
    identity: bool,
}

impl CrossCorrelation {
    pub fn new(matrix: Matrix) -> Result<Self> {
        if !matrix.is_square() || matrix.rows() == 0 {
            return Err(Error::InvalidInput(
                "correlation matrix must be square and non-empty".into(),
            ));
        }
        let n = matrix.rows();
        for i in 0..n {
            if (matrix[(i, i)] - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidInput(format!(
                    "correlation diagonal entry {i} is {}, expected 1",
                    matrix[(i, i)]
                )));
            }
        }
        if matrix.max_asymmetry() > 1e-12 {
            return Err(Error::InvalidInput("correlation matrix is not symmetric".into()));
        }
        let factor = matrix.cholesky()?;
        let identity = matrix == Matrix::identity(n);
        Ok(Self {
            matrix,
            factor,
            identity,
        })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            matrix: Matrix::identity(n),
            factor: Matrix::identity(n),
            identity: true,
        }
    }

    pub fn size(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn factor(&self) -> &Matrix {
        &self.factor
    }

    pub fn is_identity(&self) -> bool {
        self.identity
    }
}

/// Block-diagonal correlation: `N/q` clusters of size `q`, correlation `ρ`
/// inside each cluster.
pub fn block_correlation(n: usize, q: usize, rho: f64) -> Result<CrossCorrelation> {
    if n == 0 || q == 0 || !n.is_multiple_of(q) {
        return Err(Error::InvalidInput(format!(
            "cluster size {q} must divide the number of paths {n}"
        )));
    }
    if q > 1 {
        let lower = -1.0 / (q as f64 - 1.0);
        if !(rho > lower && rho <= 1.0) {
            return Err(Error::InvalidInput(format!(
                "rho = {rho} outside ({lower}, 1] makes the blocks indefinite"
            )));
        }
    }
    if q == 1 || rho == 0.0 {
        return Ok(CrossCorrelation::identity(n));
    }
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

/// `|𝓡_N|`: ordered pairs `(i, k)`, `i ≠ k`, with a nonzero correlation.
pub fn dependence_count(corr: &CrossCorrelation) -> usize {
    let m = corr.matrix();
    let n = m.rows();
    (0..n)
        .flat_map(|i| (0..n).map(move |k| (i, k)))
        .filter(|&(i, k)| i != k && m[(i, k)] != 0.0)
        .count()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BundleKind {
    Noise,
    Solution,
}

/// `N` trajectories sampled at the `ν + 1` grid nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct PathBundle {
    grid: Grid,
    values: Matrix,
    kind: BundleKind,
}

impl PathBundle {
    pub fn new(grid: Grid, values: Matrix, kind: BundleKind) -> Result<Self> {
        if values.rows() == 0 {
            return Err(Error::InvalidInput("a bundle needs at least one path".into()));
        }
        if values.cols() != grid.steps() + 1 {
            return Err(Error::GridMismatch(format!(
                "paths have {} samples but the grid has {} nodes",
                values.cols(),
                grid.steps() + 1
            )));
        }
        if let Some(bad) = values.as_slice().iter().find(|x| !x.is_finite()) {
            return Err(Error::InvalidInput(format!("non-finite path value {bad}")));
        }
        if kind == BundleKind::Noise && (0..values.rows()).any(|i| values[(i, 0)] != 0.0) {
            return Err(Error::InvalidInput("noise paths must start at 0".into()));
        }
        Ok(Self { grid, values, kind })
    }

    pub fn from_rows(grid: Grid, rows: &[Vec<f64>], kind: BundleKind) -> Result<Self> {
        let cols = grid.steps() + 1;
        if let Some(r) = rows.iter().find(|r| r.len() != cols) {
            return Err(Error::GridMismatch(format!(
                "path has {} samples but the grid has {cols} nodes",
                r.len()
            )));
        }
        let data = rows.iter().flatten().copied().collect();
        Self::new(grid, Matrix::from_rows(rows.len(), cols, data)?, kind)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn kind(&self) -> BundleKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.values.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.values.rows() == 0
    }

    pub fn path(&self, i: usize) -> &[f64] {
        self.values.row(i)
    }

    pub fn paths(&self) -> impl Iterator<Item = &[f64]> + '_ {
        (0..self.len()).map(move |i| self.values.row(i))
    }

    pub fn values(&self) -> &Matrix {
        &self.values
    }

    /// First `n` paths.
    pub fn prefix(&self, n: usize) -> Result<PathBundle> {
        if n == 0 || n > self.len() {
            return Err(Error::InvalidInput(format!(
                "prefix of {n} paths requested from a bundle of {}",
                self.len()
            )));
        }
        let cols = self.values.cols();
        let data = self.values.as_slice()[..n * cols].to_vec();
        Ok(PathBundle {
            grid: self.grid,
            values: Matrix::from_rows(n, cols, data)?,
            kind: self.kind,
        })
    }
}

/// Pre-factorized sampler; reuse it to draw many bundles with the same law.
#[derive(Debug, Clone)]
pub struct FbmSampler {
    grid: Grid,
    time_factor: Matrix,
    corr: CrossCorrelation,
}

impl FbmSampler {
    pub fn new(hurst: HurstParams, grid: Grid, corr: CrossCorrelation) -> Result<Self> {
        let time_factor = fbm_covariance(hurst, &grid).cholesky()?;
        Ok(Self {
            grid,
            time_factor,
            corr,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn paths(&self) -> usize {
        self.corr.size()
    }

    pub fn sample<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> PathBundle {
        let n = self.corr.size();
        let steps = self.grid.steps();
        let mut z = vec![0.0; steps];
        let mut indep = Matrix::zeros(n, steps + 1);
        for i in 0..n {
            fill_standard_normal(rng, &mut z);
            self.time_factor.lower_mul_vec(&z, &mut indep.row_mut(i)[1..]);
        }
        let values = if self.corr.is_identity() {
            indep
        } else {
            let lf = self.corr.factor();
            let mut mixed = Matrix::zeros(n, steps + 1);
            for i in 0..n {
                for k in 0..=i {
                    let w = lf[(i, k)];
                    if w == 0.0 {
                        continue;
                    }
                    for j in 1..=steps {
                        mixed[(i, j)] += w * indep[(k, j)];
                    }
                }
            }
            mixed
        };
        PathBundle {
            grid: self.grid,
            values,
            kind: BundleKind::Noise,
        }
    }
}

pub fn sample_fbm_bundle<R: rand::Rng + ?Sized>(
    hurst: HurstParams,
    grid: Grid,
    corr: &CrossCorrelation,
    rng: &mut R,
) -> Result<PathBundle> {
    Ok(FbmSampler::new(hurst, grid, corr.clone())?.sample(rng))
}
