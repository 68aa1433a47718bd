//! Brute-force oracles shared by the oracle tests and the acceptance suite.
//! Every statistic is recomputed from its defining sum, independently of the
//! library's caching.
#![allow(dead_code)]

use fsde_drift::fbm::{BundleKind, Grid, PathBundle};
use fsde_drift::sde::DriftModel;

pub const REL: f64 = 1e-12;

pub fn close(got: f64, want: f64, what: &str) {
    let scale = want.abs().max(1e-300);
    assert!(
        (got - want).abs() <= REL * scale,
        "{what}: got {got:e}, want {want:e}, rel {:e}",
        (got - want).abs() / scale
    );
}

pub struct Instance {
    pub drift: DriftModel,
    pub hurst: f64,
    pub sigma: f64,
    pub horizon: f64,
    pub paths: Vec<Vec<f64>>,
}

impl Instance {
    pub fn steps(&self) -> usize {
        self.paths[0].len() - 1
    }

    pub fn bundle(&self) -> PathBundle {
        let grid = Grid::new(self.horizon, self.steps()).unwrap();
        PathBundle::from_rows(grid, &self.paths, BundleKind::Solution).unwrap()
    }

    pub fn dt(&self) -> f64 {
        self.horizon / self.steps() as f64
    }

    pub fn t(&self, j: usize) -> f64 {
        j as f64 * self.dt()
    }
}

pub fn instances() -> Vec<Instance> {
    let drifts = [
        DriftModel::ArcTan,
        DriftModel::NegIdentity,
        DriftModel::Affine {
            intercept: 0.7,
            slope: -0.4,
        },
    ];
    let shapes: [Vec<Vec<f64>>; 4] = [
        vec![vec![5.0, 4.81, 5.12]],
        vec![vec![5.0, 4.81, 5.12], vec![5.0, 5.33, 4.6]],
        vec![vec![1.5, 0.9, -0.35, 0.2]],
        vec![vec![-2.0, -1.4, -1.9, -0.8], vec![0.3, 0.1, 0.45, 0.05]],
    ];
    let mut out = Vec::new();
    for (k, drift) in drifts.iter().enumerate() {
        for (s, paths) in shapes.iter().enumerate() {
            out.push(Instance {
                drift: *drift,
                hurst: [0.6, 0.75, 0.9][(k + s) % 3],
                sigma: [1.0, 0.25, 1.7][(k + 2 * s) % 3],
                horizon: [0.1, 0.75, 2.0][(2 * k + s) % 3],
                paths: paths.clone(),
            });
        }
    }
    out
}

pub fn alpha_h(h: f64) -> f64 {
    h * (2.0 * h - 1.0)
}

pub fn kern(inst: &Instance, a: usize, b: usize) -> f64 {
    (inst.t(a) - inst.t(b)).abs().powf(2.0 * inst.hurst - 2.0)
}

pub fn oracle_dn(inst: &Instance) -> f64 {
    let nu = inst.steps();
    let mut s = 0.0;
    for path in &inst.paths {
        for &x in &path[..nu] {
            s += inst.drift.b(x).powi(2) * inst.dt();
        }
    }
    s / (inst.paths.len() as f64 * inst.horizon)
}

/// Gauss–Legendre nodes and weights on [-1, 1] by Newton iteration on P_n.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 1..=n {
        let mut x = (std::f64::consts::PI * (i as f64 - 0.25) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out
}

/// `∫_a^b b(x) dx` by 30-point Gauss–Legendre.
pub fn integral_of_b(drift: &DriftModel, a: f64, b: f64) -> f64 {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    gauss_legendre(30)
        .iter()
        .map(|&(x, w)| w * drift.b(mid + half * x))
        .sum::<f64>()
        * half
}

pub fn oracle_in(inst: &Instance, d_n: f64) -> f64 {
    // 𝚋(X_T) − 𝚋(X_0) as a sum of integrals over the visited segments
    let mut s = 0.0;
    for path in &inst.paths {
        for w in path.windows(2) {
            s += integral_of_b(&inst.drift, w[0], w[1]);
        }
    }
    s / (inst.paths.len() as f64 * inst.horizon * d_n)
}

#[allow(clippy::needless_range_loop)] // literal transcription of the defining sum
pub fn oracle_phi(inst: &Instance, r: f64, d_n: f64, i_n: f64) -> f64 {
    let nu = inst.steps();
    let dt = inst.dt();
    let n = inst.paths.len() as f64;
    let mut total = 0.0;
    for path in &inst.paths {
        let big_c = |j: usize| -> f64 { (0..j).map(|l| inst.drift.b_prime(path[l]) * dt).sum() };
        for j in 1..=nu {
            for l in 0..j {
                total += inst.drift.b_prime(path[j])
                    * ((r + i_n) * (big_c(j) - big_c(l))).exp()
                    * kern(inst, j, l)
                    * dt
                    * dt;
            }
        }
    }
    -alpha_h(inst.hurst) * inst.sigma.powi(2) / (n * inst.horizon * d_n) * total
}

pub fn oracle_ybar(inst: &Instance) -> f64 {
    let nu = inst.steps();
    let dt = inst.dt();
    let a = alpha_h(inst.hurst);
    let s2 = inst.sigma.powi(2);
    let mut total = 0.0;
    for path in &inst.paths {
        let mut double = 0.0;
        for s in 0..nu {
            for t in 0..nu {
                if s != t {
                    double += inst.drift.b(path[s]).abs() * inst.drift.b(path[t]).abs() * kern(inst, s, t) * dt * dt;
                }
            }
        }
        let mut quad = 0.0;
        for u in 1..=nu {
            for v in 1..=nu {
                for u2 in 0..u {
                    for v2 in 0..v {
                        quad += kern(inst, u, u2)
                            * kern(inst, v, v2)
                            * inst.drift.b_prime(path[v])
                            * inst.drift.b_prime(path[u])
                            * dt.powi(4);
                    }
                }
            }
        }
        total += a * double + a * a * s2 * quad;
    }
    s2 / (inst.paths.len() as f64 * inst.horizon.powi(2)) * total
}


/// `(D_{N,n}, V_{N,n}, Ȳ_N)` of the least-squares estimator with constant volatility.
pub fn oracle_bm(inst: &Instance) -> (f64, f64, f64) {
    let nu = inst.steps();
    let dt = inst.dt();
    let n = inst.paths.len() as f64;
    let (mut d, mut v, mut y) = (0.0, 0.0, 0.0);
    for path in &inst.paths {
        for j in 0..nu {
            let b = inst.drift.b(path[j]);
            d += b * b * dt;
            v += b * (path[j + 1] - path[j]);
            y += b * b * inst.sigma.powi(2) * dt;
        }
    }
    (d / (n * inst.horizon), v / (n * inst.horizon), y / (n * inst.horizon.powi(2)))
}
