//! Drift-parameter estimators and their companions: sufficient statistics,
//! the fixed-point map, contraction check, truncations, thresholds and
//! asymptotic confidence intervals.

mod bm;
mod fbm;
mod fixed_point;
mod normal;
mod stats;
mod thresholds;

pub use bm::{estimate_bm, EstimateBm};
pub use fbm::{
    aci_fbm, estimate_fbm, phi_map, ConfidenceInterval, EstimateFbm, FbmParams, PhiMap,
    PreparedPaths,
};
pub use fixed_point::{fixed_point, FixedPoint};
pub use normal::{normal_cdf, normal_quantile};
pub use stats::{check_omega, compute_dn, compute_in, OmegaCheck, SufficientStats};
pub use thresholds::{
    dmax_from_lower_bound, dmax_ou, iteration_schedule, max_horizon, MIN_ITERATIONS,
};
