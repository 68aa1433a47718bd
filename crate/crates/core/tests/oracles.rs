//! Library statistics against brute-force oracles on tiny hand-made bundles.

mod common;

use common::*;

use fsde_drift::estimators::{
    aci_fbm, compute_dn, compute_in, estimate_bm, normal_quantile, phi_map, PreparedPaths, SufficientStats,
};
use fsde_drift::fbm::HurstParams;
use fsde_drift::sde::{DriftModel, VolModel};

#[test]
fn dn_and_in_match_defining_sums() {
    for inst in instances() {
        let bundle = inst.bundle();
        let d = compute_dn(&bundle, &inst.drift);
        close(d, oracle_dn(&inst), "D_N");
        let i = compute_in(&bundle, &inst.drift, d).unwrap();
        close(i, oracle_in(&inst, d), "I_N");

        let stats = SufficientStats::compute(&bundle, &inst.drift).unwrap();
        close(stats.d_n, d, "stats D_N");
        close(stats.i_n, i, "stats I_N");
        let prepared = PreparedPaths::new(&bundle, inst.drift, HurstParams::new(inst.hurst).unwrap()).unwrap();
        close(prepared.d_n(bundle.len()).unwrap(), d, "prepared D_N");
    }
}

#[test]
fn phi_matches_triple_sum() {
    for inst in instances() {
        let bundle = inst.bundle();
        let hurst = HurstParams::new(inst.hurst).unwrap();
        let stats = SufficientStats::compute(&bundle, &inst.drift).unwrap();
        for r in [0.0, 0.3, -1.1, 2.5] {
            let got = phi_map(r, &stats, &bundle, &inst.drift, hurst, inst.sigma).unwrap();
            let want = oracle_phi(&inst, r, stats.d_n, stats.i_n);
            close(got, want, "Phi_N");
        }
        // prefix evaluation agrees with evaluating the prefix bundle directly
        let prepared = PreparedPaths::new(&bundle, inst.drift, hurst).unwrap();
        let full = prepared.phi(bundle.len(), inst.sigma).unwrap();
        close(full.eval(0.4), oracle_phi(&inst, 0.4, stats.d_n, stats.i_n), "prepared Phi_N");
    }
}

#[test]
fn ybar_and_interval_match_quadruple_sum() {
    for inst in instances() {
        let bundle = inst.bundle();
        let n = bundle.len();
        let hurst = HurstParams::new(inst.hurst).unwrap();
        let prepared = PreparedPaths::new(&bundle, inst.drift, hurst).unwrap();
        let ybar = prepared.ybar(n, inst.sigma).unwrap();
        let want = oracle_ybar(&inst);
        close(ybar, want, "Ybar_N");

        let d_n = oracle_dn(&inst);
        let center = 0.8;
        let ci = aci_fbm(&bundle, &inst.drift, hurst, inst.sigma, center, 0.05).unwrap();
        let u = normal_quantile(1.0 - 0.05 / 4.0).unwrap();
        let half = 2.0 * want.sqrt() * u / ((n as f64).sqrt() * d_n);
        close(ci.lower, center - half, "ACI lower");
        close(ci.upper, center + half, "ACI upper");
        close(ci.width(), 2.0 * half, "ACI width");
        assert!((u - 2.241402727604947).abs() < 1e-12);
    }
}

#[test]
fn least_squares_matches_defining_sums() {
    for inst in instances() {
        let bundle = inst.bundle();
        let n = inst.paths.len() as f64;
        let vol = VolModel::Constant(inst.sigma);
        let (d, v, y) = oracle_bm(&inst);

        let est = estimate_bm(&bundle, &inst.drift, Some(&vol), 0.0, Some(0.1)).unwrap();
        close(est.d_nn, d, "D_Nn");
        close(est.v_nn, v, "V_Nn");
        close(est.theta_hat.unwrap(), v / d, "theta_hat");
        close(est.theta_hat_d, v / d, "theta_hat_d");
        close(est.ybar.unwrap(), y, "Ybar (BM)");
        let u = normal_quantile(0.95).unwrap();
        let half = y.sqrt() * u / (n.sqrt() * d);
        let ci = est.aci.unwrap();
        close(ci.lower, v / d - half, "BM ACI lower");
        close(ci.upper, v / d + half, "BM ACI upper");

        // truncation above D_Nn zeroes the estimate
        let truncated = estimate_bm(&bundle, &inst.drift, Some(&vol), 2.0 * d, None).unwrap();
        assert_eq!(truncated.theta_hat_d, 0.0);
        assert!(truncated.aci.is_none());
    }
}

#[test]
fn constant_drift_gives_pathwise_term_only() {
    let inst = Instance {
        drift: DriftModel::constant(1.3),
        hurst: 0.8,
        sigma: 1.0,
        horizon: 1.0,
        paths: vec![vec![0.0, 0.4, 1.1], vec![0.0, -0.2, 0.9]],
    };
    let bundle = inst.bundle();
    let est = fsde_drift::estimators::estimate_fbm(
        &bundle,
        &inst.drift,
        HurstParams::new(0.8).unwrap(),
        1.0,
        &Default::default(),
    )
    .unwrap();
    assert_eq!(est.r_n, 0.0);
    // I_N = (1.3·(1.1 + 0.9)) / (2 · 1 · 1.69)
    close(est.theta_tilde, 1.3 * 2.0 / (2.0 * 1.69), "theta_tilde");
    close(est.theta_tilde, est.i_n, "theta_tilde = I_N");
}
