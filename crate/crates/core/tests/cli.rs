use std::path::Path;
use std::process::{Command, Output};

use fsde_drift::config::RunConfig;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_fsde-drift"));
    c.env_remove("FSDE_DRIFT_SEED");
    c
}

fn run(args: &[&str], out: &Path) -> Output {
    bin().args(args).arg("--out").arg(out).output().unwrap()
}

fn ok(o: &Output) -> String {
    assert!(
        o.status.success(),
        "exit {:?}\nstdout: {}\nstderr: {}",
        o.status.code(),
        String::from_utf8_lossy(&o.stdout),
        String::from_utf8_lossy(&o.stderr)
    );
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn read(p: impl AsRef<Path>) -> String {
    std::fs::read_to_string(p).unwrap()
}

#[test]
fn effective_config_defaults_and_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "model = \"model2\"\nH = 0.9\nseed = 1\n").unwrap();
    let o = bin().args(["config", "--config"]).arg(&cfg).output().unwrap();
    let text = ok(&o);
    let parsed = RunConfig::from_toml_str(&text).unwrap();
    let e = &parsed.experiment;
    assert_eq!(e.grid.horizon(), 0.75);
    assert_eq!(e.grid.steps(), 20);
    assert_eq!(e.params.c, 0.5);
    assert_eq!(e.params.alpha, Some(0.05));
    assert_eq!(e.params.tol, 1e-12);
    assert!(!e.params.enforce_omega);
    assert_eq!(e.seed, 1);
    // emitting the re-parsed config reproduces the text
    assert_eq!(parsed.to_toml(), text);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["estimate", "--set", "model=model2", "--set", "H=1.2"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("`H`"));

    let o = run(&["estimate", "--set", "model=model2", "--set", "bogus=1"], dir.path());
    assert_eq!(o.status.code(), Some(2));

    let o = run(
        &["estimate", "--set", "model=model2", "--set", "H=0.7", "--set", "input=/nonexistent/paths.csv"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(4));

    let o = bin().args(["simulate", "--config", "/nonexistent/run.toml"]).output().unwrap();
    assert_eq!(o.status.code(), Some(4));

    // b ≡ 0 makes D_N vanish
    let o = run(&["estimate", "--set", "model=custom:0", "--set", "H=0.7"], dir.path());
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn simulate_writes_stable_bundles() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["simulate", "--set", "model=model1", "--set", "H=0.7", "--set", "nu=2", "--set", "N=1", "--seed", "3"];
    ok(&run(&args, dir.path()));
    let paths = read(dir.path().join("paths.csv"));
    let noise = read(dir.path().join("noise.csv"));
    let lines: Vec<&str> = paths.lines().collect();
    assert_eq!(lines[0], "t,path_1");
    assert_eq!(lines.len(), 1 + 3);
    assert!(!paths.contains('\r'));
    assert!(lines[1].starts_with("0.0000000000000000e0,5.0000000000000000e0"));
    assert!(noise.lines().nth(1).unwrap().ends_with(",0.0000000000000000e0"));

    ok(&run(&args, dir.path()));
    assert_eq!(read(dir.path().join("paths.csv")), paths);

    let wide = tempfile::tempdir().unwrap();
    ok(&run(&["simulate", "--set", "model=model2", "--set", "H=0.9", "--set", "N=4"], wide.path()));
    let text = read(wide.path().join("paths.csv"));
    assert_eq!(text.lines().next().unwrap(), "t,path_1,path_2,path_3,path_4");
    assert_eq!(text.lines().count(), 1 + 21);
}

#[test]
fn estimate_from_file_matches_on_the_fly() {
    let dir = tempfile::tempdir().unwrap();
    let common = ["--set", "model=model1", "--set", "H=0.7", "--set", "N=8", "--seed", "11"];
    ok(&run(&[&["simulate"][..], &common].concat(), dir.path()));
    let direct = ok(&run(&[&["estimate"][..], &common].concat(), dir.path()));
    let input = format!("input={}", dir.path().join("paths.csv").display());
    let from_file = ok(&run(&[&["estimate", "--set", &input][..], &common].concat(), dir.path()));
    // 17 significant digits make the file lossless
    assert_eq!(direct, from_file);

    let record: serde_json::Value = serde_json::from_str(&read(dir.path().join("estimate.json"))).unwrap();
    for key in ["theta_tilde", "R_N", "iterations", "residual", "D_N", "I_N", "omega_holds", "aci_lower", "aci_upper"] {
        assert!(record.get(key).is_some(), "missing {key}");
    }
    assert!(record["theta_tilde"].as_f64().unwrap().is_finite());
    assert!(record["omega_holds"].is_boolean());
}

#[test]
fn constant_drift_estimate_is_the_pathwise_term() {
    let dir = tempfile::tempdir().unwrap();
    let text = ok(&run(&["estimate", "--set", "model=custom:2", "--set", "H=0.8", "--set", "N=5"], dir.path()));
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["R_N"].as_f64().unwrap(), 0.0);
    assert_eq!(v["theta_tilde"].as_f64(), v["I_N"].as_f64());
}

#[test]
fn bm_estimate_record() {
    let dir = tempfile::tempdir().unwrap();
    let text = ok(&run(&["estimate", "--set", "model=model2", "--set", "mode=bm", "--set", "N=30"], dir.path()));
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    let (th, d, vv) = (v["theta_hat"].as_f64().unwrap(), v["D_Nn"].as_f64().unwrap(), v["V_Nn"].as_f64().unwrap());
    assert_eq!(th, vv / d);
}

#[test]
fn experiment_files() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["experiment", "--set", "model=model2", "--set", "H=0.9", "--set", "N=6", "--set", "replications=1"];
    ok(&run(&args, dir.path()));
    let summary = read(dir.path().join("summary.csv"));
    let lines: Vec<&str> = summary.lines().collect();
    assert_eq!(lines[0], "model,H,N_max,replications,mean_error,std_error,coverage,seconds");
    assert_eq!(lines.len(), 2);
    assert!(lines[1].starts_with("model2,9.0000000000000002e-1,6,1,"));
    assert!(lines[1].ends_with(','), "seconds are empty unless timing is requested");
    let traj = read(dir.path().join("trajectories.csv"));
    assert_eq!(traj.lines().next().unwrap(), "trial,N,estimate,aci_lower,aci_upper");
    assert_eq!(traj.lines().count(), 1 + 6);

    let timed = tempfile::tempdir().unwrap();
    ok(&run(&[&args[..], &["--set", "timing=true"]].concat(), timed.path()));
    assert!(!read(timed.path().join("summary.csv")).lines().nth(1).unwrap().ends_with(','));

    let json = tempfile::tempdir().unwrap();
    ok(&run(&[&args[..], &["--format", "json"]].concat(), json.path()));
    let v: serde_json::Value = serde_json::from_str(&read(json.path().join("summary.json"))).unwrap();
    assert_eq!(v[0]["N_max"], 6);
    assert_eq!(v[0]["model"], "model2");
}

#[test]
fn seed_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let base = ["simulate", "--set", "model=model2", "--set", "H=0.7", "--set", "N=2"];
    let with_flag = |seed: &str, env: Option<&str>| {
        let mut c = bin();
        c.args(base).arg("--out").arg(dir.path());
        if !seed.is_empty() {
            c.args(["--seed", seed]);
        }
        if let Some(e) = env {
            c.env("FSDE_DRIFT_SEED", e);
        }
        ok(&c.output().unwrap());
        read(dir.path().join("noise.csv"))
    };
    let s5 = with_flag("5", None);
    let s6 = with_flag("6", None);
    assert_ne!(s5, s6);
    assert_eq!(with_flag("", Some("5")), s5);
    assert_eq!(with_flag("6", Some("5")), s6);
}

#[test]
fn sweep_grids() {
    let dir = tempfile::tempdir().unwrap();
    let common = ["--set", "model=model1", "--set", "H=0.9", "--set", "N=15", "--set", "replications=5", "--seed", "2"];
    ok(&run(&[&["sweep", "--set", "thresholds=0.5:0.1:31"][..], &common].concat(), dir.path()));
    let sweep = read(dir.path().join("sweep.csv"));
    assert_eq!(sweep.lines().next().unwrap(), "threshold,mean_error");
    assert_eq!(sweep.lines().count(), 32);
    assert!(sweep.lines().nth(31).unwrap().starts_with("3.5000000000000000e0,"));

    let m2 = tempfile::tempdir().unwrap();
    ok(&run(
        &["sweep", "--set", "model=model2", "--set", "H=0.9", "--set", "N=15", "--set", "replications=3", "--set", "thresholds=1:0.5:31"],
        m2.path(),
    ));
    let text = read(m2.path().join("sweep.csv"));
    assert_eq!(text.lines().count(), 32);
    assert!(text.lines().nth(31).unwrap().starts_with("1.6000000000000000e1,"));

    // a single threshold reproduces the experiment's mean error at that threshold
    let one = tempfile::tempdir().unwrap();
    ok(&run(&[&["sweep", "--set", "thresholds=1.3:0:1"][..], &common].concat(), one.path()));
    let exp = tempfile::tempdir().unwrap();
    ok(&run(&[&["experiment", "--set", "d=1.3"][..], &common].concat(), exp.path()));
    let sweep_err = read(one.path().join("sweep.csv")).lines().nth(1).unwrap().split(',').nth(1).unwrap().to_string();
    let exp_err = read(exp.path().join("summary.csv")).lines().nth(1).unwrap().split(',').nth(4).unwrap().to_string();
    assert_eq!(sweep_err, exp_err);

    let o = run(&[&["sweep", "--set", "thresholds=1:0.5:0"][..], &common].concat(), dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn coverage_file() {
    let dir = tempfile::tempdir().unwrap();
    ok(&run(
        &["coverage", "--set", "model=model2", "--set", "mode=bm", "--set", "N=20", "--set", "replications=10"],
        dir.path(),
    ));
    let text = read(dir.path().join("coverage.csv"));
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    let cov: f64 = row[6].parse().unwrap();
    assert!((0.0..=1.0).contains(&cov));
}
