use std::path::Path;
use std::process::Command;

use plap::experiment::{run_experiment, ExperimentConfig, ExperimentId, Manifest};
use plap::io::{read_json, sha256_file, Table};
use plap::Error;
use serde_json::json;

/// Small parameter sets that exercise every experiment in seconds.
fn quick(id: ExperimentId) -> serde_json::Value {
    match id {
        ExperimentId::GraphDemo => json!({ "n": 200 }),
        ExperimentId::LimitCheck => json!({
            "energy": { "n": 400, "h": 0.1, "replicates": 2, "tolerance": 0.5 },
            "solution": { "n": 400, "hs": [0.1], "replicates": 2, "tolerance": 1.0 },
            "tensor": { "ps": [2], "ds": [2], "samples": 20000 }
        }),
        ExperimentId::Degeneracy => json!({
            "spike": { "epsilons": [0.1, 0.05] },
            "log": { "epsilons": [0.1, 0.01] },
            "quadrature": { "variant": "MonteCarlo", "samples": 20000, "seed": 3 }
        }),
        ExperimentId::Spectrum => json!({ "epsilons": [0.1], "j_max": 1 }),
        ExperimentId::Rates => json!({
            "epsilons": [0.1, 0.05], "ns": [32, 64], "coupled_ns": [32, 64],
            "lambdas": [1e-6, 1e-3, 1.0], "lipschitz": [1.0, 10.0, 100.0],
            "replicates": 2, "n_compare": 64
        }),
        ExperimentId::AmleCheck => json!({ "points": 20 }),
        ExperimentId::PenalizedCheck => json!({ "graphs": 2, "n_max": 40 }),
    }
}

fn config(id: ExperimentId, out: &Path) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::new(id, 5);
    cfg.params = quick(id);
    cfg.out = Some(out.to_path_buf());
    cfg.threads = Some(2);
    cfg
}

#[test]
fn every_experiment_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    for id in ExperimentId::ALL {
        let (a, b) = (dir.path().join(format!("{id}-a")), dir.path().join(format!("{id}-b")));
        let ra = run_experiment(&config(id, &a)).unwrap_or_else(|e| panic!("{id}: {e}"));
        let mut cfg = config(id, &b);
        cfg.threads = Some(1);
        let rb = run_experiment(&cfg).unwrap();
        assert!(!ra.manifest.files.is_empty(), "{id}");
        assert!(!ra.manifest.checks.is_empty(), "{id}");
        assert!(ra.manifest.files.iter().any(|f| f.path.ends_with(".csv")), "{id}");
        assert!(ra.manifest.files.iter().any(|f| f.path.ends_with(".svg")), "{id}");
        for (fa, fb) in ra.manifest.files.iter().zip(&rb.manifest.files) {
            assert_eq!(fa.path, fb.path);
            assert_eq!(sha256_file(&a.join(&fa.path)).unwrap(), fa.sha256, "{id}: {}", fa.path);
            if fa.path.ends_with(".csv") {
                assert_eq!(std::fs::read(a.join(&fa.path)).unwrap(), std::fs::read(b.join(&fb.path)).unwrap(), "{id}: {}", fa.path);
            }
        }
        let m: Manifest = read_json(&ra.manifest_path).unwrap();
        assert_eq!(m.experiment, id);
        assert_eq!(m.config.params, quick(id));
        assert_eq!(m.checks, ra.manifest.checks);
    }
}

#[test]
fn graph_demo_infinity_curve_is_monotone() {
    let dir = tempfile::tempdir().unwrap();
    let r = run_experiment(&config(ExperimentId::GraphDemo, dir.path())).unwrap();
    assert!(r.manifest.files.iter().any(|f| f.path == "solution_p2.csv"));
    let t = Table::read(&dir.path().join("curves.csv")).unwrap();
    let x = t.column("x").unwrap();
    assert!(x.windows(2).all(|w| w[0] <= w[1]));
    let finf = t.column("f_pinf").unwrap();
    let between: Vec<f64> = x.iter().zip(&finf).filter(|(x, _)| (0.0..=4.0).contains(*x)).map(|(_, f)| *f).collect();
    assert!(between.len() > 50);
    assert!(between.windows(2).all(|w| w[1] >= w[0] - 1e-9));
    assert_eq!(t.column("f_p2").unwrap().len(), x.len());
}

#[test]
fn rates_emit_scaled_series() {
    let dir = tempfile::tempdir().unwrap();
    let r = run_experiment(&config(ExperimentId::Rates, dir.path())).unwrap();
    assert!(r.manifest.files.iter().any(|f| f.path == "mse_coupled.svg"));
    let t = Table::read(&dir.path().join("mse.csv")).unwrap();
    let (n, mse, scaled) = (t.column("n").unwrap(), t.column("mean_mse").unwrap(), t.column("mse_n23").unwrap());
    let coupled: Vec<usize> = (0..t.rows.len()).filter(|&i| t.rows[i][0] == "coupled").collect();
    assert_eq!(coupled.len(), 4);
    for i in coupled {
        assert!((scaled[i] - mse[i] * n[i].powf(2.0 / 3.0)).abs() <= 1e-12 * scaled[i].abs().max(1.0));
    }
}

#[test]
fn config_validation() {
    let err = ExperimentConfig::from_json(r#"{"experiment": "graph-demo", "seed": 1, "colour": 3}"#).unwrap_err();
    assert!(matches!(err, Error::Config { .. }), "{err}");
    let err = ExperimentConfig::from_json(r#"{"experiment": "graph-demo", "seed": 1, "params": {"nn": 3}}"#).unwrap_err();
    assert!(err.to_string().contains("nn"), "{err}");
    let err = ExperimentConfig::from_json(r#"{"experiment": "rates", "seed": 1, "replicates": 0}"#).unwrap_err();
    assert!(err.to_string().contains("replicates"), "{err}");
    assert!(ExperimentConfig::from_json(r#"{"experiment": "bogus", "seed": 1}"#).is_err());
    assert!(ExperimentConfig::from_json(r#"{"experiment": "spectrum"}"#).is_err());
    let err = ExperimentConfig::from_json(r#"{"experiment": "spectrum", "seed": 1, "params": {"sigma": -1}}"#).unwrap_err();
    assert!(err.to_string().contains("sigma"), "{err}");
    let ok = ExperimentConfig::from_json(r#"{"experiment": "spectrum", "seed": 1}"#).unwrap();
    assert_eq!(ok.out_dir(), Path::new("out/spectrum"));
    for id in ExperimentId::ALL {
        assert_eq!(id.name().parse::<ExperimentId>().unwrap(), id);
        ExperimentConfig::new(id, 0).validate().unwrap();
    }
}

#[test]
fn cli_runs_a_config() {
    let exe = env!("CARGO_BIN_EXE_plap");
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("spectrum.json");
    std::fs::write(&cfg_path, json!({ "experiment": "spectrum", "seed": 1, "params": quick(ExperimentId::Spectrum) }).to_string()).unwrap();
    let out = dir.path().join("out");
    let o = Command::new(exe)
        .args(["spectrum", "--config", cfg_path.to_str().unwrap(), "--seed", "9", "--out", out.to_str().unwrap(), "--threads", "1", "--strict"])
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("[pass]"), "{stdout}");
    let m: Manifest = read_json(&out.join("manifest.json")).unwrap();
    assert_eq!(m.config.seed, 9);
    assert_eq!(m.config.threads, Some(1));

    let o = Command::new(exe).args(["rates", "--config", cfg_path.to_str().unwrap()]).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("experiment"));

    let o = Command::new(exe).args(["graph-demo", "--defaults"]).output().unwrap();
    assert!(o.status.success());
    let cfg = ExperimentConfig::from_json(&String::from_utf8_lossy(&o.stdout)).unwrap();
    assert_eq!(cfg.experiment, ExperimentId::GraphDemo);

    let o = Command::new(exe).args(["nope", "--seed", "1"]).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
}
