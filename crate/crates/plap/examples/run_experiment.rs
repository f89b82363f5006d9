//! Runs a configured experiment into a temporary directory and lists the
//! manifest, the same path the `plap` binary takes.

use plap::experiment::{run_experiment, ExperimentConfig, ExperimentId};
use plap::io::Table;

fn main() -> plap::Result<()> {
    let out = std::env::temp_dir().join("plap-example-spectrum");
    let mut cfg = ExperimentConfig::new(ExperimentId::Spectrum, 1);
    cfg.params = serde_json::json!({ "epsilons": [0.1, 0.01], "j_max": 1 });
    cfg.out = Some(out.clone());
    let report = run_experiment(&cfg)?;
    for f in &report.manifest.files {
        println!("{:<24} {:>8} bytes  {}", f.path, f.bytes, &f.sha256[..12]);
    }
    for c in &report.manifest.checks {
        println!("[{}] {}: {}", if c.passed { "pass" } else { "FAIL" }, c.name, c.detail);
    }
    if let Some(csv) = report.manifest.files.iter().find(|f| f.path.ends_with(".csv")) {
        let t = Table::read(&out.join(&csv.path))?;
        println!("{}: {} rows, columns {:?}", csv.path, t.rows.len(), t.header);
    }
    Ok(())
}
