use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use plap::experiment::{self, run_experiment, ExperimentConfig, ExperimentId, ExperimentParams};

/// Run a reproducible experiment and write CSV tables, SVG plots and a
/// manifest.
#[derive(Parser, Debug)]
#[command(name = "plap", version)]
struct Cli {
    /// graph-demo | limit-check | degeneracy | spectrum | rates | amle-check | penalized-check
    experiment: String,
    /// JSON config; without it the experiment's defaults are used.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    replicates: Option<usize>,
    /// Print the default parameters as JSON and exit.
    #[arg(long)]
    defaults: bool,
    /// Exit with status 1 if any built-in check fails.
    #[arg(long)]
    strict: bool,
}

fn defaults(id: ExperimentId) -> serde_json::Value {
    fn ser<P: ExperimentParams>() -> serde_json::Value {
        serde_json::to_value(P::default()).expect("serializable")
    }
    match id {
        ExperimentId::GraphDemo => ser::<experiment::demo::Params>(),
        ExperimentId::LimitCheck => ser::<experiment::limit::Params>(),
        ExperimentId::Degeneracy => ser::<experiment::degeneracy::Params>(),
        ExperimentId::Spectrum => ser::<experiment::spectra::Params>(),
        ExperimentId::Rates => ser::<experiment::rates::Params>(),
        ExperimentId::AmleCheck => ser::<experiment::amle::Params>(),
        ExperimentId::PenalizedCheck => ser::<experiment::penalized::Params>(),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: &Cli) -> plap::Result<ExitCode> {
    let id: ExperimentId = cli.experiment.parse()?;
    if cli.defaults {
        let mut cfg = ExperimentConfig::new(id, cli.seed.unwrap_or(0));
        cfg.params = defaults(id);
        println!("{}", serde_json::to_string_pretty(&cfg)?);
        return Ok(ExitCode::SUCCESS);
    }
    let mut cfg = match &cli.config {
        Some(path) => {
            let cfg = ExperimentConfig::load(path)?;
            if cfg.experiment != id {
                return Err(plap::Error::Config {
                    field: "experiment".into(),
                    reason: format!("config is for `{}`, command line asks for `{id}`", cfg.experiment),
                });
            }
            cfg
        }
        None => {
            let seed = cli.seed.ok_or_else(|| plap::Error::Config { field: "seed".into(), reason: "pass --seed or a config file".into() })?;
            ExperimentConfig::new(id, seed)
        }
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if cli.out.is_some() {
        cfg.out = cli.out.clone();
    }
    if cli.threads.is_some() {
        cfg.threads = cli.threads;
    }
    if cli.replicates.is_some() {
        cfg.replicates = cli.replicates;
    }
    let report = run_experiment(&cfg)?;
    for c in &report.manifest.checks {
        println!("[{}] {}: {}", if c.passed { "pass" } else { "FAIL" }, c.name, c.detail);
    }
    println!("{} files in {} ({:.1} s)", report.manifest.files.len(), report.out_dir.display(), report.manifest.wall_time_s);
    Ok(if cli.strict && !report.all_passed() { ExitCode::FAILURE } else { ExitCode::SUCCESS })
}
