//! Config-driven experiment runs with CSV tables, SVG plots and a JSON
//! manifest.
//!
//! A run is described by one JSON file:
//!
//! ```json
//! { "experiment": "graph-demo", "seed": 7, "params": { "h": 0.4 } }
//! ```
//!
//! Omitted parameters take the defaults of the experiment's `Params`
//! type; unknown fields are rejected. Every table is a pure function of the
//! config, so re-running gives byte-identical CSV files.

pub mod amle;
pub mod degeneracy;
pub mod demo;
pub mod limit;
pub mod penalized;
pub mod rates;
pub mod spectra;

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::{self, Table};
use crate::plot::{render_plot, PlotStyle, Series};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentId {
    GraphDemo,
    LimitCheck,
    Degeneracy,
    Spectrum,
    Rates,
    AmleCheck,
    PenalizedCheck,
}

impl ExperimentId {
    pub const ALL: [ExperimentId; 7] = [
        ExperimentId::GraphDemo,
        ExperimentId::LimitCheck,
        ExperimentId::Degeneracy,
        ExperimentId::Spectrum,
        ExperimentId::Rates,
        ExperimentId::AmleCheck,
        ExperimentId::PenalizedCheck,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ExperimentId::GraphDemo => "graph-demo",
            ExperimentId::LimitCheck => "limit-check",
            ExperimentId::Degeneracy => "degeneracy",
            ExperimentId::Spectrum => "spectrum",
            ExperimentId::Rates => "rates",
            ExperimentId::AmleCheck => "amle-check",
            ExperimentId::PenalizedCheck => "penalized-check",
        }
    }
}

impl fmt::Display for ExperimentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        ExperimentId::ALL.into_iter().find(|e| e.name() == s).ok_or_else(|| Error::Config {
            field: "experiment".into(),
            reason: format!("unknown experiment `{s}`"),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentId,
    pub seed: u64,
    /// Replicate count; each experiment documents what it replicates.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub replicates: Option<usize>,
    /// Output directory; defaults to `out/<experiment>`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    /// Worker threads; defaults to all cores.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    #[serde(default)]
    pub params: serde_json::Value,
}

impl ExperimentConfig {
    pub fn new(experiment: ExperimentId, seed: u64) -> Self {
        ExperimentConfig { experiment, seed, replicates: None, out: None, threads: None, params: serde_json::Value::Null }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text).map_err(|e| Error::Config { field: "config".into(), reason: e.to_string() })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }

    /// Checks the global fields and parses `params` for the experiment.
    pub fn validate(&self) -> Result<()> {
        if self.replicates == Some(0) {
            return Err(config_err("replicates", "must be at least 1"));
        }
        if self.threads == Some(0) {
            return Err(config_err("threads", "must be at least 1"));
        }
        match self.experiment {
            ExperimentId::GraphDemo => self.params::<demo::Params>().map(drop),
            ExperimentId::LimitCheck => self.params::<limit::Params>().map(drop),
            ExperimentId::Degeneracy => self.params::<degeneracy::Params>().map(drop),
            ExperimentId::Spectrum => self.params::<spectra::Params>().map(drop),
            ExperimentId::Rates => self.params::<rates::Params>().map(drop),
            ExperimentId::AmleCheck => self.params::<amle::Params>().map(drop),
            ExperimentId::PenalizedCheck => self.params::<penalized::Params>().map(drop),
        }
    }

    /// Parses and validates `params` as `P`.
    pub fn params<P: ExperimentParams>(&self) -> Result<P> {
        let v = if self.params.is_null() { serde_json::json!({}) } else { self.params.clone() };
        let p: P = serde_json::from_value(v).map_err(|e| config_err("params", e.to_string()))?;
        p.validate()?;
        Ok(p)
    }

    pub fn out_dir(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(|| Path::new("out").join(self.experiment.name()))
    }
}

/// Parameters of one experiment.
pub trait ExperimentParams: DeserializeOwned + Serialize + Default {
    /// Field-level validation; errors name the offending field.
    fn validate(&self) -> Result<()>;
}

pub(crate) fn config_err(field: &str, reason: impl Into<String>) -> Error {
    Error::Config { field: field.into(), reason: reason.into() }
}

/// Outcome of one built-in assertion.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Check { name: name.into(), passed, detail: detail.into() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FileEntry {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Manifest {
    pub experiment: ExperimentId,
    pub config: ExperimentConfig,
    pub crate_version: String,
    pub wall_time_s: f64,
    pub files: Vec<FileEntry>,
    pub checks: Vec<Check>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

#[derive(Clone, Debug)]
pub struct ExperimentReport {
    pub out_dir: PathBuf,
    pub manifest_path: PathBuf,
    pub manifest: Manifest,
}

impl ExperimentReport {
    pub fn all_passed(&self) -> bool {
        self.manifest.checks.iter().all(|c| c.passed)
    }
}

/// State shared by an experiment while it runs.
pub struct Context {
    pub seed: u64,
    pub replicates: Option<usize>,
    out: PathBuf,
    pool: rayon::ThreadPool,
    files: Vec<String>,
    checks: Vec<Check>,
    warnings: Vec<String>,
}

impl Context {
    fn new(cfg: &ExperimentConfig, out: PathBuf) -> Result<Self> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.threads.unwrap_or(0))
            .build()
            .map_err(|e| config_err("threads", e.to_string()))?;
        Ok(Context { seed: cfg.seed, replicates: cfg.replicates, out, pool, files: Vec::new(), checks: Vec::new(), warnings: Vec::new() })
    }

    /// Runs `f` on the worker pool; rayon iterators inside use it.
    pub fn install<T: Send>(&self, f: impl FnOnce() -> T + Send) -> T {
        self.pool.install(f)
    }

    /// `f(0), ..., f(n−1)` on the worker pool, in index order.
    pub fn par_map<T: Send>(&self, n: usize, f: impl Fn(usize) -> T + Sync + Send) -> Vec<T> {
        self.pool.install(|| (0..n).into_par_iter().map(f).collect())
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    /// Registers a file already written under the output directory.
    pub fn record(&mut self, name: &str) {
        self.files.push(name.to_string());
    }

    pub fn table(&mut self, name: &str, t: &Table) -> Result<()> {
        t.write(&self.path(name))?;
        self.record(name);
        Ok(())
    }

    pub fn plot(&mut self, name: &str, series: &[Series], style: &PlotStyle) -> Result<()> {
        render_plot(series, style, &self.path(name))?;
        self.record(name);
        Ok(())
    }

    pub fn check(&mut self, c: Check) {
        self.checks.push(c);
    }

    pub fn warn(&mut self, w: impl Into<String>) {
        self.warnings.push(w.into());
    }
}

/// Runs the configured experiment and writes its outputs and manifest.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let start = Instant::now();
    let out = cfg.out_dir();
    fs::create_dir_all(&out)?;
    let mut ctx = Context::new(cfg, out.clone())?;
    match cfg.experiment {
        ExperimentId::GraphDemo => demo::run(&cfg.params()?, &mut ctx)?,
        ExperimentId::LimitCheck => limit::run(&cfg.params()?, &mut ctx)?,
        ExperimentId::Degeneracy => degeneracy::run(&cfg.params()?, &mut ctx)?,
        ExperimentId::Spectrum => spectra::run(&cfg.params()?, &mut ctx)?,
        ExperimentId::Rates => rates::run(&cfg.params()?, &mut ctx)?,
        ExperimentId::AmleCheck => amle::run(&cfg.params()?, &mut ctx)?,
        ExperimentId::PenalizedCheck => penalized::run(&cfg.params()?, &mut ctx)?,
    }
    let mut files = Vec::new();
    for name in &ctx.files {
        let p = out.join(name);
        files.push(FileEntry { path: name.clone(), sha256: io::sha256_file(&p)?, bytes: fs::metadata(&p)?.len() });
    }
    let manifest = Manifest {
        experiment: cfg.experiment,
        config: cfg.clone(),
        crate_version: env!("CARGO_PKG_VERSION").to_string(),
        wall_time_s: start.elapsed().as_secs_f64(),
        files,
        checks: ctx.checks,
        warnings: ctx.warnings,
    };
    let manifest_path = out.join("manifest.json");
    io::write_json(&manifest, &manifest_path)?;
    Ok(ExperimentReport { out_dir: out, manifest_path, manifest })
}

/// `n` points log-spaced from `10^a` to `10^b`.
pub fn logspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![10f64.powf(a)];
    }
    (0..n).map(|k| 10f64.powf(a + (b - a) * k as f64 / (n - 1) as f64)).collect()
}

/// Largest over smallest of positive values.
pub fn spread(v: &[f64]) -> f64 {
    let hi = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lo = v.iter().cloned().fold(f64::INFINITY, f64::min);
    hi / lo
}

pub(crate) fn fmt_list(v: &[f64]) -> String {
    let s: Vec<String> = v.iter().map(|x| format!("{x:.4e}")).collect();
    format!("[{}]", s.join(", "))
}
