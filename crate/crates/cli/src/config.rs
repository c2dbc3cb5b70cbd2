//! Experiment configuration, merged from defaults, a JSON file, the
//! environment and command-line flags (in increasing precedence).

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

pub const SEED_ENV: &str = "SLELAB_SEED";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: String,
    pub seed: u64,
    pub radius: f64,
    pub width: i32,
    pub height: i32,
    pub kappa: f64,
    pub mode: String,
    #[serde(rename = "T")]
    pub t_max: f64,
    pub dt: f64,
    pub delta: f64,
    pub n: usize,
    pub budget: String,
    pub model: String,
    pub max_trees: u64,
    pub out: PathBuf,
    pub deterministic: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            experiment: String::new(),
            seed: 1,
            radius: 100.0,
            width: 32,
            height: 16,
            kappa: 2.0,
            mode: "chordal".into(),
            t_max: 1.0,
            dt: 1e-3,
            delta: 0.3,
            n: 100,
            budget: "small".into(),
            model: "lerw".into(),
            max_trees: 200,
            out: PathBuf::from("out"),
            deterministic: false,
        }
    }
}

/// Values given on the command line; `None` means not given.
#[derive(Clone, Debug, Default, clap::Args)]
pub struct Overrides {
    /// JSON config file; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// RNG seed (also read from SLELAB_SEED).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Omit timestamps from figures.
    #[arg(long, global = true)]
    pub deterministic: bool,
    #[arg(long)]
    pub radius: Option<f64>,
    #[arg(long)]
    pub width: Option<i32>,
    #[arg(long)]
    pub height: Option<i32>,
    #[arg(long)]
    pub kappa: Option<f64>,
    /// chordal or radial.
    #[arg(long)]
    pub mode: Option<String>,
    /// Capacity horizon.
    #[arg(long = "T", alias = "t-max")]
    pub t_max: Option<f64>,
    /// Capacity step of sampled SLE traces.
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
    /// Number of samples.
    #[arg(long)]
    pub n: Option<usize>,
    /// small or full.
    #[arg(long)]
    pub budget: Option<String>,
    /// lerw or peano.
    #[arg(long)]
    pub model: Option<String>,
    #[arg(long)]
    pub max_trees: Option<u64>,
}

impl Overrides {
    pub fn resolve(&self, experiment: &str, env_seed: Option<String>) -> Result<ExperimentConfig> {
        let mut c = match &self.config {
            Some(p) => load(p)?,
            None => ExperimentConfig::default(),
        };
        c.experiment = experiment.to_string();
        if let Some(s) = env_seed {
            c.seed = s.trim().parse().with_context(|| format!("{SEED_ENV}={s:?} is not an integer"))?;
        }
        macro_rules! take {
            ($($f:ident),*) => {$(if let Some(v) = &self.$f { c.$f = v.clone(); })*};
        }
        take!(seed, out, radius, width, height, kappa, mode, t_max, dt, delta, n, budget, model, max_trees);
        c.deterministic |= self.deterministic;
        Ok(c)
    }
}

pub fn load(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}
