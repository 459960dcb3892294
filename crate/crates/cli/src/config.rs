//! Experiment configuration files.
//!
//! TOML with one table per concern:
//!
//! ```toml
//! [experiment]
//! arms = 10
//! plays = 2
//! horizon = 10000
//! seeds = [0, 1, 2]
//! output_dir = "out"          # relative to this file
//!
//! [delays]
//! kind = "uniform"            # fixed | uniform | file
//! d_bar = 4
//!
//! [losses]
//! kind = "bernoulli"          # bernoulli | fixed-sequence | shifting
//! means = [0.1, 0.2, ...]
//!
//! [params]                    # optional overrides of the tuned schedule
//! gamma = 0.05
//!
//! [sweep]                     # only read by `sweep`
//! axis = "T"                  # T | d_bar | k | K
//! values = [1000, 2000, 4000]
//! ```

use std::fmt;
use std::path::{Path, PathBuf};

use dexp3m::environment::{DelaySpec, LossSpec, ParamOverrides, RunConfig};
use dexp3m::feedback::DeliveryOrder;
use dexp3m::policy::{self, EstimationMode};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    pub arms: usize,
    pub plays: usize,
    pub horizon: usize,
    pub seeds: Vec<u64>,
    #[serde(default = "default_policy")]
    pub policy: String,
    #[serde(default)]
    pub estimation: EstimationMode,
    #[serde(default)]
    pub delivery_order: DeliveryOrder,
    #[serde(default = "default_output")]
    pub output_dir: PathBuf,
}

fn default_policy() -> String {
    policy::Dexp3m::NAME.to_string()
}

fn default_output() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepAxis {
    #[serde(rename = "T")]
    Horizon,
    #[serde(rename = "d_bar")]
    DBar,
    #[serde(rename = "k")]
    Plays,
    #[serde(rename = "K")]
    Arms,
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SweepAxis::Horizon => "T",
            SweepAxis::DBar => "d_bar",
            SweepAxis::Plays => "k",
            SweepAxis::Arms => "K",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub axis: SweepAxis,
    pub values: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentSection,
    pub delays: DelaySpec,
    pub losses: LossSpec,
    #[serde(default)]
    pub params: ParamOverrides,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
}

/// A parsed config together with where it came from.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub config: ExperimentConfig,
    pub path: PathBuf,
    /// SHA-256 of the file bytes.
    pub hash: String,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    /// Reads, parses, resolves relative paths against the file's directory
    /// and validates.
    pub fn load(path: &Path) -> Result<LoadedConfig> {
        let bytes = std::fs::read(path).map_err(CliError::io(path))?;
        let text = String::from_utf8(bytes.clone())
            .map_err(|_| CliError::Config(format!("{} is not UTF-8", path.display())))?;
        let mut config = Self::parse(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        config.resolve_paths(base);
        config.validate()?;
        use sha2::Digest;
        Ok(LoadedConfig {
            config,
            path: path.to_path_buf(),
            hash: hex::encode(sha2::Sha256::digest(&bytes)),
        })
    }

    fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.experiment.output_dir);
        if let Some(f) = self.delays.file.as_mut() {
            fix(f);
        }
        if let Some(f) = self.losses.file.as_mut() {
            fix(f);
        }
    }

    pub fn validate(&self) -> Result<()> {
        let e = &self.experiment;
        if e.plays == 0 || e.plays > e.arms {
            return Err(CliError::Config(format!(
                "need 1 <= plays <= arms, got plays={}, arms={}",
                e.plays, e.arms
            )));
        }
        if e.horizon == 0 {
            return Err(CliError::Config("horizon must be at least 1".into()));
        }
        if e.seeds.is_empty() {
            return Err(CliError::Config("at least one seed is required".into()));
        }
        let mut sorted = e.seeds.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != e.seeds.len() {
            return Err(CliError::Config("seeds must be distinct".into()));
        }
        if let Some(sweep) = &self.sweep {
            if sweep.values.is_empty() {
                return Err(CliError::Config("sweep needs at least one value".into()));
            }
        }
        // build every named strategy once so typos fail here, not mid-run
        self.run_config(e.seeds[0]).validate()?;
        self.delays.build()?;
        let generator = self.losses.build()?;
        if generator.arms() != e.arms {
            return Err(CliError::Config(format!(
                "loss generator has {} arms, experiment has {}",
                generator.arms(),
                e.arms
            )));
        }
        if let Some(max) = generator.max_horizon() {
            if max < e.horizon {
                return Err(CliError::Config(format!(
                    "loss sequence covers {max} rounds, horizon is {}",
                    e.horizon
                )));
            }
        }
        Ok(())
    }

    pub fn run_config(&self, seed: u64) -> RunConfig {
        let e = &self.experiment;
        RunConfig {
            arms: e.arms,
            plays: e.plays,
            horizon: e.horizon,
            seed,
            policy: e.policy.clone(),
            losses: self.losses.clone(),
            delays: self.delays.clone(),
            overrides: self.params,
            estimation: e.estimation,
            delivery_order: e.delivery_order,
            record_trajectory: true,
        }
    }

    /// This config with the sweep axis set to `value`.
    pub fn at_axis(&self, axis: SweepAxis, value: usize) -> Result<Self> {
        let mut c = self.clone();
        c.sweep = None;
        match axis {
            SweepAxis::Horizon => c.experiment.horizon = value,
            SweepAxis::DBar => c.delays.d_bar = value,
            SweepAxis::Plays => c.experiment.plays = value,
            SweepAxis::Arms => {
                c.experiment.arms = value;
                c.losses = respread_means(&self.losses, value)?;
            }
        }
        c.validate()?;
        Ok(c)
    }
}

/// For a `K` sweep: re-spread Bernoulli means evenly over their original range.
fn respread_means(spec: &LossSpec, arms: usize) -> Result<LossSpec> {
    let means = match (spec.kind.as_str(), &spec.means) {
        ("bernoulli", Some(m)) if !m.is_empty() => m,
        _ => {
            return Err(CliError::Config(
                "sweeping K needs `bernoulli` losses with `means`".into(),
            ))
        }
    };
    let lo = means.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = means.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let spread = if arms == 1 {
        vec![lo]
    } else {
        (0..arms)
            .map(|i| lo + (hi - lo) * i as f64 / (arms - 1) as f64)
            .collect()
    };
    Ok(LossSpec::bernoulli(spread))
}
