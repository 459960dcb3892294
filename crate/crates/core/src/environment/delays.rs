use std::path::{Path, PathBuf};
use std::sync::OnceLock;

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::feedback::FeedbackQueue;
use crate::registry::Registry;

/// Per-round delays `d_1..d_T` and their declared upper bound.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DelaySchedule {
    delays: Vec<usize>,
    d_bar: usize,
}

impl DelaySchedule {
    pub fn new(delays: Vec<usize>, d_bar: usize) -> Result<Self> {
        if delays.is_empty() {
            return Err(invalid!("delay schedule must cover at least one round"));
        }
        if let Some((t, d)) = delays.iter().enumerate().find(|(_, d)| **d > d_bar) {
            return Err(invalid!("delay {d} at round {} exceeds d_bar={d_bar}", t + 1));
        }
        Ok(Self { delays, d_bar })
    }

    pub fn horizon(&self) -> usize {
        self.delays.len()
    }

    pub fn d_bar(&self) -> usize {
        self.d_bar
    }

    pub fn delays(&self) -> &[usize] {
        &self.delays
    }

    /// Delay of round `t` (1-based).
    pub fn delay(&self, t: usize) -> usize {
        self.delays[t - 1]
    }

    /// `D = sum_t d_t`, as declared.
    pub fn total_delay(&self) -> usize {
        self.delays.iter().sum()
    }

    /// Delays after clamping delivery to the horizon.
    pub fn effective_delays(&self) -> Vec<usize> {
        let horizon = self.horizon();
        self.delays
            .iter()
            .enumerate()
            .map(|(i, &d)| FeedbackQueue::delivery_round(i + 1, d, horizon) - (i + 1))
            .collect()
    }

    pub fn max_delay(&self) -> usize {
        self.delays.iter().copied().max().unwrap_or(0)
    }
}

/// Reads one nonnegative integer per line. Blank lines and `#` comments are skipped.
pub fn read_delay_file(path: &Path) -> Result<Vec<usize>> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut delays = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let d = line.parse::<usize>().map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: n + 1,
            msg: format!("expected a nonnegative integer delay: {e}"),
        })?;
        delays.push(d);
    }
    Ok(delays)
}

/// Declarative description of a delay model, as it appears in configs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DelaySpec {
    pub kind: String,
    #[serde(default)]
    pub d_bar: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub file: Option<PathBuf>,
}

impl DelaySpec {
    pub fn fixed(d_bar: usize) -> Self {
        Self {
            kind: FixedDelay::NAME.into(),
            d_bar,
            file: None,
        }
    }

    pub fn uniform(d_bar: usize) -> Self {
        Self {
            kind: UniformDelay::NAME.into(),
            d_bar,
            file: None,
        }
    }

    pub fn file(path: impl Into<PathBuf>, d_bar: usize) -> Self {
        Self {
            kind: FileDelay::NAME.into(),
            d_bar,
            file: Some(path.into()),
        }
    }

    pub fn build(&self) -> Result<Box<dyn DelayModel>> {
        registry().create(&self.kind, self)
    }
}

/// Produces a whole delay schedule up front.
pub trait DelayModel: Send + Sync {
    fn name(&self) -> &'static str;
    fn d_bar(&self) -> usize;
    fn schedule(&self, horizon: usize, rng: &mut dyn RngCore) -> Result<DelaySchedule>;
}

/// Every round waits exactly `d_bar`.
#[derive(Debug, Clone)]
pub struct FixedDelay {
    pub d_bar: usize,
}

impl FixedDelay {
    pub const NAME: &'static str = "fixed";
}

impl DelayModel for FixedDelay {
    fn name(&self) -> &'static str {
        Self::NAME
    }

    fn d_bar(&self) -> usize {
        self.d_bar
    }

    fn schedule(&self, horizon: usize, _rng: &mut dyn RngCore) -> Result<DelaySchedule> {
        DelaySchedule::new(vec![self.d_bar; horizon], self.d_bar)
    }
}

/// I.i.d. uniform delays on `0..=d_bar`.
#[derive(Debug, Clone)]
pub struct UniformDelay {
    pub d_bar: usize,
}

impl UniformDelay {
    pub const NAME: &'static str = "uniform";
}

impl DelayModel for UniformDelay {
    fn name(&self) -> &'static str {
        Self::NAME
    }

    fn d_bar(&self) -> usize {
        self.d_bar
    }

    fn schedule(&self, horizon: usize, rng: &mut dyn RngCore) -> Result<DelaySchedule> {
        let delays = (0..horizon)
            .map(|_| rng.random_range(0..=self.d_bar))
            .collect();
        DelaySchedule::new(delays, self.d_bar)
    }
}

/// A schedule read verbatim from a file, one delay per line.
#[derive(Debug, Clone)]
pub struct FileDelay {
    pub path: PathBuf,
    pub delays: Vec<usize>,
    pub d_bar: usize,
}

impl FileDelay {
    pub const NAME: &'static str = "file";

    pub fn load(path: &Path, d_bar: usize) -> Result<Self> {
        let delays = read_delay_file(path)?;
        // validate against d_bar at load time
        DelaySchedule::new(delays.clone(), d_bar).map_err(|e| match e {
            Error::InvalidArgument(msg) => Error::Parse {
                path: path.to_path_buf(),
                line: 0,
                msg,
            },
            e => e,
        })?;
        Ok(Self {
            path: path.to_path_buf(),
            delays,
            d_bar,
        })
    }
}

impl DelayModel for FileDelay {
    fn name(&self) -> &'static str {
        Self::NAME
    }

    fn d_bar(&self) -> usize {
        self.d_bar
    }

    fn schedule(&self, horizon: usize, _rng: &mut dyn RngCore) -> Result<DelaySchedule> {
        if self.delays.len() != horizon {
            return Err(invalid!(
                "{} holds {} delays but the horizon is {horizon}",
                self.path.display(),
                self.delays.len()
            ));
        }
        DelaySchedule::new(self.delays.clone(), self.d_bar)
    }
}

pub type DelayRegistry = Registry<dyn DelayModel, DelaySpec>;

/// Built-in delay models: `fixed`, `uniform`, `file`.
pub fn registry() -> &'static DelayRegistry {
    static REGISTRY: OnceLock<DelayRegistry> = OnceLock::new();
    REGISTRY.get_or_init(|| {
        let mut reg: DelayRegistry = Registry::new("delay model");
        reg.register(FixedDelay::NAME, |s| Ok(Box::new(FixedDelay { d_bar: s.d_bar })))
            .register(UniformDelay::NAME, |s| {
                Ok(Box::new(UniformDelay { d_bar: s.d_bar }))
            })
            .register(FileDelay::NAME, |s| {
                let path = s
                    .file
                    .as_deref()
                    .ok_or_else(|| invalid!("delay kind `file` needs a `file` path"))?;
                Ok(Box::new(FileDelay::load(path, s.d_bar)?))
            });
        reg
    })
}
