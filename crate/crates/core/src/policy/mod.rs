//! Learners. Each one sits behind [`Policy`] and is built by name from
//! [`registry`].

mod dexp3m;
mod params;
mod uniform;

use std::sync::OnceLock;

use rand::RngCore;
use serde::{Deserialize, Serialize};

pub use dexp3m::{apply_feedback_item, estimate_loss, Dexp3m, PolicyState};
pub use params::{regret_bound, PolicyParams};
pub use uniform::UniformPolicy;

use crate::error::Result;
use crate::feedback::Observation;
use crate::registry::Registry;
use crate::simplex::{Action, SimplexDistribution};

/// Which distribution the loss estimate of the `n`-th item in a round divides by.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EstimationMode {
    /// The distribution just before item `n` is applied.
    #[default]
    VirtualSlot,
    /// The distribution at the start of the round, for every item.
    Frozen,
}

impl EstimationMode {
    pub fn as_str(self) -> &'static str {
        match self {
            EstimationMode::VirtualSlot => "virtual-slot",
            EstimationMode::Frozen => "frozen",
        }
    }
}

/// What a policy factory gets to work with.
#[derive(Debug, Clone, Copy)]
pub struct PolicyContext {
    pub params: PolicyParams,
    pub estimation: EstimationMode,
}

/// A multiple-play learner fed with delayed, anonymous feedback.
pub trait Policy: Send {
    fn name(&self) -> &'static str;

    /// The distribution used for the next selection.
    fn distribution(&self) -> &SimplexDistribution;

    /// Current real round, starting at 1.
    fn round(&self) -> usize;

    /// Feedback items consumed so far.
    fn update_count(&self) -> usize;

    /// Draws the round's action. Does not change the distribution.
    fn select_action(&self, rng: &mut dyn RngCore) -> Result<Action>;

    /// Consumes the round's feedback in order and advances the round.
    /// `trace` sees the distribution after every single item.
    fn end_of_round(
        &mut self,
        items: &[&Observation],
        trace: &mut dyn FnMut(&SimplexDistribution),
    ) -> Result<()>;
}

pub type PolicyRegistry = Registry<dyn Policy, PolicyContext>;

/// Built-in learners: `dexp3m` and `uniform`.
pub fn registry() -> &'static PolicyRegistry {
    static REGISTRY: OnceLock<PolicyRegistry> = OnceLock::new();
    REGISTRY.get_or_init(|| {
        let mut reg: PolicyRegistry = Registry::new("policy");
        reg.register(Dexp3m::NAME, |ctx| {
            Ok(Box::new(Dexp3m::new(ctx.params, ctx.estimation)?))
        })
        .register(UniformPolicy::NAME, |ctx| {
            Ok(Box::new(UniformPolicy::new(ctx.params.arms, ctx.params.plays)?))
        });
        reg
    })
}
