use rand::RngCore;

use super::Policy;
use crate::depround::{depround, scale_and_cap, RoundingInput};
use crate::error::{invalid, Result};
use crate::feedback::Observation;
use crate::simplex::{Action, SimplexDistribution};

/// Plays a uniformly random `k`-subset every round and ignores feedback.
/// Baseline for regret comparisons.
#[derive(Debug, Clone)]
pub struct UniformPolicy {
    p: SimplexDistribution,
    rounding: RoundingInput,
    round: usize,
    update_count: usize,
}

impl UniformPolicy {
    pub const NAME: &'static str = "uniform";

    pub fn new(arms: usize, plays: usize) -> Result<Self> {
        if plays == 0 || plays > arms {
            return Err(invalid!("need 1 <= k <= K, got k={plays}, K={arms}"));
        }
        let p = SimplexDistribution::uniform(arms)?;
        let rounding = scale_and_cap(&p, plays)?;
        Ok(Self {
            p,
            rounding,
            round: 1,
            update_count: 0,
        })
    }
}

impl Policy for UniformPolicy {
    fn name(&self) -> &'static str {
        Self::NAME
    }

    fn distribution(&self) -> &SimplexDistribution {
        &self.p
    }

    fn round(&self) -> usize {
        self.round
    }

    fn update_count(&self) -> usize {
        self.update_count
    }

    fn select_action(&self, rng: &mut dyn RngCore) -> Result<Action> {
        depround(&self.rounding, rng)
    }

    fn end_of_round(
        &mut self,
        items: &[&Observation],
        trace: &mut dyn FnMut(&SimplexDistribution),
    ) -> Result<()> {
        for _ in items {
            self.update_count += 1;
            trace(&self.p);
        }
        self.round += 1;
        Ok(())
    }
}
