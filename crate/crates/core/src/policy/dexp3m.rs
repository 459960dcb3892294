//! Exponential weights over the probability simplex with trimmed
//! normalization and uniform exploration, updated once per delivered
//! feedback item.

use rand::RngCore;

use super::{EstimationMode, Policy, PolicyParams};
use crate::depround::{depround, scale_and_cap};
use crate::error::{invalid, Error, Result};
use crate::feedback::Observation;
use crate::simplex::{compensated_sum, Action, SimplexDistribution, RENORM_DRIFT};

const FLOOR_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct PolicyState {
    pub p: SimplexDistribution,
    pub round: usize,
    /// Items applied so far, i.e. the index of the last virtual slot.
    pub update_count: usize,
}

impl PolicyState {
    pub fn init(arms: usize) -> Result<Self> {
        Ok(Self {
            p: SimplexDistribution::uniform(arms)?,
            round: 1,
            update_count: 0,
        })
    }
}

/// Importance-weighted estimate: observed loss over `p_now(i)` on the
/// observed arms, zero elsewhere.
pub fn estimate_loss(
    obs: &Observation,
    p_now: &SimplexDistribution,
    params: &PolicyParams,
) -> Result<Vec<f64>> {
    let probs = p_now.probs();
    let floor = params.floor() - FLOOR_SLACK;
    let mut est = vec![0.0; probs.len()];
    for &(arm, loss) in obs.arm_losses() {
        let p = *probs
            .get(arm)
            .ok_or_else(|| invalid!("observed arm {arm} out of range for K={}", probs.len()))?;
        if p < floor {
            return Err(Error::Invariant(format!(
                "p({arm}) = {p:e} below the exploration floor {:e}",
                params.floor()
            )));
        }
        est[arm] = loss / p;
    }
    Ok(est)
}

/// One multiplicative-weights step on the current distribution.
///
/// 1. `w~(i) = p(i) exp(-(k gamma / K) min(delta1, est(i)))`
/// 2. `w(i) = max(w~(i) / sum w~, delta2 / K)`
/// 3. `p'(i) = (1 - gamma) w(i) / sum w + gamma / K`
pub fn apply_feedback_item(
    state: &mut PolicyState,
    est: &[f64],
    params: &PolicyParams,
) -> Result<()> {
    let arms = state.p.arms();
    if est.len() != arms {
        return Err(invalid!("estimate has {} entries, expected {arms}", est.len()));
    }
    let rate = params.learning_rate();
    let raw: Vec<f64> = state
        .p
        .probs()
        .iter()
        .zip(est)
        .map(|(p, l)| p * (-rate * l.min(params.delta1)).exp())
        .collect();
    let raw_total = compensated_sum(raw.iter().copied());
    if !(raw_total > 0.0 && raw_total.is_finite()) {
        return Err(Error::Invariant(format!(
            "weight normalizer is {raw_total:e} after update {}",
            state.update_count + 1
        )));
    }

    let trim = params.delta2 / arms as f64;
    let trimmed: Vec<f64> = raw.iter().map(|w| (w / raw_total).max(trim)).collect();
    let trimmed_total = compensated_sum(trimmed.iter().copied());

    let explore = params.floor();
    let mut next: Vec<f64> = trimmed
        .iter()
        .map(|w| (1.0 - params.gamma) * w / trimmed_total + explore)
        .collect();
    let total = compensated_sum(next.iter().copied());
    if (total - 1.0).abs() > RENORM_DRIFT {
        next.iter_mut().for_each(|p| *p /= total);
    }

    state.p = SimplexDistribution::from_raw(next);
    state.update_count += 1;
    Ok(())
}

#[derive(Debug, Clone)]
pub struct Dexp3m {
    params: PolicyParams,
    estimation: EstimationMode,
    state: PolicyState,
}

impl Dexp3m {
    pub const NAME: &'static str = "dexp3m";

    pub fn new(params: PolicyParams, estimation: EstimationMode) -> Result<Self> {
        Ok(Self {
            params,
            estimation,
            state: PolicyState::init(params.arms)?,
        })
    }

    pub fn params(&self) -> &PolicyParams {
        &self.params
    }

    pub fn state(&self) -> &PolicyState {
        &self.state
    }
}

impl Policy for Dexp3m {
    fn name(&self) -> &'static str {
        Self::NAME
    }

    fn distribution(&self) -> &SimplexDistribution {
        &self.state.p
    }

    fn round(&self) -> usize {
        self.state.round
    }

    fn update_count(&self) -> usize {
        self.state.update_count
    }

    fn select_action(&self, rng: &mut dyn RngCore) -> Result<Action> {
        let input = scale_and_cap(&self.state.p, self.params.plays)?;
        depround(&input, rng)
    }

    fn end_of_round(
        &mut self,
        items: &[&Observation],
        trace: &mut dyn FnMut(&SimplexDistribution),
    ) -> Result<()> {
        let round_start = match self.estimation {
            EstimationMode::Frozen => Some(self.state.p.clone()),
            EstimationMode::VirtualSlot => None,
        };
        for obs in items {
            let basis = round_start.as_ref().unwrap_or(&self.state.p);
            let est = estimate_loss(obs, basis, &self.params)?;
            apply_feedback_item(&mut self.state, &est, &self.params)?;
            trace(&self.state.p);
        }
        self.state.round += 1;
        Ok(())
    }
}
