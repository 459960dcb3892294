//! Value types shared by the learner, the environment and the analysis code.

use serde::Serialize;

use crate::error::{invalid, Result};

/// Absolute tolerance on the unit-sum invariant.
pub const SUM_TOLERANCE: f64 = 1e-9;

/// Drift above which an updated distribution is renormalized.
pub const RENORM_DRIFT: f64 = 1e-12;

/// Neumaier-compensated sum.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0_f64;
    let mut carry = 0.0_f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            carry += (sum - t) + v;
        } else {
            carry += (v - t) + sum;
        }
        sum = t;
    }
    sum + carry
}

/// A probability vector over `K` arms.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimplexDistribution {
    probs: Vec<f64>,
}

impl SimplexDistribution {
    pub fn uniform(arms: usize) -> Result<Self> {
        if arms == 0 {
            return Err(invalid!("a distribution needs at least one arm"));
        }
        Ok(Self {
            probs: vec![1.0 / arms as f64; arms],
        })
    }

    /// Wraps `probs` after checking the simplex invariants.
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if !is_simplex(&probs) {
            return Err(invalid!("not a probability vector: {probs:?}"));
        }
        Ok(Self { probs })
    }

    /// Wraps `probs` without checking. The caller owns the invariant.
    pub(crate) fn from_raw(probs: Vec<f64>) -> Self {
        Self { probs }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn arms(&self) -> usize {
        self.probs.len()
    }

    pub fn min(&self) -> f64 {
        self.probs.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn total(&self) -> f64 {
        compensated_sum(self.probs.iter().copied())
    }

    /// Expected loss `p · l`.
    pub fn dot(&self, losses: &LossVector) -> f64 {
        compensated_sum(self.probs.iter().zip(losses.values()).map(|(p, l)| p * l))
    }

    pub fn is_valid(&self) -> bool {
        is_simplex(&self.probs)
    }
}

/// Nonnegativity and unit sum within [`SUM_TOLERANCE`].
pub fn is_simplex(probs: &[f64]) -> bool {
    !probs.is_empty()
        && probs.iter().all(|p| p.is_finite() && *p >= 0.0)
        && (compensated_sum(probs.iter().copied()) - 1.0).abs() <= SUM_TOLERANCE
}

/// `k` distinct arms played together in one round, kept sorted.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Action {
    arms: Vec<usize>,
}

impl Action {
    pub fn new(mut arms: Vec<usize>, num_arms: usize) -> Result<Self> {
        arms.sort_unstable();
        if arms.is_empty() {
            return Err(invalid!("an action needs at least one arm"));
        }
        if arms.windows(2).any(|w| w[0] == w[1]) {
            return Err(invalid!("duplicate arm in action {arms:?}"));
        }
        if let Some(&last) = arms.last() {
            if last >= num_arms {
                return Err(invalid!("arm {last} out of range for K={num_arms}"));
            }
        }
        Ok(Self { arms })
    }

    pub fn arms(&self) -> &[usize] {
        &self.arms
    }

    pub fn len(&self) -> usize {
        self.arms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.arms.is_empty()
    }

    pub fn contains(&self, arm: usize) -> bool {
        self.arms.binary_search(&arm).is_ok()
    }

    /// Average loss of the played arms, i.e. the loss of the extreme point
    /// that puts mass `1/k` on each of them.
    pub fn mean_loss(&self, losses: &LossVector) -> f64 {
        let k = self.arms.len() as f64;
        compensated_sum(self.arms.iter().map(|&i| losses.values()[i])) / k
    }
}

/// Full per-arm losses of one round, each in `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LossVector {
    losses: Vec<f64>,
}

impl LossVector {
    pub fn new(losses: Vec<f64>) -> Result<Self> {
        if let Some((i, l)) = losses
            .iter()
            .enumerate()
            .find(|(_, l)| !(0.0..=1.0).contains(*l))
        {
            return Err(invalid!("loss {l} on arm {i} outside [0, 1]"));
        }
        Ok(Self { losses })
    }

    pub fn zeros(arms: usize) -> Self {
        Self {
            losses: vec![0.0; arms],
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.losses
    }

    pub fn arms(&self) -> usize {
        self.losses.len()
    }
}
