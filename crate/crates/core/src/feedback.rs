//! Delayed, anonymous feedback.
//!
//! The learner only ever sees [`Observation`]s. The origin round of a
//! [`FeedbackItem`] stays with the simulation and analysis code.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::simplex::{Action, LossVector};

/// Observed losses of the arms of one past action.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    arm_losses: Vec<(usize, f64)>,
}

impl Observation {
    pub fn new(arm_losses: Vec<(usize, f64)>) -> Result<Self> {
        for (n, &(arm, loss)) in arm_losses.iter().enumerate() {
            if !(0.0..=1.0).contains(&loss) {
                return Err(invalid!("observed loss {loss} on arm {arm} outside [0, 1]"));
            }
            if arm_losses[..n].iter().any(|&(a, _)| a == arm) {
                return Err(invalid!("arm {arm} observed twice in one item"));
            }
        }
        Ok(Self { arm_losses })
    }

    /// Semi-bandit feedback: the losses of exactly the played arms.
    pub fn of_action(action: &Action, losses: &LossVector) -> Self {
        Self {
            arm_losses: action
                .arms()
                .iter()
                .map(|&i| (i, losses.values()[i]))
                .collect(),
        }
    }

    pub fn arm_losses(&self) -> &[(usize, f64)] {
        &self.arm_losses
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeedbackItem {
    observation: Observation,
    origin_round: usize,
}

impl FeedbackItem {
    pub fn new(observation: Observation, origin_round: usize) -> Self {
        Self {
            observation,
            origin_round,
        }
    }

    pub fn observation(&self) -> &Observation {
        &self.observation
    }

    /// Round the loss was incurred in. Not part of what the learner sees.
    pub fn origin_round(&self) -> usize {
        self.origin_round
    }
}

/// Order in which feedback delivered in the same round is handed to the learner.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DeliveryOrder {
    /// Most recent origin round first (equivalently, shortest delay first).
    #[default]
    NewestFirst,
    /// Enqueue order, which is ascending origin round.
    Arrival,
}

impl DeliveryOrder {
    pub fn as_str(self) -> &'static str {
        match self {
            DeliveryOrder::NewestFirst => "newest-first",
            DeliveryOrder::Arrival => "arrival",
        }
    }
}

/// Pending feedback keyed by delivery round. Delivery rounds are clamped
/// to the horizon, so everything is out by round `T`.
#[derive(Debug, Clone)]
pub struct FeedbackQueue {
    horizon: usize,
    order: DeliveryOrder,
    pending: BTreeMap<usize, Vec<FeedbackItem>>,
    enqueued: usize,
    delivered: usize,
}

impl FeedbackQueue {
    pub fn new(horizon: usize, order: DeliveryOrder) -> Self {
        Self {
            horizon,
            order,
            pending: BTreeMap::new(),
            enqueued: 0,
            delivered: 0,
        }
    }

    pub fn delivery_round(round: usize, delay: usize, horizon: usize) -> usize {
        round.saturating_add(delay).min(horizon)
    }

    /// Schedules `item`, produced at `round`, for delivery `delay` rounds later.
    /// Returns the delivery round.
    pub fn enqueue(&mut self, item: FeedbackItem, round: usize, delay: usize) -> Result<usize> {
        if round == 0 || round > self.horizon {
            return Err(invalid!(
                "cannot enqueue feedback for round {round} with horizon {}",
                self.horizon
            ));
        }
        let at = Self::delivery_round(round, delay, self.horizon);
        self.pending.entry(at).or_default().push(item);
        self.enqueued += 1;
        Ok(at)
    }

    /// Removes and returns everything scheduled for round `t`.
    pub fn deliver(&mut self, t: usize) -> Vec<FeedbackItem> {
        let mut items = self.pending.remove(&t).unwrap_or_default();
        if self.order == DeliveryOrder::NewestFirst {
            items.reverse();
        }
        self.delivered += items.len();
        items
    }

    pub fn is_empty(&self) -> bool {
        self.pending.is_empty()
    }

    pub fn pending_len(&self) -> usize {
        self.pending.values().map(Vec::len).sum()
    }

    pub fn enqueued(&self) -> usize {
        self.enqueued
    }

    pub fn delivered(&self) -> usize {
        self.delivered
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn item(s: usize) -> FeedbackItem {
        FeedbackItem::new(Observation::new(vec![(0, 0.5)]).unwrap(), s)
    }

    fn two_zero_zero(order: DeliveryOrder) -> FeedbackQueue {
        let mut q = FeedbackQueue::new(3, order);
        for (s, d) in [(1, 2), (2, 0), (3, 0)] {
            q.enqueue(item(s), s, d).unwrap();
        }
        q
    }

    #[test]
    fn delivery_rounds() {
        let mut q = FeedbackQueue::new(3, DeliveryOrder::Arrival);
        assert_eq!(q.enqueue(item(1), 1, 2).unwrap(), 3);
        assert_eq!(q.enqueue(item(2), 2, 0).unwrap(), 2);
        assert_eq!(q.enqueue(item(3), 3, 5).unwrap(), 3);
        assert!(q.enqueue(item(4), 4, 0).is_err());
        assert!(q.enqueue(item(0), 0, 0).is_err());
    }

    #[test]
    fn empty_round_delivers_nothing() {
        let mut q = two_zero_zero(DeliveryOrder::NewestFirst);
        assert!(q.deliver(1).is_empty());
    }

    #[test]
    fn small_schedule_by_hand() {
        // d = (2, 0, 0): L_1 = {}, L_2 = {s=2}, L_3 = {s=1, s=3}
        let mut q = two_zero_zero(DeliveryOrder::NewestFirst);
        assert!(q.deliver(1).is_empty());
        let l2: Vec<_> = q.deliver(2).iter().map(FeedbackItem::origin_round).collect();
        assert_eq!(l2, vec![2]);
        let l3: Vec<_> = q.deliver(3).iter().map(FeedbackItem::origin_round).collect();
        assert_eq!(l3, vec![3, 1]);
        assert!(q.is_empty());
        assert_eq!(q.enqueued(), q.delivered());

        let mut q = two_zero_zero(DeliveryOrder::Arrival);
        q.deliver(2);
        let l3: Vec<_> = q.deliver(3).iter().map(FeedbackItem::origin_round).collect();
        assert_eq!(l3, vec![1, 3]);
    }

    #[test]
    fn observation_rejects_duplicates_and_range() {
        assert!(Observation::new(vec![(0, 0.1), (0, 0.2)]).is_err());
        assert!(Observation::new(vec![(0, 1.2)]).is_err());
    }
}
