use serde::Serialize;

use crate::environment::{DelaySchedule, RunRecord};
use crate::error::{invalid, Result};
use crate::feedback::{DeliveryOrder, FeedbackItem, FeedbackQueue, Observation};

/// One virtual slot `tau`: the `tau`-th feedback item consumed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct VirtualSlot {
    pub tau: usize,
    /// Round the consumed loss was incurred in, `t(tau)`.
    pub t_of_tau: usize,
    /// Feedback received strictly before round `t(tau)`, `L_{t(tau)-1}`.
    pub l_before: usize,
    /// Staleness `tau - 1 - L_{t(tau)-1}`. Signed so a violation is visible.
    pub s_tilde: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VirtualSlotMap {
    pub rows: Vec<VirtualSlot>,
}

/// Outcome of checking the staleness identities against a schedule.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SlotCheck {
    pub is_permutation: bool,
    pub negative_staleness: usize,
    pub staleness_sum: i64,
    pub effective_delay_sum: i64,
    pub max_staleness: i64,
    pub staleness_bound: i64,
    pub over_bound: usize,
}

impl SlotCheck {
    pub fn passed(&self) -> bool {
        self.is_permutation
            && self.negative_staleness == 0
            && self.staleness_sum == self.effective_delay_sum
            && self.over_bound == 0
    }
}

impl VirtualSlotMap {
    /// Builds the map from the consumption order of origin rounds and the
    /// per-round delivery counts `|L_1|..|L_T|`.
    pub fn from_deliveries(sequence: &[usize], per_round: &[usize]) -> Result<Self> {
        let horizon = per_round.len();
        if sequence.len() != per_round.iter().sum::<usize>() {
            return Err(invalid!(
                "{} consumed items but delivery counts sum to {}",
                sequence.len(),
                per_round.iter().sum::<usize>()
            ));
        }
        // cumulative[t] = L_t, cumulative[0] = 0
        let mut cumulative = Vec::with_capacity(horizon + 1);
        cumulative.push(0usize);
        for n in per_round {
            cumulative.push(cumulative.last().unwrap() + n);
        }
        let rows = sequence
            .iter()
            .enumerate()
            .map(|(i, &t)| {
                if t == 0 || t > horizon {
                    return Err(invalid!("origin round {t} outside 1..={horizon}"));
                }
                let tau = i + 1;
                let l_before = cumulative[t - 1];
                Ok(VirtualSlot {
                    tau,
                    t_of_tau: t,
                    l_before,
                    s_tilde: tau as i64 - 1 - l_before as i64,
                })
            })
            .collect::<Result<_>>()?;
        Ok(Self { rows })
    }

    pub fn from_run(record: &RunRecord) -> Result<Self> {
        let per_round: Vec<usize> = record.rounds.iter().map(|r| r.delivered).collect();
        Self::from_deliveries(&record.delivery_sequence, &per_round)
    }

    pub fn t_of_tau(&self) -> Vec<usize> {
        self.rows.iter().map(|r| r.t_of_tau).collect()
    }

    pub fn l_before(&self) -> Vec<usize> {
        self.rows.iter().map(|r| r.l_before).collect()
    }

    pub fn s_tilde(&self) -> Vec<i64> {
        self.rows.iter().map(|r| r.s_tilde).collect()
    }

    /// Checks, in integer arithmetic: `t(.)` permutes `1..=T`; every
    /// staleness is nonnegative; staleness sums to the total clamped delay;
    /// every staleness is at most `2 * max_delay`.
    pub fn check(&self, schedule: &DelaySchedule) -> SlotCheck {
        let horizon = schedule.horizon();
        let mut seen = vec![false; horizon + 1];
        let mut is_permutation = self.rows.len() == horizon;
        for r in &self.rows {
            if r.t_of_tau == 0 || r.t_of_tau > horizon || seen[r.t_of_tau] {
                is_permutation = false;
            } else {
                seen[r.t_of_tau] = true;
            }
        }
        let staleness_bound = 2 * schedule.d_bar() as i64;
        SlotCheck {
            is_permutation,
            negative_staleness: self.rows.iter().filter(|r| r.s_tilde < 0).count(),
            staleness_sum: self.rows.iter().map(|r| r.s_tilde).sum(),
            effective_delay_sum: schedule.effective_delays().iter().map(|&d| d as i64).sum(),
            max_staleness: self.rows.iter().map(|r| r.s_tilde).max().unwrap_or(0),
            staleness_bound,
            over_bound: self.rows.iter().filter(|r| r.s_tilde > staleness_bound).count(),
        }
    }
}

/// Replays the delivery process of `schedule` and records every virtual slot.
/// Uses the same queue and within-round order as the simulator.
pub fn virtual_slot_map(schedule: &DelaySchedule, order: DeliveryOrder) -> Result<VirtualSlotMap> {
    let horizon = schedule.horizon();
    let mut queue = FeedbackQueue::new(horizon, order);
    let mut sequence = Vec::with_capacity(horizon);
    let mut per_round = Vec::with_capacity(horizon);
    let blank = Observation::new(Vec::new())?;
    for t in 1..=horizon {
        queue.enqueue(FeedbackItem::new(blank.clone(), t), t, schedule.delay(t))?;
        let got = queue.deliver(t);
        per_round.push(got.len());
        sequence.extend(got.iter().map(FeedbackItem::origin_round));
    }
    VirtualSlotMap::from_deliveries(&sequence, &per_round)
}
