use serde::Serialize;

use crate::environment::RunRecord;
use crate::error::{invalid, Result};
use crate::policy::regret_bound;
use crate::simplex::{compensated_sum, Action, LossVector};

/// Regret of one run against the best fixed `k`-subset in hindsight.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegretReport {
    /// `sum_t (p_t - p*) . l_t`
    pub pseudo_regret: f64,
    /// `sum_t (mean loss of a_t - p* . l_t)`
    pub realized_regret: f64,
    pub best_fixed_arms: Vec<usize>,
    /// `p* . sum_t l_t`
    pub comparator_value: f64,
    /// Reference bound with constant 1 at the full horizon.
    pub bound_value: f64,
    pub pseudo_curve: Vec<f64>,
    pub realized_curve: Vec<f64>,
    /// Reference bound at `(t, D_t)` where `D_t` sums the delays of rounds `1..=t`.
    pub bound_curve: Vec<f64>,
}

/// Picks the `k` arms with the smallest cumulative loss, lower index first on
/// ties. Returns the action and `(1/k) * sum` of their column sums.
pub fn best_from_column_sums(column_sums: &[f64], k: usize) -> Result<(Action, f64)> {
    if k == 0 || k > column_sums.len() {
        return Err(invalid!("k={k} outside 1..={}", column_sums.len()));
    }
    let mut order: Vec<usize> = (0..column_sums.len()).collect();
    // stable sort keeps lower indices first among equal sums
    order.sort_by(|&a, &b| column_sums[a].total_cmp(&column_sums[b]));
    order.truncate(k);
    let value = compensated_sum(order.iter().map(|&i| column_sums[i])) / k as f64;
    Ok((Action::new(order, column_sums.len())?, value))
}

pub fn best_fixed_action(losses: &[&LossVector], k: usize) -> Result<(Action, f64)> {
    let arms = losses.first().map(|l| l.arms()).ok_or_else(|| invalid!("empty loss matrix"))?;
    let sums: Vec<f64> = (0..arms)
        .map(|i| compensated_sum(losses.iter().map(|l| l.values()[i])))
        .collect();
    best_from_column_sums(&sums, k)
}

/// Expected regret of playing a uniformly random `k`-subset every round
/// against stationary per-arm `means`: `T * (mean(means) - mean(best k))`.
pub fn uniform_expected_regret(means: &[f64], k: usize, horizon: usize) -> Result<f64> {
    let (_, best) = best_from_column_sums(means, k)?;
    let avg = compensated_sum(means.iter().copied()) / means.len() as f64;
    Ok(horizon as f64 * (avg - best))
}

pub fn regret_report(record: &RunRecord) -> Result<RegretReport> {
    let k = record.params.plays;
    let losses = record.loss_matrix();
    let (best, comparator_value) = best_fixed_action(&losses, k)?;

    let mut pseudo_curve = Vec::with_capacity(losses.len());
    let mut realized_curve = Vec::with_capacity(losses.len());
    let mut bound_curve = Vec::with_capacity(losses.len());
    let (mut pseudo, mut realized) = (0.0, 0.0);
    let mut delay_so_far = 0;
    let d_bar = record.params.d_bar;
    for (t, round) in record.rounds.iter().enumerate() {
        let comparator = best.mean_loss(&round.losses);
        pseudo += round.p.dot(&round.losses) - comparator;
        realized += round.action.mean_loss(&round.losses) - comparator;
        pseudo_curve.push(pseudo);
        realized_curve.push(realized);
        delay_so_far += record.schedule.delay(t + 1);
        bound_curve.push(regret_bound(record.params.arms, k, d_bar, t + 1, delay_so_far));
    }

    Ok(RegretReport {
        pseudo_regret: pseudo,
        realized_regret: realized,
        best_fixed_arms: best.arms().to_vec(),
        comparator_value,
        bound_value: regret_bound(
            record.params.arms,
            k,
            d_bar,
            record.horizon(),
            record.schedule.total_delay(),
        ),
        pseudo_curve,
        realized_curve,
        bound_curve,
    })
}
